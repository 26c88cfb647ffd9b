use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use twofold::flows::{Arc, FieldTag};
use twofold::integrator::{
    integrate, oracle_return, EventKind, FieldSpec, IntegratorOptions, Mode,
};
use twofold::maps::{first_return, in_return_region, iterate};
use twofold::model::{classify_singularity, is_reversible};
use twofold::orbits::{
    assemble_orbit, find_families_semilinear, full_report, ClosedOrbit, FamilyReport, FullReport,
    OrbitKind,
};
use twofold::{Coefficients, Error, Point3, SigmaPoint, SingularityClass};

use crate::output::{g17, to_json, Csv, Document, SCHEMA_VERSION};
use crate::svg::{project, Line, Plot};
use crate::{
    ClassifyArgs, CoeffArgs, Format, IntegratorArgs, OrbitsArgs, PlotArgs, PlotKind, ReturnMapArgs,
    SimulateArgs, VerifyArgs,
};

/// Maximum deviation accepted by `verify`.
pub const VERIFY_TOL: f64 = 1e-6;

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotClosed { .. } => 3,
            Error::MaxEventsExceeded { .. }
            | Error::StepTooCoarse { .. }
            | Error::NoReturn { .. } => 4,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    let res = match out {
        Some(path) => fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    res.map_err(|e| Failure {
        code: 1,
        message: format!("cannot write output: {e}"),
    })
}

impl CoeffArgs {
    fn field_spec(&self) -> Result<FieldSpec, Failure> {
        if let Some(path) = &self.spec {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
            return Ok(FieldSpec::parse(&text)?);
        }
        let get = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| Failure::input(format!("missing --{flag} (or --spec)")))
        };
        let c = Coefficients::new(
            get(self.cx, "cx")?,
            get(self.cy, "cy")?,
            get(self.cxy, "cxy")?,
            get(self.cyx, "cyx")?,
        )?;
        Ok(c.into())
    }

    fn coefficients(&self) -> Result<Coefficients, Failure> {
        Ok(self.field_spec()?.base)
    }
}

impl IntegratorArgs {
    fn options(&self) -> IntegratorOptions {
        IntegratorOptions {
            step: self.step,
            event_tol: self.event_tol,
            max_events: self.max_events,
            ..Default::default()
        }
    }
}

#[derive(Serialize)]
struct CoeffInput {
    coefficients: Coefficients,
}

pub fn classify(args: ClassifyArgs) -> Outcome {
    let c = args.coeffs.coefficients()?;
    let report = full_report(&c)?;
    let text = match args.format {
        Format::Json => to_json(&Document {
            schema_version: SCHEMA_VERSION,
            command: "classify",
            input: CoeffInput { coefficients: c },
            result: &report,
        }),
        Format::Text => classify_text(&report),
    };
    emit(args.out.as_deref(), &text)
}

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| g17(*x)).collect();
    format!("[{}]", items.join(", "))
}

fn classify_text(r: &FullReport) -> String {
    let c = &r.coefficients;
    let s = &r.system;
    let mut t = String::new();
    let _ = writeln!(
        t,
        "coefficients: c_x={} c_y={} c_xy={} c_yx={}",
        g17(c.c_x),
        g17(c.c_y),
        g17(c.c_xy),
        g17(c.c_yx)
    );
    let _ = writeln!(t, "class: {:?}", s.class);
    let _ = writeln!(t, "simple: {}", s.simple);
    let _ = writeln!(t, "reversible: {}", s.reversible);
    let _ = writeln!(t, "resonant: {}", s.resonant);
    let _ = writeln!(t, "sliding degenerate: {}", s.sliding_degenerate);
    let _ = writeln!(t, "regular two-fold: {}", s.regular_two_fold);
    let _ = writeln!(t, "generic reversible: {}", s.generic_reversible);
    match &r.map {
        Some(m) => {
            let ev: Vec<String> = m
                .eigenvalues
                .iter()
                .map(|z| {
                    if z.im == 0.0 {
                        g17(z.re)
                    } else {
                        let sign = if z.im < 0.0 { '-' } else { '+' };
                        format!("{}{sign}{}i", g17(z.re), g17(z.im.abs()))
                    }
                })
                .collect();
            let _ = writeln!(t, "return map: {:?}, eigenvalues {}", m.kind, ev.join(", "));
        }
        None => {
            let _ = writeln!(t, "return map: not reversible");
        }
    }
    match &r.families {
        Some(f) => {
            let _ = writeln!(t, "periodic slopes: {}", list(&f.periodic_alphas));
            let _ = writeln!(t, "pseudo-periodic slopes: {}", list(&f.pseudo_alphas));
            if let Some(m) = f.fixed_line_slope {
                let _ = writeln!(
                    t,
                    "fixed line slope: {} (verified: {})",
                    g17(m),
                    f.fixed_line_verified.unwrap_or(false)
                );
            }
            if let Some(e) = f.escape_wedge_empty {
                let _ = writeln!(t, "escape wedge empty: {e}");
            }
        }
        None => {
            let _ = writeln!(t, "families: not searched (not elliptic)");
        }
    }
    t
}

pub fn return_map(args: ReturnMapArgs) -> Outcome {
    let c = args.coeffs.coefficients()?;
    if !(args.x.is_finite() && args.y.is_finite()) {
        return Err(Failure::input("start point must be finite"));
    }
    let p = SigmaPoint::new(args.x, args.y);
    let steps = iterate(&c, p, args.n)?;
    let mut csv = Csv::new(&["k", "x", "y", "t1", "t2", "valid"]);
    csv.row(&[
        "0".into(),
        g17(p.x),
        g17(p.y),
        String::new(),
        String::new(),
        "true".into(),
    ]);
    for (k, s) in steps.iter().enumerate() {
        csv.row(&[
            (k + 1).to_string(),
            g17(s.image.x),
            g17(s.image.y),
            g17(s.times[0]),
            g17(s.times[1]),
            s.valid.to_string(),
        ]);
    }
    emit(args.out.as_deref(), &csv.finish())
}

#[derive(Serialize)]
struct OrbitsInput {
    coefficients: Coefficients,
    anchor: Option<SigmaPoint>,
}

#[derive(Serialize)]
struct SegmentSummary {
    field_tag: FieldTag,
    start: Point3,
    end: Point3,
    duration: f64,
}

#[derive(Serialize)]
struct OrbitSummary {
    kind: OrbitKind,
    alpha: Option<f64>,
    anchor: SigmaPoint,
    closure_error: f64,
    zero_length_arc: bool,
    segments: Vec<SegmentSummary>,
}

impl From<&ClosedOrbit> for OrbitSummary {
    fn from(o: &ClosedOrbit) -> Self {
        Self {
            kind: o.kind,
            alpha: o.alpha,
            anchor: o.anchor,
            closure_error: o.closure_error,
            zero_length_arc: o.zero_length_arc,
            segments: o
                .segments
                .iter()
                .map(|a| SegmentSummary {
                    field_tag: a.field_tag,
                    start: a.start,
                    end: a.end,
                    duration: a.duration,
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct OrbitsResult {
    class: SingularityClass,
    /// Absent outside the elliptic class, where no families are searched.
    families: Option<FamilyReport>,
    orbit: Option<OrbitSummary>,
}

fn families_if_elliptic(c: &Coefficients) -> Result<Option<FamilyReport>, Failure> {
    match find_families_semilinear(c) {
        Ok(f) => Ok(Some(f)),
        Err(Error::NotElliptic) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn anchor(x: Option<f64>, y: Option<f64>) -> Option<SigmaPoint> {
    Some(SigmaPoint::new(x?, y?))
}

fn orbit_csv(orbit: &ClosedOrbit) -> String {
    let mut csv = Csv::new(&["seg", "t", "x", "y", "z"]);
    for (i, arc) in orbit.segments.iter().enumerate() {
        let n = arc.samples.len();
        for (j, p) in arc.samples.iter().enumerate() {
            let t = arc.duration * j as f64 / (n - 1) as f64;
            csv.row(&[i.to_string(), g17(t), g17(p.x), g17(p.y), g17(p.z)]);
        }
    }
    csv.finish()
}

pub fn orbits(args: OrbitsArgs) -> Outcome {
    let c = args.coeffs.coefficients()?;
    let anchor = anchor(args.anchor_x, args.anchor_y);
    let orbit = anchor.map(|p| assemble_orbit(&c, p)).transpose()?;
    let result = OrbitsResult {
        class: classify_singularity(&c),
        families: families_if_elliptic(&c)?,
        orbit: orbit.as_ref().map(OrbitSummary::from),
    };
    let doc = Document {
        schema_version: SCHEMA_VERSION,
        command: "orbits",
        input: OrbitsInput {
            coefficients: c,
            anchor,
        },
        result,
    };
    if let (Some(o), Some(path)) = (&orbit, &args.orbit_out) {
        emit(Some(path), &orbit_csv(o))?;
    }
    emit(args.out.as_deref(), &to_json(&doc))
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::AboveX => "AboveX",
        Mode::BelowY => "BelowY",
        Mode::Slide => "Slide",
    }
}

fn event_name(k: EventKind) -> &'static str {
    match k {
        EventKind::Crossing => "Crossing",
        EventKind::SlideEntry => "SlideEntry",
        EventKind::SlideExit => "SlideExit",
        EventKind::Tangency => "Tangency",
    }
}

pub fn simulate(args: SimulateArgs) -> Outcome {
    let spec = args.coeffs.field_spec()?;
    let opts = IntegratorOptions {
        backward: args.backward,
        ..args.integrator.options()
    };
    let p0 = Point3::new(args.x0, args.y0, args.z0);
    if !p0.as_array().iter().all(|v| v.is_finite()) {
        return Err(Failure::input("start point must be finite"));
    }
    let traj = integrate(&spec, p0, args.tmax, &opts)?;
    let mut csv = Csv::new(&["t", "x", "y", "z", "mode"]);
    for s in &traj.samples {
        csv.row(&[
            g17(s.t),
            g17(s.p.x),
            g17(s.p.y),
            g17(s.p.z),
            mode_name(s.mode).into(),
        ]);
    }
    if let Some(path) = &args.events_out {
        let mut ev = Csv::new(&["t", "x", "y", "z", "kind"]);
        for e in &traj.events {
            ev.row(&[
                g17(e.t),
                g17(e.p.x),
                g17(e.p.y),
                g17(e.p.z),
                event_name(e.kind).into(),
            ]);
        }
        emit(Some(path), &ev.finish())?;
    }
    emit(args.out.as_deref(), &csv.finish())
}

#[derive(Serialize)]
struct VerifyInput {
    coefficients: Coefficients,
    samples: usize,
    seed: u64,
    step: f64,
    event_tol: f64,
}

#[derive(Serialize)]
struct VerifyResult {
    max_deviation: f64,
    worst_point: SigmaPoint,
    tolerance: f64,
    passed: bool,
}

/// Uniform points of the unit disk inside the return region.
fn sample_return_region(
    c: &Coefficients,
    rng: &mut impl Rng,
    n: usize,
) -> Result<Vec<SigmaPoint>, Failure> {
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n {
        attempts += 1;
        if attempts > 1000 * n + 100_000 {
            return Err(Failure::input(
                "return region has (almost) no area in the unit disk",
            ));
        }
        let p = SigmaPoint::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if p.norm() <= 1.0 && in_return_region(c, p)? {
            out.push(p);
        }
    }
    Ok(out)
}

pub fn verify(args: VerifyArgs) -> Outcome {
    let spec = args.coeffs.field_spec()?;
    let c = spec.base;
    if args.samples == 0 {
        return Err(Failure::input("--samples must be at least 1"));
    }
    if !is_reversible(&c) {
        return Err(Error::NotReversible.into());
    }
    let opts = args.integrator.options();
    opts.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let points = sample_return_region(&c, &mut rng, args.samples)?;
    let mut max_deviation = 0.0f64;
    let mut worst_point = points[0];
    for p in points {
        let d = oracle_return(&spec, p, &opts)?.dist(first_return(&c, p).image);
        if d > max_deviation || d.is_nan() {
            max_deviation = d;
            worst_point = p;
        }
    }
    let passed = max_deviation <= VERIFY_TOL;
    let doc = Document {
        schema_version: SCHEMA_VERSION,
        command: "verify",
        input: VerifyInput {
            coefficients: c,
            samples: args.samples,
            seed: args.seed,
            step: opts.step,
            event_tol: opts.event_tol,
        },
        result: VerifyResult {
            max_deviation,
            worst_point,
            tolerance: VERIFY_TOL,
            passed,
        },
    };
    emit(args.out.as_deref(), &to_json(&doc))?;
    if passed {
        Ok(())
    } else {
        Err(Failure {
            code: 5,
            message: format!(
                "max deviation {} exceeds {}",
                g17(max_deviation),
                g17(VERIFY_TOL)
            ),
        })
    }
}

fn closed_curve(orbit: &ClosedOrbit) -> Vec<SigmaPoint> {
    let mut pts: Vec<SigmaPoint> = Vec::new();
    for arc in &orbit.segments {
        let Arc { samples, .. } = arc;
        let skip = usize::from(!pts.is_empty());
        pts.extend(samples.iter().skip(skip).map(|p| project(*p)));
    }
    pts.pop();
    pts
}

pub fn plot(args: PlotArgs) -> Outcome {
    let c = args.coeffs.coefficients()?;
    let coeff_label = format!(
        "c_x={} c_y={} c_xy={} c_yx={}",
        g17(c.c_x),
        g17(c.c_y),
        g17(c.c_xy),
        g17(c.c_yx)
    );
    let mut plot = Plot {
        return_boundary: is_reversible(&c).then(|| 2.0 * c.c_xy / c.c_x),
        ..Default::default()
    };
    if let Some(f) = families_if_elliptic(&c)? {
        for a in &f.periodic_alphas {
            plot.family_lines.push(Line {
                slope: *a,
                label: format!("periodic family, alpha = {}", g17(*a)),
                class: "periodic",
            });
        }
        for a in &f.pseudo_alphas {
            plot.family_lines.push(Line {
                slope: *a,
                label: format!("pseudo-periodic family, alpha = {}", g17(*a)),
                class: "pseudo",
            });
        }
    }
    match args.what {
        PlotKind::Regions => plot.title = format!("Regions of the switching plane, {coeff_label}"),
        PlotKind::Map => {
            let p = SigmaPoint::new(args.x, args.y);
            let steps = iterate(&c, p, args.n)?;
            plot.points.push(p);
            plot.points.extend(steps.iter().map(|s| s.image));
            plot.title = format!(
                "First-return iterates of ({}, {}), {coeff_label}",
                g17(p.x),
                g17(p.y)
            );
        }
        PlotKind::Orbit => {
            let Some(p) = anchor(args.anchor_x, args.anchor_y) else {
                return Err(Failure::input(
                    "--what orbit needs --anchor-x and --anchor-y",
                ));
            };
            let orbit = assemble_orbit(&c, p)?;
            plot.curves.push(closed_curve(&orbit));
            plot.title = format!(
                "Closed orbit through ({}, {}), {coeff_label}",
                g17(p.x),
                g17(p.y)
            );
        }
    }
    emit(args.out.as_deref(), &plot.render())
}
