//! Event-driven numerical integration of the piecewise-smooth system.
//!
//! This is deliberately independent of the closed forms in [`crate::flows`]
//! and [`crate::maps`]: it only evaluates the vector fields, steps them with
//! fixed-step RK4 and locates switching events by bisection. Sliding follows
//! the normalized sliding field built from the two fields at the point.
//!
//! Fields may carry polynomial perturbations of total degree 2..=4, so the
//! same machinery checks that the normal form is the leading-order model.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate, Coefficients, Point3, SigmaPoint, TANGENCY_TOL};

/// Lowest total degree allowed in a perturbation.
pub const MIN_PERTURBATION_DEGREE: u32 = 2;
/// Highest total degree allowed in a perturbation.
pub const MAX_PERTURBATION_DEGREE: u32 = 4;

/// One monomial `x^i y^j z^k` with a coefficient per field component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub exponents: [u32; 3],
    pub coefficients: [f64; 3],
}

/// Polynomial perturbation `F = (f¹, f², f³)` with no constant or linear part.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Perturbation {
    terms: Vec<Monomial>,
}

impl Perturbation {
    /// Builds a perturbation, merging repeated monomials.
    pub fn new(terms: impl IntoIterator<Item = Monomial>) -> Result<Self> {
        let mut merged: BTreeMap<[u32; 3], [f64; 3]> = BTreeMap::new();
        for m in terms {
            let degree: u32 = m.exponents.iter().sum();
            if !(MIN_PERTURBATION_DEGREE..=MAX_PERTURBATION_DEGREE).contains(&degree) {
                return Err(Error::InvalidSpec(format!(
                    "monomial {:?} has total degree {degree}; allowed {MIN_PERTURBATION_DEGREE}..={MAX_PERTURBATION_DEGREE}",
                    m.exponents
                )));
            }
            if m.coefficients.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "monomial {:?} has a non-finite coefficient",
                    m.exponents
                )));
            }
            let e = merged.entry(m.exponents).or_default();
            for (a, b) in e.iter_mut().zip(m.coefficients) {
                *a += b;
            }
        }
        Ok(Self {
            terms: merged
                .into_iter()
                .map(|(exponents, coefficients)| Monomial {
                    exponents,
                    coefficients,
                })
                .collect(),
        })
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn eval(&self, p: Point3) -> [f64; 3] {
        let mut out = [0.0; 3];
        for m in &self.terms {
            let [i, j, k] = m.exponents;
            let w = p.x.powi(i as i32) * p.y.powi(j as i32) * p.z.powi(k as i32);
            for (o, c) in out.iter_mut().zip(m.coefficients) {
                *o += c * w;
            }
        }
        out
    }
}

/// Normal-form coefficients plus optional perturbations of the two fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub base: Coefficients,
    pub perturb_x: Option<Perturbation>,
    pub perturb_y: Option<Perturbation>,
}

impl From<Coefficients> for FieldSpec {
    fn from(base: Coefficients) -> Self {
        Self {
            base,
            perturb_x: None,
            perturb_y: None,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    c_x: f64,
    c_y: f64,
    c_xy: f64,
    c_yx: f64,
    perturb_x: Option<BTreeMap<String, [f64; 3]>>,
    perturb_y: Option<BTreeMap<String, [f64; 3]>>,
}

fn parse_table(
    name: &str,
    table: Option<BTreeMap<String, [f64; 3]>>,
) -> Result<Option<Perturbation>> {
    let Some(table) = table else {
        return Ok(None);
    };
    let mut terms = Vec::with_capacity(table.len());
    for (key, coefficients) in table {
        let parts: Vec<&str> = key.split(',').map(str::trim).collect();
        let exps: Vec<u32> = parts
            .iter()
            .map(|s| s.parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidSpec(format!("{name}: bad exponent key {key:?}")))?;
        let exponents: [u32; 3] = exps.try_into().map_err(|_| {
            Error::InvalidSpec(format!("{name}: key {key:?} needs three exponents"))
        })?;
        terms.push(Monomial {
            exponents,
            coefficients,
        });
    }
    Perturbation::new(terms).map(Some)
}

impl FieldSpec {
    /// Parses the TOML record
    ///
    /// ```toml
    /// c_x = -1.0
    /// c_y = 1.0
    /// c_xy = 2.0
    /// c_yx = -2.0
    ///
    /// [perturb_x]
    /// "2,0,0" = [1e-4, 0.0, 0.0]   # x² · (1e-4, 0, 0)
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        let base = validate(Coefficients {
            c_x: raw.c_x,
            c_y: raw.c_y,
            c_xy: raw.c_xy,
            c_yx: raw.c_yx,
        })?;
        Ok(Self {
            base,
            perturb_x: parse_table("perturb_x", raw.perturb_x)?,
            perturb_y: parse_table("perturb_y", raw.perturb_y)?,
        })
    }

    pub fn is_semilinear(&self) -> bool {
        let empty = |p: &Option<Perturbation>| p.as_ref().is_none_or(|p| p.terms.is_empty());
        empty(&self.perturb_x) && empty(&self.perturb_y)
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// `z > 0`, governed by X.
    Above,
    /// `z < 0`, governed by Y.
    Below,
}

pub fn eval_field(spec: &FieldSpec, p: Point3, side: Side) -> [f64; 3] {
    let c = &spec.base;
    let (mut v, perturbation) = match side {
        Side::Above => ([c.c_x, c.c_xy, p.x], &spec.perturb_x),
        Side::Below => ([c.c_yx, c.c_y, p.y], &spec.perturb_y),
    };
    if let Some(f) = perturbation {
        for (a, b) in v.iter_mut().zip(f.eval(p)) {
            *a += b;
        }
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub step: f64,
    /// Bisection target for `|z|` at switching events and for the normal
    /// component at sliding exits.
    pub event_tol: f64,
    /// Time budget for a single return leg.
    pub max_time: f64,
    pub max_events: usize,
    /// Normal components below this are treated as tangential contact.
    pub tangency_tol: f64,
    /// Integrate `-Z` instead of `Z`.
    pub backward: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            step: 1e-3,
            event_tol: 1e-12,
            max_time: 100.0,
            max_events: 10_000,
            tangency_tol: 1e-9,
            backward: false,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidOptions(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("step", self.step)?;
        positive("event_tol", self.event_tol)?;
        positive("max_time", self.max_time)?;
        if !(self.tangency_tol >= 0.0) {
            return Err(Error::InvalidOptions(
                "tangency_tol must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    AboveX,
    BelowY,
    Slide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Crossing,
    SlideEntry,
    SlideExit,
    Tangency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub p: Point3,
    pub mode: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub p: Point3,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
}

impl Trajectory {
    fn push_sample(&mut self, t: f64, p: Point3, mode: Mode) {
        if self.samples.last().is_none_or(|s| t > s.t) {
            self.samples.push(Sample { t, p, mode });
        }
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

type Vec3 = [f64; 3];

fn axpy(p: Point3, h: f64, v: Vec3) -> Point3 {
    Point3::new(p.x + h * v[0], p.y + h * v[1], p.z + h * v[2])
}

fn rk4(f: &impl Fn(Point3) -> Vec3, p: Point3, h: f64) -> Point3 {
    let k1 = f(p);
    let k2 = f(axpy(p, 0.5 * h, k1));
    let k3 = f(axpy(p, 0.5 * h, k2));
    let k4 = f(axpy(p, h, k3));
    let v = [0, 1, 2].map(|i| (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0);
    axpy(p, h, v)
}

/// Minimum over `(0, 1)` of the cubic Hermite interpolant with end values
/// `a, b` and end slopes `da, db`.
fn hermite_interior_min(a: f64, b: f64, da: f64, db: f64) -> f64 {
    let c2 = -3.0 * a - 2.0 * da + 3.0 * b - db;
    let c3 = 2.0 * a + da - 2.0 * b + db;
    let h = |s: f64| a + s * (da + s * (c2 + s * c3));
    // H'(s) = da + 2 c2 s + 3 c3 s².
    let (qa, qb, qc) = (3.0 * c3, 2.0 * c2, da);
    let mut roots = Vec::with_capacity(2);
    if qa.abs() < 1e-300 {
        if qb != 0.0 {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let r = disc.sqrt();
            roots.push((-qb + r) / (2.0 * qa));
            roots.push((-qb - r) / (2.0 * qa));
        }
    }
    roots
        .into_iter()
        .filter(|s| *s > 0.0 && *s < 1.0)
        .map(h)
        .fold(f64::INFINITY, f64::min)
}

enum Advance {
    /// The step stayed strictly inside the region.
    Free(Point3),
    /// The region was left after `θ` time units, at the given point.
    Hit(f64, Point3),
    /// Started on the boundary and never entered the region.
    Stuck,
}

/// One step of `f` from `p`, staying where `g > 0`. The boundary crossing,
/// if any, is located by bisection on the step length.
fn advance(
    f: &impl Fn(Point3) -> Vec3,
    g: &impl Fn(Point3) -> f64,
    p: Point3,
    h: f64,
    tol: f64,
) -> Advance {
    let q = rk4(f, p, h);
    if g(q) > 0.0 {
        return Advance::Free(q);
    }
    let (mut lo, mut hi) = (0.0, h);
    if !(g(p) > 0.0) {
        // Leaving the boundary: find a short step that is inside.
        let mut theta = 0.5 * h;
        let mut found = false;
        for _ in 0..64 {
            if g(rk4(f, p, theta)) > 0.0 {
                found = true;
                break;
            }
            hi = theta;
            theta *= 0.5;
        }
        if !found {
            return Advance::Stuck;
        }
        lo = theta;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let q = rk4(f, p, mid);
        let gq = g(q);
        if gq > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            if gq >= -tol {
                return Advance::Hit(mid, q);
            }
        }
    }
    Advance::Hit(hi, rk4(f, p, hi))
}

/// Rebuilds times from a step count since the last event, so long smooth
/// segments do not accumulate rounding.
struct Clock {
    start: f64,
    step: f64,
    steps: u64,
}

impl Clock {
    fn new(start: f64, step: f64) -> Self {
        Self {
            start,
            step,
            steps: 0,
        }
    }

    fn tick(&mut self, h: f64, t_max: f64) -> f64 {
        self.steps += 1;
        if h < self.step {
            t_max
        } else {
            self.start + self.steps as f64 * self.step
        }
    }
}

struct Engine<'a> {
    spec: &'a FieldSpec,
    opts: &'a IntegratorOptions,
    sign: f64,
}

impl<'a> Engine<'a> {
    fn new(spec: &'a FieldSpec, opts: &'a IntegratorOptions) -> Self {
        Self {
            spec,
            opts,
            sign: if opts.backward { -1.0 } else { 1.0 },
        }
    }

    fn field(&self, side: Side, p: Point3) -> Vec3 {
        eval_field(self.spec, p, side).map(|v| self.sign * v)
    }

    /// `(Xh, Yh)`: normal components of both fields.
    fn normals(&self, p: Point3) -> (f64, f64) {
        (self.field(Side::Above, p)[2], self.field(Side::Below, p)[2])
    }

    /// Derivative of a field's normal component along that field.
    fn second_normal(&self, side: Side, p: Point3) -> f64 {
        let v = self.field(side, p);
        let eps = 1e-6 * p.as_array().iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let plus = self.field(side, axpy(p, eps, v))[2];
        let minus = self.field(side, axpy(p, -eps, v))[2];
        (plus - minus) / (2.0 * eps)
    }

    fn sliding_vector(&self, p: Point3) -> Vec3 {
        let x = self.field(Side::Above, p);
        let y = self.field(Side::Below, p);
        [x[0] * y[2] - y[0] * x[2], x[1] * y[2] - y[1] * x[2], 0.0]
    }

    /// Continuation from a Σ-point by the Filippov convention; `None` at the
    /// two-fold itself.
    fn choose_mode(&self, p: Point3) -> Option<Mode> {
        let tol = self.opts.tangency_tol;
        let (xh, yh) = self.normals(p);
        if xh.abs() <= tol && yh.abs() <= tol {
            return None;
        }
        let up = xh > tol || (xh.abs() <= tol && self.second_normal(Side::Above, p) > 0.0);
        let down = yh < -tol || (yh.abs() <= tol && self.second_normal(Side::Below, p) < 0.0);
        Some(match (up, down) {
            (true, false) => Mode::AboveX,
            (false, true) => Mode::BelowY,
            _ => Mode::Slide,
        })
    }

    fn event_kind(&self, p: Point3) -> EventKind {
        let tol = self.opts.tangency_tol;
        let (xh, yh) = self.normals(p);
        if xh.abs() <= tol || yh.abs() <= tol {
            EventKind::Tangency
        } else if xh * yh > 0.0 {
            EventKind::Crossing
        } else {
            EventKind::SlideEntry
        }
    }

    /// Signs `(sx, sy)` with `sx·Xh > 0, sy·Yh > 0` inside the sliding or
    /// escaping region the point belongs to.
    fn slide_signs(&self, p: Point3) -> (f64, f64) {
        let tol = self.opts.tangency_tol;
        let (xh, yh) = self.normals(p);
        let escaping = if yh.abs() > tol { yh < 0.0 } else { xh > 0.0 };
        if escaping {
            (1.0, -1.0)
        } else {
            (-1.0, 1.0)
        }
    }

    /// Mode on the far side of a sliding exit, read off the signs of the
    /// normal components just past the exit.
    fn mode_beyond(&self, q: Point3) -> Mode {
        let (xh, yh) = self.normals(q);
        match (xh > 0.0, yh > 0.0) {
            (true, true) => Mode::AboveX,
            (false, false) => Mode::BelowY,
            _ => Mode::Slide,
        }
    }
}

/// Integrates from `p0` over `[0, t_max]` under the Filippov convention.
///
/// Points with `|z| <= event_tol` count as on Σ, and the continuation is
/// chosen from the signs of the two normal components there. Reaching the
/// two-fold, or sitting at a fold from which no field can depart, ends the
/// trajectory with a `Tangency` event.
pub fn integrate(
    spec: &FieldSpec,
    p0: Point3,
    t_max: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    validate(spec.base)?;
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidOptions(format!(
            "t_max must be non-negative, got {t_max}"
        )));
    }
    let eng = Engine::new(spec, opts);
    let mut traj = Trajectory::default();
    let mut t = 0.0;
    let mut p = p0;

    let mut mode = if p.z > opts.event_tol {
        Mode::AboveX
    } else if p.z < -opts.event_tol {
        Mode::BelowY
    } else {
        p.z = 0.0;
        match eng.choose_mode(p) {
            Some(m) => m,
            None => {
                traj.push_sample(0.0, p, Mode::Slide);
                traj.events.push(Event {
                    t: 0.0,
                    p,
                    kind: EventKind::Tangency,
                });
                return Ok(traj);
            }
        }
    };
    let mut slide_signs = eng.slide_signs(p);
    traj.push_sample(t, p, mode);
    let mut clock = Clock::new(t, opts.step);

    let record = |traj: &mut Trajectory, ev: Event| -> Result<()> {
        traj.events.push(ev);
        if traj.events.len() > opts.max_events {
            Err(Error::MaxEventsExceeded {
                max_events: opts.max_events,
            })
        } else {
            Ok(())
        }
    };

    while t < t_max {
        let h = opts.step.min(t_max - t);
        match mode {
            Mode::AboveX | Mode::BelowY => {
                let (side, zsign) = if mode == Mode::AboveX {
                    (Side::Above, 1.0)
                } else {
                    (Side::Below, -1.0)
                };
                let f = |q: Point3| eng.field(side, q);
                let g = |q: Point3| zsign * q.z;
                match advance(&f, &g, p, h, opts.event_tol) {
                    Advance::Free(q) => {
                        let dip = hermite_interior_min(
                            g(p),
                            g(q),
                            h * zsign * f(p)[2],
                            h * zsign * f(q)[2],
                        );
                        if dip < -opts.event_tol {
                            return Err(Error::StepTooCoarse { t });
                        }
                        t = clock.tick(h, t_max);
                        p = q;
                        traj.push_sample(t, p, mode);
                    }
                    Advance::Stuck => {
                        record(
                            &mut traj,
                            Event {
                                t,
                                p,
                                kind: EventKind::Tangency,
                            },
                        )?;
                        break;
                    }
                    Advance::Hit(theta, mut q) => {
                        t += theta;
                        clock = Clock::new(t, opts.step);
                        q.z = 0.0;
                        p = q;
                        let kind = eng.event_kind(p);
                        record(&mut traj, Event { t, p, kind })?;
                        let Some(next) = eng.choose_mode(p) else {
                            traj.push_sample(t, p, mode);
                            break;
                        };
                        mode = next;
                        if mode == Mode::Slide {
                            slide_signs = eng.slide_signs(p);
                        }
                        traj.push_sample(t, p, mode);
                    }
                }
            }
            Mode::Slide => {
                let (sx, sy) = slide_signs;
                let f = |q: Point3| eng.sliding_vector(q);
                let g = |q: Point3| {
                    let (xh, yh) = eng.normals(q);
                    (sx * xh).min(sy * yh)
                };
                match advance(&f, &g, p, h, opts.event_tol) {
                    Advance::Free(q) => {
                        t = clock.tick(h, t_max);
                        p = q;
                        traj.push_sample(t, p, mode);
                    }
                    Advance::Stuck => {
                        record(
                            &mut traj,
                            Event {
                                t,
                                p,
                                kind: EventKind::Tangency,
                            },
                        )?;
                        break;
                    }
                    Advance::Hit(theta, q) => {
                        let beyond = rk4(&f, p, (2.0 * theta).min(h));
                        t += theta;
                        clock = Clock::new(t, opts.step);
                        p = q;
                        let (xh, yh) = eng.normals(p);
                        let tol = opts.tangency_tol;
                        if xh.abs() <= tol && yh.abs() <= tol {
                            traj.push_sample(t, p, mode);
                            record(
                                &mut traj,
                                Event {
                                    t,
                                    p,
                                    kind: EventKind::Tangency,
                                },
                            )?;
                            break;
                        }
                        traj.push_sample(t, p, mode);
                        record(
                            &mut traj,
                            Event {
                                t,
                                p,
                                kind: EventKind::SlideExit,
                            },
                        )?;
                        mode = eng.mode_beyond(beyond);
                        if mode == Mode::Slide {
                            // Passed straight into the other sliding-type
                            // region; the continuation is undefined.
                            record(
                                &mut traj,
                                Event {
                                    t,
                                    p,
                                    kind: EventKind::Tangency,
                                },
                            )?;
                            break;
                        }
                    }
                }
            }
        }
    }
    Ok(traj)
}

/// Numerical return point with the signed durations of its two legs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleReturn {
    pub image: SigmaPoint,
    pub times: [f64; 2],
}

/// Numerical counterpart of the first-return map: the X-orbit from `p` back
/// to Σ, then the Y-orbit from there back to Σ.
///
/// Each leg is integrated on its own side of Σ, in the time direction in
/// which the orbit enters that side, so legs that only exist in backward
/// time are reconstructed too (their duration is negative). No switching
/// logic is involved.
pub fn oracle_return(
    spec: &FieldSpec,
    p: SigmaPoint,
    opts: &IntegratorOptions,
) -> Result<SigmaPoint> {
    oracle_return_with_times(spec, p, opts).map(|r| r.image)
}

pub fn oracle_return_with_times(
    spec: &FieldSpec,
    p: SigmaPoint,
    opts: &IntegratorOptions,
) -> Result<OracleReturn> {
    opts.validate()?;
    validate(spec.base)?;
    let eng = Engine::new(spec, opts);
    let (mid, t1) = oracle_leg(&eng, Side::Above, p)?;
    let (end, t2) = oracle_leg(&eng, Side::Below, mid)?;
    Ok(OracleReturn {
        image: end,
        times: [t1, t2],
    })
}

fn oracle_leg(eng: &Engine, side: Side, p: SigmaPoint) -> Result<(SigmaPoint, f64)> {
    let opts = eng.opts;
    let zsign = if side == Side::Above { 1.0 } else { -1.0 };
    let start = p.lift();
    let normal = eng.field(side, start)[2];
    if normal.abs() <= TANGENCY_TOL {
        return Ok((p, 0.0));
    }
    let dir = (normal * zsign).signum();
    let f = |q: Point3| eng.field(side, q).map(|v| dir * v);
    let g = |q: Point3| zsign * q.z;
    let mut q = start;
    let mut tau = 0.0;
    let mut steps = 0u64;
    while tau < opts.max_time {
        let h = opts.step;
        match advance(&f, &g, q, h, opts.event_tol) {
            Advance::Free(next) => {
                let dip = hermite_interior_min(
                    g(q),
                    g(next),
                    h * zsign * f(q)[2],
                    h * zsign * f(next)[2],
                );
                if dip < -opts.event_tol {
                    return Err(Error::StepTooCoarse { t: dir * tau });
                }
                steps += 1;
                tau = steps as f64 * h;
                q = next;
            }
            Advance::Hit(theta, end) => {
                return Ok((end.on_sigma(), dir * (tau + theta)));
            }
            Advance::Stuck => break,
        }
    }
    Err(Error::NoReturn {
        max_time: opts.max_time,
    })
}
