//! Periodic and pseudo-periodic orbit families.
//!
//! Families are reported as slopes `α` of rays `C_α = {(x, αx, 0)}` in Σ;
//! individual closed orbits are materialized on demand by [`assemble_orbit`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::{fold_involution_x, fold_involution_y, sample_arc, Arc, FieldTag};
use crate::linalg::LinearMap2;
use crate::maps::{
    classify_map, periodic_ray_slopes, return_xy, return_xy_matrix, return_yx, return_yx_matrix,
    MapClassification, MapKind, MappedPoint,
};
use crate::model::{
    classify_point, classify_singularity, is_resonant, is_reversible, is_simple, pseudo_equilibria,
    system_report, validate, Coefficients, PseudoEquilibria, Region, SigmaPoint, SingularityClass,
    SystemReport, TANGENCY_TOL,
};

/// Samples per arc of an assembled orbit.
pub const ARC_SAMPLES: usize = 65;
/// Maximum gap between the first and last sample of a closed orbit.
pub const CLOSURE_TOL: f64 = 1e-9;
/// Relative tolerance for "p is a fixed point".
pub const FIXED_TOL: f64 = 1e-10;

/// Which family, if any, a reversible elliptic system carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReversibleCase {
    /// `c_x != ±c_xy`: no periodic rays.
    Simple,
    /// `c_xy = c_x`: regular periodic orbits through the diagonal `y = x`.
    DiagonalPeriodic,
    /// `c_xy = -c_x`: pseudo-periodic orbits through `y = -x`.
    AntiDiagonalPseudo,
}

/// Outcome of the search in the general (not necessarily reversible)
/// semi-linear elliptic setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SemilinearCase {
    /// Simple and reversible: the two crossing compositions never agree off
    /// the origin, so there are no pseudo-periodic orbits through the
    /// escaping region.
    SimpleNoPseudoOrbits,
    /// Resonant: a line of fixed points of both crossing compositions.
    ResonantLine,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FamilyReport {
    pub periodic_alphas: Vec<f64>,
    pub pseudo_alphas: Vec<f64>,
    pub reversible_case: Option<ReversibleCase>,
    pub semilinear_case: Option<SemilinearCase>,
    pub map_kind: Option<MapKind>,
    /// Slope `c_xy / c_x` of the resonant fixed line.
    pub fixed_line_slope: Option<f64>,
    /// Sampled points of the fixed line passed the fixed-point and
    /// forward-time checks.
    pub fixed_line_verified: Option<bool>,
    pub escape_wedge_empty: Option<bool>,
}

fn insert_sorted(v: &mut Vec<f64>, x: f64) {
    if !v.iter().any(|y| (y - x).abs() <= 1e-12 * x.abs().max(1.0)) {
        v.push(x);
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
}

fn require_elliptic(c: &Coefficients) -> Result<()> {
    if classify_singularity(c) == SingularityClass::Elliptic {
        Ok(())
    } else {
        Err(Error::NotElliptic)
    }
}

/// Families of a reversible elliptic system.
pub fn find_families_reversible(c: &Coefficients) -> Result<FamilyReport> {
    if !is_reversible(c) {
        return Err(Error::NotReversible);
    }
    require_elliptic(c)?;
    let map = classify_map(c)?;
    let mut report = FamilyReport {
        map_kind: Some(map.kind),
        reversible_case: Some(ReversibleCase::Simple),
        ..Default::default()
    };
    for alpha in periodic_ray_slopes(c, 1)? {
        if alpha > 0.0 {
            insert_sorted(&mut report.periodic_alphas, alpha);
            report.reversible_case = Some(ReversibleCase::DiagonalPeriodic);
        } else {
            insert_sorted(&mut report.pseudo_alphas, alpha);
            report.reversible_case = Some(ReversibleCase::AntiDiagonalPseudo);
        }
    }
    Ok(report)
}

/// Families of a semi-linear elliptic system, reversible or not.
pub fn find_families_semilinear(c: &Coefficients) -> Result<FamilyReport> {
    require_elliptic(c)?;
    let reversible = is_reversible(c);
    let mut report = if reversible {
        find_families_reversible(c)?
    } else {
        FamilyReport::default()
    };
    report.escape_wedge_empty = Some(escape_wedge_empty(c));
    if reversible && is_simple(c) {
        report.semilinear_case = Some(SemilinearCase::SimpleNoPseudoOrbits);
    }
    if is_resonant(c) {
        let slope = c.c_xy / c.c_x;
        let verified = verify_fixed_line(c, slope);
        report.fixed_line_slope = Some(slope);
        report.fixed_line_verified = Some(verified);
        report.semilinear_case = Some(SemilinearCase::ResonantLine);
        if verified {
            insert_sorted(&mut report.periodic_alphas, slope);
        }
    }
    Ok(report)
}

fn is_fixed(m: &MappedPoint, p: SigmaPoint) -> bool {
    m.image.dist(p) <= FIXED_TOL * p.norm().max(1.0)
}

/// Points `s·(1, slope)` with `s > 0` must be fixed by the X-then-Y map with
/// forward times, and their negatives by the Y-then-X map.
fn verify_fixed_line(c: &Coefficients, slope: f64) -> bool {
    [0.01, 0.25, 1.0, 3.0, 10.0].iter().all(|&s| {
        let plus = SigmaPoint::new(s, s * slope);
        let minus = SigmaPoint::new(-s, -s * slope);
        let xy = return_xy(c, plus);
        let yx = return_yx(c, minus);
        classify_point(c, plus) == Region::SewingPlus
            && classify_point(c, minus) == Region::SewingMinus
            && is_fixed(&xy, plus)
            && xy.valid
            && is_fixed(&yx, minus)
            && yx.valid
    })
}

/// Direction of the line on which the two crossing compositions agree, if
/// their difference is singular.
pub fn crossing_coincidence(c: &Coefficients) -> Option<[f64; 2]> {
    let d: LinearMap2 = return_xy_matrix(c).sub(&return_yx_matrix(c));
    let scale = d.max_abs().max(1.0);
    if d.det().abs() > 1e-9 * scale * scale {
        return None;
    }
    let rows = [[d.a11, d.a12], [d.a21, d.a22]];
    let row = if rows[0][0].hypot(rows[0][1]) >= rows[1][0].hypot(rows[1][1]) {
        rows[0]
    } else {
        rows[1]
    };
    let n = row[0].hypot(row[1]);
    if n == 0.0 {
        // The maps coincide everywhere.
        return Some([1.0, 0.0]);
    }
    Some([-row[1] / n, row[0] / n])
}

/// Bounds of the escape wedge `(2 c_yx / c_y) y < x < (c_x / (2 c_xy)) y`.
/// `None` when `c_xy = 0` and the upper bound is undefined.
fn wedge_slopes(c: &Coefficients) -> Option<(f64, f64)> {
    if c.c_xy == 0.0 {
        return None;
    }
    Some((2.0 * c.c_yx / c.c_y, c.c_x / (2.0 * c.c_xy)))
}

/// Membership in the wedge of the escaping region bounded by the two lines
/// through the origin with inverse slopes `2 c_yx / c_y` and `c_x / (2 c_xy)`.
pub fn in_escape_wedge(c: &Coefficients, p: SigmaPoint) -> bool {
    let Some((lower, upper)) = wedge_slopes(c) else {
        return false;
    };
    classify_point(c, p) == Region::Escaping && lower * p.y < p.x && p.x < upper * p.y
}

/// Decides emptiness of the escape wedge. For `y < 0` the admissible `x`
/// form the interval `(max(0, a y), b y)`, which is nonempty iff `b < 0` and
/// `b < a`.
pub fn escape_wedge_empty(c: &Coefficients) -> bool {
    match wedge_slopes(c) {
        None => true,
        Some((a, b)) => !(b < 0.0 && b < a),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitKind {
    Regular,
    Pseudo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedOrbit {
    pub kind: OrbitKind,
    /// Slope of the ray through the anchor; `None` on the fold line `x = 0`.
    pub alpha: Option<f64>,
    pub anchor: SigmaPoint,
    pub segments: Vec<Arc>,
    pub closure_error: f64,
    /// Some arc has zero length (the anchor lies on a fold line).
    pub zero_length_arc: bool,
}

/// Builds the closed orbit through `p` from an X-arc and a Y-arc.
///
/// The arc order is the one whose composition fixes `p` with forward times
/// when such an order exists. An orbit is regular when every arc runs forward
/// and no junction lies in the sliding or escaping region; otherwise it is
/// pseudo-periodic.
pub fn assemble_orbit(c: &Coefficients, p: SigmaPoint) -> Result<ClosedOrbit> {
    let xy = return_xy(c, p);
    let yx = return_yx(c, p);
    let x_first = if is_fixed(&xy, p) && xy.valid {
        true
    } else if is_fixed(&yx, p) && yx.valid {
        false
    } else {
        is_fixed(&xy, p) || !is_fixed(&yx, p)
    };

    let start = p.lift();
    let (first, second, mid, times) = if x_first {
        (FieldTag::X, FieldTag::Y, fold_involution_x(c, p), xy.times)
    } else {
        (FieldTag::Y, FieldTag::X, fold_involution_y(c, p), yx.times)
    };
    let a1 = sample_arc(c, first, start, times[0], ARC_SAMPLES);
    let a2 = sample_arc(c, second, mid.lift(), times[1], ARC_SAMPLES);
    let closure_error = a1.samples[0].dist(*a2.samples.last().unwrap());
    if !(closure_error <= CLOSURE_TOL) {
        return Err(Error::NotClosed { closure_error });
    }

    let forward = times.iter().all(|t| *t >= -TANGENCY_TOL);
    let on_sliding = [p, mid]
        .iter()
        .any(|q| classify_point(c, *q).is_sliding_or_escaping());
    let kind = if forward && !on_sliding {
        OrbitKind::Regular
    } else {
        OrbitKind::Pseudo
    };
    Ok(ClosedOrbit {
        kind,
        alpha: (p.x.abs() > TANGENCY_TOL).then(|| p.y / p.x),
        anchor: p,
        zero_length_arc: times.iter().any(|t| t.abs() <= TANGENCY_TOL),
        segments: vec![a1, a2],
        closure_error,
    })
}

/// Everything known about a coefficient set, in one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullReport {
    pub coefficients: Coefficients,
    pub system: SystemReport,
    pub pseudo_equilibria: PseudoEquilibria,
    /// Present for reversible systems.
    pub map: Option<MapClassification>,
    /// Present for elliptic systems; orbit families are not searched in the
    /// parabolic and hyperbolic classes.
    pub families: Option<FamilyReport>,
}

pub fn full_report(c: &Coefficients) -> Result<FullReport> {
    let c = validate(*c)?;
    let system = system_report(&c);
    let map = if system.reversible {
        Some(classify_map(&c)?)
    } else {
        None
    };
    let families = if system.class == SingularityClass::Elliptic {
        Some(find_families_semilinear(&c)?)
    } else {
        None
    };
    Ok(FullReport {
        coefficients: c,
        system,
        pseudo_equilibria: pseudo_equilibria(&c),
        map,
        families,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::first_return;
    use crate::model::Point3;

    fn c(c_x: f64, c_y: f64, c_xy: f64, c_yx: f64) -> Coefficients {
        Coefficients::new(c_x, c_y, c_xy, c_yx).unwrap()
    }

    #[test]
    fn reversible_families() {
        let r = find_families_reversible(&c(-1.0, 1.0, -1.0, 1.0)).unwrap();
        assert_eq!(r.periodic_alphas, vec![1.0]);
        assert!(r.pseudo_alphas.is_empty());
        assert_eq!(r.reversible_case, Some(ReversibleCase::DiagonalPeriodic));
        assert_eq!(r.map_kind, Some(MapKind::Degenerate));

        let r = find_families_reversible(&c(-1.0, 1.0, 1.0, -1.0)).unwrap();
        assert_eq!(r.pseudo_alphas, vec![-1.0]);
        assert!(r.periodic_alphas.is_empty());

        let r = find_families_reversible(&c(-1.0, 1.0, 2.0, -2.0)).unwrap();
        assert!(r.periodic_alphas.is_empty() && r.pseudo_alphas.is_empty());
        assert_eq!(r.map_kind, Some(MapKind::Saddle));
        assert_eq!(r.reversible_case, Some(ReversibleCase::Simple));

        assert_eq!(
            find_families_reversible(&c(-1.0, 2.0, -2.0, 1.0)),
            Err(Error::NotReversible)
        );
        assert_eq!(
            find_families_reversible(&c(1.0, -1.0, 2.0, -2.0)),
            Err(Error::NotElliptic)
        );
    }

    #[test]
    fn resonant_family() {
        let k = c(-1.0, 2.0, -2.0, 1.0);
        let r = find_families_semilinear(&k).unwrap();
        assert_eq!(r.fixed_line_slope, Some(2.0));
        assert_eq!(r.fixed_line_verified, Some(true));
        assert_eq!(r.periodic_alphas, vec![2.0]);
        assert_eq!(r.semilinear_case, Some(SemilinearCase::ResonantLine));

        let m = return_xy(&k, SigmaPoint::new(1.0, 2.0));
        assert_eq!(
            (m.image, m.times.clone()),
            (SigmaPoint::new(1.0, 2.0), vec![2.0, 2.0])
        );
        let m = return_yx(&k, SigmaPoint::new(-1.0, -2.0));
        assert_eq!(
            (m.image, m.times.clone()),
            (SigmaPoint::new(-1.0, -2.0), vec![2.0, 2.0])
        );

        assert_eq!(
            find_families_semilinear(&c(1.0, 1.0, 0.0, 0.0)),
            Err(Error::NotElliptic)
        );
    }

    #[test]
    fn semilinear_routes_nonsimple_reversible() {
        let r = find_families_semilinear(&c(-1.0, 1.0, 1.0, -1.0)).unwrap();
        assert_eq!(r.pseudo_alphas, vec![-1.0]);
        assert_eq!(r.reversible_case, Some(ReversibleCase::AntiDiagonalPseudo));
        assert_eq!(r.escape_wedge_empty, Some(true));

        // Resonant and reversible at once: both routes give the diagonal.
        let r = find_families_semilinear(&c(-1.0, 1.0, -1.0, 1.0)).unwrap();
        assert_eq!(r.periodic_alphas, vec![1.0]);
        assert_eq!(r.fixed_line_slope, Some(1.0));
    }

    #[test]
    fn simple_reversible_has_no_coincidence() {
        let k = c(-1.0, 1.0, 2.0, -2.0);
        assert!(crossing_coincidence(&k).is_none());
        let r = find_families_semilinear(&k).unwrap();
        assert_eq!(
            r.semilinear_case,
            Some(SemilinearCase::SimpleNoPseudoOrbits)
        );
        assert!(r.pseudo_alphas.is_empty());

        // Resonant: the coincidence line is the fixed line.
        let d = crossing_coincidence(&c(-1.0, 2.0, -2.0, 1.0)).unwrap();
        assert!((d[1] / d[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn escape_wedge_examples() {
        let k = c(-1.0, 1.0, 1.0, -1.0);
        assert!(escape_wedge_empty(&k));
        assert!(!in_escape_wedge(&k, SigmaPoint::new(-1.0, 1.0)));
        assert!(!in_escape_wedge(&k, SigmaPoint::ORIGIN));

        // c_x = -1, c_y = 1, c_xy = 1, c_yx = 1: 2y < x < -y/2.
        let k = c(-1.0, 1.0, 1.0, 1.0);
        assert!(!escape_wedge_empty(&k));
        assert!(in_escape_wedge(&k, SigmaPoint::new(0.5, -2.0)));
        assert!(!in_escape_wedge(&k, SigmaPoint::new(1.5, -2.0)));
        // Both bounds evaluated at (1, -1): -2 < 1 but 1 > 0.5.
        assert!(!in_escape_wedge(&k, SigmaPoint::new(1.0, -1.0)));
    }

    #[test]
    fn assemble_examples() {
        let k = c(-1.0, 1.0, -1.0, 1.0);
        let o = assemble_orbit(&k, SigmaPoint::new(1.0, 1.0)).unwrap();
        assert_eq!(o.kind, OrbitKind::Regular);
        assert!(o.closure_error <= 1e-12);
        assert_eq!(o.segments[0].end, SigmaPoint::new(-1.0, -1.0).lift());
        assert!(o.segments.iter().all(|a| a.samples.len() >= 64));
        assert_eq!(o.alpha, Some(1.0));

        let o = assemble_orbit(&c(-1.0, 1.0, 1.0, -1.0), SigmaPoint::new(1.0, -1.0)).unwrap();
        assert_eq!(o.kind, OrbitKind::Pseudo);
        assert_eq!(o.alpha, Some(-1.0));

        let k = c(-1.0, 2.0, -2.0, 1.0);
        let o = assemble_orbit(&k, SigmaPoint::new(1.0, 2.0)).unwrap();
        assert_eq!(o.kind, OrbitKind::Regular);
        assert_eq!(o.segments[0].field_tag, FieldTag::X);
        assert_eq!(o.segments[0].end, Point3::new(-1.0, -2.0, 0.0));
        assert_eq!(o.segments[1].end, Point3::new(1.0, 2.0, 0.0));
        assert_eq!(
            o.segments.iter().map(|a| a.duration).collect::<Vec<_>>(),
            vec![2.0, 2.0]
        );

        let o = assemble_orbit(&k, SigmaPoint::new(-1.0, -2.0)).unwrap();
        assert_eq!(o.kind, OrbitKind::Regular);
        assert_eq!(o.segments[0].field_tag, FieldTag::Y);

        let o = assemble_orbit(&k, SigmaPoint::ORIGIN).unwrap();
        assert!(o.zero_length_arc && o.alpha.is_none());
    }

    #[test]
    fn assemble_rejects_non_periodic_anchor() {
        let k = c(-1.0, 1.0, 2.0, -2.0);
        assert!(matches!(
            assemble_orbit(&k, SigmaPoint::new(1.0, -5.0)),
            Err(Error::NotClosed { .. })
        ));
    }

    #[test]
    fn periodic_family_anchors_are_fixed() {
        let k = c(-1.0, 1.0, -1.0, 1.0);
        for i in 1..=50 {
            let s = i as f64 * 0.2;
            let p = SigmaPoint::new(s, s);
            let r = first_return(&k, p);
            assert!(r.image.dist(p) <= 1e-10 && r.valid);
        }
    }

    #[test]
    fn full_report_examples() {
        let r = full_report(&c(-1.0, 1.0, 2.0, -2.0)).unwrap();
        assert_eq!(r.system.class, SingularityClass::Elliptic);
        assert!(r.system.simple && r.system.reversible);
        assert_eq!(r.map.unwrap().kind, MapKind::Saddle);
        let f = r.families.unwrap();
        assert!(f.periodic_alphas.is_empty() && f.pseudo_alphas.is_empty());

        let r = full_report(&c(-1.0, 1.0, -1.0, 1.0)).unwrap();
        assert!(!r.system.simple && r.system.reversible);
        assert_eq!(r.map.unwrap().kind, MapKind::Degenerate);
        assert_eq!(r.families.unwrap().periodic_alphas, vec![1.0]);

        let r = full_report(&c(-1.0, 2.0, -2.0, 1.0)).unwrap();
        assert!(r.system.resonant && r.system.sliding_degenerate);
        assert!(r.map.is_none());
        assert_eq!(r.families.unwrap().fixed_line_slope, Some(2.0));

        let r = full_report(&c(1.0, -1.0, 0.0, 0.0)).unwrap();
        assert!(r.families.is_none());

        let bad = Coefficients {
            c_x: 0.0,
            c_y: 1.0,
            c_xy: 0.0,
            c_yx: 0.0,
        };
        assert!(matches!(
            full_report(&bad),
            Err(Error::DegenerateFold { .. })
        ));
    }
}
