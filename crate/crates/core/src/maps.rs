//! Return maps on Σ.
//!
//! The first-return map is the composition `γ_Y ∘ γ_X` of the two fold
//! involutions; [`return_yx`] is the opposite composition `γ_X ∘ γ_Y`. All
//! three maps are linear in the normal form. They are evaluated as total maps,
//! and each image carries the signed flight times used and a validity flag for
//! forward-time realizability.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::{flight_time_x, flight_time_y, fold_involution_x, fold_involution_y};
use crate::linalg::LinearMap2;
use crate::model::{
    approx_eq, classify_point, is_reversible, Coefficients, SigmaPoint, TANGENCY_TOL,
};

/// Image of a Σ-point under a return map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappedPoint {
    pub image: SigmaPoint,
    /// Signed flight times of the arcs composing the map, in order.
    pub times: Vec<f64>,
    /// Every time is nonnegative (up to [`TANGENCY_TOL`]).
    pub valid: bool,
}

impl MappedPoint {
    fn new(image: SigmaPoint, times: Vec<f64>) -> Self {
        let valid = times.iter().all(|t| *t >= -TANGENCY_TOL);
        Self {
            image,
            times,
            valid,
        }
    }
}

/// `γ_Y ∘ γ_X`: follow X from `p` back to Σ, then Y.
pub fn first_return(c: &Coefficients, p: SigmaPoint) -> MappedPoint {
    let mid = fold_involution_x(c, p);
    let t1 = flight_time_x(c, p).t;
    let t2 = flight_time_y(c, mid).t;
    MappedPoint::new(fold_involution_y(c, mid), vec![t1, t2])
}

/// X-then-Y crossing composition from its explicit linear form.
pub fn return_xy(c: &Coefficients, p: SigmaPoint) -> MappedPoint {
    let v = return_xy_matrix(c).apply([p.x, p.y]);
    let t1 = -2.0 * p.x / c.c_x;
    let t2 = -(2.0 / c.c_y) * (-(2.0 * c.c_xy / c.c_x) * p.x + p.y);
    MappedPoint::new(SigmaPoint::new(v[0], v[1]), vec![t1, t2])
}

/// Y-then-X crossing composition `γ_X ∘ γ_Y`.
pub fn return_yx(c: &Coefficients, p: SigmaPoint) -> MappedPoint {
    let v = return_yx_matrix(c).apply([p.x, p.y]);
    let t3 = -2.0 * p.y / c.c_y;
    let t4 = -(2.0 / c.c_x) * (p.x - (2.0 * c.c_yx / c.c_y) * p.y);
    MappedPoint::new(SigmaPoint::new(v[0], v[1]), vec![t3, t4])
}

/// `c_xy c_yx / (c_x c_y)`, the coupling ratio of the two folds.
fn coupling(c: &Coefficients) -> f64 {
    c.c_xy * c.c_yx / (c.c_x * c.c_y)
}

pub fn return_xy_matrix(c: &Coefficients) -> LinearMap2 {
    let k = coupling(c);
    LinearMap2::new(
        -1.0 + 4.0 * k,
        -2.0 * c.c_yx / c.c_y,
        2.0 * c.c_xy / c.c_x,
        -1.0,
    )
}

pub fn return_yx_matrix(c: &Coefficients) -> LinearMap2 {
    let k = coupling(c);
    LinearMap2::new(
        -1.0,
        2.0 * c.c_yx / c.c_y,
        -2.0 * c.c_xy / c.c_x,
        4.0 * k - 1.0,
    )
}

/// Linear part of the first-return map.
///
/// For reversible coefficients this is written purely in `c_x, c_xy`;
/// otherwise it is the X-then-Y matrix (the two agree when both apply).
pub fn linear_part(c: &Coefficients) -> LinearMap2 {
    if is_reversible(c) {
        let r = c.c_xy / c.c_x;
        LinearMap2::new(4.0 * r * r - 1.0, -2.0 * r, 2.0 * r, -1.0)
    } else {
        return_xy_matrix(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapKind {
    Saddle,
    EllipticRotation,
    /// `|c_xy| = |c_x|`: double eigenvalue 1.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapClassification {
    pub kind: MapKind,
    /// Ordered `[λ+, λ-]`.
    pub eigenvalues: [Complex64; 2],
}

/// Closed-form eigenvalues of the reversible first-return map,
/// `-1 + 2 (c_xy² ± sqrt(c_xy² (c_xy - c_x)(c_xy + c_x))) / c_x²`.
pub fn return_eigenvalues(c: &Coefficients) -> [Complex64; 2] {
    let m2 = c.c_xy * c.c_xy;
    let radicand = m2 * (c.c_xy - c.c_x) * (c.c_xy + c.c_x);
    let root = Complex64::new(radicand, 0.0).sqrt();
    let denom = c.c_x * c.c_x;
    let lam =
        |s: f64| Complex64::new(-1.0, 0.0) + (Complex64::new(m2, 0.0) + root * s) * 2.0 / denom;
    [lam(1.0), lam(-1.0)]
}

pub fn classify_map(c: &Coefficients) -> Result<MapClassification> {
    if !is_reversible(c) {
        return Err(Error::NotReversible);
    }
    let (a, b) = (c.c_xy.abs(), c.c_x.abs());
    let kind = if approx_eq(a, b) {
        MapKind::Degenerate
    } else if a > b {
        MapKind::Saddle
    } else {
        MapKind::EllipticRotation
    };
    Ok(MapClassification {
        kind,
        eigenvalues: return_eigenvalues(c),
    })
}

/// `n` successive first returns from `p`.
///
/// A step is valid when its flight times are nonnegative and the
/// intermediate point (after the X-arc) is a crossing point or on a fold
/// line; an invalid step invalidates every later one.
pub fn iterate(c: &Coefficients, p: SigmaPoint, n: usize) -> Result<Vec<MappedPoint>> {
    if n == 0 {
        return Err(Error::ZeroIterations);
    }
    let mut out = Vec::with_capacity(n);
    let mut current = p;
    let mut still_valid = true;
    for _ in 0..n {
        let mut step = first_return(c, current);
        let mid = fold_involution_x(c, current);
        let crossing = !classify_point(c, mid).is_sliding_or_escaping();
        still_valid &= step.valid && crossing;
        step.valid = still_valid;
        current = step.image;
        out.push(step);
    }
    Ok(out)
}

/// Ray slopes `α ∈ {+1, -1}` for which the line `y = αx` consists of
/// `n`-periodic points of the reversible first-return map. Solving
/// `ψⁿ(x, αx) = (x, αx)` forces `c_x = 2α c_xy / (1 + α²)` and `α^{-2n} = 1`.
pub fn periodic_ray_slopes(c: &Coefficients, n: usize) -> Result<Vec<f64>> {
    if !is_reversible(c) {
        return Err(Error::NotReversible);
    }
    if n == 0 {
        return Err(Error::ZeroIterations);
    }
    Ok([1.0, -1.0]
        .into_iter()
        .filter(|alpha| approx_eq(c.c_x, 2.0 * alpha * c.c_xy / (1.0 + alpha * alpha)))
        .collect())
}

/// Points whose X- and Y-arcs of the first return both run forward in time.
/// For elliptic coefficients this is `x > 0, y < (2 c_xy / c_x) x`.
pub fn in_return_region(c: &Coefficients, p: SigmaPoint) -> Result<bool> {
    if !is_reversible(c) {
        return Err(Error::NotReversible);
    }
    let f1 = flight_time_x(c, p);
    let f2 = flight_time_y(c, fold_involution_x(c, p));
    Ok(!f1.degenerate && !f2.degenerate && f1.t > 0.0 && f2.t > 0.0)
}
