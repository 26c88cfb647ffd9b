//! Closed-form flows of the semi-linear fields, flight times back to Σ and the
//! fold involutions.
//!
//! Both fields are semi-linear, so their flows are exact quadratics in time:
//!
//! ```text
//!   X: (x0 + c_x t,  y0 + c_xy t, z0 + x0 t + c_x t²/2)
//!   Y: (x0 + c_yx t, y0 + c_y t,  z0 + y0 t + c_y t²/2)
//! ```
//!
//! From a Σ-point the z-component vanishes again at `t = -2 x0 / c_x` (resp.
//! `-2 y0 / c_y`). The involutions are total: they use that root whatever its
//! sign, and callers decide whether a negative time is acceptable.

use serde::{Deserialize, Serialize};

use crate::linalg::LinearMap2;
use crate::model::{sliding_jacobian, Coefficients, Point3, SigmaPoint, TANGENCY_TOL};

pub fn flow_x(c: &Coefficients, p0: Point3, t: f64) -> Point3 {
    Point3::new(
        p0.x + c.c_x * t,
        p0.y + c.c_xy * t,
        p0.z + p0.x * t + 0.5 * c.c_x * t * t,
    )
}

pub fn flow_y(c: &Coefficients, p0: Point3, t: f64) -> Point3 {
    Point3::new(
        p0.x + c.c_yx * t,
        p0.y + c.c_y * t,
        p0.z + p0.y * t + 0.5 * c.c_y * t * t,
    )
}

/// Signed time for an orbit started on Σ to meet Σ again.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightTime {
    pub t: f64,
    /// The start lies on the fold line; the orbit only touches Σ.
    pub degenerate: bool,
}

impl FlightTime {
    fn from_root(normal: f64, curvature: f64) -> Self {
        if normal.abs() <= TANGENCY_TOL {
            Self {
                t: 0.0,
                degenerate: true,
            }
        } else {
            Self {
                t: -2.0 * normal / curvature,
                degenerate: false,
            }
        }
    }
}

pub fn flight_time_x(c: &Coefficients, p: SigmaPoint) -> FlightTime {
    FlightTime::from_root(p.x, c.c_x)
}

pub fn flight_time_y(c: &Coefficients, p: SigmaPoint) -> FlightTime {
    FlightTime::from_root(p.y, c.c_y)
}

/// Second intersection of the X-orbit through `p` with Σ. Fixes `S_X`.
pub fn fold_involution_x(c: &Coefficients, p: SigmaPoint) -> SigmaPoint {
    SigmaPoint::new(-p.x, p.y - 2.0 * c.c_xy * p.x / c.c_x)
}

/// Second intersection of the Y-orbit through `p` with Σ. Fixes `S_Y`.
pub fn fold_involution_y(c: &Coefficients, p: SigmaPoint) -> SigmaPoint {
    SigmaPoint::new(p.x - 2.0 * c.c_yx * p.y / c.c_y, -p.y)
}

/// Exact time-`t` map of the (linear) normalized sliding field.
pub fn slide_flow(c: &Coefficients, p: SigmaPoint, t: f64) -> SigmaPoint {
    let v = expm(&sliding_jacobian(c), t).apply([p.x, p.y]);
    SigmaPoint::new(v[0], v[1])
}

/// `exp(A t)` for a real 2×2 matrix.
///
/// With `τ = tr(A)/2` and `M = A - τI` we have `M² = δI`, `δ = τ² - det A`,
/// so `exp(At) = e^{τt} (C I + S M)` with `C, S` the even/odd parts of
/// `exp(√δ t)` (trigonometric when δ < 0).
pub fn expm(a: &LinearMap2, t: f64) -> LinearMap2 {
    let tau = 0.5 * a.trace();
    let delta = tau * tau - a.det();
    let m = a.sub(&LinearMap2::IDENTITY.scale(tau));
    let x = delta * t * t;
    let (cosh_part, sinh_part) = if x.abs() < 1e-8 {
        (1.0 + 0.5 * x, t * (1.0 + x / 6.0))
    } else if delta > 0.0 {
        let r = delta.sqrt();
        ((r * t).cosh(), (r * t).sinh() / r)
    } else {
        let r = (-delta).sqrt();
        ((r * t).cos(), (r * t).sin() / r)
    };
    let e = (tau * t).exp();
    LinearMap2::IDENTITY
        .scale(cosh_part)
        .add(&m.scale(sinh_part))
        .scale(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldTag {
    X,
    Y,
    Slide,
}

/// Sampled piece of an orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub field_tag: FieldTag,
    pub start: Point3,
    pub end: Point3,
    /// Signed duration; negative for arcs traversed against the flow.
    pub duration: f64,
    pub samples: Vec<Point3>,
}

/// `n` uniformly spaced samples of the chosen flow over `[0, t]`.
///
/// Slide arcs follow the normalized sliding field in Σ and ignore `p.z`.
///
/// # Panics
///
/// If `n < 2`.
pub fn sample_arc(c: &Coefficients, field_tag: FieldTag, p: Point3, t: f64, n: usize) -> Arc {
    assert!(n >= 2, "an arc needs at least its two endpoints");
    let at = |s: f64| match field_tag {
        FieldTag::X => flow_x(c, p, s),
        FieldTag::Y => flow_y(c, p, s),
        FieldTag::Slide => slide_flow(c, p.on_sigma(), s).lift(),
    };
    let last = (n - 1) as f64;
    let samples: Vec<Point3> = (0..n)
        .map(|i| {
            if i == 0 {
                at(0.0)
            } else {
                at(t * i as f64 / last)
            }
        })
        .collect();
    Arc {
        field_tag,
        start: samples[0],
        end: samples[n - 1],
        duration: t,
        samples,
    }
}
