//! Coefficient model of the semi-linear two-fold normal form
//!
//! ```text
//!   X(x, y, z) = (c_x,  c_xy, x)    for z > 0
//!   Y(x, y, z) = (c_yx, c_y,  y)    for z < 0
//! ```
//!
//! with switching plane Σ = {z = 0}. On Σ the normal components are
//! `Xh = x` and `Yh = y`, so the fold lines are the coordinate axes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::LinearMap2;

/// Smallest admissible magnitude for a fold coefficient.
pub const FOLD_FLOOR: f64 = 1e-12;
/// Relative tolerance for the algebraic equality predicates.
pub const EQ_TOL: f64 = 1e-9;
/// Absolute distance within which a Σ-point counts as lying on a fold line.
pub const TANGENCY_TOL: f64 = 1e-12;
/// Angular tolerance (radians) for eigenvector/fold-line parallelism.
pub const ANGLE_TOL: f64 = 1e-9;

/// `|a - b| <= EQ_TOL * max(1, |a|, |b|)`.
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= EQ_TOL * 1f64.max(a.abs()).max(b.abs())
}

/// The four normal-form constants.
///
/// `c_x = X²h(0)`, `c_y = Y²h(0)`, `c_xy = X(Yh)(0)`, `c_yx = Y(Xh)(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub c_x: f64,
    pub c_y: f64,
    pub c_xy: f64,
    pub c_yx: f64,
}

impl Coefficients {
    /// Builds and validates a coefficient set.
    pub fn new(c_x: f64, c_y: f64, c_xy: f64, c_yx: f64) -> Result<Self> {
        validate(Self {
            c_x,
            c_y,
            c_xy,
            c_yx,
        })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.c_x, self.c_y, self.c_xy, self.c_yx]
    }
}

/// Rejects non-finite input and fold coefficients below [`FOLD_FLOOR`].
pub fn validate(c: Coefficients) -> Result<Coefficients> {
    for (name, v) in [
        ("c_x", c.c_x),
        ("c_y", c.c_y),
        ("c_xy", c.c_xy),
        ("c_yx", c.c_yx),
    ] {
        if !v.is_finite() {
            return Err(Error::NonFinite { coefficient: name });
        }
    }
    if c.c_x.abs() <= FOLD_FLOOR {
        return Err(Error::DegenerateFold {
            coefficient: "c_x",
            value: c.c_x,
        });
    }
    if c.c_y.abs() <= FOLD_FLOOR {
        return Err(Error::DegenerateFold {
            coefficient: "c_y",
            value: c.c_y,
        });
    }
    Ok(c)
}

/// Point on the switching plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SigmaPoint {
    pub x: f64,
    pub y: f64,
}

impl SigmaPoint {
    pub const ORIGIN: Self = Self { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn lift(self) -> Point3 {
        Point3::new(self.x, self.y, 0.0)
    }

    /// Coordinate swap, the restriction of the reversing involution to Σ.
    pub fn swapped(self) -> Self {
        Self::new(self.y, self.x)
    }

    pub fn dist(self, other: Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Point in ambient space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn on_sigma(self) -> SigmaPoint {
        SigmaPoint::new(self.x, self.y)
    }

    /// Reversing involution `(x, y, z) -> (y, x, -z)`.
    pub fn reflect(self) -> Self {
        Self::new(self.y, self.x, -self.z)
    }

    pub fn dist(self, other: Self) -> f64 {
        let d = [self.x - other.x, self.y - other.y, self.z - other.z];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    pub fn as_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    /// The reversing involution applied to a tangent vector (it is linear).
    pub fn reflect_vector(self) -> [f64; 3] {
        self.reflect().as_array()
    }
}

/// Classification of a Σ-point by the signs of `Xh` and `Yh`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// `Xh > 0, Yh > 0`: orbits cross upward.
    SewingPlus,
    /// `Xh < 0, Yh < 0`: orbits cross downward.
    SewingMinus,
    /// `Xh < 0, Yh > 0`.
    Sliding,
    /// `Xh > 0, Yh < 0`.
    Escaping,
    /// On the fold line of X (`x = 0`), away from the origin.
    FoldX,
    /// On the fold line of Y (`y = 0`), away from the origin.
    FoldY,
    Origin,
}

impl Region {
    pub fn is_sewing(self) -> bool {
        matches!(self, Region::SewingPlus | Region::SewingMinus)
    }

    /// Sliding or escaping.
    pub fn is_sliding_or_escaping(self) -> bool {
        matches!(self, Region::Sliding | Region::Escaping)
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, Region::FoldX | Region::FoldY | Region::Origin)
    }
}

/// Classifies a Σ-point. The coefficients do not enter: in the normal form the
/// region is decided by the coordinates alone.
pub fn classify_point(_c: &Coefficients, p: SigmaPoint) -> Region {
    region_of(p.x, p.y, TANGENCY_TOL)
}

/// Region from the normal components `xh = Xh(p)`, `yh = Yh(p)`.
pub fn region_of(xh: f64, yh: f64, tol: f64) -> Region {
    let on_sx = xh.abs() <= tol;
    let on_sy = yh.abs() <= tol;
    match (on_sx, on_sy) {
        (true, true) => Region::Origin,
        (true, false) => Region::FoldX,
        (false, true) => Region::FoldY,
        (false, false) => match (xh > 0.0, yh > 0.0) {
            (true, true) => Region::SewingPlus,
            (false, false) => Region::SewingMinus,
            (false, true) => Region::Sliding,
            (true, false) => Region::Escaping,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularityClass {
    /// Both folds invisible.
    Elliptic,
    /// One visible and one invisible fold.
    Parabolic,
    /// Both folds visible.
    Hyperbolic,
}

pub fn classify_singularity(c: &Coefficients) -> SingularityClass {
    match (c.c_x < 0.0, c.c_y > 0.0) {
        (true, true) => SingularityClass::Elliptic,
        (false, false) => SingularityClass::Hyperbolic,
        _ => SingularityClass::Parabolic,
    }
}

/// Non-resonance: `c_x != ±c_xy`.
pub fn is_simple(c: &Coefficients) -> bool {
    !approx_eq(c.c_x, c.c_xy) && !approx_eq(c.c_x, -c.c_xy)
}

/// Symmetry under `(x, y, z) -> (y, x, -z)`: `c_xy = -c_yx` and `c_x = -c_y`.
pub fn is_reversible(c: &Coefficients) -> bool {
    approx_eq(c.c_xy, -c.c_yx) && approx_eq(c.c_x, -c.c_y)
}

/// Elliptic systems with `c_xy < 0` and `c_xy·c_yx = c_x·c_y`; these carry a
/// line of fixed points of both crossing compositions.
pub fn is_resonant(c: &Coefficients) -> bool {
    let product_gap = (c.c_xy * c.c_yx - c.c_x * c.c_y).abs();
    c.c_x < 0.0
        && c.c_xy < 0.0
        && c.c_y > 0.0
        && product_gap <= EQ_TOL * 1f64.max((c.c_x * c.c_y).abs())
}

/// Value of the normalized sliding field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlidingValue {
    pub u: f64,
    pub v: f64,
}

/// Normalized sliding field `(X¹Y³ - Y¹X³, X²Y³ - Y²X³)` of the normal form,
/// extended to all of Σ.
pub fn sliding_field(c: &Coefficients, p: SigmaPoint) -> SlidingValue {
    SlidingValue {
        u: c.c_x * p.y - c.c_yx * p.x,
        v: c.c_xy * p.y - c.c_y * p.x,
    }
}

/// Jacobian of [`sliding_field`]; the field is linear so this is exact.
pub fn sliding_jacobian(c: &Coefficients) -> LinearMap2 {
    LinearMap2::new(-c.c_yx, c.c_x, -c.c_y, c.c_xy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlidingLinearization {
    pub jacobian: LinearMap2,
    pub determinant: f64,
    pub eigenvalues: [Complex64; 2],
    pub sliding_degenerate: bool,
    pub hyperbolic: bool,
    pub eigenvectors_transverse: bool,
    pub regular_two_fold: bool,
}

pub fn sliding_linearization(c: &Coefficients) -> SlidingLinearization {
    let jacobian = sliding_jacobian(c);
    let determinant = jacobian.det();
    let scale = 1f64.max((c.c_x * c.c_y).abs());
    let sliding_degenerate = determinant.abs() <= EQ_TOL * scale;
    let eigenvalues = jacobian.eigenvalues();

    let re_scale = EQ_TOL * 1f64.max(jacobian.max_abs());
    let hyperbolic = !sliding_degenerate && eigenvalues.iter().all(|l| l.re.abs() > re_scale);

    let eigenvectors_transverse = if eigenvalues[0].im != 0.0 {
        // No real eigendirection, so none can lie along a fold line.
        true
    } else {
        eigenvalues
            .iter()
            .all(|l| match jacobian.real_eigenvector(l.re) {
                Some(v) => v[0].abs() > ANGLE_TOL.sin() && v[1].abs() > ANGLE_TOL.sin(),
                None => false,
            })
    };

    SlidingLinearization {
        jacobian,
        determinant,
        eigenvalues,
        sliding_degenerate,
        hyperbolic,
        eigenvectors_transverse,
        regular_two_fold: hyperbolic && eigenvectors_transverse,
    }
}

/// Zero set of the sliding field inside the sliding/escaping regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoEquilibria {
    /// Unit direction of the kernel line when the linearization is degenerate.
    pub kernel: Option<[f64; 2]>,
    /// Unit direction of the kernel ray lying in the sliding region.
    pub sliding_ray: Option<[f64; 2]>,
    /// Unit direction of the kernel ray lying in the escaping region.
    pub escaping_ray: Option<[f64; 2]>,
}

impl PseudoEquilibria {
    /// Only the origin, which sits on the boundary of both regions.
    pub fn origin_only(&self) -> bool {
        self.kernel.is_none()
    }
}

pub fn pseudo_equilibria(c: &Coefficients) -> PseudoEquilibria {
    let lin = sliding_linearization(c);
    if !lin.sliding_degenerate {
        return PseudoEquilibria {
            kernel: None,
            sliding_ray: None,
            escaping_ray: None,
        };
    }
    // First row (-c_yx, c_x) is nonzero because c_x is.
    let norm = c.c_x.hypot(c.c_yx);
    let dir = [c.c_x / norm, c.c_yx / norm];
    let mut sliding_ray = None;
    let mut escaping_ray = None;
    for d in [dir, [-dir[0], -dir[1]]] {
        match region_of(d[0], d[1], TANGENCY_TOL) {
            Region::Sliding => sliding_ray = Some(d),
            Region::Escaping => escaping_ray = Some(d),
            _ => {}
        }
    }
    PseudoEquilibria {
        kernel: Some(dir),
        sliding_ray,
        escaping_ray,
    }
}

/// All predicates gathered in one record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub class: SingularityClass,
    pub simple: bool,
    pub reversible: bool,
    pub resonant: bool,
    pub regular_two_fold: bool,
    pub sliding_degenerate: bool,
    /// Reversible, elliptic and a regular two-fold.
    pub generic_reversible: bool,
}

pub fn system_report(c: &Coefficients) -> SystemReport {
    let lin = sliding_linearization(c);
    let class = classify_singularity(c);
    let reversible = is_reversible(c);
    SystemReport {
        class,
        simple: is_simple(c),
        reversible,
        resonant: is_resonant(c),
        regular_two_fold: lin.regular_two_fold,
        sliding_degenerate: lin.sliding_degenerate,
        generic_reversible: reversible
            && class == SingularityClass::Elliptic
            && lin.regular_two_fold,
    }
}

/// Normal-form field value above (`X`) or below (`Y`) Σ.
pub fn field_x(c: &Coefficients, p: Point3) -> [f64; 3] {
    [c.c_x, c.c_xy, p.x]
}

pub fn field_y(c: &Coefficients, p: Point3) -> [f64; 3] {
    [c.c_yx, c.c_y, p.y]
}

/// The discontinuous field `Z`; `z = 0` is assigned to `Y` (callers should
/// not evaluate on Σ).
pub fn field_z(c: &Coefficients, p: Point3) -> [f64; 3] {
    if p.z > 0.0 {
        field_x(c, p)
    } else {
        field_y(c, p)
    }
}
