//! Small fixed-size linear algebra used by the sliding linearization and the
//! return-map analysis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Row-major real 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearMap2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl LinearMap2 {
    pub const IDENTITY: Self = Self::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self::new(
            self.a11 * rhs.a11 + self.a12 * rhs.a21,
            self.a11 * rhs.a12 + self.a12 * rhs.a22,
            self.a21 * rhs.a11 + self.a22 * rhs.a21,
            self.a21 * rhs.a12 + self.a22 * rhs.a22,
        )
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self::new(
            self.a11 + rhs.a11,
            self.a12 + rhs.a12,
            self.a21 + rhs.a21,
            self.a22 + rhs.a22,
        )
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self::new(
            self.a11 - rhs.a11,
            self.a12 - rhs.a12,
            self.a21 - rhs.a21,
            self.a22 - rhs.a22,
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    /// `S·M·S` where `S` swaps the two coordinates.
    pub fn swap_conjugate(&self) -> Self {
        Self::new(self.a22, self.a21, self.a12, self.a11)
    }

    pub fn max_abs(&self) -> f64 {
        self.a11
            .abs()
            .max(self.a12.abs())
            .max(self.a21.abs())
            .max(self.a22.abs())
    }

    /// Roots of the characteristic polynomial, ordered by descending real part
    /// (then descending imaginary part).
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let half_trace = 0.5 * self.trace();
        let disc = half_trace * half_trace - self.det();
        if disc >= 0.0 {
            let root = disc.sqrt();
            // Avoid cancellation for the smaller-magnitude root.
            let big = half_trace + root.copysign(half_trace);
            let small = if big != 0.0 { self.det() / big } else { 0.0 };
            let (hi, lo) = if big >= small {
                (big, small)
            } else {
                (small, big)
            };
            [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
        } else {
            let im = (-disc).sqrt();
            [
                Complex64::new(half_trace, im),
                Complex64::new(half_trace, -im),
            ]
        }
    }

    /// Unit eigenvector for a real eigenvalue, or `None` when the matrix is a
    /// multiple of the identity (every direction is an eigenvector).
    pub fn real_eigenvector(&self, lambda: f64) -> Option<[f64; 2]> {
        // Rows of (M - λI); the eigenvector is orthogonal to the larger row.
        let r1 = [self.a11 - lambda, self.a12];
        let r2 = [self.a21, self.a22 - lambda];
        let n1 = r1[0].hypot(r1[1]);
        let n2 = r2[0].hypot(r2[1]);
        let (row, norm) = if n1 >= n2 { (r1, n1) } else { (r2, n2) };
        if norm <= 1e-14 * self.max_abs().max(1.0) {
            return None;
        }
        Some([-row[1] / norm, row[0] / norm])
    }
}

impl Default for LinearMap2 {
    fn default() -> Self {
        Self::IDENTITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_rotation_are_unit_complex() {
        let m = LinearMap2::new(0.0, -1.0, 1.0, 0.0);
        let ev = m.eigenvalues();
        assert!((ev[0].norm() - 1.0).abs() < 1e-15);
        assert!((ev[0].im - 1.0).abs() < 1e-15);
        assert!((ev[1].im + 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_real_ordered() {
        let m = LinearMap2::new(15.0, 4.0, -4.0, -1.0);
        let ev = m.eigenvalues();
        let r3 = 3f64.sqrt();
        assert!((ev[0].re - (7.0 + 4.0 * r3)).abs() < 1e-12);
        assert!((ev[1].re - (7.0 - 4.0 * r3)).abs() < 1e-13);
    }

    #[test]
    fn eigenvector_satisfies_definition() {
        let m = LinearMap2::new(2.0, -1.0, -1.0, 2.0);
        for ev in m.eigenvalues() {
            let v = m.real_eigenvector(ev.re).unwrap();
            let mv = m.apply(v);
            assert!((mv[0] - ev.re * v[0]).abs() < 1e-12);
            assert!((mv[1] - ev.re * v[1]).abs() < 1e-12);
        }
        assert!(LinearMap2::IDENTITY.real_eigenvector(1.0).is_none());
    }

    #[test]
    fn swap_conjugate_is_involutive() {
        let m = LinearMap2::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(m.swap_conjugate().swap_conjugate(), m);
        assert_eq!(m.swap_conjugate(), LinearMap2::new(4.0, 3.0, 2.0, 1.0));
    }
}
