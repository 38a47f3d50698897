//! Closed-form algebra of 2×2 symmetric tensors.
//!
//! Every conductivity and every renormalization-core state is a symmetric
//! positive-definite 2×2 matrix. Only the three independent entries are
//! stored, so symmetry holds by construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack (times the trace) tolerated on the smallest eigenvalue.
pub const PD_SLACK: f64 = 1e-12;

/// Determinant below which a tensor is treated as singular.
pub const SINGULAR_DET: f64 = 1e-300;

/// General (possibly non-symmetric) 2×2 matrix, row-major.
pub type Mat2 = [[f64; 2]; 2];

/// Symmetric positive-definite 2×2 tensor `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpdTensor {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl SpdTensor {
    /// Builds a tensor and checks positive-definiteness.
    pub fn new(a11: f64, a12: f64, a22: f64) -> Result<Self> {
        let t = Self { a11, a12, a22 };
        t.validate()?;
        Ok(t)
    }

    pub fn identity() -> Self {
        Self::isotropic(1.0)
    }

    /// `c · I`.
    pub fn isotropic(c: f64) -> Self {
        Self { a11: c, a12: 0.0, a22: c }
    }

    pub fn diag(a11: f64, a22: f64) -> Self {
        Self { a11, a12: 0.0, a22 }
    }

    /// Symmetric part of a general matrix. No definiteness check.
    pub fn symmetric_part(m: &Mat2) -> Self {
        Self {
            a11: m[0][0],
            a12: 0.5 * (m[0][1] + m[1][0]),
            a22: m[1][1],
        }
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn as_matrix(&self) -> Mat2 {
        [[self.a11, self.a12], [self.a12, self.a22]]
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            a11: c * self.a11,
            a12: c * self.a12,
            a22: c * self.a22,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            a11: self.a11 + other.a11,
            a12: self.a12 + other.a12,
            a22: self.a22 + other.a22,
        }
    }

    /// Quadratic form `ᵗl T l`.
    pub fn quad(&self, l: [f64; 2]) -> f64 {
        self.a11 * l[0] * l[0] + 2.0 * self.a12 * l[0] * l[1] + self.a22 * l[1] * l[1]
    }

    /// Max-entry norm, used for convergence tests on trajectories.
    pub fn max_abs(&self) -> f64 {
        self.a11.abs().max(self.a12.abs()).max(self.a22.abs())
    }

    /// Raw eigenvalues without validation, smallest first.
    fn raw_eigen(&self) -> (f64, f64) {
        let mean = 0.5 * (self.a11 + self.a22);
        let half_gap = (0.5 * (self.a11 - self.a22)).hypot(self.a12);
        let lmax = mean + half_gap;
        // det / lmax keeps relative accuracy when lmin << lmax
        let lmin = if lmax > 0.0 { self.det() / lmax } else { mean - half_gap };
        (lmin, lmax)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a11.is_finite() && self.a12.is_finite() && self.a22.is_finite()) {
            return Err(Error::Validation("entries must be finite".into()));
        }
        let tr = self.trace();
        if tr <= 0.0 {
            return Err(Error::Validation(format!(
                "positive definiteness violated: trace {tr} <= 0"
            )));
        }
        let slack = PD_SLACK * tr;
        if self.a11 <= -slack || self.a22 <= -slack {
            return Err(Error::Validation(format!(
                "positive definiteness violated: diagonal ({}, {}) not positive",
                self.a11, self.a22
            )));
        }
        let (lmin, _) = self.raw_eigen();
        if lmin <= -slack {
            return Err(Error::Validation(format!(
                "positive definiteness violated: a11*a22 - a12^2 = {} <= 0",
                self.det()
            )));
        }
        Ok(())
    }

    /// Exact eigenvalues `(λ_min, λ_max)`.
    pub fn eigen_bounds(&self) -> Result<(f64, f64)> {
        self.validate()?;
        let (lmin, lmax) = self.raw_eigen();
        if lmin <= 0.0 {
            return Err(Error::Validation(format!(
                "positive definiteness violated: lambda_min = {lmin:e}"
            )));
        }
        Ok((lmin, lmax))
    }

    pub fn lambda_min(&self) -> Result<f64> {
        Ok(self.eigen_bounds()?.0)
    }

    pub fn lambda_max(&self) -> Result<f64> {
        Ok(self.eigen_bounds()?.1)
    }

    /// Inverse tensor (the local Peclet tensor when applied to a core state).
    pub fn peclet(&self) -> Result<Self> {
        self.validate()?;
        let det = self.det();
        if det < SINGULAR_DET {
            return Err(Error::Singular { det });
        }
        Ok(Self {
            a11: self.a22 / det,
            a12: -self.a12 / det,
            a22: self.a11 / det,
        })
    }

    pub fn inverse(&self) -> Result<Self> {
        self.peclet()
    }

    /// Anisotropic distortion `λ_max / λ_min`.
    pub fn anisotropy(&self) -> Result<f64> {
        let (lmin, lmax) = self.eigen_bounds()?;
        Ok(lmax / lmin)
    }

    /// Geometric-mean isotropic tensor `√(λ_min λ_max) · I`.
    pub fn geometric_isotropic(&self) -> Result<Self> {
        let (lmin, lmax) = self.eigen_bounds()?;
        Ok(Self::isotropic((lmin * lmax).sqrt()))
    }

    /// Extremal values of `ᵗl self l / ᵗl other l` over unit `l`, i.e. the
    /// generalized eigenvalues of the pencil `(self, other)`.
    pub fn ratio_bounds(&self, other: &Self) -> Result<(f64, f64)> {
        let inv = other.inverse()?;
        // eigenvalues of other^{-1} self (similar to a symmetric matrix)
        let m = mat_mul(&inv.as_matrix(), &self.as_matrix());
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let half = 0.5 * (m[0][0] - m[1][1]);
        let disc = (half * half + m[0][1] * m[1][0]).max(0.0).sqrt();
        let hi = 0.5 * tr + disc;
        let lo = if hi > 0.0 { det / hi } else { 0.5 * tr - disc };
        Ok((lo, hi))
    }

    /// Loewner order check `self ≤ other` with absolute slack on the
    /// smallest eigenvalue of the difference.
    pub fn loewner_le(&self, other: &Self, slack: f64) -> bool {
        let d = Self {
            a11: other.a11 - self.a11,
            a12: other.a12 - self.a12,
            a22: other.a22 - self.a22,
        };
        d.raw_eigen().0 >= -slack
    }
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn eigen_examples() {
        assert_eq!(SpdTensor::identity().eigen_bounds().unwrap(), (1.0, 1.0));
        assert_eq!(SpdTensor::diag(2.0, 8.0).eigen_bounds().unwrap(), (2.0, 8.0));
        let (lo, hi) = SpdTensor::new(5.0, 3.0, 5.0).unwrap().eigen_bounds().unwrap();
        assert!(close(lo, 2.0, 1e-15) && close(hi, 8.0, 1e-15));
    }

    #[test]
    fn peclet_examples() {
        assert_eq!(SpdTensor::identity().peclet().unwrap(), SpdTensor::identity());
        assert_eq!(
            SpdTensor::diag(2.0, 4.0).peclet().unwrap(),
            SpdTensor::diag(0.5, 0.25)
        );
        let p = SpdTensor::new(5.0, 3.0, 5.0).unwrap().peclet().unwrap();
        assert!(close(p.a11, 5.0 / 16.0, 1e-15));
        assert!(close(p.a12, -3.0 / 16.0, 1e-15));
        assert!(close(p.a22, 5.0 / 16.0, 1e-15));
    }

    #[test]
    fn anisotropy_examples() {
        assert_eq!(SpdTensor::identity().anisotropy().unwrap(), 1.0);
        assert_eq!(SpdTensor::diag(1.0, 9.0).anisotropy().unwrap(), 9.0);
        let r = SpdTensor::new(5.0, 3.0, 5.0).unwrap().anisotropy().unwrap();
        assert!(close(r, 4.0, 1e-14));
    }

    #[test]
    fn rejects_indefinite() {
        let err = SpdTensor::new(1.0, 2.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("a11*a22")));
        assert!(SpdTensor::new(-1.0, 0.0, 2.0).is_err());
        assert!(SpdTensor::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn singular_peclet() {
        let t = SpdTensor { a11: 1e-200, a12: 0.0, a22: 1e-200 };
        assert!(matches!(t.peclet(), Err(Error::Singular { .. })));
    }

    #[test]
    fn ratio_bounds_match_angle_scan() {
        let a = SpdTensor::new(3.0, 0.7, 1.2).unwrap();
        let b = SpdTensor::new(1.0, -0.2, 2.0).unwrap();
        let (lo, hi) = a.ratio_bounds(&b).unwrap();
        let mut slo = f64::INFINITY;
        let mut shi = 0.0_f64;
        for k in 0..20000 {
            let t = std::f64::consts::PI * k as f64 / 20000.0;
            let l = [t.cos(), t.sin()];
            let r = a.quad(l) / b.quad(l);
            slo = slo.min(r);
            shi = shi.max(r);
        }
        assert!(close(lo, slo, 1e-7) && close(hi, shi, 1e-7));
    }

    fn spd() -> impl Strategy<Value = SpdTensor> {
        (0.01f64..100.0, 0.01f64..100.0, -0.99f64..0.99).prop_map(|(x, y, c)| {
            let a12 = c * (x * y).sqrt();
            SpdTensor { a11: x, a12, a22: y }
        })
    }

    proptest! {
        #[test]
        fn eigen_trace_det(t in spd()) {
            let (lo, hi) = t.eigen_bounds().unwrap();
            prop_assert!(lo <= hi && lo > 0.0);
            prop_assert!(close(lo * hi, t.det(), 1e-12));
            prop_assert!(close(lo + hi, t.trace(), 1e-12));
        }

        #[test]
        fn peclet_involution(t in spd()) {
            let back = t.peclet().unwrap().peclet().unwrap();
            let scale = t.max_abs();
            prop_assert!((back.a11 - t.a11).abs() <= 1e-12 * scale.max(t.a11.abs()) * t.anisotropy().unwrap());
            prop_assert!((back.a22 - t.a22).abs() <= 1e-12 * scale.max(t.a22.abs()) * t.anisotropy().unwrap());
            prop_assert!((back.a12 - t.a12).abs() <= 1e-12 * scale * t.anisotropy().unwrap());
            let m = mat_mul(&t.peclet().unwrap().as_matrix(), &t.as_matrix());
            let cond = t.anisotropy().unwrap();
            prop_assert!((m[0][0] - 1.0).abs() <= 1e-14 * 4.0 * cond);
            prop_assert!(m[0][1].abs() <= 1e-14 * 4.0 * cond);
        }

        #[test]
        fn anisotropy_scale_free(t in spd(), e in -20i32..20) {
            let c = 2f64.powi(e);
            prop_assert_eq!(t.scale(c).anisotropy().unwrap(), t.anisotropy().unwrap());
        }
    }
}
