//! Hermitian spectral calculus, Schatten and weighted norms.
//!
//! Every fractional power, absolute value, logarithm and entropy goes
//! through [`eigh`]. Inputs are hermitized as `(M + M^dag)/2` first,
//! eigenvalues in `[-NEGATIVE_CLIP, 0)` are clipped to zero and eigenvalues
//! at or below [`SUPPORT_TOL`] are treated as outside the support.

use nalgebra::linalg::SymmetricEigen;

use crate::error::{Error, Result};
use crate::operator::{DensityOperator, Mat, Operator, C64};

/// Eigenvalues at or below this value are outside the support.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Negative eigenvalues down to `-NEGATIVE_CLIP` are clipped to zero.
pub const NEGATIVE_CLIP: f64 = 1e-10;

/// Eigendecomposition `M = V diag(values) V^dag` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl Eigh {
    /// `V diag(f(λ)) V^dag`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Mat {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let w = C64::new(f(l), 0.0);
            for i in 0..d {
                scaled[(i, j)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Orthogonal projector onto eigenvectors with eigenvalue above
    /// [`SUPPORT_TOL`].
    pub fn support(&self) -> Mat {
        self.apply(|l| if l > SUPPORT_TOL { 1.0 } else { 0.0 })
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn hermitize(m: &Mat) -> Mat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Max-abs entry of `M - M^dag`.
pub fn hermiticity_error(m: &Mat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn clip(l: f64) -> f64 {
    if (-NEGATIVE_CLIP..0.0).contains(&l) {
        0.0
    } else {
        l
    }
}

/// Eigendecomposition of the Hermitian part of `m`, with clipping applied.
pub fn eigh(m: &Mat) -> Eigh {
    let h = hermitize(m);
    let e = SymmetricEigen::new(h);
    Eigh {
        values: e.eigenvalues.iter().map(|&l| clip(l)).collect(),
        vectors: e.eigenvectors,
    }
}

/// Eigenvalues of the Hermitian part of `m`, with clipping applied.
pub fn eigvalsh(m: &Mat) -> Vec<f64> {
    SymmetricEigen::new(hermitize(m))
        .eigenvalues
        .iter()
        .map(|&l| clip(l))
        .collect()
}

/// Power of a positive semidefinite matrix on its support; no validation.
pub fn psd_power(m: &Mat, t: f64) -> Mat {
    if t == 1.0 {
        return hermitize(m);
    }
    eigh(m).apply(|l| if l > SUPPORT_TOL { l.powf(t) } else { 0.0 })
}

/// `log2` of a positive semidefinite matrix on its support (zero elsewhere).
pub fn psd_log2(m: &Mat) -> Mat {
    eigh(m).apply(|l| if l > SUPPORT_TOL { l.log2() } else { 0.0 })
}

pub fn support_projector(m: &Mat) -> Mat {
    eigh(m).support()
}

fn check_psd(x: &Operator) -> Result<Eigh> {
    let herm = x.hermiticity_error();
    if herm > crate::operator::HERMITIAN_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let e = eigh(x.matrix());
    let min = e.min();
    if min < -NEGATIVE_CLIP {
        return Err(Error::NotPsd(min));
    }
    Ok(e)
}

/// `X^t` on the support of `X`. Negative `t` gives pseudo-inverse powers;
/// `t = 0` gives the support projector.
pub fn matrix_power_psd(x: &Operator, t: f64) -> Result<Operator> {
    let e = check_psd(x)?;
    let m = e.apply(|l| if l > SUPPORT_TOL { l.powf(t) } else { 0.0 });
    Operator::new(x.space().clone(), m)
}

/// Schatten norms of a square matrix. `p = f64::INFINITY` is the operator
/// norm.
pub fn schatten_norm_mat(m: &Mat, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidOrder(p));
    }
    let sv: Vec<f64> = if hermiticity_error(m) <= 1e-13 * (1.0 + m.norm()) {
        eigvalsh(m).into_iter().map(f64::abs).collect()
    } else {
        m.clone().singular_values().iter().copied().collect()
    };
    Ok(p_norm(&sv, p))
}

fn p_norm(values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().copied().fold(0.0, f64::max);
    }
    if p == 1.0 {
        return values.iter().sum();
    }
    let scale = values.iter().copied().fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    scale
        * values
            .iter()
            .map(|v| (v / scale).powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
}

pub fn schatten_norm(x: &Operator, p: f64) -> Result<f64> {
    schatten_norm_mat(x.matrix(), p)
}

/// `½‖ρ - σ‖₁`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let diff = rho.sub(sigma)?;
    Ok(0.5 * trace_norm_hermitian(diff.matrix()))
}

/// `‖M‖₁` for a Hermitian matrix.
pub fn trace_norm_hermitian(m: &Mat) -> f64 {
    eigvalsh(m).into_iter().map(f64::abs).sum()
}

/// Kosaki weighted norm `‖σ^{1/2p} X σ^{1/2p}‖_p`, evaluated on the support
/// of `σ`. Use [`kosaki_norm_strict`] to reject operators leaking outside
/// that support.
pub fn kosaki_norm(x: &Operator, sigma: &Operator, p: f64) -> Result<f64> {
    kosaki_parts(x, sigma, p).map(|(v, _)| v)
}

/// As [`kosaki_norm`], but fails with `SupportViolation` when `X` has
/// weight outside `supp σ`.
pub fn kosaki_norm_strict(x: &Operator, sigma: &Operator, p: f64) -> Result<f64> {
    let (v, leak) = kosaki_parts(x, sigma, p)?;
    if leak > 1e-9 {
        return Err(Error::SupportViolation(format!(
            "operator leaks {leak:.3e} outside the support of the weight"
        )));
    }
    Ok(v)
}

fn kosaki_parts(x: &Operator, sigma: &Operator, p: f64) -> Result<(f64, f64)> {
    if p.is_nan() || p < 1.0 || p.is_infinite() {
        return Err(Error::InvalidOrder(p));
    }
    if x.space() != sigma.space() {
        return Err(Error::SpaceMismatch(format!(
            "{} vs {}",
            x.space(),
            sigma.space()
        )));
    }
    let e = check_psd(sigma)?;
    let w = e.apply(|l| if l > SUPPORT_TOL { l.powf(0.5 / p) } else { 0.0 });
    let proj = e.support();
    let inside = &proj * x.matrix() * &proj;
    let leak = (x.matrix() - inside).norm();
    let y = &w * x.matrix() * &w;
    Ok((schatten_norm_mat(&y, p)?, leak))
}

/// Non-commutative quotient `Y^{-1/2} X Y^{-1/2}` with pseudo-inverse powers.
pub fn nc_quotient(x: &Operator, y: &Operator) -> Result<Operator> {
    if x.space() != y.space() {
        return Err(Error::SpaceMismatch(format!(
            "{} vs {}",
            x.space(),
            y.space()
        )));
    }
    check_psd(x)?;
    let w = matrix_power_psd(y, -0.5)?;
    let m = hermitize(&(w.matrix() * x.matrix() * w.matrix()));
    Operator::new(x.space().clone(), m)
}

/// Fidelity `‖√ρ √σ‖₁` (not squared).
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.space() != sigma.space() {
        return Err(Error::SpaceMismatch(format!(
            "{} vs {}",
            rho.space(),
            sigma.space()
        )));
    }
    let a = psd_power(rho.matrix(), 0.5);
    let b = psd_power(sigma.matrix(), 0.5);
    schatten_norm_mat(&(a * b), 1.0)
}

/// Von Neumann entropy in bits.
pub fn entropy(rho: &DensityOperator) -> f64 {
    entropy_of_spectrum(&eigvalsh(rho.matrix()))
}

pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&l| l > SUPPORT_TOL)
        .map(|&l| -l * l.log2())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Space;

    fn qubit() -> Space {
        Space::single("A", 2).unwrap()
    }

    #[test]
    fn pseudo_inverse_power() {
        let x = Operator::diagonal(qubit(), &[4.0, 0.0]).unwrap();
        let y = matrix_power_psd(&x, -0.5).unwrap();
        let expected = Operator::diagonal(qubit(), &[0.5, 0.0]).unwrap();
        assert!((y.matrix() - expected.matrix()).norm() < 1e-14);
    }

    #[test]
    fn identity_power_is_identity() {
        let x = Operator::identity(qubit());
        for t in [-2.0, -0.5, 0.0, 0.3, 3.0] {
            let y = matrix_power_psd(&x, t).unwrap();
            assert!((y.matrix() - x.matrix()).norm() < 1e-14);
        }
    }

    #[test]
    fn power_rejects_non_hermitian() {
        let mut m = Mat::identity(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        let x = Operator::new(qubit(), m).unwrap();
        assert!(matches!(matrix_power_psd(&x, 0.5), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn schatten_of_diagonal() {
        let x = Operator::diagonal(qubit(), &[3.0, -4.0]).unwrap();
        assert!((schatten_norm(&x, 2.0).unwrap() - 5.0).abs() < 1e-14);
        assert!((schatten_norm(&x, 1.0).unwrap() - 7.0).abs() < 1e-14);
        assert!((schatten_norm(&x, f64::INFINITY).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(schatten_norm(&x, 0.5), Err(Error::InvalidOrder(0.5)));
    }

    #[test]
    fn trace_distance_examples() {
        let a = DensityOperator::diagonal(qubit(), &[0.75, 0.25]).unwrap();
        let b = DensityOperator::maximally_mixed(qubit());
        assert!((trace_distance(&a, &b).unwrap() - 0.25).abs() < 1e-15);
        let z = DensityOperator::basis(qubit(), 0).unwrap();
        let o = DensityOperator::basis(qubit(), 1).unwrap();
        assert!((trace_distance(&z, &o).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(trace_distance(&z, &z).unwrap(), 0.0);
    }

    #[test]
    fn quotient_of_self_is_support_projector() {
        let y = Operator::diagonal(qubit(), &[0.3, 0.0]).unwrap();
        let q = nc_quotient(&y, &y).unwrap();
        let p = Operator::diagonal(qubit(), &[1.0, 0.0]).unwrap();
        assert!((q.matrix() - p.matrix()).norm() < 1e-12);
    }

    #[test]
    fn kosaki_strict_flags_leak() {
        let sigma = Operator::diagonal(qubit(), &[1.0, 0.0]).unwrap();
        let x = Operator::identity(qubit());
        assert!((kosaki_norm(&x, &sigma, 2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(
            kosaki_norm_strict(&x, &sigma, 2.0),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn entropy_of_maximally_mixed() {
        let rho = DensityOperator::maximally_mixed(Space::single("A", 4).unwrap());
        assert!((entropy(&rho) - 2.0).abs() < 1e-14);
    }
}
