//! Purifications, isometries between labeled spaces, and Uhlmann's
//! optimal isometry.

use crate::error::{Error, Result};
use crate::operator::{DensityOperator, Ket, Mat, Vector, C64};
use crate::space::{Space, Subsystems};
use crate::spectral::{self, SUPPORT_TOL};

/// Purification `Σ_i √λ_i |e_i⟩ ⊗ |i⟩` of `rho`, with the reference factor
/// `ref_label` appended last. The reference has the dimension of `rho`.
pub fn purify_ket(rho: &DensityOperator, ref_label: &str) -> Result<Ket> {
    let d = rho.dim();
    let reference = Space::single(ref_label, d)?;
    let space = rho.space().concat(&reference)?;
    let e = spectral::eigh(rho.matrix());
    let mut v = Vector::zeros(d * d);
    for (i, &l) in e.values.iter().enumerate() {
        if l <= SUPPORT_TOL {
            continue;
        }
        let s = l.sqrt();
        for a in 0..d {
            v[a * d + i] += e.vectors[(a, i)] * s;
        }
    }
    Ket::new(space, v)
}

/// Projector onto [`purify_ket`].
pub fn purify(rho: &DensityOperator, ref_label: &str) -> Result<DensityOperator> {
    purify_ket(rho, ref_label)?.projector()
}

/// Purification `Σ_i √λ_i |e_i⟩ ⊗ |e_i⟩` onto a copy of `rho`'s space under
/// new labels. Both marginals equal `rho`.
pub fn symmetric_purification(rho: &DensityOperator, ref_labels: &[&str]) -> Result<Ket> {
    let src = rho.space();
    if ref_labels.len() != src.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} reference labels for {src}",
            ref_labels.len()
        )));
    }
    let map: Vec<(&str, &str)> = src
        .labels()
        .iter()
        .map(String::as_str)
        .zip(ref_labels.iter().copied())
        .collect();
    let reference = src.relabel(&map)?;
    let space = src.concat(&reference)?;
    let d = rho.dim();
    let e = spectral::eigh(rho.matrix());
    let mut v = Vector::zeros(d * d);
    for (i, &l) in e.values.iter().enumerate() {
        if l <= SUPPORT_TOL {
            continue;
        }
        let s = C64::new(l.sqrt(), 0.0);
        for a in 0..d {
            for b in 0..d {
                v[a * d + b] += e.vectors[(a, i)] * e.vectors[(b, i)] * s;
            }
        }
    }
    Ket::new(space, v)
}

/// Unit vector of a rank-one state (global phase fixed by the eigensolver).
pub fn pure_state_vector(rho: &DensityOperator) -> Result<Ket> {
    let e = spectral::eigh(rho.matrix());
    let (idx, &top) = e
        .values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty spectrum");
    if (top - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState(format!(
            "state is not pure (largest eigenvalue {top})"
        )));
    }
    Ket::new(rho.space().clone(), e.vectors.column(idx).into_owned())
}

/// A linear map between labeled spaces, typically an isometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    input: Space,
    output: Space,
    matrix: Mat,
}

impl Isometry {
    pub fn new(input: Space, output: Space, matrix: Mat) -> Result<Self> {
        if matrix.nrows() != output.total_dim() || matrix.ncols() != input.total_dim() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix for {input} -> {output}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Isometry {
            input,
            output,
            matrix,
        })
    }

    pub fn input(&self) -> &Space {
        &self.input
    }

    pub fn output(&self) -> &Space {
        &self.output
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    /// `‖V^dag V - 1‖_max`.
    pub fn isometry_error(&self) -> f64 {
        let g = self.matrix.adjoint() * &self.matrix - Mat::identity(self.matrix.ncols(), self.matrix.ncols());
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Applies `V ⊗ 1` to a vector containing the input factors. The result
    /// lists the output factors first, then the untouched factors in their
    /// original order.
    pub fn apply_ket(&self, ket: &Ket) -> Result<Ket> {
        let space = ket.space();
        for (l, d) in self.input.factors() {
            if space.dim_of(l)? != d {
                return Err(Error::SpaceMismatch(format!(
                    "factor `{l}` differs between {} and {space}",
                    self.input
                )));
            }
        }
        let rest = space.select(&space.complement(&self.input.subsystems()))?;
        let ordered = ket.permuted(&self.input.concat(&rest)?)?;
        let (din, dr) = (self.input.total_dim(), rest.total_dim());
        let m = Mat::from_fn(din, dr, |i, j| ordered.vector()[i * dr + j]);
        let out = &self.matrix * m;
        let dout = self.output.total_dim();
        let v = Vector::from_fn(dout * dr, |k, _| out[(k / dr, k % dr)]);
        Ket::new(self.output.concat(&rest)?, v)
    }
}

/// Uhlmann isometry `V: B → C` maximizing `|⟨φ|(1_A ⊗ V)|ψ⟩|`, where `A`
/// are the factors shared by `psi` (on `A ⊗ B`) and `phi` (on `A ⊗ C`).
///
/// With coefficient matrices `Ψ` (`A × B`) and `Φ` (`A × C`) the overlap is
/// `Tr[V^T Φ^dag Ψ]`; writing `Φ^dag Ψ = X S Y^dag`, the choice
/// `V = conj(X) Y^T` attains `Tr S`, the fidelity of the `A`-marginals.
/// When `|C| < |B|` the result is a partial isometry that is isometric on
/// the support of `ψ_B`.
pub fn uhlmann_isometry_kets(psi: &Ket, phi: &Ket) -> Result<Isometry> {
    let shared: Vec<&str> = psi
        .space()
        .labels()
        .iter()
        .filter(|l| phi.space().contains(l))
        .map(String::as_str)
        .collect();
    let shared = Subsystems::new(shared)?;
    let (psi_m, a_space, b_space) = psi.as_matrix(&shared)?;
    let (phi_m, a_phi, c_space) = phi.as_matrix(&shared)?;
    if a_space != a_phi {
        return Err(Error::SpaceMismatch(format!("{a_space} vs {a_phi}")));
    }
    let (db, dc) = (b_space.total_dim(), c_space.total_dim());
    let w = phi_m.adjoint() * &psi_m;
    let svd = w.svd(true, true);
    let x = svd.u.expect("requested");
    let y = svd.v_t.expect("requested").adjoint();
    let v = x.map(|z| z.conj()) * y.transpose();
    if dc < db {
        let rank = spectral::eigvalsh(&(psi_m.adjoint() * &psi_m))
            .into_iter()
            .filter(|&l| l > 1e-10)
            .count();
        if rank > dc {
            return Err(Error::DimensionTooSmall {
                required: rank,
                available: dc,
            });
        }
    }
    Isometry::new(b_space, c_space, v)
}

/// [`uhlmann_isometry_kets`] for rank-one density operators.
pub fn uhlmann_isometry(psi: &DensityOperator, phi: &DensityOperator) -> Result<Isometry> {
    uhlmann_isometry_kets(&pure_state_vector(psi)?, &pure_state_vector(phi)?)
}

/// Trace distance `sqrt(1 - |⟨a|b⟩|²)` between unit vectors.
pub fn pure_trace_distance(a: &Ket, b: &Ket) -> Result<f64> {
    let o = a.inner(b)?.norm();
    Ok((1.0 - (o * o).min(1.0)).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density_operator, random_ket, rng_for};

    #[test]
    fn purification_marginal() {
        let a = Space::single("A", 3).unwrap();
        let rho = random_density_operator(a, 2, 4).unwrap();
        let psi = purify(&rho, "R").unwrap();
        let back = psi.marginal(&Subsystems::new(["A"]).unwrap()).unwrap();
        assert!((back.matrix() - rho.matrix()).norm() < 1e-12);
    }

    #[test]
    fn symmetric_purification_marginals() {
        let a = Space::single("A", 2).unwrap();
        let rho = random_density_operator(a, 2, 9).unwrap();
        let psi = symmetric_purification(&rho, &["Ar"]).unwrap().projector().unwrap();
        let ma = psi.marginal(&Subsystems::new(["A"]).unwrap()).unwrap();
        let mr = psi.marginal(&Subsystems::new(["Ar"]).unwrap()).unwrap();
        assert!((ma.matrix() - rho.matrix()).norm() < 1e-12);
        assert!((mr.matrix() - rho.matrix()).norm() < 1e-12);
    }

    #[test]
    fn uhlmann_on_equal_states() {
        let mut rng = rng_for(3, 0);
        let psi = random_ket(Space::new([("A", 2), ("B", 2)]).unwrap(), &mut rng);
        let phi = psi.relabel(&[("B", "C")]).unwrap();
        let v = uhlmann_isometry_kets(&psi, &phi).unwrap();
        assert!(v.isometry_error() < 1e-12);
        let out = v.apply_ket(&psi).unwrap().permuted(phi.space()).unwrap();
        assert!(pure_trace_distance(&out, &phi).unwrap() < 1e-7);
    }

    #[test]
    fn uhlmann_rejects_small_target() {
        let mut rng = rng_for(4, 0);
        let psi = random_ket(Space::new([("A", 4), ("B", 4)]).unwrap(), &mut rng);
        let phi = random_ket(Space::new([("A", 4), ("C", 2)]).unwrap(), &mut rng);
        assert!(matches!(
            uhlmann_isometry_kets(&psi, &phi),
            Err(Error::DimensionTooSmall { .. })
        ));
    }
}
