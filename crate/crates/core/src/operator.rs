//! Operators and states on labeled multipartite spaces.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::space::{odometer, permutation_map, Space, Subsystems};
use crate::spectral;

pub type C64 = nalgebra::Complex<f64>;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

/// Max-abs entrywise tolerance on `M - M^dag` for states.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Trace tolerance for states.
pub const TRACE_TOL: f64 = 1e-9;

/// A square operator on a labeled space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: Space,
    matrix: Mat,
}

impl Operator {
    pub fn new(space: Space, matrix: Mat) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix on {space} (dimension {d})",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Operator { space, matrix })
    }

    pub fn identity(space: Space) -> Self {
        let d = space.total_dim();
        Operator {
            space,
            matrix: Mat::identity(d, d),
        }
    }

    pub fn zeros(space: Space) -> Self {
        let d = space.total_dim();
        Operator {
            space,
            matrix: Mat::zeros(d, d),
        }
    }

    /// Real diagonal operator.
    pub fn diagonal(space: Space, diag: &[f64]) -> Result<Self> {
        let d = space.total_dim();
        if diag.len() != d {
            return Err(Error::ShapeMismatch(format!(
                "{} diagonal entries for dimension {d}",
                diag.len()
            )));
        }
        let matrix = Mat::from_diagonal(&Vector::from_iterator(
            d,
            diag.iter().map(|&x| C64::new(x, 0.0)),
        ));
        Ok(Operator { space, matrix })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn dagger(&self) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix * C64::new(factor, 0.0),
        }
    }

    fn check_same_space(&self, other: &Operator) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!(
                "{} vs {}",
                self.space, other.space
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_space(other)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.check_same_space(other)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    /// Matrix product on a common space.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        self.check_same_space(other)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// Max-abs entry of `M - M^dag`.
    pub fn hermiticity_error(&self) -> f64 {
        spectral::hermiticity_error(&self.matrix)
    }

    /// Same operator expressed on `target`, a reordering of its factors.
    pub fn permuted(&self, target: &Space) -> Result<Operator> {
        if *target == self.space {
            return Ok(self.clone());
        }
        let map = permutation_map(&self.space, target)?;
        let d = map.len();
        let matrix = Mat::from_fn(d, d, |i, j| self.matrix[(map[i], map[j])]);
        Ok(Operator {
            space: target.clone(),
            matrix,
        })
    }

    pub fn reordered(&self, order: &[String]) -> Result<Operator> {
        let target = self.space.reordered(order)?;
        self.permuted(&target)
    }

    /// `self ⊗ 1` on the factors of `target` missing from `self`, in
    /// `target`'s label order.
    pub fn extend_to(&self, target: &Space) -> Result<Operator> {
        for (label, dim) in self.space.factors() {
            if target.dim_of(label)? != dim {
                return Err(Error::SpaceMismatch(format!(
                    "factor `{label}` differs between {} and {target}",
                    self.space
                )));
            }
        }
        let rest = target.select(&target.complement(&self.space.subsystems()))?;
        let full = tensor(&[self, &Operator::identity(rest)])?;
        full.permuted(target)
    }

    pub fn relabel(&self, map: &[(&str, &str)]) -> Result<Operator> {
        Ok(Operator {
            space: self.space.relabel(map)?,
            matrix: self.matrix.clone(),
        })
    }

    pub fn partial_trace(&self, keep: &Subsystems) -> Result<Operator> {
        partial_trace(self, keep)
    }
}

/// Kronecker product in argument order; the factorization is the
/// concatenation of the operand factorizations.
pub fn tensor(ops: &[&Operator]) -> Result<Operator> {
    let mut space = Space::trivial();
    let mut matrix = Mat::identity(1, 1);
    for op in ops {
        space = space.concat(&op.space)?;
        matrix = matrix.kronecker(&op.matrix);
    }
    Ok(Operator { space, matrix })
}

/// Traces out every factor not named in `keep`. The result keeps the
/// remaining factors in their original order.
pub fn partial_trace(x: &Operator, keep: &Subsystems) -> Result<Operator> {
    let space = x.space();
    let kept = space.select(keep)?;
    if kept.len() == space.len() {
        return Ok(x.clone());
    }
    let traced = space.select(&space.complement(keep))?;
    let strides = space.strides();
    let stride_of = |s: &Space| -> Vec<usize> {
        s.labels()
            .iter()
            .map(|l| strides[space.position(l).expect("selected label")])
            .collect()
    };
    let kept_offsets = odometer(kept.dims(), &stride_of(&kept));
    let traced_offsets = odometer(traced.dims(), &stride_of(&traced));
    let m = x.matrix();
    let dk = kept_offsets.len();
    let mut out = Mat::zeros(dk, dk);
    for (b, &cb) in kept_offsets.iter().enumerate() {
        for (a, &ra) in kept_offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &traced_offsets {
                acc += m[(ra + t, cb + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Operator::new(kept, out)
}

/// A density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(Operator);

impl DensityOperator {
    /// Validates and hermitizes `op`.
    pub fn new(op: Operator) -> Result<Self> {
        let herm = op.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let matrix = spectral::hermitize(op.matrix());
        let min = spectral::eigvalsh(&matrix)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < -spectral::NEGATIVE_CLIP {
            return Err(Error::NotPsd(min));
        }
        Ok(DensityOperator(Operator {
            space: op.space,
            matrix,
        }))
    }

    pub fn from_matrix(space: Space, matrix: Mat) -> Result<Self> {
        DensityOperator::new(Operator::new(space, matrix)?)
    }

    pub fn maximally_mixed(space: Space) -> Self {
        let d = space.total_dim();
        DensityOperator(Operator::identity(space).scaled(1.0 / d as f64))
    }

    /// The computational basis projector `|index><index|`.
    pub fn basis(space: Space, index: usize) -> Result<Self> {
        let d = space.total_dim();
        if index >= d {
            return Err(Error::IndexOutOfRange { index, bound: d });
        }
        let mut m = Mat::zeros(d, d);
        m[(index, index)] = C64::new(1.0, 0.0);
        Ok(DensityOperator(Operator { space, matrix: m }))
    }

    pub fn diagonal(space: Space, probs: &[f64]) -> Result<Self> {
        DensityOperator::new(Operator::diagonal(space, probs)?)
    }

    pub fn as_operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }

    pub fn marginal(&self, keep: &Subsystems) -> Result<DensityOperator> {
        let op = partial_trace(&self.0, keep)?;
        Ok(DensityOperator(Operator {
            matrix: spectral::hermitize(&op.matrix),
            space: op.space,
        }))
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        Ok(DensityOperator(tensor(&[&self.0, &other.0])?))
    }

    pub fn permuted(&self, target: &Space) -> Result<DensityOperator> {
        Ok(DensityOperator(self.0.permuted(target)?))
    }

    pub fn reordered(&self, order: &[String]) -> Result<DensityOperator> {
        Ok(DensityOperator(self.0.reordered(order)?))
    }

    pub fn relabel(&self, map: &[(&str, &str)]) -> Result<DensityOperator> {
        Ok(DensityOperator(self.0.relabel(map)?))
    }

    /// Convex combination `Σ p_i ρ_i` of states on a common space.
    pub fn mixture(weights: &[f64], states: &[&DensityOperator]) -> Result<DensityOperator> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::ShapeMismatch(
                "mixture needs one weight per state".into(),
            ));
        }
        let mut acc = Operator::zeros(states[0].space().clone());
        for (&p, s) in weights.iter().zip(states) {
            if p < 0.0 {
                return Err(Error::InvalidArgument(format!("negative weight {p}")));
            }
            acc = acc.add(&s.scaled(p))?;
        }
        DensityOperator::new(acc)
    }

    /// Rank counted with the support threshold.
    pub fn rank(&self) -> usize {
        spectral::eigvalsh(self.matrix())
            .into_iter()
            .filter(|&l| l > spectral::SUPPORT_TOL)
            .count()
    }

    /// `Tr ρ^2`.
    pub fn purity(&self) -> f64 {
        (self.matrix() * self.matrix()).trace().re
    }
}

impl Deref for DensityOperator {
    type Target = Operator;
    fn deref(&self) -> &Operator {
        &self.0
    }
}

impl AsRef<Operator> for DensityOperator {
    fn as_ref(&self) -> &Operator {
        &self.0
    }
}

impl From<DensityOperator> for Operator {
    fn from(d: DensityOperator) -> Operator {
        d.0
    }
}

/// A state vector on a labeled space.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    space: Space,
    vector: Vector,
}

impl Ket {
    pub fn new(space: Space, vector: Vector) -> Result<Self> {
        if vector.len() != space.total_dim() {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} on {space}",
                vector.len()
            )));
        }
        Ok(Ket { space, vector })
    }

    pub fn basis(space: Space, index: usize) -> Result<Self> {
        let d = space.total_dim();
        if index >= d {
            return Err(Error::IndexOutOfRange { index, bound: d });
        }
        let mut v = Vector::zeros(d);
        v[index] = C64::new(1.0, 0.0);
        Ok(Ket { space, vector: v })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn vector(&self) -> &Vector {
        &self.vector
    }

    pub fn norm(&self) -> f64 {
        self.vector.norm()
    }

    pub fn normalized(&self) -> Result<Ket> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Ok(Ket {
            space: self.space.clone(),
            vector: &self.vector / C64::new(n, 0.0),
        })
    }

    pub fn tensor(&self, other: &Ket) -> Result<Ket> {
        Ok(Ket {
            space: self.space.concat(&other.space)?,
            vector: self.vector.kronecker(&other.vector),
        })
    }

    pub fn permuted(&self, target: &Space) -> Result<Ket> {
        if *target == self.space {
            return Ok(self.clone());
        }
        let map = permutation_map(&self.space, target)?;
        Ok(Ket {
            space: target.clone(),
            vector: Vector::from_iterator(map.len(), map.iter().map(|&i| self.vector[i])),
        })
    }

    pub fn reordered(&self, order: &[String]) -> Result<Ket> {
        let target = self.space.reordered(order)?;
        self.permuted(&target)
    }

    pub fn relabel(&self, map: &[(&str, &str)]) -> Result<Ket> {
        Ok(Ket {
            space: self.space.relabel(map)?,
            vector: self.vector.clone(),
        })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!(
                "{} vs {}",
                self.space, other.space
            )));
        }
        Ok(self.vector.dotc(&other.vector))
    }

    /// Scales and adds `other` (same space).
    pub fn axpy(&mut self, coeff: C64, other: &Ket) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!(
                "{} vs {}",
                self.space, other.space
            )));
        }
        self.vector += &other.vector * coeff;
        Ok(())
    }

    /// `|v><v| / <v|v>`.
    pub fn projector(&self) -> Result<DensityOperator> {
        let v = self.normalized()?;
        let m = &v.vector * v.vector.adjoint();
        Ok(DensityOperator(Operator {
            space: v.space,
            matrix: m,
        }))
    }

    /// Coefficients reshaped as a matrix with rows indexed by the factors in
    /// `rows` and columns by the remaining factors (both in `self` order).
    pub fn as_matrix(&self, rows: &Subsystems) -> Result<(Mat, Space, Space)> {
        let row_space = self.space.select(rows)?;
        let col_space = self.space.select(&self.space.complement(rows))?;
        let ordered = self.permuted(&row_space.concat(&col_space)?)?;
        let (r, c) = (row_space.total_dim(), col_space.total_dim());
        let m = Mat::from_fn(r, c, |i, j| ordered.vector[i * c + j]);
        Ok((m, row_space, col_space))
    }
}
