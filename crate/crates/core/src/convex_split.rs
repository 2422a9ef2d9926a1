//! Multipartite convex splitting: the mixture state, its exact error, the
//! conditional-expectation and mean-zero maps, and the exponent bound.
//!
//! Copy `m` (one-based) of a split factor `A` is labeled `A_m`. The copy
//! space lists, for each split factor in order, its copies `1..=M_ℓ`,
//! followed by the residual factors in their original order.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{tensor, DensityOperator, Mat, Operator, C64};
use crate::random::{random_full_rank, random_operator, rng_for};
use crate::renyi::{error_exponent_state, ExponentQuery, ExponentValue, MinimizerOptions};
use crate::space::{Space, Subset, Subsystems};
use crate::spectral;

pub const DEFAULT_DIM_CAP: usize = 4096;

pub fn copy_label(part: &str, m: usize) -> String {
    format!("{part}_{}", m + 1)
}

/// Copy counts `(M_1, …, M_L)` of the split factors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CopySpec {
    pub counts: Vec<usize>,
    pub part_labels: Vec<String>,
    pub residual_labels: Vec<String>,
}

impl CopySpec {
    pub fn parties(&self) -> usize {
        self.counts.len()
    }

    /// `M_S = Π_{ℓ∈S} M_ℓ`.
    pub fn count_of(&self, s: Subset) -> usize {
        s.members().map(|l| self.counts[l]).product()
    }

    /// All multi-indices `m` in row-major order.
    pub fn multi_indices(&self) -> Vec<Vec<usize>> {
        let total: usize = self.counts.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut digits = vec![0usize; self.counts.len()];
        for _ in 0..total {
            out.push(digits.clone());
            for k in (0..digits.len()).rev() {
                digits[k] += 1;
                if digits[k] < self.counts[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        out
    }
}

/// Per-factor weights `τ_ℓ` for the split factors and `σ_E` for the residual
/// factors, combined as a product operator.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductWeight {
    pub parts: Vec<DensityOperator>,
    pub residual: Option<DensityOperator>,
}

impl ProductWeight {
    pub fn part_labels(&self) -> Vec<String> {
        self.parts.iter().map(|t| t.space().labels()[0].clone()).collect()
    }

    fn tau_for(&self, label: &str) -> Result<&DensityOperator> {
        self.parts
            .iter()
            .find(|t| t.space().labels()[0] == label)
            .ok_or_else(|| Error::LabelNotFound(label.to_string()))
    }

    /// `⊗ τ_ℓ ⊗ σ_E` expressed on `space`.
    pub fn operator_on(&self, space: &Space) -> Result<Operator> {
        let mut ops: Vec<&Operator> = self.parts.iter().map(|t| t.as_operator()).collect();
        if let Some(r) = &self.residual {
            ops.push(r.as_operator());
        }
        tensor(&ops)?.permuted(space)
    }

    /// Weight on the copy space: every copy of `A_ℓ` carries `τ_ℓ`.
    pub fn on_copies(&self, spec: &CopySpec, big: &Space) -> Result<Operator> {
        let mut copies = Vec::new();
        for (tau, &m) in self.parts.iter().zip(&spec.counts) {
            let label = &tau.space().labels()[0];
            for k in 0..m {
                copies.push(tau.relabel(&[(label, &copy_label(label, k))])?.into_operator());
            }
        }
        if let Some(r) = &self.residual {
            copies.push(r.as_operator().clone());
        }
        let refs: Vec<&Operator> = copies.iter().collect();
        tensor(&refs)?.permuted(big)
    }
}

/// A convex-split instance: `ρ` on `A_1 … A_L E` and one `τ_ℓ` per split
/// factor (single-factor states).
#[derive(Debug, Clone, PartialEq)]
pub struct SplitInstance {
    pub rho: DensityOperator,
    pub taus: Vec<DensityOperator>,
    pub copies: CopySpec,
    pub dim_cap: usize,
}

impl SplitInstance {
    pub fn new(rho: DensityOperator, taus: Vec<DensityOperator>, counts: Vec<usize>) -> Result<Self> {
        if taus.is_empty() || taus.len() != counts.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} references for {} counts",
                taus.len(),
                counts.len()
            )));
        }
        if let Some(&c) = counts.iter().find(|&&c| c == 0) {
            return Err(Error::InvalidArgument(format!("copy count {c} must be >= 1")));
        }
        let mut part_labels = Vec::new();
        for tau in &taus {
            if tau.space().len() != 1 {
                return Err(Error::ShapeMismatch(format!(
                    "reference {} must be a single factor",
                    tau.space()
                )));
            }
            let (label, dim) = tau.space().factors().next().expect("one factor");
            if rho.space().dim_of(label)? != dim {
                return Err(Error::SpaceMismatch(format!("factor `{label}`")));
            }
            let marginal = rho.marginal(&Subsystems::new([label])?)?;
            let support = spectral::support_projector(tau.matrix());
            let leak = ((Mat::identity(dim, dim) - support) * marginal.matrix()).trace().re;
            if leak > crate::renyi::SUPPORT_LEAK_TOL {
                return Err(Error::SupportViolation(format!(
                    "marginal on `{label}` leaks {leak:.3e} outside the support of its reference"
                )));
            }
            part_labels.push(label.to_string());
        }
        let residual_labels = rho
            .space()
            .labels()
            .iter()
            .filter(|l| !part_labels.contains(l))
            .cloned()
            .collect();
        Ok(SplitInstance {
            rho,
            taus,
            copies: CopySpec {
                counts,
                part_labels,
                residual_labels,
            },
            dim_cap: DEFAULT_DIM_CAP,
        })
    }

    pub fn with_dim_cap(mut self, cap: usize) -> Self {
        self.dim_cap = cap;
        self
    }

    pub fn parties(&self) -> usize {
        self.taus.len()
    }

    pub fn residual(&self) -> Subsystems {
        Subsystems::new(self.copies.residual_labels.clone()).expect("distinct labels")
    }

    pub fn residual_space(&self) -> Result<Space> {
        self.rho.space().select(&self.residual())
    }

    /// Labels `A_S ∪ E`.
    pub fn subset_labels(&self, s: Subset) -> Subsystems {
        let labels = s
            .members()
            .map(|l| self.copies.part_labels[l].clone())
            .chain(self.copies.residual_labels.iter().cloned());
        Subsystems::new(labels).expect("distinct labels")
    }

    /// The copy space, validated against the dimension cap.
    pub fn copy_space(&self) -> Result<Space> {
        let mut factors = Vec::new();
        for (tau, &m) in self.taus.iter().zip(&self.copies.counts) {
            let (label, dim) = tau.space().factors().next().expect("one factor");
            for k in 0..m {
                factors.push((copy_label(label, k), dim));
            }
        }
        for (l, d) in self.residual_space()?.factors() {
            factors.push((l.to_string(), d));
        }
        let total = factors
            .iter()
            .try_fold(1usize, |acc, (_, d)| acc.checked_mul(*d))
            .unwrap_or(usize::MAX);
        if total > self.dim_cap {
            return Err(Error::DimensionCapExceeded {
                dim: total,
                cap: self.dim_cap,
            });
        }
        Space::new(factors)
    }

    /// `⊗_ℓ τ_ℓ^{⊗M_ℓ} ⊗ ρ_E` on the copy space.
    pub fn product_reference(&self) -> Result<DensityOperator> {
        let big = self.copy_space()?;
        let weight = ProductWeight {
            parts: self.taus.clone(),
            residual: Some(self.rho.marginal(&self.residual())?),
        };
        DensityOperator::new(weight.on_copies(&self.copies, &big)?)
    }
}

fn relabel_map(spec: &CopySpec, m: &[usize]) -> Vec<(String, String)> {
    spec.part_labels
        .iter()
        .zip(m)
        .map(|(l, &k)| (l.clone(), copy_label(l, k)))
        .collect()
}

fn as_pairs(map: &[(String, String)]) -> Vec<(&str, &str)> {
    map.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect()
}

/// `ω = (1/M_{[L]}) Σ_m ρ_{A_m E} ⊗ (τ on every other copy)` on the copy
/// space.
pub fn build_convex_split_state(inst: &SplitInstance) -> Result<DensityOperator> {
    let big = inst.copy_space()?;
    let spec = &inst.copies;
    let indices = spec.multi_indices();
    let mut acc = Mat::zeros(big.total_dim(), big.total_dim());
    for m in &indices {
        let map = relabel_map(spec, m);
        let mut ops = vec![inst.rho.relabel(&as_pairs(&map))?.into_operator()];
        for (l, tau) in inst.taus.iter().enumerate() {
            let label = &spec.part_labels[l];
            for k in (0..spec.counts[l]).filter(|&k| k != m[l]) {
                ops.push(tau.relabel(&[(label, &copy_label(label, k))])?.into_operator());
            }
        }
        let refs: Vec<&Operator> = ops.iter().collect();
        acc += tensor(&refs)?.permuted(&big)?.matrix();
    }
    acc /= C64::new(indices.len() as f64, 0.0);
    DensityOperator::from_matrix(big, acc)
}

/// `Δ = ½‖ω − ⊗τ^{⊗M} ⊗ ρ_E‖₁`.
pub fn convex_split_error(inst: &SplitInstance) -> Result<f64> {
    let omega = build_convex_split_state(inst)?;
    let reference = inst.product_reference()?;
    spectral::trace_distance(&omega, &reference)
}

/// `E_S(X) = Tr_S[(τ_S ⊗ 1) X] ⊗ 1_S` with `S` given by labels; each label
/// must have a weight in `weights.parts`.
pub fn conditional_expectation(
    x: &Operator,
    s: &Subsystems,
    weights: &ProductWeight,
) -> Result<Operator> {
    if s.is_empty() {
        return Ok(x.clone());
    }
    let space = x.space();
    let mut taus = Vec::new();
    for l in s.iter() {
        space.position(l)?;
        taus.push(weights.tau_for(l)?.as_operator());
    }
    let w = tensor(&taus)?.extend_to(space)?;
    let weighted = w.compose(x)?;
    let keep = space.complement(s);
    weighted.partial_trace(&keep)?.extend_to(space)
}

fn labels_of(parts: &[String], s: Subset) -> Subsystems {
    Subsystems::new(s.members().map(|l| parts[l].clone())).expect("distinct labels")
}

/// `E_S` for `S ⊆ [L]` indexing `weights.parts`.
pub fn conditional_expectation_subset(
    x: &Operator,
    s: Subset,
    weights: &ProductWeight,
) -> Result<Operator> {
    conditional_expectation(x, &labels_of(&weights.part_labels(), s), weights)
}

/// `T_S(X) = E_{S^c}(Σ_{R⊆S} (−1)^{|R|} E_R(X))`, complement in `[L]`.
pub fn mean_zero_map(x: &Operator, s: Subset, weights: &ProductWeight) -> Result<Operator> {
    let parties = weights.parts.len();
    if !s.is_subset_of(Subset::full(parties)) {
        return Err(Error::IndexOutOfRange {
            index: s.members().last().unwrap_or(0),
            bound: parties,
        });
    }
    let mut sum = Operator::zeros(x.space().clone());
    for r in s.subsets() {
        let term = conditional_expectation_subset(x, r, weights)?;
        let sign = if r.len() % 2 == 0 { 1.0 } else { -1.0 };
        sum = sum.add(&term.scaled(sign))?;
    }
    conditional_expectation_subset(&sum, Subset::full(parties).minus(s), weights)
}

/// Operator norm of a difference.
fn residual(a: &Operator, b: &Operator) -> Result<f64> {
    spectral::schatten_norm(&a.sub(b)?, f64::INFINITY)
}

/// Largest operator-norm residual of `X − E_{[L]}X = Σ_{S≠∅} T_S X` and of
/// `E_{S^c} X = Σ_{R⊆S} T_R X` over all `S ⊆ [L]`.
pub fn mean_zero_decomposition_check(x: &Operator, weights: &ProductWeight) -> Result<f64> {
    let parties = weights.parts.len();
    let full = Subset::full(parties);
    let t: Vec<Operator> = Subset::all(parties)
        .map(|s| mean_zero_map(x, s, weights))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;

    let lhs = x.sub(&conditional_expectation_subset(x, full, weights)?)?;
    let mut rhs = Operator::zeros(x.space().clone());
    for s in Subset::nonempty(parties) {
        rhs = rhs.add(&t[s.bits() as usize])?;
    }
    worst = worst.max(residual(&lhs, &rhs)?);

    for s in Subset::all(parties) {
        let lhs = conditional_expectation_subset(x, full.minus(s), weights)?;
        let mut rhs = Operator::zeros(x.space().clone());
        for r in s.subsets() {
            rhs = rhs.add(&t[r.bits() as usize])?;
        }
        worst = worst.max(residual(&lhs, &rhs)?);
    }
    Ok(worst)
}

/// Largest operator-norm residual of `E_ℓ ∘ T_S = 0` (`ℓ ∈ S`) and
/// `E_ℓ ∘ T_S = T_S` (`ℓ ∉ S`) over all `S ⊆ [L]`, `ℓ ∈ [L]`.
pub fn annihilation_check(x: &Operator, weights: &ProductWeight) -> Result<f64> {
    let parties = weights.parts.len();
    let mut worst = 0.0f64;
    for s in Subset::all(parties) {
        let t = mean_zero_map(x, s, weights)?;
        for l in 0..parties {
            let e = conditional_expectation_subset(&t, Subset::singleton(l), weights)?;
            let target = if s.contains(l) {
                Operator::zeros(x.space().clone())
            } else {
                t.clone()
            };
            worst = worst.max(residual(&e, &target)?);
        }
    }
    Ok(worst)
}

/// `π_m(X)`: `X` on the copy slots `(ℓ, m_ℓ)` and identity elsewhere.
pub fn embed_copy(x: &Operator, m: &[usize], spec: &CopySpec, big: &Space) -> Result<Operator> {
    if m.len() != spec.counts.len() {
        return Err(Error::ShapeMismatch(format!(
            "multi-index of length {} for {} parties",
            m.len(),
            spec.counts.len()
        )));
    }
    for (&k, &c) in m.iter().zip(&spec.counts) {
        if k >= c {
            return Err(Error::IndexOutOfRange { index: k, bound: c });
        }
    }
    let map = relabel_map(spec, m);
    x.relabel(&as_pairs(&map))?.extend_to(big)
}

/// `⟨X, Y⟩_W = Tr[X^dag W^{1/2} Y W^{1/2}]`.
pub fn weighted_inner(x: &Operator, y: &Operator, w_sqrt: &Mat) -> C64 {
    (x.matrix().adjoint() * w_sqrt * y.matrix() * w_sqrt).trace()
}

/// `max_{m≠m'} |⟨π_m(X̊), π_{m'}(X̊)⟩_τ|` with `X̊ = T_{[L]}(X)`.
pub fn l2_orthogonality_check(
    x: &Operator,
    spec: &CopySpec,
    weights: &ProductWeight,
) -> Result<f64> {
    let parties = weights.parts.len();
    let centered = mean_zero_map(x, Subset::full(parties), weights)?;
    let big = copy_space_of(spec, weights)?;
    let w_sqrt = spectral::psd_power(weights.on_copies(spec, &big)?.matrix(), 0.5);
    let embedded: Vec<Operator> = spec
        .multi_indices()
        .iter()
        .map(|m| embed_copy(&centered, m, spec, &big))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for (i, a) in embedded.iter().enumerate() {
        for (j, b) in embedded.iter().enumerate() {
            if i != j {
                worst = worst.max(weighted_inner(a, b, &w_sqrt).norm());
            }
        }
    }
    Ok(worst)
}

/// Copy space from the weights' factor dimensions.
pub fn copy_space_of(spec: &CopySpec, weights: &ProductWeight) -> Result<Space> {
    let mut factors = Vec::new();
    for (tau, &m) in weights.parts.iter().zip(&spec.counts) {
        let (label, dim) = tau.space().factors().next().expect("one factor");
        for k in 0..m {
            factors.push((copy_label(label, k), dim));
        }
    }
    if let Some(r) = &weights.residual {
        for (l, d) in r.space().factors() {
            factors.push((l.to_string(), d));
        }
    }
    Space::new(factors)
}

/// Maps probed by [`lp_map_norm_probe`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ProbeMap {
    /// `T_S`.
    MeanZero(Subset),
    /// `Θ ∘ T_{[L]}` with `Θ(X) = M_{[L]}^{-1} Σ_m π_m(X)` into the copy space.
    SplitOfMeanZero(Vec<usize>),
}

/// Sampled operator ratios of a probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub max_ratio: f64,
    pub bound: f64,
    pub samples: usize,
}

/// Norm bound asserted for a probe map at order `p`.
pub fn probe_bound(map: &ProbeMap, parties: usize, p: f64) -> f64 {
    match map {
        ProbeMap::MeanZero(s) if s.len() == parties && parties == 2 => {
            if p == 1.0 {
                4.0
            } else {
                2.0
            }
        }
        ProbeMap::MeanZero(s) => 2f64.powi(s.len() as i32),
        ProbeMap::SplitOfMeanZero(counts) => {
            let m: f64 = counts.iter().map(|&c| c as f64).product();
            if counts.len() == 2 {
                2f64.powf(3.0 / p - 1.0) * m.powf((1.0 - p) / p)
            } else {
                2f64.powi(counts.len() as i32) * m.powf((1.0 - p) / p)
            }
        }
    }
}

/// Random instance weights and samples for [`lp_map_norm_probe`]: qubit
/// split factors `A1..AL` and a qubit residual `E`.
pub fn probe_weights(parties: usize, seed: u64) -> Result<ProductWeight> {
    let mut rng = rng_for(seed, u64::MAX);
    let parts = (0..parties)
        .map(|l| random_full_rank(Space::single(format!("A{}", l + 1), 2).expect("valid"), &mut rng))
        .collect();
    let residual = Some(random_full_rank(Space::single("E", 2)?, &mut rng));
    Ok(ProductWeight { parts, residual })
}

/// Largest sampled ratio `‖map(X)‖_{p,τ'} / ‖X‖_{p,τ}` over `trials` inputs.
/// Even samples are Ginibre operators; odd samples are quotients
/// `ρ / (⊗τ ⊗ σ_E)` of random states.
pub fn lp_map_norm_probe(
    map: &ProbeMap,
    weights: &ProductWeight,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<ProbeReport> {
    let parties = weights.parts.len();
    let mut factors: Vec<Space> = weights.parts.iter().map(|t| t.space().clone()).collect();
    if let Some(r) = &weights.residual {
        factors.push(r.space().clone());
    }
    let small = factors
        .iter()
        .try_fold(Space::trivial(), |acc, s| acc.concat(s))?;
    let w_small = weights.operator_on(&small)?;
    let (big, w_big, spec) = match map {
        ProbeMap::MeanZero(_) => (small.clone(), w_small.clone(), None),
        ProbeMap::SplitOfMeanZero(counts) => {
            let spec = CopySpec {
                counts: counts.clone(),
                part_labels: weights.part_labels(),
                residual_labels: weights
                    .residual
                    .as_ref()
                    .map(|r| r.space().labels().to_vec())
                    .unwrap_or_default(),
            };
            let big = copy_space_of(&spec, weights)?;
            let w = weights.on_copies(&spec, &big)?;
            (big, w, Some(spec))
        }
    };
    let mut max_ratio = 0.0f64;
    for trial in 0..trials {
        let mut rng = rng_for(seed, trial as u64);
        let x = if trial % 2 == 0 {
            random_operator(small.clone(), &mut rng)
        } else {
            let rho = random_full_rank(small.clone(), &mut rng);
            spectral::nc_quotient(&rho, &w_small)?
        };
        let image = match (map, &spec) {
            (ProbeMap::MeanZero(s), _) => mean_zero_map(&x, *s, weights)?,
            (ProbeMap::SplitOfMeanZero(_), Some(spec)) => {
                let t = mean_zero_map(&x, Subset::full(parties), weights)?;
                let idx = spec.multi_indices();
                let mut acc = Operator::zeros(big.clone());
                for m in &idx {
                    acc = acc.add(&embed_copy(&t, m, spec, &big)?)?;
                }
                acc.scaled(1.0 / idx.len() as f64)
            }
            _ => unreachable!("copy spec is set for split maps"),
        };
        let denom = spectral::kosaki_norm(&x, &w_small, p)?;
        if denom <= 1e-12 {
            continue;
        }
        let num = spectral::kosaki_norm(&image, &w_big, p)?;
        max_ratio = max_ratio.max(num / denom);
    }
    Ok(ProbeReport {
        max_ratio,
        bound: probe_bound(map, parties, p),
        samples: trials,
    })
}

/// Exact error against the exponent bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitVerdict {
    /// `NaN` when the copy space exceeds the dimension cap.
    pub delta: f64,
    pub bound: f64,
    pub per_subset_exponents: Vec<(Subset, ExponentValue)>,
    /// `None` when `delta` was not evaluated.
    pub satisfied: Option<bool>,
}

/// `E_{log₂ M_S}(ρ_{A_S E} ‖ τ_{A_S})` for every nonempty `S`.
pub fn subset_exponents(
    inst: &SplitInstance,
    opts: &MinimizerOptions,
) -> Result<Vec<(Subset, ExponentValue)>> {
    let residual = inst.residual();
    Subset::nonempty(inst.parties())
        .map(|s| {
            let rho_s = inst.rho.marginal(&inst.subset_labels(s))?;
            let taus: Vec<&Operator> = s.members().map(|l| inst.taus[l].as_operator()).collect();
            let tau = tensor(&taus)?;
            let rate = (inst.copies.count_of(s) as f64).log2();
            let e = error_exponent_state(&rho_s, &tau, &residual, ExponentQuery::new(rate)?, opts)?;
            Ok((s, e))
        })
        .collect()
}

/// `½ Σ_{S≠∅} 2^{|S|} 2^{−E_S}` from subset exponents.
pub fn bound_from_exponents(exponents: &[(Subset, ExponentValue)]) -> f64 {
    0.5 * exponents
        .iter()
        .map(|(s, e)| 2f64.powi(s.len() as i32) * 2f64.powf(-e.value))
        .sum::<f64>()
}

/// Unipartite bound `2^{−E_{log M}(ρ_{AE}‖τ_A)}`.
pub fn unipartite_bound(exponent: f64) -> f64 {
    2f64.powf(-exponent)
}

/// Evaluates the bound and, when the copy space fits the cap, the exact
/// error.
pub fn convex_split_bound(inst: &SplitInstance, opts: &MinimizerOptions) -> Result<SplitVerdict> {
    let per_subset_exponents = subset_exponents(inst, opts)?;
    let bound = bound_from_exponents(&per_subset_exponents);
    let (delta, satisfied) = match convex_split_error(inst) {
        Ok(d) => (d, Some(d <= bound + 1e-8)),
        Err(Error::DimensionCapExceeded { .. }) => (f64::NAN, None),
        Err(e) => return Err(e),
    };
    Ok(SplitVerdict {
        delta,
        bound,
        per_subset_exponents,
        satisfied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_density_operator;

    fn qubit(l: &str) -> Space {
        Space::single(l, 2).unwrap()
    }

    #[test]
    fn single_copy_is_the_state() {
        let rho = random_density_operator(
            Space::new([("A", 2), ("B", 2), ("E", 2)]).unwrap(),
            8,
            1,
        )
        .unwrap();
        let ta = DensityOperator::maximally_mixed(qubit("A"));
        let tb = DensityOperator::maximally_mixed(qubit("B"));
        let inst = SplitInstance::new(rho.clone(), vec![ta, tb], vec![1, 1]).unwrap();
        let omega = build_convex_split_state(&inst).unwrap();
        let back = omega.relabel(&[("A_1", "A"), ("B_1", "B")]).unwrap();
        assert!((back.matrix() - rho.matrix()).norm() < 1e-14);
    }

    #[test]
    fn cap_is_enforced() {
        let rho = random_density_operator(Space::new([("A", 2), ("E", 2)]).unwrap(), 4, 1).unwrap();
        let ta = DensityOperator::maximally_mixed(qubit("A"));
        let inst = SplitInstance::new(rho, vec![ta], vec![8]).unwrap().with_dim_cap(64);
        assert_eq!(
            build_convex_split_state(&inst).unwrap_err(),
            Error::DimensionCapExceeded { dim: 512, cap: 64 }
        );
    }

    #[test]
    fn support_violation_rejected() {
        let rho = DensityOperator::basis(Space::new([("A", 2), ("E", 2)]).unwrap(), 3).unwrap();
        let ta = DensityOperator::basis(qubit("A"), 0).unwrap();
        assert!(matches!(
            SplitInstance::new(rho, vec![ta], vec![2]),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn embed_rejects_bad_index() {
        let spec = CopySpec {
            counts: vec![2],
            part_labels: vec!["A".into()],
            residual_labels: vec![],
        };
        let big = Space::new([("A_1", 2), ("A_2", 2)]).unwrap();
        let x = Operator::identity(qubit("A"));
        assert_eq!(
            embed_copy(&x, &[2], &spec, &big).unwrap_err(),
            Error::IndexOutOfRange { index: 2, bound: 2 }
        );
        let e = embed_copy(&x, &[1], &spec, &big).unwrap();
        assert_eq!(e, Operator::identity(big));
    }
}
