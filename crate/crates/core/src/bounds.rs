//! Closed-form simulation error bounds, exponent lower bounds,
//! moderate-deviation schedules and post-selection counting constants.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{
    channel_dispersion, channel_error_exponent, channel_mutual_information, InputOptions,
    QuantumChannel, RateVector,
};
use crate::error::{Error, Result};
use crate::renyi::RenyiOrder;
use crate::space::Subset;

/// Blocklength `n`, receivers `L` and the dimensions `|A|`, `|R|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlocklengthParams {
    pub n: u64,
    pub parties: usize,
    pub dim_a: usize,
    pub dim_r: usize,
}

impl BlocklengthParams {
    /// `n = 0` is accepted for the counting constants.
    pub fn new(n: u64, parties: usize, dim_a: usize, dim_r: usize) -> Result<Self> {
        if parties == 0 || dim_a == 0 || dim_r == 0 {
            return Err(Error::InvalidArgument(
                "receivers and dimensions must be at least 1".into(),
            ));
        }
        Ok(BlocklengthParams {
            n,
            parties,
            dim_a,
            dim_r,
        })
    }

    pub fn with_n(self, n: u64) -> Self {
        BlocklengthParams { n, ..self }
    }

    fn base(&self) -> BigUint {
        BigUint::from(self.n) + 1u32
    }

    fn a2m1(&self) -> u64 {
        (self.dim_a * self.dim_a - 1) as u64
    }
}

/// Twice the exponent of `k_n = (n+1)^{((3+L)/2)(|A|²-1)}`, an integer.
pub fn prefactor_exponent_twice(params: &BlocklengthParams) -> u64 {
    (3 + params.parties as u64) * params.a2m1()
}

/// `log₂ k_n`.
pub fn log2_prefactor(params: &BlocklengthParams) -> f64 {
    prefactor_exponent_twice(params) as f64 / 2.0 * ((params.n + 1) as f64).log2()
}

/// `k_n`; for `L = 2` this is `(n+1)^{(5/2)(|A|²-1)}`.
pub fn prefactor(params: &BlocklengthParams) -> f64 {
    log2_prefactor(params).exp2()
}

/// `(n+1)^{|A|²-1}`, the post-selection factor. The same number caps the
/// dimension of the de Finetti purification.
pub fn postselection_prefactor(params: &BlocklengthParams) -> BigUint {
    params.base().pow(params.a2m1() as u32)
}

/// `(n+1)^{2|A||R|-2}`, the support size of the decomposition of the de
/// Finetti state into i.i.d. purifications.
pub fn caratheodory_size(params: &BlocklengthParams) -> BigUint {
    params
        .base()
        .pow((2 * params.dim_a * params.dim_r - 2) as u32)
}

/// Comparison of the prefactor assembled in the two-receiver proof,
/// `(n+1)^{(|A|²-1)/2} (n+1)^{|A|²-1} (n+1)^{|A||R|-1}` with `|R| = |A|`,
/// against `k_n`, in exact integer arithmetic (both sides squared).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrefactorCheck {
    pub n: u64,
    pub composite_exponent_twice: u64,
    pub kn_exponent_twice: u64,
    pub holds: bool,
}

pub fn composite_prefactor_check(params: &BlocklengthParams) -> PrefactorCheck {
    let a = params.dim_a as u64;
    let composite = params.a2m1() + 2 * params.a2m1() + 2 * (a * a - 1);
    let kn = prefactor_exponent_twice(params);
    let base = params.base();
    let lhs = base.pow(composite as u32);
    let rhs = base.pow(kn as u32);
    PrefactorCheck {
        n: params.n,
        composite_exponent_twice: composite,
        kn_exponent_twice: kn,
        holds: lhs <= rhs,
    }
}

/// One subset's contribution to the simulation bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetTerm {
    pub subset: Subset,
    pub rate: f64,
    pub exponent: f64,
    pub alpha_star: f64,
    /// `log₂(2^{|S|} 2^{-n E_{r_S}})`.
    pub log2_term: f64,
}

/// The bound `k_n √(Σ_S 2^{|S|} 2^{-n E_{r_S}})` and the exponent
/// lower bound `½ min_S E_{r_S}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationBoundReport {
    pub n: u64,
    pub epsilon_bound: f64,
    pub log2_epsilon_bound: f64,
    pub prefactor: f64,
    pub log2_prefactor: f64,
    pub per_subset_terms: Vec<SubsetTerm>,
    pub exponent_lower: f64,
}

/// `E_{r_S}(𝒩_{A→B_S})` at `r_S` with the maximizing order and the
/// threshold `I(𝒩_{A→B_S})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetExponent {
    pub subset: Subset,
    pub rate: f64,
    pub exponent: f64,
    pub alpha_star: f64,
    pub threshold: f64,
}

/// [`SubsetExponent`] for every nonempty `S`, in subset order.
pub fn subset_exponents(
    ch: &QuantumChannel,
    rates: &RateVector,
    opts: &InputOptions,
) -> Result<Vec<SubsetExponent>> {
    if rates.len() != ch.parties() {
        return Err(Error::ShapeMismatch(format!(
            "{} rates for {} receivers",
            rates.len(),
            ch.parties()
        )));
    }
    let subsets: Vec<Subset> = Subset::nonempty(ch.parties()).collect();
    subsets
        .into_par_iter()
        .map(|s| {
            let r = rates.sum_over(s);
            let e = channel_error_exponent(ch, s, r, opts)?;
            Ok(SubsetExponent {
                subset: s,
                rate: r,
                exponent: e.value,
                alpha_star: e.alpha_star,
                threshold: e.threshold,
            })
        })
        .collect()
}

fn log2_sum_exp2(xs: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp2()).sum::<f64>().log2()
}

/// Evaluates the bound at `params.n` from precomputed exponents.
pub fn simulation_bound_from_exponents(
    params: &BlocklengthParams,
    exponents: &[SubsetExponent],
) -> SimulationBoundReport {
    let n = params.n as f64;
    let per_subset_terms: Vec<SubsetTerm> = exponents
        .iter()
        .map(|e| SubsetTerm {
            subset: e.subset,
            rate: e.rate,
            exponent: e.exponent,
            alpha_star: e.alpha_star,
            log2_term: e.subset.len() as f64 - n * e.exponent,
        })
        .collect();
    let log2_k = log2_prefactor(params);
    let log2_eps = log2_k + 0.5 * log2_sum_exp2(per_subset_terms.iter().map(|t| t.log2_term));
    SimulationBoundReport {
        n: params.n,
        epsilon_bound: log2_eps.exp2(),
        log2_epsilon_bound: log2_eps,
        prefactor: log2_k.exp2(),
        log2_prefactor: log2_k,
        per_subset_terms,
        exponent_lower: exponent_lower_from(exponents),
    }
}

fn exponent_lower_from(exponents: &[SubsetExponent]) -> f64 {
    0.5 * exponents
        .iter()
        .map(|e| e.exponent)
        .fold(f64::INFINITY, f64::min)
}

/// `ε ≤ k_n √(Σ_{∅≠S⊆[L]} 2^{|S|} 2^{-n E_{r_S}(𝒩_{A→B_S})})`.
pub fn one_shot_simulation_bound(
    ch: &QuantumChannel,
    rates: &RateVector,
    params: &BlocklengthParams,
    opts: &InputOptions,
) -> Result<SimulationBoundReport> {
    check_params(ch, params)?;
    let exponents = subset_exponents(ch, rates, opts)?;
    Ok(simulation_bound_from_exponents(params, &exponents))
}

fn check_params(ch: &QuantumChannel, params: &BlocklengthParams) -> Result<()> {
    if params.parties != ch.parties() || params.dim_a != ch.input().total_dim() {
        return Err(Error::ShapeMismatch(format!(
            "parameters (L={}, |A|={}) do not match the channel (L={}, |A|={})",
            params.parties,
            params.dim_a,
            ch.parties(),
            ch.input().total_dim()
        )));
    }
    Ok(())
}

/// The two-receiver display `k_n √(2δ₁₂ + δ₁ + δ₂)` with
/// `δ_S = 2^{-n E_S}`. It is smaller than the `L`-receiver expression at
/// `L = 2`, whose weights are `2^{|S|}`.
pub fn two_party_simulation_bound(params: &BlocklengthParams, e1: f64, e2: f64, e12: f64) -> f64 {
    let n = params.n as f64;
    let terms = [1.0 - n * e12, -n * e1, -n * e2];
    (log2_prefactor(params) + 0.5 * log2_sum_exp2(terms.into_iter())).exp2()
}

/// `½ min_S E_{r_S}(𝒩_{A→B_S})`.
pub fn simulation_exponent_lower(
    ch: &QuantumChannel,
    rates: &RateVector,
    opts: &InputOptions,
) -> Result<f64> {
    Ok(exponent_lower_from(&subset_exponents(ch, rates, opts)?))
}

/// `-(log₂ ε(n+h) - log₂ ε(n-h)) / 2h`, the per-use decay of the bound.
pub fn bound_slope(params: &BlocklengthParams, exponents: &[SubsetExponent], h: u64) -> f64 {
    let n = params.n;
    let hi = simulation_bound_from_exponents(&params.with_n(n + h), exponents);
    let lo = simulation_bound_from_exponents(&params.with_n(n.saturating_sub(h)), exponents);
    let span = (n + h - n.saturating_sub(h)) as f64;
    -(hi.log2_epsilon_bound - lo.log2_epsilon_bound) / span
}

/// Offsets `a_n = n^{-t}` applied to the rate constraints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModerateSchedule {
    pub t: f64,
    pub n_grid: Vec<u64>,
    /// Per-subset multipliers of `a_n`; `None` uses `√V(𝒩_{A→B_S})`, or 1
    /// where the dispersion vanishes.
    pub scales: Option<Vec<(Subset, f64)>>,
}

impl ModerateSchedule {
    pub fn new(t: f64, n_grid: Vec<u64>) -> Result<Self> {
        if !(t > 0.0 && t < 0.5) {
            return Err(Error::InvalidArgument(format!("t = {t} must lie in (0, 1/2)")));
        }
        if n_grid.is_empty() || n_grid.contains(&0) {
            return Err(Error::InvalidArgument("n grid must be nonempty and positive".into()));
        }
        Ok(ModerateSchedule {
            t,
            n_grid,
            scales: None,
        })
    }
}

/// One blocklength of the moderate-deviation table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModerateRow {
    pub n: u64,
    pub a_n: f64,
    pub rates: Vec<f64>,
    pub log2_bound: f64,
    /// `-log₂(bound) / (n a_n²)`.
    pub normalized_exponent: f64,
}

/// Per-subset constants of the schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModerateSubset {
    pub subset: Subset,
    pub threshold: f64,
    pub dispersion: f64,
    pub scale: f64,
    /// Rate offset coefficient with the proven constant, `2√V`.
    pub proven_rate_coefficient: f64,
    /// The expected optimal coefficient `√(2V)`.
    pub conjectured_rate_coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModerateReport {
    pub t: f64,
    pub subsets: Vec<ModerateSubset>,
    pub rows: Vec<ModerateRow>,
    /// Lower limit of the normalized exponent that is proven.
    pub proven_constant: f64,
    /// Whether the normalized exponent is nondecreasing along the grid.
    pub monotone: bool,
}

/// Rates meeting `r_S ≥ I_S + c_S a` for every `S`, built receiver by
/// receiver: `r_ℓ` is the least value satisfying every constraint whose
/// largest member is `ℓ`. At least one constraint is tight.
pub fn offset_rates(parties: usize, thresholds: &[(Subset, f64)], scales: &[(Subset, f64)], a: f64) -> Vec<f64> {
    let lookup = |v: &[(Subset, f64)], s: Subset| {
        v.iter().find(|(t, _)| *t == s).map(|(_, x)| *x).unwrap_or(0.0)
    };
    let mut rates = vec![0.0; parties];
    for l in 0..parties {
        let mut r: f64 = 0.0;
        for s in Subset::nonempty(l + 1).filter(|s| s.contains(l)) {
            let others: f64 = s.minus(Subset::singleton(l)).members().map(|k| rates[k]).sum();
            r = r.max(lookup(thresholds, s) + lookup(scales, s) * a - others);
        }
        rates[l] = r;
    }
    rates
}

/// Bounds along `r⃗_n` with each constraint offset by `scale_S · a_n`.
pub fn moderate_deviation_curve(
    ch: &QuantumChannel,
    schedule: &ModerateSchedule,
    opts: &InputOptions,
) -> Result<ModerateReport> {
    ModerateSchedule::new(schedule.t, schedule.n_grid.clone())?;
    let parties = ch.parties();
    let subsets: Vec<Subset> = Subset::nonempty(parties).collect();
    let constants = subsets
        .par_iter()
        .map(|&s| {
            let threshold = channel_mutual_information(ch, s, RenyiOrder::one(), opts)?.value;
            let dispersion = channel_dispersion(ch, s, opts)?.value;
            let scale = match &schedule.scales {
                Some(v) => v.iter().find(|(t, _)| *t == s).map(|(_, x)| *x).ok_or_else(|| {
                    Error::InvalidArgument(format!("no scale given for subset {s}"))
                })?,
                None if dispersion > 0.0 => dispersion.sqrt(),
                None => 1.0,
            };
            Ok(ModerateSubset {
                subset: s,
                threshold,
                dispersion,
                scale,
                proven_rate_coefficient: 2.0 * dispersion.sqrt(),
                conjectured_rate_coefficient: (2.0 * dispersion).sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let thresholds: Vec<(Subset, f64)> = constants.iter().map(|c| (c.subset, c.threshold)).collect();
    let scales: Vec<(Subset, f64)> = constants.iter().map(|c| (c.subset, c.scale)).collect();
    let dim_a = ch.input().total_dim();

    let rows = schedule
        .n_grid
        .par_iter()
        .map(|&n| {
            let a_n = (n as f64).powf(-schedule.t);
            let rates = offset_rates(parties, &thresholds, &scales, a_n);
            let rv = RateVector::new(rates.clone())?;
            let exps = subset_exponents(ch, &rv, opts)?;
            let params = BlocklengthParams::new(n, parties, dim_a, dim_a)?;
            let rep = simulation_bound_from_exponents(&params, &exps);
            Ok(ModerateRow {
                n,
                a_n,
                rates,
                log2_bound: rep.log2_epsilon_bound,
                normalized_exponent: -rep.log2_epsilon_bound / (n as f64 * a_n * a_n),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = rows
        .windows(2)
        .all(|w| w[1].normalized_exponent >= w[0].normalized_exponent);
    Ok(ModerateReport {
        t: schedule.t,
        subsets: constants,
        rows,
        proven_constant: 0.25,
        monotone,
    })
}
