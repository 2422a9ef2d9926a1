//! Quantum state splitting: error bound, rate thresholds, and an explicit
//! two-receiver protocol at tiny dimension.

use serde::Serialize;

use crate::convex_split::{copy_label, convex_split_error, SplitInstance};
use crate::error::{Error, Result};
use crate::operator::{tensor, DensityOperator, Ket, Operator, C64};
use crate::purification::{pure_state_vector, pure_trace_distance, symmetric_purification, uhlmann_isometry_kets};
use crate::renyi::{
    error_exponent_state, renyi_information, ExponentQuery, ExponentValue, MinimizerOptions,
    RenyiOrder,
};
use crate::space::{Space, Subset, Subsystems};
use crate::spectral;

/// A pure state on `A A'_1 … A'_L R`, the `A'`-marginals `τ_ℓ` of the shared
/// entanglement, and the rates `r_ℓ` in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct QssInstance {
    pub rho: Ket,
    pub prime_labels: Vec<String>,
    pub reference_labels: Vec<String>,
    pub taus: Vec<DensityOperator>,
    pub rates: Vec<f64>,
}

impl QssInstance {
    /// `rho_pure` must be rank one; `taus[ℓ]` lives on `prime_labels[ℓ]`.
    pub fn new(
        rho_pure: &DensityOperator,
        prime_labels: Vec<String>,
        reference_labels: Vec<String>,
        taus: Vec<DensityOperator>,
        rates: Vec<f64>,
    ) -> Result<Self> {
        let rho = pure_state_vector(rho_pure)?;
        if taus.len() != prime_labels.len() || rates.len() != prime_labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} split systems, {} references, {} rates",
                prime_labels.len(),
                taus.len(),
                rates.len()
            )));
        }
        for (tau, label) in taus.iter().zip(&prime_labels) {
            if tau.space().labels() != [label.clone()] {
                return Err(Error::SpaceMismatch(format!(
                    "reference on {} for `{label}`",
                    tau.space()
                )));
            }
            if rho.space().dim_of(label)? != tau.dim() {
                return Err(Error::SpaceMismatch(format!("factor `{label}`")));
            }
        }
        for l in &reference_labels {
            rho.space().position(l)?;
        }
        if let Some(r) = rates.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
            return Err(Error::InvalidArgument(format!("rate {r} must be finite and >= 0")));
        }
        Ok(QssInstance {
            rho,
            prime_labels,
            reference_labels,
            taus,
            rates,
        })
    }

    pub fn parties(&self) -> usize {
        self.prime_labels.len()
    }

    pub fn rate_of(&self, s: Subset) -> f64 {
        s.members().map(|l| self.rates[l]).sum()
    }

    fn reference(&self) -> Subsystems {
        Subsystems::new(self.reference_labels.clone()).expect("distinct labels")
    }

    /// `ρ_{A'_S R}` and `τ_{A'_S}`.
    fn restricted(&self, s: Subset) -> Result<(DensityOperator, Operator)> {
        let labels = s
            .members()
            .map(|l| self.prime_labels[l].clone())
            .chain(self.reference_labels.iter().cloned());
        let rho_s = self.rho.projector()?.marginal(&Subsystems::new(labels)?)?;
        let taus: Vec<&Operator> = s.members().map(|l| self.taus[l].as_operator()).collect();
        Ok((rho_s, tensor(&taus)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QssBoundReport {
    pub epsilon_bound: f64,
    pub per_subset_exponents: Vec<(Subset, ExponentValue)>,
    pub all_positive: bool,
}

/// `ε = sqrt(Σ_{S≠∅} 2^{|S|} 2^{−E_{r_S}(ρ_{A'_S R} ‖ τ_{A'_S})})`.
pub fn qss_error_bound(inst: &QssInstance, opts: &MinimizerOptions) -> Result<QssBoundReport> {
    let reference = inst.reference();
    let per_subset_exponents = Subset::nonempty(inst.parties())
        .map(|s| {
            let (rho_s, tau) = inst.restricted(s)?;
            let q = ExponentQuery::new(inst.rate_of(s))?;
            Ok((s, error_exponent_state(&rho_s, &tau, &reference, q, opts)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let radicand: f64 = per_subset_exponents
        .iter()
        .map(|(s, e)| 2f64.powi(s.len() as i32) * 2f64.powf(-e.value))
        .sum();
    Ok(QssBoundReport {
        epsilon_bound: radicand.sqrt(),
        all_positive: per_subset_exponents.iter().all(|(_, e)| e.value > 0.0),
        per_subset_exponents,
    })
}

/// The two-receiver expression `sqrt(2·2^{−E_{12}} + 2^{−E_1} + 2^{−E_2})`.
/// The general bound at two receivers equals `√2` times this value.
pub fn two_party_qss_formula(e1: f64, e2: f64, e12: f64) -> f64 {
    (2.0 * 2f64.powf(-e12) + 2f64.powf(-e1) + 2f64.powf(-e2)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCheck {
    pub subset: Subset,
    pub rate: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

/// `r_S > I(ρ_{A'_S R} ‖ τ_{A'_S})` for every nonempty `S`.
pub fn qss_rate_region_check(inst: &QssInstance) -> Result<Vec<RateCheck>> {
    let reference = inst.reference();
    Subset::nonempty(inst.parties())
        .map(|s| {
            let (rho_s, tau) = inst.restricted(s)?;
            let threshold = renyi_information(
                &rho_s,
                &tau,
                &reference,
                RenyiOrder::one(),
                &MinimizerOptions::fast(),
            )?
            .objective;
            let rate = inst.rate_of(s);
            Ok(RateCheck {
                subset: s,
                rate,
                threshold,
                satisfied: rate > threshold,
            })
        })
        .collect()
}

/// Outcome of the explicit two-receiver protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QssDemoReport {
    pub copies: (usize, usize),
    /// Trace distance between the receivers' and reference's marginals of
    /// the initial and target states.
    pub epsilon_prime: f64,
    /// The same quantity from the convex-split evaluator.
    pub convex_split_error: f64,
    /// `½‖V(ω̄) − ω‖₁` after the Uhlmann isometry on the sender's registers.
    pub achieved_error: f64,
    /// `sqrt(2ε′)`.
    pub guarantee: f64,
    pub within_guarantee: bool,
}

fn bob_label(l: usize, k: usize) -> String {
    format!("B{}_{}", l + 1, k + 1)
}

/// Builds `|ω̄⟩` and `|ω⟩` for `L = 2`, `M = 2^{r_1}`, `K = 2^{r_2}` and
/// applies the Uhlmann isometry acting on the sender's registers.
///
/// Registers: the sender holds `A`, `A'_1`, `A'_2` and the copies `A'_{ℓ,k}`
/// (labels `A'_ℓ_k`) before, and the index registers `Midx`, `Kidx`, `A` and
/// the copies after. Receiver `ℓ` holds `Bℓ_k`. Each pair
/// `A'_{ℓ,k} Bℓ_k` starts in the symmetric purification of `τ_ℓ`.
pub fn simulate_bipartite_qss_small(inst: &QssInstance, dim_cap: usize) -> Result<QssDemoReport> {
    if inst.parties() != 2 {
        return Err(Error::InvalidArgument(format!(
            "explicit protocol needs 2 receivers, got {}",
            inst.parties()
        )));
    }
    let mut counts = [0usize; 2];
    for (c, &r) in counts.iter_mut().zip(&inst.rates) {
        if r.fract() != 0.0 || r > 16.0 {
            return Err(Error::InvalidArgument(format!("rate {r} must be a small integer")));
        }
        *c = 1usize << (r as u32);
    }
    let space = inst.rho.space();
    let primes: Vec<&str> = inst.prime_labels.iter().map(String::as_str).collect();
    let dims = [space.dim_of(primes[0])?, space.dim_of(primes[1])?];
    let sender_extra: Vec<String> = space
        .labels()
        .iter()
        .filter(|l| !inst.prime_labels.contains(l) && !inst.reference_labels.contains(l))
        .cloned()
        .collect();
    let rest_dim: usize = space.total_dim() / (dims[0] * dims[1]);
    let total = rest_dim
        .checked_mul(dims[0].pow(1 + 2 * counts[0] as u32))
        .and_then(|x| x.checked_mul(dims[1].pow(1 + 2 * counts[1] as u32)))
        .unwrap_or(usize::MAX);
    if total > dim_cap {
        return Err(Error::DimensionCapExceeded { dim: total, cap: dim_cap });
    }

    // Entanglement pairs |τ_ℓ⟩ on (A'_ℓ_k, Bℓ_k).
    let pair = |l: usize, k: usize| -> Result<Ket> {
        let a = copy_label(primes[l], k);
        let tau = inst.taus[l].relabel(&[(primes[l], a.as_str())])?;
        symmetric_purification(&tau, &[bob_label(l, k).as_str()])
    };

    let copy_labels = |l: usize| -> Vec<String> { (0..counts[l]).map(|k| copy_label(primes[l], k)).collect() };
    let bob_labels = |l: usize| -> Vec<String> { (0..counts[l]).map(|k| bob_label(l, k)).collect() };
    let mut shared_order: Vec<String> = bob_labels(0);
    shared_order.extend(bob_labels(1));
    shared_order.extend(inst.reference_labels.iter().cloned());

    // Initial state: sender input registers, then shared registers.
    let mut initial = inst.rho.clone();
    for l in 0..2 {
        for k in 0..counts[l] {
            initial = initial.tensor(&pair(l, k)?)?;
        }
    }
    let mut input_order: Vec<String> = sender_extra.clone();
    input_order.extend(primes.iter().map(|s| s.to_string()));
    input_order.extend(copy_labels(0));
    input_order.extend(copy_labels(1));
    let mut order = input_order.clone();
    order.extend(shared_order.iter().cloned());
    let initial = initial.reordered(&order)?;

    // Target state.
    let idx_space = Space::new([("Midx", counts[0]), ("Kidx", counts[1])])?;
    let mut output_order: Vec<String> = vec!["Midx".into(), "Kidx".into()];
    output_order.extend(sender_extra.iter().cloned());
    output_order.extend(copy_labels(0));
    output_order.extend(copy_labels(1));
    let mut target_order = output_order.clone();
    target_order.extend(shared_order.iter().cloned());

    let norm = C64::new(1.0 / ((counts[0] * counts[1]) as f64).sqrt(), 0.0);
    let mut target: Option<Ket> = None;
    for m in 0..counts[0] {
        for k in 0..counts[1] {
            let idx = Ket::basis(idx_space.clone(), m * counts[1] + k)?;
            let b1 = bob_label(0, m);
            let b2 = bob_label(1, k);
            let moved = inst.rho.relabel(&[(primes[0], b1.as_str()), (primes[1], b2.as_str())])?;
            let zeros = Ket::basis(
                Space::new([(copy_label(primes[0], m), dims[0]), (copy_label(primes[1], k), dims[1])])?,
                0,
            )?;
            let mut term = idx.tensor(&moved)?.tensor(&zeros)?;
            for mm in (0..counts[0]).filter(|&x| x != m) {
                term = term.tensor(&pair(0, mm)?)?;
            }
            for kk in (0..counts[1]).filter(|&x| x != k) {
                term = term.tensor(&pair(1, kk)?)?;
            }
            let term = term.reordered(&target_order)?;
            match target.as_mut() {
                None => target = Some(Ket::new(term.space().clone(), term.vector() * norm)?),
                Some(t) => t.axpy(norm, &term)?,
            }
        }
    }
    let target = target.expect("at least one term");

    // ε′ on the shared registers.
    let shared = Subsystems::new(shared_order.clone())?;
    let omega_bar_shared = initial.projector()?.marginal(&shared)?;
    let omega_shared = target.projector()?.marginal(&shared)?;
    let epsilon_prime = spectral::trace_distance(&omega_bar_shared, &omega_shared)?;

    // The convex-split evaluator on the receivers' view of the same data.
    let mut labels: Vec<String> = inst.prime_labels.clone();
    labels.extend(inst.reference_labels.iter().cloned());
    let rho_split = inst.rho.projector()?.marginal(&Subsystems::new(labels)?)?;
    let split = SplitInstance::new(rho_split, inst.taus.clone(), counts.to_vec())?.with_dim_cap(dim_cap);
    let cs_error = convex_split_error(&split)?;

    // Fresh names for the sender's input registers so that the isometry
    // acts on all of them, not only on those absent from the target.
    let renamed: Vec<(String, String)> = input_order.iter().map(|l| (l.clone(), format!("{l}~in"))).collect();
    let pairs: Vec<(&str, &str)> = renamed.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let sent = initial.relabel(&pairs)?;
    let v = uhlmann_isometry_kets(&sent, &target)?;
    let moved = v.apply_ket(&sent)?.permuted(target.space())?;
    let achieved_error = pure_trace_distance(&moved, &target)?;
    let guarantee = (2.0 * epsilon_prime).sqrt();
    Ok(QssDemoReport {
        copies: (counts[0], counts[1]),
        epsilon_prime,
        convex_split_error: cs_error,
        achieved_error,
        guarantee,
        within_guarantee: achieved_error <= guarantee + 1e-6,
    })
}
