//! Divergences, Rényi informations and error-exponent functions of states.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{tensor, DensityOperator, Mat, Operator, C64};
use crate::random::{random_full_rank, rng_for};
use crate::space::Subsystems;
use crate::spectral::{self, Eigh, SUPPORT_TOL};

/// Weight of `ρ` outside `supp σ` above which `supp ρ ⊄ supp σ`.
pub const SUPPORT_LEAK_TOL: f64 = 1e-9;

/// A Rényi order `α > 0`, or the `α → 1` limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenyiOrder {
    pub alpha: f64,
    pub limit_one: bool,
}

impl RenyiOrder {
    /// `α = 1` maps to the limit branch.
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidOrder(alpha));
        }
        Ok(RenyiOrder {
            alpha,
            limit_one: alpha == 1.0,
        })
    }

    pub fn one() -> Self {
        RenyiOrder {
            alpha: 1.0,
            limit_one: true,
        }
    }

    pub fn value(&self) -> f64 {
        if self.limit_one {
            1.0
        } else {
            self.alpha
        }
    }
}

fn same_space(a: &Operator, b: &Operator) -> Result<()> {
    if a.space() != b.space() {
        return Err(Error::SpaceMismatch(format!("{} vs {}", a.space(), b.space())));
    }
    Ok(())
}

fn psd_eigh(x: &Operator) -> Result<Eigh> {
    let herm = x.hermiticity_error();
    if herm > crate::operator::HERMITIAN_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let e = spectral::eigh(x.matrix());
    if e.min() < -spectral::NEGATIVE_CLIP {
        return Err(Error::NotPsd(e.min()));
    }
    Ok(e)
}

/// `Tr[ρ (1 - P_σ)]`.
fn leak(rho: &Mat, sigma_support: &Mat) -> f64 {
    let d = rho.nrows();
    ((Mat::identity(d, d) - sigma_support) * rho).trace().re.abs()
}

fn pow_on_support(e: &Eigh, t: f64) -> Mat {
    e.apply(|l| if l > SUPPORT_TOL { l.powf(t) } else { 0.0 })
}

/// `Tr[(σ^γ ρ σ^γ)^α]` with `γ = (1-α)/2α`, given the eigensystem of `σ`.
fn sandwiched_trace(rho: &Mat, sigma: &Eigh, alpha: f64) -> f64 {
    let g = pow_on_support(sigma, (1.0 - alpha) / (2.0 * alpha));
    let inner = &g * rho * &g;
    spectral::eigvalsh(&inner)
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| l.powf(alpha))
        .sum()
}

/// Sandwiched Rényi divergence in bits; `+∞` when `supp ρ ⊄ supp σ`
/// (for `α ≥ 1`) or when the sandwiched trace vanishes.
pub fn sandwiched_divergence(
    rho: &DensityOperator,
    sigma: &Operator,
    order: RenyiOrder,
) -> Result<f64> {
    if order.limit_one {
        return umegaki_divergence(rho, sigma);
    }
    same_space(rho, sigma)?;
    let alpha = order.alpha;
    let e = psd_eigh(sigma)?;
    if alpha > 1.0 && leak(rho.matrix(), &e.support()) > SUPPORT_LEAK_TOL {
        return Ok(f64::INFINITY);
    }
    let q = sandwiched_trace(rho.matrix(), &e, alpha);
    if q <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(q.log2() / (alpha - 1.0))
}

/// Umegaki relative entropy `Tr ρ(log ρ - log σ)` in bits.
pub fn umegaki_divergence(rho: &DensityOperator, sigma: &Operator) -> Result<f64> {
    same_space(rho, sigma)?;
    let e = psd_eigh(sigma)?;
    if leak(rho.matrix(), &e.support()) > SUPPORT_LEAK_TOL {
        return Ok(f64::INFINITY);
    }
    let log_sigma = e.apply(|l| if l > SUPPORT_TOL { l.log2() } else { 0.0 });
    let cross = (rho.matrix() * log_sigma).trace().re;
    Ok(-spectral::entropy(rho) - cross)
}

/// Relative entropy variance `Tr ρ(log ρ - log σ)² - D(ρ‖σ)²` in bits².
pub fn relative_entropy_variance(rho: &DensityOperator, sigma: &Operator) -> Result<f64> {
    same_space(rho, sigma)?;
    let e = psd_eigh(sigma)?;
    let l = leak(rho.matrix(), &e.support());
    if l > SUPPORT_LEAK_TOL {
        return Err(Error::SupportViolation(format!(
            "state has weight {l:.3e} outside the support of the reference"
        )));
    }
    let log_sigma = e.apply(|l| if l > SUPPORT_TOL { l.log2() } else { 0.0 });
    let diff = spectral::psd_log2(rho.matrix()) - log_sigma;
    let first = (rho.matrix() * &diff).trace().re;
    let second = (rho.matrix() * &diff * &diff).trace().re;
    Ok((second - first * first).max(0.0))
}

/// Petz Rényi divergence `log Tr[ρ^α σ^{1-α}] / (α - 1)` in bits.
pub fn petz_divergence(rho: &DensityOperator, sigma: &Operator, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::InvalidOrder(alpha));
    }
    same_space(rho, sigma)?;
    let e = psd_eigh(sigma)?;
    if alpha > 1.0 && leak(rho.matrix(), &e.support()) > SUPPORT_LEAK_TOL {
        return Ok(f64::INFINITY);
    }
    let a = spectral::psd_power(rho.matrix(), alpha);
    let b = pow_on_support(&e, 1.0 - alpha);
    let q = (a * b).trace().re;
    if q <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(q.log2() / (alpha - 1.0))
}

/// Controls for the inner minimization over `σ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizerOptions {
    /// Stop once successive objectives differ by less than this (bits).
    pub tol: f64,
    pub max_iter: usize,
    /// Weight of the new iterate; `None` picks `min(0.5, 1/α)`.
    pub damping: Option<f64>,
    /// Random probes used for the certificate; 0 skips it.
    pub probes: usize,
    pub seed: u64,
}

impl Default for MinimizerOptions {
    fn default() -> Self {
        MinimizerOptions {
            tol: 1e-9,
            max_iter: 500,
            damping: None,
            probes: 200,
            seed: 0,
        }
    }
}

impl MinimizerOptions {
    /// Defaults without the certificate probe, for inner loops.
    pub fn fast() -> Self {
        MinimizerOptions {
            probes: 0,
            ..MinimizerOptions::default()
        }
    }
}

/// Result of a Rényi-information minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizerReport {
    pub sigma_star: DensityOperator,
    /// Minimal divergence in bits.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best probed objective minus `objective`; `None` without probes.
    /// Negative values beyond rounding would mean the iteration missed the
    /// minimum.
    pub certificate_gap: Option<f64>,
}

/// `min_σ D_α(ρ ‖ τ ⊗ σ)` over states `σ` on `minimized`.
///
/// The factors of `tau` and `minimized` must together be exactly the
/// factors of `rho` (any order). For `α > 1` the minimizer is found by the
/// damped fixed-point iteration
/// `σ ← (1-θ)σ + θ·normalize(Tr_τ[(Y^γ ρ Y^γ)^α])` with `Y = τ ⊗ σ`,
/// started at the marginal `ρ_σ`. At `α = 1` the minimizer is `ρ_σ`.
pub fn renyi_information(
    rho: &DensityOperator,
    tau: &Operator,
    minimized: &Subsystems,
    order: RenyiOrder,
    opts: &MinimizerOptions,
) -> Result<MinimizerReport> {
    let space = rho.space();
    let mut covered = 0;
    for l in minimized.iter() {
        if tau.space().contains(l) {
            return Err(Error::LabelCollision(l.to_string()));
        }
        space.position(l)?;
        covered += 1;
    }
    for (l, d) in tau.space().factors() {
        if space.dim_of(l)? != d {
            return Err(Error::SpaceMismatch(format!("factor `{l}` of {}", tau.space())));
        }
        covered += 1;
    }
    if covered != space.len() {
        return Err(Error::SpaceMismatch(format!(
            "reference {} and minimized {:?} do not cover {space}",
            tau.space(),
            minimized.as_slice()
        )));
    }
    let tau_eigh = psd_eigh(tau)?;
    let rho_e = rho.marginal(minimized)?;
    let weight = |sigma: &Operator| -> Result<Operator> {
        tensor(&[tau, sigma])?.permuted(space)
    };

    if minimized.is_empty() || order.limit_one {
        let y = weight(&rho_e)?;
        let objective = sandwiched_divergence(rho, &y, order)?;
        return Ok(MinimizerReport {
            sigma_star: rho_e,
            objective,
            iterations: 0,
            converged: true,
            certificate_gap: None,
        });
    }

    let alpha = order.alpha;
    // Support test against τ ⊗ 1.
    let tau_support = Operator::new(tau.space().clone(), tau_eigh.support())?;
    let p = tau_support.extend_to(space)?;
    if alpha > 1.0 && leak(rho.matrix(), p.matrix()) > SUPPORT_LEAK_TOL {
        return Ok(MinimizerReport {
            sigma_star: rho_e,
            objective: f64::INFINITY,
            iterations: 0,
            converged: true,
            certificate_gap: None,
        });
    }

    let gamma = (1.0 - alpha) / (2.0 * alpha);
    let tau_g = Operator::new(tau.space().clone(), pow_on_support(&tau_eigh, gamma))?;
    let theta = opts.damping.unwrap_or_else(|| (1.0 / alpha).min(0.5));

    // Returns (Tr M^α, Tr_τ M^α) with M = Y^γ ρ Y^γ.
    let step = |sigma: &Mat| -> Result<(f64, Mat)> {
        let sg = Operator::new(rho_e.space().clone(), spectral::psd_power(sigma, gamma))?;
        let yg = tensor(&[&tau_g, &sg])?.permuted(space)?;
        let m = yg.matrix() * rho.matrix() * yg.matrix();
        let e = spectral::eigh(&m);
        let q: f64 = e.values.iter().filter(|&&l| l > 0.0).map(|l| l.powf(alpha)).sum();
        let ma = e.apply(|l| if l > 0.0 { l.powf(alpha) } else { 0.0 });
        let reduced = Operator::new(space.clone(), ma)?.partial_trace(minimized)?;
        Ok((q, reduced.into_matrix()))
    };
    let to_bits = |q: f64| {
        if q > 0.0 {
            q.log2() / (alpha - 1.0)
        } else {
            f64::INFINITY
        }
    };

    let mut sigma = rho_e.matrix().clone();
    let (mut q, mut t) = step(&sigma)?;
    let mut objective = to_bits(q);
    let mut best = (objective, sigma.clone());
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let tr = t.trace().re;
        if !(tr > 0.0) {
            break;
        }
        let target = &t / C64::new(tr, 0.0);
        sigma = spectral::hermitize(&(&sigma * C64::new(1.0 - theta, 0.0) + target * C64::new(theta, 0.0)));
        sigma /= sigma.trace();
        (q, t) = step(&sigma)?;
        let next = to_bits(q);
        if next < best.0 {
            best = (next, sigma.clone());
        }
        let change = (next - objective).abs();
        objective = next;
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    let (objective, sigma) = best;
    let sigma_star = DensityOperator::from_matrix(rho_e.space().clone(), sigma)?;

    let certificate_gap = if opts.probes > 0 {
        let mut rng = rng_for(opts.seed, 0);
        let mut best_probe = f64::INFINITY;
        for k in 0..opts.probes {
            let r = random_full_rank(rho_e.space().clone(), &mut rng);
            // Half of the probes are local perturbations of the minimizer.
            let probe = if k % 2 == 0 {
                r
            } else {
                let eps = 10f64.powi(-((k % 8) as i32) - 1);
                DensityOperator::mixture(&[1.0 - eps, eps], &[&sigma_star, &r])?
            };
            let v = sandwiched_divergence(rho, &weight(&probe)?, order)?;
            best_probe = best_probe.min(v);
        }
        Some(best_probe - objective)
    } else {
        None
    };

    Ok(MinimizerReport {
        sigma_star,
        objective,
        iterations,
        converged,
        certificate_gap,
    })
}

/// `I_α(A₁:…:A_L:E)` with `τ = ⊗ ρ_{A_ℓ}` and `E` the factors in no part.
pub fn multipartite_mutual_information(
    rho: &DensityOperator,
    parts: &[Subsystems],
    order: RenyiOrder,
    opts: &MinimizerOptions,
) -> Result<MinimizerReport> {
    let tau = product_of_marginals(rho, parts)?;
    let mut all = Subsystems::empty();
    for p in parts {
        all = all.union(p);
    }
    let residual = rho.space().complement(&all);
    renyi_information(rho, &tau, &residual, order, opts)
}

/// `⊗_ℓ ρ_{A_ℓ}` in the order of `parts`.
pub fn product_of_marginals(rho: &DensityOperator, parts: &[Subsystems]) -> Result<Operator> {
    let marginals = parts
        .iter()
        .map(|p| rho.marginal(p).map(DensityOperator::into_operator))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Operator> = marginals.iter().collect();
    tensor(&refs)
}

/// A rate and the tolerance of the α-search over `[1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentQuery {
    pub rate: f64,
    pub search_tol: f64,
}

impl ExponentQuery {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidArgument(format!("rate {rate} must be finite and >= 0")));
        }
        Ok(ExponentQuery {
            rate,
            search_tol: 1e-6,
        })
    }
}

/// `E_r` and the maximizing order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentValue {
    pub value: f64,
    pub alpha_star: f64,
}

/// `sup_{α∈[1,2]} ((α-1)/α)(r - I_α)` for a supplied `α ↦ I_α`, concave in
/// the objective. `info(1.0)` must return the `α → 1` value.
pub fn maximize_exponent(
    query: ExponentQuery,
    mut info: impl FnMut(f64) -> Result<f64>,
) -> Result<ExponentValue> {
    ExponentQuery::new(query.rate)?;
    let r = query.rate;
    let i1 = info(1.0)?;
    if r <= i1 {
        return Ok(ExponentValue {
            value: 0.0,
            alpha_star: 1.0,
        });
    }
    let mut g = |a: f64| -> Result<f64> { Ok((a - 1.0) / a * (r - info(a)?)) };
    let end = g(2.0)?;
    let (x, fx) = golden_section_max(1.0, 2.0, query.search_tol, &mut g)?;
    let (mut value, mut alpha_star) = if end >= fx { (end, 2.0) } else { (fx, x) };
    if value <= 0.0 {
        value = 0.0;
        alpha_star = 1.0;
    }
    Ok(ExponentValue { value, alpha_star })
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
pub fn golden_section_max(
    mut a: f64,
    mut b: f64,
    tol: f64,
    f: &mut impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// `E_r(ρ‖τ)` with the inner minimization over `minimized`.
pub fn error_exponent_state(
    rho: &DensityOperator,
    tau: &Operator,
    minimized: &Subsystems,
    query: ExponentQuery,
    opts: &MinimizerOptions,
) -> Result<ExponentValue> {
    let inner = MinimizerOptions {
        probes: 0,
        ..opts.clone()
    };
    maximize_exponent(query, |a| {
        Ok(renyi_information(rho, tau, minimized, RenyiOrder::new(a)?, &inner)?.objective)
    })
}
