//! Broadcast channels `A → B₁…B_L` in Kraus form, their Rényi
//! informations, error exponents, dispersion and capacity region.

use std::sync::atomic::{AtomicUsize, Ordering};

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{DensityOperator, Mat, C64};
use crate::purification::{purify_ket, Isometry};
use crate::random::{ginibre, rng_for};
use crate::renyi::{
    maximize_exponent, multipartite_mutual_information, product_of_marginals,
    relative_entropy_variance, ExponentQuery, MinimizerOptions, RenyiOrder,
};
use crate::space::{permutation_map, Space, Subset, Subsystems};
use crate::spectral::{self, SUPPORT_TOL};

/// Allowed deviation of `Σ K†K` from the identity.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Label of the purifying reference used by [`QuantumChannel::output_state`].
pub const REFERENCE_LABEL: &str = "R";

/// Inputs whose information is this close to the optimum count as
/// capacity achieving for the dispersion.
pub const CAPACITY_TOL: f64 = 1e-5;

/// A CPTP map from `input` to `output = B₁ ⊗ … ⊗ B_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    input: Space,
    output: Space,
    kraus: Vec<Mat>,
}

/// Max-abs entry of `Σ K†K - 1`.
pub fn completeness_error(kraus: &[Mat], d_in: usize) -> f64 {
    let mut sum = Mat::zeros(d_in, d_in);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    (sum - Mat::identity(d_in, d_in)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn receiver_labels(parties: usize) -> Vec<String> {
    (1..=parties).map(|l| format!("B{l}")).collect()
}

impl QuantumChannel {
    pub fn new(input: Space, output: Space, kraus: Vec<Mat>) -> Result<Self> {
        let (d_in, d_out) = (input.total_dim(), output.total_dim());
        if kraus.is_empty() {
            return Err(Error::ShapeMismatch("no Kraus operators".into()));
        }
        for (i, k) in kraus.iter().enumerate() {
            if k.shape() != (d_out, d_in) {
                return Err(Error::ShapeMismatch(format!(
                    "Kraus operator {i} is {}x{}, expected {d_out}x{d_in}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        for l in output.labels() {
            if input.contains(l) {
                return Err(Error::LabelCollision(l.clone()));
            }
        }
        let err = completeness_error(&kraus, d_in);
        if err > COMPLETENESS_TOL {
            return Err(Error::NotTracePreserving(err));
        }
        Ok(QuantumChannel {
            input,
            output,
            kraus,
        })
    }

    /// Input `A` of dimension `d_in`, outputs `B1, …, BL`.
    pub fn from_kraus(d_in: usize, out_dims: &[usize], kraus: Vec<Mat>) -> Result<Self> {
        let output = Space::new(receiver_labels(out_dims.len()).into_iter().zip(out_dims.iter().copied()))?;
        QuantumChannel::new(Space::single("A", d_in)?, output, kraus)
    }

    pub fn input(&self) -> &Space {
        &self.input
    }

    pub fn output(&self) -> &Space {
        &self.output
    }

    pub fn kraus(&self) -> &[Mat] {
        &self.kraus
    }

    /// Number of receivers `L`.
    pub fn parties(&self) -> usize {
        self.output.len()
    }

    /// Output labels `B_ℓ`, `ℓ ∈ s`.
    pub fn receivers(&self, s: Subset) -> Result<Subsystems> {
        if s.is_empty() {
            return Err(Error::EmptySubset);
        }
        let labels = self.output.labels();
        if s.members().any(|l| l >= labels.len()) {
            return Err(Error::InvalidArgument(format!(
                "subset {s} names a receiver beyond {}",
                labels.len()
            )));
        }
        Subsystems::new(s.members().map(|l| labels[l].clone()))
    }

    /// `Σ (K ⊗ 1) ρ (K ⊗ 1)†`. Factors of `rho` outside the input pass
    /// through; the result lists the outputs first, then those spectators
    /// in their original order.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let space = rho.space();
        for (l, d) in self.input.factors() {
            if space.dim_of(l)? != d {
                return Err(Error::ShapeMismatch(format!("input factor `{l}` differs in {space}")));
            }
        }
        let rest = space.select(&space.complement(&self.input.subsystems()))?;
        let ordered = rho.permuted(&self.input.concat(&rest)?)?;
        let out_space = self.output.concat(&rest)?;
        let id = Mat::identity(rest.total_dim(), rest.total_dim());
        let mut out = Mat::zeros(out_space.total_dim(), out_space.total_dim());
        for k in &self.kraus {
            let big = k.kronecker(&id);
            out += &big * ordered.matrix() * big.adjoint();
        }
        DensityOperator::from_matrix(out_space, spectral::hermitize(&out))
    }

    /// `(𝒩 ⊗ id_R)(ψ_AR)` for the purification of `rho_in` onto `R`.
    pub fn output_state(&self, rho_in: &DensityOperator) -> Result<DensityOperator> {
        if rho_in.space() != &self.input {
            return Err(Error::SpaceMismatch(format!(
                "input state on {} for channel input {}",
                rho_in.space(),
                self.input
            )));
        }
        let psi = purify_ket(rho_in, REFERENCE_LABEL)?;
        let d_r = rho_in.dim();
        let d_out = self.output.total_dim();
        let out_space = self.output.concat(&Space::single(REFERENCE_LABEL, d_r)?)?;
        let v = psi.vector();
        let mut out = Mat::zeros(d_out * d_r, d_out * d_r);
        for k in &self.kraus {
            // (K ⊗ 1)|ψ⟩ with |ψ⟩ = Σ_{a,r} ψ_{ar} |a⟩|r⟩.
            let w = Mat::from_fn(d_out * d_r, 1, |row, _| {
                let (b, r) = (row / d_r, row % d_r);
                (0..self.input.total_dim()).map(|a| k[(b, a)] * v[a * d_r + r]).sum()
            });
            out += &w * w.adjoint();
        }
        DensityOperator::from_matrix(out_space, spectral::hermitize(&out))
    }

    /// Choi matrix `Σ_{ij} |i⟩⟨j| ⊗ 𝒩(|i⟩⟨j|)`, input index major.
    pub fn choi(&self) -> Mat {
        let (d_in, d_out) = (self.input.total_dim(), self.output.total_dim());
        let mut j = Mat::zeros(d_in * d_out, d_in * d_out);
        for k in &self.kraus {
            let v = Mat::from_fn(d_in * d_out, 1, |row, _| k[(row % d_out, row / d_out)]);
            j += &v * v.adjoint();
        }
        j
    }

    /// The channel followed by the partial trace over `B_ℓ`, `ℓ ∉ s`,
    /// with a minimal Kraus set read off the Choi matrix.
    pub fn marginal(&self, s: Subset) -> Result<QuantumChannel> {
        let keep = self.receivers(s)?;
        if keep.len() == self.output.len() {
            return Ok(self.clone());
        }
        let kept = self.output.select(&keep)?;
        let traced = self.output.select(&self.output.complement(&keep))?;
        let map = permutation_map(&self.output, &kept.concat(&traced)?)?;
        let (d_in, d_s, d_t) = (self.input.total_dim(), kept.total_dim(), traced.total_dim());
        let mut choi = Mat::zeros(d_in * d_s, d_in * d_s);
        for k in &self.kraus {
            for t in 0..d_t {
                let v = Mat::from_fn(d_in * d_s, 1, |row, _| {
                    let (i, b) = (row / d_s, row % d_s);
                    k[(map[b * d_t + t], i)]
                });
                choi += &v * v.adjoint();
            }
        }
        let e = spectral::eigh(&spectral::hermitize(&choi));
        let mut kraus = Vec::new();
        for (idx, &l) in e.values.iter().enumerate() {
            if l <= SUPPORT_TOL {
                continue;
            }
            let s = C64::new(l.sqrt(), 0.0);
            kraus.push(Mat::from_fn(d_s, d_in, |b, i| e.vectors[(i * d_s + b, idx)] * s));
        }
        QuantumChannel::new(self.input.clone(), kept, kraus)
    }

    /// `U = Σ_k K_k ⊗ |k⟩_E` from the input to `outputs ⊗ E`.
    pub fn stinespring(&self, env_label: &str) -> Result<Isometry> {
        let nk = self.kraus.len();
        let output = self.output.concat(&Space::single(env_label, nk)?)?;
        let (d_in, d_out) = (self.input.total_dim(), self.output.total_dim());
        let u = Mat::from_fn(d_out * nk, d_in, |row, i| self.kraus[row % nk][(row / nk, i)]);
        Isometry::new(self.input.clone(), output, u)
    }
}

/// [`QuantumChannel::apply`] as a free function.
pub fn apply_channel(ch: &QuantumChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    ch.apply(rho)
}

/// [`QuantumChannel::marginal`] as a free function.
pub fn marginal_channel(ch: &QuantumChannel, s: Subset) -> Result<QuantumChannel> {
    ch.marginal(s)
}

/// [`QuantumChannel::stinespring`] with environment label `E`.
pub fn stinespring_dilation(ch: &QuantumChannel) -> Result<Isometry> {
    ch.stinespring("E")
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn pauli() -> [Mat; 4] {
    let i = C64::new(0.0, 1.0);
    [
        Mat::identity(2, 2),
        Mat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        Mat::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]),
        Mat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
    ]
}

fn check_prob(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("noise parameter {p} outside [0, 1]")));
    }
    Ok(())
}

/// Ready-made channels.
pub mod presets {
    use super::*;

    pub fn identity(d: usize) -> Result<QuantumChannel> {
        QuantumChannel::from_kraus(d, &[d], vec![Mat::identity(d, d)])
    }

    /// `ρ ↦ σ` for a fixed `σ` on `out_dims`.
    pub fn constant(d_in: usize, sigma: &DensityOperator) -> Result<QuantumChannel> {
        let out_dims = sigma.space().dims().to_vec();
        let e = spectral::eigh(sigma.matrix());
        let d_out = sigma.dim();
        let mut kraus = Vec::new();
        for (idx, &l) in e.values.iter().enumerate() {
            if l <= SUPPORT_TOL {
                continue;
            }
            for j in 0..d_in {
                kraus.push(Mat::from_fn(d_out, d_in, |b, a| {
                    if a == j {
                        e.vectors[(b, idx)] * l.sqrt()
                    } else {
                        c(0.0)
                    }
                }));
            }
        }
        QuantumChannel::from_kraus(d_in, &out_dims, kraus)
    }

    /// `ρ ↦ (1-p)ρ + p·1/2` on a qubit.
    pub fn depolarizing(p: f64) -> Result<QuantumChannel> {
        check_prob(p)?;
        let [i, x, y, z] = pauli();
        let a = (1.0 - 0.75 * p).sqrt();
        let b = (p / 4.0).sqrt();
        QuantumChannel::from_kraus(2, &[2], vec![i * c(a), x * c(b), y * c(b), z * c(b)])
    }

    /// `ρ ↦ (1-p)ρ + p·diag(ρ)` on a qubit.
    pub fn dephasing(p: f64) -> Result<QuantumChannel> {
        check_prob(p)?;
        let [i, _, _, z] = pauli();
        QuantumChannel::from_kraus(
            2,
            &[2],
            vec![i * c((1.0 - p / 2.0).sqrt()), z * c((p / 2.0).sqrt())],
        )
    }

    /// `ρ ↦ 𝒩₁(ρ) ⊗ σ` with `σ` on one extra receiver.
    pub fn product_broadcast(first: &QuantumChannel, sigma: &DensityOperator) -> Result<QuantumChannel> {
        if first.parties() != 1 || sigma.space().len() != 1 {
            return Err(Error::ShapeMismatch(
                "product broadcast takes a one-receiver channel and a one-factor state".into(),
            ));
        }
        let e = spectral::eigh(sigma.matrix());
        let mut kraus = Vec::new();
        for k in first.kraus() {
            for (idx, &l) in e.values.iter().enumerate() {
                if l > SUPPORT_TOL {
                    let col = e.vectors.column(idx).into_owned() * c(l.sqrt());
                    kraus.push(k.kronecker(&col));
                }
            }
        }
        let d1 = first.output().total_dim();
        QuantumChannel::from_kraus(first.input().total_dim(), &[d1, sigma.dim()], kraus)
    }

    /// The dephasing channel of [`dephasing`] on `B1` together with its
    /// complementary output on `B2`: `|i⟩ ↦ |i⟩|φ_i⟩` with
    /// `|φ_i⟩ = cos θ|0⟩ + (-1)^i sin θ|1⟩` and `cos 2θ = 1 - p`.
    /// At `p = 1` this is the copy channel.
    pub fn complementary_dephasing(p: f64) -> Result<QuantumChannel> {
        check_prob(p)?;
        let theta = 0.5 * (1.0 - p).acos();
        let (co, si) = (theta.cos(), theta.sin());
        let phi = [[co, si], [co, -si]];
        let u = Mat::from_fn(4, 2, |row, i| {
            if row / 2 == i {
                c(phi[i][row % 2])
            } else {
                c(0.0)
            }
        });
        QuantumChannel::from_kraus(2, &[2, 2], vec![u])
    }

    /// `|i⟩ ↦ |i⟩|i⟩` on a `d`-level input.
    pub fn copy(d: usize) -> Result<QuantumChannel> {
        let u = Mat::from_fn(d * d, d, |row, i| if row == i * d + i { c(1.0) } else { c(0.0) });
        QuantumChannel::from_kraus(d, &[d, d], vec![u])
    }

    /// A random channel from a random isometry into `outputs ⊗ C^{n_kraus}`.
    pub fn random<R: Rng + ?Sized>(
        d_in: usize,
        out_dims: &[usize],
        n_kraus: usize,
        rng: &mut R,
    ) -> Result<QuantumChannel> {
        let d_out: usize = out_dims.iter().product();
        let v = crate::random::random_isometry(d_in, d_out * n_kraus, rng);
        let kraus = (0..n_kraus)
            .map(|k| Mat::from_fn(d_out, d_in, |b, a| v[(b * n_kraus + k, a)]))
            .collect();
        QuantumChannel::from_kraus(d_in, out_dims, kraus)
    }
}

/// `I_α(B_S : R)` of `(𝒩 ⊗ id)(ψ_AR)` for the purification of `rho_in`:
/// `min_σ D_α(ρ_{B_S R} ‖ ⊗_{ℓ∈S} ρ_{B_ℓ} ⊗ σ_R)`.
pub fn subset_information(
    ch: &QuantumChannel,
    s: Subset,
    rho_in: &DensityOperator,
    order: RenyiOrder,
    opts: &MinimizerOptions,
) -> Result<f64> {
    let (rho, parts) = subset_output(ch, s, rho_in)?;
    Ok(multipartite_mutual_information(&rho, &parts, order, opts)?.objective)
}

/// `ρ_{B_S R}` and the singleton parts `{B_ℓ}`.
fn subset_output(
    ch: &QuantumChannel,
    s: Subset,
    rho_in: &DensityOperator,
) -> Result<(DensityOperator, Vec<Subsystems>)> {
    let receivers = ch.receivers(s)?;
    let out = ch.marginal(s)?.output_state(rho_in)?;
    debug_assert!(receivers.iter().all(|l| out.space().contains(l)));
    let parts = receivers
        .iter()
        .map(|l| Subsystems::new([l]))
        .collect::<Result<Vec<_>>>()?;
    Ok((out, parts))
}

/// `V(ρ_{B_S R} ‖ ⊗_{ℓ∈S} ρ_{B_ℓ} ⊗ ρ_R)` at the input `rho_in`.
pub fn subset_variance(ch: &QuantumChannel, s: Subset, rho_in: &DensityOperator) -> Result<f64> {
    let (rho, mut parts) = subset_output(ch, s, rho_in)?;
    parts.push(Subsystems::new([REFERENCE_LABEL])?);
    let tau = product_of_marginals(&rho, &parts)?.permuted(rho.space())?;
    relative_entropy_variance(&rho, &tau)
}

/// Controls for the maximization over input states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputOptions {
    /// Bloch-ball grid size for qubit inputs.
    pub grid_points: usize,
    /// Local refinements started from the best seeds.
    pub restarts: usize,
    /// Independent random restarts compared against the optimum.
    pub probes: usize,
    /// Stopping tolerance of the local search (spread of simplex values).
    pub tol: f64,
    pub max_iter: u64,
    /// Largest input dimension accepted.
    pub budget: usize,
    pub seed: u64,
}

impl Default for InputOptions {
    fn default() -> Self {
        InputOptions {
            grid_points: 2000,
            restarts: 3,
            probes: 4,
            tol: 1e-13,
            max_iter: 2000,
            budget: 4,
            seed: 0,
        }
    }
}

impl InputOptions {
    /// A lighter search for inner loops over `α`.
    pub fn inner(&self) -> Self {
        InputOptions {
            grid_points: self.grid_points.min(100),
            restarts: 1,
            probes: 0,
            ..self.clone()
        }
    }
}

/// One phase of the input search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub phase: &'static str,
    pub evaluations: usize,
    pub best: f64,
}

/// Best input state found and how it was found.
#[derive(Debug, Clone, PartialEq)]
pub struct InputOptimum {
    pub rho_in: DensityOperator,
    pub value: f64,
    pub optimizer_trace: Vec<TraceEntry>,
    /// Optimum minus the best independent probe; `+∞` without probes.
    /// Negative values mean a probe found a better input, which is then
    /// the one reported.
    pub certified_gap: f64,
}

/// Quasi-uniform points of the Bloch ball: golden-angle directions on
/// cube-root radii, plus the center.
pub fn bloch_ball_grid(points: usize) -> Vec<[f64; 3]> {
    let mut out = vec![[0.0; 3]];
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    for i in 1..points {
        let r = (i as f64 / (points - 1) as f64).cbrt();
        let z = 1.0 - 2.0 * ((i as f64 * 0.618_033_988_749_895).fract());
        let phi = golden * i as f64;
        let rho = (1.0 - z * z).max(0.0).sqrt();
        out.push([r * rho * phi.cos(), r * rho * phi.sin(), r * z]);
    }
    out
}

/// `(1 + r·σ)/2`, with `r` pulled back into the unit ball.
pub fn bloch_state(space: &Space, r: &[f64]) -> Result<DensityOperator> {
    let n = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let s = if n > 1.0 { 1.0 / n } else { 1.0 };
    let [i, x, y, z] = pauli();
    let m = (i + x * c(s * r[0]) + y * c(s * r[1]) + z * c(s * r[2])) * c(0.5);
    DensityOperator::from_matrix(space.clone(), m)
}

/// `GG†/Tr GG†` with `G` read from `2d²` reals.
fn gram_state(space: &Space, p: &[f64]) -> Result<DensityOperator> {
    let d = space.total_dim();
    let g = Mat::from_fn(d, d, |i, j| C64::new(p[2 * (i * d + j)], p[2 * (i * d + j) + 1]));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    if !(tr > 1e-300) {
        return Ok(DensityOperator::maximally_mixed(space.clone()));
    }
    DensityOperator::from_matrix(space.clone(), m / c(tr))
}

fn gram_params(rho: &DensityOperator) -> Vec<f64> {
    let g = spectral::psd_power(rho.matrix(), 0.5);
    let d = g.nrows();
    let mut out = vec![0.0; 2 * d * d];
    for i in 0..d {
        for j in 0..d {
            out[2 * (i * d + j)] = g[(i, j)].re;
            out[2 * (i * d + j) + 1] = g[(i, j)].im;
        }
    }
    out
}

/// Uniform point of the unit ball.
fn random_ball_point<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let v: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1e-300);
    let r = rng.random::<f64>().cbrt() / n;
    [v[0] * r, v[1] * r, v[2] * r]
}

struct Negated<'a> {
    space: &'a Space,
    evals: AtomicUsize,
    bloch: bool,
    f: &'a (dyn Fn(&DensityOperator) -> Result<f64> + Sync),
}

impl Negated<'_> {
    fn state(&self, p: &[f64]) -> Result<DensityOperator> {
        if self.bloch {
            bloch_state(self.space, p)
        } else {
            gram_state(self.space, p)
        }
    }
}

impl CostFunction for Negated<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        self.evals.fetch_add(1, Ordering::Relaxed);
        Ok(-(self.f)(&self.state(p)?)?)
    }
}

fn from_argmin(e: argmin::core::Error) -> Error {
    match e.downcast::<Error>() {
        Ok(e) => e,
        Err(e) => Error::InvalidArgument(format!("input search failed: {e}")),
    }
}

/// Nelder–Mead ascent from `start`; returns the state, its value and the
/// number of evaluations.
fn refine(
    problem: Negated<'_>,
    start: Vec<f64>,
    step: f64,
    opts: &InputOptions,
) -> Result<(DensityOperator, f64, usize)> {
    let mut simplex = vec![start.clone()];
    for i in 0..start.len() {
        let mut v = start.clone();
        v[i] += step;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(opts.tol)
        .map_err(from_argmin)?;
    let res = Executor::new(problem, solver)
        .configure(|s| s.max_iters(opts.max_iter))
        .run()
        .map_err(from_argmin)?;
    let state = res.state();
    let best = state.get_best_param().cloned().unwrap_or(start);
    let value = -state.get_best_cost();
    let problem = res.problem.problem.as_ref().expect("problem");
    Ok((problem.state(&best)?, value, problem.evals.load(Ordering::Relaxed)))
}

/// Maximizes `f` over states on `space` (see [`channel_mutual_information`]
/// for the strategy).
pub fn maximize_over_inputs(
    space: &Space,
    f: &(dyn Fn(&DensityOperator) -> Result<f64> + Sync),
    opts: &InputOptions,
) -> Result<InputOptimum> {
    let d = space.total_dim();
    if d > opts.budget {
        return Err(Error::OptimizationBudgetExceeded {
            dim: d,
            budget: opts.budget,
        });
    }
    let bloch = d == 2;
    let mut trace = Vec::new();

    // Seeds: the Bloch grid for qubits, else the maximally mixed state and
    // random Gram points.
    let seeds: Vec<Vec<f64>> = if bloch {
        bloch_ball_grid(opts.grid_points.max(1)).into_iter().map(|p| p.to_vec()).collect()
    } else {
        let mut rng = rng_for(opts.seed, 1);
        let mut v = vec![gram_params(&DensityOperator::maximally_mixed(space.clone()))];
        for _ in 1..opts.restarts.max(1) {
            v.push(random_gram(d, &mut rng));
        }
        v
    };
    let problem = || Negated {
        space,
        evals: AtomicUsize::new(0),
        bloch,
        f,
    };
    let scored = seeds
        .par_iter()
        .map(|p| Ok((-problem().cost(p).map_err(from_argmin)?, p.clone())))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[b].0.total_cmp(&scored[a].0).then(a.cmp(&b)));
    trace.push(TraceEntry {
        phase: "seed",
        evaluations: scored.len(),
        best: scored[order[0]].0,
    });

    let step = if bloch { 0.05 } else { 0.1 };
    let starts: Vec<Vec<f64>> = order.iter().take(opts.restarts.max(1)).map(|&i| scored[i].1.clone()).collect();
    let refined = starts
        .into_par_iter()
        .map(|s| refine(problem(), s, step, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut best_idx = 0;
    for (i, r) in refined.iter().enumerate() {
        if r.1 > refined[best_idx].1 {
            best_idx = i;
        }
    }
    let (mut rho_in, mut value, _) = refined[best_idx].clone();
    // The refinement never ends below its seed.
    if scored[order[0]].0 > value {
        value = scored[order[0]].0;
        rho_in = problem().state(&scored[order[0]].1)?;
    }
    trace.push(TraceEntry {
        phase: "refine",
        evaluations: refined.iter().map(|r| r.2).sum(),
        best: value,
    });

    let mut certified_gap = f64::INFINITY;
    if opts.probes > 0 {
        let probes = (0..opts.probes)
            .into_par_iter()
            .map(|k| {
                let mut rng = rng_for(opts.seed, 100 + k as u64);
                let start = if bloch {
                    random_ball_point(&mut rng).to_vec()
                } else {
                    random_gram(d, &mut rng)
                };
                refine(problem(), start, step, opts)
            })
            .collect::<Result<Vec<_>>>()?;
        let best_probe = probes.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        certified_gap = value - best_probe;
        trace.push(TraceEntry {
            phase: "probe",
            evaluations: probes.iter().map(|p| p.2).sum(),
            best: best_probe,
        });
        if let Some(p) = probes.iter().filter(|p| p.1 > value).max_by(|a, b| a.1.total_cmp(&b.1)) {
            rho_in = p.0.clone();
            value = p.1;
        }
    }
    Ok(InputOptimum {
        rho_in,
        value,
        optimizer_trace: trace,
        certified_gap,
    })
}

fn random_gram<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    let g = ginibre(rng, d, d);
    let mut out = vec![0.0; 2 * d * d];
    for i in 0..d {
        for j in 0..d {
            out[2 * (i * d + j)] = g[(i, j)].re;
            out[2 * (i * d + j) + 1] = g[(i, j)].im;
        }
    }
    out
}

/// `I_α(𝒩_{A→B_S}) = max_ψ I_α(B_S : R)`.
///
/// Qubit inputs are seeded from a Bloch-ball grid, larger inputs (up to
/// `opts.budget`) from the maximally mixed state and random Gram points
/// `GG†/Tr`; the best seeds are refined by Nelder–Mead, which concavity in
/// the input makes sufficient, and independent random restarts give
/// `certified_gap`.
pub fn channel_mutual_information(
    ch: &QuantumChannel,
    s: Subset,
    order: RenyiOrder,
    opts: &InputOptions,
) -> Result<InputOptimum> {
    let marginal = ch.marginal(s)?;
    let inner = MinimizerOptions::fast();
    let f = |rho: &DensityOperator| {
        subset_information(&marginal, Subset::full(marginal.parties()), rho, order, &inner)
    };
    maximize_over_inputs(ch.input(), &f, opts)
}

/// `E_r(𝒩_{A→B_S})` with the maximizing order and the worst-case input
/// at that order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelExponent {
    pub value: f64,
    pub alpha_star: f64,
    pub psi_star: DensityOperator,
    /// `I(𝒩_{A→B_S})`.
    pub threshold: f64,
}

/// `sup_{α∈[1,2]} ((α-1)/α)(r - I_α(𝒩_{A→B_S}))`.
pub fn channel_error_exponent(
    ch: &QuantumChannel,
    s: Subset,
    rate: f64,
    opts: &InputOptions,
) -> Result<ChannelExponent> {
    let query = ExponentQuery::new(rate)?;
    let threshold = channel_mutual_information(ch, s, RenyiOrder::one(), opts)?;
    let inner = opts.inner();
    let mut cache: Vec<(f64, InputOptimum)> = Vec::new();
    let v = maximize_exponent(query, |a| {
        if a == 1.0 {
            return Ok(threshold.value);
        }
        let opt = channel_mutual_information(ch, s, RenyiOrder::new(a)?, &inner)?;
        let value = opt.value;
        cache.push((a, opt));
        Ok(value)
    })?;
    let psi_star = if v.alpha_star == 1.0 {
        threshold.rho_in.clone()
    } else {
        cache
            .into_iter()
            .find(|(a, _)| *a == v.alpha_star)
            .map(|(_, o)| o.rho_in)
            .unwrap_or_else(|| threshold.rho_in.clone())
    };
    Ok(ChannelExponent {
        value: v.value,
        alpha_star: v.alpha_star,
        psi_star,
        threshold: threshold.value,
    })
}

/// Channel dispersion and the inputs it was taken over.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionReport {
    pub value: f64,
    pub capacity: f64,
    /// Number of candidate inputs within [`CAPACITY_TOL`] of the capacity.
    pub near_optimal: usize,
}

/// `max V(B_S : R)` over inputs whose information is within
/// [`CAPACITY_TOL`] of `I(𝒩_{A→B_S})`. Candidates are the optimum, the
/// seed grid and random states.
pub fn channel_dispersion(ch: &QuantumChannel, s: Subset, opts: &InputOptions) -> Result<DispersionReport> {
    let opt = channel_mutual_information(ch, s, RenyiOrder::one(), opts)?;
    let space = ch.input();
    let mut candidates = vec![opt.rho_in.clone()];
    if space.total_dim() == 2 {
        for p in bloch_ball_grid(opts.grid_points.max(1)) {
            candidates.push(bloch_state(space, &p)?);
        }
    } else {
        let mut rng = rng_for(opts.seed, 2);
        candidates.push(DensityOperator::maximally_mixed(space.clone()));
        for _ in 0..opts.grid_points {
            candidates.push(gram_state(space, &random_gram(space.total_dim(), &mut rng))?);
        }
    }
    let one = MinimizerOptions::fast();
    let rows = candidates
        .par_iter()
        .map(|rho| {
            let i = subset_information(ch, s, rho, RenyiOrder::one(), &one)?;
            if i >= opt.value - CAPACITY_TOL {
                Ok(Some(subset_variance(ch, s, rho)?))
            } else {
                Ok(None)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let near: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(DispersionReport {
        value: near.iter().copied().fold(0.0, f64::max),
        capacity: opt.value,
        near_optimal: near.len(),
    })
}

/// Rates `(r₁, …, r_L)` in bits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateVector(Vec<f64>);

impl RateVector {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::ShapeMismatch("empty rate vector".into()));
        }
        if let Some(r) = rates.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
            return Err(Error::InvalidArgument(format!("rate {r} must be finite and >= 0")));
        }
        Ok(RateVector(rates))
    }

    pub fn rates(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `r_S = Σ_{ℓ∈S} r_ℓ`.
    pub fn sum_over(&self, s: Subset) -> f64 {
        s.members().map(|l| self.0[l]).sum()
    }
}

/// `I(𝒩_{A→B_S})` for one subset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    pub subset: Subset,
    pub value: f64,
    pub certified_gap: f64,
}

/// Thresholds of the capacity region and, for two receivers, its corners.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionReport {
    pub parties: usize,
    pub thresholds: Vec<Threshold>,
    pub vertices_2d: Option<Vec<[f64; 2]>>,
}

impl RegionReport {
    pub fn threshold(&self, s: Subset) -> Option<f64> {
        self.thresholds.iter().find(|t| t.subset == s).map(|t| t.value)
    }
}

/// Computes `I(𝒩_{A→B_S})` for every nonempty `S`.
pub fn capacity_region(ch: &QuantumChannel, opts: &InputOptions) -> Result<RegionReport> {
    let parties = ch.parties();
    let subsets: Vec<Subset> = Subset::nonempty(parties).collect();
    let thresholds = subsets
        .par_iter()
        .map(|&s| {
            let o = channel_mutual_information(ch, s, RenyiOrder::one(), opts)?;
            Ok(Threshold {
                subset: s,
                value: o.value,
                certified_gap: o.certified_gap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = RegionReport {
        parties,
        thresholds,
        vertices_2d: None,
    };
    if parties == 2 {
        let i1 = report.threshold(Subset::singleton(0)).expect("singleton");
        let i2 = report.threshold(Subset::singleton(1)).expect("singleton");
        let i12 = report.threshold(Subset::full(2)).expect("full set");
        report.vertices_2d = Some(region_vertices(i1, i2, i12));
    }
    Ok(report)
}

/// Corners of `{r₁ ≥ I₁, r₂ ≥ I₂, r₁ + r₂ ≥ I₁₂}`: two corners on the
/// sum face when `I₁₂ > I₁ + I₂`, otherwise the single corner `(I₁, I₂)`.
pub fn region_vertices(i1: f64, i2: f64, i12: f64) -> Vec<[f64; 2]> {
    if i12 > i1 + i2 {
        vec![[i1, i12 - i1], [i12 - i2, i2]]
    } else {
        vec![[i1, i2]]
    }
}

/// Membership verdict with `r_S - I(𝒩_{A→B_S})` per subset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Membership {
    pub member: bool,
    pub slacks: Vec<(Subset, f64)>,
}

/// Slack allowed on each constraint `r_S ≥ I(𝒩_{A→B_S})`.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

pub fn region_membership(report: &RegionReport, rates: &RateVector) -> Result<Membership> {
    if rates.len() != report.parties {
        return Err(Error::ShapeMismatch(format!(
            "{} rates for {} receivers",
            rates.len(),
            report.parties
        )));
    }
    let slacks: Vec<(Subset, f64)> = report
        .thresholds
        .iter()
        .map(|t| (t.subset, rates.sum_over(t.subset) - t.value))
        .collect();
    Ok(Membership {
        member: slacks.iter().all(|(_, s)| *s >= -MEMBERSHIP_TOL),
        slacks,
    })
}

/// Evaluates `f` on every nonempty subset concurrently, in subset order.
pub fn per_subset<T: Send>(parties: usize, f: impl Fn(Subset) -> Result<T> + Sync) -> Result<Vec<(Subset, T)>> {
    let subsets: Vec<Subset> = Subset::nonempty(parties).collect();
    subsets
        .into_par_iter()
        .map(|s| Ok((s, f(s)?)))
        .collect()
}
