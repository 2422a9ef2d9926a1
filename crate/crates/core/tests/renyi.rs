use qbsim_core::random::{random_density_operator, rng_for};
use qbsim_core::renyi::*;
use qbsim_core::spectral::entropy;
use qbsim_core::{DensityOperator, Mat, Operator, Space, Subsystems, C64};

fn qubit(l: &str) -> Space {
    Space::single(l, 2).unwrap()
}

fn order(a: f64) -> RenyiOrder {
    RenyiOrder::new(a).unwrap()
}

fn subs(labels: &[&str]) -> Subsystems {
    Subsystems::new(labels.iter().copied()).unwrap()
}

fn random_probs(seed: u64, d: usize) -> Vec<f64> {
    use rand::Rng;
    let mut rng = rng_for(seed, 0);
    let v: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

#[test]
fn commuting_pairs_match_classical_formulas() {
    let space = Space::single("A", 4).unwrap();
    for seed in 0..20 {
        let p = random_probs(2 * seed, 4);
        let q = random_probs(2 * seed + 1, 4);
        let rho = DensityOperator::diagonal(space.clone(), &p).unwrap();
        let sigma = DensityOperator::diagonal(space.clone(), &q).unwrap();
        for a in [1.25, 1.5, 2.0, 3.0] {
            let oracle = p.iter().zip(&q).map(|(x, y)| x.powf(a) * y.powf(1.0 - a)).sum::<f64>().log2() / (a - 1.0);
            let sw = sandwiched_divergence(&rho, &sigma, order(a)).unwrap();
            let pz = petz_divergence(&rho, &sigma, a).unwrap();
            assert!((sw - oracle).abs() < 1e-10);
            assert!((pz - oracle).abs() < 1e-10);
        }
        let kl: f64 = p.iter().zip(&q).map(|(x, y)| x * (x / y).log2()).sum();
        let var: f64 = p.iter().zip(&q).map(|(x, y)| x * (x / y).log2().powi(2)).sum::<f64>() - kl * kl;
        assert!((umegaki_divergence(&rho, &sigma).unwrap() - kl).abs() < 1e-10);
        assert!((sandwiched_divergence(&rho, &sigma, RenyiOrder::one()).unwrap() - kl).abs() < 1e-10);
        assert!((relative_entropy_variance(&rho, &sigma).unwrap() - var).abs() < 1e-10);
    }
}

#[test]
fn variance_of_half_against_three_quarters() {
    let a = DensityOperator::diagonal(qubit("A"), &[0.5, 0.5]).unwrap();
    let b = DensityOperator::diagonal(qubit("A"), &[0.75, 0.25]).unwrap();
    let l0 = (0.5f64 / 0.75).log2();
    let l1 = (0.5f64 / 0.25).log2();
    let mean = 0.5 * (l0 + l1);
    let oracle = 0.5 * (l0 - mean).powi(2) + 0.5 * (l1 - mean).powi(2);
    assert!((relative_entropy_variance(&a, &b).unwrap() - oracle).abs() < 1e-12);
    let pure = DensityOperator::basis(qubit("A"), 0).unwrap();
    let mixed = DensityOperator::maximally_mixed(qubit("A"));
    assert!(relative_entropy_variance(&pure, &mixed).unwrap().abs() < 1e-10);
}

/// Hermitian square root and inverse through nalgebra's own eigensolver.
fn inv_sqrt(m: &Mat) -> Mat {
    let e = m.clone().symmetric_eigen();
    let d = Mat::from_diagonal(&e.eigenvalues.map(|l| C64::new(l.powf(-0.5), 0.0)));
    &e.eigenvectors * d * e.eigenvectors.adjoint()
}

#[test]
fn order_two_matches_cyclic_trace_formula() {
    let space = Space::new([("A", 2), ("B", 2)]).unwrap();
    for seed in 0..20 {
        let rho = random_density_operator(space.clone(), 4, 100 + seed).unwrap();
        let sigma = random_density_operator(space.clone(), 4, 200 + seed).unwrap();
        let s = inv_sqrt(sigma.matrix());
        let q = (rho.matrix() * &s * rho.matrix() * &s).trace().re;
        let d2 = sandwiched_divergence(&rho, &sigma, order(2.0)).unwrap();
        assert!((d2 - q.log2()).abs() < 1e-9, "{d2} vs {}", q.log2());
    }
}

#[test]
fn divergence_is_monotone_in_order() {
    let space = Space::new([("A", 2), ("B", 2)]).unwrap();
    for seed in 0..100 {
        let rho = random_density_operator(space.clone(), 1 + (seed as usize % 4), 300 + seed).unwrap();
        let sigma = random_density_operator(space.clone(), 4, 400 + seed).unwrap();
        let vals: Vec<f64> = [1.0, 1.25, 1.5, 2.0]
            .iter()
            .map(|&a| sandwiched_divergence(&rho, &sigma, order(a)).unwrap())
            .collect();
        for w in vals.windows(2) {
            assert!(w[1] >= w[0] - 1e-7, "seed {seed}: {vals:?}");
        }
    }
}

#[test]
fn divergence_contracts_under_partial_trace() {
    let space = Space::new([("A", 2), ("B", 2), ("C", 2)]).unwrap();
    let keep = subs(&["A", "B"]);
    for seed in 0..100 {
        let rho = random_density_operator(space.clone(), 1 + (seed as usize % 8), 500 + seed).unwrap();
        let sigma = random_density_operator(space.clone(), 8, 600 + seed).unwrap();
        let (rm, sm) = (rho.marginal(&keep).unwrap(), sigma.marginal(&keep).unwrap());
        for a in [1.0, 1.5, 2.0] {
            let full = sandwiched_divergence(&rho, &sigma, order(a)).unwrap();
            let reduced = sandwiched_divergence(&rm, &sm, order(a)).unwrap();
            assert!(reduced <= full + 1e-8, "seed {seed} alpha {a}: {reduced} > {full}");
        }
    }
}

#[test]
fn sandwiched_is_below_petz() {
    let space = Space::new([("A", 2), ("B", 2)]).unwrap();
    for seed in 0..100 {
        let rho = random_density_operator(space.clone(), 4, 700 + seed).unwrap();
        let sigma = random_density_operator(space.clone(), 4, 800 + seed).unwrap();
        for a in [1.25, 1.5, 2.0] {
            let sw = sandwiched_divergence(&rho, &sigma, order(a)).unwrap();
            let pz = petz_divergence(&rho, &sigma, a).unwrap();
            assert!(sw <= pz + 1e-9, "seed {seed} alpha {a}: {sw} > {pz}");
        }
    }
}

#[test]
fn limit_one_uses_the_exact_marginal() {
    let space = Space::new([("A", 2), ("E", 2)]).unwrap();
    let rho = random_density_operator(space, 3, 11).unwrap();
    let tau = random_density_operator(qubit("A"), 2, 12).unwrap();
    let rep = renyi_information(&rho, &tau, &subs(&["E"]), RenyiOrder::one(), &MinimizerOptions::default()).unwrap();
    let y = tau.tensor(&rho.marginal(&subs(&["E"])).unwrap()).unwrap();
    let direct = umegaki_divergence(&rho, &y).unwrap();
    assert!((rep.objective - direct).abs() < 1e-12);
}

fn bloch(r: [f64; 3]) -> DensityOperator {
    let i = C64::new(0.0, 1.0);
    let m = Mat::from_row_slice(
        2,
        2,
        &[
            C64::new(1.0 + r[2], 0.0),
            C64::new(r[0], 0.0) - i * r[1],
            C64::new(r[0], 0.0) + i * r[1],
            C64::new(1.0 - r[2], 0.0),
        ],
    ) * C64::new(0.5, 0.0);
    DensityOperator::from_matrix(qubit("E"), m).unwrap()
}

/// Best `D₂(ρ ‖ τ ⊗ σ)` over a `n³` cube grid of the Bloch ball, refined
/// by shrinking the cube around the best point.
fn grid_minimum(rho: &DensityOperator, tau: &Operator, n: usize) -> f64 {
    let eval = |r: [f64; 3]| {
        let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if norm > 0.999_999 {
            return f64::INFINITY;
        }
        let y = qbsim_core::tensor(&[tau, bloch(r).as_operator()]).unwrap();
        sandwiched_divergence(rho, &y, order(2.0)).unwrap()
    };
    let (mut center, mut half) = ([0.0; 3], 1.0);
    let mut best = f64::INFINITY;
    for _ in 0..12 {
        let mut next = center;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let f = |t: usize| -1.0 + 2.0 * t as f64 / (n - 1) as f64;
                    let r = [center[0] + half * f(i), center[1] + half * f(j), center[2] + half * f(k)];
                    let v = eval(r);
                    if v < best {
                        best = v;
                        next = r;
                    }
                }
            }
        }
        center = next;
        half *= 0.3;
    }
    best
}

#[test]
fn order_two_information_matches_bloch_grid() {
    let space = Space::new([("A", 2), ("E", 2)]).unwrap();
    for seed in 0..3 {
        let rho = random_density_operator(space.clone(), 4, 900 + seed).unwrap();
        let tau = rho.marginal(&subs(&["A"])).unwrap();
        let rep = renyi_information(&rho, &tau, &subs(&["E"]), order(2.0), &MinimizerOptions::default()).unwrap();
        let oracle = grid_minimum(&rho, &tau, 22);
        assert!(rep.converged);
        assert!((rep.objective - oracle).abs() < 1e-4, "{} vs {oracle}", rep.objective);
        assert!(rep.certificate_gap.unwrap() >= -1e-8);
    }
}

#[test]
fn bell_and_ghz_informations() {
    let bell = qbsim_core::purify(&DensityOperator::maximally_mixed(qubit("A")), "B").unwrap();
    let parts = [subs(&["A"])];
    let i = multipartite_mutual_information(&bell, &parts, RenyiOrder::one(), &MinimizerOptions::default()).unwrap();
    assert!((i.objective - 2.0).abs() < 1e-12);

    let space = Space::new([("A", 2), ("B", 2), ("C", 2)]).unwrap();
    let mut v = qbsim_core::Vector::zeros(8);
    v[0] = C64::new(0.5f64.sqrt(), 0.0);
    v[7] = C64::new(0.5f64.sqrt(), 0.0);
    let ghz = qbsim_core::Ket::new(space, v).unwrap().projector().unwrap();
    let h = |l: &[&str]| entropy(&ghz.marginal(&subs(l)).unwrap());
    let oracle = h(&["A"]) + h(&["B"]) + h(&["C"]) - entropy(&ghz);
    let parts = [subs(&["A"]), subs(&["B"])];
    let i = multipartite_mutual_information(&ghz, &parts, RenyiOrder::one(), &MinimizerOptions::default()).unwrap();
    assert!((oracle - 3.0).abs() < 1e-12);
    assert!((i.objective - oracle).abs() < 1e-10);
}

fn random_pair(seed: u64) -> (DensityOperator, DensityOperator) {
    let rho = random_density_operator(Space::new([("A", 2), ("E", 2)]).unwrap(), 4, seed).unwrap();
    let tau = rho.marginal(&subs(&["A"])).unwrap();
    (rho, tau)
}

#[test]
fn exponent_vanishes_below_threshold_and_is_half_rate_for_products() {
    let (rho, tau) = random_pair(31);
    let e = subs(&["E"]);
    let opts = MinimizerOptions::fast();
    let i1 = renyi_information(&rho, &tau, &e, RenyiOrder::one(), &opts).unwrap().objective;
    let v = error_exponent_state(&rho, &tau, &e, ExponentQuery::new(0.9 * i1).unwrap(), &opts).unwrap();
    assert_eq!((v.value, v.alpha_star), (0.0, 1.0));

    let product = random_density_operator(qubit("A"), 2, 1)
        .unwrap()
        .tensor(&random_density_operator(qubit("E"), 2, 2).unwrap())
        .unwrap();
    let pa = product.marginal(&subs(&["A"])).unwrap();
    for r in [0.3, 1.0, 2.5] {
        let v = error_exponent_state(&product, &pa, &e, ExponentQuery::new(r).unwrap(), &opts).unwrap();
        assert!((v.value - r / 2.0).abs() < 1e-9);
        assert_eq!(v.alpha_star, 2.0);
    }
}

#[test]
fn exponent_matches_dense_alpha_grid() {
    let (rho, tau) = random_pair(41);
    let e = subs(&["E"]);
    let opts = MinimizerOptions::fast();
    let i1 = renyi_information(&rho, &tau, &e, RenyiOrder::one(), &opts).unwrap().objective;
    let r = i1 + 0.5;
    let v = error_exponent_state(&rho, &tau, &e, ExponentQuery::new(r).unwrap(), &opts).unwrap();
    let oracle = (0..=2000)
        .map(|k| {
            let a = 1.0 + k as f64 / 2000.0;
            if k == 0 {
                return 0.0;
            }
            let ia = renyi_information(&rho, &tau, &e, order(a), &opts).unwrap().objective;
            (a - 1.0) / a * (r - ia)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((v.value - oracle).abs() < 1e-5, "{} vs {oracle}", v.value);
    assert!(v.value >= oracle - 1e-9);
}

fn doubled(rho: &DensityOperator, tau: &DensityOperator) -> (DensityOperator, DensityOperator, Subsystems) {
    let map = [("A", "A2"), ("E", "E2")];
    let rho2 = rho.tensor(&rho.relabel(&map).unwrap()).unwrap();
    let tau2 = tau.tensor(&tau.relabel(&map).unwrap()).unwrap();
    (rho2, tau2, subs(&["E", "E2"]))
}

#[test]
fn information_and_exponent_are_additive() {
    let opts = MinimizerOptions::fast();
    let e = subs(&["E"]);
    for seed in 0..3 {
        let (rho, tau) = random_pair(51 + seed);
        let (rho2, tau2, e2) = doubled(&rho, &tau);
        for a in [1.5, 2.0] {
            let one = renyi_information(&rho, &tau, &e, order(a), &opts).unwrap().objective;
            let two = renyi_information(&rho2, &tau2, &e2, order(a), &opts).unwrap().objective;
            assert!((two - 2.0 * one).abs() < 1e-6, "alpha {a}: {two} vs 2*{one}");
        }
        let i1 = renyi_information(&rho, &tau, &e, RenyiOrder::one(), &opts).unwrap().objective;
        let r = i1 + 0.3;
        let e_one = error_exponent_state(&rho, &tau, &e, ExponentQuery::new(r).unwrap(), &opts).unwrap();
        let e_two = error_exponent_state(&rho2, &tau2, &e2, ExponentQuery::new(2.0 * r).unwrap(), &opts).unwrap();
        assert!((e_two.value - 2.0 * e_one.value).abs() < 1e-5, "{} vs 2*{}", e_two.value, e_one.value);
    }
}

#[test]
fn exponent_turns_positive_at_the_threshold() {
    let opts = MinimizerOptions::fast();
    let e = subs(&["E"]);
    for seed in 0..5 {
        let (rho, tau) = random_pair(61 + seed);
        let i1 = umegaki_divergence(&rho, &tau.tensor(&rho.marginal(&e).unwrap()).unwrap()).unwrap();
        let below = error_exponent_state(&rho, &tau, &e, ExponentQuery::new(i1 - 1e-5).unwrap(), &opts).unwrap();
        let above = error_exponent_state(&rho, &tau, &e, ExponentQuery::new(i1 + 1e-5).unwrap(), &opts).unwrap();
        assert_eq!(below.value, 0.0);
        assert!(above.value > 0.0, "seed {seed}: {}", above.value);
    }
}

#[test]
fn dimension_bound_holds() {
    let space = Space::new([("A", 2), ("B", 2), ("C", 2)]).unwrap();
    let opts = MinimizerOptions::fast();
    for seed in 0..50 {
        let rho = random_density_operator(space.clone(), 1 + seed as usize % 8, 1000 + seed).unwrap();
        let tau = random_density_operator(qubit("A"), 2, 2000 + seed).unwrap();
        let rho_ab = rho.marginal(&subs(&["A", "B"])).unwrap();
        for a in [1.5, 2.0] {
            let big = renyi_information(&rho, &tau, &subs(&["B", "C"]), order(a), &opts).unwrap().objective;
            let small = renyi_information(&rho_ab, &tau, &subs(&["B"]), order(a), &opts).unwrap().objective;
            assert!(big <= small + 2.0 * a / (a - 1.0) + 1e-6, "seed {seed}");
        }
    }
}

#[test]
fn convexity_lemma_holds() {
    let space = Space::new([("A1", 2), ("A2", 2), ("E", 2)]).unwrap();
    let opts = MinimizerOptions::fast();
    let e = subs(&["E"]);
    for seed in 0..50 {
        use rand::Rng;
        let p = rng_for(seed, 9).random_range(0.05..0.95);
        let w = [p, 1.0 - p];
        let rhos: Vec<DensityOperator> = (0..2)
            .map(|i| random_density_operator(space.clone(), 2 + i, 3000 + 10 * seed + i as u64).unwrap())
            .collect();
        let taus: Vec<[DensityOperator; 2]> = (0..2)
            .map(|i| {
                [
                    random_density_operator(qubit("A1"), 2, 4000 + 10 * seed + i).unwrap(),
                    random_density_operator(qubit("A2"), 2, 5000 + 10 * seed + i).unwrap(),
                ]
            })
            .collect();
        let mix = DensityOperator::mixture(&w, &[&rhos[0], &rhos[1]]).unwrap();
        let t1 = DensityOperator::mixture(&w, &[&taus[0][0], &taus[1][0]]).unwrap();
        let t2 = DensityOperator::mixture(&w, &[&taus[0][1], &taus[1][1]]).unwrap();
        let h = -w.iter().map(|x| x * x.log2()).sum::<f64>();
        for a in [1.5, 2.0] {
            let lhs = renyi_information(&mix, &t1.tensor(&t2).unwrap(), &e, order(a), &opts).unwrap().objective;
            let rhs: f64 = (0..2)
                .map(|i| {
                    let t = taus[i][0].tensor(&taus[i][1]).unwrap();
                    w[i] * renyi_information(&rhos[i], &t, &e, order(a), &opts).unwrap().objective
                })
                .sum();
            assert!(lhs <= rhs + 2.0 * h + 1e-6, "seed {seed} alpha {a}: {lhs} > {rhs} + 2H");
        }
    }
}
