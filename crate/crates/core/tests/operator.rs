use qbsim_core::purification::{purify, uhlmann_isometry_kets};
use qbsim_core::random::*;
use qbsim_core::spectral::*;
use qbsim_core::{partial_trace, tensor, DensityOperator, Mat, Operator, Space, Subsystems, C64};

fn qubit(l: &str) -> Space {
    Space::single(l, 2).unwrap()
}

fn max_abs(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn tensor_matches_index_loop_kronecker() {
    let mut rng = rng_for(1, 0);
    let a = random_hermitian(qubit("A"), &mut rng);
    let b = random_hermitian(qubit("B"), &mut rng);
    let ab = tensor(&[&a, &b]).unwrap();
    let mut oracle = Mat::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    oracle[(2 * i + k, 2 * j + l)] = a.matrix()[(i, j)] * b.matrix()[(k, l)];
                }
            }
        }
    }
    assert!(max_abs(&(ab.matrix() - oracle)) < 1e-15);
}

#[test]
fn partial_trace_matches_index_sum() {
    let space = Space::new([("A", 2), ("B", 2), ("C", 2)]).unwrap();
    let rho = random_density_operator(space, 8, 5).unwrap();
    let m = rho.matrix();
    // Trace out the middle factor.
    let mut oracle = Mat::zeros(4, 4);
    for a in 0..2 {
        for c in 0..2 {
            for a2 in 0..2 {
                for c2 in 0..2 {
                    let mut s = C64::new(0.0, 0.0);
                    for b in 0..2 {
                        s += m[(4 * a + 2 * b + c, 4 * a2 + 2 * b + c2)];
                    }
                    oracle[(2 * a + c, 2 * a2 + c2)] = s;
                }
            }
        }
    }
    let out = partial_trace(&rho, &Subsystems::new(["A", "C"]).unwrap()).unwrap();
    assert_eq!(out.space().labels(), ["A", "C"]);
    assert!(max_abs(&(out.matrix() - oracle)) < 1e-14);
}

#[test]
fn fractional_power_satisfies_functional_equation() {
    let mut rng = rng_for(2, 0);
    let x = random_state(Space::single("A", 3).unwrap(), 3, &mut rng).unwrap();
    let r = psd_power(x.matrix(), 1.0 / 3.0);
    assert!(max_abs(&(&r * &r * &r - x.matrix())) < 1e-9);
}

#[test]
fn schatten_three_norm_matches_singular_values() {
    let mut rng = rng_for(3, 0);
    let x = random_operator(Space::single("A", 3).unwrap(), &mut rng);
    let sv = x.matrix().clone().singular_values();
    let oracle = sv.iter().map(|s| s.powi(3)).sum::<f64>().cbrt();
    assert!((schatten_norm(&x, 3.0).unwrap() - oracle).abs() < 1e-10);
}

#[test]
fn trace_distance_of_diagonal_pair() {
    let a = DensityOperator::diagonal(qubit("A"), &[0.75, 0.25]).unwrap();
    let b = DensityOperator::maximally_mixed(qubit("A"));
    assert!((trace_distance(&a, &b).unwrap() - 0.25).abs() < 1e-14);
}

#[test]
fn kosaki_examples() {
    let mut rng = rng_for(4, 0);
    let space = Space::single("A", 3).unwrap();
    let sigma = random_full_rank(space.clone(), &mut rng);
    for p in [1.0, 1.5, 2.0, 4.0] {
        let one = kosaki_norm(&Operator::identity(space.clone()), &sigma, p).unwrap();
        assert!((one - 1.0).abs() < 1e-10);
    }
    let x = random_operator(space.clone(), &mut rng);
    let mixed = DensityOperator::maximally_mixed(space.clone());
    for p in [1.0, 2.0, 3.0] {
        let k = kosaki_norm(&x, &mixed, p).unwrap();
        let s = schatten_norm(&x, p).unwrap();
        assert!((k - 3f64.powf(-1.0 / p) * s).abs() < 1e-10);
    }
    let h = psd_power(sigma.matrix(), 0.5);
    let oracle = (&h * x.matrix() * &h * x.matrix().adjoint()).trace().re.sqrt();
    assert!((kosaki_norm(&x, &sigma, 2.0).unwrap() - oracle).abs() < 1e-10);
}

#[test]
fn quotient_of_commuting_diagonals_is_entrywise() {
    let space = Space::single("A", 3).unwrap();
    let x = Operator::diagonal(space.clone(), &[0.2, 0.5, 0.3]).unwrap();
    let y = Operator::diagonal(space.clone(), &[0.4, 0.6, 0.0]).unwrap();
    let q = nc_quotient(&x, &y).unwrap();
    let oracle = Operator::diagonal(space.clone(), &[0.5, 0.5 / 0.6, 0.0]).unwrap();
    assert!(max_abs(&(q.matrix() - oracle.matrix())) < 1e-12);
    let id = nc_quotient(&x, &Operator::identity(space)).unwrap();
    assert!(max_abs(&(id.matrix() - x.matrix())) < 1e-12);
}

#[test]
fn haar_first_moment_is_maximally_mixed() {
    let space = qubit("A");
    let mut acc = Mat::zeros(2, 2);
    let n = 10_000;
    for seed in 0..n {
        acc += haar_random_pure_state(space.clone(), seed).matrix();
    }
    let mean = DensityOperator::from_matrix(space.clone(), acc / C64::new(n as f64, 0.0)).unwrap();
    let d = trace_distance(&mean, &DensityOperator::maximally_mixed(space)).unwrap();
    assert!(d < 0.05, "{d}");
}

#[test]
fn full_rank_ensemble_mean_is_maximally_mixed() {
    let space = Space::single("A", 3).unwrap();
    let mut acc = Mat::zeros(3, 3);
    let n = 10_000;
    for seed in 0..n {
        acc += random_density_operator(space.clone(), 3, seed).unwrap().matrix();
    }
    let mean = DensityOperator::from_matrix(space.clone(), acc / C64::new(n as f64, 0.0)).unwrap();
    let d = trace_distance(&mean, &DensityOperator::maximally_mixed(space)).unwrap();
    assert!(d < 0.05, "{d}");
}

#[test]
fn rank_one_sample_is_a_projector() {
    let rho = random_density_operator(Space::single("A", 4).unwrap(), 1, 9).unwrap();
    assert!(max_abs(&(rho.matrix() * rho.matrix() - rho.matrix())) < 1e-9);
    assert!(matches!(
        random_density_operator(Space::single("A", 4).unwrap(), 5, 9),
        Err(qbsim_core::Error::InvalidRank { rank: 5, dim: 4 })
    ));
}

#[test]
fn purification_has_the_right_marginal_and_is_pure() {
    let rho = random_density_operator(Space::single("A", 3).unwrap(), 2, 10).unwrap();
    let psi = purify(&rho, "R").unwrap();
    assert!((psi.purity() - 1.0).abs() < 1e-10);
    let back = psi.marginal(&Subsystems::new(["A"]).unwrap()).unwrap();
    assert!(max_abs(&(back.matrix() - rho.matrix())) < 1e-12);
}

#[test]
fn uhlmann_isometry_beats_random_isometries() {
    let space = Space::new([("A", 2), ("B", 2)]).unwrap();
    let mut rng = rng_for(11, 0);
    let psi = random_ket(space, &mut rng);
    let phi = random_ket(Space::new([("A", 2), ("C", 2)]).unwrap(), &mut rng);
    let v = uhlmann_isometry_kets(&psi, &phi).unwrap();
    assert!(v.isometry_error() < 1e-10);
    let overlap = |m: &Mat| -> f64 {
        let iso = qbsim_core::Isometry::new(v.input().clone(), v.output().clone(), m.clone()).unwrap();
        let out = iso.apply_ket(&psi).unwrap().permuted(phi.space()).unwrap();
        phi.inner(&out).unwrap().norm()
    };
    let best = overlap(v.matrix());
    for _ in 0..50 {
        let u = random_unitary(v.matrix().nrows(), &mut rng);
        assert!(overlap(&u) <= best + 1e-10);
    }
}
