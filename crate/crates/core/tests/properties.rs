use proptest::prelude::*;
use qbsim_core::channel::presets;
use qbsim_core::random::*;
use qbsim_core::renyi::{renyi_information, sandwiched_divergence, MinimizerOptions, RenyiOrder};
use qbsim_core::spectral::*;
use qbsim_core::{DensityOperator, Mat, Operator, Space, Subsystems};

fn max_abs(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3, 1usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_inverts_tensor((da, db) in dims(), seed in any::<u64>()) {
        let a = random_density_operator(Space::single("A", da).unwrap(), da, seed).unwrap();
        let b = random_density_operator(Space::single("B", db).unwrap(), db, seed ^ 1).unwrap();
        let ab = a.tensor(&b).unwrap();
        let back = ab.marginal(&Subsystems::new(["A"]).unwrap()).unwrap();
        prop_assert!(max_abs(&(back.matrix() - a.matrix())) < 1e-12);
        let back = ab.marginal(&Subsystems::new(["B"]).unwrap()).unwrap();
        prop_assert!(max_abs(&(back.matrix() - b.matrix())) < 1e-12);
    }

    #[test]
    fn trace_distance_is_a_unitarily_invariant_metric(d in 2usize..=8, seed in any::<u64>()) {
        let space = Space::single("A", d).unwrap();
        let mut rng = rng_for(seed, 0);
        let r: Vec<DensityOperator> = (0..3).map(|k| random_state(space.clone(), 1 + k % d, &mut rng).unwrap()).collect();
        let t = |x: &DensityOperator, y: &DensityOperator| trace_distance(x, y).unwrap();
        prop_assert!(t(&r[0], &r[2]) <= t(&r[0], &r[1]) + t(&r[1], &r[2]) + 1e-10);
        let u = random_unitary(d, &mut rng);
        let rot = |x: &DensityOperator| {
            DensityOperator::from_matrix(space.clone(), &u * x.matrix() * u.adjoint()).unwrap()
        };
        prop_assert!((t(&rot(&r[0]), &rot(&r[1])) - t(&r[0], &r[1])).abs() < 1e-10);
    }

    #[test]
    fn kosaki_norm_grows_with_p(d in 1usize..=4, seed in any::<u64>()) {
        let space = Space::single("A", d).unwrap();
        let mut rng = rng_for(seed, 0);
        let sigma = random_full_rank(space.clone(), &mut rng);
        let x = random_operator(space, &mut rng);
        let v: Vec<f64> = [1.0, 1.5, 2.0].iter().map(|&p| kosaki_norm(&x, &sigma, p).unwrap()).collect();
        prop_assert!(v[0] <= v[1] * (1.0 + 1e-10) && v[1] <= v[2] * (1.0 + 1e-10), "{:?}", v);
    }

    #[test]
    fn fractional_powers_compose(d in 1usize..=4, rank in 1usize..=4, seed in any::<u64>()) {
        let rank = rank.min(d);
        let x = random_density_operator(Space::single("A", d).unwrap(), rank, seed).unwrap();
        for s in [0.25, 0.5, 1.0] {
            for t in [0.25, 0.5, 1.0] {
                let lhs = psd_power(x.matrix(), s) * psd_power(x.matrix(), t);
                prop_assert!(max_abs(&(lhs - psd_power(x.matrix(), s + t))) < 1e-9);
            }
        }
    }

    #[test]
    fn divergences_and_informations_are_nonnegative(seed in any::<u64>(), a in 1.0f64..2.0) {
        let space = Space::new([("A", 2), ("E", 2)]).unwrap();
        let rho = random_density_operator(space.clone(), 1 + (seed % 4) as usize, seed).unwrap();
        let sigma = random_density_operator(space, 4, seed ^ 7).unwrap();
        let order = RenyiOrder::new(a).unwrap();
        prop_assert!(sandwiched_divergence(&rho, &sigma, order).unwrap() >= -1e-10);
        let tau = rho.marginal(&Subsystems::new(["A"]).unwrap()).unwrap();
        let info = renyi_information(&rho, &tau, &Subsystems::new(["E"]).unwrap(), order, &MinimizerOptions::fast()).unwrap();
        prop_assert!(info.objective >= -1e-9);
    }

    #[test]
    fn random_channels_preserve_trace(seed in any::<u64>(), nk in 1usize..=4) {
        let mut rng = rng_for(seed, 0);
        let ch = presets::random(2, &[2, 2], nk, &mut rng).unwrap();
        let rho = random_full_rank(Space::new([("A", 2), ("R", 2)]).unwrap(), &mut rng);
        let out = ch.apply(&rho).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-9);
        prop_assert_eq!(out.space().labels(), ["B1", "B2", "R"]);
        let u = ch.stinespring("E").unwrap();
        prop_assert!(u.isometry_error() < 1e-10);
    }

    #[test]
    fn choi_of_random_channel_has_identity_input_marginal(seed in any::<u64>()) {
        let mut rng = rng_for(seed, 0);
        let ch = presets::random(3, &[2], 3, &mut rng).unwrap();
        let j = Operator::new(Space::new([("A", 3), ("B", 2)]).unwrap(), ch.choi()).unwrap();
        let ja = j.partial_trace(&Subsystems::new(["A"]).unwrap()).unwrap();
        prop_assert!(max_abs(&(ja.matrix() - Mat::identity(3, 3))) < 1e-10);
        prop_assert!(eigvalsh(&j.matrix().clone()).into_iter().all(|l| l > -1e-10));
    }
}
