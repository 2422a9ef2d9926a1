use num_bigint::BigUint;
use qbsim_core::bounds::*;
use qbsim_core::channel::{channel_error_exponent, presets, InputOptions, RateVector};
use qbsim_core::random::random_density_operator;
use qbsim_core::{DensityOperator, Space, Subset};

fn opts() -> InputOptions {
    InputOptions::default()
}

fn product_constant() -> qbsim_core::QuantumChannel {
    let s1 = random_density_operator(Space::single("S1", 2).unwrap(), 2, 21).unwrap();
    let s2 = random_density_operator(Space::single("S2", 2).unwrap(), 2, 22).unwrap();
    presets::constant(2, &s1.tensor(&s2).unwrap()).unwrap()
}

#[test]
fn prefactor_values() {
    let p = BlocklengthParams::new(1, 2, 2, 2).unwrap();
    assert_eq!(prefactor_exponent_twice(&p), 15);
    assert!((log2_prefactor(&p) - 7.5).abs() < 1e-15);
    assert!((prefactor(&p) - 181.019_335_983_756_2).abs() < 1e-9);
    // L = 1: (n+1)^{2(|A|²-1)}.
    let p = BlocklengthParams::new(3, 1, 2, 2).unwrap();
    assert!((prefactor(&p) - 4f64.powi(6)).abs() < 1e-6);
    assert!(BlocklengthParams::new(1, 0, 2, 2).is_err());
}

#[test]
fn counting_constants() {
    let p = |n| BlocklengthParams::new(n, 2, 2, 2).unwrap();
    assert_eq!(postselection_prefactor(&p(0)), BigUint::from(1u32));
    assert_eq!(postselection_prefactor(&p(1)), BigUint::from(8u32));
    assert_eq!(postselection_prefactor(&p(3)), BigUint::from(64u32));
    assert_eq!(caratheodory_size(&p(0)), BigUint::from(1u32));
    assert_eq!(caratheodory_size(&p(1)), BigUint::from(64u32));
    assert_eq!(caratheodory_size(&p(2)), BigUint::from(729u32));
    // Exact beyond f64 range of integers.
    let big = BlocklengthParams::new(1000, 2, 3, 3).unwrap();
    assert_eq!(postselection_prefactor(&big), BigUint::from(1001u32).pow(8));
}

#[test]
fn composite_prefactor_is_dominated() {
    for n in 0..=1000 {
        for d in 1..=3 {
            let c = composite_prefactor_check(&BlocklengthParams::new(n, 2, d, d).unwrap());
            assert!(c.holds, "{c:?}");
        }
    }
}

#[test]
fn constant_channel_matches_hand_formula() {
    let ch = product_constant();
    let rates = RateVector::new(vec![1.0, 1.0]).unwrap();
    let params = BlocklengthParams::new(10, 2, 2, 2).unwrap();
    let rep = one_shot_simulation_bound(&ch, &rates, &params, &opts()).unwrap();
    let mut radicand = 0.0;
    for t in &rep.per_subset_terms {
        let r = t.subset.len() as f64;
        assert!((t.exponent - r / 2.0).abs() < 1e-9, "{t:?}");
        assert!((t.log2_term - (r - 10.0 * r / 2.0)).abs() < 1e-7);
        radicand += 2f64.powf(r) * 2f64.powf(-10.0 * r / 2.0);
    }
    let hand = prefactor(&params) * radicand.sqrt();
    assert!((rep.epsilon_bound / hand - 1.0).abs() < 1e-7);
    assert!((rep.exponent_lower - 0.25).abs() < 1e-9);

    let lower = simulation_exponent_lower(&ch, &RateVector::new(vec![2.0, 2.0]).unwrap(), &opts()).unwrap();
    // ½ · min{r₁/2, r₂/2, (r₁+r₂)/2} = ½ · 1.
    assert!((lower - 0.5).abs() < 1e-9, "{lower}");
}

#[test]
fn boundary_rates_give_zero_exponent() {
    let ch = presets::identity(2).unwrap();
    let lower = simulation_exponent_lower(&ch, &RateVector::new(vec![2.0]).unwrap(), &opts()).unwrap();
    assert!(lower.abs() < 1e-6, "{lower}");
}

#[test]
fn interior_bound_decreases_in_n() {
    let sigma = DensityOperator::maximally_mixed(Space::single("S", 2).unwrap());
    let ch = presets::product_broadcast(&presets::depolarizing(0.3).unwrap(), &sigma).unwrap();
    let rates = RateVector::new(vec![1.6, 0.4]).unwrap();
    let exps = subset_exponents(&ch, &rates, &opts()).unwrap();
    assert!(exps.iter().all(|e| e.exponent > 0.0), "{exps:?}");
    let p = BlocklengthParams::new(1, 2, 2, 2).unwrap();
    let eps: Vec<f64> = [100, 1000, 10_000]
        .iter()
        .map(|&n| simulation_bound_from_exponents(&p.with_n(n), &exps).log2_epsilon_bound)
        .collect();
    assert!(eps[0] > eps[1] && eps[1] > eps[2], "{eps:?}");
    assert!(eps[2] < -10.0);
}

#[test]
fn exponent_lower_matches_independent_recomputation() {
    let mut rng = qbsim_core::random::rng_for(31, 0);
    let ch = presets::random(2, &[2, 2], 2, &mut rng).unwrap();
    let rates = RateVector::new(vec![2.5, 2.5]).unwrap();
    let lower = simulation_exponent_lower(&ch, &rates, &opts()).unwrap();
    let oracle = Subset::nonempty(2)
        .map(|s| channel_error_exponent(&ch, s, rates.sum_over(s), &opts()).unwrap().value)
        .fold(f64::INFINITY, f64::min)
        / 2.0;
    assert!(lower > 0.0);
    assert!((lower - oracle).abs() < 1e-6, "{lower} vs {oracle}");
}

#[test]
fn slope_approaches_half_min_exponent() {
    let ch = product_constant();
    let rates = RateVector::new(vec![1.0, 0.6]).unwrap();
    let exps = subset_exponents(&ch, &rates, &opts()).unwrap();
    let p = BlocklengthParams::new(100_000, 2, 2, 2).unwrap();
    let slope = bound_slope(&p, &exps, 1000);
    let lower = simulation_bound_from_exponents(&p, &exps).exponent_lower;
    assert!((slope - lower).abs() < 1e-3, "{slope} vs {lower}");
}

#[test]
fn two_party_display_is_below_general_form() {
    let p = BlocklengthParams::new(50, 2, 2, 2).unwrap();
    let (e1, e2, e12) = (0.1, 0.2, 0.15);
    let exps: Vec<SubsetExponent> = [(Subset::singleton(0), e1), (Subset::singleton(1), e2), (Subset::full(2), e12)]
        .into_iter()
        .map(|(subset, exponent)| SubsetExponent { subset, rate: 0.0, exponent, alpha_star: 1.0, threshold: 0.0 })
        .collect();
    let general = simulation_bound_from_exponents(&p, &exps).epsilon_bound;
    let two = two_party_simulation_bound(&p, e1, e2, e12);
    let d = |e: f64| 2f64.powf(-50.0 * e);
    let hand = prefactor(&p) * (2.0 * d(e12) + d(e1) + d(e2)).sqrt();
    assert!((two / hand - 1.0).abs() < 1e-12);
    assert!(two < general);
}

#[test]
fn bound_is_nonincreasing_in_each_rate() {
    let sigma = DensityOperator::maximally_mixed(Space::single("S", 2).unwrap());
    let ch = presets::product_broadcast(&presets::dephasing(0.5).unwrap(), &sigma).unwrap();
    let p = BlocklengthParams::new(200, 2, 2, 2).unwrap();
    let eval = |r1: f64, r2: f64| {
        one_shot_simulation_bound(&ch, &RateVector::new(vec![r1, r2]).unwrap(), &p, &opts())
            .unwrap()
            .log2_epsilon_bound
    };
    let base = eval(1.5, 0.5);
    assert!(eval(1.7, 0.5) <= base + 1e-9);
    assert!(eval(1.5, 0.7) <= base + 1e-9);
}

#[test]
fn moderate_curve_for_constant_channel() {
    let ch = product_constant();
    let mut schedule = ModerateSchedule::new(0.25, vec![16, 256, 4096]).unwrap();
    schedule.scales = Some(Subset::nonempty(2).map(|s| (s, 1.0)).collect());
    let rep = moderate_deviation_curve(&ch, &schedule, &opts()).unwrap();
    for row in &rep.rows {
        let a = (row.n as f64).powf(-0.25);
        assert!((row.a_n - a).abs() < 1e-15);
        // Thresholds vanish: r1 = a, r2 = max(a, 2a - r1) = a.
        assert!((row.rates[0] - a).abs() < 1e-9 && (row.rates[1] - a).abs() < 1e-9, "{row:?}");
        let n = row.n as f64;
        let terms = [(1.0, a), (1.0, a), (2.0, 2.0 * a)];
        let radicand: f64 = terms.iter().map(|(k, r)| 2f64.powf(*k - n * r / 2.0)).sum();
        let p = BlocklengthParams::new(row.n, 2, 2, 2).unwrap();
        let hand = log2_prefactor(&p) + 0.5 * radicand.log2();
        assert!((row.log2_bound - hand).abs() < 1e-6, "{} vs {hand}", row.log2_bound);
    }
    assert!(ModerateSchedule::new(0.5, vec![10]).is_err());
    assert!(ModerateSchedule::new(0.2, vec![]).is_err());
}

#[test]
fn offset_rates_meet_every_constraint() {
    let th = vec![(Subset::singleton(0), 0.3), (Subset::singleton(1), 0.2), (Subset::full(2), 1.0)];
    let sc = vec![(Subset::singleton(0), 1.0), (Subset::singleton(1), 2.0), (Subset::full(2), 0.5)];
    let a = 0.1;
    let r = offset_rates(2, &th, &sc, a);
    assert!((r[0] - 0.4).abs() < 1e-12);
    assert!((r[1] - 0.65).abs() < 1e-12);
    for ((s, t), (_, c)) in th.iter().zip(&sc) {
        let rs: f64 = s.members().map(|l| r[l]).sum();
        assert!(rs >= t + c * a - 1e-12);
    }
}
