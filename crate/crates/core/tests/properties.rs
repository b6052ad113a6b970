use cdqaoa::analytics::{conjectured_min_ring, residual_energy, upper_bound_ring};
use cdqaoa::dense::dense_spectrum;
use cdqaoa::fermion::{run_circuit, CircuitEvaluator};
use cdqaoa::model::{
    expand_constrained, make_open_random, make_ring_uniform, params_per_step, spectrum_bounds, AngleSchedule,
    Boundary, ChainSpec, Variant,
};
use cdqaoa::optimizer::{interp_extend, Method, OptimizerConfig, Problem, Strategy as Search};
use proptest::prelude::*;
use std::f64::consts::PI;

fn variant() -> impl Strategy<Value = Variant> {
    prop::sample::select(Variant::ALL.to_vec())
}

fn schedule(max_steps: usize) -> impl Strategy<Value = AngleSchedule> {
    (variant(), 1..=max_steps).prop_flat_map(|(v, p)| {
        prop::collection::vec(-PI..PI, p * params_per_step(v))
            .prop_map(move |xs| AngleSchedule::from_flat(v, p, xs).unwrap())
    })
}

fn open_chain() -> impl Strategy<Value = ChainSpec> {
    (2usize..12, prop::collection::vec(-1.0f64..1.0, 11))
        .prop_map(|(n, js)| ChainSpec::new(n, Boundary::Open, js[..n - 1].to_vec()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_chains_are_pure_functions_of_seed(n in 2usize..30, seed: u64) {
        let a = make_open_random(n, seed).unwrap();
        let b = make_open_random(n, seed).unwrap();
        prop_assert_eq!(a.couplings(), b.couplings());
        prop_assert!(a.couplings().iter().all(|j| (-1.0..=1.0).contains(j)));
    }

    #[test]
    fn open_bounds_are_sum_of_couplings(spec in open_chain()) {
        let total: f64 = spec.couplings().iter().map(|j| j.abs()).sum();
        let b = spectrum_bounds(&spec);
        prop_assert_eq!((b.e_min, b.e_max), (-total, total));
        let dense = dense_spectrum(&spec).unwrap();
        prop_assert!((dense.e_min - b.e_min).abs() < 1e-12);
        prop_assert!((dense.e_max - b.e_max).abs() < 1e-12);
    }

    #[test]
    fn interp_guess_is_convex(prev in schedule(6)) {
        let next = interp_extend(&prev);
        let p = prev.steps();
        prop_assert_eq!(next.steps(), p + 1);
        for f in 0..prev.width() {
            let old = prev.family(f);
            let new = next.family(f);
            for i in 0..=p {
                let left = if i == 0 { 0.0 } else { old[i - 1] };
                let right = if i == p { 0.0 } else { old[i] };
                prop_assert!(new[i] >= left.min(right) - 1e-15 && new[i] <= left.max(right) + 1e-15);
            }
        }
    }

    #[test]
    fn energies_within_spectrum(s in schedule(3), seed in 0u64..1000) {
        let spec = make_open_random(8, seed).unwrap();
        let e = run_circuit(&spec, &s).unwrap();
        let r = residual_energy(e, spectrum_bounds(&spec)).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&r));
    }

    #[test]
    fn constrained_embedding_preserves_cost(
        two in prop::bool::ANY,
        p in 1usize..4,
        xs in prop::collection::vec(-PI..PI, 6),
    ) {
        let v = if two { Variant::Qaoa2Cd2p } else { Variant::QaoaCd2p };
        let s = AngleSchedule::from_flat(v, p, xs[..2 * p].to_vec()).unwrap();
        let free = expand_constrained(&s).unwrap();
        prop_assert!(matches!(params_per_step(free.variant()), 3 | 5));
        let spec = make_open_random(7, p as u64).unwrap();
        let ev = CircuitEvaluator::new(&spec).unwrap();
        prop_assert!((ev.energy(&s).unwrap() - ev.energy(&free).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn mixer_angle_has_period_pi(s in schedule(3), k in 0usize..3) {
        let spec = make_open_random(6, 11).unwrap();
        let ev = CircuitEvaluator::new(&spec).unwrap();
        prop_assume!(!s.variant().is_constrained());
        let k = k % s.steps();
        let mut shifted = s.values().to_vec();
        shifted[k * s.width() + 1] += PI;
        let t = AngleSchedule::from_flat(s.variant(), s.steps(), shifted).unwrap();
        prop_assert!((ev.energy(&s).unwrap() - ev.energy(&t).unwrap()).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn optimizer_is_deterministic_and_bounded(seed in 0u64..500, v in variant()) {
        let spec = make_open_random(6, seed).unwrap();
        let problem = Problem::new(&spec).unwrap();
        let cfg = OptimizerConfig {
            method: Method::NumericGradientQuasiNewton,
            restarts: 3,
            seed,
            max_evals: 3000,
            ..Default::default()
        };
        let a = problem.sweep_depth(v, 2, Search::MultiStart, &cfg).unwrap();
        let b = problem.sweep_depth(v, 2, Search::MultiStart, &cfg).unwrap();
        let bounds = spectrum_bounds(&spec);
        let mut last = f64::INFINITY;
        for (x, y) in a.iter().zip(&b) {
            let (x, y) = (x.as_ref().unwrap(), y.as_ref().unwrap());
            prop_assert_eq!(x.best_angles.values(), y.best_angles.values());
            prop_assert!(x.best_energy >= bounds.e_min - 1e-9);
            prop_assert!(x.best_energy <= last + 1e-12);
            last = x.best_energy;
        }
    }
}

#[test]
fn ring_bound_identity() {
    for n in 4..=30 {
        let b = spectrum_bounds(&make_ring_uniform(n).unwrap());
        let mut prev = f64::INFINITY;
        for p in 1..=20 {
            let eps = upper_bound_ring(n, p);
            let via_min = residual_energy(conjectured_min_ring(n, p), b).unwrap();
            assert!((eps - via_min).abs() < 1e-12, "N={n} p={p}: {eps} vs {via_min}");
            assert!(eps <= prev);
            prev = eps;
            if 2 * p >= n {
                assert_eq!(eps, 0.0);
            }
        }
    }
}
