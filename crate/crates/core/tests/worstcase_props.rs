use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pubgood::distkit::ValueDistribution;
use pubgood::eqcore::{
    expected_revenue, solve_fixed_point_from, thresholds_from_x, verify_equilibrium, x_from_thresholds, PriceVector,
    SolverConfig,
};
use pubgood::netmodel::{generate, pentagon_gadget};
use pubgood::worstcase::{min_sum_x, worst_case_revenue_bounds, ExactWorstCase, FeasibleAssignment};
use pubgood::{Graph, GraphKind};

fn small_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n, 0.0..0.9f64, any::<u64>())
        .prop_map(|(n, prob, seed)| generate(&GraphKind::RandomGnp { n, prob, seed }).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn sandwich_and_argmin_invariants(g in small_graph(10)) {
        let exact = ExactWorstCase::<f64>::new(&g).unwrap();
        let u = ValueDistribution::uniform(0.0, 1.0).unwrap();
        for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let res = exact.at(p).unwrap();
            let r = res.exact_min_revenue.unwrap();
            prop_assert!(res.lower_bound <= r + 1e-9 && r <= res.upper_bound + 1e-9);
            let argmin = res.argmin.unwrap();
            prop_assert!(argmin.is_feasible(), "{:?}", argmin.violations());
            // Stored sums and support agree with a recomputation.
            let again = FeasibleAssignment::new(&g, argmin.x.clone());
            prop_assert_eq!(&again.closed_nbhd_sums, &argmin.closed_nbhd_sums);
            prop_assert_eq!(&again.support, &argmin.support);
            let t = thresholds_from_x(&u, &argmin.x, p).unwrap();
            let prices = PriceVector::uniform(g.n(), p).unwrap();
            prop_assert!(verify_equilibrium(&g, &u, &prices, &t, 1e-8).unwrap().valid);
            let rev = expected_revenue(&prices, &t, &u).unwrap().expected_revenue;
            prop_assert!((rev - r).abs() < 1e-9);
        }
    }

    #[test]
    fn branch_and_bound_matches_enumeration(g in small_graph(10)) {
        let exact = ExactWorstCase::<f64>::new(&g).unwrap();
        let bnb = min_sum_x::<f64>(&g).unwrap();
        prop_assert!((bnb.value - exact.min_sum_x()).abs() < 1e-7);
        prop_assert!(bnb.argmin.is_feasible());
        let b = worst_case_revenue_bounds(&g, 0.5).unwrap();
        prop_assert!((b.min_sum_x - bnb.value).abs() < 1e-12);
    }

    #[test]
    fn isolated_node_adds_one(g in small_graph(9)) {
        let bigger = g.with_isolated_node();
        let a = min_sum_x::<f64>(&g).unwrap().value;
        let b = min_sum_x::<f64>(&bigger).unwrap().value;
        prop_assert!((b - a - 1.0).abs() < 1e-7);
        let ea = ExactWorstCase::<f64>::new(&g).unwrap().min_sum_x();
        let eb = ExactWorstCase::<f64>::new(&bigger).unwrap().min_sum_x();
        prop_assert!((eb - ea - 1.0).abs() < 1e-7);
    }
}

/// Random search over verified equilibria never beats the enumerator.
#[test]
fn random_equilibria_never_beat_exact() {
    let u = ValueDistribution::uniform(0.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut checked = 0;
    for k in 0..5u64 {
        let n = rng.gen_range(4..=8);
        let g = generate(&GraphKind::RandomGnp { n, prob: 0.45, seed: k }).unwrap();
        let exact = ExactWorstCase::<f64>::new(&g).unwrap();
        for &p in &[0.2, 0.5, 0.8] {
            let floor = exact.min_revenue(p);
            let prices = PriceVector::uniform(n, p).unwrap();
            for _ in 0..6_667 {
                let start: Vec<f64> = (0..n).map(|_| rng.gen_range(p..=1.0)).collect();
                let Ok(t) = solve_fixed_point_from(&g, &u, &prices, &start, &SolverConfig::default()) else {
                    continue;
                };
                if !verify_equilibrium(&g, &u, &prices, &t, 1e-9).unwrap().valid {
                    continue;
                }
                checked += 1;
                let rev = expected_revenue(&prices, &t, &u).unwrap().expected_revenue;
                assert!(
                    rev >= floor - 1e-8,
                    "graph {k}, p = {p}: found {rev} below exact {floor}"
                );
                let x = x_from_thresholds(&u, &t, p).unwrap();
                let fa = FeasibleAssignment::new(&g, x);
                assert!(fa.closed_nbhd_sums.iter().all(|&s| s >= 1.0 - 1e-6));
            }
        }
    }
    assert!(checked >= 90_000, "only {checked} verified equilibria");
}

#[test]
fn pentagon_single_copy() {
    // Fractional cycle point x = 1/3 on the cycle is in X.
    let g = pentagon_gadget(1);
    let exact = ExactWorstCase::<f64>::new(&g).unwrap();
    assert!(exact.min_sum_x() <= 5.0 / 3.0 + 1e-9);
    let mut x = vec![0.0; g.n()];
    x[..5].fill(1.0 / 3.0);
    assert!(FeasibleAssignment::new(&g, x).is_feasible());
}

#[test]
fn clique_and_empty_closed_forms() {
    for n in 1..=8 {
        let k = generate(&GraphKind::Clique { n }).unwrap();
        let e = generate(&GraphKind::Empty { n }).unwrap();
        assert!((ExactWorstCase::<f64>::new(&k).unwrap().min_sum_x() - 1.0).abs() < 1e-9);
        assert!((ExactWorstCase::<f64>::new(&e).unwrap().min_sum_x() - n as f64).abs() < 1e-9);
        // Clique: concave objective on the simplex is minimised at a corner.
        let p: f64 = 0.4;
        let r = ExactWorstCase::<f64>::new(&k).unwrap().min_revenue(p);
        assert!((r - p * (1.0 - p)).abs() < 1e-12);
    }
}
