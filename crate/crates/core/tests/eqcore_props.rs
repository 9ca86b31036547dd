use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pubgood::distkit::ValueDistribution;
use pubgood::eqcore::{
    best_response, expected_revenue, sample_clique_equilibrium, solve_fixed_point, symmetric_threshold,
    verify_equilibrium, PriceVector, SolverConfig, Status, Threshold, ThresholdVector,
};
use pubgood::netmodel::generate;
use pubgood::{Graph, GraphKind};

fn dist() -> impl Strategy<Value = ValueDistribution<f64>> {
    prop_oneof![
        Just(ValueDistribution::uniform(0.0, 1.0).unwrap()),
        (0.5..3.0f64).prop_map(|r| ValueDistribution::exponential(r).unwrap()),
    ]
}

fn small_graph() -> impl Strategy<Value = Graph> {
    (1usize..12, 0.0..0.8f64, any::<u64>())
        .prop_map(|(n, prob, seed)| generate(&GraphKind::RandomGnp { n, prob, seed }).unwrap())
}

fn thresholds(values: &[f64], dist: &ValueDistribution<f64>) -> ThresholdVector<f64> {
    ThresholdVector::candidate(values.iter().map(|&t| Threshold::capped(t, dist)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn two_node_drift_converges(
        p0 in 0.05..0.95f64,
        gap in prop_oneof![Just(0.0), 1e-4..1e-3f64, -1e-3..-1e-4f64],
    ) {
        // Unequal prices on an edge: the unique equilibrium has one node
        // never buying, reached only after a drift whose speed is
        // proportional to the log price ratio.
        let u = ValueDistribution::uniform(0.0, 1.0).unwrap();
        let g = generate(&GraphKind::Path { n: 2 }).unwrap();
        let prices = PriceVector::new(vec![p0, (p0 + gap).clamp(0.01, 0.99)]).unwrap();
        let t = solve_fixed_point(&g, &u, &prices, &SolverConfig::default()).unwrap();
        prop_assert!(verify_equilibrium(&g, &u, &prices, &t, 1e-9).unwrap().valid);
    }

    #[test]
    fn solver_output_verifies(g in small_graph(), d in dist(), raw in prop::collection::vec(0.05..0.9f64, 12)) {
        let scale = d.quantile(0.9).unwrap();
        let prices = PriceVector::new(raw[..g.n()].iter().map(|p| p * scale).collect()).unwrap();
        let t = solve_fixed_point(&g, &d, &prices, &SolverConfig::default()).unwrap();
        prop_assert_eq!(t.status, Status::Verified);
        let v = verify_equilibrium(&g, &d, &prices, &t, 1e-9).unwrap();
        prop_assert!(v.valid, "residual {} at {:?}", v.residual, v.witnesses);
        // Box: every threshold at least its price.
        for (th, &p) in t.values.iter().zip(&prices.prices) {
            prop_assert!(th.value_or_cap(&d) >= p * (1.0 - 1e-12));
        }
    }

    #[test]
    fn best_response_is_antitone(
        g in small_graph(),
        d in dist(),
        lo in prop::collection::vec(0.0..1.0f64, 12),
        bump in prop::collection::vec(0.0..1.0f64, 12),
        p in 0.05..0.6f64,
    ) {
        let n = g.n();
        let hi_cap = d.support_hi.min(5.0);
        let t: Vec<f64> = lo[..n].iter().map(|u| p + u * (hi_cap - p)).collect();
        let t2: Vec<f64> = t.iter().zip(&bump).map(|(&a, &b)| a + b * (hi_cap - a)).collect();
        let prices = PriceVector::uniform(n, p).unwrap();
        let a = best_response(&g, &d, &prices, &thresholds(&t, &d)).unwrap();
        let b = best_response(&g, &d, &prices, &thresholds(&t2, &d)).unwrap();
        for i in 0..n {
            prop_assert!(a.values[i].value_or_cap(&d) >= b.values[i].value_or_cap(&d) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn clique_continuum(n in 1usize..25, p in 0.01..0.99f64, seed in any::<u64>()) {
        let u = ValueDistribution::uniform(0.0, 1.0).unwrap();
        let g = generate(&GraphKind::Clique { n }).unwrap();
        let prices = PriceVector::uniform(n, p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = ThresholdVector::candidate(sample_clique_equilibrium(n, p, &mut rng));
        let prod: f64 = t.values.iter().map(|x| x.value_or_cap(&u)).product();
        prop_assert!((prod - p).abs() < 1e-12);
        prop_assert!(verify_equilibrium(&g, &u, &prices, &t, 1e-9).unwrap().valid);
    }

    #[test]
    fn symmetric_matches_solver(n in 2usize..15, d in dist(), q in 0.05..0.8f64) {
        let p = q * d.quantile(0.5).unwrap();
        let g = generate(&GraphKind::Clique { n }).unwrap();
        let prices = PriceVector::uniform(n, p).unwrap();
        let sym = symmetric_threshold(n - 1, &d, p).unwrap();
        let t = solve_fixed_point(&g, &d, &prices, &SolverConfig::default()).unwrap();
        for x in &t.values {
            prop_assert!((x.value_or_cap(&d) - sym.value_or_cap(&d)).abs() < 1e-8);
        }
    }

    #[test]
    fn threshold_json_round_trip(vals in prop::collection::vec(prop::option::of(0.0..1.0f64), 0..10)) {
        let t = ThresholdVector::candidate(
            vals.iter().map(|v| v.map_or(Threshold::NeverBuy, Threshold::Finite)).collect(),
        );
        let back = ThresholdVector::<f64>::from_json(&t.to_json()).unwrap();
        prop_assert_eq!(back.values, t.values);
    }
}

#[test]
fn star_center_free_rides() {
    // Leaves buy at p; the centre's best response exceeds the cap.
    let u = ValueDistribution::uniform(0.0, 1.0).unwrap();
    let g = generate(&GraphKind::Star { leaves: 6 }).unwrap();
    let prices = PriceVector::uniform(7, 0.5).unwrap();
    let t = solve_fixed_point(&g, &u, &prices, &SolverConfig::default()).unwrap();
    assert!(verify_equilibrium(&g, &u, &prices, &t, 1e-9).unwrap().valid);
    let rev = expected_revenue(&prices, &t, &u).unwrap().expected_revenue;
    assert!(rev > 0.0 && rev <= 7.0 * 0.25);
}

#[test]
fn f32_symmetric_threshold() {
    let u = ValueDistribution::<f32>::uniform(0.0, 1.0).unwrap();
    let t = symmetric_threshold(2, &u, 0.125f32).unwrap().finite().unwrap();
    assert!((t - 0.5).abs() < 1e-5);
}
