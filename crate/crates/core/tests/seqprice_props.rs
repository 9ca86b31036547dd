use proptest::prelude::*;

use pubgood::distkit::ValueDistribution;
use pubgood::netmodel::generate;
use pubgood::seqprice::{
    best_ordering_revenue, clique_committed_optimum, clique_subgame_perfect, greedy_reverse_mis, live_set,
    live_vs_greedy, pn_formula, sequential_revenue, Ordering,
};
use pubgood::simkit::mwis_exact;
use pubgood::{Graph, GraphKind};

fn graph_and_order() -> impl Strategy<Value = (Graph, Ordering)> {
    (1usize..14, 0.0..0.9f64, any::<u64>()).prop_flat_map(|(n, prob, seed)| {
        let g = generate(&GraphKind::RandomGnp { n, prob, seed }).unwrap();
        Just((0..n).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(move |order| (g.clone(), Ordering::new(order).unwrap()))
    })
}

fn is_maximal(g: &Graph, set: &[usize]) -> bool {
    (0..g.n()).all(|i| set.contains(&i) || g.neighbors(i).iter().any(|j| set.contains(j)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn live_and_greedy_sets((g, order) in graph_and_order()) {
        let live = live_set(&g, &order).unwrap();
        let greedy = greedy_reverse_mis(&g, &order).unwrap();
        prop_assert!(g.is_independent(&live));
        prop_assert!(g.is_independent(&greedy) && is_maximal(&g, &greedy));
        // Every live player is taken by the reverse greedy pass.
        prop_assert!(live.iter().all(|i| greedy.contains(i)));
        let cmp = live_vs_greedy(&g, &order).unwrap();
        prop_assert_eq!(cmp.agree, cmp.live == cmp.greedy);
    }

    #[test]
    fn live_set_bounded_by_independence_number((g, order) in graph_and_order()) {
        let alpha = mwis_exact(&g, &vec![1.0f64; g.n()]).unwrap().set.len();
        prop_assert!(live_set(&g, &order).unwrap().len() <= alpha);
        let u = ValueDistribution::uniform(0.0, 1.0).unwrap();
        let best = best_ordering_revenue(&g, &u).unwrap();
        prop_assert_eq!(best.mis_size, alpha);
        prop_assert_eq!(live_set(&g, &best.ordering).unwrap().len(), alpha);
        prop_assert!((best.revenue - alpha as f64 * 0.25).abs() < 1e-12);
        let seq = sequential_revenue(&g, &order, &u, 0.5).unwrap();
        prop_assert!(seq.revenue <= best.revenue + 1e-12);
    }

    #[test]
    fn reserve_is_best_sequential_price((g, order) in graph_and_order(), p in 0.01..0.99f64) {
        let e = ValueDistribution::exponential(1.0).unwrap();
        let s = sequential_revenue(&g, &order, &e, p).unwrap();
        prop_assert!(s.revenue <= s.optimal_revenue + 1e-12);
        prop_assert_eq!(s.optimal_price, 1.0);
    }
}

#[test]
fn subgame_perfect_closed_forms() {
    for n in 1..=30 {
        let policy = clique_subgame_perfect(n).unwrap();
        let pn: f64 = pn_formula(n);
        assert!((policy.prices[0] - pn).abs() < 1e-9);
        assert!((policy.revenue - (1.0 - 0.5f64.powi(n as i32)) * pn).abs() < 1e-9);
        // Stage sale probabilities sum to the overall sale probability.
        let total: f64 = policy.stage_sale_probs.iter().sum();
        assert!(total <= 1.0 + 1e-12);
    }
    // Hand values: n = 1 sells at 1/2 for 1/4; n = 2 first price 3/8, revenue 9/32.
    assert_eq!(clique_subgame_perfect(1).unwrap().revenue, 0.25);
    let two = clique_subgame_perfect(2).unwrap();
    assert!((two.prices[0] - 0.375).abs() < 1e-15 && (two.revenue - 9.0 / 32.0).abs() < 1e-15);
}

#[test]
fn commitment_dominates() {
    for n in 1..=8 {
        let c = clique_committed_optimum(n, 3, 5).unwrap();
        let spe = clique_subgame_perfect(n).unwrap().revenue;
        assert!(c.policy.revenue >= spe - 1e-12, "n={n}: {} < {spe}", c.policy.revenue);
        assert!(c.policy.revenue <= 1.0 / std::f64::consts::E + 1e-3);
    }
    assert!(clique_committed_optimum(21, 1, 0).is_err());
}
