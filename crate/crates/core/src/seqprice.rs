//! Sequential sales: players are approached one at a time in a fixed order
//! and each is approached exactly once.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distkit::ValueDistribution;
use crate::error::{Error, Result};
use crate::netmodel::Graph;
use crate::numeric::golden_max;
use crate::scalar::Scalar;
use crate::simkit;

/// A permutation of the nodes; `order[k]` is approached at step `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ordering {
    pub order: Vec<usize>,
}

impl Ordering {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &i in &order {
            if i >= order.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Domain(format!(
                    "ordering is not a permutation of 0..{}",
                    order.len()
                )));
            }
        }
        Ok(Self { order })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let order: Vec<usize> = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        Self::new(order)
    }

    /// `position[i]` is the step at which node `i` is approached.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (k, &i) in self.order.iter().enumerate() {
            pos[i] = k;
        }
        pos
    }

    fn check(&self, graph: &Graph) -> Result<()> {
        if self.order.len() != graph.n() {
            return Err(Error::Domain(format!(
                "ordering has {} entries for {} nodes",
                self.order.len(),
                graph.n()
            )));
        }
        Ok(())
    }
}

/// Players approached after all of their neighbours, sorted by index.
pub fn live_set(graph: &Graph, ordering: &Ordering) -> Result<Vec<usize>> {
    ordering.check(graph)?;
    let pos = ordering.positions();
    let live: Vec<usize> = (0..graph.n())
        .filter(|&i| graph.neighbors(i).iter().all(|&j| pos[j] < pos[i]))
        .collect();
    assert!(graph.is_independent(&live), "live set must be independent");
    Ok(live)
}

/// Reverse-order greedy maximal independent set, sorted by index.
pub fn greedy_reverse_mis(graph: &Graph, ordering: &Ordering) -> Result<Vec<usize>> {
    ordering.check(graph)?;
    let mut taken = vec![false; graph.n()];
    for &i in ordering.order.iter().rev() {
        if !graph.neighbors(i).iter().any(|&j| taken[j]) {
            taken[i] = true;
        }
    }
    let set: Vec<usize> = (0..graph.n()).filter(|&i| taken[i]).collect();
    assert!(graph.is_independent(&set));
    assert!(
        (0..graph.n()).all(|i| taken[i] || graph.neighbors(i).iter().any(|&j| taken[j])),
        "greedy set must be maximal"
    );
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiveGreedyComparison {
    pub live: Vec<usize>,
    pub greedy: Vec<usize>,
    pub agree: bool,
}

/// Compares the live set with the reverse greedy set for one ordering.
pub fn live_vs_greedy(graph: &Graph, ordering: &Ordering) -> Result<LiveGreedyComparison> {
    let live = live_set(graph, ordering)?;
    let greedy = greedy_reverse_mis(graph, ordering)?;
    let agree = live == greedy;
    Ok(LiveGreedyComparison { live, greedy, agree })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequentialRevenue<S> {
    pub price: S,
    pub live: Vec<usize>,
    pub revenue: S,
    /// Revenue at the Myerson reserve, the best price for this ordering.
    pub optimal_price: S,
    pub optimal_revenue: S,
}

/// `|live| * p * (1 - F(p))`: live players buy iff their value reaches `p`.
pub fn sequential_revenue<S: Scalar>(
    graph: &Graph,
    ordering: &Ordering,
    dist: &ValueDistribution<S>,
    p: S,
) -> Result<SequentialRevenue<S>> {
    let live = live_set(graph, ordering)?;
    let k = S::count(live.len());
    let r = dist.myerson_reserve()?;
    Ok(SequentialRevenue {
        price: p,
        revenue: k * p * dist.survival(p),
        optimal_price: r,
        optimal_revenue: k * r * dist.survival(r),
        live,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestOrdering<S> {
    pub revenue: S,
    pub ordering: Ordering,
    pub mis_size: usize,
}

/// Places a maximum independent set last, so exactly it is live.
pub fn best_ordering_revenue<S: Scalar>(graph: &Graph, dist: &ValueDistribution<S>) -> Result<BestOrdering<S>> {
    let mis = simkit::mwis_exact(graph, &vec![S::one(); graph.n()])?.set;
    let mut in_mis = vec![false; graph.n()];
    for &i in &mis {
        in_mis[i] = true;
    }
    let order: Vec<usize> = (0..graph.n())
        .filter(|&i| !in_mis[i])
        .chain(mis.iter().copied())
        .collect();
    let ordering = Ordering::new(order)?;
    debug_assert_eq!(live_set(graph, &ordering)?, mis);
    let r = dist.myerson_reserve()?;
    Ok(BestOrdering {
        revenue: S::count(mis.len()) * r * dist.survival(r),
        ordering,
        mis_size: mis.len(),
    })
}

/// `P(n) = prod_{k=1}^n (1 - 2^{-k})`.
pub fn pn_formula(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 - 0.5f64.powi(k as i32)).product()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequentialPolicy {
    /// Prices in approach order.
    pub prices: Vec<f64>,
    pub thresholds: Vec<f64>,
    /// Probability that the stage is reached and the player buys.
    pub stage_sale_probs: Vec<f64>,
    pub revenue: f64,
}

impl SequentialPolicy {
    /// Builds the policy from committed prices on the `n`-clique with
    /// uniform(0,1) values: `T_i = min(p_i / (1 - s_{i+1}), 1)` where
    /// `s_{i+1}` is the probability some later player buys.
    pub fn from_prices(prices: Vec<f64>) -> Self {
        let n = prices.len();
        let mut thresholds = vec![1.0; n];
        let mut later = 0.0;
        for i in (0..n).rev() {
            let room = 1.0 - later;
            thresholds[i] = if room <= 0.0 {
                1.0
            } else {
                (prices[i] / room).clamp(0.0, 1.0)
            };
            later = (1.0 - thresholds[i]) + thresholds[i] * later;
        }
        let mut reach = 1.0;
        let mut stage_sale_probs = Vec::with_capacity(n);
        for &t in &thresholds {
            stage_sale_probs.push(reach * (1.0 - t));
            reach *= t;
        }
        let revenue = prices.iter().zip(&stage_sale_probs).map(|(p, q)| p * q).sum();
        Self {
            prices,
            thresholds,
            stage_sale_probs,
            revenue,
        }
    }
}

/// Subgame-perfect prices on the `n`-clique with uniform(0,1) values and no
/// commitment, by backward induction.
///
/// With continuation revenue `R` and continuation sale probability `s`, a
/// price `p` yields threshold `T = p / (1 - s)` and stage value
/// `p (1 - T) + T R`, maximised at `p = (1 - s + R) / 2`.
pub fn clique_subgame_perfect(n: usize) -> Result<SequentialPolicy> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let mut prices = vec![0.0; n];
    let (mut rest_revenue, mut rest_sale) = (0.0f64, 0.0f64);
    for i in (0..n).rev() {
        let q = 1.0 - rest_sale;
        let p = if rest_revenue <= q { 0.5 * (q + rest_revenue) } else { q };
        let t = (p / q).min(1.0);
        prices[i] = p;
        rest_revenue = p * (1.0 - t) + t * rest_revenue;
        rest_sale = (1.0 - t) + t * rest_sale;
    }
    let policy = SequentialPolicy::from_prices(prices);
    debug_assert!((policy.revenue - rest_revenue).abs() < 1e-12);
    Ok(policy)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommittedOptimum {
    pub policy: SequentialPolicy,
    pub restarts: usize,
    /// False when no restart's pattern search reached its final step size.
    pub converged: bool,
}

pub const COMMITTED_LIMIT: usize = 20;
const PATTERN_MIN_STEP: f64 = 1e-10;
const SWEEPS: usize = 200;

fn revenue_of(prices: &[f64]) -> f64 {
    SequentialPolicy::from_prices(prices.to_vec()).revenue
}

/// Coordinate ascent (golden section per coordinate) followed by a compass
/// pattern search. Returns the local optimum and whether it converged.
fn local_search(mut x: Vec<f64>) -> (Vec<f64>, bool) {
    let n = x.len();
    let mut best = revenue_of(&x);
    for _ in 0..SWEEPS {
        let before = best;
        for i in 0..n {
            let f = |v: f64| {
                let mut y = x.clone();
                y[i] = v;
                revenue_of(&y)
            };
            let (v, val) = golden_max(0.0, 1.0, 1e-12, &f);
            if val > best {
                best = val;
                x[i] = v;
            }
        }
        if best - before < 1e-15 {
            break;
        }
    }
    let mut step = 0.05;
    let mut evals = 0;
    while step > PATTERN_MIN_STEP && evals < 200_000 {
        let mut improved = false;
        for i in 0..n {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] = (y[i] + dir * step).clamp(0.0, 1.0);
                evals += 1;
                let val = revenue_of(&y);
                if val > best {
                    best = val;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, step <= PATTERN_MIN_STEP)
}

/// Best committed price vector on the `n`-clique (uniform(0,1) values).
/// Restart 0 starts from the subgame-perfect prices; others are random.
pub fn clique_committed_optimum(n: usize, restarts: usize, seed: u64) -> Result<CommittedOptimum> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if n > COMMITTED_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: COMMITTED_LIMIT,
            hint: "committed-price search is a local optimiser for small cliques",
        });
    }
    let restarts = restarts.max(1);
    let start = clique_subgame_perfect(n)?.prices;
    let results: Vec<(Vec<f64>, bool)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let x0 = if r == 0 {
                start.clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                (0..n).map(|_| rng.gen::<f64>()).collect()
            };
            local_search(x0)
        })
        .collect();
    let (best, converged) = results
        .into_iter()
        .max_by(|a, b| revenue_of(&a.0).total_cmp(&revenue_of(&b.0)))
        .expect("at least one restart");
    if !converged {
        log::warn!("committed-price search did not converge for n = {n}; reporting best found");
    }
    Ok(CommittedOptimum {
        policy: SequentialPolicy::from_prices(best),
        restarts,
        converged,
    })
}
