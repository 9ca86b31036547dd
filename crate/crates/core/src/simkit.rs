//! Monte Carlo play of realised games, exact maximum weighted independent
//! sets and the pointwise Hipster welfare check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distkit::ValueDistribution;
use crate::eqcore::{PriceVector, Threshold, ThresholdVector};
use crate::error::{Error, Result};
use crate::netmodel::Graph;
use crate::scalar::Scalar;

/// Largest graph handled by the exact MWIS search.
pub const MWIS_LIMIT: usize = 25;
/// Trials per work unit; fixed so aggregates do not depend on the pool size.
const CHUNK: usize = 2048;

/// One realised play of the game.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome<S> {
    pub values: Vec<S>,
    pub buyers: Vec<usize>,
    pub revenue_realized: S,
    /// Revenue accounted under Hipster utilities (same buyers, same payments).
    pub revenue_hipster: S,
    pub welfare_public: S,
    pub welfare_hipster: S,
}

/// Values for trial `trial`: ChaCha stream `trial`, one draw per agent in
/// index order, so a given (trial, agent) pair always sees the same draw.
pub fn draw_values<S: Scalar>(dist: &ValueDistribution<S>, n: usize, seed: u64, trial: u64) -> Vec<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    (0..n)
        .map(|_| {
            let u = S::lit(rng.gen::<f64>());
            dist.quantile(u).expect("u in [0,1)")
        })
        .collect()
}

fn buys<S: Scalar>(v: S, t: Threshold<S>) -> bool {
    match t {
        Threshold::Finite(ti) => v >= ti,
        Threshold::NeverBuy => false,
    }
}

/// Plays one profile: `i` buys iff `v_i >= T_i`.
pub fn play<S: Scalar>(graph: &Graph, prices: &PriceVector<S>, t: &ThresholdVector<S>, values: Vec<S>) -> Outcome<S> {
    let n = graph.n();
    let bought: Vec<bool> = (0..n).map(|i| buys(values[i], t.values[i])).collect();
    let buyers: Vec<usize> = (0..n).filter(|&i| bought[i]).collect();
    let paid: S = buyers.iter().map(|&i| prices.prices[i]).sum();
    let served = |i: usize| bought[i] || graph.neighbors(i).iter().any(|&j| bought[j]);
    let lonely = |i: usize| bought[i] && !graph.neighbors(i).iter().any(|&j| bought[j]);
    let public: S = (0..n).filter(|&i| served(i)).map(|i| values[i]).sum();
    let hipster: S = (0..n).filter(|&i| lonely(i)).map(|i| values[i]).sum();
    let revenue_hipster = (0..n).filter(|&i| bought[i]).map(|i| prices.prices[i]).sum();
    Outcome {
        values,
        buyers,
        revenue_realized: paid,
        revenue_hipster,
        welfare_public: public - paid,
        welfare_hipster: hipster - paid,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary<S> {
    pub trials: usize,
    pub mean_revenue: S,
    pub stderr: S,
    pub mean_welfare_public: S,
    pub mean_welfare_hipster: S,
    /// Whether the Hipster revenue matched the public revenue in every trial.
    pub hipster_revenue_identical: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub outcomes: Vec<Outcome<S>>,
}

/// Streaming mean / variance (Welford), mergeable.
#[derive(Debug, Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    const EMPTY: Self = Self {
        n: 0.0,
        mean: 0.0,
        m2: 0.0,
    };

    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Self) -> Self {
        if self.n == 0.0 {
            return o;
        }
        if o.n == 0.0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Self {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }

    fn stderr(self) -> f64 {
        if self.n < 2.0 {
            return 0.0;
        }
        (self.m2 / (self.n - 1.0) / self.n).sqrt()
    }
}

#[derive(Clone, Copy)]
struct ChunkStats {
    revenue: Moments,
    public: Moments,
    hipster: Moments,
    identical: bool,
}

fn check_inputs<S>(graph: &Graph, prices: &PriceVector<S>, t: &ThresholdVector<S>, trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    if prices.prices.len() != graph.n() || t.values.len() != graph.n() {
        return Err(Error::Domain(format!(
            "{} prices and {} thresholds for {} nodes",
            prices.prices.len(),
            t.values.len(),
            graph.n()
        )));
    }
    Ok(())
}

/// Plays `trials` i.i.d. profiles; `keep` of the first outcomes are
/// returned verbatim. Deterministic given `seed`, whatever the pool size.
pub fn simulate<S: Scalar>(
    graph: &Graph,
    dist: &ValueDistribution<S>,
    prices: &PriceVector<S>,
    t: &ThresholdVector<S>,
    trials: usize,
    seed: u64,
    keep: usize,
) -> Result<SimulationSummary<S>> {
    check_inputs(graph, prices, t, trials)?;
    let chunks: Vec<usize> = (0..trials.div_ceil(CHUNK)).collect();
    let stats: Vec<ChunkStats> = chunks
        .par_iter()
        .map(|&c| {
            let mut s = ChunkStats {
                revenue: Moments::EMPTY,
                public: Moments::EMPTY,
                hipster: Moments::EMPTY,
                identical: true,
            };
            for trial in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let o = play(graph, prices, t, draw_values(dist, graph.n(), seed, trial as u64));
                s.revenue.push(o.revenue_realized.as_f64());
                s.public.push(o.welfare_public.as_f64());
                s.hipster.push(o.welfare_hipster.as_f64());
                s.identical &= o.revenue_realized.as_f64().to_bits() == o.revenue_hipster.as_f64().to_bits();
            }
            s
        })
        .collect();
    let total = stats.into_iter().fold(
        ChunkStats {
            revenue: Moments::EMPTY,
            public: Moments::EMPTY,
            hipster: Moments::EMPTY,
            identical: true,
        },
        |a, b| ChunkStats {
            revenue: a.revenue.merge(b.revenue),
            public: a.public.merge(b.public),
            hipster: a.hipster.merge(b.hipster),
            identical: a.identical && b.identical,
        },
    );
    let outcomes = (0..keep.min(trials))
        .map(|trial| play(graph, prices, t, draw_values(dist, graph.n(), seed, trial as u64)))
        .collect();
    Ok(SimulationSummary {
        trials,
        mean_revenue: S::lit(total.revenue.mean),
        stderr: S::lit(total.revenue.stderr()),
        mean_welfare_public: S::lit(total.public.mean),
        mean_welfare_hipster: S::lit(total.hipster.mean),
        hipster_revenue_identical: total.identical,
        outcomes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mwis<S> {
    pub weight: S,
    pub set: Vec<usize>,
}

fn require_small(graph: &Graph) -> Result<()> {
    if graph.n() > MWIS_LIMIT {
        return Err(Error::SizeLimit {
            n: graph.n(),
            limit: MWIS_LIMIT,
            hint: "exact MWIS is exponential; omit the sampling-based bound for larger graphs",
        });
    }
    Ok(())
}

struct MwisSearch<'a, S> {
    masks: &'a [u64],
    weights: &'a [S],
    best: S,
    best_set: u64,
}

impl<S: Scalar> MwisSearch<'_, S> {
    fn positive_sum(&self, mut cand: u64) -> S {
        let mut s = S::zero();
        while cand != 0 {
            let v = cand.trailing_zeros() as usize;
            s = s + self.weights[v].max(S::zero());
            cand &= cand - 1;
        }
        s
    }

    fn run(&mut self, cand: u64, chosen: u64, acc: S) {
        if acc > self.best {
            self.best = acc;
            self.best_set = chosen;
        }
        if cand == 0 || acc + self.positive_sum(cand) <= self.best {
            return;
        }
        // Branch on the candidate of largest remaining degree.
        let mut pick = cand.trailing_zeros() as usize;
        let mut deg = 0;
        let mut rest = cand;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            let d = (self.masks[v] & cand).count_ones();
            if d > deg {
                deg = d;
                pick = v;
            }
            rest &= rest - 1;
        }
        let bit = 1u64 << pick;
        if deg == 0 {
            // No edges left: take every positive weight.
            let mut rest = cand;
            let (mut set, mut total) = (chosen, acc);
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                if self.weights[v] > S::zero() {
                    set |= 1 << v;
                    total = total + self.weights[v];
                }
                rest &= rest - 1;
            }
            if total > self.best {
                self.best = total;
                self.best_set = set;
            }
            return;
        }
        self.run(cand & !bit & !self.masks[pick], chosen | bit, acc + self.weights[pick]);
        self.run(cand & !bit, chosen, acc);
    }
}

/// Exact maximum weighted independent set by branch and bound.
pub fn mwis_exact<S: Scalar>(graph: &Graph, weights: &[S]) -> Result<Mwis<S>> {
    require_small(graph)?;
    if weights.len() != graph.n() {
        return Err(Error::Domain(format!(
            "{} weights for {} nodes",
            weights.len(),
            graph.n()
        )));
    }
    let masks = graph.masks();
    let full = if graph.n() == 64 {
        u64::MAX
    } else {
        (1u64 << graph.n()) - 1
    };
    let mut search = MwisSearch {
        masks: &masks,
        weights,
        best: S::zero(),
        best_set: 0,
    };
    search.run(full, 0, S::zero());
    let set: Vec<usize> = (0..graph.n()).filter(|&i| search.best_set >> i & 1 == 1).collect();
    debug_assert!(graph.is_independent(&set));
    Ok(Mwis {
        weight: search.best,
        set,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HipsterCheck<S> {
    pub trials: usize,
    pub violations: usize,
    pub mean_revenue: S,
    pub mean_mwis: S,
    pub mwis_stderr: S,
}

/// Per trial, checks Hipster welfare against the MWIS weight of the values.
pub fn check_hipster_welfare_bound<S: Scalar>(
    graph: &Graph,
    dist: &ValueDistribution<S>,
    prices: &PriceVector<S>,
    t: &ThresholdVector<S>,
    trials: usize,
    seed: u64,
) -> Result<HipsterCheck<S>> {
    require_small(graph)?;
    check_inputs(graph, prices, t, trials)?;
    let slack = S::tol(1e-12);
    let chunks: Vec<usize> = (0..trials.div_ceil(CHUNK)).collect();
    let parts: Vec<(usize, Moments, Moments)> = chunks
        .par_iter()
        .map(|&c| {
            let (mut bad, mut rev, mut mw) = (0, Moments::EMPTY, Moments::EMPTY);
            for trial in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let o = play(graph, prices, t, draw_values(dist, graph.n(), seed, trial as u64));
                let best = mwis_exact(graph, &o.values).expect("size checked").weight;
                if o.welfare_hipster > best + slack {
                    bad += 1;
                }
                rev.push(o.revenue_realized.as_f64());
                mw.push(best.as_f64());
            }
            (bad, rev, mw)
        })
        .collect();
    let (violations, rev, mw) = parts.into_iter().fold((0, Moments::EMPTY, Moments::EMPTY), |a, b| {
        (a.0 + b.0, a.1.merge(b.1), a.2.merge(b.2))
    });
    Ok(HipsterCheck {
        trials,
        violations,
        mean_revenue: S::lit(rev.mean),
        mean_mwis: S::lit(mw.mean),
        mwis_stderr: S::lit(mw.stderr()),
    })
}

/// Monte Carlo estimate of `E[MWIS(v)]` for i.i.d. values.
pub fn expected_mwis<S: Scalar>(
    graph: &Graph,
    dist: &ValueDistribution<S>,
    trials: usize,
    seed: u64,
) -> Result<(S, S)> {
    require_small(graph)?;
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let chunks: Vec<usize> = (0..trials.div_ceil(CHUNK)).collect();
    let total = chunks
        .par_iter()
        .map(|&c| {
            let mut m = Moments::EMPTY;
            for trial in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let v = draw_values(dist, graph.n(), seed, trial as u64);
                m.push(mwis_exact(graph, &v).expect("size checked").weight.as_f64());
            }
            m
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::EMPTY, Moments::merge);
    Ok((S::lit(total.mean), S::lit(total.stderr())))
}
