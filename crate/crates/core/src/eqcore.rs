//! Threshold equilibria: best responses, a damped fixed-point solver, the
//! symmetric threshold, verification, expected revenue and the
//! uniform-distribution change of variables `T_i = p^{x_i}`.

use std::cmp::Ordering;
use std::fmt;

use rand::Rng;
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::distkit::{DistKind, ValueDistribution};
use crate::error::{Error, Result};
use crate::netmodel::Graph;
use crate::numeric::bisect_increasing;
use crate::scalar::Scalar;

/// A buying threshold. `NeverBuy` stands for any threshold at or above the
/// top of the support and compares greater than every finite threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold<S> {
    Finite(S),
    NeverBuy,
}

impl<S: Scalar> Threshold<S> {
    /// Collapses values at or above the support top to `NeverBuy`.
    pub fn capped(t: S, dist: &ValueDistribution<S>) -> Self {
        if t.is_nan() || t >= dist.support_hi {
            Threshold::NeverBuy
        } else {
            Threshold::Finite(t)
        }
    }

    pub fn finite(self) -> Option<S> {
        match self {
            Threshold::Finite(t) => Some(t),
            Threshold::NeverBuy => None,
        }
    }

    pub fn is_never(self) -> bool {
        matches!(self, Threshold::NeverBuy)
    }

    /// Numeric stand-in: `support_hi` for `NeverBuy`.
    pub fn value_or_cap(self, dist: &ValueDistribution<S>) -> S {
        self.finite().unwrap_or(dist.support_hi)
    }

    /// `F(T)`, with `F(NeverBuy) = 1`.
    pub fn cdf(self, dist: &ValueDistribution<S>) -> S {
        match self {
            Threshold::Finite(t) => dist.cdf(t),
            Threshold::NeverBuy => S::one(),
        }
    }

    pub fn ln_cdf(self, dist: &ValueDistribution<S>) -> S {
        match self {
            Threshold::Finite(t) => dist.ln_cdf(t),
            Threshold::NeverBuy => S::zero(),
        }
    }

    /// Probability of a sale, `1 - F(T)`.
    pub fn sale_probability(self, dist: &ValueDistribution<S>) -> S {
        match self {
            Threshold::Finite(t) => dist.survival(t),
            Threshold::NeverBuy => S::zero(),
        }
    }
}

impl<S: Scalar> PartialOrd for Threshold<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Threshold::NeverBuy, Threshold::NeverBuy) => Some(Ordering::Equal),
            (Threshold::NeverBuy, _) => Some(Ordering::Greater),
            (_, Threshold::NeverBuy) => Some(Ordering::Less),
            (Threshold::Finite(a), Threshold::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl<S: Scalar> fmt::Display for Threshold<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Finite(t) => write!(f, "{t}"),
            Threshold::NeverBuy => f.write_str("never"),
        }
    }
}

impl<S: Scalar> Serialize for Threshold<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        match self {
            Threshold::Finite(t) => serializer.serialize_f64(t.as_f64()),
            Threshold::NeverBuy => serializer.serialize_str("never"),
        }
    }
}

impl<'de, S: Scalar> Deserialize<'de> for Threshold<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V<S>(std::marker::PhantomData<S>);
        impl<S: Scalar> Visitor<'_> for V<S> {
            type Value = Threshold<S>;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or the string \"never\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                Ok(Threshold::Finite(S::lit(v)))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                Ok(Threshold::Finite(S::lit(v as f64)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                Ok(Threshold::Finite(S::lit(v as f64)))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                if v == "never" {
                    Ok(Threshold::NeverBuy)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        deserializer.deserialize_any(V(std::marker::PhantomData))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Candidate,
    Verified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar + Serialize"))]
pub struct ThresholdVector<S> {
    pub values: Vec<Threshold<S>>,
    pub residual: S,
    pub status: Status,
}

impl<S: Scalar> ThresholdVector<S> {
    pub fn candidate(values: Vec<Threshold<S>>) -> Self {
        Self {
            values,
            residual: S::nan(),
            status: Status::Candidate,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Parses a JSON array of numbers and `"never"` strings.
    pub fn from_json(text: &str) -> Result<Self> {
        let values: Vec<Threshold<S>> = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        Ok(Self::candidate(values))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.values).expect("thresholds serialise")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceVector<S> {
    pub prices: Vec<S>,
    /// The common price when all entries are equal.
    pub uniform: Option<S>,
}

impl<S: Scalar> PriceVector<S> {
    pub fn new(prices: Vec<S>) -> Result<Self> {
        if let Some(bad) = prices.iter().find(|p| !(p.is_finite() && **p >= S::zero())) {
            return Err(Error::Domain(format!(
                "prices must be finite and non-negative, got {bad}"
            )));
        }
        let uniform = match prices.first() {
            Some(&p0) if prices.iter().all(|&p| p == p0) => Some(p0),
            _ => None,
        };
        Ok(Self { prices, uniform })
    }

    pub fn uniform(n: usize, p: S) -> Result<Self> {
        Self::new(vec![p; n])
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Vec<f64> = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        Self::new(raw.into_iter().map(S::lit).collect())
    }
}

fn check_sizes<S>(graph: &Graph, prices: &PriceVector<S>, t: Option<&ThresholdVector<S>>) -> Result<()> {
    if prices.prices.len() != graph.n() {
        return Err(Error::Domain(format!(
            "{} prices for {} nodes",
            prices.prices.len(),
            graph.n()
        )));
    }
    if let Some(t) = t {
        if t.values.len() != graph.n() {
            return Err(Error::Domain(format!(
                "{} thresholds for {} nodes",
                t.values.len(),
                graph.n()
            )));
        }
    }
    Ok(())
}

/// `ln prod_{j in N(i)} F(T_j)`; `-inf` when some neighbour has `F(T_j) = 0`.
fn ln_neighbour_product<S: Scalar>(graph: &Graph, dist: &ValueDistribution<S>, t: &[Threshold<S>], i: usize) -> S {
    graph.neighbors(i).iter().map(|&j| t[j].ln_cdf(dist)).sum()
}

fn psi<S: Scalar>(graph: &Graph, dist: &ValueDistribution<S>, p: &[S], t: &[Threshold<S>], i: usize) -> Threshold<S> {
    let ln_prod = ln_neighbour_product(graph, dist, t, i);
    if ln_prod == S::neg_infinity() {
        return Threshold::NeverBuy;
    }
    Threshold::capped(p[i] * (-ln_prod).exp(), dist)
}

/// `Psi_i(T) = p_i / prod_{j in N(i)} F(T_j)`.
pub fn best_response<S: Scalar>(
    graph: &Graph,
    dist: &ValueDistribution<S>,
    prices: &PriceVector<S>,
    t: &ThresholdVector<S>,
) -> Result<ThresholdVector<S>> {
    check_sizes(graph, prices, Some(t))?;
    let values = (0..graph.n())
        .map(|i| psi(graph, dist, &prices.prices, &t.values, i))
        .collect();
    Ok(ThresholdVector::candidate(values))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Initial damping; halved whenever the residual stops improving.
    pub damping: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_iter: 100_000,
            tol: 1e-10,
        }
    }
}

const MIN_DAMPING: f64 = 1e-4;
/// The damping is halved when, over this many iterations, the best residual
/// has not at least halved and the steps keep reversing direction. A plain
/// "no new best" test misses the slow decay seen when the damped map has
/// derivative near -1; requiring reversals leaves slow monotone drift alone.
const STALL_WINDOW: usize = 50;

/// Nodes with `F(p_i) = 0` buy at `T_i = p_i` and their neighbours never buy.
/// Processed in index order so the buyers form an independent set.
fn peel_zero_cdf<S: Scalar>(graph: &Graph, dist: &ValueDistribution<S>, p: &[S]) -> Vec<Option<Threshold<S>>> {
    let mut fixed = vec![None; graph.n()];
    for i in 0..graph.n() {
        if fixed[i].is_some() || dist.cdf(p[i]) > S::zero() {
            continue;
        }
        fixed[i] = Some(Threshold::Finite(p[i]));
        for &j in graph.neighbors(i) {
            fixed[j] = Some(Threshold::NeverBuy);
        }
    }
    fixed
}

fn residual<S: Scalar>(dist: &ValueDistribution<S>, a: &[Threshold<S>], b: &[Threshold<S>]) -> S {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.value_or_cap(dist) - y.value_or_cap(dist)).abs())
        .fold(S::zero(), S::max)
}

/// Damped iteration `T <- (1 - g) T + g Psi(T)` from the lower corner of the
/// box (`T_i = p_i`).
pub fn solve_fixed_point<S: Scalar>(
    graph: &Graph,
    dist: &ValueDistribution<S>,
    prices: &PriceVector<S>,
    config: &SolverConfig,
) -> Result<ThresholdVector<S>> {
    solve_fixed_point_from(graph, dist, prices, &prices.prices, config)
}

/// As [`solve_fixed_point`], starting from `start` (clamped into the box).
pub fn solve_fixed_point_from<S: Scalar>(
    graph: &Graph,
    dist: &ValueDistribution<S>,
    prices: &PriceVector<S>,
    start: &[S],
    config: &SolverConfig,
) -> Result<ThresholdVector<S>> {
    check_sizes(graph, prices, None)?;
    if start.len() != graph.n() {
        return Err(Error::Domain(format!(
            "{} start values for {} nodes",
            start.len(),
            graph.n()
        )));
    }
    let p = &prices.prices;
    let fixed = peel_zero_cdf(graph, dist, p);
    let mut t: Vec<Threshold<S>> = (0..graph.n())
        .map(|i| fixed[i].unwrap_or_else(|| Threshold::capped(start[i].max(p[i]), dist)))
        .collect();
    let tol = S::tol(config.tol);
    let mut gamma = S::lit(config.damping);
    let min_gamma = S::lit(MIN_DAMPING);
    let mut best = (S::infinity(), t.clone());
    let mut window_ref = S::infinity();
    let mut last_dir = vec![0i8; graph.n()];
    let mut reversals = 0;
    for iter in 0..config.max_iter {
        let psi_t: Vec<_> = (0..graph.n())
            .map(|i| fixed[i].unwrap_or_else(|| psi(graph, dist, p, &t, i)))
            .collect();
        let r = residual(dist, &t, &psi_t);
        if r < best.0 {
            best = (r, t.clone());
        }
        let mut reversed = false;
        for i in 0..graph.n() {
            let step = psi_t[i].value_or_cap(dist) - t[i].value_or_cap(dist);
            let dir = if step > S::zero() {
                1
            } else if step < S::zero() {
                -1
            } else {
                0
            };
            reversed |= dir != 0 && dir == -last_dir[i];
            last_dir[i] = dir;
        }
        reversals += usize::from(reversed);
        if r > tol && (iter + 1) % STALL_WINDOW == 0 {
            let stalled = best.0 > S::lit(0.5) * window_ref && 2 * reversals >= STALL_WINDOW;
            window_ref = best.0;
            reversals = 0;
            if stalled && gamma > min_gamma {
                gamma = (gamma * S::lit(0.5)).max(min_gamma);
                log::debug!("iteration {iter}: residual stalled at {}, damping now {gamma}", best.0);
                t = best.1.clone();
                continue;
            }
        }
        if r <= tol {
            // Thresholds converging onto the cap are never-buy thresholds.
            for (ti, psi_i) in t.iter_mut().zip(&psi_t) {
                if psi_i.is_never() {
                    *ti = Threshold::NeverBuy;
                }
            }
            return Ok(ThresholdVector {
                values: t,
                residual: r,
                status: Status::Verified,
            });
        }
        for i in 0..graph.n() {
            if fixed[i].is_some() {
                continue;
            }
            let cur = t[i].value_or_cap(dist);
            let next = psi_t[i].value_or_cap(dist);
            let mixed = (S::one() - gamma) * cur + gamma * next;
            debug_assert!(mixed >= p[i] * (S::one() - S::tol(1e-12)));
            t[i] = if psi_t[i].is_never() && t[i].is_never() {
                Threshold::NeverBuy
            } else {
                Threshold::capped(mixed, dist)
            };
        }
    }
    Err(Error::NonConvergence {
        iterations: config.max_iter,
        residual: best.0.as_f64(),
    })
}

/// Solves `T F(T)^d = p` by bisection on `[p, p / F(p)^d]`.
pub fn symmetric_threshold<S: Scalar>(d: usize, dist: &ValueDistribution<S>, p: S) -> Result<Threshold<S>> {
    if !(p.is_finite() && p >= S::zero()) {
        return Err(Error::Domain(format!("price must be finite and non-negative, got {p}")));
    }
    if dist.cdf(p) <= S::zero() {
        return Ok(Threshold::Finite(p));
    }
    if p >= dist.support_hi {
        return Ok(Threshold::NeverBuy);
    }
    let dd = S::count(d);
    let g = |t: S| t.ln() + dd * dist.ln_cdf(t);
    let target = p.ln();
    let hi = (p.ln() - dd * dist.ln_cdf(p)).exp().min(dist.support_hi);
    if g(hi) < target {
        return Ok(Threshold::NeverBuy);
    }
    let t = bisect_increasing(p, hi, S::tol(1e-12) * hi.max(S::one()), |t| g(t) - target);
    Ok(Threshold::Finite(t))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification<S> {
    pub valid: bool,
    pub residual: S,
    pub witnesses: Vec<usize>,
}

/// Checks `T_i prod F(T_j) = p_i` for finite thresholds and
/// `support_hi prod F(T_j) <= p_i` for `NeverBuy`.
pub fn verify_equilibrium<S: Scalar>(
    graph: &Graph,
    dist: &ValueDistribution<S>,
    prices: &PriceVector<S>,
    t: &ThresholdVector<S>,
    tol: S,
) -> Result<Verification<S>> {
    check_sizes(graph, prices, Some(t))?;
    let mut witnesses = Vec::new();
    let mut worst = S::zero();
    for i in 0..graph.n() {
        let prod = ln_neighbour_product(graph, dist, &t.values, i).exp();
        let p = prices.prices[i];
        let err = match t.values[i] {
            Threshold::Finite(ti) => (ti * prod - p).abs(),
            Threshold::NeverBuy => (dist.support_hi * prod - p).max(S::zero()),
        };
        worst = worst.max(err);
        if !(err <= tol) {
            witnesses.push(i);
        }
    }
    Ok(Verification {
        valid: witnesses.is_empty(),
        residual: worst,
        witnesses,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Annotation<S> {
    pub name: String,
    pub value: S,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar + Serialize"))]
pub struct RevenueReport<S> {
    pub prices: PriceVector<S>,
    pub thresholds: ThresholdVector<S>,
    pub expected_revenue: S,
    pub per_node_sale_prob: Vec<S>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<Annotation<S>>,
}

impl<S: Scalar> RevenueReport<S> {
    pub fn annotate(mut self, name: impl Into<String>, value: S) -> Self {
        self.annotations.push(Annotation {
            name: name.into(),
            value,
        });
        self
    }
}

/// `R(p, T) = sum_i p_i (1 - F(T_i))`.
pub fn expected_revenue<S: Scalar>(
    prices: &PriceVector<S>,
    t: &ThresholdVector<S>,
    dist: &ValueDistribution<S>,
) -> Result<RevenueReport<S>> {
    if prices.len() != t.len() {
        return Err(Error::Domain(format!(
            "{} prices for {} thresholds",
            prices.len(),
            t.len()
        )));
    }
    let per_node_sale_prob: Vec<S> = t.values.iter().map(|x| x.sale_probability(dist)).collect();
    let expected_revenue = prices
        .prices
        .iter()
        .zip(&per_node_sale_prob)
        .map(|(&p, &q)| p * q)
        .sum();
    Ok(RevenueReport {
        prices: prices.clone(),
        thresholds: t.clone(),
        expected_revenue,
        per_node_sale_prob,
        annotations: Vec::new(),
    })
}

fn require_unit_uniform<S: Scalar>(dist: &ValueDistribution<S>) -> Result<()> {
    match dist.kind {
        DistKind::Uniform { lo, hi } if lo == S::zero() && hi == S::one() => Ok(()),
        _ => Err(Error::Unsupported(format!(
            "{dist}: the x-transformation needs uniform(0,1)"
        ))),
    }
}

fn check_unit_price<S: Scalar>(p: S) -> Result<()> {
    if p > S::zero() && p < S::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("price must lie in (0,1), got {p}")))
    }
}

/// `x_i = ln(1/T_i) / ln(1/p)`; `NeverBuy` maps to 0.
pub fn x_from_thresholds<S: Scalar>(dist: &ValueDistribution<S>, t: &ThresholdVector<S>, p: S) -> Result<Vec<S>> {
    require_unit_uniform(dist)?;
    check_unit_price(p)?;
    let scale = -p.ln();
    t.values
        .iter()
        .map(|th| match *th {
            Threshold::NeverBuy => Ok(S::zero()),
            Threshold::Finite(ti) if ti >= p * (S::one() - S::tol(1e-12)) && ti <= S::one() => {
                Ok((-ti.ln() / scale).max(S::zero()).min(S::one()))
            }
            Threshold::Finite(ti) => Err(Error::Domain(format!("threshold {ti} outside [p, 1] for p = {p}"))),
        })
        .collect()
}

/// `T_i = p^{x_i}`; `x_i = 0` gives the never-buy threshold 1.
pub fn thresholds_from_x<S: Scalar>(dist: &ValueDistribution<S>, x: &[S], p: S) -> Result<ThresholdVector<S>> {
    require_unit_uniform(dist)?;
    check_unit_price(p)?;
    let values = x
        .iter()
        .map(|&xi| {
            if !(xi >= S::zero() && xi <= S::one() + S::tol(1e-9)) {
                return Err(Error::Domain(format!("x value {xi} outside [0,1]")));
            }
            Ok(Threshold::capped(p.powf(xi), dist))
        })
        .collect::<Result<_>>()?;
    Ok(ThresholdVector::candidate(values))
}

/// A uniformly random point of `{T in [p,1]^n : prod T_i = p}`, i.e. a
/// random equilibrium of the `n`-clique under uniform(0,1) values.
pub fn sample_clique_equilibrium<S: Scalar>(n: usize, p: S, rng: &mut impl Rng) -> Vec<Threshold<S>> {
    // Flat Dirichlet weights via normalised exponentials.
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    w.iter()
        .map(|&wi| {
            let x = S::lit(wi / total);
            let t = p.powf(x);
            if t >= S::one() {
                Threshold::NeverBuy
            } else {
                Threshold::Finite(t)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{generate, pentagon_gadget, GraphKind};

    fn unif() -> ValueDistribution<f64> {
        ValueDistribution::uniform(0.0, 1.0).unwrap()
    }

    fn fin(v: &[f64]) -> ThresholdVector<f64> {
        ThresholdVector::candidate(v.iter().map(|&x| Threshold::Finite(x)).collect())
    }

    #[test]
    fn best_response_examples() {
        let k2 = generate(&GraphKind::Clique { n: 2 }).unwrap();
        let p = PriceVector::uniform(2, 0.25).unwrap();
        let out = best_response(&k2, &unif(), &p, &fin(&[0.5, 0.5])).unwrap();
        assert_eq!(out.values, vec![Threshold::Finite(0.5), Threshold::Finite(0.5)]);

        let g = Graph::empty(1);
        let out = best_response(&g, &unif(), &PriceVector::uniform(1, 0.3).unwrap(), &fin(&[0.9])).unwrap();
        assert_eq!(out.values[0], Threshold::Finite(0.3));

        let t = ThresholdVector::candidate(vec![Threshold::Finite(0.5), Threshold::NeverBuy]);
        let out = best_response(&k2, &unif(), &p, &t).unwrap();
        assert_eq!(out.values[0], Threshold::Finite(0.25));
        assert_eq!(out.values[1], Threshold::Finite(0.5));
    }

    #[test]
    fn never_buy_orders_above_finite() {
        assert!(Threshold::NeverBuy > Threshold::Finite(1e300));
        assert!(Threshold::Finite(0.2) < Threshold::Finite(0.3));
    }

    #[test]
    fn clique_fixed_point() {
        let g = generate(&GraphKind::Clique { n: 5 }).unwrap();
        let p = PriceVector::uniform(5, 0.8f64.powi(5)).unwrap();
        let t = solve_fixed_point(&g, &unif(), &p, &SolverConfig::default()).unwrap();
        for v in &t.values {
            assert!((v.finite().unwrap() - 0.8).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_price_peels() {
        let g = generate(&GraphKind::Cycle { n: 5 }).unwrap();
        let p = PriceVector::uniform(5, 0.0).unwrap();
        let t = solve_fixed_point(&g, &unif(), &p, &SolverConfig::default()).unwrap();
        assert_eq!(t.residual, 0.0);
        let buyers: Vec<usize> = (0..5).filter(|&i| t.values[i] == Threshold::Finite(0.0)).collect();
        assert_eq!(buyers, vec![0, 2]);
        assert!(verify_equilibrium(&g, &unif(), &p, &t, 1e-12).unwrap().valid);
    }

    #[test]
    fn star_solution_verifies() {
        let g = generate(&GraphKind::Star { leaves: 4 }).unwrap();
        let p = PriceVector::uniform(5, 0.3).unwrap();
        let t = solve_fixed_point(&g, &unif(), &p, &SolverConfig::default()).unwrap();
        let v = verify_equilibrium(&g, &unif(), &p, &t, 1e-9).unwrap();
        assert!(v.valid, "{t:?} {v:?}");
    }

    #[test]
    fn symmetric_threshold_examples() {
        let u = unif();
        assert!((symmetric_threshold(2, &u, 0.125).unwrap().finite().unwrap() - 0.5).abs() < 1e-12);
        let t = symmetric_threshold(4, &u, 0.8f64.powi(5)).unwrap().finite().unwrap();
        assert!((t - 0.8).abs() < 1e-12);
        let e = ValueDistribution::exponential(1.0).unwrap();
        let t: f64 = symmetric_threshold(1, &e, 0.2).unwrap().finite().unwrap();
        assert!((t * (1.0 - (-t).exp()) - 0.2).abs() < 1e-11);
    }

    fn pentagon_a(n_copies: usize, p: f64) -> (Graph, ThresholdVector<f64>) {
        let g = pentagon_gadget(n_copies);
        let mut v = vec![Threshold::NeverBuy; g.n()];
        for x in v.iter_mut().take(5) {
            *x = Threshold::Finite(p.powf(1.0 / 3.0));
        }
        (g, ThresholdVector::candidate(v))
    }

    #[test]
    fn pentagon_equilibrium_a() {
        for &p in &[0.1, 0.5, 0.9] {
            let (g, t) = pentagon_a(3, p);
            let prices = PriceVector::uniform(g.n(), p).unwrap();
            assert!(verify_equilibrium(&g, &unif(), &prices, &t, 1e-12).unwrap().valid);
            let rev = expected_revenue(&prices, &t, &unif()).unwrap().expected_revenue;
            assert!((rev - 5.0 * p * (1.0 - p.powf(1.0 / 3.0))).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbation_is_caught() {
        let (g, mut t) = pentagon_a(1, 0.5);
        let prices = PriceVector::uniform(g.n(), 0.5).unwrap();
        t.values[2] = Threshold::Finite(t.values[2].finite().unwrap() + 0.05);
        let v = verify_equilibrium(&g, &unif(), &prices, &t, 1e-9).unwrap();
        assert!(!v.valid);
        assert!(v.witnesses.contains(&2));
    }

    #[test]
    fn x_transform_examples() {
        let u = unif();
        let p = 0.3;
        let t = thresholds_from_x(&u, &[1.0, 0.0, 1.0 / 3.0], p).unwrap();
        assert_eq!(t.values[0], Threshold::Finite(p));
        assert!(t.values[1].is_never());
        assert!((t.values[2].finite().unwrap() - p.powf(1.0 / 3.0)).abs() < 1e-15);
        let x = x_from_thresholds(&u, &t, p).unwrap();
        assert!((x[2] - 1.0 / 3.0).abs() < 1e-12);
        let e = ValueDistribution::exponential(1.0).unwrap();
        assert!(matches!(x_from_thresholds(&e, &t, p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn threshold_json() {
        let t = ThresholdVector::<f64>::from_json(r#"[0.5, "never", 1]"#).unwrap();
        assert_eq!(
            t.values,
            vec![Threshold::Finite(0.5), Threshold::NeverBuy, Threshold::Finite(1.0)]
        );
        assert_eq!(t.to_json(), r#"[0.5,"never",1.0]"#);
        assert!(ThresholdVector::<f64>::from_json(r#"["sometimes"]"#).is_err());
    }

    #[test]
    fn single_precision_solve() {
        let g = generate(&GraphKind::Cycle { n: 6 }).unwrap();
        let u = ValueDistribution::<f32>::uniform(0.0, 1.0).unwrap();
        let p = PriceVector::uniform(6, 0.4f32).unwrap();
        let cfg = SolverConfig {
            tol: 1e-6,
            ..SolverConfig::default()
        };
        let t = solve_fixed_point(&g, &u, &p, &cfg).unwrap();
        assert!(verify_equilibrium(&g, &u, &p, &t, 1e-5).unwrap().valid);
    }
}
