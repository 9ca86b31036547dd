//! Uniform price recommendations for cliques, d-regular graphs and general
//! graphs with uniform(0,1) values, plus the revenue upper bounds used to
//! judge them.

use serde::Serialize;

use crate::distkit::{DistKind, ValueDistribution};
use crate::error::{Error, Result};
use crate::netmodel::Graph;
use crate::scalar::{powu, Scalar};
use crate::simkit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Setting {
    Clique { n: usize },
    DRegular { d: usize },
    UniformGeneral,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceRecommendation<S> {
    pub price: S,
    pub setting: Setting,
    /// `F^{-1}(1 - 1/n)` (clique) or `F^{-1}(1 - 1/d)` (d-regular).
    pub threshold_t: S,
    /// Guaranteed fraction of the benchmark, when the result states one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guarantee: Option<S>,
    /// Revenue of the symmetric equilibrium at `price` (cliques only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetric_revenue: Option<S>,
    pub guarantee_note: String,
}

const REGULARITY_GRID: usize = 512;

fn require_regular<S: Scalar>(dist: &ValueDistribution<S>) -> Result<()> {
    let report = dist.check_regularity(REGULARITY_GRID)?;
    if report.regular {
        Ok(())
    } else {
        Err(Error::NotRegular {
            worst_violation: report.worst_violation.as_f64(),
        })
    }
}

/// `p = F^{-1}(1 - 1/n) (1 - 1/n)^{n-1}` for the `n`-clique.
pub fn price_clique<S: Scalar>(dist: &ValueDistribution<S>, n: usize) -> Result<PriceRecommendation<S>> {
    if n < 2 {
        return Err(Error::Domain(
            "n = 1 degenerates to F^-1(0); use the Myerson reserve for a single buyer".into(),
        ));
    }
    require_regular(dist)?;
    let keep = S::one() - S::one() / S::count(n);
    let t = dist.quantile(keep)?;
    let price = t * powu(keep, n - 1);
    // Symmetric equilibrium threshold is t itself: t F(t)^{n-1} = price.
    let symmetric_revenue = S::count(n) * t * dist.survival(t) * powu(dist.cdf(t), n - 1);
    Ok(PriceRecommendation {
        price,
        setting: Setting::Clique { n },
        threshold_t: t,
        guarantee: None,
        symmetric_revenue: Some(symmetric_revenue),
        guarantee_note: "worst equilibrium revenue is a constant fraction of the Myerson revenue for n bidders".into(),
    })
}

/// `p = F^{-1}(1 - 1/d) (1 - 1/d)^d`; depends only on the degree.
pub fn price_d_regular<S: Scalar>(dist: &ValueDistribution<S>, d: usize) -> Result<PriceRecommendation<S>> {
    if d <= 1 {
        return Err(Error::Domain(format!(
            "degenerate: F^-1(0) at support edge for d = {d}"
        )));
    }
    require_regular(dist)?;
    let keep = S::one() - S::one() / S::count(d);
    let t = dist.quantile(keep)?;
    Ok(PriceRecommendation {
        price: t * powu(keep, d),
        setting: Setting::DRegular { d },
        threshold_t: t,
        guarantee: None,
        symmetric_revenue: None,
        guarantee_note: "worst equilibrium revenue is a constant fraction of the best network-specific uniform price"
            .into(),
    })
}

/// Price 1/2 for uniform(0,1) values on any graph, guaranteeing `e/4` of the
/// best uniform price's worst-case revenue.
pub fn price_uniform_general<S: Scalar>(dist: &ValueDistribution<S>) -> Result<PriceRecommendation<S>> {
    match dist.kind {
        DistKind::Uniform { lo, hi } if lo == S::zero() && hi == S::one() => {}
        _ => {
            return Err(Error::Unsupported(format!(
                "{dist}: the general-graph price needs uniform(0,1)"
            )))
        }
    }
    let half = S::lit(0.5);
    Ok(PriceRecommendation {
        price: half,
        setting: Setting::UniformGeneral,
        threshold_t: half,
        guarantee: Some(S::E() / S::lit(4.0)),
        symmetric_revenue: None,
        guarantee_note: "worst-case revenue at 1/2 is at least e/4 of the worst-case revenue at any uniform price"
            .into(),
    })
}

/// Price maximising the worst-case upper bound `p ln(1/p)`, namely `1/e`.
pub fn upper_bound_maximizer<S: Scalar>() -> S {
    S::one() / S::E()
}

/// Revenue bound for any equilibrium on the `n`-clique: `R^M_n`.
pub fn myerson_upper_bound<S: Scalar>(dist: &ValueDistribution<S>, n: usize) -> Result<S> {
    Ok(dist.myerson_revenue_n(n)?.revenue)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate<S> {
    pub estimate: S,
    pub stderr: S,
}

/// Monte Carlo estimate of the expected maximum weighted independent set
/// weight with i.i.d. node weights, an upper bound on any equilibrium revenue.
pub fn mwis_upper_bound<S: Scalar>(
    graph: &Graph,
    dist: &ValueDistribution<S>,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloEstimate<S>> {
    let (estimate, stderr) = simkit::expected_mwis(graph, dist, trials, seed)?;
    Ok(MonteCarloEstimate { estimate, stderr })
}
