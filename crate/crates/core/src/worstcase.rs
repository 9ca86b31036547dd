//! Worst-case equilibrium revenue for uniform(0,1) values.
//!
//! Under `T_i = p^{x_i}` the equilibria become the set `X` of vectors
//! `x in [0,1]^n` with closed-neighbourhood sums at least 1 and equal to 1
//! wherever `x_i > 0`. Revenue is `p * sum_i (1 - p^{x_i})`, concave in `x`.

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::distkit::ValueDistribution;
use crate::eqcore::{thresholds_from_x, verify_equilibrium, PriceVector};
use crate::error::{Error, Result};
use crate::netmodel::{f_node, sat_reduction, t_node, Graph, ReductionSpec};
use crate::numeric::{rank, simplex_min, solve_full_column_rank, LpOutcome, RowKind};
use crate::scalar::Scalar;

/// Largest graph for the branch-and-bound minimum of `sum x`.
pub const MIN_SUM_LIMIT: usize = 128;
/// Largest graph for exact worst-case revenue by vertex enumeration.
pub const EXACT_LIMIT: usize = 16;
/// Branch-and-bound node budget.
const BNB_BUDGET: usize = 500_000;
const FEAS_TOL: f64 = 1e-9;
const ZERO_TOL: f64 = 1e-12;
const P_MIN: f64 = 1e-6;

/// A point of `X` with its closed-neighbourhood sums.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibleAssignment<S> {
    pub x: Vec<S>,
    pub support: Vec<usize>,
    pub closed_nbhd_sums: Vec<S>,
    /// Nodes within tolerance of both sides of the complementarity rule.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub boundary_nodes: Vec<usize>,
}

fn closed_sum<S: Scalar>(graph: &Graph, x: &[S], i: usize) -> S {
    graph.neighbors(i).iter().fold(x[i], |acc, &j| acc + x[j])
}

impl<S: Scalar> FeasibleAssignment<S> {
    pub fn new(graph: &Graph, x: Vec<S>) -> Self {
        let zero = S::tol(ZERO_TOL);
        let feas = S::tol(FEAS_TOL);
        let closed_nbhd_sums: Vec<S> = (0..graph.n()).map(|i| closed_sum(graph, &x, i)).collect();
        let support = (0..graph.n()).filter(|&i| x[i] > zero).collect();
        let boundary_nodes = (0..graph.n())
            .filter(|&i| {
                let over = closed_nbhd_sums[i] - S::one();
                (x[i] > zero && x[i] <= feas) || (x[i] > zero && over > S::zero() && over <= feas)
            })
            .collect();
        Self {
            x,
            support,
            closed_nbhd_sums,
            boundary_nodes,
        }
    }

    pub fn sum(&self) -> S {
        self.x.iter().copied().sum()
    }

    /// Human-readable list of violated conditions (empty when in `X`).
    pub fn violations(&self) -> Vec<String> {
        let zero = S::tol(ZERO_TOL);
        let feas = S::tol(FEAS_TOL);
        let mut out = Vec::new();
        for (i, (&xi, &s)) in self.x.iter().zip(&self.closed_nbhd_sums).enumerate() {
            if !(xi >= S::zero() && xi <= S::one()) {
                out.push(format!("x[{i}] = {xi} outside [0,1]"));
            }
            if s < S::one() - feas {
                out.push(format!("node {i}: closed sum {s} below 1"));
            }
            if xi > zero && (s - S::one()).abs() > feas {
                out.push(format!("node {i}: x = {xi} > 0 but closed sum {s} != 1"));
            }
        }
        out
    }

    pub fn is_feasible(&self) -> bool {
        self.violations().is_empty()
    }

    /// `p * sum_i (1 - p^{x_i})`.
    pub fn revenue(&self, p: S) -> S {
        revenue_of(&self.x, p)
    }
}

fn revenue_of<S: Scalar>(x: &[S], p: S) -> S {
    p * x.iter().map(|&xi| S::one() - p.powf(xi)).sum::<S>()
}

fn snap<S: Scalar>(x: &mut [S]) {
    let feas = S::tol(FEAS_TOL);
    for v in x.iter_mut() {
        if *v <= feas {
            *v = S::zero();
        } else if *v > S::one() {
            *v = S::one();
        }
    }
}

fn check_price<S: Scalar>(p: S) -> Result<()> {
    let lo = S::lit(P_MIN);
    if p >= lo && p <= S::one() - lo {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "price must lie in [{P_MIN}, 1 - {P_MIN}], got {p}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinSum<S> {
    pub value: S,
    pub argmin: FeasibleAssignment<S>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Fix {
    Free,
    Zero,
    Tight,
}

struct Bnb<'a, S> {
    graph: &'a Graph,
    best: S,
    best_x: Vec<S>,
    nodes: usize,
}

impl<S: Scalar> Bnb<'_, S> {
    fn relax(&self, fix: &[Fix]) -> Option<(Vec<S>, S)> {
        let n = self.graph.n();
        let cols: Vec<usize> = (0..n).filter(|&i| fix[i] != Fix::Zero).collect();
        let mut pos = vec![usize::MAX; n];
        for (k, &i) in cols.iter().enumerate() {
            pos[i] = k;
        }
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut a = vec![S::zero(); cols.len()];
            let mut any = false;
            for &j in std::iter::once(&i).chain(self.graph.neighbors(i)) {
                if pos[j] != usize::MAX {
                    a[pos[j]] = S::one();
                    any = true;
                }
            }
            if !any {
                return None;
            }
            let kind = if fix[i] == Fix::Tight { RowKind::Eq } else { RowKind::Ge };
            rows.push((a, kind, S::one()));
        }
        match simplex_min(&vec![S::one(); cols.len()], &rows, &[]) {
            LpOutcome::Infeasible => None,
            LpOutcome::Optimal { x, value } => {
                let mut full = vec![S::zero(); n];
                for (k, &i) in cols.iter().enumerate() {
                    full[i] = x[k];
                }
                Some((full, value))
            }
        }
    }

    fn search(&mut self, fix: &mut Vec<Fix>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > BNB_BUDGET {
            return Err(Error::Budget {
                requested: self.nodes as u128,
                budget: BNB_BUDGET,
            });
        }
        let Some((mut x, value)) = self.relax(fix) else {
            return Ok(());
        };
        if value >= self.best - S::tol(FEAS_TOL) {
            return Ok(());
        }
        snap(&mut x);
        let feas = S::tol(FEAS_TOL);
        let violator = (0..self.graph.n())
            .filter(|&i| fix[i] == Fix::Free && x[i] > S::zero() && closed_sum(self.graph, &x, i) > S::one() + feas)
            .max_by(|&a, &b| {
                let ka = (self.graph.degree(a), x[a]);
                let kb = (self.graph.degree(b), x[b]);
                ka.0.cmp(&kb.0)
                    .then(ka.1.partial_cmp(&kb.1).unwrap_or(std::cmp::Ordering::Equal))
            });
        match violator {
            None => {
                let fa = FeasibleAssignment::new(self.graph, x.clone());
                if fa.is_feasible() {
                    self.best = fa.sum();
                    self.best_x = x;
                }
                Ok(())
            }
            Some(v) => {
                for branch in [Fix::Zero, Fix::Tight] {
                    fix[v] = branch;
                    self.search(fix)?;
                }
                fix[v] = Fix::Free;
                Ok(())
            }
        }
    }
}

/// Indicator of a greedy maximal independent set (smallest degree first),
/// always a point of `X`.
fn greedy_independent_point<S: Scalar>(graph: &Graph) -> Vec<S> {
    let mut order: Vec<usize> = (0..graph.n()).collect();
    order.sort_by_key(|&i| (graph.degree(i), i));
    let mut blocked = vec![false; graph.n()];
    let mut x = vec![S::zero(); graph.n()];
    for i in order {
        if !blocked[i] {
            x[i] = S::one();
            blocked[i] = true;
            for &j in graph.neighbors(i) {
                blocked[j] = true;
            }
        }
    }
    x
}

/// `min_{x in X} sum_i x_i`, by branch and bound on the complementarity
/// condition with LP relaxations.
pub fn min_sum_x<S: Scalar>(graph: &Graph) -> Result<MinSum<S>> {
    if graph.n() > MIN_SUM_LIMIT {
        return Err(Error::SizeLimit {
            n: graph.n(),
            limit: MIN_SUM_LIMIT,
            hint: "use bounds-only analysis on a smaller instance",
        });
    }
    let start = greedy_independent_point::<S>(graph);
    let mut bnb = Bnb {
        graph,
        best: start.iter().copied().sum(),
        best_x: start,
        nodes: 0,
    };
    let mut fix = vec![Fix::Free; graph.n()];
    bnb.search(&mut fix)?;
    log::debug!("min_sum_x: {} branch-and-bound nodes", bnb.nodes);
    let argmin = FeasibleAssignment::new(graph, bnb.best_x);
    if !argmin.is_feasible() {
        return Err(Error::Internal(format!(
            "min_sum_x argmin infeasible: {:?}",
            argmin.violations()
        )));
    }
    Ok(MinSum {
        value: argmin.sum(),
        argmin,
    })
}

/// Candidate minimisers of any concave objective over `X`: for each support
/// `S`, the solutions of `A_SS x = 1` completed by tight rows outside `S`.
#[derive(Debug, Clone)]
pub struct VertexSet<S> {
    pub points: Vec<Vec<S>>,
}

impl<S: Scalar> VertexSet<S> {
    pub fn enumerate(graph: &Graph) -> Result<Self> {
        let n = graph.n();
        if n > EXACT_LIMIT {
            return Err(Error::SizeLimit {
                n,
                limit: EXACT_LIMIT,
                hint: "exact worst-case revenue enumerates supports; use --bounds instead",
            });
        }
        if n == 0 {
            return Ok(Self {
                points: vec![Vec::new()],
            });
        }
        let adj = |i: usize, j: usize| i == j || graph.has_edge(i, j);
        let row = |i: usize, s: &[usize]| -> Vec<S> {
            s.iter()
                .map(|&j| if adj(i, j) { S::one() } else { S::zero() })
                .collect()
        };
        let tol = S::tol(1e-10);
        let feas = S::tol(FEAS_TOL);
        let points: Vec<Vec<S>> = (1u32..(1u32 << n))
            .into_par_iter()
            .flat_map_iter(|mask| {
                let s: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                let outside: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 0).collect();
                let a_ss: Vec<Vec<S>> = s.iter().map(|&i| row(i, &s)).collect();
                let nullity = s.len() - rank(&a_ss, tol);
                let mut found = Vec::new();
                for extra in outside.iter().copied().combinations(nullity) {
                    let mut a = a_ss.clone();
                    a.extend(extra.iter().map(|&k| row(k, &s)));
                    let b = vec![S::one(); a.len()];
                    let Some(xs) = solve_full_column_rank(a, b, s.len(), tol) else {
                        continue;
                    };
                    if xs.iter().any(|&v| v < -feas) {
                        continue;
                    }
                    let mut x = vec![S::zero(); n];
                    for (k, &i) in s.iter().enumerate() {
                        x[i] = xs[k];
                    }
                    snap(&mut x);
                    if outside.iter().all(|&k| closed_sum(graph, &x, k) >= S::one() - feas) {
                        found.push(x);
                    }
                }
                found
            })
            .collect();
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn argmin_by(&self, f: impl Fn(&[S]) -> S) -> Option<&Vec<S>> {
        self.points
            .iter()
            .min_by(|a, b| f(a).partial_cmp(&f(b)).unwrap_or(std::cmp::Ordering::Equal))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCaseResult<S> {
    pub price: S,
    pub min_sum_x: S,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_min_revenue: Option<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmin: Option<FeasibleAssignment<S>>,
    /// `p (1 - p) m`
    pub lower_bound: S,
    /// `p ln(1/p) m`
    pub upper_bound: S,
}

fn bounds<S: Scalar>(p: S, m: S) -> (S, S) {
    (p * (S::one() - p) * m, -p * p.ln() * m)
}

/// Exact worst-case revenue over all prices of interest for one graph; the
/// candidate points are computed once and reused for every price.
pub struct ExactWorstCase<'a, S> {
    graph: &'a Graph,
    vertices: VertexSet<S>,
    min_sum: S,
}

impl<'a, S: Scalar> ExactWorstCase<'a, S> {
    pub fn new(graph: &'a Graph) -> Result<Self> {
        let vertices = VertexSet::enumerate(graph)?;
        let min_sum = vertices
            .argmin_by(|x| x.iter().copied().sum())
            .map(|x| x.iter().copied().sum())
            .ok_or_else(|| Error::Internal("no point of X found".into()))?;
        Ok(Self {
            graph,
            vertices,
            min_sum,
        })
    }

    pub fn min_sum_x(&self) -> S {
        self.min_sum
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Minimum revenue over candidate points, without equilibrium checks.
    pub fn min_revenue(&self, p: S) -> S {
        self.vertices
            .points
            .iter()
            .map(|x| revenue_of(x, p))
            .fold(S::infinity(), S::min)
    }

    pub fn at(&self, p: S) -> Result<WorstCaseResult<S>> {
        check_price(p)?;
        let x = self
            .vertices
            .argmin_by(|x| revenue_of(x, p))
            .ok_or_else(|| Error::Internal("no point of X found".into()))?;
        let argmin = FeasibleAssignment::new(self.graph, x.clone());
        let dist = ValueDistribution::uniform(S::zero(), S::one())?;
        let t = thresholds_from_x(&dist, &argmin.x, p)?;
        let prices = PriceVector::uniform(self.graph.n(), p)?;
        let check = verify_equilibrium(self.graph, &dist, &prices, &t, S::tol(1e-8))?;
        if !check.valid {
            return Err(Error::Internal(format!(
                "worst-case argmin is not an equilibrium (residual {}, nodes {:?})",
                check.residual, check.witnesses
            )));
        }
        let (lower_bound, upper_bound) = bounds(p, self.min_sum);
        Ok(WorstCaseResult {
            price: p,
            min_sum_x: self.min_sum,
            exact_min_revenue: Some(argmin.revenue(p)),
            argmin: Some(argmin),
            lower_bound,
            upper_bound,
        })
    }
}

/// Exact minimum of `p sum_i (1 - p^{x_i})` over `X`.
pub fn worst_case_revenue_exact<S: Scalar>(graph: &Graph, p: S) -> Result<WorstCaseResult<S>> {
    ExactWorstCase::new(graph)?.at(p)
}

/// `p (1-p) m <= min R <= p ln(1/p) m` with `m = min sum x`.
pub fn worst_case_revenue_bounds<S: Scalar>(graph: &Graph, p: S) -> Result<WorstCaseResult<S>> {
    check_price(p)?;
    let m = min_sum_x::<S>(graph)?.value;
    let (lower_bound, upper_bound) = bounds(p, m);
    Ok(WorstCaseResult {
        price: p,
        min_sum_x: m,
        exact_min_revenue: None,
        argmin: None,
        lower_bound,
        upper_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// `min sum x = 3m`
    Low,
    /// `min sum x >= 3m + k^L`
    High,
    /// Neither; would contradict the gap argument.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardnessReport {
    pub num_vars: usize,
    pub num_clauses: usize,
    pub exponent: u32,
    pub nodes: usize,
    pub min_sum_x: f64,
    pub low_threshold: f64,
    pub high_threshold: f64,
    pub verdict: Verdict,
    /// Every (T, F) pair of the argmin lies in {(0,1), (1,0), (0,0)}.
    pub gadget_integral: bool,
    /// Brute-force satisfiability of the formula, for small variable counts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub satisfiable: Option<bool>,
    pub argmin: Vec<f64>,
}

/// Runs `min sum x` on the reduction graph and classifies the result.
pub fn hardness_experiment(spec: &ReductionSpec) -> Result<HardnessReport> {
    let graph = sat_reduction(spec)?;
    let res = min_sum_x::<f64>(&graph)?;
    let m = spec.formula.num_vars;
    let mult = spec.multiplicity().expect("reduction built") as f64;
    let low = 3.0 * m as f64;
    let high = low + mult;
    let v = res.value;
    let verdict = if (v - low).abs() <= 1e-6 {
        Verdict::Low
    } else if v >= high - 1e-6 {
        Verdict::High
    } else {
        Verdict::Inconclusive
    };
    let x = &res.argmin.x;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    let gadget_integral = (1..=m).all(|var| {
        let (u, w) = (x[t_node(var)], x[f_node(var)]);
        (close(u, 0.0) && close(w, 1.0)) || (close(u, 1.0) && close(w, 0.0)) || (close(u, 0.0) && close(w, 0.0))
    });
    let satisfiable = (m <= 20).then(|| spec.formula.is_satisfiable());
    Ok(HardnessReport {
        num_vars: m,
        num_clauses: spec.formula.num_clauses(),
        exponent: spec.exponent,
        nodes: graph.n(),
        min_sum_x: v,
        low_threshold: low,
        high_threshold: high,
        verdict,
        gadget_integral,
        satisfiable,
        argmin: x.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{generate, pentagon_gadget, CnfFormula, GraphKind};

    #[test]
    fn min_sum_examples() {
        let k = generate(&GraphKind::Clique { n: 6 }).unwrap();
        assert!((min_sum_x::<f64>(&k).unwrap().value - 1.0).abs() < 1e-12);
        assert!((min_sum_x::<f64>(&Graph::empty(4)).unwrap().value - 4.0).abs() < 1e-12);
        let c5 = generate(&GraphKind::Cycle { n: 5 }).unwrap();
        let r = min_sum_x::<f64>(&c5).unwrap();
        assert!((r.value - 5.0 / 3.0).abs() < 1e-9);
        assert!(r.argmin.x.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-9));
    }

    #[test]
    fn vertex_enumeration_agrees_on_min_sum() {
        for seed in 0..8 {
            let g = generate(&GraphKind::RandomGnp { n: 8, prob: 0.35, seed }).unwrap();
            let exact = ExactWorstCase::<f64>::new(&g).unwrap();
            let bnb = min_sum_x::<f64>(&g).unwrap().value;
            assert!(
                (exact.min_sum_x() - bnb).abs() < 1e-9,
                "seed {seed}: {} vs {bnb}",
                exact.min_sum_x()
            );
        }
    }

    #[test]
    fn exact_examples() {
        let r = worst_case_revenue_exact(&Graph::empty(1), 0.5f64).unwrap();
        assert!((r.exact_min_revenue.unwrap() - 0.25).abs() < 1e-12);
        let k2 = generate(&GraphKind::Clique { n: 2 }).unwrap();
        let r = worst_case_revenue_exact(&k2, 0.25f64).unwrap();
        assert!((r.exact_min_revenue.unwrap() - 3.0 / 16.0).abs() < 1e-12);
        let x = &r.argmin.as_ref().unwrap().x;
        assert!(x.contains(&1.0) && x.contains(&0.0));
        let g = pentagon_gadget(1);
        let r = worst_case_revenue_exact(&g, 0.5f64).unwrap();
        assert!(r.exact_min_revenue.unwrap() <= 5.0 * 0.5 * (1.0 - 0.5f64.powf(1.0 / 3.0)) + 1e-12);
    }

    #[test]
    fn bounds_examples() {
        let k2 = generate(&GraphKind::Clique { n: 2 }).unwrap();
        let b = worst_case_revenue_bounds(&k2, 0.25f64).unwrap();
        assert!((b.lower_bound - 3.0 / 16.0).abs() < 1e-12);
        assert!((b.upper_bound - 0.25 * 4f64.ln()).abs() < 1e-12);
        let c5 = generate(&GraphKind::Cycle { n: 5 }).unwrap();
        let b = worst_case_revenue_bounds(&c5, 0.5f64).unwrap();
        assert!((b.lower_bound - 5.0 / 12.0).abs() < 1e-9);
        assert!((b.upper_bound - 0.5 * 2f64.ln() * 5.0 / 3.0).abs() < 1e-9);
        assert!(worst_case_revenue_bounds(&c5, 1e-9f64).is_err());
    }

    #[test]
    fn size_limits() {
        assert!(matches!(
            worst_case_revenue_exact(&Graph::empty(17), 0.5f64),
            Err(Error::SizeLimit { .. })
        ));
        assert!(matches!(
            min_sum_x::<f64>(&Graph::empty(129)),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn hardness_single_clause() {
        let f = CnfFormula::new(1, vec![[1, 1, 1]]).unwrap();
        let r = hardness_experiment(&ReductionSpec::new(f, 1).unwrap()).unwrap();
        assert!((r.min_sum_x - 3.0).abs() < 1e-9);
        assert_eq!(r.verdict, Verdict::Low);
        assert!(r.gadget_integral);
    }
}
