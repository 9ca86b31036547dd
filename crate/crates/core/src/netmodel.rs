//! Graphs, instance generators (including the 3-SAT hardness gadget) and
//! graph / CNF file formats.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    CycleNode,
    TNode,
    FNode,
    Leaf,
    ClauseNode,
    Left,
    Right,
}

/// Undirected simple graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    labels: Option<Vec<Option<Role>>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); n],
            labels: None,
        }
    }

    /// Builds a graph, rejecting self-loops and out-of-range endpoints and
    /// collapsing duplicate edges. Returns the number of duplicates dropped.
    pub fn from_edges_counting(n: usize, edges: &[(usize, usize)]) -> Result<(Self, usize)> {
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!("edge [{i},{j}] out of range for n = {n}")));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop at node {i}")));
            }
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        let mut dups = 0;
        for nbrs in adjacency.iter_mut() {
            nbrs.sort_unstable();
            let before = nbrs.len();
            nbrs.dedup();
            dups += before - nbrs.len();
        }
        Ok((
            Self {
                adjacency,
                labels: None,
            },
            dups / 2,
        ))
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let (g, dups) = Self::from_edges_counting(n, edges)?;
        if dups > 0 {
            log::warn!("collapsed {dups} duplicate edge(s)");
        }
        Ok(g)
    }

    pub fn with_labels(mut self, labels: Vec<Option<Role>>) -> Self {
        assert_eq!(labels.len(), self.n());
        self.labels = Some(labels);
        self
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn label(&self, i: usize) -> Option<Role> {
        self.labels.as_ref().and_then(|l| l[i])
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Canonical edge list with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, nbrs) in self.adjacency.iter().enumerate() {
            out.extend(nbrs.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    /// Nodes sorted by index with the given role.
    pub fn nodes_with_role(&self, role: Role) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.label(i) == Some(role)).collect()
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter().all(|&i| set.iter().all(|&j| i == j || !self.has_edge(i, j)))
    }

    /// Adjacency as bitmasks; only valid for `n <= 64`.
    pub(crate) fn masks(&self) -> Vec<u64> {
        debug_assert!(self.n() <= 64);
        self.adjacency
            .iter()
            .map(|nbrs| nbrs.iter().fold(0u64, |m, &j| m | (1u64 << j)))
            .collect()
    }

    /// Appends an isolated node.
    pub fn with_isolated_node(&self) -> Self {
        let mut g = self.clone();
        g.adjacency.push(Vec::new());
        if let Some(l) = g.labels.as_mut() {
            l.push(None);
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphKind {
    Clique {
        n: usize,
    },
    Cycle {
        n: usize,
    },
    Path {
        n: usize,
    },
    Empty {
        n: usize,
    },
    /// One centre (node 0) joined to `leaves` leaves.
    Star {
        leaves: usize,
    },
    DRegularBipartite {
        n: usize,
        d: usize,
    },
    PentagonGadget {
        copies: usize,
    },
    RandomGnp {
        n: usize,
        prob: f64,
        seed: u64,
    },
    RandomDRegular {
        n: usize,
        d: usize,
        seed: u64,
    },
}

const PAIRING_ATTEMPTS: usize = 10_000;

pub fn generate(kind: &GraphKind) -> Result<Graph> {
    match *kind {
        GraphKind::Clique { n } => {
            let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            Graph::from_edges(n, &edges)
        }
        GraphKind::Cycle { n } => {
            if n < 3 {
                return Err(Error::InfeasibleParams(format!("cycle needs n >= 3, got {n}")));
            }
            let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            Graph::from_edges(n, &edges)
        }
        GraphKind::Path { n } => {
            let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            Graph::from_edges(n, &edges)
        }
        GraphKind::Empty { n } => Ok(Graph::empty(n)),
        GraphKind::Star { leaves } => {
            let edges: Vec<_> = (1..=leaves).map(|j| (0, j)).collect();
            Graph::from_edges(leaves + 1, &edges)
        }
        GraphKind::DRegularBipartite { n, d } => d_regular_bipartite(n, d),
        GraphKind::PentagonGadget { copies } => Ok(pentagon_gadget(copies)),
        GraphKind::RandomGnp { n, prob, seed } => {
            if !(0.0..=1.0).contains(&prob) {
                return Err(Error::InfeasibleParams(format!(
                    "edge probability {prob} outside [0,1]"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen::<f64>() < prob {
                        edges.push((i, j));
                    }
                }
            }
            Graph::from_edges(n, &edges)
        }
        GraphKind::RandomDRegular { n, d, seed } => random_d_regular(n, d, seed),
    }
}

fn d_regular_bipartite(n: usize, d: usize) -> Result<Graph> {
    if n % 2 != 0 || d > n / 2 {
        return Err(Error::InfeasibleParams(format!(
            "bipartite d-regular needs even n and d <= n/2 (n={n}, d={d})"
        )));
    }
    let half = n / 2;
    let edges: Vec<_> = (0..half)
        .flat_map(|i| (0..d).map(move |k| (i, half + (i + k) % half)))
        .collect();
    let labels = (0..n)
        .map(|i| Some(if i < half { Role::Left } else { Role::Right }))
        .collect();
    Ok(Graph::from_edges(n, &edges)?.with_labels(labels))
}

/// Cycle on five nodes plus, for each of the ten triples of cycle nodes,
/// `copies` extra nodes adjacent to exactly that triple.
pub fn pentagon_gadget(copies: usize) -> Graph {
    let n = 5 + 10 * copies;
    let mut edges: Vec<_> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
    let mut labels = vec![Some(Role::CycleNode); 5];
    let mut next = 5;
    for triple in pentagon_triples() {
        for _ in 0..copies {
            edges.extend(triple.iter().map(|&c| (c, next)));
            labels.push(Some(Role::ClauseNode));
            next += 1;
        }
    }
    Graph::from_edges(n, &edges)
        .expect("gadget is simple")
        .with_labels(labels)
}

/// The ten triples of cycle nodes in lexicographic order; gadget node
/// `5 + t * copies + c` is attached to triple `t`.
pub fn pentagon_triples() -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(10);
    for a in 0..5 {
        for b in a + 1..5 {
            for c in b + 1..5 {
                out.push([a, b, c]);
            }
        }
    }
    out
}

fn random_d_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d >= n.max(1) || (n * d) % 2 != 0 {
        return Err(Error::InfeasibleParams(format!(
            "no simple {d}-regular graph on {n} nodes"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat(i).take(d)).collect();
    'attempt: for _ in 0..PAIRING_ATTEMPTS {
        stubs.shuffle(&mut rng);
        let mut edges = Vec::with_capacity(stubs.len() / 2);
        let mut seen = std::collections::HashSet::new();
        for pair in stubs.chunks(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'attempt;
            }
            edges.push((a, b));
        }
        return Graph::from_edges(n, &edges);
    }
    Err(Error::InfeasibleParams(format!(
        "configuration model failed to produce a simple {d}-regular graph on {n} nodes after {PAIRING_ATTEMPTS} attempts"
    )))
}

/// A 3-CNF formula over variables `1..=num_vars`; literals are signed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<[i32; 3]>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<[i32; 3]>) -> Result<Self> {
        for (k, c) in clauses.iter().enumerate() {
            for &lit in c {
                let v = lit.unsigned_abs() as usize;
                if lit == 0 || v > num_vars {
                    return Err(Error::InvalidGraph(format!(
                        "clause {k}: literal {lit} references no variable in 1..={num_vars}"
                    )));
                }
            }
        }
        Ok(Self { num_vars, clauses })
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Brute-force satisfiability check; intended for tiny formulas.
    pub fn is_satisfiable(&self) -> bool {
        assert!(
            self.num_vars <= 24,
            "brute-force satisfiability limited to 24 variables"
        );
        (0u32..(1u32 << self.num_vars)).any(|assign| {
            self.clauses.iter().all(|c| {
                c.iter().any(|&lit| {
                    let bit = assign >> (lit.unsigned_abs() - 1) & 1 == 1;
                    if lit > 0 {
                        bit
                    } else {
                        !bit
                    }
                })
            })
        })
    }

    /// All eight sign patterns over variables 1, 2, 3 (unsatisfiable).
    pub fn all_sign_patterns() -> Self {
        let clauses = (0..8)
            .map(|mask: i32| {
                let s = |b: i32, v: i32| if mask >> b & 1 == 1 { -v } else { v };
                [s(0, 1), s(1, 2), s(2, 3)]
            })
            .collect();
        Self { num_vars: 3, clauses }
    }
}

/// Parses DIMACS CNF. Clauses with one or two literals are padded by
/// repeating their last literal; longer clauses are rejected.
pub fn parse_cnf(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut current_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') || trimmed.starts_with('%') {
            continue;
        }
        if trimmed.starts_with('p') {
            let parts: Vec<_> = trimmed.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(Error::Parse {
                    line,
                    message: "expected 'p cnf <vars> <clauses>'".into(),
                });
            }
            let num = |s: &str| {
                s.parse::<usize>().map_err(|e| Error::Parse {
                    line,
                    message: format!("bad header count '{s}': {e}"),
                })
            };
            header = Some((num(parts[2])?, num(parts[3])?));
            continue;
        }
        if header.is_none() {
            return Err(Error::Parse {
                line,
                message: "clause before 'p cnf' header".into(),
            });
        }
        for tok in trimmed.split_whitespace() {
            let lit: i32 = tok.parse().map_err(|e| Error::Parse {
                line,
                message: format!("bad literal '{tok}': {e}"),
            })?;
            if current.is_empty() {
                current_line = line;
            }
            if lit == 0 {
                clauses.push(normalize_clause(&current, current_line)?);
                current.clear();
            } else {
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        clauses.push(normalize_clause(&current, current_line)?);
    }
    let (m, k) = header.ok_or(Error::Parse {
        line: 1,
        message: "missing 'p cnf' header".into(),
    })?;
    if clauses.len() != k {
        return Err(Error::Parse {
            line: 1,
            message: format!("header declares {k} clauses, found {}", clauses.len()),
        });
    }
    CnfFormula::new(m, clauses).map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })
}

fn normalize_clause(lits: &[i32], line: usize) -> Result<[i32; 3]> {
    match *lits {
        [a] => Ok([a, a, a]),
        [a, b] => Ok([a, b, b]),
        [a, b, c] => Ok([a, b, c]),
        _ => Err(Error::Parse {
            line,
            message: format!("clause has {} literals; expected 3", lits.len()),
        }),
    }
}

pub fn load_cnf(path: impl AsRef<Path>) -> Result<CnfFormula> {
    parse_cnf(&std::fs::read_to_string(path)?)
}

/// Input to the 3-SAT reduction: each clause becomes `k^exponent` nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionSpec {
    pub formula: CnfFormula,
    pub exponent: u32,
    pub node_budget: usize,
}

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

impl ReductionSpec {
    pub fn new(formula: CnfFormula, exponent: u32) -> Result<Self> {
        if exponent < 1 {
            return Err(Error::InfeasibleParams(
                "reduction exponent L must be at least 1".into(),
            ));
        }
        Ok(Self {
            formula,
            exponent,
            node_budget: DEFAULT_NODE_BUDGET,
        })
    }

    /// `k^L`, or `None` on overflow.
    pub fn multiplicity(&self) -> Option<usize> {
        self.formula.num_clauses().checked_pow(self.exponent)
    }

    /// Total node count `6m + k * k^L` as a wide integer.
    pub fn node_count(&self) -> u128 {
        let k = self.formula.num_clauses() as u128;
        let mult = k.checked_pow(self.exponent).unwrap_or(u128::MAX);
        (6 * self.formula.num_vars as u128).saturating_add(k.saturating_mul(mult))
    }
}

/// Index of the T-node of variable `v` (1-based) in a reduction graph.
pub fn t_node(var: usize) -> usize {
    6 * (var - 1)
}

pub fn f_node(var: usize) -> usize {
    6 * (var - 1) + 1
}

/// Builds the variable gadgets (T, F, two leaves on each) followed by `k^L`
/// clause nodes per clause, each joined to its literal nodes.
pub fn sat_reduction(spec: &ReductionSpec) -> Result<Graph> {
    let requested = spec.node_count();
    if requested > spec.node_budget as u128 {
        return Err(Error::Budget {
            requested,
            budget: spec.node_budget,
        });
    }
    let m = spec.formula.num_vars;
    let mult = spec.multiplicity().expect("checked by budget");
    let n = requested as usize;
    let mut edges = Vec::new();
    let mut labels = Vec::with_capacity(n);
    for v in 1..=m {
        let (t, f) = (t_node(v), f_node(v));
        edges.extend([(t, f), (t, t + 2), (t, t + 3), (f, t + 4), (f, t + 5)]);
        labels.extend([
            Some(Role::TNode),
            Some(Role::FNode),
            Some(Role::Leaf),
            Some(Role::Leaf),
            Some(Role::Leaf),
            Some(Role::Leaf),
        ]);
    }
    let mut next = 6 * m;
    for clause in &spec.formula.clauses {
        let mut targets: Vec<usize> = clause
            .iter()
            .map(|&lit| {
                let v = lit.unsigned_abs() as usize;
                if lit > 0 {
                    t_node(v)
                } else {
                    f_node(v)
                }
            })
            .collect();
        targets.sort_unstable();
        targets.dedup();
        for _ in 0..mult {
            edges.extend(targets.iter().map(|&t| (t, next)));
            labels.push(Some(Role::ClauseNode));
            next += 1;
        }
    }
    Ok(Graph::from_edges(n, &edges)?.with_labels(labels))
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    n: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    labels: BTreeMap<String, Role>,
}

/// Result of parsing a graph document.
#[derive(Debug)]
pub struct ParsedGraph {
    pub graph: Graph,
    pub duplicate_edges: usize,
}

pub fn parse_graph_json(text: &str) -> Result<ParsedGraph> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: format!("{e}"),
    })?;
    let edges: Vec<(usize, usize)> = doc.edges.iter().map(|e| (e[0], e[1])).collect();
    let (mut graph, duplicate_edges) = Graph::from_edges_counting(doc.n, &edges)?;
    if !doc.labels.is_empty() {
        let mut labels = vec![None; doc.n];
        for (key, role) in doc.labels {
            let i: usize = key
                .parse()
                .map_err(|_| Error::InvalidGraph(format!("label key '{key}' is not a node index")))?;
            if i >= doc.n {
                return Err(Error::InvalidGraph(format!("label for node {i} out of range")));
            }
            labels[i] = Some(role);
        }
        graph = graph.with_labels(labels);
    }
    Ok(ParsedGraph { graph, duplicate_edges })
}

pub fn graph_to_json(graph: &Graph) -> String {
    let labels = (0..graph.n())
        .filter_map(|i| graph.label(i).map(|r| (i.to_string(), r)))
        .collect();
    let doc = GraphDoc {
        n: graph.n(),
        edges: graph.edges().into_iter().map(|(i, j)| [i, j]).collect(),
        labels,
    };
    serde_json::to_string(&doc).expect("graph serialises")
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let parsed = parse_graph_json(&std::fs::read_to_string(path)?)?;
    if parsed.duplicate_edges > 0 {
        log::warn!("collapsed {} duplicate edge(s)", parsed.duplicate_edges);
    }
    Ok(parsed.graph)
}

pub fn save_graph(graph: &Graph, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, graph_to_json(graph))?;
    Ok(())
}
