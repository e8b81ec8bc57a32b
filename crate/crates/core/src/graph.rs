//! Immutable simple graphs with bitset adjacency, plus the elementary
//! extraction routines every engine builds on: greedy colouring, the
//! min-degree (Turán) greedy, the Ramsey recursion, and the exact
//! degeneracy-in check.
//!
//! All routines operate on an explicit vertex universe (a [`VertexSet`]),
//! so induced subgraphs are views rather than copies.

use crate::bitset::VertexSet;
use crate::error::{EngineError, GraphError};
use crate::Rational;
use num_traits::Zero;

/// An immutable, undirected simple graph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<VertexSet>,
    edge_count: usize,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n, self.edge_count)
    }
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges collapse; self-loops
    /// and out-of-range endpoints are construction errors.
    pub fn build(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut adj = vec![VertexSet::empty(n); n];
        for &(u, v) in edges {
            if u >= n {
                return Err(GraphError::VertexOutOfRange { vertex: u, n });
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].insert(v);
            adj[v].insert(u);
        }
        let edge_count = adj.iter().map(VertexSet::len).sum::<usize>() / 2;
        Ok(Graph { n, adj, edge_count })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> {
        0..self.n
    }

    /// Full vertex set `V(G)`.
    pub fn vertex_set(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    pub fn neighbours(&self, v: usize) -> &VertexSet {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Degree of `v` into `within`, i.e. `|N(v) ∩ within|`.
    pub fn degree_in(&self, v: usize, within: &VertexSet) -> usize {
        self.adj[v].intersection_len(within)
    }

    /// Neighbours of `v` restricted to `within`.
    pub fn neighbours_in(&self, v: usize, within: &VertexSet) -> VertexSet {
        self.adj[v].intersection(within)
    }

    /// Maximum degree of the induced subgraph `G[s]`, with the lowest-index
    /// vertex attaining it. `None` on the empty set.
    pub fn max_degree_in(&self, s: &VertexSet) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for v in s.iter() {
            let d = self.degree_in(v, s);
            if best.map_or(true, |(_, bd)| d > bd) {
                best = Some((v, d));
            }
        }
        best
    }

    /// Number of edges of the induced subgraph `G[s]`.
    pub fn edges_within(&self, s: &VertexSet) -> usize {
        s.iter().map(|v| self.degree_in(v, s)).sum::<usize>() / 2
    }

    /// Neighbourhood of a whole set: vertices outside `s` with a neighbour in
    /// `s`, restricted to `within`.
    pub fn set_neighbourhood(&self, s: &VertexSet, within: &VertexSet) -> VertexSet {
        let mut out = VertexSet::empty(self.n);
        for v in s.iter() {
            out.union_with(&self.adj[v]);
        }
        out.subtract(s);
        out.intersect_with(within);
        out
    }

    /// True iff no edge of `G` has both ends in `s`.
    pub fn is_stable(&self, s: &VertexSet) -> bool {
        s.iter().all(|v| self.adj[v].is_disjoint(s))
    }

    /// True iff `s` induces a complete subgraph.
    pub fn is_clique(&self, s: &VertexSet) -> bool {
        let k = s.len();
        s.iter().all(|v| self.adj[v].intersection_len(s) == k - 1)
    }

    /// Complement graph on the same vertex set.
    pub fn complement(&self) -> Graph {
        let mut adj = Vec::with_capacity(self.n);
        for v in 0..self.n {
            let mut row = self.adj[v].complement();
            row.remove(v);
            adj.push(row);
        }
        let edge_count = adj.iter().map(VertexSet::len).sum::<usize>() / 2;
        Graph {
            n: self.n,
            adj,
            edge_count,
        }
    }
}

/// Outcome of [`ramsey_stable`]: either a stable set of the requested size, or
/// a smaller best-effort set flagged as a failure certificate (legal whenever
/// `|G| < k^m`).
#[derive(Debug, Clone)]
pub enum RamseyOutcome {
    Stable(VertexSet),
    /// Best-effort set of size `< m`.
    Short(VertexSet),
}

impl RamseyOutcome {
    pub fn set(&self) -> &VertexSet {
        match self {
            RamseyOutcome::Stable(s) | RamseyOutcome::Short(s) => s,
        }
    }

    pub fn is_short(&self) -> bool {
        matches!(self, RamseyOutcome::Short(_))
    }
}

/// Greedy colouring of `G[within]` in ascending vertex order; returns the
/// colour classes. Uses at most `Δ(G[within]) + 1` colours.
pub fn greedy_colour_classes(g: &Graph, within: &VertexSet) -> Vec<VertexSet> {
    let mut classes: Vec<VertexSet> = Vec::new();
    for v in within.iter() {
        let slot = classes
            .iter()
            .position(|c| g.neighbours(v).is_disjoint(c))
            .unwrap_or_else(|| {
                classes.push(VertexSet::empty(g.n()));
                classes.len() - 1
            });
        classes[slot].insert(v);
    }
    classes
}

/// Stable set of size `≥ ⌈|within| / (Δ+1)⌉`: greedily colour and keep the
/// largest class (lowest class index on ties).
pub fn greedy_maxdeg_stable(g: &Graph, within: &VertexSet) -> VertexSet {
    greedy_colour_classes(g, within)
        .into_iter()
        .max_by_key(VertexSet::len)
        .unwrap_or_else(|| VertexSet::empty(g.n()))
}

/// Min-degree greedy: repeatedly take a minimum-degree vertex of the
/// remaining graph and delete its closed neighbourhood. The result is stable
/// of size `≥ n/(avg_degree + 1)`.
pub fn turan_stable(g: &Graph, within: &VertexSet) -> VertexSet {
    let mut remaining = within.clone();
    let mut out = VertexSet::empty(g.n());
    while let Some(v) = remaining
        .iter()
        .min_by_key(|&v| (g.degree_in(v, &remaining), v))
    {
        out.insert(v);
        remaining.remove(v);
        remaining.subtract(g.neighbours(v));
    }
    out
}

/// Size threshold above which the Ramsey recursion is guaranteed to produce a
/// stable set of size `m` under `ω ≤ k`: `k^m` for `k ≥ 2`, `m` for `k = 1`.
fn ramsey_need(k: usize, m: usize) -> u64 {
    if m == 0 {
        0
    } else if k <= 1 {
        m as u64
    } else {
        (k as u64).saturating_pow(m.min(64) as u32)
    }
}

/// Ramsey extraction: find a stable set of size `m` in `G[within]`, assuming
/// `ω(G[within]) ≤ k`. Succeeds whenever `|within| ≥ k^m` (`k ≥ 2`); on
/// smaller inputs it may return a shorter set flagged [`RamseyOutcome::Short`].
///
/// Recursion: pick a maximum-degree vertex `v`; a stable `m`-set either lives
/// inside `N(v)` (clique bound drops to `k-1`) or consists of `v` plus a
/// stable `(m-1)`-set among the non-neighbours. An edge surviving to a
/// `k = 1` subproblem certifies a clique above the asserted bound, which is
/// reported as [`EngineError::HypothesisViolation`].
pub fn ramsey_stable(
    g: &Graph,
    within: &VertexSet,
    k: usize,
    m: usize,
) -> Result<RamseyOutcome, EngineError> {
    if k == 0 {
        if within.is_empty() {
            return Ok(if m == 0 {
                RamseyOutcome::Stable(VertexSet::empty(g.n()))
            } else {
                RamseyOutcome::Short(VertexSet::empty(g.n()))
            });
        }
        return Err(EngineError::ParamRefusal(
            "ramsey_stable requires k >= 1 on nonempty graphs".into(),
        ));
    }
    let mut chain = Vec::new();
    let set = ramsey_rec(g, within, k, m, &mut chain)?;
    debug_assert!(g.is_stable(&set));
    Ok(if set.len() >= m {
        RamseyOutcome::Stable(set)
    } else {
        RamseyOutcome::Short(set)
    })
}

/// `chain` records the neighbourhood-descent vertices; together they form a
/// clique, so an edge found at `k == 1` yields explicit violation evidence.
fn ramsey_rec(
    g: &Graph,
    within: &VertexSet,
    k: usize,
    m: usize,
    chain: &mut Vec<usize>,
) -> Result<VertexSet, EngineError> {
    if m == 0 || within.is_empty() {
        return Ok(VertexSet::empty(g.n()));
    }
    if k == 1 {
        // Must be edgeless under the hypothesis.
        for v in within.iter() {
            if let Some(u) = g.neighbours_in(v, within).first() {
                let mut clique = chain.clone();
                clique.push(v);
                clique.push(u);
                return Err(EngineError::HypothesisViolation { clique });
            }
        }
        let take: Vec<usize> = within.iter().take(m).collect();
        return Ok(VertexSet::from_iter(g.n(), take));
    }
    let (v, _) = g.max_degree_in(within).expect("nonempty");
    let nbrs = g.neighbours_in(v, within);
    let mut others = within.clone();
    others.remove(v);
    others.subtract(&nbrs);

    // Neighbourhood branch first, falling back to the non-neighbourhood;
    // correctness comes from the postcondition, not the branching order.
    if nbrs.len() as u64 >= ramsey_need(k - 1, m) {
        chain.push(v);
        let r = ramsey_rec(g, &nbrs, k - 1, m, chain)?;
        chain.pop();
        if r.len() >= m {
            return Ok(r);
        }
    }
    if others.len() as u64 >= ramsey_need(k, m - 1) {
        let mut r = ramsey_rec(g, &others, k, m - 1, chain)?;
        if r.len() >= m - 1 {
            r.insert(v);
            return Ok(r);
        }
    }
    // Best effort below the guarantee threshold: try both sides, keep the
    // larger stable set.
    chain.push(v);
    let a = ramsey_rec(g, &nbrs, k - 1, m, chain)?;
    chain.pop();
    let mut b = ramsey_rec(g, &others, k, m - 1, chain)?;
    b.insert(v);
    Ok(if a.len() >= b.len() { a } else { b })
}

/// Result of the exact degeneracy-in decision.
#[derive(Debug, Clone)]
pub enum DegeneracyResult {
    /// A witnessing ordering `x_1 … x_n` of `X`.
    Ordering(Vec<usize>),
    /// No ordering exists; carries the stuck remainder (every vertex of it
    /// keeps more than `d` neighbours among the remainder and `V ∖ X`).
    Refutation(VertexSet),
}

/// Decides whether `X` is `d`-degenerate in `G`: orderable `x_1 … x_n` so that
/// each `x_i` has at most `d` neighbours in `{x_{i+1}, …} ∪ (V(G) ∖ X)`.
///
/// Greedy peeling (always remove a vertex of minimum remaining cost) is exact
/// for this definition: costs only drop as vertices leave, so removing any
/// eligible vertex preserves orderability of the rest.
pub fn is_degenerate_in(g: &Graph, x: &VertexSet, d: usize) -> DegeneracyResult {
    let outside = x.complement();
    let mut remaining = x.clone();
    let mut order = Vec::with_capacity(x.len());
    while !remaining.is_empty() {
        let (cost, v) = remaining
            .iter()
            .map(|v| (g.degree_in(v, &remaining) + g.degree_in(v, &outside), v))
            .min()
            .expect("nonempty");
        if cost > d {
            return DegeneracyResult::Refutation(remaining);
        }
        order.push(v);
        remaining.remove(v);
    }
    DegeneracyResult::Ordering(order)
}

/// Checks that `ordering` is a valid `d`-degenerate-in ordering of `x`.
pub fn check_degeneracy_ordering(g: &Graph, x: &VertexSet, ordering: &[usize], d: usize) -> bool {
    if ordering.len() != x.len() || !ordering.iter().all(|&v| x.contains(v)) {
        return false;
    }
    let mut remaining = x.clone();
    let outside = x.complement();
    for &v in ordering {
        if !remaining.contains(v) {
            return false; // duplicate
        }
        remaining.remove(v);
        if g.degree_in(v, &remaining) + g.degree_in(v, &outside) > d {
            return false;
        }
    }
    true
}

/// Colours `X` along a valid `d`-degenerate-in ordering with at most `d + 1`
/// stable classes (processing the ordering in reverse, each vertex sees at
/// most `d` coloured neighbours).
pub fn colour_degenerate(
    g: &Graph,
    x: &VertexSet,
    ordering: &[usize],
    d: usize,
) -> Result<Vec<VertexSet>, EngineError> {
    if !check_degeneracy_ordering(g, x, ordering, d) {
        return Err(EngineError::ParamRefusal(
            "ordering is not a valid d-degenerate-in ordering".into(),
        ));
    }
    let mut classes: Vec<VertexSet> = Vec::new();
    for &v in ordering.iter().rev() {
        let slot = classes
            .iter()
            .position(|c| g.neighbours(v).is_disjoint(c))
            .unwrap_or_else(|| {
                classes.push(VertexSet::empty(g.n()));
                classes.len() - 1
            });
        classes[slot].insert(v);
    }
    debug_assert!(classes.len() <= d + 1);
    Ok(classes)
}

/// Finds a clique of the requested size inside `within` by index-ordered
/// backtracking, or `None`. Intended for small sizes (violation evidence).
pub fn find_clique(g: &Graph, within: &VertexSet, size: usize) -> Option<Vec<usize>> {
    fn go(g: &Graph, cand: &VertexSet, need: usize, acc: &mut Vec<usize>) -> bool {
        if need == 0 {
            return true;
        }
        if cand.len() < need {
            return false;
        }
        for v in cand.iter() {
            let mut next = g.neighbours_in(v, cand);
            // only extend with higher-indexed vertices to avoid permutations
            for u in cand.iter() {
                if u > v {
                    break;
                }
                next.remove(u);
            }
            acc.push(v);
            if go(g, &next, need - 1, acc) {
                return true;
            }
            acc.pop();
        }
        false
    }
    let mut acc = Vec::new();
    if go(g, within, size, &mut acc) {
        Some(acc)
    } else {
        None
    }
}

/// Average degree of `G[s]` as an exact rational (`0` on the empty set).
pub fn average_degree(g: &Graph, s: &VertexSet) -> Rational {
    let n = s.len();
    if n == 0 {
        return Rational::zero();
    }
    Rational::new(
        (2 * g.edges_within(s)).into(),
        crate::Int::from(n),
    )
}
