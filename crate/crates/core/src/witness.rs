//! Brute-force oracles and certificate validators.
//!
//! These are the trust anchor for every engine: exact maximum stable set and
//! clique number by branch-and-bound, induced-pattern search by backtracking
//! over a dfs-enumeration, and the exact fractional chromatic number via a
//! rational LP over all maximal stable sets. Oracles refuse beyond their
//! configured limits rather than approximate.

pub mod lp;

use crate::bitset::VertexSet;
use crate::error::EngineError;
use crate::graph::{find_clique, Graph};
use crate::outcome::{SearchOutcome, TreeWitness};
use crate::tree::TreePattern;
use crate::weights::Weighting;
use crate::Rational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

/// Default vertex limit for the branch-and-bound oracles.
pub const ALPHA_LIMIT: usize = 60;
/// Vertex limit for the exact fractional-chromatic oracle.
pub const FRAC_LIMIT: usize = 16;
/// Pattern-size / host-size limits for induced-tree search.
pub const TREE_PATTERN_LIMIT: usize = 10;
pub const TREE_HOST_LIMIT: usize = 60;
/// Hard cap on maximal-stable-set enumeration.
pub const MAX_STABLE_SETS: usize = 1_000_000;

/// Exact maximum stable set of `G[within]` with an optimal set attached.
pub fn exact_alpha_in(g: &Graph, within: &VertexSet) -> Result<(usize, VertexSet), EngineError> {
    if within.len() > ALPHA_LIMIT {
        return Err(EngineError::OracleLimit(format!(
            "exact_alpha limited to {ALPHA_LIMIT} vertices, got {}",
            within.len()
        )));
    }
    let mut best = VertexSet::empty(g.n());
    let mut current = VertexSet::empty(g.n());
    alpha_branch(g, within.clone(), &mut current, &mut best);
    Ok((best.len(), best))
}

/// Exact `α(G)`.
pub fn exact_alpha(g: &Graph) -> Result<(usize, VertexSet), EngineError> {
    exact_alpha_in(g, &g.vertex_set())
}

/// Branch on a maximum-degree vertex: include it (deleting its closed
/// neighbourhood) or exclude it. Pruned by a greedy clique-cover bound.
fn alpha_branch(g: &Graph, remaining: VertexSet, current: &mut VertexSet, best: &mut VertexSet) {
    let cur_len = current.len();
    match g.max_degree_in(&remaining) {
        None => {
            if cur_len > best.len() {
                *best = current.clone();
            }
        }
        Some((_, 0)) => {
            // remainder is edgeless: take everything
            if cur_len + remaining.len() > best.len() {
                *best = current.union(&remaining);
            }
        }
        Some((v, _)) => {
            if cur_len + clique_cover_bound(g, &remaining) <= best.len() {
                return;
            }
            // include v
            let mut rem = remaining.clone();
            rem.remove(v);
            rem.subtract(g.neighbours(v));
            current.insert(v);
            alpha_branch(g, rem, current, best);
            current.remove(v);
            // exclude v
            let mut rem = remaining;
            rem.remove(v);
            alpha_branch(g, rem, current, best);
        }
    }
}

/// Greedy clique cover of `G[s]`; its size upper-bounds `α(G[s])`.
fn clique_cover_bound(g: &Graph, s: &VertexSet) -> usize {
    let mut cliques: Vec<VertexSet> = Vec::new();
    for v in s.iter() {
        match cliques
            .iter_mut()
            .find(|c| c.is_subset_of(g.neighbours(v)))
        {
            Some(c) => c.insert(v),
            None => cliques.push(VertexSet::singleton(g.n(), v)),
        }
    }
    cliques.len()
}

/// Exact `ω(G)` (maximum stable set of the complement), with a witnessing
/// clique.
pub fn exact_omega(g: &Graph) -> Result<(usize, VertexSet), EngineError> {
    if g.n() > ALPHA_LIMIT {
        return Err(EngineError::OracleLimit(format!(
            "exact_omega limited to {ALPHA_LIMIT} vertices, got {}",
            g.n()
        )));
    }
    exact_alpha(&g.complement())
}

/// Backtracking search for an induced copy of `tree` in `G[within]`,
/// extending a partial embedding along a dfs-enumeration. Each new pattern
/// vertex must map to a neighbour of its embedded parent that is nonadjacent
/// to every other embedded vertex.
pub fn find_induced_tree_in(
    g: &Graph,
    within: &VertexSet,
    tree: &TreePattern,
) -> Result<Option<TreeWitness>, EngineError> {
    if tree.len() > TREE_PATTERN_LIMIT {
        return Err(EngineError::OracleLimit(format!(
            "find_induced_tree limited to patterns of {TREE_PATTERN_LIMIT} vertices, got {}",
            tree.len()
        )));
    }
    if within.len() > TREE_HOST_LIMIT {
        return Err(EngineError::OracleLimit(format!(
            "find_induced_tree limited to hosts of {TREE_HOST_LIMIT} vertices, got {}",
            within.len()
        )));
    }
    let dfs = tree.dfs_enumeration(tree.root());
    let mut embedding = vec![usize::MAX; tree.len()];
    let mut used = VertexSet::empty(g.n());
    if embed_step(g, within, tree, &dfs.order, &dfs.parent, 0, &mut embedding, &mut used) {
        let w = TreeWitness {
            tree: tree.clone(),
            embedding,
        };
        debug_assert!(w.verify(g));
        Ok(Some(w))
    } else {
        Ok(None)
    }
}

/// Searches the whole graph.
pub fn find_induced_tree(g: &Graph, tree: &TreePattern) -> Result<Option<TreeWitness>, EngineError> {
    find_induced_tree_in(g, &g.vertex_set(), tree)
}

#[allow(clippy::too_many_arguments)]
fn embed_step(
    g: &Graph,
    within: &VertexSet,
    tree: &TreePattern,
    order: &[usize],
    parent: &[usize],
    idx: usize,
    embedding: &mut [usize],
    used: &mut VertexSet,
) -> bool {
    if idx == order.len() {
        return true;
    }
    let tv = order[idx];
    let mut candidates = if idx == 0 {
        within.clone()
    } else {
        g.neighbours_in(embedding[parent[tv]], within)
    };
    candidates.subtract(used);
    // induced: forbid adjacency to every embedded vertex other than the parent
    for &pv in &order[..idx] {
        if pv != parent[tv] {
            candidates.subtract(g.neighbours(embedding[pv]));
        }
    }
    for cand in candidates.iter() {
        embedding[tv] = cand;
        used.insert(cand);
        if embed_step(g, within, tree, order, parent, idx + 1, embedding, used) {
            return true;
        }
        used.remove(cand);
        embedding[tv] = usize::MAX;
    }
    false
}

/// Maximal stable sets of `G` (maximal cliques of the complement), by
/// Bron–Kerbosch with pivoting. Refuses past [`MAX_STABLE_SETS`].
pub fn maximal_stable_sets(g: &Graph) -> Result<Vec<VertexSet>, EngineError> {
    let comp = g.complement();
    let mut out = Vec::new();
    let mut r = VertexSet::empty(g.n());
    bron_kerbosch(
        &comp,
        &mut r,
        comp.vertex_set(),
        VertexSet::empty(g.n()),
        &mut out,
    )?;
    out.sort_by_key(|s| s.to_vec());
    Ok(out)
}

fn bron_kerbosch(
    comp: &Graph,
    r: &mut VertexSet,
    p: VertexSet,
    x: VertexSet,
    out: &mut Vec<VertexSet>,
) -> Result<(), EngineError> {
    if p.is_empty() && x.is_empty() {
        if out.len() >= MAX_STABLE_SETS {
            return Err(EngineError::OracleLimit(
                "maximal stable set enumeration exceeded cap".into(),
            ));
        }
        out.push(r.clone());
        return Ok(());
    }
    let pivot = p
        .union(&x)
        .iter()
        .max_by_key(|&u| (p.intersection_len(comp.neighbours(u)), std::cmp::Reverse(u)))
        .expect("p ∪ x nonempty");
    let mut p = p;
    let mut x = x;
    let branch = p.difference(comp.neighbours(pivot));
    for v in branch.iter() {
        r.insert(v);
        bron_kerbosch(
            comp,
            r,
            p.intersection(comp.neighbours(v)),
            x.intersection(comp.neighbours(v)),
            out,
        )?;
        r.remove(v);
        p.remove(v);
        x.insert(v);
    }
    Ok(())
}

/// Both optima of the fractional-colouring linear program: the minimum
/// fractional cover by maximal stable sets, and the maximum total weight of a
/// weighting in which every stable set weighs at most 1. LP duality says they
/// agree; both are computed independently and exactly.
pub struct FracLp {
    pub cover_optimum: Rational,
    pub weight_optimum: Rational,
    pub stable_set_count: usize,
}

/// Solves both programs for `G` (limit [`FRAC_LIMIT`] vertices).
pub fn frac_chromatic_lp(g: &Graph) -> Result<FracLp, EngineError> {
    if g.n() > FRAC_LIMIT {
        return Err(EngineError::OracleLimit(format!(
            "exact_frac_chromatic limited to {FRAC_LIMIT} vertices, got {}",
            g.n()
        )));
    }
    if g.n() == 0 {
        return Ok(FracLp {
            cover_optimum: Rational::zero(),
            weight_optimum: Rational::zero(),
            stable_set_count: 0,
        });
    }
    let sets = maximal_stable_sets(g)?;
    let ns = sets.len();
    // primal: min Σ q_A  s.t.  Σ_{A ∋ v} q_A ≥ 1 per vertex
    let cost = vec![Rational::one(); ns];
    let rows: Vec<(Vec<Rational>, lp::Sense, Rational)> = g
        .vertices()
        .map(|v| {
            let coeffs = sets
                .iter()
                .map(|s| {
                    if s.contains(v) {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            (coeffs, lp::Sense::Ge, Rational::one())
        })
        .collect();
    let (cover_optimum, _) =
        lp::solve_min(&cost, &rows).map_err(|e| EngineError::InternalInvariant(e.to_string()))?;

    // dual: max Σ w_v  s.t.  Σ_{v ∈ A} w_v ≤ 1 per stable set
    let cost = vec![Rational::one(); g.n()];
    let rows: Vec<(Vec<Rational>, lp::Sense, Rational)> = sets
        .iter()
        .map(|s| {
            let coeffs = g
                .vertices()
                .map(|v| {
                    if s.contains(v) {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            (coeffs, lp::Sense::Le, Rational::one())
        })
        .collect();
    let (weight_optimum, _) =
        lp::solve_max(&cost, &rows).map_err(|e| EngineError::InternalInvariant(e.to_string()))?;

    Ok(FracLp {
        cover_optimum,
        weight_optimum,
        stable_set_count: ns,
    })
}

/// Exact fractional chromatic number `χ*(G)` for `|G| ≤ 16`, with the dual
/// optimum used as an internal cross-check.
pub fn exact_frac_chromatic(g: &Graph) -> Result<Rational, EngineError> {
    let sol = frac_chromatic_lp(g)?;
    if sol.cover_optimum != sol.weight_optimum {
        return Err(EngineError::InternalInvariant(format!(
            "LP duality gap: primal {} vs dual {}",
            sol.cover_optimum, sol.weight_optimum
        )));
    }
    Ok(sol.cover_optimum)
}

/// One line of a validation report.
#[derive(Clone, Debug, Serialize)]
pub struct CheckLine {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Result of re-checking a [`SearchOutcome`] against its graph and pattern.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<CheckLine>,
}

impl ValidationReport {
    fn push(&mut self, name: &'static str, passed: bool, detail: String) {
        self.passed &= passed;
        self.checks.push(CheckLine {
            name,
            passed,
            detail,
        });
    }
}

/// Re-validates an outcome: witnesses are re-checked as induced isomorphisms
/// of the expected pattern; certificates are re-checked for stability, the
/// size-versus-claimed-bound inequality, and (when supplied) the weighted
/// guarantee. `ω(G) ≤ k` is re-verified by exact clique search when the host
/// is within oracle limits.
pub fn validate_outcome(
    g: &Graph,
    tree: &TreePattern,
    k: usize,
    outcome: &SearchOutcome,
    weights: Option<&Weighting>,
) -> ValidationReport {
    let mut report = ValidationReport {
        passed: true,
        checks: Vec::new(),
    };
    match outcome {
        SearchOutcome::Witness(w) => {
            let same_shape = w.tree.len() == tree.len() && w.tree.edges() == tree.edges();
            report.push(
                "witness-pattern-matches",
                same_shape,
                format!("witness tree on {} vertices", w.tree.len()),
            );
            report.push(
                "witness-induced-isomorphism",
                w.verify(g),
                format!("embedding {:?}", w.embedding),
            );
        }
        SearchOutcome::Stable(cert) => {
            let stable = g.is_stable(&cert.set);
            report.push("cert-stable", stable, format!("|S| = {}", cert.set.len()));
            let needed = if cert.claimed_bound.is_positive() {
                ceil_rational(&cert.claimed_bound)
            } else {
                0
            };
            report.push(
                "cert-size-vs-claim",
                cert.set.len() >= needed,
                format!("|S| = {} vs ⌈{}⌉ = {}", cert.set.len(), cert.claimed_bound, needed),
            );
            report.push(
                "cert-nonempty-on-nonempty-graph",
                g.n() == 0 || !cert.set.is_empty(),
                format!("n = {}", g.n()),
            );
            if let Some(claim) = &cert.weighted {
                match weights {
                    Some(w) => {
                        let achieved = w.sum(&cert.set);
                        let total = w.sum(&g.vertex_set());
                        let ok = achieved >= &claim.constant * &total
                            && achieved == claim.achieved
                            && total == claim.total_weight;
                        report.push(
                            "cert-weighted-claim",
                            ok,
                            format!("w(S) = {} vs c·w(G) = {}", achieved, &claim.constant * &total),
                        );
                    }
                    None => report.push(
                        "cert-weighted-claim",
                        false,
                        "weighted claim present but no weighting supplied".into(),
                    ),
                }
            }
        }
    }
    if g.n() <= ALPHA_LIMIT {
        let clique = find_clique(g, &g.vertex_set(), k + 1);
        report.push(
            "omega-within-bound",
            clique.is_none(),
            match &clique {
                Some(c) => format!("found K_{} = {:?}", k + 1, c),
                None => format!("no K_{}", k + 1),
            },
        );
    }
    report
}

/// `⌈x⌉` clamped to `usize` (0 for negative arguments).
pub fn ceil_rational(x: &Rational) -> usize {
    use num_traits::ToPrimitive;
    let c = x.ceil().to_integer();
    if c.is_negative() {
        0
    } else {
        c.to_usize().unwrap_or(usize::MAX)
    }
}

/// The Ramsey bound `ω^{k-1} + … + ω` (empty sum for `k ≤ 1`).
pub fn ramsey_rhs(omega: usize, k: usize) -> crate::Int {
    let w = crate::Int::from(omega);
    let mut acc = crate::Int::zero();
    let mut pw = w.clone();
    for _ in 1..k {
        acc += &pw;
        pw *= &w;
    }
    acc
}
