//! The weighted multibroom engine: layered broom-or-degenerate search and
//! the linear-weight stable-set algorithm with recursion on clique number.
//!
//! [`broom_or_degenerate`] explores from a root vertex in weight-capped
//! layers `L_1, L_2, …`: either it assembles an induced `(ℓ,m)`-broom, or it
//! certifies a pair `(X, Y)` where `X` carries a constant fraction of the
//! explored weight and is `k^m`-degenerate in the graph minus `Y` and the
//! root. [`weighted_stable_multibroom`] grows a global such pair until it
//! swallows the graph, attaching brooms arm-by-arm along the way; if all
//! arms attach the multibroom itself is returned as a witness. All weight
//! comparisons are exact rationals.

use crate::bitset::VertexSet;
use crate::error::EngineError;
use crate::graph::{find_clique, ramsey_stable, Graph, RamseyOutcome};
use crate::outcome::{CertMode, SearchOutcome, StableSetCert, TreeWitness, WeightedClaim};
use crate::tree::MultibroomSpec;
use crate::weights::Weighting;
use crate::{ratio, Int, Rational};
use num_traits::{One, Zero};

/// A rooted broom embedding: `path[0]` is the root, `path[len-1]` carries the
/// bristles.
#[derive(Clone, Debug)]
pub struct BroomWitness {
    pub path: Vec<usize>,
    pub leaves: Vec<usize>,
}

impl BroomWitness {
    /// Checks that the embedding is an induced `(ℓ, m)`-broom in `G[within]`
    /// rooted at `path[0]`.
    pub fn verify(&self, g: &Graph, within: &VertexSet, ell: usize, m: usize) -> bool {
        if self.path.len() != ell + 1 || self.leaves.len() != m {
            return false;
        }
        let all: Vec<usize> = self.path.iter().chain(&self.leaves).copied().collect();
        let mut seen = VertexSet::empty(g.n());
        for &v in &all {
            if !within.contains(v) || seen.contains(v) {
                return false;
            }
            seen.insert(v);
        }
        let end = *self.path.last().unwrap();
        for (i, &a) in all.iter().enumerate() {
            for &b in all.iter().skip(i + 1) {
                let should = adjacent_in_broom(&self.path, &self.leaves, a, b, end);
                if g.has_edge(a, b) != should {
                    return false;
                }
            }
        }
        true
    }
}

fn adjacent_in_broom(path: &[usize], leaves: &[usize], a: usize, b: usize, end: usize) -> bool {
    let pos = |v: usize| path.iter().position(|&u| u == v);
    match (pos(a), pos(b)) {
        (Some(i), Some(j)) => i.abs_diff(j) == 1,
        (Some(_), None) => a == end && leaves.contains(&b),
        (None, Some(_)) => b == end && leaves.contains(&a),
        (None, None) => false,
    }
}

/// The degenerate side of [`broom_or_degenerate`]: disjoint `X`, `Y` with
/// `w(X) ≥ w(X∪Y)/(d·2^{2ℓ})`, `w(X∪Y) ≥ w(N(v))`, and a stored ordering
/// witnessing that `X` is `k^m`-degenerate in `G ∖ (Y ∪ {v})`.
#[derive(Clone, Debug)]
pub struct DegeneratePair {
    pub x: VertexSet,
    pub y: VertexSet,
    pub ordering: Vec<usize>,
}

/// Reply of the inner stable-set oracle (the engine one clique level down).
pub enum OracleReply {
    /// Stable `S` with `d · w(S) ≥ w` of the queried set.
    Stable(VertexSet),
    /// The inner engine stumbled on a full pattern copy; propagate it.
    Witness(TreeWitness),
}

/// Outcome of [`broom_or_degenerate`].
pub enum BroomOutcome {
    Broom(BroomWitness),
    Pair(DegeneratePair),
    /// A witness surfaced from an inner oracle call.
    InnerWitness(TreeWitness),
}

/// Checks a `bound`-degenerate-in ordering of `x` relative to an explicit
/// ambient vertex set (counting neighbours among later `x`-vertices and
/// `ambient ∖ x`).
pub fn check_degenerate_in(
    g: &Graph,
    ambient: &VertexSet,
    x: &VertexSet,
    ordering: &[usize],
    bound: usize,
) -> bool {
    if ordering.len() != x.len() || !x.is_subset_of(ambient) {
        return false;
    }
    let outside = ambient.difference(x);
    let mut remaining = x.clone();
    for &v in ordering {
        if !remaining.contains(v) {
            return false;
        }
        remaining.remove(v);
        if g.degree_in(v, &remaining) + g.degree_in(v, &outside) > bound {
            return false;
        }
    }
    true
}

/// Exact decision: a stable subset of `cand` of size `m`, by backtracking.
/// Only used on candidate sets of size `< k^m`, so the search is tiny.
pub fn find_stable_subset(g: &Graph, cand: &VertexSet, m: usize) -> Option<VertexSet> {
    fn go(g: &Graph, avail: &VertexSet, need: usize, acc: &mut Vec<usize>) -> bool {
        if need == 0 {
            return true;
        }
        if avail.len() < need {
            return false;
        }
        let v = avail.first().unwrap();
        // include v
        let mut with = avail.clone();
        with.remove(v);
        with.subtract(g.neighbours(v));
        acc.push(v);
        if go(g, &with, need - 1, acc) {
            return true;
        }
        acc.pop();
        // exclude v
        let mut without = avail.clone();
        without.remove(v);
        go(g, &without, need, acc)
    }
    let mut acc = Vec::new();
    if go(g, cand, m, &mut acc) {
        Some(VertexSet::from_iter(g.n(), acc))
    } else {
        None
    }
}

/// Decides, exactly, whether `u` has `m` pairwise nonadjacent neighbours in
/// `pool`; uses the Ramsey extraction when the neighbourhood is large enough
/// to guarantee success and exhaustive search otherwise.
fn stable_m_among_neighbours(
    g: &Graph,
    u: usize,
    pool: &VertexSet,
    k: usize,
    m: usize,
) -> Result<Option<VertexSet>, EngineError> {
    if m == 0 {
        return Ok(Some(VertexSet::empty(g.n())));
    }
    let cand = g.neighbours_in(u, pool);
    let km = (k as u64).saturating_pow(m as u32);
    if (cand.len() as u64) >= km {
        // ω(G[cand]) ≤ k-1 since cand lies in a neighbourhood
        match ramsey_stable(g, &cand, k - 1, m)? {
            RamseyOutcome::Stable(s) => Ok(Some(s)),
            RamseyOutcome::Short(_) => {
                if let Some(mut clique) = find_clique(g, &cand, k) {
                    clique.push(u);
                    return Err(EngineError::HypothesisViolation { clique });
                }
                Err(EngineError::InternalInvariant(
                    "ramsey fell short above the guarantee threshold".into(),
                ))
            }
        }
    } else {
        Ok(find_stable_subset(g, &cand, m))
    }
}

/// `(set ∪ N(set)) ∩ within`.
fn closed_neighbourhood(g: &Graph, set: &VertexSet, within: &VertexSet) -> VertexSet {
    let mut out = set.clone();
    for v in set.iter() {
        out.union_with(g.neighbours(v));
    }
    out.intersect_with(within);
    out
}

/// Weighted broom-or-degenerate search (induction on `ℓ`).
///
/// Given `ω(G[universe]) ≤ k`, a root `v`, target arm shape `(ℓ, m)` and an
/// inner oracle achieving factor `d` on clique number `< k` subgraphs,
/// returns an induced `(ℓ,m)`-broom rooted at `v`, or a [`DegeneratePair`].
/// Zero-weight vertices other than `v` are set aside first and re-join `Y`
/// at the end.
#[allow(clippy::too_many_arguments)]
pub fn broom_or_degenerate(
    g: &Graph,
    universe: &VertexSet,
    w: &Weighting,
    v: usize,
    k: usize,
    ell: usize,
    m: usize,
    d: &Rational,
    oracle: &dyn Fn(&VertexSet) -> Result<OracleReply, EngineError>,
) -> Result<BroomOutcome, EngineError> {
    assert!(ell >= 1, "brooms have length >= 1");
    assert!(universe.contains(v), "root must lie in the universe");
    let mut working = w.positive_support(universe);
    working.insert(v);
    let deleted = universe.difference(&working);

    let finish_pair = |x: VertexSet, mut y: VertexSet, ordering: Vec<usize>| {
        y.union_with(&deleted);
        let pair = DegeneratePair { x, y, ordering };
        check_degenerate_pair(g, universe, w, v, k, ell, m, d, &pair)?;
        Ok(BroomOutcome::Pair(pair))
    };

    let nbrs_v = g.neighbours_in(v, &working);
    if nbrs_v.is_empty() {
        // all three pair inequalities hold at weight zero
        return finish_pair(VertexSet::empty(g.n()), VertexSet::empty(g.n()), vec![]);
    }
    let delta = w
        .max_weighted_degree(g, &working)
        .map(|(_, dd)| dd)
        .unwrap_or_else(Rational::zero);

    // Layers: L_0 = {v}; R_{i-1} is a maximal subset of L_{i-1} whose fresh
    // neighbourhood weighs at most 2Δ (greedy in descending vertex weight);
    // L_i is that neighbourhood. first_nbr records each layer vertex's lowest
    // chosen predecessor, which yields induced paths back to v.
    let two_delta = ratio(2) * &delta;
    let mut layers: Vec<VertexSet> = vec![VertexSet::singleton(g.n(), v)];
    let mut chosen: Vec<Vec<usize>> = Vec::new(); // R_0 … R_{ℓ-1}
    let mut first_nbr: Vec<Option<usize>> = vec![None; g.n()];
    let mut explored = VertexSet::singleton(g.n(), v); // {v} ∪ J_i
    for _ in 1..=ell {
        let prev = layers.last().unwrap().clone();
        let mut members: Vec<usize> = prev.iter().collect();
        members.sort_by(|&a, &b| w.get(b).cmp(w.get(a)).then(a.cmp(&b)));
        let mut r_set: Vec<usize> = Vec::new();
        let mut fresh = VertexSet::empty(g.n());
        let mut fresh_weight = Rational::zero();
        for u in members {
            let mut add = g.neighbours_in(u, &working);
            add.subtract(&explored);
            add.subtract(&fresh);
            let add_weight = w.sum(&add);
            if &fresh_weight + &add_weight <= two_delta {
                r_set.push(u);
                fresh_weight += add_weight;
                fresh.union_with(&add);
            }
        }
        // every layer vertex gets its lowest chosen predecessor
        let r_mask = VertexSet::from_iter(g.n(), r_set.iter().copied());
        for z in fresh.iter() {
            first_nbr[z] = Some(g.neighbours_in(z, &r_mask).first().unwrap());
        }
        if w.sum(&fresh) > two_delta {
            return Err(EngineError::InternalInvariant(
                "layer weight cap violated".into(),
            ));
        }
        explored.union_with(&fresh);
        chosen.push(r_set);
        layers.push(fresh);
    }
    debug_assert_eq!(layers[1], nbrs_v, "L_1 must be exactly N(v)");

    let layer_weight: Vec<Rational> = layers.iter().map(|l| w.sum(l)).collect();
    // minimal j with w(L_{j+1}) < min(w(L_j), Δ)
    let drop =
        (1..ell).find(|&j| layer_weight[j + 1] < layer_weight[j].clone().min(delta.clone()));

    match drop {
        None => broom_case_top(
            g, w, v, k, ell, m, d, oracle, &working, &layers, &chosen, &first_nbr, finish_pair,
        ),
        Some(1) => {
            // Single-layer drop: a stable slice of N(v) is already the pair.
            let l1 = layers[1].clone();
            let s = match oracle(&l1)? {
                OracleReply::Witness(tw) => return Ok(BroomOutcome::InnerWitness(tw)),
                OracleReply::Stable(s) => s,
            };
            if d * w.sum(&s) < w.sum(&l1) {
                return Err(EngineError::InternalInvariant(
                    "inner oracle missed its factor".into(),
                ));
            }
            let mut y = l1.difference(&s);
            y.union_with(&layers[2]);
            let ordering: Vec<usize> = s.iter().collect();
            finish_pair(s, y, ordering)
        }
        Some(j) => augment_case(
            g, w, v, k, ell, m, d, oracle, &working, &layers, &chosen, &first_nbr, j, finish_pair,
        ),
    }
}

/// Climb `first_nbr` pointers from a vertex of `L_i` back to the root,
/// returning the induced path `v … z` (`i` edges).
fn path_to_root(first_nbr: &[Option<usize>], v: usize, z: usize, i: usize) -> Vec<usize> {
    let mut path = vec![z];
    let mut cur = z;
    for _ in 0..i {
        cur = first_nbr[cur].expect("layer vertices have predecessors");
        path.push(cur);
    }
    debug_assert_eq!(*path.last().unwrap(), v);
    path.reverse();
    path
}

/// Case: layer weights never dropped, so the exploration reached `L_ℓ` with
/// full weight. Partition `L_ℓ` by first neighbour in `R_{ℓ-1}`, pull a
/// stable slice from each cell, and either a bristle set completes a broom or
/// the union of slices is the degenerate `X`.
#[allow(clippy::too_many_arguments)]
fn broom_case_top(
    g: &Graph,
    w: &Weighting,
    v: usize,
    k: usize,
    ell: usize,
    m: usize,
    d: &Rational,
    oracle: &dyn Fn(&VertexSet) -> Result<OracleReply, EngineError>,
    working: &VertexSet,
    layers: &[VertexSet],
    chosen: &[Vec<usize>],
    first_nbr: &[Option<usize>],
    finish_pair: impl FnOnce(VertexSet, VertexSet, Vec<usize>) -> Result<BroomOutcome, EngineError>,
) -> Result<BroomOutcome, EngineError> {
    let top = &layers[ell];
    let mut j_prev = VertexSet::empty(g.n()); // J_{ℓ-1}
    for l in &layers[1..ell] {
        j_prev.union_with(l);
    }
    let mut j_all = j_prev.clone(); // J_ℓ
    j_all.union_with(top);

    // w(J_{ℓ-1}) ≤ 2(ℓ-1) w(L_ℓ), recomputed rather than trusted
    if w.sum(&j_prev) > ratio(2 * (ell as i64 - 1)) * w.sum(top) {
        return Err(EngineError::InternalInvariant(
            "interior layer weight bound failed".into(),
        ));
    }

    let mut r_last: Vec<usize> = chosen[ell - 1].clone();
    r_last.sort_unstable();
    let cells: Vec<VertexSet> = r_last
        .iter()
        .map(|&u| VertexSet::from_iter(g.n(), top.iter().filter(|&z| first_nbr[z] == Some(u))))
        .collect();

    let mut slices: Vec<VertexSet> = Vec::with_capacity(cells.len());
    for cell in &cells {
        if cell.is_empty() {
            slices.push(VertexSet::empty(g.n()));
            continue;
        }
        match oracle(cell)? {
            OracleReply::Witness(tw) => return Ok(BroomOutcome::InnerWitness(tw)),
            OracleReply::Stable(s) => {
                if d * w.sum(&s) < w.sum(cell) {
                    return Err(EngineError::InternalInvariant(
                        "inner oracle missed its factor".into(),
                    ));
                }
                slices.push(s);
            }
        }
    }

    // Q_i = S_{i+1} ∪ … ∪ S_n ∪ (working ∖ (J_ℓ ∪ {v})); bristles must avoid
    // everything the path interior can see.
    let mut outer = working.clone();
    outer.subtract(&j_all);
    outer.remove(v);
    for (i, cell) in cells.iter().enumerate() {
        let mut pool = outer.clone();
        for s_later in &slices[i + 1..] {
            pool.union_with(s_later);
        }
        for u in cell.iter() {
            if let Some(leaf_set) = stable_m_among_neighbours(g, u, &pool, k, m)? {
                let path = path_to_root(first_nbr, v, u, ell);
                let witness = BroomWitness {
                    path,
                    leaves: leaf_set.to_vec(),
                };
                if !witness.verify(g, working, ell, m) {
                    return Err(EngineError::InternalInvariant(
                        "assembled broom failed the induced check".into(),
                    ));
                }
                return Ok(BroomOutcome::Broom(witness));
            }
        }
    }

    // No broom: X = ∪ S_i in cell order is k^m-degenerate past Y.
    let mut x = VertexSet::empty(g.n());
    let mut ordering = Vec::new();
    for s in &slices {
        for z in s.iter() {
            ordering.push(z);
        }
        x.union_with(s);
    }
    let mut y = j_prev;
    y.union_with(&top.difference(&x));
    finish_pair(x, y, ordering)
}

/// Case: the layer weight dropped at `j ≥ 2`. Exhaust `L_j` by a maximal
/// `(X, Y')` augmentation, recursing on shorter brooms rooted at chosen
/// predecessors; a broom from the recursion extends to a full one through
/// the explored path.
#[allow(clippy::too_many_arguments)]
fn augment_case(
    g: &Graph,
    w: &Weighting,
    v: usize,
    k: usize,
    ell: usize,
    m: usize,
    d: &Rational,
    oracle: &dyn Fn(&VertexSet) -> Result<OracleReply, EngineError>,
    working: &VertexSet,
    layers: &[VertexSet],
    chosen: &[Vec<usize>],
    first_nbr: &[Option<usize>],
    j: usize,
    finish_pair: impl FnOnce(VertexSet, VertexSet, Vec<usize>) -> Result<BroomOutcome, EngineError>,
) -> Result<BroomOutcome, EngineError> {
    let l_j = &layers[j];
    // the drop forces R_j = L_j, so L_j's neighbours all lie in J_{j+1} ∪ {v}
    let r_j_mask = VertexSet::from_iter(g.n(), chosen[j].iter().copied());
    debug_assert_eq!(&r_j_mask, l_j, "drop index must have R_j = L_j");

    let budget = Rational::from_integer(Int::one() << (2 * (ell - j + 1))) * d;
    let mut x = VertexSet::empty(g.n());
    let mut y_prime = VertexSet::empty(g.n());
    let mut ordering: Vec<usize> = Vec::new();
    let mut guard = 0usize;
    loop {
        let mut rest = l_j.clone();
        rest.subtract(&x);
        rest.subtract(&y_prime);
        let Some(q) = rest.first() else { break };
        let p = first_nbr[q].expect("layer vertex has a predecessor");
        let mut island = rest.clone();
        island.insert(p);
        match broom_or_degenerate(g, &island, w, p, k, ell - j + 1, m, d, oracle)? {
            BroomOutcome::InnerWitness(tw) => return Ok(BroomOutcome::InnerWitness(tw)),
            BroomOutcome::Broom(sub) => {
                // splice the explored path v … p onto the shorter broom
                let prefix = path_to_root(first_nbr, v, p, j - 1);
                let mut path = prefix;
                path.extend_from_slice(&sub.path[1..]);
                let witness = BroomWitness {
                    path,
                    leaves: sub.leaves.clone(),
                };
                if !witness.verify(g, working, ell, m) {
                    return Err(EngineError::InternalInvariant(
                        "spliced broom failed the induced check".into(),
                    ));
                }
                return Ok(BroomOutcome::Broom(witness));
            }
            BroomOutcome::Pair(pair) => {
                if pair.x.is_empty() {
                    return Err(EngineError::InternalInvariant(
                        "augmentation produced an empty X despite positive weight".into(),
                    ));
                }
                x.union_with(&pair.x);
                y_prime.union_with(&pair.y);
                ordering.extend_from_slice(&pair.ordering);
                if &budget * w.sum(&x) < w.sum(&x.union(&y_prime)) {
                    return Err(EngineError::InternalInvariant(
                        "augmentation weight budget exceeded".into(),
                    ));
                }
            }
        }
        guard += 1;
        if guard > l_j.len() + 1 {
            return Err(EngineError::InternalInvariant(
                "augmentation loop failed to terminate".into(),
            ));
        }
    }
    // X ∪ Y' = L_j: close out with the interior and the next layer.
    let mut y = y_prime;
    for l in &layers[1..j] {
        y.union_with(l);
    }
    y.union_with(&layers[j + 1]);
    finish_pair(x, y, ordering)
}

/// Exact verification of all three pair conditions (called on every return).
#[allow(clippy::too_many_arguments)]
fn check_degenerate_pair(
    g: &Graph,
    universe: &VertexSet,
    w: &Weighting,
    v: usize,
    k: usize,
    ell: usize,
    m: usize,
    d: &Rational,
    pair: &DegeneratePair,
) -> Result<(), EngineError> {
    let fail =
        |msg: &str| Err(EngineError::InternalInvariant(format!("degenerate pair: {msg}")));
    if !pair.x.is_disjoint(&pair.y) || pair.x.contains(v) || pair.y.contains(v) {
        return fail("X, Y, {v} not disjoint");
    }
    let xy = pair.x.union(&pair.y);
    let wx = w.sum(&pair.x);
    let factor = Rational::from_integer(Int::one() << (2 * ell)) * d;
    if &factor * &wx < w.sum(&xy) {
        return fail("ratio inequality w(X) >= w(X∪Y)/(d·2^{2ℓ}) failed");
    }
    if w.sum(&xy) < w.sum(&g.neighbours_in(v, universe)) {
        return fail("coverage inequality w(X∪Y) >= w(N(v)) failed");
    }
    let mut ambient = universe.clone();
    ambient.subtract(&pair.y);
    ambient.remove(v);
    let km = k.pow(m as u32);
    if !check_degenerate_in(g, &ambient, &pair.x, &pair.ordering, km) {
        return fail("stored ordering is not k^m-degenerate in G ∖ (Y ∪ {v})");
    }
    Ok(())
}

/// Per-level constants of the clique-number recursion: `d_1 = 1` and
/// `d_k = d_{k-1}^2 · 2^{2ℓ+3} · |T| · (k^m + 1)`. The guarantee at level
/// `k` is `w(S) ≥ w(G) / d_k`.
pub fn level_constants(spec: &MultibroomSpec, k: usize) -> Vec<Rational> {
    let ell = spec.max_length().max(1);
    let m = spec.max_bristles();
    let t = spec.vertex_count();
    let mut d = vec![Rational::one(); k + 1]; // d[0] unused, d[1] = 1
    for level in 2..=k {
        let km1 = Int::from(level).pow(m as u32) + Int::one();
        let factor = Rational::from_integer((Int::one() << (2 * ell + 3)) * Int::from(t) * km1);
        d[level] = &d[level - 1] * &d[level - 1] * factor;
    }
    d
}

/// The exact guarantee constant `c = 1/d_k` of the level-`k` engine.
pub fn multibroom_constant(spec: &MultibroomSpec, k: usize) -> Rational {
    let d = level_constants(spec, k);
    Rational::one() / d[k].clone()
}

/// Entry point: find a stable set of weight `≥ c·w(G)` in a
/// `{T, K_{k+1}}`-free graph, or an induced copy of the multibroom `T`.
pub fn weighted_stable_multibroom(
    g: &Graph,
    w: &Weighting,
    spec: &MultibroomSpec,
    k: usize,
) -> Result<SearchOutcome, EngineError> {
    weighted_stable_multibroom_in(g, &g.vertex_set(), w, spec, k)
}

/// As [`weighted_stable_multibroom`], on an induced subgraph.
pub fn weighted_stable_multibroom_in(
    g: &Graph,
    universe: &VertexSet,
    w: &Weighting,
    spec: &MultibroomSpec,
    k: usize,
) -> Result<SearchOutcome, EngineError> {
    if k == 0 {
        return Err(EngineError::ParamRefusal("k must be >= 1".into()));
    }
    let consts = level_constants(spec, k);
    let out = multibroom_level(g, universe, w, spec, k, &consts)?;
    match out {
        LevelOutcome::Witness(tw) => Ok(SearchOutcome::Witness(tw)),
        LevelOutcome::Stable(set) => {
            let c = Rational::one() / consts[k].clone();
            let total = w.sum(universe);
            let achieved = w.sum(&set);
            if achieved < &c * &total {
                return Err(EngineError::InternalInvariant(
                    "final certificate misses c·w(G)".into(),
                ));
            }
            // certificates on nonempty graphs always carry a vertex
            let set = if set.is_empty() && !universe.is_empty() {
                VertexSet::singleton(g.n(), universe.first().unwrap())
            } else {
                set
            };
            let achieved = w.sum(&set);
            let mut cert = StableSetCert::new(
                set,
                if universe.is_empty() {
                    ratio(0)
                } else {
                    ratio(1)
                },
                CertMode::Multibroom,
            );
            cert.weighted = Some(WeightedClaim {
                constant: c,
                total_weight: total,
                achieved,
            });
            Ok(SearchOutcome::Stable(cert))
        }
    }
}

enum LevelOutcome {
    Stable(VertexSet),
    Witness(TreeWitness),
}

/// One level of the clique-number recursion on `G[universe]`.
fn multibroom_level(
    g: &Graph,
    universe: &VertexSet,
    w: &Weighting,
    spec: &MultibroomSpec,
    k: usize,
    consts: &[Rational],
) -> Result<LevelOutcome, EngineError> {
    // degenerate pattern: a single vertex is everywhere
    if spec.arms().is_empty() {
        if let Some(v) = universe.first() {
            return Ok(LevelOutcome::Witness(TreeWitness {
                tree: spec.to_tree(),
                embedding: vec![v],
            }));
        }
        return Ok(LevelOutcome::Stable(VertexSet::empty(g.n())));
    }
    if k == 1 {
        for u in universe.iter() {
            if let Some(x) = g.neighbours_in(u, universe).first() {
                return Err(EngineError::HypothesisViolation { clique: vec![u, x] });
            }
        }
        return Ok(LevelOutcome::Stable(universe.clone()));
    }

    let ell = spec.max_length();
    let m = spec.max_bristles();
    let t_size = spec.vertex_count();
    let d_prev = &consts[k - 1];
    let km = k.pow(m as u32);
    // the global pair invariant factor d^2 · 2^{2ℓ+3} · |T|
    let global_factor = d_prev
        * d_prev
        * Rational::from_integer((Int::one() << (2 * ell + 3)) * Int::from(t_size));

    let pos = w.positive_support(universe);
    if pos.is_empty() {
        return Ok(LevelOutcome::Stable(VertexSet::empty(g.n())));
    }

    let oracle = |set: &VertexSet| -> Result<OracleReply, EngineError> {
        match multibroom_level(g, set, w, spec, k - 1, consts)? {
            LevelOutcome::Witness(tw) => Ok(OracleReply::Witness(tw)),
            LevelOutcome::Stable(s) => {
                if d_prev * w.sum(&s) < w.sum(set) {
                    return Err(EngineError::InternalInvariant(
                        "inner level missed its guarantee".into(),
                    ));
                }
                Ok(OracleReply::Stable(s))
            }
        }
    };

    let mut x_all = VertexSet::empty(g.n());
    let mut y_all = VertexSet::empty(g.n());
    let mut ordering: Vec<usize> = Vec::new();
    let mut guard = 0usize;

    loop {
        let mut live = pos.clone();
        live.subtract(&x_all);
        live.subtract(&y_all);
        if live.is_empty() {
            break;
        }
        guard += 1;
        if guard > pos.len() + 1 {
            return Err(EngineError::InternalInvariant(
                "growth loop failed to terminate".into(),
            ));
        }

        let (v, delta) = w.max_weighted_degree(g, &live).expect("live nonempty");
        if delta.is_zero() {
            // the live region is edgeless in the positive world
            for z in live.iter() {
                ordering.push(z);
            }
            x_all.union_with(&live);
            continue;
        }

        let nv = g.neighbours_in(v, &live);
        let s = match oracle(&nv)? {
            OracleReply::Witness(tw) => return Ok(LevelOutcome::Witness(tw)),
            OracleReply::Stable(s) => s,
        };
        let ws = w.sum(&s);

        // Z: vertices pulling at least w(S)/(2|T|) of S's weight
        let two_t = ratio(2 * t_size as i64);
        let mut z_set = VertexSet::empty(g.n());
        for z in live.iter() {
            if z == v || s.contains(z) {
                continue;
            }
            if &two_t * w.sum(&g.neighbours_in(z, &s)) >= ws {
                z_set.insert(z);
            }
        }
        if w.sum(&z_set) > &two_t * &delta {
            return Err(EngineError::InternalInvariant("w(Z) exceeded 2|T|Δ".into()));
        }
        let z_prime = nv.difference(&s);

        match grow_round(g, w, spec, k, d_prev, &oracle, &live, v, &s, &z_set, &z_prime)? {
            RoundResult::FullWitness(tw) => return Ok(LevelOutcome::Witness(tw)),
            RoundResult::Extend { x_new, y_new, ord } => {
                debug_assert!(y_new.contains(v));
                x_all.union_with(&x_new);
                y_all.union_with(&y_new);
                ordering.extend_from_slice(&ord);
                if &global_factor * w.sum(&x_all) < w.sum(&x_all.union(&y_all)) {
                    return Err(EngineError::InternalInvariant(
                        "global pair weight invariant failed".into(),
                    ));
                }
            }
        }
    }

    // X ∪ Y covers the positive world: colour X along the stored ordering
    // with ≤ k^m + 1 stable classes and keep the heaviest.
    let ambient = pos.difference(&y_all);
    if !check_degenerate_in(g, &ambient, &x_all, &ordering, km) {
        return Err(EngineError::InternalInvariant(
            "global ordering lost degeneracy".into(),
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
    if classes.len() > km + 1 {
        return Err(EngineError::InternalInvariant(
            "degeneracy colouring used too many classes".into(),
        ));
    }
    let best = classes
        .into_iter()
        .max_by(|a, b| w.sum(a).cmp(&w.sum(b)))
        .unwrap_or_else(|| VertexSet::empty(g.n()));
    if !g.is_stable(&best) {
        return Err(EngineError::InternalInvariant(
            "extracted class is not stable".into(),
        ));
    }
    Ok(LevelOutcome::Stable(best))
}

enum RoundResult {
    FullWitness(TreeWitness),
    Extend {
        x_new: VertexSet,
        y_new: VertexSet,
        ord: Vec<usize>,
    },
}

/// One growth round at vertex `v`: try to attach every arm of the multibroom
/// (non-pendant arms by the recursive broom search, bare pendant edges by a
/// direct pick from the stable slice). A full attachment is a witness; the
/// first failure yields the round's extension of the global pair.
#[allow(clippy::too_many_arguments)]
fn grow_round(
    g: &Graph,
    w: &Weighting,
    spec: &MultibroomSpec,
    k: usize,
    d_prev: &Rational,
    oracle: &dyn Fn(&VertexSet) -> Result<OracleReply, EngineError>,
    live: &VertexSet,
    v: usize,
    s: &VertexSet,
    z_set: &VertexSet,
    z_prime: &VertexSet,
) -> Result<RoundResult, EngineError> {
    let n = g.n();
    let arms = spec.arms();
    // embeddings per spec arm position; pendant (1,0) arms are attached last
    let mut embedded: Vec<Option<BroomWitness>> = vec![None; arms.len()];
    let mut h_rest = VertexSet::empty(n); // H ∖ {v}

    let blocked_base = {
        let mut b = z_set.clone();
        b.union_with(z_prime);
        b.insert(v);
        b
    };
    let closure_w = |h_rest: &VertexSet| {
        let mut within = live.difference(&blocked_base);
        let cl = closed_neighbourhood(g, h_rest, &within);
        within.intersect_with(&cl);
        within
    };

    for (ai, &(al, am)) in arms.iter().enumerate() {
        if al == 1 && am == 0 {
            continue; // pendants last
        }
        let w_set = closure_w(&h_rest);
        let mut island = live.clone();
        island.subtract(z_set);
        island.subtract(z_prime);
        island.subtract(&w_set);
        match broom_or_degenerate(g, &island, w, v, k, al, am, d_prev, oracle)? {
            BroomOutcome::InnerWitness(tw) => return Ok(RoundResult::FullWitness(tw)),
            BroomOutcome::Broom(b) => {
                for &u in b.path[1..].iter().chain(&b.leaves) {
                    h_rest.insert(u);
                }
                embedded[ai] = Some(b);
            }
            BroomOutcome::Pair(pair) => {
                // extend the global pair: Y picks up the round's scaffolding
                let mut y_new = pair.y.clone();
                y_new.union_with(z_set);
                y_new.union_with(z_prime);
                y_new.union_with(&w_set);
                y_new.insert(v);
                y_new.subtract(&pair.x);
                return Ok(RoundResult::Extend {
                    x_new: pair.x,
                    y_new,
                    ord: pair.ordering,
                });
            }
        }
    }

    // big arms all attached; place the bare pendant edges from S ∖ W
    let pendants: Vec<usize> = arms
        .iter()
        .enumerate()
        .filter(|&(_, &(al, am))| al == 1 && am == 0)
        .map(|(i, _)| i)
        .collect();
    let w_final = closure_w(&h_rest);
    let mut avail = s.difference(&w_final);
    avail.intersect_with(live);
    avail.remove(v);
    if avail.len() >= pendants.len() {
        for &ai in &pendants {
            let pick = avail.first().expect("availability checked");
            avail.remove(pick);
            embedded[ai] = Some(BroomWitness {
                path: vec![v, pick],
                leaves: vec![],
            });
        }
        let tw = assemble_multibroom(spec, v, &embedded)?;
        if !tw.verify(g) {
            return Err(EngineError::InternalInvariant(
                "assembled multibroom failed the induced check".into(),
            ));
        }
        return Ok(RoundResult::FullWitness(tw));
    }

    // Not enough fresh pendant slots: the stable closure of S around the
    // partial multibroom is heavy, few-membered, and safe to take whole.
    let mut x_plus = s.intersection(&h_rest);
    x_plus.union_with(&s.difference(&w_final));
    x_plus.intersect_with(live);
    x_plus.remove(v);
    if x_plus.is_empty() {
        return Err(EngineError::InternalInvariant(
            "pendant fallback produced an empty X".into(),
        ));
    }
    let mut y_new = g.set_neighbourhood(&x_plus, live);
    y_new.union_with(z_set);
    y_new.union_with(z_prime);
    y_new.union_with(&w_final);
    y_new.union_with(&h_rest);
    y_new.insert(v);
    y_new.subtract(&x_plus);
    let ord: Vec<usize> = x_plus.iter().collect();
    Ok(RoundResult::Extend {
        x_new: x_plus,
        y_new,
        ord,
    })
}

/// Stitch per-arm embeddings into a witness laid out like
/// [`MultibroomSpec::to_tree`] (root, then per arm the path then bristles).
fn assemble_multibroom(
    spec: &MultibroomSpec,
    root: usize,
    embedded: &[Option<BroomWitness>],
) -> Result<TreeWitness, EngineError> {
    let mut embedding = vec![root];
    for (ai, arm) in embedded.iter().enumerate() {
        let Some(b) = arm else {
            return Err(EngineError::InternalInvariant(format!(
                "arm {ai} missing at assembly"
            )));
        };
        embedding.extend_from_slice(&b.path[1..]);
        embedding.extend_from_slice(&b.leaves);
    }
    Ok(TreeWitness {
        tree: spec.to_tree(),
        embedding,
    })
}

/// Recursion on clique number packaged with its exact constant chain:
/// `d_1 = 1` (a `K_2`-free graph is edgeless and is its own stable set), and
/// level `k` delegates to the multibroom engine with the level-`(k-1)`
/// constant.
pub struct RecursiveStable {
    pub outcome: SearchOutcome,
    /// `d_1 … d_k`; the certificate guarantee at the top is `1/d_k`.
    pub constants: Vec<Rational>,
}

pub fn stable_weighted_recursive(
    g: &Graph,
    w: &Weighting,
    spec: &MultibroomSpec,
    k: usize,
) -> Result<RecursiveStable, EngineError> {
    let outcome = weighted_stable_multibroom(g, w, spec, k)?;
    let constants = level_constants(spec, k)[1..].to_vec();
    Ok(RecursiveStable {
        outcome,
        constants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio_fr;
    use crate::tree::MultibroomSpec;

    fn cycle(n: usize) -> Graph {
        Graph::build(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>()).unwrap()
    }

    fn matching(n: usize) -> Graph {
        Graph::build(
            n,
            &(0..n / 2).map(|i| (2 * i, 2 * i + 1)).collect::<Vec<_>>(),
        )
        .unwrap()
    }

    fn uniform(n: usize) -> Weighting {
        Weighting::uniform(n)
    }

    #[test]
    fn constant_chain() {
        // k = 2, T = P3 as [(1,1)]: c = 1/(1 · 2^5 · 3 · 3) = 1/288
        let spec = MultibroomSpec::new(vec![(1, 1)]).unwrap();
        assert_eq!(multibroom_constant(&spec, 2), ratio_fr(1, 288));
        // k = 1 always has c = 1
        assert_eq!(multibroom_constant(&spec, 1), ratio(1));
    }

    #[test]
    fn single_vertex_pair() {
        let g = Graph::build(1, &[]).unwrap();
        let w = uniform(1);
        let all = g.vertex_set();
        let oracle = |_: &VertexSet| -> Result<OracleReply, EngineError> {
            Ok(OracleReply::Stable(VertexSet::empty(1)))
        };
        match broom_or_degenerate(&g, &all, &w, 0, 2, 1, 2, &ratio(1), &oracle).unwrap() {
            BroomOutcome::Pair(p) => {
                assert!(p.x.is_empty());
                assert!(p.y.is_empty());
            }
            _ => panic!("isolated root must yield the empty pair"),
        }
    }

    #[test]
    fn star_centre_has_no_deep_broom() {
        // K_{1,5} from the centre with (ℓ,m) = (1,2): leaves have degree 1,
        // so no broom exists and a degenerate pair must come back.
        let g = Graph::build(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap();
        let w = uniform(6);
        let all = g.vertex_set();
        // k = 2: neighbourhoods are edgeless, the oracle takes everything
        let oracle = |set: &VertexSet| -> Result<OracleReply, EngineError> {
            Ok(OracleReply::Stable(set.clone()))
        };
        match broom_or_degenerate(&g, &all, &w, 0, 2, 1, 2, &ratio(1), &oracle).unwrap() {
            BroomOutcome::Pair(_) => {}
            _ => panic!("no (1,2)-broom can root at the centre of K_{{1,5}}"),
        }
    }

    #[test]
    fn spider_yields_branch_that_validates() {
        // centre with three legs of length 2; whichever branch returns must
        // already have passed its exact checks
        let g = Graph::build(7, &[(0, 1), (1, 2), (0, 3), (3, 4), (0, 5), (5, 6)]).unwrap();
        let w = uniform(7);
        let all = g.vertex_set();
        let oracle = |set: &VertexSet| -> Result<OracleReply, EngineError> {
            Ok(OracleReply::Stable(set.clone()))
        };
        match broom_or_degenerate(&g, &all, &w, 0, 2, 1, 2, &ratio(1), &oracle).unwrap() {
            BroomOutcome::Pair(p) => {
                assert!(p.x.is_disjoint(&p.y));
            }
            BroomOutcome::Broom(b) => {
                assert!(b.verify(&g, &all, 1, 2));
            }
            BroomOutcome::InnerWitness(_) => panic!("oracle never returns witnesses here"),
        }
    }

    #[test]
    fn matching_certificate() {
        // P3-free ∩ triangle-free graphs are matchings; uniform weights on 10
        // vertices must give w(S) ≥ w(G)/288 (and in fact exactly 5).
        let g = matching(10);
        let w = uniform(10);
        let spec = MultibroomSpec::new(vec![(1, 1)]).unwrap();
        match weighted_stable_multibroom(&g, &w, &spec, 2).unwrap() {
            SearchOutcome::Stable(cert) => {
                assert!(g.is_stable(&cert.set));
                let claim = cert.weighted.as_ref().unwrap();
                assert_eq!(claim.constant, ratio_fr(1, 288));
                assert_eq!(w.sum(&cert.set), ratio(5));
            }
            SearchOutcome::Witness(_) => panic!("matchings are P3-free"),
        }
    }

    #[test]
    fn c9_star_free_certificate() {
        // C9 has maximum degree 2, so it is K_{1,3}-free; exact α = 4.
        let g = cycle(9);
        let w = uniform(9);
        let spec = MultibroomSpec::new(vec![(1, 2)]).unwrap();
        match weighted_stable_multibroom(&g, &w, &spec, 2).unwrap() {
            SearchOutcome::Stable(cert) => {
                assert!(g.is_stable(&cert.set));
                let claim = cert.weighted.as_ref().unwrap();
                assert!(claim.achieved >= &claim.constant * &claim.total_weight);
            }
            SearchOutcome::Witness(_) => panic!("C9 contains no claw"),
        }
    }

    #[test]
    fn petersen_claw_witness_or_cert() {
        // The Petersen graph contains induced claws; either branch is legal
        // and must validate.
        let pairs: Vec<(usize, usize)> = (0..5)
            .flat_map(|a| ((a + 1)..5).map(move |b| (a, b)))
            .collect();
        let mut edges = Vec::new();
        for i in 0..pairs.len() {
            for j in (i + 1)..pairs.len() {
                let (a, b) = pairs[i];
                let (c, d) = pairs[j];
                if a != c && a != d && b != c && b != d {
                    edges.push((i, j));
                }
            }
        }
        let g = Graph::build(10, &edges).unwrap();
        let w = uniform(10);
        let spec = MultibroomSpec::new(vec![(1, 2)]).unwrap();
        match weighted_stable_multibroom(&g, &w, &spec, 2).unwrap() {
            SearchOutcome::Stable(cert) => {
                let claim = cert.weighted.as_ref().unwrap();
                assert!(claim.achieved >= &claim.constant * &claim.total_weight);
            }
            SearchOutcome::Witness(tw) => assert!(tw.verify(&g)),
        }
    }

    #[test]
    fn edgeless_takes_everything() {
        let g = Graph::build(6, &[]).unwrap();
        let w = uniform(6);
        let spec = MultibroomSpec::new(vec![(2, 1)]).unwrap();
        match weighted_stable_multibroom(&g, &w, &spec, 2).unwrap() {
            SearchOutcome::Stable(cert) => assert_eq!(cert.set.len(), 6),
            _ => panic!(),
        }
    }

    #[test]
    fn recursion_base_k1() {
        let g = Graph::build(4, &[]).unwrap();
        let w = Weighting::new(vec![ratio(2), ratio(3), ratio(5), ratio(7)]).unwrap();
        let spec = MultibroomSpec::new(vec![(1, 1)]).unwrap();
        let r = stable_weighted_recursive(&g, &w, &spec, 1).unwrap();
        match r.outcome {
            SearchOutcome::Stable(cert) => assert_eq!(cert.set.len(), 4),
            _ => panic!(),
        }
        assert_eq!(r.constants, vec![ratio(1)]);

        // k = 1 with an edge present is a hypothesis violation
        let g = Graph::build(2, &[(0, 1)]).unwrap();
        let w = uniform(2);
        assert!(matches!(
            stable_weighted_recursive(&g, &w, &spec, 1),
            Err(EngineError::HypothesisViolation { .. })
        ));
    }

    #[test]
    fn star_spec_finds_star_witness() {
        // K_{1,4} host, spec [(1,0),(1,0),(1,0)] = K_{1,3}: the witness path
        // goes through the pendant-pick machinery.
        let g = Graph::build(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let w = uniform(5);
        let spec = MultibroomSpec::new(vec![(1, 0), (1, 0), (1, 0)]).unwrap();
        match weighted_stable_multibroom(&g, &w, &spec, 2).unwrap() {
            SearchOutcome::Witness(tw) => assert!(tw.verify(&g)),
            SearchOutcome::Stable(cert) => {
                let claim = cert.weighted.as_ref().unwrap();
                assert!(claim.achieved >= &claim.constant * &claim.total_weight);
            }
        }
    }

    #[test]
    fn pendant_fallback_on_matching() {
        // A perfect matching has no induced P3 = [(1,0),(1,0)]; rounds must
        // take the pendant fallback and the certificate must still hold.
        let g = matching(8);
        let w = uniform(8);
        let spec = MultibroomSpec::new(vec![(1, 0), (1, 0)]).unwrap();
        match weighted_stable_multibroom(&g, &w, &spec, 2).unwrap() {
            SearchOutcome::Stable(cert) => {
                assert!(g.is_stable(&cert.set));
                let claim = cert.weighted.as_ref().unwrap();
                assert!(claim.achieved >= &claim.constant * &claim.total_weight);
            }
            SearchOutcome::Witness(_) => panic!("matchings are P3-free"),
        }
    }
}
