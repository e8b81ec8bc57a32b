//! The iterated sparsification engine for general tree patterns.
//!
//! Pipeline: [`sparse_descend`] (neighbourhood descent under a clique bound),
//! [`local_partition`] (degree reduction by move-stable partitioning),
//! [`key_step`] (grow an embedding of `T` along a dfs-enumeration, harvesting
//! a sparse pair `(A, B)` where it gets stuck), [`sparsify_once`] (accumulate
//! pairs until the graph is exhausted, then extract a large low-degree
//! induced subgraph), and [`stable_set_sparse`] (iterate until the remainder
//! is edgeless).
//!
//! Every threshold comparison (`y_p · d` and friends) is exact rational; the
//! closed-form guarantee is evaluated with directed rounding in
//! [`crate::numeric`] so the claimed bound is never over-stated.

use crate::bitset::VertexSet;
use crate::error::EngineError;
use crate::graph::{greedy_maxdeg_stable, ramsey_stable, turan_stable, RamseyOutcome};
use crate::numeric::{exp2_interval, log2_interval, pow_interval, Interval};
use crate::outcome::{CertMode, SearchOutcome, StableSetCert, TreeWitness};
use crate::tree::TreePattern;
use crate::witness::ceil_rational;
use crate::{ratio, ratio_fr, Int, Rational};
use num_traits::{One, Signed};

/// Parameters of one sparsification run.
///
/// `q = (r-1)(k-1)` and `y` has entries `y_0 … y_q` in `(0,1)` with
/// `y_p ≤ y_{p-1} / 3t`. In default mode `y_i = 2^{-x^i}` (rounded downward
/// onto the dyadic grid); in force mode the caller supplies any vector
/// meeting the ratio constraint, which bypasses the closed-form bound claim
/// but exercises the full embedding machinery.
#[derive(Clone, Debug)]
pub struct SparsifyParams {
    pub k: usize,
    pub r: usize,
    pub t: usize,
    pub q: usize,
    pub y: Vec<Rational>,
    /// Validate every intermediate reference state (slow, test mode).
    pub audit: bool,
}

impl SparsifyParams {
    /// Validates and assembles a parameter set for `tree` and `k` with a
    /// caller-supplied `y` vector (force mode).
    pub fn forced(tree: &TreePattern, k: usize, y: Vec<Rational>) -> Result<Self, EngineError> {
        let t = tree.len();
        if k < 2 || t < 2 {
            return Err(EngineError::ParamRefusal(format!(
                "need k >= 2 and |T| >= 2, got k = {k}, t = {t}"
            )));
        }
        let r = tree.radius().max(2);
        let q = (r - 1) * (k - 1);
        if y.len() != q + 1 {
            return Err(EngineError::ParamRefusal(format!(
                "y must have q+1 = {} entries, got {}",
                q + 1,
                y.len()
            )));
        }
        let one = Rational::one();
        if y.iter().any(|v| !v.is_positive() || v >= &one) {
            return Err(EngineError::ParamRefusal(
                "y entries must lie in (0,1)".into(),
            ));
        }
        let three_t = ratio(3 * t as i64);
        for p in 1..=q {
            if &y[p] * &three_t > y[p - 1] {
                return Err(EngineError::ParamRefusal(format!(
                    "ratio constraint violated: y_{p} > y_{}/(3t)",
                    p - 1
                )));
            }
        }
        Ok(SparsifyParams {
            k,
            r,
            t,
            q,
            y,
            audit: false,
        })
    }

    /// Default-mode parameters: `y_i = 2^{-x^i}` with `x = (log₂ d)^{1/q}`,
    /// rounded downward. Also returns the bracket for `x` (used for the
    /// round-count bound).
    pub fn default_for(
        tree: &TreePattern,
        k: usize,
        d: usize,
    ) -> Result<(Self, Interval), EngineError> {
        let t = tree.len();
        if k < 2 || t < 2 || d < 2 {
            return Err(EngineError::ParamRefusal(format!(
                "need k >= 2, |T| >= 2, d >= 2; got k = {k}, t = {t}, d = {d}"
            )));
        }
        let r = tree.radius().max(2);
        let q = (r - 1) * (k - 1);
        let x = pow_interval(&log2_interval(&ratio(d as i64)), &ratio_fr(1, q as i64));
        let mut y = Vec::with_capacity(q + 1);
        let mut x_pow = Interval::exact(Rational::one());
        for _ in 0..=q {
            let neg = Interval {
                lo: -x_pow.hi.clone(),
                hi: -x_pow.lo.clone(),
            };
            y.push(exp2_interval(&neg).lo);
            x_pow = x_pow.mul_nonneg(&x);
        }
        let params = SparsifyParams::forced(tree, k, y)?;
        Ok((params, x))
    }

    pub fn with_audit(mut self, audit: bool) -> Self {
        self.audit = audit;
        self
    }

    /// `y_p · d` as an exact rational.
    fn yd(&self, p: usize, d: usize) -> Rational {
        &self.y[p] * ratio(d as i64)
    }

    /// `max(y_p · d, k^t)`.
    fn spill_threshold(&self, p: usize, d: usize) -> Rational {
        let kt = Rational::from_integer(Int::from(self.k).pow(self.t as u32));
        self.yd(p, d).max(kt)
    }
}

/// Neighbourhood descent (clique bound `k`, thresholds `n_0 … n_k` with
/// `n_0 ≤ |G|`, all positive): returns `p ∈ {1..k}` and `H ⊆ universe` with
/// `|H| ≥ n_{p-1}` and `Δ(G[H]) < n_p`.
///
/// If the graph has maximum degree below `n_1` it is its own witness;
/// otherwise descend into the neighbourhood of a maximum-degree vertex with
/// the thresholds shifted by one. Exhausting all `k` levels certifies a
/// clique of size `k + 1`, violating the caller-asserted bound.
pub fn sparse_descend(
    g: &crate::graph::Graph,
    universe: &VertexSet,
    k: usize,
    thresholds: &[Rational],
) -> Result<(usize, VertexSet), EngineError> {
    if k == 0 || thresholds.len() != k + 1 {
        return Err(EngineError::ParamRefusal(format!(
            "need k >= 1 and k+1 thresholds, got k = {k} and {}",
            thresholds.len()
        )));
    }
    if thresholds.iter().any(|n| !n.is_positive()) {
        return Err(EngineError::ParamRefusal(
            "thresholds must be positive".into(),
        ));
    }
    if ratio(universe.len() as i64) < thresholds[0] {
        return Err(EngineError::ParamRefusal("n_0 exceeds |G|".into()));
    }
    let mut cur = universe.clone();
    let mut chain: Vec<usize> = Vec::new();
    for level in 0..k {
        let (v, maxdeg) = g.max_degree_in(&cur).expect("cur nonempty by invariant");
        if ratio(maxdeg as i64) < thresholds[level + 1] {
            return Ok((level + 1, cur));
        }
        chain.push(v);
        cur = g.neighbours_in(v, &cur);
    }
    // k descents happened: the chain plus any remaining vertex is a K_{k+1}.
    let extra = cur.first().expect("descent target nonempty");
    chain.push(extra);
    Err(EngineError::HypothesisViolation { clique: chain })
}

/// Move-stable partition of `universe` into `parts` classes, locally
/// minimising the number of internal edges: start from a round-robin split
/// and repeatedly move a vertex to a class where it has strictly fewer
/// neighbours.
pub fn local_partition_full(
    g: &crate::graph::Graph,
    universe: &VertexSet,
    parts: usize,
) -> Vec<VertexSet> {
    assert!(parts >= 1);
    let members: Vec<usize> = universe.iter().collect();
    let mut classes = vec![VertexSet::empty(g.n()); parts];
    let mut class_of = vec![usize::MAX; g.n()];
    for (i, &v) in members.iter().enumerate() {
        classes[i % parts].insert(v);
        class_of[v] = i % parts;
    }
    loop {
        let mut moved = false;
        for &v in &members {
            let cur = class_of[v];
            let cur_count = g.degree_in(v, &classes[cur]);
            let (best, best_count) = (0..parts)
                .map(|c| {
                    let cnt = if c == cur {
                        cur_count
                    } else {
                        g.degree_in(v, &classes[c])
                    };
                    (c, cnt)
                })
                .min_by_key(|&(c, cnt)| (cnt, c))
                .unwrap();
            if best_count < cur_count {
                classes[cur].remove(v);
                classes[best].insert(v);
                class_of[v] = best;
                moved = true;
            }
        }
        if !moved {
            return classes;
        }
    }
}

/// True iff no single-vertex move strictly reduces internal edges.
pub fn is_move_stable(g: &crate::graph::Graph, classes: &[VertexSet]) -> bool {
    for (ci, class) in classes.iter().enumerate() {
        for v in class.iter() {
            let cur = g.degree_in(v, class);
            for (cj, other) in classes.iter().enumerate() {
                if cj != ci && g.degree_in(v, other) < cur {
                    return false;
                }
            }
        }
    }
    true
}

/// Degree reduction: given `Δ(G[universe]) < d_bound` and `parts ≥ 1`,
/// returns `H ⊆ universe` with `|H| ≥ |universe|/parts` and
/// `Δ(G[H]) < d_bound/parts`.
pub fn local_partition(
    g: &crate::graph::Graph,
    universe: &VertexSet,
    d_bound: &Rational,
    parts: usize,
) -> Result<VertexSet, EngineError> {
    if parts == 0 {
        return Err(EngineError::ParamRefusal("parts must be >= 1".into()));
    }
    if let Some((_, maxdeg)) = g.max_degree_in(universe) {
        if ratio(maxdeg as i64) >= *d_bound {
            return Err(EngineError::ParamRefusal(format!(
                "max degree {maxdeg} not below bound {d_bound}"
            )));
        }
    }
    let classes = local_partition_full(g, universe, parts);
    let h = classes
        .into_iter()
        .max_by_key(VertexSet::len)
        .expect("parts >= 1");
    debug_assert!(h.len() * parts >= universe.len());
    // move stability gives deg_H(v) · parts ≤ deg_universe(v) < d_bound
    for v in h.iter() {
        if ratio((g.degree_in(v, &h) * parts) as i64) >= *d_bound {
            return Err(EngineError::InternalInvariant(
                "local_partition degree postcondition failed".into(),
            ));
        }
    }
    Ok(h)
}

/// A partial embedding of `T` with its reference sets, as maintained by
/// [`key_step`]. `a_sets[i]` is `A_{i+1}` in 1-based terms; `p_idx[i]` is
/// `p_{i+1}`.
#[derive(Clone, Debug)]
pub struct ReferenceState {
    /// Number of embedded pattern vertices (`s`).
    pub s: usize,
    /// Pattern vertex → host vertex for the embedded prefix.
    pub embedding: Vec<Option<usize>>,
    /// Active path in the pattern, root first (`v_1 … v_ℓ`).
    pub path_tree: Vec<usize>,
    /// Images of the active path (`w_1 … w_ℓ`).
    pub path_host: Vec<usize>,
    /// Reference sets `A_1 … A_{min(ℓ, r)}`.
    pub a_sets: Vec<VertexSet>,
    /// Indices `p_1 … p_{min(ℓ, r-1)}`.
    pub p_idx: Vec<usize>,
}

impl ReferenceState {
    /// Host vertices currently used by the embedding.
    pub fn image(&self, n: usize) -> VertexSet {
        VertexSet::from_iter(n, self.embedding.iter().flatten().copied())
    }
}

/// Exact check of the five good-copy conditions for a reference state.
/// `d` is the maximum degree of the working graph.
pub fn validate_reference_state(
    g: &crate::graph::Graph,
    universe: &VertexSet,
    tree: &TreePattern,
    params: &SparsifyParams,
    d: usize,
    st: &ReferenceState,
) -> Result<(), String> {
    let (t, r) = (params.t, params.r);
    let s = st.s;
    let ell = st.path_tree.len();
    let image = st.image(g.n());
    if image.len() != s {
        return Err("embedding not injective or wrong size".into());
    }
    // the embedded prefix must induce a copy of T_s
    let embedded: Vec<usize> = (0..tree.len())
        .filter(|&v| st.embedding[v].is_some())
        .collect();
    for (ai, &a) in embedded.iter().enumerate() {
        for &b in embedded.iter().skip(ai + 1) {
            let te = tree.adjacent(a, b);
            let ge = g.has_edge(st.embedding[a].unwrap(), st.embedding[b].unwrap());
            if te != ge {
                return Err(format!("embedding not induced at pattern pair ({a},{b})"));
            }
        }
    }
    if st.a_sets.len() != ell.min(r) {
        return Err(format!(
            "expected {} reference sets, found {}",
            ell.min(r),
            st.a_sets.len()
        ));
    }
    if st.p_idx.len() != ell.min(r - 1) {
        return Err(format!(
            "expected {} reference indices, found {}",
            ell.min(r - 1),
            st.p_idx.len()
        ));
    }
    // pairwise disjoint, inside the universe, outside the image
    for (i, a) in st.a_sets.iter().enumerate() {
        if !a.is_subset_of(universe) {
            return Err(format!("A_{} leaves the universe", i + 1));
        }
        if !a.is_disjoint(&image) {
            return Err(format!("A_{} meets the embedded image", i + 1));
        }
        for b in st.a_sets.iter().skip(i + 1) {
            if !a.is_disjoint(b) {
                return Err(format!("A_{} not disjoint from a later set", i + 1));
            }
        }
    }
    // adjacency: every vertex of A_i sees w_i and nothing else of the image
    for (i, a) in st.a_sets.iter().enumerate() {
        let w_i = st.path_host[i];
        for v in a.iter() {
            if !g.has_edge(v, w_i) {
                return Err(format!("vertex {v} of A_{} misses w_{}", i + 1, i + 1));
            }
            if g.neighbours(v).intersection_len(&image) != 1 {
                return Err(format!(
                    "vertex {v} of A_{} has extra neighbours in the image",
                    i + 1
                ));
            }
        }
    }
    // size / degree / index conditions for i ≤ min(ℓ, r-1)
    let d_rat = ratio(d as i64);
    for i in 0..ell.min(r - 1).min(st.a_sets.len()) {
        let p_i = st.p_idx[i];
        if p_i == 0 || p_i > (params.k - 1) * (i + 1) || p_i > params.q {
            return Err(format!("p_{} = {p_i} out of range", i + 1));
        }
        // |A_i| ≥ (1 - s/2t) y_{p_i - 1} d
        let need = (ratio(1) - ratio_fr(s as i64, 2 * t as i64)) * &params.y[p_i - 1] * &d_rat;
        if ratio(st.a_sets[i].len() as i64) < need {
            return Err(format!(
                "|A_{}| = {} below (1 - s/2t) y_{} d = {}",
                i + 1,
                st.a_sets[i].len(),
                p_i - 1,
                need
            ));
        }
        if let Some((_, md)) = g.max_degree_in(&st.a_sets[i]) {
            if ratio(md as i64) >= &params.y[p_i] * &d_rat {
                return Err(format!("Δ(G[A_{}]) = {md} not below y_{p_i} d", i + 1));
            }
        }
    }
    // stable reservoir when the active path has reached depth r
    if ell >= r {
        let a_r = &st.a_sets[r - 1];
        if !g.is_stable(a_r) {
            return Err("A_r is not stable".into());
        }
        if a_r.len() + s < t {
            return Err(format!("|A_r| = {} below t - s = {}", a_r.len(), t - s));
        }
    }
    // mutual sparsity: A_i is 1/(2t-s)-sparse to A_h for h < i
    let denom = 2 * t - s;
    for i in 1..st.a_sets.len() {
        for h in 0..i {
            let cap = st.a_sets[h].len();
            for v in st.a_sets[i].iter() {
                if g.neighbours(v).intersection_len(&st.a_sets[h]) * denom > cap {
                    return Err(format!("A_{} not 1/(2t-s)-sparse to A_{}", i + 1, h + 1));
                }
            }
        }
    }
    Ok(())
}

/// Outcome of one [`key_step`] run.
#[derive(Clone, Debug)]
pub enum KeyStepOutcome {
    /// Stuck point: `p ∈ {1..q}`, disjoint `A`, `B` with
    /// `|A| ≥ y_{p-1} d / 2`, `|B| ≤ 2rtd`, `Δ(G[A]) < y_p d`, and every
    /// vertex of `A` has fewer than `max(y_p d, k^t)` neighbours outside
    /// `A ∪ B`.
    Pair { p: usize, a: VertexSet, b: VertexSet },
    /// The embedding completed: an explicit induced copy of `T`.
    Witness(TreeWitness),
}

/// One sparse-pair extraction (or a full embedding of `T`) on `G[universe]`.
/// Requires `d = Δ(G[universe]) ≥ 6t / y_{q-1}`; refuses otherwise so the
/// caller can close out greedily.
pub fn key_step(
    g: &crate::graph::Graph,
    universe: &VertexSet,
    tree: &TreePattern,
    params: &SparsifyParams,
) -> Result<KeyStepOutcome, EngineError> {
    key_step_observed(g, universe, tree, params, &mut |_| {})
}

/// [`key_step`] with an observer invoked on every good reference state
/// (after seeding and after each extension).
pub fn key_step_observed(
    g: &crate::graph::Graph,
    universe: &VertexSet,
    tree: &TreePattern,
    params: &SparsifyParams,
    observer: &mut dyn FnMut(&ReferenceState),
) -> Result<KeyStepOutcome, EngineError> {
    let (t, r, k, q) = (params.t, params.r, params.k, params.q);
    if tree.len() != t {
        return Err(EngineError::ParamRefusal(
            "params built for a different tree".into(),
        ));
    }
    let Some((v0, d)) = g.max_degree_in(universe) else {
        return Err(EngineError::ParamRefusal("empty working graph".into()));
    };
    // d ≥ 6t / y_{q-1}
    if ratio(d as i64) * &params.y[q - 1] < ratio(6 * t as i64) {
        return Err(EngineError::ParamRefusal(format!(
            "max degree {d} below 6t/y_(q-1)"
        )));
    }
    let center = tree.center();
    let dfs = tree.dfs_enumeration(center);
    if dfs.depth.iter().any(|&dep| dep > r) {
        return Err(EngineError::ParamRefusal("tree radius exceeds r".into()));
    }

    // Seed: a maximum-degree vertex hosts the root; its neighbourhood has
    // clique number ≤ k-1, so the descent yields A_1 with p_1 ∈ {1..k-1}.
    let nbrs = g.neighbours_in(v0, universe);
    debug_assert_eq!(nbrs.len(), d);
    let thresholds: Vec<Rational> = (0..k).map(|p| params.yd(p, d)).collect();
    let (p1, a1) = sparse_descend(g, &nbrs, k - 1, &thresholds).map_err(|e| match e {
        EngineError::HypothesisViolation { mut clique } => {
            clique.push(v0);
            EngineError::HypothesisViolation { clique }
        }
        other => other,
    })?;
    let mut st = ReferenceState {
        s: 1,
        embedding: vec![None; t],
        path_tree: vec![center],
        path_host: vec![v0],
        a_sets: vec![a1],
        p_idx: vec![p1],
    };
    st.embedding[center] = Some(v0);
    audit_state(g, universe, tree, params, d, &st)?;
    observer(&st);

    loop {
        let sigma = dfs.order[st.s];
        let parent = dfs.parent[sigma];
        let j = st
            .path_tree
            .iter()
            .position(|&u| u == parent)
            .ok_or_else(|| {
                EngineError::InternalInvariant("dfs parent not on the active path".into())
            })?
            + 1;
        if j > r {
            return Err(EngineError::InternalInvariant(
                "attachment deeper than r".into(),
            ));
        }
        let image = st.image(g.n());

        let (x, c_for_next) = if j < r {
            // B: the closure of the image, plus vertices heavy towards some
            // A_i (more than |A_i|/(2t-s) neighbours), all within the
            // universe.
            let mut b_raw = image.clone();
            for u in image.iter() {
                b_raw.union_with(g.neighbours(u));
            }
            b_raw.intersect_with(universe);
            let denom = 2 * t - st.s;
            for a_i in st.a_sets.iter().take(j) {
                let cap = a_i.len();
                for v in universe.iter() {
                    if g.neighbours(v).intersection_len(a_i) * denom > cap {
                        b_raw.insert(v);
                    }
                }
            }
            let a_j = &st.a_sets[j - 1];
            let mut outside = universe.clone();
            outside.subtract(a_j);
            outside.subtract(&b_raw);
            let tau = params.spill_threshold(st.p_idx[j - 1], d);
            let mut best: Option<(usize, usize)> = None;
            for v in a_j.iter() {
                let cnt = g.degree_in(v, &outside);
                if ratio(cnt as i64) >= tau && best.is_none_or(|(bc, _)| cnt > bc) {
                    best = Some((cnt, v));
                }
            }
            match best {
                None => {
                    let p_out = st.p_idx[j - 1];
                    let a_out = a_j.clone();
                    let b_out = b_raw.difference(&a_out);
                    check_pair(g, universe, params, d, p_out, &a_out, &b_out, &image)?;
                    return Ok(KeyStepOutcome::Pair {
                        p: p_out,
                        a: a_out,
                        b: b_out,
                    });
                }
                Some((_, x)) => {
                    let c = g.neighbours_in(x, &outside);
                    (x, Some((c, st.p_idx[j - 1])))
                }
            }
        } else {
            // j = r: σ_{s+1} is a pattern leaf; extend from the stable
            // reservoir, no B needed.
            let a_r = &st.a_sets[r - 1];
            let x = a_r.first().ok_or_else(|| {
                EngineError::InternalInvariant("A_r exhausted despite size invariant".into())
            })?;
            (x, None)
        };

        st.embedding[sigma] = Some(x);
        st.s += 1;
        if st.s == t {
            let embedding = st.embedding.iter().map(|e| e.unwrap()).collect();
            return Ok(KeyStepOutcome::Witness(TreeWitness {
                tree: tree.clone(),
                embedding,
            }));
        }

        // Strip N[x] from the kept sets and rebuild the tail of the path.
        let mut nx = g.neighbours(x).clone();
        nx.insert(x);
        st.a_sets.truncate(j);
        for a_i in st.a_sets.iter_mut() {
            a_i.subtract(&nx);
        }
        st.p_idx.truncate(j.min(r - 1));
        st.path_tree.truncate(j);
        st.path_host.truncate(j);
        st.path_tree.push(sigma);
        st.path_host.push(x);

        if let Some((c, p_j)) = c_for_next {
            if j + 1 == r {
                // |C| ≥ k^t: Ramsey yields a stable reservoir of size t.
                match ramsey_stable(g, &c, k, t)? {
                    RamseyOutcome::Stable(a_new) => st.a_sets.push(a_new),
                    RamseyOutcome::Short(_) => {
                        // success was guaranteed under ω ≤ k, so a clique
                        // above the bound must exist inside C
                        if let Some(clique) = crate::graph::find_clique(g, &c, k + 1) {
                            return Err(EngineError::HypothesisViolation { clique });
                        }
                        return Err(EngineError::InternalInvariant(
                            "ramsey fell short with |C| >= k^t and omega <= k".into(),
                        ));
                    }
                }
            } else {
                // j ≤ r-2: descend inside C (clique number ≤ k-1 since C is
                // a neighbourhood) with thresholds y_{p_j} d … y_{p_j+k-1} d.
                let thresholds: Vec<Rational> = (0..k).map(|p| params.yd(p_j + p, d)).collect();
                let (p_rel, a_new) =
                    sparse_descend(g, &c, k - 1, &thresholds).map_err(|e| match e {
                        EngineError::HypothesisViolation { mut clique } => {
                            clique.push(x);
                            EngineError::HypothesisViolation { clique }
                        }
                        other => other,
                    })?;
                let p_new = p_j + p_rel;
                if p_new > (k - 1) * (j + 1) || p_new > q {
                    return Err(EngineError::InternalInvariant(format!(
                        "reference index p_{} = {p_new} exceeds its range",
                        j + 1
                    )));
                }
                st.a_sets.push(a_new);
                st.p_idx.push(p_new);
            }
        }
        audit_state(g, universe, tree, params, d, &st)?;
        observer(&st);
    }
}

fn audit_state(
    g: &crate::graph::Graph,
    universe: &VertexSet,
    tree: &TreePattern,
    params: &SparsifyParams,
    d: usize,
    st: &ReferenceState,
) -> Result<(), EngineError> {
    if params.audit {
        validate_reference_state(g, universe, tree, params, d, st)
            .map_err(EngineError::InternalInvariant)?;
    }
    Ok(())
}

/// Exact check of the three output bullets plus disjointness.
#[allow(clippy::too_many_arguments)]
fn check_pair(
    g: &crate::graph::Graph,
    universe: &VertexSet,
    params: &SparsifyParams,
    d: usize,
    p: usize,
    a: &VertexSet,
    b: &VertexSet,
    image: &VertexSet,
) -> Result<(), EngineError> {
    let fail = |msg: String| Err(EngineError::InternalInvariant(msg));
    if !a.is_disjoint(b) {
        return fail("A and B intersect".into());
    }
    if !image.is_subset_of(b) {
        return fail("embedded image escaped B".into());
    }
    let d_rat = ratio(d as i64);
    if ratio(2 * a.len() as i64) < &params.y[p - 1] * &d_rat {
        return fail(format!("|A| = {} below y_(p-1) d / 2", a.len()));
    }
    if ratio(b.len() as i64) > ratio((2 * params.r * params.t) as i64) * &d_rat {
        return fail(format!("|B| = {} above 2rtd", b.len()));
    }
    if let Some((_, md)) = g.max_degree_in(a) {
        if ratio(md as i64) >= &params.y[p] * &d_rat {
            return fail(format!("Δ(G[A]) = {md} not below y_p d"));
        }
    }
    let tau = params.spill_threshold(p, d);
    let mut outside = universe.clone();
    outside.subtract(a);
    outside.subtract(b);
    for v in a.iter() {
        if ratio(g.degree_in(v, &outside) as i64) >= tau {
            return fail(format!("vertex {v} of A spills past max(y_p d, k^t)"));
        }
    }
    Ok(())
}

/// Outcome of one sparsification round.
#[derive(Clone, Debug)]
pub enum SparsifyOutcome {
    /// Induced subgraph `H` with `|H| ≥ (20qrtk^t)^{-1} y_{p-1} |G|` and
    /// `Δ(G[H]) < y_p d`.
    Shrunk { p: usize, h: VertexSet },
    Witness(TreeWitness),
}

/// One sparsification round on `G[universe]` with degree cap `d`
/// (`Δ(G[universe]) ≤ d`): accumulate disjoint pairs via [`key_step`] (or a
/// greedy stable split once the remainder is sparse), pick the majority
/// reference index, and extract the low-degree subgraph by Turán or by
/// [`local_partition`].
pub fn sparsify_once(
    g: &crate::graph::Graph,
    universe: &VertexSet,
    tree: &TreePattern,
    params: &SparsifyParams,
    d: usize,
    observer: &mut dyn FnMut(&ReferenceState),
) -> Result<SparsifyOutcome, EngineError> {
    let (t, r, k, q) = (params.t, params.r, params.k, params.q);
    if let Some((_, md)) = g.max_degree_in(universe) {
        if md > d {
            return Err(EngineError::ParamRefusal(format!(
                "degree cap {d} below actual maximum degree {md}"
            )));
        }
    }
    let n_universe = universe.len();
    if n_universe == 0 {
        return Ok(SparsifyOutcome::Shrunk {
            p: q,
            h: VertexSet::empty(g.n()),
        });
    }

    let mut remainder = universe.clone();
    let mut pairs: Vec<(VertexSet, VertexSet, usize)> = Vec::new();
    let six_t = ratio(6 * t as i64);
    while !remainder.is_empty() {
        let d_rem = g.max_degree_in(&remainder).map_or(0, |(_, md)| md);
        if ratio(d_rem as i64) * &params.y[q - 1] >= six_t {
            match key_step_observed(g, &remainder, tree, params, observer)? {
                KeyStepOutcome::Witness(w) => return Ok(SparsifyOutcome::Witness(w)),
                KeyStepOutcome::Pair { p, a, b } => {
                    remainder.subtract(&a);
                    remainder.subtract(&b);
                    pairs.push((a, b, p));
                }
            }
        } else {
            // Sparse close-out: a greedy stable set versus the rest.
            let a = greedy_maxdeg_stable(g, &remainder);
            let b = remainder.difference(&a);
            remainder = VertexSet::empty(g.n());
            pairs.push((a, b, q));
        }
        // accumulator bullets, checked exactly on actual sets
        let (a, b, p) = pairs.last().unwrap();
        if ratio((4 * r * t * a.len()) as i64) <= &params.y[*p - 1] * ratio(b.len() as i64) {
            return Err(EngineError::InternalInvariant(
                "accumulator ratio |A| > (4rt)^{-1} y_{p-1} |B| failed".into(),
            ));
        }
        let spill = params.spill_threshold(*p, d);
        for v in a.iter() {
            if ratio(g.degree_in(v, &remainder) as i64) > spill {
                return Err(EngineError::InternalInvariant(
                    "accumulator spill bound failed".into(),
                ));
            }
        }
        if pairs.len() > n_universe {
            return Err(EngineError::InternalInvariant(
                "accumulator failed to terminate".into(),
            ));
        }
    }

    // Majority index class.
    let mut score = vec![0usize; q + 1];
    for (a, b, p) in &pairs {
        score[*p] += a.len() + b.len();
    }
    let p_star = (1..=q)
        .max_by_key(|&p| (score[p], std::cmp::Reverse(p)))
        .unwrap();
    if score[p_star] * q < n_universe {
        return Err(EngineError::InternalInvariant(
            "majority class below |G|/q".into(),
        ));
    }
    let mut c_set = VertexSet::empty(g.n());
    for (a, _, p) in &pairs {
        if *p == p_star {
            c_set.union_with(a);
        }
    }

    // Edge bound on G[C], recomputed exactly before the split.
    let edges_c = g.edges_within(&c_set);
    let spill_star = params.spill_threshold(p_star, d);
    if ratio(2 * edges_c as i64) > ratio(3) * &spill_star * ratio(c_set.len() as i64) {
        return Err(EngineError::InternalInvariant(
            "accumulator edge bound failed".into(),
        ));
    }

    let kt = Int::from(k).pow(t as u32);
    let c_claim = Rational::new(Int::one(), Int::from(20 * q * r * t) * &kt);
    let h;
    let p_out;
    if Int::from(2 * edges_c) <= Int::from(3) * &kt * Int::from(c_set.len()) {
        // Turán branch: C is globally sparse; its min-degree greedy stable
        // set is the whole harvest. Degree 0 beats any y_p d, so report q.
        h = turan_stable(g, &c_set);
        p_out = q;
        let need = Rational::new(
            Int::from(c_set.len() * c_set.len()),
            Int::from(c_set.len() + 2 * edges_c),
        );
        if ratio(h.len() as i64) < need {
            return Err(EngineError::InternalInvariant(
                "Turán branch size postcondition failed".into(),
            ));
        }
    } else {
        // Dense branch: drop high-degree vertices of C, then partition.
        let bound6 = ratio(6) * params.yd(p_star, d);
        let mut s_prime = VertexSet::empty(g.n());
        for v in c_set.iter() {
            if ratio(g.degree_in(v, &c_set) as i64) < bound6 {
                s_prime.insert(v);
            }
        }
        if 2 * s_prime.len() < c_set.len() {
            return Err(EngineError::InternalInvariant(
                "low-degree core below |C|/2".into(),
            ));
        }
        h = local_partition(g, &s_prime, &bound6, 6)?;
        p_out = p_star;
    }

    // Final postconditions, exact.
    if let Some((_, md)) = g.max_degree_in(&h) {
        if ratio(md as i64) >= params.yd(p_out, d) {
            return Err(EngineError::InternalInvariant(
                "round degree postcondition failed".into(),
            ));
        }
    }
    if ratio(h.len() as i64) < &c_claim * &params.y[p_out - 1] * ratio(n_universe as i64) {
        return Err(EngineError::InternalInvariant(
            "round size postcondition failed".into(),
        ));
    }
    Ok(SparsifyOutcome::Shrunk { p: p_out, h })
}

/// Report of the closed-form guarantee evaluation, all brackets directed.
#[derive(Clone, Debug)]
pub struct GuaranteeReport {
    pub t: usize,
    pub r: usize,
    pub q: usize,
    /// `c = 20 q r t k^t`, exact.
    pub c: Int,
    /// `b = log₂(4c²)`.
    pub b: Interval,
    /// `b · (log₂ d)^{1 - 1/q}`.
    pub exponent: Interval,
    /// `2^{-exponent} · n`; `bound.lo` is the claimable value.
    pub bound: Interval,
}

/// Evaluates the closed-form stable-set guarantee for an `n`-vertex graph of
/// maximum degree `≤ d` against pattern `tree` and clique bound `k`, with
/// downward rounding so the published inequality is never over-claimed.
pub fn sparse_guarantee(
    n: usize,
    d: usize,
    tree: &TreePattern,
    k: usize,
) -> Result<GuaranteeReport, EngineError> {
    if k < 2 || tree.len() < 3 {
        return Err(EngineError::ParamRefusal(
            "guarantee requires k >= 2 and |T| >= 3".into(),
        ));
    }
    let d = d.max(2);
    let t = tree.len();
    let r = tree.radius().max(2);
    let q = (r - 1) * (k - 1);
    let c = Int::from(20 * q * r * t) * Int::from(k).pow(t as u32);
    let b = log2_interval(&Rational::from_integer(Int::from(4) * &c * &c));
    let ld = log2_interval(&ratio(d as i64));
    let e = ratio(1) - ratio_fr(1, q as i64);
    let pw = pow_interval(&ld, &e);
    let exponent = b.mul_nonneg(&pw);
    let neg = Interval {
        lo: -exponent.hi.clone(),
        hi: -exponent.lo.clone(),
    };
    let bound = exp2_interval(&neg).scale_nonneg(&ratio(n as i64));
    Ok(GuaranteeReport {
        t,
        r,
        q,
        c,
        b,
        exponent,
        bound,
    })
}

/// The find-or-refute entry point of the sparse engine (default mode).
///
/// Shortcuts: `|T| ≤ 2` and `k = 1` are decided directly. Otherwise, with
/// `d = max(Δ(G), 2)` and `x = (log₂ d)^{1/q}`: if `x ≤ b/2` a greedy stable
/// set already meets the closed-form bound; else iterate [`sparsify_once`]
/// with `y_i = 2^{-x^i}` until the remainder is edgeless.
pub fn stable_set_sparse(
    g: &crate::graph::Graph,
    tree: &TreePattern,
    k: usize,
) -> Result<SearchOutcome, EngineError> {
    if k == 0 {
        return Err(EngineError::ParamRefusal("k must be >= 1".into()));
    }
    if let Some(out) = shortcut_outcome(g, tree, k)? {
        return Ok(out);
    }
    let d = g
        .max_degree_in(&g.vertex_set())
        .map_or(0, |(_, md)| md)
        .max(2);
    let report = sparse_guarantee(g.n(), d, tree, k)?;
    let x = pow_interval(
        &log2_interval(&ratio(d as i64)),
        &ratio_fr(1, report.q as i64),
    );
    let claimed = report.bound.lo.clone().max(ratio(1));

    let half_b = &report.b.hi / ratio(2);
    if x.lo <= half_b {
        // Greedy branch: |S| ≥ n/(d+1) ≥ d^{-2} n ≥ claimed bound.
        let s = greedy_maxdeg_stable(g, &g.vertex_set());
        if s.len() < ceil_rational(&claimed) {
            return Err(EngineError::InternalInvariant(
                "greedy branch missed the closed-form bound".into(),
            ));
        }
        return Ok(SearchOutcome::Stable(StableSetCert::new(
            s,
            claimed,
            CertMode::SparseGreedy,
        )));
    }

    // Loop mode: x > b/2 guarantees the default y meets the ratio constraint.
    let (params, _) = SparsifyParams::default_for(tree, k, d)?;
    let rounds_cap = pow_interval(&x, &ratio((params.q - 1) as i64)).hi + ratio(1);
    match iterate_sparsify(g, tree, &params, Some(rounds_cap))? {
        IterateResult::Witness(w) => Ok(SearchOutcome::Witness(w)),
        IterateResult::Stable(set, chain) => {
            let claim = claimed.min(chain).max(ratio(1));
            if set.len() < ceil_rational(&claim) {
                return Err(EngineError::InternalInvariant(
                    "iterated branch missed its bound".into(),
                ));
            }
            Ok(SearchOutcome::Stable(StableSetCert::new(
                set,
                claim,
                CertMode::SparseIterated,
            )))
        }
    }
}

/// Force-mode entry point: run the sparsification loop with caller-supplied
/// parameters (ratio constraint still enforced). The certificate claims the
/// exact per-round chain bound rather than the closed form.
pub fn stable_set_sparse_forced(
    g: &crate::graph::Graph,
    tree: &TreePattern,
    k: usize,
    params: &SparsifyParams,
) -> Result<SearchOutcome, EngineError> {
    if let Some(out) = shortcut_outcome(g, tree, k)? {
        return Ok(out);
    }
    match iterate_sparsify(g, tree, params, None)? {
        IterateResult::Witness(w) => Ok(SearchOutcome::Witness(w)),
        IterateResult::Stable(set, chain) => {
            let claim = if g.n() > 0 {
                chain.max(ratio(1)).min(ratio(set.len() as i64))
            } else {
                chain
            };
            Ok(SearchOutcome::Stable(StableSetCert::new(
                set,
                claim,
                CertMode::SparseIterated,
            )))
        }
    }
}

/// Decides the degenerate cases: `|T| ≤ 2` or `k = 1`.
fn shortcut_outcome(
    g: &crate::graph::Graph,
    tree: &TreePattern,
    k: usize,
) -> Result<Option<SearchOutcome>, EngineError> {
    if tree.len() == 1 {
        if g.n() > 0 {
            return Ok(Some(SearchOutcome::Witness(TreeWitness {
                tree: tree.clone(),
                embedding: vec![0],
            })));
        }
        return Ok(Some(SearchOutcome::trivial_stable(VertexSet::empty(0))));
    }
    if tree.len() == 2 {
        for u in g.vertices() {
            if let Some(v) = g.neighbours(u).first() {
                return Ok(Some(SearchOutcome::Witness(TreeWitness {
                    tree: tree.clone(),
                    embedding: vec![u, v],
                })));
            }
        }
        return Ok(Some(SearchOutcome::trivial_stable(g.vertex_set())));
    }
    if k == 1 {
        // K_2-free means edgeless; an edge is a clique above the bound.
        for u in g.vertices() {
            if let Some(v) = g.neighbours(u).first() {
                return Err(EngineError::HypothesisViolation { clique: vec![u, v] });
            }
        }
        return Ok(Some(SearchOutcome::trivial_stable(g.vertex_set())));
    }
    Ok(None)
}

enum IterateResult {
    Witness(TreeWitness),
    /// Final edgeless vertex set plus the exact chain bound
    /// `n · Π_j y_{p_j - 1} / c`.
    Stable(VertexSet, Rational),
}

fn iterate_sparsify(
    g: &crate::graph::Graph,
    tree: &TreePattern,
    params: &SparsifyParams,
    rounds_cap: Option<Rational>,
) -> Result<IterateResult, EngineError> {
    let c_inv = Rational::new(
        Int::one(),
        Int::from(20 * params.q * params.r * params.t) * Int::from(params.k).pow(params.t as u32),
    );
    let mut cur = g.vertex_set();
    let mut chain = ratio(g.n() as i64);
    let mut rounds = 0usize;
    let mut last_d = usize::MAX;
    loop {
        let d_cur = g.max_degree_in(&cur).map_or(0, |(_, md)| md);
        if d_cur < 1 {
            if let Some(cap) = &rounds_cap {
                if ratio(rounds as i64) > *cap {
                    return Err(EngineError::InternalInvariant(format!(
                        "round count {rounds} exceeded x^(q-1)+1 = {cap}"
                    )));
                }
            }
            return Ok(IterateResult::Stable(cur, chain));
        }
        if d_cur >= last_d || rounds > 64 + g.n() {
            return Err(EngineError::InternalInvariant(
                "sparsification rounds stopped making progress".into(),
            ));
        }
        last_d = d_cur;
        match sparsify_once(g, &cur, tree, params, d_cur, &mut |_| {})? {
            SparsifyOutcome::Witness(w) => return Ok(IterateResult::Witness(w)),
            SparsifyOutcome::Shrunk { p, h } => {
                chain = chain * &params.y[p - 1] * &c_inv;
                cur = h;
                rounds += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::tree::make_broom;

    fn cycle(n: usize) -> Graph {
        Graph::build(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>()).unwrap()
    }

    fn rvec(xs: &[(i64, i64)]) -> Vec<Rational> {
        xs.iter().map(|&(a, b)| ratio_fr(a, b)).collect()
    }

    #[test]
    fn descend_edgeless() {
        let g = Graph::build(6, &[]).unwrap();
        let th = rvec(&[(3, 1), (1, 1), (1, 1)]);
        let (p, h) = sparse_descend(&g, &g.vertex_set(), 2, &th).unwrap();
        assert_eq!(p, 1);
        assert_eq!(h.len(), 6);
    }

    #[test]
    fn descend_k3_trace() {
        // K3 with k = 3 and unit thresholds descends twice and ends at a
        // single vertex with p = 3.
        let g = cycle(3);
        let th = rvec(&[(1, 1), (1, 1), (1, 1), (1, 1)]);
        let (p, h) = sparse_descend(&g, &g.vertex_set(), 3, &th).unwrap();
        assert_eq!(p, 3);
        assert_eq!(h.len(), 1);
    }

    #[test]
    fn descend_c5_trace() {
        // Pinned regression: C5, k = 2, thresholds (3,1,1) lands on the
        // 2-vertex neighbourhood of vertex 0 at p = 2.
        let g = cycle(5);
        let th = rvec(&[(3, 1), (1, 1), (1, 1)]);
        let (p, h) = sparse_descend(&g, &g.vertex_set(), 2, &th).unwrap();
        assert_eq!(p, 2);
        assert_eq!(h.to_vec(), vec![1, 4]);
        assert_eq!(g.max_degree_in(&h).unwrap().1, 0);
    }

    #[test]
    fn descend_violation_reports_clique() {
        // K4 with claimed clique bound 2 must surface a triangle.
        let g = Graph::build(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let th = rvec(&[(1, 1), (1, 1), (1, 1)]);
        match sparse_descend(&g, &g.vertex_set(), 2, &th) {
            Err(EngineError::HypothesisViolation { clique }) => {
                assert_eq!(clique.len(), 3);
                let set = VertexSet::from_iter(4, clique);
                assert!(g.is_clique(&set));
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn partition_examples() {
        let g = cycle(6);
        let h = local_partition(&g, &g.vertex_set(), &ratio(3), 2).unwrap();
        assert_eq!(h.len(), 3);
        assert_eq!(g.max_degree_in(&h).map(|(_, d)| d), Some(0));

        let edgeless = Graph::build(7, &[]).unwrap();
        let h = local_partition(&edgeless, &edgeless.vertex_set(), &ratio(1), 3).unwrap();
        assert!(h.len() >= 3);

        let k4 = Graph::build(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let h = local_partition(&k4, &k4.vertex_set(), &ratio(4), 4).unwrap();
        assert_eq!(h.len(), 1);

        // precondition: degree must be strictly below the bound
        assert!(local_partition(&k4, &k4.vertex_set(), &ratio(3), 2).is_err());
    }

    #[test]
    fn partition_is_move_stable() {
        let g = cycle(9);
        let classes = local_partition_full(&g, &g.vertex_set(), 3);
        assert!(is_move_stable(&g, &classes));
        let total: usize = classes.iter().map(VertexSet::len).sum();
        assert_eq!(total, 9);
    }

    #[test]
    fn key_step_refusals() {
        // Δ = 2 is always below 6t/y_{q-1} for t ≥ 3.
        let g = cycle(8);
        let tree = make_broom(3, 0).unwrap(); // P4
        let params = SparsifyParams::forced(&tree, 2, rvec(&[(9, 10), (7, 100)])).unwrap();
        assert!(matches!(
            key_step(&g, &g.vertex_set(), &tree, &params),
            Err(EngineError::ParamRefusal(_))
        ));
        // ratio-violating y is refused at construction
        assert!(SparsifyParams::forced(&tree, 2, rvec(&[(1, 2), (1, 3)])).is_err());
    }

    #[test]
    fn sparse_engine_examples() {
        // C4 is {P4, K3}-free: must return a stable certificate.
        let c4 = cycle(4);
        let p4 = make_broom(3, 0).unwrap();
        match stable_set_sparse(&c4, &p4, 2).unwrap() {
            SearchOutcome::Stable(cert) => {
                assert!(c4.is_stable(&cert.set));
                assert_eq!(cert.set.len(), 2);
            }
            SearchOutcome::Witness(_) => panic!("C4 has no induced P4 witness"),
        }

        // Edgeless: everything.
        let e10 = Graph::build(10, &[]).unwrap();
        match stable_set_sparse(&e10, &p4, 2).unwrap() {
            SearchOutcome::Stable(cert) => assert_eq!(cert.set.len(), 10),
            _ => panic!(),
        }

        // C5 contains an induced P4; either outcome is legal and must verify.
        let c5 = cycle(5);
        match stable_set_sparse(&c5, &p4, 2).unwrap() {
            SearchOutcome::Stable(cert) => {
                assert!(c5.is_stable(&cert.set));
                assert!(!cert.set.is_empty());
            }
            SearchOutcome::Witness(w) => assert!(w.verify(&c5)),
        }
    }

    #[test]
    fn shortcuts() {
        let g = cycle(4);
        // |T| = 2: any edge is a witness
        let k2 = make_broom(1, 0).unwrap();
        match stable_set_sparse(&g, &k2, 2).unwrap() {
            SearchOutcome::Witness(w) => assert!(w.verify(&g)),
            _ => panic!(),
        }
        // k = 1 on a graph with edges: hypothesis violation
        let p4 = make_broom(3, 0).unwrap();
        assert!(matches!(
            stable_set_sparse(&g, &p4, 1),
            Err(EngineError::HypothesisViolation { .. })
        ));
        let e3 = Graph::build(3, &[]).unwrap();
        match stable_set_sparse(&e3, &p4, 1).unwrap() {
            SearchOutcome::Stable(cert) => assert_eq!(cert.set.len(), 3),
            _ => panic!(),
        }
    }

    #[test]
    fn guarantee_constants() {
        // T = P4, k = 2: c = 20·1·2·4·16 = 2560, b = log2(26214400).
        let p4 = make_broom(3, 0).unwrap();
        let rep = sparse_guarantee(100, 8, &p4, 2).unwrap();
        assert_eq!(rep.q, 1);
        assert_eq!(rep.c, Int::from(2560));
        // q = 1: exponent collapses to b, bound = n · 2^{-b} = n / 26214400
        let exact = ratio_fr(100, 26214400);
        assert!(rep.bound.lo <= exact && exact <= rep.bound.hi);
        assert!(rep.bound.width() < ratio_fr(1, 1_000_000_000));
    }
}
