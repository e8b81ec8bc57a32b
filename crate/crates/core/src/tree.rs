//! Tree patterns: brooms, multibrooms, radius, dfs-enumerations and active
//! paths.
//!
//! A dfs-enumeration `σ_1, …, σ_t` rooted at `σ_1` orders the tree so that
//! each `σ_{i+1}` has a neighbour on the tree path from `σ_1` to `σ_i` (the
//! *active path*). Later vertices can only attach on the active path, and a
//! leaf `σ_i` (`i ≥ 2`) never sees a later neighbour; the sparsification
//! engine leans on both facts.

use crate::error::GraphError;
use serde::{Deserialize, Serialize};

/// A rooted tree given by parent pointers, with derived BFS data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreePattern {
    t: usize,
    /// `parent[v]` for every non-root vertex; `parent[root] = usize::MAX`.
    parent: Vec<usize>,
    root: usize,
    adj: Vec<Vec<usize>>,
}

/// A multibroom as a list of `(length, bristle-count)` arm descriptors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultibroomSpec {
    arms: Vec<(usize, usize)>,
}

impl MultibroomSpec {
    /// Validates arm lengths (`ℓ_i ≥ 1`). An empty arm list denotes the
    /// degenerate single-vertex tree.
    pub fn new(arms: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        if arms.iter().any(|&(l, _)| l == 0) {
            return Err(GraphError::BadPattern(
                "broom arms must have length >= 1".into(),
            ));
        }
        Ok(MultibroomSpec { arms })
    }

    pub fn arms(&self) -> &[(usize, usize)] {
        &self.arms
    }

    /// Total vertex count `1 + Σ (ℓ_i + m_i)`.
    pub fn vertex_count(&self) -> usize {
        1 + self
            .arms
            .iter()
            .map(|&(l, m)| l + m)
            .sum::<usize>()
    }

    /// `max ℓ_i` (0 for the degenerate empty spec).
    pub fn max_length(&self) -> usize {
        self.arms.iter().map(|&(l, _)| l).max().unwrap_or(0)
    }

    /// `max m_i`.
    pub fn max_bristles(&self) -> usize {
        self.arms.iter().map(|&(_, m)| m).max().unwrap_or(0)
    }

    /// Realizes the spec as a rooted tree (root = vertex 0; per arm, the path
    /// vertices come first, then the bristles).
    pub fn to_tree(&self) -> TreePattern {
        let t = self.vertex_count();
        let mut parent = vec![usize::MAX; t];
        let mut next = 1;
        for &(len, bristles) in &self.arms {
            let mut prev = 0;
            for _ in 0..len {
                parent[next] = prev;
                prev = next;
                next += 1;
            }
            for _ in 0..bristles {
                parent[next] = prev;
                next += 1;
            }
        }
        debug_assert_eq!(next, t);
        TreePattern::from_parents(parent, 0).expect("construction is acyclic")
    }
}

impl TreePattern {
    /// Builds a tree from a parent array (`usize::MAX` marks the root).
    pub fn from_parents(parent: Vec<usize>, root: usize) -> Result<Self, GraphError> {
        let t = parent.len();
        if root >= t || parent[root] != usize::MAX {
            return Err(GraphError::BadPattern("bad root".into()));
        }
        let mut adj = vec![Vec::new(); t];
        for (v, &p) in parent.iter().enumerate() {
            if v == root {
                continue;
            }
            if p >= t || p == v {
                return Err(GraphError::BadPattern(format!("bad parent of {v}")));
            }
            adj[v].push(p);
            adj[p].push(v);
        }
        // Acyclicity + single root: every vertex must reach the root.
        for mut v in 0..t {
            let mut steps = 0;
            while v != root {
                v = parent[v];
                steps += 1;
                if steps > t {
                    return Err(GraphError::BadPattern("parent array has a cycle".into()));
                }
            }
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        Ok(TreePattern {
            t,
            parent,
            root,
            adj,
        })
    }

    /// Single-vertex tree.
    pub fn single() -> Self {
        TreePattern::from_parents(vec![usize::MAX], 0).unwrap()
    }

    pub fn len(&self) -> usize {
        self.t
    }

    pub fn is_empty(&self) -> bool {
        false // a tree has at least one vertex
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.t)
            .filter(|&v| v != self.root)
            .map(|v| (self.parent[v].min(v), self.parent[v].max(v)))
            .collect()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.adj[v].len() <= 1
    }

    /// Single- and two-vertex trees are permitted but flagged; consumers
    /// shortcut them (`T`-freeness is trivial for `|T| ≤ 2`).
    pub fn is_degenerate(&self) -> bool {
        self.t <= 2
    }

    /// BFS distances from `v`.
    pub fn distances_from(&self, v: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.t];
        dist[v] = 0;
        let mut queue = std::collections::VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Eccentricity of each vertex, by all-pairs BFS.
    pub fn eccentricities(&self) -> Vec<usize> {
        (0..self.t)
            .map(|v| self.distances_from(v).into_iter().max().unwrap())
            .collect()
    }

    /// Exact radius: `min_u max_v dist(u, v)`.
    pub fn radius(&self) -> usize {
        self.eccentricities().into_iter().min().unwrap()
    }

    /// Lowest-index vertex of minimum eccentricity.
    pub fn center(&self) -> usize {
        let ecc = self.eccentricities();
        let r = *ecc.iter().min().unwrap();
        ecc.iter().position(|&e| e == r).unwrap()
    }

    /// Depth-first enumeration rooted at `root`, visiting children in
    /// decreasing subtree-depth order (ties by lowest index). This keeps
    /// active paths maximal early, which makes sparsification traces easier
    /// to audit.
    pub fn dfs_enumeration(&self, root: usize) -> DfsEnumeration {
        assert!(root < self.t, "root out of range");
        // height[v] = depth of the subtree hanging below v when rooted at `root`
        let mut order = Vec::with_capacity(self.t);
        let mut dfs_parent = vec![usize::MAX; self.t];
        let height = self.subtree_heights(root);
        let mut visited = vec![false; self.t];
        let mut stack = vec![root];
        visited[root] = true;
        while let Some(v) = stack.pop() {
            order.push(v);
            let mut kids: Vec<usize> = self.adj[v]
                .iter()
                .copied()
                .filter(|&w| !visited[w])
                .collect();
            // deepest child visited first => push it last on the stack
            kids.sort_by_key(|&w| (height[w], std::cmp::Reverse(w)));
            for &w in &kids {
                visited[w] = true;
                dfs_parent[w] = v;
                stack.push(w);
            }
        }
        debug_assert_eq!(order.len(), self.t);
        let mut depth = vec![0usize; self.t];
        for &v in &order {
            if v != root {
                depth[v] = depth[dfs_parent[v]] + 1;
            }
        }
        DfsEnumeration {
            order,
            parent: dfs_parent,
            depth,
            root,
        }
    }

    fn subtree_heights(&self, root: usize) -> Vec<usize> {
        let mut height = vec![0usize; self.t];
        // post-order over the tree rooted at `root`
        let mut post = Vec::with_capacity(self.t);
        let mut stack = vec![(root, usize::MAX)];
        while let Some((v, par)) = stack.pop() {
            post.push((v, par));
            for &w in &self.adj[v] {
                if w != par {
                    stack.push((w, v));
                }
            }
        }
        for &(v, par) in post.iter().rev() {
            if par != usize::MAX {
                height[par] = height[par].max(height[v] + 1);
            }
        }
        height
    }
}

/// A dfs-enumeration together with parent/depth data for active-path queries.
#[derive(Clone, Debug)]
pub struct DfsEnumeration {
    /// Tree vertices in visit order (`order[0]` is the root).
    pub order: Vec<usize>,
    /// Dfs parent per tree vertex (`usize::MAX` for the root).
    pub parent: Vec<usize>,
    /// Distance from the root along dfs-parent pointers (equals tree distance).
    pub depth: Vec<usize>,
    pub root: usize,
}

impl DfsEnumeration {
    /// Active path of the prefix ending at tree vertex `v`: the tree path
    /// from the root to `v`, root first.
    pub fn active_path(&self, v: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = v;
        loop {
            path.push(cur);
            if cur == self.root {
                break;
            }
            cur = self.parent[cur];
        }
        path.reverse();
        path
    }

    /// Checks the defining dfs property on every prefix: `σ_{i+1}` must have
    /// a tree neighbour on the path from `σ_1` to `σ_i`.
    pub fn check_property(&self, tree: &TreePattern) -> bool {
        for i in 1..self.order.len() {
            let prev_path = self.active_path(self.order[i - 1]);
            let v = self.order[i];
            if !prev_path.iter().any(|&u| tree.adjacent(u, v)) {
                return false;
            }
        }
        true
    }
}

/// Builds an `(ℓ, m)`-broom: a path of length `ℓ` from the root `a` to `b`,
/// plus `m` extra leaves adjacent to `b`. Rejects `ℓ = 0`.
pub fn make_broom(length: usize, bristles: usize) -> Result<TreePattern, GraphError> {
    if length == 0 {
        return Err(GraphError::BadPattern(
            "brooms have length >= 1".into(),
        ));
    }
    Ok(MultibroomSpec::new(vec![(length, bristles)])?.to_tree())
}

/// Builds the multibroom realizing `spec` (root = vertex 0).
pub fn make_multibroom(spec: &MultibroomSpec) -> TreePattern {
    spec.to_tree()
}

/// Parses the CLI pattern syntax:
/// `broom:L,M`, `multibroom:(L1,M1),(L2,M2),...`, `path:N`, `star:N`.
///
/// `path:N` is the path on `N` vertices; `star:N` is `K_{1,N}` (`N` leaves).
pub fn parse_pattern(text: &str) -> Result<MultibroomSpec, GraphError> {
    let bad = |msg: &str| GraphError::BadPattern(format!("{msg} (in '{text}')"));
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| bad("expected 'kind:args'"))?;
    match kind {
        "path" => {
            let n: usize = rest.trim().parse().map_err(|_| bad("bad path length"))?;
            if n == 0 {
                return Err(bad("path needs >= 1 vertex"));
            }
            if n == 1 {
                MultibroomSpec::new(vec![])
            } else {
                MultibroomSpec::new(vec![(n - 1, 0)])
            }
        }
        "star" => {
            let leaves: usize = rest.trim().parse().map_err(|_| bad("bad star size"))?;
            if leaves == 0 {
                return Err(bad("star needs >= 1 leaf"));
            }
            MultibroomSpec::new(vec![(1, leaves - 1)])
        }
        "broom" => {
            let (l, m) = rest
                .split_once(',')
                .ok_or_else(|| bad("expected broom:L,M"))?;
            let l: usize = l.trim().parse().map_err(|_| bad("bad broom length"))?;
            let m: usize = m.trim().parse().map_err(|_| bad("bad bristle count"))?;
            MultibroomSpec::new(vec![(l, m)])
        }
        "multibroom" => {
            let mut arms = Vec::new();
            let mut rest = rest.trim();
            while !rest.is_empty() {
                let inner_end = rest.find(')').ok_or_else(|| bad("unbalanced parens"))?;
                if !rest.starts_with('(') {
                    return Err(bad("expected (L,M)"));
                }
                let inner = &rest[1..inner_end];
                let (l, m) = inner.split_once(',').ok_or_else(|| bad("expected L,M"))?;
                let l: usize = l.trim().parse().map_err(|_| bad("bad arm length"))?;
                let m: usize = m.trim().parse().map_err(|_| bad("bad bristle count"))?;
                arms.push((l, m));
                rest = rest[inner_end + 1..].trim_start_matches(',').trim_start();
            }
            if arms.is_empty() {
                return Err(bad("multibroom needs >= 1 arm"));
            }
            MultibroomSpec::new(arms)
        }
        _ => Err(bad("unknown pattern kind")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn broom_examples() {
        // (1, 3): K_{1,4} viewed from a leaf root; 5 vertices
        let b = make_broom(1, 3).unwrap();
        assert_eq!(b.len(), 5);
        assert_eq!(b.neighbours(1).len(), 4); // the star centre
        // (3, 0): 4 vertices on a length-3 path
        let p = make_broom(3, 0).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.adj.iter().all(|a| a.len() <= 2));
        // (2, 2): radius 2
        let c = make_broom(2, 2).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c.radius(), 2);
        assert!(make_broom(0, 3).is_err());
    }

    #[test]
    fn multibroom_examples() {
        // [(1,1),(1,1)] is exactly P5
        let spec = MultibroomSpec::new(vec![(1, 1), (1, 1)]).unwrap();
        let t = spec.to_tree();
        assert_eq!(t.len(), 5);
        let mut degs: Vec<usize> = (0..5).map(|v| t.neighbours(v).len()).collect();
        degs.sort_unstable();
        assert_eq!(degs, vec![1, 1, 2, 2, 2]); // path degree sequence
        assert_eq!(t.radius(), 2);

        let spec = MultibroomSpec::new(vec![(1, 2)]).unwrap();
        assert_eq!(spec.to_tree().len(), 4);

        // 1 + (2+3) + (1+0) vertices
        let spec = MultibroomSpec::new(vec![(2, 3), (1, 0)]).unwrap();
        assert_eq!(spec.vertex_count(), 7);
        assert_eq!(spec.to_tree().len(), 7);

        // empty arm list: degenerate single-vertex tree
        let spec = MultibroomSpec::new(vec![]).unwrap();
        assert_eq!(spec.to_tree().len(), 1);
        assert!(spec.to_tree().is_degenerate());
    }

    #[test]
    fn radius_examples() {
        assert_eq!(TreePattern::single().radius(), 0);
        assert_eq!(make_broom(3, 0).unwrap().radius(), 2); // P4
        let spec = MultibroomSpec::new(vec![(2, 3), (2, 0)]).unwrap();
        assert_eq!(spec.to_tree().radius(), 3);
    }

    #[test]
    fn dfs_enumeration_examples() {
        // P3 rooted at an end comes out in path order
        let p3 = make_broom(2, 0).unwrap();
        let dfs = p3.dfs_enumeration(0);
        assert_eq!(dfs.order, vec![0, 1, 2]);
        assert!(dfs.check_property(&p3));

        // star rooted at centre: every active path has length <= 1
        let star = MultibroomSpec::new(vec![(1, 2)]).unwrap().to_tree();
        let centre = 1;
        let dfs = star.dfs_enumeration(centre);
        assert_eq!(dfs.order[0], centre);
        assert!(dfs.check_property(&star));
        for &v in &dfs.order {
            assert!(dfs.active_path(v).len() <= 2);
        }

        // (2,2)-broom rooted at the root: property holds on every prefix
        let broom = make_broom(2, 2).unwrap();
        let dfs = broom.dfs_enumeration(0);
        assert!(dfs.check_property(&broom));
        // deepest-first: the full length-2 path precedes the bristles
        assert_eq!(dfs.depth[dfs.order[1]], 1);
        assert_eq!(dfs.depth[dfs.order[2]], 2);
    }

    #[test]
    fn pattern_syntax() {
        assert_eq!(
            parse_pattern("path:4").unwrap(),
            MultibroomSpec::new(vec![(3, 0)]).unwrap()
        );
        assert_eq!(
            parse_pattern("star:3").unwrap(),
            MultibroomSpec::new(vec![(1, 2)]).unwrap()
        );
        assert_eq!(
            parse_pattern("broom:2,2").unwrap(),
            MultibroomSpec::new(vec![(2, 2)]).unwrap()
        );
        assert_eq!(
            parse_pattern("multibroom:(1,2),(2,1)").unwrap(),
            MultibroomSpec::new(vec![(1, 2), (2, 1)]).unwrap()
        );
        assert!(parse_pattern("widget:3").is_err());
        assert!(parse_pattern("broom:0,2").is_err());
    }
}
