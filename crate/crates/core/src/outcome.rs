//! Search outcomes: stable-set certificates and explicit tree witnesses.

use crate::bitset::VertexSet;
use crate::graph::Graph;
use crate::tree::TreePattern;
use crate::Rational;
use num_traits::Zero;

/// Which engine branch produced a certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertMode {
    /// Trivial shortcut (edgeless graph, degenerate pattern, `k = 1`).
    Trivial,
    /// Greedy-colouring branch of the sparse engine.
    SparseGreedy,
    /// Iterated sparsification loop of the sparse engine.
    SparseIterated,
    /// Weighted multibroom engine (degenerate accumulation + colouring).
    Multibroom,
}

impl CertMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CertMode::Trivial => "trivial",
            CertMode::SparseGreedy => "sparse-greedy",
            CertMode::SparseIterated => "sparse-iterated",
            CertMode::Multibroom => "multibroom",
        }
    }
}

/// A weighted guarantee `w(set) ≥ constant · total_weight` attached to a
/// certificate from the weighted engine.
#[derive(Clone, Debug)]
pub struct WeightedClaim {
    /// The exact constant `c` of the guarantee.
    pub constant: Rational,
    /// `w(G)` at the time of the run.
    pub total_weight: Rational,
    /// `w(set)` actually achieved.
    pub achieved: Rational,
}

/// A stable set together with the exact bound it claims.
#[derive(Clone, Debug)]
pub struct StableSetCert {
    pub set: VertexSet,
    /// Claimed lower bound on `|set|` (exact rational; validators compare
    /// `|set| ≥ ⌈claimed_bound⌉`).
    pub claimed_bound: Rational,
    pub mode: CertMode,
    /// Present when the certificate came from a weighted run.
    pub weighted: Option<WeightedClaim>,
}

impl StableSetCert {
    pub fn new(set: VertexSet, claimed_bound: Rational, mode: CertMode) -> Self {
        StableSetCert {
            set,
            claimed_bound,
            mode,
            weighted: None,
        }
    }
}

/// An explicit induced embedding of a tree pattern into the host graph.
#[derive(Clone, Debug)]
pub struct TreeWitness {
    pub tree: TreePattern,
    /// `embedding[tree_vertex] = host_vertex` (injective).
    pub embedding: Vec<usize>,
}

impl TreeWitness {
    /// Checks that the embedding is injective and induces an isomorphic copy:
    /// adjacency is preserved in both directions.
    pub fn verify(&self, g: &Graph) -> bool {
        let t = self.tree.len();
        if self.embedding.len() != t {
            return false;
        }
        let mut seen = VertexSet::empty(g.n());
        for &img in &self.embedding {
            if img >= g.n() || seen.contains(img) {
                return false;
            }
            seen.insert(img);
        }
        for a in 0..t {
            for b in (a + 1)..t {
                let tree_edge = self.tree.adjacent(a, b);
                let graph_edge = g.has_edge(self.embedding[a], self.embedding[b]);
                if tree_edge != graph_edge {
                    return false;
                }
            }
        }
        true
    }

    /// Host vertices in the image.
    pub fn image(&self, n: usize) -> VertexSet {
        VertexSet::from_iter(n, self.embedding.iter().copied())
    }
}

/// Tagged union of the two legal end states of a find-or-refute run.
#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Stable(StableSetCert),
    Witness(TreeWitness),
}

impl SearchOutcome {
    pub fn trivial_stable(set: VertexSet) -> Self {
        let bound = if set.is_empty() {
            Rational::zero()
        } else {
            crate::ratio(1)
        };
        SearchOutcome::Stable(StableSetCert::new(set, bound, CertMode::Trivial))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SearchOutcome::Stable(_) => "stable",
            SearchOutcome::Witness(_) => "witness",
        }
    }
}
