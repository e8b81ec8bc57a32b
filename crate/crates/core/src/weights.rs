//! Nonnegative vertex weightings with exact rational arithmetic.

use crate::bitset::VertexSet;
use crate::error::GraphError;
use crate::graph::Graph;
use crate::Rational;
use num_traits::{One, Zero};

/// A weighting `w : V(G) → Q≥0`. All sums are exact; the maximum weighted
/// degree `Δ(G, w) = max_v w(N(v))` is recomputed on demand, never cached
/// across working-graph changes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weighting {
    w: Vec<Rational>,
}

impl Weighting {
    pub fn new(w: Vec<Rational>) -> Result<Self, GraphError> {
        if w.iter().any(|x| x < &Rational::zero()) {
            return Err(GraphError::BadPattern("weights must be nonnegative".into()));
        }
        Ok(Weighting { w })
    }

    /// All-ones weighting.
    pub fn uniform(n: usize) -> Self {
        Weighting {
            w: vec![Rational::one(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn get(&self, v: usize) -> &Rational {
        &self.w[v]
    }

    pub fn values(&self) -> &[Rational] {
        &self.w
    }

    /// Exact `w(S) = Σ_{v∈S} w(v)`.
    pub fn sum(&self, s: &VertexSet) -> Rational {
        let mut acc = Rational::zero();
        for v in s.iter() {
            acc += &self.w[v];
        }
        acc
    }

    /// `w(N(v) ∩ within)`.
    pub fn nbr_weight(&self, g: &Graph, v: usize, within: &VertexSet) -> Rational {
        self.sum(&g.neighbours_in(v, within))
    }

    /// Maximum weighted degree over `within`, with the lowest-index vertex
    /// attaining it. `None` on the empty set.
    pub fn max_weighted_degree(&self, g: &Graph, within: &VertexSet) -> Option<(usize, Rational)> {
        let mut best: Option<(usize, Rational)> = None;
        for v in within.iter() {
            let d = self.nbr_weight(g, v, within);
            match &best {
                Some((_, bd)) if d <= *bd => {}
                _ => best = Some((v, d)),
            }
        }
        best
    }

    /// Vertices of `within` with strictly positive weight.
    pub fn positive_support(&self, within: &VertexSet) -> VertexSet {
        let mut s = VertexSet::empty(self.w.len());
        for v in within.iter() {
            if self.w[v] > Rational::zero() {
                s.insert(v);
            }
        }
        s
    }
}
