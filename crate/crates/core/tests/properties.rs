//! Property tests for the library invariants: extraction bounds, degeneracy
//! exactness, dfs-enumeration structure, oracle identities и LP duality.

use proptest::prelude::*;
use tkfree::graph::{
    check_degeneracy_ordering, greedy_maxdeg_stable, is_degenerate_in, ramsey_stable,
    turan_stable, DegeneracyResult, Graph,
};
use tkfree::tree::TreePattern;
use tkfree::witness::{exact_alpha, exact_omega, frac_chromatic_lp};
use tkfree::{Int, VertexSet};

/// Random graph на up to 8 vertices from an edge mask.
fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n, any::<u64>()).prop_map(|(n, mask)| {
        let mut edges = Vec::new();
        let mut idx = 0;
        for a in 0..n {
            for b in (a + 1)..n {
                if mask >> (idx % 64) & 1 == 1 {
                    edges.push((a, b));
                }
                idx += 1;
            }
        }
        Graph::build(n, &edges).unwrap()
    })
}

/// Random labelled tree from a Prüfer-like parent draw.
fn arb_tree(max_n: usize) -> impl Strategy<Value = TreePattern> {
    (1..=max_n, any::<u64>()).prop_map(|(n, seed)| {
        let mut parent = vec![usize::MAX; n];
        let mut s = seed | 1;
        for v in 1..n {
            s ^= s >> 12;
            s ^= s << 25;
            s ^= s >> 27;
            parent[v] = (s.wrapping_mul(0x2545F4914F6CDD1D) % v as u64) as usize;
        }
        TreePattern::from_parents(parent, 0).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_meets_maxdeg_bound(g in arb_graph(8)) {
        let all = g.vertex_set();
        let s = greedy_maxdeg_stable(&g, &all);
        prop_assert!(g.is_stable(&s));
        let delta = g.max_degree_in(&all).map_or(0, |(_, d)| d);
        prop_assert!(s.len() * (delta + 1) >= g.n());
    }

    #[test]
    fn turan_meets_average_degree_bound(g in arb_graph(8)) {
        let s = turan_stable(&g, &g.vertex_set());
        prop_assert!(g.is_stable(&s));
        // |S| ge n^2 / (n + 2m), exactly in integers
        let n = Int::from(g.n());
        let lhs = Int::from(s.len()) * (Int::from(g.n()) + Int::from(2 * g.edge_count()));
        prop_assert!(lhs >= &n * &n);
    }

    #[test]
    fn ramsey_succeeds_under_exact_omega(g in arb_graph(8), m in 1usize..=3) {
        let (omega, _) = exact_omega(&g).unwrap();
        let k = omega.max(2);
        if (k as u64).pow(m as u32) <= g.n() as u64 {
            let r = ramsey_stable(&g, &g.vertex_set(), k, m).unwrap();
            prop_assert!(!r.is_short());
            prop_assert!(g.is_stable(r.set()));
            prop_assert!(r.set().len() >= m);
        }
    }

    #[test]
    fn degeneracy_decision_is_exact(g in arb_graph(6), mask in any::<u8>(), d in 0usize..4) {
        // X from the mask; compare the greedy answer against brute force
        // over all |X|! orderings.
        let x = VertexSet::from_iter(
            g.n(),
            (0..g.n()).filter(|v| mask >> v & 1 == 1),
        );
        let greedy = is_degenerate_in(&g, &x, d);
        let members: Vec<usize> = x.iter().collect();
        let mut any_valid = false;
        permute(&members, &mut |perm| {
            if check_degeneracy_ordering(&g, &x, perm, d) {
                any_valid = true;
            }
        });
        match greedy {
            DegeneracyResult::Ordering(o) => {
                prop_assert!(check_degeneracy_ordering(&g, &x, &o, d));
                prop_assert!(any_valid);
            }
            DegeneracyResult::Refutation(_) => prop_assert!(!any_valid),
        }
    }

    #[test]
    fn dfs_enumeration_structure(tree in arb_tree(8), root_pick in any::<u64>()) {
        let root = (root_pick % tree.len() as u64) as usize;
        let dfs = tree.dfs_enumeration(root);
        prop_assert_eq!(dfs.order.len(), tree.len());
        prop_assert_eq!(dfs.order[0], root);
        prop_assert!(dfs.check_property(&tree));
        // (a) every prefix induces a subtree: connectivity via dfs parents
        // is immediate; check edge-count = prefix-size - 1 instead
        for i in 1..=tree.len() {
            let prefix: Vec<usize> = dfs.order[..i].to_vec();
            let mut internal_edges = 0;
            for (ai, &a) in prefix.iter().enumerate() {
                for &b in prefix.iter().skip(ai + 1) {
                    if tree.adjacent(a, b) {
                        internal_edges += 1;
                    }
                }
            }
            prop_assert_eq!(internal_edges, i - 1, "prefix {} not a subtree", i);
        }
        // (b) later vertices attach on the active path;
        // (c) a committed leaf never sees a later vertex
        for i in 1..tree.len() {
            let path = dfs.active_path(dfs.order[i - 1]);
            let v = dfs.order[i];
            let nbr = dfs.parent[v];
            prop_assert!(path.contains(&nbr));
            for (pos, &u) in dfs.order.iter().enumerate().take(i).skip(1) {
                if tree.is_leaf(u) {
                    for &later in &dfs.order[pos + 1..] {
                        prop_assert!(!tree.adjacent(u, later));
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_vertex_cover_identity(g in arb_graph(8)) {
        // the complement of a maximum stable set is a minimum vertex cover
        let (alpha, set) = exact_alpha(&g).unwrap();
        let cover = set.complement();
        for u in g.vertices() {
            for v in g.neighbours(u).iter() {
                prop_assert!(cover.contains(u) || cover.contains(v));
            }
        }
        // minimality by exhaustion (n <= 8 so 2^n subsets)
        let n = g.n();
        let mut best = n;
        for mask in 0..(1u32 << n) {
            let cand = VertexSet::from_iter(n, (0..n).filter(|v| mask >> v & 1 == 1));
            let covers = g.vertices().all(|u| {
                g.neighbours(u)
                    .iter()
                    .all(|v| u > v || cand.contains(u) || cand.contains(v))
            });
            if covers {
                best = best.min(cand.len());
            }
        }
        prop_assert_eq!(best, n - alpha);
    }

    #[test]
    fn lp_duality_holds(g in arb_graph(8)) {
        if g.n() >= 1 {
            let sol = frac_chromatic_lp(&g).unwrap();
            prop_assert_eq!(sol.cover_optimum, sol.weight_optimum);
        }
    }

    #[test]
    fn dimacs_round_trip(g in arb_graph(8)) {
        let text = tkfree::dimacs::to_dimacs_string(&g);
        let back = tkfree::dimacs::read_dimacs(text.as_bytes()).unwrap();
        prop_assert_eq!(g, back);
    }
}

/// Heap's algorithm, calling `f` on every permutation of `items`.
fn permute(items: &[usize], f: &mut impl FnMut(&[usize])) {
    let mut work = items.to_vec();
    let n = work.len();
    fn heap(k: usize, work: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if k <= 1 {
            f(work);
            return;
        }
        for i in 0..k {
            heap(k - 1, work, f);
            if k % 2 == 0 {
                work.swap(i, k - 1);
            } else {
                work.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut work, f);
}
