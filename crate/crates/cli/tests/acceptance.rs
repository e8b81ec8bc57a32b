//! Acceptance suite: one test per criterion, each ending in a single
//! PASS/FAIL line (visible with `--nocapture`). Run with
//! `cargo test -p tkfree-cli --test acceptance -- --nocapture`.

use std::time::Instant;
use tkfree::graph::{greedy_maxdeg_stable, ramsey_stable, turan_stable, RamseyOutcome};
use tkfree::multibroom::{multibroom_constant, weighted_stable_multibroom};
use tkfree::sparsify::{
    is_move_stable, key_step_observed, local_partition, local_partition_full, sparse_descend,
    sparse_guarantee, stable_set_sparse, validate_reference_state, KeyStepOutcome, SparsifyParams,
};
use tkfree::tree::{parse_pattern, MultibroomSpec, TreePattern};
use tkfree::witness::{
    exact_alpha, exact_frac_chromatic, exact_omega, find_induced_tree, ramsey_rhs,
};
use tkfree::{ratio, ratio_fr, Graph, Int, Rational, SearchOutcome, VertexSet, Weighting};
use tkfree_cli::gen::{generate, parse_weights, InstanceSpec, XorShift64};
use tkfree_cli::report::{run_batch, to_json_lines, BatchConfig, BatchItem};

const TREES: [&str; 4] = ["path:4", "star:3", "broom:2,2", "multibroom:(1,2),(2,1)"];

/// Instance specs with clique number at most 2 (triangle-free by
/// construction), all with n ≤ 60.
fn triangle_free_instances() -> Vec<String> {
    let mut specs = Vec::new();
    for n in 4..=35 {
        specs.push(format!("cycle:{n}"));
    }
    for n in (4..=60).step_by(2) {
        specs.push(format!("matching:{n}"));
    }
    specs.push("kneser:5,2".into()); // Petersen
    specs.push("kneser:7,3".into()); // triangle-free (3·3 > 7)
    for depth in 2..=4 {
        specs.push(format!("mycielski:{depth}"));
    }
    for n in [20, 30, 40, 50, 60] {
        for seed in 1..=12 {
            specs.push(format!("girth:{n},3,5,{seed}"));
        }
    }
    specs
}

/// Extra instances legal at k = 3 (clique number 3 allowed).
fn omega3_instances() -> Vec<String> {
    vec!["cycle:3".into(), "kneser:6,2".into()]
}

fn soundness_config() -> BatchConfig {
    let mut items = Vec::new();
    for k in [2usize, 3] {
        let mut specs = triangle_free_instances();
        if k == 3 {
            specs.extend(omega3_instances());
        }
        for spec in &specs {
            for tree in TREES {
                for engine in ["sparse", "multibroom"] {
                    items.push(BatchItem {
                        instance: spec.clone(),
                        tree: tree.into(),
                        k,
                        engine: engine.into(),
                        weights: None,
                        rounds: None,
                    });
                }
            }
        }
    }
    BatchConfig { items }
}

#[test]
fn criterion_1_either_or_soundness() {
    let start = Instant::now();
    let config = soundness_config();
    let combos = config.items.len() / 2; // two engines per (instance, tree, k)
    assert!(combos >= 1000, "need >= 1000 combinations, built {combos}");
    let (reports, summary) = run_batch(&config);
    let elapsed = start.elapsed();
    for r in &reports {
        assert!(
            matches!(r.outcome.as_str(), "stable" | "witness"),
            "item {} ({} / {} / k={} / {}): unexpected outcome {} ({:?})",
            r.index,
            r.instance,
            r.tree,
            r.k,
            r.engine,
            r.outcome,
            r.detail
        );
        assert!(
            r.validated,
            "item {} failed validation: {:?}",
            r.index, r.detail
        );
    }
    assert_eq!(summary.validation_failures, 0);
    assert!(
        elapsed.as_secs() < 600,
        "soundness batch exceeded 10 minutes ({elapsed:?})"
    );
    println!(
        "criterion 1 (either/or soundness): PASS — {} engine runs over {} combinations, {} stable / {} witness, 0 failures in {:.1}s",
        summary.total,
        combos,
        summary.stable,
        summary.witness,
        elapsed.as_secs_f64()
    );
}

/// Canonical sample of small graphs, pairwise non-isomorphic by exhaustive
/// canonicalization (minimum edge bitmask over all vertex permutations).
fn canonical_sample(target: usize) -> Vec<Graph> {
    fn permutations(n: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..n).collect();
        fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if k <= 1 {
                out.push(cur.clone());
                return;
            }
            for i in 0..k {
                heap(k - 1, cur, out);
                if k % 2 == 0 {
                    cur.swap(i, k - 1);
                } else {
                    cur.swap(0, k - 1);
                }
            }
        }
        heap(n, &mut cur, &mut out);
        out
    }
    let pair_index = |n: usize, a: usize, b: usize| -> usize {
        let (a, b) = (a.min(b), a.max(b));
        // index of (a,b) among pairs of 0..n in lexicographic order
        (0..a).map(|x| n - 1 - x).sum::<usize>() + (b - a - 1)
    };
    let canonical = |n: usize, mask: u64, perms: &[Vec<usize>]| -> u64 {
        let npairs = n * (n - 1) / 2;
        let mut best = u64::MAX;
        for perm in perms {
            let mut img = 0u64;
            for idx in 0..npairs {
                if mask >> idx & 1 == 0 {
                    continue;
                }
                // invert pair index
                let mut a = 0;
                let mut rem = idx;
                while rem >= n - 1 - a {
                    rem -= n - 1 - a;
                    a += 1;
                }
                let b = a + 1 + rem;
                img |= 1 << pair_index(n, perm[a], perm[b]);
            }
            best = best.min(img);
        }
        best
    };

    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    let mut rng = XorShift64::new(0xACCE97);
    'outer: for n in 4..=7usize {
        let perms = permutations(n);
        let npairs = n * (n - 1) / 2;
        let budget = if n == 7 { 4000 } else { 400 };
        for _ in 0..budget {
            let raw = rng.next_u64();
            // vary density: plain, AND (sparser), OR (denser)
            let mask = match rng.below(3) {
                0 => raw,
                1 => raw & rng.next_u64(),
                _ => raw | rng.next_u64(),
            } & ((1u64 << npairs) - 1);
            let canon = canonical(n, mask, &perms);
            if seen.insert((n, canon)) {
                let edges: Vec<(usize, usize)> = (0..npairs)
                    .filter(|&idx| mask >> idx & 1 == 1)
                    .map(|idx| {
                        let mut a = 0;
                        let mut rem = idx;
                        while rem >= n - 1 - a {
                            rem -= n - 1 - a;
                            a += 1;
                        }
                        (a, a + 1 + rem)
                    })
                    .collect();
                out.push(Graph::build(n, &edges).unwrap());
                if out.len() >= target {
                    break 'outer;
                }
            }
        }
    }
    assert!(out.len() >= target, "only {} canonical graphs found", out.len());
    out
}

/// Exhaustive injective-map search, independent of the dfs-based oracle.
fn exists_induced_exhaustive(g: &Graph, tree: &TreePattern) -> bool {
    fn go(g: &Graph, tree: &TreePattern, assigned: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
        let tv = assigned.len();
        if tv == tree.len() {
            return true;
        }
        for host in g.vertices() {
            if used[host] {
                continue;
            }
            let ok = (0..tv).all(|prev| {
                tree.adjacent(prev, tv) == g.has_edge(assigned[prev], host)
            });
            if ok {
                assigned.push(host);
                used[host] = true;
                if go(g, tree, assigned, used) {
                    return true;
                }
                used[host] = false;
                assigned.pop();
            }
        }
        false
    }
    let mut assigned = Vec::new();
    let mut used = vec![false; g.n()];
    go(g, tree, &mut assigned, &mut used)
}

#[test]
fn criterion_2_oracle_equivalence() {
    let sample = canonical_sample(500);
    let trees: Vec<(String, TreePattern)> = ["path:3", "path:4", "star:3", "broom:2,1"]
        .iter()
        .map(|t| (t.to_string(), parse_pattern(t).unwrap().to_tree()))
        .collect();
    let mut checks = 0usize;
    for g in &sample {
        for (name, tree) in &trees {
            let fast = find_induced_tree(g, tree).unwrap();
            let slow = exists_induced_exhaustive(g, tree);
            assert_eq!(
                fast.is_some(),
                slow,
                "disagreement on {name} for a {}-vertex graph with {} edges",
                g.n(),
                g.edge_count()
            );
            if let Some(w) = fast {
                assert!(w.verify(g));
            }
            checks += 1;
        }
    }
    println!(
        "criterion 2 (oracle equivalence): PASS — {} graphs x 4 patterns = {} comparisons, zero disagreements",
        sample.len(),
        checks
    );
}

#[test]
fn criterion_3_ramsey_inequality() {
    let sample = canonical_sample(500);
    let mut inequality_checks = 0usize;
    let mut ramsey_runs = 0usize;
    for g in &sample {
        let n = g.n();
        let (alpha, _) = exact_alpha(g).unwrap();
        let (omega, _) = exact_omega(g).unwrap();
        for k in [2usize, 3, 4] {
            if alpha < k {
                let rhs = ramsey_rhs(omega, k);
                assert!(
                    Int::from(n) <= rhs,
                    "Thm inequality failed: n = {n}, omega = {omega}, k = {k}"
                );
                inequality_checks += 1;
            }
            if omega <= k {
                for m in 1..=4usize {
                    if (k as u64).pow(m as u32) <= n as u64 {
                        let r = ramsey_stable(g, &g.vertex_set(), k, m).unwrap();
                        assert!(
                            !r.is_short(),
                            "ramsey failed with omega = {omega} <= k = {k}, n = {n} >= k^{m}"
                        );
                        assert!(g.is_stable(r.set()));
                        assert!(r.set().len() >= m);
                        ramsey_runs += 1;
                    }
                }
            }
        }
    }
    println!(
        "criterion 3 (Ramsey bounds): PASS — {} inequality checks, {} guaranteed extractions, all succeeded",
        inequality_checks, ramsey_runs
    );
}

#[test]
fn criterion_4_descend_and_partition() {
    let mut rng = XorShift64::new(0xC4);
    let mut descend_runs = 0usize;
    while descend_runs < 1000 {
        let n = 6 + rng.below(10) as usize;
        let p_num = 1 + rng.below(4);
        let seed = rng.next_u64();
        let g = generate(&format!("gnp:{n},{p_num}/10,{seed}").parse().unwrap()).unwrap();
        let (omega, _) = exact_omega(&g).unwrap();
        let k = omega.max(1);
        let mut th: Vec<Rational> = Vec::with_capacity(k + 1);
        th.push(ratio(1 + rng.below(n as u64) as i64).min(ratio(n as i64)));
        for _ in 0..k {
            th.push(ratio(1 + rng.below(n as u64) as i64));
        }
        let (p, h) = sparse_descend(&g, &g.vertex_set(), k, &th).unwrap();
        assert!(ratio(h.len() as i64) >= th[p - 1], "size postcondition");
        let maxdeg = g.max_degree_in(&h).map_or(0, |(_, d)| d);
        assert!(ratio(maxdeg as i64) < th[p], "degree postcondition");
        descend_runs += 1;
    }

    let mut partition_runs = 0usize;
    while partition_runs < 1000 {
        let n = 5 + rng.below(14) as usize;
        let p_num = 1 + rng.below(5);
        let seed = rng.next_u64();
        let g = generate(&format!("gnp:{n},{p_num}/10,{seed}").parse().unwrap()).unwrap();
        let all = g.vertex_set();
        let delta = g.max_degree_in(&all).map_or(0, |(_, d)| d);
        let d_bound = ratio(delta as i64 + 1);
        let parts = 1 + rng.below(5) as usize;
        let h = local_partition(&g, &all, &d_bound, parts).unwrap();
        assert!(h.len() * parts >= n, "size postcondition");
        for v in h.iter() {
            assert!(
                ratio((g.degree_in(v, &h) * parts) as i64) < d_bound,
                "degree postcondition"
            );
        }
        let classes = local_partition_full(&g, &all, parts);
        assert!(is_move_stable(&g, &classes), "partition not move-stable");
        partition_runs += 1;
    }
    println!(
        "criterion 4 (descent / partition postconditions): PASS — {descend_runs} + {partition_runs} randomized invocations, all postconditions exact"
    );
}

/// Triangle-free bipartite host with both sides of size `m`.
fn bipartite_host(m: usize, num: u64, den: u64, seed: u64) -> Graph {
    let mut rng = XorShift64::new(seed);
    let threshold = (u64::MAX as u128 * num as u128 / den as u128) as u64;
    let mut edges = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if rng.next_u64() < threshold {
                edges.push((i, m + j));
            }
        }
    }
    Graph::build(2 * m, &edges).unwrap()
}

fn spider_host(legs: usize, leglen: usize) -> Graph {
    let n = 1 + legs * leglen;
    let mut edges = Vec::new();
    for leg in 0..legs {
        let mut prev = 0usize;
        for step in 0..leglen {
            let v = 1 + leg * leglen + step;
            edges.push((prev, v));
            prev = v;
        }
    }
    Graph::build(n, &edges).unwrap()
}

#[test]
fn criterion_5_force_mode_invariants() {
    let trees: Vec<TreePattern> = ["path:4", "star:3", "broom:2,2"]
        .iter()
        .map(|t| parse_pattern(t).unwrap().to_tree())
        .collect();
    let mut runs = 0usize;
    let mut states_checked = 0usize;
    let mut witnesses = 0usize;
    let mut pairs = 0usize;
    let mut seed = 0u64;
    while runs < 200 {
        seed += 1;
        let tree = &trees[(seed % 3) as usize];
        let t = tree.len() as i64;
        let y = vec![ratio_fr(19, 20), ratio_fr(19, 20 * 3 * t)];
        let params = SparsifyParams::forced(tree, 2, y).unwrap();
        let g = match seed % 4 {
            0 => bipartite_host(30, 93, 100, seed),
            1 => bipartite_host(350, 1, 10, seed),
            2 => {
                if tree.len() <= 4 {
                    bipartite_host(350, 1, 10, seed)
                } else {
                    bipartite_host(450, 1, 10, seed)
                }
            }
            _ => spider_host(34 + (seed % 7) as usize, 2),
        };
        let universe = g.vertex_set();
        let d = g.max_degree_in(&universe).map_or(0, |(_, md)| md);
        if ratio(d as i64) * &params.y[params.q - 1] < ratio(6 * t) {
            continue; // precondition refused; pick another seed
        }
        let mut local_states = 0usize;
        let outcome = key_step_observed(&g, &universe, tree, &params, &mut |st| {
            local_states += 1;
            validate_reference_state(&g, &universe, tree, &params, d, st)
                .expect("good-copy conditions must hold exactly");
        });
        match outcome.expect("forced runs must not error") {
            KeyStepOutcome::Witness(w) => {
                assert!(w.verify(&g), "terminal witness failed re-validation");
                witnesses += 1;
            }
            KeyStepOutcome::Pair { p, a, b } => {
                // the three output bullets were checked inside key_step;
                // re-check the headline ones here independently
                assert!((1..=params.q).contains(&p));
                assert!(a.is_disjoint(&b));
                assert!(ratio(2 * a.len() as i64) >= &params.y[p - 1] * ratio(d as i64));
                assert!(
                    ratio(b.len() as i64)
                        <= ratio((2 * params.r * params.t) as i64) * ratio(d as i64)
                );
                let maxdeg = g.max_degree_in(&a).map_or(0, |(_, md)| md);
                assert!(ratio(maxdeg as i64) < &params.y[p] * ratio(d as i64));
                pairs += 1;
            }
        }
        assert!(local_states >= 1);
        states_checked += local_states;
        runs += 1;
    }
    assert!(witnesses > 0, "no tree witnesses across forced runs");
    assert!(pairs > 0, "no pair terminals across forced runs");
    println!(
        "criterion 5 (force-mode invariant suite): PASS — 200 runs, {states_checked} reference states validated, {witnesses} witnesses / {pairs} pairs"
    );
}

#[test]
fn criterion_6_sparse_constants() {
    let p4 = parse_pattern("path:4").unwrap().to_tree();
    let rep = sparse_guarantee(100, 8, &p4, 2).unwrap();
    assert_eq!(rep.c, Int::from(2560), "c = 20qrtk^t must be 2560");

    // b = log2(26214400); reference frozen from an independent 60-digit
    // evaluation: floor(b · 2^130) = 33543478857263053518755052713480722016667
    let frozen: Int = "33543478857263053518755052713480722016667".parse().unwrap();
    let b_lo_ref = Rational::new(frozen.clone(), Int::from(1) << 130);
    let b_hi_ref = Rational::new(frozen + Int::from(1), Int::from(1) << 130);
    let ulp = Rational::new(Int::from(1), Int::from(1) << 128);
    assert!(rep.b.lo <= b_hi_ref && rep.b.hi >= b_lo_ref, "bracket misses reference");
    assert!(&b_lo_ref - &rep.b.lo <= ulp, "lower endpoint further than 1 ulp");
    assert!(rep.b.width() <= ratio(2) * &ulp, "bracket wider than 2 ulps");

    // q = 1 collapses the exponent: bound = n · 2^{-b} = n / 26214400 exactly
    let exact = ratio_fr(100, 26214400);
    assert!(rep.bound.lo <= exact && exact <= rep.bound.hi);

    // d = 2 also collapses the exponent regardless of q: check at q = 2
    let spec = parse_pattern("multibroom:(1,2),(2,1)").unwrap().to_tree();
    let rep2 = sparse_guarantee(50, 2, &spec, 2).unwrap();
    assert_eq!(rep2.q, 2);
    let direct = {
        // bound = 50 · 2^{-b}: with log2(d)=1 the power term is exactly 1
        let b_only = rep2.b.clone();
        let neg = tkfree::numeric::Interval {
            lo: -b_only.hi.clone(),
            hi: -b_only.lo.clone(),
        };
        tkfree::numeric::exp2_interval(&neg).scale_nonneg(&ratio(50))
    };
    assert!(rep2.bound.lo <= direct.hi && direct.lo <= rep2.bound.hi);

    // monotone nonincreasing in d and in t over a grid; at q = 1 the bound
    // is constant in d, so the d-grid uses the q = 2 pattern
    let mut prev: Option<Rational> = None;
    for d in [2usize, 4, 16, 256, 65536] {
        let r = sparse_guarantee(1000, d, &spec, 2).unwrap();
        if let Some(pl) = prev {
            assert!(r.bound.hi <= pl, "bound not nonincreasing in d");
        }
        prev = Some(r.bound.lo.clone());
    }
    let mut prev: Option<Rational> = None;
    for t in 3..=6usize {
        let path = parse_pattern(&format!("path:{t}")).unwrap().to_tree();
        let r = sparse_guarantee(1000, 64, &path, 2).unwrap();
        if let Some(pl) = prev {
            assert!(r.bound.hi <= pl, "bound not nonincreasing in t");
        }
        prev = Some(r.bound.lo.clone());
    }

    // Round-count bound: a star with 5999 leaves pushes Δ past 2^{b/2}, so
    // the default engine takes the sparsification loop; the engine itself
    // asserts n_rounds ≤ x^{q-1} + 1 and would error if it failed.
    let n = 6000;
    let edges: Vec<(usize, usize)> = (1..n).map(|v| (0usize, v)).collect();
    let star = Graph::build(n, &edges).unwrap();
    match stable_set_sparse(&star, &p4, 2).unwrap() {
        SearchOutcome::Stable(cert) => {
            assert!(star.is_stable(&cert.set));
            assert!(cert.set.len() >= n - 1);
        }
        SearchOutcome::Witness(_) => panic!("stars are P4-free"),
    }
    println!(
        "criterion 6 (sparse constants): PASS — c = 2560, b = log2(26214400) to 1 ulp at 128 bits, q=1 bound exact, monotone grid, round bound held in the loop run"
    );
}

#[test]
fn criterion_7_multibroom_constant_and_matchings() {
    let spec = MultibroomSpec::new(vec![(1, 1)]).unwrap();
    let c = multibroom_constant(&spec, 2);
    assert_eq!(c, ratio_fr(1, 288), "level-2 constant must be exactly 1/288");

    let mut rng = XorShift64::new(0xC7);
    for run in 0..100 {
        let n = 4 + 2 * (rng.below(9) as usize); // 4..=20, even
        let g = generate(&format!("matching:{n}").parse::<InstanceSpec>().unwrap()).unwrap();
        let w = parse_weights(&format!("random:{}", 1000 + run), n).unwrap();
        match weighted_stable_multibroom(&g, &w, &spec, 2).unwrap() {
            SearchOutcome::Stable(cert) => {
                assert!(g.is_stable(&cert.set));
                let total = w.sum(&g.vertex_set());
                let achieved = w.sum(&cert.set);
                assert!(achieved >= &c * &total, "exact guarantee failed");
                // pinned empirical regression: matchings surrender at least
                // half the weight minus one vertex
                let max_w = (0..n).map(|v| w.get(v).clone()).max().unwrap();
                assert!(
                    achieved >= total / ratio(2) - max_w,
                    "pinned matching regression failed on run {run}"
                );
            }
            SearchOutcome::Witness(_) => panic!("matchings are P3-free"),
        }
    }
    println!(
        "criterion 7 (multibroom constant + weighted matchings): PASS — c = 1/288 exact, 100 weighted runs met both bounds"
    );
}

#[test]
fn criterion_8_fractional_colouring() {
    use tkfree::fraccolour::{build_frac_colouring, verify_frac_colouring, FracOutcome};
    let cases = [
        ("cycle:5", "star:3", ratio_fr(5, 2)),
        ("cycle:7", "star:3", ratio_fr(7, 3)),
        ("matching:10", "multibroom:(1,1)", ratio(2)),
    ];
    let mut lines = Vec::new();
    for (inst, tree, chi_star_expected) in cases {
        let g = generate(&inst.parse::<InstanceSpec>().unwrap()).unwrap();
        let spec = parse_pattern(tree).unwrap();
        let oracle = exact_frac_chromatic(&g).unwrap();
        assert_eq!(oracle, chi_star_expected, "oracle mismatch on {inst}");
        match build_frac_colouring(&g, &spec, 2, 64).unwrap() {
            (FracOutcome::Colouring(fc), _) => {
                let rep = verify_frac_colouring(&g, &fc);
                assert!(rep.passed, "verification failed on {inst}: {:?}", rep.failures);
                assert!(fc.b >= 1, "no full cover after 64 rounds on {inst}");
                let r = fc.ratio().unwrap();
                assert!(r >= chi_star_expected, "a/b beats the exact optimum on {inst}");
                assert!(r <= ratio(4), "a/b above the pinned ceiling on {inst}");
                lines.push(format!("{inst}: a/b = {}/{}", fc.a, fc.b));
            }
            _ => panic!("{inst} is pattern-free for {tree}"),
        }
    }
    println!(
        "criterion 8 (fractional colouring): PASS — {}; all ratios in [χ*, 4] and verified",
        lines.join(", ")
    );
}

#[test]
fn criterion_9_determinism() {
    // the full soundness batch plus weighted and fractional items, twice
    let mut config = soundness_config();
    for seed in 0..20u64 {
        config.items.push(BatchItem {
            instance: format!("matching:{}", 4 + 2 * (seed % 9)),
            tree: "multibroom:(1,1)".into(),
            k: 2,
            engine: "multibroom".into(),
            weights: Some(format!("random:{}", 1000 + seed)),
            rounds: None,
        });
    }
    for (inst, tree) in [
        ("cycle:5", "star:3"),
        ("cycle:7", "star:3"),
        ("matching:10", "multibroom:(1,1)"),
    ] {
        config.items.push(BatchItem {
            instance: inst.into(),
            tree: tree.into(),
            k: 2,
            engine: "frac".into(),
            weights: None,
            rounds: Some(64),
        });
    }
    let (r1, s1) = run_batch(&config);
    let (r2, s2) = run_batch(&config);
    let j1 = to_json_lines(&r1, &s1).unwrap();
    let j2 = to_json_lines(&r2, &s2).unwrap();
    assert_eq!(j1, j2, "reports differ between identical runs");
    assert_eq!(s1.validation_failures, 0);
    println!(
        "criterion 9 (determinism): PASS — {} items run twice, byte-identical JSON reports ({} bytes)",
        r1.len(),
        j1.len()
    );
}

/// Round-trip property demanded by the harness module: serialized outcomes
/// re-validate after parsing.
#[test]
fn reports_revalidate_on_load() {
    let config = BatchConfig {
        items: vec![
            BatchItem {
                instance: "cycle:9".into(),
                tree: "star:3".into(),
                k: 2,
                engine: "multibroom".into(),
                weights: Some("random:3".into()),
                rounds: None,
            },
            BatchItem {
                instance: "cycle:5".into(),
                tree: "path:4".into(),
                k: 2,
                engine: "sparse".into(),
                weights: None,
                rounds: None,
            },
        ],
    };
    let (reports, summary) = run_batch(&config);
    let text = to_json_lines(&reports, &summary).unwrap();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        if v.get("summary").is_some() {
            continue;
        }
        let r: tkfree_cli::report::RunReport = serde_json::from_str(line).unwrap();
        let spec: InstanceSpec = r.instance.parse().unwrap();
        let g = generate(&spec).unwrap();
        match r.outcome.as_str() {
            "stable" => {
                let set = VertexSet::from_iter(g.n(), r.set.unwrap());
                assert!(g.is_stable(&set));
            }
            "witness" => {
                let tree = parse_pattern(&r.tree).unwrap().to_tree();
                let w = tkfree::TreeWitness {
                    tree,
                    embedding: r.witness.unwrap(),
                };
                assert!(w.verify(&g));
            }
            other => panic!("unexpected outcome {other}"),
        }
    }
}

/// The sparse engine's Turán route and the greedy route agree with the
/// spec-level bounds on the soundness corpus (spot check on a few instances).
#[test]
fn engine_bounds_spot_checks() {
    for inst in ["cycle:12", "matching:20", "kneser:5,2", "mycielski:3"] {
        let g = generate(&inst.parse::<InstanceSpec>().unwrap()).unwrap();
        let all = g.vertex_set();
        // greedy bound |S| ≥ ⌈n/(Δ+1)⌉
        let s = greedy_maxdeg_stable(&g, &all);
        let delta = g.max_degree_in(&all).map_or(0, |(_, d)| d);
        assert!(s.len() * (delta + 1) >= g.n());
        assert!(g.is_stable(&s));
        // Turán bound |S| ≥ n²/(n + 2m), exactly
        let t = turan_stable(&g, &all);
        assert!(g.is_stable(&t));
        assert!(
            Int::from(t.len()) * Int::from(g.n() + 2 * g.edge_count())
                >= Int::from(g.n()) * Int::from(g.n())
        );
        // ramsey never fails when it must succeed
        let (omega, _) = exact_omega(&g).unwrap();
        for m in 1..=3usize {
            if (omega.max(2) as u64).pow(m as u32) <= g.n() as u64 {
                let r = ramsey_stable(&g, &all, omega.max(2), m).unwrap();
                assert!(matches!(r, RamseyOutcome::Stable(_)));
            }
        }
        // weighting sanity under the engine entry
        let w = Weighting::uniform(g.n());
        assert_eq!(w.sum(&all), ratio(g.n() as i64));
    }
}
