//! Deterministic instance generators behind a compact spec syntax.
//!
//! Specs: `cycle:N`, `path:N`, `matching:N`, `kneser:N,K`, `mycielski:DEPTH`,
//! `gnp:N,P,SEED`, `girth:N,DEGREE,G,SEED`. The same spec always yields the
//! same graph: randomness comes from an explicit xorshift64* stream
//! (`x ^= x>>12; x ^= x<<25; x ^= x>>27; x * 0x2545F4914F6CDD1D`), and edge
//! probabilities are exact rationals compared against the raw 64-bit draw.

use anyhow::{anyhow, bail, Context, Result};
use tkfree::{Graph, Int, Rational};

/// xorshift64* stream; the zero seed is remapped to a fixed odd constant.
#[derive(Clone, Debug)]
pub struct XorShift64 {
    state: u64,
}

impl XorShift64 {
    pub fn new(seed: u64) -> Self {
        XorShift64 {
            state: if seed == 0 { 0x9E3779B97F4A7C15 } else { seed },
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    /// Uniform draw in `0..bound` by multiply-shift.
    pub fn below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }
}

/// A parsed instance spec; `Display` re-renders the canonical form.
#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSpec {
    Cycle(usize),
    Path(usize),
    Matching(usize),
    Kneser(usize, usize),
    Mycielski(usize),
    Gnp {
        n: usize,
        p: Rational,
        seed: u64,
    },
    Girth {
        n: usize,
        target_degree: usize,
        girth: usize,
        seed: u64,
    },
}

impl std::fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InstanceSpec::Cycle(n) => write!(f, "cycle:{n}"),
            InstanceSpec::Path(n) => write!(f, "path:{n}"),
            InstanceSpec::Matching(n) => write!(f, "matching:{n}"),
            InstanceSpec::Kneser(n, k) => write!(f, "kneser:{n},{k}"),
            InstanceSpec::Mycielski(d) => write!(f, "mycielski:{d}"),
            InstanceSpec::Gnp { n, p, seed } => write!(f, "gnp:{n},{p},{seed}"),
            InstanceSpec::Girth {
                n,
                target_degree,
                girth,
                seed,
            } => write!(f, "girth:{n},{target_degree},{girth},{seed}"),
        }
    }
}

/// Parses a decimal or fraction literal into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: Int = num.trim().parse().context("bad numerator")?;
        let den: Int = den.trim().parse().context("bad denominator")?;
        if den == Int::from(0) {
            bail!("zero denominator");
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int_part, frac_part)) = text.split_once('.') {
        let int_part = if int_part.is_empty() { "0" } else { int_part };
        let scale = Int::from(10u32).pow(frac_part.len() as u32);
        let whole: Int = int_part.parse().context("bad integer part")?;
        let frac: Int = frac_part.parse().context("bad fractional part")?;
        return Ok(Rational::new(whole * &scale + frac, scale));
    }
    let whole: Int = text.parse().context("bad number")?;
    Ok(Rational::from_integer(whole))
}

impl std::str::FromStr for InstanceSpec {
    type Err = anyhow::Error;

    fn from_str(text: &str) -> Result<Self> {
        let (kind, rest) = text
            .split_once(':')
            .ok_or_else(|| anyhow!("expected 'kind:args' in '{text}'"))?;
        let args: Vec<&str> = rest.split(',').map(str::trim).collect();
        let num = |i: usize| -> Result<usize> {
            args.get(i)
                .ok_or_else(|| anyhow!("missing argument {i} in '{text}'"))?
                .parse()
                .with_context(|| format!("bad argument {i} in '{text}'"))
        };
        match kind {
            "cycle" => Ok(InstanceSpec::Cycle(num(0)?)),
            "path" => Ok(InstanceSpec::Path(num(0)?)),
            "matching" => Ok(InstanceSpec::Matching(num(0)?)),
            "kneser" => Ok(InstanceSpec::Kneser(num(0)?, num(1)?)),
            "mycielski" => Ok(InstanceSpec::Mycielski(num(0)?)),
            "gnp" => {
                let p = parse_rational(args.get(1).ok_or_else(|| anyhow!("missing p"))?)?;
                let seed: u64 = args
                    .get(2)
                    .ok_or_else(|| anyhow!("missing seed"))?
                    .parse()
                    .context("bad seed")?;
                Ok(InstanceSpec::Gnp { n: num(0)?, p, seed })
            }
            "girth" => {
                let seed: u64 = args
                    .get(3)
                    .ok_or_else(|| anyhow!("missing seed"))?
                    .parse()
                    .context("bad seed")?;
                Ok(InstanceSpec::Girth {
                    n: num(0)?,
                    target_degree: num(1)?,
                    girth: num(2)?,
                    seed,
                })
            }
            other => bail!("unknown generator '{other}'"),
        }
    }
}

impl InstanceSpec {
    /// Replaces the seed of seeded generators (no effect on the rest).
    pub fn with_seed(mut self, seed: u64) -> Self {
        match &mut self {
            InstanceSpec::Gnp { seed: s, .. } | InstanceSpec::Girth { seed: s, .. } => *s = seed,
            _ => {}
        }
        self
    }
}

/// Builds the graph for a spec. Same spec, same graph.
pub fn generate(spec: &InstanceSpec) -> Result<Graph> {
    match spec {
        InstanceSpec::Cycle(n) => {
            if *n < 3 {
                bail!("cycle needs n >= 3");
            }
            let edges: Vec<_> = (0..*n).map(|i| (i, (i + 1) % n)).collect();
            Ok(Graph::build(*n, &edges)?)
        }
        InstanceSpec::Path(n) => {
            if *n < 1 {
                bail!("path needs n >= 1");
            }
            let edges: Vec<_> = (1..*n).map(|i| (i - 1, i)).collect();
            Ok(Graph::build(*n, &edges)?)
        }
        InstanceSpec::Matching(n) => {
            if *n < 2 || n % 2 != 0 {
                bail!("matching needs an even n >= 2");
            }
            let edges: Vec<_> = (0..n / 2).map(|i| (2 * i, 2 * i + 1)).collect();
            Ok(Graph::build(*n, &edges)?)
        }
        InstanceSpec::Kneser(n, k) => kneser(*n, *k),
        InstanceSpec::Mycielski(depth) => mycielski(*depth),
        InstanceSpec::Gnp { n, p, seed } => gnp(*n, p, *seed),
        InstanceSpec::Girth {
            n,
            target_degree,
            girth,
            seed,
        } => girth_filtered(*n, *target_degree, *girth, *seed),
    }
}

/// Kneser graph K(n, k): vertices are the k-subsets of {0..n-1} in
/// lexicographic order, adjacent iff disjoint. K(5,2) is the Petersen graph.
fn kneser(n: usize, k: usize) -> Result<Graph> {
    if k == 0 || k > n {
        bail!("kneser needs 1 <= k <= n");
    }
    let mut subsets: Vec<u64> = Vec::new();
    fn rec(start: usize, n: usize, left: usize, cur: u64, out: &mut Vec<u64>) {
        if left == 0 {
            out.push(cur);
            return;
        }
        for i in start..n {
            rec(i + 1, n, left - 1, cur | (1 << i), out);
        }
    }
    rec(0, n, k, 0, &mut subsets);
    if subsets.len() > 1000 {
        bail!("kneser instance too large ({} vertices)", subsets.len());
    }
    let mut edges = Vec::new();
    for i in 0..subsets.len() {
        for j in (i + 1)..subsets.len() {
            if subsets[i] & subsets[j] == 0 {
                edges.push((i, j));
            }
        }
    }
    Ok(Graph::build(subsets.len(), &edges)?)
}

/// Iterated Mycielskian starting from K2: depth 1 is K2, depth 2 is C5,
/// depth 3 is the Grötzsch graph. Triangle-free at every depth.
fn mycielski(depth: usize) -> Result<Graph> {
    if depth < 1 {
        bail!("mycielski needs depth >= 1");
    }
    if depth > 6 {
        bail!("mycielski depth > 6 exceeds desk scale");
    }
    let mut g = Graph::build(2, &[(0, 1)])?;
    for _ in 1..depth {
        let n = g.n();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for u in g.vertices() {
            for v in g.neighbours(u).iter() {
                if u < v {
                    edges.push((u, v)); // original copy
                }
                edges.push((n + u, v)); // shadow u_i sees N(v_i)
            }
        }
        let z = 2 * n;
        for u in 0..n {
            edges.push((n + u, z));
        }
        g = Graph::build(2 * n + 1, &edges)?;
    }
    Ok(g)
}

/// G(n, p) with an exact rational threshold on the raw 64-bit draws, taken
/// in lexicographic pair order.
fn gnp(n: usize, p: &Rational, seed: u64) -> Result<Graph> {
    use num_traits::{One, Signed, ToPrimitive};
    if p.is_negative() || p > &Rational::one() {
        bail!("p must lie in [0, 1]");
    }
    // threshold = floor(p · 2^64); draw < threshold means "edge"
    let scaled = p * Rational::from_integer(Int::one() << 64);
    let threshold: u128 = scaled.floor().to_integer().to_u128().unwrap_or(u128::MAX);
    let mut rng = XorShift64::new(seed);
    let mut edges = Vec::new();
    // p = 1 gives threshold 2^64, above any u64 draw
    for i in 0..n {
        for j in (i + 1)..n {
            if (rng.next_u64() as u128) < threshold {
                edges.push((i, j));
            }
        }
    }
    Ok(Graph::build(n, &edges)?)
}

/// Samples G(n, p) with `p = target_degree/(n-1)`, then deletes edges lying
/// on short cycles (in lexicographic order) until the girth is at least `g`.
fn girth_filtered(n: usize, target_degree: usize, girth: usize, seed: u64) -> Result<Graph> {
    if n < 2 || girth < 3 {
        bail!("girth generator needs n >= 2 and girth >= 3");
    }
    let p = Rational::new(Int::from(target_degree), Int::from(n - 1));
    let p = p.min(Rational::from_integer(Int::from(1)));
    let base = gnp(n, &p, seed)?;
    let mut adj: Vec<Vec<bool>> = vec![vec![false; n]; n];
    for u in base.vertices() {
        for v in base.neighbours(u).iter() {
            adj[u][v] = true;
        }
    }
    loop {
        match find_short_cycle_edge(&adj, n, girth) {
            Some((u, v)) => {
                adj[u][v] = false;
                adj[v][u] = false;
            }
            None => break,
        }
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if adj[u][v] {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::build(n, &edges)?)
}

/// First edge (lexicographic) lying on a cycle shorter than `girth`:
/// the edge `(u,v)` does iff `dist(u, v) ≤ girth - 2` with the edge removed.
fn find_short_cycle_edge(adj: &[Vec<bool>], n: usize, girth: usize) -> Option<(usize, usize)> {
    for u in 0..n {
        for v in (u + 1)..n {
            if !adj[u][v] {
                continue;
            }
            // BFS from u to v avoiding the edge (u,v)
            let mut dist = vec![usize::MAX; n];
            dist[u] = 0;
            let mut queue = std::collections::VecDeque::from([u]);
            while let Some(x) = queue.pop_front() {
                if dist[x] + 1 > girth - 2 {
                    continue;
                }
                for (y, &is_adj) in adj[x].iter().enumerate() {
                    if !is_adj || (x == u && y == v) || (x == v && y == u) {
                        continue;
                    }
                    if dist[y] == usize::MAX {
                        dist[y] = dist[x] + 1;
                        queue.push_back(y);
                    }
                }
            }
            if dist[v] <= girth.saturating_sub(2) {
                return Some((u, v));
            }
        }
    }
    None
}

/// Weight specs: `uniform` or `random:SEED` (per-vertex rationals with
/// numerator in 1..=100 and denominator in 1..=10).
pub fn parse_weights(text: &str, n: usize) -> Result<tkfree::Weighting> {
    if text == "uniform" {
        return Ok(tkfree::Weighting::uniform(n));
    }
    if let Some(seed) = text.strip_prefix("random:") {
        let seed: u64 = seed.parse().context("bad weight seed")?;
        let mut rng = XorShift64::new(seed);
        let ws: Vec<Rational> = (0..n)
            .map(|_| {
                let num = 1 + rng.below(100) as i64;
                let den = 1 + rng.below(10) as i64;
                Rational::new(Int::from(num), Int::from(den))
            })
            .collect();
        return Ok(tkfree::Weighting::new(ws)?);
    }
    bail!("unknown weight spec '{text}' (expected 'uniform' or 'random:SEED')")
}
