//! Reference implementations written independently of the library's
//! Dijkstra table and recursive matcher.

#![allow(dead_code)]

use promatch::noise::{inject_k_errors, rng_from_seed, sample_iid, syndrome_from_errors, trial_seed};
use promatch::{DetectorGraph, Syndrome};

/// Detector-to-detector distances by Floyd-Warshall (boundary never used
/// as an intermediate) plus detector-to-boundary distances.
pub struct Distances {
    pub n: usize,
    pub d: Vec<f64>,
    pub b: Vec<f64>,
}

impl Distances {
    pub fn of(g: &DetectorGraph) -> Self {
        let n = g.num_detectors();
        let mut d = vec![f64::INFINITY; n * n];
        for i in 0..n {
            d[i * n + i] = 0.0;
        }
        let mut direct_b = vec![f64::INFINITY; n];
        for e in g.edges() {
            if g.is_boundary(e.v) {
                direct_b[e.u] = direct_b[e.u].min(e.weight);
            } else {
                let (u, v) = (e.u, e.v);
                d[u * n + v] = d[u * n + v].min(e.weight);
                d[v * n + u] = d[v * n + u].min(e.weight);
            }
        }
        for k in 0..n {
            for i in 0..n {
                let dik = d[i * n + k];
                if dik.is_infinite() {
                    continue;
                }
                for j in 0..n {
                    let via = dik + d[k * n + j];
                    if via < d[i * n + j] {
                        d[i * n + j] = via;
                    }
                }
            }
        }
        let b = (0..n).map(|i| (0..n).map(|u| d[i * n + u] + direct_b[u]).fold(f64::INFINITY, f64::min)).collect();
        Self { n, d, b }
    }

    pub fn w(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
}

/// Canonical matching description: `(smaller node, partner)` sorted by the
/// first entry, partner `usize::MAX` for the boundary.
pub type Canon = Vec<(usize, usize)>;

pub const B: usize = usize::MAX;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// Minimum over every ordering of `nodes`: consecutive entries are paired
/// directly or both sent to the boundary, an odd leftover goes to the
/// boundary. Among optima returns the smallest canonical list.
pub fn permutation_matcher(nodes: &[usize], w: impl Fn(usize, usize) -> f64, b: impl Fn(usize) -> f64) -> (f64, Canon) {
    let mut perm: Vec<usize> = nodes.to_vec();
    perm.sort_unstable();
    let mut best: Option<(f64, Canon)> = None;
    loop {
        let mut total = 0.0;
        let mut canon: Canon = Vec::new();
        let mut k = 0;
        while k + 1 < perm.len() {
            let (x, y) = (perm[k].min(perm[k + 1]), perm[k].max(perm[k + 1]));
            let direct = w(x, y);
            let both = b(x) + b(y);
            if direct <= both {
                total += direct;
                canon.push((x, y));
            } else {
                total += both;
                canon.push((x, B));
                canon.push((y, B));
            }
            k += 2;
        }
        if k < perm.len() {
            total += b(perm[k]);
            canon.push((perm[k], B));
        }
        canon.sort_unstable();
        best = match best {
            None => Some((total, canon)),
            Some((bw, bc)) => {
                if close(total, bw) {
                    Some((bw.min(total), bc.min(canon)))
                } else if total < bw {
                    Some((total, canon))
                } else {
                    Some((bw, bc))
                }
            }
        };
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.unwrap_or((0.0, Vec::new()))
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Minimum matching weight by dynamic programming over subsets.
pub fn subset_dp(nodes: &[usize], w: impl Fn(usize, usize) -> f64, b: impl Fn(usize) -> f64) -> f64 {
    let m = nodes.len();
    let full = 1usize << m;
    let mut dp = vec![f64::INFINITY; full];
    dp[0] = 0.0;
    for mask in 1..full {
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut best = b(nodes[i]) + dp[rest];
        let mut r = rest;
        while r != 0 {
            let j = r.trailing_zeros() as usize;
            r &= r - 1;
            best = best.min(w(nodes[i], nodes[j]) + dp[rest & !(1 << j)]);
        }
        dp[mask] = best;
    }
    dp[full - 1]
}

/// Canonical list of a library matching.
pub fn canon_of(pairs: &[(usize, usize)], boundary: &[usize]) -> Canon {
    let mut c: Canon = pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    c.extend(boundary.iter().map(|&a| (a, B)));
    c.sort_unstable();
    c
}

/// I.i.d. syndromes with `1..=max_hw` flipped detectors.
pub fn iid_syndromes(g: &DetectorGraph, p: f64, seed: u64, count: usize, max_hw: usize) -> Vec<Syndrome> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let mut rng = rng_from_seed(trial_seed(seed, i));
        i += 1;
        let s = syndrome_from_errors(g, &sample_iid(g, Some(p), &mut rng).unwrap()).unwrap();
        if !s.is_empty() && s.hamming_weight() <= max_hw {
            out.push(s);
        }
    }
    out
}

/// Syndromes from `k` injected errors with Hamming weight in `range`.
pub fn injected_syndromes(
    g: &DetectorGraph,
    k: impl Fn(u64) -> usize,
    seed: u64,
    count: usize,
    range: std::ops::RangeInclusive<usize>,
) -> Vec<Syndrome> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let mut rng = rng_from_seed(trial_seed(seed, i));
        let errs = inject_k_errors(g, k(i), &mut rng).unwrap();
        i += 1;
        let s = syndrome_from_errors(g, &errs).unwrap();
        if range.contains(&s.hamming_weight()) {
            out.push(s);
        }
    }
    out
}

/// Detector neighbours of `node` (boundary excluded).
pub fn neighbours(g: &DetectorGraph, node: usize) -> Vec<usize> {
    let mut out: Vec<usize> =
        g.incident(node).iter().map(|&e| g.edge(e).other(node)).filter(|&n| !g.is_boundary(n)).collect();
    out.sort_unstable();
    out.dedup();
    out
}
