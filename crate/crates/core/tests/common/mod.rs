//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Tenth generation of the incremental reflection rule from seed `AB`,
/// reflection markers removed.
pub const TENTH_GENERATION: &str = concat!(
    "AB",
    "BA",
    "ABB",
    "BBAA",
    "AABBB",
    "BBBAAA",
    "AAABBBB",
    "BBBBAAAA",
    "AAAABBBBB",
    "BBBBBAAAAA",
    "AAAAABBBBBB",
    "BBBBBBAAAAAA",
    "AAAAAABBBBBBB",
);

/// Number of eigenvalues of the tridiagonal `(d, e)` strictly below `x`.
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let coupling = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
        q = d[i] - x - if i == 0 { 0.0 } else { coupling / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues by bisection on the Sturm count, ascending.
pub fn bisection_eigenvalues(d: &[f64], e: &[f64], tol: f64) -> Vec<f64> {
    let n = d.len();
    let radius = (0..n)
        .map(|i| {
            let l = if i > 0 { e[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < n { e[i].abs() } else { 0.0 };
            (d[i] - l - r, d[i] + l + r)
        })
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (x, y)| {
            (a.min(x), b.max(y))
        });
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (radius.0 - 1.0, radius.1 + 1.0);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if sturm_count(d, e, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

pub fn random_tridiagonal(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let d = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let e = (0..n.saturating_sub(1))
        .map(|_| rng.gen_range(-2.0..2.0))
        .collect();
    (d, e)
}

/// `2t cos(mπ/(N+1))`, ascending.
pub fn uniform_chain_levels(n: usize, eps: f64, t: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (1..=n)
        .map(|m| eps + 2.0 * t * (m as f64 * PI / (n as f64 + 1.0)).cos())
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// IPR of the `m`-th standing wave of an open uniform chain, summed site by site.
pub fn standing_wave_ipr(n: usize, m: usize) -> f64 {
    let norm = 2.0 / (n as f64 + 1.0);
    (1..=n)
        .map(|j| {
            let s = (j as f64 * m as f64 * PI / (n as f64 + 1.0)).sin();
            norm * norm * s.powi(4)
        })
        .sum()
}

/// Coincident resonator modes by exhaustive pairwise comparison of the
/// phases `m/(n+1)` via cross-multiplication. Sizes `2, 4, ..., 2l`; returns
/// groups of two or more sorted `(size, mode)` pairs.
pub fn brute_force_degenerate_groups(l: usize) -> Vec<Vec<(usize, usize)>> {
    let modes: Vec<(usize, usize)> = (1..=l)
        .flat_map(|k| (1..=2 * k).map(move |m| (2 * k, m)))
        .collect();
    let mut parent: Vec<usize> = (0..modes.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..modes.len() {
        for j in i + 1..modes.len() {
            let (ni, mi) = modes[i];
            let (nj, mj) = modes[j];
            if mi * (nj + 1) == mj * (ni + 1) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[b] = a;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for i in 0..modes.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(modes[i]);
    }
    let mut out: Vec<Vec<(usize, usize)>> = groups
        .into_values()
        .filter(|g| g.len() > 1)
        .map(|mut g| {
            g.sort_unstable();
            g
        })
        .collect();
    out.sort();
    out
}
