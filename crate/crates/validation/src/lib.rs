//! Helpers shared by the acceptance suite: random root sets, root-set
//! matching and a small verdict printer.

use std::time::Duration;

use num_complex::Complex64;
use rand::Rng;

/// `pairs` conjugate pairs with moduli uniform in `[lo, hi)` and angles in
/// `(0.05, pi - 0.05)`.
pub fn conjugate_roots<R: Rng>(rng: &mut R, pairs: usize, lo: f64, hi: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(2 * pairs);
    for _ in 0..pairs {
        let z = Complex64::from_polar(rng.random_range(lo..hi), rng.random_range(0.05..std::f64::consts::PI - 0.05));
        out.push(z);
        out.push(z.conj());
    }
    out
}

pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, h) in b.iter().enumerate() {
            y[i + j] += x * h;
        }
    }
    y
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Whether a one-to-one assignment of `found` to `truth` exists in which
/// every pair differs by at most `tol` relative to the true root.
pub fn roots_match(found: &[Complex64], truth: &[Complex64], tol: f64) -> bool {
    if found.len() != truth.len() {
        return false;
    }
    let adj: Vec<Vec<usize>> = truth
        .iter()
        .map(|t| (0..found.len()).filter(|&j| rel(found[j], *t) <= tol).collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; found.len()];
    for i in 0..truth.len() {
        let mut seen = vec![false; found.len()];
        if !augment(i, &adj, &mut owner, &mut seen) {
            return false;
        }
    }
    true
}

fn augment(i: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &j in &adj[i] {
        if seen[j] {
            continue;
        }
        seen[j] = true;
        if owner[j].is_none_or(|k| augment(k, adj, owner, seen)) {
            owner[j] = Some(i);
            return true;
        }
    }
    false
}

/// Largest relative error of a greedy nearest-first pairing; an upper bound
/// on the best achievable worst-case error.
pub fn greedy_match_error(found: &[Complex64], truth: &[Complex64]) -> f64 {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(found.len() * truth.len());
    for (i, t) in truth.iter().enumerate() {
        for (j, f) in found.iter().enumerate() {
            pairs.push((rel(*f, *t), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut ti, mut fj) = (vec![false; truth.len()], vec![false; found.len()]);
    let mut worst: f64 = 0.0;
    for (d, i, j) in pairs {
        if !ti[i] && !fj[j] {
            ti[i] = true;
            fj[j] = true;
            worst = worst.max(d);
        }
    }
    worst
}

/// Pass/fail tally for a run of numbered criteria.
#[derive(Debug, Default)]
pub struct Verdicts {
    failed: Vec<usize>,
    total: usize,
}

impl Verdicts {
    pub fn record(&mut self, id: usize, title: &str, pass: bool, elapsed: Duration, detail: &str) {
        self.total += 1;
        if !pass {
            self.failed.push(id);
        }
        println!(
            "criterion {id:>2} {title:<28} {} ({:.1} s) {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }

    pub fn failed(&self) -> &[usize] {
        &self.failed
    }

    pub fn total(&self) -> usize {
        self.total
    }
}
