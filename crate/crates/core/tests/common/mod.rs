//! Independent oracles and instance generators shared by the integration tests.
#![allow(dead_code)]

use mpcc_dlt::mpcc::{child_cost, NormalizedPlatform};
use rand::Rng;

/// Minimizes `T` over `alpha_0..alpha_N >= 0`, `sum alpha = 1 - f` subject to
/// `(f + alpha_0) w0 <= T` and `alpha_i c_i <= T` by enumerating LP vertices.
/// Exponential in `N`; meant for `N <= 4`.
pub fn lp_makespan(w0: f64, costs: &[f64], f: f64) -> f64 {
    let n = costs.len();
    let vars = n + 2; // alpha_0..alpha_N, T
                      // inequality rows as (coefficients, rhs) meaning a.x <= b
    let mut ineq: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut row = vec![0.0; vars];
    row[0] = w0;
    row[vars - 1] = -1.0;
    ineq.push((row, -f * w0));
    for (i, &c) in costs.iter().enumerate() {
        let mut row = vec![0.0; vars];
        row[i + 1] = c;
        row[vars - 1] = -1.0;
        ineq.push((row, 0.0));
    }
    for i in 0..=n {
        let mut row = vec![0.0; vars];
        row[i] = -1.0;
        ineq.push((row, 0.0));
    }
    let mut eq = vec![1.0; vars];
    eq[vars - 1] = 0.0;
    let eq_rhs = 1.0 - f;

    let mut best = f64::INFINITY;
    for subset in subsets(ineq.len(), vars - 1) {
        let mut a: Vec<Vec<f64>> = subset.iter().map(|&k| ineq[k].0.clone()).collect();
        let mut b: Vec<f64> = subset.iter().map(|&k| ineq[k].1).collect();
        a.push(eq.clone());
        b.push(eq_rhs);
        let Some(x) = solve(a, b) else { continue };
        let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let feasible = ineq.iter().all(|(r, rhs)| dot(r, &x) <= rhs + 1e-12 * scale);
        if feasible {
            best = best.min(x[vars - 1]);
        }
    }
    best
}

/// Same LP for a platform and task.
pub fn lp_makespan_for(platform: &NormalizedPlatform, f: f64, beta: f64) -> f64 {
    let costs: Vec<f64> = platform
        .children()
        .iter()
        .map(|c| child_cost(c.w, c.z, beta).unwrap())
        .collect();
    lp_makespan(platform.w0(), &costs, f)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` for singular systems.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let m = a[r][col] / a[col][col];
            let pivot_row = a[col].clone();
            for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= m * p;
            }
            b[r] -= m * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Smallest subset size whose contributions reach `delta`, by trying every subset.
/// `None` if even all of them fall short.
pub fn exhaustive_n_min(g: &[f64], delta: f64) -> Option<usize> {
    if delta <= 0.0 {
        return Some(0);
    }
    let n = g.len();
    assert!(n <= 20, "exhaustive search limited to 20 children");
    (1u32..1 << n)
        .filter(|mask| {
            let s: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| g[i]).sum();
            s >= delta
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
}

/// Kolmogorov–Smirnov statistic of `samples` against the CDF `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic one-sample KS critical value at significance 0.01.
pub fn ks_critical_01(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Random platform with `w`, `z` drawn from the sampled-cluster ranges.
pub fn random_platform<R: Rng>(rng: &mut R, n: usize) -> NormalizedPlatform {
    let w0 = rng.random_range(0.02..0.08);
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.random_range(0.02..0.08), rng.random_range(0.01..0.06)))
        .collect();
    NormalizedPlatform::from_pairs(w0, &pairs).unwrap()
}
