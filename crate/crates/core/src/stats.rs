//! Monte Carlo statistics: log-space moments, bootstrap and jackknife
//! resampling, exact binomial (Clopper-Pearson) envelopes, KS distances and
//! least-squares fits.

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Purpose};
use crate::special::inv_reg_inc_beta;
use rand::RngExt;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Two-pass (mean, population variance).
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
    (m, v)
}

pub fn logsumexp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let mx = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if !mx.is_finite() {
        return mx;
    }
    mx + xs.map(|x| (x - mx).exp()).sum::<f64>().ln()
}

/// `(1/p) * ln( mean_i exp(p * log_xs[i]) )`, the log of the p-th power mean,
/// computed stably in log space. `p = 0` returns the log-mean `mean(log_xs)`.
pub fn log_power_mean(log_xs: &[f64], p: f64) -> f64 {
    if p == 0.0 {
        return mean(log_xs);
    }
    (logsumexp(log_xs.iter().map(|&l| p * l)) - (log_xs.len() as f64).ln()) / p
}

/// Percentile bootstrap over item indices with a fixed resampling seed.
/// Returns (lo, hi, se) of the statistic at the given confidence level.
pub fn bootstrap_ci(
    n_items: usize,
    replicates: usize,
    seed: u64,
    confidence: f64,
    stat: impl Fn(&[usize]) -> f64,
) -> (f64, f64, f64) {
    let mut vals = Vec::with_capacity(replicates);
    let mut idx = vec![0usize; n_items];
    for rep in 0..replicates {
        let mut rng = stream_rng(seed, Purpose::Bootstrap, rep as u64);
        for slot in idx.iter_mut() {
            *slot = (rng.random::<u64>() % n_items as u64) as usize;
        }
        vals.push(stat(&idx));
    }
    vals.sort_by(f64::total_cmp);
    let alpha = 1.0 - confidence;
    let lo = vals[((alpha / 2.0) * replicates as f64) as usize];
    let hi = vals[(((1.0 - alpha / 2.0) * replicates as f64) as usize).min(replicates - 1)];
    let (_, v) = mean_var(&vals);
    (lo, hi, v.sqrt())
}

/// Delete-one-block jackknife standard error.
pub fn jackknife_block_se(n_items: usize, blocks: usize, stat: impl Fn(&dyn Fn(usize) -> bool) -> f64) -> f64 {
    let b = blocks.min(n_items);
    let mut leave_outs = Vec::with_capacity(b);
    for j in 0..b {
        let lo = j * n_items / b;
        let hi = (j + 1) * n_items / b;
        let keep = move |i: usize| i < lo || i >= hi;
        leave_outs.push(stat(&keep));
    }
    let (m, v) = mean_var(&leave_outs);
    let _ = m;
    ((b - 1) as f64 * v).sqrt()
}

/// Exact two-sided Clopper-Pearson interval for `k` successes out of `n`.
pub fn clopper_pearson(k: u64, n: u64, confidence: f64) -> (f64, f64) {
    assert!(k <= n && n > 0);
    let alpha = 1.0 - confidence;
    let lo = if k == 0 {
        0.0
    } else {
        inv_reg_inc_beta(k as f64, (n - k + 1) as f64, alpha / 2.0).unwrap()
    };
    let hi = if k == n {
        1.0
    } else {
        inv_reg_inc_beta((k + 1) as f64, (n - k) as f64, 1.0 - alpha / 2.0).unwrap()
    };
    (lo, hi)
}

/// One-sample KS statistic against a CDF.
pub fn ks_one_sample(data: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    data.sort_by(f64::total_cmp);
    let n = data.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in data.iter().enumerate() {
        let c = cdf(x);
        d = d.max((c - i as f64 / n).abs()).max(((i + 1) as f64 / n - c).abs());
    }
    d
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0_f64;
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    d
}

/// Critical KS distance at significance `alpha` (asymptotic), one-sample.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Ordinary least squares of y on x: returns (slope, intercept).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Invalid("linear_fit needs >= 2 points".into()));
    }
    let (mx, vx) = mean_var(xs);
    if vx == 0.0 {
        return Err(Error::Invalid("degenerate abscissae in linear_fit".into()));
    }
    let my = mean(ys);
    let cov = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum::<f64>() / xs.len() as f64;
    let slope = cov / vx;
    Ok((slope, my - slope * mx))
}
