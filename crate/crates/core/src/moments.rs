//! Moment-ratio and tail curves of `|Y|`, the projection identity over Haar
//! frames, the entropy decomposition, conversions between moments and
//! tails, thin-shell scans, deviation-form fits, and the isoperimetric
//! diagnostic.
//!
//! All tail assertions run against exact binomial (Clopper-Pearson)
//! envelopes so Monte Carlo noise cannot produce false passes; moments are
//! computed in log space throughout.

use crate::distributions::{
    apply_linear, convolve_gaussian, make_density, sample_norms, Family, LinearMap, SampleBatch,
};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Purpose};
use crate::rotations::haar_rotation;
use crate::special::log_gamma;
use crate::stats::{
    clopper_pearson, jackknife_block_se, linear_fit, log_power_mean, mean, mean_var,
};
use rand::RngExt;
use rayon::prelude::*;
use serde::Serialize;

const BOOTSTRAP_REPS: usize = 200;
const GEMM_CHUNK_ROWS: usize = 4096;

/// Normalized moment curve: `(E|Y|^p)^{1/p} / (E|Y|^2)^{1/2}` per p, with
/// `p = 0` read as `exp(E log|Y|) / (E|Y|^2)^{1/2}`.
#[derive(Debug, Clone, Serialize)]
pub struct MomentCurve {
    pub p_grid: Vec<f64>,
    pub ratio: Vec<f64>,
    /// percentile bootstrap intervals (2.5%, 97.5%)
    pub ci: Vec<(f64, f64)>,
    pub dim: usize,
    pub n_bar: f64,
    pub alpha: f64,
    pub n_samples: usize,
}

pub fn moment_ratio_curve(
    norms: &[f64],
    dim: usize,
    p_grid: &[f64],
    n_bar: f64,
    alpha: f64,
    seed: u64,
) -> Result<MomentCurve> {
    if p_grid.is_empty() {
        return Err(Error::EmptyGrid("p_grid"));
    }
    let min_p = -(dim as f64) + 1.0;
    for &p in p_grid {
        if p <= min_p {
            return Err(Error::MomentOrderOutOfRange { p, min_p });
        }
        if p < 0.0 && norms.contains(&0.0) {
            return Err(Error::ZeroNormSample);
        }
    }
    let logs: Vec<f64> = norms.iter().map(|&r| r.max(1e-300).ln()).collect();
    let base2 = log_power_mean(&logs, 2.0);
    let ratio: Vec<f64> =
        p_grid.iter().map(|&p| (log_power_mean(&logs, p) - base2).exp()).collect();
    // percentile bootstrap, resampling rows once per replicate for all p
    let n = logs.len();
    let mut reps: Vec<Vec<f64>> = (0..BOOTSTRAP_REPS)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(seed, Purpose::Bootstrap, rep as u64);
            let mut ls = Vec::with_capacity(n);
            for _ in 0..n {
                ls.push(logs[(rng.random::<u64>() % n as u64) as usize]);
            }
            let b2 = log_power_mean(&ls, 2.0);
            p_grid.iter().map(|&p| (log_power_mean(&ls, p) - b2).exp()).collect()
        })
        .collect();
    let mut ci = Vec::with_capacity(p_grid.len());
    for pi in 0..p_grid.len() {
        let mut vals: Vec<f64> = reps.iter().map(|r| r[pi]).collect();
        vals.sort_by(f64::total_cmp);
        let lo = vals[(0.025 * BOOTSTRAP_REPS as f64) as usize];
        let hi = vals[((0.975 * BOOTSTRAP_REPS as f64) as usize).min(BOOTSTRAP_REPS - 1)];
        ci.push((lo, hi));
    }
    reps.clear();
    Ok(MomentCurve { p_grid: p_grid.to_vec(), ratio, ci, dim, n_bar, alpha, n_samples: n })
}

/// One tail point: exact-binomial envelopes at confidence 0.99.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailPoint {
    pub t: f64,
    pub upper_count: u64,
    pub lower_count: u64,
    pub upper_hat: f64,
    pub upper_lo: f64,
    pub upper_hi: f64,
    pub lower_hat: f64,
    pub lower_lo: f64,
    pub lower_hi: f64,
    pub two_sided_hat: f64,
    pub two_sided_hi: f64,
    pub two_sided_lo: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailCurve {
    pub points: Vec<TailPoint>,
    pub n_samples: usize,
    pub sqrt_n: f64,
}

/// Empirical `P(|Y| >= (1+t) sqrt n)` and `P(|Y| <= (1-t) sqrt n)` with
/// Clopper-Pearson 99% envelopes.
pub fn tail_curve(norms: &[f64], sqrt_n: f64, t_grid: &[f64]) -> Result<TailCurve> {
    if norms.len() < 10_000 {
        return Err(Error::Invalid(format!("tail curve needs N >= 10^4, got {}", norms.len())));
    }
    if t_grid.is_empty() {
        return Err(Error::EmptyGrid("t_grid"));
    }
    let n = norms.len() as u64;
    let mut points = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let up = norms.iter().filter(|&&r| r >= (1.0 + t) * sqrt_n).count() as u64;
        let lo = norms.iter().filter(|&&r| r <= (1.0 - t) * sqrt_n).count() as u64;
        let (ulo, uhi) = clopper_pearson(up, n, 0.99);
        let (llo, lhi) = clopper_pearson(lo, n, 0.99);
        let two = (up + lo).min(n);
        let (tlo, thi) = clopper_pearson(two, n, 0.99);
        points.push(TailPoint {
            t,
            upper_count: up,
            lower_count: lo,
            upper_hat: up as f64 / n as f64,
            upper_lo: ulo,
            upper_hi: uhi,
            lower_hat: lo as f64 / n as f64,
            lower_lo: llo,
            lower_hi: lhi,
            two_sided_hat: two as f64 / n as f64,
            two_sided_hi: thi,
            two_sided_lo: tlo,
        });
    }
    Ok(TailCurve { points, n_samples: norms.len(), sqrt_n })
}

/// Fitted deviation form: conservative envelope
/// `-log P(| |Y| - sqrt n | >= t sqrt n) >= c * n_bar^{alpha/2} min(t^{2+alpha}, t) - log C`
/// with `c` from least squares on informative points and `C` shifted so all
/// residuals are one-sided.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub form: String,
    pub c: f64,
    pub big_c: f64,
    pub residual_sup: f64,
    pub informative_points: usize,
    pub pass: bool,
}

pub fn fit_deviation_form(curve: &TailCurve, n_bar: f64, alpha: f64) -> Result<FitReport> {
    let n = curve.n_samples as f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for pt in &curve.points {
        let p_hat = pt.two_sided_hat;
        if p_hat < 10.0 / n || p_hat > 1.0 - 10.0 / n || pt.t <= 0.0 {
            continue;
        }
        xs.push(n_bar.powf(alpha / 2.0) * pt.t.powf(2.0 + alpha).min(pt.t));
        ys.push(-pt.two_sided_hi.ln());
    }
    if xs.len() < 5 {
        return Err(Error::NoInformativePoints);
    }
    let (c, _) = linear_fit(&xs, &ys)?;
    let b = xs.iter().zip(&ys).map(|(&x, &y)| y - c * x).fold(f64::INFINITY, f64::min);
    let residual_sup =
        xs.iter().zip(&ys).map(|(&x, &y)| y - (c * x + b)).fold(0.0_f64, f64::max);
    Ok(FitReport {
        form: format!("-log P >= c * n_bar^(alpha/2) min(t^(2+alpha), t) - log C, alpha = {alpha}"),
        c,
        big_c: (-b).exp(),
        residual_sup,
        informative_points: xs.len(),
        pass: c > 0.0,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThinShellRow {
    pub n: usize,
    pub e_norm: f64,
    pub sd_norm: f64,
    pub sd_se: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThinShellScan {
    pub family: String,
    pub rows: Vec<ThinShellRow>,
    /// max over n of sd / n^{1/3}
    pub fitted_c: f64,
    /// slope of log sd against log n
    pub slope: f64,
}

/// Per-dimension thin-shell widths `sqrt(Var|X|)` with jackknife standard
/// errors, the fitted constant against the `n^{1/3}` envelope, and the
/// log-log slope.
pub fn thin_shell_scan(
    family: Family,
    n_grid: &[usize],
    n_samples: usize,
    seed: u64,
) -> Result<ThinShellScan> {
    if n_grid.is_empty() {
        return Err(Error::EmptyGrid("n_grid"));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    for (gi, &n) in n_grid.iter().enumerate() {
        let spec = make_density(family, n, &[])?;
        let norms = sample_norms(&spec, n_samples, seed.wrapping_add(gi as u64));
        let (m, v) = mean_var(&norms);
        let sd_se = jackknife_block_se(norms.len(), 50, |keep| {
            let kept: Vec<f64> =
                norms.iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, &x)| x).collect();
            let (_, vv) = mean_var(&kept);
            vv.sqrt()
        });
        rows.push(ThinShellRow { n, e_norm: m, sd_norm: v.sqrt(), sd_se });
    }
    let fitted_c = rows
        .iter()
        .map(|r| r.sd_norm / (r.n as f64).powf(1.0 / 3.0))
        .fold(0.0_f64, f64::max);
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.sd_norm.ln()).collect();
    let (slope, _) = linear_fit(&xs, &ys)?;
    Ok(ThinShellScan { family: family.name().into(), rows, fitted_c, slope })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailSide {
    Upper,
    Lower,
}

/// Markov bound on the tail from the moment curve: for the upper tail the
/// best `(1 + t/3)^{-p}` over p with ratio(p) <= 1 + t/2; for the lower
/// tail the best `(1 - t/2)^{|p|}` over negative p with ratio(p) >= 1 - t/2.
pub fn tail_from_moments(curve: &MomentCurve, t: f64, side: TailSide) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::Invalid("tail bound needs t > 0".into()));
    }
    let mut best = f64::INFINITY;
    for (&p, &r) in curve.p_grid.iter().zip(&curve.ratio) {
        match side {
            TailSide::Upper => {
                // p = 2 is the normalization moment and carries no tail
                // information; the mechanism needs a strictly higher moment
                if p > 2.0 && r <= 1.0 + t / 2.0 {
                    best = best.min((1.0 + t / 3.0).powf(-p));
                }
            }
            TailSide::Lower => {
                if p < 0.0 && r >= 1.0 - t / 2.0 && t < 2.0 {
                    best = best.min((1.0 - t / 2.0).powf(-p));
                }
            }
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::NoAdmissiblePower { t })
    }
}

/// Upper bound on `(E Z^{-2p})^{1/(2p)}`, `Z = |Y|/sqrt(n)`, from the tail
/// curve via the integration-by-parts decomposition
/// `E Z^{-2p} = 1 + p int_0^1 P(Z^2 <= 1-s)((1-s)^{-(p+1)} - 1) ds`
/// `          + p int_0^inf P(Z^2 >= 1+s)(1 - (1+s)^{-(p+1)}) ds`,
/// with step Clopper-Pearson envelopes on both probabilities. Below half
/// the deepest covered radius the envelope is extrapolated with the
/// dimension-order polynomial decay of the small-ball probability; the
/// crossover segment must stay below 10% of the total or the resolution is
/// declared insufficient.
pub fn moments_from_tail(curve: &TailCurve, p: f64, dim: usize) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::MomentOrderOutOfRange { p, min_p: 1.0 });
    }
    if (dim as f64) < 2.0 * p + 2.0 {
        return Err(Error::InsufficientTailResolution { p });
    }
    let mut pts: Vec<&TailPoint> = curve.points.iter().collect();
    pts.sort_by(|a, b| a.t.total_cmp(&b.t));

    // ---- lower-tail integral over s = 1 - (1-t)^2 ------------------------
    // antiderivative of p((1-s)^{-(p+1)} - 1) is (1-s)^{-p} - p s
    let anti_lo = |s: f64| (1.0 - s).powf(-p) - p * s;
    let mut lower = 0.0;
    let mut prev_s = 0.0;
    let mut prev_env = 1.0_f64; // before the first grid point: trivial envelope
    let mut anchor: Option<(f64, f64)> = None; // (x0, envelope) at first zero count
    for pt in pts.iter().filter(|pt| pt.t > 0.0 && pt.t < 1.0) {
        let s = 1.0 - (1.0 - pt.t) * (1.0 - pt.t);
        if s > prev_s {
            lower += prev_env * (anti_lo(s) - anti_lo(prev_s));
            prev_s = s;
        }
        prev_env = pt.lower_hi;
        if pt.lower_count == 0 {
            anchor = Some((1.0 - pt.t, pt.lower_hi));
            break;
        }
    }
    // below the anchor (nothing observed there) the envelope switches to the
    // dimension-order polynomial decay of the small-ball probability:
    // P(Z <= x) <= env (x/x0)^dim, giving at most env 2p x0^{-2p}/(dim-2p)
    let nf = dim as f64;
    let (x0, env0) = anchor.unwrap_or((
        1.0 - pts.iter().filter(|pt| pt.t < 1.0).map(|pt| pt.t).fold(0.0, f64::max),
        prev_env,
    ));
    let deep = env0 * 2.0 * p / (nf - 2.0 * p) * x0.powf(-2.0 * p);

    // ---- upper-tail integral over s = (1+t)^2 - 1 ------------------------
    // antiderivative of p(1 - (1+s)^{-(p+1)}) is p s + (1+s)^{-p}
    let anti_up = |s: f64| p * s + (1.0 + s).powf(-p);
    let mut upper = 0.0;
    let mut prev_s = 0.0;
    let mut prev_env = 1.0_f64;
    let mut informative: Vec<(f64, f64)> = Vec::new(); // (s, envelope)
    for pt in pts.iter().filter(|pt| pt.t > 0.0) {
        let s = (1.0 + pt.t) * (1.0 + pt.t) - 1.0;
        if s > prev_s {
            upper += prev_env * (anti_up(s) - anti_up(prev_s));
            prev_s = s;
        }
        prev_env = pt.upper_hi;
        if pt.upper_count > 0 {
            informative.push((s, pt.upper_hi));
        }
    }
    // beyond the grid: measured exponential decay of the envelope (the norm
    // of a log-concave vector has an exponentially decaying upper tail)
    let lam = match informative.len() {
        0 | 1 => 1.0,
        len => {
            let (s1, e1) = informative[len / 2];
            let (s2, e2) = informative[len - 1];
            if s2 > s1 && e2 < e1 {
                (e1.ln() - e2.ln()) / (s2 - s1)
            } else {
                0.0
            }
        }
    };
    if lam <= 0.0 {
        return Err(Error::InsufficientTailResolution { p });
    }
    let beyond = prev_env * p / lam;

    let total = 1.0 + lower + upper + deep + beyond;
    if deep + beyond > 0.1 * total {
        return Err(Error::InsufficientTailResolution { p });
    }
    Ok(total.powf(1.0 / (2.0 * p)))
}

/// Direct empirical `(E Z^{-2p})^{1/(2p)}` in log space, the cross-check
/// that [`moments_from_tail`] must dominate.
pub fn direct_negative_moment(norms: &[f64], sqrt_n: f64, p: f64) -> Result<f64> {
    if norms.contains(&0.0) {
        return Err(Error::ZeroNormSample);
    }
    // (E Z^{-2p})^{1/(2p)} is the reciprocal of the (-2p)-power mean
    let logs: Vec<f64> = norms.iter().map(|&r| (r / sqrt_n).ln()).collect();
    Ok((-log_power_mean(&logs, -2.0 * p)).exp())
}

/// Two-sided report of the projection identity
/// `E|Y|^p = [Gamma((p+n)/2) Gamma(k/2) / (Gamma(n/2) Gamma((p+k)/2))] E_F E|P_F Y|^p`
/// by Monte Carlo over samples and Haar frames, plus the Haar-averaged
/// ratio inequality for p >= 2.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionIdentityReport {
    pub k: usize,
    pub p: f64,
    pub haar_count: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_discrepancy: f64,
    pub frame_spread_se: f64,
    pub norm_ratio: f64,
    pub projected_ratio: f64,
    pub ratio_inequality_ok: bool,
}

fn half_power(r2: f64, p: f64) -> f64 {
    // r2^{p/2} with fast paths for the common small integer p
    if p == 2.0 {
        r2
    } else if p == 1.0 {
        r2.sqrt()
    } else if p == 3.0 {
        r2 * r2.sqrt()
    } else if p == 4.0 {
        r2 * r2
    } else {
        r2.powf(0.5 * p)
    }
}

pub fn projection_moment_identity(
    batch: &SampleBatch,
    k: usize,
    p: f64,
    haar_count: usize,
    seed: u64,
) -> Result<ProjectionIdentityReport> {
    let n = batch.dim;
    if !(2.0 * p.abs() <= (k as f64) - 1.0 && k <= n) {
        return Err(Error::ProjectionConstraint { p, k, n });
    }
    // pack the Haar frame bases column-blocks into one n x (F k) matrix
    let f_count = haar_count;
    let mut v_all = vec![0.0_f64; n * f_count * k];
    for f in 0..f_count {
        let u = haar_rotation(n, seed, f as u64);
        let v = u.frame_basis(k);
        for j in 0..k {
            for d in 0..n {
                // row-major n x (F k)
                v_all[d * f_count * k + f * k + j] = v[(d, j)];
            }
        }
    }
    let cols = f_count * k;
    let rows_total = batch.n_samples;
    let values = batch.values();
    let n_chunks = rows_total.div_ceil(GEMM_CHUNK_ROWS);
    struct Partial {
        proj_p: Vec<f64>,
        proj_2: Vec<f64>,
        lhs_p: f64,
        lhs_2: f64,
    }
    let partials: Vec<Partial> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * GEMM_CHUNK_ROWS;
            let hi = ((ci + 1) * GEMM_CHUNK_ROWS).min(rows_total);
            let rows = hi - lo;
            let a = &values[lo * n..hi * n];
            let mut c = vec![0.0_f64; rows * cols];
            unsafe {
                matrixmultiply::dgemm(
                    rows,
                    n,
                    cols,
                    1.0,
                    a.as_ptr(),
                    n as isize,
                    1,
                    v_all.as_ptr(),
                    cols as isize,
                    1,
                    0.0,
                    c.as_mut_ptr(),
                    cols as isize,
                    1,
                );
            }
            let mut proj_p = vec![0.0_f64; f_count];
            let mut proj_2 = vec![0.0_f64; f_count];
            let mut lhs_p = 0.0;
            let mut lhs_2 = 0.0;
            for r in 0..rows {
                let crow = &c[r * cols..(r + 1) * cols];
                for f in 0..f_count {
                    let mut r2 = 0.0;
                    for j in 0..k {
                        let v = crow[f * k + j];
                        r2 += v * v;
                    }
                    proj_p[f] += half_power(r2, p);
                    proj_2[f] += r2;
                }
                let full_r2: f64 =
                    a[r * n..(r + 1) * n].iter().map(|x| x * x).sum();
                lhs_p += half_power(full_r2, p);
                lhs_2 += full_r2;
            }
            Partial { proj_p, proj_2, lhs_p, lhs_2 }
        })
        .collect();
    let mut proj_p = vec![0.0_f64; f_count];
    let mut proj_2 = vec![0.0_f64; f_count];
    let mut lhs_p = 0.0;
    let mut lhs_2 = 0.0;
    for part in partials {
        for f in 0..f_count {
            proj_p[f] += part.proj_p[f];
            proj_2[f] += part.proj_2[f];
        }
        lhs_p += part.lhs_p;
        lhs_2 += part.lhs_2;
    }
    let n_f = rows_total as f64;
    let lhs = lhs_p / n_f;
    let per_frame: Vec<f64> = proj_p.iter().map(|s| s / n_f).collect();
    let proj_mean_p = mean(&per_frame);
    let proj_mean_2 = proj_2.iter().map(|s| s / n_f).sum::<f64>() / f_count as f64;
    let nf = n as f64;
    let kf = k as f64;
    let gamma_factor = (log_gamma(0.5 * (p + nf)) + log_gamma(0.5 * kf)
        - log_gamma(0.5 * nf)
        - log_gamma(0.5 * (p + kf)))
    .exp();
    let rhs = gamma_factor * proj_mean_p;
    let (_, var_frames) = mean_var(&per_frame);
    let frame_spread_se = gamma_factor * (var_frames / f_count as f64).sqrt();
    let norm_ratio = lhs.powf(1.0 / p) / (lhs_2 / n_f).sqrt();
    let projected_ratio = proj_mean_p.powf(1.0 / p) / proj_mean_2.sqrt();
    let slack = 3.0 * frame_spread_se / rhs.max(1e-300) + 1e-4;
    let ratio_inequality_ok = p < 2.0 || norm_ratio <= projected_ratio * (1.0 + slack);
    Ok(ProjectionIdentityReport {
        k,
        p,
        haar_count,
        lhs,
        rhs,
        rel_discrepancy: (lhs - rhs).abs() / lhs.abs().max(1e-300),
        frame_spread_se,
        norm_ratio,
        projected_ratio,
        ratio_inequality_ok,
    })
}

/// Residual of the entropy decomposition
/// `Ent_mixture(f) = E_U Ent_{mu_U}(f) + Ent_U(h(U))`, an algebraic
/// identity for any finite family of finitely supported positive measures
/// (`h(u) = E_{mu_u} f`). Masses are per-measure weights on a shared grid.
pub fn entropy_decomposition_residual(masses: &[Vec<f64>], f_values: &[f64]) -> Result<f64> {
    if masses.is_empty() {
        return Err(Error::ZeroTotalMass);
    }
    let m = masses.len() as f64;
    let ent = |weights: &dyn Fn(usize) -> f64| -> (f64, f64) {
        // returns (E f, Ent(f)) under the (sub)probability weights
        let mut ef = 0.0;
        let mut eflogf = 0.0;
        for (t, &fv) in f_values.iter().enumerate() {
            let w = weights(t);
            if w > 0.0 && fv > 0.0 {
                ef += w * fv;
                eflogf += w * fv * fv.ln();
            }
        }
        (ef, eflogf - ef * ef.max(1e-300).ln())
    };
    let mut total_mass = 0.0;
    let mut e_ent = 0.0;
    let mut hs = Vec::with_capacity(masses.len());
    for mu in masses {
        if mu.len() != f_values.len() {
            return Err(Error::DimensionMismatch { expected: f_values.len(), got: mu.len() });
        }
        total_mass += mu.iter().sum::<f64>();
        let (h_u, ent_u) = ent(&|t| mu[t]);
        e_ent += ent_u / m;
        hs.push(h_u);
    }
    if total_mass <= 0.0 {
        return Err(Error::ZeroTotalMass);
    }
    // mixture measure: average of the mu_u
    let (mix_ef, mix_ent) = {
        let mut ef = 0.0;
        let mut eflogf = 0.0;
        for (t, &fv) in f_values.iter().enumerate() {
            let w: f64 = masses.iter().map(|mu| mu[t]).sum::<f64>() / m;
            if w > 0.0 && fv > 0.0 {
                ef += w * fv;
                eflogf += w * fv * fv.ln();
            }
        }
        (ef, eflogf - ef * ef.max(1e-300).ln())
    };
    let _ = mix_ef;
    // Ent_U of h: (1/m) sum h log h - hbar log hbar
    let hbar = mean(&hs);
    let ent_u_h = hs.iter().map(|&h| if h > 0.0 { h * h.ln() } else { 0.0 }).sum::<f64>() / m
        - hbar * hbar.max(1e-300).ln();
    Ok((mix_ent - (e_ent + ent_u_h)).abs())
}

/// Discretized radial laws of `|P_E Y|` over sampled frames: histogram
/// masses on a shared grid, plus the grid centers.
pub fn build_radial_measure_family(
    batch: &SampleBatch,
    k: usize,
    n_rotations: usize,
    bins: usize,
    seed: u64,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if k > batch.dim {
        return Err(Error::DimensionMismatch { expected: batch.dim, got: k });
    }
    let n = batch.dim;
    let t_max = 3.0 * (k as f64).sqrt() + 3.0;
    let centers: Vec<f64> =
        (0..bins).map(|b| (b as f64 + 0.5) * t_max / bins as f64).collect();
    let mut masses = Vec::with_capacity(n_rotations);
    for rot in 0..n_rotations {
        let u = haar_rotation(n, seed, rot as u64);
        let v = u.frame_basis(k);
        let mut hist = vec![0.0_f64; bins];
        for i in 0..batch.n_samples {
            let row = batch.row(i);
            let mut r2 = 0.0;
            for j in 0..k {
                let c: f64 = (0..n).map(|d| v[(d, j)] * row[d]).sum();
                r2 += c * c;
            }
            let idx = ((r2.sqrt() / t_max) * bins as f64) as usize;
            hist[idx.min(bins - 1)] += 1.0 / batch.n_samples as f64;
        }
        masses.push(hist);
    }
    Ok((masses, centers))
}

/// One row of the moment-transfer inequality
/// `(E|AX|^p)^{1/p}/(E|AX|^2)^{1/2} <= [(E|Y|^{2p})^{1/(2p)}/(E|Y|^2)^{1/2}]^2`
/// with `Y = (AX + G)/sqrt 2`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReductionRow {
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin_se: f64,
    pub pass: bool,
}

pub fn reduction_check(
    batch_x: &SampleBatch,
    a: &LinearMap,
    p_grid: &[f64],
    seed: u64,
) -> Result<Vec<ReductionRow>> {
    if p_grid.iter().any(|&p| p < 1.0) {
        return Err(Error::MomentOrderOutOfRange {
            p: p_grid.iter().cloned().fold(f64::INFINITY, f64::min),
            min_p: 1.0,
        });
    }
    let ax = apply_linear(batch_x, a)?;
    let y = convolve_gaussian(batch_x, a)?;
    let log_ax: Vec<f64> = ax.norms().iter().map(|&r| r.max(1e-300).ln()).collect();
    let log_y: Vec<f64> = y.norms().iter().map(|&r| r.max(1e-300).ln()).collect();
    let n = log_ax.len();
    let ratio_pair = |idx: Option<&[usize]>, p: f64| -> (f64, f64) {
        let gather = |src: &[f64]| -> Vec<f64> {
            match idx {
                None => src.to_vec(),
                Some(ix) => ix.iter().map(|&i| src[i]).collect(),
            }
        };
        let la = gather(&log_ax);
        let ly = gather(&log_y);
        let lhs = (log_power_mean(&la, p) - log_power_mean(&la, 2.0)).exp();
        let rhs = (2.0 * (log_power_mean(&ly, 2.0 * p) - log_power_mean(&ly, 2.0))).exp();
        (lhs, rhs)
    };
    let mut rows = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let (lhs, rhs) = ratio_pair(None, p);
        // joint bootstrap of the margin
        let mut margins = Vec::with_capacity(64);
        let mut idx = vec![0usize; n];
        for rep in 0..64 {
            let mut rng = stream_rng(seed, Purpose::Bootstrap, rep as u64);
            for slot in idx.iter_mut() {
                *slot = (rng.random::<u64>() % n as u64) as usize;
            }
            let (l, r) = ratio_pair(Some(&idx), p);
            margins.push(r - l);
        }
        let (_, var) = mean_var(&margins);
        let se = var.sqrt();
        rows.push(ReductionRow { p, lhs, rhs, margin_se: se, pass: lhs <= rhs + 3.0 * se });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CheegerRow {
    pub n: usize,
    pub e_norm: f64,
    pub sd_norm: f64,
    pub bobkov_quantity: f64,
}

/// `(E|X| sqrt(Var|X|))^{-1/2}` per dimension and the fitted log-log slope;
/// the isoperimetric constant is bounded below by a multiple of this.
#[derive(Debug, Clone, Serialize)]
pub struct CheegerDiagnostic {
    pub family: String,
    pub rows: Vec<CheegerRow>,
    pub exponent: f64,
}

pub fn cheeger_diagnostic(
    family: Family,
    n_grid: &[usize],
    n_samples: usize,
    seed: u64,
) -> Result<CheegerDiagnostic> {
    let scan = thin_shell_scan(family, n_grid, n_samples, seed)?;
    let rows: Vec<CheegerRow> = scan
        .rows
        .iter()
        .map(|r| CheegerRow {
            n: r.n,
            e_norm: r.e_norm,
            sd_norm: r.sd_norm,
            bobkov_quantity: 1.0 / (r.e_norm * r.sd_norm).sqrt(),
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.bobkov_quantity.ln()).collect();
    let (exponent, _) = linear_fit(&xs, &ys)?;
    Ok(CheegerDiagnostic { family: family.name().into(), rows, exponent })
}

/// Max finite-difference derivative of
/// `p -> (1/p) log[Gamma((p+n)/2) Gamma(k/2) / (Gamma(n/2) Gamma((p+k)/2))]`
/// over the (k, n) grid; non-positive in exact arithmetic.
pub fn gamma_ratio_derivative_max(pairs: &[(usize, usize)]) -> f64 {
    let g = |p: f64, k: f64, n: f64| {
        (log_gamma(0.5 * (p + n)) + log_gamma(0.5 * k)
            - log_gamma(0.5 * n)
            - log_gamma(0.5 * (p + k)))
            / p
    };
    let mut worst = f64::NEG_INFINITY;
    let h = 1e-4;
    for &(k, n) in pairs {
        let (kf, nf) = (k as f64, n as f64);
        let mut p = 1.0;
        while p <= 10.0 {
            let d = (g(p + h, kf, nf) - g(p, kf, nf)) / h;
            worst = worst.max(d);
            p += 0.25;
        }
    }
    worst
}

/// Fitted constant `C = max_k,p k * d/dp[(1/p) log(Gamma(k+p)/Gamma(k))]`
/// over `k` in the grid and `|p| <= (k-1)/2`.
pub fn stirling_bound_fitted_c(k_grid: &[usize]) -> f64 {
    let phi = |p: f64, k: f64| (log_gamma(k + p) - log_gamma(k)) / p;
    let h = 1e-4;
    let mut fitted: f64 = f64::NEG_INFINITY;
    for &k in k_grid {
        let kf = k as f64;
        let p_max = (kf - 1.0) / 2.0;
        let steps = 40;
        for i in 0..=steps {
            let p = -p_max + 2.0 * p_max * i as f64 / steps as f64;
            if p.abs() < 0.05 {
                continue;
            }
            let d = (phi(p + h, kf) - phi(p - h, kf)) / (2.0 * h);
            fitted = fitted.max(kf * d);
        }
    }
    fitted
}
