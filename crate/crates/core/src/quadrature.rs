//! Adaptive Gauss-Legendre quadrature on finite intervals, plus improper
//! integrals of log-concave-type integrands truncated by a measured decay
//! rate.
//!
//! Each segment is evaluated with the 15- and 31-point rules; the
//! discrepancy drives bisection of the worst segment until the summed error
//! estimate meets the requested relative tolerance.

use crate::error::{Error, Result};
use serde::Serialize;
use std::sync::OnceLock;

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub intervals_used: usize,
}

struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' at x via the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

fn rules() -> &'static (GaussRule, GaussRule) {
    static RULES: OnceLock<(GaussRule, GaussRule)> = OnceLock::new();
    RULES.get_or_init(|| (gauss_legendre(15), gauss_legendre(31)))
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let r = gauss_legendre(n);
    (r.nodes, r.weights)
}

/// The raw rule discrepancy can undershoot the fine rule's true error on
/// integrands with kinks when a feature falls between the nodes of both
/// rules; segment estimates carry a safety factor and, after each split,
/// the parent-versus-children discrepancy is folded in as a second,
/// differently-sampled error signal.
const ERR_SAFETY: f64 = 10.0;

fn eval_segment(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (lo_rule, hi_rule) = rules();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let coarse: f64 = lo_rule
        .nodes
        .iter()
        .zip(&lo_rule.weights)
        .map(|(&x, &w)| w * f(c + h * x))
        .sum::<f64>()
        * h;
    let fine: f64 = hi_rule
        .nodes
        .iter()
        .zip(&hi_rule.weights)
        .map(|(&x, &w)| w * f(c + h * x))
        .sum::<f64>()
        * h;
    (fine, ERR_SAFETY * (fine - coarse).abs())
}

/// Integrate `f` over `[a, b]` to relative tolerance `rel_tol` (with an
/// absolute floor for integrals near zero).
pub fn adaptive(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_floor: f64,
) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::QuadratureFailure("non-finite interval".into()));
    }
    if a == b {
        return Ok(QuadratureResult { value: 0.0, abs_error_estimate: 0.0, intervals_used: 0 });
    }
    // (err, a, b, value) segments; refine the worst
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    let (v0, e0) = eval_segment(&f, a, b);
    if !v0.is_finite() {
        return Err(Error::QuadratureFailure("non-finite integrand".into()));
    }
    segs.push((e0.max(f64::MAX / 4.0), a, b, v0)); // force at least one split
    const MAX_SEGS: usize = 4000;
    loop {
        let total: f64 = segs.iter().map(|s| s.3).sum();
        // tolerance is relative to the L1 mass so that cancelling integrands
        // (e.g. centered first moments) still terminate
        let total_abs: f64 = segs.iter().map(|s| s.3.abs()).sum();
        let err: f64 = segs.iter().map(|s| s.0).sum();
        let target = (rel_tol * total_abs).max(abs_floor);
        if err <= target || segs.len() >= MAX_SEGS {
            if err > target && segs.len() >= MAX_SEGS {
                return Err(Error::QuadratureFailure(format!(
                    "no convergence after {MAX_SEGS} segments (err {err:.3e}, target {target:.3e})"
                )));
            }
            return Ok(QuadratureResult {
                value: total,
                abs_error_estimate: err,
                intervals_used: segs.len(),
            });
        }
        // split the worst segment
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .map(|(i, _)| i)
            .unwrap();
        let (_, sa, sb, parent_v) = segs.swap_remove(worst);
        let mid = 0.5 * (sa + sb);
        let (vl, el) = eval_segment(&f, sa, mid);
        let (vr, er) = eval_segment(&f, mid, sb);
        if !(vl.is_finite() && vr.is_finite()) {
            return Err(Error::QuadratureFailure("non-finite integrand".into()));
        }
        // differently-sampled cross-check: the parent's rule against the
        // children's; catches features the node pattern stepped over
        let hier = 0.5 * (parent_v - (vl + vr)).abs();
        segs.push((el.max(hier), sa, mid, vl));
        segs.push((er.max(hier), mid, sb, vr));
    }
}

/// Integrate `f` over `[a, inf)` assuming `f` eventually decays at least
/// exponentially (true for `t^q w(t)` with log-concave `w`). The horizon is
/// doubled until the measured local log-slope certifies the dropped tail
/// below tolerance: past `T`, `f(t) <= f(T) exp(-r (t - T))` with the rate
/// measured just left of `T` (valid since the log-slope of a log-concave
/// profile is non-increasing), so the tail is at most `f(T)/r`.
pub fn adaptive_to_infinity(
    f: impl Fn(f64) -> f64,
    a: f64,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    let mut t_hi = (2.0 * a.abs()).max(8.0);
    const T_CAP: f64 = 1e8;
    loop {
        let q = adaptive(&f, a, t_hi, rel_tol * 0.5, 1e-300)?;
        let scale = q.value.abs().max(1e-300);
        // measured decay rate near the horizon
        let delta = 0.05 * t_hi;
        let (ft, fl) = (f(t_hi), f(t_hi - delta));
        let tail_bound = if ft <= 0.0 {
            0.0
        } else if fl > ft {
            let r = (fl.ln() - ft.ln()) / delta;
            // probe forward: the measured rate must still hold well past T
            if f(t_hi + 5.0 / r) <= ft * (-4.5_f64).exp() {
                ft / r
            } else {
                f64::INFINITY
            }
        } else {
            f64::INFINITY
        };
        if tail_bound <= rel_tol * scale {
            return Ok(QuadratureResult {
                value: q.value,
                abs_error_estimate: q.abs_error_estimate + tail_bound,
                intervals_used: q.intervals_used,
            });
        }
        t_hi *= 2.0;
        if t_hi > T_CAP {
            return Err(Error::NonIntegrableTail { t_max: t_hi });
        }
    }
}
