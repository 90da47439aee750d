//! One-dimensional log-concave machinery: radial moments by adaptive
//! quadrature, one-dimensional moment-body radii, Borell/Bobkov concavity
//! checks, the half-line mass bound for centered densities, the
//! density-at-zero bound, and exact or KDE marginals of the zoo.

use crate::distributions::{laplace_gauss_density_1d, DensitySpec, Family, SampleBatch};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive, adaptive_to_infinity};
pub use crate::quadrature::QuadratureResult;
use crate::special::log_gamma;
use std::sync::Arc;

const SQRT3: f64 = 1.7320508075688772;
const LAPLACE_SCALE: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A nonnegative function on a stated interval (possibly unbounded), with a
/// log-concavity flag and an optional exponential tail rate hint.
#[derive(Clone)]
pub struct RadialFunction {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub domain: (f64, f64),
    pub log_concave: bool,
    pub tail_rate: Option<f64>,
}

impl std::fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialFunction")
            .field("domain", &self.domain)
            .field("log_concave", &self.log_concave)
            .field("tail_rate", &self.tail_rate)
            .finish()
    }
}

impl RadialFunction {
    pub fn new(
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        domain: (f64, f64),
        log_concave: bool,
        tail_rate: Option<f64>,
    ) -> RadialFunction {
        RadialFunction { eval: Arc::new(eval), domain, log_concave, tail_rate }
    }

    /// Evaluate; zero outside the domain.
    pub fn eval(&self, t: f64) -> f64 {
        if t < self.domain.0 || t > self.domain.1 {
            0.0
        } else {
            (self.eval)(t).max(0.0)
        }
    }

    /// The reflection `t -> w(-t)`.
    pub fn reflected(&self) -> RadialFunction {
        let inner = self.eval.clone();
        let (lo, hi) = self.domain;
        RadialFunction {
            eval: Arc::new(move |t| inner(-t)),
            domain: (-hi, -lo),
            log_concave: self.log_concave,
            tail_rate: self.tail_rate,
        }
    }

    pub fn indicator(a: f64, b: f64) -> RadialFunction {
        RadialFunction::new(move |_| 1.0, (a, b), true, None)
    }

    pub fn exponential() -> RadialFunction {
        RadialFunction::new(|t: f64| (-t).exp(), (0.0, f64::INFINITY), true, Some(1.0))
    }

    pub fn two_sided_exponential() -> RadialFunction {
        RadialFunction::new(|t: f64| (-t.abs()).exp(), (f64::NEG_INFINITY, f64::INFINITY), true, Some(1.0))
    }

    pub fn standard_gaussian() -> RadialFunction {
        RadialFunction::new(
            |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            (f64::NEG_INFINITY, f64::INFINITY),
            true,
            None,
        )
    }

    /// The standardized shifted exponential: density e^{-(t+1)} on [-1, inf).
    pub fn shifted_exponential() -> RadialFunction {
        RadialFunction::new(|t: f64| (-(t + 1.0)).exp(), (-1.0, f64::INFINITY), true, Some(1.0))
    }
}

/// `int_0^inf t^q w(t) dt` by adaptive Gauss-Legendre, truncated via the
/// measured log-concave decay rate when the domain is unbounded.
pub fn radial_moment(w: &RadialFunction, q: f64, rel_tol: f64) -> Result<QuadratureResult> {
    if q <= -1.0 {
        return Err(Error::DivergentIntegral { q });
    }
    let lo = w.domain.0.max(0.0);
    let hi = w.domain.1;
    if hi <= lo {
        return Ok(QuadratureResult { value: 0.0, abs_error_estimate: 0.0, intervals_used: 0 });
    }
    let wc = w.clone();
    let integrand = move |t: f64| if t <= 0.0 && q < 0.0 { 0.0 } else { t.powf(q) * wc.eval(t) };
    if hi.is_finite() {
        adaptive(integrand, lo, hi, rel_tol, 1e-300)
    } else {
        adaptive_to_infinity(integrand, lo, rel_tol)
    }
}

/// Radius of the one-dimensional moment body along the chosen sign:
/// `rho = (q * int_0^inf t^{q-1} w(sign * t) dt)^{1/q}`.
pub fn kq_radius_1d(w: &RadialFunction, q: f64, positive_ray: bool) -> Result<f64> {
    if q < 1.0 {
        return Err(Error::MomentOrderOutOfRange { p: q, min_p: 1.0 });
    }
    if w.eval(0.0) <= 0.0 {
        return Err(Error::DensityZeroAtOrigin);
    }
    let side = if positive_ray { w.clone() } else { w.reflected() };
    let m = radial_moment(&side, q - 1.0, 1e-11)?;
    Ok((q * m.value).powf(1.0 / q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcavityMode {
    /// `q -> log( int t^q w / Gamma(q+1) )` is concave for log-concave w.
    Borell,
    /// `q -> log( int t^q w / q^q )` is concave (a weaker variant).
    Bobkov,
}

#[derive(Debug, Clone)]
pub struct ConcavityReport {
    pub phi: Vec<f64>,
    pub max_second_difference: f64,
    pub max_abs_phi: f64,
}

/// Check concavity of the normalized log moment profile on a uniform grid;
/// returns the largest second difference (<= tol means concave up to noise).
pub fn concavity_check(
    w: &RadialFunction,
    mode: ConcavityMode,
    q_grid: &[f64],
    tol: f64,
) -> Result<ConcavityReport> {
    if q_grid.len() < 3 {
        return Err(Error::EmptyGrid("q_grid needs >= 3 points"));
    }
    let h = q_grid[1] - q_grid[0];
    for pair in q_grid.windows(2) {
        if pair[1] <= pair[0] || ((pair[1] - pair[0]) - h).abs() > 1e-9 * h.abs() {
            return Err(Error::NonUniformGrid);
        }
    }
    let mut phi = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        let m = radial_moment(w, q, 1e-12)?;
        if m.value <= 0.0 {
            return Err(Error::QuadratureFailure(format!("vanishing moment at q = {q}")));
        }
        let norm = match mode {
            ConcavityMode::Borell => log_gamma(q + 1.0),
            ConcavityMode::Bobkov => q * q.ln(),
        };
        phi.push(m.value.ln() - norm);
    }
    let mut max_d2 = f64::NEG_INFINITY;
    for win in phi.windows(3) {
        max_d2 = max_d2.max(win[0] - 2.0 * win[1] + win[2]);
    }
    let report = ConcavityReport {
        max_second_difference: max_d2,
        max_abs_phi: phi.iter().fold(0.0_f64, |m, &v| m.max(v.abs())),
        phi,
    };
    if max_d2 > tol {
        return Err(Error::Invalid(format!(
            "second difference {max_d2:.3e} exceeds tolerance {tol:.3e}"
        )));
    }
    Ok(report)
}

/// Mass of the positive half-line of a centered log-concave probability
/// density; lies in [1/e, 1 - 1/e].
pub fn grunbaum_mass(w: &RadialFunction) -> Result<f64> {
    let refl = w.reflected();
    let pos = radial_moment(w, 0.0, 1e-11)?;
    let neg = radial_moment(&refl, 0.0, 1e-11)?;
    let m_pos = radial_moment(w, 1.0, 1e-11)?;
    let m_neg = radial_moment(&refl, 1.0, 1e-11)?;
    let total = pos.value + neg.value;
    if total <= 0.0 {
        return Err(Error::ZeroTotalMass);
    }
    let first_moment = (m_pos.value - m_neg.value) / total;
    if first_moment.abs() > 1e-8 {
        return Err(Error::BarycenterNotZero { moment: first_moment });
    }
    let p = pos.value / total;
    let qerr = (pos.abs_error_estimate + neg.abs_error_estimate) / total + 1e-12;
    let (lo, hi) = ((-1.0_f64).exp(), 1.0 - (-1.0_f64).exp());
    if p < lo - qerr - 1e-9 || p > hi + qerr + 1e-9 {
        return Err(Error::Invalid(format!(
            "half-line mass {p:.9} escapes [1/e, 1-1/e] beyond quadrature error"
        )));
    }
    Ok(p)
}

/// Bracket the mode of a unimodal function by expanding scan, then shrink by
/// golden-section to width 1e-10.
fn unimodal_sup(w: &RadialFunction) -> f64 {
    let (lo, hi) = w.domain;
    let a = if lo.is_finite() { lo } else { -64.0 };
    let b = if hi.is_finite() { hi } else { 64.0 };
    // coarse scan for a bracket
    let grid = 512usize;
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..=grid {
        let t = a + (b - a) * i as f64 / grid as f64;
        let v = w.eval(t);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut x1 = a + (b - a) * best_i.saturating_sub(1) as f64 / grid as f64;
    let mut x2 = a + (b - a) * (best_i + 1).min(grid) as f64 / grid as f64;
    let inv_phi = 0.6180339887498949_f64;
    let mut c = x2 - inv_phi * (x2 - x1);
    let mut d = x1 + inv_phi * (x2 - x1);
    let (mut fc, mut fd) = (w.eval(c), w.eval(d));
    while x2 - x1 > 1e-10 {
        if fc >= fd {
            x2 = d;
            d = c;
            fd = fc;
            c = x2 - inv_phi * (x2 - x1);
            fc = w.eval(c);
        } else {
            x1 = c;
            c = d;
            fc = fd;
            d = x1 + inv_phi * (x2 - x1);
            fd = w.eval(d);
        }
    }
    w.eval(0.5 * (x1 + x2)).max(best_v)
}

/// For a log-concave probability density with half-line masses in
/// `[eps, 1-eps]`, the density at the origin is at least `eps * sup w`.
/// Returns the observed ratio `w(0) / sup w`.
pub fn density_zero_bound(w: &RadialFunction, eps: f64) -> Result<f64> {
    let refl = w.reflected();
    let pos = radial_moment(w, 0.0, 1e-10)?.value;
    let neg = radial_moment(&refl, 0.0, 1e-10)?.value;
    let total = pos + neg;
    if total <= 0.0 {
        return Err(Error::ZeroTotalMass);
    }
    let mass = pos / total;
    if mass < eps - 1e-9 || mass > 1.0 - eps + 1e-9 {
        return Err(Error::MassPrecondition { mass, eps });
    }
    let sup = unimodal_sup(w);
    let ratio = w.eval(0.0) / sup;
    if ratio < eps - 1e-7 {
        return Err(Error::Invalid(format!(
            "density-at-zero ratio {ratio:.9} below the guaranteed floor {eps:.9}"
        )));
    }
    Ok(ratio)
}

/// The direction along which the whitened simplex has a closed-form
/// (standardized Beta(1, n)) marginal.
pub fn canonical_simplex_direction(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let c1 = ((nf + 1.0) * (nf + 2.0)).sqrt();
    let c2 = (nf + 1.0) * (nf + 2.0).sqrt();
    // Sigma^{1/2} e_1 = (1/c1)(e_1 - (1/n) ones) + (1/(c2 n)) ones
    let mut v = vec![1.0 / (c2 * nf) - 1.0 / (c1 * nf); n];
    v[0] += 1.0 / c1;
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

fn is_axis(theta: &[f64]) -> Option<(usize, f64)> {
    let mut axis = None;
    for (i, &t) in theta.iter().enumerate() {
        if t.abs() > 1e-12 {
            if axis.is_some() {
                return None;
            }
            axis = Some((i, t.signum()));
        }
    }
    axis.filter(|_| {
        let norm2: f64 = theta.iter().map(|x| x * x).sum();
        (norm2 - 1.0).abs() < 1e-10
    })
}

/// Exact one-dimensional marginal of a zoo member along `theta`, where a
/// closed form exists: any direction for the rotation-invariant members,
/// coordinate axes for the product members, the canonical direction for the
/// simplex. Flagged log-concave (marginals of log-concave laws are
/// log-concave).
pub fn marginal_1d(spec: &DensitySpec, theta: &[f64]) -> Result<RadialFunction> {
    if theta.len() != spec.dim {
        return Err(Error::DimensionMismatch { expected: spec.dim, got: theta.len() });
    }
    match spec.family {
        Family::Gaussian => Ok(RadialFunction::standard_gaussian()),
        Family::UniformBall => {
            let n = spec.dim as f64;
            let r = spec.ball_radius();
            let log_c = log_gamma(0.5 * n + 1.0)
                - log_gamma(0.5 * (n + 1.0))
                - log_gamma(0.5)
                - r.ln();
            let c = log_c.exp();
            let expo = 0.5 * (n - 1.0);
            Ok(RadialFunction::new(
                move |t: f64| {
                    let u = 1.0 - (t / r) * (t / r);
                    if u <= 0.0 {
                        0.0
                    } else {
                        c * u.powf(expo)
                    }
                },
                (-r, r),
                true,
                None,
            ))
        }
        Family::UniformSimplex => {
            let want = canonical_simplex_direction(spec.dim);
            let dot: f64 = want.iter().zip(theta).map(|(a, b)| a * b).sum();
            if (dot.abs() - 1.0).abs() > 1e-9 {
                return Err(Error::ExactPathUnavailable);
            }
            let n = spec.dim as f64;
            let mu = 1.0 / (n + 1.0);
            let sigma = (n / ((n + 1.0) * (n + 1.0) * (n + 2.0))).sqrt();
            let flip = dot.signum();
            Ok(RadialFunction::new(
                move |t: f64| {
                    let x = mu + sigma * flip * t;
                    if (0.0..=1.0).contains(&x) {
                        sigma * n * (1.0 - x).powf(n - 1.0)
                    } else {
                        0.0
                    }
                },
                if flip > 0.0 {
                    (-mu / sigma, (1.0 - mu) / sigma)
                } else {
                    (-(1.0 - mu) / sigma, mu / sigma)
                },
                true,
                None,
            ))
        }
        Family::ProductLaplace | Family::ProductShiftedExponential | Family::UniformCube
        | Family::GaussianConvolution => {
            let (_, sign) = is_axis(theta).ok_or(Error::ExactPathUnavailable)?;
            Ok(match spec.family {
                Family::ProductLaplace => RadialFunction::new(
                    |t: f64| (-t.abs() / LAPLACE_SCALE).exp() / (2.0 * LAPLACE_SCALE),
                    (f64::NEG_INFINITY, f64::INFINITY),
                    true,
                    Some(1.0 / LAPLACE_SCALE),
                ),
                Family::ProductShiftedExponential => {
                    if sign > 0.0 {
                        RadialFunction::shifted_exponential()
                    } else {
                        RadialFunction::shifted_exponential().reflected()
                    }
                }
                Family::UniformCube => RadialFunction::new(
                    |_| 1.0 / (2.0 * SQRT3),
                    (-SQRT3, SQRT3),
                    true,
                    None,
                ),
                Family::GaussianConvolution => RadialFunction::new(
                    laplace_gauss_density_1d,
                    (f64::NEG_INFINITY, f64::INFINITY),
                    true,
                    Some(1.0),
                ),
                _ => unreachable!(),
            })
        }
    }
}

/// The closed-form marginal each family is checked against in the
/// whole-zoo sweeps (axis factor for products, the Beta direction for the
/// simplex, any direction for the rotation-invariant members).
pub fn canonical_marginal(spec: &DensitySpec) -> Result<RadialFunction> {
    let theta = match spec.family {
        Family::UniformSimplex => canonical_simplex_direction(spec.dim),
        _ => {
            let mut v = vec![0.0; spec.dim];
            v[0] = 1.0;
            v
        }
    };
    marginal_1d(spec, &theta)
}

/// Gaussian-kernel density estimate of the marginal of a batch along
/// `theta`, with Silverman bandwidth; an estimate only, never flagged
/// log-concave.
pub fn marginal_kde(batch: &SampleBatch, theta: &[f64]) -> Result<RadialFunction> {
    if theta.len() != batch.dim {
        return Err(Error::DimensionMismatch { expected: batch.dim, got: theta.len() });
    }
    let mut z = batch.projections(theta);
    z.sort_by(f64::total_cmp);
    let n = z.len();
    let (_, var) = crate::stats::mean_var(&z);
    let iqr = z[(0.75 * n as f64) as usize] - z[(0.25 * n as f64) as usize];
    let h = 0.9 * var.sqrt().min(iqr / 1.34) * (n as f64).powf(-0.2);
    let lo = z[0] - 5.0 * h;
    let hi = z[n - 1] + 5.0 * h;
    let norm = 1.0 / (n as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    Ok(RadialFunction::new(
        move |t: f64| {
            z.iter().map(|&zi| (-0.5 * ((t - zi) / h) * ((t - zi) / h)).exp()).sum::<f64>() * norm
        },
        (lo, hi),
        false,
        None,
    ))
}
