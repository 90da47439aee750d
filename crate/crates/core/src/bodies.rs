//! Convex-body oracles and the inclusion-relation verifier.
//!
//! Bodies are known through radial and/or support evaluators returning
//! `(value, stderr)`; stderr is zero on quadrature paths and delta-method
//! propagated on Monte Carlo paths. The verifier checks the one-sided
//! centroid-body chains, the moment-body chains, the polar-coordinates
//! identity tying the two together, the volume sandwich, and the
//! appendix-style bounds for non-symmetric densities, reporting fitted
//! constants wherever a universal constant is unspecified.

use crate::distributions::{DensitySpec, Family, SampleBatch};
use crate::error::{Error, Result};
use crate::quadrature::legendre_rule;
use crate::radial1d::{radial_moment, RadialFunction};
use crate::rng::{stream_rng, Purpose};
use crate::special::{gaussian_abs_moment_1d, log_gamma};
use crate::stats::{log_power_mean, mean_var};
use rand::RngExt;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::sync::Arc;

/// Direction evaluator returning `(value, stderr)`.
pub type DirectionEval = Arc<dyn Fn(&[f64]) -> (f64, f64) + Send + Sync>;

/// A star body in R^m with origin in its interior, known through a radial
/// and/or support evaluator. Evaluators return `(value, stderr)`.
#[derive(Clone)]
pub struct StarBodyOracle {
    pub dim: usize,
    radial: Option<DirectionEval>,
    support: Option<DirectionEval>,
    pub origin_interior: bool,
}

impl std::fmt::Debug for StarBodyOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StarBodyOracle")
            .field("dim", &self.dim)
            .field("has_radial", &self.radial.is_some())
            .field("has_support", &self.support.is_some())
            .finish()
    }
}

impl StarBodyOracle {
    pub fn from_radial(
        dim: usize,
        eval: impl Fn(&[f64]) -> (f64, f64) + Send + Sync + 'static,
    ) -> StarBodyOracle {
        StarBodyOracle { dim, radial: Some(Arc::new(eval)), support: None, origin_interior: true }
    }

    pub fn from_support(
        dim: usize,
        eval: impl Fn(&[f64]) -> (f64, f64) + Send + Sync + 'static,
    ) -> StarBodyOracle {
        StarBodyOracle { dim, radial: None, support: Some(Arc::new(eval)), origin_interior: true }
    }

    pub fn euclidean_ball(dim: usize, r: f64) -> StarBodyOracle {
        StarBodyOracle {
            dim,
            radial: Some(Arc::new(move |_: &[f64]| (r, 0.0))),
            support: Some(Arc::new(move |_: &[f64]| (r, 0.0))),
            origin_interior: true,
        }
    }

    /// Centered ellipsoid with the given semiaxes (radial and support).
    pub fn ellipsoid(semiaxes: Vec<f64>) -> StarBodyOracle {
        let dim = semiaxes.len();
        let axes_r = semiaxes.clone();
        let axes_s = semiaxes;
        StarBodyOracle {
            dim,
            radial: Some(Arc::new(move |theta: &[f64]| {
                let s: f64 = theta.iter().zip(&axes_r).map(|(t, a)| (t / a) * (t / a)).sum();
                (1.0 / s.sqrt(), 0.0)
            })),
            support: Some(Arc::new(move |theta: &[f64]| {
                let s: f64 = theta.iter().zip(&axes_s).map(|(t, a)| (t * a) * (t * a)).sum();
                (s.sqrt(), 0.0)
            })),
            origin_interior: true,
        }
    }

    pub fn has_radial(&self) -> bool {
        self.radial.is_some()
    }

    pub fn has_support(&self) -> bool {
        self.support.is_some()
    }

    pub fn radial(&self, theta: &[f64]) -> Result<(f64, f64)> {
        let f = self.radial.as_ref().ok_or(Error::MissingEvaluator("radial"))?;
        Ok(f(theta))
    }

    pub fn support(&self, theta: &[f64]) -> Result<(f64, f64)> {
        let f = self.support.as_ref().ok_or(Error::MissingEvaluator("support"))?;
        Ok(f(theta))
    }

    /// Gauge (possibly non-even norm) `|x| / rho(x/|x|)` extended by
    /// positive homogeneity.
    pub fn norm(&self, x: &[f64]) -> Result<(f64, f64)> {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            return Ok((0.0, 0.0));
        }
        let unit: Vec<f64> = x.iter().map(|v| v / r).collect();
        let (rho, err) = self.radial(&unit)?;
        if rho <= 0.0 {
            return Err(Error::NonPositiveRadial { value: rho, index: 0 });
        }
        Ok((r / rho, r * err / (rho * rho)))
    }

    /// Multiplicative corruption of the radial evaluator (negative-control
    /// input for convexity checks); deterministic in the direction.
    pub fn corrupted(&self, amplitude: f64, seed: u64) -> Result<StarBodyOracle> {
        let inner = self.radial.as_ref().ok_or(Error::MissingEvaluator("radial"))?.clone();
        Ok(StarBodyOracle {
            dim: self.dim,
            radial: Some(Arc::new(move |theta: &[f64]| {
                let mut h = seed ^ 0x9e3779b97f4a7c15;
                for &t in theta {
                    h ^= (t * 1e9) as i64 as u64;
                    h = h.wrapping_mul(0xbf58476d1ce4e5b9);
                    h ^= h >> 31;
                }
                let u = (h >> 11) as f64 / (1u64 << 53) as f64; // [0,1)
                let (v, e) = inner(theta);
                (v * (1.0 + amplitude * (2.0 * u - 1.0)), e)
            })),
            support: None,
            origin_interior: self.origin_interior,
        })
    }
}

/// Pointwise density evaluator.
pub type DensityEval = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A normalized probability density on R^m usable for ray quadrature.
#[derive(Clone)]
pub struct Density {
    pub dim: usize,
    eval: DensityEval,
    pub label: String,
}

impl std::fmt::Debug for Density {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Density").field("dim", &self.dim).field("label", &self.label).finish()
    }
}

impl Density {
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Density {
        Density { dim, eval: Arc::new(eval), label: label.into() }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    /// Product density with the given one-dimensional factor.
    pub fn product(factor: RadialFunction, dim: usize, label: impl Into<String>) -> Density {
        Density::new(dim, label, move |x: &[f64]| x.iter().map(|&v| factor.eval(v)).product())
    }

    /// Normalized density of a zoo member, where expressible in closed form.
    pub fn from_spec(spec: &DensitySpec) -> Result<Density> {
        let n = spec.dim;
        let label = format!("{}-{}d", spec.family.name(), n);
        match spec.family {
            Family::Gaussian => Ok(Density::new(n, label, move |x: &[f64]| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                (-0.5 * r2).exp() / (2.0 * std::f64::consts::PI).powf(n as f64 / 2.0)
            })),
            Family::ProductLaplace => {
                Ok(Density::product(crate::radial1d::RadialFunction::new(
                    |t: f64| {
                        let b = std::f64::consts::FRAC_1_SQRT_2;
                        (-t.abs() / b).exp() / (2.0 * b)
                    },
                    (f64::NEG_INFINITY, f64::INFINITY),
                    true,
                    None,
                ), n, label))
            }
            Family::ProductShiftedExponential => Ok(Density::product(
                RadialFunction::shifted_exponential(),
                n,
                label,
            )),
            Family::UniformCube => {
                let a = 3f64.sqrt();
                let vol = (2.0 * a).powi(n as i32);
                Ok(Density::new(n, label, move |x: &[f64]| {
                    if x.iter().all(|v| v.abs() <= a) {
                        1.0 / vol
                    } else {
                        0.0
                    }
                }))
            }
            Family::UniformBall => {
                let r = spec.ball_radius();
                let log_vol = (n as f64 / 2.0) * std::f64::consts::PI.ln()
                    - log_gamma(n as f64 / 2.0 + 1.0)
                    + n as f64 * r.ln();
                let inv_vol = (-log_vol).exp();
                Ok(Density::new(n, label, move |x: &[f64]| {
                    let r2: f64 = x.iter().map(|v| v * v).sum();
                    if r2 <= r * r {
                        inv_vol
                    } else {
                        0.0
                    }
                }))
            }
            _ => Err(Error::ExactPathUnavailable),
        }
    }
}

/// Deterministic or sampled unit directions in R^m.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    pub dirs: Vec<Vec<f64>>,
    pub generation: String,
}

impl DirectionSet {
    pub fn sampled(dim: usize, count: usize, seed: u64) -> DirectionSet {
        let mut dirs = Vec::with_capacity(count);
        for j in 0..count {
            let mut rng = stream_rng(seed, Purpose::Directions, j as u64);
            let mut v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            dirs.push(v);
        }
        DirectionSet { dirs, generation: format!("sampled(seed={seed})") }
    }

    /// Sampled directions together with their antipodes.
    pub fn antipodal(dim: usize, pairs: usize, seed: u64) -> DirectionSet {
        let mut base = DirectionSet::sampled(dim, pairs, seed);
        let negs: Vec<Vec<f64>> =
            base.dirs.iter().map(|d| d.iter().map(|x| -x).collect()).collect();
        base.dirs.extend(negs);
        base.generation = format!("antipodal-sampled(seed={seed})");
        base
    }

    /// All +-axes and the normalized +-(e_i +- e_j) diagonals.
    pub fn axes_and_diagonals(dim: usize) -> DirectionSet {
        let mut dirs = Vec::new();
        for i in 0..dim {
            for s in [1.0, -1.0] {
                let mut v = vec![0.0; dim];
                v[i] = s;
                dirs.push(v);
            }
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..dim {
            for j in (i + 1)..dim {
                for (a, b) in [(s, s), (s, -s), (-s, s), (-s, -s)] {
                    let mut v = vec![0.0; dim];
                    v[i] = a;
                    v[j] = b;
                    dirs.push(v);
                }
            }
        }
        DirectionSet { dirs, generation: "axes+diagonals".into() }
    }

    /// Uniform circle grid (dim 2 only).
    pub fn circle_grid(count: usize) -> DirectionSet {
        let dirs = (0..count)
            .map(|j| {
                let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / count as f64;
                vec![phi.cos(), phi.sin()]
            })
            .collect();
        DirectionSet { dirs, generation: format!("circle-grid({count})") }
    }
}

/// Quadrature grid on the unit sphere S^{m-1}, weights summing to its area.
/// m = 1 is the two-point counting measure; m = 2 a trapezoid in angle;
/// m = 3 a Gauss-Legendre x trapezoid product grid.
pub struct SphereGrid {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

pub fn sphere_grid(m: usize, resolution: usize) -> Result<SphereGrid> {
    match m {
        1 => Ok(SphereGrid { points: vec![vec![1.0], vec![-1.0]], weights: vec![1.0, 1.0] }),
        2 => {
            let k = resolution.max(16);
            let w = 2.0 * std::f64::consts::PI / k as f64;
            let mut points = Vec::with_capacity(k);
            for j in 0..k {
                let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / k as f64;
                points.push(vec![phi.cos(), phi.sin()]);
            }
            Ok(SphereGrid { points, weights: vec![w; k] })
        }
        3 => {
            let nu = (resolution / 2).max(16);
            let nphi = resolution.max(32);
            let (unodes, uweights) = legendre_rule(nu);
            let wphi = 2.0 * std::f64::consts::PI / nphi as f64;
            let mut points = Vec::new();
            let mut weights = Vec::new();
            for (u, wu) in unodes.iter().zip(&uweights) {
                let s = (1.0 - u * u).sqrt();
                for j in 0..nphi {
                    let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / nphi as f64;
                    points.push(vec![s * phi.cos(), s * phi.sin(), *u]);
                    weights.push(wu * wphi);
                }
            }
            Ok(SphereGrid { points, weights })
        }
        _ => Err(Error::Invalid(format!("sphere grids implemented for m <= 3, got {m}"))),
    }
}

/// Monte Carlo support of the one-sided centroid body:
/// `(2 mean <x, theta>_+^q)^{1/q}` with delta-method stderr. Powers are
/// taken in log space so large q does not overflow.
pub fn zq_plus_support_mc(batch: &SampleBatch, q: f64, theta: &[f64]) -> Result<(f64, f64)> {
    directional_support(batch, q, theta, true)
}

/// Symmetric variant `(mean |<x, theta>|^q)^{1/q}` (no factor 2).
pub fn zq_support_mc(batch: &SampleBatch, q: f64, theta: &[f64]) -> Result<(f64, f64)> {
    directional_support(batch, q, theta, false)
}

fn directional_support(
    batch: &SampleBatch,
    q: f64,
    theta: &[f64],
    one_sided: bool,
) -> Result<(f64, f64)> {
    if q < 1.0 {
        return Err(Error::MomentOrderOutOfRange { p: q, min_p: 1.0 });
    }
    let proj = batch.projections(theta);
    let n = proj.len() as f64;
    // mean of z^q over the retained part, in log space
    let logs: Vec<f64> = proj
        .iter()
        .filter_map(|&z| {
            let v = if one_sided { z.max(0.0) } else { z.abs() };
            if v > 0.0 {
                Some(v.ln())
            } else {
                None
            }
        })
        .collect();
    if logs.is_empty() {
        return Err(Error::AllProjectionsNonPositive);
    }
    let log_sum = crate::stats::logsumexp(logs.iter().map(|&l| q * l));
    let log_mean = log_sum - n.ln();
    let factor = if one_sided { 2.0_f64 } else { 1.0 };
    let h = ((log_mean + factor.ln()) / q).exp();
    // delta method: var of the mean of z^q, normalized in log space
    let log_sum_2 = crate::stats::logsumexp(logs.iter().map(|&l| 2.0 * q * l));
    let m1 = (log_mean).exp();
    let m2 = (log_sum_2 - n.ln()).exp();
    let var_mean = (m2 - m1 * m1).max(0.0) / n;
    let se = h * var_mean.sqrt() / (q * m1);
    Ok((h, se))
}

/// Quadrature support of the one-sided centroid body of a 1-D density:
/// `(2 int_0^inf t^q w(sign t) dt)^{1/q}`.
pub fn zq_plus_support_1d(w: &RadialFunction, q: f64, positive_ray: bool) -> Result<(f64, f64)> {
    let side = if positive_ray { w.clone() } else { w.reflected() };
    let m = radial_moment(&side, q, 1e-11)?;
    if m.value <= 0.0 {
        return Err(Error::AllProjectionsNonPositive);
    }
    let h = (2.0 * m.value).powf(1.0 / q);
    let err = h * m.abs_error_estimate / (q * m.value);
    Ok((h, err))
}

/// Closed-form support of the one-sided centroid body of `A G` for standard
/// Gaussian G: `sqrt(theta^T A A^T theta) * (E|G_1|^q)^{1/q}`.
pub fn zq_plus_support_gaussian(a_diag: &[f64], q: f64, theta: &[f64]) -> f64 {
    let s2: f64 = theta.iter().zip(a_diag).map(|(t, a)| (t * a) * (t * a)).sum();
    s2.sqrt() * gaussian_abs_moment_1d(q).powf(1.0 / q)
}

/// One-sided centroid body of a batch as a support oracle.
pub fn zq_plus_body(batch: Arc<SampleBatch>, q: f64) -> StarBodyOracle {
    let dim = batch.dim;
    StarBodyOracle::from_support(dim, move |theta: &[f64]| {
        zq_plus_support_mc(&batch, q, theta).expect("directional support")
    })
}

/// The ray profile `t -> w(t theta)` with its support endpoint resolved.
/// Along a ray a log-concave density is positive on an interval `[0, edge)`;
/// exposing the edge as the integration endpoint keeps narrow slivers at the
/// support boundary from slipping between quadrature nodes.
fn ray_profile(w: &Density, theta: &[f64]) -> RadialFunction {
    let wc = w.clone();
    let dir: Vec<f64> = theta.to_vec();
    let at = move |t: f64| -> f64 {
        let x: Vec<f64> = dir.iter().map(|d| d * t).collect();
        wc.eval(&x)
    };
    // doubling scan for a zero of the profile, then bisection to the edge
    let mut hi = 1.0_f64;
    let mut edge = f64::INFINITY;
    while hi <= 1e6 {
        if at(hi) <= 0.0 {
            let mut lo = hi * 0.5;
            let mut z = hi;
            for _ in 0..80 {
                let mid = 0.5 * (lo + z);
                if at(mid) > 0.0 {
                    lo = mid;
                } else {
                    z = mid;
                }
            }
            edge = z;
            break;
        }
        hi *= 2.0;
    }
    RadialFunction::new(at, (0.0, edge), true, None)
}

/// Radial value of the moment body of an m-dimensional density along theta:
/// `rho(theta) = (q int_0^inf t^{q-1} w(t theta) dt)^{1/q}`.
pub fn kq_radial(w: &Density, q: f64, theta: &[f64], rel_tol: f64) -> Result<(f64, f64)> {
    if q < 1.0 {
        return Err(Error::MomentOrderOutOfRange { p: q, min_p: 1.0 });
    }
    let origin = vec![0.0; w.dim];
    if w.eval(&origin) <= 0.0 {
        return Err(Error::DensityZeroAtOrigin);
    }
    let ray = ray_profile(w, theta);
    let m = radial_moment(&ray, q - 1.0, rel_tol)?;
    let rho = (q * m.value).powf(1.0 / q);
    let err = if m.value > 0.0 { rho * m.abs_error_estimate / (q * m.value) } else { 0.0 };
    Ok((rho, err))
}

/// The moment body `K_q(w)` as a radial oracle (adaptive ray quadrature).
pub fn kq_body(w: Density, q: f64, rel_tol: f64) -> Result<StarBodyOracle> {
    let origin = vec![0.0; w.dim];
    if w.eval(&origin) <= 0.0 {
        return Err(Error::DensityZeroAtOrigin);
    }
    let dim = w.dim;
    Ok(StarBodyOracle::from_radial(dim, move |theta: &[f64]| {
        kq_radial(&w, q, theta, rel_tol).expect("ray quadrature")
    }))
}

/// Worst triangle-inequality slack `||x+y|| - ||x|| - ||y||` over sampled
/// pairs; at most ~3 propagated stderr for a genuine norm.
pub fn triangle_inequality_check(
    oracle: &StarBodyOracle,
    pair_count: usize,
    seed: u64,
) -> Result<f64> {
    let dim = oracle.dim;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..pair_count {
        let mut rng = stream_rng(seed, Purpose::Pairs, i as u64);
        let x: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let y: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let (nx, ex) = oracle.norm(&x)?;
        let (ny, ey) = oracle.norm(&y)?;
        let (ns, es) = oracle.norm(&s)?;
        let slack = ns - nx - ny - 3.0 * (ex + ey + es);
        worst = worst.max(slack);
    }
    Ok(worst)
}

/// Geometric distance to the Euclidean ball from finitely many directions
/// (a lower-bound estimate of the true distance).
#[derive(Debug, Clone, Serialize)]
pub struct DistanceEstimate {
    pub ratio: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub n_directions: usize,
}

pub fn dist_to_ball(oracle: &StarBodyOracle, dirs: &DirectionSet) -> Result<DistanceEstimate> {
    if dirs.dirs.len() < 2 * oracle.dim {
        return Err(Error::Invalid(format!(
            "need at least {} directions, got {}",
            2 * oracle.dim,
            dirs.dirs.len()
        )));
    }
    let use_radial = oracle.has_radial();
    let mut r_min = f64::INFINITY;
    let mut r_max: f64 = 0.0;
    for (i, d) in dirs.dirs.iter().enumerate() {
        let (v, _) = if use_radial { oracle.radial(d)? } else { oracle.support(d)? };
        if v <= 0.0 {
            return Err(Error::NonPositiveRadial { value: v, index: i });
        }
        r_min = r_min.min(v);
        r_max = r_max.max(v);
    }
    Ok(DistanceEstimate { ratio: r_max / r_min, r_min, r_max, n_directions: dirs.dirs.len() })
}

/// Direction-wise inclusion constants between two bodies sharing an
/// evaluator kind: `c1 = min ratio`, `c2 = max ratio`, so that
/// `c1 L c K c c2 L` over the scanned directions within error bars.
#[derive(Debug, Clone, Serialize)]
pub struct InclusionReport {
    pub relation_id: String,
    pub instance: String,
    pub q_label: String,
    pub c1: f64,
    pub c2: f64,
    pub c1_err: f64,
    pub c2_err: f64,
    pub verdict: bool,
    pub notes: String,
}

pub fn inclusion_constants(
    k_body: &StarBodyOracle,
    l_body: &StarBodyOracle,
    dirs: &DirectionSet,
    relation_id: &str,
    instance: &str,
) -> Result<InclusionReport> {
    if k_body.dim != l_body.dim {
        return Err(Error::DimensionMismatch { expected: k_body.dim, got: l_body.dim });
    }
    let kind = match (k_body.has_radial() && l_body.has_radial(),
                      k_body.has_support() && l_body.has_support()) {
        (true, _) => true,
        (false, true) => false,
        _ => return Err(Error::EvaluatorKindMismatch),
    };
    let mut c1 = f64::INFINITY;
    let mut c2: f64 = 0.0;
    let (mut c1e, mut c2e) = (0.0, 0.0);
    for d in &dirs.dirs {
        let ((vk, ek), (vl, el)) = if kind {
            (k_body.radial(d)?, l_body.radial(d)?)
        } else {
            (k_body.support(d)?, l_body.support(d)?)
        };
        let ratio = vk / vl;
        let err = ratio * (ek / vk.max(1e-300) + el / vl.max(1e-300));
        if ratio < c1 {
            c1 = ratio;
            c1e = err;
        }
        if ratio > c2 {
            c2 = ratio;
            c2e = err;
        }
    }
    Ok(InclusionReport {
        relation_id: relation_id.into(),
        instance: instance.into(),
        q_label: String::new(),
        c1,
        c2,
        c1_err: c1e,
        c2_err: c2e,
        verdict: c1 <= c2 && c1 > 0.0,
        notes: format!("{} directions ({})", dirs.dirs.len(), dirs.generation),
    })
}

/// Fraction `vol(K cap H_theta^+) / vol(K)` by the polar radial formula
/// `vol(K cap H^+) = (1/m) int_{S^{m-1} cap H^+} rho^m`.
pub fn halfspace_fraction(oracle: &StarBodyOracle, theta: &[f64]) -> Result<f64> {
    let m = oracle.dim;
    let grid = sphere_grid(m, 2048)?;
    let mut vol_plus = 0.0;
    let mut vol = 0.0;
    for (xi, w) in grid.points.iter().zip(&grid.weights) {
        let (rho, _) = oracle.radial(xi)?;
        let cell = w * rho.powi(m as i32) / m as f64;
        vol += cell;
        let dot: f64 = xi.iter().zip(theta).map(|(a, b)| a * b).sum();
        if dot >= 0.0 {
            vol_plus += cell;
        }
    }
    if vol <= 0.0 {
        return Err(Error::ZeroTotalMass);
    }
    Ok(vol_plus / vol)
}

/// Volume of a radial body by the polar formula.
pub fn body_volume(oracle: &StarBodyOracle, resolution: usize) -> Result<f64> {
    let m = oracle.dim;
    let grid = sphere_grid(m, resolution)?;
    let mut vol = 0.0;
    for (xi, w) in grid.points.iter().zip(&grid.weights) {
        let (rho, _) = oracle.radial(xi)?;
        vol += w * rho.powi(m as i32) / m as f64;
    }
    Ok(vol)
}

/// Support function reconstructed from cached radial values over a sphere
/// grid: `h(theta) = max_xi <xi, theta> rho(xi)`.
pub fn support_from_radial(theta: &[f64], grid: &SphereGrid, rho_cache: &[f64]) -> f64 {
    let mut h = f64::NEG_INFINITY;
    for (xi, &rho) in grid.points.iter().zip(rho_cache) {
        let dot: f64 = xi.iter().zip(theta).map(|(a, b)| a * b).sum();
        h = h.max(dot * rho);
    }
    h
}

/// Radial oracle interpolating cached values on the uniform circle grid
/// (dim 2); avoids re-running ray quadrature inside inner loops.
pub fn interp_radial_oracle_2d(rho_cache: Vec<f64>) -> StarBodyOracle {
    let k = rho_cache.len();
    StarBodyOracle::from_radial(2, move |theta: &[f64]| {
        let two_pi = 2.0 * std::f64::consts::PI;
        let phi = theta[1].atan2(theta[0]).rem_euclid(two_pi);
        let pos = phi / two_pi * k as f64 - 0.5;
        let j0 = pos.floor();
        let frac = pos - j0;
        let i0 = (j0 as i64).rem_euclid(k as i64) as usize;
        let i1 = (i0 + 1) % k;
        (rho_cache[i0] * (1.0 - frac) + rho_cache[i1] * frac, 0.0)
    })
}

/// Support of the one-sided centroid body of a radial body K by the polar
/// formula `h^q = 2/(m+q) int_{S^{m-1}} <xi, theta>_+^q rho(xi)^{m+q}`.
pub fn zq_plus_support_of_body(
    theta: &[f64],
    q: f64,
    m: usize,
    grid: &SphereGrid,
    rho_cache: &[f64],
) -> f64 {
    let mut acc = 0.0;
    for ((xi, w), &rho) in grid.points.iter().zip(&grid.weights).zip(rho_cache) {
        let dot: f64 = xi.iter().zip(theta).map(|(a, b)| a * b).sum();
        if dot > 0.0 {
            acc += w * dot.powf(q) * rho.powf(m as f64 + q);
        }
    }
    (2.0 * acc / (m as f64 + q)).powf(1.0 / q)
}

/// Support of the one-sided centroid body of a density by polar quadrature:
/// `h^q = 2 int_{S^{m-1}} <xi, theta>_+^q int_0^inf t^{m+q-1} w(t xi) dt`,
/// with the inner radial integrals precomputed in `radial_cache`.
pub fn zq_plus_support_density(
    theta: &[f64],
    q: f64,
    grid: &SphereGrid,
    radial_cache: &[f64],
) -> f64 {
    let mut acc = 0.0;
    for ((xi, wt), &rm) in grid.points.iter().zip(&grid.weights).zip(radial_cache) {
        let dot: f64 = xi.iter().zip(theta).map(|(a, b)| a * b).sum();
        if dot > 0.0 {
            acc += wt * dot.powf(q) * rm;
        }
    }
    (2.0 * acc).powf(1.0 / q)
}

/// Cache of `int_0^inf t^{m+q-1} w(t xi) dt` per grid point.
pub fn radial_moment_cache(
    w: &Density,
    q_plus_m_minus_1: f64,
    grid: &SphereGrid,
    rel_tol: f64,
) -> Result<Vec<f64>> {
    let mut cache = Vec::with_capacity(grid.points.len());
    for xi in &grid.points {
        let ray = ray_profile(w, xi);
        cache.push(radial_moment(&ray, q_plus_m_minus_1, rel_tol)?.value);
    }
    Ok(cache)
}

// ---------------------------------------------------------------------------
// Relation catalogue
// ---------------------------------------------------------------------------

/// The body-inclusion relations the laboratory can verify numerically.
/// Constant-free parts are asserted hard (the report's `verdict`); parts
/// with unspecified universal constants report fitted values in `c1`/`c2`.
#[derive(Debug, Clone)]
pub enum RelationCase {
    /// Monotone chain of symmetric centroid bodies: the left inclusion is
    /// constant-free, the right holds with some universal factor times
    /// q2/q1.
    ZqChain { batch: Arc<SampleBatch>, q1: f64, q2: f64 },
    /// One-sided variant with the explicit (2/e) and (2e-2)/e factors.
    ZqPlusChain { batch: Arc<SampleBatch>, q1: f64, q2: f64 },
    /// Moment-body chain with w(0)-normalization; both sides constant-free.
    KqChain { w: Density, q1: f64, q2: f64 },
    /// The polar-coordinates identity: the one-sided centroid body of the
    /// (m+q)-moment body of w equals the one-sided centroid body of w.
    ZkIdentity { w: Density, q: f64 },
    /// Volume sandwich between the scaled moment body and its one-sided
    /// centroid body.
    Sandwich { w: Density, q: f64 },
    /// After convolving with a Gaussian, the one-sided centroid body
    /// contains an explicit multiple of the ball and is contained in a
    /// fitted multiple.
    AddGaussian { y: Arc<SampleBatch>, q: f64, a_op: f64, b_alpha: f64, alpha: f64 },
    /// Distance of the convolved one-sided centroid body to the ball,
    /// against the `1 + |A|_op b q^{1/alpha - 1/2}` form.
    CorDist { y: Arc<SampleBatch>, q: f64, a_op: f64, b_alpha: f64, alpha: f64 },
    /// Distance transfer from the moment body to the one-sided centroid
    /// body: `dist(K_{m+p}, B) <= C max(m/(m+p), 1) dist(Z^+_{max(p,m)}, B)`.
    DistBound { w: Density, p: f64 },
    /// For isotropic log-concave densities the 2nd one-sided centroid body
    /// contains an explicit ball.
    Z2Plus { batch: Arc<SampleBatch> },
    /// Marginal-at-zero bounds relating the support of the one-sided
    /// centroid body of a convex body to the body's own support.
    MarginalBounds { w: Density, q: f64 },
    /// Halfspace volume fraction of the moment body stays bounded below.
    HalfspaceMass { w: Density, q: f64 },
}

impl RelationCase {
    pub fn relation_id(&self) -> &'static str {
        match self {
            RelationCase::ZqChain { .. } => "zq-chain",
            RelationCase::ZqPlusChain { .. } => "zqplus-chain",
            RelationCase::KqChain { .. } => "kq-chain",
            RelationCase::ZkIdentity { .. } => "zk-identity",
            RelationCase::Sandwich { .. } => "sandwich",
            RelationCase::AddGaussian { .. } => "add-gaussian",
            RelationCase::CorDist { .. } => "cor-dist",
            RelationCase::DistBound { .. } => "dist-bound",
            RelationCase::Z2Plus { .. } => "z2plus",
            RelationCase::MarginalBounds { .. } => "marginal-bounds",
            RelationCase::HalfspaceMass { .. } => "halfspace-mass",
        }
    }
}

const GRID_RES: usize = 1024;
const QUAD_TOL: f64 = 1e-9;

pub fn verify_relation(case: &RelationCase, dirs: &DirectionSet) -> Result<InclusionReport> {
    match case {
        RelationCase::ZqChain { batch, q1, q2 } => zq_chain(batch, *q1, *q2, dirs, false),
        RelationCase::ZqPlusChain { batch, q1, q2 } => zq_chain(batch, *q1, *q2, dirs, true),
        RelationCase::KqChain { w, q1, q2 } => kq_chain(w, *q1, *q2, dirs),
        RelationCase::ZkIdentity { w, q } => zk_identity(w, *q),
        RelationCase::Sandwich { w, q } => sandwich(w, *q),
        RelationCase::AddGaussian { y, q, a_op, b_alpha, alpha } => {
            add_gaussian(y, *q, *a_op, *b_alpha, *alpha, dirs)
        }
        RelationCase::CorDist { y, q, a_op, b_alpha, alpha } => {
            cor_dist(y, *q, *a_op, *b_alpha, *alpha, dirs)
        }
        RelationCase::DistBound { w, p } => dist_bound(w, *p),
        RelationCase::Z2Plus { batch } => z2plus(batch, dirs),
        RelationCase::MarginalBounds { w, q } => marginal_bounds(w, *q),
        RelationCase::HalfspaceMass { w, q } => halfspace_mass(w, *q),
    }
}

fn zq_chain(
    batch: &SampleBatch,
    q1: f64,
    q2: f64,
    dirs: &DirectionSet,
    one_sided: bool,
) -> Result<InclusionReport> {
    if q2 < q1 || q1 < 1.0 {
        return Err(Error::UnsupportedRelation(format!("need 1 <= q1 <= q2, got {q1}, {q2}")));
    }
    let left_factor = if one_sided {
        (2.0 / std::f64::consts::E).powf(1.0 / q1 - 1.0 / q2)
    } else {
        1.0
    };
    let right_factor = if one_sided {
        ((2.0 * std::f64::consts::E - 2.0) / std::f64::consts::E).powf(1.0 / q1 - 1.0 / q2)
            * (q2 / q1)
    } else {
        q2 / q1
    };
    let mut left_ok = true;
    let mut min_ratio = f64::INFINITY;
    let mut fitted_c: f64 = 0.0;
    let mut fit_err = 0.0;
    for d in &dirs.dirs {
        let (h1, e1) = if one_sided {
            zq_plus_support_mc(batch, q1, d)?
        } else {
            zq_support_mc(batch, q1, d)?
        };
        let (h2, e2) = if one_sided {
            zq_plus_support_mc(batch, q2, d)?
        } else {
            zq_support_mc(batch, q2, d)?
        };
        // constant-free left inclusion: left_factor * h1 <= h2 within 3 se
        if left_factor * h1 > h2 + 3.0 * (e1 * left_factor + e2) {
            left_ok = false;
        }
        min_ratio = min_ratio.min(h2 / h1);
        let c = h2 / (h1 * right_factor);
        if c > fitted_c {
            fitted_c = c;
            fit_err = c * (e1 / h1 + e2 / h2);
        }
    }
    Ok(InclusionReport {
        relation_id: if one_sided { "zqplus-chain" } else { "zq-chain" }.into(),
        instance: batch.spec.family.name().into(),
        q_label: format!("q1={q1},q2={q2}"),
        c1: min_ratio,
        c2: fitted_c,
        c1_err: 0.0,
        c2_err: fit_err,
        verdict: left_ok,
        notes: format!(
            "left factor {left_factor:.6}, right normalization {right_factor:.6}; fitted C = {fitted_c:.4}"
        ),
    })
}

fn kq_chain(w: &Density, q1: f64, q2: f64, dirs: &DirectionSet) -> Result<InclusionReport> {
    if q2 < q1 || q1 < 1.0 {
        return Err(Error::UnsupportedRelation(format!("need 1 <= q1 <= q2, got {q1}, {q2}")));
    }
    let m = w.dim as f64;
    let w0 = w.eval(&vec![0.0; w.dim]);
    if w0 <= 0.0 {
        return Err(Error::DensityZeroAtOrigin);
    }
    let left = (-m * (1.0 / q1 - 1.0 / q2)).exp();
    let right = (log_gamma(q2 + 1.0) / q2 - log_gamma(q1 + 1.0) / q1).exp();
    let mut ok = true;
    let mut worst_left = f64::INFINITY;
    let mut worst_right: f64 = 0.0;
    for d in &dirs.dirs {
        let (r1, e1) = kq_radial(w, q1, d, QUAD_TOL)?;
        let (r2, e2) = kq_radial(w, q2, d, QUAD_TOL)?;
        // normalized radii rho_q / w(0)^{1/q}
        let n1 = r1 / w0.powf(1.0 / q1);
        let n2 = r2 / w0.powf(1.0 / q2);
        let tol = 3.0 * (e1 / r1 + e2 / r2) * n2 + 1e-9 * n2;
        if left * n1 > n2 + tol || n2 > right * n1 + tol * right.max(1.0) {
            ok = false;
        }
        worst_left = worst_left.min(n2 / n1);
        worst_right = worst_right.max(n2 / n1);
    }
    Ok(InclusionReport {
        relation_id: "kq-chain".into(),
        instance: w.label.clone(),
        q_label: format!("q1={q1},q2={q2}"),
        c1: worst_left,
        c2: worst_right,
        c1_err: 0.0,
        c2_err: 0.0,
        verdict: ok,
        notes: format!("constant-free window [{left:.6}, {right:.6}] on normalized radii"),
    })
}

fn zk_identity(w: &Density, q: f64) -> Result<InclusionReport> {
    let m = w.dim;
    if m > 3 {
        return Err(Error::UnsupportedRelation("zk-identity quadrature path needs m <= 3".into()));
    }
    let grid = sphere_grid(m, GRID_RES)?;
    // rho of K_{m+q}(w) on the grid
    let mq = m as f64 + q;
    let mut rho = Vec::with_capacity(grid.points.len());
    for xi in &grid.points {
        let (r, _) = kq_radial(w, mq, xi, QUAD_TOL)?;
        rho.push(r);
    }
    // moment cache for the density side
    let cache = radial_moment_cache(w, mq - 1.0, &grid, QUAD_TOL)?;
    let dirs = match m {
        1 => DirectionSet { dirs: vec![vec![1.0], vec![-1.0]], generation: "signs".into() },
        _ => DirectionSet::circle_grid(64),
    };
    let mut worst_rel = 0.0_f64;
    for d in &dirs.dirs {
        let lhs = zq_plus_support_of_body(d, q, m, &grid, &rho);
        let rhs = zq_plus_support_density(d, q, &grid, &cache);
        worst_rel = worst_rel.max((lhs - rhs).abs() / rhs.abs().max(1e-300));
    }
    Ok(InclusionReport {
        relation_id: "zk-identity".into(),
        instance: w.label.clone(),
        q_label: format!("q={q}"),
        c1: 1.0 - worst_rel,
        c2: 1.0 + worst_rel,
        c1_err: 0.0,
        c2_err: 0.0,
        verdict: worst_rel < 1e-6,
        notes: format!("max relative discrepancy {worst_rel:.3e}"),
    })
}

fn sandwich(w: &Density, q: f64) -> Result<InclusionReport> {
    let m = w.dim;
    if m > 3 {
        return Err(Error::UnsupportedRelation("sandwich quadrature path needs m <= 3".into()));
    }
    let grid = sphere_grid(m, GRID_RES)?;
    let mq = m as f64 + q;
    let mut rho = Vec::with_capacity(grid.points.len());
    for xi in &grid.points {
        rho.push(kq_radial(w, mq, xi, QUAD_TOL)?.0);
    }
    let vol: f64 = grid
        .weights
        .iter()
        .zip(&rho)
        .map(|(wt, r)| wt * r.powi(m as i32) / m as f64)
        .sum();
    let dirs = match m {
        1 => DirectionSet { dirs: vec![vec![1.0], vec![-1.0]], generation: "signs".into() },
        _ => DirectionSet::circle_grid(128),
    };
    let mut r_min = f64::INFINITY;
    let mut r_max: f64 = 0.0;
    for d in &dirs.dirs {
        let h_k = support_from_radial(d, &grid, &rho);
        let h_z = zq_plus_support_of_body(d, q, m, &grid, &rho);
        let r = vol.powf(1.0 / q) * h_k / h_z;
        r_min = r_min.min(r);
        r_max = r_max.max(r);
    }
    let gamma_fac =
        ((log_gamma(m as f64 + q + 1.0) - log_gamma(m as f64) - log_gamma(q + 1.0)) / q).exp();
    Ok(InclusionReport {
        relation_id: "sandwich".into(),
        instance: w.label.clone(),
        q_label: format!("q={q}"),
        c1: r_min,
        c2: r_max,
        c1_err: 0.0,
        c2_err: 0.0,
        verdict: r_min > 0.0 && r_max.is_finite(),
        notes: format!(
            "fitted C2/C1 = {:.4}; scale-free normalization (Gamma(m+q+1)/(Gamma(m)Gamma(q+1)))^(1/q) = {gamma_fac:.4}",
            r_max / r_min
        ),
    })
}

fn add_gaussian(
    y: &SampleBatch,
    q: f64,
    a_op: f64,
    b_alpha: f64,
    alpha: f64,
    dirs: &DirectionSet,
) -> Result<InclusionReport> {
    // explicit floor from the proof: h^q >= E|G_1|^q / (e 2^{q/2}), i.e.
    // h >= (Gamma((q+1)/2) / (sqrt(pi) e))^{1/q}
    let floor = ((log_gamma(0.5 * (q + 1.0)) - 0.5 * std::f64::consts::PI.ln() - 1.0) / q).exp();
    let mut ok = true;
    let mut fitted_c = f64::INFINITY;
    let mut fitted_upper: f64 = 0.0;
    for d in &dirs.dirs {
        let (h, se) = zq_plus_support_mc(y, q, d)?;
        if h < floor - 3.0 * se {
            ok = false;
        }
        fitted_c = fitted_c.min(h / q.sqrt());
        fitted_upper = fitted_upper.max(h / (a_op * b_alpha * q.powf(1.0 / alpha) + q.sqrt()));
    }
    Ok(InclusionReport {
        relation_id: "add-gaussian".into(),
        instance: y.spec.family.name().into(),
        q_label: format!("q={q}"),
        c1: fitted_c,
        c2: fitted_upper,
        c1_err: 0.0,
        c2_err: 0.0,
        verdict: ok,
        notes: format!(
            "explicit floor {floor:.4}; fitted c (ball radius / sqrt q) = {fitted_c:.4}, fitted C (upper form) = {fitted_upper:.4}"
        ),
    })
}

fn cor_dist(
    y: &SampleBatch,
    q: f64,
    a_op: f64,
    b_alpha: f64,
    alpha: f64,
    dirs: &DirectionSet,
) -> Result<InclusionReport> {
    let mut h_min = f64::INFINITY;
    let mut h_max: f64 = 0.0;
    for d in &dirs.dirs {
        let (h, _) = zq_plus_support_mc(y, q, d)?;
        h_min = h_min.min(h);
        h_max = h_max.max(h);
    }
    let dist = h_max / h_min;
    let form = 1.0 + a_op * b_alpha * q.powf(1.0 / alpha - 0.5);
    Ok(InclusionReport {
        relation_id: "cor-dist".into(),
        instance: y.spec.family.name().into(),
        q_label: format!("q={q}"),
        c1: dist,
        c2: dist / form,
        c1_err: 0.0,
        c2_err: 0.0,
        verdict: dist.is_finite() && dist >= 1.0,
        notes: format!("distance estimate {dist:.4}; fitted C1 = dist / (1 + |A|op b q^(1/a-1/2)) = {:.4}", dist / form),
    })
}

fn dist_bound(w: &Density, p: f64) -> Result<InclusionReport> {
    let m = w.dim;
    if m > 3 {
        return Err(Error::UnsupportedRelation("dist-bound quadrature path needs m <= 3".into()));
    }
    if p < -(m as f64) + 1.0 {
        return Err(Error::MomentOrderOutOfRange { p, min_p: -(m as f64) + 1.0 });
    }
    let grid = sphere_grid(m, GRID_RES)?;
    let mp = m as f64 + p;
    let mut rho = Vec::with_capacity(grid.points.len());
    for xi in &grid.points {
        rho.push(kq_radial(w, mp, xi, QUAD_TOL)?.0);
    }
    let lhs = {
        let mx = rho.iter().cloned().fold(0.0_f64, f64::max);
        let mn = rho.iter().cloned().fold(f64::INFINITY, f64::min);
        mx / mn
    };
    // distance of the one-sided centroid body of w to the ball
    let qz = p.max(m as f64);
    let cache = radial_moment_cache(w, m as f64 + qz - 1.0, &grid, QUAD_TOL)?;
    let dirs = match m {
        1 => vec![vec![1.0], vec![-1.0]],
        _ => DirectionSet::circle_grid(128).dirs,
    };
    let mut h_min = f64::INFINITY;
    let mut h_max: f64 = 0.0;
    for d in &dirs {
        let h = zq_plus_support_density(d, qz, &grid, &cache);
        h_min = h_min.min(h);
        h_max = h_max.max(h);
    }
    let rhs = h_max / h_min;
    let shape = (m as f64 / (m as f64 + p)).max(1.0);
    let fitted = lhs / (shape * rhs);
    Ok(InclusionReport {
        relation_id: "dist-bound".into(),
        instance: w.label.clone(),
        q_label: format!("p={p}"),
        c1: lhs,
        c2: fitted,
        c1_err: 0.0,
        c2_err: 0.0,
        verdict: lhs.is_finite() && rhs.is_finite(),
        notes: format!(
            "dist(K_(m+p)) = {lhs:.4}, dist(Z+_max(p,m)) = {rhs:.4}, fitted C = {fitted:.4}"
        ),
    })
}

fn z2plus(batch: &SampleBatch, dirs: &DirectionSet) -> Result<InclusionReport> {
    // explicit constant from the two-sided comparison of half-line moments
    let e = std::f64::consts::E;
    let floor = 1.0 / (3.0 * e * e * (1.0 + (e - 1.0).powi(3))).sqrt();
    let mut ok = true;
    let mut fitted = f64::INFINITY;
    for d in &dirs.dirs {
        let (h, se) = zq_plus_support_mc(batch, 2.0, d)?;
        if h < floor - 3.0 * se {
            ok = false;
        }
        fitted = fitted.min(h);
    }
    Ok(InclusionReport {
        relation_id: "z2plus".into(),
        instance: batch.spec.family.name().into(),
        q_label: "q=2".into(),
        c1: fitted,
        c2: floor,
        c1_err: 0.0,
        c2_err: 0.0,
        verdict: ok,
        notes: format!("explicit floor {floor:.6}, observed min support {fitted:.4}"),
    })
}

/// Chord-length marginal of a convex radial body along theta at offset s,
/// by bisection on the gauge (the section of a convex body is an interval).
fn chord_length(oracle: &StarBodyOracle, theta: &[f64], s: f64, r_cap: f64) -> Result<f64> {
    debug_assert_eq!(oracle.dim, 2);
    let perp = [-theta[1], theta[0]];
    let inside = |r: f64| -> Result<bool> {
        let x = [s * theta[0] + r * perp[0], s * theta[1] + r * perp[1]];
        Ok(oracle.norm(&x)?.0 <= 1.0)
    };
    // find an interior point by coarse scan
    let scan = 128;
    let mut seed_r = None;
    for i in 0..=scan {
        let r = -r_cap + 2.0 * r_cap * i as f64 / scan as f64;
        if inside(r)? {
            seed_r = Some(r);
            break;
        }
    }
    let Some(r0) = seed_r else {
        return Ok(0.0);
    };
    let bisect = |mut lo: f64, mut hi: f64| -> Result<f64> {
        // invariant: inside(lo), not inside(hi)
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if inside(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let hi = bisect(r0, r_cap + 1.0)?;
    let lo = bisect(r0, -r_cap - 1.0)?;
    Ok((hi - lo).abs())
}

fn marginal_bounds(w: &Density, q: f64) -> Result<InclusionReport> {
    let m = w.dim;
    if m != 2 {
        return Err(Error::UnsupportedRelation("marginal-bounds implemented for m = 2".into()));
    }
    let grid = sphere_grid(m, GRID_RES)?;
    let mq = m as f64 + q;
    let mut rho = Vec::with_capacity(grid.points.len());
    for xi in &grid.points {
        rho.push(kq_radial(w, mq, xi, QUAD_TOL)?.0);
    }
    let r_cap = rho.iter().cloned().fold(0.0_f64, f64::max) * 1.2;
    let body = interp_radial_oracle_2d(rho.clone());
    let gamma_term =
        ((log_gamma(m as f64) + log_gamma(q + 1.0) - log_gamma(m as f64 + q + 1.0)) / q).exp();
    let vol: f64 =
        grid.weights.iter().zip(&rho).map(|(wt, r)| wt * r.powi(m as i32) / m as f64).sum();
    let dirs = DirectionSet::circle_grid(16);
    let mut ok = true;
    let mut worst_low = f64::INFINITY;
    let mut worst_high: f64 = 0.0;
    for d in &dirs.dirs {
        let h_k = support_from_radial(d, &grid, &rho);
        let h_z = zq_plus_support_of_body(d, q, m, &grid, &rho);
        let frac = halfspace_fraction_cached(&grid, &rho, d, m);
        let vol_plus = frac * vol;
        // f_theta(0) and sup f_theta by chord lengths
        let f0 = chord_length(&body, d, 0.0, r_cap)?;
        let mut sup_f: f64 = 0.0;
        let h_minus = support_from_radial(&[-d[0], -d[1]], &grid, &rho);
        let steps = 64;
        for i in 0..=steps {
            let s = -h_minus + (h_k + h_minus) * i as f64 / steps as f64;
            sup_f = sup_f.max(chord_length(&body, d, s, r_cap)?);
        }
        let middle = h_z / (2.0 * vol_plus).powf(1.0 / q);
        let low = (f0 / sup_f).powf(1.0 / q) * gamma_term * h_k;
        // both constant-free inequalities, with quadrature slack
        let tol = 2e-3 * h_k;
        if middle > h_k + tol || low > middle + tol {
            ok = false;
        }
        worst_low = worst_low.min(middle / h_k);
        worst_high = worst_high.max(low / middle);
    }
    Ok(InclusionReport {
        relation_id: "marginal-bounds".into(),
        instance: w.label.clone(),
        q_label: format!("q={q}"),
        c1: worst_low,
        c2: worst_high,
        c1_err: 0.0,
        c2_err: 0.0,
        verdict: ok,
        notes: "middle/h_K in (0,1], lower/middle <= 1 direction-wise".into(),
    })
}

fn halfspace_fraction_cached(grid: &SphereGrid, rho: &[f64], theta: &[f64], m: usize) -> f64 {
    let mut vol_plus = 0.0;
    let mut vol = 0.0;
    for ((xi, w), &r) in grid.points.iter().zip(&grid.weights).zip(rho) {
        let cell = w * r.powi(m as i32) / m as f64;
        vol += cell;
        let dot: f64 = xi.iter().zip(theta).map(|(a, b)| a * b).sum();
        if dot >= 0.0 {
            vol_plus += cell;
        }
    }
    vol_plus / vol
}

fn halfspace_mass(w: &Density, q: f64) -> Result<InclusionReport> {
    let m = w.dim;
    if m > 3 {
        return Err(Error::UnsupportedRelation("halfspace-mass needs m <= 3".into()));
    }
    let grid = sphere_grid(m, GRID_RES)?;
    let mq = m as f64 + q;
    let mut rho = Vec::with_capacity(grid.points.len());
    for xi in &grid.points {
        rho.push(kq_radial(w, mq, xi, QUAD_TOL)?.0);
    }
    let dirs = match m {
        1 => vec![vec![1.0], vec![-1.0]],
        _ => DirectionSet::circle_grid(32).dirs,
    };
    let mut fitted = f64::INFINITY;
    for d in &dirs {
        let frac = halfspace_fraction_cached(&grid, &rho, d, m);
        fitted = fitted.min(frac.powf(1.0 / q));
    }
    Ok(InclusionReport {
        relation_id: "halfspace-mass".into(),
        instance: w.label.clone(),
        q_label: format!("q={q}"),
        c1: fitted,
        c2: 1.0,
        c1_err: 0.0,
        c2_err: 0.0,
        verdict: fitted > 0.0,
        notes: format!("fitted c = min_theta (vol fraction)^(1/q) = {fitted:.4}"),
    })
}

/// Delta-method standard error of `(mean z)^{1/q}`-type supports, exposed
/// for joint tests.
pub fn support_se(values: &[f64], q: f64) -> f64 {
    let (m, v) = mean_var(values);
    if m <= 0.0 {
        return f64::NAN;
    }
    let h = m.powf(1.0 / q);
    h * (v / values.len() as f64).sqrt() / (q * m)
}

/// Log-space directional moment `(mean |z|^q)^{1/q}` of raw projections.
pub fn directional_moment(proj: &[f64], q: f64) -> f64 {
    let logs: Vec<f64> = proj.iter().map(|z| z.abs().max(1e-300).ln()).collect();
    log_power_mean(&logs, q).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_density, sample};

    fn unit(dim: usize, axis: usize, sign: f64) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[axis] = sign;
        v
    }

    #[test]
    fn gaussian_zq_plus_closed_forms() {
        let spec = make_density(Family::Gaussian, 4, &[]).unwrap();
        let b = sample(&spec, 400_000, 3);
        let theta = unit(4, 1, 1.0);
        // q = 2: 2 E<G,t>_+^2 = E<G,t>^2 = 1
        let (h, se) = zq_plus_support_mc(&b, 2.0, &theta).unwrap();
        assert!((h - 1.0).abs() < 4.0 * se + 0.01, "h2 = {h} (se {se})");
        // q = 4: (2 * 3/2)^{1/4} = 3^{1/4}
        let (h, se) = zq_plus_support_mc(&b, 4.0, &theta).unwrap();
        let want = 3f64.powf(0.25);
        assert!((h - want).abs() < 4.0 * se + 0.02, "h4 = {h} want {want}");
    }

    #[test]
    fn shifted_exponential_zq_plus_quadrature() {
        // q = 1 along +1: 2 int_0^inf t e^{-(t+1)} dt = 2/e
        let w = RadialFunction::shifted_exponential();
        let (h, _) = zq_plus_support_1d(&w, 1.0, true).unwrap();
        assert!((h - 2.0 / std::f64::consts::E).abs() < 1e-9, "{h}");
    }

    #[test]
    fn symmetric_source_one_sided_equals_two_sided() {
        let spec = make_density(Family::ProductLaplace, 3, &[]).unwrap();
        let b = sample(&spec, 200_000, 9);
        let theta = unit(3, 0, 1.0);
        for q in [1.0, 2.0, 4.0] {
            let (hp, sep) = zq_plus_support_mc(&b, q, &theta).unwrap();
            let (hs, ses) = zq_support_mc(&b, q, &theta).unwrap();
            assert!(
                (hp - hs).abs() < 4.0 * (sep + ses) + 0.02 * hs,
                "q={q}: one-sided {hp} vs {hs}"
            );
        }
    }

    #[test]
    fn kq_body_indicator_fixed_point() {
        // K_q(1_K) = K for star-shaped K: the normalization q in front of
        // the ray integral makes indicators fixed points
        let r = 2.0_f64;
        let w_raw = Density::new(2, "ball-indicator", move |x: &[f64]| {
            if x.iter().map(|v| v * v).sum::<f64>() <= r * r {
                1.0
            } else {
                0.0
            }
        });
        for q in [1.0, 2.0, 4.0, 8.0] {
            let (rho, _) = kq_radial(&w_raw, q, &[1.0, 0.0], 1e-10).unwrap();
            assert!((rho - r).abs() < 1e-8, "q={q}: rho = {rho} want {r}");
        }
        // 1-D interval indicator via the density path, all q
        let seg = Density::new(1, "interval", |x: &[f64]| {
            if (-1.0..=1.0).contains(&x[0]) {
                1.0
            } else {
                0.0
            }
        });
        for q in [1.0, 2.0, 4.0, 8.0] {
            let (rho, _) = kq_radial(&seg, q, &[1.0], 1e-10).unwrap();
            assert!((rho - 1.0).abs() < 1e-10, "q={q}: rho = {rho}");
            let (rho, _) = kq_radial(&seg, q, &[-1.0], 1e-10).unwrap();
            assert!((rho - 1.0).abs() < 1e-10, "q={q}: rho- = {rho}");
        }
    }

    #[test]
    fn kq_body_rotation_invariant_exponential() {
        // w = e^{-|x|_2} in R^2: rho_2 = sqrt(2 int_0^inf t e^{-t} dt) = sqrt 2
        let w = Density::new(2, "radial-exponential", |x: &[f64]| {
            (-(x.iter().map(|v| v * v).sum::<f64>().sqrt())).exp()
        });
        for phi in [0.0_f64, 0.7, 2.2] {
            let d = [phi.cos(), phi.sin()];
            let (rho, _) = kq_radial(&w, 2.0, &d, 1e-10).unwrap();
            assert!((rho - 2f64.sqrt()).abs() < 1e-8, "rho({phi}) = {rho}");
        }
    }

    #[test]
    fn kq_body_non_even_for_shifted_exponential() {
        // rho(+e1) = int_0^inf e^{-(t+1)} e^{-1} dt = e^{-2}, while
        // rho(-e1) = int_0^1 e^{t-2} dt = e^{-2}(e - 1): strictly non-even,
        // larger toward the support edge
        let spec = make_density(Family::ProductShiftedExponential, 2, &[]).unwrap();
        let w = Density::from_spec(&spec).unwrap();
        let (rp, _) = kq_radial(&w, 1.0, &[1.0, 0.0], 1e-10).unwrap();
        let (rm, _) = kq_radial(&w, 1.0, &[-1.0, 0.0], 1e-10).unwrap();
        let e2 = (-2.0_f64).exp();
        assert!((rp - e2).abs() < 1e-9, "rho+ = {rp}");
        assert!((rm - e2 * (std::f64::consts::E - 1.0)).abs() < 1e-9, "rho- = {rm}");
        assert!(rm > rp + 0.05, "strictly non-even");
    }

    #[test]
    fn triangle_inequality_for_ball_and_kq() {
        let ball = StarBodyOracle::euclidean_ball(2, 1.0);
        let worst = triangle_inequality_check(&ball, 2000, 4).unwrap();
        assert!(worst <= 1e-12, "ball slack {worst}");
        let w = Density::new(2, "radial-exponential", |x: &[f64]| {
            (-(x.iter().map(|v| v * v).sum::<f64>().sqrt())).exp()
        });
        let body = kq_body(w, 2.0, 1e-9).unwrap();
        let worst = triangle_inequality_check(&body, 2000, 4).unwrap();
        assert!(worst <= 0.0, "norm slack {worst}");
    }

    #[test]
    fn corrupted_oracle_fails_triangle() {
        let spec = make_density(Family::ProductShiftedExponential, 2, &[]).unwrap();
        let w = Density::from_spec(&spec).unwrap();
        let body = kq_body(w, 2.0, 1e-9).unwrap();
        let bad = body.corrupted(0.2, 11).unwrap();
        let worst = triangle_inequality_check(&bad, 2000, 4).unwrap();
        assert!(worst > 0.0, "corruption went undetected (slack {worst})");
    }

    #[test]
    fn dist_to_ball_examples() {
        let ball = StarBodyOracle::euclidean_ball(3, 2.5);
        let dirs = DirectionSet::sampled(3, 64, 5);
        let d = dist_to_ball(&ball, &dirs).unwrap();
        assert!((d.ratio - 1.0).abs() < 1e-12);
        let ell = StarBodyOracle::ellipsoid(vec![2.0, 1.0]);
        let dirs = DirectionSet::axes_and_diagonals(2);
        let d = dist_to_ball(&ell, &dirs).unwrap();
        assert!((d.ratio - 2.0).abs() < 1e-12, "ellipse ratio {}", d.ratio);
        // support oracle of A G with A = diag(2,1): extrema on axes
        let z2 = StarBodyOracle::from_support(2, move |t: &[f64]| {
            (zq_plus_support_gaussian(&[2.0, 1.0], 2.0, t), 0.0)
        });
        let d = dist_to_ball(&z2, &DirectionSet::axes_and_diagonals(2)).unwrap();
        assert!((d.ratio - 2.0).abs() < 1e-10, "Z2 ratio {}", d.ratio);
    }

    #[test]
    fn inclusion_constants_scaled_ball() {
        let k = StarBodyOracle::euclidean_ball(2, 2.0);
        let l = StarBodyOracle::euclidean_ball(2, 1.0);
        let dirs = DirectionSet::sampled(2, 32, 8);
        let rep = inclusion_constants(&k, &l, &dirs, "scaling", "2B vs B").unwrap();
        assert!((rep.c1 - 2.0).abs() < 1e-12 && (rep.c2 - 2.0).abs() < 1e-12);
        let same = inclusion_constants(&l, &l, &dirs, "identity", "B vs B").unwrap();
        assert!((same.c1 - 1.0).abs() < 1e-12 && (same.c2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evaluator_kind_mismatch_detected() {
        let radial_only = StarBodyOracle::from_radial(2, |_: &[f64]| (1.0, 0.0));
        let support_only = StarBodyOracle::from_support(2, |_: &[f64]| (1.0, 0.0));
        let dirs = DirectionSet::sampled(2, 8, 1);
        assert!(matches!(
            inclusion_constants(&radial_only, &support_only, &dirs, "x", "y"),
            Err(Error::EvaluatorKindMismatch)
        ));
    }

    #[test]
    fn halfspace_fraction_examples() {
        let ball = StarBodyOracle::euclidean_ball(2, 1.0);
        let f = halfspace_fraction(&ball, &[0.3, (1.0_f64 - 0.09).sqrt()]).unwrap();
        assert!((f - 0.5).abs() < 1e-3, "ball fraction {f}");
        // K = [-1, 3] in R^1: fraction 3/4 along +1
        let seg = StarBodyOracle::from_radial(1, |t: &[f64]| {
            if t[0] > 0.0 {
                (3.0, 0.0)
            } else {
                (1.0, 0.0)
            }
        });
        let f = halfspace_fraction(&seg, &[1.0]).unwrap();
        assert!((f - 0.75).abs() < 1e-12, "segment fraction {f}");
    }

    #[test]
    fn zk_identity_closed_form_1d() {
        // w = e^{-|t|}: both sides of the identity give h(+1) = 2 at q = 1
        let w = Density::new(1, "two-sided-exponential", |x: &[f64]| (-x[0].abs()).exp());
        let rep = zk_identity(&w, 1.0).unwrap();
        assert!(rep.verdict, "zk-identity residual too large: {}", rep.notes);
        // direct closed-form check of the density side
        let grid = sphere_grid(1, 0).unwrap();
        let cache = radial_moment_cache(&w, 1.0, &grid, 1e-12).unwrap();
        let h = zq_plus_support_density(&[1.0], 1.0, &grid, &cache);
        assert!((h - 2.0).abs() < 1e-9, "h = {h}");
        // and of the body side: K_2(w) = [-sqrt2, sqrt2]
        let mut rho = Vec::new();
        for xi in &grid.points {
            rho.push(kq_radial(&w, 2.0, xi, 1e-12).unwrap().0);
        }
        assert!((rho[0] - 2f64.sqrt()).abs() < 1e-9);
        let hz = zq_plus_support_of_body(&[1.0], 1.0, 1, &grid, &rho);
        assert!((hz - 2.0).abs() < 1e-9, "hz = {hz}");
    }

    #[test]
    fn zq_chain_gaussian_monotone() {
        let spec = make_density(Family::Gaussian, 3, &[]).unwrap();
        let b = Arc::new(sample(&spec, 100_000, 13));
        let dirs = DirectionSet::sampled(3, 16, 2);
        let rep = zq_chain(&b, 2.0, 4.0, &dirs, false).unwrap();
        assert!(rep.verdict, "monotone inclusion failed");
        // the Gaussian ratio h4/h2 = 3^{1/4} in every direction
        assert!((rep.c1 - 3f64.powf(0.25)).abs() < 0.02, "min ratio {}", rep.c1);
    }

    #[test]
    fn halfspace_window_for_shifted_exponential_moment_body() {
        // the (m+q)-moment body of the shifted-exponential product keeps at
        // least e^{-q}/e of its volume in each halfspace through the origin
        let spec = make_density(Family::ProductShiftedExponential, 2, &[]).unwrap();
        let w = Density::from_spec(&spec).unwrap();
        for q in [1.0, 2.0] {
            let mq = 2.0 + q;
            let grid = sphere_grid(2, 1024).unwrap();
            let mut rho = Vec::new();
            for xi in &grid.points {
                rho.push(kq_radial(&w, mq, xi, 1e-9).unwrap().0);
            }
            let body = interp_radial_oracle_2d(rho);
            for theta in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]] {
                let frac = halfspace_fraction(&body, &theta).unwrap();
                let floor = (-q - 1.0_f64).exp();
                assert!(
                    frac >= floor && frac <= 1.0,
                    "q={q} theta={theta:?}: fraction {frac} outside [{floor}, 1]"
                );
            }
        }
    }

    #[test]
    fn all_projections_non_positive_error() {
        let spec = make_density(Family::UniformCube, 1, &[]).unwrap();
        let mut b = sample(&spec, 1000, 2);
        for v in b.values_mut().iter_mut() {
            *v = -v.abs() - 0.1;
        }
        let e = zq_plus_support_mc(&b, 2.0, &[1.0]);
        assert!(matches!(e, Err(Error::AllProjectionsNonPositive)));
    }
}
