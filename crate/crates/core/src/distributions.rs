//! The log-concave zoo: seven isotropic families with exact samplers, plus
//! whitening, Gaussian convolution, psi-alpha estimation and the effective
//! dimension.
//!
//! Every family is normalized in closed form so that a fresh sample has
//! barycenter at the origin and identity covariance. Samplers are pure
//! functions of `(spec, seed, row index)`; see [`crate::rng`].

use crate::error::{Error, Result};
use crate::linalg::{hs_norm, op_norm, sym_inv_sqrt};
use crate::quadrature::adaptive_to_infinity;
use crate::rng::{stream_rng, Purpose};
use crate::special::{gaussian_abs_moment_1d, log_gamma, log_normal_cdf};
use nalgebra::{DMatrix, DVector};
use rand::RngExt;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::io::{Read, Write};

const LAPLACE_SCALE: f64 = std::f64::consts::FRAC_1_SQRT_2; // unit variance
const CUBE_HALF_WIDTH: f64 = 1.7320508075688772; // sqrt(3), unit coordinate variance

/// Rows per work unit when sharding sample generation; fixed so that results
/// are invariant under the rayon worker count.
const SHARD_ROWS: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    Gaussian,
    ProductLaplace,
    ProductShiftedExponential,
    UniformCube,
    UniformBall,
    UniformSimplex,
    GaussianConvolution,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Gaussian,
        Family::ProductLaplace,
        Family::ProductShiftedExponential,
        Family::UniformCube,
        Family::UniformBall,
        Family::UniformSimplex,
        Family::GaussianConvolution,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::ProductLaplace => "product-laplace",
            Family::ProductShiftedExponential => "product-shifted-exponential",
            Family::UniformCube => "uniform-cube",
            Family::UniformBall => "uniform-ball",
            Family::UniformSimplex => "uniform-simplex",
            Family::GaussianConvolution => "gaussian-convolution",
        }
    }

    pub fn parse(s: &str) -> Result<Family> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }

    /// Tail class used in deviation-form fits: 2 for the bounded and
    /// sub-Gaussian members, 1 otherwise.
    pub fn alpha(&self) -> f64 {
        match self {
            Family::Gaussian | Family::UniformCube | Family::UniformBall => 2.0,
            _ => 1.0,
        }
    }
}

/// A member of the zoo: an isotropic log-concave density on R^n with an
/// exact sampler and a pointwise log-density (up to an additive constant).
#[derive(Debug, Clone, Serialize)]
pub struct DensitySpec {
    pub family: Family,
    pub dim: usize,
    pub params: Vec<f64>,
    pub symmetric: bool,
    pub barycenter_zero: bool,
}

pub fn make_density(family: Family, n: usize, params: &[f64]) -> Result<DensitySpec> {
    if n == 0 {
        return Err(Error::InvalidParams {
            family: family.name().into(),
            reason: "dimension must be >= 1".into(),
        });
    }
    if !params.is_empty() {
        return Err(Error::InvalidParams {
            family: family.name().into(),
            reason: format!("family takes no parameters, got {}", params.len()),
        });
    }
    let symmetric =
        !matches!(family, Family::ProductShiftedExponential | Family::UniformSimplex);
    Ok(DensitySpec { family, dim: n, params: params.to_vec(), symmetric, barycenter_zero: true })
}

impl DensitySpec {
    /// Radius putting the uniform ball in isotropic position.
    pub fn ball_radius(&self) -> f64 {
        ((self.dim + 2) as f64).sqrt()
    }

    /// log g(x) up to an additive constant; -inf outside the support.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        match self.family {
            Family::Gaussian => -0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            Family::ProductLaplace => -x.iter().map(|v| v.abs()).sum::<f64>() / LAPLACE_SCALE,
            Family::ProductShiftedExponential => {
                if x.iter().any(|&v| v < -1.0) {
                    f64::NEG_INFINITY
                } else {
                    -x.iter().sum::<f64>()
                }
            }
            Family::UniformCube => {
                if x.iter().all(|v| v.abs() <= CUBE_HALF_WIDTH) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Family::UniformBall => {
                let r2 = x.iter().map(|v| v * v).sum::<f64>();
                if r2 <= self.ball_radius().powi(2) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Family::UniformSimplex => {
                // invert the whitening map and test the simplex constraints
                let n = self.dim as f64;
                let (c1, c2) = simplex_whitening_scales(self.dim);
                let m_y = x.iter().sum::<f64>() / n;
                let mu = 1.0 / (n + 1.0);
                let mut sum = 0.0;
                let mut inside = true;
                for &yi in x {
                    let di = (yi - m_y) / c1 + m_y / c2;
                    let xi = di + mu;
                    sum += xi;
                    if xi < 0.0 {
                        inside = false;
                    }
                }
                if inside && sum <= 1.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Family::GaussianConvolution => {
                x.iter().map(|&v| laplace_gauss_log_density_1d(v)).sum()
            }
        }
    }

    /// Key-value text block round-trippable with [`DensitySpec::from_kv`].
    pub fn to_kv(&self) -> String {
        let mut s = format!("family = {}\ndim = {}\n", self.family.name(), self.dim);
        if !self.params.is_empty() {
            let joined: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
            s.push_str(&format!("params = {}\n", joined.join(",")));
        }
        s
    }

    pub fn from_kv(text: &str) -> Result<DensitySpec> {
        let mut family = None;
        let mut dim = None;
        let mut params: Vec<f64> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("bad key-value line `{line}`")))?;
            match k.trim() {
                "family" => family = Some(Family::parse(v.trim())?),
                "dim" => {
                    dim = Some(
                        v.trim()
                            .parse::<usize>()
                            .map_err(|e| Error::Invalid(format!("bad dim: {e}")))?,
                    )
                }
                "params" => {
                    for piece in v.trim().split(',').filter(|p| !p.is_empty()) {
                        params.push(
                            piece
                                .trim()
                                .parse::<f64>()
                                .map_err(|e| Error::Invalid(format!("bad param: {e}")))?,
                        );
                    }
                }
                other => return Err(Error::Invalid(format!("unknown key `{other}`"))),
            }
        }
        let family = family.ok_or_else(|| Error::Invalid("missing family".into()))?;
        let dim = dim.ok_or_else(|| Error::Invalid("missing dim".into()))?;
        make_density(family, dim, &params)
    }
}

/// Whitening scales for the corner simplex: the inverse square root of the
/// Dirichlet(1,...,1) covariance multiplies the complement of the all-ones
/// direction by `c1` and the all-ones direction by `c2`.
fn simplex_whitening_scales(n: usize) -> (f64, f64) {
    let nf = n as f64;
    let c1 = ((nf + 1.0) * (nf + 2.0)).sqrt();
    let c2 = (nf + 1.0) * (nf + 2.0).sqrt();
    (c1, c2)
}

/// 1-D log-density (up to a constant) of (L + G)/sqrt(2) with L a
/// unit-variance Laplace variable and G standard normal.
pub fn laplace_gauss_log_density_1d(y: f64) -> f64 {
    let s = std::f64::consts::SQRT_2 * y; // density of L + G evaluated at s
    let b = LAPLACE_SCALE;
    // f(s) proportional to e^{-s/b} Phi(s - 1/b) + e^{s/b} Phi(-s - 1/b)
    let t1 = -s / b + log_normal_cdf(s - 1.0 / b);
    let t2 = s / b + log_normal_cdf(-s - 1.0 / b);
    let mx = t1.max(t2);
    mx + ((t1 - mx).exp() + (t2 - mx).exp()).ln()
}

/// Fully normalized 1-D density of the gaussian-convolution coordinate.
pub fn laplace_gauss_density_1d(y: f64) -> f64 {
    let b = LAPLACE_SCALE;
    let log_c = 1.0 / (2.0 * b * b) - (2.0 * b).ln() + 0.5 * std::f64::consts::LN_2;
    (log_c + laplace_gauss_log_density_1d(y)).exp()
}

/// A linear transform with cached norms.
#[derive(Debug, Clone)]
pub struct LinearMap {
    pub matrix: DMatrix<f64>,
    pub hs_norm: f64,
    pub op_norm: f64,
}

impl LinearMap {
    pub fn new(matrix: DMatrix<f64>) -> LinearMap {
        let hs = hs_norm(&matrix);
        let op = op_norm(&matrix);
        LinearMap { matrix, hs_norm: hs, op_norm: op }
    }

    pub fn identity(n: usize) -> LinearMap {
        LinearMap::new(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> LinearMap {
        LinearMap::new(DMatrix::from_diagonal(&DVector::from_row_slice(d)))
    }

    /// Diagonal map with the leading `big_count` entries equal to `big` and
    /// the rest 1, rescaled so the squared HS norm equals the dimension.
    pub fn two_block_unit_hs(n: usize, big_count: usize, big: f64) -> LinearMap {
        let mut d = vec![1.0; n];
        for slot in d.iter_mut().take(big_count) {
            *slot = big;
        }
        let hs2: f64 = d.iter().map(|x| x * x).sum();
        let scale = (n as f64 / hs2).sqrt();
        for slot in d.iter_mut() {
            *slot *= scale;
        }
        LinearMap::from_diagonal(&d)
    }
}

/// N seeded i.i.d. draws in R^n, stored row-major.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    values: Vec<f64>,
    pub n_samples: usize,
    pub dim: usize,
    pub seed: u64,
    pub spec: DensitySpec,
    pub transform: Option<DMatrix<f64>>,
    pub convolved: bool,
}

impl SampleBatch {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[cfg(test)]
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn norms(&self) -> Vec<f64> {
        (0..self.n_samples)
            .map(|i| self.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    /// Projections `<x_i, theta>` for a unit direction.
    pub fn projections(&self, theta: &[f64]) -> Vec<f64> {
        assert_eq!(theta.len(), self.dim);
        (0..self.n_samples)
            .map(|i| self.row(i).iter().zip(theta).map(|(x, t)| x * t).sum())
            .collect()
    }

    pub fn empirical_mean(&self) -> DVector<f64> {
        let mut m = DVector::zeros(self.dim);
        for i in 0..self.n_samples {
            for (j, v) in self.row(i).iter().enumerate() {
                m[j] += v;
            }
        }
        m / self.n_samples as f64
    }

    pub fn empirical_cov(&self) -> DMatrix<f64> {
        let mu = self.empirical_mean();
        let mut c = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.n_samples {
            let r = self.row(i);
            for a in 0..self.dim {
                let da = r[a] - mu[a];
                for b in a..self.dim {
                    c[(a, b)] += da * (r[b] - mu[b]);
                }
            }
        }
        for a in 0..self.dim {
            for b in 0..a {
                c[(a, b)] = c[(b, a)];
            }
        }
        c / self.n_samples as f64
    }

    /// Little-endian f64 row-major dump with a 32-byte header
    /// (magic, N, n, seed).
    pub fn save(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(b"LCZOOB01")?;
        w.write_all(&(self.n_samples as u64).to_le_bytes())?;
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Load values dumped by [`SampleBatch::save`]; the `DensitySpec` must
    /// be supplied by the caller (the header stores only shape and seed).
    pub fn load(r: &mut impl Read, spec: DensitySpec) -> std::io::Result<SampleBatch> {
        let mut header = [0u8; 32];
        r.read_exact(&mut header)?;
        if &header[0..8] != b"LCZOOB01" {
            return Err(std::io::Error::new(std::io::ErrorKind::InvalidData, "bad magic"));
        }
        let n_samples = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
        let dim = u64::from_le_bytes(header[16..24].try_into().unwrap()) as usize;
        let seed = u64::from_le_bytes(header[24..32].try_into().unwrap());
        let mut buf = vec![0u8; n_samples * dim * 8];
        r.read_exact(&mut buf)?;
        let values =
            buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(SampleBatch { values, n_samples, dim, seed, spec, transform: None, convolved: false })
    }
}

fn laplace_draw(rng: &mut ChaCha12Rng) -> f64 {
    let u: f64 = rng.random();
    let centered = u - 0.5;
    let inner = (1.0 - 2.0 * centered.abs()).max(f64::MIN_POSITIVE);
    -LAPLACE_SCALE * centered.signum() * inner.ln()
}

fn sample_row(spec: &DensitySpec, rng: &mut ChaCha12Rng, out: &mut [f64]) {
    let n = spec.dim;
    match spec.family {
        Family::Gaussian => {
            for slot in out.iter_mut() {
                *slot = rng.sample(StandardNormal);
            }
        }
        Family::ProductLaplace => {
            for slot in out.iter_mut() {
                *slot = laplace_draw(rng);
            }
        }
        Family::ProductShiftedExponential => {
            for slot in out.iter_mut() {
                let u: f64 = rng.random();
                *slot = -(1.0 - u).max(f64::MIN_POSITIVE).ln() - 1.0;
            }
        }
        Family::UniformCube => {
            for slot in out.iter_mut() {
                let u: f64 = rng.random();
                *slot = CUBE_HALF_WIDTH * (2.0 * u - 1.0);
            }
        }
        Family::UniformBall => {
            let mut norm2 = 0.0;
            for slot in out.iter_mut() {
                let g: f64 = rng.sample(StandardNormal);
                *slot = g;
                norm2 += g * g;
            }
            let u: f64 = rng.random();
            let scale = spec.ball_radius() * u.powf(1.0 / n as f64) / norm2.sqrt();
            for slot in out.iter_mut() {
                *slot *= scale;
            }
        }
        Family::UniformSimplex => {
            // Dirichlet(1,...,1) via normalized exponentials, then whiten
            let (c1, c2) = simplex_whitening_scales(n);
            let mut total = 0.0;
            for slot in out.iter_mut() {
                let u: f64 = rng.random();
                let e = -(1.0 - u).max(f64::MIN_POSITIVE).ln();
                *slot = e;
                total += e;
            }
            let u: f64 = rng.random();
            total += -(1.0 - u).max(f64::MIN_POSITIVE).ln();
            let mu = 1.0 / (n as f64 + 1.0);
            let mut dbar = 0.0;
            for slot in out.iter_mut() {
                *slot = *slot / total - mu;
                dbar += *slot;
            }
            dbar /= n as f64;
            for slot in out.iter_mut() {
                *slot = c1 * (*slot - dbar) + c2 * dbar;
            }
        }
        Family::GaussianConvolution => {
            for slot in out.iter_mut() {
                let l = laplace_draw(rng);
                let g: f64 = rng.sample(StandardNormal);
                *slot = (l + g) * std::f64::consts::FRAC_1_SQRT_2;
            }
        }
    }
}

/// Draw `n_samples` i.i.d. rows. Bit-for-bit deterministic in
/// `(spec, n_samples, seed)`, independent of the worker count.
pub fn sample(spec: &DensitySpec, n_samples: usize, seed: u64) -> SampleBatch {
    assert!(n_samples >= 1);
    let dim = spec.dim;
    let mut values = vec![0.0_f64; n_samples * dim];
    values.par_chunks_mut(SHARD_ROWS * dim).enumerate().for_each(|(shard, chunk)| {
        let base = shard * SHARD_ROWS;
        for (local, row) in chunk.chunks_mut(dim).enumerate() {
            let mut rng = stream_rng(seed, Purpose::Sample, (base + local) as u64);
            sample_row(spec, &mut rng, row);
        }
    });
    SampleBatch {
        values,
        n_samples,
        dim,
        seed,
        spec: spec.clone(),
        transform: None,
        convolved: false,
    }
}

/// Euclidean norms of fresh rows without materializing the batch; the
/// thin-shell scans use this at large n.
pub fn sample_norms(spec: &DensitySpec, n_samples: usize, seed: u64) -> Vec<f64> {
    let dim = spec.dim;
    let mut norms = vec![0.0_f64; n_samples];
    norms.par_chunks_mut(SHARD_ROWS).enumerate().for_each(|(shard, chunk)| {
        let base = shard * SHARD_ROWS;
        let mut row = vec![0.0_f64; dim];
        for (local, slot) in chunk.iter_mut().enumerate() {
            let mut rng = stream_rng(seed, Purpose::Sample, (base + local) as u64);
            sample_row(spec, &mut rng, &mut row);
            *slot = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        }
    });
    norms
}

/// Whiten a batch by the symmetric inverse square root of its empirical
/// covariance; the output has empirical mean zero and identity covariance
/// up to floating-point error. The whitening map is recorded.
pub fn isotropize(batch: &SampleBatch) -> Result<SampleBatch> {
    if batch.n_samples <= batch.dim {
        return Err(Error::Invalid(format!(
            "need more samples than dimensions to whiten (N = {}, n = {})",
            batch.n_samples, batch.dim
        )));
    }
    let mu = batch.empirical_mean();
    let cov = batch.empirical_cov();
    let w = sym_inv_sqrt(&cov)?;
    let dim = batch.dim;
    let mut values = vec![0.0_f64; batch.n_samples * dim];
    let mut centered = DVector::zeros(dim);
    let mut y = DVector::zeros(dim);
    for i in 0..batch.n_samples {
        let r = batch.row(i);
        for j in 0..dim {
            centered[j] = r[j] - mu[j];
        }
        w.mul_to(&centered, &mut y);
        values[i * dim..(i + 1) * dim].copy_from_slice(y.as_slice());
    }
    Ok(SampleBatch {
        values,
        n_samples: batch.n_samples,
        dim,
        seed: batch.seed,
        spec: batch.spec.clone(),
        transform: Some(w),
        convolved: batch.convolved,
    })
}

/// Rows become `(A x + g) / sqrt(2)` with fresh standard Gaussian noise on a
/// dedicated stream of the batch seed.
pub fn convolve_gaussian(batch: &SampleBatch, a: &LinearMap) -> Result<SampleBatch> {
    let dim = batch.dim;
    if a.matrix.nrows() != dim || a.matrix.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: a.matrix.nrows() });
    }
    let mut values = vec![0.0_f64; batch.n_samples * dim];
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let src = &batch.values;
    values.par_chunks_mut(SHARD_ROWS * dim).enumerate().for_each(|(shard, chunk)| {
        let base = shard * SHARD_ROWS;
        let mut ax = DVector::zeros(dim);
        for (local, out) in chunk.chunks_mut(dim).enumerate() {
            let i = base + local;
            let x = DVector::from_row_slice(&src[i * dim..(i + 1) * dim]);
            a.matrix.mul_to(&x, &mut ax);
            let mut rng = stream_rng(batch.seed, Purpose::ConvolveNoise, i as u64);
            for (j, slot) in out.iter_mut().enumerate() {
                let g: f64 = rng.sample(StandardNormal);
                *slot = (ax[j] + g) * inv_sqrt2;
            }
        }
    });
    Ok(SampleBatch {
        values,
        n_samples: batch.n_samples,
        dim,
        seed: batch.seed,
        spec: batch.spec.clone(),
        transform: Some(a.matrix.clone()),
        convolved: true,
    })
}

/// Rows become `A x` (no noise); used to study `|AX|` directly.
pub fn apply_linear(batch: &SampleBatch, a: &LinearMap) -> Result<SampleBatch> {
    let dim = batch.dim;
    if a.matrix.nrows() != dim || a.matrix.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: a.matrix.nrows() });
    }
    let mut values = vec![0.0_f64; batch.n_samples * dim];
    let mut ax = DVector::zeros(dim);
    for i in 0..batch.n_samples {
        let x = DVector::from_row_slice(batch.row(i));
        a.matrix.mul_to(&x, &mut ax);
        values[i * dim..(i + 1) * dim].copy_from_slice(ax.as_slice());
    }
    Ok(SampleBatch {
        values,
        n_samples: batch.n_samples,
        dim,
        seed: batch.seed,
        spec: batch.spec.clone(),
        transform: Some(a.matrix.clone()),
        convolved: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Exact,
    Estimated,
}

/// The psi-alpha constant of a density over a finite scan: the largest
/// `(E|<X,y>|^p)^{1/p} / (p^{1/alpha} (E<X,y>^2)^{1/2})` seen. A finite scan
/// yields a lower bound on the true constant.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PsiAlphaProfile {
    pub alpha: f64,
    pub b_alpha: f64,
    pub provenance: Provenance,
}

impl PsiAlphaProfile {
    pub fn new(alpha: f64, b_alpha: f64, provenance: Provenance) -> Result<PsiAlphaProfile> {
        let floor = 2f64.powf(-1.0 / alpha);
        if b_alpha < floor - 1e-9 {
            return Err(Error::PsiAlphaBelowFloor { b: b_alpha, floor });
        }
        Ok(PsiAlphaProfile { alpha, b_alpha, provenance })
    }
}

/// Absolute moment `E |X_1|^p` of the axis factor of a product-type member,
/// by certified quadrature of the closed-form marginal.
fn axis_abs_moment(family: Family, p: f64) -> Result<f64> {
    let f: Box<dyn Fn(f64) -> f64> = match family {
        Family::Gaussian => return Ok(gaussian_abs_moment_1d(p)),
        Family::ProductLaplace => Box::new(move |t: f64| {
            // both half-lines folded: 2 * (1/(2b)) t^p e^{-t/b}
            t.powf(p) * (-t / LAPLACE_SCALE).exp() / LAPLACE_SCALE
        }),
        Family::ProductShiftedExponential => Box::new(move |t: f64| {
            let pos = t.powf(p) * (-(t + 1.0)).exp();
            let neg = if t <= 1.0 { t.powf(p) * (t - 1.0).exp() } else { 0.0 };
            pos + neg
        }),
        Family::UniformCube => Box::new(move |t: f64| {
            if t <= CUBE_HALF_WIDTH {
                t.powf(p) / CUBE_HALF_WIDTH
            } else {
                0.0
            }
        }),
        Family::GaussianConvolution => Box::new(move |t: f64| {
            t.powf(p) * (laplace_gauss_density_1d(t) + laplace_gauss_density_1d(-t))
        }),
        _ => return Err(Error::ExactPathUnavailable),
    };
    Ok(adaptive_to_infinity(f, 0.0, 1e-11)?.value)
}

/// Marginal absolute moment of the isotropic uniform ball:
/// `E|<X,theta>|^p = R^p Gamma(n/2+1) Gamma((p+1)/2) / (Gamma(1/2) Gamma((n+p)/2+1))`.
fn ball_abs_moment(n: usize, p: f64) -> f64 {
    let r = ((n + 2) as f64).sqrt();
    let nf = n as f64;
    (p * r.ln() + log_gamma(0.5 * nf + 1.0) + log_gamma(0.5 * (p + 1.0))
        - log_gamma(0.5)
        - log_gamma(0.5 * (nf + p) + 1.0))
    .exp()
}

/// psi-alpha via closed forms / certified quadrature for the families that
/// admit them (rotation-invariant members in every direction, product
/// members along the axes, where the ratio is largest for heavy-tailed
/// factors).
pub fn estimate_psi_alpha_exact(
    spec: &DensitySpec,
    alpha: f64,
    p_grid: &[f64],
) -> Result<PsiAlphaProfile> {
    if p_grid.is_empty() {
        return Err(Error::EmptyGrid("p_grid"));
    }
    let mut grid: Vec<f64> = p_grid.iter().copied().filter(|&p| p >= 2.0).collect();
    if !grid.contains(&2.0) {
        grid.push(2.0);
    }
    let m2 = match spec.family {
        Family::UniformBall => ball_abs_moment(spec.dim, 2.0),
        _ => axis_abs_moment(spec.family, 2.0)?,
    };
    let mut best = 0.0_f64;
    for &p in &grid {
        let mp = match spec.family {
            Family::UniformBall => ball_abs_moment(spec.dim, p),
            _ => axis_abs_moment(spec.family, p)?,
        };
        best = best.max(mp.powf(1.0 / p) / (p.powf(1.0 / alpha) * m2.sqrt()));
    }
    PsiAlphaProfile::new(alpha, best, Provenance::Exact)
}

/// Monte Carlo psi-alpha: maximize the directional moment ratio over
/// sampled sphere directions (axes always included) and the p grid.
pub fn estimate_psi_alpha_mc(
    batch: &SampleBatch,
    alpha: f64,
    p_grid: &[f64],
    n_directions: usize,
    seed: u64,
) -> Result<PsiAlphaProfile> {
    if p_grid.is_empty() {
        return Err(Error::EmptyGrid("p_grid"));
    }
    if n_directions == 0 {
        return Err(Error::EmptyGrid("directions"));
    }
    let dim = batch.dim;
    let mut directions: Vec<Vec<f64>> = Vec::with_capacity(n_directions + dim);
    for j in 0..n_directions {
        let mut rng = stream_rng(seed, Purpose::Directions, j as u64);
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        directions.push(v);
    }
    for j in 0..dim {
        let mut v = vec![0.0; dim];
        v[j] = 1.0;
        directions.push(v);
    }
    let mut grid: Vec<f64> = p_grid.iter().copied().filter(|&p| p >= 2.0).collect();
    if !grid.contains(&2.0) {
        grid.push(2.0);
    }
    let mut best = 0.0_f64;
    for theta in &directions {
        let logs: Vec<f64> =
            batch.projections(theta).iter().map(|z| z.abs().max(1e-300).ln()).collect();
        let l2 = crate::stats::log_power_mean(&logs, 2.0);
        for &p in &grid {
            let lp = crate::stats::log_power_mean(&logs, p);
            best = best.max((lp - l2).exp() / p.powf(1.0 / alpha));
        }
    }
    PsiAlphaProfile::new(alpha, best, Provenance::Estimated)
}

/// Effective dimension `|A|_HS^2 / (b_alpha^2 |A|_op^2)`.
pub fn effective_dim(a: &LinearMap, profile: &PsiAlphaProfile) -> Result<f64> {
    if a.op_norm == 0.0 {
        return Err(Error::ZeroOperatorNorm);
    }
    Ok(a.hs_norm * a.hs_norm / (profile.b_alpha * profile.b_alpha * a.op_norm * a.op_norm))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_exponential_is_standardized() {
        // mean 0, variance 1, density e^{-(t+1)} on [-1, inf)
        let m1 = adaptive_to_infinity(|t: f64| (t - 1.0) * (-t).exp(), 0.0, 1e-12).unwrap().value;
        assert!(m1.abs() < 1e-11, "mean {m1}"); // substituted s = t + 1
        let m2 = adaptive_to_infinity(|t: f64| (t - 1.0) * (t - 1.0) * (-t).exp(), 0.0, 1e-12)
            .unwrap()
            .value;
        assert!((m2 - 1.0).abs() < 1e-10, "variance {m2}");
    }

    #[test]
    fn cube_coordinate_variance_one() {
        let spec = make_density(Family::UniformCube, 2, &[]).unwrap();
        let b = sample(&spec, 100_000, 5);
        let c = b.empirical_cov();
        assert!((c[(0, 0)] - 1.0).abs() < 0.02);
        assert!((c[(1, 1)] - 1.0).abs() < 0.02);
        assert!(c[(0, 1)].abs() < 0.02);
    }

    #[test]
    fn gaussian_covariance_near_identity() {
        let spec = make_density(Family::Gaussian, 2, &[]).unwrap();
        let b = sample(&spec, 100_000, 7);
        let c = b.empirical_cov();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((c[(i, j)] - want).abs() < 0.02, "cov[{i}{j}] = {}", c[(i, j)]);
            }
        }
    }

    #[test]
    fn simplex_mean_near_zero() {
        let spec = make_density(Family::UniformSimplex, 3, &[]).unwrap();
        let b = sample(&spec, 100_000, 1);
        let m = b.empirical_mean();
        for j in 0..3 {
            assert!(m[j].abs() < 0.02, "mean[{j}] = {}", m[j]);
        }
        let c = b.empirical_cov();
        for i in 0..3 {
            assert!((c[(i, i)] - 1.0).abs() < 0.05, "cov[{i}{i}] = {}", c[(i, i)]);
        }
    }

    #[test]
    fn laplace_fourth_moment_is_six() {
        let spec = make_density(Family::ProductLaplace, 1, &[]).unwrap();
        let b = sample(&spec, 1_000_000, 3);
        let m4 = b.values().iter().map(|x| x.powi(4)).sum::<f64>() / b.n_samples as f64;
        assert!((m4 - 6.0).abs() < 0.06, "E X^4 = {m4}");
        // quadrature route agrees
        let q = axis_abs_moment(Family::ProductLaplace, 4.0).unwrap();
        assert!((q - 6.0).abs() < 1e-9);
    }

    #[test]
    fn seed_determinism_bit_for_bit() {
        let spec = make_density(Family::UniformBall, 5, &[]).unwrap();
        let a = sample(&spec, 2000, 99);
        let b = sample(&spec, 2000, 99);
        assert_eq!(a.values(), b.values());
        let c = sample(&spec, 2000, 100);
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn isotropize_inverts_diagonal_scaling() {
        let spec = make_density(Family::Gaussian, 2, &[]).unwrap();
        let b = sample(&spec, 50_000, 21);
        let scaled = apply_linear(&b, &LinearMap::from_diagonal(&[2.0, 1.0])).unwrap();
        let iso = isotropize(&scaled).unwrap();
        let w = iso.transform.as_ref().unwrap();
        let slack = 10.0 * (2.0_f64 / 50_000.0).sqrt();
        assert!((w[(0, 0)] - 0.5).abs() < slack, "w00 = {}", w[(0, 0)]);
        assert!((w[(1, 1)] - 1.0).abs() < slack, "w11 = {}", w[(1, 1)]);
        // resulting covariance is the identity to machine precision
        let c = iso.empirical_cov();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((c[(i, j)] - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn isotropize_rejects_rank_deficient() {
        let spec = make_density(Family::Gaussian, 2, &[]).unwrap();
        let mut b = sample(&spec, 1000, 4);
        for i in 0..b.n_samples {
            b.values[i * 2 + 1] = 0.0;
        }
        assert!(matches!(isotropize(&b), Err(Error::SingularCovariance { .. })));
    }

    #[test]
    fn isotropize_is_idempotent() {
        let spec = make_density(Family::ProductShiftedExponential, 3, &[]).unwrap();
        let b = sample(&spec, 20_000, 12);
        let once = isotropize(&b).unwrap();
        let twice = isotropize(&once).unwrap();
        for i in 0..200 {
            for j in 0..3 {
                assert!((once.row(i)[j] - twice.row(i)[j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn convolution_preserves_second_moment() {
        let spec = make_density(Family::ProductLaplace, 64, &[]).unwrap();
        let b = sample(&spec, 100_000, 17);
        let y = convolve_gaussian(&b, &LinearMap::identity(64)).unwrap();
        let mean_sq = y.norms().iter().map(|r| r * r).sum::<f64>() / y.n_samples as f64;
        assert!((mean_sq / 64.0 - 1.0).abs() < 0.02, "E|Y|^2/n = {}", mean_sq / 64.0);
    }

    #[test]
    fn convolution_with_unit_hs_diagonal() {
        let spec = make_density(Family::Gaussian, 8, &[]).unwrap();
        let b = sample(&spec, 200_000, 31);
        let a = LinearMap::two_block_unit_hs(8, 8, 2.0); // all twos, rescaled to |A|_HS^2 = n
        let y = convolve_gaussian(&b, &a).unwrap();
        let mean_sq = y.norms().iter().map(|r| r * r).sum::<f64>() / y.n_samples as f64;
        assert!((mean_sq - 8.0).abs() < 0.1, "E|Y|^2 = {mean_sq}");
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let spec = make_density(Family::Gaussian, 3, &[]).unwrap();
        let b = sample(&spec, 100, 1);
        assert!(matches!(
            convolve_gaussian(&b, &LinearMap::identity(4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gaussian_psi2_attained_at_p_two() {
        let spec = make_density(Family::Gaussian, 4, &[]).unwrap();
        let grid: Vec<f64> = (1..=16).map(|i| 2.0 * i as f64).collect();
        let prof = estimate_psi_alpha_exact(&spec, 2.0, &grid).unwrap();
        // the Gaussian attains the universal floor 2^{-1/2}
        assert!((prof.b_alpha - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert_eq!(prof.provenance, Provenance::Exact);
    }

    #[test]
    fn laplace_psi1_constant() {
        let spec = make_density(Family::ProductLaplace, 1, &[]).unwrap();
        let grid: Vec<f64> = (2..=32).map(|i| i as f64).collect();
        let prof = estimate_psi_alpha_exact(&spec, 1.0, &grid).unwrap();
        // axis ratio (Gamma(p+1)/2^{p/2})^{1/p} / p peaks at p = 2 with value 1/2
        assert!((prof.b_alpha - 0.5).abs() < 1e-9, "b1 = {}", prof.b_alpha);
        assert!(prof.b_alpha >= 0.5 - 1e-12);
    }

    #[test]
    fn psi_alpha_floor_enforced() {
        // p = 2 alone gives exactly the floor 2^{-1/alpha}
        let spec = make_density(Family::UniformCube, 2, &[]).unwrap();
        let prof = estimate_psi_alpha_exact(&spec, 2.0, &[2.0]).unwrap();
        assert!((prof.b_alpha - 2f64.powf(-0.5)).abs() < 1e-10);
    }

    #[test]
    fn effective_dim_formula() {
        let prof = PsiAlphaProfile::new(2.0, 1.0, Provenance::Exact).unwrap();
        let id = LinearMap::identity(100);
        assert!((effective_dim(&id, &prof).unwrap() - 100.0).abs() < 1e-9);
        let prof2 = PsiAlphaProfile::new(2.0, 2.0, Provenance::Exact).unwrap();
        assert!((effective_dim(&id, &prof2).unwrap() - 25.0).abs() < 1e-9);
        // half the entries at weight 2, rescaled to |A|_HS^2 = n: op^2 = 2, n0 = n/2
        let a = LinearMap::two_block_unit_hs(100, 50, 2.0);
        let n0 = effective_dim(&a, &prof).unwrap();
        assert!((n0 - 62.5).abs() < 1e-6, "n0 = {n0}");
    }

    #[test]
    fn kv_round_trip() {
        let spec = make_density(Family::UniformSimplex, 6, &[]).unwrap();
        let text = spec.to_kv();
        let back = DensitySpec::from_kv(&text).unwrap();
        assert_eq!(back.family, spec.family);
        assert_eq!(back.dim, spec.dim);
        assert!(!back.symmetric);
    }

    #[test]
    fn batch_binary_round_trip() {
        let spec = make_density(Family::ProductLaplace, 3, &[]).unwrap();
        let b = sample(&spec, 500, 8);
        let mut buf = Vec::new();
        b.save(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 500 * 3 * 8);
        let back = SampleBatch::load(&mut buf.as_slice(), spec).unwrap();
        assert_eq!(back.values(), b.values());
        assert_eq!(back.seed, 8);
    }

    #[test]
    fn unknown_family_and_bad_params() {
        assert!(matches!(Family::parse("cauchy"), Err(Error::UnknownFamily(_))));
        assert!(matches!(
            make_density(Family::Gaussian, 0, &[]),
            Err(Error::InvalidParams { .. })
        ));
        assert!(matches!(
            make_density(Family::Gaussian, 2, &[1.0]),
            Err(Error::InvalidParams { .. })
        ));
    }

    #[test]
    fn gaussian_convolution_density_normalized() {
        // the closed-form coordinate density integrates to 1 and has unit variance
        let mass = adaptive_to_infinity(
            |t: f64| laplace_gauss_density_1d(t) + laplace_gauss_density_1d(-t),
            0.0,
            1e-11,
        )
        .unwrap()
        .value;
        assert!((mass - 1.0).abs() < 1e-9, "mass {mass}");
        let var = axis_abs_moment(Family::GaussianConvolution, 2.0).unwrap();
        assert!((var - 1.0).abs() < 1e-9, "variance {var}");
    }
}
