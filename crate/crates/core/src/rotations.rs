//! Rotation-group machinery: Haar sampling by Gaussian QR, geodesics via
//! the matrix exponential (closed form for plane rotations), the three
//! tangent movement types of a frame, the directional radial moment of a
//! k-dimensional marginal (exact for Gaussians, cone-estimated from
//! samples), empirical log-Lipschitz constants, and the reverse Holder
//! diagnostic.

use crate::distributions::SampleBatch;
use crate::error::{Error, Result};
use crate::linalg::{expm, orthogonality_drift};
use crate::quadrature::adaptive;
use crate::rng::{stream_rng, Purpose};
use crate::special::{log_gamma, sphere_area};
use crate::stats::{bootstrap_ci, mean_var};
use nalgebra::{DMatrix, DVector};
use rand::RngExt;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

/// An element of the rotation group, validated on construction.
#[derive(Debug, Clone)]
pub struct Rotation {
    pub matrix: DMatrix<f64>,
}

impl Rotation {
    pub fn identity(n: usize) -> Rotation {
        Rotation { matrix: DMatrix::identity(n, n) }
    }

    pub fn new(matrix: DMatrix<f64>) -> Result<Rotation> {
        let drift = orthogonality_drift(&matrix);
        if drift > 1e-10 {
            return Err(Error::Invalid(format!("matrix not orthogonal (drift {drift:.3e})")));
        }
        let det = matrix.determinant();
        if (det - 1.0).abs() > 1e-8 {
            return Err(Error::Invalid(format!("determinant {det} != 1")));
        }
        Ok(Rotation { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// First k columns: an orthonormal basis of the rotated frame subspace.
    pub fn frame_basis(&self, k: usize) -> DMatrix<f64> {
        self.matrix.columns(0, k).into_owned()
    }

    /// Image of the frame's base direction (the first column).
    pub fn base_direction(&self) -> DVector<f64> {
        self.matrix.column(0).into_owned()
    }
}

/// Haar-distributed rotation: QR of a Gaussian matrix with the R diagonal
/// normalized positive, determinant fixed to +1 by negating the last
/// column when needed.
pub fn haar_rotation(n: usize, seed: u64, index: u64) -> Rotation {
    assert!(n >= 2);
    let mut rng = stream_rng(seed, Purpose::Haar, index);
    haar_rotation_with(n, &mut rng)
}

pub fn haar_rotation_with(n: usize, rng: &mut ChaCha12Rng) -> Rotation {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    if q.determinant() < 0.0 {
        let last = n - 1;
        for i in 0..n {
            q[(i, last)] = -q[(i, last)];
        }
    }
    Rotation { matrix: q }
}

/// The reference frame: the span of the first k coordinates with the first
/// coordinate as base direction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FrameConfig {
    pub n: usize,
    pub k: usize,
}

impl FrameConfig {
    pub fn new(n: usize, k: usize) -> Result<FrameConfig> {
        if k < 2 || k > n {
            return Err(Error::Invalid(format!("need 2 <= k <= n, got k={k}, n={n}")));
        }
        Ok(FrameConfig { n, k })
    }
}

/// Movement classes of the tangent space at a frame: rotating the base
/// direction inside the frame (1), tilting the base direction out of the
/// frame (2), tilting the rest of the frame out of it (3), or anything (4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MovementType {
    Type1,
    Type2,
    Type3,
    General,
}

impl MovementType {
    pub fn name(&self) -> &'static str {
        match self {
            MovementType::Type1 => "type1",
            MovementType::Type2 => "type2",
            MovementType::Type3 => "type3",
            MovementType::General => "general",
        }
    }
}

/// An antisymmetric tangent generator with `|B|^2 = tr(B^T B)/2`.
#[derive(Debug, Clone)]
pub struct TangentMovement {
    pub b: DMatrix<f64>,
    pub norm: f64,
    pub movement_type: MovementType,
    /// Set when B is a single coordinate-plane generator e_i e_j^T - e_j e_i^T.
    pub plane: Option<(usize, usize)>,
}

impl TangentMovement {
    fn plane_generator(n: usize, i: usize, j: usize, ty: MovementType) -> TangentMovement {
        let mut b = DMatrix::zeros(n, n);
        b[(i, j)] = 1.0;
        b[(j, i)] = -1.0;
        TangentMovement { b, norm: 1.0, movement_type: ty, plane: Some((i, j)) }
    }

    pub fn tangent_norm(b: &DMatrix<f64>) -> f64 {
        (0.5 * b.iter().map(|x| x * x).sum::<f64>()).sqrt()
    }

    /// Random unit-norm movement within the span of the type.
    pub fn random(frame: FrameConfig, ty: MovementType, rng: &mut ChaCha12Rng) -> TangentMovement {
        let n = frame.n;
        let mut b = DMatrix::zeros(n, n);
        let put = |bm: &mut DMatrix<f64>, i: usize, j: usize, v: f64| {
            bm[(i, j)] += v;
            bm[(j, i)] -= v;
        };
        match ty {
            MovementType::Type1 => {
                for j in 1..frame.k {
                    put(&mut b, 0, j, rng.sample(StandardNormal));
                }
            }
            MovementType::Type2 => {
                for j in frame.k..n {
                    put(&mut b, 0, j, rng.sample(StandardNormal));
                }
            }
            MovementType::Type3 => {
                for i in 1..frame.k {
                    for j in frame.k..n {
                        put(&mut b, i, j, rng.sample(StandardNormal));
                    }
                }
            }
            MovementType::General => {
                for i in 0..n {
                    for j in (i + 1)..n {
                        put(&mut b, i, j, rng.sample(StandardNormal));
                    }
                }
            }
        }
        let norm = TangentMovement::tangent_norm(&b);
        let b = b / norm;
        TangentMovement { b, norm: 1.0, movement_type: ty, plane: None }
    }
}

/// Orthonormal generators spanning a movement type: counts k-1, n-k and
/// (k-1)(n-k) for types 1-3.
pub fn movement_basis(frame: FrameConfig, ty: MovementType) -> Vec<TangentMovement> {
    let (n, k) = (frame.n, frame.k);
    let mut out = Vec::new();
    match ty {
        MovementType::Type1 => {
            for j in 1..k {
                out.push(TangentMovement::plane_generator(n, 0, j, ty));
            }
        }
        MovementType::Type2 => {
            for j in k..n {
                out.push(TangentMovement::plane_generator(n, 0, j, ty));
            }
        }
        MovementType::Type3 => {
            for i in 1..k {
                for j in k..n {
                    out.push(TangentMovement::plane_generator(n, i, j, ty));
                }
            }
        }
        MovementType::General => {
            for i in 0..n {
                for j in (i + 1)..n {
                    out.push(TangentMovement::plane_generator(n, i, j, ty));
                }
            }
        }
    }
    out
}

/// `u0 * exp(s B)`: closed-form plane rotation when B is a single
/// coordinate-plane generator, scaling-and-squaring otherwise;
/// re-orthonormalized if drift exceeds 1e-12.
pub fn geodesic_step(u0: &Rotation, movement: &TangentMovement, s: f64) -> Rotation {
    let n = u0.dim();
    let mut m = match movement.plane {
        Some((i, j)) => {
            // right-multiplying by the plane rotation mixes columns i and j
            let mut m = u0.matrix.clone();
            let (sin, cos) = s.sin_cos();
            for row in 0..n {
                let ci = u0.matrix[(row, i)];
                let cj = u0.matrix[(row, j)];
                m[(row, i)] = cos * ci - sin * cj;
                m[(row, j)] = sin * ci + cos * cj;
            }
            m
        }
        None => &u0.matrix * expm(&(&movement.b * s)),
    };
    if orthogonality_drift(&m) > 1e-12 {
        // polar projection back onto the group
        let mtm = m.transpose() * &m;
        if let Ok(inv_sqrt) = crate::linalg::sym_inv_sqrt(&mtm) {
            m *= inv_sqrt;
        }
    }
    Rotation { matrix: m }
}

/// Directional radial moment of a k-dimensional marginal.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HkpEstimate {
    pub value: f64,
    pub stderr: f64,
    pub method: HkpMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HkpMethod {
    GaussianExact,
    McKde,
}

/// Exact value for a centered Gaussian with covariance `sigma`:
/// `vol(S^{k-1}) (2 pi)^{-k/2} det(S_E)^{-1/2} 2^{(p+k)/2-1}`
/// `Gamma((p+k)/2) s^{-(p+k)/2}` with `S_E` the frame-marginal covariance
/// and `s = theta^T S_E^{-1} theta` in frame coordinates.
pub fn hkp_exact_gaussian(
    sigma: &DMatrix<f64>,
    u: &Rotation,
    frame: FrameConfig,
    p: f64,
) -> Result<HkpEstimate> {
    let k = frame.k;
    if p <= -(k as f64) {
        return Err(Error::MomentOrderOutOfRange { p, min_p: -(k as f64) });
    }
    let v = u.frame_basis(k);
    let sigma_e = v.transpose() * sigma * &v;
    let chol = sigma_e
        .clone()
        .cholesky()
        .ok_or(Error::SingularMarginalCovariance)?;
    let log_det: f64 = (0..k).map(|i| chol.l()[(i, i)].ln()).sum::<f64>() * 2.0;
    // theta in frame coordinates is e_1, so s = (S_E^{-1})_{11}
    let mut e1 = DVector::zeros(k);
    e1[0] = 1.0;
    let sol = chol.solve(&e1);
    let s = sol[0];
    if s <= 0.0 {
        return Err(Error::SingularMarginalCovariance);
    }
    let kf = k as f64;
    let log_h = sphere_area(k).ln() - 0.5 * kf * (2.0 * std::f64::consts::PI).ln()
        - 0.5 * log_det
        + (0.5 * (p + kf) - 1.0) * std::f64::consts::LN_2
        + log_gamma(0.5 * (p + kf))
        - 0.5 * (p + kf) * s.ln();
    Ok(HkpEstimate { value: log_h.exp(), stderr: 0.0, method: HkpMethod::GaussianExact })
}

/// Fraction of the sphere S^{k-1} within angular distance `delta` of a pole.
pub fn cap_fraction(k: usize, delta: f64) -> Result<f64> {
    if k == 1 {
        return Ok(0.5);
    }
    let e = (k as f64) - 2.0;
    let num = adaptive(|phi: f64| phi.sin().powf(e), 0.0, delta, 1e-11, 1e-300)?.value;
    let den = adaptive(|phi: f64| phi.sin().powf(e), 0.0, std::f64::consts::PI, 1e-11, 1e-300)?
        .value;
    Ok(num / den)
}

/// Cone estimator of the directional radial moment from samples: project to
/// the rotated frame, keep samples within `cone_half_angle` of the rotated
/// base direction, and average `|P_E y|^p` against the cap solid angle.
/// Smoothing bias is O(cone^2); stderr is a percentile bootstrap.
pub fn hkp_estimate_mc(
    batch: &SampleBatch,
    u: &Rotation,
    frame: FrameConfig,
    p: f64,
    cone_half_angle: f64,
    seed: u64,
) -> Result<HkpEstimate> {
    let k = frame.k;
    if k > 4 {
        return Err(Error::Invalid("cone estimation is limited to k <= 4".into()));
    }
    if p <= -(k as f64) + 1.0 {
        return Err(Error::MomentOrderOutOfRange { p, min_p: -(k as f64) + 1.0 });
    }
    let v = u.frame_basis(k);
    let frac = cap_fraction(k, cone_half_angle)?;
    let cos_cone = cone_half_angle.cos();
    let n = batch.n_samples;
    let mut contrib = vec![0.0_f64; n];
    let mut in_cone = 0usize;
    let mut coords = vec![0.0_f64; k];
    for (i, slot) in contrib.iter_mut().enumerate() {
        let row = batch.row(i);
        for (j, slot) in coords.iter_mut().enumerate() {
            *slot = (0..batch.dim).map(|d| v[(d, j)] * row[d]).sum();
        }
        let r2: f64 = coords.iter().map(|c| c * c).sum();
        let r = r2.sqrt();
        if r > 0.0 && coords[0] / r >= cos_cone {
            *slot = r.powf(p) / frac;
            in_cone += 1;
        }
    }
    if in_cone < 200 {
        return Err(Error::TooFewSamplesInCone { got: in_cone, need: 200 });
    }
    let value = contrib.iter().sum::<f64>() / n as f64;
    let (_, _, se) = bootstrap_ci(n, 200, seed, 0.95, |idx| {
        idx.iter().map(|&i| contrib[i]).sum::<f64>() / idx.len() as f64
    });
    Ok(HkpEstimate { value, stderr: se, method: HkpMethod::McKde })
}

/// Empirical log-Lipschitz probe: the largest `|log h(u e^{dB}) - log h(u)|
/// / d` over Haar base points and unit movements of each type, evaluated at
/// two step scales for a consistency check.
#[derive(Debug, Clone, Serialize)]
pub struct LipschitzEstimate {
    pub per_type: [f64; 3],
    pub general: f64,
    pub overall: f64,
    /// Relative disagreement between the two probe scales.
    pub consistency: f64,
    pub delta: f64,
}

pub fn empirical_log_lipschitz(
    log_h: &(dyn Fn(&Rotation) -> f64 + Sync),
    frame: FrameConfig,
    probe_points: usize,
    directions_per_type: usize,
    delta: f64,
    seed: u64,
) -> Result<LipschitzEstimate> {
    if !(1e-4..=1e-2).contains(&delta) {
        return Err(Error::Invalid(format!("probe step {delta} outside [1e-4, 1e-2]")));
    }
    let n = frame.n;
    let types =
        [MovementType::Type1, MovementType::Type2, MovementType::Type3, MovementType::General];
    let mut max_full = [0.0_f64; 4];
    let mut max_half = [0.0_f64; 4];
    for pt in 0..probe_points {
        let u = haar_rotation(n, seed, pt as u64);
        let base = log_h(&u);
        if !base.is_finite() {
            return Err(Error::Invalid("log h evaluated non-finite".into()));
        }
        for (ti, &ty) in types.iter().enumerate() {
            for dir in 0..directions_per_type {
                let mut rng =
                    stream_rng(seed, Purpose::Probe, ((pt * 4 + ti) * directions_per_type + dir) as u64);
                let b = TangentMovement::random(frame, ty, &mut rng);
                for (target, step) in
                    [(&mut max_full[ti], delta), (&mut max_half[ti], 0.5 * delta)]
                {
                    let moved = geodesic_step(&u, &b, step);
                    let lh = log_h(&moved);
                    let rate = (lh - base).abs() / step;
                    if rate > *target {
                        *target = rate;
                    }
                }
            }
        }
    }
    let overall_full = max_full.iter().cloned().fold(0.0_f64, f64::max);
    let overall_half = max_half.iter().cloned().fold(0.0_f64, f64::max);
    let consistency = if overall_half > 1e-12 {
        (overall_full - overall_half).abs() / overall_half
    } else {
        0.0
    };
    Ok(LipschitzEstimate {
        per_type: [max_half[0], max_half[1], max_half[2]],
        general: max_half[3],
        overall: overall_half,
        consistency,
        delta,
    })
}

/// Reverse Holder diagnostic: the fitted constant
/// `K = n log((E h^q)^{1/q} / (E h^r)^{1/r}) / (L^2 (q - r))` from Haar
/// samples of h; finite for log-Lipschitz h.
pub fn reverse_holder_check(
    h_values: &[f64],
    l_hat: f64,
    q: f64,
    r: f64,
    n: usize,
) -> Result<f64> {
    if h_values.len() < 1000 {
        return Err(Error::Invalid(format!(
            "need >= 1000 Haar samples, got {}",
            h_values.len()
        )));
    }
    if !(0.0 < r && r < q) {
        return Err(Error::Invalid(format!("need 0 < r < q, got r={r}, q={q}")));
    }
    if h_values.iter().any(|&h| h <= 0.0) {
        return Err(Error::Invalid("non-positive h sample".into()));
    }
    let logs: Vec<f64> = h_values.iter().map(|h| h.ln()).collect();
    let lq = crate::stats::log_power_mean(&logs, q);
    let lr = crate::stats::log_power_mean(&logs, r);
    let gap = (lq - lr).max(0.0);
    if gap <= 1e-12 {
        return Ok(0.0);
    }
    if l_hat <= 1e-9 {
        // constant function: the ratio gap is pure noise
        return Ok(0.0);
    }
    let k = n as f64 * gap / (l_hat * l_hat * (q - r));
    if !k.is_finite() {
        return Err(Error::Invalid("reverse Holder constant not finite".into()));
    }
    Ok(k)
}

/// `E_U h_{k,p}(U)` for an exact evaluator, averaged over Haar samples.
pub fn haar_average(
    h: &(dyn Fn(&Rotation) -> f64 + Sync),
    n: usize,
    count: usize,
    seed: u64,
) -> (f64, f64) {
    let vals: Vec<f64> = (0..count).map(|i| h(&haar_rotation(n, seed, i as u64))).collect();
    let (m, v) = mean_var(&vals);
    (m, (v / count as f64).sqrt())
}
