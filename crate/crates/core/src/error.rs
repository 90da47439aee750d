use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameters for family {family}: {reason}")]
    InvalidParams { family: String, reason: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empirical covariance is singular (min eigenvalue {min_eig:.3e})")]
    SingularCovariance { min_eig: f64 },
    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),
    #[error("no exact closed form for this family/direction")]
    ExactPathUnavailable,
    #[error("operator norm is zero")]
    ZeroOperatorNorm,
    #[error("psi-alpha constant {b:.6} below the lower bound 2^(-1/alpha) = {floor:.6}")]
    PsiAlphaBelowFloor { b: f64, floor: f64 },

    #[error("integral diverges: exponent q = {q} <= -1 at the origin")]
    DivergentIntegral { q: f64 },
    #[error("non-integrable tail: integrand does not decay (T = {t_max:.3e})")]
    NonIntegrableTail { t_max: f64 },
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("density vanishes at the origin")]
    DensityZeroAtOrigin,
    #[error("barycenter not at the origin (first moment {moment:.3e})")]
    BarycenterNotZero { moment: f64 },
    #[error("half-line mass {mass:.6} violates the precondition eps = {eps:.6}")]
    MassPrecondition { mass: f64, eps: f64 },
    #[error("grid must be strictly increasing and uniform")]
    NonUniformGrid,

    #[error("oracle has no {0} evaluator")]
    MissingEvaluator(&'static str),
    #[error("non-positive radial value {value:.3e} in direction {index}")]
    NonPositiveRadial { value: f64, index: usize },
    #[error("evaluator kinds do not match between the two bodies")]
    EvaluatorKindMismatch,
    #[error("all projections non-positive along the direction; input looks broken")]
    AllProjectionsNonPositive,
    #[error("unsupported relation/instance combination: {0}")]
    UnsupportedRelation(String),

    #[error("moment order p = {p} out of range (requires p > {min_p})")]
    MomentOrderOutOfRange { p: f64, min_p: f64 },
    #[error("marginal covariance is numerically singular")]
    SingularMarginalCovariance,
    #[error("only {got} samples fall in the cone (need at least {need})")]
    TooFewSamplesInCone { got: usize, need: usize },
    #[error("projection constraint violated: need |p| <= (k-1)/2 <= (n-1)/2, got p={p}, k={k}, n={n}")]
    ProjectionConstraint { p: f64, k: usize, n: usize },

    #[error("no admissible moment order in the curve for t = {t}")]
    NoAdmissiblePower { t: f64 },
    #[error("no informative tail points (all probabilities are 0 or 1)")]
    NoInformativePoints,
    #[error("p = {p} too large for the available lower-tail resolution")]
    InsufficientTailResolution { p: f64 },
    #[error("zero norm encountered with negative moment order")]
    ZeroNormSample,
    #[error("zero total mass in the measure family")]
    ZeroTotalMass,

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
