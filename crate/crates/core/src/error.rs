use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// The variants are grouped roughly by the exit code the command-line tool
/// maps them to: input problems, numeric failures and budget violations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatError {
    #[error("valuation of zero undefined")]
    ValuationOfZero,
    #[error("{0} is not a unit modulo {1}")]
    NotAUnit(i128, u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {p}^{k} too large: 2N^2 must fit in 128 bits")]
    ModulusTooLarge { p: u64, k: u32 },
    #[error("prime not admissible: {0}")]
    PrimeNotAdmissible(String),
    #[error("gamma undefined: {0}^ord - 1 vanishes")]
    GammaUnbounded(i128),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("matrix not admitted: {0}")]
    NotAdmitted(String),
    #[error("{p} is not a good prime for this matrix")]
    NotGoodPrime { p: u64 },
    #[error("zero vector excluded")]
    ZeroVector,
    #[error("linear independence violated: det X = 0")]
    LinearDependence,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("modulus must be an odd prime power")]
    EvenModulus,
    #[error("dense budget exceeded: N^d = {dim} > {cap}")]
    DenseBudget { dim: usize, cap: usize },
    #[error("observable not real-valued: {0}")]
    NonHermitianObservable(String),
    #[error("intertwiner dimension != 1 ({0} consistent components)")]
    IntertwinerDimension(usize),
    #[error("unitarity residual {0:.3e} exceeds tolerance")]
    NotUnitary(f64),
    #[error("spectral decomposition failed: {0}")]
    SpectralFailure(String),
    #[error("state not normalized: |psi|^2 / N^d = {0}")]
    NotNormalized(f64),

    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("not a solution: {0}")]
    NotASolution(String),
    #[error("coefficient vector divisible by p")]
    CoefficientsDivisibleByP,
    #[error("sequence has period 1; saving exponent undefined")]
    TrivialPeriod,
    #[error("r = {r} exceeds lifting precision k = {k}")]
    PrecisionExceeded { r: u32, k: u32 },
    #[error("order mismatch: eigenvalue route gives {eigen}, direct powering gives {direct}")]
    OrderMismatch { eigen: u64, direct: u64 },

    #[error("unknown strategy '{name}' (available: {available})")]
    UnknownStrategy { name: String, available: String },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CatError>;

impl CatError {
    /// Numeric failures (solver, spectral, budget) as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            CatError::IntertwinerDimension(_)
                | CatError::NotUnitary(_)
                | CatError::SpectralFailure(_)
                | CatError::DenseBudget { .. }
                | CatError::InstanceTooLarge(_)
                | CatError::OrderMismatch { .. }
                | CatError::Overflow(_)
        )
    }
}
