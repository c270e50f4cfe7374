//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("normalized Doppler frequency {freq} outside the unambiguous interval (|F| must be < {limit})")]
    DopplerOutOfRange { freq: f64, limit: f64 },

    #[error("pulse count must be at least {min}, got {got}")]
    PulseCountTooSmall { got: usize, min: usize },

    #[error("vector length {0} is odd; zero-Doppler centering needs an even length")]
    OddLength(usize),

    #[error("matrix order {0} is odd; zero-Doppler centering needs an even order")]
    OddOrder(usize),

    #[error("input length {got} below minimum {min}")]
    LengthTooSmall { got: usize, min: usize },

    #[error("FFT length {n_fft} shorter than the data length {n}")]
    FftTooShort { n_fft: usize, n: usize },

    #[error("clutter mixture is empty")]
    EmptyClutterMixture,

    #[error("clutter power fractions sum to {0}, expected 1")]
    PowerFractionsNotNormalized(f64),

    #[error("clutter component invalid: {0}")]
    InvalidClutterComponent(String),

    #[error("matrix is not Hermitian: max asymmetry {max_asymmetry:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { max_asymmetry: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:.3e} below -{threshold:.3e}")]
    NotPositiveSemiDefinite { min_eigenvalue: f64, threshold: f64 },

    #[error("Cholesky factorization failed; matrix is numerically singular")]
    SingularMatrix,

    #[error("sample covariance from {count} vectors of dimension {dim} is singular (need count > dim)")]
    SingularSampleCovariance { count: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Doppler bin {bin} outside 1..={domain}")]
    BinOutOfRange { bin: usize, domain: usize },

    #[error("duplicate Doppler bin {0}")]
    DuplicateBin(usize),

    #[error("bins are not contiguous at position {0}")]
    BinsNotContiguous(usize),

    #[error("steering vector is zero")]
    ZeroSteering,

    #[error("probability {0} outside (0, 1)")]
    InvalidProbability(f64),

    #[error("order n={n} with K={k} training vectors is invalid (need K > n, n >= {n_min})")]
    InvalidOrder { n: usize, k: usize, n_min: usize },

    #[error("peak index {index} is not a strict circular local peak of the profile")]
    NotALocalPeak { index: usize },

    #[error("adaptive quadrature did not converge: {subdivisions} subdivisions, error estimate {error:.3e}")]
    QuadratureNonConvergence { subdivisions: usize, error: f64 },

    #[error("root bracket failed: f({lo}) = {f_lo:.3e}, f({hi}) = {f_hi:.3e} do not straddle zero")]
    BracketFailure { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("scenario field `{field}` invalid: {message}")]
    InvalidScenario { field: &'static str, message: String },
}
