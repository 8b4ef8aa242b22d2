use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pair (a={a}, b={b}, n={n}) is off the resonance curve: 1/sqrt(a) + 1/sqrt(b) - 2/n = {defect:e}")]
    NotResonant { a: f64, b: f64, n: u32, defect: f64 },

    #[error("Fourier expansion requires an asymmetric pair, got a = b = {0}")]
    SymmetricPair(f64),

    #[error("action-angle coordinates are undefined at the origin")]
    Origin,

    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("oscillators resonate on different curves (n = {0} vs n = {1})")]
    MismatchedOrder(u32, u32),

    #[error("quadrature did not reach tolerance {tol:e} (estimated error {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("pair is outside the resolubility set: Lambda(pi) = {lambda_pi}, alpha = {alpha}, Lambda(0) = {lambda_zero}")]
    OutsideResolubility {
        lambda_pi: f64,
        alpha: f64,
        lambda_zero: f64,
    },

    #[error("matrix is not a D+ matrix")]
    NotDPlus,

    #[error("parameter search failed: {0}")]
    SearchFailed(String),

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("radius collapsed to {radius:e} at t = {t}")]
    RadiusCollapse { t: f64, radius: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    /// True for failures of a numerical procedure (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::SearchFailed(_)
                | Error::StepUnderflow { .. }
                | Error::RadiusCollapse { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
