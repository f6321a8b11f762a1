use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// `λ_srd` and `λ_sd` coincide, which puts a removable singularity in
    /// the series CDF coefficients.
    #[error(
        "degenerate parameters: lambda_srd = {lambda_srd} and lambda_sd = {lambda_sd} coincide \
         (relative gap {relative_gap:.3e}); perturb lambda_sd by a factor 1 ± 1e-6"
    )]
    Degenerate {
        lambda_srd: f64,
        lambda_sd: f64,
        relative_gap: f64,
    },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions: \
         value {value:.12e}, error estimate {error_estimate:.3e}"
    )]
    Quadrature {
        value: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("integrand is not finite at t = {at}")]
    NonFiniteIntegrand { at: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Degenerate { .. } | Error::Quadrature { .. } | Error::NonFiniteIntegrand { .. }
        )
    }
}
