use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("no closed form: {0}")]
    NoClosedForm(&'static str),

    #[error("z = {z} is not below the support minimum {min}")]
    ZInSupport { z: f64, min: f64 },

    #[error("quadrature did not converge: node doubling moved the result by {delta:.3e}")]
    NonConvergedQuadrature { delta: f64 },

    #[error("oracle window needs {needed} states, cap is {cap}")]
    WindowTooLarge { needed: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
