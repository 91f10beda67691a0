use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("series variable lists differ: {0}")]
    VariableMismatch(String),
    #[error("trusted window is empty for variable `{0}`")]
    WindowUnderflow(String),
    #[error("exponent {exponent} of `{var}` is outside the trusted window")]
    OutsideWindow { var: String, exponent: String },
    #[error("product of `{0}` has unbounded support on both sides")]
    UnboundedProduct(String),
    #[error("substitution leaves the scalar field: {0}")]
    UnsupportedField(String),
    #[error("polynomial is not symmetric in x1 and x2")]
    Asymmetric,
    #[error("invalid twist data: {0}")]
    InvalidTwist(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
