use thiserror::Error;

/// Errors produced by the design, region, trajectory, injection and
/// simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid design specification: {0}")]
    InvalidSpec(String),

    #[error("({0}, {1}, {2}) is not a Pythagorean triple of positive integers")]
    NotPythagorean(u32, u32, u32),

    #[error("beta_{index} = 0 for this triple and k; agent {index} would not move")]
    DegenerateBeta { index: usize },

    #[error("beta_d vanishes; trochoid coefficients are undefined")]
    SingularBetaD,

    #[error("eigenvalue ratio {ratio} does not match the expected {expected}")]
    RatioMismatch { ratio: f64, expected: f64 },

    #[error("the 2x2 system for the initial positions is singular")]
    SingularSystem,

    #[error("the centre of rotation is undefined (sum of 1/beta is zero)")]
    SingularCoR,

    #[error("no combination of constraint branches is feasible")]
    EmptyRegion,

    #[error("cusp singularity: speed vanishes and the turn rate is undefined")]
    CuspSingularity,

    #[error("operation is only defined for epitrochoids")]
    UnsupportedType,

    #[error("sign discriminant is zero and the closed-form branches disagree")]
    SignDegenerate,

    #[error("simulation state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("heading is undefined for a zero control input")]
    HeadingUndefined,

    #[error("invalid simulation configuration: {0}")]
    InvalidConfig(String),

    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
