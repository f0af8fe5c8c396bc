use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid field spec: {0}")]
    InvalidSpec(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("evaluation at singularity near {re}{im:+}i")]
    EvaluationAtSingularity { re: f64, im: f64 },
    #[error("non-finite value at {re}{im:+}i")]
    NonFinite { re: f64, im: f64 },
    #[error("finite-difference stencil hits a singularity")]
    StencilHitsSingularity,

    #[error("point s={0} is not in a sliding region")]
    NotInSlidingRegion(f64),
    #[error("point s={0} is not a tangency")]
    NotATangency(f64),
    #[error("sliding field denominator vanishes at s={0}")]
    DegenerateDenominator(f64),
    #[error("no contact order up to k_max={0} certified")]
    MultiplicityExceedsKMax(usize),
    #[error("point is an equilibrium of the field; contact order undefined")]
    EquilibriumOnLine,

    #[error("orbit unbounded at angle {0}")]
    OrbitUnboundedAtAngle(f64),
    #[error("unsupported field variant for {0}")]
    UnsupportedVariant(&'static str),
    #[error("step size underflow at t={0}")]
    StepSizeUnderflow(f64),
    #[error("start point is a tangency of both fields")]
    StartAtDoubleTangency,
    #[error("field does not point into the requested side at s={0}")]
    PreconditionViolated(f64),
    #[error("no return to the switching line: {0}")]
    NoReturn(String),
    #[error("orbit hit a singularity near {re}{im:+}i")]
    HitSingularity { re: f64, im: f64 },

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),
    #[error("half-turns of opposite orientation (sign b != sign d)")]
    MixedRotation,
    #[error("condition violated: {0}")]
    ConditionViolated(String),
    #[error("no admissible cycle: {0}")]
    NoAdmissibleCycle(String),
    #[error("displacement has no sign change on [{0}, {1}]")]
    NoSignChange(f64, f64),
    #[error("integration failure: {0}")]
    IntegrationFailure(String),
    #[error("parameters do not match a table row: {0}")]
    TableRowMismatch(String),

    #[error("no critical point at y={0}")]
    NoCriticalPoint(f64),
}

impl Error {
    /// Short name of the variant, used by the CLI on stderr.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::EvaluationAtSingularity { .. } => "EvaluationAtSingularity",
            Error::NonFinite { .. } => "NonFinite",
            Error::StencilHitsSingularity => "StencilHitsSingularity",
            Error::NotInSlidingRegion(_) => "NotInSlidingRegion",
            Error::NotATangency(_) => "NotATangency",
            Error::DegenerateDenominator(_) => "DegenerateDenominator",
            Error::MultiplicityExceedsKMax(_) => "MultiplicityExceedsKMax",
            Error::EquilibriumOnLine => "EquilibriumOnLine",
            Error::OrbitUnboundedAtAngle(_) => "OrbitUnboundedAtAngle",
            Error::UnsupportedVariant(_) => "UnsupportedVariant",
            Error::StepSizeUnderflow(_) => "StepSizeUnderflow",
            Error::StartAtDoubleTangency => "StartAtDoubleTangency",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::NoReturn(_) => "NoReturn",
            Error::HitSingularity { .. } => "HitSingularity",
            Error::DegenerateParameters(_) => "DegenerateParameters",
            Error::MixedRotation => "MixedRotation",
            Error::ConditionViolated(_) => "ConditionViolated",
            Error::NoAdmissibleCycle(_) => "NoAdmissibleCycle",
            Error::NoSignChange(..) => "NoSignChange",
            Error::IntegrationFailure(_) => "IntegrationFailure",
            Error::TableRowMismatch(_) => "TableRowMismatch",
            Error::NoCriticalPoint(_) => "NoCriticalPoint",
        }
    }

    /// True for errors caused by bad input or parameters outside a theorem's
    /// hypotheses, rather than by numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec(_)
                | Error::InvalidArgument(_)
                | Error::DegenerateParameters(_)
                | Error::MixedRotation
                | Error::ConditionViolated(_)
                | Error::TableRowMismatch(_)
        )
    }
}
