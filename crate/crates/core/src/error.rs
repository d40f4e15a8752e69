use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("inverse requested for a non-unit (valuation {valuation})")]
    InverseOfNonUnit { valuation: u32 },
    #[error("precision exhausted: need {needed}, have {available} ({context})")]
    PrecisionExhausted {
        needed: u32,
        available: u32,
        context: &'static str,
    },
    #[error("element is outside the convergence domain: {0}")]
    ConvergenceDomain(&'static str),
    #[error("element is not divisible: {0}")]
    NotDivisible(&'static str),
    #[error("{0} is not a Teichmüller unit")]
    NotAUnit(&'static str),
    #[error("expected {expected} roots, found {found}")]
    RootCountMismatch { expected: usize, found: usize },
    #[error("element does not lie in the subfield (residual valuation {residual})")]
    NotInSubfield { residual: u32 },
    #[error("series constant term must vanish")]
    NonzeroConstantTerm,
    #[error("series leading term must be a unit")]
    NonUnitLeadingTerm,
    #[error("series tail cannot be bounded to {target} digits (bound {bound:.3})")]
    TailNotBounded { target: u32, bound: f64 },
    #[error("coefficient {index} is not integral (valuation {valuation})")]
    IntegralityViolation { index: usize, valuation: i64 },
    #[error("vector is not in the image of the ghost map at component {index}")]
    NotInGhostImage { index: usize },
    #[error("Lubin-Tate pivot at degree {degree} is not p times a unit")]
    PivotNotUnit { degree: usize },
    #[error("degree overflow: {0}")]
    DegreeOverflow(String),
    #[error("two projective points share the kernel fingerprint {0}")]
    DuplicateFingerprint(String),
    #[error("identity residual is nonzero at coefficient {index} (v_π {valuation})")]
    IdentityResidualNonzero { index: usize, valuation: u32 },
    #[error("check failed: {0}")]
    CheckFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
