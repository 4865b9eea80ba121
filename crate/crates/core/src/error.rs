use thiserror::Error;

/// Errors reported by the operator algebra and the spectral engines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("fiber dimension mismatch: {0} vs {1}")]
    FiberMismatch(usize, usize),
    #[error("domain mismatch (full line vs half line)")]
    DomainMismatch,
    #[error("not essentially unitary: defect operator has nonzero background (residual {0:.3e})")]
    NotEssentiallyUnitary(f64),
    #[error("operator is not self-adjoint (residual {0:.3e})")]
    NotSelfAdjoint(f64),
    #[error("operator is not a contraction (norm estimate {0})")]
    NotContraction(f64),
    #[error("operator is not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("operator is not a projection (residual {0:.3e})")]
    NotProjection(f64),
    #[error("missing required symmetry: {0}")]
    MissingSymmetry(&'static str),
    #[error("gap boundary touches the essential spectrum near {0}")]
    GapIntersectsEssential(f64),
    #[error("ill-conditioned kernel: defect eigenvalue {0} lies in the rank-decision margin")]
    IllConditionedKernel(f64),
    #[error("deviation has nonzero background, i.e. is not compact in the class (residual {0:.3e})")]
    NonCompactDeviation(f64),
    #[error("off-diagonal fold block has nonzero background")]
    FoldBlockNotCompact,
    #[error("half-line operator requires a zero left background and window contained in N")]
    InvalidHalfLine,
    #[error("spectral computation did not converge: {0}")]
    NoConvergence(String),
    #[error("refinement limit reached: {0}")]
    RefinementLimit(String),
    #[error("winding phase step exceeded pi/2 at maximal refinement")]
    PhaseStepTooLarge,
    #[error("symbol determinant vanishes on the unit circle (min modulus {0:.3e})")]
    SymbolSingular(f64),
    #[error("unsupported operand: {0}")]
    Unsupported(String),
    #[error("unknown corpus case: {0}")]
    UnknownCase(String),
}

pub type Result<T> = std::result::Result<T, Error>;
