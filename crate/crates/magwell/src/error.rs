use thiserror::Error;

/// Errors surfaced by the library.
///
/// Messages are stable: the CLI prints them verbatim and tests match on them.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("field not real")]
    FieldNotReal,
    #[error("degenerate field")]
    DegenerateField,
    #[error("no nondegenerate well (Assumption 2 fails)")]
    NoWell,
    #[error("refinement failed at seed ({0},{1})")]
    RefinementFailed(usize, usize),
    #[error("invalid spectral data")]
    InvalidSpectralData,
    #[error("invalid cutoff")]
    InvalidCutoff,
    #[error("symbol not real")]
    SymbolNotReal,
    #[error("matrix not symmetric positive definite")]
    NotSpd,
    #[error("cutoff schedule must be strictly increasing")]
    CutoffSchedule,
    #[error("increase cutoff")]
    IncreaseCutoff,
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error("ℒ⁻¹ undefined on ker ℒ")]
    LInverseOnKernel,
    #[error("F_{{1,2}} not scalar at requested cutoff")]
    NotScalar,
    #[error("grid under-resolves magnetic length")]
    UnderResolved,
    #[error("vector length does not match grid")]
    SizeMismatch,
    #[error("phases must have unit modulus")]
    NonUnitPhase,
    #[error("need ≥2 grids")]
    NeedTwoGrids,
    #[error("grids must be nested in doubling ratio")]
    GridsNotDoubling,
    #[error("empty cluster")]
    EmptyCluster,
    #[error("empty p list")]
    EmptyPList,
    #[error("p list must be ascending with at least 4 entries")]
    BadPList,
    #[error("fewer than 2 eigenvalues")]
    TooFewEigenvalues,
    #[error("eigensolver did not converge: {0}")]
    Unconverged(String),
    #[error("under-resolved Gaussian (fewer than 8 grid points per magnetic length)")]
    QuasimodeUnderResolved,
    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
