use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("matrix B is not symmetric (asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("singular matrix: {0}")]
    Singular(&'static str),
    #[error("|zeta| must be 1 (got {0})")]
    ZetaNotUnit(f64),
    #[error("degenerate sign class present in index computation")]
    DegenerateEntry,
    #[error("degenerate pair: det4 is within tolerance of zero")]
    DegeneratePair,
    #[error("A is singular")]
    DegenerateA,
    #[error("non-generic input: {0}")]
    NonGeneric(NonGenericReason),
    #[error("unknown catalog recipe `{0}`")]
    UnknownRecipe(String),
    #[error("parameter out of domain: {0}")]
    OutOfDomain(String),
    #[error("parameter t = {0} outside [0, 1]")]
    ParameterRange(f64),
    #[error("could not certify sign preservation of the genericity perturbation")]
    PerturbationUncertified,
    #[error("no certified path found; best minimum |det4| = {best_min_abs_det4:.3e}")]
    SearchFailed { best_min_abs_det4: f64 },
    #[error("path is not flattened")]
    NotFlattened,
    #[error("path certificate did not pass")]
    Uncertified,
    #[error("kernel vector detected: min |A z' + conj(B) conj(z')| = {0:.3e}")]
    DeltaZero(f64),
    #[error("invalid input: {0}")]
    Input(String),
}

/// Why a pair was rejected by the normal-form pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonGenericReason {
    TypeII,
    BoundaryThetaZero,
    BoundaryThetaPi,
    NearBoundary,
    ZeroBDiagonal,
    IsotropicEigenvector,
    IllConditioned,
}

impl NonGenericReason {
    pub fn as_str(self) -> &'static str {
        match self {
            NonGenericReason::TypeII => "type_ii",
            NonGenericReason::BoundaryThetaZero => "boundary_theta_zero",
            NonGenericReason::BoundaryThetaPi => "boundary_theta_pi",
            NonGenericReason::NearBoundary => "near_boundary",
            NonGenericReason::ZeroBDiagonal => "zero_b_diagonal",
            NonGenericReason::IsotropicEigenvector => "isotropic_eigenvector",
            NonGenericReason::IllConditioned => "ill_conditioned",
        }
    }
}

impl std::fmt::Display for NonGenericReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
