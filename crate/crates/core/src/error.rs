use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode {mode} has cutoff {cutoff}; every cutoff must be at least 2")]
    CutoffTooSmall { mode: usize, cutoff: usize },

    #[error("a Fock space needs at least one mode")]
    NoModes,

    #[error("space dimension exceeds the limit of {limit}")]
    DimensionOverflow { limit: usize },

    #[error("mode index {mode} out of range for {modes} modes")]
    InvalidMode { mode: usize, modes: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{kind} needs at least {required} modes, space has {found}")]
    WrongModeCount {
        kind: &'static str,
        required: usize,
        found: usize,
    },

    #[error("conjugate index {which} out of range ({available} available)")]
    InvalidConjugate { which: usize, available: usize },

    #[error("interior subspace is empty for margin {margin}")]
    EmptyInterior { margin: usize },

    #[error("kappa must be non-negative, got {0}")]
    NegativeKappa(f64),

    #[error("kappa = 0 has no isolated steady state")]
    ZeroKappa,

    #[error("parameter `{name}` must be finite")]
    NonFinite { name: &'static str },

    #[error("initial state is not a density matrix: {reason}")]
    NonPhysicalState { reason: &'static str },

    #[error("time grid must start at 0 and be strictly increasing")]
    InvalidTimeGrid,

    #[error("step size underflow at t = {t} (stiff generator; reduce the horizon or max step)")]
    StepUnderflow { t: f64 },

    #[error("dense path limited to dimension {limit}, got {dim}")]
    DenseTooLarge { dim: usize, limit: usize },

    #[error("{kind} has no conserved charge")]
    NoConservedCharge { kind: &'static str },

    #[error("sector label does not match the conserved charge of {kind}")]
    InvalidSector { kind: &'static str },

    #[error("sector is empty in this truncation")]
    EmptySector,

    #[error("null space has dimension {dim}; pass a charge sector to select one steady state")]
    DegenerateNullSpace { dim: usize },

    #[error("no null vector found (smallest singular value {smallest})")]
    NoNullVector { smallest: f64 },

    #[error("kinds with a conserved charge need an explicit sector on the shift-invert path")]
    SectorRequired,

    #[error(
        "inverse iteration did not converge after {iterations} iterations (residual {residual})"
    )]
    NotConverged { iterations: usize, residual: f64 },

    #[error("banded factorization needs {needed} entries, limit is {limit}")]
    BandTooWide { needed: usize, limit: usize },

    #[error("tilde-rule assembly differs from direct vectorization by {diff:e}")]
    AssemblyMismatch { diff: f64 },

    #[error("state vector is zero")]
    ZeroState,

    #[error("steady state has vanishing trace")]
    ZeroTrace,

    #[error("charge q = {q} does not fit below cutoff {cutoff}")]
    ChargeTooLarge { q: usize, cutoff: usize },

    #[error("truncation loss {loss:e} exceeds bound {bound:e}")]
    TruncationLoss { loss: f64, bound: f64 },

    #[error("density matrix deviates from Hermitian by {deviation:e}")]
    NonHermitian { deviation: f64 },
}
