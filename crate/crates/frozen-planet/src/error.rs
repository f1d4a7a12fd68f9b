use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid size {0}: need an even n >= 16 divisible by 4")]
    InvalidGrid(usize),
    #[error("incompatible grids")]
    IncompatibleGrids,
    #[error("incompatible symmetry classes: {0}")]
    IncompatibleClasses(String),
    #[error("degenerate loop")]
    DegenerateLoop,
    #[error("collision not regularizable")]
    NotRegularizable,
    #[error("parity mismatch: expected {expected} zeros per period, found {found}")]
    ParityMismatch { expected: &'static str, found: usize },
    #[error("non-transverse collision at tau = {0}")]
    NonTransverse(f64),
    #[error("outside H_av (mean interaction denominator {0:.3e} <= 0)")]
    OutsideMean(f64),
    #[error("outside H_in (q1 - q2 = {0:.3e} at sigma = {1:.6})")]
    OutsideInstantaneous(f64, f64),
    #[error("domain exit after {iterations} iterations (gradient norm {grad_norm:.3e})")]
    DomainExit { iterations: usize, grad_norm: f64 },
    #[error("rank deficient Jacobian (smallest singular value {0:.3e})")]
    RankDeficient(f64),
    #[error("continuation stalled at r={0}")]
    Stalled(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
