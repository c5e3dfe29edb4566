use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("field contains non-finite values")]
    NonFinite,
    #[error("squared density has negative entry {0:e}")]
    NegativeDensity(f64),
    #[error("grid too large for the direct oracle (n = {n}, limit {limit})")]
    GridTooLarge { n: usize, limit: usize },
    #[error("grid too coarse: spacing {spacing} does not resolve the unit ball")]
    GridTooCoarse { spacing: f64 },
    #[error("{0} undefined at 0")]
    ZeroField(&'static str),
    #[error("outside O: q_a*V0 = {product:e} >= 0, rescale with T_t first")]
    OutsideO { product: f64 },
    #[error("scaling would clip support (|u| = {value:e} within boundary margin)")]
    ClipGuard { value: f64 },
    #[error("scaling parameter |t| = {0} exceeds the resampling guard 2")]
    ScaleOutOfRange(f64),
    #[error("riesz solve did not converge: relative residual {residual:e} after {iterations} iterations")]
    RieszNotConverged { residual: f64, iterations: usize },
    #[error("degenerate constraint gradient (norm {0:e})")]
    DegenerateConstraint(f64),
    #[error("degenerate Nehari direction: |V0| = {v0:e} below threshold")]
    DegenerateNehari { v0: f64 },
    #[error("line search failed after {0} halvings")]
    LineSearchFailed(usize),
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("cannot place bump family: {0}")]
    BumpFamily(String),
    #[error("inadmissible group action: {0}")]
    Inadmissible(String),
    #[error("indefinite potential: global minimality not certified; use multistart_search")]
    IndefinitePotential,
    #[error("bad field dump: {0}")]
    BadDump(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
