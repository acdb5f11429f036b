use thiserror::Error;

/// Errors surfaced by groupoid construction, kernel algebra and the
/// spectral/propagation pipelines.
#[derive(Error, Debug)]
pub enum Error {
    #[error("arrows are not composable: source({0:?}) != range({1:?})")]
    NotComposable(crate::groupoid::ArrowId, crate::groupoid::ArrowId),

    #[error("operation left the materialized window: {0}")]
    OutOfWindow(String),

    #[error("subset is not invariant: arrow {arrow:?} has source in A = {source_in} but range in A = {range_in}")]
    NotInvariant {
        arrow: crate::groupoid::ArrowId,
        source_in: bool,
        range_in: bool,
    },

    #[error("invalid model or input: {0}")]
    InvalidInput(String),

    #[error("cocycle phase undefined on composable pair {0:?}")]
    IncompleteCocycle(String),

    #[error("cocycle values not exact N-th roots of unity (N = {0})")]
    NotRootsOfUnity(u32),

    #[error("character aliasing: |n| = {n} >= N = {order}, mu_N cannot separate the character")]
    Aliasing { n: i32, order: u32 },

    #[error("kernel references a different groupoid or cocycle")]
    MismatchedAlgebra,

    #[error("non-Hermitian input refused: {0}")]
    NotHermitian(String),

    #[error("eigen backend failure ({context}): LAPACK info = {info}")]
    Backend { context: String, info: i32 },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("bump support {support:?} overlaps the asymptotic spectrum near {overlap:?}")]
    KappaOverlap {
        support: (f64, f64),
        overlap: (f64, f64),
    },

    #[error("inconclusive at this scale: {0}")]
    Inconclusive(String),

    #[error("model file schema error: {0}")]
    Schema(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit code contract: 1 schema, 2 numeric, 3 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema(_) | Error::Io(_) => 1,
            Error::Inconclusive(_) => 3,
            _ => 2,
        }
    }
}
