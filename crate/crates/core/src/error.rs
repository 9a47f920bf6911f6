use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("potential file line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("grid size {0} is not of the form 2^k + 1 with k >= 3")]
    InvalidGridSize(usize),

    #[error("quadrature grid of {n_points} points is too coarse for coefficients up to index {max_index} (need at least {required})")]
    GridTooCoarse {
        n_points: usize,
        max_index: usize,
        required: usize,
    },

    #[error("cosine coefficient c_{needed} requested but only c_0..c_{available} are known")]
    InsufficientRange { needed: usize, available: usize },

    #[error("eigen-iteration did not converge for eigenvalue {index}: off-diagonal residual {residual:e}")]
    NonConvergence { index: usize, residual: f64 },

    #[error("could not bracket eigenvalue {m} (last half-width {pad})")]
    BracketFailure { m: usize, pad: f64 },

    #[error("eigenvalue {m} is not isolated: gap {gap:e} to its neighbour")]
    Degenerate { m: usize, gap: f64 },

    #[error(
        "denominator for index {index} is near-singular ({denominator:e}) at lambda = {lambda}"
    )]
    NearSingular {
        index: i64,
        denominator: f64,
        lambda: f64,
    },

    #[error("potential mean c_0 = {0:e} is not zero; normalize it first")]
    NonzeroMean(f64),

    #[error("decay fit needs at least 5 nonzero points, got {0}")]
    TooFewPoints(usize),

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, SpectralError>;
