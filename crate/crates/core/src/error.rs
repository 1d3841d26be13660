use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    ParamDomain(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("precondition not met: {0}")]
    Precondition(String),

    /// Two rectangles of a packing share a cell.
    #[error("rectangle R_{rect} overlaps an earlier rectangle at cell ({x}, {y})")]
    Overlap { x: usize, y: usize, rect: usize },

    /// A free-cell count differs from `n - s*k` on some grid line.
    #[error("{axis} {index} has {found} free cells, expected {expected}")]
    FreeCellCount {
        axis: &'static str,
        index: usize,
        found: usize,
        expected: usize,
    },

    /// A structural property of extremal packings failed to hold.
    #[error("structure violation ({property}): {detail}")]
    Structure {
        property: &'static str,
        detail: String,
    },

    #[error("permutation is anticlockwise")]
    Orientation,

    #[error("factorization mismatch: r_a * r_b = {product}, expected {expected}")]
    Factorization { product: u64, expected: u64 },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("size limit: {0}")]
    SizeLimit(String),

    #[error("parse error: {0}")]
    Parse(String),
}
