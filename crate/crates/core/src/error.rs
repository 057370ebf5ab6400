use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("distance matrix is not square (row {row} has {len} entries, expected {n})")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("entry ({0}, {1}) is negative or not finite")]
    BadEntry(usize, usize),
    #[error("diagonal entry {0} is not zero")]
    NonZeroDiagonal(usize),
    #[error("asymmetric entries at ({0}, {1})")]
    NonSymmetric(usize, usize),
    #[error("distinct points {0} and {1} have distance zero")]
    ZeroOffDiagonal(usize, usize),
    #[error("triangle inequality fails: d({0},{1}) > d({0},{2}) + d({2},{1})")]
    TriangleViolation(usize, usize, usize),
    #[error("space has no points")]
    EmptySpace,

    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("unknown tile ({level}, {index})")]
    UnknownTile { level: usize, index: usize },
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("level {level}: scale {scale:e} is below twice the sample resolution {resolution:e}")]
    ResolutionExceeded { level: usize, scale: f64, resolution: f64 },
    #[error("doubling probe found {count} separated points, above the cap {cap}")]
    DoublingUnbounded { count: usize, cap: usize },
    #[error("fit failed: {0}")]
    FitFailure(String),
    #[error("quasi-metric constant {k} exceeds 2; choose a smaller lambda")]
    LambdaTooLarge { k: f64 },
    #[error("quasi-metric constant {0} exceeds 2")]
    KTooLarge(f64),
    #[error("{vertices} vertices exceed the exact triple budget of {cap}")]
    TripleBudgetExceeded { vertices: usize, cap: usize },
    #[error("map sends point {point} to {image}, outside the sample")]
    MapNotClosed { point: usize, image: usize },
    #[error("point {point} lies in no tile of level {level}")]
    CoverGap { point: usize, level: usize },

    #[error("no repelling fixed point found")]
    SeedNotRepelling,
    #[error("root finding failed: {0}")]
    RootFindFailure(String),
    #[error("resolution insufficient: {0}")]
    ResolutionInsufficient(String),
    #[error("level {0} has no tiles")]
    EmptyLevel(usize),
    #[error("map degree {0} is below 2")]
    DegreeTooLow(usize),
    #[error("cannot parse map: {0}")]
    Parse(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
