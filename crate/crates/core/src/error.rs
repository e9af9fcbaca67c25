use thiserror::Error;

/// Errors raised by the swarm controllers, the harness, and the file loaders.
#[derive(Debug, Error)]
pub enum SwarmError {
    #[error("no such robot: {0}")]
    NoSuchRobot(usize),
    #[error("missing command for robot {0}")]
    MissingCommand(usize),
    #[error("empty kernel support")]
    EmptyKernelSupport,
    #[error("empty shape")]
    EmptyShape,
    #[error("cell ({x}, {y}) is outside the {width}x{height} grid")]
    CellOutOfGrid {
        x: i64,
        y: i64,
        width: usize,
        height: usize,
    },
    #[error("informed robot {0} has no reference")]
    MissingReference(usize),
    #[error("size mismatch: {0} starts vs {1} goals")]
    SizeMismatch(usize, usize),
    #[error("goals must be distinct (line {line})")]
    DuplicateGoal { line: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("ragged grid: row {row} has width {got}, expected {expected}")]
    RaggedGrid {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("grid has no black cells")]
    NoBlackCells,
    #[error("unknown grid format: {0}")]
    UnknownMagic(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("trajectory time must be strictly increasing (row {row})")]
    NonMonotoneTime { row: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("simulation diverged at step {step}: non-finite state for robot {id}")]
    Diverged { step: usize, id: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, SwarmError>;
