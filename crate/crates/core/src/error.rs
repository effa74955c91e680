use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown prototile label `{0}`")]
    UnknownLabel(String),

    #[error("window of {cells} cells exceeds the cell budget of {budget}")]
    CellBudgetExceeded { cells: u64, budget: u64 },

    #[error("invalid substitution: {0}")]
    InvalidSubstitution(String),

    #[error("substitution incidence matrix is not primitive")]
    NotPrimitive,

    #[error("patch of size {patch} does not fit in a {width}x{height} window")]
    PatchTooLarge { patch: u32, width: u32, height: u32 },

    #[error("window {width}x{height} is smaller than the requested {n}x{n} square")]
    WindowTooSmall { width: u32, height: u32, n: u32 },

    #[error(
        "window exhausted at level {level} (side {n}): the trusted region is empty, \
         a window wider than {min_side} cells per axis is required"
    )]
    WindowExhausted { level: usize, n: u32, min_side: u32 },

    #[error("packing bug: complement component at cell ({x}, {y}) is not a rectangle")]
    NonRectangularComponent { x: i32, y: i32 },

    #[error("packing bug: cross side holds more than one exit point at ({x2}, {y2}) (doubled)")]
    DuplicateExitOnSide { x2: i64, y2: i64 },

    #[error("overlapping features in decomposition raster at cell ({x}, {y})")]
    FeatureOverlap { x: i32, y: i32 },

    #[error("supertile for square at ({x}, {y}) captured no tiles; the schedule is too aggressive for this window")]
    EmptySupertile { x: i32, y: i32 },

    #[error("schedule must be strictly increasing (side {0} follows {1})")]
    ScheduleNotIncreasing(u32, u32),

    #[error("cubic schedule violated: {next} < {prev}^3")]
    ScheduleNotCubic { prev: u32, next: u32 },

    #[error("persistent boundary has a cycle through vertex ({x}, {y}) in the trusted region")]
    BoundaryCycle { x: i32, y: i32 },

    #[error("persistent boundary has a terminal vertex at ({x}, {y}) in the trusted region")]
    TerminalVertex { x: i32, y: i32 },

    #[error("{count} vertices of degree >= 3 in the trusted persistent boundary; at most 2 are possible")]
    TooManyRoots { count: usize },

    #[error("no root: the persistent boundary has no trusted vertex of degree >= 3")]
    NoRoot,

    #[error("paths have different lengths ({0} vs {1})")]
    PathLengthMismatch(usize, usize),

    #[error("edge order is not proper: {0}")]
    ImproperOrder(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
