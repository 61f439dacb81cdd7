//! Error type shared by every module.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A grid layer (or the document `shape` field) is not 19x19.
    #[error("layer `{variable}` has shape {rows}x{cols}, expected {expected}x{expected}", expected = crate::grid::GRID_SIZE)]
    Shape {
        variable: String,
        rows: usize,
        cols: usize,
    },

    /// A cell value violates its variable's declared inclusive range.
    #[error("value {value} of `{variable}` at cell ({row},{col}) is outside the declared range")]
    ValueRange {
        variable: String,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("non-finite value in `{variable}` at cell ({row},{col})")]
    NonFinite {
        variable: String,
        row: usize,
        col: usize,
    },

    #[error("missing variable layer `{0}`")]
    MissingVariable(String),

    #[error("grid resolution {0} must be positive")]
    Resolution(f64),

    /// Malformed document; `line` is set for line-oriented inputs.
    #[error("syntax error: {msg}")]
    Syntax { line: Option<u64>, msg: String },

    #[error("duplicate event id `{event_id}` on lines {first_line} and {second_line}")]
    DuplicateId {
        event_id: String,
        first_line: u64,
        second_line: u64,
    },

    #[error("{field} {value} out of range on line {line}")]
    CoordRange {
        line: u64,
        field: &'static str,
        value: f64,
    },

    #[error("no catalog entry produced a complete snapshot window")]
    EmptyDataset,

    #[error("empty quadrant")]
    EmptyQuadrant,

    #[error("empty input")]
    EmptyInput,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("unsupported format version {found}, expected {expected}")]
    Version { found: u64, expected: u64 },

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error("window `{event_id}` targets year {year}, after test year {test_year}")]
    FutureEvent {
        event_id: String,
        year: i32,
        test_year: i32,
    },

    #[error("window truncation to {days} days outside 1..={max}")]
    DayRange { days: usize, max: usize },

    #[error("invalid window `{event_id}`: {reason}")]
    Window { event_id: String, reason: String },

    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
