use thiserror::Error;

use crate::neqr::PixelPosition;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("cannot allocate {requested} qubits (supported range is 1..={max})")]
    Capacity { requested: usize, max: usize },
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("qubit {qubit} is both target and control")]
    TargetIsControl { qubit: usize },
    #[error("qubit {qubit} appears twice in the control list")]
    DuplicateControl { qubit: usize },
    #[error("qubit count mismatch: expected {expected}, found {found}")]
    QubitCountMismatch { expected: usize, found: usize },
    #[error("basis index {index} out of range for dimension {dimension}")]
    IndexOutOfRange { index: usize, dimension: usize },
    #[error("amplitude vector length {len} is not a power of two >= 2")]
    BadLength { len: usize },
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("shot count must be at least 1")]
    ZeroShots,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImageError {
    #[error("image is not square: {rows} rows, row {row} has {len} columns")]
    NotSquare { rows: usize, row: usize, len: usize },
    #[error("image side {side} is not a power of two >= 2")]
    SideNotPowerOfTwo { side: usize },
    #[error("pixel grid has {found} entries, expected {expected}")]
    PixelCount { expected: usize, found: usize },
    #[error("bit depth {q} outside supported range 1..=8")]
    BitDepth { q: u32 },
    #[error("intensity {value} at ({y},{x}) exceeds maximum {max}")]
    IntensityOverflow {
        y: usize,
        x: usize,
        value: u32,
        max: u32,
    },
    #[error("image needs {qubits} qubits (n={n}, q={q}); cap is {cap}")]
    TooLarge {
        n: u32,
        q: u32,
        qubits: usize,
        cap: usize,
    },
    #[error("position ({y},{x}) outside a {side}x{side} image")]
    PositionOutOfRange { y: usize, x: usize, side: usize },
    #[error("counts cover {found} qubits, layout needs {expected}")]
    LayoutMismatch { expected: usize, found: usize },
    #[error("no observations for positions {}", format_positions(.missing))]
    IncompleteReadout { missing: Vec<PixelPosition> },
}

fn format_positions(ps: &[PixelPosition]) -> String {
    ps.iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("oracle target {target} out of range (max {max})")]
    TargetOutOfRange { target: u32, max: u32 },
    #[error("color-equals oracle needs a color register")]
    NoColorRegister,
    #[error("no pixel matches the search target")]
    NoMarkedItems,
    #[error("marked count {marked} exceeds search space {space}")]
    TooManyMarked { marked: usize, space: usize },
    #[error("search did not verify after {attempts} attempts")]
    SearchFailure { attempts: u32 },
}
