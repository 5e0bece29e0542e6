use thiserror::Error;

/// Errors raised while constructing or transforming wavelet systems.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("modulus {0} is not a prime >= 2")]
    NotPrime(u64),

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),

    #[error("tag mismatch: cannot combine a point with a character")]
    TagMismatch,

    #[error("digit {digit} at position {position} is out of range for p = {p}")]
    DigitOutOfRange { digit: u32, position: i32, p: u32 },

    #[error("narrowing window to [{lo}, {hi}) would drop nonzero digit at position {position}")]
    NonzeroDigitDropped { lo: i32, hi: i32, position: i32 },

    #[error("index {index} out of range for window of size {size}")]
    IndexOutOfRange { index: u64, size: u64 },

    #[error("invalid window [{lo}, {hi})")]
    InvalidWindow { lo: i32, hi: i32 },

    #[error("table of {requested} entries exceeds size cap {cap}")]
    SizeCap { requested: u128, cap: u64 },

    #[error("parent array has length {got}, expected {expected}")]
    WrongLength { got: usize, expected: usize },

    #[error("parent[0] must be 0, got {0}")]
    RootParent(usize),

    #[error("vertex {vertex} has parent {parent} outside 0..{p}")]
    VertexOutOfRange { vertex: usize, parent: usize, p: usize },

    #[error("cycle: {} (cycle {{{}}} never reaches root 0)", format_cycle(.0), format_set(.0))]
    Cycle(Vec<usize>),

    #[error("enumeration of all trees for p = {p} exceeds the exhaustive cap {cap}; use sampling")]
    EnumerationCap { p: usize, cap: usize },

    #[error("phase given for ({parent}->{child}), which is not an edge of the tree")]
    PhaseOnNonEdge { parent: usize, child: usize },

    #[error("phase {0} is not a finite number of turns in [0, 1)")]
    InvalidPhase(f64),

    #[error("character has nonzero digit below position -1 (position {0}); mask value undefined")]
    BelowMaskWindow(i32),

    #[error("row {row} has {count} nonzero entries; exactly one is required")]
    RowCondition { row: usize, count: usize },

    #[error("mask entry {index} has modulus {modulus}, expected 0 or 1")]
    MaskModulus { index: usize, modulus: f64 },

    #[error("mask value at the trivial coset is {0}, expected exactly 1")]
    MaskOrigin(String),

    #[error("wavelet index {l} out of range 1..={max}")]
    WaveletIndex { l: usize, max: usize },

    #[error("resolution level {got} too coarse for projection onto V_{level}; need at least {required}")]
    ResolutionTooCoarse { got: i32, required: i32, level: i32 },

    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(i32, i32),

    #[error("expected {expected} detail bands, got {got}")]
    BandCount { expected: usize, got: usize },

    #[error("table length {got} does not match window size {expected}")]
    TableLength { got: usize, expected: usize },

    #[error("{0}")]
    Invalid(String),
}

fn format_cycle(cycle: &[usize]) -> String {
    let mut s = String::new();
    for v in cycle {
        s.push_str(&v.to_string());
        s.push('\u{2192}');
    }
    if let Some(first) = cycle.first() {
        s.push_str(&first.to_string());
    }
    s
}

fn format_set(cycle: &[usize]) -> String {
    let mut v = cycle.to_vec();
    v.sort_unstable();
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub type Result<T> = std::result::Result<T, Error>;
