use thiserror::Error;

/// Errors from the text decoders (graph files, cycle notation, family descriptors,
/// coloring exports).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: duplicate edge {u} {v}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("line {line}: loop at vertex {v}")]
    Loop { line: usize, v: usize },
    #[error("line {line}: vertex {vertex} out of range (n = {n})")]
    OutOfRange { line: usize, vertex: usize, n: usize },
    #[error("line {line}: arc color on non-edge ({u}, {v})")]
    ArcOnNonEdge { line: usize, u: usize, v: usize },
    #[error("line {line}: {what} colored twice")]
    DuplicateColor { line: usize, what: String },
}

impl ParseError {
    pub(crate) fn syntax(line: usize, msg: impl Into<String>) -> Self {
        ParseError::Syntax { line, msg: msg.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("loop at vertex {0}")]
    Loop(usize),
    #[error("duplicate edge {0} {1}")]
    DuplicateEdge(usize, usize),
    #[error("({0}, {1}) is not an edge")]
    NotAnEdge(usize, usize),
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("infeasible generator spec: {0}")]
    Infeasible(String),
    #[error("graph is disconnected")]
    Disconnected,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefineError {
    #[error("dimension {0} not supported")]
    InvalidDimension(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("vertex count mismatch: {left} vs {right}")]
    VertexCountMismatch { left: usize, right: usize },
    #[error("{n} vertices exceeds the cap of {cap} for {k}-WL")]
    TooLarge { n: usize, k: usize, cap: usize },
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosureError {
    #[error("input graph is disconnected")]
    Disconnected,
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("pair coloring must have dimension 2 on {expected} vertices")]
    BadPairColoring { expected: usize },
    #[error(transparent)]
    Refine(#[from] RefineError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("point set is not invariant under the group")]
    NotInvariant,
    #[error("point {0} out of range")]
    PointOutOfRange(usize),
    #[error("point {0} listed twice")]
    DuplicatePoint(usize),
    #[error("labels do not form a bijection onto 0..{0}")]
    BadLabels(usize),
    #[error("labeling coset does not cover the vertex set")]
    DomainMismatch,
    #[error("labeling coset occurs twice")]
    DuplicateCoset,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsoError {
    #[error("search budget of {0} nodes exhausted")]
    Budget(u64),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error(transparent)]
    Closure(#[from] ClosureError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{n} vertices exceeds the oracle cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("oracle search budget of {0} nodes exhausted")]
    Budget(u64),
    #[error("h = {0} is outside the supported range 1..=5")]
    UnsupportedH(usize),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Refine(#[from] RefineError),
}
