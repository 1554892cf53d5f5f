use thiserror::Error;

/// Errors raised by the library.
///
/// Validation failures are reported in [`crate::system::ValidationReport`]
/// rather than raised; everything here aborts the requested computation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-real spectrum at state {state:?}: max imaginary part {imag:e}")]
    NonRealSpectrum { state: Vec<f64>, imag: f64 },

    #[error("eigenvalue collision at state {state:?}: gap {gap:e}")]
    EigenvalueCollision { state: Vec<f64>, gap: f64 },

    #[error("complex generalized spectrum at y = {y}: max imaginary part {imag:e}")]
    ComplexGeneralizedSpectrum { y: f64, imag: f64 },

    #[error("degenerate generalized spectrum at y = {y}: gap {gap:e}")]
    DegenerateSpectrum { y: f64, gap: f64 },

    #[error("diffusion matrix is singular at state {state:?}")]
    SingularDiffusion { state: Vec<f64> },

    #[error("at mesh node {node}: {source}")]
    AtNode {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("speed bands overlap: family {family} upper {upper} >= family {next} lower {lower}")]
    BandsOverlap {
        family: usize,
        next: usize,
        upper: f64,
        lower: f64,
    },

    #[error("state {state:?} lies outside the admissible ball (distance {distance}, radius {radius})")]
    StateOutOfBall {
        state: Vec<f64>,
        distance: f64,
        radius: f64,
    },

    #[error("Newton iteration diverged at epsilon = {epsilon:e} after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged {
        epsilon: f64,
        iterations: usize,
        residual: f64,
        iterate: Vec<f64>,
    },

    #[error("mesh budget exceeded: {requested} nodes requested, {max} allowed")]
    MeshBudgetExceeded { requested: usize, max: usize },

    #[error("singular linear system (pivot {pivot} at row {row})")]
    SingularLinearSystem { row: usize, pivot: f64 },

    #[error("relaxation operator a^2 B(u) - y^2 is singular or indefinite at y = {y} (margin {margin})")]
    ResonanceSingular { y: f64, margin: f64 },

    #[error("system has no flux function; operation requires a conservative system")]
    MissingFlux,

    #[error("mu_{family} has {count} zero crossings; expected at most one")]
    MultipleZeroCrossings { family: usize, count: usize },

    #[error("interaction coefficient ({i},{j},{k}) overflowed at y = {y}")]
    OverflowGuard { i: usize, j: usize, k: usize, y: f64 },

    #[error("plateau on gap {gap} is not flat: variation {variation:e} > tolerance {tolerance:e}")]
    PlateauNotFlat {
        gap: usize,
        variation: f64,
        tolerance: f64,
    },

    #[error("flatness of family {family} could not be achieved (defect {defect:e})")]
    FlatnessUnachievable { family: usize, defect: f64 },

    #[error("model domain violation: {0}")]
    DomainViolation(String),

    #[error("exact Riemann solution leaves the admissible ball: {0}")]
    NoSolutionInBall(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn at_node(self, node: usize) -> Error {
        Error::AtNode {
            node,
            source: Box::new(self),
        }
    }

    /// Strips node annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtNode { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
