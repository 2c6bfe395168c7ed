use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DunklError {
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("multiplicity {value} on coordinate {index} is negative or not finite")]
    BadMultiplicity { index: usize, value: f64 },
    #[error("expected a point of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("tail mass {tail:.3e} exceeds {limit:.1e} of the total; enlarge the grid radius")]
    TailMass { tail: f64, limit: f64 },
    #[error("grid axis {0} is not symmetric about the origin")]
    AsymmetricGrid(usize),
    #[error("input has zero norm")]
    ZeroNorm,
    #[error("series for the rank-one kernel did not converge at z = {re} + {im}i")]
    SeriesNonConvergence { re: f64, im: f64 },
    #[error("kernel argument {re} + {im}i is outside the supported region")]
    KernelDomain { re: f64, im: f64 },
    #[error("point pair is singular: orbit distance {0:.3e}")]
    SingularPair(f64),
    #[error("node eta lies outside the hull co(G.x)")]
    OutsideHull,
    #[error(
        "kernel representation needs every g.x outside supp f; orbit distance to the support is {distance:.3e}"
    )]
    SupportSeparation { distance: f64 },
    #[error("A(x,y,eta) = {value:.6e} violates the orbit sandwich [{lower:.6e}, {upper:.6e}]")]
    SandwichViolation { value: f64, lower: f64, upper: f64 },
    #[error("exponent pair (p = {p}, q = {q}) is outside the admissible window")]
    ExponentWindow { p: f64, q: f64 },
    #[error("setup file: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, DunklError>;
