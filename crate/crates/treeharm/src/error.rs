use num_complex::Complex64;
use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// The branching parameter is outside the supported range. The lower
    /// bound is mathematical (a homogeneous tree needs degree >= 3); the
    /// upper bound comes from the single-digit vertex encoding.
    #[error("branching parameter q={0} outside supported range 2..=9")]
    InvalidBranching(u32),

    /// A vertex word used an edge label that does not exist at that position.
    #[error("edge label {label} invalid at position {pos} for q={q}")]
    InvalidWord { label: u8, pos: usize, q: u32 },

    /// A parse error in the digit-string form of a vertex.
    #[error("cannot parse vertex word {0:?}: expected decimal digits only")]
    VertexParse(String),

    /// Enumerating a sphere or refining a cylinder function would exceed the
    /// configured cylinder budget.
    #[error("depth {depth} needs {cylinders} cylinders, over the budget of {cap}")]
    DepthBudget {
        depth: usize,
        cylinders: u128,
        cap: u64,
    },

    /// Two objects built over different trees were combined.
    #[error("mismatched branching parameters (q={0} vs q={1})")]
    BranchingMismatch(u32, u32),

    /// `refine` can only extend a cylinder function to a larger depth.
    #[error("cannot refine from depth {from} down to depth {to}")]
    RefineDepth { from: usize, to: usize },

    /// The c-function has a pole at this spectral parameter.
    #[error("spectral parameter {z} is a pole of the c-function")]
    CFunctionPole { z: Complex64 },

    /// A radial operation received a function that is not constant on spheres.
    #[error("function is not radial: values vary on the sphere of radius {level}")]
    NotRadial { level: usize },

    /// The input to an eigenfunction-only operation fails the Laplacian
    /// eigenvalue equation beyond tolerance.
    #[error("Laplacian eigen residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotEigenfunction { residual: f64, tol: f64 },

    /// A level of the martingale recovery system is numerically singular.
    #[error("level-{level} recovery system is singular")]
    SingularSystem { level: usize },

    /// `ball_maximal` was asked for a ball that leaves the stored domain.
    #[error(
        "ball of radius {radius} around a level-{level} vertex leaves the domain B(o,{domain})"
    )]
    BallExceedsDomain {
        radius: usize,
        level: usize,
        domain: usize,
    },

    /// A function was defined on too small a ball for the requested operation.
    #[error("operation needs values on B(o,{needed}); function stored on B(o,{have})")]
    DomainTooSmall { needed: usize, have: usize },

    /// The Plancherel calibration loop did not reach the stability target.
    #[error("Plancherel calibration did not stabilise: {detail}")]
    CalibrationFailed { detail: String },

    /// A spectral quadrature grid size is unusable.
    #[error("spectral grid size {m} invalid: {reason}")]
    InvalidGrid { m: usize, reason: &'static str },

    /// A Lebesgue or Lorentz exponent outside its legal range.
    #[error("exponent {value} outside {expected}")]
    InvalidExponent { value: f64, expected: &'static str },

    /// A linear-system size beyond what the dense recovery solver accepts.
    #[error("recovery system of size {size} exceeds the solver cap {cap}")]
    SystemTooLarge { size: usize, cap: usize },

    /// Malformed serialized data.
    #[error("invalid serialized data: {0}")]
    InvalidData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
