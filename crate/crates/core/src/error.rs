use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("exponent at offset {offset} is not an integer")]
    NonIntegerExponent { offset: usize },
    #[error("division by zero at offset {offset}")]
    ZeroDivisor { offset: usize },
    #[error("expression mixes grades {0} and {1}")]
    MixedGrades(usize, usize),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("denominator vanishes at the evaluation point")]
    Pole,
    #[error("point has {got} coordinates, expression needs {needed}")]
    PointDimension { got: usize, needed: usize },
    #[error("inversion of zero")]
    InverseOfZero,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("grade {grade} exceeds chart dimension {dim}")]
    GradeExceedsDimension { grade: usize, dim: usize },
    #[error("cannot contract a {vector}-vector into a {form}-form")]
    ContractionGrade { vector: usize, form: usize },
    #[error("bivector expected, got grade {0}")]
    NotABivector(usize),
    #[error("volume form must be a nonzero top-degree form")]
    InvalidVolumeForm,
    #[error("bivector fails the Jacobi identity")]
    NotPoisson,
    #[error("star undefined for degenerate structure")]
    DegenerateStructure,
    #[error("not a point leaf: bivector does not vanish at the base point")]
    NotPointLeaf,
    #[error("extension does not match: {0}")]
    ExtensionMismatch(String),
    #[error("leaf check failed: {0}")]
    InvalidLeaf(String),
    #[error("leaf node is off the leaf: {0}")]
    OffLeaf(String),
    #[error("least-squares residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },
    #[error("pairing realization mismatch: {0}")]
    RealizationMismatch(String),
    #[error("grade mismatch: expected {expected}, got {got}")]
    GradeMismatch { expected: usize, got: usize },
    #[error("quadrature failed: {0}")]
    Quadrature(String),
}
