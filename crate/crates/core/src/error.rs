use thiserror::Error;

use crate::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: expected one of {}", expected.join(", "))]
    Syntax { offset: usize, expected: Vec<String> },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("`{expr}` is outside its real domain at ({:.6}, {:.6})", point.0, point.1)]
    Domain { expr: String, point: Point },

    #[error("spec error{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Spec { line: Option<usize>, message: String },

    #[error("frontal check `{which}` fails at ({:.6}, {:.6}) with magnitude {magnitude:.3e}", point.0, point.1)]
    FrontalViolation {
        point: Point,
        which: &'static str,
        magnitude: f64,
    },

    #[error("point ({:.6}, {:.6}) lies outside the parameter domain", .0.0, .0.1)]
    OutsideDomain(Point),

    #[error("operation requires a compact (flat torus) domain")]
    NonCompactDomain,

    #[error("two singular branches pass within one seed cell near ({:.4}, {:.4}); increase the grid resolution", .0.0, .0.1)]
    Resolution(Point),

    #[error("Newton corrector diverged near ({:.6}, {:.6})", .0.0, .0.1)]
    NewtonDivergence(Point),

    #[error("psi vanishes at ({:.6}, {:.6}) (rank zero)", .0.0, .0.1)]
    RankZero(Point),

    #[error("sample {index} of a singular curve is not an A2 point")]
    NotA2 { index: usize },

    #[error("arc sample at ({:.6}, {:.6}) lies on the singular set", .0.0, .0.1)]
    OnSingularSet(Point),

    #[error("no positive orthonormal frame is available at ({:.6}, {:.6})", .0.0, .0.1)]
    FrameInvalid(Point),

    #[error("initial vector does not converge (Cauchy residual {residual:.3e})")]
    NoLimit { residual: f64, samples: Vec<[f64; 2]> },

    #[error("angle {angle:.3e} between initial vectors is not close to 0 or pi")]
    SnapFailure { angle: f64 },

    #[error("two branches at ({:.6}, {:.6}) share an initial tangent; cyclic order is undefined", .0.0, .0.1)]
    TangentAmbiguity(Point),

    #[error("interior angles at peak ({:.6}, {:.6}) violate the angle identities: alpha+={plus}, alpha-={minus}", point.0, point.1)]
    TheoremAViolation { point: Point, plus: f64, minus: f64 },

    #[error("quadrature error budget exceeded: target {target:.3e}, achieved {achieved:.3e}")]
    ErrorBudgetExceeded { target: f64, achieved: f64 },

    #[error("singular curvature density does not settle at a peak endpoint (residual {residual:.3e})")]
    EndpointDivergence { residual: f64 },

    #[error("singular set graph is inconsistent: {0}")]
    GraphInconsistency(String),

    #[error("hypothesis violated: singular set does not admit at most peaks ({} offending points)", .0.len())]
    HypothesisViolation(Vec<Point>),

    #[error("triangle is not admissible: {0}")]
    NotAdmissible(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("unknown gallery entry `{0}`")]
    UnknownGalleryEntry(String),

    #[error("gallery `{name}`: expectation `{predicate}` failed (observed {observed})")]
    ExpectationFailed {
        name: String,
        predicate: String,
        observed: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
