//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by algebra, group, interaction and simulation code.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Vector or operator dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A value that must be finite is NaN or infinite.
    #[error("non-finite input in {context}")]
    NonFinite { context: &'static str },

    /// Structure constants fail antisymmetry or the Jacobi identity.
    #[error("invalid structure constants: {0}")]
    InvalidStructureConstants(String),

    /// Index sets do not form a valid subspace split.
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    /// Cost metric is not symmetric positive definite on the actuated block
    /// or has support outside it.
    #[error("invalid cost metric: {0}")]
    InvalidMetric(String),

    /// A vector has nonzero coefficients outside its required subspace.
    #[error("support violation: {context}")]
    SupportViolation { context: &'static str },

    /// A group element drifted outside SE(2) beyond the configured tolerance.
    #[error("group invariant violated: orthogonality defect {defect:.3e} exceeds {tol:.3e}")]
    GroupInvariant { defect: f64, tol: f64 },

    /// Matrix passed to vee has components outside the algebra span.
    #[error("matrix outside the algebra span: residual {residual:.3e}")]
    OutsideSpan { residual: f64 },

    /// Logarithm evaluated at or too close to the cut locus.
    #[error("log undefined near the cut locus: theta = {theta}")]
    LogDomain { theta: f64 },

    /// Graph construction error (self-loop, vertex out of range, ...).
    #[error("invalid interaction graph: {0}")]
    InvalidGraph(String),

    /// Agent index out of range.
    #[error("agent index {index} out of range for {count} agents")]
    AgentIndex { index: usize, count: usize },

    /// A pair of agents entered the collision shell where the barrier
    /// potential is undefined.
    #[error("collision between agents {i} and {j} at t = {time} (step {step}): center distance {dist:.6} <= {min_dist:.6}")]
    Collision {
        i: usize,
        j: usize,
        time: f64,
        step: usize,
        dist: f64,
        min_dist: f64,
    },

    /// State became NaN or infinite during integration.
    #[error("non-finite state at t = {time} (step {step}) in {context}")]
    NonFiniteState {
        time: f64,
        step: usize,
        context: &'static str,
    },

    /// Scenario configuration is unusable; `field` is a path such as
    /// `agents[2].pose`.
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Stamp a runtime error raised inside an integration step with the
    /// simulation time and step index.
    pub fn at_step(self, time: f64, step: usize) -> Self {
        match self {
            Error::Collision {
                i, j, dist, min_dist, ..
            } => Error::Collision {
                i,
                j,
                time,
                step,
                dist,
                min_dist,
            },
            Error::NonFiniteState { context, .. } => Error::NonFiniteState {
                time,
                step,
                context,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
