use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("domain violation in {op} (operand {operand:e}){}", format_point(.point))]
    Domain {
        op: &'static str,
        operand: f64,
        point: Option<Vec<f64>>,
    },

    #[error("domain guard `{guard}` violated at {point:?}")]
    Guard { guard: String, point: Vec<f64> },

    #[error("non-finite value produced at {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("degenerate metric (condition estimate {condition:e})")]
    DegenerateMetric { condition: f64 },

    #[error("input tensor is not symmetric (residual {residual:e})")]
    Asymmetric { residual: f64 },

    #[error("invalid slot: {0}")]
    Slot(String),

    #[error("structure is not cosymplectic (max |F| = {residual:e})")]
    NotF0 { residual: f64 },

    #[error("transformation is not in G0 (residual {residual:e})")]
    NotG0 { residual: f64 },

    #[error("Bochner tensor needs n >= 3, got n = {0}")]
    BochnerDimension(usize),

    #[error("curvature tensor lacks the Kaehler property (residual {residual:e})")]
    NotKaehler { residual: f64 },

    #[error("potential degenerates: k = {value:e} at {point:?}")]
    DegeneratePotential { value: f64, point: Vec<f64> },

    #[error("Gram matrix of g, g~, eta x eta is singular")]
    SingularGram,

    #[error("sampler could not find {wanted} points inside the domain after {tries} tries")]
    SamplerExhausted { wanted: usize, tries: usize },

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("unknown check `{0}`")]
    UnknownCheck(String),
}

fn format_point(point: &Option<Vec<f64>>) -> String {
    match point {
        Some(p) => format!(" at {p:?}"),
        None => String::new(),
    }
}

impl Error {
    /// Attaches the offending coordinate point to a domain error.
    pub fn at_point(self, p: &[f64]) -> Self {
        match self {
            Error::Domain {
                op,
                operand,
                point: None,
            } => Error::Domain {
                op,
                operand,
                point: Some(p.to_vec()),
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
