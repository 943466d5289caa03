use serde::Serialize;
use thiserror::Error;

/// Failure modes shared by every algorithm in the crate.
///
/// Verification failures are not errors: they come back as reports with
/// witnesses. Errors are reserved for inputs that violate a precondition or
/// computations that cannot finish inside the finite window they were given.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "error", content = "detail", rename_all = "kebab-case")]
pub enum Error {
    #[error("horizon exceeded: {what}")]
    HorizonExceeded { what: String },
    #[error("budget exhausted after {explored} steps")]
    BudgetExhausted { explored: u64 },
    #[error("unknown point {point}")]
    UnknownPoint { point: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("empty set")]
    EmptySet,
    #[error("margin too small: need {needed}, have {available}")]
    MarginTooSmall { needed: u64, available: u64 },
    #[error("not a net: {0}")]
    NotANet(String),
    #[error("not separated: {0}")]
    NotSeparated(String),
    #[error("distortion mismatch: {0}")]
    DistortionMismatch(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("no anchor point within R = {r}")]
    NoAnchor { r: u64 },
    #[error("restriction tree dies at depth {depth_reached}")]
    NoInfiniteRay { depth_reached: usize },
    #[error("insufficient range: {0}")]
    InsufficientRange(String),
    #[error("mismatched parameters: {0}")]
    MismatchedParameters(String),
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
    #[error("holonomy obstruction: word {word:?} fixes the point but not its neighbours")]
    HolonomyObstruction { word: Vec<String> },
    #[error("unsupported example {name}")]
    UnsupportedName { name: String },
    #[error("not in one orbit")]
    NotInOrbit,
    #[error("resolution unreachable at level {level}")]
    ResolutionUnreachable { level: u32 },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_shape_serializes() {
        for e in [Error::invalid("x"), Error::EmptySet, Error::NoAnchor { r: 3 }] {
            let v = serde_json::to_value(&e).unwrap();
            assert!(v["error"].is_string());
        }
        let v = serde_json::to_value(Error::invalid("bad")).unwrap();
        assert_eq!(v, serde_json::json!({"error": "invalid-input", "detail": "bad"}));
    }
}
