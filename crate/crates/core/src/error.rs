use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` must be strictly positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    #[error("parameter assumption violated: {condition} ({lhs} > {rhs})")]
    AssumptionViolation {
        condition: &'static str,
        lhs: f64,
        rhs: f64,
    },

    #[error("Apollonius circle center is at the target center (|x_C| = {norm:e}); its polar angle is undefined")]
    DegenerateCenter { norm: f64 },

    #[error("intruder radius {radius} is below the engagement-surface floor {floor}")]
    IntruderTooDeep { radius: f64, floor: f64 },

    #[error("engagement time {t} lies outside the surface domain [{t_min}, {t_max}]")]
    OutOfDomain { t: f64, t_min: f64, t_max: f64 },

    #[error("engagement point cannot be reached in time (arccos argument {argument})")]
    Unreachable { argument: f64 },

    #[error("no reachable engagement point exists for intruder at radius {radius}")]
    Infeasible { radius: f64 },

    #[error("internal inconsistency at t={t}: {detail}")]
    InternalInconsistency { t: f64, detail: String },

    #[error("records disagree on game parameters or strategy")]
    MixedConfig,

    #[error("invalid value `{value}` for `{key}`: {reason}")]
    Config {
        key: String,
        value: String,
        reason: String,
    },

    #[error("replay check failed: {0}")]
    InvariantViolation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(key: &str, value: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
