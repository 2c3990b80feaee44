use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("envelope violation: {0}")]
    Envelope(String),
    #[error("assembly asymmetry {asymmetry:.3e} exceeds threshold {threshold:.3e}")]
    Asymmetry { asymmetry: f64, threshold: f64 },
    #[error("coercivity lost: {0}")]
    Coercivity(String),
    #[error("ill-conditioned system: condition estimate {0:.3e}")]
    IllConditioned(f64),
    #[error("solvability violated: moments {moments:?} exceed tolerance {tol:.1e}")]
    Solvability { moments: Vec<f64>, tol: f64 },
    #[error("no convergence after {iterations} iterations (last increment {last:.3e})")]
    NoConvergence { iterations: usize, last: f64 },
    #[error("singular factorization: {0}")]
    Singular(String),
    #[error("positivity violated: {0}")]
    Positivity(String),
    #[error("smoothness lost near t = {t:.4}: {detail}")]
    LifeSpan { t: f64, detail: String },
    #[error("mesh under-resolved: {0}")]
    Resolution(String),
    #[error("config file not found: {0}")]
    MissingConfig(String),
    #[error("config error in `{field}`: {msg}")]
    Config { field: String, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable variant name for machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Envelope(_) => "envelope",
            Error::Asymmetry { .. } => "asymmetry",
            Error::Coercivity(_) => "coercivity",
            Error::IllConditioned(_) => "ill_conditioned",
            Error::Solvability { .. } => "solvability",
            Error::NoConvergence { .. } => "no_convergence",
            Error::Singular(_) => "singular",
            Error::Positivity(_) => "positivity",
            Error::LifeSpan { .. } => "life_span",
            Error::Resolution(_) => "resolution",
            Error::MissingConfig(_) => "missing_config",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    /// `{"kind", "message", ...}` with the structured fields of the variant.
    pub fn payload(&self) -> serde_json::Value {
        let mut v = serde_json::json!({ "kind": self.kind(), "message": self.to_string() });
        let extra = match self {
            Error::Asymmetry {
                asymmetry,
                threshold,
            } => serde_json::json!({ "asymmetry": asymmetry, "threshold": threshold }),
            Error::IllConditioned(c) => serde_json::json!({ "condition": c }),
            Error::Solvability { moments, tol } => {
                serde_json::json!({ "moments": moments, "tol": tol })
            }
            Error::NoConvergence { iterations, last } => {
                serde_json::json!({ "iterations": iterations, "last": last })
            }
            Error::LifeSpan { t, detail } => serde_json::json!({ "t": t, "detail": detail }),
            Error::MissingConfig(path) => serde_json::json!({ "path": path }),
            Error::Config { field, msg } => serde_json::json!({ "field": field, "msg": msg }),
            _ => serde_json::json!({}),
        };
        if let (Some(obj), serde_json::Value::Object(extra)) = (v.as_object_mut(), extra) {
            obj.extend(extra);
        }
        v
    }
}
