use std::path::PathBuf;

use thiserror::Error;

use crate::bisect::Bracket;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("output directory {} is not empty (pass --force to overwrite)", .0.display())]
    OutputExists(PathBuf),

    #[error("run `{run}`: {source}")]
    Run {
        run: String,
        #[source]
        source: roadfront::Error,
    },

    #[error(transparent)]
    Core(#[from] roadfront::Error),

    #[error("both bracket ends give {outcome}: lo = {lo}, hi = {hi}")]
    SameOutcome { lo: f64, hi: f64, outcome: String },

    #[error("probe {value} still undecided at the horizon cap {horizon}; partial bracket [{}, {}]", .partial.lo, .partial.hi)]
    HorizonExceeded {
        value: f64,
        horizon: f64,
        partial: Box<Bracket>,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

pub(crate) fn config_err(key: impl Into<String>, reason: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        key: key.into(),
        reason: reason.into(),
    }
}

/// Attaches the identity of a run to a solver error.
pub(crate) trait RunContext<T> {
    fn in_run(self, run: &str) -> Result<T>;
}

impl<T> RunContext<T> for roadfront::Result<T> {
    fn in_run(self, run: &str) -> Result<T> {
        self.map_err(|source| HarnessError::Run {
            run: run.to_string(),
            source,
        })
    }
}
