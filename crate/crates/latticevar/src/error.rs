use std::path::PathBuf;

/// Failures of the batch front end, each mapped to a process exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Solver(#[from] latticevar_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Schema(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

/// Short machine-readable code stored in the `error` column of failed rows.
pub fn error_code(e: &latticevar_core::Error) -> &'static str {
    use latticevar_core::Error::*;
    match e {
        InvalidParameter(_) => "invalid_parameter",
        Degenerate(_) => "degenerate",
        DimensionOverflow { .. } => "dimension_overflow",
        NoConvergence { .. } => "no_convergence",
        StepCollapse { .. } => "step_collapse",
        PurityProjection { .. } => "purity_projection",
        NoCrossing => "no_crossing",
        OutOfRange { .. } => "out_of_range",
        Precondition(_) => "precondition",
    }
}
