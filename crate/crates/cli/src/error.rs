//! CLI error layer mapping module failures to process exit codes:
//! 2 config invalid, 3 solver divergence, 4 series non-decay, 5 input parse.

use hyperstab::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Divergence { message: String, ratio_trace: Vec<f64> },
    NonDecay(String),
    Parse(String),
    Other(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        CliError::Parse(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Divergence { .. } => 3,
            CliError::NonDecay(_) => 4,
            CliError::Parse(_) => 5,
            CliError::Other(_) => 1,
        }
    }

    /// One-line diagnostic; divergence errors append the ratio trace.
    pub fn diagnostic(&self) -> String {
        match self {
            CliError::Config(m) => format!("config invalid: {m}"),
            CliError::Divergence { message, ratio_trace } => {
                let trace: Vec<String> =
                    ratio_trace.iter().map(|r| format!("{r:.4}")).collect();
                format!("solver divergence: {message}; ratio trace [{}]", trace.join(" "))
            }
            CliError::NonDecay(m) => format!("series non-decay: {m}"),
            CliError::Parse(m) => format!("input parse error: {m}"),
            CliError::Other(m) => m.clone(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::ConfigInvalid(m) => CliError::Config(m),
            CoreError::SolverDivergence { message, ratio_trace } => {
                CliError::Divergence { message, ratio_trace }
            }
            CoreError::SeriesNonDecay(m) => CliError::NonDecay(m),
            CoreError::InputParse(m) => CliError::Parse(m),
            CoreError::ChartOverflow(m) => {
                CliError::Divergence { message: format!("chart overflow: {m}"), ratio_trace: vec![] }
            }
            other => CliError::Other(other.to_string()),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.diagnostic())
    }
}

impl std::error::Error for CliError {}
