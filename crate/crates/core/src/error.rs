use thiserror::Error;

pub type Result<T> = std::result::Result<T, OddmError>;

/// Problems with user-supplied parameters. These map to exit code 2 in the CLI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("unsupported modulation order {0}")]
    UnsupportedOrder(u32),
    #[error("invalid pulse: {0}")]
    Pulse(String),
    #[error("invalid channel profile: {0}")]
    Channel(String),
    #[error("tap delay index {delay_idx} exceeds cyclic prefix length {cp_len}")]
    DelayExceedsPrefix { delay_idx: usize, cp_len: usize },
    #[error("invalid modulo parameter: {0}")]
    Modulo(String),
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("invalid simulation config: {0}")]
    Sim(String),
}

#[derive(Debug, Error)]
pub enum OddmError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("bit count {0} is not a multiple of bits per symbol {1}")]
    BitCount(usize, usize),
    #[error("first tap gain {0:.3e} is below the precoding floor")]
    WeakFirstTap(f64),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl OddmError {
    pub fn is_config(&self) -> bool {
        matches!(self, OddmError::Config(_) | OddmError::Json(_))
    }
}
