use thiserror::Error;

pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DOMAIN: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;
pub const EXIT_ORACLE_MISMATCH: u8 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] gravdec::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{failed} of {total} oracle cases disagree with the closed form")]
    OracleMismatch { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use gravdec::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::OracleMismatch { .. } => EXIT_ORACLE_MISMATCH,
            CliError::Core(e) => match e {
                E::NumericalInstability(_) => EXIT_NUMERICAL,
                E::Parse { .. } => EXIT_CONFIG,
                E::Io(_) | E::Csv(_) | E::Json(_) => EXIT_IO,
                E::Domain(_)
                | E::HistoryExhausted { .. }
                | E::OraclePrecondition(_)
                | E::CutoffTooSmall { .. } => EXIT_DOMAIN,
            },
        }
    }
}
