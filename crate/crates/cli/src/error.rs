use sgfif::FifError;
use thiserror::Error;

/// Exit statuses, also listed in `--help`.
pub mod exit {
    pub const OK: u8 = 0;
    pub const FAIL: u8 = 1;
    pub const DATA: u8 = 2;
    pub const CONTRACTION: u8 = 3;
    pub const CONFIG: u8 = 4;
    pub const DOMAIN: u8 = 5;
    pub const CAPACITY: u8 = 6;
    pub const IO: u8 = 7;
    pub const PRECONDITION: u8 = 8;
    pub const USAGE: u8 = 64;
    pub const INTERNAL: u8 = 70;
}

pub const EXIT_CODE_HELP: &str = "\
Exit status:
   0  success
   1  a check or verdict failed
   2  data validation failed (missing, nonzero boundary or conflicting vertex values)
   3  scaling field is not contractive (sup |alpha| >= 1)
   4  config file is empty, malformed or has unknown fields
   5  point outside the domain
   6  capacity guard exceeded (cell or row budget)
   7  I/O error reading the config or writing outputs
   8  precondition violated (e.g. grid depth not a multiple of N)
  64  command-line usage error
  70  internal error";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error(transparent)]
    Model(#[from] FifError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Config(_) => exit::CONFIG,
            CliError::Io(_) => exit::IO,
            CliError::Model(e) => match e {
                FifError::MissingVertices(_)
                | FifError::BoundaryNonZero { .. }
                | FifError::DuplicateVertex { .. }
                | FifError::Validation(_) => exit::DATA,
                FifError::Contraction(_) => exit::CONTRACTION,
                FifError::Domain(_) => exit::DOMAIN,
                FifError::Capacity(_) => exit::CAPACITY,
                FifError::Precondition(_) | FifError::HypothesisNotSatisfied { .. } => exit::PRECONDITION,
                FifError::Internal(_) => exit::INTERNAL,
            },
        }
    }

    pub fn io(context: &str, e: std::io::Error) -> Self {
        CliError::Io(format!("{context}: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
