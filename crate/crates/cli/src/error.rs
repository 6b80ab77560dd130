use std::fmt;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or parameters (exit 2).
    Validation(String),
    /// The computation itself failed, e.g. an unphysical state (exit 3).
    Numerical(String),
    /// Output could not be written (exit 74).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 74,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<spincorr::Error> for CliError {
    fn from(e: spincorr::Error) -> Self {
        use spincorr::Error as E;
        match e {
            E::UnphysicalTriple { .. }
            | E::NotHermitian(_)
            | E::NegativeEigenvalue(_)
            | E::BadTrace(_)
            | E::SingularSystem
            | E::IncompleteChannel(_)
            | E::PathologicalSetting(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
