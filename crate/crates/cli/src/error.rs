use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Library(vanet_hardcore::Error),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(e) if e.is_numeric() => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => f.write_str(m),
            CliError::Library(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl<E: Into<vanet_hardcore::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Library(e.into())
    }
}
