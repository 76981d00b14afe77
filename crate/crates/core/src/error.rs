use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("{}: {err}", path.display())]
    Io { path: PathBuf, err: std::io::Error },

    #[error("{0}")]
    Data(String),

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("{what} = {value} outside table range [{lo}, {hi}]")]
    OutOfRange { what: String, value: f64, lo: f64, hi: f64 },

    #[error("S2 starved; increase first-pass statistics")]
    Starved,

    #[error("undefined equivalent time: {0}")]
    UndefinedTime(String),

    #[error("division by a zero rate")]
    ZeroRate,

    #[error("{0}")]
    Mismatch(String),
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), line, msg: msg.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), err: source }
    }
}

pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
