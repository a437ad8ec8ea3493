use navsim_core::eval::EvalError;
use navsim_core::nn::NnError;
use navsim_core::trainer::{DemoError, SessionError};
use navsim_core::world::WorldError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("model shape manifest does not match the network architecture: {0}")]
    ShapeManifestMismatch(String),
    #[error("file is truncated")]
    TruncatedFile,
    #[error("{0} unexpected trailing bytes")]
    TrailingData(usize),
    #[error("bad action code {0}")]
    BadActionCode(u8),
    #[error("invalid map file: {0}")]
    BadMap(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Demo(#[from] DemoError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Nn(#[from] NnError),
}
