use liveref_core::CoreError;

#[derive(Debug, thiserror::Error)]
pub enum EsdsError {
    #[error("config: {0}")]
    Config(String),
    #[error("valset: {0}")]
    Valset(String),
    #[error("unknown component kind {0}")]
    UnknownKind(String),
    #[error("signature clash: {0}")]
    SignatureClash(String),
    #[error("unknown action {0}")]
    UnknownAction(String),
    #[error("replay failed at event {index}: {detail}")]
    Replay { index: usize, detail: String },
    #[error("invariant violated at step {step}: {detail}")]
    Invariant { step: usize, detail: String },
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] CoreError),
}
