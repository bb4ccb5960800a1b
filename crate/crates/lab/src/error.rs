use formsum_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    /// 2 for configuration errors, 3 for precondition rejections, 4 for
    /// numeric and internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Core(e) if e.is_rejection() => 3,
            Self::Core(CoreError::Serde(_)) => 2,
            Self::Core(_) | Self::Io(_) => 4,
        }
    }
}
