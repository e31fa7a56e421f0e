use alloc::string::String;

/// Errors raised by the engine.
///
/// [`Error::is_validation`] separates bad input from failed checks.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("recursion not applicable: {0}")]
    NotApplicable(String),
    #[error("not Lie-rewritable: {0}")]
    NotLie(String),
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// True for errors caused by invalid input or configuration.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Input(_) | Error::Config(_) | Error::NotApplicable(_)
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
