use thiserror::Error;

#[derive(Debug, Error)]
pub enum BiblioError {
    #[error("request for query `{query}` failed after {attempts} attempts (last status {status:?}): {message}")]
    Fetch {
        query: String,
        status: Option<u16>,
        attempts: u32,
        message: String,
    },

    #[error("unexpected response for query `{query}`: {message}")]
    Response { query: String, message: String },

    #[error(transparent)]
    Corpus(#[from] atlas_core::Error),
}

pub type Result<T> = std::result::Result<T, BiblioError>;
