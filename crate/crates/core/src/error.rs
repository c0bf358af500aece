use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("ill-conditioned Gram matrix (condition estimate {condition:e}){}", support_suffix(.support))]
    IllConditioned {
        condition: f64,
        support: Option<Vec<usize>>,
    },

    #[error("support set is empty")]
    EmptySupport,

    #[error("invalid support: {0}")]
    InvalidSupport(String),

    #[error("sparsity level k = {k} outside [1, {n}]")]
    BadK { k: usize, n: usize },

    #[error("{count} subsets exceed the brute-force limit of {limit}")]
    TooManySubsets { count: u128, limit: u128 },

    #[error("inconsistent diagnostics: {0}")]
    Inconsistency(String),

    #[error("instance generation failed: {0}")]
    Gen(String),

    #[error("parse error: {0}")]
    Parse(String),
}

fn support_suffix(support: &Option<Vec<usize>>) -> String {
    match support {
        Some(s) => format!(" on support {s:?}"),
        None => String::new(),
    }
}
