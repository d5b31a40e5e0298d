use thiserror::Error;

use crate::netdsl::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("evaluation error at eps = {eps:e}{}: {msg}", fmt_x(.x))]
    Evaluation {
        eps: f64,
        x: Option<Vec<f64>>,
        msg: String,
    },

    #[error("not moderate: no exponent N <= {n_max} bounds {what}")]
    NotModerate { what: String, n_max: u32 },

    #[error("construction failed at eps = {eps:e}: {msg}")]
    Construction { eps: f64, msg: String },

    #[error(transparent)]
    Parse(#[from] ParseError),
}

fn fmt_x(x: &Option<Vec<f64>>) -> String {
    match x {
        Some(x) => format!(", x = {x:?}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn eval_at(eps: f64, x: Option<&[f64]>, msg: impl Into<String>) -> Self {
        Error::Evaluation {
            eps,
            x: x.map(<[f64]>::to_vec),
            msg: msg.into(),
        }
    }
}
