use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("too few samples per period: {samples} (need at least {min})")]
    TooFewSamples { samples: usize, min: usize },

    #[error("unknown vowel {0:?} (expected one of a, e, i, u)")]
    UnknownVowel(String),

    #[error("signal is silent; cannot add noise at a finite SNR")]
    SilentSignal,

    #[error("GCI index out of range after shift: {0}")]
    GciOutOfRange(i64),

    #[error("GCI {index} is at the signal edge; a two-period frame needs neighbours on both sides")]
    EdgeGci { index: usize },

    #[error("too few GCIs: {found} (need at least {min})")]
    TooFewGcis { found: usize, min: usize },

    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),

    #[error("polynomial has no nonzero coefficients")]
    ZeroPolynomial,

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("mismatched sample rates: {0} Hz vs {1} Hz")]
    MismatchedFs(u32, u32),

    #[error("no glottal formant peak inside the search band")]
    NoPeak,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("bad config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
