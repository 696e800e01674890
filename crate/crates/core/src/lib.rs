//! Glottal source estimation on synthetic speech.
//!
//! Four estimators are provided: zeros of the z-transform ([`zzt`]),
//! iterative adaptive inverse filtering ([`iaif`]) and anticausality
//! dominated regions ([`acdr`]) applied either to speech or to an IAIF
//! estimate. [`harness`] runs them over a grid of synthetic conditions built
//! by [`synthesis`] and scores them with [`metrics`].

pub mod acdr;
pub mod error;
pub mod harness;
pub mod iaif;
pub mod lf;
pub mod metrics;
pub mod roots;
pub mod signal;
pub mod spectral;
pub mod synthesis;
pub mod zzt;

pub use error::{Error, Result};
