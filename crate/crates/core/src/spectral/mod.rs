//! Shared numerics: windows, all-pole estimation, filtering and dB spectra.

mod dap;
mod filter;
mod lpc;
mod spectrum;
mod window;

pub use dap::{dap, harmonic_frequencies, itakura_saito_error, DapOutcome};
pub use filter::{all_pole_filter, highpass, highpass_taps, integrate, inverse_filter};
pub use lpc::{lpc, AllPoleModel};
pub use spectrum::{magnitude_spectrum_db, MagnitudeSpectrum, DB_FLOOR};
pub use window::{centered_window, window, WindowKind};
