//! Signal-level model of a photonic RF self-interference canceller.
//!
//! The pipeline mirrors a full-duplex transceiver testbed: a transmitted
//! waveform leaks into the receiver through a direct path and echoes
//! (`channel`), a dual-drive Mach-Zehnder modulator subtracts a digitally
//! pre-matched reference copy in the analog domain (`frontend`, `prematch`),
//! and NLMS/RLS adaptive filters remove what survives (`canceller`).
//! `metrics` measures the outcome: PSDs, band powers, cancellation depths,
//! and spectrograms.
//!
//! Everything is deterministic given the configured seeds; all operations
//! are pure functions over immutable [`SampledSignal`] values.

pub mod canceller;
pub mod channel;
pub mod error;
pub mod frontend;
pub mod metrics;
pub mod prematch;
pub mod resample;
pub mod signal;
pub mod waveform;
mod windows;

pub use error::{Error, Result};
pub use signal::SampledSignal;
