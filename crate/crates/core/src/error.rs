//! Error type shared by all simulator stages.

/// Errors produced by signal construction, DSP stages, and estimators.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("signal band [{f_lo:.3e}, {f_hi:.3e}] Hz exceeds Nyquist {nyquist:.3e} Hz of sample rate {sample_rate:.3e} Hz")]
    BandExceedsNyquist {
        f_lo: f64,
        f_hi: f64,
        nyquist: f64,
        sample_rate: f64,
    },

    #[error("sample-rate mismatch: {left:.6e} Hz vs {right:.6e} Hz")]
    RateMismatch { left: f64, right: f64 },

    #[error("length mismatch: {left} vs {right} samples")]
    LengthMismatch { left: usize, right: usize },

    #[error("delay of {points} points is not shorter than the signal ({len} samples)")]
    DelayTooLong { points: usize, len: usize },

    #[error("delay must lie in [0, duration); got {delay_s:.6e} s for a {duration_s:.6e} s signal")]
    DelayOutOfRange { delay_s: f64, duration_s: f64 },

    #[error("resampling would alias: {fraction:.3e} of the signal power lies above the new Nyquist (limit {limit:.1e})")]
    AliasingRisk { fraction: f64, limit: f64 },

    #[error("reference capture has zero power; cannot form a gain ratio")]
    ZeroReferencePower,

    #[error("cross-correlation peak {peak:.3e} below significance threshold {threshold:.3e}; no delay lock")]
    NoLock { peak: f64, threshold: f64 },

    #[error("frequency band [{f_lo:.3e}, {f_hi:.3e}] Hz contains no PSD bins")]
    EmptyBand { f_lo: f64, f_hi: f64 },

    #[error("segment of {segment} samples is longer than the signal ({len} samples)")]
    SegmentTooLong { segment: usize, len: usize },

    #[error("signal too short: need at least {needed} samples, got {len}")]
    TooShort { needed: usize, len: usize },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
