//! Real-valued sampled waveforms and the elementary gain/delay operations.
//!
//! `SampledSignal` is the currency passed between every pipeline stage: a
//! finite block of real amplitudes (volts) with an explicit sample rate.
//! Values are immutable once constructed; every operation returns a new
//! signal.

use crate::error::{Error, Result};
use crate::windows::kaiser;

/// Default half-width (in samples) of the windowed-sinc fractional-delay kernel.
pub const FRACTIONAL_DELAY_HALF_WIDTH: usize = 64;

/// Kaiser shape parameter for the fractional-delay kernel.
const FRACTIONAL_DELAY_BETA: f64 = 10.0;

/// A real-valued waveform with an explicit sample rate in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl SampledSignal {
    /// Build a signal, enforcing a positive rate, finite samples, and
    /// non-zero length.
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::Config(format!(
                "sample_rate must be positive and finite, got {sample_rate}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::Config("signal must contain at least one sample".into()));
        }
        if let Some(bad) = samples.iter().find(|s| !s.is_finite()) {
            return Err(Error::Config(format!("non-finite sample value {bad}")));
        }
        Ok(Self { samples, sample_rate })
    }

    /// All-zero signal of the given length and rate.
    pub fn zeros(len: usize, sample_rate: f64) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Mean-square power.
    pub fn power(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }

    /// Samplewise multiplication by a finite gain.
    pub fn scale(&self, gain: f64) -> Result<Self> {
        if !gain.is_finite() {
            return Err(Error::Config(format!("gain must be finite, got {gain}")));
        }
        let samples = self.samples.iter().map(|s| s * gain).collect();
        Ok(Self {
            samples,
            sample_rate: self.sample_rate,
        })
    }

    /// Whole-sample delay: `y[n] = x[n - points]`, zero-filled head, length
    /// preserved (the tail falls off the end).
    pub fn delay_integer(&self, points: usize) -> Result<Self> {
        if points >= self.samples.len() {
            return Err(Error::DelayTooLong {
                points,
                len: self.samples.len(),
            });
        }
        let mut samples = vec![0.0; self.samples.len()];
        samples[points..].copy_from_slice(&self.samples[..self.samples.len() - points]);
        Ok(Self {
            samples,
            sample_rate: self.sample_rate,
        })
    }

    /// Sub-sample delay via windowed-sinc interpolation with the default
    /// kernel half-width. A delay landing exactly on a sample reduces to
    /// `delay_integer`.
    pub fn delay_fractional(&self, delay_s: f64) -> Result<Self> {
        self.delay_fractional_with(delay_s, FRACTIONAL_DELAY_HALF_WIDTH)
    }

    /// Sub-sample delay with an explicit kernel half-width in samples.
    pub fn delay_fractional_with(&self, delay_s: f64, half_width: usize) -> Result<Self> {
        if !(0.0..self.duration_s()).contains(&delay_s) {
            return Err(Error::DelayOutOfRange {
                delay_s,
                duration_s: self.duration_s(),
            });
        }
        let delay_samples = delay_s * self.sample_rate;
        let whole = delay_samples.floor();
        let frac = delay_samples - whole;
        // On-grid delays shift exactly; the sinc kernel would only add noise.
        if frac == 0.0 {
            return self.delay_integer(whole as usize);
        }
        let h = half_width.max(1) as isize;
        let n = self.samples.len() as isize;
        let mut out = vec![0.0; self.samples.len()];
        // y[m] = sum_k x[m - whole - k] * K(k - frac), kernel support (-h, h]
        let mut taps = Vec::with_capacity(2 * h as usize);
        for k in (-h + 1)..=h {
            let t = k as f64 - frac;
            let w = kaiser(t / h as f64, FRACTIONAL_DELAY_BETA);
            taps.push((k, sinc(t) * w));
        }
        let norm: f64 = taps.iter().map(|(_, v)| v).sum();
        for (m, o) in out.iter_mut().enumerate() {
            let base = m as isize - whole as isize;
            let mut acc = 0.0;
            for &(k, v) in &taps {
                let idx = base - k;
                if idx >= 0 && idx < n {
                    acc += self.samples[idx as usize] * v;
                }
            }
            *o = acc / norm;
        }
        Ok(Self {
            samples: out,
            sample_rate: self.sample_rate,
        })
    }

    /// Samplewise sum; rates and lengths must match.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            samples,
            sample_rate: self.sample_rate,
        })
    }

    /// Samplewise difference; rates and lengths must match.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            samples,
            sample_rate: self.sample_rate,
        })
    }

    /// Keep samples `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.samples.len() || len == 0 {
            return Err(Error::TooShort {
                needed: start + len.max(1),
                len: self.samples.len(),
            });
        }
        Ok(Self {
            samples: self.samples[start..start + len].to_vec(),
            sample_rate: self.sample_rate,
        })
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.sample_rate != other.sample_rate {
            return Err(Error::RateMismatch {
                left: self.sample_rate,
                right: other.sample_rate,
            });
        }
        if self.samples.len() != other.samples.len() {
            return Err(Error::LengthMismatch {
                left: self.samples.len(),
                right: other.samples.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn from_parts(samples: Vec<f64>, sample_rate: f64) -> Self {
        Self { samples, sample_rate }
    }
}

pub(crate) fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}
