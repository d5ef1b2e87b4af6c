//! Analog front-end model: dual-drive Mach-Zehnder modulator with
//! photodetection, receiver bandwidth limits, optional mixer downconversion,
//! and oscilloscope capture.
//!
//! The DDMZM is biased at the quadrature transmission point, where the
//! detected photocurrent is proportional to sin(pi * (v1 - v2) / Vpi) — the
//! analog subtraction mechanism. A `linearized` mode replaces the sine with
//! its small-signal slope so delay/gain effects can be isolated from
//! nonlinearity.

use crate::error::{Error, Result};
use crate::resample::resample;
use crate::signal::SampledSignal;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// DDMZM transfer model used by `ddmzm_pd`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransferMode {
    Linearized,
    Sinusoidal,
}

/// Physical constants of the modulator, photodetector, and oscilloscope.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontEndParams {
    /// Half-wave voltage of one modulator arm, volts.
    pub v_pi: f64,
    /// Interferometer bias, radians; pi/2 is the quadrature point.
    pub bias_phase: f64,
    /// Photodetector responsivity, A/W.
    pub pd_responsivity: f64,
    /// Photodetector 3-dB bandwidth, Hz.
    pub pd_bandwidth_hz: f64,
    /// Oscilloscope 3-dB bandwidth, Hz.
    pub osc_bandwidth_hz: f64,
    /// Oscilloscope sampling rate, Hz.
    pub osc_sample_rate_hz: f64,
    pub transfer_mode: TransferMode,
    /// Uniform quantizer resolution; `None` is an ideal capture.
    pub adc_bits: Option<u32>,
    /// Order of each low-pass response.
    pub filter_order: usize,
}

impl Default for FrontEndParams {
    fn default() -> Self {
        Self {
            v_pi: 3.5,
            bias_phase: FRAC_PI_2,
            pd_responsivity: 0.88,
            pd_bandwidth_hz: 11e9,
            osc_bandwidth_hz: 3e9,
            osc_sample_rate_hz: 10e9,
            transfer_mode: TransferMode::Sinusoidal,
            adc_bits: None,
            filter_order: 4,
        }
    }
}

impl FrontEndParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_pi > 0.0) {
            return Err(Error::Config(format!("v_pi must be positive, got {}", self.v_pi)));
        }
        for (name, v) in [
            ("pd_bandwidth_hz", self.pd_bandwidth_hz),
            ("osc_bandwidth_hz", self.osc_bandwidth_hz),
            ("osc_sample_rate_hz", self.osc_sample_rate_hz),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.filter_order == 0 {
            return Err(Error::Config("filter_order must be at least 1".into()));
        }
        Ok(())
    }

    /// Constant of proportionality of the detected photocurrent; the
    /// half-power optical bias splits the responsivity.
    pub fn pd_output_scale(&self) -> f64 {
        self.pd_responsivity / 2.0
    }
}

/// AC-coupled photocurrent of the quadrature-biased DDMZM driven by `v1` and
/// `v2`. Identical drives null the output in both modes.
pub fn ddmzm_pd(v1: &SampledSignal, v2: &SampledSignal, p: &FrontEndParams) -> Result<SampledSignal> {
    p.validate()?;
    v1.check_same_grid(v2)?;
    let scale = p.pd_output_scale();
    let raw: Vec<f64> = match p.transfer_mode {
        TransferMode::Sinusoidal => v1
            .samples()
            .iter()
            .zip(v2.samples())
            .map(|(a, b)| scale * (p.bias_phase + PI * (a - b) / p.v_pi).cos())
            .collect(),
        TransferMode::Linearized => {
            let slope = -scale * p.bias_phase.sin() * PI / p.v_pi;
            v1.samples()
                .iter()
                .zip(v2.samples())
                .map(|(a, b)| slope * (a - b))
                .collect()
        }
    };
    // AC coupling removes the detected DC term.
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    SampledSignal::new(raw.into_iter().map(|s| s - mean).collect(), v1.sample_rate())
}

/// Cascaded photodetector and oscilloscope low-pass responses.
pub fn receiver_filter(sig: &SampledSignal, p: &FrontEndParams) -> SampledSignal {
    let fs = sig.sample_rate();
    let mut out = sig.clone();
    for fc in [p.pd_bandwidth_hz, p.osc_bandwidth_hz] {
        // A corner at or beyond Nyquist has no representable effect.
        if fc < 0.49 * fs {
            out = butterworth_lowpass(&out, fc, p.filter_order);
        }
    }
    out
}

/// Multiply by the LO and reject the image with a low-pass at `lo_freq/2`.
pub fn mixer_downconvert(sig: &SampledSignal, lo_freq: f64, lo_phase: f64) -> Result<SampledSignal> {
    if lo_freq < 0.0 || lo_freq >= sig.sample_rate() / 2.0 {
        return Err(Error::Config(format!(
            "LO frequency {lo_freq} Hz must lie in [0, Nyquist {})",
            sig.sample_rate() / 2.0
        )));
    }
    if lo_freq == 0.0 {
        return Ok(sig.clone());
    }
    let fs = sig.sample_rate();
    let mixed: Vec<f64> = sig
        .samples()
        .iter()
        .enumerate()
        .map(|(i, s)| s * (2.0 * PI * lo_freq * i as f64 / fs + lo_phase).cos())
        .collect();
    let mixed = SampledSignal::new(mixed, fs)?;
    Ok(butterworth_lowpass(&mixed, lo_freq / 2.0, 6))
}

/// Receiver filtering, decimation to the oscilloscope rate, and optional
/// uniform quantization.
pub fn capture(sig: &SampledSignal, p: &FrontEndParams) -> Result<SampledSignal> {
    p.validate()?;
    let filtered = receiver_filter(sig, p);
    let sampled = resample(&filtered, p.osc_sample_rate_hz)?;
    match p.adc_bits {
        Some(bits) => quantize(&sampled, bits),
        None => Ok(sampled),
    }
}

/// Mid-rise uniform quantizer auto-ranged to the signal peak.
fn quantize(sig: &SampledSignal, bits: u32) -> Result<SampledSignal> {
    if bits == 0 || bits > 32 {
        return Err(Error::Config(format!("adc_bits must lie in [1, 32], got {bits}")));
    }
    let full_scale = sig.samples().iter().fold(0.0_f64, |m, s| m.max(s.abs()));
    if full_scale == 0.0 {
        return Ok(sig.clone());
    }
    let levels = 2u64.pow(bits) as f64;
    let step = 2.0 * full_scale / levels;
    let max_index = levels / 2.0 - 1.0;
    let samples = sig
        .samples()
        .iter()
        .map(|s| {
            let idx = (s / step).floor().clamp(-levels / 2.0, max_index);
            (idx + 0.5) * step
        })
        .collect();
    SampledSignal::new(samples, sig.sample_rate())
}

/// Cascaded-biquad Butterworth low-pass, applied causally.
pub fn butterworth_lowpass(sig: &SampledSignal, fc: f64, order: usize) -> SampledSignal {
    let sections = butterworth_sections(fc, sig.sample_rate(), order);
    let mut samples = sig.samples().to_vec();
    for mut sec in sections {
        for s in &mut samples {
            *s = sec.step(*s);
        }
    }
    SampledSignal::from_parts(samples, sig.sample_rate())
}

/// Squared magnitude of the digital Butterworth cascade at frequency `f`.
/// This is the designed response the white-noise oracle checks against.
pub fn butterworth_magnitude_sq(fc: f64, fs: f64, order: usize, f: f64) -> f64 {
    let sections = butterworth_sections(fc, fs, order);
    let omega = 2.0 * PI * f / fs;
    let z = rustfft::num_complex::Complex::new(omega.cos(), -omega.sin());
    let mut h = rustfft::num_complex::Complex::new(1.0, 0.0);
    for sec in sections {
        let num = rustfft::num_complex::Complex::new(sec.b0, 0.0)
            + z * sec.b1
            + z * z * sec.b2;
        let den = rustfft::num_complex::Complex::new(1.0, 0.0) + z * sec.a1 + z * z * sec.a2;
        h *= num / den;
    }
    h.norm_sqr()
}

#[derive(Debug, Clone, Copy)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
    s1: f64,
    s2: f64,
}

impl Biquad {
    /// Transposed direct form II.
    fn step(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.s1;
        self.s1 = self.b1 * x - self.a1 * y + self.s2;
        self.s2 = self.b2 * x - self.a2 * y;
        y
    }
}

/// Butterworth pole pairs mapped through the bilinear transform; the corner
/// lands exactly at -3 dB. Odd orders get a trailing first-order section.
fn butterworth_sections(fc: f64, fs: f64, order: usize) -> Vec<Biquad> {
    let order = order.max(1);
    let omega0 = 2.0 * PI * fc / fs;
    let mut sections = Vec::new();
    let pairs = order / 2;
    for k in 0..pairs {
        let theta = PI * (2.0 * k as f64 + 1.0) / (2.0 * order as f64);
        let q = 1.0 / (2.0 * theta.sin());
        let alpha = omega0.sin() / (2.0 * q);
        let cosw = omega0.cos();
        let a0 = 1.0 + alpha;
        sections.push(Biquad {
            b0: (1.0 - cosw) / 2.0 / a0,
            b1: (1.0 - cosw) / a0,
            b2: (1.0 - cosw) / 2.0 / a0,
            a1: -2.0 * cosw / a0,
            a2: (1.0 - alpha) / a0,
            s1: 0.0,
            s2: 0.0,
        });
    }
    if order % 2 == 1 {
        let w = (omega0 / 2.0).tan();
        let a0 = w + 1.0;
        sections.push(Biquad {
            b0: w / a0,
            b1: w / a0,
            b2: 0.0,
            a1: (w - 1.0) / a0,
            a2: 0.0,
            s1: 0.0,
            s2: 0.0,
        });
    }
    sections
}
