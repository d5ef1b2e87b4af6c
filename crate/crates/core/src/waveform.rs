//! LFM chirp and root-raised-cosine QPSK waveform synthesis.
//!
//! All synthesis is real-valued passband, matching what an arbitrary waveform
//! generator would emit; complex baseband exists only inside the QPSK
//! modulator. Waveforms are peak-normalized to 1 V.

use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// RRC span on each side of a symbol, in symbols.
const RRC_SPAN_SYMBOLS: usize = 8;

/// Waveform family plus its family-specific parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum WaveformKind {
    /// Linear FM chirp sweeping `bandwidth_hz` centered on the carrier.
    Lfm { bandwidth_hz: f64 },
    /// Root-raised-cosine shaped QPSK at `baud_hz` symbols/s.
    Qpsk {
        baud_hz: f64,
        rolloff: f64,
        symbol_seed: u64,
    },
}

/// Full description of a synthesizable waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformSpec {
    pub kind: WaveformKind,
    pub center_freq_hz: f64,
    pub duration_s: f64,
}

impl WaveformSpec {
    /// Occupied band edges: the sweep band for LFM, `(1+rolloff)*baud` for QPSK.
    pub fn occupied_band(&self) -> (f64, f64) {
        let half = match &self.kind {
            WaveformKind::Lfm { bandwidth_hz } => bandwidth_hz / 2.0,
            WaveformKind::Qpsk { baud_hz, rolloff, .. } => (1.0 + rolloff) * baud_hz / 2.0,
        };
        (self.center_freq_hz - half, self.center_freq_hz + half)
    }

    fn check_fits(&self, sample_rate: f64) -> Result<()> {
        let (f_lo, f_hi) = self.occupied_band();
        let nyquist = sample_rate / 2.0;
        if f_lo < 0.0 || f_hi >= nyquist {
            return Err(Error::BandExceedsNyquist {
                f_lo,
                f_hi,
                nyquist,
                sample_rate,
            });
        }
        if let WaveformKind::Qpsk { rolloff, .. } = &self.kind {
            if !(0.0..=1.0).contains(rolloff) {
                return Err(Error::Config(format!(
                    "rolloff must lie in [0, 1], got {rolloff}"
                )));
            }
        }
        if !(self.duration_s > 0.0) {
            return Err(Error::Config(format!(
                "duration must be positive, got {}",
                self.duration_s
            )));
        }
        Ok(())
    }
}

/// Dispatch on the waveform kind.
pub fn generate(spec: &WaveformSpec, sample_rate: f64) -> Result<SampledSignal> {
    match &spec.kind {
        WaveformKind::Lfm { .. } => generate_lfm(spec, sample_rate),
        WaveformKind::Qpsk { .. } => generate_qpsk(spec, sample_rate),
    }
}

/// Real chirp with unit peak, instantaneous frequency sweeping linearly from
/// `center - bw/2` to `center + bw/2` over the duration. Deterministic.
pub fn generate_lfm(spec: &WaveformSpec, sample_rate: f64) -> Result<SampledSignal> {
    let WaveformKind::Lfm { bandwidth_hz } = spec.kind else {
        return Err(Error::Config("generate_lfm called on a non-LFM spec".into()));
    };
    spec.check_fits(sample_rate)?;
    let n = (spec.duration_s * sample_rate).round() as usize;
    if n == 0 {
        return Err(Error::Config("duration too short for one sample".into()));
    }
    let f0 = spec.center_freq_hz - bandwidth_hz / 2.0;
    let rate = bandwidth_hz / spec.duration_s; // Hz per second
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / sample_rate;
            (2.0 * PI * (f0 * t + 0.5 * rate * t * t)).sin()
        })
        .collect();
    SampledSignal::new(samples, sample_rate)
}

/// Seeded QPSK symbol stream as (I, Q) signs scaled to unit energy.
pub fn qpsk_symbols(symbol_seed: u64, count: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(symbol_seed);
    (0..count)
        .map(|_| {
            let bits: u8 = rng.random_range(0..4);
            let i = if bits & 1 == 0 { 1.0 } else { -1.0 };
            let q = if bits & 2 == 0 { 1.0 } else { -1.0 };
            (i * FRAC_1_SQRT_2, q * FRAC_1_SQRT_2)
        })
        .collect()
}

/// Root-raised-cosine impulse response at `t` symbol periods, rolloff `beta`.
pub fn rrc_tap(t: f64, beta: f64) -> f64 {
    if t == 0.0 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 {
        let singular = 1.0 / (4.0 * beta);
        if (t.abs() - singular).abs() < 1e-9 {
            return (beta / std::f64::consts::SQRT_2)
                * ((1.0 + 2.0 / PI) * (PI / (4.0 * beta)).sin()
                    + (1.0 - 2.0 / PI) * (PI / (4.0 * beta)).cos());
        }
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t) * (4.0 * beta * t));
    num / den
}

/// Real passband QPSK with RRC pulse shaping. Identical seeds give
/// bit-identical output.
pub fn generate_qpsk(spec: &WaveformSpec, sample_rate: f64) -> Result<SampledSignal> {
    let WaveformKind::Qpsk {
        baud_hz,
        rolloff,
        symbol_seed,
    } = spec.kind
    else {
        return Err(Error::Config("generate_qpsk called on a non-QPSK spec".into()));
    };
    spec.check_fits(sample_rate)?;
    let sps_f = sample_rate / baud_hz;
    let sps = sps_f.round() as usize;
    if sps < 2 || (sps_f - sps as f64).abs() > 1e-6 {
        return Err(Error::Config(format!(
            "sample rate {sample_rate} Hz must be an integer multiple (>= 2) of the baud rate {baud_hz} Hz; got {sps_f} samples/symbol"
        )));
    }
    let n = (spec.duration_s * sample_rate).round() as usize;
    if n == 0 {
        return Err(Error::Config("duration too short for one sample".into()));
    }
    let n_symbols = n.div_ceil(sps) + RRC_SPAN_SYMBOLS;
    let symbols = qpsk_symbols(symbol_seed, n_symbols);

    // RRC prototype over +-RRC_SPAN_SYMBOLS symbols.
    let half = RRC_SPAN_SYMBOLS * sps;
    let taps: Vec<f64> = (0..=2 * half)
        .map(|i| rrc_tap((i as f64 - half as f64) / sps as f64, rolloff))
        .collect();

    // Baseband I/Q by pulse superposition; symbol k is centered at k*sps.
    let mut i_bb = vec![0.0; n];
    let mut q_bb = vec![0.0; n];
    for (k, &(si, sq)) in symbols.iter().enumerate() {
        let center = (k * sps) as isize;
        for (j, &h) in taps.iter().enumerate() {
            let idx = center + j as isize - half as isize;
            if idx >= 0 && (idx as usize) < n {
                i_bb[idx as usize] += si * h;
                q_bb[idx as usize] += sq * h;
            }
        }
    }

    // Upconvert to real passband and peak-normalize.
    let mut samples: Vec<f64> = (0..n)
        .map(|idx| {
            let ph = 2.0 * PI * spec.center_freq_hz * idx as f64 / sample_rate;
            i_bb[idx] * ph.cos() - q_bb[idx] * ph.sin()
        })
        .collect();
    let peak = samples.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        for s in &mut samples {
            *s /= peak;
        }
    }
    SampledSignal::new(samples, sample_rate)
}
