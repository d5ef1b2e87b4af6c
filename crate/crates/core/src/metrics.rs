//! Spectral measurements behind every reported figure: Welch PSDs, band
//! powers, cancellation depths, spectrograms, and SOI power deltas.
//!
//! Cancellation depth is defined over the interferer's occupied band with the
//! SOI sub-band notched out of the integration: the SOI is not cancellable,
//! and leaving it in would floor the metric. All PSDs are relative (dB);
//! absolute calibration is out of scope.

use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use crate::windows::hann;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::Serialize;

/// Inclusive frequency band in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Band {
    pub fn new(f_lo: f64, f_hi: f64) -> Self {
        Self { f_lo, f_hi }
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.f_lo && f <= self.f_hi
    }
}

/// Welch estimator settings: Hann window, averaged modified periodograms.
#[derive(Debug, Clone, Copy)]
pub struct WelchParams {
    pub segment_len: usize,
    /// Overlap fraction in [0, 1).
    pub overlap: f64,
}

impl Default for WelchParams {
    fn default() -> Self {
        Self {
            segment_len: 8192,
            overlap: 0.5,
        }
    }
}

/// One-sided power spectral density on a uniform frequency grid.
#[derive(Debug, Clone)]
pub struct PsdEstimate {
    pub freqs: Vec<f64>,
    /// dB per bin, relative scale (10*log10 of V^2/Hz).
    pub psd_db: Vec<f64>,
    /// Grid spacing in Hz.
    pub resolution_bw: f64,
}

/// Averaged modified periodogram with a Hann window. The scaling satisfies
/// Parseval: integrating the linear PSD over frequency recovers the
/// mean-square power.
pub fn welch_psd(sig: &SampledSignal, params: &WelchParams) -> Result<PsdEstimate> {
    let n = params.segment_len;
    if n == 0 || !(0.0..1.0).contains(&params.overlap) {
        return Err(Error::Config(format!(
            "welch params invalid: segment_len {} overlap {}",
            n, params.overlap
        )));
    }
    if n > sig.len() {
        return Err(Error::SegmentTooLong {
            segment: n,
            len: sig.len(),
        });
    }
    let step = ((n as f64) * (1.0 - params.overlap)).round().max(1.0) as usize;
    let window = hann(n);
    let win_energy: f64 = window.iter().map(|w| w * w).sum();
    let fs = sig.sample_rate();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let half = n / 2;
    let mut acc = vec![0.0f64; half + 1];
    let mut segments = 0usize;
    let x = sig.samples();
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    let mut start = 0;
    while start + n <= x.len() {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(x[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr();
        }
        segments += 1;
        start += step;
    }

    let scale = 1.0 / (fs * win_energy * segments as f64);
    let df = fs / n as f64;
    let mut freqs = Vec::with_capacity(half + 1);
    let mut psd_db = Vec::with_capacity(half + 1);
    for (k, a) in acc.iter().enumerate() {
        let one_sided = if k == 0 || (n % 2 == 0 && k == half) {
            1.0
        } else {
            2.0
        };
        let lin = (a * scale * one_sided).max(1e-300);
        freqs.push(k as f64 * df);
        psd_db.push(10.0 * lin.log10());
    }
    Ok(PsdEstimate {
        freqs,
        psd_db,
        resolution_bw: df,
    })
}

/// Integral of the linear PSD over `[f_lo, f_hi]`, in dB.
pub fn band_power_db(psd: &PsdEstimate, f_lo: f64, f_hi: f64) -> Result<f64> {
    band_power_db_notched(psd, Band::new(f_lo, f_hi), None)
}

/// Band power with an optional notch excluded from the integration.
pub fn band_power_db_notched(psd: &PsdEstimate, band: Band, notch: Option<Band>) -> Result<f64> {
    if band.f_hi <= band.f_lo {
        return Err(Error::EmptyBand {
            f_lo: band.f_lo,
            f_hi: band.f_hi,
        });
    }
    let mut acc = 0.0;
    let mut bins = 0usize;
    for (f, db) in psd.freqs.iter().zip(&psd.psd_db) {
        if !band.contains(*f) {
            continue;
        }
        if let Some(nb) = notch {
            if nb.contains(*f) {
                continue;
            }
        }
        acc += 10f64.powf(db / 10.0) * psd.resolution_bw;
        bins += 1;
    }
    if bins == 0 {
        return Err(Error::EmptyBand {
            f_lo: band.f_lo,
            f_hi: band.f_hi,
        });
    }
    Ok(10.0 * acc.max(1e-300).log10())
}

/// In-band power drop from `before` to `after` in dB; positive means
/// suppression. Both signals are measured through the same Welch pipeline
/// over `band`, with `notch` (the SOI sub-band) excluded.
pub fn cancellation_depth(
    before: &SampledSignal,
    after: &SampledSignal,
    band: Band,
    notch: Option<Band>,
    params: &WelchParams,
) -> Result<f64> {
    if before.sample_rate() != after.sample_rate() {
        return Err(Error::RateMismatch {
            left: before.sample_rate(),
            right: after.sample_rate(),
        });
    }
    let pb = welch_psd(before, params)?;
    let pa = welch_psd(after, params)?;
    Ok(band_power_db_notched(&pb, band, notch)? - band_power_db_notched(&pa, band, notch)?)
}

/// Short-time Fourier magnitude on a time/frequency grid.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    pub times_s: Vec<f64>,
    pub freqs_hz: Vec<f64>,
    /// `mag_db[t][f]`, dB magnitude-squared per STFT column.
    pub mag_db: Vec<Vec<f64>>,
}

/// Hann-windowed STFT magnitude in dB. An LFM input traces a linear ridge.
pub fn spectrogram(sig: &SampledSignal, window_len: usize, hop: usize) -> Result<Spectrogram> {
    if window_len == 0 || window_len > sig.len() {
        return Err(Error::SegmentTooLong {
            segment: window_len,
            len: sig.len(),
        });
    }
    let hop = hop.max(1);
    let window = hann(window_len);
    let fs = sig.sample_rate();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(window_len);
    let half = window_len / 2;
    let freqs_hz: Vec<f64> = (0..=half).map(|k| k as f64 * fs / window_len as f64).collect();

    let x = sig.samples();
    let mut times_s = Vec::new();
    let mut mag_db = Vec::new();
    let mut buf = vec![Complex::new(0.0, 0.0); window_len];
    let mut start = 0;
    while start + window_len <= x.len() {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(x[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        let col: Vec<f64> = (0..=half)
            .map(|k| 10.0 * buf[k].norm_sqr().max(1e-300).log10())
            .collect();
        times_s.push((start + window_len / 2) as f64 / fs);
        mag_db.push(col);
        start += hop;
    }
    Ok(Spectrogram {
        times_s,
        freqs_hz,
        mag_db,
    })
}

/// SOI-band power change of a ground-truth component across a stage, in dB.
pub fn soi_power_delta_db(
    component_before: &SampledSignal,
    component_after: &SampledSignal,
    band: Band,
    params: &WelchParams,
) -> Result<f64> {
    let pb = welch_psd(component_before, params)?;
    let pa = welch_psd(component_after, params)?;
    Ok(band_power_db_notched(&pa, band, None)? - band_power_db_notched(&pb, band, None)?)
}

/// Everything the run report carries about one cancellation experiment.
#[derive(Debug, Clone)]
pub struct CancellationReport {
    pub analog_depth_db: f64,
    pub digital_depth_db: f64,
    pub total_depth_db: f64,
    pub soi_power_delta_db: Option<f64>,
    pub band: Band,
    pub notch: Option<Band>,
    pub psd_before: PsdEstimate,
    pub psd_analog: PsdEstimate,
    pub psd_total: PsdEstimate,
}

impl CancellationReport {
    /// Compute all three depths from the same PSDs and band so that
    /// analog + digital = total holds by construction.
    pub fn compute(
        before: &SampledSignal,
        after_analog: &SampledSignal,
        after_digital: &SampledSignal,
        band: Band,
        notch: Option<Band>,
        soi_power_delta_db: Option<f64>,
        params: &WelchParams,
    ) -> Result<Self> {
        let psd_before = welch_psd(before, params)?;
        let psd_analog = welch_psd(after_analog, params)?;
        let psd_total = welch_psd(after_digital, params)?;
        let p0 = band_power_db_notched(&psd_before, band, notch)?;
        let p1 = band_power_db_notched(&psd_analog, band, notch)?;
        let p2 = band_power_db_notched(&psd_total, band, notch)?;
        Ok(Self {
            analog_depth_db: p0 - p1,
            digital_depth_db: p1 - p2,
            total_depth_db: p0 - p2,
            soi_power_delta_db,
            band,
            notch,
            psd_before,
            psd_analog,
            psd_total,
        })
    }
}
