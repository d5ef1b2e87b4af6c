//! Band-limited sample-rate conversion between the 10 GSa/s processing grid
//! and the 64 GSa/s generation grid.
//!
//! Rational rate ratios (64/10 = 32/5) use a precomputed polyphase bank of
//! Kaiser-windowed sinc kernels, one phase per fractional offset, so the
//! conversion is exact-in-phase and drift-free. The kernel is centered, so
//! the output carries no net group delay. Downsampling verifies that no
//! significant power sat above the new Nyquist; silent aliasing is an error.

use crate::error::{Error, Result};
use crate::signal::{sinc, SampledSignal};
use crate::windows::kaiser;

/// Zero crossings of the kernel on each side, at the limiting rate.
const KERNEL_ZERO_CROSSINGS: f64 = 32.0;

/// Kaiser shape parameter for the anti-alias kernel.
const KERNEL_BETA: f64 = 10.0;

/// Fraction of input power allowed above the output Nyquist before the
/// conversion is declared aliasing.
const ALIAS_POWER_LIMIT: f64 = 1e-3;

/// Mean-square level below which a signal counts as numerical silence and
/// the aliasing check is meaningless. Working signals sit at volt scale;
/// perfectly cancelled residuals sit at f64 rounding noise far below this.
const ALIAS_CHECK_SILENCE_FLOOR: f64 = 1e-24;

/// Resample to `new_rate`, preserving the in-band spectrum. Errors if the
/// input carries significant power above the new Nyquist.
pub fn resample(sig: &SampledSignal, new_rate: f64) -> Result<SampledSignal> {
    if !(new_rate > 0.0) || !new_rate.is_finite() {
        return Err(Error::Config(format!(
            "new_rate must be positive and finite, got {new_rate}"
        )));
    }
    let old_rate = sig.sample_rate();
    if new_rate == old_rate {
        return Ok(sig.clone());
    }
    let ratio = new_rate / old_rate;
    // Cutoff in cycles per input sample; anti-alias when decimating.
    let cutoff = 0.5 * ratio.min(1.0);
    // Stretch the kernel so it always spans the same number of zero
    // crossings of the limiting rate.
    let half_width = (KERNEL_ZERO_CROSSINGS / (2.0 * cutoff)).ceil() as isize;

    let out_len = ((sig.len() as u128 * rational(ratio).0 as u128)
        / rational(ratio).1 as u128) as usize;
    let out_len = out_len.max(1);

    let x = sig.samples();
    let n = x.len() as isize;
    let mut out = vec![0.0; out_len];

    let (p, q) = rational(ratio);
    if p != 0 {
        // Rational path: fractional offsets cycle with period p.
        let phases: Vec<Vec<(isize, f64)>> = (0..p)
            .map(|ph| {
                // Output m = ph (mod p) sits at input time (ph*q)/p + integer.
                let frac = (ph as f64 * q as f64 / p as f64).fract();
                kernel_taps(frac, half_width, cutoff)
            })
            .collect();
        for (m, o) in out.iter_mut().enumerate() {
            let num = m as u128 * q as u128;
            let base = (num / p as u128) as isize;
            let taps = &phases[m % p as usize];
            let mut acc = 0.0;
            for &(j, v) in taps {
                let idx = base + j;
                if idx >= 0 && idx < n {
                    acc += x[idx as usize] * v;
                }
            }
            *o = acc;
        }
    } else {
        // Irrational ratio: evaluate the kernel per output sample.
        for (m, o) in out.iter_mut().enumerate() {
            let t = m as f64 / ratio;
            let base = t.floor() as isize;
            let taps = kernel_taps(t.fract(), half_width, cutoff);
            let mut acc = 0.0;
            for &(j, v) in &taps {
                let idx = base + j;
                if idx >= 0 && idx < n {
                    acc += x[idx as usize] * v;
                }
            }
            *o = acc;
        }
    }

    let resampled = SampledSignal::new(out, new_rate)?;
    if ratio < 1.0 {
        check_aliasing(sig, &resampled, half_width)?;
    }
    Ok(resampled)
}

/// Taps for one fractional offset: k(j - frac) for j in (-h, h], normalized
/// to unit DC gain so the gain is identical across phases.
fn kernel_taps(frac: f64, half_width: isize, cutoff: f64) -> Vec<(isize, f64)> {
    let h = half_width;
    let mut taps = Vec::with_capacity(2 * h as usize);
    for j in (-h + 1)..=h {
        let t = j as f64 - frac;
        let w = kaiser(t / h as f64, KERNEL_BETA);
        let v = 2.0 * cutoff * sinc(2.0 * cutoff * t) * w;
        taps.push((j, v));
    }
    let sum: f64 = taps.iter().map(|(_, v)| v).sum();
    for t in &mut taps {
        t.1 /= sum;
    }
    taps
}

/// Express `ratio` as p/q with a small denominator; (0, 0) when no exact
/// small rational exists.
fn rational(ratio: f64) -> (u64, u64) {
    for q in 1..=4096u64 {
        let p = ratio * q as f64;
        if (p - p.round()).abs() < 1e-9 && p.round() >= 1.0 {
            return (p.round() as u64, q);
        }
    }
    (0, 0)
}

/// Decimation removes everything above the new Nyquist; if that discards a
/// meaningful share of the power, the caller was aliasing.
fn check_aliasing(input: &SampledSignal, output: &SampledSignal, half_width: isize) -> Result<()> {
    // Compare interior mean squares; edges are kernel spill.
    let guard_in = (2 * half_width as usize).min(input.len() / 4);
    let guard_out = ((guard_in as f64 * output.sample_rate() / input.sample_rate()).ceil()
        as usize)
        .min(output.len() / 4);
    let p_in = interior_power(input, guard_in);
    let p_out = interior_power(output, guard_out);
    if p_in <= ALIAS_CHECK_SILENCE_FLOOR {
        return Ok(());
    }
    let fraction = ((p_in - p_out) / p_in).max(0.0);
    if fraction > ALIAS_POWER_LIMIT {
        return Err(Error::AliasingRisk {
            fraction,
            limit: ALIAS_POWER_LIMIT,
        });
    }
    Ok(())
}

fn interior_power(sig: &SampledSignal, guard: usize) -> f64 {
    let s = sig.samples();
    let inner = &s[guard..s.len() - guard];
    if inner.is_empty() {
        return sig.power();
    }
    inner.iter().map(|v| v * v).sum::<f64>() / inner.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{welch_psd, WelchParams};
    use crate::waveform::{generate_lfm, WaveformKind, WaveformSpec};
    use std::f64::consts::PI;

    fn tone(freq: f64, rate: f64, n: usize) -> SampledSignal {
        let samples = (0..n)
            .map(|i| (2.0 * PI * freq * i as f64 / rate).sin())
            .collect();
        SampledSignal::new(samples, rate).unwrap()
    }

    #[test]
    fn same_rate_is_identity() {
        let sig = tone(1e9, 10e9, 1000);
        assert_eq!(resample(&sig, 10e9).unwrap(), sig);
    }

    #[test]
    fn tone_amplitude_preserved_within_half_percent() {
        // Sinusoid-fit oracle on the interior of the upsampled tone.
        let sig = tone(1e9, 10e9, 20000);
        let up = resample(&sig, 64e9).unwrap();
        assert_eq!(up.sample_rate(), 64e9);
        let interior = up.slice(4096, up.len() - 8192).unwrap();
        let n = interior.len() as f64;
        let (mut s, mut c) = (0.0, 0.0);
        for (i, x) in interior.samples().iter().enumerate() {
            let ph = 2.0 * PI * 1e9 * i as f64 / 64e9;
            s += x * ph.sin();
            c += x * ph.cos();
        }
        let amp = ((2.0 * s / n).powi(2) + (2.0 * c / n).powi(2)).sqrt();
        assert!((amp - 1.0).abs() < 0.005, "amplitude {amp}");
    }

    #[test]
    fn round_trip_preserves_in_band_psd_within_0p1_db() {
        let spec = WaveformSpec {
            kind: WaveformKind::Lfm { bandwidth_hz: 2e9 },
            center_freq_hz: 2.4e9,
            duration_s: 10e-6,
        };
        let sig = generate_lfm(&spec, 10e9).unwrap();
        let round = resample(&resample(&sig, 64e9).unwrap(), 10e9).unwrap();
        assert_eq!(round.len(), sig.len());
        // Compare interiors so resampler edge spill is excluded.
        let a = sig.slice(2000, sig.len() - 4000).unwrap();
        let b = round.slice(2000, round.len() - 4000).unwrap();
        let wp = WelchParams::default();
        let pa = welch_psd(&a, &wp).unwrap();
        let pb = welch_psd(&b, &wp).unwrap();
        let mut worst = 0.0_f64;
        for ((f, da), db) in pa.freqs.iter().zip(&pa.psd_db).zip(&pb.psd_db) {
            // In-band, away from the sweep edges.
            if *f > 1.5e9 && *f < 3.3e9 {
                worst = worst.max((da - db).abs());
            }
        }
        assert!(worst < 0.1, "worst in-band PSD deviation {worst} dB");
    }

    #[test]
    fn decimating_out_of_band_content_errors() {
        let sig = tone(3e9, 10e9, 8192);
        let err = resample(&sig, 4e9).unwrap_err();
        assert!(matches!(err, Error::AliasingRisk { .. }), "{err}");
    }

    #[test]
    fn in_band_decimation_is_clean() {
        let sig = tone(1e9, 64e9, 64000);
        let down = resample(&sig, 10e9).unwrap();
        assert_eq!(down.len(), 10000);
        // Power of a unit tone is 0.5.
        let p = interior_power(&down, 512);
        assert!((p - 0.5).abs() < 0.01, "power {p}");
    }

    #[test]
    fn resample_commutes_with_on_grid_delay() {
        // delay k at the old rate == delay k*R at the new rate, R integer.
        let sig = tone(0.9e9, 10e9, 4096);
        let a = resample(&sig.delay_integer(5).unwrap(), 20e9).unwrap();
        let b = resample(&sig, 20e9).unwrap().delay_integer(10).unwrap();
        let mut err = 0.0;
        let mut pow = 0.0;
        for i in 400..a.len() - 400 {
            let d = a.samples()[i] - b.samples()[i];
            err += d * d;
            pow += b.samples()[i] * b.samples()[i];
        }
        let rel_db = 10.0 * (err / pow).log10();
        assert!(rel_db < -50.0, "commutation residual {rel_db} dB");
    }
}
