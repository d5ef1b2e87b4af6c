//! Digital-domain pre-matching of the cancellation reference: an amplitude
//! factor from a power ratio, a coarse delay from cross-correlation at the
//! capture rate, and a fine delay found on the generation-rate grid by
//! minimizing the post-cancellation residual power.
//!
//! The fine search runs a ternary refinement over the integer window and
//! certifies the result with a +-1 local scan; a failed certificate falls
//! back to an exhaustive scan, so the returned point always equals the
//! window-wide argmin of the evaluation closure.

use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use serde::Serialize;
use std::collections::BTreeMap;

/// Result of the full pre-matching procedure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrematchSolution {
    /// Amplitude factor applied to the reference before generation.
    pub gain_factor: f64,
    /// Link delay difference in capture-rate samples (cross-correlation).
    pub coarse_delay_samples: i64,
    /// Reference delay in generation-rate points (residual-power search).
    pub fine_delay_points: i64,
    /// Post-analog-cancellation in-band power relative to no cancellation, dB.
    pub residual_power_db: f64,
}

/// Cross-correlation search settings.
#[derive(Debug, Clone, Copy)]
pub struct XcorrParams {
    pub min_lag: i64,
    pub max_lag: i64,
    /// Peak must exceed this multiple of the off-peak RMS.
    pub significance: f64,
}

impl Default for XcorrParams {
    fn default() -> Self {
        Self {
            min_lag: -64,
            max_lag: 2048,
            significance: 3.0,
        }
    }
}

/// Everything the orchestration needs beyond the captures themselves.
#[derive(Debug, Clone, Copy)]
pub struct PrematchParams {
    pub xcorr: XcorrParams,
    /// Fine-search half window in generation-rate points.
    pub half_window: i64,
    /// generation rate / capture rate (64/10 = 6.4 by default).
    pub rate_ratio: f64,
    /// Skip estimation and use this gain directly.
    pub force_gain_factor: Option<f64>,
    /// Skip both delay searches and use this fine delay directly.
    pub force_fine_delay_points: Option<i64>,
}

impl Default for PrematchParams {
    fn default() -> Self {
        Self {
            xcorr: XcorrParams::default(),
            half_window: 7,
            rate_ratio: 6.4,
            force_gain_factor: None,
            force_fine_delay_points: None,
        }
    }
}

/// The three captures the procedure consumes, all at the capture rate and
/// aligned to the same trigger.
#[derive(Debug, Clone, Copy)]
pub struct PrematchCaptures<'a> {
    /// Clean transmitted SI at the capture rate (IF-domain when mixing).
    pub tx_digital: &'a SampledSignal,
    /// System output with only the received signal driving the modulator.
    pub rx_only: &'a SampledSignal,
    /// System output with only the unadjusted reference driving it.
    pub ref_only: &'a SampledSignal,
}

/// Details of one fine search.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FineSearchOutcome {
    pub delay_points: i64,
    pub residual_power: f64,
    /// Set when the unimodality certificate failed and the window was
    /// scanned exhaustively.
    pub exhaustive_fallback: bool,
    pub evaluations: usize,
}

/// Full orchestration output, including the raw capture lags the digital
/// canceller uses for reference alignment.
#[derive(Debug, Clone, Copy)]
pub struct PrematchRun {
    pub solution: PrematchSolution,
    pub fine: FineSearchOutcome,
    /// Lag of the rx-only capture against the transmitted waveform
    /// (includes receiver group delay).
    pub rx_capture_lag: i64,
    /// Lag of the ref-only capture; shares the receiver group delay.
    pub ref_capture_lag: i64,
}

/// Amplitude factor from the power ratio of the two single-drive captures:
/// sqrt(P_rx / P_ref).
pub fn estimate_gain(rx_only: &SampledSignal, ref_only: &SampledSignal) -> Result<f64> {
    let p_ref = ref_only.power();
    if p_ref <= 0.0 {
        return Err(Error::ZeroReferencePower);
    }
    Ok((rx_only.power() / p_ref).sqrt())
}

/// Lag (in capture samples) maximizing the normalized cross-correlation
/// magnitude between the transmitted waveform and a capture. Positive lags
/// mean the capture is delayed.
///
/// The magnitude is taken against the analytic template (in-phase plus
/// quadrature correlation), so the peak follows the correlation envelope
/// and does not slip with the carrier phase of band-pass captures.
pub fn coarse_delay_xcorr(
    tx_digital: &SampledSignal,
    capture: &SampledSignal,
    params: &XcorrParams,
) -> Result<i64> {
    if tx_digital.sample_rate() != capture.sample_rate() {
        return Err(Error::RateMismatch {
            left: tx_digital.sample_rate(),
            right: capture.sample_rate(),
        });
    }
    if params.max_lag < params.min_lag {
        return Err(Error::Config(format!(
            "lag window [{}, {}] is empty",
            params.min_lag, params.max_lag
        )));
    }
    let tx = tx_digital.samples();
    let tx_q = hilbert(tx);
    let cap = capture.samples();
    let energy = (tx.iter().map(|v| v * v).sum::<f64>()
        * cap.iter().map(|v| v * v).sum::<f64>())
    .sqrt();
    if energy <= 0.0 {
        return Err(Error::NoLock {
            peak: 0.0,
            threshold: f64::INFINITY,
        });
    }

    let n = cap.len() as i64;
    let m = tx.len() as i64;
    let mut rho = Vec::with_capacity((params.max_lag - params.min_lag + 1) as usize);
    for lag in params.min_lag..=params.max_lag {
        // c(l) = sum_i cap[i] * tx[i - l], in-phase and quadrature
        let lo = lag.max(0);
        let hi = n.min(m + lag);
        let mut acc_i = 0.0;
        let mut acc_q = 0.0;
        for i in lo..hi {
            acc_i += cap[i as usize] * tx[(i - lag) as usize];
            acc_q += cap[i as usize] * tx_q[(i - lag) as usize];
        }
        rho.push((acc_i * acc_i + acc_q * acc_q).sqrt() / energy);
    }

    let (peak_idx, peak_val) = rho
        .iter()
        .enumerate()
        .map(|(i, v)| (i, *v))
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();

    // Significance: peak against the RMS of lags away from it.
    let guard = 8usize;
    let mut off_sum = 0.0;
    let mut off_count = 0usize;
    for (i, v) in rho.iter().enumerate() {
        if i.abs_diff(peak_idx) > guard {
            off_sum += v * v;
            off_count += 1;
        }
    }
    if off_count > 0 {
        let rms = (off_sum / off_count as f64).sqrt();
        let threshold = params.significance * rms;
        if peak_val < threshold {
            return Err(Error::NoLock {
                peak: peak_val,
                threshold,
            });
        }
    }
    Ok(params.min_lag + peak_idx as i64)
}

/// Quadrature (Hilbert) companion of a real sequence via the FFT.
fn hilbert(x: &[f64]) -> Vec<f64> {
    use rustfft::{num_complex::Complex, FftPlanner};
    let n = x.len();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut buf);
    // Multiply by -j sign(f): positive frequencies by -j, negative by +j.
    let half = n / 2;
    for (k, b) in buf.iter_mut().enumerate() {
        if k == 0 || (n % 2 == 0 && k == half) {
            *b = Complex::new(0.0, 0.0);
        } else if k < half || (n % 2 == 1 && k == half) {
            *b = Complex::new(b.im, -b.re);
        } else {
            *b = Complex::new(-b.im, b.re);
        }
    }
    ifft.process(&mut buf);
    buf.into_iter().map(|c| c.re / n as f64).collect()
}

/// Integer minimizer of `eval` over `[center - half_window, center + half_window]`
/// (clipped at zero): ternary refinement, a +-1 certificate, and an
/// exhaustive fallback. `eval` maps a candidate fine delay to the measured
/// residual power.
pub fn fine_delay_bisection(
    mut eval: impl FnMut(i64) -> Result<f64>,
    center: i64,
    half_window: i64,
) -> Result<FineSearchOutcome> {
    if half_window < 0 {
        return Err(Error::Config(format!(
            "half_window must be non-negative, got {half_window}"
        )));
    }
    let win_lo = (center - half_window).max(0);
    let win_hi = (center + half_window).max(win_lo);
    let mut memo: BTreeMap<i64, f64> = BTreeMap::new();
    let mut evaluations = 0usize;

    let mut value = |k: i64, memo: &mut BTreeMap<i64, f64>, evals: &mut usize| -> Result<f64> {
        if let Some(v) = memo.get(&k) {
            return Ok(*v);
        }
        let v = eval(k)?;
        memo.insert(k, v);
        *evals += 1;
        Ok(v)
    };

    let mut lo = win_lo;
    let mut hi = win_hi;
    while hi - lo > 2 {
        let m1 = lo + (hi - lo) / 3;
        let m2 = hi - (hi - lo) / 3;
        let f1 = value(m1, &mut memo, &mut evaluations)?;
        let f2 = value(m2, &mut memo, &mut evaluations)?;
        if f1 < f2 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let mut best = lo;
    let mut best_val = value(lo, &mut memo, &mut evaluations)?;
    for k in (lo + 1)..=hi {
        let v = value(k, &mut memo, &mut evaluations)?;
        if v < best_val {
            best = k;
            best_val = v;
        }
    }

    // Certificate: both in-window neighbors must not beat the candidate.
    let mut fallback = false;
    for k in [best - 1, best + 1] {
        if (win_lo..=win_hi).contains(&k) && value(k, &mut memo, &mut evaluations)? < best_val {
            fallback = true;
        }
    }
    // Memoized points must agree with unimodality too.
    if !fallback {
        for (&k, &v) in &memo {
            if (win_lo..=win_hi).contains(&k) && v < best_val {
                fallback = true;
            }
        }
    }
    if fallback {
        best = win_lo;
        best_val = value(win_lo, &mut memo, &mut evaluations)?;
        for k in win_lo..=win_hi {
            let v = value(k, &mut memo, &mut evaluations)?;
            if v < best_val {
                best = k;
                best_val = v;
            }
        }
    }
    Ok(FineSearchOutcome {
        delay_points: best,
        residual_power: best_val,
        exhaustive_fallback: fallback,
        evaluations,
    })
}

/// Run the full procedure: gain from the power ratio, coarse delay from the
/// difference of the two capture lags (the shared receiver group delay
/// cancels), fine delay from the residual-power search. `measure_band_power`
/// returns the in-band power of a capture; `eval_residual(gain, points)`
/// builds the candidate reference and returns the post-cancellation in-band
/// power.
pub fn prematch(
    captures: PrematchCaptures<'_>,
    params: &PrematchParams,
    mut measure_band_power: impl FnMut(&SampledSignal) -> Result<f64>,
    mut eval_residual: impl FnMut(f64, i64) -> Result<f64>,
) -> Result<PrematchRun> {
    let gain = match params.force_gain_factor {
        Some(g) => g,
        None => estimate_gain(captures.rx_only, captures.ref_only)
            .map_err(|e| e.in_stage("prematch/gain"))?,
    };

    let (rx_lag, ref_lag, center) = match params.force_fine_delay_points {
        Some(k) => {
            let coarse = (k as f64 / params.rate_ratio).round() as i64;
            (coarse, 0, k)
        }
        None => {
            let rx_lag = coarse_delay_xcorr(captures.tx_digital, captures.rx_only, &params.xcorr)
                .map_err(|e| e.in_stage("prematch/coarse-rx"))?;
            let ref_lag = coarse_delay_xcorr(captures.tx_digital, captures.ref_only, &params.xcorr)
                .map_err(|e| e.in_stage("prematch/coarse-ref"))?;
            let diff = rx_lag - ref_lag;
            (rx_lag, ref_lag, (diff as f64 * params.rate_ratio).round() as i64)
        }
    };

    let fine = match params.force_fine_delay_points {
        Some(k) => {
            let residual = eval_residual(gain, k).map_err(|e| e.in_stage("prematch/fine"))?;
            FineSearchOutcome {
                delay_points: k,
                residual_power: residual,
                exhaustive_fallback: false,
                evaluations: 1,
            }
        }
        None => fine_delay_bisection(
            |k| eval_residual(gain, k),
            center,
            params.half_window,
        )
        .map_err(|e| e.in_stage("prematch/fine"))?,
    };

    let before = measure_band_power(captures.rx_only)
        .map_err(|e| e.in_stage("prematch/measure"))?;
    let residual_power_db = 10.0 * (fine.residual_power.max(1e-300) / before.max(1e-300)).log10();

    let coarse_delay_samples = match params.force_fine_delay_points {
        Some(_) => rx_lag,
        None => rx_lag - ref_lag,
    };
    Ok(PrematchRun {
        solution: PrematchSolution {
            gain_factor: gain,
            coarse_delay_samples,
            fine_delay_points: fine.delay_points,
            residual_power_db,
        },
        fine,
        rx_capture_lag: rx_lag,
        ref_capture_lag: ref_lag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{generate_lfm, WaveformKind, WaveformSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn chirp(n_samples: usize, rate: f64) -> SampledSignal {
        generate_lfm(
            &WaveformSpec {
                kind: WaveformKind::Lfm { bandwidth_hz: 2e9 },
                center_freq_hz: 2.4e9,
                duration_s: n_samples as f64 / rate,
            },
            rate,
        )
        .unwrap()
    }

    #[test]
    fn gain_is_sqrt_of_power_ratio() {
        let base = chirp(20_000, 10e9);
        // Reference capture with 4x the received power -> factor 0.5.
        let rx = base.scale(0.5).unwrap();
        let g = estimate_gain(&rx, &base).unwrap();
        assert!((g - 0.5).abs() < 1e-12);
        assert!((estimate_gain(&base, &base).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gain_estimate_scales_with_capture_amplitude() {
        let base = chirp(20_000, 10e9);
        let rx = base.scale(0.42).unwrap();
        let g1 = estimate_gain(&rx, &base).unwrap();
        let g2 = estimate_gain(&rx.scale(3.0).unwrap(), &base).unwrap();
        assert!((g2 - 3.0 * g1).abs() < 1e-12);
    }

    #[test]
    fn zero_reference_power_errors() {
        let base = chirp(1_000, 10e9);
        let silent = SampledSignal::zeros(1_000, 10e9).unwrap();
        assert!(matches!(
            estimate_gain(&base, &silent),
            Err(Error::ZeroReferencePower)
        ));
    }

    #[test]
    fn coarse_xcorr_recovers_on_grid_delay_exactly() {
        // 5 ns at 10 GSa/s is 50 capture samples.
        let tx = chirp(20_000, 10e9);
        let cap = tx.delay_integer(50).unwrap();
        let lag = coarse_delay_xcorr(&tx, &cap, &XcorrParams::default()).unwrap();
        assert_eq!(lag, 50);
    }

    #[test]
    fn coarse_xcorr_rounds_7p531_ns_to_75_samples() {
        let tx = chirp(20_000, 10e9);
        let cap = tx.delay_fractional(7.531e-9).unwrap();
        let lag = coarse_delay_xcorr(&tx, &cap, &XcorrParams::default()).unwrap();
        assert!((lag - 75).abs() <= 1, "lag {lag}");
    }

    #[test]
    fn coarse_xcorr_is_shift_equivariant() {
        let tx = chirp(20_000, 10e9);
        let cap = tx.delay_integer(40).unwrap();
        let base = coarse_delay_xcorr(&tx, &cap, &XcorrParams::default()).unwrap();
        let shifted = cap.delay_integer(17).unwrap();
        let lag = coarse_delay_xcorr(&tx, &shifted, &XcorrParams::default()).unwrap();
        assert_eq!(lag, base + 17);
    }

    #[test]
    fn uncorrelated_capture_reports_no_lock() {
        // Two disjoint tones are orthogonal; no correlation peak exists.
        let n = 8192;
        let rate = 10e9;
        let tx = SampledSignal::new(
            (0..n).map(|i| (2.0 * PI * 1e9 * i as f64 / rate).sin()).collect(),
            rate,
        )
        .unwrap();
        let cap = SampledSignal::new(
            (0..n).map(|i| (2.0 * PI * 1.5e9 * i as f64 / rate).sin()).collect(),
            rate,
        )
        .unwrap();
        let params = XcorrParams {
            min_lag: 0,
            max_lag: 256,
            significance: 3.0,
        };
        assert!(matches!(
            coarse_delay_xcorr(&tx, &cap, &params),
            Err(Error::NoLock { .. })
        ));
    }

    #[test]
    fn fine_search_equals_exhaustive_on_seeded_objectives() {
        // 100 random unimodal-ish objectives; result must match brute force.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for trial in 0..100 {
            let truth: i64 = rng.random_range(470..495);
            let noise: Vec<f64> = (0..64).map(|_| rng.random_range(0.0..1e-4)).collect();
            let eval = |k: i64| -> Result<f64> {
                let d = (k - truth) as f64;
                Ok(d * d + noise[(k.rem_euclid(64)) as usize])
            };
            let center = truth + rng.random_range(-5..=5);
            let out = fine_delay_bisection(eval, center, 7).unwrap();

            let lo = (center - 7).max(0);
            let hi = center + 7;
            let mut best = lo;
            let mut best_val = f64::INFINITY;
            for k in lo..=hi {
                let v = eval(k).unwrap();
                if v < best_val {
                    best = k;
                    best_val = v;
                }
            }
            assert_eq!(out.delay_points, best, "trial {trial}");
            assert!((out.residual_power - best_val).abs() < 1e-15);
        }
    }

    #[test]
    fn non_unimodal_objective_falls_back_to_exhaustive() {
        // Two separated dips; the certificate must catch the miss.
        let eval = |k: i64| -> Result<f64> {
            Ok(match k {
                480 => 0.5,
                486 => 0.1,
                _ => 1.0 + (k as f64 - 483.0).abs() * 0.01,
            })
        };
        let out = fine_delay_bisection(eval, 483, 7).unwrap();
        assert_eq!(out.delay_points, 486);
    }

    #[test]
    fn window_is_clipped_at_zero() {
        let out = fine_delay_bisection(|k| Ok((k - 2) as f64 * (k - 2) as f64), 1, 7).unwrap();
        assert_eq!(out.delay_points, 2);
    }
}
