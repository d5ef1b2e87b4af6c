//! Scenario execution: assemble the signal chain from a config, run
//! pre-matching, the analog cancellation captures, and the adaptive stage,
//! then measure and write the report and plot artifacts.
//!
//! Signal chain, mirroring the modeled testbed:
//!
//! ```text
//! synth SI/SOI -> channel (direct + multipath + SOI [+ noise])
//!   -> resample to generation rate -> link mismatch (delay, gain)  = v1
//! synth reference (gain, fine delay applied digitally)             = v2
//! DDMZM(v1, v2) -> [mixer] -> PD/OSC filters -> 10 GSa/s capture
//!   -> adaptive canceller (reference: clean transmitted waveform)
//! ```
//!
//! The emulated channel runs at the capture rate (that is where the received
//! waveform is synthesized); the link mismatch the pre-matcher must find is
//! applied on the generation grid. High-band scenarios synthesize directly
//! at the generation rate and capture through the mixer.

use crate::config::{ScenarioConfig, Seeds};
use anyhow::{bail, Context};
use serde::Serialize;
use sicsim_core::canceller::{cancel, AdaptiveConfig, Algorithm, CancellerResult};
use sicsim_core::channel::{render_components, ChannelSpec};
use sicsim_core::frontend::{capture, ddmzm_pd, mixer_downconvert, FrontEndParams};
use sicsim_core::metrics::{
    band_power_db_notched, spectrogram, welch_psd, Band, CancellationReport, PsdEstimate,
    Spectrogram, WelchParams,
};
use sicsim_core::prematch::{
    prematch, FineSearchOutcome, PrematchCaptures, PrematchParams, PrematchRun, PrematchSolution,
    XcorrParams,
};
use sicsim_core::resample::resample;
use sicsim_core::waveform::{generate, WaveformSpec};
use sicsim_core::SampledSignal;
use std::io::Write;
use std::path::Path;

/// Fixed artifact names inside a run directory.
pub const REPORT_FILE: &str = "report.json";
pub const PSD_FILES: [&str; 3] = ["psd_before.csv", "psd_analog.csv", "psd_total.csv"];
pub const SPECTROGRAM_FILES: [&str; 3] = [
    "spectrogram_before.csv",
    "spectrogram_analog.csv",
    "spectrogram_total.csv",
];
pub const LEARNING_CURVE_FILE: &str = "learning_curve.csv";

/// Scalar results of one scenario run, serialized as `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: String,
    pub seeds: Seeds,
    pub algorithm: Algorithm,
    pub prematch: PrematchSolution,
    pub fine_search: FineSearchOutcome,
    /// Raw lag of the rx-only capture against the transmitted waveform,
    /// including receiver group delay; the digital stage aligns with it.
    pub rx_capture_lag: i64,
    pub analog_depth_db: f64,
    pub digital_depth_db: f64,
    pub total_depth_db: f64,
    pub soi_delta_analog_db: Option<f64>,
    pub soi_delta_digital_db: Option<f64>,
    pub soi_delta_total_db: Option<f64>,
    /// Measurement band (IF domain when mixing) and the SOI notch.
    pub band: Band,
    pub notch: Option<Band>,
    pub artifacts: Vec<String>,
    pub warnings: Vec<String>,
    /// The parsed configuration, re-serialized; parses back to the same
    /// scenario.
    pub config_echo: String,
}

/// In-memory outcome of a run, for tests and the report writer.
pub struct ScenarioOutcome {
    pub report: RunReport,
    pub cap_before: SampledSignal,
    pub cap_analog: SampledSignal,
    pub digital_output: SampledSignal,
    pub learning_curve: Vec<f64>,
    pub psd_before: PsdEstimate,
    pub psd_analog: PsdEstimate,
    pub psd_total: PsdEstimate,
}

/// The assembled signal chain for one scenario.
pub struct Pipeline {
    cfg: ScenarioConfig,
    fe: FrontEndParams,
    adaptive: AdaptiveConfig,
    gen_rate: f64,
    cap_rate: f64,
    guard: usize,
    /// Received drive at the generation rate, after the link mismatch.
    v1: SampledSignal,
    /// Same drive with the SOI component removed (ground truth).
    v1_nosoi: Option<SampledSignal>,
    /// Unadjusted reference drive (gain 1, no delay).
    ref_gen_raw: SampledSignal,
    /// Clean transmitted SI at the capture rate (IF domain when mixing),
    /// trimmed like every capture.
    tx_digital: SampledSignal,
    band: Band,
    notch: Option<Band>,
    welch: WelchParams,
    warnings: Vec<String>,
}

impl Pipeline {
    pub fn from_config(cfg: &ScenarioConfig) -> anyhow::Result<Self> {
        cfg.validate()?;
        let fe = cfg.frontend.to_params();
        let adaptive = cfg.adaptive.to_config(cfg.si_waveform.kind);
        let gen_rate = cfg.generation_rate_hz;
        let cap_rate = cfg.capture_rate_hz();
        let si_spec = cfg.si_spec();
        let soi_spec = cfg.soi_spec();
        let chan: ChannelSpec = cfg.channel.to_spec(soi_spec.is_some());
        let warnings = chan.warnings();

        // Synthesize and run the emulated channel. Low-band scenarios build
        // everything at the capture rate and upconvert the composite; mixer
        // scenarios synthesize on the generation grid directly.
        let (rx_gen, rx_nosoi_gen, ref_gen_raw, tx_digital) = if cfg.uses_mixer() {
            let si_gen = generate(&si_spec, gen_rate).context("stage synth: SI")?;
            let soi_gen = match &soi_spec {
                Some(spec) => Some(generate(spec, gen_rate).context("stage synth: SOI")?),
                None => None,
            };
            let parts = render_components(&si_gen, soi_gen.as_ref(), &chan, cfg.seeds.noise)
                .context("stage channel")?;
            let rx = parts.sum().context("stage channel")?;
            let rx_nosoi = soi_spec
                .as_ref()
                .map(|_| rx.sub(&parts.soi_scaled))
                .transpose()
                .context("stage channel")?;
            let lo = cfg.mixer.lo_freq_hz.unwrap();
            let tx_if = mixer_downconvert(&si_gen, lo, cfg.mixer.lo_phase_rad)
                .context("stage reference downconversion")?;
            let tx_cap = resample(&tx_if, cap_rate).context("stage reference downconversion")?;
            (rx, rx_nosoi, si_gen, tx_cap)
        } else {
            let si_cap = generate(&si_spec, cap_rate).context("stage synth: SI")?;
            let soi_cap = match &soi_spec {
                Some(spec) => Some(generate(spec, cap_rate).context("stage synth: SOI")?),
                None => None,
            };
            let parts = render_components(&si_cap, soi_cap.as_ref(), &chan, cfg.seeds.noise)
                .context("stage channel")?;
            let rx_cap = parts.sum().context("stage channel")?;
            let rx_nosoi_cap = soi_spec
                .as_ref()
                .map(|_| rx_cap.sub(&parts.soi_scaled))
                .transpose()
                .context("stage channel")?;
            let rx_gen = resample(&rx_cap, gen_rate).context("stage upconversion")?;
            let rx_nosoi_gen = rx_nosoi_cap
                .as_ref()
                .map(|s| resample(s, gen_rate))
                .transpose()
                .context("stage upconversion")?;
            let ref_gen = resample(&si_cap, gen_rate).context("stage upconversion")?;
            (rx_gen, rx_nosoi_gen, ref_gen, si_cap)
        };

        // Link mismatch on the received path: gain, integer-point delay,
        // and the sub-sample share.
        let apply_link = |sig: &SampledSignal| -> anyhow::Result<SampledSignal> {
            let mut out = sig
                .scale(cfg.link.gain)
                .and_then(|s| s.delay_integer(cfg.link.delay_points as usize))
                .context("stage link")?;
            if cfg.impairments.extra_delay_s > 0.0 {
                out = out
                    .delay_fractional(cfg.impairments.extra_delay_s)
                    .context("stage link")?;
            }
            Ok(out)
        };
        let v1 = apply_link(&rx_gen)?;
        let v1_nosoi = rx_nosoi_gen.as_ref().map(&apply_link).transpose()?;

        // Measurement bands in the capture (IF) domain.
        let band = if_band(&si_spec, cfg, cap_rate);
        let notch = soi_spec.as_ref().map(|s| if_band(s, cfg, cap_rate));

        let guard = (cfg.analysis_guard_s * cap_rate).round() as usize;
        let welch = WelchParams {
            segment_len: cfg.metrics.welch_segment,
            overlap: cfg.metrics.welch_overlap,
        };
        let tx_digital = tx_digital
            .slice(guard, tx_digital.len() - 2 * guard)
            .context("stage trim")?;
        Ok(Self {
            cfg: cfg.clone(),
            fe,
            adaptive,
            gen_rate,
            cap_rate,
            guard,
            v1,
            v1_nosoi,
            ref_gen_raw,
            tx_digital,
            band,
            notch,
            welch,
            warnings,
        })
    }

    fn zeros_gen(&self) -> SampledSignal {
        SampledSignal::zeros(self.v1.len(), self.gen_rate).expect("non-empty zero drive")
    }

    /// One capture through the front end: DDMZM, optional mixer, receiver
    /// filters, decimation, trim.
    fn capture_pair(
        &self,
        v1: &SampledSignal,
        v2: &SampledSignal,
    ) -> anyhow::Result<SampledSignal> {
        let pd = ddmzm_pd(v1, v2, &self.fe).context("stage front end")?;
        let pre_osc = match self.cfg.mixer.lo_freq_hz {
            Some(lo) => {
                mixer_downconvert(&pd, lo, self.cfg.mixer.lo_phase_rad).context("stage mixer")?
            }
            None => pd,
        };
        let cap = capture(&pre_osc, &self.fe).context("stage capture")?;
        cap.slice(self.guard, cap.len() - 2 * self.guard)
            .context("stage trim")
    }

    /// Build the pre-matched reference drive for a candidate gain and fine
    /// delay. The gain multiplies the waveform before the generation-rate
    /// resampling; fine tuning compensates the sub-sample link delay.
    fn build_reference(&self, gain: f64, points: i64) -> anyhow::Result<SampledSignal> {
        if points < 0 {
            bail!("stage reference: negative fine delay {points}");
        }
        let mut v2 = if self.cfg.uses_mixer() {
            // Synthesized natively on the generation grid.
            self.ref_gen_raw
                .scale(gain)
                .and_then(|s| s.delay_integer(points as usize))
                .context("stage reference")?
        } else {
            let si_cap = generate(&self.cfg.si_spec(), self.cap_rate)
                .context("stage reference")?;
            let scaled = si_cap.scale(gain).context("stage reference")?;
            resample(&scaled, self.gen_rate)
                .and_then(|s| s.delay_integer(points as usize))
                .context("stage reference")?
        };
        if self.cfg.impairments.fine_tune_enabled && self.cfg.impairments.extra_delay_s > 0.0 {
            v2 = v2
                .delay_fractional(self.cfg.impairments.extra_delay_s)
                .context("stage reference")?;
        }
        Ok(v2)
    }

    /// Gain the system actually applies: the estimate perturbed by the
    /// configured calibration error.
    fn applied_gain(&self, estimated: f64) -> f64 {
        estimated * 10f64.powf(self.cfg.impairments.gain_error_db / 20.0)
    }

    fn band_power_linear(&self, cap: &SampledSignal) -> anyhow::Result<f64> {
        let psd = welch_psd(cap, &self.welch).context("stage measure")?;
        let db = band_power_db_notched(&psd, self.band, self.notch).context("stage measure")?;
        Ok(10f64.powf(db / 10.0))
    }

    /// Run the calibration captures and the two-step delay search.
    pub fn run_prematch(&self) -> anyhow::Result<PrematchRun> {
        let zeros = self.zeros_gen();
        let cap_rx = self.capture_pair(&self.v1, &zeros)?;
        let cap_ref = self.capture_pair(&zeros, &self.ref_gen_raw)?;
        let params = PrematchParams {
            xcorr: XcorrParams {
                min_lag: self.cfg.prematch.min_lag_samples,
                max_lag: self.cfg.prematch.max_lag_samples,
                significance: self.cfg.prematch.significance,
            },
            half_window: self.cfg.prematch.half_window_points,
            rate_ratio: self.gen_rate / self.cap_rate,
            force_gain_factor: self.cfg.prematch.force_gain_factor,
            force_fine_delay_points: self.cfg.prematch.force_fine_delay_points,
        };
        let run = prematch(
            PrematchCaptures {
                tx_digital: &self.tx_digital,
                rx_only: &cap_rx,
                ref_only: &cap_ref,
            },
            &params,
            |cap| {
                self.band_power_linear(cap)
                    .map_err(|e| sicsim_core::Error::Config(format!("{e:#}")))
            },
            |gain, k| {
                let v2 = self
                    .build_reference(self.applied_gain(gain), k)
                    .map_err(|e| sicsim_core::Error::Config(format!("{e:#}")))?;
                let cap = self
                    .capture_pair(&self.v1, &v2)
                    .map_err(|e| sicsim_core::Error::Config(format!("{e:#}")))?;
                self.band_power_linear(&cap)
                    .map_err(|e| sicsim_core::Error::Config(format!("{e:#}")))
            },
        )
        .context("stage prematch")?;
        Ok(run)
    }

    /// Full scenario: prematch, analog cancellation, digital cancellation,
    /// metrics.
    pub fn execute(&self) -> anyhow::Result<ScenarioOutcome> {
        let mut warnings = self.warnings.clone();
        let zeros = self.zeros_gen();
        let pm = self.run_prematch()?;
        if pm.fine.exhaustive_fallback {
            warnings.push(
                "fine delay search: residual was not unimodal; fell back to exhaustive scan"
                    .into(),
            );
        }

        // Captures: no cancellation, then analog cancellation.
        let cap_before = self.capture_pair(&self.v1, &zeros)?;
        let v2 = self.build_reference(self.applied_gain(pm.solution.gain_factor),
            pm.solution.fine_delay_points)?;
        let cap_analog = self.capture_pair(&self.v1, &v2)?;

        // Digital stage: reference is the clean transmitted waveform,
        // coarse-aligned to the capture.
        let align = pm.rx_capture_lag;
        if align < 0 {
            bail!("stage digital: capture leads the reference by {align} samples");
        }
        let reference = self
            .tx_digital
            .delay_integer(align as usize)
            .context("stage digital")?;
        let digital = cancel(&cap_analog, &reference, &self.adaptive).context("stage digital")?;

        // SOI power deltas from the ground-truth marginal contribution.
        let (soi_before, soi_analog, soi_digital) = match &self.v1_nosoi {
            Some(v1_nosoi) => {
                let before_nosoi = self.capture_pair(v1_nosoi, &zeros)?;
                let analog_nosoi = self.capture_pair(v1_nosoi, &v2)?;
                let digital_nosoi =
                    cancel(&analog_nosoi, &reference, &self.adaptive).context("stage digital")?;
                let m_before = cap_before.sub(&before_nosoi).context("stage soi delta")?;
                let m_analog = cap_analog.sub(&analog_nosoi).context("stage soi delta")?;
                let m_digital = digital
                    .output
                    .sub(&digital_nosoi.output)
                    .context("stage soi delta")?;
                (Some(m_before), Some(m_analog), Some(m_digital))
            }
            None => (None, None, None),
        };
        let soi_band = self.notch;
        let soi_power = |sig: &Option<SampledSignal>| -> anyhow::Result<Option<f64>> {
            match (sig, soi_band) {
                (Some(s), Some(b)) => {
                    let psd = welch_psd(s, &self.welch).context("stage soi delta")?;
                    Ok(Some(
                        band_power_db_notched(&psd, b, None).context("stage soi delta")?,
                    ))
                }
                _ => Ok(None),
            }
        };
        let p_soi_before = soi_power(&soi_before)?;
        let p_soi_analog = soi_power(&soi_analog)?;
        let p_soi_digital = soi_power(&soi_digital)?;
        let soi_delta_analog_db = match (p_soi_before, p_soi_analog) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        };
        let soi_delta_digital_db = match (p_soi_analog, p_soi_digital) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        };
        let soi_delta_total_db = match (p_soi_before, p_soi_digital) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        };

        let report_metrics = CancellationReport::compute(
            &cap_before,
            &cap_analog,
            &digital.output,
            self.band,
            self.notch,
            soi_delta_total_db,
            &self.welch,
        )
        .context("stage metrics")?;

        let report = RunReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seeds: self.cfg.seeds,
            algorithm: self.adaptive.algorithm,
            prematch: pm.solution,
            fine_search: pm.fine,
            rx_capture_lag: pm.rx_capture_lag,
            analog_depth_db: report_metrics.analog_depth_db,
            digital_depth_db: report_metrics.digital_depth_db,
            total_depth_db: report_metrics.total_depth_db,
            soi_delta_analog_db,
            soi_delta_digital_db,
            soi_delta_total_db,
            band: self.band,
            notch: self.notch,
            artifacts: Vec::new(),
            warnings,
            config_echo: self.cfg.to_toml()?,
        };
        Ok(ScenarioOutcome {
            report,
            cap_before,
            cap_analog,
            digital_output: digital.output.clone(),
            learning_curve: digital.learning_curve,
            psd_before: report_metrics.psd_before,
            psd_analog: report_metrics.psd_analog,
            psd_total: report_metrics.psd_total,
        })
    }

    pub fn adaptive_config(&self) -> AdaptiveConfig {
        self.adaptive
    }

    /// Paired digital runs on the same captures, for algorithm comparisons.
    pub fn digital_with(
        &self,
        outcome: &ScenarioOutcome,
        adaptive: &AdaptiveConfig,
        align: i64,
    ) -> anyhow::Result<CancellerResult> {
        let reference = self
            .tx_digital
            .delay_integer(align.max(0) as usize)
            .context("stage digital")?;
        cancel(&outcome.cap_analog, &reference, adaptive).context("stage digital")
    }
}

/// Occupied band mapped into the capture (IF) domain, with the configured
/// minimum half-width and clipped to the representable range.
fn if_band(spec: &WaveformSpec, cfg: &ScenarioConfig, cap_rate: f64) -> Band {
    let (f_lo, f_hi) = spec.occupied_band();
    let half = ((f_hi - f_lo) / 2.0).max(cfg.metrics.min_band_halfwidth_hz);
    let center = match cfg.mixer.lo_freq_hz {
        Some(lo) => (spec.center_freq_hz - lo).abs(),
        None => spec.center_freq_hz,
    };
    Band::new((center - half).max(0.0), (center + half).min(0.499 * cap_rate))
}

/// Execute a scenario and write `report.json` plus all CSV artifacts.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> anyhow::Result<RunReport> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let pipeline = Pipeline::from_config(cfg)?;
    let outcome = pipeline.execute()?;
    let mut report = outcome.report.clone();

    let sg_window = cfg.metrics.spectrogram_window;
    let sg_hop = ((sg_window as f64) * (1.0 - cfg.metrics.spectrogram_overlap))
        .round()
        .max(1.0) as usize;

    write_psd_csv(&out_dir.join(PSD_FILES[0]), &outcome.psd_before)?;
    write_psd_csv(&out_dir.join(PSD_FILES[1]), &outcome.psd_analog)?;
    write_psd_csv(&out_dir.join(PSD_FILES[2]), &outcome.psd_total)?;
    for (name, sig) in SPECTROGRAM_FILES.iter().zip([
        &outcome.cap_before,
        &outcome.cap_analog,
        &outcome.digital_output,
    ]) {
        let sg = spectrogram(sig, sg_window, sg_hop).context("stage artifacts")?;
        write_spectrogram_csv(&out_dir.join(name), &sg)?;
    }
    write_learning_curve_csv(&out_dir.join(LEARNING_CURVE_FILE), &outcome.learning_curve)?;

    report.artifacts = PSD_FILES
        .iter()
        .chain(SPECTROGRAM_FILES.iter())
        .chain([LEARNING_CURVE_FILE].iter())
        .map(|s| s.to_string())
        .collect();
    let json = serde_json::to_string_pretty(&report)?;
    std::fs::write(out_dir.join(REPORT_FILE), json)
        .with_context(|| format!("writing {}", out_dir.join(REPORT_FILE).display()))?;
    Ok(report)
}

fn write_psd_csv(path: &Path, psd: &PsdEstimate) -> anyhow::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "freq_hz,psd_db")?;
    for (freq, db) in psd.freqs.iter().zip(&psd.psd_db) {
        writeln!(f, "{freq:.1},{db:.4}")?;
    }
    Ok(())
}

fn write_spectrogram_csv(path: &Path, sg: &Spectrogram) -> anyhow::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "time_s,freq_hz,mag_db")?;
    for (t, col) in sg.times_s.iter().zip(&sg.mag_db) {
        for (freq, db) in sg.freqs_hz.iter().zip(col) {
            writeln!(f, "{t:.4e},{freq:.1},{db:.2}")?;
        }
    }
    Ok(())
}

fn write_learning_curve_csv(path: &Path, curve: &[f64]) -> anyhow::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "sample_index,squared_error")?;
    for (i, e) in curve.iter().enumerate() {
        writeln!(f, "{i},{e:.6e}")?;
    }
    Ok(())
}

/// Pretty-print a written report.
pub fn format_report(dir: &Path) -> anyhow::Result<String> {
    let path = dir.join(REPORT_FILE);
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    let mut out = String::new();
    let g = |k: &str| -> String {
        v.get(k)
            .map(|x| match x {
                serde_json::Value::Number(n) => format!("{:.2}", n.as_f64().unwrap_or(f64::NAN)),
                other => other.to_string(),
            })
            .unwrap_or_else(|| "-".into())
    };
    out.push_str(&format!("run report ({})\n", path.display()));
    out.push_str(&format!("  algorithm          {}\n", g("algorithm")));
    if let Some(p) = v.get("prematch") {
        out.push_str(&format!(
            "  gain_factor        {:.4}\n",
            p.get("gain_factor").and_then(|x| x.as_f64()).unwrap_or(f64::NAN)
        ));
        out.push_str(&format!(
            "  coarse_delay       {} samples\n",
            p.get("coarse_delay_samples").and_then(|x| x.as_i64()).unwrap_or(0)
        ));
        out.push_str(&format!(
            "  fine_delay         {} points\n",
            p.get("fine_delay_points").and_then(|x| x.as_i64()).unwrap_or(0)
        ));
    }
    out.push_str(&format!("  analog_depth_db    {}\n", g("analog_depth_db")));
    out.push_str(&format!("  digital_depth_db   {}\n", g("digital_depth_db")));
    out.push_str(&format!("  total_depth_db     {}\n", g("total_depth_db")));
    out.push_str(&format!(
        "  soi_delta_total_db {}\n",
        g("soi_delta_total_db")
    ));
    if let Some(arts) = v.get("artifacts").and_then(|a| a.as_array()) {
        out.push_str(&format!("  artifacts          {}\n", arts.len()));
    }
    Ok(out)
}
