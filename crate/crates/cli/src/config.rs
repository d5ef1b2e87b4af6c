//! Scenario configuration: a strict TOML schema with documented defaults.
//!
//! Unknown keys are rejected everywhere so a typo in a sweep axis can never
//! silently fall back to a default. An empty file parses to the canonical
//! wideband-LFM scenario: 2.4 GHz / 2 GHz SI, a derived SOI at the same
//! center with a quarter of the bandwidth at -26 dB, one {5 ns, 26 dB}
//! multipath echo, and a 482-point / 0.7868 link mismatch.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sicsim_core::canceller::{AdaptiveConfig, Algorithm};
use sicsim_core::channel::{ChannelSpec, PathTap};
use sicsim_core::frontend::{FrontEndParams, TransferMode};
use sicsim_core::waveform::{WaveformKind, WaveformSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Waveform duration in seconds; must yield at least 1e5 capture samples.
    pub duration_s: f64,
    /// AWG-side waveform rate.
    pub generation_rate_hz: f64,
    /// Interval dropped from each end of every capture before measurement,
    /// absorbing filter transients and bulk path delay.
    pub analysis_guard_s: f64,
    pub seeds: Seeds,
    pub si_waveform: WaveformConfig,
    /// Defaults to the SI family at the same center with 1/4 the
    /// bandwidth-or-baud when omitted.
    pub soi_waveform: Option<WaveformConfig>,
    pub channel: ChannelConfig,
    pub link: LinkConfig,
    pub impairments: Impairments,
    pub frontend: FrontendConfig,
    pub adaptive: AdaptiveSection,
    pub mixer: MixerConfig,
    pub prematch: PrematchSection,
    pub metrics: MetricsSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            duration_s: 10e-6,
            generation_rate_hz: 64e9,
            analysis_guard_s: 0.25e-6,
            seeds: Seeds::default(),
            si_waveform: WaveformConfig::default(),
            soi_waveform: None,
            channel: ChannelConfig::default(),
            link: LinkConfig::default(),
            impairments: Impairments::default(),
            frontend: FrontendConfig::default(),
            adaptive: AdaptiveSection::default(),
            mixer: MixerConfig::default(),
            prematch: PrematchSection::default(),
            metrics: MetricsSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Seeds {
    pub noise: u64,
    pub symbols: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self { noise: 1, symbols: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveformKindConfig {
    Lfm,
    Qpsk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveformConfig {
    pub kind: WaveformKindConfig,
    pub center_freq_hz: f64,
    /// LFM sweep width; ignored for QPSK.
    pub bandwidth_hz: f64,
    /// QPSK symbol rate; ignored for LFM.
    pub baud_hz: f64,
    pub rolloff: f64,
    /// Defaults to the scenario symbol seed (SI) or seed + 1 (SOI).
    pub symbol_seed: Option<u64>,
}

impl Default for WaveformConfig {
    fn default() -> Self {
        Self {
            kind: WaveformKindConfig::Lfm,
            center_freq_hz: 2.4e9,
            bandwidth_hz: 2e9,
            baud_hz: 2e9,
            rolloff: 0.35,
            symbol_seed: None,
        }
    }
}

impl WaveformConfig {
    pub fn to_spec(&self, duration_s: f64, default_seed: u64) -> WaveformSpec {
        let kind = match self.kind {
            WaveformKindConfig::Lfm => WaveformKind::Lfm {
                bandwidth_hz: self.bandwidth_hz,
            },
            WaveformKindConfig::Qpsk => WaveformKind::Qpsk {
                baud_hz: self.baud_hz,
                rolloff: self.rolloff,
                symbol_seed: self.symbol_seed.unwrap_or(default_seed),
            },
        };
        WaveformSpec {
            kind,
            center_freq_hz: self.center_freq_hz,
            duration_s,
        }
    }

    /// SOI default: same family and center, a quarter of the width.
    fn derived_soi(&self) -> Self {
        Self {
            bandwidth_hz: self.bandwidth_hz / 4.0,
            baud_hz: self.baud_hz / 4.0,
            symbol_seed: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MultipathTapConfig {
    /// Delay relative to the direct path.
    pub delay_rel_s: f64,
    /// Power attenuation relative to the direct path.
    pub attenuation_rel_db: f64,
}

impl Default for MultipathTapConfig {
    fn default() -> Self {
        Self {
            delay_rel_s: 5e-9,
            attenuation_rel_db: 26.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    pub direct_delay_s: f64,
    pub direct_attenuation_db: f64,
    pub multipath: Vec<MultipathTapConfig>,
    pub soi_enabled: bool,
    /// SOI power relative to the measured direct-path SI power.
    pub soi_rel_power_db: f64,
    /// White-noise floor in dBm/Hz into 50 ohms; omitted means noise-free.
    pub noise_floor_dbm_hz: Option<f64>,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            direct_delay_s: 0.0,
            direct_attenuation_db: 0.0,
            multipath: vec![MultipathTapConfig::default()],
            soi_enabled: true,
            soi_rel_power_db: -26.0,
            noise_floor_dbm_hz: None,
        }
    }
}

impl ChannelConfig {
    /// Convert to the core spec: multipath taps become absolute
    /// (relative-to-transmitted) delays and attenuations.
    pub fn to_spec(&self, soi_enabled: bool) -> ChannelSpec {
        ChannelSpec {
            direct_path: PathTap {
                delay_s: self.direct_delay_s,
                attenuation_db: self.direct_attenuation_db,
            },
            multipaths: self
                .multipath
                .iter()
                .map(|t| PathTap {
                    delay_s: self.direct_delay_s + t.delay_rel_s,
                    attenuation_db: self.direct_attenuation_db + t.attenuation_rel_db,
                })
                .collect(),
            soi_rel_power_db: if soi_enabled {
                Some(self.soi_rel_power_db)
            } else {
                None
            },
            noise_floor_dbm_hz: self.noise_floor_dbm_hz,
        }
    }
}

/// Ground-truth mismatch between the received-signal link and the reference
/// link: what pre-matching has to find.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkConfig {
    /// Extra delay of the received path, in generation-rate points.
    pub delay_points: u64,
    /// Amplitude of the received path relative to the reference path.
    pub gain: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            delay_points: 482,
            gain: 0.7868,
        }
    }
}

/// Deviations from perfect matching that remain after calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Impairments {
    /// Error applied to the estimated gain factor, dB.
    pub gain_error_db: f64,
    /// Sub-sample share of the link delay, not representable on the
    /// generation grid (default: half a 64 GSa/s point).
    pub extra_delay_s: f64,
    /// Compensate `extra_delay_s` on the reference, emulating an analog
    /// delay line tuned to the optimum.
    pub fine_tune_enabled: bool,
}

impl Default for Impairments {
    fn default() -> Self {
        Self {
            gain_error_db: 0.2,
            extra_delay_s: 7.8125e-12,
            fine_tune_enabled: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrontendConfig {
    pub v_pi_volts: f64,
    pub bias_phase_rad: f64,
    pub pd_responsivity_a_per_w: f64,
    pub pd_bandwidth_hz: f64,
    pub osc_bandwidth_hz: f64,
    pub osc_sample_rate_hz: f64,
    pub transfer_mode: TransferMode,
    /// Omit for an ideal (unquantized) capture.
    pub adc_bits: Option<u32>,
    pub filter_order: usize,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        let p = FrontEndParams::default();
        Self {
            v_pi_volts: p.v_pi,
            bias_phase_rad: p.bias_phase,
            pd_responsivity_a_per_w: p.pd_responsivity,
            pd_bandwidth_hz: p.pd_bandwidth_hz,
            osc_bandwidth_hz: p.osc_bandwidth_hz,
            osc_sample_rate_hz: p.osc_sample_rate_hz,
            transfer_mode: p.transfer_mode,
            adc_bits: p.adc_bits,
            filter_order: p.filter_order,
        }
    }
}

impl FrontendConfig {
    pub fn to_params(&self) -> FrontEndParams {
        FrontEndParams {
            v_pi: self.v_pi_volts,
            bias_phase: self.bias_phase_rad,
            pd_responsivity: self.pd_responsivity_a_per_w,
            pd_bandwidth_hz: self.pd_bandwidth_hz,
            osc_bandwidth_hz: self.osc_bandwidth_hz,
            osc_sample_rate_hz: self.osc_sample_rate_hz,
            transfer_mode: self.transfer_mode,
            adc_bits: self.adc_bits,
            filter_order: self.filter_order,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdaptiveSection {
    /// Omitted: NLMS for LFM scenarios, RLS for QPSK scenarios.
    pub algorithm: Option<Algorithm>,
    pub filter_length: usize,
    pub mu: f64,
    pub eps: f64,
    pub lambda: f64,
    pub delta: f64,
}

impl Default for AdaptiveSection {
    fn default() -> Self {
        let c = AdaptiveConfig::default();
        Self {
            algorithm: None,
            filter_length: c.filter_length,
            mu: c.mu,
            eps: c.eps,
            lambda: c.lambda,
            delta: c.delta,
        }
    }
}

impl AdaptiveSection {
    pub fn to_config(&self, si_kind: WaveformKindConfig) -> AdaptiveConfig {
        let algorithm = self.algorithm.unwrap_or(match si_kind {
            WaveformKindConfig::Lfm => Algorithm::Nlms,
            WaveformKindConfig::Qpsk => Algorithm::Rls,
        });
        AdaptiveConfig {
            algorithm,
            filter_length: self.filter_length,
            mu: self.mu,
            eps: self.eps,
            lambda: self.lambda,
            delta: self.delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixerConfig {
    /// Local oscillator frequency; omitted disables downconversion.
    pub lo_freq_hz: Option<f64>,
    pub lo_phase_rad: f64,
}

impl Default for MixerConfig {
    fn default() -> Self {
        Self {
            lo_freq_hz: None,
            lo_phase_rad: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrematchSection {
    pub half_window_points: i64,
    pub min_lag_samples: i64,
    pub max_lag_samples: i64,
    pub significance: f64,
    /// Bypass gain estimation.
    pub force_gain_factor: Option<f64>,
    /// Bypass both delay searches (delay-sensitivity experiments).
    pub force_fine_delay_points: Option<i64>,
}

impl Default for PrematchSection {
    fn default() -> Self {
        Self {
            half_window_points: 7,
            min_lag_samples: -64,
            max_lag_samples: 2048,
            significance: 3.0,
            force_gain_factor: None,
            force_fine_delay_points: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsSection {
    pub welch_segment: usize,
    pub welch_overlap: f64,
    pub spectrogram_window: usize,
    pub spectrogram_overlap: f64,
    /// Floor on the measurement half-width so zero-bandwidth (tone)
    /// interferers still integrate over a band.
    pub min_band_halfwidth_hz: f64,
}

impl Default for MetricsSection {
    fn default() -> Self {
        Self {
            welch_segment: 8192,
            welch_overlap: 0.5,
            spectrogram_window: 1024,
            spectrogram_overlap: 0.75,
            min_band_halfwidth_hz: 25e6,
        }
    }
}

impl ScenarioConfig {
    /// Parse a config file; unknown keys and invariant violations are errors.
    pub fn from_path(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// The SI waveform spec, seeded from `seeds.symbols` unless overridden.
    pub fn si_spec(&self) -> WaveformSpec {
        self.si_waveform.to_spec(self.duration_s, self.seeds.symbols)
    }

    /// The SOI waveform spec (explicit or derived); `None` when disabled.
    pub fn soi_spec(&self) -> Option<WaveformSpec> {
        if !self.channel.soi_enabled {
            return None;
        }
        let wf = self
            .soi_waveform
            .clone()
            .unwrap_or_else(|| self.si_waveform.derived_soi());
        Some(wf.to_spec(self.duration_s, self.seeds.symbols + 1))
    }

    /// True when synthesis must happen at the generation rate and the
    /// capture path goes through the mixer.
    pub fn uses_mixer(&self) -> bool {
        self.mixer.lo_freq_hz.is_some()
    }

    pub fn capture_rate_hz(&self) -> f64 {
        self.frontend.osc_sample_rate_hz
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let cap_rate = self.capture_rate_hz();
        let gen_rate = self.generation_rate_hz;
        if !(gen_rate > 0.0) {
            bail!("generation_rate_hz must be positive");
        }
        if !(self.duration_s > 0.0) {
            bail!("duration_s must be positive");
        }
        let capture_samples = self.duration_s * cap_rate;
        if capture_samples < 1e5 {
            bail!(
                "duration_s: {} s yields {:.0} capture samples; at least 1e5 are required",
                self.duration_s,
                capture_samples
            );
        }
        if self.analysis_guard_s < 0.0
            || 2.0 * self.analysis_guard_s * cap_rate >= capture_samples * 0.5
        {
            bail!("analysis_guard_s: guard consumes too much of the capture");
        }

        let si = self.si_spec();
        let (si_lo, si_hi) = si.occupied_band();
        if si_lo < 0.0 || si_hi >= gen_rate / 2.0 {
            bail!(
                "si_waveform: band [{si_lo:.3e}, {si_hi:.3e}] Hz exceeds the generation Nyquist {:.3e} Hz",
                gen_rate / 2.0
            );
        }
        match self.mixer.lo_freq_hz {
            None => {
                if si_hi >= cap_rate / 2.0 {
                    bail!(
                        "si_waveform: band edge {si_hi:.3e} Hz exceeds the capture Nyquist {:.3e} Hz; configure [mixer] lo_freq_hz for downconversion",
                        cap_rate / 2.0
                    );
                }
            }
            Some(lo) => {
                if !(lo > 0.0) || lo >= gen_rate / 2.0 {
                    bail!("mixer.lo_freq_hz must lie in (0, generation Nyquist)");
                }
                let if_center = (si.center_freq_hz - lo).abs();
                let half = (si_hi - si_lo) / 2.0;
                if if_center + half >= cap_rate / 2.0 {
                    bail!(
                        "si_waveform/mixer: IF band edge {:.3e} Hz exceeds the capture Nyquist {:.3e} Hz",
                        if_center + half,
                        cap_rate / 2.0
                    );
                }
            }
        }
        if let Some(soi) = self.soi_spec() {
            let (lo_b, hi_b) = soi.occupied_band();
            let synth_nyq = if self.uses_mixer() { gen_rate } else { cap_rate } / 2.0;
            if lo_b < 0.0 || hi_b >= synth_nyq {
                bail!(
                    "soi_waveform: band [{lo_b:.3e}, {hi_b:.3e}] Hz exceeds the synthesis Nyquist {synth_nyq:.3e} Hz"
                );
            }
        }

        if !(self.link.gain > 0.0) || !self.link.gain.is_finite() {
            bail!("link.gain must be positive and finite");
        }
        let link_delay_s = self.link.delay_points as f64 / gen_rate + self.impairments.extra_delay_s;
        if link_delay_s >= self.duration_s / 4.0 {
            bail!("link.delay_points: link delay must be small against the duration");
        }
        if self.impairments.extra_delay_s < 0.0 {
            bail!("impairments.extra_delay_s must be non-negative");
        }

        self.frontend
            .to_params()
            .validate()
            .map_err(|e| anyhow::anyhow!("frontend: {e}"))?;
        self.adaptive
            .to_config(self.si_waveform.kind)
            .validate()
            .map_err(|e| anyhow::anyhow!("adaptive: {e}"))?;

        if self.prematch.half_window_points < 0 {
            bail!("prematch.half_window_points must be non-negative");
        }
        if !(0.0..1.0).contains(&self.metrics.welch_overlap)
            || !(0.0..1.0).contains(&self.metrics.spectrogram_overlap)
        {
            bail!("metrics: overlap fractions must lie in [0, 1)");
        }
        Ok(())
    }
}
