//! Emulated interference channel: direct-path SI, multipath echoes, the
//! signal of interest, and an optional white-noise floor.
//!
//! Tap delays and attenuations are absolute (relative to the transmitted SI).
//! The SOI is scaled against the *measured* direct-path power, so its level
//! tracks whatever attenuation the direct tap applies. Multipath is applied
//! to the SI only; the SOI arrives once.

use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Termination impedance used to convert dBm-referenced noise floors to V^2.
pub const REFERENCE_IMPEDANCE_OHMS: f64 = 50.0;

/// One propagation path: delay and power attenuation relative to the
/// transmitted SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathTap {
    pub delay_s: f64,
    pub attenuation_db: f64,
}

/// The interference scenario: direct path, echoes, SOI level, noise floor.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub direct_path: PathTap,
    pub multipaths: Vec<PathTap>,
    /// SOI power relative to the measured direct-path SI power; `None`
    /// disables the SOI.
    pub soi_rel_power_db: Option<f64>,
    /// White-noise floor in dBm/Hz into 50 ohms; `None` disables noise.
    pub noise_floor_dbm_hz: Option<f64>,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self {
            direct_path: PathTap {
                delay_s: 0.0,
                attenuation_db: 0.0,
            },
            multipaths: vec![PathTap {
                delay_s: 5e-9,
                attenuation_db: 26.0,
            }],
            soi_rel_power_db: Some(-26.0),
            noise_floor_dbm_hz: None,
        }
    }
}

impl ChannelSpec {
    /// Non-fatal sanity findings, e.g. an echo stronger than the direct path.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, tap) in self.multipaths.iter().enumerate() {
            if tap.attenuation_db < self.direct_path.attenuation_db {
                out.push(format!(
                    "multipath tap {i} ({} dB) is stronger than the direct path ({} dB)",
                    tap.attenuation_db, self.direct_path.attenuation_db
                ));
            }
        }
        out
    }
}

/// Ground-truth decomposition of the received signal.
#[derive(Debug, Clone)]
pub struct ChannelComponents {
    pub direct: SampledSignal,
    pub multipath_sum: SampledSignal,
    pub soi_scaled: SampledSignal,
    pub noise: SampledSignal,
}

impl ChannelComponents {
    /// Samplewise sum of the four components, in a fixed order.
    pub fn sum(&self) -> Result<SampledSignal> {
        self.direct
            .add(&self.multipath_sum)?
            .add(&self.soi_scaled)?
            .add(&self.noise)
    }
}

/// Render the addends of the received signal separately; `compose_received`
/// is exactly their sum.
pub fn render_components(
    si_tx: &SampledSignal,
    soi: Option<&SampledSignal>,
    spec: &ChannelSpec,
    seed: u64,
) -> Result<ChannelComponents> {
    if let Some(soi) = soi {
        si_tx.check_same_grid(soi)?;
    }
    let rate = si_tx.sample_rate();
    let len = si_tx.len();

    let apply_tap = |tap: &PathTap| -> Result<SampledSignal> {
        si_tx
            .delay_fractional(tap.delay_s)?
            .scale(db_to_amplitude(-tap.attenuation_db))
    };

    let direct = apply_tap(&spec.direct_path)?;
    let mut multipath_sum = SampledSignal::zeros(len, rate)?;
    for tap in &spec.multipaths {
        multipath_sum = multipath_sum.add(&apply_tap(tap)?)?;
    }

    let soi_scaled = match (soi, spec.soi_rel_power_db) {
        (Some(soi), Some(rel_db)) => {
            let p_direct = direct.power();
            let p_soi = soi.power();
            if p_soi <= 0.0 {
                return Err(Error::Config("SOI waveform has zero power".into()));
            }
            let target = p_direct * 10f64.powf(rel_db / 10.0);
            soi.scale((target / p_soi).sqrt())?
        }
        _ => SampledSignal::zeros(len, rate)?,
    };

    let noise = match spec.noise_floor_dbm_hz {
        Some(floor) => {
            let variance = noise_variance(floor, rate);
            let sigma = variance.sqrt();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let samples = (0..len)
                .map(|_| sigma * rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            SampledSignal::new(samples, rate)?
        }
        None => SampledSignal::zeros(len, rate)?,
    };

    Ok(ChannelComponents {
        direct,
        multipath_sum,
        soi_scaled,
        noise,
    })
}

/// Received signal: delayed/attenuated SI, echoes, SOI, and seeded noise.
pub fn compose_received(
    si_tx: &SampledSignal,
    soi: Option<&SampledSignal>,
    spec: &ChannelSpec,
    seed: u64,
) -> Result<SampledSignal> {
    render_components(si_tx, soi, spec, seed)?.sum()
}

/// Sample variance of a white floor of `floor_dbm_hz` over the Nyquist band.
pub fn noise_variance(floor_dbm_hz: f64, sample_rate: f64) -> f64 {
    let v2_per_hz = 10f64.powf(floor_dbm_hz / 10.0) * 1e-3 * REFERENCE_IMPEDANCE_OHMS;
    v2_per_hz * sample_rate / 2.0
}

pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}
