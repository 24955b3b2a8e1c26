use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ProfileSpec;
use crate::error::{ConfigError, Result};
use crate::grid::GridConfig;
use crate::modem::{Fidelity, Link, PulseConfig};
use crate::seed::SeedPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    OddmThp,
    OddmSinglePathRef,
    OfdmSingleTap,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::OddmThp => "oddm-thp",
            Scheme::OddmSinglePathRef => "oddm-single-path-ref",
            Scheme::OfdmSingleTap => "ofdm-single-tap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelPreset {
    Eva,
    Hsr,
    SinglePath,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelChoice {
    Preset(ChannelPreset),
    Custom(ProfileSpec),
}

impl ChannelChoice {
    pub fn profile(&self) -> ProfileSpec {
        match self {
            ChannelChoice::Preset(ChannelPreset::Eva) => ProfileSpec::eva(),
            ChannelChoice::Preset(ChannelPreset::Hsr) => ProfileSpec::hsr(),
            ChannelChoice::Preset(ChannelPreset::SinglePath) => ProfileSpec::single_path(),
            ChannelChoice::Custom(p) => p.clone(),
        }
    }
}

/// Modulation settings. The scaling factor comes from `alpha_list`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThpSection {
    pub order: u32,
    #[serde(default)]
    pub collect_diagnostics: bool,
}

/// Lowest `target_errors` accepted for a reported point.
pub const MIN_TARGET_ERRORS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub grid: GridConfig,
    #[serde(default)]
    pub pulse: PulseConfig,
    #[serde(default)]
    pub fidelity: Fidelity,
    pub thp: ThpSection,
    pub channel: ChannelChoice,
    pub snr_db_list: Vec<f64>,
    pub alpha_list: Vec<f64>,
    pub max_frames: u64,
    pub target_errors: u64,
    pub seed: SeedPlan,
}

impl SimConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: SimConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_path(p: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(p)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn profile(&self) -> ProfileSpec {
        self.channel.profile()
    }

    pub fn link(&self) -> Link {
        Link { fidelity: self.fidelity, pulse: self.pulse }
    }

    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        self.grid.validate()?;
        crate::qam::Constellation::new(self.thp.order)?;
        if self.snr_db_list.is_empty() || self.alpha_list.is_empty() {
            return Err(ConfigError::Sim("snr_db_list and alpha_list must be non-empty".into()));
        }
        if self.snr_db_list.iter().any(|s| !s.is_finite()) {
            return Err(ConfigError::Sim("SNR values must be finite".into()));
        }
        if self.alpha_list.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(ConfigError::Sim("alpha values must be positive".into()));
        }
        if self.max_frames == 0 {
            return Err(ConfigError::Sim("max_frames must be positive".into()));
        }
        if self.target_errors < MIN_TARGET_ERRORS {
            return Err(ConfigError::Sim(format!("target_errors must be at least {MIN_TARGET_ERRORS}")));
        }
        if self.max_frames > crate::seed::MAX_FRAME_INDEX {
            return Err(ConfigError::Sim("max_frames too large".into()));
        }
        self.profile().check_grid(&self.grid)?;
        if self.fidelity == Fidelity::Waveform {
            if self.scheme == Scheme::OfdmSingleTap {
                return Err(ConfigError::Sim("waveform fidelity applies to ODDM schemes only".into()));
            }
            self.pulse.validate(&self.grid)?;
        }
        Ok(())
    }

    /// EVA, 4-QAM, 64 x 16 grid, THP over the usual alpha range.
    pub fn desk_default() -> Self {
        SimConfig {
            scheme: Scheme::OddmThp,
            grid: GridConfig::desk(),
            pulse: PulseConfig::default(),
            fidelity: Fidelity::Discrete,
            thp: ThpSection { order: 4, collect_diagnostics: false },
            channel: ChannelChoice::Preset(ChannelPreset::Eva),
            snr_db_list: vec![30.0],
            alpha_list: (0..13).map(|i| (6 + 2 * i) as f64 / 10.0).collect(),
            max_frames: 10_000,
            target_errors: 200,
            seed: SeedPlan::new(1),
        }
    }

    /// 512 x 64 grid.
    pub fn full_scale(scheme: Scheme) -> Self {
        SimConfig { scheme, grid: GridConfig::full_scale(), ..Self::desk_default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "scheme": "oddm-thp",
        "grid": {"m_delay": 64, "n_doppler": 16, "delta_f": 15000, "cp_len": 8, "fc": 6e9},
        "fidelity": "discrete",
        "thp": {"order": 4},
        "channel": "eva",
        "snr_db_list": [20, 30],
        "alpha_list": [1.0, 2.0],
        "max_frames": 100,
        "target_errors": 200,
        "seed": {"master_seed": 7}
    }"#;

    #[test]
    fn parses_sample() {
        let c = SimConfig::from_json(SAMPLE).unwrap();
        assert_eq!(c.scheme, Scheme::OddmThp);
        assert_eq!(c.pulse, PulseConfig::default());
        assert_eq!(c.profile(), ProfileSpec::eva());
        let back = SimConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn custom_channel_object() {
        let s = SAMPLE.replace(
            r#""channel": "eva""#,
            r#""channel": {"tap_delays_s": [0, 1e-6], "tap_powers_db": [0, -3], "fading": "rayleigh", "fmax_hz": 100}"#,
        );
        let c = SimConfig::from_json(&s).unwrap();
        assert_eq!(c.profile().tap_delays_s.len(), 2);
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            SAMPLE.replace(r#""seed""#, r#""extra": 1, "seed""#),
            SAMPLE.replace(r#""target_errors": 200"#, r#""target_errors": 50"#),
            SAMPLE.replace(r#""alpha_list": [1.0, 2.0]"#, r#""alpha_list": []"#),
            SAMPLE.replace(r#""alpha_list": [1.0, 2.0]"#, r#""alpha_list": [-1.0]"#),
            SAMPLE.replace(r#""order": 4"#, r#""order": 8"#),
            SAMPLE.replace(r#""cp_len": 8"#, r#""cp_len": 1"#),
            SAMPLE.replace(r#""eva""#, r#""tdl-z""#),
            SAMPLE.replace(r#""oddm-thp""#, r#""ofdm-single-tap""#).replace(r#""discrete""#, r#""waveform""#),
            SAMPLE.replace(r#""max_frames": 100"#, r#""max_frames": 0"#),
        ];
        for (i, s) in cases.iter().enumerate() {
            let e = SimConfig::from_json(s).unwrap_err();
            assert!(e.is_config(), "case {i}: {e}");
        }
    }
}
