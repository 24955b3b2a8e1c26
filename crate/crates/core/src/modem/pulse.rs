//! Square-root raised cosine pulse shaping at an oversampled rate.
//!
//! Time is measured in delay samples `T/M`. The pulse is hard-truncated to
//! `±span` samples and its discrete taps are scaled to unit energy.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{noise_sample, ChannelRealization};
use crate::error::{ConfigError, Result};
use crate::grid::{GridConfig, TimeSequence};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub rolloff: f64,
    pub span: usize,
    pub oversample: usize,
}

impl Default for PulseConfig {
    fn default() -> Self {
        PulseConfig { rolloff: 0.1, span: 20, oversample: 8 }
    }
}

impl PulseConfig {
    pub fn validate(&self, grid: &GridConfig) -> std::result::Result<(), ConfigError> {
        if !(self.rolloff > 0.0 && self.rolloff <= 1.0) {
            return Err(ConfigError::Pulse("rolloff must lie in (0, 1]".into()));
        }
        if self.span == 0 || 2 * self.span >= grid.m_delay {
            return Err(ConfigError::Pulse(format!(
                "span {} must satisfy 0 < 2*span < M = {}",
                self.span, grid.m_delay
            )));
        }
        if self.oversample < 2 {
            return Err(ConfigError::Pulse("oversample must be at least 2".into()));
        }
        Ok(())
    }

    pub fn lead(&self) -> usize {
        self.span * self.oversample
    }
}

/// Continuous SRRC impulse response at `t` delay samples.
fn srrc(t: f64, beta: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let edge = 1.0 / (4.0 * beta);
    if (t.abs() - edge).abs() < 1e-9 {
        let a = PI / (4.0 * beta);
        return beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

/// `2 * span * oversample + 1` unit-energy taps, centred.
pub fn srrc_taps(p: &PulseConfig) -> Vec<f64> {
    let os = p.oversample as f64;
    let lead = p.lead() as i64;
    let raw: Vec<f64> = (-lead..=lead).map(|n| srrc(n as f64 / os, p.rolloff)).collect();
    let e = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    raw.into_iter().map(|v| v / e).collect()
}

/// Oversampled baseband waveform. Symbol `i` of the source sequence (prefix
/// included) is centred at sample `lead + i * oversample`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<C64>,
    pub oversample: usize,
    pub lead: usize,
    pub symbols: usize,
    pub prefix_len: usize,
}

impl Waveform {
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Sample index of body symbol 0, the time origin.
    pub fn origin(&self) -> usize {
        self.lead + self.prefix_len * self.oversample
    }
}

pub fn pulse_shape(x: &TimeSequence, p: &PulseConfig) -> Result<Waveform> {
    if p.oversample < 2 {
        return Err(ConfigError::Pulse("waveform mode needs oversample >= 2".into()).into());
    }
    let taps = srrc_taps(p);
    let os = p.oversample;
    let n = x.samples.len();
    let mut s = vec![C64::new(0.0, 0.0); (n - 1) * os + taps.len()];
    for (i, &v) in x.samples.iter().enumerate() {
        if v == C64::new(0.0, 0.0) {
            continue;
        }
        for (j, &h) in taps.iter().enumerate() {
            s[i * os + j] += v * h;
        }
    }
    Ok(Waveform { samples: s, oversample: os, lead: p.lead(), symbols: n, prefix_len: x.prefix_len() })
}

/// Correlates with the pulse at each symbol instant and drops the prefix.
pub fn matched_filter_sample(r: &Waveform, p: &PulseConfig) -> Result<TimeSequence> {
    if p.oversample != r.oversample || p.lead() != r.lead {
        return Err(ConfigError::Pulse("pulse does not match waveform".into()).into());
    }
    let taps = srrc_taps(p);
    let os = r.oversample;
    let out = (r.prefix_len..r.symbols)
        .map(|i| {
            let base = i * os;
            taps.iter().enumerate().filter_map(|(j, &h)| r.samples.get(base + j).map(|v| v * h)).sum()
        })
        .collect();
    Ok(TimeSequence::plain(out))
}

/// LTV channel at the oversampled rate with exact per-sample Doppler phase
/// `exp(j 2 pi nu_p (t - tau_p))`; noise has variance `noise_var` per sample.
pub fn apply_channel_waveform<R: Rng + ?Sized>(
    s: &Waveform,
    ch: &ChannelRealization,
    grid: &GridConfig,
    noise_var: f64,
    rng: &mut R,
) -> Result<Waveform> {
    if ch.max_delay() > s.prefix_len {
        return Err(ConfigError::DelayExceedsPrefix { delay_idx: ch.max_delay(), cp_len: s.prefix_len }.into());
    }
    let os = s.oversample;
    let denom = (grid.frame_len() * os) as f64;
    let origin = s.origin() as i64;
    let mut r = vec![C64::new(0.0, 0.0); s.samples.len()];
    for tap in &ch.taps {
        let shift = tap.delay_idx * os;
        let w = 2.0 * PI * tap.doppler_idx as f64 / denom;
        for n in shift..r.len() {
            let arg = w * (n as i64 - origin - shift as i64) as f64;
            r[n] += tap.gain * C64::from_polar(1.0, arg) * s.samples[n - shift];
        }
    }
    if noise_var > 0.0 {
        for v in r.iter_mut() {
            *v += noise_sample(rng, noise_var);
        }
    }
    Ok(Waveform { samples: r, ..s.clone() })
}
