//! On-grid doubly-selective channels.
//!
//! A profile's delays are rounded to the delay grid `T/M` and taps landing in
//! the same bin are merged by adding their complex gains. Each merged tap then
//! gets one Doppler shift, rounded to the Doppler grid `1/(NT)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Result};
use crate::grid::{GridConfig, TimeSequence};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelTag {
    Eva,
    Hsr,
    #[default]
    Custom,
    SinglePath,
}

impl ModelTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelTag::Eva => "eva",
            ModelTag::Hsr => "hsr",
            ModelTag::Custom => "custom",
            ModelTag::SinglePath => "single-path",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Fading {
    Rayleigh,
    Rician { k_db: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DopplerLaw {
    /// `fmax * cos(theta)` with `theta` uniform.
    #[default]
    Jakes,
    /// `+fmax` or `-fmax` with equal probability.
    FixedMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub tap_delays_s: Vec<f64>,
    pub tap_powers_db: Vec<f64>,
    pub fading: Fading,
    pub fmax_hz: f64,
    #[serde(default)]
    pub doppler_law: DopplerLaw,
    #[serde(skip)]
    pub model: ModelTag,
}

/// Realized taps with `|h_1|` below this fraction of the first-bin RMS gain
/// are redrawn.
pub const FIRST_TAP_FLOOR: f64 = 1e-6;

impl ProfileSpec {
    pub fn eva() -> Self {
        ProfileSpec {
            tap_delays_s: [0.0, 30.0, 150.0, 310.0, 370.0, 710.0, 1090.0, 1730.0, 2510.0]
                .iter()
                .map(|ns| ns * 1e-9)
                .collect(),
            tap_powers_db: vec![0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9],
            fading: Fading::Rayleigh,
            fmax_hz: 1000.0,
            doppler_law: DopplerLaw::Jakes,
            model: ModelTag::Eva,
        }
    }

    /// Four-tap Rician railway profile.
    pub fn hsr() -> Self {
        ProfileSpec {
            tap_delays_s: vec![0.0, 1000e-9, 2500e-9, 4000e-9],
            tap_powers_db: vec![0.0, -3.0, -6.0, -9.0],
            fading: Fading::Rician { k_db: 5.0 },
            fmax_hz: 2000.0,
            doppler_law: DopplerLaw::Jakes,
            model: ModelTag::Hsr,
        }
    }

    pub fn single_path() -> Self {
        ProfileSpec {
            tap_delays_s: vec![0.0],
            tap_powers_db: vec![0.0],
            fading: Fading::Rayleigh,
            fmax_hz: 0.0,
            doppler_law: DopplerLaw::Jakes,
            model: ModelTag::SinglePath,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        let n = self.tap_delays_s.len();
        if n == 0 || n != self.tap_powers_db.len() {
            return Err(ConfigError::Channel("delay and power lists must be non-empty and equal length".into()));
        }
        if self.tap_delays_s.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(ConfigError::Channel("delays must be finite and non-negative".into()));
        }
        if self.tap_powers_db.iter().any(|p| !p.is_finite()) {
            return Err(ConfigError::Channel("powers must be finite".into()));
        }
        if !(self.fmax_hz.is_finite() && self.fmax_hz >= 0.0) {
            return Err(ConfigError::Channel("fmax_hz must be finite and non-negative".into()));
        }
        if let Fading::Rician { k_db } = self.fading {
            if !k_db.is_finite() {
                return Err(ConfigError::Channel("Rician K-factor must be finite".into()));
            }
        }
        Ok(())
    }

    /// Linear tap powers scaled to sum to one.
    pub fn normalized_powers(&self) -> Vec<f64> {
        let lin: Vec<f64> = self.tap_powers_db.iter().map(|db| 10f64.powf(db / 10.0)).collect();
        let total: f64 = lin.iter().sum();
        lin.into_iter().map(|p| p / total).collect()
    }

    pub fn delay_indices(&self, grid: &GridConfig) -> Vec<usize> {
        let res = grid.delay_resolution();
        self.tap_delays_s.iter().map(|d| (d / res).round() as usize).collect()
    }

    /// Checks the profile against a grid: quantized delays must fit the prefix
    /// and the shortest delay must land in bin 0.
    pub fn check_grid(&self, grid: &GridConfig) -> std::result::Result<(), ConfigError> {
        self.validate()?;
        let idx = self.delay_indices(grid);
        if let Some(&l) = idx.iter().find(|&&l| l > grid.cp_len) {
            return Err(ConfigError::DelayExceedsPrefix { delay_idx: l, cp_len: grid.cp_len });
        }
        if !idx.contains(&0) {
            return Err(ConfigError::Channel("no tap quantizes to zero delay".into()));
        }
        Ok(())
    }

    /// Average power of the merged zero-delay tap on this grid.
    pub fn first_tap_power(&self, grid: &GridConfig) -> f64 {
        self.delay_indices(grid).iter().zip(self.normalized_powers()).filter(|(&l, _)| l == 0).map(|(_, p)| p).sum()
    }

    pub fn max_delay_index(&self, grid: &GridConfig) -> usize {
        self.delay_indices(grid).into_iter().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathTap {
    pub gain: C64,
    pub delay_idx: usize,
    pub doppler_idx: i64,
    pub doppler_hz: f64,
}

impl PathTap {
    pub fn new(gain: C64, delay_idx: usize, doppler_idx: i64, grid: &GridConfig) -> Self {
        PathTap { gain, delay_idx, doppler_idx, doppler_hz: doppler_idx as f64 * grid.doppler_resolution() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub taps: Vec<PathTap>,
    pub model: ModelTag,
}

impl ChannelRealization {
    /// Builds a realization from taps, checking ordering and `l_1 = 0`.
    pub fn new(taps: Vec<PathTap>, model: ModelTag) -> std::result::Result<Self, ConfigError> {
        if taps.is_empty() {
            return Err(ConfigError::Channel("at least one tap required".into()));
        }
        if taps[0].delay_idx != 0 {
            return Err(ConfigError::Channel("first tap must have zero delay".into()));
        }
        if taps.windows(2).any(|w| w[1].delay_idx < w[0].delay_idx) {
            return Err(ConfigError::Channel("tap delays must be non-decreasing".into()));
        }
        Ok(ChannelRealization { taps, model })
    }

    pub fn first(&self) -> &PathTap {
        &self.taps[0]
    }

    pub fn num_taps(&self) -> usize {
        self.taps.len()
    }

    pub fn max_delay(&self) -> usize {
        self.taps.iter().map(|t| t.delay_idx).max().unwrap_or(0)
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.gain.norm_sqr()).sum()
    }

    /// Keeps only the zero-delay tap.
    pub fn first_tap_only(&self) -> ChannelRealization {
        ChannelRealization { taps: vec![self.taps[0]], model: self.model }
    }

    pub fn check_grid(&self, grid: &GridConfig) -> std::result::Result<(), ConfigError> {
        let l = self.max_delay();
        if l > grid.cp_len {
            return Err(ConfigError::DelayExceedsPrefix { delay_idx: l, cp_len: grid.cp_len });
        }
        Ok(())
    }
}

/// Table of `exp(j 2 pi i / NM)` for `i` in `[0, NM)`.
///
/// The time-varying tap `h_p[i] = h_p exp(j 2 pi k_p i / NM)` is read from it
/// so every module sees bit-identical coefficients.
#[derive(Debug, Clone)]
pub struct DopplerPhasors {
    table: Vec<C64>,
}

impl DopplerPhasors {
    pub fn new(grid: &GridConfig) -> Self {
        let nm = grid.frame_len();
        let table = (0..nm).map(|i| C64::from_polar(1.0, 2.0 * PI * i as f64 / nm as f64)).collect();
        DopplerPhasors { table }
    }

    #[inline]
    pub fn phasor(&self, doppler_idx: i64, i: i64) -> C64 {
        let nm = self.table.len() as i64;
        self.table[(doppler_idx.rem_euclid(nm) * i.rem_euclid(nm)).rem_euclid(nm) as usize]
    }

    /// `h_p[i]` for a tap.
    #[inline]
    pub fn coefficient(&self, tap: &PathTap, i: i64) -> C64 {
        tap.gain * self.phasor(tap.doppler_idx, i)
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * s, im * s)
}

pub fn draw_channel<R: Rng + ?Sized>(spec: &ProfileSpec, grid: &GridConfig, rng: &mut R) -> Result<ChannelRealization> {
    spec.check_grid(grid)?;
    let powers = spec.normalized_powers();
    let delays = spec.delay_indices(grid);

    let mut merged: BTreeMap<usize, C64> = BTreeMap::new();
    for (i, (&p, &l)) in powers.iter().zip(&delays).enumerate() {
        let g = match spec.fading {
            Fading::Rician { k_db } if i == 0 => {
                let k = 10f64.powf(k_db / 10.0);
                let phi = rng.random::<f64>() * 2.0 * PI;
                C64::from_polar((p * k / (k + 1.0)).sqrt(), phi) + complex_gaussian(rng, p / (k + 1.0))
            }
            _ => complex_gaussian(rng, p),
        };
        *merged.entry(l).or_insert(C64::new(0.0, 0.0)) += g;
    }

    let nt = grid.n_doppler as f64 * grid.t_sym;
    let taps = merged
        .into_iter()
        .map(|(l, gain)| {
            let nu = match spec.doppler_law {
                DopplerLaw::Jakes => spec.fmax_hz * (2.0 * PI * rng.random::<f64>()).cos(),
                DopplerLaw::FixedMax => {
                    if rng.random::<bool>() {
                        spec.fmax_hz
                    } else {
                        -spec.fmax_hz
                    }
                }
            };
            PathTap::new(gain, l, (nu * nt).round() as i64, grid)
        })
        .collect();
    Ok(ChannelRealization::new(taps, spec.model)?)
}

/// Draws until `|h_1|` clears the floor; returns the channel and the number
/// of rejected draws.
pub fn draw_usable_channel<R: Rng + ?Sized>(
    spec: &ProfileSpec,
    grid: &GridConfig,
    rng: &mut R,
) -> Result<(ChannelRealization, u64)> {
    let floor = FIRST_TAP_FLOOR * spec.first_tap_power(grid).sqrt();
    let mut redraws = 0;
    loop {
        let ch = draw_channel(spec, grid, rng)?;
        if ch.first().gain.norm() >= floor {
            return Ok((ch, redraws));
        }
        redraws += 1;
    }
}

/// Noiseless LTV channel: `y[m] = sum_p h_p[m - l_p] x[m - l_p]` over the
/// prefixed input. Returns `NM` samples.
pub fn propagate(
    x: &TimeSequence,
    ch: &ChannelRealization,
    grid: &GridConfig,
    ph: &DopplerPhasors,
) -> Result<Vec<C64>> {
    let nm = grid.frame_len();
    let pre = x.prefix_len();
    if x.body_len() != nm {
        return Err(crate::OddmError::Length { expected: nm, got: x.body_len() });
    }
    if ch.max_delay() > pre {
        return Err(ConfigError::DelayExceedsPrefix { delay_idx: ch.max_delay(), cp_len: pre }.into());
    }
    let mut y = vec![C64::new(0.0, 0.0); nm];
    for tap in &ch.taps {
        let l = tap.delay_idx;
        for (m, out) in y.iter_mut().enumerate() {
            let i = m as i64 - l as i64;
            *out += ph.coefficient(tap, i) * x.samples[pre + m - l];
        }
    }
    Ok(y)
}

pub fn add_noise<R: Rng + ?Sized>(y: &mut [C64], noise_var: f64, rng: &mut R) {
    if noise_var > 0.0 {
        for v in y.iter_mut() {
            *v += complex_gaussian(rng, noise_var);
        }
    }
}

/// Channel plus circular Gaussian noise of variance `noise_var` per complex
/// sample.
pub fn apply_channel<R: Rng + ?Sized>(
    x: &TimeSequence,
    ch: &ChannelRealization,
    grid: &GridConfig,
    noise_var: f64,
    rng: &mut R,
) -> Result<TimeSequence> {
    apply_channel_with(x, ch, grid, &DopplerPhasors::new(grid), noise_var, rng)
}

pub fn apply_channel_with<R: Rng + ?Sized>(
    x: &TimeSequence,
    ch: &ChannelRealization,
    grid: &GridConfig,
    ph: &DopplerPhasors,
    noise_var: f64,
    rng: &mut R,
) -> Result<TimeSequence> {
    let mut y = propagate(x, ch, grid, ph)?;
    add_noise(&mut y, noise_var, rng);
    Ok(TimeSequence::plain(y))
}

pub(crate) fn noise_sample<R: Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    complex_gaussian(rng, var)
}
