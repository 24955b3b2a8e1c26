//! ODDM modulation and demodulation.
//!
//! Modulation is a unitary inverse DFT along the Doppler axis of each delay
//! bin followed by delay-major serialization `x_T[nM + m] = x_TD[m, n]`. Since
//! DD frames are stored at `m + kM`, both transforms work in place on the
//! same layout.

mod ddmatrix;
mod pulse;

pub use ddmatrix::DDChannelMatrix;
pub use pulse::{apply_channel_waveform, matched_filter_sample, pulse_shape, srrc_taps, PulseConfig, Waveform};

use std::sync::Arc;

use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::channel::{self, ChannelRealization, DopplerPhasors};
use crate::error::{OddmError, Result};
use crate::grid::{DDFrame, GridConfig, PrefixKind, TimeSequence};
use crate::qam::Constellation;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fidelity {
    #[default]
    Discrete,
    Waveform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prefix {
    Cyclic,
    Zero,
}

pub struct OddmModem {
    grid: GridConfig,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for OddmModem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OddmModem").field("grid", &self.grid).finish()
    }
}

impl OddmModem {
    pub fn new(grid: &GridConfig) -> Self {
        let mut planner = FftPlanner::new();
        OddmModem {
            grid: *grid,
            forward: planner.plan_fft_forward(grid.n_doppler),
            inverse: planner.plan_fft_inverse(grid.n_doppler),
        }
    }

    pub fn grid(&self) -> &GridConfig {
        &self.grid
    }

    /// Unitary DFT (`forward`) or IDFT along the Doppler axis, stride `M`.
    fn doppler_transform(&self, data: &mut [C64], forward: bool) {
        let (m, n) = (self.grid.m_delay, self.grid.n_doppler);
        let fft = if forward { &self.forward } else { &self.inverse };
        let scale = 1.0 / (n as f64).sqrt();
        let mut col = vec![C64::new(0.0, 0.0); n];
        let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for d in 0..m {
            for (k, c) in col.iter_mut().enumerate() {
                *c = data[d + k * m];
            }
            fft.process_with_scratch(&mut col, &mut scratch);
            for (k, c) in col.iter().enumerate() {
                data[d + k * m] = c * scale;
            }
        }
    }

    pub fn modulate(&self, frame: &DDFrame) -> Result<TimeSequence> {
        if !frame.matches(&self.grid) {
            return Err(OddmError::Length { expected: self.grid.frame_len(), got: frame.as_slice().len() });
        }
        let mut x = frame.vectorize();
        self.doppler_transform(&mut x, false);
        Ok(TimeSequence::plain(x))
    }

    /// Demodulates the body of `y`; any prefix is skipped.
    pub fn demodulate(&self, y: &TimeSequence) -> Result<DDFrame> {
        self.demodulate_samples(y.body())
    }

    pub fn demodulate_samples(&self, y: &[C64]) -> Result<DDFrame> {
        let nm = self.grid.frame_len();
        if y.len() != nm {
            return Err(OddmError::Length { expected: nm, got: y.len() });
        }
        let mut v = y.to_vec();
        self.doppler_transform(&mut v, true);
        DDFrame::devectorize(&v, self.grid.m_delay, self.grid.n_doppler)
    }
}

pub fn add_prefix(x: &TimeSequence, kind: Prefix, cp_len: usize) -> TimeSequence {
    let body = x.body();
    assert!(cp_len <= body.len(), "prefix longer than sequence");
    let mut s = Vec::with_capacity(body.len() + cp_len);
    match kind {
        Prefix::Cyclic => s.extend_from_slice(&body[body.len() - cp_len..]),
        Prefix::Zero => s.resize(cp_len, C64::new(0.0, 0.0)),
    }
    s.extend_from_slice(body);
    let kind = match kind {
        Prefix::Cyclic => PrefixKind::Cyclic(cp_len),
        Prefix::Zero => PrefixKind::Zero(cp_len),
    };
    TimeSequence { samples: s, kind }
}

pub fn remove_prefix(x: &TimeSequence) -> TimeSequence {
    TimeSequence::plain(x.body().to_vec())
}

/// Physical link settings shared by all schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub fidelity: Fidelity,
    pub pulse: PulseConfig,
}

impl Default for Link {
    fn default() -> Self {
        Link { fidelity: Fidelity::Discrete, pulse: PulseConfig::default() }
    }
}

impl Link {
    /// Sends a prefixed sequence through the channel and returns the `NM`
    /// received samples at the delay-sample rate.
    pub fn transmit<R: Rng + ?Sized>(
        &self,
        x: &TimeSequence,
        ch: &ChannelRealization,
        grid: &GridConfig,
        ph: &DopplerPhasors,
        noise_var: f64,
        rng: &mut R,
    ) -> Result<TimeSequence> {
        match self.fidelity {
            Fidelity::Discrete => channel::apply_channel_with(x, ch, grid, ph, noise_var, rng),
            Fidelity::Waveform => {
                let s = pulse_shape(x, &self.pulse)?;
                let r = apply_channel_waveform(&s, ch, grid, noise_var, rng)?;
                matched_filter_sample(&r, &self.pulse)
            }
        }
    }
}

/// Everything one worker needs to run frames on a grid: transforms, the
/// Doppler phasor table, the constellation and the link model.
#[derive(Debug)]
pub struct Transceiver {
    grid: GridConfig,
    pub modem: OddmModem,
    pub phasors: DopplerPhasors,
    pub qam: Constellation,
    pub link: Link,
}

impl Transceiver {
    pub fn new(grid: &GridConfig, order: u32, link: Link) -> Result<Self> {
        grid.validate()?;
        if link.fidelity == Fidelity::Waveform {
            link.pulse.validate(grid)?;
        }
        Ok(Transceiver {
            grid: *grid,
            modem: OddmModem::new(grid),
            phasors: DopplerPhasors::new(grid),
            qam: Constellation::new(order)?,
            link,
        })
    }

    pub fn grid(&self) -> &GridConfig {
        &self.grid
    }
}
