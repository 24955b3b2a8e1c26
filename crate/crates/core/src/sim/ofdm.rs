//! CP-OFDM reference with a one-tap equalizer.
//!
//! The frame carries `N` OFDM symbols of `M` subcarriers; DD-frame element
//! `(m, k)` is subcarrier `m` of symbol `k`. Every symbol gets its own cyclic
//! prefix of `cp_len` samples, and the equalizer uses the channel transfer
//! function at the midpoint of each symbol body.

use std::sync::Arc;

use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::channel::{add_noise, ChannelRealization, DopplerPhasors};
use crate::error::{OddmError, Result};
use crate::grid::GridConfig;
use crate::qam::{count_bit_errors, Constellation};
use crate::C64;

pub struct OfdmBaseline {
    grid: GridConfig,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    phasors: DopplerPhasors,
}

impl std::fmt::Debug for OfdmBaseline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OfdmBaseline").field("grid", &self.grid).finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfdmFrameOutcome {
    pub rx_bits: Vec<u8>,
    pub bit_errors: u64,
}

impl OfdmBaseline {
    pub fn new(grid: &GridConfig) -> Self {
        let mut planner = FftPlanner::new();
        OfdmBaseline {
            grid: *grid,
            forward: planner.plan_fft_forward(grid.m_delay),
            inverse: planner.plan_fft_inverse(grid.m_delay),
            phasors: DopplerPhasors::new(grid),
        }
    }

    fn symbol_len(&self) -> usize {
        self.grid.m_delay + self.grid.cp_len
    }

    /// Serialized transmit stream, `N (M + L)` samples.
    pub fn modulate(&self, symbols: &[C64]) -> Result<Vec<C64>> {
        let (m, n, l) = (self.grid.m_delay, self.grid.n_doppler, self.grid.cp_len);
        if symbols.len() != m * n {
            return Err(OddmError::Length { expected: m * n, got: symbols.len() });
        }
        let scale = 1.0 / (m as f64).sqrt();
        let mut out = Vec::with_capacity(n * self.symbol_len());
        for sym in symbols.chunks_exact(m) {
            let mut buf: Vec<C64> = sym.to_vec();
            self.inverse.process(&mut buf);
            buf.iter_mut().for_each(|v| *v *= scale);
            out.extend_from_slice(&buf[m - l..]);
            out.extend_from_slice(&buf);
        }
        Ok(out)
    }

    /// LTV channel over the serialized stream; samples before the frame are
    /// zero.
    pub fn propagate(&self, x: &[C64], ch: &ChannelRealization) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        for tap in &ch.taps {
            let l = tap.delay_idx;
            for i in l..x.len() {
                y[i] += self.phasors.coefficient(tap, i as i64 - l as i64) * x[i - l];
            }
        }
        y
    }

    /// Channel transfer function of symbol `n` at subcarrier `q`, sampled at
    /// the middle of the symbol body.
    pub fn ctf(&self, ch: &ChannelRealization, n: usize, q: usize) -> C64 {
        let (m, l_cp) = (self.grid.m_delay as i64, self.grid.cp_len as i64);
        let mid = n as i64 * (m + l_cp) + l_cp + m / 2;
        ch.taps
            .iter()
            .map(|t| {
                let l = t.delay_idx as i64;
                self.phasors.coefficient(t, mid - l)
                    * self.phasors.phasor(-(q as i64) * l * self.grid.n_doppler as i64, 1)
            })
            .sum()
    }

    pub fn demodulate(&self, y: &[C64], ch: &ChannelRealization) -> Vec<C64> {
        let (m, l) = (self.grid.m_delay, self.grid.cp_len);
        let scale = 1.0 / (m as f64).sqrt();
        let mut out = Vec::with_capacity(m * self.grid.n_doppler);
        for (n, sym) in y.chunks_exact(self.symbol_len()).enumerate() {
            let mut buf = sym[l..].to_vec();
            self.forward.process(&mut buf);
            for (q, v) in buf.iter().enumerate() {
                out.push(v * scale / self.ctf(ch, n, q));
            }
        }
        out
    }

    pub fn run_frame<R: Rng + ?Sized>(
        &self,
        qam: &Constellation,
        bits: &[u8],
        ch: &ChannelRealization,
        noise_var: f64,
        rng: &mut R,
    ) -> Result<OfdmFrameOutcome> {
        let x = self.modulate(&qam.map_bits(bits)?)?;
        let mut y = self.propagate(&x, ch);
        add_noise(&mut y, noise_var, rng);
        let rx_bits = qam.demap(&self.demodulate(&y, ch));
        let bit_errors = count_bit_errors(bits, &rx_bits);
        Ok(OfdmFrameOutcome { rx_bits, bit_errors })
    }
}

/// One OFDM frame: returns the transmitted and detected bits.
pub fn run_ofdm_baseline_frame<R: Rng + ?Sized>(
    bits: &[u8],
    ch: &ChannelRealization,
    grid: &GridConfig,
    order: u32,
    noise_var: f64,
    rng: &mut R,
) -> Result<(Vec<u8>, Vec<u8>)> {
    let qam = Constellation::new(order)?;
    let out = OfdmBaseline::new(grid).run_frame(&qam, bits, ch, noise_var, rng)?;
    Ok((bits.to_vec(), out.rx_bits))
}
