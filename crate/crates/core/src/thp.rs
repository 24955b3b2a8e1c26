//! Time-domain Tomlinson-Harashima precoding with modulus `K = 2 alpha sqrt(M)`.
//!
//! The precoder removes the ISI of taps `2..P` sample by sample, dividing by
//! the time-varying first tap and folding the result back into the
//! `[-K/2, K/2)` square. The receiver derotates by the first tap, folds with
//! `K_r = |h_1| K` and equalizes every DD symbol by `1/|h_1|`.

use rand::Rng;

use crate::channel::{ChannelRealization, DopplerPhasors, PathTap, FIRST_TAP_FLOOR};
use crate::error::{ConfigError, OddmError, Result};
use crate::grid::{DDFrame, GridConfig, PrefixKind, TimeSequence};
use crate::modem::Transceiver;
use crate::qam::count_bit_errors;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThpConfig {
    order: u32,
    alpha: f64,
    modulus: f64,
    pub collect_diagnostics: bool,
}

impl ThpConfig {
    pub fn new(order: u32, alpha: f64) -> std::result::Result<Self, ConfigError> {
        crate::qam::Constellation::new(order)?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(ConfigError::Modulo(format!("alpha must be positive, got {alpha}")));
        }
        Ok(ThpConfig { order, alpha, modulus: 2.0 * alpha * (order as f64).sqrt(), collect_diagnostics: false })
    }

    pub fn with_diagnostics(mut self, on: bool) -> Self {
        self.collect_diagnostics = on;
        self
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    /// Average precoded power `K^2 / 6` under uniform folding.
    pub fn nominal_power(&self) -> f64 {
        self.modulus * self.modulus / 6.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wrapped {
    pub value: C64,
    pub p: i64,
    pub q: i64,
}

/// `x = value + pK + jqK`, each component of `value` in `[-K/2, K/2)`.
#[inline]
pub fn mod_k(x: C64, k: f64) -> Wrapped {
    let p = (x.re / k + 0.5).floor();
    let q = (x.im / k + 0.5).floor();
    Wrapped { value: C64::new(x.re - p * k, x.im - q * k), p: p as i64, q: q as i64 }
}

pub type ModuloFn = fn(C64, f64) -> Wrapped;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PrecodeStats {
    pub cancellation_macs: u64,
    pub modulo_ops: u64,
    pub wrapped_samples: u64,
    pub mean_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Precoded {
    /// Zero-prefixed precoded sequence.
    pub seq: TimeSequence,
    pub p: Vec<i64>,
    pub q: Vec<i64>,
    pub stats: PrecodeStats,
}

fn check_first_tap(ch: &ChannelRealization) -> Result<()> {
    let h1 = ch.first().gain.norm();
    if !(h1 > 0.0 && h1.is_finite()) || h1 < FIRST_TAP_FLOOR * ch.energy().sqrt() {
        return Err(OddmError::WeakFirstTap(h1));
    }
    Ok(())
}

pub fn precode(x: &TimeSequence, ch: &ChannelRealization, cfg: &ThpConfig, grid: &GridConfig) -> Result<Precoded> {
    precode_with(x, ch, cfg, grid, &DopplerPhasors::new(grid), mod_k)
}

/// Precoder with an explicit modulo rule, used by fault-injection checks.
pub fn precode_with(
    x: &TimeSequence,
    ch: &ChannelRealization,
    cfg: &ThpConfig,
    grid: &GridConfig,
    ph: &DopplerPhasors,
    modulo: ModuloFn,
) -> Result<Precoded> {
    let nm = grid.frame_len();
    let xt = x.body();
    if xt.len() != nm {
        return Err(OddmError::Length { expected: nm, got: xt.len() });
    }
    ch.check_grid(grid)?;
    check_first_tap(ch)?;

    let l_cp = grid.cp_len;
    let k = cfg.modulus;
    let first = ch.first();
    let rest = &ch.taps[1..];
    let mut buf = vec![C64::new(0.0, 0.0); l_cp + nm];
    let (mut p, mut q) = (Vec::with_capacity(nm), Vec::with_capacity(nm));
    let mut stats = PrecodeStats::default();
    let mut power = 0.0;

    for m in 0..nm {
        let mut isi = C64::new(0.0, 0.0);
        for tap in rest {
            let i = m as i64 - tap.delay_idx as i64;
            isi += ph.coefficient(tap, i) * buf[l_cp + m - tap.delay_idx];
            stats.cancellation_macs += 1;
        }
        let x_ic = xt[m] - isi / ph.coefficient(first, m as i64);
        let w = modulo(x_ic, k);
        stats.modulo_ops += 1;
        if w.p != 0 || w.q != 0 {
            stats.wrapped_samples += 1;
        }
        power += w.value.norm_sqr();
        buf[l_cp + m] = w.value;
        p.push(w.p);
        q.push(w.q);
    }
    stats.mean_power = power / nm as f64;
    Ok(Precoded { seq: TimeSequence { samples: buf, kind: PrefixKind::Zero(l_cp) }, p, q, stats })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub seq: TimeSequence,
    pub p: Vec<i64>,
    pub q: Vec<i64>,
}

/// Derotates by `conj(h_1[m]) / |h_1|` and folds with `K_r = |h_1| K`.
pub fn thp_decode(
    y: &TimeSequence,
    first: &PathTap,
    cfg: &ThpConfig,
    grid: &GridConfig,
    ph: &DopplerPhasors,
) -> Result<Decoded> {
    let body = y.body();
    let nm = grid.frame_len();
    if body.len() != nm {
        return Err(OddmError::Length { expected: nm, got: body.len() });
    }
    let mag = first.gain.norm();
    if mag.is_nan() || mag <= 0.0 {
        return Err(OddmError::WeakFirstTap(mag));
    }
    let kr = mag * cfg.modulus;
    let mut out = Vec::with_capacity(nm);
    let (mut p, mut q) = (Vec::with_capacity(nm), Vec::with_capacity(nm));
    for (m, &v) in body.iter().enumerate() {
        let rot = ph.coefficient(first, m as i64).conj() / mag;
        let w = mod_k(rot * v, kr);
        out.push(w.value);
        p.push(w.p);
        q.push(w.q);
    }
    Ok(Decoded { seq: TimeSequence::plain(out), p, q })
}

pub fn single_tap_equalize(y: &DDFrame, h1_mag: f64) -> DDFrame {
    assert!(h1_mag > 0.0, "single-tap equalizer needs |h_1| > 0");
    let v: Vec<C64> = y.as_slice().iter().map(|s| s / h1_mag).collect();
    DDFrame::devectorize(&v, y.m_delay(), y.n_doppler()).expect("same shape")
}

/// Per-sample wrap bookkeeping for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct WrapRecord {
    pub tx_p: Vec<i64>,
    pub tx_q: Vec<i64>,
    pub rx_p: Vec<i64>,
    pub rx_q: Vec<i64>,
    /// `-K_r ((p_tx + p_rx) + j (q_tx + q_rx))`, the net folding offset left
    /// in the decoded time sequence.
    pub i_t: Vec<C64>,
    /// DD-domain image of `i_t / |h_1|`.
    pub i_dd: DDFrame,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThpFrameOutcome {
    pub rx_bits: Vec<u8>,
    pub bit_errors: u64,
    pub stats: PrecodeStats,
    pub rx_wrapped_samples: u64,
    pub wraps: Option<WrapRecord>,
}

pub fn run_thp_frame<R: Rng + ?Sized>(
    kit: &Transceiver,
    bits: &[u8],
    ch: &ChannelRealization,
    cfg: &ThpConfig,
    noise_var: f64,
    rng: &mut R,
) -> Result<ThpFrameOutcome> {
    let grid = kit.grid();
    let symbols = kit.qam.map_bits(bits)?;
    let frame = DDFrame::devectorize(&symbols, grid.m_delay, grid.n_doppler)?;
    let x_t = kit.modem.modulate(&frame)?;
    let pre = precode_with(&x_t, ch, cfg, grid, &kit.phasors, mod_k)?;
    let y = kit.link.transmit(&pre.seq, ch, grid, &kit.phasors, noise_var, rng)?;
    let first = ch.first();
    let dec = thp_decode(&y, first, cfg, grid, &kit.phasors)?;
    let mag = first.gain.norm();
    let y_dd = single_tap_equalize(&kit.modem.demodulate(&dec.seq)?, mag);
    let rx_bits = kit.qam.demap(y_dd.as_slice());
    let bit_errors = count_bit_errors(bits, &rx_bits);
    let rx_wrapped_samples = dec.p.iter().zip(&dec.q).filter(|(a, b)| **a != 0 || **b != 0).count() as u64;

    let wraps = if cfg.collect_diagnostics {
        let kr = mag * cfg.modulus;
        let i_t: Vec<C64> = (0..grid.frame_len())
            .map(|m| -kr * C64::new((pre.p[m] + dec.p[m]) as f64, (pre.q[m] + dec.q[m]) as f64))
            .collect();
        let scaled: Vec<C64> = i_t.iter().map(|v| v / mag).collect();
        let i_dd = kit.modem.demodulate_samples(&scaled)?;
        Some(WrapRecord { tx_p: pre.p, tx_q: pre.q, rx_p: dec.p, rx_q: dec.q, i_t, i_dd })
    } else {
        None
    };
    Ok(ThpFrameOutcome { rx_bits, bit_errors, stats: pre.stats, rx_wrapped_samples, wraps })
}
