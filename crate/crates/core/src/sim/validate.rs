//! Cross-module self-checks on a small grid.
//!
//! Each check reports the largest deviation it saw against a tolerance. The
//! precoder checks take the modulo rule as a parameter so a deliberately
//! broken rule can be shown to fail.

use std::fmt;

use rand::Rng;

use crate::analysis::{
    mnl_16qam, mnl_4qam, msl_16qam, msl_4qam, msl_variance, power_loss_16qam, power_loss_16qam_noise_form,
    power_loss_4qam, power_loss_4qam_noise_form, q_func, rayleigh_pairwise, BoundParams,
};
use crate::channel::{apply_channel, propagate, ChannelRealization, DopplerPhasors, ModelTag, PathTap};
use crate::error::Result;
use crate::grid::{DDFrame, GridConfig};
use crate::modem::{add_prefix, DDChannelMatrix, OddmModem, Prefix};
use crate::qam::Constellation;
use crate::seed::{FrameRng, SeedPlan, StreamTag};
use crate::thp::{mod_k, precode_with, single_tap_equalize, thp_decode, ModuloFn, ThpConfig, Wrapped};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Small,
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "small" => Ok(Preset::Small),
            _ => Err(format!("unknown preset `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max_error < self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<4} {:<28} max_err={:.3e} tol={:.0e}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.max_error,
                c.tolerance
            )?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

/// Wrong counting rule for the fault-injection test: the folded value is
/// correct but the reported offsets use `floor(x / K)`.
pub fn mutated_mod_k(x: C64, k: f64) -> Wrapped {
    let w = mod_k(x, k);
    Wrapped { value: w.value, p: (x.re / k).floor() as i64, q: (x.im / k).floor() as i64 }
}

fn small_grid() -> GridConfig {
    GridConfig::new(8, 4, 15e3, 3).expect("valid grid")
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rand_c(r: &mut FrameRng, scale: f64) -> C64 {
    c(scale * (r.random::<f64>() - 0.5), scale * (r.random::<f64>() - 0.5))
}

fn random_channel(g: &GridConfig, r: &mut FrameRng) -> ChannelRealization {
    let p = r.random_range(2..=g.cp_len + 1);
    let mut delays: Vec<usize> = (1..=g.cp_len).collect();
    for i in (1..delays.len()).rev() {
        delays.swap(i, r.random_range(0..=i));
    }
    let mut rest = delays[..p - 1].to_vec();
    rest.sort_unstable();
    let first = c(0.6 + r.random::<f64>(), r.random::<f64>() - 0.5);
    let mut taps = vec![PathTap::new(first, 0, r.random_range(-2..=2), g)];
    for l in rest {
        taps.push(PathTap::new(rand_c(r, 1.0), l, r.random_range(-2..=2), g));
    }
    ChannelRealization::new(taps, ModelTag::Custom).expect("ordered taps")
}

fn max_dev<'a>(a: impl IntoIterator<Item = &'a C64>, b: impl IntoIterator<Item = &'a C64>) -> f64 {
    a.into_iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn check_ddmatrix(g: &GridConfig, r: &mut FrameRng) -> Result<f64> {
    let modem = OddmModem::new(g);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let ch = random_channel(g, r);
        let x: Vec<C64> = (0..g.frame_len()).map(|_| rand_c(r, 2.0)).collect();
        let f = DDFrame::devectorize(&x, g.m_delay, g.n_doppler)?;
        let xt = add_prefix(&modem.modulate(&f)?, Prefix::Cyclic, g.cp_len);
        let y = modem.demodulate(&apply_channel(&xt, &ch, g, 0.0, r)?)?.vectorize();
        let want = DDChannelMatrix::build(&ch, g).apply(&x);
        worst = worst.max(max_dev(&y, &want));
    }
    Ok(worst)
}

/// `y_T[m] - h_1[m] x_T[m] + h_1[m] (p K + j q K)` over noiseless frames.
pub fn precode_identity_error(modulo: ModuloFn) -> Result<f64> {
    let g = small_grid();
    let ph = DopplerPhasors::new(&g);
    let modem = OddmModem::new(&g);
    let qam = Constellation::new(4)?;
    let mut r = SeedPlan::new(0x7e57).derive_stream(1, StreamTag::SURROGATE);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let ch = random_channel(&g, &mut r);
        let cfg = ThpConfig::new(4, 0.6 + 2.0 * r.random::<f64>())?;
        let bits = qam.random_bits(g.frame_len(), &mut r);
        let f = DDFrame::devectorize(&qam.map_bits(&bits)?, g.m_delay, g.n_doppler)?;
        let xt = modem.modulate(&f)?;
        let pre = precode_with(&xt, &ch, &cfg, &g, &ph, modulo)?;
        let y = propagate(&pre.seq, &ch, &g, &ph)?;
        let k = cfg.modulus();
        for (m, yv) in y.iter().enumerate() {
            let h1 = ph.coefficient(ch.first(), m as i64);
            let offset = c(pre.p[m] as f64 * k, pre.q[m] as f64 * k);
            worst = worst.max((yv - h1 * xt.body()[m] + h1 * offset).norm());
        }
    }
    Ok(worst)
}

fn check_mod_k(r: &mut FrameRng) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let k = 0.5 + 10.0 * r.random::<f64>();
        let x = rand_c(r, 20.0 * k);
        let w = mod_k(x, k);
        let back = w.value + c(w.p as f64 * k, w.q as f64 * k);
        let mut e = (back - x).norm();
        let inside = |v: f64| (-k / 2.0..k / 2.0).contains(&v);
        if !inside(w.value.re) || !inside(w.value.im) {
            e = f64::INFINITY;
        }
        worst = worst.max(e);
    }
    worst
}

/// Noiseless chain: the equalized DD frame must equal `X + I_DD`, where
/// `I_DD` is the image of the net transmit plus receive wraps.
fn check_thp_pipeline(g: &GridConfig, r: &mut FrameRng) -> Result<f64> {
    let ph = DopplerPhasors::new(g);
    let modem = OddmModem::new(g);
    let qam = Constellation::new(4)?;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let ch = random_channel(g, r);
        let cfg = ThpConfig::new(4, 0.6 + 2.0 * r.random::<f64>())?;
        let x = qam.map_bits(&qam.random_bits(g.frame_len(), r))?;
        let f = DDFrame::devectorize(&x, g.m_delay, g.n_doppler)?;
        let pre = precode_with(&modem.modulate(&f)?, &ch, &cfg, g, &ph, mod_k)?;
        let y = crate::grid::TimeSequence::plain(propagate(&pre.seq, &ch, g, &ph)?);
        let dec = thp_decode(&y, ch.first(), &cfg, g, &ph)?;
        let mag = ch.first().gain.norm();
        let kr = mag * cfg.modulus();
        let got = single_tap_equalize(&modem.demodulate(&dec.seq)?, mag);
        let i_t: Vec<C64> = (0..g.frame_len())
            .map(|m| -kr * c((pre.p[m] + dec.p[m]) as f64, (pre.q[m] + dec.q[m]) as f64) / mag)
            .collect();
        let i_dd = modem.demodulate_samples(&i_t)?;
        let want: Vec<C64> = x.iter().zip(i_dd.as_slice()).map(|(a, b)| a + b).collect();
        worst = worst.max(max_dev(got.as_slice(), &want));
    }
    Ok(worst)
}

/// Simpson rule over the Rayleigh amplitude density.
pub fn rayleigh_pairwise_quadrature(a: f64, sigma_h1_sq: f64, sigma_w_sq: f64) -> f64 {
    let n = 20_000;
    let top = (40.0 * sigma_h1_sq).sqrt();
    let h = top / n as f64;
    let f = |r: f64| {
        let pdf = 2.0 * r / sigma_h1_sq * (-r * r / sigma_h1_sq).exp();
        pdf * q_func(r * a / (sigma_w_sq / 2.0).sqrt())
    };
    let mut s = f(0.0) + f(top);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

const PAIRWISE_POINTS: [(f64, f64, f64); 20] = [
    (1.0, 1.0, 0.1),
    (1.0, 1.0, 1.0),
    (1.0, 0.5, 0.01),
    (2.0, 0.9, 0.3),
    (3.0, 0.2, 2.0),
    (0.5, 1.5, 0.05),
    (1.0, 0.902, 0.02),
    (5.0, 1.0, 4.0),
    (0.2, 2.0, 0.5),
    (1.7, 0.3, 1e-3),
    (4.0, 0.7, 10.0),
    (1.0, 1.0, 100.0),
    (2.5, 1.2, 0.8),
    (0.8, 0.6, 0.2),
    (3.3, 0.9, 0.02),
    (1.2, 0.1, 0.07),
    (6.0, 1.0, 1.0),
    (0.9, 1.9, 3.0),
    (1.1, 0.45, 0.45),
    (2.2, 0.8, 5e-3),
];

fn check_pairwise() -> f64 {
    PAIRWISE_POINTS
        .iter()
        .map(|&(a, sh, sw)| (rayleigh_pairwise(a, sh, sw) - rayleigh_pairwise_quadrature(a, sh, sw)).abs())
        .fold(0.0, f64::max)
}

const BOUND_POINTS: [(f64, f64, f64); 5] =
    [(1.0, 1.0, 10.0), (2.5, 0.9, 1e3), (0.8, 0.2, 3e4), (3.0, 1.5, 1.0), (1.4, 0.902, 1e3)];

fn check_pl4_forms() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(a, sh, snr) in &BOUND_POINTS {
        let p = BoundParams::from_snr(4, a, sh, snr)?;
        worst = worst.max((power_loss_4qam(&p) - power_loss_4qam_noise_form(&p)).abs());
    }
    Ok(worst)
}

fn check_pl16_forms() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(a, sh, snr) in &BOUND_POINTS {
        let p = BoundParams::from_snr(16, a, sh, snr)?;
        worst = worst.max((power_loss_16qam(&p) - power_loss_16qam_noise_form(&p)).abs());
    }
    Ok(worst)
}

const NOISE_POINTS: [(f64, f64); 4] = [(1.0, 0.1), (0.9, 0.02), (0.4, 1.3), (2.0, 1e-3)];

fn check_mnl4_limit() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(sh, sw) in &NOISE_POINTS {
        let p = BoundParams::from_noise(4, 1e6, sh, sw)?;
        let closed = 0.5 - 0.5 * (sh / (sw + sh)).sqrt();
        worst = worst.max((mnl_4qam(&p)? - closed).abs());
    }
    Ok(worst)
}

fn check_mnl16_limit() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(sh, sw) in &NOISE_POINTS {
        let p = BoundParams::from_noise(16, 1e6, sh, sw)?;
        worst = worst.max((mnl_16qam(&p) - power_loss_16qam_noise_form(&p)).abs());
    }
    Ok(worst)
}

fn check_msl_forms() -> f64 {
    let mut worst: f64 = 0.0;
    for a in [0.6, 0.8, 1.0, 1.4, 2.0] {
        let v4 = msl_variance(4, a, 10);
        worst = worst.max((msl_4qam(a, 10) - q_func((2.0 / v4).sqrt())).abs());
        let v16 = msl_variance(16, a, 10);
        worst = worst.max((msl_16qam(a, 10) - 0.75 * q_func((2.0 / v16).sqrt())).abs());
    }
    worst
}

/// Runs every check with the given modulo rule inside the precoder identity.
pub fn run_with(preset: Preset, modulo: ModuloFn) -> Result<Report> {
    let Preset::Small = preset;
    let g = small_grid();
    let mut r = SeedPlan::new(0x7e57).derive_stream(0, StreamTag::SURROGATE);
    let checks = vec![
        Check { name: "dd-matrix-vs-chain", max_error: check_ddmatrix(&g, &mut r)?, tolerance: 1e-9 },
        Check { name: "precode-identity", max_error: precode_identity_error(modulo)?, tolerance: 1e-9 },
        Check { name: "mod-k-decomposition", max_error: check_mod_k(&mut r), tolerance: 1e-9 },
        Check { name: "thp-noiseless-pipeline", max_error: check_thp_pipeline(&g, &mut r)?, tolerance: 1e-9 },
        Check { name: "rayleigh-pairwise-quadrature", max_error: check_pairwise(), tolerance: 1e-6 },
        Check { name: "pl4-forms", max_error: check_pl4_forms()?, tolerance: 1e-12 },
        Check { name: "pl16-forms", max_error: check_pl16_forms()?, tolerance: 1e-12 },
        Check { name: "mnl4-large-alpha", max_error: check_mnl4_limit()?, tolerance: 1e-10 },
        Check { name: "mnl16-large-alpha", max_error: check_mnl16_limit()?, tolerance: 1e-10 },
        Check { name: "msl-closed-forms", max_error: check_msl_forms(), tolerance: 1e-12 },
    ];
    Ok(Report { checks })
}

pub fn run(preset: Preset) -> Result<Report> {
    run_with(preset, mod_k)
}
