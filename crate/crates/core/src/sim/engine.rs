use rayon::prelude::*;
use rayon::ThreadPool;

use crate::analysis::{theorem1, BoundParams};
use crate::channel::{draw_usable_channel, ChannelRealization, ProfileSpec};
use crate::error::{ConfigError, Result};
use crate::grid::DDFrame;
use crate::modem::{add_prefix, Prefix, Transceiver};
use crate::qam::count_bit_errors;
use crate::seed::{FrameRng, SeedPlan, StreamTag};
use crate::thp::{run_thp_frame, single_tap_equalize, ThpConfig};

use super::config::{Scheme, SimConfig};
use super::ofdm::OfdmBaseline;
use super::report::{sort_records, BerRecord};

/// Frames evaluated per parallel batch. Early stopping is decided in frame
/// order inside a batch, so the result does not depend on the worker count.
pub const BATCH_FRAMES: u64 = 256;

/// Noise variance per complex sample for a target SNR.
///
/// THP is charged its precoded power `2 alpha^2 M / 3`; the other schemes use
/// the constellation energy.
pub fn noise_variance(scheme: Scheme, order: u32, alpha: f64, snr_db: f64) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    let e = match scheme {
        Scheme::OddmThp => BoundParams::e_thp(order, alpha),
        Scheme::OddmSinglePathRef | Scheme::OfdmSingleTap => 2.0 * (order as f64 - 1.0) / 3.0,
    };
    e / snr
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameResult {
    pub bits: u64,
    pub bit_errors: u64,
    pub tx_wrapped: u64,
    pub redraws: u64,
}

/// Per-point state shared by all workers.
#[derive(Debug)]
pub struct PointRunner {
    scheme: Scheme,
    profile: ProfileSpec,
    seeds: SeedPlan,
    kit: Transceiver,
    ofdm: OfdmBaseline,
    thp: ThpConfig,
    noise_var: f64,
}

impl PointRunner {
    pub fn new(cfg: &SimConfig, alpha: f64, snr_db: f64) -> Result<Self> {
        cfg.validate()?;
        let order = cfg.thp.order;
        Ok(PointRunner {
            scheme: cfg.scheme,
            profile: cfg.profile(),
            seeds: cfg.seed,
            kit: Transceiver::new(&cfg.grid, order, cfg.link())?,
            ofdm: OfdmBaseline::new(&cfg.grid),
            thp: ThpConfig::new(order, alpha)?.with_diagnostics(cfg.thp.collect_diagnostics),
            noise_var: noise_variance(cfg.scheme, order, alpha, snr_db),
        })
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    /// Runs frame `index` from its own channel, bit and noise streams.
    pub fn frame(&self, index: u64) -> Result<FrameResult> {
        let grid = self.kit.grid();
        let mut ch_rng = self.seeds.derive_stream(index, StreamTag::CHANNEL);
        let (ch, redraws) = draw_usable_channel(&self.profile, grid, &mut ch_rng)?;
        let mut bit_rng = self.seeds.derive_stream(index, StreamTag::BITS);
        let bits = self.kit.qam.random_bits(grid.frame_len(), &mut bit_rng);
        let mut noise = self.seeds.derive_stream(index, StreamTag::NOISE);

        let (bit_errors, tx_wrapped) = match self.scheme {
            Scheme::OddmThp => {
                let out = run_thp_frame(&self.kit, &bits, &ch, &self.thp, self.noise_var, &mut noise)?;
                (out.bit_errors, out.stats.wrapped_samples)
            }
            Scheme::OddmSinglePathRef => (self.reference_frame(&bits, &ch, &mut noise)?, 0),
            Scheme::OfdmSingleTap => {
                let out = self.ofdm.run_frame(&self.kit.qam, &bits, &ch, self.noise_var, &mut noise)?;
                (out.bit_errors, 0)
            }
        };
        Ok(FrameResult { bits: bits.len() as u64, bit_errors, tx_wrapped, redraws })
    }

    /// ISI-free reference: only the first tap is applied, then derotation
    /// and the `1/|h_1|` equalizer.
    fn reference_frame(&self, bits: &[u8], ch: &ChannelRealization, noise: &mut FrameRng) -> Result<u64> {
        let kit = &self.kit;
        let grid = kit.grid();
        let single = ch.first_tap_only();
        let first = single.first();
        let frame = DDFrame::devectorize(&kit.qam.map_bits(bits)?, grid.m_delay, grid.n_doppler)?;
        let x = add_prefix(&kit.modem.modulate(&frame)?, Prefix::Zero, grid.cp_len);
        let y = kit.link.transmit(&x, &single, grid, &kit.phasors, self.noise_var, noise)?;
        let mag = first.gain.norm();
        let rot: Vec<_> = y
            .body()
            .iter()
            .enumerate()
            .map(|(m, v)| v * kit.phasors.coefficient(first, m as i64).conj() / mag)
            .collect();
        let y_dd = single_tap_equalize(&kit.modem.demodulate_samples(&rot)?, mag);
        Ok(count_bit_errors(bits, &kit.qam.demap(y_dd.as_slice())))
    }
}

fn build_pool(workers: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ConfigError::Sim(format!("worker pool: {e}")).into())
}

#[derive(Default)]
struct Tally {
    frames: u64,
    bits: u64,
    errors: u64,
    tx_wrapped: u64,
    redraws: u64,
    ber_sum: f64,
    ber_sq_sum: f64,
}

impl Tally {
    fn add(&mut self, f: &FrameResult) {
        let b = f.bit_errors as f64 / f.bits as f64;
        self.frames += 1;
        self.bits += f.bits;
        self.errors += f.bit_errors;
        self.tx_wrapped += f.tx_wrapped;
        self.redraws += f.redraws;
        self.ber_sum += b;
        self.ber_sq_sum += b * b;
    }

    fn frame_stderr(&self) -> f64 {
        if self.frames < 2 {
            return f64::NAN;
        }
        let n = self.frames as f64;
        let mean = self.ber_sum / n;
        let var = ((self.ber_sq_sum - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

fn run_point_in(cfg: &SimConfig, alpha: f64, snr_db: f64, pool: &ThreadPool) -> Result<BerRecord> {
    let runner = PointRunner::new(cfg, alpha, snr_db)?;
    let mut t = Tally::default();
    let mut start = 0;
    'outer: while start < cfg.max_frames {
        let end = (start + BATCH_FRAMES).min(cfg.max_frames);
        let batch: Vec<FrameResult> =
            pool.install(|| (start..end).into_par_iter().map(|i| runner.frame(i)).collect::<Result<_>>())?;
        for f in &batch {
            t.add(f);
            if t.errors >= cfg.target_errors {
                break 'outer;
            }
        }
        start = end;
    }

    let order = cfg.thp.order;
    let bounds = match cfg.scheme {
        Scheme::OddmThp => BoundParams::from_snr_db(order, alpha, cfg.profile().first_tap_power(&cfg.grid), snr_db)
            .and_then(|p| theorem1(&p))
            .ok(),
        _ => None,
    };
    let nm = cfg.grid.frame_len() as f64;
    Ok(BerRecord {
        scheme: cfg.scheme,
        channel: cfg.profile().model.as_str().to_string(),
        mod_order: order,
        alpha,
        snr_db,
        frames: t.frames,
        bits: t.bits,
        bit_errors: t.errors,
        wrap_rate_tx: if t.frames == 0 { 0.0 } else { t.tx_wrapped as f64 / (t.frames as f64 * nm) },
        bounds,
        redraws: t.redraws,
        frame_stderr: t.frame_stderr(),
    })
}

/// One `(alpha, SNR)` point. `workers = 0` uses one thread per core.
pub fn run_point(cfg: &SimConfig, alpha: f64, snr_db: f64, workers: usize) -> Result<BerRecord> {
    run_point_in(cfg, alpha, snr_db, &build_pool(workers)?)
}

/// Cross product of `alpha_list` and `snr_db_list`, sorted by `(alpha, snr_db)`.
pub fn sweep(cfg: &SimConfig, workers: usize) -> Result<Vec<BerRecord>> {
    cfg.validate()?;
    let pool = build_pool(workers)?;
    let mut out = Vec::with_capacity(cfg.alpha_list.len() * cfg.snr_db_list.len());
    for &a in &cfg.alpha_list {
        for &s in &cfg.snr_db_list {
            out.push(run_point_in(cfg, a, s, &pool)?);
        }
    }
    sort_records(&mut out);
    Ok(out)
}

/// Every SNR at the first entry of `alpha_list`.
pub fn simulate(cfg: &SimConfig, workers: usize) -> Result<Vec<BerRecord>> {
    let mut one = cfg.clone();
    one.alpha_list.truncate(1);
    sweep(&one, workers)
}

/// Keeps the lowest-BER record per SNR; ties go to the smaller alpha.
pub fn optimize_alpha(records: &[BerRecord]) -> Vec<BerRecord> {
    let mut best: Vec<BerRecord> = Vec::new();
    for r in records {
        match best.iter_mut().find(|b| b.snr_db == r.snr_db && b.scheme == r.scheme) {
            Some(b) => {
                if r.ber() < b.ber() || (r.ber() == b.ber() && r.alpha < b.alpha) {
                    *b = r.clone();
                }
            }
            None => best.push(r.clone()),
        }
    }
    best.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
    best
}
