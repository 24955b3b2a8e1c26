//! End-to-end behaviour of the simulator through the public API.

use std::path::Path;

use proptest::prelude::*;

use oddm_core::sim::{results_csv, run_point, sweep, ChannelChoice, ChannelPreset, RESULTS_HEADER};
use oddm_core::thp::mod_k;
use oddm_core::{Fidelity, GridConfig, Scheme, SeedPlan, SimConfig, C64};

fn shipped(name: &str) -> SimConfig {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    SimConfig::from_path(&p).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn shipped_configs_load() {
    for name in ["eva_desk.json", "hsr_thp.json", "hsr_ofdm.json", "eva_full_scale.json", "waveform_eva.json"] {
        shipped(name);
    }
    assert_eq!(shipped("eva_desk.json"), SimConfig::desk_default());
    assert_eq!(shipped("waveform_eva.json").fidelity, Fidelity::Waveform);
}

#[test]
fn thp_ber_falls_with_snr_on_eva() {
    let cfg = SimConfig {
        snr_db_list: vec![10.0, 20.0, 30.0, 40.0, 45.0],
        alpha_list: vec![2.0],
        max_frames: 4000,
        target_errors: 300,
        seed: SeedPlan::new(11),
        ..SimConfig::desk_default()
    };
    let rs = sweep(&cfg, 0).unwrap();
    let ber: Vec<f64> = rs.iter().map(|r| r.ber()).collect();
    for (w, r) in ber.windows(2).zip(rs.windows(2)) {
        let sd =
            |x: &oddm_core::BerRecord| if x.frame_stderr.is_finite() { x.frame_stderr } else { x.binomial_stderr() };
        let sd = sd(&r[0]).hypot(sd(&r[1]));
        assert!(w[1] < w[0] + 3.0 * sd, "{ber:?}");
    }
    assert!(ber[0] > 5.0 * ber[4], "{ber:?}");
}

#[test]
fn measured_ber_respects_bound_on_eva() {
    let cfg = SimConfig {
        snr_db_list: vec![20.0, 30.0],
        alpha_list: vec![0.8, 1.2, 1.6, 2.0, 2.4, 2.8],
        max_frames: 3000,
        target_errors: 500,
        seed: SeedPlan::new(12),
        ..SimConfig::desk_default()
    };
    for r in sweep(&cfg, 0).unwrap() {
        let sd = r.frame_stderr.max(r.binomial_stderr());
        assert!(
            r.ber() >= r.bound_max() - 3.0 * sd,
            "alpha {} snr {}: {} < {}",
            r.alpha,
            r.snr_db,
            r.ber(),
            r.bound_max()
        );
    }
}

#[test]
fn waveform_fidelity_tracks_discrete() {
    let mut cfg = shipped("waveform_eva.json");
    cfg.max_frames = 60;
    cfg.snr_db_list = vec![25.0];
    let wave = run_point(&cfg, 1.4, 25.0, 0).unwrap();
    cfg.fidelity = Fidelity::Discrete;
    let disc = run_point(&cfg, 1.4, 25.0, 0).unwrap();
    let ratio = wave.ber() / disc.ber();
    assert!((0.7..1.4).contains(&ratio), "waveform {} discrete {}", wave.ber(), disc.ber());
}

#[test]
fn ofdm_floor_and_lti_case() {
    let mut cfg = SimConfig {
        scheme: Scheme::OfdmSingleTap,
        snr_db_list: vec![10.0, 20.0, 30.0, 40.0, 45.0],
        alpha_list: vec![1.0],
        max_frames: 20_000,
        target_errors: 3000,
        seed: SeedPlan::new(13),
        ..SimConfig::desk_default()
    };
    let rs = sweep(&cfg, 0).unwrap();
    assert!(rs[4].ber() / rs[2].ber() > 0.5, "EVA floor: {} vs {}", rs[4].ber(), rs[2].ber());

    let mut lti = cfg.profile();
    lti.fmax_hz = 0.0;
    cfg.channel = ChannelChoice::Custom(lti);
    cfg.snr_db_list.truncate(4);
    cfg.max_frames = 40_000;
    let ber: Vec<f64> = sweep(&cfg, 0).unwrap().iter().map(|r| r.ber()).collect();
    assert!(ber.windows(2).all(|w| w[1] < w[0]), "{ber:?}");
}

#[test]
fn single_path_preset_is_ber_free_without_noise() {
    let cfg = SimConfig {
        channel: ChannelChoice::Preset(ChannelPreset::SinglePath),
        max_frames: 10,
        target_errors: 100,
        ..SimConfig::desk_default()
    };
    let r = run_point(&cfg, 3.0, 200.0, 0).unwrap();
    assert_eq!((r.frames, r.bit_errors), (10, 0));
}

#[test]
fn csv_contract() {
    let cfg = SimConfig {
        grid: GridConfig::new(16, 8, 15e3, 4).unwrap(),
        snr_db_list: vec![15.0],
        alpha_list: vec![1.0, 2.0],
        max_frames: 5,
        target_errors: 100,
        ..SimConfig::desk_default()
    };
    let text = results_csv(&sweep(&cfg, 1).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(RESULTS_HEADER));
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f.len(), 15);
        let (bits, errs, ber): (f64, f64, f64) = (f[6].parse().unwrap(), f[7].parse().unwrap(), f[8].parse().unwrap());
        assert!((ber - errs / bits).abs() <= 1e-9 * ber.max(1e-300));
        let b: Vec<f64> = f[10..13].iter().map(|s| s.parse().unwrap()).collect();
        let max: f64 = f[13].parse().unwrap();
        assert_eq!(max, b.iter().cloned().fold(f64::MIN, f64::max));
    }
}

proptest! {
    #[test]
    fn mod_k_reconstructs(re in -1e3f64..1e3, im in -1e3f64..1e3, k in 0.1f64..20.0) {
        let w = mod_k(C64::new(re, im), k);
        let back = w.value + C64::new(w.p as f64 * k, w.q as f64 * k);
        prop_assert!((back - C64::new(re, im)).norm() < 1e-9);
        prop_assert!(w.value.re >= -k / 2.0 && w.value.re < k / 2.0);
        prop_assert!(w.value.im >= -k / 2.0 && w.value.im < k / 2.0);
    }
}
