use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use oddm_bench::fixture;
use oddm_core::analysis::theorem1;
use oddm_core::channel::propagate;
use oddm_core::modem::{add_prefix, Prefix};
use oddm_core::thp::{mod_k, precode_with, run_thp_frame};
use oddm_core::{BoundParams, GridConfig, SeedPlan, StreamTag, ThpConfig};

fn grids() -> [(&'static str, GridConfig); 2] {
    [("64x16", GridConfig::desk()), ("512x64", GridConfig::full_scale())]
}

fn modem(c: &mut Criterion) {
    let mut g = c.benchmark_group("modem");
    for (name, grid) in grids() {
        let f = fixture(grid);
        g.bench_with_input(BenchmarkId::new("modulate", name), &f, |b, f| {
            b.iter(|| f.kit.modem.modulate(black_box(&f.frame)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("demodulate", name), &f, |b, f| {
            b.iter(|| f.kit.modem.demodulate(black_box(&f.time)).unwrap())
        });
    }
    g.finish();
}

fn channel(c: &mut Criterion) {
    let mut g = c.benchmark_group("channel");
    for (name, grid) in grids() {
        let f = fixture(grid);
        let x = add_prefix(&f.time, Prefix::Cyclic, grid.cp_len);
        g.bench_with_input(BenchmarkId::new("propagate", name), &f, |b, f| {
            b.iter(|| propagate(black_box(&x), &f.channel, &grid, &f.kit.phasors).unwrap())
        });
    }
    g.finish();
}

fn thp(c: &mut Criterion) {
    let mut g = c.benchmark_group("thp");
    let cfg = ThpConfig::new(4, 1.4).unwrap();
    for (name, grid) in grids() {
        let f = fixture(grid);
        g.bench_with_input(BenchmarkId::new("precode", name), &f, |b, f| {
            b.iter(|| precode_with(black_box(&f.time), &f.channel, &cfg, &grid, &f.kit.phasors, mod_k).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("frame", name), &f, |b, f| {
            let mut rng = SeedPlan::new(1).derive_stream(0, StreamTag::NOISE);
            b.iter(|| run_thp_frame(&f.kit, black_box(&f.bits), &f.channel, &cfg, 1e-3, &mut rng).unwrap())
        });
    }
    g.finish();
}

fn bounds(c: &mut Criterion) {
    let mut g = c.benchmark_group("bounds");
    for order in [4, 16] {
        let p = BoundParams::from_snr_db(order, 1.4, 0.902, 30.0).unwrap();
        g.bench_with_input(BenchmarkId::new("theorem1", order), &p, |b, p| b.iter(|| theorem1(black_box(p)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, modem, channel, thp, bounds);
criterion_main!(benches);
