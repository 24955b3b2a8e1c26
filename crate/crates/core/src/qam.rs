//! Square QAM with per-axis Gray labels.
//!
//! The first half of each bit group labels the real axis, the second half the
//! imaginary axis. On each axis the all-zero label sits on the outermost
//! positive level and labels follow the reflected Gray sequence downwards,
//! e.g. 4-QAM `00 -> 1+1j`, `11 -> -1-1j`.

use rand::Rng;

use crate::error::{ConfigError, OddmError, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Constellation {
    order: u32,
    side: u32,
    bits_per_axis: u32,
}

#[inline]
fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

#[inline]
fn gray_inverse(mut g: u32) -> u32 {
    let mut i = g;
    while g > 1 {
        g >>= 1;
        i ^= g;
    }
    i
}

impl Constellation {
    pub fn new(order: u32) -> std::result::Result<Self, ConfigError> {
        if !matches!(order, 4 | 16 | 64) {
            return Err(ConfigError::UnsupportedOrder(order));
        }
        let bits = order.trailing_zeros();
        Ok(Constellation { order, side: 1 << (bits / 2), bits_per_axis: bits / 2 })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis as usize
    }

    /// Mean symbol energy `2(M-1)/3`.
    pub fn energy(&self) -> f64 {
        2.0 * (self.order as f64 - 1.0) / 3.0
    }

    /// Amplitude levels from the top, `sqrt(M)-1, sqrt(M)-3, ...`.
    fn level(&self, idx: u32) -> f64 {
        (self.side - 1) as f64 - 2.0 * idx as f64
    }

    fn axis_label_to_level(&self, label: u32) -> f64 {
        self.level(gray_inverse(label))
    }

    fn axis_decide(&self, x: f64) -> u32 {
        let top = (self.side - 1) as f64;
        let idx = ((top - x) / 2.0).round();
        gray(idx.clamp(0.0, (self.side - 1) as f64) as u32)
    }

    fn read_label(bits: &[u8]) -> u32 {
        bits.iter().fold(0, |acc, &b| (acc << 1) | u32::from(b & 1))
    }

    fn write_label(label: u32, width: u32, out: &mut Vec<u8>) {
        for s in (0..width).rev() {
            out.push(((label >> s) & 1) as u8);
        }
    }

    pub fn map_bits(&self, bits: &[u8]) -> Result<Vec<C64>> {
        let b = self.bits_per_symbol();
        if !bits.len().is_multiple_of(b) {
            return Err(OddmError::BitCount(bits.len(), b));
        }
        let h = self.bits_per_axis as usize;
        Ok(bits
            .chunks_exact(b)
            .map(|g| {
                C64::new(
                    self.axis_label_to_level(Self::read_label(&g[..h])),
                    self.axis_label_to_level(Self::read_label(&g[h..])),
                )
            })
            .collect())
    }

    /// Hard per-axis nearest-level decision.
    pub fn demap(&self, symbols: &[C64]) -> Vec<u8> {
        let mut out = Vec::with_capacity(symbols.len() * self.bits_per_symbol());
        for s in symbols {
            Self::write_label(self.axis_decide(s.re), self.bits_per_axis, &mut out);
            Self::write_label(self.axis_decide(s.im), self.bits_per_axis, &mut out);
        }
        out
    }

    pub fn points(&self) -> Vec<C64> {
        let n = self.order as usize;
        let mut bits = Vec::with_capacity(n * self.bits_per_symbol());
        for s in 0..self.order {
            Self::write_label(s, 2 * self.bits_per_axis, &mut bits);
        }
        self.map_bits(&bits).expect("whole symbols")
    }

    pub fn random_bits<R: Rng + ?Sized>(&self, n_symbols: usize, rng: &mut R) -> Vec<u8> {
        (0..n_symbols * self.bits_per_symbol()).map(|_| rng.random::<bool>() as u8).collect()
    }
}

pub fn count_bit_errors(a: &[u8], b: &[u8]) -> u64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::{SeedPlan, StreamTag};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn qam4_labels() {
        let q = Constellation::new(4).unwrap();
        let s = q.map_bits(&[0, 0, 0, 1, 1, 0, 1, 1]).unwrap();
        assert_eq!(s, vec![c(1.0, 1.0), c(1.0, -1.0), c(-1.0, 1.0), c(-1.0, -1.0)]);
    }

    #[test]
    fn qam16_zero_label_is_top_corner() {
        let q = Constellation::new(16).unwrap();
        assert_eq!(q.map_bits(&[0, 0, 0, 0]).unwrap(), vec![c(3.0, 3.0)]);
    }

    #[test]
    fn demap_nearest_and_saturating() {
        let q4 = Constellation::new(4).unwrap();
        assert_eq!(q4.demap(&[c(0.1, -2.3)]), vec![0, 1]);
        let q16 = Constellation::new(16).unwrap();
        assert_eq!(q16.demap(&[c(10.0, 10.0)]), vec![0, 0, 0, 0]);
        assert_eq!(q16.demap(&[c(-10.0, 0.2)]), q16.demap(&[c(-3.0, 1.0)]));
    }

    #[test]
    fn energies() {
        assert_eq!(Constellation::new(4).unwrap().energy(), 2.0);
        assert_eq!(Constellation::new(16).unwrap().energy(), 10.0);
        assert_eq!(Constellation::new(64).unwrap().energy(), 42.0);
        for o in [2, 8, 32, 256, 0] {
            assert_eq!(Constellation::new(o), Err(ConfigError::UnsupportedOrder(o)));
        }
    }

    #[test]
    fn point_set_mean_energy_and_spacing() {
        for o in [4u32, 16, 64] {
            let q = Constellation::new(o).unwrap();
            let pts = q.points();
            let mean: f64 = pts.iter().map(|p| p.norm_sqr()).sum::<f64>() / o as f64;
            assert!((mean - q.energy()).abs() < 1e-12);
            let mut re: Vec<f64> = pts.iter().map(|p| p.re).collect();
            re.sort_by(f64::total_cmp);
            re.dedup();
            assert!(re.windows(2).all(|w| (w[1] - w[0] - 2.0).abs() < 1e-12));
            let mut uniq = pts.clone();
            uniq.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            uniq.dedup();
            assert_eq!(uniq.len(), o as usize);
        }
    }

    #[test]
    fn adjacent_levels_differ_by_one_bit() {
        for o in [4u32, 16, 64] {
            let q = Constellation::new(o).unwrap();
            let side = q.side as i32;
            for i in 0..side - 1 {
                let lo = (side - 1 - 2 * i) as f64;
                let hi = lo - 2.0;
                let a = q.demap(&[c(lo, 0.0)]);
                let b = q.demap(&[c(hi, 0.0)]);
                assert_eq!(count_bit_errors(&a, &b), 1, "order {o} level {lo}");
            }
        }
    }

    #[test]
    fn rejects_partial_symbol() {
        let q = Constellation::new(16).unwrap();
        assert!(matches!(q.map_bits(&[0, 1, 1]), Err(OddmError::BitCount(3, 4))));
    }

    #[test]
    fn empirical_energy_within_one_percent() {
        let mut rng = SeedPlan::new(5).derive_stream(0, StreamTag::BITS);
        for o in [4u32, 16, 64] {
            let q = Constellation::new(o).unwrap();
            let s = q.map_bits(&q.random_bits(100_000, &mut rng)).unwrap();
            let e = s.iter().map(|p| p.norm_sqr()).sum::<f64>() / s.len() as f64;
            assert!((e / q.energy() - 1.0).abs() < 0.01, "order {o}: {e}");
        }
    }

    #[test]
    fn roundtrip_10k_blocks() {
        let mut rng = SeedPlan::new(6).derive_stream(0, StreamTag::BITS);
        for o in [4u32, 16, 64] {
            let q = Constellation::new(o).unwrap();
            let bits = q.random_bits(10_000, &mut rng);
            assert_eq!(q.demap(&q.map_bits(&bits).unwrap()), bits);
        }
    }

    proptest! {
        #[test]
        fn small_perturbation_keeps_bits(sym in 0u32..64, dr in -0.99f64..0.99, di in -0.99f64..0.99) {
            let q = Constellation::new(64).unwrap();
            let p = q.points()[sym as usize];
            prop_assert_eq!(q.demap(&[p + c(dr, di)]), q.demap(&[p]));
        }
    }
}
