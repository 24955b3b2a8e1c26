//! Sparse delay-Doppler channel matrix for CP-prefixed ODDM.

use crate::channel::{ChannelRealization, DopplerPhasors};
use crate::grid::GridConfig;
use crate::C64;

/// Row `m' + k'M` holds, for each tap, column `[m'-l]_M + [k'-k]_N M` with
/// value `h exp(j 2 pi k (m'-l) / NM)`, times `exp(-j 2 pi [k'-k]_N / N)` when
/// `m' < l`. Taps that land on the same column are summed.
#[derive(Debug, Clone, PartialEq)]
pub struct DDChannelMatrix {
    size: usize,
    rows: Vec<Vec<(usize, C64)>>,
}

impl DDChannelMatrix {
    pub fn build(ch: &ChannelRealization, grid: &GridConfig) -> Self {
        let (m_len, n_len) = (grid.m_delay as i64, grid.n_doppler as i64);
        let ph = DopplerPhasors::new(grid);
        let mut rows = Vec::with_capacity(grid.frame_len());
        for kp in 0..n_len {
            for mp in 0..m_len {
                let mut row: Vec<(usize, C64)> = Vec::with_capacity(ch.num_taps());
                for tap in &ch.taps {
                    let l = tap.delay_idx as i64;
                    let kk = (kp - tap.doppler_idx).rem_euclid(n_len);
                    let col = ((mp - l).rem_euclid(m_len) + kk * m_len) as usize;
                    let mut v = tap.gain * ph.phasor(tap.doppler_idx, mp - l);
                    if mp < l {
                        v *= ph.phasor(-kk * m_len, 1);
                    }
                    match row.iter_mut().find(|(c, _)| *c == col) {
                        Some(e) => e.1 += v,
                        None => row.push((col, v)),
                    }
                }
                rows.push(row);
            }
        }
        DDChannelMatrix { size: grid.frame_len(), rows }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn row(&self, r: usize) -> &[(usize, C64)] {
        &self.rows[r]
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.size);
        self.rows.iter().map(|row| row.iter().map(|&(c, v)| v * x[c]).sum()).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        let mut d = vec![vec![C64::new(0.0, 0.0); self.size]; self.size];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                d[r][c] += v;
            }
        }
        d
    }
}
