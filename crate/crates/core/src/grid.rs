//! Delay-Doppler grid geometry, DD frames and time-domain sequences.
//!
//! All indices are 0-based. A DD frame element `(m, k)` lives at vector
//! index `m + k * M`.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, OddmError, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridConfig {
    pub m_delay: usize,
    pub n_doppler: usize,
    pub delta_f: f64,
    pub t_sym: f64,
    pub cp_len: usize,
    pub fc: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    m_delay: usize,
    n_doppler: usize,
    delta_f: f64,
    #[serde(default)]
    t_sym: Option<f64>,
    cp_len: usize,
    #[serde(default = "default_fc")]
    fc: f64,
}

fn default_fc() -> f64 {
    6e9
}

impl TryFrom<RawGrid> for GridConfig {
    type Error = ConfigError;

    fn try_from(r: RawGrid) -> std::result::Result<Self, ConfigError> {
        let g = GridConfig {
            m_delay: r.m_delay,
            n_doppler: r.n_doppler,
            delta_f: r.delta_f,
            t_sym: r.t_sym.unwrap_or(1.0 / r.delta_f),
            cp_len: r.cp_len,
            fc: r.fc,
        };
        g.validate()?;
        Ok(g)
    }
}

impl GridConfig {
    pub fn new(m_delay: usize, n_doppler: usize, delta_f: f64, cp_len: usize) -> Result<Self> {
        let g = GridConfig { m_delay, n_doppler, delta_f, t_sym: 1.0 / delta_f, cp_len, fc: default_fc() };
        g.validate()?;
        Ok(g)
    }

    /// 64 x 16 grid at 15 kHz, the default for Monte Carlo runs.
    pub fn desk() -> Self {
        Self::new(64, 16, 15e3, 8).expect("valid preset")
    }

    /// 512 x 64 grid at 15 kHz.
    pub fn full_scale() -> Self {
        Self::new(512, 64, 15e3, 32).expect("valid preset")
    }

    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        if self.m_delay < 2 || self.n_doppler < 2 {
            return Err(ConfigError::Grid(format!(
                "need M >= 2 and N >= 2, got {} x {}",
                self.m_delay, self.n_doppler
            )));
        }
        if !(self.delta_f > 0.0 && self.delta_f.is_finite()) {
            return Err(ConfigError::Grid("delta_f must be positive".into()));
        }
        if ((self.t_sym * self.delta_f) - 1.0).abs() > 1e-12 {
            return Err(ConfigError::Grid("t_sym must equal 1/delta_f".into()));
        }
        if self.cp_len >= self.m_delay * self.n_doppler {
            return Err(ConfigError::Grid("cp_len must be shorter than the frame".into()));
        }
        Ok(())
    }

    /// Samples per frame, `N * M`.
    pub fn frame_len(&self) -> usize {
        self.m_delay * self.n_doppler
    }

    /// Delay resolution `T / M` in seconds.
    pub fn delay_resolution(&self) -> f64 {
        self.t_sym / self.m_delay as f64
    }

    /// Doppler resolution `1 / (N T)` in Hz.
    pub fn doppler_resolution(&self) -> f64 {
        1.0 / (self.n_doppler as f64 * self.t_sym)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DDFrame {
    m: usize,
    n: usize,
    data: Vec<C64>,
}

impl DDFrame {
    pub fn zeros(m: usize, n: usize) -> Self {
        assert!(m > 0 && n > 0, "empty DD frame");
        DDFrame { m, n, data: vec![C64::new(0.0, 0.0); m * n] }
    }

    pub fn for_grid(grid: &GridConfig) -> Self {
        Self::zeros(grid.m_delay, grid.n_doppler)
    }

    /// Builds a frame from `rows[m][k]` (rows indexed by delay).
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(OddmError::Length { expected: 1, got: 0 });
        }
        let mut f = Self::zeros(m, n);
        for (mi, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(OddmError::Length { expected: n, got: row.len() });
            }
            for (k, &v) in row.iter().enumerate() {
                f.set(mi, k, v);
            }
        }
        Ok(f)
    }

    pub fn devectorize(v: &[C64], m: usize, n: usize) -> Result<Self> {
        if v.len() != m * n || m == 0 {
            return Err(OddmError::Length { expected: m * n, got: v.len() });
        }
        Ok(DDFrame { m, n, data: v.to_vec() })
    }

    pub fn vectorize(&self) -> Vec<C64> {
        self.data.clone()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn m_delay(&self) -> usize {
        self.m
    }

    pub fn n_doppler(&self) -> usize {
        self.n
    }

    pub fn matches(&self, grid: &GridConfig) -> bool {
        self.m == grid.m_delay && self.n == grid.n_doppler
    }

    #[inline]
    pub fn get(&self, m: usize, k: usize) -> C64 {
        self.data[m + k * self.m]
    }

    #[inline]
    pub fn set(&mut self, m: usize, k: usize, v: C64) {
        self.data[m + k * self.m] = v;
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixKind {
    Plain,
    Cyclic(usize),
    Zero(usize),
}

impl PrefixKind {
    pub fn len(&self) -> usize {
        match *self {
            PrefixKind::Plain => 0,
            PrefixKind::Cyclic(l) | PrefixKind::Zero(l) => l,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A serialized time-domain sequence, optionally carrying a prefix.
/// Sample `i` of the body is stored at index `prefix_len + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSequence {
    pub samples: Vec<C64>,
    pub kind: PrefixKind,
}

impl TimeSequence {
    pub fn plain(samples: Vec<C64>) -> Self {
        TimeSequence { samples, kind: PrefixKind::Plain }
    }

    pub fn prefix_len(&self) -> usize {
        self.kind.len()
    }

    pub fn body(&self) -> &[C64] {
        &self.samples[self.prefix_len()..]
    }

    pub fn body_len(&self) -> usize {
        self.samples.len() - self.prefix_len()
    }

    pub fn energy(&self) -> f64 {
        self.body().iter().map(|c| c.norm_sqr()).sum()
    }
}
