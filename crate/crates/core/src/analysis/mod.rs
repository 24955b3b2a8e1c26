//! Closed-form BER lower bounds for THP-ODDM over a Rayleigh first tap.
//!
//! Three loss mechanisms are bounded separately and combined by taking the
//! maximum: power loss (PL), modulo noise loss (MNL) and modulo signal loss
//! (MSL). Expectations over `|h_1|` use the Rayleigh closed form of
//! [`rayleigh_pairwise`].

mod qam16;
mod qam4;

pub use qam16::{
    mnl_16qam, mnl_16qam_cases, msl_16qam, power_loss_16qam, power_loss_16qam_noise_form, theorem1_16qam, Mnl16Cases,
};
pub use qam4::{
    mnl_4qam, mnl_4qam_series, msl_4qam, power_loss_4qam, power_loss_4qam_noise_form, power_loss_taylor_4qam,
    theorem1_4qam,
};

use std::fmt;

use crate::error::ConfigError;

pub const DEFAULT_TRUNC: usize = 10;

/// Terms of the wrap-variance series smaller than this are treated as zero.
pub const TAIL_TOL: f64 = 1e-15;

/// Gaussian tail `Q(x) = erfc(x / sqrt 2) / 2`.
pub fn q_func(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `1 - sqrt(v)` for `v = s a^2 / (w + s a^2)`, computed without cancellation.
fn one_minus_sqrt_ratio(a: f64, sigma_h1_sq: f64, sigma_w_sq: f64) -> f64 {
    let sa = sigma_h1_sq * a * a;
    let den = sigma_w_sq + sa;
    (sigma_w_sq / den) / (1.0 + (sa / den).sqrt())
}

/// `E_{h_1}[Q(|h_1| a / sqrt(sigma_w^2 / 2))]` for Rayleigh `h_1` with
/// `E|h_1|^2 = sigma_h1_sq`. Negative `a` returns `1 - value(|a|)`.
pub fn rayleigh_pairwise(a: f64, sigma_h1_sq: f64, sigma_w_sq: f64) -> f64 {
    let v = 0.5 * one_minus_sqrt_ratio(a.abs(), sigma_h1_sq, sigma_w_sq);
    if a < 0.0 {
        1.0 - v
    } else {
        v
    }
}

/// Wrap-energy series `sum_eta 8 eta^2 alpha^2 M (Q(c(2eta-1)alpha) - Q(c(2eta+1)alpha))`
/// with `c = sqrt(3M/(M-1))`, summed over `eta` in `[-h, h]`. The range is
/// widened past `h` until the next pair of terms is below [`TAIL_TOL`].
pub fn msl_variance(order: u32, alpha: f64, h: usize) -> f64 {
    let m = order as f64;
    let c = (3.0 * m / (m - 1.0)).sqrt();
    let term = |eta: f64| {
        8.0 * eta
            * eta
            * alpha
            * alpha
            * m
            * (q_func(c * (2.0 * eta - 1.0) * alpha) - q_func(c * (2.0 * eta + 1.0) * alpha))
    };
    let mut sum = 0.0;
    let mut eta = 1usize;
    loop {
        // the series is even in eta
        let t = 2.0 * term(eta as f64);
        if eta > h && t < TAIL_TOL {
            break;
        }
        sum += t;
        eta += 1;
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub order: u32,
    pub alpha: f64,
    pub sigma_h1_sq: f64,
    pub sigma_w_sq: f64,
    pub snr: f64,
    pub trunc: usize,
}

impl BoundParams {
    /// Precoded power `2 alpha^2 M / 3`, equal to `alpha^2 E_XDD + 2 alpha^2 / 3`.
    pub fn e_thp(order: u32, alpha: f64) -> f64 {
        let e_xdd = 2.0 * (order as f64 - 1.0) / 3.0;
        alpha * alpha * e_xdd + 2.0 / 3.0 * alpha * alpha
    }

    pub fn from_snr(order: u32, alpha: f64, sigma_h1_sq: f64, snr: f64) -> Result<Self, ConfigError> {
        let p = BoundParams {
            order,
            alpha,
            sigma_h1_sq,
            sigma_w_sq: Self::e_thp(order, alpha) / snr,
            snr,
            trunc: DEFAULT_TRUNC,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_snr_db(order: u32, alpha: f64, sigma_h1_sq: f64, snr_db: f64) -> Result<Self, ConfigError> {
        Self::from_snr(order, alpha, sigma_h1_sq, 10f64.powf(snr_db / 10.0))
    }

    pub fn from_noise(order: u32, alpha: f64, sigma_h1_sq: f64, sigma_w_sq: f64) -> Result<Self, ConfigError> {
        let p = BoundParams {
            order,
            alpha,
            sigma_h1_sq,
            sigma_w_sq,
            snr: Self::e_thp(order, alpha) / sigma_w_sq,
            trunc: DEFAULT_TRUNC,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_trunc(mut self, h: usize) -> Result<Self, ConfigError> {
        self.trunc = h;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !matches!(self.order, 4 | 16) {
            return Err(ConfigError::UnsupportedOrder(self.order));
        }
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.alpha) || !pos(self.sigma_h1_sq) || !pos(self.sigma_w_sq) || !pos(self.snr) {
            return Err(ConfigError::Domain("alpha, sigma_h1_sq, sigma_w_sq and snr must be positive".into()));
        }
        if self.trunc < 2 {
            return Err(ConfigError::Domain("truncation must be at least 2".into()));
        }
        let want = Self::e_thp(self.order, self.alpha) / self.snr;
        if ((self.sigma_w_sq - want) / want).abs() > 1e-12 {
            return Err(ConfigError::Domain("sigma_w_sq inconsistent with snr".into()));
        }
        Ok(())
    }

    pub fn e_xdd(&self) -> f64 {
        2.0 * (self.order as f64 - 1.0) / 3.0
    }

    pub fn modulus(&self) -> f64 {
        2.0 * self.alpha * (self.order as f64).sqrt()
    }

    pub(crate) fn rp(&self, a: f64) -> f64 {
        rayleigh_pairwise(a, self.sigma_h1_sq, self.sigma_w_sq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    PowerLoss,
    ModuloNoiseLoss,
    ModuloSignalLoss,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::PowerLoss => "pl",
            BoundKind::ModuloNoiseLoss => "mnl",
            BoundKind::ModuloSignalLoss => "msl",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1 {
    pub pl: f64,
    pub mnl: f64,
    pub msl: f64,
}

impl Theorem1 {
    pub fn max(&self) -> f64 {
        self.pl.max(self.mnl).max(self.msl)
    }

    /// Largest component; ties go to the earlier of PL, MNL, MSL.
    pub fn dominant(&self) -> BoundKind {
        let m = self.max();
        if self.pl == m {
            BoundKind::PowerLoss
        } else if self.mnl == m {
            BoundKind::ModuloNoiseLoss
        } else {
            BoundKind::ModuloSignalLoss
        }
    }
}

/// Combined lower bound, the largest of PL, MNL and MSL, for the supported orders.
pub fn theorem1(p: &BoundParams) -> Result<Theorem1, ConfigError> {
    match p.order {
        4 => theorem1_4qam(p),
        16 => Ok(theorem1_16qam(p)),
        o => Err(ConfigError::UnsupportedOrder(o)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn q_reference_values() {
        assert_eq!(q_func(0.0), 0.5);
        // high-precision references
        let refs = [
            (2.0, 0.022750131948179207),
            (1.0, 0.15865525393145705),
            (6.0, 9.865876450376981e-10),
            (8.0, 6.220960574271784e-16),
            (-3.0, 0.9986501019683699),
        ];
        for (x, want) in refs {
            assert!(((q_func(x) - want) / want).abs() < 1e-14, "Q({x}) = {}", q_func(x));
        }
    }

    #[test]
    fn pairwise_examples() {
        let v = rayleigh_pairwise(1.0, 1.0, 1.0);
        assert!((v - 0.5 * (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
        assert!((v - 0.146446609).abs() < 1e-9);
        assert_eq!(rayleigh_pairwise(0.0, 1.0, 1.0), 0.5);
        assert!(rayleigh_pairwise(1.0, 1.0, 1e-300) < 1e-299);
        assert!((rayleigh_pairwise(-2.0, 0.7, 0.3) - (1.0 - rayleigh_pairwise(2.0, 0.7, 0.3))).abs() < 1e-15);
    }

    #[test]
    fn msl_variance_reference() {
        // 2 * 32 * (Q(2) - Q(6)) plus negligible outer terms
        let v = msl_variance(4, 1.0, 8);
        assert!((v - 1.4560086341082971).abs() < 1e-12, "{v}");
        assert!(msl_variance(4, 50.0, 2) == 0.0);
        assert_eq!(msl_variance(4, 1.0, 2), msl_variance(4, 1.0, 10));
    }

    #[test]
    fn msl_variance_peaks_at_small_alpha() {
        assert!(msl_variance(4, 0.6, 10) > msl_variance(4, 0.3, 10));
        assert!(msl_variance(4, 0.6, 10) > msl_variance(4, 0.8, 10));
        // everything folds as alpha -> 0, recovering the symbol energy
        assert!((msl_variance(4, 1e-3, 10) - 2.0).abs() < 1e-3);
    }

    #[test]
    fn params_consistency() {
        let p = BoundParams::from_snr(4, 2.0, 1.0, 100.0).unwrap();
        assert!((p.sigma_w_sq - (4.0 * 2.0 + 2.0 / 3.0 * 4.0) / 100.0).abs() < 1e-15);
        let q = BoundParams::from_noise(16, 1.3, 0.5, p.sigma_w_sq).unwrap();
        assert!(q.validate().is_ok());
        let mut bad = p;
        bad.sigma_w_sq *= 1.01;
        assert!(bad.validate().is_err());
        assert!(p.with_trunc(1).is_err());
        assert!(BoundParams::from_snr(64, 1.0, 1.0, 10.0).is_err());
        assert!(BoundParams::from_snr(4, -1.0, 1.0, 10.0).is_err());
    }

    #[test]
    fn theorem1_dispatch() {
        let p = BoundParams::from_snr_db(4, 2.0, 1.0, 20.0).unwrap();
        let t = theorem1(&p).unwrap();
        assert!(t.max() >= t.pl && t.max() >= t.mnl && t.max() >= t.msl);
        let mut p64 = p;
        p64.order = 64;
        assert!(theorem1(&p64).is_err());
    }

    proptest! {
        #[test]
        fn q_symmetry(x in -8.0f64..8.0) {
            prop_assert!((q_func(-x) - (1.0 - q_func(x))).abs() < 1e-15);
        }

        #[test]
        // below about alpha = 0.7 the series rises with alpha before it falls
        fn msl_variance_decreasing(a in 0.8f64..3.0, d in 0.01f64..0.5) {
            for o in [4u32, 16] {
                let v1 = msl_variance(o, a, 10);
                let v2 = msl_variance(o, a + d, 10);
                prop_assert!(v1 >= 0.0);
                prop_assert!(v2 < v1 || v1 == 0.0);
            }
        }
    }
}
