use super::{msl_variance, q_func, BoundParams, Theorem1};
use crate::error::ConfigError;

fn pl_ratio(p: &BoundParams) -> f64 {
    3.0 * p.sigma_h1_sq * p.snr / (4.0 * p.alpha * p.alpha)
}

/// Power-loss bound, SNR form: `(1 - sqrt(x / (2 + x))) / 2` with
/// `x = 3 sigma_h1^2 Omega / (4 alpha^2)`.
pub fn power_loss_4qam(p: &BoundParams) -> f64 {
    let x = pl_ratio(p);
    let r = x / (2.0 + x);
    0.5 * (2.0 / (2.0 + x)) / (1.0 + r.sqrt())
}

/// Power-loss bound written as the Rayleigh pairwise term at unit distance.
pub fn power_loss_4qam_noise_form(p: &BoundParams) -> f64 {
    p.rp(1.0)
}

/// High-SNR expansion `2 alpha^2 / (3 sigma_h1^2 Omega)`.
pub fn power_loss_taylor_4qam(p: &BoundParams) -> f64 {
    2.0 * p.alpha * p.alpha / (3.0 * p.sigma_h1_sq * p.snr)
}

/// Two-term modulo-noise-loss bound. Needs `alpha > 1/2`.
pub fn mnl_4qam(p: &BoundParams) -> Result<f64, ConfigError> {
    if p.alpha <= 0.5 {
        return Err(ConfigError::Domain(format!("modulo noise loss needs alpha > 1/2, got {}", p.alpha)));
    }
    let a = p.alpha;
    // sqrt-ratio terms rewritten through rp(c) = (1 - sqrt(...)) / 2
    Ok(p.rp(1.0) - p.rp(2.0 * a + 1.0) + p.rp(2.0 * a - 1.0) - p.rp(4.0 * a - 1.0))
}

/// Series form `sum_{eta=-H..H} |rp((eta - 1/2) K - 1) - rp(eta K - 1)|`.
pub fn mnl_4qam_series(p: &BoundParams) -> f64 {
    let k = p.modulus();
    let h = p.trunc as i64;
    (-h..=h)
        .map(|eta| {
            let e = eta as f64;
            (p.rp((e - 0.5) * k - 1.0) - p.rp(e * k - 1.0)).abs()
        })
        .sum()
}

/// Modulo-signal-loss bound `Q(sqrt(2 / Var))`; zero when no wraps remain.
pub fn msl_4qam(alpha: f64, h: usize) -> f64 {
    let v = msl_variance(4, alpha, h);
    if v == 0.0 {
        0.0
    } else {
        q_func((2.0 / v).sqrt())
    }
}

pub fn theorem1_4qam(p: &BoundParams) -> Result<Theorem1, ConfigError> {
    Ok(Theorem1 { pl: power_loss_4qam(p), mnl: mnl_4qam(p)?, msl: msl_4qam(p.alpha, p.trunc) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{rayleigh_pairwise, BoundKind};
    use proptest::prelude::*;

    fn params(alpha: f64, sh: f64, snr: f64) -> BoundParams {
        BoundParams::from_snr(4, alpha, sh, snr).unwrap()
    }

    #[test]
    fn power_loss_reference() {
        let p = params(2.0, 1.0, 100.0);
        let want = 0.5 * (1.0 - (18.75f64 / 20.75).sqrt());
        assert!((power_loss_4qam(&p) - want).abs() < 1e-15);
        assert!((power_loss_4qam(&p) - 0.024706).abs() < 1e-5);
        assert!(power_loss_4qam(&params(2.0, 1.0, 1e15)) < 1e-14);
    }

    #[test]
    fn power_loss_forms_agree() {
        for &(a, sh, snr) in &[(0.7, 1.0, 10.0), (2.0, 0.9, 1e3), (3.0, 0.3, 31.6), (1.2, 2.0, 1e5)] {
            let p = params(a, sh, snr);
            assert!((power_loss_4qam(&p) - power_loss_4qam_noise_form(&p)).abs() < 1e-12);
        }
    }

    #[test]
    fn taylor_form() {
        let p = params(1.0, 1.0, 1e4);
        assert!((power_loss_taylor_4qam(&p) - 2.0 / 3e4).abs() < 1e-18);
        let p2 = params(2.0, 1.0, 1e4);
        assert!((power_loss_taylor_4qam(&p2) / power_loss_taylor_4qam(&p) - 4.0).abs() < 1e-12);
        for snr in [1e3, 1e4, 1e6, 1e8] {
            let p = params(1.5, 0.8, snr);
            let x = 3.0 * 0.8 * snr / (4.0 * 2.25);
            let ratio = power_loss_taylor_4qam(&p) / power_loss_4qam(&p);
            if x > 100.0 {
                assert!((ratio - 1.0).abs() < 0.1);
            }
            if snr >= 1e8 {
                assert!((ratio - 1.0).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn mnl_large_alpha_limit() {
        for &(sh, sw) in &[(1.0, 0.1), (0.9, 0.02), (0.4, 1.3), (2.0, 1e-3)] {
            let p = BoundParams::from_noise(4, 1e6, sh, sw).unwrap();
            let limit = 0.5 - 0.5 * (sh / (sw + sh)).sqrt();
            let v = mnl_4qam(&p).unwrap();
            assert!((v - limit).abs() < 1e-10);
            assert!((v - rayleigh_pairwise(1.0, sh, sw)).abs() < 1e-10);
        }
    }

    #[test]
    fn mnl_domain_and_noiseless() {
        assert!(mnl_4qam(&params(0.5, 1.0, 100.0)).is_err());
        let p = BoundParams::from_noise(4, 2.0, 1.0, 1e-30).unwrap();
        assert!(mnl_4qam(&p).unwrap() < 1e-29);
    }

    #[test]
    fn series_contains_closed_form() {
        // the eta = 0 and eta = 1 terms are exactly the closed form
        for &(a, snr) in &[(1.0, 10.0), (2.0, 1e3), (3.0, 1e2)] {
            let p = params(a, 1.0, snr);
            let k = p.modulus();
            let two: f64 = [0.0f64, 1.0].iter().map(|&e| (p.rp((e - 0.5) * k - 1.0) - p.rp(e * k - 1.0)).abs()).sum();
            assert!((two - mnl_4qam(&p).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn series_tail_is_polynomial() {
        // outer terms fall off like eta^-3, so doubling H shrinks the
        // remaining increment by roughly 4x rather than exponentially
        let p = params(1.0, 1.0, 10.0);
        let s = |h: usize| mnl_4qam_series(&p.with_trunc(h).unwrap());
        let (s2, s4, s8, s16) = (s(2), s(4), s(8), s(16));
        assert!(s2 < s4 && s4 < s8 && s8 < s16);
        let r1 = (s8 - s4) / (s16 - s8);
        assert!((3.0..6.0).contains(&r1), "{r1}");
        assert!((s(10) - s2) > 1e-6);
    }

    #[test]
    fn msl_reference_values() {
        assert!((msl_4qam(1.0, 8) - 0.12059559679039338).abs() < 1e-12);
        assert!(msl_4qam(3.0, 10) < 1e-12);
        assert_eq!(msl_4qam(100.0, 10), 0.0);
        // channel independence: only alpha enters
        let a = theorem1_4qam(&params(1.0, 1.0, 10.0)).unwrap().msl;
        let b = theorem1_4qam(&params(1.0, 0.2, 1e5)).unwrap().msl;
        assert_eq!(a, b);
    }

    #[test]
    fn noise_loss_rises_at_very_low_snr() {
        let lo = mnl_4qam(&params(1.0, 0.3, 10f64.powf(-0.2))).unwrap();
        let hi = mnl_4qam(&params(1.0, 0.3, 1.0)).unwrap();
        assert!(hi > lo);
    }

    #[test]
    fn theorem_regimes() {
        assert_eq!(theorem1_4qam(&params(0.8, 1.0, 1e4)).unwrap().dominant(), BoundKind::ModuloSignalLoss);
        assert_eq!(theorem1_4qam(&params(3.0, 1.0, 1e2)).unwrap().dominant(), BoundKind::ModuloNoiseLoss);
    }

    proptest! {
        #[test]
        fn bounded(a in 0.51f64..4.0, sh in 0.05f64..2.0, db in -5.0f64..60.0) {
            let p = BoundParams::from_snr_db(4, a, sh, db).unwrap();
            let t = theorem1_4qam(&p).unwrap();
            for v in [t.pl, t.mnl, t.msl, mnl_4qam_series(&p)] {
                prop_assert!(v.is_finite() && (0.0..=0.5).contains(&v));
            }
            prop_assert!(t.max() >= t.pl && t.max() >= t.mnl && t.max() >= t.msl);
            prop_assert!(mnl_4qam_series(&p) >= t.mnl - 1e-12);
        }

        // Below about 0 dB of sigma_h1^2 * Omega the noise-loss term still
        // grows with SNR, so monotonicity is checked from 10 dB up.
        #[test]
        fn monotone_in_snr(a in 0.51f64..4.0, sh in 0.05f64..2.0, eff_db in 10.0f64..60.0, step in 0.1f64..10.0) {
            let db = eff_db - 10.0 * sh.log10();
            let t = theorem1_4qam(&BoundParams::from_snr_db(4, a, sh, db).unwrap()).unwrap();
            let u = theorem1_4qam(&BoundParams::from_snr_db(4, a, sh, db + step).unwrap()).unwrap();
            prop_assert!(u.max() <= t.max() + 1e-15);
            prop_assert!(u.pl <= t.pl && u.mnl <= t.mnl + 1e-15);
        }
    }
}
