use super::{msl_variance, q_func, BoundParams, Theorem1};

/// `1 - sqrt(r)` for `r = c s Omega / (32 alpha^2 + c s Omega)`.
fn radical_gap(p: &BoundParams, c: f64) -> f64 {
    let a = 32.0 * p.alpha * p.alpha;
    let b = c * p.sigma_h1_sq * p.snr;
    (a / (a + b)) / (1.0 + (b / (a + b)).sqrt())
}

/// Power-loss bound, SNR form with the `32 alpha^2` denominators.
pub fn power_loss_16qam(p: &BoundParams) -> f64 {
    // 1/2 - 3/8 - 1/4 + 1/8 = 0, so only the radical gaps remain
    0.375 * radical_gap(p, 3.0) + 0.25 * radical_gap(p, 27.0) - 0.125 * radical_gap(p, 75.0)
}

/// Power-loss bound in terms of `x = sigma_h1^2 E_XDD / sigma_w^2`.
pub fn power_loss_16qam_noise_form(p: &BoundParams) -> f64 {
    let x = p.sigma_h1_sq * p.e_xdd() / p.sigma_w_sq;
    0.5 - 0.375 * (x / (10.0 + x)).sqrt() - 0.25 * (9.0 * x / (10.0 + 9.0 * x)).sqrt()
        + 0.125 * (5.0 * x / (2.0 + 5.0 * x)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mnl16Cases {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mnl16Cases {
    pub fn total(&self) -> f64 {
        2.0 * (self.a + self.b + self.c + self.d)
    }
}

/// Per-axis 4-PAM case sums, each `(1/8) sum_beta |rp(lo) - rp(hi)|` with
/// `K = 8 alpha` and `beta` in `[-H, H]`.
pub fn mnl_16qam_cases(p: &BoundParams) -> Mnl16Cases {
    let k = p.modulus();
    let h = p.trunc as i64;
    let f = |lo: f64, hi: f64| (p.rp(lo) - p.rp(hi)).abs();
    let mut s = Mnl16Cases { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };
    for beta in -h..=h {
        let b = beta as f64;
        s.a += f((b - 1.0) * k + 3.0, (b - 0.5) * k + 3.0);
        s.b += f((b - 1.0) * k + 1.0, (b - 0.5) * k + 1.0);
        s.c += f((b - 1.0) * k + 1.0, (b - 1.0) * k + 5.0);
        s.d += f((b - 1.0) * k + 3.0, b * k - 1.0);
    }
    Mnl16Cases { a: s.a / 8.0, b: s.b / 8.0, c: s.c / 8.0, d: s.d / 8.0 }
}

pub fn mnl_16qam(p: &BoundParams) -> f64 {
    mnl_16qam_cases(p).total()
}

/// `(3/4) Q(sqrt(E_XDD / (5 Var)))` with `E_XDD = 10`.
pub fn msl_16qam(alpha: f64, h: usize) -> f64 {
    let v = msl_variance(16, alpha, h);
    if v == 0.0 {
        0.0
    } else {
        0.75 * q_func((10.0 / (5.0 * v)).sqrt())
    }
}

pub fn theorem1_16qam(p: &BoundParams) -> Theorem1 {
    Theorem1 { pl: power_loss_16qam(p), mnl: mnl_16qam(p), msl: msl_16qam(p.alpha, p.trunc) }
}
