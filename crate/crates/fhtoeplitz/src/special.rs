//! Log-Gamma, log Barnes G, Riemann zeta at integers and Euler's constant.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// ζ'(−1) = 1/12 − log A with A the Glaisher–Kinkelin constant.
const ZETA_PRIME_MINUS_ONE: f64 = -0.165_421_143_700_450_93;

/// B_2, B_4, ..., B_22.
const BERNOULLI_EVEN: [f64; 11] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
];

const ZETA_MAX: usize = 200;

/// Cached zeta values and Taylor data for log G(1+w).
pub struct SpecialValueCache {
    zeta: Vec<f64>,
    taylor: Vec<f64>,
}

impl SpecialValueCache {
    fn build() -> Self {
        let mut zeta = vec![f64::NAN; ZETA_MAX + 1];
        for (k, z) in zeta.iter_mut().enumerate().skip(2) {
            *z = zeta_euler_maclaurin(k as f64);
        }
        // log G(1+w) = Σ_{k≥1} taylor[k] w^k
        let mut taylor = vec![0.0; ZETA_MAX + 1];
        taylor[1] = ((2.0 * PI).ln() - 1.0) / 2.0;
        taylor[2] = -(1.0 + EULER_GAMMA) / 2.0;
        for k in 3..=ZETA_MAX {
            let sign = if (k - 1) % 2 == 0 { 1.0 } else { -1.0 };
            taylor[k] = sign * zeta[k - 1] / k as f64;
        }
        SpecialValueCache { zeta, taylor }
    }

    pub fn get() -> &'static SpecialValueCache {
        static CACHE: OnceLock<SpecialValueCache> = OnceLock::new();
        CACHE.get_or_init(SpecialValueCache::build)
    }

    pub fn euler_gamma(&self) -> f64 {
        EULER_GAMMA
    }
}

fn zeta_euler_maclaurin(s: f64) -> f64 {
    const N: usize = 12;
    let nf = N as f64;
    let mut sum = 0.0;
    for j in (1..N).rev() {
        sum += (j as f64).powf(-s);
    }
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // B_{2i}/(2i)! · s(s+1)...(s+2i−2) · N^{−s−2i+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut npow = nf.powf(-s - 1.0);
    for i in 1..=9 {
        sum += BERNOULLI_EVEN[i - 1] / fact * rising * npow;
        let a = s + (2 * i - 1) as f64;
        let b = s + (2 * i) as f64;
        rising *= a * b;
        fact *= ((2 * i + 1) * (2 * i + 2)) as f64;
        npow /= nf * nf;
    }
    sum
}

/// Riemann zeta at an integer k ≥ 2.
pub fn zeta(k: u32) -> f64 {
    assert!(k >= 2, "zeta(k) needs k >= 2");
    if (k as usize) <= ZETA_MAX {
        SpecialValueCache::get().zeta[k as usize]
    } else {
        1.0 + 2f64.powi(-(k as i32))
    }
}

fn stirling_log_gamma(z: Complex64) -> Complex64 {
    let mut s = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln();
    let zinv = z.inv();
    let zinv2 = zinv * zinv;
    let mut p = zinv;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate().take(10) {
        let kk = (k + 1) as f64;
        s += p * (b / (2.0 * kk * (2.0 * kk - 1.0)));
        p *= zinv2;
    }
    s
}

/// Analytic branch of log Γ(z) on Re z > 0 (agrees with the real log on the
/// positive axis and is continuous in the right half-plane).
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re > 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("log_gamma needs Re z > 0, got {z}")));
    }
    // log Π (z+j) with one real log and the arguments summed separately
    let mut prod = 1.0;
    let mut arg = 0.0;
    let mut x = z;
    while x.norm() < 15.0 {
        prod *= x.norm();
        arg += x.arg();
        x += 1.0;
    }
    Ok(stirling_log_gamma(x) - Complex64::new(prod.ln(), arg))
}

/// Real log Γ(x) for x > 0.
pub fn log_gamma_real(x: f64) -> Result<f64> {
    Ok(log_gamma(Complex64::new(x, 0.0))?.re)
}

/// log G(x+1) for large |x|.
fn barnes_asymptotic(x: Complex64) -> Complex64 {
    let lx = x.ln();
    let x2 = x * x;
    let mut s = x2 * 0.5 * lx - x2 * 0.75 + x * (0.5 * (2.0 * PI).ln()) - lx / 12.0
        + ZETA_PRIME_MINUS_ONE;
    let xinv2 = (x2).inv();
    let mut p = xinv2;
    for k in 1..=10 {
        let kk = k as f64;
        s += p * (BERNOULLI_EVEN[k] / (4.0 * kk * (kk + 1.0)));
        p *= xinv2;
    }
    s
}

fn barnes_taylor(w: Complex64) -> Complex64 {
    let c = &SpecialValueCache::get().taylor;
    let mut s = Complex64::new(0.0, 0.0);
    let mut p = w;
    for coef in c.iter().skip(1) {
        s += p * *coef;
        if p.norm() < 1e-17 {
            break;
        }
        p *= w;
    }
    s
}

/// Analytic branch of log G(z) on Re z > 0, continuous from log G(1) = 0.
pub fn log_barnes_g(z: Complex64) -> Result<Complex64> {
    if !(z.re > 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("log_barnes_g needs Re z > 0, got {z}")));
    }
    if z.norm() >= 12.0 {
        return Ok(barnes_asymptotic(z - 1.0));
    }
    if z.im.abs() <= 0.5 {
        if z.re < 0.5 {
            // log G(z) = log G(1+z) − log Γ(z)
            return Ok(barnes_taylor(z) - log_gamma(z)?);
        }
        let j = (z.re - 1.0).round().max(0.0) as usize;
        let w = z - 1.0 - j as f64;
        let mut s = barnes_taylor(w);
        for i in 0..j {
            s += log_gamma(w + 1.0 + i as f64)?;
        }
        return Ok(s);
    }
    // log G(z) = log G(z+m) − Σ_{i<m} log Γ(z+i)
    let mut x = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while x.norm() < 12.0 {
        shift += log_gamma(x)?;
        x += 1.0;
    }
    Ok(barnes_asymptotic(x - 1.0) - shift)
}

/// Real log G(x) for x > 0.
pub fn log_barnes_g_real(x: f64) -> Result<f64> {
    Ok(log_barnes_g(Complex64::new(x, 0.0))?.re)
}

/// (log G)^{(j)}(1) for j ≥ 1.
pub fn log_g_deriv_at_1(j: u32) -> f64 {
    assert!(j >= 1, "derivative order must be >= 1");
    match j {
        1 => ((2.0 * PI).ln() - 1.0) / 2.0,
        2 => -(1.0 + EULER_GAMMA),
        _ => {
            let sign = if (j - 1) % 2 == 0 { 1.0 } else { -1.0 };
            let fact: f64 = (1..j).map(|i| i as f64).product();
            sign * fact * zeta(j - 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zeta_even_values() {
        assert_relative_eq!(zeta(2), PI * PI / 6.0, max_relative = 1e-15);
        assert_relative_eq!(zeta(4), PI.powi(4) / 90.0, max_relative = 1e-15);
        assert_relative_eq!(zeta(3), 1.202_056_903_159_594_2, max_relative = 1e-15);
    }

    #[test]
    fn log_gamma_small_values() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-14);
        assert!(log_gamma(c(2.0, 0.0)).unwrap().norm() < 1e-14);
        let half = log_gamma(c(0.5, 0.0)).unwrap();
        assert_relative_eq!(half.re, 0.5 * PI.ln(), max_relative = 1e-13);
    }

    #[test]
    fn log_gamma_complex_reference() {
        // reference values from a 30-digit evaluation
        let a = log_gamma(c(0.3, 4.0)).unwrap();
        assert!((a - c(-5.641_063_534_820_528_7, 1.236_449_121_549_806_6)).norm() < 1e-13);
        let b = log_gamma(c(0.7, -20.0)).unwrap();
        assert!((b - c(-29.897_859_055_122_915, -40.229_888_182_003_196)).norm() < 1e-12);
    }

    #[test]
    fn barnes_integer_values() {
        for z in [1.0, 2.0, 3.0] {
            assert!(log_barnes_g_real(z).unwrap().abs() < 1e-14);
        }
        assert_relative_eq!(log_barnes_g_real(4.0).unwrap(), 2f64.ln(), max_relative = 1e-13);
        assert_relative_eq!(log_barnes_g_real(5.0).unwrap(), 12f64.ln(), max_relative = 1e-13);
    }

    #[test]
    fn barnes_reference_values() {
        // the reference is the principal log of G; compare up to 2πi
        let a = log_barnes_g(c(0.7, 3.2)).unwrap();
        let d = a - c(2.747_016_060_630_517_4, 0.958_009_285_604_004_8);
        assert!((d.exp() - 1.0).norm() < 1e-12);
        assert_relative_eq!(
            log_barnes_g_real(1.5).unwrap(),
            0.066_931_888_435_004_704,
            max_relative = 1e-13
        );
        let b = log_barnes_g(c(2.3, -1.1)).unwrap();
        assert!((b - c(-0.251_957_763_658_753_3, 0.261_516_720_557_881_75)).norm() < 1e-13);
    }

    #[test]
    fn barnes_region_seams_agree() {
        // the Taylor and asymptotic routes meet continuously
        for &z in &[c(0.9, 0.49), c(0.9, 0.51), c(11.9, 0.2), c(12.1, 0.2), c(1.49, 0.0), c(1.51, 0.0)] {
            let g1 = log_barnes_g(z + 1.0).unwrap();
            let g0 = log_barnes_g(z).unwrap();
            let lg = log_gamma(z).unwrap();
            assert!((g1 - g0 - lg).norm() < 1e-12, "z = {z}");
        }
    }

    #[test]
    fn derivative_values() {
        assert_relative_eq!(log_g_deriv_at_1(3), PI * PI / 3.0, max_relative = 1e-14);
        assert_relative_eq!(log_g_deriv_at_1(1), 0.418_938_533_204_672_7, max_relative = 1e-14);
        assert_relative_eq!(log_g_deriv_at_1(4), -6.0 * zeta(3), max_relative = 1e-14);
    }

    #[test]
    fn domain_is_checked() {
        assert!(log_barnes_g(c(0.0, 1.0)).is_err());
        assert!(log_gamma(c(-0.5, 0.0)).is_err());
    }
}
