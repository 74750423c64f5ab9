//! Verification suites: closed forms checked against independent oracles.
//! Each check reports a residual and the tolerance it must meet.

use crate::asymptotics::{predicted_cumulants, prop44_constants, thm11_constants, thm41_constants, Statistic};
use crate::error::{Error, Result};
use crate::special::{log_barnes_g, log_barnes_g_real, log_g_deriv_at_1, log_gamma, log_gamma_real};
use crate::symbol::{fourier_coeffs, Singularity, SymbolSpec};
use crate::toeplitz::{logdet, logdet_general, opuc_from_moments, opuc_szego, verify_cd_identity, verify_diff_identity, Method};
use crate::trig::{cdf_mu, equilibrium_density, log_kernel_integral, pv_cauchy, PvMode, TrigPolynomial};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;
const SEED: u64 = 20_240_531;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// potential-theory identities, PV integrals, scaling law, decomposition
    Identities,
    /// OPUC / Riemann–Hilbert identities at small n
    Rh,
    /// Barnes G and Gamma
    Special,
    /// Fourier coefficients of pure jump and root symbols
    Quadrature,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Identities, Suite::Rh, Suite::Special, Suite::Quadrature];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Rh => "rh",
            Suite::Special => "special",
            Suite::Quadrature => "quadrature",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::parse(format!("unknown suite {s:?} (identities, rh, special, quadrature)")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
}

impl Check {
    fn new(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        Check { name: name.into(), residual, tol }
    }

    pub fn passed(&self) -> bool {
        self.residual.is_finite() && self.residual <= self.tol
    }
}

/// Runs a suite. `tol` replaces every tolerance when given.
pub fn run_suite(suite: Suite, tol: Option<f64>) -> Result<Vec<Check>> {
    let mut checks = match suite {
        Suite::Identities => identities()?,
        Suite::Rh => rh()?,
        Suite::Special => special()?,
        Suite::Quadrature => quadrature()?,
    };
    if let Some(t) = tol {
        for c in &mut checks {
            c.tol = t;
        }
    }
    Ok(checks)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A real-on-circle V of the given degree with Σ 2k|V_k| = budget < 1, so ψ > 0.
fn random_regular_v(rng: &mut ChaCha8Rng, degree: i64, budget: f64) -> TrigPolynomial {
    let raw: Vec<Complex64> = (1..=degree).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let total: f64 = raw.iter().enumerate().map(|(i, v)| 2.0 * (i + 1) as f64 * v.norm()).sum();
    let mut pairs = vec![(0, c(rng.random_range(-0.5..0.5), 0.0))];
    for (i, v) in raw.iter().enumerate() {
        let vk = v * (budget / total);
        pairs.push((i as i64 + 1, vk));
        pairs.push((-(i as i64) - 1, vk.conj()));
    }
    TrigPolynomial::from_pairs(&pairs)
}

fn random_unit(rng: &mut ChaCha8Rng) -> (f64, Complex64) {
    let t = rng.random_range(0.0..TWO_PI);
    (t, Complex64::from_polar(1.0, t))
}

/// (1/iπ) ⨍ g(w)/(w − z) dw by subtracting g(z): the remainder is a smooth
/// periodic integrand handled by the trapezoid rule, and ⨍ dw/(w − z) = iπ.
pub fn pv_oracle(g: impl Fn(Complex64) -> Complex64, z: Complex64) -> Complex64 {
    const M: usize = 2048;
    let gz = g(z);
    let phi = z.arg();
    let mut s = c(0.0, 0.0);
    for j in 0..M {
        let w = Complex64::from_polar(1.0, phi + TWO_PI * (j as f64 + 0.5) / M as f64);
        s += (g(w) - gz) * w / (w - z);
    }
    s / M as f64 * 2.0 + gz
}

fn wrap_im(x: Complex64) -> Complex64 {
    c(x.re, (x.im + PI).rem_euclid(TWO_PI) - PI)
}

fn identities() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut out = Vec::new();

    // (V(z) − V_0)/2 = ∫ log|e^{iθ} − z| dμ_V and the cdf identity, 100 random z
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for trial in 0..100 {
        let v = random_regular_v(&mut rng, 1 + trial % 6, 0.8);
        let eq = equilibrium_density(&v);
        let (theta, z) = random_unit(&mut rng);
        let lhs = (v.eval_z(z) - v.coeff(0)).re / 2.0;
        e1 = e1.max((log_kernel_integral(&eq, z)? - lhs).abs());
        let (_, vp, _) = v.laurent_split();
        let rhs = theta / TWO_PI - (vp.eval_z(z).im - vp.eval_z(c(1.0, 0.0)).im) / PI;
        e2 = e2.max((cdf_mu(&eq, theta) - rhs).abs());
    }
    out.push(Check::new("log-kernel integral equals (V(z)-V0)/2", e1, 1e-10));
    out.push(Check::new("equilibrium cdf equals arg/2pi - Im V+ difference/pi", e2, 1e-10));

    // principal-value identities, degrees 1..=8
    let (mut d1, mut d2) = (0.0f64, 0.0f64);
    for degree in 1..=8 {
        let v = random_regular_v(&mut rng, degree, 0.9);
        let dv = v.deriv_z();
        for _ in 0..12 {
            let (_, z) = random_unit(&mut rng);
            let a = pv_cauchy(&v, z, PvMode::Derivative)?;
            d1 = d1.max((a - pv_oracle(|w| dv.eval_z(w), z)).norm());
            let b = pv_cauchy(&v, z, PvMode::Function)?;
            d2 = d2.max((b - pv_oracle(|w| v.eval_z(w), z)).norm());
        }
    }
    out.push(Check::new("PV integral of V' against trapezoid oracle", d1, 1e-10));
    out.push(Check::new("PV integral of V against trapezoid oracle", d2, 1e-10));

    // D_n(c f) = c^n D_n(f)
    let mut worst = 0.0f64;
    for (k, n) in [4usize, 9, 16, 64].into_iter().enumerate() {
        let base = SymbolSpec::new(
            TrigPolynomial::cosine(0.05 * (k + 1) as f64),
            TrigPolynomial::from_pairs(&[(1, c(0.2, 0.1)), (-2, c(0.05, 0.0))]),
            vec![Singularity::new(1.0 + k as f64, c(0.4, 0.1), c(0.15, -0.05))],
            n,
        )?;
        let log_c = c(0.7, 0.3);
        let shifted = SymbolSpec { w: base.w.add(&TrigPolynomial::constant(log_c)), ..base.clone() };
        let a = logdet(&base, Method::Auto)?.value();
        let b = logdet(&shifted, Method::Auto)?.value();
        worst = worst.max(wrap_im(b - a - log_c * n as f64).norm());
    }
    out.push(Check::new("determinant scaling law", worst, 1e-10));

    // C = D + c constant by constant, 50 random regular specs
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let degree = rng.random_range(1..=3);
        let v = random_regular_v(&mut rng, degree, 0.8);
        let w = TrigPolynomial::from_pairs(&[(1, c(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3))), (-1, c(rng.random_range(-0.3..0.3), 0.0))]);
        let m = rng.random_range(0..=2);
        let mut sings = vec![Singularity::new(0.0, c(rng.random_range(0.0..1.0), 0.0), c(rng.random_range(-0.2..0.2), 0.0))];
        for j in 0..m {
            let theta = 1.0 + 2.0 * j as f64 + rng.random_range(0.0..1.0);
            sings.push(Singularity::new(theta, c(rng.random_range(-0.5..1.5), rng.random_range(-0.2..0.2)), c(rng.random_range(-0.4..0.4), rng.random_range(-0.2..0.2))));
        }
        let spec = SymbolSpec::new(v, w, sings, 1)?;
        let full = thm11_constants(&spec)?.constants;
        let d = thm41_constants(&spec.w, &spec.singularities)?.constants;
        let p = prop44_constants(&spec)?.constants;
        let sum = [p[0], d[0] + p[1], d[1], d[2] + p[2]];
        for (a, b) in full.iter().zip(sum) {
            worst = worst.max((a - b).norm());
        }
    }
    out.push(Check::new("full constants = V-free constants + potential constants", worst, 1e-10));
    Ok(out)
}

fn rh_classes(n: usize) -> Result<Vec<(&'static str, SymbolSpec)>> {
    Ok(vec![
        ("identity", SymbolSpec::smooth(TrigPolynomial::zero(), TrigPolynomial::zero(), n)?),
        ("positive smooth", SymbolSpec::smooth(TrigPolynomial::cosine(0.15), TrigPolynomial::cosine(0.3), n)?),
        ("jump beta=0.1i", SymbolSpec::new(TrigPolynomial::zero(), TrigPolynomial::zero(), vec![Singularity::new(2.0, c(0.0, 0.0), c(0.0, 0.1))], n)?),
    ])
}

fn rh() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut out = Vec::new();
    for (name, _) in rh_classes(1)? {
        let mut cd = 0.0f64;
        let mut product = 0.0f64;
        for n in 1..=8 {
            let spec = rh_classes(n)?.into_iter().find(|x| x.0 == name).unwrap().1;
            let table = fourier_coeffs(&spec, n + 1, 1e-14)?;
            let fam = opuc_szego(&table, n)?;
            for _ in 0..4 {
                let r = if rng.random_bool(0.5) { rng.random_range(0.3..0.8) } else { rng.random_range(1.25..2.0) };
                let z = Complex64::from_polar(r, rng.random_range(0.0..TWO_PI));
                let chk = verify_cd_identity(&fam, &spec, n, z)?;
                cd = cd.max(chk.residual / chk.lhs.norm().max(chk.rhs.norm()).max(1.0));
            }
            // Π κ_j^{−2} = D_n with κ from minors, D_n from LU
            let minors = opuc_from_moments(&table, n)?;
            let lhs: Complex64 = minors.log_h[..n].iter().sum();
            let rhs = logdet_general(&table, n)?.value();
            product = product.max(wrap_im(lhs - rhs).norm());
        }
        out.push(Check::new(format!("Christoffel-Darboux identity for [Y^-1 Y']_21 ({name})"), cd, 1e-5));
        out.push(Check::new(format!("product of kappa^-2 equals D_n ({name})"), product, 1e-9));
    }
    for s in [0.25, 0.5, 0.75] {
        let mut worst = 0.0f64;
        for n in [2usize, 4, 8] {
            let spec = SymbolSpec::new(
                TrigPolynomial::cosine(0.2),
                TrigPolynomial::cosine(0.1),
                vec![Singularity::real(1.5, 0.5, 0.1)],
                n,
            )?;
            worst = worst.max(verify_diff_identity(&spec, s)?.relative());
        }
        out.push(Check::new(format!("differential identity in s at s={s}"), worst, 1e-4));
    }
    Ok(out)
}

/// (log G)''(1) as a Cauchy integral over |z − 1| = 1/2 of
/// log G(z+12) − Σ_{i<12} log Γ(z+i), which reaches G only through its
/// large-argument expansion.
pub fn log_g_second_derivative_oracle() -> Result<f64> {
    const M: usize = 96;
    let r = 0.5;
    let mut s = c(0.0, 0.0);
    for j in 0..M {
        let e = Complex64::from_polar(1.0, TWO_PI * j as f64 / M as f64);
        let z = 1.0 + e * r;
        let mut f = log_barnes_g(z + 12.0)?;
        for k in 0..12 {
            f -= log_gamma(z + k as f64)?;
        }
        s += f / (e * e);
    }
    Ok((s * 2.0 / (M as f64 * r * r)).re)
}

fn special() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    for k in 1..=8u32 {
        // log Π_{j≤k−2} j!
        let exact: f64 = (1..=k.saturating_sub(2)).map(|j| (1..=j).map(|i| (i as f64).ln()).sum::<f64>()).sum();
        worst = worst.max((log_barnes_g_real(k as f64)? - exact).abs());
    }
    out.push(Check::new("G(k) equals product of factorials, k <= 8", worst, 1e-12));

    let mut worst = 0.0f64;
    for i in 0..=12 {
        for j in -8..=8 {
            let z = c(0.25 + 0.5 * i as f64, 0.5 * j as f64);
            let r = log_barnes_g(z + 1.0)? - log_barnes_g(z)? - log_gamma(z)?;
            worst = worst.max(wrap_im(r).norm());
        }
    }
    out.push(Check::new("recurrence G(z+1) = Gamma(z) G(z) on a strip grid", worst, 1e-12));

    let g2 = log_g_deriv_at_1(2);
    let oracle = log_g_second_derivative_oracle()?;
    out.push(Check::new("(log G)''(1) against a contour-integral oracle", (g2 - oracle).abs(), 1e-10));
    out.push(Check::new("(log G)''(1) + 1 + Euler gamma", (g2 + 1.0 + 0.577_215_664_901_532_9).abs(), 1e-10));
    let k2 = predicted_cumulants(&TrigPolynomial::zero(), &Statistic::LogAbs(1.0), 100, 2)?[1];
    out.push(Check::new(
        "log-statistic variance constant equals -(log G)''(1)/2",
        (k2 - 100f64.ln() / 2.0 + oracle / 2.0).abs(),
        1e-10,
    ));
    Ok(out)
}

/// f_k of e^{iβ(θ−π)} on (0, 2π).
pub fn jump_coefficient(beta: Complex64, k: i64) -> Complex64 {
    (beta * PI).sin() / ((beta - k as f64) * PI)
}

/// f_k of |e^{iθ} − 1|^α via f_0 = Γ(1+α)/Γ(1+α/2)² and f_k/f_{k−1} = (k−1−α/2)/(k+α/2).
pub fn root_coefficient(alpha: f64, k: i64) -> Result<f64> {
    let mut f = (log_gamma_real(1.0 + alpha)? - 2.0 * log_gamma_real(1.0 + alpha / 2.0)?).exp();
    for j in 1..=k.abs() {
        let j = j as f64;
        f *= (j - 1.0 - alpha / 2.0) / (j + alpha / 2.0);
    }
    Ok(f)
}

fn quadrature() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for beta in [c(0.1, 0.0), c(0.2, 0.1), c(-0.3, 0.0)] {
        let spec = SymbolSpec::new(TrigPolynomial::zero(), TrigPolynomial::zero(), vec![Singularity::new(0.0, c(0.0, 0.0), beta)], 1)?;
        let t = fourier_coeffs(&spec, 64, 1e-13)?;
        let scale = t.log_scale.exp();
        let worst = (-64..=64).map(|k| (t.get(k) * scale - jump_coefficient(beta, k)).norm()).fold(0.0, f64::max);
        out.push(Check::new(format!("jump coefficients, beta = {beta}"), worst, 1e-10));
    }
    for alpha in [0.5, 1.0, 1.7] {
        let spec = SymbolSpec::new(TrigPolynomial::zero(), TrigPolynomial::zero(), vec![Singularity::real(0.0, alpha, 0.0)], 1)?;
        let t = fourier_coeffs(&spec, 64, 1e-13)?;
        let scale = t.log_scale.exp();
        let mut worst = 0.0f64;
        for k in -64..=64 {
            worst = worst.max((t.get(k) * scale - root_coefficient(alpha, k)?).norm());
        }
        out.push(Check::new(format!("root coefficients, alpha = {alpha}"), worst, 1e-9));
    }
    Ok(out)
}
