//! Finite Laurent polynomials on the unit circle, the equilibrium density of a
//! potential, and the closed-form integrals against it.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

/// Σ_k c_k z^k with finitely many coefficients, indices k_min..=k_max.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    k_min: i64,
    coeffs: Vec<Complex64>,
}

impl Default for TrigPolynomial {
    fn default() -> Self {
        TrigPolynomial::zero()
    }
}

impl TrigPolynomial {
    pub fn zero() -> Self {
        TrigPolynomial { k_min: 0, coeffs: vec![Complex64::new(0.0, 0.0)] }
    }

    pub fn constant(c: Complex64) -> Self {
        TrigPolynomial { k_min: 0, coeffs: vec![c] }
    }

    /// a·(z + 1/z), i.e. 2a·cos θ on the circle.
    pub fn cosine(a: f64) -> Self {
        TrigPolynomial::from_pairs(&[(1, Complex64::new(a, 0.0)), (-1, Complex64::new(a, 0.0))])
    }

    /// Builds from (k, c_k) pairs; repeated indices are summed.
    pub fn from_pairs(pairs: &[(i64, Complex64)]) -> Self {
        let k_min = pairs.iter().map(|p| p.0).min().unwrap_or(0).min(0);
        let k_max = pairs.iter().map(|p| p.0).max().unwrap_or(0).max(0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (k_max - k_min + 1) as usize];
        for &(k, c) in pairs {
            coeffs[(k - k_min) as usize] += c;
        }
        TrigPolynomial { k_min, coeffs }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.k_max() > 0 && self.coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            self.coeffs.pop();
        }
        while self.k_min < 0 && self.coeffs[0] == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(0);
            self.k_min += 1;
        }
        self
    }

    /// Ingests samples of a function on the uniform grid θ_j = 2πj/N by a
    /// discrete Fourier transform, dropping the tail once the remaining
    /// coefficient mass is below `1e-14` of the total.
    pub fn from_samples(values: &[Complex64]) -> Self {
        let n = values.len();
        let half = (n / 2) as i64;
        let mut pairs = Vec::with_capacity(n);
        for k in -half + 1..=half - 1 {
            let mut s = Complex64::new(0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let ang = -TWO_PI * (k * j as i64).rem_euclid(n as i64) as f64 / n as f64;
                s += v * Complex64::from_polar(1.0, ang);
            }
            pairs.push((k, s / n as f64));
        }
        let total: f64 = pairs.iter().map(|p| p.1.norm()).sum();
        let mut keep = half - 1;
        let mut tail = 0.0;
        while keep > 0 {
            let edge: f64 = pairs
                .iter()
                .filter(|p| p.0.abs() == keep)
                .map(|p| p.1.norm())
                .sum();
            if tail + edge > 1e-14 * total {
                break;
            }
            tail += edge;
            keep -= 1;
        }
        let kept: Vec<_> = pairs
            .into_iter()
            .filter(|p| p.0.abs() <= keep && p.1.norm() > 1e-16 * total)
            .collect();
        TrigPolynomial::from_pairs(&kept)
    }

    pub fn k_min(&self) -> i64 {
        self.k_min
    }

    pub fn k_max(&self) -> i64 {
        self.k_min + self.coeffs.len() as i64 - 1
    }

    /// max(|k_min|, k_max).
    pub fn degree(&self) -> i64 {
        self.k_max().max(-self.k_min)
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        if k < self.k_min || k > self.k_max() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k - self.k_min) as usize]
        }
    }

    /// Nonzero (k, c_k) pairs in increasing k.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (i as i64 + self.k_min, *c))
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    /// c_{-k} = conj(c_k) for all k, up to `tol`.
    pub fn is_real_on_circle(&self, tol: f64) -> bool {
        (0..=self.degree()).all(|k| (self.coeff(-k) - self.coeff(k).conj()).norm() <= tol)
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        self.eval_z(Complex64::from_polar(1.0, theta))
    }

    /// Laurent series at an arbitrary nonzero z.
    pub fn eval_z(&self, z: Complex64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        if self.k_max() > 0 {
            for k in (1..=self.k_max()).rev() {
                s = (s + self.coeff(k)) * z;
            }
        }
        let mut t = Complex64::new(0.0, 0.0);
        if self.k_min < 0 {
            let zi = z.inv();
            for k in self.k_min..0 {
                t = (t + self.coeff(k)) * zi;
            }
        }
        s + t + self.coeff(0)
    }

    /// dp/dθ at z = e^{iθ}.
    pub fn deriv_theta(&self, theta: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, theta);
        self.terms()
            .map(|(k, c)| c * Complex64::new(0.0, k as f64) * z.powi(k as i32))
            .sum()
    }

    /// Complex derivative dp/dz as a Laurent polynomial.
    pub fn deriv_z(&self) -> TrigPolynomial {
        let pairs: Vec<_> = self
            .terms()
            .filter(|(k, _)| *k != 0)
            .map(|(k, c)| (k - 1, c * k as f64))
            .collect();
        TrigPolynomial::from_pairs(&pairs)
    }

    /// Σ |k|·|c_k|, an upper bound for |dp/dθ| on the circle.
    pub fn derivative_bound(&self) -> f64 {
        self.terms().map(|(k, c)| k.abs() as f64 * c.norm()).sum()
    }

    /// (c_0, plus part k ≥ 1, minus part k ≤ −1).
    pub fn laurent_split(&self) -> (Complex64, TrigPolynomial, TrigPolynomial) {
        let plus: Vec<_> = self.terms().filter(|(k, _)| *k >= 1).collect();
        let minus: Vec<_> = self.terms().filter(|(k, _)| *k <= -1).collect();
        (self.coeff(0), TrigPolynomial::from_pairs(&plus), TrigPolynomial::from_pairs(&minus))
    }

    pub fn add(&self, other: &TrigPolynomial) -> TrigPolynomial {
        let pairs: Vec<_> = self.terms().chain(other.terms()).collect();
        TrigPolynomial::from_pairs(&pairs)
    }

    pub fn scale(&self, c: Complex64) -> TrigPolynomial {
        let pairs: Vec<_> = self.terms().map(|(k, v)| (k, v * c)).collect();
        TrigPolynomial::from_pairs(&pairs)
    }
}

/// Σ_{ℓ≥1} ℓ·W_ℓ·W_{−ℓ}.
pub fn szego_sum(w: &TrigPolynomial) -> Complex64 {
    (1..=w.degree()).map(|l| w.coeff(l) * w.coeff(-l) * l as f64).sum()
}

/// Density ψ of the equilibrium measure dμ_V = ψ(e^{iθ}) dθ.
#[derive(Clone, Debug)]
pub struct EquilibriumDensity {
    pub psi: TrigPolynomial,
    pub min_value: f64,
    pub argmin: f64,
    pub regular: bool,
}

impl EquilibriumDensity {
    /// ψ(e^{iθ}), real.
    pub fn at(&self, theta: f64) -> f64 {
        self.psi.eval(theta).re
    }

    /// ψ at a unit-modulus point.
    pub fn at_z(&self, z: Complex64) -> f64 {
        self.at(z.arg())
    }
}

/// Equilibrium density of a real-on-circle potential V:
/// ψ_0 = 1/2π and ψ_{±k} = −k·V_{±k}/2π for k ≥ 1.
pub fn equilibrium_density(v: &TrigPolynomial) -> EquilibriumDensity {
    let mut pairs = vec![(0, Complex64::new(1.0 / TWO_PI, 0.0))];
    for k in 1..=v.degree() {
        let vk = v.coeff(k);
        pairs.push((k, -vk * (k as f64 / TWO_PI)));
        pairs.push((-k, -vk.conj() * (k as f64 / TWO_PI)));
    }
    let psi = TrigPolynomial::from_pairs(&pairs);
    let (argmin, min_value) = minimize_on_circle(&psi);
    EquilibriumDensity { psi, min_value, argmin, regular: min_value > 0.0 }
}

fn minimize_on_circle(p: &TrigPolynomial) -> (f64, f64) {
    const SAMPLES: usize = 4096;
    let mut vals: Vec<(f64, f64)> = (0..SAMPLES)
        .map(|j| {
            let th = TWO_PI * j as f64 / SAMPLES as f64;
            (th, p.eval(th).re)
        })
        .collect();
    vals.sort_by(|a, b| a.1.total_cmp(&b.1));
    let second = |th: f64| -> f64 {
        let z = Complex64::from_polar(1.0, th);
        p.terms().map(|(k, c)| (c * z.powi(k as i32) * (-(k * k) as f64)).re).sum()
    };
    let mut best = vals[0];
    for &(th0, _) in vals.iter().take(8) {
        let mut th = th0;
        let h = TWO_PI / SAMPLES as f64;
        for _ in 0..50 {
            let d1 = p.deriv_theta(th).re;
            let d2 = second(th);
            if d2 <= 0.0 {
                break;
            }
            let step = (d1 / d2).clamp(-h, h);
            th -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let th = th.rem_euclid(TWO_PI);
        let v = p.eval(th).re;
        if v < best.1 {
            best = (th, v);
        }
    }
    best
}

/// ∫_0^{2π} h(e^{iθ}) ψ(e^{iθ}) dθ = 2π Σ_k h_k ψ_{−k}.
pub fn measure_integral(h: &TrigPolynomial, eq: &EquilibriumDensity) -> Complex64 {
    h.terms().map(|(k, c)| c * eq.psi.coeff(-k)).sum::<Complex64>() * TWO_PI
}

/// ∫_0^θ ψ(e^{iφ}) dφ by termwise antiderivatives.
pub fn cdf_mu(eq: &EquilibriumDensity, theta: f64) -> f64 {
    let mut s = eq.psi.coeff(0).re * theta;
    for (k, c) in eq.psi.terms() {
        if k != 0 {
            let kk = k as f64;
            let e = Complex64::new((kk * theta).cos() - 1.0, (kk * theta).sin());
            s += (c * e / Complex64::new(0.0, kk)).re;
        }
    }
    s
}

fn check_unit(z: Complex64) -> Result<()> {
    if (z.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::domain(format!("point {z} is not on the unit circle")));
    }
    Ok(())
}

/// ∫ log|e^{iθ} − z| ψ dθ using log|e^{iθ}−e^{iφ}| = −Σ_{k≥1} cos(k(θ−φ))/k.
pub fn log_kernel_integral(eq: &EquilibriumDensity, z: Complex64) -> Result<f64> {
    check_unit(z)?;
    let phi = z.arg();
    let mut s = 0.0;
    for k in 1..=eq.psi.degree() {
        let e = Complex64::from_polar(1.0, k as f64 * phi);
        let term = eq.psi.coeff(k) * e + eq.psi.coeff(-k) * e.conj();
        s -= PI / k as f64 * term.re;
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PvMode {
    /// (1/iπ) ⨍ p′(w)/(w − z) dw
    Derivative,
    /// (1/iπ) ⨍ p(w)/(w − z) dw
    Function,
}

/// Closed forms of the principal-value Cauchy integrals over the circle.
pub fn pv_cauchy(p: &TrigPolynomial, z: Complex64, mode: PvMode) -> Result<Complex64> {
    check_unit(z)?;
    match mode {
        PvMode::Derivative => {
            let eq = equilibrium_density(p);
            Ok((Complex64::new(1.0, 0.0) - TWO_PI * eq.at_z(z)) / z)
        }
        PvMode::Function => {
            let (c0, plus, minus) = p.laurent_split();
            Ok(c0 + plus.eval_z(z) - minus.eval_z(z))
        }
    }
}
