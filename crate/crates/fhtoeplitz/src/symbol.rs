//! Fisher–Hartwig singularities and the full symbol f = e^{−nV} e^{W} ω.

use crate::error::{Error, Result};
use crate::quadrature::{Breakpoint, CircleRule};
use crate::trig::TrigPolynomial;
use num_complex::Complex64;
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Singularity {
    pub theta: f64,
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl Singularity {
    pub fn new(theta: f64, alpha: Complex64, beta: Complex64) -> Self {
        Singularity { theta, alpha, beta }
    }

    pub fn real(theta: f64, alpha: f64, beta: f64) -> Self {
        Singularity::new(theta, Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
    }

    pub fn t(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    pub fn is_trivial(&self) -> bool {
        self.alpha == Complex64::new(0.0, 0.0) && self.beta == Complex64::new(0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..TWO_PI).contains(&self.theta) {
            return Err(Error::domain(format!("theta {} outside [0, 2pi)", self.theta)));
        }
        if !(self.alpha.re > -1.0) {
            return Err(Error::domain(format!("Re alpha = {} must exceed -1", self.alpha.re)));
        }
        if !(self.beta.re.abs() < 0.5) {
            return Err(Error::domain(format!("Re beta = {} must lie in (-1/2, 1/2)", self.beta.re)));
        }
        Ok(())
    }
}

/// log|e^{iθ} − e^{iθ_k}| computed as log|2 sin((θ − θ_k)/2)|.
pub fn log_chord(theta: f64, theta_k: f64) -> f64 {
    (2.0 * ((theta - theta_k) / 2.0).sin()).abs().ln()
}

/// |e^{iθ} − t|^α.
pub fn omega_alpha(sing: &Singularity, theta: f64) -> Result<Complex64> {
    if sing.alpha == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let l = log_chord(theta, sing.theta);
    if l == f64::NEG_INFINITY {
        if sing.alpha.re < 0.0 {
            return Err(Error::domain(format!("pole of the root factor at theta = {theta}")));
        }
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok((sing.alpha * l).exp())
}

/// log ω_β: iβ(θ − θ_k) + iπβ for θ < θ_k, −iπβ for θ ≥ θ_k.
pub fn log_omega_beta(sing: &Singularity, theta: f64) -> Complex64 {
    let i = Complex64::i();
    let side = if theta < sing.theta { PI } else { -PI };
    i * sing.beta * (theta - sing.theta + side)
}

pub fn omega_beta(sing: &Singularity, theta: f64) -> Complex64 {
    log_omega_beta(sing, theta).exp()
}

/// f(z) = e^{−nV(z)} e^{W(z)} Π ω_{α_k} ω_{β_k}, with θ_0 = 0 always present.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolSpec {
    pub v: TrigPolynomial,
    pub w: TrigPolynomial,
    pub singularities: Vec<Singularity>,
    pub n: usize,
}

impl SymbolSpec {
    pub fn new(v: TrigPolynomial, w: TrigPolynomial, mut singularities: Vec<Singularity>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n must be positive"));
        }
        if !v.is_real_on_circle(1e-13) {
            return Err(Error::domain("V must be real on the circle"));
        }
        if !singularities.iter().any(|s| s.theta == 0.0) {
            singularities.push(Singularity::real(0.0, 0.0, 0.0));
        }
        singularities.sort_by(|a, b| a.theta.total_cmp(&b.theta));
        for s in &singularities {
            s.validate()?;
        }
        for w2 in singularities.windows(2) {
            if w2[0].theta >= w2[1].theta {
                return Err(Error::domain("singularity angles must be distinct"));
            }
        }
        Ok(SymbolSpec { v, w, singularities, n })
    }

    /// Only V and W, with the structural trivial singularity at θ_0 = 0.
    pub fn smooth(v: TrigPolynomial, w: TrigPolynomial, n: usize) -> Result<Self> {
        SymbolSpec::new(v, w, vec![], n)
    }

    pub fn with_n(&self, n: usize) -> Self {
        SymbolSpec { n, ..self.clone() }
    }

    pub fn with_v(&self, v: TrigPolynomial) -> Self {
        SymbolSpec { v, ..self.clone() }
    }

    /// W real on the circle, all α real, all β purely imaginary: f > 0.
    pub fn is_positive(&self) -> bool {
        self.w.is_real_on_circle(1e-14)
            && self.singularities.iter().all(|s| s.alpha.im == 0.0 && s.beta.re == 0.0)
    }

    /// Complex log f(e^{iθ}): real part log|f|, imaginary part the phase
    /// accumulated from the factors (not reduced mod 2π).
    pub fn log_symbol_eval(&self, theta: f64) -> Result<Complex64> {
        let mut s = -(self.n as f64) * self.v.eval(theta) + self.w.eval(theta);
        for sing in &self.singularities {
            if sing.alpha != Complex64::new(0.0, 0.0) {
                let l = log_chord(theta, sing.theta);
                if l == f64::NEG_INFINITY && sing.alpha.re < 0.0 {
                    return Err(Error::domain(format!("pole of the symbol at theta = {theta}")));
                }
                if l == f64::NEG_INFINITY {
                    return Ok(Complex64::new(f64::NEG_INFINITY, 0.0));
                }
                s += sing.alpha * l;
            }
            if sing.beta != Complex64::new(0.0, 0.0) {
                s += log_omega_beta(sing, theta);
            }
        }
        Ok(s)
    }

    pub fn symbol_eval(&self, theta: f64) -> Result<Complex64> {
        Ok(self.log_symbol_eval(theta)?.exp())
    }

    /// Panel breakpoints at every θ_k with the root exponents.
    pub fn breakpoints(&self) -> Vec<Breakpoint> {
        self.singularities
            .iter()
            .map(|s| Breakpoint {
                theta: s.theta,
                exponent: s.alpha.re,
                graded: s.alpha.im != 0.0,
                jump: s.beta != Complex64::new(0.0, 0.0),
            })
            .collect()
    }

    /// Rate bound for log f away from the singular points.
    pub fn bandwidth(&self) -> f64 {
        let sing: f64 = self.singularities.iter().map(|s| s.alpha.norm() + s.beta.norm()).sum();
        self.n as f64 * self.v.derivative_bound() + self.w.derivative_bound() + sing + 16.0
    }

    /// Discretized scaled measure (1/2π) f dθ on a panel rule.
    pub fn discretize(&self, rule: &CircleRule) -> Result<DiscreteSymbol> {
        let mut log_f = Vec::with_capacity(rule.len());
        for &t in &rule.theta {
            log_f.push(self.log_symbol_eval(t)?);
        }
        let scale = log_f.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        if !scale.is_finite() {
            return Err(Error::numerical("symbol vanishes on every quadrature node"));
        }
        let log_m = log_f
            .iter()
            .zip(rule.weight.iter().zip(&rule.ln_sing))
            .map(|(l, (w, ls))| l - scale + (w / TWO_PI).ln() + ls)
            .collect();
        Ok(DiscreteSymbol {
            theta: rule.theta.clone(),
            log_m,
            scale,
        })
    }

    /// Panel rule resolving the symbol times frequencies up to `extra`.
    pub fn rule(&self, extra: f64, q: usize) -> CircleRule {
        CircleRule::with_breakpoints(&self.breakpoints(), self.bandwidth() + extra, q)
    }
}

/// Nodes θ_i and log-weights log m_i with Σ m_i g(θ_i) ≈ (1/2π)∫ g f e^{−scale} dθ.
#[derive(Clone, Debug)]
pub struct DiscreteSymbol {
    pub theta: Vec<f64>,
    pub log_m: Vec<Complex64>,
    pub scale: f64,
}

impl DiscreteSymbol {
    pub fn weights(&self) -> Vec<Complex64> {
        self.log_m.iter().map(|l| l.exp()).collect()
    }
}

/// Fourier coefficients f_k, |k| ≤ K, of the scaled symbol e^{−scale} f.
#[derive(Clone, Debug)]
pub struct FourierTable {
    pub k_max: usize,
    pub data: Vec<Complex64>,
    pub log_scale: f64,
}

impl FourierTable {
    pub fn from_fn(k_max: usize, log_scale: f64, f: impl Fn(i64) -> Complex64) -> Self {
        let data = (-(k_max as i64)..=k_max as i64).map(f).collect();
        FourierTable { k_max, data, log_scale }
    }

    pub fn get(&self, k: i64) -> Complex64 {
        assert!(k.unsigned_abs() as usize <= self.k_max, "coefficient {k} not in table");
        self.data[(k + self.k_max as i64) as usize]
    }

    /// f_{−k} = conj(f_k) up to tol.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..=self.k_max as i64).all(|k| (self.get(-k) - self.get(k).conj()).norm() <= tol)
    }

    /// Scales every coefficient by c (the log-scale absorbs log|c|).
    pub fn scaled(&self, c: Complex64) -> Self {
        FourierTable { k_max: self.k_max, data: self.data.iter().map(|x| x * c).collect(), log_scale: self.log_scale }
    }
}

fn coefficients_on(d: &DiscreteSymbol, k_max: usize) -> Vec<Complex64> {
    let kk = k_max as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * k_max + 1];
    for (t, lm) in d.theta.iter().zip(&d.log_m) {
        let m = lm.exp();
        if m == Complex64::new(0.0, 0.0) {
            continue;
        }
        let step = Complex64::from_polar(1.0, -t);
        // m·e^{−ikθ} for k = 0..K and its mirror for k < 0
        let mut p = m;
        let mut q = m;
        out[k_max] += m;
        for k in 1..=kk {
            if k % 64 == 0 {
                p = m * Complex64::from_polar(1.0, -(k as f64) * t);
                q = m * Complex64::from_polar(1.0, k as f64 * t);
            } else {
                p *= step;
                q *= step.conj();
            }
            out[(kk + k) as usize] += p;
            out[(kk - k) as usize] += q;
        }
    }
    out
}

/// f_{−K..K} of the scaled symbol, refining the panels until two successive
/// levels agree to `tol`.
pub fn fourier_coeffs(spec: &SymbolSpec, k_max: usize, tol: f64) -> Result<FourierTable> {
    const Q: usize = 32;
    const LEVELS: usize = 6;
    let base = spec.bandwidth() + k_max as f64;
    let mut extra = k_max as f64;
    let d = spec.discretize(&spec.rule(extra, Q))?;
    let mut prev = coefficients_on(&d, k_max);
    let mut prev_scale = d.scale;
    for _ in 0..LEVELS {
        extra += base;
        let d = spec.discretize(&spec.rule(extra, Q))?;
        let mut cur = coefficients_on(&d, k_max);
        // express both levels on the finer scale
        let ratio = (prev_scale - d.scale).exp();
        let err = prev
            .iter()
            .zip(&cur)
            .map(|(a, b)| (a * ratio - b).norm())
            .fold(0.0, f64::max);
        if err <= tol {
            return Ok(FourierTable { k_max, data: std::mem::take(&mut cur), log_scale: d.scale });
        }
        prev = cur;
        prev_scale = d.scale;
    }
    Err(Error::numerical(format!(
        "Fourier coefficients did not reach tolerance {tol} within the panel budget"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn omega_examples() {
        let s0 = Singularity::real(0.0, 0.0, 0.0);
        assert_eq!(omega_alpha(&s0, 1.2).unwrap(), c(1.0, 0.0));
        assert_eq!(omega_beta(&s0, 1.2), c(1.0, 0.0));
        let s = Singularity::real(0.0, 2.0, 0.0);
        assert_relative_eq!(omega_alpha(&s, PI).unwrap().re, 4.0, max_relative = 1e-14);
        let s = Singularity::real(0.0, 1.0, 0.0);
        assert!(omega_alpha(&s, 1e-12).unwrap().norm() < 1e-11);
        let s = Singularity::real(0.0, -0.5, 0.0);
        assert!(omega_alpha(&s, 0.0).is_err());
        let s = Singularity::real(0.0, 0.0, 0.3);
        assert!((omega_beta(&s, PI) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn jump_ratio() {
        let s = Singularity::new(2.0, c(0.0, 0.0), c(0.2, 0.1));
        let left = omega_beta(&s, 2.0 - 1e-13);
        let right = omega_beta(&s, 2.0);
        let expect = (Complex64::i() * 2.0 * PI * s.beta).exp();
        assert!((left / right - expect).norm() < 1e-11);
    }

    #[test]
    fn symbol_examples() {
        let spec = SymbolSpec::smooth(TrigPolynomial::zero(), TrigPolynomial::zero(), 5).unwrap();
        assert_eq!(spec.symbol_eval(0.7).unwrap(), c(1.0, 0.0));
        let spec = SymbolSpec::smooth(TrigPolynomial::cosine(0.25), TrigPolynomial::zero(), 10).unwrap();
        assert_relative_eq!(spec.symbol_eval(0.0).unwrap().re, (-5.0f64).exp(), max_relative = 1e-14);
        let spec = SymbolSpec::new(
            TrigPolynomial::zero(),
            TrigPolynomial::zero(),
            vec![Singularity::real(0.0, 1.0, 0.0)],
            3,
        )
        .unwrap();
        assert_relative_eq!(spec.symbol_eval(PI).unwrap().re, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn structural_singularity_is_inserted() {
        let spec = SymbolSpec::new(
            TrigPolynomial::zero(),
            TrigPolynomial::zero(),
            vec![Singularity::real(1.0, 0.5, 0.0)],
            3,
        )
        .unwrap();
        assert_eq!(spec.singularities.len(), 2);
        assert_eq!(spec.singularities[0].theta, 0.0);
    }

    #[test]
    fn invalid_parameters_rejected() {
        let z = TrigPolynomial::zero();
        assert!(SymbolSpec::new(z.clone(), z.clone(), vec![Singularity::real(1.0, -1.2, 0.0)], 3).is_err());
        assert!(SymbolSpec::new(z.clone(), z.clone(), vec![Singularity::real(1.0, 0.0, 0.5)], 3).is_err());
        assert!(SymbolSpec::new(z.clone(), z, vec![Singularity::real(7.0, 0.0, 0.0)], 3).is_err());
    }

    #[test]
    fn identity_symbol_coefficients() {
        let spec = SymbolSpec::smooth(TrigPolynomial::zero(), TrigPolynomial::zero(), 4).unwrap();
        let t = fourier_coeffs(&spec, 6, 1e-13).unwrap();
        assert!((t.get(0) - c(1.0, 0.0)).norm() < 1e-14);
        for k in 1..=6 {
            assert!(t.get(k).norm() < 1e-14 && t.get(-k).norm() < 1e-14);
        }
        assert_eq!(t.log_scale, 0.0);
    }

    #[test]
    fn jump_coefficient_example() {
        let spec = SymbolSpec::new(
            TrigPolynomial::zero(),
            TrigPolynomial::zero(),
            vec![Singularity::real(0.0, 0.0, 0.2)],
            1,
        )
        .unwrap();
        let t = fourier_coeffs(&spec, 4, 1e-13).unwrap();
        let f1 = t.get(1) * t.log_scale.exp();
        assert_relative_eq!(f1.re, -0.233_872_, epsilon = 1e-5);
    }
}
