//! Closed-form large-n constants for D_n and for the exponential moments of
//! the point process, and the cumulant predictions derived from them.

use crate::error::{Error, Result};
use crate::special::{log_barnes_g, log_g_deriv_at_1, EULER_GAMMA};
use crate::symbol::{log_chord, Singularity, SymbolSpec};
use crate::trig::{cdf_mu, equilibrium_density, log_kernel_integral, measure_integral, szego_sum, EquilibriumDensity, TrigPolynomial};
use num_complex::Complex64;
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;
const C0: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpansionKind {
    /// C1 n² + C2 n + C3 log n + C4
    Thm11,
    /// D2 n + D3 log n + D4 (V = 0)
    Thm41,
    /// c1 n² + c2 n + c3 for log D_n(V)/D_n(0)
    Prop44,
    /// C̃1 n + C̃2 log n + C̃3 for the log-MGF
    Thm17,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticExpansion {
    pub kind: ExpansionKind,
    pub constants: Vec<Complex64>,
    /// the error is O(n^{error_exponent})
    pub error_exponent: f64,
}

impl AsymptoticExpansion {
    /// The expansion without its error term.
    pub fn predict(&self, n: f64) -> Complex64 {
        let c = &self.constants;
        let ln = n.ln();
        match self.kind {
            ExpansionKind::Thm11 => c[0] * n * n + c[1] * n + c[2] * ln + c[3],
            ExpansionKind::Thm41 | ExpansionKind::Thm17 => c[0] * n + c[1] * ln + c[2],
            ExpansionKind::Prop44 => c[0] * n * n + c[1] * n + c[2],
        }
    }
}

fn regular_density(v: &TrigPolynomial) -> Result<EquilibriumDensity> {
    let eq = equilibrium_density(v);
    if !eq.regular {
        return Err(Error::domain(format!(
            "V is not one-cut regular: min psi = {:.6e} at theta = {:.6}",
            eq.min_value, eq.argmin
        )));
    }
    Ok(eq)
}

/// max |Re β_k| over k ≥ 1 (θ_k ≠ 0).
fn beta_max(sings: &[Singularity]) -> f64 {
    sings.iter().filter(|s| s.theta != 0.0).map(|s| s.beta.re.abs()).fold(0.0, f64::max)
}

fn log_g_ratio(alpha: Complex64, beta: Complex64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    Ok(log_barnes_g(one + alpha / 2.0 + beta)? + log_barnes_g(one + alpha / 2.0 - beta)? - log_barnes_g(one + alpha)?)
}

/// Pairwise j < k terms shared by C4 and D4.
fn pair_terms(sings: &[Singularity]) -> Complex64 {
    let i = Complex64::i();
    let mut s = C0;
    for k in 0..sings.len() {
        for j in 0..k {
            let (a, b) = (&sings[j], &sings[k]);
            s += (a.alpha * i * b.beta - b.alpha * i * a.beta) / 2.0 * (b.theta - a.theta - PI);
            s += (a.beta * b.beta * 2.0 - a.alpha * b.alpha / 2.0) * log_chord(a.theta, b.theta);
        }
    }
    s
}

fn sorted(sings: &[Singularity]) -> Vec<Singularity> {
    let mut s = sings.to_vec();
    if !s.iter().any(|x| x.theta == 0.0) {
        s.push(Singularity::real(0.0, 0.0, 0.0));
    }
    s.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    s
}

/// V = 0 constants (D2, D3, D4).
pub fn thm41_constants(w: &TrigPolynomial, singularities: &[Singularity]) -> Result<AsymptoticExpansion> {
    let sings = sorted(singularities);
    for s in &sings {
        s.validate()?;
    }
    let (w0, wp, wm) = w.laurent_split();
    let mut d3 = C0;
    let mut d4 = szego_sum(w) + pair_terms(&sings);
    for s in &sings {
        let t = s.t();
        d3 += s.alpha * s.alpha / 4.0 - s.beta * s.beta;
        d4 += (s.beta - s.alpha / 2.0) * wp.eval_z(t) - (s.beta + s.alpha / 2.0) * wm.eval_z(t);
        d4 += log_g_ratio(s.alpha, s.beta)?;
    }
    Ok(AsymptoticExpansion {
        kind: ExpansionKind::Thm41,
        constants: vec![w0, d3, d4],
        error_exponent: -1.0 + 2.0 * beta_max(&sings),
    })
}

/// Weight −log(2πψ) multiplying β² − α²/4 in the constant term. It comes from
/// integrating 1/ψ_s along the path ψ_s = (1 − s)/2π + sψ, s ∈ [0, 1], and
/// vanishes for V = 0.
pub fn density_weight(psi: f64) -> f64 {
    -(TWO_PI * psi).ln()
}

/// (1/2π − ψ)/ψ: the first-order expansion of [`density_weight`] about
/// ψ = 1/2π, i.e. the integrand frozen at s = 1. Kept for comparison only.
pub fn linearized_density_weight(psi: f64) -> f64 {
    (1.0 / TWO_PI - psi) / psi
}

/// log D_n(V)/D_n(0) constants (c1, c2, c3).
pub fn prop44_constants(spec: &SymbolSpec) -> Result<AsymptoticExpansion> {
    let eq = regular_density(&spec.v)?;
    let v0 = spec.v.coeff(0);
    let (_, vp, _) = spec.v.laurent_split();
    let c1 = -v0 / 2.0 - measure_integral(&spec.v, &eq) / 2.0;
    let mut c2 = measure_integral(&spec.w, &eq) - spec.w.coeff(0);
    let mut c3 = C0;
    let i = Complex64::i();
    for s in &spec.singularities {
        let t = s.t();
        c2 += s.alpha / 2.0 * (spec.v.eval_z(t) - v0) - 2.0 * i * s.beta * vp.eval_z(t).im;
        let psi = eq.at(s.theta);
        c3 += (s.beta * s.beta - s.alpha * s.alpha / 4.0) * density_weight(psi);
    }
    Ok(AsymptoticExpansion {
        kind: ExpansionKind::Prop44,
        constants: vec![c1, c2, c3],
        error_exponent: -1.0 + 2.0 * beta_max(&spec.singularities),
    })
}

/// Full constants (C1, C2, C3, C4) for a one-cut regular V.
pub fn thm11_constants(spec: &SymbolSpec) -> Result<AsymptoticExpansion> {
    let eq = regular_density(&spec.v)?;
    let v0 = spec.v.coeff(0);
    let w0 = spec.w.coeff(0);
    let (_, vp, _) = spec.v.laurent_split();
    let (_, wp, wm) = spec.w.laurent_split();
    let i = Complex64::i();
    let c1 = -v0 / 2.0 - measure_integral(&spec.v, &eq) / 2.0;
    let mut c2 = measure_integral(&spec.w, &eq);
    let mut c3 = C0;
    let mut c4 = szego_sum(&spec.w) + pair_terms(&spec.singularities);
    for s in &spec.singularities {
        let t = s.t();
        let psi = eq.at(s.theta);
        c2 += s.alpha / 2.0 * (spec.v.eval_z(t) - v0) - 2.0 * i * s.beta * vp.eval_z(t).im;
        c3 += s.alpha * s.alpha / 4.0 - s.beta * s.beta;
        c4 += -s.alpha / 2.0 * (spec.w.eval_z(t) - w0) + s.beta * (wp.eval_z(t) - wm.eval_z(t));
        c4 += log_g_ratio(s.alpha, s.beta)?;
        c4 += (s.beta * s.beta - s.alpha * s.alpha / 4.0) * density_weight(psi);
    }
    Ok(AsymptoticExpansion {
        kind: ExpansionKind::Thm11,
        constants: vec![c1, c2, c3, c4],
        error_exponent: -1.0 + 2.0 * beta_max(&spec.singularities),
    })
}

/// Exponential-moment constants together with the determinant parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentExpansion {
    pub expansion: AsymptoticExpansion,
    /// β_k = u_k/(2πi) for k = 0..=m, with u_0 = −Σ u_k
    pub betas: Vec<Complex64>,
    /// Σ_{k≥1} −iβ_kθ_k; D_n(α, β, V, W)/D_n(0, 0, V, 0) = e^{n·this}·E[…]
    pub prefactor_rate: Complex64,
}

/// Constants (C̃1, C̃2, C̃3) of log E[Π e^{W} Π |p_n(t_k)|^{α_k} Π e^{u_k N_n(θ_k)}].
/// `alphas` has m+1 entries (index 0 at θ_0 = 0), `us` and `thetas` have m.
pub fn thm17_constants(
    v: &TrigPolynomial,
    w: &TrigPolynomial,
    alphas: &[Complex64],
    us: &[Complex64],
    thetas: &[f64],
) -> Result<MomentExpansion> {
    let m = thetas.len();
    if us.len() != m || alphas.len() != m + 1 {
        return Err(Error::domain("need m+1 alphas and m pairs (u_k, theta_k)"));
    }
    for w2 in thetas.windows(2) {
        if w2[0] >= w2[1] {
            return Err(Error::domain("thetas must be strictly increasing"));
        }
    }
    if thetas.iter().any(|t| !(*t > 0.0 && *t < TWO_PI)) {
        return Err(Error::domain("thetas must lie in (0, 2pi)"));
    }
    if us.iter().any(|u| !(u.im.abs() < PI)) {
        return Err(Error::domain("Im u_k must lie in (-pi, pi)"));
    }
    if alphas.iter().any(|a| !(a.re > -1.0)) {
        return Err(Error::domain("Re alpha_k must exceed -1"));
    }
    let eq = regular_density(v)?;
    let mut u = vec![-us.iter().sum::<Complex64>()];
    u.extend_from_slice(us);
    let mut th = vec![0.0];
    th.extend_from_slice(thetas);
    let (_, wp, wm) = w.laurent_split();
    let i = Complex64::i();

    let mut c1 = measure_integral(w, &eq);
    let mut c2 = C0;
    let mut c3 = szego_sum(w);
    let mut betas = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let (a, uk) = (alphas[k], u[k]);
        let t = Complex64::from_polar(1.0, th[k]);
        let psi = eq.at(th[k]);
        c1 += a * log_kernel_integral(&eq, t)?;
        if k > 0 {
            c1 += uk * cdf_mu(&eq, th[k]);
        }
        c2 += a * a / 4.0 + uk * uk / (4.0 * PI * PI);
        c3 += -a * (wp.eval_z(t) + wm.eval_z(t)) / 2.0 + uk / PI * (wp.eval_z(t) - wm.eval_z(t)) / (2.0 * i);
        let beta = uk / (2.0 * PI * i);
        c3 += log_g_ratio(a, beta)?;
        c3 -= (uk * uk / (PI * PI) + a * a) / 4.0 * density_weight(psi);
        betas.push(beta);
        for j in 0..k {
            c3 += (alphas[j] * uk - a * u[j]) / (4.0 * PI) * (th[k] - th[j] - PI);
            c3 -= (u[j] * uk / (2.0 * PI * PI) + alphas[j] * a / 2.0) * log_chord(th[j], th[k]);
        }
    }
    let u_max = us.iter().map(|u| u.im.abs()).fold(0.0, f64::max);
    let prefactor_rate = (1..=m).map(|k| -i * betas[k] * th[k]).sum();
    Ok(MomentExpansion {
        expansion: AsymptoticExpansion {
            kind: ExpansionKind::Thm17,
            constants: vec![c1, c2, c3],
            error_exponent: -1.0 + u_max / PI,
        },
        betas,
        prefactor_rate,
    })
}

/// A linear statistic of the point process.
#[derive(Clone, Debug, PartialEq)]
pub enum Statistic {
    /// Σ_j W(e^{iφ_j}) for real-valued W
    Smooth(TrigPolynomial),
    /// log|p_n(e^{iθ})|
    LogAbs(f64),
    /// N_n(θ)
    Counting(f64),
}

/// Leading-order κ_1..κ_max_order.
pub fn predicted_cumulants(v: &TrigPolynomial, stat: &Statistic, n: usize, max_order: usize) -> Result<Vec<f64>> {
    let eq = regular_density(v)?;
    let nf = n as f64;
    let mut out = Vec::with_capacity(max_order);
    match stat {
        Statistic::Smooth(w) => {
            if !w.is_real_on_circle(1e-13) {
                return Err(Error::domain("smooth statistic needs a real-valued W"));
            }
            for j in 1..=max_order {
                out.push(match j {
                    1 => nf * measure_integral(w, &eq).re,
                    2 => 2.0 * szego_sum(w).re,
                    _ => 0.0,
                });
            }
        }
        Statistic::LogAbs(theta) => {
            let t = Complex64::from_polar(1.0, *theta);
            let psi = eq.at(*theta);
            for j in 1..=max_order {
                out.push(match j {
                    1 => nf * log_kernel_integral(&eq, t)?,
                    2 => nf.ln() / 2.0 + (1.0 + EULER_GAMMA) / 2.0 - density_weight(psi) / 2.0,
                    _ => (-1.0 + 2f64.powi(1 - j as i32)) * log_g_deriv_at_1(j as u32),
                });
            }
        }
        Statistic::Counting(theta) => {
            if !(*theta > 0.0 && *theta < TWO_PI) {
                return Err(Error::domain("counting statistic needs theta in (0, 2pi)"));
            }
            let psi_t = eq.at(*theta);
            let psi_1 = eq.at(0.0);
            let chord = log_chord(*theta, 0.0);
            let pi2 = PI * PI;
            for j in 1..=max_order {
                out.push(match j {
                    1 => nf * cdf_mu(&eq, *theta),
                    2 => {
                        nf.ln() / pi2 + (1.0 + EULER_GAMMA + chord) / pi2
                            - (density_weight(psi_1) + density_weight(psi_t)) / (2.0 * pi2)
                    }
                    j if j % 2 == 1 => 0.0,
                    j => {
                        let h = (j - 2) / 2;
                        let sign = if (h + 1) % 2 == 0 { 1.0 } else { -1.0 };
                        sign / (4f64.powi(h as i32) * PI.powi(j as i32)) * log_g_deriv_at_1(j as u32)
                    }
                });
            }
        }
    }
    Ok(out)
}

/// Classical locations η_k with ∫_0^{η_k} dμ_V = k/n, k = 1..n (η_n = 2π).
pub fn classical_locations(eq: &EquilibriumDensity, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        if k == n {
            out.push(TWO_PI);
            continue;
        }
        let target = k as f64 / n as f64;
        let (mut lo, mut hi) = (0.0, TWO_PI);
        let mut x = TWO_PI * target;
        for _ in 0..100 {
            let f = cdf_mu(eq, x) - target;
            if f.abs() < 1e-15 {
                break;
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let step = f / eq.at(x);
            let next = x - step;
            x = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if step.abs() < 1e-15 {
                break;
            }
        }
        out.push(x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn trivial_symbol() {
        let spec = SymbolSpec::smooth(TrigPolynomial::zero(), TrigPolynomial::zero(), 10).unwrap();
        let e = thm11_constants(&spec).unwrap();
        assert!(e.constants.iter().all(|x| x.norm() < 1e-15));
        let d = thm41_constants(&TrigPolynomial::zero(), &[]).unwrap();
        assert!(d.constants.iter().all(|x| x.norm() < 1e-15));
        let p = prop44_constants(&spec).unwrap();
        assert!(p.constants.iter().all(|x| x.norm() < 1e-15));
    }

    #[test]
    fn gaussian_potential() {
        let g = 0.3;
        let spec = SymbolSpec::smooth(TrigPolynomial::cosine(g), TrigPolynomial::zero(), 10).unwrap();
        let e = thm11_constants(&spec).unwrap();
        assert!(close(e.constants[0], c(g * g, 0.0), 1e-15));
        for k in 1..4 {
            assert!(e.constants[k].norm() < 1e-15);
        }
        let p = prop44_constants(&spec).unwrap();
        assert!(close(p.constants[0], c(g * g, 0.0), 1e-15));
        assert_eq!(e.error_exponent, -1.0);
    }

    #[test]
    fn single_root_at_one() {
        let a = 0.8;
        let spec = SymbolSpec::new(TrigPolynomial::zero(), TrigPolynomial::zero(), vec![Singularity::real(0.0, a, 0.0)], 5).unwrap();
        let e = thm11_constants(&spec).unwrap();
        assert!(close(e.constants[2], c(a * a / 4.0, 0.0), 1e-15));
        let g = 2.0 * crate::special::log_barnes_g_real(1.0 + a / 2.0).unwrap() - crate::special::log_barnes_g_real(1.0 + a).unwrap();
        assert!(close(e.constants[3], c(g, 0.0), 1e-14));
    }

    #[test]
    fn szego_strong_limit() {
        let a = 0.3;
        let d = thm41_constants(&TrigPolynomial::cosine(a), &[]).unwrap();
        assert!(close(d.constants[0], C0, 1e-15));
        assert!(close(d.constants[2], c(a * a, 0.0), 1e-15));
        let d = thm41_constants(&TrigPolynomial::zero(), &[Singularity::new(0.0, c(0.4, 0.1), c(0.2, -0.1))]).unwrap();
        let expect = log_g_ratio(c(0.4, 0.1), c(0.2, -0.1)).unwrap();
        assert!(close(d.constants[2], expect, 1e-15));
    }

    #[test]
    fn decomposition_on_an_example() {
        let spec = SymbolSpec::new(
            TrigPolynomial::from_pairs(&[(1, c(0.1, 0.05)), (-1, c(0.1, -0.05)), (2, c(0.02, 0.0)), (-2, c(0.02, 0.0))]),
            TrigPolynomial::from_pairs(&[(1, c(0.2, 0.1)), (-3, c(-0.1, 0.3)), (0, c(0.5, 0.0))]),
            vec![Singularity::new(0.0, c(0.3, 0.0), c(0.1, 0.0)), Singularity::new(2.0, c(0.5, 0.2), c(-0.2, 0.1))],
            10,
        )
        .unwrap();
        let full = thm11_constants(&spec).unwrap();
        let d = thm41_constants(&spec.w, &spec.singularities).unwrap();
        let p = prop44_constants(&spec).unwrap();
        assert!(close(full.constants[0], p.constants[0], 1e-12));
        assert!(close(full.constants[1], d.constants[0] + p.constants[1], 1e-12));
        assert!(close(full.constants[2], d.constants[1], 1e-12));
        assert!(close(full.constants[3], d.constants[2] + p.constants[2], 1e-12));
        assert_abs_diff_eq!(full.error_exponent, -0.6, epsilon = 1e-15);
    }

    #[test]
    fn non_regular_rejected() {
        let spec = SymbolSpec::smooth(TrigPolynomial::cosine(0.6), TrigPolynomial::zero(), 10).unwrap();
        assert!(matches!(thm11_constants(&spec), Err(Error::Domain(_))));
    }

    #[test]
    fn moment_constants_examples() {
        let w = TrigPolynomial::from_pairs(&[(1, c(0.2, 0.0)), (-1, c(0.2, 0.0)), (2, c(0.1, 0.0)), (-2, c(0.1, 0.0))]);
        let v = TrigPolynomial::cosine(0.1);
        let r = thm17_constants(&v, &w, &[C0], &[], &[]).unwrap();
        let eq = equilibrium_density(&v);
        assert!(close(r.expansion.constants[0], measure_integral(&w, &eq), 1e-15));
        assert!(r.expansion.constants[1].norm() < 1e-15);
        assert!(close(r.expansion.constants[2], szego_sum(&w), 1e-15));

        let u = 0.7;
        let r = thm17_constants(&TrigPolynomial::zero(), &TrigPolynomial::zero(), &[C0, C0], &[c(u, 0.0)], &[PI]).unwrap();
        assert!(close(r.expansion.constants[1], c(2.0 * u * u / (4.0 * PI * PI), 0.0), 1e-15));
        assert!(close(r.betas[1], c(0.0, -u / (2.0 * PI)), 1e-15));
        assert!(close(r.betas[0], -r.betas[1], 1e-15));
        assert!(close(r.prefactor_rate, c(-u / 2.0, 0.0), 1e-15));
    }

    #[test]
    fn moment_constants_second_derivative_is_counting_variance() {
        // ∂²_u of C̃2 log n + C̃3 at u = 0 equals the counting variance display
        let v = TrigPolynomial::cosine(0.25);
        let theta = 2.0;
        let n = 512;
        let f = |u: f64| -> Complex64 {
            thm17_constants(&v, &TrigPolynomial::zero(), &[C0, C0], &[c(u, 0.0)], &[theta])
                .unwrap()
                .expansion
                .predict(n as f64)
        };
        let h = 1e-3;
        let second = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        let pred = predicted_cumulants(&v, &Statistic::Counting(theta), n, 2).unwrap();
        assert_abs_diff_eq!(second.re, pred[1], epsilon = 1e-6);
        let first = (f(h) - f(-h)) / (2.0 * h);
        assert_abs_diff_eq!(first.re, pred[0], epsilon = 1e-6);
    }

    #[test]
    fn cumulant_examples() {
        let a = 0.3;
        let k = predicted_cumulants(&TrigPolynomial::zero(), &Statistic::Smooth(TrigPolynomial::cosine(a)), 100, 3).unwrap();
        assert_abs_diff_eq!(k[1], 2.0 * a * a, epsilon = 1e-15);
        let n = 200;
        let k = predicted_cumulants(&TrigPolynomial::zero(), &Statistic::LogAbs(1.0), n, 3).unwrap();
        assert_abs_diff_eq!(k[1], (n as f64).ln() / 2.0 + (1.0 + EULER_GAMMA) / 2.0, epsilon = 1e-14);
        let k = predicted_cumulants(&TrigPolynomial::cosine(0.2), &Statistic::Counting(PI), n, 6).unwrap();
        assert_eq!(k[2], 0.0);
        assert_eq!(k[4], 0.0);
        // κ4 = (log G)⁗(1)/(4π⁴)
        assert_abs_diff_eq!(k[3], log_g_deriv_at_1(4) / (4.0 * PI.powi(4)), epsilon = 1e-15);
    }

    #[test]
    fn classical_location_examples() {
        let eq = equilibrium_density(&TrigPolynomial::zero());
        let eta = classical_locations(&eq, 8);
        for (k, e) in eta.iter().enumerate() {
            assert_abs_diff_eq!(*e, TWO_PI * (k + 1) as f64 / 8.0, epsilon = 1e-12);
        }
        let eq = equilibrium_density(&TrigPolynomial::cosine(0.25));
        let eta = classical_locations(&eq, 64);
        assert_abs_diff_eq!(eta[31], PI, epsilon = 1e-12);
        for (k, e) in eta.iter().enumerate().take(63) {
            assert_abs_diff_eq!(cdf_mu(&eq, *e), (k + 1) as f64 / 64.0, epsilon = 1e-12);
        }
    }
}
