use crate::asymptotics::Statistic;
use crate::error::{Error, Result};
use crate::quadrature::CircleRule;
use crate::symbol::{Singularity, SymbolSpec};
use crate::toeplitz::{logdet_on_rule, MEASURE_ORDER};
use crate::trig::TrigPolynomial;
use num_complex::Complex64;
use std::f64::consts::PI;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// E[Π_j e^{W(e^{iφ_j})} Π_{k=0}^m |p_n(t_k)|^{α_k} Π_{k=1}^m e^{u_k N_n(θ_k)}].
/// `alphas[0]` sits at θ_0 = 0; u_0 = −Σ u_k is implied.
#[derive(Clone, Debug, PartialEq)]
pub struct MgfQuery {
    pub v: TrigPolynomial,
    pub w: TrigPolynomial,
    pub alphas: Vec<Complex64>,
    pub us: Vec<Complex64>,
    pub thetas: Vec<f64>,
    pub n: usize,
}

impl MgfQuery {
    pub fn plain(v: TrigPolynomial, n: usize) -> Self {
        MgfQuery { v, w: TrigPolynomial::zero(), alphas: vec![C0], us: vec![], thetas: vec![], n }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.thetas.len();
        if self.us.len() != m || self.alphas.len() != m + 1 {
            return Err(Error::domain("need m+1 alphas and m pairs (u_k, theta_k)"));
        }
        if self.thetas.iter().any(|t| !(*t > 0.0 && *t < 2.0 * PI)) || self.thetas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("thetas must be strictly increasing in (0, 2pi)"));
        }
        if self.us.iter().any(|u| !(u.im.abs() < PI)) {
            return Err(Error::domain("Im u_k must lie in (-pi, pi)"));
        }
        if self.alphas.iter().any(|a| !(a.re > -1.0)) {
            return Err(Error::domain("Re alpha_k must exceed -1"));
        }
        if self.n == 0 {
            return Err(Error::domain("n must be positive"));
        }
        Ok(())
    }

    /// β_k = u_k/(2πi), k = 0..=m.
    pub fn betas(&self) -> Vec<Complex64> {
        let to_beta = |u: Complex64| u / Complex64::new(0.0, 2.0 * PI);
        let mut b = vec![to_beta(-self.us.iter().sum::<Complex64>())];
        b.extend(self.us.iter().map(|u| to_beta(*u)));
        b
    }

    /// The symbol whose determinant is the numerator of the ratio.
    pub fn symbol(&self) -> Result<SymbolSpec> {
        self.validate()?;
        let betas = self.betas();
        let mut sings = vec![Singularity::new(0.0, self.alphas[0], betas[0])];
        for k in 0..self.thetas.len() {
            sings.push(Singularity::new(self.thetas[k], self.alphas[k + 1], betas[k + 1]));
        }
        SymbolSpec::new(self.v.clone(), self.w.clone(), sings, self.n)
    }

    fn is_real(&self) -> bool {
        self.w.is_real_on_circle(1e-14)
            && self.alphas.iter().all(|a| a.im == 0.0)
            && self.us.iter().all(|u| u.im == 0.0)
    }
}

/// log E[…] = log D_n(α, β, V, W) − log D_n(0, 0, V, 0) + n Σ_{k≥1} iβ_kθ_k, both
/// determinants taken on one shared quadrature rule.
pub fn exact_log_mgf(q: &MgfQuery) -> Result<Complex64> {
    let num = q.symbol()?;
    let den = SymbolSpec::smooth(q.v.clone(), TrigPolynomial::zero(), q.n)?;
    let bandwidth = num.bandwidth().max(den.bandwidth()) + q.n as f64;
    let rule = CircleRule::with_breakpoints(&num.breakpoints(), bandwidth, MEASURE_ORDER);
    let a = logdet_on_rule(&num, &rule, q.n)?.value();
    let b = logdet_on_rule(&den, &rule, q.n)?.value();
    let betas = q.betas();
    let i = Complex64::i();
    let pre: Complex64 = (0..q.thetas.len()).map(|k| i * betas[k + 1] * q.thetas[k]).sum();
    let out = a - b + pre * q.n as f64;
    if q.is_real() && out.im.abs() > 1e-9 * out.re.abs().max(1.0) {
        return Err(Error::numerical(format!("real exponential moment came out with phase {}", out.im)));
    }
    Ok(out)
}

pub fn exact_mgf(q: &MgfQuery) -> Result<Complex64> {
    Ok(exact_log_mgf(q)?.exp())
}

/// The query whose log-MGF in the parameter t generates the statistic's cumulants.
pub fn statistic_query(v: &TrigPolynomial, stat: &Statistic, n: usize, t: f64) -> Result<MgfQuery> {
    let t_c = Complex64::new(t, 0.0);
    let mut q = MgfQuery::plain(v.clone(), n);
    match stat {
        Statistic::Smooth(w) => q.w = w.scale(t_c),
        Statistic::LogAbs(theta) => {
            if *theta == 0.0 {
                q.alphas = vec![t_c];
            } else {
                q.alphas = vec![C0, t_c];
                q.us = vec![C0];
                q.thetas = vec![*theta];
            }
        }
        Statistic::Counting(theta) => {
            q.alphas = vec![C0, C0];
            q.us = vec![t_c];
            q.thetas = vec![*theta];
        }
    }
    q.validate()?;
    Ok(q)
}

/// Finite-difference settings for cumulant extraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StencilConfig {
    pub h: f64,
    /// 9-point half-width in steps
    pub half_width: usize,
    pub richardson: bool,
}

impl Default for StencilConfig {
    fn default() -> Self {
        StencilConfig { h: 0.05, half_width: 4, richardson: true }
    }
}

/// Fornberg's weights for derivatives 0..=max_deriv at nodes x, expanded about x0.
pub fn fornberg_weights(x0: f64, x: &[f64], max_deriv: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_deriv + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - x0;
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - x0;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// κ_1..κ_max_order (max_order ≤ 4) by central differences of the real log-MGF.
pub fn exact_cumulants(v: &TrigPolynomial, stat: &Statistic, n: usize, max_order: usize, cfg: &StencilConfig) -> Result<Vec<f64>> {
    if max_order == 0 || max_order > 4 {
        return Err(Error::domain("cumulant orders 1..=4 are supported"));
    }
    if !(cfg.h > 0.0) || cfg.half_width < 2 {
        return Err(Error::domain("stencil needs h > 0 and half-width ≥ 2"));
    }
    let p = cfg.half_width as i64;
    // offsets in units of h/2 when refining
    let unit = if cfg.richardson { cfg.h / 2.0 } else { cfg.h };
    let scale = if cfg.richardson { 2 } else { 1 };
    let mut needed: Vec<i64> = (-p..=p).map(|j| j * scale).collect();
    if cfg.richardson {
        needed.extend(-p..=p);
    }
    needed.sort();
    needed.dedup();
    let mut vals = std::collections::BTreeMap::new();
    for &j in &needed {
        let q = statistic_query(v, stat, n, j as f64 * unit)?;
        vals.insert(j, exact_log_mgf(&q)?.re);
    }
    let derivs = |step: i64| -> Vec<f64> {
        let xs: Vec<f64> = (-p..=p).map(|j| (j * step) as f64 * unit).collect();
        let w = fornberg_weights(0.0, &xs, max_order);
        (1..=max_order)
            .map(|d| (-p..=p).enumerate().map(|(i, j)| w[d][i] * vals[&(j * step)]).sum())
            .collect()
    };
    let coarse = derivs(scale);
    if !cfg.richardson {
        return Ok(coarse);
    }
    let fine = derivs(1);
    // central stencils of 2p+1 points: order 2p for d ≤ 2, 2p − 2 for d = 3, 4
    Ok((0..max_order)
        .map(|i| {
            let d = i + 1;
            let order = if d <= 2 { 2 * p } else { 2 * p - 2 } as i32;
            let r = 2f64.powi(order);
            (r * fine[i] - coarse[i]) / (r - 1.0)
        })
        .collect())
}
