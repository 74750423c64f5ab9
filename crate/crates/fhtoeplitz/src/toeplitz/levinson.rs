use super::LogDet;
use crate::error::{Error, Result};
use crate::symbol::FourierTable;
use num_complex::Complex64;

/// Output of the bi-orthogonal Szegő recursion.
///
/// With <p, q> = (1/2π)∫ p(z) conj(q(z)) f dθ the monic polynomials satisfy
/// P_{k+1} = z P_k − c_k Q_k^*, Q_{k+1} = z Q_k − d_k P_k^*, and the pivots
/// h_k = <P_k, Q_k> = D_{k+1}/D_k obey h_{k+1} = h_k (1 − c_k conj(d_k)).
#[derive(Clone, Debug)]
pub struct Ladder {
    /// log h_k for k = 0..n−1, principal branch per step
    pub log_h: Vec<Complex64>,
    pub c: Vec<Complex64>,
    pub d: Vec<Complex64>,
    /// monic P_k coefficients (ascending powers), k = 0..=n, when requested
    pub p: Vec<Vec<Complex64>>,
    pub q: Vec<Vec<Complex64>>,
}

fn reversed_conj(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().rev().map(|x| x.conj()).collect()
}

/// Runs the recursion up to degree n. `keep` retains every P_k, Q_k.
pub fn levinson_ladder(coeffs: &FourierTable, n: usize, keep: bool) -> Result<Ladder> {
    let needed = if keep { n } else { n.saturating_sub(1) };
    if needed > coeffs.k_max {
        return Err(Error::domain(format!("need coefficients up to |k| = {needed}")));
    }
    let f = |k: i64| coeffs.get(k);
    let f0 = f(0);
    if f0.norm() == 0.0 {
        return Err(Error::numerical("recursion breakdown: f_0 = 0"));
    }
    let mut p = vec![Complex64::new(1.0, 0.0)];
    let mut q = vec![Complex64::new(1.0, 0.0)];
    let mut h = f0;
    let mut out = Ladder { log_h: Vec::with_capacity(n), c: vec![], d: vec![], p: vec![], q: vec![] };
    if keep {
        out.p.push(p.clone());
        out.q.push(q.clone());
    }
    for k in 0..n {
        out.log_h.push(h.ln());
        if k + 1 == n && !keep {
            break;
        }
        let mut num_c = Complex64::new(0.0, 0.0);
        let mut num_d = Complex64::new(0.0, 0.0);
        for j in 0..=k {
            num_c += p[j] * f(-(j as i64) - 1);
            num_d += q[j].conj() * f(j as i64 + 1);
        }
        let c = num_c / h;
        let d = (num_d / h).conj();
        let qs = reversed_conj(&q);
        let ps = reversed_conj(&p);
        let mut p_next = vec![Complex64::new(0.0, 0.0); k + 2];
        let mut q_next = vec![Complex64::new(0.0, 0.0); k + 2];
        for j in 0..=k {
            p_next[j + 1] += p[j];
            q_next[j + 1] += q[j];
            p_next[j] -= c * qs[j];
            q_next[j] -= d * ps[j];
        }
        let ratio = Complex64::new(1.0, 0.0) - c * d.conj();
        if ratio.norm() < 1e-14 {
            return Err(Error::numerical(format!("recursion breakdown at degree {}", k + 1)));
        }
        h *= ratio;
        p = p_next;
        q = q_next;
        out.c.push(c);
        out.d.push(d);
        if keep {
            out.p.push(p.clone());
            out.q.push(q.clone());
        }
    }
    Ok(out)
}

/// Hermitian positive-definite Levinson/Szegő recursion: log D_n and the
/// reflection coefficients.
pub fn logdet_levinson(coeffs: &FourierTable, n: usize) -> Result<(LogDet, Vec<Complex64>)> {
    let f0 = coeffs.get(0);
    if !coeffs.is_hermitian(1e-12 * f0.norm().max(1e-300)) || f0.re <= 0.0 {
        return Err(Error::domain("Levinson recursion needs a Hermitian positive table"));
    }
    let f = |k: i64| coeffs.get(k);
    let mut p = vec![Complex64::new(1.0, 0.0)];
    let mut h = f0.re;
    let mut log_mod = 0.0;
    let mut refl = Vec::with_capacity(n);
    for k in 0..n {
        if !(h > 0.0) {
            return Err(Error::numerical(format!("nonpositive error variance at step {k}: not HPD")));
        }
        log_mod += h.ln();
        if k + 1 == n {
            break;
        }
        let mut num = Complex64::new(0.0, 0.0);
        for (j, pj) in p.iter().enumerate() {
            num += pj * f(-(j as i64) - 1);
        }
        let c = num / h;
        if c.norm() >= 1.0 {
            return Err(Error::numerical(format!("reflection coefficient |c| ≥ 1 at step {k}: not HPD")));
        }
        let ps = reversed_conj(&p);
        let mut next = vec![Complex64::new(0.0, 0.0); k + 2];
        for j in 0..=k {
            next[j + 1] += p[j];
            next[j] -= c * ps[j];
        }
        p = next;
        h *= 1.0 - c.norm_sqr();
        refl.push(c);
    }
    Ok((
        LogDet { log_modulus: log_mod, phase: 0.0, scale_correction: n as f64 * coeffs.log_scale },
        refl,
    ))
}
