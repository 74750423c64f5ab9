//! Gauss–Jacobi / Gauss–Legendre rules and composite panel rules on the circle
//! with algebraic endpoint singularities at prescribed angles.

use crate::special::log_gamma_real;
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

/// Nodes and weights on [−1, 1] for the weight (1 − x)^a (1 + x)^b.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// P_q^{(a,b)}(x) and its derivative.
fn jacobi_eval(q: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    let mut p1 = (a - b + (2.0 + a + b) * x) / 2.0;
    let mut p2 = 1.0;
    let mut temp = 2.0 + a + b;
    for j in 2..=q {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        temp = 2.0 * jf + a + b;
        let a1 = 2.0 * jf * (jf + a + b) * (temp - 2.0);
        let a2 = (temp - 1.0) * (a * a - b * b + temp * (temp - 2.0) * x);
        let a3 = 2.0 * (jf - 1.0 + a) * (jf - 1.0 + b) * temp;
        p1 = (a2 * p2 - a3 * p3) / a1;
    }
    if q == 1 {
        temp = 2.0 + a + b;
        p2 = 1.0;
    }
    let qf = q as f64;
    let dp = (qf * (a - b - temp * x) * p1 + 2.0 * (qf + a) * (qf + b) * p2) / (temp * (1.0 - x * x));
    (p1, dp)
}

/// Eigenvalues of the symmetric tridiagonal Jacobi matrix by Sturm bisection.
fn tridiagonal_eigenvalues(diag: &[f64], off2: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let count_below = |x: f64| -> usize {
        let mut c = 0;
        let mut d = diag[0] - x;
        if d < 0.0 {
            c += 1;
        }
        for i in 1..n {
            let prev = if d == 0.0 { f64::EPSILON } else { d };
            d = diag[i] - x - off2[i] / prev;
            if d < 0.0 {
                c += 1;
            }
        }
        c
    };
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if count_below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Gauss–Jacobi rule of order q for (1 − x)^a (1 + x)^b, a, b > −1.
pub fn gauss_jacobi(q: usize, a: f64, b: f64) -> GaussRule {
    assert!(q >= 1 && a > -1.0 && b > -1.0);
    let s = a + b;
    let mut diag = vec![0.0; q];
    let mut off2 = vec![0.0; q];
    diag[0] = (b - a) / (s + 2.0);
    for k in 1..q {
        let kf = k as f64;
        let t = 2.0 * kf + s;
        diag[k] = (b * b - a * a) / (t * (t + 2.0));
        off2[k] = if k == 1 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + s).powi(2) * (3.0 + s))
        } else {
            4.0 * kf * (kf + a) * (kf + b) * (kf + s) / (t * t * (t + 1.0) * (t - 1.0))
        };
    }
    let mut nodes = tridiagonal_eigenvalues(&diag, &off2);
    let qf = q as f64;
    let log_c = log_gamma_real(qf + a + 1.0).unwrap() + log_gamma_real(qf + b + 1.0).unwrap()
        - log_gamma_real(qf + s + 1.0).unwrap()
        - log_gamma_real(qf + 1.0).unwrap()
        + (s + 1.0) * 2f64.ln();
    let mut weights = Vec::with_capacity(q);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = jacobi_eval(q, a, b, *x);
            let step = p / dp;
            *x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = jacobi_eval(q, a, b, *x);
        weights.push((log_c - ((1.0 - *x * *x) * dp * dp).ln()).exp());
    }
    GaussRule { nodes, weights }
}

pub fn gauss_legendre(q: usize) -> GaussRule {
    gauss_jacobi(q, 0.0, 0.0)
}

/// A singular point on the circle: the integrand behaves like |θ − θ_k|^{exponent}
/// times a smooth factor, times |θ − θ_k|^{i·oscillation} when graded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Breakpoint {
    pub theta: f64,
    pub exponent: f64,
    pub graded: bool,
    /// a jump discontinuity sits here (forces a panel edge)
    pub jump: bool,
}

impl Breakpoint {
    pub fn plain(theta: f64) -> Self {
        Breakpoint { theta, exponent: 0.0, graded: false, jump: false }
    }

    fn singular(&self) -> bool {
        self.exponent != 0.0 || self.graded
    }
}

/// Composite rule on [0, 2π): ∫ g dθ ≈ Σ w_i g(θ_i) e^{ln_sing_i}, where the
/// factor e^{ln_sing_i} divides out the endpoint power built into Gauss–Jacobi
/// weights (so callers pass the full integrand g).
#[derive(Clone, Debug, Default)]
pub struct CircleRule {
    pub theta: Vec<f64>,
    pub weight: Vec<f64>,
    pub ln_sing: Vec<f64>,
}

impl CircleRule {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Uniform trapezoid rule with `n` nodes.
    pub fn trapezoid(n: usize) -> Self {
        CircleRule {
            theta: (0..n).map(|j| TWO_PI * j as f64 / n as f64).collect(),
            weight: vec![TWO_PI / n as f64; n],
            ln_sing: vec![0.0; n],
        }
    }

    /// ∫_0^{2π} g(θ) dθ for a function without hidden singular factor.
    pub fn integrate<F: Fn(f64) -> num_complex::Complex64>(&self, g: F) -> num_complex::Complex64 {
        let mut s = num_complex::Complex64::new(0.0, 0.0);
        for i in 0..self.len() {
            s += g(self.theta[i]) * (self.weight[i] * self.ln_sing[i].exp());
        }
        s
    }

    fn push_gl(&mut self, rule: &GaussRule, lo: f64, hi: f64) {
        let half = 0.5 * (hi - lo);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            self.theta.push(lo + half * (x + 1.0));
            self.weight.push(half * w);
            self.ln_sing.push(0.0);
        }
    }

    /// Panel [p, p + h] (dir = +1) or [p − h, p] (dir = −1) with the singular
    /// endpoint at p and a Gauss–Jacobi rule in the local variable.
    fn push_gj(&mut self, rule: &GaussRule, p: f64, h: f64, dir: f64, exponent: f64) {
        let half = 0.5 * h;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            // rule built with weight (1 + x)^exponent, x = −1 at the singular end
            let dist = half * (x + 1.0);
            self.theta.push(p + dir * dist);
            self.weight.push(half.powf(1.0 + exponent) * w);
            self.ln_sing.push(-exponent * dist.ln());
        }
    }

    fn push_singular_end(
        &mut self,
        rules: &mut RuleCache,
        bp: &Breakpoint,
        p: f64,
        h: f64,
        dir: f64,
        q: usize,
    ) {
        if !bp.graded {
            let r = rules.jacobi(q, bp.exponent);
            self.push_gj(&r, p, h, dir, bp.exponent);
            return;
        }
        // geometric grading towards p, innermost panel Gauss–Jacobi
        let levels = ((h.log2() + 16.0 * 10f64.log2() / (1.0 + bp.exponent)).ceil() as i64).clamp(1, 60) as usize;
        let gl = rules.jacobi(q, 0.0);
        let mut outer = h;
        for _ in 0..levels {
            let inner = 0.5 * outer;
            let (lo, hi) = if dir > 0.0 { (p + inner, p + outer) } else { (p - outer, p - inner) };
            self.push_gl(&gl, lo, hi);
            outer = inner;
        }
        let r = rules.jacobi(q, bp.exponent);
        self.push_gj(&r, p, outer, dir, bp.exponent);
    }

    /// Panels between consecutive breakpoints; `bandwidth` is the largest
    /// frequency (or exponential rate) the integrand carries.
    pub fn with_breakpoints(breaks: &[Breakpoint], bandwidth: f64, q: usize) -> Self {
        let mut pts: Vec<Breakpoint> = breaks
            .iter()
            .map(|b| Breakpoint { theta: b.theta.rem_euclid(TWO_PI), ..*b })
            .collect();
        if !pts.iter().any(|b| b.theta == 0.0) {
            pts.push(Breakpoint::plain(0.0));
        }
        pts.sort_by(|a, b| a.theta.total_cmp(&b.theta));
        pts.dedup_by(|a, b| {
            if a.theta == b.theta {
                b.exponent += a.exponent;
                b.graded |= a.graded;
                b.jump |= a.jump;
                true
            } else {
                false
            }
        });
        let bandwidth = bandwidth.max(1.0);
        if pts.len() == 1 && !pts[0].singular() && !pts[0].jump {
            let n = ((1.25 * bandwidth).ceil() as usize + 32).max(64);
            return CircleRule::trapezoid(n);
        }
        let h_max = 1.9 * q as f64 / bandwidth;
        let mut rule = CircleRule::default();
        let mut cache = RuleCache::default();
        let gl = cache.jacobi(q, 0.0);
        for i in 0..pts.len() {
            let left = pts[i];
            let (right, b) = if i + 1 < pts.len() { (pts[i + 1], pts[i + 1].theta) } else { (pts[0], TWO_PI) };
            let a = left.theta;
            let len = b - a;
            let mut panels = (len / h_max).ceil().max(1.0) as usize;
            if left.singular() && right.singular() {
                panels = panels.max(2);
            }
            let h = len / panels as f64;
            for j in 0..panels {
                let lo = a + h * j as f64;
                let hi = if j + 1 == panels { b } else { lo + h };
                if j == 0 && left.singular() {
                    rule.push_singular_end(&mut cache, &left, a, hi - lo, 1.0, q);
                } else if j + 1 == panels && right.singular() {
                    rule.push_singular_end(&mut cache, &right, b, hi - lo, -1.0, q);
                } else {
                    rule.push_gl(&gl, lo, hi);
                }
            }
        }
        for t in rule.theta.iter_mut() {
            *t = t.rem_euclid(TWO_PI);
        }
        rule
    }
}

#[derive(Default)]
struct RuleCache {
    rules: Vec<(usize, f64, GaussRule)>,
}

impl RuleCache {
    fn jacobi(&mut self, q: usize, exponent: f64) -> GaussRule {
        if let Some(r) = self.rules.iter().find(|r| r.0 == q && r.1 == exponent) {
            return r.2.clone();
        }
        let r = gauss_jacobi(q, 0.0, exponent);
        self.rules.push((q, exponent, r.clone()));
        r
    }
}
