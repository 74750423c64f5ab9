use super::dense::logdet_general;
use super::levinson::levinson_ladder;
use crate::error::{Error, Result};
use crate::quadrature::{Breakpoint, CircleRule};
use crate::symbol::{fourier_coeffs, FourierTable, SymbolSpec};
use num_complex::Complex64;
use std::f64::consts::PI;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Monic orthogonal polynomials p_k/κ_k and p̂_k/κ_k for k = 0..=k_max,
/// coefficients in ascending powers, with log κ_k^{−2} = log(D_{k+1}/D_k).
///
/// The pairing is (1/2π)∫ p_k(z) z^{−j} f dθ = 0 and (1/2π)∫ p̂_k(z^{−1}) z^j f dθ = 0
/// for j < k.
#[derive(Clone, Debug, PartialEq)]
pub struct OpucFamily {
    pub p: Vec<Vec<Complex64>>,
    pub p_hat: Vec<Vec<Complex64>>,
    /// log(D_{k+1}/D_k) of the unscaled symbol
    pub log_h: Vec<Complex64>,
}

impl OpucFamily {
    pub fn k_max(&self) -> usize {
        self.p.len() - 1
    }

    /// κ_k² = D_k/D_{k+1}.
    pub fn kappa_sq(&self, k: usize) -> Complex64 {
        (-self.log_h[k]).exp()
    }

    /// Christoffel–Darboux kernel Σ_{k<n} p̂_k(z^{−1}) p_k(z).
    pub fn cd_kernel(&self, n: usize, z: Complex64) -> Complex64 {
        (0..n)
            .map(|k| self.kappa_sq(k) * horner(&self.p_hat[k], z.inv()) * horner(&self.p[k], z))
            .sum()
    }
}

/// Both sides of an identity and |lhs − rhs|.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

impl IdentityCheck {
    fn new(lhs: Complex64, rhs: Complex64) -> Self {
        IdentityCheck { lhs, rhs, residual: (lhs - rhs).norm() }
    }

    pub fn relative(&self) -> f64 {
        self.residual / self.lhs.norm().max(self.rhs.norm()).max(1e-300)
    }
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(C0, |acc, a| acc * z + a)
}

fn horner_deriv(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().enumerate().skip(1).rev().fold(C0, |acc, (i, a)| acc * z + a * i as f64)
}

/// Determinant by Gaussian elimination, exact zero on a vanishing pivot.
fn det_small(mut m: Vec<Vec<Complex64>>) -> Complex64 {
    let n = m.len();
    let mut det = C1;
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm())).unwrap();
        if m[piv][col].norm() == 0.0 {
            return C0;
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let u = m[col][col];
        det *= u;
        for r in col + 1..n {
            let factor = m[r][col] / u;
            for j in col..n {
                let v = m[col][j];
                m[r][j] -= factor * v;
            }
        }
    }
    det
}

/// Brute-force family from moment determinants (small k_max only).
pub fn opuc_from_moments(coeffs: &FourierTable, k_max: usize) -> Result<OpucFamily> {
    if k_max > 8 {
        return Err(Error::domain("moment-determinant construction is limited to k_max ≤ 8"));
    }
    if k_max > coeffs.k_max {
        return Err(Error::domain(format!("need coefficients up to |k| = {k_max}")));
    }
    let f = |k: i64| coeffs.get(k);
    let d = |k: usize| -> Complex64 {
        det_small((0..k).map(|j| (0..k).map(|c| f(j as i64 - c as i64)).collect()).collect())
    };
    let dets: Vec<Complex64> = (0..=k_max + 1).map(d).collect();
    if let Some(k) = dets.iter().position(|x| x.norm() == 0.0) {
        return Err(Error::numerical(format!("vanishing moment determinant D_{k}")));
    }
    let mut fam = OpucFamily { p: vec![], p_hat: vec![], log_h: vec![] };
    for k in 0..=k_max {
        let mut p = vec![C0; k + 1];
        let mut ph = vec![C0; k + 1];
        for i in 0..=k {
            let sign = if (k + i) % 2 == 0 { 1.0 } else { -1.0 };
            // rows j < k of [f_{j−c}], last row 1, z, .., z^k: drop column i
            let minor_p: Vec<Vec<Complex64>> = (0..k)
                .map(|j| (0..=k).filter(|&c| c != i).map(|c| f(j as i64 - c as i64)).collect())
                .collect();
            // columns c < k of [f_{j−c}], last column 1, z, .., z^k: drop row i
            let minor_h: Vec<Vec<Complex64>> = (0..=k)
                .filter(|&j| j != i)
                .map(|j| (0..k).map(|c| f(j as i64 - c as i64)).collect())
                .collect();
            p[i] = det_small(minor_p) * sign / dets[k];
            ph[i] = det_small(minor_h) * sign / dets[k];
        }
        fam.p.push(p);
        fam.p_hat.push(ph);
        fam.log_h.push((dets[k + 1] / dets[k]).ln() + coeffs.log_scale);
    }
    Ok(fam)
}

/// Family from the bi-orthogonal Szegő recursion, O(k_max²).
pub fn opuc_szego(coeffs: &FourierTable, k_max: usize) -> Result<OpucFamily> {
    if k_max == 0 {
        let f0 = coeffs.get(0);
        if f0.norm() == 0.0 {
            return Err(Error::numerical("recursion breakdown: f_0 = 0"));
        }
        return Ok(OpucFamily { p: vec![vec![C1]], p_hat: vec![vec![C1]], log_h: vec![f0.ln() + coeffs.log_scale] });
    }
    let lad = levinson_ladder(coeffs, k_max, true)?;
    let last = C1 - lad.c[k_max - 1] * lad.d[k_max - 1].conj();
    if last.norm() < 1e-14 {
        return Err(Error::numerical(format!("recursion breakdown at degree {}", k_max + 1)));
    }
    let mut log_h: Vec<Complex64> = lad.log_h.iter().map(|l| l + coeffs.log_scale).collect();
    log_h.push(log_h[k_max - 1] + last.ln());
    Ok(OpucFamily {
        p: lad.p,
        p_hat: lad.q.iter().map(|q| q.iter().map(|x| x.conj()).collect()).collect(),
        log_h,
    })
}

/// (1/2π)∫ h(s)/(s − z) dθ, s = e^{iθ}. Near the circle the value h(ζ)s/ζ at the
/// projection ζ is subtracted and its transform (1 inside, 0 outside) added back.
fn cauchy<H: Fn(f64) -> Result<Complex64>>(
    spec: &SymbolSpec,
    extra: f64,
    h: H,
    z: Complex64,
) -> Result<Complex64> {
    let r = z.norm();
    let dist = (r - 1.0).abs();
    let phi = z.arg().rem_euclid(2.0 * PI);
    let near_singular = spec.singularities.iter().any(|s| {
        !s.is_trivial() && ((phi - s.theta + PI).rem_euclid(2.0 * PI) - PI).abs() < 1e-2
    });
    if near_singular && dist < 1e-3 {
        return Err(Error::numerical(format!(
            "z is within {dist:.1e} of the circle next to a singular point; Cauchy transform inaccurate"
        )));
    }
    let mut breaks = spec.breakpoints();
    breaks.push(Breakpoint { theta: phi, exponent: 0.0, graded: r > 0.0, jump: false });
    let rule = CircleRule::with_breakpoints(&breaks, spec.bandwidth() + extra, 32);
    let subtract = !near_singular && r > 0.0;
    let zeta = Complex64::from_polar(1.0, phi);
    let h_zeta = if subtract { h(phi)? } else { C0 };
    let mut acc = C0;
    for i in 0..rule.len() {
        let t = rule.theta[i];
        let s = Complex64::from_polar(1.0, t);
        let hv = h(t)?;
        let num = if subtract { hv - h_zeta * s / zeta } else { hv };
        acc += num / (s - z) * (rule.weight[i] * rule.ln_sing[i].exp());
    }
    acc /= 2.0 * PI;
    if subtract && r < 1.0 {
        acc += h_zeta / zeta;
    }
    Ok(acc)
}

/// First column of Y: (p_n/κ_n)(z) and −κ_{n−1} z^{n−1} p̂_{n−1}(z^{−1}), with z-derivatives.
fn first_column(family: &OpucFamily, n: usize, z: Complex64) -> [Complex64; 4] {
    let p = &family.p[n];
    // z^{n−1} p̂(z^{−1}) = Σ a_i z^{n−1−i}
    let rev: Vec<Complex64> = family.p_hat[n - 1].iter().rev().copied().collect();
    let k2 = family.kappa_sq(n - 1);
    [horner(p, z), -k2 * horner(&rev, z), horner_deriv(p, z), -k2 * horner_deriv(&rev, z)]
}

/// Y(z) of the orthogonal-polynomial Riemann–Hilbert problem, z off the circle.
pub fn assemble_y(family: &OpucFamily, spec: &SymbolSpec, n: usize, z: Complex64) -> Result<[[Complex64; 2]; 2]> {
    if n == 0 || family.k_max() < n {
        return Err(Error::domain(format!("family must extend to degree {n} (n ≥ 1)")));
    }
    if (z.norm() - 1.0).abs() == 0.0 {
        return Err(Error::domain("z lies on the unit circle"));
    }
    let [y11, y21, _, _] = first_column(family, n, z);
    let p = &family.p[n];
    let ph = &family.p_hat[n - 1];
    let k2 = family.kappa_sq(n - 1);
    let extra = n as f64 + 2.0;
    let y12 = cauchy(
        spec,
        extra,
        |t| {
            let s = Complex64::from_polar(1.0, t);
            Ok(horner(p, s) * spec.symbol_eval(t)? * s.powi(1 - n as i32))
        },
        z,
    )?;
    let y22 = -k2
        * cauchy(
            spec,
            extra,
            |t| {
                let s = Complex64::from_polar(1.0, t);
                Ok(horner(ph, s.inv()) * spec.symbol_eval(t)?)
            },
            z,
        )?;
    Ok([[y11, y12], [y21, y22]])
}

fn det2(y: &[[Complex64; 2]; 2]) -> Complex64 {
    y[0][0] * y[1][1] - y[0][1] * y[1][0]
}

/// Max-entry residual of Y_+ − Y_−·[[1, z^{−n}f], [0, 1]] at e^{iθ}, with Y_±
/// evaluated at radii 1 ∓ delta.
pub fn jump_residual(family: &OpucFamily, spec: &SymbolSpec, n: usize, theta: f64, delta: f64) -> Result<f64> {
    let zeta = Complex64::from_polar(1.0, theta);
    let yp = assemble_y(family, spec, n, zeta * (1.0 - delta))?;
    let ym = assemble_y(family, spec, n, zeta * (1.0 + delta))?;
    let jf = zeta.powi(-(n as i32)) * spec.symbol_eval(theta)?;
    let mut worst: f64 = 0.0;
    for row in 0..2 {
        let expect = [ym[row][0], ym[row][0] * jf + ym[row][1]];
        for col in 0..2 {
            worst = worst.max((yp[row][col] - expect[col]).norm());
        }
    }
    Ok(worst)
}

/// [Y^{−1}Y′]_{21} z^{−n+1} (Y′ by central differences) against Σ_{k<n} p̂_k(z^{−1}) p_k(z).
pub fn verify_cd_identity(family: &OpucFamily, spec: &SymbolSpec, n: usize, z: Complex64) -> Result<IdentityCheck> {
    let y = assemble_y(family, spec, n, z)?;
    let step = 1e-6 * z.norm().max(1e-3);
    let yp = assemble_y(family, spec, n, z + step)?;
    let ym = assemble_y(family, spec, n, z - step)?;
    let d = |r: usize, c: usize| (yp[r][c] - ym[r][c]) / (2.0 * step);
    let det = det2(&y);
    // row 2 of Y^{−1} is (−Y21, Y11)/det
    let lhs = (-y[1][0] * d(0, 0) + y[0][0] * d(1, 0)) / det * z.powi(1 - n as i32);
    Ok(IdentityCheck::new(lhs, family.cd_kernel(n, z)))
}

fn logdet_small(spec: &SymbolSpec, n: usize) -> Result<Complex64> {
    let table = fourier_coeffs(spec, n, 1e-14)?;
    Ok(logdet_general(&table, n)?.value())
}

/// d/ds log D_n(sV) by central differences against (1/2π)∫ [Y^{−1}Y′]_{21} z^{−n+1} ∂_s f dθ.
pub fn verify_diff_identity(spec: &SymbolSpec, s: f64) -> Result<IdentityCheck> {
    let n = spec.n;
    if n == 0 || n > 8 {
        return Err(Error::domain("differential identity check is limited to 1 ≤ n ≤ 8"));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::domain("deformation parameter s must lie in [0, 1]"));
    }
    let at = |s: f64| spec.with_v(spec.v.scale(Complex64::new(s, 0.0)));
    let step = 1e-5;
    let lhs = (logdet_small(&at(s + step), n)? - logdet_small(&at(s - step), n)?) / (2.0 * step);

    let fs = at(s);
    let table = fourier_coeffs(&fs, n + 1, 1e-14)?;
    let family = opuc_szego(&table, n)?;
    let rule = fs.rule(2.0 * n as f64 + 2.0, 32);
    let mut rhs = C0;
    for i in 0..rule.len() {
        let t = rule.theta[i];
        let z = Complex64::from_polar(1.0, t);
        let [y11, y21, dy11, dy21] = first_column(&family, n, z);
        let kernel = (y11 * dy21 - y21 * dy11) * z.powi(1 - n as i32);
        let dsf = -(n as f64) * spec.v.eval(t) * fs.symbol_eval(t)?;
        rhs += kernel * dsf * (rule.weight[i] * rule.ln_sing[i].exp());
    }
    rhs /= 2.0 * PI;
    Ok(IdentityCheck::new(lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Singularity;
    use crate::trig::TrigPolynomial;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_table(rng: &mut ChaCha8Rng, k_max: usize) -> FourierTable {
        let vals: Vec<Complex64> = (0..=2 * k_max)
            .map(|_| c(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)))
            .collect();
        FourierTable::from_fn(k_max, 0.0, |k| {
            let v = vals[(k + k_max as i64) as usize];
            if k == 0 { v + 2.0 } else { v }
        })
    }

    fn random_symbol(seed: u64, n: usize) -> SymbolSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<(i64, Complex64)> = (-4..=4)
            .filter(|k| *k != 0)
            .map(|k| (k, c(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1))))
            .collect();
        SymbolSpec::smooth(TrigPolynomial::zero(), TrigPolynomial::from_pairs(&w), n).unwrap()
    }

    #[test]
    fn identity_symbol_family() {
        let t = FourierTable::from_fn(6, 0.0, |k| if k == 0 { C1 } else { C0 });
        for fam in [opuc_from_moments(&t, 5).unwrap(), opuc_szego(&t, 5).unwrap()] {
            for k in 0..=5 {
                let mut e = vec![C0; k + 1];
                e[k] = C1;
                assert_eq!(fam.p[k], e);
                assert_eq!(fam.p_hat[k], e);
                assert!((fam.kappa_sq(k) - C1).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn first_degree_by_hand() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random_table(&mut rng, 3);
        let fam = opuc_from_moments(&t, 2).unwrap();
        let f0 = t.get(0);
        assert!((fam.p[1][0] + t.get(-1) / f0).norm() < 1e-14);
        assert!((fam.p_hat[1][0] + t.get(1) / f0).norm() < 1e-14);
        assert_eq!(fam.p[1][1], C1);
    }

    #[test]
    fn recursion_matches_determinants() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let t = random_table(&mut rng, 9);
            let a = opuc_from_moments(&t, 8).unwrap();
            let b = opuc_szego(&t, 8).unwrap();
            for k in 0..=8 {
                for i in 0..=k {
                    assert!((a.p[k][i] - b.p[k][i]).norm() < 1e-8);
                    assert!((a.p_hat[k][i] - b.p_hat[k][i]).norm() < 1e-8);
                }
                assert!((a.log_h[k] - b.log_h[k]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn product_of_pivots_is_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = random_table(&mut rng, 9);
        let fam = opuc_from_moments(&t, 8).unwrap();
        for n in 1..=8 {
            let sum: Complex64 = fam.log_h[..n].iter().sum();
            let ld = logdet_general(&t, n).unwrap().value();
            assert!((sum.exp() - ld.exp()).norm() < 1e-10 * ld.exp().norm());
        }
    }

    #[test]
    fn orthogonality_under_quadrature() {
        let spec = SymbolSpec::new(
            TrigPolynomial::zero(),
            TrigPolynomial::from_pairs(&[(1, c(0.2, 0.1)), (-2, c(0.1, 0.0))]),
            vec![Singularity::real(1.0, 0.5, 0.0), Singularity::new(4.0, C0, c(0.0, 0.1))],
            8,
        )
        .unwrap();
        let table = fourier_coeffs(&spec, 9, 1e-14).unwrap();
        let fam = opuc_from_moments(&table, 8).unwrap();
        let qr = spec.rule(20.0, 32);
        for k in 1..=8 {
            for j in 0..k {
                let a = qr.integrate(|t| {
                    let z = Complex64::from_polar(1.0, t);
                    horner(&fam.p[k], z) * z.powi(-(j as i32)) * spec.symbol_eval(t).unwrap()
                }) / (2.0 * PI);
                let b = qr.integrate(|t| {
                    let z = Complex64::from_polar(1.0, t);
                    horner(&fam.p_hat[k], z.inv()) * z.powi(j as i32) * spec.symbol_eval(t).unwrap()
                }) / (2.0 * PI);
                assert!(a.norm() < 1e-10 && b.norm() < 1e-10, "k={k} j={j}: {a} {b}");
            }
        }
    }

    #[test]
    fn det_y_is_one() {
        let spec = random_symbol(21, 4);
        let table = fourier_coeffs(&spec, 5, 1e-14).unwrap();
        let fam = opuc_szego(&table, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let r = if rng.random_bool(0.5) { rng.random_range(0.1..0.9) } else { rng.random_range(1.1..3.0) };
            let z = Complex64::from_polar(r, rng.random_range(0.0..2.0 * PI));
            let y = assemble_y(&fam, &spec, 4, z).unwrap();
            assert!((det2(&y) - C1).norm() < 1e-8, "z={z}: det={}", det2(&y));
        }
    }

    #[test]
    fn identity_symbol_y() {
        let spec = SymbolSpec::smooth(TrigPolynomial::zero(), TrigPolynomial::zero(), 1).unwrap();
        let t = fourier_coeffs(&spec, 2, 1e-14).unwrap();
        let fam = opuc_szego(&t, 1).unwrap();
        let z = c(0.3, 0.2);
        let y = assemble_y(&fam, &spec, 1, z).unwrap();
        // inside: Y = [[z, 1], [−1, 0]]; outside: [[z, 0], [−1, 1/z]]
        assert!((y[0][0] - z).norm() < 1e-15);
        assert!((y[0][1] - C1).norm() < 1e-12);
        assert!((y[1][0] + C1).norm() < 1e-15);
        assert!(y[1][1].norm() < 1e-12);
        let z = c(2.0, 1.0);
        let y = assemble_y(&fam, &spec, 1, z).unwrap();
        assert!(y[0][1].norm() < 1e-12);
        assert!((y[1][1] - z.inv()).norm() < 1e-12);
    }

    #[test]
    fn jump_condition() {
        let spec = SymbolSpec::new(
            TrigPolynomial::cosine(0.1),
            TrigPolynomial::from_pairs(&[(1, c(0.1, 0.05))]),
            vec![Singularity::real(2.0, 0.5, 0.0), Singularity::new(4.5, C0, c(0.0, 0.1))],
            4,
        )
        .unwrap();
        let table = fourier_coeffs(&spec, 5, 1e-14).unwrap();
        let fam = opuc_szego(&table, 4).unwrap();
        for theta in [0.5, 1.3, 3.0, 5.5] {
            let r = jump_residual(&fam, &spec, 4, theta, 1e-8).unwrap();
            assert!(r < 1e-6, "theta={theta}: {r}");
        }
        let near = Complex64::from_polar(1.0 + 1e-5, 2.0);
        assert!(assemble_y(&fam, &spec, 4, near).is_err());
    }

    #[test]
    fn christoffel_darboux() {
        let one = SymbolSpec::smooth(TrigPolynomial::zero(), TrigPolynomial::zero(), 2).unwrap();
        let t = fourier_coeffs(&one, 3, 1e-14).unwrap();
        let fam = opuc_szego(&t, 2).unwrap();
        let chk = verify_cd_identity(&fam, &one, 2, c(2.0, 0.0)).unwrap();
        assert!((chk.rhs - c(2.0, 0.0)).norm() < 1e-14);
        assert!(chk.residual < 1e-6, "{chk:?}");

        let pos = SymbolSpec::smooth(TrigPolynomial::cosine(0.1), TrigPolynomial::cosine(0.3), 4).unwrap();
        let t = fourier_coeffs(&pos, 5, 1e-14).unwrap();
        let fam = opuc_szego(&t, 4).unwrap();
        let chk = verify_cd_identity(&fam, &pos, 4, c(0.4, 0.3)).unwrap();
        assert!(chk.residual < 1e-6, "{chk:?}");

        let jump = SymbolSpec::new(
            TrigPolynomial::zero(),
            TrigPolynomial::zero(),
            vec![Singularity::new(2.0, C0, c(0.0, 0.1))],
            4,
        )
        .unwrap();
        let t = fourier_coeffs(&jump, 5, 1e-14).unwrap();
        let fam = opuc_szego(&t, 4).unwrap();
        let chk = verify_cd_identity(&fam, &jump, 4, c(1.5, -0.5)).unwrap();
        assert!(chk.residual < 1e-5, "{chk:?}");
    }

    #[test]
    fn differential_identity() {
        let flat = SymbolSpec::smooth(TrigPolynomial::zero(), TrigPolynomial::cosine(0.2), 4).unwrap();
        let chk = verify_diff_identity(&flat, 0.5).unwrap();
        assert!(chk.lhs.norm() < 1e-8 && chk.rhs.norm() < 1e-12, "{chk:?}");

        let smooth = SymbolSpec::smooth(TrigPolynomial::cosine(0.2), TrigPolynomial::zero(), 4).unwrap();
        let chk = verify_diff_identity(&smooth, 0.5).unwrap();
        assert!(chk.relative() < 1e-5, "{chk:?}");

        let sing = SymbolSpec::new(
            TrigPolynomial::cosine(0.2),
            TrigPolynomial::zero(),
            vec![Singularity::real(1.5, 0.5, 0.0)],
            4,
        )
        .unwrap();
        let chk = verify_diff_identity(&sing, 0.5).unwrap();
        assert!(chk.relative() < 1e-4, "{chk:?}");
    }
}
