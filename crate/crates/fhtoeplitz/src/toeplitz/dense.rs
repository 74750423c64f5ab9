use super::levinson::levinson_ladder;
use super::LogDet;
use crate::error::{Error, Result};
use crate::symbol::FourierTable;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }
}

/// Entry (j, k) = f_{j−k}.
pub fn build_toeplitz(coeffs: &FourierTable, n: usize) -> Result<CMatrix> {
    if n == 0 || n - 1 > coeffs.k_max {
        return Err(Error::domain(format!(
            "need coefficients up to |k| = {} but the table stops at {}",
            n.saturating_sub(1),
            coeffs.k_max
        )));
    }
    let mut m = CMatrix::zeros(n);
    for j in 0..n {
        for k in 0..n {
            m.set(j, k, coeffs.get(j as i64 - k as i64));
        }
    }
    Ok(m)
}

/// LU with partial pivoting: (log|det|, Σ arg u_jj + π·swaps).
pub fn det_lu(mut m: CMatrix) -> Result<(f64, f64)> {
    let n = m.n;
    let amax = m.data.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if amax == 0.0 {
        return Err(Error::numerical("determinant is zero (zero matrix)"));
    }
    let mut log_mod = 0.0;
    let mut phase = 0.0;
    for col in 0..n {
        let (piv, pmax) = (col..n)
            .map(|r| (r, m.get(r, col).norm()))
            .fold((col, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if pmax < 1e-300 * amax {
            return Err(Error::numerical(format!(
                "matrix is singular to working precision (pivot {col}): determinant ≈ 0"
            )));
        }
        if piv != col {
            for j in 0..n {
                m.data.swap(piv * n + j, col * n + j);
            }
            phase += PI;
        }
        let u = m.get(col, col);
        log_mod += u.norm().ln();
        phase += u.arg();
        let uinv = u.inv();
        for r in col + 1..n {
            let factor = m.get(r, col) * uinv;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (top, bottom) = m.data.split_at_mut(r * n);
            let pivot_row = &top[col * n..col * n + n];
            let row = &mut bottom[..n];
            for j in col + 1..n {
                row[j] -= factor * pivot_row[j];
            }
        }
    }
    Ok((log_mod, phase))
}

/// Complex LU determinant of the Toeplitz matrix. The phase is placed on the
/// branch reached by accumulating arg(D_{k+1}/D_k) along k whenever the
/// ratio recursion runs through; otherwise it is reduced to (−π, π].
pub fn logdet_general(coeffs: &FourierTable, n: usize) -> Result<LogDet> {
    let m = build_toeplitz(coeffs, n)?;
    let (log_mod, raw_phase) = det_lu(m)?;
    let mut phase = (raw_phase + PI).rem_euclid(2.0 * PI) - PI;
    if coeffs.is_hermitian(1e-14 * coeffs.get(0).norm().max(1e-300)) && phase.abs() < 1e-8 {
        phase = 0.0;
    } else if let Ok(ladder) = levinson_ladder(coeffs, n, false) {
        let reference: f64 = ladder.log_h.iter().map(|l| l.im).sum();
        let k = ((reference - phase) / (2.0 * PI)).round();
        phase += 2.0 * PI * k;
    }
    Ok(LogDet { log_modulus: log_mod, phase, scale_correction: n as f64 * coeffs.log_scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table(vals: &[(i64, Complex64)], k_max: usize) -> FourierTable {
        FourierTable::from_fn(k_max, 0.0, |k| {
            vals.iter().find(|v| v.0 == k).map(|v| v.1).unwrap_or_default()
        })
    }

    #[test]
    fn small_examples() {
        let one = table(&[(0, Complex64::new(1.0, 0.0))], 5);
        let m = build_toeplitz(&one, 1).unwrap();
        assert_eq!(m.data, vec![Complex64::new(1.0, 0.0)]);
        let ld = logdet_general(&one, 5).unwrap();
        assert_eq!((ld.log_modulus, ld.phase), (0.0, 0.0));

        let t = table(
            &[(0, Complex64::new(1.0, 0.0)), (1, Complex64::new(0.25, 0.0)), (-1, Complex64::new(0.25, 0.0))],
            3,
        );
        let ld = logdet_general(&t, 2).unwrap();
        assert_relative_eq!(ld.log_modulus, 0.9375f64.ln(), max_relative = 1e-14);
        assert_eq!(ld.phase, 0.0);
    }

    #[test]
    fn layout_is_f_j_minus_k() {
        let t = FourierTable::from_fn(2, 0.0, |k| Complex64::new(k as f64, 0.5));
        let m = build_toeplitz(&t, 2).unwrap();
        assert_eq!(m.get(0, 1), t.get(-1));
        assert_eq!(m.get(1, 0), t.get(1));
        assert!(build_toeplitz(&t, 4).is_err());
    }

    #[test]
    fn singular_matrix_detected() {
        let t = FourierTable::from_fn(2, 0.0, |_| Complex64::new(1.0, 0.0));
        assert!(matches!(logdet_general(&t, 3), Err(Error::Numerical(_))));
    }
}
