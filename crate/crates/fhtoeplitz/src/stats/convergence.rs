use crate::asymptotics::{thm11_constants, thm17_constants, thm41_constants, AsymptoticExpansion};
use crate::error::{Error, Result};
use crate::symbol::SymbolSpec;
use crate::toeplitz::{logdet, Method};
use crate::trig::TrigPolynomial;
use num_complex::Complex64;
use std::f64::consts::PI;

use super::mgf::{exact_log_mgf, MgfQuery};

/// Differences below this are treated as numerical noise.
pub const DIFF_FLOOR: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Thm11,
    Thm41,
    Thm17,
}

impl std::str::FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm11" => Ok(Target::Thm11),
            "thm41" => Ok(Target::Thm41),
            "thm17" => Ok(Target::Thm17),
            _ => Err(Error::parse(format!("unknown target {s:?} (thm11, thm41, thm17)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub exact: Complex64,
    pub predicted: Complex64,
    pub abs_diff: f64,
    /// below the floor and left out of the fit
    pub excluded: bool,
    /// exact phase was shifted by a multiple of 2π to meet the prediction
    pub unwrapped: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    pub expansion: AsymptoticExpansion,
    /// least-squares slope of log|diff| against log n on the upper half of the grid
    pub slope: Option<f64>,
}

impl ConvergenceStudy {
    pub fn any_unwrapped(&self) -> bool {
        self.rows.iter().any(|r| r.unwrapped)
    }
}

/// Slope of the least-squares line through (x, y).
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Builds the table from exact values and an expansion.
pub fn tabulate(grid: &[usize], exact: &[Complex64], expansion: AsymptoticExpansion) -> ConvergenceStudy {
    let mut rows = Vec::with_capacity(grid.len());
    for (&n, &ex) in grid.iter().zip(exact) {
        let predicted = expansion.predict(n as f64);
        let mut exact = ex;
        let k = ((predicted.im - exact.im) / (2.0 * PI)).round();
        let unwrapped = k != 0.0;
        exact.im += 2.0 * PI * k;
        let abs_diff = (exact - predicted).norm();
        rows.push(ConvergenceRow { n, exact, predicted, abs_diff, excluded: abs_diff < DIFF_FLOOR, unwrapped });
    }
    let half = rows.len() / 2;
    let upper: Vec<&ConvergenceRow> = rows[half..].iter().filter(|r| !r.excluded).collect();
    let x: Vec<f64> = upper.iter().map(|r| (r.n as f64).ln()).collect();
    let y: Vec<f64> = upper.iter().map(|r| r.abs_diff.ln()).collect();
    ConvergenceStudy { slope: fit_slope(&x, &y), rows, expansion }
}

fn check_grid(grid: &[usize]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
        return Err(Error::domain("n-grid must be nonempty, positive and strictly increasing"));
    }
    Ok(())
}

/// Exact log D_n against the full constants (thm11) or the V = 0
/// constants (thm41, which drops V from the symbol).
pub fn determinant_study(spec: &SymbolSpec, grid: &[usize], target: Target) -> Result<ConvergenceStudy> {
    check_grid(grid)?;
    let (base, expansion) = match target {
        Target::Thm11 => (spec.clone(), thm11_constants(spec)?),
        Target::Thm41 => {
            let s = spec.with_v(TrigPolynomial::zero());
            let e = thm41_constants(&s.w, &s.singularities)?;
            (s, e)
        }
        Target::Thm17 => return Err(Error::domain("thm17 compares exponential moments; use moment_study")),
    };
    let exact: Vec<Complex64> = grid
        .iter()
        .map(|&n| logdet(&base.with_n(n), Method::Auto).map(|l| l.value()))
        .collect::<Result<_>>()?;
    Ok(tabulate(grid, &exact, expansion))
}

/// Exact log-MGF against the exponential-moment constants.
pub fn moment_study(query: &MgfQuery, grid: &[usize]) -> Result<ConvergenceStudy> {
    check_grid(grid)?;
    let m = thm17_constants(&query.v, &query.w, &query.alphas, &query.us, &query.thetas)?;
    let exact: Vec<Complex64> = grid
        .iter()
        .map(|&n| exact_log_mgf(&MgfQuery { n, ..query.clone() }))
        .collect::<Result<_>>()?;
    Ok(tabulate(grid, &exact, m.expansion))
}
