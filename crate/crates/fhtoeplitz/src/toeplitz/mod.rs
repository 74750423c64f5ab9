//! Exact finite-n Toeplitz determinants, orthogonal polynomials on the unit
//! circle, and the Riemann–Hilbert identities they satisfy.

mod dense;
mod levinson;
mod measure;
mod opuc;

pub use dense::{build_toeplitz, det_lu, logdet_general, CMatrix};
pub use levinson::{levinson_ladder, logdet_levinson, Ladder};
pub use measure::{log_h_ladder, logdet_measure, logdet_on_rule, MEASURE_ORDER};
pub use opuc::{
    assemble_y, jump_residual, opuc_from_moments, opuc_szego, verify_cd_identity, verify_diff_identity, OpucFamily,
    IdentityCheck,
};

use crate::error::Result;
use crate::symbol::{fourier_coeffs, SymbolSpec};
use num_complex::Complex64;
use std::f64::consts::PI;

/// log D_n = log_modulus + scale_correction + i·phase, with the phase tracked
/// continuously rather than reduced modulo 2π.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDet {
    pub log_modulus: f64,
    pub phase: f64,
    pub scale_correction: f64,
}

impl LogDet {
    pub fn zero() -> Self {
        LogDet { log_modulus: 0.0, phase: 0.0, scale_correction: 0.0 }
    }

    /// The complex logarithm of D_n on the tracked branch.
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.log_modulus + self.scale_correction, self.phase)
    }

    pub fn det(&self) -> Complex64 {
        self.value().exp()
    }

    /// Shifts the phase by a multiple of 2π to land nearest `reference`.
    pub fn aligned_to(mut self, reference: f64) -> Self {
        let k = ((reference - self.phase) / (2.0 * PI)).round();
        self.phase += 2.0 * PI * k;
        self
    }
}

/// Which exact algorithm evaluates D_n.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Coefficient table plus Levinson (positive symbols) or LU; switches to
    /// the discrete-measure engine when e^{−nV} has a large dynamic range.
    Auto,
    Lu,
    Levinson,
    Measure,
}

/// Dynamic range n·max|V′| above which moment-based methods lose accuracy.
const MOMENT_RANGE_LIMIT: f64 = 8.0;

/// D_n at `spec.n`.
pub fn logdet(spec: &SymbolSpec, method: Method) -> Result<LogDet> {
    let n = spec.n;
    let method = match method {
        Method::Auto => {
            if n as f64 * spec.v.derivative_bound() > MOMENT_RANGE_LIMIT {
                Method::Measure
            } else if spec.is_positive() {
                Method::Levinson
            } else {
                Method::Lu
            }
        }
        m => m,
    };
    match method {
        Method::Measure => logdet_measure(spec, n),
        Method::Levinson => {
            let table = fourier_coeffs(spec, n, 1e-13)?;
            Ok(logdet_levinson(&table, n)?.0)
        }
        _ => {
            let table = fourier_coeffs(spec, n, 1e-13)?;
            logdet_general(&table, n)
        }
    }
}
