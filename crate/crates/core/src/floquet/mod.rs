//! Truncated Floquet matrix of `H_t` and its eigenproblem.
//!
//! In the basis `e^{i(2πn+t)x}`, `n = -M..=M`, the operator is the tridiagonal
//! matrix with diagonal `(2πn+t)²`, superdiagonal `a` and subdiagonal `b`:
//! row `n` reads `(2πn+t)² c_n + a c_{n+1} + b c_{n-1}`. Index `i` of every
//! vector in this module corresponds to mode `n = i - M`.

mod eigen;
mod labels;
mod reduced;

pub use eigen::{eigen_all, RawEigenPair};
pub use labels::{eigenfunction_components, label_bands, localization_radius, EigenPair, LabeledSpectrum};
pub use reduced::{labeled_eigenpair, measure_gap, partner_mode, BranchSolution, GapEdge, GapMeasurement, ReducedPair};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{PotentialCoeffs, QuasiMomentum};

/// The `(2M+1) × (2M+1)` tridiagonal Floquet matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetMatrix {
    pub t: QuasiMomentum,
    pub half_width: usize,
    /// `(2πn+t)²` for `n = -M..=M`.
    pub diagonal: Vec<f64>,
    /// Constant subdiagonal entry (`b`).
    pub subdiagonal_value: Complex64,
    /// Constant superdiagonal entry (`a`).
    pub superdiagonal_value: Complex64,
}

pub fn build_matrix(pot: &PotentialCoeffs, t: QuasiMomentum, m: usize) -> Result<FloquetMatrix> {
    if m < 1 {
        return Err(Error::InvalidInput("truncation half-width must be >= 1".into()));
    }
    let mi = m as i64;
    let diagonal = (-mi..=mi).map(|n| t.free_eigenvalue(n)).collect();
    Ok(FloquetMatrix {
        t,
        half_width: m,
        diagonal,
        subdiagonal_value: pot.b(),
        superdiagonal_value: pot.a(),
    })
}

impl FloquetMatrix {
    pub fn dim(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn mode_of(&self, index: usize) -> i64 {
        index as i64 - self.half_width as i64
    }

    pub fn index_of(&self, mode: i64) -> Option<usize> {
        let i = mode + self.half_width as i64;
        (i >= 0 && (i as usize) < self.dim()).then_some(i as usize)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for i in 0..n {
            m[(i, i)] = Complex64::new(self.diagonal[i], 0.0);
            if i + 1 < n {
                m[(i, i + 1)] = self.superdiagonal_value;
                m[(i + 1, i)] = self.subdiagonal_value;
            }
        }
        m
    }

    /// `(H - λ) x`.
    pub fn apply_shifted(&self, lambda: Complex64, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = (self.diagonal[i] - lambda) * x[i];
                if i + 1 < n {
                    acc += self.superdiagonal_value * x[i + 1];
                }
                if i > 0 {
                    acc += self.subdiagonal_value * x[i - 1];
                }
                acc
            })
            .collect()
    }

    pub fn residual_norm(&self, lambda: Complex64, x: &[Complex64]) -> f64 {
        norm(&self.apply_shifted(lambda, x))
    }

    /// Frobenius-type bound on `‖H‖₂`.
    pub fn norm_bound(&self) -> f64 {
        let dmax = self.diagonal.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        dmax + self.subdiagonal_value.norm() + self.superdiagonal_value.norm()
    }
}

pub(crate) fn norm(x: &[Complex64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, z| m.max(z.re.abs()).max(z.im.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = x.iter().map(|z| (z / scale).norm_sqr()).sum();
    scale * s.sqrt()
}

pub(crate) fn normalize(x: &mut [Complex64]) {
    let n = norm(x);
    if n > 0.0 {
        for z in x.iter_mut() {
            *z /= n;
        }
    }
}
