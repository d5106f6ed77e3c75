use nalgebra::linalg::Schur;
use num_complex::Complex64;

use super::{normalize, FloquetMatrix};
use crate::error::{Error, Result};
use crate::model::SolverConfig;

/// An unlabeled eigenpair of a [`FloquetMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct RawEigenPair {
    pub lambda: Complex64,
    /// Unit-norm coefficient vector, index `i` is mode `i - M`.
    pub vector: Vec<Complex64>,
    pub residual_norm: f64,
}

const INVERSE_ITERATION_STEPS: usize = 3;

/// All `2M+1` eigenpairs of `mat`.
///
/// Eigenvalues come from a complex Schur decomposition of the dense matrix
/// (no balancing is applied, so diagonal similarities are not silently
/// undone). Eigenvectors are obtained by inverse iteration on the tridiagonal
/// matrix. Every pair is checked against
/// `cfg.eig_deflation_tol · ‖H‖`; failing indices are reported together.
pub fn eigen_all(mat: &FloquetMatrix, cfg: &SolverConfig) -> Result<Vec<RawEigenPair>> {
    cfg.validate()?;
    let n = mat.dim();
    let dense = mat.to_dense();
    let max_iter = 200 * n;
    let schur = Schur::try_new(dense, f64::EPSILON, max_iter).ok_or_else(|| Error::EigenNonConvergence {
        indices: (0..n).collect(),
    })?;
    let (_, tri) = schur.unpack();
    let eigenvalues: Vec<Complex64> = (0..n).map(|i| tri[(i, i)]).collect();

    let hnorm = mat.norm_bound();
    let tol = cfg.eig_deflation_tol * hnorm.max(1.0);
    let mut out = Vec::with_capacity(n);
    let mut failed = Vec::new();
    for (i, &lambda) in eigenvalues.iter().enumerate() {
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            failed.push(i);
            continue;
        }
        let vector = inverse_iteration(mat, lambda, hnorm);
        let residual_norm = mat.residual_norm(lambda, &vector);
        if !(residual_norm < tol) {
            failed.push(i);
        }
        out.push(RawEigenPair {
            lambda,
            vector,
            residual_norm,
        });
    }
    if !failed.is_empty() {
        return Err(Error::EigenNonConvergence { indices: failed });
    }
    Ok(out)
}

/// Approximate null vector of `H - λ` by a few steps of inverse iteration.
pub(crate) fn inverse_iteration(mat: &FloquetMatrix, lambda: Complex64, hnorm: f64) -> Vec<Complex64> {
    let n = mat.dim();
    let lu = TridiagonalLu::factor(mat, lambda, f64::EPSILON * hnorm.max(1.0));
    // A deterministic, non-symmetric start vector avoids accidental
    // orthogonality to the wanted eigenvector.
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0, 0.37 * ((i % 7) as f64 - 3.0) / 3.0))
        .collect();
    normalize(&mut x);
    for _ in 0..INVERSE_ITERATION_STEPS {
        lu.solve_in_place(&mut x);
        normalize(&mut x);
    }
    x
}

/// LU factorization with partial pivoting of the shifted tridiagonal matrix
/// `H - μ`, in the layout of LAPACK's `gttrf`.
struct TridiagonalLu {
    dl: Vec<Complex64>,
    d: Vec<Complex64>,
    du: Vec<Complex64>,
    du2: Vec<Complex64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(mat: &FloquetMatrix, mu: Complex64, tiny: f64) -> Self {
        let n = mat.dim();
        let mut d: Vec<Complex64> = mat.diagonal.iter().map(|&x| x - mu).collect();
        let mut dl = vec![mat.subdiagonal_value; n.saturating_sub(1)];
        let mut du = vec![mat.superdiagonal_value; n.saturating_sub(1)];
        let mut du2 = vec![Complex64::new(0.0, 0.0); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].l1_norm() >= dl[i].l1_norm() {
                if d[i] == Complex64::new(0.0, 0.0) {
                    d[i] = Complex64::new(tiny, 0.0);
                }
                let f = dl[i] / d[i];
                dl[i] = f;
                d[i + 1] -= f * du[i];
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        for di in d.iter_mut() {
            if di.norm() < tiny {
                *di = Complex64::new(tiny, 0.0);
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve_in_place(&self, x: &mut [Complex64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            let xi = x[i];
            x[i + 1] -= self.dl[i] * xi;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            if i + 1 < n {
                acc -= self.du[i] * x[i + 1];
            }
            if i + 2 < n {
                acc -= self.du2[i] * x[i + 2];
            }
            x[i] = acc / self.d[i];
            // keep the iterate finite when the shift is an exact eigenvalue
            if !(x[i].re.is_finite() && x[i].im.is_finite()) {
                let scale = x.iter().fold(0.0f64, |m, z| {
                    if z.re.is_finite() && z.im.is_finite() {
                        m.max(z.norm())
                    } else {
                        m
                    }
                });
                for z in x.iter_mut() {
                    *z = if z.re.is_finite() && z.im.is_finite() {
                        *z / scale.max(1.0) * f64::EPSILON
                    } else {
                        Complex64::new(1.0, 0.0)
                    };
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::build_matrix;
    use crate::model::{PotentialCoeffs, QuasiMomentum};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lu_solves_random_system() {
        let pot = PotentialCoeffs::new(c(0.7, -0.2), c(1.3, 0.4)).unwrap();
        let m = build_matrix(&pot, QuasiMomentum::new(0.3).unwrap(), 6).unwrap();
        let mu = c(50.0, 2.0);
        let lu = TridiagonalLu::factor(&m, mu, 1e-300);
        let x_true: Vec<Complex64> = (0..m.dim()).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let mut rhs = m.apply_shifted(mu, &x_true);
        lu.solve_in_place(&mut rhs);
        for (a, b) in rhs.iter().zip(&x_true) {
            assert!((a - b).norm() < 1e-10 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn free_eigenvalues_are_the_diagonal() {
        let m = build_matrix(&PotentialCoeffs::zero(), QuasiMomentum::new(0.7).unwrap(), 10).unwrap();
        let pairs = eigen_all(&m, &SolverConfig::default()).unwrap();
        assert_eq!(pairs.len(), 21);
        let mut got: Vec<f64> = pairs.iter().map(|p| p.lambda.re).collect();
        let mut want = m.diagonal.clone();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 4.0 * f64::EPSILON * w.abs());
        }
    }

    #[test]
    fn residuals_are_small() {
        let pot = PotentialCoeffs::new(c(1.0, 0.0), c(0.0, 2.0)).unwrap();
        let m = build_matrix(&pot, QuasiMomentum::new(0.3).unwrap(), 20).unwrap();
        let cfg = SolverConfig::default();
        for p in eigen_all(&m, &cfg).unwrap() {
            assert!(p.residual_norm < cfg.eig_deflation_tol * m.norm_bound());
            assert!((super::super::norm(&p.vector) - 1.0).abs() < 1e-12);
        }
    }
}
