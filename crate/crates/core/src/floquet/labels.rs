use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::RawEigenPair;
use crate::error::{Error, Result};
use crate::model::{BandIndex, QuasiMomentum, LOCALIZATION_MARGIN};

/// A labeled eigenvalue together with its unit-norm Fourier coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub label: BandIndex,
    pub lambda: Complex64,
    /// Index `i` is mode `i - M`.
    pub coeffs: Vec<Complex64>,
    /// Coefficient of mode `|n|`.
    pub u: Complex64,
    /// Coefficient of mode `-|n|` (zero for the label `0`).
    pub v: Complex64,
    pub residual_norm: f64,
}

impl EigenPair {
    pub fn half_width(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    pub fn coefficient(&self, mode: i64) -> Complex64 {
        let i = mode + self.half_width() as i64;
        if i < 0 || i as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[i as usize]
        }
    }

    pub(crate) fn from_vector(label: BandIndex, lambda: Complex64, coeffs: Vec<Complex64>, residual_norm: f64) -> Self {
        let m = ((coeffs.len() - 1) / 2) as i64;
        let n = label.signed().unsigned_abs() as i64;
        let at = |mode: i64| {
            let i = mode + m;
            if (0..coeffs.len() as i64).contains(&i) {
                coeffs[i as usize]
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        let u = at(n);
        let v = if n == 0 { Complex64::new(0.0, 0.0) } else { at(-n) };
        Self {
            label,
            lambda,
            coeffs,
            u,
            v,
            residual_norm,
        }
    }
}

/// Output of [`label_bands`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSpectrum {
    pub t: QuasiMomentum,
    pub half_width: usize,
    pub pairs: BTreeMap<BandIndex, EigenPair>,
    /// Labels within [`LOCALIZATION_MARGIN`] of the truncation edge.
    pub unreliable: Vec<BandIndex>,
    /// Labels whose assignment was decided by the ordering convention
    /// because two eigenvalues were equally plausible.
    pub ambiguous: Vec<BandIndex>,
}

impl LabeledSpectrum {
    pub fn get(&self, n: i32) -> Option<&EigenPair> {
        self.pairs.get(&BandIndex(n))
    }

    pub fn is_reliable(&self, n: i32) -> bool {
        self.pairs.contains_key(&BandIndex(n)) && !self.unreliable.contains(&BandIndex(n))
    }
}

/// Radius of the disk around `(2πn+t)²` inside which an eigenvalue is
/// considered localized at label `n`: `max(1, 4π|n|·0.05)`.
pub fn localization_radius(n: i64) -> f64 {
    (4.0 * PI * n.unsigned_abs() as f64 * 0.05).max(1.0)
}

/// Assigns each eigenvalue a band label by one-to-one nearest-center matching.
///
/// Candidate (eigenvalue, center) pairs are taken greedily in order of
/// increasing distance. Where two centers lie within a localization radius of
/// each other (the near-degenerate pairs around `t = 0` and `t = π`) the label
/// with the larger center value receives the eigenvalue with the larger real
/// part; at `t = 0` and `t = π`, where the centers coincide, the label whose
/// center is larger just inside `[0, π]` does. Such labels are listed as
/// ambiguous when the distances alone could not separate them.
pub fn label_bands(eigs: &[RawEigenPair], t: QuasiMomentum, m: usize) -> Result<LabeledSpectrum> {
    let dim = 2 * m + 1;
    if eigs.len() != dim {
        return Err(Error::InvalidInput(format!(
            "expected {dim} eigenpairs for M = {m}, got {}",
            eigs.len()
        )));
    }
    let mi = m as i64;
    let centers: Vec<f64> = (-mi..=mi).map(|n| t.free_eigenvalue(n)).collect();

    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(dim * dim);
    for (ei, e) in eigs.iter().enumerate() {
        for (ci, &c) in centers.iter().enumerate() {
            candidates.push(((e.lambda - c).norm(), ei, ci));
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut eig_of_center = vec![usize::MAX; dim];
    let mut taken = vec![false; dim];
    let mut remaining = dim;
    for &(_, ei, ci) in &candidates {
        if remaining == 0 {
            break;
        }
        if taken[ei] || eig_of_center[ci] != usize::MAX {
            continue;
        }
        taken[ei] = true;
        eig_of_center[ci] = ei;
        remaining -= 1;
    }

    let mut ambiguous = Vec::new();
    for ci in 0..dim {
        let n = ci as i64 - mi;
        let radius = localization_radius(n);
        for cj in (ci + 1)..dim {
            if (centers[ci] - centers[cj]).abs() >= radius {
                continue;
            }
            let (ei, ej) = (eig_of_center[ci], eig_of_center[cj]);
            let (li, lj) = (eigs[ei].lambda, eigs[ej].lambda);
            let within = (li - centers[ci]).norm() < radius && (lj - centers[cj]).norm() < radius;
            if !within {
                continue;
            }
            // same orientation as the two-mode reduction: the mode with the
            // larger center (at a tie, the one continuing the interior of
            // [0, π]) takes the eigenvalue with the larger real part
            let (p, r) = if ci > cj { (ci, cj) } else { (cj, ci) };
            let orient = if centers[p] != centers[r] {
                (centers[p] - centers[r]).signum()
            } else if t.split().0 == 1 {
                -1.0
            } else {
                1.0
            };
            let (x, y) = (eig_of_center[p], eig_of_center[r]);
            if !takes_first(eigs[x].lambda - eigs[y].lambda, orient) {
                eig_of_center[p] = y;
                eig_of_center[r] = x;
            }
            let di = (li - centers[ci]).norm() - (li - centers[cj]).norm();
            let dj = (lj - centers[cj]).norm() - (lj - centers[ci]).norm();
            let scale = 1e-9 * (1.0 + centers[ci].abs());
            if di.abs() <= scale || dj.abs() <= scale {
                ambiguous.push(BandIndex((ci as i64 - mi) as i32));
                ambiguous.push(BandIndex((cj as i64 - mi) as i32));
            }
        }
    }
    ambiguous.sort();
    ambiguous.dedup();

    let mut pairs = BTreeMap::new();
    let mut unreliable = Vec::new();
    for ci in 0..dim {
        let n = ci as i64 - mi;
        let label = BandIndex(n as i32);
        let e = &eigs[eig_of_center[ci]];
        pairs.insert(
            label,
            EigenPair::from_vector(label, e.lambda, e.vector.clone(), e.residual_norm),
        );
        if n.unsigned_abs() as usize + LOCALIZATION_MARGIN > m {
            unreliable.push(label);
        }
    }
    Ok(LabeledSpectrum {
        t,
        half_width: m,
        pairs,
        unreliable,
        ambiguous,
    })
}

/// Whether the higher mode of a close pair takes the first of two eigenvalues
/// differing by `delta`. Real parts within `1e-9·|δ|` count as equal, and the
/// larger imaginary part then wins.
pub(crate) fn takes_first(delta: Complex64, orient: f64) -> bool {
    if delta.re.abs() > 1e-9 * delta.norm() {
        delta.re * orient > 0.0
    } else {
        delta.im >= 0.0
    }
}

/// `(u, v, ‖h‖)`: the coefficients at modes `±|n|` and the norm of the rest.
pub fn eigenfunction_components(pair: &EigenPair) -> (Complex64, Complex64, f64) {
    let m = pair.half_width() as i64;
    let n = pair.label.signed().unsigned_abs() as i64;
    let rest: Vec<Complex64> = pair
        .coeffs
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let mode = *i as i64 - m;
            mode != n && !(n != 0 && mode == -n)
        })
        .map(|(_, z)| *z)
        .collect();
    (pair.u, pair.v, super::norm(&rest))
}
