//! Exact two-mode reduction of the Floquet eigenproblem.
//!
//! For a label `k` and its partner `m` (the mode whose unperturbed value
//! `(2πm+t)²` approaches `(2πk+t)²` at `t = 0` or `t = π`), every other mode is
//! eliminated by a Schur complement. The complement of the two semi-infinite
//! tails and of the block strictly between `k` and `m` is expressed through
//! continued fractions, which leaves a `2×2` nonlinear eigenproblem
//!
//! ```text
//! ⎡ A_hi(ζ)        B(ζ)         ⎤ ⎡u⎤     ⎡u⎤
//! ⎣ B'(ζ)    e_lo + A_lo(ζ)     ⎦ ⎣v⎦ = ζ ⎣v⎦
//! ```
//!
//! in the shifted variable `ζ = λ - (2π·hi+t)²`, with `hi = max(k, m)`,
//! `lo = min(k, m)`, `B = b^{hi-lo}·P`, `B' = a^{hi-lo}·P`. Nothing is
//! approximated: the truncated matrix eigenvalues are exactly the fixed points
//! of `ζ = c(ζ) ± s(ζ)` with `c = (p+r)/2`, `h = (p-r)/2`, `s² = h² + BB'`.
//!
//! Working with `c`, `h` and `s` directly resolves the splitting `2|s|` to
//! relative machine precision even when it is far below `ε·|λ|`, which the
//! dense eigensolver cannot do.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::labels::{localization_radius, EigenPair};
use super::norm;
use crate::error::{Error, Result};
use crate::model::{BandIndex, PotentialCoeffs, QuasiMomentum, SolverConfig};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const FIXED_POINT_ITERS: usize = 200;
const SECANT_ITERS: usize = 100;

/// Partner mode of `k` at quasi-momentum `t`.
///
/// With `t = eπ + τ`, `|τ| ≤ π/2`, the partner is `-k - e`; for `k = 0` at
/// `e = 0` (no degeneracy in reach) it is the nearest neighbour on the side
/// of `t`.
pub fn partner_mode(k: i64, t: QuasiMomentum) -> i64 {
    let (e, _) = t.split();
    let m = -k - e;
    if m != k {
        m
    } else if t.value() >= 0.0 {
        -1
    } else {
        1
    }
}

/// The reduced problem for one `(k, m)` pair.
#[derive(Debug, Clone)]
pub struct ReducedPair {
    pot: PotentialCoeffs,
    t: QuasiMomentum,
    half_width: i64,
    hi: i64,
    lo: i64,
    /// `e_j = (2πj+t)² - (2π·hi+t)²`, index `j + M`.
    shifted: Vec<f64>,
    d_hi: f64,
    /// Fixed orientation of `s` at `t = 0` and `t = π`, where `h` vanishes
    /// up to rounding: the one continuing the interior of `[0, π]`.
    orientation: Option<Complex64>,
    /// Set for close pairs, whose two roots are labeled jointly: the mode
    /// with the larger centre takes the root with the larger real part when
    /// this is `+1`, the smaller when `-1`.
    pair_orientation: Option<f64>,
}

/// Everything evaluated at one value of `ζ`.
#[derive(Debug, Clone)]
struct PairEval {
    /// `g_j`, `j = hi+1..=M`.
    right: Vec<Complex64>,
    /// `gl_j`, `j = -M..=lo-1`.
    left: Vec<Complex64>,
    /// Inner continued fractions built from `lo+1` upward.
    inner_up: Vec<Complex64>,
    /// Inner continued fractions built from `hi-1` downward.
    inner_down: Vec<Complex64>,
    a_hi: Complex64,
    a_lo: Complex64,
    coupling: Complex64,
    coupling_prime: Complex64,
    c: Complex64,
    h: Complex64,
    w: Complex64,
    s: Complex64,
}

/// One converged eigenvalue of the reduced problem, with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSolution {
    /// `+1` for the eigenvalue continuing `hi`, `-1` for `lo`.
    pub branch: i8,
    pub mode: i64,
    pub partner: i64,
    pub lambda: Complex64,
    /// `λ - (2π·hi+t)²`.
    pub zeta: Complex64,
    pub center_hi: f64,
    pub c: Complex64,
    pub h: Complex64,
    /// Oriented square root of `h² + BB'`; `ζ = c + branch·s`.
    pub s: Complex64,
    pub w: Complex64,
    pub a_hi: Complex64,
    pub a_lo: Complex64,
    pub e_lo: f64,
    pub coupling: Complex64,
    pub coupling_prime: Complex64,
    pub iterations: usize,
    pub coeffs: Vec<Complex64>,
    pub residual_norm: f64,
}

impl BranchSolution {
    /// Rounding-level uncertainty of `ζ` and of the splitting.
    pub fn noise_floor(&self) -> f64 {
        4.0 * f64::EPSILON * (self.a_hi.norm() + self.a_lo.norm() + self.e_lo.abs() + self.s.norm())
    }

    /// `true` unless `s²` has cancelled so badly that `s` itself is noise.
    pub fn is_simple(&self) -> bool {
        let scale = self.h.norm().max(self.w.norm());
        self.s != ZERO && self.s.norm_sqr() > 1e3 * f64::EPSILON * scale * scale
    }
}

impl ReducedPair {
    pub fn new(pot: &PotentialCoeffs, t: QuasiMomentum, label: i64, half_width: usize) -> Result<Self> {
        let partner = partner_mode(label, t);
        let m = half_width as i64;
        if label.abs() > m || partner.abs() > m {
            return Err(Error::InvalidInput(format!(
                "label {label} and partner {partner} must lie within the truncation window -{m}..={m}"
            )));
        }
        let hi = label.max(partner);
        let lo = label.min(partner);
        let shifted = (-m..=m).map(|j| t.free_difference(j, hi)).collect();
        let d_hi = t.free_eigenvalue(hi);
        let d_lo = t.free_eigenvalue(lo);
        Ok(Self {
            pot: *pot,
            t,
            half_width: m,
            hi,
            lo,
            shifted,
            d_hi,
            orientation: {
                let (e, tau) = t.split();
                (tau == 0.0).then(|| Complex64::new(if e == 1 { -1.0 } else { 1.0 }, 0.0))
            },
            pair_orientation: if hi != lo && (d_hi - d_lo).abs() < localization_radius(lo) {
                Some(if d_hi != d_lo {
                    (d_hi - d_lo).signum()
                } else if t.split().0 == 1 {
                    -1.0
                } else {
                    1.0
                })
            } else {
                None
            },
        })
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    fn e(&self, j: i64) -> f64 {
        self.shifted[(j + self.half_width) as usize]
    }

    /// `prev_s` is the splitting term of the previous iterate; it fixes the
    /// sign of `s` where the reference direction cannot (`s` orthogonal to it).
    fn eval(&self, zeta: Complex64, prev_s: Option<Complex64>) -> PairEval {
        let m = self.half_width;
        let (a, b) = (self.pot.a(), self.pot.b());
        let ab = self.pot.product_ab();

        let mut right = vec![ZERO; (m - self.hi).max(0) as usize];
        let mut next = ZERO;
        for j in ((self.hi + 1)..=m).rev() {
            let g = (zeta - self.e(j) - ab * next).inv();
            right[(j - self.hi - 1) as usize] = g;
            next = g;
        }
        let g_right = right.first().copied().unwrap_or(ZERO);

        let mut left = vec![ZERO; (self.lo + m).max(0) as usize];
        let mut prev = ZERO;
        for j in -m..self.lo {
            let g = (zeta - self.e(j) - ab * prev).inv();
            left[(j + m) as usize] = g;
            prev = g;
        }
        let g_left = left.last().copied().unwrap_or(ZERO);

        let inner_len = (self.hi - self.lo - 1).max(0) as usize;
        let mut inner_up = vec![ZERO; inner_len];
        let mut prev = ZERO;
        for (i, j) in ((self.lo + 1)..self.hi).enumerate() {
            let g = (zeta - self.e(j) - ab * prev).inv();
            inner_up[i] = g;
            prev = g;
        }
        let mut inner_down = vec![ZERO; inner_len];
        let mut next = ZERO;
        for i in (0..inner_len).rev() {
            let j = self.lo + 1 + i as i64;
            let g = (zeta - self.e(j) - ab * next).inv();
            inner_down[i] = g;
            next = g;
        }

        let a_hi = ab * (g_right + inner_up.last().copied().unwrap_or(ZERO));
        let a_lo = ab * (g_left + inner_down.first().copied().unwrap_or(ZERO));

        let sqrt_ab = ab.sqrt();
        let mut coupling = b;
        let mut coupling_prime = a;
        let mut w = sqrt_ab;
        for &g in &inner_up {
            coupling *= b * g;
            coupling_prime *= a * g;
            w *= sqrt_ab * g;
        }

        let p = a_hi;
        let r = self.e(self.lo) + a_lo;
        let c = (p + r) * 0.5;
        let h = (p - r) * 0.5;
        let reference = self.orientation.unwrap_or(h);
        let mut s = oriented_root(h, w, reference);
        if let Some(p) = prev_s {
            let tie = (s * reference.conj()).re.abs() <= 1e-6 * s.norm() * reference.norm();
            if tie && (s * p.conj()).re < 0.0 {
                s = -s;
            }
        }
        PairEval {
            right,
            left,
            inner_up,
            inner_down,
            a_hi,
            a_lo,
            coupling,
            coupling_prime,
            c,
            h,
            w,
            s,
        }
    }

    /// Solves the branch `ζ = c(ζ) + branch·s(ζ)`.
    pub fn solve(&self, branch: i8) -> Result<BranchSolution> {
        let sigma = if branch >= 0 { 1.0 } else { -1.0 };
        let (zeta, ev, iterations) = match self.pair_orientation {
            Some(orient) if self.pot.product_ab() != ZERO => self.solve_joint(sigma, orient)?,
            _ => self.solve_fixed_point(sigma)?,
        };
        if !(zeta.re.is_finite() && zeta.im.is_finite()) {
            return Err(Error::FixedPoint(format!(
                "reduced problem for modes ({}, {}) at t = {} produced a non-finite value",
                self.hi,
                self.lo,
                self.t.value()
            )));
        }

        let coeffs = self.eigenvector(&ev, sigma);
        let residual_norm = self.residual(zeta, &coeffs);
        let mode = if branch >= 0 { self.hi } else { self.lo };
        let partner = if branch >= 0 { self.lo } else { self.hi };
        Ok(BranchSolution {
            branch: if branch >= 0 { 1 } else { -1 },
            mode,
            partner,
            lambda: self.d_hi + zeta,
            zeta,
            center_hi: self.d_hi,
            c: ev.c,
            h: ev.h,
            s: ev.s,
            w: ev.w,
            a_hi: ev.a_hi,
            a_lo: ev.a_lo,
            e_lo: self.e(self.lo),
            coupling: ev.coupling,
            coupling_prime: ev.coupling_prime,
            iterations,
            coeffs,
            residual_norm,
        })
    }

    fn solve_fixed_point(&self, sigma: f64) -> Result<(Complex64, PairEval, usize)> {
        let mut zeta = if sigma > 0.0 {
            ZERO
        } else {
            Complex64::new(self.e(self.lo), 0.0)
        };
        let mut ev = self.eval(zeta, None);
        let mut iterations = 0;
        let mut converged = false;
        let mut last_step = f64::INFINITY;
        let mut stalls = 0;
        while iterations < FIXED_POINT_ITERS {
            iterations += 1;
            let next = ev.c + ev.s * sigma;
            let step = (next - zeta).norm();
            zeta = next;
            ev = self.eval(zeta, Some(ev.s));
            if step <= self.tolerance(&ev, zeta) {
                converged = true;
                break;
            }
            if step > 0.5 * last_step {
                stalls += 1;
                if stalls > 8 {
                    break;
                }
            }
            last_step = step;
        }
        if !converged {
            zeta = self.secant(zeta, sigma, ev.s)?;
            ev = self.eval(zeta, Some(ev.s));
            iterations += SECANT_ITERS;
        }
        Ok((zeta, ev, iterations))
    }

    /// Both roots of `(ζ - p)(ζ - r) - w²` for a close pair, where the
    /// pointwise sign of `s` is not a usable label (it flips wherever `s` is
    /// nearly orthogonal to its reference). The roots are assigned to the
    /// branches with the rule the dense labeler applies to close pairs.
    fn solve_joint(&self, sigma: f64, orient: f64) -> Result<(Complex64, PairEval, usize)> {
        let ev0 = self.eval(ZERO, None);
        let roots = self.characteristic_root(ev0.c + ev0.s, None).and_then(|(first, n1)| {
            self.characteristic_root(ev0.c - ev0.s, Some(first))
                .map(|(second, n2)| (first, second, n1 + n2))
        });
        let (first, second, iterations) = match roots {
            Ok(r) => r,
            Err(_) => return self.solve_fixed_point(sigma),
        };
        let ev_first = self.eval(first, None);
        if (first - second).norm() <= 1e6 * self.tolerance(&ev_first, first) {
            return self.solve_fixed_point(sigma);
        }
        let first_is_hi = super::labels::takes_first(first - second, orient);
        let zeta = if (sigma > 0.0) == first_is_hi { first } else { second };
        let mut ev = self.eval(zeta, None);
        if ((zeta - ev.c) * sigma * ev.s.conj()).re < 0.0 {
            ev.s = -ev.s;
        }
        Ok((zeta, ev, iterations))
    }

    /// Secant iteration on the analytic characteristic function, optionally
    /// with a known root divided out.
    fn characteristic_root(&self, start: Complex64, deflate: Option<Complex64>) -> Result<(Complex64, usize)> {
        let f = |z: Complex64| {
            let ev = self.eval(z, None);
            let d = z - ev.c;
            let mut val = d * d - ev.s * ev.s;
            if let Some(root) = deflate {
                val /= z - root;
            }
            (val, ev)
        };
        let scale = (start.norm() + self.e(self.lo).abs()).max(1e-6);
        let mut z0 = start;
        let mut z1 = start + scale * 1e-4;
        if let Some(root) = deflate {
            if (z0 - root).norm() < 1e-12 * scale {
                z0 += scale * 1e-3;
            }
            if (z1 - root).norm() < 1e-12 * scale {
                z1 -= scale * 1e-3;
            }
        }
        let (mut f0, _) = f(z0);
        let (mut f1, mut ev1) = f(z1);
        for it in 0..SECANT_ITERS {
            if f1 == ZERO {
                return Ok((z1, it));
            }
            let denom = f1 - f0;
            if denom == ZERO || !denom.norm().is_finite() {
                break;
            }
            let z2 = z1 - f1 * (z1 - z0) / denom;
            let step = (z2 - z1).norm();
            z0 = z1;
            f0 = f1;
            z1 = z2;
            let (nf, nev) = f(z1);
            f1 = nf;
            ev1 = nev;
            if step <= self.tolerance(&ev1, z1) {
                return Ok((z1, it + 1));
            }
        }
        let residual = (z1 - ev1.c - ev1.s).norm().min((z1 - ev1.c + ev1.s).norm());
        if residual <= 1e3 * self.tolerance(&ev1, z1) {
            Ok((z1, SECANT_ITERS))
        } else {
            Err(Error::FixedPoint(format!(
                "reduced problem for modes ({}, {}) at t = {} did not converge (residual {residual:e})",
                self.hi,
                self.lo,
                self.t.value()
            )))
        }
    }

    fn tolerance(&self, ev: &PairEval, zeta: Complex64) -> f64 {
        2.0 * f64::EPSILON * (zeta.norm() + ev.a_hi.norm() + ev.a_lo.norm() + self.e(self.lo).abs() + ev.s.norm())
    }

    /// Secant iteration on `ζ - c(ζ) - σ s(ζ)`, used when the fixed-point map
    /// contracts too slowly (close to a double eigenvalue).
    fn secant(&self, start: Complex64, sigma: f64, s_start: Complex64) -> Result<Complex64> {
        let prev = std::cell::Cell::new(s_start);
        let f = |z: Complex64| {
            let ev = self.eval(z, Some(prev.get()));
            prev.set(ev.s);
            (z - ev.c - ev.s * sigma, ev)
        };
        let (mut f0, ev0) = f(start);
        let mut z0 = start;
        let mut z1 = start + (ev0.s.norm() + ev0.h.norm()).max(1e-12) * 1e-3;
        let (mut f1, mut ev1) = f(z1);
        for _ in 0..SECANT_ITERS {
            if f1 == ZERO {
                return Ok(z1);
            }
            let denom = f1 - f0;
            if denom == ZERO {
                break;
            }
            let z2 = z1 - f1 * (z1 - z0) / denom;
            let step = (z2 - z1).norm();
            z0 = z1;
            f0 = f1;
            z1 = z2;
            let (nf, nev) = f(z1);
            f1 = nf;
            ev1 = nev;
            if step <= self.tolerance(&ev1, z1) {
                return Ok(z1);
            }
        }
        let residual = f1.norm();
        if residual <= 1e3 * self.tolerance(&ev1, z1) {
            Ok(z1)
        } else {
            Err(Error::FixedPoint(format!(
                "reduced problem for modes ({}, {}) at t = {} did not converge (residual {residual:e})",
                self.hi,
                self.lo,
                self.t.value()
            )))
        }
    }

    fn eigenvector(&self, ev: &PairEval, sigma: f64) -> Vec<Complex64> {
        let m = self.half_width;
        let (a, b) = (self.pot.a(), self.pot.b());
        let x = ev.s * sigma + ev.h;
        let y = ev.s * sigma - ev.h;
        let (mut u, mut v) = if x.norm() >= y.norm() {
            (x, ev.coupling_prime)
        } else {
            (ev.coupling, y)
        };
        let scale = u.norm().max(v.norm());
        if scale == 0.0 || !scale.is_finite() {
            if sigma > 0.0 {
                u = Complex64::new(1.0, 0.0);
                v = ZERO;
            } else {
                u = ZERO;
                v = Complex64::new(1.0, 0.0);
            }
        } else {
            u /= scale;
            v /= scale;
        }

        let idx = |j: i64| (j + m) as usize;
        let mut coeffs = vec![ZERO; (2 * m + 1) as usize];
        coeffs[idx(self.hi)] = u;
        coeffs[idx(self.lo)] = v;
        for j in (self.hi + 1)..=m {
            coeffs[idx(j)] = ev.right[(j - self.hi - 1) as usize] * b * coeffs[idx(j - 1)];
        }
        for j in (-m..self.lo).rev() {
            coeffs[idx(j)] = ev.left[(j + m) as usize] * a * coeffs[idx(j + 1)];
        }
        let inner = (self.hi - self.lo - 1).max(0) as usize;
        if inner > 0 {
            let mut down = vec![ZERO; inner];
            let mut carry = a * u;
            for i in (0..inner).rev() {
                down[i] = ev.inner_up[i] * carry;
                carry = a * down[i];
            }
            let mut up = vec![ZERO; inner];
            let mut carry = b * v;
            for (slot, &g) in up.iter_mut().zip(&ev.inner_down) {
                *slot = g * carry;
                carry = b * *slot;
            }
            for i in 0..inner {
                coeffs[idx(self.lo + 1 + i as i64)] = down[i] + up[i];
            }
        }
        let nrm = norm(&coeffs);
        for z in coeffs.iter_mut() {
            *z /= nrm;
        }
        coeffs
    }

    /// `‖(H - λ)c‖` evaluated in the shifted frame.
    fn residual(&self, zeta: Complex64, coeffs: &[Complex64]) -> f64 {
        let (a, b) = (self.pot.a(), self.pot.b());
        let n = coeffs.len();
        let r: Vec<Complex64> = (0..n)
            .map(|i| {
                let mut acc = (self.shifted[i] - zeta) * coeffs[i];
                if i + 1 < n {
                    acc += a * coeffs[i + 1];
                }
                if i > 0 {
                    acc += b * coeffs[i - 1];
                }
                acc
            })
            .collect();
        norm(&r)
    }
}

/// `√(h² + w²)` without overflow or underflow, oriented so that
/// `Re(s·r̄) ≥ 0` for the reference direction `r` (principal root when
/// `r = 0`).
fn oriented_root(h: Complex64, w: Complex64, reference: Complex64) -> Complex64 {
    let scale = h.norm().max(w.norm());
    if scale == 0.0 {
        return ZERO;
    }
    let (hs, ws) = (h / scale, w / scale);
    let mut s = (hs * hs + ws * ws).sqrt() * scale;
    if reference != ZERO && (s * reference.conj()).re < 0.0 {
        s = -s;
    }
    s
}

/// Labeled eigenpair computed through the exact two-mode reduction.
///
/// The label must sit at least the localization margin inside the
/// truncation window.
pub fn labeled_eigenpair(
    pot: &PotentialCoeffs,
    t: QuasiMomentum,
    label: BandIndex,
    cfg: &SolverConfig,
) -> Result<(EigenPair, BranchSolution)> {
    cfg.check_label(label.signed())?;
    let k = label.signed() as i64;
    let pair = ReducedPair::new(pot, t, k, cfg.truncation_half_width)?;
    let branch = if k == pair.hi() { 1 } else { -1 };
    let sol = pair.solve(branch)?;
    let m = cfg.truncation_half_width as i64;
    let hnorm = t.free_eigenvalue(m).max(t.free_eigenvalue(-m)) + pot.a().norm() + pot.b().norm();
    if !(sol.residual_norm < cfg.eig_deflation_tol * hnorm.max(1.0)) {
        return Err(Error::EigenNonConvergence {
            indices: vec![(k + m) as usize],
        });
    }
    let ep = EigenPair::from_vector(label, sol.lambda, sol.coeffs.clone(), sol.residual_norm);
    Ok((ep, sol))
}

/// Distance between the two eigenvalues of a degenerate pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapMeasurement {
    pub n: u32,
    pub t: f64,
    pub upper_label: BandIndex,
    pub lower_label: BandIndex,
    pub lambda_upper: Complex64,
    pub lambda_lower: Complex64,
    pub gap: f64,
    pub noise_floor: f64,
}

/// Which end of a pair a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GapEdge {
    Periodic,
    Antiperiodic,
}

impl GapMeasurement {
    /// A predicted gap is only worth comparing when it clears the noise floor
    /// by three orders of magnitude.
    pub fn resolves(&self, predicted_gap: f64) -> bool {
        predicted_gap >= 1e3 * self.noise_floor
    }
}

/// Measures `|λ_n - λ_{-n}|` at `t = 0` or `|λ_n - λ_{-n-1}|` at `t = π`.
pub fn measure_gap(pot: &PotentialCoeffs, n: u32, edge: GapEdge, cfg: &SolverConfig) -> Result<GapMeasurement> {
    if n == 0 {
        return Err(Error::InvalidInput("gap index must be >= 1".into()));
    }
    let k = n as i64;
    cfg.check_label(n as i32 + 1)?;
    let t = match edge {
        GapEdge::Periodic => QuasiMomentum::new(0.0)?,
        GapEdge::Antiperiodic => QuasiMomentum::new(std::f64::consts::PI)?,
    };
    let pair = ReducedPair::new(pot, t, k, cfg.truncation_half_width)?;
    let upper = pair.solve(1)?;
    let lower = pair.solve(-1)?;
    let gap = ((upper.c - lower.c) + upper.s + lower.s).norm();
    let noise_floor = upper.noise_floor().max(lower.noise_floor());
    Ok(GapMeasurement {
        n,
        t: t.value(),
        upper_label: BandIndex(pair.hi() as i32),
        lower_label: BandIndex(pair.lo() as i32),
        lambda_upper: upper.lambda,
        lambda_lower: lower.lambda,
        gap,
        noise_floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{build_matrix, eigen_all, label_bands};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pot(a: Complex64, b: Complex64) -> PotentialCoeffs {
        PotentialCoeffs::new(a, b).unwrap()
    }

    #[test]
    fn partners() {
        let q = |t: f64| QuasiMomentum::new(t).unwrap();
        assert_eq!(partner_mode(3, q(0.0)), -3);
        assert_eq!(partner_mode(-3, q(0.2)), 3);
        assert_eq!(partner_mode(3, q(PI)), -4);
        assert_eq!(partner_mode(-4, q(3.0)), 3);
        assert_eq!(partner_mode(0, q(0.1)), -1);
        assert_eq!(partner_mode(0, q(-0.1)), 1);
        assert_eq!(partner_mode(0, q(PI)), -1);
    }

    #[test]
    fn agrees_with_dense_solver() {
        let cfg = SolverConfig::default();
        for (p, t) in [
            (pot(c(1.0, 0.0), c(1.0, 0.0)), 0.3),
            (pot(c(1.0, 0.0), c(0.0, 2.0)), PI - 0.3),
            (pot(c(0.5, 0.5), c(-1.0, 2.0)), 1.7),
            (pot(c(1.0, 0.0), c(0.0, 1.0)), 0.002),
        ] {
            let t = QuasiMomentum::new(t).unwrap();
            let mat = build_matrix(&p, t, cfg.truncation_half_width).unwrap();
            let dense = label_bands(&eigen_all(&mat, &cfg).unwrap(), t, cfg.truncation_half_width).unwrap();
            for n in -8..=8 {
                let (ep, sol) = labeled_eigenpair(&p, t, BandIndex(n), &cfg).unwrap();
                let want = dense.get(n).unwrap().lambda;
                assert!(
                    (ep.lambda - want).norm() < 1e-9 * (1.0 + want.norm()),
                    "n = {n}, t = {}: {} vs {}",
                    t.value(),
                    ep.lambda,
                    want
                );
                assert!(sol.residual_norm < 1e-10, "residual {}", sol.residual_norm);
                assert!((norm(&ep.coeffs) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetric_pair_has_exactly_zero_h() {
        let cfg = SolverConfig::default();
        let p = pot(c(1.0, 0.0), c(2.0, 0.0));
        let t = QuasiMomentum::new(0.0).unwrap();
        for n in 1..=10 {
            let pair = ReducedPair::new(&p, t, n, cfg.truncation_half_width).unwrap();
            let sol = pair.solve(1).unwrap();
            assert_eq!(sol.h, ZERO);
            assert!(sol.is_simple());
        }
    }

    #[test]
    fn gap_n1_close_to_formula() {
        let cfg = SolverConfig::default();
        let g = measure_gap(&pot(c(2.0, 0.0), c(2.0, 0.0)), 1, GapEdge::Periodic, &cfg).unwrap();
        let predicted = 8.0 / (2.0 * PI).powi(2);
        let ratio = g.gap / predicted;
        assert!(ratio > 0.5 && ratio < 2.0, "ratio {ratio}");
        assert!(g.resolves(predicted));
    }

    #[test]
    fn free_pair_is_exact() {
        let cfg = SolverConfig::default();
        let t = QuasiMomentum::new(0.7).unwrap();
        for n in -5..=5 {
            let (ep, _) = labeled_eigenpair(&PotentialCoeffs::zero(), t, BandIndex(n), &cfg).unwrap();
            let want = t.free_eigenvalue(n as i64);
            assert!((ep.lambda.re - want).abs() <= 4.0 * f64::EPSILON * want.max(1.0));
            assert_eq!(ep.lambda.im, 0.0);
            assert!((ep.coefficient(n as i64).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn periodic_components_follow_modulus_ratio() {
        use crate::floquet::eigenfunction_components;
        let cfg = SolverConfig::default();
        let t = QuasiMomentum::new(0.0).unwrap();
        let (ep, _) = labeled_eigenpair(&pot(c(1.0, 0.0), c(1.0, 0.0)), t, BandIndex(4), &cfg).unwrap();
        let (u, v, _) = eigenfunction_components(&ep);
        for x in [u.norm(), v.norm()] {
            assert!((x * 2f64.sqrt() - 1.0).abs() < 0.05, "{x}");
        }

        // |u/v| = (|b|/|a|)^n at t = 0, so the minor component decays like 2^-n
        let p = pot(c(1.0, 0.0), c(2.0, 0.0));
        let mut last = f64::INFINITY;
        for n in [2, 4, 6, 8] {
            let (ep, _) = labeled_eigenpair(&p, t, BandIndex(n), &cfg).unwrap();
            let (u, v, _) = eigenfunction_components(&ep);
            assert!(u.norm() > v.norm());
            let ratio = v.norm() / u.norm();
            assert!((ratio * 2f64.powi(n) - 1.0).abs() < 1e-6, "n={n}: {ratio}");
            assert!(ratio < last);
            last = ratio;
        }
    }
}
