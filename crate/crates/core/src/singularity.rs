//! Biorthogonal pairing, projection norms and the arithmetic classification
//! of asymptotic spectrality.
//!
//! For a simple eigenvalue `λ_n(t)` of `H_t` with unit eigenfunction `Ψ` and
//! the unit eigenfunction `Ψ*` of the adjoint `H_t(q̄)` at `λ̄_n(t)`, the
//! Riesz projection onto `Ψ` has norm `1/|d_n(t)|` with `d_n(t) = (Ψ, Ψ*)`.
//! Because the exponentials `e^{i(2πk+t)x}` are orthonormal on `[0, 1]`, the
//! inner product is taken directly on the Fourier coefficient vectors.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{labeled_eigenpair, BranchSolution, ReducedPair};
use crate::model::{BandIndex, PotentialCoeffs, QuasiMomentum, SolverConfig};
use crate::spectrum::SpectralArc;

/// `(a, b) -> (b̄, ā)`, the potential of the adjoint operator.
pub fn adjoint_potential(pot: &PotentialCoeffs) -> PotentialCoeffs {
    pot.adjoint()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingRecord {
    pub n: BandIndex,
    pub t: f64,
    pub lambda: Complex64,
    /// Eigenvalue of the adjoint matched to `λ̄`.
    pub adjoint_lambda: Complex64,
    pub d: Complex64,
    pub inv_abs_d: f64,
}

impl PairingRecord {
    pub fn abs_d(&self) -> f64 {
        self.d.norm()
    }
}

fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(p, q)| p * q.conj()).sum()
}

/// Picks the adjoint branch whose eigenvalue is the conjugate of `sol`'s.
///
/// The branches are told apart through the splitting term `s` rather than
/// through `ζ`, which cannot separate them once `|s|` drops below the
/// rounding level of `ζ`.
fn match_adjoint(sol: &BranchSolution, adjoint: &ReducedPair, cfg: &SolverConfig) -> Result<BranchSolution> {
    let sigma = f64::from(sol.branch);
    let target_s = (sol.s * sigma).conj();
    let mut best: Option<(f64, BranchSolution)> = None;
    for branch in [1i8, -1] {
        let cand = adjoint.solve(branch)?;
        let dist = (cand.s * f64::from(branch) - target_s).norm();
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((dist, cand));
        }
    }
    let (_, cand) = best.expect("two candidates were tried");
    let dist = (cand.zeta - sol.zeta.conj()).norm();
    let tol = 1e3 * (sol.noise_floor() + cand.noise_floor()) + cfg.eig_deflation_tol * (1.0 + sol.lambda.norm());
    if dist > tol {
        return Err(Error::AdjointMismatch {
            lambda: sol.lambda,
            distance: dist,
        });
    }
    Ok(cand)
}

/// Simple, or part of a fully decoupled pair (`B = B' = 0`), where each mode
/// carries its own eigenvector.
fn has_unique_eigenvector(sol: &BranchSolution) -> bool {
    let zero = Complex64::new(0.0, 0.0);
    sol.is_simple() || (sol.coupling == zero && sol.coupling_prime == zero)
}

/// `d_n(t)` for label `n`; the eigenvalue must be simple (or belong to a
/// decoupled pair, as for the zero potential).
pub fn pairing_dn(n: i32, pot: &PotentialCoeffs, t: QuasiMomentum, cfg: &SolverConfig) -> Result<PairingRecord> {
    let (pair, sol) = labeled_eigenpair(pot, t, BandIndex(n), cfg)?;
    if !has_unique_eigenvector(&sol) {
        return Err(Error::NotSimple { label: n, t: t.value() });
    }
    let adjoint = ReducedPair::new(&adjoint_potential(pot), t, n as i64, cfg.truncation_half_width)?;
    let adj = match_adjoint(&sol, &adjoint, cfg)?;
    let d = inner(&pair.coeffs, &adj.coeffs);
    Ok(PairingRecord {
        n: BandIndex(n),
        t: t.value(),
        lambda: sol.lambda,
        adjoint_lambda: adj.lambda,
        d,
        inv_abs_d: 1.0 / d.norm(),
    })
}

/// Supremum of `1/|d_n(t)|` over a set of `t` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionNorm {
    pub n: BandIndex,
    pub norm: f64,
    pub t_max: f64,
    pub evaluations: usize,
    /// Whether successive refinements agreed to 1%.
    pub converged: bool,
}

const REFINE_POINTS: usize = 8;
const MAX_REFINE_ROUNDS: usize = 60;

fn pairing_at(n: i32, pot: &PotentialCoeffs, t: f64, cfg: &SolverConfig) -> Result<f64> {
    let q = QuasiMomentum::new(t)?;
    pairing_dn(n, pot, q, cfg)
        .map(|r| r.inv_abs_d)
        .map_err(|e| Error::Pairing { t, source: Box::new(e) })
}

/// `sup 1/|d_n(t)|` over `ts`, refined around the maximizer until the
/// supremum changes by less than 1% between rounds. The search stays inside
/// `[min ts, max ts]`.
pub fn projection_norm_on(n: i32, pot: &PotentialCoeffs, ts: &[f64], cfg: &SolverConfig) -> Result<ProjectionNorm> {
    if ts.is_empty() {
        return Err(Error::InvalidInput("projection norm needs at least one t value".into()));
    }
    let mut pts: Vec<(f64, f64)> = ts
        .par_iter()
        .map(|&t| pairing_at(n, pot, t, cfg).map(|v| (t, v)))
        .collect::<Result<_>>()?;
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut evaluations = pts.len();
    let argmax = |pts: &[(f64, f64)]| {
        pts.iter()
            .enumerate()
            .max_by(|x, y| x.1 .1.total_cmp(&y.1 .1))
            .map(|(i, p)| (i, *p))
            .expect("non-empty")
    };
    let (mut i, (mut t_max, mut best)) = argmax(&pts);
    let mut converged = pts.len() == 1;
    for _ in 0..MAX_REFINE_ROUNDS {
        if pts.len() == 1 {
            break;
        }
        let lo = pts[i.saturating_sub(1)].0;
        let hi = pts[(i + 1).min(pts.len() - 1)].0;
        let new: Vec<(f64, f64)> = (1..=REFINE_POINTS)
            .map(|k| lo + (hi - lo) * k as f64 / (REFINE_POINTS + 1) as f64)
            .filter(|t| pts.iter().all(|p| p.0 != *t))
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&t| pairing_at(n, pot, t, cfg).map(|v| (t, v)))
            .collect::<Result<_>>()?;
        if new.is_empty() {
            converged = true;
            break;
        }
        evaluations += new.len();
        pts.extend(new);
        pts.sort_by(|x, y| x.0.total_cmp(&y.0));
        let (j, (t_new, v_new)) = argmax(&pts);
        let stable = v_new <= best * 1.01;
        i = j;
        t_max = t_new;
        best = v_new;
        if stable {
            converged = true;
            break;
        }
    }
    Ok(ProjectionNorm {
        n: BandIndex(n),
        norm: best,
        t_max,
        evaluations,
        converged,
    })
}

/// `‖P(Γ_n)‖ = sup_t 1/|d_n(t)|` over the samples of a traced arc.
pub fn projection_norm(arc: &SpectralArc, pot: &PotentialCoeffs, cfg: &SolverConfig) -> Result<ProjectionNorm> {
    let ts: Vec<f64> = arc.ts().collect();
    projection_norm_on(arc.n.0, pot, &ts, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanTrend {
    TrendToZero,
    BoundedBelow,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub threshold: f64,
    /// Number of trailing labels examined for the trend.
    pub window: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            threshold: 0.1,
            window: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: BandIndex,
    /// `min_t |d_n(t)|`; zero if some grid point is a multiple eigenvalue.
    pub min_abs_d: f64,
    pub t_min: f64,
    /// Grid points where the eigenvalue was not simple.
    pub non_simple: usize,
    /// Grid points where the pairing could not be computed.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityScan {
    pub rows: Vec<ScanRow>,
    pub trend: ScanTrend,
    pub config: ScanConfig,
}

/// Minimum of `|d_n(t)|` over `t_grid` for each label, with a trend verdict
/// over the last `window` labels in order of `|n|`.
pub fn scan_singularity_at_infinity(
    pot: &PotentialCoeffs,
    labels: &[i32],
    t_grid: &[f64],
    cfg: &SolverConfig,
    scan: &ScanConfig,
) -> Result<SingularityScan> {
    if labels.is_empty() || t_grid.is_empty() {
        return Err(Error::InvalidInput("scan needs labels and a t-grid".into()));
    }
    for &n in labels {
        cfg.check_label(n)?;
    }
    let ts: Vec<QuasiMomentum> = t_grid.iter().map(|&t| QuasiMomentum::new(t)).collect::<Result<_>>()?;
    let mut rows: Vec<ScanRow> = labels
        .par_iter()
        .map(|&n| {
            let mut row = ScanRow {
                n: BandIndex(n),
                min_abs_d: f64::INFINITY,
                t_min: f64::NAN,
                non_simple: 0,
                failures: 0,
            };
            for t in &ts {
                let value = match pairing_dn(n, pot, *t, cfg) {
                    Ok(r) => r.abs_d(),
                    Err(Error::NotSimple { .. }) => {
                        row.non_simple += 1;
                        0.0
                    }
                    Err(_) => {
                        row.failures += 1;
                        continue;
                    }
                };
                if value < row.min_abs_d {
                    row.min_abs_d = value;
                    row.t_min = t.value();
                }
            }
            row
        })
        .collect();
    rows.sort_by_key(|r| (r.n.0.unsigned_abs(), r.n.0));
    let trend = classify_trend(&rows, scan);
    Ok(SingularityScan {
        rows,
        trend,
        config: *scan,
    })
}

fn classify_trend(rows: &[ScanRow], scan: &ScanConfig) -> ScanTrend {
    let mins: Vec<f64> = rows.iter().map(|r| r.min_abs_d).filter(|v| v.is_finite()).collect();
    if scan.window == 0 || mins.len() < scan.window {
        return ScanTrend::Undecided;
    }
    let tail = &mins[mins.len() - scan.window..];
    let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    if decreasing && tail[tail.len() - 1] < scan.threshold {
        ScanTrend::TrendToZero
    } else if tail.iter().all(|&v| v >= scan.threshold) {
        ScanTrend::BoundedBelow
    } else {
        ScanTrend::Undecided
    }
}

fn gcd(mut x: u64, mut y: u64) -> u64 {
    while y != 0 {
        (x, y) = (y, x % y);
    }
    x
}

/// One convergent `p/q` of a continued fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergent {
    pub p: i64,
    pub q: i64,
}

/// Convergents of `x` with denominators up to `q_cap`.
pub fn convergents(x: f64, q_cap: u64) -> Vec<Convergent> {
    let mut out = Vec::new();
    if !x.is_finite() {
        return out;
    }
    let (mut p1, mut p2) = (1i128, 0i128);
    let (mut q1, mut q2) = (0i128, 1i128);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i128;
        let p = a * p1 + p2;
        let q = a * q1 + q2;
        if q > q_cap as i128 {
            break;
        }
        out.push(Convergent {
            p: p as i64,
            q: q as i64,
        });
        let frac = rest - rest.floor();
        if frac <= 0.0 {
            break;
        }
        (p2, p1) = (p1, p);
        (q2, q1) = (q1, q);
        rest = 1.0 / frac;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OddApproximation {
    pub q: u64,
    pub p: u64,
    /// `|qα - (2p - 1)|`.
    pub residual: f64,
}

/// Record-setting approximations `|qα - (2p-1)|` over `q = 1..=q_cap`, with
/// `2p - 1 ≥ 1` and `gcd(2p - 1, q) = 1`.
pub fn best_odd_approximations(alpha: f64, q_cap: u64) -> Vec<OddApproximation> {
    let mut out: Vec<OddApproximation> = Vec::new();
    if !alpha.is_finite() {
        return out;
    }
    for q in 1..=q_cap {
        let x = q as f64 * alpha;
        let odd = (2.0 * (x / 2.0).floor() + 1.0).max(1.0);
        if odd > 9.0e15 {
            break;
        }
        let o = odd as u64;
        if gcd(o, q) != 1 {
            continue;
        }
        let residual = (x - odd).abs();
        if out.last().is_none_or(|b| residual < b.residual) {
            out.push(OddApproximation {
                q,
                p: o.div_ceil(2),
                residual,
            });
            if residual == 0.0 {
                break;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RationalDetection {
    pub m: i64,
    pub q: i64,
    /// `|α - m/q|`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityVerdict {
    EvenM,
    OddM,
    IrrationalLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralityVerdict {
    SingularAtInfinity,
    AsymptoticallySpectral,
    UndecidedNumerically,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralityReport {
    pub abs_a: f64,
    pub abs_b: f64,
    /// `arg(ab)/π` reduced to `[0, 2)`; absent when `ab = 0`.
    pub alpha: Option<f64>,
    pub rational_detection: Option<RationalDetection>,
    pub parity_verdict: Option<ParityVerdict>,
    pub odd_approx_witnesses: Vec<OddApproximation>,
    pub verdict: SpectralityVerdict,
    pub note: String,
}

/// Relative tolerance for `|a| = |b|`.
pub const MODULUS_TOL: f64 = 1e-12;
/// Largest denominator scanned for odd-numerator witnesses.
pub const WITNESS_Q_LIMIT: u64 = 1_000_000;

/// `α = arg(ab)/π` in `[0, 2)`.
pub fn alpha_of(pot: &PotentialCoeffs) -> Option<f64> {
    let ab = pot.product_ab();
    if ab == Complex64::new(0.0, 0.0) {
        return None;
    }
    let alpha = (ab.arg() / std::f64::consts::PI).rem_euclid(2.0);
    Some(if alpha >= 2.0 { 0.0 } else { alpha })
}

/// Decides asymptotic spectrality from `|a|`, `|b|` and the arithmetic of `α`.
pub fn classify_spectrality(pot: &PotentialCoeffs, q_cap: u64, rational_tol: f64) -> Result<SpectralityReport> {
    if q_cap == 0 {
        return Err(Error::InvalidInput("q_cap must be >= 1".into()));
    }
    if !(rational_tol >= 0.0 && rational_tol.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "rational_tol must be a finite non-negative number, got {rational_tol}"
        )));
    }
    let (abs_a, abs_b) = (pot.a().norm(), pot.b().norm());
    let Some(alpha) = alpha_of(pot) else {
        return Ok(SpectralityReport {
            abs_a,
            abs_b,
            alpha: None,
            rational_detection: None,
            parity_verdict: None,
            odd_approx_witnesses: Vec::new(),
            verdict: SpectralityVerdict::UndecidedNumerically,
            note: "ab = 0: every periodic and antiperiodic gap vanishes identically, so the criterion based on arg(ab) does not apply".into(),
        });
    };

    let rational_detection = convergents(alpha, q_cap)
        .into_iter()
        .map(|c| RationalDetection {
            m: c.p,
            q: c.q,
            residual: (alpha - c.p as f64 / c.q as f64).abs(),
        })
        .find(|d| d.residual <= rational_tol);
    let parity_verdict = match rational_detection {
        Some(d) if d.m.rem_euclid(2) == 0 => ParityVerdict::EvenM,
        Some(_) => ParityVerdict::OddM,
        None => ParityVerdict::IrrationalLike,
    };
    let witnesses = best_odd_approximations(alpha, q_cap.min(WITNESS_Q_LIMIT));

    let equal_moduli = (abs_a - abs_b).abs() <= MODULUS_TOL * abs_a.max(abs_b);
    let (verdict, note) = if !equal_moduli {
        (
            SpectralityVerdict::SingularAtInfinity,
            "|a| != |b|: the pairing decays along the periodic points".to_string(),
        )
    } else {
        match (parity_verdict, rational_detection) {
            (ParityVerdict::EvenM, Some(d)) => (
                SpectralityVerdict::AsymptoticallySpectral,
                format!("|a| = |b| and alpha = {}/{} with even numerator", d.m, d.q),
            ),
            (ParityVerdict::OddM, Some(d)) => (
                SpectralityVerdict::SingularAtInfinity,
                format!("|a| = |b| and alpha = {}/{} with odd numerator", d.m, d.q),
            ),
            _ => (
                SpectralityVerdict::UndecidedNumerically,
                format!(
                    "|a| = |b| and alpha has no convergent within {rational_tol:e} up to q = {q_cap}; \
                     the decision depends on the asymptotic rate of the odd approximations, which finite data cannot settle \
                     (best residual {:e} at q = {})",
                    witnesses.last().map_or(f64::NAN, |w| w.residual),
                    witnesses.last().map_or(0, |w| w.q)
                ),
            ),
        }
    };
    Ok(SpectralityReport {
        abs_a,
        abs_b,
        alpha: Some(alpha),
        rational_detection,
        parity_verdict: Some(parity_verdict),
        odd_approx_witnesses: witnesses,
        verdict,
        note,
    })
}
