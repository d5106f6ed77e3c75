//! Closed-form asymptotics of the periodic and antiperiodic gaps and of the
//! eigenvalue splitting near `t = 0` and `t = π`.
//!
//! For a pair of modes `(hi, lo)` (`(n, -n)` near `t = 0`, `(n, -n-1)` near
//! `t = π`) the characteristic equation takes the form
//! `(λ - d_hi - A)(λ - d_lo - A') = B·B'`, where
//!
//! * `A`, `A'` are sums over closed lattice walks that start and end at the
//!   reference mode and avoid both modes of the pair,
//! * `B = b^{hi-lo} ∏ (λ - d_j)^{-1}` and `B' = a^{hi-lo} ∏ (λ - d_j)^{-1}`,
//!   the products running over the modes strictly between `lo` and `hi`,
//! * `d_j = (2πj + t)²`.
//!
//! The discriminant of that quadratic is `D = ((d_hi - d_lo)/2 + C)² + BB'`
//! with `C = (A - A')/2`; near `t = 0` this is `(4πnt + C)² + BB'`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BandIndex, PotentialCoeffs, QuasiMomentum};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const POLE_DISTANCE: f64 = 1e-8;

/// `ln k!` by direct summation.
pub fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// Log-space gap and coupling predictors for one `n`.
///
/// `None` marks a quantity that is exactly zero (a coefficient vanishes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPredictors {
    pub n: u32,
    /// `ln β_n`, `β_n = b^{2n}((2π)^{2n-1}(2n-1)!)^{-2}`; imaginary part is
    /// `2n·arg b`, not reduced.
    pub log_beta: Option<Complex64>,
    /// `ln α_n`, same with `a`.
    pub log_alpha: Option<Complex64>,
    /// `ln(2|ab|^n ((2π)^{2n-1}(2n-1)!)^{-2})`.
    pub log_gap_periodic: Option<f64>,
    /// `ln(2|ab|^{n+1/2} ((2π)^{2n}(2n)!)^{-2})`.
    pub log_gap_antiperiodic: Option<f64>,
}

impl GapPredictors {
    pub fn beta(&self) -> Complex64 {
        self.log_beta.map_or(ZERO, |l| l.exp())
    }

    pub fn alpha(&self) -> Complex64 {
        self.log_alpha.map_or(ZERO, |l| l.exp())
    }

    pub fn gap_periodic(&self) -> f64 {
        self.log_gap_periodic.map_or(0.0, f64::exp)
    }

    pub fn gap_antiperiodic(&self) -> f64 {
        self.log_gap_antiperiodic.map_or(0.0, f64::exp)
    }

    /// `2√|α_n β_n|`, the leading splitting `|λ_n(0) - λ_{-n}(0)|`.
    pub fn splitting(&self) -> f64 {
        match (self.log_alpha, self.log_beta) {
            (Some(la), Some(lb)) => (2f64.ln() + 0.5 * (la.re + lb.re)).exp(),
            _ => 0.0,
        }
    }
}

fn log_or_none(z: Complex64) -> Option<Complex64> {
    (z != ZERO).then(|| z.ln())
}

pub fn gap_predictors(n: u32, pot: &PotentialCoeffs) -> Result<GapPredictors> {
    if n == 0 {
        return Err(Error::InvalidInput("gap predictors need n >= 1".into()));
    }
    let nn = n as f64;
    let ln2pi = (2.0 * PI).ln();
    let denom_p = 2.0 * ((2.0 * nn - 1.0) * ln2pi + ln_factorial(2 * n as u64 - 1));
    let denom_a = 2.0 * (2.0 * nn * ln2pi + ln_factorial(2 * n as u64));
    let log_beta = log_or_none(pot.b()).map(|l| l * (2.0 * nn) - denom_p);
    let log_alpha = log_or_none(pot.a()).map(|l| l * (2.0 * nn) - denom_p);
    let abs_ab = pot.product_ab().norm();
    let (log_gap_periodic, log_gap_antiperiodic) = if abs_ab == 0.0 {
        (None, None)
    } else {
        let l = abs_ab.ln();
        (
            Some(2f64.ln() + nn * l - denom_p),
            Some(2f64.ln() + (nn + 0.5) * l - denom_a),
        )
    };
    Ok(GapPredictors {
        n,
        log_beta,
        log_alpha,
        log_gap_periodic,
        log_gap_antiperiodic,
    })
}

/// `(|λ_n(0) - λ_{-n}(0)|, |λ_n(π) - λ_{-n-1}(π)|)` from the closed forms.
pub fn predict_gaps(n: u32, pot: &PotentialCoeffs) -> Result<(f64, f64)> {
    let g = gap_predictors(n, pot)?;
    Ok((g.gap_periodic(), g.gap_antiperiodic()))
}

/// `t > 0` at which `(4πnt)² = -α_n β_n` in modulus, where the leading-order
/// discriminant comes closest to vanishing for real `t`.
pub fn critical_quasimomentum(n: u32, pot: &PotentialCoeffs) -> Result<Option<f64>> {
    let g = gap_predictors(n, pot)?;
    let split = g.splitting();
    Ok((split > 0.0).then(|| 0.5 * split / (4.0 * PI * n as f64)))
}

fn check_pole(lambda: Complex64, t: QuasiMomentum, j: i64) -> Result<Complex64> {
    let pole = t.free_eigenvalue(j);
    let diff = lambda - pole;
    if diff.norm() < POLE_DISTANCE {
        return Err(Error::PoleProximity {
            lambda,
            pole,
            distance: diff.norm(),
        });
    }
    Ok(diff)
}

/// Couplings `(B, B')` between modes `hi > lo`, with their logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCoupling {
    pub b: Complex64,
    pub b_prime: Complex64,
    /// `None` when the coupling vanishes.
    pub log_b: Option<Complex64>,
    pub log_b_prime: Option<Complex64>,
}

/// `B = b^{hi-lo} ∏_{lo<j<hi} (λ - d_j)^{-1}` and the same with `a`, summed in
/// log-space.
pub fn pair_coupling(
    hi: i64,
    lo: i64,
    pot: &PotentialCoeffs,
    lambda: Complex64,
    t: QuasiMomentum,
) -> Result<PairCoupling> {
    if hi <= lo {
        return Err(Error::InvalidInput(format!("need hi > lo, got ({hi}, {lo})")));
    }
    let mut log_prod = ZERO;
    for j in (lo + 1)..hi {
        log_prod += check_pole(lambda, t, j)?.ln();
    }
    let power = (hi - lo) as f64;
    let log_b = log_or_none(pot.b()).map(|l| l * power - log_prod);
    let log_b_prime = log_or_none(pot.a()).map(|l| l * power - log_prod);
    Ok(PairCoupling {
        b: log_b.map_or(ZERO, |l| l.exp()),
        b_prime: log_b_prime.map_or(ZERO, |l| l.exp()),
        log_b,
        log_b_prime,
    })
}

/// Leading terms `(b_{2n-1}(λ,t), b'_{2n-1}(λ,t))` of the coupling between
/// modes `n` and `-n`.
pub fn b_leading(n: u32, pot: &PotentialCoeffs, lambda: Complex64, t: QuasiMomentum) -> Result<(Complex64, Complex64)> {
    if n == 0 {
        return Err(Error::InvalidInput("b_leading needs n >= 1".into()));
    }
    let c = pair_coupling(n as i64, -(n as i64), pot, lambda, t)?;
    Ok((c.b, c.b_prime))
}

/// Sum over closed walks of odd length `k ≤ 2·k_terms - 1` (plus the closing
/// step) from `reference`, with unit steps, never visiting `reference` or
/// `excluded` in between. Each walk carries `(ab)^{(k+1)/2}` and a factor
/// `(λ - d_j)^{-1}` per visited mode.
pub fn walk_sum(
    reference: i64,
    excluded: i64,
    pot: &PotentialCoeffs,
    lambda: Complex64,
    t: QuasiMomentum,
    k_terms: usize,
) -> Result<Complex64> {
    if k_terms == 0 {
        return Err(Error::InvalidInput("k_terms must be >= 1".into()));
    }
    let ab = pot.product_ab();
    if ab == ZERO {
        return Ok(ZERO);
    }
    let mut total = ZERO;
    let mut abp = ab;
    for m in 1..=k_terms {
        let k = 2 * m - 1;
        let mut acc = ZERO;
        enumerate_walks(
            reference,
            excluded,
            lambda,
            t,
            k,
            0,
            reference,
            Complex64::new(1.0, 0.0),
            &mut acc,
        )?;
        total += abp * acc;
        abp *= ab;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn enumerate_walks(
    reference: i64,
    excluded: i64,
    lambda: Complex64,
    t: QuasiMomentum,
    k: usize,
    depth: usize,
    mode: i64,
    weight: Complex64,
    acc: &mut Complex64,
) -> Result<()> {
    if depth == k {
        if (mode - reference).abs() == 1 {
            *acc += weight;
        }
        return Ok(());
    }
    // the walk must be able to return to a neighbour of the reference
    let remaining = (k - depth) as i64;
    for step in [-1i64, 1] {
        let next = mode + step;
        if next == reference || next == excluded {
            continue;
        }
        if (next - reference).abs() - 1 > remaining - 1 {
            continue;
        }
        let diff = check_pole(lambda, t, next)?;
        enumerate_walks(reference, excluded, lambda, t, k, depth + 1, next, weight / diff, acc)?;
    }
    Ok(())
}

/// `(A, A', C)` for the pair `(n, -n)`.
pub fn a_truncated(
    n: u32,
    pot: &PotentialCoeffs,
    lambda: Complex64,
    t: QuasiMomentum,
    k_terms: usize,
) -> Result<(Complex64, Complex64, Complex64)> {
    let k = n as i64;
    let a = walk_sum(k, -k, pot, lambda, t, k_terms)?;
    let ap = walk_sum(-k, k, pot, lambda, t, k_terms)?;
    Ok((a, ap, (a - ap) * 0.5))
}

/// Truncated series for one mode pair at one `(λ, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerms {
    pub hi: i64,
    pub lo: i64,
    pub t: f64,
    pub lambda: Complex64,
    pub a_trunc: Complex64,
    pub aprime_trunc: Complex64,
    pub b_leading: Complex64,
    pub bprime_leading: Complex64,
    pub c: Complex64,
    /// `(d_hi - d_lo)/2`; `4πnt` for the pair `(n, -n)`.
    pub half_detuning: f64,
    pub d: Complex64,
    pub truncation_order: usize,
}

pub fn pair_series(
    hi: i64,
    lo: i64,
    pot: &PotentialCoeffs,
    lambda: Complex64,
    t: QuasiMomentum,
    k_terms: usize,
) -> Result<SeriesTerms> {
    let coupling = pair_coupling(hi, lo, pot, lambda, t)?;
    let a = walk_sum(hi, lo, pot, lambda, t, k_terms)?;
    let ap = walk_sum(lo, hi, pot, lambda, t, k_terms)?;
    let c = (a - ap) * 0.5;
    let half_detuning = 0.5 * t.free_difference(hi, lo);
    let h = c + half_detuning;
    Ok(SeriesTerms {
        hi,
        lo,
        t: t.value(),
        lambda,
        a_trunc: a,
        aprime_trunc: ap,
        b_leading: coupling.b,
        bprime_leading: coupling.b_prime,
        c,
        half_detuning,
        d: h * h + coupling.b * coupling.b_prime,
        truncation_order: k_terms,
    })
}

/// `D(λ, t) = (4πnt + C)² + BB'` for the pair `(n, -n)`.
pub fn splitting_d(
    n: u32,
    pot: &PotentialCoeffs,
    lambda: Complex64,
    t: QuasiMomentum,
    k_terms: usize,
) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::InvalidInput("splitting_d needs n >= 1".into()));
    }
    Ok(pair_series(n as i64, -(n as i64), pot, lambda, t, k_terms)?.d)
}

/// Settings for [`predict_eigenvalues`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictorConfig {
    /// Width of the windows `[0, ρ]` and `[π - ρ, π]`.
    pub rho: f64,
    pub k_terms: usize,
    pub n_min: u32,
    pub max_iters: usize,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        Self {
            rho: 0.02,
            k_terms: 3,
            n_min: 1,
            max_iters: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionRegime {
    NearZero,
    NearPi,
    MidInterval,
}

/// Two predicted eigenvalues with the band labels they approximate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedPair {
    pub regime: PredictionRegime,
    pub hi_label: BandIndex,
    pub lo_label: BandIndex,
    /// Eigenvalue continued from the free value of `hi_label`.
    pub hi: Complex64,
    /// Eigenvalue continued from the free value of `lo_label`.
    pub lo: Complex64,
    pub iterations: usize,
}

impl PredictedPair {
    pub fn get(&self, label: BandIndex) -> Option<Complex64> {
        if label == self.hi_label {
            Some(self.hi)
        } else if label == self.lo_label {
            Some(self.lo)
        } else {
            None
        }
    }
}

/// Predicts the two eigenvalues of the pair containing label `n`.
///
/// Inside `[0, ρ]` and `[π - ρ, π]` this iterates
/// `λ = (d_hi + A + d_lo + A')/2 ± √D` with `√D` continued from the free
/// limit (`Re(√D·conj(h)) ≥ 0`, `h = (d_hi - d_lo)/2 + C`); in between it
/// returns the free values `(2π·label + t)²`. Negative `t` is handled through
/// `λ_k(-t) = λ_{-k}(t)`.
pub fn predict_eigenvalues(
    n: u32,
    pot: &PotentialCoeffs,
    t: QuasiMomentum,
    cfg: &PredictorConfig,
) -> Result<PredictedPair> {
    if n == 0 || n < cfg.n_min {
        return Err(Error::InvalidInput(format!(
            "prediction needs n >= max(1, n_min = {}), got {n}",
            cfg.n_min
        )));
    }
    if !(cfg.rho > 0.0 && cfg.rho < PI / 2.0) {
        return Err(Error::InvalidInput(format!(
            "rho must lie in (0, π/2), got {}",
            cfg.rho
        )));
    }
    let flip = t.value() < 0.0;
    let tau = QuasiMomentum::new(t.value().abs())?;
    let tv = tau.value();
    let k = n as i64;
    let (regime, hi, lo) = if tv <= cfg.rho {
        (PredictionRegime::NearZero, k, -k)
    } else if tv >= PI - cfg.rho {
        (PredictionRegime::NearPi, k, -k - 1)
    } else {
        (PredictionRegime::MidInterval, k, -k)
    };

    let (upper, lower, iterations) = match regime {
        PredictionRegime::MidInterval => (
            Complex64::new(tau.free_eigenvalue(hi), 0.0),
            Complex64::new(tau.free_eigenvalue(lo), 0.0),
            0,
        ),
        _ => {
            let (u, iu) = iterate_branch(hi, lo, pot, tau, cfg, 1.0)?;
            let (l, il) = iterate_branch(hi, lo, pot, tau, cfg, -1.0)?;
            (u, l, iu.max(il))
        }
    };
    let label = |m: i64| BandIndex(if flip { -m } else { m } as i32);
    Ok(PredictedPair {
        regime,
        hi_label: label(hi),
        lo_label: label(lo),
        hi: upper,
        lo: lower,
        iterations,
    })
}

fn iterate_branch(
    hi: i64,
    lo: i64,
    pot: &PotentialCoeffs,
    t: QuasiMomentum,
    cfg: &PredictorConfig,
    sigma: f64,
) -> Result<(Complex64, usize)> {
    let d_hi = t.free_eigenvalue(hi);
    let e_lo = t.free_difference(lo, hi);
    // work with ζ = λ - d_hi
    let mut zeta = if sigma > 0.0 { ZERO } else { Complex64::new(e_lo, 0.0) };
    let mut last_step = f64::INFINITY;
    let mut growth = 0;
    for it in 1..=cfg.max_iters {
        let s = pair_series(hi, lo, pot, zeta + d_hi, t, cfg.k_terms)?;
        let h = s.c + s.half_detuning;
        let mut root = s.d.sqrt();
        if h != ZERO && (root * h.conj()).re < 0.0 {
            root = -root;
        }
        let mid = (s.a_trunc + e_lo + s.aprime_trunc) * 0.5;
        let next = mid + root * sigma;
        let step = (next - zeta).norm();
        zeta = next;
        if step <= 4.0 * f64::EPSILON * (1.0 + (zeta + d_hi).norm()) {
            return Ok((zeta + d_hi, it));
        }
        if step > last_step {
            growth += 1;
            if growth > 5 {
                break;
            }
        }
        last_step = step;
    }
    if last_step <= 1e-12 * (1.0 + (zeta + d_hi).norm()) {
        return Ok((zeta + d_hi, cfg.max_iters));
    }
    Err(Error::FixedPoint(format!(
        "eigenvalue predictor for modes ({hi}, {lo}) at t = {} did not contract (last step {last_step:e})",
        t.value()
    )))
}
