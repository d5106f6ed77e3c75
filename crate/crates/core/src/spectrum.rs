//! Spectral arcs `Γ_n = {λ_n(t) : t ∈ [0, π]}` and their assembly.
//!
//! Arcs are traced by predictor-corrector continuation in `t`: a linear
//! extrapolation of the last two samples seeds Newton's method on
//! `F(λ) = 2 cos t`. The Floquet reduction is consulted at the first sample,
//! at every `resync_every`-th sample and at every sample where the label sits
//! within a localization radius of its partner, which is where band-hopping
//! can occur.

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::predict_gaps;
use crate::error::{Error, Result};
use crate::floquet::{localization_radius, measure_gap, GapEdge, ReducedPair};
use crate::model::{BandIndex, PotentialCoeffs, QuasiMomentum, SolverConfig};
use crate::shooting::{integrate_fundamental, solve_characteristic, MultiplicityThresholds};

/// Where a sample's eigenvalue came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSource {
    /// Newton on the discriminant.
    Shooting,
    /// Floquet reduction, used where Newton stalled at a near-critical point,
    /// converged to the partner eigenvalue, or returned a root too poorly
    /// conditioned (small `|dF/dλ|`) to meet the target accuracy.
    Floquet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcSample {
    pub t: f64,
    pub lambda: Complex64,
    pub abs_df: f64,
    /// `|F(λ) - 2 cos t|`.
    pub f_residual: f64,
    pub source: SampleSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralArc {
    pub n: BandIndex,
    pub samples: Vec<ArcSample>,
    pub endpoint_0: Complex64,
    pub endpoint_pi: Complex64,
    pub min_df: f64,
    pub max_step: f64,
    /// `false` for `|n| ≤ n₀`, where no asymptotic statement is made.
    pub asymptotic: bool,
    /// Grid points inserted by bisection.
    pub refinements: usize,
    /// Samples where Newton landed on the partner and was re-seeded.
    pub corrections: usize,
}

impl SpectralArc {
    pub fn ts(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn lambdas(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.samples.iter().map(|s| s.lambda)
    }

    pub fn max_f_residual(&self) -> f64 {
        self.samples.iter().map(|s| s.f_residual).fold(0.0, f64::max)
    }
}

/// Continuation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcConfig {
    pub resync_every: usize,
    /// Largest accepted `|Δλ|` between samples. `None` means twice the free
    /// dispersion step `|(2πn+t₁)² - (2πn+t₀)²|` plus half the localization
    /// radius of the label.
    pub jump_threshold: Option<f64>,
    pub max_refine_depth: u32,
    /// Labels with `|n| ≤ n0` are flagged as outside the asymptotic regime.
    pub n0: u32,
}

impl Default for ArcConfig {
    fn default() -> Self {
        Self {
            resync_every: 16,
            jump_threshold: None,
            max_refine_depth: 8,
            n0: 3,
        }
    }
}

/// `n` equally spaced points on `[0, π]`, both ends included.
pub fn uniform_grid(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "a t-grid needs at least 2 points, got {n}"
        )));
    }
    let mut g: Vec<f64> = (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect();
    g[n - 1] = PI;
    Ok(g)
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.len() < 2 || t_grid[0] != 0.0 || *t_grid.last().unwrap() != PI {
        return Err(Error::InvalidInput("t-grid must start at 0 and end at π".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("t-grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Relative root uncertainty above which a shooting root is replaced.
const ILL_CONDITIONED: f64 = 1e-10;

struct FloquetPair {
    own: Complex64,
    partner: Complex64,
}

fn floquet_pair(pot: &PotentialCoeffs, t: f64, n: i32, cfg: &SolverConfig) -> Result<FloquetPair> {
    let pair = ReducedPair::new(pot, QuasiMomentum::new(t)?, n as i64, cfg.truncation_half_width)?;
    let branch = if n as i64 == pair.hi() { 1 } else { -1 };
    Ok(FloquetPair {
        own: pair.solve(branch)?.lambda,
        partner: pair.solve(-branch)?.lambda,
    })
}

fn near_partner(n: i32, t: f64) -> bool {
    let q = QuasiMomentum::new(t).expect("grid values are finite");
    let partner = crate::floquet::partner_mode(n as i64, q);
    q.free_difference(n as i64, partner).abs() < 2.0 * localization_radius(n as i64)
}

struct Tracer<'a> {
    n: i32,
    pot: &'a PotentialCoeffs,
    cfg: &'a SolverConfig,
    /// Largest accepted distance between a Newton root and the Floquet value.
    hop_limit: f64,
    corrections: usize,
}

impl Tracer<'_> {
    fn sample(&mut self, t: f64, seed: Complex64, check: bool) -> Result<ArcSample> {
        let q = QuasiMomentum::new(t)?;
        let target = Complex64::new(2.0 * t.cos(), 0.0);
        let newton = |seed| solve_characteristic(self.pot, q, seed, self.cfg);
        let mut floquet = None;
        let shot = if check {
            let fp = floquet_pair(self.pot, t, self.n, self.cfg)?;
            let r = newton(fp.own);
            floquet = Some(fp);
            r
        } else {
            newton(seed)
        };
        let shot = match shot {
            Ok(r) => Some(r),
            Err(Error::NearCritical { .. }) | Err(Error::NewtonDivergence { .. }) if floquet.is_some() => None,
            Err(Error::NearCritical { .. }) | Err(Error::NewtonDivergence { .. }) => {
                let fp = floquet_pair(self.pot, t, self.n, self.cfg)?;
                let r = newton(fp.own).ok();
                floquet = Some(fp);
                r
            }
            Err(e) => return Err(e),
        };
        let limit = self.hop_limit;
        let consistent = |lam: Complex64, fp: &FloquetPair| {
            let d = (lam - fp.own).norm();
            d <= (lam - fp.partner).norm() && d < limit
        };
        let accepted = match (shot, &floquet) {
            (Some(r), Some(fp)) if !consistent(r.lambda, fp) => {
                self.corrections += 1;
                newton(fp.own).ok().filter(|r2| consistent(r2.lambda, fp))
            }
            (shot, _) => shot,
        };
        // An O(δ) error in F moves a root by δ/|dF|; where that exceeds the
        // target accuracy the Floquet value is the better estimate.
        let accepted = match accepted {
            Some(r) => {
                let uncertainty = r.sample.est_error.max(self.cfg.ode_tolerance) / r.sample.df.norm();
                if uncertainty > ILL_CONDITIONED * (1.0 + r.lambda.norm()) {
                    if floquet.is_none() {
                        floquet = Some(floquet_pair(self.pot, t, self.n, self.cfg)?);
                    }
                    None
                } else {
                    Some(r)
                }
            }
            None => None,
        };
        if let Some(r) = accepted {
            return Ok(ArcSample {
                t,
                lambda: r.lambda,
                abs_df: r.sample.df.norm(),
                f_residual: r.residual,
                source: SampleSource::Shooting,
            });
        }
        let lambda = floquet.expect("fallback only with a Floquet value").own;
        let s = integrate_fundamental(self.pot, lambda, self.cfg)?;
        Ok(ArcSample {
            t,
            lambda,
            abs_df: s.df.norm(),
            f_residual: (s.f - target).norm(),
            source: SampleSource::Floquet,
        })
    }
}

/// Traces `Γ_n` over `t_grid`, which must run from `0` to `π`.
pub fn trace_arc(
    n: i32,
    pot: &PotentialCoeffs,
    t_grid: &[f64],
    cfg: &SolverConfig,
    arc_cfg: &ArcConfig,
) -> Result<SpectralArc> {
    if n == 0 {
        return Err(Error::InvalidInput("arcs are traced for |n| >= 1".into()));
    }
    cfg.check_label(n)?;
    check_grid(t_grid)?;
    if arc_cfg.resync_every == 0 {
        return Err(Error::InvalidInput("resync_every must be positive".into()));
    }
    let base = 0.5 * localization_radius(n as i64);
    let threshold = |t0: f64, t1: f64| {
        arc_cfg.jump_threshold.unwrap_or_else(|| {
            let free = |t: f64| (2.0 * PI * n as f64 + t).powi(2);
            2.0 * (free(t1) - free(t0)).abs() + base
        })
    };
    let min_dt = t_grid.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
        / 2f64.powi(arc_cfg.max_refine_depth as i32);

    let mut tracer = Tracer {
        n,
        pot,
        cfg,
        hop_limit: base,
        corrections: 0,
    };
    let start = floquet_pair(pot, 0.0, n, cfg)?.own;
    let mut samples = vec![tracer.sample(0.0, start, true)?];
    let mut pending: VecDeque<f64> = t_grid[1..].iter().copied().collect();
    let mut refinements = 0;
    let mut since_sync = 0;

    while let Some(t) = pending.pop_front() {
        let last = samples[samples.len() - 1];
        let free = |t: f64| (2.0 * PI * n as f64 + t).powi(2);
        let seed = match samples.len() {
            1 => last.lambda + (free(t) - free(last.t)),
            k => {
                let prev = samples[k - 2];
                last.lambda + (last.lambda - prev.lambda) * ((t - last.t) / (last.t - prev.t))
            }
        };
        since_sync += 1;
        let check = since_sync >= arc_cfg.resync_every || near_partner(n, t) || near_partner(n, last.t) || t == PI;
        let fail = |reason: String, samples: &[ArcSample]| Error::ArcTracing {
            label: n,
            t,
            reason,
            samples: samples.iter().map(|s| (s.t, s.lambda)).collect(),
        };
        let s = match tracer.sample(t, seed, check) {
            Ok(s) => s,
            Err(e) => return Err(fail(e.to_string(), &samples)),
        };
        let jump = (s.lambda - last.lambda).norm();
        let threshold = threshold(last.t, t);
        if jump > threshold {
            let dt = t - last.t;
            if dt / 2.0 < min_dt {
                return Err(fail(
                    format!("jump {jump:e} exceeds threshold {threshold:e} after refinement"),
                    &samples,
                ));
            }
            pending.push_front(t);
            pending.push_front(last.t + dt / 2.0);
            refinements += 1;
            continue;
        }
        if check {
            since_sync = 0;
        }
        samples.push(s);
    }

    let max_step = samples
        .windows(2)
        .map(|w| (w[1].lambda - w[0].lambda).norm())
        .fold(0.0, f64::max);
    let min_df = samples.iter().map(|s| s.abs_df).fold(f64::INFINITY, f64::min);
    Ok(SpectralArc {
        n: BandIndex(n),
        endpoint_0: samples[0].lambda,
        endpoint_pi: samples[samples.len() - 1].lambda,
        samples,
        min_df,
        max_step,
        asymptotic: n.unsigned_abs() > arc_cfg.n0,
        refinements,
        corrections: tracer.corrections,
    })
}

/// Arcs for `n = -n_max..=-1` and `1..=n_max`, traced in parallel.
pub fn assemble_spectrum(
    pot: &PotentialCoeffs,
    n_max: u32,
    t_grid: &[f64],
    cfg: &SolverConfig,
    arc_cfg: &ArcConfig,
) -> Result<Vec<SpectralArc>> {
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be >= 1".into()));
    }
    cfg.check_label(n_max as i32)?;
    let labels: Vec<i32> = (-(n_max as i32)..=-1).chain(1..=n_max as i32).collect();
    labels
        .par_iter()
        .map(|&n| trace_arc(n, pot, t_grid, cfg, arc_cfg))
        .collect()
}

/// One measured endpoint gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GapCell {
    /// The predicted gap clears the noise floor; `ratio` is measured over
    /// predicted (absent when both vanish identically).
    Resolved {
        measured: f64,
        predicted: f64,
        ratio: Option<f64>,
    },
    /// The predicted gap is within three orders of magnitude of the noise
    /// floor, so no comparison is made.
    Unresolvable { predicted: f64, noise_floor: f64 },
}

impl GapCell {
    fn new(measured: f64, predicted: f64, noise_floor: f64) -> Self {
        if measured == 0.0 && predicted == 0.0 {
            return GapCell::Resolved {
                measured,
                predicted,
                ratio: None,
            };
        }
        if predicted >= 1e3 * noise_floor && predicted > 0.0 {
            GapCell::Resolved {
                measured,
                predicted,
                ratio: Some(measured / predicted),
            }
        } else {
            GapCell::Unresolvable { predicted, noise_floor }
        }
    }

    pub fn ratio(&self) -> Option<f64> {
        match self {
            GapCell::Resolved { ratio, .. } => *ratio,
            GapCell::Unresolvable { .. } => None,
        }
    }

    pub fn is_resolvable(&self) -> bool {
        matches!(self, GapCell::Resolved { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n: u32,
    pub periodic: GapCell,
    pub antiperiodic: GapCell,
}

/// Measured and predicted gaps for `n = 1..=n_max`.
pub fn gap_table(pot: &PotentialCoeffs, n_max: u32, cfg: &SolverConfig) -> Result<Vec<GapRow>> {
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let (pred_0, pred_pi) = predict_gaps(n, pot)?;
            let g0 = measure_gap(pot, n, GapEdge::Periodic, cfg)?;
            let gpi = measure_gap(pot, n, GapEdge::Antiperiodic, cfg)?;
            Ok(GapRow {
                n,
                periodic: GapCell::new(g0.gap, pred_0, g0.noise_floor),
                antiperiodic: GapCell::new(gpi.gap, pred_pi, gpi.noise_floor),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcSimplicity {
    Simple,
    /// `|dF/dλ|` dropped below the multiplicity threshold somewhere.
    PossiblyMultiple,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcVerdict {
    pub n: BandIndex,
    pub min_df: f64,
    pub asymptotic: bool,
    pub simplicity: ArcSimplicity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub n0: u32,
    /// Smallest sample-to-sample distance between distinct arcs with
    /// `|n| > n0`, with the labels attaining it.
    pub min_distance: Option<(f64, BandIndex, BandIndex)>,
    pub gaps: Vec<GapRow>,
    pub arcs: Vec<ArcVerdict>,
}

/// Separation, gap and simplicity summary of a set of arcs.
pub fn separation_report(
    arcs: &[SpectralArc],
    pot: &PotentialCoeffs,
    cfg: &SolverConfig,
    n0: u32,
) -> Result<SeparationReport> {
    if arcs.len() < 2 {
        return Err(Error::InvalidInput(
            "a separation report needs at least two arcs".into(),
        ));
    }
    let far: Vec<&SpectralArc> = arcs.iter().filter(|a| a.n.0.unsigned_abs() > n0).collect();
    let mut min_distance: Option<(f64, BandIndex, BandIndex)> = None;
    for (i, x) in far.iter().enumerate() {
        for y in &far[i + 1..] {
            let d = x
                .samples
                .iter()
                .flat_map(|p| y.samples.iter().map(move |q| (p.lambda - q.lambda).norm()))
                .fold(f64::INFINITY, f64::min);
            if min_distance.is_none_or(|(m, _, _)| d < m) {
                min_distance = Some((d, x.n, y.n));
            }
        }
    }
    let n_max = arcs.iter().map(|a| a.n.0.unsigned_abs()).max().unwrap_or(0);
    let gaps = gap_table(pot, n_max, cfg)?;
    let thr = MultiplicityThresholds::default().derivative;
    let verdicts = arcs
        .iter()
        .map(|a| ArcVerdict {
            n: a.n,
            min_df: a.min_df,
            asymptotic: a.asymptotic,
            simplicity: if a.min_df > thr {
                ArcSimplicity::Simple
            } else {
                ArcSimplicity::PossiblyMultiple
            },
        })
        .collect();
    Ok(SeparationReport {
        n0,
        min_distance,
        gaps,
        arcs: verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pot(a: Complex64, b: Complex64) -> PotentialCoeffs {
        PotentialCoeffs::new(a, b).unwrap()
    }

    fn cfg() -> SolverConfig {
        SolverConfig::default().with_truncation(16)
    }

    #[test]
    fn arcs_leave_a_degenerate_start_on_their_own_branch() {
        let p = pot(c(1.0, 0.0), c(0.0, 1.0));
        let grid = uniform_grid(33).unwrap();
        for n in [-1, 1] {
            let arc = trace_arc(n, &p, &grid, &cfg(), &ArcConfig::default()).unwrap();
            assert_eq!(arc.refinements, 0);
            for s in &arc.samples {
                let (pair, _) =
                    crate::floquet::labeled_eigenpair(&p, QuasiMomentum::new(s.t).unwrap(), BandIndex(n), &cfg())
                        .unwrap();
                assert!(
                    (s.lambda - pair.lambda).norm() < 1e-7 * (1.0 + s.lambda.norm()),
                    "n = {n}, t = {}",
                    s.t
                );
            }
        }
    }

    #[test]
    fn free_arc_is_the_dispersion_curve() {
        let grid = uniform_grid(33).unwrap();
        let arc = trace_arc(2, &PotentialCoeffs::zero(), &grid, &cfg(), &ArcConfig::default()).unwrap();
        assert_eq!(arc.samples.len(), 33);
        for s in &arc.samples {
            let want = (4.0 * PI + s.t).powi(2);
            assert!((s.lambda - want).norm() < 1e-8 * want, "t = {}", s.t);
        }
        assert!((arc.endpoint_pi - 25.0 * PI * PI).norm() < 1e-8 * 250.0);
        assert!(!arc.asymptotic);
    }

    #[test]
    fn grid_must_span_the_interval() {
        let p = PotentialCoeffs::zero();
        assert!(trace_arc(1, &p, &[0.0, 1.0], &cfg(), &ArcConfig::default()).is_err());
        assert!(trace_arc(1, &p, &[0.0, 2.0, 1.0, PI], &cfg(), &ArcConfig::default()).is_err());
        assert!(trace_arc(0, &p, &uniform_grid(5).unwrap(), &cfg(), &ArcConfig::default()).is_err());
    }

    #[test]
    fn mathieu_endpoints_match_gap() {
        let p = pot(c(1.0, 0.0), c(1.0, 0.0));
        let grid = uniform_grid(65).unwrap();
        let up = trace_arc(1, &p, &grid, &cfg(), &ArcConfig::default()).unwrap();
        let down = trace_arc(-1, &p, &grid, &cfg(), &ArcConfig::default()).unwrap();
        for arc in [&up, &down] {
            for s in &arc.samples {
                assert!(s.lambda.im.abs() < 1e-8 * (1.0 + s.lambda.norm()));
            }
            assert!(arc.endpoint_0.im.abs() < 1e-8);
        }
        let gap = (up.endpoint_0 - down.endpoint_0).norm();
        let (pred, _) = predict_gaps(1, &p).unwrap();
        assert!((gap / pred - 1.0).abs() < 0.1, "gap {gap}, predicted {pred}");
    }

    #[test]
    fn complex_arc_satisfies_characteristic_equation() {
        let p = pot(c(1.0, 0.0), c(0.0, 2.0));
        let grid = uniform_grid(49).unwrap();
        let arc = trace_arc(3, &p, &grid, &cfg(), &ArcConfig::default()).unwrap();
        assert!(arc.max_f_residual() < cfg().newton_tolerance);
        assert!(arc.samples.iter().any(|s| s.lambda.im.abs() > 1e-6));
        assert!(arc.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn refinement_shrinks_steps() {
        let p = pot(c(1.0, 0.0), c(0.0, 2.0));
        let coarse = trace_arc(2, &p, &uniform_grid(17).unwrap(), &cfg(), &ArcConfig::default()).unwrap();
        let fine = trace_arc(2, &p, &uniform_grid(33).unwrap(), &cfg(), &ArcConfig::default()).unwrap();
        assert!(fine.max_step <= coarse.max_step / 2.0 * 4.0);
        assert!(fine.max_step < coarse.max_step);
    }

    #[test]
    fn tight_threshold_forces_refinement_or_failure() {
        let grid = uniform_grid(5).unwrap();
        let arc_cfg = ArcConfig {
            jump_threshold: Some(5.0),
            max_refine_depth: 4,
            ..ArcConfig::default()
        };
        let arc = trace_arc(1, &PotentialCoeffs::zero(), &grid, &cfg(), &arc_cfg).unwrap();
        assert!(arc.refinements > 0);
        assert!(arc.max_step <= 5.0);
        let strict = ArcConfig {
            jump_threshold: Some(1e-3),
            max_refine_depth: 2,
            ..ArcConfig::default()
        };
        match trace_arc(1, &PotentialCoeffs::zero(), &grid, &cfg(), &strict) {
            Err(Error::ArcTracing { samples, .. }) => assert!(!samples.is_empty()),
            other => panic!("expected an arc-tracing failure, got {other:?}"),
        }
    }

    #[test]
    fn gauge_partners_give_identical_arcs() {
        let grid = uniform_grid(17).unwrap();
        let x = trace_arc(2, &pot(c(1.0, 0.0), c(2.0, 0.0)), &grid, &cfg(), &ArcConfig::default()).unwrap();
        let y = trace_arc(2, &pot(c(2.0, 0.0), c(1.0, 0.0)), &grid, &cfg(), &ArcConfig::default()).unwrap();
        for (p, q) in x.samples.iter().zip(&y.samples) {
            assert!((p.lambda - q.lambda).norm() < 1e-8 * (1.0 + p.lambda.norm()));
        }
    }

    #[test]
    fn assembled_free_spectrum_and_report() {
        let grid = uniform_grid(9).unwrap();
        let arcs = assemble_spectrum(&PotentialCoeffs::zero(), 2, &grid, &cfg(), &ArcConfig::default()).unwrap();
        let labels: Vec<i32> = arcs.iter().map(|a| a.n.0).collect();
        assert_eq!(labels, vec![-2, -1, 1, 2]);
        let rep = separation_report(&arcs, &PotentialCoeffs::zero(), &cfg(), 0).unwrap();
        assert_eq!(rep.gaps.len(), 2);
        for row in &rep.gaps {
            for cell in [row.periodic, row.antiperiodic] {
                assert_eq!(
                    cell,
                    GapCell::Resolved {
                        measured: 0.0,
                        predicted: 0.0,
                        ratio: None
                    }
                );
            }
        }
        // free arcs touch at the band edges
        assert!(rep.min_distance.unwrap().0 < 1e-9);
    }

    #[test]
    fn gap_table_marks_unresolvable_rows() {
        let p = pot(c(1.0, 0.0), c(1.0, 0.0));
        let rows = gap_table(&p, 5, &SolverConfig::default()).unwrap();
        assert!(rows[0].periodic.is_resolvable());
        assert!(rows[1].periodic.is_resolvable());
        assert!(!rows[3].periodic.is_resolvable());
        assert!(!rows[4].periodic.is_resolvable());
        let r1 = rows[0].periodic.ratio().unwrap();
        let r2 = rows[1].periodic.ratio().unwrap();
        assert!((r2 - 1.0).abs() < (r1 - 1.0).abs() + 1e-12);
    }
}
