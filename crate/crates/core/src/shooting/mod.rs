//! Hill discriminant by direct integration of `-y'' + q y = λ y`.
//!
//! `θ` and `φ` are the fundamental solutions with `θ(0) = φ'(0) = 1` and
//! `θ'(0) = φ(0) = 0`. Eigenvalues of `H_t` are the roots of
//! `F(λ) = φ'(1, λ) + θ(1, λ) = 2 cos t`. The first and second λ-derivatives
//! of `F` are obtained by integrating the variational equations alongside the
//! solutions, so they are as accurate as `F` itself.

mod integrator;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PotentialCoeffs, QuasiMomentum, SolverConfig};
use integrator::{dopri5, rk4_fixed, State, Tolerance};

/// Monodromy data at one spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantSample {
    pub lambda: Complex64,
    pub theta1: Complex64,
    pub theta1p: Complex64,
    pub phi1: Complex64,
    pub phi1p: Complex64,
    #[serde(rename = "F")]
    pub f: Complex64,
    #[serde(rename = "dF")]
    pub df: Complex64,
    #[serde(rename = "d2F")]
    pub d2f: Complex64,
    /// Accumulated local error estimate of `θ(1)` and `φ'(1)`.
    pub est_error: f64,
    pub steps: usize,
}

impl DiscriminantSample {
    /// `θφ' - θ'φ` at `x = 1`; identically `1` for the exact solutions.
    pub fn wronskian(&self) -> Complex64 {
        self.theta1 * self.phi1p - self.theta1p * self.phi1
    }
}

const DIM: usize = 12;
/// Components under step-size control: the solutions and first variations.
const CONTROLLED: usize = 8;

fn rhs(pot: &PotentialCoeffs, lambda: Complex64) -> impl Fn(f64, &State<DIM>) -> State<DIM> + '_ {
    move |x, y| {
        let qm = pot.eval(x) - lambda;
        [
            y[1],
            qm * y[0],
            y[3],
            qm * y[2],
            y[5],
            qm * y[4] - y[0],
            y[7],
            qm * y[6] - y[2],
            y[9],
            qm * y[8] - y[4] * 2.0,
            y[11],
            qm * y[10] - y[6] * 2.0,
        ]
    }
}

fn initial_state() -> State<DIM> {
    let mut y = [Complex64::new(0.0, 0.0); DIM];
    y[0] = Complex64::new(1.0, 0.0);
    y[3] = Complex64::new(1.0, 0.0);
    y
}

fn check_lambda(lambda: Complex64) -> Result<()> {
    if lambda.re.is_finite() && lambda.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "spectral parameter must be finite, got {lambda}"
        )))
    }
}

fn sample_from_state(lambda: Complex64, y: &State<DIM>, est_error: f64, steps: usize) -> DiscriminantSample {
    DiscriminantSample {
        lambda,
        theta1: y[0],
        theta1p: y[1],
        phi1: y[2],
        phi1p: y[3],
        f: y[3] + y[0],
        df: y[7] + y[4],
        d2f: y[11] + y[8],
        est_error,
        steps,
    }
}

/// Integrates `θ`, `φ` and their λ-derivatives over `[0, 1]`.
pub fn integrate_fundamental(
    pot: &PotentialCoeffs,
    lambda: Complex64,
    cfg: &SolverConfig,
) -> Result<DiscriminantSample> {
    check_lambda(lambda)?;
    cfg.validate()?;
    let tol = Tolerance {
        rtol: cfg.ode_tolerance,
        atol: cfg.ode_tolerance,
    };
    let h0 = 0.05 / (1.0 + lambda.norm().sqrt());
    let sol = dopri5(rhs(pot, lambda), 0.0, 1.0, initial_state(), tol, CONTROLLED, h0)?;
    let est = sol.accumulated_error[0] + sol.accumulated_error[3];
    Ok(sample_from_state(lambda, &sol.y, est, sol.steps))
}

/// `F(λ)` from classical RK4 with `n_steps` and `2·n_steps` equal steps,
/// combined by Richardson extrapolation. Used to cross-check the adaptive
/// integrator.
pub fn discriminant_fixed_step(pot: &PotentialCoeffs, lambda: Complex64, n_steps: usize) -> Result<Complex64> {
    check_lambda(lambda)?;
    if n_steps == 0 {
        return Err(Error::InvalidInput("n_steps must be positive".into()));
    }
    let coarse = rk4_fixed(rhs(pot, lambda), 0.0, 1.0, initial_state(), n_steps);
    let fine = rk4_fixed(rhs(pot, lambda), 0.0, 1.0, initial_state(), 2 * n_steps);
    let fc = coarse[0] + coarse[3];
    let ff = fine[0] + fine[3];
    Ok((ff * 16.0 - fc) / 15.0)
}

/// Result of Newton's method on `F(λ) = 2 cos t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicRoot {
    pub lambda: Complex64,
    pub iterations: usize,
    /// `|F(λ) - 2 cos t|` at the returned point.
    pub residual: f64,
    pub sample: DiscriminantSample,
}

/// `|dF|` below this stops Newton with a near-critical diagnosis.
pub const NEAR_CRITICAL_DF: f64 = 1e-13;

/// Newton's method on `F(λ) - 2 cos t` from `seed`.
///
/// Stops when both `|F - 2 cos t| < tol` and the last step is below
/// `tol·(1 + |λ|)`.
pub fn solve_characteristic(
    pot: &PotentialCoeffs,
    t: QuasiMomentum,
    seed: Complex64,
    cfg: &SolverConfig,
) -> Result<CharacteristicRoot> {
    check_lambda(seed)?;
    let target = Complex64::new(2.0 * t.value().cos(), 0.0);
    let tol = cfg.newton_tolerance;
    let mut lambda = seed;
    let mut last_step = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for it in 0..=cfg.max_newton_iters {
        let s = match integrate_fundamental(pot, lambda, cfg) {
            Ok(s) => s,
            // an iterate thrown far from the seed, where the solutions overflow
            Err(Error::Integration { .. }) if it > 0 => {
                return Err(Error::NewtonDivergence {
                    last: lambda,
                    residual,
                    iterations: it,
                })
            }
            Err(e) => return Err(e),
        };
        residual = (s.f - target).norm();
        if residual < tol && last_step < tol * (1.0 + lambda.norm()) {
            return Ok(CharacteristicRoot {
                lambda,
                iterations: it,
                residual,
                sample: s,
            });
        }
        if it == cfg.max_newton_iters {
            break;
        }
        let adf = s.df.norm();
        if adf < NEAR_CRITICAL_DF {
            return Err(Error::NearCritical {
                lambda,
                abs_derivative: adf,
            });
        }
        let step = (s.f - target) / s.df;
        lambda -= step;
        last_step = step.norm();
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            break;
        }
    }
    Err(Error::NewtonDivergence {
        last: lambda,
        residual,
        iterations: cfg.max_newton_iters,
    })
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rectangle {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let ok = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) && re_min <= re_max && im_min <= im_max;
        if !ok {
            return Err(Error::InvalidInput(
                "rectangle bounds must be finite and ordered".into(),
            ));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn around(center: Complex64, half_re: f64, half_im: f64) -> Result<Self> {
        Self::new(
            center.re - half_re,
            center.re + half_re,
            center.im - half_im,
            center.im + half_im,
        )
    }

    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re_min - slack
            && z.re <= self.re_max + slack
            && z.im >= self.im_min - slack
            && z.im <= self.im_max + slack
    }

    fn min_abs(&self) -> f64 {
        let re = if self.re_min <= 0.0 && self.re_max >= 0.0 {
            0.0
        } else {
            self.re_min.abs().min(self.re_max.abs())
        };
        let im = if self.im_min <= 0.0 && self.im_max >= 0.0 {
            0.0
        } else {
            self.im_min.abs().min(self.im_max.abs())
        };
        re.hypot(im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub lambda: Complex64,
    #[serde(rename = "F")]
    pub f: Complex64,
    #[serde(rename = "d2F")]
    pub d2f: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointSearch {
    pub points: Vec<CriticalPoint>,
    /// Set when the grid is too coarse for the region, so zeros may be missed.
    pub warning: Option<String>,
}

/// Zeros of `dF/dλ` in `region`, by Newton from a `grid_density²` seed grid.
/// Completeness is best effort.
pub fn find_critical_points(
    pot: &PotentialCoeffs,
    region: Rectangle,
    grid_density: usize,
    cfg: &SolverConfig,
) -> Result<CriticalPointSearch> {
    if grid_density == 0 {
        return Err(Error::InvalidInput("grid density must be positive".into()));
    }
    let g = grid_density;
    let width = region.re_max - region.re_min;
    let height = region.im_max - region.im_min;
    let dx = if g > 1 { width / (g - 1) as f64 } else { width };
    let dy = if g > 1 { height / (g - 1) as f64 } else { height };

    // Consecutive critical points of the free discriminant near |λ| = R are
    // about 2π√R apart; the potential perturbs this only slightly.
    let spacing = 2.0 * std::f64::consts::PI * region.min_abs().sqrt().max(1.0);
    let warning = (dx.max(dy) > 0.5 * spacing).then(|| {
        format!(
            "grid spacing {:.3e} exceeds half the expected critical-point spacing {:.3e}; zeros may be missed",
            dx.max(dy),
            spacing
        )
    });

    let slack = 1e-9 * (1.0 + width.max(height));
    let mut points: Vec<CriticalPoint> = Vec::new();
    for i in 0..g {
        for j in 0..g {
            let seed = Complex64::new(
                if g > 1 {
                    region.re_min + i as f64 * dx
                } else {
                    region.re_min + 0.5 * width
                },
                if g > 1 {
                    region.im_min + j as f64 * dy
                } else {
                    region.im_min + 0.5 * height
                },
            );
            let Some(cp) = newton_on_derivative(pot, seed, cfg)? else {
                continue;
            };
            if !region.contains(cp.lambda, slack) {
                continue;
            }
            let dup = points
                .iter()
                .any(|p| (p.lambda - cp.lambda).norm() < 1e-7 * (1.0 + cp.lambda.norm()));
            if !dup {
                points.push(cp);
            }
        }
    }
    points.sort_by(|a, b| {
        a.lambda
            .re
            .total_cmp(&b.lambda.re)
            .then(a.lambda.im.total_cmp(&b.lambda.im))
    });
    Ok(CriticalPointSearch { points, warning })
}

fn newton_on_derivative(pot: &PotentialCoeffs, seed: Complex64, cfg: &SolverConfig) -> Result<Option<CriticalPoint>> {
    let tol = cfg.newton_tolerance;
    let mut lambda = seed;
    for _ in 0..cfg.max_newton_iters {
        let s = integrate_fundamental(pot, lambda, cfg)?;
        if s.d2f.norm() == 0.0 {
            return Ok(None);
        }
        let step = s.df / s.d2f;
        lambda -= step;
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Ok(None);
        }
        if step.norm() < tol * (1.0 + lambda.norm()) {
            let s = integrate_fundamental(pot, lambda, cfg)?;
            return Ok(Some(CriticalPoint {
                lambda,
                f: s.f,
                d2f: s.d2f,
            }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplicity {
    Simple,
    Multiple,
    Indeterminate,
}

/// Thresholds for [`multiplicity_check_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityThresholds {
    /// `|dF|` above this means simple.
    pub derivative: f64,
    /// `|F - 2 cos t|` below this (with small `|dF|`) means multiple.
    pub residual: f64,
}

impl Default for MultiplicityThresholds {
    fn default() -> Self {
        Self {
            derivative: 1e-8,
            residual: 1e-8,
        }
    }
}

pub fn multiplicity_check(
    pot: &PotentialCoeffs,
    t: QuasiMomentum,
    lambda: Complex64,
    cfg: &SolverConfig,
) -> Result<Multiplicity> {
    multiplicity_check_with(pot, t, lambda, cfg, MultiplicityThresholds::default())
}

pub fn multiplicity_check_with(
    pot: &PotentialCoeffs,
    t: QuasiMomentum,
    lambda: Complex64,
    cfg: &SolverConfig,
    thresholds: MultiplicityThresholds,
) -> Result<Multiplicity> {
    let s = integrate_fundamental(pot, lambda, cfg)?;
    let residual = (s.f - 2.0 * t.value().cos()).norm();
    Ok(if s.df.norm() > thresholds.derivative {
        Multiplicity::Simple
    } else if residual < thresholds.residual {
        Multiplicity::Multiple
    } else {
        Multiplicity::Indeterminate
    })
}
