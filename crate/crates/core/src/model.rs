//! Domain types shared by every computational module.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of the potential `q(x) = a e^{-2πix} + b e^{2πix}`.
///
/// In the Fourier basis `e^{i(2πn+t)x}` the potential couples mode `n` to
/// mode `n+1` with weight `a` and to mode `n-1` with weight `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPotential", into = "RawPotential")]
pub struct PotentialCoeffs {
    a: Complex64,
    b: Complex64,
    ab: Complex64,
}

#[derive(Serialize, Deserialize)]
struct RawPotential {
    a: Complex64,
    b: Complex64,
}

impl TryFrom<RawPotential> for PotentialCoeffs {
    type Error = Error;
    fn try_from(r: RawPotential) -> Result<Self> {
        PotentialCoeffs::new(r.a, r.b)
    }
}

impl From<PotentialCoeffs> for RawPotential {
    fn from(p: PotentialCoeffs) -> Self {
        RawPotential { a: p.a, b: p.b }
    }
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

impl PotentialCoeffs {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        if !finite(a) || !finite(b) {
            return Err(Error::InvalidInput(format!(
                "potential coefficients must be finite, got a = {a}, b = {b}"
            )));
        }
        Ok(Self { a, b, ab: a * b })
    }

    pub fn zero() -> Self {
        Self {
            a: Complex64::new(0.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            ab: Complex64::new(0.0, 0.0),
        }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// The product `ab`, computed once at construction.
    pub fn product_ab(&self) -> Complex64 {
        self.ab
    }

    pub fn is_zero(&self) -> bool {
        self.a == Complex64::new(0.0, 0.0) && self.b == Complex64::new(0.0, 0.0)
    }

    /// `q(x)` evaluated pointwise.
    pub fn eval(&self, x: f64) -> Complex64 {
        let phase = Complex64::from_polar(1.0, 2.0 * PI * x);
        self.a * phase.conj() + self.b * phase
    }

    /// Fourier coefficients `q_n = ∫ q(x) e^{-2πinx} dx`; only `q_{-1} = a` and
    /// `q_1 = b` can be non-zero. Zero coefficients are omitted.
    pub fn fourier_coefficients(&self) -> BTreeMap<i32, Complex64> {
        let mut map = BTreeMap::new();
        if self.a != Complex64::new(0.0, 0.0) {
            map.insert(-1, self.a);
        }
        if self.b != Complex64::new(0.0, 0.0) {
            map.insert(1, self.b);
        }
        map
    }

    /// Potential of the adjoint operator: `q̄`, i.e. `(a, b) -> (b̄, ā)`.
    pub fn adjoint(&self) -> Self {
        Self::new(self.b.conj(), self.a.conj()).expect("conjugates of finite values are finite")
    }

    /// `(a, b) -> (c a, b / c)`; leaves `ab` and hence the spectrum unchanged.
    pub fn gauge(&self, c: Complex64) -> Result<Self> {
        if c == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidInput("gauge factor must be non-zero".into()));
        }
        Self::new(self.a * c, self.b / c)
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.b, self.a).expect("finite")
    }
}

/// Quasi-momentum `t`, always stored in `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct QuasiMomentum(f64);

impl QuasiMomentum {
    pub fn new(t_raw: f64) -> Result<Self> {
        normalize_quasimomentum(t_raw)
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// Splits `t = e·π + τ` with `e ∈ {-1, 0, 1}` and `|τ| ≤ π/2`.
    ///
    /// `τ` is exactly zero at `t = 0` and `t = π`.
    pub fn split(&self) -> (i64, f64) {
        let t = self.0;
        if t > PI / 2.0 {
            (1, t - PI)
        } else if t < -PI / 2.0 {
            (-1, t + PI)
        } else {
            (0, t)
        }
    }

    /// Unperturbed eigenvalue `(2πn + t)²` of mode `n`.
    pub fn free_eigenvalue(&self, n: i64) -> f64 {
        let x = 2.0 * PI * n as f64 + self.0;
        x * x
    }

    /// `(2πj + t)² - (2πk + t)²` in factored form, accurate relative to the
    /// difference rather than to the individual squares.
    ///
    /// When `τ = 0` the value depends only on the integer product
    /// `(j-k)(j+k+e)`, so mirror-image mode pairs give bitwise equal results.
    pub fn free_difference(&self, j: i64, k: i64) -> f64 {
        let (e, tau) = self.split();
        if tau == 0.0 {
            4.0 * PI * PI * ((j - k) * (j + k + e)) as f64
        } else {
            4.0 * PI * (j - k) as f64 * (PI * (j + k + e) as f64 + tau)
        }
    }
}

/// Folds `t_raw` into `(-π, π]`. Values already in range are returned unchanged.
pub fn normalize_quasimomentum(t_raw: f64) -> Result<QuasiMomentum> {
    if !t_raw.is_finite() {
        return Err(Error::InvalidInput(format!(
            "quasi-momentum must be finite, got {t_raw}"
        )));
    }
    if t_raw > -PI && t_raw <= PI {
        return Ok(QuasiMomentum(t_raw));
    }
    let two_pi = 2.0 * PI;
    let mut r = t_raw.rem_euclid(two_pi);
    if r > PI {
        r -= two_pi;
    }
    // rem_euclid can land a hair outside the interval for huge inputs
    if r <= -PI {
        r = PI;
    }
    Ok(QuasiMomentum(r))
}

/// Sub-band label used near `t = 0` and `t = π`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubBand {
    One,
    Two,
}

/// Band label. Stored as the signed index `n`; the pair form `(|n|, j)`
/// uses `λ_{n,1} = λ_{-n}` and `λ_{n,2} = λ_n` for `n > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BandIndex(pub i32);

impl BandIndex {
    pub fn signed(&self) -> i32 {
        self.0
    }

    pub fn from_pair(n: u32, j: SubBand) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("pair labels need n >= 1".into()));
        }
        let n = n as i32;
        Ok(match j {
            SubBand::One => BandIndex(-n),
            SubBand::Two => BandIndex(n),
        })
    }

    /// `None` for the unpaired label `0`.
    pub fn to_pair(&self) -> Option<(u32, SubBand)> {
        match self.0 {
            0 => None,
            n if n > 0 => Some((n as u32, SubBand::Two)),
            n => Some((n.unsigned_abs(), SubBand::One)),
        }
    }
}

/// Numerical settings. These are empirical stand-ins for the non-constructive
/// constants of the asymptotic theory, not estimates of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Fourier modes `-M..=M` are kept.
    pub truncation_half_width: usize,
    pub ode_tolerance: f64,
    pub newton_tolerance: f64,
    pub max_newton_iters: usize,
    /// Relative residual tolerance for eigenpairs (scaled by the matrix norm).
    pub eig_deflation_tol: f64,
}

/// Labels closer than this to the truncation edge are flagged unreliable.
pub const LOCALIZATION_MARGIN: usize = 8;

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            truncation_half_width: 32,
            ode_tolerance: 1e-13,
            newton_tolerance: 1e-10,
            max_newton_iters: 60,
            eig_deflation_tol: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn with_truncation(mut self, m: usize) -> Self {
        self.truncation_half_width = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation_half_width < 1 {
            return Err(Error::InvalidInput("truncation half-width must be >= 1".into()));
        }
        for (name, v) in [
            ("ode_tolerance", self.ode_tolerance),
            ("newton_tolerance", self.newton_tolerance),
            ("eig_deflation_tol", self.eig_deflation_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_newton_iters == 0 {
            return Err(Error::InvalidInput("max_newton_iters must be positive".into()));
        }
        Ok(())
    }

    /// Checks that label `|n|` sits at least [`LOCALIZATION_MARGIN`] modes
    /// inside the truncation window.
    pub fn check_label(&self, n: i32) -> Result<()> {
        self.validate()?;
        if (n.unsigned_abs() as usize) + LOCALIZATION_MARGIN > self.truncation_half_width {
            return Err(Error::InvalidInput(format!(
                "label {n} needs M >= {} (have M = {})",
                n.unsigned_abs() as usize + LOCALIZATION_MARGIN,
                self.truncation_half_width
            )));
        }
        Ok(())
    }
}
