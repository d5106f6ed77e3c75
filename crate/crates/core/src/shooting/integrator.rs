//! Adaptive Dormand–Prince 5(4) integrator for fixed-size complex systems,
//! plus a classical fixed-step RK4 used for verification runs.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) type State<const N: usize> = [Complex64; N];

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Solution<const N: usize> {
    pub y: State<N>,
    pub steps: usize,
    /// Sum of the absolute local error estimates, per component.
    pub accumulated_error: [f64; N],
}

fn axpy<const N: usize>(y: &State<N>, terms: &[(f64, &State<N>)], h: f64) -> State<N> {
    let mut out = *y;
    for &(c, k) in terms {
        if c == 0.0 {
            continue;
        }
        let f = c * h;
        for i in 0..N {
            out[i] += k[i] * f;
        }
    }
    out
}

/// Integrates `y' = f(x, y)` from `x0` to `x1` with error control on the
/// first `controlled` components.
pub(crate) fn dopri5<const N: usize, F>(
    f: F,
    x0: f64,
    x1: f64,
    y0: State<N>,
    tol: Tolerance,
    controlled: usize,
    initial_step: f64,
) -> Result<Solution<N>>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    let mut x = x0;
    let mut y = y0;
    let mut h = initial_step.min(x1 - x0);
    let min_step = 1e-14 * (x1 - x0).abs().max(1.0);
    let mut k1 = f(x, &y);
    let mut steps = 0;
    let mut rejected = 0;
    let mut acc = [0.0; N];

    while x < x1 {
        if steps + rejected > MAX_STEPS {
            return Err(Error::Integration {
                x,
                reason: "step budget exhausted".into(),
            });
        }
        if x + h > x1 {
            h = x1 - x;
        }
        let y2 = axpy(&y, &[(A21, &k1)], h);
        let k2 = f(x + C2 * h, &y2);
        let y3 = axpy(&y, &[(A31, &k1), (A32, &k2)], h);
        let k3 = f(x + C3 * h, &y3);
        let y4 = axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h);
        let k4 = f(x + C4 * h, &y4);
        let y5 = axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h);
        let k5 = f(x + C5 * h, &y5);
        let y6 = axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h);
        let k6 = f(x + h, &y6);
        let ynew = axpy(&y, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)], h);
        let k7 = f(x + h, &ynew);

        let mut err = [Complex64::new(0.0, 0.0); N];
        for i in 0..N {
            err[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
        }
        let mut ratio: f64 = 0.0;
        for i in 0..controlled.min(N) {
            let sc = tol.atol + tol.rtol * y[i].norm().max(ynew[i].norm());
            ratio = ratio.max(err[i].norm() / sc);
        }
        if !ratio.is_finite() {
            return Err(Error::Integration {
                x,
                reason: "non-finite error estimate".into(),
            });
        }
        if ratio <= 1.0 {
            x += h;
            y = ynew;
            k1 = k7;
            steps += 1;
            for i in 0..N {
                acc[i] += err[i].norm();
            }
            let grow = if ratio == 0.0 {
                5.0
            } else {
                (0.9 * ratio.powf(-0.2)).min(5.0)
            };
            h *= grow;
        } else {
            rejected += 1;
            h *= (0.9 * ratio.powf(-0.2)).max(0.2);
            if h < min_step {
                return Err(Error::Integration {
                    x,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }
        }
    }
    Ok(Solution {
        y,
        steps,
        accumulated_error: acc,
    })
}

/// Classical RK4 with `n_steps` equal steps.
pub(crate) fn rk4_fixed<const N: usize, F>(f: F, x0: f64, x1: f64, y0: State<N>, n_steps: usize) -> State<N>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    let h = (x1 - x0) / n_steps as f64;
    let mut y = y0;
    for s in 0..n_steps {
        let x = x0 + s as f64 * h;
        let k1 = f(x, &y);
        let k2 = f(x + 0.5 * h, &axpy(&y, &[(0.5, &k1)], h));
        let k3 = f(x + 0.5 * h, &axpy(&y, &[(0.5, &k2)], h));
        let k4 = f(x + h, &axpy(&y, &[(1.0, &k3)], h));
        y = axpy(
            &y,
            &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
            h,
        );
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let lam = Complex64::new(0.3, 2.0);
        let sol = dopri5(
            |_, y: &State<1>| [y[0] * lam],
            0.0,
            1.0,
            [Complex64::new(1.0, 0.0)],
            Tolerance {
                rtol: 1e-12,
                atol: 1e-12,
            },
            1,
            0.01,
        )
        .unwrap();
        assert!((sol.y[0] - lam.exp()).norm() < 1e-10);
        assert!(sol.steps > 0);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let f = |_: f64, y: &State<2>| [y[1], -y[0]];
        let y0 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let e1 = (rk4_fixed(f, 0.0, 1.0, y0, 20)[0].re - 1f64.cos()).abs();
        let e2 = (rk4_fixed(f, 0.0, 1.0, y0, 40)[0].re - 1f64.cos()).abs();
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.3, "order {order}");
    }
}
