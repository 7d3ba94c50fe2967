//! Adaptive Dormand–Prince 5(4) integrator for small real systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        OdeTolerance { rel: 1e-10, abs: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeSolution<const N: usize> {
    pub y: [f64; N],
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights are the last row of A; these are fifth minus fourth
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y′ = f(t, y)` from `t0` to `t1`.
///
/// `on_step(t, y)` runs after every accepted step and may modify `y`
/// (used for projections). The step fails with [`Error::StepUnderflow`]
/// when it shrinks below `1e-14·|t1 − t0|`.
pub fn dopri5<const N: usize>(
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    tol: &OdeTolerance,
    mut on_step: impl FnMut(f64, &mut [f64; N]),
) -> Result<OdeSolution<N>> {
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(OdeSolution {
            y: y0,
            accepted: 0,
            rejected: 0,
        });
    }
    let dir = span.signum();
    let h_min = 1e-14 * span.abs();
    let mut t = t0;
    let mut y = y0;
    let mut h = 1e-2 * span.abs();
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, &y)?;
    let (mut accepted, mut rejected) = (0, 0);
    while (t1 - t) * dir > 0.0 {
        h = h.min((t1 - t).abs());
        let mut stage = [0.0; N];
        for s in 1..7 {
            for i in 0..N {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * k[j][i];
                }
                stage[i] = y[i] + dir * h * acc;
            }
            k[s] = f(t + dir * h * C[s], &stage)?;
        }
        // stage now holds the fifth-order solution (FSAL)
        let mut err = 0.0f64;
        for i in 0..N {
            let mut e = 0.0;
            for s in 0..7 {
                e += E[s] * k[s][i];
            }
            let scale = tol.abs + tol.rel * y[i].abs().max(stage[i].abs());
            err = err.max((h * e).abs() / scale);
        }
        if !err.is_finite() {
            return Err(Error::NonFinite(format!("ODE error estimate at t = {t}")));
        }
        if err <= 1.0 {
            t += dir * h;
            y = stage;
            on_step(t, &mut y);
            k[0] = if y == stage { k[6] } else { f(t, &y)? };
            accepted += 1;
            h *= (0.9 * err.max(1e-10).powf(-0.2)).min(5.0);
        } else {
            rejected += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
        if h < h_min && (t1 - t).abs() > h_min {
            return Err(Error::StepUnderflow { tau: t });
        }
    }
    Ok(OdeSolution { y, accepted, rejected })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let sol = dopri5(
            |_, y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            10.0,
            [1.0, 0.0],
            &OdeTolerance::default(),
            |_, _| {},
        )
        .unwrap();
        assert!((sol.y[0] - 10f64.cos()).abs() < 1e-8);
        assert!((sol.y[1] + 10f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn backwards_and_exponential() {
        let sol = dopri5(|_, y: &[f64; 1]| Ok([y[0]]), 1.0, 0.0, [1.0], &OdeTolerance::default(), |_, _| {}).unwrap();
        assert!((sol.y[0] - (-1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn singular_rhs_underflows() {
        let r = dopri5(
            |t, _: &[f64; 1]| Ok([1.0 / (1.0 - t).powi(2)]),
            0.0,
            2.0,
            [0.0],
            &OdeTolerance::default(),
            |_, _| {},
        );
        assert!(matches!(r, Err(Error::StepUnderflow { .. }) | Err(Error::NonFinite(_))));
    }
}
