//! Central differences with one level of Richardson extrapolation.

use crate::algebra::{Mat3C, Vec3C, Vec3R, C64};
use crate::error::Result;

/// Minimal linear structure needed to difference a value.
pub trait Linear: Copy {
    fn lin(a: f64, x: &Self, b: f64, y: &Self) -> Self;
}

impl Linear for f64 {
    fn lin(a: f64, x: &f64, b: f64, y: &f64) -> f64 {
        a * x + b * y
    }
}

impl Linear for C64 {
    fn lin(a: f64, x: &C64, b: f64, y: &C64) -> C64 {
        x * a + y * b
    }
}

impl Linear for Vec3R {
    fn lin(a: f64, x: &Vec3R, b: f64, y: &Vec3R) -> Vec3R {
        x.scale(a) + y.scale(b)
    }
}

impl Linear for Vec3C {
    fn lin(a: f64, x: &Vec3C, b: f64, y: &Vec3C) -> Vec3C {
        x.scale_re(a) + y.scale_re(b)
    }
}

impl Linear for Mat3C {
    fn lin(a: f64, x: &Mat3C, b: f64, y: &Mat3C) -> Mat3C {
        x.scale_re(a) + y.scale_re(b)
    }
}

impl<T: Linear> Linear for [T; 3] {
    fn lin(a: f64, x: &[T; 3], b: f64, y: &[T; 3]) -> [T; 3] {
        [0, 1, 2].map(|i| T::lin(a, &x[i], b, &y[i]))
    }
}

/// Default step `1e-5 · max(1, |k|)`.
pub fn default_step(k: &Vec3R) -> f64 {
    1e-5 * k.norm().max(1.0)
}

/// Derivative of a scalar-parameter map at `t`.
///
/// `D(h) = (f(t+h) − f(t−h)) / 2h`, returned as `(4 D(h/2) − D(h)) / 3`.
pub fn derivative<T, F>(f: F, t: f64, h: f64) -> Result<T>
where
    T: Linear,
    F: Fn(f64) -> Result<T>,
{
    let central = |step: f64| -> Result<T> {
        let fp = f(t + step)?;
        let fm = f(t - step)?;
        Ok(T::lin(0.5 / step, &fp, -0.5 / step, &fm))
    };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok(T::lin(4.0 / 3.0, &fine, -1.0 / 3.0, &coarse))
}

/// Partial derivative `∂_l f` at `k`.
pub fn partial<T, F>(f: F, k: &Vec3R, l: usize, h: f64) -> Result<T>
where
    T: Linear,
    F: Fn(&Vec3R) -> Result<T>,
{
    let e = Vec3R::axis(l);
    derivative(|t| f(&(*k + e.scale(t))), 0.0, h)
}

/// All three partials `[∂_1 f, ∂_2 f, ∂_3 f]`.
pub fn gradient<T, F>(f: F, k: &Vec3R, h: f64) -> Result<[T; 3]>
where
    T: Linear,
    F: Fn(&Vec3R) -> Result<T>,
{
    Ok([
        partial(&f, k, 0, h)?,
        partial(&f, k, 1, h)?,
        partial(&f, k, 2, h)?,
    ])
}

/// Every point touched by [`partial`] along axis `l`.
pub fn stencil(k: &Vec3R, l: usize, h: f64) -> [Vec3R; 4] {
    let e = Vec3R::axis(l);
    [h, -h, 0.5 * h, -0.5 * h].map(|t| *k + e.scale(t))
}
