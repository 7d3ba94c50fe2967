//! Operators on the 3×3 spin grid and the phase-space image of the
//! position operator.

use std::f64::consts::PI;

use crate::algebra::{levi_civita, Constants, Mat3C, Vec3C, Vec3R, C64, I, ONE, ZERO};
use crate::error::{Error, Result};
use crate::geometry::{Gauge, MomentumPoint};

/// A grid point `(φ_m, n)` with `m, n ∈ {0, 1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridPoint {
    m: usize,
    n: usize,
}

impl GridPoint {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m > 2 || n > 2 {
            return Err(Error::InvalidInput(format!("grid indices must lie in 0..=2, got ({m}, {n})")));
        }
        Ok(GridPoint { m, n })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `φ_m = 2πm/3`.
    pub fn phi(&self) -> f64 {
        2.0 * PI * self.m as f64 / 3.0
    }

    pub fn all() -> impl Iterator<Item = GridPoint> {
        (0..3).flat_map(|m| (0..3).map(move |n| GridPoint { m, n }))
    }
}

/// Operator on the grid space, in the `|n⟩` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOperator(pub Mat3C);

impl GridOperator {
    pub fn matrix(&self) -> &Mat3C {
        &self.0
    }

    /// `max |U†U − 1|`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.0.adjoint() * self.0 - Mat3C::identity()).max_abs()
    }
}

/// `|φ_m⟩ = 3^{−1/2} Σ_n e^{inφ_m}|n⟩`.
pub fn phase_state(m: usize) -> Vec3C {
    let phi = 2.0 * PI * (m % 3) as f64 / 3.0;
    Vec3C::new(ONE, C64::from_polar(1.0, phi), C64::from_polar(1.0, 2.0 * phi)).scale_re(1.0 / 3f64.sqrt())
}

/// `n̂ = Σ n|n⟩⟨n|`.
pub fn number_operator() -> Mat3C {
    Mat3C::diag([ZERO, ONE, C64::new(2.0, 0.0)])
}

/// `φ̂ = Σ φ_m|φ_m⟩⟨φ_m|`.
pub fn phase_operator() -> Mat3C {
    let mut out = Mat3C::ZERO;
    for m in 0..3 {
        let v = phase_state(m);
        out += Mat3C::outer(&v, &v.conj()).scale_re(2.0 * PI * m as f64 / 3.0);
    }
    out
}

/// Matrix exponential by scaling and squaring of the Taylor series.
pub fn expm(a: &Mat3C) -> Mat3C {
    let norm = a.max_abs() * 3.0;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let b = a.scale_re(0.5f64.powi(squarings));
    let mut term = Mat3C::identity();
    let mut sum = Mat3C::identity();
    for j in 1..30 {
        term = (term * b).scale_re(1.0 / j as f64);
        sum += term;
        if term.max_abs() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// The four equivalent ways of writing `D̂(k, l)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DForm {
    /// `e^{−iπkl/3} e^{ikφ̂} e^{i2πln̂/3}`.
    PhaseFirst,
    /// `e^{iπkl/3} e^{i2πln̂/3} e^{ikφ̂}`.
    NumberFirst,
    /// `e^{iπkl/3} Σ_m e^{i2πkm/3} |φ_{m+l}⟩⟨φ_m|`.
    PhaseSum,
    /// `e^{iπkl/3} Σ_n e^{i2πnl/3} |n⟩⟨n+k|`.
    NumberSum,
}

pub const D_FORMS: [DForm; 4] = [DForm::PhaseFirst, DForm::NumberFirst, DForm::PhaseSum, DForm::NumberSum];

/// `D̂(k, l) = e^{−iπkl/3} e^{ikφ̂} e^{i2πln̂/3}`.
pub fn grid_d_operator(k: usize, l: usize) -> Result<GridOperator> {
    grid_d_operator_form(k, l, DForm::PhaseFirst)
}

pub fn grid_d_operator_form(k: usize, l: usize, form: DForm) -> Result<GridOperator> {
    if k > 2 || l > 2 {
        return Err(Error::InvalidInput(format!("D indices must lie in 0..=2, got ({k}, {l})")));
    }
    let (kf, lf) = (k as f64, l as f64);
    let kl = PI * kf * lf / 3.0;
    let shift_phase = || expm(&phase_operator().scale(I * kf));
    let shift_number = || expm(&number_operator().scale(I * 2.0 * PI * lf / 3.0));
    let m = match form {
        DForm::PhaseFirst => (shift_phase() * shift_number()).scale(C64::from_polar(1.0, -kl)),
        DForm::NumberFirst => (shift_number() * shift_phase()).scale(C64::from_polar(1.0, kl)),
        DForm::PhaseSum => {
            let mut acc = Mat3C::ZERO;
            for m in 0..3 {
                let w = C64::from_polar(1.0, 2.0 * PI * kf * m as f64 / 3.0);
                acc += Mat3C::outer(&phase_state((m + l) % 3), &phase_state(m).conj()).scale(w);
            }
            acc.scale(C64::from_polar(1.0, kl))
        }
        DForm::NumberSum => {
            let mut acc = Mat3C::ZERO;
            for n in 0..3 {
                acc.0[n][(n + k) % 3] = C64::from_polar(1.0, 2.0 * PI * n as f64 * lf / 3.0);
            }
            acc.scale(C64::from_polar(1.0, kl))
        }
    };
    if !m.is_finite() {
        return Err(Error::NonFinite("grid operator".into()));
    }
    Ok(GridOperator(m))
}

/// `(p_r/|p|) ε_{r, n+1, n+2}` with the last two indices taken mod 3.
pub fn helicity_spin_projection(p: &Vec3R, n: usize) -> Result<f64> {
    if n > 2 {
        return Err(Error::InvalidInput(format!("grid index n must lie in 0..=2, got {n}")));
    }
    let pt = MomentumPoint::new(*p)?;
    let (a, b) = ((n + 1) % 3, (n + 2) % 3);
    let r = pt.norm();
    Ok((0..3).map(|j| p[j] / r * levi_civita(j, a, b)).sum())
}

/// `X_l(p, x, φ_m, n)`, the phase-space image of the position operator.
///
/// The gauge supplies the helicity coefficient and must be real.
pub fn phase_space_position(
    p: &Vec3R,
    x: &Vec3R,
    g: GridPoint,
    l: usize,
    gauge: &Gauge,
    constants: &Constants,
) -> Result<f64> {
    if l > 2 {
        return Err(Error::InvalidInput(format!("axis index {l} out of range")));
    }
    Ok(x[l] + constants.hbar() * phase_space_shift(p, g, gauge)?[l])
}

/// All three components of the phase-space image.
pub fn phase_space_image(p: &Vec3R, x: &Vec3R, g: GridPoint, gauge: &Gauge, constants: &Constants) -> Result<Vec3R> {
    Ok(*x + phase_space_shift(p, g, gauge)?.scale(constants.hbar()))
}

/// Coefficient of `ħ` in the phase-space image.
pub fn phase_space_shift(p: &Vec3R, g: GridPoint, gauge: &Gauge) -> Result<Vec3R> {
    gauge.check(p)?;
    let c = gauge.sigma_coefficient(p)?;
    let proj = helicity_spin_projection(p, g.n)?;
    let (a, b) = ((g.n + 1) % 3, (g.n + 2) % 3);
    let r2 = p.norm_sqr();
    let sin = g.phi().sin();
    let mut out = Vec3R::ZERO;
    for l in 0..3 {
        let mut bracket = c[l] * proj;
        if l == a {
            bracket += p[b] / r2;
        }
        if l == b {
            bracket -= p[a] / r2;
        }
        out[l] = 2.0 * bracket * sin;
    }
    Ok(out)
}
