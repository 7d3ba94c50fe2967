//! Position eigenfunctions, helicity eigenstates and their position-space
//! wave functions.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::algebra::{Constants, Mat3C, Vec3C, Vec3R, C64};
use crate::error::{Error, Result};
use crate::geometry::{frame, frame_jacobian, ExcludedSet, Gauge, MomentumPoint};
use crate::quadrature::{integrate_with_breaks, Tolerance};
use crate::section::WaveSection;
use crate::special::{damped_power_integral, upper_gamma_real};

/// Labels of a position eigenfunction `(c₁E₁ + c₂E₂) e^{−ik·X} |k|^s`.
#[derive(Debug, Clone)]
pub struct EigenParams {
    pub x: Vec3R,
    pub c1: C64,
    pub c2: C64,
    pub s: f64,
    pub gauge: Gauge,
}

impl EigenParams {
    pub fn coefficient_norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }
}

/// `Ψ_X(k)` with analytic Jacobian; transverse by construction.
pub fn eigenfunction_momentum(p: &EigenParams) -> WaveSection {
    let (gauge, x, c1, c2, s) = (p.gauge.clone(), p.x, p.c1, p.c2, p.s);
    let g2 = gauge.clone();
    let value = move |k: &Vec3R| -> Result<Vec3C> {
        let f = frame(&MomentumPoint::in_gauge(*k, &gauge)?, &gauge)?;
        let phase = C64::from_polar(k.norm().powf(s), -k.dot(&x));
        Ok((f.legs[0].scale(c1) + f.legs[1].scale(c2)).scale(phase))
    };
    let jacobian = move |k: &Vec3R| -> Result<Mat3C> {
        let pt = MomentumPoint::in_gauge(*k, &g2)?;
        let f = frame(&pt, &g2)?;
        let jac = frame_jacobian(&pt, &g2)?;
        let r2 = k.norm_sqr();
        let phase = C64::from_polar(k.norm().powf(s), -k.dot(&x));
        let v = f.legs[0].scale(c1) + f.legs[1].scale(c2);
        let cols = [0, 1, 2].map(|l| {
            let dv = jac[l][0].scale(c1) + jac[l][1].scale(c2);
            (dv + v.scale(C64::new(s * k[l] / r2, -x[l]))).scale(phase)
        });
        Ok(Mat3C::from_columns(cols))
    };
    WaveSection::new(value).with_jacobian(jacobian).transverse(true)
}

fn check_helicity(lambda: i32) -> Result<f64> {
    match lambda {
        1 | -1 => Ok(lambda as f64),
        _ => Err(Error::InvalidInput(format!("helicity must be ±1, got {lambda}"))),
    }
}

/// `(E₁ + iλE₂)/√2` at `k`.
pub fn helicity_polarization(k: &MomentumPoint, lambda: i32, gauge: &Gauge) -> Result<Vec3C> {
    let l = check_helicity(lambda)?;
    let f = frame(k, gauge)?;
    Ok((f.legs[0] + f.legs[1].scale(C64::new(0.0, l))).scale_re(FRAC_1_SQRT_2))
}

/// `Ψ_{X,λ} = (E₁ + iλE₂)/√2 · e^{−ik·X} |k|^s`, with `ΣΨ = λΨ`.
pub fn helicity_eigenstate(x: Vec3R, lambda: i32, s: f64, gauge: Gauge) -> Result<WaveSection> {
    let l = check_helicity(lambda)?;
    Ok(eigenfunction_momentum(&EigenParams {
        x,
        c1: C64::new(FRAC_1_SQRT_2, 0.0),
        c2: C64::new(0.0, l * FRAC_1_SQRT_2),
        s,
        gauge,
    }))
}

/// `Ψ_X†(k)Ψ_{X′}(k) / ((2π)³|k|)`.
pub fn normalization_integrand(p: &EigenParams, q: &EigenParams, k: &MomentumPoint) -> Result<C64> {
    if !p.gauge.same_as(&q.gauge) {
        return Err(Error::InvalidInput("eigenfunctions must share a gauge".into()));
    }
    if p.s != 0.5 || q.s != 0.5 {
        return Err(Error::InvalidInput("normalization integrand is defined for s = 1/2".into()));
    }
    let a = eigenfunction_momentum(p).value(k.k())?;
    let b = eigenfunction_momentum(q).value(k.k())?;
    Ok(a.inner(&b) / ((2.0 * PI).powi(3) * k.norm()))
}

/// Polarization column of the angular integrand, north-pole triad, in
/// spherical angles of `k`.
pub fn north_polarization(theta: f64, phi: f64, c1: C64, c2: C64) -> Vec3C {
    let h = (0.5 * theta).cos().powi(2);
    let (st, _) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let s2p = (2.0 * phi).sin();
    Vec3C::new(
        c1 * (2.0 * h * cp * cp - 1.0) + c2 * (-h * s2p),
        c1 * (h * s2p) + c2 * (1.0 - 2.0 * h * sp * sp),
        c1 * (-st * cp) + c2 * (st * sp),
    )
}

/// Radial cutoff for the position-space transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    /// Integrate to infinity (closed-form radial integral).
    None,
    /// Truncate at the given `|k|`.
    At(f64),
    /// Smallest doubling of `10/ε` whose tail bound is below 0.1% of the result.
    Auto,
}

/// Numeric position-space value at one `ε`.
#[derive(Debug, Clone, Copy)]
pub struct NumericWave {
    pub value: Vec3C,
    /// Angular quadrature error estimate.
    pub error: f64,
    /// Bound on the discarded `|k| > kmax` part; zero when untruncated.
    pub tail_bound: f64,
    pub kmax: Option<f64>,
}

fn tail_bound(a: f64, eps: f64, kmax: f64, coeff_norm: f64, constants: &Constants) -> f64 {
    (constants.hbar() * constants.c()).sqrt() * 4.0 * PI * coeff_norm * eps.powf(-a) * upper_gamma_real(a, eps * kmax)
        / (2.0 * PI).powi(3)
}

/// Orthonormal `(p, q)` spanning the plane orthogonal to `u`, with `p`
/// along the part of `e₃` orthogonal to `u` when that is nonzero.
fn transverse_basis(u: &Vec3R) -> (Vec3R, Vec3R) {
    let e3 = Vec3R::axis(2);
    let mut p = e3 - u.scale(u[2]);
    if p.norm() < 1e-8 {
        p = Vec3R::axis(0) - u.scale(u[0]);
    }
    let p = p.scale(1.0 / p.norm());
    (p, u.cross(&p))
}

/// `√(ħc) ∫ d³k/(2π)³ Ψ_X(k) e^{ik·x} e^{−ε|k|}`.
///
/// The radial integral is done in closed form with incomplete gamma
/// functions; the angular part by nested adaptive Gauss–Kronrod in
/// coordinates adapted to `x − X`, with breaks where the integrand peaks
/// and where the gauge's excluded ray meets the sphere.
pub fn position_wavefunction_numeric(
    p: &EigenParams,
    x: Vec3R,
    eps: f64,
    cutoff: Cutoff,
    tol: &Tolerance,
    constants: &Constants,
) -> Result<NumericWave> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    if !matches!(p.gauge, Gauge::StereoNorth | Gauge::Spherical | Gauge::StereoSouth) {
        return Err(Error::Unsupported(
            "position-space transform needs a triad that depends on the direction of k only".into(),
        ));
    }
    let a = 3.0 + p.s;
    let coeff = p.coefficient_norm_sqr().sqrt();
    let run = |kmax: Option<f64>| -> Result<NumericWave> {
        let (value, error) = angular_integral(p, x, eps, a, kmax, tol)?;
        let pref = (constants.hbar() * constants.c()).sqrt() / (2.0 * PI).powi(3);
        let tail = kmax.map_or(0.0, |t| tail_bound(a, eps, t, coeff, constants));
        Ok(NumericWave {
            value: value.scale_re(pref),
            error: error * pref,
            tail_bound: tail,
            kmax,
        })
    };
    match cutoff {
        Cutoff::None => run(None),
        Cutoff::At(t) if t > 0.0 => run(Some(t)),
        Cutoff::At(t) => Err(Error::InvalidInput(format!("kmax must be positive, got {t}"))),
        Cutoff::Auto => {
            let mut kmax = 10.0 / eps;
            for _ in 0..60 {
                let w = run(Some(kmax))?;
                if w.tail_bound <= 1e-3 * w.value.norm() {
                    return Ok(w);
                }
                kmax *= 2.0;
            }
            Err(Error::DivergentSequence)
        }
    }
}

fn angular_integral(
    p: &EigenParams,
    x: Vec3R,
    eps: f64,
    a: f64,
    kmax: Option<f64>,
    tol: &Tolerance,
) -> Result<(Vec3C, f64)> {
    let d = x - p.x;
    let big_x = d.norm();
    let u = if big_x > 0.0 { d.scale(1.0 / big_x) } else { Vec3R::axis(2) };
    let (pb, qb) = transverse_basis(&u);
    let mut breaks = vec![-1.0, 0.0, 1.0];
    let cut_t = match p.gauge.excluded() {
        ExcludedSet::NonNegativeAxis => vec![u[2]],
        ExcludedSet::NonPositiveAxis => vec![-u[2]],
        ExcludedSet::WholeAxis => vec![u[2], -u[2]],
    };
    for t in cut_t {
        if t.abs() < 1.0 && !breaks.contains(&t) {
            breaks.push(t);
        }
    }
    breaks.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let inner_tol = Tolerance {
        rel: tol.rel * 0.1,
        ..*tol
    };
    let inner_err = std::cell::Cell::new(0.0);
    let outer = |t: f64| -> Result<Vec3C> {
        let rho = (1.0 - t * t).max(0.0).sqrt();
        let z = C64::new(eps, -big_x * t);
        let radial = damped_power_integral(a, z, kmax);
        let f = |chi: f64| -> Result<Vec3C> {
            let n = u.scale(t) + (pb.scale(chi.cos()) + qb.scale(chi.sin())).scale(rho);
            match frame(&MomentumPoint::new(n)?, &p.gauge) {
                Ok(fr) => Ok((fr.legs[0].scale(p.c1) + fr.legs[1].scale(p.c2)).scale(radial)),
                // the exclusion tube has measure ~1e-18 of the sphere
                Err(Error::OutsideDomain { .. }) => Ok(Vec3C::ZERO),
                Err(e) => Err(e),
            }
        };
        let est = integrate_with_breaks(f, &[0.0, PI, 2.0 * PI], &inner_tol)?;
        inner_err.set(inner_err.get() + est.error);
        Ok(est.value)
    };
    let est = integrate_with_breaks(outer, &breaks, tol)?;
    Ok((est.value, est.error))
}

/// Limit `ε → 0` from values on a decreasing `ε` sequence.
#[derive(Debug, Clone, Copy)]
pub struct Extrapolated {
    pub value: Vec3C,
    /// Difference between the two highest-order extrapolants.
    pub error: f64,
}

/// Polynomial (Neville) extrapolation of `values[i] = f(eps[i])` to `ε = 0`.
pub fn epsilon_extrapolate(eps: &[f64], values: &[Vec3C]) -> Result<Extrapolated> {
    let n = eps.len();
    if n < 3 || values.len() != n {
        return Err(Error::InvalidInput("need at least three ε levels".into()));
    }
    if eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidInput("ε levels must be positive".into()));
    }
    // table[j] holds the extrapolant through points i−j..=i
    let mut table: Vec<Vec3C> = values.to_vec();
    let mut diagonal = vec![values[n - 1]];
    for j in 1..n {
        for i in (j..n).rev() {
            let (ei, ej) = (eps[i], eps[i - j]);
            // P(0) = (ε_{i−j} P_{i} − ε_i P_{i−1}) / (ε_{i−j} − ε_i)
            table[i] = (table[i].scale_re(ej) - table[i - 1].scale_re(ei)).scale_re(1.0 / (ej - ei));
        }
        diagonal.push(table[n - 1]);
    }
    let last = diagonal[n - 1];
    let d1 = (diagonal[n - 1] - diagonal[n - 2]).max_abs();
    // raw differences must shrink as ε decreases
    let step = |i: usize| (values[i] - values[i - 1]).max_abs();
    let growing = step(n - 1) > step(n - 2) && step(n - 1) > 1e-6 * values[n - 1].max_abs();
    if !last.is_finite() || growing {
        return Err(Error::DivergentSequence);
    }
    Ok(Extrapolated { value: last, error: d1 })
}

/// Default `ε` levels `ε₀·{1, 1/2, 1/4, 1/8}` with `ε₀ = 0.1·|x − X|`.
pub fn default_epsilons(distance: f64) -> [f64; 4] {
    let e0 = 0.1 * distance;
    [e0, 0.5 * e0, 0.25 * e0, 0.125 * e0]
}

/// Numeric transform at the default `ε` levels, extrapolated to `ε = 0`.
pub fn position_wavefunction_extrapolated(
    p: &EigenParams,
    x: Vec3R,
    tol: &Tolerance,
    constants: &Constants,
) -> Result<Extrapolated> {
    let dist = (x - p.x).norm();
    if dist == 0.0 {
        return Err(Error::DistributionalDomain("x = X".into()));
    }
    let eps = default_epsilons(dist);
    let mut vals = Vec::with_capacity(eps.len());
    for e in eps {
        vals.push(position_wavefunction_numeric(p, x, e, Cutoff::None, tol, constants)?.value);
    }
    epsilon_extrapolate(&eps, &vals)
}

/// `(X, θ₁, φ₁)`: distance and direction angles of `x − X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormPoint {
    pub x: f64,
    pub theta1: f64,
    pub phi1: f64,
}

impl ClosedFormPoint {
    pub fn from_offset(d: &Vec3R) -> Result<Self> {
        let p = MomentumPoint::new(*d).map_err(|_| Error::DistributionalDomain("x = X".into()))?;
        let (theta1, phi1) = p.angles();
        Ok(ClosedFormPoint {
            x: d.norm(),
            theta1,
            phi1,
        })
    }

    pub fn offset(&self) -> Vec3R {
        let (st, ct) = self.theta1.sin_cos();
        let (sp, cp) = self.phi1.sin_cos();
        Vec3R::new(st * cp, st * sp, ct).scale(self.x)
    }
}

/// Which version of the `F` functions to evaluate.
///
/// `Amended` replaces the `−5i cos θ₁ sin²φ₁` term of `F_I` by
/// `+5i cos θ₁ cos²φ₁` and the `−21 cos θ₁/16` term of `F_II` by
/// `−21i cos θ₁/16`; with these the values agree with the numeric transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClosedForm {
    #[default]
    Printed,
    Amended,
}

/// `|sin θ₁|` below which the axis limits are used.
const AXIS: f64 = 1e-4;
/// `|cos θ₁|` below which the point counts as `θ₁ = π/2`.
const EQUATOR: f64 = 1e-12;

fn prefactor(cf: &ClosedFormPoint, constants: &Constants, denom: f64) -> Result<f64> {
    if !(cf.x > 0.0) {
        return Err(Error::DistributionalDomain(format!("X = {} (need X > 0)", cf.x)));
    }
    Ok((constants.hbar() * constants.c()).sqrt() / (denom * 2f64.sqrt() * PI.powf(1.5) * cf.x.powf(3.5)))
}

fn off_equator(cf: &ClosedFormPoint) -> Result<()> {
    if cf.theta1.cos().abs() <= EQUATOR {
        return Err(Error::DistributionalDomain("θ₁ = π/2".into()));
    }
    Ok(())
}

pub fn f_one(cf: &ClosedFormPoint, constants: &Constants, form: ClosedForm) -> Result<C64> {
    off_equator(cf)?;
    let pre = prefactor(cf, constants, 8.0)?;
    let (st, ct) = cf.theta1.sin_cos();
    let c2p = (2.0 * cf.phi1).cos();
    let (sp, cp) = cf.phi1.sin_cos();
    let sgn = ct.signum();
    let singular = if st.abs() < AXIS {
        // limit of the bracketed 1/sin²θ₁ terms on the axis
        C64::new(1.5, -2.5 * sgn) * c2p
    } else {
        let s2 = st * st;
        (C64::new(0.0, 2.0 * ct) - 2.0 + C64::new(2.0, -2.0 * sgn) * ct.abs().powf(-1.5)) * (c2p / s2)
    };
    let tail = match form {
        ClosedForm::Printed => C64::new(3.0 * sp * sp, -5.0 * ct * sp * sp),
        ClosedForm::Amended => C64::new(3.0 * sp * sp, 5.0 * ct * cp * cp),
    };
    Ok((singular + tail) * pre)
}

pub fn f_two(cf: &ClosedFormPoint, constants: &Constants, form: ClosedForm) -> Result<C64> {
    off_equator(cf)?;
    let pre = prefactor(cf, constants, 4.0)?;
    let t = cf.theta1;
    let (st, ct) = t.sin_cos();
    let s2p = (2.0 * cf.phi1).sin();
    if s2p.abs() < 1e-12 {
        return Ok(C64::new(0.0, 0.0));
    }
    let linear = match form {
        ClosedForm::Printed => C64::new(-21.0 * ct / 16.0, 0.0),
        ClosedForm::Amended => C64::new(0.0, -21.0 * ct / 16.0),
    };
    if st.abs() < AXIS {
        return match form {
            ClosedForm::Amended => Ok(C64::new(0.0, 0.0)),
            ClosedForm::Printed => Err(Error::DistributionalDomain(
                "F_II diverges on the k₃-axis for sin 2φ₁ ≠ 0".into(),
            )),
        };
    }
    let bracket = C64::new(11.0 / 8.0 - 3.0 * (2.0 * t).cos() / 8.0, 5.0 * (3.0 * t).cos() / 16.0) + linear
        - C64::new(1.0, -ct.signum()) * ct.abs().powf(-1.5);
    Ok(bracket * (pre * s2p / (st * st)))
}

pub fn f_three(cf: &ClosedFormPoint, constants: &Constants) -> Result<C64> {
    let pre = prefactor(cf, constants, 8.0)?;
    Ok(C64::new(-3.0, -5.0 * cf.theta1.cos()) * pre)
}

pub fn f_four(cf: &ClosedFormPoint, constants: &Constants) -> Result<C64> {
    let pre = prefactor(cf, constants, 8.0)?;
    Ok(C64::new(0.0, -5.0 * cf.theta1.sin() * cf.phi1.cos()) * pre)
}

pub fn f_five(cf: &ClosedFormPoint, constants: &Constants) -> Result<C64> {
    let pre = prefactor(cf, constants, 8.0)?;
    Ok(C64::new(0.0, 5.0 * cf.theta1.sin() * cf.phi1.sin()) * pre)
}

/// Column `(c₁F_I + c₂F_II, −c₁F_II + c₂(F_I + F_III), c₁F_IV + c₂F_V)`.
///
/// Terms with a zero coefficient are not evaluated.
pub fn position_wavefunction_closed(cf: &ClosedFormPoint, c1: C64, c2: C64, constants: &Constants) -> Result<Vec3C> {
    position_wavefunction_closed_with(cf, c1, c2, constants, ClosedForm::Printed)
}

pub fn position_wavefunction_closed_with(
    cf: &ClosedFormPoint,
    c1: C64,
    c2: C64,
    constants: &Constants,
    form: ClosedForm,
) -> Result<Vec3C> {
    let zero = C64::new(0.0, 0.0);
    let term = |c: C64, f: &dyn Fn() -> Result<C64>| -> Result<C64> {
        if c == zero {
            Ok(zero)
        } else {
            Ok(c * f()?)
        }
    };
    let f1 = || f_one(cf, constants, form);
    let f2 = || f_two(cf, constants, form);
    let f13 = || Ok(f_one(cf, constants, form)? + f_three(cf, constants)?);
    let x1 = term(c1, &f1)? + term(c2, &f2)?;
    let x2 = -term(c1, &f2)? + term(c2, &f13)?;
    let x3 = term(c1, &|| f_four(cf, constants))? + term(c2, &|| f_five(cf, constants))?;
    Ok(Vec3C::new(x1, x2, x3))
}

/// Angular grid for density maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    /// Cells with `|θ₁ − π/2| < margin` are skipped.
    pub margin: f64,
}

/// One cell of a density map.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCell {
    pub theta1: f64,
    pub phi1: f64,
    pub density: Result<f64>,
}

impl DensityGrid {
    /// `θ₁ = π i/(n_θ − 1)` and `φ₁ = 2π j/n_φ`, minus the equatorial band.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        if self.n_theta == 0 || self.n_phi == 0 {
            return out;
        }
        for i in 0..self.n_theta {
            let theta = if self.n_theta == 1 {
                0.0
            } else {
                PI * i as f64 / (self.n_theta - 1) as f64
            };
            if (theta - 0.5 * PI).abs() < self.margin {
                continue;
            }
            for j in 0..self.n_phi {
                out.push((theta, 2.0 * PI * j as f64 / self.n_phi as f64));
            }
        }
        out
    }
}

/// `Ψ†Ψ` from the closed form over the grid at fixed `X`.
pub fn energy_density(
    grid: &DensityGrid,
    distance: f64,
    c1: C64,
    c2: C64,
    constants: &Constants,
    form: ClosedForm,
) -> Vec<DensityCell> {
    use rayon::prelude::*;
    grid.points()
        .into_par_iter()
        .map(|(theta1, phi1)| {
            let cf = ClosedFormPoint {
                x: distance,
                theta1,
                phi1,
            };
            let density = position_wavefunction_closed_with(&cf, c1, c2, constants, form).map(|v| v.norm_sqr());
            DensityCell { theta1, phi1, density }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{helicity, I};
    use crate::connection::ConnectionParams;
    use crate::operator::apply_position;

    fn params(gauge: Gauge, s: f64) -> EigenParams {
        EigenParams {
            x: Vec3R::new(0.3, -1.2, 0.8),
            c1: C64::new(0.6, 0.0),
            c2: C64::new(0.0, 0.8),
            s,
            gauge,
        }
    }

    #[test]
    fn eigen_relation() {
        let k = MomentumPoint::new(Vec3R::new(0.5, 0.9, -0.4)).unwrap();
        for g in [Gauge::StereoNorth, Gauge::Spherical, Gauge::StereoSouth] {
            for s in [0.0, 0.5, 1.0] {
                let p = params(g.clone(), s);
                let psi = eigenfunction_momentum(&p);
                let cp = ConnectionParams::new(s, g.clone()).unwrap();
                for l in 0..3 {
                    let lhs = apply_position(&psi, &k, l, &cp).unwrap();
                    let rhs = psi.value(k.k()).unwrap().scale_re(p.x[l]);
                    assert!((lhs - rhs).max_abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn modulus_example() {
        let p = params(Gauge::StereoNorth, 0.5);
        let k = Vec3R::new(0.0, 4.0 * 0.6, -4.0 * 0.8);
        let v = eigenfunction_momentum(&p).value(&k).unwrap();
        assert!((v.norm() - 2.0).abs() < 1e-14);
        assert!(v.dot_real(&k).norm() < 1e-14);
    }

    #[test]
    fn helicity_example_and_eigenvalue() {
        let k = MomentumPoint::new(Vec3R::new(0.0, 0.0, -1.0)).unwrap();
        let e = helicity_polarization(&k, 1, &Gauge::StereoNorth).unwrap();
        let want = Vec3C::new(C64::new(-1.0, 0.0), I, C64::new(0.0, 0.0)).scale_re(FRAC_1_SQRT_2);
        assert!((e - want).max_abs() < 1e-15);
        let sigma = helicity(k.k()).unwrap();
        assert!((sigma.mul_vec(&want) - want).max_abs() < 1e-15);
        let m = helicity_polarization(&k, -1, &Gauge::StereoNorth).unwrap();
        assert!(e.inner(&m).norm() < 1e-15);
        assert!(helicity_polarization(&k, 2, &Gauge::StereoNorth).is_err());
    }

    #[test]
    fn helicity_states_differ_by_phase_across_gauges() {
        let k = MomentumPoint::new(Vec3R::new(0.5, 0.9, -0.4)).unwrap();
        for lambda in [1, -1] {
            let a = helicity_polarization(&k, lambda, &Gauge::StereoNorth).unwrap();
            let b = helicity_polarization(&k, lambda, &Gauge::Spherical).unwrap();
            let z = a.inner(&b);
            assert!((z.norm() - 1.0).abs() < 1e-14);
            assert!((b - a.scale(z)).max_abs() < 1e-14);
        }
    }

    #[test]
    fn normalization_identity() {
        let p = params(Gauge::StereoNorth, 0.5);
        let mut q = p.clone();
        q.x = Vec3R::new(-0.4, 0.1, 2.0);
        let k = MomentumPoint::new(Vec3R::new(0.5, 0.9, -0.4)).unwrap();
        let got = normalization_integrand(&p, &q, &k).unwrap();
        let want = C64::from_polar(1.0, k.k().dot(&(p.x - q.x))) / (2.0 * PI).powi(3);
        assert!((got - want).norm() < 1e-16);
        let bad = EigenParams {
            gauge: Gauge::Spherical,
            ..q.clone()
        };
        assert!(normalization_integrand(&p, &bad, &k).is_err());
    }

    #[test]
    fn printed_polarization_matches_north_triad() {
        let k = MomentumPoint::new(Vec3R::new(-0.3, 0.7, 0.2)).unwrap();
        let (t, ph) = k.angles();
        let (c1, c2) = (C64::new(0.3, 0.4), C64::new(-0.1, 0.9));
        let f = frame(&k, &Gauge::StereoNorth).unwrap();
        let want = f.legs[0].scale(c1) + f.legs[1].scale(c2);
        assert!((north_polarization(t, ph, c1, c2) - want).max_abs() < 1e-15);
    }

    #[test]
    fn extrapolation_recovers_polynomials() {
        let eps = [0.4, 0.2, 0.1];
        let a = Vec3C::new(C64::new(1.0, 2.0), C64::new(-3.0, 0.5), C64::new(0.0, 1.0));
        let b = Vec3C::new(C64::new(0.7, 0.0), C64::new(1.0, 1.0), C64::new(2.0, -1.0));
        let c = Vec3C::new(C64::new(-2.0, 0.3), C64::new(0.0, 4.0), C64::new(1.0, 1.0));
        let vals: Vec<Vec3C> = eps.iter().map(|e| a + b.scale_re(*e) + c.scale_re(e * e)).collect();
        let r = epsilon_extrapolate(&eps, &vals).unwrap();
        assert!((r.value - a).max_abs() < 1e-14);
        assert!(epsilon_extrapolate(&eps[..2], &vals[..2]).is_err());
        let wild: Vec<Vec3C> = eps.iter().map(|e| a.scale_re(1.0 / e.powi(6))).collect();
        assert_eq!(epsilon_extrapolate(&eps, &wild).unwrap_err(), Error::DivergentSequence);
    }

    #[test]
    fn f_three_on_axis() {
        let cf = ClosedFormPoint {
            x: 1.0,
            theta1: 0.0,
            phi1: 0.0,
        };
        let got = f_three(&cf, &Constants::default()).unwrap();
        let want = C64::new(-3.0, -5.0) / (8.0 * 2f64.sqrt() * PI.powf(1.5));
        assert!((got - want).norm() < 1e-15);
        assert_eq!(f_four(&cf, &Constants::default()).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn closed_form_domain() {
        let c = Constants::default();
        let eq = ClosedFormPoint {
            x: 1.0,
            theta1: 0.5 * PI,
            phi1: 0.3,
        };
        assert!(matches!(f_one(&eq, &c, ClosedForm::Printed), Err(Error::DistributionalDomain(_))));
        let origin = ClosedFormPoint { x: 0.0, ..eq };
        assert!(f_three(&origin, &c).is_err());
        let axis = ClosedFormPoint {
            x: 1.0,
            theta1: 0.0,
            phi1: PI / 3.0,
        };
        assert!(f_two(&axis, &c, ClosedForm::Printed).is_err());
        assert_eq!(f_two(&axis, &c, ClosedForm::Amended).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn axis_limits_are_continuous() {
        let c = Constants::default();
        for form in [ClosedForm::Printed, ClosedForm::Amended] {
            for (t0, t1) in [(0.0, 2e-3), (PI, PI - 2e-3)] {
                let a = ClosedFormPoint { x: 1.0, theta1: t0, phi1: 0.7 };
                let b = ClosedFormPoint { x: 1.0, theta1: t1, phi1: 0.7 };
                let fa = f_one(&a, &c, form).unwrap();
                let fb = f_one(&b, &c, form).unwrap();
                assert!((fa - fb).norm() < 1e-4 * fa.norm());
            }
        }
    }

    #[test]
    fn homogeneity() {
        let c = Constants::default();
        let cf = ClosedFormPoint {
            x: 0.7,
            theta1: 0.4,
            phi1: 1.1,
        };
        let scaled = ClosedFormPoint { x: 0.7 * 3.0, ..cf };
        let (c1, c2) = (C64::new(0.6, 0.0), C64::new(0.0, 0.8));
        let a = position_wavefunction_closed(&cf, c1, c2, &c).unwrap();
        let b = position_wavefunction_closed(&scaled, c1, c2, &c).unwrap();
        assert!((b.scale_re(3f64.powf(3.5)) - a).max_abs() < 1e-12 * a.max_abs());
    }

    #[test]
    fn density_grid_shape() {
        let g = DensityGrid {
            n_theta: 5,
            n_phi: 4,
            margin: 0.1,
        };
        assert_eq!(g.points().len(), 16);
        let empty = DensityGrid { n_theta: 0, ..g };
        assert!(empty.points().is_empty());
    }
}
