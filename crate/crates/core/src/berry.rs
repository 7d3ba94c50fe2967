//! Berry potential, parallel transport of helicity states along momentum
//! curves and the resulting loop phases.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use crate::algebra::{delta, helicity, levi_civita, spin_matrices, Mat3C, Vec3C, Vec3R, C64, I};
use crate::diff;
use crate::error::{Error, Result};
use crate::geometry::{frame, Gauge, MomentumPoint, DELTA_CUT};
use crate::ode::{dopri5, OdeTolerance};
use crate::quadrature::{gauss_legendre_fixed, integrate_with_breaks, Estimate, Tolerance};

/// Closedness tolerance for loops.
pub const CLOSURE_TOL: f64 = 1e-12;
/// Curves must keep `10·δ_cut·|k|` away from the excluded ray.
pub const CUT_MARGIN: f64 = 10.0 * DELTA_CUT;

type CurveFn = Arc<dyn Fn(f64) -> Vec3R + Send + Sync>;

/// A momentum-space curve `τ ↦ k(τ)`.
#[derive(Clone)]
pub enum Curve {
    Parametric {
        k: CurveFn,
        dk: CurveFn,
        tau0: f64,
        tau1: f64,
    },
    /// Straight segments through the nodes, `τ ∈ [0, nodes − 1]`.
    Polyline(Vec<Vec3R>),
}

impl std::fmt::Debug for Curve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Curve::Parametric { tau0, tau1, .. } => write!(f, "Parametric[{tau0}, {tau1}]"),
            Curve::Polyline(n) => write!(f, "Polyline({} nodes)", n.len()),
        }
    }
}

impl Curve {
    pub fn parametric(
        k: impl Fn(f64) -> Vec3R + Send + Sync + 'static,
        dk: impl Fn(f64) -> Vec3R + Send + Sync + 'static,
        tau0: f64,
        tau1: f64,
    ) -> Self {
        Curve::Parametric {
            k: Arc::new(k),
            dk: Arc::new(dk),
            tau0,
            tau1,
        }
    }

    pub fn range(&self) -> (f64, f64) {
        match self {
            Curve::Parametric { tau0, tau1, .. } => (*tau0, *tau1),
            Curve::Polyline(n) => (0.0, n.len().saturating_sub(1) as f64),
        }
    }

    fn segment(nodes: &[Vec3R], tau: f64) -> usize {
        (tau.floor().max(0.0) as usize).min(nodes.len() - 2)
    }

    pub fn point(&self, tau: f64) -> Vec3R {
        match self {
            Curve::Parametric { k, .. } => k(tau),
            Curve::Polyline(n) => {
                let i = Self::segment(n, tau);
                n[i] + (n[i + 1] - n[i]).scale(tau - i as f64)
            }
        }
    }

    pub fn tangent(&self, tau: f64) -> Vec3R {
        match self {
            Curve::Parametric { dk, .. } => dk(tau),
            Curve::Polyline(n) => {
                let i = Self::segment(n, tau);
                n[i + 1] - n[i]
            }
        }
    }

    /// `|k(τ₁) − k(τ₀)|`.
    pub fn gap(&self) -> f64 {
        let (a, b) = self.range();
        (self.point(b) - self.point(a)).norm()
    }

    /// Parameter values where the tangent may jump.
    fn breaks(&self) -> Vec<f64> {
        let (a, b) = self.range();
        match self {
            Curve::Parametric { .. } => (0..=8).map(|i| a + (b - a) * i as f64 / 8.0).collect(),
            Curve::Polyline(n) => (0..n.len()).map(|i| i as f64).collect(),
        }
    }

    /// Smallest sampled distance to the gauge's excluded set, relative to `|k|`.
    fn min_cut_distance(&self, gauge: &Gauge) -> f64 {
        let (a, b) = self.range();
        let samples: Vec<f64> = match self {
            Curve::Parametric { .. } => (0..=4096).map(|i| a + (b - a) * i as f64 / 4096.0).collect(),
            Curve::Polyline(n) => (0..(n.len() - 1) * 256 + 1).map(|i| i as f64 / 256.0).collect(),
        };
        samples
            .into_iter()
            .map(|t| {
                let k = self.point(t);
                if k.norm() == 0.0 {
                    0.0
                } else {
                    gauge.relative_cut_distance(&k)
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_lambda(lambda: i32) -> Result<f64> {
    match lambda {
        1 | -1 => Ok(lambda as f64),
        _ => Err(Error::InvalidInput(format!("helicity must be ±1, got {lambda}"))),
    }
}

/// A curve with the gauge and helicity used to transport along it.
#[derive(Debug, Clone)]
pub struct LoopSpec {
    pub curve: Curve,
    pub closed: bool,
    pub gauge: Gauge,
    pub lambda: i32,
}

impl LoopSpec {
    pub fn new(curve: Curve, closed: bool, gauge: Gauge, lambda: i32) -> Result<Self> {
        check_lambda(lambda)?;
        if !gauge.is_real() {
            return Err(Error::Unsupported("Berry transport is defined for real gauges".into()));
        }
        let (a, b) = curve.range();
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInput(format!("bad parameter range [{a}, {b}]")));
        }
        if let Curve::Polyline(n) = &curve {
            if n.len() < 2 || n.iter().any(|p| !p.is_finite()) {
                return Err(Error::InvalidInput("polyline needs at least two finite nodes".into()));
            }
        }
        let gap = curve.gap();
        if closed && gap > CLOSURE_TOL {
            return Err(Error::OpenCurve { gap });
        }
        let distance = curve.min_cut_distance(&gauge);
        if !(distance >= CUT_MARGIN) {
            return Err(Error::CurveNearCut {
                gauge: gauge.name().to_string(),
                distance,
            });
        }
        Ok(LoopSpec {
            curve,
            closed,
            gauge,
            lambda,
        })
    }

    /// Circle of polar angle `theta` on the sphere `|k| = radius`,
    /// traversed once with increasing azimuth.
    pub fn circle(theta: f64, radius: f64, gauge: Gauge, lambda: i32) -> Result<Self> {
        if !(radius > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidInput("circle needs radius > 0 and finite theta".into()));
        }
        let (st, ct) = theta.sin_cos();
        let curve = Curve::parametric(
            move |t| Vec3R::new(radius * st * t.cos(), radius * st * t.sin(), radius * ct),
            move |t| Vec3R::new(-radius * st * t.sin(), radius * st * t.cos(), 0.0),
            0.0,
            2.0 * PI,
        );
        // the closed form sin(2π) ≠ 0 leaves a gap of order 1e-16·radius
        let mut spec = LoopSpec::new(curve.clone(), false, gauge, lambda)?;
        spec.closed = curve.gap() <= CLOSURE_TOL * radius.max(1.0);
        Ok(spec)
    }

    /// Same curve traversed backwards.
    pub fn reversed(&self) -> LoopSpec {
        let curve = match &self.curve {
            Curve::Parametric { k, dk, tau0, tau1 } => {
                let (k, dk, s) = (k.clone(), dk.clone(), tau0 + tau1);
                Curve::parametric(move |t| k(s - t), move |t| -dk(s - t), *tau0, *tau1)
            }
            Curve::Polyline(n) => Curve::Polyline(n.iter().rev().copied().collect()),
        };
        LoopSpec {
            curve,
            ..self.clone()
        }
    }
}

/// `𝒜_l = −λ(ε_{lm3}k_m/(|k|(|k| − k₃)) + a∂_l b − b∂_l a)` for the gauge.
pub fn berry_potential(k: &MomentumPoint, lambda: i32, gauge: &Gauge) -> Result<Vec3R> {
    let l = check_lambda(lambda)?;
    Ok(gauge.sigma_coefficient(k.k())?.scale(-l))
}

/// Transported state at the end of a curve.
#[derive(Debug, Clone, Copy)]
pub struct Transport {
    pub psi: Vec3C,
    /// Unwrapped phase accumulated by the helicity amplitude.
    pub phase: f64,
    /// Largest component leaving the helicity eigenspace before re-projection.
    pub max_drift: f64,
    pub steps: usize,
}

impl Transport {
    pub fn phase_factor(&self) -> C64 {
        C64::from_polar(1.0, self.phase)
    }
}

/// Parallel transport of `psi0` along the curve.
///
/// The state is carried as its coefficients on the gauge's transverse legs
/// `(E₁, E₂)`, where the equation reads `ψ′ = −i(c·k′)σ_y ψ`. After each
/// accepted step the coefficients are projected back onto the helicity-λ
/// eigenvector `(1, iλ)/√2` and the discarded part is recorded.
pub fn transport(spec: &LoopSpec, psi0: &Vec3C, tol: &OdeTolerance) -> Result<Transport> {
    let lam = check_lambda(spec.lambda)?;
    let (tau0, tau1) = spec.curve.range();
    let start = MomentumPoint::in_gauge(spec.curve.point(tau0), &spec.gauge)?;
    let n0 = psi0.norm();
    if !(n0 > 0.0) || !psi0.is_finite() {
        return Err(Error::InvalidInput("initial state must be finite and nonzero".into()));
    }
    let sigma = helicity(start.k())?;
    let defect = (sigma.mul_vec(psi0) - psi0.scale_re(lam)).norm() / n0;
    if defect > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "initial state is not a helicity-{} eigenvector (defect {defect:e})",
            spec.lambda
        )));
    }
    let f0 = frame(&start, &spec.gauge)?;
    let mut z = (f0.legs[0].inner(psi0) - I * lam * f0.legs[1].inner(psi0)) * FRAC_1_SQRT_2;
    let mut phase = 0.0;
    let mut max_drift = defect;
    let mut steps = 0;
    let gauge = &spec.gauge;
    let curve = &spec.curve;
    let rhs = |tau: f64, y: &[f64; 4]| -> Result<[f64; 4]> {
        let k = curve.point(tau);
        let g = gauge.sigma_coefficient(&k)?.dot(&curve.tangent(tau));
        // −i g σ_y ψ = g(−ψ₂, ψ₁)
        Ok([-g * y[2], -g * y[3], g * y[0], g * y[1]])
    };
    let breaks = curve.breaks();
    for w in breaks.windows(2) {
        let start = z.arg();
        let psi = [z * FRAC_1_SQRT_2, z * I * lam * FRAC_1_SQRT_2];
        let y0 = [psi[0].re, psi[0].im, psi[1].re, psi[1].im];
        let mut last_arg = start;
        let mut local_phase = 0.0;
        let sol = dopri5(rhs, w[0], w[1], y0, tol, |_, y| {
            let (p1, p2) = (C64::new(y[0], y[1]), C64::new(y[2], y[3]));
            let amp = (p1 - I * lam * p2) * FRAC_1_SQRT_2;
            let e = [C64::new(FRAC_1_SQRT_2, 0.0), I * lam * FRAC_1_SQRT_2];
            let drift = ((p1 - amp * e[0]).norm_sqr() + (p2 - amp * e[1]).norm_sqr()).sqrt();
            max_drift = max_drift.max(drift / (amp.norm() + f64::MIN_POSITIVE));
            let q = [amp * e[0], amp * e[1]];
            *y = [q[0].re, q[0].im, q[1].re, q[1].im];
            let a = amp.arg();
            let mut d = a - last_arg;
            d -= 2.0 * PI * (d / (2.0 * PI)).round();
            local_phase += d;
            last_arg = a;
        })?;
        steps += sol.accepted;
        z = (C64::new(sol.y[0], sol.y[1]) - I * lam * C64::new(sol.y[2], sol.y[3])) * FRAC_1_SQRT_2;
        phase += local_phase;
    }
    let end = MomentumPoint::in_gauge(curve.point(tau1), gauge)?;
    let f1 = frame(&end, gauge)?;
    let psi = (f1.legs[0] + f1.legs[1].scale(I * lam)).scale(z * FRAC_1_SQRT_2);
    if !psi.is_finite() {
        return Err(Error::NonFinite("transported state".into()));
    }
    Ok(Transport {
        psi,
        phase,
        max_drift,
        steps,
    })
}

/// `∫_C 𝒜·dk` along any curve of the spec.
///
/// Parametric curves use adaptive Gauss–Kronrod; polylines use fixed
/// Gauss–Legendre of order 16 per segment, with the order-8 rule as the
/// error estimate.
pub fn line_integral(spec: &LoopSpec, tol: &Tolerance) -> Result<Estimate<f64>> {
    let integrand = |tau: f64| -> Result<f64> {
        let k = MomentumPoint::in_gauge(spec.curve.point(tau), &spec.gauge)?;
        Ok(berry_potential(&k, spec.lambda, &spec.gauge)?.dot(&spec.curve.tangent(tau)))
    };
    match &spec.curve {
        Curve::Parametric { .. } => integrate_with_breaks(integrand, &spec.curve.breaks(), tol),
        Curve::Polyline(n) => {
            let (mut value, mut error) = (0.0, 0.0);
            for i in 0..n.len() - 1 {
                let (a, b) = (i as f64, (i + 1) as f64);
                let fine: f64 = gauss_legendre_fixed(integrand, a, b, 16)?;
                let coarse: f64 = gauss_legendre_fixed(integrand, a, b, 8)?;
                value += fine;
                error += (fine - coarse).abs();
            }
            Ok(Estimate {
                value,
                error,
                evaluations: 24 * (n.len() - 1),
            })
        }
    }
}

/// The loop phase `γ[C] = ∮ 𝒜·dk`; open curves are rejected.
pub fn berry_phase_integral(spec: &LoopSpec, tol: &Tolerance) -> Result<Estimate<f64>> {
    if !spec.closed {
        return Err(Error::OpenCurve { gap: spec.curve.gap() });
    }
    line_integral(spec, tol)
}

/// Which closed form to evaluate for a polar circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleGauge {
    /// `γ₁ = λ2π(cos θ + 1)`, north-pole gauge.
    North = 1,
    /// `γ₂ = λ2π cos θ`, spherical gauge.
    Spherical = 2,
    /// `γ₃ = λ2π(cos θ − 1)`, south-pole gauge.
    South = 3,
}

impl ExampleGauge {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(ExampleGauge::North),
            2 => Ok(ExampleGauge::Spherical),
            3 => Ok(ExampleGauge::South),
            _ => Err(Error::InvalidInput(format!("example index must be 1, 2 or 3, got {i}"))),
        }
    }

    pub fn gauge(self) -> Gauge {
        match self {
            ExampleGauge::North => Gauge::StereoNorth,
            ExampleGauge::Spherical => Gauge::Spherical,
            ExampleGauge::South => Gauge::StereoSouth,
        }
    }
}

/// Closed-form loop phase for the circle of polar angle `theta`.
///
/// `0 < θ < π`; `θ = π` is also accepted for the north-pole form.
pub fn berry_phase_closed(theta: f64, lambda: i32, which: ExampleGauge) -> Result<f64> {
    let l = check_lambda(lambda)?;
    let ok = theta > 0.0 && (theta < PI || (theta == PI && which == ExampleGauge::North));
    if !ok {
        return Err(Error::InvalidInput(format!("theta = {theta} outside the example's domain")));
    }
    let c = theta.cos();
    Ok(l * 2.0 * PI
        * match which {
            ExampleGauge::North => c + 1.0,
            ExampleGauge::Spherical => c,
            ExampleGauge::South => c - 1.0,
        })
}

/// The helicity connection coefficient `i c_l Σ`, so that `D′_l = ∂_l + i c_l Σ`.
pub fn dprime_connection(k: &MomentumPoint, l: usize, gauge: &Gauge) -> Result<Mat3C> {
    if l > 2 {
        return Err(Error::InvalidInput(format!("axis index {l} out of range")));
    }
    let c = gauge.sigma_coefficient(k.k())?;
    Ok(helicity(k.k())?.scale(I * c[l]))
}

/// `(δ_{lj} − k_lk_j/|k|²) S_j / |k|`, the derivative of `Σ`.
fn sigma_derivative(k: &Vec3R, l: usize) -> Mat3C {
    let s = spin_matrices();
    let r2 = k.norm_sqr();
    let mut out = Mat3C::ZERO;
    for (j, sj) in s.iter().enumerate() {
        out += sj.scale_re((delta(l, j) - k[l] * k[j] / r2) / r2.sqrt());
    }
    out
}

/// `[D′_l, D′_m]` from the three-term closed form: a monopole term
/// `iε_{lmr}k_r/|k|³ Σ` plus the two terms carrying the derivative of `Σ`.
pub fn dprime_curvature(k: &MomentumPoint, l: usize, m: usize, gauge: &Gauge) -> Result<Mat3C> {
    if l > 2 || m > 2 {
        return Err(Error::InvalidInput("axis index out of range".into()));
    }
    let kv = k.k();
    let c = gauge.sigma_coefficient(kv)?;
    let r3 = kv.norm().powi(3);
    let mut mono = 0.0;
    for r in 0..3 {
        mono += levi_civita(l, m, r) * kv[r] / r3;
    }
    let sigma = helicity(kv)?;
    let out = sigma.scale(I * mono) + sigma_derivative(kv, l).scale(I * c[m]) - sigma_derivative(kv, m).scale(I * c[l]);
    Ok(out)
}

/// `∂_lC_m − ∂_mC_l + [C_l, C_m]` with `C_l = i c_l Σ` by finite differences.
pub fn dprime_curvature_fd(k: &MomentumPoint, l: usize, m: usize, gauge: &Gauge, h: Option<f64>) -> Result<Mat3C> {
    let h = h.unwrap_or_else(|| diff::default_step(k.k()));
    let conn = |axis: usize| move |p: &Vec3R| dprime_connection(&MomentumPoint::in_gauge(*p, gauge)?, axis, gauge);
    let dl = diff::partial(conn(m), k.k(), l, h)?;
    let dm = diff::partial(conn(l), k.k(), m, h)?;
    let cl = dprime_connection(k, l, gauge)?;
    let cm = dprime_connection(k, m, gauge)?;
    Ok(dl - dm + cl.commutator(&cm))
}
