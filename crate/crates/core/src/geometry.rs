//! Coordinates on the cut momentum space and the triad families (gauges).
//!
//! Every gauge is an orthonormal triad `(E₁, E₂, E₃)` with `E₃ = k/|k|` and
//! `E₁, E₂` spanning the plane orthogonal to `k`. The base family is the
//! stereographic triad built by projecting from the north pole; it is smooth
//! on `ℝ³` minus the nonnegative `k₃`-axis. The remaining gauges are
//! obtained from it by a `k`-dependent rotation (real) or unitary mixing
//! (complex) of the transverse legs.

use std::fmt;
use std::sync::Arc;

use crate::algebra::{Mat2C, Mat3C, Vec3C, Vec3R, C64, I, ONE, ZERO};
use crate::diff;
use crate::error::{Error, Result};

/// Relative radius of the exclusion tube around each gauge's excluded ray.
pub const DELTA_CUT: f64 = 1e-9;

/// A nonzero, finite momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumPoint(Vec3R);

impl MomentumPoint {
    pub fn new(k: Vec3R) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::NonFinite("momentum".into()));
        }
        if k.norm() == 0.0 {
            return Err(Error::ZeroMomentum);
        }
        Ok(MomentumPoint(k))
    }

    /// Constructs the point and checks it against the domain of `gauge`.
    pub fn in_gauge(k: Vec3R, gauge: &Gauge) -> Result<Self> {
        let p = Self::new(k)?;
        gauge.check(&p.0)?;
        Ok(p)
    }

    pub fn k(&self) -> &Vec3R {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn unit(&self) -> Vec3R {
        self.0.scale(1.0 / self.norm())
    }

    /// Polar and azimuthal angles `(θ, φ)`, `φ ∈ [0, 2π)`. `φ := 0` on the axis.
    pub fn angles(&self) -> (f64, f64) {
        let k = &self.0;
        let theta = k.axial_distance().atan2(k[2]);
        let phi = if k[0] == 0.0 && k[1] == 0.0 {
            0.0
        } else {
            k[1].atan2(k[0]).rem_euclid(std::f64::consts::TAU)
        };
        (theta, phi)
    }
}

/// Real scalar function on momentum space with an optional analytic gradient.
pub trait ScalarField: Send + Sync {
    fn value(&self, k: &Vec3R) -> f64;

    /// Analytic gradient, when one is registered.
    fn analytic_gradient(&self, _k: &Vec3R) -> Option<Vec3R> {
        None
    }

    /// Analytic gradient if available, otherwise extrapolated central differences.
    fn gradient(&self, k: &Vec3R) -> Vec3R {
        if let Some(g) = self.analytic_gradient(k) {
            return g;
        }
        let h = diff::default_step(k);
        let g = diff::gradient(|p: &Vec3R| Ok(self.value(p)), k, h)
            .expect("scalar field evaluation is infallible");
        Vec3R(g)
    }
}

type ValueFn = dyn Fn(&Vec3R) -> f64 + Send + Sync;
type GradFn = dyn Fn(&Vec3R) -> Vec3R + Send + Sync;

/// [`ScalarField`] backed by closures.
#[derive(Clone)]
pub struct FnField {
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradFn>>,
}

impl FnField {
    pub fn new(value: impl Fn(&Vec3R) -> f64 + Send + Sync + 'static) -> Self {
        FnField {
            value: Arc::new(value),
            gradient: None,
        }
    }

    pub fn with_gradient(mut self, grad: impl Fn(&Vec3R) -> Vec3R + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(grad));
        self
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c).with_gradient(|_| Vec3R::ZERO)
    }
}

impl ScalarField for FnField {
    fn value(&self, k: &Vec3R) -> f64 {
        (self.value)(k)
    }

    fn analytic_gradient(&self, k: &Vec3R) -> Option<Vec3R> {
        self.gradient.as_ref().map(|g| g(k))
    }
}

/// The four angle fields of a unitary transverse mixing
/// `U⊥ = e^{iβ} diag(e^{iψ}, e^{−iψ}) R(α) diag(e^{iΔ}, e^{−iΔ})`.
#[derive(Clone)]
pub struct UnitaryAngles {
    pub alpha: Arc<dyn ScalarField>,
    pub beta: Arc<dyn ScalarField>,
    pub psi: Arc<dyn ScalarField>,
    pub delta: Arc<dyn ScalarField>,
}

impl UnitaryAngles {
    /// Angle values `(α, β, ψ, Δ)` at `k`.
    pub fn values(&self, k: &Vec3R) -> [f64; 4] {
        [
            self.alpha.value(k),
            self.beta.value(k),
            self.psi.value(k),
            self.delta.value(k),
        ]
    }

    /// Gradients of `(α, β, ψ, Δ)` at `k`.
    pub fn gradients(&self, k: &Vec3R) -> [Vec3R; 4] {
        [
            self.alpha.gradient(k),
            self.beta.gradient(k),
            self.psi.gradient(k),
            self.delta.gradient(k),
        ]
    }
}

/// `U⊥(α, β, ψ, Δ)`.
pub fn unitary_mixing(alpha: f64, beta: f64, psi: f64, delta: f64) -> Mat2C {
    let (sa, ca) = alpha.sin_cos();
    let rot = Mat2C([[C64::new(ca, 0.0), C64::new(sa, 0.0)], [C64::new(-sa, 0.0), C64::new(ca, 0.0)]]);
    let p = Mat2C::diag(C64::from_polar(1.0, psi), C64::from_polar(1.0, -psi));
    let q = Mat2C::diag(C64::from_polar(1.0, delta), C64::from_polar(1.0, -delta));
    (p * rot * q).scale(C64::from_polar(1.0, beta))
}

/// Partial derivatives of `U⊥` with respect to `(α, β, ψ, Δ)`.
fn unitary_mixing_partials(alpha: f64, beta: f64, psi: f64, delta: f64) -> [Mat2C; 4] {
    let (sa, ca) = alpha.sin_cos();
    let re = |x: f64| C64::new(x, 0.0);
    let rot = Mat2C([[re(ca), re(sa)], [re(-sa), re(ca)]]);
    let drot = Mat2C([[re(-sa), re(ca)], [re(-ca), re(-sa)]]);
    let p = Mat2C::diag(C64::from_polar(1.0, psi), C64::from_polar(1.0, -psi));
    let dp = Mat2C::diag(I * C64::from_polar(1.0, psi), -I * C64::from_polar(1.0, -psi));
    let q = Mat2C::diag(C64::from_polar(1.0, delta), C64::from_polar(1.0, -delta));
    let dq = Mat2C::diag(I * C64::from_polar(1.0, delta), -I * C64::from_polar(1.0, -delta));
    let phase = C64::from_polar(1.0, beta);
    let u = (p * rot * q).scale(phase);
    [
        (p * drot * q).scale(phase),
        u.scale(I),
        (dp * rot * q).scale(phase),
        (p * rot * dq).scale(phase),
    ]
}

/// Which part of the `k₃`-axis a gauge removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExcludedSet {
    /// `{(0,0,k₃) : k₃ ≥ 0}`
    NonNegativeAxis,
    /// `{(0,0,k₃) : k₃ ∈ ℝ}`
    WholeAxis,
    /// `{(0,0,k₃) : k₃ ≤ 0}`
    NonPositiveAxis,
}

impl ExcludedSet {
    /// Euclidean distance from `k` to the excluded set.
    pub fn distance(&self, k: &Vec3R) -> f64 {
        let rho = k.axial_distance();
        match self {
            ExcludedSet::WholeAxis => rho,
            ExcludedSet::NonNegativeAxis if k[2] >= 0.0 => rho,
            ExcludedSet::NonPositiveAxis if k[2] <= 0.0 => rho,
            _ => k.norm(),
        }
    }
}

/// Choice of transverse dyad. See the module docs.
#[derive(Clone)]
pub enum Gauge {
    /// Stereographic triad, projection from the north pole.
    StereoNorth,
    /// Spherical-coordinate triad `(θ̂, φ̂, r̂)`.
    Spherical,
    /// Stereographic triad, projection from the south pole; equals
    /// `StereoNorth` rotated by `(cos 2φ, sin 2φ)`.
    StereoSouth,
    /// `StereoNorth` rotated by `(a, b) = (cos α, sin α)`.
    GeneralRotation(Arc<dyn ScalarField>),
    /// `StereoNorth` mixed by the unitary `U⊥` of the supplied angles.
    UnitaryRotation(Arc<UnitaryAngles>),
}

impl fmt::Debug for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Gauge {
    pub fn general_rotation(alpha: impl ScalarField + 'static) -> Self {
        Gauge::GeneralRotation(Arc::new(alpha))
    }

    pub fn unitary_rotation(
        alpha: impl ScalarField + 'static,
        beta: impl ScalarField + 'static,
        psi: impl ScalarField + 'static,
        delta: impl ScalarField + 'static,
    ) -> Self {
        Gauge::UnitaryRotation(Arc::new(UnitaryAngles {
            alpha: Arc::new(alpha),
            beta: Arc::new(beta),
            psi: Arc::new(psi),
            delta: Arc::new(delta),
        }))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gauge::StereoNorth => "stereo-north",
            Gauge::Spherical => "spherical",
            Gauge::StereoSouth => "stereo-south",
            Gauge::GeneralRotation(_) => "general-rotation",
            Gauge::UnitaryRotation(_) => "unitary-rotation",
        }
    }

    /// Parses the names accepted on the command line.
    pub fn from_name(name: &str) -> Option<Gauge> {
        match name {
            "stereo-north" | "1" => Some(Gauge::StereoNorth),
            "spherical" | "2" => Some(Gauge::Spherical),
            "stereo-south" | "3" => Some(Gauge::StereoSouth),
            _ => None,
        }
    }

    pub fn is_real(&self) -> bool {
        !matches!(self, Gauge::UnitaryRotation(_))
    }

    pub fn excluded(&self) -> ExcludedSet {
        match self {
            Gauge::Spherical => ExcludedSet::WholeAxis,
            Gauge::StereoSouth => ExcludedSet::NonPositiveAxis,
            _ => ExcludedSet::NonNegativeAxis,
        }
    }

    /// Distance from `k` to the excluded set, relative to `|k|`.
    pub fn relative_cut_distance(&self, k: &Vec3R) -> f64 {
        self.excluded().distance(k) / k.norm()
    }

    pub fn contains(&self, k: &Vec3R) -> bool {
        let r = k.norm();
        r > 0.0 && k.is_finite() && self.excluded().distance(k) > DELTA_CUT * r
    }

    pub fn check(&self, k: &Vec3R) -> Result<()> {
        if self.contains(k) {
            Ok(())
        } else if k.norm() == 0.0 {
            Err(Error::ZeroMomentum)
        } else {
            Err(Error::OutsideDomain {
                gauge: self.name().to_string(),
                k: *k,
            })
        }
    }

    /// Whether two gauges denote the same triad field.
    pub fn same_as(&self, other: &Gauge) -> bool {
        match (self, other) {
            (Gauge::StereoNorth, Gauge::StereoNorth)
            | (Gauge::Spherical, Gauge::Spherical)
            | (Gauge::StereoSouth, Gauge::StereoSouth) => true,
            (Gauge::GeneralRotation(a), Gauge::GeneralRotation(b)) => Arc::ptr_eq(a, b),
            (Gauge::UnitaryRotation(a), Gauge::UnitaryRotation(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }

    /// Coefficient `c_l` of `Σ` in `iA_l` for real gauges:
    /// `ε_{lm3} k_m / (|k|(|k| − k₃)) + (a ∂_l b − b ∂_l a)`.
    ///
    /// Spherical and south-pole gauges use their combined closed forms,
    /// which stay finite on the nonnegative `k₃`-axis where applicable.
    pub fn sigma_coefficient(&self, k: &Vec3R) -> Result<Vec3R> {
        self.check(k)?;
        let r = k.norm();
        let swirl = Vec3R::new(k[1], -k[0], 0.0); // ε_{lm3} k_m
        match self {
            Gauge::StereoNorth => Ok(swirl.scale(1.0 / (r * (r - k[2])))),
            Gauge::Spherical => {
                let rho2 = k[0] * k[0] + k[1] * k[1];
                Ok(swirl.scale(k[2] / (r * rho2)))
            }
            Gauge::StereoSouth => Ok(swirl.scale(-1.0 / (r * (r + k[2])))),
            Gauge::GeneralRotation(alpha) => {
                Ok(swirl.scale(1.0 / (r * (r - k[2]))) + alpha.gradient(k))
            }
            Gauge::UnitaryRotation(_) => Err(Error::Unsupported(
                "helicity coefficient is defined for real gauges only".into(),
            )),
        }
    }
}

/// Coordinates `(ξ, η, ζ)`: stereographic image of `k/|k|` from the north pole, plus `ζ = |k|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StereoCoords {
    pub xi: f64,
    pub eta: f64,
    pub zeta: f64,
}

pub fn to_stereo(k: &MomentumPoint) -> Result<StereoCoords> {
    Gauge::StereoNorth.check(k.k())?;
    let v = k.k();
    let r = k.norm();
    let d = r - v[2];
    Ok(StereoCoords {
        xi: v[0] / d,
        eta: v[1] / d,
        zeta: r,
    })
}

pub fn from_stereo(s: &StereoCoords) -> Result<MomentumPoint> {
    if !(s.zeta > 0.0) {
        return Err(Error::InvalidInput(format!("zeta must be positive, got {}", s.zeta)));
    }
    let q = s.xi * s.xi + s.eta * s.eta;
    let w = s.zeta / (q + 1.0);
    MomentumPoint::new(Vec3R::new(2.0 * s.xi * w, 2.0 * s.eta * w, (q - 1.0) * w))
}

/// Orthonormal triad at a point.
///
/// `legs[μ]` is `E_{μ+1}`. Frames produced by [`frame_rotate`] and
/// [`frame_unitary`] carry no gauge tag.
#[derive(Debug, Clone)]
pub struct Frame {
    pub legs: [Vec3C; 3],
    pub gauge: Option<Gauge>,
    pub base: MomentumPoint,
}

impl Frame {
    fn real(legs: [Vec3R; 3], gauge: Gauge, base: MomentumPoint) -> Self {
        Frame {
            legs: legs.map(|v| v.to_complex()),
            gauge: Some(gauge),
            base,
        }
    }

    /// `(E)_{jμ} = E_μ[j]`: the legs as columns.
    pub fn matrix(&self) -> Mat3C {
        Mat3C::from_columns(self.legs)
    }

    /// Inverse of [`Frame::matrix`]; rows are the dual legs `E^μ = E_μ*`.
    pub fn inverse(&self) -> Mat3C {
        self.matrix().adjoint()
    }

    /// Largest deviation of `E_μ† E_ν` from `δ_{μν}`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for mu in 0..3 {
            for nu in 0..3 {
                let want = if mu == nu { ONE } else { ZERO };
                worst = worst.max((self.legs[mu].inner(&self.legs[nu]) - want).norm());
            }
        }
        worst
    }

    pub fn det(&self) -> C64 {
        self.matrix().det()
    }
}

fn unit_axis(i: usize) -> Vec3R {
    Vec3R::axis(i)
}

/// `∂_l n_i = (δ_il − n_i n_l)/|k|`, returned as `[∂_1 n, ∂_2 n, ∂_3 n]`.
fn unit_jacobian(k: &Vec3R) -> [Vec3R; 3] {
    let r = k.norm();
    let n = k.scale(1.0 / r);
    [0, 1, 2].map(|l| (unit_axis(l) - n.scale(n[l])).scale(1.0 / r))
}

/// Stereographic (north) triad in the spherical-angle form.
pub fn frame_stereo_north(k: &MomentumPoint) -> Result<Frame> {
    Gauge::StereoNorth.check(k.k())?;
    let (theta, phi) = k.angles();
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let (s2p, _) = (2.0 * phi).sin_cos();
    let hc = (0.5 * theta).cos().powi(2); // cos²(θ/2)
    let e1 = Vec3R::new(2.0 * hc * cp * cp - 1.0, hc * s2p, -st * cp);
    let e2 = Vec3R::new(-hc * s2p, 1.0 - 2.0 * hc * sp * sp, st * sp);
    let e3 = Vec3R::new(st * cp, st * sp, ct);
    Ok(Frame::real([e1, e2, e3], Gauge::StereoNorth, *k))
}

/// Spherical-coordinate triad `(θ̂, φ̂, r̂)`.
pub fn frame_spherical(k: &MomentumPoint) -> Result<Frame> {
    Gauge::Spherical.check(k.k())?;
    let (theta, phi) = k.angles();
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let e1 = Vec3R::new(ct * cp, ct * sp, -st);
    let e2 = Vec3R::new(-sp, cp, 0.0);
    let e3 = Vec3R::new(st * cp, st * sp, ct);
    Ok(Frame::real([e1, e2, e3], Gauge::Spherical, *k))
}

/// Stereographic triad from the south pole.
pub fn frame_stereo_south(k: &MomentumPoint) -> Result<Frame> {
    Gauge::StereoSouth.check(k.k())?;
    let [e1, e2] = south_legs(&k.unit());
    Ok(Frame::real([e1, e2, k.unit()], Gauge::StereoSouth, *k))
}

fn north_legs(n: &Vec3R) -> [Vec3R; 2] {
    // E₁ = n₁(n − e₃)/(1 − n₃) − e₁,  E₂ = e₂ − n₂(n − e₃)/(1 − n₃)
    let d = 1.0 - n[2];
    let v = *n - unit_axis(2);
    [v.scale(n[0] / d) - unit_axis(0), unit_axis(1) - v.scale(n[1] / d)]
}

fn south_legs(n: &Vec3R) -> [Vec3R; 2] {
    // E₁ = e₁ − n₁(n + e₃)/(1 + n₃),  E₂ = e₂ − n₂(n + e₃)/(1 + n₃)
    let u = 1.0 + n[2];
    let w = *n + unit_axis(2);
    [unit_axis(0) - w.scale(n[0] / u), unit_axis(1) - w.scale(n[1] / u)]
}

/// `E′₁ = aE₁ − bE₂`, `E′₂ = bE₁ + aE₂`, `E′₃ = E₃`.
pub fn frame_rotate(f: &Frame, a: f64, b: f64) -> Result<Frame> {
    if ((a * a + b * b) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "rotation coefficients must satisfy a²+b²=1 (got {})",
            a * a + b * b
        )));
    }
    let [e1, e2, e3] = f.legs;
    Ok(Frame {
        legs: [e1.scale_re(a) - e2.scale_re(b), e1.scale_re(b) + e2.scale_re(a), e3],
        gauge: None,
        base: f.base,
    })
}

/// `E′ = E U` with `U = U⊥ ⊕ 1`, i.e. `E′_μ = Σ_ν U_{νμ} E_ν`.
pub fn frame_unitary(f: &Frame, u: &Mat2C) -> Result<Frame> {
    let defect = u.unitarity_defect();
    if defect > 1e-12 {
        return Err(Error::InvalidInput(format!("U⊥ is not unitary (defect {defect:e})")));
    }
    let [e1, e2, e3] = f.legs;
    let m = &u.0;
    Ok(Frame {
        legs: [e1.scale(m[0][0]) + e2.scale(m[1][0]), e1.scale(m[0][1]) + e2.scale(m[1][1]), e3],
        gauge: None,
        base: f.base,
    })
}

/// Embedding of `U⊥` into the 3×3 `U = U⊥ ⊕ 1`.
pub fn embed_unitary(u: &Mat2C) -> Mat3C {
    let m = &u.0;
    Mat3C([[m[0][0], m[0][1], ZERO], [m[1][0], m[1][1], ZERO], [ZERO, ZERO, ONE]])
}

/// Triad of `gauge` at `k`.
pub fn frame(k: &MomentumPoint, gauge: &Gauge) -> Result<Frame> {
    let mut f = match gauge {
        Gauge::StereoNorth => return frame_stereo_north(k),
        Gauge::Spherical => return frame_spherical(k),
        Gauge::StereoSouth => return frame_stereo_south(k),
        Gauge::GeneralRotation(alpha) => {
            let (b, a) = alpha.value(k.k()).sin_cos();
            frame_rotate(&frame_stereo_north(k)?, a, b)?
        }
        Gauge::UnitaryRotation(angles) => {
            let [al, be, ps, de] = angles.values(k.k());
            frame_unitary(&frame_stereo_north(k)?, &unitary_mixing(al, be, ps, de))?
        }
    };
    f.gauge = Some(gauge.clone());
    Ok(f)
}

/// Analytic derivatives of the triad: `jac[l][μ] = ∂_l E_μ`.
///
/// Derived from the Cartesian form of each family; gauge angles enter
/// through their registered (or differenced) gradients.
pub fn frame_jacobian(k: &MomentumPoint, gauge: &Gauge) -> Result<[[Vec3C; 3]; 3]> {
    gauge.check(k.k())?;
    let kv = k.k();
    let n = k.unit();
    let dn = unit_jacobian(kv);
    let real = |j: [[Vec3R; 3]; 3]| j.map(|row| row.map(|v| v.to_complex()));
    match gauge {
        Gauge::StereoNorth => Ok(real(north_jacobian(&n, &dn))),
        Gauge::StereoSouth => {
            let u = 1.0 + n[2];
            let w = n + unit_axis(2);
            let g = [n[0] / u, n[1] / u];
            Ok(real([0, 1, 2].map(|l| {
                let dg = [0, 1].map(|i| dn[l][i] / u - n[i] * dn[l][2] / (u * u));
                let d1 = -(w.scale(dg[0]) + dn[l].scale(g[0]));
                let d2 = -(w.scale(dg[1]) + dn[l].scale(g[1]));
                [d1, d2, dn[l]]
            })))
        }
        Gauge::Spherical => {
            let rho = kv.axial_distance();
            let swirl = Vec3R::new(-kv[1], kv[0], 0.0);
            let e2 = swirl.scale(1.0 / rho);
            let dswirl = [Vec3R::new(0.0, 1.0, 0.0), Vec3R::new(-1.0, 0.0, 0.0), Vec3R::ZERO];
            let drho = [kv[0] / rho, kv[1] / rho, 0.0];
            Ok(real([0, 1, 2].map(|l| {
                let de2 = dswirl[l].scale(1.0 / rho) - swirl.scale(drho[l] / (rho * rho));
                let de1 = de2.cross(&n) + e2.cross(&dn[l]);
                [de1, de2, dn[l]]
            })))
        }
        Gauge::GeneralRotation(alpha) => {
            let base = north_jacobian(&n, &dn);
            let [e1, e2] = north_legs(&n);
            let (b, a) = alpha.value(kv).sin_cos();
            let grad = alpha.gradient(kv);
            Ok(real([0, 1, 2].map(|l| {
                let da = -b * grad[l];
                let db = a * grad[l];
                let d1 = e1.scale(da) + base[l][0].scale(a) - e2.scale(db) - base[l][1].scale(b);
                let d2 = e1.scale(db) + base[l][0].scale(b) + e2.scale(da) + base[l][1].scale(a);
                [d1, d2, dn[l]]
            })))
        }
        Gauge::UnitaryRotation(angles) => {
            let base = north_jacobian(&n, &dn);
            let legs = north_legs(&n).map(|v| v.to_complex());
            let [al, be, ps, de] = angles.values(kv);
            let u = unitary_mixing(al, be, ps, de);
            let partials = unitary_mixing_partials(al, be, ps, de);
            let grads = angles.gradients(kv);
            Ok([0, 1, 2].map(|l| {
                let mut du = Mat2C([[ZERO; 2]; 2]);
                for (p, g) in partials.iter().zip(grads.iter()) {
                    du = du.add(&p.scale(C64::new(g[l], 0.0)));
                }
                let dlegs = [base[l][0].to_complex(), base[l][1].to_complex()];
                let leg = |mu: usize| {
                    let mut v = Vec3C::ZERO;
                    for nu in 0..2 {
                        v += dlegs[nu].scale(u.0[nu][mu]) + legs[nu].scale(du.0[nu][mu]);
                    }
                    v
                };
                [leg(0), leg(1), dn[l].to_complex()]
            }))
        }
    }
}

fn north_jacobian(n: &Vec3R, dn: &[Vec3R; 3]) -> [[Vec3R; 3]; 3] {
    let d = 1.0 - n[2];
    let v = *n - unit_axis(2);
    let f = [n[0] / d, n[1] / d];
    [0, 1, 2].map(|l| {
        let df = [0, 1].map(|i| dn[l][i] / d + n[i] * dn[l][2] / (d * d));
        let d1 = v.scale(df[0]) + dn[l].scale(f[0]);
        let d2 = -(v.scale(df[1]) + dn[l].scale(f[1]));
        [d1, d2, dn[l]]
    })
}

/// The weighted triad `e_μ = |k|^s E_μ` and its dual `e^μ = |k|^{−s} E^μ`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledTriad {
    /// Columns `e_μ`.
    pub legs: Mat3C,
    /// Rows `e^μ`.
    pub duals: Mat3C,
}

impl ScaledTriad {
    /// Gram matrix `g_{μν} = e_μ† e_ν` (real gauges: `e_μ · e_ν`).
    pub fn metric(&self) -> Mat3C {
        self.legs.adjoint() * self.legs
    }
}

pub fn scaled_triad(f: &Frame, s: f64) -> ScaledTriad {
    let w = f.base.norm().powf(s);
    ScaledTriad {
        legs: f.matrix().scale_re(w),
        duals: f.inverse().scale_re(1.0 / w),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pt(x: f64, y: f64, z: f64) -> MomentumPoint {
        MomentumPoint::new(Vec3R::new(x, y, z)).unwrap()
    }

    fn assert_vec(v: &Vec3C, want: [f64; 3], tol: f64) {
        for i in 0..3 {
            assert!((v[i] - C64::new(want[i], 0.0)).norm() < tol, "{v:?} vs {want:?}");
        }
    }

    #[test]
    fn stereo_examples() {
        let s = to_stereo(&pt(1.0, 0.0, 0.0)).unwrap();
        assert_eq!((s.xi, s.eta, s.zeta), (1.0, 0.0, 1.0));
        let s = to_stereo(&pt(0.0, 0.0, -1.0)).unwrap();
        assert_eq!((s.xi, s.eta, s.zeta), (0.0, 0.0, 1.0));
        let k = from_stereo(&StereoCoords { xi: 1.0, eta: 0.0, zeta: 1.0 }).unwrap();
        assert_eq!(k.k().0, [1.0, 0.0, 0.0]);
        let k = from_stereo(&StereoCoords { xi: 0.0, eta: 0.0, zeta: 1.0 }).unwrap();
        assert_eq!(k.k().0, [0.0, 0.0, -1.0]);
    }

    #[test]
    fn stereo_domain_errors() {
        assert!(matches!(to_stereo(&pt(0.0, 0.0, 2.0)), Err(Error::OutsideDomain { .. })));
        assert!(from_stereo(&StereoCoords { xi: 0.1, eta: 0.2, zeta: 0.0 }).is_err());
        assert!(from_stereo(&StereoCoords { xi: 0.1, eta: 0.2, zeta: -1.0 }).is_err());
    }

    #[test]
    fn north_frame_examples() {
        let f = frame_stereo_north(&pt(0.0, 0.0, -1.0)).unwrap();
        assert_vec(&f.legs[0], [-1.0, 0.0, 0.0], 1e-15);
        assert_vec(&f.legs[1], [0.0, 1.0, 0.0], 1e-15);
        assert_vec(&f.legs[2], [0.0, 0.0, -1.0], 1e-15);
        let f = frame_stereo_north(&pt(1.0, 0.0, 0.0)).unwrap();
        assert_vec(&f.legs[0], [0.0, 0.0, -1.0], 1e-15);
        assert_vec(&f.legs[1], [0.0, 1.0, 0.0], 1e-15);
        assert_vec(&f.legs[2], [1.0, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn spherical_frame_example() {
        let f = frame_spherical(&pt(1.0, 0.0, 0.0)).unwrap();
        assert_vec(&f.legs[0], [0.0, 0.0, -1.0], 1e-15);
        assert_vec(&f.legs[1], [0.0, 1.0, 0.0], 1e-15);
        assert_vec(&f.legs[2], [1.0, 0.0, 0.0], 1e-15);
        assert!(frame_spherical(&pt(0.0, 0.0, -1.0)).is_err());
    }

    #[test]
    fn north_triad_matches_cartesian_natural_basis() {
        // E₁ = −∂_ξ/(|k|−k₃), E₂ = ∂_η/(|k|−k₃), with ∂_ξ, ∂_η in Cartesian form
        let k = pt(0.4, -1.3, 0.2);
        let [k1, k2, k3] = k.k().0;
        let r = k.norm();
        let d = r - k3;
        let dxi = Vec3R::new(r * d - k1 * k1, -k1 * k2, k1 * d).scale(1.0 / r);
        let deta = Vec3R::new(-k1 * k2, r * d - k2 * k2, k2 * d).scale(1.0 / r);
        let f = frame_stereo_north(&k).unwrap();
        assert_vec(&f.legs[0], dxi.scale(-1.0 / d).0, 1e-14);
        assert_vec(&f.legs[1], deta.scale(1.0 / d).0, 1e-14);
        let [e1, e2] = north_legs(&k.unit());
        assert_vec(&f.legs[0], e1.0, 1e-14);
        assert_vec(&f.legs[1], e2.0, 1e-14);
    }

    #[test]
    fn rotation_quarter_turn_and_identity() {
        let f = frame_stereo_north(&pt(0.3, 0.5, -0.2)).unwrap();
        let g = frame_rotate(&f, 1.0, 0.0).unwrap();
        assert_eq!(g.legs, f.legs);
        let g = frame_rotate(&f, 0.0, 1.0).unwrap();
        assert_eq!(g.legs[0], -f.legs[1]);
        assert_eq!(g.legs[1], f.legs[0]);
        assert!(frame_rotate(&f, 1.0, 0.1).is_err());
    }

    #[test]
    fn spherical_is_north_rotated_by_phi() {
        let k = pt(-0.7, 0.9, 0.4);
        let (_, phi) = k.angles();
        let rot = frame_rotate(&frame_stereo_north(&k).unwrap(), phi.cos(), phi.sin()).unwrap();
        let sph = frame_spherical(&k).unwrap();
        for mu in 0..3 {
            assert!((rot.legs[mu] - sph.legs[mu]).max_abs() < 1e-14);
        }
    }

    #[test]
    fn south_is_north_rotated_by_two_phi() {
        let k = pt(0.2, -0.6, -0.5);
        let (_, phi) = k.angles();
        let rot = frame_rotate(&frame_stereo_north(&k).unwrap(), (2.0 * phi).cos(), (2.0 * phi).sin()).unwrap();
        let south = frame_stereo_south(&k).unwrap();
        for mu in 0..3 {
            assert!((rot.legs[mu] - south.legs[mu]).max_abs() < 1e-14);
        }
        // regular at the north pole
        let f = frame_stereo_south(&pt(0.0, 0.0, 3.0)).unwrap();
        assert_vec(&f.legs[0], [1.0, 0.0, 0.0], 1e-15);
        assert_vec(&f.legs[1], [0.0, 1.0, 0.0], 1e-15);
    }

    #[test]
    fn unitary_identity_and_phase() {
        let f = frame_stereo_north(&pt(0.3, 0.5, -0.2)).unwrap();
        let g = frame_unitary(&f, &Mat2C::identity()).unwrap();
        assert_eq!(g.legs, f.legs);
        let beta = 0.7;
        let ph = C64::from_polar(1.0, beta);
        let g = frame_unitary(&f, &Mat2C::diag(ph, ph)).unwrap();
        assert!((g.legs[0] - f.legs[0].scale(ph)).max_abs() < 1e-15);
        assert!((g.legs[1] - f.legs[1].scale(ph)).max_abs() < 1e-15);
        assert_eq!(g.legs[2], f.legs[2]);
        let bad = Mat2C::diag(C64::new(2.0, 0.0), ONE);
        assert!(frame_unitary(&f, &bad).is_err());
    }

    #[test]
    fn unitary_mixing_reduces_to_rotation() {
        let alpha: f64 = 0.4;
        let u = unitary_mixing(alpha, 0.0, 0.0, 0.0);
        let f = frame_stereo_north(&pt(0.3, 0.5, -0.2)).unwrap();
        let a = frame_unitary(&f, &u).unwrap();
        let b = frame_rotate(&f, alpha.cos(), alpha.sin()).unwrap();
        for mu in 0..3 {
            assert!((a.legs[mu] - b.legs[mu]).max_abs() < 1e-15);
        }
        assert!(unitary_mixing(0.3, -1.2, 0.8, 2.1).unitarity_defect() < 1e-15);
    }

    #[test]
    fn scaled_triad_examples() {
        let k = pt(0.0, 4.0 * 0.6, -4.0 * 0.8);
        let f = frame_stereo_north(&k).unwrap();
        let t = scaled_triad(&f, 0.0);
        assert!((t.legs - f.matrix()).max_abs() < 1e-15);
        let t = scaled_triad(&f, 0.5);
        assert!((t.legs - f.matrix().scale_re(2.0)).max_abs() < 1e-14);
        assert!((t.duals * t.legs - Mat3C::identity()).max_abs() < 1e-14);
        let g = t.metric().scale_re(4f64.powf(-1.0));
        assert!((g - Mat3C::identity()).max_abs() < 1e-14);
    }

    #[test]
    fn excluded_sets() {
        let up = Vec3R::new(0.0, 0.0, 1.0);
        let down = Vec3R::new(0.0, 0.0, -1.0);
        assert!(!Gauge::StereoNorth.contains(&up));
        assert!(Gauge::StereoNorth.contains(&down));
        assert!(Gauge::StereoSouth.contains(&up));
        assert!(!Gauge::StereoSouth.contains(&down));
        assert!(!Gauge::Spherical.contains(&up));
        assert!(!Gauge::Spherical.contains(&down));
        // inside the exclusion tube
        assert!(!Gauge::StereoNorth.contains(&Vec3R::new(1e-10, 0.0, 1.0)));
        assert!(Gauge::StereoNorth.contains(&Vec3R::new(1e-8, 0.0, 1.0)));
    }

    #[test]
    fn angles_on_axis() {
        let (t, p) = pt(0.0, 0.0, -2.0).angles();
        assert_eq!((t, p), (PI, 0.0));
    }

    #[test]
    fn jacobians_match_differences() {
        let fields = [
            Gauge::StereoNorth,
            Gauge::Spherical,
            Gauge::StereoSouth,
            Gauge::general_rotation(FnField::new(|k: &Vec3R| 0.3 * k[0] * k[2] + k[1].sin())),
            Gauge::unitary_rotation(
                FnField::new(|k: &Vec3R| 0.2 * k[1]),
                FnField::new(|k: &Vec3R| k[0] * k[1]),
                FnField::new(|k: &Vec3R| 0.5 * k[2]),
                FnField::new(|k: &Vec3R| (k[0] + k[2]).cos()),
            ),
        ];
        let k = pt(0.8, -0.5, -0.3);
        for g in &fields {
            let jac = frame_jacobian(&k, g).unwrap();
            let h = diff::default_step(k.k());
            for l in 0..3 {
                let fd: [Vec3C; 3] = diff::partial(
                    |p: &Vec3R| frame(&MomentumPoint::new(*p)?, g).map(|f| f.legs),
                    k.k(),
                    l,
                    h,
                )
                .unwrap();
                for mu in 0..3 {
                    assert!((fd[mu] - jac[l][mu]).max_abs() < 1e-8, "{g:?} l={l} mu={mu}");
                }
            }
        }
    }
}
