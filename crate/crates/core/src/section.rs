//! Complex vector fields over momentum space (photon wave functions).

use std::fmt;
use std::sync::Arc;

use crate::algebra::{transverse_projector, Mat3C, Vec3C, Vec3R, C64};
use crate::diff;
use crate::error::{Error, Result};

type ValueFn = dyn Fn(&Vec3R) -> Result<Vec3C> + Send + Sync;
type JacobianFn = dyn Fn(&Vec3R) -> Result<Mat3C> + Send + Sync;

/// Axis-aligned box `[lo, hi]` in momentum space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3 {
    pub lo: Vec3R,
    pub hi: Vec3R,
}

impl Box3 {
    pub fn new(lo: Vec3R, hi: Vec3R) -> Self {
        Box3 { lo, hi }
    }

    pub fn intersect(&self, o: &Box3) -> Option<Box3> {
        let lo = Vec3R([0, 1, 2].map(|i| self.lo[i].max(o.lo[i])));
        let hi = Vec3R([0, 1, 2].map(|i| self.hi[i].min(o.hi[i])));
        (0..3).all(|i| lo[i] < hi[i]).then_some(Box3 { lo, hi })
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|i| self.hi[i] - self.lo[i]).product()
    }
}

/// How a section's first derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Differentiation {
    /// Analytic Jacobian when attached, finite differences otherwise.
    #[default]
    Auto,
    /// Analytic Jacobian only; sections without one are rejected.
    AnalyticOnly,
    /// Always finite differences, with the given step or the default one.
    FiniteDifference(Option<f64>),
}

/// A complex 3-vector field `Ψ(k)`.
///
/// The Jacobian, when present, returns the matrix with entries
/// `(j, l) = ∂_l Ψ_j`.
#[derive(Clone)]
pub struct WaveSection {
    value: Arc<ValueFn>,
    jacobian: Option<Arc<JacobianFn>>,
    transverse: bool,
    support: Option<Box3>,
}

impl fmt::Debug for WaveSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveSection")
            .field("jacobian", &self.jacobian.is_some())
            .field("transverse", &self.transverse)
            .field("support", &self.support)
            .finish()
    }
}

impl WaveSection {
    pub fn new(value: impl Fn(&Vec3R) -> Result<Vec3C> + Send + Sync + 'static) -> Self {
        WaveSection {
            value: Arc::new(value),
            jacobian: None,
            transverse: false,
            support: None,
        }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&Vec3R) -> Result<Mat3C> + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    /// Claims `k·Ψ(k) = 0`. See [`WaveSection::transversality_defect`].
    pub fn transverse(mut self, claim: bool) -> Self {
        self.transverse = claim;
        self
    }

    /// Declares a box outside which the section is negligible.
    pub fn with_support(mut self, support: Box3) -> Self {
        self.support = Some(support);
        self
    }

    pub fn is_transverse(&self) -> bool {
        self.transverse
    }

    pub fn has_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn support(&self) -> Option<Box3> {
        self.support
    }

    pub fn value(&self, k: &Vec3R) -> Result<Vec3C> {
        let v = (self.value)(k)?;
        if !v.is_finite() {
            return Err(Error::NonFinite("section value".into()));
        }
        Ok(v)
    }

    /// `∂_l Ψ(k)`.
    pub fn partial(&self, k: &Vec3R, l: usize, mode: Differentiation) -> Result<Vec3C> {
        match (mode, &self.jacobian) {
            (Differentiation::Auto | Differentiation::AnalyticOnly, Some(j)) => Ok(j(k)?.column(l)),
            (Differentiation::AnalyticOnly, None) => Err(Error::MissingDerivative),
            (Differentiation::Auto, None) => diff::partial(|p| self.value(p), k, l, diff::default_step(k)),
            (Differentiation::FiniteDifference(h), _) => {
                let h = h.unwrap_or_else(|| diff::default_step(k));
                diff::partial(|p| self.value(p), k, l, h)
            }
        }
    }

    /// Full Jacobian `(j, l) = ∂_l Ψ_j`.
    pub fn jacobian(&self, k: &Vec3R, mode: Differentiation) -> Result<Mat3C> {
        let cols = [
            self.partial(k, 0, mode)?,
            self.partial(k, 1, mode)?,
            self.partial(k, 2, mode)?,
        ];
        Ok(Mat3C::from_columns(cols))
    }

    /// `|k·Ψ(k)| / |Ψ(k)|`; zero where `Ψ` vanishes.
    pub fn transversality_defect(&self, k: &Vec3R) -> Result<f64> {
        let v = self.value(k)?;
        let n = v.norm();
        if n == 0.0 {
            return Ok(0.0);
        }
        Ok(v.dot_real(k).norm() / (n * k.norm()))
    }

    /// `aΦ + bΨ`. Jacobians combine when both are present; transversality
    /// is kept when both claim it.
    pub fn combine(a: C64, phi: &WaveSection, b: C64, psi: &WaveSection) -> WaveSection {
        let (f, g) = (phi.value.clone(), psi.value.clone());
        let mut out = WaveSection::new(move |k| Ok(f(k)?.scale(a) + g(k)?.scale(b)));
        if let (Some(jf), Some(jg)) = (phi.jacobian.clone(), psi.jacobian.clone()) {
            out = out.with_jacobian(move |k| Ok(jf(k)?.scale(a) + jg(k)?.scale(b)));
        }
        out.transverse = phi.transverse && psi.transverse;
        out.support = match (phi.support, psi.support) {
            (Some(p), Some(q)) => Some(Box3::new(
                Vec3R([0, 1, 2].map(|i| p.lo[i].min(q.lo[i]))),
                Vec3R([0, 1, 2].map(|i| p.hi[i].max(q.hi[i]))),
            )),
            _ => None,
        };
        out
    }
}

/// Transverse Gaussian bump `P(k) v exp(−|k − k₀|²/w²)` with analytic Jacobian.
///
/// The declared support is the `6σ` box, `σ = w/√2`.
pub fn gaussian_bump(center: Vec3R, polarization: Vec3C, width: f64) -> Result<WaveSection> {
    if !(width > 0.0) || !center.is_finite() || !polarization.is_finite() {
        return Err(Error::InvalidInput("bump needs a positive width and finite data".into()));
    }
    let w2 = width * width;
    let value = move |k: &Vec3R| -> Result<Vec3C> {
        let d = *k - center;
        let g = (-d.norm_sqr() / w2).exp();
        Ok(transverse_projector(k)?.mul_vec(&polarization).scale_re(g))
    };
    let jacobian = move |k: &Vec3R| -> Result<Mat3C> {
        let d = *k - center;
        let g = (-d.norm_sqr() / w2).exp();
        let p = transverse_projector(k)?;
        let pv = p.mul_vec(&polarization);
        let r2 = k.norm_sqr();
        let kv = polarization.dot_real(k);
        let cols = [0, 1, 2].map(|l| {
            // ∂_l P_ij = −(δ_il k_j + k_i δ_jl)/|k|² + 2 k_i k_j k_l/|k|⁴
            let mut dpv = Vec3C::ZERO;
            for i in 0..3 {
                let mut acc = C64::new(0.0, 0.0);
                if i == l {
                    acc -= kv / r2;
                }
                acc -= polarization[l] * (k[i] / r2);
                acc += kv * (2.0 * k[i] * k[l] / (r2 * r2));
                dpv[i] = acc;
            }
            (dpv - pv.scale_re(2.0 * d[l] / w2)).scale_re(g)
        });
        Ok(Mat3C::from_columns(cols))
    };
    let sigma = width / std::f64::consts::SQRT_2;
    let half = Vec3R::new(6.0 * sigma, 6.0 * sigma, 6.0 * sigma);
    Ok(WaveSection::new(value)
        .with_jacobian(jacobian)
        .transverse(true)
        .with_support(Box3::new(center - half, center + half)))
}
