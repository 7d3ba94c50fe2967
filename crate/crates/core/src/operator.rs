//! The position operator `X̂_l = i(∂_l + Γ_l)` and Pryce's operator.

use std::sync::Arc;

use crate::algebra::{k_cross_spin, Vec3C, Vec3R, C64, I};
use crate::connection::{gamma_closed_form, ConnectionParams};
use crate::diff;
use crate::error::{Error, Result};
use crate::geometry::{frame, frame_jacobian, MomentumPoint};
use crate::section::{Differentiation, WaveSection};

/// A first-order operator acting on sections component by component in `l`.
pub trait PositionOperator: Send + Sync {
    fn name(&self) -> &'static str;

    /// `(X_l Ψ)(k)` with derivatives of `Ψ` taken according to `mode`.
    fn apply_with(&self, section: &WaveSection, k: &MomentumPoint, l: usize, mode: Differentiation)
        -> Result<Vec3C>;
}

/// `X̂_l = i(∂_l + Γ_l)` for a gauge and weight.
#[derive(Debug, Clone)]
pub struct FlatPosition {
    pub params: ConnectionParams,
}

impl PositionOperator for FlatPosition {
    fn name(&self) -> &'static str {
        "flat"
    }

    fn apply_with(&self, section: &WaveSection, k: &MomentumPoint, l: usize, mode: Differentiation) -> Result<Vec3C> {
        apply_position_with(section, k, l, &self.params, mode)
    }
}

/// Pryce's operator, `s = 1/2` and no helicity term.
#[derive(Debug, Clone, Copy, Default)]
pub struct PryceOperator;

impl PositionOperator for PryceOperator {
    fn name(&self) -> &'static str {
        "pryce"
    }

    fn apply_with(&self, section: &WaveSection, k: &MomentumPoint, l: usize, mode: Differentiation) -> Result<Vec3C> {
        pryce_position_with(section, k, l, mode)
    }
}

fn check_axis(l: usize) -> Result<()> {
    if l < 3 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("axis index {l} out of range")))
    }
}

/// `(X_lΨ)(k) = i(∂_lΨ + Γ_lΨ)(k)`.
pub fn apply_position(section: &WaveSection, k: &MomentumPoint, l: usize, params: &ConnectionParams) -> Result<Vec3C> {
    apply_position_with(section, k, l, params, Differentiation::Auto)
}

pub fn apply_position_with(
    section: &WaveSection,
    k: &MomentumPoint,
    l: usize,
    params: &ConnectionParams,
    mode: Differentiation,
) -> Result<Vec3C> {
    check_axis(l)?;
    let g = gamma_closed_form(k, params)?;
    let d = section.partial(k.k(), l, mode)?;
    Ok((d + g.gamma[l].mul_vec(&section.value(k.k())?)).scale(I))
}

/// `(X_lΨ)_j = i e_{μj} ∂_l(e^μ_n Ψ_n)`.
///
/// With [`Differentiation::AnalyticOnly`] the frame and section Jacobians
/// are combined by the product rule; otherwise the scalar components
/// `e^μ·Ψ` are differenced directly.
pub fn apply_position_compact(
    section: &WaveSection,
    k: &MomentumPoint,
    l: usize,
    params: &ConnectionParams,
    mode: Differentiation,
) -> Result<Vec3C> {
    check_axis(l)?;
    let gauge = &params.gauge;
    let s = params.s;
    let f = frame(k, gauge)?;
    let r = k.norm();
    let comps = |p: &Vec3R| -> Result<[C64; 3]> {
        let fp = frame(&MomentumPoint::in_gauge(*p, gauge)?, gauge)?;
        let v = section.value(p)?;
        let w = p.norm().powf(-s);
        Ok([0, 1, 2].map(|mu| fp.legs[mu].inner(&v) * w))
    };
    let dcomp: [C64; 3] = match mode {
        Differentiation::AnalyticOnly => {
            let jac = frame_jacobian(k, gauge)?;
            let v = section.value(k.k())?;
            let dv = section.partial(k.k(), l, mode)?;
            let w = r.powf(-s);
            let dw = -s * k.k()[l] / (r * r) * w;
            [0, 1, 2].map(|mu| {
                let e = f.legs[mu];
                e.inner(&v) * dw + (jac[l][mu].inner(&v) + e.inner(&dv)) * w
            })
        }
        Differentiation::FiniteDifference(Some(h)) => diff::partial(comps, k.k(), l, h)?,
        _ => diff::partial(comps, k.k(), l, diff::default_step(k.k()))?,
    };
    let w = r.powf(s);
    let mut out = Vec3C::ZERO;
    for mu in 0..3 {
        out += f.legs[mu].scale(dcomp[mu] * w);
    }
    Ok(out.scale(I))
}

/// Pryce's operator `iΨ′ − i k_l/(2|k|²)Ψ + (k×S)_lΨ/|k|²`.
pub fn pryce_position(section: &WaveSection, k: &MomentumPoint, l: usize) -> Result<Vec3C> {
    pryce_position_with(section, k, l, Differentiation::Auto)
}

pub fn pryce_position_with(section: &WaveSection, k: &MomentumPoint, l: usize, mode: Differentiation) -> Result<Vec3C> {
    check_axis(l)?;
    let kv = k.k();
    let r2 = kv.norm_sqr();
    let v = section.value(kv)?;
    let d = section.partial(kv, l, mode)?;
    Ok(d.scale(I) - v.scale(I * (0.5 * kv[l] / r2)) + k_cross_spin(kv, l).mul_vec(&v).scale_re(1.0 / r2))
}

/// The naive `iδ_{jn}∂_l`, which does not preserve transversality.
pub fn naive_position(section: &WaveSection, k: &MomentumPoint, l: usize, mode: Differentiation) -> Result<Vec3C> {
    check_axis(l)?;
    Ok(section.partial(k.k(), l, mode)?.scale(I))
}

/// `|k·v| / |v|`, zero for `v = 0`.
pub fn transversality_residual(v: &Vec3C, k: &Vec3R) -> f64 {
    let n = v.norm();
    if n == 0.0 {
        0.0
    } else {
        v.dot_real(k).norm() / n
    }
}

/// The section `k ↦ (X_lΨ)(k)`.
pub fn image_section(
    op: Arc<dyn PositionOperator>,
    section: &WaveSection,
    l: usize,
    inner: Differentiation,
) -> WaveSection {
    let psi = section.clone();
    WaveSection::new(move |p: &Vec3R| op.apply_with(&psi, &MomentumPoint::new(*p)?, l, inner))
        .transverse(section.is_transverse())
}

/// Default outer step for nested differencing, `√h · max(1, |k|)`.
pub fn nested_step(k: &Vec3R) -> f64 {
    diff::default_step(k).sqrt() * k.norm().max(1.0)
}

/// `([X_l, X_m]Ψ)(k)` by nested differencing.
///
/// The inner operator uses `inner`; the outer image is differenced with
/// step `outer` (default [`nested_step`]).
pub fn commutator_residual(
    op: Arc<dyn PositionOperator>,
    section: &WaveSection,
    k: &MomentumPoint,
    l: usize,
    m: usize,
    inner: Differentiation,
    outer: Option<f64>,
) -> Result<Vec3C> {
    check_axis(l)?;
    check_axis(m)?;
    if l == m {
        return Ok(Vec3C::ZERO);
    }
    let h2 = outer.unwrap_or_else(|| nested_step(k.k()));
    let outer_mode = Differentiation::FiniteDifference(Some(h2));
    let xm = image_section(op.clone(), section, m, inner);
    let xl = image_section(op.clone(), section, l, inner);
    let a = op.apply_with(&xm, k, l, outer_mode)?;
    let b = op.apply_with(&xl, k, m, outer_mode)?;
    Ok(a - b)
}
