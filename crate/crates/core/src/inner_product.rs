//! Weighted scalar products `⟨Φ|Ψ⟩_s = ∫ d³k/(2π)³ |k|^{−2s} Φ†Ψ` and the
//! anti-Hermiticity check for the covariant derivative.

use std::f64::consts::PI;

use crate::algebra::{Vec3R, C64};
use crate::connection::{covariant_derivative, ConnectionParams};
use crate::error::{Error, Result};
use crate::quadrature::{cubature, gauss_legendre, Estimate, Integrable, Tolerance};
use crate::section::{Box3, Differentiation, WaveSection};

/// Floor for denominators of relative residuals.
pub const EPS_FLOOR: f64 = 1e-300;

/// Integration scheme for momentum-space integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Adaptive Genz–Malik cubature over `region`, or over the intersection
    /// of the sections' declared supports when `region` is `None`.
    Adaptive { region: Option<Box3> },
    /// Gauss–Legendre product rule in `(|k|, θ, φ)` on a spherical shell.
    /// The error estimate compares against the rule with half the nodes.
    SphericalProduct {
        r_min: f64,
        r_max: f64,
        n_r: usize,
        n_theta: usize,
        n_phi: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    pub tolerance: Tolerance,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            scheme: Scheme::Adaptive { region: None },
            tolerance: Tolerance::default(),
        }
    }
}

fn product_rule<T: Integrable>(
    f: &(impl Fn(&Vec3R) -> Result<T> + Sync),
    r_min: f64,
    r_max: f64,
    n: [usize; 3],
) -> Result<T> {
    let (xr, wr) = gauss_legendre(n[0]);
    let (xt, wt) = gauss_legendre(n[1]);
    let (xp, wp) = gauss_legendre(n[2]);
    let (cr, hr) = (0.5 * (r_min + r_max), 0.5 * (r_max - r_min));
    let mut acc = T::zero();
    for (a, wa) in xr.iter().zip(&wr) {
        let r = cr + hr * a;
        for (b, wb) in xt.iter().zip(&wt) {
            let theta = 0.5 * PI * (1.0 + b);
            let (st, ct) = theta.sin_cos();
            for (c, wc) in xp.iter().zip(&wp) {
                let phi = PI * (1.0 + c);
                let k = Vec3R::new(r * st * phi.cos(), r * st * phi.sin(), r * ct);
                let w = wa * hr * wb * 0.5 * PI * wc * PI * r * r * st;
                acc = acc.add(&f(&k)?.scale(w));
            }
        }
    }
    Ok(acc)
}

/// Integrates `f` over momentum space per `q`, with the region fallback `support`.
pub fn integrate_momentum<T: Integrable>(
    f: impl Fn(&Vec3R) -> Result<T> + Sync,
    support: Option<Box3>,
    q: &QuadratureSpec,
) -> Result<Estimate<T>> {
    match q.scheme {
        Scheme::Adaptive { region } => {
            let region = region.or(support).ok_or_else(|| {
                Error::InvalidInput("adaptive quadrature needs a region or sections with declared support".into())
            })?;
            cubature(f, &region, &q.tolerance)
        }
        Scheme::SphericalProduct {
            r_min,
            r_max,
            n_r,
            n_theta,
            n_phi,
        } => {
            if !(0.0 <= r_min && r_min < r_max) || n_r < 2 || n_theta < 2 || n_phi < 2 {
                return Err(Error::InvalidInput("bad spherical product rule".into()));
            }
            let fine = product_rule(&f, r_min, r_max, [n_r, n_theta, n_phi])?;
            let coarse = product_rule(&f, r_min, r_max, [n_r / 2, n_theta / 2, n_phi / 2])?;
            let error = fine.add(&coarse.scale(-1.0)).norm();
            let evaluations = n_r * n_theta * n_phi + (n_r / 2) * (n_theta / 2) * (n_phi / 2);
            if error > q.tolerance.abs.max(q.tolerance.rel * fine.norm()) {
                return Err(Error::QuadratureNotConverged {
                    estimate: fine.norm(),
                    error,
                    evaluations,
                });
            }
            Ok(Estimate {
                value: fine,
                error,
                evaluations,
            })
        }
    }
}

/// Intersection of the declared supports; `None` when they are disjoint.
fn joint_support(phi: &WaveSection, psi: &WaveSection) -> Option<Option<Box3>> {
    match (phi.support(), psi.support()) {
        (Some(a), Some(b)) => a.intersect(&b).map(Some),
        (a, b) => Some(a.or(b)),
    }
}

fn weight(k: &Vec3R, s: f64) -> f64 {
    k.norm().powf(-2.0 * s) / (2.0 * PI).powi(3)
}

/// `⟨Φ|Ψ⟩_s` with weight `|k|^{−2s}/(2π)³`.
pub fn weighted_inner(phi: &WaveSection, psi: &WaveSection, s: f64, q: &QuadratureSpec) -> Result<Estimate<C64>> {
    let Some(support) = joint_support(phi, psi) else {
        if matches!(q.scheme, Scheme::Adaptive { region: None }) {
            return Ok(Estimate {
                value: C64::new(0.0, 0.0),
                error: 0.0,
                evaluations: 0,
            });
        }
        return weighted_inner_in(phi, psi, s, None, q);
    };
    weighted_inner_in(phi, psi, s, support, q)
}

fn weighted_inner_in(
    phi: &WaveSection,
    psi: &WaveSection,
    s: f64,
    support: Option<Box3>,
    q: &QuadratureSpec,
) -> Result<Estimate<C64>> {
    integrate_momentum(
        |k| Ok(phi.value(k)?.inner(&psi.value(k)?) * weight(k, s)),
        support,
        q,
    )
}

/// The Białynicki-Birula product, `s = 1/2`.
pub fn bb_inner(phi: &WaveSection, psi: &WaveSection, q: &QuadratureSpec) -> Result<Estimate<C64>> {
    weighted_inner(phi, psi, 0.5, q)
}

/// Result of an anti-Hermiticity check.
#[derive(Debug, Clone, Copy)]
pub struct AntiHermiticity {
    /// `(⟨Φ|D_lΨ⟩)* + ⟨Ψ|D_lΦ⟩`.
    pub residual: C64,
    /// `⟨Φ|D_lΨ⟩`.
    pub reference: C64,
    pub error: f64,
    pub evaluations: usize,
}

impl AntiHermiticity {
    pub fn relative(&self) -> f64 {
        self.residual.norm() / (self.reference.norm() + EPS_FLOOR)
    }
}

/// Anti-Hermiticity residual with the weight matching `params.s`.
pub fn antihermiticity_residual(
    phi: &WaveSection,
    psi: &WaveSection,
    l: usize,
    params: &ConnectionParams,
    q: &QuadratureSpec,
) -> Result<AntiHermiticity> {
    antihermiticity_residual_weighted(phi, psi, l, params, params.s, q)
}

/// As [`antihermiticity_residual`] but with an independent weight exponent.
pub fn antihermiticity_residual_weighted(
    phi: &WaveSection,
    psi: &WaveSection,
    l: usize,
    params: &ConnectionParams,
    weight_s: f64,
    q: &QuadratureSpec,
) -> Result<AntiHermiticity> {
    let support = joint_support(phi, psi).ok_or_else(|| {
        Error::InvalidInput("sections have disjoint supports; the residual is trivially zero".into())
    })?;
    let integrand = |k: &Vec3R| -> Result<[C64; 2]> {
        let p = crate::geometry::MomentumPoint::in_gauge(*k, &params.gauge)?;
        let w = weight(k, weight_s);
        let (f, g) = (phi.value(k)?, psi.value(k)?);
        let dg = covariant_derivative(psi, &p, l, params, Differentiation::Auto)?;
        let df = covariant_derivative(phi, &p, l, params, Differentiation::Auto)?;
        let a = f.inner(&dg);
        let b = g.inner(&df);
        Ok([(a.conj() + b) * w, a * w])
    };
    let est = integrate_momentum(integrand, support, q)?;
    Ok(AntiHermiticity {
        residual: est.value[0],
        reference: est.value[1],
        error: est.error,
        evaluations: est.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Vec3C;
    use crate::geometry::Gauge;
    use crate::section::gaussian_bump;

    fn bump(c: Vec3R, w: f64) -> WaveSection {
        let v = Vec3C::new(C64::new(0.4, 0.3), C64::new(-0.2, 1.0), C64::new(0.6, 0.1));
        gaussian_bump(c, v, w).unwrap()
    }

    fn loose() -> QuadratureSpec {
        QuadratureSpec {
            tolerance: Tolerance::new(1e-300, 1e-7, 5_000_000).unwrap(),
            ..Default::default()
        }
    }

    #[test]
    fn norm_is_positive_and_conjugate_symmetric() {
        let a = bump(Vec3R::new(1.0, 0.5, -1.5), 0.4);
        let b = bump(Vec3R::new(1.2, 0.4, -1.3), 0.35);
        let q = loose();
        let n = bb_inner(&a, &a, &q).unwrap().value;
        assert!(n.re > 0.0 && n.im.abs() < 1e-8 * n.re);
        let ab = bb_inner(&a, &b, &q).unwrap().value;
        let ba = bb_inner(&b, &a, &q).unwrap().value;
        assert!((ab - ba.conj()).norm() < 1e-6 * ab.norm());
    }

    #[test]
    fn product_rule_agrees_with_cubature() {
        let a = bump(Vec3R::new(0.0, 0.0, -2.0), 0.3);
        let adaptive = bb_inner(&a, &a, &loose()).unwrap().value;
        let q = QuadratureSpec {
            scheme: Scheme::SphericalProduct {
                r_min: 0.1,
                r_max: 4.0,
                n_r: 80,
                n_theta: 80,
                n_phi: 24,
            },
            tolerance: Tolerance::new(1e-300, 1e-6, 0).unwrap(),
        };
        let product = bb_inner(&a, &a, &q).unwrap().value;
        assert!((adaptive - product).norm() < 1e-6 * adaptive.norm());
    }

    #[test]
    fn disjoint_supports_give_zero() {
        let a = bump(Vec3R::new(5.0, 0.0, 0.0), 0.1);
        let b = bump(Vec3R::new(-5.0, 0.0, 0.0), 0.1);
        assert_eq!(bb_inner(&a, &b, &loose()).unwrap().value, C64::new(0.0, 0.0));
    }

    #[test]
    fn anti_hermitian_with_matched_weight_only() {
        let a = bump(Vec3R::new(1.0, 0.5, -1.5), 0.4);
        let b = bump(Vec3R::new(1.2, 0.4, -1.3), 0.35);
        let p = ConnectionParams::new(0.5, Gauge::StereoNorth).unwrap();
        let r = antihermiticity_residual(&a, &b, 0, &p, &loose()).unwrap();
        assert!(r.relative() < 1e-6, "{}", r.relative());
        let r = antihermiticity_residual_weighted(&a, &b, 0, &p, 0.0, &loose()).unwrap();
        assert!(r.relative() > 1e-3, "{}", r.relative());
    }
}
