//! Connection matrices `Γ_l`, their closed forms, torsion and curvature.
//!
//! The connection is `D_l = ∂_l + Γ_l` with
//! `Γ_l = −(∂_l 𝐞) 𝐞^{−1}`, where `𝐞` has the weighted legs `|k|^s E_μ` as
//! columns. It annihilates every weighted leg, hence is flat.

use crate::algebra::{delta, helicity, k_cross_spin, levi_civita, Mat2C, Mat3C, Vec3C, Vec3R, C64, I};
use crate::diff;
use crate::error::{Error, Result};
use crate::geometry::{frame, DELTA_CUT, frame_jacobian, unitary_mixing, Gauge, MomentumPoint, ScalarField, UnitaryAngles};
use crate::section::{Differentiation, WaveSection};

/// Weight `s` and gauge defining a connection.
#[derive(Debug, Clone)]
pub struct ConnectionParams {
    pub s: f64,
    pub gauge: Gauge,
}

impl ConnectionParams {
    pub fn new(s: f64, gauge: Gauge) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidInput(format!("s must be finite, got {s}")));
        }
        Ok(ConnectionParams { s, gauge })
    }
}

/// The three matrices `Γ_1, Γ_2, Γ_3` at a point.
#[derive(Debug, Clone, Copy)]
pub struct GammaMatrices {
    pub base: MomentumPoint,
    pub gamma: [Mat3C; 3],
}

impl GammaMatrices {
    pub fn max_abs_diff(&self, other: &GammaMatrices) -> f64 {
        (0..3)
            .map(|l| (self.gamma[l] - other.gamma[l]).max_abs())
            .fold(0.0, f64::max)
    }

    /// `Γ_{jml} = (Γ_l)_{jm}`.
    pub fn coefficient(&self, j: usize, m: usize, l: usize) -> C64 {
        self.gamma[l][(j, m)]
    }
}

fn check_stencil(k: &Vec3R, h: f64, gauge: &Gauge) -> Result<()> {
    // distance to the excluded set is convex along each stencil segment
    let set = gauge.excluded();
    let tube = DELTA_CUT * k.norm();
    for l in 0..3 {
        let e = Vec3R::axis(l);
        let dist = |t: f64| set.distance(&(*k + e.scale(t)));
        let (mut a, mut b) = (-h, h);
        for _ in 0..80 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if dist(m1) < dist(m2) {
                b = m2;
            } else {
                a = m1;
            }
        }
        if dist(0.5 * (a + b)).min(dist(-h)).min(dist(h)) <= tube {
            return Err(Error::StencilOutsideDomain {
                gauge: gauge.name().to_string(),
                k: *k,
                step: h,
            });
        }
    }
    Ok(())
}

/// `Γ_l = −(∂_l 𝐞)𝐞^{−1}` for an arbitrary weighted-triad field `𝐞(k)`
/// (columns are the weighted legs), by extrapolated central differences.
pub fn gamma_from_triad_field(
    k: &MomentumPoint,
    triad: impl Fn(&Vec3R) -> Result<Mat3C>,
    inverse: &Mat3C,
    h: f64,
) -> Result<GammaMatrices> {
    let d = diff::gradient(&triad, k.k(), h)?;
    let gamma = d.map(|dl| -(dl * *inverse));
    if gamma.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("connection matrices".into()));
    }
    Ok(GammaMatrices { base: *k, gamma })
}

/// `Γ_{jnl} = −e^μ_n ∂_l e_{μj}` with the weighted triad differenced numerically.
pub fn gamma_from_frame(k: &MomentumPoint, params: &ConnectionParams, h: Option<f64>) -> Result<GammaMatrices> {
    let g = &params.gauge;
    g.check(k.k())?;
    let h = h.unwrap_or_else(|| diff::default_step(k.k()));
    check_stencil(k.k(), h, g)?;
    let s = params.s;
    let weighted = |p: &Vec3R| -> Result<Mat3C> {
        let f = frame(&MomentumPoint::new(*p)?, g)?;
        Ok(f.matrix().scale_re(p.norm().powf(s)))
    };
    let inv = frame(k, g)?.inverse().scale_re(k.norm().powf(-s));
    gamma_from_triad_field(k, weighted, &inv, h)
}

/// `Γ_l = −s k_l/|k|² 1 − (∂_l E)E†` from the analytic frame Jacobian.
pub fn gamma_from_jacobian(k: &MomentumPoint, params: &ConnectionParams) -> Result<GammaMatrices> {
    let g = &params.gauge;
    let inv = frame(k, g)?.inverse();
    let jac = frame_jacobian(k, g)?;
    let r2 = k.k().norm_sqr();
    let gamma = [0, 1, 2].map(|l| {
        Mat3C::identity().scale_re(-params.s * k.k()[l] / r2) - Mat3C::from_columns(jac[l]) * inv
    });
    Ok(GammaMatrices { base: *k, gamma })
}

/// `iA_l` of the north-pole gauge rotated by `α`, given the Σ coefficient `c`.
fn i_a_real(k: &Vec3R, sigma: &Mat3C, c: &Vec3R, l: usize) -> Mat3C {
    k_cross_spin(k, l).scale_re(1.0 / k.norm_sqr()) + sigma.scale_re(c[l])
}

fn assemble(k: &MomentumPoint, s: f64, i_a: [Mat3C; 3]) -> GammaMatrices {
    let r2 = k.k().norm_sqr();
    let gamma = [0, 1, 2].map(|l| Mat3C::identity().scale_re(-s * k.k()[l] / r2) + i_a[l].scale(-I));
    GammaMatrices { base: *k, gamma }
}

/// Closed form `Γ_l = −s k_l/|k|² 1 + A_l` with
/// `iA_l = (k×S)_l/|k|² + c_l Σ` and `c` from [`Gauge::sigma_coefficient`].
/// Unitary gauges are delegated to [`gamma_unitary`].
pub fn gamma_closed_form(k: &MomentumPoint, params: &ConnectionParams) -> Result<GammaMatrices> {
    if let Gauge::UnitaryRotation(angles) = &params.gauge {
        return gamma_unitary(k, params.s, angles);
    }
    let c = params.gauge.sigma_coefficient(k.k())?;
    let sigma = helicity(k.k())?;
    Ok(assemble(k, params.s, [0, 1, 2].map(|l| i_a_real(k.k(), &sigma, &c, l))))
}

/// `R_j = E⊥ σ_j E⊥ᵀ` for `j = 0..3`, with `E⊥ = [E₁ E₂]` of the north-pole triad.
pub fn r_matrices(k: &MomentumPoint) -> Result<[Mat3C; 4]> {
    let f = frame(k, &Gauge::StereoNorth)?;
    let [e1, e2, _] = f.legs;
    Ok([0, 1, 2, 3].map(|j| {
        let p = Mat2C::pauli(j).0;
        Mat3C::from_fn(|r, c| {
            p[0][0] * e1[r] * e1[c] + p[0][1] * e1[r] * e2[c] + p[1][0] * e2[r] * e1[c] + p[1][1] * e2[r] * e2[c]
        })
    }))
}

/// Pauli coefficients `m_j` of `U⊥ ∂_l U⊥† / i = Σ_j m_j σ_j`, for each `l`.
pub fn mixing_coefficients(angles: &UnitaryAngles, k: &Vec3R) -> [[f64; 4]; 3] {
    let [alpha, _, psi, _] = angles.values(k);
    let [da, db, dp, dd] = angles.gradients(k);
    let (s2a, c2a) = (2.0 * alpha).sin_cos();
    let (s2p, c2p) = (2.0 * psi).sin_cos();
    [0, 1, 2].map(|l| {
        [
            -db[l],
            c2p * s2a * dd[l] - s2p * da[l],
            -s2p * s2a * dd[l] - c2p * da[l],
            -c2a * dd[l] - dp[l],
        ]
    })
}

/// Closed form for the unitary gauge `E′ = E U`:
/// `iA′_l = iA_l − Σ_j m_j R_j` on top of the north-pole gauge.
pub fn gamma_unitary(k: &MomentumPoint, s: f64, angles: &UnitaryAngles) -> Result<GammaMatrices> {
    Gauge::StereoNorth.check(k.k())?;
    let c = Gauge::StereoNorth.sigma_coefficient(k.k())?;
    let sigma = helicity(k.k())?;
    let r = r_matrices(k)?;
    let m = mixing_coefficients(angles, k.k());
    let i_a = [0, 1, 2].map(|l| {
        let mut a = i_a_real(k.k(), &sigma, &c, l);
        for j in 0..4 {
            a = a - r[j].scale_re(m[l][j]);
        }
        a
    });
    Ok(assemble(k, s, i_a))
}

/// `U⊥ ∂_l U⊥†` evaluated directly from the mixing matrix.
pub fn mixing_generator(angles: &UnitaryAngles, k: &Vec3R, l: usize) -> Mat2C {
    let u = |p: &Vec3R| {
        let [a, b, c, d] = angles.values(p);
        unitary_mixing(a, b, c, d)
    };
    let h = diff::default_step(k);
    let e = Vec3R::axis(l);
    let central = |t: f64| {
        let up = u(&(*k + e.scale(t))).0;
        let um = u(&(*k - e.scale(t))).0;
        Mat2C([0, 1].map(|i| [0, 1].map(|j| (up[i][j] - um[i][j]) / (2.0 * t))))
    };
    let (c1, c2) = (central(h), central(0.5 * h));
    let du = Mat2C([0, 1].map(|i| [0, 1].map(|j| (c2.0[i][j] * 4.0 - c1.0[i][j]) / 3.0)));
    u(k) * du.adjoint()
}

/// Rank-3 torsion `Q_{jml} = Γ_{jml} − Γ_{jlm}`, stored as `q[j][m][l]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorsionTensor {
    pub q: [[[f64; 3]; 3]; 3],
}

impl TorsionTensor {
    pub fn get(&self, j: usize, m: usize, l: usize) -> f64 {
        self.q[j][m][l]
    }

    pub fn max_abs(&self) -> f64 {
        self.q.iter().flatten().flatten().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `max |Q_{jml} + Q_{jlm}|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..3 {
            for m in 0..3 {
                for l in 0..3 {
                    worst = worst.max((self.q[j][m][l] + self.q[j][l][m]).abs());
                }
            }
        }
        worst
    }
}

/// Real coefficients `Γ_{jml}` of the rotated north-pole gauge with `∇α = grad`.
pub fn gamma_coefficients(k: &Vec3R, s: f64, grad: &Vec3R) -> [[[f64; 3]; 3]; 3] {
    let r = k.norm();
    let r2 = r * r;
    let mut g = [[[0.0; 3]; 3]; 3];
    for j in 0..3 {
        for m in 0..3 {
            for l in 0..3 {
                let mut acc = s * delta(j, m) * k[l] - delta(m, l) * k[j] + delta(j, l) * k[m];
                for rr in 0..3 {
                    let e = levi_civita(rr, j, m);
                    if e == 0.0 {
                        continue;
                    }
                    for p in 0..3 {
                        acc += e * levi_civita(l, p, 2) * k[p] * k[rr] / (r - k[2]);
                    }
                    acc += r * e * k[rr] * grad[l];
                }
                g[j][m][l] = -acc / r2;
            }
        }
    }
    g
}

/// Torsion for the gauge rotated by `α` from the north-pole triad.
pub fn torsion(k: &MomentumPoint, s: f64, alpha: &dyn ScalarField) -> Result<TorsionTensor> {
    Gauge::StereoNorth.check(k.k())?;
    Ok(torsion_with_gradient(k.k(), s, &alpha.gradient(k.k())))
}

pub fn torsion_with_gradient(k: &Vec3R, s: f64, grad: &Vec3R) -> TorsionTensor {
    let g = gamma_coefficients(k, s, grad);
    let mut q = [[[0.0; 3]; 3]; 3];
    for j in 0..3 {
        for m in 0..3 {
            for l in 0..3 {
                q[j][m][l] = g[j][m][l] - g[j][l][m];
            }
        }
    }
    TorsionTensor { q }
}

/// Values of `∂_1 α` forced by `Q_{112} = 0` and by `Q_{113} = 0`, and of
/// `∂_2 α` forced by `Q_{221} = 0`. The bare `k` in the denominators is `|k|`.
pub fn torsion_free_conditions(k: &Vec3R, s: f64) -> [f64; 3] {
    let r = k.norm();
    let [k1, k2, k3] = k.0;
    [
        (s - 1.0) * k2 / (r * k3) - k2 / (r * (r - k3)),
        (1.0 - s) * k3 / (r * k2) - k2 / (r * (r - k3)),
        (1.0 - s) * k1 / (r * k3) + k1 / (r * (r - k3)),
    ]
}

/// Curvature `R_{lm} = ∂_lΓ_m − ∂_mΓ_l + [Γ_l, Γ_m]` of a matrix field.
pub fn curvature_of(
    k: &Vec3R,
    gamma: impl Fn(&Vec3R) -> Result<[Mat3C; 3]>,
    h: f64,
) -> Result<[[Mat3C; 3]; 3]> {
    let g0 = gamma(k)?;
    let d = diff::gradient(&gamma, k, h)?; // d[l][m] = ∂_l Γ_m
    Ok([0, 1, 2].map(|l| [0, 1, 2].map(|m| d[l][m] - d[m][l] + g0[l].commutator(&g0[m]))))
}

/// Max entry of the curvature of the closed-form connection.
pub fn curvature_residual(k: &MomentumPoint, params: &ConnectionParams, h: Option<f64>) -> Result<f64> {
    let h = h.unwrap_or_else(|| diff::default_step(k.k()));
    check_stencil(k.k(), h, &params.gauge)?;
    let r = curvature_of(
        k.k(),
        |p| Ok(gamma_closed_form(&MomentumPoint::new(*p)?, params)?.gamma),
        h,
    )?;
    Ok(r.iter().flatten().fold(0.0, |a, m| a.max(m.max_abs())))
}

/// `(D_lΨ)(k) = ∂_lΨ + Γ_lΨ`.
pub fn covariant_derivative(
    section: &WaveSection,
    k: &MomentumPoint,
    l: usize,
    params: &ConnectionParams,
    mode: Differentiation,
) -> Result<Vec3C> {
    let g = gamma_closed_form(k, params)?;
    Ok(section.partial(k.k(), l, mode)? + g.gamma[l].mul_vec(&section.value(k.k())?))
}
