//! Gamma functions with complex argument.

use statrs::function::gamma::{gamma, gamma_ur};

use crate::algebra::C64;

/// `Γ(a)` for real `a > 0`.
pub fn gamma_fn(a: f64) -> f64 {
    gamma(a)
}

/// Real upper incomplete gamma `Γ(a, x)`, `x ≥ 0`.
pub fn upper_gamma_real(a: f64, x: f64) -> f64 {
    gamma_ur(a, x) * gamma(a)
}

/// Upper incomplete gamma `Γ(a, w)` for real `a > 0` and `Re w ≥ 0`,
/// principal branch.
///
/// Uses the power series of the lower function for small `|w|` and a
/// continued fraction (modified Lentz) otherwise.
pub fn upper_gamma(a: f64, w: C64) -> C64 {
    if w.norm() == 0.0 {
        return C64::new(gamma(a), 0.0);
    }
    let prefactor = (w.ln() * a - w).exp();
    if w.norm() < a + 1.0 {
        // γ(a, w) = e^{−w} w^a Σ w^n / (a (a+1) … (a+n))
        let mut term = C64::new(1.0 / a, 0.0);
        let mut sum = term;
        for n in 1..500 {
            term *= w / (a + n as f64);
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        return C64::new(gamma(a), 0.0) - prefactor * sum;
    }
    let tiny = 1e-300;
    let mut b = w + 1.0 - a;
    let mut c = C64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..2000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = b + d * an;
        if d.norm() < tiny {
            d = C64::new(tiny, 0.0);
        }
        c = b + c.inv() * an;
        if c.norm() < tiny {
            c = C64::new(tiny, 0.0);
        }
        d = d.inv();
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    prefactor * h
}

/// `∫₀^T k^{a−1} e^{−zk} dk = z^{−a}(Γ(a) − Γ(a, zT))` for `Re z > 0`;
/// `T = ∞` when `upper` is `None`.
pub fn damped_power_integral(a: f64, z: C64, upper: Option<f64>) -> C64 {
    let full = (-z.ln() * a).exp() * gamma(a);
    match upper {
        None => full,
        Some(t) => full - (-z.ln() * a).exp() * upper_gamma(a, z * t),
    }
}
