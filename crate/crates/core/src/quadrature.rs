//! Numerical integration: adaptive Gauss–Kronrod in one dimension, the
//! Genz–Malik degree-7/5 embedded rule for adaptive cubature on boxes, and
//! Gauss–Legendre product rules.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::algebra::{Vec3C, Vec3R, C64};
use crate::error::{Error, Result};
use crate::section::Box3;

/// Values that can be integrated: a real vector space with a norm.
pub trait Integrable: Copy + Send + Sync {
    fn zero() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn scale(&self, s: f64) -> Self;
    fn norm(&self) -> f64;
}

impl Integrable for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl Integrable for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
    fn norm(&self) -> f64 {
        C64::norm(*self)
    }
}

impl Integrable for Vec3C {
    fn zero() -> Self {
        Vec3C::ZERO
    }
    fn add(&self, o: &Self) -> Self {
        *self + *o
    }
    fn scale(&self, s: f64) -> Self {
        self.scale_re(s)
    }
    fn norm(&self) -> f64 {
        Vec3C::norm(self)
    }
}

impl<T: Integrable, const N: usize> Integrable for [T; N] {
    fn zero() -> Self {
        [T::zero(); N]
    }
    fn add(&self, o: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.iter_mut().zip(o) {
            *a = a.add(b);
        }
        out
    }
    fn scale(&self, s: f64) -> Self {
        self.map(|v| v.scale(s))
    }
    fn norm(&self) -> f64 {
        self.iter().map(|v| v.norm().powi(2)).sum::<f64>().sqrt()
    }
}

/// Tolerances and budget for an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_evals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64, max_evals: usize) -> Result<Self> {
        if !(abs > 0.0 && rel > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        Ok(Tolerance { abs, rel, max_evals })
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-300,
            rel: 1e-8,
            max_evals: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

// Gauss–Kronrod 7/15 nodes on [−1, 1] (nonnegative half) and weights.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Interval<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn gk15<T: Integrable>(f: &impl Fn(f64) -> Result<T>, a: f64, b: f64) -> Result<Interval<T>> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = fc.scale(WGK[7]);
    let mut gauss = fc.scale(WG[3]);
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x)?.add(&f(c + x)?);
        kron = kron.add(&s.scale(WGK[j]));
        if j % 2 == 1 {
            gauss = gauss.add(&s.scale(WG[j / 2]));
        }
    }
    let kron = kron.scale(h);
    let gauss = gauss.scale(h);
    let error = kron.add(&gauss.scale(-1.0)).norm();
    Ok(Interval { a, b, value: kron, error })
}

/// Adaptive Gauss–Kronrod integration over `[a, b]`.
pub fn integrate<T: Integrable>(f: impl Fn(f64) -> Result<T>, a: f64, b: f64, tol: &Tolerance) -> Result<Estimate<T>> {
    integrate_with_breaks(f, &[a, b], tol)
}

/// As [`integrate`], with the initial partition given by sorted `points`.
pub fn integrate_with_breaks<T: Integrable>(
    f: impl Fn(f64) -> Result<T>,
    points: &[f64],
    tol: &Tolerance,
) -> Result<Estimate<T>> {
    if points.len() < 2 || points.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidInput("integration limits must be sorted".into()));
    }
    let mut parts = Vec::new();
    for w in points.windows(2) {
        if w[0] < w[1] {
            parts.push(gk15(&f, w[0], w[1])?);
        }
    }
    let mut evals = 15 * parts.len();
    loop {
        let value = parts.iter().fold(T::zero(), |acc, p| acc.add(&p.value));
        let error: f64 = parts.iter().map(|p| p.error).sum();
        if error <= tol.target(value.norm()) || parts.is_empty() {
            return Ok(Estimate { value, error, evaluations: evals });
        }
        if evals >= tol.max_evals {
            return Err(Error::QuadratureNotConverged {
                estimate: value.norm(),
                error,
                evaluations: evals,
            });
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(Ordering::Equal))
            .expect("nonempty");
        let p = parts.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        if !(p.a < m && m < p.b) {
            return Err(Error::QuadratureNotConverged {
                estimate: value.norm(),
                error,
                evaluations: evals,
            });
        }
        parts.push(gk15(&f, p.a, m)?);
        parts.push(gk15(&f, m, p.b)?);
        evals += 30;
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Fixed Gauss–Legendre rule of order `n` on `[a, b]`.
pub fn gauss_legendre_fixed<T: Integrable>(f: impl Fn(f64) -> Result<T>, a: f64, b: f64, n: usize) -> Result<T> {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = T::zero();
    for (xi, wi) in x.iter().zip(&w) {
        acc = acc.add(&f(c + h * xi)?.scale(wi * h));
    }
    Ok(acc)
}

// Genz–Malik generators for n = 3.
const GM_L2: f64 = 0.358_568_582_800_318_1; // √(9/70)
const GM_L4: f64 = 0.948_683_298_050_513_8; // √(9/10)
const GM_L5: f64 = 0.688_247_201_611_685_3; // √(9/19)

struct Region<T> {
    center: Vec3R,
    half: Vec3R,
    value: T,
    error: f64,
    split: usize,
}

fn genz_malik<T: Integrable>(f: &(impl Fn(&Vec3R) -> Result<T> + Sync), center: Vec3R, half: Vec3R) -> Result<Region<T>> {
    let n = 3.0;
    let w1 = (12824.0 - 9120.0 * n + 400.0 * n * n) / 19683.0;
    let w2 = 980.0 / 6561.0;
    let w3 = (1820.0 - 400.0 * n) / 19683.0;
    let w4 = 200.0 / 19683.0;
    let w5 = 6859.0 / 19683.0 / 8.0;
    let e1 = (729.0 - 950.0 * n + 50.0 * n * n) / 729.0;
    let e2 = 245.0 / 486.0;
    let e3 = (265.0 - 100.0 * n) / 1458.0;
    let e4 = 25.0 / 729.0;

    let at = |off: [f64; 3]| f(&Vec3R([0, 1, 2].map(|i| center[i] + off[i] * half[i])));
    let f0 = at([0.0; 3])?;
    let mut s2 = T::zero();
    let mut s3 = T::zero();
    let mut fourth = [0.0f64; 3];
    for i in 0..3 {
        let mut p = [0.0; 3];
        p[i] = GM_L2;
        let a2 = at(p)?;
        p[i] = -GM_L2;
        let b2 = at(p)?;
        p[i] = GM_L4;
        let a3 = at(p)?;
        p[i] = -GM_L4;
        let b3 = at(p)?;
        let t2 = a2.add(&b2);
        let t3 = a3.add(&b3);
        s2 = s2.add(&t2);
        s3 = s3.add(&t3);
        // (f(λ₂)+f(−λ₂)−2f₀) − (λ₂/λ₃)²(f(λ₃)+f(−λ₃)−2f₀), (λ₂/λ₃)² = 1/7
        let d = t2.add(&f0.scale(-2.0)).add(&t3.add(&f0.scale(-2.0)).scale(-1.0 / 7.0));
        fourth[i] = d.norm();
    }
    let mut s4 = T::zero();
    for i in 0..3 {
        for j in (i + 1)..3 {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut p = [0.0; 3];
                p[i] = si * GM_L4;
                p[j] = sj * GM_L4;
                s4 = s4.add(&at(p)?);
            }
        }
    }
    let mut s5 = T::zero();
    for bits in 0..8 {
        let p = [0, 1, 2].map(|i| if bits >> i & 1 == 1 { GM_L5 } else { -GM_L5 });
        s5 = s5.add(&at(p)?);
    }
    let vol = 8.0 * half[0] * half[1] * half[2];
    let r7 = f0.scale(w1).add(&s2.scale(w2)).add(&s3.scale(w3)).add(&s4.scale(w4)).add(&s5.scale(w5));
    let r5 = f0.scale(e1).add(&s2.scale(e2)).add(&s3.scale(e3)).add(&s4.scale(e4));
    let value = r7.scale(vol);
    let error = r7.add(&r5.scale(-1.0)).norm() * vol;
    let mut split = 0;
    for i in 1..3 {
        // ties go to the widest side
        let better = fourth[i] > fourth[split] * (1.0 + 1e-12)
            || ((fourth[i] - fourth[split]).abs() <= 1e-12 * fourth[split].max(1e-300) && half[i] > half[split]);
        if better {
            split = i;
        }
    }
    Ok(Region { center, half, value, error, split })
}

/// Points evaluated by one application of the degree-7 rule.
pub const GENZ_MALIK_POINTS: usize = 33;

/// Adaptive cubature over a box with the Genz–Malik rule.
///
/// Regions carrying the largest errors are bisected in batches and
/// evaluated in parallel; the summation order is fixed, so results do not
/// depend on the number of threads.
pub fn cubature<T: Integrable>(
    f: impl Fn(&Vec3R) -> Result<T> + Sync,
    region: &Box3,
    tol: &Tolerance,
) -> Result<Estimate<T>> {
    let center = Vec3R([0, 1, 2].map(|i| 0.5 * (region.lo[i] + region.hi[i])));
    let half = Vec3R([0, 1, 2].map(|i| 0.5 * (region.hi[i] - region.lo[i])));
    let mut regions = vec![genz_malik(&f, center, half)?];
    let mut evals = GENZ_MALIK_POINTS;
    loop {
        let value = regions.iter().fold(T::zero(), |acc, r| acc.add(&r.value));
        let error: f64 = regions.iter().map(|r| r.error).sum();
        if error <= tol.target(value.norm()) {
            return Ok(Estimate { value, error, evaluations: evals });
        }
        if evals >= tol.max_evals {
            return Err(Error::QuadratureNotConverged {
                estimate: value.norm(),
                error,
                evaluations: evals,
            });
        }
        let mut order: Vec<usize> = (0..regions.len()).collect();
        order.sort_by(|&a, &b| {
            regions[b]
                .error
                .partial_cmp(&regions[a].error)
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut picked = Vec::new();
        let mut covered = 0.0;
        for &i in &order {
            picked.push(i);
            covered += regions[i].error;
            if covered >= 0.5 * error || picked.len() >= 256 {
                break;
            }
        }
        picked.sort_unstable();
        let children: Vec<(Vec3R, Vec3R)> = picked
            .iter()
            .flat_map(|&i| {
                let r = &regions[i];
                let mut h = r.half;
                h[r.split] *= 0.5;
                let mut off = Vec3R::ZERO;
                off[r.split] = h[r.split];
                [(r.center - off, h), (r.center + off, h)]
            })
            .collect();
        let fresh: Vec<Result<Region<T>>> = children.par_iter().map(|(c, h)| genz_malik(&f, *c, *h)).collect();
        evals += GENZ_MALIK_POINTS * fresh.len();
        for &i in picked.iter().rev() {
            regions.swap_remove(i);
        }
        for r in fresh {
            regions.push(r?);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_smooth() {
        let r = integrate(|x: f64| Ok(x.cos()), 0.0, 2.0, &Tolerance::default()).unwrap();
        assert!((r.value - 2f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn gauss_kronrod_with_kink() {
        let tol = Tolerance::new(1e-13, 1e-12, 100_000).unwrap();
        let r = integrate_with_breaks(|x: f64| Ok((x - 0.3).abs()), &[-1.0, 0.3, 1.0], &tol).unwrap();
        assert!((r.value - (1.3f64 * 1.3 + 0.7 * 0.7) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_kronrod_reports_failure() {
        let tol = Tolerance::new(1e-15, 1e-15, 200).unwrap();
        let r = integrate(|x: f64| Ok(1.0 / x.sqrt()), 0.0, 1.0, &tol);
        assert!(matches!(r, Err(Error::QuadratureNotConverged { .. })));
    }

    #[test]
    fn legendre_nodes() {
        let (x, w) = gauss_legendre(5);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(x[2].abs() < 1e-15);
        // exact through degree 2n − 1 = 9
        let v = gauss_legendre_fixed(|t: f64| Ok(t.powi(8) + t.powi(3)), -1.0, 1.0, 5).unwrap();
        assert!((v - 2.0 / 9.0).abs() < 1e-14);
        let (_, w) = gauss_legendre(16);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn genz_malik_degree_seven_exact() {
        let f = |k: &Vec3R| Ok(k[0].powi(4) * k[1].powi(2) * k[2] + k[0] * k[0] * k[1].powi(2) * k[2].powi(2) + 1.0);
        let b = Box3::new(Vec3R::new(0.0, 0.0, 0.0), Vec3R::new(1.0, 2.0, 1.5));
        let r = genz_malik(&f, Vec3R::new(0.5, 1.0, 0.75), Vec3R::new(0.5, 1.0, 0.75)).unwrap();
        let want = (1.0 / 5.0) * (8.0 / 3.0) * (1.5f64.powi(2) / 2.0) + (1.0 / 3.0) * (8.0 / 3.0) * (1.5f64.powi(3) / 3.0) + b.volume();
        assert!((r.value - want).abs() < 1e-12, "{} vs {want}", r.value);
    }

    #[test]
    fn cubature_gaussian() {
        let f = |k: &Vec3R| Ok((-k.norm_sqr()).exp());
        let b = Box3::new(Vec3R::new(-6.0, -6.0, -6.0), Vec3R::new(6.0, 6.0, 6.0));
        let r = cubature(f, &b, &Tolerance::new(1e-300, 1e-8, 10_000_000).unwrap()).unwrap();
        let want = std::f64::consts::PI.powf(1.5);
        assert!((r.value - want).abs() < 1e-8 * want, "{} {}", r.value - want, r.evaluations);
    }
}
