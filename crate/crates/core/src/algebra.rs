//! Fixed-size 3-vector and 3×3 matrix kernels.
//!
//! Matrices are stored row-major: `m.0[j][n]` is the entry in row `j`,
//! column `n`. Where a matrix is built from a triad, row `j` is the Cartesian
//! component and column `μ` the frame leg, i.e. `(E)_{jμ} = E_μ[j]`.
//! All indices are zero-based in code; axis `0` is `k₁`.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Levi-Civita symbol on zero-based indices.
#[inline]
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

#[inline]
pub fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Real Cartesian 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3R(pub [f64; 3]);

impl Vec3R {
    pub const ZERO: Vec3R = Vec3R([0.0; 3]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3R([x, y, z])
    }

    pub fn axis(l: usize) -> Self {
        let mut v = [0.0; 3];
        v[l] = 1.0;
        Vec3R(v)
    }

    pub fn dot(&self, o: &Vec3R) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(&self, o: &Vec3R) -> Vec3R {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        Vec3R([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: f64) -> Vec3R {
        Vec3R(self.0.map(|x| x * s))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn to_complex(&self) -> Vec3C {
        Vec3C(self.0.map(|x| C64::new(x, 0.0)))
    }

    /// Euclidean distance from the `k₃`-axis.
    pub fn axial_distance(&self) -> f64 {
        self.0[0].hypot(self.0[1])
    }
}

impl Index<usize> for Vec3R {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec3R {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Vec3R {
    type Output = Vec3R;
    fn add(self, o: Vec3R) -> Vec3R {
        Vec3R([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3R {
    type Output = Vec3R;
    fn sub(self, o: Vec3R) -> Vec3R {
        Vec3R([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3R {
    type Output = Vec3R;
    fn neg(self) -> Vec3R {
        self.scale(-1.0)
    }
}

impl Mul<Vec3R> for f64 {
    type Output = Vec3R;
    fn mul(self, v: Vec3R) -> Vec3R {
        v.scale(self)
    }
}

/// Complex Cartesian 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3C(pub [C64; 3]);

impl Vec3C {
    pub const ZERO: Vec3C = Vec3C([ZERO; 3]);

    pub fn new(x: C64, y: C64, z: C64) -> Self {
        Vec3C([x, y, z])
    }

    /// Hermitian product `self† · o`.
    pub fn inner(&self, o: &Vec3C) -> C64 {
        self.0[0].conj() * o.0[0] + self.0[1].conj() * o.0[1] + self.0[2].conj() * o.0[2]
    }

    /// Bilinear contraction with a real vector, `Σ_j k_j v_j`, no conjugation.
    pub fn dot_real(&self, k: &Vec3R) -> C64 {
        self.0[0] * k.0[0] + self.0[1] * k.0[1] + self.0[2] * k.0[2]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: C64) -> Vec3C {
        Vec3C(self.0.map(|z| z * s))
    }

    pub fn scale_re(&self, s: f64) -> Vec3C {
        Vec3C(self.0.map(|z| z * s))
    }

    pub fn conj(&self) -> Vec3C {
        Vec3C(self.0.map(|z| z.conj()))
    }

    pub fn re(&self) -> Vec3R {
        Vec3R(self.0.map(|z| z.re))
    }

    pub fn im(&self) -> Vec3R {
        Vec3R(self.0.map(|z| z.im))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Index<usize> for Vec3C {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec3C {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl Add for Vec3C {
    type Output = Vec3C;
    fn add(self, o: Vec3C) -> Vec3C {
        Vec3C([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Vec3C {
    fn add_assign(&mut self, o: Vec3C) {
        for i in 0..3 {
            self.0[i] += o.0[i];
        }
    }
}

impl Sub for Vec3C {
    type Output = Vec3C;
    fn sub(self, o: Vec3C) -> Vec3C {
        Vec3C([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3C {
    type Output = Vec3C;
    fn neg(self) -> Vec3C {
        self.scale_re(-1.0)
    }
}

impl Mul<Vec3C> for C64 {
    type Output = Vec3C;
    fn mul(self, v: Vec3C) -> Vec3C {
        v.scale(self)
    }
}

impl Mul<Vec3C> for f64 {
    type Output = Vec3C;
    fn mul(self, v: Vec3C) -> Vec3C {
        v.scale_re(self)
    }
}

/// Complex 3×3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat3C(pub [[C64; 3]; 3]);

impl Mat3C {
    pub const ZERO: Mat3C = Mat3C([[ZERO; 3]; 3]);

    pub fn identity() -> Self {
        Self::diag([ONE; 3])
    }

    pub fn diag(d: [C64; 3]) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::ZERO;
        for r in 0..3 {
            for c in 0..3 {
                m.0[r][c] = f(r, c);
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: [Vec3C; 3]) -> Self {
        Self::from_fn(|r, c| cols[c].0[r])
    }

    pub fn column(&self, c: usize) -> Vec3C {
        Vec3C([self.0[0][c], self.0[1][c], self.0[2][c]])
    }

    pub fn row(&self, r: usize) -> Vec3C {
        Vec3C(self.0[r])
    }

    /// Outer product `u vᵀ` (no conjugation).
    pub fn outer(u: &Vec3C, v: &Vec3C) -> Self {
        Self::from_fn(|r, c| u.0[r] * v.0[c])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|r, c| self.0[c][r].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|r, c| self.0[c][r])
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_fn(|r, c| self.0[r][c] * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self::from_fn(|r, c| self.0[r][c] * s)
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn mul_vec(&self, v: &Vec3C) -> Vec3C {
        let mut out = Vec3C::ZERO;
        for r in 0..3 {
            out.0[r] = self.0[r][0] * v.0[0] + self.0[r][1] * v.0[1] + self.0[r][2] * v.0[2];
        }
        out
    }

    pub fn commutator(&self, o: &Mat3C) -> Mat3C {
        *self * *o - *o * *self
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest entry modulus (max-norm).
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for Mat3C {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.0[r][c]
    }
}

impl IndexMut<(usize, usize)> for Mat3C {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.0[r][c]
    }
}

impl Add for Mat3C {
    type Output = Mat3C;
    fn add(self, o: Mat3C) -> Mat3C {
        Mat3C::from_fn(|r, c| self.0[r][c] + o.0[r][c])
    }
}

impl AddAssign for Mat3C {
    fn add_assign(&mut self, o: Mat3C) {
        *self = *self + o;
    }
}

impl Sub for Mat3C {
    type Output = Mat3C;
    fn sub(self, o: Mat3C) -> Mat3C {
        Mat3C::from_fn(|r, c| self.0[r][c] - o.0[r][c])
    }
}

impl Neg for Mat3C {
    type Output = Mat3C;
    fn neg(self) -> Mat3C {
        self.scale_re(-1.0)
    }
}

impl Mul for Mat3C {
    type Output = Mat3C;
    fn mul(self, o: Mat3C) -> Mat3C {
        Mat3C::from_fn(|r, c| {
            self.0[r][0] * o.0[0][c] + self.0[r][1] * o.0[1][c] + self.0[r][2] * o.0[2][c]
        })
    }
}

impl Mul<Vec3C> for Mat3C {
    type Output = Vec3C;
    fn mul(self, v: Vec3C) -> Vec3C {
        self.mul_vec(&v)
    }
}

impl Mul<Mat3C> for C64 {
    type Output = Mat3C;
    fn mul(self, m: Mat3C) -> Mat3C {
        m.scale(self)
    }
}

impl Mul<Mat3C> for f64 {
    type Output = Mat3C;
    fn mul(self, m: Mat3C) -> Mat3C {
        m.scale_re(self)
    }
}

/// Complex 2×2 matrix, row-major. Acts on the transverse legs `(E₁, E₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2C(pub [[C64; 2]; 2]);

impl Mat2C {
    pub fn identity() -> Self {
        Mat2C([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn diag(a: C64, b: C64) -> Self {
        Mat2C([[a, ZERO], [ZERO, b]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2C([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2C(self.0.map(|row| row.map(|z| z * s)))
    }

    pub fn add(&self, o: &Mat2C) -> Self {
        let mut out = *self;
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] += o.0[r][c];
            }
        }
        out
    }

    /// Deviation of `U†U` from the identity, max-norm.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint() * *self;
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let want = if r == c { ONE } else { ZERO };
                worst = worst.max((p.0[r][c] - want).norm());
            }
        }
        worst
    }

    /// Pauli basis `σ₀ = 1, σ₁, σ₂, σ₃`.
    pub fn pauli(j: usize) -> Self {
        match j {
            0 => Self::identity(),
            1 => Mat2C([[ZERO, ONE], [ONE, ZERO]]),
            2 => Mat2C([[ZERO, -I], [I, ZERO]]),
            3 => Mat2C([[ONE, ZERO], [ZERO, -ONE]]),
            _ => panic!("Pauli index {j} out of range"),
        }
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;
    fn mul(self, o: Mat2C) -> Mat2C {
        let a = &self.0;
        let b = &o.0;
        Mat2C([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }
}

/// Physical constants. Defaults to natural units `ħ = c = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    hbar: f64,
    c: f64,
}

impl Constants {
    pub fn new(hbar: f64, c: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite() && c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "constants must be positive and finite (hbar={hbar}, c={c})"
            )));
        }
        Ok(Constants { hbar, c })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

impl Default for Constants {
    fn default() -> Self {
        Constants { hbar: 1.0, c: 1.0 }
    }
}

/// Spin-1 matrices with `(S_j)_{rl} = −i ε_{jrl}`.
pub fn spin_matrices() -> [Mat3C; 3] {
    [0, 1, 2].map(|j| Mat3C::from_fn(|r, l| C64::new(0.0, -levi_civita(j, r, l))))
}

/// `Σ_j v_j S_j` for a real vector `v`.
pub fn spin_dot(v: &Vec3R) -> Mat3C {
    // (v·S)_{rl} = −i ε_{jrl} v_j
    Mat3C::from_fn(|r, l| {
        let s: f64 = (0..3).map(|j| levi_civita(j, r, l) * v.0[j]).sum();
        C64::new(0.0, -s)
    })
}

/// `(k × S)_l = ε_{lab} k_a S_b`.
pub fn k_cross_spin(k: &Vec3R, l: usize) -> Mat3C {
    let mut w = Vec3R::ZERO;
    for a in 0..3 {
        for b in 0..3 {
            w.0[b] += levi_civita(l, a, b) * k.0[a];
        }
    }
    spin_dot(&w)
}

fn require_nonzero(k: &Vec3R) -> Result<f64> {
    let r = k.norm();
    if !k.is_finite() {
        return Err(Error::NonFinite("momentum".into()));
    }
    if r == 0.0 {
        return Err(Error::ZeroMomentum);
    }
    Ok(r)
}

/// Helicity operator `Σ = (k·S)/|k|`.
pub fn helicity(k: &Vec3R) -> Result<Mat3C> {
    let r = require_nonzero(k)?;
    Ok(spin_dot(&k.scale(1.0 / r)))
}

/// Transverse projector `I − k kᵀ/|k|²`.
pub fn transverse_projector(k: &Vec3R) -> Result<Mat3C> {
    let r = require_nonzero(k)?;
    let n = k.scale(1.0 / r);
    Ok(Mat3C::from_fn(|a, b| C64::new(delta(a, b) - n.0[a] * n.0[b], 0.0)))
}
