//! Minkowski geometry in signature (+,−,−,−) and the Dirac algebra in the
//! standard Dirac representation.
//!
//! `γ⁰ = diag(1, 1, −1, −1)` and `γ^α = [[0, σ^α], [−σ^α, 0]]`, so `γ⁰` is
//! Hermitian and the spatial matrices are anti-Hermitian. The spin scalar
//! product is `≺ψ|φ≻ = ψ†γ⁰φ`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Four-component complex spinor.
pub type Spinor = Vector4<Complex64>;
/// Complex 4×4 matrix acting on spinors.
pub type SpinMatrix = Matrix4<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default relative band for null-cone classification.
pub const DEFAULT_CONE_TOL: f64 = 1e-9;

/// A point (or difference vector) of Minkowski space with contravariant components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

/// Position of a vector relative to the null cone of the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeClass {
    InteriorTimelike,
    Null,
    ExteriorSpacelike,
}

impl SpacetimePoint {
    pub const ORIGIN: SpacetimePoint = SpacetimePoint { t: 0.0, x1: 0.0, x2: 0.0, x3: 0.0 };

    pub const fn new(t: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Self { t, x1, x2, x3 }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.t, self.x1, self.x2, self.x3]
    }

    pub fn spatial(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    /// Euclidean length of the spatial part.
    pub fn spatial_norm(self) -> f64 {
        (self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3).sqrt()
    }

    /// `t² − |x⃗|²`.
    pub fn minkowski_square(self) -> f64 {
        self.t * self.t - self.x1 * self.x1 - self.x2 * self.x2 - self.x3 * self.x3
    }

    /// Minkowski product `η(self, other)`.
    pub fn dot(self, other: SpacetimePoint) -> f64 {
        self.t * other.t - self.x1 * other.x1 - self.x2 * other.x2 - self.x3 * other.x3
    }

    /// `t² + |x⃗|²`, the scale against which the cone tolerance is relative.
    pub fn euclidean_square(self) -> f64 {
        self.t * self.t + self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3
    }

    /// Classifies the vector; `tol` is relative to `t² + |x⃗|²`.
    pub fn cone_class(self, tol: f64) -> ConeClass {
        let q = self.minkowski_square();
        if q.abs() <= tol * self.euclidean_square() {
            ConeClass::Null
        } else if q > 0.0 {
            ConeClass::InteriorTimelike
        } else {
            ConeClass::ExteriorSpacelike
        }
    }
}

impl Add for SpacetimePoint {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.t + o.t, self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3)
    }
}

impl Sub for SpacetimePoint {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.t - o.t, self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3)
    }
}

impl Neg for SpacetimePoint {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.t, -self.x1, -self.x2, -self.x3)
    }
}

impl Mul<f64> for SpacetimePoint {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.t * s, self.x1 * s, self.x2 * s, self.x3 * s)
    }
}

/// Minkowski metric diagonal `η^{jj}`.
pub const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Dirac matrix `γ^j`.
pub fn gamma(j: usize) -> Result<SpinMatrix> {
    if j > 3 {
        return Err(Error::IndexOutOfRange(j));
    }
    Ok(GAMMAS[j])
}

/// The four Dirac matrices as a table, for hot loops.
pub const GAMMAS: [SpinMatrix; 4] = [gamma0(), gamma1(), gamma2(), gamma3()];

const fn m4(r: [[Complex64; 4]; 4]) -> SpinMatrix {
    // `Matrix4::new` takes its arguments in row-major order.
    Matrix4::new(
        r[0][0], r[0][1], r[0][2], r[0][3], r[1][0], r[1][1], r[1][2], r[1][3], r[2][0], r[2][1],
        r[2][2], r[2][3], r[3][0], r[3][1], r[3][2], r[3][3],
    )
}

const fn neg(z: Complex64) -> Complex64 {
    Complex64::new(-z.re, -z.im)
}

const fn gamma0() -> SpinMatrix {
    m4([[ONE, ZERO, ZERO, ZERO], [ZERO, ONE, ZERO, ZERO], [ZERO, ZERO, neg(ONE), ZERO], [ZERO, ZERO, ZERO, neg(ONE)]])
}

const fn gamma1() -> SpinMatrix {
    m4([[ZERO, ZERO, ZERO, ONE], [ZERO, ZERO, ONE, ZERO], [ZERO, neg(ONE), ZERO, ZERO], [neg(ONE), ZERO, ZERO, ZERO]])
}

const fn gamma2() -> SpinMatrix {
    m4([[ZERO, ZERO, ZERO, neg(I)], [ZERO, ZERO, I, ZERO], [ZERO, I, ZERO, ZERO], [neg(I), ZERO, ZERO, ZERO]])
}

const fn gamma3() -> SpinMatrix {
    m4([[ZERO, ZERO, ONE, ZERO], [ZERO, ZERO, ZERO, neg(ONE)], [neg(ONE), ZERO, ZERO, ZERO], [ZERO, ONE, ZERO, ZERO]])
}

/// `γ⁵ = iγ⁰γ¹γ²γ³`.
pub fn gamma5() -> SpinMatrix {
    GAMMAS[0] * GAMMAS[1] * GAMMAS[2] * GAMMAS[3] * I
}

/// Unit spinor `𝔢_μ` for `μ ∈ {1,2,3,4}` (one-based, as in the component formulas).
pub fn basis_spinor(mu: usize) -> Result<Spinor> {
    if !(1..=4).contains(&mu) {
        return Err(Error::IndexOutOfRange(mu));
    }
    let mut e = Spinor::zeros();
    e[mu - 1] = ONE;
    Ok(e)
}

/// Spin scalar product `ψ†γ⁰φ`, conjugate-linear in the first slot.
pub fn spin_inner(psi: &Spinor, phi: &Spinor) -> Complex64 {
    psi[0].conj() * phi[0] + psi[1].conj() * phi[1] - psi[2].conj() * phi[2] - psi[3].conj() * phi[3]
}

/// Adjoint with respect to the spin scalar product: `γ⁰A†γ⁰`.
pub fn spin_adjoint(a: &SpinMatrix) -> SpinMatrix {
    let mut b = a.adjoint();
    for r in 0..4 {
        for c in 0..4 {
            if (r < 2) != (c < 2) {
                b[(r, c)] = -b[(r, c)];
            }
        }
    }
    b
}

/// Slash of a complex covariant vector: `Σ_j γ^j v_j` with `v` given by its
/// coefficients on `γ^j` directly.
pub fn gamma_combination(coeffs: &[Complex64; 4], scalar: Complex64) -> SpinMatrix {
    let mut m = SpinMatrix::identity() * scalar;
    for (g, c) in GAMMAS.iter().zip(coeffs) {
        m += g * *c;
    }
    m
}

/// Negative-energy projector `p₋(k⃗) = (k̸ + m)γ⁰/(2k⁰)` at `k⁰ = −ω(k⃗)`.
///
/// In Hamiltonian form this is `(1 − H/ω)/2` with `H = α⃗·k⃗ + βm`, a Hermitian
/// rank-two orthogonal projector.
pub fn negative_energy_projector(k: [f64; 3], mass: f64) -> SpinMatrix {
    let omega = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + mass * mass).sqrt();
    let k0 = Complex64::new(-omega, 0.0);
    // k̸ = γ^0 k_0 + γ^α k_α with covariant k_α = −k^α.
    let coeffs = [k0, Complex64::from(-k[0]), Complex64::from(-k[1]), Complex64::from(-k[2])];
    gamma_combination(&coeffs, Complex64::from(mass)) * GAMMAS[0] / (2.0 * k0)
}
