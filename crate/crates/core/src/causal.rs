//! Closed chains `A_xy = P^{2ε}(x,y) P^{2ε}(y,x)`, their spectra and the
//! spectral causal classification, together with the two most singular
//! light-cone factors `T^{(−1)}, T^{(0)}` and the matrix elements built from them.
//!
//! Spectra come from a complex Schur decomposition. Every eigenvalue is then
//! checked against the matrix: the smallest singular value of `A − λI` must not
//! exceed `1e-8‖A‖`.

use std::f64::consts::PI;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{kernel_matrix, ModelParams};
use crate::minkowski::{SpacetimePoint, SpinMatrix};

/// Default relative band on the spread of `|λ_j|`.
pub const DEFAULT_TOL_MODULUS: f64 = 1e-3;
/// Default relative band on `|Im λ_j|`.
pub const DEFAULT_TOL_IMAG: f64 = 1e-6;
/// Relative residual accepted per eigenpair.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Eigenvalues of a closed chain with summary diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedChainSpectrum {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: [Complex64; 4],
    /// `(max|λ| − min|λ|)/max|λ|`.
    pub modulus_spread: f64,
    /// `max|Im λ|/max|λ|`.
    pub max_imag: f64,
    /// Largest residual `σ_min(A − λI)/‖A‖` over the four eigenvalues.
    pub residual: f64,
}

/// Spectral causal type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalKind {
    Spacelike,
    Timelike,
    Lightlike,
}

impl std::fmt::Display for CausalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CausalKind::Spacelike => "spacelike",
            CausalKind::Timelike => "timelike",
            CausalKind::Lightlike => "lightlike",
        })
    }
}

/// Result of [`classify`] with the bands and measured values it used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausalClass {
    pub kind: CausalKind,
    pub tol_modulus: f64,
    pub tol_imag: f64,
    pub modulus_spread: f64,
    pub max_imag: f64,
}

/// `A_xy = P^{2ε}(x,y) P^{2ε}(y,x)`. The cutoff power stored in `p` is ignored.
pub fn closed_chain(p: &ModelParams, x: SpacetimePoint, y: SpacetimePoint) -> Result<SpinMatrix> {
    let p2 = p.with_n(2)?;
    let xi = x - y;
    Ok(kernel_matrix(&p2, xi)? * kernel_matrix(&p2, -xi)?)
}

/// Eigenvalues of a 4×4 complex matrix with a residual check on each.
pub fn spectrum(a: &SpinMatrix) -> Result<ClosedChainSpectrum> {
    let norm = a.norm();
    if !norm.is_finite() {
        return Err(Error::DegenerateArgument("matrix has non-finite entries".into()));
    }
    let eig = a
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::DegenerateArgument("Schur decomposition did not converge".into()))?;
    let mut lambdas = [eig[0], eig[1], eig[2], eig[3]];
    lambdas.sort_by(|u, v| u.re.total_cmp(&v.re).then(u.im.total_cmp(&v.im)));
    let mut residual = 0.0f64;
    if norm > 0.0 {
        for lam in &lambdas {
            let shifted: Matrix4<Complex64> = a - Matrix4::identity() * *lam;
            let sv = shifted.singular_values();
            let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            residual = residual.max(smin / norm);
        }
    }
    if residual > EIGEN_RESIDUAL_TOL {
        return Err(Error::EigenResidual { residual });
    }
    let moduli = lambdas.map(|l| l.norm());
    let max = moduli.iter().cloned().fold(0.0, f64::max);
    let min = moduli.iter().cloned().fold(f64::INFINITY, f64::min);
    let (modulus_spread, max_imag) = if max > 0.0 {
        ((max - min) / max, lambdas.iter().map(|l| l.im.abs()).fold(0.0, f64::max) / max)
    } else {
        (0.0, 0.0)
    };
    Ok(ClosedChainSpectrum { eigenvalues: lambdas, modulus_spread, max_imag, residual })
}

/// Spectrum of `A_xy`.
pub fn closed_chain_spectrum(p: &ModelParams, x: SpacetimePoint, y: SpacetimePoint) -> Result<ClosedChainSpectrum> {
    spectrum(&closed_chain(p, x, y)?)
}

/// Spacelike when the moduli agree within `tol_modulus`, timelike when they do
/// not but all eigenvalues are real within `tol_imag`, lightlike otherwise.
pub fn classify(spec: &ClosedChainSpectrum, tol_modulus: f64, tol_imag: f64) -> CausalClass {
    let kind = if spec.modulus_spread <= tol_modulus {
        CausalKind::Spacelike
    } else if spec.max_imag <= tol_imag {
        CausalKind::Timelike
    } else {
        CausalKind::Lightlike
    };
    CausalClass { kind, tol_modulus, tol_imag, modulus_spread: spec.modulus_spread, max_imag: spec.max_imag }
}

/// `(ξ⁰ − iε)² − |ξ⃗|²`.
pub fn regularized_square(eps: f64, xi: SpacetimePoint) -> Complex64 {
    let t = Complex64::new(xi.t, -eps);
    t * t - (xi.x1 * xi.x1 + xi.x2 * xi.x2 + xi.x3 * xi.x3)
}

/// `T^{(−1)}_ε = −(2π³)^{−1}Q^{−2}` and `T^{(0)}_ε = −(8π³)^{−1}Q^{−1}` with
/// `Q = (ξ⁰ − iε)² − |ξ⃗|²`.
pub fn t_factor(order: i32, eps: f64, xi: SpacetimePoint) -> Result<Complex64> {
    let q = regularized_square(eps, xi);
    if q.norm() == 0.0 {
        return Err(Error::DegenerateArgument(format!("regularized square vanishes at ξ = {xi:?}, ε = {eps}")));
    }
    let pi3 = PI * PI * PI;
    match order {
        -1 => Ok(-1.0 / (2.0 * pi3 * q * q)),
        0 => Ok(-1.0 / (8.0 * pi3 * q)),
        _ => Err(Error::InvalidParams(format!("light-cone order must be -1 or 0, got {order}"))),
    }
}

/// `(𝔢₁†a₀𝔢₃, 𝔢₁†a₁𝔢₃)` in closed form. `ξ` has contravariant components, so
/// `ξ³ = −ξ₃` and the elements read `iεξ³/(8π⁶|Q|⁴)` and `εξ⁰ξ³/(8π⁶|Q|⁴)`.
pub fn a0_a1_elements(eps: f64, xi: SpacetimePoint) -> Result<(Complex64, Complex64)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParams(format!("epsilon must be positive, got {eps}")));
    }
    let q4 = regularized_square(eps, xi).norm().powi(4);
    let c = eps * xi.x3 / (8.0 * PI.powi(6) * q4);
    Ok((I * c, Complex64::new(c * xi.t, 0.0)))
}

/// `𝔢₁† A_{0y} 𝔢₃` from full kernel products.
pub fn closed_chain_element_13(p: &ModelParams, y: SpacetimePoint) -> Result<Complex64> {
    Ok(closed_chain(p, SpacetimePoint::ORIGIN, y)?[(0, 2)])
}
