//! The regularized kernel
//!
//! ```text
//! P^{nε}(x,y) = ∫ d³k / (2(2π)⁴ ω) (k̸ + m) e^{−nεω} e^{−ik·(x−y)},   k⁰ = −ω(k⃗)
//!             = Σ_j v_j(ξ) γ^j + β(ξ) I₄,                          ξ = x − y,
//! ```
//!
//! evaluated by two independent routes.
//!
//! **Momentum quadrature.** With `ξ = (t, z⃗)`, `r = |z⃗|`, `a = nε − it` the angular
//! integrals reduce to spherical Bessel functions:
//!
//! ```text
//! v₀  = −(1/8π³)      ∫ k² e^{−aω} j₀(kr) dk
//! β   =  (m/8π³)      ∫ k² e^{−aω} j₀(kr)/ω dk
//! v_α = −(i/8π³) ẑ^α  ∫ k³ e^{−aω} j₁(kr)/ω dk
//! ```
//!
//! The radial integrals are evaluated on rays `k = u e^{iφ}` in the complex
//! momentum plane (see [`scalar_components_with`]), which replaces the slowly
//! damped oscillation along the real axis by exponential decay.
//!
//! **Closed form** (`n = 1`). With `s = √(r² + a²)` on the principal branch,
//! `T = m K₁(ms)/(8π³ s)` and `P = (i∂̸_x + m)T`:
//!
//! ```text
//! v₀ = −m² a K₂(ms)/(8π³ s²),   v_α = −i m² z^α K₂(ms)/(8π³ s²),   β = m² K₁(ms)/(8π³ s)
//! ```
//!
//! with `K₂ = K₀ + 2K₁/(ms)`. Inside the cone, where `ms` approaches the
//! imaginary axis, `K₀, K₁` are taken from Hankel functions of `q = m√(−s²)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minkowski::{spin_inner, SpacetimePoint, SpinMatrix, Spinor, GAMMAS};
use crate::quadrature::{composite_rule, integrate_halfline, CVec, HalfLineHints, QuadOptions, QuadValue};
use crate::specfun::{bessel_k01, hankel01, BesselEval, HankelKind};

/// Upper bound for `m·ε`.
pub const EPS_MAX: f64 = 0.5;

/// Relative tolerance of the radial remainder integrals, measured against the
/// massless reference of each component.
pub const KERNEL_REL_TOL: f64 = 1e-11;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Physical parameters: mass `m > 0`, regularization length `ε`, cutoff power `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub mass: f64,
    pub eps: f64,
    pub n: u8,
}

impl ModelParams {
    pub fn new(mass: f64, eps: f64, n: u8) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidParams(format!("mass must be positive, got {mass}")));
        }
        if !(eps > 0.0) || !(mass * eps < EPS_MAX) {
            return Err(Error::InvalidParams(format!("epsilon must lie in (0, {EPS_MAX}/m), got {eps}")));
        }
        if !(n == 1 || n == 2) {
            return Err(Error::InvalidParams(format!("cutoff power must be 1 or 2, got {n}")));
        }
        Ok(Self { mass, eps, n })
    }

    /// Effective damping length `nε`.
    pub fn eps_eff(&self) -> f64 {
        f64::from(self.n) * self.eps
    }

    /// Same kernel written with `n = 1`: `(m, nε, 1)`.
    pub fn single_power(&self) -> Self {
        Self { mass: self.mass, eps: self.eps_eff(), n: 1 }
    }

    pub fn with_n(&self, n: u8) -> Result<Self> {
        Self::new(self.mass, self.eps, n)
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.mass, eps, self.n)
    }

    /// `ω(k) = √(k² + m²)`.
    pub fn omega(&self, k: f64) -> f64 {
        (k * k + self.mass * self.mass).sqrt()
    }

    /// `𝔤_ε(k) = e^{−εω(k)}`.
    pub fn damping(&self, k: f64) -> f64 {
        (-self.eps * self.omega(k)).exp()
    }
}

/// How a kernel value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelMethod {
    Quadrature,
    Bessel,
}

/// Coefficients of `P = Σ v_j γ^j + β I₄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarComponents {
    pub v: [Complex64; 4],
    pub beta: Complex64,
    pub est_error: f64,
}

impl ScalarComponents {
    pub fn to_matrix(&self) -> SpinMatrix {
        let mut m = SpinMatrix::identity() * self.beta;
        for (g, v) in GAMMAS.iter().zip(&self.v) {
            m += g * *v;
        }
        m
    }
}

/// `P^{nε}(x,y)` with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub matrix: SpinMatrix,
    pub est_error: f64,
    pub method: KernelMethod,
}

const NORM: f64 = 1.0 / (8.0 * PI * PI * PI);

/// Spherical Bessel `j₀(x) = sin x / x` for complex `x`.
fn sph_j0(x: Complex64) -> Complex64 {
    if x.norm() < 1e-3 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Spherical Bessel `j₁(x) = (sin x − x cos x)/x²` for complex `x`, by series below 0.5.
fn sph_j1(x: Complex64) -> Complex64 {
    if x.norm() < 0.5 {
        let x2 = x * x;
        x * (1.0 / 3.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 840.0 - x2 * (1.0 / 45360.0 - x2 / 3991680.0))))
    } else {
        (x.sin() - x * x.cos()) / (x * x)
    }
}

/// Opening angle of the rotated integration rays.
const RAY_ANGLE: f64 = std::f64::consts::FRAC_PI_4;

/// The components `v_j, β` of `P^{nε}` at `z = x − y` by radial quadrature.
pub fn scalar_components(p: &ModelParams, z: SpacetimePoint) -> Result<ScalarComponents> {
    scalar_components_with(p, z, KERNEL_REL_TOL, None)
}

/// Radial integrals `(I_A, I_B, I_C) = (∫k²e^{−aω}j₀, ∫k²e^{−aω}j₀/ω, ∫k³e^{−aω}j₁/ω)`.
///
/// Each integral is analytic in `k` off the cuts `±i[m, ∞)`, so the half-line
/// may be turned onto a ray `k = u e^{iφ}` with `|φ| < π/2` whenever the
/// exponential decays on the swept sector. With the oscillation `e^{±ikr}`
/// split off, the exponent is `−k(nε − i(t ± r))` and a ray tilted towards
/// `sign(t ± r)` turns the oscillation into decay. For `r ≪ |a|` the split
/// pieces would cancel, so `j₀, j₁` are kept whole and the ray follows `sign t`.
fn radial_integrals(
    mass: f64,
    eps: f64,
    t: f64,
    r: f64,
    extra: f64,
    rel_tol: f64,
) -> Result<([Complex64; 3], f64)> {
    let a = Complex64::new(eps, -t);
    let tilt = |speed: f64| if speed.abs() <= eps { 0.0 } else { RAY_ANGLE.copysign(speed) };
    let ray = |phi: f64, rate_speed: f64, f: &dyn Fn(Complex64) -> [Complex64; 3], scale: [f64; 3]| {
        let dir = Complex64::from_polar(1.0, phi);
        let rate = (eps + extra) * phi.cos() + rate_speed.abs() * phi.sin().abs();
        let g = |u: f64| -> CVec<3> {
            let v = f(dir * u);
            CVec([v[0] * dir * scale[0], v[1] * dir * scale[1], v[2] * dir * scale[2]])
        };
        integrate_halfline(g, HalfLineHints::decaying(rate), QuadOptions::new(rel_tol, rel_tol))
    };
    let damp = |w: Complex64| if extra > 0.0 { (-extra * w).exp() } else { Complex64::new(1.0, 0.0) };
    let a_abs = a.norm();
    if r <= 0.5 * a_abs {
        let d2 = a * a + r * r;
        let scale = [d2.norm().powi(2) / (2.0 * a_abs), d2.norm(), if r > 0.0 { d2.norm().powi(2) / (2.0 * r) } else { 0.0 }];
        let f = |k: Complex64| -> [Complex64; 3] {
            let w = (k * k + mass * mass).sqrt();
            let e = (-a * w).exp() * damp(w);
            let j0 = sph_j0(k * r);
            let base = k * k * e;
            let c = if r > 0.0 { base * k * sph_j1(k * r) / w } else { ZERO };
            [base * j0, base * j0 / w, c]
        };
        // j₀, j₁ grow like e^{r|Im k|} on the ray, which slows the net decay.
        let res = ray(tilt(t), (t.abs() - r).max(0.0), &f, scale)?;
        let v = res.value.0;
        let out = [v[0] / scale[0], v[1] / scale[1], if r > 0.0 { v[2] / scale[2] } else { ZERO }];
        let err = res.est_error * (1.0 / scale[0] + 1.0 / scale[1] + if r > 0.0 { 1.0 / scale[2] } else { 0.0 });
        return Ok((out, err));
    }
    let mut out = [ZERO; 3];
    let mut err = 0.0;
    for sigma in [1.0f64, -1.0] {
        let b = Complex64::new(eps, -(t + sigma * r));
        let bn = b.norm();
        let scale = [2.0 * r * bn * bn, 2.0 * r * bn, 1.0 / (1.0 / (2.0 * r * r * bn) + 1.0 / (2.0 * r * bn * bn))];
        let f = |k: Complex64| -> [Complex64; 3] {
            let w = (k * k + mass * mass).sqrt();
            let e = (-a * w + I * sigma * k * r).exp() * damp(w);
            // k²j₀ → σ k e^{iσkr}/(2ir);  k³j₁ → e^{iσkr}(σk/(2ir²) − k²/(2r))
            let ka = k * e * sigma / (I * (2.0 * r));
            let kc = e * (k / (I * (2.0 * r * r / sigma)) - k * k / (2.0 * r)) / w;
            [ka, ka / w, kc]
        };
        let res = ray(tilt(t + sigma * r), t + sigma * r, &f, scale)?;
        let v = res.value.0;
        for c in 0..3 {
            out[c] += v[c] / scale[c];
        }
        err += res.est_error * (1.0 / scale[0] + 1.0 / scale[1] + 1.0 / scale[2]);
    }
    Ok((out, err))
}

/// As [`scalar_components`] with an explicit tolerance and an optional extra
/// damping `e^{−δω}` folded into the integrand as a separate factor.
pub fn scalar_components_with(
    p: &ModelParams,
    z: SpacetimePoint,
    rel_tol: f64,
    extra_damping: Option<f64>,
) -> Result<ScalarComponents> {
    let m = p.mass;
    let r = z.spatial_norm();
    let delta = extra_damping.unwrap_or(0.0);
    let ([ia, ib, ic], err) = radial_integrals(m, p.eps_eff(), z.t, r, delta, rel_tol)?;
    let v0 = -NORM * ia;
    let beta = m * NORM * ib;
    let mut v = [v0, ZERO, ZERO, ZERO];
    if r > 0.0 {
        for (alpha, comp) in z.spatial().iter().enumerate() {
            v[alpha + 1] = -I * NORM * (comp / r) * ic;
        }
    }
    Ok(ScalarComponents { v, beta, est_error: NORM * err * (1.0 + m) })
}

/// `P^{nε}(x,y)` by momentum quadrature.
pub fn kernel_p(p: &ModelParams, x: SpacetimePoint, y: SpacetimePoint) -> Result<KernelValue> {
    let c = scalar_components(p, x - y)?;
    Ok(KernelValue { matrix: c.to_matrix(), est_error: c.est_error, method: KernelMethod::Quadrature })
}

/// `(K₀(ms), K₁(ms))`, switching to Hankel functions of `q = m√(−s²)` when
/// `ms` sits near the imaginary axis.
fn k01_of_s(m: f64, s2: Complex64) -> Result<(BesselEval, BesselEval)> {
    let s = s2.sqrt();
    let w = s * m;
    if w.norm() <= 2.0 || s2.re > 0.0 {
        return bessel_k01(w);
    }
    let q = (-s2).sqrt() * m;
    if q.im.abs() > 2.0 {
        return bessel_k01(w);
    }
    let half_pi = 0.5 * PI;
    if s2.im < 0.0 {
        // t > 0: ms = −iq, K₀ = (iπ/2)H₀⁽¹⁾(q), K₁ = −(π/2)H₁⁽¹⁾(q)
        let (h0, h1) = hankel01(q, HankelKind::First)?;
        Ok((
            BesselEval { value: I * half_pi * h0.value, est_error: half_pi * h0.est_error },
            BesselEval { value: -half_pi * h1.value, est_error: half_pi * h1.est_error },
        ))
    } else {
        // t < 0: ms = iq, K₀ = −(iπ/2)H₀⁽²⁾(q), K₁ = −(π/2)H₁⁽²⁾(q)
        let (h0, h1) = hankel01(q, HankelKind::Second)?;
        Ok((
            BesselEval { value: -I * half_pi * h0.value, est_error: half_pi * h0.est_error },
            BesselEval { value: -half_pi * h1.value, est_error: half_pi * h1.est_error },
        ))
    }
}

/// Closed-form components of `P^{ε}` for damping length `eps` (`n = 1`) without
/// any cone check. Valid for every real `ξ` when `eps > 0`.
pub fn closed_form_components(mass: f64, eps: f64, xi: SpacetimePoint) -> Result<ScalarComponents> {
    let r2 = xi.x1 * xi.x1 + xi.x2 * xi.x2 + xi.x3 * xi.x3;
    let a = Complex64::new(eps, -xi.t);
    let s2 = a * a + r2;
    let s = s2.sqrt();
    let w = s * mass;
    let (k0, k1) = k01_of_s(mass, s2)?;
    let k2 = k0.value + 2.0 * k1.value / w;
    let m2 = mass * mass;
    let g = -m2 * NORM * k2 / s2;
    let v0 = g * a;
    let v = [v0, I * g * xi.x1, I * g * xi.x2, I * g * xi.x3];
    let beta = m2 * NORM * k1.value / s;
    let rel = (k0.est_error / k0.value.norm().max(1e-300)).max(k1.est_error / k1.value.norm().max(1e-300));
    let size = v.iter().map(|c| c.norm()).sum::<f64>() + beta.norm();
    Ok(ScalarComponents { v, beta, est_error: 4.0 * rel * size })
}

/// `P^{ε}(x,y)` in closed form. Only `n = 1` is accepted; use
/// [`ModelParams::single_power`] for `n = 2`.
pub fn kernel_p_bessel(p: &ModelParams, x: SpacetimePoint, y: SpacetimePoint, cone_tol: f64) -> Result<KernelValue> {
    if p.n != 1 {
        return Err(Error::InvalidParams("closed-form kernel supports n = 1 only; substitute ε ↦ nε".into()));
    }
    let xi = x - y;
    let square = xi.minkowski_square();
    if square.abs() <= cone_tol * xi.euclidean_square() && xi.euclidean_square() > 0.0 {
        return Err(Error::ConeProximity { square, cone_tol });
    }
    let c = closed_form_components(p.mass, p.eps, xi)?;
    Ok(KernelValue { matrix: c.to_matrix(), est_error: c.est_error, method: KernelMethod::Bessel })
}

/// `P^{nε}` at `ξ` by the closed form, valid for any `n` through `ε ↦ nε`.
pub fn kernel_matrix(p: &ModelParams, xi: SpacetimePoint) -> Result<SpinMatrix> {
    Ok(closed_form_components(p.mass, p.eps_eff(), xi)?.to_matrix())
}

/// `‖𝔤_ε²‖_{L¹}` and `‖𝔤_ε²/ω‖_{L¹}`, i.e. `4π∫k²e^{−2εω}dk` and `4π∫k²e^{−2εω}/ω dk`.
pub fn damping_norms(p: &ModelParams) -> Result<(f64, f64)> {
    let m = p.mass;
    let b = 2.0 * p.eps;
    let hints = HalfLineHints::decaying(b);
    let opts = QuadOptions::new(1e-13, 0.0);
    let n1 = integrate_halfline(|k: f64| k * k * (-b * (k * k + m * m).sqrt()).exp(), hints, opts)?;
    let n2 = integrate_halfline(
        |k: f64| {
            let w = (k * k + m * m).sqrt();
            k * k * (-b * w).exp() / w
        },
        hints,
        opts,
    )?;
    Ok((4.0 * PI * n1.value, 4.0 * PI * n2.value))
}

/// Eigenvalues `ν±(ε) = (±‖𝔤_ε²‖ + m‖𝔤_ε²/ω‖)/(2(2π)⁴)` of `P^{2ε}(x,x)`.
pub fn nu_pm(p: &ModelParams) -> Result<(f64, f64)> {
    let (n1, n2) = damping_norms(p)?;
    let c = 1.0 / (2.0 * (2.0 * PI).powi(4));
    Ok((c * (n1 + p.mass * n2), c * (-n1 + p.mass * n2)))
}

/// `tr F^ε(x)` computed as `4π(ν⁺ + ν⁻)` and as `2m(2π)^{−3}‖𝔤_ε²/ω‖`.
pub fn trace_vac_parts(p: &ModelParams) -> Result<(f64, f64)> {
    let (np, nm) = nu_pm(p)?;
    let (_, n2) = damping_norms(p)?;
    Ok((4.0 * PI * (np + nm), 2.0 * p.mass * n2 / (2.0 * PI).powi(3)))
}

/// `tr F^ε(x)`, independent of `x`.
pub fn trace_vac(p: &ModelParams) -> Result<f64> {
    Ok(trace_vac_parts(p)?.1)
}

/// `⟨u^ε_{x,χ}|u^ε_{y,ζ}⟩ = −(2π)^{−1} ≺χ|P^{2ε}(x,y)ζ≻`.
pub fn localized_inner(p: &ModelParams, x: SpacetimePoint, y: SpacetimePoint, chi: &Spinor, zeta: &Spinor) -> Result<Complex64> {
    let pm = kernel_matrix(&p.with_n(2)?, x - y)?;
    Ok(-spin_inner(chi, &(pm * zeta)) / (2.0 * PI))
}

/// `‖u^ε_{x,χ}‖`.
pub fn localized_norm(p: &ModelParams, chi: &Spinor) -> Result<f64> {
    let x = SpacetimePoint::ORIGIN;
    Ok(localized_inner(p, x, x, chi, chi)?.re.max(0.0).sqrt())
}

/// Spinor-valued test function with an explicit four-dimensional Fourier
/// transform `ĝ(k) = ∫ d⁴y e^{ik·y} g(y)` (Minkowski product in the phase).
pub trait SpinorTestFunction: Sync {
    fn value(&self, y: SpacetimePoint) -> Spinor;
    /// `ĝ` at the contravariant four-momentum `k`.
    fn transform(&self, k: [f64; 4]) -> Spinor;
    /// Momentum radius beyond which the transform is negligible.
    fn momentum_cutoff(&self) -> f64;
}

/// `g(y) = e^{−|y − c|²/(2σ²)} χ` with the Euclidean norm on `ℝ⁴`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpinor {
    pub center: SpacetimePoint,
    pub sigma: f64,
    pub spinor: Spinor,
}

impl SpinorTestFunction for GaussianSpinor {
    fn value(&self, y: SpacetimePoint) -> Spinor {
        let d = y - self.center;
        self.spinor * Complex64::from((-d.euclidean_square() / (2.0 * self.sigma * self.sigma)).exp())
    }

    fn transform(&self, k: [f64; 4]) -> Spinor {
        let s2 = self.sigma * self.sigma;
        let ke = k.iter().map(|c| c * c).sum::<f64>();
        let phase = SpacetimePoint::from_array(k).dot(self.center);
        let amp = (2.0 * PI * s2).powi(2) * (-0.5 * s2 * ke).exp();
        self.spinor * Complex64::from_polar(amp, phase)
    }

    fn momentum_cutoff(&self) -> f64 {
        (2.0 * 40.0f64).sqrt() / self.sigma
    }
}

/// `∫ d³k h(k⃗)` over the ball `|k| ≤ kmax` by a spherical product rule, doubled
/// until two successive refinements agree.
fn momentum_ball_integral<const N: usize, F>(h: F, kmax: f64, rel_tol: f64) -> Result<CVec<N>>
where
    F: Fn([f64; 3]) -> CVec<N>,
{
    let mut level = 8usize;
    let mut prev: Option<CVec<N>> = None;
    loop {
        let (kr, wr) = composite_rule(0.0, kmax, level, 8);
        let (ct, wt) = composite_rule(-1.0, 1.0, level / 2, 8);
        let nphi = 4 * level;
        let mut total = CVec::<N>::zero();
        for (k, wk) in kr.iter().zip(&wr) {
            for (c, wc) in ct.iter().zip(&wt) {
                let st = (1.0 - c * c).max(0.0).sqrt();
                for j in 0..nphi {
                    let phi = 2.0 * PI * j as f64 / nphi as f64;
                    let kv = [k * st * phi.cos(), k * st * phi.sin(), k * c];
                    total += h(kv) * (wk * wc * k * k * 2.0 * PI / nphi as f64);
                }
            }
        }
        if let Some(p) = prev {
            let err = (total - p).magnitude();
            if err <= rel_tol * total.magnitude() || level >= 128 {
                if err > rel_tol * total.magnitude() {
                    return Err(Error::NonConvergence { est_error: err, evaluations: 0 });
                }
                return Ok(total);
            }
        }
        prev = Some(total);
        level *= 2;
    }
}

/// `P^{nε}(x, g) = ∫ d⁴y P^{nε}(x,y) g(y)`, computed on the lower mass shell as
/// `∫ d³k/(2(2π)⁴ω) e^{−nεω} e^{−ik·x} (k̸ + m) ĝ(k)`.
pub fn kernel_apply_test<G: SpinorTestFunction>(p: &ModelParams, x: SpacetimePoint, g: &G, rel_tol: f64) -> Result<Spinor> {
    let m = p.mass;
    let ne = p.eps_eff();
    let h = |kv: [f64; 3]| -> CVec<4> {
        let omega = (kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2] + m * m).sqrt();
        let k4 = [-omega, kv[0], kv[1], kv[2]];
        let ghat = g.transform(k4);
        let slash = slash_plus_mass(k4, m);
        let phase = -SpacetimePoint::from_array(k4).dot(x);
        let v = slash * ghat * Complex64::from_polar((-ne * omega).exp() / (2.0 * (2.0 * PI).powi(4) * omega), phase);
        CVec([v[0], v[1], v[2], v[3]])
    };
    let out = momentum_ball_integral(h, g.momentum_cutoff(), rel_tol)?;
    Ok(Spinor::new(out.0[0], out.0[1], out.0[2], out.0[3]))
}

/// `P^{nε}(f, g) = ∫∫ f(x)† P^{nε}(x,y) g(y)`, as the shell integral
/// `∫ d³k/(2(2π)⁴ω) e^{−nεω} f̂(k)† (k̸ + m) ĝ(k)`.
pub fn kernel_pair<F: SpinorTestFunction, G: SpinorTestFunction>(p: &ModelParams, f: &F, g: &G, rel_tol: f64) -> Result<Complex64> {
    let m = p.mass;
    let ne = p.eps_eff();
    let h = |kv: [f64; 3]| -> CVec<1> {
        let omega = (kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2] + m * m).sqrt();
        let k4 = [-omega, kv[0], kv[1], kv[2]];
        let v = f.transform(k4).dotc(&(slash_plus_mass(k4, m) * g.transform(k4)));
        CVec([v * ((-ne * omega).exp() / (2.0 * (2.0 * PI).powi(4) * omega))])
    };
    let kmax = f.momentum_cutoff().min(g.momentum_cutoff());
    Ok(momentum_ball_integral(h, kmax, rel_tol)?.0[0])
}

/// `k̸ + m` for a contravariant four-momentum.
pub fn slash_plus_mass(k: [f64; 4], mass: f64) -> SpinMatrix {
    let mut s = SpinMatrix::identity() * Complex64::from(mass);
    s += GAMMAS[0] * Complex64::from(k[0]);
    for a in 1..4 {
        s -= GAMMAS[a] * Complex64::from(k[a]);
    }
    s
}
