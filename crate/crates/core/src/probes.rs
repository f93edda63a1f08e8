//! ε-scaling experiments and power-law fits.
//!
//! Every scan evaluates one observable on a geometric grid of regularization
//! lengths and fits `log|v| = p·log ε + c` by least squares. Four-dimensional
//! integrals over test-function supports are nested: an adaptive time integral
//! with breakpoints on the null cone `t = ±|x⃗|` inside a tensor Gauss rule over
//! the spatial box, so the `O(ε)`-wide peaks never meet a fixed grid.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::causal::closed_chain_element_13;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::kernel::{kernel_matrix, localized_norm, nu_pm, trace_vac, ModelParams, EPS_MAX};
use crate::minkowski::{negative_energy_projector, spin_inner, SpacetimePoint, Spinor, GAMMAS};
use crate::quadrature::{composite_rule, gauss_legendre, integrate_interval, integrate_line, QuadOptions, QuadResult, QuadValue};
use crate::sandbox::{build_basis, commutator, local_correlation, operator_norm, smeared_operator, BasisSpec, Regularization, TestFunction};

/// Minimum number of grid points behind a fit.
pub const MIN_FIT_POINTS: usize = 6;
/// Default spatial Gauss nodes per axis for nested cone integrals.
pub const DEFAULT_OUTER_NODES: usize = 12;
/// Default relative tolerance of the inner time integrals.
pub const DEFAULT_INNER_TOL: f64 = 1e-9;

/// Geometric grid of regularization lengths, strictly decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsGrid {
    pub values: Vec<f64>,
}

impl EpsGrid {
    /// `count` points from `hi` down to `lo`, geometrically spaced.
    pub fn geometric(hi: f64, lo: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi < EPS_MAX) || count < 2 {
            return Err(Error::InvalidParams(format!(
                "grid needs 0 < lo < hi < {EPS_MAX} and at least two points, got [{lo}, {hi}] × {count}"
            )));
        }
        let ratio = (lo / hi).ln() / (count - 1) as f64;
        let values = (0..count).map(|i| if i + 1 == count { lo } else { hi * (ratio * i as f64).exp() }).collect();
        Ok(Self { values })
    }

    /// Twice the density over the same range.
    pub fn doubled(&self) -> Result<Self> {
        let n = self.values.len();
        Self::geometric(self.values[0], self.values[n - 1], 2 * n - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl Default for EpsGrid {
    /// Twelve points from `1e-1` down to `1e-3`.
    fn default() -> Self {
        Self::geometric(1e-1, 1e-3, 12).expect("valid default grid")
    }
}

/// `v ≈ e^{log_prefactor} ε^{exponent}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub log_prefactor: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least squares on `(log ε, log v)`.
pub fn fit_power_law(eps: &[f64], values: &[f64]) -> Result<PowerLawFit> {
    if eps.len() != values.len() {
        return Err(Error::InvalidParams("grid and values differ in length".into()));
    }
    if eps.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidParams(format!("a fit needs at least {MIN_FIT_POINTS} points, got {}", eps.len())));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::NonPositiveValue(*v));
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(PowerLawFit { exponent: slope, log_prefactor: intercept, r_squared, points: xs.len() })
}

/// One grid point of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub eps: f64,
    pub value: Complex64,
    pub est_error: f64,
}

/// Values of one observable over an ε grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSeries {
    pub label: String,
    pub points: Vec<ScanPoint>,
}

impl ScanSeries {
    fn eps(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.eps).collect()
    }

    /// Fit of `|value|`.
    pub fn fit(&self) -> Result<PowerLawFit> {
        fit_power_law(&self.eps(), &self.points.iter().map(|p| p.value.norm()).collect::<Vec<_>>())
    }

    /// Fit of `|Re value|`.
    pub fn fit_re(&self) -> Result<PowerLawFit> {
        fit_power_law(&self.eps(), &self.points.iter().map(|p| p.value.re.abs()).collect::<Vec<_>>())
    }

    /// Fit of `|Im value|`.
    pub fn fit_im(&self) -> Result<PowerLawFit> {
        fit_power_law(&self.eps(), &self.points.iter().map(|p| p.value.im.abs()).collect::<Vec<_>>())
    }
}

fn real_series(label: &str, grid: &EpsGrid, f: impl Fn(f64) -> Result<f64>) -> Result<ScanSeries> {
    let points = grid
        .values
        .iter()
        .map(|&e| Ok(ScanPoint { eps: e, value: Complex64::from(f(e)?), est_error: 0.0 }))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanSeries { label: label.into(), points })
}

/// `ν⁺(ε)` and `tr_vac(ε)` over the grid.
pub fn nu_scan(mass: f64, grid: &EpsGrid) -> Result<(ScanSeries, ScanSeries)> {
    let nu = real_series("nu_plus", grid, |e| Ok(nu_pm(&ModelParams::new(mass, e, 1)?)?.0))?;
    let tr = real_series("trace_vac", grid, |e| trace_vac(&ModelParams::new(mass, e, 1)?))?;
    Ok((nu, tr))
}

/// `‖u^ε_{0,χ}‖` over the grid.
pub fn localized_norm_scan(mass: f64, chi: &Spinor, grid: &EpsGrid) -> Result<ScanSeries> {
    real_series("localized_norm", grid, |e| localized_norm(&ModelParams::new(mass, e, 1)?, chi))
}

/// `I₀(ε) = ∫_ℝ du/(u² + ε²)²` by real-line quadrature.
pub fn time_integral_i0(eps: f64, rel_tol: f64) -> Result<QuadResult<f64>> {
    let e2 = eps * eps;
    integrate_line(|u: f64| 1.0 / (u * u + e2).powi(2), &[-eps, 0.0, eps], QuadOptions::new(rel_tol, 0.0))
}

/// `I₁(r, ε) = ∫_ℝ (t − r) dt/(((t − iε) − r)²((t + iε) − r)²)` by real-line
/// quadrature, with breakpoints deliberately off the symmetry point.
pub fn time_integral_i1(r: f64, eps: f64, abs_tol: f64) -> Result<QuadResult<Complex64>> {
    let f = |t: f64| {
        let u = t - r;
        let a = Complex64::new(u, -eps);
        let b = Complex64::new(u, eps);
        Complex64::from(u) / (a * a * b * b)
    };
    integrate_line(f, &[r - 0.7 * eps, r + 0.2 * eps, r + 3.1 * eps], QuadOptions::new(0.0, abs_tol))
}

/// `∫ f(x) g(x) d⁴x` over the support box of `f`: adaptive in `t` with
/// breakpoints at `±|x⃗|`, tensor Gauss–Legendre with `outer` nodes per spatial
/// axis. The error estimate adds the inner estimates to the change against a
/// rule with half as many outer nodes.
pub fn cone_integral<V, G>(f: &TestFunction, g: G, outer: usize, inner_tol: f64, exec: Exec) -> Result<QuadResult<V>>
where
    V: QuadValue + Send + Sync + From<f64> + std::ops::Mul<Complex64, Output = V>,
    G: Fn(SpacetimePoint) -> V + Sync,
{
    let dom = f.support_box();
    let level = |nodes: usize| -> Result<(V, f64, usize)> {
        let axes: Vec<(Vec<f64>, Vec<f64>)> = (1..4).map(|a| composite_rule(dom.lo[a], dom.hi[a], 1, nodes)).collect();
        let mut cells = Vec::with_capacity(nodes * nodes * nodes);
        for i in 0..nodes {
            for j in 0..nodes {
                for k in 0..nodes {
                    cells.push(([axes[0].0[i], axes[1].0[j], axes[2].0[k]], axes[0].1[i] * axes[1].1[j] * axes[2].1[k]));
                }
            }
        }
        let parts = exec.try_map(&cells, |(x, w)| -> Result<(V, f64, usize)> {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            let mut breaks = vec![dom.lo[0], dom.hi[0]];
            for c in [-r, r] {
                if c > dom.lo[0] && c < dom.hi[0] {
                    breaks.push(c);
                }
            }
            breaks.sort_by(f64::total_cmp);
            let res = integrate_interval(
                |t: f64| {
                    let p = SpacetimePoint::new(t, x[0], x[1], x[2]);
                    let fv = f.value(p);
                    if fv == Complex64::new(0.0, 0.0) {
                        V::zero()
                    } else {
                        g(p) * fv
                    }
                },
                &breaks,
                QuadOptions::new(inner_tol, 0.0),
            )?;
            Ok((res.value * Complex64::from(*w), res.est_error * w, res.evaluations))
        })?;
        let mut total = V::zero();
        let mut err = 0.0;
        let mut evals = 0;
        for (v, e, n) in parts {
            total += v;
            err += e;
            evals += n;
        }
        Ok((total, err, evals))
    };
    let (fine, fine_err, n1) = level(outer)?;
    let (coarse, _, n2) = level((outer / 2).max(2))?;
    let diff = (fine - coarse).magnitude();
    Ok(QuadResult { value: fine, est_error: fine_err + diff, evaluations: n1 + n2 })
}

/// `∫ f(x) |(t − iε)² − |x⃗|²|^{−4} d⁴x` over the grid.
pub fn asymptotic_integral_lemma(f: &TestFunction, grid: &EpsGrid, outer: usize, exec: Exec) -> Result<ScanSeries> {
    let points = grid
        .values
        .iter()
        .map(|&e| {
            let g = |p: SpacetimePoint| -> Complex64 {
                let t = Complex64::new(p.t, -e);
                let q = t * t - (p.x1 * p.x1 + p.x2 * p.x2 + p.x3 * p.x3);
                Complex64::from(q.norm().powi(-4))
            };
            let res = cone_integral(f, g, outer, DEFAULT_INNER_TOL, exec)?;
            Ok(ScanPoint { eps: e, value: res.value, est_error: res.est_error })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanSeries { label: "lemma_integral".into(), points })
}

/// `∫ f(y) 𝔢₁†A^ε_{0y}𝔢₃ d⁴y` over the grid, from full kernel products.
pub fn asymptotic_integral_theorem(mass: f64, f: &TestFunction, grid: &EpsGrid, outer: usize, exec: Exec) -> Result<ScanSeries> {
    let points = grid
        .values
        .iter()
        .map(|&e| {
            let p = ModelParams::new(mass, e, 2)?;
            let g = |y: SpacetimePoint| closed_chain_element_13(&p, y).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            let res = cone_integral(f, g, outer, DEFAULT_INNER_TOL, exec)?;
            Ok(ScanPoint { eps: e, value: res.value, est_error: res.est_error })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanSeries { label: "theorem_integral".into(), points })
}

/// Which side of `⟨u^ε|A^ε_f u^ε⟩ = ⟨u^{2ε}|A^∘_f u^{2ε}⟩` a detection scan evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMode {
    /// `⟨u^ε_{0,χ}|A^∘_f u^ε_{0,ζ}⟩` with single-ε kernels.
    Unregularized,
    /// `⟨u^ε_{0,χ}|A^ε_f u^ε_{0,ζ}⟩` through `P^{2ε}` kernels.
    Regularized,
}

/// `−∫ f(x) ≺P(x,0)χ|P(x,0)ζ≻ d⁴x` with `P = P^{nε}` for the given parameters.
pub fn detection_value(p: &ModelParams, f: &TestFunction, chi: &Spinor, zeta: &Spinor, outer: usize, exec: Exec) -> Result<QuadResult<Complex64>> {
    let g = |x: SpacetimePoint| -> Complex64 {
        match kernel_matrix(p, x) {
            Ok(k) => -spin_inner(&(k * chi), &(k * zeta)),
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }
    };
    cone_integral(f, g, outer, DEFAULT_INNER_TOL, exec)
}

/// Light-cone detection scan of `⟨u^ε_{0,χ}|A_f u^ε_{0,ζ}⟩`.
#[allow(clippy::too_many_arguments)]
pub fn cone_detection_scan(
    mass: f64,
    f: &TestFunction,
    chi: &Spinor,
    zeta: &Spinor,
    grid: &EpsGrid,
    mode: DetectionMode,
    outer: usize,
    exec: Exec,
) -> Result<ScanSeries> {
    let points = grid
        .values
        .iter()
        .map(|&e| {
            let p = match mode {
                DetectionMode::Unregularized => ModelParams::new(mass, e, 1)?,
                DetectionMode::Regularized => ModelParams::new(mass, e, 2)?,
            };
            let res = detection_value(&p, f, chi, zeta, outer, exec)?;
            Ok(ScanPoint { eps: e, value: res.value, est_error: res.est_error })
        })
        .collect::<Result<Vec<_>>>()?;
    let label = match mode {
        DetectionMode::Unregularized => "cone_detection_unregularized",
        DetectionMode::Regularized => "cone_detection_regularized",
    };
    Ok(ScanSeries { label: label.into(), points })
}

/// Both sides of the bridge identity at one `ε`: the regularized value at `ε`
/// and the unregularized value at `2ε`, with their relative deviation.
pub fn bridge_identity(mass: f64, eps: f64, f: &TestFunction, chi: &Spinor, zeta: &Spinor, outer: usize, exec: Exec) -> Result<(Complex64, Complex64, f64)> {
    let reg = detection_value(&ModelParams::new(mass, eps, 2)?, f, chi, zeta, outer, exec)?.value;
    let unreg = detection_value(&ModelParams::new(mass, 2.0 * eps, 1)?, f, chi, zeta, outer, exec)?.value;
    Ok((reg, unreg, (reg - unreg).norm() / unreg.norm().max(1e-300)))
}

/// `‖[F^ε(x), A^ε_f]‖/‖F^ε(x)‖` in the sandbox. The basis is rebuilt at every
/// grid point from `spec` with its damping length set to that `ε`.
pub fn commutator_scaling_scan(x: SpacetimePoint, f: &TestFunction, grid: &EpsGrid, spec: &BasisSpec, exec: Exec) -> Result<ScanSeries> {
    let points = grid
        .values
        .iter()
        .map(|&e| {
            let basis = build_basis(&BasisSpec { eps_ref: e, ..*spec })?;
            let fx = local_correlation(&basis, e, x)?;
            let a = smeared_operator(&basis, f, Regularization::Eps(e), exec)?;
            let ratio = operator_norm(&commutator(&fx, &a)?) / operator_norm(&fx);
            Ok(ScanPoint { eps: e, value: Complex64::from(ratio), est_error: 0.0 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanSeries { label: "commutator_ratio".into(), points })
}

/// One grid point of [`norm_boundedness_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormProbePoint {
    pub eps: f64,
    /// `‖A^∘_f u^ε_{0,χ}‖`.
    pub image_norm: f64,
    /// `‖u^ε_{0,χ}‖`.
    pub state_norm: f64,
    pub ratio: f64,
}

/// Result of [`norm_boundedness_probe`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormProbe {
    pub points: Vec<NormProbePoint>,
    pub sup_image_norm: f64,
    pub ratio_fit: PowerLawFit,
}

/// `‖A^∘_f u^ε_{0,χ}‖` for `f` supported away from the cone, from
/// `A^∘_f u = 2π P(·, f u)` and `‖P(·, h)‖² = (2π)^{−5} ∫ d³k |p₋γ⁰ĥ(k)|²`.
///
/// `ĥ` is a tensor Gauss sum with `nodes` points per axis over the support of
/// `f`, and the momentum integral is cut at `|k| = nodes / max half-width`, the
/// band this rule resolves. The result is a truncated estimate, adequate for
/// the boundedness question; it is not a converged norm.
pub fn norm_boundedness_probe(mass: f64, f: &TestFunction, chi: &Spinor, grid: &EpsGrid, nodes: usize, exec: Exec) -> Result<NormProbe> {
    let dom = f.support_box();
    let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..4).map(|a| composite_rule(dom.lo[a], dom.hi[a], 1, nodes)).collect();
    let mut xs = Vec::with_capacity(nodes.pow(4));
    for a in 0..nodes {
        for b in 0..nodes {
            for c in 0..nodes {
                for d in 0..nodes {
                    let p = SpacetimePoint::new(axes[0].0[a], axes[1].0[b], axes[2].0[c], axes[3].0[d]);
                    xs.push((p, axes[0].1[a] * axes[1].1[b] * axes[2].1[c] * axes[3].1[d]));
                }
            }
        }
    }
    let half_max = (0..4).map(|a| 0.5 * (dom.hi[a] - dom.lo[a])).fold(0.0, f64::max);
    let kmax = nodes as f64 / half_max;
    let (kr, wr) = composite_rule(0.0, kmax, 1, 2 * nodes);
    let (ct, wt) = gauss_legendre(nodes);
    let nphi = 2 * nodes;
    let mut ks = Vec::with_capacity(kr.len() * ct.len() * nphi);
    for (k, wk) in kr.iter().zip(&wr) {
        for (c, wc) in ct.iter().zip(&wt) {
            let s = (1.0 - c * c).max(0.0).sqrt();
            for j in 0..nphi {
                let phi = 2.0 * PI * j as f64 / nphi as f64;
                ks.push(([k * s * phi.cos(), k * s * phi.sin(), k * c], wk * wc * k * k * 2.0 * PI / nphi as f64));
            }
        }
    }
    let mut points = Vec::with_capacity(grid.len());
    for &e in &grid.values {
        let p = ModelParams::new(mass, e, 1)?;
        let hx: Vec<(SpacetimePoint, Spinor)> = xs
            .iter()
            .map(|(x, w)| Ok((*x, kernel_matrix(&p, *x)? * chi * (f.value(*x) * *w))))
            .collect::<Result<Vec<_>>>()?;
        let parts = exec.map(&ks, |(kv, wk)| {
            let om = (kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2] + mass * mass).sqrt();
            let k4 = SpacetimePoint::new(-om, kv[0], kv[1], kv[2]);
            let hk = hx.iter().fold(Spinor::zeros(), |acc, (x, h)| acc + h * Complex64::from_polar(1.0, k4.dot(*x)));
            let v = negative_energy_projector(*kv, mass) * GAMMAS[0] * hk;
            v.norm_squared() * wk
        });
        let image_sq: f64 = parts.iter().sum::<f64>() / (2.0 * PI).powi(3);
        let image_norm = image_sq.sqrt();
        let state_norm = localized_norm(&p, chi)?;
        points.push(NormProbePoint { eps: e, image_norm, state_norm, ratio: image_norm / state_norm });
    }
    let sup_image_norm = points.iter().map(|p| p.image_norm).fold(0.0, f64::max);
    let ratio_fit = fit_power_law(&grid.values, &points.iter().map(|p| p.ratio).collect::<Vec<_>>())?;
    Ok(NormProbe { points, sup_image_norm, ratio_fit })
}

/// Coefficients of a unit spinor, for callers building `χ` from a basis index.
pub fn unit_spinor(index: usize) -> Result<Spinor> {
    crate::minkowski::basis_spinor(index)
}

/// Coefficient vector with a single nonzero entry.
pub fn unit_vector(n: usize, index: usize) -> DVector<Complex64> {
    DVector::from_fn(n, |i, _| if i == index { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
}
