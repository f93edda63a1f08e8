//! Finite truncation of the negative-energy one-particle space.
//!
//! Momentum space is discretized by a radial Gauss rule times a rotated
//! polyhedral angular rule, with two orthonormal negative-energy polarizations
//! per node. Basis vector `i` is the plane-wave solution
//!
//! ```text
//! u_i(x) = c_i χ_i e^{−ik_i·x},   k_i⁰ = −ω(k⃗_i),   c_i = √w_i / (2π)^{3/2},
//! ```
//!
//! where `w_i` is the `d³k` weight of the node. With this choice the discrete
//! `L²` inner product of initial data makes the basis orthonormal, and every
//! operator below is an explicit `N × N` matrix in it.
//!
//! The radial rule is the Gauss rule of the damped shell measure
//! `k² e^{−2ε₀ω}/ω dk` on `[0, K_max]`, `e^{−2ε₀ω(K_max)} = 1e-12`, built by Lanczos
//! on a fine Gauss–Legendre discretization. For this measure the discrete trace
//! `tr F^{ε₀}(x)` equals `tr_vac(ε₀)` up to round-off.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::kernel::{kernel_apply_test, kernel_matrix, ModelParams, SpinorTestFunction};
use crate::minkowski::{basis_spinor, negative_energy_projector, spin_inner, SpacetimePoint, SpinMatrix, Spinor, GAMMAS};
use crate::quadrature::{composite_rule, gauss_legendre, BoxDomain};

/// Default upper bound on the number of modes.
pub const DEFAULT_MAX_MODES: usize = 128;
/// Relative singular-value threshold for ranks, nullspaces and spans.
pub const RANK_TOL: f64 = 1e-8;
/// Damping level that fixes the radial cutoff `K_max`.
pub const RADIAL_CUTOFF_DAMPING: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Equal-weight angular rule on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularRule {
    Tetrahedron,
    Octahedron,
    Cube,
    Icosahedron,
}

impl AngularRule {
    pub fn nodes(self) -> usize {
        match self {
            AngularRule::Tetrahedron => 4,
            AngularRule::Octahedron => 6,
            AngularRule::Cube => 8,
            AngularRule::Icosahedron => 12,
        }
    }

    fn directions(self) -> Vec<[f64; 3]> {
        let s3 = 1.0 / 3f64.sqrt();
        match self {
            AngularRule::Tetrahedron => vec![[s3, s3, s3], [s3, -s3, -s3], [-s3, s3, -s3], [-s3, -s3, s3]],
            AngularRule::Octahedron => vec![
                [1.0, 0.0, 0.0],
                [-1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, -1.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.0, 0.0, -1.0],
            ],
            AngularRule::Cube => {
                let mut v = Vec::with_capacity(8);
                for a in [-s3, s3] {
                    for b in [-s3, s3] {
                        for c in [-s3, s3] {
                            v.push([a, b, c]);
                        }
                    }
                }
                v
            }
            AngularRule::Icosahedron => {
                let phi = 0.5 * (1.0 + 5f64.sqrt());
                let n = (1.0 + phi * phi).sqrt();
                let (a, b) = (1.0 / n, phi / n);
                let mut v = Vec::with_capacity(12);
                for s1 in [-1.0, 1.0] {
                    for s2 in [-1.0, 1.0] {
                        v.push([0.0, s1 * a, s2 * b]);
                        v.push([s1 * a, s2 * b, 0.0]);
                        v.push([s2 * b, 0.0, s1 * a]);
                    }
                }
                v
            }
        }
    }
}

/// Momentum-grid description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub mass: f64,
    /// Damping length `ε₀` of the radial measure.
    pub eps_ref: f64,
    pub radial_nodes: usize,
    pub angular: AngularRule,
    pub max_modes: usize,
}

impl BasisSpec {
    pub fn new(mass: f64, eps_ref: f64, radial_nodes: usize, angular: AngularRule) -> Self {
        Self { mass, eps_ref, radial_nodes, angular, max_modes: DEFAULT_MAX_MODES }
    }

    /// Picks the smallest angular rule compatible with `modes` and fills the rest radially.
    pub fn for_modes(mass: f64, eps_ref: f64, modes: usize) -> Result<Self> {
        for rule in [AngularRule::Tetrahedron, AngularRule::Octahedron, AngularRule::Cube, AngularRule::Icosahedron] {
            let per_shell = 2 * rule.nodes();
            if modes > 0 && modes.is_multiple_of(per_shell) {
                return Ok(Self::new(mass, eps_ref, modes / per_shell, rule));
            }
        }
        Err(Error::InvalidParams(format!("mode count {modes} is not a multiple of 8, 12, 16 or 24")))
    }

    pub fn mode_count(&self) -> usize {
        2 * self.radial_nodes * self.angular.nodes()
    }

    /// Radius with `e^{−2ε₀ω} = 1e-12`.
    pub fn k_max(&self) -> f64 {
        let w = -RADIAL_CUTOFF_DAMPING.ln() / (2.0 * self.eps_ref);
        (w * w - self.mass * self.mass).max(0.0).sqrt()
    }
}

/// One basis vector: momentum node, `d³k` weight and polarization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub momentum: [f64; 3],
    pub weight: f64,
    pub polarization: Spinor,
}

impl Mode {
    pub fn omega(&self, mass: f64) -> f64 {
        let k = self.momentum;
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + mass * mass).sqrt()
    }

    /// Contravariant on-shell four-momentum with `k⁰ = −ω`.
    pub fn four_momentum(&self, mass: f64) -> SpacetimePoint {
        let k = self.momentum;
        SpacetimePoint::new(-self.omega(mass), k[0], k[1], k[2])
    }

    /// `c = √w/(2π)^{3/2}`.
    pub fn coefficient(&self) -> f64 {
        (self.weight / (2.0 * PI).powi(3)).sqrt()
    }
}

/// Orthonormal truncated basis of negative-energy solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeBasis {
    pub spec: BasisSpec,
    pub modes: Vec<Mode>,
}

/// Gauss rule for `∫₀^K f(k) dμ(k)` given a fine discretization of `μ`, by
/// Lanczos with full reorthogonalization followed by Golub–Welsch.
fn gauss_from_discrete(x: &[f64], w: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = x.len();
    if n == 0 || n > m / 4 {
        return Err(Error::InvalidParams(format!("radial node count {n} out of range")));
    }
    let mu0: f64 = w.iter().sum();
    let mut q: Vec<Vec<f64>> = vec![w.iter().map(|v| (v / mu0).sqrt()).collect()];
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    for j in 0..n {
        let mut v: Vec<f64> = q[j].iter().zip(x).map(|(a, b)| a * b).collect();
        let a: f64 = v.iter().zip(&q[j]).map(|(p, r)| p * r).sum();
        alpha.push(a);
        if j + 1 == n {
            break;
        }
        for _ in 0..2 {
            for qk in &q {
                let c: f64 = v.iter().zip(qk).map(|(p, r)| p * r).sum();
                v.iter_mut().zip(qk).for_each(|(p, r)| *p -= c * r);
            }
        }
        let b = v.iter().map(|p| p * p).sum::<f64>().sqrt();
        if !(b > 0.0) {
            return Err(Error::DegenerateGrid("Lanczos breakdown in radial rule".into()));
        }
        beta.push(b);
        q.push(v.into_iter().map(|p| p / b).collect());
    }
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jac[(i, i)] = alpha[i];
        if i + 1 < n {
            jac[(i, i + 1)] = beta[i];
            jac[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// Rotation about the fixed axis `(1, 2, 3)/√14` by angle `theta`.
fn rotate(v: [f64; 3], theta: f64) -> [f64; 3] {
    let n = 14f64.sqrt();
    let a = [1.0 / n, 2.0 / n, 3.0 / n];
    let (s, c) = theta.sin_cos();
    let dot = a[0] * v[0] + a[1] * v[1] + a[2] * v[2];
    let cross = [a[1] * v[2] - a[2] * v[1], a[2] * v[0] - a[0] * v[2], a[0] * v[1] - a[1] * v[0]];
    std::array::from_fn(|i| v[i] * c + cross[i] * s + a[i] * dot * (1.0 - c))
}

/// Two orthonormal spinors spanning the range of `p₋(k⃗)`: `p₋𝔢₃, p₋𝔢₄` after
/// Gram–Schmidt, or `p₋𝔢₁, p₋𝔢₂` if that pair degenerates.
fn polarizations(k: [f64; 3], mass: f64) -> Result<[Spinor; 2]> {
    let proj = negative_energy_projector(k, mass);
    for (a, b) in [(3, 4), (1, 2)] {
        let u = proj * basis_spinor(a)?;
        let v = proj * basis_spinor(b)?;
        let nu = u.norm();
        if nu < 1e-6 {
            continue;
        }
        let u = u / Complex64::from(nu);
        let v = v - u * u.dotc(&v);
        let nv = v.norm();
        if nv < 1e-6 {
            continue;
        }
        return Ok([u, v / Complex64::from(nv)]);
    }
    Err(Error::DegenerateGrid(format!("projector range degenerate at k = {k:?}")))
}

/// Builds the basis: radial Gauss nodes of the damped shell measure times the
/// angular rule, rotated by a golden-angle step from shell to shell.
pub fn build_basis(spec: &BasisSpec) -> Result<ModeBasis> {
    let n = spec.mode_count();
    if n > spec.max_modes {
        return Err(Error::InvalidParams(format!("{n} modes exceed the configured maximum {}", spec.max_modes)));
    }
    if !(spec.mass > 0.0) || !(spec.eps_ref > 0.0) || spec.radial_nodes == 0 {
        return Err(Error::InvalidParams("basis needs mass > 0, eps_ref > 0 and at least one radial node".into()));
    }
    let m = spec.mass;
    let b = 2.0 * spec.eps_ref;
    let (fx, fw) = composite_rule(0.0, spec.k_max(), 64, 20);
    let dens: Vec<f64> = fx
        .iter()
        .zip(&fw)
        .map(|(k, w)| {
            let om = (k * k + m * m).sqrt();
            w * k * k * (-b * om).exp() / om
        })
        .collect();
    let (kr, wr) = gauss_from_discrete(&fx, &dens, spec.radial_nodes)?;
    let dirs = spec.angular.directions();
    let w_ang = 4.0 * PI / dirs.len() as f64;
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut modes = Vec::with_capacity(n);
    for (shell, (k, w)) in kr.iter().zip(&wr).enumerate() {
        let om = (k * k + m * m).sqrt();
        // dμ weight back to k² dk.
        let w_k2 = w * om * (b * om).exp();
        for d in &dirs {
            let dir = rotate(*d, golden * (shell as f64 + 0.5));
            let mom = dir.map(|c| c * k);
            for pol in polarizations(mom, m)? {
                modes.push(Mode { momentum: mom, weight: w_k2 * w_ang, polarization: pol });
            }
        }
    }
    // Modes come in polarization pairs; compare one representative per node.
    let nodes: Vec<[f64; 3]> = modes.iter().step_by(2).map(|md| md.momentum).collect();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            let d: f64 = (0..3).map(|c| (a[c] - b[c]).powi(2)).sum();
            if d.sqrt() <= 1e-12 * (1.0 + a.iter().map(|c| c.abs()).sum::<f64>()) {
                return Err(Error::DegenerateGrid(format!("duplicate momentum {a:?}")));
            }
        }
    }
    Ok(ModeBasis { spec: *spec, modes })
}

impl ModeBasis {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.spec.mass
    }

    /// `u_i(x)`.
    pub fn mode_value(&self, i: usize, x: SpacetimePoint) -> Spinor {
        let md = &self.modes[i];
        let phase = -md.four_momentum(self.mass()).dot(x);
        md.polarization * Complex64::from_polar(md.coefficient(), phase)
    }

    /// `Σ_i a_i u_i(x)`.
    pub fn evaluate(&self, coeffs: &DVector<Complex64>, x: SpacetimePoint) -> Spinor {
        (0..self.len()).fold(Spinor::zeros(), |acc, i| acc + self.mode_value(i, x) * coeffs[i])
    }

    /// `(R_ε u)(x)` for the coefficient vector `a` of `u`.
    pub fn evaluate_regularized(&self, coeffs: &DVector<Complex64>, eps: f64, x: SpacetimePoint) -> Spinor {
        (0..self.len()).fold(Spinor::zeros(), |acc, i| acc + self.mode_value(i, x) * (coeffs[i] * self.damping(i, eps)))
    }

    /// `e^{−εω(k_i)}`.
    pub fn damping(&self, i: usize, eps: f64) -> f64 {
        (-eps * self.modes[i].omega(self.mass())).exp()
    }

    /// Discrete Gram matrix `Σ_nodes w ψ_i(k)†ψ_j(k)` of the initial data.
    pub fn gram(&self) -> DMatrix<Complex64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| {
            let (a, b) = (&self.modes[i], &self.modes[j]);
            if a.momentum == b.momentum {
                a.polarization.dotc(&b.polarization)
            } else {
                ZERO
            }
        })
    }

    /// Spin matrix rows `χ_i†γ⁰χ_j`.
    fn spin_products(&self) -> DMatrix<Complex64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| spin_inner(&self.modes[i].polarization, &self.modes[j].polarization))
    }

    /// Discrete `tr F^ε(x) = 2m(2π)^{−3} Σ_nodes w e^{−2εω}/ω`.
    pub fn discrete_trace_vac(&self, eps: f64) -> f64 {
        (0..self.len())
            .map(|i| {
                let md = &self.modes[i];
                -md.coefficient().powi(2) * self.damping(i, eps).powi(2) * spin_inner(&md.polarization, &md.polarization).re
            })
            .sum()
    }
}

/// Role of an operator matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorTag {
    LocalCorrelation,
    Regularization,
    Translation,
    Smeared,
    Commutator,
    Generic,
}

/// An `N × N` complex matrix in the mode basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub data: DMatrix<Complex64>,
    pub tag: OperatorTag,
}

impl OperatorMatrix {
    pub fn new(data: DMatrix<Complex64>, tag: OperatorTag) -> Self {
        Self { data, tag }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// `‖A − A†‖/‖A‖` in Frobenius norm.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.data.norm();
        if n == 0.0 {
            0.0
        } else {
            (&self.data - self.data.adjoint()).norm() / n
        }
    }
}

/// Regularization parameter of a smeared operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularization {
    Eps(f64),
    Unregularized,
}

/// `R_ε = diag(e^{−εω(k_i)})`.
pub fn regularization_matrix(basis: &ModeBasis, eps: f64) -> Result<OperatorMatrix> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidParams(format!("epsilon must be non-negative, got {eps}")));
    }
    let d = DVector::from_fn(basis.len(), |i, _| Complex64::from(basis.damping(i, eps)));
    Ok(OperatorMatrix::new(DMatrix::from_diagonal(&d), OperatorTag::Regularization))
}

/// `U_a = diag(e^{−ik_i·a})`, so that `(U_a u)(x) = u(x − a)`.
pub fn translation_matrix(basis: &ModeBasis, a: SpacetimePoint) -> OperatorMatrix {
    let m = basis.mass();
    let d = DVector::from_fn(basis.len(), |i, _| Complex64::from_polar(1.0, -basis.modes[i].four_momentum(m).dot(a)));
    OperatorMatrix::new(DMatrix::from_diagonal(&d), OperatorTag::Translation)
}

/// `⟨u_i|F^ε(x)u_j⟩ = −≺R_ε u_i(x)|R_ε u_j(x)≻`.
pub fn local_correlation(basis: &ModeBasis, eps: f64, x: SpacetimePoint) -> Result<OperatorMatrix> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParams(format!("epsilon must be positive, got {eps}")));
    }
    let cols: Vec<Spinor> = (0..basis.len()).map(|i| basis.mode_value(i, x) * Complex64::from(basis.damping(i, eps))).collect();
    let n = basis.len();
    Ok(OperatorMatrix::new(DMatrix::from_fn(n, n, |i, j| -spin_inner(&cols[i], &cols[j])), OperatorTag::LocalCorrelation))
}

/// Local correlation operators at many points.
pub fn local_correlations(basis: &ModeBasis, eps: f64, points: &[SpacetimePoint], exec: Exec) -> Result<Vec<OperatorMatrix>> {
    exec.try_map(points, |x| local_correlation(basis, eps, *x))
}

/// The truncated kernel `P_N^{nε}(x,y) = −(2π)^{−1} Σ_i c_i² e^{−nεω_i} χ_iχ_i†γ⁰ e^{−ik_i·(x−y)}`,
/// the quadrature image of the continuum kernel in this basis.
pub fn truncated_kernel(basis: &ModeBasis, eps: f64, n: u8, x: SpacetimePoint, y: SpacetimePoint) -> SpinMatrix {
    let m = basis.mass();
    let xi = x - y;
    let mut out = SpinMatrix::zeros();
    for md in &basis.modes {
        let om = md.omega(m);
        let amp = md.coefficient().powi(2) * (-f64::from(n) * eps * om).exp();
        let phase = -md.four_momentum(m).dot(xi);
        out += md.polarization * md.polarization.adjoint() * Complex64::from_polar(amp, phase);
    }
    out * GAMMAS[0] * Complex64::from(-1.0 / (2.0 * PI))
}

/// Number of nonzero, positive and negative eigenvalues of a Hermitian operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signature {
    pub rank: usize,
    pub positive: usize,
    pub negative: usize,
    /// Nonzero eigenvalues in ascending order.
    pub nonzero: Vec<f64>,
}

/// Eigenvalue signature of the Hermitian part of `a`; eigenvalues below
/// `rel_tol·max|λ|` count as zero.
pub fn signature(a: &OperatorMatrix, rel_tol: f64) -> Signature {
    let h = (&a.data + a.data.adjoint()) * Complex64::from(0.5);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    let max = ev.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let nonzero: Vec<f64> = ev.into_iter().filter(|v| v.abs() > rel_tol * max).collect();
    Signature {
        rank: nonzero.len(),
        positive: nonzero.iter().filter(|v| **v > 0.0).count(),
        negative: nonzero.iter().filter(|v| **v < 0.0).count(),
        nonzero,
    }
}

/// Test functions on `ℝ⁴` with a four-dimensional Fourier transform
/// `𝔉[f](q) = ∫ f(x) e^{iq·x} d⁴x` (Minkowski product in the phase).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// `A e^{−|x−c|²/(2σ²)}` with the Euclidean norm; transform in closed form.
    Gaussian { center: [f64; 4], sigma: f64, amplitude: Complex64 },
    /// `A Π_a (1 − s_a²)⁴` with `s_a = (x_a − c_a)/h_a` on the box `|s_a| ≤ 1`.
    Bump { center: [f64; 4], half_widths: [f64; 4], amplitude: Complex64 },
    Sum(Vec<TestFunction>),
}

/// `∫_{−1}^{1} (1 − s²)⁴ ds`.
const BUMP_MASS_1D: f64 = 256.0 / 315.0;
/// Nominal support radius of a Gaussian in units of `σ`.
const GAUSSIAN_SUPPORT_SIGMAS: f64 = 6.0;

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// `∫_{−1}^{1} (1 − s²)⁴ e^{iνs} ds` by composite Gauss–Legendre with panels
/// scaled to the oscillation.
pub fn bump_transform_1d(nu: f64) -> Complex64 {
    let (x, w) = gl16();
    let panels = (nu.abs() / 4.0).ceil() as usize + 1;
    let h = 2.0 / panels as f64;
    let mut sum = ZERO;
    for p in 0..panels {
        let lo = -1.0 + p as f64 * h;
        for (xi, wi) in x.iter().zip(w) {
            let s = lo + 0.5 * h * (xi + 1.0);
            sum += Complex64::from_polar((1.0 - s * s).powi(4) * wi, nu * s);
        }
    }
    sum * (0.5 * h)
}

impl TestFunction {
    pub fn gaussian(center: SpacetimePoint, sigma: f64) -> Self {
        TestFunction::Gaussian { center: center.to_array(), sigma, amplitude: Complex64::new(1.0, 0.0) }
    }

    /// Bump with unit `L¹` norm and half-width `half` on every axis.
    pub fn unit_bump(center: SpacetimePoint, half: f64) -> Self {
        TestFunction::Bump {
            center: center.to_array(),
            half_widths: [half; 4],
            amplitude: Complex64::from(1.0 / (half * BUMP_MASS_1D).powi(4)),
        }
    }

    /// Bump with peak value 1 filling `dom`.
    pub fn bump_on(dom: &BoxDomain) -> Self {
        let c = dom.center();
        TestFunction::Bump {
            center: c,
            half_widths: std::array::from_fn(|i| 0.5 * (dom.hi[i] - dom.lo[i])),
            amplitude: Complex64::new(1.0, 0.0),
        }
    }

    pub fn value(&self, x: SpacetimePoint) -> Complex64 {
        let xa = x.to_array();
        match self {
            TestFunction::Gaussian { center, sigma, amplitude } => {
                let d2: f64 = (0..4).map(|i| (xa[i] - center[i]).powi(2)).sum();
                amplitude * (-d2 / (2.0 * sigma * sigma)).exp()
            }
            TestFunction::Bump { center, half_widths, amplitude } => {
                let mut v = *amplitude;
                for i in 0..4 {
                    let s = (xa[i] - center[i]) / half_widths[i];
                    if s.abs() >= 1.0 {
                        return ZERO;
                    }
                    v *= (1.0 - s * s).powi(4);
                }
                v
            }
            TestFunction::Sum(parts) => parts.iter().map(|f| f.value(x)).sum(),
        }
    }

    /// `𝔉[f](q)` at the contravariant four-vector `q`.
    pub fn fourier(&self, q: SpacetimePoint) -> Complex64 {
        match self {
            TestFunction::Gaussian { center, sigma, amplitude } => {
                let s2 = sigma * sigma;
                let amp = (2.0 * PI * s2).powi(2) * (-0.5 * s2 * q.euclidean_square()).exp();
                amplitude * Complex64::from_polar(amp, q.dot(SpacetimePoint::from_array(*center)))
            }
            TestFunction::Bump { center, half_widths, amplitude } => {
                // Axis frequencies of q·x = q⁰t − q⃗·x⃗.
                let nu = [q.t, -q.x1, -q.x2, -q.x3];
                let mut v = amplitude * Complex64::from_polar(1.0, q.dot(SpacetimePoint::from_array(*center)));
                for i in 0..4 {
                    v *= bump_transform_1d(nu[i] * half_widths[i]) * half_widths[i];
                }
                v
            }
            TestFunction::Sum(parts) => parts.iter().map(|f| f.fourier(q)).sum(),
        }
    }

    /// `∫ f d⁴x`.
    pub fn integral(&self) -> Complex64 {
        self.fourier(SpacetimePoint::ORIGIN)
    }

    /// Upper bound for `‖f‖_∞`.
    pub fn sup_bound(&self) -> f64 {
        match self {
            TestFunction::Gaussian { amplitude, .. } | TestFunction::Bump { amplitude, .. } => amplitude.norm(),
            TestFunction::Sum(parts) => parts.iter().map(|f| f.sup_bound()).sum(),
        }
    }

    /// Axis-aligned box containing the support (nominal for Gaussians).
    pub fn support_box(&self) -> BoxDomain {
        match self {
            TestFunction::Gaussian { center, sigma, .. } => BoxDomain {
                lo: center.map(|c| c - GAUSSIAN_SUPPORT_SIGMAS * sigma),
                hi: center.map(|c| c + GAUSSIAN_SUPPORT_SIGMAS * sigma),
            },
            TestFunction::Bump { center, half_widths, .. } => BoxDomain {
                lo: std::array::from_fn(|i| center[i] - half_widths[i]),
                hi: std::array::from_fn(|i| center[i] + half_widths[i]),
            },
            TestFunction::Sum(parts) => {
                let mut b = parts[0].support_box();
                for f in &parts[1..] {
                    let o = f.support_box();
                    for i in 0..4 {
                        b.lo[i] = b.lo[i].min(o.lo[i]);
                        b.hi[i] = b.hi[i].max(o.hi[i]);
                    }
                }
                b
            }
        }
    }

    /// Upper bound for `∫ |f|` outside [`TestFunction::support_box`]; zero for bumps.
    pub fn leakage_bound(&self) -> f64 {
        match self {
            TestFunction::Gaussian { sigma, amplitude, .. } => {
                // The mass outside the cube is below the mass outside the inscribed ball.
                let r2 = GAUSSIAN_SUPPORT_SIGMAS * GAUSSIAN_SUPPORT_SIGMAS;
                amplitude.norm() * (2.0 * PI * sigma * sigma).powi(2) * (1.0 + 0.5 * r2) * (-0.5 * r2).exp()
            }
            TestFunction::Bump { .. } => 0.0,
            TestFunction::Sum(parts) => parts.iter().map(|f| f.leakage_bound()).sum(),
        }
    }

    /// `x ↦ f(x − a)`.
    pub fn shifted(&self, a: SpacetimePoint) -> Self {
        let aa = a.to_array();
        match self {
            TestFunction::Gaussian { center, sigma, amplitude } => {
                TestFunction::Gaussian { center: std::array::from_fn(|i| center[i] + aa[i]), sigma: *sigma, amplitude: *amplitude }
            }
            TestFunction::Bump { center, half_widths, amplitude } => TestFunction::Bump {
                center: std::array::from_fn(|i| center[i] + aa[i]),
                half_widths: *half_widths,
                amplitude: *amplitude,
            },
            TestFunction::Sum(parts) => TestFunction::Sum(parts.iter().map(|f| f.shifted(a)).collect()),
        }
    }

    /// `c·f`.
    pub fn scaled(&self, c: Complex64) -> Self {
        match self {
            TestFunction::Gaussian { center, sigma, amplitude } => {
                TestFunction::Gaussian { center: *center, sigma: *sigma, amplitude: amplitude * c }
            }
            TestFunction::Bump { center, half_widths, amplitude } => {
                TestFunction::Bump { center: *center, half_widths: *half_widths, amplitude: amplitude * c }
            }
            TestFunction::Sum(parts) => TestFunction::Sum(parts.iter().map(|f| f.scaled(c)).collect()),
        }
    }

    /// `f̄`.
    pub fn conj(&self) -> Self {
        match self {
            TestFunction::Gaussian { center, sigma, amplitude } => {
                TestFunction::Gaussian { center: *center, sigma: *sigma, amplitude: amplitude.conj() }
            }
            TestFunction::Bump { center, half_widths, amplitude } => {
                TestFunction::Bump { center: *center, half_widths: *half_widths, amplitude: amplitude.conj() }
            }
            TestFunction::Sum(parts) => TestFunction::Sum(parts.iter().map(|f| f.conj()).collect()),
        }
    }
}

/// `A_f = ∫ f(x) F(x) d⁴x` with entries `−(χ_i†γ⁰χ_j) c_i c_j 𝔉[f](k_i − k_j)`, times
/// `e^{−ε(ω_i+ω_j)}` when regularized.
pub fn smeared_operator(basis: &ModeBasis, f: &TestFunction, reg: Regularization, exec: Exec) -> Result<OperatorMatrix> {
    let damp = match reg {
        Regularization::Eps(e) if e > 0.0 => e,
        Regularization::Eps(e) => return Err(Error::InvalidParams(format!("epsilon must be positive, got {e}"))),
        Regularization::Unregularized => 0.0,
    };
    let m = basis.mass();
    let n = basis.len();
    let spin = basis.spin_products();
    let k4: Vec<SpacetimePoint> = basis.modes.iter().map(|md| md.four_momentum(m)).collect();
    let amp: Vec<f64> = (0..n).map(|i| basis.modes[i].coefficient() * basis.damping(i, damp)).collect();
    let rows = exec.map_range(n, |i| {
        (0..n).map(|j| -spin[(i, j)] * (amp[i] * amp[j]) * f.fourier(k4[i] - k4[j])).collect::<Vec<_>>()
    });
    let data = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(OperatorMatrix::new(data, OperatorTag::Smeared))
}

/// `AB − BA`.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidParams(format!("dimension mismatch {} vs {}", a.dim(), b.dim())));
    }
    Ok(OperatorMatrix::new(&a.data * &b.data - &b.data * &a.data, OperatorTag::Commutator))
}

/// Largest singular value.
pub fn operator_norm(a: &OperatorMatrix) -> f64 {
    a.data.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// `(matrix path, truncated-kernel path, continuum-kernel path)` of
/// `⟨u|[F^ε(x), F^ε(y)]u⟩ = −2(2π)i Im ≺R_ε u(x)|P^{2ε}(x,y) R_ε u(y)≻`.
pub fn commutator_expectation(
    basis: &ModeBasis,
    eps: f64,
    x: SpacetimePoint,
    y: SpacetimePoint,
    u: &DVector<Complex64>,
) -> Result<(Complex64, Complex64, Complex64)> {
    let fx = local_correlation(basis, eps, x)?;
    let fy = local_correlation(basis, eps, y)?;
    let c = commutator(&fx, &fy)?;
    let matrix = u.dotc(&(&c.data * u));
    let rx = basis.evaluate_regularized(u, eps, x);
    let ry = basis.evaluate_regularized(u, eps, y);
    let two_pi_i = Complex64::new(0.0, -2.0 * 2.0 * PI);
    let trunc = two_pi_i * spin_inner(&rx, &(truncated_kernel(basis, eps, 2, x, y) * ry)).im;
    let p2 = ModelParams::new(basis.mass(), eps, 2)?;
    let cont = two_pi_i * spin_inner(&rx, &(kernel_matrix(&p2, x - y)? * ry)).im;
    Ok((matrix, trunc, cont))
}

/// Diagnostics of a commutant computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutantReport {
    pub dimension: usize,
    /// Unknowns of the real Hermitian formulation (`N²`).
    pub unknowns: usize,
    /// Largest singular value counted as zero, relative to the largest.
    pub largest_null: f64,
    /// Smallest singular value counted as nonzero, relative to the largest.
    pub smallest_kept: f64,
}

/// Index map for Hermitian `N × N` matrices as `N²` real coordinates:
/// diagonal entries, then `√2 Re`, `√2 Im` of the upper triangle.
fn hermitian_coords(h: &DMatrix<Complex64>, out: &mut [f64]) {
    let n = h.nrows();
    let mut k = 0;
    for i in 0..n {
        out[k] = h[(i, i)].re;
        k += 1;
    }
    let s = 2f64.sqrt();
    for i in 0..n {
        for j in i + 1..n {
            out[k] = s * h[(i, j)].re;
            out[k + 1] = s * h[(i, j)].im;
            k += 2;
        }
    }
}

/// Dimension of `{Q : [Q, F_k] = 0 ∀k}` for Hermitian `F_k`.
///
/// The commutant of a set of Hermitian matrices is closed under `Q ↦ Q†`, so its
/// complex dimension equals the real dimension of its Hermitian part. That part
/// solves a real `kN² × N²` system `i[B_a, F_k]·q = 0`; its rank is read off
/// the singular values of the `R` factor of a QR decomposition.
pub fn commutant_dimension(ops: &[OperatorMatrix], rel_tol: f64, exec: Exec) -> Result<CommutantReport> {
    let first = ops.first().ok_or_else(|| Error::InvalidParams("commutant needs at least one operator".into()))?;
    let n = first.dim();
    if ops.iter().any(|o| o.dim() != n) {
        return Err(Error::InvalidParams("operators must share one dimension".into()));
    }
    let unknowns = n * n;
    // Hermitian basis element `a` as a list of (row, col, value) entries.
    let mut basis_elems: Vec<Vec<(usize, usize, Complex64)>> = Vec::with_capacity(unknowns);
    for i in 0..n {
        basis_elems.push(vec![(i, i, Complex64::new(1.0, 0.0))]);
    }
    let r = 1.0 / 2f64.sqrt();
    for i in 0..n {
        for j in i + 1..n {
            basis_elems.push(vec![(i, j, Complex64::new(r, 0.0)), (j, i, Complex64::new(r, 0.0))]);
            basis_elems.push(vec![(i, j, Complex64::new(0.0, -r)), (j, i, Complex64::new(0.0, r))]);
        }
    }
    let blocks = exec.map(ops, |op| {
        let f = &op.data / Complex64::from(op.data.norm().max(1e-300));
        let mut block = DMatrix::<f64>::zeros(unknowns, unknowns);
        let mut scratch = DMatrix::<Complex64>::zeros(n, n);
        let mut coords = vec![0.0; unknowns];
        for (a, elem) in basis_elems.iter().enumerate() {
            scratch.fill(ZERO);
            for &(p, q, v) in elem {
                // i[E_pq, F]: row p gains i·v·F[q, :], column q loses i·v·F[:, p].
                for c in 0..n {
                    scratch[(p, c)] += I * v * f[(q, c)];
                    scratch[(c, q)] -= I * v * f[(c, p)];
                }
            }
            hermitian_coords(&scratch, &mut coords);
            block.column_mut(a).copy_from_slice(&coords);
        }
        block
    });
    let mut stacked = DMatrix::<f64>::zeros(unknowns * ops.len(), unknowns);
    for (k, b) in blocks.iter().enumerate() {
        stacked.view_mut((k * unknowns, 0), (unknowns, unknowns)).copy_from(b);
    }
    let rmat = stacked.qr().r();
    let mut sv: Vec<f64> = rmat.singular_values().iter().cloned().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let max = sv[0].max(1e-300);
    let kept = sv.iter().filter(|s| **s > rel_tol * max).count();
    Ok(CommutantReport {
        dimension: unknowns - kept,
        unknowns,
        largest_null: if kept < sv.len() { sv[kept] / max } else { 0.0 },
        smallest_kept: if kept > 0 { sv[kept - 1] / max } else { 0.0 },
    })
}

/// Diagnostics of a span check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanReport {
    pub rank: usize,
    pub dimension: usize,
    pub full: bool,
    /// Smallest singular value of the stacked ranges relative to the largest.
    pub smallest_relative: f64,
}

/// Whether the ranges of `ops` together span the truncated space.
pub fn span_check(ops: &[OperatorMatrix], rel_tol: f64) -> Result<SpanReport> {
    let first = ops.first().ok_or_else(|| Error::InvalidParams("span check needs at least one operator".into()))?;
    let n = first.dim();
    let mut stacked = DMatrix::<Complex64>::zeros(n, n * ops.len());
    for (k, o) in ops.iter().enumerate() {
        if o.dim() != n {
            return Err(Error::InvalidParams("operators must share one dimension".into()));
        }
        stacked.view_mut((0, k * n), (n, n)).copy_from(&(&o.data / Complex64::from(o.data.norm().max(1e-300))));
    }
    let sv = stacked.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let rank = sv.iter().filter(|s| **s > rel_tol * max).count();
    Ok(SpanReport { rank, dimension: n, full: rank == n, smallest_relative: min / max })
}

/// One step of a Dirac-sequence run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracStep {
    pub n: usize,
    pub gap: f64,
    pub relative_gap: f64,
}

/// `‖A_{f_n} − F^ε(x₀)‖` for unit-`L¹` bumps of half-width `1/n` centred at `x₀`.
pub fn dirac_sequence_convergence(
    basis: &ModeBasis,
    eps: f64,
    x0: SpacetimePoint,
    ns: &[usize],
    exec: Exec,
) -> Result<Vec<DiracStep>> {
    let f0 = local_correlation(basis, eps, x0)?;
    let norm0 = operator_norm(&f0);
    ns.iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::InvalidParams("sequence index must be positive".into()));
            }
            let f = TestFunction::unit_bump(x0, 1.0 / n as f64);
            let a = smeared_operator(basis, &f, Regularization::Eps(eps), exec)?;
            let gap = operator_norm(&OperatorMatrix::new(&a.data - &f0.data, OperatorTag::Generic));
            Ok(DiracStep { n, gap, relative_gap: gap / norm0 })
        })
        .collect()
}

/// `∫_Ω u_i(x)†u_j(x) d⁴x` over a box.
pub fn box_gram(basis: &ModeBasis, dom: &BoxDomain) -> DMatrix<Complex64> {
    let m = basis.mass();
    let n = basis.len();
    let k4: Vec<SpacetimePoint> = basis.modes.iter().map(|md| md.four_momentum(m)).collect();
    let c = SpacetimePoint::from_array(dom.center());
    let half: [f64; 4] = std::array::from_fn(|i| 0.5 * (dom.hi[i] - dom.lo[i]));
    DMatrix::from_fn(n, n, |i, j| {
        let q = k4[i] - k4[j];
        let nu = [q.t, -q.x1, -q.x2, -q.x3];
        let mut v = Complex64::from_polar(1.0, q.dot(c));
        for a in 0..4 {
            let z = nu[a] * half[a];
            let sinc = if z.abs() < 1e-8 { 1.0 - z * z / 6.0 } else { z.sin() / z };
            v *= 2.0 * half[a] * sinc;
        }
        let (mi, mj) = (&basis.modes[i], &basis.modes[j]);
        v * mi.coefficient() * mj.coefficient() * mi.polarization.dotc(&mj.polarization)
    })
}

/// `f · R_ε u_{i₀}` as a spinor test function with transform
/// `c g χ 𝔉[f](q − k_{i₀})`.
struct ModulatedMode<'a> {
    f: &'a TestFunction,
    k: SpacetimePoint,
    spinor: Spinor,
    cutoff: f64,
}

impl SpinorTestFunction for ModulatedMode<'_> {
    fn value(&self, y: SpacetimePoint) -> Spinor {
        self.spinor * (self.f.value(y) * Complex64::from_polar(1.0, -self.k.dot(y)))
    }

    fn transform(&self, q: [f64; 4]) -> Spinor {
        self.spinor * self.f.fourier(SpacetimePoint::from_array(q) - self.k)
    }

    fn momentum_cutoff(&self) -> f64 {
        self.cutoff
    }
}

/// Largest relative deviation between `(A_f^ε u_{i₀})(x)` from the matrix and
/// `2π P^ε(x, f·R_ε u_{i₀})` from the continuum kernel, over the sample points.
/// Only Gaussian `f` is accepted, since the continuum side needs a fast-decaying transform.
pub fn action_identity_check(
    basis: &ModeBasis,
    eps: f64,
    f: &TestFunction,
    mode: usize,
    samples: &[SpacetimePoint],
    exec: Exec,
) -> Result<f64> {
    let sigma = match f {
        TestFunction::Gaussian { sigma, .. } => *sigma,
        _ => return Err(Error::InvalidParams("action identity check needs a Gaussian test function".into())),
    };
    if mode >= basis.len() {
        return Err(Error::IndexOutOfRange(mode));
    }
    let a = smeared_operator(basis, f, Regularization::Eps(eps), exec)?;
    let col = a.data.column(mode).into_owned();
    let md = &basis.modes[mode];
    let k = md.four_momentum(basis.mass());
    let g = ModulatedMode {
        f,
        k,
        spinor: md.polarization * Complex64::from(md.coefficient() * basis.damping(mode, eps)),
        cutoff: 80f64.sqrt() / sigma + k.euclidean_square().sqrt(),
    };
    let p = ModelParams::new(basis.mass(), eps, 1)?;
    let devs = exec.try_map(samples, |x| -> Result<f64> {
        let lhs = basis.evaluate(&col, *x);
        let rhs = kernel_apply_test(&p, *x, &g, 1e-8)? * Complex64::from(2.0 * PI);
        Ok((lhs - rhs).norm() / rhs.norm().max(lhs.norm()).max(1e-300))
    })?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

/// Deterministic points uniformly distributed in the Euclidean 4-ball.
pub fn sample_ball(center: SpacetimePoint, radius: f64, count: usize, seed: u64) -> Vec<SpacetimePoint> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: [f64; 4] = std::array::from_fn(|_| 2.0 * rng.random::<f64>() - 1.0);
        if v.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            out.push(center + SpacetimePoint::from_array(v) * radius);
        }
    }
    out
}

/// Deterministic points uniformly distributed in a spatial ball on `t = time`.
pub fn sample_slice(time: f64, center: [f64; 3], radius: f64, count: usize, seed: u64) -> Vec<SpacetimePoint> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: [f64; 3] = std::array::from_fn(|_| 2.0 * rng.random::<f64>() - 1.0);
        if v.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            out.push(SpacetimePoint::new(
                time,
                center[0] + radius * v[0],
                center[1] + radius * v[1],
                center[2] + radius * v[2],
            ));
        }
    }
    out
}

/// JSON form of a mode: momentum triplet, weight, polarization as 8 reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeDump {
    pub momentum: [f64; 3],
    pub weight: f64,
    pub polarization: [f64; 8],
}

/// JSON form of a basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisDump {
    pub spec: BasisSpec,
    pub modes: Vec<ModeDump>,
}

/// JSON form of a matrix: row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDump {
    pub tag: OperatorTag,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl ModeBasis {
    pub fn dump(&self) -> BasisDump {
        BasisDump {
            spec: self.spec,
            modes: self
                .modes
                .iter()
                .map(|m| ModeDump {
                    momentum: m.momentum,
                    weight: m.weight,
                    polarization: std::array::from_fn(|i| if i % 2 == 0 { m.polarization[i / 2].re } else { m.polarization[i / 2].im }),
                })
                .collect(),
        }
    }
}

impl OperatorMatrix {
    pub fn dump(&self) -> MatrixDump {
        let (rows, cols) = self.data.shape();
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let v = self.data[(r, c)];
                entries.push([v.re, v.im]);
            }
        }
        MatrixDump { tag: self.tag, rows, cols, entries }
    }

    pub fn from_dump(d: &MatrixDump) -> Result<Self> {
        if d.entries.len() != d.rows * d.cols {
            return Err(Error::InvalidParams("matrix dump has the wrong entry count".into()));
        }
        let data = DMatrix::from_fn(d.rows, d.cols, |r, c| {
            let [re, im] = d.entries[r * d.cols + c];
            Complex64::new(re, im)
        });
        Ok(Self::new(data, d.tag))
    }
}
