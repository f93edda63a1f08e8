//! Acceptance criteria 1–10 with pinned configurations.
//!
//! Each criterion runs deterministically (fixed seeds, fixed grids) and returns
//! its measured metrics, the thresholds they were held against and a verdict.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::causal::{classify, closed_chain_spectrum, CausalKind, DEFAULT_TOL_IMAG, DEFAULT_TOL_MODULUS};
use crate::error::Result;
use crate::exec::Exec;
use crate::kernel::{kernel_p, kernel_p_bessel, localized_inner, localized_norm, nu_pm, ModelParams};
use crate::minkowski::{spin_inner, SpacetimePoint, Spinor, DEFAULT_CONE_TOL};
use crate::probes::{
    asymptotic_integral_lemma, asymptotic_integral_theorem, bridge_identity, commutator_scaling_scan, cone_detection_scan,
    localized_norm_scan, nu_scan, time_integral_i0, time_integral_i1, DetectionMode, EpsGrid, PowerLawFit,
    DEFAULT_OUTER_NODES,
};
use crate::sandbox::{
    build_basis, commutant_dimension, commutator_expectation, dirac_sequence_convergence, local_correlation, operator_norm,
    regularization_matrix, sample_ball, sample_slice, signature, smeared_operator, translation_matrix, BasisSpec,
    Regularization, TestFunction, RANK_TOL,
};
use crate::specfun::{bessel_jy01, bessel_k01};

/// Criteria whose targets are not reached by this implementation.
pub const KNOWN_FAILURES: [u8; 2] = [7, 9];

/// Verdict and measurements of one criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    /// Wall-clock budget in seconds.
    pub runtime_limit_s: f64,
    pub metrics: BTreeMap<String, f64>,
    /// One entry per threshold check, `name → passed`.
    pub checks: BTreeMap<String, bool>,
    /// Pinned configuration.
    pub config: serde_json::Value,
}

struct Builder {
    id: u8,
    title: &'static str,
    limit: f64,
    metrics: BTreeMap<String, f64>,
    checks: BTreeMap<String, bool>,
    config: serde_json::Value,
}

impl Builder {
    fn new(id: u8, title: &'static str, limit: f64, config: serde_json::Value) -> Self {
        Self { id, title, limit, metrics: BTreeMap::new(), checks: BTreeMap::new(), config }
    }

    fn metric(&mut self, name: &str, v: f64) {
        self.metrics.insert(name.into(), v);
    }

    fn check(&mut self, name: &str, ok: bool) {
        self.checks.insert(name.into(), ok);
    }

    fn fit(&mut self, name: &str, fit: &PowerLawFit) {
        self.metric(&format!("{name}.exponent"), fit.exponent);
        self.metric(&format!("{name}.r_squared"), fit.r_squared);
    }

    fn finish(self) -> CriterionOutcome {
        CriterionOutcome {
            id: self.id,
            title: self.title.into(),
            passed: self.checks.values().all(|c| *c),
            runtime_limit_s: self.limit,
            metrics: self.metrics,
            checks: self.checks,
            config: self.config,
        }
    }
}

fn random_spinor(rng: &mut ChaCha8Rng) -> Spinor {
    Spinor::from_fn(|_, _| Complex64::new(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0))
}

fn random_point(rng: &mut ChaCha8Rng, half: f64) -> SpacetimePoint {
    SpacetimePoint::from_array(std::array::from_fn(|_| half * (2.0 * rng.random::<f64>() - 1.0)))
}

/// Largest `|a_ij − b_ij|/|b_ij|`, with entries below `1e-12 max|b|` measured
/// against that floor.
fn entrywise_deviation(a: &crate::SpinMatrix, b: &crate::SpinMatrix) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let floor = 1e-12 * scale;
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm() / y.norm().max(floor).max(1e-300)).fold(0.0, f64::max)
}

/// 1. Quadrature and Bessel kernels agree entrywise on 50 off-cone points.
pub fn criterion_1(exec: Exec) -> Result<CriterionOutcome> {
    let seed = 1;
    let epsilons = [1e-1, 1e-2, 1e-3];
    let mut b = Builder::new(1, "dual-oracle kernel agreement", 60.0, json!({"mass": 1.0, "points": 50, "epsilons": epsilons, "seed": seed, "min_abs_square": 0.05}));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    while points.len() < 50 {
        let p = random_point(&mut rng, 2.0);
        if p.minkowski_square().abs() >= 0.05 {
            points.push(p);
        }
    }
    let mut worst = 0.0f64;
    for e in epsilons {
        let p = ModelParams::new(1.0, e, 1)?;
        let devs = exec.try_map(&points, |xi| -> Result<f64> {
            let q = kernel_p(&p, *xi, SpacetimePoint::ORIGIN)?;
            let c = kernel_p_bessel(&p, *xi, SpacetimePoint::ORIGIN, DEFAULT_CONE_TOL)?;
            Ok(entrywise_deviation(&q.matrix, &c.matrix))
        })?;
        let d = devs.into_iter().fold(0.0, f64::max);
        b.metric(&format!("max_rel_dev.eps_{e:e}"), d);
        worst = worst.max(d);
    }
    b.metric("max_rel_dev", worst);
    b.check("max_rel_dev < 1e-6", worst < 1e-6);
    Ok(b.finish())
}

/// 2. `ν⁺ ∼ ε^{−3}`, `tr_vac ∼ ε^{−2}`.
pub fn criterion_2() -> Result<CriterionOutcome> {
    let grid = EpsGrid::default();
    let mut b = Builder::new(2, "nu and trace scaling", 10.0, json!({"mass": 1.0, "grid": grid}));
    let (nu, tr) = nu_scan(1.0, &grid)?;
    let (fn_, ft) = (nu.fit()?, tr.fit()?);
    b.fit("nu_plus", &fn_);
    b.fit("trace_vac", &ft);
    b.check("nu_plus exponent = -3 ± 0.05", (fn_.exponent + 3.0).abs() <= 0.05);
    b.check("trace_vac exponent = -2 ± 0.05", (ft.exponent + 2.0).abs() <= 0.05);
    b.check("r_squared >= 0.99", fn_.r_squared >= 0.99 && ft.r_squared >= 0.99);
    Ok(b.finish())
}

/// 3. Localized-state inner products, norm bounds and norm scaling.
pub fn criterion_3() -> Result<CriterionOutcome> {
    let seed = 3;
    let eps = 1e-2;
    let grid = EpsGrid::default();
    let mut b = Builder::new(3, "localized-state identities", 30.0, json!({"mass": 1.0, "eps": eps, "pairs": 20, "spinors": 100, "seed": seed, "grid": grid}));
    let p = ModelParams::new(1.0, eps, 1)?;
    let p2 = p.with_n(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (x, y) = (random_point(&mut rng, 1.5), random_point(&mut rng, 1.5));
        let (chi, zeta) = (random_spinor(&mut rng), random_spinor(&mut rng));
        let lhs = 2.0 * PI * localized_inner(&p, x, y, &chi, &zeta)?;
        let rhs = -spin_inner(&chi, &(kernel_p(&p2, x, y)?.matrix * zeta));
        worst = worst.max((lhs - rhs).norm() / rhs.norm());
    }
    b.metric("inner_product_rel_dev", worst);
    b.check("inner product identity to 1e-9", worst <= 1e-9);
    let (np, nm) = nu_pm(&p)?;
    let mut violations = 0;
    let mut slack = f64::INFINITY;
    for _ in 0..100 {
        let chi = random_spinor(&mut rng);
        let n = (2.0 * PI).sqrt() * localized_norm(&p, &chi)?;
        let (lo, hi) = ((-nm).sqrt() * chi.norm(), np.sqrt() * chi.norm());
        if n < lo * (1.0 - 1e-12) || n > hi * (1.0 + 1e-12) {
            violations += 1;
        }
        slack = slack.min((n - lo).min(hi - n) / hi);
    }
    b.metric("norm_bound_violations", violations as f64);
    b.metric("norm_bound_min_relative_slack", slack);
    b.check("norm bounds on 100 spinors", violations == 0);
    let fit = localized_norm_scan(1.0, &Spinor::new(1.0.into(), 0.5.into(), 0.0.into(), Complex64::new(0.0, 0.25)), &grid)?.fit()?;
    b.fit("localized_norm", &fit);
    b.check("norm exponent = -1.5 ± 0.05", (fit.exponent + 1.5).abs() <= 0.05);
    Ok(b.finish())
}

/// The 40-point validation grid: `(ξ, expected kind)`. Spacelike points lie at
/// least `space_margin` and timelike points at least `time_margin` from the
/// cone in `||t| − |x⃗||`.
pub fn validation_grid(space_margin: f64, time_margin: f64) -> Vec<(SpacetimePoint, CausalKind)> {
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut out = Vec::with_capacity(40);
    for i in 0..40 {
        let z = 1.0 - (2.0 * (i % 20) as f64 + 1.0) / 20.0;
        let s = (1.0 - z * z).sqrt();
        let dir = [s * (golden * i as f64).cos(), s * (golden * i as f64).sin(), z];
        let step = (i % 20) as f64 / 19.0;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let (t, r, kind) = if i < 20 {
            let r = 0.4 + 2.6 * step;
            (sign * (r - space_margin) * (1.0 - step), r, CausalKind::Spacelike)
        } else {
            let r = 2.0 * step;
            (sign * (r + time_margin + 1.5 * step), r, CausalKind::Timelike)
        };
        out.push((SpacetimePoint::new(t, r * dir[0], r * dir[1], r * dir[2]), kind));
    }
    out
}

/// 4. Spectral classification reproduces Minkowski causality.
pub fn criterion_4(exec: Exec) -> Result<CriterionOutcome> {
    let eps = 1e-2;
    let (space_margin, time_margin) = (10.0 * eps, 30.0 * eps);
    let mut b = Builder::new(
        4,
        "causal classification",
        60.0,
        json!({"mass": 1.0, "eps": eps, "space_margin": space_margin, "time_margin": time_margin,
               "tol_modulus": DEFAULT_TOL_MODULUS, "tol_imag": DEFAULT_TOL_IMAG}),
    );
    let p = ModelParams::new(1.0, eps, 2)?;
    let grid = validation_grid(space_margin, time_margin);
    let hits = exec.try_map(&grid, |(xi, kind)| -> Result<bool> {
        let spec = closed_chain_spectrum(&p, *xi, SpacetimePoint::ORIGIN)?;
        Ok(classify(&spec, DEFAULT_TOL_MODULUS, DEFAULT_TOL_IMAG).kind == *kind)
    })?;
    let correct = hits.iter().filter(|h| **h).count();
    b.metric("correct", correct as f64);
    b.metric("points", grid.len() as f64);
    b.check("40/40 correct", correct == 40);
    Ok(b.finish())
}

/// Pinned fit grid of the Theorem fixture (see README).
pub fn theorem_grid() -> EpsGrid {
    EpsGrid::geometric(1e-2, 1e-4, 12).expect("valid grid")
}

/// 5. Asymptotic integrals near the cone.
pub fn criterion_5(exec: Exec) -> Result<CriterionOutcome> {
    let lemma_grid = EpsGrid::default();
    let thm_grid = theorem_grid();
    let lemma_center = [1.0, 1.0, 0.0, 0.0];
    let thm_center = [2f64.sqrt(), 1.0, 0.0, 1.0];
    let mut b = Builder::new(
        5,
        "asymptotic integrals",
        300.0,
        json!({"mass": 1.0, "lemma": {"center": lemma_center, "half_width": 0.2, "grid": lemma_grid},
               "theorem": {"center": thm_center, "half_width": 0.2, "grid": thm_grid}, "outer_nodes": DEFAULT_OUTER_NODES}),
    );
    let f = TestFunction::unit_bump(SpacetimePoint::from_array(lemma_center), 0.2);
    let lemma = asymptotic_integral_lemma(&f, &lemma_grid, DEFAULT_OUTER_NODES, exec)?.fit()?;
    b.fit("lemma", &lemma);
    b.check("lemma exponent = -3 ± 0.1", (lemma.exponent + 3.0).abs() <= 0.1 && lemma.r_squared >= 0.98);
    let g = TestFunction::unit_bump(SpacetimePoint::from_array(thm_center), 0.2);
    let thm = asymptotic_integral_theorem(1.0, &g, &thm_grid, DEFAULT_OUTER_NODES, exec)?;
    let (fa, fr, fi) = (thm.fit()?, thm.fit_re()?, thm.fit_im()?);
    b.fit("theorem", &fa);
    b.fit("theorem_re", &fr);
    b.fit("theorem_im", &fi);
    b.check("theorem exponent = -2 ± 0.1", (fa.exponent + 2.0).abs() <= 0.1 && fa.r_squared >= 0.98);
    b.check("theorem Re, Im exponents = -2 ± 0.15", (fr.exponent + 2.0).abs() <= 0.15 && (fi.exponent + 2.0).abs() <= 0.15);
    let eps = 1e-2;
    let scale = 1.0 / (eps * eps);
    let i1 = time_integral_i1(1.3, eps, 1e-10 * scale)?.value.norm();
    b.metric("i1_abs", i1);
    b.check("I1 = 0 to 1e-8/eps^2", i1 <= 1e-8 * scale);
    let i0 = time_integral_i0(eps, 1e-12)?.value;
    let want = PI / (2.0 * eps.powi(3));
    b.metric("i0_rel_dev_from_pi_over_2eps3", (i0 - want).abs() / want);
    b.check("I0 prefactor matches quadrature oracle", (i0 - want).abs() <= 1e-10 * want);
    Ok(b.finish())
}

/// 6. Light-cone detection by localized states.
pub fn criterion_6(exec: Exec) -> Result<CriterionOutcome> {
    let grid = EpsGrid::default();
    let on = [1.0, 0.0, 0.0, 1.0];
    let off = [2.0, 0.0, 0.0, 0.0];
    let mut b = Builder::new(
        6,
        "light-cone detection",
        300.0,
        json!({"mass": 1.0, "on_cone_center": on, "off_cone_center": off, "half_width": 0.3, "chi": "e1", "zeta": "e3", "grid": grid, "bridge_eps": 1e-2}),
    );
    let (e1, e3) = (crate::minkowski::basis_spinor(1)?, crate::minkowski::basis_spinor(3)?);
    let f_on = TestFunction::unit_bump(SpacetimePoint::from_array(on), 0.3);
    let f_off = TestFunction::unit_bump(SpacetimePoint::from_array(off), 0.3);
    for (mode, tag) in [(DetectionMode::Unregularized, "unregularized"), (DetectionMode::Regularized, "regularized")] {
        let fon = cone_detection_scan(1.0, &f_on, &e1, &e3, &grid, mode, DEFAULT_OUTER_NODES, exec)?.fit()?;
        let foff = cone_detection_scan(1.0, &f_off, &e1, &e3, &grid, mode, DEFAULT_OUTER_NODES, exec)?.fit()?;
        b.fit(&format!("on_cone_{tag}"), &fon);
        b.fit(&format!("off_cone_{tag}"), &foff);
        b.check(&format!("on-cone {tag} exponent <= -1.8"), fon.exponent <= -1.8 && fon.r_squared >= 0.98);
        b.check(&format!("off-cone {tag} exponent >= -0.2"), foff.exponent >= -0.2);
    }
    let (_, _, dev) = bridge_identity(1.0, 1e-2, &f_on, &e1, &e3, DEFAULT_OUTER_NODES, exec)?;
    b.metric("bridge_rel_dev", dev);
    b.check("bridge identity to 1e-8", dev <= 1e-8);
    Ok(b.finish())
}

/// 7. Commutator scaling in the N = 64 sandbox.
pub fn criterion_7(exec: Exec) -> Result<CriterionOutcome> {
    let grid = EpsGrid::geometric(1e-1, 1e-3, 6)?;
    let spec = BasisSpec::for_modes(1.0, 1e-1, 64)?;
    let on = [1.0, 0.0, 0.0, 1.0];
    let off = [2.0, 0.0, 0.0, 0.0];
    let mut b = Builder::new(
        7,
        "commutator scaling",
        600.0,
        json!({"modes": 64, "basis": spec, "basis_eps_ref": "eps", "x": [0.0, 0.0, 0.0, 0.0], "on_cone_center": on, "off_cone_center": off, "half_width": 0.3, "grid": grid}),
    );
    let x = SpacetimePoint::ORIGIN;
    let fon = commutator_scaling_scan(x, &TestFunction::unit_bump(SpacetimePoint::from_array(on), 0.3), &grid, &spec, exec)?.fit()?;
    let foff = commutator_scaling_scan(x, &TestFunction::unit_bump(SpacetimePoint::from_array(off), 0.3), &grid, &spec, exec)?.fit()?;
    b.fit("on_cone", &fon);
    b.fit("off_cone", &foff);
    b.check("off-cone exponent >= 1.4", foff.exponent >= 1.4);
    b.check("on-cone exponent <= 1.1", fon.exponent <= 1.1);
    b.check("separation >= 0.3", foff.exponent - fon.exponent >= 0.3);
    Ok(b.finish())
}

/// 8. Operator-algebra suite at N = 32.
pub fn criterion_8(exec: Exec) -> Result<CriterionOutcome> {
    let eps = 0.05;
    let seed = 8;
    let spec = BasisSpec::for_modes(1.0, eps, 32)?;
    let mut b = Builder::new(
        8,
        "operator-algebra suite",
        300.0,
        json!({"basis": spec, "eps": eps, "seed": seed, "random_f": 20, "ball": {"center": [0.0, 0.0, 0.0, 0.0], "radius": 1.0, "count": 8, "seed": 81},
               "slice": {"time": 0.0, "center": [0.0, 0.0, 0.0], "radius": 1.0, "count": 8, "seed": 82}}),
    );
    let basis = build_basis(&spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut sig_ok = true;
    for _ in 0..4 {
        let s = signature(&local_correlation(&basis, eps, random_point(&mut rng, 1.0))?, RANK_TOL);
        sig_ok &= s.rank == 4 && s.positive == 2 && s.negative == 2;
    }
    b.check("rank 4, signature (2, 2)", sig_ok);

    let (x, a) = (random_point(&mut rng, 1.0), random_point(&mut rng, 1.0));
    let u = translation_matrix(&basis, a).data;
    let moved = u.adjoint() * local_correlation(&basis, eps, x)?.data * &u;
    let direct = local_correlation(&basis, eps, x + a)?.data;
    let cov = (moved - &direct).norm() / direct.norm();
    b.metric("translation_rel_dev", cov);
    b.check("translation covariance", cov <= 1e-12);

    let coeffs = DVector::from_fn(basis.len(), |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let (matrix, trunc, _) = commutator_expectation(&basis, eps, x, x + a, &coeffs)?;
    let dev = (matrix - trunc).norm() / trunc.norm();
    b.metric("commutator_expectation_rel_dev", dev);
    b.check("commutator expectation to 1e-8", dev <= 1e-8);

    let g = TestFunction::gaussian(SpacetimePoint::new(0.1, 0.2, -0.1, 0.3), 0.4);
    let af = smeared_operator(&basis, &g, Regularization::Eps(eps), exec)?;
    let tr = af.data.trace();
    let want = g.integral() * crate::kernel::trace_vac(&ModelParams::new(1.0, eps, 1)?)?;
    let tdev = (tr - want).norm() / want.norm();
    b.metric("trace_rel_dev", tdev);
    b.check("trace identity to 1e-6", tdev <= 1e-6);

    let mut worst_ratio = 0.0f64;
    for _ in 0..20 {
        let center = random_point(&mut rng, 0.5);
        let half: [f64; 4] = std::array::from_fn(|_| 0.1 + 0.4 * rng.random::<f64>());
        let amp = Complex64::new(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0);
        let f = TestFunction::Bump { center: center.to_array(), half_widths: half, amplitude: amp };
        let t = center.t.abs() + half[0];
        let n = operator_norm(&smeared_operator(&basis, &f, Regularization::Eps(eps), exec)?);
        worst_ratio = worst_ratio.max(n / (4.0 * t * f.sup_bound()));
    }
    b.metric("norm_bound_worst_ratio", worst_ratio);
    b.check("norm bound on 20 random f", worst_ratio <= 1.0);

    let r = regularization_matrix(&basis, eps)?.data;
    let bare = smeared_operator(&basis, &g, Regularization::Unregularized, exec)?.data;
    let sdev = (&r * bare * &r - &af.data).norm() / af.data.norm();
    b.metric("sandwich_rel_dev", sdev);
    b.check("sandwich identity", sdev <= 1e-12);

    for (tag, pts) in [
        ("ball", sample_ball(SpacetimePoint::ORIGIN, 1.0, 8, 81)),
        ("slice", sample_slice(0.0, [0.0, 0.0, 0.0], 1.0, 8, 82)),
    ] {
        let ops = crate::sandbox::local_correlations(&basis, eps, &pts, exec)?;
        let rep = commutant_dimension(&ops, RANK_TOL, exec)?;
        b.metric(&format!("commutant_{tag}.dimension"), rep.dimension as f64);
        b.metric(&format!("commutant_{tag}.smallest_kept"), rep.smallest_kept);
        b.check(&format!("commutant dimension 1 ({tag})"), rep.dimension == 1);
    }
    Ok(b.finish())
}

/// 9. Dirac-sequence convergence at N = 64.
pub fn criterion_9(exec: Exec) -> Result<CriterionOutcome> {
    let eps = 0.05;
    let ns = [1usize, 2, 8, 32];
    let spec = BasisSpec::for_modes(1.0, eps, 64)?;
    let mut b = Builder::new(9, "Dirac-sequence convergence", 120.0, json!({"basis": spec, "eps": eps, "x0": [0.0, 0.0, 0.0, 0.0], "n": ns}));
    let basis = build_basis(&spec)?;
    let steps = dirac_sequence_convergence(&basis, eps, SpacetimePoint::ORIGIN, &ns, exec)?;
    for s in &steps {
        b.metric(&format!("relative_gap.n_{}", s.n), s.relative_gap);
    }
    b.check("gap(8) < gap(2)", steps[2].gap < steps[1].gap);
    b.check("relative gap < 1e-3 at n = 32", steps[3].relative_gap < 1e-3);
    Ok(b.finish())
}

/// `z` and six `(re, im)` oracle values.
type StripRow = ((f64, f64), [(f64, f64); 6]);

const STRIP: &[StripRow] = include!("../fixtures/bessel_strip.in");

/// 10. Bessel functions against frozen oracle values, Wronskian and derivative relations.
pub fn criterion_10() -> Result<CriterionOutcome> {
    let mut b = Builder::new(10, "Bessel module", 10.0, json!({"strip_points": STRIP.len(), "wronskian_points": 20, "derivative_points": 20}));
    let mut worst = 0.0f64;
    for &((x, y), vals) in STRIP {
        let z = Complex64::new(x, y);
        let (k0, k1) = bessel_k01(z)?;
        let jy = bessel_jy01(z)?;
        let got = [k0.value, k1.value, jy.j0.value, jy.j1.value, jy.y0.value, jy.y1.value];
        for (g, (re, im)) in got.iter().zip(vals) {
            let w = Complex64::new(re, im);
            worst = worst.max((g - w).norm() / w.norm());
        }
    }
    b.metric("strip_max_rel_dev", worst);
    b.check("strip oracle agreement to 1e-9", worst <= 1e-9);
    let mut wr = 0.0f64;
    let mut der = 0.0f64;
    for i in 0..20 {
        let x = 0.3 + 1.9 * i as f64;
        let z = Complex64::new(x, 0.5 * ((i % 5) as f64 - 2.0) / 2.0);
        let jy = bessel_jy01(z)?;
        // J₁Y₀ − J₀Y₁ = 2/(πz)
        let w = jy.j1.value * jy.y0.value - jy.j0.value * jy.y1.value;
        let want = 2.0 / (PI * z);
        wr = wr.max((w - want).norm() / want.norm());
        // K₀' = −K₁ by central differences
        let h = 1e-5 * z.norm();
        let d = (bessel_k01(z + h)?.0.value - bessel_k01(z - h)?.0.value) / (2.0 * h);
        let k1 = bessel_k01(z)?.1.value;
        der = der.max((d + k1).norm() / k1.norm());
    }
    b.metric("wronskian_max_rel_dev", wr);
    b.metric("derivative_max_rel_dev", der);
    b.check("Wronskian to 1e-9", wr <= 1e-9);
    b.check("K0' = -K1 to 1e-6", der <= 1e-6);
    Ok(b.finish())
}

/// Runs one criterion by number.
pub fn run_criterion(id: u8, exec: Exec) -> Result<CriterionOutcome> {
    match id {
        1 => criterion_1(exec),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(exec),
        5 => criterion_5(exec),
        6 => criterion_6(exec),
        7 => criterion_7(exec),
        8 => criterion_8(exec),
        9 => criterion_9(exec),
        10 => criterion_10(),
        _ => Err(crate::Error::InvalidParams(format!("no criterion {id}; valid ids are 1 to 10"))),
    }
}

/// One line per criterion: `criterion N: PASS|FAIL title`.
pub fn summary_line(o: &CriterionOutcome) -> String {
    let failed: Vec<&str> = o.checks.iter().filter(|(_, ok)| !**ok).map(|(k, _)| k.as_str()).collect();
    let verdict = if o.passed { "PASS" } else { "FAIL" };
    if failed.is_empty() {
        format!("criterion {}: {verdict} {}", o.id, o.title)
    } else {
        format!("criterion {}: {verdict} {} (failed: {})", o.id, o.title, failed.join("; "))
    }
}
