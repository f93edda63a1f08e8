use std::f64::consts::PI;

use cfslab::kernel::{nu_pm, trace_vac, ModelParams};
use cfslab::minkowski::negative_energy_projector;
use cfslab::quadrature::BoxDomain;
use cfslab::sandbox::{
    action_identity_check, box_gram, build_basis, bump_transform_1d, commutant_dimension, commutator_expectation,
    dirac_sequence_convergence, local_correlation, local_correlations, operator_norm, regularization_matrix, sample_ball,
    sample_slice, signature, smeared_operator, span_check, translation_matrix, truncated_kernel, AngularRule, BasisDump,
    BasisSpec, MatrixDump, ModeBasis, OperatorMatrix, OperatorTag, Regularization, TestFunction, RANK_TOL,
};
use cfslab::{Exec, SpacetimePoint};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

const EPS: f64 = 0.05;

fn basis(modes: usize) -> ModeBasis {
    build_basis(&BasisSpec::for_modes(1.0, EPS, modes).unwrap()).unwrap()
}

fn max_dev(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max) / b.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_coeffs(n: usize, seed: u64) -> DVector<Complex64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

/// `∫_{−1}^{1}(1 − s²)⁴ e^{iνs} ds = 768 j₄(ν)/ν⁴`.
fn bump_oracle(nu: f64) -> f64 {
    let (s, c) = nu.sin_cos();
    let j4 = (105.0 / nu.powi(5) - 45.0 / nu.powi(3) + 1.0 / nu) * s + (-105.0 / nu.powi(4) + 10.0 / (nu * nu)) * c;
    768.0 * j4 / nu.powi(4)
}

#[test]
fn basis_is_orthonormal_negative_energy() {
    let b = basis(32);
    assert_eq!(b.len(), 32);
    assert!(max_dev(&b.gram(), &DMatrix::identity(32, 32)) < 1e-10);
    for md in &b.modes {
        let proj = negative_energy_projector(md.momentum, 1.0);
        assert!((proj * md.polarization - md.polarization).norm() < 1e-12);
    }
}

#[test]
fn mode_counts_and_invalid_specs() {
    assert_eq!(BasisSpec::for_modes(1.0, 0.1, 64).unwrap().mode_count(), 64);
    assert_eq!(BasisSpec::for_modes(1.0, 0.1, 12).unwrap().angular, AngularRule::Octahedron);
    assert_eq!(BasisSpec::new(1.0, 0.1, 3, AngularRule::Icosahedron).mode_count(), 72);
    assert!(BasisSpec::for_modes(1.0, 0.1, 10).is_err());
    assert!(build_basis(&BasisSpec::for_modes(1.0, 0.1, 256).unwrap()).is_err());
    assert!(build_basis(&BasisSpec::new(1.0, 0.1, 0, AngularRule::Cube)).is_err());
    assert!(build_basis(&BasisSpec::new(1.0, -0.1, 2, AngularRule::Cube)).is_err());
}

#[test]
fn regularization_is_a_damping_semigroup() {
    let b = basis(16);
    let r0 = regularization_matrix(&b, 0.0).unwrap();
    assert_eq!(r0.data, DMatrix::identity(16, 16));
    let (r1, r2, r3) = (
        regularization_matrix(&b, 0.02).unwrap(),
        regularization_matrix(&b, 0.03).unwrap(),
        regularization_matrix(&b, 0.05).unwrap(),
    );
    assert!(max_dev(&(&r1.data * &r2.data), &r3.data) < 1e-14);
    for i in 0..16 {
        let (a, c) = (r1.data[(i, i)].re, r3.data[(i, i)].re);
        assert!(0.0 < c && c < a && a <= 1.0);
    }
    assert!(regularization_matrix(&b, -1.0).is_err());
}

#[test]
fn local_correlation_rank_signature_and_trace() {
    let b = basis(32);
    let x = SpacetimePoint::new(0.2, -0.1, 0.4, 0.3);
    let f = local_correlation(&b, EPS, x).unwrap();
    assert!(f.hermiticity_defect() < 1e-14);
    let sig = signature(&f, 1e-10);
    assert_eq!((sig.rank, sig.positive, sig.negative), (4, 2, 2));
    let tr: f64 = f.data.diagonal().iter().map(|z| z.re).sum();
    let want = trace_vac(&ModelParams::new(1.0, EPS, 1).unwrap()).unwrap();
    assert!((tr - want).abs() < 1e-9 * want, "{tr} vs {want}");
    assert!((b.discrete_trace_vac(EPS) - tr).abs() < 1e-12 * want);
    // the nonzero eigenvalues are 2π times those of the truncated P^{2ε}(x,x)
    let (np, nm) = nu_pm(&ModelParams::new(1.0, EPS, 1).unwrap()).unwrap();
    let (lo, hi) = (sig.nonzero[0], sig.nonzero[3]);
    assert!((hi - 2.0 * PI * np).abs() < 1e-3 * 2.0 * PI * np);
    assert!((lo - 2.0 * PI * nm).abs() < 1e-3 * 2.0 * PI * nm.abs());
}

#[test]
fn translation_covariance() {
    let b = basis(32);
    let x = SpacetimePoint::new(0.1, 0.2, 0.0, -0.3);
    let a = SpacetimePoint::new(0.7, -0.4, 1.1, 0.25);
    let u = translation_matrix(&b, a);
    assert!(max_dev(&(u.data.adjoint() * &u.data), &DMatrix::identity(32, 32)) < 1e-14);
    let fx = local_correlation(&b, EPS, x).unwrap();
    let moved = u.data.adjoint() * &fx.data * &u.data;
    assert!(max_dev(&moved, &local_correlation(&b, EPS, x + a).unwrap().data) < 1e-12);
}

#[test]
fn bump_transform_matches_spherical_bessel_form() {
    assert!((bump_transform_1d(0.0).re - 256.0 / 315.0).abs() < 1e-15);
    for nu in [2.0, 5.5, 13.0, 37.0, 80.0] {
        let got = bump_transform_1d(nu);
        assert!(got.im.abs() < 1e-15);
        assert!((got.re - bump_oracle(nu)).abs() < 1e-12, "ν = {nu}: {} vs {}", got.re, bump_oracle(nu));
    }
}

#[test]
fn bump_fourier_at_zero_is_its_integral() {
    let f = TestFunction::unit_bump(SpacetimePoint::new(0.3, 0.0, 1.0, -1.0), 0.25);
    assert!((f.integral() - 1.0).norm() < 1e-14);
    let g = TestFunction::gaussian(SpacetimePoint::ORIGIN, 0.5);
    assert!((g.integral().re - (2.0 * PI * 0.25f64).powi(2)).abs() < 1e-14);
}

#[test]
fn smeared_operator_is_linear_and_conjugation_adjoint() {
    let b = basis(16);
    let f = TestFunction::unit_bump(SpacetimePoint::new(0.2, 0.1, 0.0, 0.0), 0.4).scaled(Complex64::new(1.0, 2.0));
    let g = TestFunction::gaussian(SpacetimePoint::new(-0.3, 0.0, 0.5, 0.0), 0.3);
    let reg = Regularization::Eps(EPS);
    let af = smeared_operator(&b, &f, reg, Exec::Sequential).unwrap();
    let ag = smeared_operator(&b, &g, reg, Exec::Sequential).unwrap();
    let sum = smeared_operator(&b, &TestFunction::Sum(vec![f.clone(), g.clone()]), reg, Exec::Sequential).unwrap();
    assert!(max_dev(&sum.data, &(&af.data + &ag.data)) < 1e-14);
    let afc = smeared_operator(&b, &f.conj(), reg, Exec::Sequential).unwrap();
    assert!(max_dev(&afc.data, &af.data.adjoint()) < 1e-14);
    assert!(ag.hermiticity_defect() < 1e-14);
    assert!(smeared_operator(&b, &g, Regularization::Eps(0.0), Exec::Sequential).is_err());
}

#[test]
fn smeared_norm_is_bounded_by_l1_norm() {
    let b = basis(32);
    let fnorm = operator_norm(&local_correlation(&b, EPS, SpacetimePoint::ORIGIN).unwrap());
    for (c, h) in [(SpacetimePoint::ORIGIN, 0.2), (SpacetimePoint::new(1.0, 0.0, 1.0, 0.0), 0.5), (SpacetimePoint::new(-0.5, 0.3, 0.0, 0.2), 1.0)] {
        let f = TestFunction::unit_bump(c, h);
        let a = smeared_operator(&b, &f, Regularization::Eps(EPS), Exec::Sequential).unwrap();
        assert!(operator_norm(&a) <= fnorm * (1.0 + 1e-12));
    }
}

#[test]
fn sandwich_identity_against_truncated_kernel() {
    let b = basis(32);
    let u = random_coeffs(32, 5);
    let x = SpacetimePoint::new(0.3, 0.5, 0.0, 0.1);
    let (matrix, trunc, _cont) = commutator_expectation(&b, EPS, x, SpacetimePoint::ORIGIN, &u).unwrap();
    assert!(matrix.re.abs() < 1e-12 * matrix.norm());
    assert!((matrix - trunc).norm() < 1e-12 * matrix.norm());
    let k = truncated_kernel(&b, EPS, 2, SpacetimePoint::ORIGIN, SpacetimePoint::ORIGIN);
    let tr: f64 = (0..4).map(|i| k[(i, i)].re).sum();
    assert!(tr > 0.0);
}

#[test]
fn box_gram_is_positive_semidefinite() {
    let b = basis(16);
    let dom = BoxDomain::new([-0.5, -1.0, 0.0, -0.2], [0.5, 1.0, 0.8, 0.2]).unwrap();
    let g = box_gram(&b, &dom);
    assert!(max_dev(&g, &g.adjoint()) < 1e-14);
    let ev = g.symmetric_eigenvalues();
    let max = ev.iter().cloned().fold(0.0, f64::max);
    assert!(ev.iter().all(|v| *v >= -1e-12 * max));
}

#[test]
fn single_point_commutant_dimension() {
    let b = basis(16);
    let f = local_correlation(&b, EPS, SpacetimePoint::new(0.1, 0.0, 0.2, 0.0)).unwrap();
    let rep = commutant_dimension(&[f], RANK_TOL, Exec::Sequential).unwrap();
    assert_eq!(rep.unknowns, 256);
    assert_eq!(rep.dimension, 12 * 12 + 8);
}

#[test]
fn several_points_shrink_commutant_and_span() {
    let b = basis(16);
    let pts = sample_ball(SpacetimePoint::ORIGIN, 1.0, 6, 3);
    let ops = local_correlations(&b, EPS, &pts, Exec::Sequential).unwrap();
    let rep = commutant_dimension(&ops, RANK_TOL, Exec::Sequential).unwrap();
    assert_eq!(rep.dimension, 1);
    assert!(span_check(&ops, RANK_TOL).unwrap().full);
    assert!(!span_check(&ops[..1], RANK_TOL).unwrap().full);
    let slice = sample_slice(0.0, [0.0; 3], 1.0, 6, 4);
    assert!(slice.iter().all(|p| p.t == 0.0 && p.spatial_norm() <= 1.0));
    assert!(commutant_dimension(&[], RANK_TOL, Exec::Sequential).is_err());
}

#[test]
fn dirac_sequence_gap_decreases() {
    let b = basis(16);
    let steps = dirac_sequence_convergence(&b, EPS, SpacetimePoint::new(0.1, 0.2, 0.0, 0.0), &[2, 4, 8, 16, 32], Exec::Sequential).unwrap();
    for w in steps.windows(2) {
        assert!(w[1].gap < w[0].gap, "{:?}", steps);
    }
    assert!(dirac_sequence_convergence(&b, EPS, SpacetimePoint::ORIGIN, &[0], Exec::Sequential).is_err());
}

#[test]
fn action_identity_improves_with_refinement() {
    let f = TestFunction::gaussian(SpacetimePoint::ORIGIN, 0.5);
    let samples = [SpacetimePoint::ORIGIN, SpacetimePoint::new(0.1, 0.1, 0.0, 0.0)];
    let res: Vec<f64> = [16, 64]
        .iter()
        .map(|&n| {
            let b = build_basis(&BasisSpec::for_modes(1.0, 0.1, n).unwrap()).unwrap();
            action_identity_check(&b, 0.1, &f, 0, &samples, Exec::Sequential).unwrap()
        })
        .collect();
    assert!(res[1] < 0.5 * res[0], "{res:?}");
    assert!(res[1] < 0.2);
    let b = basis(8);
    let bump = TestFunction::unit_bump(SpacetimePoint::ORIGIN, 0.5);
    assert!(action_identity_check(&b, 0.1, &bump, 0, &samples, Exec::Sequential).is_err());
}

#[test]
fn dumps_round_trip() {
    let b = basis(16);
    let dump: BasisDump = serde_json::from_str(&serde_json::to_string(&b.dump()).unwrap()).unwrap();
    assert_eq!(dump, b.dump());
    let md = &b.modes[5];
    let d = &dump.modes[5];
    assert_eq!(d.momentum, md.momentum);
    assert_eq!((d.polarization[2], d.polarization[3]), (md.polarization[1].re, md.polarization[1].im));
    let f = local_correlation(&b, EPS, SpacetimePoint::ORIGIN).unwrap();
    let md: MatrixDump = serde_json::from_str(&serde_json::to_string(&f.dump()).unwrap()).unwrap();
    assert_eq!(md.tag, OperatorTag::LocalCorrelation);
    assert_eq!(md.entries[1], [f.data[(0, 1)].re, f.data[(0, 1)].im]);
    assert_eq!(OperatorMatrix::from_dump(&md).unwrap(), f);
    let bad = MatrixDump { entries: vec![[0.0, 0.0]; 3], ..md };
    assert!(OperatorMatrix::from_dump(&bad).is_err());
}

#[test]
fn sequential_and_parallel_agree() {
    let b = basis(16);
    let f = TestFunction::unit_bump(SpacetimePoint::new(0.2, 0.1, 0.0, 0.0), 0.4);
    let s = smeared_operator(&b, &f, Regularization::Unregularized, Exec::Sequential).unwrap();
    let p = smeared_operator(&b, &f, Regularization::Unregularized, Exec::Parallel).unwrap();
    assert_eq!(s, p);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn local_correlation_is_hermitian_rank_four(t in -2.0f64..2.0, x in -2.0f64..2.0, z in -2.0f64..2.0) {
        let b = basis(16);
        let f = local_correlation(&b, EPS, SpacetimePoint::new(t, x, 0.3, z)).unwrap();
        prop_assert!(f.hermiticity_defect() < 1e-14);
        let sig = signature(&f, 1e-10);
        prop_assert_eq!((sig.positive, sig.negative), (2, 2));
    }

    #[test]
    fn bump_transform_is_even_and_bounded(nu in -100.0f64..100.0) {
        let a = bump_transform_1d(nu);
        let b = bump_transform_1d(-nu);
        prop_assert!((a - b).norm() < 1e-14);
        prop_assert!(a.norm() <= 256.0 / 315.0 + 1e-15);
    }
}
