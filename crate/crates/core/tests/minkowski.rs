#![allow(clippy::needless_range_loop)]

use cfslab::minkowski::{
    basis_spinor, gamma, gamma5, negative_energy_projector, spin_adjoint, spin_inner, ConeClass, SpacetimePoint, ETA, GAMMAS,
};
use cfslab::{Error, SpinMatrix, Spinor};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn max_abs(m: &SpinMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn clifford_relations_are_exact() {
    for i in 0..4 {
        for j in 0..4 {
            let anti = GAMMAS[i] * GAMMAS[j] + GAMMAS[j] * GAMMAS[i];
            let want = SpinMatrix::identity() * c(if i == j { 2.0 * ETA[i] } else { 0.0 }, 0.0);
            assert_eq!(anti, want, "{{γ^{i}, γ^{j}}}");
        }
    }
    assert_eq!(GAMMAS[0], GAMMAS[0].adjoint());
    for a in 1..4 {
        assert_eq!(GAMMAS[a].adjoint(), -GAMMAS[a]);
    }
    assert!(matches!(gamma(4), Err(Error::IndexOutOfRange(4))));
    assert_eq!(gamma(2).unwrap(), GAMMAS[2]);
}

#[test]
fn gamma5_properties() {
    let g5 = gamma5();
    assert_eq!(g5 * g5, SpinMatrix::identity());
    for g in GAMMAS {
        assert_eq!(g5 * g + g * g5, SpinMatrix::zeros());
    }
    assert_eq!(g5.trace(), c(0.0, 0.0));
    assert_eq!(spin_adjoint(&g5), -g5);
}

#[test]
fn spin_inner_examples() {
    let e = |m| basis_spinor(m).unwrap();
    assert_eq!(spin_inner(&e(1), &e(1)), c(1.0, 0.0));
    assert_eq!(spin_inner(&e(3), &e(3)), c(-1.0, 0.0));
    assert_eq!(spin_inner(&e(1), &e(3)), c(0.0, 0.0));
    assert!(basis_spinor(0).is_err() && basis_spinor(5).is_err());
}

#[test]
fn spin_adjoint_examples() {
    for g in GAMMAS {
        assert_eq!(spin_adjoint(&g), g);
    }
    assert_eq!(spin_adjoint(&SpinMatrix::identity()), SpinMatrix::identity());
}

#[test]
fn sixteen_products_are_independent() {
    let g5 = gamma5();
    let mut mats = vec![SpinMatrix::identity()];
    mats.extend(GAMMAS);
    for j in 0..4 {
        for k in j + 1..4 {
            mats.push(GAMMAS[j] * GAMMAS[k]);
        }
    }
    mats.extend(GAMMAS.iter().map(|g| g * g5));
    mats.push(g5);
    assert_eq!(mats.len(), 16);
    let stacked = DMatrix::from_fn(16, 16, |r, col| mats[col][(r / 4, r % 4)]);
    let sv = stacked.singular_values();
    assert!(sv.iter().all(|s| *s > 1e-10), "rank deficient: {sv:?}");
}

#[test]
fn minkowski_geometry() {
    let p = SpacetimePoint::new(2.0, 1.0, -1.0, 0.5);
    assert_eq!(p.minkowski_square(), 4.0 - 1.0 - 1.0 - 0.25);
    assert_eq!(p.dot(p), p.minkowski_square());
    assert_eq!(p.euclidean_square(), 6.25);
    assert_eq!(SpacetimePoint::from_array(p.to_array()), p);
    assert_eq!(p.cone_class(1e-9), ConeClass::InteriorTimelike);
    assert_eq!(SpacetimePoint::new(0.0, 1.0, 0.0, 0.0).cone_class(1e-9), ConeClass::ExteriorSpacelike);
    assert_eq!(SpacetimePoint::new(1.0, 0.0, 0.0, 1.0).cone_class(1e-9), ConeClass::Null);
    assert_eq!(SpacetimePoint::new(1.0 + 1e-12, 0.0, 0.0, 1.0).cone_class(1e-9), ConeClass::Null);
    assert_eq!((p - p), SpacetimePoint::ORIGIN);
    assert_eq!((p * 2.0).t, 4.0);
}

#[test]
fn negative_energy_projector_is_orthogonal_rank_two() {
    for k in [[0.0, 0.0, 0.0], [0.3, -1.2, 2.0], [10.0, 0.0, 5.0]] {
        let p = negative_energy_projector(k, 1.0);
        assert!(max_abs(&(p * p - p)) < 1e-14);
        assert!(max_abs(&(p.adjoint() - p)) < 1e-14);
        assert!((p.trace() - c(2.0, 0.0)).norm() < 1e-14);
    }
}

fn arb_matrix() -> impl Strategy<Value = SpinMatrix> {
    prop::collection::vec(-1.0f64..1.0, 32).prop_map(|v| SpinMatrix::from_fn(|r, col| c(v[2 * (4 * r + col)], v[2 * (4 * r + col) + 1])))
}

fn arb_spinor() -> impl Strategy<Value = Spinor> {
    prop::collection::vec(-1.0f64..1.0, 8).prop_map(|v| Spinor::from_fn(|r, _| c(v[2 * r], v[2 * r + 1])))
}

proptest! {
    #[test]
    fn spin_adjoint_is_adjoint(a in arb_matrix(), psi in arb_spinor(), phi in arb_spinor()) {
        let lhs = spin_inner(&(a * psi), &phi);
        let rhs = spin_inner(&psi, &(spin_adjoint(&a) * phi));
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn spin_inner_is_hermitian(psi in arb_spinor(), phi in arb_spinor()) {
        prop_assert!((spin_inner(&psi, &phi) - spin_inner(&phi, &psi).conj()).norm() <= 1e-15);
    }

    #[test]
    fn cone_class_partitions(t in -3.0f64..3.0, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let p = SpacetimePoint::new(t, x, y, 0.0);
        let q = p.minkowski_square();
        let class = p.cone_class(1e-9);
        let want = if q.abs() <= 1e-9 * p.euclidean_square() { ConeClass::Null } else if q > 0.0 { ConeClass::InteriorTimelike } else { ConeClass::ExteriorSpacelike };
        prop_assert_eq!(class, want);
    }
}
