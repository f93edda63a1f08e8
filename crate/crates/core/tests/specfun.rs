mod common;

use cfslab::specfun::{
    bessel_j0, bessel_j1, bessel_jy01, bessel_k0, bessel_k01, bessel_k1, bessel_k1_prime, bessel_y1, hankel01,
    HankelKind, EULER_GAMMA, STRIP_HALF_WIDTH, VALIDATED_MAX_MODULUS,
};
use cfslab::Error;
use common::{bessel_j_complex, bessel_k01_complex, bessel_k_real, bessel_y_complex, rel_dev, strip_points};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Oracle outputs frozen at generation time: (function, x, y, re, im).
const FIXTURES: &[(&str, f64, f64, f64, f64)] = include!("fixtures/bessel_oracle.in");

#[test]
fn real_axis_fixture_values() {
    let cases = [
        (bessel_k1(c(1.0)).unwrap().value.re, 0.6019072301972346),
        (bessel_k1(c(10.0)).unwrap().value.re, 1.8648773453708e-5),
        (bessel_k0(c(1.0)).unwrap().value.re, 0.4210244382407084),
        (bessel_k0(c(5.0)).unwrap().value.re, 3.691098334043e-3),
        (bessel_j1(c(1.0)).unwrap().value.re, 0.4400505857449335),
    ];
    for (got, want) in cases {
        assert!((got - want).abs() <= 1e-10 * want.abs(), "{got} vs {want}");
    }
}

#[test]
fn real_axis_values_match_cosh_oracle() {
    for x in [0.05, 0.3, 1.0, 2.5, 5.0, 10.0, 17.5, 30.0] {
        let (k0, k1) = bessel_k01(c(x)).unwrap();
        assert!((k0.value.re - bessel_k_real(0.0, x)).abs() < 1e-12 * bessel_k_real(0.0, x), "K0({x})");
        assert!((k1.value.re - bessel_k_real(1.0, x)).abs() < 1e-12 * bessel_k_real(1.0, x), "K1({x})");
    }
}

#[test]
fn frozen_fixtures_match_oracle_and_library() {
    assert!(FIXTURES.len() >= 20);
    for &(name, x, y, re, im) in FIXTURES {
        let z = Complex64::new(x, y);
        let want = Complex64::new(re, im);
        let (oracle, lib) = match name {
            "K0" => (bessel_k01_complex(z).0, bessel_k0(z).unwrap().value),
            "K1" => (bessel_k01_complex(z).1, bessel_k1(z).unwrap().value),
            "J1" => (bessel_j_complex(1, z), bessel_j1(z).unwrap().value),
            "Y1" => (bessel_y_complex(1, z), bessel_y1(z).unwrap().value),
            _ => unreachable!(),
        };
        assert!(rel_dev(oracle, want) < 1e-12, "oracle drifted for {name}({z})");
        assert!(rel_dev(lib, want) < 1e-10, "{name}({z}): {lib} vs {want}");
    }
}

#[test]
fn oracle_agreement_on_random_strip_points() {
    let pts = strip_points(100, 0.05, VALIDATED_MAX_MODULUS, STRIP_HALF_WIDTH, 7);
    let mut worst = 0.0f64;
    for z in pts {
        let (k0o, k1o) = bessel_k01_complex(z);
        let (k0, k1) = bessel_k01(z).unwrap();
        let jy = bessel_jy01(z).unwrap();
        let devs = [
            rel_dev(k0.value, k0o),
            rel_dev(k1.value, k1o),
            rel_dev(jy.j1.value, bessel_j_complex(1, z)),
            rel_dev(jy.y1.value, bessel_y_complex(1, z)),
            rel_dev(jy.j0.value, bessel_j_complex(0, z)),
            rel_dev(jy.y0.value, bessel_y_complex(0, z)),
        ];
        for d in devs {
            worst = worst.max(d);
        }
        assert!(devs.iter().all(|d| *d < 1e-9), "z = {z}: {devs:?}");
    }
    eprintln!("worst strip deviation {worst:e}");
}

#[test]
fn error_estimates_cover_true_error() {
    for z in strip_points(60, 0.05, VALIDATED_MAX_MODULUS, STRIP_HALF_WIDTH, 11) {
        let (k0o, k1o) = bessel_k01_complex(z);
        let (k0, k1) = bessel_k01(z).unwrap();
        assert!((k0.value - k0o).norm() <= 10.0 * k0.est_error + 1e-14 * k0o.norm());
        assert!((k1.value - k1o).norm() <= 10.0 * k1.est_error + 1e-14 * k1o.norm());
    }
}

#[test]
fn small_argument_limits() {
    let z = c(1e-6);
    let k1 = bessel_k1(z).unwrap().value;
    assert!(((z * k1).re - 1.0).abs() < 1e-5);
    let k0 = bessel_k0(z).unwrap().value;
    assert!(((k0 + (z / 2.0).ln()).re + EULER_GAMMA).abs() < 1e-5);
    let y1 = bessel_y1(z).unwrap().value;
    assert!(((z * y1).re + 2.0 / std::f64::consts::PI).abs() < 1e-5);
    assert_eq!(bessel_j1(c(0.0)).unwrap().value, c(0.0));
    assert_eq!(bessel_j0(c(0.0)).unwrap().value, c(1.0));
}

#[test]
fn branch_cut_is_rejected() {
    assert!(matches!(bessel_k1(c(-1.0)), Err(Error::BranchCutProximity(_))));
    assert!(matches!(bessel_y1(Complex64::new(-2.0, 1e-13)), Err(Error::BranchCutProximity(_))));
    assert!(matches!(bessel_k0(c(0.0)), Err(Error::BranchCutProximity(_))));
    assert!(matches!(bessel_k1(c(800.0)), Err(Error::Underflow(_))));
    assert!(bessel_j1(c(-1.0)).is_ok());
    assert!(bessel_k1(Complex64::new(-1.0, 0.5)).is_ok());
}

#[test]
fn hankel_matches_j_plus_i_y() {
    for z in strip_points(40, 0.5, 40.0, 1.0, 3) {
        let jy = bessel_jy01(z).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let (h10, h11) = hankel01(z, HankelKind::First).unwrap();
        let (h20, h21) = hankel01(z, HankelKind::Second).unwrap();
        assert!(rel_dev(h10.value, jy.j0.value + i * jy.y0.value) < 1e-12);
        assert!(rel_dev(h11.value, jy.j1.value + i * jy.y1.value) < 1e-12);
        assert!(rel_dev(h20.value, jy.j0.value - i * jy.y0.value) < 1e-12);
        assert!(rel_dev(h21.value, jy.j1.value - i * jy.y1.value) < 1e-12);
    }
}

proptest! {
    #[test]
    fn wronskian_j1_y1(x in 0.1f64..20.0) {
        let z = c(x);
        let jy = bessel_jy01(z).unwrap();
        let (j1p, y1p) = cfslab::specfun::bessel_jy1_prime(z).unwrap();
        let w = jy.j1.value * y1p - j1p * jy.y1.value;
        let want = 2.0 / (std::f64::consts::PI * x);
        prop_assert!((w.re - want).abs() <= 1e-8 * want && w.im.abs() <= 1e-8 * want);
    }

    #[test]
    fn k1_derivative_recurrence(x in 0.1f64..40.0, y in -1.0f64..1.0) {
        let z = Complex64::new(x, y);
        let h = 1e-5 * z.norm();
        let fd = (bessel_k1(z + h).unwrap().value - bessel_k1(z - h).unwrap().value) / (2.0 * h);
        let exact = bessel_k1_prime(z).unwrap();
        prop_assert!(rel_dev(fd, exact) < 1e-6);
    }
}

/// Regenerates `fixtures/bessel_oracle.in` from the oracle alone:
/// `cargo test --test specfun -- --ignored --nocapture print_oracle_fixtures`.
#[test]
#[ignore]
fn print_oracle_fixtures() {
    let mut pts = vec![c(1.0), c(10.0), c(0.05), c(49.0)];
    pts.extend(strip_points(8, 0.05, VALIDATED_MAX_MODULUS, STRIP_HALF_WIDTH, 2024));
    println!("&[");
    for z in pts {
        let (k0, k1) = bessel_k01_complex(z);
        for (name, v) in [("K0", k0), ("K1", k1), ("J1", bessel_j_complex(1, z)), ("Y1", bessel_y_complex(1, z))] {
            println!("    (\"{name}\", {:?}, {:?}, {:?}, {:?}),", z.re, z.im, v.re, v.im);
        }
    }
    println!("]");
}

const STRIP_SEED: u64 = 99;

/// Regenerates `fixtures/bessel_strip.in`, the frozen strip oracle used by the
/// acceptance runner:
/// `cargo test --test specfun -- --ignored --nocapture print_strip_fixtures`.
#[test]
#[ignore]
fn print_strip_fixtures() {
    println!("&[");
    for z in strip_points(100, 0.05, VALIDATED_MAX_MODULUS, STRIP_HALF_WIDTH, STRIP_SEED) {
        let (k0, k1) = bessel_k01_complex(z);
        let vals = [k0, k1, bessel_j_complex(0, z), bessel_j_complex(1, z), bessel_y_complex(0, z), bessel_y_complex(1, z)];
        let body: Vec<String> = vals.iter().map(|v| format!("({:?}, {:?})", v.re, v.im)).collect();
        println!("    (({:?}, {:?}), [{}]),", z.re, z.im, body.join(", "));
    }
    println!("]");
}

type StripRow = ((f64, f64), [(f64, f64); 6]);

const STRIP: &[StripRow] = include!("../fixtures/bessel_strip.in");

#[test]
fn frozen_strip_fixture_matches_oracle() {
    assert_eq!(STRIP.len(), 100);
    for (i, z) in strip_points(100, 0.05, VALIDATED_MAX_MODULUS, STRIP_HALF_WIDTH, STRIP_SEED).into_iter().enumerate() {
        let ((x, y), vals) = STRIP[i];
        assert_eq!((x, y), (z.re, z.im));
        let (k0, k1) = bessel_k01_complex(z);
        let oracle = [k0, k1, bessel_j_complex(0, z), bessel_j_complex(1, z), bessel_y_complex(0, z), bessel_y_complex(1, z)];
        for (o, (re, im)) in oracle.iter().zip(vals) {
            assert!(rel_dev(*o, Complex64::new(re, im)) < 1e-12, "fixture drifted at z = {z}");
        }
    }
}
