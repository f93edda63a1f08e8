//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls into the library's numerical engines; every oracle is a
//! direct composite Gauss–Legendre evaluation of an integral representation.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss–Legendre over `[a, b]` split into `panels` equal pieces.
pub fn panels_c<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> Complex64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mut part = Complex64::new(0.0, 0.0);
        for (xi, wi) in x.iter().zip(&w) {
            part += f(lo + 0.5 * h * (xi + 1.0)) * *wi;
        }
        sum += part * (0.5 * h);
    }
    sum
}

pub fn panels_r<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    panels_c(|t| Complex64::new(f(t), 0.0), a, b, panels, order).re
}

/// `K_ν(x) = ∫₀^∞ e^{−x cosh t} cosh νt dt` for real `x > 0`.
pub fn bessel_k_real(nu: f64, x: f64) -> f64 {
    let t_max = (800.0 / x).max(2.0).acosh();
    panels_r(|t| (-x * t.cosh()).exp() * (nu * t).cosh(), 0.0, t_max, 400, 20)
}

/// `K_0, K_1` for `Re z > 0` from `K_ν(z) ∝ ∫₁^∞ e^{−zs}(s²−1)^{ν−1/2} ds` on the
/// rotated ray `s = 1 + v² e^{−i arg z}`, where the exponential decays monotonically.
pub fn bessel_k01_complex(z: Complex64) -> (Complex64, Complex64) {
    let (r, phi) = z.to_polar();
    let rot = Complex64::from_polar(1.0, -phi);
    let half = Complex64::from_polar(1.0, -0.5 * phi);
    let v_max = (60.0 / r).sqrt();
    let pre = (-z).exp();
    let k0 = panels_c(
        |v| {
            let w = rot * (v * v);
            (-r * v * v).exp() / (w + 2.0).sqrt()
        },
        0.0,
        v_max,
        300,
        20,
    ) * pre
        * half
        * 2.0;
    let k1 = panels_c(
        |v| {
            let w = rot * (v * v);
            (-r * v * v).exp() * (w + 2.0).sqrt() * (v * v)
        },
        0.0,
        v_max,
        300,
        20,
    ) * pre
        * z
        * half
        * rot
        * 2.0;
    (k0, k1)
}

/// `J_n(z) = (1/π)∫₀^π cos(nτ − z sin τ) dτ`, valid for complex `z`.
pub fn bessel_j_complex(n: i32, z: Complex64) -> Complex64 {
    let nf = n as f64;
    panels_c(|tau| (Complex64::from(nf * tau) - z * tau.sin()).cos(), 0.0, PI, 200, 20) / PI
}

/// `Y_n(z)` for `Re z > 0` from Schläfli's integral, with the second integral
/// written in `s = sinh t` and rotated onto `s = u e^{−i arg z}`.
pub fn bessel_y_complex(n: i32, z: Complex64) -> Complex64 {
    let nf = n as f64;
    let first = panels_c(|th| (z * th.sin() - nf * th).sin(), 0.0, PI, 200, 20) / PI;
    let (r, phi) = z.to_polar();
    let rot = Complex64::from_polar(1.0, -phi);
    let u_max = 60.0 / r;
    // (e^{nt} + (−1)^n e^{−nt}) dt = 2 ds/√(1+s²) for n = 0 and 2s ds/√(1+s²) for n = 1.
    let tail = panels_c(
        |u| {
            let s = rot * u;
            let g = if n == 0 { Complex64::new(1.0, 0.0) } else { s };
            (-r * u).exp() * g * 2.0 / (s * s + 1.0).sqrt()
        },
        0.0,
        u_max,
        600,
        20,
    ) * rot;
    first - tail / PI
}

/// Deterministic pseudo-random strip points `x + iy`, `x ∈ [x_lo, x_hi]` log-uniform, `|y| ≤ y_max`.
pub fn strip_points(count: usize, x_lo: f64, x_hi: f64, y_max: f64, seed: u64) -> Vec<Complex64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = (x_lo.ln() + rng.random::<f64>() * (x_hi.ln() - x_lo.ln())).exp();
            let y = y_max * (2.0 * rng.random::<f64>() - 1.0);
            Complex64::new(x, y)
        })
        .collect()
}

pub fn rel_dev(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
