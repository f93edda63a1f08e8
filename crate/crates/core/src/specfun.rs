//! Complex Bessel functions `K0, K1, J0, J1, Y0, Y1` near the positive real axis.
//!
//! Evaluation regimes:
//!
//! * `K`: ascending series for `|z| ≤ 2`, Temme's continued fraction (Steed's
//!   algorithm) for `2 < |z| ≤ 17`, asymptotic expansion truncated at its
//!   smallest term beyond that.
//! * `J, Y`: ascending series for `|z| ≤ 12`, Hankel asymptotic expansions
//!   truncated at the smallest term beyond that.
//!
//! The ascending `K` series loses roughly `e^{2|z|}` to cancellation and the
//! asymptotic series is only good to about `e^{−2|z|}`, so a single crossover
//! cannot deliver 1e-10 relative accuracy in between; the continued fraction
//! fills that gap.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Half-width of the strip around the positive real axis on which the
/// implementation is validated against the integral-representation oracle.
pub const STRIP_HALF_WIDTH: f64 = 1.0;
/// Largest modulus covered by the validation.
pub const VALIDATED_MAX_MODULUS: f64 = 50.0;

const K_SERIES_RADIUS: f64 = 2.0;
const K_ASYMPTOTIC_RADIUS: f64 = 17.0;
const JY_SERIES_RADIUS: f64 = 12.0;
const CUT_DISTANCE: f64 = 1e-12;
const MAX_TERMS: usize = 500;

/// A function value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub value: Complex64,
    pub est_error: f64,
}

impl BesselEval {
    fn new(value: Complex64, est_error: f64) -> Self {
        Self { value, est_error: est_error.max(f64::EPSILON * value.norm()) }
    }
}

/// Which Hankel function to build from `J ± iY`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HankelKind {
    First,
    Second,
}

fn check_cut(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Overflow(z));
    }
    if z.re <= 0.0 && z.im.abs() <= CUT_DISTANCE {
        return Err(Error::BranchCutProximity(z));
    }
    Ok(())
}

/// `K0(z)`.
pub fn bessel_k0(z: Complex64) -> Result<BesselEval> {
    bessel_k01(z).map(|(k0, _)| k0)
}

/// `K1(z)`.
pub fn bessel_k1(z: Complex64) -> Result<BesselEval> {
    bessel_k01(z).map(|(_, k1)| k1)
}

/// `(K0(z), K1(z))` for `z` off the cut `(−∞, 0]`.
pub fn bessel_k01(z: Complex64) -> Result<(BesselEval, BesselEval)> {
    check_cut(z)?;
    let r = z.norm();
    if r < 1e-300 {
        return Err(Error::Overflow(z));
    }
    if z.re > 700.0 {
        return Err(Error::Underflow(z));
    }
    if r <= K_SERIES_RADIUS {
        Ok(k01_series(z))
    } else if r <= K_ASYMPTOTIC_RADIUS {
        k01_continued_fraction(z)
    } else {
        Ok(k01_asymptotic(z))
    }
}

fn k01_series(z: Complex64) -> (BesselEval, BesselEval) {
    let y = z * z / 4.0;
    let ln_half = (z / 2.0).ln();
    let log_scale = ln_half.norm() + 1.0;

    // K0 = −(ln(z/2) + γ) I0 + Σ_{k≥1} H_k y^k/(k!)²
    let mut term = Complex64::new(1.0, 0.0);
    let mut i0 = Complex64::new(0.0, 0.0);
    let mut harmonic_sum = Complex64::new(0.0, 0.0);
    let mut harmonic = 0.0;
    let mut magnitude = 0.0;
    for k in 1..MAX_TERMS {
        i0 += term;
        harmonic_sum += term * harmonic;
        magnitude += term.norm() * (log_scale + harmonic);
        let kf = k as f64;
        term *= y / (kf * kf);
        harmonic += 1.0 / kf;
        if term.norm() * (log_scale + harmonic) < 1e-18 * (i0.norm() + harmonic_sum.norm()) {
            break;
        }
    }
    let k0 = -(ln_half + EULER_GAMMA) * i0 + harmonic_sum;
    let k0_err = 4.0 * f64::EPSILON * magnitude;

    // K1 = 1/z + ln(z/2) I1 − (z/4) Σ_{k≥0} (ψ(k+1) + ψ(k+2)) y^k/(k!(k+1)!)
    let mut term = Complex64::new(1.0, 0.0);
    let mut i1_sum = Complex64::new(0.0, 0.0);
    let mut psi_sum = Complex64::new(0.0, 0.0);
    let mut psi1 = -EULER_GAMMA;
    let mut psi2 = 1.0 - EULER_GAMMA;
    let mut magnitude = 0.0;
    for k in 1..MAX_TERMS {
        i1_sum += term;
        psi_sum += term * (psi1 + psi2);
        magnitude += term.norm() * (log_scale + (psi1 + psi2).abs());
        let kf = k as f64;
        term *= y / (kf * (kf + 1.0));
        psi1 += 1.0 / kf;
        psi2 += 1.0 / (kf + 1.0);
        if term.norm() * (log_scale + psi1 + psi2) < 1e-18 * (i1_sum.norm() + psi_sum.norm()) {
            break;
        }
    }
    let i1 = z / 2.0 * i1_sum;
    let k1 = z.inv() + ln_half * i1 - z / 4.0 * psi_sum;
    let k1_err = 4.0 * f64::EPSILON * (z.norm() * magnitude + z.inv().norm());
    (BesselEval::new(k0, k0_err), BesselEval::new(k1, k1_err))
}

/// Temme's CF2 evaluated by Steed's algorithm (order zero), valid for `|z| ≥ 2`
/// with `Re z > 0`.
fn k01_continued_fraction(z: Complex64) -> Result<(BesselEval, BesselEval)> {
    let one = Complex64::new(1.0, 0.0);
    let a1 = 0.25;
    let mut b = 2.0 * (one + z);
    let mut d = b.inv();
    let mut delh = d;
    let mut h = d;
    let mut q1 = Complex64::new(0.0, 0.0);
    let mut q2 = one;
    let mut q = Complex64::new(a1, 0.0);
    let mut c = a1;
    let mut a = -a1;
    let mut s = one + q * delh;
    let mut converged = false;
    for i in 2..MAX_TERMS * 20 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = (b + a * d).inv();
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() < 1e-17 * s.norm() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { est_error: f64::NAN, evaluations: MAX_TERMS * 20 });
    }
    h *= a1;
    let k0 = (PI / (2.0 * z)).sqrt() * (-z).exp() / s;
    let k1 = k0 * (z + 0.5 - h) / z;
    let rel = 16.0 * f64::EPSILON;
    Ok((BesselEval::new(k0, rel * k0.norm()), BesselEval::new(k1, rel * k1.norm())))
}

/// Sum of `Σ_k c_k a_k(ν)/z^k` with `a_k(ν) = Π_{j≤k}(4ν² − (2j−1)²)/(k! 8^k)`
/// truncated at the smallest term; `phase` multiplies the k-th term by `phase^k`.
fn asymptotic_sum(nu: f64, z: Complex64, phase: Complex64) -> (Complex64, f64) {
    let mu = 4.0 * nu * nu;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = term.norm();
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = term * phase * ((mu - odd * odd) / (8.0 * kf)) / z;
        let size = next.norm();
        if size >= last {
            return (sum, last);
        }
        sum += next;
        term = next;
        last = size;
        if size < 1e-18 * sum.norm() {
            break;
        }
    }
    (sum, last)
}

fn k01_asymptotic(z: Complex64) -> (BesselEval, BesselEval) {
    let pref = (PI / (2.0 * z)).sqrt() * (-z).exp();
    let one = Complex64::new(1.0, 0.0);
    let (s0, e0) = asymptotic_sum(0.0, z, one);
    let (s1, e1) = asymptotic_sum(1.0, z, one);
    let p = pref.norm();
    (
        BesselEval::new(pref * s0, p * (e0 + 4.0 * f64::EPSILON)),
        BesselEval::new(pref * s1, p * (e1 + 4.0 * f64::EPSILON)),
    )
}

/// `J1(z)`; entire, so no cut check.
pub fn bessel_j1(z: Complex64) -> Result<BesselEval> {
    jy01(z, false).map(|v| v.j1)
}

/// `J0(z)`.
pub fn bessel_j0(z: Complex64) -> Result<BesselEval> {
    jy01(z, false).map(|v| v.j0)
}

/// `Y1(z)` for `z` off the cut.
pub fn bessel_y1(z: Complex64) -> Result<BesselEval> {
    check_cut(z)?;
    jy01(z, true).map(|v| v.y1)
}

/// `Y0(z)` for `z` off the cut.
pub fn bessel_y0(z: Complex64) -> Result<BesselEval> {
    check_cut(z)?;
    jy01(z, true).map(|v| v.y0)
}

/// Orders zero and one of both kinds at a common argument.
#[derive(Debug, Clone, Copy)]
pub struct BesselJY {
    pub j0: BesselEval,
    pub j1: BesselEval,
    pub y0: BesselEval,
    pub y1: BesselEval,
}

/// `J0, J1, Y0, Y1` at once (the `Y` entries are only meaningful off the cut).
pub fn bessel_jy01(z: Complex64) -> Result<BesselJY> {
    check_cut(z)?;
    jy01(z, true)
}

fn jy01(z: Complex64, want_y: bool) -> Result<BesselJY> {
    if !(z.re.is_finite() && z.im.is_finite()) || z.im.abs() > 700.0 {
        return Err(Error::Overflow(z));
    }
    if z.norm() <= JY_SERIES_RADIUS {
        Ok(jy01_series(z, want_y))
    } else {
        let (h1, h2) = (hankel01_asymptotic(z, HankelKind::First), hankel01_asymptotic(z, HankelKind::Second));
        let combine = |a: BesselEval, b: BesselEval, second: bool| {
            let v = if second { (a.value - b.value) / Complex64::new(0.0, 2.0) } else { (a.value + b.value) / 2.0 };
            BesselEval::new(v, 0.5 * (a.est_error + b.est_error))
        };
        Ok(BesselJY {
            j0: combine(h1.0, h2.0, false),
            j1: combine(h1.1, h2.1, false),
            y0: combine(h1.0, h2.0, true),
            y1: combine(h1.1, h2.1, true),
        })
    }
}

fn jy01_series(z: Complex64, want_y: bool) -> BesselJY {
    let y = -(z * z) / 4.0;
    let zero = Complex64::new(0.0, 0.0);

    let mut t0 = Complex64::new(1.0, 0.0);
    let mut t1 = Complex64::new(1.0, 0.0);
    let (mut j0s, mut j1s, mut y0s, mut y1s) = (zero, zero, zero, zero);
    let mut harmonic = 0.0;
    let mut psi_pair = 1.0 - 2.0 * EULER_GAMMA;
    let (mut mag0, mut mag1, mut magy0, mut magy1) = (0.0, 0.0, 0.0, 0.0);
    for k in 1..MAX_TERMS {
        j0s += t0;
        j1s += t1;
        y0s += t0 * harmonic;
        y1s += t1 * psi_pair;
        mag0 += t0.norm();
        mag1 += t1.norm();
        magy0 += t0.norm() * harmonic;
        magy1 += t1.norm() * psi_pair.abs();
        let kf = k as f64;
        t0 *= y / (kf * kf);
        t1 *= y / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        psi_pair += 1.0 / kf + 1.0 / (kf + 1.0);
        let scale = j0s.norm() + j1s.norm() + y0s.norm() + y1s.norm();
        if (t0.norm() + t1.norm()) * (1.0 + psi_pair.abs()) < 1e-18 * scale {
            break;
        }
    }
    let eps4 = 4.0 * f64::EPSILON;
    let half = z / 2.0;
    let j0 = j0s;
    let j1 = half * j1s;
    let j0e = BesselEval::new(j0, eps4 * mag0);
    let j1e = BesselEval::new(j1, eps4 * mag1 * half.norm());
    if !want_y {
        let nan = BesselEval { value: Complex64::new(f64::NAN, f64::NAN), est_error: f64::NAN };
        return BesselJY { j0: j0e, j1: j1e, y0: nan, y1: nan };
    }
    let ln_half = half.ln();
    let two_pi = 2.0 / PI;
    // Y0 = (2/π)(ln(z/2)+γ)J0 − (2/π) Σ_{k≥1} H_k (−z²/4)^k/(k!)²
    let y0 = two_pi * ((ln_half + EULER_GAMMA) * j0 - y0s);
    // Y1 = (2/π) ln(z/2) J1 − 2/(πz) − (1/π)(z/2) Σ (ψ(k+1)+ψ(k+2)) (−z²/4)^k/(k!(k+1)!)
    let y1 = two_pi * ln_half * j1 - two_pi * z.inv() - half * y1s / PI;
    let lnm = ln_half.norm() + EULER_GAMMA;
    let y0_err = eps4 * two_pi * (lnm * mag0 + magy0);
    let y1_err = eps4 * (two_pi * lnm * mag1 * half.norm() + two_pi / z.norm() + half.norm() * magy1 / PI);
    BesselJY { j0: j0e, j1: j1e, y0: BesselEval::new(y0, y0_err), y1: BesselEval::new(y1, y1_err) }
}

/// Hankel asymptotic expansion of `(H_0, H_1)` of the given kind.
fn hankel01_asymptotic(z: Complex64, kind: HankelKind) -> (BesselEval, BesselEval) {
    let i = Complex64::new(0.0, 1.0);
    let (phase, sign) = match kind {
        HankelKind::First => (i, 1.0),
        HankelKind::Second => (-i, -1.0),
    };
    let pref = (2.0 / (PI * z)).sqrt();
    let mut out = [BesselEval { value: Complex64::new(0.0, 0.0), est_error: 0.0 }; 2];
    for (order, slot) in out.iter_mut().enumerate() {
        let nu = order as f64;
        let chi = z - nu * FRAC_PI_2 - FRAC_PI_4;
        let osc = (i * sign * chi).exp();
        let (s, e) = asymptotic_sum(nu, z, phase);
        let p = (pref * osc).norm();
        *slot = BesselEval::new(pref * osc * s, p * (e + 4.0 * f64::EPSILON));
    }
    (out[0], out[1])
}

/// `(H_0, H_1)` of the given kind for `z` off the cut.
pub fn hankel01(z: Complex64, kind: HankelKind) -> Result<(BesselEval, BesselEval)> {
    check_cut(z)?;
    if z.norm() > JY_SERIES_RADIUS {
        return Ok(hankel01_asymptotic(z, kind));
    }
    let v = jy01_series(z, true);
    let s = match kind {
        HankelKind::First => Complex64::new(0.0, 1.0),
        HankelKind::Second => Complex64::new(0.0, -1.0),
    };
    let make = |j: BesselEval, y: BesselEval| BesselEval::new(j.value + s * y.value, j.est_error + y.est_error);
    Ok((make(v.j0, v.y0), make(v.j1, v.y1)))
}

/// `K2(z) = K0(z) + 2K1(z)/z`, which is free of cancellation for `Re z > 0`.
pub fn bessel_k2_from(k0: Complex64, k1: Complex64, z: Complex64) -> Complex64 {
    k0 + 2.0 * k1 / z
}

/// Derivative `K1′(z) = −K0(z) − K1(z)/z`.
pub fn bessel_k1_prime(z: Complex64) -> Result<Complex64> {
    let (k0, k1) = bessel_k01(z)?;
    Ok(-k0.value - k1.value / z)
}

/// Derivatives `J1′ = J0 − J1/z` and `Y1′ = Y0 − Y1/z`.
pub fn bessel_jy1_prime(z: Complex64) -> Result<(Complex64, Complex64)> {
    let v = bessel_jy01(z)?;
    Ok((v.j0.value - v.j1.value / z, v.y0.value - v.y1.value / z))
}
