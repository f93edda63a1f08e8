//! Integration engines: globally adaptive Gauss–Kronrod on finite intervals,
//! half-lines and the real line, tensor Gauss–Legendre on 4D boxes, and fixed
//! Gauss rules used by the mode discretization.
//!
//! All engines are generic over [`QuadValue`], so scalar, complex and small
//! vector-valued integrands share one implementation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, AddAssign, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values an integrand may return.
pub trait QuadValue:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + AddAssign
{
    fn zero() -> Self;
    /// Size used for error control.
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Fixed-length complex vector; error control uses the largest component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CVec<const N: usize>(pub [Complex64; N]);

impl<const N: usize> Add for CVec<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self += o;
        self
    }
}

impl<const N: usize> AddAssign for CVec<N> {
    fn add_assign(&mut self, o: Self) {
        for (a, b) in self.0.iter_mut().zip(o.0) {
            *a += b;
        }
    }
}

impl<const N: usize> Sub for CVec<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(o.0) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Mul<f64> for CVec<N> {
    type Output = Self;
    fn mul(mut self, s: f64) -> Self {
        for a in self.0.iter_mut() {
            *a *= s;
        }
        self
    }
}

impl<const N: usize> QuadValue for CVec<N> {
    fn zero() -> Self {
        CVec([Complex64::new(0.0, 0.0); N])
    }
    fn magnitude(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Outcome of an integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<V> {
    pub value: V,
    pub est_error: f64,
    pub evaluations: usize,
}

/// Tolerances and budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of subintervals (adaptive) or panels per axis (box).
    pub max_subdivisions: usize,
}

impl QuadOptions {
    pub const fn new(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, max_subdivisions: 200_000 }
    }

    pub const fn with_budget(mut self, max_subdivisions: usize) -> Self {
        self.max_subdivisions = max_subdivisions;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value)
    }
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self::new(1e-9, 0.0)
    }
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525307880,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// One 21-point Kronrod panel: value and QUADPACK-style error estimate.
pub fn gk21<V: QuadValue, F: Fn(f64) -> V>(f: &F, a: f64, b: f64) -> (V, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[10];
    let mut gauss = V::zero();
    let mut resabs = fc.magnitude() * WGK[10];
    let mut fv = [V::zero(); 21];
    fv[10] = fc;
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv[j] = f1;
        fv[20 - j] = f2;
        kronrod += (f1 + f2) * WGK[j];
        resabs += (f1.magnitude() + f2.magnitude()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[10] * (fc - mean).magnitude();
    for j in 0..10 {
        resasc += WGK[j] * ((fv[j] - mean).magnitude() + (fv[20 - j] - mean).magnitude());
    }
    let scale = h.abs();
    resabs *= scale;
    resasc *= scale;
    let value = kronrod * h;
    let mut err = ((kronrod - gauss) * h).magnitude();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

struct Segment<V> {
    a: f64,
    b: f64,
    value: V,
    err: f64,
}

impl<V> PartialEq for Segment<V> {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl<V> Eq for Segment<V> {}
impl<V> PartialOrd for Segment<V> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<V> Ord for Segment<V> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive GK21 over `[breakpoints[0], breakpoints[last]]`; the
/// interior breakpoints seed the initial partition.
pub fn integrate_interval<V: QuadValue, F: Fn(f64) -> V>(
    f: F,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult<V>> {
    if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("breakpoints must be strictly increasing".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut total = V::zero();
    let mut total_err = 0.0;
    let mut evaluations = 0;
    let mut settled = V::zero();
    let mut settled_err = 0.0;
    for w in breakpoints.windows(2) {
        let (v, e) = gk21(&f, w[0], w[1]);
        evaluations += 21;
        total += v;
        total_err += e;
        heap.push(Segment { a: w[0], b: w[1], value: v, err: e });
    }
    let mut since_resum = 0;
    loop {
        if !total.magnitude().is_finite() || !total_err.is_finite() {
            return Err(Error::NonConvergence { est_error: f64::INFINITY, evaluations });
        }
        if total_err <= opts.target(total.magnitude()) {
            break;
        }
        if heap.len() >= opts.max_subdivisions {
            return Err(Error::NonConvergence { est_error: total_err, evaluations });
        }
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) || (seg.b - seg.a) < 1e-14 * seg.a.abs().max(seg.b.abs()) {
            // Cannot refine further; keep its contribution as settled.
            settled += seg.value;
            settled_err += seg.err;
            total = total - seg.value;
            total_err -= seg.err;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1) = gk21(&f, seg.a, mid);
        let (v2, e2) = gk21(&f, mid, seg.b);
        evaluations += 42;
        total = total - seg.value + v1 + v2;
        total_err += e1 + e2 - seg.err;
        heap.push(Segment { a: seg.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, err: e2 });
        since_resum += 1;
        if since_resum >= 64 {
            since_resum = 0;
            total = V::zero();
            total_err = 0.0;
            for s in heap.iter() {
                total += s.value;
                total_err += s.err;
            }
        }
        if settled_err > opts.target((total + settled).magnitude()) {
            return Err(Error::NonConvergence { est_error: total_err + settled_err, evaluations });
        }
    }
    let mut value = settled;
    let mut err = settled_err;
    let mut segs: Vec<_> = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    for s in segs {
        value += s.value;
        err += s.err;
    }
    Ok(QuadResult { value, est_error: err, evaluations })
}

/// Hints for [`integrate_halfline`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfLineHints {
    /// Lower limit of integration.
    pub start: f64,
    /// Rate `c` of the exponential envelope `e^{−c r}`.
    pub decay: f64,
    /// Initial panel width, e.g. half an oscillation period.
    pub panel: Option<f64>,
    /// Optional interior points worth starting from (peaks, kinks).
    pub extra_breaks: Option<[f64; 2]>,
}

impl HalfLineHints {
    pub fn decaying(decay: f64) -> Self {
        Self { start: 0.0, decay, panel: None, extra_breaks: None }
    }

    pub fn with_panel(mut self, panel: f64) -> Self {
        self.panel = Some(panel);
        self
    }
}

/// Envelope exponent beyond which the tail is neglected.
const HALFLINE_CUTOFF: f64 = 46.0;

/// `∫_start^∞ f` for integrands with an exponential envelope `e^{−decay·r}`.
///
/// The range is truncated where the envelope drops below `e^{−46}`; the
/// truncation error is estimated from the integrand at the cutoff and added to
/// `est_error`.
pub fn integrate_halfline<V: QuadValue, F: Fn(f64) -> V>(
    f: F,
    hints: HalfLineHints,
    opts: QuadOptions,
) -> Result<QuadResult<V>> {
    if !(hints.decay > 0.0) || !hints.decay.is_finite() {
        return Err(Error::InvalidParams(format!("decay hint must be positive, got {}", hints.decay)));
    }
    let end = hints.start + HALFLINE_CUTOFF / hints.decay;
    let span = end - hints.start;
    let mut width = span / 16.0;
    if let Some(p) = hints.panel {
        if p > 0.0 {
            width = width.min(p);
        }
    }
    let panels = (span / width).ceil().min(opts.max_subdivisions as f64 / 2.0).max(1.0) as usize;
    let mut breaks: Vec<f64> = (0..=panels).map(|i| hints.start + span * i as f64 / panels as f64).collect();
    if let Some(extra) = hints.extra_breaks {
        for x in extra {
            if x > hints.start && x < end {
                breaks.push(x);
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * span);
    }
    let mut res = integrate_interval(&f, &breaks, opts)?;
    let tail = f(end).magnitude() / hints.decay;
    res.est_error += tail;
    res.evaluations += 1;
    Ok(res)
}

/// `∫_ℝ f` for integrands decaying at least like `|t|^{−2}`.
///
/// The finite part between the outermost breakpoints is handled directly; each
/// tail is mapped to `[0, 1)` by `t = b ± u/(1−u)`.
pub fn integrate_line<V: QuadValue, F: Fn(f64) -> V>(
    f: F,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult<V>> {
    let mut breaks: Vec<f64> = breakpoints.to_vec();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    if breaks.is_empty() {
        breaks.push(0.0);
    }
    let lo = breaks[0];
    let hi = *breaks.last().expect("nonempty");
    let part_opts = QuadOptions { abs_tol: opts.abs_tol / 3.0, ..opts };
    let upper = integrate_interval(
        |u: f64| {
            let s = 1.0 - u;
            f(hi + u / s) * (1.0 / (s * s))
        },
        &[0.0, 0.5, 0.9, 0.99, 1.0],
        part_opts,
    )?;
    let lower = integrate_interval(
        |u: f64| {
            let s = 1.0 - u;
            f(lo - u / s) * (1.0 / (s * s))
        },
        &[0.0, 0.5, 0.9, 0.99, 1.0],
        part_opts,
    )?;
    let mut value = upper.value + lower.value;
    let mut est_error = upper.est_error + lower.est_error;
    let mut evaluations = upper.evaluations + lower.evaluations;
    if breaks.len() >= 2 {
        let mid = integrate_interval(&f, &breaks, part_opts)?;
        value += mid.value;
        est_error += mid.est_error;
        evaluations += mid.evaluations;
    }
    Ok(QuadResult { value, est_error, evaluations })
}

/// Axis-aligned box in `ℝ⁴` (time first).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
}

impl BoxDomain {
    pub fn new(lo: [f64; 4], hi: [f64; 4]) -> Result<Self> {
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::InvalidParams(format!("box bounds must satisfy lo < hi: {lo:?} {hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    /// Cube of half-width `half` around `center`.
    pub fn centered(center: [f64; 4], half: f64) -> Result<Self> {
        Self::new(center.map(|c| c - half), center.map(|c| c + half))
    }

    pub fn center(&self) -> [f64; 4] {
        std::array::from_fn(|i| 0.5 * (self.lo[i] + self.hi[i]))
    }

    pub fn volume(&self) -> f64 {
        (0..4).map(|i| self.hi[i] - self.lo[i]).product()
    }

    pub fn contains(&self, x: [f64; 4]) -> bool {
        (0..4).all(|i| x[i] >= self.lo[i] && x[i] <= self.hi[i])
    }
}

/// Composite Gauss–Legendre nodes and weights on `[a, b]`.
pub fn composite_rule(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(lo + 0.5 * h * (xi + 1.0));
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

/// Tensor-product rule: `Σ w_t w_1 w_2 w_3 f(t, x1, x2, x3)` with per-axis rules.
pub fn tensor_sum<V: QuadValue, F: Fn([f64; 4]) -> V>(f: &F, axes: &[(Vec<f64>, Vec<f64>); 4]) -> V {
    let mut total = V::zero();
    for (t, wt) in axes[0].0.iter().zip(&axes[0].1) {
        let mut s1 = V::zero();
        for (x1, w1) in axes[1].0.iter().zip(&axes[1].1) {
            let mut s2 = V::zero();
            for (x2, w2) in axes[2].0.iter().zip(&axes[2].1) {
                let mut s3 = V::zero();
                for (x3, w3) in axes[3].0.iter().zip(&axes[3].1) {
                    s3 += f([*t, *x1, *x2, *x3]) * *w3;
                }
                s2 += s3 * *w2;
            }
            s1 += s2 * *w1;
        }
        total += s1 * *wt;
    }
    total
}

/// Gauss order per panel used by [`integrate_box`].
pub const BOX_ORDER: usize = 6;

/// `∫_dom f` by tensor Gauss–Legendre with panel doubling; the error estimate
/// is the difference between successive refinements.
pub fn integrate_box<V: QuadValue, F: Fn([f64; 4]) -> V>(f: F, dom: BoxDomain, opts: QuadOptions) -> Result<QuadResult<V>> {
    let rule = |panels: usize| -> [(Vec<f64>, Vec<f64>); 4] {
        std::array::from_fn(|i| composite_rule(dom.lo[i], dom.hi[i], panels, BOX_ORDER))
    };
    let mut panels = 1;
    let mut prev = tensor_sum(&f, &rule(panels));
    let mut evaluations = BOX_ORDER.pow(4);
    loop {
        panels *= 2;
        if panels > opts.max_subdivisions.max(1) {
            return Err(Error::NonConvergence { est_error: f64::NAN, evaluations });
        }
        let next = tensor_sum(&f, &rule(panels));
        evaluations += (BOX_ORDER * panels).pow(4);
        let err = (next - prev).magnitude();
        if err <= opts.target(next.magnitude()) {
            return Ok(QuadResult { value: next, est_error: err, evaluations });
        }
        prev = next;
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Legendre order must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p_prev, mut p) = (1.0, z);
            if n == 1 {
                p_prev = 1.0;
            }
            for k in 2..=n {
                let kf = k as f64;
                let p_next = ((2.0 * kf - 1.0) * z * p - (kf - 1.0) * p_prev) / kf;
                p_prev = p;
                p = p_next;
            }
            dp = nf * (z * p - p_prev) / (z * z - 1.0);
            let step = p / dp;
            z -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Generalized Gauss–Laguerre rule for the weight `x^α e^{−x}` on `[0, ∞)`,
/// integer `α ≥ 0`, by the Golub–Welsch eigenvalue method.
pub fn gauss_laguerre(n: usize, alpha: u32) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Laguerre order must be positive");
    let mu0: f64 = (1..=alpha).map(f64::from).product();
    let alpha = f64::from(alpha);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let fi = i as f64;
        jac[(i, i)] = 2.0 * fi + alpha + 1.0;
        if i + 1 < n {
            let off = ((fi + 1.0) * (fi + 1.0 + alpha)).sqrt();
            jac[(i, i + 1)] = off;
            jac[(i + 1, i)] = off;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}
