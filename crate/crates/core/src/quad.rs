//! Quadrature primitives.
//!
//! Everything here is built on a single 21-point Gauss-Kronrod panel. On top of
//! it sit a globally adaptive driver, a geometric splitter for integrands that
//! vary over many decades, a substitution for slowly decaying semi-infinite
//! integrals, and a between-zeros partitioner with Euler (binomial averaging)
//! acceleration for oscillatory tails.

use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Nodes of the 10-point Gauss-Legendre rule on [-1, 1] (positive half).
pub const GL10_NODES: [f64; 5] = [XGK[1], XGK[3], XGK[5], XGK[7], XGK[9]];
/// Weights matching [`GL10_NODES`].
pub const GL10_WEIGHTS: [f64; 5] = WG;

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
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

/// Absolute/relative tolerance pair; a result is accepted when its error
/// estimate is below `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tol {
    pub abs: f64,
    pub rel: f64,
}

impl Tol {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    pub const fn rel(rel: f64) -> Self {
        Self { abs: 1e-300, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tol {
    fn default() -> Self {
        Self::new(1e-14, 1e-12)
    }
}

/// Result of a quadrature together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quad<T = f64> {
    pub value: T,
    pub error: f64,
    pub converged: bool,
}

impl Quad<f64> {
    /// Converts a non-converged result into an error.
    pub fn check(self, what: &str) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Quadrature { what: what.to_string(), achieved: self.error })
        }
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

/// One 21-point Gauss-Kronrod panel: (value, error estimate).
pub fn gk21<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let (v, e, _) = gk21_abs(f, a, b);
    (v, e)
}

/// [`gk21`] that also returns `∫|f|` over the panel.
fn gk21_abs<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = T::zero();
    let mut res_abs = fc.magnitude() * WGK[10];
    let mut f1 = [T::zero(); 10];
    let mut f2 = [T::zero(); 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let v1 = f(center - x);
        let v2 = f(center + x);
        f1[j] = v1;
        f2[j] = v2;
        res_k = res_k + (v1 + v2) * WGK[j];
        res_abs += WGK[j] * (v1.magnitude() + v2.magnitude());
        if j % 2 == 1 {
            res_g = res_g + (v1 + v2) * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).magnitude();
    for j in 0..10 {
        res_asc += WGK[j] * ((f1[j] - mean).magnitude() + (f2[j] - mean).magnitude());
    }
    let err = (res_k - res_g).magnitude() * half.abs();
    let value = res_k * half;
    let abs = res_abs * half.abs();
    (value, rescale_error(err, abs, res_asc * half.abs()), abs)
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    abs: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

const MAX_SEGMENTS: usize = 2000;

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
pub fn adaptive<T: QuadValue, F: Fn(f64) -> T>(f: F, a: f64, b: f64, tol: Tol) -> Quad<T> {
    if a == b {
        return Quad { value: T::zero(), error: 0.0, converged: true };
    }
    let (v, e, ab) = gk21_abs(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e, abs: ab });
    let mut total = v;
    let mut total_err = e;
    let mut total_abs = ab;
    // below this the error estimate is dominated by rounding in ∫|f|
    let floor = |abs: f64| 50.0 * f64::EPSILON * abs;
    while total_err > tol.target(total.magnitude()).max(floor(total_abs)) {
        if heap.len() >= MAX_SEGMENTS {
            return Quad { value: total, error: total_err, converged: false };
        }
        let seg = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a.min(seg.b) || mid >= seg.a.max(seg.b) {
            // interval exhausted at machine precision
            heap.push(seg);
            return Quad { value: total, error: total_err, converged: false };
        }
        let (v1, e1, a1) = gk21_abs(&f, seg.a, mid);
        let (v2, e2, a2) = gk21_abs(&f, mid, seg.b);
        total = total - seg.value + v1 + v2;
        total_err += e1 + e2 - seg.error;
        total_abs += a1 + a2 - seg.abs;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1, abs: a1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2, abs: a2 });
        if total_err < 0.0 {
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    Quad { value: total, error: total_err, converged: true }
}

/// Adaptive integration over `[a, b]` with `0 < a < b`, pre-split at
/// `a, 2a, 4a, ...` so that integrands varying on a logarithmic scale are
/// resolved from the start.
pub fn geometric<T: QuadValue, F: Fn(f64) -> T>(f: F, a: f64, b: f64, tol: Tol) -> Quad<T> {
    debug_assert!(a > 0.0 && b >= a);
    let mut edges = vec![a];
    let mut x = a;
    while x * 2.0 < b {
        x *= 2.0;
        edges.push(x);
    }
    edges.push(b);
    let pieces = (edges.len() - 1) as f64;
    let piece_tol = Tol::new(tol.abs / pieces, tol.rel);
    let mut out = Quad { value: T::zero(), error: 0.0, converged: true };
    for w in edges.windows(2) {
        let q = adaptive(&f, w[0], w[1], piece_tol);
        out.value = out.value + q.value;
        out.error += q.error;
        out.converged &= q.converged;
    }
    out
}

/// Binomial (Euler) averaging of partial sums: returns the apex of the
/// averaging triangle built on `partials`.
pub fn euler_apex<T: QuadValue>(partials: &[T]) -> T {
    let n = partials.len();
    if n == 0 {
        return T::zero();
    }
    let mut w = 0.5f64.powi(n as i32 - 1);
    let mut acc = T::zero();
    for (j, s) in partials.iter().enumerate() {
        acc = acc + *s * w;
        w *= (n - 1 - j) as f64 / (j + 1) as f64;
    }
    acc
}

const MIN_TERMS: usize = 8;
const MAX_TERMS: usize = 240;

fn accelerate<T: QuadValue, G: FnMut(usize) -> T>(
    head: T,
    mut term: G,
    tol: Tol,
    what: &str,
) -> Result<Quad<T>> {
    let mut partials: Vec<T> = Vec::with_capacity(64);
    let mut acc = head;
    let mut prev = T::zero();
    let mut prev_diff = f64::INFINITY;
    let mut scale = head.magnitude();
    for j in 0..MAX_TERMS {
        let t = term(j);
        scale = scale.max(t.magnitude());
        acc = acc + t;
        partials.push(acc);
        if partials.len() >= MIN_TERMS {
            let est = euler_apex(&partials);
            let diff = (est - prev).magnitude();
            let target = tol.abs.max(tol.rel * est.magnitude()).max(1e-15 * scale);
            if diff <= target && prev_diff <= target {
                return Ok(Quad { value: est, error: diff.max(prev_diff), converged: true });
            }
            prev_diff = diff;
            prev = est;
        }
    }
    Err(Error::Quadrature { what: what.to_string(), achieved: prev_diff })
}

/// `∫_a^∞ g(u) e^{i·freq·u} du` for `g` monotone and tending to zero.
///
/// The half-line is partitioned into half periods `π/freq` starting at `a`,
/// so consecutive pieces alternate in sign; their partial sums are
/// accelerated by binomial averaging.
pub fn oscillatory_tail<G: Fn(f64) -> f64>(
    g: G,
    a: f64,
    freq: f64,
    tol: Tol,
) -> Result<Quad<Complex64>> {
    if !(freq > 0.0) {
        return Err(Error::Parameter(format!("oscillatory_tail needs freq > 0, got {freq}")));
    }
    let hp = PI / freq;
    let piece_tol = Tol::new(tol.abs * 1e-3, (tol.rel * 1e-2).max(1e-14));
    let h = |u: f64| {
        let (s, c) = (freq * u).sin_cos();
        Complex64::new(c, s) * g(u)
    };
    let head = if a > 0.0 && hp > a {
        geometric(h, a, a + hp, piece_tol).value
    } else {
        adaptive(h, a, a + hp, piece_tol).value
    };
    accelerate(
        head,
        |j| {
            let lo = a + (j + 1) as f64 * hp;
            adaptive(h, lo, lo + hp, piece_tol).value
        },
        tol,
        "oscillatory tail",
    )
}

/// `∫_a^∞ f(u) du` for an integrand whose sign alternates (approximately)
/// with period `2·half_period`; pieces of length `half_period` are summed
/// with binomial averaging.
pub fn alternating_tail<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    half_period: f64,
    tol: Tol,
) -> Result<Quad> {
    let piece_tol = Tol::new(tol.abs * 1e-3, (tol.rel * 1e-2).max(1e-14));
    let head = adaptive(&f, a, a + half_period, piece_tol).value;
    accelerate(
        head,
        |j| {
            let lo = a + (j + 1) as f64 * half_period;
            adaptive(&f, lo, lo + half_period, piece_tol).value
        },
        tol,
        "alternating tail",
    )
}

/// `∫_{v0}^∞ g(v) dv` for `g ≥ 0` decaying at least like `v^{-1-ε}`; the tail
/// beyond `v0 + 1` is mapped onto a finite interval with `v = 1/w`.
pub fn semi_infinite<F: Fn(f64) -> f64>(g: F, v0: f64, tol: Tol) -> Quad {
    let v1 = v0.max(0.0) + 1.0;
    let head = adaptive(&g, v0, v1, tol);
    let tail = adaptive(
        |w: f64| {
            let v = 1.0 / w;
            let gv = g(v);
            if gv == 0.0 {
                0.0
            } else {
                gv * v * v
            }
        },
        0.0,
        1.0 / v1,
        tol,
    );
    Quad {
        value: head.value + tail.value,
        error: head.error + tail.error,
        converged: head.converged && tail.converged,
    }
}

/// `∫_{v0}^∞ g(v) dv` for nonnegative `g`, accumulated over doubling blocks
/// `[v0·2^k, v0·2^{k+1}]`. Reports divergence when the blocks stop
/// shrinking or the doubling budget runs out.
pub fn doubling_tail<F: Fn(f64) -> f64>(g: F, v0: f64, rel_tol: f64) -> Result<Quad> {
    if !(v0 > 0.0) {
        return Err(Error::Parameter(format!("doubling_tail needs v0 > 0, got {v0}")));
    }
    let mut total = 0.0;
    let mut err = 0.0;
    let mut lo = v0;
    let mut last_block = f64::INFINITY;
    let mut flat_run = 0;
    for _ in 0..64 {
        let q = adaptive(&g, lo, 2.0 * lo, Tol::new(1e-300, rel_tol * 1e-2));
        total += q.value;
        err += q.error;
        if q.value.abs() <= rel_tol * total.abs() {
            return Ok(Quad { value: total, error: err + q.value.abs(), converged: true });
        }
        if q.value.abs() >= 0.999 * last_block {
            flat_run += 1;
            if flat_run >= 6 {
                break;
            }
        } else {
            flat_run = 0;
        }
        last_block = q.value.abs();
        lo *= 2.0;
    }
    Err(Error::Divergent(format!(
        "blocks not shrinking after reaching v = {lo:e} (partial value {total:e})"
    )))
}

/// Composite 10-point Gauss-Legendre nodes and weights for the given panel
/// edges.
pub fn composite_gl10(edges: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(10 * edges.len());
    let mut weights = Vec::with_capacity(10 * edges.len());
    for w in edges.windows(2) {
        let c = 0.5 * (w[0] + w[1]);
        let h = 0.5 * (w[1] - w[0]);
        for (x, wt) in GL10_NODES.iter().zip(GL10_WEIGHTS.iter()) {
            nodes.push(c - h * x);
            weights.push(h * wt);
            nodes.push(c + h * x);
            weights.push(h * wt);
        }
    }
    (nodes, weights)
}
