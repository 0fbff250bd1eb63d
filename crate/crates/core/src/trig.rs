//! Trigonometric polynomials, the (ψ,β)-derivative on Fourier coefficients,
//! kernel partial sums with truncation bounds, and periodic convolution.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase;
use crate::shapes::PsiShape;

/// A 2π-periodic function that can be evaluated pointwise.
pub trait Periodic {
    fn eval(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64> Periodic for F {
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

/// `a0/2 + Σ_{k=1}^N (a_k cos kx + b_k sin kx)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrigPoly {
    pub a0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl TrigPoly {
    pub fn new(a0: f64, mut a: Vec<f64>, mut b: Vec<f64>) -> Self {
        let n = a.len().max(b.len());
        a.resize(n, 0.0);
        b.resize(n, 0.0);
        Self { a0, a, b }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(a0: f64) -> Self {
        Self::new(a0, vec![], vec![])
    }

    /// `c·cos kx`.
    pub fn cos(k: usize, c: f64) -> Self {
        if k == 0 {
            return Self::constant(2.0 * c);
        }
        let mut a = vec![0.0; k];
        a[k - 1] = c;
        Self::new(0.0, a, vec![])
    }

    /// `c·sin kx`.
    pub fn sin(k: usize, c: f64) -> Self {
        let mut b = vec![0.0; k];
        if k > 0 {
            b[k - 1] = c;
        }
        Self::new(0.0, vec![], b)
    }

    pub fn order(&self) -> usize {
        (0..self.a.len())
            .rev()
            .find(|&i| self.a[i] != 0.0 || self.b[i] != 0.0)
            .map_or(0, |i| i + 1)
    }

    /// Coefficient pair `(a_k, b_k)` for `k ≥ 1`, zero beyond the order.
    pub fn pair(&self, k: usize) -> (f64, f64) {
        if k == 0 || k > self.a.len() {
            (0.0, 0.0)
        } else {
            (self.a[k - 1], self.b[k - 1])
        }
    }

    pub fn max_coeff(&self) -> f64 {
        self.a.iter().chain(&self.b).fold(self.a0.abs(), |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (s1, c1) = x.sin_cos();
        // rotate (cos kx, sin kx) by x; resynchronise periodically against drift
        let (mut c, mut s) = (c1, s1);
        let mut acc = 0.5 * self.a0;
        for k in 0..self.a.len() {
            if k > 0 {
                if k % 64 == 0 {
                    let (sk, ck) = ((k + 1) as f64 * x).sin_cos();
                    s = sk;
                    c = ck;
                } else {
                    let cn = c * c1 - s * s1;
                    s = s * c1 + c * s1;
                    c = cn;
                }
            }
            acc += self.a[k] * c + self.b[k] * s;
        }
        acc
    }

    /// Keeps harmonics of order `≤ n`.
    pub fn truncate(&self, n: usize) -> Self {
        let m = n.min(self.a.len());
        Self::new(self.a0, self.a[..m].to_vec(), self.b[..m].to_vec())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.a.len().max(other.a.len());
        let mut out = Self::new(self.a0 + other.a0, vec![0.0; n], vec![0.0; n]);
        for k in 1..=n {
            let (a1, b1) = self.pair(k);
            let (a2, b2) = other.pair(k);
            out.a[k - 1] = a1 + a2;
            out.b[k - 1] = b1 + b2;
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(
            c * self.a0,
            self.a.iter().map(|v| c * v).collect(),
            self.b.iter().map(|v| c * v).collect(),
        )
    }
}

impl Periodic for TrigPoly {
    fn eval(&self, x: f64) -> f64 {
        TrigPoly::eval(self, x)
    }
}

/// (ψ,β)-derivative: each harmonic pair is divided by ψ(k) and rotated by
/// βπ/2. The constant term is dropped.
pub fn psi_beta_derivative(p: &TrigPoly, psi: &PsiShape, beta: f64) -> TrigPoly {
    let (s, c) = phase(beta);
    let n = p.a.len();
    let mut out = TrigPoly::new(0.0, vec![0.0; n], vec![0.0; n]);
    for k in 1..=n {
        let (a, b) = p.pair(k);
        let w = 1.0 / psi.eval(k as f64);
        out.a[k - 1] = w * (a * c + b * s);
        out.b[k - 1] = w * (b * c - a * s);
    }
    out
}

/// Inverse of [`psi_beta_derivative`] on zero-mean polynomials.
pub fn psi_beta_antiderivative(phi: &TrigPoly, psi: &PsiShape, beta: f64) -> Result<TrigPoly> {
    if phi.a0 != 0.0 {
        return Err(Error::Parameter(format!(
            "antiderivative needs a zero-mean input, a0 = {}",
            phi.a0
        )));
    }
    let (s, c) = phase(beta);
    let n = phi.a.len();
    let mut out = TrigPoly::new(0.0, vec![0.0; n], vec![0.0; n]);
    for k in 1..=n {
        let (a, b) = phi.pair(k);
        let w = psi.eval(k as f64);
        out.a[k - 1] = w * (a * c - b * s);
        out.b[k - 1] = w * (a * s + b * c);
    }
    Ok(out)
}

/// Which partial sum a kernel evaluation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelVariant {
    /// `Σ_{k≥n₀} ψ(k) cos(kt + βπ/2)`.
    Cosine,
    /// `Σ_{k≥n₀} ψ(k) sin kt`.
    TailSine,
}

#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub psi: PsiShape,
    pub beta: f64,
    pub n0: usize,
    /// Fixed truncation order; chosen from the tolerance when `None`.
    pub m: Option<usize>,
    pub variant: KernelVariant,
}

impl KernelSpec {
    /// The kernel Ψ_β, summed from k = 1.
    pub fn psi_beta(psi: PsiShape, beta: f64) -> Self {
        Self { psi, beta, n0: 1, m: None, variant: KernelVariant::Cosine }
    }

    /// `Σ_{k≥n} ψ(k) sin kt`.
    pub fn tail_sine(psi: PsiShape, n: usize) -> Self {
        Self { psi, beta: 0.0, n0: n, m: None, variant: KernelVariant::TailSine }
    }
}

/// Kernel value with the truncation order used and a bound on the omitted
/// tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: f64,
    pub m: usize,
    pub bound: f64,
}

/// Largest truncation order attempted.
pub const KERNEL_M_MAX: usize = 10_000_000;

/// Truncation order needed so that the Abel tail bound `ψ(M+1)/|sin(t/2)|`
/// (or the absolute bound `∫_M^∞ ψ`) is below `tol`.
fn choose_m(psi: &PsiShape, half_sine: f64, tol: f64, n0: usize) -> Option<usize> {
    let mut best: Option<f64> = None;
    if half_sine > 0.0 {
        let y = tol * half_sine;
        let m = if y >= psi.eval(1.0) { 1.0 } else { psi.inverse(y).ok()? };
        best = Some(m);
    }
    if half_sine == 0.0 && psi.plain_tail(1.0).is_some() {
        // the convexity bracket at t ≡ 0 has width at most ψ(M)/2
        let y = 2.0 * tol;
        best = Some(if y >= psi.eval(1.0) { 1.0 } else { psi.inverse(y).ok()? });
    } else if let Some(mut hi) = psi.plain_tail(1.0).map(|_| 1.0f64) {
        while psi.plain_tail(hi).unwrap() > tol && hi < 1e12 {
            hi *= 2.0;
        }
        best = Some(best.map_or(hi, |b| b.min(hi)));
    }
    let m = best?.ceil().max(n0 as f64);
    if m <= KERNEL_M_MAX as f64 {
        Some(m as usize)
    } else {
        None
    }
}

/// Evaluates a kernel partial sum at `t` with a rigorous bound on the
/// truncation error.
pub fn kernel_eval(spec: &KernelSpec, t: f64, tol: f64) -> Result<KernelValue> {
    let tr = t.rem_euclid(TAU);
    let at_zero = tr == 0.0 || (TAU - tr) < 1e-300;
    let half_sine = (0.5 * t).sin().abs();
    let (s_th, c_th) = phase(spec.beta);
    if spec.variant == KernelVariant::TailSine && at_zero {
        return Ok(KernelValue { value: 0.0, m: spec.n0, bound: 0.0 });
    }
    let m = match spec.m {
        Some(m) => m,
        None => choose_m(&spec.psi, if at_zero { 0.0 } else { half_sine }, tol, spec.n0).ok_or_else(|| {
            Error::ToleranceUnreachable {
                requested: tol,
                reason: format!(
                    "kernel of {} at t = {t} needs more than {KERNEL_M_MAX} terms",
                    spec.psi
                ),
            }
        })?,
    };
    let mut sum = 0.0;
    let mut comp = 0.0;
    for k in spec.n0..=m {
        let kt = k as f64 * t;
        let v = spec.psi.eval(k as f64)
            * match spec.variant {
                KernelVariant::Cosine => kt.cos() * c_th - kt.sin() * s_th,
                KernelVariant::TailSine => kt.sin(),
            };
        // Kahan summation
        let y = v - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    let mut bound = f64::INFINITY;
    if !at_zero {
        bound = spec.psi.eval((m + 1) as f64) / half_sine;
    }
    if let Some(abs_tail) = spec.psi.plain_tail(m as f64) {
        bound = bound.min(abs_tail);
    }
    if at_zero {
        // Σ_{k>m} ψ(k) lies in [∫_{m+1}^∞ ψ, ∫_{m+1/2}^∞ ψ] for convex ψ
        if let (Some(lo), Some(hi)) =
            (spec.psi.plain_tail((m + 1) as f64), spec.psi.plain_tail(m as f64 + 0.5))
        {
            sum += c_th * 0.5 * (lo + hi);
            bound = 0.5 * (hi - lo) * c_th.abs();
        } else if c_th != 0.0 {
            return Err(Error::ToleranceUnreachable {
                requested: tol,
                reason: format!("kernel of {} diverges at t ≡ 0", spec.psi),
            });
        } else {
            bound = 0.0;
        }
    }
    Ok(KernelValue { value: sum, m, bound })
}

/// Values of `Σ_{k=1}^{m} ψ(k) cos(k x_i + θ)` on the uniform grid
/// `x_i = 2πi/N`, by rotating `e^{i x_i}`.
fn kernel_table(psi: &PsiShape, beta: f64, n_grid: usize, m: usize) -> Vec<f64> {
    let (s_th, c_th) = phase(beta);
    let weights: Vec<f64> = (1..=m).map(|k| psi.eval(k as f64)).collect();
    (0..n_grid)
        .map(|i| {
            let x = TAU * i as f64 / n_grid as f64;
            let (s1, c1) = x.sin_cos();
            let (mut c, mut s) = (c1, s1);
            let mut acc = 0.0;
            for (k, w) in weights.iter().enumerate() {
                if k > 0 {
                    if k % 256 == 0 {
                        let (sk, ck) = ((k + 1) as f64 * x).sin_cos();
                        s = sk;
                        c = ck;
                    } else {
                        let cn = c * c1 - s * s1;
                        s = s * c1 + c * s1;
                        c = cn;
                    }
                }
                acc += w * (c * c_th - s * s_th);
            }
            acc
        })
        .collect()
}

/// Output of a sampled convolution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convolution {
    pub values: Vec<f64>,
    /// Kernel truncation order used.
    pub m: usize,
    /// Set when the truncation order requested by the caller was above the
    /// grid's Nyquist limit and had to be reduced.
    pub aliasing: bool,
}

fn check_grid(n_grid: usize) -> Result<()> {
    if n_grid < 256 || !n_grid.is_power_of_two() {
        return Err(Error::Parameter(format!(
            "convolution grid must be a power of two ≥ 256, got {n_grid}"
        )));
    }
    Ok(())
}

/// `a0/2 + (1/π) ∫ φ(x + t) Ψ_β(t) dt` by the trapezoidal rule on the grid of
/// `samples`, evaluated at grid indices `at` (all grid points when `None`).
///
/// The kernel is truncated at `spec.m` or at the Nyquist order `N/2 − 1`,
/// whichever is smaller.
pub fn convolve(
    samples: &[f64],
    spec: &KernelSpec,
    a0: f64,
    at: Option<&[usize]>,
) -> Result<Convolution> {
    let n_grid = samples.len();
    check_grid(n_grid)?;
    let nyquist = n_grid / 2 - 1;
    let m = spec.m.unwrap_or(nyquist).min(nyquist);
    let aliasing = spec.m.is_some_and(|req| req > nyquist);
    let table = kernel_table(&spec.psi, spec.beta, n_grid, m);
    let h = TAU / n_grid as f64;
    let all: Vec<usize>;
    let idx = match at {
        Some(ix) => ix,
        None => {
            all = (0..n_grid).collect();
            &all
        }
    };
    let values = idx
        .iter()
        .map(|&j| {
            let s: f64 = (0..n_grid).map(|i| samples[(j + i) % n_grid] * table[i]).sum();
            0.5 * a0 + s * h / PI
        })
        .collect();
    Ok(Convolution { values, m, aliasing })
}

/// Samples a periodic function on the uniform grid `2πi/N`.
pub fn sample<P: Periodic + ?Sized>(f: &P, n_grid: usize) -> Vec<f64> {
    (0..n_grid).map(|i| f.eval(TAU * i as f64 / n_grid as f64)).collect()
}

/// Piecewise-linear interpolation of uniform periodic samples.
pub fn interpolate(samples: &[f64], x: f64) -> f64 {
    let n = samples.len();
    let pos = x.rem_euclid(TAU) / TAU * n as f64;
    let i = (pos.floor() as usize) % n;
    let w = pos - pos.floor();
    samples[i] * (1.0 - w) + samples[(i + 1) % n] * w
}
