//! The lower-bound witness: the odd `2π/n`-periodic sawtooth φ_n built
//! from ω, the function f* whose (ψ,β)-derivative is φ_n, and the
//! alternation of `f* − U_{n-1}^ψ f*` at the points `iπ/n`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linear_method::apply_u_psi;
use crate::phase;
use crate::quad::{adaptive, Tol};
use crate::shapes::{Modulus, PsiShape};
use crate::trig::{convolve, psi_beta_antiderivative, sample, KernelSpec, Periodic, TrigPoly};

#[derive(Debug, Clone)]
pub struct ExtremalSpec {
    pub n: usize,
    pub omega: Modulus,
    pub psi: PsiShape,
    pub beta: f64,
    /// 1 for concave ω, 2/3 otherwise.
    pub c_omega: f64,
}

impl ExtremalSpec {
    pub fn new(n: usize, psi: PsiShape, omega: Modulus, beta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter(format!("the witness needs n ≥ 2, got {n}")));
        }
        if !beta.is_finite() {
            return Err(Error::Parameter(format!("beta must be finite, got {beta}")));
        }
        let c_omega = if omega.concave() { 1.0 } else { 2.0 / 3.0 };
        Ok(Self { n, omega, psi, beta, c_omega })
    }

    /// Truncation order of the coefficient route.
    pub fn order(&self) -> usize {
        512.max(64 * self.n)
    }
}

/// φ_n(t): `(c_ω/2)ω(2t)` on `[0, π/2n]`, `(c_ω/2)ω(2π/n − 2t)` on
/// `[π/2n, π/n]`, extended oddly with period `2π/n`.
pub fn phi_n_eval(spec: &ExtremalSpec, t: f64) -> f64 {
    let nf = spec.n as f64;
    let period = TAU / nf;
    let mut r = t.rem_euclid(period);
    let mut sign = 1.0;
    if r > PI / nf {
        r = period - r;
        sign = -1.0;
    }
    let arg = if r <= FRAC_PI_2 / nf { 2.0 * r } else { 2.0 * PI / nf - 2.0 * r };
    sign * 0.5 * spec.c_omega * spec.omega.eval(arg.max(0.0))
}

struct PhiN<'a>(&'a ExtremalSpec);

impl Periodic for PhiN<'_> {
    fn eval(&self, x: f64) -> f64 {
        phi_n_eval(self.0, x)
    }
}

/// `∫_{−π}^{π} φ_n(t) sin kt dt`, integrated piecewise between the kinks of
/// φ_n at multiples of `π/2n`.
pub fn orthogonality_check(spec: &ExtremalSpec, k: usize) -> f64 {
    let pieces = 4 * spec.n;
    let h = TAU / pieces as f64;
    let kf = k as f64;
    (0..pieces)
        .map(|j| {
            let lo = -PI + j as f64 * h;
            adaptive(|t: f64| phi_n_eval(spec, t) * (kf * t).sin(), lo, lo + h, Tol::new(1e-16, 1e-14)).value
        })
        .sum()
}

/// `(2c_ω/π) ∫_0^{π/2} ω(2s/n) sin(js) ds`, the sine coefficient of φ_n at
/// harmonic `jn` (odd `j`).
fn harmonic_coefficient(spec: &ExtremalSpec, j: usize) -> f64 {
    let nf = spec.n as f64;
    let jf = j as f64;
    let f = |s: f64| spec.omega.eval(2.0 * s / nf) * (jf * s).sin();
    let pieces = j.div_ceil(2).max(1);
    let h = FRAC_PI_2 / pieces as f64;
    let sum: f64 = (0..pieces)
        .map(|m| adaptive(f, m as f64 * h, (m + 1) as f64 * h, Tol::new(1e-17, 1e-14)).value)
        .sum();
    2.0 * spec.c_omega / PI * sum
}

/// Sine series of φ_n truncated at `spec.order()`, with a bound on the
/// omitted part of the matching f* series.
#[derive(Debug, Clone, Serialize)]
pub struct PhiSeries {
    pub poly: TrigPoly,
    pub order: usize,
    /// Bound on `Σ_{k>order} ψ(k)|b_k|`, the sup-norm truncation error of f*.
    pub tail_bound: f64,
}

pub fn phi_n_series(spec: &ExtremalSpec) -> Result<PhiSeries> {
    let order = spec.order();
    let nf = spec.n as f64;
    let mut b = vec![0.0; order];
    let jmax = order / spec.n;
    for j in (1..=jmax).step_by(2) {
        b[j * spec.n - 1] = harmonic_coefficient(spec, j);
    }
    // |b_{jn}| ≤ (4c_ω/π) ω(π/n)/j and Σ_{j>J} ψ(jn)/j ≤ ∫_{nJ}^∞ ψ(t)/t dt
    let tail_bound = 4.0 * spec.c_omega / PI * spec.omega.eval(PI / nf) * spec.psi.tail_integral((jmax * spec.n) as f64)?;
    Ok(PhiSeries { poly: TrigPoly::new(0.0, vec![0.0; order], b), order, tail_bound })
}

/// f* from its Fourier coefficients, with zero mean.
#[derive(Debug, Clone, Serialize)]
pub struct FStar {
    pub poly: TrigPoly,
    /// The truncated sine series of φ_n that `poly` was built from.
    pub phi: TrigPoly,
    pub tail_bound: f64,
    /// Nonzero harmonics as `(k, a_k, b_k)`; only odd multiples of n occur.
    harmonics: Vec<(usize, f64, f64)>,
}

impl FStar {
    pub fn eval(&self, x: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|&(k, a, b)| {
                let (s, c) = (k as f64 * x).sin_cos();
                a * c + b * s
            })
            .sum()
    }
}

impl Periodic for FStar {
    fn eval(&self, x: f64) -> f64 {
        FStar::eval(self, x)
    }
}

/// f* through the coefficient route: the (ψ,β)-antiderivative of the
/// truncated sine series of φ_n.
pub fn f_star(spec: &ExtremalSpec) -> Result<FStar> {
    let phi = phi_n_series(spec)?;
    let poly = psi_beta_antiderivative(&phi.poly, &spec.psi, spec.beta)?;
    let harmonics = (1..=poly.order())
        .filter_map(|k| {
            let (a, b) = poly.pair(k);
            (a != 0.0 || b != 0.0).then_some((k, a, b))
        })
        .collect();
    Ok(FStar { poly, phi: phi.poly, tail_bound: phi.tail_bound, harmonics })
}

/// f* at the grid points `2πi/N`, `i ∈ at`, through the trapezoidal
/// convolution of sampled φ_n with the kernel Ψ_β.
pub fn f_star_convolution(spec: &ExtremalSpec, n_grid: usize, at: &[usize]) -> Result<Vec<f64>> {
    let samples = sample(&PhiN(spec), n_grid);
    let kernel = KernelSpec::psi_beta(spec.psi.clone(), spec.beta);
    Ok(convolve(&samples, &kernel, 0.0, Some(at))?.values)
}

/// `f*(iπ/n) − U_{n-1}^ψ(f*; iπ/n)`.
///
/// φ_n only carries the harmonics `jn` with odd `j`, so `U_{n-1}^ψ f* = 0`
/// and the value is `(−1)^i f*(0) = −(−1)^i sin(βπ/2) Σ_k ψ(k) b_k`.
pub fn alternation_value(spec: &ExtremalSpec, fs: &FStar, i: i64) -> f64 {
    let x = i as f64 * PI / spec.n as f64;
    fs.eval(x) - apply_u_psi(&fs.poly, &spec.psi, spec.n).eval(x)
}

/// The closed form `−(−1)^i sin(βπ/2) Σ_k ψ(k) b_k` of [`alternation_value`],
/// with `b_k` the sine coefficients of φ_n.
pub fn alternation_closed_form(spec: &ExtremalSpec, fs: &FStar, i: i64) -> f64 {
    let (s, _) = phase(spec.beta);
    let series: f64 = (1..=fs.phi.order()).map(|k| spec.psi.eval(k as f64) * fs.phi.pair(k).1).sum();
    let sign = if i.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    -sign * s * series
}

/// Sign pattern of `f* − U_{n-1}^ψ f*` at `t_i = iπ/n`, `i = 0..2n−1`.
#[derive(Debug, Clone, Serialize)]
pub struct Alternation {
    pub values: Vec<f64>,
    /// Number of strict sign changes around the closed cycle of 2n points.
    pub sign_changes: usize,
}

pub fn alternation(spec: &ExtremalSpec, fs: &FStar) -> Alternation {
    let m = 2 * spec.n;
    let u = apply_u_psi(&fs.poly, &spec.psi, spec.n);
    let values: Vec<f64> = (0..m)
        .map(|i| {
            let x = i as f64 * PI / spec.n as f64;
            fs.eval(x) - u.eval(x)
        })
        .collect();
    let sign_changes = (0..m)
        .filter(|&i| {
            let (a, b) = (values[i], values[(i + 1) % m]);
            a * b < 0.0
        })
        .count();
    Alternation { values, sign_changes }
}

/// Lower bound `E_n(f*) ≥ |f*(0) − U_{n-1}^ψ(f*; 0)|` from 2n alternations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DvpBound {
    pub value: f64,
    /// `sin(βπ/2) = 0`: the witness carries no alternation and the bound is 0.
    pub degenerate: bool,
}

pub fn dvp_lower_bound(spec: &ExtremalSpec, fs: &FStar) -> Result<DvpBound> {
    let (s, _) = phase(spec.beta);
    if s == 0.0 {
        return Ok(DvpBound { value: 0.0, degenerate: true });
    }
    let alt = alternation(spec, fs);
    if alt.sign_changes != 2 * spec.n {
        return Err(Error::DegenerateAlternation(format!(
            "{} sign changes at iπ/n, expected {}",
            alt.sign_changes,
            2 * spec.n
        )));
    }
    let value = alt.values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    Ok(DvpBound { value, degenerate: false })
}
