//! The linear method U_{n-1}^ψ, general multiplier operators, the kernel
//! τ_n and its transform τ̂_n, and the integral representation of the
//! remainder f − U_{n-1}^ψ f.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase;
use crate::quad::{adaptive, composite_gl10, oscillatory_tail, Tol};
use crate::shapes::PsiShape;
use crate::special::cos_power_tail;
use crate::trig::TrigPoly;

/// Triangular-row multipliers λ_k^{(n)}, k = 0..n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierSet {
    pub n: usize,
    /// `lambdas[k] = λ_k^{(n)}`, with `lambdas[0] = 1`.
    pub lambdas: Vec<f64>,
}

impl MultiplierSet {
    /// The multipliers of U_{n-1}^ψ: `λ^ψ(k/n)`.
    pub fn psi(psi: &PsiShape, n: usize) -> Self {
        let lambdas = (0..=n).map(|k| lambda_psi(psi, n, k as f64 / n as f64)).collect();
        Self { n, lambdas }
    }

    /// All multipliers equal to one.
    pub fn identity(n: usize) -> Self {
        Self { n, lambdas: vec![1.0; n + 1] }
    }
}

/// The continuous profile λ^ψ(u) on [0, 1].
pub fn lambda_psi(psi: &PsiShape, n: usize, u: f64) -> f64 {
    let nf = n as f64;
    if u <= 1.0 / nf {
        1.0 - psi.eval(nf) / psi.eval(1.0) * u / nf
    } else {
        1.0 - psi.eval(nf) / psi.eval(nf * u) * u * u
    }
}

/// U_{n-1}^ψ(f): the k-th pair scaled by `1 − (ψ(n)/ψ(k))(k/n)²`, k < n.
pub fn apply_u_psi(f: &TrigPoly, psi: &PsiShape, n: usize) -> TrigPoly {
    let nf = n as f64;
    let m = (n.saturating_sub(1)).min(f.a.len());
    let mut out = TrigPoly::new(f.a0, vec![0.0; m], vec![0.0; m]);
    for k in 1..=m {
        let kf = k as f64;
        let lam = 1.0 - psi.eval(nf) / psi.eval(kf) * (kf * kf) / (nf * nf);
        let (a, b) = f.pair(k);
        out.a[k - 1] = lam * a;
        out.b[k - 1] = lam * b;
    }
    out
}

/// U_n(f; Λ): the k-th pair scaled by λ_k^{(n)}; harmonics above n dropped.
pub fn apply_u_lambda(f: &TrigPoly, m: &MultiplierSet) -> TrigPoly {
    let top = m.n.min(f.a.len());
    let mut out = TrigPoly::new(f.a0 * m.lambdas[0], vec![0.0; top], vec![0.0; top]);
    for k in 1..=top {
        let (a, b) = f.pair(k);
        out.a[k - 1] = m.lambdas[k] * a;
        out.b[k - 1] = m.lambdas[k] * b;
    }
    out
}

/// `f(x) − U_{n-1}^ψ(f; x)` from the coefficients.
pub fn direct_remainder(f: &TrigPoly, psi: &PsiShape, n: usize, x: f64) -> f64 {
    f.eval(x) - apply_u_psi(f, psi, n).eval(x)
}

/// `∫_0^1 u sin ut du`, `∫_0^1 u cos ut du` and `∫_0^1 u² sin ut du` for
/// `t ≥ 0`.
pub fn unit_moments(t: f64) -> (f64, f64, f64) {
    if t < 0.5 {
        let t2 = t * t;
        let (mut a, mut b, mut d) = (0.0, 0.0, 0.0);
        let mut odd = t; // t^{2m+1}/(2m+1)!
        let mut even = 1.0; // t^{2m}/(2m)!
        for m in 0..12 {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let mf = m as f64;
            a += sign * odd / (2.0 * mf + 3.0);
            b += sign * even / (2.0 * mf + 2.0);
            d += sign * odd / (2.0 * mf + 4.0);
            odd *= t2 / ((2.0 * mf + 2.0) * (2.0 * mf + 3.0));
            even *= t2 / ((2.0 * mf + 1.0) * (2.0 * mf + 2.0));
        }
        (a, b, d)
    } else {
        let (s, c) = t.sin_cos();
        let t2 = t * t;
        let a = (s - t * c) / t2;
        let b = (c + t * s - 1.0) / t2;
        let d = (2.0 * t * s - (t2 - 2.0) * c - 2.0) / (t2 * t);
        (a, b, d)
    }
}

/// The profile τ_n(u) = ψ(n)u² on [0,1], ψ(nu) for u ≥ 1.
#[derive(Debug, Clone)]
pub struct TauKernel {
    pub psi: PsiShape,
    pub n: usize,
}

/// Cosine and sine transforms of τ_n at `t ≥ 0`:
/// `C(t) = ∫_0^∞ τ_n(u) cos ut du`, `S(t) = ∫_0^∞ τ_n(u) sin ut du`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauComponents {
    pub t: f64,
    pub c: f64,
    pub s: f64,
    /// Quadrature error estimate of the oscillatory parts.
    pub error: f64,
}

/// Value of τ̂_n(t; β) with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauHat {
    pub value: f64,
    pub error: f64,
}

/// Above this `t` the sine transform is assembled from the integrated-by-parts
/// form; below it the direct split avoids cancellation between its two terms.
const IBP_SINE_MIN_T: f64 = 1.0;

impl TauKernel {
    pub fn new(psi: PsiShape, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("τ_n needs n ≥ 1".into()));
        }
        Ok(Self { psi, n })
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u <= 1.0 {
            self.psi.eval(self.nf()) * u * u
        } else {
            self.psi.eval(self.nf() * u)
        }
    }

    fn tol(&self) -> Tol {
        Tol::new(1e-17 * self.psi.eval(self.nf()), 1e-12)
    }

    /// `∫_1^∞ ψ′(nu) e^{iut} du` (real part `Q`, imaginary part `P`).
    pub fn derivative_tail(&self, t: f64) -> Result<(Complex64, f64)> {
        let nf = self.nf();
        let q = oscillatory_tail(|u| self.psi.deriv_plus(nf * u), 1.0, t, self.tol())?;
        Ok((q.value, q.error))
    }

    /// `∫_1^∞ ψ(nu) e^{iut} du`.
    pub fn value_tail(&self, t: f64) -> Result<(Complex64, f64)> {
        let nf = self.nf();
        let q = oscillatory_tail(|u| self.psi.eval(nf * u), 1.0, t, self.tol())?;
        Ok((q.value, q.error))
    }

    /// C(t) and S(t) for `t ≥ 0` through the integrated-by-parts forms
    /// `C = −(2ψ(n)/t)∫_0^1 u sin ut − (n/t)∫_1^∞ ψ′(nu) sin ut` and the
    /// matching form for S (direct split for small t).
    pub fn components(&self, t: f64) -> Result<TauComponents> {
        let t = t.abs();
        let nf = self.nf();
        let pn = self.psi.eval(nf);
        if t == 0.0 {
            let tail = self.psi.plain_tail(nf).ok_or_else(|| {
                Error::Divergent(format!("∫_0^∞ τ_n diverges for {}", self.psi))
            })?;
            return Ok(TauComponents { t, c: pn / 3.0 + tail / nf, s: 0.0, error: 0.0 });
        }
        let (a, b, d) = unit_moments(t);
        let (qp, e1) = self.derivative_tail(t)?;
        let c = -2.0 * pn / t * a - nf / t * qp.im;
        let (s, e2) = if t >= IBP_SINE_MIN_T {
            (2.0 * pn / t * b + nf / t * qp.re, 0.0)
        } else {
            let (v, e) = self.value_tail(t)?;
            (pn * d + v.im, e)
        };
        Ok(TauComponents { t, c, s, error: nf / t * e1 + e2 })
    }

    /// τ̂_n(t; β) = (1/π)[cos(βπ/2) C(|t|) ∓ sin(βπ/2) S(|t|)].
    pub fn tau_hat(&self, beta: f64, t: f64) -> Result<TauHat> {
        let (sn, cs) = phase(beta);
        if t == 0.0 && cs == 0.0 {
            return Ok(TauHat { value: 0.0, error: 0.0 });
        }
        let comp = self.components(t)?;
        Ok(TauHat { value: combine(&comp, sn, cs, t.is_sign_negative()), error: comp.error / PI })
    }

    /// τ̂_n(t; β) by direct oscillatory quadrature of the defining integral.
    pub fn tau_hat_direct(&self, beta: f64, t: f64) -> Result<TauHat> {
        let (sn, cs) = phase(beta);
        let pn = self.psi.eval(self.nf());
        let th = Complex64::new(cs, sn);
        if t == 0.0 {
            let c = self.components(0.0)?;
            return Ok(TauHat { value: cs * c.c / PI, error: 0.0 });
        }
        let head = adaptive(
            |u: f64| {
                let (s, c) = (u * t).sin_cos();
                Complex64::new(c, s) * (pn * u * u)
            },
            0.0,
            1.0,
            Tol::new(1e-17 * pn, 1e-13),
        );
        let (tail, err) = if t > 0.0 {
            self.value_tail(t)?
        } else {
            let (v, e) = self.value_tail(-t)?;
            (v.conj(), e)
        };
        let value = (th * (head.value + tail)).re / PI;
        Ok(TauHat { value, error: (head.error + err) / PI })
    }

    /// Jumps of τ_n′ and τ_n″ at u = 1, which drive the large-t behaviour.
    pub fn jumps(&self) -> (f64, f64) {
        let nf = self.nf();
        let pn = self.psi.eval(nf);
        (nf * self.psi.deriv_plus(nf) - 2.0 * pn, nf * nf * self.psi.second_deriv(nf) - 2.0 * pn)
    }

    /// Leading large-|t| expansion of τ̂_n (error O(t⁻⁴)).
    pub fn tau_hat_asymptotic(&self, beta: f64, t: f64) -> f64 {
        let (sn, _) = phase(beta);
        let th = beta * FRAC_PI_2;
        let (j, k) = self.jumps();
        let pn = self.psi.eval(self.nf());
        let s = t.abs();
        let ph = if t > 0.0 { s + th } else { s - th };
        let sg = if t > 0.0 { 1.0 } else { -1.0 };
        (-j * ph.cos() / (s * s) + (k * ph.sin() + sg * 2.0 * pn * sn) / (s * s * s)) / PI
    }
}

fn combine(comp: &TauComponents, sn: f64, cs: f64, negative: bool) -> f64 {
    let s = if negative { -comp.s } else { comp.s };
    (cs * comp.c - sn * s) / PI
}

/// Node layout `[0, 2^-40]`, geometric panels up to 1, unit panels up to `t_max`.
pub fn smooth_edges(t_max: f64) -> Vec<f64> {
    let mut edges = vec![0.0];
    edges.extend((0..=40).rev().map(|k| 0.5f64.powi(k)));
    let mut x = 1.0;
    while x < t_max {
        x = (x + 1.0).min(t_max);
        edges.push(x);
    }
    edges
}

/// Quadrature nodes on `t ≥ 0` with C and S stored at each node.
#[derive(Debug, Clone, Serialize)]
pub struct NodeTable {
    pub n: usize,
    pub t_max: f64,
    pub t: Vec<f64>,
    pub w: Vec<f64>,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
    /// Sum of the per-node quadrature error estimates, weighted.
    pub error: f64,
}

impl NodeTable {
    pub fn build(kernel: &TauKernel, edges: &[f64]) -> Result<Self> {
        let (t, w) = composite_gl10(edges);
        let mut c = Vec::with_capacity(t.len());
        let mut s = Vec::with_capacity(t.len());
        let mut error = 0.0;
        for (ti, wi) in t.iter().zip(&w) {
            let comp = kernel.components(*ti)?;
            c.push(comp.c);
            s.push(comp.s);
            error += wi * comp.error;
        }
        Ok(Self { n: kernel.n, t_max: *edges.last().unwrap_or(&0.0), t, w, c, s, error })
    }
}

type TableKey = (String, usize, u64);

fn table_cache() -> &'static Mutex<HashMap<TableKey, Arc<NodeTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<NodeTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The smooth-layout table for `(ψ, n)` truncated at `t_max`, built once per
/// process.
pub fn smooth_table(kernel: &TauKernel, t_max: f64) -> Result<Arc<NodeTable>> {
    let key = (kernel.psi.to_string(), kernel.n, t_max.to_bits());
    if let Some(t) = table_cache().lock().expect("cache poisoned").get(&key) {
        return Ok(t.clone());
    }
    let table = Arc::new(NodeTable::build(kernel, &smooth_edges(t_max))?);
    table_cache().lock().expect("cache poisoned").insert(key, table.clone());
    Ok(table)
}

/// Default truncation of the representation integral: max(10³, 100n).
pub fn default_truncation(n: usize) -> f64 {
    (100.0 * n as f64).max(1e3)
}

/// `∫_T^∞ cos(ωt + c)·(asymptotic of C or S)` summed term by term.
/// `terms` lists `(amplitude, frequency, phase, power)` of
/// `amplitude·cos(frequency·t + phase)·t^{-power}` with any-sign frequency.
fn tail_of(terms: &[(f64, f64, f64, u32)], t_max: f64) -> f64 {
    terms
        .iter()
        .map(|&(amp, freq, ph, p)| {
            if amp == 0.0 {
                0.0
            } else if freq >= 0.0 {
                amp * cos_power_tail(freq, ph, p, t_max)
            } else {
                amp * cos_power_tail(-freq, -ph, p, t_max)
            }
        })
        .sum()
}

/// Large-t expansions as cosine terms: C ≈ −J cos t/t² + K cos(t − π/2)/t³,
/// S ≈ −J cos(t − π/2)/t² − K cos t/t³ − 2ψ(n)/t³.
fn c_asym(j: f64, k: f64) -> [(f64, f64, f64, u32); 2] {
    [(-j, 1.0, 0.0, 2), (k, 1.0, -FRAC_PI_2, 3)]
}

fn s_asym(j: f64, k: f64, pn: f64) -> [(f64, f64, f64, u32); 3] {
    [(-j, 1.0, -FRAC_PI_2, 2), (-k, 1.0, 0.0, 3), (-2.0 * pn, 0.0, 0.0, 3)]
}

/// Multiplies `cos(ν t + a)` into a list of cosine terms.
fn modulate(terms: &[(f64, f64, f64, u32)], nu: f64, a: f64) -> Vec<(f64, f64, f64, u32)> {
    let mut out = Vec::with_capacity(2 * terms.len());
    for &(amp, f, ph, p) in terms {
        out.push((0.5 * amp, f + nu, ph + a, p));
        out.push((0.5 * amp, f - nu, ph - a, p));
    }
    out
}

/// Moments of τ̂_n against the harmonics of δ(t) = φ(x + t/n) − φ(x),
/// integrated over the whole line (quadrature to T plus analytic tail).
#[derive(Debug, Clone, Serialize)]
pub struct HarmonicMoments {
    /// `∫ (cos(kt/n) − 1) C(t) dt` over t ≥ 0, k = 1..=order.
    pub cos_minus_one: Vec<f64>,
    /// `∫ sin(kt/n) S(t) dt` over t ≥ 0.
    pub sin: Vec<f64>,
    pub t_max: f64,
    /// Bound on the neglected O(T⁻³) part of the tails.
    pub tail_bound: f64,
}

impl HarmonicMoments {
    pub fn compute(kernel: &TauKernel, table: &NodeTable, order: usize) -> Self {
        let nf = kernel.nf();
        let pn = kernel.psi.eval(nf);
        let (j, k2) = kernel.jumps();
        let t_max = table.t_max;
        let mut cm = vec![0.0; order];
        let mut sm = vec![0.0; order];
        for kk in 1..=order {
            let nu = kk as f64 / nf;
            let mut acc_c = 0.0;
            let mut acc_s = 0.0;
            for i in 0..table.t.len() {
                let arg = nu * table.t[i];
                let half = (0.5 * arg).sin();
                acc_c += table.w[i] * (-2.0 * half * half) * table.c[i];
                acc_s += table.w[i] * arg.sin() * table.s[i];
            }
            let ca = c_asym(j, k2);
            let mut cterms = modulate(&ca, nu, 0.0);
            cterms.extend(ca.iter().map(|&(a, f, p, q)| (-a, f, p, q)));
            let sterms = modulate(&s_asym(j, k2, pn), nu, -FRAC_PI_2);
            cm[kk - 1] = acc_c + tail_of(&cterms, t_max);
            sm[kk - 1] = acc_s + tail_of(&sterms, t_max);
        }
        // next term of the expansion is driven by the jump n³ψ‴(n) at u = 1
        let h = 1e-3 * nf;
        let third = (kernel.psi.second_deriv(nf + h) - kernel.psi.second_deriv(nf)) / h;
        let tail_bound = 2.0 * (nf.powi(3) * third.abs() + k2.abs()) / (3.0 * t_max.powi(3));
        Self { cos_minus_one: cm, sin: sm, t_max, tail_bound }
    }
}

/// A remainder value from the integral representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepresentationValue {
    pub value: f64,
    pub t_max: f64,
    pub tail_bound: f64,
    pub quadrature_error: f64,
}

/// Evaluator of `∫ (φ(x + t/n) − φ(x)) τ̂_n(t) dt` for trigonometric φ.
#[derive(Debug, Clone)]
pub struct Representation {
    pub kernel: TauKernel,
    table: Arc<NodeTable>,
    moments: HarmonicMoments,
}

impl Representation {
    /// Prepares moments up to harmonic `order` with truncation `t_max`.
    pub fn new(kernel: TauKernel, order: usize, t_max: f64) -> Result<Self> {
        let table = smooth_table(&kernel, t_max)?;
        let moments = HarmonicMoments::compute(&kernel, &table, order);
        Ok(Self { kernel, table, moments })
    }

    pub fn order(&self) -> usize {
        self.moments.sin.len()
    }

    /// The representation integral for `φ = f^ψ_β` at `x`.
    pub fn remainder(&self, phi: &TrigPoly, beta: f64, x: f64) -> Result<RepresentationValue> {
        if phi.order() > self.order() {
            return Err(Error::Parameter(format!(
                "φ has order {} but moments were prepared up to {}",
                phi.order(),
                self.order()
            )));
        }
        let (sn, cs) = phase(beta);
        let mut value = 0.0;
        let mut scale = 0.0;
        for k in 1..=phi.order() {
            let (a, b) = phi.pair(k);
            let ic = 2.0 * cs / PI * self.moments.cos_minus_one[k - 1];
            let is = -2.0 * sn / PI * self.moments.sin[k - 1];
            let (s, c) = (k as f64 * x).sin_cos();
            value += a * (c * ic - s * is) + b * (s * ic + c * is);
            scale += a.abs() + b.abs();
        }
        Ok(RepresentationValue {
            value,
            t_max: self.moments.t_max,
            tail_bound: scale * self.moments.tail_bound,
            quadrature_error: scale * 2.0 * self.table.error,
        })
    }
}

/// One-shot representation of `f − U_{n-1}^ψ f` at `x`, where `phi` is the
/// (ψ,β)-derivative of f.
pub fn remainder_via_representation(
    phi: &TrigPoly,
    kernel: &TauKernel,
    beta: f64,
    x: f64,
) -> Result<RepresentationValue> {
    Representation::new(kernel.clone(), phi.order().max(1), default_truncation(kernel.n))?
        .remainder(phi, beta, x)
}

/// `∫_{−T}^{T} τ̂_n dt` and its analytic tail beyond `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroMean {
    pub truncated: f64,
    pub tail: f64,
    pub total: f64,
    pub error: f64,
}

/// Truncation-corrected `∫ τ̂_n(t; β) dt`, computed as
/// `(2cos(βπ/2)/π) ∫_0^∞ τ_n(u) sin(uT)/u du` plus the asymptotic tail.
pub fn zero_mean(kernel: &TauKernel, beta: f64, t_max: f64) -> Result<ZeroMean> {
    let (_, cs) = phase(beta);
    if cs == 0.0 {
        return Ok(ZeroMean { truncated: 0.0, tail: 0.0, total: 0.0, error: 0.0 });
    }
    let nf = kernel.nf();
    let pn = kernel.psi.eval(nf);
    let head = pn * unit_moments(t_max).0;
    let tail_u = oscillatory_tail(
        |u| kernel.psi.eval(nf * u) / u,
        1.0,
        t_max,
        Tol::new(1e-18 * pn, 1e-12),
    )?;
    let truncated = 2.0 * cs / PI * (head + tail_u.value.im);
    let (j, k) = kernel.jumps();
    let tail = 2.0 * cs / PI * tail_of(&c_asym(j, k), t_max);
    Ok(ZeroMean { truncated, tail, total: truncated + tail, error: 2.0 / PI * tail_u.error })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2() -> PsiShape {
        PsiShape::power(2.0).unwrap()
    }

    fn l2() -> PsiShape {
        PsiShape::logpower(2.0).unwrap()
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_psi(&p2(), 5, 1.0), 0.0);
        assert_eq!(lambda_psi(&p2(), 2, 0.5), 15.0 / 16.0);
        assert_eq!(lambda_psi(&p2(), 7, 0.0), 1.0);
    }

    #[test]
    fn lambda_branches_meet() {
        for psi in [p2(), l2(), PsiShape::power(0.7).unwrap()] {
            for n in [1, 2, 5, 64] {
                let nf = n as f64;
                let u = 1.0 / nf;
                let left = 1.0 - psi.eval(nf) / psi.eval(1.0) * u / nf;
                let right = 1.0 - psi.eval(nf) / psi.eval(nf * u) * u * u;
                assert!((left - right).abs() <= 1e-14);
                assert!((left - (1.0 - psi.eval(nf) / (psi.eval(1.0) * nf * nf))).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn u_psi_examples() {
        let u = apply_u_psi(&TrigPoly::cos(1, 1.0), &p2(), 4);
        assert_eq!(u, TrigPoly::cos(1, 255.0 / 256.0));
        assert_eq!(apply_u_psi(&TrigPoly::cos(4, 1.0), &p2(), 4).order(), 0);
        assert_eq!(apply_u_psi(&TrigPoly::constant(3.0), &p2(), 4), TrigPoly::constant(3.0));
    }

    #[test]
    fn u_lambda_examples() {
        let f = TrigPoly::new(1.0, vec![0.2, 0.3, 0.4], vec![0.0, -1.0, 0.5]);
        assert_eq!(apply_u_lambda(&f, &MultiplierSet::identity(3)), f);
        let n = 6;
        let a = apply_u_lambda(&f, &MultiplierSet::psi(&p2(), n));
        let b = apply_u_psi(&f, &p2(), n);
        for k in 1..=3 {
            let (x, y) = (a.pair(k), b.pair(k));
            assert!((x.0 - y.0).abs() < 1e-15 && (x.1 - y.1).abs() < 1e-15);
        }
        assert_eq!(apply_u_lambda(&TrigPoly::zero(), &MultiplierSet::psi(&p2(), 3)).order(), 0);
    }

    #[test]
    fn tau_examples() {
        let k = TauKernel::new(PsiShape::power(1.0).unwrap(), 3).unwrap();
        assert!((k.eval(0.5) - 1.0 / 12.0).abs() < 1e-16);
        assert!((k.eval(2.0) - 1.0 / 6.0).abs() < 1e-16);
        assert_eq!(k.eval(0.0), 0.0);
        let k = TauKernel::new(l2(), 5).unwrap();
        assert!((k.eval(1.0) - l2().eval(5.0)).abs() < 1e-16);
    }

    #[test]
    fn unit_moments_series_and_closed_forms_agree() {
        for t in [0.49999, 0.5] {
            let (a, b, d) = unit_moments(t);
            let qa = adaptive(|u: f64| u * (u * t).sin(), 0.0, 1.0, Tol::default()).value;
            let qb = adaptive(|u: f64| u * (u * t).cos(), 0.0, 1.0, Tol::default()).value;
            let qd = adaptive(|u: f64| u * u * (u * t).sin(), 0.0, 1.0, Tol::default()).value;
            assert!((a - qa).abs() < 1e-14 && (b - qb).abs() < 1e-14 && (d - qd).abs() < 1e-14);
        }
    }

    #[test]
    fn both_routes_agree() {
        for psi in [p2(), l2()] {
            for n in [2, 8] {
                let k = TauKernel::new(psi.clone(), n).unwrap();
                for beta in [0.0, 0.5, 1.0, 1.5] {
                    for t in [0.1, 0.7, 1.0, 3.3, 17.0, 100.0, -0.4, -42.0] {
                        let a = k.tau_hat(beta, t).unwrap().value;
                        let b = k.tau_hat_direct(beta, t).unwrap().value;
                        assert!((a - b).abs() < 1e-8, "{psi} n={n} β={beta} t={t}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn odd_for_odd_beta() {
        let k = TauKernel::new(l2(), 4).unwrap();
        for beta in [1.0, 3.0, -1.0] {
            for t in [0.05, 0.9, 2.5, 30.0] {
                let a = k.tau_hat(beta, t).unwrap().value;
                let b = k.tau_hat(beta, -t).unwrap().value;
                assert!((a + b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn decays_like_inverse_square() {
        let k = TauKernel::new(l2(), 8).unwrap();
        let mut max: f64 = 0.0;
        for i in 0..60 {
            let t = 10f64 * 100f64.powf(i as f64 / 59.0);
            max = max.max(k.tau_hat(1.0, t).unwrap().value.abs() * t * t);
        }
        let (j, _) = k.jumps();
        assert!(max < 2.0 * j.abs() / PI);
    }

    #[test]
    fn asymptotic_matches_at_large_t() {
        let k = TauKernel::new(p2(), 4).unwrap();
        for beta in [0.0, 0.5, 1.0] {
            for t in [300.0, -300.0] {
                let exact = k.tau_hat(beta, t).unwrap().value;
                let asym = k.tau_hat_asymptotic(beta, t);
                assert!((exact - asym).abs() < 1e-9, "β={beta} t={t}");
            }
        }
    }

    #[test]
    fn zero_mean_grid() {
        for n in [2, 4, 8] {
            let k = TauKernel::new(p2(), n).unwrap();
            for beta in [0.0, 0.5, 1.0, 1.5] {
                let z = zero_mean(&k, beta, 1e4).unwrap();
                assert!(z.total.abs() < 1e-6, "n={n} β={beta}: {z:?}");
            }
        }
    }

    #[test]
    fn zero_mean_matches_node_table_integral() {
        // independent route: sum of C over the node table plus the same tail
        let k = TauKernel::new(p2(), 4).unwrap();
        let table = smooth_table(&k, 1e3).unwrap();
        let s: f64 = table.w.iter().zip(&table.c).map(|(w, c)| w * c).sum();
        let z = zero_mean(&k, 0.0, 1e3).unwrap();
        assert!((2.0 / PI * s - z.truncated).abs() < 1e-9);
    }

    #[test]
    fn representation_of_cosine() {
        // f = cos x, ψ = k^-2, β = 2: φ = f^ψ_β = −cos x
        let k = TauKernel::new(p2(), 4).unwrap();
        let phi = crate::trig::psi_beta_derivative(&TrigPoly::cos(1, 1.0), &p2(), 2.0);
        let r = remainder_via_representation(&phi, &k, 2.0, 0.0).unwrap();
        assert!((r.value - 1.0 / 256.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn representation_matches_direct_remainder() {
        let phi = TrigPoly::new(0.0, vec![0.3, -0.1, 0.2, 0.05, 0.0, 0.1], vec![-0.2, 0.4, 0.0, 0.1, -0.3, 0.02]);
        for psi in [p2(), l2()] {
            for n in [2, 4, 8] {
                let rep = Representation::new(TauKernel::new(psi.clone(), n).unwrap(), 6, default_truncation(n)).unwrap();
                for beta in [0.0, 1.0, 1.5] {
                    let f = crate::trig::psi_beta_antiderivative(&phi, &psi, beta).unwrap();
                    for x in [0.0, 1.0, 2.5, 4.0] {
                        let want = direct_remainder(&f, &psi, n, x);
                        let got = rep.remainder(&phi, beta, x).unwrap().value;
                        assert!((want - got).abs() < 1e-6, "{psi} n={n} β={beta} x={x}: {want} vs {got}");
                    }
                }
            }
        }
    }
}
