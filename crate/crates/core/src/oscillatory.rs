//! Oscillatory integrals: finite sine/cosine moments, the function
//! `S(x) = ∫_x^∞ (1/t) ∫_0^a u^s sin(ut + iπ/2) du dt` with its guaranteed
//! zeros, the tail-sine transform of ψ, and the uniform bound for
//! `∫_{|t|≥1} δ(t/n) (1/t) ∫_0^{a/n} u^s sin(ut + iπ/2) du dt`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{adaptive, alternating_tail, geometric, oscillatory_tail, Tol};
use crate::shapes::{Modulus, PsiShape};
use crate::special::{cos_power_tail, sici};

pub use crate::special::si_tail;

const SERIES_MAX_AT: f64 = 2.0;
const MAX_INTEGER_S: f64 = 32.0;
const MAX_PIECES: usize = 100_000;

fn check_phase(i: u8) -> Result<f64> {
    match i {
        0 => Ok(0.0),
        1 => Ok(FRAC_PI_2),
        _ => Err(Error::Parameter(format!("phase index must be 0 or 1, got {i}"))),
    }
}

/// `∫_0^a u^s sin(ut + c) du` for `s ≥ 0`.
fn moment(a: f64, s: f64, c: f64, t: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let at = a * t;
    let integer = s.fract() == 0.0 && s <= MAX_INTEGER_S;
    if at <= SERIES_MAX_AT.max(if integer { s + 1.0 } else { 0.0 }) {
        // Σ_m t^m/m! · sin(c + mπ/2) · a^{s+m+1}/(s+m+1)
        let mut sum = 0.0;
        let mut pw = a.powf(s + 1.0);
        for m in 0..200 {
            sum += pw * (c + m as f64 * FRAC_PI_2).sin() / (s + m as f64 + 1.0);
            if m as f64 > at && pw < 1e-17 * sum.abs() {
                break;
            }
            pw *= at / (m + 1) as f64;
        }
        return sum;
    }
    if integer {
        // Is_k = −a^k cos(at)/t + (k/t) Ic_{k−1},  Ic_k = a^k sin(at)/t − (k/t) Is_{k−1}
        let (sa, ca) = at.sin_cos();
        let mut is = (1.0 - ca) / t;
        let mut ic = sa / t;
        let mut ak = 1.0;
        for k in 1..=(s as usize) {
            ak *= a;
            let kf = k as f64;
            let nis = -ak * ca / t + kf / t * ic;
            let nic = ak * sa / t - kf / t * is;
            is = nis;
            ic = nic;
        }
        return c.cos() * is + c.sin() * ic;
    }
    let hp = PI / t;
    let pieces = ((a / hp).ceil() as usize).clamp(1, MAX_PIECES);
    let h = a / pieces as f64;
    let f = |u: f64| u.powf(s) * (u * t + c).sin();
    (0..pieces)
        .map(|j| adaptive(f, j as f64 * h, (j + 1) as f64 * h, Tol::new(1e-300, 1e-14)).value)
        .sum()
}

/// `∫_0^a u^s sin(ut + iπ/2) du` for `a > 0`, `s ≥ 1`, `i ∈ {0, 1}`, `t > 0`.
///
/// The result satisfies `|value| ≤ 2a^s/t`.
pub fn finite_moment(a: f64, s: f64, i: u8, t: f64) -> Result<f64> {
    let c = check_phase(i)?;
    if !(a > 0.0 && s >= 1.0 && t > 0.0) {
        return Err(Error::Parameter(format!("finite_moment needs a > 0, s ≥ 1, t > 0 (a={a}, s={s}, t={t})")));
    }
    let v = moment(a, s, c, t);
    let bound = 2.0 * a.powf(s) / t;
    if v.abs() > bound * (1.0 + 1e-9) {
        return Err(Error::Domain(format!("moment {v:e} exceeds its bound {bound:e}")));
    }
    Ok(v)
}

fn check_s_args(a: f64, s: f64, x: f64) -> Result<()> {
    if !(a > 0.0 && s >= 1.0 && x > 0.0) {
        return Err(Error::Parameter(format!("S(x) needs a > 0, s ≥ 1, x > 0 (a={a}, s={s}, x={x})")));
    }
    Ok(())
}

/// `S(x) = ∫_x^∞ (1/t) ∫_0^a u^s sin(ut) du dt`.
pub fn s_function(a: f64, s: f64, x: f64) -> Result<f64> {
    s_function_phase(a, s, 0, x)
}

/// `∫_x^∞ (1/t) ∫_0^a u^s sin(ut + iπ/2) du dt` after exchanging the order
/// of integration and integrating by parts twice:
///
/// * `i = 0`: `(−a^{s+1}∫_{ax}^∞ cos t/t² dt + s x^{−s−1}∫_0^{ax} u^{s−1} cos u du)/(s+1)`
/// * `i = 1`: `( a^{s+1}∫_{ax}^∞ sin t/t² dt − s x^{−s−1}∫_0^{ax} u^{s−1} sin u du)/(s+1)`
pub fn s_function_phase(a: f64, s: f64, i: u8, x: f64) -> Result<f64> {
    check_phase(i)?;
    check_s_args(a, s, x)?;
    let ax = a * x;
    let v = if i == 0 {
        -a.powf(s + 1.0) * cos_power_tail(1.0, 0.0, 2, ax) + s * x.powf(-s - 1.0) * moment(ax, s - 1.0, FRAC_PI_2, 1.0)
    } else {
        a.powf(s + 1.0) * cos_power_tail(1.0, -FRAC_PI_2, 2, ax) - s * x.powf(-s - 1.0) * moment(ax, s - 1.0, 0.0, 1.0)
    };
    Ok(v / (s + 1.0))
}

/// The same quantity as [`s_function_phase`] by quadrature of
/// `∫_0^a u^s ∫_{ux}^∞ sin(v + iπ/2)/v dv du` in `u`.
pub fn s_function_direct(a: f64, s: f64, i: u8, x: f64) -> Result<f64> {
    check_phase(i)?;
    check_s_args(a, s, x)?;
    let inner = |u: f64| {
        if u == 0.0 {
            return 0.0;
        }
        let sc = sici(u * x);
        let tail = if i == 0 { sc.si_tail } else { -sc.ci };
        u.powf(s) * tail
    };
    let hp = PI / x;
    let pieces = ((a / hp).ceil() as usize).clamp(1, MAX_PIECES);
    let h = a / pieces as f64;
    let mut total = 0.0;
    for j in 0..pieces {
        let q = adaptive(inner, j as f64 * h, (j + 1) as f64 * h, Tol::new(1e-300, 1e-13));
        total += q.check("S(x) direct quadrature")?;
    }
    Ok(total)
}

/// A zero of `S` located inside `(x_k, x_{k+1})`, `x_k = (2k−1+i)π/(2a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroBracket {
    pub k: usize,
    pub i: u8,
    pub a: f64,
    pub s: f64,
    pub lo: f64,
    pub hi: f64,
    pub zero: f64,
    pub residual: f64,
}

/// Endpoint `x_k^{(i)} = (2k−1+i)π/(2a)`.
pub fn bracket_point(a: f64, i: u8, k: usize) -> f64 {
    (2.0 * k as f64 - 1.0 + i as f64) * PI / (2.0 * a)
}

pub const ZERO_RESIDUAL_MAX: f64 = 1e-10;

/// Bisection for the zero of `S` on `(x_k, x_{k+1})`.
pub fn find_s_zero(a: f64, s: f64, i: u8, k: usize) -> Result<ZeroBracket> {
    if k == 0 {
        return Err(Error::Parameter("bracket index k starts at 1".into()));
    }
    let f = |x: f64| s_function_phase(a, s, i, x);
    let (lo, hi) = (bracket_point(a, i, k), bracket_point(a, i, k + 1));
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo * f_hi > 0.0 || f_lo == 0.0 || f_hi == 0.0 {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let (mut l, mut h, mut fl) = (lo, hi, f_lo);
    let mut mid = 0.5 * (l + h);
    for _ in 0..200 {
        mid = 0.5 * (l + h);
        if mid <= l || mid >= h {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            break;
        }
        if (fm < 0.0) == (fl < 0.0) {
            l = mid;
            fl = fm;
        } else {
            h = mid;
        }
    }
    let residual = f(mid)?.abs();
    if residual > ZERO_RESIDUAL_MAX {
        return Err(Error::ToleranceUnreachable {
            requested: ZERO_RESIDUAL_MAX,
            reason: format!("residual {residual:e} at the bisection limit"),
        });
    }
    Ok(ZeroBracket { k, i, a, s, lo, hi, zero: mid, residual })
}

/// `∫_1^∞ ψ(nu) sin(ut) du` for `t ∈ [0, 1]`, by half-period partitioning
/// with binomial averaging. Positive for convex decreasing ψ.
pub fn psi_tail_sine(psi: &PsiShape, n: usize, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) || n == 0 {
        return Err(Error::Parameter(format!("psi_tail_sine needs n ≥ 1 and t ∈ [0,1], got n={n}, t={t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let q = oscillatory_tail(|u| psi.eval(nf * u), 1.0, t, Tol::new(1e-12, 1e-10))?;
    let v = q.value.im;
    if v <= q.error {
        return Err(Error::Domain(format!("tail-sine transform not positive: {v:e} ± {:e}", q.error)));
    }
    Ok(v)
}

/// The two-sided integral `∫_{|t|≥1} δ(t/n) (1/t) ∫_0^{a/n} u^s sin(ut + iπ/2) du dt`
/// evaluated for `δ(t) = ω(|t|)`, with its size relative to `ω(1/n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledWitnessIntegral {
    pub n: usize,
    pub a: f64,
    pub s: f64,
    pub i: u8,
    pub positive_side: f64,
    pub value: f64,
    pub ratio_to_omega: f64,
    pub bound: f64,
}

/// Bound on `|value|/ω(1/n)` with both half-lines counted.
pub const SCALED_WITNESS_BOUND: f64 = 16.0 * PI;

pub fn lemma2_scaled_integral(omega: &Modulus, n: usize, a: f64, s: f64, i: u8) -> Result<ScaledWitnessIntegral> {
    let c = check_phase(i)?;
    let nf = n as f64;
    if !(n >= 1 && a >= 1.0 && a <= nf && s >= 1.0) {
        return Err(Error::Parameter(format!("need 1 ≤ a ≤ n and s ≥ 1 (n={n}, a={a}, s={s})")));
    }
    let w = |t: f64| omega.eval(t / nf);
    let positive_side = weighted_moment_integral(&w, a / nf, s, c)?;
    // the inner moment is odd in t for i = 0 and even for i = 1
    let value = if i == 0 { 2.0 * positive_side } else { 0.0 };
    let wn = omega.eval(1.0 / nf);
    let ratio_to_omega = if wn == 0.0 { 0.0 } else { value / wn };
    Ok(ScaledWitnessIntegral { n, a, s, i, positive_side, value, ratio_to_omega, bound: SCALED_WITNESS_BOUND })
}

/// `∫_1^∞ w(t) (1/t) ∫_0^b u^s sin(ut + c) du dt`.
///
/// The inner moment splits into the endpoint-at-zero part
/// `Γ(s+1) sin(c + (s+1)π/2) t^{−s−1}`, which does not oscillate and is
/// integrated on a geometric grid, and an oscillating remainder with
/// half-period `π/b`, summed with binomial averaging.
fn weighted_moment_integral<W: Fn(f64) -> f64>(w: &W, b: f64, s: f64, c: f64) -> Result<f64> {
    let g0 = libm::tgamma(s + 1.0) * (c + (s + 1.0) * FRAC_PI_2).sin();
    let smooth = |t: f64| w(t) * g0 * t.powf(-s - 2.0);
    let osc = |t: f64| w(t) / t * (moment(b, s, c, t) - g0 * t.powf(-s - 1.0));
    let tol = Tol::new(1e-15, 1e-12);
    let mut total = 0.0;
    if g0 != 0.0 {
        // decays like t^{−s−1}, so 1e12 leaves a negligible remainder
        let q = geometric(smooth, 1.0, 1e12, tol);
        total += q.check("non-oscillating part")?;
        total += w(1e12) * g0 * 1e12f64.powf(-s - 1.0) / (s + 1.0);
    }
    total += alternating_tail(osc, 1.0, PI / b, tol)?.value;
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_moment(a: f64, s: f64, i: u8, t: f64) -> f64 {
        let c = i as f64 * FRAC_PI_2;
        let pieces = ((a * t / PI).ceil() as usize).max(1) * 4;
        let h = a / pieces as f64;
        (0..pieces)
            .map(|j| {
                adaptive(|u: f64| u.powf(s) * (u * t + c).sin(), j as f64 * h, (j + 1) as f64 * h, Tol::new(1e-300, 1e-14))
                    .value
            })
            .sum()
    }

    #[test]
    fn si_tail_examples() {
        assert!((si_tail(FRAC_PI_2) - 0.200_03).abs() < 1e-5);
        for x in [1.0, 10.0, 100.0] {
            assert!(si_tail(x).abs() * x / 2.0 <= 1.0);
        }
        assert!(si_tail(1e6).abs() <= 2e-6);
    }

    #[test]
    fn finite_moment_examples() {
        let v = finite_moment(1.0, 1.0, 0, PI).unwrap();
        assert!((v - 1.0 / PI).abs() < 1e-15);
        // ∫_0^1 u cos(2πu) du = (cos 2π + 2π sin 2π − 1)/(2π)² = 0
        let v = finite_moment(1.0, 1.0, 1, 2.0 * PI).unwrap();
        assert!(v.abs() < 1e-15);
        assert!((v - brute_moment(1.0, 1.0, 1, 2.0 * PI)).abs() < 1e-13);
    }

    #[test]
    fn finite_moment_routes_agree() {
        for &s in &[1.0, 1.5, 2.0, 3.0, 2.7] {
            for &t in &[0.01, 0.9, 2.5, 3.9, 4.1, 17.0, 250.0] {
                for i in 0..2u8 {
                    let v = finite_moment(1.3, s, i, t).unwrap();
                    let r = brute_moment(1.3, s, i, t);
                    assert!((v - r).abs() < 1e-12, "s={s} t={t} i={i}: {v} vs {r}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn finite_moment_bound(a in 0.05f64..20.0, s in 1.0f64..4.0, i in 0u8..2, t in 0.01f64..500.0) {
            let v = finite_moment(a, s, i, t).unwrap();
            prop_assert!(v * t / (2.0 * a.powf(s)) <= 1.0 + 1e-9);
            prop_assert!(v * t / (2.0 * a.powf(s)) >= -1.0 - 1e-9);
        }
    }

    #[test]
    fn sign_at_bracket_points() {
        for &a in &[1.0, 2.0, 5.0] {
            for &s in &[1.0, 2.0] {
                for k in 1..=10usize {
                    let v = s_function(a, s, bracket_point(a, 0, k)).unwrap();
                    let expected = if k % 2 == 1 { 1.0 } else { -1.0 };
                    assert_eq!(v.signum(), expected, "a={a} s={s} k={k}: {v:e}");
                }
            }
        }
        assert!(s_function(1.0, 1.0, FRAC_PI_2).unwrap() > 0.0);
    }

    #[test]
    fn closed_form_matches_direct_quadrature() {
        for &s in &[1.0, 1.5, 2.0] {
            for i in 0..2u8 {
                for &x in &[1.0, 2.0, 5.0] {
                    let v = s_function_phase(1.0, s, i, x).unwrap();
                    let d = s_function_direct(1.0, s, i, x).unwrap();
                    assert!((v - d).abs() < 1e-8, "s={s} i={i} x={x}: {v} vs {d}");
                }
            }
        }
    }

    #[test]
    fn zero_examples() {
        let z = find_s_zero(1.0, 1.0, 0, 1).unwrap();
        assert!(z.zero > FRAC_PI_2 && z.zero < 1.5 * PI);
        let z = find_s_zero(2.0, 1.0, 0, 3).unwrap();
        assert!(z.zero > 1.25 * PI && z.zero < 1.75 * PI);
        assert!(z.residual <= ZERO_RESIDUAL_MAX);
    }

    #[test]
    fn zeros_found_in_every_bracket() {
        for &a in &[1.0, 2.0, 5.0] {
            for &s in &[1.0, 2.0] {
                for i in 0..2u8 {
                    for k in 1..=10usize {
                        let z = find_s_zero(a, s, i, k).unwrap_or_else(|e| panic!("a={a} s={s} i={i} k={k}: {e}"));
                        assert!(z.lo < z.zero && z.zero < z.hi);
                        assert!(z.residual <= ZERO_RESIDUAL_MAX);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_bracket_requires_k_positive() {
        assert!(matches!(find_s_zero(1.0, 1.0, 0, 0), Err(Error::Parameter(_))));
        assert!(matches!(find_s_zero(1.0, 1.0, 2, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn tail_sine_against_truncated_quadrature() {
        let psi = PsiShape::power(2.0).unwrap();
        let v = psi_tail_sine(&psi, 1, 1.0).unwrap();
        // ∫_1^U sin u/u² du piecewise, remainder below 2/U²
        let cut = 2.0e5;
        let pieces = (cut / PI) as usize;
        let brute: f64 = (0..pieces)
            .map(|j| {
                let lo = 1.0 + j as f64 * PI;
                adaptive(|u: f64| u.sin() / (u * u), lo, lo + PI, Tol::new(1e-300, 1e-13)).value
            })
            .sum();
        assert!((v - brute).abs() < 1e-9, "{v} vs {brute}");
        // and the closed form through Si/Ci
        assert!((v - cos_power_tail(1.0, -FRAC_PI_2, 2, 1.0)).abs() < 1e-10);
    }

    #[test]
    fn tail_sine_positive_on_grid() {
        let ts = [0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0];
        for psi in [PsiShape::power(2.0).unwrap(), PsiShape::logpower(2.0).unwrap()] {
            for n in [1usize, 2, 4, 8, 16, 32] {
                for &t in &ts {
                    let v = psi_tail_sine(&psi, n, t).unwrap_or_else(|e| panic!("{psi} n={n} t={t}: {e}"));
                    assert!(v > 0.0);
                }
            }
        }
        assert!(psi_tail_sine(&PsiShape::logpower(2.0).unwrap(), 8, 0.5).unwrap() > 0.0);
    }

    #[test]
    fn tail_sine_vanishes_at_zero() {
        let psi = PsiShape::power(2.0).unwrap();
        assert_eq!(psi_tail_sine(&psi, 1, 0.0).unwrap(), 0.0);
        let small = psi_tail_sine(&psi, 1, 1e-3).unwrap();
        let smaller = psi_tail_sine(&psi, 1, 1e-4).unwrap();
        assert!(smaller < small && small < 0.01);
    }

    #[test]
    fn constant_weight_reduces_to_s_function() {
        for &b in &[0.25, 1.0] {
            for &s in &[1.0, 2.0] {
                for i in 0..2u8 {
                    let v = weighted_moment_integral(&|_| 1.0, b, s, i as f64 * FRAC_PI_2).unwrap();
                    let r = s_function_phase(b, s, i, 1.0).unwrap();
                    assert!((v - r).abs() < 1e-9 * r.abs().max(1e-3), "b={b} s={s} i={i}: {v} vs {r}");
                }
            }
        }
    }

    #[test]
    fn scaled_witness_matches_truncated_quadrature() {
        // n = a = 4, s = 1, ω = t^{1/2}: integrand n^{-1/2}(sin t − t cos t) t^{-2.5}
        let omega = Modulus::power(0.5).unwrap();
        let r = lemma2_scaled_integral(&omega, 4, 4.0, 1.0, 0).unwrap();
        let f = |t: f64| 0.5 * (t.sin() - t * t.cos()) * t.powf(-2.5);
        let cut = 1.0 + 20_000.0 * PI;
        let head: f64 = (0..20_000)
            .map(|j| {
                let lo = 1.0 + j as f64 * PI;
                adaptive(f, lo, lo + PI, Tol::new(1e-300, 1e-13)).value
            })
            .sum();
        // −½∫_U^∞ cos t · t^{-1.5} ≈ ½ sin U · U^{-1.5}
        let tail = 0.5 * cut.sin() * cut.powf(-1.5);
        assert!((r.positive_side - (head + tail)).abs() < 1e-8, "{} vs {}", r.positive_side, head + tail);
    }

    #[test]
    fn scaled_witness_ratio_bounded() {
        let omega = Modulus::power(0.5).unwrap();
        for n in [4usize, 16, 64] {
            let r = lemma2_scaled_integral(&omega, n, n as f64, 1.0, 0).unwrap();
            assert!(r.ratio_to_omega.abs() <= SCALED_WITNESS_BOUND, "n={n}: {}", r.ratio_to_omega);
        }
    }

    #[test]
    fn scaled_witness_zero_modulus() {
        let omega = Modulus::power(0.5).unwrap().scaled(0.0).unwrap();
        let r = lemma2_scaled_integral(&omega, 8, 8.0, 1.0, 0).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn scaled_witness_stable_for_log_modulus() {
        let omega = Modulus::loginv(1.0).unwrap();
        let ratios: Vec<f64> = [4usize, 8, 16, 32, 64, 128, 256]
            .iter()
            .map(|&n| lemma2_scaled_integral(&omega, n, n as f64, 1.0, 0).unwrap().ratio_to_omega.abs())
            .collect();
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min <= 4.0, "{ratios:?}");
    }
}
