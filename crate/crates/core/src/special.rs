//! Sine and cosine integrals.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_MAX: f64 = 2.0;

/// Sine/cosine integral values at a point `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiCi {
    /// `Si(x) = ∫_0^x sin t / t dt`
    pub si: f64,
    /// `Ci(x) = -∫_x^∞ cos t / t dt`
    pub ci: f64,
    /// `∫_x^∞ sin t / t dt = π/2 - Si(x)`, computed without cancellation for
    /// large `x`.
    pub si_tail: f64,
}

/// Evaluates `Si`, `Ci` and the sine-integral tail at `x > 0`.
///
/// Power series below 2, a continued fraction for `E_1(ix)` (modified
/// Lentz) above.
pub fn sici(x: f64) -> SiCi {
    debug_assert!(x > 0.0);
    if x <= SERIES_MAX {
        let x2 = x * x;
        // Si
        let mut si = 0.0;
        let mut term = x; // x^{2k+1}/(2k+1)!
        let mut k = 0usize;
        loop {
            let add = term / (2 * k + 1) as f64;
            si += add;
            if add.abs() < 1e-18 * si.abs() {
                break;
            }
            k += 1;
            term *= -x2 / ((2 * k) as f64 * (2 * k + 1) as f64);
        }
        // Ci
        let mut sum = 0.0;
        let mut term = 1.0; // x^{2k}/(2k)!
        let mut k = 1usize;
        loop {
            term *= -x2 / ((2 * k - 1) as f64 * (2 * k) as f64);
            let add = term / (2 * k) as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
            k += 1;
        }
        let ci = EULER_GAMMA + x.ln() + sum;
        SiCi { si, ci, si_tail: FRAC_PI_2 - si }
    } else {
        let fpmin = 1e-300;
        let mut b = Complex64::new(1.0, x);
        let mut c = Complex64::new(1.0 / fpmin, 0.0);
        let mut d = Complex64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 2..100_000 {
            let a = -((i - 1) as f64).powi(2);
            b += Complex64::new(2.0, 0.0);
            d = Complex64::new(1.0, 0.0) / (d * a + b);
            c = b + Complex64::new(a, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
                break;
            }
        }
        let (s, co) = x.sin_cos();
        let h = Complex64::new(co, -s) * h;
        SiCi { si: FRAC_PI_2 + h.im, ci: -h.re, si_tail: -h.im }
    }
}

/// `∫_x^∞ sin t / t dt` for `x > 0`; bounded in magnitude by `2/x`.
pub fn si_tail(x: f64) -> f64 {
    let v = sici(x).si_tail;
    debug_assert!(v.abs() * x <= 2.0 + 1e-12);
    v
}

/// `∫_T^∞ cos(ω t + c) t^{-p} dt` for integer `p ≥ 1`, `ω ≥ 0`, `T > 0`
/// (`p ≥ 2` required when `ω = 0`).
pub fn cos_power_tail(omega: f64, c: f64, p: u32, t: f64) -> f64 {
    debug_assert!(t > 0.0 && omega >= 0.0 && p >= 1);
    if omega == 0.0 {
        assert!(p >= 2, "divergent tail: omega = 0 and p = 1");
        return c.cos() * t.powi(1 - p as i32) / (p - 1) as f64;
    }
    if p == 1 {
        let sc = sici(omega * t);
        return -c.cos() * sc.ci - c.sin() * sc.si_tail;
    }
    let pm1 = (p - 1) as f64;
    (omega * t + c).cos() * t.powi(1 - p as i32) / pm1
        - omega / pm1 * cos_power_tail(omega, c - FRAC_PI_2, p - 1, t)
}
