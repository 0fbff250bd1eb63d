//! Approximation of classes of periodic functions defined by (ψ,β)-derivatives
//! lying in H_ω: generator catalogs, the explicit linear method U_{n-1}^ψ, its
//! kernel transform, the lower-bound witness, Remez best approximation and
//! asymptotic diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod best_approx;
pub mod error;
pub mod extremal;
pub mod linear_method;
pub mod oscillatory;
pub mod quad;
pub mod shapes;
pub mod special;
pub mod trig;

pub use error::{Error, Result};
pub use shapes::{Modulus, PsiShape};
pub use trig::TrigPoly;

/// `θ = βπ/2` as `(sin θ, cos θ)`, exact for integer and half-integer β.
pub fn phase(beta: f64) -> (f64, f64) {
    let q = 2.0 * beta;
    if q == q.round() && q.abs() < 1e15 {
        // β = m/2, θ = mπ/4
        let m = (q as i64).rem_euclid(8);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        return match m {
            0 => (0.0, 1.0),
            1 => (h, h),
            2 => (1.0, 0.0),
            3 => (h, -h),
            4 => (0.0, -1.0),
            5 => (-h, -h),
            6 => (-1.0, 0.0),
            _ => (-h, h),
        };
    }
    (beta * std::f64::consts::FRAC_PI_2).sin_cos()
}

#[cfg(test)]
mod tests {
    use super::phase;

    #[test]
    fn phase_matches_trig_functions() {
        for k in -12..12 {
            let beta = k as f64 * 0.25;
            let (s, c) = phase(beta);
            let th = beta * std::f64::consts::FRAC_PI_2;
            assert!((s - th.sin()).abs() < 1e-15 && (c - th.cos()).abs() < 1e-15);
        }
        assert_eq!(phase(2.0), (0.0, -1.0));
    }
}
