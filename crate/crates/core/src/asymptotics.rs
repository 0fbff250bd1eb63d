//! The main term `I(n) = (1/π)|sin(βπ/2)| ∫_0^{1/n} ψ(1/t) ω(t)/t dt`, the
//! remainder scale `ψ(n)ω(1/n)`, closed-form asymptotes, the side
//! conditions on ψ and ω, and the pieces `J_1..J_5` of the remainder in
//! the witness representation.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::Serialize;

use crate::best_approx::{calibrate, witness_point, EnBracket, PILOT_GRID, WITNESS_REMEZ_TOL};
use crate::error::{Error, Result};
use crate::extremal::{phi_n_eval, ExtremalSpec};
use crate::linear_method::{unit_moments, TauKernel};
use crate::phase;
use crate::quad::{adaptive, doubling_tail, Tol};
use crate::shapes::{Modulus, PsiShape};

/// Relative tolerance used for the main-term integral.
pub const MAIN_TERM_REL_TOL: f64 = 1e-12;

/// `∫_0^{1/n} ψ(1/t) ω(t)/t dt = ∫_{ln n}^∞ ψ(e^v) ω(e^{−v}) dv`, summed over
/// doubling blocks in `v`.
pub fn main_integral(psi: &PsiShape, omega: &Modulus, n: f64) -> Result<f64> {
    if !(n >= 1.0) {
        return Err(Error::Parameter(format!("main term needs n ≥ 1, got {n}")));
    }
    let g = |v: f64| psi.eval_exp(v) * omega.eval_exp(v);
    let v0 = n.ln();
    let (head, start) = if v0 < 1.0 {
        let q = adaptive(g, v0, 1.0, Tol::new(1e-300, 1e-14));
        (q.check("main term head")?, 1.0)
    } else {
        (0.0, v0)
    };
    let tail = doubling_tail(g, start, MAIN_TERM_REL_TOL).map_err(|e| match e {
        Error::Divergent(m) => Error::Divergent(format!("∫ψ(1/t)ω(t)/t dt near 0 ({psi}, {omega}): {m}")),
        other => other,
    })?;
    Ok(head + tail.value)
}

/// `I(n) = (1/π)|sin(βπ/2)| ∫_0^{1/n} ψ(1/t) ω(t)/t dt`.
pub fn main_term(psi: &PsiShape, omega: &Modulus, beta: f64, n: f64) -> Result<f64> {
    let (s, _) = phase(beta);
    if s == 0.0 {
        return Ok(0.0);
    }
    Ok(s.abs() / PI * main_integral(psi, omega, n)?)
}

/// `ψ(n)ω(1/n)`.
pub fn remainder_scale(psi: &PsiShape, omega: &Modulus, n: f64) -> f64 {
    psi.eval(n) * omega.eval(1.0 / n)
}

/// `ln^{−(γ+α)}(n+1) · |sin(βπ/2)| ln n / (π(γ+α−1))`, the main term for
/// `ψ = ln^{−γ}(t+1)`, `ω = ln^{−α}(1/t+1)`.
pub fn example1_asymptote(gamma: f64, alpha: f64, beta: f64, n: f64) -> Result<f64> {
    if !(gamma > 1.0 && alpha > 0.0 && alpha <= 1.0 && n > 1.0) {
        return Err(Error::Parameter(format!("need γ > 1, α ∈ (0,1], n > 1 (γ={gamma}, α={alpha}, n={n})")));
    }
    let (s, _) = phase(beta);
    let p = gamma + alpha;
    Ok(n.ln_1p().powf(-p) * s.abs() * n.ln() / (PI * (p - 1.0)))
}

/// Sampled ratios `|ψ′(n)|n/ψ(n)` and `ω′(1/n)/(nω(1/n))`.
#[derive(Debug, Clone, Serialize)]
pub struct DecayRatioReport {
    pub n: Vec<f64>,
    pub psi_ratio: Vec<f64>,
    pub omega_ratio: Vec<f64>,
    pub psi_vanishes: bool,
    pub omega_vanishes: bool,
    pub both_vanish: bool,
}

/// A sampled sequence "tends to zero" when it never increases along the
/// grid and its last value is below half the first.
fn vanishing_trend(v: &[f64]) -> bool {
    v.len() >= 2 && v.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)) && v[v.len() - 1] <= 0.5 * v[0]
}

pub fn corollary1_conditions(psi: &PsiShape, omega: &Modulus, n_grid: &[f64]) -> DecayRatioReport {
    let psi_ratio: Vec<f64> = n_grid.iter().map(|&n| psi.deriv_plus(n).abs() * n / psi.eval(n)).collect();
    let omega_ratio: Vec<f64> =
        n_grid.iter().map(|&n| omega.deriv_plus(1.0 / n) / (omega.eval(1.0 / n) * n)).collect();
    let psi_vanishes = vanishing_trend(&psi_ratio);
    let omega_vanishes = vanishing_trend(&omega_ratio);
    DecayRatioReport {
        n: n_grid.to_vec(),
        psi_ratio,
        omega_ratio,
        psi_vanishes,
        omega_vanishes,
        both_vanish: psi_vanishes && omega_vanishes,
    }
}

/// `∫_0^{1/n} ω(t)/t dt / ω(1/n)` on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct Condition9Report {
    pub n: Vec<f64>,
    /// Empty when the integral diverges.
    pub ratio: Vec<f64>,
    /// `sin(βπ/2) = 0`: nothing to check.
    pub vacuous: bool,
    pub divergent: bool,
    pub bounded: bool,
}

/// Largest max/min spread of the sampled ratio still called bounded.
pub const CONDITION9_SPREAD: f64 = 4.0;

pub fn condition9_check(omega: &Modulus, beta: f64, n_grid: &[f64]) -> Result<Condition9Report> {
    let (s, _) = phase(beta);
    let vacuous = s == 0.0;
    let mut ratio = Vec::with_capacity(n_grid.len());
    let mut divergent = false;
    for &n in n_grid {
        if !(n > 1.0) {
            return Err(Error::Parameter(format!("condition check needs n > 1, got {n}")));
        }
        match doubling_tail(|v| omega.eval_exp(v), n.ln(), 1e-10) {
            Ok(q) => ratio.push(q.value / omega.eval(1.0 / n)),
            Err(Error::Divergent(_)) => {
                divergent = true;
                ratio.clear();
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let bounded = vacuous
        || (!divergent && {
            let max = ratio.iter().cloned().fold(0.0, f64::max);
            let min = ratio.iter().cloned().fold(f64::INFINITY, f64::min);
            max.is_finite() && max <= CONDITION9_SPREAD * min
        });
    Ok(Condition9Report { n: n_grid.to_vec(), ratio, vacuous, divergent, bounded })
}

/// Upper end of the numerically integrated range in `t` for `J_3`, `J_4`.
const J_TRUNCATION: f64 = 1e4 * PI;
/// Beyond this `t` the tail `∫_1^∞ ψ′(nu) cos ut du` is replaced by its
/// three-term expansion.
const Q_SWITCH: f64 = 64.0 * PI;
/// Below `e^{−V_SWITCH}` the tail-sine transform is replaced by its
/// slowly-varying expansion.
const V_SWITCH: f64 = 40.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Sum of adaptive integrals over panels whose edges are `a`, `b` and the
/// multiples of `step` in between.
fn panel_sum<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, step: f64, tol: Tol, what: &str) -> Result<f64> {
    let mut total = 0.0;
    let mut lo = a;
    let mut k = (a / step).floor() + 1.0;
    while lo < b {
        let hi = (k * step).min(b);
        if hi > lo {
            let q = adaptive(&f, lo, hi, tol);
            if !q.converged {
                return Err(Error::Quadrature { what: format!("{what} on [{lo}, {hi}]"), achieved: q.error });
            }
            total += q.value;
        }
        lo = hi;
        k += 1.0;
    }
    Ok(total)
}

/// Mean of `δ(t) sin t` over its period π, with `δ(t) = φ_n(t/n)`.
fn mean_delta_sine(spec: &ExtremalSpec, tol: Tol) -> Result<f64> {
    let nf = spec.n as f64;
    Ok(panel_sum(|t| phi_n_eval(spec, t / nf) * t.sin(), 0.0, PI, FRAC_PI_2, tol, "mean of δ sin")? / PI)
}

/// `∫_1^∞ ψ(nu) sin ut du`, with the expansion
/// `(ψ(x) − γ_E·xψ′(x))/t`, `x = n/t`, for `t` below `e^{−V_SWITCH}`.
/// Returned multiplied by `t`.
fn scaled_tail_sine(kernel: &TauKernel, v: f64) -> Result<f64> {
    let t = (-v).exp();
    if v <= V_SWITCH {
        let (e, _) = kernel.value_tail(t)?;
        return Ok(t * e.im);
    }
    let w = v + (kernel.n as f64).ln();
    let h = 1e-4 * w.max(1.0);
    let dlog = (kernel.psi.eval_exp(w + h) - kernel.psi.eval_exp(w - h)) / (2.0 * h);
    Ok(kernel.psi.eval_exp(w) - EULER_GAMMA * dlog)
}

/// `∫_0^1 ω(2t/n) ∫_1^∞ ψ(nu) sin ut du dt`, integrated in `v = −ln t`.
fn omega_weighted_tail_sine(kernel: &TauKernel, omega: &Modulus) -> Result<f64> {
    let lnh = (kernel.n as f64 / 2.0).ln();
    let w = |v: f64| omega.eval_exp(v + lnh);
    let f = |v: f64| match scaled_tail_sine(kernel, v) {
        Ok(e) => w(v) * e,
        Err(_) => f64::NAN,
    };
    let head = panel_sum(f, 0.0, V_SWITCH, 1.0, Tol::new(1e-300, 1e-10), "ω-weighted tail sine")?;
    if !head.is_finite() {
        return Err(Error::Quadrature { what: "ω-weighted tail sine".into(), achieved: f64::NAN });
    }
    if w(V_SWITCH) == 0.0 {
        return Ok(head);
    }
    let tail = doubling_tail(f, V_SWITCH, 1e-10)?;
    Ok(head + tail.value)
}

/// The pieces of the witness remainder `f*(0) − U^ψ_{n−1}f*(0)` split at
/// `|t| = 1` in the representation, with `δ(t) = φ_n(t/n)`.
#[derive(Debug, Clone, Serialize)]
pub struct RemainderComponents {
    pub n: usize,
    /// `J_1..J_5`; the cosine-weighted `J_1`, `J_2` vanish because δ is odd.
    pub j: [f64; 5],
    /// `J_i/(ψ(n)ω(1/n))`.
    pub ratios: [f64; 5],
    /// `−(sin(βπ/2)/π)(J_3 + J_4 + J_5)`.
    pub r_n: f64,
    /// `−(c_ω sin(βπ/2)/π) ∫_0^1 ω(2t/n) ∫_1^∞ ψ(nu) sin ut du dt`.
    pub main: f64,
    pub remainder_scale: f64,
}

/// `J_3 = 4ψ(n)∫_1^∞ δ(t)(cos t + t sin t − 1)/t³ dt`.
fn j3(spec: &ExtremalSpec, tol: Tol, mean: f64) -> Result<f64> {
    let nf = spec.n as f64;
    let f = |t: f64| {
        let (s, c) = t.sin_cos();
        phi_n_eval(spec, t / nf) * (c + t * s - 1.0) / (t * t * t)
    };
    let body = panel_sum(f, 1.0, J_TRUNCATION, FRAC_PI_2, tol, "J3")?;
    Ok(4.0 * spec.psi.eval(nf) * (body + mean / J_TRUNCATION))
}

/// `J_4 = 2n∫_1^∞ δ(t) Q(t)/t dt` with `Q(t) = ∫_1^∞ ψ′(nu) cos ut du`.
fn j4(spec: &ExtremalSpec, kernel: &TauKernel, tol: Tol, mean: f64) -> Result<f64> {
    let nf = spec.n as f64;
    let psi = &spec.psi;
    let d1 = psi.deriv_plus(nf);
    let d2 = nf * psi.second_deriv(nf);
    let h = 1e-3 * nf;
    let d3 = nf * nf * (psi.second_deriv(nf + h) - psi.second_deriv(nf - h)) / (2.0 * h);
    let near = |t: f64| match kernel.derivative_tail(t) {
        Ok((q, _)) => phi_n_eval(spec, t / nf) * q.re / t,
        Err(_) => f64::NAN,
    };
    let far = |t: f64| {
        let (s, c) = t.sin_cos();
        let q = -d1 * s / t - d2 * c / (t * t) + d3 * s / (t * t * t);
        phi_n_eval(spec, t / nf) * q / t
    };
    let body = panel_sum(near, 1.0, Q_SWITCH, FRAC_PI_2, tol, "J4")?;
    if !body.is_finite() {
        return Err(Error::Quadrature { what: "J4 cosine tail".into(), achieved: f64::NAN });
    }
    let far_part = panel_sum(far, Q_SWITCH, J_TRUNCATION, FRAC_PI_2, tol, "J4")?;
    Ok(2.0 * nf * (body + far_part - d1 * mean / J_TRUNCATION))
}

/// `J_5 = 2ψ(n)∫_0^1 δ(t) ∫_0^1 u² sin ut du dt`.
fn j5(spec: &ExtremalSpec, tol: Tol) -> Result<f64> {
    let nf = spec.n as f64;
    let q = adaptive(|t| phi_n_eval(spec, t / nf) * unit_moments(t).2, 0.0, 1.0, tol);
    Ok(2.0 * spec.psi.eval(nf) * q.check("J5")?)
}

pub fn remainder_components(spec: &ExtremalSpec) -> Result<RemainderComponents> {
    let nf = spec.n as f64;
    let scale = remainder_scale(&spec.psi, &spec.omega, nf);
    let (sn, _) = phase(spec.beta);
    let kernel = TauKernel::new(spec.psi.clone(), spec.n)?;
    let tol = Tol::new(1e-14 * scale.max(f64::MIN_POSITIVE), 1e-10);
    let mean = mean_delta_sine(spec, tol)?;
    let j = [0.0, 0.0, j3(spec, tol, mean)?, j4(spec, &kernel, tol, mean)?, j5(spec, tol)?];
    let r_n = -sn / PI * (j[2] + j[3] + j[4]);
    let main = if sn == 0.0 || spec.omega.scale() == 0.0 {
        0.0
    } else {
        -spec.c_omega * sn / PI * omega_weighted_tail_sine(&kernel, &spec.omega)?
    };
    let ratios = j.map(|v| if scale > 0.0 { v / scale } else { 0.0 });
    Ok(RemainderComponents { n: spec.n, j, ratios, r_n, main, remainder_scale: scale })
}

/// `∫_0^1 ω(2t/n) ∫_1^∞ ψ(nu) sin ut du dt` against `∫_0^{1/n} ψ(1/t)ω(t)/t dt`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OmegaIdentity {
    pub n: usize,
    pub lhs: f64,
    pub rhs_main: f64,
    /// `(lhs − rhs_main)/(ψ(n)ω(1/n))`; zero when ω ≡ 0.
    pub residual_ratio: f64,
}

pub fn identity_omega2t(psi: &PsiShape, omega: &Modulus, n: usize) -> Result<OmegaIdentity> {
    let nf = n as f64;
    if omega.scale() == 0.0 {
        return Ok(OmegaIdentity { n, lhs: 0.0, rhs_main: 0.0, residual_ratio: 0.0 });
    }
    let kernel = TauKernel::new(psi.clone(), n)?;
    let lhs = omega_weighted_tail_sine(&kernel, omega)?;
    let rhs_main = main_integral(psi, omega, nf)?;
    let residual_ratio = (lhs - rhs_main) / remainder_scale(psi, omega, nf);
    Ok(OmegaIdentity { n, lhs, rhs_main, residual_ratio })
}

/// `main_term/remainder_scale` needed before θ is bracketed or the log-log main
/// term is compared against its closed asymptote.
pub const ASYMPTOTIC_REGIME: f64 = 10.0;

/// Per-row verdicts of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReportFlags {
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub remez_converged: bool,
    /// `main_term/remainder_scale ≥ ASYMPTOTIC_REGIME`.
    pub asymptotic: bool,
}

impl ReportFlags {
    pub fn passed(&self) -> bool {
        self.lower_ok && self.upper_ok && self.remez_converged
    }
}

impl fmt::Display for ReportFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut tags = Vec::new();
        if !self.lower_ok {
            tags.push("lower_violated");
        }
        if !self.upper_ok {
            tags.push("upper_violated");
        }
        if !self.remez_converged {
            tags.push("remez_unconverged");
        }
        if tags.is_empty() {
            tags.push("ok");
        }
        if !self.asymptotic {
            tags.push("pre_asymptotic");
        }
        f.write_str(&tags.join(";"))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproxReport {
    pub n: usize,
    pub main_term: f64,
    pub remainder_scale: f64,
    pub lower: f64,
    pub witness_best: f64,
    pub upper: f64,
    /// `(lower − C_est·ψ(n)ω(1/n))/main_term`, only in the asymptotic regime.
    pub theta_bracket: Option<f64>,
    pub c_est: f64,
    pub flags: ReportFlags,
}

impl ApproxReport {
    pub fn from_bracket(b: &EnBracket) -> Self {
        let asymptotic = b.remainder_scale > 0.0 && b.main_term >= ASYMPTOTIC_REGIME * b.remainder_scale;
        let theta_bracket = asymptotic.then(|| (b.lower - b.c_est * b.remainder_scale) / b.main_term);
        ApproxReport {
            n: b.n,
            main_term: b.main_term,
            remainder_scale: b.remainder_scale,
            lower: b.lower,
            witness_best: b.witness_best,
            upper: b.upper,
            theta_bracket,
            c_est: b.c_est,
            flags: ReportFlags {
                lower_ok: b.lower_ok(),
                upper_ok: b.upper_ok(),
                remez_converged: b.certificate.converged,
                asymptotic,
            },
        }
    }
}

/// Calibrates `C_est` on [`PILOT_GRID`] and reports every `n` of `grid`.
pub fn approx_reports(psi: &PsiShape, omega: &Modulus, beta: f64, grid: &[usize], tol: f64) -> Result<Vec<ApproxReport>> {
    let cal = calibrate(psi, omega, beta, &PILOT_GRID, tol)?;
    par_map(grid, |&n| {
        let point = match cal.points.iter().find(|p| p.n == n) {
            Some(p) => p.clone(),
            None => witness_point(&ExtremalSpec::new(n, psi.clone(), *omega, beta)?, tol)?,
        };
        Ok(ApproxReport::from_bracket(&EnBracket::from_point(point, cal.c_est)))
    })
}

/// Maps `f` over `items` on scoped threads; results keep the input order.
pub fn par_map<T: Sync, R: Send, F: Fn(&T) -> Result<R> + Sync>(items: &[T], f: F) -> Result<Vec<R>> {
    let workers = std::thread::available_parallelism().map_or(1, |p| p.get()).min(items.len()).max(1);
    let chunk = items.len().div_ceil(workers).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| scope.spawn(|| part.iter().map(&f).collect::<Result<Vec<R>>>()))
            .collect();
        let mut out = Vec::with_capacity(items.len());
        for h in handles {
            out.extend(h.join().expect("worker panicked")?);
        }
        Ok(out)
    })
}

/// `K_1 ≤ witness_best/(ψ(n)ω(1/n)) ≤ K_2` estimated over a grid.
#[derive(Debug, Clone, Serialize)]
pub struct OrderBand {
    pub n: Vec<usize>,
    pub ratios: Vec<f64>,
    pub k1: f64,
    pub k2: f64,
    /// `k2/k1 ≤ max_factor`.
    pub stable: bool,
}

pub fn order_band(psi: &PsiShape, omega: &Modulus, beta: f64, grid: &[usize], max_factor: f64) -> Result<OrderBand> {
    if grid.is_empty() {
        return Err(Error::Parameter("empty n grid".into()));
    }
    let ratios = par_map(grid, |&n| {
        let scale = remainder_scale(psi, omega, n as f64);
        if !(scale > 0.0) {
            return Err(Error::Domain(format!("degenerate band: ψ(n)ω(1/n) = {scale:e} at n = {n}")));
        }
        let p = witness_point(&ExtremalSpec::new(n, psi.clone(), *omega, beta)?, WITNESS_REMEZ_TOL)?;
        if !(p.witness_best > 0.0) {
            return Err(Error::Domain(format!("degenerate band: witness distance {:e} at n = {n}", p.witness_best)));
        }
        Ok(p.witness_best / scale)
    })?;
    let k1 = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let k2 = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(OrderBand { n: grid.to_vec(), ratios, k1, k2, stable: k2 <= max_factor * k1 })
}
