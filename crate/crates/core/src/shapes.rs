//! Generators ψ, moduli of continuity ω, half-decay analysis and class
//! membership tests.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{doubling_tail, semi_infinite, Tol};

#[derive(Debug, Clone, PartialEq)]
enum PsiKind {
    Power { r: f64 },
    LogPower { gamma: f64 },
    Tabulated(Table),
}

/// Piecewise-linear ψ through given knots, continued past the last knot by
/// the power law matching value and slope there.
#[derive(Debug, Clone, PartialEq)]
struct Table {
    t: Vec<f64>,
    y: Vec<f64>,
    tail_power: f64,
}

impl Table {
    fn segment(&self, t: f64) -> usize {
        match self.t.partition_point(|&x| x <= t) {
            0 => 0,
            i => (i - 1).min(self.t.len() - 2),
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let last = self.t.len() - 1;
        if t >= self.t[last] {
            return self.y[last] * (t / self.t[last]).powf(-self.tail_power);
        }
        let i = self.segment(t);
        let w = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
        self.y[i] + w * (self.y[i + 1] - self.y[i])
    }

    fn inverse(&self, y: f64) -> f64 {
        let last = self.t.len() - 1;
        if y <= self.y[last] {
            return self.t[last] * (y / self.y[last]).powf(-1.0 / self.tail_power);
        }
        // y is decreasing, so search the reversed order
        let i = self.y.partition_point(|&v| v > y).max(1) - 1;
        let w = (self.y[i] - y) / (self.y[i] - self.y[i + 1]);
        self.t[i] + w * (self.t[i + 1] - self.t[i])
    }

    fn tail_integral(&self, n: f64) -> f64 {
        let last = self.t.len() - 1;
        let tl = self.t[last];
        if n >= tl {
            return self.eval(n) / self.tail_power;
        }
        let mut total = self.y[last] / self.tail_power;
        let mut i = self.segment(n);
        let mut lo = n;
        while i < last {
            let hi = self.t[i + 1];
            let slope = (self.y[i + 1] - self.y[i]) / (self.t[i + 1] - self.t[i]);
            let intercept = self.y[i] - slope * self.t[i];
            total += intercept * (hi / lo).ln() + slope * (hi - lo);
            lo = hi;
            i += 1;
        }
        total
    }
}

/// A convex decreasing generator ψ(t) → 0 on t ≥ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiShape {
    kind: PsiKind,
}

impl PsiShape {
    /// ψ(t) = t^{-r}.
    pub fn power(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Parameter(format!("power exponent r must be > 0, got {r}")));
        }
        Ok(Self { kind: PsiKind::Power { r } })
    }

    /// ψ(t) = ln^{-γ}(t+1).
    pub fn logpower(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Parameter(format!("logpower gamma must be > 0, got {gamma}")));
        }
        Ok(Self { kind: PsiKind::LogPower { gamma } })
    }

    /// Monotone piecewise-linear ψ through `(t_i, y_i)` with `t_0 = 1`,
    /// extended by a power law beyond the last knot.
    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Parameter("tabulated ψ needs at least two knots".into()));
        }
        if points[0].0 != 1.0 {
            return Err(Error::Parameter("tabulated ψ must start at t = 1".into()));
        }
        let (t, y): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        let mut slopes = Vec::with_capacity(t.len() - 1);
        for i in 0..t.len() - 1 {
            if !(t[i + 1] > t[i]) || !(y[i + 1] < y[i]) || !(y[i + 1] > 0.0) {
                return Err(Error::Parameter(format!(
                    "tabulated ψ must be strictly decreasing and positive (knot {})",
                    i + 1
                )));
            }
            slopes.push((y[i + 1] - y[i]) / (t[i + 1] - t[i]));
        }
        if slopes.windows(2).any(|w| w[1] < w[0] - 1e-15 * w[0].abs()) {
            return Err(Error::Parameter("tabulated ψ must be convex".into()));
        }
        let last = t.len() - 1;
        let tail_power = -slopes[last - 1] * t[last] / y[last];
        Ok(Self { kind: PsiKind::Tabulated(Table { t, y, tail_power }) })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            PsiKind::Power { r } => t.powf(-r),
            PsiKind::LogPower { gamma } => t.ln_1p().powf(-gamma),
            PsiKind::Tabulated(tab) => tab.eval(t),
        }
    }

    /// ψ(e^v), accurate for large `v` where `e^v` overflows.
    pub fn eval_exp(&self, v: f64) -> f64 {
        match &self.kind {
            PsiKind::Power { r } => (-r * v).exp(),
            PsiKind::LogPower { gamma } => {
                let l = if v > 0.0 { v + (-v).exp().ln_1p() } else { v.exp().ln_1p() };
                l.powf(-gamma)
            }
            PsiKind::Tabulated(_) => self.eval(v.exp()),
        }
    }

    /// ψ′(t+).
    pub fn deriv_plus(&self, t: f64) -> f64 {
        match &self.kind {
            PsiKind::Power { r } => -r * t.powf(-r - 1.0),
            PsiKind::LogPower { gamma } => -gamma * t.ln_1p().powf(-gamma - 1.0) / (t + 1.0),
            PsiKind::Tabulated(_) => {
                let h = t * 1e-6;
                (self.eval(t + h) - self.eval(t)) / h
            }
        }
    }

    /// ψ″(t+).
    pub fn second_deriv(&self, t: f64) -> f64 {
        match &self.kind {
            PsiKind::Power { r } => r * (r + 1.0) * t.powf(-r - 2.0),
            PsiKind::LogPower { gamma } => {
                let l = t.ln_1p();
                let d2 = (t + 1.0) * (t + 1.0);
                gamma * (gamma + 1.0) * l.powf(-gamma - 2.0) / d2 + gamma * l.powf(-gamma - 1.0) / d2
            }
            PsiKind::Tabulated(_) => {
                let h = t * 1e-4;
                (self.deriv_plus(t + h) - self.deriv_plus(t)) / h
            }
        }
    }

    /// ψ⁻¹(y) for `0 < y ≤ ψ(1)`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(y > 0.0 && y <= self.eval(1.0) * (1.0 + 1e-15)) {
            return Err(Error::Domain(format!("ψ⁻¹ undefined at y = {y:e}")));
        }
        let t = match &self.kind {
            PsiKind::Power { r } => y.powf(-1.0 / r),
            PsiKind::LogPower { gamma } => y.powf(-1.0 / gamma).exp_m1(),
            PsiKind::Tabulated(tab) => tab.inverse(y),
        };
        if t.is_finite() {
            Ok(t)
        } else {
            Err(Error::Domain(format!("ψ⁻¹({y:e}) overflows")))
        }
    }

    /// ∫_n^∞ ψ(t)/t dt.
    pub fn tail_integral(&self, n: f64) -> Result<f64> {
        match &self.kind {
            PsiKind::Power { r } => Ok(n.powf(-r) / r),
            PsiKind::LogPower { gamma } => {
                if *gamma <= 1.0 {
                    return Err(Error::Divergent(format!(
                        "∫ ln^-{gamma}(t+1)/t dt diverges for gamma ≤ 1"
                    )));
                }
                semi_infinite(|v| self.eval_exp(v), n.ln(), Tol::new(1e-300, 1e-12))
                    .check("ψ tail integral")
            }
            PsiKind::Tabulated(tab) => Ok(tab.tail_integral(n)),
        }
    }

    /// `∫_x^∞ ψ(t) dt` when it is finite and known in closed form.
    pub fn plain_tail(&self, x: f64) -> Option<f64> {
        match &self.kind {
            PsiKind::Power { r } if *r > 1.0 => Some(x.powf(1.0 - r) / (r - 1.0)),
            PsiKind::Tabulated(tab) if tab.tail_power > 1.0 && x >= *tab.t.last()? => {
                Some(tab.eval(x) * x / (tab.tail_power - 1.0))
            }
            _ => None,
        }
    }

    /// Canonical specifier string, e.g. `power:r=2`.
    pub fn label(&self) -> String {
        self.to_string()
    }

    /// γ when ψ = ln^{-γ}(t+1).
    pub fn log_exponent(&self) -> Option<f64> {
        match self.kind {
            PsiKind::LogPower { gamma } => Some(gamma),
            _ => None,
        }
    }
}

impl fmt::Display for PsiShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PsiKind::Power { r } => write!(f, "power:r={r}"),
            PsiKind::LogPower { gamma } => write!(f, "logpower:gamma={gamma}"),
            PsiKind::Tabulated(tab) => write!(f, "tabulated:knots={}", tab.t.len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum OmegaKind {
    Power { alpha: f64 },
    LogInv { alpha: f64 },
}

/// A modulus of continuity ω(t), optionally multiplied by a constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulus {
    kind: OmegaKind,
    scale: f64,
}

impl Modulus {
    /// ω(t) = t^α, 0 < α ≤ 1.
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Parameter(format!("omega power alpha must be in (0,1], got {alpha}")));
        }
        Ok(Self { kind: OmegaKind::Power { alpha }, scale: 1.0 })
    }

    /// ω(t) = ln^{-α}(1/t + 1), ω(0) = 0, 0 < α ≤ 1.
    pub fn loginv(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Parameter(format!("omega loginv alpha must be in (0,1], got {alpha}")));
        }
        Ok(Self { kind: OmegaKind::LogInv { alpha }, scale: 1.0 })
    }

    /// `c·ω` for `c ≥ 0`.
    pub fn scaled(self, c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::Parameter(format!("modulus scale must be ≥ 0, got {c}")));
        }
        Ok(Self { scale: self.scale * c, ..self })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 || self.scale == 0.0 {
            return 0.0;
        }
        self.scale
            * match self.kind {
                OmegaKind::Power { alpha } => t.powf(alpha),
                OmegaKind::LogInv { alpha } => (1.0 / t).ln_1p().powf(-alpha),
            }
    }

    /// ω(e^{-v}), accurate for large `v`.
    pub fn eval_exp(&self, v: f64) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        self.scale
            * match self.kind {
                OmegaKind::Power { alpha } => (-alpha * v).exp(),
                OmegaKind::LogInv { alpha } => {
                    let l = if v > 0.0 { v + (-v).exp().ln_1p() } else { v.exp().ln_1p() };
                    l.powf(-alpha)
                }
            }
    }

    /// ω′(t+) for t > 0.
    pub fn deriv_plus(&self, t: f64) -> f64 {
        self.scale
            * match self.kind {
                OmegaKind::Power { alpha } => alpha * t.powf(alpha - 1.0),
                OmegaKind::LogInv { alpha } => {
                    let l = (1.0 / t).ln_1p();
                    alpha * l.powf(-alpha - 1.0) / (t * (t + 1.0))
                }
            }
    }

    /// Whether ω is concave ("convex upwards").
    pub fn concave(&self) -> bool {
        true
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    /// α when ω = ln^{-α}(1/t+1), whatever the scale.
    pub fn loginv_exponent(&self) -> Option<f64> {
        match self.kind {
            OmegaKind::LogInv { alpha } => Some(alpha),
            OmegaKind::Power { .. } => None,
        }
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            OmegaKind::Power { alpha } => write!(f, "omega-power:alpha={alpha}")?,
            OmegaKind::LogInv { alpha } => write!(f, "omega-loginv:alpha={alpha}")?,
        }
        if self.scale != 1.0 {
            write!(f, ",scale={}", self.scale)?;
        }
        Ok(())
    }
}

fn parse_params(input: &str, body: &str, allowed: &[&str]) -> Result<Vec<(String, f64)>> {
    let bad = |reason: String| Error::Parse { input: input.to_string(), reason };
    let mut out = Vec::new();
    for part in body.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, found {part:?}")))?;
        let k = k.trim();
        if !allowed.contains(&k) {
            return Err(bad(format!("unknown parameter {k:?}")));
        }
        let v: f64 = v.trim().parse().map_err(|_| bad(format!("{v:?} is not a number")))?;
        out.push((k.to_string(), v));
    }
    Ok(out)
}

fn required(input: &str, params: &[(String, f64)], key: &str) -> Result<f64> {
    params.iter().find(|(k, _)| k == key).map(|(_, v)| *v).ok_or_else(|| Error::Parse {
        input: input.to_string(),
        reason: format!("missing parameter {key}"),
    })
}

impl FromStr for PsiShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, body) = s.trim().split_once(':').ok_or_else(|| Error::Parse {
            input: s.to_string(),
            reason: "expected kind:params".into(),
        })?;
        match kind {
            "power" => PsiShape::power(required(s, &parse_params(s, body, &["r"])?, "r")?),
            "logpower" => {
                PsiShape::logpower(required(s, &parse_params(s, body, &["gamma"])?, "gamma")?)
            }
            other => Err(Error::Parse { input: s.to_string(), reason: format!("unknown ψ kind {other:?}") }),
        }
    }
}

impl FromStr for Modulus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, body) = s.trim().split_once(':').ok_or_else(|| Error::Parse {
            input: s.to_string(),
            reason: "expected kind:params".into(),
        })?;
        let params = parse_params(s, body, &["alpha", "scale"])?;
        let alpha = required(s, &params, "alpha")?;
        let base = match kind {
            "omega-power" => Modulus::power(alpha)?,
            "omega-loginv" => Modulus::loginv(alpha)?,
            other => {
                return Err(Error::Parse { input: s.to_string(), reason: format!("unknown ω kind {other:?}") })
            }
        };
        match params.iter().find(|(k, _)| k == "scale") {
            Some((_, c)) => base.scaled(*c),
            None => Ok(base),
        }
    }
}

/// η(t) = ψ⁻¹(ψ(t)/2).
pub fn half_decay_eta(psi: &PsiShape, t: f64) -> Result<f64> {
    let eta = match &psi.kind {
        PsiKind::Power { r } => 2f64.powf(1.0 / r) * t,
        PsiKind::LogPower { gamma } => (2f64.powf(1.0 / gamma) * t.ln_1p()).exp_m1(),
        PsiKind::Tabulated(_) => psi.inverse(psi.eval(t) / 2.0)?,
    };
    if eta.is_finite() {
        Ok(eta)
    } else {
        Err(Error::Domain(format!("η({t}) overflows: ψ decays too slowly to halve in range")))
    }
}

/// μ(t) = t / (η(t) − t).
pub fn half_decay_mu(psi: &PsiShape, t: f64) -> Result<f64> {
    let gap = match &psi.kind {
        PsiKind::Power { r } => (2f64.powf(1.0 / r) - 1.0) * t,
        PsiKind::LogPower { gamma } => {
            (t + 1.0) * ((2f64.powf(1.0 / gamma) - 1.0) * t.ln_1p()).exp_m1()
        }
        PsiKind::Tabulated(_) => half_decay_eta(psi, t)? - t,
    };
    if !gap.is_finite() {
        return Err(Error::Domain(format!("η({t}) overflows: ψ decays too slowly to halve in range")));
    }
    Ok(t / gap)
}

/// Sampling grid for [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifyGrid {
    pub t_max: f64,
    pub points: usize,
}

impl Default for ClassifyGrid {
    fn default() -> Self {
        Self { t_max: 1e6, points: 200 }
    }
}

/// Result of sampling μ and testing the summability side condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub mu_min: f64,
    pub mu_max: f64,
    pub in_m0: bool,
    pub in_mc: bool,
    pub in_mprime: bool,
    pub integral_finite: bool,
    /// ∫₁^∞ ψ(t)/t dt when finite.
    pub integral: Option<f64>,
    pub inconclusive: bool,
    pub mc_threshold: f64,
}

/// Ratio `mu_max/mu_min` below which μ counts as bounded away from 0 and ∞.
pub const MC_THRESHOLD: f64 = 10.0;

/// Samples μ on a geometric grid over `[1, t_max]` and decides membership in
/// 𝔐₀, 𝔐_C and 𝔐′.
pub fn classify(psi: &PsiShape, beta: f64, grid: ClassifyGrid) -> ClassReport {
    let points = grid.points.max(2);
    let mut mu_min = f64::INFINITY;
    let mut mu_max: f64 = 0.0;
    let mut early_max: f64 = 0.0;
    let mut positive = true;
    for i in 0..points {
        let t = grid.t_max.powf(i as f64 / (points - 1) as f64);
        // overflow of η means μ is positive but below representable resolution
        let mu = half_decay_mu(psi, t).unwrap_or(0.0);
        if !(mu >= 0.0) {
            positive = false;
        }
        mu_min = mu_min.min(mu);
        mu_max = mu_max.max(mu);
        if t <= 10.0 {
            early_max = early_max.max(mu);
        }
    }
    let in_m0 = positive && mu_max > 0.0 && mu_max <= MC_THRESHOLD * early_max;
    let ratio = if mu_min > 0.0 { mu_max / mu_min } else { f64::INFINITY };
    let in_mc = in_m0 && ratio <= MC_THRESHOLD;
    let (integral_finite, integral) = match psi.tail_integral(1.0) {
        Ok(v) if v.is_finite() => (true, Some(v)),
        _ => (false, None),
    };
    let (s, _) = crate::phase(beta);
    let in_mprime = in_mc || s.abs() < 1e-12 || integral_finite;
    let inconclusive = grid.t_max < 1e6 || (ratio > MC_THRESHOLD / 2.0 && ratio <= MC_THRESHOLD);
    ClassReport {
        mu_min,
        mu_max,
        in_m0,
        in_mc,
        in_mprime,
        integral_finite,
        integral,
        inconclusive,
        mc_threshold: MC_THRESHOLD,
    }
}

/// `(∫_n^∞ ψ(t)/t dt, ratio to ψ(n))`.
pub fn tail_integral_bound_check(psi: &PsiShape, n: f64) -> Result<(f64, f64)> {
    let v = psi.tail_integral(n)?;
    Ok((v, v / psi.eval(n)))
}

/// `∫_{v0}^∞ g(v) dv` by doubling blocks; exposed for generic convergence
/// tests of slowly decaying integrands.
pub fn doubling_integral<F: Fn(f64) -> f64>(g: F, v0: f64, rel_tol: f64) -> Result<f64> {
    doubling_tail(g, v0, rel_tol).map(|q| q.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric_grid(hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| hi.powf(i as f64 / (n - 1) as f64)).collect()
    }

    fn builtins() -> Vec<PsiShape> {
        vec![
            PsiShape::power(1.0).unwrap(),
            PsiShape::power(2.0).unwrap(),
            PsiShape::power(0.5).unwrap(),
            PsiShape::logpower(2.0).unwrap(),
            PsiShape::logpower(1.0).unwrap(),
        ]
    }

    #[test]
    fn eta_examples() {
        let p1 = PsiShape::power(1.0).unwrap();
        assert!((half_decay_eta(&p1, 3.0).unwrap() - 6.0).abs() < 1e-12);
        let p3 = PsiShape::power(3.0).unwrap();
        assert!((half_decay_eta(&p3, 5.0).unwrap() - 2f64.powf(1.0 / 3.0) * 5.0).abs() < 1e-12);
        let l1 = PsiShape::logpower(1.0).unwrap();
        assert!((half_decay_eta(&l1, 1.0).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mu_examples() {
        let p1 = PsiShape::power(1.0).unwrap();
        for t in [1.0, 7.0, 1e5] {
            assert!((half_decay_mu(&p1, t).unwrap() - 1.0).abs() < 1e-12);
        }
        let l1 = PsiShape::logpower(1.0).unwrap();
        assert!((half_decay_mu(&l1, 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((half_decay_mu(&l1, 9.0).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn mu_power_is_constant() {
        let p = PsiShape::power(2.0).unwrap();
        let want = 1.0 / (2f64.sqrt() - 1.0);
        for t in geometric_grid(1e8, 200) {
            assert!((half_decay_mu(&p, t).unwrap() / want - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn mu_logpower_decreases_to_zero() {
        let p = PsiShape::logpower(2.0).unwrap();
        let grid = geometric_grid(1e8, 200);
        let mus: Vec<f64> = grid.iter().map(|&t| half_decay_mu(&p, t).unwrap()).collect();
        assert!(mus.windows(2).all(|w| w[1] < w[0]));
        assert!(mus.last().unwrap() < &1e-2);
    }

    #[test]
    fn builtins_are_decreasing_convex_and_invertible() {
        let grid = geometric_grid(1e8, 200);
        for psi in builtins() {
            for w in grid.windows(2) {
                let (a, b) = (w[0], w[1]);
                assert!(psi.eval(b) < psi.eval(a), "{psi}");
                let m = 0.5 * (a + b);
                assert!(psi.eval(m) <= 0.5 * (psi.eval(a) + psi.eval(b)) * (1.0 + 1e-14), "{psi}");
            }
            for &t in &grid {
                let back = psi.inverse(psi.eval(t)).unwrap();
                assert!((back / t - 1.0).abs() < 1e-10, "{psi} t={t}");
            }
        }
    }

    #[test]
    fn derivatives_match_differences() {
        for psi in builtins() {
            for t in [1.0, 3.5, 40.0, 1e4] {
                let h = t * 1e-5;
                let fd = (psi.eval(t + h) - psi.eval(t - h)) / (2.0 * h);
                assert!((psi.deriv_plus(t) / fd - 1.0).abs() < 1e-7, "{psi}");
                let fd2 = (psi.deriv_plus(t + h) - psi.deriv_plus(t - h)) / (2.0 * h);
                assert!((psi.second_deriv(t) / fd2 - 1.0).abs() < 1e-6, "{psi}");
            }
        }
        for om in [Modulus::power(0.5).unwrap(), Modulus::loginv(1.0).unwrap()] {
            for t in [1e-4, 0.1, 1.0] {
                let h = t * 1e-5;
                let fd = (om.eval(t + h) - om.eval(t - h)) / (2.0 * h);
                assert!((om.deriv_plus(t) / fd - 1.0).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn eval_exp_agrees_with_eval() {
        for psi in builtins() {
            for v in [0.0, 1.0, 10.0, 30.0] {
                assert!((psi.eval_exp(v) / psi.eval(v.exp()) - 1.0).abs() < 1e-13);
            }
        }
        let om = Modulus::loginv(1.0).unwrap();
        for v in [0.5, 5.0, 30.0] {
            assert!((om.eval_exp(v) / om.eval((-v).exp()) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn builtin_values() {
        assert!((PsiShape::power(2.0).unwrap().eval(3.0) - 1.0 / 9.0).abs() < 1e-16);
        assert_eq!(Modulus::loginv(1.0).unwrap().eval(0.0), 0.0);
        let lin = Modulus::power(1.0).unwrap();
        assert_eq!(lin.eval(0.3), 0.3);
        assert!(lin.concave());
        assert!(PsiShape::power(-1.0).is_err());
        assert!(Modulus::power(1.5).is_err());
    }

    #[test]
    fn moduli_are_subadditive_and_concave() {
        let grid = geometric_grid(1e4, 60).into_iter().map(|t| t * 1e-4).collect::<Vec<_>>();
        for om in [Modulus::power(0.5).unwrap(), Modulus::power(1.0).unwrap(), Modulus::loginv(1.0).unwrap(), Modulus::loginv(0.5).unwrap()] {
            for &a in &grid {
                for &b in &grid {
                    assert!(om.eval(a + b) <= om.eval(a) + om.eval(b) + 1e-15);
                    if om.concave() {
                        assert!(om.eval(0.5 * (a + b)) >= 0.5 * (om.eval(a) + om.eval(b)) - 1e-15, "{om}");
                    }
                }
            }
        }
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in ["power:r=2", "logpower:gamma=2", "omega-power:alpha=0.5", "omega-loginv:alpha=1"] {
            if s.starts_with("omega") {
                assert_eq!(s.parse::<Modulus>().unwrap().to_string(), s);
            } else {
                assert_eq!(s.parse::<PsiShape>().unwrap().to_string(), s);
            }
        }
        assert!("power:r=-1".parse::<PsiShape>().is_err());
        assert!("power:q=1".parse::<PsiShape>().is_err());
        assert!("cubic:r=1".parse::<PsiShape>().is_err());
        assert_eq!("omega-power:alpha=1,scale=3".parse::<Modulus>().unwrap().eval(2.0), 6.0);
    }

    #[test]
    fn classification_examples() {
        let g = ClassifyGrid::default();
        let r = classify(&PsiShape::power(2.0).unwrap(), 1.0, g);
        assert!(r.in_mc && r.in_m0 && r.in_mprime);
        let r = classify(&PsiShape::logpower(2.0).unwrap(), 1.0, g);
        assert!(r.in_m0 && !r.in_mc && r.in_mprime);
        let r = classify(&PsiShape::logpower(0.5).unwrap(), 0.0, g);
        assert!(r.in_m0 && r.in_mprime && !r.integral_finite);
        let r = classify(&PsiShape::logpower(0.5).unwrap(), 1.0, g);
        assert!(!r.in_mprime);
        assert_eq!(classify(&PsiShape::power(2.0).unwrap(), 1.0, g), r_power(g));
        assert!(classify(&PsiShape::power(2.0).unwrap(), 1.0, ClassifyGrid { t_max: 1e3, points: 50 }).inconclusive);
    }

    fn r_power(g: ClassifyGrid) -> ClassReport {
        classify(&PsiShape::power(2.0).unwrap(), 1.0, g)
    }

    #[test]
    fn tail_integral_examples() {
        let p = PsiShape::power(2.0).unwrap();
        assert_eq!(tail_integral_bound_check(&p, 1.0).unwrap(), (0.5, 0.5));
        let (v, r) = tail_integral_bound_check(&p, 2.0).unwrap();
        assert!((v - 0.125).abs() < 1e-16 && (r - 0.5).abs() < 1e-16);
        let l = PsiShape::logpower(2.0).unwrap();
        // oracle: in v = ln t the integrand is ln^-2(e^v + 1) ≈ v^-2 far out
        let n: f64 = 10.0;
        let cut = 1e9;
        let direct = crate::quad::geometric(|v: f64| (v + (-v).exp().ln_1p()).powi(-2), n.ln(), cut, Tol::new(1e-300, 1e-13));
        let direct = crate::quad::Quad { value: direct.value + 1.0 / cut, ..direct };
        let got = l.tail_integral(n).unwrap();
        assert!((got / direct.value - 1.0).abs() < 1e-9, "{got} {}", direct.value);
        let ratios: Vec<f64> =
            [10.0, 100.0, 1e4].iter().map(|&n| tail_integral_bound_check(&l, n).unwrap().1).collect();
        assert!(ratios.windows(2).all(|w| w[1] > w[0]));
        assert!(PsiShape::logpower(1.0).unwrap().tail_integral(1.0).is_err());
    }

    #[test]
    fn tabulated_shape_behaves() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&t: &f64| (t, t.powi(-2))).collect();
        let psi = PsiShape::tabulated(&pts).unwrap();
        assert_eq!(psi.eval(2.0), 0.25);
        assert!((psi.inverse(psi.eval(3.0)).unwrap() - 3.0).abs() < 1e-12);
        assert!((psi.inverse(psi.eval(50.0)).unwrap() - 50.0).abs() < 1e-9);
        // oracle: adaptive quadrature of the interpolant
        let q = crate::quad::adaptive(|t: f64| psi.eval(t) / t, 1.5, 8.0, Tol::default()).value
            + psi.eval(8.0) / (psi.deriv_plus(8.0) * -8.0 / psi.eval(8.0));
        assert!((psi.tail_integral(1.5).unwrap() / q - 1.0).abs() < 1e-6);
        assert!(PsiShape::tabulated(&[(1.0, 1.0), (2.0, 0.9), (3.0, 0.5)]).is_err());
    }

    #[test]
    fn doubling_integral_of_omega_over_t() {
        let om = Modulus::power(0.5).unwrap();
        let v = doubling_integral(|v| om.eval_exp(v), 1.0, 1e-12).unwrap();
        assert!((v - 2.0 * (-0.5f64).exp()).abs() < 1e-10);
        let lg = Modulus::loginv(1.0).unwrap();
        assert!(doubling_integral(|v| lg.eval_exp(v), 1.0, 1e-9).is_err());
    }
}
