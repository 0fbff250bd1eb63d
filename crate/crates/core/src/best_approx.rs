//! Best uniform approximation by trigonometric polynomials of order
//! `≤ n−1` (periodic Remez exchange with 2n references), and the bracket
//! `lower ≤ E_n(f*) ≤ upper` for the witness f*.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::asymptotics::{main_term, par_map, remainder_scale};
use crate::error::{Error, Result};
use crate::extremal::{dvp_lower_bound, f_star, ExtremalSpec};
use crate::shapes::{Modulus, PsiShape};
use crate::trig::{Periodic, TrigPoly};

pub const REMEZ_MAX_ITER: usize = 100;
const GOLDEN_STEPS: usize = 48;

/// Best approximation with its equioscillation certificate.
#[derive(Debug, Clone, Serialize)]
pub struct BestApproxResult {
    /// Sup-norm of `f − poly` over the search grid and refined extrema.
    pub distance: f64,
    pub poly: TrigPoly,
    pub references: Vec<f64>,
    /// Signed errors `f − poly` at the references.
    pub levels: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl BestApproxResult {
    /// `(max|level| − min|level|)/max|level|`.
    pub fn spread(&self) -> f64 {
        level_spread(&self.levels)
    }

    /// The de la Vallée Poussin lower bound `min|level|` certified by the
    /// alternating references.
    pub fn certified_lower(&self) -> f64 {
        self.levels.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min)
    }
}

fn level_spread(levels: &[f64]) -> f64 {
    let max = levels.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let min = levels.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        (max - min) / max
    }
}

/// Solves `p(x_i) + (−1)^i h = f(x_i)` for a polynomial of order `n−1` and
/// the level `h`.
fn leveled_fit(refs: &[f64], fx: &[f64], n: usize) -> Result<(TrigPoly, f64)> {
    let m = 2 * n;
    let mut a = DMatrix::<f64>::zeros(m, m);
    for (i, &x) in refs.iter().enumerate() {
        a[(i, 0)] = 1.0;
        for k in 1..n {
            let (s, c) = (k as f64 * x).sin_cos();
            a[(i, k)] = c;
            a[(i, n - 1 + k)] = s;
        }
        a[(i, m - 1)] = if i % 2 == 0 { 1.0 } else { -1.0 };
    }
    let rhs = DVector::from_column_slice(fx);
    let z = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Remez("singular reference system".into()))?;
    let poly = TrigPoly::new(2.0 * z[0], (1..n).map(|k| z[k]).collect(), (1..n).map(|k| z[n - 1 + k]).collect());
    Ok((poly, z[m - 1]))
}

/// Maximises `sign·e` on `[a, b]` by golden-section search.
fn golden_max<E: Fn(f64) -> f64>(e: &E, sign: f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (sign * e(c), sign * e(d));
    for _ in 0..GOLDEN_STEPS {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sign * e(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sign * e(d);
        }
    }
    if fc > fd {
        (c, sign * fc)
    } else {
        (d, sign * fd)
    }
}

/// Local extrema of the error on the periodic grid, refined and merged into
/// a cyclically alternating sequence `(x, e(x))`.
fn alternating_extrema<E: Fn(f64) -> f64>(e: &E, grid: &[f64]) -> Vec<(f64, f64)> {
    let g = grid.len();
    let h = TAU / g as f64;
    let mut ext: Vec<(f64, f64)> = Vec::new();
    for i in 0..g {
        let (l, c, r) = (grid[(i + g - 1) % g], grid[i], grid[(i + 1) % g]);
        let is_max = c > 0.0 && c >= l && c >= r;
        let is_min = c < 0.0 && c <= l && c <= r;
        if is_max || is_min {
            let x = i as f64 * h;
            let sign = c.signum();
            let (xr, vr) = golden_max(e, sign, x - h, x + h);
            ext.push(if sign * vr >= sign * c { (xr.rem_euclid(TAU), vr) } else { (x, c) });
        }
    }
    ext.sort_by(|a, b| a.0.total_cmp(&b.0));
    // merge runs of equal sign, keeping the largest magnitude
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for p in ext {
        match merged.last_mut() {
            Some(q) if q.1.signum() == p.1.signum() => {
                if p.1.abs() > q.1.abs() {
                    *q = p;
                }
            }
            _ => merged.push(p),
        }
    }
    while merged.len() > 1 && merged[0].1.signum() == merged[merged.len() - 1].1.signum() {
        let last = merged.pop().expect("non-empty");
        if last.1.abs() > merged[0].1.abs() {
            merged[0] = last;
        }
    }
    merged
}

/// Drops adjacent pairs (cyclically) around the smallest extremum until
/// `m` remain; alternation is preserved because the count stays even.
fn reduce_to(mut pts: Vec<(f64, f64)>, m: usize) -> Vec<(f64, f64)> {
    while pts.len() > m {
        let len = pts.len();
        let i = (0..len).min_by(|&a, &b| pts[a].1.abs().total_cmp(&pts[b].1.abs())).expect("non-empty");
        let (prev, next) = ((i + len - 1) % len, (i + 1) % len);
        let j = if pts[prev].1.abs() < pts[next].1.abs() { prev } else { next };
        let (hi, lo) = if i > j { (i, j) } else { (j, i) };
        pts.remove(hi);
        pts.remove(lo);
    }
    pts
}

/// Best approximation of `f` by trigonometric polynomials of order `≤ n−1`.
///
/// Multi-point exchange over a grid of `64n` points with golden-section
/// refinement of the extrema; stops when the levels at the 2n references
/// agree to a relative spread of `tol`.
pub fn remez_best<F: Periodic + ?Sized>(f: &F, n: usize, tol: f64) -> Result<BestApproxResult> {
    if n == 0 {
        return Err(Error::Parameter("remez_best needs n ≥ 1".into()));
    }
    let m = 2 * n;
    let g = 64 * n;
    let xs: Vec<f64> = (0..g).map(|i| TAU * i as f64 / g as f64).collect();
    let fg: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
    let scale = fg.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut refs: Vec<f64> = (0..m).map(|i| i as f64 * PI / n as f64).collect();
    let mut best: Option<BestApproxResult> = None;
    for iter in 1..=REMEZ_MAX_ITER {
        let fx: Vec<f64> = refs.iter().map(|&x| f.eval(x)).collect();
        let (poly, _h) = leveled_fit(&refs, &fx, n)?;
        let e = |x: f64| f.eval(x) - poly.eval(x);
        let eg: Vec<f64> = xs.iter().zip(&fg).map(|(&x, &v)| v - poly.eval(x)).collect();
        let grid_max = eg.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if grid_max <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            let levels: Vec<f64> = refs.iter().map(|&x| e(x)).collect();
            return Ok(BestApproxResult { distance: grid_max, poly, references: refs, levels, iterations: iter, converged: true });
        }
        let ext = alternating_extrema(&e, &eg);
        if ext.len() < m {
            return Err(Error::Remez(format!("only {} alternating extrema for {m} references", ext.len())));
        }
        let distance = ext.iter().fold(grid_max, |a, p| a.max(p.1.abs()));
        let chosen = reduce_to(ext, m);
        let references: Vec<f64> = chosen.iter().map(|p| p.0).collect();
        let levels: Vec<f64> = chosen.iter().map(|p| p.1).collect();
        let spread = level_spread(&levels).max((distance - levels.iter().fold(0.0f64, |a, v| a.max(v.abs()))) / distance);
        let result = BestApproxResult { distance, poly, references: references.clone(), levels, iterations: iter, converged: spread <= tol };
        if result.converged {
            return Ok(result);
        }
        if best.as_ref().is_none_or(|b| result.distance < b.distance) {
            best = Some(result);
        }
        refs = references;
    }
    Ok(best.expect("at least one iteration ran"))
}

/// Relative level spread requested from Remez for the witness.
pub const WITNESS_REMEZ_TOL: f64 = 1e-10;

/// Pilot grid over which the remainder multiplier of `upper` is calibrated.
pub const PILOT_GRID: [usize; 4] = [4, 8, 16, 32];

/// Everything about the witness at one `n` that does not depend on the
/// calibrated multiplier.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessPoint {
    pub n: usize,
    /// de la Vallée Poussin bound from the alternation of the witness.
    pub lower: f64,
    pub witness_best: f64,
    pub main_term: f64,
    pub remainder_scale: f64,
    /// Sup-norm bound on the coefficient truncation of f*.
    pub tail_bound: f64,
    pub certificate: BestApproxResult,
}

pub fn witness_point(spec: &ExtremalSpec, tol: f64) -> Result<WitnessPoint> {
    let fs = f_star(spec)?;
    let lower = dvp_lower_bound(spec, &fs)?.value;
    let certificate = remez_best(&fs, spec.n, tol)?;
    let nf = spec.n as f64;
    Ok(WitnessPoint {
        n: spec.n,
        lower,
        witness_best: certificate.distance,
        main_term: main_term(&spec.psi, &spec.omega, spec.beta, nf)?,
        remainder_scale: remainder_scale(&spec.psi, &spec.omega, nf),
        tail_bound: fs.tail_bound,
        certificate,
    })
}

impl WitnessPoint {
    /// `|witness_best − main_term|/(ψ(n)ω(1/n))`.
    pub fn residual_ratio(&self) -> f64 {
        (self.witness_best - self.main_term).abs() / self.remainder_scale
    }
}

/// `C_est = max |witness_best − main_term|/(ψ(n)ω(1/n))` over the pilot points.
#[derive(Debug, Clone, Serialize)]
pub struct Calibration {
    pub c_est: f64,
    pub points: Vec<WitnessPoint>,
}

pub fn calibrate(psi: &PsiShape, omega: &Modulus, beta: f64, pilot: &[usize], tol: f64) -> Result<Calibration> {
    if pilot.is_empty() {
        return Err(Error::Parameter("empty pilot grid".into()));
    }
    let points = par_map(pilot, |&n| witness_point(&ExtremalSpec::new(n, psi.clone(), *omega, beta)?, tol))?;
    let c_est = points.iter().map(WitnessPoint::residual_ratio).fold(0.0, f64::max);
    Ok(Calibration { c_est, points })
}

/// `lower ≤ E_n(f*) ≤ upper` with `upper = I(n) + C_est·ψ(n)ω(1/n)`.
#[derive(Debug, Clone, Serialize)]
pub struct EnBracket {
    pub n: usize,
    pub lower: f64,
    pub witness_best: f64,
    pub upper: f64,
    pub main_term: f64,
    pub remainder_scale: f64,
    pub c_est: f64,
    /// Slack allowed on both inequalities: the truncation bound of f*.
    pub slack: f64,
    pub certificate: BestApproxResult,
}

impl EnBracket {
    pub fn from_point(p: WitnessPoint, c_est: f64) -> Self {
        EnBracket {
            n: p.n,
            lower: p.lower,
            witness_best: p.witness_best,
            upper: p.main_term + c_est * p.remainder_scale,
            main_term: p.main_term,
            remainder_scale: p.remainder_scale,
            c_est,
            slack: p.tail_bound,
            certificate: p.certificate,
        }
    }

    /// `lower ≤ witness_best`, up to the Remez level spread.
    pub fn lower_ok(&self) -> bool {
        self.lower <= self.witness_best * (1.0 + 1e-9)
    }

    pub fn upper_ok(&self) -> bool {
        self.witness_best <= self.upper + self.slack
    }
}

pub fn en_bracket(spec: &ExtremalSpec, c_est: f64) -> Result<EnBracket> {
    Ok(EnBracket::from_point(witness_point(spec, WITNESS_REMEZ_TOL)?, c_est))
}
