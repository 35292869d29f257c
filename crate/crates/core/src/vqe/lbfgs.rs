//! Limited-memory BFGS with a strong-Wolfe line search, plus a projected
//! backtracking variant when box bounds are active.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// Smooth objective over `R^n`.
pub trait Objective {
    fn dim(&self) -> usize;

    /// Value and gradient at `x`. Non-finite values signal divergence.
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

#[derive(Clone, Debug, PartialEq)]
pub struct LbfgsConfig {
    pub memory: usize,
    pub max_iterations: usize,
    /// Stop when `(f_k − f_{k+1}) / max(|f_k|, |f_{k+1}|, 1) ≤ ftol`.
    pub ftol: f64,
    /// Stop when the (projected) gradient infinity norm drops below this.
    pub gtol: f64,
    pub bounds: Option<(f64, f64)>,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self { memory: 10, max_iterations: 10_000, ftol: 1e-9, gtol: 1e-8, bounds: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    CostTolerance,
    GradientTolerance,
    MaxIterations,
    LineSearchFailed,
    NonFinite,
}

impl Termination {
    pub fn is_converged(self) -> bool {
        matches!(self, Termination::CostTolerance | Termination::GradientTolerance)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LbfgsReport {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Counter<'a, O: Objective + ?Sized> {
    obj: &'a O,
    evaluations: usize,
}

impl<O: Objective + ?Sized> Counter<'_, O> {
    fn eval(&mut self, x: &[f64], g: &mut [f64]) -> f64 {
        self.evaluations += 1;
        self.obj.value_grad(x, g)
    }
}

pub fn minimize_lbfgs<O: Objective + ?Sized>(obj: &O, x0: &[f64], cfg: &LbfgsConfig) -> LbfgsReport {
    let n = obj.dim();
    assert_eq!(x0.len(), n, "start point has the wrong dimension");
    let project = |x: &mut [f64]| {
        if let Some((lo, hi)) = cfg.bounds {
            x.iter_mut().for_each(|v| *v = v.clamp(lo, hi));
        }
    };
    let mut counter = Counter { obj, evaluations: 0 };
    let mut x = x0.to_vec();
    project(&mut x);
    let mut g = vec![0.0; n];
    let mut f = counter.eval(&x, &mut g);
    let report = |x: Vec<f64>, f: f64, it: usize, ev: usize, t: Termination| LbfgsReport {
        x,
        f,
        iterations: it,
        evaluations: ev,
        termination: t,
    };
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return report(x, f, 0, counter.evaluations, Termination::NonFinite);
    }

    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.memory);
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    for iter in 1..=cfg.max_iterations {
        if inf_norm(&projected_gradient(&x, &g, cfg.bounds)) < cfg.gtol {
            return report(x, f, iter - 1, counter.evaluations, Termination::GradientTolerance);
        }
        let mut d = two_loop(&g, &history);
        if let Some(b) = cfg.bounds {
            clip_direction(&x, &mut d, b);
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 || !slope.is_finite() {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            if let Some(b) = cfg.bounds {
                clip_direction(&x, &mut d, b);
            }
            slope = dot(&g, &d);
            if slope >= 0.0 {
                return report(x, f, iter - 1, counter.evaluations, Termination::GradientTolerance);
            }
        }
        let alpha0 = if history.is_empty() { (1.0 / inf_norm(&d)).min(1.0) } else { 1.0 };

        let found = match cfg.bounds {
            None => strong_wolfe(&mut counter, &x, f, slope, &d, alpha0, &mut x_new, &mut g_new),
            Some(b) => projected_armijo(&mut counter, &x, f, &g, &d, alpha0, b, &mut x_new, &mut g_new),
        };
        let f_new = match found {
            Some(v) => v,
            None if !history.is_empty() => {
                // stale curvature pairs; retry from steepest descent next round
                history.clear();
                continue;
            }
            None => {
                return report(x, f, iter, counter.evaluations, Termination::LineSearchFailed)
            }
        };
        if !f_new.is_finite() || g_new.iter().any(|v| !v.is_finite()) {
            return report(x_new, f_new, iter, counter.evaluations, Termination::NonFinite);
        }

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && sy > 0.0 {
            if history.len() == cfg.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let decrease = (f - f_new) / f.abs().max(f_new.abs()).max(1.0);
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        f = f_new;
        if decrease <= cfg.ftol {
            return report(x, f, iter, counter.evaluations, Termination::CostTolerance);
        }
    }
    let it = cfg.max_iterations;
    report(x, f, it, counter.evaluations, Termination::MaxIterations)
}

fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

fn projected_gradient(x: &[f64], g: &[f64], bounds: Option<(f64, f64)>) -> Vec<f64> {
    match bounds {
        None => g.to_vec(),
        Some((lo, hi)) => x
            .iter()
            .zip(g)
            .map(|(&xi, &gi)| {
                if (xi <= lo && gi > 0.0) || (xi >= hi && gi < 0.0) {
                    0.0
                } else {
                    gi
                }
            })
            .collect(),
    }
}

fn clip_direction(x: &[f64], d: &mut [f64], (lo, hi): (f64, f64)) {
    for (xi, di) in x.iter().zip(d.iter_mut()) {
        if (*xi <= lo && *di < 0.0) || (*xi >= hi && *di > 0.0) {
            *di = 0.0;
        }
    }
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_LINE_EVALS: usize = 40;

#[allow(clippy::too_many_arguments)]
fn strong_wolfe<O: Objective + ?Sized>(
    counter: &mut Counter<'_, O>,
    x: &[f64],
    f0: f64,
    slope0: f64,
    d: &[f64],
    alpha0: f64,
    x_out: &mut Vec<f64>,
    g_out: &mut Vec<f64>,
) -> Option<f64> {
    let mut trial = |alpha: f64, xo: &mut Vec<f64>, go: &mut Vec<f64>| -> (f64, f64) {
        xo.iter_mut().zip(x.iter().zip(d)).for_each(|(t, (xi, di))| *t = xi + alpha * di);
        let f = counter.eval(xo, go);
        (f, dot(go, d))
    };
    let (mut a_prev, mut f_prev, mut s_prev) = (0.0, f0, slope0);
    let mut alpha = alpha0;
    for k in 0..MAX_LINE_EVALS {
        let (fa, sa) = trial(alpha, x_out, g_out);
        if !fa.is_finite() {
            // step into a non-finite region: shrink
            alpha = 0.5 * (a_prev + alpha);
            if alpha - a_prev < 1e-16 {
                return None;
            }
            continue;
        }
        if fa > f0 + C1 * alpha * slope0 || (k > 0 && fa >= f_prev) {
            return zoom(&mut trial, f0, slope0, (a_prev, f_prev, s_prev), (alpha, fa, sa), x_out, g_out);
        }
        if sa.abs() <= -C2 * slope0 {
            return Some(fa);
        }
        if sa >= 0.0 {
            return zoom(&mut trial, f0, slope0, (alpha, fa, sa), (a_prev, f_prev, s_prev), x_out, g_out);
        }
        a_prev = alpha;
        f_prev = fa;
        s_prev = sa;
        alpha *= 2.0;
    }
    None
}

fn cubic_min(a: (f64, f64, f64), b: (f64, f64, f64)) -> Option<f64> {
    let (a0, f0, s0) = a;
    let (a1, f1, s1) = b;
    let d1 = s0 + s1 - 3.0 * (f0 - f1) / (a0 - a1);
    let disc = d1 * d1 - s0 * s1;
    if disc < 0.0 {
        return None;
    }
    let d2 = (a1 - a0).signum() * disc.sqrt();
    let t = a1 - (a1 - a0) * (s1 + d2 - d1) / (s1 - s0 + 2.0 * d2);
    t.is_finite().then_some(t)
}

fn zoom(
    trial: &mut impl FnMut(f64, &mut Vec<f64>, &mut Vec<f64>) -> (f64, f64),
    f0: f64,
    slope0: f64,
    mut lo: (f64, f64, f64),
    mut hi: (f64, f64, f64),
    x_out: &mut Vec<f64>,
    g_out: &mut Vec<f64>,
) -> Option<f64> {
    for _ in 0..MAX_LINE_EVALS {
        let (left, right) = (lo.0.min(hi.0), lo.0.max(hi.0));
        let width = right - left;
        if width < 1e-16 * right.abs().max(1.0) {
            break;
        }
        let mut alpha = cubic_min(lo, hi).unwrap_or(0.5 * (left + right));
        // keep the trial safely inside the bracket
        if alpha < left + 0.1 * width || alpha > right - 0.1 * width {
            alpha = 0.5 * (left + right);
        }
        let (fa, sa) = trial(alpha, x_out, g_out);
        if !fa.is_finite() || fa > f0 + C1 * alpha * slope0 || fa >= lo.1 {
            hi = (alpha, fa, sa);
        } else {
            if sa.abs() <= -C2 * slope0 {
                return Some(fa);
            }
            if sa * (hi.0 - lo.0) >= 0.0 {
                hi = lo;
            }
            lo = (alpha, fa, sa);
        }
    }
    // accept the best sufficient-decrease point found, if any
    if lo.0 > 0.0 && lo.1 < f0 {
        let (f, _) = trial(lo.0, x_out, g_out);
        return Some(f);
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn projected_armijo<O: Objective + ?Sized>(
    counter: &mut Counter<'_, O>,
    x: &[f64],
    f0: f64,
    g: &[f64],
    d: &[f64],
    alpha0: f64,
    (lo, hi): (f64, f64),
    x_out: &mut Vec<f64>,
    g_out: &mut Vec<f64>,
) -> Option<f64> {
    let mut alpha = alpha0;
    for _ in 0..MAX_LINE_EVALS {
        x_out
            .iter_mut()
            .zip(x.iter().zip(d))
            .for_each(|(t, (xi, di))| *t = (xi + alpha * di).clamp(lo, hi));
        let f = counter.eval(x_out, g_out);
        let step: f64 = x_out.iter().zip(x).zip(g).map(|((a, b), gi)| (a - b) * gi).sum();
        if f.is_finite() && f <= f0 + C1 * step {
            return Some(f);
        }
        alpha *= 0.5;
    }
    None
}
