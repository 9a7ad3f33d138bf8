//! Interior-point maximization of the reduced dual and certification.
//!
//! The kinked term `-sum (f_i + sigma1_i)^+` is handled through epigraph
//! variables `u_i >= max(0, f_i + sigma1_i)`, which gives the smooth concave
//! barrier objective
//!
//! ```text
//! F_mu = -1/2 c^T G^-1 c - 1/2 s^2 - alpha s - sum u
//!        + mu [ log(s + alpha) + sum log sigma1 + sum log u
//!               + sum log(u - f - sigma1) + log det G ]
//! ```
//!
//! over `(s, sigma1, u)`. Damped Newton steps follow the central path as
//! `mu -> 0`. The last iterate is then polished by an active-set Newton
//! method on the exact reduced dual, which pins coordinates that sit on the
//! bound `sigma1_i = 0` or on a kink `f_i + sigma1_i = 0`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dual::{
    build_g, mat_vec, recover_primal, reduced_dual_value, sigma2_star, in_s_reduced,
    ReducedDualPoint,
};
use crate::error::{Error, Result};
use crate::instance::{check_binary_feasible, evaluate_primal, validate_instance, PrimalPoint, ProblemInstance, FEAS_TOL};
use crate::linalg::{dot, eigen_summary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grad_tol: f64,
    pub barrier_mu0: f64,
    pub barrier_shrink: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub gap_tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-9,
            barrier_mu0: 1.0,
            barrier_shrink: 0.2,
            max_outer: 40,
            max_inner: 200,
            gap_tol: 1e-6,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.grad_tol > 0.0) {
            return bad("grad_tol must be positive");
        }
        if !(self.barrier_mu0 > 0.0) {
            return bad("barrier_mu0 must be positive");
        }
        if !(self.barrier_shrink > 0.0 && self.barrier_shrink < 1.0) {
            return bad("barrier_shrink must lie in (0, 1)");
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return bad("iteration caps must be at least 1");
        }
        if !(self.gap_tol > 0.0) {
            return bad("gap_tol must be positive");
        }
        Ok(())
    }
}

/// Residuals of the optimality system at a dual point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub xi: f64,
    pub eps1: Vec<f64>,
    pub eps2: Vec<f64>,
    pub comp1: f64,
    pub comp2: f64,
    pub stationarity_sigma0: f64,
    pub max_violation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certificate {
    GlobalOptimal,
    KKTOnly,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniquenessFlags {
    #[serde(rename = "A_B_diagonal")]
    pub a_b_diagonal: bool,
    pub c_nowhere_zero: bool,
}

impl UniquenessFlags {
    /// Both structural conditions for a unique global minimizer hold.
    pub fn unique(&self) -> bool {
        self.a_b_diagonal && self.c_nowhere_zero
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub dual: ReducedDualPoint,
    pub sigma2: Vec<f64>,
    pub dual_value: f64,
    pub primal: PrimalPoint,
    pub primal_value: f64,
    pub gap: f64,
    pub lambda_min_g: f64,
    pub kkt: KktReport,
    pub certificate: Certificate,
    pub uniqueness_flags: UniquenessFlags,
    pub iterations: usize,
    pub converged: bool,
}

/// One accepted step. Barrier steps carry `mu > 0` and barrier objective
/// values; polish steps carry `mu == 0` and reduced dual values.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    pub outer: usize,
    pub mu: f64,
    pub before: f64,
    pub after: f64,
    pub newton: bool,
    pub point: ReducedDualPoint,
}

pub trait SolveObserver {
    fn accepted(&mut self, record: &IterateRecord);
}

impl<F: FnMut(&IterateRecord)> SolveObserver for F {
    fn accepted(&mut self, record: &IterateRecord) {
        self(record)
    }
}

struct NoObserver;

impl SolveObserver for NoObserver {
    fn accepted(&mut self, _: &IterateRecord) {}
}

const MU_FLOOR: f64 = 1e-10;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const FRACTION_TO_BOUNDARY: f64 = 0.99;
const INIT_LAMBDA_MIN: f64 = 0.1;
const ACTIVE_TOL: f64 = 1e-7;
const KINK_OFFSET: f64 = 1e-9;
const ACCEPT_STATIONARITY: f64 = 1e-6;

pub fn uniqueness_flags(inst: &ProblemInstance) -> UniquenessFlags {
    UniquenessFlags {
        a_b_diagonal: inst.is_diagonal(),
        c_nowhere_zero: inst.c.iter().all(|c| c.abs() > 1e-12),
    }
}

pub fn verify_kkt(inst: &ProblemInstance, q: &ReducedDualPoint) -> Result<KktReport> {
    let p = recover_primal(inst, q)?;
    let sigma2 = sigma2_star(inst, q)?;
    Ok(kkt_from(inst, q, &sigma2, &p))
}

fn kkt_from(inst: &ProblemInstance, q: &ReducedDualPoint, sigma2: &[f64], p: &PrimalPoint) -> KktReport {
    let xi = 0.5 * inst.b.quad_form(&p.x) - inst.alpha;
    let eps1: Vec<f64> = p.x.iter().zip(&p.v).map(|(x, v)| x * x - v).collect();
    let eps2: Vec<f64> = p.v.iter().map(|v| v * v - v).collect();
    let comp1 = dot(&q.sigma1, &eps1);
    let comp2 = dot(sigma2, &eps2);
    let stationarity_sigma0 = (xi - q.sigma0).abs();
    let max_violation = eps1
        .iter()
        .map(|e| e.max(0.0))
        .chain(eps2.iter().map(|e| e.abs()))
        .fold(comp1.abs().max(comp2.abs()).max(stationarity_sigma0), f64::max);
    KktReport {
        xi,
        eps1,
        eps2,
        comp1,
        comp2,
        stationarity_sigma0,
        max_violation,
    }
}

pub fn solve(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveReport> {
    solve_with_observer(inst, cfg, &mut NoObserver)
}

pub fn solve_with_observer(
    inst: &ProblemInstance,
    cfg: &SolverConfig,
    observer: &mut dyn SolveObserver,
) -> Result<SolveReport> {
    cfg.validate()?;
    let violations = validate_instance(inst);
    if !violations.is_empty() {
        return Err(Error::InvalidInstance(violations));
    }
    let n = inst.n();
    let mut z = initial_point(inst)?;
    let mut mu = cfg.barrier_mu0;
    let mut iterations = 0;
    let mut path_ok = true;
    let mut last_mu = mu;

    for outer in 0..cfg.max_outer {
        let mut centered = false;
        for _ in 0..cfg.max_inner {
            let Some(cur) = barrier_eval(inst, &z, mu) else {
                path_ok = false;
                break;
            };
            match newton_step(inst, &z, mu, &cur) {
                StepOutcome::Centered => {
                    centered = true;
                    break;
                }
                StepOutcome::Stalled => {
                    centered = true;
                    break;
                }
                StepOutcome::Moved { next, value, newton } => {
                    iterations += 1;
                    observer.accepted(&IterateRecord {
                        outer,
                        mu,
                        before: cur.value,
                        after: value,
                        newton,
                        point: reduced_of(&next, n),
                    });
                    z = next;
                }
            }
        }
        path_ok &= centered;
        last_mu = mu;
        if mu < MU_FLOOR {
            break;
        }
        mu *= cfg.barrier_shrink;
    }
    let reached_floor = last_mu < MU_FLOOR;

    let barrier_q = reduced_of(&z, n);
    let multipliers: Vec<f64> = (0..n)
        .map(|i| {
            let r = z[1 + n + i] - inst.f[i] - z[1 + i];
            (last_mu / r).clamp(0.0, 1.0)
        })
        .collect();

    let mut q = barrier_q.clone();
    if let Some((polished, steps)) = polish(inst, &barrier_q, &multipliers, cfg, observer) {
        iterations += steps;
        let base = reduced_dual_value(inst, &barrier_q).ok();
        let new = reduced_dual_value(inst, &polished)?;
        if base.is_none_or(|b| new >= b - 1e-12 * (1.0 + b.abs())) {
            q = polished;
        }
    }
    if !in_s_reduced(inst, &q) {
        q = snap_ties(inst, &q, &multipliers);
    }
    let stationarity = projected_gradient_norm(inst, &q);
    let converged = path_ok && reached_floor && stationarity.is_some_and(|s| s <= ACCEPT_STATIONARITY);
    finish(inst, cfg, q, iterations, converged)
}

fn finish(
    inst: &ProblemInstance,
    cfg: &SolverConfig,
    q: ReducedDualPoint,
    iterations: usize,
    converged: bool,
) -> Result<SolveReport> {
    let dual_value = reduced_dual_value(inst, &q)?;
    let sigma2 = sigma2_star(inst, &q)?;
    let raw = recover_primal(inst, &q)?;
    let kkt = kkt_from(inst, &q, &sigma2, &raw);
    let primal = PrimalPoint::new(
        raw.x.iter().zip(&raw.v).map(|(x, v)| x.clamp(-v, *v)).collect(),
        raw.v.clone(),
    );
    let primal_value = evaluate_primal(inst, &primal)?;
    let gap = (primal_value - dual_value).abs();
    let lambda_min_g = eigen_summary(&build_g(inst, &q)?).lambda_min;
    let certified = gap <= cfg.gap_tol
        && lambda_min_g > 0.0
        && in_s_reduced(inst, &q)
        && check_binary_feasible(&primal, FEAS_TOL);
    let certificate = if certified {
        Certificate::GlobalOptimal
    } else if converged {
        Certificate::KKTOnly
    } else {
        Certificate::Failed
    };
    Ok(SolveReport {
        dual: q,
        sigma2,
        dual_value,
        primal,
        primal_value,
        gap,
        lambda_min_g,
        kkt,
        certificate,
        uniqueness_flags: uniqueness_flags(inst),
        iterations,
        converged,
    })
}

fn reduced_of(z: &[f64], n: usize) -> ReducedDualPoint {
    ReducedDualPoint::new(z[0], z[1..=n].to_vec())
}

fn initial_point(inst: &ProblemInstance) -> Result<Vec<f64>> {
    let n = inst.n();
    let half_trace = 0.5 * inst.b.diag().iter().sum::<f64>();
    let sigma0 = (half_trace - inst.alpha).max(0.0).max(-inst.alpha + 0.5);
    let mut s = 0.5;
    for _ in 0..200 {
        let g = inst.a.affine(sigma0, &inst.b, &vec![2.0 * s; n]);
        if eigen_summary(&g).lambda_min >= INIT_LAMBDA_MIN {
            let mut z = Vec::with_capacity(2 * n + 1);
            z.push(sigma0);
            z.extend(std::iter::repeat_n(s, n));
            z.extend(inst.f.iter().map(|f| (f + s).max(0.0) + 1.0));
            return Ok(z);
        }
        s *= 2.0;
        if !s.is_finite() {
            break;
        }
    }
    Err(Error::NoInteriorPoint)
}

struct BarrierEval {
    value: f64,
    grad: Vec<f64>,
    hess: DMatrix<f64>,
}

/// Barrier objective with gradient and Hessian, or `None` outside the domain.
fn barrier_eval(inst: &ProblemInstance, z: &[f64], mu: f64) -> Option<BarrierEval> {
    let value = barrier_value(inst, z, mu)?;
    let n = inst.n();
    let s = z[0];
    let sig = &z[1..=n];
    let u = &z[1 + n..];
    let q = ReducedDualPoint::new(s, sig.to_vec());
    let g = build_g(inst, &q).ok()?;
    let ginv = g.cholesky()?.inverse();
    let x = mat_vec(&ginv, &inst.c);
    let bx = inst.b.mul_vec(&x);
    let gbx = mat_vec(&ginv, &bx);
    let b = inst.b.to_dense();
    let gb = &ginv * &b;
    let gbg = &gb * &ginv;
    let r: Vec<f64> = (0..n).map(|i| u[i] - inst.f[i] - sig[i]).collect();
    let sa = s + inst.alpha;

    let dim = 2 * n + 1;
    let mut grad = vec![0.0; dim];
    grad[0] = 0.5 * dot(&x, &bx) - s - inst.alpha + mu / sa + mu * gb.trace();
    for i in 0..n {
        grad[1 + i] = x[i] * x[i] + mu / sig[i] - mu / r[i] + 2.0 * mu * ginv[(i, i)];
        grad[1 + n + i] = -1.0 + mu / u[i] + mu / r[i];
    }

    let mut hess = DMatrix::<f64>::zeros(dim, dim);
    hess[(0, 0)] = -1.0 - dot(&bx, &gbx) - mu / (sa * sa) - mu * (&gb * &gb).trace();
    for i in 0..n {
        let v = -2.0 * x[i] * gbx[i] - 2.0 * mu * gbg[(i, i)];
        hess[(0, 1 + i)] = v;
        hess[(1 + i, 0)] = v;
        for j in 0..n {
            hess[(1 + i, 1 + j)] = -4.0 * x[i] * x[j] * ginv[(i, j)] - 4.0 * mu * ginv[(i, j)].powi(2);
        }
        let rr = mu / (r[i] * r[i]);
        hess[(1 + i, 1 + i)] -= mu / (sig[i] * sig[i]) + rr;
        hess[(1 + i, 1 + n + i)] = rr;
        hess[(1 + n + i, 1 + i)] = rr;
        hess[(1 + n + i, 1 + n + i)] = -mu / (u[i] * u[i]) - rr;
    }
    Some(BarrierEval { value, grad, hess })
}

fn barrier_value(inst: &ProblemInstance, z: &[f64], mu: f64) -> Option<f64> {
    let n = inst.n();
    let s = z[0];
    let sig = &z[1..=n];
    let u = &z[1 + n..];
    let sa = s + inst.alpha;
    if !(sa > 0.0) || sig.iter().any(|v| !(*v > 0.0)) || u.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let mut logs = sa.ln();
    for i in 0..n {
        let r = u[i] - inst.f[i] - sig[i];
        if !(r > 0.0) {
            return None;
        }
        logs += sig[i].ln() + u[i].ln() + r.ln();
    }
    let g = build_g(inst, &ReducedDualPoint::new(s, sig.to_vec())).ok()?;
    let ch = g.cholesky()?;
    let x = ch.solve(&inst.c);
    let value = -0.5 * dot(&inst.c, &x) - 0.5 * s * s - inst.alpha * s - u.iter().sum::<f64>()
        + mu * (logs + ch.log_det());
    value.is_finite().then_some(value)
}

enum StepOutcome {
    Centered,
    Stalled,
    Moved { next: Vec<f64>, value: f64, newton: bool },
}

fn newton_step(inst: &ProblemInstance, z: &[f64], mu: f64, cur: &BarrierEval) -> StepOutcome {
    let neg_h = -cur.hess.clone();
    let g = nalgebra::DVector::from_column_slice(&cur.grad);
    let newton_dir = neg_h.cholesky().map(|ch| ch.solve(&g));
    if let Some(d) = &newton_dir {
        let decrement = g.dot(d);
        if 0.5 * decrement <= (1e-3 * mu).max(1e-15 * (1.0 + cur.value.abs())) {
            return StepOutcome::Centered;
        }
    }
    let candidates = newton_dir
        .map(|d| (d.as_slice().to_vec(), true))
        .into_iter()
        .chain(std::iter::once((cur.grad.clone(), false)));
    for (d, newton) in candidates {
        if let Some((next, value)) = line_search(inst, z, mu, cur, &d) {
            return StepOutcome::Moved { next, value, newton };
        }
    }
    StepOutcome::Stalled
}

fn line_search(
    inst: &ProblemInstance,
    z: &[f64],
    mu: f64,
    cur: &BarrierEval,
    d: &[f64],
) -> Option<(Vec<f64>, f64)> {
    let n = inst.n();
    let slope = dot(&cur.grad, d);
    if !(slope > 0.0) {
        return None;
    }
    // largest step keeping the simple bounds strictly positive
    let mut limit = f64::INFINITY;
    let mut bound = |val: f64, rate: f64| {
        if rate < 0.0 {
            limit = limit.min(val / -rate);
        }
    };
    bound(z[0] + inst.alpha, d[0]);
    for i in 0..n {
        bound(z[1 + i], d[1 + i]);
        bound(z[1 + n + i], d[1 + n + i]);
        bound(z[1 + n + i] - inst.f[i] - z[1 + i], d[1 + n + i] - d[1 + i]);
    }
    let mut step = (FRACTION_TO_BOUNDARY * limit).min(1.0);
    for _ in 0..MAX_HALVINGS {
        let trial: Vec<f64> = z.iter().zip(d).map(|(a, b)| a + step * b).collect();
        if let Some(v) = barrier_value(inst, &trial, mu) {
            if v >= cur.value + ARMIJO * step * slope {
                return Some((trial, v));
            }
        }
        step *= 0.5;
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Activity {
    Free,
    Zero,
    /// On the kink; `true` selects the `f + sigma1 > 0` side.
    Kink(bool),
}

fn kink_sigma(f: f64, positive: bool) -> f64 {
    let off = KINK_OFFSET * (1.0 + f.abs());
    if positive || -f - off < 0.0 {
        -f + off
    } else {
        -f - off
    }
}

/// Exact-function state at a point: `x = G^-1 c`, `G^-1`, and whether `G > 0`.
struct Local {
    x: Vec<f64>,
    ginv: DMatrix<f64>,
}

fn local(inst: &ProblemInstance, q: &ReducedDualPoint) -> Option<Local> {
    if !(q.sigma0 + inst.alpha > 0.0) {
        return None;
    }
    let ginv = build_g(inst, q).ok()?.cholesky()?.inverse();
    let x = mat_vec(&ginv, &inst.c);
    Some(Local { x, ginv })
}

/// Value of the smooth piece of the reduced dual selected by `signs`.
fn piece_value(inst: &ProblemInstance, q: &ReducedDualPoint, signs: &[bool]) -> Option<f64> {
    if !(q.sigma0 + inst.alpha > 0.0) || q.sigma1.iter().any(|s| *s < 0.0) {
        return None;
    }
    let ch = build_g(inst, q).ok()?.cholesky()?;
    let x = ch.solve(&inst.c);
    let positive: f64 = (0..inst.n())
        .filter(|&i| signs[i])
        .map(|i| inst.f[i] + q.sigma1[i])
        .sum();
    let s = q.sigma0;
    Some(-0.5 * dot(&inst.c, &x) - positive - 0.5 * s * s - inst.alpha * s)
}

fn polish(
    inst: &ProblemInstance,
    start: &ReducedDualPoint,
    multipliers: &[f64],
    cfg: &SolverConfig,
    observer: &mut dyn SolveObserver,
) -> Option<(ReducedDualPoint, usize)> {
    let n = inst.n();
    let mut q = start.clone();
    let mut act: Vec<Activity> = (0..n)
        .map(|i| {
            let t = inst.f[i] + q.sigma1[i];
            if t.abs() <= ACTIVE_TOL && inst.f[i] <= 0.0 {
                Activity::Kink(multipliers[i] >= 0.5)
            } else if q.sigma1[i] <= ACTIVE_TOL {
                Activity::Zero
            } else {
                Activity::Free
            }
        })
        .collect();
    apply_activity(inst, &mut q, &act);
    local(inst, &q)?;
    let mut steps = 0;

    for _round in 0..(2 * n + 4) {
        let signs: Vec<bool> = (0..n).map(|i| inst.f[i] + q.sigma1[i] > 0.0).collect();
        let free: Vec<usize> = (0..n).filter(|&i| act[i] == Activity::Free).collect();
        for _ in 0..100 {
            let loc = local(inst, &q)?;
            let x = &loc.x;
            let bx = inst.b.mul_vec(x);
            let gbx = mat_vec(&loc.ginv, &bx);
            let k = free.len() + 1;
            let mut g = vec![0.0; k];
            g[0] = 0.5 * dot(x, &bx) - q.sigma0 - inst.alpha;
            for (a, &i) in free.iter().enumerate() {
                g[1 + a] = x[i] * x[i] - if signs[i] { 1.0 } else { 0.0 };
            }
            let refining = g.iter().all(|v| v.abs() <= cfg.grad_tol);
            let mut h = DMatrix::<f64>::zeros(k, k);
            h[(0, 0)] = 1.0 + dot(&bx, &gbx);
            for (a, &i) in free.iter().enumerate() {
                h[(0, 1 + a)] = 2.0 * x[i] * gbx[i];
                h[(1 + a, 0)] = h[(0, 1 + a)];
                for (b, &j) in free.iter().enumerate() {
                    h[(1 + a, 1 + b)] = 4.0 * x[i] * x[j] * loc.ginv[(i, j)];
                }
            }
            let scale = (0..k).fold(0.0_f64, |m, i| m.max(h[(i, i)].abs()));
            for i in 0..k {
                h[(i, i)] += 1e-12 * (1.0 + scale);
            }
            let d = h.cholesky()?.solve(&nalgebra::DVector::from_column_slice(&g));
            let size = (0..k).fold(0.0_f64, |m, i| m.max(d[i].abs()));
            let magnitude = free.iter().fold(q.sigma0.abs(), |m, &i| m.max(q.sigma1[i].abs()));
            if size <= 1e-14 * (1.0 + magnitude) {
                break;
            }

            // step to the first sign change or zero crossing among free coordinates
            let mut limit = f64::INFINITY;
            let mut blocker = None;
            for (a, &i) in free.iter().enumerate() {
                let di = d[1 + a];
                let t = inst.f[i] + q.sigma1[i];
                let mut consider = |dist: f64, kind: Activity| {
                    if dist < limit {
                        limit = dist;
                        blocker = Some((i, kind));
                    }
                };
                if di < 0.0 {
                    consider(q.sigma1[i] / -di, Activity::Zero);
                    if t > 0.0 {
                        consider(t / -di, Activity::Kink(true));
                    }
                } else if di > 0.0 && t < 0.0 {
                    consider(-t / di, Activity::Kink(false));
                }
            }
            let at_limit = limit <= 1.0;
            let mut step = limit.min(1.0);
            let base = piece_value(inst, &q, &signs)?;
            let slope = dot(&g, d.as_slice());
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let mut trial = q.clone();
                trial.sigma0 += step * d[0];
                for (a, &i) in free.iter().enumerate() {
                    trial.sigma1[i] = (trial.sigma1[i] + step * d[1 + a]).max(0.0);
                }
                if let Some(v) = piece_value(inst, &trial, &signs) {
                    let flat_ok = refining && step == 1.0 && v >= base - 4.0 * f64::EPSILON * base.abs();
                    if v >= base + ARMIJO * step * slope || flat_ok {
                        accepted = Some((trial, v, step));
                        break;
                    }
                }
                step *= 0.5;
            }
            let Some((trial, v, taken)) = accepted else { break };
            steps += 1;
            observer.accepted(&IterateRecord {
                outer: 0,
                mu: 0.0,
                before: base,
                after: v,
                newton: true,
                point: trial.clone(),
            });
            q = trial;
            if at_limit && taken == limit {
                let (i, kind) = blocker.expect("finite limit has a blocking coordinate");
                act[i] = match kind {
                    Activity::Kink(_) => {
                        let x = local(inst, &q)?.x[i];
                        Activity::Kink(x * x >= 0.5)
                    }
                    other => other,
                };
                apply_activity(inst, &mut q, &act);
                break;
            }
        }

        // release bounds whose multipliers have the wrong sign
        let loc = local(inst, &q)?;
        let mut changed = false;
        for i in 0..n {
            let xx = loc.x[i] * loc.x[i];
            match act[i] {
                Activity::Zero => {
                    let v = if inst.f[i] > 0.0 { 1.0 } else { 0.0 };
                    if xx - v > cfg.grad_tol {
                        act[i] = Activity::Free;
                        if inst.f[i] == 0.0 {
                            q.sigma1[i] = kink_sigma(0.0, true);
                        }
                        changed = true;
                    }
                }
                Activity::Kink(side) => {
                    if xx - 1.0 > cfg.grad_tol {
                        act[i] = Activity::Free;
                        q.sigma1[i] = kink_sigma(inst.f[i], true);
                        changed = true;
                    } else if side != (xx >= 0.5) {
                        act[i] = Activity::Kink(xx >= 0.5);
                        q.sigma1[i] = kink_sigma(inst.f[i], xx >= 0.5);
                    }
                }
                Activity::Free => {}
            }
        }
        if !changed && free_stationary(inst, &q, &act, cfg.grad_tol) {
            break;
        }
    }
    local(inst, &q)?;
    Some((q, steps))
}

fn free_stationary(inst: &ProblemInstance, q: &ReducedDualPoint, act: &[Activity], tol: f64) -> bool {
    let Some(loc) = local(inst, q) else { return false };
    let x = &loc.x;
    let g0 = 0.5 * inst.b.quad_form(x) - q.sigma0 - inst.alpha;
    g0.abs() <= tol
        && (0..inst.n()).filter(|&i| act[i] == Activity::Free).all(|i| {
            let v = if inst.f[i] + q.sigma1[i] > 0.0 { 1.0 } else { 0.0 };
            (x[i] * x[i] - v).abs() <= tol
        })
}

fn apply_activity(inst: &ProblemInstance, q: &mut ReducedDualPoint, act: &[Activity]) {
    for (i, a) in act.iter().enumerate() {
        match a {
            Activity::Zero => q.sigma1[i] = 0.0,
            Activity::Kink(side) => q.sigma1[i] = kink_sigma(inst.f[i], *side),
            Activity::Free => {}
        }
    }
}

/// Moves any coordinate lying on a kink off it, onto the side named by
/// its barrier multiplier.
fn snap_ties(inst: &ProblemInstance, q: &ReducedDualPoint, multipliers: &[f64]) -> ReducedDualPoint {
    let mut out = q.clone();
    for i in 0..inst.n() {
        if (inst.f[i] + out.sigma1[i]).abs() <= 1e-12 {
            out.sigma1[i] = kink_sigma(inst.f[i], multipliers[i] >= 0.5);
        }
    }
    out
}

/// Infinity norm of the projected (sub)gradient of the reduced dual, with
/// `sigma1_i = 0` and `f_i + sigma1_i = 0` treated as active when within
/// a small tolerance.
pub(crate) fn projected_gradient_norm(inst: &ProblemInstance, q: &ReducedDualPoint) -> Option<f64> {
    let loc = local(inst, q)?;
    let x = &loc.x;
    let mut worst = (0.5 * inst.b.quad_form(x) - q.sigma0 - inst.alpha).abs();
    for i in 0..inst.n() {
        let t = inst.f[i] + q.sigma1[i];
        let xx = x[i] * x[i];
        let near_kink = t.abs() <= 1e-8 * (1.0 + inst.f[i].abs());
        let r = if near_kink {
            (xx - 1.0).max(0.0)
        } else {
            let g = xx - if t > 0.0 { 1.0 } else { 0.0 };
            if q.sigma1[i] <= ACTIVE_TOL {
                g.max(0.0)
            } else {
                g.abs()
            }
        };
        worst = worst.max(r);
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn default_config_is_valid() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            barrier_shrink: 1.0,
            ..SolverConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn barrier_gradient_matches_differences() {
        let inst = fixtures::example(7).instance();
        let z = initial_point(&inst).unwrap();
        let mu = 0.3;
        let e = barrier_eval(&inst, &z, mu).unwrap();
        let h = 1e-6;
        for k in 0..z.len() {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[k] += h;
            zm[k] -= h;
            let fd = (barrier_value(&inst, &zp, mu).unwrap() - barrier_value(&inst, &zm, mu).unwrap()) / (2.0 * h);
            assert!((fd - e.grad[k]).abs() <= 1e-5 * (1.0 + fd.abs()), "grad {k}: {fd} vs {}", e.grad[k]);
            let gp = barrier_eval(&inst, &zp, mu).unwrap().grad;
            let gm = barrier_eval(&inst, &zm, mu).unwrap().grad;
            for j in 0..z.len() {
                let fd = (gp[j] - gm[j]) / (2.0 * h);
                assert!((fd - e.hess[(j, k)]).abs() <= 1e-5 * (1.0 + fd.abs()), "hess ({j},{k})");
            }
        }
    }

    #[test]
    fn initial_point_is_interior() {
        for ex in fixtures::all() {
            let inst = ex.instance();
            let z = initial_point(&inst).unwrap();
            assert!(barrier_value(&inst, &z, 1.0).is_some(), "example {}", ex.id);
        }
    }

    #[test]
    fn solves_example_1_exactly() {
        let inst = fixtures::example(1).instance();
        let r = solve(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(r.certificate, Certificate::GlobalOptimal);
        assert!((r.dual_value + 75.875).abs() < 1e-9);
        assert!(r.gap < 1e-8);
        assert!((r.lambda_min_g - 5.0).abs() < 1e-9);
    }

    #[test]
    fn kkt_report_at_known_optima() {
        let ex1 = fixtures::example(1).instance();
        let q = ReducedDualPoint::new(-3.5, vec![7., 12., 6.25, 9., 5.]);
        let k = verify_kkt(&ex1, &q).unwrap();
        assert!(k.max_violation <= 1e-8);

        let ex2 = fixtures::example(2).instance();
        let q = ReducedDualPoint::new(-2.5, vec![3.75, 4.75, 6., 6.75, 1.75, 7.75, 5.75, 8.25]);
        let k = verify_kkt(&ex2, &q).unwrap();
        assert!(k.max_violation <= 1e-8);
        assert_eq!(k.comp2, 0.0);

        let q = ReducedDualPoint::new(-1.0, vec![10.; 8]);
        let k = verify_kkt(&ex2, &q).unwrap();
        let x = recover_primal(&ex2, &q).unwrap().x;
        let bx: f64 = (0..8).map(|i| ex2.b().get(i, i) * x[i] * x[i]).sum();
        let direct = (0.5 * bx - q.sigma0 - ex2.alpha()).abs();
        assert!(k.stationarity_sigma0 > 0.0);
        assert!((k.stationarity_sigma0 - direct).abs() < 1e-12);
    }

    #[test]
    fn flags() {
        let f = |k| uniqueness_flags(&fixtures::example(k).instance());
        assert_eq!(f(1), UniquenessFlags { a_b_diagonal: true, c_nowhere_zero: true });
        assert_eq!(f(5), UniquenessFlags { a_b_diagonal: true, c_nowhere_zero: false });
        assert_eq!(f(7), UniquenessFlags { a_b_diagonal: false, c_nowhere_zero: true });
    }
}
