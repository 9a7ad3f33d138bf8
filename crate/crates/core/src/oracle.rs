//! Exhaustive reference minimizer for small instances.
//!
//! For each of the `2^n` binary `v` the continuous quartic is minimized over
//! the box `[-v, v]` by projected gradient descent from several starts; the
//! best value over all `v` is returned. The continuous subproblems are not
//! certified, so this is a strong heuristic rather than a proof.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::instance::{PrimalPoint, ProblemInstance};
use crate::linalg::{dot, norm2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub n_starts: usize,
    pub grid_per_dim: usize,
    pub descent_tol: f64,
    pub max_n: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_starts: 32,
            grid_per_dim: 0,
            descent_tol: 1e-10,
            max_n: 12,
            seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_starts == 0 {
            return Err(Error::InvalidConfig("n_starts must be at least 1".into()));
        }
        if self.max_n > 20 {
            return Err(Error::InvalidConfig("max_n must not exceed 20".into()));
        }
        if !(self.descent_tol > 0.0) {
            return Err(Error::InvalidConfig("descent_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subproblem {
    pub v: Vec<f64>,
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub primal: PrimalPoint,
    pub value: f64,
    /// One entry per binary `v`, in lexicographic order of `v`.
    pub subproblems: Vec<Subproblem>,
}

/// Values within this relative distance of the minimum count as ties.
pub const TIE_RTOL: f64 = 1e-9;
const MAX_ITERS: usize = 20_000;

/// Gradient in `x` of the primal objective: `A x - c + (1/2 x^T B x - alpha) B x`.
pub fn primal_gradient_x(inst: &ProblemInstance, x: &[f64]) -> Result<Vec<f64>> {
    check_len("x", inst.n(), x.len())?;
    Ok(gradient(inst, x))
}

fn gradient(inst: &ProblemInstance, x: &[f64]) -> Vec<f64> {
    let ax = inst.a.mul_vec(x);
    let bx = inst.b.mul_vec(x);
    let xi = 0.5 * dot(x, &bx) - inst.alpha;
    (0..x.len()).map(|i| ax[i] - inst.c[i] + xi * bx[i]).collect()
}

fn project(x: &mut [f64], v: &[f64]) {
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi = xi.clamp(-vi, *vi);
    }
}

/// Projected gradient with Barzilai-Borwein steps and backtracking.
fn descend(inst: &ProblemInstance, v: &[f64], start: &[f64], tol: f64) -> (Vec<f64>, f64) {
    let mut x = start.to_vec();
    project(&mut x, v);
    let mut fx = inst.continuous_objective(&x);
    let mut g = gradient(inst, &x);
    let mut step = 1.0 / (1.0 + norm2(&g));
    for _ in 0..MAX_ITERS {
        let mut pg = x.iter().zip(&g).map(|(a, b)| a - b).collect::<Vec<_>>();
        project(&mut pg, v);
        let stationarity = pg.iter().zip(&x).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if stationarity <= tol {
            break;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            project(&mut trial, v);
            let moved: f64 = trial.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
            let ft = inst.continuous_objective(&trial);
            if ft <= fx - 1e-4 / step * moved {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((next, fnext)) = accepted else { break };
        let gnext = gradient(inst, &next);
        let s: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnext.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 { (dot(&s, &s) / sy).clamp(1e-12, 1e12) } else { 1.0 };
        let done = fx - fnext <= f64::EPSILON * (1.0 + fx.abs()) && dot(&s, &s) == 0.0;
        x = next;
        fx = fnext;
        g = gnext;
        if done {
            break;
        }
    }
    (x, fx)
}

fn mask_of(v: &[f64]) -> u64 {
    v.iter().fold(0, |m, &vi| (m << 1) | u64::from(vi > 0.5))
}

fn starts(inst: &ProblemInstance, v: &[f64], cfg: &OracleConfig) -> Vec<Vec<f64>> {
    let n = inst.n();
    let mut out = vec![vec![0.0; n], v.to_vec(), v.iter().map(|x| -x).collect()];
    if let Some(ch) = inst.a.cholesky() {
        out.push(ch.solve(&inst.c));
    } else if let Some(inv) = inst.a.inverse() {
        out.push(crate::dual::mat_vec(&inv, &inst.c));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(mask_of(v));
    for _ in 0..cfg.n_starts {
        out.push(v.iter().map(|&vi| if vi > 0.5 { rng.random_range(-1.0..=1.0) } else { 0.0 }).collect());
    }
    if cfg.grid_per_dim >= 2 {
        let free: Vec<usize> = (0..n).filter(|&i| v[i] > 0.5).collect();
        let k = cfg.grid_per_dim;
        let total = k.checked_pow(free.len() as u32).unwrap_or(usize::MAX);
        for idx in 0..total.min(1 << 16) {
            let mut p = vec![0.0; n];
            let mut rest = idx;
            for &i in &free {
                p[i] = -1.0 + 2.0 * (rest % k) as f64 / (k - 1) as f64;
                rest /= k;
            }
            out.push(p);
        }
    }
    out
}

/// Best local minimum of the primal objective over `[-v, v]`, including the
/// `-f^T v` term.
pub fn minimize_over_box(inst: &ProblemInstance, v: &[f64], cfg: &OracleConfig) -> Result<(Vec<f64>, f64)> {
    cfg.validate()?;
    check_len("v", inst.n(), v.len())?;
    if inst.n() > cfg.max_n {
        return Err(Error::TooLarge {
            n: inst.n(),
            max: cfg.max_n,
        });
    }
    Ok(box_minimum(inst, v, cfg))
}

fn box_minimum(inst: &ProblemInstance, v: &[f64], cfg: &OracleConfig) -> (Vec<f64>, f64) {
    let fixed = dot(&inst.f, v);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in starts(inst, v, cfg) {
        let (x, fx) = descend(inst, v, &s, cfg.descent_tol);
        if best.as_ref().is_none_or(|(_, b)| fx < *b) {
            best = Some((x, fx));
        }
    }
    let (x, fx) = best.expect("at least one start");
    (x, fx - fixed)
}

pub fn brute_force_solve(inst: &ProblemInstance, cfg: &OracleConfig) -> Result<OracleResult> {
    cfg.validate()?;
    let n = inst.n();
    if n > cfg.max_n {
        return Err(Error::TooLarge { n, max: cfg.max_n });
    }
    let subproblems: Vec<Subproblem> = (0..(1u64 << n))
        .into_par_iter()
        .map(|mask| {
            let v: Vec<f64> = (0..n).map(|i| ((mask >> (n - 1 - i)) & 1) as f64).collect();
            let (x, value) = box_minimum(inst, &v, cfg);
            Subproblem { v, x, value }
        })
        .collect();
    let min = subproblems.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
    let best = subproblems
        .iter()
        .find(|s| s.value <= min + TIE_RTOL * (1.0 + min.abs()))
        .expect("nonempty enumeration");
    Ok(OracleResult {
        primal: PrimalPoint::new(best.x.clone(), best.v.clone()),
        value: best.value,
        subproblems,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn gradient_at_zero_is_minus_c() {
        let inst = fixtures::example(8).instance();
        let g = primal_gradient_x(&inst, &[0.0; 5]).unwrap();
        let c: Vec<f64> = inst.c().iter().map(|c| -c).collect();
        assert_eq!(g, c);
    }

    #[test]
    fn gradient_matches_differences() {
        let inst = fixtures::example(7).instance();
        let x = [0.3, -0.7, 0.45];
        let g = primal_gradient_x(&inst, &x).unwrap();
        for i in 0..3 {
            let (mut p, mut m) = (x, x);
            p[i] += 1e-6;
            m[i] -= 1e-6;
            let fd = (inst.continuous_objective(&p) - inst.continuous_objective(&m)) / 2e-6;
            assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn box_minimum_cases() {
        let cfg = OracleConfig::default();
        let ex1 = fixtures::example(1).instance();
        let (x, val) = minimize_over_box(&ex1, &[0.0; 5], &cfg).unwrap();
        assert_eq!(x, vec![0.0; 5]);
        assert_eq!(val, 50.0);

        let (x, val) = minimize_over_box(&ex1, &[1.0; 5], &cfg).unwrap();
        assert_eq!(x, vec![-1., -1., 1., 1., -1.]);
        assert!((val + 75.875).abs() < 1e-9);

        let ex8 = fixtures::example(8).instance();
        let (_, val) = minimize_over_box(&ex8, &[1., 0., 1., 1., 1.], &cfg).unwrap();
        assert!((val + 32.8777).abs() < 1e-3);
    }

    #[test]
    fn too_large_is_rejected() {
        let inst = ProblemInstance::diagonal(vec![1.; 13], vec![1.; 13], 1.0, vec![1.; 13], vec![0.; 13]).unwrap();
        assert!(matches!(
            brute_force_solve(&inst, &OracleConfig::default()),
            Err(Error::TooLarge { n: 13, max: 12 })
        ));
    }

    #[test]
    fn reference_optima() {
        let cfg = OracleConfig::default();
        let r = brute_force_solve(&fixtures::example(1).instance(), &cfg).unwrap();
        assert!((r.value + 75.875).abs() < 1e-4);
        assert_eq!(r.primal.v, vec![1.; 5]);
        let r = brute_force_solve(&fixtures::example(5).instance(), &cfg).unwrap();
        assert!((r.value - 32.5).abs() < 1e-4);
        assert_eq!(r.primal.v, vec![1., 0., 1., 1., 0.]);
        let r = brute_force_solve(&fixtures::example(7).instance(), &cfg).unwrap();
        assert!((r.value + 33.875).abs() < 1e-4);
        assert_eq!(r.primal.v, vec![1.; 3]);
    }
}
