//! Closed-form analysis of diagonal instances.
//!
//! With `A = Diag(a)` and `B = Diag(b)` every dual critical point with
//! `|x_i| = 1` has `sigma0 = 1/2 sum b - alpha` and, per coordinate, one of
//! two branches
//!
//! ```text
//! M_i = { -1/2 (a_i + sigma0 b_i + c_i),  -1/2 (a_i + sigma0 b_i - c_i) }
//! N_i = f_i + M_i
//! ```
//!
//! for `(sigma1_i, sigma2_i)`. The plus branch gives `G_ii = -c_i`, the minus
//! branch `G_ii = c_i`, so only the branch with the larger `M_i` can make `G`
//! positive definite.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::DualPoint;
use crate::error::{Error, Result};
use crate::instance::{evaluate_primal, PrimalPoint, ProblemInstance};
use crate::linalg::PD_PIVOT_RTOL;

pub const MAX_ENUMERATION_N: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoupledCandidates {
    pub sigma0_star: f64,
    /// `(plus branch, minus branch)` per coordinate.
    #[serde(rename = "M")]
    pub m: Vec<[f64; 2]>,
    #[serde(rename = "N")]
    pub n: Vec<[f64; 2]>,
}

impl DecoupledCandidates {
    /// Branch index per coordinate for `mask`; coordinate 0 is the most
    /// significant bit so integer order is lexicographic branch order.
    pub fn branches(&self, mask: u32) -> Vec<usize> {
        let n = self.m.len();
        (0..n).map(|i| ((mask >> (n - 1 - i)) & 1) as usize).collect()
    }

    pub fn dual_point(&self, mask: u32) -> DualPoint {
        let br = self.branches(mask);
        DualPoint {
            sigma0: self.sigma0_star,
            sigma1: br.iter().enumerate().map(|(i, &b)| self.m[i][b]).collect(),
            sigma2: br.iter().enumerate().map(|(i, &b)| self.n[i][b]).collect(),
        }
    }

    /// Whether the closed-form solution applies: `max M_i > 0` and
    /// `max N_i > 0` for every `i`.
    pub fn theorem5_holds(&self) -> bool {
        self.m.iter().zip(&self.n).all(|(m, n)| m[0].max(m[1]) > 0.0 && n[0].max(n[1]) > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoupledSolution {
    pub dual: DualPoint,
    pub primal: PrimalPoint,
    pub value: f64,
}

/// One enumerated critical point; materialize it with
/// [`DecoupledCandidates::dual_point`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub mask: u32,
    /// Dual value, absent when some `sigma2_i <= 0`.
    pub value: Option<f64>,
    pub in_s_plus: bool,
}

fn require_decoupled(inst: &ProblemInstance) -> Result<()> {
    if !inst.is_diagonal() {
        return Err(Error::NotDiagonal);
    }
    if let Some(index) = inst.c.iter().position(|c| c.abs() <= 1e-12) {
        return Err(Error::ZeroC { index });
    }
    Ok(())
}

pub fn decoupled_candidates(inst: &ProblemInstance) -> Result<DecoupledCandidates> {
    require_decoupled(inst)?;
    let a = inst.a.diag();
    let b = inst.b.diag();
    let s = 0.5 * b.iter().sum::<f64>() - inst.alpha;
    let mut m = Vec::with_capacity(inst.n());
    let mut n = Vec::with_capacity(inst.n());
    for i in 0..inst.n() {
        let base = a[i] + s * b[i];
        let pair = [-0.5 * (base + inst.c[i]), -0.5 * (base - inst.c[i])];
        n.push([inst.f[i] + pair[0], inst.f[i] + pair[1]]);
        m.push(pair);
    }
    Ok(DecoupledCandidates {
        sigma0_star: s,
        m,
        n,
    })
}

pub fn theorem5_solve(inst: &ProblemInstance) -> Result<Option<DecoupledSolution>> {
    let cand = decoupled_candidates(inst)?;
    if !cand.theorem5_holds() {
        return Ok(None);
    }
    let dual = DualPoint {
        sigma0: cand.sigma0_star,
        sigma1: cand.m.iter().map(|m| m[0].max(m[1])).collect(),
        sigma2: cand.n.iter().map(|n| n[0].max(n[1])).collect(),
    };
    let primal = PrimalPoint::new(inst.c.iter().map(|c| c.signum()).collect(), vec![1.0; inst.n()]);
    let value = evaluate_primal(inst, &primal)?;
    Ok(Some(DecoupledSolution { dual, primal, value }))
}

/// All `2^n` branch combinations, sorted by value descending (absent values
/// last), ties by lexicographic branch order.
pub fn enumerate_critical_points(inst: &ProblemInstance) -> Result<(DecoupledCandidates, Vec<CriticalPoint>)> {
    let cand = decoupled_candidates(inst)?;
    let n = inst.n();
    if n > MAX_ENUMERATION_N {
        return Err(Error::TooLarge {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    let a = inst.a.diag();
    let b = inst.b.diag();
    let s = cand.sigma0_star;
    let constant = -0.5 * s * s - inst.alpha * s;
    // per coordinate and branch: (G_ii, value contribution, sigma1 >= 0 and sigma2 > 0)
    let parts: Vec<[(f64, Option<f64>, bool); 2]> = (0..n)
        .map(|i| {
            let one = |br: usize| {
                let (s1, s2) = (cand.m[i][br], cand.n[i][br]);
                let g = a[i] + s * b[i] + 2.0 * s1;
                let contrib = (s2 > 0.0).then(|| {
                    -0.5 * inst.c[i] * inst.c[i] / g - 0.25 * (inst.f[i] + s1 + s2).powi(2) / s2
                });
                (g, contrib, s1 >= 0.0 && s2 > 0.0)
            };
            [one(0), one(1)]
        })
        .collect();
    let s_ok = s >= -inst.alpha;
    let mut points: Vec<CriticalPoint> = (0..(1u32 << n))
        .into_par_iter()
        .map(|mask| {
            let mut value = Some(constant);
            let mut bounds = s_ok;
            let mut gmax = 0.0_f64;
            let mut gmin = f64::INFINITY;
            for (i, part) in parts.iter().enumerate() {
                let (g, contrib, ok) = part[((mask >> (n - 1 - i)) & 1) as usize];
                value = value.zip(contrib).map(|(v, c)| v + c);
                bounds &= ok;
                gmax = gmax.max(g.abs());
                gmin = gmin.min(g);
            }
            CriticalPoint {
                mask,
                value,
                in_s_plus: bounds && gmin > PD_PIVOT_RTOL * (1.0 + gmax),
            }
        })
        .collect();
    points.par_sort_by(|p, q| match (p.value, q.value) {
        (Some(a), Some(b)) => b.total_cmp(&a).then(p.mask.cmp(&q.mask)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => p.mask.cmp(&q.mask),
    });
    Ok((cand, points))
}
