use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dual::{dual_derivatives, dual_value, sample_interior, DualPoint};
use crate::error::Result;
use crate::instance::ProblemInstance;

pub const DEFAULT_THRESHOLD: f64 = 1e-4;
const STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub samples: usize,
    pub max_rel_error_gradient: f64,
    pub max_rel_error_hessian: f64,
    pub worst_point: Option<DualPoint>,
    pub pass: bool,
}

fn rel(fd: f64, an: f64) -> f64 {
    (fd - an).abs() / (1.0 + an.abs())
}

/// Largest relative errors of the analytic gradient and Hessian at `d`
/// against central differences of the value and of the gradient.
pub(crate) fn point_errors(inst: &ProblemInstance, d: &DualPoint) -> Result<(f64, f64)> {
    let an = dual_derivatives(inst, d)?;
    let z = d.to_vec();
    let (mut eg, mut eh) = (0.0_f64, 0.0_f64);
    for k in 0..z.len() {
        let (mut zp, mut zm) = (z.clone(), z.clone());
        zp[k] += STEP;
        zm[k] -= STEP;
        let (dp, dm) = (DualPoint::from_slice(&zp), DualPoint::from_slice(&zm));
        let fd = (dual_value(inst, &dp)? - dual_value(inst, &dm)?) / (2.0 * STEP);
        eg = eg.max(rel(fd, an.gradient[k]));
        let gp = dual_derivatives(inst, &dp)?.gradient;
        let gm = dual_derivatives(inst, &dm)?.gradient;
        for j in 0..z.len() {
            eh = eh.max(rel((gp[j] - gm[j]) / (2.0 * STEP), an.hessian[(j, k)]));
        }
    }
    Ok((eg, eh))
}

pub fn gradcheck(inst: &ProblemInstance, samples: usize, seed: u64, threshold: f64) -> Result<GradcheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut eg, mut eh) = (0.0_f64, 0.0_f64);
    let mut worst: Option<(f64, DualPoint)> = None;
    for _ in 0..samples {
        let d = sample_interior(inst, &mut rng);
        let (g, h) = point_errors(inst, &d)?;
        eg = eg.max(g);
        eh = eh.max(h);
        if worst.as_ref().is_none_or(|(w, _)| g.max(h) > *w) {
            worst = Some((g.max(h), d));
        }
    }
    Ok(GradcheckReport {
        samples,
        max_rel_error_gradient: eg,
        max_rel_error_hessian: eh,
        worst_point: worst.map(|(_, d)| d),
        pass: eg <= threshold && eh <= threshold,
    })
}
