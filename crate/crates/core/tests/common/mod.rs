//! Generators and the randomized duality checks shared by the property
//! and acceptance suites. Each check returns a one-line summary, as `Err`
//! when its threshold is violated.
#![allow(dead_code)]

use canodual::cli::gradcheck;
use canodual::dual::sample_interior;
use canodual::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn symmetric(r: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let x = r.random_range(-scale..scale);
            m[i][j] = x;
            m[j][i] = x;
        }
    }
    m
}

pub fn psd(r: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let k = r.random_range(1..=n);
    let l: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
    (0..n)
        .map(|i| (0..n).map(|j| (0..k).map(|t| l[t][i] * l[t][j]).sum()).collect())
        .collect()
}

pub fn random_instance(seed: u64, max_n: usize) -> ProblemInstance {
    let mut r = rng(seed);
    let n = r.random_range(1..=max_n);
    let a = symmetric(&mut r, n, 4.0);
    let b = psd(&mut r, n);
    let alpha = r.random_range(0.5..8.0);
    let c = (0..n).map(|_| r.random_range(-8.0..8.0)).collect();
    let f = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
    ProblemInstance::dense(&a, &b, alpha, c, f).unwrap()
}

/// Diagonal instance on which the closed-form conditions hold by
/// construction.
pub fn closed_form_instance(seed: u64) -> ProblemInstance {
    let mut r = rng(seed);
    let n = r.random_range(1..=6);
    let a: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
    let b: Vec<f64> = (0..n).map(|_| r.random_range(0.1..2.0)).collect();
    let alpha = r.random_range(0.5..5.0);
    let s = 0.5 * b.iter().sum::<f64>() - alpha;
    let mut c = Vec::new();
    let mut f = Vec::new();
    for i in 0..n {
        let base = a[i] + s * b[i];
        let mag = base.abs() + r.random_range(0.5..5.0);
        c.push(if r.random_bool(0.5) { mag } else { -mag });
        let m_max = 0.5 * (mag - base);
        f.push(r.random_range(-m_max + 0.1..5.0));
    }
    ProblemInstance::diagonal(a, b, alpha, c, f).unwrap()
}

pub fn random_primal(r: &mut ChaCha8Rng, n: usize) -> PrimalPoint {
    let v: Vec<f64> = (0..n).map(|_| f64::from(u8::from(r.random_bool(0.6)))).collect();
    let x = v.iter().map(|&vi| vi * r.random_range(-1.0..=1.0)).collect();
    PrimalPoint::new(x, v)
}

pub fn lerp(a: &DualPoint, b: &DualPoint, t: f64) -> DualPoint {
    let z: Vec<f64> = a.to_vec().iter().zip(b.to_vec()).map(|(x, y)| (1.0 - t) * x + t * y).collect();
    DualPoint::from_slice(&z)
}


pub type Check = std::result::Result<String, String>;

fn verdict(ok: bool, msg: String) -> Check {
    if ok { Ok(msg) } else { Err(msg) }
}

/// Largest chord-above-curve violation on 200 segments in the cone across
/// 20 instances; threshold 1e-9.
pub fn concavity() -> Check {
    let mut worst = 0.0_f64;
    for k in 0..20 {
        let inst = random_instance(1000 + k, 8);
        let mut r = rng(k);
        for _ in 0..10 {
            let (p, q) = (sample_interior(&inst, &mut r), sample_interior(&inst, &mut r));
            let (fp, fq) = (dual_value(&inst, &p).unwrap(), dual_value(&inst, &q).unwrap());
            for t in [0.1, 0.25, 0.5, 0.75, 0.9] {
                let m = lerp(&p, &q, t);
                if !in_s_plus(&inst, &m) {
                    return Err(format!("instance {k}: segment leaves the cone"));
                }
                let chord = (1.0 - t) * fp + t * fq;
                let violation = (chord - dual_value(&inst, &m).unwrap()) / (1.0 + chord.abs());
                worst = worst.max(violation);
            }
        }
    }
    verdict(worst <= 1e-9, format!("max concavity violation {worst:.3e}"))
}

/// Analytic derivatives against central differences at 50 points on each
/// of 20 instances; threshold 1e-4 relative.
pub fn finite_differences() -> Check {
    let (mut eg, mut eh) = (0.0_f64, 0.0_f64);
    for k in 0..20 {
        let inst = random_instance(2000 + k, 8);
        let r = gradcheck(&inst, 50, k, 1e-4).unwrap();
        eg = eg.max(r.max_rel_error_gradient);
        eh = eh.max(r.max_rel_error_hessian);
    }
    verdict(eg <= 1e-4 && eh <= 1e-4, format!("max relative error gradient {eg:.3e}, hessian {eh:.3e}"))
}

/// Largest Hessian eigenvalue at 10 interior points on each of 20
/// instances, relative to the Hessian scale.
pub fn hessian_nsd() -> Check {
    let mut worst = f64::NEG_INFINITY;
    for k in 0..20 {
        let inst = random_instance(2500 + k, 8);
        let mut r = rng(k);
        for _ in 0..10 {
            let d = sample_interior(&inst, &mut r);
            let h = dual_derivatives(&inst, &d).unwrap().hessian;
            let scale = h.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            let top = h.symmetric_eigen().eigenvalues.max();
            worst = worst.max(top / (1.0 + scale));
        }
    }
    verdict(worst <= 1e-9, format!("max scaled hessian eigenvalue {worst:.3e}"))
}

/// Smallest `P - P^g` over 100 random feasible pairs on each of 20
/// instances; threshold -1e-9.
pub fn weak_duality() -> Check {
    let mut worst = f64::INFINITY;
    for k in 0..20 {
        let inst = random_instance(3000 + k, 8);
        let mut r = rng(k);
        for _ in 0..100 {
            let q = sample_interior(&inst, &mut r).reduced();
            let Ok(pg) = reduced_dual_value(&inst, &q) else { continue };
            let p = random_primal(&mut r, inst.n());
            worst = worst.min(evaluate_primal(&inst, &p).unwrap() - pg);
        }
    }
    verdict(worst >= -1e-9, format!("min weak-duality slack {worst:.3e}"))
}

/// `P^d(s, sigma1, |f + sigma1|) = P^g(s, sigma1)` with vanishing sigma2
/// gradient; threshold 1e-10 relative.
pub fn envelope() -> Check {
    let mut worst = 0.0_f64;
    for k in 0..20 {
        let inst = random_instance(4000 + k, 8);
        let mut r = rng(k);
        for _ in 0..20 {
            let q = sample_interior(&inst, &mut r).reduced();
            let Ok(pg) = reduced_dual_value(&inst, &q) else { continue };
            let full = q.lift(sigma2_star(&inst, &q).unwrap());
            let pd = dual_value(&inst, &full).unwrap();
            worst = worst.max((pd - pg).abs() / (1.0 + pg.abs()));
            let grad = dual_derivatives(&inst, &full).unwrap().gradient;
            if grad[1 + inst.n()..].iter().any(|g| g.abs() >= 1e-12) {
                return Err(format!("instance {k}: sigma2 gradient does not vanish"));
            }
        }
    }
    verdict(worst <= 1e-10, format!("max envelope mismatch {worst:.3e}"))
}

/// Every global certificate on 40 random instances has zero gap, a binary
/// feasible primal and no better point found by the oracle.
pub fn certified_gaps() -> Check {
    let cfg = SolverConfig::default();
    let (mut certified, mut worst) = (0, 0.0_f64);
    for k in 0..40 {
        let inst = random_instance(5000 + k, 5);
        let Ok(r) = solve(&inst, &cfg) else { continue };
        if r.certificate != Certificate::GlobalOptimal {
            continue;
        }
        certified += 1;
        worst = worst.max(r.gap.abs());
        if r.gap.abs() > cfg.gap_tol || !check_binary_feasible(&r.primal, 1e-8) {
            return Err(format!("instance {k}: gap {:e}", r.gap));
        }
        let oracle = brute_force_solve(&inst, &OracleConfig::default()).unwrap();
        if oracle.value < r.primal_value - 1e-6 * (1.0 + r.primal_value.abs()) {
            return Err(format!("instance {k}: oracle {} beats certified {}", oracle.value, r.primal_value));
        }
    }
    verdict(certified >= 5, format!("{certified}/40 certified, max gap {worst:.3e}"))
}

/// Closed form, best enumerated critical point in the cone and solver
/// output coincide on 20 diagonal instances meeting the closed-form
/// conditions.
pub fn closed_form_agreement() -> Check {
    let mut worst = 0.0_f64;
    for k in 0..20 {
        let inst = closed_form_instance(6000 + k);
        let Some(closed) = theorem5_solve(&inst).unwrap() else {
            return Err(format!("instance {k}: closed form not applicable"));
        };
        let (_, points) = enumerate_critical_points(&inst).unwrap();
        let Some(best) = points.iter().find(|p| p.in_s_plus) else {
            return Err(format!("instance {k}: no critical point in the cone"));
        };
        let solved = solve(&inst, &SolverConfig::default()).unwrap();
        let v = closed.value;
        let scale = 1.0 + v.abs();
        let x_err = solved.primal.x.iter().zip(&closed.primal.x).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max((best.value.unwrap() - v).abs() / scale).max((solved.dual_value - v).abs() / scale);
        if (best.value.unwrap() - v).abs() > 1e-9 * scale
            || (solved.dual_value - v).abs() > 1e-6 * scale
            || solved.certificate != Certificate::GlobalOptimal
            || x_err > 1e-6
            || solved.primal.v != closed.primal.v
        {
            return Err(format!("instance {k}: closed {v}, enumerated {:?}, solver {}", best.value, solved.dual_value));
        }
    }
    verdict(true, format!("20/20 agree, max relative value difference {worst:.3e}"))
}
