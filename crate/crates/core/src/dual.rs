//! Canonical dual function, its reduced form, and primal recovery.
//!
//! With `G(s, t) = A + s B + 2 Diag(t)` the full dual function over
//! `(sigma0, sigma1, sigma2)` is
//!
//! ```text
//! Pd = -1/2 c^T G^+ c - 1/4 sum_i (f_i + sigma1_i + sigma2_i)^2 / sigma2_i
//!      - 1/2 sigma0^2 - alpha sigma0
//! ```
//!
//! and maximizing out `sigma2 > 0` (attained at `sigma2 = |f + sigma1|`) gives
//! the reduced function
//!
//! ```text
//! Pg = -1/2 c^T G^-1 c - sum_i (f_i + sigma1_i)^+ - 1/2 sigma0^2 - alpha sigma0.
//! ```
//!
//! A critical point of either inside the cone where `G` is positive definite
//! yields the global primal minimizer `x = G^-1 c`, `v = [f + sigma1 > 0]`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::instance::{PrimalPoint, ProblemInstance};
use crate::linalg::{cholesky_pd_check, dot, pseudo_solve, SymmetricMatrix};

/// `|f_i + sigma1_i|` at or below this is treated as the kink `t = 0`.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPoint {
    pub sigma0: f64,
    pub sigma1: Vec<f64>,
    pub sigma2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedDualPoint {
    pub sigma0: f64,
    pub sigma1: Vec<f64>,
}

impl ReducedDualPoint {
    pub fn new(sigma0: f64, sigma1: Vec<f64>) -> Self {
        Self { sigma0, sigma1 }
    }

    pub fn lift(&self, sigma2: Vec<f64>) -> DualPoint {
        DualPoint {
            sigma0: self.sigma0,
            sigma1: self.sigma1.clone(),
            sigma2,
        }
    }
}

impl DualPoint {
    pub fn reduced(&self) -> ReducedDualPoint {
        ReducedDualPoint::new(self.sigma0, self.sigma1.clone())
    }

    /// Flattened coordinates in the order `(sigma0, sigma1.., sigma2..)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut z = Vec::with_capacity(1 + 2 * self.sigma1.len());
        z.push(self.sigma0);
        z.extend_from_slice(&self.sigma1);
        z.extend_from_slice(&self.sigma2);
        z
    }

    pub fn from_slice(z: &[f64]) -> Self {
        let n = (z.len() - 1) / 2;
        Self {
            sigma0: z[0],
            sigma1: z[1..=n].to_vec(),
            sigma2: z[n + 1..].to_vec(),
        }
    }
}

/// Value, gradient and Hessian of the full dual function.
#[derive(Debug, Clone, PartialEq)]
pub struct DualDerivatives {
    pub value: f64,
    /// Ordered `(sigma0, sigma1.., sigma2..)`.
    pub gradient: Vec<f64>,
    pub hessian: DMatrix<f64>,
}

pub fn build_g(inst: &ProblemInstance, q: &ReducedDualPoint) -> Result<SymmetricMatrix> {
    check_len("sigma1", inst.n(), q.sigma1.len())?;
    let shift: Vec<f64> = q.sigma1.iter().map(|s| 2.0 * s).collect();
    Ok(inst.a.affine(q.sigma0, &inst.b, &shift))
}

fn check_dual(inst: &ProblemInstance, d: &DualPoint) -> Result<()> {
    check_len("sigma1", inst.n(), d.sigma1.len())?;
    check_len("sigma2", inst.n(), d.sigma2.len())?;
    if let Some((index, &value)) = d.sigma2.iter().enumerate().find(|(_, &s)| !(s > 0.0)) {
        return Err(Error::NonPositiveSigma2 { index, value });
    }
    Ok(())
}

fn sigma2_term(f: &[f64], sigma1: &[f64], sigma2: &[f64]) -> f64 {
    f.iter()
        .zip(sigma1)
        .zip(sigma2)
        .map(|((f, s1), s2)| (f + s1 + s2).powi(2) / s2)
        .sum::<f64>()
}

/// Full dual value using the pseudo-inverse of `G`.
pub fn dual_value(inst: &ProblemInstance, d: &DualPoint) -> Result<f64> {
    check_dual(inst, d)?;
    let g = build_g(inst, &d.reduced())?;
    let (y, in_col) = pseudo_solve(&g, &inst.c);
    if !in_col {
        let gy = g.mul_vec(&y);
        let residual = crate::linalg::norm2(
            &gy.iter().zip(&inst.c).map(|(a, b)| a - b).collect::<Vec<_>>(),
        );
        return Err(Error::NotInColumnSpace { residual });
    }
    let s = d.sigma0;
    Ok(-0.5 * dot(&inst.c, &y)
        - 0.25 * sigma2_term(&inst.f, &d.sigma1, &d.sigma2)
        - 0.5 * s * s
        - inst.alpha * s)
}

/// Analytic gradient and Hessian of the full dual function.
///
/// The Hessian is `-J1 - J2 - J3` where `J1 = e0 e0^T`,
/// `J2 = Z^T G^-1 Z` on the `(sigma0, sigma1)` block with
/// `Z = [B x, 2 Diag(x)]`, and `J3` is minus the second derivatives of the
/// separable `sigma2` term.
pub fn dual_derivatives(inst: &ProblemInstance, d: &DualPoint) -> Result<DualDerivatives> {
    check_dual(inst, d)?;
    let n = inst.n();
    let g = build_g(inst, &d.reduced())?;
    let ginv = g.inverse().ok_or(Error::SingularG)?;
    let x = mat_vec(&ginv, &inst.c);
    let bx = inst.b.mul_vec(&x);
    let s = d.sigma0;

    let value = -0.5 * dot(&inst.c, &x)
        - 0.25 * sigma2_term(&inst.f, &d.sigma1, &d.sigma2)
        - 0.5 * s * s
        - inst.alpha * s;

    let dim = 2 * n + 1;
    let mut gradient = vec![0.0; dim];
    gradient[0] = 0.5 * dot(&x, &bx) - s - inst.alpha;
    for i in 0..n {
        let t = inst.f[i] + d.sigma1[i];
        let s2 = d.sigma2[i];
        let ratio = (t + s2) / s2;
        gradient[1 + i] = x[i] * x[i] - 0.5 * ratio;
        gradient[1 + n + i] = -0.5 * ratio + 0.25 * ratio * ratio;
    }

    // Z columns: dG/dsigma0 x = B x, dG/dsigma1_i x = 2 x_i e_i
    let mut z = DMatrix::<f64>::zeros(n, n + 1);
    for r in 0..n {
        z[(r, 0)] = bx[r];
        z[(r, 1 + r)] = 2.0 * x[r];
    }
    let j2 = z.transpose() * &ginv * &z;

    let mut hessian = DMatrix::<f64>::zeros(dim, dim);
    hessian[(0, 0)] -= 1.0;
    for r in 0..=n {
        for c in 0..=n {
            hessian[(r, c)] -= j2[(r, c)];
        }
    }
    for i in 0..n {
        let t = inst.f[i] + d.sigma1[i];
        let s2 = d.sigma2[i];
        let (a, b) = (1 + i, 1 + n + i);
        // second derivatives of -1/4 (t + s2)^2 / s2
        hessian[(a, a)] += -1.0 / (2.0 * s2);
        hessian[(a, b)] += t / (2.0 * s2 * s2);
        hessian[(b, a)] += t / (2.0 * s2 * s2);
        hessian[(b, b)] += -t * t / (2.0 * s2 * s2 * s2);
    }
    Ok(DualDerivatives {
        value,
        gradient,
        hessian,
    })
}

fn check_ties(inst: &ProblemInstance, q: &ReducedDualPoint) -> Result<Vec<f64>> {
    check_len("sigma1", inst.n(), q.sigma1.len())?;
    let t: Vec<f64> = inst.f.iter().zip(&q.sigma1).map(|(f, s)| f + s).collect();
    if let Some((index, &value)) = t.iter().enumerate().find(|(_, v)| v.abs() <= TIE_TOL) {
        return Err(Error::TieAtZero { index, value });
    }
    Ok(t)
}

/// `x = G^-1 c` for a nonsingular (not necessarily definite) `G`.
fn solve_g(inst: &ProblemInstance, q: &ReducedDualPoint) -> Result<(SymmetricMatrix, Vec<f64>)> {
    let g = build_g(inst, q)?;
    let x = match g.cholesky() {
        Some(ch) => ch.solve(&inst.c),
        None => mat_vec(&g.inverse().ok_or(Error::SingularG)?, &inst.c),
    };
    Ok((g, x))
}

pub fn reduced_dual_value(inst: &ProblemInstance, q: &ReducedDualPoint) -> Result<f64> {
    Ok(reduced_dual_derivatives(inst, q)?.0)
}

/// Value and gradient over `(sigma0, sigma1)` of the reduced dual function.
pub fn reduced_dual_derivatives(
    inst: &ProblemInstance,
    q: &ReducedDualPoint,
) -> Result<(f64, Vec<f64>)> {
    let t = check_ties(inst, q)?;
    let (_, x) = solve_g(inst, q)?;
    let s = q.sigma0;
    let positive: f64 = t.iter().filter(|&&v| v > 0.0).sum();
    let value = -0.5 * dot(&inst.c, &x) - positive - 0.5 * s * s - inst.alpha * s;
    let mut grad = Vec::with_capacity(inst.n() + 1);
    grad.push(0.5 * inst.b.quad_form(&x) - s - inst.alpha);
    grad.extend(
        x.iter()
            .zip(&t)
            .map(|(xi, ti)| xi * xi - if *ti > 0.0 { 1.0 } else { 0.0 }),
    );
    Ok((value, grad))
}

/// The maximizing `sigma2 = |f + sigma1|`.
pub fn sigma2_star(inst: &ProblemInstance, q: &ReducedDualPoint) -> Result<Vec<f64>> {
    Ok(check_ties(inst, q)?.iter().map(|t| t.abs()).collect())
}

/// Componentwise indicator of `t_i > 0`; undefined at zero.
pub fn positive_part_selector(t: &[f64]) -> Result<Vec<f64>> {
    t.iter()
        .enumerate()
        .map(|(index, &value)| {
            if value.abs() <= TIE_TOL {
                Err(Error::TieAtZero { index, value })
            } else if value > 0.0 {
                Ok(1.0)
            } else {
                Ok(0.0)
            }
        })
        .collect()
}

/// `x = G^-1 c`, `v = [f + sigma1 > 0]`. Requires `G` positive definite.
pub fn recover_primal(inst: &ProblemInstance, q: &ReducedDualPoint) -> Result<PrimalPoint> {
    let t = check_ties(inst, q)?;
    let g = build_g(inst, q)?;
    let ch = g.cholesky().ok_or(Error::SingularG)?;
    Ok(PrimalPoint::new(ch.solve(&inst.c), positive_part_selector(&t)?))
}

/// Membership in the cone `sigma0 >= -alpha`, `sigma1 >= 0`, `sigma2 > 0`, `G > 0`.
pub fn in_s_plus(inst: &ProblemInstance, d: &DualPoint) -> bool {
    d.sigma2.len() == inst.n()
        && d.sigma2.iter().all(|&s| s > 0.0)
        && in_reduced_cone(inst, &d.reduced())
}

/// Membership in the reduced cone: as above with `f + sigma1` nowhere zero
/// in place of the `sigma2` condition.
pub fn in_s_reduced(inst: &ProblemInstance, q: &ReducedDualPoint) -> bool {
    in_reduced_cone(inst, q)
        && inst
            .f
            .iter()
            .zip(&q.sigma1)
            .all(|(f, s)| (f + s).abs() > TIE_TOL)
}

fn in_reduced_cone(inst: &ProblemInstance, q: &ReducedDualPoint) -> bool {
    q.sigma1.len() == inst.n()
        && q.sigma0 >= -inst.alpha
        && q.sigma1.iter().all(|&s| s >= 0.0)
        && build_g(inst, q).map(|g| cholesky_pd_check(&g)).unwrap_or(false)
}

/// A random point strictly inside the cone: `sigma0 > -alpha`,
/// `sigma1 > 0`, `sigma2 > 0`, `lambda_min(G) >= 0.2` and every
/// `|f_i + sigma1_i| >= 0.05`.
pub fn sample_interior<R: Rng + ?Sized>(inst: &ProblemInstance, rng: &mut R) -> DualPoint {
    let n = inst.n();
    let sigma0 = -inst.alpha + rng.random_range(0.2..3.0);
    let mut sigma1: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
    let mut shift = 0.5;
    for _ in 0..80 {
        let g = build_g(inst, &ReducedDualPoint::new(sigma0, sigma1.clone())).expect("dimensions agree");
        if crate::linalg::eigen_summary(&g).lambda_min >= 0.2 {
            break;
        }
        sigma1.iter_mut().for_each(|s| *s += shift);
        shift *= 2.0;
    }
    for (s, f) in sigma1.iter_mut().zip(&inst.f) {
        if (f + *s).abs() < 0.05 {
            *s += 0.1;
        }
    }
    let sigma2 = (0..n).map(|_| rng.random_range(0.2..5.0)).collect();
    DualPoint {
        sigma0,
        sigma1,
        sigma2,
    }
}

pub(crate) fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::eigen_summary;

    fn ex1_opt() -> DualPoint {
        DualPoint {
            sigma0: -3.5,
            sigma1: vec![7., 12., 6.25, 9., 5.],
            sigma2: vec![27., 24., 5.25, 10., 18.],
        }
    }

    #[test]
    fn g_examples() {
        let ex1 = fixtures::example(1).instance();
        let g0 = build_g(&ex1, &ReducedDualPoint::new(0.0, vec![0.0; 5])).unwrap();
        assert_eq!(g0.diag(), ex1.a().diag());
        let g = build_g(&ex1, &ex1_opt().reduced()).unwrap();
        assert!(g.is_diagonal_tagged());
        assert_eq!(g.diag(), vec![8., 9., 10., 9., 5.]);
        assert_eq!(eigen_summary(&g).lambda_min, 5.0);

        let ex7 = fixtures::example(7).instance();
        let g = build_g(&ex7, &ReducedDualPoint::new(-0.5, vec![2.5, 9.75, 6.0])).unwrap();
        let expect = [[5.5, 1.5, 3.0], [1.5, 11.5, -7.0], [3.0, -7.0, 11.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((g.get(i, j) - expect[i][j]).abs() < 1e-14, "({i},{j})");
            }
        }
    }

    #[test]
    fn dual_values() {
        let ex1 = fixtures::example(1).instance();
        assert!((dual_value(&ex1, &ex1_opt()).unwrap() + 75.875).abs() < 1e-12);

        // hand evaluation: -0 - 1/4 * 0 - 1/2 + 1 = 0.5
        let tiny = ProblemInstance::diagonal(vec![2.], vec![0.], 1.0, vec![0.], vec![-1.]).unwrap();
        let d = DualPoint {
            sigma0: -1.0,
            sigma1: vec![0.0],
            sigma2: vec![1.0],
        };
        assert_eq!(dual_value(&tiny, &d).unwrap(), 0.5);

        let ex3 = fixtures::example(3).instance();
        let d3 = DualPoint {
            sigma0: 0.0,
            sigma1: vec![8.5, 3., 1., 3., 1., 1.5, 6., 6.5, 7., 4.5],
            sigma2: vec![14.5, 4., 5., 16., 7., 16.5, 23., 26.5, 10., 20.5],
        };
        assert!((dual_value(&ex3, &d3).unwrap() + 212.0).abs() < 1e-12);
    }

    #[test]
    fn dual_value_errors() {
        let ex1 = fixtures::example(1).instance();
        let mut d = ex1_opt();
        d.sigma2[2] = 0.0;
        assert!(matches!(
            dual_value(&ex1, &d),
            Err(Error::NonPositiveSigma2 { index: 2, .. })
        ));
        // G = Diag(1, 0) with c = (1, 1) -> c not in col(G)
        let inst = ProblemInstance::diagonal(vec![1., 0.], vec![0., 0.], 1.0, vec![1., 1.], vec![1., 1.]).unwrap();
        let d = DualPoint {
            sigma0: 0.0,
            sigma1: vec![0.0, 0.0],
            sigma2: vec![1.0, 1.0],
        };
        assert!(matches!(dual_value(&inst, &d), Err(Error::NotInColumnSpace { .. })));
        // but fine when c_2 = 0
        let inst = ProblemInstance::diagonal(vec![1., 0.], vec![0., 0.], 1.0, vec![1., 0.], vec![1., 1.]).unwrap();
        assert!(dual_value(&inst, &d).is_ok());
    }

    #[test]
    fn derivatives_at_ex1_optimum() {
        let ex1 = fixtures::example(1).instance();
        let dd = dual_derivatives(&ex1, &ex1_opt()).unwrap();
        assert!(crate::linalg::norm2(&dd.gradient) <= 1e-8);
        let h = SymmetricMatrix::from_dense_symmetrized(dd.hessian.clone()).0;
        assert!(h.eigenvalues().last().unwrap() <= &1e-10);
        assert!((dd.value + 75.875).abs() < 1e-12);
    }

    #[test]
    fn singular_g_reported() {
        let inst = ProblemInstance::diagonal(vec![0.], vec![1.], 1.0, vec![1.], vec![1.]).unwrap();
        let d = DualPoint {
            sigma0: 0.0,
            sigma1: vec![0.0],
            sigma2: vec![1.0],
        };
        assert_eq!(dual_derivatives(&inst, &d).unwrap_err(), Error::SingularG);
        assert_eq!(
            reduced_dual_value(&inst, &d.reduced()).unwrap_err(),
            Error::SingularG
        );
    }

    #[test]
    fn reduced_values_from_tables() {
        let ex4 = fixtures::example(4).instance();
        let q = ReducedDualPoint::new(-1.82, vec![0., 6.641, 3.051, 0.641, 4.231]);
        assert!((reduced_dual_value(&ex4, &q).unwrap() + 51.7281).abs() < 1e-3);

        let ex8 = fixtures::example(8).instance();
        let q = ReducedDualPoint::new(0.088, vec![0., 1.994, 0., 0., 0.]);
        assert!((reduced_dual_value(&ex8, &q).unwrap() + 32.8777).abs() < 1e-3);
    }

    #[test]
    fn reduced_value_quadratic_in_sigma0_alone() {
        let inst = ProblemInstance::diagonal(vec![4., 5.], vec![1., 1.], 3.0, vec![0., 0.], vec![-1., -2.]).unwrap();
        for s in [-2.0, -1.0, 0.0, 1.5] {
            let v = reduced_dual_value(&inst, &ReducedDualPoint::new(s, vec![0., 0.])).unwrap();
            assert!((v - (-0.5 * s * s - 3.0 * s)).abs() < 1e-14);
        }
        // maximum 1/2 alpha^2 at sigma0 = -alpha, where G = (1, 2) is still PD
        let top = reduced_dual_value(&inst, &ReducedDualPoint::new(-3.0, vec![0., 0.]));
        assert_eq!(top.unwrap(), 4.5);
    }

    #[test]
    fn reduced_gradient_hand_case() {
        // G = 4, x = 1/2, d/dsigma0 = 1/2 * 2 * 1/4 - 0 - 1 = -0.75
        let inst = ProblemInstance::diagonal(vec![2.], vec![2.], 1.0, vec![2.], vec![1.]).unwrap();
        let (_, g) = reduced_dual_derivatives(&inst, &ReducedDualPoint::new(0.0, vec![1.0])).unwrap();
        assert!((g[0] + 0.75).abs() < 1e-15);
        assert!((g[1] - (0.25 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn sigma2_star_and_selector() {
        let ex1 = fixtures::example(1).instance();
        let q = ex1_opt().reduced();
        assert_eq!(sigma2_star(&ex1, &q).unwrap(), vec![27., 24., 5.25, 10., 18.]);

        let one = ProblemInstance::diagonal(vec![1.], vec![0.], 1.0, vec![0.], vec![-3.]).unwrap();
        assert_eq!(sigma2_star(&one, &ReducedDualPoint::new(0.0, vec![1.0])).unwrap(), vec![2.0]);
        assert!(matches!(
            sigma2_star(&one, &ReducedDualPoint::new(0.0, vec![3.0])),
            Err(Error::TieAtZero { index: 0, .. })
        ));

        assert_eq!(positive_part_selector(&[3., -2.]).unwrap(), vec![1., 0.]);
        assert_eq!(
            positive_part_selector(&[5.5, -16.013, 3., 2., -6.633]).unwrap(),
            vec![1., 0., 1., 1., 0.]
        );
        assert_eq!(positive_part_selector(&[-1., -2., -0.5]).unwrap(), vec![0.; 3]);
        assert!(positive_part_selector(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn recovery() {
        let ex1 = fixtures::example(1).instance();
        let p = recover_primal(&ex1, &ex1_opt().reduced()).unwrap();
        assert_eq!(p.x, vec![-1., -1., 1., 1., -1.]);
        assert_eq!(p.v, vec![1.; 5]);

        let ex8 = fixtures::example(8).instance();
        let p = recover_primal(&ex8, &ReducedDualPoint::new(0.088, vec![0., 1.994, 0., 0., 0.])).unwrap();
        let want = [0.556, 0.0, 0.978, -0.174, -0.225];
        for (a, b) in p.x.iter().zip(want) {
            assert!((a - b).abs() < 1e-2, "{a} vs {b}");
        }
        assert_eq!(p.v, vec![1., 0., 1., 1., 1.]);

        let c0 = ProblemInstance::diagonal(vec![1., 3.], vec![1., 1.], 1.0, vec![0., 0.], vec![1., -1.]).unwrap();
        let p = recover_primal(&c0, &ReducedDualPoint::new(0.3, vec![0.2, 0.7])).unwrap();
        assert_eq!(p.x, vec![0.0, 0.0]);
    }

    #[test]
    fn cone_membership() {
        let ex1 = fixtures::example(1).instance();
        let d = ex1_opt();
        assert!(in_s_plus(&ex1, &d));
        assert!(in_s_reduced(&ex1, &d.reduced()));
        let mut low = d.clone();
        low.sigma0 = -ex1.alpha() - 1.0;
        assert!(!in_s_plus(&ex1, &low));
        let mut neg = d.clone();
        neg.sigma1[3] = -0.1;
        assert!(!in_s_plus(&ex1, &neg));
        assert!(!in_s_reduced(&ex1, &neg.reduced()));
        let mut tie = d.reduced();
        tie.sigma1[2] = 1.0; // f_3 = -1
        assert!(!in_s_reduced(&ex1, &tie));
    }
}
