//! Problem data, primal objective and feasibility predicates.
//!
//! An instance is the quintuple `(A, B, alpha, c, f)` defining
//!
//! ```text
//! P(x, v) = 1/2 x^T A x - c^T x + 1/2 (1/2 x^T B x - alpha)^2 - f^T v
//! ```
//!
//! over `v in {0,1}^n`, `-v <= x <= v`.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::linalg::{eigen_summary, SymmetricMatrix};

/// Default tolerance for feasibility predicates.
pub const FEAS_TOL: f64 = 1e-8;
/// Symmetrization corrections above this are reported to the user.
pub const SYMMETRY_REPORT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub(crate) a: SymmetricMatrix,
    pub(crate) b: SymmetricMatrix,
    pub(crate) alpha: f64,
    pub(crate) c: Vec<f64>,
    pub(crate) f: Vec<f64>,
    symmetry_correction: f64,
}

/// A candidate `(x, v)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimalPoint {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl PrimalPoint {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Self {
        Self { x, v }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![0.0; n], vec![0.0; n])
    }
}

impl ProblemInstance {
    /// Builds an instance. Dense matrices must already be symmetric (use
    /// [`SymmetricMatrix::from_rows`] for raw data); call
    /// [`ProblemInstance::with_symmetry_correction`] to record a fix-up.
    pub fn new(
        a: SymmetricMatrix,
        b: SymmetricMatrix,
        alpha: f64,
        c: Vec<f64>,
        f: Vec<f64>,
    ) -> Result<Self> {
        let n = c.len();
        check_len("A", n, a.dim())?;
        check_len("B", n, b.dim())?;
        check_len("f", n, f.len())?;
        Ok(Self {
            a,
            b,
            alpha,
            c,
            f,
            symmetry_correction: 0.0,
        })
    }

    /// Diagonal instance from the diagonals of `A` and `B`.
    pub fn diagonal(a: Vec<f64>, b: Vec<f64>, alpha: f64, c: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        Self::new(
            SymmetricMatrix::diagonal(a),
            SymmetricMatrix::diagonal(b),
            alpha,
            c,
            f,
        )
    }

    /// Dense instance from row-major data; asymmetric input is replaced by
    /// its symmetric part and the correction recorded.
    pub fn dense(
        a_rows: &[Vec<f64>],
        b_rows: &[Vec<f64>],
        alpha: f64,
        c: Vec<f64>,
        f: Vec<f64>,
    ) -> Result<Self> {
        let n = c.len();
        let (a, ca) = SymmetricMatrix::from_rows(a_rows).ok_or_else(|| {
            crate::error::Error::DimensionMismatch {
                what: "A rows".into(),
                expected: a_rows.len(),
                got: a_rows.iter().map(Vec::len).find(|&l| l != a_rows.len()).unwrap_or(0),
            }
        })?;
        let (b, cb) = SymmetricMatrix::from_rows(b_rows).ok_or_else(|| {
            crate::error::Error::DimensionMismatch {
                what: "B rows".into(),
                expected: b_rows.len(),
                got: b_rows.iter().map(Vec::len).find(|&l| l != b_rows.len()).unwrap_or(0),
            }
        })?;
        check_len("A", n, a.dim())?;
        Ok(Self::new(a, b, alpha, c, f)?.with_symmetry_correction(ca.max(cb)))
    }

    pub fn with_symmetry_correction(mut self, correction: f64) -> Self {
        self.symmetry_correction = correction;
        self
    }

    /// Largest entry change made when symmetrizing the input matrices.
    pub fn symmetry_correction(&self) -> f64 {
        self.symmetry_correction
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn a(&self) -> &SymmetricMatrix {
        &self.a
    }

    pub fn b(&self) -> &SymmetricMatrix {
        &self.b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    /// Both `A` and `B` diagonal (off-diagonal mass at most `1e-12`).
    pub fn is_diagonal(&self) -> bool {
        self.a.is_diagonal(1e-12) && self.b.is_diagonal(1e-12)
    }

    /// `1/2 x^T A x - c^T x + 1/2 (1/2 x^T B x - alpha)^2`, the part that
    /// does not depend on `v`.
    pub fn continuous_objective(&self, x: &[f64]) -> f64 {
        let xi = 0.5 * self.b.quad_form(x) - self.alpha;
        0.5 * self.a.quad_form(x) - crate::linalg::dot(&self.c, x) + 0.5 * xi * xi
    }
}

pub fn evaluate_primal(inst: &ProblemInstance, p: &PrimalPoint) -> Result<f64> {
    let n = inst.n();
    check_len("x", n, p.x.len())?;
    check_len("v", n, p.v.len())?;
    Ok(inst.continuous_objective(&p.x) - crate::linalg::dot(&inst.f, &p.v))
}

/// `v` within `tol` of `{0,1}` and `|x_i| <= v_i + tol`.
pub fn check_binary_feasible(p: &PrimalPoint, tol: f64) -> bool {
    p.x.len() == p.v.len()
        && p.x.iter().zip(&p.v).all(|(&x, &v)| {
            let binary = v.abs() <= tol || (v - 1.0).abs() <= tol;
            binary && x.abs() <= v + tol
        })
}

/// `x_i^2 <= v_i + tol` and `v_i (v_i - 1) <= tol`.
pub fn check_relaxed_feasible(p: &PrimalPoint, tol: f64) -> bool {
    p.x.len() == p.v.len()
        && p.x
            .iter()
            .zip(&p.v)
            .all(|(&x, &v)| x * x <= v + tol && v * (v - 1.0) <= tol)
}

/// One message per violated instance invariant; empty when the instance is valid.
pub fn validate_instance(inst: &ProblemInstance) -> Vec<String> {
    let mut out = Vec::new();
    let n = inst.n();
    if n == 0 {
        out.push("n must be a positive integer".to_string());
        return out;
    }
    let finite = |xs: &[f64]| xs.iter().all(|v| v.is_finite());
    for (name, m) in [("A", &inst.a), ("B", &inst.b)] {
        let rows = m.to_rows();
        if !rows.iter().all(|r| finite(r)) {
            out.push(format!("{name} has non-finite entries"));
            continue;
        }
        let scale = rows.iter().flatten().fold(0.0_f64, |s, v| s.max(v.abs()));
        let asym = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (rows[i][j] - rows[j][i]).abs())
            .fold(0.0_f64, f64::max);
        if asym > 1e-12 * (1.0 + scale) {
            out.push(format!("{name} is not symmetric (max asymmetry {asym:e})"));
        }
    }
    if inst.b.to_rows().iter().flatten().all(|v| v.is_finite()) {
        let s = eigen_summary(&inst.b);
        let norm = s.lambda_min.abs().max(s.lambda_max.abs());
        if s.lambda_min < -1e-10 * (1.0 + norm) {
            out.push(format!(
                "B is not positive semidefinite (smallest eigenvalue {})",
                s.lambda_min
            ));
        }
    }
    if !(inst.alpha > 0.0) || !inst.alpha.is_finite() {
        out.push(format!("alpha must be positive and finite (got {})", inst.alpha));
    }
    if !finite(&inst.c) {
        out.push("c has non-finite entries".to_string());
    }
    if !finite(&inst.f) {
        out.push("f has non-finite entries".to_string());
    }
    out
}
