//! Small dense symmetric linear algebra.
//!
//! [`SymmetricMatrix`] carries a storage tag, and each operation has an
//! O(n) path for diagonal storage. Dense storage is backed by `nalgebra`.
//! The Cholesky factorization uses its own relative pivot threshold.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Pivot threshold for the positive-definiteness test, relative to `1 + max diag`.
pub const PD_PIVOT_RTOL: f64 = 1e-12;
/// Eigenvalues below this fraction of the spectral radius count as zero.
pub const RANK_RTOL: f64 = 1e-10;
/// Column-space membership: `|M y - b| <= COLUMN_SPACE_RTOL * (1 + |b|)`.
pub const COLUMN_SPACE_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(DMatrix<f64>),
    Diagonal(Vec<f64>),
}

/// A real symmetric matrix stored either densely or as its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    storage: Storage,
}

/// Extreme eigenvalues and numerical rank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSummary {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub rank: usize,
}

impl SymmetricMatrix {
    pub fn diagonal(entries: Vec<f64>) -> Self {
        Self {
            storage: Storage::Diagonal(entries),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(vec![1.0; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::diagonal(vec![0.0; n])
    }

    /// Builds a dense matrix from `m`, replacing it by `(m + m^T) / 2`.
    ///
    /// Returns the matrix and the largest absolute change made to any entry.
    pub fn from_dense_symmetrized(m: DMatrix<f64>) -> (Self, f64) {
        assert!(m.is_square(), "symmetric matrix must be square");
        let n = m.nrows();
        let mut out = m.clone();
        let mut correction = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                correction = correction.max((m[(i, j)] - avg).abs());
                out[(i, j)] = avg;
                out[(j, i)] = avg;
            }
        }
        (
            Self {
                storage: Storage::Dense(out),
            },
            correction,
        )
    }

    /// Row-major constructor; rows must all have length `rows.len()`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<(Self, f64)> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Some(Self::from_dense_symmetrized(m))
    }

    pub fn dim(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.nrows(),
            Storage::Diagonal(d) => d.len(),
        }
    }

    /// True when the matrix is stored with the diagonal tag.
    pub fn is_diagonal_tagged(&self) -> bool {
        matches!(self.storage, Storage::Diagonal(_))
    }

    /// Largest absolute off-diagonal entry (zero for diagonal storage).
    pub fn off_diagonal_mass(&self) -> f64 {
        match &self.storage {
            Storage::Diagonal(_) => 0.0,
            Storage::Dense(m) => {
                let n = m.nrows();
                let mut mass = 0.0_f64;
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            mass = mass.max(m[(i, j)].abs());
                        }
                    }
                }
                mass
            }
        }
    }

    /// True when the matrix is diagonal, either by tag or by content.
    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.off_diagonal_mass() <= tol
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m[(i, j)],
            Storage::Diagonal(d) => {
                if i == j {
                    d[i]
                } else {
                    0.0
                }
            }
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(m) => (0..m.nrows()).map(|i| m[(i, i)]).collect(),
            Storage::Diagonal(d) => d.clone(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Diagonal(d) => DMatrix::from_diagonal(&DVector::from_column_slice(d)),
        }
    }

    /// The same matrix with dense storage.
    pub fn densified(&self) -> Self {
        Self {
            storage: Storage::Dense(self.to_dense()),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(m) => {
                let n = m.nrows();
                (0..n)
                    .map(|i| (0..n).map(|j| m[(i, j)] * x[j]).sum())
                    .collect()
            }
            Storage::Diagonal(d) => d.iter().zip(x).map(|(a, b)| a * b).collect(),
        }
    }

    /// `x^T M x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs_diag(&self) -> f64 {
        self.diag().iter().fold(0.0_f64, |m, d| m.max(d.abs()))
    }

    /// `self + scale * other + Diag(shift)`; diagonal iff both inputs are.
    pub fn affine(&self, scale: f64, other: &SymmetricMatrix, shift: &[f64]) -> SymmetricMatrix {
        match (&self.storage, &other.storage) {
            (Storage::Diagonal(a), Storage::Diagonal(b)) => SymmetricMatrix::diagonal(
                a.iter()
                    .zip(b)
                    .zip(shift)
                    .map(|((a, b), s)| a + scale * b + s)
                    .collect(),
            ),
            _ => {
                let mut m = self.to_dense() + other.to_dense() * scale;
                for (i, s) in shift.iter().enumerate() {
                    m[(i, i)] += s;
                }
                SymmetricMatrix {
                    storage: Storage::Dense(m),
                }
            }
        }
    }

    /// Cholesky factor, or `None` if some pivot falls below the PD threshold.
    pub fn cholesky(&self) -> Option<Cholesky> {
        let tol = PD_PIVOT_RTOL * (1.0 + self.max_abs_diag());
        match &self.storage {
            Storage::Diagonal(d) => {
                if d.iter().all(|&x| x > tol) {
                    Some(Cholesky {
                        factor: Factor::Diagonal(d.clone()),
                    })
                } else {
                    None
                }
            }
            Storage::Dense(m) => {
                let n = m.nrows();
                let mut l = DMatrix::<f64>::zeros(n, n);
                for j in 0..n {
                    let mut pivot = m[(j, j)];
                    for k in 0..j {
                        pivot -= l[(j, k)] * l[(j, k)];
                    }
                    if !(pivot > tol) {
                        return None;
                    }
                    let ljj = pivot.sqrt();
                    l[(j, j)] = ljj;
                    for i in (j + 1)..n {
                        let mut s = m[(i, j)];
                        for k in 0..j {
                            s -= l[(i, k)] * l[(j, k)];
                        }
                        l[(i, j)] = s / ljj;
                    }
                }
                Some(Cholesky {
                    factor: Factor::Dense(l),
                })
            }
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev = match &self.storage {
            Storage::Diagonal(d) => d.clone(),
            Storage::Dense(m) => SymmetricEigen::new(m.clone()).eigenvalues.as_slice().to_vec(),
        };
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Inverse for any nonsingular symmetric matrix (not only PD ones).
    pub fn inverse(&self) -> Option<DMatrix<f64>> {
        if let Some(ch) = self.cholesky() {
            return Some(ch.inverse());
        }
        let (vals, vecs) = self.eigen_pairs();
        let scale = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let cutoff = RANK_RTOL * scale.max(f64::MIN_POSITIVE);
        if scale == 0.0 || vals.iter().any(|v| v.abs() <= cutoff) {
            return None;
        }
        Some(spectral_apply(&vals, &vecs, |v| 1.0 / v))
    }

    fn eigen_pairs(&self) -> (Vec<f64>, DMatrix<f64>) {
        match &self.storage {
            Storage::Diagonal(d) => (d.clone(), DMatrix::identity(d.len(), d.len())),
            Storage::Dense(m) => {
                let e = SymmetricEigen::new(m.clone());
                (e.eigenvalues.as_slice().to_vec(), e.eigenvectors)
            }
        }
    }
}

fn spectral_apply(vals: &[f64], vecs: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = vals.len();
    let mut out = DMatrix::<f64>::zeros(n, n);
    for (k, &v) in vals.iter().enumerate() {
        let w = f(v);
        if w == 0.0 {
            continue;
        }
        let col = vecs.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += w * col[i] * col[j];
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
enum Factor {
    Dense(DMatrix<f64>),
    /// The pivots themselves (the squared factor).
    Diagonal(Vec<f64>),
}

/// Lower-triangular Cholesky factor `M = L L^T`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    factor: Factor,
}

impl Cholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        match &self.factor {
            Factor::Diagonal(d) => b.iter().zip(d).map(|(b, d)| b / d).collect(),
            Factor::Dense(l) => {
                let n = l.nrows();
                let mut y = b.to_vec();
                for i in 0..n {
                    let mut s = y[i];
                    for k in 0..i {
                        s -= l[(i, k)] * y[k];
                    }
                    y[i] = s / l[(i, i)];
                }
                for i in (0..n).rev() {
                    let mut s = y[i];
                    for k in (i + 1)..n {
                        s -= l[(k, i)] * y[k];
                    }
                    y[i] = s / l[(i, i)];
                }
                y
            }
        }
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        match &self.factor {
            Factor::Diagonal(d) => {
                DMatrix::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|d| 1.0 / d)))
            }
            Factor::Dense(l) => {
                let n = l.nrows();
                let mut inv = DMatrix::<f64>::zeros(n, n);
                let mut e = vec![0.0; n];
                for j in 0..n {
                    e.iter_mut().for_each(|x| *x = 0.0);
                    e[j] = 1.0;
                    let col = self.solve(&e);
                    for i in 0..n {
                        inv[(i, j)] = col[i];
                    }
                }
                // symmetrize
                for i in 0..n {
                    for j in (i + 1)..n {
                        let avg = 0.5 * (inv[(i, j)] + inv[(j, i)]);
                        inv[(i, j)] = avg;
                        inv[(j, i)] = avg;
                    }
                }
                inv
            }
        }
    }

    pub fn log_det(&self) -> f64 {
        match &self.factor {
            Factor::Diagonal(d) => d.iter().map(|d| d.ln()).sum(),
            Factor::Dense(l) => (0..l.nrows()).map(|i| 2.0 * l[(i, i)].ln()).sum(),
        }
    }
}

/// True iff a Cholesky factorization succeeds with every pivot above
/// `1e-12 * (1 + max |diag|)`.
pub fn cholesky_pd_check(m: &SymmetricMatrix) -> bool {
    m.cholesky().is_some()
}

pub fn eigen_summary(m: &SymmetricMatrix) -> EigenSummary {
    let ev = m.eigenvalues();
    if ev.is_empty() {
        return EigenSummary {
            lambda_min: 0.0,
            lambda_max: 0.0,
            rank: 0,
        };
    }
    let lambda_min = ev[0];
    let lambda_max = ev[ev.len() - 1];
    let cutoff = RANK_RTOL * (1.0 + lambda_max.abs());
    let rank = ev.iter().filter(|v| v.abs() > cutoff).count();
    EigenSummary {
        lambda_min,
        lambda_max,
        rank,
    }
}

/// Moore-Penrose solve `y = M^+ b`. Positive definite dense matrices are
/// solved by Cholesky, everything else through the symmetric
/// eigendecomposition.
///
/// Eigenvalues with magnitude below `1e-10 * max |lambda|` are dropped. The
/// flag reports whether `b` lies in the column space of `M`.
pub fn pseudo_solve(m: &SymmetricMatrix, b: &[f64]) -> (Vec<f64>, bool) {
    assert_eq!(m.dim(), b.len(), "pseudo_solve: dimension mismatch");
    let chol = matches!(m.storage, Storage::Dense(_)).then(|| m.cholesky()).flatten();
    let y = match &m.storage {
        _ if chol.is_some() => chol.expect("checked").solve(b),
        Storage::Diagonal(d) => {
            let scale = d.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
            let cutoff = RANK_RTOL * scale;
            d.iter()
                .zip(b)
                .map(|(&di, &bi)| if di.abs() > cutoff && di != 0.0 { bi / di } else { 0.0 })
                .collect::<Vec<_>>()
        }
        Storage::Dense(_) => {
            let (vals, vecs) = m.eigen_pairs();
            let scale = vals.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
            let cutoff = RANK_RTOL * scale;
            let n = b.len();
            let mut y = vec![0.0; n];
            for (k, &lam) in vals.iter().enumerate() {
                if lam.abs() <= cutoff || lam == 0.0 {
                    continue;
                }
                let col = vecs.column(k);
                let proj: f64 = (0..n).map(|i| col[i] * b[i]).sum::<f64>() / lam;
                for i in 0..n {
                    y[i] += proj * col[i];
                }
            }
            y
        }
    };
    let my = m.mul_vec(&y);
    let resid = norm2(&my.iter().zip(b).map(|(a, c)| a - c).collect::<Vec<_>>());
    let in_col = resid <= COLUMN_SPACE_RTOL * (1.0 + norm2(b));
    (y, in_col)
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
