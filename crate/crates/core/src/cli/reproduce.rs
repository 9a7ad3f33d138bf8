use serde::{Deserialize, Serialize};

use crate::decoupled::{decoupled_candidates, theorem5_solve};
use crate::error::Result;
use crate::fixtures::{self, Example, VectorField};
use crate::solver::{solve, Certificate, SolverConfig};

/// Gap tolerance for the examples whose optimum is an exact rational.
const EXACT_GAP: f64 = 1e-8;
const TABLE_ENTRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldCheck {
    pub field: String,
    pub expected: f64,
    pub got: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleCheck {
    pub id: usize,
    pub checks: Vec<FieldCheck>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceReport {
    pub examples: Vec<ExampleCheck>,
    pub pass: bool,
}

#[derive(Default)]
struct Checks(Vec<FieldCheck>);

impl Checks {
    fn scalar(&mut self, field: impl Into<String>, expected: f64, got: f64, tol: f64) {
        let pass = (expected - got).abs() <= tol;
        self.0.push(FieldCheck {
            field: field.into(),
            expected,
            got: finite(got),
            tol,
            pass,
        });
    }

    fn upper(&mut self, field: &str, bound: f64, got: f64) {
        self.0.push(FieldCheck {
            field: field.into(),
            expected: 0.0,
            got: finite(got),
            tol: bound,
            pass: got.abs() <= bound,
        });
    }

    fn flag(&mut self, field: &str, expected: bool, got: bool) {
        let b = |x: bool| if x { 1.0 } else { 0.0 };
        self.scalar(field, b(expected), b(got), 0.0);
    }

    fn vector(&mut self, name: &str, want: &VectorField, got: &[f64]) {
        for (i, &w) in want.values.iter().enumerate() {
            if !want.skip.contains(&i) {
                let g = got.get(i).copied().unwrap_or(f64::MAX);
                self.scalar(format!("{name}[{}]", i + 1), w, g, want.tol);
            }
        }
    }
}

fn finite(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::MAX.copysign(x)
    }
}

fn check_example(ex: &Example, cfg: &SolverConfig) -> Result<ExampleCheck> {
    let inst = ex.instance();
    let want = &ex.expected;
    let r = solve(&inst, cfg)?;
    let mut c = Checks::default();

    c.scalar("sigma0", want.sigma0.value, r.dual.sigma0, want.sigma0.tol);
    c.vector("sigma1", &want.sigma1, &r.dual.sigma1);
    if let Some(s2) = &want.sigma2 {
        c.vector("sigma2", s2, &r.sigma2);
    }
    c.vector("x", &want.x, &r.primal.x);

    for (i, &w) in want.v.iter().enumerate() {
        c.scalar(format!("v[{}]", i + 1), w, r.primal.v[i], 0.0);
    }
    c.scalar("value", want.value.value, r.dual_value, want.value.tol);
    c.scalar("primal_value", want.value.value, r.primal_value, want.value.tol);
    if let Some(l) = want.lambda_min {
        c.scalar("lambda_min", l.value, r.lambda_min_g, l.tol);
    }
    let gap_tol = if want.closed_form == Some(true) { EXACT_GAP } else { cfg.gap_tol };
    c.upper("gap", gap_tol, r.gap);
    c.flag("certified", true, r.certificate == Certificate::GlobalOptimal);

    if let Some(table) = &want.candidates {
        let cand = decoupled_candidates(&inst)?;
        c.scalar("sigma0*", table.sigma0, cand.sigma0_star, TABLE_ENTRY_TOL);
        for i in 0..table.m.len() {
            for (b, side) in ["+", "-"].iter().enumerate() {
                c.scalar(format!("M{}{side}", i + 1), table.m[i][b], cand.m[i][b], TABLE_ENTRY_TOL);
                c.scalar(format!("N{}{side}", i + 1), table.n[i][b], cand.n[i][b], TABLE_ENTRY_TOL);
            }
        }
    }
    if let Some(applies) = want.closed_form {
        let sol = theorem5_solve(&inst)?;
        c.flag("closed_form", applies, sol.is_some());
        if let Some(sol) = sol {
            c.scalar("closed_form_value", want.value.value, sol.value, want.value.tol);
            c.vector("closed_form_x", &want.x, &sol.primal.x);
        }
    }

    let pass = c.0.iter().all(|f| f.pass);
    Ok(ExampleCheck {
        id: ex.id,
        checks: c.0,
        pass,
    })
}

/// Solves the embedded examples `ids` and compares every reference field.
pub fn reproduce(ids: &[usize], cfg: &SolverConfig) -> Result<ReproduceReport> {
    let examples = ids
        .iter()
        .map(|&k| check_example(&fixtures::example(k), cfg))
        .collect::<Result<Vec<_>>>()?;
    let pass = examples.iter().all(|e| e.pass);
    Ok(ReproduceReport { examples, pass })
}
