//! The eight reference instances, their expected results and the tolerance
//! at which each expected field is compared.

use crate::format::load_instance;
use crate::instance::ProblemInstance;

/// An expected vector, compared componentwise at `tol`; indices in `skip`
/// are not compared.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub values: Vec<f64>,
    pub tol: f64,
    pub skip: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarField {
    pub value: f64,
    pub tol: f64,
}

/// Candidate-set rows for a decoupled instance: `m[i]` and `n[i]` are
/// ordered (plus branch, minus branch).
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateTable {
    pub sigma0: f64,
    pub m: Vec<[f64; 2]>,
    pub n: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expected {
    pub sigma0: ScalarField,
    pub sigma1: VectorField,
    pub sigma2: Option<VectorField>,
    pub value: ScalarField,
    pub lambda_min: Option<ScalarField>,
    pub x: VectorField,
    pub v: Vec<f64>,
    pub candidates: Option<CandidateTable>,
    /// `Some(true)` when the closed-form decoupled solution applies,
    /// `Some(false)` when its conditions fail.
    pub closed_form: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: usize,
    pub json: &'static str,
    pub expected: Expected,
}

impl Example {
    pub fn instance(&self) -> ProblemInstance {
        load_instance(self.json).expect("embedded fixture is valid")
    }
}

pub const SOURCES: [&str; 8] = [
    include_str!("../fixtures/ex1.json"),
    include_str!("../fixtures/ex2.json"),
    include_str!("../fixtures/ex3.json"),
    include_str!("../fixtures/ex4.json"),
    include_str!("../fixtures/ex5.json"),
    include_str!("../fixtures/ex6.json"),
    include_str!("../fixtures/ex7.json"),
    include_str!("../fixtures/ex8.json"),
];

const EXACT: f64 = 1e-6;
const EXACT_LAMBDA: f64 = 1e-9;
const EXACT_X: f64 = 1e-8;
const TABLE: f64 = 1e-3;
const COMPONENT: f64 = 1e-2;

fn vf(values: &[f64], tol: f64) -> VectorField {
    VectorField {
        values: values.to_vec(),
        tol,
        skip: Vec::new(),
    }
}

fn sf(value: f64, tol: f64) -> ScalarField {
    ScalarField { value, tol }
}

fn pairs(rows: &[(f64, f64)]) -> Vec<[f64; 2]> {
    rows.iter().map(|&(a, b)| [a, b]).collect()
}

/// Reference example `k` in `1..=8`.
///
/// # Panics
/// When `k` is out of range.
pub fn example(k: usize) -> Example {
    assert!((1..=8).contains(&k), "example index {k} out of range 1..=8");
    let expected = match k {
        1 => Expected {
            sigma0: sf(-3.5, EXACT),
            sigma1: vf(&[7., 12., 6.25, 9., 5.], EXACT),
            sigma2: Some(vf(&[27., 24., 5.25, 10., 18.], EXACT)),
            value: sf(-75.875, EXACT),
            lambda_min: Some(sf(5.0, EXACT_LAMBDA)),
            x: vf(&[-1., -1., 1., 1., -1.], EXACT_X),
            v: vec![1.; 5],
            candidates: Some(CandidateTable {
                sigma0: -3.5,
                m: pairs(&[(7., -1.), (12., 3.), (-3.75, 6.25), (0., 9.), (5., 0.)]),
                n: pairs(&[(27., 19.), (24., 15.), (-4.75, 5.25), (1., 10.), (18., 13.)]),
            }),
            closed_form: Some(true),
        },
        2 => Expected {
            sigma0: sf(-2.5, EXACT),
            sigma1: vf(&[3.75, 4.75, 6., 6.75, 1.75, 7.75, 5.75, 8.25], EXACT),
            sigma2: Some(vf(&[16.75, 1.75, 9., 17.75, 11.75, 23.75, 21.75, 22.25], EXACT)),
            value: sf(-102.875, EXACT),
            lambda_min: Some(sf(1.0, EXACT_LAMBDA)),
            x: vf(&[1., -1., 1., -1., -1., 1., -1., 1.], EXACT_X),
            v: vec![1.; 8],
            candidates: Some(CandidateTable {
                sigma0: -2.5,
                m: pairs(&[
                    (-3.25, 3.75),
                    (4.75, -1.25),
                    (-2., 6.),
                    (6.75, 5.75),
                    (1.75, -3.25),
                    (-0.25, 7.75),
                    (5.75, -2.25),
                    (1.25, 8.25),
                ]),
                n: pairs(&[
                    (9.75, 16.75),
                    (1.75, -4.25),
                    (1., 9.),
                    (17.75, 16.75),
                    (11.75, 6.75),
                    (15.75, 23.75),
                    (21.75, 13.75),
                    (15.25, 22.25),
                ]),
            }),
            closed_form: Some(true),
        },
        3 => Expected {
            sigma0: sf(0.0, EXACT),
            sigma1: vf(&[8.5, 3., 1., 3., 1., 1.5, 6., 6.5, 7., 4.5], EXACT),
            sigma2: Some(vf(&[14.5, 4., 5., 16., 7., 16.5, 23., 26.5, 10., 20.5], EXACT)),
            value: sf(-212.0, EXACT),
            lambda_min: Some(sf(8.0, EXACT_LAMBDA)),
            x: vf(&[1., 1., -1., -1., -1., 1., -1., -1., -1., 1.], EXACT_X),
            v: vec![1.; 10],
            candidates: Some(CandidateTable {
                sigma0: 0.0,
                m: pairs(&[
                    (-10.5, 8.5),
                    (-11., 3.),
                    (1., -8.),
                    (3., -6.),
                    (1., -7.),
                    (-15.5, 1.5),
                    (6., -16.),
                    (6.5, -7.5),
                    (7., -1.),
                    (-13.5, 4.5),
                ]),
                n: pairs(&[
                    (-4.5, 14.5),
                    (-10., 4.),
                    (5., -4.),
                    (16., 7.),
                    (7., -1.),
                    (-0.5, 16.5),
                    (23., 1.),
                    (26.5, 12.5),
                    (10., 2.),
                    (2.5, 20.5),
                ]),
            }),
            closed_form: Some(true),
        },
        4 => Expected {
            sigma0: sf(-1.82, COMPONENT),
            sigma1: vf(&[0., 6.641, 3.051, 0.641, 4.231], COMPONENT),
            sigma2: None,
            value: sf(-51.7281, TABLE),
            lambda_min: Some(sf(2.3593, TABLE)),
            x: vf(&[0.424, -1., -1., 1., -1.], COMPONENT),
            v: vec![1.; 5],
            candidates: Some(CandidateTable {
                sigma0: -1.0,
                m: pairs(&[(-2.5, -1.5), (5., -4.), (1., -5.), (-4., -1.), (3., -2.)]),
                n: pairs(&[(2.5, 3.5), (9., 0.), (5., -1.), (16., 19.), (12., 7.)]),
            }),
            closed_form: Some(false),
        },
        5 => Expected {
            sigma0: sf(-7.0, TABLE),
            sigma1: VectorField {
                values: vec![4.5, 34.987, 3.5, 13., 54.367],
                tol: COMPONENT,
                skip: vec![1, 4],
            },
            sigma2: None,
            value: sf(32.5, TABLE),
            lambda_min: None,
            x: vf(&[1., 0., 1., -1., 0.], COMPONENT),
            v: vec![1., 0., 1., 1., 0.],
            candidates: None,
            closed_form: None,
        },
        6 => Expected {
            sigma0: sf(-4.0, TABLE),
            sigma1: VectorField {
                values: vec![11., 5.612, 5., 2.5, 12.5],
                tol: COMPONENT,
                skip: vec![1],
            },
            sigma2: None,
            value: sf(-40.5, TABLE),
            lambda_min: None,
            x: vf(&[1., 0., 1., -1., 1.], COMPONENT),
            v: vec![1., 0., 1., 1., 1.],
            candidates: None,
            closed_form: None,
        },
        7 => Expected {
            sigma0: sf(-0.5, COMPONENT),
            sigma1: vf(&[2.5, 9.75, 6.], COMPONENT),
            sigma2: None,
            value: sf(-33.875, TABLE),
            lambda_min: Some(sf(1.58694, TABLE)),
            x: vf(&[1., 1., 1.], COMPONENT),
            v: vec![1.; 3],
            candidates: None,
            closed_form: None,
        },
        _ => Expected {
            sigma0: sf(0.088, COMPONENT),
            sigma1: vf(&[0., 1.994, 0., 0., 0.], COMPONENT),
            sigma2: None,
            value: sf(-32.8777, TABLE),
            lambda_min: Some(sf(5.54327, TABLE)),
            x: vf(&[0.556, 0., 0.978, -0.174, -0.225], COMPONENT),
            v: vec![1., 0., 1., 1., 1.],
            candidates: None,
            closed_form: None,
        },
    };
    Example {
        id: k,
        json: SOURCES[k - 1],
        expected,
    }
}

pub fn all() -> Vec<Example> {
    (1..=8).map(example).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_load_and_match_shapes() {
        for ex in all() {
            let inst = ex.instance();
            let n = inst.n();
            let e = &ex.expected;
            assert_eq!(e.sigma1.values.len(), n, "example {}", ex.id);
            assert_eq!(e.x.values.len(), n);
            assert_eq!(e.v.len(), n);
            if let Some(t) = &e.candidates {
                assert_eq!(t.m.len(), n);
                assert_eq!(t.n.len(), n);
            }
        }
    }
}
