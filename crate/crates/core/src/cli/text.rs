use std::fmt::Write;

use super::{
    DecoupledReport, GradcheckReport, OracleReport, Report, ReproduceReport, RunReport,
};
use crate::solver::SolveReport;

/// Formats `x` with six significant digits in the style of C's `%g`.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{}{:02}", trim(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn vec_g(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| fmt_g(x)).collect();
    format!("({})", parts.join(", "))
}

pub(super) fn render(run: &RunReport, verbose: bool) -> String {
    let mut s = String::new();
    if let Some(d) = &run.instance_digest {
        let _ = writeln!(s, "instance        {}", &d[..d.len().min(16)]);
    }
    match &run.report {
        Report::Solve(r) => solve(&mut s, r, verbose),
        Report::Oracle(r) => oracle(&mut s, r),
        Report::Decoupled(r) => decoupled(&mut s, r),
        Report::Reproduce(r) => reproduce(&mut s, r),
        Report::Gradcheck(r) => gradcheck(&mut s, r),
    }
    if let Some(ms) = run.wall_time_ms {
        let _ = writeln!(s, "wall time       {ms} ms");
    }
    s
}

fn solve(s: &mut String, r: &SolveReport, verbose: bool) {
    let _ = writeln!(s, "sigma0          {}", fmt_g(r.dual.sigma0));
    let _ = writeln!(s, "sigma1          {}", vec_g(&r.dual.sigma1));
    let _ = writeln!(s, "sigma2          {}", vec_g(&r.sigma2));
    let _ = writeln!(s, "lambda_min(G)   {}", fmt_g(r.lambda_min_g));
    let _ = writeln!(s, "x               {}", vec_g(&r.primal.x));
    let _ = writeln!(s, "v               {}", vec_g(&r.primal.v));
    let _ = writeln!(s, "dual value      {}", fmt_g(r.dual_value));
    let _ = writeln!(s, "primal value    {}", fmt_g(r.primal_value));
    let _ = writeln!(s, "gap             {}", fmt_g(r.gap));
    let _ = writeln!(s, "certificate     {:?}", r.certificate);
    let _ = writeln!(
        s,
        "uniqueness      A,B diagonal: {}, c nowhere zero: {}",
        r.uniqueness_flags.a_b_diagonal, r.uniqueness_flags.c_nowhere_zero
    );
    if verbose {
        let k = &r.kkt;
        let _ = writeln!(s, "kkt xi          {}", fmt_g(k.xi));
        let _ = writeln!(s, "kkt eps1        {}", vec_g(&k.eps1));
        let _ = writeln!(s, "kkt eps2        {}", vec_g(&k.eps2));
        let _ = writeln!(s, "kkt comp        {} {}", fmt_g(k.comp1), fmt_g(k.comp2));
        let _ = writeln!(s, "kkt max viol.   {}", fmt_g(k.max_violation));
        let _ = writeln!(s, "iterations      {} (converged: {})", r.iterations, r.converged);
    }
}

fn oracle(s: &mut String, r: &OracleReport) {
    let _ = writeln!(s, "value           {}", fmt_g(r.value));
    let _ = writeln!(s, "x               {}", vec_g(&r.primal.x));
    let _ = writeln!(s, "v               {}", vec_g(&r.primal.v));
    let _ = writeln!(s, "starts          {} (seed {})", r.n_starts, r.seed);
    if let Some(subs) = &r.subproblems {
        let _ = writeln!(s, "per-v minima:");
        for sub in subs {
            let _ = writeln!(s, "  v={}  value={}  x={}", vec_g(&sub.v), fmt_g(sub.value), vec_g(&sub.x));
        }
    }
}

fn decoupled(s: &mut String, r: &DecoupledReport) {
    let c = &r.candidates;
    let _ = writeln!(s, "sigma0*         {}", fmt_g(c.sigma0_star));
    let _ = writeln!(s, "  i  M_i                      N_i");
    for (i, (m, n)) in c.m.iter().zip(&c.n).enumerate() {
        let _ = writeln!(
            s,
            "{:>3}  {:<24} {}",
            i + 1,
            format!("{{{}, {}}}", fmt_g(m[0]), fmt_g(m[1])),
            format!("{{{}, {}}}", fmt_g(n[0]), fmt_g(n[1]))
        );
    }
    match &r.solution {
        Some(sol) => {
            let _ = writeln!(s, "closed form     applies");
            let _ = writeln!(s, "sigma1          {}", vec_g(&sol.dual.sigma1));
            let _ = writeln!(s, "sigma2          {}", vec_g(&sol.dual.sigma2));
            let _ = writeln!(s, "x               {}", vec_g(&sol.primal.x));
            let _ = writeln!(s, "v               {}", vec_g(&sol.primal.v));
            let _ = writeln!(s, "value           {}", fmt_g(sol.value));
        }
        None => {
            let _ = writeln!(s, "closed form     not applicable");
        }
    }
}

fn reproduce(s: &mut String, r: &ReproduceReport) {
    for ex in &r.examples {
        let _ = writeln!(s, "Example {}: {}", ex.id, verdict(ex.pass));
        for c in &ex.checks {
            let _ = writeln!(
                s,
                "  {:<4} {:<16} expected {:<12} got {:<12} tol {}",
                verdict(c.pass),
                c.field,
                fmt_g(c.expected),
                fmt_g(c.got),
                fmt_g(c.tol)
            );
        }
    }
    let passed = r.examples.iter().filter(|e| e.pass).count();
    let _ = writeln!(s, "{}/{} {}", passed, r.examples.len(), verdict(r.pass));
}

fn gradcheck(s: &mut String, r: &GradcheckReport) {
    let _ = writeln!(s, "samples         {}", r.samples);
    let _ = writeln!(s, "gradient error  {}", fmt_g(r.max_rel_error_gradient));
    let _ = writeln!(s, "hessian error   {}", fmt_g(r.max_rel_error_hessian));
    let _ = writeln!(s, "result          {}", verdict(r.pass));
}

pub(super) fn worst_point(r: &GradcheckReport) -> String {
    match &r.worst_point {
        Some(p) => format!(
            "sigma0={} sigma1={} sigma2={}",
            fmt_g(p.sigma0),
            vec_g(&p.sigma1),
            vec_g(&p.sigma2)
        ),
        None => "none".into(),
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

#[cfg(test)]
mod tests {
    use super::fmt_g;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_g(-75.875), "-75.875");
        assert_eq!(fmt_g(1.586935123), "1.58694");
        assert_eq!(fmt_g(-51.72806432), "-51.7281");
        assert_eq!(fmt_g(5.0), "5");
        assert_eq!(fmt_g(123456789.0), "1.23457e+08");
        assert_eq!(fmt_g(5.66e-7), "5.66e-07");
        assert_eq!(fmt_g(0.0001234), "0.0001234");
        assert_eq!(fmt_g(999999.7), "1e+06");
    }
}
