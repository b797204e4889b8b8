//! Check records and the JSON report.

use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// A requested object was found, e.g. a triviality potential.
    Witness,
    /// A bounded search found nothing; says nothing beyond the bound.
    NoneUpToBound,
    Skipped,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Witness => "witness",
            Verdict::NoneUpToBound => "none-up-to-bound",
            Verdict::Skipped => "skipped",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub detail: Value,
    pub runtime: Duration,
}

impl Check {
    pub fn new(name: impl Into<String>, verdict: Verdict, detail: Value) -> Self {
        Check { name: name.into(), verdict, detail, runtime: Duration::ZERO }
    }
}

/// Contraction order and sign conventions the verdicts depend on. Bump the
/// version whenever one of them is re-pinned.
pub fn conventions() -> Value {
    json!({
        "version": 1,
        "contraction": "i(U^V) = i(V) o i(U): the lowest index is applied first, so <dx^dy, @x^@y> = 1",
        "lie_derivative": "L_X = i_X d - (-1)^|X| d i_X",
        "lie_schouten": "(-1)^((|X|-1)|Y|) L_X i_Y - i_Y L_X = i_[X,Y]",
        "hamiltonian": "{f,g} = P(df,dg), X_f(g) = {g,f}",
        "distribution_bracket": "<{f,Phi}, g> = -<Phi, {f,g}>",
        "leaf_delta": "f -> integral of f * omega_N^k, N oriented by omega_N^k, no 1/k!",
    })
}

pub struct Settings {
    pub subcommand: String,
    pub degree_bound: u32,
    pub tolerance: f64,
    pub quadrature_order: usize,
    pub seed: u64,
}

pub fn render(manifest_name: &str, digest: &str, settings: &Settings, checks: &[Check], timings: bool) -> String {
    let mut sorted: Vec<&Check> = checks.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    let records: Vec<Value> = sorted
        .iter()
        .map(|c| {
            let mut r = json!({ "name": c.name, "verdict": c.verdict.as_str(), "detail": c.detail });
            if timings {
                r["runtime_ms"] = json!(c.runtime.as_secs_f64() * 1e3);
            }
            r
        })
        .collect();
    let count = |v: Verdict| checks.iter().filter(|c| c.verdict == v).count();
    let report = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "manifest": { "name": manifest_name, "sha256": digest },
        "conventions": conventions(),
        "settings": {
            "subcommand": settings.subcommand,
            "degree_bound": settings.degree_bound,
            "tolerance": settings.tolerance,
            "quadrature_order": settings.quadrature_order,
            "seed": settings.seed,
        },
        "checks": records,
        "summary": {
            "pass": count(Verdict::Pass),
            "fail": count(Verdict::Fail),
            "witness": count(Verdict::Witness),
            "none-up-to-bound": count(Verdict::NoneUpToBound),
            "skipped": count(Verdict::Skipped),
        },
    });
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}

/// Any failed verdict makes the run fail; searches that came up empty and
/// skipped checks do not.
pub fn failed(checks: &[Check]) -> bool {
    checks.iter().any(|c| c.verdict == Verdict::Fail)
}
