//! The verification suites behind each subcommand.

use std::time::Instant;

use anyhow::Result;
use poissonkit_core::distr::{
    delta_n_annihilator_check, describe_test, genc_check, leaf_delta_independence, pair_refined, transversal_delta_flatness,
    Primitive, TestObject,
};
use poissonkit_core::identities::{self, Envelope, Tally};
use poissonkit_core::leaf::{
    bott_derivative_multi_point, bott_derivative_point, bott_extension_probe, bott_flat_sections_point, symplectic_consistency,
    Leaf,
};
use poissonkit_core::linalg;
use poissonkit_core::poisson::{delta_definitions_agree, delta_squared, modular_properties, star_conjugation, star_squared_signs};
use poissonkit_core::sample::Sampler;
use poissonkit_core::{Expr, KVector, Rational};
use serde_json::{json, Value};

use crate::manifest::{Model, ProbeOutcome};
use crate::report::{Check, Verdict};

/// Random cases per Schouten identity; the Lie–Schouten identity and the
/// δ checks use `CASES / 2`.
pub const CASES: usize = 200;
/// Random extensions in the Bott extension-independence probe.
pub const PROBE_CASES: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Jacobi,
    SchoutenSuite,
    DeltaSuite,
    Modular,
    Casimirs,
    Bott,
    Genc,
    Leafdelta,
    Flatness,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Jacobi,
        Suite::SchoutenSuite,
        Suite::DeltaSuite,
        Suite::Modular,
        Suite::Casimirs,
        Suite::Bott,
        Suite::Genc,
        Suite::Leafdelta,
        Suite::Flatness,
    ];

    pub fn run(self, m: &Model) -> Vec<Check> {
        match self {
            Suite::Jacobi => vec![timed("jacobi", || jacobi(m))],
            Suite::SchoutenSuite => schouten_suite(m),
            Suite::DeltaSuite => delta_suite(m),
            Suite::Modular => modular(m),
            Suite::Casimirs => vec![timed("casimirs", || casimirs(m))],
            Suite::Bott => bott(m),
            Suite::Genc => genc(m),
            Suite::Leafdelta => leafdelta(m),
            Suite::Flatness => flatness(m),
        }
    }
}

/// Runs `f`, recording its runtime; an error becomes a failed check.
fn timed(name: &str, f: impl FnOnce() -> Result<(Verdict, Value)>) -> Check {
    let start = Instant::now();
    let mut c = match f() {
        Ok((v, detail)) => Check::new(name, v, detail),
        Err(e) => Check::new(name, Verdict::Fail, json!({ "error": format!("{:#}", e) })),
    };
    c.runtime = start.elapsed();
    c
}

fn tally(t: &Tally) -> (Verdict, Value) {
    (
        Verdict::from_bool(t.passed()),
        json!({ "cases": t.cases, "failures": t.failures, "first_failure": t.first_failure }),
    )
}

fn show_vector(m: &Model, v: &KVector) -> String {
    format!("{}", v.display(&m.vars))
}

fn show_rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(|r| r.to_string()).collect()
}

fn jacobi(m: &Model) -> Result<(Verdict, Value)> {
    let defect = m.ps.jacobi_defect();
    let mut detail = json!({ "schouten_p_p": show_vector(m, &defect) });
    if let Some((f, g, h, s)) = m.ps.jacobi_violation(1) {
        detail["violating_triple"] = json!([m.vars.show(&f), m.vars.show(&g), m.vars.show(&h)]);
        detail["jacobiator"] = json!(m.vars.show(&s));
    }
    Ok((Verdict::from_bool(defect.is_zero()), detail))
}

type IdentityCheck = fn(&mut Sampler, Envelope, usize) -> poissonkit_core::Result<Tally>;

fn envelope(m: &Model) -> Envelope {
    Envelope { max_dim: m.manifest.dim.clamp(1, 4), max_grade: 3, max_degree: 2 }
}

fn schouten_suite(m: &Model) -> Vec<Check> {
    let env = envelope(m);
    let seed = m.bounds.seed;
    let suites: [(&str, usize, IdentityCheck); 6] = [
        ("schouten/antisymmetry", CASES, identities::antisymmetry),
        ("schouten/leibniz", CASES, identities::leibniz),
        ("schouten/jacobi", CASES, identities::jacobi),
        ("schouten/lie-schouten", CASES / 2, identities::lie_schouten),
        ("schouten/monomial-formula", CASES / 2, identities::monomial_vs_leibniz),
        ("schouten/lie-commutes-with-d", CASES / 2, identities::lie_commutes_with_d),
    ];
    let mut out: Vec<Check> = suites
        .iter()
        .enumerate()
        .map(|(i, (name, cases, f))| {
            timed(name, || {
                let mut s = Sampler::new(seed.wrapping_add(i as u64));
                Ok(tally(&f(&mut s, env, *cases)?))
            })
        })
        .collect();
    out.push(timed("schouten/d-squared", || {
        let mut s = Sampler::new(seed.wrapping_add(suites.len() as u64));
        Ok(tally(&identities::d_squared(&mut s, env, CASES / 2)))
    }));
    out
}

fn delta_suite(m: &Model) -> Vec<Check> {
    let ps = &m.ps;
    let seed = m.bounds.seed;
    let mut out = vec![
        timed("delta/definitions-agree", || {
            Ok(tally(&delta_definitions_agree(ps, &mut Sampler::new(seed), CASES / 2, 2)?))
        }),
        timed("delta/squared", || Ok(tally(&delta_squared(ps, &mut Sampler::new(seed.wrapping_add(1)), CASES / 2, 2)?))),
    ];
    let nondegenerate = ps.dim() % 2 == 0 && !ps.pfaffian().is_zero();
    if nondegenerate {
        let deg = m.bounds.degree_bound.min(3);
        out.push(timed("delta/star-conjugation", || {
            let (v, mut d) = tally(&star_conjugation(ps, deg)?);
            d["coefficient_degree"] = json!(deg);
            let signs: Vec<Option<i8>> = star_squared_signs(ps)?;
            d["star_squared_signs"] = json!(signs);
            Ok((v, d))
        }));
    } else {
        out.push(Check::new("delta/star-conjugation", Verdict::Skipped, json!({ "reason": "bivector is degenerate" })));
    }
    out
}

fn modular(m: &Model) -> Vec<Check> {
    let ps = &m.ps;
    let bound = m.bounds.degree_bound;
    let n = ps.dim();
    let mut out = Vec::new();
    for (name, vol) in &m.volumes {
        out.push(timed(&format!("modular/{}/field", name), || {
            let mu = ps.modular_field(&vol.form)?;
            let comps = mu.field.components();
            let mut d = json!({ "components": comps.iter().map(|c| m.vars.show(c)).collect::<Vec<_>>() });
            let v = match &vol.expect_modular {
                Some(e) => {
                    d["expected"] = json!(e.iter().map(|c| m.vars.show(c)).collect::<Vec<_>>());
                    Verdict::from_bool(*e == comps)
                }
                None => Verdict::Pass,
            };
            d["sigma_mu_zero"] = json!(ps.sigma(&mu.field)?.is_zero());
            Ok((v, d))
        }));
        out.push(timed(&format!("modular/{}/properties", name), || Ok(tally(&modular_properties(ps, &vol.form, bound)?))));
        out.push(timed(&format!("modular/{}/change-of-volume", name), || {
            // a fixed positive rescaling, then every other declared volume
            let mut phis = vec![(0..n).fold(Expr::one(), |acc, i| acc.add(&Expr::var(i).mul(&Expr::var(i))))];
            for (other, w) in &m.volumes {
                let phi = w.form.density().checked_div(&vol.form.density())?;
                if other != name && !phis.contains(&phi) {
                    phis.push(phi);
                }
            }
            let mut ok = true;
            let mut rows = Vec::new();
            for phi in &phis {
                let holds = ps.modular_change_of_volume_check(&vol.form, phi, bound)?;
                ok &= holds;
                rows.push(json!({ "phi": m.vars.show(phi), "holds": holds }));
            }
            Ok((Verdict::from_bool(ok), json!({ "rescalings": rows, "degree_bound": bound })))
        }));
        out.push(timed(&format!("modular/{}/triviality", name), || {
            Ok(match ps.modular_triviality_witness(&vol.form, bound)? {
                Some(psi) => (Verdict::Witness, json!({ "psi": m.vars.show(&psi), "degree_bound": bound })),
                None => (Verdict::NoneUpToBound, json!({ "degree_bound": bound })),
            })
        }));
    }
    if m.volumes.is_empty() {
        out.push(Check::new("modular", Verdict::Skipped, json!({ "reason": "no volume forms declared" })));
    }
    out
}

fn casimirs(m: &Model) -> Result<(Verdict, Value)> {
    let bound = m.bounds.degree_bound;
    let basis = m.ps.casimir_scan(bound)?;
    let nonconstant = basis.iter().filter(|c| c.as_constant().is_none()).count();
    let v = if nonconstant > 0 { Verdict::Witness } else { Verdict::NoneUpToBound };
    Ok((v, json!({ "basis": basis.iter().map(|c| m.vars.show(c)).collect::<Vec<_>>(), "nonconstant": nonconstant, "degree_bound": bound })))
}

fn unit(n: usize, i: usize) -> Vec<Rational> {
    (0..n).map(|j| Rational::from_integer(((i == j) as i64).into())).collect()
}

/// Row spans of `a` and `b` coincide.
fn same_span(a: &[Vec<Rational>], b: &[Vec<Rational>], n: usize) -> bool {
    let both: Vec<Vec<Rational>> = a.iter().chain(b).cloned().collect();
    let r = linalg::rank(&both, n);
    linalg::rank(&a.to_vec(), n) == r && linalg::rank(&b.to_vec(), n) == r
}

fn bott(m: &Model) -> Vec<Check> {
    let ps = &m.ps;
    let n = ps.dim();
    let mut out = Vec::new();
    for (name, l) in &m.leaves {
        let Leaf::Point(pl) = &*l.leaf else { continue };
        let x0 = pl.point();
        out.push(timed(&format!("bott/{}/flat-sections", name), || {
            let flat = bott_flat_sections_point(ps, x0)?;
            let mut d = json!({ "basis": flat.iter().map(|v| show_rationals(v)).collect::<Vec<_>>() });
            let v = match &l.expect_flat_sections {
                Some(e) => {
                    d["expected"] = json!(e.iter().map(|v| show_rationals(v)).collect::<Vec<_>>());
                    Verdict::from_bool(same_span(&flat, e, n))
                }
                None => Verdict::Pass,
            };
            Ok((v, d))
        }));
        out.push(timed(&format!("bott/{}/derivatives", name), || {
            // ∇_{dx_i} ∂_j, extending dx_i by the coordinate function x_i
            let mut rows = Vec::new();
            for i in 0..n {
                let mut row = Vec::new();
                for j in 0..n {
                    row.push(show_rationals(&bott_derivative_point(ps, x0, &unit(n, i), &unit(n, j), &Expr::var(i))?));
                }
                rows.push(row);
            }
            Ok((Verdict::Pass, json!({ "nabla_dxi_dj": rows })))
        }));
        out.push(timed(&format!("bott/{}/extension-probe", name), || {
            let mut s = Sampler::new(m.bounds.seed);
            Ok(tally(&bott_extension_probe(ps, x0, &mut s, PROBE_CASES)?))
        }));
        out.push(timed(&format!("bott/{}/multivector", name), || {
            let top = KVector::basis(n, &(0..n).collect::<Vec<_>>(), Expr::one())?;
            let mut rows = Vec::new();
            for i in 0..n {
                let d = bott_derivative_multi_point(ps, x0, &unit(n, i), &top, None, &Expr::var(i))?;
                rows.push(show_vector(m, &d));
            }
            Ok((Verdict::Pass, json!({ "u": show_vector(m, &top), "nabla_dxi_u": rows })))
        }));
    }
    out
}

fn casimir_verdict(observed: bool, expect: Option<bool>) -> Verdict {
    match (expect.unwrap_or(true), observed) {
        (true, true) => Verdict::Pass,
        (false, false) => Verdict::Witness,
        _ => Verdict::Fail,
    }
}

fn genc(m: &Model) -> Vec<Check> {
    let b = &m.bounds;
    m.distributions
        .iter()
        .map(|(name, d)| {
            timed(&format!("genc/{}", name), || {
                let rep = genc_check(&m.ps, &d.distribution, b.degree_bound, b.tolerance)?;
                let violation = rep.violation.as_ref().map(|(f, t)| json!([m.vars.show(f), describe_test(t, &m.vars)]));
                Ok((
                    casimir_verdict(rep.passed, d.expect_casimir),
                    json!({
                        "casimir": rep.passed,
                        "expected_casimir": d.expect_casimir.unwrap_or(true),
                        "exact": rep.exact,
                        "degree_bound": rep.degree_bound,
                        "pairs_tested": rep.pairs_tested,
                        "worst_residual": rep.worst,
                        "violation": violation,
                    }),
                ))
            })
        })
        .collect()
}

fn leafdelta(m: &Model) -> Vec<Check> {
    let ps = &m.ps;
    let b = &m.bounds;
    let mut out = Vec::new();
    for (name, l) in &m.leaves {
        let Some(pl) = &l.param else { continue };
        let delta = poissonkit_core::Distribution::leaf_delta(pl.clone());
        out.push(timed(&format!("leafdelta/{}/total", name), || {
            let r = pair_refined(ps, &delta, &TestObject::Function(Expr::one()))?;
            let v = r.value.to_f64();
            Ok((
                Verdict::from_bool(r.estimate() <= b.tolerance * v.abs().max(1.0)),
                json!({ "value": v, "refined": r.refined.to_f64(), "estimate": r.estimate(), "order": pl.order() }),
            ))
        }));
        out.push(timed(&format!("leafdelta/{}/symplectic-form", name), || {
            let worst = symplectic_consistency(ps, pl, 2)?;
            Ok((Verdict::from_bool(worst <= b.tolerance), json!({ "worst": worst, "degree": 2 })))
        }));
        out.push(timed(&format!("leafdelta/{}/casimir", name), || {
            let rep = genc_check(ps, &delta, b.degree_bound, b.tolerance)?;
            Ok((
                Verdict::from_bool(rep.passed),
                json!({ "pairs_tested": rep.pairs_tested, "worst_residual": rep.worst, "degree_bound": rep.degree_bound }),
            ))
        }));
        for (probe, (field, expect)) in &l.probes {
            out.push(timed(&format!("leafdelta/{}/annihilator/{}", name, probe), || {
                let rep = delta_n_annihilator_check(ps, pl, field, b.degree_bound, b.tolerance)?;
                let outcome = if !rep.tangent {
                    ProbeOutcome::NotTangent
                } else if rep.annihilates {
                    ProbeOutcome::Annihilates
                } else {
                    ProbeOutcome::NotAnnihilating
                };
                let v = Verdict::from_bool(outcome == expect.unwrap_or(ProbeOutcome::Annihilates));
                Ok((
                    v,
                    json!({
                        "field": show_vector(m, field),
                        "outcome": outcome.as_str(),
                        "expected": expect.unwrap_or(ProbeOutcome::Annihilates).as_str(),
                        "pairing_worst": rep.pairing_worst,
                        "violation": rep.violation.as_ref().map(|f| m.vars.show(f)),
                        "tangency_worst": rep.tangency_worst,
                        "divergence_worst": rep.divergence_worst,
                        "divergence_integral": rep.divergence_integral,
                    }),
                ))
            }));
        }
    }
    if let Some((leaves, fs, expect)) = &m.independence {
        out.push(timed("leafdelta/independence", || {
            let rep = leaf_delta_independence(leaves, fs)?;
            let v = match expect {
                Some(r) => Verdict::from_bool(rep.rank == *r),
                None => Verdict::from_bool(rep.independent),
            };
            Ok((
                v,
                json!({
                    "matrix": rep.matrix,
                    "singular_values": rep.singular_values,
                    "rank": rep.rank,
                    "independent": rep.independent,
                }),
            ))
        }));
    }
    out
}

fn flatness(m: &Model) -> Vec<Check> {
    let b = &m.bounds;
    let mut out = Vec::new();
    for (name, d) in &m.distributions {
        let [(_, Primitive::TransversalDelta(leaf, u))] = d.distribution.terms() else { continue };
        out.push(timed(&format!("flatness/{}", name), || {
            let rep = transversal_delta_flatness(&m.ps, leaf, u, b.degree_bound, b.tolerance)?;
            let v = if rep.agree() { casimir_verdict(rep.direct_casimir, d.expect_casimir) } else { Verdict::Fail };
            Ok((
                v,
                json!({
                    "agree": rep.agree(),
                    "exact": rep.exact,
                    "direct_casimir": rep.direct_casimir,
                    "direct_worst": rep.direct_worst,
                    "direct_violation": rep.direct_violation.as_ref().map(|(f, a)| json!([m.vars.show(f), format!("{}", a.display(&m.vars))])),
                    "bott_flat": rep.bott_flat,
                    "bott_worst": rep.bott_worst,
                    "bott_violation": rep.bott_violation.as_ref().map(|f| m.vars.show(f)),
                    "expected_casimir": d.expect_casimir.unwrap_or(true),
                }),
            ))
        }));
    }
    out
}
