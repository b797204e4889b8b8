//! End-to-end acceptance: each criterion prints one pass/fail line, and the
//! test fails if any of them does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;

use poissonkit::manifest::{Manifest, Model, Overrides};
use poissonkit_core::distr::{
    delta_n_annihilator_check, describe_test, genc_check, leaf_delta_independence, pair_refined, transversal_delta_flatness, Primitive,
    INDEPENDENCE_TOL,
};
use poissonkit_core::identities::{self, Envelope};
use poissonkit_core::leaf::{bott_derivative_multi_point, bott_extension_probe, bott_flat_sections_point, Leaf, ParamLeaf};
use poissonkit_core::linalg;
use poissonkit_core::poisson::{delta_definitions_agree, delta_squared, star_conjugation};
use poissonkit_core::sample::Sampler;
use poissonkit_core::{Distribution, Expr, KVector, Point, Rational, TestObject};

type Outcome = Result<String, String>;

const BUNDLED: [&str; 7] =
    ["broken4", "plane", "plane_phi_1px2", "plane_phi_r2", "plane_phi_x", "r4", "so3"];

fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("manifests").join(format!("{}.json", name))
}

fn model(name: &str) -> Model {
    let text = std::fs::read_to_string(path(name)).unwrap();
    Model::build(Manifest::from_json(&text).unwrap(), Overrides::default()).unwrap()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn point_of(m: &Model, leaf: &str) -> Point {
    match &*m.leaves[leaf].leaf {
        Leaf::Point(p) => p.point().clone(),
        Leaf::Parameterized(_) => panic!("{} is not a point leaf", leaf),
    }
}

fn param_of(m: &Model, leaf: &str) -> std::sync::Arc<ParamLeaf> {
    m.leaves[leaf].param.clone().unwrap()
}

fn schouten_suite() -> Outcome {
    let env = Envelope::default();
    ensure(env.max_dim <= 4 && env.max_grade <= 3 && env.max_degree <= 2, "envelope too large")?;
    let mut s = Sampler::new(11);
    let mut lines = Vec::new();
    for (t, min) in [
        (identities::antisymmetry(&mut s, env, 200).unwrap(), 200),
        (identities::leibniz(&mut s, env, 200).unwrap(), 200),
        (identities::jacobi(&mut s, env, 200).unwrap(), 200),
        (identities::lie_schouten(&mut s, env, 100).unwrap(), 100),
    ] {
        ensure(t.passed() && t.cases >= min, format!("{}: {:?}", t.name, t))?;
        lines.push(format!("{} {}", t.name, t.cases));
    }
    Ok(lines.join(", "))
}

fn jacobi() -> Outcome {
    for name in ["so3", "plane_phi_x", "plane_phi_r2", "plane_phi_1px2"] {
        ensure(model(name).ps.jacobi_defect().is_zero(), format!("[P,P] != 0 for {}", name))?;
    }
    let broken = model("broken4");
    let d = broken.ps.jacobi_defect();
    ensure(!d.is_zero(), "broken bivector passes")?;
    Ok(format!("four Poisson manifests vanish, broken4 gives {}", d.display(&broken.vars)))
}

fn canonical_delta() -> Outcome {
    let mut s = Sampler::new(3);
    for name in ["so3", "plane_phi_r2", "r4"] {
        let ps = &model(name).ps;
        let agree = delta_definitions_agree(ps, &mut s, 100, 2).unwrap();
        ensure(agree.passed() && agree.cases >= 100, format!("definitions on {}: {:?}", name, agree))?;
        let sq = delta_squared(ps, &mut s, 100, 2).unwrap();
        ensure(sq.passed() && sq.cases >= 100, format!("square on {}: {:?}", name, sq))?;
    }
    let mut star_cases = Vec::new();
    for name in ["plane", "r4"] {
        let t = star_conjugation(&model(name).ps, 3).unwrap();
        ensure(t.passed() && t.cases > 0, format!("star conjugation on {}: {:?}", name, t))?;
        star_cases.push(t.cases);
    }
    Ok(format!("star conjugation exhaustive on {:?} basis forms", star_cases))
}

fn modular() -> Outcome {
    let m = model("plane_phi_r2");
    let w = &m.volumes["standard"].form;
    let mu = m.ps.modular_field(w).unwrap();
    let want = vec![m.vars.parse("-2*y").unwrap(), m.vars.parse("2*x").unwrap()];
    ensure(mu.field.components() == want, format!("mu = {}", mu.field.display(&m.vars)))?;
    ensure(m.ps.sigma(&mu.field).unwrap().is_zero(), "sigma(mu) != 0")?;
    ensure(m.ps.modular_triviality_witness(w, 8).unwrap().is_none(), "potential found below degree 8")?;
    let so3 = model("so3");
    let psi = so3.ps.modular_triviality_witness(&so3.volumes["standard"].form, 8).unwrap();
    ensure(psi == Some(Expr::zero()), format!("so3 potential {:?}", psi))?;
    Ok(format!("mu = {}, no potential up to degree 8, so3 psi = 0", mu.field.display(&m.vars)))
}

fn span_eq(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> bool {
    let both: Vec<Vec<Rational>> = a.iter().chain(b).cloned().collect();
    let r = linalg::rank(&both, 2);
    linalg::rank(&a.to_vec(), 2) == r && linalg::rank(&b.to_vec(), 2) == r
}

fn bott_flat_sections() -> Outcome {
    let mx = model("plane_phi_x");
    let x0 = point_of(&mx, "origin");
    let flat = bott_flat_sections_point(&mx.ps, &x0).unwrap();
    ensure(flat.len() == 1 && span_eq(&flat, &[vec![q(0), q(1)]]), format!("phi = x: {:?}", flat))?;
    let mr = model("plane_phi_r2");
    let flat_r = bott_flat_sections_point(&mr.ps, &x0).unwrap();
    ensure(flat_r.len() == 2, format!("phi = r^2: {:?}", flat_r))?;
    for m in [&mx, &mr] {
        let t = bott_extension_probe(&m.ps, &x0, &mut Sampler::new(5), 50).unwrap();
        ensure(t.passed() && t.cases >= 50, format!("extension probe: {:?}", t))?;
    }
    Ok("span{@y} for phi = x, full plane for phi = x^2 + y^2, 50 extensions each".into())
}

fn bott_multivector() -> Outcome {
    let m = model("plane_phi_x");
    let x0 = point_of(&m, "origin");
    let u = KVector::parse("@x^@y", &m.vars).unwrap();
    let along_x = bott_derivative_multi_point(&m.ps, &x0, &[q(1), q(0)], &u, None, &Expr::var(0)).unwrap();
    let along_y = bott_derivative_multi_point(&m.ps, &x0, &[q(0), q(1)], &u, None, &Expr::var(1)).unwrap();
    ensure(along_x.is_zero(), format!("nabla_dx = {}", along_x.display(&m.vars)))?;
    ensure(along_y == u.neg(), format!("nabla_dy = {}", along_y.display(&m.vars)))?;
    Ok(format!("nabla_dx = 0, nabla_dy = {}", along_y.display(&m.vars)))
}

fn generalized_center() -> Outcome {
    let m = model("plane_phi_r2");
    let origin = Point::new(vec![q(0), q(0)]);
    let mut total = 0;
    let mut cands = vec![Distribution::dirac(origin.clone())];
    for v in [[1, 0], [0, 1], [2, -3], [-5, 7]] {
        cands.push(Distribution::dirac_derivative(origin.clone(), vec![q(v[0]), q(v[1])]).unwrap());
    }
    for d in &cands {
        let r = genc_check(&m.ps, d, 6, 0.0).unwrap();
        ensure(r.passed && r.exact && r.degree_bound == 6, format!("{:?}", r.violation))?;
        total += r.pairs_tested;
    }
    let off = genc_check(&m.ps, &Distribution::dirac(Point::new(vec![q(1), q(0)])), 6, 0.0).unwrap();
    let (f, g) = off.violation.clone().ok_or("Dirac at (1,0) passes")?;
    ensure(!off.passed, "Dirac at (1,0) passes")?;
    Ok(format!("{} exact pairs, Dirac at (1,0) violated by ({}, {})", total, m.vars.show(&f), describe_test(&g, &m.vars)))
}

fn leaf_delta() -> Outcome {
    let m = model("so3");
    let unit = param_of(&m, "unit_sphere");
    let delta = Distribution::leaf_delta(unit.clone());
    let total = pair_refined(&m.ps, &delta, &TestObject::Function(Expr::one())).unwrap();
    let four_pi = 4.0 * std::f64::consts::PI;
    let err = (total.value.to_f64().abs() - four_pi).abs();
    ensure(err <= 1e-6, format!("<delta_N, 1> = {}", total.value.to_f64()))?;
    let g = genc_check(&m.ps, &delta, 3, 1e-8).unwrap();
    ensure(g.passed && g.worst <= 1e-8, format!("bracket residual {}", g.worst))?;
    let r2 = param_of(&m, "sphere_r2");
    let fs = [m.vars.parse("4 - x1^2 - x2^2 - x3^2").unwrap(), m.vars.parse("x1^2 + x2^2 + x3^2 - 1").unwrap()];
    let ind = leaf_delta_independence(&[unit, r2], &fs).unwrap();
    ensure(ind.rank == 2 && INDEPENDENCE_TOL <= 1e-6, format!("rank {} sv {:?}", ind.rank, ind.singular_values))?;
    Ok(format!(
        "|<delta_N,1> - 4pi| = {:.1e} (refinement {:.1e}), bracket residual {:.1e} over {} pairs, rank 2",
        err,
        total.estimate(),
        g.worst,
        g.pairs_tested
    ))
}

fn annihilator() -> Outcome {
    let m = model("so3");
    let unit = param_of(&m, "unit_sphere");
    let rot = KVector::parse("x1*@x2 - x2*@x1", &m.vars).unwrap();
    let r = delta_n_annihilator_check(&m.ps, &unit, &rot, 3, 1e-8).unwrap();
    ensure(r.tangent && r.annihilates && r.pairing_worst <= 1e-8, format!("rotation: {}", r.pairing_worst))?;
    let radial = KVector::parse("x1*@x1 + x2*@x2 + x3*@x3", &m.vars).unwrap();
    let s = delta_n_annihilator_check(&m.ps, &unit, &radial, 3, 1e-8).unwrap();
    ensure(!s.tangent, "radial field passes tangency")?;
    Ok(format!("rotation residual {:.1e}, radial tangency defect {:.1e}", r.pairing_worst, s.tangency_worst))
}

fn flatness() -> Outcome {
    let mut cases = Vec::new();
    for name in BUNDLED {
        let m = model(name);
        for (dname, d) in &m.distributions {
            let [(_, Primitive::TransversalDelta(leaf, u))] = d.distribution.terms() else { continue };
            let Leaf::Point(_) = &**leaf else { continue };
            let r = transversal_delta_flatness(&m.ps, leaf, u, 3, 1e-8).unwrap();
            ensure(r.agree() && r.exact, format!("{}/{} disagree: {:?} vs {:?}", name, dname, r.direct_casimir, r.bott_flat))?;
            cases.push((format!("{}/{}", name, dname), r.direct_casimir));
        }
    }
    // φ = x: ∇_{dy} does not kill ∂x∧∂y; φ = x²+y²: φ'(0) = 0
    let want = [("plane_phi_r2/transversal_area", true), ("plane_phi_x/transversal_area", false)];
    for (name, flat) in want {
        ensure(cases.iter().any(|(n, c)| n == name && *c == flat), format!("{} should be flat = {}", name, flat))?;
    }
    Ok(format!("{} point-leaf cases agree: {:?}", cases.len(), cases))
}

fn cli_determinism() -> Outcome {
    let mut codes = Vec::new();
    for name in BUNDLED {
        let p = path(name);
        let go = || Command::new(env!("CARGO_BIN_EXE_poissonkit")).args(["all", "--manifest"]).arg(&p).output().unwrap();
        let (a, b) = (go(), go());
        ensure(a.stdout == b.stdout, format!("{} differs between runs", name))?;
        let want = if name == "broken4" { 1 } else { 0 };
        ensure(a.status.code() == Some(want), format!("{} exits {:?}", name, a.status.code()))?;
        codes.push(format!("{}={}", name, want));
    }
    Ok(codes.join(" "))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("schouten identities", schouten_suite),
        ("jacobi", jacobi),
        ("canonical delta", canonical_delta),
        ("modular field", modular),
        ("bott flat sections", bott_flat_sections),
        ("bott multivector derivative", bott_multivector),
        ("generalized center", generalized_center),
        ("leaf delta", leaf_delta),
        ("leaf delta annihilator", annihilator),
        ("transversal flatness", flatness),
        ("cli determinism and exit codes", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match res {
            Ok(msg) => println!("criterion {:2} PASS {}: {}", i + 1, name, msg),
            Err(msg) => {
                failed += 1;
                println!("criterion {:2} FAIL {}: {}", i + 1, name, msg);
            }
        }
    }
    assert_eq!(failed, 0, "{} criteria failed", failed);
}
