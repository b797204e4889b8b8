use poissonkit_core::distr::{pair, Pairing};
use poissonkit_core::sample::Sampler;
use poissonkit_core::{Distribution, KVector, Point, PoissonStructure, Rational, TestObject, Vars};
use proptest::prelude::*;

fn so3() -> (PoissonStructure, Vars) {
    let v = Vars::new(&["x1", "x2", "x3"]);
    let e = |s: &str| v.parse(s).unwrap();
    let ps = PoissonStructure::from_entries(3, &[(0, 1, e("x3")), (0, 2, e("-x2")), (1, 2, e("x1"))]).unwrap();
    (ps, v)
}

fn deformed_plane(phi: &str) -> (PoissonStructure, Vars) {
    let v = Vars::new(&["x", "y"]);
    let ps = PoissonStructure::from_entries(2, &[(0, 1, v.parse(phi).unwrap())]).unwrap();
    (ps, v)
}

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

#[test]
fn so3_structure_constants() {
    let (ps, v) = so3();
    assert!(ps.is_poisson());
    let b = |f: &str, g: &str| v.show(&ps.bracket(&v.parse(f).unwrap(), &v.parse(g).unwrap()).unwrap());
    assert_eq!(b("x1", "x2"), "x3");
    assert_eq!(b("x2", "x3"), "x1");
    assert_eq!(b("x3", "x1"), "x2");
    assert_eq!(b("x1^2 + x2^2 + x3^2", "x1*x2"), "0");
}

#[test]
fn hamiltonian_field_follows_bracket() {
    let (ps, v) = so3();
    let x = ps.hamiltonian_field(&v.parse("x3").unwrap());
    // X_f(g) = {g, f}, so X_{x3} = P^{13}∂1 + P^{23}∂2
    assert_eq!(x, KVector::parse("x1*@x2 - x2*@x1", &v).unwrap());
}

#[test]
fn dirac_pairs_by_evaluation() {
    let (_, v) = deformed_plane("x");
    let d = Distribution::dirac(Point::new(vec![q(2), q(-3)]));
    let f = v.parse("x^2*y + 1").unwrap();
    assert_eq!(pair(&d, &TestObject::Function(f)).unwrap(), Pairing::Exact(q(-11)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn so3_bracket_is_a_biderivation(seed in any::<u64>()) {
        let (ps, _) = so3();
        let mut s = Sampler::new(seed);
        let (f, g, h) = (s.poly(3, 2), s.poly(3, 2), s.poly(3, 2));
        let fg = ps.bracket(&f, &g).unwrap();
        prop_assert_eq!(fg.neg(), ps.bracket(&g, &f).unwrap());
        let lhs = ps.bracket(&f, &g.mul(&h)).unwrap();
        let rhs = ps.bracket(&f, &g).unwrap().mul(&h).add(&g.mul(&ps.bracket(&f, &h).unwrap()));
        prop_assert_eq!(lhs, rhs);
        let cyc = ps.bracket(&f, &ps.bracket(&g, &h).unwrap()).unwrap()
            .add(&ps.bracket(&g, &ps.bracket(&h, &f).unwrap()).unwrap())
            .add(&ps.bracket(&h, &ps.bracket(&f, &g).unwrap()).unwrap());
        prop_assert!(cyc.is_zero());
    }

    #[test]
    fn casimir_commutes_with_everything(seed in any::<u64>()) {
        let (ps, v) = so3();
        let c = v.parse("x1^2 + x2^2 + x3^2").unwrap();
        let f = Sampler::new(seed).poly(3, 3);
        prop_assert!(ps.bracket(&c, &f).unwrap().is_zero());
    }

    #[test]
    fn printed_expressions_parse_back(seed in any::<u64>()) {
        let v = Vars::new(&["x", "y", "z"]);
        let mut s = Sampler::new(seed);
        let (a, b) = (s.poly(3, 3), s.poly(3, 2));
        let e = if b.is_zero() { a } else { a.checked_div(&b).unwrap() };
        prop_assert_eq!(v.parse(&v.show(&e)).unwrap(), e);
    }

    #[test]
    fn distribution_bracket_is_adjoint(seed in any::<u64>(), x in -5i64..5, y in -5i64..5) {
        let (ps, _) = deformed_plane("x^2 + y^2");
        let mut s = Sampler::new(seed);
        let (f, g) = (s.poly(2, 3), s.poly(2, 3));
        let d = Distribution::dirac(Point::new(vec![q(x), q(y)]));
        let lhs = pair(&d.bracket(&ps, &f).unwrap(), &TestObject::Function(g.clone())).unwrap();
        let rhs = pair(&d, &TestObject::Function(ps.bracket(&f, &g).unwrap())).unwrap();
        match (lhs, rhs) {
            (Pairing::Exact(a), Pairing::Exact(b)) => prop_assert_eq!(a, -b),
            other => prop_assert!(false, "inexact pairing {:?}", other),
        }
    }
}

#[test]
fn bracket_distribution_matches_module_axiom_on_derivatives() {
    let (ps, v) = deformed_plane("x^2 + y^2");
    let origin = Point::new(vec![q(0), q(0)]);
    let d = Distribution::dirac_derivative(origin, vec![q(1), q(2)]).unwrap();
    let f = v.parse("x*y + y^3").unwrap();
    let g = v.parse("x^2 - 3*y").unwrap();
    let fg = f.mul(&g);
    // {fg, Φ} = f{g, Φ} + g{f, Φ}
    let lhs = d.bracket(&ps, &fg).unwrap();
    let rhs = d.bracket(&ps, &g).unwrap().multiply(&f).unwrap().add(&d.bracket(&ps, &f).unwrap().multiply(&g).unwrap()).unwrap();
    for t in ["1", "x", "y", "x*y", "x^3 + y"] {
        let t = TestObject::Function(v.parse(t).unwrap());
        assert_eq!(pair(&lhs, &t).unwrap(), pair(&rhs, &t).unwrap());
    }
}
