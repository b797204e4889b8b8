use super::*;
use alloc::vec;
use proptest::prelude::*;

fn xy() -> Vars {
    Vars::new(&["x", "y"])
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

#[test]
fn parse_reads_back_polynomial() {
    let v = xy();
    let e = v.parse("x^2+y^2").unwrap();
    let expect = Expr::var(0).powi(2).unwrap() + Expr::var(1).powi(2).unwrap();
    assert_eq!(e, expect);
    assert_eq!(v.show(&e), "x^2 + y^2");
}

#[test]
fn parse_cancels_common_factor() {
    let v = xy();
    assert_eq!(v.parse("(x^2-y^2)/(x-y)").unwrap(), v.parse("x+y").unwrap());
}

#[test]
fn parse_reports_offsets() {
    let v = Vars::new(&["x"]);
    assert!(matches!(v.parse("x+"), Err(Error::Syntax { offset: 2, .. })));
    assert!(matches!(v.parse("x + q"), Err(Error::UnknownIdentifier { offset: 4, .. })));
    assert!(matches!(v.parse("x^(1/2)"), Err(Error::NonIntegerExponent { offset: 2 })));
    assert!(matches!(v.parse("x^y"), Err(Error::UnknownIdentifier { .. })));
    assert!(matches!(v.parse("1/(x-x)"), Err(Error::ZeroDivisor { offset: 2 })));
    assert!(matches!(v.parse("2 $ x"), Err(Error::Syntax { offset: 2, .. })));
}

#[test]
fn parse_precedence_and_decimals() {
    let v = xy();
    assert_eq!(v.parse("-x^2").unwrap(), v.parse("-(x*x)").unwrap());
    assert_eq!(v.parse("2^-1").unwrap(), Expr::ratio(1, 2));
    assert_eq!(v.parse("2^3^2").unwrap(), Expr::integer(512));
    assert_eq!(v.parse("0.25*x").unwrap(), v.parse("x/4").unwrap());
    assert_eq!(v.parse("x/y/x").unwrap(), v.parse("1/y").unwrap());
}

#[test]
fn denominator_is_monic() {
    let v = xy();
    let e = v.parse("1/(2*x+4)").unwrap();
    assert_eq!(v.show(&e), "(1/2)/(x + 2)");
    assert_eq!(v.parse(&v.show(&e)).unwrap(), e);
}

#[test]
fn diff_examples() {
    let v = Vars::new(&["x", "y"]);
    let f = v.parse("x^2+y^2").unwrap();
    assert_eq!(v.diff(&f, "x").unwrap(), v.parse("2*x").unwrap());
    let g = v.parse("1/x").unwrap();
    assert_eq!(v.diff(&g, "x").unwrap(), v.parse("-1/x^2").unwrap());
    let h = v.parse("x*y").unwrap();
    assert_eq!(v.diff(&h, "z"), Err(Error::UnknownVariable("z".into())));
}

#[test]
fn eval_examples() {
    let v = xy();
    let f = v.parse("x^2+y^2").unwrap();
    assert_eq!(f.eval(Point::from_integers(&[1, 2]).coords()).unwrap(), q(5, 1));
    let g = v.parse("1/x").unwrap();
    assert_eq!(g.eval(Point::from_integers(&[0, 7]).coords()), Err(Error::Pole));
    let s = v.parse("x+y").unwrap();
    assert_eq!(s.eval(&[q(1, 2), q(1, 3)]).unwrap(), q(5, 6));
    assert!(matches!(s.eval(&[q(1, 2)]), Err(Error::PointDimension { got: 1, needed: 2 })));
}

#[test]
fn arith_examples() {
    let v = xy();
    let x = Expr::var(0);
    assert!((&x + &-&x).is_zero());
    let a = v.parse("x/y").unwrap();
    let b = v.parse("y/x").unwrap();
    assert!((a * b).is_one());
    assert_eq!(Expr::zero().inv(), Err(Error::InverseOfZero));
}

#[test]
fn compiled_matches_exact() {
    let v = xy();
    let e = v.parse("(x^3 - 2*x*y + 1/3)/(1 + y^2)").unwrap();
    let exact = e.eval(&[q(3, 2), q(-1, 4)]).unwrap();
    let approx = e.eval_f64(&[1.5, -0.25]).unwrap();
    assert!((approx - exact.to_f64().unwrap()).abs() < 1e-14);
}

#[test]
fn compose_substitutes() {
    let v = xy();
    let e = v.parse("x*y/(1+x)").unwrap();
    let subs = [v.parse("y").unwrap(), v.parse("2").unwrap()];
    assert_eq!(e.compose(&subs).unwrap(), v.parse("2*y/(1+y)").unwrap());
}

fn arb_poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec(((0u32..3, 0u32..3, 0u32..2), -4i64..5), 0..5).prop_map(|ts| {
        Poly::from_terms(ts.into_iter().map(|((a, b, c), k)| {
            (Monomial::from_exponents(vec![a, b, c]), Rational::from_integer(k.into()))
        }))
    })
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    (arb_poly(), arb_poly()).prop_map(|(n, d)| {
        let d = if d.is_zero() { Poly::one() } else { d };
        Expr::from_parts(n, d).unwrap()
    })
}

fn arb_point() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-6i64..7, 1i64..4), 3).prop_map(|v| v.into_iter().map(|(n, d)| q(n, d)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(a in arb_expr(), b in arb_expr(), c in arb_expr()) {
        prop_assert_eq!((&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!((&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn diff_is_leibniz(a in arb_expr(), b in arb_expr(), i in 0usize..3) {
        let lhs = (&a * &b).diff(i);
        let rhs = &(&a.diff(i) * &b) + &(&a * &b.diff(i));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn print_parse_round_trip(a in arb_expr(), b in arb_expr()) {
        let v = Vars::new(&["x", "y", "z"]);
        prop_assume!(!b.is_zero());
        let ab = (&a * &b).checked_div(&b).unwrap();
        prop_assert_eq!(v.parse(&v.show(&ab)).unwrap(), v.parse(&v.show(&a)).unwrap());
        prop_assert_eq!(v.parse(&v.show(&a)).unwrap(), a);
    }

    #[test]
    fn eval_is_multiplicative(a in arb_expr(), b in arb_expr(), p in arb_point()) {
        if let (Ok(x), Ok(y)) = (a.eval(&p), b.eval(&p)) {
            prop_assert_eq!((&a * &b).eval(&p).unwrap(), &x * &y);
            prop_assert_eq!((&a + &b).eval(&p).unwrap(), x + y);
        }
    }
}
