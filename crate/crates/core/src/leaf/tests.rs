use super::*;
use crate::symexpr::Vars;

fn xy() -> Vars {
    Vars::new(&["x", "y"])
}

fn planar(phi: &str) -> PoissonStructure {
    PoissonStructure::from_entries(2, &[(0, 1, xy().parse(phi).unwrap())]).unwrap()
}

fn so3() -> PoissonStructure {
    let v = Vars::new(&["x1", "x2", "x3"]);
    PoissonStructure::new(KVector::parse("x3*@x1^@x2 + x1*@x2^@x3 + x2*@x3^@x1", &v).unwrap()).unwrap()
}

fn sphere(ps: &PoissonStructure, r: i64, order: usize) -> ParamLeaf {
    let v = Vars::new(&["x1", "x2", "x3"]);
    let c = v.parse("x1^2 + x2^2 + x3^2").unwrap();
    ParamLeaf::new(ps, Chart::sphere(&q(r)), alloc::vec![c], order).unwrap()
}

fn qs(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| q(x)).collect()
}

#[test]
fn bott_point_examples() {
    let v = xy();
    let o = Point::origin(2);
    let p = planar("x");
    let x = v.parse("x").unwrap();
    assert_eq!(bott_derivative_point(&p, &o, &qs(&[1, 0]), &qs(&[1, 0]), &x).unwrap(), qs(&[0, 1]));
    assert_eq!(bott_derivative_point(&p, &o, &qs(&[1, 0]), &qs(&[0, 1]), &x).unwrap(), qs(&[0, 0]));
    let p2 = planar("x^2+y^2");
    let f = v.parse("3*x - y + x*y").unwrap();
    assert_eq!(bott_derivative_point(&p2, &o, &qs(&[3, -1]), &qs(&[2, 5]), &f).unwrap(), qs(&[0, 0]));
    // errors: not a point leaf, extension mismatch
    assert!(matches!(bott_derivative_point(&planar("1"), &o, &qs(&[1, 0]), &qs(&[1, 0]), &x), Err(Error::NotPointLeaf)));
    assert!(matches!(bott_derivative_point(&p, &o, &qs(&[0, 1]), &qs(&[1, 0]), &x), Err(Error::ExtensionMismatch(_))));
}

#[test]
fn flat_sections_examples() {
    let o = Point::origin(2);
    assert_eq!(bott_flat_sections_point(&planar("x"), &o).unwrap(), alloc::vec![qs(&[0, 1])]);
    assert_eq!(bott_flat_sections_point(&planar("x^2+y^2"), &o).unwrap(), alloc::vec![qs(&[1, 0]), qs(&[0, 1])]);
    assert!(matches!(bott_flat_sections_point(&planar("1"), &o), Err(Error::NotPointLeaf)));
}

#[test]
fn extension_probe_passes() {
    let mut s = Sampler::new(3);
    for phi in ["x", "x^2+y^2", "x*y + x^3"] {
        let t = bott_extension_probe(&planar(phi), &Point::origin(2), &mut s, 20).unwrap();
        assert!(t.passed(), "{:?}", t);
    }
}

#[test]
fn bott_multi_examples() {
    let v = xy();
    let o = Point::origin(2);
    let p = planar("x");
    let u = KVector::parse("@x^@y", &v).unwrap();
    let d1 = bott_derivative_multi_point(&p, &o, &qs(&[1, 0]), &u, None, &v.parse("x").unwrap()).unwrap();
    assert!(d1.is_zero());
    let d2 = bott_derivative_multi_point(&p, &o, &qs(&[0, 1]), &u, None, &v.parse("y").unwrap()).unwrap();
    assert_eq!(d2, KVector::parse("-@x^@y", &v).unwrap());
    // a nonconstant extension with the same value at the origin gives the same answer
    let ext = KVector::parse("(1 + x^2 - y)*@x^@y", &v).unwrap();
    let d3 = bott_derivative_multi_point(&p, &o, &qs(&[0, 1]), &u, Some(&ext), &v.parse("y").unwrap()).unwrap();
    assert_eq!(d3, d2);
    let wrong = KVector::parse("(2 + x)*@x^@y", &v).unwrap();
    assert!(bott_derivative_multi_point(&p, &o, &qs(&[0, 1]), &u, Some(&wrong), &v.parse("y").unwrap()).is_err());
}

#[test]
fn bott_multi_reduces_to_point_version_on_vectors() {
    let mut s = Sampler::new(8);
    let o = Point::origin(2);
    for phi in ["x", "x^2+y^2", "x - 2*y + x*y"] {
        let p = planar(phi);
        for _ in 0..10 {
            let alpha = qs(&[s.int(-3, 3), s.int(-3, 3)]);
            let vv = qs(&[s.int(-3, 3), s.int(-3, 3)]);
            let f = Expr::var(0).scale(&alpha[0]).add(&Expr::var(1).scale(&alpha[1])).add(&Expr::var(0).mul(&Expr::var(1)));
            let a = bott_derivative_point(&p, &o, &alpha, &vv, &f).unwrap();
            let b = bott_derivative_multi_point(&p, &o, &alpha, &constant_vector(&vv), None, &f).unwrap();
            assert_eq!(constant_vector(&a), b);
        }
    }
}

#[test]
fn bott_leibniz_in_section_slot() {
    // ∇_α(h u) = X_f(h) u + h ∇_α u, with X_f(h) = {h, f}
    let v = xy();
    let o = Point::origin(2);
    let p = planar("x + x*y");
    let f = v.parse("y + x^2").unwrap();
    let alpha = qs(&[0, 1]);
    let u = KVector::parse("(1 + y)*@x^@y", &v).unwrap();
    let h = v.parse("2 + x - 3*y").unwrap();
    let hu = u.scale(&h);
    let hu0 = hu.at(o.coords()).unwrap();
    let u0 = u.at(o.coords()).unwrap();
    let lhs = bott_derivative_multi_point(&p, &o, &alpha, &hu0, Some(&hu), &f).unwrap();
    let du = bott_derivative_multi_point(&p, &o, &alpha, &u0, Some(&u), &f).unwrap();
    let xh = Expr::constant(p.hamiltonian_field(&f).apply(&h).unwrap().eval(o.coords()).unwrap());
    let h0 = Expr::constant(h.eval(o.coords()).unwrap());
    let rhs = u0.scale(&xh).add(&du.scale(&h0)).unwrap();
    assert!(crate::identities::same(&lhs, &rhs));
}

#[test]
fn sphere_leaf_nodes_and_area() {
    let ps = so3();
    let leaf = sphere(&ps, 1, 24);
    assert_eq!(leaf.nodes().len(), 4 * 576);
    let area = leaf.integrate(|_| Ok(1.0)).unwrap();
    assert!((area - 4.0 * core::f64::consts::PI).abs() < 1e-11, "{}", area);
    let big = sphere(&ps, 2, 24);
    let area2 = big.integrate(|_| Ok(1.0)).unwrap();
    assert!((area2 - 8.0 * core::f64::consts::PI).abs() < 1e-11, "{}", area2);
    for nd in leaf.nodes() {
        let w = &nd.omega;
        assert!((w[(0, 1)] + w[(1, 0)]).abs() < 1e-12 && w[(0, 0)].abs() < 1e-12);
        assert!(nd.density.abs() > 1e-6);
    }
    let c = symplectic_consistency(&ps, &leaf, 2).unwrap();
    assert!(c < 1e-9, "{}", c);
}

#[test]
fn symplectic_form_examples() {
    let id = DMatrix::<f64>::identity(2, 2);
    let w = symplectic_form_at(&planar("1"), &[0.3, -2.0], &id).unwrap();
    assert!((w - DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])).norm() < 1e-12);
    let frame = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    let w = symplectic_form_at(&so3(), &[0.0, 0.0, 1.0], &frame).unwrap();
    assert!((w[(0, 1)] - 1.0).abs() < 1e-12 && (w[(1, 0)] + 1.0).abs() < 1e-12);
    // ∂3 is not tangent to the sphere at the north pole
    let off = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    assert!(matches!(symplectic_form_at(&so3(), &[0.0, 0.0, 1.0], &off), Err(Error::Residual { .. })));
}

#[test]
fn leaf_construction_errors() {
    let ps = so3();
    let v = Vars::new(&["t", "s"]);
    // the plane is one symplectic leaf, but the Jacobian degenerates at
    // t = 0, which is a node of the odd rule
    let bad = Chart { bounds: alloc::vec![(-1.0, 1.0), (-1.0, 1.0)], map: alloc::vec![v.parse("t^3").unwrap(), v.parse("s").unwrap()] };
    assert!(matches!(ParamLeaf::new(&planar("1"), alloc::vec![bad.clone()], alloc::vec![], 3), Err(Error::InvalidLeaf(_))));
    assert!(ParamLeaf::new(&planar("1"), alloc::vec![bad], alloc::vec![], 4).is_ok());
    // a plane through the origin is not a leaf of so(3)*
    let plane = Chart { bounds: alloc::vec![(0.5, 1.0), (0.5, 1.0)], map: alloc::vec![v.parse("t").unwrap(), v.parse("s").unwrap(), Expr::one()] };
    assert!(matches!(ParamLeaf::new(&ps, alloc::vec![plane], alloc::vec![], 3), Err(Error::OffLeaf(_))));
    // wrong Casimir value spread
    let w = Vars::new(&["x1", "x2", "x3"]);
    let casimir = w.parse("x1").unwrap();
    assert!(matches!(ParamLeaf::new(&ps, Chart::sphere(&q(1)), alloc::vec![casimir], 4), Err(Error::InvalidLeaf(_))));
}

#[test]
fn quotient_kills_leaf_tangents() {
    let ps = so3();
    let leaf = sphere(&ps, 1, 6);
    let w = Vars::new(&["x1", "x2", "x3"]);
    let rot = KVector::parse("x1*@x2 - x2*@x1", &w).unwrap();
    assert!(transversal_classes(&leaf, &rot).unwrap().iter().all(|c| c.norm() < 1e-12));
    let radial = KVector::parse("x1*@x1 + x2*@x2 + x3*@x3", &w).unwrap();
    assert!(transversal_classes(&leaf, &radial).unwrap().iter().all(|c| (c.norm() - 1.0).abs() < 1e-9));
    // the quotient of 3-vectors is trivial along a surface in ℝ³
    let vol = KVector::parse("@x1^@x2^@x3", &w).unwrap();
    assert!(transversal_classes(&leaf, &vol).unwrap().iter().all(|c| c.norm() < 1e-9));
}

#[test]
fn bott_on_sphere_is_flat_for_radial_class() {
    // [X_f, E] is a combination of Hamiltonian fields for the Euler field E,
    // so the radial class is flat; x1∂1 is not
    let ps = so3();
    let leaf = sphere(&ps, 1, 6);
    let w = Vars::new(&["x1", "x2", "x3"]);
    let radial = KVector::parse("x1*@x1 + x2*@x2 + x3*@x3", &w).unwrap();
    for f in ["x1", "x2 + 3*x3"] {
        let classes = bott_derivative_multi_nodes(&ps, &leaf, &w.parse(f).unwrap(), &radial).unwrap();
        assert!(classes.iter().all(|c| c.norm() < 1e-12));
    }
    let f = w.parse("x1^2 - x2").unwrap();
    assert!(bott_derivative_multi_nodes(&ps, &leaf, &f, &radial).unwrap().iter().all(|c| c.norm() < 1e-12));
    let skew = KVector::parse("x1*@x1", &w).unwrap();
    let classes = bott_derivative_multi_nodes(&ps, &leaf, &w.parse("x3").unwrap(), &skew).unwrap();
    assert!(classes.iter().any(|c| c.norm() > 1e-3));
}

#[test]
fn flat_section_examples() {
    let v = xy();
    let o = Leaf::Point(PointLeaf::new(&planar("x^2+y^2"), Point::origin(2)).unwrap());
    let dx = KVector::parse("@x", &v).unwrap();
    let r = flat_section_correspondence_check(&planar("x^2+y^2"), &o, &dx, 3, 0.0).unwrap();
    assert!(r.exact && r.condition_holds && r.flat);
    let p1 = planar("x");
    let o1 = Leaf::Point(PointLeaf::new(&p1, Point::origin(2)).unwrap());
    let r = flat_section_correspondence_check(&p1, &o1, &dx, 2, 0.0).unwrap();
    assert!(!r.condition_holds && !r.flat);
    assert_eq!(r.condition_violation, Some((v.parse("x").unwrap(), v.parse("y").unwrap())));
    // Hamiltonian fields on a sphere leaf
    let ps = so3();
    let leaf = Leaf::Parameterized(sphere(&ps, 1, 5));
    let w = Vars::new(&["x1", "x2", "x3"]);
    let xh = ps.hamiltonian_field(&w.parse("x1*x2 + x3").unwrap());
    let r = flat_section_correspondence_check(&ps, &leaf, &xh, 2, 1e-9).unwrap();
    assert!(r.condition_holds && r.flat, "{:?}", r);
}
