//! Text form of multivectors and forms.
//!
//! The scalar grammar is extended with basis symbols: `d<var>` is the
//! coordinate 1-form, `@<var>` the coordinate vector field, and `^` between
//! non-scalars is the wedge product. Example: `x*dx^dy - 2*dy^dz`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use core::fmt;

use super::{Blade, Graded, Kind};
use crate::error::{Error, Result};
use crate::symexpr::parse::{eval_ast, parse_ast, Algebra};
use crate::symexpr::{Expr, Rational, Vars};

/// Intermediate value while evaluating: grade plus blade map. Grade is
/// `None` for an empty sum, which adapts to whatever it is combined with.
#[derive(Clone)]
struct Val {
    grade: Option<usize>,
    terms: BTreeMap<u32, Expr>,
}

impl Val {
    fn scalar(e: Expr) -> Val {
        let mut terms = BTreeMap::new();
        if !e.is_zero() {
            terms.insert(0, e);
        }
        Val { grade: Some(0), terms }
    }

    fn is_scalar(&self) -> bool {
        self.grade == Some(0) || self.terms.is_empty()
    }

    fn scalar_value(&self) -> Expr {
        self.terms.get(&0).cloned().unwrap_or_default()
    }

    fn map(self, f: impl Fn(&Expr) -> Expr) -> Val {
        let terms = self.terms.iter().map(|(&b, c)| (b, f(c))).filter(|(_, c)| !c.is_zero()).collect();
        Val { grade: self.grade, terms }
    }
}

struct GradedAlgebra<'a> {
    vars: &'a Vars,
    form: bool,
}

impl GradedAlgebra<'_> {
    fn basis(&self, i: usize) -> Val {
        let mut terms = BTreeMap::new();
        terms.insert(1u32 << i, Expr::one());
        Val { grade: Some(1), terms }
    }
}

impl Algebra for GradedAlgebra<'_> {
    type Value = Val;

    fn number(&self, q: Rational) -> Val {
        Val::scalar(Expr::constant(q))
    }

    fn ident(&self, name: &str, offset: usize) -> Result<Val> {
        if let Some(i) = self.vars.index_of(name) {
            return Ok(Val::scalar(Expr::var(i)));
        }
        if self.form {
            if let Some(i) = name.strip_prefix('d').and_then(|v| self.vars.index_of(v)) {
                return Ok(self.basis(i));
            }
        }
        Err(Error::UnknownIdentifier { name: name.to_string(), offset })
    }

    fn vector(&self, name: &str, offset: usize) -> Result<Val> {
        match self.vars.index_of(name) {
            Some(i) if !self.form => Ok(self.basis(i)),
            _ => Err(Error::UnknownIdentifier { name: alloc::format!("@{}", name), offset }),
        }
    }

    fn add(&self, a: Val, b: Val, _: usize) -> Result<Val> {
        let grade = match (a.grade, b.grade) {
            (Some(x), Some(y)) if x != y && !a.terms.is_empty() && !b.terms.is_empty() => {
                return Err(Error::MixedGrades(x, y));
            }
            (Some(x), Some(y)) => Some(if a.terms.is_empty() { y } else { x }),
            (g, None) | (None, g) => g,
        };
        let mut terms = a.terms;
        for (k, c) in b.terms {
            let e = terms.remove(&k).map_or(c.clone(), |e| e.add(&c));
            if !e.is_zero() {
                terms.insert(k, e);
            }
        }
        Ok(Val { grade, terms })
    }

    fn sub(&self, a: Val, b: Val, offset: usize) -> Result<Val> {
        let nb = self.neg(b);
        self.add(a, nb, offset)
    }

    fn mul(&self, a: Val, b: Val, offset: usize) -> Result<Val> {
        if a.is_scalar() {
            let s = a.scalar_value();
            return Ok(b.map(|c| c.mul(&s)));
        }
        if b.is_scalar() {
            let s = b.scalar_value();
            return Ok(a.map(|c| c.mul(&s)));
        }
        Err(Error::Syntax { offset, message: "use `^` to multiply basis elements".into() })
    }

    fn div(&self, a: Val, b: Val, offset: usize) -> Result<Val> {
        if !b.is_scalar() {
            return Err(Error::Syntax { offset, message: "divisor must be a scalar".into() });
        }
        let inv = b.scalar_value().inv().map_err(|_| Error::ZeroDivisor { offset })?;
        Ok(a.map(|c| c.mul(&inv)))
    }

    fn neg(&self, a: Val) -> Val {
        a.map(|c| c.neg())
    }

    fn as_constant(&self, a: &Val) -> Option<Rational> {
        if a.is_scalar() {
            a.scalar_value().as_constant()
        } else {
            None
        }
    }

    fn is_scalar(&self, a: &Val) -> bool {
        a.is_scalar()
    }

    fn powi(&self, a: Val, e: i64, offset: usize) -> Result<Val> {
        let v = a.scalar_value().powi(e).map_err(|_| Error::ZeroDivisor { offset })?;
        Ok(Val::scalar(v))
    }

    fn wedge(&self, a: Val, b: Val, _: usize) -> Result<Val> {
        let grade = match (a.grade, b.grade) {
            (Some(x), Some(y)) => Some(x + y),
            _ => None,
        };
        let mut terms: BTreeMap<u32, Expr> = BTreeMap::new();
        for (&x, cx) in &a.terms {
            for (&y, cy) in &b.terms {
                if let Some((bl, odd)) = Blade(x).wedge(Blade(y)) {
                    let c = cx.mul(cy);
                    let c = if odd { c.neg() } else { c };
                    let e = terms.remove(&bl.0).map_or(c.clone(), |e| e.add(&c));
                    if !e.is_zero() {
                        terms.insert(bl.0, e);
                    }
                }
            }
        }
        Ok(Val { grade, terms })
    }
}

impl<K: Kind> Graded<K> {
    /// Parse text such as `x*dx^dy` (forms) or `y*@x - x*@y` (multivectors).
    /// An expression with no basis symbols is a grade-0 element.
    pub fn parse(text: &str, vars: &Vars) -> Result<Self> {
        let ast = parse_ast(text)?;
        let val = eval_ast(&GradedAlgebra { vars, form: K::FORM }, &ast)?;
        let dim = vars.len();
        let grade = val.grade.unwrap_or(0);
        if grade > dim && !val.terms.is_empty() {
            return Err(Error::GradeExceedsDimension { grade, dim });
        }
        let mut out = Graded::zero(dim, grade);
        for (b, c) in val.terms {
            out.add_term(Blade(b), c);
        }
        Ok(out)
    }

    /// Like [`Graded::parse`] but insists on the given grade (zero adopts it).
    pub fn parse_grade(text: &str, vars: &Vars, grade: usize) -> Result<Self> {
        let g = Self::parse(text, vars)?;
        if g.is_zero() {
            return Ok(Graded::zero(vars.len(), grade));
        }
        if g.grade != grade {
            return Err(Error::GradeMismatch { expected: grade, got: g.grade });
        }
        Ok(g)
    }

    pub fn display<'a>(&'a self, vars: &'a Vars) -> GradedDisplay<'a, K> {
        GradedDisplay { value: self, vars }
    }

    pub fn show(&self, vars: &Vars) -> String {
        self.display(vars).to_string()
    }
}

pub struct GradedDisplay<'a, K: Kind> {
    value: &'a Graded<K>,
    vars: &'a Vars,
}

impl<K: Kind> fmt::Display for GradedDisplay<'_, K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.value.terms();
        if terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (b, c)) in terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            let text = self.vars.show(c);
            if b.0 == 0 {
                write!(f, "({})", text)?;
                continue;
            }
            if !c.is_one() {
                write!(f, "({})*", text)?;
            }
            for (k, i) in b.indices().into_iter().enumerate() {
                if k > 0 {
                    f.write_str("^")?;
                }
                let name = self.vars.name(i);
                if K::FORM {
                    write!(f, "d{}", name)?;
                } else {
                    write!(f, "@{}", name)?;
                }
            }
        }
        Ok(())
    }
}
