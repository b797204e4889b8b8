//! Poisson structures given by a bivector on a chart, and the operators they
//! induce on functions, multivectors and forms.
//!
//! Sign conventions: `{f,g} = P(df, dg)` and the Hamiltonian field acts by
//! `X_f(g) = {g, f}`, so `X_f = P♯(df)` with `P♯(α)^j = Σ_i P^{ji} α_i`.
//! With these, `[P, f] = −X_f` and `σ(f) = X_f`.

use alloc::format;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU8, Ordering};

use crate::error::{Error, Result};
use crate::exterior::{contract_or_zero, schouten, Blade, KForm, KVector, VolumeForm};
use crate::identities::Tally;
use crate::linalg::{self, Matrix};
use crate::sample::Sampler;
use crate::symexpr::{gcd, Expr, Monomial, Poly, Rational};

const UNKNOWN: u8 = 0;
const VERIFIED: u8 = 1;
const FAILED: u8 = 2;

/// A bivector field together with a write-once record of whether it
/// satisfies the Jacobi identity.
#[derive(Debug)]
pub struct PoissonStructure {
    p: KVector,
    entries: Matrix<Expr>,
    jacobi: AtomicU8,
}

impl Clone for PoissonStructure {
    fn clone(&self) -> Self {
        PoissonStructure {
            p: self.p.clone(),
            entries: self.entries.clone(),
            jacobi: AtomicU8::new(self.jacobi.load(Ordering::Relaxed)),
        }
    }
}

impl PoissonStructure {
    pub fn new(p: KVector) -> Result<Self> {
        if p.grade() != 2 && !p.is_zero() {
            return Err(Error::NotABivector(p.grade()));
        }
        let n = p.dim();
        let entries = (0..n).map(|i| (0..n).map(|j| p.coeff_at(&[i, j])).collect()).collect();
        Ok(PoissonStructure { p, entries, jacobi: AtomicU8::new(UNKNOWN) })
    }

    /// From strictly upper-triangular entries `(i, j, P^{ij})`.
    pub fn from_entries(dim: usize, upper: &[(usize, usize, Expr)]) -> Result<Self> {
        let mut p = KVector::zero(dim, 2);
        for (i, j, c) in upper {
            if i >= j || *j >= dim {
                return Err(Error::GradeExceedsDimension { grade: 2, dim });
            }
            p = p.add(&KVector::basis(dim, &[*i, *j], c.clone())?)?;
        }
        Self::new(p)
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn bivector(&self) -> &KVector {
        &self.p
    }

    /// `P^{ij}`.
    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i][j]
    }

    pub fn matrix(&self) -> &Matrix<Expr> {
        &self.entries
    }

    /// `[P, P]`, zero exactly when the bracket is Poisson.
    pub fn jacobi_defect(&self) -> KVector {
        schouten(&self.p, &self.p).expect("same dimension")
    }

    pub fn is_poisson(&self) -> bool {
        match self.jacobi.load(Ordering::Acquire) {
            VERIFIED => true,
            FAILED => false,
            _ => {
                let ok = self.jacobi_defect().is_zero();
                self.jacobi.store(if ok { VERIFIED } else { FAILED }, Ordering::Release);
                ok
            }
        }
    }

    fn require_poisson(&self) -> Result<()> {
        if self.is_poisson() {
            Ok(())
        } else {
            Err(Error::NotPoisson)
        }
    }

    fn check_width(&self, f: &Expr) -> Result<()> {
        if f.width() > self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: f.width() });
        }
        Ok(())
    }

    /// `{f, g} = P(df, dg)`.
    pub fn bracket(&self, f: &Expr, g: &Expr) -> Result<Expr> {
        self.check_width(f)?;
        self.check_width(g)?;
        Ok(self.bracket_unchecked(f, g))
    }

    fn bracket_unchecked(&self, f: &Expr, g: &Expr) -> Expr {
        let n = self.dim();
        let df: Vec<Expr> = (0..n).map(|i| f.diff(i)).collect();
        let dg: Vec<Expr> = (0..n).map(|i| g.diff(i)).collect();
        let mut acc = Expr::zero();
        for i in 0..n {
            if df[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if dg[j].is_zero() || self.entries[i][j].is_zero() {
                    continue;
                }
                acc = acc.add(&self.entries[i][j].mul(&df[i]).mul(&dg[j]));
            }
        }
        acc
    }

    /// `P♯(α)`, the vector field with `β(P♯α) = P(β, α)`.
    pub fn sharp(&self, alpha: &[Expr]) -> KVector {
        let n = self.dim();
        let comps: Vec<Expr> = (0..n)
            .map(|j| {
                (0..n).fold(Expr::zero(), |acc, i| {
                    if alpha[i].is_zero() || self.entries[j][i].is_zero() {
                        acc
                    } else {
                        acc.add(&self.entries[j][i].mul(&alpha[i]))
                    }
                })
            })
            .collect();
        KVector::vector(&comps)
    }

    /// `X_f`, acting by `X_f(g) = {g, f}`.
    pub fn hamiltonian_field(&self, f: &Expr) -> KVector {
        let df: Vec<Expr> = (0..self.dim()).map(|i| f.diff(i)).collect();
        self.sharp(&df)
    }

    /// Lichnerowicz coboundary: `X_f` on functions, `[P, W]` above.
    pub fn sigma(&self, w: &KVector) -> Result<KVector> {
        if w.grade() == 0 {
            return Ok(self.hamiltonian_field(&w.as_scalar().unwrap_or_default()));
        }
        schouten(&self.p, w)
    }

    /// Canonical boundary `δ = i_P∘d − d∘i_P`.
    pub fn delta(&self, w: &KForm) -> Result<KForm> {
        if w.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: w.dim() });
        }
        let k = w.grade();
        if k == 0 {
            return Ok(KForm::zero(w.dim(), 0));
        }
        let first = contract_or_zero(&self.p, &w.d());
        let out = KForm::zero(w.dim(), k - 1).add(&first)?;
        if k >= 2 {
            return out.sub(&contract_or_zero(&self.p, w).d());
        }
        Ok(out)
    }

    /// `δ(φ0 dφ1∧…∧dφk)` by the expanded bracket formula.
    pub fn delta_expanded(&self, phi: &[Expr]) -> Result<KForm> {
        let n = self.dim();
        let k = phi.len().saturating_sub(1);
        for f in phi {
            self.check_width(f)?;
        }
        let mut out = KForm::zero(n, k.saturating_sub(1));
        if k == 0 {
            return Ok(out);
        }
        let dphi: Vec<KForm> = phi.iter().map(|f| KForm::differential(n, f)).collect();
        let wedge_except = |skip: &[usize]| -> Result<KForm> {
            let mut acc = KForm::scalar(n, Expr::one());
            for (i, d) in dphi.iter().enumerate().skip(1) {
                if !skip.contains(&i) {
                    acc = acc.wedge(d)?;
                }
            }
            Ok(acc)
        };
        for i in 1..=k {
            let c = self.bracket_unchecked(&phi[0], &phi[i]);
            let term = wedge_except(&[i])?.scale(&c);
            out = if i % 2 == 1 { out.add(&term)? } else { out.sub(&term)? };
        }
        for i in 1..=k {
            for j in i + 1..=k {
                let d = KForm::differential(n, &self.bracket_unchecked(&phi[i], &phi[j])).scale(&phi[0]);
                let term = d.wedge(&wedge_except(&[i, j])?)?;
                out = if (i + j) % 2 == 0 { out.add(&term)? } else { out.sub(&term)? };
            }
        }
        Ok(out)
    }

    /// `Pf(P)`; the structure is nondegenerate where it does not vanish.
    pub fn pfaffian(&self) -> Expr {
        linalg::pfaffian(&self.entries)
    }

    /// Symplectic star: `ω1 ∧ *ω2 = P^k(ω1, ω2)·ωⁿ/n!`, with `P^k` the
    /// determinant pairing and `P⁰(f, g) = fg`.
    pub fn star(&self, w: &KForm) -> Result<KForm> {
        let n = self.dim();
        if w.dim() != n {
            return Err(Error::DimensionMismatch { left: n, right: w.dim() });
        }
        let pf = self.pfaffian();
        if n % 2 == 1 || pf.is_zero() {
            return Err(Error::DegenerateStructure);
        }
        // ωⁿ/n! = Pf(ω) vol with the matrix of ω equal to −P⁻¹, so Pf(ω) = 1/Pf(P)
        let vol_density = pf.inv()?;
        let k = w.grade();
        if k > n {
            // only the zero form has grade above the dimension (d of a top form)
            return Ok(KForm::zero(n, 0));
        }
        let full = ((1u64 << n) - 1) as u32;
        let terms = w.terms();
        let mut out = KForm::zero(n, n - k);
        for mask in 0..=full {
            let i_blade = Blade(mask);
            if i_blade.grade() != k {
                continue;
            }
            let idx = i_blade.indices();
            let mut pairing = Expr::zero();
            for (j_blade, c) in &terms {
                let jdx = j_blade.indices();
                let m: Matrix<Expr> = idx.iter().map(|&a| jdx.iter().map(|&b| self.entries[a][b].clone()).collect()).collect();
                let det = if k == 0 { Expr::one() } else { linalg::determinant(&m) };
                if !det.is_zero() {
                    pairing = pairing.add(&det.mul(c));
                }
            }
            if pairing.is_zero() {
                continue;
            }
            let rest = Blade(full & !mask);
            let (_, odd) = i_blade.wedge(rest).expect("disjoint");
            let c = pairing.mul(&vol_density);
            out = out.add(&KForm::from_terms(n, n - k, [(rest, if odd { c.neg() } else { c })]))?;
        }
        Ok(out)
    }

    /// `μ_W`, determined by `L_{X_f} W = μ_W(f)·W`. Computed on the
    /// coordinate functions; the derivation property is tested separately.
    pub fn modular_field(&self, w: &VolumeForm) -> Result<ModularField> {
        if w.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: w.dim() });
        }
        let n = self.dim();
        let comps = (0..n)
            .map(|i| self.modular_value(w, &Expr::var(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModularField { field: KVector::vector(&comps), volume: w.clone() })
    }

    /// `L_{X_f} W / W`.
    pub fn modular_value(&self, w: &VolumeForm, f: &Expr) -> Result<Expr> {
        let lie = contract_or_zero(&self.hamiltonian_field(f), w.form()).d();
        let top = Blade((1u64.wrapping_shl(self.dim() as u32) - 1) as u32);
        lie.coeff(top).checked_div(&w.density())
    }

    /// Check `μ_{φW}(f) = μ_W(f) − X_φ(f)/φ` for every monomial `f` up to
    /// `degree_bound`.
    pub fn modular_change_of_volume_check(&self, w: &VolumeForm, phi: &Expr, degree_bound: u32) -> Result<bool> {
        let mu = self.modular_field(w)?;
        let scaled = VolumeForm::new(w.form().scale(phi))?;
        let mu_phi = self.modular_field(&scaled)?;
        self.change_of_volume_holds(&mu, &mu_phi, phi, degree_bound)
    }

    /// The comparison behind [`Self::modular_change_of_volume_check`], for
    /// already computed fields.
    pub fn change_of_volume_holds(
        &self,
        mu: &ModularField,
        mu_phi: &ModularField,
        phi: &Expr,
        degree_bound: u32,
    ) -> Result<bool> {
        let x_phi = self.hamiltonian_field(phi);
        for m in Monomial::all_up_to(self.dim(), degree_bound) {
            let f = Expr::from_poly(Poly::term(m, Rational::from_integer(1.into())));
            let rhs = mu.apply(&f)?.sub(&x_phi.apply(&f)?.checked_div(phi)?);
            if mu_phi.apply(&f)? != rhs {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Search for a polynomial `ψ` of degree at most `degree_bound` with
    /// `σ(ψ) = μ_W`. `None` means no such polynomial exists, not that the
    /// modular class is nontrivial.
    pub fn modular_triviality_witness(&self, w: &VolumeForm, degree_bound: u32) -> Result<Option<Expr>> {
        self.require_poisson()?;
        let mu = self.modular_field(w)?;
        if mu.field.is_zero() {
            return Ok(Some(Expr::zero()));
        }
        let monos: Vec<Monomial> = Monomial::all_up_to(self.dim(), degree_bound).into_iter().skip(1).collect();
        let fields: Vec<Vec<Expr>> = monos.iter().map(|m| self.hamiltonian_field(&mono_expr(m)).components()).collect();
        let target = mu.field.components();
        let (rows, rhs) = coefficient_system(self.dim(), &fields, Some(&target))?;
        match linalg::solve(&rows, monos.len(), &rhs) {
            None => Ok(None),
            Some(c) => Ok(Some(combine(&monos, &c))),
        }
    }

    /// Basis of polynomial Casimirs (`X_C = 0`) of degree at most `degree_bound`.
    pub fn casimir_scan(&self, degree_bound: u32) -> Result<Vec<Expr>> {
        let monos = Monomial::all_up_to(self.dim(), degree_bound);
        let fields: Vec<Vec<Expr>> = monos.iter().map(|m| self.hamiltonian_field(&mono_expr(m)).components()).collect();
        let (rows, _) = coefficient_system(self.dim(), &fields, None)?;
        Ok(linalg::nullspace(&rows, monos.len()).iter().map(|c| combine(&monos, c)).collect())
    }

    /// A triple of monomials of degree at most `degree_bound` whose Jacobi sum
    /// `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}` is nonzero, if any.
    pub fn jacobi_violation(&self, degree_bound: u32) -> Option<(Expr, Expr, Expr, Expr)> {
        let fs: Vec<Expr> = Monomial::all_up_to(self.dim(), degree_bound).iter().skip(1).map(mono_expr).collect();
        let n = fs.len();
        let mut br: Vec<Vec<Expr>> = alloc::vec![alloc::vec![Expr::zero(); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let b = self.bracket_unchecked(&fs[i], &fs[j]);
                br[j][i] = b.neg();
                br[i][j] = b;
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let s = self
                        .bracket_unchecked(&fs[i], &br[j][k])
                        .add(&self.bracket_unchecked(&fs[j], &br[k][i]))
                        .add(&self.bracket_unchecked(&fs[k], &br[i][j]));
                    if !s.is_zero() {
                        return Some((fs[i].clone(), fs[j].clone(), fs[k].clone(), s));
                    }
                }
            }
        }
        None
    }
}

fn mono_expr(m: &Monomial) -> Expr {
    Expr::from_poly(Poly::term(m.clone(), Rational::from_integer(1.into())))
}

fn combine(monos: &[Monomial], c: &[Rational]) -> Expr {
    let p = Poly::from_terms(monos.iter().cloned().zip(c.iter().cloned()));
    Expr::from_poly(p)
}

fn lcm(a: &Poly, b: &Poly) -> Poly {
    let g = gcd(a, b);
    a.mul(b).div_exact(&g).expect("gcd divides").monic()
}

/// Linear system `Σ_m c_m fields[m] = target` in the unknowns `c_m`, one
/// equation per component and per monomial after clearing denominators.
fn coefficient_system(
    dim: usize,
    fields: &[Vec<Expr>],
    target: Option<&[Expr]>,
) -> Result<(Matrix<Rational>, Vec<Rational>)> {
    let mut rows: Matrix<Rational> = Vec::new();
    let mut rhs = Vec::new();
    let unknowns = fields.len();
    for comp in 0..dim {
        let mut den = Poly::one();
        for f in fields {
            den = lcm(&den, f[comp].denominator());
        }
        if let Some(t) = target {
            den = lcm(&den, t[comp].denominator());
        }
        let clear = |e: &Expr| -> Poly {
            let factor = den.div_exact(e.denominator()).expect("lcm is a multiple");
            e.numerator().mul(&factor)
        };
        let polys: Vec<Poly> = fields.iter().map(|f| clear(&f[comp])).collect();
        let t = target.map(|t| clear(&t[comp])).unwrap_or_else(Poly::zero);
        let mut monos: Vec<Monomial> = polys.iter().chain(core::iter::once(&t)).flat_map(|p| p.terms().map(|(m, _)| m.clone())).collect();
        monos.sort_by(|a, b| a.exponents().cmp(b.exponents()));
        monos.dedup();
        for m in &monos {
            rows.push(polys.iter().map(|p| p.coefficient(m)).collect());
            rhs.push(t.coefficient(m));
        }
    }
    if rows.is_empty() {
        rows.push(alloc::vec![Rational::from_integer(0.into()); unknowns]);
        rhs.push(Rational::from_integer(0.into()));
    }
    Ok((rows, rhs))
}

/// A modular vector field together with the volume form it belongs to.
#[derive(Clone, Debug, PartialEq)]
pub struct ModularField {
    pub field: KVector,
    pub volume: VolumeForm,
}

impl ModularField {
    pub fn apply(&self, f: &Expr) -> Result<Expr> {
        self.field.apply(f)
    }
}

fn tally_form(t: &mut Tally, a: &KForm, b: &KForm, what: impl FnOnce() -> alloc::string::String) {
    t.record(crate::identities::same(a, b), what);
}

/// Operator and expanded definitions of `δ` on random `φ0 dφ1∧…∧dφk`.
pub fn delta_definitions_agree(ps: &PoissonStructure, s: &mut Sampler, cases: usize, max_deg: u32) -> Result<Tally> {
    let n = ps.dim();
    let mut t = Tally::new("delta definitions agree");
    for _ in 0..cases {
        let k = s.range(0, n.min(3));
        let phi: Vec<Expr> = (0..=k).map(|_| s.poly(n, max_deg)).collect();
        let mut form = KForm::scalar(n, phi[0].clone());
        for f in &phi[1..] {
            form = form.wedge(&KForm::differential(n, f))?;
        }
        let a = ps.delta(&form)?;
        let b = ps.delta_expanded(&phi)?;
        tally_form(&mut t, &a, &b, || format!("k = {}", k));
    }
    Ok(t)
}

/// `δ∘δ = 0` on random forms of every grade.
pub fn delta_squared(ps: &PoissonStructure, s: &mut Sampler, cases: usize, max_deg: u32) -> Result<Tally> {
    let n = ps.dim();
    let mut t = Tally::new("delta squared");
    for _ in 0..cases {
        let k = s.range(0, n);
        let w = s.kform(n, k, max_deg);
        let dd = ps.delta(&ps.delta(&w)?)?;
        t.record(dd.is_zero(), || format!("grade {}", k));
    }
    Ok(t)
}

/// `δ = (−1)^{k+1} *d*` on every monomial times basis form of coefficient
/// degree at most `max_deg`. Both sides are ℝ-linear, so this covers all
/// polynomial forms of that degree.
pub fn star_conjugation(ps: &PoissonStructure, max_deg: u32) -> Result<Tally> {
    let n = ps.dim();
    let mut t = Tally::new("delta star conjugation");
    for m in Monomial::all_up_to(n, max_deg) {
        let f = mono_expr(&m);
        for mask in 0..(1u32 << n) {
            let b = Blade(mask);
            let k = b.grade();
            let w = KForm::from_terms(n, k, [(b, f.clone())]);
            let lhs = ps.delta(&w)?;
            let rhs = ps.star(&ps.star(&w)?.d())?;
            let rhs = if k % 2 == 1 { rhs } else { rhs.neg() };
            tally_form(&mut t, &lhs, &rhs, || format!("{:?} on blade {:b}", m, mask));
        }
    }
    Ok(t)
}

/// The sign `s_k` with `**ω = s_k ω` on basis `k`-forms, one entry per
/// grade, or `None` for a grade where `**` is not a multiple of the identity.
pub fn star_squared_signs(ps: &PoissonStructure) -> Result<Vec<Option<i8>>> {
    let n = ps.dim();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut sign: Option<i8> = None;
        let mut consistent = true;
        for mask in 0..(1u32 << n) {
            let b = Blade(mask);
            if b.grade() != k {
                continue;
            }
            let w = KForm::from_terms(n, k, [(b, Expr::one())]);
            let ss = ps.star(&ps.star(&w)?)?;
            let s = if ss == w {
                1
            } else if ss == w.neg() {
                -1
            } else {
                consistent = false;
                break;
            };
            if sign.is_some_and(|x| x != s) {
                consistent = false;
                break;
            }
            sign = Some(s);
        }
        out.push(if consistent { sign } else { None });
    }
    Ok(out)
}

/// `σ(μ_W) = 0` and `μ_W(fg) = f μ_W(g) + g μ_W(f)` plus the defining
/// relation `L_{X_f}W = μ_W(f)W`, over monomials up to `degree_bound`.
pub fn modular_properties(ps: &PoissonStructure, w: &VolumeForm, degree_bound: u32) -> Result<Tally> {
    let mu = ps.modular_field(w)?;
    let mut t = Tally::new("modular field");
    t.record(ps.sigma(&mu.field)?.is_zero(), || "σ(μ) ≠ 0".into());
    let monos: Vec<Expr> = Monomial::all_up_to(ps.dim(), degree_bound).iter().map(mono_expr).collect();
    for f in &monos {
        t.record(ps.modular_value(w, f)? == mu.apply(f)?, || format!("defining relation fails for {:?}", f));
    }
    for f in monos.iter().take(8) {
        for g in &monos {
            let lhs = mu.apply(&f.mul(g))?;
            let rhs = f.mul(&mu.apply(g)?).add(&g.mul(&mu.apply(f)?));
            t.record(lhs == rhs, || "derivation property".into());
        }
    }
    Ok(t)
}
