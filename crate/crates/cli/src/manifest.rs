//! JSON manifests: the chart, the bivector and the objects to check.

use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use poissonkit_core::distr::{Distribution, Primitive};
use poissonkit_core::leaf::{Chart, Leaf, ParamLeaf, PointLeaf};
use poissonkit_core::{Expr, KVector, PoissonStructure, Point, Rational, Vars, VolumeForm};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub name: String,
    pub dim: usize,
    pub variables: Vec<String>,
    /// Row `i` holds `P^{ij}` for `j > i`.
    pub bivector: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub volume_forms: BTreeMap<String, VolumeSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub leaves: BTreeMap<String, LeafSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub distributions: BTreeMap<String, DistributionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub independence: Option<IndependenceSpec>,
    #[serde(default)]
    pub bounds: Bounds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeSpec {
    /// Coefficient of `dx¹∧…∧dxⁿ`.
    pub density: String,
    /// Expected components of the modular field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_modular: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeafSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere: Option<SphereSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charts: Option<Vec<ChartSpec>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub casimirs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_order: Option<usize>,
    /// Expected basis (up to span) of the Bott-flat vectors at a point leaf.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_flat_sections: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub annihilator_probes: BTreeMap<String, ProbeSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereSpec {
    pub radius: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub parameters: Vec<String>,
    pub bounds: Vec<[f64; 2]>,
    pub map: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeOutcome {
    Annihilates,
    NotTangent,
    NotAnnihilating,
}

impl ProbeOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            ProbeOutcome::Annihilates => "annihilates",
            ProbeOutcome::NotTangent => "not-tangent",
            ProbeOutcome::NotAnnihilating => "not-annihilating",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    /// A vector field such as `x1*@x2 - x2*@x1`.
    pub field: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<ProbeOutcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub terms: Vec<TermSpec>,
    /// Expected generalized-center membership; unset means "must pass".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_casimir: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    #[serde(default = "one")]
    pub weight: String,
    #[serde(flatten)]
    pub primitive: PrimitiveSpec,
}

fn one() -> String {
    "1".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveSpec {
    Dirac { point: Vec<String> },
    DiracDerivative { point: Vec<String>, direction: Vec<String> },
    LeafDelta { leaf: String },
    TransversalDelta { leaf: String, u: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndependenceSpec {
    pub leaves: Vec<String>,
    pub separating_functions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_rank: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    #[serde(default = "Bounds::default_degree")]
    pub degree_bound: u32,
    #[serde(default = "Bounds::default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "Bounds::default_order")]
    pub quadrature_order: usize,
    #[serde(default = "Bounds::default_seed")]
    pub seed: u64,
}

impl Bounds {
    fn default_degree() -> u32 {
        3
    }
    fn default_tolerance() -> f64 {
        1e-8
    }
    fn default_order() -> usize {
        24
    }
    fn default_seed() -> u64 {
        1
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            degree_bound: Self::default_degree(),
            tolerance: Self::default_tolerance(),
            quadrature_order: Self::default_order(),
            seed: Self::default_seed(),
        }
    }
}

/// Command-line overrides of the manifest bounds.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub degree_bound: Option<u32>,
    pub tolerance: Option<f64>,
    pub quadrature_order: Option<usize>,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text).context("malformed manifest")?;
        m.vars()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn vars(&self) -> Result<Vars> {
        if self.variables.len() != self.dim {
            bail!("{} variables declared for dimension {}", self.variables.len(), self.dim);
        }
        let mut seen = self.variables.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.dim {
            bail!("variable names must be distinct");
        }
        Ok(Vars::new(&self.variables))
    }

    /// The same manifest with every expression in canonical printed form.
    pub fn normalized(&self) -> Result<Manifest> {
        let vars = self.vars()?;
        let expr = |s: &String| -> Result<String> { Ok(vars.show(&parse(&vars, s)?)) };
        let exprs = |v: &Vec<String>| v.iter().map(expr).collect::<Result<Vec<_>>>();
        let mut m = self.clone();
        for row in &mut m.bivector {
            *row = exprs(row)?;
        }
        for v in m.volume_forms.values_mut() {
            v.density = expr(&v.density)?;
            if let Some(e) = &v.expect_modular {
                v.expect_modular = Some(exprs(e)?);
            }
        }
        for l in m.leaves.values_mut() {
            if let Some(p) = &l.point {
                l.point = Some(exprs(p)?);
            }
            if let Some(s) = &l.sphere {
                l.sphere = Some(SphereSpec { radius: expr(&s.radius)? });
            }
            if let Some(charts) = &mut l.charts {
                for c in charts {
                    let pv = Vars::new(&c.parameters);
                    c.map = c.map.iter().map(|s| Ok(pv.show(&parse(&pv, s)?))).collect::<Result<_>>()?;
                }
            }
            l.casimirs = exprs(&l.casimirs)?;
            if let Some(fs) = &l.expect_flat_sections {
                l.expect_flat_sections = Some(fs.iter().map(exprs).collect::<Result<_>>()?);
            }
            for p in l.annihilator_probes.values_mut() {
                p.field = format!("{}", KVector::parse(&p.field, &vars)?.display(&vars));
            }
        }
        for d in m.distributions.values_mut() {
            for t in &mut d.terms {
                t.weight = expr(&t.weight)?;
                t.primitive = match &t.primitive {
                    PrimitiveSpec::Dirac { point } => PrimitiveSpec::Dirac { point: exprs(point)? },
                    PrimitiveSpec::DiracDerivative { point, direction } => {
                        PrimitiveSpec::DiracDerivative { point: exprs(point)?, direction: exprs(direction)? }
                    }
                    PrimitiveSpec::TransversalDelta { leaf, u } => PrimitiveSpec::TransversalDelta {
                        leaf: leaf.clone(),
                        u: format!("{}", KVector::parse(u, &vars)?.display(&vars)),
                    },
                    other => other.clone(),
                };
            }
        }
        if let Some(ind) = &mut m.independence {
            ind.separating_functions = exprs(&ind.separating_functions)?;
        }
        Ok(m)
    }
}

fn parse(vars: &Vars, s: &str) -> Result<Expr> {
    vars.parse(s).with_context(|| format!("cannot parse `{}`", s))
}

fn constant(vars: &Vars, s: &str) -> Result<Rational> {
    parse(vars, s)?.as_constant().ok_or_else(|| anyhow!("`{}` is not a constant", s))
}

fn point(vars: &Vars, coords: &[String], dim: usize) -> Result<Point> {
    if coords.len() != dim {
        bail!("point has {} coordinates, chart has {}", coords.len(), dim);
    }
    Ok(Point::new(coords.iter().map(|c| constant(vars, c)).collect::<Result<_>>()?))
}

/// A manifest with every object built and validated.
pub struct Model {
    pub manifest: Manifest,
    pub vars: Vars,
    pub ps: PoissonStructure,
    pub bounds: Bounds,
    pub volumes: BTreeMap<String, Volume>,
    pub leaves: BTreeMap<String, ModelLeaf>,
    pub distributions: BTreeMap<String, ModelDistribution>,
    pub independence: Option<(Vec<Arc<ParamLeaf>>, Vec<Expr>, Option<usize>)>,
}

pub struct Volume {
    pub form: VolumeForm,
    pub expect_modular: Option<Vec<Expr>>,
}

pub struct ModelLeaf {
    pub leaf: Arc<Leaf>,
    /// Shared with distributions that refer to this leaf.
    pub param: Option<Arc<ParamLeaf>>,
    pub expect_flat_sections: Option<Vec<Vec<Rational>>>,
    pub probes: BTreeMap<String, (KVector, Option<ProbeOutcome>)>,
}

pub struct ModelDistribution {
    pub distribution: Distribution,
    pub expect_casimir: Option<bool>,
}

impl Model {
    pub fn build(manifest: Manifest, overrides: Overrides) -> Result<Model> {
        let vars = manifest.vars()?;
        let n = manifest.dim;
        let mut bounds = manifest.bounds.clone();
        if let Some(d) = overrides.degree_bound {
            bounds.degree_bound = d;
        }
        if let Some(t) = overrides.tolerance {
            bounds.tolerance = t;
        }
        if let Some(q) = overrides.quadrature_order {
            bounds.quadrature_order = q;
        }
        if manifest.bivector.len() != n.saturating_sub(1) {
            bail!("bivector table needs {} rows for dimension {}", n.saturating_sub(1), n);
        }
        let mut upper = Vec::new();
        for (i, row) in manifest.bivector.iter().enumerate() {
            if row.len() != n - 1 - i {
                bail!("bivector row {} has {} entries, expected {}", i, row.len(), n - 1 - i);
            }
            for (k, s) in row.iter().enumerate() {
                let e = parse(&vars, s)?;
                if !e.is_zero() {
                    upper.push((i, i + 1 + k, e));
                }
            }
        }
        let ps = PoissonStructure::from_entries(n, &upper)?;

        let mut volumes = BTreeMap::new();
        for (name, v) in &manifest.volume_forms {
            let form = VolumeForm::from_density(n, parse(&vars, &v.density)?)
                .with_context(|| format!("volume form `{}`", name))?;
            let expect_modular = match &v.expect_modular {
                Some(cs) if cs.len() != n => bail!("volume form `{}`: expected modular field needs {} components", name, n),
                Some(cs) => Some(cs.iter().map(|c| parse(&vars, c)).collect::<Result<_>>()?),
                None => None,
            };
            volumes.insert(name.clone(), Volume { form, expect_modular });
        }

        let mut leaves = BTreeMap::new();
        for (name, l) in &manifest.leaves {
            let built = build_leaf(&vars, &ps, l, bounds.quadrature_order).with_context(|| format!("leaf `{}`", name))?;
            leaves.insert(name.clone(), built);
        }

        let mut distributions = BTreeMap::new();
        for (name, d) in &manifest.distributions {
            let dist = build_distribution(&vars, n, &leaves, d).with_context(|| format!("distribution `{}`", name))?;
            distributions.insert(name.clone(), ModelDistribution { distribution: dist, expect_casimir: d.expect_casimir });
        }

        let independence = match &manifest.independence {
            None => None,
            Some(ind) => {
                let ls = ind
                    .leaves
                    .iter()
                    .map(|l| {
                        leaves
                            .get(l)
                            .and_then(|m: &ModelLeaf| m.param.clone())
                            .ok_or_else(|| anyhow!("independence: `{}` is not a parameterized leaf", l))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let fs = ind.separating_functions.iter().map(|f| parse(&vars, f)).collect::<Result<Vec<_>>>()?;
                Some((ls, fs, ind.expect_rank))
            }
        };

        Ok(Model { manifest, vars, ps, bounds, volumes, leaves, distributions, independence })
    }
}

fn build_leaf(vars: &Vars, ps: &PoissonStructure, l: &LeafSpec, default_order: usize) -> Result<ModelLeaf> {
    let n = ps.dim();
    let shapes = [l.point.is_some(), l.sphere.is_some(), l.charts.is_some()].iter().filter(|&&b| b).count();
    if shapes != 1 {
        bail!("give exactly one of `point`, `sphere` or `charts`");
    }
    let probes = l
        .annihilator_probes
        .iter()
        .map(|(k, p)| Ok((k.clone(), (KVector::parse_grade(&p.field, vars, 1)?, p.expect))))
        .collect::<Result<BTreeMap<_, _>>>()?;
    if let Some(coords) = &l.point {
        let x0 = point(vars, coords, n)?;
        if !probes.is_empty() || !l.casimirs.is_empty() {
            bail!("point leaves take no casimirs or annihilator probes");
        }
        let expect_flat_sections = match &l.expect_flat_sections {
            None => None,
            Some(vs) => Some(vs.iter().map(|v| point(vars, v, n).map(|p| p.0)).collect::<Result<_>>()?),
        };
        let leaf = PointLeaf::new(ps, x0)?;
        return Ok(ModelLeaf { leaf: Arc::new(Leaf::Point(leaf)), param: None, expect_flat_sections, probes });
    }
    if l.expect_flat_sections.is_some() {
        bail!("expected flat sections are only checked at point leaves");
    }
    let charts = if let Some(s) = &l.sphere {
        if n != 3 {
            bail!("the sphere shorthand needs a three-dimensional chart");
        }
        Chart::sphere(&constant(vars, &s.radius)?)
    } else {
        l.charts
            .as_ref()
            .expect("one shape is set")
            .iter()
            .map(|c| {
                let pv = Vars::new(&c.parameters);
                Ok(Chart {
                    bounds: c.bounds.iter().map(|b| (b[0], b[1])).collect(),
                    map: c.map.iter().map(|s| parse(&pv, s)).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?
    };
    let casimirs = l.casimirs.iter().map(|c| parse(vars, c)).collect::<Result<Vec<_>>>()?;
    let order = l.quadrature_order.unwrap_or(default_order);
    let pl = Arc::new(ParamLeaf::new(ps, charts, casimirs, order)?);
    Ok(ModelLeaf {
        leaf: Arc::new(Leaf::Parameterized((*pl).clone())),
        param: Some(pl),
        expect_flat_sections: None,
        probes,
    })
}

fn build_distribution(
    vars: &Vars,
    n: usize,
    leaves: &BTreeMap<String, ModelLeaf>,
    d: &DistributionSpec,
) -> Result<Distribution> {
    let mut out = Distribution::zero(n);
    let leaf = |name: &str| leaves.get(name).ok_or_else(|| anyhow!("unknown leaf `{}`", name));
    for t in &d.terms {
        let w = constant(vars, &t.weight)?;
        let prim = match &t.primitive {
            PrimitiveSpec::Dirac { point: p } => Distribution::dirac(point(vars, p, n)?),
            PrimitiveSpec::DiracDerivative { point: p, direction } => {
                Distribution::dirac_derivative(point(vars, p, n)?, point(vars, direction, n)?.0)?
            }
            PrimitiveSpec::LeafDelta { leaf: l } => {
                let pl = leaf(l)?.param.clone().ok_or_else(|| anyhow!("leaf delta needs a parameterized leaf, `{}` is a point", l))?;
                Distribution::from_primitive(Primitive::LeafDelta(pl))
            }
            PrimitiveSpec::TransversalDelta { leaf: l, u } => {
                let u = KVector::parse(u, vars)?;
                let u = if u.is_zero() { KVector::zero(n, n - leaf_dim(&leaf(l)?.leaf)) } else { u };
                Distribution::transversal_delta(leaf(l)?.leaf.clone(), u)?
            }
        };
        out = out.add(&prim.scale(&w))?;
    }
    out.realization()?;
    Ok(out)
}

fn leaf_dim(l: &Leaf) -> usize {
    match l {
        Leaf::Point(_) => 0,
        Leaf::Parameterized(p) => p.leaf_dim(),
    }
}
