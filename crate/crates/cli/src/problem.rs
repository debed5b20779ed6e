//! Problem-file schema and its conversion to library types.

use num_complex::Complex;
use num_rational::Rational64;
use resdiv::extension::SmoothGerm;
use resdiv::kernels::WeightSpec;
use resdiv::membership::{Germ, GermTerm, MonomialIdeal};
use resdiv::poly::{Monomial, Poly};
use resdiv::quadrature::{Domain, Rule, Scheme};
use resdiv::symbolic::C64;
use serde::{Deserialize, Serialize};

use crate::InputError;

pub const VERSION: &str = "resdiv/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    VerifyIdentities,
    Reproduce,
    Divide,
    ResiduePairing,
    Membership,
    CounterexampleDemo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: String,
    pub task: Task,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightFile>,
    /// Generators of the Koszul complex.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complex: Option<Vec<PolyFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ideal: Option<IdealFile>,
    /// `a0` and `s` of the current `dbar(1 / a0^s)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residue: Option<ResidueFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub data: Vec<PolyFile>,
    /// Expected solution, one polynomial per component.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expected: Vec<PolyFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ladder: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<ComplexFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeFile>,
    /// Truncation order of almost holomorphic extensions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension_order: Option<u32>,
    /// Expected membership verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_member: Option<bool>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    Ball { radius: f64 },
    Shell { inner: f64, outer: f64 },
    Polydisc { radii: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightFile {
    pub radius: f64,
    pub inner: f64,
    pub outer: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexFile {
    pub re: f64,
    pub im: f64,
}

/// Exact rational as a JSON number (integers) or a string `"p/q"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    pub fn to_f64(&self) -> Result<f64, String> {
        match self {
            Number::Int(k) => Ok(*k as f64),
            Number::Float(x) => Ok(*x),
            Number::Text(_) => {
                let r = self.to_rational()?;
                Ok(*r.numer() as f64 / *r.denom() as f64)
            }
        }
    }

    pub fn to_rational(&self) -> Result<Rational64, String> {
        match self {
            Number::Int(k) => Ok(Rational64::from_integer(*k)),
            Number::Float(x) => {
                if x.fract() == 0.0 && x.abs() < 1e15 {
                    Ok(Rational64::from_integer(*x as i64))
                } else {
                    Err(format!("{x} is not exact; write it as a string \"p/q\""))
                }
            }
            Number::Text(s) => {
                let parse = |t: &str| t.trim().parse::<i64>().map_err(|_| format!("bad rational {s:?}"));
                match s.split_once('/') {
                    Some((p, q)) => {
                        let q = parse(q)?;
                        if q == 0 {
                            return Err(format!("zero denominator in {s:?}"));
                        }
                        Ok(Rational64::new(parse(p)?, q))
                    }
                    None => Ok(Rational64::from_integer(parse(s)?)),
                }
            }
        }
    }
}

/// `(re + i im) zeta^zexp conj(zeta)^zbarexp`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub re: Number,
    #[serde(default = "zero")]
    pub im: Number,
    pub zexp: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zbarexp: Option<Vec<u32>>,
}

fn zero() -> Number {
    Number::Int(0)
}

pub type PolyFile = Vec<TermFile>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdealFile {
    pub generators: Vec<Vec<u32>>,
    pub r: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidueFile {
    pub a0: Vec<u32>,
    pub s: u32,
    /// Coefficient `xi` of the test form `xi dzeta bump / 2 pi i` (pairing task).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub test: PolyFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleFile {
    #[serde(default = "tensor")]
    pub scheme: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simplex: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angular: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub panels: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub breaks: Vec<f64>,
    /// `(ratio, levels)` of geometric radial panels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading: Option<(f64, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn tensor() -> String {
    "tensor".into()
}

/// Ray probe for the growth of pointwise solutions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeFile {
    /// Data are `(-zeta_2, zeta_1) |zeta|^exponent` when set, else `data`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial_power: Option<f64>,
    pub direction: Vec<ComplexFile>,
    pub radii: Vec<f64>,
    pub expected_exponent: f64,
    /// Accept any exponent at least `expected_exponent - tol` instead of a band.
    #[serde(default)]
    pub lower_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_abs")]
    pub abs: f64,
    #[serde(default = "default_rel")]
    pub rel: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_abs() -> f64 {
    1e-9
}

fn default_rel() -> f64 {
    1e-8
}

fn default_samples() -> usize {
    100
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { abs: default_abs(), rel: default_rel(), samples: default_samples() }
    }
}

fn err(pointer: impl Into<String>, message: impl Into<String>) -> InputError {
    InputError { pointer: pointer.into(), message: message.into() }
}

/// Parses JSON text, reporting schema violations with a JSON pointer.
pub fn parse(text: &str) -> Result<ProblemFile, InputError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let problem: ProblemFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let mut pointer: String = e.path().iter().map(|seg| format!("/{}", segment(seg))).collect();
        let message = e.inner().to_string();
        if let Some(field) = message.strip_prefix("missing field `").and_then(|m| m.split('`').next()) {
            pointer.push('/');
            pointer.push_str(field);
        }
        err(pointer, message)
    })?;
    validate(&problem)?;
    Ok(problem)
}

fn segment(seg: &serde_path_to_error::Segment) -> String {
    use serde_path_to_error::Segment;
    match seg {
        Segment::Seq { index } => index.to_string(),
        Segment::Map { key } => key.replace('~', "~0").replace('/', "~1"),
        Segment::Enum { variant } => variant.clone(),
        Segment::Unknown => "?".into(),
    }
}

fn validate(p: &ProblemFile) -> Result<(), InputError> {
    if p.version != VERSION {
        return Err(err("/version", format!("expected {VERSION:?}, got {:?}", p.version)));
    }
    if p.n == 0 || p.n > 4 {
        return Err(err("/n", "dimension must be between 1 and 4"));
    }
    let need = |present: bool, field: &str| {
        if present {
            Ok(())
        } else {
            Err(err(format!("/{field}"), format!("task {:?} needs {field:?}", p.task)))
        }
    };
    match p.task {
        Task::Reproduce => {
            need(!p.data.is_empty(), "data")?;
            need(!p.points.is_empty(), "points")?;
        }
        Task::Divide => {
            need(p.complex.is_some(), "complex")?;
            need(!p.data.is_empty(), "data")?;
            need(!p.points.is_empty(), "points")?;
        }
        Task::ResiduePairing => {
            need(p.residue.is_some(), "residue")?;
            if p.n != 1 {
                return Err(err("/n", "residue pairings are implemented in one variable"));
            }
        }
        Task::Membership => need(p.ideal.is_some() || p.residue.is_some(), "ideal")?,
        Task::CounterexampleDemo => {
            need(p.probe.is_some(), "probe")?;
            need(p.complex.is_some(), "complex")?;
        }
        Task::VerifyIdentities => {}
    }
    for (i, pt) in p.points.iter().enumerate() {
        if pt.len() != p.n {
            return Err(err(format!("/points/{i}"), format!("expected {} coordinates", p.n)));
        }
    }
    Ok(())
}

impl ComplexFile {
    pub fn to_c64(self) -> C64 {
        C64::new(self.re, self.im)
    }

    pub fn from_c64(c: C64) -> Self {
        ComplexFile { re: c.re, im: c.im }
    }
}

fn check_exps(e: &[u32], n: usize, pointer: &str) -> Result<(), InputError> {
    if e.len() != n {
        return Err(err(pointer, format!("expected {n} exponents, got {}", e.len())));
    }
    Ok(())
}

pub fn to_poly(poly: &PolyFile, n: usize, pointer: &str) -> Result<Poly, InputError> {
    let mut p = Poly::zero(n);
    for (i, t) in poly.iter().enumerate() {
        let here = format!("{pointer}/{i}");
        check_exps(&t.zexp, n, &format!("{here}/zexp"))?;
        let zbar = t.zbarexp.clone().unwrap_or_else(|| vec![0; n]);
        check_exps(&zbar, n, &format!("{here}/zbarexp"))?;
        let re = t.re.to_f64().map_err(|m| err(format!("{here}/re"), m))?;
        let im = t.im.to_f64().map_err(|m| err(format!("{here}/im"), m))?;
        p.add_term(C64::new(re, im), Monomial { zeta: t.zexp.clone(), zeta_bar: zbar, z: vec![0; n] });
    }
    Ok(p)
}

pub fn to_germ(poly: &PolyFile, n: usize, pointer: &str) -> Result<Germ, InputError> {
    let mut g = Germ::zero(n);
    for (i, t) in poly.iter().enumerate() {
        let here = format!("{pointer}/{i}");
        check_exps(&t.zexp, n, &format!("{here}/zexp"))?;
        let zbar = t.zbarexp.clone().unwrap_or_else(|| vec![0; n]);
        check_exps(&zbar, n, &format!("{here}/zbarexp"))?;
        let re = t.re.to_rational().map_err(|m| err(format!("{here}/re"), m))?;
        let im = t.im.to_rational().map_err(|m| err(format!("{here}/im"), m))?;
        g.add_term(GermTerm::new(Complex::new(re, im), &t.zexp, &zbar)).map_err(|e| err(here, e.to_string()))?;
    }
    Ok(g)
}

fn rational_text(r: &Rational64) -> Number {
    if r.is_integer() {
        Number::Int(*r.numer())
    } else {
        Number::Text(format!("{}/{}", r.numer(), r.denom()))
    }
}

/// Germ with exact coefficients as a term list.
pub fn from_germ(g: &Germ) -> PolyFile {
    g.terms()
        .map(|t| TermFile {
            re: rational_text(&t.coeff.re),
            im: rational_text(&t.coeff.im),
            zexp: t.a,
            zbarexp: Some(t.b),
        })
        .collect()
}

impl ProblemFile {
    pub fn data_polys(&self) -> Result<Vec<Poly>, InputError> {
        self.data.iter().enumerate().map(|(i, p)| to_poly(p, self.n, &format!("/data/{i}"))).collect()
    }

    pub fn data_germs(&self) -> Result<Vec<SmoothGerm>, InputError> {
        Ok(self.data_polys()?.into_iter().map(SmoothGerm::Poly).collect())
    }

    pub fn generators(&self) -> Result<Vec<Poly>, InputError> {
        let gens = self.complex.as_ref().ok_or_else(|| err("/complex", "missing complex"))?;
        let polys: Vec<Poly> =
            gens.iter().enumerate().map(|(i, p)| to_poly(p, self.n, &format!("/complex/{i}"))).collect::<Result<_, _>>()?;
        if let Some(i) = polys.iter().position(|p| !p.is_holomorphic()) {
            return Err(err(format!("/complex/{i}"), "generators must be holomorphic"));
        }
        Ok(polys)
    }

    pub fn expected_polys(&self) -> Result<Vec<Poly>, InputError> {
        self.expected.iter().enumerate().map(|(i, p)| to_poly(p, self.n, &format!("/expected/{i}"))).collect()
    }

    pub fn points_c64(&self) -> Vec<Vec<C64>> {
        self.points.iter().map(|pt| pt.iter().map(|c| c.to_c64()).collect()).collect()
    }

    pub fn weight_spec(&self) -> WeightSpec {
        match &self.weight {
            Some(w) => WeightSpec::ball_with_radii(w.radius, w.inner, w.outer),
            None => WeightSpec::ball(1.0),
        }
    }

    pub fn domain(&self, default: Domain) -> Result<Domain, InputError> {
        let origin = vec![C64::new(0.0, 0.0); self.n];
        let d = match &self.domain {
            None => return Ok(default),
            Some(DomainSpec::Ball { radius }) => Domain::Ball { center: origin, radius: *radius },
            Some(DomainSpec::Shell { inner, outer }) => Domain::Shell { center: origin, inner: *inner, outer: *outer },
            Some(DomainSpec::Polydisc { radii }) => Domain::Polydisc { center: vec![C64::new(0.0, 0.0); radii.len()], radii: radii.clone() },
        };
        Ok(d)
    }

    pub fn rule(&self, default: Rule) -> Result<Rule, InputError> {
        let Some(r) = &self.rule else { return Ok(default) };
        let mut rule = default;
        match r.scheme.as_str() {
            "tensor" => rule.scheme = Scheme::TensorGauss,
            "qmc" => rule.scheme = Scheme::Qmc,
            other => return Err(err("/rule/scheme", format!("unknown scheme {other:?}"))),
        }
        if let Some(v) = r.radial {
            rule.radial_nodes = v;
        }
        if let Some(v) = r.simplex {
            rule.simplex_nodes = v;
        }
        if let Some(v) = r.angular {
            rule.angular_nodes = v;
        }
        if let Some(v) = r.panels {
            rule.radial_panels = v;
        }
        if !r.breaks.is_empty() {
            rule.radial_breaks = r.breaks.clone();
        }
        if r.grading.is_some() {
            rule.radial_grading = r.grading;
        }
        if let Some(v) = r.samples {
            rule.qmc_samples = v;
        }
        if let Some(v) = r.seed {
            rule.seed = v;
        }
        Ok(rule)
    }

    pub fn monomial_ideal(&self) -> Result<Option<(MonomialIdeal, u32)>, InputError> {
        let Some(ideal) = &self.ideal else { return Ok(None) };
        let m = MonomialIdeal::new(self.n, ideal.generators.clone()).map_err(|e| err("/ideal/generators", e.to_string()))?;
        if ideal.r == 0 {
            return Err(err("/ideal/r", "r must be positive"));
        }
        Ok(Some((m, ideal.r)))
    }
}
