//! Scenario files: TOML schema, validation with field paths, and conversion
//! into engine types.

use std::collections::BTreeMap;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use ptwall_core::classlat::{GeometryModel, KClass};
use ptwall_core::quasipoly::{Poly, QuasiPoly};
use ptwall_core::rat::parse;
use ptwall_core::stability::PairSlope;
use ptwall_core::vertexmodel::{
    CoeffRing, Parity, RingElem, SymbolTable, VertexConfig, WeightPoly, WeightTable,
};
use ptwall_core::wallcross::{Basis, DtEntry, InsertionFunctional, ModVal, Scenario};
use ptwall_core::Q;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDoc {
    geometry: GeometryDoc,
    vertex: VertexDoc,
    #[serde(default)]
    dt: Vec<DtDoc>,
    #[serde(default)]
    query: Vec<QueryDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryDoc {
    c1: Vec<i64>,
    omega: Vec<toml::Value>,
    ample: Vec<i64>,
    euler: Option<Vec<Vec<i64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    parity: Option<String>,
    #[serde(default)]
    truncation: u32,
    point: String,
    zero_above: Option<u32>,
    symbols: Vec<SymbolDoc>,
    #[serde(default)]
    weights: Vec<WeightDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymbolDoc {
    name: String,
    d: i64,
    beta: Vec<i64>,
    #[serde(default)]
    n: i64,
    hdeg: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightDoc {
    index: u32,
    ranks: Option<[i64; 2]>,
    left: Option<ClassKeyDoc>,
    right: Option<ClassKeyDoc>,
    terms: Vec<WeightTermDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassKeyDoc {
    d: i64,
    beta: Vec<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightTermDoc {
    #[serde(default)]
    x: u32,
    #[serde(default)]
    y: u32,
    #[serde(default)]
    s: u32,
    coeff: toml::Value,
}

type ValueDoc = BTreeMap<String, toml::Value>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DtDoc {
    beta: Vec<i64>,
    threshold: toml::Value,
    vanish_below: i64,
    residues: Vec<Vec<ValueDoc>>,
    #[serde(default)]
    middle: BTreeMap<String, ValueDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassDoc {
    d: i64,
    beta: Vec<i64>,
    n: i64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StabilityDoc {
    omega: Option<Vec<toml::Value>>,
    #[serde(default = "zero_value")]
    c: toml::Value,
}

fn zero_value() -> toml::Value {
    toml::Value::Integer(0)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InsertionDoc {
    weights: ValueDoc,
    #[serde(default)]
    degree: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryDoc {
    op: String,
    beta: Option<Vec<i64>>,
    n: Option<Vec<i64>>,
    omega: Option<Vec<toml::Value>>,
    width: Option<i64>,
    classes: Option<Vec<ClassDoc>>,
    tau: Option<StabilityDoc>,
    tau_tilde: Option<StabilityDoc>,
    insertion: Option<InsertionDoc>,
}

/// A validated query.
#[derive(Debug, Clone)]
pub enum Query {
    PtGen {
        beta: Vec<i64>,
        insertion: Option<InsertionFunctional>,
    },
    Wallcross {
        beta: Vec<i64>,
        ns: Vec<i64>,
        omega: Vec<Q>,
        width: i64,
    },
    Coeffs {
        classes: Vec<KClass>,
        tau: PairSlope,
        tau_tilde: PairSlope,
    },
}

impl Query {
    pub fn op(&self) -> &'static str {
        match self {
            Query::PtGen { .. } => "ptgen",
            Query::Wallcross { .. } => "wallcross",
            Query::Coeffs { .. } => "coeffs",
        }
    }
}

/// Everything read from one scenario file.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub scenario: Scenario,
    pub queries: Vec<Query>,
    pub hash: String,
}

fn invalid(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{path}: {msg}"))
}

/// Integer or `"p/q"` string; floats are rejected.
fn rational(v: &toml::Value, path: &str) -> Result<Q, CliError> {
    match v {
        toml::Value::Integer(i) => Ok(Q::from_integer((*i).into())),
        toml::Value::String(s) => {
            parse(s).ok_or_else(|| invalid(path, format!("invalid rational `{s}`")))
        }
        toml::Value::Float(_) => Err(invalid(
            path,
            "floating point values are not accepted; write a fraction string",
        )),
        other => Err(invalid(
            path,
            format!("expected a rational, found {}", other.type_str()),
        )),
    }
}

fn rationals(vs: &[toml::Value], path: &str) -> Result<Vec<Q>, CliError> {
    vs.iter()
        .enumerate()
        .map(|(i, v)| rational(v, &format!("{path}[{i}]")))
        .collect()
}

/// Parses `a*b^2 t^1 s^2` (the display form of [`Basis`]).
pub fn parse_basis(text: &str, path: &str) -> Result<Basis, CliError> {
    let mut tokens = text.split_whitespace();
    let head = tokens
        .next()
        .ok_or_else(|| invalid(path, "empty basis label"))?;
    let mut mono: BTreeMap<String, u32> = BTreeMap::new();
    if head != "1" {
        for f in head.split('*') {
            let (name, e) = match f.split_once('^') {
                Some((n, e)) => (
                    n,
                    e.parse::<u32>()
                        .map_err(|_| invalid(path, format!("bad exponent in `{f}`")))?,
                ),
                None => (f, 1),
            };
            if name.is_empty() || e == 0 {
                return Err(invalid(path, format!("bad factor `{f}`")));
            }
            *mono.entry(name.to_string()).or_default() += e;
        }
    }
    let (mut tdeg, mut spow) = (0, 0);
    for t in tokens {
        let (k, e) = t
            .split_once('^')
            .ok_or_else(|| invalid(path, format!("bad token `{t}`")))?;
        let e = e
            .parse::<u32>()
            .map_err(|_| invalid(path, format!("bad exponent in `{t}`")))?;
        match k {
            "t" => tdeg = e,
            "s" => spow = e,
            _ => return Err(invalid(path, format!("unknown generator `{k}`"))),
        }
    }
    Ok(Basis {
        mono: mono.into_iter().collect(),
        tdeg,
        spow,
    })
}

/// Symbol names are ordered by declaration id inside a [`Basis`].
fn canonical_basis(b: Basis, symbols: &SymbolTable, path: &str) -> Result<Basis, CliError> {
    let mut mono = Vec::with_capacity(b.mono.len());
    for (name, e) in b.mono {
        let id = symbols
            .find(&name)
            .ok_or_else(|| invalid(path, format!("unknown symbol `{name}`")))?;
        mono.push((id, name, e));
    }
    mono.sort();
    Ok(Basis {
        mono: mono.into_iter().map(|(_, n, e)| (n, e)).collect(),
        ..b
    })
}

fn module_value(doc: &ValueDoc, symbols: &SymbolTable, path: &str) -> Result<ModVal, CliError> {
    let mut v = ModVal::new();
    for (label, q) in doc {
        let p = format!("{path}.\"{label}\"");
        let b = canonical_basis(parse_basis(label, &p)?, symbols, &p)?;
        v.add_entry(b, rational(q, &p)?);
    }
    Ok(v)
}

fn parity(s: Option<&str>) -> Result<Parity, CliError> {
    match s {
        None | Some("chi-sym") => Ok(Parity::ChiSym),
        Some("zero") => Ok(Parity::Zero),
        Some("euler") => Ok(Parity::Euler),
        Some(other) => Err(invalid(
            "vertex.parity",
            format!("unknown parity `{other}` (chi-sym, zero, euler)"),
        )),
    }
}

fn core(path: &str) -> impl Fn(ptwall_core::Error) -> CliError + '_ {
    move |e| {
        if e.is_validation() {
            invalid(path, e)
        } else {
            CliError::Certification(format!("{path}: {e}"))
        }
    }
}

fn vertex(
    doc: &VertexDoc,
    geometry: GeometryModel,
    truncation: Option<u32>,
) -> Result<VertexConfig, CliError> {
    let n = truncation.unwrap_or(doc.truncation);
    let ring = if n == 0 {
        CoeffRing::rational()
    } else {
        CoeffRing::truncated(n)
    };
    let mut symbols = SymbolTable::new();
    for (i, s) in doc.symbols.iter().enumerate() {
        let path = format!("vertex.symbols[{i}]");
        geometry.check_dim(&s.beta).map_err(core(&path))?;
        symbols
            .add(&s.name, KClass::new(s.d, s.beta.clone(), s.n), s.hdeg)
            .map_err(core(&path))?;
    }
    let mut weights = WeightTable::new();
    if let Some(k) = doc.zero_above {
        weights.set_zero_above(k);
    }
    for (i, w) in doc.weights.iter().enumerate() {
        let path = format!("vertex.weights[{i}]");
        let mut poly = WeightPoly::new();
        for (j, t) in w.terms.iter().enumerate() {
            let tp = format!("{path}.terms[{j}]");
            if t.s > n {
                return Err(invalid(
                    &tp,
                    format!("power s^{} exceeds truncation {n}", t.s),
                ));
            }
            poly.add(
                (t.x, t.y),
                RingElem::monomial(rational(&t.coeff, &format!("{tp}.coeff"))?, t.s),
            );
        }
        match (&w.ranks, &w.left, &w.right) {
            (Some([d1, d2]), None, None) => weights.insert_default(w.index, *d1, *d2, poly),
            (None, Some(l), Some(r)) => {
                geometry.check_dim(&l.beta).map_err(core(&path))?;
                geometry.check_dim(&r.beta).map_err(core(&path))?;
                weights.insert(w.index, (l.d, l.beta.clone()), (r.d, r.beta.clone()), poly)
            }
            _ => {
                return Err(invalid(
                    &path,
                    "give either `ranks` or both `left` and `right`",
                ))
            }
        }
        .map_err(core(&path))?;
    }
    Ok(VertexConfig {
        geometry,
        ring,
        symbols,
        weights,
        parity: parity(doc.parity.as_deref())?,
    })
}

fn dt_entry(doc: &DtDoc, path: &str, symbols: &SymbolTable) -> Result<DtEntry, CliError> {
    if doc.residues.is_empty() {
        return Err(invalid(
            &format!("{path}.residues"),
            "need at least one residue class",
        ));
    }
    let mut polys = Vec::with_capacity(doc.residues.len());
    for (r, coeffs) in doc.residues.iter().enumerate() {
        let coeffs = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| module_value(c, symbols, &format!("{path}.residues[{r}][{k}]")))
            .collect::<Result<Vec<_>, _>>()?;
        polys.push(Poly::new(coeffs));
    }
    let values = QuasiPoly::new(polys).map_err(core(&format!("{path}.residues")))?;
    let mut middle = BTreeMap::new();
    for (key, v) in &doc.middle {
        let p = format!("{path}.middle.\"{key}\"");
        let n: i64 = key
            .trim()
            .parse()
            .map_err(|_| invalid(&p, "key must be an integer"))?;
        middle.insert(n, module_value(v, symbols, &p)?);
    }
    Ok(DtEntry {
        values,
        threshold: rational(&doc.threshold, &format!("{path}.threshold"))?,
        vanish_below: doc.vanish_below,
        middle,
    })
}

fn stability(
    doc: Option<&StabilityDoc>,
    geometry: &GeometryModel,
    path: &str,
) -> Result<PairSlope, CliError> {
    match doc {
        None => Ok(PairSlope {
            omega: geometry.omega().to_vec(),
            c: Q::from_integer(0.into()),
        }),
        Some(s) => {
            let omega = match &s.omega {
                Some(o) => rationals(o, &format!("{path}.omega"))?,
                None => geometry.omega().to_vec(),
            };
            if omega.len() != geometry.rank() {
                return Err(invalid(
                    &format!("{path}.omega"),
                    format!("expected {} entries", geometry.rank()),
                ));
            }
            Ok(PairSlope {
                omega,
                c: rational(&s.c, &format!("{path}.c"))?,
            })
        }
    }
}

fn required<'a, T>(v: &'a Option<T>, path: &str, field: &str) -> Result<&'a T, CliError> {
    v.as_ref()
        .ok_or_else(|| invalid(path, format!("missing field `{field}`")))
}

fn query(doc: &QueryDoc, path: &str, sc: &Scenario) -> Result<Query, CliError> {
    let geometry = sc.geometry();
    let beta = |b: &Vec<i64>| -> Result<Vec<i64>, CliError> {
        geometry
            .check_dim(b)
            .map_err(core(&format!("{path}.beta")))?;
        Ok(b.clone())
    };
    match doc.op.as_str() {
        "ptgen" => {
            let insertion = match &doc.insertion {
                None => None,
                Some(ins) => {
                    let mut weights = BTreeMap::new();
                    for (label, q) in &ins.weights {
                        let p = format!("{path}.insertion.weights.\"{label}\"");
                        let b = canonical_basis(parse_basis(label, &p)?, &sc.vertex.symbols, &p)?;
                        weights.insert(b, rational(q, &p)?);
                    }
                    let n = sc.ring().truncation();
                    if n > 0 && ins.degree > n {
                        return Err(invalid(
                            &format!("{path}.insertion.degree"),
                            format!(
                                "degree {} needs truncation at least {}",
                                ins.degree, ins.degree
                            ),
                        ));
                    }
                    Some(InsertionFunctional {
                        weights,
                        degree: ins.degree,
                    })
                }
            };
            Ok(Query::PtGen {
                beta: beta(required(&doc.beta, path, "beta")?)?,
                insertion,
            })
        }
        "wallcross" => {
            let omega = rationals(
                required(&doc.omega, path, "omega")?,
                &format!("{path}.omega"),
            )?;
            if omega.len() != geometry.rank() {
                return Err(invalid(
                    &format!("{path}.omega"),
                    format!("expected {} entries", geometry.rank()),
                ));
            }
            Ok(Query::Wallcross {
                beta: beta(required(&doc.beta, path, "beta")?)?,
                ns: required(&doc.n, path, "n")?.clone(),
                omega,
                width: doc.width.unwrap_or(2),
            })
        }
        "coeffs" => {
            let classes = required(&doc.classes, path, "classes")?;
            if classes.is_empty() || classes.len() > 6 {
                return Err(invalid(
                    &format!("{path}.classes"),
                    "need between 1 and 6 classes",
                ));
            }
            let mut out = Vec::with_capacity(classes.len());
            for (i, c) in classes.iter().enumerate() {
                geometry
                    .check_dim(&c.beta)
                    .map_err(core(&format!("{path}.classes[{i}]")))?;
                out.push(KClass::new(c.d, c.beta.clone(), c.n));
            }
            Ok(Query::Coeffs {
                classes: out,
                tau: stability(doc.tau.as_ref(), geometry, &format!("{path}.tau"))?,
                tau_tilde: stability(
                    doc.tau_tilde.as_ref(),
                    geometry,
                    &format!("{path}.tau_tilde"),
                )?,
            })
        }
        other => Err(invalid(
            &format!("{path}.op"),
            format!("unknown operation `{other}` (ptgen, wallcross, coeffs)"),
        )),
    }
}

/// Parses and validates a scenario file's text.
pub fn load(text: &str, truncation: Option<u32>) -> Result<Loaded, CliError> {
    let doc: FileDoc =
        toml::from_str(text).map_err(|e| CliError::Validation(format!("parse error: {e}")))?;
    let g = &doc.geometry;
    let mut geometry = GeometryModel::new(
        g.c1.clone(),
        rationals(&g.omega, "geometry.omega")?,
        g.ample.clone(),
    )
    .map_err(core("geometry"))?;
    if let Some(m) = &g.euler {
        geometry = geometry
            .with_euler_override(m.clone())
            .map_err(core("geometry.euler"))?;
    }
    let vertex = vertex(&doc.vertex, geometry, truncation)?;
    let mut dt = BTreeMap::new();
    for (i, d) in doc.dt.iter().enumerate() {
        let path = format!("dt[{i}]");
        vertex
            .geometry
            .check_dim(&d.beta)
            .map_err(core(&format!("{path}.beta")))?;
        let entry = dt_entry(d, &path, &vertex.symbols)?;
        if dt.insert(d.beta.clone(), entry).is_some() {
            return Err(invalid(&format!("{path}.beta"), "duplicate class"));
        }
    }
    let scenario = Scenario::new(vertex, &doc.vertex.point, dt).map_err(core("dt"))?;
    let queries = doc
        .query
        .iter()
        .enumerate()
        .map(|(i, q)| query(q, &format!("query[{i}]"), &scenario))
        .collect::<Result<Vec<_>, _>>()?;
    let hash = Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    Ok(Loaded {
        scenario,
        queries,
        hash,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_labels_round_trip() {
        for label in ["a", "a*b^2", "a t^1", "a*pt s^2", "1 t^3"] {
            assert_eq!(parse_basis(label, "x").unwrap().to_string(), label);
        }
        assert!(parse_basis("a^0", "x").is_err());
        assert!(parse_basis("a u^2", "x").is_err());
    }

    #[test]
    fn floats_are_rejected() {
        let err = rational(&toml::Value::Float(0.5), "geometry.omega[0]").unwrap_err();
        assert!(err.to_string().contains("geometry.omega[0]"));
        assert!(rational(&toml::Value::String("1/0".into()), "p").is_err());
        assert_eq!(
            rational(&toml::Value::String("-3/6".into()), "p").unwrap(),
            ptwall_core::rat::frac(-1, 2)
        );
    }
}
