//! Exterior quotients `E/I` whose ideal is generated by degree-2 relations.
//!
//! Two families are built in: the cohomology presentation of the pure
//! symmetric automorphism group (`eta` and `tau` relations on generators
//! `e_{p,q}`), and the cohomology of a product of `n-1` free groups of rank
//! `n`. Anything else comes in through the JSON presentation format.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exterior::{
    basis_monomials, flat, labels, ExtElement, Monomial, Rational, MAX_GENERATORS,
};
use crate::linalg::RationalMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Mccool,
    ProductFree,
    Custom,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Presentation {
    pub name: String,
    pub family: Family,
    /// Family parameter, 0 for custom presentations.
    pub n: usize,
    pub generators: Vec<String>,
    pub relations: Vec<ExtElement>,
    pub relation_ids: Vec<String>,
    /// Generator blocks of the product-of-free-groups family.
    pub blocks: Option<Vec<Vec<usize>>>,
    independent: bool,
}

impl Presentation {
    /// Validates and assembles a presentation, computing the independence
    /// flag of the relation list.
    pub fn new(
        name: impl Into<String>,
        family: Family,
        n: usize,
        generators: Vec<String>,
        relations: Vec<ExtElement>,
        relation_ids: Vec<String>,
        blocks: Option<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        if generators.len() > MAX_GENERATORS {
            return Err(Error::Parameter(format!(
                "{} generators exceed the supported {MAX_GENERATORS}",
                generators.len()
            )));
        }
        if relation_ids.len() != relations.len() {
            return Err(Error::Shape("one identifier per relation required".into()));
        }
        for (r, id) in relations.iter().zip(&relation_ids) {
            if r.degree() != 2 {
                return Err(Error::DegreeMismatch {
                    left: 2,
                    right: r.degree(),
                });
            }
            if r.terms()
                .any(|(m, _)| m.indices().any(|i| i >= generators.len()))
            {
                return Err(Error::Shape(format!(
                    "relation {id} uses an unknown generator"
                )));
            }
        }
        let mut p = Presentation {
            name: name.into(),
            family,
            n,
            generators,
            relations,
            relation_ids,
            blocks,
            independent: false,
        };
        let basis = i2_basis(&p);
        p.independent = basis.independent;
        Ok(p)
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    /// Whether the relations are linearly independent in `E^2`.
    pub fn relations_independent(&self) -> bool {
        self.independent
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }

    pub fn relation_index(&self, id: &str) -> Option<usize> {
        self.relation_ids.iter().position(|r| r == id)
    }

    /// JSON document in the presentation exchange format.
    pub fn to_json(&self) -> Value {
        let relations: Vec<Value> = self
            .relations
            .iter()
            .map(|r| {
                Value::Array(
                    r.terms()
                        .map(|(m, c)| {
                            let names: Vec<&str> =
                                m.indices().map(|i| self.generators[i].as_str()).collect();
                            json!([[int_json(c.numer()), int_json(c.denom())], names])
                        })
                        .collect(),
                )
            })
            .collect();
        let mut doc = json!({
            "name": self.name,
            "generators": self.generators,
            "relations": relations,
            "family": self.family,
            "n": self.n,
            "relation_ids": self.relation_ids,
        });
        if let Some(b) = &self.blocks {
            doc["blocks"] = json!(b);
        }
        doc
    }
}

fn int_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

fn check_family_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Parameter(format!(
            "family parameter n must be at least 2, got {n}"
        )));
    }
    if n * (n - 1) > MAX_GENERATORS {
        return Err(Error::Parameter(format!(
            "n = {n} needs more than {MAX_GENERATORS} generators"
        )));
    }
    Ok(())
}

fn gen(n: usize, p: usize, q: usize) -> ExtElement {
    ExtElement::generator(flat(p, q, n))
}

/// `eta_{i,j} = e_{i,j} e_{j,i}`.
pub fn eta(n: usize, i: usize, j: usize) -> ExtElement {
    gen(n, i, j).multiply(&gen(n, j, i))
}

/// `tau^k_{i,j} = (e_{k,i} - e_{j,i})(e_{k,j} - e_{i,j})`.
pub fn tau(n: usize, k: usize, i: usize, j: usize) -> ExtElement {
    let left = gen(n, k, i).try_sub(&gen(n, j, i)).expect("degree one");
    let right = gen(n, k, j).try_sub(&gen(n, i, j)).expect("degree one");
    left.multiply(&right)
}

pub fn eta_id(i: usize, j: usize) -> String {
    format!("eta_{{{i},{j}}}")
}

pub fn tau_id(k: usize, i: usize, j: usize) -> String {
    format!("tau^{k}_{{{i},{j}}}")
}

/// Cohomology presentation of the pure symmetric automorphism group: all
/// `eta_{i,j}` for `i < j`, then all `tau^k_{i,j}` ordered by `(i,j,k)`.
pub fn mccool_presentation(n: usize) -> Result<Presentation> {
    check_family_n(n)?;
    let generators = labels(n).iter().map(|g| g.to_string()).collect();
    let mut relations = Vec::new();
    let mut ids = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            relations.push(eta(n, i, j));
            ids.push(eta_id(i, j));
        }
    }
    for i in 1..=n {
        for j in i + 1..=n {
            for k in (1..=n).filter(|&k| k != i && k != j) {
                relations.push(tau(n, k, i, j));
                ids.push(tau_id(k, i, j));
            }
        }
    }
    Presentation::new(
        format!("mccool-{n}"),
        Family::Mccool,
        n,
        generators,
        relations,
        ids,
        None,
    )
}

/// Cohomology of `F_n x ... x F_n` (`n-1` factors): generators in `n-1`
/// blocks of `n`, every product of two generators from one block vanishes.
pub fn product_free_presentation(n: usize) -> Result<Presentation> {
    check_family_n(n)?;
    let mut generators = Vec::new();
    let mut blocks = Vec::new();
    for b in 1..n {
        let start = generators.len();
        for i in 1..=n {
            generators.push(format!("f{b}_{i}"));
        }
        blocks.push((start..start + n).collect::<Vec<_>>());
    }
    let mut relations = Vec::new();
    let mut ids = Vec::new();
    for (b, block) in blocks.iter().enumerate() {
        for (x, &g) in block.iter().enumerate() {
            for (y, &h) in block.iter().enumerate().skip(x + 1) {
                relations.push(ExtElement::generator(g).multiply(&ExtElement::generator(h)));
                ids.push(format!("rho^{}_{{{},{}}}", b + 1, x + 1, y + 1));
            }
        }
    }
    Presentation::new(
        format!("product-free-{n}"),
        Family::ProductFree,
        n,
        generators,
        relations,
        ids,
        Some(blocks),
    )
}

/// Coordinates of the relations in the degree-2 monomial basis.
#[derive(Clone, Debug)]
pub struct I2Basis {
    /// One row per relation, one column per degree-2 monomial (colex order).
    pub matrix: RationalMatrix,
    pub dim: usize,
    pub independent: bool,
}

pub fn i2_basis(p: &Presentation) -> I2Basis {
    let monos = basis_monomials(2, p.num_generators());
    let index: BTreeMap<Monomial, usize> = monos.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let rows: Vec<Vec<Rational>> = p
        .relations
        .iter()
        .map(|r| {
            r.coordinates(&index, monos.len())
                .expect("relations are degree 2")
        })
        .collect();
    let mut matrix = if rows.is_empty() {
        RationalMatrix::zeros(0, monos.len())
    } else {
        RationalMatrix::from_rows(rows).expect("uniform row length")
    };
    matrix.row_labels = Some(p.relation_ids.clone());
    let dim = matrix.rank();
    I2Basis {
        dim,
        independent: dim == p.relations.len(),
        matrix,
    }
}

// ---------------------------------------------------------------------------
// JSON ingestion

fn parse_integer(v: &Value, loc: &str) -> Result<BigInt> {
    match v {
        Value::Number(num) => num
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::parse(loc, "expected an integer")),
        Value::String(s) => s
            .trim()
            .parse::<BigInt>()
            .map_err(|_| Error::parse(loc, format!("'{s}' is not an integer"))),
        _ => Err(Error::parse(loc, "expected an integer")),
    }
}

/// Parses `[num, den]` into a rational.
pub fn parse_rational(v: &Value, loc: &str) -> Result<Rational> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::parse(loc, "expected a [numerator, denominator] pair"))?;
    let num = parse_integer(&pair[0], &format!("{loc}[0]"))?;
    let den = parse_integer(&pair[1], &format!("{loc}[1]"))?;
    if den.is_zero() {
        return Err(Error::parse(format!("{loc}[1]"), "zero denominator"));
    }
    Ok(Rational::new(num, den))
}

fn rational_json(c: &Rational) -> Value {
    json!([int_json(c.numer()), int_json(c.denom())])
}

/// Parses a presentation document (see the README for the schema).
pub fn parse_presentation(doc: &Value) -> Result<Presentation> {
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::parse("$", "presentation must be a JSON object"))?;
    let name = match obj.get("name") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::parse("$.name", "expected a string")),
        None => return Err(Error::parse("$.name", "missing field")),
    };
    let gens = obj
        .get("generators")
        .ok_or_else(|| Error::parse("$.generators", "missing field"))?
        .as_array()
        .ok_or_else(|| Error::parse("$.generators", "expected an array of strings"))?;
    let mut generators = Vec::with_capacity(gens.len());
    let mut index = HashMap::new();
    for (i, g) in gens.iter().enumerate() {
        let loc = format!("$.generators[{i}]");
        let s = g
            .as_str()
            .ok_or_else(|| Error::parse(&loc, "expected a string"))?;
        if index.insert(s.to_string(), i).is_some() {
            return Err(Error::parse(&loc, format!("duplicate generator '{s}'")));
        }
        generators.push(s.to_string());
    }
    if generators.len() > MAX_GENERATORS {
        return Err(Error::parse(
            "$.generators",
            format!("at most {MAX_GENERATORS} generators are supported"),
        ));
    }
    let rels = obj
        .get("relations")
        .ok_or_else(|| Error::parse("$.relations", "missing field"))?
        .as_array()
        .ok_or_else(|| Error::parse("$.relations", "expected an array"))?;
    let mut relations = Vec::with_capacity(rels.len());
    for (r, rel) in rels.iter().enumerate() {
        let loc = format!("$.relations[{r}]");
        let terms = rel
            .as_array()
            .ok_or_else(|| Error::parse(&loc, "relation must be an array of terms"))?;
        let mut element = ExtElement::zero(2);
        for (t, term) in terms.iter().enumerate() {
            let tloc = format!("{loc}[{t}]");
            let parts = term
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::parse(&tloc, "term must be [[num, den], [gen_a, gen_b]]"))?;
            let coeff = parse_rational(&parts[0], &format!("{tloc}[0]"))?;
            let names = parts[1].as_array().ok_or_else(|| {
                Error::parse(format!("{tloc}[1]"), "expected a list of generator names")
            })?;
            if names.len() != 2 {
                return Err(Error::parse(
                    format!("{tloc}[1]"),
                    "relation not homogeneous of degree 2",
                ));
            }
            let mut idx = [0usize; 2];
            for (s, nm) in names.iter().enumerate() {
                let nloc = format!("{tloc}[1][{s}]");
                let nm = nm
                    .as_str()
                    .ok_or_else(|| Error::parse(&nloc, "expected a generator name"))?;
                idx[s] = *index
                    .get(nm)
                    .ok_or_else(|| Error::parse(&nloc, format!("unknown generator '{nm}'")))?;
            }
            let product = ExtElement::generator(idx[0]).multiply(&ExtElement::generator(idx[1]));
            element = element.try_add(&product.scale(&coeff)).expect("degree 2");
        }
        relations.push(element);
    }
    let relation_ids = match obj.get("relation_ids") {
        None => (0..relations.len())
            .map(|i| format!("r{}", i + 1))
            .collect(),
        Some(v) => {
            let ids: Option<Vec<String>> = v
                .as_array()
                .map(|a| a.iter().map(|x| x.as_str().map(str::to_string)).collect())
                .unwrap_or(None);
            match ids {
                Some(ids) if ids.len() == relations.len() => ids,
                _ => {
                    return Err(Error::parse(
                        "$.relation_ids",
                        "expected one string per relation",
                    ))
                }
            }
        }
    };
    let family = match obj.get("family") {
        None => Family::Custom,
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| Error::parse("$.family", e.to_string()))?,
    };
    let n = match obj.get("n") {
        None => 0,
        Some(v) => v
            .as_u64()
            .ok_or_else(|| Error::parse("$.n", "expected a non-negative integer"))?
            as usize,
    };
    let blocks = match obj.get("blocks") {
        None => None,
        Some(v) => Some(
            serde_json::from_value::<Vec<Vec<usize>>>(v.clone())
                .map_err(|e| Error::parse("$.blocks", e.to_string()))?,
        ),
    };
    if let Some(b) = &blocks {
        if b.iter().flatten().any(|&g| g >= generators.len()) {
            return Err(Error::parse(
                "$.blocks",
                "block refers to an unknown generator",
            ));
        }
    }
    Presentation::new(name, family, n, generators, relations, relation_ids, blocks)
}

pub fn parse_presentation_str(text: &str) -> Result<Presentation> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    parse_presentation(&doc)
}

// ---------------------------------------------------------------------------
// Points of A^1

/// A degree-one element `a = sum_g a_g e_g`, by flat generator index.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Point {
    pub coords: Vec<Rational>,
}

impl Point {
    pub fn zero(len: usize) -> Self {
        Point {
            coords: vec![Rational::zero(); len],
        }
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        Point {
            coords: coords
                .iter()
                .map(|&x| Rational::from_integer(x.into()))
                .collect(),
        }
    }

    /// Sparse construction from `(flat index, value)` pairs.
    pub fn sparse(len: usize, entries: &[(usize, i64)]) -> Self {
        let mut p = Point::zero(len);
        for &(i, v) in entries {
            p.coords[i] = Rational::from_integer(v.into());
        }
        p
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.coords[i]
    }

    pub fn scale(&self, c: &Rational) -> Point {
        Point {
            coords: self.coords.iter().map(|x| x * c).collect(),
        }
    }

    pub fn try_add(&self, other: &Point) -> Result<Point> {
        if self.len() != other.len() {
            return Err(Error::Shape("points of different length".into()));
        }
        Ok(Point {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn as_element(&self) -> ExtElement {
        ExtElement::from_coords(&self.coords)
    }

    /// Relabels `a_{p,q} -> a_{s(p),s(q)}` for a permutation `s` of
    /// `1..=n`, given 0-based as `perm[p-1] = s(p)-1`.
    pub fn permuted(&self, n: usize, perm: &[usize]) -> Point {
        let mut out = Point::zero(self.len());
        for g in labels(n) {
            let src = flat(g.p, g.q, n);
            let dst = flat(perm[g.p - 1] + 1, perm[g.q - 1] + 1, n);
            out.coords[dst] = self.coords[src].clone();
        }
        out
    }

    /// Sparse JSON map from generator names to `[num, den]`.
    pub fn to_json(&self, generators: &[String]) -> Value {
        let mut map = serde_json::Map::new();
        for (i, c) in self.coords.iter().enumerate() {
            if !c.is_zero() {
                map.insert(generators[i].clone(), rational_json(c));
            }
        }
        Value::Object(map)
    }

    /// Compact text form such as `3*e[2,1] - e[3,1]`.
    pub fn render(&self, generators: &[String]) -> String {
        let mut s = String::new();
        for (i, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if !s.is_empty() || c.is_negative() {
                s.push_str(sign);
            }
            if !c.abs().is_one() {
                s.push_str(&format!("{}*", c.abs()));
            }
            s.push_str(&format!("e[{}]", generators[i]));
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }
}

/// Parses a point document: a JSON object mapping generator names to
/// `[num, den]`. Missing generators default to zero.
pub fn parse_point(doc: &Value, p: &Presentation) -> Result<Point> {
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::parse("$", "point must be a JSON object of label -> [num, den]"))?;
    let mut point = Point::zero(p.num_generators());
    for (label, v) in obj {
        let loc = format!("$[\"{label}\"]");
        let i = p
            .generator_index(label.trim())
            .ok_or_else(|| Error::parse(&loc, format!("unknown generator '{label}'")))?;
        point.coords[i] = parse_rational(v, &loc)?;
    }
    Ok(point)
}

pub fn parse_point_str(text: &str, p: &Presentation) -> Result<Point> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    parse_point(&doc, p)
}

/// The `(1+nt)^(n-1)` coefficients followed by a trailing zero for degree
/// `n`.
pub fn expected_poincare(n: usize) -> Vec<u128> {
    let mut out: Vec<u128> = (0..n)
        .map(|k| binomial(n - 1, k) * (n as u128).pow(k as u32))
        .collect();
    out.push(0);
    out
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}
