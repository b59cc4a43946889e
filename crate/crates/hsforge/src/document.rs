//! Canonical JSON documents for polynomials, series, substitution maps and
//! HS-derivations.
//!
//! Serialization is canonical: object keys follow the variable order of the
//! owning variable set, coefficient lists are sorted in the graded order,
//! rationals are reduced strings and prime-field residues plain integers.
//! Parsing followed by serialization is the identity on canonical
//! documents, byte for byte.

use serde_json::{json, Map, Value};

use crate::algebra::{FieldKind, Poly, PolyRing, Scalar};
use crate::multiindex::{CoIdeal, CoIdealRepr, MultiIndex, VarSet};
use crate::series::Series;
use crate::substitution::SubstMap;
use crate::hsderiv::HSDeriv;
use crate::{Error, Result};

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

// ---------- ring ----------

pub fn ring_to_json(ring: &PolyRing) -> Value {
    let mut obj = Map::new();
    match ring.field() {
        FieldKind::Q => {
            obj.insert("field".into(), json!("Q"));
        }
        FieldKind::Gf(p) => {
            obj.insert("field".into(), json!("GF"));
            obj.insert("p".into(), json!(p));
        }
    }
    obj.insert("gens".into(), Value::Array(ring.gens().iter().map(|g| json!(g)).collect()));
    Value::Object(obj)
}

pub fn ring_from_json(v: &Value) -> Result<PolyRing> {
    let obj = v.as_object().ok_or_else(|| parse_err("ring must be an object"))?;
    let field = match obj.get("field").and_then(Value::as_str) {
        Some("Q") => FieldKind::Q,
        Some("GF") => {
            let p = obj
                .get("p")
                .and_then(Value::as_u64)
                .ok_or_else(|| parse_err("GF ring needs a prime p"))?;
            FieldKind::gf(p)?
        }
        _ => return Err(parse_err("field must be \"Q\" or \"GF\"")),
    };
    let gens = obj
        .get("gens")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("ring needs a gens array"))?
        .iter()
        .map(|g| {
            g.as_str()
                .map(str::to_string)
                .ok_or_else(|| parse_err("generator names must be strings"))
        })
        .collect::<Result<Vec<_>>>()?;
    PolyRing::new(field, gens)
}

// ---------- scalar ----------

fn scalar_to_json(c: &Scalar) -> Value {
    match c {
        Scalar::Rat(_) => json!(c.canonical_string()),
        Scalar::Mod { v, .. } => json!(v),
    }
}

fn scalar_from_json(field: &FieldKind, v: &Value) -> Result<Scalar> {
    match (field, v) {
        (FieldKind::Q, Value::String(s)) => Scalar::parse(field, s),
        (FieldKind::Q, Value::Number(n)) => Scalar::parse(field, &n.to_string()),
        (FieldKind::Gf(_), Value::Number(n)) => Scalar::parse(field, &n.to_string()),
        (FieldKind::Gf(_), Value::String(s)) => Scalar::parse(field, s),
        _ => Err(parse_err("bad scalar encoding")),
    }
}

// ---------- polynomial ----------

pub fn poly_to_json(p: &Poly) -> Value {
    let gens = p.ring().gens();
    Value::Array(
        p.terms()
            .map(|(m, c)| {
                let mut expo = Map::new();
                for (i, &e) in m.0.iter().enumerate() {
                    if e > 0 {
                        expo.insert(gens[i].clone(), json!(e));
                    }
                }
                Value::Array(vec![Value::Object(expo), scalar_to_json(c)])
            })
            .collect(),
    )
}

pub fn poly_from_json(ring: &PolyRing, v: &Value) -> Result<Poly> {
    let arr = v.as_array().ok_or_else(|| parse_err("polynomial must be an array"))?;
    let mut out = Poly::zero(ring);
    for term in arr {
        let pair = term.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
            parse_err("polynomial terms must be [exponents, scalar] pairs")
        })?;
        let expo =
            pair[0].as_object().ok_or_else(|| parse_err("exponents must be an object"))?;
        let mut exps = vec![0u32; ring.ngens()];
        for (name, val) in expo {
            let idx = ring
                .gen_index(name)
                .ok_or_else(|| parse_err(format!("unknown generator `{name}`")))?;
            exps[idx] = val
                .as_u64()
                .ok_or_else(|| parse_err("exponents must be non-negative integers"))?
                as u32;
        }
        let c = scalar_from_json(ring.field(), &pair[1])?;
        out = out.add(&Poly::monomial(ring, exps, c)?)?;
    }
    Ok(out)
}

// ---------- multi-index ----------

pub fn mindex_to_json(a: &MultiIndex) -> Value {
    let mut obj = Map::new();
    for (pos, e) in a.exps() {
        obj.insert(a.vars().name(pos).to_string(), json!(e));
    }
    Value::Object(obj)
}

pub fn mindex_from_json(vars: &VarSet, v: &Value) -> Result<MultiIndex> {
    let obj = v.as_object().ok_or_else(|| parse_err("multi-index must be an object"))?;
    let mut pairs = Vec::new();
    for (name, val) in obj {
        let pos = vars
            .index_of(name)
            .ok_or_else(|| parse_err(format!("unknown variable `{name}`")))?;
        let e = val
            .as_u64()
            .ok_or_else(|| parse_err("exponents must be non-negative integers"))? as u32;
        pairs.push((pos, e));
    }
    MultiIndex::from_exps(vars, &pairs)
}

// ---------- co-ideal ----------

pub fn coideal_to_json(c: &CoIdeal) -> Value {
    let mut obj = Map::new();
    match c.repr() {
        CoIdealRepr::Tm(m) => {
            obj.insert("kind".into(), json!("tm"));
            obj.insert("m".into(), json!(m));
        }
        CoIdealRepr::NBeta(beta) => {
            obj.insert("kind".into(), json!("nbeta"));
            obj.insert("beta".into(), mindex_to_json(beta));
        }
        CoIdealRepr::Explicit => {
            obj.insert("kind".into(), json!("explicit"));
            obj.insert(
                "members".into(),
                Value::Array(c.iter().map(mindex_to_json).collect()),
            );
        }
    }
    Value::Object(obj)
}

pub fn coideal_from_json(vars: &VarSet, v: &Value) -> Result<CoIdeal> {
    let obj = v.as_object().ok_or_else(|| parse_err("truncation must be an object"))?;
    match obj.get("kind").and_then(Value::as_str) {
        Some("tm") => {
            let m = obj
                .get("m")
                .and_then(Value::as_u64)
                .ok_or_else(|| parse_err("tm truncation needs m"))? as u32;
            Ok(CoIdeal::tm(vars, m))
        }
        Some("nbeta") => {
            let beta = mindex_from_json(
                vars,
                obj.get("beta").ok_or_else(|| parse_err("nbeta truncation needs beta"))?,
            )?;
            Ok(CoIdeal::nbeta(&beta))
        }
        Some("explicit") => {
            let members = obj
                .get("members")
                .and_then(Value::as_array)
                .ok_or_else(|| parse_err("explicit truncation needs members"))?
                .iter()
                .map(|m| mindex_from_json(vars, m))
                .collect::<Result<std::collections::BTreeSet<_>>>()?;
            CoIdeal::explicit(vars, members)
        }
        _ => Err(parse_err("truncation kind must be tm, nbeta or explicit")),
    }
}

// ---------- series ----------

fn vars_to_json(vars: &VarSet) -> Value {
    Value::Array(vars.names().iter().map(|n| json!(n)).collect())
}

fn vars_from_json(v: &Value) -> Result<VarSet> {
    let names = v
        .as_array()
        .ok_or_else(|| parse_err("vars must be an array"))?
        .iter()
        .map(|n| {
            n.as_str()
                .map(str::to_string)
                .ok_or_else(|| parse_err("variable names must be strings"))
        })
        .collect::<Result<Vec<_>>>()?;
    VarSet::new(names)
}

/// The series payload `{vars, trunc, coeffs}` with coefficients sorted in
/// the graded order.
pub fn series_to_json(s: &Series) -> Value {
    let mut obj = Map::new();
    obj.insert("vars".into(), vars_to_json(s.vars()));
    obj.insert("trunc".into(), coideal_to_json(s.trunc()));
    obj.insert(
        "coeffs".into(),
        Value::Array(
            s.coeffs()
                .map(|(a, c)| Value::Array(vec![mindex_to_json(a), poly_to_json(c)]))
                .collect(),
        ),
    );
    Value::Object(obj)
}

pub fn series_from_json(ring: &PolyRing, v: &Value) -> Result<Series> {
    let obj = v.as_object().ok_or_else(|| parse_err("series must be an object"))?;
    let vars = vars_from_json(obj.get("vars").ok_or_else(|| parse_err("series needs vars"))?)?;
    let trunc = coideal_from_json(
        &vars,
        obj.get("trunc").ok_or_else(|| parse_err("series needs trunc"))?,
    )?;
    let coeffs = obj
        .get("coeffs")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("series needs a coeffs array"))?
        .iter()
        .map(|entry| {
            let pair = entry.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                parse_err("series coefficients must be [index, polynomial] pairs")
            })?;
            Ok((mindex_from_json(&vars, &pair[0])?, poly_from_json(ring, &pair[1])?))
        })
        .collect::<Result<Vec<_>>>()?;
    Series::from_coeffs(ring, &trunc, coeffs)
}

// ---------- substitution map ----------

fn universe_to_json(c: &CoIdeal) -> Value {
    let mut obj = Map::new();
    obj.insert("vars".into(), vars_to_json(c.vars()));
    obj.insert("trunc".into(), coideal_to_json(c));
    Value::Object(obj)
}

fn universe_from_json(v: &Value) -> Result<CoIdeal> {
    let obj = v.as_object().ok_or_else(|| parse_err("universe must be an object"))?;
    let vars = vars_from_json(obj.get("vars").ok_or_else(|| parse_err("universe needs vars"))?)?;
    coideal_from_json(&vars, obj.get("trunc").ok_or_else(|| parse_err("universe needs trunc"))?)
}

/// The substitution payload `{src, dst, images}`, image keys in source
/// variable order.
pub fn subst_to_json(phi: &SubstMap) -> Value {
    let mut obj = Map::new();
    obj.insert("src".into(), universe_to_json(phi.src()));
    obj.insert("dst".into(), universe_to_json(phi.dst()));
    let mut images = Map::new();
    for (j, im) in phi.images().iter().enumerate() {
        images.insert(phi.src_vars().name(j).to_string(), series_to_json(im));
    }
    obj.insert("images".into(), Value::Object(images));
    Value::Object(obj)
}

/// Parse a substitution map structurally, without the annihilation check;
/// run [`SubstMap::validate`] or reconstruct through [`SubstMap::new`] when
/// full validation is wanted.
pub fn subst_from_json_unchecked(ring: &PolyRing, v: &Value) -> Result<SubstMap> {
    let obj = v.as_object().ok_or_else(|| parse_err("substitution must be an object"))?;
    let src = universe_from_json(obj.get("src").ok_or_else(|| parse_err("needs src"))?)?;
    let dst = universe_from_json(obj.get("dst").ok_or_else(|| parse_err("needs dst"))?)?;
    let images_obj = obj
        .get("images")
        .and_then(Value::as_object)
        .ok_or_else(|| parse_err("needs an images object"))?;
    let mut images = Vec::with_capacity(src.vars().len());
    for name in src.vars().names() {
        let im = images_obj
            .get(name)
            .ok_or_else(|| parse_err(format!("missing image for `{name}`")))?;
        let series = series_from_json(ring, im)?;
        if series.trunc() != &dst {
            return Err(parse_err(format!("image of `{name}` is not over the dst universe")));
        }
        images.push(series);
    }
    SubstMap::new_unchecked(ring, &src, &dst, images)
}

pub fn subst_from_json(ring: &PolyRing, v: &Value) -> Result<SubstMap> {
    let phi = subst_from_json_unchecked(ring, v)?;
    if !phi.validate() {
        return Err(Error::ValidationFailed);
    }
    Ok(phi)
}

// ---------- HS-derivation ----------

/// The derivation payload `{vars, trunc, images}`, one image per ring
/// generator in order.
pub fn hs_to_json(d: &HSDeriv) -> Value {
    let mut obj = Map::new();
    obj.insert("vars".into(), vars_to_json(d.vars()));
    obj.insert("trunc".into(), coideal_to_json(d.trunc()));
    obj.insert(
        "images".into(),
        Value::Array(d.images().iter().map(series_to_json).collect()),
    );
    Value::Object(obj)
}

pub fn hs_from_json(ring: &PolyRing, v: &Value) -> Result<HSDeriv> {
    let obj = v.as_object().ok_or_else(|| parse_err("derivation must be an object"))?;
    let vars = vars_from_json(obj.get("vars").ok_or_else(|| parse_err("needs vars"))?)?;
    let trunc = coideal_from_json(&vars, obj.get("trunc").ok_or_else(|| parse_err("needs trunc"))?)?;
    let images = obj
        .get("images")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("needs an images array"))?
        .iter()
        .map(|im| series_from_json(ring, im))
        .collect::<Result<Vec<_>>>()?;
    for im in &images {
        if im.trunc() != &trunc {
            return Err(parse_err("image universes must match the derivation universe"));
        }
    }
    HSDeriv::from_images(ring, &trunc, images)
}

// ---------- documents ----------

/// A tagged value with its coefficient ring: what the CLI reads and writes.
#[derive(Clone, Debug, PartialEq)]
pub enum Document {
    Poly(Poly),
    Series(Series),
    Subst(SubstMap),
    Hs(HSDeriv),
}

impl Document {
    pub fn ring(&self) -> &PolyRing {
        match self {
            Document::Poly(p) => p.ring(),
            Document::Series(s) => s.ring(),
            Document::Subst(m) => m.ring(),
            Document::Hs(d) => d.ring(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Document::Poly(_) => "poly",
            Document::Series(_) => "series",
            Document::Subst(_) => "subst",
            Document::Hs(_) => "hs",
        }
    }

    pub fn to_value(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("kind".into(), json!(self.kind()));
        obj.insert("ring".into(), ring_to_json(self.ring()));
        match self {
            Document::Poly(p) => {
                obj.insert("terms".into(), poly_to_json(p));
            }
            Document::Series(s) => {
                for (k, v) in series_to_json(s).as_object().unwrap() {
                    obj.insert(k.clone(), v.clone());
                }
            }
            Document::Subst(m) => {
                for (k, v) in subst_to_json(m).as_object().unwrap() {
                    obj.insert(k.clone(), v.clone());
                }
            }
            Document::Hs(d) => {
                for (k, v) in hs_to_json(d).as_object().unwrap() {
                    obj.insert(k.clone(), v.clone());
                }
            }
        }
        Value::Object(obj)
    }

    /// Canonical one-line JSON.
    pub fn to_canonical_string(&self) -> String {
        self.to_value().to_string()
    }

    /// Parse any document. Substitution maps are checked structurally only,
    /// so that ill-defined maps can still be inspected by `subst validate`;
    /// use [`Document::parse_validated`] everywhere else.
    pub fn parse(text: &str) -> Result<Document> {
        let v: Value =
            serde_json::from_str(text).map_err(|e| parse_err(format!("invalid JSON: {e}")))?;
        let obj = v.as_object().ok_or_else(|| parse_err("document must be an object"))?;
        let ring = ring_from_json(obj.get("ring").ok_or_else(|| parse_err("document needs a ring"))?)?;
        match obj.get("kind").and_then(Value::as_str) {
            Some("poly") => Ok(Document::Poly(poly_from_json(
                &ring,
                obj.get("terms").ok_or_else(|| parse_err("poly document needs terms"))?,
            )?)),
            Some("series") => Ok(Document::Series(series_from_json(&ring, &v)?)),
            Some("subst") => Ok(Document::Subst(subst_from_json_unchecked(&ring, &v)?)),
            Some("hs") => Ok(Document::Hs(hs_from_json(&ring, &v)?)),
            _ => Err(parse_err("kind must be poly, series, subst or hs")),
        }
    }

    /// Parse and fully validate (substitution maps must annihilate their
    /// source truncation).
    pub fn parse_validated(text: &str) -> Result<Document> {
        let doc = Document::parse(text)?;
        if let Document::Subst(phi) = &doc {
            if !phi.validate() {
                return Err(Error::ValidationFailed);
            }
        }
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_series() -> (PolyRing, Series) {
        let ring = PolyRing::rational(["x", "y"]).unwrap();
        let vars = VarSet::new(["s", "t"]).unwrap();
        let trunc = CoIdeal::tm(&vars, 2);
        let x = Poly::gen(&ring, 0);
        let half = Poly::constant(&ring, Scalar::parse(&FieldKind::Q, "1/2").unwrap());
        let s = Series::from_coeffs(
            &ring,
            &trunc,
            vec![
                (MultiIndex::zero(&vars), x.add(&Poly::one(&ring)).unwrap()),
                (MultiIndex::unit(&vars, 0), half),
                (
                    MultiIndex::from_exps(&vars, &[(0, 1), (1, 1)]).unwrap(),
                    Poly::gen(&ring, 1).neg(),
                ),
            ],
        )
        .unwrap();
        (ring, s)
    }

    #[test]
    fn series_roundtrip_is_byte_exact() {
        let (_, s) = sample_series();
        let doc = Document::Series(s);
        let text = doc.to_canonical_string();
        let parsed = Document::parse(&text).unwrap();
        assert_eq!(parsed, doc);
        assert_eq!(parsed.to_canonical_string(), text);
    }

    #[test]
    fn poly_roundtrip_gf() {
        let ring = PolyRing::new(FieldKind::gf(5).unwrap(), ["x"]).unwrap();
        let p = Poly::gen(&ring, 0)
            .pow(3)
            .add(&Poly::from_i64(&ring, 4))
            .unwrap();
        let doc = Document::Poly(p);
        let text = doc.to_canonical_string();
        let parsed = Document::parse(&text).unwrap();
        assert_eq!(parsed, doc);
        assert_eq!(parsed.to_canonical_string(), text);
    }

    #[test]
    fn subst_roundtrip_and_validation() {
        let ring = PolyRing::rational(["x"]).unwrap();
        let s = VarSet::new(["s"]).unwrap();
        let t = VarSet::new(["t"]).unwrap();
        let src = CoIdeal::tm(&s, 2);
        let dst = CoIdeal::tm(&t, 2);
        let img = Series::from_coeffs(
            &ring,
            &dst,
            vec![
                (MultiIndex::unit(&t, 0), Poly::one(&ring)),
                (MultiIndex::from_exps(&t, &[(0, 2)]).unwrap(), Poly::gen(&ring, 0)),
            ],
        )
        .unwrap();
        let phi = SubstMap::new(&ring, &src, &dst, vec![img]).unwrap();
        let doc = Document::Subst(phi);
        let text = doc.to_canonical_string();
        let parsed = Document::parse_validated(&text).unwrap();
        assert_eq!(parsed, doc);
        assert_eq!(parsed.to_canonical_string(), text);

        // an ill-defined map parses structurally but fails validation
        let bad_src = CoIdeal::tm(&s, 1);
        let img = Series::monomial(&ring, &dst, &MultiIndex::unit(&t, 0), Poly::one(&ring)).unwrap();
        let bad = SubstMap::new_unchecked(&ring, &bad_src, &dst, vec![img]).unwrap();
        let bad_text = Document::Subst(bad).to_canonical_string();
        assert!(Document::parse(&bad_text).is_ok());
        assert!(matches!(
            Document::parse_validated(&bad_text),
            Err(Error::ValidationFailed)
        ));
    }

    #[test]
    fn hs_roundtrip() {
        let ring = PolyRing::new(FieldKind::gf(5).unwrap(), ["x", "y"]).unwrap();
        let vars = VarSet::new(["s"]).unwrap();
        let trunc = CoIdeal::tm(&vars, 2);
        let x = Poly::gen(&ring, 0);
        let y = Poly::gen(&ring, 1);
        let img_x = Series::constant(&ring, &trunc, x.clone())
            .unwrap()
            .add(&Series::monomial(&ring, &trunc, &MultiIndex::unit(&vars, 0), y.clone()).unwrap())
            .unwrap();
        let img_y = Series::constant(&ring, &trunc, y).unwrap();
        let d = HSDeriv::from_images(&ring, &trunc, vec![img_x, img_y]).unwrap();
        let doc = Document::Hs(d);
        let text = doc.to_canonical_string();
        let parsed = Document::parse(&text).unwrap();
        assert_eq!(parsed, doc);
        assert_eq!(parsed.to_canonical_string(), text);
    }

    #[test]
    fn coideal_representations_are_preserved() {
        let vars = VarSet::new(["s", "t"]).unwrap();
        let tm = CoIdeal::tm(&vars, 2);
        let v = coideal_to_json(&tm);
        assert_eq!(v["kind"], "tm");
        let back = coideal_from_json(&vars, &v).unwrap();
        assert_eq!(back, tm);

        let beta = MultiIndex::from_exps(&vars, &[(0, 1), (1, 2)]).unwrap();
        let nb = CoIdeal::nbeta(&beta);
        let v = coideal_to_json(&nb);
        assert_eq!(v["kind"], "nbeta");
        assert_eq!(coideal_from_json(&vars, &v).unwrap(), nb);

        let ex = tm.intersect(&nb).unwrap();
        let v = coideal_to_json(&ex);
        assert_eq!(v["kind"], "explicit");
        assert_eq!(coideal_from_json(&vars, &v).unwrap(), ex);

        // explicit sets must be downward closed on parse
        let broken = json!({"kind": "explicit", "members": [{"s": 2}]});
        assert!(coideal_from_json(&vars, &broken).is_err());
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(Document::parse("not json").is_err());
        assert!(Document::parse("{}").is_err());
        assert!(Document::parse(r#"{"kind":"poly","ring":{"field":"GF","p":6,"gens":[]},"terms":[]}"#).is_err());
    }
}
