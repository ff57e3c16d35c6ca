//! JSON forms of spaces, elementary functions, series and sets.
//!
//! Rationals are strings `"p/q"` (bare JSON integers are accepted too).
//! Decoding errors carry the JSON path of the offending value.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer};
use serde_json::{json, Value};

use crate::boxes::{BoxSet, HyperBox};
use crate::completion::families::{Geometric, PSeries, ShiftRule, ShrinkingBoxes};
use crate::completion::{SeriesFunction, TailModel};
use crate::error::{Error, Result};
use crate::measure::{IntegrableSet, SetTail};
use crate::scalar::Scalar;
use crate::simple::SimpleFunction;
use crate::space::{
    BoxSpace, CountingSpace, ElementarySpace, FiniteSpace, FiniteSpaceFn, SeqFunction,
};
use crate::Rational;

/// A rational read from `"p/q"` or a JSON integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Q(pub Rational);

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
        }
        match Raw::deserialize(d) {
            Ok(Raw::Int(n)) => Ok(Q(Rational::from_int(n))),
            Ok(Raw::Str(s)) => parse_rational(&s)
                .map(Q)
                .map_err(serde::de::Error::custom),
            Err(_) => Err(serde::de::Error::custom(
                "expected a rational string \"p/q\" or an integer",
            )),
        }
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    Rational::parse_exact(s).ok_or_else(|| Error::InvalidRational(s.to_string()))
}

fn join(prefix: &str, inner: &str) -> String {
    match (prefix.is_empty(), inner.is_empty() || inner == ".") {
        (true, _) => inner.to_string(),
        (false, true) => prefix.to_string(),
        (false, false) if inner.starts_with('[') => format!("{prefix}{inner}"),
        (false, false) => format!("{prefix}.{inner}"),
    }
}

fn scenario_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Scenario {
        path: path.into(),
        message: message.into(),
    }
}

/// Typed decode of a JSON value, with `prefix` prepended to error paths.
pub fn decode<T: DeserializeOwned>(v: &Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(v.clone()).map_err(|e| {
        let path = join(prefix, &e.path().to_string());
        scenario_err(path, e.inner().to_string())
    })
}

/// Typed decode of a JSON document.
pub fn decode_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        scenario_err(path, e.inner().to_string())
    })
}

// ---------------------------------------------------------------------------
// spaces

/// A parsed space selector.
#[derive(Clone, Debug, PartialEq)]
pub enum AnySpace {
    Boxes(BoxSpace<Rational>),
    Counting(CountingSpace<Rational>),
    Finite(FiniteSpace<Rational>),
}

/// `boxes:N`, `counting`, or `finite:w1,w2,...`.
pub fn parse_space(s: &str) -> Result<AnySpace> {
    let bad = || Error::InvalidSpace(s.to_string());
    if s == "counting" {
        return Ok(AnySpace::Counting(CountingSpace::new()));
    }
    if let Some(n) = s.strip_prefix("boxes:") {
        let dim: usize = n.parse().map_err(|_| bad())?;
        return BoxSpace::new(dim).map(AnySpace::Boxes).map_err(|_| bad());
    }
    if let Some(ws) = s.strip_prefix("finite:") {
        let weights = ws
            .split(',')
            .map(|w| Rational::parse_exact(w).ok_or_else(bad))
            .collect::<Result<Vec<_>>>()?;
        return FiniteSpace::new(weights).map(AnySpace::Finite).map_err(|_| bad());
    }
    Err(bad())
}

/// JSON shape of the elements and points of a space.
pub trait SpaceCodec: ElementarySpace<Scalar = Rational> {
    fn decode_elem(&self, v: &Value, path: &str) -> Result<Self::Elem>;
    fn encode_elem(&self, e: &Self::Elem) -> Value;
    fn parse_point(&self, s: &str) -> Result<Self::Point>;
    /// Base element of tail families when none is given.
    fn default_base(&self) -> Self::Elem;

    /// Tail families that only make sense in this space.
    fn special_tail(&self, _t: &TailJson, _path: &str) -> Option<Result<TailModel<Self>>> {
        None
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimpleJson {
    dim: usize,
    terms: Vec<TermJson>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    coef: Q,
    #[serde(rename = "box")]
    sides: Vec<(Q, Q)>,
}

fn make_box(sides: Vec<(Q, Q)>, path: &str) -> Result<HyperBox<Rational>> {
    HyperBox::from_sides(sides.into_iter().map(|(a, b)| (a.0, b.0)).collect())
        .map_err(|e| scenario_err(path, e.to_string()))
}

pub fn decode_simple(v: &Value, path: &str) -> Result<SimpleFunction<Rational>> {
    let raw: SimpleJson = decode(v, path)?;
    let mut terms = Vec::with_capacity(raw.terms.len());
    for (i, t) in raw.terms.into_iter().enumerate() {
        let p = join(path, &format!("terms[{i}].box"));
        if t.sides.len() != raw.dim {
            return Err(scenario_err(
                p,
                format!("box has {} sides but dim is {}", t.sides.len(), raw.dim),
            ));
        }
        terms.push((make_box(t.sides, &p)?, t.coef.0));
    }
    SimpleFunction::canonicalize(raw.dim, terms).map_err(|e| scenario_err(path, e.to_string()))
}

fn encode_box(b: &HyperBox<Rational>) -> Value {
    Value::Array(
        b.sides()
            .unwrap_or(&[])
            .iter()
            .map(|(lo, hi)| json!([lo.to_string(), hi.to_string()]))
            .collect(),
    )
}

pub fn encode_simple(f: &SimpleFunction<Rational>) -> Value {
    let terms: Vec<Value> = f
        .terms()
        .iter()
        .map(|(b, c)| json!({"coef": c.to_string(), "box": encode_box(b)}))
        .collect();
    json!({"dim": f.dim(), "terms": terms})
}

fn parse_coords(s: &str, dim: usize) -> Result<Vec<Rational>> {
    let xs = s
        .split(',')
        .map(parse_rational)
        .collect::<Result<Vec<_>>>()?;
    if xs.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: xs.len(),
        });
    }
    Ok(xs)
}

fn parse_index(s: &str, min: usize, max: Option<usize>) -> Result<usize> {
    let i: usize = s
        .trim()
        .parse()
        .map_err(|_| Error::Unsupported(format!("`{s}` is not an index")))?;
    if i < min || max.is_some_and(|m| i >= m) {
        return Err(Error::Unsupported(format!("index {i} is outside the ground set")));
    }
    Ok(i)
}

impl SpaceCodec for BoxSpace<Rational> {
    fn decode_elem(&self, v: &Value, path: &str) -> Result<SimpleFunction<Rational>> {
        let f = decode_simple(v, path)?;
        if f.dim() != self.dim() {
            return Err(scenario_err(
                join(path, "dim"),
                format!("dimension {} does not match space {}", f.dim(), self.id()),
            ));
        }
        Ok(f)
    }

    fn encode_elem(&self, e: &SimpleFunction<Rational>) -> Value {
        encode_simple(e)
    }

    fn parse_point(&self, s: &str) -> Result<Vec<Rational>> {
        parse_coords(s, self.dim())
    }

    fn default_base(&self) -> SimpleFunction<Rational> {
        SimpleFunction::indicator(self.unit_box())
    }

    fn special_tail(&self, t: &TailJson, path: &str) -> Option<Result<TailModel<Self>>> {
        if t.family != "shrinking_boxes" {
            return None;
        }
        let q = |v: &Option<Q>, d: i64| v.as_ref().map(|q| q.0.clone()).unwrap_or(Rational::from_int(d));
        let rest = vec![(Rational::from_int(0), Rational::from_int(1)); self.dim() - 1];
        let ratio = match &t.ratio {
            Some(r) => r.0.clone(),
            None => return Some(Err(scenario_err(join(path, "ratio"), "missing ratio"))),
        };
        Some(
            ShrinkingBoxes::new(q(&t.anchor, 0), q(&t.width, 1), ratio, rest)
                .map(TailModel::new)
                .map_err(|e| scenario_err(path, e.to_string())),
        )
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeqJson {
    values: BTreeMap<String, Q>,
}

impl SpaceCodec for CountingSpace<Rational> {
    fn decode_elem(&self, v: &Value, path: &str) -> Result<SeqFunction<Rational>> {
        let raw: SeqJson = decode(v, path)?;
        let mut pairs = Vec::with_capacity(raw.values.len());
        for (k, q) in raw.values {
            let p = join(path, &format!("values.{k}"));
            let i = parse_index(&k, 1, None).map_err(|e| scenario_err(&p, e.to_string()))?;
            pairs.push((i, q.0));
        }
        SeqFunction::new(pairs).map_err(|e| scenario_err(path, e.to_string()))
    }

    fn encode_elem(&self, e: &SeqFunction<Rational>) -> Value {
        let values: serde_json::Map<String, Value> = e
            .values()
            .iter()
            .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
            .collect();
        json!({ "values": values })
    }

    fn parse_point(&self, s: &str) -> Result<usize> {
        parse_index(s, 1, None)
    }

    fn default_base(&self) -> SeqFunction<Rational> {
        SeqFunction::new([(1, Rational::from_int(1))]).expect("valid")
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FiniteJson {
    values: Vec<Q>,
}

impl SpaceCodec for FiniteSpace<Rational> {
    fn decode_elem(&self, v: &Value, path: &str) -> Result<FiniteSpaceFn<Rational>> {
        let raw: FiniteJson = decode(v, path)?;
        self.function(raw.values.into_iter().map(|q| q.0).collect())
            .map_err(|e| scenario_err(join(path, "values"), e.to_string()))
    }

    fn encode_elem(&self, e: &FiniteSpaceFn<Rational>) -> Value {
        let vs: Vec<String> = e.values.iter().map(|v| v.to_string()).collect();
        json!({ "values": vs })
    }

    fn parse_point(&self, s: &str) -> Result<usize> {
        parse_index(s, 0, Some(self.atoms()))
    }

    fn default_base(&self) -> FiniteSpaceFn<Rational> {
        FiniteSpaceFn {
            values: vec![Rational::from_int(1); self.atoms()],
        }
    }
}

// ---------------------------------------------------------------------------
// series

/// Tail description. Which fields apply depends on `family`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailJson {
    pub family: String,
    #[serde(default)]
    pub ratio: Option<Q>,
    #[serde(default)]
    pub coef: Option<Q>,
    #[serde(default)]
    pub box_rule: Option<String>,
    #[serde(default)]
    pub base: Option<Value>,
    #[serde(default)]
    pub p: Option<u32>,
    #[serde(default)]
    pub anchor: Option<Q>,
    #[serde(default)]
    pub width: Option<Q>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesJson {
    space: String,
    #[serde(default)]
    prefix: Vec<Value>,
    #[serde(default)]
    tail: Option<TailJson>,
}

fn shift_rule(t: &TailJson, path: &str) -> Result<ShiftRule> {
    match &t.box_rule {
        None => Ok(ShiftRule::Fixed),
        Some(s) => ShiftRule::parse(s).ok_or_else(|| {
            scenario_err(
                join(path, "box_rule"),
                format!("unknown box rule `{s}` (expected fixed or unit_shift)"),
            )
        }),
    }
}

/// Decodes a tail description against `space`.
pub fn decode_tail<Sp: SpaceCodec>(space: &Sp, t: &TailJson, path: &str) -> Result<TailModel<Sp>> {
    if let Some(special) = space.special_tail(t, path) {
        return special;
    }
    let base = match &t.base {
        Some(v) => space.decode_elem(v, &join(path, "base"))?,
        None => space.default_base(),
    };
    let coef = t.coef.as_ref().map(|q| q.0.clone()).unwrap_or(Rational::from_int(1));
    let wrap = |e: Error| scenario_err(path, e.to_string());
    match t.family.as_str() {
        "zero" => Ok(TailModel::zero()),
        "geometric" | "geometric_boxes" | "geometric_counting" => {
            let ratio = t
                .ratio
                .as_ref()
                .ok_or_else(|| scenario_err(join(path, "ratio"), "missing ratio"))?;
            let rule = shift_rule(t, path)?;
            Geometric::new(space, base, coef, ratio.0.clone(), rule)
                .map(TailModel::new)
                .map_err(wrap)
        }
        "p_series" => {
            let p = t.p.unwrap_or(2);
            let rule = shift_rule(t, path)?;
            PSeries::new(space, base, coef, p, rule)
                .map(TailModel::new)
                .map_err(wrap)
        }
        other => Err(scenario_err(
            join(path, "family"),
            Error::UnknownFamily(other.to_string()).to_string(),
        )),
    }
}

/// A series in the space the document names.
pub enum AnySeries {
    Boxes(SeriesFunction<BoxSpace<Rational>>),
    Counting(SeriesFunction<CountingSpace<Rational>>),
    Finite(SeriesFunction<FiniteSpace<Rational>>),
}

fn series_in<Sp: SpaceCodec>(space: &Sp, raw: &SeriesJson) -> Result<SeriesFunction<Sp>> {
    let prefix = raw
        .prefix
        .iter()
        .enumerate()
        .map(|(i, v)| space.decode_elem(v, &format!("prefix[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let tail = match &raw.tail {
        Some(t) => decode_tail(space, t, "tail")?,
        None => TailModel::zero(),
    };
    SeriesFunction::new(space.clone(), prefix, tail)
}

pub fn decode_series_value(v: &Value) -> Result<AnySeries> {
    let raw: SeriesJson = decode(v, "")?;
    let space = parse_space(&raw.space).map_err(|e| scenario_err("space", e.to_string()))?;
    Ok(match space {
        AnySpace::Boxes(sp) => AnySeries::Boxes(series_in(&sp, &raw)?),
        AnySpace::Counting(sp) => AnySeries::Counting(series_in(&sp, &raw)?),
        AnySpace::Finite(sp) => AnySeries::Finite(series_in(&sp, &raw)?),
    })
}

pub fn decode_series(text: &str) -> Result<AnySeries> {
    let v: Value = decode_str(text)?;
    decode_series_value(&v)
}

/// A series document for a specific space, for generic callers.
pub fn decode_series_for<Sp: SpaceCodec>(v: &Value, space: &Sp, path: &str) -> Result<SeriesFunction<Sp>> {
    let raw: SeriesJson = decode(v, path)?;
    if raw.space != space.id() {
        return Err(scenario_err(
            join(path, "space"),
            format!("expected space {}, found {}", space.id(), raw.space),
        ));
    }
    series_in(space, &raw).map_err(|e| match e {
        Error::Scenario { path: p, message } => scenario_err(join(path, &p), message),
        other => other,
    })
}

// ---------------------------------------------------------------------------
// sets

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SetJson {
    #[serde(default)]
    kind: Option<String>,
    space: String,
    #[serde(default)]
    boxes: Option<Vec<Vec<(Q, Q)>>>,
    #[serde(default)]
    members: Option<Vec<Vec<Vec<(Q, Q)>>>>,
    #[serde(default)]
    prefix: Vec<Value>,
    #[serde(default)]
    tail: Option<TailJson>,
}

/// What a measure document describes.
pub enum SetDoc {
    /// One integrable set, exact or as an indicator series.
    Set(BoxSpace<Rational>, IntegrableSet<Rational>),
    /// Disjoint members plus a tail of further members.
    Union(BoxSpace<Rational>, Vec<IntegrableSet<Rational>>, SetTail<Rational>),
}

fn decode_boxset(sp: &BoxSpace<Rational>, raw: Vec<Vec<(Q, Q)>>, path: &str) -> Result<BoxSet<Rational>> {
    let mut boxes = Vec::with_capacity(raw.len());
    for (i, sides) in raw.into_iter().enumerate() {
        let p = format!("{path}[{i}]");
        if sides.len() != sp.dim() {
            return Err(scenario_err(
                p,
                format!("box has {} sides but the space is {}", sides.len(), sp.id()),
            ));
        }
        boxes.push(make_box(sides, &p)?);
    }
    BoxSet::from_boxes(sp.dim(), boxes).map_err(|e| scenario_err(path, e.to_string()))
}

/// Shapes: `{"space","boxes":[box,...]}` for an exact set;
/// `{"space","prefix","tail"}` for an indicator series;
/// `{"space","members":[[box,...],...],"tail"}` for a disjoint union, where
/// the tail family `divergent` declares infinite measure.
pub fn decode_set(text: &str) -> Result<SetDoc> {
    let raw: SetJson = decode_str(text)?;
    if let Some(k) = raw.kind.as_deref().filter(|k| *k != "indicator") {
        return Err(scenario_err("kind", format!("unknown set kind `{k}`")));
    }
    let sp = match parse_space(&raw.space).map_err(|e| scenario_err("space", e.to_string()))? {
        AnySpace::Boxes(sp) => sp,
        _ => return Err(scenario_err("space", "sets are supported on box spaces only")),
    };
    if let Some(members) = raw.members {
        let sets = members
            .into_iter()
            .enumerate()
            .map(|(i, m)| decode_boxset(&sp, m, &format!("members[{i}]")).map(IntegrableSet::Exact))
            .collect::<Result<Vec<_>>>()?;
        let tail = match &raw.tail {
            None => SetTail::Empty,
            Some(t) if t.family == "divergent" => SetTail::Divergent,
            Some(t) => SetTail::Series(decode_tail(&sp, t, "tail")?),
        };
        return Ok(SetDoc::Union(sp, sets, tail));
    }
    if let Some(boxes) = raw.boxes {
        let set = decode_boxset(&sp, boxes, "boxes")?;
        return Ok(SetDoc::Set(sp, IntegrableSet::Exact(set)));
    }
    let series = series_in(
        &sp,
        &SeriesJson {
            space: raw.space,
            prefix: raw.prefix,
            tail: raw.tail,
        },
    )?;
    Ok(SetDoc::Set(sp, IntegrableSet::Series(series)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_round_trip() {
        let v = json!({"dim": 1, "terms": [{"coef": "2", "box": [["0", "1/2"]]}]});
        let f = decode_simple(&v, "").unwrap();
        assert_eq!(f.integral(), Rational::from_int(1));
        assert_eq!(decode_simple(&encode_simple(&f), "").unwrap(), f);
    }

    #[test]
    fn errors_carry_paths() {
        let v = json!({"dim": 1, "terms": [{"coef": "0.5", "box": [["0", "1"]]}]});
        match decode_simple(&v, "params.f") {
            Err(Error::Scenario { path, message }) => {
                assert_eq!(path, "params.f.terms[0].coef");
                assert!(message.contains("0.5"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn series_document() {
        let text = r#"{"space":"boxes:1","prefix":[],"tail":{"family":"geometric_boxes","ratio":"1/2","box_rule":"unit_shift"}}"#;
        let AnySeries::Boxes(f) = decode_series(text).unwrap() else {
            panic!("box series expected")
        };
        let e = f.integral_enclosure(&Rational::two_pow_neg(20)).unwrap();
        assert!(e.contains(&Rational::from_int(1)));
        let bad = r#"{"space":"boxes:1","tail":{"family":"nope","ratio":"1/2"}}"#;
        let err = decode_series(bad).err().unwrap().to_string();
        assert!(err.contains("unknown family"), "{err}");
    }

    #[test]
    fn spaces_parse() {
        assert!(matches!(parse_space("boxes:3"), Ok(AnySpace::Boxes(_))));
        assert!(matches!(parse_space("counting"), Ok(AnySpace::Counting(_))));
        assert!(matches!(parse_space("finite:1/2,1/2"), Ok(AnySpace::Finite(_))));
        assert!(parse_space("boxes:0").is_err());
        assert!(parse_space("torus").is_err());
    }
}
