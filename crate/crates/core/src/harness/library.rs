//! Named families the scenarios refer to.
//!
//! Box families are built from slabs `[a, b) x [0,1)^(N-1)`, so each works in
//! every dimension with the same integrals. Names starting with a fault
//! marker (`corrupted_`, `unbounded_`, ...) are deliberately broken inputs:
//! the matching check must report `fail`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde_json::Value;

use super::checks::{DominatedFamily, FatouFamily, Limit, MonotoneFamily};
use super::codec::{decode_series_for, parse_rational, SpaceCodec};
use crate::completion::families::{Geometric, PSeries, SeqFn, ShiftRule, Underbound};
use crate::completion::{flatten_double_series, SeriesFunction, TailModel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simple::SimpleFunction;
use crate::space::{BoxSpace, DecreasingFamily, ElementarySpace};
use crate::Rational;

type Q = Rational;
type Boxes = BoxSpace<Q>;

/// Scenario parameters with typed, path-reporting accessors.
pub struct Params<'a>(pub &'a BTreeMap<String, Value>);

impl Params<'_> {
    fn err(key: &str, message: impl Into<String>) -> Error {
        Error::Scenario {
            path: format!("params.{key}"),
            message: message.into(),
        }
    }

    pub fn rational(&self, key: &str, default: &str) -> Result<Q> {
        match self.0.get(key) {
            None => Ok(parse_rational(default).expect("valid default")),
            Some(Value::String(s)) => parse_rational(s).map_err(|e| Self::err(key, e.to_string())),
            Some(Value::Number(n)) if n.is_i64() => Ok(Q::from_int(n.as_i64().unwrap())),
            Some(_) => Err(Self::err(key, "expected a rational string")),
        }
    }

    pub fn count(&self, key: &str, default: usize) -> Result<usize> {
        match self.0.get(key) {
            None => Ok(default),
            Some(Value::Number(n)) if n.is_u64() => Ok(n.as_u64().unwrap() as usize),
            Some(_) => Err(Self::err(key, "expected a nonnegative integer")),
        }
    }

    pub fn text(&self, key: &str, default: &str) -> Result<String> {
        match self.0.get(key) {
            None => Ok(default.to_string()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(Self::err(key, "expected a string")),
        }
    }

    pub fn value(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }
}

fn unknown(family: &str) -> Error {
    Error::UnknownFamily(family.to_string())
}

fn q(n: i64, d: i64) -> Q {
    Q::ratio(n, d)
}

fn slab(sp: &Boxes, a: Q, b: Q) -> SimpleFunction<Q> {
    SimpleFunction::indicator(sp.slab(a, b))
}

fn seq(f: impl Fn(usize) -> SimpleFunction<Q> + Send + Sync + 'static) -> SeqFn<Boxes> {
    Arc::new(f)
}

// ---------------------------------------------------------------------------
// decreasing families

/// `inner` with step `step` replaced by step 1, so the integral rises there.
struct Corrupted<Sp: ElementarySpace> {
    inner: Arc<dyn DecreasingFamily<Sp>>,
    step: usize,
}

impl<Sp: ElementarySpace> DecreasingFamily<Sp> for Corrupted<Sp> {
    fn name(&self) -> String {
        format!("corrupted_{}", self.inner.name())
    }

    fn element(&self, space: &Sp, n: usize) -> Sp::Elem {
        let n = if n == self.step { 1 } else { n };
        self.inner.element(space, n)
    }
}

/// The space's own families, plus `corrupted_<name>` for each.
pub fn decreasing_family<Sp: ElementarySpace>(
    space: &Sp,
    name: &str,
    params: &Params,
) -> Result<Arc<dyn DecreasingFamily<Sp>>> {
    let find = |n: &str| {
        space
            .decreasing_families()
            .into_iter()
            .find(|f| f.name() == n)
            .ok_or_else(|| unknown(name))
    };
    match name.strip_prefix("corrupted_") {
        Some(inner) => {
            let step = params.count("step", 3)?;
            if step < 2 {
                return Err(Params::err("step", "a corrupted step must be at least 2"));
            }
            Ok(Arc::new(Corrupted {
                inner: find(inner)?,
                step,
            }))
        }
        None => find(name),
    }
}

// ---------------------------------------------------------------------------
// monotone convergence

pub fn monotone_family(sp: &Boxes, name: &str, params: &Params) -> Result<MonotoneFamily<Boxes>> {
    let steps = params.count("steps", 64)?;
    let s = sp.clone();
    let (seq, bound, limit) = match name {
        // sum_{k<=n} 2^-k chi_[k-1,k)
        "step_sum" => (
            seq(move |n| {
                (1..=n).fold(SimpleFunction::zero(s.dim()), |acc, k| {
                    let piece = slab(&s, Q::from_int(k as i64 - 1), Q::from_int(k as i64))
                        .scale(&Q::two_pow_neg(k as u32));
                    acc.add(&piece).expect("same dimension")
                })
            }),
            Q::one(),
            Q::one(),
        ),
        "rising_box" => (
            seq(move |n| slab(&s, Q::zero(), Q::one() - Q::two_pow_neg(n as u32))),
            Q::one(),
            Q::one(),
        ),
        "constant" => {
            let c = params.rational("c", "1")?;
            let f = slab(sp, Q::zero(), Q::one()).scale(&c);
            let v = f.integral();
            (seq(move |_| f.clone()), v.abs(), v)
        }
        "decreasing_halves" => (
            seq(move |n| slab(&s, Q::zero(), Q::one()).scale(&Q::two_pow_neg(n as u32))),
            q(1, 2),
            Q::zero(),
        ),
        // faults
        "unbounded_ramp" => (
            seq(move |n| slab(&s, Q::zero(), Q::one()).scale(&Q::from_int(n as i64))),
            params.rational("M", "2")?,
            Q::one(),
        ),
        "zigzag" => (
            seq(move |n| {
                let w = if n % 2 == 0 { q(1, 2) } else { Q::one() };
                slab(&s, Q::zero(), w)
            }),
            Q::one(),
            Q::one(),
        ),
        _ => return Err(unknown(name)),
    };
    Ok(MonotoneFamily {
        name: name.to_string(),
        seq,
        bound,
        limit,
        steps,
    })
}

// ---------------------------------------------------------------------------
// dominated convergence

fn alternating(sp: &Boxes) -> SeriesFunction<Boxes> {
    let g = Geometric::new(sp, slab(sp, Q::zero(), Q::one()), Q::one(), q(-1, 2), ShiftRule::Fixed)
        .expect("ratio below 1");
    SeriesFunction::from_generator(sp, g)
}

fn incompleteness(sp: &Boxes) -> SeriesFunction<Boxes> {
    let g = Geometric::new(sp, slab(sp, Q::zero(), Q::one()), Q::one(), q(1, 2), ShiftRule::UnitShift)
        .expect("ratio below 1");
    SeriesFunction::from_generator(sp, g)
}

pub fn dominated_family(sp: &Boxes, name: &str, _params: &Params) -> Result<DominatedFamily<Q>> {
    let s = sp.clone();
    let unit = slab(sp, Q::zero(), Q::one());
    let (seq, dominator, limit) = match name {
        "growing_indicator" => (
            seq(move |n| slab(&s, q(1, n as i64), Q::one())),
            unit.clone(),
            Limit::Elementary(unit),
        ),
        "constant" => {
            let f = unit.clone();
            (seq(move |_| f.clone()), unit.clone(), Limit::Elementary(unit))
        }
        // partial sums of sum (-1/2)^n chi_[0,1); |s_n| <= 1/2
        "alternating_partial" => {
            let series = alternating(sp);
            let f = series.clone();
            (
                seq(move |n| f.partial_sum(n)),
                unit.scale(&q(1, 2)),
                Limit::Series(series),
            )
        }
        // fault: mass spreads past the dominator
        "spreading" => (
            seq(move |n| slab(&s, Q::zero(), Q::from_int(n as i64)).scale(&q(1, n as i64))),
            unit,
            Limit::Elementary(SimpleFunction::zero(sp.dim())),
        ),
        _ => return Err(unknown(name)),
    };
    Ok(DominatedFamily {
        name: name.to_string(),
        seq,
        dominator,
        limit,
    })
}

// ---------------------------------------------------------------------------
// Fatou

pub fn fatou_family(sp: &Boxes, name: &str, params: &Params) -> Result<FatouFamily<Boxes>> {
    let steps = params.count("steps", 64)?;
    let s = sp.clone();
    let zero = Limit::Elementary(SimpleFunction::zero(sp.dim()));
    let (seq, bound, limit) = match name {
        "escaping_mass" => (
            seq(move |n| slab(&s, Q::from_int(n as i64), Q::from_int(n as i64 + 1))),
            Q::one(),
            zero,
        ),
        "constant" => {
            let f = slab(sp, Q::zero(), Q::one());
            let g = f.clone();
            (seq(move |_| g.clone()), Q::one(), Limit::Elementary(f))
        }
        "spike" => (
            seq(move |n| slab(&s, Q::zero(), q(1, n as i64)).scale(&Q::from_int(n as i64))),
            Q::one(),
            zero,
        ),
        "geometric_partial" => {
            let series = incompleteness(sp);
            let f = series.clone();
            (seq(move |n| f.partial_sum(n)), Q::one(), Limit::Series(series))
        }
        // faults
        "signed" => (
            seq(move |n| slab(&s, Q::zero(), q(1, n as i64)).neg()),
            Q::one(),
            zero,
        ),
        "overshoot" => (
            seq(move |n| slab(&s, Q::zero(), Q::one()).scale(&Q::from_int(n as i64))),
            params.rational("M", "2")?,
            zero,
        ),
        _ => return Err(unknown(name)),
    };
    Ok(FatouFamily {
        name: name.to_string(),
        seq,
        bound,
        limit,
        steps,
    })
}

// ---------------------------------------------------------------------------
// completeness and flattening

/// Series for the completeness check, in any space with a codec.
pub fn banach_family<Sp: SpaceCodec>(space: &Sp, name: &str, params: &Params) -> Result<SeriesFunction<Sp>> {
    let base = space.default_base();
    let geometric = |coef: Q, ratio: Q, rule: ShiftRule| -> Result<Geometric<Sp>> {
        Geometric::new(space, base.clone(), coef, ratio, rule)
    };
    let rule = || -> Result<ShiftRule> {
        let default = if space.translate(&base, 0).is_some() { "unit_shift" } else { "fixed" };
        let r = params.text("box_rule", default)?;
        ShiftRule::parse(&r).ok_or_else(|| Params::err("box_rule", format!("unknown box rule `{r}`")))
    };
    match name {
        "series" => {
            let v = params
                .value("series")
                .ok_or_else(|| Params::err("series", "missing series document"))?;
            decode_series_for(v, space, "params.series")
        }
        "alternating" => Ok(SeriesFunction::from_generator(
            space,
            geometric(Q::one(), q(-1, 2), ShiftRule::Fixed)?,
        )),
        "geometric" => {
            let g = geometric(params.rational("coef", "1")?, params.rational("ratio", "1/2")?, rule()?)?;
            Ok(SeriesFunction::from_generator(space, g))
        }
        "p_series" => {
            let p = params.count("p", 2)? as u32;
            let g = PSeries::new(space, base.clone(), Q::one(), p, rule()?)?;
            Ok(SeriesFunction::from_generator(space, g))
        }
        "finite_sum" => {
            let m = params.count("terms", 3)?;
            let prefix = (0..m)
                .map(|i| space.scale(&base, &Q::two_pow_neg(i as u32)))
                .collect();
            SeriesFunction::new(space.clone(), prefix, TailModel::zero())
        }
        // fault: B_k scaled down below the true tail norm
        "underbound" => {
            let g = geometric(Q::one(), q(-1, 2), ShiftRule::Fixed)?;
            let factor = params.rational("factor", "1/4")?;
            Ok(SeriesFunction::from_generator(space, Underbound::new(Arc::new(g), factor)))
        }
        _ => Err(unknown(name)),
    }
}

/// Rows of a double series with the exact total of all rows.
pub fn flatten_family(sp: &Boxes, name: &str, params: &Params) -> Result<(SeriesFunction<Boxes>, Q)> {
    let unit = slab(sp, Q::zero(), Q::one());
    match name {
        // rows 2^-i chi_[0,1), i = 1..m, nothing beyond
        "geometric_rows" => {
            let m = params.count("rows", 10)?;
            let rows: Vec<_> = (1..=m)
                .map(|i| SeriesFunction::from_elementary(sp, unit.scale(&Q::two_pow_neg(i as u32))))
                .collect();
            let total = (1..=m).fold(Q::zero(), |acc, i| acc + Q::two_pow_neg(i as u32));
            Ok((flatten_double_series(sp, &rows, TailModel::zero())?, total))
        }
        // m copies of sum 2^-n chi_[n-1,n), then rows i > m equal to 2^-i chi_[0,1)
        "series_rows" => {
            let m = params.count("rows", 3)?;
            let rows: Vec<_> = (0..m).map(|_| incompleteness(sp)).collect();
            let outer = Geometric::new(sp, unit, Q::one(), q(1, 2), ShiftRule::Fixed)?;
            let total = Q::from_int(m as i64) + Q::two_pow_neg(m as u32);
            Ok((flatten_double_series(sp, &rows, TailModel::new(outer))?, total))
        }
        _ => Err(unknown(name)),
    }
}

// ---------------------------------------------------------------------------
// subsequence extraction

/// `n -> ||f_n - f||`, computed exactly from the elementary functions.
pub fn norm_family(sp: &Boxes, name: &str, _params: &Params) -> Result<Box<dyn Fn(usize) -> Q + Send + Sync>> {
    let s = sp.clone();
    let pair: Box<dyn Fn(usize) -> (SimpleFunction<Q>, SimpleFunction<Q>) + Send + Sync> = match name {
        "harmonic" => Box::new(move |n| {
            (slab(&s, Q::zero(), q(1, n as i64)), SimpleFunction::zero(s.dim()))
        }),
        "third_powers" => Box::new(move |n| {
            let c = Q::from_int(3).pow_i(n as u32).recip();
            (slab(&s, Q::zero(), Q::one()).scale(&c), SimpleFunction::zero(s.dim()))
        }),
        "constant" => Box::new(move |_| {
            let f = slab(&s, Q::zero(), Q::one());
            (f.clone(), f)
        }),
        _ => return Err(unknown(name)),
    };
    Ok(Box::new(move |n| {
        let (f_n, f) = pair(n);
        f_n.sub(&f).expect("same dimension").abs_integral()
    }))
}
