//! Completion of an elementary space by absolutely summable series.
//!
//! A [`SeriesFunction`] stands for `f ~ f_1 + f_2 + ...`: elementary terms
//! whose absolute integrals are summable, representing the pointwise sum
//! wherever that sum converges absolutely and `0` elsewhere. It is not a
//! pointwise object. Everything observable about it comes out as an exact
//! rational enclosure: the integral, the norm `integral |f|`, and point
//! values where the tail admits a pointwise bound.
//!
//! The terms are an explicit prefix followed by a [`TailModel`], which
//! generates the remaining terms and certifies
//! `B_k >= sum_{n>k} integral |f_n|`. Leaf tails come from the curated
//! families in [`families`]; every construction in [`ops`] derives its tail
//! bound from those of its inputs.

use num_traits::{Signed, Zero};
use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::ElementarySpace;

pub mod families;
pub mod null;
pub mod ops;

pub use null::{equal_ae_certified, is_null_certified, null_dominated, NullCertificate};
pub use ops::{
    flatten_double_series, renormalize_eps, series_abs, series_add, series_clip, series_max,
    series_min, series_neg, series_permute_blocks, series_regroup, series_scale, series_shift,
    series_sub,
};

/// Default refinement budget for enclosure searches.
pub const DEFAULT_BUDGET: usize = 10_000;

type Sc<Sp> = <Sp as ElementarySpace>::Scalar;

/// Closed rational interval `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegralEnclosure<S> {
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> IntegralEnclosure<S> {
    /// Panics if `lo > hi`.
    pub fn new(lo: S, hi: S) -> Self {
        assert!(lo <= hi, "empty enclosure [{lo}, {hi}]");
        IntegralEnclosure { lo, hi }
    }

    pub fn point(v: S) -> Self {
        IntegralEnclosure {
            lo: v.clone(),
            hi: v,
        }
    }

    /// `[center - radius, center + radius]`.
    pub fn around(center: S, radius: S) -> Self {
        Self::new(center.clone() - radius.clone(), center + radius)
    }

    pub fn width(&self) -> S {
        self.hi.clone() - self.lo.clone()
    }

    pub fn midpoint(&self) -> S {
        (self.lo.clone() + self.hi.clone()) * S::half()
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: &S) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Interval sum.
    pub fn add(&self, other: &Self) -> Self {
        IntegralEnclosure {
            lo: self.lo.clone() + other.lo.clone(),
            hi: self.hi.clone() + other.hi.clone(),
        }
    }

    pub fn scale(&self, lambda: &S) -> Self {
        let a = self.lo.clone() * lambda.clone();
        let b = self.hi.clone() * lambda.clone();
        if a <= b {
            IntegralEnclosure { lo: a, hi: b }
        } else {
            IntegralEnclosure { lo: b, hi: a }
        }
    }

    /// Widens by `eps` on both sides.
    pub fn widen(&self, eps: &S) -> Self {
        IntegralEnclosure {
            lo: self.lo.clone() - eps.clone(),
            hi: self.hi.clone() + eps.clone(),
        }
    }
}

impl<S: Scalar> fmt::Display for IntegralEnclosure<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl<S: Scalar> Serialize for IntegralEnclosure<S> {
    fn serialize<Se: Serializer>(&self, serializer: Se) -> std::result::Result<Se::Ok, Se::Error> {
        let mut st = serializer.serialize_struct("IntegralEnclosure", 2)?;
        st.serialize_field("lo", &self.lo.to_string())?;
        st.serialize_field("hi", &self.hi.to_string())?;
        st.end()
    }
}

/// Result of evaluating a series function at a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalResult<S> {
    Exact(S),
    Enclosure(IntegralEnclosure<S>),
    /// The tail carries no pointwise bound at this point.
    Unknown,
}

impl<S: Scalar> EvalResult<S> {
    pub fn contains(&self, v: &S) -> Option<bool> {
        match self {
            EvalResult::Exact(x) => Some(x == v),
            EvalResult::Enclosure(e) => Some(e.contains(v)),
            EvalResult::Unknown => None,
        }
    }
}

/// `{"exact":"v"}`, `{"enclosure":{"lo":..,"hi":..}}` or `{"unknown":true}`.
impl<S: Scalar> Serialize for EvalResult<S> {
    fn serialize<Se: Serializer>(&self, serializer: Se) -> std::result::Result<Se::Ok, Se::Error> {
        use serde::ser::SerializeMap;
        let mut m = serializer.serialize_map(Some(1))?;
        match self {
            EvalResult::Exact(v) => m.serialize_entry("exact", &v.to_string())?,
            EvalResult::Enclosure(e) => m.serialize_entry("enclosure", e)?,
            EvalResult::Unknown => m.serialize_entry("unknown", &true)?,
        }
        m.end()
    }
}

/// Generator of series terms beyond a materialized prefix.
///
/// Contract, for every index `k` at or past the prefix it is attached to:
/// `tail_bound(k) >= sum_{n>k} integral |term(n)|`, nonincreasing in `k` and
/// tending to zero; `pointwise_tail(k, x)`, when `Some`, bounds
/// `sum_{n>k} |term(n)(x)|`. Terms are pure functions of the index.
pub trait TermGenerator<Sp: ElementarySpace>: Send + Sync {
    /// Term `n` of the whole series, 1-based.
    fn term(&self, space: &Sp, n: usize) -> Sp::Elem;

    fn tail_bound(&self, space: &Sp, k: usize) -> Sc<Sp>;

    fn pointwise_tail(&self, _space: &Sp, _k: usize, _x: &Sp::Point) -> Option<Sc<Sp>> {
        None
    }

    /// `true` only when `sum |term(n)(x)|` provably diverges at `x`.
    fn diverges_at(&self, _space: &Sp, _x: &Sp::Point) -> bool {
        false
    }

    fn describe(&self) -> String;
}

/// The terms of a series after its prefix. `None` is the zero tail.
pub struct TailModel<Sp: ElementarySpace> {
    generator: Option<Arc<dyn TermGenerator<Sp>>>,
}

impl<Sp: ElementarySpace> Clone for TailModel<Sp> {
    fn clone(&self) -> Self {
        TailModel {
            generator: self.generator.clone(),
        }
    }
}

impl<Sp: ElementarySpace> TailModel<Sp> {
    pub fn zero() -> Self {
        TailModel { generator: None }
    }

    pub fn new<G: TermGenerator<Sp> + 'static>(generator: G) -> Self {
        TailModel {
            generator: Some(Arc::new(generator)),
        }
    }

    pub fn from_arc(generator: Arc<dyn TermGenerator<Sp>>) -> Self {
        TailModel {
            generator: Some(generator),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.generator.is_none()
    }

    pub fn generator(&self) -> Option<&Arc<dyn TermGenerator<Sp>>> {
        self.generator.as_ref()
    }

    pub fn term(&self, space: &Sp, n: usize) -> Sp::Elem {
        match &self.generator {
            Some(g) => g.term(space, n),
            None => space.zero(),
        }
    }

    pub fn bound(&self, space: &Sp, k: usize) -> Sc<Sp> {
        match &self.generator {
            Some(g) => g.tail_bound(space, k),
            None => Sc::<Sp>::zero(),
        }
    }

    pub fn pointwise(&self, space: &Sp, k: usize, x: &Sp::Point) -> Option<Sc<Sp>> {
        match &self.generator {
            Some(g) => g.pointwise_tail(space, k, x),
            None => Some(Sc::<Sp>::zero()),
        }
    }

    pub fn describe(&self) -> String {
        match &self.generator {
            Some(g) => g.describe(),
            None => "zero".into(),
        }
    }
}

/// `f ~ f_1 + f_2 + ...` over an elementary space.
pub struct SeriesFunction<Sp: ElementarySpace> {
    space: Sp,
    prefix: Arc<Vec<Sp::Elem>>,
    tail: TailModel<Sp>,
}

impl<Sp: ElementarySpace> Clone for SeriesFunction<Sp> {
    fn clone(&self) -> Self {
        SeriesFunction {
            space: self.space.clone(),
            prefix: self.prefix.clone(),
            tail: self.tail.clone(),
        }
    }
}

impl<Sp: ElementarySpace> fmt::Debug for SeriesFunction<Sp> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeriesFunction")
            .field("space", &self.space.id())
            .field("prefix_len", &self.prefix.len())
            .field("tail", &self.tail.describe())
            .finish()
    }
}

/// Smallest `k` in `0..=budget` with `pred(k)`, for `pred` monotone
/// (false then true). Gallops, then bisects.
pub(crate) fn first_index(budget: usize, pred: impl Fn(usize) -> bool) -> Option<usize> {
    if pred(0) {
        return Some(0);
    }
    if budget == 0 {
        return None;
    }
    let (mut lo, mut hi) = (0usize, 1usize);
    loop {
        if pred(hi) {
            break;
        }
        if hi >= budget {
            return None;
        }
        lo = hi;
        hi = hi.saturating_mul(2).min(budget);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

fn require_positive<S: Scalar>(what: &'static str, v: &S) -> Result<()> {
    if v.is_positive() {
        Ok(())
    } else {
        Err(Error::NotPositive {
            what,
            value: v.to_string(),
        })
    }
}

impl<Sp: ElementarySpace> SeriesFunction<Sp> {
    pub fn new(space: Sp, prefix: Vec<Sp::Elem>, tail: TailModel<Sp>) -> Result<Self> {
        if let Some(bad) = prefix.iter().position(|e| !space.contains(e)) {
            return Err(Error::SpaceMismatch {
                left: space.id(),
                right: format!("prefix term {}", bad + 1),
            });
        }
        Ok(SeriesFunction {
            space,
            prefix: Arc::new(prefix),
            tail,
        })
    }

    /// `f ~ e + 0 + 0 + ...`. The element must belong to `space`.
    pub fn from_elementary(space: &Sp, e: Sp::Elem) -> Self {
        debug_assert!(space.contains(&e));
        SeriesFunction {
            space: space.clone(),
            prefix: Arc::new(vec![e]),
            tail: TailModel::zero(),
        }
    }

    pub fn zero(space: &Sp) -> Self {
        Self::from_elementary(space, space.zero())
    }

    /// A series whose every term comes from `generator`.
    pub fn from_generator<G: TermGenerator<Sp> + 'static>(space: &Sp, generator: G) -> Self {
        SeriesFunction {
            space: space.clone(),
            prefix: Arc::new(Vec::new()),
            tail: TailModel::new(generator),
        }
    }

    pub(crate) fn from_parts(space: &Sp, prefix: Vec<Sp::Elem>, tail: TailModel<Sp>) -> Self {
        SeriesFunction {
            space: space.clone(),
            prefix: Arc::new(prefix),
            tail,
        }
    }

    pub fn space(&self) -> &Sp {
        &self.space
    }

    pub fn prefix(&self) -> &[Sp::Elem] {
        &self.prefix
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn tail(&self) -> &TailModel<Sp> {
        &self.tail
    }

    pub fn has_zero_tail(&self) -> bool {
        self.tail.is_zero()
    }

    pub(crate) fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                left: self.space.id(),
                right: other.space.id(),
            });
        }
        Ok(())
    }

    /// Term `n`, 1-based.
    pub fn term(&self, n: usize) -> Sp::Elem {
        assert!(n >= 1, "series terms are 1-based");
        match self.prefix.get(n - 1) {
            Some(e) => e.clone(),
            None => self.tail.term(&self.space, n),
        }
    }

    /// `B_k`, an upper bound for `sum_{n>k} integral |f_n|`.
    pub fn tail_bound(&self, k: usize) -> Sc<Sp> {
        let m = self.prefix.len();
        if k >= m {
            return self.tail.bound(&self.space, k);
        }
        self.prefix[k..]
            .iter()
            .fold(self.tail.bound(&self.space, m), |acc, e| {
                acc + self.space.abs_integral(e)
            })
    }

    /// `B_0`, the certified total `sum integral |f_n|`.
    pub fn total_bound(&self) -> Sc<Sp> {
        self.tail_bound(0)
    }

    /// Upper bound for `sum_{n>k} |f_n(x)|`, if the tail provides one.
    pub fn pointwise_tail(&self, k: usize, x: &Sp::Point) -> Option<Sc<Sp>> {
        let m = self.prefix.len();
        let rest = self.tail.pointwise(&self.space, k.max(m), x)?;
        Some(self.prefix.iter().skip(k).fold(rest, |acc, e| {
            acc + self.space.evaluate(e, x).abs()
        }))
    }

    pub fn diverges_at(&self, x: &Sp::Point) -> bool {
        self.tail
            .generator()
            .is_some_and(|g| g.diverges_at(&self.space, x))
    }

    /// `s_k = f_1 + ... + f_k` as an elementary function.
    pub fn partial_sum(&self, k: usize) -> Sp::Elem {
        (1..=k).fold(self.space.zero(), |acc, n| self.space.add(&acc, &self.term(n)))
    }

    /// `integral s_k`, summed term by term.
    pub fn partial_integral(&self, k: usize) -> Sc<Sp> {
        (1..=k).fold(Sc::<Sp>::zero(), |acc, n| {
            acc + self.space.integral(&self.term(n))
        })
    }

    /// Materializes generator terms until the prefix has at least `k` terms.
    /// The represented function and all bounds are unchanged.
    pub fn refine_prefix(&self, k: usize) -> Self {
        let m = self.prefix.len();
        if k <= m || self.tail.is_zero() {
            return self.clone();
        }
        let mut prefix = (*self.prefix).clone();
        prefix.extend((m + 1..=k).map(|n| self.tail.term(&self.space, n)));
        SeriesFunction {
            space: self.space.clone(),
            prefix: Arc::new(prefix),
            tail: self.tail.clone(),
        }
    }

    /// `sum_{m<n<=k} integral |f_n| + B_k <= B_m` for `m <= k`.
    pub fn tail_consistent(&self, m: usize, k: usize) -> bool {
        if k < m {
            return true;
        }
        let spent = (m + 1..=k).fold(Sc::<Sp>::zero(), |acc, n| {
            acc + self.space.abs_integral(&self.term(n))
        });
        spent + self.tail_bound(k) <= self.tail_bound(m)
    }

    /// Smallest `k <= budget` with `B_k <= eps`.
    pub fn refinement_for(&self, eps: &Sc<Sp>, budget: usize) -> Result<usize> {
        require_positive("tolerance", eps)?;
        first_index(budget, |k| self.tail_bound(k) <= *eps).ok_or_else(|| {
            Error::BudgetExhausted {
                budget,
                achieved: self.tail_bound(budget).to_string(),
            }
        })
    }

    /// `[s_k - B_k, s_k + B_k]` with `s_k` the partial integral.
    pub fn enclosure_at(&self, k: usize) -> IntegralEnclosure<Sc<Sp>> {
        IntegralEnclosure::around(self.partial_integral(k), self.tail_bound(k))
    }

    /// `[max(0, int|s_k| - B_k), int|s_k| + B_k]`; sound because
    /// `| int|f| - int|s_k| | <= int|f - s_k| <= B_k`.
    pub fn norm_enclosure_at(&self, k: usize) -> IntegralEnclosure<Sc<Sp>> {
        let a = self.space.abs_integral(&self.partial_sum(k));
        let b = self.tail_bound(k);
        let lo = a.clone() - b.clone();
        let lo = if lo.is_negative() { Sc::<Sp>::zero() } else { lo };
        IntegralEnclosure::new(lo, a + b)
    }

    /// Enclosure of `integral f` of width at most `2 eps`.
    pub fn integral_enclosure(&self, eps: &Sc<Sp>) -> Result<IntegralEnclosure<Sc<Sp>>> {
        self.integral_enclosure_with(eps, DEFAULT_BUDGET)
    }

    pub fn integral_enclosure_with(
        &self,
        eps: &Sc<Sp>,
        budget: usize,
    ) -> Result<IntegralEnclosure<Sc<Sp>>> {
        let k = self.refinement_for(eps, budget)?;
        Ok(self.enclosure_at(k))
    }

    /// Enclosure of `integral |f|` of width at most `2 eps`.
    pub fn norm_enclosure(&self, eps: &Sc<Sp>) -> Result<IntegralEnclosure<Sc<Sp>>> {
        self.norm_enclosure_with(eps, DEFAULT_BUDGET)
    }

    pub fn norm_enclosure_with(
        &self,
        eps: &Sc<Sp>,
        budget: usize,
    ) -> Result<IntegralEnclosure<Sc<Sp>>> {
        let k = self.refinement_for(eps, budget)?;
        Ok(self.norm_enclosure_at(k))
    }

    /// Value at `x`, enclosed to within `eps` when the tail bounds it pointwise.
    pub fn eval_enclosure(&self, x: &Sp::Point, eps: &Sc<Sp>) -> Result<EvalResult<Sc<Sp>>> {
        self.eval_enclosure_with(x, eps, DEFAULT_BUDGET)
    }

    pub fn eval_enclosure_with(
        &self,
        x: &Sp::Point,
        eps: &Sc<Sp>,
        budget: usize,
    ) -> Result<EvalResult<Sc<Sp>>> {
        require_positive("tolerance", eps)?;
        if self.diverges_at(x) {
            // absolutely divergent points take the value 0 by convention
            return Ok(EvalResult::Exact(Sc::<Sp>::zero()));
        }
        if self.pointwise_tail(0, x).is_none() {
            return Ok(EvalResult::Unknown);
        }
        let Some(k) = first_index(budget, |k| {
            self.pointwise_tail(k, x).is_some_and(|p| p <= *eps)
        }) else {
            return Ok(EvalResult::Unknown);
        };
        let p = self.pointwise_tail(k, x).expect("checked above");
        let v = (1..=k).fold(Sc::<Sp>::zero(), |acc, n| {
            acc + self.space.evaluate(&self.term(n), x)
        });
        Ok(if p.is_zero() {
            EvalResult::Exact(v)
        } else {
            EvalResult::Enclosure(IntegralEnclosure::around(v, p))
        })
    }
}

/// Free-function forms of the basic operations.
pub fn from_elementary<Sp: ElementarySpace>(space: &Sp, e: Sp::Elem) -> SeriesFunction<Sp> {
    SeriesFunction::from_elementary(space, e)
}

pub fn refine_prefix<Sp: ElementarySpace>(f: &SeriesFunction<Sp>, k: usize) -> SeriesFunction<Sp> {
    f.refine_prefix(k)
}

pub fn integral_enclosure<Sp: ElementarySpace>(
    f: &SeriesFunction<Sp>,
    eps: &Sc<Sp>,
) -> Result<IntegralEnclosure<Sc<Sp>>> {
    f.integral_enclosure(eps)
}

pub fn norm_enclosure<Sp: ElementarySpace>(
    f: &SeriesFunction<Sp>,
    eps: &Sc<Sp>,
) -> Result<IntegralEnclosure<Sc<Sp>>> {
    f.norm_enclosure(eps)
}

pub fn eval_enclosure<Sp: ElementarySpace>(
    f: &SeriesFunction<Sp>,
    x: &Sp::Point,
    eps: &Sc<Sp>,
) -> Result<EvalResult<Sc<Sp>>> {
    f.eval_enclosure(x, eps)
}

#[cfg(test)]
mod tests;
