//! Curated leaf tails with closed-form bounds.
//!
//! Each generator here can state `B_k` exactly, so a series built from them
//! carries a sound certificate without trusting user code. Composite tails
//! live in [`super::ops`].

use num_traits::{One, Signed, Zero};
use std::sync::Arc;

use super::TermGenerator;
use crate::boxes::HyperBox;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simple::SimpleFunction;
use crate::space::{BoxSpace, ElementarySpace};

type Sc<Sp> = <Sp as ElementarySpace>::Scalar;

/// How the base element moves from one term to the next.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftRule {
    /// Every term uses the base element unchanged.
    Fixed,
    /// Term `n` is the base translated by `n - 1` unit steps.
    UnitShift,
}

impl ShiftRule {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fixed" => Some(ShiftRule::Fixed),
            "unit_shift" => Some(ShiftRule::UnitShift),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ShiftRule::Fixed => "fixed",
            ShiftRule::UnitShift => "unit_shift",
        }
    }
}

fn placed<Sp: ElementarySpace>(space: &Sp, base: &Sp::Elem, rule: ShiftRule, n: usize) -> Sp::Elem {
    match rule {
        ShiftRule::Fixed => base.clone(),
        ShiftRule::UnitShift => space
            .translate(base, n - 1)
            .expect("checked at construction"),
    }
}

fn check_rule<Sp: ElementarySpace>(space: &Sp, base: &Sp::Elem, rule: ShiftRule) -> Result<()> {
    if !space.contains(base) {
        return Err(Error::SpaceMismatch {
            left: space.id(),
            right: "base element".into(),
        });
    }
    if rule == ShiftRule::UnitShift && space.translate(base, 0).is_none() {
        return Err(Error::Unsupported(format!(
            "space {} has no unit shift",
            space.id()
        )));
    }
    Ok(())
}

/// `sum_{n > k, n in window} w(n) |base_n(x)|` for shifted bases, where the
/// window comes from the space. Exact, since only finitely many shifts reach `x`.
fn shifted_pointwise<Sp: ElementarySpace>(
    space: &Sp,
    base: &Sp::Elem,
    k: usize,
    x: &Sp::Point,
    weight: impl Fn(usize) -> Sc<Sp>,
) -> Sc<Sp> {
    let Some((smin, smax)) = space.shift_window(base, x) else {
        return Sc::<Sp>::zero();
    };
    (smin.max(k)..=smax).fold(Sc::<Sp>::zero(), |acc, s| {
        let t = space.translate(base, s).expect("checked at construction");
        acc + weight(s + 1) * space.evaluate(&t, x).abs()
    })
}

/// `f_n = c r^n b_n` with `|r| < 1`, `b_n` the base placed by the shift rule.
///
/// `B_k = |c| int|b| |r|^(k+1) / (1 - |r|)`.
pub struct Geometric<Sp: ElementarySpace> {
    base: Sp::Elem,
    coef: Sc<Sp>,
    ratio: Sc<Sp>,
    rule: ShiftRule,
    base_norm: Sc<Sp>,
}

impl<Sp: ElementarySpace> Geometric<Sp> {
    pub fn new(
        space: &Sp,
        base: Sp::Elem,
        coef: Sc<Sp>,
        ratio: Sc<Sp>,
        rule: ShiftRule,
    ) -> Result<Self> {
        if ratio.abs() >= Sc::<Sp>::one() {
            return Err(Error::Unsupported(format!(
                "geometric ratio {ratio} is not below 1 in absolute value"
            )));
        }
        check_rule(space, &base, rule)?;
        let base_norm = space.abs_integral(&base);
        Ok(Geometric {
            base,
            coef,
            ratio,
            rule,
            base_norm,
        })
    }

    fn weight(&self, n: usize) -> Sc<Sp> {
        self.coef.clone() * self.ratio.pow_i(n as u32)
    }

    /// `sum_{n>k} |c| |r|^n`.
    fn tail_weight(&self, k: usize) -> Sc<Sp> {
        let r = self.ratio.abs();
        self.coef.abs() * r.pow_i(k as u32 + 1) / (Sc::<Sp>::one() - r)
    }
}

impl<Sp: ElementarySpace> TermGenerator<Sp> for Geometric<Sp> {
    fn term(&self, space: &Sp, n: usize) -> Sp::Elem {
        space.scale(&placed(space, &self.base, self.rule, n), &self.weight(n))
    }

    fn tail_bound(&self, _space: &Sp, k: usize) -> Sc<Sp> {
        self.tail_weight(k) * self.base_norm.clone()
    }

    fn pointwise_tail(&self, space: &Sp, k: usize, x: &Sp::Point) -> Option<Sc<Sp>> {
        Some(match self.rule {
            ShiftRule::Fixed => self.tail_weight(k) * space.evaluate(&self.base, x).abs(),
            ShiftRule::UnitShift => {
                shifted_pointwise(space, &self.base, k, x, |n| self.weight(n).abs())
            }
        })
    }

    fn describe(&self) -> String {
        format!(
            "geometric(coef={}, ratio={}, rule={})",
            self.coef,
            self.ratio,
            self.rule.as_str()
        )
    }
}

/// `f_n = c n^(-p) b_n` with integer `p >= 2`.
///
/// `B_0 = |c| int|b| p/(p-1)` and `B_k = |c| int|b| k^(1-p)/(p-1)` for `k >= 1`,
/// from `sum_{n>k} n^-p <= int_k^inf t^-p dt`.
pub struct PSeries<Sp: ElementarySpace> {
    base: Sp::Elem,
    coef: Sc<Sp>,
    p: u32,
    rule: ShiftRule,
    base_norm: Sc<Sp>,
}

impl<Sp: ElementarySpace> PSeries<Sp> {
    pub fn new(space: &Sp, base: Sp::Elem, coef: Sc<Sp>, p: u32, rule: ShiftRule) -> Result<Self> {
        if p < 2 {
            return Err(Error::Unsupported(format!(
                "p-series needs p >= 2 for a closed-form tail, got {p}"
            )));
        }
        check_rule(space, &base, rule)?;
        let base_norm = space.abs_integral(&base);
        Ok(PSeries {
            base,
            coef,
            p,
            rule,
            base_norm,
        })
    }

    fn weight(&self, n: usize) -> Sc<Sp> {
        self.coef.clone() / Sc::<Sp>::from_int(n as i64).pow_i(self.p)
    }

    fn tail_weight(&self, k: usize) -> Sc<Sp> {
        let pm1 = Sc::<Sp>::from_int(self.p as i64 - 1);
        let s = if k == 0 {
            Sc::<Sp>::from_int(self.p as i64) / pm1
        } else {
            Sc::<Sp>::one() / (Sc::<Sp>::from_int(k as i64).pow_i(self.p - 1) * pm1)
        };
        self.coef.abs() * s
    }
}

impl<Sp: ElementarySpace> TermGenerator<Sp> for PSeries<Sp> {
    fn term(&self, space: &Sp, n: usize) -> Sp::Elem {
        space.scale(&placed(space, &self.base, self.rule, n), &self.weight(n))
    }

    fn tail_bound(&self, _space: &Sp, k: usize) -> Sc<Sp> {
        self.tail_weight(k) * self.base_norm.clone()
    }

    fn pointwise_tail(&self, space: &Sp, k: usize, x: &Sp::Point) -> Option<Sc<Sp>> {
        Some(match self.rule {
            ShiftRule::Fixed => self.tail_weight(k) * space.evaluate(&self.base, x).abs(),
            ShiftRule::UnitShift => {
                shifted_pointwise(space, &self.base, k, x, |n| self.weight(n).abs())
            }
        })
    }

    fn describe(&self) -> String {
        format!("p_series(coef={}, p={}, rule={})", self.coef, self.p, self.rule.as_str())
    }
}

/// Indicators of `[a + n - 1, a + n - 1 + w r^n) x rest`: unit steps along
/// the first axis with geometrically shrinking width.
///
/// `B_k = w |rest| r^(k+1) / (1 - r)`; the pointwise tail is exact.
#[derive(Clone, Debug)]
pub struct ShrinkingBoxes<S> {
    anchor: S,
    width: S,
    ratio: S,
    rest: Vec<(S, S)>,
}

impl<S: Scalar> ShrinkingBoxes<S> {
    /// `rest` are the sides on axes `1..N`; empty in one dimension.
    pub fn new(anchor: S, width: S, ratio: S, rest: Vec<(S, S)>) -> Result<Self> {
        if !width.is_positive() {
            return Err(Error::NotPositive {
                what: "width",
                value: width.to_string(),
            });
        }
        if !ratio.is_positive() || ratio >= S::one() {
            return Err(Error::Unsupported(format!(
                "shrinking ratio {ratio} must lie in (0, 1)"
            )));
        }
        if let Some((a, b)) = rest.iter().find(|(a, b)| a >= b) {
            return Err(Error::Unsupported(format!("empty side [{a}, {b})")));
        }
        Ok(ShrinkingBoxes {
            anchor,
            width,
            ratio,
            rest,
        })
    }

    pub fn dim(&self) -> usize {
        self.rest.len() + 1
    }

    fn rest_measure(&self) -> S {
        self.rest
            .iter()
            .fold(S::one(), |acc, (a, b)| acc * (b.clone() - a.clone()))
    }

    pub fn box_at(&self, n: usize) -> HyperBox<S> {
        let lo = self.anchor.clone() + S::from_int(n as i64 - 1);
        let hi = lo.clone() + self.width.clone() * self.ratio.pow_i(n as u32);
        let mut sides = vec![(lo, hi)];
        sides.extend(self.rest.iter().cloned());
        HyperBox::from_sides(sides).expect("dim >= 1")
    }
}

impl<S: Scalar> TermGenerator<BoxSpace<S>> for ShrinkingBoxes<S> {
    fn term(&self, _space: &BoxSpace<S>, n: usize) -> SimpleFunction<S> {
        SimpleFunction::indicator(self.box_at(n))
    }

    fn tail_bound(&self, _space: &BoxSpace<S>, k: usize) -> S {
        self.width.clone() * self.rest_measure() * self.ratio.pow_i(k as u32 + 1)
            / (S::one() - self.ratio.clone())
    }

    fn pointwise_tail(&self, _space: &BoxSpace<S>, k: usize, x: &Vec<S>) -> Option<S> {
        let inside_rest = self
            .rest
            .iter()
            .zip(&x[1..])
            .all(|((a, b), xi)| a <= xi && xi < b);
        if !inside_rest {
            return Some(S::zero());
        }
        // box n can hold x0 only if  x0 - a - w < n - 1 <= x0 - a
        let off = x[0].clone() - self.anchor.clone();
        let smax = off.floor_i64()?;
        let smin = (off - self.width.clone()).floor_i64()?;
        let from = smin.max(k as i64).max(0);
        let hits = (from..=smax)
            .filter(|s| self.box_at(*s as usize + 1).contains_unchecked(x))
            .count();
        Some(S::from_int(hits as i64))
    }

    fn describe(&self) -> String {
        format!(
            "shrinking_boxes(anchor={}, width={}, ratio={})",
            self.anchor, self.width, self.ratio
        )
    }
}

/// `g ~ |f| + |f| + ...` for a null `f`.
///
/// Every term has zero norm, so `B_k = 0`. The sum diverges exactly where
/// `f(x) != 0`, and the represented value there is `0`.
pub struct RepeatNull<Sp: ElementarySpace> {
    abs: Sp::Elem,
}

impl<Sp: ElementarySpace> RepeatNull<Sp> {
    pub fn new(space: &Sp, f: &Sp::Elem) -> Result<Self> {
        let n = space.abs_integral(f);
        if !n.is_zero() {
            return Err(Error::Unsupported(format!(
                "repeated term has norm {n}, not a null function"
            )));
        }
        Ok(RepeatNull { abs: space.abs(f) })
    }
}

impl<Sp: ElementarySpace> TermGenerator<Sp> for RepeatNull<Sp> {
    fn term(&self, _space: &Sp, _n: usize) -> Sp::Elem {
        self.abs.clone()
    }

    fn tail_bound(&self, _space: &Sp, _k: usize) -> Sc<Sp> {
        Sc::<Sp>::zero()
    }

    fn pointwise_tail(&self, space: &Sp, _k: usize, x: &Sp::Point) -> Option<Sc<Sp>> {
        space
            .evaluate(&self.abs, x)
            .is_zero()
            .then(Sc::<Sp>::zero)
    }

    fn diverges_at(&self, space: &Sp, x: &Sp::Point) -> bool {
        !space.evaluate(&self.abs, x).is_zero()
    }

    fn describe(&self) -> String {
        "repeat_null".into()
    }
}

pub type SeqFn<Sp> = Arc<dyn Fn(usize) -> <Sp as ElementarySpace>::Elem + Send + Sync>;
pub type PointFn<Sp> =
    Arc<dyn Fn(&<Sp as ElementarySpace>::Point) -> <Sp as ElementarySpace>::Scalar + Send + Sync>;

/// `f_1 + (f_2 - f_1) + (f_3 - f_2) + ...` for a monotone sequence `f_n`
/// with declared `lim int f_n = L`.
///
/// Monotonicity makes every difference one-signed, so
/// `B_k = |L - int f_k|` for `k >= 1`. Soundness rests on the declared
/// limit; the harness re-checks monotonicity on materialized steps.
pub struct MonotoneChain<Sp: ElementarySpace> {
    name: String,
    seq: SeqFn<Sp>,
    limit: Sc<Sp>,
    limit_at: Option<PointFn<Sp>>,
}

impl<Sp: ElementarySpace> MonotoneChain<Sp> {
    pub fn new(name: impl Into<String>, seq: SeqFn<Sp>, limit: Sc<Sp>) -> Self {
        MonotoneChain {
            name: name.into(),
            seq,
            limit,
            limit_at: None,
        }
    }

    /// Pointwise limit, enabling exact pointwise tails.
    pub fn with_pointwise_limit(mut self, limit_at: PointFn<Sp>) -> Self {
        self.limit_at = Some(limit_at);
        self
    }

    pub fn element(&self, n: usize) -> Sp::Elem {
        (self.seq)(n)
    }

    pub fn limit(&self) -> &Sc<Sp> {
        &self.limit
    }
}

impl<Sp: ElementarySpace> TermGenerator<Sp> for MonotoneChain<Sp> {
    fn term(&self, space: &Sp, n: usize) -> Sp::Elem {
        if n == 1 {
            (self.seq)(1)
        } else {
            space.sub(&(self.seq)(n), &(self.seq)(n - 1))
        }
    }

    fn tail_bound(&self, space: &Sp, k: usize) -> Sc<Sp> {
        let f1 = (self.seq)(k.max(1));
        let gap = (self.limit.clone() - space.integral(&f1)).abs();
        if k == 0 {
            space.abs_integral(&f1) + gap
        } else {
            gap
        }
    }

    fn pointwise_tail(&self, space: &Sp, k: usize, x: &Sp::Point) -> Option<Sc<Sp>> {
        let lim = self.limit_at.as_ref()?(x);
        let fk = space.evaluate(&(self.seq)(k.max(1)), x);
        let gap = (lim - fk.clone()).abs();
        Some(if k == 0 { fk.abs() + gap } else { gap })
    }

    fn describe(&self) -> String {
        format!("monotone_chain({}, limit={})", self.name, self.limit)
    }
}

/// Wraps a generator and scales its claimed bound by `factor < 1`.
///
/// Deliberately unsound; exists so fault-injection scenarios can show the
/// harness catching an under-reported tail.
pub struct Underbound<Sp: ElementarySpace> {
    inner: Arc<dyn TermGenerator<Sp>>,
    factor: Sc<Sp>,
}

impl<Sp: ElementarySpace> Underbound<Sp> {
    pub fn new(inner: Arc<dyn TermGenerator<Sp>>, factor: Sc<Sp>) -> Self {
        Underbound { inner, factor }
    }
}

impl<Sp: ElementarySpace> TermGenerator<Sp> for Underbound<Sp> {
    fn term(&self, space: &Sp, n: usize) -> Sp::Elem {
        self.inner.term(space, n)
    }

    fn tail_bound(&self, space: &Sp, k: usize) -> Sc<Sp> {
        self.inner.tail_bound(space, k) * self.factor.clone()
    }

    fn describe(&self) -> String {
        format!("underbound({}, factor={})", self.inner.describe(), self.factor)
    }
}
