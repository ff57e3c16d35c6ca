//! The measure induced by a complete Daniell space, and the way back.
//!
//! A set is integrable when its indicator is; its measure is the integral of
//! the indicator. Sets over boxes come in two forms: an exact [`BoxSet`], or
//! a series of indicators with a certified tail. Exact forms stay exact under
//! the lattice operations; anything touching a series yields an enclosure.
//!
//! In the other direction, [`dyadic_decomposition`] approximates a
//! nonnegative simple function from below through its level sets, which is
//! the step showing that integrable functions are integrable with respect to
//! the induced measure.

use std::sync::Arc;

use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::boxes::{BoxSet, HyperBox};
use crate::completion::families::{MonotoneChain, SeqFn};
use crate::completion::{
    flatten_double_series, series_add, series_clip, series_min, series_sub, IntegralEnclosure,
    SeriesFunction, TailModel,
};
use crate::error::{Error, Result};
use crate::report::CheckReport;
use crate::scalar::Scalar;
use crate::simple::SimpleFunction;
use crate::space::{BoxSpace, ElementarySpace};

/// Sample points per element in [`stone_check`].
const STONE_POINTS: usize = 8;

/// Finite measure enclosure, or infinite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeasureValue<S> {
    Finite(IntegralEnclosure<S>),
    Infinite,
}

impl<S: Scalar> MeasureValue<S> {
    pub fn exact(v: S) -> Self {
        MeasureValue::Finite(IntegralEnclosure::point(v))
    }

    pub fn finite(&self) -> Option<&IntegralEnclosure<S>> {
        match self {
            MeasureValue::Finite(e) => Some(e),
            MeasureValue::Infinite => None,
        }
    }
}

impl<S: Scalar> Serialize for MeasureValue<S> {
    fn serialize<Se: Serializer>(&self, serializer: Se) -> std::result::Result<Se::Ok, Se::Error> {
        let mut m = serializer.serialize_map(Some(1))?;
        match self {
            MeasureValue::Finite(e) => m.serialize_entry("finite", e)?,
            MeasureValue::Infinite => m.serialize_entry("infinite", &true)?,
        }
        m.end()
    }
}

/// A set of finite measure in `R^N`.
#[derive(Clone, Debug)]
pub enum IntegrableSet<S: Scalar> {
    Exact(BoxSet<S>),
    /// Indicator given as a series; its represented function is `{0,1}`-valued a.e.
    Series(SeriesFunction<BoxSpace<S>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetOp {
    Difference,
    Union,
    Intersection,
}

impl SetOp {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "difference" => Some(SetOp::Difference),
            "union" => Some(SetOp::Union),
            "intersection" => Some(SetOp::Intersection),
            _ => None,
        }
    }
}

/// Indicator of a canonical (hence disjoint) box set.
pub fn set_indicator<S: Scalar>(set: &BoxSet<S>) -> SimpleFunction<S> {
    SimpleFunction::canonicalize(
        set.dim(),
        set.boxes().iter().map(|b| (b.clone(), S::one())),
    )
    .expect("boxes of one set share a dimension")
}

impl<S: Scalar> IntegrableSet<S> {
    pub fn dim(&self) -> usize {
        match self {
            IntegrableSet::Exact(b) => b.dim(),
            IntegrableSet::Series(f) => f.space().dim(),
        }
    }

    pub fn space(&self) -> BoxSpace<S> {
        match self {
            IntegrableSet::Exact(b) => BoxSpace::new(b.dim()).expect("box sets have dim >= 1"),
            IntegrableSet::Series(f) => f.space().clone(),
        }
    }

    pub fn indicator(&self) -> SeriesFunction<BoxSpace<S>> {
        match self {
            IntegrableSet::Exact(b) => {
                SeriesFunction::from_elementary(&self.space(), set_indicator(b))
            }
            IntegrableSet::Series(f) => f.clone(),
        }
    }

    pub fn as_exact(&self) -> Option<&BoxSet<S>> {
        match self {
            IntegrableSet::Exact(b) => Some(b),
            IntegrableSet::Series(_) => None,
        }
    }
}

/// `integral chi_A`, exact for box sets, otherwise to width `2 eps`.
pub fn mu_of<S: Scalar>(a: &IntegrableSet<S>, eps: &S) -> Result<MeasureValue<S>> {
    match a {
        IntegrableSet::Exact(b) => Ok(MeasureValue::exact(b.measure())),
        IntegrableSet::Series(f) => Ok(MeasureValue::Finite(f.integral_enclosure(eps)?)),
    }
}

/// Lattice combination of two sets.
///
/// Through indicators: `U \ V = chi_U - (chi_V ^ chi_U)`,
/// `U n V = chi_U ^ chi_V`, `U u V = chi_U + chi_V - (chi_V ^ chi_U)`.
pub fn set_combine<S: Scalar>(
    u: &IntegrableSet<S>,
    v: &IntegrableSet<S>,
    op: SetOp,
) -> Result<IntegrableSet<S>> {
    if let (IntegrableSet::Exact(a), IntegrableSet::Exact(b)) = (u, v) {
        return Ok(IntegrableSet::Exact(match op {
            SetOp::Difference => a.difference(b)?,
            SetOp::Union => a.union(b)?,
            SetOp::Intersection => a.intersection(b)?,
        }));
    }
    let (cu, cv) = (u.indicator(), v.indicator());
    let common = series_min(&cv, &cu)?;
    let out = match op {
        SetOp::Difference => series_sub(&cu, &common)?,
        SetOp::Intersection => common,
        SetOp::Union => series_sub(&series_add(&cu, &cv)?, &common)?,
    };
    Ok(IntegrableSet::Series(out))
}

/// Members of a countable union beyond the listed ones.
pub enum SetTail<S: Scalar> {
    /// No further members.
    Empty,
    /// Indicators of further pairwise disjoint members, with certified total measure.
    Series(TailModel<BoxSpace<S>>),
    /// Declared to have infinite total measure.
    Divergent,
}

/// Union together with its measure. `set` is `None` for an infinite union.
#[derive(Clone, Debug)]
pub struct SigmaUnion<S: Scalar> {
    pub set: Option<IntegrableSet<S>>,
    pub measure: MeasureValue<S>,
}

/// Countable disjoint union. The indicator is the flattened series of member
/// indicators; its measure enclosure converges to the sum of member measures.
pub fn sigma_union<S: Scalar>(
    space: &BoxSpace<S>,
    members: &[IntegrableSet<S>],
    tail: SetTail<S>,
    eps: &S,
) -> Result<SigmaUnion<S>> {
    if let Some(m) = members.iter().find(|m| m.dim() != space.dim()) {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: m.dim(),
        });
    }
    for (i, a) in members.iter().enumerate() {
        for (j, b) in members.iter().enumerate().skip(i + 1) {
            if let (Some(x), Some(y)) = (a.as_exact(), b.as_exact()) {
                let common = x.intersection(y)?;
                if let Some(w) = common.boxes().first() {
                    return Err(Error::Overlap {
                        first: i + 1,
                        second: j + 1,
                        witness: w.to_string(),
                    });
                }
            }
        }
    }
    let outer = match tail {
        SetTail::Divergent => {
            return Ok(SigmaUnion {
                set: None,
                measure: MeasureValue::Infinite,
            })
        }
        SetTail::Empty => TailModel::zero(),
        SetTail::Series(t) => t,
    };
    if outer.is_zero() {
        if let [single] = members {
            let measure = mu_of(single, eps)?;
            return Ok(SigmaUnion {
                set: Some(single.clone()),
                measure,
            });
        }
        let exact: Option<Vec<&BoxSet<S>>> = members.iter().map(|m| m.as_exact()).collect();
        if let Some(sets) = exact {
            let union = sets
                .into_iter()
                .try_fold(BoxSet::empty(space.dim()), |acc, s| acc.union(s))?;
            let measure = MeasureValue::exact(union.measure());
            return Ok(SigmaUnion {
                set: Some(IntegrableSet::Exact(union)),
                measure,
            });
        }
    }
    let rows: Vec<_> = members.iter().map(|m| m.indicator()).collect();
    let f = flatten_double_series(space, &rows, outer)?;
    let measure = MeasureValue::Finite(f.integral_enclosure(eps)?);
    Ok(SigmaUnion {
        set: Some(IntegrableSet::Series(f)),
        measure,
    })
}

/// Cells of `f` where `f > t`.
pub fn level_set<S: Scalar>(f: &SimpleFunction<S>, t: &S) -> BoxSet<S> {
    BoxSet::from_boxes(
        f.dim(),
        f.terms()
            .iter()
            .filter(|(_, c)| c > t)
            .map(|(b, _)| b.clone()),
    )
    .expect("terms share the dimension")
}

fn require_nonnegative<S: Scalar>(f: &SimpleFunction<S>) -> Result<()> {
    match f.terms().iter().find(|(_, c)| c.is_negative()) {
        Some((b, c)) => Err(Error::NegativeCoefficient {
            coef: c.to_string(),
            cell: b.to_string(),
        }),
        None => Ok(()),
    }
}

/// `f_n = sum_{k=1}^{2^n} (k-1) (M/2^n) chi_{B_k}` with
/// `B_k = A_{k-1} \ A_k`, `A_k = {f > k M/2^n}` and `M = sup f`.
///
/// `f_n <= f` and `f - f_n <= M/2^n` on the support of `f`.
pub fn dyadic_decomposition<S: Scalar>(f: &SimpleFunction<S>, n: u32) -> Result<SimpleFunction<S>> {
    require_nonnegative(f)?;
    if f.is_zero() {
        return Ok(f.clone());
    }
    let step = f.sup_abs() * S::two_pow_neg(n);
    // only levels holding some coefficient give a nonempty B_k
    let mut ks: Vec<S> = f
        .terms()
        .iter()
        .map(|(_, c)| (c.clone() / step.clone()).ceil_int())
        .collect();
    ks.sort();
    ks.dedup();
    let mut raw = Vec::new();
    for k in ks {
        let coef = (k.clone() - S::one()) * step.clone();
        if coef.is_zero() {
            continue;
        }
        let upper = level_set(f, &(coef.clone()));
        let band = upper.difference(&level_set(f, &(k * step.clone())))?;
        raw.extend(band.boxes().iter().map(|b| (b.clone(), coef.clone())));
    }
    SimpleFunction::canonicalize(f.dim(), raw)
}

/// `f ~ f_1 + (f_2 - f_1) + ...` over the dyadic chain; every term is
/// nonnegative, so `sum int|g_n| = int f`.
pub fn dyadic_series<S: Scalar>(f: &SimpleFunction<S>) -> Result<SeriesFunction<BoxSpace<S>>> {
    require_nonnegative(f)?;
    let space = BoxSpace::new(f.dim())?;
    let base = f.clone();
    let seq: SeqFn<BoxSpace<S>> = Arc::new(move |n| {
        dyadic_decomposition(&base, n.min(u32::MAX as usize) as u32).expect("checked nonnegative")
    });
    let at = f.clone();
    let chain = MonotoneChain::new("dyadic", seq, f.integral())
        .with_pointwise_limit(Arc::new(move |x: &Vec<S>| at.evaluate_unchecked(x)));
    Ok(SeriesFunction::from_generator(&space, chain))
}

/// `F ^ c` for `c > 0`.
///
/// Clips the partial sums, `h_n = (s_n ^ c) - (s_{n-1} ^ c)`; since
/// `|a ^ c - b ^ c| <= |a - b|` the tail bounds of `F` carry over and no
/// support box is needed.
pub fn truncate_at<Sp: ElementarySpace>(
    f: &SeriesFunction<Sp>,
    c: &Sp::Scalar,
) -> Result<SeriesFunction<Sp>> {
    series_clip(f, c)
}

/// Stone's condition on random elements: `f ^ 1` lies in the space and
/// agrees with pointwise clipping at sample points.
pub fn stone_check<Sp: ElementarySpace>(space: &Sp, trials: usize, seed: u64) -> CheckReport {
    let mut report = CheckReport::new(space.id(), "stone", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = Sp::Scalar::one();
    for t in 0..trials {
        let f = space.sample_element(&mut rng);
        let clipped = space.min_with_constant(&f, &one);
        report.iterations += 1;
        if !space.contains(&clipped) {
            report.fail(format!("trial {t}: f ^ 1 left the space for f={f:?}"));
            return report;
        }
        if !space.le(&clipped, &f) {
            report.fail(format!("trial {t}: f ^ 1 <= f fails for f={f:?}"));
            return report;
        }
        for _ in 0..STONE_POINTS {
            let x = space.sample_point(&mut rng);
            let want = Sp::Scalar::min_of(&space.evaluate(&f, &x), &one);
            let got = space.evaluate(&clipped, &x);
            if got != want {
                report.fail(format!("trial {t}: (f ^ 1)({x:?}) = {got} != {want}"));
                return report;
            }
        }
    }
    report.bound("trials", trials);
    report.bound("points_per_trial", STONE_POINTS);
    report
}

/// `[a, b) x [0,1)^(N-1)` convenience used by scenarios and tests.
pub fn slab_set<S: Scalar>(space: &BoxSpace<S>, a: S, b: S) -> IntegrableSet<S> {
    let bx: HyperBox<S> = space.slab(a, b);
    IntegrableSet::Exact(BoxSet::from_boxes(space.dim(), [bx]).expect("one dimension"))
}

#[cfg(test)]
mod tests {
    use num_traits::{Signed, Zero};
    use super::*;
    use crate::completion::families::ShrinkingBoxes;
    use crate::space::{CountingSpace, FiniteSpace};
    use crate::Rational;

    fn q(s: &str) -> Rational {
        Rational::parse_exact(s).unwrap()
    }

    fn iv(a: &str, b: &str) -> HyperBox<Rational> {
        HyperBox::interval(q(a), q(b))
    }

    fn set(boxes: &[(&str, &str)]) -> IntegrableSet<Rational> {
        IntegrableSet::Exact(BoxSet::from_boxes(1, boxes.iter().map(|(a, b)| iv(a, b))).unwrap())
    }

    fn line() -> BoxSpace<Rational> {
        BoxSpace::new(1).unwrap()
    }

    /// `U_n = [n-1, n-1 + 4^-n)`.
    fn quarter_boxes() -> IntegrableSet<Rational> {
        let g = ShrinkingBoxes::new(q("0"), q("1"), q("1/4"), vec![]).unwrap();
        IntegrableSet::Series(SeriesFunction::from_generator(&line(), g))
    }

    #[test]
    fn mu_examples() {
        let eps = q("1/1000000");
        assert_eq!(mu_of(&set(&[("0", "1"), ("2", "3")]), &eps).unwrap(), MeasureValue::exact(q("2")));
        assert_eq!(mu_of(&set(&[]), &eps).unwrap(), MeasureValue::exact(q("0")));
        let m = mu_of(&quarter_boxes(), &eps).unwrap();
        assert!(m.finite().unwrap().contains(&q("1/3")));
    }

    #[test]
    fn combine_examples() {
        let a = set(&[("0", "2")]);
        let b = set(&[("1", "3")]);
        let d = set_combine(&a, &b, SetOp::Difference).unwrap();
        assert_eq!(d.as_exact().unwrap().boxes(), &[iv("0", "1")]);
        let u = set_combine(&a, &b, SetOp::Union).unwrap();
        assert_eq!(u.as_exact().unwrap().measure(), q("3"));

        let i = set_combine(&quarter_boxes(), &set(&[("0", "1")]), SetOp::Intersection).unwrap();
        let m = mu_of(&i, &q("1/100000")).unwrap();
        assert!(m.finite().unwrap().contains(&q("1/4")), "{m:?}");
    }

    #[test]
    fn series_union_and_difference_use_inclusion_exclusion() {
        let u = set_combine(&quarter_boxes(), &set(&[("0", "1")]), SetOp::Union).unwrap();
        let m = mu_of(&u, &q("1/100000")).unwrap();
        // 1 + 1/3 - 1/4
        assert!(m.finite().unwrap().contains(&q("13/12")), "{m:?}");
        let d = set_combine(&quarter_boxes(), &set(&[("0", "1")]), SetOp::Difference).unwrap();
        let m = mu_of(&d, &q("1/100000")).unwrap();
        assert!(m.finite().unwrap().contains(&q("1/12")), "{m:?}");
    }

    #[test]
    fn sigma_union_examples() {
        let sp = line();
        let members: Vec<_> = (1..=10)
            .map(|n| {
                let a = Rational::from_int(n - 1);
                let b = a.clone() + Rational::two_pow_neg(n as u32);
                IntegrableSet::Exact(BoxSet::from_boxes(1, [HyperBox::interval(a, b)]).unwrap())
            })
            .collect();
        let r = sigma_union(&sp, &members, SetTail::Empty, &q("1/1024")).unwrap();
        assert_eq!(r.measure, MeasureValue::exact(q("1") - Rational::two_pow_neg(10)));

        let inf = sigma_union(&sp, &members[..1], SetTail::Divergent, &q("1/2")).unwrap();
        assert_eq!(inf.measure, MeasureValue::Infinite);
        assert!(inf.set.is_none());

        let one = sigma_union(&sp, &members[..1], SetTail::Empty, &q("1/2")).unwrap();
        assert_eq!(one.measure, MeasureValue::exact(q("1/2")));

        let clash = [set(&[("0", "2")]), set(&[("1", "3")])];
        assert!(matches!(
            sigma_union(&sp, &clash, SetTail::Empty, &q("1/2")),
            Err(Error::Overlap { first: 1, second: 2, .. })
        ));
    }

    #[test]
    fn sigma_union_with_series_tail() {
        let sp = line();
        let members = [set(&[("0", "1/2")])];
        // further members [n-1, n-1 + 2^-n) for n >= 2 are generated
        let gen = ShrinkingBoxes::new(q("0"), q("1"), q("1/2"), vec![]).unwrap();
        let tail = SetTail::Series(TailModel::new(gen));
        let r = sigma_union(&sp, &members, tail, &q("1/1000000")).unwrap();
        let e = r.measure.finite().unwrap().clone();
        assert!(e.contains(&q("1")), "{e}");
        let f = r.set.unwrap().indicator();
        for k in 1..30 {
            let partial = f.partial_integral(k);
            assert!((partial - e.midpoint()).abs() <= f.tail_bound(k) + e.width());
        }
    }

    #[test]
    fn dyadic_examples() {
        let f = SimpleFunction::canonicalize(
            1,
            [(iv("0", "1"), q("1")), (iv("1", "2"), q("3"))],
        )
        .unwrap();
        let d = dyadic_decomposition(&f, 1).unwrap();
        assert_eq!(d, SimpleFunction::constant_on(iv("1", "2"), q("3/2")));
        assert_eq!(d.integral(), q("3/2"));

        let c = SimpleFunction::constant_on(iv("0", "1"), q("5/3"));
        for n in 1..8 {
            let want = q("5/3") - q("5/3") * Rational::two_pow_neg(n);
            assert_eq!(
                dyadic_decomposition(&c, n).unwrap(),
                SimpleFunction::constant_on(iv("0", "1"), want)
            );
        }
        let z = SimpleFunction::<Rational>::zero(2);
        assert_eq!(dyadic_decomposition(&z, 3).unwrap(), z);

        let neg = SimpleFunction::constant_on(iv("0", "1"), q("-1"));
        assert!(matches!(
            dyadic_decomposition(&neg, 2),
            Err(Error::NegativeCoefficient { .. })
        ));
    }

    #[test]
    fn dyadic_matches_per_cell_formula() {
        let f = SimpleFunction::canonicalize(
            1,
            [(iv("0", "1"), q("1/7")), (iv("1", "2"), q("3")), (iv("2", "5"), q("2")), (iv("6", "7"), q("3/2"))],
        )
        .unwrap();
        for n in 1..9 {
            let d = dyadic_decomposition(&f, n).unwrap();
            let step = q("3") * Rational::two_pow_neg(n);
            for i in 0..80 {
                let x = vec![Rational::ratio(i, 10)];
                let v = f.evaluate(&x).unwrap();
                let k = (v.clone() / step.clone()).ceil_int();
                let want = if v.is_zero() { q("0") } else { (k - q("1")) * step.clone() };
                assert_eq!(d.evaluate(&x).unwrap(), want);
            }
        }
    }

    #[test]
    fn dyadic_series_telescopes_to_integral() {
        let f = SimpleFunction::canonicalize(
            1,
            [(iv("0", "1"), q("1/3")), (iv("1", "3"), q("2"))],
        )
        .unwrap();
        let s = dyadic_series(&f).unwrap();
        for k in 1..12 {
            let norms = (1..=k)
                .map(|n| s.term(n).abs_integral())
                .fold(q("0"), |a, b| a + b);
            assert_eq!(norms + s.tail_bound(k), f.integral());
        }
    }

    #[test]
    fn truncate_examples() {
        let sp = line();
        let f = SeriesFunction::from_elementary(&sp, SimpleFunction::constant_on(iv("0", "1"), q("5")));
        let t = truncate_at(&f, &q("2")).unwrap();
        assert_eq!(t.integral_enclosure(&q("1/8")).unwrap(), IntegralEnclosure::point(q("2")));

        let g = SimpleFunction::canonicalize(1, [(iv("0", "1"), q("1")), (iv("1", "2"), q("3"))]).unwrap();
        let gs = SeriesFunction::from_elementary(&sp, g.clone());
        let t = truncate_at(&gs, &g.sup_abs()).unwrap();
        assert_eq!(t.partial_sum(t.prefix_len()), g);
    }

    #[test]
    fn stone_passes_everywhere() {
        assert!(stone_check(&line(), 200, 4).passed());
        assert!(stone_check(&CountingSpace::<Rational>::new(), 200, 5).passed());
        let fin = FiniteSpace::new(vec![q("1"), q("1/2"), q("0")]).unwrap();
        assert!(stone_check(&fin, 200, 6).passed());
    }

    #[test]
    fn level_indicator_limit() {
        // chi_{f > a} as the limit of (n (f - f ^ a)) ^ 1
        let f = SimpleFunction::canonicalize(
            1,
            [(iv("0", "1"), q("1/2")), (iv("1", "2"), q("3/2")), (iv("2", "4"), q("5/4"))],
        )
        .unwrap();
        let a = q("1");
        let g = f.sub(&f.min_with_constant(&a).unwrap()).unwrap();
        let exact = level_set(&f, &a).measure();
        assert_eq!(exact, q("3"));
        let mut prev = q("0");
        let mut hit = None;
        for n in 1..=8 {
            let gn = g.scale(&Rational::from_int(n)).min_with_constant(&q("1")).unwrap();
            let v = gn.integral();
            assert!(prev <= v && v <= exact);
            if v == exact && hit.is_none() {
                hit = Some(n);
            }
            prev = v;
        }
        // smallest positive value of g is 1/4
        assert_eq!(hit, Some(4));
    }

    #[test]
    fn measure_json() {
        let m = MeasureValue::exact(q("1/2"));
        assert_eq!(serde_json::to_string(&m).unwrap(), r#"{"finite":{"lo":"1/2","hi":"1/2"}}"#);
        let i = MeasureValue::<Rational>::Infinite;
        assert_eq!(serde_json::to_string(&i).unwrap(), r#"{"infinite":true}"#);
    }
}
