use super::families::{Geometric, MonotoneChain, PSeries, ShiftRule, ShrinkingBoxes, Underbound};
use super::*;
use crate::space::{BoxSpace, CountingSpace, SeqFunction};
use crate::{HyperBox, Rational, SimpleFunction};

fn q(s: &str) -> Rational {
    Rational::parse_exact(s).unwrap()
}

fn line() -> BoxSpace<Rational> {
    BoxSpace::new(1).unwrap()
}

fn chi(a: &str, b: &str) -> SimpleFunction<Rational> {
    SimpleFunction::indicator(HyperBox::interval(q(a), q(b)))
}

/// `sum 2^-n chi_[n-1, n)`.
fn incompleteness() -> SeriesFunction<BoxSpace<Rational>> {
    let sp = line();
    let g = Geometric::new(&sp, chi("0", "1"), q("1"), q("1/2"), ShiftRule::UnitShift).unwrap();
    SeriesFunction::from_generator(&sp, g)
}

/// `sum (-1)^n 2^-n chi_[0,1)`.
fn alternating() -> SeriesFunction<BoxSpace<Rational>> {
    let sp = line();
    let g = Geometric::new(&sp, chi("0", "1"), q("1"), q("-1/2"), ShiftRule::Fixed).unwrap();
    SeriesFunction::from_generator(&sp, g)
}

#[test]
fn gallop_finds_minimal_index() {
    for target in [0usize, 1, 2, 3, 17, 64, 999, 1000] {
        assert_eq!(first_index(1000, |k| k >= target), Some(target));
    }
    assert_eq!(first_index(1000, |k| k >= 1001), None);
    assert_eq!(first_index(0, |_| false), None);
}

#[test]
fn elementary_series_are_exact() {
    let sp = line();
    let f = from_elementary(&sp, chi("0", "1").scale(&q("2")));
    let e = f.integral_enclosure(&q("1/1024")).unwrap();
    assert_eq!(e, IntegralEnclosure::point(q("2")));
    let z = SeriesFunction::zero(&sp);
    assert_eq!(z.integral_enclosure(&q("1")).unwrap(), IntegralEnclosure::point(q("0")));
    let c = CountingSpace::<Rational>::new();
    let s = from_elementary(&c, SeqFunction::new([(1, q("1"))]).unwrap());
    assert_eq!(s.integral_enclosure(&q("1/2")).unwrap(), IntegralEnclosure::point(q("1")));
    let neg = from_elementary(&sp, chi("0", "1").scale(&q("-2")));
    assert_eq!(neg.norm_enclosure(&q("1/8")).unwrap(), IntegralEnclosure::point(q("2")));
}

#[test]
fn refine_prefix_materializes_terms() {
    let f = incompleteness();
    let r = f.refine_prefix(10);
    assert_eq!(r.prefix_len(), 10);
    // closed-form geometric tail: sum_{n>10} 2^-n = 2^-10
    assert_eq!(r.tail_bound(10), q("1/1024"));
    for k in [0, 3, 10, 15] {
        assert_eq!(r.tail_bound(k), f.tail_bound(k));
        assert_eq!(r.partial_integral(k), f.partial_integral(k));
    }
    assert!(r.tail_consistent(0, 10) && r.tail_consistent(10, 25));
    assert_eq!(r.refine_prefix(4).prefix_len(), 10);
    let e = from_elementary(&line(), chi("0", "1"));
    assert_eq!(e.refine_prefix(50).prefix_len(), 1);
}

#[test]
fn incompleteness_example_enclosures() {
    let f = incompleteness();
    let eps = Rational::two_pow_neg(10);
    let e = f.integral_enclosure(&eps).unwrap();
    assert!(e.contains(&q("1")));
    assert!(e.width() <= Rational::two_pow_neg(9));
    let n = f.norm_enclosure(&eps).unwrap();
    assert!(n.contains(&q("1")) && n.width() <= Rational::two_pow_neg(9));
}

#[test]
fn alternating_example_enclosures() {
    let f = alternating();
    let eps = q("1/4096");
    assert!(f.integral_enclosure(&eps).unwrap().contains(&q("-1/3")));
    let n = f.norm_enclosure(&eps).unwrap();
    assert!(n.contains(&q("1/3")), "{n}");
    assert_eq!(f.total_bound(), q("1"));
}

#[test]
fn nonpositive_tolerance_is_rejected() {
    let f = incompleteness();
    assert!(matches!(f.integral_enclosure(&q("0")), Err(Error::NotPositive { .. })));
    assert!(f.eval_enclosure(&vec![q("1")], &q("-1")).is_err());
}

#[test]
fn broken_tail_exhausts_budget() {
    let sp = line();
    let g = Geometric::new(&sp, chi("0", "1"), q("1"), q("999/1000"), ShiftRule::Fixed).unwrap();
    let f = SeriesFunction::from_generator(&sp, g);
    match f.integral_enclosure_with(&Rational::two_pow_neg(40), 100) {
        Err(Error::BudgetExhausted { budget, achieved }) => {
            assert_eq!(budget, 100);
            assert!(!achieved.is_empty());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn p_series_bound_dominates_exact_tail() {
    let sp = line();
    let p = PSeries::new(&sp, chi("0", "1"), q("1"), 2, ShiftRule::Fixed).unwrap();
    let f = SeriesFunction::from_generator(&sp, p);
    assert_eq!(f.total_bound(), q("2"));
    for k in [1usize, 2, 5, 20] {
        // float oracle: pi^2/6 minus the head
        let head: f64 = (1..=k).map(|n| 1.0 / (n * n) as f64).sum();
        let tail = std::f64::consts::PI.powi(2) / 6.0 - head;
        assert!(tail < f.tail_bound(k).approx_f64());
    }
    assert!(PSeries::new(&sp, chi("0", "1"), q("1"), 1, ShiftRule::Fixed).is_err());
}

#[test]
fn eval_examples() {
    let f = incompleteness();
    let v = f.eval_enclosure(&vec![q("3/2")], &q("1/1024")).unwrap();
    assert_eq!(v, EvalResult::Exact(q("1/4")));
    let e = from_elementary(&line(), chi("0", "1").scale(&q("5")));
    assert_eq!(
        e.eval_enclosure(&vec![q("0")], &q("1")).unwrap(),
        EvalResult::Exact(q("5"))
    );
    let g = Underbound::new(
        Arc::new(Geometric::new(&line(), chi("0", "1"), q("1"), q("1/2"), ShiftRule::Fixed).unwrap()),
        q("1"),
    );
    let u = SeriesFunction::from_generator(&line(), g);
    assert_eq!(u.eval_enclosure(&vec![q("0")], &q("1/8")).unwrap(), EvalResult::Unknown);
    let a = alternating();
    match a.eval_enclosure(&vec![q("1/2")], &q("1/1000")).unwrap() {
        EvalResult::Enclosure(e) => assert!(e.contains(&q("-1/3")) && e.width() <= q("1/500")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn add_and_scale() {
    let f = incompleteness();
    let z = from_elementary(&line(), SimpleFunction::zero(1));
    let s = series_add(&f, &z).unwrap();
    for k in [1usize, 4, 9, 20] {
        assert!(s.enclosure_at(2 * k).intersects(&f.enclosure_at(k)));
    }
    let zero = series_scale(&f, &q("0"));
    assert!(zero.has_zero_tail());
    assert_eq!(zero.integral_enclosure(&q("1")).unwrap(), IntegralEnclosure::point(q("0")));

    let sum = series_add(&f, &alternating()).unwrap();
    let e = sum.integral_enclosure(&q("1/4096")).unwrap();
    assert!(e.contains(&q("2/3")) && e.width() <= q("1/2048"));

    let plane = BoxSpace::<Rational>::new(2).unwrap();
    let other = SeriesFunction::zero(&plane);
    assert!(matches!(series_add(&f, &other), Err(Error::SpaceMismatch { .. })));
}

#[test]
fn interleave_bound_accounts_for_odd_prefixes() {
    let f = incompleteness();
    let g = alternating();
    let s = series_add(&f, &g).unwrap();
    for m in 0..12 {
        assert!(s.tail_consistent(m, m + 7), "m={m}");
    }
}

#[test]
fn abs_examples() {
    let sp = line();
    let a = series_abs(&from_elementary(&sp, chi("0", "1").scale(&q("-3"))));
    assert_eq!(a.integral_enclosure(&q("1/8")).unwrap(), IntegralEnclosure::point(q("3")));

    let alt = alternating();
    let eps = q("1/4096");
    let via_abs = series_abs(&alt).integral_enclosure(&eps).unwrap();
    let via_norm = alt.norm_enclosure(&eps).unwrap();
    assert!(via_abs.contains(&q("1/3")) && via_abs.intersects(&via_norm));
    assert!((via_abs.midpoint() - via_norm.midpoint()).abs() <= q("4") * eps.clone());

    let inc = incompleteness();
    let e = series_abs(&inc).integral_enclosure(&eps).unwrap();
    assert!(e.contains(&q("1")));
}

#[test]
fn lattice_examples() {
    let sp = line();
    let f = from_elementary(&sp, chi("0", "2"));
    let g = from_elementary(&sp, chi("1", "3").scale(&q("2")));
    let eps = q("1/16");
    let mx = series_max(&f, &g).unwrap();
    let mn = series_min(&f, &g).unwrap();
    // elementary oracle
    assert_eq!(chi("0", "2").max(&chi("1", "3").scale(&q("2"))).unwrap().integral(), q("5"));
    assert_eq!(mx.integral_enclosure(&eps).unwrap(), IntegralEnclosure::point(q("5")));
    assert_eq!(mn.integral_enclosure(&eps).unwrap(), IntegralEnclosure::point(q("1")));
    let inc = incompleteness();
    let idem = series_max(&inc, &inc).unwrap();
    for k in [3usize, 8, 30] {
        let a = idem.integral_enclosure(&Rational::two_pow_neg(k as u32)).unwrap();
        let b = inc.integral_enclosure(&Rational::two_pow_neg(k as u32)).unwrap();
        assert!(a.intersects(&b));
    }
}

#[test]
fn renormalize_examples() {
    let sp = line();
    let one = from_elementary(&sp, chi("0", "3"));
    let r = renormalize_eps(&one, &q("1/10")).unwrap();
    assert!(r.total_bound() <= q("3") + q("1/10"));

    let inc = incompleteness();
    let r = renormalize_eps(&inc, &q("1/4")).unwrap();
    assert!(r.total_bound() <= q("5/4"));
    assert!(r.integral_enclosure(&q("1/1024")).unwrap().contains(&q("1")));

    let alt = alternating();
    assert_eq!(alt.total_bound(), q("1"));
    let r = renormalize_eps(&alt, &q("1/8")).unwrap();
    let h = alt.norm_enclosure(&q("1/32")).unwrap().hi;
    assert!(r.total_bound() <= h + q("1/8"));
    assert!(r.total_bound() <= q("1/3") + q("1/8"), "{}", r.total_bound());
    assert!(r.integral_enclosure(&q("1/4096")).unwrap().contains(&q("-1/3")));
}

#[test]
fn flatten_examples() {
    let sp = line();
    let rows: Vec<_> = (1..=10)
        .map(|i| from_elementary(&sp, chi("0", "1").scale(&Rational::two_pow_neg(i))))
        .collect();
    let f = flatten_double_series(&sp, &rows, TailModel::zero()).unwrap();
    let target = q("1") - Rational::two_pow_neg(10);
    let e = f.integral_enclosure(&q("1/1048576")).unwrap();
    assert!(e.contains(&target), "{e}");

    let single = flatten_double_series(&sp, &[incompleteness()], TailModel::zero()).unwrap();
    let a = single.integral_enclosure(&q("1/4096")).unwrap();
    assert!(a.contains(&q("1")));

    let two = flatten_double_series(
        &sp,
        &[from_elementary(&sp, chi("0", "1")), from_elementary(&sp, chi("0", "2"))],
        TailModel::zero(),
    )
    .unwrap();
    assert_eq!(two.integral_enclosure(&q("1/8")).unwrap(), IntegralEnclosure::point(q("3")));
}

#[test]
fn flatten_with_outer_tail_and_series_rows() {
    let sp = line();
    // rows 1..=3 are geometric series, rows i > 3 are 2^-i chi_[0,1)
    let rows: Vec<_> = (0..3).map(|_| incompleteness()).collect();
    let outer = TailModel::new(
        Geometric::new(&sp, chi("0", "1"), q("1"), q("1/2"), ShiftRule::Fixed).unwrap(),
    );
    let f = flatten_double_series(&sp, &rows, outer).unwrap();
    // 3 + sum_{i>3} 2^-i = 3 + 1/8
    let e = f.integral_enclosure(&q("1/65536")).unwrap();
    assert!(e.contains(&q("25/8")), "{e}");
    for m in [0usize, 5, 17] {
        assert!(f.tail_consistent(m, m + 20));
    }
}

#[test]
fn null_examples() {
    let sp = line();
    let z = from_elementary(&sp, SimpleFunction::zero(1));
    let c = is_null_certified(&z, &q("1/1000")).unwrap();
    assert!(c.certified && c.exact);

    let f = from_elementary(&sp, chi("0", "1").scale(&q("3")));
    let cancel = series_add(&f, &series_neg(&f)).unwrap();
    for k in 1..12 {
        assert!(is_null_certified(&cancel, &Rational::two_pow_neg(k)).unwrap().certified);
    }
    let inc = incompleteness();
    let geo_cancel = series_add(&inc, &series_neg(&inc)).unwrap();
    for k in 1..20 {
        assert!(is_null_certified(&geo_cancel, &Rational::two_pow_neg(k)).unwrap().certified);
    }

    let c = is_null_certified(&inc, &q("1/2")).unwrap();
    assert!(!c.certified);
    assert!(c.lower >= q("1/2"));
}

#[test]
fn equal_ae_examples() {
    let sp = line();
    let inc = incompleteness();
    for k in [1u32, 5, 15] {
        assert!(equal_ae_certified(&inc, &inc, &Rational::two_pow_neg(k)).unwrap().certified);
    }
    let bumped = series_add(&inc, &from_elementary(&sp, chi("0", "1"))).unwrap();
    let c = equal_ae_certified(&inc, &bumped, &q("1/2")).unwrap();
    assert!(!c.certified && c.lower >= q("1/2"));

    // chi_[0,2) as one term and as chi_[0,1) + chi_[1,2)
    let one = from_elementary(&sp, chi("0", "2"));
    let split =
        SeriesFunction::new(sp.clone(), vec![chi("0", "1"), chi("1", "2")], TailModel::zero())
            .unwrap();
    assert!(equal_ae_certified(&one, &split, &q("1/1000")).unwrap().exact);
}

#[test]
fn null_domination_is_exact() {
    let sp = line();
    let f = chi("1", "1");
    let g = SimpleFunction::zero(1);
    let s = null_dominated(&sp, &f, &g).unwrap();
    assert!(is_null_certified(&s, &q("1/100")).unwrap().exact);
    assert!(null_dominated(&sp, &chi("0", "1"), &g).is_err());
}

#[test]
fn regroup_and_permute_preserve_integral() {
    let inc = incompleteness();
    let r = series_regroup(&inc, &[1, 3, 2]).unwrap();
    let p = series_permute_blocks(&inc, &[2, 0, 1]).unwrap();
    for k in 1..25 {
        let eps = Rational::two_pow_neg(k);
        let a = r.integral_enclosure(&eps).unwrap();
        let b = p.integral_enclosure(&eps).unwrap();
        assert!(a.contains(&q("1")) && b.contains(&q("1")));
        assert!(a.intersects(&b));
    }
    assert!(series_permute_blocks(&inc, &[0, 0]).is_err());
    assert!(series_regroup(&inc, &[2, 0]).is_err());
}

#[test]
fn shrinking_boxes_tail_is_exact_pointwise() {
    let sp = line();
    let s = ShrinkingBoxes::new(q("0"), q("1"), q("1/4"), vec![]).unwrap();
    let f = SeriesFunction::from_generator(&sp, s);
    let e = f.integral_enclosure(&q("1/1000000")).unwrap();
    assert!(e.contains(&q("1/3")));
    assert_eq!(f.eval_enclosure(&vec![q("1/8")], &q("1/2")).unwrap(), EvalResult::Exact(q("1")));
    assert_eq!(f.eval_enclosure(&vec![q("1/2")], &q("1/2")).unwrap(), EvalResult::Exact(q("0")));
}

#[test]
fn clip_of_incompleteness_example() {
    let inc = incompleteness();
    let c = series_clip(&inc, &q("1/8")).unwrap();
    let e = c.integral_enclosure(&q("1/100000")).unwrap();
    assert!(e.contains(&q("1/2")), "{e}");
}

#[test]
fn monotone_chain_bound() {
    let sp = line();
    let seq: families::SeqFn<BoxSpace<Rational>> = Arc::new(|n: usize| {
        (1..=n).fold(SimpleFunction::zero(1), |acc, k| {
            let b = HyperBox::interval(Rational::from_int(k as i64 - 1), Rational::from_int(k as i64));
            acc.add(&SimpleFunction::constant_on(b, Rational::two_pow_neg(k as u32)))
                .unwrap()
        })
    });
    let chain = MonotoneChain::new("geometric_steps", seq, q("1"));
    let f = SeriesFunction::from_generator(&sp, chain);
    assert_eq!(f.tail_bound(3), q("1/8"));
    assert!(f.integral_enclosure(&q("1/1024")).unwrap().contains(&q("1")));
}
