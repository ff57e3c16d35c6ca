use num_traits::{One, Zero};
use proptest::prelude::*;

use daniell::completion::families::{Geometric, ShiftRule};
use daniell::measure::dyadic_decomposition;
use daniell::{BoxSet, BoxSpace, HyperBox, Rational, Scalar, SeriesFunction, SimpleFunction};

type Q = Rational;

fn quarter(n: i64) -> Q {
    Q::ratio(n, 4)
}

fn hbox(dim: usize) -> impl Strategy<Value = HyperBox<Q>> {
    prop::collection::vec((-8i64..8, 1i64..8), dim).prop_map(|sides| {
        HyperBox::from_sides(sides.into_iter().map(|(a, w)| (quarter(a), quarter(a + w))).collect()).unwrap()
    })
}

/// Raw terms, possibly overlapping, as `(box, coefficient)`.
fn raw_terms(dim: usize) -> impl Strategy<Value = Vec<(HyperBox<Q>, Q)>> {
    prop::collection::vec((hbox(dim), -6i64..7), 0..5)
        .prop_map(|v| v.into_iter().map(|(b, c)| (b, Q::ratio(c, 2))).collect())
}

fn simple(dim: usize) -> impl Strategy<Value = SimpleFunction<Q>> {
    raw_terms(dim).prop_map(move |raw| SimpleFunction::canonicalize(dim, raw).unwrap())
}

fn point(dim: usize) -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec(-20i64..20, dim).prop_map(|v| v.into_iter().map(|n| Q::ratio(n, 8)).collect())
}

fn inside(b: &HyperBox<Q>, x: &[Q]) -> bool {
    b.sides().unwrap().iter().zip(x).all(|((lo, hi), t)| lo <= t && t < hi)
}

fn set(dim: usize) -> impl Strategy<Value = BoxSet<Q>> {
    prop::collection::vec(hbox(dim), 0..4).prop_map(move |bs| BoxSet::from_boxes(dim, bs).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_evaluates_like_raw_sum(raw in raw_terms(2), x in point(2)) {
        let f = SimpleFunction::canonicalize(2, raw.clone()).unwrap();
        let direct = raw.iter().filter(|(b, _)| inside(b, &x)).fold(Q::zero(), |a, (_, c)| a + c.clone());
        prop_assert_eq!(f.evaluate(&x).unwrap(), direct);
        let integral = raw.iter().fold(Q::zero(), |a, (b, c)| a + b.measure() * c.clone());
        prop_assert_eq!(f.integral(), integral);
    }

    #[test]
    fn set_measure_is_modular(u in set(2), v in set(2)) {
        let (join, meet) = (u.union(&v).unwrap(), u.intersection(&v).unwrap());
        prop_assert_eq!(join.measure() + meet.measure(), u.measure() + v.measure());
        let d = u.difference(&v).unwrap();
        prop_assert!(d.is_disjoint_from(&v).unwrap());
        prop_assert_eq!(d.measure() + meet.measure(), u.measure());
    }

    #[test]
    fn lattice_laws(f in simple(2), g in simple(2), h in simple(2)) {
        prop_assert_eq!(f.max(&g).unwrap(), g.max(&f).unwrap());
        prop_assert_eq!(f.max(&g).unwrap().max(&h).unwrap(), f.max(&g.max(&h).unwrap()).unwrap());
        prop_assert_eq!(f.min(&f.max(&g).unwrap()).unwrap(), f.clone());
        prop_assert_eq!(f.absolute(), f.max(&f.neg()).unwrap());
        let (lo, hi) = (f.min(&g).unwrap(), f.max(&g).unwrap());
        prop_assert!(lo.le(&f).unwrap() && f.le(&hi).unwrap());
        prop_assert!(lo.integral() <= hi.integral());
    }

    #[test]
    fn exceeds_witness_is_genuine(f in simple(1), g in simple(1)) {
        match f.exceeds_at(&g).unwrap() {
            None => prop_assert!(f.le(&g).unwrap()),
            Some((b, by)) => {
                prop_assert!(by > Q::zero());
                let x: Vec<Q> = b.sides().unwrap().iter().map(|(lo, _)| lo.clone()).collect();
                prop_assert_eq!(f.evaluate(&x).unwrap() - g.evaluate(&x).unwrap(), by);
            }
        }
    }

    #[test]
    fn translation_preserves_integral(f in simple(2), dx in -8i64..8) {
        let t = f.translate(0, &quarter(dx));
        prop_assert_eq!(t.integral(), f.integral());
        prop_assert_eq!(t.abs_integral(), f.abs_integral());
    }

    #[test]
    fn geometric_tail_is_consistent_and_nested(
        base in simple(1).prop_filter("nonzero", |f| !f.is_zero()),
        num in -3i64..4,
        den in 4i64..7,
        shift in any::<bool>(),
        m in 0usize..8,
    ) {
        let sp = BoxSpace::<Q>::new(1).unwrap();
        let r = Q::ratio(num, den);
        let rule = if shift { ShiftRule::UnitShift } else { ShiftRule::Fixed };
        let f = SeriesFunction::from_generator(&sp, Geometric::new(&sp, base.clone(), Q::one(), r.clone(), rule).unwrap());
        // closed form: sum_{n>=1} r^n * int base
        let exact = base.integral() * r.clone() / (Q::one() - r);
        let outer = f.enclosure_at(m);
        for k in m..m + 10 {
            prop_assert!(f.tail_consistent(m, k));
            let e = f.enclosure_at(k);
            prop_assert!(e.contains(&exact));
            prop_assert!(outer.lo <= e.lo && e.hi <= outer.hi);
        }
    }

    #[test]
    fn dyadic_chain_is_monotone(f in simple(2).prop_map(|f| f.absolute()), n in 1u32..8) {
        let a = dyadic_decomposition(&f, n).unwrap();
        let b = dyadic_decomposition(&f, n + 1).unwrap();
        prop_assert!(a.le(&b).unwrap() && b.le(&f).unwrap());
        let gap = f.integral() - a.integral();
        prop_assert!(gap <= f.sup_abs() * Q::two_pow_neg(n) * f.support().measure());
    }
}
