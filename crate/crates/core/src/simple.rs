//! Simple functions on `R^N`: finite linear combinations of box indicators,
//! together with their elementary integral `sum coeff_i * measure(box_i)`.
//!
//! Values are always kept in canonical form (pairwise disjoint nonempty boxes,
//! nonzero coefficients, produced by the same sweep as [`BoxSet`]), so
//! structural equality is pointwise equality and integrals do not depend on how
//! a function was written down.
//!
//! Refinement cost grows with the product of per-axis cut counts of the
//! operands. That is inherent to N-dimensional step functions; callers that
//! build long chains of operations should keep term counts modest.

use std::fmt;

use crate::boxes::{sweep, BoxSet, HyperBox};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SimpleFunction<S> {
    dim: usize,
    terms: Vec<(HyperBox<S>, S)>,
}

/// Pointwise binary operation for [`SimpleFunction::combine`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combine {
    Sum,
    Max,
    Min,
}

#[derive(Clone)]
enum Tagged<S> {
    Left(S),
    Right(S),
}

impl<S: Scalar> SimpleFunction<S> {
    pub fn zero(dim: usize) -> Self {
        SimpleFunction {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn indicator(b: HyperBox<S>) -> Self {
        Self::constant_on(b, S::one())
    }

    /// `c * chi_b`.
    pub fn constant_on(b: HyperBox<S>, c: S) -> Self {
        let dim = b.dim();
        if b.is_empty() || c.is_zero() {
            return Self::zero(dim);
        }
        SimpleFunction {
            dim,
            terms: vec![(b, c)],
        }
    }

    /// Canonical form of `sum coeff_i * chi_{box_i}` where the boxes may
    /// overlap or be empty.
    pub fn canonicalize<I>(dim: usize, raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (HyperBox<S>, S)>,
    {
        let raw: Vec<(HyperBox<S>, S)> = raw.into_iter().collect();
        for (b, _) in &raw {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: b.dim(),
                });
            }
        }
        let items: Vec<(&[(S, S)], S)> = raw
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .filter_map(|(b, c)| b.sides().map(|s| (s, c.clone())))
            .collect();
        let cells = sweep(dim, &items, &|tags: &[&S]| {
            let total = tags.iter().fold(S::zero(), |acc, c| acc + (*c).clone());
            (!total.is_zero()).then_some(total)
        });
        Ok(Self::from_cells(dim, cells))
    }

    fn from_cells(dim: usize, cells: Vec<(Vec<(S, S)>, S)>) -> Self {
        SimpleFunction {
            dim,
            terms: cells
                .into_iter()
                .map(|(sides, c)| (HyperBox::from_sides_unchecked(sides), c))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(HyperBox<S>, S)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[S]) -> Result<S> {
        self.check_dim(x.len())?;
        Ok(self.evaluate_unchecked(x))
    }

    pub(crate) fn evaluate_unchecked(&self, x: &[S]) -> S {
        self.terms
            .iter()
            .find(|(b, _)| b.contains_unchecked(x))
            .map(|(_, c)| c.clone())
            .unwrap_or_else(S::zero)
    }

    /// Pointwise `f op g` on the common refinement of both term lists.
    pub fn combine(&self, other: &Self, op: Combine) -> Result<Self> {
        self.check_dim(other.dim)?;
        let items: Vec<(&[(S, S)], Tagged<S>)> = self
            .terms
            .iter()
            .map(|(b, c)| (b.sides().expect("nonempty"), Tagged::Left(c.clone())))
            .chain(
                other
                    .terms
                    .iter()
                    .map(|(b, c)| (b.sides().expect("nonempty"), Tagged::Right(c.clone()))),
            )
            .collect();
        let cells = sweep(self.dim, &items, &|tags: &[&Tagged<S>]| {
            let (mut l, mut r) = (S::zero(), S::zero());
            for t in tags {
                match t {
                    Tagged::Left(c) => l = l + c.clone(),
                    Tagged::Right(c) => r = r + c.clone(),
                }
            }
            let v = match op {
                Combine::Sum => l + r,
                Combine::Max => S::max_of(&l, &r),
                Combine::Min => S::min_of(&l, &r),
            };
            (!v.is_zero()).then_some(v)
        });
        Ok(Self::from_cells(self.dim, cells))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, Combine::Sum)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(&other.neg(), Combine::Sum)
    }

    pub fn max(&self, other: &Self) -> Result<Self> {
        self.combine(other, Combine::Max)
    }

    pub fn min(&self, other: &Self) -> Result<Self> {
        self.combine(other, Combine::Min)
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    pub fn scale(&self, lambda: &S) -> Self {
        if lambda.is_zero() {
            return Self::zero(self.dim);
        }
        // a nonzero factor keeps distinct coefficients distinct, so the form stays canonical
        SimpleFunction {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(b, c)| (b.clone(), c.clone() * lambda.clone()))
                .collect(),
        }
    }

    fn map_coefficients(&self, f: impl Fn(&S) -> S) -> Self {
        Self::canonicalize(
            self.dim,
            self.terms.iter().map(|(b, c)| (b.clone(), f(c))),
        )
        .expect("same dimension")
    }

    pub fn absolute(&self) -> Self {
        self.map_coefficients(|c| c.abs())
    }

    /// `sum coeff_i * measure(box_i)`.
    pub fn integral(&self) -> S {
        self.terms
            .iter()
            .fold(S::zero(), |acc, (b, c)| acc + c.clone() * b.measure())
    }

    pub fn abs_integral(&self) -> S {
        self.terms
            .iter()
            .fold(S::zero(), |acc, (b, c)| acc + c.abs() * b.measure())
    }

    /// `max |f|`, zero for the zero function.
    pub fn sup_abs(&self) -> S {
        self.terms
            .iter()
            .map(|(_, c)| c.abs())
            .max()
            .unwrap_or_else(S::zero)
    }

    pub fn support(&self) -> BoxSet<S> {
        BoxSet::from_boxes(self.dim, self.terms.iter().map(|(b, _)| b.clone()))
            .expect("same dimension")
    }

    /// `f /\ c` for a positive constant `c`: coefficients above `c` are clipped.
    pub fn min_with_constant(&self, c: &S) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::NotPositive {
                what: "clipping constant",
                value: c.to_string(),
            });
        }
        Ok(self.map_coefficients(|v| S::min_of(v, c)))
    }

    /// Equality almost everywhere, i.e. `integral |f - g| = 0`.
    pub fn equal_ae(&self, other: &Self) -> Result<bool> {
        Ok(self.sub(other)?.abs_integral().is_zero())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.terms.iter().all(|(_, c)| !c.is_negative())
    }

    /// First canonical cell where `self > other`, if any.
    pub fn exceeds_at(&self, other: &Self) -> Result<Option<(HyperBox<S>, S)>> {
        let gap = other.sub(self)?;
        Ok(gap
            .terms
            .into_iter()
            .find(|(_, c)| c.is_negative())
            .map(|(b, c)| (b, -c)))
    }

    /// Pointwise `self <= other` everywhere.
    pub fn le(&self, other: &Self) -> Result<bool> {
        Ok(self.exceeds_at(other)?.is_none())
    }

    pub fn translate(&self, axis: usize, delta: &S) -> Self {
        SimpleFunction {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(b, c)| (b.translate(axis, delta), c.clone()))
                .collect(),
        }
    }

    /// Smallest box containing the support, `None` for the zero function.
    pub fn bounding_box(&self) -> Option<HyperBox<S>> {
        let mut iter = self.terms.iter().filter_map(|(b, _)| b.sides());
        let first = iter.next()?.to_vec();
        let sides = iter.fold(first, |acc, s| {
            acc.iter()
                .zip(s)
                .map(|((a0, a1), (b0, b1))| (S::min_of(a0, b0), S::max_of(a1, b1)))
                .collect()
        });
        Some(HyperBox::from_sides_unchecked(sides))
    }
}

impl<S: Scalar> fmt::Display for SimpleFunction<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (b, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*chi{b}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(s: &str) -> Rational {
        Rational::parse_exact(s).unwrap()
    }

    fn iv(a: &str, b: &str) -> HyperBox<Rational> {
        HyperBox::interval(q(a), q(b))
    }

    fn f1(terms: &[(&str, &str, &str)]) -> SimpleFunction<Rational> {
        SimpleFunction::canonicalize(1, terms.iter().map(|(c, a, b)| (iv(a, b), q(c)))).unwrap()
    }

    fn samples() -> Vec<Vec<Rational>> {
        (-4..16).map(|i| vec![Rational::ratio(i, 4)]).collect()
    }

    #[test]
    fn canonicalize_overlap_matches_pointwise_oracle() {
        let raw = [(iv("0", "2"), q("1")), (iv("0", "1"), q("1"))];
        let f = SimpleFunction::canonicalize(1, raw.clone()).unwrap();
        assert_eq!(f.terms(), &[(iv("0", "1"), q("2")), (iv("1", "2"), q("1"))]);
        for x in samples() {
            let oracle = raw
                .iter()
                .filter(|(b, _)| b.contains(&x).unwrap())
                .fold(q("0"), |acc, (_, c)| acc + c.clone());
            assert_eq!(f.evaluate(&x).unwrap(), oracle);
        }
        let again = SimpleFunction::canonicalize(1, f.terms().to_vec()).unwrap();
        assert_eq!(again, f);
        assert!(f1(&[("1", "0", "1"), ("-1", "0", "1")]).is_zero());
    }

    #[test]
    fn evaluate_semi_open() {
        let f = f1(&[("2", "0", "1")]);
        assert_eq!(f.evaluate(&[q("0")]).unwrap(), q("2"));
        assert_eq!(f.evaluate(&[q("1")]).unwrap(), q("0"));
        let sq = SimpleFunction::constant_on(
            HyperBox::new(vec![q("0"), q("0")], vec![q("1"), q("1")]).unwrap(),
            q("5"),
        );
        assert_eq!(sq.evaluate(&[q("1/2"), q("3/4")]).unwrap(), q("5"));
        assert!(sq.evaluate(&[q("1/2")]).is_err());
    }

    #[test]
    fn combine_examples() {
        let s = f1(&[("2", "0", "1")]).add(&f1(&[("3", "1", "2")])).unwrap();
        assert_eq!(s.terms().len(), 2);
        assert_eq!(s.integral(), q("5"));

        let f = f1(&[("1", "0", "2")]);
        let g = f1(&[("2", "1", "3")]);
        let m = f.max(&g).unwrap();
        assert_eq!(m.terms(), &[(iv("0", "1"), q("1")), (iv("1", "3"), q("2"))]);
        for x in samples() {
            let want = Rational::max_of(&f.evaluate(&x).unwrap(), &g.evaluate(&x).unwrap());
            assert_eq!(m.evaluate(&x).unwrap(), want);
        }

        let lo = f1(&[("1", "0", "1")]).min(&f1(&[("-1", "0", "1")])).unwrap();
        assert_eq!(lo, f1(&[("-1", "0", "1")]));
    }

    #[test]
    fn scale_and_absolute() {
        let f = f1(&[("2", "0", "1")]);
        assert!(f.scale(&q("0")).is_zero());
        assert_eq!(f.scale(&q("-1")), f1(&[("-2", "0", "1")]));
        assert_eq!(f1(&[("3", "0", "2")]).scale(&q("1/3")), f1(&[("1", "0", "2")]));
        assert_eq!(f1(&[("-2", "0", "1")]).absolute(), f);
        assert_eq!(f.absolute(), f);
        assert_eq!(
            f1(&[("1", "0", "1"), ("-3", "1", "2")]).absolute(),
            f1(&[("1", "0", "1"), ("3", "1", "2")])
        );
        // |-1| next to |1| merges into one cell
        assert_eq!(f1(&[("-1", "0", "1"), ("1", "1", "2")]).absolute(), f1(&[("1", "0", "2")]));
    }

    #[test]
    fn integral_examples() {
        assert_eq!(f1(&[("2", "0", "1"), ("3", "1", "2")]).integral(), q("5"));
        // linearity oracle: 1*2 + 1*1
        assert_eq!(f1(&[("1", "0", "2"), ("1", "0", "1")]).integral(), q("3"));
        assert_eq!(SimpleFunction::<Rational>::zero(2).integral(), q("0"));
    }

    #[test]
    fn sup_and_support() {
        assert_eq!(f1(&[("2", "0", "1"), ("-5", "1", "2")]).sup_abs(), q("5"));
        assert_eq!(SimpleFunction::<Rational>::zero(1).sup_abs(), q("0"));
        assert_eq!(f1(&[("1/3", "0", "9")]).sup_abs(), q("1/3"));
        let sup = f1(&[("2", "0", "1"), ("3", "1", "2")]).support();
        // canonical sets merge abutting cells: {[0,1), [1,2)} is stored as [0,2)
        assert_eq!(sup, BoxSet::from_boxes(1, [iv("0", "1"), iv("1", "2")]).unwrap());
        assert_eq!(sup.boxes(), &[iv("0", "2")]);
        assert!(SimpleFunction::<Rational>::zero(1).support().is_empty());
        let overl = f1(&[("1", "0", "2"), ("1", "1", "3")]).support();
        for x in samples() {
            let want = x[0] >= q("0") && x[0] < q("3");
            assert_eq!(overl.contains(&x).unwrap(), want);
        }
    }

    #[test]
    fn min_with_constant_examples() {
        let one = q("1");
        assert_eq!(f1(&[("3", "0", "1")]).min_with_constant(&one).unwrap(), f1(&[("1", "0", "1")]));
        assert_eq!(
            f1(&[("1/2", "0", "1")]).min_with_constant(&one).unwrap(),
            f1(&[("1/2", "0", "1")])
        );
        assert_eq!(
            f1(&[("-2", "0", "1")]).min_with_constant(&one).unwrap(),
            f1(&[("-2", "0", "1")])
        );
        assert!(f1(&[("3", "0", "1")]).min_with_constant(&q("0")).is_err());
    }

    #[test]
    fn equal_ae_examples() {
        let f = f1(&[("2", "0", "1")]);
        assert!(f.equal_ae(&f).unwrap());
        assert!(f.equal_ae(&f1(&[("2", "0", "1"), ("7", "3", "3")])).unwrap());
        assert!(!f.equal_ae(&f1(&[("2", "0", "1"), ("1", "1", "2")])).unwrap());
    }

    #[test]
    fn domination_witness() {
        let h = f1(&[("1", "0", "1")]);
        let f = f1(&[("1/2", "0", "2")]);
        let (cell, excess) = f.exceeds_at(&h).unwrap().unwrap();
        assert_eq!(cell, iv("1", "2"));
        assert_eq!(excess, q("1/2"));
        assert!(f1(&[("1/2", "0", "1")]).le(&h).unwrap());
    }
}
