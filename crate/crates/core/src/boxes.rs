//! Semi-open boxes `[a_1,b_1) x ... x [a_N,b_N)` and finite disjoint unions of them.
//!
//! All geometry is exact. A box with `a_k >= b_k` on some axis is empty and is
//! stored as the canonical empty value of its dimension, so two empty boxes of
//! the same dimension always compare equal.
//!
//! [`BoxSet`] keeps its members in a canonical form produced by [`sweep`]:
//! the set is cut along axis 0 into maximal slabs on which the
//! (N-1)-dimensional cross-section is constant, and each cross-section is
//! canonicalized recursively. Equal sets therefore have equal representations.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A semi-open axis-aligned box. `sides[k] = (a_k, b_k)` with `a_k < b_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HyperBox<S> {
    dim: usize,
    sides: Option<Vec<(S, S)>>,
}

impl<S: Scalar> HyperBox<S> {
    pub fn new(lower: Vec<S>, upper: Vec<S>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        Self::from_sides(lower.into_iter().zip(upper).collect())
    }

    pub fn from_sides(sides: Vec<(S, S)>) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let dim = sides.len();
        if sides.iter().any(|(a, b)| a >= b) {
            return Ok(Self::empty(dim));
        }
        Ok(HyperBox {
            dim,
            sides: Some(sides),
        })
    }

    /// One-dimensional `[a, b)`.
    pub fn interval(a: S, b: S) -> Self {
        Self::from_sides(vec![(a, b)]).expect("one side")
    }

    pub fn empty(dim: usize) -> Self {
        HyperBox { dim, sides: None }
    }

    /// Sides are known to be nonempty and of the right count.
    pub(crate) fn from_sides_unchecked(sides: Vec<(S, S)>) -> Self {
        debug_assert!(sides.iter().all(|(a, b)| a < b));
        HyperBox {
            dim: sides.len(),
            sides: Some(sides),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.sides.is_none()
    }

    pub fn sides(&self) -> Option<&[(S, S)]> {
        self.sides.as_deref()
    }

    pub fn lower(&self) -> Option<Vec<S>> {
        self.sides
            .as_ref()
            .map(|s| s.iter().map(|(a, _)| a.clone()).collect())
    }

    pub fn upper(&self) -> Option<Vec<S>> {
        self.sides
            .as_ref()
            .map(|s| s.iter().map(|(_, b)| b.clone()).collect())
    }

    /// Product of side lengths; zero for the empty box.
    pub fn measure(&self) -> S {
        match &self.sides {
            None => S::zero(),
            Some(sides) => sides
                .iter()
                .fold(S::one(), |acc, (a, b)| acc * (b.clone() - a.clone())),
        }
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim != other {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other,
            });
        }
        Ok(())
    }

    /// Semi-open membership `a_k <= x_k < b_k`.
    pub fn contains(&self, x: &[S]) -> Result<bool> {
        self.check_dim(x.len())?;
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &[S]) -> bool {
        match &self.sides {
            None => false,
            Some(sides) => sides.iter().zip(x).all(|((a, b), v)| a <= v && v < b),
        }
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        let (Some(a), Some(b)) = (&self.sides, &other.sides) else {
            return Ok(Self::empty(self.dim));
        };
        let sides = a
            .iter()
            .zip(b)
            .map(|((a0, a1), (b0, b1))| (S::max_of(a0, b0), S::min_of(a1, b1)))
            .collect();
        Self::from_sides(sides)
    }

    pub fn is_subset_of(&self, other: &Self) -> Result<bool> {
        Ok(self.intersect(other)? == *self)
    }

    /// `self \ other` by slab peeling: for each axis in order, the parts of the
    /// current core below and above the intersection are split off. At most
    /// `2N` pieces, pairwise disjoint, each disjoint from `other`.
    pub fn slab_difference(&self, other: &Self) -> Result<Vec<Self>> {
        let inter = self.intersect(other)?;
        let Some(sides) = &self.sides else {
            return Ok(Vec::new());
        };
        let Some(cut) = inter.sides else {
            return Ok(vec![self.clone()]);
        };
        let mut core = sides.clone();
        let mut pieces = Vec::new();
        for k in 0..self.dim {
            let (lo, hi) = core[k].clone();
            let (ilo, ihi) = cut[k].clone();
            if lo < ilo {
                let mut piece = core.clone();
                piece[k] = (lo, ilo.clone());
                pieces.push(Self::from_sides_unchecked(piece));
            }
            if ihi < hi {
                let mut piece = core.clone();
                piece[k] = (ihi.clone(), hi);
                pieces.push(Self::from_sides_unchecked(piece));
            }
            core[k] = (ilo, ihi);
        }
        Ok(pieces)
    }

    /// Shifts the box by `delta` along `axis`.
    pub fn translate(&self, axis: usize, delta: &S) -> Self {
        match &self.sides {
            None => self.clone(),
            Some(sides) => {
                let mut s = sides.clone();
                s[axis].0 = s[axis].0.clone() + delta.clone();
                s[axis].1 = s[axis].1.clone() + delta.clone();
                Self::from_sides_unchecked(s)
            }
        }
    }
}

impl<S: Scalar> PartialOrd for HyperBox<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Empty boxes first, then lexicographic by lower corner, then by upper corner.
impl<S: Scalar> Ord for HyperBox<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.sides, &other.sides) {
            (None, None) => self.dim.cmp(&other.dim),
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => {
                let lower = a.iter().map(|s| &s.0).cmp(b.iter().map(|s| &s.0));
                lower.then_with(|| a.iter().map(|s| &s.1).cmp(b.iter().map(|s| &s.1)))
            }
        }
    }
}

impl<S: Scalar> fmt::Display for HyperBox<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.sides {
            None => write!(f, "empty({})", self.dim),
            Some(sides) => {
                for (k, (a, b)) in sides.iter().enumerate() {
                    if k > 0 {
                        write!(f, " x ")?;
                    }
                    write!(f, "[{a},{b})")?;
                }
                Ok(())
            }
        }
    }
}

/// Canonical refinement of tagged boxes.
///
/// `items` are nonempty boxes given by their sides, each carrying a tag. The
/// cells of the sparse common grid are visited axis by axis; on each cell,
/// `value` receives the tags of all items covering it and decides the cell's
/// value (`None` drops the cell). Adjacent slabs with identical canonical
/// cross-sections are merged, so the output only depends on the pointwise
/// values and not on how the input was cut. Output is sorted by lower corner.
pub(crate) fn sweep<S, T, V>(
    dim: usize,
    items: &[(&[(S, S)], T)],
    value: &dyn Fn(&[&T]) -> Option<V>,
) -> Vec<(Vec<(S, S)>, V)>
where
    S: Scalar,
    V: Clone + PartialEq,
{
    let active: Vec<usize> = (0..items.len()).collect();
    sweep_axis(0, dim, items, &active, value)
}

fn sweep_axis<S, T, V>(
    axis: usize,
    dim: usize,
    items: &[(&[(S, S)], T)],
    active: &[usize],
    value: &dyn Fn(&[&T]) -> Option<V>,
) -> Vec<(Vec<(S, S)>, V)>
where
    S: Scalar,
    V: Clone + PartialEq,
{
    if axis == dim {
        let tags: Vec<&T> = active.iter().map(|&i| &items[i].1).collect();
        return value(&tags)
            .map(|v| vec![(Vec::new(), v)])
            .unwrap_or_default();
    }
    let mut cuts: Vec<&S> = active
        .iter()
        .flat_map(|&i| [&items[i].0[axis].0, &items[i].0[axis].1])
        .collect();
    cuts.sort();
    cuts.dedup();

    type Section<S, V> = Vec<(Vec<(S, S)>, V)>;
    let mut out = Vec::new();
    let mut run: Option<(S, S, Section<S, V>)> = None;
    let flush = |run: Option<(S, S, Section<S, V>)>, out: &mut Section<S, V>| {
        if let Some((start, end, section)) = run {
            for (rest, v) in section {
                let mut sides = Vec::with_capacity(rest.len() + 1);
                sides.push((start.clone(), end.clone()));
                sides.extend(rest);
                out.push((sides, v));
            }
        }
    };
    for w in cuts.windows(2) {
        let (c0, c1) = (w[0], w[1]);
        let covering: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&i| {
                let (lo, hi) = &items[i].0[axis];
                lo <= c0 && hi >= c1
            })
            .collect();
        let section = if covering.is_empty() {
            Vec::new()
        } else {
            sweep_axis(axis + 1, dim, items, &covering, value)
        };
        match &mut run {
            Some((_, end, current)) if !section.is_empty() && *current == section => {
                *end = c1.clone();
            }
            _ => {
                flush(run.take(), &mut out);
                if !section.is_empty() {
                    run = Some((c0.clone(), c1.clone(), section));
                }
            }
        }
    }
    flush(run, &mut out);
    out
}

/// A finite union of pairwise disjoint nonempty boxes, in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoxSet<S> {
    dim: usize,
    boxes: Vec<HyperBox<S>>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

impl<S: Scalar> BoxSet<S> {
    pub fn empty(dim: usize) -> Self {
        BoxSet {
            dim,
            boxes: Vec::new(),
        }
    }

    /// Union of arbitrary (possibly overlapping or empty) boxes.
    pub fn from_boxes<I: IntoIterator<Item = HyperBox<S>>>(dim: usize, boxes: I) -> Result<Self> {
        let boxes: Vec<HyperBox<S>> = boxes.into_iter().collect();
        for b in &boxes {
            if b.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: b.dim,
                });
            }
        }
        let items: Vec<(&[(S, S)], ())> = boxes
            .iter()
            .filter_map(|b| b.sides().map(|s| (s, ())))
            .collect();
        let cells = sweep(dim, &items, &|tags: &[&()]| (!tags.is_empty()).then_some(()));
        Ok(Self::from_cells(dim, cells))
    }

    fn from_cells(dim: usize, cells: Vec<(Vec<(S, S)>, ())>) -> Self {
        BoxSet {
            dim,
            boxes: cells
                .into_iter()
                .map(|(sides, ())| HyperBox::from_sides_unchecked(sides))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[HyperBox<S>] {
        &self.boxes
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn measure(&self) -> S {
        self.boxes
            .iter()
            .fold(S::zero(), |acc, b| acc + b.measure())
    }

    pub fn contains(&self, x: &[S]) -> Result<bool> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self.boxes.iter().any(|b| b.contains_unchecked(x)))
    }

    fn binary(&self, other: &Self, keep: impl Fn(bool, bool) -> bool) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let items: Vec<(&[(S, S)], Side)> = self
            .boxes
            .iter()
            .map(|b| (b.sides().expect("nonempty"), Side::Left))
            .chain(
                other
                    .boxes
                    .iter()
                    .map(|b| (b.sides().expect("nonempty"), Side::Right)),
            )
            .collect();
        let cells = sweep(self.dim, &items, &|tags: &[&Side]| {
            let l = tags.iter().any(|t| **t == Side::Left);
            let r = tags.iter().any(|t| **t == Side::Right);
            keep(l, r).then_some(())
        });
        Ok(Self::from_cells(self.dim, cells))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.binary(other, |l, r| l || r)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.binary(other, |l, r| l && r)
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.binary(other, |l, r| l && !r)
    }

    pub fn is_disjoint_from(&self, other: &Self) -> Result<bool> {
        Ok(self.intersection(other)?.is_empty())
    }
}

/// Lebesgue measure of a box.
pub fn measure<S: Scalar>(b: &HyperBox<S>) -> S {
    b.measure()
}

pub fn intersect<S: Scalar>(a: &HyperBox<S>, b: &HyperBox<S>) -> Result<HyperBox<S>> {
    a.intersect(b)
}

/// `a \ b` as a canonical [`BoxSet`], computed by slab peeling.
pub fn box_diff<S: Scalar>(a: &HyperBox<S>, b: &HyperBox<S>) -> Result<BoxSet<S>> {
    let pieces = a.slab_difference(b)?;
    BoxSet::from_boxes(a.dim(), pieces)
}

/// Checks that `parts` tile `whole` exactly: pairwise disjoint, contained in
/// `whole`, measures adding up, and no point of `whole` left uncovered.
/// Empty parts are ignored. Mismatched dimensions give `false`.
pub fn is_finite_partition<S: Scalar>(parts: &[HyperBox<S>], whole: &HyperBox<S>) -> bool {
    if parts.iter().any(|p| p.dim() != whole.dim()) {
        return false;
    }
    let parts: Vec<&HyperBox<S>> = parts.iter().filter(|p| !p.is_empty()).collect();
    for (i, p) in parts.iter().enumerate() {
        if !p.is_subset_of(whole).unwrap_or(false) {
            return false;
        }
        for q in &parts[i + 1..] {
            if !p.intersect(q).map(|b| b.is_empty()).unwrap_or(false) {
                return false;
            }
        }
    }
    let total = parts.iter().fold(S::zero(), |acc, p| acc + p.measure());
    if total != whole.measure() {
        return false;
    }
    let mut remaining = vec![whole.clone()];
    for p in &parts {
        remaining = remaining
            .iter()
            .flat_map(|r| r.slab_difference(p).unwrap_or_default())
            .collect();
    }
    remaining.is_empty()
}

/// Every cell of the product grid spanned by all endpoints of `boxes`, in
/// lexicographic order. Each nonempty input box is exactly the union of the
/// cells it contains.
pub fn common_grid<S: Scalar>(boxes: &[HyperBox<S>]) -> Result<Vec<HyperBox<S>>> {
    let nonempty: Vec<&[(S, S)]> = boxes.iter().filter_map(|b| b.sides()).collect();
    let Some(first) = boxes.first() else {
        return Ok(Vec::new());
    };
    let dim = first.dim();
    if let Some(bad) = boxes.iter().find(|b| b.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    if nonempty.is_empty() {
        return Ok(Vec::new());
    }
    let axes: Vec<Vec<(S, S)>> = (0..dim)
        .map(|k| {
            let mut cuts: Vec<S> = nonempty
                .iter()
                .flat_map(|s| [s[k].0.clone(), s[k].1.clone()])
                .collect();
            cuts.sort();
            cuts.dedup();
            cuts.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect()
        })
        .collect();
    let mut cells: Vec<Vec<(S, S)>> = vec![Vec::new()];
    for axis in &axes {
        cells = cells
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |side| {
                    let mut next = prefix.clone();
                    next.push(side.clone());
                    next
                })
            })
            .collect();
    }
    Ok(cells.into_iter().map(HyperBox::from_sides_unchecked).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(s: &str) -> Rational {
        Rational::parse_exact(s).unwrap()
    }

    fn bx(sides: &[(&str, &str)]) -> HyperBox<Rational> {
        HyperBox::from_sides(sides.iter().map(|(a, b)| (q(a), q(b))).collect()).unwrap()
    }

    #[test]
    fn measure_examples() {
        assert_eq!(bx(&[("0", "1"), ("0", "1")]).measure(), q("1"));
        assert_eq!(bx(&[("1/3", "1/2"), ("0", "2")]).measure(), q("1/3"));
        assert_eq!(bx(&[("2", "1")]).measure(), q("0"));
        assert!(bx(&[("2", "1")]).is_empty());
        assert_eq!(bx(&[("2", "1")]), bx(&[("5", "5")]));
    }

    #[test]
    fn intersect_examples() {
        assert_eq!(bx(&[("0", "2")]).intersect(&bx(&[("1", "3")])).unwrap(), bx(&[("1", "2")]));
        assert!(bx(&[("0", "1")]).intersect(&bx(&[("1", "2")])).unwrap().is_empty());
        let big = bx(&[("0", "4"), ("0", "4")]);
        let small = bx(&[("1", "2"), ("1", "2")]);
        assert_eq!(big.intersect(&small).unwrap(), small);
        assert!(matches!(
            big.intersect(&bx(&[("0", "1")])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn diff_examples() {
        let d = box_diff(&bx(&[("0", "2")]), &bx(&[("1", "2")])).unwrap();
        assert_eq!(d.boxes(), &[bx(&[("0", "1")])]);
        let a = bx(&[("0", "2"), ("0", "2")]);
        assert!(box_diff(&a, &a).unwrap().is_empty());
    }

    #[test]
    fn diff_of_square_corner_covers_and_adds_up() {
        let a = bx(&[("0", "2"), ("0", "2")]);
        let b = bx(&[("0", "1"), ("0", "1")]);
        let pieces = a.slab_difference(&b).unwrap();
        assert!(pieces.len() <= 4);
        let total = pieces.iter().fold(q("0"), |acc, p| acc + p.measure());
        assert_eq!(total, q("3"));
        for (i, p) in pieces.iter().enumerate() {
            assert!(p.intersect(&b).unwrap().is_empty());
            for r in &pieces[i + 1..] {
                assert!(p.intersect(r).unwrap().is_empty());
            }
        }
        // dense grid oracle: every point of a is in b or in exactly one piece
        for i in 0..16 {
            for j in 0..16 {
                let x = vec![Rational::ratio(i, 8), Rational::ratio(j, 8)];
                let hits = pieces.iter().filter(|p| p.contains(&x).unwrap()).count();
                let in_b = b.contains(&x).unwrap();
                assert_eq!(hits + usize::from(in_b), 1, "point {x:?}");
            }
        }
        assert_eq!(box_diff(&a, &b).unwrap().measure(), q("3"));
    }

    #[test]
    fn partition_examples() {
        let unit = bx(&[("0", "1")]);
        assert!(is_finite_partition(&[bx(&[("0", "1/2")]), bx(&[("1/2", "1")])], &unit));
        assert!(!is_finite_partition(&[bx(&[("0", "1/2")]), bx(&[("1/4", "1")])], &unit));
        let gappy = [bx(&[("0", "1/2")]), bx(&[("1/2", "3/4")]), bx(&[("3/4", "7/8")])];
        // geometric partial sums: 1/2 + 1/4 + 1/8 = 1 - 1/8
        let partial: Rational = (1..=3).map(|k| Rational::two_pow_neg(k)).sum();
        assert_eq!(partial, q("7/8"));
        assert!(!is_finite_partition(&gappy, &unit));
    }

    #[test]
    fn grid_examples() {
        let cells = common_grid(&[bx(&[("0", "2")]), bx(&[("1", "3")])]).unwrap();
        assert_eq!(cells, vec![bx(&[("0", "1")]), bx(&[("1", "2")]), bx(&[("2", "3")])]);
        let single = bx(&[("0", "1"), ("2", "5")]);
        assert_eq!(common_grid(std::slice::from_ref(&single)).unwrap(), vec![single]);
    }

    #[test]
    fn grid_cells_rebuild_overlapping_inputs() {
        let a = bx(&[("0", "2"), ("0", "2")]);
        let b = bx(&[("1", "3"), ("1/2", "3")]);
        let cells = common_grid(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(cells.len(), 9);
        for input in [&a, &b] {
            let inside: Vec<_> = cells
                .iter()
                .filter(|c| c.is_subset_of(input).unwrap())
                .collect();
            let m = inside.iter().fold(q("0"), |acc, c| acc + c.measure());
            assert_eq!(m, input.measure());
            for i in 0..14 {
                for j in 0..14 {
                    let x = vec![Rational::ratio(i, 4), Rational::ratio(j, 4)];
                    let covered = inside.iter().any(|c| c.contains(&x).unwrap());
                    assert_eq!(covered, input.contains(&x).unwrap());
                }
            }
        }
    }

    #[test]
    fn boxset_is_canonical() {
        let split = BoxSet::from_boxes(1, [bx(&[("0", "1")]), bx(&[("1", "2")])]).unwrap();
        let whole = BoxSet::from_boxes(1, [bx(&[("0", "2")])]).unwrap();
        assert_eq!(split, whole);
        let a = BoxSet::from_boxes(
            2,
            [bx(&[("0", "1"), ("0", "2")]), bx(&[("1", "2"), ("0", "2")])],
        )
        .unwrap();
        let b = BoxSet::from_boxes(
            2,
            [bx(&[("0", "2"), ("0", "1")]), bx(&[("0", "2"), ("1", "2")])],
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1);
    }

    #[test]
    fn boxset_algebra() {
        let u = BoxSet::from_boxes(1, [bx(&[("0", "2")])]).unwrap();
        let v = BoxSet::from_boxes(1, [bx(&[("1", "3")])]).unwrap();
        assert_eq!(u.difference(&v).unwrap().boxes(), &[bx(&[("0", "1")])]);
        assert_eq!(u.union(&v).unwrap().measure(), q("3"));
        assert_eq!(u.intersection(&v).unwrap().measure(), q("1"));
        assert!(!u.is_disjoint_from(&v).unwrap());
    }
}
