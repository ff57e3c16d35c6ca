//! Elementary Daniell spaces.
//!
//! [`ElementarySpace`] is what the completion machinery needs from a Riesz
//! space of elementary functions with a positive linear integral. Three
//! instances ship: simple functions over boxes ([`BoxSpace`]), finitely
//! supported sequences under counting measure ([`CountingSpace`]) and
//! arbitrary functions on a finite weighted ground set ([`FiniteSpace`]).
//!
//! The vector-lattice laws, linearity and positivity are not assumed; they are
//! probed on random elements by [`axioms_probe`], together with the
//! continuity axiom on the curated decreasing families of each space.

use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boxes::HyperBox;
use crate::error::{Error, Result};
use crate::report::CheckReport;
use crate::scalar::Scalar;
use crate::simple::SimpleFunction;

/// Threshold used by [`axioms_probe`] for the continuity axiom.
pub const CONDITION_II_THRESHOLD: (i64, i64) = (1, 1_000_000);

/// Iteration cap for decreasing families without a closed form.
pub const PROBE_BUDGET: usize = 10_000;

pub trait ElementarySpace: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    type Scalar: Scalar;
    type Elem: Clone + fmt::Debug + PartialEq + Send + Sync + 'static;
    type Point: Clone + fmt::Debug + Send + Sync;

    /// Selector string, e.g. `boxes:2`, `counting`, `finite:1/2,1/2`.
    fn id(&self) -> String;

    /// Whether `e` is a well-formed element of this particular space.
    fn contains(&self, e: &Self::Elem) -> bool;

    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, a: &Self::Elem, lambda: &Self::Scalar) -> Self::Elem;
    fn max(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn min(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn abs(&self, a: &Self::Elem) -> Self::Elem;
    fn integral(&self, a: &Self::Elem) -> Self::Scalar;

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        self.scale(a, &-Self::Scalar::one())
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn abs_integral(&self, a: &Self::Elem) -> Self::Scalar {
        self.integral(&self.abs(a))
    }

    fn equal_ae(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.abs_integral(&self.sub(a, b)).is_zero()
    }

    fn evaluate(&self, a: &Self::Elem, x: &Self::Point) -> Self::Scalar;

    /// `a /\ c` for `c > 0`; closedness under this is Stone's condition.
    fn min_with_constant(&self, a: &Self::Elem, c: &Self::Scalar) -> Self::Elem;

    fn is_nonnegative(&self, a: &Self::Elem) -> bool;

    fn le(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.is_nonnegative(&self.sub(b, a))
    }

    fn sample_element(&self, rng: &mut dyn RngCore) -> Self::Elem;
    fn sample_point(&self, rng: &mut dyn RngCore) -> Self::Point;

    /// Curated non-increasing, pointwise-to-zero sequences for the continuity axiom.
    fn decreasing_families(&self) -> Vec<Arc<dyn DecreasingFamily<Self>>>;

    /// `a` moved by `steps` unit shifts, for spaces with a translation.
    /// Must preserve `abs_integral`.
    fn translate(&self, _a: &Self::Elem, _steps: usize) -> Option<Self::Elem> {
        None
    }

    /// Inclusive range of shift counts `s` for which `translate(a, s)` can be
    /// nonzero at `x`. `None` if no shift reaches `x`.
    fn shift_window(&self, _a: &Self::Elem, _x: &Self::Point) -> Option<(usize, usize)> {
        None
    }
}

/// A sequence `f_1 >= f_2 >= ... >= 0` converging pointwise to zero.
pub trait DecreasingFamily<Sp: ElementarySpace>: Send + Sync {
    fn name(&self) -> String;

    fn element(&self, space: &Sp, n: usize) -> Sp::Elem;

    /// Closed form of `integral f_n`, when the family has one.
    fn integral_closed_form(&self, _n: usize) -> Option<Sp::Scalar> {
        None
    }

    /// Smallest `n` whose closed-form integral is strictly below `threshold`.
    fn first_below(&self, _threshold: &Sp::Scalar) -> Option<usize> {
        None
    }
}

// ---------------------------------------------------------------------------
// boxes

/// Simple functions on `R^dim` with the Lebesgue integral.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxSpace<S> {
    dim: usize,
    _scalar: std::marker::PhantomData<fn() -> S>,
}

impl<S: Scalar> BoxSpace<S> {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(BoxSpace {
            dim,
            _scalar: std::marker::PhantomData,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `[0, 1)^dim` with the first side replaced by `[a, b)`.
    pub fn slab(&self, a: S, b: S) -> HyperBox<S> {
        let mut sides = vec![(S::zero(), S::one()); self.dim];
        sides[0] = (a, b);
        HyperBox::from_sides(sides).expect("dim >= 1")
    }

    pub fn unit_box(&self) -> HyperBox<S> {
        self.slab(S::zero(), S::one())
    }
}

fn small_rational<S: Scalar>(rng: &mut dyn RngCore, lo: i64, hi: i64, denom: i64) -> S {
    S::ratio(rng.gen_range(lo..hi), denom)
}

/// Random box with endpoints on the `1/4` grid inside `[-2, 3)^dim`.
pub fn sample_box<S: Scalar>(rng: &mut dyn RngCore, dim: usize) -> HyperBox<S> {
    let sides = (0..dim)
        .map(|_| {
            let a = rng.gen_range(-8..11);
            let len = rng.gen_range(1..6);
            (S::ratio(a, 4), S::ratio(a + len, 4))
        })
        .collect();
    HyperBox::from_sides(sides).expect("dim >= 1")
}

/// Random simple function with up to four (possibly overlapping) terms.
pub fn sample_simple<S: Scalar>(rng: &mut dyn RngCore, dim: usize) -> SimpleFunction<S> {
    let n = rng.gen_range(0..5);
    let raw: Vec<(HyperBox<S>, S)> = (0..n)
        .map(|_| {
            let d = rng.gen_range(1..4);
            let c = small_rational(rng, -6, 7, d);
            (sample_box(rng, dim), c)
        })
        .collect();
    SimpleFunction::canonicalize(dim, raw).expect("dims agree")
}

impl<S: Scalar> ElementarySpace for BoxSpace<S> {
    type Scalar = S;
    type Elem = SimpleFunction<S>;
    type Point = Vec<S>;

    fn id(&self) -> String {
        format!("boxes:{}", self.dim)
    }

    fn contains(&self, e: &Self::Elem) -> bool {
        e.dim() == self.dim
    }

    fn zero(&self) -> Self::Elem {
        SimpleFunction::zero(self.dim)
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.add(b).expect("elements of the same box space")
    }

    fn scale(&self, a: &Self::Elem, lambda: &S) -> Self::Elem {
        a.scale(lambda)
    }

    fn max(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.max(b).expect("elements of the same box space")
    }

    fn min(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.min(b).expect("elements of the same box space")
    }

    fn abs(&self, a: &Self::Elem) -> Self::Elem {
        a.absolute()
    }

    fn integral(&self, a: &Self::Elem) -> S {
        a.integral()
    }

    fn abs_integral(&self, a: &Self::Elem) -> S {
        a.abs_integral()
    }

    fn evaluate(&self, a: &Self::Elem, x: &Vec<S>) -> S {
        a.evaluate(x).expect("point of the same dimension")
    }

    fn min_with_constant(&self, a: &Self::Elem, c: &S) -> Self::Elem {
        a.min_with_constant(c).expect("positive clipping constant")
    }

    fn is_nonnegative(&self, a: &Self::Elem) -> bool {
        a.is_nonnegative()
    }

    fn sample_element(&self, rng: &mut dyn RngCore) -> Self::Elem {
        sample_simple(rng, self.dim)
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> Vec<S> {
        (0..self.dim)
            .map(|_| small_rational(rng, -20, 28, 8))
            .collect()
    }

    fn decreasing_families(&self) -> Vec<Arc<dyn DecreasingFamily<Self>>> {
        vec![
            Arc::new(ShrinkingBox),
            Arc::new(Flattening::<Self>::new(self.unit_box_fn()).with_space(self)),
        ]
    }

    fn translate(&self, a: &Self::Elem, steps: usize) -> Option<Self::Elem> {
        Some(a.translate(0, &S::from_int(steps as i64)))
    }

    fn shift_window(&self, a: &Self::Elem, x: &Vec<S>) -> Option<(usize, usize)> {
        let bb = a.bounding_box()?;
        let (lo, hi) = bb.sides()?[0].clone();
        // lo <= x0 - s < hi  <=>  x0 - hi < s <= x0 - lo
        let smax = (x[0].clone() - lo).floor_i64()?;
        let smin = ((x[0].clone() - hi).floor_i64()? + 1).max(0);
        (smax >= smin).then_some((smin as usize, smax as usize))
    }
}

impl<S: Scalar> BoxSpace<S> {
    fn unit_box_fn(&self) -> SimpleFunction<S> {
        SimpleFunction::indicator(self.unit_box())
    }
}

/// `f_n = chi_{[0, 2^-n) x [0,1)^(N-1)}`.
#[derive(Clone, Debug)]
pub struct ShrinkingBox;

impl<S: Scalar> DecreasingFamily<BoxSpace<S>> for ShrinkingBox {
    fn name(&self) -> String {
        "shrinking_box".into()
    }

    fn element(&self, space: &BoxSpace<S>, n: usize) -> SimpleFunction<S> {
        SimpleFunction::indicator(space.slab(S::zero(), S::two_pow_neg(n as u32)))
    }

    fn integral_closed_form(&self, n: usize) -> Option<S> {
        Some(S::two_pow_neg(n as u32))
    }

    fn first_below(&self, threshold: &S) -> Option<usize> {
        if !threshold.is_positive() {
            return None;
        }
        let mut n = 0usize;
        let mut v = S::one();
        while v >= *threshold {
            n += 1;
            v = v * S::half();
        }
        Some(n)
    }
}

/// `f_n = base / n` for a nonnegative base element.
pub struct Flattening<Sp: ElementarySpace> {
    base: Sp::Elem,
    base_integral: Option<Sp::Scalar>,
}

impl<Sp: ElementarySpace> Flattening<Sp> {
    pub fn new(base: Sp::Elem) -> Self {
        Flattening {
            base,
            base_integral: None,
        }
    }

    /// Binds the base integral so closed forms are available without a space.
    pub fn with_space(mut self, space: &Sp) -> Self {
        self.base_integral = Some(space.integral(&self.base));
        self
    }
}

impl<Sp: ElementarySpace> DecreasingFamily<Sp> for Flattening<Sp> {
    fn name(&self) -> String {
        "flattening".into()
    }

    fn element(&self, space: &Sp, n: usize) -> Sp::Elem {
        space.scale(&self.base, &Sp::Scalar::ratio(1, n as i64))
    }

    fn integral_closed_form(&self, n: usize) -> Option<Sp::Scalar> {
        self.base_integral
            .clone()
            .map(|c| c / Sp::Scalar::from_int(n as i64))
    }

    fn first_below(&self, threshold: &Sp::Scalar) -> Option<usize> {
        let c = self.base_integral.clone()?;
        if !threshold.is_positive() {
            return None;
        }
        // c / n < t  <=>  n > c / t
        let n = (c / threshold.clone()).floor_i64()? + 1;
        Some(n.max(1) as usize)
    }
}

// ---------------------------------------------------------------------------
// counting measure on N = {1, 2, ...}

/// A finitely supported function on the positive integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeqFunction<S> {
    values: BTreeMap<usize, S>,
}

impl<S: Scalar> SeqFunction<S> {
    pub fn zero() -> Self {
        SeqFunction {
            values: BTreeMap::new(),
        }
    }

    /// Zero values are dropped; index 0 is rejected.
    pub fn new<I: IntoIterator<Item = (usize, S)>>(pairs: I) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, v) in pairs {
            if i == 0 {
                return Err(Error::Unsupported("sequence indices start at 1".into()));
            }
            let slot = values.entry(i).or_insert_with(S::zero);
            *slot = slot.clone() + v;
        }
        values.retain(|_, v: &mut S| !v.is_zero());
        Ok(SeqFunction { values })
    }

    pub fn values(&self) -> &BTreeMap<usize, S> {
        &self.values
    }

    pub fn get(&self, i: usize) -> S {
        self.values.get(&i).cloned().unwrap_or_else(S::zero)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        let zero = S::zero();
        let keys: std::collections::BTreeSet<usize> =
            self.values.keys().chain(other.values.keys()).copied().collect();
        let values = keys
            .into_iter()
            .map(|k| {
                let a = self.values.get(&k).unwrap_or(&zero);
                let b = other.values.get(&k).unwrap_or(&zero);
                (k, f(a, b))
            })
            .filter(|(_, v)| !v.is_zero())
            .collect();
        SeqFunction { values }
    }

    fn map(&self, f: impl Fn(&S) -> S) -> Self {
        SeqFunction {
            values: self
                .values
                .iter()
                .map(|(k, v)| (*k, f(v)))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }
}

/// `sum_n f(n)`, exact.
pub fn seq_integral<S: Scalar>(f: &SeqFunction<S>) -> S {
    f.values.values().fold(S::zero(), |acc, v| acc + v.clone())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountingSpace<S> {
    _scalar: std::marker::PhantomData<fn() -> S>,
}

impl<S: Scalar> CountingSpace<S> {
    pub fn new() -> Self {
        CountingSpace {
            _scalar: std::marker::PhantomData,
        }
    }
}

impl<S: Scalar> Default for CountingSpace<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> ElementarySpace for CountingSpace<S> {
    type Scalar = S;
    type Elem = SeqFunction<S>;
    type Point = usize;

    fn id(&self) -> String {
        "counting".into()
    }

    fn contains(&self, _e: &Self::Elem) -> bool {
        true
    }

    fn zero(&self) -> Self::Elem {
        SeqFunction::zero()
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.zip_with(b, |x, y| x.clone() + y.clone())
    }

    fn scale(&self, a: &Self::Elem, lambda: &S) -> Self::Elem {
        a.map(|v| v.clone() * lambda.clone())
    }

    fn max(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.zip_with(b, S::max_of)
    }

    fn min(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.zip_with(b, S::min_of)
    }

    fn abs(&self, a: &Self::Elem) -> Self::Elem {
        a.map(|v| v.abs())
    }

    fn integral(&self, a: &Self::Elem) -> S {
        seq_integral(a)
    }

    fn evaluate(&self, a: &Self::Elem, x: &usize) -> S {
        a.get(*x)
    }

    fn min_with_constant(&self, a: &Self::Elem, c: &S) -> Self::Elem {
        a.map(|v| S::min_of(v, c))
    }

    fn is_nonnegative(&self, a: &Self::Elem) -> bool {
        a.values.values().all(|v| !v.is_negative())
    }

    fn sample_element(&self, rng: &mut dyn RngCore) -> Self::Elem {
        let n = rng.gen_range(0..5);
        let pairs: Vec<(usize, S)> = (0..n)
            .map(|_| {
                let d = rng.gen_range(1..4);
                (rng.gen_range(1..9), small_rational(rng, -6, 7, d))
            })
            .collect();
        SeqFunction::new(pairs).expect("indices >= 1")
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> usize {
        rng.gen_range(1..12)
    }

    fn decreasing_families(&self) -> Vec<Arc<dyn DecreasingFamily<Self>>> {
        let base = SeqFunction::new((1..=5).map(|i| (i, S::from_int(i as i64)))).expect("valid");
        vec![
            Arc::new(ZeroingIndices { base: base.clone() }),
            Arc::new(Flattening::new(base).with_space(self)),
        ]
    }

    fn translate(&self, a: &Self::Elem, steps: usize) -> Option<Self::Elem> {
        Some(SeqFunction {
            values: a.values.iter().map(|(k, v)| (k + steps, v.clone())).collect(),
        })
    }

    fn shift_window(&self, a: &Self::Elem, x: &usize) -> Option<(usize, usize)> {
        let lo = *a.values.keys().next()?;
        let hi = *a.values.keys().next_back()?;
        if *x < lo {
            return None;
        }
        Some((x.saturating_sub(hi), x - lo))
    }
}

/// `f_n` is a fixed finitely supported `f` with indices `1..=n` zeroed.
#[derive(Clone, Debug)]
pub struct ZeroingIndices<S> {
    pub base: SeqFunction<S>,
}

impl<S: Scalar> DecreasingFamily<CountingSpace<S>> for ZeroingIndices<S> {
    fn name(&self) -> String {
        "zeroing_indices".into()
    }

    fn element(&self, _space: &CountingSpace<S>, n: usize) -> SeqFunction<S> {
        SeqFunction {
            values: self
                .base
                .values
                .iter()
                .filter(|(k, _)| **k > n)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// finite weighted ground set

/// Ground set `{0, ..., m-1}` with nonnegative atom weights; every subset is measurable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSpace<S> {
    weights: Arc<Vec<S>>,
}

/// A function on a [`FiniteSpace`], one value per atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteSpaceFn<S> {
    pub values: Vec<S>,
}

impl<S: Scalar> FiniteSpace<S> {
    pub fn new(weights: Vec<S>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Unsupported("finite space needs at least one atom".into()));
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(Error::NotPositive {
                what: "atom weight",
                value: w.to_string(),
            });
        }
        Ok(FiniteSpace {
            weights: Arc::new(weights),
        })
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn atoms(&self) -> usize {
        self.weights.len()
    }

    pub fn function(&self, values: Vec<S>) -> Result<FiniteSpaceFn<S>> {
        if values.len() != self.atoms() {
            return Err(Error::DimensionMismatch {
                expected: self.atoms(),
                found: values.len(),
            });
        }
        Ok(FiniteSpaceFn { values })
    }

    fn zip_with(&self, a: &FiniteSpaceFn<S>, b: &FiniteSpaceFn<S>, f: impl Fn(&S, &S) -> S) -> FiniteSpaceFn<S> {
        FiniteSpaceFn {
            values: a.values.iter().zip(&b.values).map(|(x, y)| f(x, y)).collect(),
        }
    }

    fn map(&self, a: &FiniteSpaceFn<S>, f: impl Fn(&S) -> S) -> FiniteSpaceFn<S> {
        FiniteSpaceFn {
            values: a.values.iter().map(f).collect(),
        }
    }
}

/// `sum_j value_j * weight_j`, exact.
pub fn finite_space_integral<S: Scalar>(space: &FiniteSpace<S>, f: &FiniteSpaceFn<S>) -> S {
    f.values
        .iter()
        .zip(space.weights.iter())
        .fold(S::zero(), |acc, (v, w)| acc + v.clone() * w.clone())
}

impl<S: Scalar> ElementarySpace for FiniteSpace<S> {
    type Scalar = S;
    type Elem = FiniteSpaceFn<S>;
    type Point = usize;

    fn id(&self) -> String {
        let ws: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        format!("finite:{}", ws.join(","))
    }

    fn contains(&self, e: &Self::Elem) -> bool {
        e.values.len() == self.atoms()
    }

    fn zero(&self) -> Self::Elem {
        FiniteSpaceFn {
            values: vec![S::zero(); self.atoms()],
        }
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.zip_with(a, b, |x, y| x.clone() + y.clone())
    }

    fn scale(&self, a: &Self::Elem, lambda: &S) -> Self::Elem {
        self.map(a, |v| v.clone() * lambda.clone())
    }

    fn max(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.zip_with(a, b, S::max_of)
    }

    fn min(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.zip_with(a, b, S::min_of)
    }

    fn abs(&self, a: &Self::Elem) -> Self::Elem {
        self.map(a, |v| v.abs())
    }

    fn integral(&self, a: &Self::Elem) -> S {
        finite_space_integral(self, a)
    }

    fn evaluate(&self, a: &Self::Elem, x: &usize) -> S {
        a.values.get(*x).cloned().unwrap_or_else(S::zero)
    }

    fn min_with_constant(&self, a: &Self::Elem, c: &S) -> Self::Elem {
        self.map(a, |v| S::min_of(v, c))
    }

    fn is_nonnegative(&self, a: &Self::Elem) -> bool {
        a.values.iter().all(|v| !v.is_negative())
    }

    fn sample_element(&self, rng: &mut dyn RngCore) -> Self::Elem {
        FiniteSpaceFn {
            values: (0..self.atoms())
                .map(|_| {
                    let d = rng.gen_range(1..4);
                    small_rational(rng, -6, 7, d)
                })
                .collect(),
        }
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> usize {
        rng.gen_range(0..self.atoms())
    }

    fn decreasing_families(&self) -> Vec<Arc<dyn DecreasingFamily<Self>>> {
        let ones = FiniteSpaceFn {
            values: vec![S::one(); self.atoms()],
        };
        vec![Arc::new(Flattening::new(ones).with_space(self))]
    }
}

// ---------------------------------------------------------------------------
// probes

fn probe_scalar<S: Scalar>(rng: &mut dyn RngCore) -> S {
    let d = rng.gen_range(1..5);
    small_rational(rng, -8, 9, d)
}

/// First violated law for the triple `(a, b, c)` and scalars `l`, `m`.
fn first_law_violation<Sp: ElementarySpace>(
    space: &Sp,
    a: &Sp::Elem,
    b: &Sp::Elem,
    c: &Sp::Elem,
    l: &Sp::Scalar,
    m: &Sp::Scalar,
) -> Option<String> {
    let s = space;
    let half = Sp::Scalar::half();
    let checks: [(&str, bool); 16] = [
        ("a+b = b+a", s.add(a, b) == s.add(b, a)),
        ("(a+b)+c = a+(b+c)", s.add(&s.add(a, b), c) == s.add(a, &s.add(b, c))),
        ("a+0 = a", s.add(a, &s.zero()) == *a),
        ("a-a = 0", s.sub(a, a) == s.zero()),
        (
            "l(a+b) = la+lb",
            s.scale(&s.add(a, b), l) == s.add(&s.scale(a, l), &s.scale(b, l)),
        ),
        (
            "(l+m)a = la+ma",
            s.scale(a, &(l.clone() + m.clone())) == s.add(&s.scale(a, l), &s.scale(a, m)),
        ),
        (
            "int(a+b) = int a + int b",
            s.integral(&s.add(a, b)) == s.integral(a) + s.integral(b),
        ),
        (
            "int(la) = l int a",
            s.integral(&s.scale(a, l)) == l.clone() * s.integral(a),
        ),
        (
            "a v 0 >= 0 and int(a v 0) >= 0",
            {
                let p = s.max(a, &s.zero());
                s.is_nonnegative(&p) && !s.integral(&p).is_negative()
            },
        ),
        ("int|a| = abs_integral(a)", s.integral(&s.abs(a)) == s.abs_integral(a)),
        (
            "|int a| <= int|a|",
            s.integral(a).abs() <= s.abs_integral(a),
        ),
        (
            "a v b = (a+b+|a-b|)/2",
            s.max(a, b) == s.scale(&s.add(&s.add(a, b), &s.abs(&s.sub(a, b))), &half),
        ),
        (
            "a ^ b = (a+b-|a-b|)/2",
            s.min(a, b) == s.scale(&s.sub(&s.add(a, b), &s.abs(&s.sub(a, b))), &half),
        ),
        (
            "a ^ b + a v b = a + b",
            s.add(&s.min(a, b), &s.max(a, b)) == s.add(a, b),
        ),
        ("a <= a v b", s.le(a, &s.max(a, b))),
        ("|a| = a v -a", s.abs(a) == s.max(a, &s.neg(a))),
    ];
    checks
        .iter()
        .find(|(_, ok)| !ok)
        .map(|(law, _)| format!("{law} violated for a={a:?}, b={b:?}, l={l}, m={m}"))
}

/// Randomized check of the vector-lattice laws, linearity and positivity,
/// plus the continuity axiom on the space's curated decreasing families.
///
/// Deterministic in `seed`. A family that does not get below the threshold
/// within the budget makes the report inconclusive, not failed.
pub fn axioms_probe<Sp: ElementarySpace>(space: &Sp, trials: usize, seed: u64) -> CheckReport {
    let (n, d) = CONDITION_II_THRESHOLD;
    axioms_probe_with(space, trials, seed, &Sp::Scalar::ratio(n, d), PROBE_BUDGET)
}

pub fn axioms_probe_with<Sp: ElementarySpace>(
    space: &Sp,
    trials: usize,
    seed: u64,
    threshold: &Sp::Scalar,
    budget: usize,
) -> CheckReport {
    let mut report = CheckReport::new(space.id(), "axioms", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let a = space.sample_element(&mut rng);
        let b = space.sample_element(&mut rng);
        let c = space.sample_element(&mut rng);
        let l: Sp::Scalar = probe_scalar(&mut rng);
        let m: Sp::Scalar = probe_scalar(&mut rng);
        report.iterations += 1;
        if let Some(w) = first_law_violation(space, &a, &b, &c, &l, &m) {
            report.fail(format!("trial {t}: {w}"));
            return report;
        }
    }
    report.bound("trials", trials);
    for family in space.decreasing_families() {
        probe_decreasing(space, family.as_ref(), threshold, budget, &mut report);
    }
    report
}

fn probe_decreasing<Sp: ElementarySpace>(
    space: &Sp,
    family: &dyn DecreasingFamily<Sp>,
    threshold: &Sp::Scalar,
    budget: usize,
    report: &mut CheckReport,
) {
    let name = family.name();
    // exact monotonicity on an initial stretch, then either the closed form or iteration
    let stretch = match family.first_below(threshold) {
        Some(n) => n.min(64),
        None => budget,
    };
    let mut prev: Option<Sp::Scalar> = None;
    for n in 1..=stretch {
        let v = space.integral(&family.element(space, n));
        if let Some(p) = &prev {
            if v > *p {
                report.fail(format!("{name}: integral rose at n={n}: {v} > {p}"));
                return;
            }
        }
        if let Some(cf) = family.integral_closed_form(n) {
            if cf != v {
                report.fail(format!("{name}: closed form {cf} != exact {v} at n={n}"));
                return;
            }
        }
        if v < *threshold && family.first_below(threshold).is_none() {
            report.bound(format!("{name}.n"), n);
            report.bound(format!("{name}.integral"), &v);
            return;
        }
        prev = Some(v);
    }
    match family.first_below(threshold) {
        Some(n) => {
            let v = space.integral(&family.element(space, n));
            let before = (n > 1).then(|| space.integral(&family.element(space, n - 1)));
            let closed = family.integral_closed_form(n);
            if v >= *threshold || closed.as_ref() != Some(&v) {
                report.fail(format!("{name}: closed form claims n={n} but integral is {v}"));
            } else if before.as_ref().is_some_and(|b| b < threshold) {
                report.fail(format!("{name}: n={n} is not the first index below threshold"));
            } else {
                report.bound(format!("{name}.n"), n);
                report.bound(format!("{name}.integral"), &v);
            }
        }
        None => {
            let last = prev.map(|p| p.to_string()).unwrap_or_default();
            report.bound(format!("{name}.best"), &last);
            report.inconclusive(format!("{name}: budget {budget} exhausted at integral {last}"));
        }
    }
}
