//! Series-level constructions. Each derives its tail bound from its inputs.

use num_traits::{One, Signed, Zero};
use std::sync::Mutex;

use super::{first_index, require_positive, SeriesFunction, TailModel, TermGenerator};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::ElementarySpace;

type Sc<Sp> = <Sp as ElementarySpace>::Scalar;

/// Memoized partial sums `s_0 = 0, s_1, s_2, ...` of a series.
struct PartialSums<Sp: ElementarySpace> {
    f: SeriesFunction<Sp>,
    sums: Mutex<Vec<Sp::Elem>>,
}

impl<Sp: ElementarySpace> PartialSums<Sp> {
    fn new(f: SeriesFunction<Sp>) -> Self {
        let zero = f.space().zero();
        PartialSums {
            f,
            sums: Mutex::new(vec![zero]),
        }
    }

    fn get(&self, j: usize) -> Sp::Elem {
        let mut sums = self.sums.lock().expect("partial sums lock");
        while sums.len() <= j {
            let n = sums.len();
            let next = self.f.space().add(&sums[n - 1], &self.f.term(n));
            sums.push(next);
        }
        sums[j].clone()
    }
}

// ---------------------------------------------------------------------------
// sum and scaling

/// `f_1, g_1, f_2, g_2, ...`.
struct Interleave<Sp: ElementarySpace> {
    f: SeriesFunction<Sp>,
    g: SeriesFunction<Sp>,
}

impl<Sp: ElementarySpace> TermGenerator<Sp> for Interleave<Sp> {
    fn term(&self, _space: &Sp, n: usize) -> Sp::Elem {
        if n % 2 == 1 {
            self.f.term(n.div_ceil(2))
        } else {
            self.g.term(n / 2)
        }
    }

    // the first k terms hold ceil(k/2) terms of f and floor(k/2) of g
    fn tail_bound(&self, _space: &Sp, k: usize) -> Sc<Sp> {
        self.f.tail_bound(k.div_ceil(2)) + self.g.tail_bound(k / 2)
    }

    fn pointwise_tail(&self, _space: &Sp, k: usize, x: &Sp::Point) -> Option<Sc<Sp>> {
        Some(self.f.pointwise_tail(k.div_ceil(2), x)? + self.g.pointwise_tail(k / 2, x)?)
    }

    fn diverges_at(&self, _space: &Sp, x: &Sp::Point) -> bool {
        self.f.diverges_at(x) || self.g.diverges_at(x)
    }

    fn describe(&self) -> String {
        format!("interleave({}, {})", self.f.tail().describe(), self.g.tail().describe())
    }
}

/// `F + G` as the interleaved series `f_1 + g_1 + f_2 + g_2 + ...`.
pub fn series_add<Sp: ElementarySpace>(
    f: &SeriesFunction<Sp>,
    g: &SeriesFunction<Sp>,
) -> Result<SeriesFunction<Sp>> {
    f.check_same_space(g)?;
    let space = f.space();
    if f.has_zero_tail() && g.has_zero_tail() {
        let len = f.prefix_len().max(g.prefix_len());
        let prefix = (1..=len)
            .flat_map(|j| [f.term(j), g.term(j)])
            .collect();
        return Ok(SeriesFunction::from_parts(space, prefix, TailModel::zero()));
    }
    Ok(SeriesFunction::from_generator(
        space,
        Interleave {
            f: f.clone(),
            g: g.clone(),
        },
    ))
}

struct Scaled<Sp: ElementarySpace> {
    f: SeriesFunction<Sp>,
    lambda: Sc<Sp>,
}

impl<Sp: ElementarySpace> TermGenerator<Sp> for Scaled<Sp> {
    fn term(&self, space: &Sp, n: usize) -> Sp::Elem {
        space.scale(&self.f.term(n), &self.lambda)
    }

    fn tail_bound(&self, _space: &Sp, k: usize) -> Sc<Sp> {
        self.lambda.abs() * self.f.tail_bound(k)
    }

    fn pointwise_tail(&self, _space: &Sp, k: usize, x: &Sp::Point) -> Option<Sc<Sp>> {
        Some(self.lambda.abs() * self.f.pointwise_tail(k, x)?)
    }

    fn diverges_at(&self, _space: &Sp, x: &Sp::Point) -> bool {
        self.f.diverges_at(x)
    }

    fn describe(&self) -> String {
        format!("scaled({}, {})", self.lambda, self.f.tail().describe())
    }
}

/// `lambda F` termwise; `lambda = 0` gives the zero-tail zero function.
pub fn series_scale<Sp: ElementarySpace>(
    f: &SeriesFunction<Sp>,
    lambda: &Sc<Sp>,
) -> SeriesFunction<Sp> {
    let space = f.space();
    if lambda.is_zero() {
        return SeriesFunction::zero(space);
    }
    if f.has_zero_tail() {
        let prefix = f.prefix().iter().map(|e| space.scale(e, lambda)).collect();
        return SeriesFunction::from_parts(space, prefix, TailModel::zero());
    }
    SeriesFunction::from_generator(
        space,
        Scaled {
            f: f.clone(),
            lambda: lambda.clone(),
        },
    )
}

pub fn series_neg<Sp: ElementarySpace>(f: &SeriesFunction<Sp>) -> SeriesFunction<Sp> {
    series_scale(f, &-Sc::<Sp>::one())
}

pub fn series_sub<Sp: ElementarySpace>(
    f: &SeriesFunction<Sp>,
    g: &SeriesFunction<Sp>,
) -> Result<SeriesFunction<Sp>> {
    series_add(f, &series_neg(g))
}

// ---------------------------------------------------------------------------
// absolute value and lattice operations

/// `g_1 + f_1 - f_1 + g_2 + f_2 - f_2 + ...` with `g_j = |s_j| - |s_{j-1}|`.
struct AbsTerms<Sp: ElementarySpace> {
    sums: PartialSums<Sp>,
}

impl<Sp: ElementarySpace> AbsTerms<Sp> {
    fn f(&self) -> &SeriesFunction<Sp> {
        &self.sums.f
    }
}

impl<Sp: ElementarySpace> TermGenerator<Sp> for AbsTerms<Sp> {
    fn term(&self, space: &Sp, t: usize) -> Sp::Elem {
        let j = (t - 1) / 3 + 1;
        match (t - 1) % 3 {
            0 => space.sub(&space.abs(&self.sums.get(j)), &space.abs(&self.sums.get(j - 1))),
            1 => self.f().term(j),
            _ => space.neg(&self.f().term(j)),
        }
    }

    // ||s_j| - |s_{j-1}|| <= |f_j|, so each group of three costs at most 3 int|f_j|
    fn tail_bound(&self, _space: &Sp, k: usize) -> Sc<Sp> {
        Sc::<Sp>::from_int(3) * self.f().tail_bound(k / 3)
    }

    fn pointwise_tail(&self, _space: &Sp, k: usize, x: &Sp::Point) -> Option<Sc<Sp>> {
        Some(Sc::<Sp>::from_int(3) * self.f().pointwise_tail(k / 3, x)?)
    }

    fn diverges_at(&self, _space: &Sp, x: &Sp::Point) -> bool {
        self.f().diverges_at(x)
    }

    fn describe(&self) -> String {
        format!("abs({})", self.f().tail().describe())
    }
}

/// `|F|` through the telescoping representation of `|s_n|`.
pub fn series_abs<Sp: ElementarySpace>(f: &SeriesFunction<Sp>) -> SeriesFunction<Sp> {
    let space = f.space();
    let gen = AbsTerms {
        sums: PartialSums::new(f.clone()),
    };
    if f.has_zero_tail() {
        let prefix = (1..=3 * f.prefix_len()).map(|t| gen.term(space, t)).collect();
        return SeriesFunction::from_parts(space, prefix, TailModel::zero());
    }
    SeriesFunction::from_generator(space, gen)
}

/// `F v G = (F + G + |F - G|) / 2`.
pub fn series_max<Sp: ElementarySpace>(
    f: &SeriesFunction<Sp>,
    g: &SeriesFunction<Sp>,
) -> Result<SeriesFunction<Sp>> {
    let sum = series_add(f, g)?;
    let gap = series_abs(&series_sub(f, g)?);
    Ok(series_scale(&series_add(&sum, &gap)?, &Sc::<Sp>::half()))
}

/// `F ^ G = (F + G - |F - G|) / 2`.
pub fn series_min<Sp: ElementarySpace>(
    f: &SeriesFunction<Sp>,
    g: &SeriesFunction<Sp>,
) -> Result<SeriesFunction<Sp>> {
    let sum = series_add(f, g)?;
    let gap = series_abs(&series_sub(f, g)?);
    Ok(series_scale(&series_sub(&sum, &gap)?, &Sc::<Sp>::half()))
}

// ---------------------------------------------------------------------------
// clipping

/// `h_n = (s_n ^ c) - (s_{n-1} ^ c)`; partial sums are `s_n ^ c`.
struct Clipped<Sp: ElementarySpace> {
    sums: PartialSums<Sp>,
    c: Sc<Sp>,
}

impl<Sp: ElementarySpace> TermGenerator<Sp> for Clipped<Sp> {
    fn term(&self, space: &Sp, n: usize) -> Sp::Elem {
        let now = space.min_with_constant(&self.sums.get(n), &self.c);
        let before = space.min_with_constant(&self.sums.get(n - 1), &self.c);
        space.sub(&now, &before)
    }

    // |a ^ c - b ^ c| <= |a - b|
    fn tail_bound(&self, _space: &Sp, k: usize) -> Sc<Sp> {
        self.sums.f.tail_bound(k)
    }

    fn pointwise_tail(&self, _space: &Sp, k: usize, x: &Sp::Point) -> Option<Sc<Sp>> {
        self.sums.f.pointwise_tail(k, x)
    }

    fn describe(&self) -> String {
        format!("clip({}, {})", self.sums.f.tail().describe(), self.c)
    }
}

/// `F ^ c` for `c > 0`, represented by the telescoping clipped partial sums.
pub fn series_clip<Sp: ElementarySpace>(
    f: &SeriesFunction<Sp>,
    c: &Sc<Sp>,
) -> Result<SeriesFunction<Sp>> {
    require_positive("clipping level", c)?;
    let space = f.space();
    let gen = Clipped {
        sums: PartialSums::new(f.clone()),
        c: c.clone(),
    };
    if f.has_zero_tail() {
        let prefix = (1..=f.prefix_len()).map(|n| gen.term(space, n)).collect();
        return Ok(SeriesFunction::from_parts(space, prefix, TailModel::zero()));
    }
    Ok(SeriesFunction::from_generator(space, gen))
}

// ---------------------------------------------------------------------------
// reindexing

/// `f_{offset+1}, f_{offset+2}, ...`.
struct Shifted<Sp: ElementarySpace> {
    f: SeriesFunction<Sp>,
    offset: usize,
}

impl<Sp: ElementarySpace> TermGenerator<Sp> for Shifted<Sp> {
    fn term(&self, _space: &Sp, n: usize) -> Sp::Elem {
        self.f.term(n + self.offset)
    }

    fn tail_bound(&self, _space: &Sp, k: usize) -> Sc<Sp> {
        self.f.tail_bound(k + self.offset)
    }

    fn pointwise_tail(&self, _space: &Sp, k: usize, x: &Sp::Point) -> Option<Sc<Sp>> {
        self.f.pointwise_tail(k + self.offset, x)
    }

    fn diverges_at(&self, _space: &Sp, x: &Sp::Point) -> bool {
        self.f.diverges_at(x)
    }

    fn describe(&self) -> String {
        format!("shift({}, {})", self.f.tail().describe(), self.offset)
    }
}

/// `F - s_k`, i.e. the series of terms after index `k`. Its total bound is `B_k`.
pub fn series_shift<Sp: ElementarySpace>(f: &SeriesFunction<Sp>, k: usize) -> SeriesFunction<Sp> {
    let space = f.space();
    if f.has_zero_tail() {
        let prefix = f.prefix().iter().skip(k).cloned().collect();
        return SeriesFunction::from_parts(space, prefix, TailModel::zero());
    }
    SeriesFunction::from_generator(
        space,
        Shifted {
            f: f.clone(),
            offset: k,
        },
    )
}

/// Consecutive blocks of `f` summed into single terms, with block lengths
/// cycling through `pattern`.
struct Regrouped<Sp: ElementarySpace> {
    f: SeriesFunction<Sp>,
    pattern: Vec<usize>,
}

impl<Sp: ElementarySpace> Regrouped<Sp> {
    /// Number of source terms consumed by the first `n` blocks.
    fn consumed(&self, n: usize) -> usize {
        let cycle: usize = self.pattern.iter().sum();
        let (full, part) = (n / self.pattern.len(), n % self.pattern.len());
        full * cycle + self.pattern[..part].iter().sum::<usize>()
    }
}

impl<Sp: ElementarySpace> TermGenerator<Sp> for Regrouped<Sp> {
    fn term(&self, space: &Sp, n: usize) -> Sp::Elem {
        (self.consumed(n - 1) + 1..=self.consumed(n))
            .fold(space.zero(), |acc, m| space.add(&acc, &self.f.term(m)))
    }

    fn tail_bound(&self, _space: &Sp, k: usize) -> Sc<Sp> {
        self.f.tail_bound(self.consumed(k))
    }

    fn pointwise_tail(&self, _space: &Sp, k: usize, x: &Sp::Point) -> Option<Sc<Sp>> {
        self.f.pointwise_tail(self.consumed(k), x)
    }

    fn describe(&self) -> String {
        format!("regroup({}, {:?})", self.f.tail().describe(), self.pattern)
    }
}

/// Regroups consecutive terms into blocks whose lengths cycle through
/// `pattern`. Represents the same function wherever `F` converges absolutely.
pub fn series_regroup<Sp: ElementarySpace>(
    f: &SeriesFunction<Sp>,
    pattern: &[usize],
) -> Result<SeriesFunction<Sp>> {
    if pattern.is_empty() || pattern.contains(&0) {
        return Err(Error::Unsupported("block lengths must be positive".into()));
    }
    Ok(SeriesFunction::from_generator(
        f.space(),
        Regrouped {
            f: f.clone(),
            pattern: pattern.to_vec(),
        },
    ))
}

/// Terms permuted within consecutive blocks of `perm.len()`.
struct PermutedBlocks<Sp: ElementarySpace> {
    f: SeriesFunction<Sp>,
    perm: Vec<usize>,
}

impl<Sp: ElementarySpace> PermutedBlocks<Sp> {
    /// Source terms all of whose block-mates are among the first `k` terms.
    fn settled(&self, k: usize) -> usize {
        k / self.perm.len() * self.perm.len()
    }
}

impl<Sp: ElementarySpace> TermGenerator<Sp> for PermutedBlocks<Sp> {
    fn term(&self, _space: &Sp, n: usize) -> Sp::Elem {
        let l = self.perm.len();
        let (block, pos) = ((n - 1) / l, (n - 1) % l);
        self.f.term(block * l + self.perm[pos] + 1)
    }

    fn tail_bound(&self, _space: &Sp, k: usize) -> Sc<Sp> {
        self.f.tail_bound(self.settled(k))
    }

    fn pointwise_tail(&self, _space: &Sp, k: usize, x: &Sp::Point) -> Option<Sc<Sp>> {
        self.f.pointwise_tail(self.settled(k), x)
    }

    fn diverges_at(&self, _space: &Sp, x: &Sp::Point) -> bool {
        self.f.diverges_at(x)
    }

    fn describe(&self) -> String {
        format!("permute({}, {:?})", self.f.tail().describe(), self.perm)
    }
}

/// Applies the permutation `perm` of `0..L` inside every block of `L` terms.
pub fn series_permute_blocks<Sp: ElementarySpace>(
    f: &SeriesFunction<Sp>,
    perm: &[usize],
) -> Result<SeriesFunction<Sp>> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Unsupported(format!("{perm:?} is not a permutation")));
        }
    }
    if perm.is_empty() {
        return Err(Error::Unsupported("empty permutation".into()));
    }
    Ok(SeriesFunction::from_generator(
        f.space(),
        PermutedBlocks {
            f: f.clone(),
            perm: perm.to_vec(),
        },
    ))
}

// ---------------------------------------------------------------------------
// renormalization and double series

/// A representation of `F` whose certified total `sum int|f_n|` is at most
/// `hi(norm_enclosure(F, eps/4)) + eps`.
///
/// The first term is the collapsed partial sum `s_{n0}` with `B_{n0} < eps/2`
/// and `int|s_{n0}| < H + eps/2`; later terms are those of `F` after `n0`.
pub fn renormalize_eps<Sp: ElementarySpace>(
    f: &SeriesFunction<Sp>,
    eps: &Sc<Sp>,
) -> Result<SeriesFunction<Sp>> {
    renormalize_eps_with(f, eps, super::DEFAULT_BUDGET)
}

pub fn renormalize_eps_with<Sp: ElementarySpace>(
    f: &SeriesFunction<Sp>,
    eps: &Sc<Sp>,
    budget: usize,
) -> Result<SeriesFunction<Sp>> {
    require_positive("tolerance", eps)?;
    let space = f.space();
    let quarter = eps.clone() / Sc::<Sp>::from_int(4);
    let half = eps.clone() * Sc::<Sp>::half();
    let h = f.norm_enclosure_with(&quarter, budget)?.hi;
    let exhausted = || Error::BudgetExhausted {
        budget,
        achieved: f.tail_bound(budget).to_string(),
    };
    let n1 = first_index(budget, |k| f.tail_bound(k) < half).ok_or_else(exhausted)?;
    let limit = h.clone() + half.clone();
    // int|s_n| <= H + B_n, so n1 itself qualifies unless H was loose
    let n0 = (n1..=budget)
        .find(|&n| space.abs_integral(&f.partial_sum(n)) < limit)
        .ok_or_else(exhausted)?;
    let head = f.partial_sum(n0);
    let out = if f.has_zero_tail() {
        let mut prefix = vec![head];
        prefix.extend(f.prefix().iter().skip(n0).cloned());
        SeriesFunction::from_parts(space, prefix, TailModel::zero())
    } else {
        SeriesFunction::from_parts(
            space,
            vec![head],
            TailModel::new(Shifted {
                f: f.clone(),
                offset: n0 - 1,
            }),
        )
    };
    debug_assert!(out.total_bound() <= h + eps.clone());
    Ok(out)
}

/// Rows `1..=m` (already renormalized), then elementary outer rows `i > m`.
struct Flattened<Sp: ElementarySpace> {
    rows: Vec<SeriesFunction<Sp>>,
    outer: TailModel<Sp>,
}

impl<Sp: ElementarySpace> Flattened<Sp> {
    fn m(&self) -> usize {
        self.rows.len()
    }

    /// Terms on the diagonal `i + n = d`.
    fn count(&self, d: usize) -> usize {
        let inner = self.m().min(d - 1);
        inner + usize::from(d - 1 > self.m() && !self.outer.is_zero())
    }

    /// Largest `D` whose diagonals `2..=D` fit in the first `k` terms, and
    /// how many terms of diagonal `D + 1` are also among them.
    fn progress(&self, k: usize) -> (usize, usize) {
        let (mut d, mut used) = (1, 0);
        while used + self.count(d + 1) <= k {
            d += 1;
            used += self.count(d);
        }
        (d, k - used)
    }

    /// Terms of row `i` (1-based, `i <= m`) among the first `k`.
    fn consumed(&self, i: usize, (d, r): (usize, usize)) -> usize {
        // partial diagonals are filled in ascending row order
        if i <= r {
            d + 1 - i
        } else {
            d.saturating_sub(i)
        }
    }

    fn locate(&self, t: usize) -> (usize, usize) {
        let (mut d, mut used) = (2, 0);
        while used + self.count(d) < t {
            used += self.count(d);
            d += 1;
        }
        let i = t - used;
        if i > self.m() {
            // the outer row on this diagonal
            (d - 1, 1)
        } else {
            (i, d - i)
        }
    }
}

impl<Sp: ElementarySpace> TermGenerator<Sp> for Flattened<Sp> {
    fn term(&self, space: &Sp, t: usize) -> Sp::Elem {
        let (i, n) = self.locate(t);
        if i <= self.m() {
            self.rows[i - 1].term(n)
        } else {
            self.outer.term(space, i)
        }
    }

    fn tail_bound(&self, space: &Sp, k: usize) -> Sc<Sp> {
        let at = self.progress(k);
        let inner = self
            .rows
            .iter()
            .enumerate()
            .fold(Sc::<Sp>::zero(), |acc, (i, r)| {
                acc + r.tail_bound(self.consumed(i + 1, at))
            });
        inner + self.outer.bound(space, self.m().max(at.0.saturating_sub(1)))
    }

    fn pointwise_tail(&self, space: &Sp, k: usize, x: &Sp::Point) -> Option<Sc<Sp>> {
        let at = self.progress(k);
        let mut acc = self
            .outer
            .pointwise(space, self.m().max(at.0.saturating_sub(1)), x)?;
        for (i, r) in self.rows.iter().enumerate() {
            acc = acc + r.pointwise_tail(self.consumed(i + 1, at), x)?;
        }
        Some(acc)
    }

    fn diverges_at(&self, _space: &Sp, x: &Sp::Point) -> bool {
        self.rows.iter().any(|r| r.diverges_at(x))
    }

    fn describe(&self) -> String {
        format!("flatten(rows={}, outer={})", self.m(), self.outer.describe())
    }
}

/// `sum_i F_i` as one series. Row `i` is renormalized to slack `2^-i`, then
/// all terms are enumerated along the diagonals `i + n = const`. `outer`
/// supplies elementary rows `i > rows.len()` and certifies their total norm.
pub fn flatten_double_series<Sp: ElementarySpace>(
    space: &Sp,
    rows: &[SeriesFunction<Sp>],
    outer: TailModel<Sp>,
) -> Result<SeriesFunction<Sp>> {
    if let Some(bad) = rows.iter().find(|r| r.space() != space) {
        return Err(Error::SpaceMismatch {
            left: space.id(),
            right: bad.space().id(),
        });
    }
    if rows.is_empty() && outer.is_zero() {
        return Ok(SeriesFunction::zero(space));
    }
    let rows = rows
        .iter()
        .enumerate()
        .map(|(i, r)| renormalize_eps(r, &Sc::<Sp>::two_pow_neg(i as u32 + 1)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SeriesFunction::from_generator(space, Flattened { rows, outer }))
}
