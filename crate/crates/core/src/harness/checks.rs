//! Executable forms of the convergence theorems.
//!
//! Each check takes typed inputs and returns a [`CheckReport`]. A `pass`
//! records the exact inequalities it rests on in `bounds` (and, with tracing,
//! per step); a `fail` names the violated inequality.

use num_traits::{Signed, Zero};

use crate::boxes::HyperBox;
use crate::completion::families::{MonotoneChain, SeqFn};
use crate::completion::{series_sub, SeriesFunction};
use crate::error::Error;
use crate::report::CheckReport;
use crate::scalar::Scalar;
use crate::simple::SimpleFunction;
use crate::space::{BoxSpace, DecreasingFamily, ElementarySpace};

/// Stretch of steps whose monotonicity is checked before trusting a closed form.
const CLOSED_FORM_STRETCH: usize = 64;

/// Steps checked linearly in [`check_dct`] before the doubling schedule takes over.
const DCT_LINEAR_STEPS: usize = 16;

/// Shared run parameters.
#[derive(Clone, Debug)]
pub struct CheckConfig<S> {
    pub scenario: String,
    pub eps: S,
    pub budget: usize,
    pub seed: u64,
    pub trace: bool,
}

impl<S: Scalar> CheckConfig<S> {
    pub fn new(scenario: impl Into<String>, eps: S, budget: usize) -> Self {
        CheckConfig {
            scenario: scenario.into(),
            eps,
            budget,
            seed: 0,
            trace: false,
        }
    }

    fn report(&self, check: &str) -> CheckReport {
        let mut r = CheckReport::new(self.scenario.clone(), check, self.seed);
        r.bound("eps", &self.eps);
        r
    }
}

fn trace(cfg_trace: bool, r: &mut CheckReport, line: impl FnOnce() -> String) {
    if cfg_trace {
        r.push_trace(line());
    }
}

/// A limit function: elementary, or given by a series.
pub enum Limit<Sp: ElementarySpace> {
    Elementary(Sp::Elem),
    Series(SeriesFunction<Sp>),
}

impl<Sp: ElementarySpace> Limit<Sp> {
    fn as_series(&self, space: &Sp) -> SeriesFunction<Sp> {
        match self {
            Limit::Elementary(e) => SeriesFunction::from_elementary(space, e.clone()),
            Limit::Series(f) => f.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// continuity axiom

/// `int f_n -> 0` along a decreasing family: strictly below `eps`, with the
/// integrals exactly nonincreasing and `f_n <= f_{n-1}` at every step taken.
/// A closed form, when present, replaces iteration past the first steps.
pub fn check_condition_ii<Sp: ElementarySpace>(
    cfg: &CheckConfig<Sp::Scalar>,
    space: &Sp,
    family: &dyn DecreasingFamily<Sp>,
) -> CheckReport {
    let mut r = cfg.report("condition_ii");
    r.bound("family", family.name());
    let closed = family.first_below(&cfg.eps);
    let stretch = closed
        .map(|n| n.min(CLOSED_FORM_STRETCH))
        .unwrap_or(cfg.budget);
    let mut prev: Option<(Sp::Elem, Sp::Scalar)> = None;
    for n in 1..=stretch {
        let f = family.element(space, n);
        let v = space.integral(&f);
        r.iterations += 1;
        trace(cfg.trace, &mut r, || format!("n={n} int={v}"));
        if !space.is_nonnegative(&f) {
            r.fail(format!("step {n}: f_{n} takes a negative value"));
            return r;
        }
        if let Some((pf, pv)) = &prev {
            if v > *pv {
                r.bound("step", n);
                r.fail(format!("step {n}: int f_{n} = {v} > int f_{} = {pv}", n - 1));
                return r;
            }
            if !space.le(&f, pf) {
                r.bound("step", n);
                r.fail(format!("step {n}: f_{n} <= f_{} fails pointwise", n - 1));
                return r;
            }
        }
        if let Some(cf) = family.integral_closed_form(n) {
            if cf != v {
                r.fail(format!("step {n}: closed form {cf} != exact integral {v}"));
                return r;
            }
        }
        if closed.is_none() && v < cfg.eps {
            r.bound("n", n).bound("integral", &v);
            return r;
        }
        prev = Some((f, v));
    }
    let Some(n) = closed else {
        let best = prev.map(|(_, v)| v.to_string()).unwrap_or_default();
        r.bound("best", &best);
        r.inconclusive(format!("budget {} exhausted at integral {best}", cfg.budget));
        return r;
    };
    // closed form: confirm exactly at n and n - 1
    let v = space.integral(&family.element(space, n));
    r.iterations += 1;
    if family.integral_closed_form(n).as_ref() != Some(&v) || v >= cfg.eps {
        r.fail(format!("closed form claims n={n} but int f_{n} = {v}"));
        return r;
    }
    if n > 1 {
        let before = space.integral(&family.element(space, n - 1));
        r.iterations += 1;
        if before < cfg.eps {
            r.fail(format!("n={n} is not minimal: int f_{} = {before}", n - 1));
            return r;
        }
        if before < v {
            r.fail(format!("step {n}: int f_{n} = {v} > int f_{} = {before}", n - 1));
            return r;
        }
    }
    trace(cfg.trace, &mut r, || format!("n={n} int={v} (closed form)"));
    r.bound("n", n).bound("integral", &v);
    r
}

// ---------------------------------------------------------------------------
// monotone convergence

/// A monotone sequence with declared `|int f_n| <= bound` and `lim int f_n = limit`.
pub struct MonotoneFamily<Sp: ElementarySpace> {
    pub name: String,
    pub seq: SeqFn<Sp>,
    pub bound: Sp::Scalar,
    pub limit: Sp::Scalar,
    /// Steps materialized for the exact checks.
    pub steps: usize,
}

/// Monotone convergence: bounded integrals along a monotone sequence give
/// an integrable limit, built as `f_1 + (f_2 - f_1) + ...`.
pub fn check_mct<Sp: ElementarySpace>(
    cfg: &CheckConfig<Sp::Scalar>,
    space: &Sp,
    fam: &MonotoneFamily<Sp>,
) -> CheckReport {
    let mut r = cfg.report("mct");
    r.bound("family", &fam.name).bound("M", &fam.bound);
    let steps = fam.steps.clamp(1, cfg.budget.max(1));
    let mut prev: Option<Sp::Elem> = None;
    let mut direction: Option<bool> = None;
    for n in 1..=steps {
        let f = (fam.seq)(n);
        let v = space.integral(&f);
        r.iterations += 1;
        trace(cfg.trace, &mut r, || format!("n={n} int={v}"));
        if v.abs() > fam.bound {
            r.fail(format!("step {n}: |int f_{n}| = {} > M = {}", v.abs(), fam.bound));
            return r;
        }
        if let Some(p) = &prev {
            let up = space.le(p, &f);
            let down = space.le(&f, p);
            let ok = match direction {
                _ if up && down => true,
                None => {
                    direction = Some(up);
                    up || down
                }
                Some(true) => up,
                Some(false) => down,
            };
            if !ok {
                r.fail(format!("step {n}: f_{n} breaks monotonicity"));
                return r;
            }
        }
        prev = Some(f);
    }
    let chain = MonotoneChain::new(fam.name.clone(), fam.seq.clone(), fam.limit.clone());
    let series = SeriesFunction::from_generator(space, chain);
    let k = match series.refinement_for(&cfg.eps, cfg.budget) {
        Ok(k) => k,
        Err(e) => {
            r.inconclusive(e.to_string());
            return r;
        }
    };
    let e = series.enclosure_at(k);
    r.iterations += k as u64;
    r.bound("k", k).bound("limit.lo", &e.lo).bound("limit.hi", &e.hi);
    if !series.tail_consistent(0, k.min(steps)) {
        r.fail(format!("differences are not one-signed up to step {}", k.min(steps)));
        return r;
    }
    let near = e.widen(&cfg.eps).contains(&fam.limit);
    if !near {
        r.fail(format!("limit {} lies outside enclosure {e} widened by eps", fam.limit));
    } else if e.hi > fam.bound.clone() + cfg.eps.clone() {
        r.fail(format!("limit upper bound {} > M + eps = {}", e.hi, fam.bound.clone() + cfg.eps.clone()));
    }
    r
}

// ---------------------------------------------------------------------------
// dominated convergence

/// `f_n` with an elementary dominator `h` and a limit `f`.
pub struct DominatedFamily<S: Scalar> {
    pub name: String,
    pub seq: SeqFn<BoxSpace<S>>,
    pub dominator: SimpleFunction<S>,
    pub limit: Limit<BoxSpace<S>>,
}

fn dominated_witness<S: Scalar>(f: &SimpleFunction<S>, h: &SimpleFunction<S>) -> Option<(HyperBox<S>, S)> {
    f.absolute().exceeds_at(h).expect("same dimension")
}

/// Dominated convergence: certifies `||f_n - f|| <= eps` at some `n` of the
/// schedule `1, 2, ..., 16, 32, 64, ...`, checking `|f_n| <= h` cellwise at
/// every step taken.
pub fn check_dct<S: Scalar>(
    cfg: &CheckConfig<S>,
    space: &BoxSpace<S>,
    fam: &DominatedFamily<S>,
) -> CheckReport {
    let mut r = cfg.report("dct");
    r.bound("family", &fam.name);
    let limit = fam.limit.as_series(space);
    let quarter = cfg.eps.clone() / S::from_int(4);
    let schedule = (1..=DCT_LINEAR_STEPS).chain(
        std::iter::successors(Some(2 * DCT_LINEAR_STEPS), |n| n.checked_mul(2)),
    );
    let mut best: Option<S> = None;
    for n in schedule.take(cfg.budget) {
        let f = (fam.seq)(n);
        r.iterations += 1;
        if let Some((cell, excess)) = dominated_witness(&f, &fam.dominator) {
            r.bound("step", n);
            r.fail(format!("step {n}: |f_{n}| exceeds h by {excess} on {cell}"));
            return r;
        }
        let norm = match &fam.limit {
            Limit::Elementary(g) => f.sub(g).expect("same dimension").abs_integral(),
            Limit::Series(_) => {
                let diff = series_sub(&SeriesFunction::from_elementary(space, f), &limit)
                    .expect("same space");
                match diff.norm_enclosure_with(&quarter, cfg.budget) {
                    Ok(e) => e.hi,
                    Err(e) => {
                        r.inconclusive(e.to_string());
                        return r;
                    }
                }
            }
        };
        trace(cfg.trace, &mut r, || format!("n={n} norm_hi={norm}"));
        if norm <= cfg.eps {
            r.bound("n", n).bound("norm_hi", &norm);
            return r;
        }
        best = Some(match best {
            Some(b) if b <= norm => b,
            _ => norm,
        });
    }
    let best = best.map(|b| b.to_string()).unwrap_or_default();
    r.bound("best", &best);
    r.inconclusive(format!("norm stayed above eps; best upper bound {best}"));
    r
}

// ---------------------------------------------------------------------------
// Fatou

/// Nonnegative `f_n` with `int f_n <= bound` and a declared a.e. limit.
pub struct FatouFamily<Sp: ElementarySpace> {
    pub name: String,
    pub seq: SeqFn<Sp>,
    pub bound: Sp::Scalar,
    pub limit: Limit<Sp>,
    pub steps: usize,
}

/// Fatou: the limit of nonnegative functions with `int f_n <= M` has
/// `int f <= M`.
pub fn check_fatou<Sp: ElementarySpace>(
    cfg: &CheckConfig<Sp::Scalar>,
    space: &Sp,
    fam: &FatouFamily<Sp>,
) -> CheckReport {
    let mut r = cfg.report("fatou");
    r.bound("family", &fam.name).bound("M", &fam.bound);
    let steps = fam.steps.clamp(1, cfg.budget.max(1));
    let mut low: Option<Sp::Scalar> = None;
    for n in 1..=steps {
        let f = (fam.seq)(n);
        let v = space.integral(&f);
        r.iterations += 1;
        trace(cfg.trace, &mut r, || format!("n={n} int={v}"));
        if !space.is_nonnegative(&f) {
            r.fail(format!("step {n}: f_{n} takes a negative value"));
            return r;
        }
        if v > fam.bound {
            r.fail(format!("step {n}: int f_{n} = {v} > M = {}", fam.bound));
            return r;
        }
        if n > steps / 2 {
            low = Some(match low {
                Some(l) if l <= v => l,
                _ => v,
            });
        }
    }
    let e = match fam.limit.as_series(space).integral_enclosure_with(&cfg.eps, cfg.budget) {
        Ok(e) => e,
        Err(e) => {
            r.inconclusive(e.to_string());
            return r;
        }
    };
    r.bound("limit.lo", &e.lo).bound("limit.hi", &e.hi);
    if let Some(l) = low {
        r.bound("late_min", &l);
    }
    let cap = fam.bound.clone() + cfg.eps.clone();
    if e.hi > cap {
        r.fail(format!("int f <= {} > M + eps = {cap}", e.hi));
    } else if e.hi < fam.bound {
        r.bound("gap", fam.bound.clone() - e.hi.clone());
    }
    r
}

// ---------------------------------------------------------------------------
// completeness

/// `||f - s_k|| <= B_k` at every `k` up to the first with `B_k <= eps`.
///
/// The norm is bounded by the residual series' own enclosure at two
/// refinements, `j = k + 1` and `j = K + 1`:
/// `||f - s_k|| <= int|s_j - s_k| + B_j`, which must not exceed `B_k`.
pub fn check_banach_completeness<Sp: ElementarySpace>(
    cfg: &CheckConfig<Sp::Scalar>,
    f: &SeriesFunction<Sp>,
) -> CheckReport {
    let mut r = cfg.report("banach");
    let space = f.space();
    let k_max = match f.refinement_for(&cfg.eps, cfg.budget) {
        Ok(k) => k,
        Err(Error::BudgetExhausted { achieved, .. }) => {
            r.bound("best", &achieved);
            r.inconclusive(format!("B_k stayed above eps; best {achieved}"));
            return r;
        }
        Err(e) => {
            r.fail(e.to_string());
            return r;
        }
    };
    let sums: Vec<Sp::Elem> = std::iter::successors(Some((0usize, space.zero())), |(n, s)| {
        Some((n + 1, space.add(s, &f.term(n + 1))))
    })
    .take(k_max + 2)
    .map(|(_, s)| s)
    .collect();
    let bounds: Vec<Sp::Scalar> = (0..=k_max + 1).map(|k| f.tail_bound(k)).collect();
    for k in 0..=k_max {
        r.iterations += 1;
        for j in [k + 1, k_max + 1] {
            let hi = space.abs_integral(&space.sub(&sums[j], &sums[k])) + bounds[j].clone();
            if hi > bounds[k] {
                r.bound("k", k);
                r.fail(format!(
                    "||f - s_{k}|| <= int|s_{j} - s_{k}| + B_{j} = {hi} > B_{k} = {}",
                    bounds[k]
                ));
                return r;
            }
        }
        trace(cfg.trace, &mut r, || format!("k={k} B_k={}", bounds[k]));
        if bounds[k].is_zero() && k < k_max {
            // finite series: nothing left after the last term
            r.bound("residual_zero_from", k);
        }
    }
    r.bound("k", k_max).bound("B_k", &bounds[k_max]);
    r
}

/// Flattened double series: tail consistency along the diagonal order and
/// an enclosure containing the independently known total.
pub fn check_flatten<Sp: ElementarySpace>(
    cfg: &CheckConfig<Sp::Scalar>,
    flat: &SeriesFunction<Sp>,
    expected: &Sp::Scalar,
) -> CheckReport {
    let mut r = check_banach_completeness(cfg, flat);
    r.check = "flatten".into();
    if !r.passed() {
        return r;
    }
    let e = match flat.integral_enclosure_with(&cfg.eps, cfg.budget) {
        Ok(e) => e,
        Err(e) => {
            r.inconclusive(e.to_string());
            return r;
        }
    };
    r.bound("enclosure.lo", &e.lo).bound("enclosure.hi", &e.hi).bound("expected", expected);
    if !e.contains(expected) {
        r.fail(format!("expected total {expected} outside enclosure {e}"));
    }
    r
}

// ---------------------------------------------------------------------------
// a.e. subsequence

/// Indices `p_1 < p_2 < ...`, each minimal with `||f_{p_j} - f|| < 2^-j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subsequence<S> {
    pub indices: Vec<usize>,
    /// `||f_{p_j} - f||` for each index.
    pub norms: Vec<S>,
    /// Set when the budget ran out before `count` indices were found.
    pub stalled_at: Option<usize>,
}

pub fn extract_ae_subsequence<S: Scalar>(
    norm: &dyn Fn(usize) -> S,
    count: usize,
    budget: usize,
) -> Subsequence<S> {
    let mut out = Subsequence {
        indices: Vec::new(),
        norms: Vec::new(),
        stalled_at: None,
    };
    let mut p = 0usize;
    let mut spent = 0usize;
    for j in 1..=count {
        let target = S::two_pow_neg(j as u32);
        loop {
            if spent >= budget {
                out.stalled_at = Some(j);
                return out;
            }
            p += 1;
            spent += 1;
            let v = norm(p);
            if v < target {
                out.indices.push(p);
                out.norms.push(v);
                break;
            }
        }
    }
    out
}

pub fn check_subsequence<S: Scalar>(
    cfg: &CheckConfig<S>,
    norm: &dyn Fn(usize) -> S,
    count: usize,
) -> CheckReport {
    let mut r = cfg.report("subsequence");
    let sub = extract_ae_subsequence(norm, count, cfg.budget);
    r.iterations = sub.indices.last().copied().unwrap_or(0) as u64;
    for (j, (p, v)) in sub.indices.iter().zip(&sub.norms).enumerate() {
        r.bound(format!("p_{}", j + 1), p);
        trace(cfg.trace, &mut r, || {
            format!("p_{}={p} norm={v} < 2^-{}", j + 1, j + 1)
        });
    }
    let ps: Vec<String> = sub.indices.iter().map(|p| p.to_string()).collect();
    r.bound("indices", ps.join(","));
    if let Some(j) = sub.stalled_at {
        r.inconclusive(format!(
            "budget {} exhausted looking for p_{j}; found {} indices",
            cfg.budget,
            sub.indices.len()
        ));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completion::families::{Geometric, ShiftRule, Underbound};
    use crate::space::{Flattening, ShrinkingBox};
    use crate::{Rational, Verdict};
    use std::sync::Arc;

    fn q(s: &str) -> Rational {
        Rational::parse_exact(s).unwrap()
    }

    fn cfg(eps: &str) -> CheckConfig<Rational> {
        CheckConfig::new("t", q(eps), 10_000)
    }

    fn line() -> BoxSpace<Rational> {
        BoxSpace::new(1).unwrap()
    }

    #[test]
    fn condition_ii_examples() {
        let sp = line();
        let r = check_condition_ii(&cfg("1/1000000"), &sp, &ShrinkingBox);
        assert!(r.passed() && r.bounds["n"] == "20", "{r}");
        let flat = Flattening::new(SimpleFunction::indicator(sp.unit_box())).with_space(&sp);
        let r = check_condition_ii(&cfg("1/1000"), &sp, &flat);
        assert!(r.passed() && r.bounds["n"] == "1001", "{r}");
    }

    #[test]
    fn subsequence_examples() {
        let s = extract_ae_subsequence(&|n| Rational::ratio(1, n as i64), 10, 10_000);
        let want: Vec<usize> = (1..=10).map(|n| (1usize << n) + 1).collect();
        assert_eq!(s.indices, want);
        let s = extract_ae_subsequence(&|n| Rational::from_int(3).pow_i(n as u32).recip(), 8, 100);
        assert_eq!(s.indices, (1..=8).collect::<Vec<_>>());
        let s = extract_ae_subsequence(&|_| q("0"), 5, 100);
        assert_eq!(s.indices, vec![1, 2, 3, 4, 5]);
        let s = extract_ae_subsequence(&|n| Rational::ratio(1, n as i64), 10, 100);
        assert_eq!(s.stalled_at, Some(7));
    }

    #[test]
    fn banach_detects_underbound() {
        let sp = line();
        let base = SimpleFunction::indicator(sp.unit_box());
        let g = Geometric::new(&sp, base, q("1"), q("-1/2"), ShiftRule::Fixed).unwrap();
        let good = SeriesFunction::from_generator(&sp, g);
        assert!(check_banach_completeness(&cfg("1/1048576"), &good).passed());
        let g = Geometric::new(&sp, SimpleFunction::indicator(sp.unit_box()), q("1"), q("-1/2"), ShiftRule::Fixed)
            .unwrap();
        let bad = SeriesFunction::from_generator(&sp, Underbound::new(Arc::new(g), q("1/4")));
        let r = check_banach_completeness(&cfg("1/1048576"), &bad);
        assert_eq!(r.verdict, Verdict::Fail, "{r}");
        assert!(r.witness.unwrap().contains("> B_0"));
    }
}
