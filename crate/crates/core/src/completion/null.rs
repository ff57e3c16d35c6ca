//! Null functions and equality almost everywhere, at enclosure level.

use num_traits::Zero;
use serde::Serialize;

use super::families::RepeatNull;
use super::ops::{series_add, series_neg};
use super::{require_positive, SeriesFunction, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::ElementarySpace;

/// Extra refinements scanned past the first index with `B_k <= eps/2`.
/// Partial sums of cancelling series can alternate, so one index is not enough.
const SCAN_WINDOW: usize = 8;

/// Evidence for `int|f| <= upper`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(bound(serialize = "S: std::fmt::Display"))]
pub struct NullCertificate<S> {
    pub certified: bool,
    /// `upper == 0`: the norm is exactly zero.
    pub exact: bool,
    pub refinement: usize,
    #[serde(serialize_with = "as_string")]
    pub upper: S,
    #[serde(serialize_with = "as_string")]
    pub lower: S,
}

fn as_string<S: std::fmt::Display, Se: serde::Serializer>(
    v: &S,
    s: Se,
) -> std::result::Result<Se::Ok, Se::Error> {
    s.serialize_str(&v.to_string())
}

/// Certifies `int|F| <= eps` if some norm enclosure near the `eps/2`
/// refinement has `hi <= eps`. `certified = false` is not a proof of non-nullity;
/// `lower > 0` is.
pub fn is_null_certified<Sp: ElementarySpace>(
    f: &SeriesFunction<Sp>,
    eps: &Sp::Scalar,
) -> Result<NullCertificate<Sp::Scalar>> {
    is_null_certified_with(f, eps, DEFAULT_BUDGET)
}

pub fn is_null_certified_with<Sp: ElementarySpace>(
    f: &SeriesFunction<Sp>,
    eps: &Sp::Scalar,
    budget: usize,
) -> Result<NullCertificate<Sp::Scalar>> {
    require_positive("tolerance", eps)?;
    let half = eps.clone() * Sp::Scalar::half();
    let start = match f.refinement_for(&half, budget) {
        Ok(k) => k,
        Err(Error::BudgetExhausted { .. }) => budget,
        Err(e) => return Err(e),
    };
    let mut best = f.norm_enclosure_at(start);
    let mut best_k = start;
    let mut lower = best.lo.clone();
    for k in start + 1..=start + SCAN_WINDOW {
        if best.hi <= *eps {
            break;
        }
        let e = f.norm_enclosure_at(k);
        if e.lo > lower {
            lower = e.lo.clone();
        }
        if e.hi < best.hi {
            best = e;
            best_k = k;
        }
    }
    Ok(NullCertificate {
        certified: best.hi <= *eps,
        exact: best.hi.is_zero(),
        refinement: best_k,
        upper: best.hi,
        lower,
    })
}

/// Null test of `F - G`.
pub fn equal_ae_certified<Sp: ElementarySpace>(
    f: &SeriesFunction<Sp>,
    g: &SeriesFunction<Sp>,
    eps: &Sp::Scalar,
) -> Result<NullCertificate<Sp::Scalar>> {
    is_null_certified(&series_add(f, &series_neg(g))?, eps)
}

/// For a null `f` and `|g| <= |f|`, the representation `g ~ |f| + |f| + ...`.
///
/// Every partial sum `k|f|` has zero norm, so the result is exactly null.
pub fn null_dominated<Sp: ElementarySpace>(
    space: &Sp,
    f: &Sp::Elem,
    g: &Sp::Elem,
) -> Result<SeriesFunction<Sp>> {
    if !space.le(&space.abs(g), &space.abs(f)) {
        return Err(Error::Unsupported("|g| <= |f| does not hold".into()));
    }
    Ok(SeriesFunction::from_generator(space, RepeatNull::new(space, f)?))
}
