//! Exact Daniell integration.
//!
//! Elementary functions (simple functions over semi-open boxes, finitely
//! supported sequences, functions on finite weighted sets) are extended to
//! their complete Daniell space through absolutely convergent series with
//! certified tail bounds. Integrals, norms and point values of the limit are
//! reported as exact rational enclosures.
//!
//! All numeric code is generic over [`Scalar`]; the aliases below fix it to
//! arbitrary-precision rationals, which is what the harness and CLI use.

pub mod boxes;
pub mod completion;
pub mod error;
pub mod harness;
pub mod measure;
pub mod report;
pub mod scalar;
pub mod simple;
pub mod space;

pub use boxes::{box_diff, common_grid, intersect, is_finite_partition, measure, BoxSet, HyperBox};
pub use completion::{EvalResult, IntegralEnclosure, NullCertificate, SeriesFunction, TailModel};
pub use error::{Error, Result};
pub use report::{CheckReport, Verdict};
pub use scalar::Scalar;
pub use simple::{Combine, SimpleFunction};
pub use space::{
    axioms_probe, BoxSpace, CountingSpace, ElementarySpace, FiniteSpace, FiniteSpaceFn,
    SeqFunction,
};

/// Arbitrary-precision rational, the default scalar.
pub type Rational = num_rational::BigRational;

/// Fixed-width rational. Overflow panics; fine for small test instances.
pub type Rational64 = num_rational::Ratio<i64>;

pub type QBox = HyperBox<Rational>;
pub type QBoxSet = BoxSet<Rational>;
pub type QSimple = SimpleFunction<Rational>;
pub type QBoxSpace = BoxSpace<Rational>;
pub type QCountingSpace = CountingSpace<Rational>;
pub type QFiniteSpace = FiniteSpace<Rational>;
pub type QSeries<Sp = QBoxSpace> = SeriesFunction<Sp>;
pub type QEnclosure = IntegralEnclosure<Rational>;
