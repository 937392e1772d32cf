//! Exact verification of Riemann-Roch type identities for morphisms of
//! oriented cohomology theories on products of projective spaces.
//!
//! Two model theories are implemented, the Chow ring and K-theory, over
//! coefficients in `Q[e]/(e^p)`. Every check is an exact equality of
//! truncated polynomials; a failing check reports its residual.

pub mod classes;
pub mod cli;
pub mod coeff;
pub mod model;
mod render;
pub mod report;
pub mod rr;
pub mod series;

pub use coeff::{integrality_profile, Coefficient, Integrality, IntegralityVerdict};
pub use model::{LineClass, MorphismDesc, Space, Theory, TheoryRing, TruncatedPolynomial, VirtualBundle};
pub use report::VerificationReport;
pub use series::{BivariateSeries, BuiltinSeries, GroupLaw, UnivariateSeries};
