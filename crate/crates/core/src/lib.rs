//! Canonical first-order systems `J u' + (q - lambda w) u = w f` whose
//! coefficients are real symmetric 2x2 matrix measures made of point masses
//! and piecewise-constant densities on a bounded interval.

pub mod error;
pub mod numeric;
pub mod problem;
pub mod propagation;
pub mod classification;
pub mod relations;
pub mod boundary;
pub mod kvn;
pub mod spectra;
pub mod corpus;
pub mod selftest;

pub use error::{Error, Result};
