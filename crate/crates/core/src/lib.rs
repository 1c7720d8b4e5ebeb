//! Finite-blocklength distortion bounds for lossy source coding.
//!
//! Three source families are covered: the binary symmetric source, the
//! binary non-symmetric source and the i.i.d. Gaussian source. For each,
//! the crate computes the asymptotic rate-distortion point, a lower bound
//! on the best size-`Q` codebook's distortion at blocklength `n`, and one
//! or more upper bounds achieved by random codebooks. Exact enumeration and
//! Monte-Carlo experiments in [`mc`] check the bounds on small instances.

pub mod bns;
pub mod bss;
pub mod curve;
pub mod error;
pub mod gauss;
pub mod geometry;
pub mod mc;
pub mod numeric;
pub mod rd;

pub use error::{Error, Result};

/// A bound value together with a flag marking parameter choices where the
/// underlying theorem degenerates (for example a budget above 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub degenerate: bool,
}

impl Bound {
    pub fn exact(value: f64) -> Self {
        Bound {
            value,
            degenerate: false,
        }
    }
}
