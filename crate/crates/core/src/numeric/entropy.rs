use std::f64::consts::LN_2;

use super::root::find_root;
use crate::error::{domain, Result};

/// Binary entropy in bits. The endpoints return exactly 0.
pub fn binary_entropy(q: f64) -> f64 {
    binary_entropy_nats(q) / LN_2
}

pub fn binary_entropy_nats(q: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&q));
    if q <= 0.0 || q >= 1.0 {
        return 0.0;
    }
    -q * q.ln() - (1.0 - q) * (-q).ln_1p()
}

/// The unique `q` in `[0, 1/2]` with `binary_entropy(q) = h`.
pub fn inverse_binary_entropy(h: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&h) {
        return domain(format!("entropy {h} outside [0, 1]"));
    }
    if h == 0.0 {
        return Ok(0.0);
    }
    if h == 1.0 {
        return Ok(0.5);
    }
    find_root(|q| binary_entropy(q) - h, 0.0, 0.5, 0.0)
}
