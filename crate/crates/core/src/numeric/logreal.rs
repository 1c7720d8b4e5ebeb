//! Nonnegative reals stored by their natural logarithm.

use std::cmp::Ordering;
use std::f64::consts::LN_2;
use std::fmt;
use std::ops::{Add, Div, Mul};

/// A nonnegative real `x` stored as `ln x`. Exact zero is `ln x = -inf`.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
pub struct LogReal(f64);

impl LogReal {
    pub const ZERO: LogReal = LogReal(f64::NEG_INFINITY);
    pub const ONE: LogReal = LogReal(0.0);

    /// Wraps a logarithm. `ln` must not be NaN or `+inf`.
    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan() && ln != f64::INFINITY, "bad log value {ln}");
        LogReal(ln)
    }

    pub fn new(x: f64) -> Self {
        debug_assert!(x >= 0.0, "LogReal::new({x})");
        LogReal(x.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn log2(self) -> f64 {
        self.0 / LN_2
    }

    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn powf(self, e: f64) -> Self {
        if e == 0.0 {
            return LogReal::ONE;
        }
        if self.is_zero() {
            return if e > 0.0 {
                LogReal::ZERO
            } else {
                LogReal(f64::INFINITY)
            };
        }
        LogReal(self.0 * e)
    }

    pub fn recip(self) -> Self {
        LogReal(-self.0)
    }

    /// `self - other`, or `None` when the difference would be negative.
    pub fn checked_sub(self, other: LogReal) -> Option<LogReal> {
        match self.0.partial_cmp(&other.0) {
            Some(Ordering::Less) => None,
            Some(Ordering::Equal) => Some(LogReal::ZERO),
            _ if other.is_zero() => Some(self),
            _ => Some(LogReal(self.0 + ln_1m_exp(other.0 - self.0))),
        }
    }

    /// `max(self - other, 0)`.
    pub fn saturating_sub(self, other: LogReal) -> LogReal {
        self.checked_sub(other).unwrap_or(LogReal::ZERO)
    }

    pub fn max(self, other: LogReal) -> LogReal {
        if self.0 >= other.0 {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: LogReal) -> LogReal {
        if self.0 <= other.0 {
            self
        } else {
            other
        }
    }
}

impl fmt::Debug for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogReal(ln={})", self.0)
    }
}

impl Add for LogReal {
    type Output = LogReal;
    fn add(self, rhs: LogReal) -> LogReal {
        LogReal(ln_add_exp(self.0, rhs.0))
    }
}

impl Mul for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: LogReal) -> LogReal {
        if self.is_zero() || rhs.is_zero() {
            LogReal::ZERO
        } else {
            LogReal(self.0 + rhs.0)
        }
    }
}

impl Div for LogReal {
    type Output = LogReal;
    // Division is subtraction of logarithms.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: LogReal) -> LogReal {
        if self.is_zero() {
            LogReal::ZERO
        } else {
            LogReal(self.0 - rhs.0)
        }
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 - e^d)` for `d <= 0`, accurate near both ends.
pub fn ln_1m_exp(d: f64) -> f64 {
    if d >= 0.0 {
        return f64::NEG_INFINITY;
    }
    if d > -LN_2 {
        (-d.exp_m1()).ln()
    } else {
        (-d.exp()).ln_1p()
    }
}

/// Running log-sum-exp with a rescaled linear accumulator.
#[derive(Clone, Copy, Debug)]
pub struct LogSum {
    max: f64,
    acc: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            acc: 0.0,
        }
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_ln(&mut self, ln: f64) {
        if ln == f64::NEG_INFINITY {
            return;
        }
        if ln <= self.max {
            self.acc += (ln - self.max).exp();
        } else {
            self.acc = self.acc * (self.max - ln).exp() + 1.0;
            self.max = ln;
        }
    }

    pub fn push(&mut self, x: LogReal) {
        self.push_ln(x.0);
    }

    pub fn total(&self) -> LogReal {
        if self.max == f64::NEG_INFINITY {
            LogReal::ZERO
        } else {
            LogReal(self.max + self.acc.ln())
        }
    }
}

/// Log of the sum of the represented values. The empty sum is exact zero.
pub fn log_sum<I: IntoIterator<Item = LogReal>>(terms: I) -> LogReal {
    let mut s = LogSum::new();
    for t in terms {
        s.push(t);
    }
    s.total()
}
