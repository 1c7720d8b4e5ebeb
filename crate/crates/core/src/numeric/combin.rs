use super::logreal::LogReal;
use super::special::stirlerr;
use crate::error::{domain, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln C(n, k)`.
pub fn log_binomial(n: u64, k: u64) -> Result<LogReal> {
    if k > n {
        return domain(format!("binomial k={k} exceeds n={n}"));
    }
    Ok(LogReal::from_ln(ln_choose(n, k)))
}

/// `ln C(n, k)` for `k <= n`, relative error ~1e-15.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    if k == 0 {
        return 0.0;
    }
    if n <= 120 {
        // Exact in u128: every prefix product C(n, i) * (n - i) stays below
        // 2^128 for n <= 120.
        let mut c: u128 = 1;
        for i in 0..k {
            c = c * (n - i) as u128 / (i + 1) as u128;
        }
        return (c as f64).ln();
    }
    if k <= 24 {
        let base = (n - k) as f64;
        return (1..=k).map(|i| ((base + i as f64) / i as f64).ln()).sum();
    }
    let (nf, kf) = (n as f64, k as f64);
    let mf = nf - kf;
    // ln a! = (a + 1/2) ln a - a + ln √(2π) + stirlerr(a). The k ln(n/k) +
    // m ln(n/m) part is formed with ln_1p so it keeps full relative precision.
    -kf * (kf / nf).ln() - mf * (-kf / nf).ln_1p() + 0.5 * (nf / (kf * mf)).ln() - HALF_LN_2PI
        + stirlerr(nf)
        - stirlerr(kf)
        - stirlerr(mf)
}

/// `ln n!`.
pub fn ln_factorial(n: u64) -> f64 {
    super::special::ln_gamma(n as f64 + 1.0)
}
