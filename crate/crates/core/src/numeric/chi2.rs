//! Central and noncentral chi-squared distributions.
//!
//! `Υ_n(x)` is the CDF at `x` with `n` degrees of freedom; `Υ_n(x, λ)` adds
//! noncentrality `λ`. Degrees of freedom may be any positive real, which
//! lets callers use `n + 2` for second-moment identities.

use super::logreal::{ln_1m_exp, ln_add_exp, LogSum};
use super::root::find_root;
use super::special::{ln_gamma_prefactor, ln_inc_gamma, norm_cdf};
use crate::error::{domain, Result};

/// Above this `n + λ` the Poisson series is replaced by Sankaran's normal
/// approximation (absolute error around 1e-6).
pub const SANKARAN_SWITCH: f64 = 1e5;

pub fn chi2_cdf(n: f64, x: f64) -> f64 {
    ln_chi2_cdf(n, x).exp()
}

pub fn chi2_sf(n: f64, x: f64) -> f64 {
    ln_chi2_sf(n, x).exp()
}

pub fn ln_chi2_cdf(n: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    ln_inc_gamma(0.5 * n, 0.5 * x).0
}

pub fn ln_chi2_sf(n: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    ln_inc_gamma(0.5 * n, 0.5 * x).1
}

/// `ln(Υ_n(b) - Υ_n(a))` for `0 <= a <= b`, using whichever tail keeps
/// the difference well conditioned.
pub fn ln_chi2_mass(n: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return f64::NEG_INFINITY;
    }
    if a <= 0.0 {
        return ln_chi2_cdf(n, b);
    }
    if a < n {
        let hi = ln_chi2_cdf(n, b);
        hi + ln_1m_exp(ln_chi2_cdf(n, a) - hi)
    } else {
        let lo = ln_chi2_sf(n, a);
        lo + ln_1m_exp(ln_chi2_sf(n, b) - lo)
    }
}

pub fn noncentral_chi2_cdf(n: f64, lambda: f64, x: f64) -> f64 {
    ln_noncentral_chi2_cdf(n, lambda, x).exp()
}

fn ln_poisson(k: f64, mu: f64) -> f64 {
    ln_gamma_prefactor(k + 1.0, mu) - mu.ln()
}

/// `ln Υ_n(x, λ)`, accurate in relative terms down to the smallest
/// representable probabilities.
pub fn ln_noncentral_chi2_cdf(n: f64, lambda: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if lambda <= 0.0 {
        return ln_chi2_cdf(n, x);
    }
    if n + lambda > SANKARAN_SWITCH {
        return sankaran(n, lambda, x).ln();
    }
    let mu = 0.5 * lambda;
    let y = 0.5 * x;
    let ln_mu = mu.ln();
    let ln_y = y.ln();
    let mode = mu.floor();
    let lw_mode = ln_poisson(mode, mu);

    // Past this index the remaining Poisson mass is below e^-41 of the
    // modal weight; P(a, y) only shrinks with a, so the tail is negligible.
    let mut k_hi = mode;
    let mut lw = lw_mode;
    loop {
        k_hi += 1.0;
        lw += ln_mu - k_hi.ln();
        if lw < lw_mode - 41.0 {
            break;
        }
    }

    // Walk down from k_hi with P(a-1, y) = P(a, y) + y^{a-1} e^{-y} / Γ(a).
    let mut a = 0.5 * n + k_hi;
    let mut lw = ln_poisson(k_hi, mu);
    let mut lp = ln_inc_gamma(a, y).0;
    let mut lt = ln_gamma_prefactor(a, y) - ln_y;
    let mut sum = LogSum::new();
    let mut prev = lw + lp;
    sum.push_ln(prev);
    let mut k = k_hi;
    while k > 0.0 {
        lp = ln_add_exp(lp, lt);
        a -= 1.0;
        lt += a.ln() - ln_y;
        lw += k.ln() - ln_mu;
        k -= 1.0;
        let term = lw + lp;
        sum.push_ln(term);
        // Below the mode the Poisson ratio k/μ keeps falling, so once the
        // terms decay geometrically and are negligible we can stop.
        if k < mode && term < sum.total().ln() - 46.0 && term - prev < -0.7 {
            break;
        }
        prev = term;
    }
    sum.total().ln().min(0.0)
}

/// Sankaran's cube-root style normal approximation.
fn sankaran(n: f64, lambda: f64, x: f64) -> f64 {
    let s = n + lambda;
    let s2 = n + 2.0 * lambda;
    let h = 1.0 - 2.0 / 3.0 * s * (n + 3.0 * lambda) / (s2 * s2);
    let p = s2 / (s * s);
    let m = (h - 1.0) * (1.0 - 3.0 * h);
    let num = (x / s).powf(h) - (1.0 + h * p * (h - 1.0 - 0.5 * (2.0 - h) * m * p));
    let den = h * (2.0 * p).sqrt() * (1.0 + 0.5 * m * p);
    norm_cdf(num / den)
}

pub fn noncentral_chi2_quantile(n: f64, lambda: f64, p0: f64) -> Result<f64> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return domain(format!("quantile probability {p0} outside (0, 1)"));
    }
    ln_noncentral_chi2_quantile(n, lambda, p0.ln())
}

/// Quantile at probability `e^{ln_p0}`; accepts probabilities far below the
/// double range of `p0` itself.
pub fn ln_noncentral_chi2_quantile(n: f64, lambda: f64, ln_p0: f64) -> Result<f64> {
    if !(ln_p0 < 0.0) || ln_p0 == f64::NEG_INFINITY {
        return domain(format!(
            "quantile log-probability {ln_p0} outside (-inf, 0)"
        ));
    }
    let g = |x: f64| ln_noncentral_chi2_cdf(n, lambda, x) - ln_p0;
    let mut hi = (n + lambda).max(1.0);
    let mut lo;
    if g(hi) < 0.0 {
        loop {
            lo = hi;
            hi *= 2.0;
            if g(hi) >= 0.0 {
                break;
            }
            if hi > 1e300 {
                return Ok(hi);
            }
        }
    } else {
        lo = 0.5 * hi;
        while g(lo) >= 0.0 {
            hi = lo;
            lo *= 0.5;
            if lo < 1e-300 {
                return Ok(lo);
            }
        }
    }
    let u = find_root(|u| g(u.exp()), lo.ln(), hi.ln(), 1e-14)?;
    Ok(u.exp())
}
