//! Log-gamma, Stirling remainders and the regularized incomplete gamma and
//! beta functions, all with log-domain entry points.

use super::logreal::ln_1m_exp;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
// Series and continued fractions need O(sqrt(a)) terms near the transition
// point; this covers shape parameters far beyond 1e6.
const MAX_ITER: usize = 100_000;

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln Γ(a) - [(a - 1/2) ln a - a + ln √(2π)]`, the Stirling remainder.
pub fn stirlerr(a: f64) -> f64 {
    if a < 15.0 {
        return ln_gamma(a) - ((a - 0.5) * a.ln() - a + HALF_LN_2PI);
    }
    let r = 1.0 / a;
    let r2 = r * r;
    // 1/(12a) - 1/(360a^3) + 1/(1260a^5) - 1/(1680a^7) + 1/(1188a^9)
    r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))))
}

/// `a ln x - x - ln Γ(a)`, the log of the incomplete gamma prefactor.
///
/// For large `a` the leading terms are recombined through `ln_1p` so that
/// the cancellation between `a ln x` and `ln Γ(a)` does not eat the result.
pub fn ln_gamma_prefactor(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    if a < 15.0 {
        return a * x.ln() - x - ln_gamma(a);
    }
    let t = (x - a) / a;
    a * (t.ln_1p() - t) + 0.5 * a.ln() - HALF_LN_2PI - stirlerr(a)
}

/// Returns `(ln P(a,x), ln Q(a,x))` for the regularized incomplete gamma.
pub fn ln_inc_gamma(a: f64, x: f64) -> (f64, f64) {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    if x == f64::INFINITY {
        return (0.0, f64::NEG_INFINITY);
    }
    let pre = ln_gamma_prefactor(a, x);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term < sum * EPS {
                break;
            }
        }
        let lp = pre + sum.ln();
        (lp, ln_1m_exp(lp.min(0.0)))
    } else {
        // Modified Lentz evaluation of the continued fraction for Q.
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        let lq = pre + h.ln();
        (ln_1m_exp(lq.min(0.0)), lq)
    }
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln I_x(a, b)`, taking `y = 1 - x` separately so callers can supply an
/// accurate complement.
pub fn ln_inc_beta(a: f64, b: f64, x: f64, y: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0 && (0.0..=1.0).contains(&x));
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if y <= 0.0 {
        return 0.0;
    }
    let front = a * x.ln() + b * y.ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        front + beta_cf(a, b, x).ln() - a.ln()
    } else {
        let lc = front + beta_cf(b, a, y).ln() - b.ln();
        ln_1m_exp(lc.min(0.0))
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Standard normal CDF.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}


/// Inverse of `t ↦ t - 1 + e^{-t}` on `t >= 0`.
pub fn exp_gap_inverse(mu: f64) -> f64 {
    debug_assert!(mu >= 0.0);
    if mu <= 0.0 {
        return 0.0;
    }
    if mu > 40.0 {
        // t = μ + 1 - e^{-t}, and e^{-t} is below an ulp of t here.
        return mu + 1.0 - (-(mu + 1.0)).exp();
    }
    // t ∈ [μ, μ + 1] since 0 <= 1 - e^{-t} <= 1.
    let g = |t: f64| t + (-t).exp_m1() - mu;
    super::root::find_root(g, mu, mu + 1.0, 0.0).expect("bracket [mu, mu+1] always changes sign")
}
