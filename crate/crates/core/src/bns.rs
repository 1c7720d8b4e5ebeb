//! Bounds for the binary non-symmetric source, `P(x_i = 1) = p <= 1/2`.
//!
//! The symmetric-source constructions are applied per Hamming weight of
//! the source word: words of weight `w` see a codeword at distance `d` with
//! the law of [`weight_distance_pmf`].

use std::f64::consts::LN_2;

use crate::bss::{ln_q_minus, q_power_exponent};
use crate::error::{domain, Result};
use crate::numeric::{
    binary_entropy, binary_entropy_nats, inverse_binary_entropy, ln_choose, LogSum,
};
use crate::rd::{solve, RdParams, SourceModel};
use crate::Bound;

/// Weights whose total probability is below `e^-60` are skipped; their
/// contribution to any bound is far below double precision.
const WEIGHT_CUTOFF: f64 = -60.0;

/// Law of `n·d(x, y)` for `x` of weight `w` and `y` with i.i.d.
/// Bernoulli(`z`) coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightProfile {
    pub n: u32,
    pub w: u32,
    pub z: f64,
    pub ln_pmf: Vec<f64>,
}

impl WeightProfile {
    pub fn pmf(&self) -> Vec<f64> {
        self.ln_pmf.iter().map(|l| l.exp()).collect()
    }
}

/// Log-domain convolution of the mismatch counts on the ones of `x`
/// (Binomial(w, 1-z)) and on its zeros (Binomial(n-w, z)).
struct Convolver {
    ones: Vec<f64>,
    zeros: Vec<f64>,
}

impl Convolver {
    fn new(n: u32, w: u32, z: f64) -> Self {
        let (lz, l1z) = (z.ln(), (-z).ln_1p());
        let (w, m) = (w as u64, (n - w) as u64);
        let ones = (0..=w)
            .map(|i| ln_choose(w, i) + (w - i) as f64 * lz + i as f64 * l1z)
            .collect();
        let zeros = (0..=m)
            .map(|j| ln_choose(m, j) + j as f64 * lz + (m - j) as f64 * l1z)
            .collect();
        Convolver { ones, zeros }
    }

    fn at(&self, d: usize) -> f64 {
        let m = self.zeros.len() - 1;
        let lo = d.saturating_sub(m);
        let hi = d.min(self.ones.len() - 1);
        let mut s = LogSum::new();
        for i in lo..=hi {
            s.push_ln(self.ones[i] + self.zeros[d - i]);
        }
        s.total().ln()
    }
}

pub fn weight_distance_pmf(n: u32, w: u32, z: f64) -> Result<WeightProfile> {
    if w > n {
        return domain(format!("weight {w} exceeds n = {n}"));
    }
    if !(z > 0.0 && z < 1.0) {
        return domain(format!("marginal z = {z} outside (0, 1)"));
    }
    let c = Convolver::new(n, w, z);
    Ok(WeightProfile {
        n,
        w,
        z,
        ln_pmf: (0..=n as usize).map(|d| c.at(d)).collect(),
    })
}

fn check(n: u32, rate: f64, p: f64) -> Result<()> {
    if n < 1 {
        return domain("blocklength must be at least 1");
    }
    SourceModel::BinaryNonSymmetric { p }.validate()?;
    if !(rate > 0.0 && rate < binary_entropy(p)) {
        return domain(format!("rate {rate} outside (0, H(p))"));
    }
    Ok(())
}

fn ln_weight_mass(n: u32, w: u32, p: f64) -> f64 {
    ln_choose(n as u64, w as u64) + w as f64 * p.ln() + (n - w) as f64 * (-p).ln_1p()
}

/// `(D_T, ln K)`: the largest `D` with `Q Σ_{j<D} C(n,j) <= 2^n` and the
/// leftover count `K = 2^n - Q Σ_{j<D_T} C(n,j)`.
pub fn rank_threshold(n: u32, ln_q: f64) -> (u32, f64) {
    let ln_2n = n as f64 * LN_2;
    let mut cum = LogSum::new();
    for d in 0..=n as u64 {
        let prev = cum.total();
        cum.push_ln(ln_choose(n as u64, d));
        if ln_q + cum.total().ln() > ln_2n + 1e-12 {
            let k = crate::numeric::LogReal::from_ln(ln_2n)
                .saturating_sub(crate::numeric::LogReal::from_ln(ln_q + prev.ln()));
            return (d as u32, k.ln());
        }
    }
    (n, f64::NEG_INFINITY)
}

/// The merged-walk maximum `S = Σ a_i b_i` over sorted arrays: source word
/// masses against the codebook log-likelihood levels `ln q̂(x|y)`.
pub fn rearrangement_sum(n: u32, rate: f64, p: f64, d: f64) -> f64 {
    let ln_q = n as f64 * rate * LN_2;
    let (d_t, ln_k) = rank_threshold(n, ln_q);
    let (lp, l1p) = (p.ln(), (-p).ln_1p());
    let (ld, l1d) = (d.ln(), (-d).ln_1p());
    // (log per-element value, log multiplicity), both descending in value.
    let a: Vec<(f64, f64)> = (0..=n)
        .map(|k| {
            (
                k as f64 * lp + (n - k) as f64 * l1p,
                ln_choose(n as u64, k as u64),
            )
        })
        .collect();
    let mut b: Vec<(f64, f64)> = (0..d_t)
        .map(|i| {
            (
                i as f64 * ld + (n - i) as f64 * l1d,
                ln_q + ln_choose(n as u64, i as u64),
            )
        })
        .collect();
    if ln_k > f64::NEG_INFINITY {
        b.push((d_t as f64 * ld + (n - d_t) as f64 * l1d, ln_k));
    }
    let (mut ia, mut ib) = (0, 0);
    let (mut ra, mut rb) = (a[0].1, b[0].1);
    let mut s = 0.0;
    while ia < a.len() && ib < b.len() {
        let take = ra.min(rb);
        s += (take + a[ia].0).exp() * b[ib].0;
        if ra <= rb {
            rb = sub(rb, ra);
            ia += 1;
            if ia < a.len() {
                ra = a[ia].1;
            }
        } else {
            ra = sub(ra, rb);
            ib += 1;
            if ib < b.len() {
                rb = b[ib].1;
            }
        }
    }
    s
}

fn sub(a: f64, b: f64) -> f64 {
    crate::numeric::LogReal::from_ln(a)
        .saturating_sub(crate::numeric::LogReal::from_ln(b))
        .ln()
}

/// Lower bound from the rearrangement inequality:
/// `D* + (λ̂/n)(nR - S - n H(p))` with all information terms in nats.
pub fn lower_bound(n: u32, rate: f64, p: f64) -> Result<f64> {
    check(n, rate, p)?;
    let sol = solve(SourceModel::BinaryNonSymmetric { p }, rate)?;
    let s = rearrangement_sum(n, rate, p, sol.dstar);
    let nf = n as f64;
    let resid = nf * rate * LN_2 - (s + nf * binary_entropy_nats(p));
    Ok(sol.dstar + sol.lambda_hat / nf * resid)
}

fn marginal(p: f64, rate: f64) -> Result<f64> {
    match solve(SourceModel::BinaryNonSymmetric { p }, rate)?.params {
        RdParams::Bns { z, .. } => Ok(z),
        _ => unreachable!(),
    }
}

/// Ordered-statistics upper bound, thresholded separately per weight.
pub fn upper_bound_os(n: u32, rate: f64, p: f64, eps: f64) -> Result<Bound> {
    check(n, rate, p)?;
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("eps {eps} outside (0, 1)"));
    }
    let z = marginal(p, rate)?;
    let ln_q = n as f64 * rate * LN_2;
    let ln_b = (1.0 / eps).ln().ln() - ln_q_minus(ln_q, 1.0);
    let degenerate = ln_b > 0.0;
    let mut total = 0.0;
    for w in 0..=n {
        let lm = ln_weight_mass(n, w, p);
        if lm < WEIGHT_CUTOFF {
            continue;
        }
        let t = if degenerate {
            n
        } else {
            let c = Convolver::new(n, w, z);
            let mut cum = LogSum::new();
            let mut t = n;
            for d in 0..=n {
                cum.push_ln(c.at(d as usize));
                if cum.total().ln() >= ln_b - 1e-12 {
                    t = d;
                    break;
                }
            }
            t
        };
        let dw = (1.0 - eps) * t as f64 / n as f64 + 0.5 * eps;
        total += lm.exp() * dw;
    }
    Ok(Bound {
        value: total,
        degenerate,
    })
}

/// Distortion of the optimal test channel at reference rate `R0`.
pub fn reference_distortion(p: f64, ref_rate: f64) -> Result<f64> {
    inverse_binary_entropy((binary_entropy(p) - ref_rate).max(0.0))
}

/// Reference-rate upper bound with one extra codeword drawn from the
/// rate-`R0` optimal channel, whose backward crossover is `d0`.
pub fn upper_bound_rr(n: u32, rate: f64, p: f64, d0: f64) -> Result<f64> {
    check(n, rate, p)?;
    let dstar = solve(SourceModel::BinaryNonSymmetric { p }, rate)?.dstar;
    if !(d0 > dstar && d0 < p) {
        return domain(format!("reference distortion {d0} outside ({dstar}, {p})"));
    }
    let nf = n as f64;
    let z0 = (p - d0) / (1.0 - 2.0 * d0);
    let ln_q = nf * rate * LN_2;
    let ln_beta = -ln_q + q_power_exponent(ln_q);
    let (lp, l1p) = (p.ln(), (-p).ln_1p());
    let (ld, l1d) = (d0.ln(), (-d0).ln_1p());
    let mut total = 0.0;
    for w in 0..=n {
        let lm = ln_weight_mass(n, w, p);
        if lm < WEIGHT_CUTOFF {
            continue;
        }
        let u = z0 * (1.0 - w as f64 / nf) + (1.0 - z0) * w as f64 / nf;
        let ln_px = w as f64 * lp + (n - w) as f64 * l1p;
        let c = Convolver::new(n, w, z0);
        let mut cum = LogSum::new();
        let mut h = LogSum::new();
        for j in 0..=n {
            let lpj = c.at(j as usize);
            let ln_r = j as f64 * ld + (n - j) as f64 * l1d - ln_px;
            let next = crate::numeric::ln_add_exp(cum.total().ln(), lpj);
            if next > ln_beta {
                let rest = sub(ln_beta, cum.total().ln());
                let frac = (rest - lpj).exp().clamp(0.0, 1.0);
                if frac > 0.0 {
                    h.push_ln(frac.ln() + lpj + ln_r);
                }
                break;
            }
            cum.push_ln(lpj);
            h.push_ln(lpj + ln_r);
        }
        total += (lm + u.ln() + h.total().ln()).exp();
    }
    Ok(d0 + total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_examples() {
        let wp = weight_distance_pmf(2, 1, 0.4).unwrap().pmf();
        for (g, w) in wp.iter().zip([0.24, 0.52, 0.24]) {
            assert!((g - w).abs() < 1e-15);
        }
        let wp = weight_distance_pmf(7, 0, 0.3).unwrap().pmf();
        for (d, g) in wp.iter().enumerate() {
            let want =
                ln_choose(7, d as u64).exp() * 0.3f64.powi(d as i32) * 0.7f64.powi(7 - d as i32);
            assert!((g - want).abs() < 1e-15);
        }
        assert!(weight_distance_pmf(3, 4, 0.3).is_err());
        assert!(weight_distance_pmf(3, 1, 1.0).is_err());
    }

    #[test]
    fn lower_is_above_asymptote() {
        let dstar = solve(SourceModel::BinaryNonSymmetric { p: 0.4 }, 0.5)
            .unwrap()
            .dstar;
        for n in [4, 10, 50, 200] {
            let v = lower_bound(n, 0.5, 0.4).unwrap();
            assert!(v >= dstar - 1e-12, "n={n}: {v}");
        }
    }

    #[test]
    fn symmetric_case_matches_bss() {
        use crate::bss;
        for n in [8u32, 16, 32] {
            let inp = bss::BssBoundInput::new(n, 0.5).unwrap();
            let a = lower_bound(n, 0.5, 0.5).unwrap();
            assert!(
                (a - bss::lower_bound(&inp)).abs() < 1e-9,
                "lower n={n}: {a} vs {}",
                bss::lower_bound(&inp)
            );
            for eps in [0.005, 0.01] {
                let a = upper_bound_os(n, 0.5, 0.5, eps).unwrap().value;
                let b = bss::upper_bound_os(&inp, eps).unwrap().value;
                assert!((a - b).abs() < 1e-9, "os n={n}: {a} vs {b}");
            }
            for r0 in [0.4, 0.45] {
                let d0 = reference_distortion(0.5, r0).unwrap();
                let a = upper_bound_rr(n, 0.5, 0.5, d0).unwrap();
                let b = bss::upper_bound_rr(&inp, r0).unwrap();
                assert!((a - b).abs() < 1e-9, "rr n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rr_rejects_bad_reference() {
        assert!(upper_bound_rr(20, 0.5, 0.4, 0.05).is_err());
        assert!(upper_bound_rr(20, 0.5, 0.4, 0.45).is_err());
        let v = upper_bound_rr(20, 0.5, 0.4, 0.12).unwrap();
        assert!(v >= 0.12);
    }
}
