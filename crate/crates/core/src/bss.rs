//! Bounds for the binary symmetric source under Hamming distortion.
//!
//! Everything that scales like `2^{±n}` is carried as a logarithm. `Q` is
//! the real number `2^{nR}` even when `nR` is not an integer.

use std::f64::consts::LN_2;

use crate::error::{domain, Result};
use crate::numeric::{inverse_binary_entropy, ln_add_exp, ln_choose, LogReal, LogSum};
use crate::Bound;

/// Relative slack when comparing a cumulative count against its target,
/// so exact ties computed in floating point land on the intended side.
const TIE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BssBoundInput {
    pub n: u32,
    pub rate: f64,
}

impl BssBoundInput {
    pub fn new(n: u32, rate: f64) -> Result<Self> {
        if n < 1 {
            return domain("blocklength must be at least 1");
        }
        if !(rate > 0.0 && rate < 1.0) {
            return domain(format!("BSS rate {rate} outside (0, 1)"));
        }
        Ok(BssBoundInput { n, rate })
    }

    pub fn ln_q(&self) -> f64 {
        self.n as f64 * self.rate * LN_2
    }
}

/// `ln(Q - 1)` for `Q = e^{ln_q} > 1`.
pub(crate) fn ln_q_minus(ln_q: f64, k: f64) -> f64 {
    ln_q + (-k * (-ln_q).exp()).ln_1p()
}

/// `(Q - 1) ln(1 - 1/Q)`, which tends to -1 as `Q` grows.
pub(crate) fn q_power_exponent(ln_q: f64) -> f64 {
    let u = (-ln_q).exp();
    if u == 0.0 {
        -1.0
    } else {
        (1.0 - u) * ((-u).ln_1p() / u)
    }
}

/// `(D, α)` of the lower bound: `D` is the largest radius whose open
/// Hamming ball has at most `2^{n(1-R)}` points and `α ∈ [0, 1)` is the
/// fraction of the next shell needed to reach that count.
pub fn lower_threshold(inp: &BssBoundInput) -> (u32, f64) {
    let n = inp.n as u64;
    let ln_t = inp.n as f64 * (1.0 - inp.rate) * LN_2;
    let mut cum = f64::NEG_INFINITY;
    for d in 0..=n {
        let next = ln_add_exp(cum, ln_choose(n, d));
        if next > ln_t + TIE {
            let rest = LogReal::from_ln(ln_t).saturating_sub(LogReal::from_ln(cum));
            let alpha = (rest.ln() - ln_choose(n, d)).exp().clamp(0.0, 1.0);
            return (d as u32, alpha);
        }
        cum = next;
    }
    // 2^{n(1-R)} < 2^n, so the loop always returns.
    unreachable!("ball count never exceeded 2^(n(1-R))")
}

/// Lower bound: the mean Hamming distance over the `2^n / Q` words closest
/// to a codeword, which no size-`Q` codebook can beat.
pub fn lower_bound(inp: &BssBoundInput) -> f64 {
    let n = inp.n as u64;
    let (d, _) = lower_threshold(inp);
    let ln_t = inp.n as f64 * (1.0 - inp.rate) * LN_2;
    let nf = inp.n as f64;
    let mut s = LogSum::new();
    let mut cum = f64::NEG_INFINITY;
    for j in 0..d as u64 {
        let lc = ln_choose(n, j);
        cum = ln_add_exp(cum, lc);
        if j > 0 {
            s.push_ln(lc + (j as f64 / nf).ln());
        }
    }
    if d > 0 {
        let rest = LogReal::from_ln(ln_t).saturating_sub(LogReal::from_ln(cum));
        s.push_ln(rest.ln() + (d as f64 / nf).ln());
    }
    (s.total().ln() - ln_t).exp().min(0.5)
}

/// `t_ε`: the smallest `t` with `P(dist <= t) >= ln(1/ε)/(Q-1)` for a
/// uniform codeword. The flag is set when the budget exceeds 1.
pub fn os_threshold(inp: &BssBoundInput, eps: f64) -> (u32, bool) {
    let n = inp.n as u64;
    let ln_b = (1.0 / eps).ln().ln() - ln_q_minus(inp.ln_q(), 1.0);
    if ln_b > 0.0 || inp.ln_q() <= 0.0 {
        return (inp.n, true);
    }
    let ln_2n = inp.n as f64 * LN_2;
    let mut cum = f64::NEG_INFINITY;
    for t in 0..=n {
        cum = ln_add_exp(cum, ln_choose(n, t));
        if cum - ln_2n >= ln_b - TIE {
            return (t as u32, false);
        }
    }
    (inp.n, true)
}

/// Ordered-statistics upper bound `(1-ε) t_ε / n + ε/2`.
pub fn upper_bound_os(inp: &BssBoundInput, eps: f64) -> Result<Bound> {
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("eps {eps} outside (0, 1)"));
    }
    let (t, degenerate) = os_threshold(inp, eps);
    Ok(Bound {
        value: (1.0 - eps) * t as f64 / inp.n as f64 + 0.5 * eps,
        degenerate,
    })
}

/// Crossover of the reference test channel at rate `R0`.
pub fn reference_crossover(ref_rate: f64) -> Result<f64> {
    inverse_binary_entropy(1.0 - ref_rate)
}

/// `(D, l)` for the reference-rate bound: `½ Σ_{j<D} C(n,j) + l C(n,D)`
/// equals `2^n B̃` with `B̃ = (1/2Q)((Q-1)/Q)^{Q-1}` and `0 <= l < ½`.
pub fn rr_threshold(inp: &BssBoundInput) -> (u32, f64) {
    let n = inp.n as u64;
    let ln_q = inp.ln_q();
    let ln_m = inp.n as f64 * LN_2 - LN_2 - ln_q + q_power_exponent(ln_q);
    let mut half_cum = f64::NEG_INFINITY;
    for d in 0..=n {
        let lc = ln_choose(n, d);
        let next = ln_add_exp(half_cum, lc - LN_2);
        if next > ln_m + TIE {
            let rest = LogReal::from_ln(ln_m).saturating_sub(LogReal::from_ln(half_cum));
            return (d as u32, (rest.ln() - lc).exp().clamp(0.0, 0.5));
        }
        half_cum = next;
    }
    unreachable!("B̃ < 1/(2Q) keeps the target below 2^(n-1)")
}

/// Reference-rate upper bound: a rate-`R` random codebook plus one word
/// drawn from the rate-`R0` optimal test channel.
pub fn upper_bound_rr(inp: &BssBoundInput, ref_rate: f64) -> Result<f64> {
    if !(ref_rate > 0.0 && ref_rate < inp.rate) {
        return domain(format!(
            "reference rate {ref_rate} outside (0, {})",
            inp.rate
        ));
    }
    let p = reference_crossover(ref_rate)?;
    let n = inp.n as u64;
    let (d, l) = rr_threshold(inp);
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let term = |j: u64| ln_choose(n, j) + j as f64 * lp + (n - j) as f64 * lq;
    let mut s = LogSum::new();
    for j in 0..d as u64 {
        s.push_ln(term(j) - LN_2);
    }
    if l > 0.0 {
        s.push_ln(term(d as u64) + l.ln());
    }
    Ok(p + s.total().value())
}

/// The older reference-rate bound `D0* + 2^{-(R - R0 - ε) n}`.
pub fn upper_bound_legacy(inp: &BssBoundInput, ref_rate: f64, eps_rate: f64) -> Result<f64> {
    if !(ref_rate > 0.0 && ref_rate < inp.rate) {
        return domain(format!(
            "reference rate {ref_rate} outside (0, {})",
            inp.rate
        ));
    }
    if !(eps_rate > 0.0 && eps_rate < inp.rate - ref_rate) {
        return domain(format!(
            "legacy eps {eps_rate} must lie in (0, R - R0 = {})",
            inp.rate - ref_rate
        ));
    }
    let d0 = reference_crossover(ref_rate)?;
    Ok(d0 + (-(inp.rate - ref_rate - eps_rate) * inp.n as f64 * LN_2).exp())
}
