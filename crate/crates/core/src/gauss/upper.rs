//! Ordered-statistics upper bounds with the origin as fallback codeword.
//!
//! Source words with `‖x‖² <= n(σ² + δ)` are charged
//! `min(‖x‖²/n, t_x)`, where `t_x` is the distortion at which a random
//! codeword lands within reach with probability `ln(1/ε)/(Q - 2)`.
//! Everything else is charged `‖x‖²/n`, plus `ε` times the mean distortion
//! of a random codeword.

use crate::bss::ln_q_minus;
use crate::error::domain;
use crate::geometry::{ln_prob_intersect, BallPair};
use crate::numeric::{
    chi2_cdf, chi2_sf, find_root, integrate_on, ln_chi2_cdf, ln_gamma, ln_noncentral_chi2_cdf,
    ln_noncentral_chi2_quantile, Quadrature,
};
use crate::{Bound, Result};

use super::GaussBoundInput;

/// Half-width of the integration window around `nσ²`, in standard
/// deviations of `‖x‖²`.
const WINDOW_SDS: f64 = 12.0;

fn check(inp: &GaussBoundInput) -> Result<()> {
    inp.validate()?;
    if inp.ln_q() <= 3f64.ln() - 1e-12 {
        return domain(format!("need Q >= 3, have Q = {}", inp.ln_q().exp()));
    }
    Ok(())
}

/// `ln(ln(1/ε) / (Q - 2))`.
fn ln_budget(inp: &GaussBoundInput) -> f64 {
    (1.0 / inp.eps).ln().ln() - ln_q_minus(inp.ln_q(), 2.0)
}

/// Log density of `‖x‖²` at `x`.
fn ln_norm_sq_density(n: u32, sigma2: f64, x: f64) -> f64 {
    let h = 0.5 * n as f64;
    let u = x / sigma2;
    (h - 1.0) * u.ln() - 0.5 * u - h * std::f64::consts::LN_2 - ln_gamma(h) - sigma2.ln()
}

/// Breakpoints over `[0, n(σ² + δ)]` that isolate the bulk of `‖x‖²`.
fn radial_points(inp: &GaussBoundInput) -> Vec<f64> {
    let nf = inp.n as f64;
    let end = nf * (inp.sigma2 + inp.delta);
    let sd = inp.sigma2 * (2.0 * nf).sqrt();
    let mut pts = vec![0.0];
    for p in [
        nf * inp.sigma2 - WINDOW_SDS * sd,
        nf * inp.sigma2,
        nf * inp.sigma2 + WINDOW_SDS * sd,
    ] {
        if p > 0.0 && p < end {
            pts.push(p);
        }
    }
    pts.push(end);
    pts
}

/// `E[‖x‖²/n; ‖x‖² > n(σ² + δ)] = σ² (1 - Υ_{n+2}(n(σ² + δ)/σ²))`.
fn outer_tail(inp: &GaussBoundInput) -> f64 {
    let nf = inp.n as f64;
    inp.sigma2 * chi2_sf(nf + 2.0, nf * (inp.sigma2 + inp.delta) / inp.sigma2)
}

fn assemble(
    inp: &GaussBoundInput,
    per_x: impl FnMut(f64) -> f64,
    eps_term: f64,
    cfg: &Quadrature,
) -> f64 {
    let n = inp.n;
    let mut per_x = per_x;
    let body = integrate_on(
        |x| {
            if x <= 0.0 {
                return 0.0;
            }
            let ld = ln_norm_sq_density(n, inp.sigma2, x);
            if ld < -745.0 {
                return 0.0;
            }
            ld.exp() * per_x(x)
        },
        &radial_points(inp),
        cfg,
    );
    body.value + outer_tail(inp) + eps_term
}

/// Unbounded codebook: `y ~ N(0, (σ² - D) I_n)` and `t_x` from the
/// noncentral chi-squared quantile.
pub fn upper_bound_unbounded(inp: &GaussBoundInput) -> Result<Bound> {
    check(inp)?;
    let nf = inp.n as f64;
    let gap = inp.sigma2 - inp.dstar();
    let lb = ln_budget(inp);
    let degenerate = lb >= 0.0;
    let per_x = |x: f64| {
        let lam = x / gap;
        // t_x >= ‖x‖²/n exactly when the budget is not yet spent at λ.
        if degenerate || ln_noncentral_chi2_cdf(nf, lam, lam) <= lb {
            return x / nf;
        }
        match ln_noncentral_chi2_quantile(nf, lam, lb) {
            Ok(theta) => (gap * theta / nf).min(x / nf),
            Err(_) => x / nf,
        }
    };
    let eps_term = inp.eps * (2.0 * inp.sigma2 - inp.dstar());
    let value = assemble(inp, per_x, eps_term, &Quadrature::default().scaled(10.0));
    Ok(Bound { value, degenerate })
}

/// `P(‖y - x‖ <= t)` for `‖x‖ = s`, with `y` drawn from the codeword law:
/// `N(0, (σ² - D) I_n)`, truncated to `‖y‖ <= R_m` when bounded.
pub fn threshold_prob(s: f64, t: f64, inp: &GaussBoundInput) -> f64 {
    ln_threshold_prob(s, t, inp, &Quadrature::default()).exp()
}

fn ln_threshold_prob(s: f64, t: f64, inp: &GaussBoundInput, cfg: &Quadrature) -> f64 {
    let nf = inp.n as f64;
    let gap = inp.sigma2 - inp.dstar();
    if t <= 0.0 {
        return f64::NEG_INFINITY;
    }
    match inp.rm {
        None => ln_noncentral_chi2_cdf(nf, s * s / gap, t * t / gap),
        Some(rm) => {
            if rm + t <= s {
                return f64::NEG_INFINITY;
            }
            let bp = BallPair {
                dim: inp.n,
                r0: rm,
                c1: s,
                r1: t,
                sigma2: gap,
            };
            (ln_prob_intersect(&bp, cfg) - ln_chi2_cdf(nf, rm * rm / gap)).min(0.0)
        }
    }
}

/// Bounded codebook: codewords from the optimal law truncated to the ball
/// `‖y‖ <= R_m`, and `t_x` found by bisection on the exact intersection mass.
pub fn upper_bound_bounded(inp: &GaussBoundInput) -> Result<Bound> {
    check(inp)?;
    let Some(rm) = inp.rm else {
        return domain("bounded upper bound needs a codeword norm bound");
    };
    let nf = inp.n as f64;
    let gap = inp.sigma2 - inp.dstar();
    let lb = ln_budget(inp);
    let degenerate = lb >= 0.0;
    let cfg = Quadrature::default().scaled(10.0);
    let per_x = |x: f64| {
        let s = x.sqrt();
        if degenerate || ln_threshold_prob(s, s, inp, &cfg) <= lb {
            return x / nf;
        }
        let lo = (s - rm).max(0.0);
        let g = |t: f64| ln_threshold_prob(s, t, inp, &cfg) - lb;
        match find_root(g, lo, s, 1e-10 * s) {
            Ok(t) => (t * t / nf).min(x / nf),
            Err(_) => x / nf,
        }
    };
    let u = rm * rm / gap;
    let truncated_moment = gap * chi2_cdf(nf + 2.0, u) / chi2_cdf(nf, u);
    let eps_term = inp.eps * (inp.sigma2 + truncated_moment);
    let value = assemble(inp, per_x, eps_term, &cfg);
    Ok(Bound { value, degenerate })
}

/// Dispatches on whether the codebook is bounded.
pub fn upper_bound(inp: &GaussBoundInput) -> Result<Bound> {
    match inp.rm {
        Some(_) => upper_bound_bounded(inp),
        None => upper_bound_unbounded(inp),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: u32) -> GaussBoundInput {
        GaussBoundInput::new(n, 0.5, 1.0).unwrap()
    }

    #[test]
    fn outer_tail_matches_moment_identity() {
        // ∫_a^∞ x f(x) dx / n for chi-squared with n = 100, σ² = 1, a = 150
        let inp = unit(100);
        let f = |x: f64| x * ln_norm_sq_density(100, 1.0, x).exp() / 100.0;
        let want = crate::numeric::integrate(f, 150.0, 600.0, &Quadrature::default()).value;
        assert!(
            (outer_tail(&inp) - want).abs() < 1e-12,
            "{} vs {want}",
            outer_tail(&inp)
        );
    }

    #[test]
    fn concentric_threshold_prob() {
        let inp = unit(6).with_alpha(0.5).unwrap();
        let rm = inp.rm.unwrap();
        for t in [0.5, 1.0, rm] {
            let want = chi2_cdf(6.0, t * t / 0.5) / chi2_cdf(6.0, rm * rm / 0.5);
            assert!((threshold_prob(0.0, t, &inp) - want).abs() < 1e-12);
        }
        assert_eq!(threshold_prob(rm + 1.0, 0.9, &inp), 0.0);
    }

    #[test]
    fn sandwich_and_large_ball_limit() {
        let inp = unit(20);
        let up = upper_bound_unbounded(&inp).unwrap();
        assert!(!up.degenerate);
        let lo = super::super::lower_bound(&inp).unwrap();
        assert!(up.value >= lo, "{} < {lo}", up.value);
        let wide = upper_bound_bounded(&inp.with_alpha(40.0).unwrap()).unwrap();
        assert!(
            (wide.value - up.value).abs() < 1e-6,
            "{} vs {}",
            wide.value,
            up.value
        );
    }

    #[test]
    fn rejects_tiny_codebooks() {
        let inp = GaussBoundInput::new(2, 0.5, 1.0).unwrap();
        assert!(upper_bound_unbounded(&inp).is_err());
    }
}
