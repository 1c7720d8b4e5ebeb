//! Lower bound from the modified union bound over the regions `C_j(t)`.
//!
//! With `t = E(μ)` and a reference codeword at the origin,
//! `ΔD̂(μ0, r) = ∫_0^{μ0} (1 - K̃0 - Q K̃(r, ·)) + ∫_{μ0}^∞ (1 - Γ̃)` and the
//! bound is `D (1 + (2/n) sup_{μ0} inf_r ΔD̂(μ0, r))`. The `r` dependence
//! sits in one term only, so the inner inf is a max of `∫ K̃(r, ·)`.

use crate::geometry::{ln_prob_diff, ln_vol_diff, BallPair};
use crate::numeric::{
    exp_gap_inverse, golden_max, integrate, integrate_ln, ln_add_exp, ln_chi2_cdf, ln_chi2_sf,
    unit_ball_volume, Quadrature,
};
use crate::Result;

use super::{GaussBoundInput, LowerBoundGeometry};

/// `1 - Γ̃` below this is treated as zero when truncating the tail integral.
const GAMMA_TAIL: f64 = 1e-12;
const MU_GRID: usize = 48;
const MU_FLOOR: f64 = 1e-4;
/// Scan points for the per-μ maximizer.
const R_GRID: usize = 24;
/// Rows of the `(r, μ)` table.
const R_ROWS: usize = 24;
const MU_PANELS: usize = 6;

/// `K0(t) = P(C0(t)) = Υ_n(R(t, 0) / σ²)`.
pub fn k0(t: f64, inp: &GaussBoundInput) -> f64 {
    ln_k0(t, inp).exp()
}

fn ln_k0(t: f64, inp: &GaussBoundInput) -> f64 {
    let g = inp.geometry();
    ln_chi2_cdf(inp.n as f64, g.radius_sq(t, 0.0) / inp.sigma2)
}

fn ln_1m_k0(t: f64, inp: &GaussBoundInput) -> f64 {
    let g = inp.geometry();
    ln_chi2_sf(inp.n as f64, g.radius_sq(t, 0.0) / inp.sigma2)
}

fn excess_pair(g: &LowerBoundGeometry, n: u32, t: f64, rho: f64) -> BallPair {
    BallPair {
        dim: n,
        r0: g.radius_sq(t, 0.0).sqrt(),
        c1: g.scale * rho,
        r1: g.radius_sq(t, rho).sqrt(),
        sigma2: g.sigma2,
    }
}

fn ln_k_excess(t: f64, rho: f64, inp: &GaussBoundInput, cfg: &Quadrature) -> f64 {
    if rho <= 0.0 {
        return f64::NEG_INFINITY;
    }
    ln_prob_diff(&excess_pair(&inp.geometry(), inp.n, t, rho), cfg)
}

/// `K(t, ρ) = P(C_j(t) \ C0(t))` for a codeword of norm `ρ`.
pub fn k_excess(t: f64, rho: f64, inp: &GaussBoundInput) -> f64 {
    ln_k_excess(t, rho, inp, &Quadrature::default()).exp()
}

/// `ln(1 - Γ(t))`; `-∞` for unbounded codebooks.
fn ln_gamma_gap(t: f64, inp: &GaussBoundInput, cfg: &Quadrature) -> f64 {
    let Some(rm) = inp.rm else {
        return f64::NEG_INFINITY;
    };
    let g = inp.geometry();
    let n = inp.n;
    let nf = n as f64;
    let r0sq = g.radius_sq(t, 0.0);
    let ln_vn = unit_ball_volume(n).ln();
    let boundary = BallPair {
        dim: n,
        r0: r0sq.sqrt(),
        c1: g.scale * rm,
        r1: g.radius_sq(t, rm).sqrt(),
        sigma2: inp.sigma2,
    };
    let ln_v = ln_add_exp(
        ln_vn + 0.5 * nf * r0sq.ln(),
        inp.ln_q() + ln_vol_diff(&boundary, cfg),
    );
    let rn = ((ln_v - ln_vn) / nf).exp();
    let r_e = rn.min(boundary.c1 + boundary.r1);
    ln_chi2_sf(nf, r_e * r_e / inp.sigma2)
}

/// `Γ(t)`, the equal-volume ball bound on `P(∪_j C_j(t))`; 1 when unbounded.
pub fn gamma_cap(t: f64, inp: &GaussBoundInput) -> f64 {
    -ln_gamma_gap(t, inp, &Quadrature::default()).exp_m1()
}

/// `ln ∫_a^b` of `exp` of the linear interpolant through `(a, la)`, `(b, lb)`.
fn ln_seg(a: f64, b: f64, la: f64, lb: f64) -> f64 {
    if !(b > a) || (la == f64::NEG_INFINITY && lb == f64::NEG_INFINITY) {
        return f64::NEG_INFINITY;
    }
    // A vanishing endpoint is replaced by a steep but finite decay.
    let la = la.max(lb - 50.0);
    let lb = lb.max(la - 50.0);
    let d = lb - la;
    let shape = if d.abs() < 1e-8 {
        d * 0.5
    } else if d > 0.0 {
        d + (-(-d).exp_m1() / d).ln()
    } else {
        (d.exp_m1() / d).ln()
    };
    (b - a).ln() + la + shape
}

/// Running `ln ∫_{x_0}^{x_k}` of the exp-linear interpolant of `ly`.
fn ln_cumulative(x: &[f64], ly: &[f64]) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; x.len()];
    for k in 1..x.len() {
        out[k] = ln_add_exp(out[k - 1], ln_seg(x[k - 1], x[k], ly[k - 1], ly[k]));
    }
    out
}

/// `ln ∫_{x_0}^{m}` for `m` inside the grid, reusing the cumulative table.
fn ln_partial(x: &[f64], ly: &[f64], cum: &[f64], m: f64) -> f64 {
    let k = x.partition_point(|&v| v <= m).clamp(1, x.len() - 1);
    let w = ((m - x[k - 1]) / (x[k] - x[k - 1])).clamp(0.0, 1.0);
    let lm = interp(ly[k - 1], ly[k], w);
    ln_add_exp(cum[k - 1], ln_seg(x[k - 1], m, ly[k - 1], lm))
}

fn interp(a: f64, b: f64, w: f64) -> f64 {
    if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
        return if w < 0.5 { a } else { b };
    }
    a + w * (b - a)
}

/// Evaluation context shared by the nested optimizations of one bound.
struct Lower<'a> {
    inp: &'a GaussBoundInput,
    cfg: Quadrature,
    ln_q: f64,
    mu_max: f64,
    r_cap: f64,
}

impl<'a> Lower<'a> {
    fn new(inp: &'a GaussBoundInput, cfg: Quadrature) -> Self {
        let gap = inp.sigma2 - inp.dstar();
        let r_cap = match inp.rm {
            Some(rm) => rm,
            None => 10.0 * (inp.n as f64 * gap).sqrt(),
        };
        let mut ctx = Lower {
            inp,
            cfg,
            ln_q: inp.ln_q(),
            mu_max: 1.0,
            r_cap,
        };
        // Past mu_max both 1 - K̃0 and 1 - Γ̃ are negligible.
        let tail = GAMMA_TAIL.ln();
        while (ln_1m_k0(exp_gap_inverse(ctx.mu_max), inp) > tail
            || ctx.ln_gamma_gap(ctx.mu_max) > tail)
            && ctx.mu_max < 1e12
        {
            ctx.mu_max *= 2.0;
        }
        ctx
    }

    fn ln_gamma_gap(&self, mu: f64) -> f64 {
        ln_gamma_gap(exp_gap_inverse(mu), self.inp, &self.cfg)
    }

    fn ln_k(&self, r: f64, mu: f64) -> f64 {
        ln_k_excess(exp_gap_inverse(mu), r, self.inp, &self.cfg)
    }

    /// `∫_0^{μ0} (1 - K̃0)`.
    fn head(&self, mu0: f64) -> f64 {
        if mu0 <= 0.0 {
            return 0.0;
        }
        let f = |mu: f64| ln_1m_k0(exp_gap_inverse(mu), self.inp).exp();
        integrate(f, 0.0, mu0, &self.cfg).value
    }

    /// `∫_{μ0}^∞ (1 - Γ̃)`.
    fn tail(&self, mu0: f64) -> f64 {
        if self.inp.rm.is_none() || mu0 >= self.mu_max {
            return 0.0;
        }
        let f = |mu: f64| self.ln_gamma_gap(mu).exp();
        integrate(f, mu0, self.mu_max, &self.cfg).value
    }

    /// `ln ∫_0^{μ0} K̃(r, μ) dμ`.
    fn ln_excess(&self, r: f64, mu0: f64) -> f64 {
        if mu0 <= 0.0 || r <= 0.0 {
            return f64::NEG_INFINITY;
        }
        integrate_ln(|mu| self.ln_k(r, mu), &[0.0, mu0], MU_PANELS, &self.cfg)
    }

    /// Maximizer of the unimodal `r ↦ K̃(r, μ)` over `[0, r_cap]`.
    fn ridge(&self, mu: f64) -> f64 {
        let h = self.r_cap / (R_GRID - 1) as f64;
        let f = |r: f64| self.ln_k(r, mu);
        let mut best = (0, f64::NEG_INFINITY);
        for i in 1..R_GRID {
            let v = f(i as f64 * h);
            if v > best.1 {
                best = (i, v);
            }
        }
        let lo = (best.0 - 1) as f64 * h;
        let hi = (best.0 + 1).min(R_GRID - 1) as f64 * h;
        golden_max(f, lo, hi, 1e-3 * h).0
    }

    /// Exact `inf_r ΔD̂(μ0, r)` with the worst `r` searched in `[lo, hi]`.
    fn refine(&self, mu0: f64, lo: f64, hi: f64) -> (f64, f64) {
        let (r, lj) = golden_max(
            |r| self.ln_excess(r, mu0),
            lo,
            hi,
            1e-4 * (hi - lo).max(1e-6),
        );
        let union = (self.ln_q + lj).min(700.0).exp();
        (self.head(mu0) + self.tail(mu0) - union, r)
    }
}

/// `ΔD̂(μ0, r)` in nats.
pub fn delta_hat(mu0: f64, r: f64, inp: &GaussBoundInput) -> f64 {
    let ctx = Lower::new(inp, Quadrature::default());
    let union = (ctx.ln_q + ctx.ln_excess(r, mu0)).min(700.0).exp();
    ctx.head(mu0) + ctx.tail(mu0) - union
}

/// The optimizing `(μ0, r)` alongside the bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerDetail {
    pub value: f64,
    /// `sup_{μ0} inf_r ΔD̂` in nats; never negative since `μ0 = 0` is allowed.
    pub delta: f64,
    pub mu0: f64,
    pub r: f64,
}

/// Uses quadrature at `rel_tol = 1e-7`; tightening to the default moves the
/// bound by about 1e-12.
pub fn lower_bound(inp: &GaussBoundInput) -> Result<f64> {
    Ok(lower_bound_detail(inp, &Quadrature::default().scaled(10.0))?.value)
}

/// The sup–inf is located on a table of `ln K̃` over a log grid in `μ` and
/// a grid in `r` spanning the per-`μ` maximizers (the maximizer of
/// `∫ K̃(r, ·)` lies between them), then re-evaluated with full quadrature.
pub fn lower_bound_detail(inp: &GaussBoundInput, cfg: &Quadrature) -> Result<LowerDetail> {
    inp.validate()?;
    let ctx = Lower::new(inp, *cfg);
    let coarse = Lower::new(inp, cfg.scaled(100.0));
    let base = ctx.tail(0.0);
    let ratio = (ctx.mu_max / MU_FLOOR).powf(1.0 / (MU_GRID - 1) as f64);
    let mut mus = vec![0.0];
    mus.extend((0..MU_GRID).map(|i| MU_FLOOR * ratio.powi(i as i32)));

    // Ridge of the per-μ maximizers, cut where the union term is
    // already far past anything the positive terms can offset.
    let stop = (ctx.mu_max + base).ln() + 5.0;
    let mut ridge = Vec::new();
    for (k, &mu) in mus.iter().enumerate() {
        let r = coarse.ridge(mu);
        ridge.push(r);
        let lk = coarse.ln_k(r, mu);
        if k > 0 && ctx.ln_q + lk + (mu - mus[k - 1]).ln() > stop {
            break;
        }
    }
    mus.truncate(ridge.len());
    let width = (inp.sigma2 - inp.dstar()).sqrt();
    let r_lo = (ridge.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * width).max(0.0);
    let r_hi = (ridge.iter().cloned().fold(0.0, f64::max) + 2.0 * width).min(ctx.r_cap);
    let rs: Vec<f64> = (0..R_ROWS)
        .map(|i| r_lo + (r_hi - r_lo) * i as f64 / (R_ROWS - 1) as f64)
        .filter(|&r| r > 0.0)
        .collect();

    let rows: Vec<Vec<f64>> = rs
        .iter()
        .map(|&r| mus.iter().map(|&mu| coarse.ln_k(r, mu)).collect())
        .collect();
    let cums: Vec<Vec<f64>> = rows.iter().map(|row| ln_cumulative(&mus, row)).collect();
    let gaps: Vec<f64> = mus.iter().map(|&mu| coarse.ln_gamma_gap(mu)).collect();
    let gap_cum = ln_cumulative(&mus, &gaps);
    let head_fn = |mu0: f64| coarse.head(mu0);

    // Cheap surrogate of inf_r ΔD̂(μ0, r), returning the best row.
    let surrogate = |mu0: f64| -> (f64, usize) {
        let (row, lj) = cums
            .iter()
            .zip(&rows)
            .map(|(c, l)| ln_partial(&mus, l, c, mu0))
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |a, (i, v)| if v > a.1 { (i, v) } else { a },
            );
        let seen = ln_partial(&mus, &gaps, &gap_cum, mu0);
        let tail = (base - seen.exp()).max(0.0);
        let union = (ctx.ln_q + lj).min(700.0).exp();
        (head_fn(mu0) + tail - union, row)
    };

    let mut best_k = 0;
    let mut best_v = base;
    for (k, &mu0) in mus.iter().enumerate().skip(1) {
        let v = surrogate(mu0).0;
        if v > best_v {
            best_k = k;
            best_v = v;
        }
    }
    let mut best = LowerDetail {
        value: inp.dstar(),
        delta: base.max(0.0),
        mu0: 0.0,
        r: 0.0,
    };
    if best_k > 0 {
        let a = mus[best_k - 1];
        let b = mus[(best_k + 1).min(mus.len() - 1)];
        let (mu0, _) = golden_max(|m| surrogate(m).0, a, b, 1e-3 * (b - a));
        let row = surrogate(mu0).1;
        let h = if rs.len() > 1 { rs[1] - rs[0] } else { width };
        let (_, r) = ctx.refine(mu0, (rs[row] - h).max(0.0), (rs[row] + h).min(ctx.r_cap));
        // Polish μ0 on the exact objective with r held at its optimum; the
        // envelope theorem makes the r dependence second order here.
        let exact =
            |m: f64| ctx.head(m) + ctx.tail(m) - (ctx.ln_q + ctx.ln_excess(r, m)).min(700.0).exp();
        let w = 0.05 * (b - a);
        let (pa, pb) = ((mu0 - w).max(a), (mu0 + w).min(b));
        let (mu0, _) = golden_max(exact, pa, pb, 1e-4 * (pb - pa));
        let (v, r) = ctx.refine(mu0, (r - h).max(0.0), (r + h).min(ctx.r_cap));
        if v > best.delta {
            best = LowerDetail {
                value: 0.0,
                delta: v,
                mu0,
                r,
            };
        }
    }
    best.value = inp.dstar() * (1.0 + 2.0 * best.delta / inp.n as f64);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: u32) -> GaussBoundInput {
        GaussBoundInput::new(n, 0.5, 1.0).unwrap()
    }

    #[test]
    fn k0_examples() {
        let inp = unit(2);
        assert_eq!(k0(0.0, &inp), 0.0);
        assert!((k0(1.0, &inp) - (1.0 - (-1f64).exp())).abs() < 1e-14);
        assert!((k0(1e4, &inp) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn excess_examples() {
        let inp = unit(5);
        assert_eq!(k_excess(0.7, 0.0, &inp), 0.0);
        // far codeword: C_j is disjoint from C0, so the excess is its full mass
        let g = inp.geometry();
        let (t, rho) = (0.01, 6.0);
        let want =
            crate::numeric::noncentral_chi2_cdf(5.0, (g.scale * rho).powi(2), g.radius_sq(t, rho));
        let got = k_excess(t, rho, &inp);
        assert!((got / want - 1.0).abs() < 1e-7, "{got} vs {want}");
    }

    #[test]
    fn gamma_cap_limits() {
        let inp = unit(6);
        assert_eq!(gamma_cap(0.3, &inp), 1.0);
        let b = inp.with_alpha(0.5).unwrap();
        let g1 = gamma_cap(0.2, &b);
        let g2 = gamma_cap(2.0, &b);
        assert!(g1 >= 0.0 && g1 <= g2 && g2 <= 1.0);
        assert!(gamma_cap(200.0, &b) > 1.0 - 1e-12);
    }

    #[test]
    fn delta_hat_at_zero() {
        assert_eq!(delta_hat(0.0, 1.3, &unit(8)), 0.0);
        let b = unit(8).with_alpha(0.5).unwrap();
        assert!(delta_hat(0.0, 1.3, &b) >= 0.0);
    }

    #[test]
    fn lower_above_asymptote() {
        for n in [4, 20] {
            let v = lower_bound(&unit(n)).unwrap();
            assert!(v >= 0.5 - 1e-12, "n={n}: {v}");
            let b = lower_bound(&unit(n).with_alpha(0.5).unwrap()).unwrap();
            assert!(b >= v - 1e-9, "n={n}: bounded {b} < unbounded {v}");
        }
    }
}
