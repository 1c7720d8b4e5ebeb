//! Adaptive Simpson quadrature, plus a log-domain wrapper for integrands
//! that live far outside the double range.

use crate::error::{domain, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_depth: 40,
        }
    }
}

impl Quadrature {
    pub fn new(rel_tol: f64, abs_tol: f64, max_depth: u32) -> Result<Self> {
        if !(rel_tol > 0.0) || !(abs_tol >= 0.0) || max_depth < 1 {
            return domain(format!(
                "quadrature tolerances rel={rel_tol} abs={abs_tol} depth={max_depth}"
            ));
        }
        Ok(Quadrature {
            rel_tol,
            abs_tol,
            max_depth,
        })
    }

    /// Same settings with the relative tolerance scaled by `k`.
    pub fn scaled(self, k: f64) -> Self {
        Quadrature {
            rel_tol: self.rel_tol * k,
            ..self
        }
    }
}

/// Result of an adaptive integration. `converged` is false when some
/// subinterval hit `max_depth` before meeting its tolerance; `error` is the
/// accumulated Richardson error estimate either way.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

const DEFAULT_PANELS: usize = 8;
const MIN_LEVEL: u32 = 1;

pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, cfg: &Quadrature) -> Integral {
    if a == b {
        return Integral {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    let pts = linspace(a, b, DEFAULT_PANELS + 1);
    integrate_on(f, &pts, cfg)
}

/// Integrates over consecutive intervals of `points`, which should include
/// any kinks of `f`.
pub fn integrate_on<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], cfg: &Quadrature) -> Integral {
    let fs: Vec<f64> = points.iter().map(|&x| f(x)).collect();
    integrate_cached(&mut f, points, &fs, cfg)
}

/// `ln ∫ exp(g)` over the span of `points`, each interval split into
/// `refine` panels. The integrand is rescaled by its sampled maximum so
/// that values like `e^{-2000}` integrate without underflow.
pub fn integrate_ln<F: FnMut(f64) -> f64>(
    mut g: F,
    points: &[f64],
    refine: usize,
    cfg: &Quadrature,
) -> f64 {
    let mut pts = Vec::with_capacity((points.len().max(1) - 1) * refine + 1);
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let sub = linspace(w[0], w[1], refine.max(1) + 1);
        if pts.is_empty() {
            pts.extend_from_slice(&sub);
        } else {
            pts.extend_from_slice(&sub[1..]);
        }
    }
    if pts.len() < 2 {
        return f64::NEG_INFINITY;
    }
    let mut lg: Vec<f64> = pts.iter().map(|&x| g(x)).collect();
    let (imax, _) =
        lg.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
        );
    if lg[imax] == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    // Pin the peak down and make it a breakpoint, so a peak narrower than
    // the grid spacing is still resolved.
    let lo = pts[imax.saturating_sub(1)];
    let hi = pts[(imax + 1).min(pts.len() - 1)];
    let (xp, vp) = super::root::golden_max(&mut g, lo, hi, 1e-3 * (hi - lo));
    if vp > lg[imax] && xp > pts[0] && xp < pts[pts.len() - 1] {
        let at = pts.partition_point(|&x| x < xp);
        if pts[at] != xp {
            pts.insert(at, xp);
            lg.insert(at, vp);
        }
    }
    let m = lg.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scaled = |v: f64| (v - m).min(700.0).exp();
    let fs: Vec<f64> = lg.iter().map(|&v| scaled(v)).collect();
    let cfg = Quadrature {
        abs_tol: 0.0,
        ..*cfg
    };
    let r = integrate_cached(&mut |x| scaled(g(x)), &pts, &fs, &cfg);
    if r.value <= 0.0 {
        return f64::NEG_INFINITY;
    }
    m + r.value.ln()
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    debug_assert!(n >= 2);
    let h = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { b } else { a + i as f64 * h })
        .collect()
}

struct Acc {
    error: f64,
    converged: bool,
}

fn integrate_cached<F: FnMut(f64) -> f64>(
    f: &mut F,
    points: &[f64],
    fs: &[f64],
    cfg: &Quadrature,
) -> Integral {
    let n = points.len();
    if n < 2 {
        return Integral {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    // First pass: one Simpson rule per panel to fix the tolerance scale.
    let mut panels = Vec::with_capacity(n - 1);
    let mut scale = 0.0;
    for i in 0..n - 1 {
        let (a, b) = (points[i], points[i + 1]);
        let m = 0.5 * (a + b);
        let fm = f(m);
        let s = (b - a) / 6.0 * (fs[i] + 4.0 * fm + fs[i + 1]);
        scale += (b - a) / 6.0 * (fs[i].abs() + 4.0 * fm.abs() + fs[i + 1].abs());
        panels.push((a, b, fs[i], fm, fs[i + 1], s));
    }
    let width = points[n - 1] - points[0];
    let tol = cfg.abs_tol.max(cfg.rel_tol * scale);
    let mut acc = Acc {
        error: 0.0,
        converged: true,
    };
    let mut value = 0.0;
    for (a, b, fa, fm, fb, s) in panels {
        let eps = tol * (b - a) / width;
        value += simpson(f, a, b, fa, fm, fb, s, eps, cfg.max_depth, 0, &mut acc);
    }
    Integral {
        value,
        error: acc.error,
        converged: acc.converged,
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
    level: u32,
    acc: &mut Acc,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Never accept on the first comparison: a coarse 3-point rule can agree
    // with its halves by accident when the integrand is far from polynomial.
    let accept = delta.abs() <= 15.0 * eps && level >= MIN_LEVEL;
    if accept || depth == 0 || lm <= a || rm >= b {
        if delta.abs() > 15.0 * eps {
            acc.converged = false;
        }
        acc.error += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    simpson(
        f,
        a,
        m,
        fa,
        flm,
        fm,
        left,
        0.5 * eps,
        depth - 1,
        level + 1,
        acc,
    ) + simpson(
        f,
        m,
        b,
        fm,
        frm,
        fb,
        right,
        0.5 * eps,
        depth - 1,
        level + 1,
        acc,
    )
}
