//! Volumes and Gaussian masses of two-ball intersections and differences.
//!
//! `C0` is the ball of radius `r0` at the origin and `C1` the ball of radius
//! `r1` centered at distance `c1`. Masses are under `N(0, σ² I_n)`. The
//! partially covered shells are integrated radially: the sphere of radius
//! `r` meets `C1` in a cap of half-angle `θ(r)`.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::numeric::{
    integrate_ln, ln_1m_exp, ln_cap_fraction, ln_chi2_cdf, ln_chi2_mass, unit_ball_volume,
    unit_sphere_area, LogReal, LogSum, Quadrature,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallPair {
    pub dim: u32,
    pub r0: f64,
    pub c1: f64,
    pub r1: f64,
    pub sigma2: f64,
}

/// Panels per radial integral; the peak is located separately, so this
/// only has to resolve the integrand's overall shape.
const RADIAL_PANELS: usize = 24;

impl BallPair {
    pub fn new(dim: u32, r0: f64, c1: f64, r1: f64, sigma2: f64) -> Result<Self> {
        let bp = BallPair {
            dim,
            r0,
            c1,
            r1,
            sigma2,
        };
        bp.validate()?;
        Ok(bp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return domain(format!("ball pair dimension {} < 2", self.dim));
        }
        if !(self.r0 >= 0.0 && self.c1 >= 0.0 && self.r1 >= 0.0) {
            return domain(format!("negative radius or center in {self:?}"));
        }
        if !(self.sigma2 > 0.0) {
            return domain(format!("sigma2 must be positive, got {}", self.sigma2));
        }
        Ok(())
    }

    /// Half-angle of the cap of the radius-`r` sphere inside `C1`, with the
    /// degenerate shells mapped to 0 (no overlap) and π (sphere inside).
    fn theta(&self, r: f64) -> f64 {
        if r <= self.r1 - self.c1 {
            return PI;
        }
        if r >= self.c1 + self.r1 || r <= self.c1 - self.r1 || r <= 0.0 {
            return 0.0;
        }
        let c = (self.c1 * self.c1 + r * r - self.r1 * self.r1) / (2.0 * self.c1 * r);
        c.clamp(-1.0, 1.0).acos()
    }

    fn ln_shell_density(&self, r: f64) -> f64 {
        let n = self.dim as f64;
        -0.5 * n * (2.0 * PI * self.sigma2).ln() - 0.5 * r * r / self.sigma2 + (n - 1.0) * r.ln()
    }

    fn radial(&self, start: f64, end: f64, gaussian: bool, cfg: &Quadrature) -> f64 {
        if !(start < end) {
            return f64::NEG_INFINITY;
        }
        let la = unit_sphere_area(self.dim).ln();
        let n = self.dim;
        integrate_ln(
            |r| {
                let lc = ln_cap_fraction(n, self.theta(r));
                if lc == f64::NEG_INFINITY {
                    return lc;
                }
                let base = if gaussian {
                    self.ln_shell_density(r)
                } else {
                    (n as f64 - 1.0) * r.ln()
                };
                base + la + lc
            },
            &[start, end],
            RADIAL_PANELS,
            cfg,
        )
    }

    fn chi2_arg(&self, r: f64) -> f64 {
        r * r / self.sigma2
    }
}

/// `θ(r) = acos((c1² + r² - r1²) / (2 c1 r))`.
pub fn semiangle(bp: &BallPair, r: f64) -> Result<f64> {
    if !(bp.c1 > 0.0 && r > 0.0) {
        return domain(format!(
            "semiangle needs c1 > 0 and r > 0 (c1={}, r={r})",
            bp.c1
        ));
    }
    let c = (bp.c1 * bp.c1 + r * r - bp.r1 * bp.r1) / (2.0 * bp.c1 * r);
    if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&c) {
        return domain(format!(
            "cosine {c} out of range: sphere of radius {r} misses C1"
        ));
    }
    Ok(c.clamp(-1.0, 1.0).acos())
}

/// `P(C1 \ C0)`.
pub fn prob_diff(bp: &BallPair) -> f64 {
    ln_prob_diff(bp, &Quadrature::default()).exp()
}

/// `P(C1 ∩ C0)`.
pub fn prob_intersect(bp: &BallPair) -> f64 {
    ln_prob_intersect(bp, &Quadrature::default()).exp()
}

pub fn ln_prob_diff(bp: &BallPair, cfg: &Quadrature) -> f64 {
    let n = bp.dim as f64;
    if bp.r1 <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if bp.c1 == 0.0 {
        return ln_chi2_mass(n, bp.chi2_arg(bp.r0), bp.chi2_arg(bp.r1));
    }
    let mut total = LogSum::new();
    let inner = bp.r1 - bp.c1;
    if inner > bp.r0 {
        total.push_ln(ln_chi2_mass(n, bp.chi2_arg(bp.r0), bp.chi2_arg(inner)));
    }
    let start = bp.r0.max((bp.c1 - bp.r1).abs());
    total.push_ln(bp.radial(start, bp.c1 + bp.r1, true, cfg));
    total.total().ln()
}

pub fn ln_prob_intersect(bp: &BallPair, cfg: &Quadrature) -> f64 {
    let n = bp.dim as f64;
    if bp.r1 <= 0.0 || bp.r0 <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if bp.c1 == 0.0 {
        return ln_chi2_cdf(n, bp.chi2_arg(bp.r0.min(bp.r1)));
    }
    if bp.c1 >= bp.r0 + bp.r1 {
        return f64::NEG_INFINITY;
    }
    let mut total = LogSum::new();
    if bp.r1 > bp.c1 {
        total.push_ln(ln_chi2_cdf(n, bp.chi2_arg((bp.r1 - bp.c1).min(bp.r0))));
    }
    let end = bp.r0.min(bp.c1 + bp.r1);
    total.push_ln(bp.radial((bp.c1 - bp.r1).abs(), end, true, cfg));
    total.total().ln()
}

/// `ln(V_n (b^n - a^n))`, the volume of the shell `a < |x| <= b`.
fn ln_shell_volume(n: u32, a: f64, b: f64) -> f64 {
    if !(b > a) {
        return f64::NEG_INFINITY;
    }
    let nf = n as f64;
    let head = unit_ball_volume(n).ln() + nf * b.ln();
    if a <= 0.0 {
        head
    } else {
        head + ln_1m_exp(nf * (a / b).ln())
    }
}

/// Lebesgue volume of `C1 \ C0`.
pub fn vol_diff(bp: &BallPair) -> LogReal {
    LogReal::from_ln(ln_vol_diff(bp, &Quadrature::default()))
}

/// Lebesgue volume of `C1 ∩ C0`.
pub fn vol_intersect(bp: &BallPair) -> LogReal {
    LogReal::from_ln(ln_vol_intersect(bp, &Quadrature::default()))
}

pub fn ln_vol_diff(bp: &BallPair, cfg: &Quadrature) -> f64 {
    if bp.r1 <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if bp.c1 == 0.0 {
        return ln_shell_volume(bp.dim, bp.r0, bp.r1);
    }
    let mut total = LogSum::new();
    let inner = bp.r1 - bp.c1;
    if inner > bp.r0 {
        total.push_ln(ln_shell_volume(bp.dim, bp.r0, inner));
    }
    let start = bp.r0.max((bp.c1 - bp.r1).abs());
    total.push_ln(bp.radial(start, bp.c1 + bp.r1, false, cfg));
    total.total().ln()
}

pub fn ln_vol_intersect(bp: &BallPair, cfg: &Quadrature) -> f64 {
    if bp.r1 <= 0.0 || bp.r0 <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if bp.c1 == 0.0 {
        return ln_shell_volume(bp.dim, 0.0, bp.r0.min(bp.r1));
    }
    if bp.c1 >= bp.r0 + bp.r1 {
        return f64::NEG_INFINITY;
    }
    let mut total = LogSum::new();
    if bp.r1 > bp.c1 {
        total.push_ln(ln_shell_volume(bp.dim, 0.0, (bp.r1 - bp.c1).min(bp.r0)));
    }
    let end = bp.r0.min(bp.c1 + bp.r1);
    total.push_ln(bp.radial((bp.c1 - bp.r1).abs(), end, false, cfg));
    total.total().ln()
}
