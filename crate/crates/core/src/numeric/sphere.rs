//! Unit sphere areas, ball volumes and spherical cap areas.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use super::logreal::LogReal;
use super::special::{ln_gamma, ln_inc_beta};
use crate::error::{domain, Result};

/// `A_n = 2 π^{n/2} / Γ(n/2)`.
pub fn unit_sphere_area(n: u32) -> LogReal {
    let h = 0.5 * n as f64;
    LogReal::from_ln(LN_2 + h * PI.ln() - ln_gamma(h))
}

/// `V_n = A_n / n`.
pub fn unit_ball_volume(n: u32) -> LogReal {
    LogReal::from_ln(unit_sphere_area(n).ln() - (n as f64).ln())
}

/// Area of the cap cut from the unit sphere in `R^n` by a cone of
/// half-angle `theta`.
pub fn cone_area(n: u32, theta: f64) -> Result<LogReal> {
    if n < 2 {
        return domain(format!("cone area needs n >= 2, got {n}"));
    }
    if !(0.0..=PI).contains(&theta) {
        return domain(format!("cone half-angle {theta} outside [0, π]"));
    }
    Ok(LogReal::from_ln(
        unit_sphere_area(n).ln() + ln_cap_fraction(n, theta),
    ))
}

/// `ln(Ω_n(θ) / A_n)`; `θ` is clamped to `[0, π]`.
pub fn ln_cap_fraction(n: u32, theta: f64) -> f64 {
    if theta <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if theta >= PI {
        return 0.0;
    }
    match n {
        2 => (theta / PI).ln(),
        3 => 2.0 * (0.5 * theta).sin().ln(),
        _ => {
            // Ω/A = ½ I_{sin²θ}((n-1)/2, ½) below π/2, mirrored above.
            let a = 0.5 * (n as f64 - 1.0);
            let (s, c) = theta.sin_cos();
            let li = ln_inc_beta(a, 0.5, s * s, c * c);
            if theta <= FRAC_PI_2 {
                li - LN_2
            } else {
                (-0.5 * li.exp()).ln_1p()
            }
        }
    }
}
