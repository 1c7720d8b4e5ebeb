//! Gaussian source bounds, `x ~ N(0, σ² I_n)` under per-symbol squared error.
//!
//! Codewords are either unbounded or confined to `‖y‖ <= R_m`; the CLI and
//! tests parametrize the latter as `R_m² = α n`.

mod lower;
mod upper;

pub use lower::{delta_hat, gamma_cap, k0, k_excess, lower_bound, lower_bound_detail, LowerDetail};
pub use upper::{threshold_prob, upper_bound, upper_bound_bounded, upper_bound_unbounded};

use std::f64::consts::LN_2;

use crate::error::{domain, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussBoundInput {
    pub n: u32,
    pub rate: f64,
    pub sigma2: f64,
    /// Codeword norm bound; `None` for an unbounded codebook.
    pub rm: Option<f64>,
    pub eps: f64,
    pub delta: f64,
}

impl GaussBoundInput {
    /// Unbounded codebook with `ε = 0.005`, `δ = 0.5`.
    pub fn new(n: u32, rate: f64, sigma2: f64) -> Result<Self> {
        let inp = GaussBoundInput {
            n,
            rate,
            sigma2,
            rm: None,
            eps: 0.005,
            delta: 0.5,
        };
        inp.validate()?;
        Ok(inp)
    }

    /// Bounded codebook with `R_m² = α n`.
    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        let inp = GaussBoundInput {
            rm: Some((alpha * self.n as f64).sqrt()),
            ..self
        };
        inp.validate()?;
        Ok(inp)
    }

    pub fn with_eps(self, eps: f64) -> Result<Self> {
        let inp = GaussBoundInput { eps, ..self };
        inp.validate()?;
        Ok(inp)
    }

    pub fn with_delta(self, delta: f64) -> Result<Self> {
        let inp = GaussBoundInput { delta, ..self };
        inp.validate()?;
        Ok(inp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return domain(format!("blocklength {} < 2", self.n));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return domain(format!("rate must be positive, got {}", self.rate));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return domain(format!("sigma2 must be positive, got {}", self.sigma2));
        }
        if let Some(rm) = self.rm {
            if !(rm > 0.0) {
                return domain(format!("codeword bound must be positive, got {rm}"));
            }
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return domain(format!("eps {} outside (0, 1)", self.eps));
        }
        if !(self.delta > 0.0) {
            return domain(format!("delta must be positive, got {}", self.delta));
        }
        Ok(())
    }

    pub fn ln_q(&self) -> f64 {
        self.n as f64 * self.rate * LN_2
    }

    pub fn dstar(&self) -> f64 {
        self.sigma2 * (-2.0 * self.rate * LN_2).exp()
    }

    pub fn geometry(&self) -> LowerBoundGeometry {
        LowerBoundGeometry::new(self.sigma2, self.dstar())
    }
}

/// The regions `C_j(t) = {x : ‖x - y_j‖²/2D - ‖x‖²/2σ² <= t}` are balls
/// with center `scale · y_j` and squared radius `R(t, ‖y_j‖)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerBoundGeometry {
    pub sigma2: f64,
    pub d: f64,
    pub scale: f64,
}

impl LowerBoundGeometry {
    pub fn new(sigma2: f64, d: f64) -> Self {
        LowerBoundGeometry {
            sigma2,
            d,
            scale: sigma2 / (sigma2 - d),
        }
    }

    pub fn radius_sq(&self, t: f64, rho: f64) -> f64 {
        let gap = self.sigma2 - self.d;
        self.sigma2 * self.d * rho * rho / (gap * gap) + 2.0 * self.d * self.sigma2 * t / gap
    }
}
