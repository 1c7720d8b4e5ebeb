//! Log-domain arithmetic and the special functions the bounds are built on.

pub mod chi2;
pub mod combin;
pub mod entropy;
pub mod logreal;
pub mod quad;
pub mod root;
pub mod special;
pub mod sphere;

pub use chi2::{
    chi2_cdf, chi2_sf, ln_chi2_cdf, ln_chi2_mass, ln_chi2_sf, ln_noncentral_chi2_cdf,
    ln_noncentral_chi2_quantile, noncentral_chi2_cdf, noncentral_chi2_quantile,
};
pub use combin::{ln_choose, log_binomial};
pub use entropy::{binary_entropy, binary_entropy_nats, inverse_binary_entropy};
pub use logreal::{ln_1m_exp, ln_add_exp, log_sum, LogReal, LogSum};
pub use quad::{integrate, integrate_ln, integrate_on, Integral, Quadrature};
pub use root::{find_root, golden_max, grid_golden_max};
pub use special::{exp_gap_inverse, ln_gamma};
pub use sphere::{cone_area, ln_cap_fraction, unit_ball_volume, unit_sphere_area};
