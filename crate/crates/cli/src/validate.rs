//! `rdflb validate`: sandwich a Monte-Carlo estimate between the bounds and,
//! for the BSS, check the residue identity and the duality inequality on a
//! corpus of random codebooks.

use std::fmt;

use rdflb_core::bss::{self, BssBoundInput};
use rdflb_core::gauss::{self, GaussBoundInput};
use rdflb_core::mc::{
    delta_residue, duality_error_prob, exact_distortion, mc_mean_distortion,
    random_binary_codebook, ExperimentConfig, DEFAULT_BUDGET,
};
use rdflb_core::rd::{solve, SourceModel};
use rdflb_core::{bns, Bound};

use crate::error::Result;
use crate::table::format_value;

pub const IDENTITY_TOL: f64 = 1e-10;
pub const DUALITY_TOL: f64 = 1e-12;
/// Keeps the codebook corpus off the streams used by the MC trials.
const CORPUS_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Debug, PartialEq)]
pub struct ValidateArgs {
    pub source: SourceModel,
    pub n: u32,
    pub rate: f64,
    pub trials: u64,
    pub seed: u64,
    pub eps: f64,
    pub codebooks: u64,
    /// Gaussian codeword bound `R_m² = α n`.
    pub alpha: Option<f64>,
    pub budget: f64,
}

impl ValidateArgs {
    pub fn new(source: SourceModel, n: u32, rate: f64, trials: u64, seed: u64) -> Self {
        ValidateArgs {
            source,
            n,
            rate,
            trials,
            seed,
            eps: 0.01,
            codebooks: 100,
            alpha: None,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub entries: Vec<(String, String)>,
    pub pass: bool,
}

impl Report {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Maximum identity residual and minimum duality margin over the corpus.
fn residue_checks(a: &ValidateArgs, q: u64) -> Result<(f64, f64)> {
    let sol = solve(SourceModel::BinarySymmetric, a.rate)?;
    let mut worst_res: f64 = 0.0;
    let mut worst_margin = f64::INFINITY;
    for k in 0..a.codebooks {
        let cb = random_binary_codebook(a.n, q, 0.5, a.seed ^ CORPUS_SALT, k)?;
        let dr = delta_residue(&cb, a.rate)?;
        let pe = duality_error_prob(&cb, a.rate)?;
        let d = exact_distortion(SourceModel::BinarySymmetric, &cb)?;
        worst_res = worst_res.max((d - sol.dstar - sol.lambda_hat / a.n as f64 * dr).abs());
        worst_margin = worst_margin.min(dr - pe);
    }
    Ok((worst_res, worst_margin))
}

fn bounds(a: &ValidateArgs) -> Result<(f64, Bound)> {
    Ok(match a.source {
        SourceModel::BinarySymmetric => {
            let inp = BssBoundInput::new(a.n, a.rate)?;
            (bss::lower_bound(&inp), bss::upper_bound_os(&inp, a.eps)?)
        }
        SourceModel::BinaryNonSymmetric { p } => (
            bns::lower_bound(a.n, a.rate, p)?,
            bns::upper_bound_os(a.n, a.rate, p, a.eps)?,
        ),
        SourceModel::Gaussian { sigma2 } => {
            let mut inp = GaussBoundInput::new(a.n, a.rate, sigma2)?.with_eps(a.eps)?;
            if let Some(al) = a.alpha {
                inp = inp.with_alpha(al)?;
            }
            (gauss::lower_bound(&inp)?, gauss::upper_bound(&inp)?)
        }
    })
}

pub fn run_validate(a: &ValidateArgs) -> Result<Report> {
    let mut cfg = ExperimentConfig::new(a.source, a.n, a.rate, a.trials, a.seed);
    cfg.budget = a.budget;
    if let (SourceModel::Gaussian { .. }, Some(al)) = (a.source, a.alpha) {
        cfg.rm = Some((al * a.n as f64).sqrt());
    }
    let q = cfg.codebook_size();
    // Cheap budget failures first so an oversized request exits immediately.
    let residue = match a.source {
        SourceModel::BinarySymmetric => Some(residue_checks(a, q)?),
        _ => None,
    };
    let (lower, upper) = bounds(a)?;
    let mc = mc_mean_distortion(&cfg)?;

    let sandwich_lower = lower <= mc.mean + 3.0 * mc.stderr;
    let sandwich_upper = mc.mean <= upper.value + 3.0 * mc.stderr;
    let mut pass = sandwich_lower && sandwich_upper;
    let mut e: Vec<(String, String)> = Vec::new();
    let mut put = |k: &str, v: String| e.push((k.to_string(), v));
    match a.source {
        SourceModel::BinarySymmetric => put("source", "bss".into()),
        SourceModel::BinaryNonSymmetric { p } => {
            put("source", "bns".into());
            put("p", p.to_string());
        }
        SourceModel::Gaussian { sigma2 } => {
            put("source", "gauss".into());
            put("sigma2", sigma2.to_string());
        }
    }
    put("n", a.n.to_string());
    put("rate", a.rate.to_string());
    put("q", q.to_string());
    put("q_exact", format_value((a.n as f64 * a.rate).exp2()));
    put("trials", a.trials.to_string());
    put("seed", a.seed.to_string());
    put("eps", a.eps.to_string());
    if let Some(al) = a.alpha {
        put("alpha", al.to_string());
    }
    put("lower", format_value(lower));
    put("mc_mean", format_value(mc.mean));
    put("mc_stderr", format_value(mc.stderr));
    put("upper_os", format_value(upper.value));
    put("upper_os_degenerate", upper.degenerate.to_string());
    match residue {
        Some((res, margin)) => {
            let (ok_id, ok_dual) = (res <= IDENTITY_TOL, margin >= -DUALITY_TOL);
            pass &= ok_id && ok_dual;
            put("codebooks", a.codebooks.to_string());
            put("identity_max_residual", format!("{res:.3e}"));
            put("duality_margin", format_value(margin));
            put("sandwich_lower_pass", sandwich_lower.to_string());
            put("sandwich_upper_pass", sandwich_upper.to_string());
            put("identity_pass", ok_id.to_string());
            put("duality_pass", ok_dual.to_string());
        }
        None => {
            put("identity_max_residual", "na".into());
            put("duality_margin", "na".into());
            put("sandwich_lower_pass", sandwich_lower.to_string());
            put("sandwich_upper_pass", sandwich_upper.to_string());
        }
    }
    put("pass", pass.to_string());
    Ok(Report { entries: e, pass })
}
