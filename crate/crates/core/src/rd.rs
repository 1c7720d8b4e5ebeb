//! Asymptotic rate-distortion points, the dual slope λ̂, and a
//! Blahut–Arimoto solver used to certify them through the KKT conditions.
//!
//! Rates are in bits at every public interface. λ̂ is stored in distortion
//! per nat, so `D^n - D* = (λ̂ / n) ΔD` with the residue `ΔD` in nats.

use std::f64::consts::LN_2;

use crate::error::{domain, Result};
use crate::numeric::{binary_entropy, inverse_binary_entropy, LogSum};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SourceModel {
    BinarySymmetric,
    /// `p` is the probability of a one, `0 < p <= 1/2`.
    BinaryNonSymmetric {
        p: f64,
    },
    Gaussian {
        sigma2: f64,
    },
}

impl SourceModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SourceModel::BinarySymmetric => Ok(()),
            SourceModel::BinaryNonSymmetric { p } if p > 0.0 && p <= 0.5 => Ok(()),
            SourceModel::BinaryNonSymmetric { p } => {
                domain(format!("BNS needs 0 < p <= 1/2, got {p}"))
            }
            SourceModel::Gaussian { sigma2 } if sigma2 > 0.0 => Ok(()),
            SourceModel::Gaussian { sigma2 } => {
                domain(format!("sigma2 must be positive, got {sigma2}"))
            }
        }
    }

    /// Probability of a one for the binary families.
    pub fn bit_prob(&self) -> Option<f64> {
        match *self {
            SourceModel::BinarySymmetric => Some(0.5),
            SourceModel::BinaryNonSymmetric { p } => Some(p),
            SourceModel::Gaussian { .. } => None,
        }
    }

    /// Upper end of the admissible rate range in bits.
    pub fn max_rate(&self) -> f64 {
        match *self {
            SourceModel::BinarySymmetric => 1.0,
            SourceModel::BinaryNonSymmetric { p } => binary_entropy(p),
            SourceModel::Gaussian { .. } => f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RdParams {
    /// Test-channel crossover `q0` with `1 - H(q0) = R`.
    Bss {
        q0: f64,
    },
    /// Backward-channel crossover `d` and codeword marginal `z = P(y = 1)`.
    Bns {
        d: f64,
        z: f64,
    },
    Gaussian {
        d: f64,
        marginal_var: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RdSolution {
    pub rate: f64,
    pub dstar: f64,
    /// `-dD/dR` with `R` in nats.
    pub lambda_hat: f64,
    pub params: RdParams,
}

pub fn solve(source: SourceModel, rate: f64) -> Result<RdSolution> {
    source.validate()?;
    if !(rate > 0.0 && rate < source.max_rate()) {
        return domain(format!(
            "rate {rate} outside (0, {}) for {source:?}",
            source.max_rate()
        ));
    }
    Ok(match source {
        SourceModel::BinarySymmetric => {
            let q0 = inverse_binary_entropy(1.0 - rate)?;
            RdSolution {
                rate,
                dstar: q0,
                lambda_hat: crossover_slope(q0),
                params: RdParams::Bss { q0 },
            }
        }
        SourceModel::BinaryNonSymmetric { p } => {
            let d = inverse_binary_entropy((binary_entropy(p) - rate).max(0.0))?;
            RdSolution {
                rate,
                dstar: d,
                lambda_hat: crossover_slope(d),
                params: RdParams::Bns {
                    d,
                    z: (p - d) / (1.0 - 2.0 * d),
                },
            }
        }
        SourceModel::Gaussian { sigma2 } => {
            let d = sigma2 * (-2.0 * rate * LN_2).exp();
            RdSolution {
                rate,
                dstar: d,
                lambda_hat: 2.0 * d,
                params: RdParams::Gaussian {
                    d,
                    marginal_var: sigma2 - d,
                },
            }
        }
    })
}

/// `1 / ln((1 - d) / d)`, the slope of `D(R) = H^{-1}(h - R)` in nats.
fn crossover_slope(d: f64) -> f64 {
    1.0 / ((1.0 - d) / d).ln()
}

/// A finite-alphabet test channel with its source law and distortion.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteChannel {
    pub px: Vec<f64>,
    pub dmat: Vec<Vec<f64>>,
    pub qyx: Vec<Vec<f64>>,
}

const MAX_ALPHABET: usize = 64;

impl DiscreteChannel {
    pub fn new(px: Vec<f64>, dmat: Vec<Vec<f64>>, qyx: Vec<Vec<f64>>) -> Result<Self> {
        let nx = px.len();
        if nx == 0 || nx > MAX_ALPHABET {
            return domain(format!(
                "input alphabet size {nx} not in 1..={MAX_ALPHABET}"
            ));
        }
        let ny = dmat.first().map_or(0, Vec::len);
        if ny == 0 || ny > MAX_ALPHABET {
            return domain(format!(
                "output alphabet size {ny} not in 1..={MAX_ALPHABET}"
            ));
        }
        if dmat.len() != nx || qyx.len() != nx || dmat.iter().chain(&qyx).any(|r| r.len() != ny) {
            return domain("channel matrices do not match the alphabets");
        }
        if px.iter().any(|&p| !(p >= 0.0)) || (px.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return domain("px is not a pmf");
        }
        if dmat.iter().flatten().any(|&d| !(d >= 0.0)) {
            return domain("distortions must be nonnegative");
        }
        for row in &qyx {
            if row.iter().any(|&q| !(q >= 0.0)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return domain("qyx rows must be pmfs");
            }
        }
        Ok(DiscreteChannel { px, dmat, qyx })
    }

    /// Channel with `q(y|x)` uniform over outputs.
    pub fn uniform(px: Vec<f64>, dmat: Vec<Vec<f64>>) -> Result<Self> {
        let ny = dmat.first().map_or(0, Vec::len);
        let qyx = vec![vec![1.0 / ny as f64; ny]; px.len()];
        Self::new(px, dmat, qyx)
    }

    /// Binary source with `P(x = 1) = p` and Hamming distortion.
    pub fn binary_hamming(p: f64) -> Result<Self> {
        Self::uniform(vec![1.0 - p, p], vec![vec![0.0, 1.0], vec![1.0, 0.0]])
    }

    pub fn qy(&self) -> Vec<f64> {
        let ny = self.dmat[0].len();
        let mut qy = vec![0.0; ny];
        for (px, row) in self.px.iter().zip(&self.qyx) {
            for (q, &c) in qy.iter_mut().zip(row) {
                *q += px * c;
            }
        }
        qy
    }

    pub fn distortion(&self) -> f64 {
        let mut d = 0.0;
        for ((px, row), drow) in self.px.iter().zip(&self.qyx).zip(&self.dmat) {
            for (q, dd) in row.iter().zip(drow) {
                d += px * q * dd;
            }
        }
        d
    }

    /// Mutual information `I(X; Y)` in nats.
    pub fn mutual_information(&self) -> f64 {
        let qy = self.qy();
        let mut i = 0.0;
        for (px, row) in self.px.iter().zip(&self.qyx) {
            for (q, qm) in row.iter().zip(&qy) {
                if *q > 0.0 && *px > 0.0 {
                    i += px * q * (q / qm).ln();
                }
            }
        }
        i
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaOutcome {
    pub channel: DiscreteChannel,
    pub rate_bits: f64,
    pub distortion: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Last change in distortion between iterates.
    pub last_change: f64,
}

/// Blahut–Arimoto at slope `s = 1/λ` (nats per unit distortion): iterates
/// `q(y|x) ∝ q(y) e^{-s d(x,y)}` and `q(y) = Σ_x p(x) q(y|x)` until
/// successive distortions differ by less than `tol`. Large `s` drives the
/// solution toward zero distortion.
pub fn blahut_arimoto(
    init: &DiscreteChannel,
    slope: f64,
    max_iters: usize,
    tol: f64,
) -> Result<BaOutcome> {
    if !(slope > 0.0) {
        return domain(format!("slope must be positive, got {slope}"));
    }
    let mut ch = init.clone();
    let mut qy = ch.qy();
    let mut d_prev = ch.distortion();
    let mut last_change = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        for (row, drow) in ch.qyx.iter_mut().zip(&ch.dmat) {
            let logs: Vec<f64> = qy
                .iter()
                .zip(drow)
                .map(|(&q, &d)| {
                    if q > 0.0 {
                        q.ln() - slope * d
                    } else {
                        f64::NEG_INFINITY
                    }
                })
                .collect();
            let mut z = LogSum::new();
            for &l in &logs {
                z.push_ln(l);
            }
            let lz = z.total().ln();
            for (c, l) in row.iter_mut().zip(&logs) {
                *c = (l - lz).exp();
            }
        }
        qy = ch.qy();
        let d = ch.distortion();
        last_change = (d - d_prev).abs();
        d_prev = d;
        if last_change < tol {
            converged = true;
            break;
        }
    }
    Ok(BaOutcome {
        rate_bits: ch.mutual_information() / LN_2,
        distortion: d_prev,
        iterations,
        converged,
        last_change,
        channel: ch,
    })
}

/// KKT violations of a candidate optimum, all in nats. Each condition is
/// divided through by `λ p(x)` so the numbers are comparable across inputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KktReport {
    /// Spread of `d/λ + ln(q(y|x)/q(y))` over the support of each row.
    pub stationarity: f64,
    /// Violation of the inequality for zero entries of `q(y|x)`.
    pub zero_entries: f64,
    /// `max q(y|x) |d/λ + ln(q(y|x)/q(y)) + ν(x)|` over all entries.
    pub complementary_slackness: f64,
    pub normalization: f64,
    /// `|I(q) - R|`; zero when no rate was supplied.
    pub rate_slack: f64,
}

impl KktReport {
    pub fn max(&self) -> f64 {
        [
            self.stationarity,
            self.zero_entries,
            self.complementary_slackness,
            self.normalization,
            self.rate_slack,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Checks the KKT conditions at multiplier `lambda` (distortion per nat).
/// The dual variable `ν(x)` is eliminated by taking the midpoint of each
/// row's stationarity values.
pub fn kkt_residual(ch: &DiscreteChannel, lambda: f64, rate_bits: Option<f64>) -> KktReport {
    let qy = ch.qy();
    let mut rep = KktReport {
        stationarity: 0.0,
        zero_entries: 0.0,
        complementary_slackness: 0.0,
        normalization: 0.0,
        rate_slack: 0.0,
    };
    for (row, drow) in ch.qyx.iter().zip(&ch.dmat) {
        rep.normalization = rep.normalization.max((row.iter().sum::<f64>() - 1.0).abs());
        let vals: Vec<Option<f64>> = row
            .iter()
            .zip(drow)
            .zip(&qy)
            .map(|((&q, &d), &m)| (q > 0.0).then(|| d / lambda + (q / m).ln()))
            .collect();
        let (lo, hi) = vals
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        if lo > hi {
            continue;
        }
        let nu = -0.5 * (lo + hi);
        rep.stationarity = rep.stationarity.max(0.5 * (hi - lo));
        for ((v, &q), &m) in vals.iter().zip(row).zip(&qy) {
            match v {
                Some(v) => {
                    rep.complementary_slackness =
                        rep.complementary_slackness.max(q * (v + nu).abs())
                }
                // ln(0 / q(y)) = -inf: the inequality fails unless q(y) = 0.
                None if m > 0.0 => rep.zero_entries = f64::INFINITY,
                None => {}
            }
        }
    }
    if let Some(r) = rate_bits {
        rep.rate_slack = (ch.mutual_information() - r * LN_2).abs();
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asymptotes() {
        let s = solve(SourceModel::BinarySymmetric, 0.5).unwrap();
        assert!((s.dstar - 0.110_027_864_438_359_55).abs() < 1e-12);
        let s = solve(SourceModel::BinaryNonSymmetric { p: 0.4 }, 0.5).unwrap();
        assert!(s.dstar > 0.1000 && s.dstar < 0.1015, "{}", s.dstar);
        let s = solve(SourceModel::Gaussian { sigma2: 1.0 }, 0.5).unwrap();
        assert!((s.dstar - 0.5).abs() < 1e-15 && (s.lambda_hat - 1.0).abs() < 1e-15);
        assert!(solve(SourceModel::BinarySymmetric, 1.0).is_err());
        assert!(solve(SourceModel::BinaryNonSymmetric { p: 0.4 }, 0.98).is_err());
        assert!(solve(SourceModel::BinaryNonSymmetric { p: 0.6 }, 0.1).is_err());
    }

    #[test]
    fn uniform_channel_is_not_optimal() {
        let s = solve(SourceModel::BinarySymmetric, 0.5).unwrap();
        let ch = DiscreteChannel::binary_hamming(0.5).unwrap();
        assert!(kkt_residual(&ch, s.lambda_hat, None).stationarity > 1e-3);
    }

    #[test]
    fn closed_form_bss_channel_passes_kkt() {
        let s = solve(SourceModel::BinarySymmetric, 0.5).unwrap();
        let q = s.dstar;
        let ch = DiscreteChannel::new(
            vec![0.5, 0.5],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![vec![1.0 - q, q], vec![q, 1.0 - q]],
        )
        .unwrap();
        assert!(kkt_residual(&ch, s.lambda_hat, Some(0.5)).max() < 1e-10);
    }

    #[test]
    fn lossless_limit() {
        let ch = DiscreteChannel::binary_hamming(0.3).unwrap();
        let out = blahut_arimoto(&ch, 60.0, 10_000, 1e-14).unwrap();
        assert!(out.distortion < 1e-20);
        assert!((out.rate_bits - binary_entropy(0.3)).abs() < 1e-9);
    }

    #[test]
    fn rejects_malformed_channels() {
        assert!(
            DiscreteChannel::new(vec![0.5, 0.6], vec![vec![0.0]; 2], vec![vec![1.0]; 2]).is_err()
        );
        assert!(DiscreteChannel::new(vec![1.0], vec![vec![-1.0]], vec![vec![1.0]]).is_err());
        assert!(
            DiscreteChannel::new(vec![1.0], vec![vec![0.0, 1.0]], vec![vec![0.5, 0.4]]).is_err()
        );
    }
}
