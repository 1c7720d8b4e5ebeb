//! Exact enumeration and Monte-Carlo quantization experiments.
//!
//! Binary words are packed into the low `n` bits of a `u64`. Random draws
//! come from ChaCha8 keyed by the experiment seed, one stream per trial, so
//! results do not depend on how trials are split across threads.

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::numeric::chi2_cdf;
use crate::rd::{solve, SourceModel};

/// Largest `n` for full `2^n` enumeration of binary source words.
pub const MAX_ENUM_N: u32 = 24;
/// Largest `n` for the residue and duality enumerations.
pub const MAX_RESIDUE_N: u32 = 20;
/// Default cap on `Q · trials · n` symbol comparisons for one experiment.
pub const DEFAULT_BUDGET: f64 = 5e9;
/// Rejection sampling of bounded codewords is refused below this acceptance.
pub const MIN_ACCEPTANCE: f64 = 1e-6;
const CHUNK: u64 = 4096;

#[derive(Clone, Debug, PartialEq)]
pub enum Words {
    Binary(Vec<u64>),
    Real(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    pub n: u32,
    pub words: Words,
}

impl Codebook {
    pub fn binary(n: u32, words: Vec<u64>) -> Result<Self> {
        if n == 0 || n > 64 {
            return domain(format!("binary blocklength {n} outside 1..=64"));
        }
        if words.is_empty() {
            return domain("empty codebook");
        }
        if n < 64 && words.iter().any(|&w| w >> n != 0) {
            return domain(format!("codeword has bits above position {n}"));
        }
        Ok(Codebook {
            n,
            words: Words::Binary(words),
        })
    }

    pub fn real(words: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = words.first() else {
            return domain("empty codebook");
        };
        let n = first.len();
        if n == 0 || words.iter().any(|w| w.len() != n) {
            return domain("codewords must share a nonzero length");
        }
        Ok(Codebook {
            n: n as u32,
            words: Words::Real(words),
        })
    }

    pub fn len(&self) -> usize {
        match &self.words {
            Words::Binary(w) => w.len(),
            Words::Real(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SourceWord {
    Bits(u64),
    Real(Vec<f64>),
}

fn mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn nearest_bits(x: u64, words: &[u64]) -> (usize, u32) {
    let mut best = (0, u32::MAX);
    for (j, &y) in words.iter().enumerate() {
        let d = (x ^ y).count_ones();
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn nearest_real(x: &[f64], words: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, y) in words.iter().enumerate() {
        let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Nearest codeword and its per-symbol distortion; ties go to the smallest
/// index.
pub fn quantize(x: &SourceWord, cb: &Codebook) -> Result<(usize, f64)> {
    let n = cb.n as f64;
    match (x, &cb.words) {
        (SourceWord::Bits(b), Words::Binary(w)) => {
            if *b & !mask(cb.n) != 0 {
                return domain("source word longer than the codewords");
            }
            let (j, d) = nearest_bits(*b, w);
            Ok((j, d as f64 / n))
        }
        (SourceWord::Real(v), Words::Real(w)) => {
            if v.len() != cb.n as usize {
                return domain(format!("source word length {} != {}", v.len(), cb.n));
            }
            let (j, d) = nearest_real(v, w);
            Ok((j, d / n))
        }
        _ => domain("source word and codebook alphabets differ"),
    }
}

fn binary_words(cb: &Codebook) -> Result<&[u64]> {
    match &cb.words {
        Words::Binary(w) => Ok(w),
        Words::Real(_) => domain("expected a binary codebook"),
    }
}

/// `Σ_x p(x) min_j d(x, y_j)` by enumerating all `2^n` source words.
pub fn exact_distortion(source: SourceModel, cb: &Codebook) -> Result<f64> {
    let Some(p) = source.bit_prob() else {
        return domain("exact enumeration needs a binary source");
    };
    source.validate()?;
    let words = binary_words(cb)?;
    if cb.n > MAX_ENUM_N {
        return Err(Error::Budget(format!(
            "n = {} exceeds the enumeration limit {MAX_ENUM_N}",
            cb.n
        )));
    }
    let n = cb.n;
    let (lp, l1p) = (p.ln(), (-p).ln_1p());
    // Group source words by weight so each weight's probability is computed once.
    let mut by_weight = vec![0u64; n as usize + 1];
    let mut mass = vec![0.0; n as usize + 1];
    for x in 0..(1u64 << n) {
        let w = x.count_ones() as usize;
        by_weight[w] += nearest_bits(x, words).1 as u64;
    }
    for (w, m) in mass.iter_mut().enumerate() {
        *m = (w as f64 * lp + (n as usize - w) as f64 * l1p).exp();
    }
    Ok(by_weight
        .iter()
        .zip(&mass)
        .map(|(&s, &m)| s as f64 * m)
        .sum::<f64>()
        / n as f64)
}

/// Crossover `q0` of the optimal BSS test channel at `rate`, after the
/// enumeration-size check.
fn bss_setup(cb: &Codebook, rate: f64) -> Result<(&[u64], f64)> {
    let words = binary_words(cb)?;
    if cb.n > MAX_RESIDUE_N {
        return Err(Error::Budget(format!(
            "n = {} exceeds the residue enumeration limit {MAX_RESIDUE_N}",
            cb.n
        )));
    }
    let q0 = solve(SourceModel::BinarySymmetric, rate)?.dstar;
    Ok((words, q0))
}

/// `ΔD^n = nR - Σ_j Σ_{x ∈ R_j} p(x) ln(q̂(x|y_j)/p(x))` in nats for the
/// BSS, with the regions `R_j` of [`quantize`].
pub fn delta_residue(cb: &Codebook, rate: f64) -> Result<f64> {
    let (words, q0) = bss_setup(cb, rate)?;
    let n = cb.n;
    let nf = n as f64;
    let (lq, l1q) = (q0.ln(), (-q0).ln_1p());
    let mut counts = vec![0u64; n as usize + 1];
    for x in 0..(1u64 << n) {
        counts[nearest_bits(x, words).1 as usize] += 1;
    }
    let total = (1u64 << n) as f64;
    let mean_ln_ratio: f64 = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 / total * (nf * LN_2 + k as f64 * lq + (nf - k as f64) * l1q))
        .sum();
    Ok(nf * rate * LN_2 - mean_ln_ratio)
}

/// Decoding error probability of the dual channel `q̂(x|y)` with uniform
/// codeword priors and the quantizer's regions as decoding regions.
pub fn duality_error_prob(cb: &Codebook, rate: f64) -> Result<f64> {
    let (words, q0) = bss_setup(cb, rate)?;
    let n = cb.n;
    let (lq, l1q) = (q0.ln(), (-q0).ln_1p());
    let mut counts = vec![0u64; n as usize + 1];
    for x in 0..(1u64 << n) {
        counts[nearest_bits(x, words).1 as usize] += 1;
    }
    let hit: f64 = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 * (k as f64 * lq + (n as usize - k) as f64 * l1q).exp())
        .sum();
    Ok((1.0 - hit / cb.len() as f64).clamp(0.0, 1.0))
}

/// `q` codewords with i.i.d. bits of probability `z`, drawn from stream
/// `index` of `seed`.
pub fn random_binary_codebook(n: u32, q: u64, z: f64, seed: u64, index: u64) -> Result<Codebook> {
    if !(0.0..=1.0).contains(&z) {
        return domain(format!("bit probability {z} outside [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let words = (0..q).map(|_| draw_bits(&mut rng, n, z)).collect();
    Codebook::binary(n, words)
}

#[derive(Clone, Debug, PartialEq)]
pub enum CodebookLaw {
    /// Codewords i.i.d. from the optimal output marginal.
    OptimalMarginal,
    /// Uniform bits (binary sources only).
    Uniform,
    Fixed(Codebook),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: SourceModel,
    pub n: u32,
    pub rate: f64,
    pub trials: u64,
    pub seed: u64,
    pub law: CodebookLaw,
    /// Codeword norm bound for Gaussian experiments.
    pub rm: Option<f64>,
    /// Cap on `Q · trials · n`.
    pub budget: f64,
}

impl ExperimentConfig {
    pub fn new(source: SourceModel, n: u32, rate: f64, trials: u64, seed: u64) -> Self {
        ExperimentConfig {
            source,
            n,
            rate,
            trials,
            seed,
            law: CodebookLaw::OptimalMarginal,
            rm: None,
            budget: DEFAULT_BUDGET,
        }
    }

    /// `Q = round(2^{nR})`, at least 1.
    pub fn codebook_size(&self) -> u64 {
        (self.n as f64 * self.rate).exp2().round().max(1.0) as u64
    }
}

/// Streaming mean and variance; `merge` is Chan's pairwise update.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        let d = v - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (v - self.mean);
    }

    pub fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        Moments {
            count,
            mean: self.mean + d * w,
            m2: self.m2 + other.m2 + d * d * self.count as f64 * w,
        }
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count.max(1) as f64).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub q: u64,
}

/// Per-experiment sampling state resolved once up front.
enum Sampler {
    Binary {
        p: f64,
        z: f64,
    },
    Gaussian {
        x: Normal<f64>,
        y: Normal<f64>,
        rm_sq: Option<f64>,
    },
}

fn draw_bits<R: Rng>(rng: &mut R, n: u32, p: f64) -> u64 {
    let mut w = 0u64;
    for i in 0..n {
        if rng.random_bool(p) {
            w |= 1 << i;
        }
    }
    w
}

/// Rejection attempts per bounded codeword before giving up; with
/// acceptance at least `MIN_ACCEPTANCE` a failure has negligible probability.
const REJECTION_CAP: u64 = 100_000_000;

fn draw_trial(s: &Sampler, cfg: &ExperimentConfig, q: u64, rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = cfg.n;
    match s {
        Sampler::Binary { p, z } => {
            let x = draw_bits(rng, n, *p);
            let mut best = u32::MAX;
            match &cfg.law {
                CodebookLaw::Fixed(cb) => best = nearest_bits(x, binary_words(cb)?).1,
                _ => {
                    for _ in 0..q {
                        best = best.min((x ^ draw_bits(rng, n, *z)).count_ones());
                    }
                }
            }
            Ok(best as f64 / n as f64)
        }
        Sampler::Gaussian { x, y, rm_sq } => {
            let xs: Vec<f64> = (0..n).map(|_| x.sample(rng)).collect();
            if let CodebookLaw::Fixed(cb) = &cfg.law {
                return quantize(&SourceWord::Real(xs), cb).map(|r| r.1);
            }
            // The first codeword is pinned to the origin.
            let mut best: f64 = xs.iter().map(|v| v * v).sum();
            let mut yv = vec![0.0; n as usize];
            for _ in 1..q {
                let mut tries = 0;
                loop {
                    for c in yv.iter_mut() {
                        *c = y.sample(rng);
                    }
                    match rm_sq {
                        Some(r2) if yv.iter().map(|v| v * v).sum::<f64>() > *r2 => {
                            tries += 1;
                            if tries > REJECTION_CAP {
                                return Err(Error::Infeasible(
                                    "rejection sampling cap reached".into(),
                                ));
                            }
                        }
                        _ => break,
                    }
                }
                let d: f64 = xs.iter().zip(&yv).map(|(a, b)| (a - b) * (a - b)).sum();
                best = best.min(d);
            }
            Ok(best / n as f64)
        }
    }
}

/// Mean distortion of nearest-codeword quantization over independently
/// drawn (source word, codebook) pairs.
pub fn mc_mean_distortion(cfg: &ExperimentConfig) -> Result<McEstimate> {
    cfg.source.validate()?;
    if cfg.trials == 0 {
        return domain("trials must be at least 1");
    }
    if cfg.n == 0 || !(cfg.rate > 0.0) {
        return domain("need n >= 1 and a positive rate");
    }
    let q = match &cfg.law {
        CodebookLaw::Fixed(cb) => {
            if cb.n != cfg.n {
                return domain(format!(
                    "fixed codebook has n = {}, expected {}",
                    cb.n, cfg.n
                ));
            }
            cb.len() as u64
        }
        _ => cfg.codebook_size(),
    };
    let work = q as f64 * cfg.trials as f64 * cfg.n as f64;
    if work > cfg.budget {
        return Err(Error::Budget(format!(
            "Q·trials·n = {work:.3e} exceeds the budget {:.3e}",
            cfg.budget
        )));
    }
    let sampler = match cfg.source {
        SourceModel::Gaussian { sigma2 } => {
            if cfg.law == CodebookLaw::Uniform {
                return domain("uniform codebook law is only defined for binary sources");
            }
            let sol = solve(cfg.source, cfg.rate)?;
            let var = sigma2 - sol.dstar;
            if let Some(rm) = cfg.rm {
                let acc = chi2_cdf(cfg.n as f64, rm * rm / var);
                if acc < MIN_ACCEPTANCE {
                    return Err(Error::Infeasible(format!(
                        "truncated codeword acceptance {acc:.3e} below {MIN_ACCEPTANCE:e}"
                    )));
                }
            }
            Sampler::Gaussian {
                x: Normal::new(0.0, sigma2.sqrt()).map_err(|e| Error::Domain(e.to_string()))?,
                y: Normal::new(0.0, var.sqrt()).map_err(|e| Error::Domain(e.to_string()))?,
                rm_sq: cfg.rm.map(|r| r * r),
            }
        }
        _ => {
            if cfg.n > 64 {
                return domain("binary experiments need n <= 64");
            }
            let p = cfg.source.bit_prob().unwrap_or(0.5);
            let z = match cfg.law {
                CodebookLaw::Uniform => 0.5,
                _ => match solve(cfg.source, cfg.rate)?.params {
                    crate::rd::RdParams::Bns { z, .. } => z,
                    _ => 0.5,
                },
            };
            Sampler::Binary { p, z }
        }
    };
    let chunks = cfg.trials.div_ceil(CHUNK);
    let parts: Vec<Result<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = Moments::default();
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            for trial in c * CHUNK..((c + 1) * CHUNK).min(cfg.trials) {
                rng.set_stream(trial);
                rng.set_word_pos(0);
                m.push(draw_trial(&sampler, cfg, q, &mut rng)?);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for p in parts {
        total = total.merge(p?);
    }
    Ok(McEstimate {
        mean: total.mean,
        stderr: total.stderr(),
        trials: cfg.trials,
        q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_examples() {
        let cb = Codebook::binary(2, vec![0b00, 0b11]).unwrap();
        assert_eq!(quantize(&SourceWord::Bits(0b01), &cb).unwrap(), (0, 0.5));
        assert_eq!(quantize(&SourceWord::Bits(0b11), &cb).unwrap(), (1, 0.0));
        let cb = Codebook::real(vec![vec![-1.0], vec![1.0]]).unwrap();
        let (j, d) = quantize(&SourceWord::Real(vec![0.2]), &cb).unwrap();
        assert_eq!(j, 1);
        assert!((d - 0.64).abs() < 1e-15);
        assert!(quantize(&SourceWord::Bits(1), &cb).is_err());
    }

    #[test]
    fn exact_distortion_examples() {
        let cb = Codebook::binary(2, vec![0b00, 0b11]).unwrap();
        assert!(
            (exact_distortion(SourceModel::BinarySymmetric, &cb).unwrap() - 0.25).abs() < 1e-15
        );
        let all = Codebook::binary(3, (0..8).collect()).unwrap();
        assert_eq!(
            exact_distortion(SourceModel::BinarySymmetric, &all).unwrap(),
            0.0
        );
        let zero = Codebook::binary(2, vec![0]).unwrap();
        let v = exact_distortion(SourceModel::BinaryNonSymmetric { p: 0.4 }, &zero).unwrap();
        assert!((v - 0.4).abs() < 1e-15);
        let big = Codebook::binary(25, vec![0]).unwrap();
        assert!(matches!(
            exact_distortion(SourceModel::BinarySymmetric, &big),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn residue_example() {
        let cb = Codebook::binary(2, vec![0b00, 0b11]).unwrap();
        let sol = solve(SourceModel::BinarySymmetric, 0.5).unwrap();
        let want = (0.25 - sol.dstar) * 2.0 / sol.lambda_hat;
        assert!((delta_residue(&cb, 0.5).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn singleton_regions_error_prob() {
        // Every word is a codeword: x decodes to itself with prob (1-q0)^n.
        let n = 4;
        let cb = Codebook::binary(n, (0..16).collect()).unwrap();
        let q0 = solve(SourceModel::BinarySymmetric, 0.5).unwrap().dstar;
        let want = 1.0 - (1.0 - q0).powi(n as i32);
        assert!((duality_error_prob(&cb, 0.5).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&v| all.push(v));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..333].iter().for_each(|&v| a.push(v));
        xs[333..].iter().for_each(|&v| b.push(v));
        let m = a.merge(b);
        assert!((m.mean - all.mean).abs() < 1e-12);
        assert!((m.variance() - all.variance()).abs() < 1e-9);
    }

    #[test]
    fn mc_is_deterministic_and_budgeted() {
        let cfg = ExperimentConfig::new(SourceModel::BinarySymmetric, 8, 0.5, 5000, 7);
        let a = mc_mean_distortion(&cfg).unwrap();
        assert_eq!(a, mc_mean_distortion(&cfg).unwrap());
        assert_eq!(a.q, 16);
        let big = ExperimentConfig {
            budget: 100.0,
            ..cfg
        };
        assert!(matches!(mc_mean_distortion(&big), Err(Error::Budget(_))));
    }

    #[test]
    fn mc_single_symbol_two_codewords() {
        // n = 1, Q = 2 uniform codewords: x is missed by both w.p. 1/4.
        let mut cfg = ExperimentConfig::new(SourceModel::BinarySymmetric, 1, 1.0, 200_000, 3);
        cfg.law = CodebookLaw::Uniform;
        let e = mc_mean_distortion(&cfg).unwrap();
        assert!((e.mean - 0.25).abs() < 4.0 * e.stderr, "{e:?}");
    }

    #[test]
    fn infeasible_truncation() {
        let mut cfg = ExperimentConfig::new(SourceModel::Gaussian { sigma2: 1.0 }, 50, 0.1, 10, 1);
        cfg.rm = Some(0.5);
        assert!(matches!(
            mc_mean_distortion(&cfg),
            Err(Error::Infeasible(_))
        ));
    }
}
