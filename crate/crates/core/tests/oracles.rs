//! Independent oracles: exact big-integer arithmetic for the binary
//! thresholds, direct per-word enumeration for the quantization
//! functionals, and sampling for the Gaussian geometry.

use std::f64::consts::LN_2;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rdflb_core::bss::{self, BssBoundInput};
use rdflb_core::gauss::{threshold_prob, GaussBoundInput};
use rdflb_core::geometry::{prob_intersect, BallPair};
use rdflb_core::mc::{
    delta_residue, duality_error_prob, exact_distortion, mc_mean_distortion,
    random_binary_codebook, CodebookLaw, ExperimentConfig, Moments,
};
use rdflb_core::numeric::ln_choose;
use rdflb_core::rd::{solve, SourceModel};

fn binomials(n: u64) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for k in 0..n {
        let next = &row[k as usize] * BigUint::from(n - k) / BigUint::from(k + 1);
        row.push(next);
    }
    row
}

/// `ln` of a big integer, accurate to double precision.
fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * LN_2
}

fn big_ratio(num: &BigUint, den: &BigUint) -> f64 {
    (big_ln(num) - big_ln(den)).exp()
}

#[test]
fn ln_choose_matches_big_integers() {
    for n in [1u64, 7, 60, 61, 200, 1000, 4000] {
        let row = binomials(n);
        for k in (0..=n).step_by((n as usize / 17).max(1)) {
            let want = big_ln(&row[k as usize]);
            let got = ln_choose(n, k);
            assert!(
                (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                "C({n},{k}): {got} vs {want}"
            );
        }
    }
}

#[test]
fn bss_lower_bound_matches_exact_rational() {
    // With n(1-R) integral the bound is a ratio of integers.
    for n in [10u64, 50, 100, 200, 400, 1000] {
        let row = binomials(n);
        let target = BigUint::one() << (n / 2);
        let (mut cum, mut weighted) = (BigUint::zero(), BigUint::zero());
        let mut d = 0;
        while &cum + &row[d] <= target {
            cum += &row[d];
            weighted += &row[d] * BigUint::from(d);
            d += 1;
        }
        let num = weighted + (&target - &cum) * BigUint::from(d);
        let want = big_ratio(&num, &(target * BigUint::from(n)));
        let inp = BssBoundInput::new(n as u32, 0.5).unwrap();
        assert_eq!(bss::lower_threshold(&inp).0 as usize, d, "n = {n}");
        let got = bss::lower_bound(&inp);
        assert!(
            (got - want).abs() <= 1e-12 * want,
            "n = {n}: {got} vs {want}"
        );
    }
}

#[test]
fn bss_os_thresholds_match_exact_counts() {
    // Also pins the n = 300 -> 400 step of the ε = 0.01 curve (35 -> 47).
    for eps in [0.005f64, 0.01] {
        for n in (100u64..=1000).step_by(100) {
            let row = binomials(n);
            let ln_b = (1.0 / eps).ln().ln()
                - ((n / 2) as f64 * LN_2 + (-(-((n / 2) as f64) * LN_2).exp()).ln_1p());
            let mut cum = BigUint::zero();
            let mut t = 0;
            for (j, c) in row.iter().enumerate() {
                cum += c;
                if big_ln(&cum) - n as f64 * LN_2 >= ln_b {
                    t = j as u32;
                    break;
                }
            }
            let inp = BssBoundInput::new(n as u32, 0.5).unwrap();
            assert_eq!(
                bss::os_threshold(&inp, eps),
                (t, false),
                "n = {n}, eps = {eps}"
            );
        }
    }
    let t = |n| bss::os_threshold(&BssBoundInput::new(n, 0.5).unwrap(), 0.01).0;
    assert_eq!((t(300), t(400)), (35, 47));
}

fn hamming(a: u64, b: u64) -> u32 {
    (a ^ b).count_ones()
}

/// Nearest codeword by a plain scan with an explicit tie rule.
fn region(x: u64, words: &[u64]) -> (usize, u32) {
    let mut j = 0;
    for k in 1..words.len() {
        if hamming(x, words[k]) < hamming(x, words[j]) {
            j = k;
        }
    }
    (j, hamming(x, words[j]))
}

fn words(cb: &rdflb_core::mc::Codebook) -> Vec<u64> {
    match &cb.words {
        rdflb_core::mc::Words::Binary(w) => w.clone(),
        _ => unreachable!(),
    }
}

#[test]
fn quantization_functionals_match_direct_enumeration() {
    for (n, rate) in [(6u32, 0.5), (9, 0.34), (10, 0.25)] {
        let q = (n as f64 * rate).exp2().round() as u64;
        let sol = solve(SourceModel::BinarySymmetric, rate).unwrap();
        let q0 = sol.dstar;
        for k in 0..20 {
            let cb = random_binary_codebook(n, q, 0.5, 99, k).unwrap();
            let w = words(&cb);
            let (mut dist, mut mean_ln, mut hit) = (0.0, 0.0, 0.0);
            let mut sizes = vec![0u64; w.len()];
            for x in 0..(1u64 << n) {
                let (j, d) = region(x, &w);
                sizes[j] += 1;
                let px = (-(n as f64) * LN_2).exp();
                let ln_qhat = d as f64 * q0.ln() + (n - d) as f64 * (1.0 - q0).ln();
                dist += px * d as f64 / n as f64;
                mean_ln += px * (ln_qhat - px.ln());
                hit += ln_qhat.exp();
            }
            assert_eq!(sizes.iter().sum::<u64>(), 1 << n);
            let dr = n as f64 * rate * LN_2 - mean_ln;
            let pe = 1.0 - hit / q as f64;
            assert!(
                (exact_distortion(SourceModel::BinarySymmetric, &cb).unwrap() - dist).abs() < 1e-14
            );
            assert!((delta_residue(&cb, rate).unwrap() - dr).abs() < 1e-11);
            assert!((duality_error_prob(&cb, rate).unwrap() - pe).abs() < 1e-13);
        }
    }
    // Non-symmetric weights.
    let p: f64 = 0.3;
    let cb = random_binary_codebook(8, 12, 0.4, 5, 0).unwrap();
    let w = words(&cb);
    let want: f64 = (0..256u64)
        .map(|x| {
            let k = x.count_ones() as i32;
            p.powi(k) * (1.0 - p).powi(8 - k) * region(x, &w).1 as f64 / 8.0
        })
        .sum();
    let got = exact_distortion(SourceModel::BinaryNonSymmetric { p }, &cb).unwrap();
    assert!((got - want).abs() < 1e-14);
}

#[test]
fn mc_mean_matches_codebook_average() {
    // Random-codebook mean at n = 8, R = 1/2: MC over (x, codebook) pairs
    // against exact distortion averaged over 1000 enumerated codebooks.
    let cfg = ExperimentConfig::new(SourceModel::BinarySymmetric, 8, 0.5, 1_000_000, 11);
    let mc = mc_mean_distortion(&cfg).unwrap();
    let mut avg = Moments::default();
    for k in 0..1000 {
        let cb = random_binary_codebook(8, 16, 0.5, 12, k).unwrap();
        avg.push(exact_distortion(SourceModel::BinarySymmetric, &cb).unwrap());
    }
    let band = 4.0 * (mc.stderr.powi(2) + avg.stderr().powi(2)).sqrt();
    assert!(
        (mc.mean - avg.mean).abs() <= band,
        "mc {mc:?} vs {} ± {}",
        avg.mean,
        avg.stderr()
    );
}

#[test]
fn mc_two_codeword_exact_mean() {
    // n = 1, Q = 2 uniform codewords: enumerate the 4 codebooks and 2 inputs.
    let mut exact = 0.0;
    for y0 in 0..2u64 {
        for y1 in 0..2u64 {
            for x in 0..2u64 {
                exact += (hamming(x, y0).min(hamming(x, y1))) as f64 / 8.0;
            }
        }
    }
    assert_eq!(exact, 0.25);
    let mut cfg = ExperimentConfig::new(SourceModel::BinarySymmetric, 1, 1.0, 400_000, 21);
    cfg.law = CodebookLaw::Uniform;
    let e = mc_mean_distortion(&cfg).unwrap();
    assert!((e.mean - exact).abs() <= 4.0 * e.stderr);
}

fn gaussian_point<R: Rng>(rng: &mut R, n: u32, sd: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            sd * z
        })
        .collect()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

#[test]
fn ball_intersection_matches_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples = 200_000;
    for &(n, r0, c1, r1, s2) in &[
        (2u32, 1.0, 0.8, 1.2, 1.0),
        (5, 2.0, 1.5, 1.7, 0.8),
        (12, 3.5, 2.0, 3.0, 1.0),
        (30, 5.0, 3.0, 4.5, 0.9),
    ] {
        let bp = BallPair::new(n, r0, c1, r1, s2).unwrap();
        let mut hits = 0u64;
        for _ in 0..samples {
            let x = gaussian_point(&mut rng, n, s2.sqrt());
            let shifted: f64 = (x[0] - c1).powi(2) + x[1..].iter().map(|a| a * a).sum::<f64>();
            hits += (norm2(&x) <= r0 * r0 && shifted <= r1 * r1) as u64;
        }
        let p = prob_intersect(&bp);
        let phat = hits as f64 / samples as f64;
        let sd = (p * (1.0 - p) / samples as f64).sqrt().max(1e-9);
        assert!((phat - p).abs() <= 4.0 * sd, "{bp:?}: {p} vs {phat}");
    }
}

#[test]
fn bounded_threshold_prob_matches_rejection_sampling() {
    let inp = GaussBoundInput::new(8, 0.5, 1.0)
        .unwrap()
        .with_alpha(0.5)
        .unwrap();
    let rm = inp.rm.unwrap();
    let gap = inp.sigma2 - inp.dstar();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (s, t) = (2.5, 2.2);
    let (mut kept, mut hits) = (0u64, 0u64);
    while kept < 200_000 {
        let y = gaussian_point(&mut rng, 8, gap.sqrt());
        if norm2(&y) > rm * rm {
            continue;
        }
        kept += 1;
        let d2 = (y[0] - s).powi(2) + y[1..].iter().map(|a| a * a).sum::<f64>();
        hits += (d2 <= t * t) as u64;
    }
    let p = threshold_prob(s, t, &inp);
    let phat = hits as f64 / kept as f64;
    let sd = (p * (1.0 - p) / kept as f64).sqrt();
    assert!((phat - p).abs() <= 4.0 * sd, "{p} vs {phat}");
}

#[test]
fn gaussian_monte_carlo_sits_between_the_bounds() {
    for alpha in [None, Some(0.5)] {
        let mut inp = GaussBoundInput::new(8, 0.5, 1.0).unwrap();
        let mut cfg =
            ExperimentConfig::new(SourceModel::Gaussian { sigma2: 1.0 }, 8, 0.5, 50_000, 31);
        if let Some(a) = alpha {
            inp = inp.with_alpha(a).unwrap();
            cfg.rm = inp.rm;
        }
        let mc = mc_mean_distortion(&cfg).unwrap();
        let lo = rdflb_core::gauss::lower_bound(&inp).unwrap();
        let up = rdflb_core::gauss::upper_bound(&inp).unwrap().value;
        assert!(
            lo <= mc.mean + 3.0 * mc.stderr && mc.mean <= up + 3.0 * mc.stderr,
            "{alpha:?}: {lo} {mc:?} {up}"
        );
    }
}
