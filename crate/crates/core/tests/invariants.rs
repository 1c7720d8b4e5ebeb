//! Property tests for the numeric kernels, the geometry and the bounds.

use std::f64::consts::{LN_2, PI};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rdflb_core::bns;
use rdflb_core::bss::{self, BssBoundInput};
use rdflb_core::gauss::{gamma_cap, k0, k_excess, GaussBoundInput};
use rdflb_core::geometry::{prob_diff, prob_intersect, BallPair};
use rdflb_core::mc::{quantize, Codebook, Moments, SourceWord};
use rdflb_core::numeric::{
    binary_entropy_nats, chi2_cdf, cone_area, exp_gap_inverse, ln_choose, log_sum,
    noncentral_chi2_cdf, noncentral_chi2_quantile, unit_sphere_area, LogReal,
};
use rdflb_core::rd::{blahut_arimoto, solve, DiscreteChannel, SourceModel};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_sum_is_order_free(lns in prop::collection::vec(-690.0f64..690.0, 1..40), seed in any::<u64>()) {
        let a = log_sum(lns.iter().map(|&l| LogReal::from_ln(l)));
        let mut shuffled = lns.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let b = log_sum(shuffled.iter().map(|&l| LogReal::from_ln(l)));
        let (left, right) = lns.split_at(lns.len() / 2);
        let c = log_sum([
            log_sum(left.iter().map(|&l| LogReal::from_ln(l))),
            log_sum(right.iter().map(|&l| LogReal::from_ln(l))),
        ]);
        prop_assert!((a.ln() - b.ln()).abs() <= 1e-12 * a.ln().abs().max(1.0));
        prop_assert!((a.ln() - c.ln()).abs() <= 1e-12 * a.ln().abs().max(1.0));
    }

    #[test]
    fn chi2_cdfs_are_distribution_functions(n in 1u32..200, lam in 0.0f64..300.0) {
        let nf = n as f64;
        prop_assert_eq!(chi2_cdf(nf, 0.0), 0.0);
        prop_assert_eq!(noncentral_chi2_cdf(nf, lam, 0.0), 0.0);
        prop_assert!(chi2_cdf(nf, 1e6) > 1.0 - 1e-12);
        prop_assert!(noncentral_chi2_cdf(nf, lam, 1e6) > 1.0 - 1e-12);
        let top = 3.0 * (nf + lam) + 50.0;
        let (mut pc, mut pn) = (0.0, 0.0);
        for i in 1..=60 {
            let x = top * i as f64 / 60.0;
            let (c, nc) = (chi2_cdf(nf, x), noncentral_chi2_cdf(nf, lam, x));
            prop_assert!(c >= pc - 1e-15 && nc >= pn - 1e-15, "x = {x}");
            prop_assert!((noncentral_chi2_cdf(nf, 0.0, x) - c).abs() <= 1e-12);
            pc = c;
            pn = nc;
        }
    }

    #[test]
    fn quantile_inverts_cdf(n in 1u32..300, lam in 0.0f64..200.0, p in 1e-6f64..0.999_999) {
        let x = noncentral_chi2_quantile(n as f64, lam, p).unwrap();
        prop_assert!((noncentral_chi2_cdf(n as f64, lam, x) - p).abs() <= 1e-9 * p.max(1e-3));
    }

    #[test]
    fn exp_gap_inverse_round_trip(a in 1e-6f64..200.0, b in 1e-6f64..200.0) {
        prop_assume!(a < b);
        let (ta, tb) = (exp_gap_inverse(a), exp_gap_inverse(b));
        prop_assert!(ta < tb);
        prop_assert!(rel(ta - 1.0 + (-ta).exp(), a) <= 1e-12);
    }

    #[test]
    fn ball_pair_masses_add_up(n in 2u32..=50, f0 in 0.0f64..2.0, fc in 0.0f64..2.0, f1 in 0.05f64..2.0, s2 in 0.5f64..2.0) {
        let s = (n as f64).sqrt();
        let bp = BallPair::new(n, f0 * s, fc * s, f1 * s, s2).unwrap();
        let want = noncentral_chi2_cdf(n as f64, bp.c1 * bp.c1 / s2, bp.r1 * bp.r1 / s2);
        prop_assert!((prob_diff(&bp) + prob_intersect(&bp) - want).abs() <= 1e-8);
    }

    #[test]
    fn ball_pair_masses_are_monotone(n in 2u32..=30, f0 in 0.0f64..1.5, fc in 0.0f64..1.5, f1 in 0.05f64..1.5, k in 1.01f64..1.5) {
        let s = (n as f64).sqrt();
        let base = BallPair::new(n, f0 * s, fc * s, f1 * s, 1.0).unwrap();
        let wider0 = BallPair { r0: base.r0 * k, ..base };
        let wider1 = BallPair { r1: base.r1 * k, ..base };
        prop_assert!(prob_intersect(&wider0) >= prob_intersect(&base) - 1e-12);
        prop_assert!(prob_intersect(&wider1) >= prob_intersect(&base) - 1e-12);
        prop_assert!(prob_diff(&wider0) <= prob_diff(&base) + 1e-12);
    }

    #[test]
    fn quantize_picks_first_nearest(n in 1u32..16, seeds in prop::collection::vec(any::<u64>(), 1..20), x in any::<u64>()) {
        let mask = (1u64 << n) - 1;
        let words: Vec<u64> = seeds.iter().map(|s| s & mask).collect();
        let cb = Codebook::binary(n, words.clone()).unwrap();
        let (j, d) = quantize(&SourceWord::Bits(x & mask), &cb).unwrap();
        let dist: Vec<u32> = words.iter().map(|w| (w ^ (x & mask)).count_ones()).collect();
        let best = *dist.iter().min().unwrap();
        prop_assert_eq!(j, dist.iter().position(|&v| v == best).unwrap());
        prop_assert_eq!(d, best as f64 / n as f64);
    }

    #[test]
    fn moments_merge_is_associative(xs in prop::collection::vec(-1e3f64..1e3, 3..200), c1 in 0usize..100, c2 in 0usize..100) {
        let (a, b) = (c1.min(xs.len()), c2.min(xs.len()));
        let (lo, hi) = (a.min(b), a.max(b));
        let part = |s: &[f64]| {
            let mut m = Moments::default();
            s.iter().for_each(|&v| m.push(v));
            m
        };
        let (p, q, r) = (part(&xs[..lo]), part(&xs[lo..hi]), part(&xs[hi..]));
        let left = p.merge(q).merge(r);
        let right = p.merge(q.merge(r));
        let all = part(&xs);
        prop_assert!((left.mean - right.mean).abs() <= 1e-9 && (left.mean - all.mean).abs() <= 1e-9);
        prop_assert!(rel(left.variance(), all.variance()) <= 1e-9 || all.variance() < 1e-12);
    }

    #[test]
    fn small_n_thresholds_match_big_integers(n in 2u32..=20, k in 1u32..20, eps in 0.001f64..0.2) {
        prop_assume!(k < n);
        // R = k/n keeps 2^{n(1-R)} and Q integral.
        let rate = k as f64 / n as f64;
        let inp = BssBoundInput::new(n, rate).unwrap();
        let row: Vec<BigUint> = (0..=n as u64).map(|j| binom(n as u64, j)).collect();
        let target = BigUint::one() << (n - k);
        let mut cum = BigUint::zero();
        let mut d = 0;
        while &cum + &row[d] <= target {
            cum += &row[d];
            d += 1;
        }
        let alpha = (&target - &cum).to_f64().unwrap() / row[d].to_f64().unwrap();
        let (dt, at) = bss::lower_threshold(&inp);
        prop_assert_eq!(dt as usize, d);
        prop_assert!((at - alpha).abs() <= 1e-12);

        let q = (1u64 << k) as f64;
        let budget = (1.0 / eps).ln() / (q - 1.0);
        if budget < 1.0 {
            let total = (1u64 << n) as f64;
            let mut c = 0.0;
            let mut t = n;
            for (j, b) in row.iter().enumerate() {
                c += b.to_f64().unwrap();
                if c / total >= budget * (1.0 - 1e-12) {
                    t = j as u32;
                    break;
                }
            }
            prop_assert_eq!(bss::os_threshold(&inp, eps).0, t);
        }
    }

    #[test]
    fn bns_weight_pmfs_sum_to_one(n in 1u32..120, p in 0.01f64..0.5, z in 0.01f64..0.99) {
        let mut total = 0.0;
        for w in 0..=n {
            let mass = (ln_choose(n as u64, w as u64) + w as f64 * p.ln() + (n - w) as f64 * (-p).ln_1p()).exp();
            let prof = bns::weight_distance_pmf(n, w, z).unwrap();
            total += mass * prof.pmf().iter().sum::<f64>();
        }
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn bns_residual_is_nonnegative(n in 1u32..400, p in 0.05f64..0.5, f in 0.1f64..0.9) {
        let rate = f * rdflb_core::numeric::binary_entropy(p);
        let d = solve(SourceModel::BinaryNonSymmetric { p }, rate).unwrap().dstar;
        let s = bns::rearrangement_sum(n, rate, p, d);
        let nf = n as f64;
        prop_assert!(nf * rate * LN_2 - (s + nf * binary_entropy_nats(p)) >= -1e-10);
        prop_assert!(bns::lower_bound(n, rate, p).unwrap() >= d - 1e-12);
    }

    #[test]
    fn gaussian_integrand_is_a_probability(n in 2u32..200, rate in 0.1f64..1.5, t in 0.0f64..3.0, rf in 0.0f64..2.0, alpha in prop::option::of(0.2f64..3.0)) {
        let mut inp = GaussBoundInput::new(n, rate, 1.0).unwrap();
        if let Some(a) = alpha {
            inp = inp.with_alpha(a).unwrap();
        }
        let q = (n as f64 * rate * LN_2).exp();
        let r = rf * (n as f64).sqrt();
        let cover = (k0(t, &inp) + q * k_excess(t, r, &inp)).min(gamma_cap(t, &inp));
        prop_assert!((0.0..=1.0 + 1e-12).contains(&cover), "cover = {cover}");
    }
}

fn binom(n: u64, k: u64) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| {
        acc * BigUint::from(n - i) / BigUint::from(i + 1)
    })
}

#[test]
fn cone_over_full_angle_is_the_sphere() {
    for n in (2u32..=2000).step_by(37).chain([2000]) {
        let a = cone_area(n, PI).unwrap().ln();
        let b = unit_sphere_area(n).ln();
        assert!(((a - b).exp() - 1.0).abs() <= 1e-10, "n = {n}");
    }
}

#[test]
fn lambda_hat_is_the_slope() {
    let h = 1e-5;
    let sources = [
        SourceModel::BinarySymmetric,
        SourceModel::BinaryNonSymmetric { p: 0.4 },
        SourceModel::BinaryNonSymmetric { p: 0.15 },
        SourceModel::Gaussian { sigma2: 2.0 },
    ];
    for src in sources {
        for f in [0.2, 0.4, 0.6, 0.8] {
            let r = f * src.max_rate().min(2.0);
            let d = |r| solve(src, r).unwrap().dstar;
            let fd = -(d(r + h) - d(r - h)) / (2.0 * h) / LN_2;
            let lam = solve(src, r).unwrap().lambda_hat;
            assert!(rel(lam, fd) <= 1e-6, "{src:?} R = {r}: {lam} vs {fd}");
        }
    }
    for r in [0.1, 0.5, 0.9] {
        let s = solve(SourceModel::BinarySymmetric, r).unwrap();
        let q0 = s.dstar;
        assert!((s.lambda_hat * LN_2 * ((1.0 - q0) / q0).log2() - 1.0).abs() <= 1e-10);
        let g = solve(SourceModel::Gaussian { sigma2: 1.7 }, r).unwrap();
        assert!((g.lambda_hat - 2.0 * g.dstar).abs() <= 1e-12);
    }
}

#[test]
fn blahut_arimoto_traces_the_closed_form() {
    for p in [0.5, 0.4, 0.2] {
        let src = if p == 0.5 {
            SourceModel::BinarySymmetric
        } else {
            SourceModel::BinaryNonSymmetric { p }
        };
        for f in 1..=9 {
            let r = f as f64 / 10.0 * src.max_rate();
            let sol = solve(src, r).unwrap();
            let out = blahut_arimoto(
                &DiscreteChannel::binary_hamming(p).unwrap(),
                1.0 / sol.lambda_hat,
                1_000_000,
                1e-13,
            )
            .unwrap();
            assert!(
                (out.rate_bits - r).abs() <= 1e-4,
                "p = {p}, R = {r}: {}",
                out.rate_bits
            );
            assert!(
                (out.distortion - sol.dstar).abs() <= 1e-4,
                "p = {p}, R = {r}"
            );
        }
    }
}

#[test]
fn bss_bounds_sandwich_and_converge() {
    let dstar = solve(SourceModel::BinarySymmetric, 0.5).unwrap().dstar;
    let mut prev = f64::INFINITY;
    for n in (100..=1000).step_by(100) {
        let inp = BssBoundInput::new(n, 0.5).unwrap();
        let lo = bss::lower_bound(&inp);
        let up = [
            bss::upper_bound_os(&inp, 0.005).unwrap().value,
            bss::upper_bound_os(&inp, 0.01).unwrap().value,
            bss::upper_bound_rr(&inp, 0.4).unwrap(),
            bss::upper_bound_rr(&inp, 0.45).unwrap(),
        ];
        assert!(lo >= dstar && lo < prev, "n = {n}");
        assert!(up.iter().all(|&u| lo <= u + 1e-12), "n = {n}");
        prev = lo;
    }
}

#[test]
fn os_bound_is_nonincreasing_except_one_lattice_step() {
    // t_ε/n is a ratio of integers; at ε = 0.01 it steps up from n = 300
    // (35/300) to n = 400 (47/400). The exact-count oracle confirms both.
    let mut rises = Vec::new();
    for eps in [0.005, 0.01] {
        let vals: Vec<f64> = (100..=1000)
            .step_by(100)
            .map(|n| {
                bss::upper_bound_os(&BssBoundInput::new(n, 0.5).unwrap(), eps)
                    .unwrap()
                    .value
            })
            .collect();
        for (i, w) in vals.windows(2).enumerate() {
            if w[1] > w[0] + 1e-12 {
                rises.push((eps, 100 * (i + 1)));
            }
        }
    }
    assert_eq!(rises, [(0.01, 300)]);
}

#[test]
fn rearrangement_walk_beats_random_pairings() {
    // Element-wise arrays with nR integral so both have exactly 2^n entries.
    for (n, rate, p) in [(6u32, 0.5, 0.3), (8, 0.5, 0.4), (10, 0.3, 0.2)] {
        let d = solve(SourceModel::BinaryNonSymmetric { p }, rate)
            .unwrap()
            .dstar;
        let q = (n as f64 * rate).exp2().round() as u64;
        let mut a: Vec<f64> = (0..1u64 << n)
            .map(|x| {
                let k = x.count_ones() as i32;
                p.powi(k) * (1.0 - p).powi(n as i32 - k)
            })
            .collect();
        let level = |i: u32| i as f64 * d.ln() + (n - i) as f64 * (-d).ln_1p();
        let mut b = Vec::new();
        for i in 0..=n {
            let take =
                (q * binom(n as u64, i as u64).to_u64().unwrap()).min((1u64 << n) - b.len() as u64);
            b.extend(std::iter::repeat_n(level(i), take as usize));
        }
        assert_eq!(b.len(), 1 << n);
        a.sort_by(|x, y| y.total_cmp(x));
        b.sort_by(|x, y| y.total_cmp(x));
        let sorted: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let s = bns::rearrangement_sum(n, rate, p, d);
        assert!(
            rel(s, sorted) <= 1e-10,
            "n = {n}: walk {s} vs sorted {sorted}"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let mut perm = b.clone();
        for _ in 0..10_000 {
            perm.shuffle(&mut rng);
            let v: f64 = a.iter().zip(&perm).map(|(x, y)| x * y).sum();
            assert!(v <= s + 1e-12 * s.abs());
        }
    }
}
