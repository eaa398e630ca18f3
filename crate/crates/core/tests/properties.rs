mod common;

use common::{random_instance, random_pmf, renyi, rng};
use distguess::{
    arimoto_conditional_entropy, blahut_arimoto, distortion_ball, error_probability, greedy_cover,
    guess_functional, guess_index, guessing_exponent, kl_divergence, moment, product_extend,
    renyi_entropy, Alphabet, DistortionMeasure, GuessInstance, JointPmf, Method, Pmf, RdOptions,
};
use proptest::prelude::*;
use rand::Rng;

fn pmf_strategy(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 2..=max_len).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn pmf(p: Vec<f64>) -> Pmf {
    Pmf::new(Alphabet::numbered(p.len()).unwrap(), p).unwrap()
}

proptest! {
    #[test]
    fn renyi_nonincreasing_and_bounded(p in pmf_strategy(8)) {
        let q = pmf(p.clone());
        let mut prev = f64::INFINITY;
        for alpha in [0.25, 0.5, 0.75, 1.0, 1.5, 2.0] {
            let h = renyi_entropy(&q, alpha).unwrap().bits;
            prop_assert!(h <= prev + 1e-12);
            prop_assert!(h >= -1e-12 && h <= (p.len() as f64).log2() + 1e-12);
            prop_assert!((h - renyi(&p, alpha)).abs() < 1e-10);
            prev = h;
        }
    }

    #[test]
    fn kl_nonnegative(p in pmf_strategy(6), seed in any::<u64>()) {
        let mut r = rng(seed);
        let q = random_pmf(&mut r, p.len());
        let d = kl_divergence(&pmf(p.clone()), &pmf(q)).unwrap();
        prop_assert!(d >= -1e-12);
        prop_assert!(kl_divergence(&pmf(p.clone()), &pmf(p)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn sorted_hamming_moment_is_weighted_rank(p in pmf_strategy(8)) {
        let inst = GuessInstance::hamming(p.clone(), 0.0).unwrap();
        let (_, s) = greedy_cover(&inst, 0.0).unwrap();
        let mut sorted = p.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let want: f64 = sorted.iter().enumerate().map(|(i, v)| v * (i + 1) as f64).sum();
        prop_assert!((moment(&s, &inst, 1.0).unwrap().moment - want).abs() < 1e-12);
    }
}

#[test]
fn uniform_attains_log_size() {
    for n in 2..10 {
        let h = renyi_entropy(&Pmf::uniform(Alphabet::numbered(n).unwrap()), 0.5).unwrap().bits;
        assert!((h - (n as f64).log2()).abs() < 1e-9);
    }
}

#[test]
fn conditioning_does_not_increase_entropy() {
    let mut r = rng(11);
    for _ in 0..1000 {
        let nx = r.random_range(2..=5);
        let ny = r.random_range(1..=4);
        let flat = random_pmf(&mut r, nx * ny);
        let rows: Vec<Vec<f64>> = flat.chunks(ny).map(<[f64]>::to_vec).collect();
        let j = JointPmf::new(Alphabet::numbered(nx).unwrap(), Alphabet::numbered(ny).unwrap(), rows).unwrap();
        for alpha in [0.25, 0.5, 2.0] {
            let cond = arimoto_conditional_entropy(&j, alpha).unwrap().bits;
            let plain = renyi_entropy(&j.marginal_x(), alpha).unwrap().bits;
            assert!(cond <= plain + 1e-9, "{cond} > {plain}");
        }
    }
}

#[test]
fn greedy_partition_identities() {
    let mut r = rng(12);
    for _ in 0..300 {
        let inst = random_instance(&mut r);
        let probs = inst.pmf().probs();
        for eps in [0.0, 0.2, 0.5] {
            let (part, s) = greedy_cover(&inst, eps).unwrap();
            for w in part.cell_masses.windows(2) {
                assert!(w[0] >= w[1], "cell masses increase: {:?}", part.cell_masses);
            }
            // Cells are disjoint and each prefix union equals the prefix ball union.
            let mut seen = vec![false; probs.len()];
            let mut ball_union = vec![false; probs.len()];
            for (i, cell) in part.cells.iter().enumerate() {
                for &x in cell {
                    assert!(!seen[x]);
                    seen[x] = true;
                }
                for x in distortion_ball(&inst, s.codewords()[i]) {
                    ball_union[x] = true;
                }
                for x in 0..probs.len() {
                    if probs[x] > 0.0 {
                        assert_eq!(seen[x], ball_union[x]);
                    }
                }
            }
            assert!(part.uncovered_mass <= eps);
            if eps == 0.0 {
                assert_eq!(error_probability(&s, &inst), 0.0);
                // E[log2 G] against the Shannon entropy of the cells.
                let elog: f64 = (0..probs.len())
                    .filter_map(|x| guess_index(&s, &inst, x).map(|g| probs[x] * (g as f64).log2()))
                    .sum();
                assert!(elog <= renyi(&part.cell_masses, 1.0) + 1e-9);
            }
        }
    }
}

#[test]
fn product_pmfs_multiply() {
    let mut r = rng(13);
    for _ in 0..20 {
        let n = r.random_range(2..=3);
        let inst = GuessInstance::hamming(random_pmf(&mut r, n), 0.0).unwrap();
        for (a, b) in [(1, 1), (1, 2), (2, 2), (1, 3)] {
            let pa = product_extend(&inst, a).unwrap();
            let pb = product_extend(&inst, b).unwrap();
            let pab = product_extend(&inst, a + b).unwrap();
            let (qa, qb, qab) = (
                pa.instance().pmf().probs(),
                pb.instance().pmf().probs(),
                pab.instance().pmf().probs(),
            );
            for i in 0..qa.len() {
                for j in 0..qb.len() {
                    assert!((qab[i * qb.len() + j] - qa[i] * qb[j]).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn functional_monotone_in_budget() {
    let mut r = rng(14);
    for _ in 0..100 {
        let inst = random_instance(&mut r);
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for budget in [0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
            let i = inst.with_budget(budget).unwrap();
            if distguess::limits::oracle_size(&i, 0.0) > 1_000_000 {
                break;
            }
            let o = guess_functional(&i, 0.5, 0.0, Method::Oracle).unwrap();
            let g = guess_functional(&i, 0.5, 0.0, Method::Greedy).unwrap();
            assert!(o <= prev.0 + 1e-12, "oracle rises with budget");
            assert!(g >= o - 1e-9);
            prev = (o, g);
        }
    }
}

#[test]
fn rate_distortion_nonincreasing_and_convex() {
    let d = DistortionMeasure::hamming(3);
    let p = pmf(vec![0.5, 0.3, 0.2]);
    let grid: Vec<f64> = (0..20).map(|k| 0.01 + 0.5 * k as f64 / 19.0).collect();
    let rates: Vec<f64> = grid
        .iter()
        .map(|&dd| blahut_arimoto(&p, &d, dd, RdOptions::default()).unwrap().rate)
        .collect();
    for w in rates.windows(2) {
        assert!(w[1] <= w[0] + 1e-6);
    }
    for w in rates.windows(3) {
        assert!(w[1] <= 0.5 * (w[0] + w[2]) + 1e-6);
    }
}

#[test]
fn rate_distortion_channel_invariants() {
    let mut r = rng(15);
    for _ in 0..30 {
        let inst = random_instance(&mut r);
        let d = inst.distortion();
        let budget = r.random_range(0.05..1.5);
        let res = blahut_arimoto(inst.pmf(), d, budget, RdOptions::default()).unwrap();
        let mut dist = 0.0;
        for (x, row) in res.channel.iter().enumerate() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            dist += inst.pmf().probs()[x] * row.iter().enumerate().map(|(j, w)| w * d.get(x, j)).sum::<f64>();
        }
        assert!(dist <= budget + 1e-6, "distortion {dist} > {budget}");
        assert!(res.rate >= 0.0);
    }
}

#[test]
fn exponent_sanity() {
    let d = DistortionMeasure::hamming(3);
    let p = pmf(vec![0.6, 0.3, 0.1]);
    let mut prev = f64::NEG_INFINITY;
    for rho in [0.5, 1.0, 2.0, 4.0] {
        let e = guessing_exponent(&p, &d, 0.3, rho, 40).unwrap();
        let r_p = blahut_arimoto(&p, &d, 0.3, RdOptions::default()).unwrap().rate;
        assert!(e.value >= r_p - 1e-9);
        assert!(e.value >= prev - 1e-6);
        // Re-evaluating the objective at the reported maximizer.
        let q = pmf(e.argmax.clone());
        let again = blahut_arimoto(&q, &d, 0.3, RdOptions::default()).unwrap().rate
            - kl_divergence(&q, &p).unwrap() / rho;
        assert!((again - e.value).abs() < 1e-6);
        prev = e.value;
    }
}
