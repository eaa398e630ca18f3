//! Seeded generators and direct reference formulas shared by the
//! integration tests. The formulas here are written from scratch so that the
//! library is checked against something other than itself.

#![allow(dead_code)]

use distguess::limits::oracle_size;
use distguess::{Alphabet, DistortionMeasure, GuessInstance, Pmf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly positive pmf of length `n`.
pub fn random_pmf(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| 0.02 + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Random instance with `|X| <= 10`, `|X̂| <= 8`, integer distortions in
/// `0..=3` with a zero in every row, and `D` in `[0, 2.5)`. Draws are
/// repeated until the exhaustive functional search fits its cap.
pub fn random_instance(rng: &mut ChaCha8Rng) -> GuessInstance {
    loop {
        let nx = rng.random_range(2..=10);
        let nh = rng.random_range(2..=8);
        let probs = random_pmf(rng, nx);
        let rows: Vec<Vec<f64>> = (0..nx)
            .map(|_| {
                let mut row: Vec<f64> = (0..nh).map(|_| rng.random_range(0..=3) as f64).collect();
                row[rng.random_range(0..nh)] = 0.0;
                row
            })
            .collect();
        let budget = rng.random_range(0.0..2.5);
        let inst = GuessInstance::new(
            Pmf::new(Alphabet::numbered(nx).unwrap(), probs).unwrap(),
            Alphabet::new((0..nh).map(|j| format!("c{j}"))).unwrap(),
            DistortionMeasure::new(rows).unwrap(),
            budget,
        )
        .unwrap();
        if oracle_size(&inst, 0.0) <= 1_000_000 {
            return inst;
        }
    }
}

/// `H_α(p)` in bits straight from the definition.
pub fn renyi(p: &[f64], alpha: f64) -> f64 {
    let total: f64 = p.iter().sum();
    if (alpha - 1.0).abs() < 1e-15 {
        return -p
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| (v / total) * (v / total).log2())
            .sum::<f64>();
    }
    let s: f64 = p
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| (v / total).powf(alpha))
        .sum();
    s.log2() / (1.0 - alpha)
}

pub fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Guess index of `x` under `order` by scanning, for any instance.
pub fn scan_index(inst: &GuessInstance, order: &[usize], x: usize) -> Option<usize> {
    order
        .iter()
        .position(|&c| inst.distortion().get(x, c) <= inst.budget() + 1e-12)
        .map(|i| i + 1)
}

/// `(1/ρ) log2 Σ P(x) G(x)^ρ` with errors excluded.
pub fn scan_moment_log(inst: &GuessInstance, order: &[usize], rho: f64) -> f64 {
    let p = inst.pmf().probs();
    let s: f64 = (0..p.len())
        .filter_map(|x| scan_index(inst, order, x).map(|g| p[x] * (g as f64).powf(rho)))
        .sum();
    s.log2() / rho
}

/// Minimum `H_α` of the pushforward over every admissible map on the
/// support, by plain odometer enumeration.
pub fn brute_functional(inst: &GuessInstance, alpha: f64) -> f64 {
    let p = inst.pmf().probs();
    let support: Vec<usize> = (0..p.len()).filter(|&x| p[x] > 0.0).collect();
    let options: Vec<Vec<usize>> = support
        .iter()
        .map(|&x| {
            (0..inst.reproduction_len())
                .filter(|&c| inst.distortion().get(x, c) <= inst.budget() + 1e-12)
                .collect()
        })
        .collect();
    let mut digits = vec![0usize; support.len()];
    let mut best = f64::INFINITY;
    loop {
        let mut push = vec![0.0; inst.reproduction_len()];
        for (k, &x) in support.iter().enumerate() {
            push[options[k][digits[k]]] += p[x];
        }
        best = best.min(renyi(&push, alpha));
        let mut k = 0;
        loop {
            if k == digits.len() {
                return best;
            }
            digits[k] += 1;
            if digits[k] < options[k].len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}
