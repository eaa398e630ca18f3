//! Guessing strategies: distortion balls, the greedy cover, guess indices,
//! exact and sampled guessing moments.
//!
//! A strategy is an ordered list of distinct reproduction indices. The guess
//! index of `x` is the 1-based position of the first codeword within
//! distortion `D` of `x`; when no codeword qualifies the guess is an error and
//! `x` is excluded from moment sums.

use num_rational::BigRational;
use num_traits::Zero;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::model::{GuessInstance, JointGuessInstance};
use crate::num::{check_eps, check_rho, serialize_real, TOL};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Greedy,
    UserSupplied,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GuessingStrategy {
    codewords: Vec<usize>,
    budget: f64,
    origin: Origin,
}

impl GuessingStrategy {
    /// A user-supplied strategy; indices must be valid and distinct.
    pub fn new(codewords: Vec<usize>, inst: &GuessInstance) -> Result<Self> {
        let m = inst.reproduction_len();
        for (i, &c) in codewords.iter().enumerate() {
            if c >= m {
                return Err(Error::invalid(
                    format!("strategy[{i}]"),
                    format!("reproduction index {c} out of range (size {m})"),
                ));
            }
            if codewords[..i].contains(&c) {
                return Err(Error::invalid(
                    format!("strategy[{i}]"),
                    format!("duplicate codeword {c}"),
                ));
            }
        }
        Ok(GuessingStrategy {
            codewords,
            budget: inst.budget(),
            origin: Origin::UserSupplied,
        })
    }

    /// A user-supplied strategy given by reproduction labels.
    pub fn from_labels<S: AsRef<str>>(labels: &[S], inst: &GuessInstance) -> Result<Self> {
        let codewords = labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                inst.reproduction().index_of(l.as_ref()).ok_or_else(|| {
                    Error::invalid(
                        format!("strategy[{i}]"),
                        format!("unknown reproduction label {:?}", l.as_ref()),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        GuessingStrategy::new(codewords, inst)
    }

    pub fn codewords(&self) -> &[usize] {
        &self.codewords
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn labels<'a>(&self, inst: &'a GuessInstance) -> Vec<&'a str> {
        self.codewords
            .iter()
            .map(|&c| inst.reproduction().label(c))
            .collect()
    }
}

/// One greedy strategy per observed side-information symbol.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SideInfoStrategy {
    per_y: Vec<(usize, GuessingStrategy)>,
}

impl SideInfoStrategy {
    pub fn new(per_y: Vec<(usize, GuessingStrategy)>) -> Self {
        let mut per_y = per_y;
        per_y.sort_by_key(|(y, _)| *y);
        SideInfoStrategy { per_y }
    }

    pub fn get(&self, y: usize) -> Option<&GuessingStrategy> {
        self.per_y
            .binary_search_by_key(&y, |(k, _)| *k)
            .ok()
            .map(|i| &self.per_y[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &GuessingStrategy)> {
        self.per_y.iter().map(|(y, s)| (*y, s))
    }
}

/// The greedy cells: cell `i` holds the source symbols first covered by the
/// `i`-th chosen ball.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverPartition {
    pub cells: Vec<Vec<usize>>,
    pub cell_masses: Vec<f64>,
    pub codewords: Vec<usize>,
    pub uncovered_mass: f64,
}

impl CoverPartition {
    /// Number of cells (τ).
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cell masses with the uncovered mass added to the first (largest) cell.
    pub fn folded_masses(&self) -> Vec<f64> {
        let mut m = self.cell_masses.clone();
        match m.first_mut() {
            Some(top) => *top += self.uncovered_mass,
            None => m.push(self.uncovered_mass),
        }
        m
    }

    /// 0-based cell containing `x`, if covered.
    pub fn cell_of(&self, x: usize) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(&x))
    }
}

/// `{ x : d(x, x̂) <= D }`, ascending.
pub fn distortion_ball(inst: &GuessInstance, xhat: usize) -> Vec<usize> {
    (0..inst.source_len())
        .filter(|&x| inst.within(x, xhat))
        .collect()
}

/// Greedy cover stopping once the uncovered mass is at most `eps`.
///
/// Each step picks the codeword whose ball captures the most not-yet-covered
/// mass, breaking ties by the smallest reproduction index. Ties are decided
/// exactly when the pmf carries rational values, otherwise up to [`TOL`].
/// With `eps = 0` the result covers the whole support.
pub fn greedy_cover(inst: &GuessInstance, eps: f64) -> Result<(CoverPartition, GuessingStrategy)> {
    check_eps(eps)?;
    Ok(build_cover(inst, eps))
}

fn build_cover(inst: &GuessInstance, eps: f64) -> (CoverPartition, GuessingStrategy) {
    let probs = inst.pmf().probs();
    let exact = inst.pmf().exact();
    let balls: Vec<Vec<usize>> = (0..inst.reproduction_len())
        .map(|c| distortion_ball(inst, c))
        .collect();
    let mut covered = vec![false; probs.len()];
    let mut partition = CoverPartition {
        cells: Vec::new(),
        cell_masses: Vec::new(),
        codewords: Vec::new(),
        uncovered_mass: uncovered_sum(probs, &covered),
    };

    while partition.uncovered_mass > eps {
        let gain = |c: usize| -> f64 {
            balls[c]
                .iter()
                .filter(|&&x| !covered[x])
                .map(|&x| probs[x])
                .sum()
        };
        let exact_gain = |c: usize, e: &[BigRational]| -> BigRational {
            balls[c]
                .iter()
                .filter(|&&x| !covered[x])
                .fold(BigRational::zero(), |acc, &x| acc + &e[x])
        };

        let mut best = 0;
        let mut best_gain = gain(0);
        let mut best_exact = exact.map(|e| exact_gain(0, e));
        for c in 1..balls.len() {
            let g = gain(c);
            let better = match (exact, &best_exact) {
                (Some(e), Some(be)) => {
                    let ge = exact_gain(c, e);
                    let better = ge > *be;
                    if better {
                        best_exact = Some(ge);
                    }
                    better
                }
                _ => g > best_gain + TOL,
            };
            if better {
                best = c;
                best_gain = g;
            }
        }
        if best_gain <= 0.0 {
            // Only zero-probability symbols remain.
            break;
        }

        let cell: Vec<usize> = balls[best].iter().copied().filter(|&x| !covered[x]).collect();
        for &x in &cell {
            covered[x] = true;
        }
        partition.cells.push(cell);
        partition.cell_masses.push(best_gain);
        partition.codewords.push(best);
        partition.uncovered_mass = uncovered_sum(probs, &covered);
    }

    let strategy = GuessingStrategy {
        codewords: partition.codewords.clone(),
        budget: inst.budget(),
        origin: Origin::Greedy,
    };
    (partition, strategy)
}

/// Same summation order as [`error_probability`], so the two agree bit for bit.
fn uncovered_sum(probs: &[f64], covered: &[bool]) -> f64 {
    probs
        .iter()
        .zip(covered)
        .filter(|(_, &c)| !c)
        .map(|(&p, _)| p)
        .sum()
}

/// Greedy cover per observed `y`, with weights `P_Y(y)`.
pub fn side_info_partitions(
    joint: &JointGuessInstance,
    eps: f64,
) -> Result<Vec<(usize, f64, CoverPartition, GuessingStrategy)>> {
    check_eps(eps)?;
    joint
        .observed_y()
        .into_par_iter()
        .map(|y| {
            let slice = joint.slice(y)?;
            let (part, strat) = build_cover(&slice, eps);
            Ok((y, joint.joint().marginal_y_prob(y), part, strat))
        })
        .collect()
}

pub fn side_info_cover(joint: &JointGuessInstance, eps: f64) -> Result<SideInfoStrategy> {
    Ok(SideInfoStrategy::new(
        side_info_partitions(joint, eps)?
            .into_iter()
            .map(|(y, _, _, s)| (y, s))
            .collect(),
    ))
}

/// 1-based index of the first codeword within distortion `D` of `x`, or
/// `None` when the strategy declares an error.
pub fn guess_index(strategy: &GuessingStrategy, inst: &GuessInstance, x: usize) -> Option<usize> {
    strategy
        .codewords
        .iter()
        .position(|&c| inst.within(x, c))
        .map(|j| j + 1)
}

pub fn error_probability(strategy: &GuessingStrategy, inst: &GuessInstance) -> f64 {
    inst.pmf()
        .probs()
        .iter()
        .enumerate()
        .filter(|&(x, _)| guess_index(strategy, inst, x).is_none())
        .map(|(_, &p)| p)
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum GuessIndices {
    PerSymbol(Vec<Option<usize>>),
    /// Indexed `[x][y]`.
    PerPair(Vec<Vec<Option<usize>>>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GuessReport {
    pub rho: f64,
    pub moment: f64,
    /// `(1/ρ) log2 moment`; `-inf` when every outcome is an error.
    #[serde(serialize_with = "serialize_real")]
    pub moment_log: f64,
    pub error_mass: f64,
    pub guess_indices: GuessIndices,
}

fn finish_report(rho: f64, weighted: f64, total: f64, error_mass: f64, idx: GuessIndices) -> GuessReport {
    // Dividing by the total mass (one up to rounding) makes G ≡ 1 give
    // exactly moment 1.
    let moment = if weighted > 0.0 { weighted / total } else { 0.0 };
    let moment_log = if moment > 0.0 {
        moment.log2() / rho
    } else {
        f64::NEG_INFINITY
    };
    GuessReport {
        rho,
        moment,
        moment_log,
        error_mass,
        guess_indices: idx,
    }
}

/// Exact `E[G(X)^ρ]` over the successfully guessed mass.
pub fn moment(strategy: &GuessingStrategy, inst: &GuessInstance, rho: f64) -> Result<GuessReport> {
    check_rho(rho)?;
    let probs = inst.pmf().probs();
    let idx: Vec<Option<usize>> = (0..probs.len())
        .map(|x| guess_index(strategy, inst, x))
        .collect();
    let (mut weighted, mut total, mut err) = (0.0, 0.0, 0.0);
    for (&p, g) in probs.iter().zip(&idx) {
        total += p;
        match g {
            Some(g) => weighted += p * (*g as f64).powf(rho),
            None => err += p,
        }
    }
    Ok(finish_report(rho, weighted, total, err, GuessIndices::PerSymbol(idx)))
}

/// Exact `E[G(X|Y)^ρ]`; outcomes whose `y` has no stored strategy count as
/// errors.
pub fn side_info_moment(
    s: &SideInfoStrategy,
    joint: &JointGuessInstance,
    rho: f64,
) -> Result<GuessReport> {
    check_rho(rho)?;
    let probs = joint.joint().probs();
    let ny = joint.joint().y_alphabet().len();
    let slices: Vec<Option<GuessInstance>> = (0..ny)
        .map(|y| s.get(y).and_then(|_| joint.slice(y).ok()))
        .collect();
    let (mut weighted, mut total, mut err) = (0.0, 0.0, 0.0);
    let mut idx = vec![vec![None; ny]; probs.len()];
    for (x, row) in probs.iter().enumerate() {
        for (y, &p) in row.iter().enumerate() {
            total += p;
            let g = match (s.get(y), &slices[y]) {
                (Some(strat), Some(slice)) => guess_index(strat, slice, x),
                _ => None,
            };
            idx[x][y] = g;
            match g {
                Some(g) => weighted += p * (g as f64).powf(rho),
                None => err += p,
            }
        }
    }
    Ok(finish_report(rho, weighted, total, err, GuessIndices::PerPair(idx)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub rho: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub draws: usize,
    pub excluded_fraction: f64,
    pub seed: u64,
}

/// Sample mean of `G(X)^ρ` over `draws` samples from `P_X`, using ChaCha8
/// seeded with `seed`. Errored draws are excluded and reported as a fraction.
pub fn monte_carlo_moment(
    strategy: &GuessingStrategy,
    inst: &GuessInstance,
    rho: f64,
    draws: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    check_rho(rho)?;
    if draws == 0 {
        return Err(Error::Parameter {
            name: "draws",
            value: 0.0,
            expected: "draws >= 1",
        });
    }
    let weights: Vec<f64> = (0..inst.source_len())
        .map(|x| guess_index(strategy, inst, x).map_or(f64::NAN, |g| (g as f64).powf(rho)))
        .collect();
    let sampler = WeightedIndex::new(inst.pmf().probs())
        .map_err(|e| Error::invalid("pmf", format!("cannot sample: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(draws);
    for _ in 0..draws {
        let v = weights[sampler.sample(&mut rng)];
        if !v.is_nan() {
            values.push(v);
        }
    }
    let k = values.len();
    let excluded_fraction = (draws - k) as f64 / draws as f64;
    let (estimate, stderr) = if k == 0 {
        (0.0, 0.0)
    } else {
        let mean = values.iter().sum::<f64>() / k as f64;
        let var = if k > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1) as f64
        } else {
            0.0
        };
        (mean, (var / k as f64).sqrt())
    };
    Ok(MonteCarloEstimate {
        rho,
        estimate,
        stderr,
        draws,
        excluded_fraction,
        seed,
    })
}
