//! Exhaustive ground truth for small instances: optimal guessing lists,
//! maximum `k`-ball coverage, and the moment/Rényi inequality used in the
//! achievability argument.

use serde::Serialize;

use crate::limits::{weight_sum, MassVector};
use crate::model::GuessInstance;
use crate::num::{binomial, check_eps, check_rho, BOUND_TOL, TOL};
use crate::strategy::{distortion_ball, greedy_cover, moment, GuessingStrategy};
use crate::{Error, Result};

/// Largest reproduction alphabet the strategy enumeration accepts.
pub const STRATEGY_SEARCH_MAX: usize = 8;

/// Largest number of `k`-subsets the coverage search accepts.
pub const COVERAGE_CAP: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    pub best_value: f64,
    pub witness: Vec<usize>,
    pub explored: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageResult {
    pub k: usize,
    pub optimal: f64,
    pub witness: Vec<usize>,
    /// Mass covered by the first `k` greedy codewords.
    pub greedy_prefix: f64,
    pub explored: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lemma3Check {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn check_strategy_cap(inst: &GuessInstance) -> Result<()> {
    let m = inst.reproduction_len();
    if m > STRATEGY_SEARCH_MAX {
        return Err(Error::CapExceeded {
            what: "strategy enumeration over reproduction alphabet".into(),
            size: m as u128,
            cap: STRATEGY_SEARCH_MAX as u128,
        });
    }
    Ok(())
}

/// Walks duplicate-free codeword sequences in lexicographic order.
///
/// A sequence is not extended once it covers the whole support, since further
/// codewords change no guess index. The visitor sees each nonempty sequence
/// with its unnormalized weighted sum `Σ P(x) G(x)^ρ` and uncovered mass, and
/// returns whether to descend further.
struct Walker<'a> {
    probs: &'a [f64],
    balls: Vec<Vec<usize>>,
    rho: f64,
    guess: Vec<Option<usize>>,
    seq: Vec<usize>,
    used: Vec<bool>,
    explored: u64,
}

impl Walker<'_> {
    fn new(inst: &GuessInstance, rho: f64) -> Walker<'_> {
        let m = inst.reproduction_len();
        Walker {
            probs: inst.pmf().probs(),
            balls: (0..m).map(|c| distortion_ball(inst, c)).collect(),
            rho,
            guess: vec![None; inst.source_len()],
            seq: Vec::new(),
            used: vec![false; m],
            explored: 0,
        }
    }

    fn uncovered(&self) -> f64 {
        self.probs
            .iter()
            .zip(&self.guess)
            .filter(|(_, g)| g.is_none())
            .map(|(&p, _)| p)
            .sum()
    }

    fn walk(&mut self, weighted: f64, visit: &mut dyn FnMut(&[usize], f64, f64) -> bool) {
        let depth = self.seq.len() + 1;
        let step = (depth as f64).powf(self.rho);
        for c in 0..self.balls.len() {
            if self.used[c] {
                continue;
            }
            let fresh: Vec<usize> = self.balls[c]
                .iter()
                .copied()
                .filter(|&x| self.guess[x].is_none())
                .collect();
            let mut w = weighted;
            for &x in &fresh {
                self.guess[x] = Some(depth);
                w += self.probs[x] * step;
            }
            self.used[c] = true;
            self.seq.push(c);
            self.explored += 1;

            let uncovered = self.uncovered();
            let descend = visit(&self.seq, w, uncovered);
            let support_covered = self
                .probs
                .iter()
                .zip(&self.guess)
                .all(|(&p, g)| p == 0.0 || g.is_some());
            if descend && !support_covered {
                self.walk(w, visit);
            }

            self.seq.pop();
            self.used[c] = false;
            for &x in &fresh {
                self.guess[x] = None;
            }
        }
    }
}

/// Every duplicate-free codeword sequence with error probability at most
/// `eps`, in lexicographic order.
pub fn all_strategies(inst: &GuessInstance, eps: f64) -> Result<Vec<GuessingStrategy>> {
    check_eps(eps)?;
    check_strategy_cap(inst)?;
    let mut out = Vec::new();
    let mut walker = Walker::new(inst, 1.0);
    walker.walk(0.0, &mut |seq, _, uncovered| {
        if uncovered <= eps {
            out.push(seq.to_vec());
        }
        true
    });
    out.into_iter()
        .map(|s| GuessingStrategy::new(s, inst))
        .collect()
}

/// Minimum of `E[G^ρ]` over all strategies with error probability at most
/// `eps`; ties go to the lexicographically smallest codeword list.
pub fn optimal_strategy_search(inst: &GuessInstance, rho: f64, eps: f64) -> Result<SearchResult> {
    check_rho(rho)?;
    check_eps(eps)?;
    check_strategy_cap(inst)?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut walker = Walker::new(inst, rho);
    walker.walk(0.0, &mut |seq, w, uncovered| {
        if let Some((bw, _)) = &best {
            // Appending codewords only adds nonnegative terms.
            if w >= *bw - TOL {
                return false;
            }
        }
        if uncovered <= eps {
            best = Some((w, seq.to_vec()));
            // Any extension has a larger sum.
            return false;
        }
        true
    });
    let explored = walker.explored;
    let (_, witness) = best.expect("the full reproduction list is feasible");
    let strategy = GuessingStrategy::new(witness, inst)?;
    Ok(SearchResult {
        best_value: moment(&strategy, inst, rho)?.moment,
        witness: strategy.codewords().to_vec(),
        explored,
    })
}

fn union_mass(inst: &GuessInstance, balls: &[Vec<usize>], chosen: &[usize]) -> f64 {
    let mut inside = vec![false; inst.source_len()];
    for &c in chosen {
        for &x in &balls[c] {
            inside[x] = true;
        }
    }
    inst.pmf()
        .probs()
        .iter()
        .zip(&inside)
        .filter(|(_, &i)| i)
        .map(|(&p, _)| p)
        .sum()
}

/// Largest mass covered by any `k` distortion balls, next to the greedy
/// `k`-prefix.
pub fn max_coverage_search(inst: &GuessInstance, k: usize) -> Result<CoverageResult> {
    let m = inst.reproduction_len();
    if k == 0 || k > m {
        return Err(Error::Parameter {
            name: "k",
            value: k as f64,
            expected: "1 <= k <= |reproduction alphabet|",
        });
    }
    let count = binomial(m, k);
    if count > COVERAGE_CAP {
        return Err(Error::CapExceeded {
            what: format!("coverage search C({m}, {k})"),
            size: count,
            cap: COVERAGE_CAP,
        });
    }
    let balls: Vec<Vec<usize>> = (0..m).map(|c| distortion_ball(inst, c)).collect();
    let mut combo: Vec<usize> = (0..k).collect();
    let mut best = (union_mass(inst, &balls, &combo), combo.clone());
    let mut explored = 1;
    // Lexicographic successor of a k-combination of 0..m.
    while let Some(i) = (0..k).rev().find(|&i| combo[i] < m - k + i) {
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
        explored += 1;
        let mass = union_mass(inst, &balls, &combo);
        if mass > best.0 {
            best = (mass, combo.clone());
        }
    }
    let (_, greedy) = greedy_cover(inst, 0.0)?;
    let prefix = &greedy.codewords()[..k.min(greedy.len())];
    Ok(CoverageResult {
        k,
        optimal: best.0,
        witness: best.1,
        greedy_prefix: union_mass(inst, &balls, prefix),
        explored,
    })
}

/// `Σ P_i i^ρ <= (Σ P_i^{1/(1+ρ)})^{1+ρ}` for masses sorted nonincreasing.
pub fn lemma3_check(masses: &MassVector, rho: f64) -> Result<Lemma3Check> {
    check_rho(rho)?;
    let lhs = weight_sum(masses.values(), rho);
    let beta = 1.0 / (1.0 + rho);
    let rhs = masses
        .values()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p.powf(beta))
        .sum::<f64>()
        .powf(1.0 + rho);
    Ok(Lemma3Check {
        lhs,
        rhs,
        holds: lhs <= rhs + BOUND_TOL,
    })
}

/// Randomized and exhaustive checks behind the `verify` command.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Greedy cell masses against every enumerated strategy's masses.
    Majorization,
    /// Moment/Rényi inequality on random sorted mass vectors.
    Lemma3,
    /// Greedy `k`-prefix mass against the best `k` balls.
    Coverage,
    /// Weight sums across Robin-Hood transfers.
    Schur,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "majorization" => Ok(Suite::Majorization),
            "lemma3" => Ok(Suite::Lemma3),
            "coverage" => Ok(Suite::Coverage),
            "schur" => Ok(Suite::Schur),
            other => Err(Error::invalid(
                "suite",
                format!("unknown suite {other:?} (majorization, lemma3, coverage, schur)"),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteViolation {
    pub case: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: u64,
    pub violations: u64,
    /// First few violations, in the order found.
    pub examples: Vec<SuiteViolation>,
}

const SUITE_EXAMPLES: usize = 20;

impl SuiteReport {
    fn new(suite: Suite, seed: u64) -> Self {
        SuiteReport {
            suite,
            seed,
            checks: 0,
            violations: 0,
            examples: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, case: u64, lhs: f64, rhs: f64, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations += 1;
            if self.examples.len() < SUITE_EXAMPLES {
                self.examples.push(SuiteViolation {
                    case,
                    lhs,
                    rhs,
                    detail: detail(),
                });
            }
        }
    }
}

/// Per-codeword masses of the outcomes each codeword guesses first.
fn strategy_masses(strategy: &GuessingStrategy, inst: &GuessInstance) -> Vec<f64> {
    let mut masses = vec![0.0; strategy.len()];
    for x in inst.pmf().support() {
        if let Some(g) = crate::strategy::guess_index(strategy, inst, x) {
            masses[g - 1] += inst.pmf().probs()[x];
        }
    }
    masses
}

fn random_sorted_masses(rng: &mut rand_chacha::ChaCha8Rng, max_len: usize) -> Vec<f64> {
    use rand::Rng;
    let len = rng.random_range(1..=max_len);
    let raw: Vec<f64> = (0..len).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let mut v: Vec<f64> = raw.iter().map(|r| r / total).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Runs `suite` against `inst` (exhaustive suites) or against `trials`
/// random cases drawn from `seed` (randomized suites).
pub fn run_suite(suite: Suite, inst: &GuessInstance, trials: u64, seed: u64) -> Result<SuiteReport> {
    use rand::{Rng, SeedableRng};
    let mut report = SuiteReport::new(suite, seed);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    match suite {
        Suite::Majorization => {
            let (part, _) = greedy_cover(inst, 0.0)?;
            let greedy = MassVector::new(part.cell_masses.clone())?;
            for (case, s) in all_strategies(inst, 0.0)?.iter().enumerate() {
                let other = MassVector::new(strategy_masses(s, inst))?;
                let ok = crate::limits::majorizes(&other, &greedy)?;
                report.record(ok, case as u64, other.total(), greedy.total(), || {
                    format!(
                        "greedy masses {:?} do not majorize {:?} (strategy {:?})",
                        greedy.values(),
                        other.values(),
                        s.codewords()
                    )
                });
            }
        }
        Suite::Coverage => {
            let m = inst.reproduction_len();
            for k in 1..=m {
                let r = max_coverage_search(inst, k)?;
                let ok = r.optimal <= r.greedy_prefix + TOL;
                report.record(ok, k as u64, r.greedy_prefix, r.optimal, || {
                    format!("k = {k}: balls {:?} cover more than the greedy prefix", r.witness)
                });
            }
        }
        Suite::Lemma3 => {
            if let Ok((part, _)) = greedy_cover(inst, 0.0) {
                for rho in [0.5, 1.0, 2.0] {
                    let c = lemma3_check(&MassVector::new(part.cell_masses.clone())?, rho)?;
                    report.record(c.holds, 0, c.lhs, c.rhs, || format!("instance cells, rho = {rho}"));
                }
            }
            for case in 1..=trials {
                let masses = MassVector::new(random_sorted_masses(&mut rng, 16))?;
                for rho in [0.5, 1.0, 2.0] {
                    let c = lemma3_check(&masses, rho)?;
                    report.record(c.holds, case, c.lhs, c.rhs, || {
                        format!("masses {:?}, rho = {rho}", masses.values())
                    });
                }
            }
        }
        Suite::Schur => {
            for case in 1..=trials {
                let rho = [0.5, 1.0, 2.0][rng.random_range(0..3)];
                let mut b = random_sorted_masses(&mut rng, 12);
                if b.len() < 2 {
                    b.push(0.0);
                }
                let i = rng.random_range(0..b.len() - 1);
                let j = rng.random_range(i + 1..b.len());
                let mut a = b.clone();
                let t = rng.random::<f64>() * (b[i] - b[j]) / 2.0;
                a[i] -= t;
                a[j] += t;
                let (a, b) = (MassVector::new(a)?, MassVector::new(b)?);
                let ordered = crate::limits::majorizes(&a, &b)?;
                let (ha, hb) = (schur_weight_sum_raw(&a, rho), schur_weight_sum_raw(&b, rho));
                report.record(ordered && ha >= hb - TOL, case, ha, hb, || {
                    format!("a = {:?}, b = {:?}, rho = {rho}", a.values(), b.values())
                });
            }
        }
    }
    Ok(report)
}

fn schur_weight_sum_raw(c: &MassVector, rho: f64) -> f64 {
    weight_sum(c.values(), rho)
}
