//! Distortion-ball Rényi functionals, one-shot bound reports, the index code
//! over greedy cells, and majorization utilities.
//!
//! The functional `ℍ^{D,ε}_α(X)` is the smallest Rényi entropy of a
//! reproduction `X̂` obtainable from `X` with `P[d(X, X̂) > D] <= ε`. Two
//! evaluations are offered:
//!
//! * [`Method::Greedy`]: Rényi entropy of the greedy cell masses, with any
//!   uncovered mass folded into the largest cell. This is the quantity the
//!   greedy strategy's moment is provably bounded by.
//! * [`Method::Oracle`]: exhaustive minimization over channel vertices. For
//!   `α < 1`, `Σ q^α` is concave, so the minimum over the channel polytope is
//!   attained at a vertex. With `ε = 0` the vertices are the deterministic
//!   maps into each symbol's admissible set. With `ε > 0` the single budget
//!   constraint adds vertices where one symbol is split between its admissible
//!   image and a violating one, so those are enumerated too. Violating mass is
//!   always placed on the largest entry of the pushforward, which majorizes
//!   every other placement.

use serde::Serialize;

use crate::entropy::{arimoto_bits, power_sum, renyi_bits};
use crate::model::{GuessInstance, JointGuessInstance};
use crate::num::{check_eps, check_rho, serialize_opt_real, serialize_real, BOUND_TOL, TOL};
use crate::strategy::{
    error_probability, greedy_cover, moment, side_info_cover, side_info_moment,
    side_info_partitions, CoverPartition, GuessingStrategy,
};
use crate::{Error, Result};

/// Limit on the number of candidate maps the oracle may enumerate.
pub const ORACLE_CAP: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Greedy,
    Oracle,
}

/// Nonnegative masses sorted nonincreasing, total at most one.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MassVector {
    values: Vec<f64>,
}

impl MassVector {
    /// Sorts `values` nonincreasing; rejects negative or non-finite entries and
    /// totals above `1 + 1e-12`.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!("masses[{i}]"), format!("invalid mass {v}")));
            }
        }
        let total: f64 = values.iter().sum();
        if total > 1.0 + TOL {
            return Err(Error::invalid("masses", format!("total {total} exceeds 1")));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(MassVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

fn check_alpha_unit(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter {
            name: "alpha",
            value: alpha,
            expected: "0 < alpha < 1",
        })
    }
}

/// `ℍ^{D,ε}_α(X)` in bits.
pub fn guess_functional(inst: &GuessInstance, alpha: f64, eps: f64, method: Method) -> Result<f64> {
    check_alpha_unit(alpha)?;
    check_eps(eps)?;
    match method {
        Method::Greedy => {
            let (part, _) = greedy_cover(inst, eps)?;
            Ok(renyi_bits(&part.folded_masses(), alpha))
        }
        Method::Oracle => Ok(oracle_map(inst, alpha, eps)?.value),
    }
}

/// `ℍ^{D,ε}_α(X|Y)` in bits. The error budget applies to each `Y = y` slice.
pub fn conditional_functional(
    joint: &JointGuessInstance,
    alpha: f64,
    eps: f64,
    method: Method,
) -> Result<f64> {
    check_alpha_unit(alpha)?;
    check_eps(eps)?;
    let slices: Vec<(f64, Vec<f64>)> = match method {
        Method::Greedy => side_info_partitions(joint, eps)?
            .into_iter()
            .map(|(_, py, part, _)| (py, part.folded_masses()))
            .collect(),
        Method::Oracle => joint
            .observed_y()
            .into_iter()
            .map(|y| {
                let sol = oracle_map(&joint.slice(y)?, alpha, eps)?;
                Ok((joint.joint().marginal_y_prob(y), sol.pushforward))
            })
            .collect::<Result<_>>()?,
    };
    Ok(arimoto_bits(&slices, alpha))
}

/// Minimizing vertex found by the exhaustive search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleMap {
    /// Minimum Rényi entropy in bits.
    pub value: f64,
    /// Image of each source symbol; `None` for zero-mass or violating symbols.
    pub map: Vec<Option<usize>>,
    /// A symbol whose mass is partly moved onto a violating image, with the
    /// moved mass.
    pub split: Option<(usize, f64)>,
    /// Distribution of `X̂` under the minimizing channel.
    pub pushforward: Vec<f64>,
    /// Complete assignments evaluated.
    pub explored: u64,
}

/// Upper bound on the oracle's enumeration size.
pub fn oracle_size(inst: &GuessInstance, eps: f64) -> u128 {
    let extra = usize::from(eps > 0.0);
    inst.pmf()
        .support()
        .map(|x| {
            (0..inst.reproduction_len())
                .filter(|&c| inst.within(x, c))
                .count()
                + extra
        })
        .try_fold(1u128, |acc, k| acc.checked_mul(k as u128))
        .unwrap_or(u128::MAX)
}

/// Exhaustive minimization of `H_α(X̂)` over channel vertices.
pub fn oracle_map(inst: &GuessInstance, alpha: f64, eps: f64) -> Result<OracleMap> {
    check_alpha_unit(alpha)?;
    check_eps(eps)?;
    let size = oracle_size(inst, eps);
    if size > ORACLE_CAP {
        return Err(Error::CapExceeded {
            what: "oracle map enumeration".into(),
            size,
            cap: ORACLE_CAP,
        });
    }
    let probs = inst.pmf().probs();
    let support: Vec<usize> = inst.pmf().support().collect();
    let options: Vec<Vec<usize>> = support
        .iter()
        .map(|&x| {
            (0..inst.reproduction_len())
                .filter(|&c| inst.within(x, c))
                .collect()
        })
        .collect();
    let masses: Vec<f64> = support.iter().map(|&x| probs[x]).collect();
    let mut suffix = vec![0.0; masses.len() + 1];
    for k in (0..masses.len()).rev() {
        suffix[k] = suffix[k + 1] + masses[k];
    }
    let m = inst.reproduction_len();
    let mut search = MapSearch {
        masses: &masses,
        options: &options,
        suffix: &suffix,
        alpha,
        eps,
        q: vec![0.0; m],
        violated: 0.0,
        assignment: vec![None; masses.len()],
        best: None,
        explored: 0,
    };
    search.descend(0);
    let best = search.best.expect("the all-admissible map is always feasible");
    let mut map = vec![None; probs.len()];
    for (k, &x) in support.iter().enumerate() {
        map[x] = best.assignment[k];
    }
    Ok(OracleMap {
        value: best.value,
        map,
        split: best.split.map(|(k, s)| (support[k], s)),
        pushforward: best.pushforward,
        explored: search.explored,
    })
}

struct Incumbent {
    value: f64,
    assignment: Vec<Option<usize>>,
    split: Option<(usize, f64)>,
    pushforward: Vec<f64>,
}

struct MapSearch<'a> {
    masses: &'a [f64],
    options: &'a [Vec<usize>],
    suffix: &'a [f64],
    alpha: f64,
    eps: f64,
    q: Vec<f64>,
    violated: f64,
    assignment: Vec<Option<usize>>,
    best: Option<Incumbent>,
    explored: u64,
}

impl MapSearch<'_> {
    fn bits(&self, s: f64) -> f64 {
        (s.log2() / (1.0 - self.alpha)).max(0.0)
    }

    /// Places `extra` on the largest entry of `q` (first index on ties).
    fn fold(q: &mut [f64], extra: f64) {
        if extra > 0.0 {
            let mut top = 0;
            for (j, &v) in q.iter().enumerate() {
                if v > q[top] {
                    top = j;
                }
            }
            q[top] += extra;
        }
    }

    fn offer(&mut self, q: Vec<f64>, split: Option<(usize, f64)>) {
        let value = self.bits(power_sum(&q, self.alpha));
        let better = match &self.best {
            None => true,
            Some(b) => value < b.value - TOL,
        };
        if better {
            self.best = Some(Incumbent {
                value,
                assignment: self.assignment.clone(),
                split,
                pushforward: q,
            });
        }
    }

    /// Lower bound on `Σ q^α` over all ways of adding `rest` to `q`:
    /// concavity puts the minimum at a single-entry placement.
    fn lower_bound(&self, rest: f64) -> f64 {
        let base = power_sum(&self.q, self.alpha);
        self.q
            .iter()
            .map(|&v| {
                let before = if v > 0.0 { v.powf(self.alpha) } else { 0.0 };
                base - before + (v + rest).powf(self.alpha)
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn descend(&mut self, k: usize) {
        if k == self.masses.len() {
            self.explored += 1;
            self.leaf();
            return;
        }
        // Split vertices modify already-assigned entries, so the bound is
        // only valid without an error budget.
        if self.eps == 0.0 {
            if let Some(best) = &self.best {
                let lb = self.bits(self.lower_bound(self.suffix[k] + self.violated));
                if lb >= best.value - TOL {
                    return;
                }
            }
        }
        let p = self.masses[k];
        for i in 0..self.options[k].len() {
            let c = self.options[k][i];
            self.q[c] += p;
            self.assignment[k] = Some(c);
            self.descend(k + 1);
            self.q[c] -= p;
            // Undo exactly: recompute when rounding leaves residue.
            if self.assignment[..k].iter().all(|a| *a != Some(c)) {
                self.q[c] = 0.0;
            }
        }
        if self.eps > 0.0 && self.violated + p <= self.eps {
            self.assignment[k] = None;
            self.violated += p;
            self.descend(k + 1);
            self.violated -= p;
        }
        self.assignment[k] = None;
    }

    fn leaf(&mut self) {
        let mut q = self.q.clone();
        Self::fold(&mut q, self.violated);
        self.offer(q, None);
        if self.eps == 0.0 {
            return;
        }
        let slack = self.eps - self.violated;
        if slack <= 0.0 {
            return;
        }
        for k in 0..self.masses.len() {
            let Some(c) = self.assignment[k] else { continue };
            if self.masses[k] <= slack {
                // Fully violating this symbol is a separate leaf.
                continue;
            }
            let mut q = self.q.clone();
            q[c] -= slack;
            Self::fold(&mut q, self.violated + slack);
            self.offer(q, Some((k, slack)));
        }
    }
}

/// Per-instance record of a strategy's moment against both functionals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub rho: f64,
    pub alpha: f64,
    pub eps: f64,
    pub error_probability: f64,
    #[serde(serialize_with = "serialize_real")]
    pub moment_log: f64,
    pub greedy_functional: f64,
    #[serde(serialize_with = "serialize_opt_real")]
    pub oracle_functional: Option<f64>,
    pub converse_slack: f64,
    /// `moment_log <= greedy_functional + 1e-9`.
    pub achievability_vs_greedy: bool,
    /// `moment_log <= oracle_functional + 1e-9`.
    pub achievability_vs_oracle: Option<bool>,
    /// `moment_log >= oracle_functional - converse_slack - 1e-9`; absent when
    /// the strategy's error probability exceeds `eps`.
    pub converse_vs_oracle: Option<bool>,
    #[serde(serialize_with = "serialize_opt_real")]
    pub functional_gap: Option<f64>,
}

/// How [`bounds_report_with`] treats the exhaustive functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleUse {
    Skip,
    /// Evaluate when within [`ORACLE_CAP`], otherwise leave it absent.
    IfFeasible,
    /// Evaluate, failing with [`Error::CapExceeded`] when infeasible.
    Require,
}

/// `log2 log2 (1 + min{|X|, |X̂|})`.
pub fn converse_slack(source_len: usize, reproduction_len: usize) -> f64 {
    (1.0 + source_len.min(reproduction_len) as f64).log2().log2()
}

pub fn bounds_report(
    inst: &GuessInstance,
    rho: f64,
    eps: f64,
    strategy: Option<&GuessingStrategy>,
) -> Result<BoundReport> {
    bounds_report_with(inst, rho, eps, strategy, OracleUse::IfFeasible)
}

pub fn bounds_report_with(
    inst: &GuessInstance,
    rho: f64,
    eps: f64,
    strategy: Option<&GuessingStrategy>,
    oracle: OracleUse,
) -> Result<BoundReport> {
    let (_, greedy) = greedy_cover(inst, eps)?;
    let strategy = strategy.unwrap_or(&greedy);
    Ok(bounds_reports(inst, rho, eps, std::slice::from_ref(strategy), oracle)?.remove(0))
}

/// Reports for several strategies on one instance, sharing the greedy and
/// exhaustive functionals.
pub fn bounds_reports(
    inst: &GuessInstance,
    rho: f64,
    eps: f64,
    strategies: &[GuessingStrategy],
    oracle: OracleUse,
) -> Result<Vec<BoundReport>> {
    check_rho(rho)?;
    check_eps(eps)?;
    let alpha = 1.0 / (1.0 + rho);
    let (part, _) = greedy_cover(inst, eps)?;
    let greedy_functional = renyi_bits(&part.folded_masses(), alpha);
    let oracle_functional = match oracle {
        OracleUse::Skip => None,
        OracleUse::IfFeasible => match oracle_map(inst, alpha, eps) {
            Ok(sol) => Some(sol.value),
            Err(e) if e.is_cap_exceeded() => None,
            Err(e) => return Err(e),
        },
        OracleUse::Require => Some(oracle_map(inst, alpha, eps)?.value),
    };
    let slack = converse_slack(inst.source_len(), inst.reproduction_len());
    strategies
        .iter()
        .map(|strategy| {
            let moment_log = moment(strategy, inst, rho)?.moment_log;
            Ok(assemble(
                rho,
                eps,
                error_probability(strategy, inst),
                moment_log,
                greedy_functional,
                oracle_functional,
                slack,
            ))
        })
        .collect()
}

/// The side-information counterpart: greedy per-`y` strategies against the
/// conditional functionals.
pub fn side_info_bounds_report(
    joint: &JointGuessInstance,
    rho: f64,
    eps: f64,
    oracle: OracleUse,
) -> Result<BoundReport> {
    check_rho(rho)?;
    check_eps(eps)?;
    let alpha = 1.0 / (1.0 + rho);
    let strategy = side_info_cover(joint, eps)?;
    let report = side_info_moment(&strategy, joint, rho)?;
    let greedy_functional = conditional_functional(joint, alpha, eps, Method::Greedy)?;
    let oracle_functional = match oracle {
        OracleUse::Skip => None,
        OracleUse::IfFeasible => match conditional_functional(joint, alpha, eps, Method::Oracle) {
            Ok(v) => Some(v),
            Err(e) if e.is_cap_exceeded() => None,
            Err(e) => return Err(e),
        },
        OracleUse::Require => Some(conditional_functional(joint, alpha, eps, Method::Oracle)?),
    };
    Ok(assemble(
        rho,
        eps,
        report.error_mass,
        report.moment_log,
        greedy_functional,
        oracle_functional,
        converse_slack(
            joint.joint().x_alphabet().len(),
            joint.reproduction().len(),
        ),
    ))
}

fn assemble(
    rho: f64,
    eps: f64,
    error_probability: f64,
    moment_log: f64,
    greedy_functional: f64,
    oracle_functional: Option<f64>,
    converse_slack: f64,
) -> BoundReport {
    let applicable = error_probability <= eps + TOL;
    BoundReport {
        rho,
        alpha: 1.0 / (1.0 + rho),
        eps,
        error_probability,
        moment_log,
        greedy_functional,
        oracle_functional,
        converse_slack,
        achievability_vs_greedy: moment_log <= greedy_functional + BOUND_TOL,
        achievability_vs_oracle: oracle_functional.map(|o| moment_log <= o + BOUND_TOL),
        converse_vs_oracle: oracle_functional
            .filter(|_| applicable)
            .map(|o| moment_log >= o - converse_slack - BOUND_TOL),
        functional_gap: oracle_functional.map(|o| greedy_functional - o),
    }
}

/// The `i`-th binary string in length-then-lexicographic order
/// (`λ, 0, 1, 00, 01, ...`) and its length `⌊log2 i⌋`.
pub fn index_code(i: u64) -> Result<(String, usize)> {
    if i == 0 {
        return Err(Error::Parameter {
            name: "i",
            value: 0.0,
            expected: "i >= 1",
        });
    }
    let len = (63 - i.leading_zeros()) as usize;
    let offset = i - (1u64 << len);
    let word = if len == 0 {
        String::new()
    } else {
        format!("{offset:0len$b}")
    };
    Ok((word, len))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodeEntry {
    /// 1-based cell index.
    pub cell: usize,
    pub word: String,
    pub length: usize,
    pub codeword: usize,
}

/// Variable-length code mapping greedy cell `i` to the `i`-th binary string.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodeTable {
    pub entries: Vec<CodeEntry>,
}

impl CodeTable {
    /// Word for source symbol `x`, if covered.
    pub fn encode(&self, partition: &CoverPartition, x: usize) -> Option<&str> {
        partition
            .cell_of(x)
            .map(|i| self.entries[i].word.as_str())
    }

    /// Reproduction codeword for a word.
    pub fn decode(&self, word: &str) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.word == word)
            .map(|e| e.codeword)
    }

    /// `Σ_i P_i 2^{ρ ℓ(w_i)}` for the given cell masses.
    pub fn length_moment(&self, cell_masses: &[f64], rho: f64) -> f64 {
        self.entries
            .iter()
            .zip(cell_masses)
            .map(|(e, &p)| p * (rho * e.length as f64).exp2())
            .sum()
    }
}

pub fn strategy_to_code(partition: &CoverPartition) -> CodeTable {
    let entries = partition
        .codewords
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let (word, length) = index_code(k as u64 + 1).expect("cell index is positive");
            CodeEntry {
                cell: k + 1,
                word,
                length,
                codeword: c,
            }
        })
        .collect();
    CodeTable { entries }
}

/// Whether `b` majorizes `a` (`a ≺ b`), after zero-padding to a common
/// length. Totals must agree within `1e-12`.
pub fn majorizes(a: &MassVector, b: &MassVector) -> Result<bool> {
    let (ta, tb) = (a.total(), b.total());
    if (ta - tb).abs() > TOL {
        return Err(Error::invalid(
            "masses",
            format!("totals differ: {ta} vs {tb}"),
        ));
    }
    let len = a.len().max(b.len());
    let at = |v: &MassVector, i: usize| v.values.get(i).copied().unwrap_or(0.0);
    let (mut sa, mut sb) = (0.0, 0.0);
    for i in 0..len {
        sa += at(a, i);
        sb += at(b, i);
        if sa > sb + TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `h(c) = Σ_i c_i i^ρ` with `i` starting at 1.
pub fn schur_weight_sum(c: &MassVector, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(weight_sum(c.values(), rho))
}

pub(crate) fn weight_sum(c: &[f64], rho: f64) -> f64 {
    c.iter()
        .enumerate()
        .map(|(i, &v)| v * ((i + 1) as f64).powf(rho))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn hamming(p: Vec<f64>) -> GuessInstance {
        GuessInstance::hamming(p, 0.0).unwrap()
    }

    #[test]
    fn single_ball_gives_zero() {
        let inst = hamming(vec![0.2, 0.3, 0.5]).with_budget(1.0).unwrap();
        for m in [Method::Greedy, Method::Oracle] {
            assert_eq!(guess_functional(&inst, 0.5, 0.0, m).unwrap(), 0.0);
        }
    }

    #[test]
    fn hamming_zero_is_renyi() {
        let p = vec![0.1, 0.2, 0.3, 0.4];
        let inst = hamming(p.clone());
        let want = renyi_bits(&p, 0.4);
        for m in [Method::Greedy, Method::Oracle] {
            let v = guess_functional(&inst, 0.4, 0.0, m).unwrap();
            assert!((v - want).abs() < 1e-12, "{m:?}: {v} vs {want}");
        }
    }

    #[test]
    fn stress_fixture_gap() {
        let inst = fixtures::overlap_stress();
        let g = guess_functional(&inst, 0.5, 0.0, Method::Greedy).unwrap();
        let o = guess_functional(&inst, 0.5, 0.0, Method::Oracle).unwrap();
        // Independent evaluations of 2 log2 Σ sqrt(mass).
        let g_want = 2.0 * (0.4f64.sqrt() + 0.5 + 2.0 * 0.175f64.sqrt()).log2();
        let o_want = 2.0 * (2.0 * 0.375f64.sqrt() + 0.5).log2();
        assert!((g - g_want).abs() < 1e-12);
        assert!((o - o_want).abs() < 1e-12);
        assert!((o - 1.57276).abs() < 1e-5);
        assert!((g - o - 0.38234).abs() < 1e-3);
    }

    #[test]
    fn eps_folds_into_top_cell() {
        let inst = hamming(vec![0.2, 0.3, 0.5]);
        let want = 2.0 * (0.7f64.sqrt() + 0.3f64.sqrt()).log2();
        assert!((want - 0.93848).abs() < 1e-5);
        for m in [Method::Greedy, Method::Oracle] {
            let v = guess_functional(&inst, 0.5, 0.2, m).unwrap();
            assert!((v - want).abs() < 1e-12, "{m:?}: {v}");
        }
    }

    #[test]
    fn oracle_uses_split_vertices() {
        // No deterministic map may violate either symbol (mass 0.5 > 0.25),
        // but moving a quarter of one symbol onto the other reaches (0.75, 0.25).
        let inst = hamming(vec![0.5, 0.5]);
        let sol = oracle_map(&inst, 0.5, 0.25).unwrap();
        let want = renyi_bits(&[0.75, 0.25], 0.5);
        assert!((sol.value - want).abs() < 1e-12);
        assert!(sol.split.is_some());
        let greedy = guess_functional(&inst, 0.5, 0.25, Method::Greedy).unwrap();
        assert!((greedy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_witness_reproduces_value() {
        let inst = fixtures::overlap_stress();
        let sol = oracle_map(&inst, 0.5, 0.0).unwrap();
        assert!((renyi_bits(&sol.pushforward, 0.5) - sol.value).abs() < 1e-15);
        // Pushforward rebuilt from the map.
        let mut q = vec![0.0; inst.reproduction_len()];
        for (x, c) in sol.map.iter().enumerate() {
            q[c.unwrap()] += inst.pmf().probs()[x];
        }
        for (a, b) in q.iter().zip(&sol.pushforward) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_cap() {
        let n = 16;
        let inst = GuessInstance::hamming(vec![1.0 / n as f64; n], 1.0).unwrap();
        assert!(oracle_size(&inst, 0.0) > ORACLE_CAP);
        assert!(oracle_map(&inst, 0.5, 0.0).unwrap_err().is_cap_exceeded());
        let r = bounds_report(&inst, 1.0, 0.0, None).unwrap();
        assert!(r.oracle_functional.is_none());
    }

    #[test]
    fn rejects_bad_alpha() {
        let inst = hamming(vec![0.5, 0.5]);
        assert!(guess_functional(&inst, 1.0, 0.0, Method::Greedy).is_err());
        assert!(guess_functional(&inst, 0.0, 0.0, Method::Oracle).is_err());
    }

    #[test]
    fn uniform_bound_report() {
        let inst = hamming(vec![0.25; 4]);
        let r = bounds_report(&inst, 1.0, 0.0, None).unwrap();
        assert!((r.moment_log - 2.5f64.log2()).abs() < 1e-12);
        assert!((r.greedy_functional - 2.0).abs() < 1e-12);
        assert!((r.converse_slack - 5f64.log2().log2()).abs() < 1e-15);
        assert!((r.converse_slack - 1.21532).abs() < 1e-5);
        assert!(r.achievability_vs_greedy);
        assert_eq!(r.achievability_vs_oracle, Some(true));
        assert_eq!(r.converse_vs_oracle, Some(true));
    }

    #[test]
    fn single_ball_bound_report() {
        let inst = hamming(vec![0.2, 0.3, 0.5]).with_budget(1.0).unwrap();
        let r = bounds_report(&inst, 2.0, 0.0, None).unwrap();
        assert_eq!(r.moment_log, 0.0);
        assert_eq!(r.greedy_functional, 0.0);
        assert!(r.oracle_functional.unwrap() - r.converse_slack <= 0.0);
    }

    #[test]
    fn stress_bound_report() {
        let inst = fixtures::overlap_stress();
        let r = bounds_report(&inst, 1.0, 0.0, None).unwrap();
        assert!((r.moment_log - 2.125f64.log2()).abs() < 1e-12);
        assert!((r.moment_log - 1.08746).abs() < 1e-5);
        assert_eq!(r.achievability_vs_oracle, Some(true));
        assert!((r.functional_gap.unwrap() - 0.38234).abs() < 1e-3);
    }

    #[test]
    fn user_strategy_with_errors_skips_converse() {
        let inst = hamming(vec![0.2, 0.3, 0.5]);
        let s = GuessingStrategy::new(vec![2], &inst).unwrap();
        let r = bounds_report(&inst, 1.0, 0.0, Some(&s)).unwrap();
        assert!((r.error_probability - 0.5).abs() < 1e-15);
        assert_eq!(r.converse_vs_oracle, None);
    }

    #[test]
    fn index_codes() {
        assert_eq!(index_code(1).unwrap(), (String::new(), 0));
        assert_eq!(index_code(2).unwrap(), ("0".into(), 1));
        assert_eq!(index_code(3).unwrap(), ("1".into(), 1));
        assert_eq!(index_code(5).unwrap(), ("01".into(), 2));
        assert_eq!(index_code(8).unwrap(), ("000".into(), 3));
        assert!(index_code(0).is_err());
    }

    #[test]
    fn code_tables() {
        let one = hamming(vec![1.0]);
        let (p, _) = greedy_cover(&one, 0.0).unwrap();
        let t = strategy_to_code(&p);
        assert_eq!(t.entries.len(), 1);
        assert_eq!((t.entries[0].cell, t.entries[0].word.as_str(), t.entries[0].length), (1, "", 0));

        let five = hamming(vec![0.3, 0.25, 0.2, 0.15, 0.1]);
        let (p, _) = greedy_cover(&five, 0.0).unwrap();
        let t = strategy_to_code(&p);
        let lens: Vec<usize> = t.entries.iter().map(|e| e.length).collect();
        assert_eq!(lens, vec![0, 1, 1, 2, 2]);
        assert_eq!(t.encode(&p, 4), Some("01"));
        assert_eq!(t.decode("01"), Some(4));

        let (p, _) = greedy_cover(&fixtures::overlap_stress(), 0.0).unwrap();
        let t = strategy_to_code(&p);
        let lens: Vec<usize> = t.entries.iter().map(|e| e.length).collect();
        assert_eq!(lens, vec![0, 1, 1, 2]);
        for rho in [0.5, 1.0, 3.0] {
            assert!(t.length_moment(&p.cell_masses, rho) <= weight_sum(&p.cell_masses, rho) + 1e-12);
        }
    }

    #[test]
    fn majorization_examples() {
        let mv = |v: &[f64]| MassVector::new(v.to_vec()).unwrap();
        let a = mv(&[0.5, 0.5]);
        assert!(majorizes(&a, &a).unwrap());
        assert!(majorizes(&a, &mv(&[1.0, 0.0])).unwrap());
        assert!(!majorizes(&mv(&[1.0]), &a).unwrap());
        let stress_any = mv(&[0.375, 0.375, 0.25, 0.0]);
        let stress_greedy = mv(&[0.4, 0.25, 0.175, 0.175]);
        assert!(!majorizes(&stress_any, &stress_greedy).unwrap());
        assert!(majorizes(&mv(&[0.5]), &a).is_err());
    }

    #[test]
    fn schur_examples() {
        let mv = |v: &[f64]| MassVector::new(v.to_vec()).unwrap();
        assert_eq!(schur_weight_sum(&mv(&[1.0]), 2.0).unwrap(), 1.0);
        assert_eq!(schur_weight_sum(&mv(&[0.5, 0.5]), 1.0).unwrap(), 1.5);
        assert_eq!(schur_weight_sum(&mv(&[1.0, 0.0]), 1.0).unwrap(), 1.0);
        assert!(schur_weight_sum(&mv(&[1.0]), -1.0).is_err());
    }

    #[test]
    fn mass_vector_sorts_and_validates() {
        let v = MassVector::new(vec![0.1, 0.6, 0.3]).unwrap();
        assert_eq!(v.values(), &[0.6, 0.3, 0.1]);
        assert!(MassVector::new(vec![0.7, 0.7]).is_err());
        assert!(MassVector::new(vec![-0.1]).is_err());
    }
}
