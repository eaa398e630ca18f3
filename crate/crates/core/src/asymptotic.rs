//! Single-letter targets and blocklength experiments.
//!
//! [`blahut_arimoto`] computes the rate–distortion function `R(D, Q)` by
//! alternating minimization at a fixed slope `s`, bisecting on `s` until the
//! channel's expected distortion meets `D`. [`guessing_exponent`] maximizes
//! `R(D, Q) − KL(Q‖P)/ρ` over a simplex grid followed by pairwise-transfer
//! refinement. [`blocklength_sweep`] tracks the per-letter greedy functional
//! and guessing moments of product instances against `(1 − ε) R(D, P)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::{kl_bits, renyi_bits};
use crate::model::{product_extend, tuple_digits, Alphabet, DistortionMeasure, GuessInstance, Pmf};
use crate::num::{check_eps, check_rho, TOL};
use crate::strategy::{greedy_cover, moment};
use crate::{Error, Result};

const LN2: f64 = std::f64::consts::LN_2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RdOptions {
    /// Target accuracy of the rate, in bits.
    pub tol: f64,
    /// Iteration limit for one fixed-slope run.
    pub max_iterations: usize,
}

impl Default for RdOptions {
    fn default() -> Self {
        RdOptions {
            tol: 1e-7,
            max_iterations: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RdResult {
    /// `R(D, Q)` in bits.
    pub rate: f64,
    /// Test channel `W(x̂ | x)`, one row per source symbol.
    pub channel: Vec<Vec<f64>>,
    /// Slope parameter `s` (nats per unit distortion); the rate curve has
    /// slope `−s / ln 2` bits per unit distortion at the returned point.
    #[serde(serialize_with = "crate::num::serialize_real")]
    pub multiplier: f64,
    /// Expected distortion of `channel`.
    pub distortion: f64,
    pub iterations: usize,
    /// Width of the rate bracket at termination, in bits.
    pub convergence_gap: f64,
}

struct FixedSlope {
    channel: Vec<Vec<f64>>,
    distortion: f64,
    rate_bits: f64,
    gap_bits: f64,
    iterations: usize,
}

/// Kernel `e^{-s d}`; `s = ∞` keeps only zero-distortion entries.
fn kernel(d: &DistortionMeasure, s: f64) -> Vec<Vec<f64>> {
    (0..d.rows())
        .map(|x| {
            d.row(x)
                .iter()
                .map(|&v| {
                    if s.is_infinite() {
                        if v <= TOL {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        (-s * v).exp()
                    }
                })
                .collect()
        })
        .collect()
}

/// `Z_x = Σ_j r_j A_xj` for every source symbol.
fn partition(a: &[Vec<f64>], r: &[f64], z: &mut [f64]) {
    for (zx, row) in z.iter_mut().zip(a) {
        *zx = row.iter().zip(r).map(|(a, r)| a * r).sum();
    }
}

/// The fixed-slope objective `−Σ_x q_x ln Z_x`, minimized over `r`.
fn objective(q: &[f64], a: &[Vec<f64>], r: &[f64]) -> f64 {
    q.iter()
        .zip(a)
        .filter(|(&qx, _)| qx > 0.0)
        .map(|(&qx, row)| -qx * row.iter().zip(r).map(|(a, r)| a * r).sum::<f64>().ln())
        .sum()
}

/// One alternating-minimization step `r_j ← r_j c_j`.
fn em_step(q: &[f64], a: &[Vec<f64>], r: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; q.len()];
    partition(a, r, &mut z);
    let mut next: Vec<f64> = (0..r.len())
        .map(|j| {
            r[j] * (0..q.len())
                .filter(|&x| q[x] > 0.0)
                .map(|x| q[x] * a[x][j] / z[x])
                .sum::<f64>()
        })
        .collect();
    let total: f64 = next.iter().sum();
    next.iter_mut().for_each(|v| *v /= total);
    next
}

/// Alternating minimization at fixed slope, warm-started from `r`.
///
/// Steps are extrapolated with SQUAREM and fall back to plain steps when the
/// extrapolation does not lower the objective. With `Z_x = Σ_j r_j A_xj` and
/// `c_j = Σ_x q_x A_xj / Z_x`, every `r` certifies the line
/// `R(D') ≥ (−s D' − Σ_x q_x ln Z_x − ln max_j c_j) / ln 2`, and the current
/// channel's rate at its own distortion lies within `ln max_j c_j` nats of it.
fn fixed_slope(
    q: &[f64],
    d: &DistortionMeasure,
    s: f64,
    r: &mut [f64],
    opts: &RdOptions,
) -> Result<FixedSlope> {
    let a = kernel(d, s);
    let (n, m) = (d.rows(), d.cols());
    let tol_nats = opts.tol * LN2 * 0.25;
    let mut z = vec![0.0; n];
    let mut c = vec![0.0; m];
    let mut iterations = 0;
    let mut gap;
    loop {
        partition(&a, r, &mut z);
        for (j, cj) in c.iter_mut().enumerate() {
            *cj = (0..n)
                .filter(|&x| q[x] > 0.0)
                .map(|x| q[x] * a[x][j] / z[x])
                .sum();
        }
        let cmax = c.iter().copied().fold(0.0, f64::max);
        gap = cmax.ln().max(0.0);
        if gap <= tol_nats {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NotConverged {
                iterations,
                gap: gap / LN2,
            });
        }

        // A letter at weight zero whose multiplier exceeds one must re-enter.
        let mut revived = false;
        for j in 0..m {
            if r[j] == 0.0 && c[j].ln() > tol_nats {
                r[j] = 1e-6;
                revived = true;
            }
        }
        if revived {
            let total: f64 = r.iter().sum();
            r.iter_mut().for_each(|v| *v /= total);
            iterations += 1;
            continue;
        }

        let r1 = em_step(q, &a, r);
        let r2 = em_step(q, &a, &r1);
        iterations += 2;
        let v1: Vec<f64> = r1.iter().zip(r.iter()).map(|(x, y)| x - y).collect();
        let v2: Vec<f64> = (0..m).map(|j| r2[j] - 2.0 * r1[j] + r[j]).collect();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (n1, n2) = (norm(&v1), norm(&v2));
        let mut next = r2.clone();
        if n2 > 0.0 {
            let mut alpha = (-n1 / n2).min(-1.0);
            while alpha < -1.0 {
                let cand: Vec<f64> = (0..m)
                    .map(|j| r[j] - 2.0 * alpha * v1[j] + alpha * alpha * v2[j])
                    .collect();
                if cand.iter().all(|&v| v >= 0.0) && cand.iter().sum::<f64>() > 0.0 {
                    let stepped = em_step(q, &a, &cand);
                    iterations += 1;
                    if stepped.iter().all(|v| v.is_finite())
                        && objective(q, &a, &stepped) <= objective(q, &a, &r2)
                    {
                        next = stepped;
                    }
                    break;
                }
                alpha = (alpha - 1.0) / 2.0;
            }
        }
        r.copy_from_slice(&next);
    }

    let channel: Vec<Vec<f64>> = (0..n)
        .map(|x| {
            if z[x] > 0.0 {
                (0..m).map(|j| r[j] * a[x][j] / z[x]).collect()
            } else {
                // Unreachable for symbols with positive mass.
                let mut row = vec![0.0; m];
                let best = (0..m)
                    .min_by(|&i, &j| d.get(x, i).total_cmp(&d.get(x, j)))
                    .unwrap_or(0);
                row[best] = 1.0;
                row
            }
        })
        .collect();
    let distortion = (0..n)
        .map(|x| q[x] * (0..m).map(|j| channel[x][j] * d.get(x, j)).sum::<f64>())
        .sum();
    let rate_bits = mutual_information_bits(q, &channel);
    Ok(FixedSlope {
        channel,
        distortion,
        rate_bits,
        gap_bits: gap / LN2,
        iterations,
    })
}

fn mutual_information_bits(q: &[f64], channel: &[Vec<f64>]) -> f64 {
    let m = channel.first().map_or(0, Vec::len);
    let out: Vec<f64> = (0..m)
        .map(|j| q.iter().zip(channel).map(|(&qx, row)| qx * row[j]).sum())
        .collect();
    let mut acc = 0.0;
    for (&qx, row) in q.iter().zip(channel) {
        if qx <= 0.0 {
            continue;
        }
        for (j, &w) in row.iter().enumerate() {
            if w > 0.0 && out[j] > 0.0 {
                acc += qx * w * (w / out[j]).log2();
            }
        }
    }
    acc.max(0.0)
}

/// `R(D, q)` in bits for the distortion matrix `d`.
pub fn blahut_arimoto(q: &Pmf, d: &DistortionMeasure, budget: f64, opts: RdOptions) -> Result<RdResult> {
    rate_distortion(q.probs(), d, budget, &opts)
}

pub(crate) fn rate_distortion(
    q: &[f64],
    d: &DistortionMeasure,
    budget: f64,
    opts: &RdOptions,
) -> Result<RdResult> {
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(Error::invalid("D", format!("budget {budget} must be >= 0")));
    }
    if q.len() != d.rows() {
        return Err(Error::AlphabetMismatch(format!(
            "pmf has {} symbols, distortion has {} rows",
            q.len(),
            d.rows()
        )));
    }
    let (n, m) = (d.rows(), d.cols());

    // Zero rate once a constant reproduction meets the budget.
    let column_cost = |j: usize| -> f64 { (0..n).map(|x| q[x] * d.get(x, j)).sum() };
    let (best_col, dmax) = (0..m)
        .map(|j| (j, column_cost(j)))
        .fold((0, f64::INFINITY), |acc, (j, v)| if v < acc.1 { (j, v) } else { acc });
    if dmax <= budget + TOL {
        let channel = (0..n)
            .map(|_| (0..m).map(|j| if j == best_col { 1.0 } else { 0.0 }).collect())
            .collect();
        return Ok(RdResult {
            rate: 0.0,
            channel,
            multiplier: 0.0,
            distortion: dmax,
            iterations: 0,
            convergence_gap: 0.0,
        });
    }

    let mut r = vec![1.0 / m as f64; m];
    if budget <= TOL {
        let fs = fixed_slope(q, d, f64::INFINITY, &mut r, opts)?;
        return Ok(RdResult {
            rate: fs.rate_bits,
            channel: fs.channel,
            multiplier: f64::INFINITY,
            distortion: fs.distortion,
            iterations: fs.iterations,
            convergence_gap: fs.gap_bits,
        });
    }

    let mut iterations = 0;
    let mut s_hi = 1.0;
    let mut hi = loop {
        let fs = fixed_slope(q, d, s_hi, &mut r, opts)?;
        iterations += fs.iterations;
        if fs.distortion <= budget || s_hi > 1e6 {
            break fs;
        }
        s_hi *= 2.0;
    };
    let mut s_lo = 0.0;
    for _ in 0..200 {
        if budget - hi.distortion <= 1e-10 || s_hi - s_lo <= 1e-12 * s_hi {
            break;
        }
        let mid = 0.5 * (s_lo + s_hi);
        let fs = fixed_slope(q, d, mid, &mut r, opts)?;
        iterations += fs.iterations;
        if fs.distortion <= budget {
            s_hi = mid;
            hi = fs;
        } else {
            s_lo = mid;
        }
    }
    // R is convex with slope −s/ln2 at the channel's distortion; move along
    // the tangent to the requested budget.
    let rate = (hi.rate_bits - s_hi / LN2 * (budget - hi.distortion)).max(0.0);
    Ok(RdResult {
        rate,
        channel: hi.channel,
        multiplier: s_hi,
        distortion: hi.distortion,
        iterations,
        convergence_gap: hi.gap_bits,
    })
}

/// Largest source alphabet the exponent grid accepts.
pub const EXPONENT_MAX_ALPHABET: usize = 4;

/// Largest number of grid points the exponent search evaluates.
pub const EXPONENT_GRID_CAP: u128 = 2_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentResult {
    /// `max_Q R(D, Q) − KL(Q‖P)/ρ` in bits.
    pub value: f64,
    pub argmax: Vec<f64>,
    pub grid_resolution: usize,
    pub grid_points: u64,
    pub refinement_steps: usize,
}

impl ExponentResult {
    pub fn argmax_pmf(&self, alphabet: Alphabet) -> Result<Pmf> {
        Pmf::new(alphabet, self.argmax.clone())
    }
}

/// Compositions of `total` into `parts` nonnegative integers, lexicographic.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(rest);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=rest {
            cur.push(k);
            rec(rest - k, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// Guessing exponent `sup_Q R(D, Q) − KL(Q‖P)/ρ`.
pub fn guessing_exponent(
    p: &Pmf,
    d: &DistortionMeasure,
    budget: f64,
    rho: f64,
    grid_resolution: usize,
) -> Result<ExponentResult> {
    check_rho(rho)?;
    let k = p.len();
    if k > EXPONENT_MAX_ALPHABET {
        return Err(Error::CapExceeded {
            what: "exponent grid source alphabet".into(),
            size: k as u128,
            cap: EXPONENT_MAX_ALPHABET as u128,
        });
    }
    if grid_resolution == 0 {
        return Err(Error::Parameter {
            name: "grid",
            value: 0.0,
            expected: "grid >= 1",
        });
    }
    let points = crate::num::binomial(grid_resolution + k - 1, k - 1);
    if points > EXPONENT_GRID_CAP {
        return Err(Error::CapExceeded {
            what: "exponent grid points".into(),
            size: points,
            cap: EXPONENT_GRID_CAP,
        });
    }
    if p.len() != d.rows() {
        return Err(Error::AlphabetMismatch("pmf and distortion disagree".into()));
    }
    let opts = RdOptions::default();
    let pp = p.probs();
    let objective = |qv: &[f64]| -> Result<f64> {
        let kl = kl_bits(qv, pp);
        if kl.is_infinite() {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(rate_distortion(qv, d, budget, &opts)?.rate - kl / rho)
    };

    // Q = P is always a candidate, and wins ties.
    let mut best_q = pp.to_vec();
    let mut best = objective(&best_q)?;

    let grid = compositions(grid_resolution, k);
    let values: Vec<f64> = grid
        .par_iter()
        .map(|c| {
            let qv: Vec<f64> = c.iter().map(|&v| v as f64 / grid_resolution as f64).collect();
            objective(&qv)
        })
        .collect::<Result<_>>()?;
    for (c, &v) in grid.iter().zip(&values) {
        if v > best {
            best = v;
            best_q = c.iter().map(|&v| v as f64 / grid_resolution as f64).collect();
        }
    }

    // Pairwise mass transfers with a shrinking step.
    let mut step = 1.0 / grid_resolution as f64;
    let mut refinement_steps = 0;
    while step > 1e-7 {
        let mut improved = false;
        for i in 0..k {
            for j in 0..k {
                if i == j || best_q[j] < step {
                    continue;
                }
                let mut cand = best_q.clone();
                cand[i] += step;
                cand[j] -= step;
                let v = objective(&cand)?;
                if v > best + 1e-13 {
                    best = v;
                    best_q = cand;
                    improved = true;
                    refinement_steps += 1;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }

    Ok(ExponentResult {
        value: best,
        argmax: best_q,
        grid_resolution,
        grid_points: grid.len() as u64,
        refinement_steps,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    /// `(1/n) H_α` of the folded greedy cell masses at `α = alpha_probe`.
    pub functional: f64,
    /// `(1/(nρ)) log2 E[G^ρ]`, one entry per requested `ρ`.
    pub moment_logs: Vec<f64>,
    pub target: f64,
    /// `functional − target`.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub rhos: Vec<f64>,
    pub eps: f64,
    pub alpha_probe: f64,
    /// `(1 − ε) R(D, P)` at the per-letter budget.
    pub target: f64,
    pub rows: Vec<SweepRow>,
}

pub fn blocklength_sweep(
    inst: &GuessInstance,
    rhos: &[f64],
    eps: f64,
    n_max: usize,
    alpha_probe: f64,
) -> Result<SweepTable> {
    check_eps(eps)?;
    for &rho in rhos {
        check_rho(rho)?;
    }
    if !(alpha_probe > 0.0 && alpha_probe <= 1.0) {
        return Err(Error::Parameter {
            name: "alpha_probe",
            value: alpha_probe,
            expected: "0 < alpha_probe <= 1",
        });
    }
    if n_max == 0 {
        return Err(Error::Parameter {
            name: "nmax",
            value: 0.0,
            expected: "nmax >= 1",
        });
    }
    let rd = rate_distortion(
        inst.pmf().probs(),
        inst.distortion(),
        inst.budget(),
        &RdOptions::default(),
    )?;
    let target = (1.0 - eps) * rd.rate;
    let rows = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let prod = product_extend(inst, n)?.into_instance();
            let (part, strat) = greedy_cover(&prod, eps)?;
            let functional = renyi_bits(&part.folded_masses(), alpha_probe) / n as f64;
            let moment_logs = rhos
                .iter()
                .map(|&rho| Ok(moment(&strat, &prod, rho)?.moment_log / n as f64))
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepRow {
                n,
                functional,
                moment_logs,
                target,
                gap: functional - target,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        rhos: rhos.to_vec(),
        eps,
        alpha_probe,
        target,
        rows,
    })
}

/// Index of a source tuple in a product alphabet, first coordinate most
/// significant.
pub fn tuple_index(digits: &[usize], radix: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * radix + d)
}

/// Inverse of [`tuple_index`].
pub fn tuple_of(index: usize, radix: usize, n: usize) -> Vec<usize> {
    tuple_digits(index, radix, n)
}
