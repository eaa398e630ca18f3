//! Rényi, Arimoto–Rényi, Shannon and relative entropies, in bits.
//!
//! Zero-probability terms are dropped from every sum (`0 log 0 = 0`). Order
//! `α = 1` is accepted everywhere and evaluates the Shannon quantity, the
//! continuous extension of the Rényi family.

use serde::Serialize;

use crate::model::{JointPmf, Pmf};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropyValue {
    pub bits: f64,
    pub order: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter {
            name: "alpha",
            value: alpha,
            expected: "alpha > 0",
        })
    }
}

/// Shannon entropy of a mass vector.
pub fn shannon_bits(masses: &[f64]) -> f64 {
    let h: f64 = masses
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    h.max(0.0)
}

/// `Σ p^α` over the positive entries.
pub(crate) fn power_sum(masses: &[f64], alpha: f64) -> f64 {
    masses
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p.powf(alpha))
        .sum()
}

/// Rényi entropy of order `alpha` of a mass vector, without validation.
pub fn renyi_bits(masses: &[f64], alpha: f64) -> f64 {
    if alpha == 1.0 {
        return shannon_bits(masses);
    }
    (power_sum(masses, alpha).log2() / (1.0 - alpha)).max(0.0)
}

pub fn renyi_entropy(p: &Pmf, alpha: f64) -> Result<EntropyValue> {
    check_alpha(alpha)?;
    Ok(EntropyValue {
        bits: renyi_bits(p.probs(), alpha),
        order: alpha,
    })
}

/// Arimoto–Rényi conditional entropy from per-`y` weights and conditional
/// mass vectors.
///
/// The weighted sum is divided by the total weight, which is one in exact
/// arithmetic; doing so makes a deterministic `X` given `Y` evaluate to
/// exactly zero.
pub fn arimoto_bits(slices: &[(f64, Vec<f64>)], alpha: f64) -> f64 {
    let total: f64 = slices.iter().map(|(w, _)| *w).sum();
    if alpha == 1.0 {
        let h: f64 = slices.iter().map(|(w, s)| w * shannon_bits(s)).sum();
        return (h / total).max(0.0);
    }
    let inner: f64 = slices
        .iter()
        .map(|(w, s)| w * power_sum(s, alpha).powf(1.0 / alpha))
        .sum();
    (alpha / (1.0 - alpha) * (inner / total).log2()).max(0.0)
}

/// `(P_Y(y), P_{X|Y=y})` for each `y` with positive marginal.
pub(crate) fn joint_slices(j: &JointPmf) -> Vec<(f64, Vec<f64>)> {
    (0..j.y_alphabet().len())
        .filter_map(|y| {
            let py = j.marginal_y_prob(y);
            (py > 0.0).then(|| (py, j.probs().iter().map(|row| row[y] / py).collect()))
        })
        .collect()
}

pub fn arimoto_conditional_entropy(j: &JointPmf, alpha: f64) -> Result<EntropyValue> {
    check_alpha(alpha)?;
    Ok(EntropyValue {
        bits: arimoto_bits(&joint_slices(j), alpha),
        order: alpha,
    })
}

/// `KL(p || q)` in bits; `+∞` when `p` is not absolutely continuous w.r.t. `q`.
pub fn kl_divergence(p: &Pmf, q: &Pmf) -> Result<f64> {
    if p.alphabet() != q.alphabet() {
        return Err(Error::AlphabetMismatch(
            "relative entropy needs both pmfs on the same alphabet".into(),
        ));
    }
    Ok(kl_bits(p.probs(), q.probs()))
}

pub(crate) fn kl_bits(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            acc += a * (a / b).log2();
        }
    }
    acc.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Alphabet;
    use proptest::prelude::*;

    fn pmf(p: &[f64]) -> Pmf {
        Pmf::new(Alphabet::numbered(p.len()).unwrap(), p.to_vec()).unwrap()
    }

    fn joint(rows: Vec<Vec<f64>>) -> JointPmf {
        let (nx, ny) = (rows.len(), rows[0].len());
        JointPmf::new(
            Alphabet::numbered(nx).unwrap(),
            Alphabet::numbered(ny).unwrap(),
            rows,
        )
        .unwrap()
    }

    #[test]
    fn uniform_is_two_bits() {
        let u = pmf(&[0.25; 4]);
        for alpha in [0.25, 0.5, 1.0, 2.0, 7.0] {
            assert!((renyi_entropy(&u, alpha).unwrap().bits - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn point_mass_is_zero() {
        let p = pmf(&[0.0, 1.0, 0.0]);
        for alpha in [0.3, 1.0, 3.0] {
            assert_eq!(renyi_entropy(&p, alpha).unwrap().bits, 0.0);
        }
    }

    #[test]
    fn bernoulli_quarter_half_order() {
        // 2 log2(sqrt(0.25) + sqrt(0.75)), evaluated independently below.
        let expected = 2.0 * (0.5f64 + 0.75f64.sqrt()).log2();
        assert!((expected - 0.89995).abs() < 1e-3);
        let h = renyi_entropy(&pmf(&[0.25, 0.75]), 0.5).unwrap().bits;
        assert!((h - expected).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_order() {
        assert!(renyi_entropy(&pmf(&[0.5, 0.5]), 0.0).is_err());
        assert!(arimoto_conditional_entropy(&joint(vec![vec![1.0]]), -1.0).is_err());
    }

    #[test]
    fn arimoto_examples() {
        let j = joint(vec![vec![0.4, 0.1], vec![0.1, 0.4]]);
        let h = arimoto_conditional_entropy(&j, 0.5).unwrap().bits;
        assert!((h - 1.8f64.log2()).abs() < 1e-12);
        assert!((h - 0.84800).abs() < 1e-5);

        let diag = joint(vec![
            vec![0.2, 0.0, 0.0],
            vec![0.0, 0.3, 0.0],
            vec![0.0, 0.0, 0.5],
        ]);
        for alpha in [0.5, 1.0, 2.0] {
            assert_eq!(arimoto_conditional_entropy(&diag, alpha).unwrap().bits, 0.0);
        }
    }

    #[test]
    fn arimoto_of_independent_joint_is_renyi() {
        let px = pmf(&[0.1, 0.2, 0.7]);
        let py = pmf(&[0.3, 0.3, 0.4]);
        let j = JointPmf::independent(&px, &py).unwrap();
        for alpha in [0.25, 0.5, 1.0, 1.5] {
            let a = arimoto_conditional_entropy(&j, alpha).unwrap().bits;
            let b = renyi_entropy(&px, alpha).unwrap().bits;
            assert!((a - b).abs() < 1e-12, "alpha {alpha}: {a} vs {b}");
        }
    }

    #[test]
    fn kl_examples() {
        let half = pmf(&[0.5, 0.5]);
        let quarter = pmf(&[0.75, 0.25]);
        assert_eq!(kl_divergence(&half, &half).unwrap(), 0.0);
        // 0.5 log2(0.5/0.75) + 0.5 log2(0.5/0.25)
        let want = 0.5 * (0.5f64 / 0.75).log2() + 0.5;
        assert!((want - 0.20752).abs() < 1e-5);
        assert!((kl_divergence(&half, &quarter).unwrap() - want).abs() < 1e-12);
        let point = pmf(&[1.0, 0.0]);
        assert_eq!(kl_divergence(&half, &point).unwrap(), f64::INFINITY);
        let other = Pmf::new(Alphabet::new(["a", "b"]).unwrap(), vec![0.5, 0.5]).unwrap();
        assert!(kl_divergence(&half, &other).is_err());
    }

    fn random_pmf() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, 1..8).prop_filter_map("nonzero mass", |w| {
            let s: f64 = w.iter().sum();
            (s > 1e-6).then(|| w.iter().map(|v| v / s).collect())
        })
    }

    proptest! {
        #[test]
        fn renyi_nonincreasing_in_order(p in random_pmf()) {
            let grid = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0];
            let vals: Vec<f64> = grid.iter().map(|&a| renyi_bits(&p, a)).collect();
            for w in vals.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9);
            }
        }

        #[test]
        fn renyi_within_range(p in random_pmf(), alpha in 0.05f64..4.0) {
            let h = renyi_bits(&p, alpha);
            prop_assert!(h >= 0.0);
            prop_assert!(h <= (p.len() as f64).log2() + 1e-9);
        }

        #[test]
        fn kl_nonnegative(p in random_pmf(), seed in 0u64..1000) {
            let q: Vec<f64> = p.iter().enumerate()
                .map(|(i, v)| v + ((seed + i as u64) % 7) as f64 / 10.0 + 0.01).collect();
            let s: f64 = q.iter().sum();
            let q: Vec<f64> = q.iter().map(|v| v / s).collect();
            prop_assert!(kl_bits(&p, &q) >= 0.0);
            prop_assert!(kl_bits(&p, &p).abs() < 1e-12);
        }
    }
}
