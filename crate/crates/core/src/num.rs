//! Shared tolerances and small numeric helpers.

use serde::Serializer;

/// Absolute tolerance for probability sums and distortion comparisons.
pub const TOL: f64 = 1e-12;

/// Slack used when checking inequalities between derived quantities.
pub const BOUND_TOL: f64 = 1e-9;

pub(crate) fn check_rho(rho: f64) -> crate::Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(crate::Error::Parameter {
            name: "rho",
            value: rho,
            expected: "rho > 0",
        })
    }
}

pub(crate) fn check_eps(eps: f64) -> crate::Result<()> {
    if (0.0..1.0).contains(&eps) {
        Ok(())
    } else {
        Err(crate::Error::Parameter {
            name: "eps",
            value: eps,
            expected: "0 <= eps < 1",
        })
    }
}

/// Serializes non-finite values as the strings `"inf"`, `"-inf"` and `"nan"`,
/// which plain JSON numbers cannot carry.
pub fn serialize_real<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(non_finite_label(*v))
    }
}

pub(crate) fn serialize_opt_real<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => serialize_real(x, s),
        None => s.serialize_none(),
    }
}

pub fn non_finite_label(v: f64) -> &'static str {
    if v.is_nan() {
        "nan"
    } else if v > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

/// Binary entropy h(p) in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Integer power `base^exp` with overflow reported as `None`.
pub(crate) fn checked_pow(base: usize, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base as u128)?;
    }
    Some(acc)
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 2), 28);
        assert_eq!(binomial(4, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(52, 5), 2_598_960);
    }

    #[test]
    fn binary_entropy_endpoints() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
    }
}
