//! Alphabets, distributions, distortion measures and problem instances.
//!
//! Everything here is validated on construction and immutable afterwards.
//! Probabilities are stored as `f64`; when an instance document supplies every
//! probability as a string (`"p/q"`, an integer, or a decimal literal) the
//! exact rational values are kept alongside so that tie comparisons in the
//! greedy construction can be decided exactly.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::num::{checked_pow, TOL};
use crate::{Error, Result};

/// Default limit on `|X|^n` and `|X̂|^n` for product extension.
pub const PRODUCT_CAP: usize = 4096;

/// An ordered list of distinct, non-empty symbol labels.
///
/// The position of a label is its canonical index everywhere in the crate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::parse("alphabet", symbols.into_iter().map(Into::into).collect())
    }

    fn parse(path: &str, symbols: Vec<String>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::invalid(path, "alphabet is empty"));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::invalid(
                    format!("{path}[{i}]"),
                    format!("duplicate label {s:?}"),
                ));
            }
        }
        Ok(Alphabet { symbols })
    }

    /// Alphabet labelled `"0"`, `"1"`, ..., `"size-1"`.
    pub fn numbered(size: usize) -> Result<Self> {
        Self::new((0..size).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn label(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == label)
    }
}

/// A probability mass function over an [`Alphabet`].
#[derive(Clone, Debug, Serialize)]
pub struct Pmf {
    alphabet: Alphabet,
    probs: Vec<f64>,
    #[serde(skip)]
    exact: Option<Vec<BigRational>>,
}

impl PartialEq for Pmf {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet && self.probs == other.probs
    }
}

impl Pmf {
    pub fn new(alphabet: Alphabet, probs: Vec<f64>) -> Result<Self> {
        validate_probs("pmf", &probs, alphabet.len())?;
        Ok(Pmf {
            alphabet,
            probs,
            exact: None,
        })
    }

    /// Builds a pmf from exact rationals; the `f64` view is the nearest value
    /// to each rational.
    pub fn from_exact(alphabet: Alphabet, exact: Vec<BigRational>) -> Result<Self> {
        let probs = exact.iter().map(rational_to_f64).collect::<Vec<_>>();
        validate_probs("pmf", &probs, alphabet.len())?;
        check_exact_sum("pmf", exact.iter())?;
        Ok(Pmf {
            alphabet,
            probs,
            exact: Some(exact),
        })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let n = alphabet.len();
        let exact = vec![BigRational::new(BigInt::one(), BigInt::from(n)); n];
        Pmf {
            probs: exact.iter().map(rational_to_f64).collect(),
            alphabet,
            exact: Some(exact),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Exact probabilities, when the pmf was built from rationals.
    pub fn exact(&self) -> Option<&[BigRational]> {
        self.exact.as_deref()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Indices with positive probability.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| i)
    }
}

/// A joint pmf `P_{XY}`, stored row-major as `probs[x][y]`.
#[derive(Clone, Debug, Serialize)]
pub struct JointPmf {
    x_alphabet: Alphabet,
    y_alphabet: Alphabet,
    probs: Vec<Vec<f64>>,
    #[serde(skip)]
    exact: Option<Vec<Vec<BigRational>>>,
}

impl JointPmf {
    pub fn new(x_alphabet: Alphabet, y_alphabet: Alphabet, probs: Vec<Vec<f64>>) -> Result<Self> {
        check_matrix_shape("joint_pmf", &probs, x_alphabet.len(), y_alphabet.len())?;
        let flat: Vec<f64> = probs.iter().flatten().copied().collect();
        validate_flat("joint_pmf", &flat, y_alphabet.len())?;
        Ok(JointPmf {
            x_alphabet,
            y_alphabet,
            probs,
            exact: None,
        })
    }

    pub fn from_exact(
        x_alphabet: Alphabet,
        y_alphabet: Alphabet,
        exact: Vec<Vec<BigRational>>,
    ) -> Result<Self> {
        let probs: Vec<Vec<f64>> = exact
            .iter()
            .map(|row| row.iter().map(rational_to_f64).collect())
            .collect();
        let mut joint = JointPmf::new(x_alphabet, y_alphabet, probs)?;
        check_exact_sum("joint_pmf", exact.iter().flatten())?;
        joint.exact = Some(exact);
        Ok(joint)
    }

    /// Product joint `P_X × P_Y`.
    pub fn independent(px: &Pmf, py: &Pmf) -> Result<Self> {
        let probs = px
            .probs()
            .iter()
            .map(|&a| py.probs().iter().map(|&b| a * b).collect())
            .collect();
        JointPmf::new(px.alphabet().clone(), py.alphabet().clone(), probs)
    }

    pub fn x_alphabet(&self) -> &Alphabet {
        &self.x_alphabet
    }

    pub fn y_alphabet(&self) -> &Alphabet {
        &self.y_alphabet
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.probs[x][y]
    }

    /// `P_Y(y)`, summed over `x` in index order.
    pub fn marginal_y_prob(&self, y: usize) -> f64 {
        self.probs.iter().map(|row| row[y]).sum()
    }

    pub fn marginal_x(&self) -> Pmf {
        match &self.exact {
            Some(exact) => {
                let marg = exact
                    .iter()
                    .map(|row| row.iter().fold(BigRational::zero(), |a, b| a + b))
                    .collect();
                Pmf::from_exact(self.x_alphabet.clone(), marg)
                    .expect("marginal of a valid joint is valid")
            }
            None => {
                let marg = self.probs.iter().map(|row| row.iter().sum()).collect();
                Pmf::new(self.x_alphabet.clone(), marg).expect("marginal of a valid joint is valid")
            }
        }
    }

    pub fn marginal_y(&self) -> Pmf {
        let marg = (0..self.y_alphabet.len())
            .map(|y| self.marginal_y_prob(y))
            .collect();
        Pmf::new(self.y_alphabet.clone(), marg).expect("marginal of a valid joint is valid")
    }
}

/// Conditional pmf `P_{X|Y=y}`.
pub fn conditional_slice(joint: &JointPmf, y: usize) -> Result<Pmf> {
    if y >= joint.y_alphabet.len() {
        return Err(Error::invalid("y", format!("index {y} out of range")));
    }
    let py = joint.marginal_y_prob(y);
    if py <= 0.0 {
        return Err(Error::ZeroMarginal(joint.y_alphabet.label(y).to_owned()));
    }
    if let Some(exact) = &joint.exact {
        let col: Vec<&BigRational> = exact.iter().map(|row| &row[y]).collect();
        let total = col.iter().fold(BigRational::zero(), |a, &b| a + b);
        let slice = col.into_iter().map(|v| v / &total).collect();
        return Pmf::from_exact(joint.x_alphabet.clone(), slice);
    }
    let slice: Vec<f64> = joint.probs.iter().map(|row| row[y] / py).collect();
    // Division by a float marginal can leave the sum a few ulps away from 1.
    Pmf::new(joint.x_alphabet.clone(), slice)
}

/// Nonnegative distortion matrix `d(x, x̂)`, row-major with one row per source
/// symbol.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistortionMeasure {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DistortionMeasure {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let rows = matrix.len();
        if rows == 0 {
            return Err(Error::invalid("distortion", "matrix is empty"));
        }
        let cols = matrix[0].len();
        check_matrix_shape("distortion", &matrix, rows, cols)?;
        for (i, row) in matrix.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::invalid(
                        format!("distortion[{i}][{j}]"),
                        format!("entry {v} must be finite and nonnegative"),
                    ));
                }
            }
            if !row.contains(&0.0) {
                return Err(Error::invalid(
                    format!("distortion[{i}]"),
                    format!("row {i} violates zero-distortion assumption"),
                ));
            }
        }
        Ok(DistortionMeasure {
            rows,
            cols,
            data: matrix.into_iter().flatten().collect(),
        })
    }

    /// Hamming distortion on a common alphabet of the given size.
    pub fn hamming(size: usize) -> Self {
        let data = (0..size * size)
            .map(|k| if k / size == k % size { 0.0 } else { 1.0 })
            .collect();
        DistortionMeasure {
            rows: size,
            cols: size,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, x: usize, xhat: usize) -> f64 {
        self.data[x * self.cols + xhat]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.data[x * self.cols..(x + 1) * self.cols]
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }
}

/// Source pmf, reproduction alphabet, distortion matrix and budget `D`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GuessInstance {
    pmf: Pmf,
    reproduction: Alphabet,
    distortion: DistortionMeasure,
    budget: f64,
}

impl GuessInstance {
    pub fn new(
        pmf: Pmf,
        reproduction: Alphabet,
        distortion: DistortionMeasure,
        budget: f64,
    ) -> Result<Self> {
        check_dims(pmf.len(), &reproduction, &distortion)?;
        check_budget(budget)?;
        Ok(GuessInstance {
            pmf,
            reproduction,
            distortion,
            budget,
        })
    }

    /// Hamming instance over `0..p.len()` with `X̂ = X`.
    pub fn hamming(probs: Vec<f64>, budget: f64) -> Result<Self> {
        let alphabet = Alphabet::numbered(probs.len())?;
        let n = probs.len();
        GuessInstance::new(
            Pmf::new(alphabet.clone(), probs)?,
            alphabet,
            DistortionMeasure::hamming(n),
            budget,
        )
    }

    pub fn pmf(&self) -> &Pmf {
        &self.pmf
    }

    pub fn reproduction(&self) -> &Alphabet {
        &self.reproduction
    }

    pub fn distortion(&self) -> &DistortionMeasure {
        &self.distortion
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn source_len(&self) -> usize {
        self.pmf.len()
    }

    pub fn reproduction_len(&self) -> usize {
        self.reproduction.len()
    }

    /// Whether `d(x, x̂) <= D`, up to the absolute tolerance [`TOL`].
    #[inline]
    pub fn within(&self, x: usize, xhat: usize) -> bool {
        self.distortion.get(x, xhat) <= self.budget + TOL
    }

    /// Same instance with a different pmf over the same source alphabet.
    pub fn with_pmf(&self, pmf: Pmf) -> Result<Self> {
        if pmf.alphabet() != self.pmf.alphabet() {
            return Err(Error::AlphabetMismatch(
                "replacement pmf uses a different source alphabet".into(),
            ));
        }
        Ok(GuessInstance {
            pmf,
            ..self.clone()
        })
    }

    pub fn with_budget(&self, budget: f64) -> Result<Self> {
        check_budget(budget)?;
        Ok(GuessInstance {
            budget,
            ..self.clone()
        })
    }
}

/// Instance with side information: joint pmf over `X × Y`.
#[derive(Clone, Debug, Serialize)]
pub struct JointGuessInstance {
    joint: JointPmf,
    reproduction: Alphabet,
    distortion: DistortionMeasure,
    budget: f64,
}

impl JointGuessInstance {
    pub fn new(
        joint: JointPmf,
        reproduction: Alphabet,
        distortion: DistortionMeasure,
        budget: f64,
    ) -> Result<Self> {
        check_dims(joint.x_alphabet().len(), &reproduction, &distortion)?;
        check_budget(budget)?;
        Ok(JointGuessInstance {
            joint,
            reproduction,
            distortion,
            budget,
        })
    }

    pub fn joint(&self) -> &JointPmf {
        &self.joint
    }

    pub fn reproduction(&self) -> &Alphabet {
        &self.reproduction
    }

    pub fn distortion(&self) -> &DistortionMeasure {
        &self.distortion
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// The instance seen by a guesser who observed `Y = y`.
    pub fn slice(&self, y: usize) -> Result<GuessInstance> {
        Ok(GuessInstance {
            pmf: conditional_slice(&self.joint, y)?,
            reproduction: self.reproduction.clone(),
            distortion: self.distortion.clone(),
            budget: self.budget,
        })
    }

    /// The instance with `Y` ignored.
    pub fn marginal(&self) -> GuessInstance {
        GuessInstance {
            pmf: self.joint.marginal_x(),
            reproduction: self.reproduction.clone(),
            distortion: self.distortion.clone(),
            budget: self.budget,
        }
    }

    /// `y` indices with positive marginal, ascending.
    pub fn observed_y(&self) -> Vec<usize> {
        (0..self.joint.y_alphabet().len())
            .filter(|&y| self.joint.marginal_y_prob(y) > 0.0)
            .collect()
    }
}

/// Either kind of instance document.
#[derive(Clone, Debug)]
pub enum Instance {
    Single(GuessInstance),
    Joint(JointGuessInstance),
}

/// The `n`-fold memoryless extension of a [`GuessInstance`] with additive
/// distortion and budget `n·D`.
#[derive(Clone, Debug)]
pub struct ProductInstance {
    base: GuessInstance,
    n: usize,
    instance: GuessInstance,
}

impl ProductInstance {
    pub fn base(&self) -> &GuessInstance {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The extended instance over `X^n × X̂^n`.
    pub fn instance(&self) -> &GuessInstance {
        &self.instance
    }

    pub fn into_instance(self) -> GuessInstance {
        self.instance
    }
}

pub fn product_extend(inst: &GuessInstance, n: usize) -> Result<ProductInstance> {
    product_extend_with_cap(inst, n, PRODUCT_CAP)
}

pub fn product_extend_with_cap(
    inst: &GuessInstance,
    n: usize,
    cap: usize,
) -> Result<ProductInstance> {
    if n == 0 {
        return Err(Error::Parameter {
            name: "n",
            value: 0.0,
            expected: "n >= 1",
        });
    }
    let (kx, ky) = (inst.source_len(), inst.reproduction_len());
    for (what, k) in [("source product", kx), ("reproduction product", ky)] {
        let size = checked_pow(k, n).unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(Error::CapExceeded {
                what: format!("{what} {k}^{n}"),
                size,
                cap: cap as u128,
            });
        }
    }
    let nx = kx.pow(n as u32);
    let ny = ky.pow(n as u32);

    let source = product_alphabet(inst.pmf.alphabet(), n, nx);
    let reproduction = product_alphabet(&inst.reproduction, n, ny);

    let base_probs = inst.pmf.probs();
    let probs: Vec<f64> = (0..nx)
        .map(|t| {
            let digits = tuple_digits(t, kx, n);
            let mut acc = base_probs[digits[0]];
            for &d in &digits[1..] {
                acc *= base_probs[d];
            }
            acc
        })
        .collect();
    let exact = inst.pmf.exact().map(|base| {
        (0..nx)
            .map(|t| {
                tuple_digits(t, kx, n)
                    .into_iter()
                    .fold(BigRational::one(), |acc, d| acc * &base[d])
            })
            .collect::<Vec<_>>()
    });
    // Products of a valid pmf sum to one up to rounding; skip re-validation of
    // the sum beyond what `Pmf::new` checks.
    let pmf = match exact {
        Some(e) => Pmf {
            alphabet: source,
            probs,
            exact: Some(e),
        },
        None => Pmf::new(source, probs)?,
    };

    let ydigits: Vec<Vec<usize>> = (0..ny).map(|t| tuple_digits(t, ky, n)).collect();
    let mut data = Vec::with_capacity(nx * ny);
    for t in 0..nx {
        let xd = tuple_digits(t, kx, n);
        for yd in &ydigits {
            let mut acc = inst.distortion.get(xd[0], yd[0]);
            for k in 1..n {
                acc += inst.distortion.get(xd[k], yd[k]);
            }
            data.push(acc);
        }
    }
    let distortion = DistortionMeasure {
        rows: nx,
        cols: ny,
        data,
    };
    let budget = n as f64 * inst.budget;
    Ok(ProductInstance {
        base: inst.clone(),
        n,
        instance: GuessInstance {
            pmf,
            reproduction,
            distortion,
            budget,
        },
    })
}

/// Mixed-radix digits of `t`, most significant (first coordinate) first.
pub(crate) fn tuple_digits(mut t: usize, radix: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for slot in digits.iter_mut().rev() {
        *slot = t % radix;
        t /= radix;
    }
    digits
}

fn product_alphabet(base: &Alphabet, n: usize, size: usize) -> Alphabet {
    if n == 1 {
        return base.clone();
    }
    let sep = if base.symbols().iter().all(|s| s.chars().count() == 1) {
        ""
    } else {
        ","
    };
    let symbols = (0..size)
        .map(|t| {
            tuple_digits(t, base.len(), n)
                .into_iter()
                .map(|d| base.label(d))
                .collect::<Vec<_>>()
                .join(sep)
        })
        .collect();
    Alphabet { symbols }
}

fn check_dims(nx: usize, reproduction: &Alphabet, d: &DistortionMeasure) -> Result<()> {
    if d.rows != nx || d.cols != reproduction.len() {
        return Err(Error::invalid(
            "distortion",
            format!(
                "matrix is {}x{}, expected {}x{}",
                d.rows,
                d.cols,
                nx,
                reproduction.len()
            ),
        ));
    }
    Ok(())
}

fn check_budget(budget: f64) -> Result<()> {
    if budget.is_finite() && budget >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("D", format!("budget {budget} must be >= 0")))
    }
}

fn check_matrix_shape(path: &str, m: &[Vec<f64>], rows: usize, cols: usize) -> Result<()> {
    if m.len() != rows {
        return Err(Error::invalid(
            path,
            format!("expected {rows} rows, found {}", m.len()),
        ));
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::invalid(
                format!("{path}[{i}]"),
                format!("expected {cols} entries, found {}", row.len()),
            ));
        }
    }
    Ok(())
}

fn validate_probs(path: &str, probs: &[f64], expected_len: usize) -> Result<()> {
    if probs.len() != expected_len {
        return Err(Error::invalid(
            path,
            format!(
                "expected {expected_len} probabilities, found {}",
                probs.len()
            ),
        ));
    }
    validate_flat(path, probs, usize::MAX)
}

/// Entry and sum checks; `row_len` only shapes the reported field path.
fn validate_flat(path: &str, probs: &[f64], row_len: usize) -> Result<()> {
    let at = |k: usize| {
        if row_len == usize::MAX {
            format!("{path}[{k}]")
        } else {
            format!("{path}[{}][{}]", k / row_len, k % row_len)
        }
    };
    for (k, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::invalid(at(k), format!("probability {p} is negative or not finite")));
        }
        if p > 1.0 + TOL {
            return Err(Error::invalid(at(k), format!("probability {p} exceeds 1")));
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > TOL {
        return Err(Error::invalid(path, format!("{path} sums to {sum}")));
    }
    Ok(())
}

fn check_exact_sum<'a>(path: &str, it: impl Iterator<Item = &'a BigRational>) -> Result<()> {
    let mut sum = BigRational::zero();
    for v in it {
        if v < &BigRational::zero() {
            return Err(Error::invalid(path, format!("probability {v} is negative")));
        }
        sum += v;
    }
    if (rational_to_f64(&sum) - 1.0).abs() > TOL {
        return Err(Error::invalid(path, format!("{path} sums to {sum}")));
    }
    Ok(())
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"p/q"`, an integer, or a plain decimal literal into an exact
/// rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if let Some((num, den)) = t.split_once('/') {
        let num = BigInt::from_str(num.trim()).ok()?;
        let den = BigInt::from_str(den.trim()).ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int.starts_with('-');
        let int_part = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            BigInt::from_str(int).ok()?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part = BigInt::from_str(frac).ok()?;
        let mut numer = int_part.clone() * &scale;
        if negative {
            numer -= frac_part;
        } else {
            numer += frac_part;
        }
        return Some(BigRational::new(numer, scale));
    }
    BigInt::from_str(t).ok().map(BigRational::from_integer)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    x: Vec<String>,
    xhat: Vec<String>,
    #[serde(default)]
    pmf: Option<Vec<ProbEntry>>,
    #[serde(default)]
    y: Option<Vec<String>>,
    #[serde(default)]
    joint_pmf: Option<Vec<Vec<ProbEntry>>>,
    distortion: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    budget: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProbEntry {
    Number(f64),
    Text(String),
}

/// Parses a vector of entries; returns exact values only when every entry
/// was given as a string.
fn parse_entries(
    path: &str,
    entries: &[ProbEntry],
) -> Result<(Vec<f64>, Option<Vec<BigRational>>)> {
    let mut floats = Vec::with_capacity(entries.len());
    let mut exact = Some(Vec::with_capacity(entries.len()));
    for (i, e) in entries.iter().enumerate() {
        match e {
            ProbEntry::Number(v) => {
                floats.push(*v);
                exact = None;
            }
            ProbEntry::Text(s) => {
                let r = parse_rational(s).ok_or_else(|| {
                    Error::invalid(format!("{path}[{i}]"), format!("cannot parse {s:?} as a probability"))
                })?;
                floats.push(rational_to_f64(&r));
                if let Some(v) = exact.as_mut() {
                    v.push(r);
                }
            }
        }
    }
    Ok((floats, exact))
}

/// Parses and validates an instance document (JSON).
///
/// The single-source form carries `x`, `xhat`, `pmf`, `distortion`, `D`; the
/// joint form replaces `pmf` with `y` and `joint_pmf` (rows per `x`).
pub fn load_instance(text: &str) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_str(text)
        .map_err(|e| Error::invalid("document", format!("schema violation: {e}")))?;
    let x = Alphabet::parse("x", doc.x)?;
    let xhat = Alphabet::parse("xhat", doc.xhat)?;
    if doc.distortion.len() != x.len() {
        return Err(Error::invalid(
            "distortion",
            format!("expected {} rows, found {}", x.len(), doc.distortion.len()),
        ));
    }
    let distortion = DistortionMeasure::new(doc.distortion)?;
    match (doc.pmf, doc.y, doc.joint_pmf) {
        (Some(pmf), None, None) => {
            let (floats, exact) = parse_entries("pmf", &pmf)?;
            let pmf = match exact {
                Some(e) => {
                    validate_probs("pmf", &floats, x.len())?;
                    Pmf::from_exact(x, e)?
                }
                None => Pmf::new(x, floats)?,
            };
            Ok(Instance::Single(GuessInstance::new(
                pmf, xhat, distortion, doc.budget,
            )?))
        }
        (None, Some(y), Some(rows)) => {
            let y = Alphabet::parse("y", y)?;
            if rows.len() != x.len() {
                return Err(Error::invalid(
                    "joint_pmf",
                    format!("expected {} rows, found {}", x.len(), rows.len()),
                ));
            }
            let mut floats = Vec::with_capacity(rows.len());
            let mut exact = Some(Vec::with_capacity(rows.len()));
            for (i, row) in rows.iter().enumerate() {
                let (f, e) = parse_entries(&format!("joint_pmf[{i}]"), row)?;
                floats.push(f);
                exact = match (exact, e) {
                    (Some(mut acc), Some(e)) => {
                        acc.push(e);
                        Some(acc)
                    }
                    _ => None,
                };
            }
            let joint = match exact {
                Some(e) => {
                    check_matrix_shape("joint_pmf", &floats, x.len(), y.len())?;
                    JointPmf::from_exact(x, y, e)?
                }
                None => JointPmf::new(x, y, floats)?,
            };
            Ok(Instance::Joint(JointGuessInstance::new(
                joint, xhat, distortion, doc.budget,
            )?))
        }
        (Some(_), _, _) => Err(Error::invalid(
            "document",
            "schema violation: \"pmf\" cannot be combined with \"y\"/\"joint_pmf\"",
        )),
        _ => Err(Error::invalid(
            "document",
            "schema violation: expected \"pmf\", or both \"y\" and \"joint_pmf\"",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIFORM4: &str = r#"{
        "x": ["a","b","c","d"], "xhat": ["a","b","c","d"],
        "pmf": [0.25, 0.25, 0.25, 0.25],
        "distortion": [[0,1,1,1],[1,0,1,1],[1,1,0,1],[1,1,1,0]],
        "D": 0
    }"#;

    fn single(text: &str) -> GuessInstance {
        match load_instance(text).unwrap() {
            Instance::Single(i) => i,
            Instance::Joint(_) => panic!("expected single-source instance"),
        }
    }

    #[test]
    fn loads_uniform_hamming() {
        let inst = single(UNIFORM4);
        assert_eq!(inst.source_len(), 4);
        assert_eq!(inst.budget(), 0.0);
        assert!(inst.pmf().exact().is_none());
    }

    #[test]
    fn rejects_pmf_not_summing_to_one() {
        let doc = r#"{"x":["a","b"],"xhat":["a","b"],"pmf":[0.6,0.6],
                      "distortion":[[0,1],[1,0]],"D":0}"#;
        let err = load_instance(doc).unwrap_err().to_string();
        assert!(err.contains("pmf sums to 1.2"), "{err}");
    }

    #[test]
    fn rejects_row_without_zero() {
        let doc = r#"{"x":["a","b"],"xhat":["a","b"],"pmf":[0.5,0.5],
                      "distortion":[[0,1],[0.5,1.0]],"D":0}"#;
        let err = load_instance(doc).unwrap_err().to_string();
        assert!(
            err.contains("row 1 violates zero-distortion assumption"),
            "{err}"
        );
        assert!(err.starts_with("distortion[1]"), "{err}");
    }

    #[test]
    fn rejects_negative_entries_with_path() {
        let doc = r#"{"x":["a","b"],"xhat":["a","b"],"pmf":[0.6,-0.4],
                      "distortion":[[0,1],[1,0]],"D":0}"#;
        let err = load_instance(doc).unwrap_err().to_string();
        assert!(err.starts_with("pmf[1]"), "{err}");

        let doc = r#"{"x":["a","b"],"xhat":["a","b"],"pmf":[0.5,0.5],
                      "distortion":[[0,-1],[1,0]],"D":0}"#;
        let err = load_instance(doc).unwrap_err().to_string();
        assert!(err.starts_with("distortion[0][1]"), "{err}");
    }

    #[test]
    fn rejects_unknown_fields() {
        let doc = r#"{"x":["a"],"xhat":["a"],"pmf":[1],"distortion":[[0]],"D":0,"extra":1}"#;
        assert!(load_instance(doc).is_err());
    }

    #[test]
    fn rational_strings_are_exact() {
        let doc = r#"{"x":["a","b","c"],"xhat":["a","b","c"],"pmf":["1/3","1/3","1/3"],
                      "distortion":[[0,1,1],[1,0,1],[1,1,0]],"D":0}"#;
        let inst = single(doc);
        let exact = inst.pmf().exact().unwrap();
        assert_eq!(exact[0], BigRational::new(1.into(), 3.into()));
    }

    #[test]
    fn parses_decimal_strings() {
        assert_eq!(
            parse_rational("0.125").unwrap(),
            BigRational::new(1.into(), 8.into())
        );
        assert_eq!(parse_rational("7/40").unwrap(), BigRational::new(7.into(), 40.into()));
        assert_eq!(parse_rational("1").unwrap(), BigRational::one());
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("abc").is_none());
    }

    #[test]
    fn loads_joint_form() {
        let doc = r#"{"x":["a","b"],"xhat":["a","b"],"y":["u","v"],
                      "joint_pmf":[[0.4,0.1],[0.1,0.4]],
                      "distortion":[[0,1],[1,0]],"D":0}"#;
        let Instance::Joint(j) = load_instance(doc).unwrap() else {
            panic!("expected joint instance");
        };
        let s = conditional_slice(j.joint(), 0).unwrap();
        assert!((s.probs()[0] - 0.8).abs() < 1e-12);
        assert!((s.probs()[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn slice_of_null_column_fails() {
        let x = Alphabet::new(["a", "b"]).unwrap();
        let y = Alphabet::new(["u", "v"]).unwrap();
        let j = JointPmf::new(x, y, vec![vec![0.5, 0.0], vec![0.5, 0.0]]).unwrap();
        assert!(matches!(conditional_slice(&j, 1), Err(Error::ZeroMarginal(_))));
    }

    #[test]
    fn independent_slices_equal_marginal() {
        let px = Pmf::new(Alphabet::numbered(3).unwrap(), vec![0.2, 0.3, 0.5]).unwrap();
        let py = Pmf::new(Alphabet::numbered(2).unwrap(), vec![0.25, 0.75]).unwrap();
        let j = JointPmf::independent(&px, &py).unwrap();
        for y in 0..2 {
            let s = conditional_slice(&j, y).unwrap();
            for (a, b) in s.probs().iter().zip(px.probs()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn product_of_bernoulli() {
        let inst = GuessInstance::hamming(vec![0.7, 0.3], 0.1).unwrap();
        let p2 = product_extend(&inst, 2).unwrap();
        let probs = p2.instance().pmf().probs();
        let want = [0.49, 0.21, 0.21, 0.09];
        for (a, b) in probs.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(p2.instance().pmf().alphabet().symbols(), ["00", "01", "10", "11"]);
        // d2((0,1),(1,1)) = d(0,1) + d(1,1) = 1
        assert_eq!(p2.instance().distortion().get(1, 3), 1.0);
        assert!((p2.instance().budget() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn product_identity_at_one() {
        let inst = GuessInstance::hamming(vec![0.2, 0.3, 0.5], 0.0).unwrap();
        let p1 = product_extend(&inst, 1).unwrap();
        assert_eq!(p1.instance(), &inst);
    }

    #[test]
    fn product_cap() {
        let inst = GuessInstance::hamming(vec![0.5, 0.5], 0.0).unwrap();
        assert!(product_extend(&inst, 12).is_ok());
        let err = product_extend(&inst, 13).unwrap_err();
        assert!(err.is_cap_exceeded());
    }
}
