//! Tsallis q-entropies of finite discrete distributions.
//!
//! Every functional here is measured in nats. For an order `q != 1` the
//! Tsallis entropy is
//!
//! ```text
//! H_q(X) = (Σ p(x)^q - 1) / (1 - q) = Σ p(x) ln_q(1 / p(x))
//! ```
//!
//! and it reduces to the Shannon entropy when `q -> 1`. Two conditional
//! forms are provided:
//!
//! | form   | definition                 | chain rule |
//! |--------|----------------------------|------------|
//! | chain  | `Σ_y p(y)^q H_q(X\|y)`     | yes        |
//! | avg    | `Σ_y p(y)   H_q(X\|y)`     | no         |
//!
//! Summing both directions of a conditional form gives an information
//! distance: [`MetricKind::DeltaQ`] for the chain form and
//! [`MetricKind::DTildeQ`] for the average form. Both are metrics for `q >= 1`.
//!
//! ```
//! use qentropic::entropy::{metric, EntropyOrder, JointDistribution, MetricKind};
//!
//! let independent = JointDistribution::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
//! let q = EntropyOrder::new(2.0).unwrap();
//! assert!((metric(&independent, q, MetricKind::DeltaQ).value - 0.5).abs() < 1e-15);
//! assert!((metric(&independent, q, MetricKind::DTildeQ).value - 1.0).abs() < 1e-15);
//! ```

use std::borrow::Cow;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orders closer than this to 1 are evaluated with the Shannon formulas.
pub const SHANNON_SNAP: f64 = 1e-9;

/// Allowed deviation of a distribution's total mass from 1.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Negative entries above this (i.e. closer to zero) are clamped to zero.
pub const NEGATIVE_CLAMP: f64 = -1e-12;

/// Entropic parameter `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct EntropyOrder(f64);

impl EntropyOrder {
    pub const SHANNON: EntropyOrder = EntropyOrder(1.0);

    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 {
            Ok(EntropyOrder(q))
        } else {
            Err(Error::InvalidOrder(q))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// True when the Shannon branch is used for this order.
    pub fn is_shannon(self) -> bool {
        (self.0 - 1.0).abs() < SHANNON_SNAP
    }

    /// The triangle inequality for both distances is only guaranteed for `q >= 1`.
    pub fn is_metric_regime(self) -> bool {
        self.is_shannon() || self.0 > 1.0
    }
}

impl TryFrom<f64> for EntropyOrder {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        EntropyOrder::new(q)
    }
}

impl From<EntropyOrder> for f64 {
    fn from(q: EntropyOrder) -> f64 {
        q.0
    }
}

impl fmt::Display for EntropyOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Name of a single outcome.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Label(Cow<'static, str>);

impl Label {
    pub const fn from_static(s: &'static str) -> Self {
        Label(Cow::Borrowed(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&'static str> for Label {
    fn from(s: &'static str) -> Self {
        Label(Cow::Borrowed(s))
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label(Cow::Owned(s))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn index_labels(n: usize) -> Vec<Label> {
    (0..n).map(|i| Label::from(i.to_string())).collect()
}

/// Checks nonnegativity and normalisation in place. Tiny negative round-off is
/// clamped to zero, after which the entries are renormalised.
fn validate_mass(values: &mut [f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Shape("distribution has no outcomes".into()));
    }
    let mut clamped = false;
    for (index, v) in values.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(index));
        }
        if *v < NEGATIVE_CLAMP {
            return Err(Error::NegativeProbability { index, value: *v });
        }
        if *v < 0.0 {
            *v = 0.0;
            clamped = true;
        }
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::NotNormalized(sum));
    }
    if clamped {
        values.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(())
}

/// A validated probability distribution over a finite, labelled alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
    alphabet: Vec<Label>,
}

impl ProbabilityVector {
    pub fn new(mut probs: Vec<f64>, alphabet: Vec<Label>) -> Result<Self> {
        if probs.len() != alphabet.len() {
            return Err(Error::Shape(format!("{} probabilities for {} labels", probs.len(), alphabet.len())));
        }
        validate_mass(&mut probs)?;
        Ok(ProbabilityVector { probs, alphabet })
    }

    /// Distribution with outcomes labelled `0, 1, ...`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let alphabet = index_labels(probs.len());
        ProbabilityVector::new(probs, alphabet)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet(&self) -> &[Label] {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Joint distribution `p(x, y)` stored row-major, rows indexed by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    cells: Vec<f64>,
    x_alphabet: Vec<Label>,
    y_alphabet: Vec<Label>,
}

impl JointDistribution {
    pub fn new(
        rows: usize,
        cols: usize,
        mut cells: Vec<f64>,
        x_alphabet: Vec<Label>,
        y_alphabet: Vec<Label>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape("joint distribution needs at least one row and column".into()));
        }
        if cells.len() != rows * cols {
            return Err(Error::Shape(format!("{} cells for a {rows}x{cols} matrix", cells.len())));
        }
        if x_alphabet.len() != rows || y_alphabet.len() != cols {
            return Err(Error::Shape(format!(
                "alphabets of size {}x{} for a {rows}x{cols} matrix",
                x_alphabet.len(),
                y_alphabet.len()
            )));
        }
        validate_mass(&mut cells)?;
        Ok(JointDistribution { rows, cols, cells, x_alphabet, y_alphabet })
    }

    /// Builds a joint from row-major cells with index labels.
    pub fn from_cells(rows: usize, cols: usize, cells: Vec<f64>) -> Result<Self> {
        JointDistribution::new(rows, cols, cells, index_labels(rows), index_labels(cols))
    }

    /// Builds a joint from a matrix given as rows (all rows must have the same length).
    pub fn from_rows(matrix: &[Vec<f64>]) -> Result<Self> {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        if matrix.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged joint matrix".into()));
        }
        JointDistribution::from_cells(rows, cols, matrix.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.cells[x * self.cols + y]
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn x_alphabet(&self) -> &[Label] {
        &self.x_alphabet
    }

    pub fn y_alphabet(&self) -> &[Label] {
        &self.y_alphabet
    }

    fn row_sums(&self) -> Vec<f64> {
        self.cells.chunks_exact(self.cols).map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.cells.chunks_exact(self.cols) {
            for (s, p) in sums.iter_mut().zip(row) {
                *s += p;
            }
        }
        sums
    }

    pub fn x_marginal(&self) -> ProbabilityVector {
        ProbabilityVector { probs: self.row_sums(), alphabet: self.x_alphabet.clone() }
    }

    pub fn y_marginal(&self) -> ProbabilityVector {
        ProbabilityVector { probs: self.col_sums(), alphabet: self.y_alphabet.clone() }
    }

    /// Swaps the roles of `X` and `Y`.
    pub fn transpose(&self) -> JointDistribution {
        let mut cells = Vec::with_capacity(self.cells.len());
        for y in 0..self.cols {
            for x in 0..self.rows {
                cells.push(self.get(x, y));
            }
        }
        JointDistribution {
            rows: self.cols,
            cols: self.rows,
            cells,
            x_alphabet: self.y_alphabet.clone(),
            y_alphabet: self.x_alphabet.clone(),
        }
    }
}

/// Which variable is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `H(X|Y)`, conditioning on the column variable.
    XGivenY,
    /// `H(Y|X)`, conditioning on the row variable.
    YGivenX,
}

/// The two q-entropic information distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricKind {
    /// Sum of the two chain-form conditional entropies.
    #[serde(rename = "delta")]
    DeltaQ,
    /// Sum of the two average-form conditional entropies.
    #[serde(rename = "dtilde")]
    DTildeQ,
}

impl MetricKind {
    pub const ALL: [MetricKind; 2] = [MetricKind::DeltaQ, MetricKind::DTildeQ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::DeltaQ => "delta",
            MetricKind::DTildeQ => "dtilde",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta" => Ok(MetricKind::DeltaQ),
            "dtilde" => Ok(MetricKind::DTildeQ),
            other => Err(Error::Usage(format!("unknown metric `{other}` (expected delta or dtilde)"))),
        }
    }
}

/// Value of an information distance together with a flag telling whether the
/// order lies outside the range where the triangle inequality is guaranteed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    pub value: f64,
    pub non_metric_regime: bool,
}

#[inline]
fn ln_q_unchecked(xi: f64, q: EntropyOrder) -> f64 {
    if q.is_shannon() {
        xi.ln()
    } else {
        let one_minus_q = 1.0 - q.value();
        (one_minus_q * xi.ln()).exp_m1() / one_minus_q
    }
}

/// The q-logarithm `(ξ^(1-q) - 1) / (1 - q)`, or `ln ξ` at `q = 1`.
pub fn q_log(xi: f64, q: EntropyOrder) -> Result<f64> {
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::Domain(format!("q-logarithm needs a positive argument, got {xi}")));
    }
    Ok(ln_q_unchecked(xi, q))
}

/// `Σ p ln_q(1/p)` over the positive entries, scaled so that the entries need
/// not sum to one: `masses` are divided by `total` on the fly.
#[inline]
fn tsallis_of_scaled(masses: impl Iterator<Item = f64>, total: f64, q: EntropyOrder) -> f64 {
    masses
        .filter(|&m| m > 0.0)
        .map(|m| {
            let p = m / total;
            p * ln_q_unchecked(1.0 / p, q)
        })
        .sum()
}

/// Tsallis entropy of a distribution.
pub fn tsallis_entropy(p: &ProbabilityVector, q: EntropyOrder) -> f64 {
    tsallis_of_scaled(p.probs.iter().copied(), 1.0, q)
}

/// Tsallis entropy of the flattened joint distribution, `H_q(X, Y)`.
pub fn joint_entropy(j: &JointDistribution, q: EntropyOrder) -> f64 {
    tsallis_of_scaled(j.cells.iter().copied(), 1.0, q)
}

#[derive(Clone, Copy)]
enum Weighting {
    Chain,
    Average,
}

fn conditional(j: &JointDistribution, q: EntropyOrder, direction: Direction, weighting: Weighting) -> f64 {
    let (outer, inner) = match direction {
        Direction::XGivenY => (j.cols, j.rows),
        Direction::YGivenX => (j.rows, j.cols),
    };
    let cell = |given: usize, k: usize| match direction {
        Direction::XGivenY => j.get(k, given),
        Direction::YGivenX => j.get(given, k),
    };
    let mut total = 0.0;
    for given in 0..outer {
        let weight: f64 = (0..inner).map(|k| cell(given, k)).sum();
        // zero-weight conditioning outcomes have no conditional distribution
        if weight <= 0.0 {
            continue;
        }
        let h = tsallis_of_scaled((0..inner).map(|k| cell(given, k)), weight, q);
        let w = match weighting {
            Weighting::Chain if !q.is_shannon() => weight.powf(q.value()),
            _ => weight,
        };
        total += w * h;
    }
    total
}

/// Chain-form conditional entropy `Σ_y p(y)^q H_q(X|y)`.
pub fn conditional_entropy_chain(j: &JointDistribution, q: EntropyOrder, direction: Direction) -> f64 {
    conditional(j, q, direction, Weighting::Chain)
}

/// Average-form conditional entropy `Σ_y p(y) H_q(X|y)`.
pub fn conditional_entropy_avg(j: &JointDistribution, q: EntropyOrder, direction: Direction) -> f64 {
    conditional(j, q, direction, Weighting::Average)
}

/// Mutual q-information `H_q(X) - H_q(X|Y)` with the chain-form conditional.
pub fn mutual_information(j: &JointDistribution, q: EntropyOrder) -> f64 {
    tsallis_entropy(&j.x_marginal(), q) - conditional_entropy_chain(j, q, Direction::XGivenY)
}

/// Information distance of the requested kind between the row and column variables.
pub fn metric(j: &JointDistribution, q: EntropyOrder, kind: MetricKind) -> Distance {
    let weighting = match kind {
        MetricKind::DeltaQ => Weighting::Chain,
        MetricKind::DTildeQ => Weighting::Average,
    };
    let value = conditional(j, q, Direction::XGivenY, weighting) + conditional(j, q, Direction::YGivenX, weighting);
    Distance { value, non_metric_regime: !q.is_metric_regime() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn q(v: f64) -> EntropyOrder {
        EntropyOrder::new(v).unwrap()
    }

    fn diagonal() -> JointDistribution {
        JointDistribution::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap()
    }

    fn independent() -> JointDistribution {
        JointDistribution::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap()
    }

    #[test]
    fn q_log_values() {
        assert_abs_diff_eq!(q_log(1.0, q(2.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(q_log(2.0, q(2.0)).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(q_log(4.0, q(0.5)).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q_log(3.0, q(1.0)).unwrap(), 3f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn q_log_domain() {
        assert!(matches!(q_log(0.0, q(2.0)), Err(Error::Domain(_))));
        assert!(matches!(q_log(-1.0, q(2.0)), Err(Error::Domain(_))));
        assert!(matches!(q_log(f64::NAN, q(2.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn order_validation() {
        assert!(EntropyOrder::new(0.0).is_err());
        assert!(EntropyOrder::new(-2.0).is_err());
        assert!(EntropyOrder::new(f64::INFINITY).is_err());
        assert!(q(1.0 + 5e-10).is_shannon());
        assert!(!q(1.0 + 5e-9).is_shannon());
    }

    #[test]
    fn near_one_orders_match_shannon() {
        let p = ProbabilityVector::from_probs(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let h1 = tsallis_entropy(&p, EntropyOrder::SHANNON);
        for dq in [1e-6, -1e-6, 1e-10, -1e-10] {
            assert!((tsallis_entropy(&p, q(1.0 + dq)) - h1).abs() <= 1e-5);
        }
    }

    #[test]
    fn tsallis_values() {
        let point = ProbabilityVector::from_probs(vec![1.0, 0.0]).unwrap();
        for v in [0.3, 1.0, 2.0, 5.0] {
            assert_abs_diff_eq!(tsallis_entropy(&point, q(v)), 0.0);
        }
        let uniform = ProbabilityVector::from_probs(vec![0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(tsallis_entropy(&uniform, q(2.0)), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(tsallis_entropy(&uniform, q(2.0)), q_log(2.0, q(2.0)).unwrap(), epsilon = 1e-15);
        let skewed = ProbabilityVector::from_probs(vec![0.25, 0.75]).unwrap();
        assert_abs_diff_eq!(tsallis_entropy(&skewed, q(2.0)), 0.375, epsilon = 1e-15);
    }

    #[test]
    fn validation_rejects_bad_mass() {
        assert!(matches!(ProbabilityVector::from_probs(vec![0.5, 0.4]), Err(Error::NotNormalized(_))));
        assert!(matches!(
            ProbabilityVector::from_probs(vec![1.1, -0.1]),
            Err(Error::NegativeProbability { index: 1, .. })
        ));
        assert!(matches!(ProbabilityVector::from_probs(vec![f64::NAN, 1.0]), Err(Error::NonFinite(0))));
        assert!(matches!(ProbabilityVector::from_probs(vec![]), Err(Error::Shape(_))));
        assert!(matches!(
            ProbabilityVector::new(vec![1.0], vec![Label::from("a"), Label::from("b")]),
            Err(Error::Shape(_))
        ));
        assert!(JointDistribution::from_rows(&[vec![0.5, 0.5], vec![0.0]]).is_err());
        assert!(JointDistribution::from_cells(2, 2, vec![0.25; 3]).is_err());
    }

    #[test]
    fn tiny_negatives_are_clamped() {
        let p = ProbabilityVector::from_probs(vec![1.0 + 1e-13, -1e-13]).unwrap();
        assert_eq!(p.probs()[1], 0.0);
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn conditional_forms() {
        let d = diagonal();
        let i = independent();
        assert_abs_diff_eq!(conditional_entropy_chain(&d, q(2.0), Direction::XGivenY), 0.0);
        assert_abs_diff_eq!(conditional_entropy_avg(&d, q(2.0), Direction::XGivenY), 0.0);
        assert_abs_diff_eq!(conditional_entropy_chain(&i, q(2.0), Direction::XGivenY), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(conditional_entropy_avg(&i, q(2.0), Direction::XGivenY), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            conditional_entropy_chain(&i, q(1.0), Direction::YGivenX),
            std::f64::consts::LN_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn zero_weight_conditioning_is_skipped() {
        let j = JointDistribution::from_rows(&[vec![0.3, 0.0], vec![0.7, 0.0]]).unwrap();
        let h = conditional_entropy_avg(&j, q(2.0), Direction::XGivenY);
        assert_abs_diff_eq!(h, 1.0 - 0.09 - 0.49, epsilon = 1e-15);
        assert_abs_diff_eq!(conditional_entropy_chain(&j, q(2.0), Direction::YGivenX), 0.0);
    }

    #[test]
    fn joint_and_mutual() {
        assert_abs_diff_eq!(joint_entropy(&independent(), q(2.0)), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(joint_entropy(&diagonal(), q(2.0)), 0.5, epsilon = 1e-15);
        let point = JointDistribution::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert_abs_diff_eq!(joint_entropy(&point, q(2.0)), 0.0);

        assert_abs_diff_eq!(mutual_information(&diagonal(), q(2.0)), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(mutual_information(&independent(), q(2.0)), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(mutual_information(&independent(), q(1.0)), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn mutual_information_is_symmetric() {
        let j = JointDistribution::from_rows(&[vec![0.1, 0.2, 0.05], vec![0.3, 0.15, 0.2]]).unwrap();
        for v in [0.5, 1.0, 2.0, 3.0] {
            let from_x = mutual_information(&j, q(v));
            let from_y =
                tsallis_entropy(&j.y_marginal(), q(v)) - conditional_entropy_chain(&j, q(v), Direction::YGivenX);
            assert_abs_diff_eq!(from_x, from_y, epsilon = 1e-13);
            assert_abs_diff_eq!(from_x, mutual_information(&j.transpose(), q(v)), epsilon = 1e-13);
        }
    }

    #[test]
    fn metric_values() {
        for kind in MetricKind::ALL {
            assert_abs_diff_eq!(metric(&diagonal(), q(2.0), kind).value, 0.0);
        }
        assert_abs_diff_eq!(metric(&independent(), q(2.0), MetricKind::DeltaQ).value, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(metric(&independent(), q(2.0), MetricKind::DTildeQ).value, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn metric_flags_sub_unit_orders() {
        assert!(metric(&independent(), q(0.5), MetricKind::DeltaQ).non_metric_regime);
        assert!(!metric(&independent(), q(1.0), MetricKind::DTildeQ).non_metric_regime);
        assert!(!metric(&independent(), q(2.5), MetricKind::DTildeQ).non_metric_regime);
    }

    #[test]
    fn transpose_swaps_marginals() {
        let j = JointDistribution::from_rows(&[vec![0.1, 0.2, 0.05], vec![0.3, 0.15, 0.2]]).unwrap();
        let t = j.transpose();
        assert_eq!((t.rows(), t.cols()), (3, 2));
        assert_eq!(t.x_marginal().probs(), j.y_marginal().probs());
        assert_eq!(t.get(2, 1), j.get(1, 2));
    }

    #[test]
    fn metric_kind_parsing() {
        assert_eq!("delta".parse::<MetricKind>().unwrap(), MetricKind::DeltaQ);
        assert_eq!("dtilde".parse::<MetricKind>().unwrap(), MetricKind::DTildeQ);
        assert!("other".parse::<MetricKind>().unwrap_err().is_usage());
    }
}
