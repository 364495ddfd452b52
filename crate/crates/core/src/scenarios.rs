//! Closed-form outcome statistics for the four noisy measurement scenarios.
//!
//! Each scenario is parametrised by an angle-like variable `theta` and a
//! decoherence ratio `kappa`. The mapping to physical decay products is fixed
//! per scenario:
//!
//! * CHSH: every pair decays with `γδt = κθ/3`; the pair (A, B) sits at angle
//!   `θ`, the three remaining pairs at `θ/3`. Outcomes are anticorrelated.
//! * Leggett-Garg: `θ = ωδτ` and `γδτ = κθ`; the end-to-end pair uses the
//!   doubled interval. Outcomes are correlated.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::entropy::{JointDistribution, Label};
use crate::error::{Error, Result};

pub(crate) static DICHOTOMIC: [Label; 2] = [Label::from_static("+1"), Label::from_static("-1")];
pub(crate) static TRICHOTOMIC: [Label; 3] =
    [Label::from_static("+1"), Label::from_static("0"), Label::from_static("-1")];

/// Outcome values in label order.
pub(crate) const DICHOTOMIC_VALUES: [f64; 2] = [1.0, -1.0];
pub(crate) const TRICHOTOMIC_VALUES: [f64; 3] = [1.0, 0.0, -1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    ChshDephasing,
    LgSpinHalfDephasing,
    LgSpinHalfDepolarizing,
    LgSpinOneDephasing,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::ChshDephasing,
        Scenario::LgSpinHalfDephasing,
        Scenario::LgSpinHalfDepolarizing,
        Scenario::LgSpinOneDephasing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ChshDephasing => "chsh-dephasing",
            Scenario::LgSpinHalfDephasing => "lg-spin-half-dephasing",
            Scenario::LgSpinHalfDepolarizing => "lg-spin-half-depolarizing",
            Scenario::LgSpinOneDephasing => "lg-spin-one-dephasing",
        }
    }

    pub fn is_chsh(self) -> bool {
        matches!(self, Scenario::ChshDephasing)
    }

    /// Pair roles that make up the violation quantity of this scenario.
    pub fn roles(self) -> [PairRole; 2] {
        if self.is_chsh() {
            [PairRole::ChshAB, PairRole::ChshSmallAngle]
        } else {
            [PairRole::LgAdjacent, PairRole::LgEndToEnd]
        }
    }

    pub fn outcome_labels(self) -> &'static [Label] {
        match self {
            Scenario::LgSpinOneDephasing => &TRICHOTOMIC,
            _ => &DICHOTOMIC,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown scenario `{s}`")))
    }
}

/// A scenario evaluated at one `(theta, kappa)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec {
    scenario: Scenario,
    theta: f64,
    kappa: f64,
}

impl ScenarioSpec {
    /// `theta` must be positive and finite, `kappa` nonnegative and finite.
    pub fn new(scenario: Scenario, theta: f64, kappa: f64) -> Result<Self> {
        check_point(theta, kappa)?;
        Ok(ScenarioSpec { scenario, theta, kappa })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

pub(crate) fn check_point(theta: f64, kappa: f64) -> Result<()> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::InvalidParameter(format!("theta must be positive, got {theta}")));
    }
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(Error::InvalidParameter(format!("kappa must be nonnegative, got {kappa}")));
    }
    Ok(())
}

/// Which pair of observables a distribution describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairRole {
    /// (A, B) at angle `θ`.
    ChshAB,
    /// Any of (A, B'), (B', A'), (A', B) at angle `θ/3`.
    ChshSmallAngle,
    /// Successive measurements one interval apart.
    LgAdjacent,
    /// First and last measurement, two intervals apart.
    LgEndToEnd,
}

impl PairRole {
    pub fn name(self) -> &'static str {
        match self {
            PairRole::ChshAB => "chsh-ab",
            PairRole::ChshSmallAngle => "chsh-small-angle",
            PairRole::LgAdjacent => "lg-adjacent",
            PairRole::LgEndToEnd => "lg-end-to-end",
        }
    }

    fn is_chsh(self) -> bool {
        matches!(self, PairRole::ChshAB | PairRole::ChshSmallAngle)
    }

    pub(crate) fn check(self, scenario: Scenario) -> Result<()> {
        if self.is_chsh() == scenario.is_chsh() {
            Ok(())
        } else {
            Err(Error::Usage(format!("pair role {} does not belong to scenario {scenario}", self.name())))
        }
    }

    /// Interval multiplier for Leggett-Garg roles (1 for adjacent, 2 for end-to-end).
    pub fn interval_multiplier(self) -> u32 {
        match self {
            PairRole::LgEndToEnd => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for PairRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Square matrix of conditional probabilities `p(m'|m)`; row `m`, column `m'`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalMatrix {
    labels: &'static [Label],
    entries: Vec<f64>,
}

impl ConditionalMatrix {
    /// Row-sum tolerance accepted by [`ConditionalMatrix::new`].
    pub const ROW_TOLERANCE: f64 = 1e-9;

    /// Validates that every row is a probability distribution.
    pub fn new(labels: &'static [Label], entries: Vec<f64>) -> Result<Self> {
        let d = labels.len();
        if entries.len() != d * d {
            return Err(Error::Shape(format!("{} entries for a {d}x{d} conditional matrix", entries.len())));
        }
        for (r, row) in entries.chunks_exact(d).enumerate() {
            if let Some(v) = row.iter().find(|v| !(**v >= -1e-12 && **v <= 1.0 + 1e-12)) {
                return Err(Error::InvalidParameter(format!("conditional probability {v} in row {r}")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > Self::ROW_TOLERANCE {
                return Err(Error::NotNormalized(sum));
            }
        }
        Ok(ConditionalMatrix { labels, entries })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &'static [Label] {
        self.labels
    }

    /// `p(m'|m)` by outcome index.
    pub fn get(&self, given: usize, outcome: usize) -> f64 {
        self.entries[given * self.dim() + outcome]
    }

    pub fn row(&self, given: usize) -> &[f64] {
        let d = self.dim();
        &self.entries[given * d..(given + 1) * d]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Largest entrywise deviation from another matrix of the same shape.
    pub fn max_abs_diff(&self, other: &ConditionalMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "conditional matrices of different size");
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Joint distribution `p(m) p(m'|m)` for a uniform first outcome.
    pub fn to_uniform_joint(&self) -> Result<JointDistribution> {
        let d = self.dim();
        let w = 1.0 / d as f64;
        let cells = self.entries.iter().map(|p| w * p).collect();
        JointDistribution::new(d, d, cells, self.labels.to_vec(), self.labels.to_vec())
    }
}

fn dichotomic(sign: f64, visibility: f64) -> Vec<f64> {
    // p(m'|m) = (1 + sign * m' m * visibility) / 2
    let same = 0.5 * (1.0 + sign * visibility);
    let flip = 0.5 * (1.0 - sign * visibility);
    vec![same, flip, flip, same]
}

fn spin_one(angle: f64, gamma_t: f64) -> Vec<f64> {
    let a = (-gamma_t).exp() * angle.cos();
    let b = (-4.0 * gamma_t).exp() * (2.0 * angle).cos();
    let same = 0.375 + 0.5 * a + 0.125 * b;
    let opposite = 0.375 - 0.5 * a + 0.125 * b;
    let to_zero = 0.25 * (1.0 - b);
    let stay_zero = 0.5 * (1.0 + b);
    vec![
        same, to_zero, opposite, //
        to_zero, stay_zero, to_zero, //
        opposite, to_zero, same,
    ]
}

/// Conditional outcome probabilities for one pair of observables.
pub fn pair_conditional(spec: &ScenarioSpec, role: PairRole) -> Result<ConditionalMatrix> {
    role.check(spec.scenario)?;
    let (theta, kappa) = (spec.theta, spec.kappa);
    let entries = match spec.scenario {
        Scenario::ChshDephasing => {
            let angle = match role {
                PairRole::ChshAB => theta,
                _ => theta / 3.0,
            };
            let decay = (-kappa * theta / 3.0).exp();
            dichotomic(-1.0, decay * angle.cos())
        }
        Scenario::LgSpinHalfDephasing | Scenario::LgSpinHalfDepolarizing => {
            let rate = if spec.scenario == Scenario::LgSpinHalfDephasing { 1.0 } else { 4.0 };
            let angle = theta * f64::from(role.interval_multiplier());
            dichotomic(1.0, (-rate * kappa * angle).exp() * angle.cos())
        }
        Scenario::LgSpinOneDephasing => {
            let angle = theta * f64::from(role.interval_multiplier());
            spin_one(angle, kappa * angle)
        }
    };
    ConditionalMatrix::new(spec.scenario.outcome_labels(), entries)
}

/// Joint outcome distribution for one pair, with a uniform first outcome.
pub fn pair_joint(spec: &ScenarioSpec, role: PairRole) -> Result<JointDistribution> {
    pair_conditional(spec, role)?.to_uniform_joint()
}
