//! Violation strength of the metric inequalities.
//!
//! `C_q(θ, κ)` is the amount by which the triangle-chained metric inequality
//! of a scenario is violated at one point; positive values signal a violation.
//! [`s_q`] maximises it over `θ` and [`kappa_threshold`] locates the largest
//! decoherence ratio that still shows a violation.

use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::{metric, EntropyOrder, MetricKind};
use crate::error::{Error, Result};
use crate::scenarios::{pair_joint, PairRole, Scenario, ScenarioSpec};

/// Knobs of the supremum and threshold searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    pub theta_min: f64,
    pub theta_max: f64,
    /// Number of points of the coarse `θ` grid.
    pub coarse_steps: usize,
    /// Bracket width at which golden-section refinement stops.
    pub refine_tolerance: f64,
    /// `S_q` must exceed this to count as a violation.
    pub positivity_epsilon: f64,
    pub kappa_max: f64,
    /// Number of intervals of the coarse `κ` bracketing grid on `[0, kappa_max]`.
    pub kappa_coarse_steps: usize,
    pub kappa_bisect_tolerance: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            theta_min: 1e-3,
            theta_max: std::f64::consts::PI,
            coarse_steps: 2000,
            refine_tolerance: 1e-6,
            positivity_epsilon: 1e-9,
            kappa_max: 5.0,
            kappa_coarse_steps: 100,
            kappa_bisect_tolerance: 1e-5,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if !(self.theta_min.is_finite() && self.theta_max.is_finite() && self.theta_min > 0.0) {
            return bad("theta bounds must be finite with theta_min > 0");
        }
        if self.theta_min >= self.theta_max {
            return bad("theta_min must be below theta_max");
        }
        if self.coarse_steps < 2 || self.kappa_coarse_steps < 1 {
            return bad("coarse grids need at least two points");
        }
        let positive = [self.refine_tolerance, self.positivity_epsilon, self.kappa_bisect_tolerance, self.kappa_max];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("tolerances and kappa_max must be positive");
        }
        Ok(())
    }

    fn theta_at(&self, i: usize) -> f64 {
        let span = self.theta_max - self.theta_min;
        self.theta_min + span * i as f64 / (self.coarse_steps - 1) as f64
    }
}

fn distance(spec: &ScenarioSpec, role: PairRole, kind: MetricKind, q: EntropyOrder) -> Result<f64> {
    Ok(metric(&pair_joint(spec, role)?, q, kind).value)
}

/// Violation quantity at one `(θ, κ)` point.
///
/// CHSH: `D(A,B) - D(A,B') - D(B',A') - D(A',B)`, the three small-angle pairs
/// being identically distributed. Leggett-Garg: `D(X,X'') - 2 D(X,X')`, the two
/// adjacent pairs being identically distributed.
pub fn c_q(spec: &ScenarioSpec, kind: MetricKind, q: EntropyOrder) -> Result<f64> {
    if spec.scenario().is_chsh() {
        let wide = distance(spec, PairRole::ChshAB, kind, q)?;
        let narrow = distance(spec, PairRole::ChshSmallAngle, kind, q)?;
        Ok(wide - 3.0 * narrow)
    } else {
        let end = distance(spec, PairRole::LgEndToEnd, kind, q)?;
        let adjacent = distance(spec, PairRole::LgAdjacent, kind, q)?;
        Ok(end - 2.0 * adjacent)
    }
}

/// Argmax and value of `C_q` over `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Supremum {
    pub theta_star: f64,
    pub s_value: f64,
}

/// Maximises `f` on `[lo, hi]` by golden-section search, stopping once the
/// bracket is narrower than `tol`. Returns the best point evaluated.
fn golden_section_max<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// `S_q(κ) = sup_θ C_q(θ, κ)`: coarse grid scan, then golden-section refinement
/// between the neighbours of the best grid point.
pub fn s_q(scenario: Scenario, kind: MetricKind, q: EntropyOrder, kappa: f64, cfg: &SearchConfig) -> Result<Supremum> {
    cfg.validate()?;
    let eval = |theta: f64| c_q(&ScenarioSpec::new(scenario, theta, kappa)?, kind, q);

    let mut best = (0, f64::NEG_INFINITY);
    for i in 0..cfg.coarse_steps {
        let v = eval(cfg.theta_at(i))?;
        if v > best.1 {
            best = (i, v);
        }
    }
    let (i, grid_value) = best;
    let lo = cfg.theta_at(i.saturating_sub(1));
    let hi = cfg.theta_at((i + 1).min(cfg.coarse_steps - 1));
    let (theta, refined) = golden_section_max(eval, lo, hi, cfg.refine_tolerance)?;
    Ok(if refined > grid_value {
        Supremum { theta_star: theta, s_value: refined }
    } else {
        Supremum { theta_star: cfg.theta_at(i), s_value: grid_value }
    })
}

/// Outcome of the `κ_s(q)` search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", content = "kappa", rename_all = "kebab-case")]
pub enum KappaThreshold {
    /// `S_q(0)` is not positive, so no range of violation exists.
    Absent,
    /// Largest `κ` with `S_q(κ) > ε`, resolved to the bisection tolerance.
    Found(f64),
    /// Still violated at `kappa_max`; the true threshold lies beyond the search range.
    AboveRange(f64),
}

impl KappaThreshold {
    pub fn value(self) -> Option<f64> {
        match self {
            KappaThreshold::Found(k) => Some(k),
            _ => None,
        }
    }
}

/// `κ_s(q) = sup{κ ≥ 0 : S_q(κ) > ε}`, bracketed on a coarse grid and refined by bisection.
///
/// The last positive coarse point is used as the lower bracket, so a
/// positivity region that reopens after a gap is still found as long as the
/// grid resolves it.
pub fn kappa_threshold(
    scenario: Scenario,
    kind: MetricKind,
    q: EntropyOrder,
    cfg: &SearchConfig,
) -> Result<KappaThreshold> {
    cfg.validate()?;
    let positive =
        |kappa: f64| -> Result<bool> { Ok(s_q(scenario, kind, q, kappa, cfg)?.s_value > cfg.positivity_epsilon) };
    if !positive(0.0)? {
        return Ok(KappaThreshold::Absent);
    }
    let n = cfg.kappa_coarse_steps;
    let kappa_at = |i: usize| cfg.kappa_max * i as f64 / n as f64;
    let flags = (1..=n).into_par_iter().map(|i| positive(kappa_at(i))).collect::<Result<Vec<_>>>()?;
    let last = flags.iter().rposition(|&p| p).map_or(0, |k| k + 1);
    if last == n {
        return Ok(KappaThreshold::AboveRange(cfg.kappa_max));
    }
    let (mut lo, mut hi) = (kappa_at(last), kappa_at(last + 1));
    while hi - lo > cfg.kappa_bisect_tolerance {
        let mid = 0.5 * (lo + hi);
        if positive(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(KappaThreshold::Found(lo))
}

/// Evenly spaced `κ` values `min, min + step, ..., max` (inclusive when `max` is on the lattice).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl KappaGrid {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        let ok = min.is_finite() && max.is_finite() && step.is_finite() && min >= 0.0 && max >= min && step > 0.0;
        if !ok {
            return Err(Error::InvalidParameter(format!("bad kappa grid {min}:{max}:{step}")));
        }
        Ok(KappaGrid { min, max, step })
    }

    pub fn single(kappa: f64) -> Result<Self> {
        KappaGrid::new(kappa, kappa, 1.0)
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.min + self.step * i as f64).collect()
    }
}

/// One `(q, κ)` cell of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRecord {
    pub scenario: Scenario,
    pub metric: MetricKind,
    pub q: f64,
    pub kappa: f64,
    pub theta_star: f64,
    pub s_value: f64,
    pub positive: bool,
}

/// `S_q(κ)` for every `q` in `q_list` and every `κ` in `kappas`, ordered by `(q, κ)`.
/// Cells are evaluated in parallel.
pub fn scan(
    scenario: Scenario,
    kind: MetricKind,
    q_list: &[EntropyOrder],
    kappas: &[f64],
    cfg: &SearchConfig,
) -> Result<Vec<ScanRecord>> {
    if q_list.is_empty() || kappas.is_empty() {
        return Err(Error::InvalidParameter("scan needs at least one q and one kappa".into()));
    }
    cfg.validate()?;
    let cells: Vec<(EntropyOrder, f64)> = q_list.iter().flat_map(|&q| kappas.iter().map(move |&k| (q, k))).collect();
    cells
        .par_iter()
        .map(|&(q, kappa)| {
            let sup = s_q(scenario, kind, q, kappa, cfg)?;
            Ok(ScanRecord {
                scenario,
                metric: kind,
                q: q.value(),
                kappa,
                theta_star: sup.theta_star,
                s_value: sup.s_value,
                positive: sup.s_value > cfg.positivity_epsilon,
            })
        })
        .collect()
}
