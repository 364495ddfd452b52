//! Density-matrix re-derivation of the closed-form conditional probabilities.
//!
//! Nothing in here calls into [`crate::scenarios`] formulas: states are
//! prepared explicitly, pushed through Kraus maps (qubits) or a numerically
//! integrated master equation (qutrit), and measured with projectors.
//! [`validate_scenario`] then compares the two routes on a parameter grid.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;

use crate::entropy::Label;
use crate::error::{Error, Result};
use crate::scenarios::{
    check_point, pair_conditional, ConditionalMatrix, PairRole, Scenario, ScenarioSpec, DICHOTOMIC, DICHOTOMIC_VALUES,
    TRICHOTOMIC, TRICHOTOMIC_VALUES,
};

type CMatrix = DMatrix<Complex64>;

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const TRACE_TOLERANCE: f64 = 1e-12;
const EIGENVALUE_FLOOR: f64 = -1e-10;

/// Phase `ωτ` of the first Leggett-Garg measurement. Only time differences
/// enter the statistics.
const FIRST_MEASUREMENT_PHASE: f64 = 0.3;

/// Largest `rate * dt` used by the Runge-Kutta integrator.
pub const MAX_RATE_STEP: f64 = 0.02;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Hermitian, unit-trace, positive semidefinite complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Accepts one qubit (2), one qutrit (3) or two qubits (4).
    pub fn new(m: CMatrix) -> Result<Self> {
        let d = m.nrows();
        if m.ncols() != d || !matches!(d, 2..=4) {
            return Err(Error::InvalidDensityMatrix(format!("unsupported shape {}x{}", m.nrows(), m.ncols())));
        }
        let asym = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > HERMITIAN_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (deviation {asym:e})")));
        }
        let trace = m.trace();
        if (trace.re - 1.0).abs() > TRACE_TOLERANCE || trace.im.abs() > TRACE_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("trace {trace}")));
        }
        let min_eig = m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < EIGENVALUE_FLOOR {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(DensityMatrix(m))
    }

    /// Completely mixed state `I/d`.
    pub fn maximally_mixed(d: usize) -> Result<Self> {
        DensityMatrix::new(CMatrix::identity(d, d) / c(d as f64))
    }

    /// Qubit state `(I + r·σ)/2`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let [x, y, z] = r;
        if x * x + y * y + z * z > 1.0 + 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!("Bloch vector {r:?} outside the unit ball")));
        }
        let half = |z: Complex64| z * 0.5;
        DensityMatrix::new(CMatrix::from_row_slice(
            2,
            2,
            &[half(c(1.0 + z)), half(Complex64::new(x, -y)), half(Complex64::new(x, y)), half(c(1.0 - z))],
        ))
    }

    /// Pure state `|ψ⟩⟨ψ|` from an unnormalised vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidDensityMatrix("zero state vector".into()));
        }
        let v = v / c(norm);
        DensityMatrix::new(&v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// Bloch vector of a qubit state.
    pub fn bloch(&self) -> Option<[f64; 3]> {
        (self.dim() == 2).then(|| {
            let m = &self.0;
            [2.0 * m[(1, 0)].re, 2.0 * m[(1, 0)].im, (m[(0, 0)] - m[(1, 1)]).re]
        })
    }

    /// `Tr(P ρ)` for a Hermitian effect `P`.
    pub fn expectation(&self, effect: &CMatrix) -> f64 {
        (effect * &self.0).trace().re
    }
}

fn pauli() -> [CMatrix; 3] {
    let i = Complex64::i();
    [
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        CMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]),
        CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
    ]
}

fn apply_kraus(rho: &CMatrix, kraus: &[CMatrix]) -> CMatrix {
    kraus.iter().fold(CMatrix::zeros(rho.nrows(), rho.ncols()), |acc, k| acc + k * rho * k.adjoint())
}

/// A single-qubit noise channel with its strength parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QubitChannel {
    /// Phase damping with `λ ∈ [0, 1]`.
    PhaseDamping { lambda: f64 },
    /// Depolarizing with `μ ∈ [0, 3/4]`.
    Depolarizing { mu: f64 },
}

impl QubitChannel {
    pub fn phase_damping(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!("phase damping lambda {lambda} outside [0, 1]")));
        }
        Ok(QubitChannel::PhaseDamping { lambda })
    }

    pub fn depolarizing(mu: f64) -> Result<Self> {
        if !(0.0..=0.75).contains(&mu) {
            return Err(Error::InvalidParameter(format!("depolarizing mu {mu} outside [0, 3/4]")));
        }
        Ok(QubitChannel::Depolarizing { mu })
    }

    /// Phase damping accumulated over a dimensionless time `γt`: `λ = 1 - e^{-2γt}`.
    pub fn phase_damping_for(gamma_t: f64) -> Result<Self> {
        QubitChannel::phase_damping(-(-2.0 * gamma_t).exp_m1())
    }

    /// Depolarizing noise accumulated over `γt`: `μ = (3/4)(1 - e^{-4γt})`.
    pub fn depolarizing_for(gamma_t: f64) -> Result<Self> {
        QubitChannel::depolarizing(-0.75 * (-4.0 * gamma_t).exp_m1())
    }

    pub fn kraus(&self) -> Vec<CMatrix> {
        match *self {
            QubitChannel::PhaseDamping { lambda } => vec![
                CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - lambda).sqrt())]),
                CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(lambda.sqrt())]),
            ],
            QubitChannel::Depolarizing { mu } => {
                let mut ops = vec![CMatrix::identity(2, 2) * c((1.0 - mu).sqrt())];
                ops.extend(pauli().into_iter().map(|s| s * c((mu / 3.0).sqrt())));
                ops
            }
        }
    }

    /// Kraus set of the same channel acting independently on both qubits of a pair.
    fn kraus_on_both(&self) -> Vec<CMatrix> {
        let single = self.kraus();
        single.iter().flat_map(|a| single.iter().map(move |b| a.kronecker(b))).collect()
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != 2 {
            return Err(Error::InvalidDensityMatrix(format!("qubit channel applied to a {}-level state", rho.dim())));
        }
        DensityMatrix::new(apply_kraus(&rho.0, &self.kraus()))
    }
}

/// Phase damping: coherences scale by `√(1-λ)`, populations are unchanged.
pub fn apply_phase_damping(rho: &DensityMatrix, lambda: f64) -> Result<DensityMatrix> {
    QubitChannel::phase_damping(lambda)?.apply(rho)
}

/// Depolarizing: the Bloch vector scales by `1 - 4μ/3`.
pub fn apply_depolarizing(rho: &DensityMatrix, mu: f64) -> Result<DensityMatrix> {
    QubitChannel::depolarizing(mu)?.apply(rho)
}

/// Split of the CHSH decay budget between the flight before the first
/// measurement (both qubits decohere) and the delay before the second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshTimeline {
    pub gamma_dt1: f64,
    pub gamma_dt2: f64,
}

impl ChshTimeline {
    /// Even split `γδt₁ = γδt₂ = κθ/9`.
    pub fn even(theta: f64, kappa: f64) -> Self {
        let part = kappa * theta / 9.0;
        ChshTimeline { gamma_dt1: part, gamma_dt2: part }
    }

    /// Puts a fraction `f ∈ [0, 1]` of the budget `κθ/3` into the first interval.
    pub fn split(theta: f64, kappa: f64, f: f64) -> Self {
        let total = kappa * theta / 3.0;
        ChshTimeline { gamma_dt1: 0.5 * f * total, gamma_dt2: (1.0 - f) * total }
    }

    fn check(&self, theta: f64, kappa: f64) -> Result<()> {
        let expected = kappa * theta / 3.0;
        let actual = 2.0 * self.gamma_dt1 + self.gamma_dt2;
        let ok =
            self.gamma_dt1 >= 0.0 && self.gamma_dt2 >= 0.0 && (actual - expected).abs() <= 1e-12 * expected.max(1.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InconsistentTimeline { actual, expected })
        }
    }
}

/// Projector onto the `m` eigenvector of `n·σ` for an in-plane direction at `angle`.
fn in_plane_projector(angle: f64, m: f64) -> CMatrix {
    let [sx, sy, _] = pauli();
    (CMatrix::identity(2, 2) + (sx * c(angle.cos()) + sy * c(angle.sin())) * c(m)) * c(0.5)
}

fn singlet() -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // |01> - |10> in the basis |00>, |01>, |10>, |11>
    DensityMatrix::pure(&[c(0.0), c(s), c(-s), c(0.0)]).expect("singlet is a valid state")
}

/// Conditional outcome matrix `p(B = m' | A = m)` of a dephased singlet pair.
///
/// Both particles dephase for `γδt₁` before A is measured along direction 0;
/// both dephase for a further `γδt₂` before B is measured along the pair angle.
pub fn chsh_conditional_oracle(
    theta: f64,
    kappa: f64,
    role: PairRole,
    timeline: ChshTimeline,
) -> Result<ConditionalMatrix> {
    check_point(theta, kappa)?;
    role.check(Scenario::ChshDephasing)?;
    timeline.check(theta, kappa)?;
    let angle = match role {
        PairRole::ChshAB => theta,
        _ => theta / 3.0,
    };
    let first = QubitChannel::phase_damping_for(timeline.gamma_dt1)?.kraus_on_both();
    let second = QubitChannel::phase_damping_for(timeline.gamma_dt2)?.kraus_on_both();
    let identity = CMatrix::identity(2, 2);

    let rho1 = apply_kraus(&singlet().0, &first);
    let mut entries = Vec::with_capacity(4);
    for &m in &DICHOTOMIC_VALUES {
        let pa = in_plane_projector(0.0, m).kronecker(&identity);
        let unnormalised = &pa * &rho1 * &pa;
        let p_m = unnormalised.trace().re;
        let post = DensityMatrix::new(unnormalised / c(p_m))?;
        let rho2 = DensityMatrix::new(apply_kraus(&post.0, &second))?;
        for &m_prime in &DICHOTOMIC_VALUES {
            let pb = identity.kronecker(&in_plane_projector(angle, m_prime));
            entries.push(rho2.expectation(&pb));
        }
    }
    ConditionalMatrix::new(&DICHOTOMIC, entries)
}

/// Spin of the Leggett-Garg system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinSystem {
    SpinHalf,
    SpinOne,
}

/// Environment acting between successive measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoherence {
    Dephasing,
    Depolarizing,
}

impl SpinSystem {
    fn dim(self) -> usize {
        match self {
            SpinSystem::SpinHalf => 2,
            SpinSystem::SpinOne => 3,
        }
    }

    fn labels(self) -> &'static [Label] {
        match self {
            SpinSystem::SpinHalf => &DICHOTOMIC,
            SpinSystem::SpinOne => &TRICHOTOMIC,
        }
    }

    fn outcome_values(self) -> &'static [f64] {
        match self {
            SpinSystem::SpinHalf => &DICHOTOMIC_VALUES,
            SpinSystem::SpinOne => &TRICHOTOMIC_VALUES,
        }
    }

    /// `S_x / ħ` (eigenvalues ±1/2 rescaled to ±1 for the qubit).
    fn spin_x(self) -> CMatrix {
        match self {
            SpinSystem::SpinHalf => pauli()[0].clone(),
            SpinSystem::SpinOne => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                CMatrix::from_row_slice(3, 3, &[c(0.0), c(s), c(0.0), c(s), c(0.0), c(s), c(0.0), c(s), c(0.0)])
            }
        }
    }

    /// Diagonal of `H / ħω`.
    fn hamiltonian_diagonal(self) -> &'static [f64] {
        match self {
            SpinSystem::SpinHalf => &[-0.5, 0.5],
            SpinSystem::SpinOne => &[-1.0, 0.0, 1.0],
        }
    }

    /// Free evolution `U(t) = exp(-i H t / ħ)` at phase `ωt`.
    fn evolution(self, phase: f64) -> CMatrix {
        let diag = self.hamiltonian_diagonal();
        let mut u = CMatrix::zeros(diag.len(), diag.len());
        for (k, e) in diag.iter().enumerate() {
            u[(k, k)] = Complex64::from_polar(1.0, -e * phase);
        }
        u
    }

    /// Eigenprojectors of `S_x`, ordered like the outcome labels.
    fn x_projectors(self) -> Vec<CMatrix> {
        let eig = self.spin_x().symmetric_eigen();
        self.outcome_values()
            .iter()
            .map(|&m| {
                let k =
                    eig.eigenvalues.iter().position(|&ev| (ev - m).abs() < 1e-9).expect("spin-x eigenvalue present");
                let v = eig.eigenvectors.column(k);
                v * v.adjoint()
            })
            .collect()
    }

    /// Interaction-picture projectors `U(τ)† Π U(τ)` at phase `ωτ`.
    fn x_projectors_at(self, phase: f64) -> Vec<CMatrix> {
        let u = self.evolution(phase);
        self.x_projectors().iter().map(|p| u.adjoint() * p * &u).collect()
    }
}

/// Qutrit dephasing generator `γ(2NρN - N²ρ - ρN²)` with `N = diag(-1, 0, 1)`,
/// integrated with classical fourth-order Runge-Kutta.
#[derive(Debug, Clone, Copy)]
pub struct QutritDephasing {
    number: Matrix3<Complex64>,
    max_rate_step: f64,
}

impl Default for QutritDephasing {
    fn default() -> Self {
        QutritDephasing::with_max_rate_step(MAX_RATE_STEP)
    }
}

impl QutritDephasing {
    pub fn with_max_rate_step(max_rate_step: f64) -> Self {
        QutritDephasing {
            number: Matrix3::from_diagonal(&nalgebra::Vector3::new(c(-1.0), c(0.0), c(1.0))),
            max_rate_step,
        }
    }

    fn generator(&self, rho: &Matrix3<Complex64>) -> Matrix3<Complex64> {
        let n = &self.number;
        let n2 = n * n;
        n * rho * n * c(2.0) - n2 * rho - rho * n2
    }

    /// Integrates the master equation over a dimensionless time `γt`.
    pub fn evolve(&self, rho: &DensityMatrix, gamma_t: f64) -> Result<DensityMatrix> {
        if rho.dim() != 3 {
            return Err(Error::InvalidDensityMatrix(format!(
                "qutrit generator applied to a {}-level state",
                rho.dim()
            )));
        }
        if !(gamma_t.is_finite() && gamma_t >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma*t must be nonnegative, got {gamma_t}")));
        }
        // ||L|| <= 4 max|n|^2 in units of gamma
        let norm_bound = 4.0 * self.number.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        let steps = ((norm_bound * gamma_t / self.max_rate_step).ceil() as usize).max(1);
        let h = gamma_t / steps as f64;
        let mut state = Matrix3::from_fn(|i, j| rho.0[(i, j)]);
        for _ in 0..steps {
            let k1 = self.generator(&state);
            let k2 = self.generator(&(state + k1 * c(0.5 * h)));
            let k3 = self.generator(&(state + k2 * c(0.5 * h)));
            let k4 = self.generator(&(state + k3 * c(h)));
            state += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0);
        }
        DensityMatrix::new(CMatrix::from_fn(3, 3, |i, j| state[(i, j)]))
    }
}

/// Leggett-Garg conditional outcome matrix from an explicit density-matrix
/// simulation: mixed initial state, projective `x`-spin measurement, noisy
/// free evolution for `interval_multiplier` intervals, second measurement.
pub fn lg_conditional_oracle(
    system: SpinSystem,
    channel: Decoherence,
    theta: f64,
    kappa: f64,
    interval_multiplier: u32,
) -> Result<ConditionalMatrix> {
    lg_conditional_oracle_with(system, channel, theta, kappa, interval_multiplier, QutritDephasing::default())
}

/// [`lg_conditional_oracle`] with an explicit qutrit integrator.
pub fn lg_conditional_oracle_with(
    system: SpinSystem,
    channel: Decoherence,
    theta: f64,
    kappa: f64,
    interval_multiplier: u32,
    integrator: QutritDephasing,
) -> Result<ConditionalMatrix> {
    if system == SpinSystem::SpinOne && channel == Decoherence::Depolarizing {
        return Err(Error::Usage("spin-one depolarizing is not supported".into()));
    }
    if !matches!(interval_multiplier, 1 | 2) {
        return Err(Error::Usage(format!("interval multiplier must be 1 or 2, got {interval_multiplier}")));
    }
    check_point(theta, kappa)?;
    let elapsed = theta * f64::from(interval_multiplier);
    let gamma_t = kappa * elapsed;

    let d = system.dim();
    let rho0 = DensityMatrix::maximally_mixed(d)?;
    let before = system.x_projectors_at(FIRST_MEASUREMENT_PHASE);
    let after = system.x_projectors_at(FIRST_MEASUREMENT_PHASE + elapsed);

    let mut entries = Vec::with_capacity(d * d);
    for pm in &before {
        let unnormalised = pm * &rho0.0 * pm;
        let p_m = unnormalised.trace().re;
        let post = DensityMatrix::new(unnormalised / c(p_m))?;
        let evolved = match (system, channel) {
            (SpinSystem::SpinHalf, Decoherence::Dephasing) => QubitChannel::phase_damping_for(gamma_t)?.apply(&post)?,
            (SpinSystem::SpinHalf, Decoherence::Depolarizing) => {
                QubitChannel::depolarizing_for(gamma_t)?.apply(&post)?
            }
            (SpinSystem::SpinOne, _) => integrator.evolve(&post, gamma_t)?,
        };
        entries.extend(after.iter().map(|p| evolved.expectation(p)));
    }
    ConditionalMatrix::new(system.labels(), entries)
}

/// Oracle conditional matrix for a scenario/pair, using the even CHSH timeline.
pub fn oracle_conditional(spec: &ScenarioSpec, role: PairRole) -> Result<ConditionalMatrix> {
    role.check(spec.scenario())?;
    let (theta, kappa) = (spec.theta(), spec.kappa());
    let multiplier = role.interval_multiplier();
    match spec.scenario() {
        Scenario::ChshDephasing => chsh_conditional_oracle(theta, kappa, role, ChshTimeline::even(theta, kappa)),
        Scenario::LgSpinHalfDephasing => {
            lg_conditional_oracle(SpinSystem::SpinHalf, Decoherence::Dephasing, theta, kappa, multiplier)
        }
        Scenario::LgSpinHalfDepolarizing => {
            lg_conditional_oracle(SpinSystem::SpinHalf, Decoherence::Depolarizing, theta, kappa, multiplier)
        }
        Scenario::LgSpinOneDephasing => {
            lg_conditional_oracle(SpinSystem::SpinOne, Decoherence::Dephasing, theta, kappa, multiplier)
        }
    }
}

/// `(θ, κ)` points on which oracle and closed forms are compared.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleGrid {
    pub thetas: Vec<f64>,
    pub kappas: Vec<f64>,
}

impl Default for OracleGrid {
    /// 20 angles `π/20, 2π/20, ..., π` and 10 ratios `0, 0.2, ..., 1.8`.
    fn default() -> Self {
        OracleGrid {
            thetas: (1..=20).map(|i| PI * i as f64 / 20.0).collect(),
            kappas: (0..10).map(|j| 0.2 * j as f64).collect(),
        }
    }
}

/// Agreement tolerance for a scenario: exact Kraus maps for qubits, integrated
/// dynamics for the qutrit.
pub fn oracle_tolerance(scenario: Scenario) -> f64 {
    match scenario {
        Scenario::LgSpinOneDephasing => 1e-8,
        _ => 1e-10,
    }
}

/// Largest oracle/closed-form deviation for one pair role.
#[derive(Debug, Clone, PartialEq)]
pub struct RoleDeviation {
    pub scenario: Scenario,
    pub role: PairRole,
    pub max_deviation: f64,
    pub worst_theta: f64,
    pub worst_kappa: f64,
    pub tolerance: f64,
}

impl RoleDeviation {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

/// Compares oracle and closed form on every grid point for both pair roles of a scenario.
pub fn validate_scenario(scenario: Scenario, grid: &OracleGrid) -> Result<Vec<RoleDeviation>> {
    use rayon::prelude::*;

    let points: Vec<(f64, f64)> = grid.thetas.iter().flat_map(|&t| grid.kappas.iter().map(move |&k| (t, k))).collect();
    scenario
        .roles()
        .into_iter()
        .map(|role| {
            let deviations = points
                .par_iter()
                .map(|&(theta, kappa)| {
                    let spec = ScenarioSpec::new(scenario, theta, kappa)?;
                    let closed = pair_conditional(&spec, role)?;
                    let simulated = oracle_conditional(&spec, role)?;
                    Ok((closed.max_abs_diff(&simulated), theta, kappa))
                })
                .collect::<Result<Vec<_>>>()?;
            let (max_deviation, worst_theta, worst_kappa) =
                deviations.into_iter().fold((0.0, f64::NAN, f64::NAN), |best, d| if d.0 > best.0 { d } else { best });
            Ok(RoleDeviation {
                scenario,
                role,
                max_deviation,
                worst_theta,
                worst_kappa,
                tolerance: oracle_tolerance(scenario),
            })
        })
        .collect()
}
