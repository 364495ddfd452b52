//! q-entropic information distances and the violation of metric Bell (CHSH)
//! and Leggett-Garg inequalities under decoherence.
//!
//! * [`entropy`]: Tsallis entropies, both conditional forms, mutual
//!   q-information and the two information distances.
//! * [`scenarios`]: closed-form outcome distributions of the noisy setups.
//! * [`oracle`]: independent density-matrix simulation of the same setups.
//! * [`analysis`]: `C_q`, its supremum `S_q(κ)`, the threshold `κ_s(q)` and scans.

pub mod analysis;
pub mod entropy;
pub mod error;
pub mod oracle;
pub mod scenarios;

pub use analysis::{c_q, kappa_threshold, s_q, scan, KappaGrid, KappaThreshold, ScanRecord, SearchConfig, Supremum};
pub use entropy::{
    conditional_entropy_avg, conditional_entropy_chain, joint_entropy, metric, mutual_information, q_log,
    tsallis_entropy, Direction, Distance, EntropyOrder, JointDistribution, Label, MetricKind, ProbabilityVector,
};
pub use error::{Error, Result};
pub use scenarios::{pair_conditional, pair_joint, ConditionalMatrix, PairRole, Scenario, ScenarioSpec};
