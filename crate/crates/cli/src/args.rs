use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qentropic::{EntropyOrder, KappaGrid, MetricKind, Scenario, SearchConfig};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "qentropic", version, about = "q-entropic metric Bell and Leggett-Garg violations under decoherence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropies, conditional entropies, mutual information and both distances of a joint distribution.
    Entropy(EntropyArgs),
    /// Single evaluation of the violation quantity C_q(theta, kappa).
    Cq(CqArgs),
    /// Table of S_q(kappa) over a q list and a kappa grid.
    ScanS(ScanArgs),
    /// Largest kappa at which S_q stays positive, per q.
    KappaThreshold(ThresholdArgs),
    /// Compare the density-matrix oracle with the closed forms on a (theta, kappa) grid.
    ValidateOracle(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; stdout when omitted. Relative paths are resolved against $QENTROPIC_OUT_DIR when set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub theta_min: Option<f64>,
    #[arg(long)]
    pub theta_max: Option<f64>,
    /// Points of the coarse theta grid.
    #[arg(long)]
    pub coarse_steps: Option<usize>,
    /// Golden-section stopping width on theta.
    #[arg(long)]
    pub refine_tol: Option<f64>,
    /// S_q must exceed this to count as positive.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub kappa_max: Option<f64>,
    /// Intervals of the coarse kappa bracketing grid.
    #[arg(long)]
    pub kappa_steps: Option<usize>,
    #[arg(long)]
    pub kappa_tol: Option<f64>,
}

impl SearchArgs {
    pub fn config(&self) -> SearchConfig {
        let d = SearchConfig::default();
        SearchConfig {
            theta_min: self.theta_min.unwrap_or(d.theta_min),
            theta_max: self.theta_max.unwrap_or(d.theta_max),
            coarse_steps: self.coarse_steps.unwrap_or(d.coarse_steps),
            refine_tolerance: self.refine_tol.unwrap_or(d.refine_tolerance),
            positivity_epsilon: self.epsilon.unwrap_or(d.positivity_epsilon),
            kappa_max: self.kappa_max.unwrap_or(d.kappa_max),
            kappa_coarse_steps: self.kappa_steps.unwrap_or(d.kappa_coarse_steps),
            kappa_bisect_tolerance: self.kappa_tol.unwrap_or(d.kappa_bisect_tolerance),
        }
    }
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["joint", "file"])))]
pub struct EntropyArgs {
    /// Inline joint matrix: rows separated by ';', cells by ',' (e.g. "0.5,0;0,0.5").
    #[arg(long)]
    pub joint: Option<String>,
    /// File with one matrix row per line, cells separated by ',' ('#' starts a comment).
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long, value_parser = parse_q_list, default_value = "1")]
    pub q: QList,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CqArgs {
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Scenario,
    #[arg(long, value_parser = parse_metric, default_value = "dtilde")]
    pub metric: MetricKind,
    #[arg(long, value_parser = parse_q_list)]
    pub q: QList,
    #[arg(long)]
    pub theta: f64,
    #[arg(long)]
    pub kappa: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Scenario,
    #[arg(long, value_parser = parse_metric, default_value = "dtilde")]
    pub metric: MetricKind,
    /// Comma-separated q values.
    #[arg(long, value_parser = parse_q_list)]
    pub q: QList,
    /// kappa grid as min:max:step, or a single value.
    #[arg(long, value_parser = parse_kappa_grid)]
    pub kappa: KappaGrid,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Scenario,
    #[arg(long, value_parser = parse_metric, default_value = "dtilde")]
    pub metric: MetricKind,
    #[arg(long, value_parser = parse_q_list)]
    pub q: QList,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Scenario to validate; all scenarios when omitted.
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Option<Scenario>,
    /// Angles pi*i/N for i = 1..=N.
    #[arg(long, default_value_t = 20)]
    pub theta_points: usize,
    /// Ratios j*step for j = 0..N.
    #[arg(long, default_value_t = 10)]
    pub kappa_points: usize,
    #[arg(long, default_value_t = 0.2)]
    pub kappa_step: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|e: qentropic::Error| e.to_string())
}

fn parse_metric(s: &str) -> Result<MetricKind, String> {
    s.parse().map_err(|e: qentropic::Error| e.to_string())
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
}

/// Comma-separated positive orders, e.g. `1.0,1.2,1.5`.
#[derive(Debug, Clone, PartialEq)]
pub struct QList(pub Vec<EntropyOrder>);

pub fn parse_q_list(s: &str) -> Result<QList, String> {
    s.split(',')
        .map(|part| EntropyOrder::new(parse_f64(part)?).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()
        .map(QList)
}

/// `min:max:step`, or a single value.
pub fn parse_kappa_grid(s: &str) -> Result<KappaGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [single] => KappaGrid::single(parse_f64(single)?),
        [min, max, step] => KappaGrid::new(parse_f64(min)?, parse_f64(max)?, parse_f64(step)?),
        _ => return Err(format!("`{s}` is neither a value nor min:max:step")),
    };
    grid.map_err(|e| e.to_string())
}
