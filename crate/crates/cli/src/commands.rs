use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use qentropic::entropy::{
    conditional_entropy_avg, conditional_entropy_chain, joint_entropy, metric, mutual_information, tsallis_entropy,
    Direction, JointDistribution, MetricKind,
};
use qentropic::oracle::{validate_scenario, OracleGrid};
use qentropic::{c_q, kappa_threshold, scan, KappaThreshold, Scenario, ScenarioSpec};

use crate::args::{Command, CqArgs, EntropyArgs, ScanArgs, ThresholdArgs, ValidateArgs};
use crate::output::{emit, Cell, Table};

/// Why a command did not succeed; decides the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Malformed invocation (exit 2).
    Usage(String),
    /// Invalid data, numerical failure or failed validation (exit 1).
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<qentropic::Error> for Failure {
    fn from(e: qentropic::Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(format!("i/o error: {e}"))
    }
}

pub fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Entropy(a) => entropy(a),
        Command::Cq(a) => cq(a),
        Command::ScanS(a) => scan_s(a),
        Command::KappaThreshold(a) => threshold(a),
        Command::ValidateOracle(a) => validate(a),
    }
}

/// Parses a matrix whose rows are split by `row_sep` and cells by ','.
pub fn parse_matrix(text: &str, row_sep: char) -> Result<Vec<Vec<f64>>, Failure> {
    text.split(row_sep)
        .map(|line| line.split('#').next().unwrap_or("").trim())
        .filter(|line| !line.is_empty())
        .map(|line| {
            line.split(',')
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("`{}` is not a number", cell.trim())))
                })
                .collect()
        })
        .collect()
}

fn read_joint(args: &EntropyArgs) -> Result<JointDistribution, Failure> {
    let rows = match (&args.joint, &args.file) {
        (Some(inline), _) => parse_matrix(inline, ';')?,
        (None, Some(path)) => parse_matrix(&read_file(path)?, '\n')?,
        (None, None) => return Err(Failure::Usage("either --joint or --file is required".into())),
    };
    Ok(JointDistribution::from_rows(&rows)?)
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", path.display())))
}

fn entropy(args: EntropyArgs) -> Result<(), Failure> {
    let joint = read_joint(&args)?;
    let mut table = Table::new(vec![
        "q",
        "h_x",
        "h_y",
        "h_xy",
        "h_x_given_y",
        "h_y_given_x",
        "h_avg_x_given_y",
        "h_avg_y_given_x",
        "mutual_information",
        "delta",
        "dtilde",
        "non_metric_regime",
    ]);
    for &q in &args.q.0 {
        let delta = metric(&joint, q, MetricKind::DeltaQ);
        let dtilde = metric(&joint, q, MetricKind::DTildeQ);
        table.push(vec![
            q.value().into(),
            tsallis_entropy(&joint.x_marginal(), q).into(),
            tsallis_entropy(&joint.y_marginal(), q).into(),
            joint_entropy(&joint, q).into(),
            conditional_entropy_chain(&joint, q, Direction::XGivenY).into(),
            conditional_entropy_chain(&joint, q, Direction::YGivenX).into(),
            conditional_entropy_avg(&joint, q, Direction::XGivenY).into(),
            conditional_entropy_avg(&joint, q, Direction::YGivenX).into(),
            mutual_information(&joint, q).into(),
            delta.value.into(),
            dtilde.value.into(),
            delta.non_metric_regime.into(),
        ]);
    }
    Ok(emit(&table, args.output.format, args.output.out.as_deref())?)
}

fn cq(args: CqArgs) -> Result<(), Failure> {
    let spec = ScenarioSpec::new(args.scenario, args.theta, args.kappa)?;
    let mut table = Table::new(vec!["scenario", "metric", "q", "theta", "kappa", "c_value"]);
    for &q in &args.q.0 {
        table.push(vec![
            args.scenario.name().into(),
            args.metric.name().into(),
            q.value().into(),
            args.theta.into(),
            args.kappa.into(),
            c_q(&spec, args.metric, q)?.into(),
        ]);
    }
    Ok(emit(&table, args.output.format, args.output.out.as_deref())?)
}

fn scan_s(args: ScanArgs) -> Result<(), Failure> {
    let cfg = args.search.config();
    let records = scan(args.scenario, args.metric, &args.q.0, &args.kappa.points(), &cfg)?;
    let mut table = Table::new(vec!["scenario", "metric", "q", "kappa", "theta_star", "s_value", "positive"]);
    for r in records {
        table.push(vec![
            r.scenario.name().into(),
            r.metric.name().into(),
            r.q.into(),
            r.kappa.into(),
            r.theta_star.into(),
            r.s_value.into(),
            r.positive.into(),
        ]);
    }
    Ok(emit(&table, args.output.format, args.output.out.as_deref())?)
}

fn threshold(args: ThresholdArgs) -> Result<(), Failure> {
    let cfg = args.search.config();
    let mut table = Table::new(vec!["scenario", "metric", "q", "status", "kappa_threshold"]);
    for &q in &args.q.0 {
        let (status, value) = match kappa_threshold(args.scenario, args.metric, q, &cfg)? {
            KappaThreshold::Absent => ("absent", None),
            KappaThreshold::Found(k) => ("found", Some(k)),
            KappaThreshold::AboveRange(k) => ("above-range", Some(k)),
        };
        table.push(vec![
            args.scenario.name().into(),
            args.metric.name().into(),
            q.value().into(),
            status.into(),
            value.into(),
        ]);
    }
    Ok(emit(&table, args.output.format, args.output.out.as_deref())?)
}

fn validate(args: ValidateArgs) -> Result<(), Failure> {
    if args.theta_points == 0 || args.kappa_points == 0 || !(args.kappa_step.is_finite() && args.kappa_step >= 0.0) {
        return Err(Failure::Usage("grid needs positive point counts and a nonnegative kappa step".into()));
    }
    let grid = OracleGrid {
        thetas: (1..=args.theta_points).map(|i| PI * i as f64 / args.theta_points as f64).collect(),
        kappas: (0..args.kappa_points).map(|j| args.kappa_step * j as f64).collect(),
    };
    let scenarios = args.scenario.map_or_else(|| Scenario::ALL.to_vec(), |s| vec![s]);
    let mut table =
        Table::new(vec!["scenario", "role", "max_deviation", "worst_theta", "worst_kappa", "tolerance", "pass"]);
    let mut failed = Vec::new();
    for scenario in scenarios {
        for d in validate_scenario(scenario, &grid)? {
            if !d.passed() {
                failed.push(format!("{}/{}", d.scenario, d.role));
            }
            table.push(vec![
                d.scenario.name().into(),
                d.role.name().into(),
                Cell::Num(d.max_deviation),
                Cell::Num(d.worst_theta),
                Cell::Num(d.worst_kappa),
                Cell::Num(d.tolerance),
                d.passed().into(),
            ]);
        }
    }
    emit(&table, args.output.format, args.output.out.as_deref())?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("oracle deviation above tolerance for {}", failed.join(", "))))
    }
}
