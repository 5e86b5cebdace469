use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;

use pinchisac::baselines::exhaustive_search;
use pinchisac::experiments::{
    case_problem, default_gammas, emit, monte_carlo, run_case_study, run_sweep, write_csv, write_json, Format,
    Placement, ScenarioConfig, SweepAxis, SweepSpec, Tabular,
};
use pinchisac::sca::PipelineConfig;
use pinchisac::sensing::{detection_probability, monte_carlo_detector};
use pinchisac::{selftest, Error};

#[derive(Parser, Debug)]
#[command(name = "pinchisac", version, about = "Pinching-antenna ISAC placement and beamforming experiments")]
struct Cli {
    /// Scenario file (flat TOML keys with units in the names).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; results go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Two-antenna case studies: optimizer against exhaustive search.
    CaseStudy {
        #[arg(long = "case", value_delimiter = ',', default_values_t = [1u8, 2, 3])]
        cases: Vec<u8>,
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
    },
    /// Random user/target realizations at the configured parameters.
    MonteCarlo {
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Monte-Carlo averages along one parameter axis.
    Sweep {
        #[arg(long, value_enum)]
        axis: Option<AxisArg>,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Reference computations: exhaustive placement search or the detector simulation.
    Oracle {
        #[arg(long, value_enum, default_value_t = OracleKind::Exhaustive)]
        kind: OracleKind,
        /// Detector trials per SNR value.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AxisArg {
    PMax,
    Gamma,
    NumTx,
    NumRx,
}

impl From<AxisArg> for SweepAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::PMax => SweepAxis::PMax,
            AxisArg::Gamma => SweepAxis::RadarSnrRequirement,
            AxisArg::NumTx => SweepAxis::NumTx,
            AxisArg::NumRx => SweepAxis::NumRx,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleKind {
    Exhaustive,
    Detector,
}

enum Failure {
    Error(Error),
    AllInfeasible,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::AntennaOutOfRange { .. } | Error::SearchTooExpensive { .. } => 2,
        Error::NumericalInfeasibility { .. }
        | Error::NonMonotoneStep { .. }
        | Error::RealizationFailure { .. }
        | Error::DegenerateChannel(_) => 4,
        Error::EmptyResults | Error::Io { .. } | Error::Csv(_) | Error::Json(_) => 1,
    }
}

fn write_rows<T: Tabular + Serialize>(rows: &[T], cli: &Cli) -> Result<(), Error> {
    match &cli.out {
        Some(path) => {
            emit(rows, cli.format, path)?;
            info!("wrote {} rows to {}", rows.len(), path.display());
            Ok(())
        }
        None => {
            if rows.is_empty() {
                return Err(Error::EmptyResults);
            }
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            match cli.format {
                Format::Csv => write_csv(rows, &mut lock)?,
                Format::Json => {
                    write_json(rows, &mut lock)?;
                    writeln!(lock).map_err(|e| Error::io("<stdout>", e))?;
                }
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct OracleRow {
    name: String,
    value: f64,
    reference: f64,
    detail: String,
}

impl Tabular for OracleRow {
    fn header() -> Vec<&'static str> {
        vec!["name", "value", "reference", "detail"]
    }
    fn record(&self) -> Vec<String> {
        vec![self.name.clone(), format!("{:?}", self.value), format!("{:?}", self.reference), self.detail.clone()]
    }
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path).map_err(|e| match e {
            Error::Io { .. } => Error::Config(e.to_string()),
            other => other,
        })?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    let pipeline = PipelineConfig::default();
    match &cli.command {
        Command::CaseStudy { cases, gammas } => {
            let gammas = gammas.clone().unwrap_or_else(default_gammas);
            let mut rows = Vec::new();
            for &case in cases {
                info!("case {case}: {} requirement values", gammas.len());
                rows.extend(run_case_study(&cfg, &pipeline, case, &gammas)?);
            }
            write_rows(&rows, cli)?;
            if rows.iter().all(|r| !r.feasible) {
                return Err(Failure::AllInfeasible);
            }
        }
        Command::MonteCarlo { trials } => {
            let n = trials.unwrap_or(cfg.trials);
            info!("{n} trials, seed {}", cfg.seed);
            let report = monte_carlo(&cfg, &pipeline, n)?;
            for s in &report.summary {
                eprintln!(
                    "{:<16} mean rate {:>8.4} ± {:.4}  feasible {:>5.1}%",
                    s.algorithm.label(),
                    s.mean_rate,
                    s.std_error,
                    100.0 * s.feasible_fraction
                );
            }
            write_rows(&report.trials, cli)?;
            if report.all_infeasible() {
                return Err(Failure::AllInfeasible);
            }
        }
        Command::Sweep { axis, values, trials } => {
            let (axis, values) = match (axis, values, &cfg.sweep) {
                (Some(a), Some(v), _) => (SweepAxis::from(*a), v.clone()),
                (None, None, Some(s)) => (s.axis, s.values.clone()),
                (Some(a), None, Some(s)) if SweepAxis::from(*a) == s.axis => (s.axis, s.values.clone()),
                _ => {
                    return Err(
                        Error::Config("sweep needs both --axis and --values, or a sweep in the config".into()).into()
                    )
                }
            };
            let cfg = ScenarioConfig { sweep: Some(SweepSpec { axis, values: values.clone() }), ..cfg };
            cfg.validate()?;
            let n = trials.unwrap_or(cfg.trials);
            info!("sweep over {} with {} values, {n} trials", axis.label(), values.len());
            let report = run_sweep(&cfg, &pipeline, axis, &values, n)?;
            write_rows(&report.rows, cli)?;
            if report.rows.iter().all(|r| r.feasible_fraction == 0.0) {
                return Err(Failure::AllInfeasible);
            }
        }
        Command::Oracle { kind: OracleKind::Exhaustive, .. } => {
            let problem = match cfg.placement {
                Placement::Fixed { user, target } => cfg.problem(user, target)?,
                Placement::Uniform { .. } => case_problem(&cfg, 1, cfg.detection.radar_snr_requirement)?,
            };
            let rows = match exhaustive_search(&problem, cfg.exhaustive_step, false)? {
                Some(r) => vec![OracleRow {
                    name: "exhaustive_rate".into(),
                    value: r.solution.rate,
                    reference: f64::NAN,
                    detail: format!("positions {:?}, {} grid points", r.positions, r.evaluated),
                }],
                None => {
                    eprintln!("no grid point meets the radar requirement");
                    return Err(Failure::AllInfeasible);
                }
            };
            write_rows(&rows, cli)?;
        }
        Command::Oracle { kind: OracleKind::Detector, trials } => {
            let spec = cfg.detection;
            let rows: Vec<OracleRow> = [0.0, 1.0, 4.0, 10.0]
                .into_iter()
                .map(|g| {
                    let est = monte_carlo_detector(&spec, spec.noise_power * (1.0 + g), *trials, cfg.seed);
                    OracleRow {
                        name: format!("detection_probability_snr_{g}"),
                        value: est.detection_probability,
                        reference: detection_probability(g, spec.false_alarm_probability),
                        detail: format!("empirical false alarm {:.5}", est.false_alarm_probability),
                    }
                })
                .collect();
            write_rows(&rows, cli)?;
        }
        Command::Selftest => {
            let checks = selftest::run(cfg.seed)?;
            let mut ok = true;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            if !ok {
                return Err(Error::Config("selftest failed".into()).into());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: cannot set up {} worker threads: {e}", cli.threads);
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::AllInfeasible) => {
            eprintln!("every run was infeasible");
            ExitCode::from(3)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
