//! `soil`: variable importance from the command line.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use soil_core::io::{load_dataset, Meta, Report};
use soil_core::simulation::{cross_examination, run_study, ScenarioConfig, StudyOptions, StudyResult};
use soil_core::{compute_importance, rank_variables, ImportanceVector, SoilError, WeightingMethod};

use config::{read_file_config, resolve_common, resolve_task, CommonArgs, DataArgs, FileConfig, Format, Resolved};

#[derive(Parser)]
#[command(name = "soil", version, about = "Sparsity oriented importance learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Importance of every column of a CSV dataset.
    Importance {
        /// CSV file with a header row.
        input: Option<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte Carlo study on a built-in scenario.
    Simulate {
        /// Scenario name: 1-6, s1-s5, ss1, ss2.
        #[arg(long)]
        example: Option<String>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        rho: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        sigma2: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Regenerate the response from the top-ranked variables and recompute importance.
    CrossExamine {
        input: Option<PathBuf>,
        /// Number of top-ranked variables kept as the working truth.
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        reps: Option<usize>,
        /// Method whose ranking picks the kept variables.
        #[arg(long)]
        base_method: Option<String>,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Bad flags, config values or config files. Exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

enum Failure {
    Usage(String),
    Data(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<SoilError> for Failure {
    fn from(e: SoilError) -> Self {
        match e {
            SoilError::ConfigInvalid(_)
            | SoilError::BadThreshold(_)
            | SoilError::BadRho(_)
            | SoilError::InvalidPenalty(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {}", one_line(&msg));
            ExitCode::from(2)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {}", one_line(&msg));
            ExitCode::from(1)
        }
    }
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("SOIL_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("SOIL_THREADS must be a non-negative integer, got '{raw}'")))?;
    // 0 keeps rayon's automatic choice.
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Data(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_threads()?;
    match cli.command {
        Command::Importance { input, data, common } => {
            let file = read_file_config(common.config.as_deref())?;
            let res = resolve_common(&common, &file.common)?;
            let (response, task) = resolve_task(&data, &file.data)?;
            let path = input_path(input, &file)?;
            let dataset = load_dataset(&path, &response, task)?;
            let result = compute_importance(&dataset, &res.soil)?;
            let rows: Vec<(WeightingMethod, &ImportanceVector)> =
                result.methods.iter().map(|m| (m.method, &m.importance)).collect();
            print_table(&rows, None);
            let meta = meta("importance", &res, &serde_json::json!({ "response": response, "task": task }));
            let report = Report::from_soil(&result, meta, &res.thresholds)?;
            emit(&report, &res)
        }
        Command::Simulate { example, reps, n, rho, sigma2, common } => {
            let file = read_file_config(common.config.as_deref())?;
            let res = resolve_common(&common, &file.common)?;
            let name = example
                .or(file.example.clone())
                .ok_or_else(|| UsageError("--example is required".into()))?;
            let mut scenario = ScenarioConfig::example(&name)?;
            if let Some(v) = reps.or(file.reps) {
                scenario.replications = v;
            }
            if let Some(v) = n.or(file.n) {
                scenario.n = v;
            }
            if let Some(v) = rho.or(file.rho) {
                scenario.rho = v;
            }
            if let Some(v) = sigma2.or(file.sigma2) {
                scenario.sigma2 = v;
            }
            scenario.seed = res.soil.seed;
            let study = run_study(&scenario, &study_options(&res))?;
            print_study(&study);
            let extra = serde_json::json!({
                "example": name,
                "replications": scenario.replications,
                "n": scenario.n,
                "rho": scenario.rho,
                "sigma2": scenario.sigma2,
            });
            emit(&Report::from_study(&study, meta("simulate", &res, &extra)), &res)
        }
        Command::CrossExamine { input, top, reps, base_method, data, common } => {
            let file = read_file_config(common.config.as_deref())?;
            let res = resolve_common(&common, &file.common)?;
            let (response, task) = resolve_task(&data, &file.data)?;
            let path = input_path(input, &file)?;
            let top = top
                .or(file.top)
                .ok_or_else(|| UsageError("--top is required".into()))?;
            let reps = reps.or(file.reps).unwrap_or(100);
            let base: WeightingMethod = match base_method.as_ref().or(file.base_method.as_ref()) {
                Some(m) => m.parse()?,
                None => WeightingMethod::Arm,
            };
            let dataset = load_dataset(&path, &response, task)?;
            let mut base_cfg = res.soil.clone();
            base_cfg.methods = vec![base];
            let base_result = compute_importance(&dataset, &base_cfg)?;
            let base_importance = &base_result.methods[0].importance;
            let study = cross_examination(&dataset, base_importance, top, reps, res.soil.seed, &study_options(&res))?;
            print_study(&study);
            let extra = serde_json::json!({
                "response": response,
                "task": task,
                "top": top,
                "replications": reps,
                "base_method": base,
            });
            emit(&Report::from_study(&study, meta("cross-examine", &res, &extra)), &res)
        }
    }
}

fn input_path(flag: Option<PathBuf>, file: &FileConfig) -> Result<PathBuf, UsageError> {
    flag.or_else(|| file.input.clone())
        .ok_or_else(|| UsageError("an input CSV path is required".into()))
}

fn study_options(res: &Resolved) -> StudyOptions {
    StudyOptions {
        soil: res.soil.clone(),
        thresholds: if res.thresholds.is_empty() {
            StudyOptions::default().thresholds
        } else {
            res.thresholds.clone()
        },
    }
}

fn meta(command: &str, res: &Resolved, extra: &serde_json::Value) -> Meta {
    #[derive(Serialize)]
    struct Recorded<'a> {
        soil: &'a soil_core::SoilConfig,
        thresholds: &'a [f64],
        run: &'a serde_json::Value,
    }
    let config = serde_json::to_value(Recorded {
        soil: &res.soil,
        thresholds: &res.thresholds,
        run: extra,
    })
    .expect("config serializes");
    Meta {
        command: command.to_string(),
        seed: res.soil.seed,
        config,
    }
}

fn emit(report: &Report, res: &Resolved) -> Result<(), Failure> {
    let Some(path) = &res.output else {
        return Ok(());
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    match res.format {
        Format::Json => {
            let text = report.to_json()?;
            out.write_all(text.as_bytes())?;
            out.write_all(b"\n")?;
        }
        Format::Csv => report.write_csv(&mut out)?,
    }
    out.flush()?;
    Ok(())
}

/// One column per method, rows in the rank order of the first method.
fn print_table(methods: &[(WeightingMethod, &ImportanceVector)], errors: Option<&[Vec<f64>]>) {
    let Some((_, lead)) = methods.first() else {
        return;
    };
    let width = lead.names.iter().map(String::len).max().unwrap_or(0).max(8);
    let mut stdout = std::io::stdout().lock();
    let mut header = format!("{:<width$}", "variable");
    for (m, _) in methods {
        header.push_str(&format!("  {:>10}", m.to_string()));
        if errors.is_some() {
            header.push_str(&format!("  {:>8}", "se"));
        }
    }
    let _ = writeln!(stdout, "{header}");
    for j in rank_variables(lead) {
        let mut line = format!("{:<width$}", lead.names[j]);
        for (k, (_, imp)) in methods.iter().enumerate() {
            line.push_str(&format!("  {:>10.4}", imp.values[j]));
            if let Some(se) = errors {
                line.push_str(&format!("  {:>8.4}", se[k][j]));
            }
        }
        let _ = writeln!(stdout, "{line}");
    }
}

fn print_study(study: &StudyResult) {
    let means: Vec<ImportanceVector> = study
        .methods
        .iter()
        .map(|m| ImportanceVector {
            values: m.mean_importance.clone(),
            names: study.names.clone(),
        })
        .collect();
    let rows: Vec<(WeightingMethod, &ImportanceVector)> =
        study.methods.iter().zip(&means).map(|(m, v)| (m.method, v)).collect();
    let errors: Vec<Vec<f64>> = study.methods.iter().map(|m| m.std_error.clone()).collect();
    print_table(&rows, Some(&errors));
}
