//! `softcap-sim`: batch front end over `softcap-core`.

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use softcap_core::engine::{run_ensemble, run_ensemble_with_traces, EnsembleConfig};
use softcap_core::excursions::{decompose, DecompositionRecord};
use softcap_core::models::{build_model, ChangeLaw, Model};
use softcap_core::oracle::{exact_absorption, ExactSolution};
use softcap_core::process::TraceRecord;
use softcap_core::report::{any_violated, to_csv_string, BoundReport, Relation};
use softcap_core::verify::{
    check_against_oracle, check_assumptions, check_doob_above, check_excursion_geometry,
    check_hit_zero, check_return_time, extinction_report, scan_capacity, EpsilonK, ScanSettings,
    ScalingTable,
};

use config::{RunConfig, VerifierSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const THREADS_ENV: &str = "SOFTCAP_SIM_THREADS";

const AFTER_HELP: &str = "\
Exit status: 0 when every asserted bound holds, 1 when any is violated,
2 on usage, configuration or oracle errors.

CSV outputs (RFC 4180, '.' decimal separator), columns in order:
  reports:  name,theoretical,empirical,stderr,n,verdict,relation,note
  oracle:   z,extinction_probability,expected_time,cap_hit_probability
  scan:     K,z0,reps,n_extinct,censored,mean_time,stderr,oracle_mean,note

Parallelism: --parallelism, else ensemble.parallelism in the config, else
$SOFTCAP_SIM_THREADS, else 1. Results do not depend on it.";

#[derive(Debug, Parser)]
#[command(name = "softcap-sim", version, about = "Populations under a soft carrying capacity", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Traces,
    Summary,
    Reports,
}

#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Overrides ensemble.master_seed.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "N")]
    pub parallelism: Option<usize>,
    /// Write artifacts into this directory instead of stdout.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub emit: Option<Emit>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an ensemble; emit its summary (default) or its traces.
    Simulate(CommonArgs),
    /// Run an ensemble and the configured verifiers; emit bound reports.
    Verify(CommonArgs),
    /// Solve the first-step equations; emit the per-state table.
    Oracle(CommonArgs),
    /// Mean extinction time across capacities; emit the scaling table.
    Scan(CommonArgs),
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

/// Named output artifact.
struct Artifact {
    file: &'static str,
    body: String,
}

struct Outcome {
    artifacts: Vec<Artifact>,
    /// Index of the artifact shown on stdout when no `--out` is given.
    primary: usize,
    exit: i32,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn load(args: &CommonArgs) -> Result<(RunConfig, Model), Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure(format!("{}: {e}", args.config.display())))?;
    let cfg = config::parse(&text).map_err(|e| Failure(format!("config: {e}")))?;
    let model = build_model(&cfg.model).map_err(|e| Failure(format!("config: model: {e}")))?;
    Ok((cfg, model))
}

fn parallelism(args: &CommonArgs, cfg: &RunConfig) -> Result<usize, Failure> {
    let from_env = || -> Result<Option<usize>, Failure> {
        match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| Failure(format!("{THREADS_ENV}={v:?} is not a thread count"))),
            Err(_) => Ok(None),
        }
    };
    let p = match args.parallelism {
        Some(p) => p,
        None => match cfg.ensemble.as_ref().and_then(|e| e.parallelism) {
            Some(p) => p,
            None => from_env()?.unwrap_or(1),
        },
    };
    if p == 0 {
        return Err(Failure("parallelism must be at least 1".into()));
    }
    Ok(p)
}

fn ensemble_config(args: &CommonArgs, cfg: &RunConfig, model: &Model) -> Result<EnsembleConfig, Failure> {
    let e = cfg
        .ensemble
        .as_ref()
        .ok_or_else(|| Failure("config: missing field `ensemble`".into()))?;
    let z0 = e
        .z0
        .ok_or_else(|| Failure("config: ensemble: missing field `z0`".into()))?;
    if e.reps == 0 {
        return Err(Failure("config: ensemble.reps must be at least 1".into()));
    }
    let mut c = EnsembleConfig::new(
        model.capacity(),
        z0,
        e.reps,
        e.step_budget,
        args.seed.unwrap_or(e.master_seed),
    )
    .with_parallelism(parallelism(args, cfg)?);
    c.record_full_traces = e.record_full_traces;
    Ok(c)
}

fn solve_oracle(cfg: &RunConfig, model: &Model) -> Result<ExactSolution, Failure> {
    let o = cfg
        .oracle
        .as_ref()
        .ok_or_else(|| Failure("config: missing field `oracle`".into()))?;
    let sol = exact_absorption(model, o.state_cap).map_err(|e| Failure(format!("oracle: {e}")))?;
    if let Some(tol) = o.tail_tolerance {
        let start = o
            .start
            .or_else(|| cfg.ensemble.as_ref().and_then(|e| e.z0))
            .ok_or_else(|| Failure("config: oracle.tail_tolerance needs oracle.start or ensemble.z0".into()))?;
        sol.check_tail(start, tol).map_err(|e| Failure(format!("oracle: {e}")))?;
    }
    Ok(sol)
}

fn validate_verifiers(cfg: &RunConfig, model: &Model) -> Result<(), Failure> {
    let k = model.capacity();
    for (i, v) in cfg.verifiers.iter().enumerate() {
        match v {
            VerifierSpec::Doob { x_list } => {
                if let Some(x) = x_list.iter().find(|&&x| x < k) {
                    return Err(Failure(format!(
                        "config: verifiers[{i}].x_list: x={x} is below K={k}"
                    )));
                }
            }
            VerifierSpec::ReturnTime { delta, .. } if !(*delta > 0.0) => {
                return Err(Failure(format!(
                    "config: verifiers[{i}].delta must be positive"
                )));
            }
            VerifierSpec::OracleAgreement if cfg.oracle.is_none() => {
                return Err(Failure(format!(
                    "config: verifiers[{i}]: oracle_agreement needs an `oracle` section"
                )));
            }
            _ => {}
        }
    }
    Ok(())
}

fn simulate_cmd(args: &CommonArgs) -> Result<Outcome, Failure> {
    let (cfg, model) = load(args)?;
    let ec = ensemble_config(args, &cfg, &model)?;
    match args.emit.unwrap_or(Emit::Summary) {
        Emit::Traces => {
            let (summary, traces) = run_ensemble_with_traces(&model, &ec)?;
            let mut lines = String::new();
            let mut decomp = String::new();
            for t in &traces {
                lines.push_str(&serde_json::to_string(&TraceRecord::from_trace(t, ec.record_full_traces))?);
                lines.push('\n');
                let d = decompose(t, ec.capacity);
                decomp.push_str(&serde_json::to_string(&DecompositionRecord::from(&d))?);
                decomp.push('\n');
            }
            Ok(Outcome {
                artifacts: vec![
                    Artifact { file: "traces.jsonl", body: lines },
                    Artifact { file: "decompositions.jsonl", body: decomp },
                    Artifact { file: "summary.json", body: json(&summary) },
                ],
                primary: 0,
                exit: EXIT_OK,
            })
        }
        Emit::Summary | Emit::Reports => {
            let summary = run_ensemble(&model, &ec)?;
            Ok(Outcome {
                artifacts: vec![Artifact { file: "summary.json", body: json(&summary) }],
                primary: 0,
                exit: EXIT_OK,
            })
        }
    }
}

fn verify_cmd(args: &CommonArgs) -> Result<Outcome, Failure> {
    let (cfg, model) = load(args)?;
    validate_verifiers(&cfg, &model)?;
    let needs_ensemble = cfg
        .verifiers
        .iter()
        .any(|v| !matches!(v, VerifierSpec::Assumptions { .. }));
    let ec = if needs_ensemble {
        Some(ensemble_config(args, &cfg, &model)?)
    } else {
        None
    };
    let exact = if cfg.verifiers.iter().any(|v| matches!(v, VerifierSpec::OracleAgreement)) {
        Some(solve_oracle(&cfg, &model)?)
    } else {
        None
    };

    let summary = match &ec {
        Some(ec) => Some(run_ensemble(&model, ec)?),
        None => None,
    };
    let mut reports: Vec<BoundReport> = Vec::new();
    for v in &cfg.verifiers {
        let s = summary.as_ref();
        match v {
            VerifierSpec::Assumptions { z_max, k_max } => {
                reports.extend(check_assumptions(&model, z_max.unwrap_or(model.z_max()), *k_max)?)
            }
            VerifierSpec::Extinction => reports.push(extinction_report(&model, s.expect("ensemble"))),
            VerifierSpec::OracleAgreement => reports.extend(check_against_oracle(
                s.expect("ensemble"),
                exact.as_ref().expect("oracle"),
            )),
            VerifierSpec::Doob { x_list } => reports.extend(check_doob_above(s.expect("ensemble"), x_list)),
            VerifierSpec::HitZero => reports.push(check_hit_zero(&model, s.expect("ensemble"))),
            VerifierSpec::Geometry { k_max } => match EpsilonK::from_law(&model) {
                Some(eps_k) => reports.extend(check_excursion_geometry(
                    &model,
                    s.expect("ensemble"),
                    &eps_k,
                    *k_max,
                )),
                None => reports.push(
                    BoundReport::judge("above_excursions_tail", Relation::AtMost, f64::NAN, f64::NAN, 0.0, 0)
                        .unasserted("law declares no death-risk floor"),
                ),
            },
            VerifierSpec::ReturnTime { delta, c_max } => {
                reports.extend(check_return_time(&model, s.expect("ensemble"), *delta, *c_max))
            }
        }
    }
    let exit = if any_violated(&reports) { EXIT_VIOLATED } else { EXIT_OK };
    let mut artifacts = vec![
        Artifact { file: "reports.csv", body: to_csv_string(&reports) },
        Artifact { file: "reports.json", body: json(&reports) },
    ];
    if let Some(s) = &summary {
        artifacts.push(Artifact { file: "summary.json", body: json(s) });
    }
    let primary = match args.emit {
        Some(Emit::Summary) if summary.is_some() => 2,
        _ => 0,
    };
    Ok(Outcome { artifacts, primary, exit })
}

fn oracle_csv(sol: &ExactSolution) -> String {
    let mut out = String::from("z,extinction_probability,expected_time,cap_hit_probability\r\n");
    for z in 0..=sol.state_cap as usize {
        out.push_str(&format!(
            "{z},{},{},{}\r\n",
            sol.extinction_probability[z], sol.expected_absorption_time[z], sol.cap_hit_probability[z]
        ));
    }
    out
}

#[derive(Serialize)]
struct OracleJson<'a> {
    state_cap: u64,
    extinction_probability: &'a [f64],
    expected_absorption_time: &'a [f64],
    cap_hit_probability: &'a [f64],
}

fn oracle_cmd(args: &CommonArgs) -> Result<Outcome, Failure> {
    let (cfg, model) = load(args)?;
    let sol = solve_oracle(&cfg, &model)?;
    let as_json = OracleJson {
        state_cap: sol.state_cap,
        extinction_probability: &sol.extinction_probability,
        expected_absorption_time: &sol.expected_absorption_time,
        cap_hit_probability: &sol.cap_hit_probability,
    };
    Ok(Outcome {
        artifacts: vec![
            Artifact { file: "oracle.csv", body: oracle_csv(&sol) },
            Artifact { file: "oracle.json", body: json(&as_json) },
        ],
        primary: usize::from(args.emit == Some(Emit::Summary)),
        exit: EXIT_OK,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\r', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn scan_csv(table: &ScalingTable) -> String {
    let mut out = String::from("K,z0,reps,n_extinct,censored,mean_time,stderr,oracle_mean,note\r\n");
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\r\n",
            r.capacity,
            r.z0,
            r.reps,
            r.n_extinct,
            r.censored,
            r.mean_time,
            r.stderr,
            r.oracle_mean.map(|v| v.to_string()).unwrap_or_default(),
            csv_field(&r.note)
        ));
    }
    out
}

fn scan_cmd(args: &CommonArgs) -> Result<Outcome, Failure> {
    let (cfg, model) = load(args)?;
    let scan = cfg
        .scan
        .as_ref()
        .ok_or_else(|| Failure("config: missing field `scan`".into()))?;
    if scan.k_list.is_empty() || scan.k_list.contains(&0) {
        return Err(Failure("config: scan.K_list must be non-empty and positive".into()));
    }
    let e = cfg
        .ensemble
        .as_ref()
        .ok_or_else(|| Failure("config: missing field `ensemble`".into()))?;
    let settings = ScanSettings {
        reps: e.reps,
        budget: e.step_budget,
        seed: args.seed.unwrap_or(e.master_seed),
        parallelism: parallelism(args, &cfg)?,
        oracle_margin: scan.oracle_margin,
        tail_tolerance: scan.tail_tolerance,
    };
    let table = scan_capacity(model.spec(), &scan.k_list, &settings)?;
    let reports = table.oracle_reports();
    let exit = if any_violated(&reports) { EXIT_VIOLATED } else { EXIT_OK };
    Ok(Outcome {
        artifacts: vec![
            Artifact { file: "scaling.csv", body: scan_csv(&table) },
            Artifact { file: "scaling.json", body: json(&table) },
            Artifact { file: "reports.csv", body: to_csv_string(&reports) },
        ],
        primary: match args.emit {
            Some(Emit::Summary) => 1,
            Some(Emit::Reports) => 2,
            _ => 0,
        },
        exit,
    })
}

fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure(format!("{}: {e}", dir.display())))?;
    for a in artifacts {
        let path = dir.join(a.file);
        fs::write(&path, &a.body).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// Parse `argv`, run the subcommand and return the process exit status.
/// Nothing is written until the whole run has succeeded.
pub fn run_cli<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let (args, result) = match &cli.command {
        Command::Simulate(a) => (a, simulate_cmd(a)),
        Command::Verify(a) => (a, verify_cmd(a)),
        Command::Oracle(a) => (a, oracle_cmd(a)),
        Command::Scan(a) => (a, scan_cmd(a)),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(Failure(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    match &args.out {
        Some(dir) => {
            if let Err(Failure(msg)) = write_artifacts(dir, &outcome.artifacts) {
                let _ = writeln!(stderr, "error: {msg}");
                return EXIT_USAGE;
            }
        }
        None => {
            let _ = stdout.write_all(outcome.artifacts[outcome.primary].body.as_bytes());
        }
    }
    outcome.exit
}
