//! Command-line front end. [`run`] takes the argument vector and returns the
//! rendered output plus an exit code, so every subcommand can be driven from
//! tests without spawning a process.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 domain error, 3
//! verification mismatch.

use std::fmt;
use std::io::IsTerminal;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::ensemble::{ensemble_stats, uniform_grid, EnsembleStats};
use crate::export;
use crate::langevin::{
    euler_maruyama_replicate, langevin_ensemble, DiffusionPolicy, LangevinError, SdeModel,
};
use crate::lattice::TruncatedLattice;
use crate::liouville::{build_liouville, verify_equivalence, LiouvilleError};
use crate::master_equation::{
    build_generator, evolve, max_stable_dt, ssa_ensemble, ssa_sample, GeneratorMatrix, MasterError,
    ProbabilityDistribution,
};
use crate::scheme::{parse_scheme, InteractionScheme};
use crate::stochastization::{
    drift_diffusion, exact_propensities, jump_moment, polynomial_propensities, Convention,
    JumpMoment, StateVector,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Noise {
    On,
    Off,
}

#[derive(Debug, Parser)]
#[command(
    name = "onestep",
    version,
    about = "Stochastization of one-step processes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format (csv only for trajectories and distributions).
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Write to a file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Diffusion sign convention: paper | km.
    #[arg(long, global = true, default_value = "paper", value_parser = Convention::from_str)]
    pub convention: Convention,
    /// Worker threads for ensembles (default: all cores). Never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Species, I, F, r and rates of a scheme.
    Parse { scheme: PathBuf },
    /// Propensities, jump moments and drift/diffusion at one state.
    Derive {
        scheme: PathBuf,
        /// Comma-separated counts, e.g. `5` or `3,7`.
        #[arg(long)]
        at: StateVector,
    },
    /// Evolve the truncated master equation from a point mass.
    Cme {
        scheme: PathBuf,
        /// Per-species caps; a single value applies to every species.
        #[arg(long, value_delimiter = ',', default_value = "128")]
        cap: Vec<u64>,
        #[arg(long)]
        x0: StateVector,
        #[arg(long)]
        t_end: f64,
        /// RK4 step; defaults to the largest step the stability guard admits.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Exact (Gillespie) trajectories.
    Ssa {
        scheme: PathBuf,
        #[arg(long)]
        x0: StateVector,
        #[arg(long)]
        t_end: f64,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
        /// Grid intervals for ensemble statistics.
        #[arg(long, default_value_t = 100)]
        grid: usize,
    },
    /// Euler–Maruyama integration of the Langevin equation.
    Langevin {
        scheme: PathBuf,
        #[arg(long, value_delimiter = ',')]
        x0: Vec<f64>,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
        #[arg(long, default_value = "strict", value_parser = DiffusionPolicy::from_str)]
        policy: DiffusionPolicy,
        #[arg(long, value_enum, default_value = "on")]
        noise: Noise,
        /// Record every k-th step.
        #[arg(long, default_value_t = 1)]
        record_every: usize,
    },
    /// Normal-ordered Liouville operator.
    Liouville { scheme: PathBuf },
    /// Exact operator-vs-combinatorial generator comparison.
    Verify {
        scheme: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "64")]
        cap: Vec<u64>,
    },
}

/// Rendered result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    fn domain(message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_DOMAIN,
            message: message.to_string(),
        }
    }
}

impl From<MasterError> for Failure {
    fn from(e: MasterError) -> Self {
        Self::domain(e)
    }
}

impl From<LangevinError> for Failure {
    fn from(e: LangevinError) -> Self {
        match e {
            LangevinError::Stochastic(_) | LangevinError::InvalidStep(_) => Self::usage(e),
            _ => Self::domain(e),
        }
    }
}

impl From<LiouvilleError> for Failure {
    fn from(e: LiouvilleError) -> Self {
        Self::domain(e)
    }
}

struct Loaded {
    scheme: InteractionScheme,
    hash: String,
}

fn load(path: &PathBuf) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let scheme =
        parse_scheme(&text).map_err(|e| Failure::usage(format!("{}:{e}", path.display())))?;
    let hash = format!("{:x}", Sha256::digest(text.as_bytes()));
    Ok(Loaded { scheme, hash })
}

fn meta(command: &str, cli: &Cli, config: Value, hash: &str) -> Value {
    json!({
        "tool": "onestep",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": cli.seed,
        "convention": cli.convention.to_string(),
        "format": match cli.format { Format::Json => "json", Format::Csv => "csv" },
        "config": config,
        "scheme_sha256": hash,
    })
}

fn json_doc(meta: Value, body: Value) -> String {
    let mut doc = json!({ "meta": meta });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

fn csv_doc(meta: Value, body: String) -> String {
    format!(
        "# {}\n{body}",
        serde_json::to_string(&json!({ "meta": meta })).expect("serializable")
    )
}

fn json_only(cli: &Cli, command: &str) -> Result<(), Failure> {
    if cli.format == Format::Csv {
        return Err(Failure::usage(format!(
            "`{command}` produces JSON only; csv is for trajectories and distributions"
        )));
    }
    Ok(())
}

fn lattice_for(scheme: &InteractionScheme, caps: &[u64]) -> Result<TruncatedLattice, Failure> {
    let caps = match caps {
        [c] => vec![*c; scheme.order()],
        many if many.len() == scheme.order() => many.to_vec(),
        _ => {
            return Err(Failure::usage(format!(
                "--cap needs 1 or {} values",
                scheme.order()
            )))
        }
    };
    TruncatedLattice::new(caps).map_err(Failure::usage)
}

fn moment_json(m: &JumpMoment) -> Value {
    match m {
        JumpMoment::First(v) => json!(v),
        JumpMoment::Second(b) => json!(matrix_rows(b)),
        JumpMoment::Diagonal { values, .. } => json!(values),
    }
}

fn matrix_rows(b: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..b.nrows())
        .map(|i| (0..b.ncols()).map(|j| b[(i, j)]).collect())
        .collect()
}

fn stats_json(stats: &EnsembleStats) -> Value {
    serde_json::to_value(stats).expect("serializable")
}

fn execute(cli: &Cli) -> Result<(String, i32), Failure> {
    match &cli.command {
        Command::Parse { scheme } => {
            json_only(cli, "parse")?;
            let l = load(scheme)?;
            let config = json!({ "scheme": scheme });
            let body = json!({ "scheme": l.scheme.summary() });
            Ok((json_doc(meta("parse", cli, config, &l.hash), body), EXIT_OK))
        }
        Command::Derive { scheme, at } => {
            json_only(cli, "derive")?;
            let l = load(scheme)?;
            let s = &l.scheme;
            let exact = exact_propensities(s, at).map_err(Failure::usage)?;
            let poly = polynomial_propensities(s, at).map_err(Failure::usage)?;
            let x = at.to_real();
            let m1 = jump_moment(s, &x, 1).map_err(Failure::usage)?;
            let m2 = jump_moment(s, &x, 2).map_err(Failure::usage)?;
            let dd = drift_diffusion(s, &x, cli.convention).map_err(Failure::usage)?;
            let config = json!({ "scheme": scheme, "at": at.counts() });
            let body = json!({
                "species": s.species().names(),
                "state": at.counts(),
                "exact_propensities": exact,
                "polynomial_propensities": poly,
                "jump_moments": { "1": moment_json(&m1), "2": moment_json(&m2) },
                "drift": dd.drift,
                "diffusion": matrix_rows(&dd.diffusion),
            });
            Ok((
                json_doc(meta("derive", cli, config, &l.hash), body),
                EXIT_OK,
            ))
        }
        Command::Cme {
            scheme,
            cap,
            x0,
            t_end,
            dt,
        } => {
            let l = load(scheme)?;
            let lattice = lattice_for(&l.scheme, cap)?;
            let g: GeneratorMatrix<f64> = build_generator(&l.scheme, &lattice)?;
            let p0 = ProbabilityDistribution::point_mass(&lattice, x0.counts())?;
            let dt = match dt {
                Some(dt) => *dt,
                None => {
                    let limit = max_stable_dt(&g);
                    if limit.is_finite() {
                        limit
                    } else {
                        t_end.max(1.0)
                    }
                }
            };
            let e = evolve(&p0, &g, *t_end, dt)?;
            let config = json!({
                "scheme": scheme, "cap": lattice.caps(), "x0": x0.counts(),
                "t_end": t_end, "dt": dt,
            });
            let m = meta("cme", cli, config, &l.hash);
            let names = l.scheme.species().names();
            let out = match cli.format {
                Format::Csv => csv_doc(
                    m,
                    export::distribution_csv(names, &lattice, &e.distribution),
                ),
                Format::Json => {
                    let dist: Vec<Value> = e
                        .distribution
                        .p
                        .iter()
                        .enumerate()
                        .map(|(i, p)| json!({ "state_index": i, "state": lattice.state(i).counts(), "p": p }))
                        .collect();
                    json_doc(
                        m,
                        json!({
                            "t": e.distribution.t,
                            "steps": e.steps,
                            "leakage": e.leakage,
                            "min_entry": e.min_entry,
                            "mean": e.distribution.mean(&lattice),
                            "variance": e.distribution.variance(&lattice),
                            "distribution": dist,
                        }),
                    )
                }
            };
            Ok((out, EXIT_OK))
        }
        Command::Ssa {
            scheme,
            x0,
            t_end,
            replicas,
            grid,
        } => {
            let l = load(scheme)?;
            let names = l.scheme.species().names();
            let config = json!({
                "scheme": scheme, "x0": x0.counts(), "t_end": t_end,
                "replicas": replicas, "grid": grid,
            });
            let m = meta("ssa", cli, config, &l.hash);
            if *replicas <= 1 {
                let traj = ssa_sample(&l.scheme, x0, *t_end, cli.seed)?;
                let out = match cli.format {
                    Format::Csv => csv_doc(m, export::trajectory_csv(names, &traj)),
                    Format::Json => {
                        let pts: Vec<Value> = traj
                            .points
                            .iter()
                            .map(|(t, s)| json!({ "t": t, "state": s.counts() }))
                            .collect();
                        json_doc(m, json!({ "trajectory": pts }))
                    }
                };
                return Ok((out, EXIT_OK));
            }
            let times = uniform_grid(*t_end, *grid);
            let runs = ssa_ensemble(&l.scheme, x0, &times, cli.seed, *replicas, cli.threads)?;
            let stats = ensemble_stats(&runs).map_err(Failure::usage)?;
            let out = match cli.format {
                Format::Csv => csv_doc(m, export::stats_csv(names, &stats)),
                Format::Json => json_doc(m, json!({ "stats": stats_json(&stats) })),
            };
            Ok((out, EXIT_OK))
        }
        Command::Langevin {
            scheme,
            x0,
            dt,
            steps,
            replicas,
            policy,
            noise,
            record_every,
        } => {
            let l = load(scheme)?;
            let names = l.scheme.species().names();
            let mut model = SdeModel::new(&l.scheme, cli.convention).with_policy(*policy);
            if *noise == Noise::Off {
                model = model.without_noise();
            }
            let config = json!({
                "scheme": scheme, "x0": x0, "dt": dt, "steps": steps, "replicas": replicas,
                "policy": policy.to_string(),
                "noise": matches!(noise, Noise::On),
                "record_every": record_every,
            });
            let m = meta("langevin", cli, config, &l.hash);
            if *replicas <= 1 {
                let path =
                    euler_maruyama_replicate(&model, x0, *dt, *steps, cli.seed, 0, *record_every)?;
                let out = match cli.format {
                    Format::Csv => csv_doc(m, export::series_csv(names, &path.series)),
                    Format::Json => {
                        json_doc(m, json!({ "series": path.series, "events": path.events }))
                    }
                };
                return Ok((out, EXIT_OK));
            }
            let runs = langevin_ensemble(
                &model,
                x0,
                *dt,
                *steps,
                cli.seed,
                *replicas,
                cli.threads,
                *record_every,
            )?;
            let events: usize = runs.iter().map(|r| r.events.len()).sum();
            let series: Vec<_> = runs.into_iter().map(|r| r.series).collect();
            let stats = ensemble_stats(&series).map_err(Failure::usage)?;
            let out = match cli.format {
                Format::Csv => csv_doc(m, export::stats_csv(names, &stats)),
                Format::Json => {
                    json_doc(m, json!({ "stats": stats_json(&stats), "events": events }))
                }
            };
            Ok((out, EXIT_OK))
        }
        Command::Liouville { scheme } => {
            json_only(cli, "liouville")?;
            let l = load(scheme)?;
            let op = build_liouville(&l.scheme);
            let body = json!({
                "species": op.species(),
                "pretty": op.pretty(),
                "symbolic": op.pretty_symbolic(),
                "terms": op.term_map(),
            });
            let config = json!({ "scheme": scheme });
            Ok((
                json_doc(meta("liouville", cli, config, &l.hash), body),
                EXIT_OK,
            ))
        }
        Command::Verify { scheme, cap } => {
            json_only(cli, "verify")?;
            let l = load(scheme)?;
            let lattice = lattice_for(&l.scheme, cap)?;
            let report = verify_equivalence(&l.scheme, &lattice)?;
            let code = if report.equal { EXIT_OK } else { EXIT_MISMATCH };
            let config = json!({ "scheme": scheme, "cap": lattice.caps() });
            let body = json!({ "report": report });
            Ok((json_doc(meta("verify", cli, config, &l.hash), body), code))
        }
    }
}

fn color_enabled() -> bool {
    match std::env::var("ONESTEP_COLOR").as_deref() {
        Ok("0") => false,
        Ok("1") => true,
        _ => std::io::stderr().is_terminal(),
    }
}

fn error_line(message: &str) -> String {
    if color_enabled() {
        format!("\x1b[1;31merror:\x1b[0m {message}\n")
    } else {
        format!("error: {message}\n")
    }
}

/// Runs one invocation; `args[0]` is the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome {
                        code: EXIT_OK,
                        stdout: rendered,
                        stderr: String::new(),
                    }
                }
                _ => Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: rendered,
                },
            };
        }
    };
    match execute(&cli) {
        Ok((text, code)) => match &cli.output {
            Some(path) => match std::fs::write(path, &text) {
                Ok(()) => Outcome {
                    code,
                    stdout: String::new(),
                    stderr: String::new(),
                },
                Err(e) => Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: error_line(&format!("{}: {e}", path.display())),
                },
            },
            None => Outcome {
                code,
                stdout: text,
                stderr: String::new(),
            },
        },
        Err(f) => Outcome {
            code: f.code,
            stdout: String::new(),
            stderr: error_line(&f.message),
        },
    }
}
