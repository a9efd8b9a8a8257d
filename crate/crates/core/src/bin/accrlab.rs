use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use accrlab::report::render_text;
use accrlab::runner::{
    self, load_scenario, negative_control_ok, run_scenario, verify_suite, RunOptions,
};
use accrlab::scenario::TolOverrides;

#[derive(Parser)]
#[command(
    name = "accrlab",
    version,
    about = "Checks identities of almost contact B-metric manifolds numerically"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Seed of the point sampler and of seeded builtins.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sampled points.
    #[arg(long)]
    points: Option<usize>,
    /// Also write the JSON report to this path; `-` prints it instead of text.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Tolerance override, `check=value`; repeatable.
    #[arg(long = "tol", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    /// Apply the inverse transformation.
    #[arg(long)]
    inverse: bool,
    /// Perturb φ to check that the structure checks catch it.
    #[arg(long)]
    negative_control: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario: a JSON file or `builtin:<name>`.
    Run {
        scenario: String,
        /// Half-dimension n for builtins that take it.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the builtin verification set.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// List builtin scenarios.
    List,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = v.parse().map_err(|e| format!("tolerance `{v}`: {e}"))?;
    if !(v >= 0.0) || !v.is_finite() {
        return Err(format!(
            "tolerance must be finite and non-negative, got {v}"
        ));
    }
    Ok((k.to_string(), v))
}

fn options(c: &Common) -> RunOptions {
    RunOptions {
        seed: c.seed,
        points: c.points,
        tol: c.tol.iter().cloned().collect::<TolOverrides>(),
        inverse: c.inverse,
        negative_control: c.negative_control,
    }
}

fn emit(json: String, path: Option<&Path>) -> Result<(), String> {
    match path {
        Some(p) if p == Path::new("-") => println!("{json}"),
        Some(p) => {
            std::fs::write(p, format!("{json}\n")).map_err(|e| format!("{}: {e}", p.display()))?;
            print!("{}", render_text(&json));
        }
        None => print!("{}", render_text(&json)),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::List => {
            for b in accrlab::scenario::BUILTINS {
                println!("builtin:{b}");
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            scenario,
            n,
            common,
        } => {
            let opts = options(&common);
            let seed = common.seed.unwrap_or(runner::DEFAULT_SEED);
            let report =
                match load_scenario(&scenario, n, seed).and_then(|s| run_scenario(s, &opts)) {
                    Ok(r) => r,
                    Err(e) => {
                        eprintln!("accrlab: {e}");
                        return ExitCode::from(2);
                    }
                };
            if let Err(e) = emit(report.to_json(), common.json.as_deref()) {
                eprintln!("accrlab: {e}");
                return ExitCode::from(2);
            }
            let ok = if opts.negative_control {
                report.negative_control_mismatches().is_empty()
            } else {
                report.passed()
            };
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Verify { common } => {
            let opts = options(&common);
            let suite = verify_suite(&opts);
            if let Err(e) = emit(suite.to_json(), common.json.as_deref()) {
                eprintln!("accrlab: {e}");
                return ExitCode::from(2);
            }
            let ok = if opts.negative_control {
                negative_control_ok(&suite)
            } else {
                suite.passed()
            };
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
