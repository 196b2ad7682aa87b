//! `pslab`: command-line front end of the prime statistics laboratory.

mod commands;
mod emit;
mod manifest;

use std::collections::hash_map::RandomState;
use std::collections::BTreeMap;
use std::hash::{BuildHasher, Hasher};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use pslab::sieve::SieveConfig;
use pslab::{Error, Result};

use commands::*;
use emit::{emit, Format, Report};
use manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(name = "pslab", version, about = "Prime statistics in short intervals, Erdős–Rankin constructions and interval walks")]
struct Cli {
    /// Worker threads; defaults to the hardware count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for cached sieve segments.
    #[arg(long, global = true, env = "PSLAB_CACHE_DIR")]
    cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count or list the primes in [lo, hi).
    Sieve(SieveArgs),
    /// Histogram of prime counts in the windows (n, n + λ log n], n ≤ x.
    Stats(StatsArgs),
    /// Histogram of normalized prime gaps up to x.
    Gaps(GapsArgs),
    /// Window histogram of the Cramér random model.
    Cramer(CramerArgs),
    /// Test a system of linear forms for admissibility.
    Admissible(AdmissibleArgs),
    /// Build an Erdős–Rankin residue system and its linear forms.
    Construct(ConstructArgs),
    /// Check the divisor certificates of a construction on sample n.
    Verify(VerifyArgs),
    /// Walk the windows after g·n + h to one holding exactly m primes.
    Walk(WalkArgs),
    /// Count n ≤ x with at least m of the forms prime.
    Rich(RichArgs),
    /// Equidistribution discrepancy of the primes of a form.
    Discrepancy(DiscrepancyArgs),
    /// Size quantities of a construction at scale x.
    Report(ReportArgs),
    /// Re-run the invocation recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Args, Debug)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Write the data here instead of the recorded location.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sieve(_) => "sieve",
            Command::Stats(_) => "stats",
            Command::Gaps(_) => "gaps",
            Command::Cramer(_) => "cramer",
            Command::Admissible(_) => "admissible",
            Command::Construct(_) => "construct",
            Command::Verify(_) => "verify",
            Command::Walk(_) => "walk",
            Command::Rich(_) => "rich",
            Command::Discrepancy(_) => "discrepancy",
            Command::Report(_) => "report",
            Command::Replay(_) => "replay",
        }
    }

    fn output(&self) -> Option<&OutputArgs> {
        Some(match self {
            Command::Sieve(a) => &a.output,
            Command::Stats(a) => &a.output,
            Command::Gaps(a) => &a.output,
            Command::Cramer(a) => &a.output,
            Command::Admissible(a) => &a.output,
            Command::Construct(a) => &a.output,
            Command::Verify(a) => &a.output,
            Command::Walk(a) => &a.output,
            Command::Rich(a) => &a.output,
            Command::Discrepancy(a) => &a.output,
            Command::Report(a) => &a.output,
            Command::Replay(_) => return None,
        })
    }

    fn parameters(&self) -> Value {
        let v = match self {
            Command::Sieve(a) => serde_json::to_value(a),
            Command::Stats(a) => serde_json::to_value(a),
            Command::Gaps(a) => serde_json::to_value(a),
            Command::Cramer(a) => serde_json::to_value(a),
            Command::Admissible(a) => serde_json::to_value(a),
            Command::Construct(a) => serde_json::to_value(a),
            Command::Verify(a) => serde_json::to_value(a),
            Command::Walk(a) => serde_json::to_value(a),
            Command::Rich(a) => serde_json::to_value(a),
            Command::Discrepancy(a) => serde_json::to_value(a),
            Command::Report(a) => serde_json::to_value(a),
            Command::Replay(_) => Ok(Value::Null),
        };
        v.expect("arguments serialize")
    }

    /// The seed flag of a randomized command: `Some(flag value)`, or `None`
    /// for deterministic commands.
    fn seed_flag(&self) -> Option<Option<u64>> {
        match self {
            Command::Cramer(a) => Some(a.seed),
            Command::Construct(a) => Some(a.seed),
            Command::Verify(a) if a.n.is_none() => Some(a.seed),
            _ => None,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Argument(_) => 2,
        Error::ConstructionFailed { .. } | Error::Infeasible { .. } => 3,
        Error::Resource(_) | Error::Io(_) => 4,
        Error::NotFound(_) | Error::Internal(_) => 1,
    }
}

fn fresh_seed() -> u64 {
    // RandomState is keyed from the operating system's entropy source.
    let mut h = RandomState::new().build_hasher();
    h.write_u64(0);
    h.finish()
}

fn dispatch(cmd: &Command, config: &SieveConfig, cache_dir: Option<&std::path::Path>, seed: Option<u64>, fx: &mut Effects) -> Result<Report> {
    match cmd {
        Command::Sieve(a) => sieve(a, config, cache_dir, fx),
        Command::Stats(a) => stats(a, config),
        Command::Gaps(a) => gaps(a, config),
        Command::Cramer(a) => cramer(a, config, seed.expect("seeded")),
        Command::Admissible(a) => admissible(a),
        Command::Construct(a) => construct(a, seed.expect("seeded")),
        Command::Verify(a) => verify(a, seed.unwrap_or_default()),
        Command::Walk(a) => walk(a),
        Command::Rich(a) => rich(a),
        Command::Discrepancy(a) => discrepancy(a),
        Command::Report(a) => report(a),
        Command::Replay(_) => unreachable!("replay is resolved before dispatch"),
    }
}

/// Recorded arguments with the output location swapped for `out`.
fn retarget(argv: &[String], out: Option<&PathBuf>) -> Vec<String> {
    let Some(out) = out else { return argv.to_vec() };
    let mut kept = Vec::new();
    let mut skip = false;
    for a in argv {
        if skip {
            skip = false;
        } else if a == "--out" || a == "--manifest" {
            skip = true;
        } else if !(a.starts_with("--out=") || a.starts_with("--manifest=")) {
            kept.push(a.clone());
        }
    }
    kept.push("--out".into());
    kept.push(out.display().to_string());
    kept
}

fn execute(cli: Cli, argv: Vec<String>) -> Result<()> {
    let started = Instant::now();
    if let Command::Replay(r) = &cli.command {
        let m = RunManifest::read(&r.manifest)?;
        let argv = retarget(&m.argv, r.out.as_ref());
        let cli = Cli::try_parse_from(std::iter::once("pslab".to_string()).chain(argv.iter().cloned()))
            .map_err(|e| Error::Argument(format!("manifest arguments no longer parse: {e}")))?;
        if matches!(cli.command, Command::Replay(_)) {
            return Err(Error::Argument("a manifest cannot record a replay".into()));
        }
        return execute(cli, argv);
    }

    if let Some(n) = cli.threads {
        // A second global pool (replay inside one process) is harmless to skip.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut argv = argv;
    let seed = match cli.command.seed_flag() {
        Some(Some(s)) => Some(s),
        Some(None) => {
            let s = fresh_seed();
            eprintln!("seed: {s}");
            argv.push("--seed".into());
            argv.push(s.to_string());
            Some(s)
        }
        None => None,
    };
    let cmd = &cli.command;
    let output = cmd.output().expect("data command");
    let mut fx = Effects::default();
    let report = dispatch(cmd, &SieveConfig::default(), cli.cache_dir.as_deref(), seed, &mut fx)?;

    let default_format = if matches!(cmd, Command::Admissible(_)) { Format::Text } else { Format::Json };
    emit(&report, output.format.unwrap_or(default_format), output.out.as_deref())?;

    let manifest_path = output.manifest.clone().or_else(|| output.out.as_deref().map(RunManifest::path_for));
    if let Some(path) = manifest_path {
        let parameters: BTreeMap<String, Value> = match cmd.parameters() {
            Value::Object(map) => map.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        let mut outputs: Vec<PathBuf> = output.out.iter().cloned().collect();
        outputs.extend(fx.files);
        let m = RunManifest {
            command: cmd.name().into(),
            parameters,
            argv,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            wall_time_ms: started.elapsed().as_millis() as u64,
            outputs,
        };
        m.write(&path)?;
    }
    Ok(())
}

fn run(argv: Vec<String>) -> u8 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    match execute(cli, argv.into_iter().skip(1).collect()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("pslab: {e}");
            if let Error::ConstructionFailed { best: Some(best), .. } = &e {
                if let Ok(s) = serde_json::to_string(best) {
                    eprintln!("best partial assignment: {s}");
                }
            }
            exit_code(&e)
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args().collect()))
}
