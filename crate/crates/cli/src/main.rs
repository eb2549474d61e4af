//! `lab`: command-line driver for the rotation laboratory.
//!
//! The primary entry point is `lab run <manifest>`, where the manifest is
//! either a JSON file or the name of a built-in scenario (`lab list`).
//! Artifacts land in `--out` (CSV tables plus `summary.json`); a one-page
//! summary goes to stdout and timing to stderr, so captured stdout and the
//! artifact bytes are identical across repeated runs.
//!
//! Exit codes: 0 all checks passed; 1 a check failed or a computation hit
//! a mathematical guard; 2 invalid manifest or arguments; 3 precision
//! exhausted.

mod manifest;
mod output;
mod runner;
mod scenarios;

use clap::{Parser, Subcommand};
use manifest::{ExperimentManifest, ScenarioKind};
use rotation_lab::{AlphaSpec, Error, JumpFunction, JumpPolicy, Result, TorusPoint};
use runner::RunSummary;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "lab",
    version,
    about = "Birkhoff sums over irrational rotations: certified experiments \
             on temporal limit laws"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a manifest: a JSON file path or a built-in name.
    Run {
        /// Manifest file, or one of the names from `lab list`.
        manifest: String,
        /// Directory the artifacts are written into.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads for parallel sections (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Working precision override in bits (beats manifest and
        /// LAB_DEFAULT_BITS).
        #[arg(long)]
        bits: Option<u32>,
    },
    /// List the built-in scenarios.
    List,
    /// Print a built-in manifest as JSON (a template for custom runs).
    Show {
        /// Built-in name from `lab list`.
        name: String,
    },
    /// Shortcut: convergent table for a named rotation.
    Cf {
        /// "golden", "sqrt2", inline AlphaSpec JSON, or a JSON file.
        alpha: String,
        /// Deepest convergent index k.
        #[arg(short, long, default_value_t = 30)]
        k: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Shortcut: variation-bound check |S_{q_n}| <= Var(f) for n <= N.
    Dk {
        /// "golden", "sqrt2", inline AlphaSpec JSON, or a JSON file.
        alpha: String,
        /// "sawtooth", "square-minus-third", "indicator:<p/q>", JSON, or file.
        #[arg(long, default_value = "sawtooth")]
        function: String,
        /// Orbit start, an exact rational.
        #[arg(long, default_value = "1/7")]
        x0: String,
        /// Largest convergent index checked.
        #[arg(short, long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Shortcut: two-scale standardized comparison of g(U_c) laws.
    Refute {
        /// "golden", "sqrt2", inline AlphaSpec JSON, or a JSON file.
        alpha: String,
        /// "sawtooth", "square-minus-third", "indicator:<p/q>", JSON, or file.
        #[arg(long, default_value = "sawtooth")]
        function: String,
        /// Orbit start, an exact rational.
        #[arg(long, default_value = "0")]
        x0: String,
        /// Subsequence convergent index (even).
        #[arg(long, default_value_t = 10)]
        index: usize,
        /// Explicit scale pair; both or neither.
        #[arg(long)]
        c1: Option<f64>,
        #[arg(long)]
        c2: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Run { manifest, out, workers, bits } => {
            init_workers(workers);
            let mut man = load_manifest(&manifest)?;
            apply_bits(&mut man, bits);
            execute(&man, &out)
        }
        Cmd::List => {
            let mut out = String::new();
            for b in scenarios::BUILTINS {
                out.push_str(&format!("{:<28} {}\n", b.name, b.about));
            }
            say(out);
            Ok(0)
        }
        Cmd::Show { name } => {
            let man = scenarios::builtin(&name)
                .ok_or_else(|| Error::InvalidInput(format!("no built-in named {name}")))?;
            say(format!("{}\n", serde_json::to_string_pretty(&man).unwrap()));
            Ok(0)
        }
        Cmd::Cf { alpha, k, out } => {
            let mut man = ExperimentManifest::new(ScenarioKind::CfTable);
            man.alpha = Some(parse_alpha(&alpha)?);
            man.k_depth = Some(k);
            apply_bits(&mut man, None);
            execute(&man, &out)
        }
        Cmd::Dk { alpha, function, x0, n, out } => {
            let mut man = ExperimentManifest::new(ScenarioKind::DkCheck);
            man.alpha = Some(parse_alpha(&alpha)?);
            man.function = Some(parse_function(&function)?);
            man.x0 = Some(parse_x0(&x0)?);
            man.indices = (1..=n).collect();
            man.policy = Some(JumpPolicy::RightLimit);
            apply_bits(&mut man, None);
            execute(&man, &out)
        }
        Cmd::Refute { alpha, function, x0, index, c1, c2, out } => {
            let mut man = ExperimentManifest::new(ScenarioKind::RefuteTdlt);
            man.alpha = Some(parse_alpha(&alpha)?);
            man.function = Some(parse_function(&function)?);
            man.x0 = Some(parse_x0(&x0)?);
            man.indices = vec![index];
            man.c1 = c1;
            man.c2 = c2;
            man.policy = Some(JumpPolicy::RightLimit);
            apply_bits(&mut man, None);
            execute(&man, &out)
        }
    }
}

/// Run one manifest and print the one-page summary; timing goes to stderr
/// so stdout stays byte-stable across runs.
fn execute(man: &ExperimentManifest, out: &PathBuf) -> Result<u8> {
    let t0 = Instant::now();
    let summary = runner::run(man, out)?;
    eprintln!("elapsed: {:.3}s", t0.elapsed().as_secs_f64());
    print_summary(&summary);
    Ok(if summary.all_pass() { 0 } else { 1 })
}

/// Write to stdout, ignoring broken pipes (e.g. `lab … | head`).
fn say(text: String) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn print_summary(s: &RunSummary) {
    let mut out = format!("scenario: {}\n", s.scenario);
    for line in &s.headline {
        out.push_str(&format!("  {line}\n"));
    }
    for c in &s.checks {
        out.push_str(&format!(
            "check {}: {} ({})\n",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.detail
        ));
    }
    for f in &s.files {
        out.push_str(&format!("wrote {}\n", f.display()));
    }
    say(out);
}

/// Configure the global worker pool before any parallel section runs.
fn init_workers(workers: Option<usize>) {
    if let Some(w) = workers {
        // results are merge-order deterministic, so thread count only
        // affects speed; a failure here (pool already built) is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global();
    }
}

/// Precedence: --bits flag, then the manifest, then LAB_DEFAULT_BITS.
fn apply_bits(man: &mut ExperimentManifest, flag: Option<u32>) {
    if let Some(b) = flag {
        man.bits = Some(b);
    } else if man.bits.is_none() {
        if let Some(b) =
            std::env::var("LAB_DEFAULT_BITS").ok().and_then(|s| s.parse::<u32>().ok())
        {
            man.bits = Some(b);
        }
    }
}

/// A built-in name, or a JSON manifest file.
fn load_manifest(arg: &str) -> Result<ExperimentManifest> {
    if let Some(man) = scenarios::builtin(arg) {
        return Ok(man);
    }
    let text = std::fs::read_to_string(arg).map_err(|e| {
        Error::InvalidInput(format!("{arg}: not a built-in name and not a readable file ({e})"))
    })?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("{arg}: manifest does not parse: {e}")))
}

/// "golden" | "sqrt2" | inline JSON | JSON file path.
fn parse_alpha(arg: &str) -> Result<AlphaSpec> {
    match arg {
        "golden" => return Ok(AlphaSpec::golden()),
        "sqrt2" => return Ok(AlphaSpec::sqrt2_minus_1()),
        _ => {}
    }
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| Error::InvalidInput(format!("alpha {arg}: {e}")))?
    };
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("alpha {arg}: does not parse: {e}")))
}

/// Named function shortcuts, inline JSON, or a JSON file path.
fn parse_function(arg: &str) -> Result<JumpFunction> {
    match arg {
        "sawtooth" => return Ok(JumpFunction::sawtooth()),
        "square-minus-third" => return Ok(JumpFunction::square_minus_third()),
        _ => {}
    }
    if let Some(gamma) = arg.strip_prefix("indicator:") {
        return Ok(JumpFunction::indicator(parse_x0(gamma)?));
    }
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| Error::InvalidInput(format!("function {arg}: {e}")))?
    };
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("function {arg}: does not parse: {e}")))
}

fn parse_x0(arg: &str) -> Result<TorusPoint> {
    TorusPoint::from_str(arg)
}
