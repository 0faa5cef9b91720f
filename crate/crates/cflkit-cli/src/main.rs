//! Command-line front end: recognize strings, run verification sweeps,
//! benchmark scaling, and generate datasets.
//!
//! Exit codes: 0 accept, 1 reject, 2 usage/grammar error, 3 ambiguity
//! violation, 4 verification disagreement.

use std::io::Read as _;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cflkit::path::PathError;
use cflkit::sampler::{self, LanguageSpec};
use cflkit::verify::{self, VerifyError};
use cflkit::{check_linear, parse_grammar, Engine};

#[derive(Parser)]
#[command(name = "cflkit", version, about = "Context-free-language recognition workbench")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Recognize one string (argument or stdin) and print a resource report.
    Recognize(RecognizeArgs),
    /// Compare an engine against the CYK oracle, exhaustively and on samples.
    Verify(VerifyArgs),
    /// Measure rounds/cells/time over a schedule of lengths.
    Bench(BenchArgs),
    /// Generate an oracle-verified labeled dataset.
    Sample(SampleArgs),
}

#[derive(Args)]
struct GrammarOpts {
    /// Built-in language name or grammar file path.
    #[arg(short, long)]
    grammar: String,
    /// Engine to run.
    #[arg(short, long, value_enum, default_value_t = EngineArg::General)]
    engine: EngineArg,
    /// Fail instead of auto-converting a non-CNF grammar.
    #[arg(long)]
    no_convert: bool,
}

#[derive(Args)]
struct RecognizeArgs {
    #[command(flatten)]
    g: GrammarOpts,
    /// Input string; read from stdin when omitted.
    string: Option<String>,
    /// Extra rounds past ceil(log2 n) for the general engine.
    #[arg(long, default_value_t = 4)]
    budget_c: usize,
    /// Emit the report as one JSON document.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    g: GrammarOpts,
    /// Check all strings over the alphabet up to this length.
    #[arg(long)]
    exhaustive: Option<usize>,
    /// Check this many sampled positives plus as many negatives.
    #[arg(long)]
    random: Option<usize>,
    /// Maximum sampled string length.
    #[arg(long, default_value_t = 16)]
    max_n: usize,
    #[arg(long, default_value_t = 4)]
    budget_c: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    g: GrammarOpts,
    /// Comma-separated length schedule.
    #[arg(long, default_value = "4,8,16,32")]
    lengths: String,
    /// Accepted samples per length (medians are reported).
    #[arg(long, default_value_t = 5)]
    samples: usize,
    #[arg(long, default_value_t = 4)]
    budget_c: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SampleArgs {
    /// Built-in language name.
    #[arg(short, long)]
    language: String,
    /// Number of records.
    #[arg(short, long, default_value_t = 100)]
    count: usize,
    /// Maximum string length.
    #[arg(long, default_value_t = 20)]
    max_n: usize,
    /// Fraction of positive records.
    #[arg(long, default_value_t = 0.5)]
    split: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    General,
    Unambiguous,
    Linear,
    Bfvp,
    Cyk,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::General => Engine::General,
            EngineArg::Unambiguous => Engine::Unambiguous,
            EngineArg::Linear => Engine::Linear,
            EngineArg::Bfvp => Engine::Bfvp,
            EngineArg::Cyk => Engine::Cyk,
        }
    }
}

const EXIT_REJECT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_AMBIGUOUS: u8 = 3;
const EXIT_DISAGREE: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Recognize(a) => cmd_recognize(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Sample(a) => cmd_sample(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

/// Resolve `-g`: a built-in name, or a grammar file (path separator or an
/// existing file disambiguates). File grammars get conservative properties.
fn resolve_grammar(opts: &GrammarOpts) -> Result<LanguageSpec, String> {
    let name = &opts.grammar;
    let looks_like_path = name.contains(std::path::MAIN_SEPARATOR)
        || name.contains('/')
        || std::path::Path::new(name).is_file();
    if !looks_like_path {
        if let Ok(spec) = sampler::builtin(name) {
            return Ok(spec);
        }
        return Err(format!(
            "unknown built-in {name:?} and no such file (built-ins: {})",
            sampler::BUILTIN_NAMES.join(", ")
        ));
    }
    let text = std::fs::read_to_string(name).map_err(|e| format!("reading {name}: {e}"))?;
    let cfg = parse_grammar(&text).map_err(|e| format!("parsing {name}: {e}"))?;
    let cnf = if cfg.is_cnf {
        cfg.clone()
    } else if opts.no_convert {
        return Err(format!("{name} is not in CNF and --no-convert is set"));
    } else {
        eprintln!("note: converting {name} to Chomsky normal form");
        cfg.to_cnf()
    };
    Ok(LanguageSpec {
        name: name.clone(),
        linear: check_linear(&cfg),
        cfg,
        cnf,
        unambiguous: false,
        deterministic: false,
        negative_cnf: None,
    })
}

fn engine_exit(e: &VerifyError) -> Option<u8> {
    if let VerifyError::Path(PathError::AmbiguityViolation) = e {
        eprintln!("error: {e}");
        Some(EXIT_AMBIGUOUS)
    } else {
        None
    }
}

fn cmd_recognize(a: RecognizeArgs) -> Result<u8, String> {
    let spec = resolve_grammar(&a.g)?;
    let text = match a.string {
        Some(s) => s,
        None => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf).map_err(|e| e.to_string())?;
            buf.trim_end_matches('\n').to_string()
        }
    };
    let report = match verify::run_engine(a.g.engine.into(), &spec, &text, a.budget_c) {
        Ok(r) => r,
        Err(e) => return Ok(engine_exit(&e).ok_or_else(|| e.to_string())?),
    };
    if a.json {
        println!("{}", serde_json::to_string(&report).unwrap());
    } else {
        println!(
            "{} {} (n = {}, {:.3} ms)",
            report.engine,
            if report.accepted { "accepts" } else { "rejects" },
            report.n,
            report.wall_time * 1e3
        );
        for (label, v) in [
            ("rounds", report.rounds_used),
            ("item cells", report.item_cells),
            ("slashed cells", report.slashed_cells),
            ("edge cells", report.edge_cells),
            ("pebble rounds", report.pebble_rounds),
            ("outer iterations", report.outer_iterations),
            ("undetermined cells", report.undetermined_cells),
        ] {
            if let Some(v) = v {
                println!("  {label}: {v}");
            }
        }
        if let Some(p) = report.decomposition_pairs {
            println!("  decomposition pairs: {p}");
        }
    }
    Ok(if report.accepted { 0 } else { EXIT_REJECT })
}

fn cmd_verify(a: VerifyArgs) -> Result<u8, String> {
    let spec = resolve_grammar(&a.g)?;
    let engine: Engine = a.g.engine.into();
    let mut checked = 0usize;
    let mut max_rounds = 0usize;
    let mut max_cells = 0usize;
    let mut disagreements = Vec::new();
    let mut run = |summary: Result<verify::VerifySummary, VerifyError>| -> Result<u8, String> {
        match summary {
            Ok(s) => {
                checked += s.checked;
                max_rounds = max_rounds.max(s.max_rounds);
                max_cells = max_cells.max(s.max_cells);
                disagreements.extend(s.disagreements);
                Ok(0)
            }
            Err(e) => Ok(engine_exit(&e).ok_or_else(|| e.to_string())?),
        }
    };
    if let Some(max_len) = a.exhaustive {
        let code = run(verify::exhaustive_sweep(engine, &spec, max_len, a.budget_c))?;
        if code != 0 {
            return Ok(code);
        }
    }
    if let Some(count) = a.random {
        let code =
            run(verify::sampled_sweep(engine, &spec, count, a.max_n, a.budget_c, a.seed))?;
        if code != 0 {
            return Ok(code);
        }
    }
    if a.json {
        let doc = serde_json::json!({
            "engine": engine.to_string(),
            "checked": checked,
            "disagreements": disagreements.len(),
            "max_rounds": max_rounds,
            "max_cells": max_cells,
        });
        println!("{doc}");
    } else {
        println!(
            "{engine}: {checked} strings checked, {} disagreements, max rounds {max_rounds}, max cells {max_cells}",
            disagreements.len()
        );
    }
    if let Some(d) = disagreements.first() {
        eprintln!(
            "counterexample: {:?} engine={} oracle={}",
            d.text, d.engine_accepted, d.oracle_accepted
        );
        return Ok(EXIT_DISAGREE);
    }
    Ok(0)
}

fn cmd_bench(a: BenchArgs) -> Result<u8, String> {
    let spec = resolve_grammar(&a.g)?;
    let engine: Engine = a.g.engine.into();
    let lengths: Vec<usize> = a
        .lengths
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| format!("bad length {s:?}")))
        .collect::<Result<_, _>>()?;
    let max_n = lengths.iter().copied().max().unwrap_or(4);
    let table = sampler::build_length_table(&spec.cnf, max_n).map_err(|e| e.to_string())?;
    let feasible = table.feasible_lengths();
    let mut rows = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    for &len in &lengths {
        // Accepted samples only: use the nearest feasible length ≤ len.
        let Some(&n) = feasible.iter().rev().find(|&&l| l <= len) else {
            eprintln!("note: no member of length ≤ {len}, skipping");
            continue;
        };
        let (mut rounds, mut cells, mut times) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..a.samples.max(1) {
            let text = sampler::sample_positive_from(&spec, &table, n, &mut rng)
                .map_err(|e| e.to_string())?;
            let t0 = Instant::now();
            let r = match verify::run_engine(engine, &spec, &text, a.budget_c) {
                Ok(r) => r,
                Err(e) => return Ok(engine_exit(&e).ok_or_else(|| e.to_string())?),
            };
            times.push(t0.elapsed().as_secs_f64());
            rounds.push(r.rounds_used.or(r.pebble_rounds).unwrap_or_default());
            cells.push(
                r.item_cells.unwrap_or_default() + r.slashed_cells.unwrap_or_default(),
            );
        }
        rounds.sort_unstable();
        cells.sort_unstable();
        times.sort_by(f64::total_cmp);
        rows.push((n, rounds[rounds.len() / 2], cells[cells.len() / 2], times[times.len() / 2]));
    }
    if a.json {
        let doc: Vec<_> = rows
            .iter()
            .map(|&(n, rounds, cells, time)| {
                serde_json::json!({"n": n, "rounds": rounds, "cells": cells, "time": time})
            })
            .collect();
        println!("{}", serde_json::to_string(&doc).unwrap());
    } else {
        println!("{:>6} {:>8} {:>12} {:>12}", "n", "rounds", "cells", "time (ms)");
        for (n, rounds, cells, time) in rows {
            println!("{n:>6} {rounds:>8} {cells:>12} {:>12.3}", time * 1e3);
        }
    }
    Ok(0)
}

fn cmd_sample(a: SampleArgs) -> Result<u8, String> {
    let spec = sampler::builtin(&a.language).map_err(|e| e.to_string())?;
    if !(0.0 < a.split && a.split < 1.0) {
        return Err(format!("--split must be in (0, 1), got {}", a.split));
    }
    let dataset = sampler::make_dataset(&spec, a.count, a.max_n, a.split, a.seed)
        .map_err(|e| feasibility_hint(&spec, a.max_n, e))?;
    let tsv = dataset.to_tsv();
    match &a.output {
        Some(path) => {
            std::fs::write(path, &tsv).map_err(|e| format!("writing {}: {e}", path.display()))?;
            println!(
                "wrote {} records ({} positive) to {}",
                dataset.records.len(),
                dataset.records.iter().filter(|r| r.positive).count(),
                path.display()
            );
        }
        None => print!("{tsv}"),
    }
    Ok(0)
}

fn feasibility_hint(spec: &LanguageSpec, max_n: usize, e: sampler::SampleError) -> String {
    match sampler::build_length_table(&spec.cnf, max_n.max(32)) {
        Ok(t) => format!("{e} (feasible lengths: {:?})", t.feasible_lengths()),
        Err(_) => e.to_string(),
    }
}
