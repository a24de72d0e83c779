//! Command-line interface.
//!
//! Every subcommand is a thin adapter over the library: inputs are parsed,
//! one library call runs, and its results are printed verbatim (as stable
//! `key: value` lines, or as one JSON object with `--json`).
//!
//! Exit codes: 0 on success, 1 when the checked property fails (no
//! simulation, certification refused, instance refuted), 2 on usage or
//! malformed-input errors, 3 when a resource guard (game budget, jump
//! enumeration, lasso bound, state-space bound) stopped the computation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use gfmkit::automata::BuchiAutomaton;
use gfmkit::constructions::{branching_degree, build_sldba, build_slim, SldbaOptions, SlimOptions};
use gfmkit::hoa::{read_hoa_file, write_hoa, write_hoa_file};
use gfmkit::mdp::{parse_explicit, LabeledMDP};
use gfmkit::model_check::{psat, refute_gfm_on_instance, PsatAnalysis, DEFAULT_TOL};
use gfmkit::prism::parse_prism_subset;
use gfmkit::rl::{learn, parse_config, render_curve, Hyperparams, CURVE_EVAL_EVERY};
use gfmkit::sim::{
    certify_gfm, decide_with_budget, CertifyReport, Reference, SimLevel, SimVerdict,
    DEFAULT_GAME_BUDGET,
};
use gfmkit::{Error, Result};

#[derive(Parser)]
#[command(
    name = "gfmkit",
    version,
    about = "Good-for-MDPs Büchi automata: constructions, certification, model checking, learning"
)]
struct Cli {
    /// Emit one JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, ValueEnum)]
enum RefKind {
    /// Branching-degree-two construction.
    Slim,
    /// Jump-style limit-deterministic construction.
    Sldba,
}

#[derive(Subcommand)]
enum Command {
    /// Print structural facts about a HOA automaton.
    Inspect {
        /// Automaton file (HOA, transition-based Büchi).
        automaton: PathBuf,
    },
    /// Build the slim automaton (branching degree at most two).
    Slim {
        automaton: PathBuf,
        /// Write the result here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Complete the result with a rejecting sink.
        #[arg(long)]
        complete: bool,
    },
    /// Build the jump-style limit-deterministic automaton.
    Sldba {
        automaton: PathBuf,
        /// Write the result here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Only jump to singleton subsets (avoids enumerating power sets).
        #[arg(long)]
        singleton_jumps: bool,
        /// Complete the result with a rejecting sink.
        #[arg(long)]
        complete: bool,
    },
    /// Decide whether the duplicator simulates the spoiler.
    Simulate {
        /// Game strength: 0 plain, 1 with claims, 2 with claim updates.
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=2))]
        level: u8,
        spoiler: PathBuf,
        duplicator: PathBuf,
        /// Write a readable dump of the solved game to this file.
        #[arg(long)]
        dump_game: Option<PathBuf>,
        /// Maximum number of game positions.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Certify the good-for-MDPs property by simulation against a reference.
    Certify {
        /// Automaton file; omit when using --batch.
        #[arg(required_unless_present = "batch", conflicts_with = "batch")]
        automaton: Option<PathBuf>,
        /// Reference construction to play against.
        #[arg(long, value_enum, default_value = "slim")]
        reference: RefKind,
        /// Maximum number of game positions per level.
        #[arg(long)]
        budget: Option<usize>,
        /// Certify every .hoa file in this directory (in parallel).
        #[arg(long)]
        batch: Option<PathBuf>,
    },
    /// Maximal probability that the model satisfies the automaton's language.
    Mc {
        /// Model file: .prism (guarded commands) or .mdpx (explicit).
        model: PathBuf,
        automaton: PathBuf,
        /// Language-equivalent reference automaton: also compute the value
        /// through it and report the gap.
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
        /// Value-iteration stopping tolerance.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Learn a control policy with tabular Q-learning.
    Learn {
        /// Model file: .prism (guarded commands) or .mdpx (explicit).
        model: PathBuf,
        automaton: PathBuf,
        /// key = value hyperparameter file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Write a learning curve (CSV) here.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    // Die quietly when the consumer of a pipe goes away (e.g. `... | head`)
    // instead of panicking on the failed write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_resource_guard() { 3 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Inspect { automaton } => inspect(&automaton, cli.json),
        Command::Slim {
            automaton,
            output,
            complete,
        } => {
            let a = read_hoa_file(&automaton)?;
            let b = build_slim(&a, SlimOptions { complete });
            emit_construction(&b, output.as_deref(), cli.json)
        }
        Command::Sldba {
            automaton,
            output,
            singleton_jumps,
            complete,
        } => {
            let a = read_hoa_file(&automaton)?;
            let b = build_sldba(
                &a,
                SldbaOptions {
                    singleton_jumps,
                    complete,
                },
            )?;
            emit_construction(&b, output.as_deref(), cli.json)
        }
        Command::Simulate {
            level,
            spoiler,
            duplicator,
            dump_game,
            budget,
        } => simulate(
            level,
            &spoiler,
            &duplicator,
            dump_game.as_deref(),
            budget,
            cli.json,
        ),
        Command::Certify {
            automaton,
            reference,
            budget,
            batch,
        } => match batch {
            Some(dir) => certify_batch(&dir, reference, budget, cli.json),
            None => certify_one(&automaton.unwrap(), reference, budget, cli.json),
        },
        Command::Mc {
            model,
            automaton,
            reference,
            tol,
        } => mc(&model, &automaton, reference.as_deref(), tol, cli.json),
        Command::Learn {
            model,
            automaton,
            config,
            seed,
            curve,
        } => learn_cmd(
            &model,
            &automaton,
            config.as_deref(),
            seed,
            curve.as_deref(),
            cli.json,
        ),
    }
}

/// Game budget: flag, then the GFMKIT_BUDGET environment variable, then the
/// library default.
fn resolve_budget(flag: Option<usize>) -> Result<usize> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var("GFMKIT_BUDGET") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("GFMKIT_BUDGET must be an integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_GAME_BUDGET),
    }
}

fn load_model(path: &Path) -> Result<LabeledMDP> {
    let text = std::fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("prism") => parse_prism_subset(&text),
        Some("mdpx") => parse_explicit(&text),
        other => Err(Error::Config(format!(
            "unsupported model extension {other:?}: expected .prism or .mdpx"
        ))),
    }
}

fn inspect(path: &Path, as_json: bool) -> Result<u8> {
    let a = read_hoa_file(path)?;
    let transitions: usize = (0..a.num_states()).map(|q| a.transitions_from(q).len()).sum();
    let initial: Vec<usize> = a.initial().iter().copied().collect();
    if as_json {
        println!(
            "{}",
            json!({
                "states": a.num_states(),
                "initial": initial,
                "aps": a.ap_list(),
                "transitions": transitions,
                "accepting_transitions": a.num_accepting(),
                "deterministic": a.is_deterministic(),
                "complete": a.is_complete(),
                "limit_deterministic": a.is_limit_deterministic(),
                "branching_degree": branching_degree(&a),
            })
        );
    } else {
        println!("states: {}", a.num_states());
        println!(
            "initial: {}",
            initial
                .iter()
                .map(|q| q.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        );
        println!("aps: {}", a.ap_list().join(" "));
        println!("transitions: {transitions}");
        println!("accepting-transitions: {}", a.num_accepting());
        println!("deterministic: {}", a.is_deterministic());
        println!("complete: {}", a.is_complete());
        println!("limit-deterministic: {}", a.is_limit_deterministic());
        println!("branching-degree: {}", branching_degree(&a));
    }
    Ok(0)
}

fn emit_construction(b: &BuchiAutomaton, output: Option<&Path>, as_json: bool) -> Result<u8> {
    if let Some(path) = output {
        write_hoa_file(b, path)?;
    }
    if as_json {
        let mut obj = json!({
            "states": b.num_states(),
            "branching_degree": branching_degree(b),
        });
        match output {
            Some(path) => obj["output"] = json!(path.display().to_string()),
            None => obj["hoa"] = json!(write_hoa(b)),
        }
        println!("{obj}");
    } else if let Some(path) = output {
        println!("states: {}", b.num_states());
        println!("branching-degree: {}", branching_degree(b));
        println!("output: {}", path.display());
    } else {
        print!("{}", write_hoa(b));
    }
    Ok(0)
}

fn simulate(
    level: u8,
    spoiler: &Path,
    duplicator: &Path,
    dump_game: Option<&Path>,
    budget: Option<usize>,
    as_json: bool,
) -> Result<u8> {
    let level = SimLevel::from_index(level as usize).unwrap();
    let s = read_hoa_file(spoiler)?;
    let d = read_hoa_file(duplicator)?;
    let outcome = decide_with_budget(level, &s, &d, resolve_budget(budget)?)?;
    if let Some(path) = dump_game {
        let file = std::fs::File::create(path)?;
        outcome.dump(std::io::BufWriter::new(file))?;
    }
    if as_json {
        println!(
            "{}",
            json!({
                "level": level.to_string(),
                "simulates": outcome.simulates,
                "game_positions": outcome.game_states(),
                "game_moves": outcome.game_edges(),
            })
        );
    } else {
        println!("level: {level}");
        println!("simulates: {}", outcome.simulates);
        println!("game-positions: {}", outcome.game_states());
        println!("game-moves: {}", outcome.game_edges());
    }
    Ok(if outcome.simulates { 0 } else { 1 })
}

fn reference_of(kind: RefKind) -> Reference<'static> {
    match kind {
        RefKind::Slim => Reference::Slim,
        RefKind::Sldba => Reference::Sldba,
    }
}

fn verdict_exit(verdict: &SimVerdict) -> u8 {
    match verdict {
        v if v.certified() => 0,
        SimVerdict::Timeout(_) => 3,
        _ => 1,
    }
}

fn report_json(report: &CertifyReport) -> serde_json::Value {
    json!({
        "verdict": report.verdict.to_string(),
        "input_states": report.input_states,
        "reference": report.reference,
        "reference_states": report.reference_states,
        "levels": report
            .levels
            .iter()
            .map(|l| {
                json!({
                    "level": l.level.to_string(),
                    "simulates": l.simulates,
                    "timed_out": l.timed_out,
                    "game_positions": l.game_states,
                    "game_moves": l.game_edges,
                    "wall_ms": l.wall_ms,
                })
            })
            .collect::<Vec<_>>(),
        "total_ms": report.total_ms,
    })
}

fn report_text(report: &CertifyReport) -> String {
    let mut out = String::new();
    writeln!(out, "verdict: {}", report.verdict).unwrap();
    writeln!(out, "input-states: {}", report.input_states).unwrap();
    match report.reference_states {
        Some(n) => writeln!(out, "reference: {} ({n} states)", report.reference).unwrap(),
        None => writeln!(out, "reference: none (input is deterministic)").unwrap(),
    }
    for l in &report.levels {
        let result = if l.timed_out {
            "budget exceeded"
        } else if l.simulates {
            "simulates"
        } else {
            "no simulation"
        };
        writeln!(
            out,
            "level {}: {result} ({} positions, {} moves, {} ms)",
            l.level, l.game_states, l.game_edges, l.wall_ms
        )
        .unwrap();
    }
    writeln!(out, "total-ms: {}", report.total_ms).unwrap();
    out
}

fn certify_one(path: &Path, kind: RefKind, budget: Option<usize>, as_json: bool) -> Result<u8> {
    let a = read_hoa_file(path)?;
    let report = certify_gfm(&a, reference_of(kind), resolve_budget(budget)?)?;
    if as_json {
        println!("{}", report_json(&report));
    } else {
        print!("{}", report_text(&report));
    }
    Ok(verdict_exit(&report.verdict))
}

fn certify_batch(dir: &Path, kind: RefKind, budget: Option<usize>, as_json: bool) -> Result<u8> {
    let budget = resolve_budget(budget)?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("hoa"))
        .collect();
    files.sort();
    let results: Vec<(String, Result<CertifyReport>)> = files
        .par_iter()
        .map(|p| {
            let name = p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string());
            let report = read_hoa_file(p).and_then(|a| certify_gfm(&a, reference_of(kind), budget));
            (name, report)
        })
        .collect();
    let mut any_nosim = false;
    let mut any_timeout = false;
    let mut any_error = false;
    let mut rows = Vec::new();
    for (name, result) in &results {
        match result {
            Ok(report) => {
                match report.verdict {
                    SimVerdict::NoSim => any_nosim = true,
                    SimVerdict::Timeout(_) => any_timeout = true,
                    _ => {}
                }
                if as_json {
                    let mut obj = report_json(report);
                    obj["file"] = json!(name);
                    rows.push(obj);
                } else {
                    println!("{name}: {}", report.verdict);
                }
            }
            Err(e) => {
                if e.is_resource_guard() {
                    any_timeout = true;
                } else {
                    any_error = true;
                }
                if as_json {
                    rows.push(json!({ "file": name, "error": e.to_string() }));
                } else {
                    println!("{name}: error: {e}");
                }
            }
        }
    }
    if as_json {
        println!("{}", json!(rows));
    }
    Ok(if any_nosim {
        1
    } else if any_timeout {
        3
    } else if any_error {
        2
    } else {
        0
    })
}

fn analysis_lines(prefix: &str, analysis: &PsatAnalysis, out: &mut String) {
    writeln!(out, "{prefix}product-states: {}", analysis.product.num_states()).unwrap();
    writeln!(out, "{prefix}mecs: {}", analysis.num_mecs).unwrap();
    writeln!(out, "{prefix}aecs: {}", analysis.num_aecs).unwrap();
    writeln!(out, "{prefix}value: {}", analysis.value()).unwrap();
    writeln!(out, "{prefix}iterations: {}", analysis.check.iterations).unwrap();
    writeln!(out, "{prefix}residual: {:e}", analysis.check.residual).unwrap();
}

fn analysis_json(analysis: &PsatAnalysis) -> serde_json::Value {
    json!({
        "product_states": analysis.product.num_states(),
        "mecs": analysis.num_mecs,
        "aecs": analysis.num_aecs,
        "value": analysis.value(),
        "iterations": analysis.check.iterations,
        "residual": analysis.check.residual,
    })
}

fn mc(
    model: &Path,
    automaton: &Path,
    reference: Option<&Path>,
    tol: f64,
    as_json: bool,
) -> Result<u8> {
    let m = load_model(model)?;
    let a = read_hoa_file(automaton)?;
    match reference {
        None => {
            let analysis = psat(&m, &a, tol)?;
            if as_json {
                println!("{}", analysis_json(&analysis));
            } else {
                let mut out = String::new();
                analysis_lines("", &analysis, &mut out);
                print!("{out}");
            }
            Ok(0)
        }
        Some(rp) => {
            let r = read_hoa_file(rp)?;
            let outcome = refute_gfm_on_instance(&m, &a, &r, tol)?;
            if as_json {
                println!(
                    "{}",
                    json!({
                        "syntactic": analysis_json(&outcome.syntactic),
                        "semantic": analysis_json(&outcome.semantic),
                        "gap": outcome.gap,
                        "refuted": outcome.refuted,
                    })
                );
            } else {
                let mut out = String::new();
                analysis_lines("", &outcome.syntactic, &mut out);
                analysis_lines("semantic-", &outcome.semantic, &mut out);
                writeln!(out, "gap: {}", outcome.gap).unwrap();
                writeln!(out, "refuted: {}", outcome.refuted).unwrap();
                print!("{out}");
            }
            Ok(if outcome.refuted { 1 } else { 0 })
        }
    }
}

fn learn_cmd(
    model: &Path,
    automaton: &Path,
    config: Option<&Path>,
    seed: Option<u64>,
    curve: Option<&Path>,
    as_json: bool,
) -> Result<u8> {
    let m = load_model(model)?;
    let a = read_hoa_file(automaton)?;
    let mut hp = match config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => Hyperparams::default(),
    };
    if let Some(s) = seed {
        hp.seed = s;
    }
    let eval_every = curve.map(|_| CURVE_EVAL_EVERY);
    let outcome = learn(&m, &a, hp, eval_every)?;
    if let Some(path) = curve {
        std::fs::write(path, render_curve(&outcome.trace))?;
    }
    if as_json {
        let mut obj = json!({
            "episodes": outcome.trace.len(),
            "evaluated_probability": outcome.final_value,
            "seed": hp.seed,
        });
        if let Some(path) = curve {
            obj["curve"] = json!(path.display().to_string());
        }
        println!("{obj}");
    } else {
        println!("episodes: {}", outcome.trace.len());
        println!("seed: {}", hp.seed);
        println!("evaluated-probability: {}", outcome.final_value);
        if let Some(path) = curve {
            println!("curve: {}", path.display());
        }
    }
    Ok(0)
}
