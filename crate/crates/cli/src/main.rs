//! `pegsem` command-line front end.
//!
//! Exit codes: 0 success, 1 fail (or violations / disagreements found),
//! 2 error outcome, 3 usage or I/O problem, 4 grammar rejected, 5 budget
//! or cap exhausted.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use pegsem::bigstep::{self, EvalBudget, EvalError};
use pegsem::harness::{self, HarnessError, MutationSpec};
use pegsem::machine::{self, MachineConfig, MachineError};
use pegsem::symbolic::{self, SearchConfig, SearchError, SymKind};
use pegsem::{check_cut_placement, check_wellformed, parse_grammar, Expr, Grammar, OutcomeKind};

const EXIT_FAIL: u8 = 1;
const EXIT_ERROR: u8 = 2;
const EXIT_USAGE: u8 = 3;
const EXIT_GRAMMAR: u8 = 4;
const EXIT_BUDGET: u8 = 5;

#[derive(Parser)]
#[command(name = "pegsem", version, about = "Run, analyse and generate inputs for parsing expression grammars")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a grammar's start expression on an input.
    Parse(ParseArgs),
    /// List symbolic solutions of each length.
    Gen(GenArgs),
    /// Count steps for every file of a corpus directory.
    Bench(BenchArgs),
    /// Compare a grammar with an annotated variant over a corpus directory.
    Diff(DiffArgs),
    /// Write seeded variants of a file with punctuation deleted.
    Mutate(MutateArgs),
    /// Static checks, plus the bounded unique-token-prefix check.
    Check(CheckArgs),
}

#[derive(Args)]
struct ParseArgs {
    grammar: PathBuf,
    /// Input text.
    #[arg(conflicts_with = "file", required_unless_present = "file")]
    input: Option<String>,
    /// Read the input from a file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Use the frame machine (default).
    #[arg(long, conflicts_with = "bigstep")]
    machine: bool,
    /// Use the recursive reference interpreter.
    #[arg(long)]
    bigstep: bool,
    /// Keep choice frames under try.
    #[arg(long)]
    no_simplify: bool,
    /// Print every machine transition.
    #[arg(long, conflicts_with = "bigstep")]
    trace: bool,
    #[arg(long, default_value_t = 50_000_000)]
    budget: u64,
    /// Require the whole input to be consumed.
    #[arg(long)]
    full: bool,
    /// Skip well-formedness and cut-placement checks.
    #[arg(long)]
    no_check: bool,
    #[arg(long)]
    jsonl: bool,
}

#[derive(Args)]
struct GenArgs {
    grammar: PathBuf,
    #[arg(long, default_value_t = 5)]
    max_len: usize,
    /// Also print the instances over these characters.
    #[arg(long)]
    alphabet: Option<String>,
    /// Maximum number of outcomes per length.
    #[arg(long)]
    limit: Option<usize>,
    /// Include failing outcomes.
    #[arg(long)]
    show_fail: bool,
    /// Maximum number of instances printed per outcome.
    #[arg(long, default_value_t = 1000)]
    instances: usize,
    #[arg(long)]
    jsonl: bool,
}

#[derive(Args)]
struct BenchArgs {
    grammar: PathBuf,
    corpus: PathBuf,
    #[arg(long)]
    no_simplify: bool,
    /// Write JSON lines here instead of the table on stdout ("-" for stdout).
    #[arg(long)]
    jsonl: Option<PathBuf>,
}

#[derive(Args)]
struct DiffArgs {
    plain: PathBuf,
    annotated: PathBuf,
    corpus: PathBuf,
    #[arg(long)]
    no_simplify: bool,
    #[arg(long)]
    jsonl: bool,
}

#[derive(Args)]
struct MutateArgs {
    file: PathBuf,
    /// Characters that may be deleted.
    #[arg(long, default_value = "]}:,;()")]
    symbols: String,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    max_del: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    variants: u64,
    /// Write one file per variant instead of JSON lines on stdout.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    grammar: PathBuf,
    /// Check token pairs on inputs up to this length.
    #[arg(long)]
    utp: Option<usize>,
    #[arg(long)]
    jsonl: bool,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

type CmdResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn load_grammar(path: &Path) -> Result<Grammar, Failure> {
    parse_grammar(&read(path)?).map_err(|e| fail(EXIT_GRAMMAR, format!("{}: {e}", path.display())))
}

fn static_checks(g: &Grammar, path: &Path) -> Result<(), Failure> {
    let mut lines = Vec::new();
    lines.extend(check_wellformed(g).issues.iter().map(ToString::to_string));
    lines.extend(check_cut_placement(g).issues.iter().map(ToString::to_string));
    if lines.is_empty() {
        Ok(())
    } else {
        Err(fail(EXIT_GRAMMAR, format!("{}:\n{}", path.display(), lines.join("\n"))))
    }
}

fn load_checked(path: &Path) -> Result<Grammar, Failure> {
    let g = load_grammar(path)?;
    static_checks(&g, path)?;
    Ok(g)
}

fn machine_failure(e: MachineError) -> Failure {
    match e {
        MachineError::BudgetExceeded(_) => fail(EXIT_BUDGET, e.to_string()),
        MachineError::MisplacedCut(_) => fail(EXIT_GRAMMAR, e.to_string()),
        MachineError::Terminated => fail(EXIT_ERROR, e.to_string()),
    }
}

fn harness_failure(e: HarnessError) -> Failure {
    match e {
        HarnessError::Machine(m) => machine_failure(m),
        HarnessError::CapExceeded { .. } | HarnessError::Eval(EvalError::BudgetExceeded(_)) => {
            fail(EXIT_BUDGET, e.to_string())
        }
        _ => fail(EXIT_USAGE, e.to_string()),
    }
}

fn outcome_code(kind: OutcomeKind) -> u8 {
    match kind {
        OutcomeKind::Success => 0,
        OutcomeKind::Fail => EXIT_FAIL,
        OutcomeKind::Error => EXIT_ERROR,
    }
}

fn cmd_parse(a: ParseArgs) -> CmdResult {
    let mut g = load_grammar(&a.grammar)?;
    if a.full {
        g = g
            .with_start(Expr::seq(g.start().clone(), Expr::not(Expr::any())))
            .expect("same rules");
    }
    if !a.no_check {
        static_checks(&g, &a.grammar)?;
    }
    let input = match (&a.input, &a.file) {
        (Some(x), _) => x.clone(),
        (None, Some(f)) => read(f)?,
        (None, None) => unreachable!("clap requires one of them"),
    };
    let out = io::stdout();
    let mut out = out.lock();
    let (outcome, metrics) = if a.bigstep {
        let o = bigstep::eval(&g, g.start(), &input, EvalBudget { max_steps: a.budget }).map_err(|e| match e {
            EvalError::BudgetExceeded(_) => fail(EXIT_BUDGET, e.to_string()),
            EvalError::UnsupportedCut => fail(EXIT_USAGE, e.to_string()),
        })?;
        (o, None)
    } else {
        let cfg = MachineConfig {
            simplify: !a.no_simplify,
            budget: a.budget,
        };
        if a.trace {
            let (o, m, trace) = machine::run_traced(&g, g.start(), &input, cfg).map_err(machine_failure)?;
            for t in trace {
                if a.jsonl {
                    writeln!(out, "{}", json!(t)).ok();
                } else {
                    writeln!(out, "{:>6} {:<16} pos={} depth={}", t.index, t.rule, t.pos, t.depth).ok();
                }
            }
            (o, Some(m))
        } else {
            let (o, m) = machine::run(&g, g.start(), &input, cfg).map_err(machine_failure)?;
            (o, Some(m))
        }
    };
    let consumed = &input[..outcome.pos()];
    let rest = outcome.rest(&input);
    if a.jsonl {
        let mut v = json!({
            "outcome": outcome.kind(),
            "pos": outcome.pos(),
            "rest": rest,
        });
        if let Some(m) = metrics {
            v["entry_steps"] = json!(m.entry_steps);
            v["total_steps"] = json!(m.total_steps);
            v["max_depth"] = json!(m.max_stack_depth);
        }
        writeln!(out, "{v}").ok();
    } else {
        match outcome.kind() {
            OutcomeKind::Success => writeln!(out, "outcome=success consumed={consumed:?} rest={rest:?}"),
            k => writeln!(out, "outcome={k} at={} rest={rest:?}", outcome.pos()),
        }
        .ok();
        if let Some(m) = metrics {
            writeln!(
                out,
                "entry_steps={} total_steps={} max_depth={}",
                m.entry_steps, m.total_steps, m.max_stack_depth
            )
            .ok();
        }
    }
    Ok(outcome_code(outcome.kind()))
}

fn search_failure(e: SearchError) -> Failure {
    match e {
        SearchError::Unsupported(_) => fail(EXIT_GRAMMAR, e.to_string()),
        SearchError::NoTokens => fail(EXIT_USAGE, e.to_string()),
        SearchError::SolutionCapExceeded { .. } | SearchError::BudgetExceeded(_) => fail(EXIT_BUDGET, e.to_string()),
    }
}

fn cmd_gen(a: GenArgs) -> CmdResult {
    let g = load_checked(&a.grammar)?;
    let alphabet: Option<Vec<char>> = a.alphabet.as_ref().map(|s| s.chars().collect());
    let cfg = SearchConfig {
        limit: a.limit,
        include_fail: a.show_fail,
        ..SearchConfig::default()
    };
    let out = io::stdout();
    let mut out = out.lock();
    for n in 1..=a.max_len {
        let (outcomes, capped) = match symbolic::search(&g, g.start(), n, cfg) {
            Ok(v) => (v, None),
            Err(SearchError::SolutionCapExceeded { limit, partial }) => (partial, Some(limit)),
            Err(e) => return Err(search_failure(e)),
        };
        if !a.jsonl {
            if outcomes.is_empty() {
                writeln!(out, "length {n}: no solutions").ok();
            } else {
                writeln!(out, "length {n}: {} outcome(s)", outcomes.len()).ok();
            }
        }
        for o in &outcomes {
            let kind = if o.kind == SymKind::Ok { "ok" } else { "fail" };
            let instances = match &alphabet {
                Some(al) => Some(match symbolic::enumerate(o, al, a.instances) {
                    Ok(v) => (v, false),
                    Err(e) => (e.partial, true),
                }),
                None => None,
            };
            if a.jsonl {
                let mut v = json!({
                    "length": n,
                    "kind": kind,
                    "consumed": o.consumed.to_string(),
                    "remaining": o.remaining.to_string(),
                });
                if let Some((xs, truncated)) = &instances {
                    v["instances"] = json!(xs);
                    v["truncated"] = json!(truncated);
                }
                writeln!(out, "{v}").ok();
            } else {
                writeln!(out, "  {kind:<4} {o}").ok();
                if let Some((xs, truncated)) = &instances {
                    for x in xs {
                        writeln!(out, "         {x:?}").ok();
                    }
                    if *truncated {
                        writeln!(out, "         ... more than {} instances", a.instances).ok();
                    }
                }
            }
        }
        if let Some(limit) = capped {
            return Err(fail(
                EXIT_BUDGET,
                format!("length {n}: more than {limit} outcomes; raise --limit"),
            ));
        }
    }
    Ok(0)
}

fn read_corpus(dir: &Path) -> Result<Vec<(String, String)>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            Ok((name, read(&p)?))
        })
        .collect()
}

fn grammar_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn cmd_bench(a: BenchArgs) -> CmdResult {
    let g = load_checked(&a.grammar)?;
    let corpus = read_corpus(&a.corpus)?;
    let cfg = MachineConfig {
        simplify: !a.no_simplify,
        ..MachineConfig::default()
    };
    let id = grammar_id(&a.grammar);
    let records = harness::bench_batch(&g, &id, &corpus, cfg);
    let agg = harness::aggregate(&id, &records);
    match &a.jsonl {
        Some(path) => {
            let mut text = String::new();
            for r in &records {
                text.push_str(&json!(r).to_string());
                text.push('\n');
            }
            text.push_str(&json!(agg).to_string());
            text.push('\n');
            if path.as_os_str() == "-" {
                print!("{text}");
            } else {
                fs::write(path, text).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))?;
            }
        }
        None => {
            println!(
                "{:<32} {:<8} {:>12} {:>12} {:>9} {:>10}",
                "file", "outcome", "entry_steps", "total_steps", "max_depth", "ms"
            );
            for r in &records {
                println!(
                    "{:<32} {:<8} {:>12} {:>12} {:>9} {:>10.3}",
                    r.file, r.outcome, r.entry_steps, r.total_steps, r.max_depth, r.ms
                );
            }
            println!(
                "{:<32} {:<8} {:>12} {:>12} {:>9} {:>10.3}",
                format!("total ({} files)", agg.files),
                "",
                agg.entry_steps,
                agg.total_steps,
                agg.max_depth,
                agg.ms
            );
        }
    }
    Ok(if records.iter().any(|r| r.outcome == "budget") { EXIT_BUDGET } else { 0 })
}

fn cmd_diff(a: DiffArgs) -> CmdResult {
    let plain = load_checked(&a.plain)?;
    let annotated = load_checked(&a.annotated)?;
    let corpus = read_corpus(&a.corpus)?;
    let cfg = MachineConfig {
        simplify: !a.no_simplify,
        ..MachineConfig::default()
    };
    let r = harness::diff_grammars(&plain, &annotated, &corpus, cfg).map_err(harness_failure)?;
    if a.jsonl {
        for e in &r.entries {
            let mut v = json!(e);
            v["delta"] = json!(e.delta());
            println!("{v}");
        }
        println!(
            "{}",
            json!({"aggregate": true, "rejected": r.rejected, "accepted": r.accepted, "disagreements": r.disagreements().count()})
        );
    } else {
        for e in &r.entries {
            println!(
                "{:<32} {:<7} {:<7} {:>10} {:>10} {:>+8}{}",
                e.file,
                e.plain,
                e.annotated,
                e.plain_steps,
                e.annotated_steps,
                e.delta(),
                if e.agree { "" } else { "  DISAGREE" }
            );
        }
        for (label, t) in [("rejected", r.rejected), ("accepted", r.accepted)] {
            println!(
                "{label}: {} inputs, {} -> {} entry steps, reduction {:.2}%",
                t.inputs,
                t.plain_steps,
                t.annotated_steps,
                t.reduction * 100.0
            );
        }
    }
    let bad = r.disagreements().count();
    if bad > 0 {
        eprintln!("{bad} input(s) where acceptance differs");
        return Ok(EXIT_FAIL);
    }
    Ok(0)
}

fn cmd_mutate(a: MutateArgs) -> CmdResult {
    let text = read(&a.file)?;
    let spec = MutationSpec {
        deletable: a.symbols.chars().collect(),
        max_deletions: a.max_del as usize,
        seed: a.seed,
        variants: a.variants as usize,
    };
    let variants = harness::mutate(&text, &spec).map_err(harness_failure)?;
    match &a.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", dir.display())))?;
            let stem = grammar_id(&a.file);
            let ext = a.file.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
            for (i, v) in variants.iter().enumerate() {
                let p = dir.join(format!("{stem}.mut{i}{ext}"));
                fs::write(&p, v).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", p.display())))?;
                println!("{}", p.display());
            }
        }
        None => {
            for (i, v) in variants.iter().enumerate() {
                println!("{}", json!({"variant": i, "seed": a.seed, "text": v}));
            }
        }
    }
    Ok(0)
}

fn cmd_check(a: CheckArgs) -> CmdResult {
    let g = load_grammar(&a.grammar)?;
    let wf = check_wellformed(&g);
    let cuts = check_cut_placement(&g);
    let mut lines: Vec<(String, String)> = Vec::new();
    for i in &wf.issues {
        lines.push(("wellformed".into(), i.to_string()));
    }
    for i in &cuts.issues {
        lines.push(("placement".into(), i.to_string()));
    }
    let static_ok = lines.is_empty();
    let mut violations = 0;
    if let (Some(n), true) = (a.utp, static_ok) {
        let r = symbolic::utp_check(&g, n).map_err(search_failure)?;
        violations = r.violations.len();
        for v in &r.violations {
            lines.push(("utp".into(), v.to_string()));
        }
        if violations == 0 {
            lines.push((
                "utp".into(),
                format!("ok: {} token pairs, lengths up to {n}", r.pairs_checked),
            ));
        }
    }
    if static_ok {
        lines.insert(0, ("wellformed".into(), "ok".into()));
        lines.insert(1, ("placement".into(), "ok".into()));
    }
    for (check, msg) in &lines {
        if a.jsonl {
            println!("{}", json!({"check": check, "message": msg}));
        } else {
            println!("{check}: {msg}");
        }
    }
    Ok(if !static_ok {
        EXIT_GRAMMAR
    } else if violations > 0 {
        EXIT_FAIL
    } else {
        0
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            e.print().ok();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Parse(a) => cmd_parse(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Diff(a) => cmd_diff(a),
        Command::Mutate(a) => cmd_mutate(a),
        Command::Check(a) => cmd_check(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("pegsem: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
