//! Corpus tooling: seeded input mutation, batch step counting, differential
//! comparison of two grammars, brute-force language oracles and random
//! grammar generation for property tests.
//!
//! All randomness comes from ChaCha8 seeded with a `u64`, and only `u32`
//! ranges are sampled, so mutation corpora are identical across platforms.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bigstep::{self, EvalBudget, EvalError};
use crate::check::check_wellformed;
use crate::grammar::{Expr, Grammar, Outcome, OutcomeKind, Terminal};
use crate::machine::{self, MachineConfig, MachineError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    #[error("text contains none of the deletable symbols")]
    NoDeletableSymbols,
    #[error("cannot mutate an empty text")]
    EmptyText,
    #[error("max_deletions must be at least 1")]
    ZeroDeletions,
    #[error("{needed} strings exceed the cap of {cap}")]
    CapExceeded { needed: u128, cap: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Machine(#[from] MachineError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MutationSpec {
    pub deletable: BTreeSet<char>,
    pub max_deletions: usize,
    pub seed: u64,
    pub variants: usize,
}

impl MutationSpec {
    /// Closing and separator symbols of JSON and C-like syntax.
    pub fn punctuation(seed: u64, variants: usize) -> MutationSpec {
        MutationSpec {
            deletable: [']', '}', ':', ',', ';', '(', ')'].into_iter().collect(),
            max_deletions: 10,
            seed,
            variants,
        }
    }
}

fn below(rng: &mut ChaCha8Rng, n: usize) -> usize {
    rng.gen_range(0..n as u32) as usize
}

/// `spec.variants` copies of `text`, each with between 1 and
/// `spec.max_deletions` deletable characters removed. Positions within a
/// variant are distinct.
pub fn mutate(text: &str, spec: &MutationSpec) -> Result<Vec<String>, HarnessError> {
    if text.is_empty() {
        return Err(HarnessError::EmptyText);
    }
    if spec.max_deletions == 0 {
        return Err(HarnessError::ZeroDeletions);
    }
    let chars: Vec<char> = text.chars().collect();
    let candidates: Vec<usize> = (0..chars.len()).filter(|&i| spec.deletable.contains(&chars[i])).collect();
    if candidates.is_empty() {
        return Err(HarnessError::NoDeletableSymbols);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let most = spec.max_deletions.min(candidates.len());
    let mut out = Vec::with_capacity(spec.variants);
    for _ in 0..spec.variants {
        let k = 1 + below(&mut rng, most);
        // partial Fisher-Yates over the candidate positions
        let mut pool = candidates.clone();
        for i in 0..k {
            let j = i + below(&mut rng, pool.len() - i);
            pool.swap(i, j);
        }
        let gone: BTreeSet<usize> = pool[..k].iter().copied().collect();
        out.push(
            chars
                .iter()
                .enumerate()
                .filter(|(i, _)| !gone.contains(i))
                .map(|(_, c)| c)
                .collect(),
        );
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRecord {
    pub file: String,
    pub grammar: String,
    /// `success`, `fail`, `error`, or `budget` when the step budget ran out.
    pub outcome: String,
    pub entry_steps: u64,
    pub total_steps: u64,
    pub max_depth: usize,
    pub ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchAggregate {
    pub aggregate: bool,
    pub grammar: String,
    pub files: usize,
    pub entry_steps: u64,
    pub total_steps: u64,
    pub max_depth: usize,
    pub ms: f64,
}

/// Runs the start expression of `g` on every `(file, text)` input.
pub fn bench_batch(g: &Grammar, grammar_id: &str, inputs: &[(String, String)], cfg: MachineConfig) -> Vec<BenchRecord> {
    inputs
        .iter()
        .map(|(file, text)| {
            let t0 = Instant::now();
            let mut st = machine::inject(g, g.start(), text, cfg);
            let outcome = loop {
                if st.is_terminal() {
                    break st.outcome().expect("terminal").kind().to_string();
                }
                match st.step() {
                    Ok(_) => {}
                    Err(MachineError::BudgetExceeded(_)) => break "budget".to_string(),
                    Err(e) => break format!("{e}"),
                }
            };
            let m = st.metrics();
            BenchRecord {
                file: file.clone(),
                grammar: grammar_id.to_string(),
                outcome,
                entry_steps: m.entry_steps,
                total_steps: m.total_steps,
                max_depth: m.max_stack_depth,
                ms: t0.elapsed().as_secs_f64() * 1e3,
            }
        })
        .collect()
}

pub fn aggregate(grammar_id: &str, records: &[BenchRecord]) -> BenchAggregate {
    BenchAggregate {
        aggregate: true,
        grammar: grammar_id.to_string(),
        files: records.len(),
        entry_steps: records.iter().map(|r| r.entry_steps).sum(),
        total_steps: records.iter().map(|r| r.total_steps).sum(),
        max_depth: records.iter().map(|r| r.max_depth).max().unwrap_or(0),
        ms: records.iter().map(|r| r.ms).sum(),
    }
}

/// `1 - annotated / plain`, or 0 when `plain` is 0.
pub fn reduction(plain: u64, annotated: u64) -> f64 {
    if plain == 0 {
        0.0
    } else {
        1.0 - annotated as f64 / plain as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffEntry {
    pub file: String,
    pub plain: OutcomeKind,
    pub annotated: OutcomeKind,
    /// Both accept or both reject; an error counts as a rejection.
    pub agree: bool,
    pub plain_steps: u64,
    pub annotated_steps: u64,
}

impl DiffEntry {
    pub fn delta(&self) -> i64 {
        self.annotated_steps as i64 - self.plain_steps as i64
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct StepTotals {
    pub inputs: usize,
    pub plain_steps: u64,
    pub annotated_steps: u64,
    pub reduction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffReport {
    pub entries: Vec<DiffEntry>,
    /// Inputs the plain grammar rejects.
    pub rejected: StepTotals,
    /// Inputs the plain grammar accepts.
    pub accepted: StepTotals,
}

impl DiffReport {
    pub fn disagreements(&self) -> impl Iterator<Item = &DiffEntry> {
        self.entries.iter().filter(|e| !e.agree)
    }

    pub fn all_agree(&self) -> bool {
        self.disagreements().next().is_none()
    }
}

/// Runs both grammars' start expressions on every input and compares
/// acceptance and entry steps. Aggregates are split by the plain grammar's
/// verdict.
pub fn diff_grammars(
    plain: &Grammar,
    annotated: &Grammar,
    corpus: &[(String, String)],
    cfg: MachineConfig,
) -> Result<DiffReport, HarnessError> {
    let mut entries = Vec::with_capacity(corpus.len());
    let mut rejected = StepTotals::default();
    let mut accepted = StepTotals::default();
    for (file, text) in corpus {
        let (po, pm) = machine::run(plain, plain.start(), text, cfg)?;
        let (ao, am) = machine::run(annotated, annotated.start(), text, cfg)?;
        let bucket = if po.is_success() { &mut accepted } else { &mut rejected };
        bucket.inputs += 1;
        bucket.plain_steps += pm.entry_steps;
        bucket.annotated_steps += am.entry_steps;
        entries.push(DiffEntry {
            file: file.clone(),
            plain: po.kind(),
            annotated: ao.kind(),
            agree: po.is_success() == ao.is_success(),
            plain_steps: pm.entry_steps,
            annotated_steps: am.entry_steps,
        });
    }
    for t in [&mut rejected, &mut accepted] {
        t.reduction = reduction(t.plain_steps, t.annotated_steps);
    }
    Ok(DiffReport {
        entries,
        rejected,
        accepted,
    })
}

/// All strings of length exactly `n` over `alphabet`, in code point order.
pub fn strings_of_length(alphabet: &[char], n: usize) -> Vec<String> {
    let mut alpha = alphabet.to_vec();
    alpha.sort_unstable();
    alpha.dedup();
    let mut out = vec![String::new()];
    for _ in 0..n {
        out = out
            .iter()
            .flat_map(|p| alpha.iter().map(move |c| format!("{p}{c}")))
            .collect();
    }
    out
}

/// Big-step outcome of the start expression on every string of length `n`
/// (or every length up to `n` when `all_lengths` is set).
pub fn brute_force_language(
    g: &Grammar,
    alphabet: &[char],
    n: usize,
    all_lengths: bool,
    cap: usize,
) -> Result<Vec<(String, Outcome)>, HarnessError> {
    let distinct = alphabet.iter().collect::<BTreeSet<_>>().len() as u128;
    let lengths: Vec<usize> = if all_lengths { (0..=n).collect() } else { vec![n] };
    let needed: u128 = lengths.iter().map(|&k| distinct.saturating_pow(k as u32)).sum();
    if needed > cap as u128 {
        return Err(HarnessError::CapExceeded { needed, cap });
    }
    let mut out = Vec::with_capacity(needed as usize);
    for k in lengths {
        for x in strings_of_length(alphabet, k) {
            let o = bigstep::eval(g, g.start(), &x, EvalBudget::default())?;
            out.push((x, o));
        }
    }
    Ok(out)
}

/// Operators the random generator may use beyond the core set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorSet {
    /// ε, terminals, nonterminals, sequence, choice, star, negation.
    Core,
    /// Core plus `throw`, `catch` and `try`.
    Errors,
}

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub alphabet: Vec<char>,
    pub max_nonterminals: usize,
    pub max_depth: usize,
    pub operators: OperatorSet,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            alphabet: vec!['a', 'b', 'c'],
            max_nonterminals: 4,
            max_depth: 4,
            operators: OperatorSet::Core,
        }
    }
}

fn random_terminal(rng: &mut ChaCha8Rng, alphabet: &[char]) -> Terminal {
    match below(rng, 6) {
        0 => Terminal::Any,
        1 => {
            let mut chars: Vec<char> = alphabet.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
            if chars.is_empty() {
                chars.push(alphabet[0]);
            }
            Terminal::class(crate::charset::CharSet::from_chars(chars)).expect("nonempty set")
        }
        _ => Terminal::Char(alphabet[below(rng, alphabet.len())]),
    }
}

/// Random expression of at most `depth` levels of operators.
pub fn random_expr(rng: &mut ChaCha8Rng, depth: usize, nonterminals: &[String], cfg: &GenConfig) -> Expr {
    let errors = cfg.operators == OperatorSet::Errors;
    let leaf = depth == 0 || below(rng, 6) == 0;
    if leaf {
        return match below(rng, if errors { 9 } else { 8 }) {
            0 => Expr::Empty,
            1 | 2 if !nonterminals.is_empty() => Expr::NonTerm(nonterminals[below(rng, nonterminals.len())].clone()),
            8 => Expr::Throw,
            _ => Expr::Term(random_terminal(rng, &cfg.alphabet)),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| random_expr(rng, depth - 1, nonterminals, cfg);
    match below(rng, if errors { 7 } else { 5 }) {
        0 | 1 => Expr::seq(sub(rng), sub(rng)),
        2 => Expr::choice(sub(rng), sub(rng)),
        3 => Expr::star(sub(rng)),
        4 => Expr::not(sub(rng)),
        5 => Expr::catch(sub(rng)),
        _ => Expr::try_(sub(rng)),
    }
}

/// Random well-formed, cut-free grammar: up to `max_nonterminals` rules
/// named `A`, `B`, ... and a start expression, resampled until it passes
/// the termination checks and has at least five nodes.
pub fn random_grammar(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Grammar {
    loop {
        let count = below(rng, cfg.max_nonterminals + 1);
        let names: Vec<String> = (0..count).map(|i| ((b'A' + i as u8) as char).to_string()).collect();
        let rules: Vec<(String, Expr)> = names
            .iter()
            .map(|n| (n.clone(), random_expr(rng, cfg.max_depth, &names, cfg)))
            .collect();
        let start = random_expr(rng, cfg.max_depth, &names, cfg);
        let g = Grammar::from_rules(rules, start).expect("rules reference declared names only");
        let size: usize = g.start().size() + g.rules().map(|(_, e)| e.size()).sum::<usize>();
        if size >= 5 && check_wellformed(&g).is_ok() {
            return g.with_alphabet(cfg.alphabet.clone());
        }
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `k` nested choices whose innermost first alternative is `try("ab")`.
/// On input `ab`, pruning drops all `k` choice frames when the `try` is
/// entered.
pub fn nested_try_witness(k: usize) -> Expr {
    let mut e = Expr::choice(Expr::try_(Expr::lit("ab")), Expr::ch('x'));
    for _ in 1..k {
        e = Expr::choice(e, Expr::ch('x'));
    }
    e
}
