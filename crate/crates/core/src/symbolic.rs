//! Symbolic execution over constrained strings.
//!
//! A path of the search owns a full-length constrained string (one
//! [`Constraint`] per input position) and a frame stack like the concrete
//! machine. Terminal dispatch is the only branching point: either the
//! current position is strengthened with the terminal's domain and consumed,
//! or it is strengthened with the complement and the terminal fails. Every
//! concrete string that instantiates a path's constrained string follows
//! that path step for step, so the final states partition all strings of
//! the chosen length.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use crate::charset::{escape_char, CharSet};
use crate::grammar::{builtin_class, Expr, Grammar, Terminal, BUILTIN_CLASSES};

/// A set of characters allowed at one position. `tt` allows everything,
/// `ff` nothing. Conjunction is set intersection, so all simplification
/// laws hold by construction.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint(CharSet);

impl Constraint {
    pub fn tt() -> Constraint {
        Constraint(CharSet::full())
    }

    pub fn ff() -> Constraint {
        Constraint(CharSet::empty())
    }

    pub fn atom(t: &Terminal) -> Constraint {
        Constraint(t.dom())
    }

    pub fn negated(t: &Terminal) -> Constraint {
        Constraint(t.dom().complement())
    }

    pub fn from_set(set: CharSet) -> Constraint {
        Constraint(set)
    }

    pub fn dom(&self) -> &CharSet {
        &self.0
    }

    pub fn is_ff(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_tt(&self) -> bool {
        self.0.is_full()
    }

    pub fn conj(&self, other: &Constraint) -> Constraint {
        Constraint(self.0.intersect(&other.0))
    }

    /// `self ⊢ other`: every character allowed here is allowed by `other`.
    pub fn entails(&self, other: &Constraint) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn allows(&self, c: char) -> bool {
        self.0.contains(c)
    }

    /// Excluded characters when the constraint is co-finite.
    pub fn excluded(&self) -> Option<CharSet> {
        self.0.is_cofinite().then(|| self.0.complement())
    }
}

pub fn conj(c: &Constraint, d: &Constraint) -> Constraint {
    c.conj(d)
}

fn quoted(c: char) -> String {
    let mut s = String::from("\"");
    escape_char(c, '"', &mut s);
    s.push('"');
    s
}

/// Splits a set into built-in classes and leftover characters or ranges,
/// each printed as an atom, ordered by smallest member.
fn atoms(set: &CharSet) -> Vec<String> {
    let mut rest = set.clone();
    let mut found: Vec<(char, String)> = Vec::new();
    let mut classes: Vec<(&str, CharSet)> = BUILTIN_CLASSES
        .iter()
        .map(|(n, _)| (*n, builtin_class(n).unwrap()))
        .collect();
    classes.sort_by_key(|(_, s)| std::cmp::Reverse(s.len()));
    for (name, cls) in classes {
        if cls.is_subset(&rest) {
            rest = rest.difference(&cls);
            found.push((cls.ranges().next().unwrap().0, name.to_string()));
        }
    }
    for (lo, hi) in rest.ranges() {
        let text = if lo == hi {
            quoted(lo)
        } else {
            CharSet::range(lo, hi).to_string()
        };
        found.push((lo, text));
    }
    found.sort();
    found.into_iter().map(|(_, t)| t).collect()
}

fn simple_atom(set: &CharSet) -> Option<String> {
    if let Some(c) = set.as_single() {
        return Some(quoted(c));
    }
    crate::grammar::builtin_name_of(set)
        .filter(|n| *n != "[.]")
        .map(str::to_string)
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = &self.0;
        if set.is_empty() {
            return f.write_str("ff");
        }
        if set.is_full() {
            return f.write_str("tt");
        }
        if let Some(a) = simple_atom(set) {
            return f.write_str(&a);
        }
        let excluded = set.complement();
        if set.is_cofinite() {
            if let Some(a) = simple_atom(&excluded) {
                return write!(f, "~{a}");
            }
            let parts: Vec<String> = atoms(&excluded).into_iter().map(|a| format!("~{a}")).collect();
            return write!(f, "({})", parts.join(" /\\ "));
        }
        write!(f, "{set}")
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Sequence of constraints. If any position is `ff` the whole string
/// collapses to the single element `ff`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstrainedString(Vec<Constraint>);

impl ConstrainedString {
    pub fn new(cells: Vec<Constraint>) -> ConstrainedString {
        if cells.iter().any(Constraint::is_ff) {
            ConstrainedString(vec![Constraint::ff()])
        } else {
            ConstrainedString(cells)
        }
    }

    /// `tt^n`
    pub fn top(n: usize) -> ConstrainedString {
        ConstrainedString(vec![Constraint::tt(); n])
    }

    pub fn ff() -> ConstrainedString {
        ConstrainedString(vec![Constraint::ff()])
    }

    pub fn is_ff(&self) -> bool {
        self.0.len() == 1 && self.0[0].is_ff()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn cells(&self) -> &[Constraint] {
        &self.0
    }

    pub fn concat(&self, other: &ConstrainedString) -> ConstrainedString {
        if self.is_ff() || other.is_ff() {
            return ConstrainedString::ff();
        }
        ConstrainedString(self.0.iter().chain(other.0.iter()).cloned().collect())
    }

    /// `x ⪯ s`: same length and every character allowed at its position.
    pub fn admits(&self, x: &str) -> bool {
        !self.is_ff() && x.chars().count() == self.0.len() && x.chars().zip(&self.0).all(|(c, k)| k.allows(c))
    }
}

/// Element-wise conjunction. Panics when lengths differ, unless one side
/// has already collapsed to `ff`.
pub fn pointwise_conj(xs: &ConstrainedString, ys: &ConstrainedString) -> ConstrainedString {
    if xs.is_ff() || ys.is_ff() {
        return ConstrainedString::ff();
    }
    assert_eq!(xs.len(), ys.len(), "pointwise_conj on strings of different length");
    ConstrainedString::new(xs.0.iter().zip(&ys.0).map(|(a, b)| a.conj(b)).collect())
}

impl fmt::Display for ConstrainedString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("eps");
        }
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(" . "))
    }
}

impl fmt::Debug for ConstrainedString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymKind {
    Ok,
    Fail,
}

/// Final symbolic state: `consumed :: remaining`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymOutcome {
    pub kind: SymKind,
    pub consumed: ConstrainedString,
    pub remaining: ConstrainedString,
}

impl SymOutcome {
    pub fn full(&self) -> ConstrainedString {
        self.consumed.concat(&self.remaining)
    }

    pub fn is_ok(&self) -> bool {
        self.kind == SymKind::Ok
    }
}

impl fmt::Display for SymOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :: {}", self.consumed, self.remaining)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("symbolic search supports only core operators; found `{0}`")]
    Unsupported(&'static str),
    #[error("more than {limit} solutions")]
    SolutionCapExceeded { limit: usize, partial: Vec<SymOutcome> },
    #[error("a search path exceeded {0} steps")]
    BudgetExceeded(u64),
    #[error("grammar declares no lexical nonterminals")]
    NoTokens,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Cap on returned outcomes.
    pub limit: Option<usize>,
    /// Also return failing outcomes.
    pub include_fail: bool,
    /// Per-path transition budget.
    pub path_budget: u64,
    /// Skip states already seen.
    pub dedup: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            limit: None,
            include_fail: false,
            path_budget: 1_000_000,
            dedup: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum SymFrame<'g> {
    Seq { next: &'g Expr },
    Choice { alt: &'g Expr, saved: usize },
    Star { body: &'g Expr, saved: usize },
    Neg { saved: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum SymControl<'g> {
    Eval(&'g Expr, usize),
    Resolved(SymKind, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct SymState<'g> {
    control: SymControl<'g>,
    stack: Vec<SymFrame<'g>>,
    string: Vec<Constraint>,
    steps: u64,
}

type StateKey = (usize, usize, bool, Vec<(u8, usize, usize)>, Vec<Constraint>);

impl SymState<'_> {
    fn key(&self) -> StateKey {
        let (ptr, pos, resolved) = match self.control {
            SymControl::Eval(e, p) => (e as *const Expr as usize, p, false),
            SymControl::Resolved(k, p) => (k as usize, p, true),
        };
        let frames = self
            .stack
            .iter()
            .map(|f| match *f {
                SymFrame::Seq { next } => (0u8, next as *const Expr as usize, 0),
                SymFrame::Choice { alt, saved } => (1, alt as *const Expr as usize, saved),
                SymFrame::Star { body, saved } => (2, body as *const Expr as usize, saved),
                SymFrame::Neg { saved } => (3, 0, saved),
            })
            .collect();
        (ptr, pos, resolved, frames, self.string.clone())
    }
}

/// Rejects non-core operators in `e` and the rules it can reach.
fn check_core(g: &Grammar, e: &Expr) -> Result<(), SearchError> {
    let mut todo = vec![e];
    let mut seen: HashSet<&str> = HashSet::new();
    while let Some(e) = todo.pop() {
        let mut bad = None;
        e.walk(&mut |s| {
            bad = bad.or(match s {
                Expr::Throw => Some("throw"),
                Expr::Cut => Some("^"),
                Expr::Catch(_) => Some("catch"),
                Expr::Try(_) => Some("try"),
                _ => None,
            })
        });
        if let Some(b) = bad {
            return Err(SearchError::Unsupported(b));
        }
        for n in e.referenced_nonterminals() {
            if seen.insert(n) {
                todo.extend(g.rule(n));
            }
        }
    }
    Ok(())
}

enum Advance<'g> {
    Done(SymState<'g>),
    Branch(SymState<'g>, Option<SymState<'g>>),
}

/// Runs deterministic transitions until the path finishes or branches.
fn advance<'g>(g: &'g Grammar, mut s: SymState<'g>, budget: u64) -> Result<Option<Advance<'g>>, SearchError> {
    use SymControl::*;
    use SymKind::*;
    loop {
        if s.steps >= budget {
            return Err(SearchError::BudgetExceeded(budget));
        }
        s.steps += 1;
        match s.control {
            Resolved(..) if s.stack.is_empty() => {
                s.steps -= 1;
                return Result::Ok(Some(Advance::Done(s)));
            }
            Eval(e, pos) => match e {
                Expr::Empty => s.control = Resolved(Ok, pos),
                Expr::Term(t) => {
                    if pos >= s.string.len() {
                        s.control = Resolved(Fail, pos);
                        continue;
                    }
                    let here = &s.string[pos];
                    let yes = here.conj(&Constraint::atom(t));
                    let no = here.conj(&Constraint::negated(t));
                    let take = |mut st: SymState<'g>, c: Constraint, ctl| {
                        st.string[pos] = c;
                        st.control = ctl;
                        st
                    };
                    return Result::Ok(match (yes.is_ff(), no.is_ff()) {
                        (true, true) => None,
                        (false, true) => {
                            s.control = Resolved(Ok, pos + 1);
                            s.string[pos] = yes;
                            continue;
                        }
                        (true, false) => {
                            s.control = Resolved(Fail, pos);
                            s.string[pos] = no;
                            continue;
                        }
                        (false, false) => {
                            let other = take(s.clone(), no, Resolved(Fail, pos));
                            Some(Advance::Branch(take(s, yes, Resolved(Ok, pos + 1)), Some(other)))
                        }
                    });
                }
                Expr::NonTerm(n) => {
                    s.control = Eval(g.rule(n).expect("grammar invariant: referenced rules exist"), pos)
                }
                Expr::Seq(a, b) => {
                    s.stack.push(SymFrame::Seq { next: b });
                    s.control = Eval(a, pos);
                }
                Expr::Choice(a, b) => {
                    s.stack.push(SymFrame::Choice { alt: b, saved: pos });
                    s.control = Eval(a, pos);
                }
                Expr::Star(a) => {
                    s.stack.push(SymFrame::Star { body: a, saved: pos });
                    s.control = Eval(a, pos);
                }
                Expr::Not(a) => {
                    s.stack.push(SymFrame::Neg { saved: pos });
                    s.control = Eval(a, pos);
                }
                Expr::Throw | Expr::Cut | Expr::Catch(_) | Expr::Try(_) => {
                    unreachable!("checked by check_core")
                }
            },
            Resolved(kind, pos) => {
                let frame = s.stack.pop().expect("non-final state has frames");
                // learned constraints stay in `s.string` across every case
                s.control = match (frame, kind) {
                    (SymFrame::Seq { next }, Ok) => Eval(next, pos),
                    (SymFrame::Seq { .. }, Fail) => Resolved(Fail, pos),
                    (SymFrame::Choice { .. }, Ok) => Resolved(Ok, pos),
                    (SymFrame::Choice { alt, saved }, Fail) => Eval(alt, saved),
                    (SymFrame::Star { body, .. }, Ok) => {
                        s.stack.push(SymFrame::Star { body, saved: pos });
                        Eval(body, pos)
                    }
                    (SymFrame::Star { saved, .. }, Fail) => Resolved(Ok, saved),
                    (SymFrame::Neg { saved }, Ok) => Resolved(Fail, saved),
                    (SymFrame::Neg { saved }, Fail) => Resolved(Ok, saved),
                };
            }
        }
    }
}

/// Breadth-first exploration of `G[e] tt^n`. Returns the distinct final
/// outcomes in canonical order: ok outcomes, plus failing ones when
/// `cfg.include_fail` is set.
pub fn search(g: &Grammar, e: &Expr, n: usize, cfg: SearchConfig) -> Result<Vec<SymOutcome>, SearchError> {
    check_core(g, e)?;
    let mut queue = VecDeque::new();
    let mut seen: HashSet<StateKey> = HashSet::new();
    let mut results: BTreeSet<SymOutcome> = BTreeSet::new();
    queue.push_back(SymState {
        control: SymControl::Eval(e, 0),
        stack: Vec::new(),
        string: vec![Constraint::tt(); n],
        steps: 0,
    });
    while let Some(state) = queue.pop_front() {
        if cfg.dedup && !seen.insert(state.key()) {
            continue;
        }
        match advance(g, state, cfg.path_budget)? {
            None => {}
            Some(Advance::Done(s)) => {
                let SymControl::Resolved(kind, pos) = s.control else {
                    unreachable!()
                };
                if kind == SymKind::Fail && !cfg.include_fail {
                    continue;
                }
                results.insert(SymOutcome {
                    kind,
                    consumed: ConstrainedString::new(s.string[..pos].to_vec()),
                    remaining: ConstrainedString::new(s.string[pos..].to_vec()),
                });
                if let Some(limit) = cfg.limit {
                    if results.len() > limit {
                        return Err(SearchError::SolutionCapExceeded {
                            limit,
                            partial: results.into_iter().take(limit).collect(),
                        });
                    }
                }
            }
            Some(Advance::Branch(a, b)) => {
                queue.push_back(a);
                queue.extend(b);
            }
        }
    }
    Ok(results.into_iter().collect())
}

/// Ok outcomes only, default settings.
pub fn solutions(g: &Grammar, e: &Expr, n: usize) -> Result<Vec<SymOutcome>, SearchError> {
    search(g, e, n, SearchConfig::default())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("more than {cap} instances")]
pub struct CapExceeded {
    pub cap: usize,
    pub partial: Vec<String>,
}

/// All strings over `alphabet` that instantiate `consumed :: remaining`,
/// in lexicographic (code point) order.
pub fn enumerate(s: &SymOutcome, alphabet: &[char], cap: usize) -> Result<Vec<String>, CapExceeded> {
    let full = s.full();
    if full.is_ff() {
        return Ok(Vec::new());
    }
    let mut alpha: Vec<char> = alphabet.to_vec();
    alpha.sort_unstable();
    alpha.dedup();
    let choices: Vec<Vec<char>> = full
        .cells()
        .iter()
        .map(|c| alpha.iter().copied().filter(|&a| c.allows(a)).collect())
        .collect();
    let mut out = Vec::new();
    if choices.iter().any(Vec::is_empty) {
        return Ok(out);
    }
    let mut idx = vec![0usize; choices.len()];
    loop {
        if out.len() == cap {
            return Err(CapExceeded { cap, partial: out });
        }
        out.push(idx.iter().zip(&choices).map(|(&i, cs)| cs[i]).collect());
        // odometer increment, last position fastest
        let mut k = choices.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UtpViolation {
    /// Succeeds consuming at least one character...
    pub first: String,
    /// ...on a string where this token also succeeds.
    pub second: String,
    pub length: usize,
    pub first_outcome: SymOutcome,
    pub second_outcome: SymOutcome,
    pub witness: String,
}

impl fmt::Display for UtpViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "utp-violation: {} and {} both match {:?} (length {}): {} | {}",
            self.first, self.second, self.witness, self.length, self.first_outcome, self.second_outcome
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UtpReport {
    pub bound: usize,
    pub pairs_checked: usize,
    pub violations: Vec<UtpViolation>,
}

impl UtpReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Bounded unique-token-prefix check: for every ordered pair of distinct
/// tokens `(A, B)` and every length up to `n`, looks for a string on which
/// `A` succeeds consuming input while `B` succeeds as well. One witness per
/// pair, at the shortest length found.
pub fn utp_check(g: &Grammar, n: usize) -> Result<UtpReport, SearchError> {
    if g.lexical().is_empty() {
        return Err(SearchError::NoTokens);
    }
    let tokens: Vec<&str> = g.lexical().iter().map(String::as_str).collect();
    let mut outcomes: Vec<Vec<Vec<SymOutcome>>> = Vec::new();
    for t in &tokens {
        let e = Expr::nt(t);
        let mut per_len = Vec::new();
        for m in 0..=n {
            per_len.push(solutions(g, &e, m)?);
        }
        outcomes.push(per_len);
    }
    let mut report = UtpReport {
        bound: n,
        ..UtpReport::default()
    };
    for (i, a) in tokens.iter().enumerate() {
        for (j, b) in tokens.iter().enumerate() {
            if i == j {
                continue;
            }
            report.pairs_checked += 1;
            'lengths: for m in 1..=n {
                for oa in outcomes[i][m].iter().filter(|o| !o.consumed.is_empty()) {
                    for ob in &outcomes[j][m] {
                        let both = pointwise_conj(&oa.full(), &ob.full());
                        if both.is_ff() {
                            continue;
                        }
                        let witness = both
                            .cells()
                            .iter()
                            .map(|c| {
                                g.alphabet()
                                    .and_then(|al| al.iter().copied().find(|&x| c.allows(x)))
                                    .or_else(|| c.dom().sample())
                                    .expect("non-ff constraint has a member")
                            })
                            .collect();
                        report.violations.push(UtpViolation {
                            first: a.to_string(),
                            second: b.to_string(),
                            length: m,
                            first_outcome: oa.clone(),
                            second_outcome: ob.clone(),
                            witness,
                        });
                        break 'lengths;
                    }
                }
            }
        }
    }
    Ok(report)
}
