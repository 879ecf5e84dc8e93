//! Expression AST, grammar container and evaluation outcomes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::charset::{escape_char, CharSet};

/// Built-in character classes, in lookup order.
pub const BUILTIN_CLASSES: &[(&str, &[(char, char)])] = &[
    ("[0-9]", &[('0', '9')]),
    ("[a-z]", &[('a', 'z')]),
    ("[A-Z]", &[('A', 'Z')]),
    ("[a-zA-Z]", &[('a', 'z'), ('A', 'Z')]),
    ("[a-zA-Z0-9_]", &[('a', 'z'), ('A', 'Z'), ('0', '9'), ('_', '_')]),
];

pub fn builtin_class(name: &str) -> Option<CharSet> {
    BUILTIN_CLASSES.iter().find(|(n, _)| *n == name).map(|(_, rs)| {
        rs.iter()
            .fold(CharSet::empty(), |acc, &(lo, hi)| acc.union(&CharSet::range(lo, hi)))
    })
}

/// Name of the built-in class whose domain is exactly `set`, if any.
pub fn builtin_name_of(set: &CharSet) -> Option<&'static str> {
    if set.is_full() {
        return Some("[.]");
    }
    BUILTIN_CLASSES
        .iter()
        .map(|(n, _)| *n)
        .find(|n| builtin_class(n).as_ref() == Some(set))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Terminal {
    Char(char),
    /// A bracket class; `label` is its source spelling, used for display.
    Class { label: String, set: CharSet },
    Any,
}

impl Terminal {
    /// Class terminal with a generated label. Returns `None` for an empty set,
    /// since terminals always have a non-empty domain.
    pub fn class(set: CharSet) -> Option<Terminal> {
        if set.is_empty() {
            return None;
        }
        let label = builtin_name_of(&set)
            .map(str::to_string)
            .unwrap_or_else(|| set.to_string());
        Some(Terminal::Class { label, set })
    }

    pub fn builtin(name: &str) -> Option<Terminal> {
        if name == "[.]" {
            return Some(Terminal::Any);
        }
        builtin_class(name).map(|set| Terminal::Class {
            label: name.to_string(),
            set,
        })
    }

    pub fn dom(&self) -> CharSet {
        match self {
            Terminal::Char(c) => CharSet::single(*c),
            Terminal::Class { set, .. } => set.clone(),
            Terminal::Any => CharSet::full(),
        }
    }

    pub fn matches(&self, c: char) -> bool {
        match self {
            Terminal::Char(t) => *t == c,
            Terminal::Class { set, .. } => set.contains(c),
            Terminal::Any => true,
        }
    }
}

pub fn match_terminal(t: &Terminal, c: char) -> bool {
    t.matches(c)
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Terminal::Char(c) => {
                let mut s = String::from("\"");
                escape_char(*c, '"', &mut s);
                s.push('"');
                f.write_str(&s)
            }
            Terminal::Class { label, .. } => f.write_str(label),
            Terminal::Any => f.write_str("[.]"),
        }
    }
}

/// Core parsing expressions. Derived forms (`&e`, `e?`, `e+`, `check(e)`)
/// are rewritten away before reaching this type; see [`crate::sugar`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Empty,
    Term(Terminal),
    NonTerm(String),
    Seq(Box<Expr>, Box<Expr>),
    Choice(Box<Expr>, Box<Expr>),
    Star(Box<Expr>),
    Not(Box<Expr>),
    Throw,
    Cut,
    Catch(Box<Expr>),
    Try(Box<Expr>),
}

impl Expr {
    pub fn ch(c: char) -> Expr {
        Expr::Term(Terminal::Char(c))
    }

    pub fn any() -> Expr {
        Expr::Term(Terminal::Any)
    }

    pub fn class(name: &str) -> Expr {
        Expr::Term(Terminal::builtin(name).unwrap_or_else(|| panic!("unknown class {name}")))
    }

    pub fn nt(name: &str) -> Expr {
        Expr::NonTerm(name.to_string())
    }

    /// A literal string as a right-nested chain of single characters.
    pub fn lit(s: &str) -> Expr {
        Expr::seq_all(s.chars().map(Expr::ch))
    }

    pub fn seq(a: Expr, b: Expr) -> Expr {
        Expr::Seq(Box::new(a), Box::new(b))
    }

    pub fn choice(a: Expr, b: Expr) -> Expr {
        Expr::Choice(Box::new(a), Box::new(b))
    }

    pub fn star(e: Expr) -> Expr {
        Expr::Star(Box::new(e))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn catch(e: Expr) -> Expr {
        Expr::Catch(Box::new(e))
    }

    pub fn try_(e: Expr) -> Expr {
        Expr::Try(Box::new(e))
    }

    /// Right-nested sequence; an empty iterator gives `Empty`.
    pub fn seq_all<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        let mut items: Vec<Expr> = items.into_iter().collect();
        let Some(mut acc) = items.pop() else {
            return Expr::Empty;
        };
        while let Some(e) = items.pop() {
            acc = Expr::seq(e, acc);
        }
        acc
    }

    /// Right-nested ordered choice. Panics on an empty iterator.
    pub fn choice_all<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        let mut items: Vec<Expr> = items.into_iter().collect();
        let mut acc = items.pop().expect("choice needs at least one alternative");
        while let Some(e) = items.pop() {
            acc = Expr::choice(e, acc);
        }
        acc
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Seq(a, b) | Expr::Choice(a, b) => vec![a, b],
            Expr::Star(e) | Expr::Not(e) | Expr::Catch(e) | Expr::Try(e) => vec![e],
            _ => Vec::new(),
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn contains(&self, pred: impl Fn(&Expr) -> bool) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= pred(e));
        found
    }

    /// Only ε, terminals, nonterminals, sequence, choice, star and negation.
    pub fn is_core(&self) -> bool {
        !self.contains(|e| matches!(e, Expr::Throw | Expr::Cut | Expr::Catch(_) | Expr::Try(_)))
    }

    pub fn has_cut(&self) -> bool {
        self.contains(|e| matches!(e, Expr::Cut))
    }

    pub fn referenced_nonterminals(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::NonTerm(n) = e {
                out.insert(n.as_str());
            }
        });
        out
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Choice(..) => 0,
            Expr::Seq(..) => 1,
            Expr::Not(_) => 2,
            Expr::Star(_) => 3,
            _ => 4,
        }
    }

    fn fmt_at(&self, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.fmt_at(0, f)?;
            return f.write_str(")");
        }
        match self {
            Expr::Empty => f.write_str("eps"),
            Expr::Term(t) => write!(f, "{t}"),
            Expr::NonTerm(n) => f.write_str(n),
            Expr::Seq(a, b) => {
                a.fmt_at(2, f)?;
                f.write_str(" ")?;
                b.fmt_at(1, f)
            }
            Expr::Choice(a, b) => {
                a.fmt_at(1, f)?;
                f.write_str(" / ")?;
                b.fmt_at(0, f)
            }
            Expr::Star(e) => {
                e.fmt_at(4, f)?;
                f.write_str("*")
            }
            Expr::Not(e) => {
                f.write_str("!")?;
                e.fmt_at(2, f)
            }
            Expr::Throw => f.write_str("throw"),
            Expr::Cut => f.write_str("^"),
            Expr::Catch(e) => {
                f.write_str("catch(")?;
                e.fmt_at(0, f)?;
                f.write_str(")")
            }
            Expr::Try(e) => {
                f.write_str("try(")?;
                e.fmt_at(0, f)?;
                f.write_str(")")
            }
        }
    }
}

/// Prints in grammar-file syntax; the output parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(0, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GrammarError {
    #[error("undefined nonterminal `{name}` referenced in {context}")]
    Undefined { name: String, context: String },
    #[error("token `{0}` has no rule")]
    UndefinedToken(String),
    #[error("duplicate rule `{0}`")]
    Duplicate(String),
}

/// A grammar: rules over named nonterminals, the lexical (token) subset and
/// a start expression. Every referenced nonterminal is defined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grammar {
    rules: BTreeMap<String, Expr>,
    lexical: BTreeSet<String>,
    start: Expr,
    alphabet: Option<Vec<char>>,
}

impl Grammar {
    pub fn new<I, S>(rules: I, lexical: BTreeSet<String>, start: Expr) -> Result<Grammar, GrammarError>
    where
        I: IntoIterator<Item = (S, Expr)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (name, e) in rules {
            let name = name.into();
            if map.contains_key(&name) {
                return Err(GrammarError::Duplicate(name));
            }
            map.insert(name, e);
        }
        for tok in &lexical {
            if !map.contains_key(tok) {
                return Err(GrammarError::UndefinedToken(tok.clone()));
            }
        }
        let g = Grammar {
            rules: map,
            lexical,
            start,
            alphabet: None,
        };
        g.check_closed(&g.start, "start expression")?;
        for (name, e) in &g.rules {
            g.check_closed(e, &format!("rule `{name}`"))?;
        }
        Ok(g)
    }

    /// Convenience constructor with no tokens.
    pub fn from_rules<I, S>(rules: I, start: Expr) -> Result<Grammar, GrammarError>
    where
        I: IntoIterator<Item = (S, Expr)>,
        S: Into<String>,
    {
        Grammar::new(rules, BTreeSet::new(), start)
    }

    fn check_closed(&self, e: &Expr, context: &str) -> Result<(), GrammarError> {
        match e
            .referenced_nonterminals()
            .into_iter()
            .find(|n| !self.rules.contains_key(*n))
        {
            Some(name) => Err(GrammarError::Undefined {
                name: name.to_string(),
                context: context.to_string(),
            }),
            None => Ok(()),
        }
    }

    pub fn rule(&self, name: &str) -> Option<&Expr> {
        self.rules.get(name)
    }

    pub fn rules(&self) -> impl Iterator<Item = (&str, &Expr)> {
        self.rules.iter().map(|(n, e)| (n.as_str(), e))
    }

    pub fn lexical(&self) -> &BTreeSet<String> {
        &self.lexical
    }

    pub fn start(&self) -> &Expr {
        &self.start
    }

    pub fn alphabet(&self) -> Option<&[char]> {
        self.alphabet.as_deref()
    }

    pub fn with_alphabet(mut self, alphabet: Vec<char>) -> Grammar {
        self.alphabet = Some(alphabet);
        self
    }

    /// Same rules with a different start expression.
    pub fn with_start(&self, start: Expr) -> Result<Grammar, GrammarError> {
        self.check_closed(&start, "start expression")?;
        Ok(Grammar {
            start,
            ..self.clone()
        })
    }

    /// Maps every rule body and the start expression through `f`.
    pub fn map_exprs(&self, mut f: impl FnMut(&Expr) -> Expr) -> Result<Grammar, GrammarError> {
        let rules: Vec<(String, Expr)> = self.rules.iter().map(|(n, e)| (n.clone(), f(e))).collect();
        let mut g = Grammar::new(rules, self.lexical.clone(), f(&self.start))?;
        g.alphabet = self.alphabet.clone();
        Ok(g)
    }

    pub fn is_core(&self) -> bool {
        self.start.is_core() && self.rules.values().all(Expr::is_core)
    }

    pub fn has_cut(&self) -> bool {
        self.start.has_cut() || self.rules.values().any(Expr::has_cut)
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.lexical.is_empty() {
            let toks: Vec<&str> = self.lexical.iter().map(String::as_str).collect();
            writeln!(f, "%token {}", toks.join(" "))?;
        }
        if let Some(a) = &self.alphabet {
            let mut s = String::new();
            for c in a {
                escape_char(*c, '"', &mut s);
            }
            writeln!(f, "%alphabet \"{s}\"")?;
        }
        writeln!(f, "%start {}", self.start)?;
        for (n, e) in &self.rules {
            writeln!(f, "{n} <- {e} ;")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeKind {
    Success,
    Fail,
    Error,
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutcomeKind::Success => "success",
            OutcomeKind::Fail => "fail",
            OutcomeKind::Error => "error",
        })
    }
}

/// Result of matching an expression. The payload is the byte offset of the
/// unconsumed suffix at the point where the result was decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Success(usize),
    Fail(usize),
    Error(usize),
}

impl Outcome {
    pub fn new(kind: OutcomeKind, pos: usize) -> Outcome {
        match kind {
            OutcomeKind::Success => Outcome::Success(pos),
            OutcomeKind::Fail => Outcome::Fail(pos),
            OutcomeKind::Error => Outcome::Error(pos),
        }
    }

    pub fn kind(&self) -> OutcomeKind {
        match self {
            Outcome::Success(_) => OutcomeKind::Success,
            Outcome::Fail(_) => OutcomeKind::Fail,
            Outcome::Error(_) => OutcomeKind::Error,
        }
    }

    pub fn pos(&self) -> usize {
        match *self {
            Outcome::Success(p) | Outcome::Fail(p) | Outcome::Error(p) => p,
        }
    }

    pub fn rest<'a>(&self, input: &'a str) -> &'a str {
        &input[self.pos()..]
    }

    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success(_))
    }
}
