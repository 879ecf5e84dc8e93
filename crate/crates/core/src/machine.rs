//! Small-step frame machine.
//!
//! The pending semantic operators (`COMP`, `CHOICE`, `STAR`, `STAR^`, `NEG`,
//! `CATCH`, `TRY`) are kept as a stack of frames whose second component is
//! never reduced before the first one resolves, so exactly one transition
//! applies to every non-final state. Each transition is labelled with the
//! rewrite rule it implements.

use std::fmt;

use serde::Serialize;

use crate::grammar::{Expr, Grammar, Outcome, OutcomeKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MachineConfig {
    /// Drop choice frames sitting directly under a `try`.
    pub simplify: bool,
    /// Maximum number of transitions.
    pub budget: u64,
}

impl Default for MachineConfig {
    fn default() -> Self {
        MachineConfig {
            simplify: true,
            budget: 50_000_000,
        }
    }
}

impl MachineConfig {
    pub fn without_simplify(self) -> Self {
        MachineConfig {
            simplify: false,
            ..self
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct StepMetrics {
    /// Expression dispatches: the number of times a constructor is evaluated.
    pub entry_steps: u64,
    /// All transitions, dispatches and frame resolutions alike.
    pub total_steps: u64,
    pub max_stack_depth: usize,
}

impl std::ops::Add for StepMetrics {
    type Output = StepMetrics;

    fn add(self, o: StepMetrics) -> StepMetrics {
        StepMetrics {
            entry_steps: self.entry_steps + o.entry_steps,
            total_steps: self.total_steps + o.total_steps,
            max_stack_depth: self.max_stack_depth.max(o.max_stack_depth),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MachineError {
    #[error("step budget of {0} transitions exceeded")]
    BudgetExceeded(u64),
    #[error("cut at offset {0} has no enclosing choice or star frame")]
    MisplacedCut(usize),
    #[error("machine already reached a final state")]
    Terminated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Empty,
    Terminal12,
    Terminal3,
    NTerm,
    Sequence,
    Choice,
    Star,
    Negative,
    Throw,
    Catch,
    Try,
    ChoiceCut,
    StarCut,
    Seq1,
    Seq2,
    SeqE,
    Choice1,
    Choice2,
    ChoiceE,
    Star1,
    Star2,
    StarE,
    StarCommitNext,
    StarCommitFail,
    StarCommitE,
    Neg1,
    Neg2,
    NegE,
    Catch1,
    Catch2,
    Catch3,
    Try1,
    Try2,
    Try3,
}

impl Rule {
    /// Rewrite-rule label.
    pub fn label(self) -> &'static str {
        use Rule::*;
        match self {
            Empty => "empty",
            Terminal12 => "Terminal12",
            Terminal3 => "Terminal3",
            NTerm => "NTerm",
            Sequence => "Sequence",
            Choice => "Choice",
            Star => "Star",
            Negative => "Negative",
            Throw => "throw",
            Catch => "Catch",
            Try => "Try",
            ChoiceCut => "Choice^",
            StarCut | StarCommitNext | StarCommitFail => "Star^",
            Seq1 => "Seq1",
            Seq2 => "Seq2",
            SeqE => "SeqE",
            Choice1 => "Choice1",
            Choice2 => "Choice2",
            ChoiceE => "ChoiceE",
            Star1 => "Star1",
            Star2 => "Star2",
            StarE | StarCommitE => "StarE",
            Neg1 => "Neg1",
            Neg2 => "Neg2",
            NegE => "NegE",
            Catch1 => "Catch1",
            Catch2 => "Catch2",
            Catch3 => "Catch3",
            Try1 => "Try1",
            Try2 => "Try2",
            Try3 => "Try3",
        }
    }

    /// Whether the transition dispatches on an expression (an entry step).
    pub fn is_entry(self) -> bool {
        use Rule::*;
        matches!(
            self,
            Empty
                | Terminal12
                | Terminal3
                | NTerm
                | Sequence
                | Choice
                | Star
                | Negative
                | Throw
                | Catch
                | Try
                | ChoiceCut
                | StarCut
        )
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub index: u64,
    pub rule: &'static str,
    pub pos: usize,
    pub depth: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame<'g> {
    Seq { next: &'g Expr },
    Choice { alt: &'g Expr, saved: usize },
    Star { body: &'g Expr, saved: usize },
    /// A star iteration that has passed its cut.
    StarCommit { body: &'g Expr },
    Neg { saved: usize },
    Catch,
    Try,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control<'g> {
    Eval(&'g Expr, usize),
    Resolved(OutcomeKind, usize),
}

#[derive(Clone, Debug)]
pub struct MachineState<'g, 'i> {
    grammar: &'g Grammar,
    input: &'i str,
    config: MachineConfig,
    control: Control<'g>,
    stack: Vec<Frame<'g>>,
    metrics: StepMetrics,
}

/// Initial state `G[e] x` with an empty frame stack.
pub fn inject<'g, 'i>(g: &'g Grammar, e: &'g Expr, x: &'i str, cfg: MachineConfig) -> MachineState<'g, 'i> {
    MachineState {
        grammar: g,
        input: x,
        config: cfg,
        control: Control::Eval(e, 0),
        stack: Vec::new(),
        metrics: StepMetrics::default(),
    }
}

impl<'g, 'i> MachineState<'g, 'i> {
    pub fn control(&self) -> Control<'g> {
        self.control
    }

    pub fn stack(&self) -> &[Frame<'g>] {
        &self.stack
    }

    pub fn metrics(&self) -> StepMetrics {
        self.metrics
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self.control, Control::Resolved(..)) && self.stack.is_empty()
    }

    pub fn outcome(&self) -> Option<Outcome> {
        match self.control {
            Control::Resolved(kind, pos) if self.stack.is_empty() => Some(Outcome::new(kind, pos)),
            _ => None,
        }
    }

    fn push(&mut self, f: Frame<'g>) {
        self.stack.push(f);
        self.metrics.max_stack_depth = self.metrics.max_stack_depth.max(self.stack.len());
    }

    /// Performs exactly one transition and returns the rule that fired.
    pub fn step(&mut self) -> Result<Rule, MachineError> {
        if self.is_terminal() {
            return Err(MachineError::Terminated);
        }
        if self.metrics.total_steps >= self.config.budget {
            return Err(MachineError::BudgetExceeded(self.config.budget));
        }
        let rule = match self.control {
            Control::Eval(e, pos) => self.dispatch(e, pos)?,
            Control::Resolved(kind, pos) => self.resolve(kind, pos),
        };
        self.metrics.total_steps += 1;
        if rule.is_entry() {
            self.metrics.entry_steps += 1;
        }
        Ok(rule)
    }

    fn dispatch(&mut self, e: &'g Expr, pos: usize) -> Result<Rule, MachineError> {
        use Control::*;
        let (rule, next) = match e {
            Expr::Empty => (Rule::Empty, Resolved(OutcomeKind::Success, pos)),
            Expr::Term(t) => match self.input[pos..].chars().next() {
                Some(c) if t.matches(c) => (
                    Rule::Terminal12,
                    Resolved(OutcomeKind::Success, pos + c.len_utf8()),
                ),
                Some(_) => (Rule::Terminal12, Resolved(OutcomeKind::Fail, pos)),
                None => (Rule::Terminal3, Resolved(OutcomeKind::Fail, pos)),
            },
            Expr::NonTerm(n) => {
                let body = self
                    .grammar
                    .rule(n)
                    .expect("grammar invariant: referenced rules exist");
                (Rule::NTerm, Eval(body, pos))
            }
            Expr::Seq(a, b) => {
                self.push(Frame::Seq { next: b });
                (Rule::Sequence, Eval(a, pos))
            }
            Expr::Choice(a, b) => {
                self.push(Frame::Choice { alt: b, saved: pos });
                (Rule::Choice, Eval(a, pos))
            }
            Expr::Star(a) => {
                self.push(Frame::Star { body: a, saved: pos });
                (Rule::Star, Eval(a, pos))
            }
            Expr::Not(a) => {
                self.push(Frame::Neg { saved: pos });
                (Rule::Negative, Eval(a, pos))
            }
            Expr::Throw => (Rule::Throw, Resolved(OutcomeKind::Error, pos)),
            Expr::Catch(a) => {
                self.push(Frame::Catch);
                (Rule::Catch, Eval(a, pos))
            }
            Expr::Try(a) => {
                if self.config.simplify {
                    // CHOICE(TRY(S), S') = TRY(S), repeatedly
                    while matches!(self.stack.last(), Some(Frame::Choice { .. })) {
                        self.stack.pop();
                    }
                }
                self.push(Frame::Try);
                (Rule::Try, Eval(a, pos))
            }
            Expr::Cut => {
                let target = self
                    .stack
                    .iter()
                    .rposition(|f| matches!(f, Frame::Choice { .. } | Frame::Star { .. }))
                    .ok_or(MachineError::MisplacedCut(pos))?;
                let rule = match self.stack[target] {
                    Frame::Choice { .. } => {
                        self.stack.remove(target);
                        Rule::ChoiceCut
                    }
                    Frame::Star { body, .. } => {
                        self.stack[target] = Frame::StarCommit { body };
                        Rule::StarCut
                    }
                    _ => unreachable!(),
                };
                (rule, Resolved(OutcomeKind::Success, pos))
            }
        };
        self.control = next;
        Ok(rule)
    }

    fn resolve(&mut self, kind: OutcomeKind, pos: usize) -> Rule {
        use Control::*;
        use OutcomeKind::*;
        let frame = self.stack.pop().expect("resolve is only called with pending frames");
        let (rule, next) = match (frame, kind) {
            (Frame::Seq { next }, Success) => (Rule::Seq1, Eval(next, pos)),
            (Frame::Seq { .. }, Fail) => (Rule::Seq2, Resolved(Fail, pos)),
            (Frame::Seq { .. }, Error) => (Rule::SeqE, Resolved(Error, pos)),

            (Frame::Choice { .. }, Success) => (Rule::Choice1, Resolved(Success, pos)),
            (Frame::Choice { alt, saved }, Fail) => (Rule::Choice2, Eval(alt, saved)),
            (Frame::Choice { .. }, Error) => (Rule::ChoiceE, Resolved(Error, pos)),

            (Frame::Star { body, .. }, Success) => {
                self.push(Frame::Star { body, saved: pos });
                (Rule::Star2, Eval(body, pos))
            }
            (Frame::Star { saved, .. }, Fail) => (Rule::Star1, Resolved(Success, saved)),
            (Frame::Star { .. }, Error) => (Rule::StarE, Resolved(Error, pos)),

            (Frame::StarCommit { body }, Success) => {
                self.push(Frame::Star { body, saved: pos });
                (Rule::StarCommitNext, Eval(body, pos))
            }
            (Frame::StarCommit { .. }, Fail) => (Rule::StarCommitFail, Resolved(Fail, pos)),
            (Frame::StarCommit { .. }, Error) => (Rule::StarCommitE, Resolved(Error, pos)),

            (Frame::Neg { saved }, Success) => (Rule::Neg2, Resolved(Fail, saved)),
            (Frame::Neg { saved }, Fail) => (Rule::Neg1, Resolved(Success, saved)),
            (Frame::Neg { saved }, Error) => (Rule::NegE, Resolved(Success, saved)),

            (Frame::Catch, Success) => (Rule::Catch1, Resolved(Success, pos)),
            (Frame::Catch, Fail) => (Rule::Catch2, Resolved(Fail, pos)),
            (Frame::Catch, Error) => (Rule::Catch3, Resolved(Fail, pos)),

            (Frame::Try, Success) => (Rule::Try1, Resolved(Success, pos)),
            (Frame::Try, Fail) => (Rule::Try2, Resolved(Error, pos)),
            (Frame::Try, Error) => (Rule::Try3, Resolved(Error, pos)),
        };
        self.control = next;
        rule
    }

    fn position(&self) -> usize {
        match self.control {
            Control::Eval(_, p) | Control::Resolved(_, p) => p,
        }
    }

    /// Steps to a final state.
    pub fn run(mut self) -> Result<(Outcome, StepMetrics), MachineError> {
        while !self.is_terminal() {
            self.step()?;
        }
        Ok((self.outcome().expect("terminal"), self.metrics))
    }

    /// Steps to a final state, recording one entry per transition. The
    /// position and depth are taken after the transition.
    pub fn run_traced(mut self) -> Result<(Outcome, StepMetrics, Vec<TraceRecord>), MachineError> {
        let mut trace = Vec::new();
        while !self.is_terminal() {
            let rule = self.step()?;
            trace.push(TraceRecord {
                index: self.metrics.total_steps - 1,
                rule: rule.label(),
                pos: self.position(),
                depth: self.stack.len(),
            });
        }
        Ok((self.outcome().expect("terminal"), self.metrics, trace))
    }
}

pub fn run(g: &Grammar, e: &Expr, x: &str, cfg: MachineConfig) -> Result<(Outcome, StepMetrics), MachineError> {
    inject(g, e, x, cfg).run()
}

pub fn run_traced(
    g: &Grammar,
    e: &Expr,
    x: &str,
    cfg: MachineConfig,
) -> Result<(Outcome, StepMetrics, Vec<TraceRecord>), MachineError> {
    inject(g, e, x, cfg).run_traced()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_grammar;

    fn empty_grammar() -> Grammar {
        Grammar::from_rules(Vec::<(String, Expr)>::new(), Expr::Empty).unwrap()
    }

    fn outcome(g: &Grammar, e: &Expr, x: &str) -> Outcome {
        run(g, e, x, MachineConfig::default()).unwrap().0
    }

    #[test]
    fn inject_and_run() {
        let g = empty_grammar();
        let s = inject(&g, &Expr::Empty, "ab", MachineConfig::default());
        assert_eq!(s.control(), Control::Eval(&Expr::Empty, 0));
        assert!(s.stack().is_empty());
        assert_eq!(s.metrics(), StepMetrics::default());
        assert_eq!(s.run().unwrap().0, Outcome::Success(0));
        assert_eq!(outcome(&g, &Expr::ch('a'), ""), Outcome::Fail(0));
        assert_eq!(outcome(&g, &Expr::ch('a'), "ab"), Outcome::Success(1));
    }

    #[test]
    fn four_entry_steps() {
        let g = Grammar::from_rules([("A", Expr::ch('a'))], Expr::seq(Expr::nt("A"), Expr::ch('b'))).unwrap();
        let (o, m, trace) = run_traced(&g, g.start(), "ab", MachineConfig::default()).unwrap();
        assert_eq!(o, Outcome::Success(2));
        assert_eq!(m.entry_steps, 4);
        let rules: Vec<&str> = trace.iter().map(|t| t.rule).collect();
        assert_eq!(rules, ["Sequence", "NTerm", "Terminal12", "Seq1", "Terminal12"]);
        assert_eq!(m.total_steps, 5);
        assert_eq!(m.max_stack_depth, 1);
    }

    #[test]
    fn cut_in_star_commits_iteration() {
        let g = empty_grammar();
        let plain = Expr::star(Expr::seq(Expr::ch('a'), Expr::ch('b')));
        assert_eq!(outcome(&g, &plain, "abac"), Outcome::Success(2));
        let cut = Expr::star(Expr::seq_all([Expr::ch('a'), Expr::Cut, Expr::ch('b')]));
        assert_eq!(outcome(&g, &cut, "abac").kind(), OutcomeKind::Fail);
        assert_eq!(outcome(&g, &cut, "ababx"), Outcome::Success(4));
        assert_eq!(outcome(&g, &cut, ""), Outcome::Success(0));
    }

    #[test]
    fn cut_in_choice_discards_alternative() {
        let g = empty_grammar();
        let cut = Expr::choice(
            Expr::seq_all([Expr::ch('a'), Expr::Cut, Expr::ch('b')]),
            Expr::seq(Expr::ch('a'), Expr::ch('c')),
        );
        assert_eq!(outcome(&g, &cut, "ac").kind(), OutcomeKind::Fail);
        let plain = Expr::choice(
            Expr::seq(Expr::ch('a'), Expr::ch('b')),
            Expr::seq(Expr::ch('a'), Expr::ch('c')),
        );
        assert_eq!(outcome(&g, &plain, "ac"), Outcome::Success(2));
    }

    #[test]
    fn try_in_choice() {
        let g = empty_grammar();
        let e = Expr::choice(Expr::try_(Expr::seq(Expr::ch('a'), Expr::ch('b'))), Expr::ch('c'));
        for cfg in [MachineConfig::default(), MachineConfig::default().without_simplify()] {
            let (o, _) = run(&g, &e, "ad", cfg).unwrap();
            assert_eq!(o, Outcome::Error(1));
            assert_eq!(o.rest("ad"), "d");
        }
    }

    #[test]
    fn simplify_drops_choice_frames() {
        let g = empty_grammar();
        let inner = Expr::try_(Expr::seq_all([Expr::ch('a'), Expr::ch('b'), Expr::ch('c')]));
        let e = Expr::choice(Expr::choice(inner, Expr::ch('x')), Expr::ch('y'));
        let (on_o, on) = run(&g, &e, "abc", MachineConfig::default()).unwrap();
        let (off_o, off) = run(&g, &e, "abc", MachineConfig::default().without_simplify()).unwrap();
        assert_eq!(on_o, off_o);
        assert_eq!(off.max_stack_depth, 4);
        assert_eq!(on.max_stack_depth, 2);
        assert!(on.total_steps < off.total_steps);
    }

    #[test]
    fn budget_exceeded() {
        let g = parse_grammar("%start \"a\"*").unwrap();
        let cfg = MachineConfig {
            budget: 10,
            ..MachineConfig::default()
        };
        assert_eq!(
            run(&g, g.start(), &"a".repeat(100), cfg),
            Err(MachineError::BudgetExceeded(10))
        );
    }

    #[test]
    fn misplaced_cut_reported() {
        let g = empty_grammar();
        assert_eq!(
            run(&g, &Expr::seq(Expr::Cut, Expr::ch('a')), "a", MachineConfig::default()),
            Err(MachineError::MisplacedCut(0))
        );
    }

    #[test]
    fn stepping_a_final_state() {
        let g = empty_grammar();
        let mut s = inject(&g, &Expr::Empty, "", MachineConfig::default());
        assert_eq!(s.step(), Ok(Rule::Empty));
        assert!(s.is_terminal());
        assert_eq!(s.step(), Err(MachineError::Terminated));
    }
}
