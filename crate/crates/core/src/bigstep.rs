//! Reference interpreter: one recursive case per natural-semantics rule.
//!
//! Failures and errors carry the position where they were decided, so the
//! result can be compared with [`crate::machine`] in kind and suffix.

use crate::grammar::{Expr, Grammar, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalBudget {
    pub max_steps: u64,
}

impl Default for EvalBudget {
    fn default() -> Self {
        EvalBudget {
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("step budget of {0} rule applications exceeded")]
    BudgetExceeded(u64),
    #[error("the cut operator has no big-step rule; use the machine")]
    UnsupportedCut,
}

struct Interp<'g, 'i> {
    grammar: &'g Grammar,
    input: &'i str,
    steps: u64,
    max_steps: u64,
}

impl Interp<'_, '_> {
    fn tick(&mut self) -> Result<(), EvalError> {
        self.steps += 1;
        if self.steps > self.max_steps {
            Err(EvalError::BudgetExceeded(self.max_steps))
        } else {
            Ok(())
        }
    }

    fn eval(&mut self, e: &Expr, pos: usize) -> Result<Outcome, EvalError> {
        use Outcome::*;
        self.tick()?;
        Ok(match e {
            // empty
            Expr::Empty => Success(pos),
            // var
            Expr::NonTerm(n) => {
                let body = self
                    .grammar
                    .rule(n)
                    .expect("grammar invariant: referenced rules exist");
                self.eval(body, pos)?
            }
            // term.1 / term.2 / term.3
            Expr::Term(t) => match self.input[pos..].chars().next() {
                Some(c) if t.matches(c) => Success(pos + c.len_utf8()),
                _ => Fail(pos),
            },
            // seq.1 / seq.2 / seq.3
            Expr::Seq(a, b) => match self.eval(a, pos)? {
                Success(y) => self.eval(b, y)?,
                other => other,
            },
            // ord.1 / ord.2 / ord.3
            Expr::Choice(a, b) => match self.eval(a, pos)? {
                Fail(_) => self.eval(b, pos)?,
                other => other,
            },
            // not.1 / not.2 / not.3
            Expr::Not(a) => match self.eval(a, pos)? {
                Success(_) => Fail(pos),
                Fail(_) | Error(_) => Success(pos),
            },
            // rep.1 / rep.2 / rep.3, with the rep.2 recursion unrolled
            Expr::Star(a) => {
                let mut cur = pos;
                loop {
                    match self.eval(a, cur)? {
                        Success(y) => {
                            self.tick()?;
                            cur = y;
                        }
                        Fail(_) => break Success(cur),
                        Error(p) => break Error(p),
                    }
                }
            }
            // throw
            Expr::Throw => Error(pos),
            // catch.1 / catch.2 / catch.3
            Expr::Catch(a) => match self.eval(a, pos)? {
                Error(p) => Fail(p),
                other => other,
            },
            // try.1 / try.2 / try.3
            Expr::Try(a) => match self.eval(a, pos)? {
                Fail(p) => Error(p),
                other => other,
            },
            Expr::Cut => return Err(EvalError::UnsupportedCut),
        })
    }
}

/// Evaluates `e` against `input` in the context of `g`.
pub fn eval(g: &Grammar, e: &Expr, input: &str, budget: EvalBudget) -> Result<Outcome, EvalError> {
    Interp {
        grammar: g,
        input,
        steps: 0,
        max_steps: budget.max_steps,
    }
    .eval(e, 0)
}

/// Prefix acceptance: the start expression succeeds on `input`.
pub fn accepts(g: &Grammar, input: &str) -> Result<bool, EvalError> {
    eval(g, g.start(), input, EvalBudget::default()).map(|o| o.is_success())
}
