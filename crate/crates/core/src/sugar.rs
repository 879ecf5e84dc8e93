//! Surface syntax with derived operators, and its rewriting into [`Expr`].

use crate::grammar::{Expr, Terminal};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceExpr {
    Empty,
    Term(Terminal),
    /// Multi-character literal; `""` means ε.
    Literal(String),
    NonTerm(String),
    Seq(Box<SurfaceExpr>, Box<SurfaceExpr>),
    Choice(Box<SurfaceExpr>, Box<SurfaceExpr>),
    Star(Box<SurfaceExpr>),
    Not(Box<SurfaceExpr>),
    And(Box<SurfaceExpr>),
    Opt(Box<SurfaceExpr>),
    Plus(Box<SurfaceExpr>),
    Check(Box<SurfaceExpr>),
    Throw,
    Cut,
    Catch(Box<SurfaceExpr>),
    Try(Box<SurfaceExpr>),
}

/// Rewrites derived operators:
/// `&e → !!e`, `e? → e / ε`, `e+ → e e*`, `check(e) → e / throw`,
/// and a literal `"ab"` into the chain `"a" "b"`.
pub fn desugar(e: &SurfaceExpr) -> Expr {
    use SurfaceExpr as S;
    let d = |b: &SurfaceExpr| Box::new(desugar(b));
    match e {
        S::Empty => Expr::Empty,
        S::Term(t) => Expr::Term(t.clone()),
        S::Literal(s) => Expr::lit(s),
        S::NonTerm(n) => Expr::NonTerm(n.clone()),
        S::Seq(a, b) => Expr::Seq(d(a), d(b)),
        S::Choice(a, b) => Expr::Choice(d(a), d(b)),
        S::Star(b) => Expr::Star(d(b)),
        S::Not(b) => Expr::Not(d(b)),
        S::And(b) => Expr::not(Expr::Not(d(b))),
        S::Opt(b) => Expr::Choice(d(b), Box::new(Expr::Empty)),
        S::Plus(b) => {
            let body = desugar(b);
            Expr::seq(body.clone(), Expr::star(body))
        }
        S::Check(b) => Expr::Choice(d(b), Box::new(Expr::Throw)),
        S::Throw => Expr::Throw,
        S::Cut => Expr::Cut,
        S::Catch(b) => Expr::Catch(d(b)),
        S::Try(b) => Expr::Try(d(b)),
    }
}

impl From<&Expr> for SurfaceExpr {
    fn from(e: &Expr) -> SurfaceExpr {
        use SurfaceExpr as S;
        let l = |b: &Expr| Box::new(SurfaceExpr::from(b));
        match e {
            Expr::Empty => S::Empty,
            Expr::Term(t) => S::Term(t.clone()),
            Expr::NonTerm(n) => S::NonTerm(n.clone()),
            Expr::Seq(a, b) => S::Seq(l(a), l(b)),
            Expr::Choice(a, b) => S::Choice(l(a), l(b)),
            Expr::Star(b) => S::Star(l(b)),
            Expr::Not(b) => S::Not(l(b)),
            Expr::Throw => S::Throw,
            Expr::Cut => S::Cut,
            Expr::Catch(b) => S::Catch(l(b)),
            Expr::Try(b) => S::Try(l(b)),
        }
    }
}
