//! Grammar file reader.
//!
//! ```text
//! # comment
//! %token ID NUM
//! %alphabet "abc"
//! %start S !.
//! S  <- ID ("," ID)* / check(NUM) ;
//! ID <- [a-z]+ ;
//! ```
//!
//! Directives run to the end of their line. Rules end with `;`.

use std::collections::BTreeSet;
use std::fmt;

use crate::charset::CharSet;
use crate::grammar::{Grammar, GrammarError, Terminal};
use crate::sugar::{desugar, SurfaceExpr};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoadError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("invalid grammar: {0}")]
    Grammar(#[from] GrammarError),
}

const KEYWORDS: &[&str] = &["eps", "throw", "check", "catch", "try"];

/// Surface form of a grammar file, before desugaring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarFile {
    pub rules: Vec<(String, SurfaceExpr)>,
    pub tokens: Vec<String>,
    pub alphabet: Option<Vec<char>>,
    pub start: SurfaceExpr,
}

impl GrammarFile {
    pub fn into_grammar(self) -> Result<Grammar, GrammarError> {
        let tokens: BTreeSet<String> = self.tokens.into_iter().collect();
        let g = Grammar::new(
            self.rules.iter().map(|(n, e)| (n.clone(), desugar(e))),
            tokens,
            desugar(&self.start),
        )?;
        Ok(match self.alphabet {
            Some(a) => g.with_alphabet(a),
            None => g,
        })
    }
}

pub fn parse_grammar(src: &str) -> Result<Grammar, LoadError> {
    Ok(parse_grammar_file(src)?.into_grammar()?)
}

pub fn parse_grammar_file(src: &str) -> Result<GrammarFile, SyntaxError> {
    Parser::new(src).file()
}

/// Parses a single expression (no directives, no rules).
pub fn parse_expr(src: &str) -> Result<SurfaceExpr, SyntaxError> {
    let mut p = Parser::new(src);
    let e = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    line_mode: bool,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Parser<'a> {
        Parser {
            src,
            pos: 0,
            line_mode: false,
        }
    }

    fn error(&self, message: impl Into<String>) -> SyntaxError {
        let before = &self.src[..self.pos];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        SyntaxError {
            line,
            col,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            match c {
                '\n' if self.line_mode => return,
                c if c.is_whitespace() => {
                    self.bump();
                }
                '#' => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`")))
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return None,
        }
        let end = chars
            .find(|&(_, c)| !(c.is_ascii_alphanumeric() || c == '_' || c == '-'))
            .map_or(rest.len(), |(i, _)| i);
        self.pos += end;
        Some(&rest[..end])
    }

    fn file(&mut self) -> Result<GrammarFile, SyntaxError> {
        let mut rules: Vec<(String, SurfaceExpr)> = Vec::new();
        let mut tokens = Vec::new();
        let mut alphabet = None;
        let mut start = None;
        loop {
            self.skip_ws();
            if self.at_end() {
                break;
            }
            if self.rest().starts_with('%') {
                let dir_pos = self.pos;
                self.bump();
                let name = self.ident().ok_or_else(|| self.error("expected directive name"))?;
                self.line_mode = true;
                match name {
                    "start" => {
                        if start.is_some() {
                            self.pos = dir_pos;
                            return Err(self.error("duplicate %start"));
                        }
                        let e = self.expr()?;
                        self.eat(";");
                        start = Some(e);
                    }
                    "token" => {
                        while let Some(t) = self.ident() {
                            tokens.push(t.to_string());
                        }
                    }
                    "alphabet" => {
                        self.skip_ws();
                        if self.peek() != Some('"') {
                            return Err(self.error("expected quoted alphabet"));
                        }
                        let s = self.quoted('"')?;
                        alphabet = Some(s.chars().collect());
                    }
                    other => {
                        self.pos = dir_pos;
                        return Err(self.error(format!("unknown directive %{other}")));
                    }
                }
                self.skip_ws();
                if !(self.at_end() || self.peek() == Some('\n')) {
                    return Err(self.error("unexpected input after directive"));
                }
                self.line_mode = false;
                continue;
            }
            let rule_pos = self.pos;
            let name = self.ident().ok_or_else(|| self.error("expected rule name or directive"))?;
            if KEYWORDS.contains(&name) {
                self.pos = rule_pos;
                return Err(self.error(format!("`{name}` is reserved")));
            }
            if rules.iter().any(|(n, _)| n == name) {
                self.pos = rule_pos;
                return Err(self.error(format!("duplicate rule `{name}`")));
            }
            self.expect("<-")?;
            let body = self.expr()?;
            self.expect(";")?;
            rules.push((name.to_string(), body));
        }
        let start = start.ok_or_else(|| self.error("missing %start directive"))?;
        Ok(GrammarFile {
            rules,
            tokens,
            alphabet,
            start,
        })
    }

    fn expr(&mut self) -> Result<SurfaceExpr, SyntaxError> {
        let mut alts = vec![self.sequence()?];
        while self.eat("/") {
            alts.push(self.sequence()?);
        }
        let mut acc = alts.pop().unwrap();
        while let Some(e) = alts.pop() {
            acc = SurfaceExpr::Choice(Box::new(e), Box::new(acc));
        }
        Ok(acc)
    }

    fn starts_item(&mut self) -> bool {
        self.skip_ws();
        let Some(c) = self.peek() else { return false };
        if c.is_ascii_alphabetic() || c == '_' {
            // a following `Name <-` begins the next rule, not this sequence
            let save = self.pos;
            let _ = self.ident();
            let is_rule = self.rest().trim_start().starts_with("<-");
            self.pos = save;
            return !is_rule;
        }
        matches!(c, '"' | '\'' | '[' | '(' | '!' | '&' | '^' | '.')
    }

    fn sequence(&mut self) -> Result<SurfaceExpr, SyntaxError> {
        let mut items = Vec::new();
        while self.starts_item() {
            items.push(self.prefix()?);
        }
        if items.is_empty() {
            return Err(self.error("expected expression"));
        }
        let mut acc = items.pop().unwrap();
        while let Some(e) = items.pop() {
            acc = SurfaceExpr::Seq(Box::new(e), Box::new(acc));
        }
        Ok(acc)
    }

    fn prefix(&mut self) -> Result<SurfaceExpr, SyntaxError> {
        if self.eat("!") {
            return Ok(SurfaceExpr::Not(Box::new(self.prefix()?)));
        }
        if self.eat("&") {
            return Ok(SurfaceExpr::And(Box::new(self.prefix()?)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<SurfaceExpr, SyntaxError> {
        let mut e = self.atom()?;
        loop {
            // no whitespace skipping across lines in directive mode is handled by skip_ws
            if self.eat("*") {
                e = SurfaceExpr::Star(Box::new(e));
            } else if self.eat("+") {
                e = SurfaceExpr::Plus(Box::new(e));
            } else if self.eat("?") {
                e = SurfaceExpr::Opt(Box::new(e));
            } else {
                return Ok(e);
            }
        }
    }

    fn atom(&mut self) -> Result<SurfaceExpr, SyntaxError> {
        self.skip_ws();
        match self.peek() {
            Some(q @ ('"' | '\'')) => {
                let s = self.quoted(q)?;
                Ok(SurfaceExpr::Literal(s))
            }
            Some('[') => self.class(),
            Some('.') => {
                self.bump();
                Ok(SurfaceExpr::Term(Terminal::Any))
            }
            Some('^') => {
                self.bump();
                Ok(SurfaceExpr::Cut)
            }
            Some('(') => {
                self.bump();
                let saved = self.line_mode;
                self.line_mode = false;
                let e = self.expr()?;
                self.expect(")")?;
                self.line_mode = saved;
                Ok(e)
            }
            _ => {
                let at = self.pos;
                let Some(name) = self.ident() else {
                    return Err(self.error("expected expression"));
                };
                let wrap: Option<fn(Box<SurfaceExpr>) -> SurfaceExpr> = match name {
                    "eps" => return Ok(SurfaceExpr::Empty),
                    "throw" => return Ok(SurfaceExpr::Throw),
                    "check" => Some(SurfaceExpr::Check),
                    "catch" => Some(SurfaceExpr::Catch),
                    "try" => Some(SurfaceExpr::Try),
                    _ => None,
                };
                match wrap {
                    Some(w) => {
                        if !self.rest().starts_with('(') {
                            self.pos = at;
                            return Err(self.error(format!("`{name}` needs a parenthesized argument")));
                        }
                        self.bump();
                        let saved = self.line_mode;
                        self.line_mode = false;
                        let e = self.expr()?;
                        self.expect(")")?;
                        self.line_mode = saved;
                        Ok(w(Box::new(e)))
                    }
                    None => Ok(SurfaceExpr::NonTerm(name.to_string())),
                }
            }
        }
    }

    fn escape(&mut self) -> Result<char, SyntaxError> {
        match self.bump() {
            Some('n') => Ok('\n'),
            Some('t') => Ok('\t'),
            Some('r') => Ok('\r'),
            Some('x') => {
                let hex: String = (0..2).filter_map(|_| self.bump()).collect();
                u32::from_str_radix(&hex, 16)
                    .ok()
                    .filter(|_| hex.len() == 2)
                    .and_then(char::from_u32)
                    .ok_or_else(|| self.error("bad \\x escape"))
            }
            Some(c) => Ok(c),
            None => Err(self.error("unterminated escape")),
        }
    }

    fn quoted(&mut self, q: char) -> Result<String, SyntaxError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.error("unterminated literal")),
                Some('\\') => s.push(self.escape()?),
                Some(c) if c == q => return Ok(s),
                Some(c) => s.push(c),
            }
        }
    }

    fn class_char(&mut self) -> Result<char, SyntaxError> {
        match self.bump() {
            Some('\\') => self.escape(),
            Some(c) => Ok(c),
            None => Err(self.error("unterminated class")),
        }
    }

    fn class(&mut self) -> Result<SurfaceExpr, SyntaxError> {
        let start = self.pos;
        self.bump();
        if self.rest().starts_with(".]") {
            self.pos += 2;
            return Ok(SurfaceExpr::Term(Terminal::Any));
        }
        let negated = self.rest().starts_with('^');
        if negated {
            self.bump();
        }
        let mut set = CharSet::empty();
        loop {
            match self.peek() {
                None | Some('\n') => return Err(self.error("unterminated class")),
                Some(']') => {
                    self.bump();
                    break;
                }
                _ => {
                    let lo = self.class_char()?;
                    if self.rest().starts_with('-') && !self.rest().starts_with("-]") {
                        self.bump();
                        let hi = self.class_char()?;
                        if hi < lo {
                            return Err(self.error("inverted range in class"));
                        }
                        set = set.union(&CharSet::range(lo, hi));
                    } else {
                        set = set.union(&CharSet::single(lo));
                    }
                }
            }
        }
        if negated {
            set = set.complement();
        }
        let label = self.src[start..self.pos].to_string();
        if set.is_empty() {
            self.pos = start;
            return Err(self.error("empty character class"));
        }
        Ok(SurfaceExpr::Term(Terminal::Class { label, set }))
    }
}

impl fmt::Display for GrammarFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.clone().into_grammar() {
            Ok(g) => write!(f, "{g}"),
            Err(e) => write!(f, "# {e}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::Expr;

    #[test]
    fn small_grammar() {
        let g = parse_grammar(
            "# two rules\n%start A B\nA <- \"a\" ;\nB <- 'b' ;\n",
        )
        .unwrap();
        assert_eq!(g.start(), &Expr::seq(Expr::nt("A"), Expr::nt("B")));
        assert_eq!(g.rule("B"), Some(&Expr::ch('b')));
    }

    #[test]
    fn precedence_and_sugar() {
        let e = desugar(&parse_expr("!\"a\" \"b\" / \"c\"+ ? / &x").unwrap());
        let expected = Expr::choice(
            Expr::seq(Expr::not(Expr::ch('a')), Expr::ch('b')),
            Expr::choice(
                Expr::choice(
                    Expr::seq(Expr::ch('c'), Expr::star(Expr::ch('c'))),
                    Expr::Empty,
                ),
                Expr::not(Expr::not(Expr::nt("x"))),
            ),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn classes_and_keywords() {
        let e = desugar(&parse_expr("[0-9] [.] . [a-c_] check(catch(try(^ throw eps)))").unwrap());
        let items = [
            Expr::class("[0-9]"),
            Expr::any(),
            Expr::any(),
            Expr::Term(Terminal::Class {
                label: "[a-c_]".into(),
                set: CharSet::range('a', 'c').union(&CharSet::single('_')),
            }),
            Expr::choice(
                Expr::catch(Expr::try_(Expr::seq_all([Expr::Cut, Expr::Throw, Expr::Empty]))),
                Expr::Throw,
            ),
        ];
        assert_eq!(e, Expr::seq_all(items));
    }

    #[test]
    fn escapes() {
        let e = parse_expr(r#""\n\t\\\"\x41""#).unwrap();
        assert_eq!(e, SurfaceExpr::Literal("\n\t\\\"A".into()));
    }

    #[test]
    fn directives() {
        let g = parse_grammar(
            "%token T1 T2\n%alphabet \"ab\"\n%start T1 / T2\nT1 <- \"a\";\nT2 <- \"b\";",
        )
        .unwrap();
        assert_eq!(g.lexical().len(), 2);
        assert_eq!(g.alphabet(), Some(&['a', 'b'][..]));
    }

    #[test]
    fn hyphenated_names() {
        let g = parse_grammar("%start const-exp\nconst-exp<-\"1\";").unwrap();
        assert!(g.rule("const-exp").is_some());
    }

    #[test]
    fn errors_carry_position() {
        let err = parse_grammar_file("%start A\nA <- \"a\" \n B <- ;").unwrap_err();
        assert_eq!((err.line, err.col), (3, 2));
        let err = parse_grammar_file("A <- \"a\";").unwrap_err();
        assert!(err.message.contains("%start"));
        let err = parse_grammar_file("%start \"abc").unwrap_err();
        assert!(err.message.contains("unterminated"));
        assert!(matches!(
            parse_grammar("%start B\nA <- \"a\";"),
            Err(LoadError::Grammar(GrammarError::Undefined { .. }))
        ));
    }

    #[test]
    fn display_roundtrip() {
        let src = "%token ID\n%start S\nS <- ID (\",\" ^ ID)* / check(\"x\") !. ;\nID <- [a-z] [a-z0-9]* ;\n";
        let g = parse_grammar(src).unwrap();
        let again = parse_grammar(&g.to_string()).unwrap();
        assert_eq!(g, again);
    }
}
