//! Grammars and sample inputs bundled with the crate.

use crate::grammar::Grammar;
use crate::syntax::parse_grammar;

pub const ANBNCN: &str = include_str!("../fixtures/anbncn.peg");
pub const PASCAL_COMMENT: &str = include_str!("../fixtures/pascal_comment.peg");
pub const KEYWORDS: &str = include_str!("../fixtures/keywords.peg");
pub const NUMBER: &str = include_str!("../fixtures/number.peg");
pub const JSON: &str = include_str!("../fixtures/json.peg");
pub const JSON_TRY: &str = include_str!("../fixtures/json_try.peg");
pub const STATEMENTS: &str = include_str!("../fixtures/statements.peg");
pub const STATEMENTS_CHECK: &str = include_str!("../fixtures/statements_check.peg");

/// Valid documents for the JSON grammars, as `(name, text)`.
pub const JSON_SAMPLES: &[(&str, &str)] = &[
    ("catalog.json", include_str!("../fixtures/json/catalog.json")),
    ("config.json", include_str!("../fixtures/json/config.json")),
    ("points.json", include_str!("../fixtures/json/points.json")),
];

fn load(src: &str) -> Grammar {
    parse_grammar(src).expect("bundled grammar parses")
}

pub fn anbncn() -> Grammar {
    load(ANBNCN)
}

pub fn pascal_comment() -> Grammar {
    load(PASCAL_COMMENT)
}

pub fn keywords() -> Grammar {
    load(KEYWORDS)
}

pub fn number() -> Grammar {
    load(NUMBER)
}

pub fn json() -> Grammar {
    load(JSON)
}

pub fn json_try() -> Grammar {
    load(JSON_TRY)
}

pub fn statements() -> Grammar {
    load(STATEMENTS)
}

pub fn statements_check() -> Grammar {
    load(STATEMENTS_CHECK)
}

/// `a^k b^k c^k`
pub fn anbncn_word(k: usize) -> String {
    format!("{}{}{}", "a".repeat(k), "b".repeat(k), "c".repeat(k))
}
