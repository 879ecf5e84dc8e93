use pegsem::bigstep::{accepts, eval, EvalBudget};
use pegsem::fixtures;
use pegsem::harness::{diff_grammars, mutate, MutationSpec};
use pegsem::machine::{self, run_traced};
use pegsem::symbolic::{solutions, utp_check};
use pegsem::{check_cut_placement, parse_grammar, Expr, MachineConfig, MachineError, Outcome, OutcomeKind};

fn machine_outcome(g: &pegsem::Grammar, x: &str) -> Outcome {
    machine::run(g, g.start(), x, MachineConfig::default()).unwrap().0
}

const STATEMENT_INPUTS: &[&str] = &[
    "x : goto y ;",
    "case 1 : break ;",
    "goto l ;",
    "goto l :",
    "x = 3 ;",
    "lbl : lbl2 : ;",
    "break",
    "case x : ;",
    "goto ;",
    "x :",
    "casex : ;",
    "",
    "goto goto ;",
];

#[test]
fn check_annotations_only_turn_failures_into_errors() {
    let plain = fixtures::statements();
    let checked = fixtures::statements_check();
    for x in STATEMENT_INPUTS {
        let p = machine_outcome(&plain, x);
        let c = machine_outcome(&checked, x);
        if c.kind() == OutcomeKind::Error {
            assert_eq!(p.kind(), OutcomeKind::Fail, "{x:?}");
        }
        if p.kind() == OutcomeKind::Fail {
            assert_ne!(c.kind(), OutcomeKind::Success, "{x:?}");
        }
        assert_eq!(p.is_success(), c.is_success(), "{x:?}");
    }
}

#[test]
fn check_annotations_fail_sooner() {
    let plain = fixtures::statements();
    let checked = fixtures::statements_check();
    let (p, pm) = machine::run(&plain, plain.start(), "goto l :", MachineConfig::default()).unwrap();
    let (c, cm) = machine::run(&checked, checked.start(), "goto l :", MachineConfig::default()).unwrap();
    assert_eq!(p.kind(), OutcomeKind::Fail);
    assert_eq!(c.kind(), OutcomeKind::Error);
    assert!(cm.entry_steps < pm.entry_steps);
}

#[test]
fn confined_errors() {
    let src = format!(
        "{}\nS1 <- catch(labeledSt / jumpSt) / assignSt ;\nS2 <- catch(labeledSt) / jumpSt / assignSt ;\nassignSt <- ID EQ NUM SEMICOLON ;\nEQ <- \"=\" SP ;\n",
        fixtures::STATEMENTS_CHECK
    );
    let g = parse_grammar(&src).unwrap();
    let s1 = g.with_start(Expr::seq(Expr::nt("SP"), Expr::nt("S1"))).unwrap();
    let s2 = g.with_start(Expr::seq(Expr::nt("SP"), Expr::nt("S2"))).unwrap();
    for g in [&s1, &s2] {
        assert!(machine_outcome(g, "x = 3 ;").is_success());
    }
    let (o1, m1) = machine::run(&s1, s1.start(), "goto l :", MachineConfig::default()).unwrap();
    let (o2, m2) = machine::run(&s2, s2.start(), "goto l :", MachineConfig::default()).unwrap();
    assert_eq!(o1.kind(), OutcomeKind::Fail);
    assert_eq!(o2.kind(), OutcomeKind::Error);
    assert!(m2.entry_steps < m1.entry_steps);
}

#[test]
fn statement_tokens_have_unique_prefixes() {
    let g = fixtures::statements();
    let report = utp_check(&g, 3).unwrap();
    assert!(report.is_clean(), "{:?}", report.violations);
}

#[test]
fn keyword_checks_shortcut_identifier_rule() {
    let g = fixtures::keywords();
    for (x, ok) in [("bot", true), ("bool", false), ("break", false), ("as", false), ("ant", true), ("x1_", true)] {
        assert_eq!(accepts(&g, x).unwrap(), ok, "{x}");
        assert_eq!(machine_outcome(&g, x).is_success(), ok, "{x}");
    }
}

#[test]
fn pascal_comment_close_check() {
    let g = fixtures::pascal_comment();
    let x = "{ comment *here* *)";
    assert_eq!(machine_outcome(&g, x), Outcome::Success(x.len()));
    assert_eq!(eval(&g, g.start(), "(* open", EvalBudget::default()).unwrap().kind(), OutcomeKind::Fail);
}

#[test]
fn json_fixtures_accept_samples_and_agree_on_mutations() {
    let plain = fixtures::json();
    let annotated = fixtures::json_try();
    let mut corpus = Vec::new();
    for (name, text) in fixtures::JSON_SAMPLES {
        assert!(machine_outcome(&plain, text).is_success(), "{name}");
        for (i, m) in mutate(text, &MutationSpec::punctuation(42, 20)).unwrap().into_iter().enumerate() {
            corpus.push((format!("{name}#{i}"), m));
        }
    }
    let report = diff_grammars(&plain, &annotated, &corpus, MachineConfig::default()).unwrap();
    assert!(report.all_agree());
    assert!(report.rejected.reduction > 0.0);
}

#[test]
fn cut_changes_language() {
    // "a" ^ "b" / "a" "c" no longer accepts "ac"
    let g = parse_grammar("%start \"a\" ^ \"b\" / \"a\" \"c\"").unwrap();
    assert!(check_cut_placement(&g).is_ok());
    assert_eq!(machine_outcome(&g, "ac").kind(), OutcomeKind::Fail);
    assert!(machine_outcome(&g, "ab").is_success());
    let plain = parse_grammar("%start \"a\" \"b\" / \"a\" \"c\"").unwrap();
    assert!(machine_outcome(&plain, "ac").is_success());
}

#[test]
fn cut_in_disjoint_alternatives_keeps_language() {
    let g = parse_grammar("%start (\"a\" ^ \"b\" / \"c\" \"d\") ![.]").unwrap();
    let plain = parse_grammar("%start (\"a\" \"b\" / \"c\" \"d\") ![.]").unwrap();
    for x in ["ab", "cd", "ac", "ad", "a", "", "abx"] {
        assert_eq!(machine_outcome(&g, x).is_success(), machine_outcome(&plain, x).is_success(), "{x}");
    }
}

#[test]
fn misplaced_cut_reported_at_runtime() {
    let g = parse_grammar("%start \"a\"").unwrap();
    let e = Expr::seq(Expr::ch('a'), Expr::Cut);
    assert_eq!(
        machine::run(&g, &e, "a", MachineConfig::default()),
        Err(MachineError::MisplacedCut(1))
    );
}

#[test]
fn trace_labels_cover_a_run() {
    let g = parse_grammar("%start A \"b\"\nA <- \"a\" ;").unwrap();
    let (_, m, trace) = run_traced(&g, g.start(), "ab", MachineConfig::default()).unwrap();
    assert_eq!(trace.len() as u64, m.total_steps);
    assert_eq!(trace.last().unwrap().depth, 0);
}

#[test]
fn anbncn_symbolic_length_six() {
    let g = fixtures::anbncn();
    let sols = solutions(&g, g.start(), 6).unwrap();
    let shown: Vec<String> = sols.iter().map(ToString::to_string).collect();
    assert_eq!(shown, ["\"a\" . \"a\" . \"b\" . \"b\" . \"c\" . \"c\" :: eps"]);
}
