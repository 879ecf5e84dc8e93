//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use pegsem::bigstep::{eval, EvalBudget};
use pegsem::fixtures;
use pegsem::harness::{
    brute_force_language, diff_grammars, mutate, nested_try_witness, random_expr, random_grammar,
    seeded_rng, strings_of_length, GenConfig, MutationSpec, OperatorSet,
};
use pegsem::machine::{self, StepMetrics};
use pegsem::symbolic::{enumerate, solutions};
use pegsem::{parse_grammar, Expr, Grammar, MachineConfig, Outcome};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn on() -> MachineConfig {
    MachineConfig::default()
}

fn off() -> MachineConfig {
    MachineConfig::default().without_simplify()
}

/// Runs with pruning on and off, checks both agree and that pruning never
/// deepens the stack, and returns the pruned run.
fn run_both(g: &Grammar, e: &Expr, x: &str) -> Result<(Outcome, StepMetrics, StepMetrics), String> {
    let (o1, m1) = machine::run(g, e, x, on()).map_err(|e| e.to_string())?;
    let (o2, m2) = machine::run(g, e, x, off()).map_err(|e| e.to_string())?;
    ensure(o1 == o2, || format!("{e} on {x:?}: pruned {o1:?}, unpruned {o2:?}"))?;
    ensure(m1.max_stack_depth <= m2.max_stack_depth, || {
        format!("{e} on {x:?}: depth {} > {}", m1.max_stack_depth, m2.max_stack_depth)
    })?;
    Ok((o1, m1, m2))
}

fn no_rules(start: Expr) -> Grammar {
    Grammar::from_rules(Vec::<(String, Expr)>::new(), start).unwrap()
}

fn goldens() -> Check {
    let t0 = Instant::now();
    let g = Grammar::from_rules(
        [("A", Expr::ch('a')), ("B", Expr::ch('b'))],
        Expr::seq(Expr::nt("A"), Expr::nt("B")),
    )
    .unwrap();
    let big = eval(&g, g.start(), "abc", EvalBudget::default()).unwrap();
    let (o, _, _) = run_both(&g, g.start(), "abc")?;
    ensure(big == o && o.is_success() && o.rest("abc") == "c", || format!("A B on abc: {big:?} / {o:?}"))?;

    let g = Grammar::from_rules([("A", Expr::ch('a'))], Expr::seq(Expr::nt("A"), Expr::ch('b'))).unwrap();
    let (_, m, _) = run_both(&g, g.start(), "ab")?;
    ensure(m.entry_steps == 4, || format!("entry steps {}", m.entry_steps))?;

    let e = no_rules(Expr::star(Expr::lit("ab")));
    let (o, _, _) = run_both(&e, e.start(), "abac")?;
    ensure(o.is_success() && o.rest("abac") == "ac", || format!("(a b)* on abac: {o:?}"))?;
    let e = no_rules(Expr::star(Expr::seq_all([Expr::ch('a'), Expr::Cut, Expr::ch('b')])));
    let (o, _, _) = run_both(&e, e.start(), "abac")?;
    ensure(matches!(o, Outcome::Fail(_)), || format!("(a ^ b)* on abac: {o:?}"))?;

    let lhs = no_rules(Expr::catch(Expr::choice(Expr::Throw, Expr::Empty)));
    let rhs = no_rules(Expr::choice(Expr::catch(Expr::Throw), Expr::catch(Expr::Empty)));
    let mut rng = seeded_rng(11);
    for _ in 0..20 {
        let len = rand::Rng::gen_range(&mut rng, 0..8);
        let x: String = (0..len).map(|_| rand::Rng::gen_range(&mut rng, b'a'..=b'z') as char).collect();
        let (l, _, _) = run_both(&lhs, lhs.start(), &x)?;
        let (r, _, _) = run_both(&rhs, rhs.start(), &x)?;
        ensure(matches!(l, Outcome::Fail(_)) && r.is_success(), || format!("catch laws on {x:?}: {l:?} {r:?}"))?;
        ensure(eval(&lhs, lhs.start(), &x, EvalBudget::default()) == Ok(l), || "bigstep catch".into())?;
    }
    within(t0, Duration::from_secs(1))?;
    Ok(format!("in {:?}", t0.elapsed()))
}

fn adequacy() -> Check {
    let t0 = Instant::now();
    let alphabet = ['a', 'b', 'c'];
    let inputs: Vec<String> = (0..=5).flat_map(|n| strings_of_length(&alphabet, n)).collect();
    let mut rng = seeded_rng(2024);
    let mut runs = 0usize;
    for i in 0..240 {
        let cfg = GenConfig {
            operators: if i % 2 == 0 { OperatorSet::Core } else { OperatorSet::Errors },
            ..GenConfig::default()
        };
        let g = random_grammar(&mut rng, &cfg);
        for x in &inputs {
            let big = eval(&g, g.start(), x, EvalBudget::default()).map_err(|e| e.to_string())?;
            let (m, _, _) = run_both(&g, g.start(), x)?;
            ensure(big == m, || format!("grammar\n{g}\ninput {x:?}: bigstep {big:?}, machine {m:?}"))?;
            runs += 1;
        }
    }
    within(t0, Duration::from_secs(60))?;
    Ok(format!("240 grammars, {runs} inputs, in {:?}", t0.elapsed()))
}

fn anbncn() -> Check {
    let g = fixtures::anbncn();
    for k in 1..=200 {
        let x = fixtures::anbncn_word(k);
        let (o, _, _) = run_both(&g, g.start(), &x)?;
        ensure(o.is_success(), || format!("rejects k={k}"))?;
        ensure(eval(&g, g.start(), &x, EvalBudget::default()) == Ok(o), || format!("bigstep k={k}"))?;
    }
    // independent membership test for a^j b^j c^j, j >= 1
    let member = |x: &str| {
        let j = x.len() / 3;
        j >= 1 && x == fixtures::anbncn_word(j)
    };
    let mut rejected = 0;
    let mut seed = 0u64;
    while rejected < 100 {
        let k = 1 + (seed as usize * 7) % 50;
        let spec = MutationSpec {
            deletable: ['a', 'b', 'c'].into_iter().collect(),
            max_deletions: 3,
            seed,
            variants: 1,
        };
        seed += 1;
        let m = mutate(&fixtures::anbncn_word(k), &spec).unwrap().remove(0);
        let (o, _, _) = run_both(&g, g.start(), &m)?;
        ensure(o.is_success() == member(&m), || format!("{m:?}: {o:?}"))?;
        if !member(&m) {
            rejected += 1;
        }
    }
    let big = fixtures::anbncn_word(1000);
    let t1 = Instant::now();
    let (o, _) = machine::run(&g, g.start(), &big, on()).map_err(|e| e.to_string())?;
    let took = t1.elapsed();
    ensure(o.is_success(), || "k=1000 rejected".into())?;
    ensure(took < Duration::from_secs(1), || format!("k=1000 took {took:?}"))?;
    Ok(format!("k=1..200 accepted, {rejected} mutations rejected, k=1000 in {took:?}"))
}

/// Accepted `(string, consumed length)` pairs according to the big-step
/// interpreter and according to the symbolic outcomes, at length `n`.
fn oracle_vs_symbolic(g: &Grammar, alphabet: &[char], n: usize) -> Result<usize, String> {
    let brute: BTreeSet<(String, usize)> = brute_force_language(g, alphabet, n, false, 1 << 20)
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter_map(|(x, o)| o.is_success().then(|| (x, o.pos())))
        .collect();
    let sols = solutions(g, g.start(), n).map_err(|e| e.to_string())?;
    let mut symbolic = BTreeSet::new();
    for s in &sols {
        for x in enumerate(s, alphabet, 1 << 20).map_err(|e| e.to_string())? {
            let consumed: usize = x.chars().take(s.consumed.len()).map(char::len_utf8).sum();
            symbolic.insert((x, consumed));
        }
    }
    ensure(brute == symbolic, || {
        let extra: Vec<_> = symbolic.difference(&brute).take(5).collect();
        let missing: Vec<_> = brute.difference(&symbolic).take(5).collect();
        format!("grammar\n{g}\nn={n}: symbolic-only {extra:?}, oracle-only {missing:?}")
    })?;
    Ok(sols.len())
}

fn symbolic_goldens() -> Check {
    let t0 = Instant::now();
    let count = |src: &str| -> Result<usize, String> {
        let g = parse_grammar(src).map_err(|e| e.to_string())?;
        Ok(solutions(&g, g.start(), 3).map_err(|e| e.to_string())?.len())
    };
    for (src, want) in [
        ("%start [0-9] \"a\"", 1),
        ("%start !\"a\" \"b\" (\"c\" / \"d\")", 2),
        ("%start !\"a\" \"a\"", 0),
    ] {
        let got = count(src)?;
        ensure(got == want, || format!("{src:?}: {got} outcomes, expected {want}"))?;
    }
    let g = fixtures::number();
    let n = oracle_vs_symbolic(&g, &['0', '1', '.', 'a'], 3)?;
    ensure(n == 7, || format!("NUMBER: {n} outcomes"))?;
    within(t0, Duration::from_secs(10))?;
    Ok(format!("NUMBER 7 outcomes, instances match oracle, in {:?}", t0.elapsed()))
}

fn symbolic_vs_oracle() -> Check {
    let t0 = Instant::now();
    let mut rng = seeded_rng(4);
    let cfg = GenConfig::default();
    let mut outcomes = 0;
    for _ in 0..50 {
        let g = random_grammar(&mut rng, &cfg);
        for n in 0..=5 {
            outcomes += oracle_vs_symbolic(&g, &cfg.alphabet, n)?;
        }
    }
    within(t0, Duration::from_secs(300))?;
    Ok(format!("50 grammars, n<=5, {outcomes} symbolic outcomes, in {:?}", t0.elapsed()))
}

fn simplification() -> Check {
    // outcome equality and depth(on) <= depth(off) are checked by run_both in
    // criteria 1-3; here the witness family must be strictly shallower
    let g = no_rules(Expr::Empty);
    let mut depths = Vec::new();
    for k in 2..=6 {
        let e = nested_try_witness(k);
        let (o, on_m, off_m) = run_both(&g, &e, "ab")?;
        ensure(o.is_success(), || format!("witness k={k}: {o:?}"))?;
        ensure(on_m.max_stack_depth < off_m.max_stack_depth, || {
            format!("witness k={k}: depth {} vs {}", on_m.max_stack_depth, off_m.max_stack_depth)
        })?;
        depths.push(format!("k={k}:{}<{}", on_m.max_stack_depth, off_m.max_stack_depth));
    }
    Ok(depths.join(" "))
}

fn json_try_effect() -> Check {
    let plain = fixtures::json();
    let annotated = fixtures::json_try();
    let valid: Vec<(String, String)> = fixtures::JSON_SAMPLES
        .iter()
        .map(|(n, t)| (n.to_string(), t.to_string()))
        .collect();
    let mut invalid = Vec::new();
    let mut seed = 0u64;
    while invalid.len() < 10 {
        let (name, text) = &valid[seed as usize % valid.len()];
        let m = mutate(text, &MutationSpec::punctuation(seed, 1)).unwrap().remove(0);
        let (o, _) = machine::run(&plain, plain.start(), &m, on()).map_err(|e| e.to_string())?;
        if !o.is_success() {
            invalid.push((format!("{name}#{seed}"), m));
        }
        seed += 1;
    }
    let corpus: Vec<_> = valid.iter().chain(&invalid).cloned().collect();
    let r = diff_grammars(&plain, &annotated, &corpus, on()).map_err(|e| e.to_string())?;
    ensure(r.all_agree(), || {
        format!("disagreements: {:?}", r.disagreements().map(|e| &e.file).collect::<Vec<_>>())
    })?;
    ensure(r.rejected.inputs == 10 && r.rejected.reduction > 0.0, || {
        format!("invalid reduction {:.2}%", r.rejected.reduction * 100.0)
    })?;
    ensure(r.accepted.reduction > -0.02, || {
        format!("valid increase {:.2}%", -r.accepted.reduction * 100.0)
    })?;
    Ok(format!(
        "invalid: {} -> {} entry steps ({:.1}% fewer); valid: {} -> {} ({:+.2}%)",
        r.rejected.plain_steps,
        r.rejected.annotated_steps,
        r.rejected.reduction * 100.0,
        r.accepted.plain_steps,
        r.accepted.annotated_steps,
        -r.accepted.reduction * 100.0
    ))
}

fn accepted(g: &Grammar, inputs: &[String]) -> Result<Vec<Option<usize>>, String> {
    inputs
        .iter()
        .map(|x| {
            let (o, _, _) = run_both(g, g.start(), x)?;
            let big = eval(g, g.start(), x, EvalBudget::default()).map_err(|e| e.to_string())?;
            ensure(big == o, || format!("{} on {x:?}: {big:?} vs {o:?}", g.start()))?;
            Ok(o.is_success().then(|| o.pos()))
        })
        .collect()
}

fn equivalence_laws() -> Check {
    let alphabet = ['a', 'b'];
    let inputs: Vec<String> = (0..=4).flat_map(|n| strings_of_length(&alphabet, n)).collect();
    let cfg = GenConfig {
        alphabet: alphabet.to_vec(),
        operators: OperatorSet::Errors,
        ..GenConfig::default()
    };
    let mut rng = seeded_rng(8);
    let mut tried = 0;
    while tried < 100 {
        let e = random_expr(&mut rng, 3, &[], &cfg);
        let e2 = random_expr(&mut rng, 3, &[], &cfg);
        let pairs = [
            (Expr::catch(Expr::try_(e.clone())), e.clone()),
            (
                Expr::seq(Expr::catch(e.clone()), Expr::catch(e2.clone())),
                Expr::catch(Expr::seq(e.clone(), e2.clone())),
            ),
            (Expr::catch(Expr::not(e.clone())), Expr::not(Expr::catch(e.clone()))),
        ];
        let gs: Vec<(Grammar, Grammar)> = pairs.into_iter().map(|(l, r)| (no_rules(l), no_rules(r))).collect();
        if gs.iter().any(|(l, r)| !pegsem::check_wellformed(l).is_ok() || !pegsem::check_wellformed(r).is_ok()) {
            continue;
        }
        for (l, r) in &gs {
            let (la, ra) = (accepted(l, &inputs)?, accepted(r, &inputs)?);
            ensure(la == ra, || format!("{} vs {}", l.start(), r.start()))?;
        }
        tried += 1;
    }
    Ok(format!("3 laws x {tried} random pairs, {} inputs each", inputs.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("worked-example goldens", goldens),
        ("bigstep/machine adequacy", adequacy),
        ("a^n b^n c^n", anbncn),
        ("symbolic goldens", symbolic_goldens),
        ("symbolic search vs brute force", symbolic_vs_oracle),
        ("try pruning", simplification),
        ("JSON try annotations", json_try_effect),
        ("catch/try equivalences", equivalence_laws),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {} ({name}): PASS - {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL - {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
