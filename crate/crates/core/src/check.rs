//! Static checks: termination (left recursion, nullable star bodies) and
//! cut placement.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::grammar::{Expr, Grammar};

/// Where an issue was found: a named rule or the start expression.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Site {
    Rule(String),
    Start,
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Rule(n) => write!(f, "rule `{n}`"),
            Site::Start => f.write_str("start expression"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WfIssue {
    /// `cycle` starts and ends at the offending nonterminal.
    LeftRecursion { rule: String, cycle: Vec<String> },
    NullableStar { site: Site, expr: String },
}

impl fmt::Display for WfIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WfIssue::LeftRecursion { rule, cycle } => {
                write!(f, "left-recursion: `{rule}` via {}", cycle.join(" -> "))
            }
            WfIssue::NullableStar { site, expr } => {
                write!(f, "nullable-star: {site}: body of `{expr}` may succeed without consuming")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WellFormednessReport {
    pub issues: Vec<WfIssue>,
}

impl WellFormednessReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Conservative nullability for every rule (least fixpoint).
pub fn nullable_rules(g: &Grammar) -> BTreeMap<String, bool> {
    let mut map: BTreeMap<String, bool> = g.rules().map(|(n, _)| (n.to_string(), false)).collect();
    loop {
        let mut changed = false;
        for (name, e) in g.rules() {
            if !map[name] && nullable_with(e, &map) {
                map.insert(name.to_string(), true);
                changed = true;
            }
        }
        if !changed {
            return map;
        }
    }
}

fn nullable_with(e: &Expr, rules: &BTreeMap<String, bool>) -> bool {
    match e {
        Expr::Empty | Expr::Not(_) | Expr::Throw | Expr::Star(_) | Expr::Cut => true,
        Expr::Term(_) => false,
        Expr::NonTerm(n) => rules.get(n).copied().unwrap_or(false),
        Expr::Seq(a, b) => nullable_with(a, rules) && nullable_with(b, rules),
        Expr::Choice(a, b) => nullable_with(a, rules) || nullable_with(b, rules),
        Expr::Catch(b) | Expr::Try(b) => nullable_with(b, rules),
    }
}

pub fn is_nullable(g: &Grammar, e: &Expr) -> bool {
    nullable_with(e, &nullable_rules(g))
}

/// Nonterminals `e` may call before consuming any input.
fn leading_calls<'a>(e: &'a Expr, nullable: &BTreeMap<String, bool>, out: &mut BTreeSet<&'a str>) {
    match e {
        Expr::NonTerm(n) => {
            out.insert(n);
        }
        Expr::Seq(a, b) => {
            leading_calls(a, nullable, out);
            if nullable_with(a, nullable) {
                leading_calls(b, nullable, out);
            }
        }
        Expr::Choice(a, b) => {
            leading_calls(a, nullable, out);
            leading_calls(b, nullable, out);
        }
        Expr::Star(b) | Expr::Not(b) | Expr::Catch(b) | Expr::Try(b) => {
            leading_calls(b, nullable, out)
        }
        Expr::Empty | Expr::Term(_) | Expr::Throw | Expr::Cut => {}
    }
}

pub fn check_wellformed(g: &Grammar) -> WellFormednessReport {
    let nullable = nullable_rules(g);
    let mut report = WellFormednessReport::default();

    let graph: BTreeMap<&str, BTreeSet<&str>> = g
        .rules()
        .map(|(n, e)| {
            let mut calls = BTreeSet::new();
            leading_calls(e, &nullable, &mut calls);
            (n, calls)
        })
        .collect();
    for &name in graph.keys() {
        if let Some(cycle) = find_cycle(&graph, name) {
            report.issues.push(WfIssue::LeftRecursion {
                rule: name.to_string(),
                cycle,
            });
        }
    }

    let sites = g
        .rules()
        .map(|(n, e)| (Site::Rule(n.to_string()), e))
        .chain(std::iter::once((Site::Start, g.start())));
    for (site, e) in sites {
        e.walk(&mut |sub| {
            if let Expr::Star(body) = sub {
                if nullable_with(body, &nullable) {
                    report.issues.push(WfIssue::NullableStar {
                        site: site.clone(),
                        expr: sub.to_string(),
                    });
                }
            }
        });
    }
    report
}

/// Shortest path `from -> ... -> from` in the leading-call graph.
fn find_cycle(graph: &BTreeMap<&str, BTreeSet<&str>>, from: &str) -> Option<Vec<String>> {
    let mut parent: BTreeMap<&str, &str> = BTreeMap::new();
    let mut queue = std::collections::VecDeque::new();
    for &next in &graph[from] {
        if next == from {
            return Some(vec![from.to_string(), from.to_string()]);
        }
        if parent.insert(next, from).is_none() {
            queue.push_back(next);
        }
    }
    while let Some(cur) = queue.pop_front() {
        for &next in graph.get(cur).into_iter().flatten() {
            if next == from {
                let mut path = vec![from.to_string()];
                let mut node = cur;
                while node != from {
                    path.push(node.to_string());
                    node = parent[node];
                }
                path.push(from.to_string());
                path.reverse();
                return Some(path);
            }
            if !parent.contains_key(next) {
                parent.insert(next, cur);
                queue.push_back(next);
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlacementIssue {
    pub site: Site,
    pub reason: &'static str,
    pub expr: String,
}

impl fmt::Display for PlacementIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cut-placement: {}: {} in `{}`", self.site, self.reason, self.expr)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PlacementReport {
    pub issues: Vec<PlacementIssue>,
}

impl PlacementReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

/// A cut may only be an element of the sequence chain forming the first
/// alternative of a choice (`e1 ^ e2 / e3`) or the body of a star
/// (`(e1 ^ e2)*`), at most once per chain.
pub fn check_cut_placement(g: &Grammar) -> PlacementReport {
    let mut report = PlacementReport::default();
    let sites = g
        .rules()
        .map(|(n, e)| (Site::Rule(n.to_string()), e))
        .chain(std::iter::once((Site::Start, g.start())));
    for (site, e) in sites {
        placement_walk(e, false, &site, e, &mut report);
    }
    report
}

fn chain_elements<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match e {
        Expr::Seq(a, b) => {
            chain_elements(a, out);
            chain_elements(b, out);
        }
        _ => out.push(e),
    }
}

fn placement_walk(e: &Expr, committable: bool, site: &Site, root: &Expr, report: &mut PlacementReport) {
    let mut issue = |reason| {
        report.issues.push(PlacementIssue {
            site: site.clone(),
            reason,
            expr: root.to_string(),
        })
    };
    match e {
        Expr::Cut if !committable => issue("cut outside a choice's first alternative or a star body"),
        Expr::Seq(..) => {
            let mut elems = Vec::new();
            chain_elements(e, &mut elems);
            let cuts = elems.iter().filter(|x| matches!(x, Expr::Cut)).count();
            if committable && cuts > 1 {
                issue("more than one cut in a single alternative");
            }
            for el in elems {
                placement_walk(el, committable, site, root, report);
            }
        }
        Expr::Choice(a, b) => {
            placement_walk(a, true, site, root, report);
            placement_walk(b, false, site, root, report);
        }
        Expr::Star(b) => placement_walk(b, true, site, root, report),
        Expr::Not(b) | Expr::Catch(b) | Expr::Try(b) => placement_walk(b, false, site, root, report),
        _ => {}
    }
}
