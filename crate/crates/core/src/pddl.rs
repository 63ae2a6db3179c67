//! PDDL text rendering for the STRIPS + typing subset: two-space indentation,
//! lowercase, LF line endings, one atom per line.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::compiler::PlanningOperator;
use crate::predicate::Predicate;
use crate::Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PddlKind {
    Domain,
    Problem,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PddlDocument {
    pub kind: PddlKind,
    pub name: Symbol,
    pub text: String,
}

pub struct DomainSpec<'a> {
    pub name: &'a str,
    /// `(child, parent)` pairs.
    pub types: &'a [(&'a str, &'a str)],
    pub constants: Vec<(&'a Symbol, &'a str)>,
    /// Unary attribute predicates besides `in`/`on`/`under`.
    pub attributes: Vec<&'a Symbol>,
    /// Type used for predicate arguments in `:predicates`.
    pub argument_type: &'a str,
    pub operators: &'a [PlanningOperator],
}

pub struct ProblemSpec<'a> {
    pub name: &'a str,
    pub domain: &'a str,
    pub objects: Vec<(&'a Symbol, &'a str)>,
    pub init: &'a BTreeSet<Predicate>,
    pub goal: &'a BTreeSet<Predicate>,
}

/// Groups `(name, type)` pairs by type, keeping first-seen type order:
/// `a b - t1 c - t2`.
fn typed_list(items: &[(&Symbol, &str)]) -> String {
    let mut types: Vec<&str> = Vec::new();
    for (_, t) in items {
        if !types.contains(t) {
            types.push(t);
        }
    }
    let mut out = String::new();
    for t in types {
        let names: Vec<&str> = items.iter().filter(|(_, ty)| *ty == t).map(|(n, _)| n.as_str()).collect();
        if !out.is_empty() {
            out.push(' ');
        }
        let _ = write!(out, "{} - {}", names.join(" "), t);
    }
    out
}

fn atoms(out: &mut String, indent: &str, facts: impl IntoIterator<Item = impl core::fmt::Display>) {
    for f in facts {
        let _ = write!(out, "\n{indent}{f}");
    }
}

/// One `(:action ...)` block, indented for inclusion in a domain.
pub fn render_action(op: &PlanningOperator) -> String {
    let mut out = String::new();
    let _ = write!(out, "  (:action {}\n    :parameters (", op.name());
    let params: Vec<String> = op
        .parameters()
        .iter()
        .map(|p| {
            let mut s = String::new();
            let _ = write!(s, "{} - {}", p.name, p.ty.as_str());
            s
        })
        .collect();
    out.push_str(&params.join(" "));
    out.push_str(")\n    :precondition (and");
    atoms(&mut out, "      ", op.preconditions());
    out.push_str(")\n    :effect (and");
    atoms(&mut out, "      ", op.add_effects());
    for f in op.delete_effects() {
        let _ = write!(out, "\n      (not {f})");
    }
    out.push_str("))\n");
    out
}

pub fn render_domain(spec: &DomainSpec<'_>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", spec.name);
    out.push_str("  (:requirements :strips :typing)\n");
    out.push_str("  (:types");
    // group children by parent
    let mut parents: Vec<&str> = Vec::new();
    for (_, p) in spec.types {
        if !parents.contains(p) {
            parents.push(p);
        }
    }
    for p in parents {
        let children: Vec<&str> = spec.types.iter().filter(|(_, q)| *q == p).map(|(c, _)| *c).collect();
        let _ = write!(out, "\n    {} - {}", children.join(" "), p);
    }
    out.push_str(")\n");
    out.push_str("  (:constants");
    if !spec.constants.is_empty() {
        let _ = write!(out, "\n    {}", typed_list(&spec.constants));
    }
    out.push_str(")\n");
    let t = spec.argument_type;
    out.push_str("  (:predicates");
    for rel in ["in", "on", "under"] {
        let _ = write!(out, "\n    ({rel} ?x - {t} ?y - {t})");
    }
    for a in &spec.attributes {
        let _ = write!(out, "\n    ({a} ?x - {t})");
    }
    out.push_str(")\n");
    for op in spec.operators {
        out.push_str(&render_action(op));
    }
    out.push_str(")\n");
    out
}

pub fn render_problem(spec: &ProblemSpec<'_>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", spec.name);
    let _ = writeln!(out, "  (:domain {})", spec.domain);
    out.push_str("  (:objects");
    if !spec.objects.is_empty() {
        let _ = write!(out, "\n    {}", typed_list(&spec.objects));
    }
    out.push_str(")\n  (:init");
    atoms(&mut out, "    ", spec.init);
    out.push_str(")\n  (:goal (and");
    atoms(&mut out, "    ", spec.goal);
    out.push_str(")))\n");
    out
}
