//! Tab-separated FOON subgraph and kitchen files.
//!
//! ```text
//! O	bottle          object node
//! S	in	glass       geometric state (in/on/under with a relative object)
//! S	empty           physical state
//! I	vodka,ice       ingredients
//! M	pour            motion; objects after it are outputs
//! //                  end of unit
//! G	drinking_glass  goal candidate (footer)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use foonplan_core::graph::{FoonGraph, FunctionalUnit, MotionNode, ObjectNode, StateAttribute};
use foonplan_core::predicate::Relation;
use foonplan_core::Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based; 0 only for an empty input.
    pub line: usize,
    pub message: String,
    pub severity: Severity,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}: {}", self.line, self.severity, self.message)
    }
}

/// A successful parse and the warnings it raised.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<Diagnostic>,
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tag {
    Object,
    State,
    Ingredients,
    Motion,
    End,
    Goal,
}

struct Record<'a> {
    line: usize,
    tag: Tag,
    fields: Vec<&'a str>,
}

/// Splits the text into tagged records, reporting unknown tags and
/// malformed field counts.
fn records<'a>(text: &'a str, diags: &mut Vec<Diagnostic>) -> Vec<Record<'a>> {
    let mut out = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let mut parts = raw.split('\t');
        let head = parts.next().unwrap_or_default();
        let fields: Vec<&str> = parts.collect();
        let (tag, min, max) = match head.trim_end() {
            "O" => (Tag::Object, 1, 1),
            "S" => (Tag::State, 1, 2),
            "I" => (Tag::Ingredients, 1, 1),
            "M" => (Tag::Motion, 1, 1),
            "//" => (Tag::End, 0, 0),
            "G" => (Tag::Goal, 1, 1),
            other => {
                let shown: String = other.chars().take(24).collect();
                diags.push(error(line, format!("unknown line tag `{shown}`")));
                continue;
            }
        };
        if fields.len() < min || fields.len() > max || fields.iter().any(|f| f.trim().is_empty()) {
            diags.push(error(line, format!("malformed tab structure: `{}` takes {}", head.trim_end(), arity(min, max))));
            continue;
        }
        out.push(Record { line, tag, fields });
    }
    out
}

fn arity(min: usize, max: usize) -> String {
    match (min, max) {
        (0, 0) => "no fields".into(),
        (a, b) if a == b => format!("{a} field"),
        (a, b) => format!("{a} to {b} fields"),
    }
}

fn error(line: usize, message: String) -> Diagnostic {
    Diagnostic { line, message, severity: Severity::Error }
}

fn warning(line: usize, message: String) -> Diagnostic {
    Diagnostic { line, message, severity: Severity::Warning }
}

fn label(raw: &str, line: usize, diags: &mut Vec<Diagnostic>) -> Option<Symbol> {
    match Symbol::normalize(raw) {
        Ok(s) => Some(s),
        Err(e) => {
            diags.push(error(line, format!("bad label `{}`: {e}", raw.trim())));
            None
        }
    }
}

/// Builds one object node from its `O` record and the `S`/`I` records
/// that follow.
struct NodeBuilder {
    line: usize,
    node: Option<ObjectNode>,
    ingredients_set: bool,
}

impl NodeBuilder {
    fn start(rec: &Record<'_>, diags: &mut Vec<Diagnostic>) -> Self {
        let node = label(rec.fields[0], rec.line, diags).map(ObjectNode::new);
        NodeBuilder { line: rec.line, node, ingredients_set: false }
    }

    fn state(&mut self, rec: &Record<'_>, diags: &mut Vec<Diagnostic>) {
        let Some(state_label) = label(rec.fields[0], rec.line, diags) else {
            self.node = None;
            return;
        };
        let relative = match rec.fields.get(1) {
            Some(r) => match label(r, rec.line, diags) {
                Some(r) => Some(r),
                None => {
                    self.node = None;
                    return;
                }
            },
            None => None,
        };
        let geometric = Relation::parse(state_label.as_str()).is_some();
        let state = match (geometric, relative) {
            (true, Some(rel)) => StateAttribute::geometric(state_label, rel),
            (false, Some(rel)) => {
                diags.push(warning(
                    rec.line,
                    format!("`{state_label}` is not a relation; relative object `{rel}` ignored"),
                ));
                StateAttribute::physical(state_label)
            }
            (true, None) => {
                diags.push(warning(rec.line, format!("`{state_label}` without a relative object is read as physical")));
                StateAttribute::physical(state_label)
            }
            (false, None) => StateAttribute::physical(state_label),
        };
        if let Some(node) = &mut self.node {
            if let Err(e) = node.add_state(state) {
                diags.push(error(rec.line, e.to_string()));
            }
        }
    }

    fn ingredients(&mut self, rec: &Record<'_>, diags: &mut Vec<Diagnostic>) {
        if self.ingredients_set {
            diags.push(error(rec.line, "ingredients given twice for one object".into()));
            return;
        }
        self.ingredients_set = true;
        let mut set = BTreeSet::new();
        for part in rec.fields[0].split(',') {
            match label(part, rec.line, diags) {
                Some(s) => {
                    if !set.insert(s.clone()) {
                        diags.push(warning(rec.line, format!("ingredient `{s}` listed twice")));
                    }
                }
                None => {
                    self.node = None;
                    return;
                }
            }
        }
        if let Some(node) = &mut self.node {
            node.set_ingredients(set);
        }
    }
}

#[derive(Default)]
struct UnitBuilder {
    start: usize,
    inputs: Vec<ObjectNode>,
    motion: Option<(usize, Option<Symbol>)>,
    outputs: Vec<ObjectNode>,
    broken: bool,
}

impl UnitBuilder {
    fn push(&mut self, node: Option<ObjectNode>) {
        match node {
            None => self.broken = true,
            Some(n) if self.motion.is_some() => self.outputs.push(n),
            Some(n) => self.inputs.push(n),
        }
    }

    fn finish(self, line: usize, diags: &mut Vec<Diagnostic>) -> Option<FunctionalUnit> {
        let Some((motion_line, motion)) = self.motion else {
            diags.push(error(line, format!("missing motion line in unit starting at line {}", self.start)));
            return None;
        };
        if self.inputs.is_empty() {
            diags.push(error(motion_line, "unit has no input objects".into()));
            return None;
        }
        if self.outputs.is_empty() {
            diags.push(error(line, "unit has no output objects".into()));
            return None;
        }
        if self.broken {
            return None;
        }
        match FunctionalUnit::new(self.inputs, MotionNode::new(motion?), self.outputs) {
            Ok(u) => Some(u),
            Err(e) => {
                diags.push(error(self.start, e.to_string()));
                None
            }
        }
    }
}

/// Parses a subgraph. Unit order follows the file; duplicate units raise a
/// warning and are dropped.
pub fn parse_subgraph(text: &str) -> Result<Parsed<FoonGraph>, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let recs = records(text, &mut diags);
    let last_line = text.lines().count().max(1);

    let mut graph = FoonGraph::new();
    let mut unit: Option<UnitBuilder> = None;
    let mut node: Option<NodeBuilder> = None;
    let mut goals: Vec<(usize, Symbol)> = Vec::new();

    let flush_node = |node: &mut Option<NodeBuilder>, unit: &mut Option<UnitBuilder>| {
        if let (Some(n), Some(u)) = (node.take(), unit.as_mut()) {
            u.push(n.node);
        }
    };

    for rec in &recs {
        if !goals.is_empty() && rec.tag != Tag::Goal {
            diags.push(error(rec.line, "object line outside a unit: records follow the goal footer".into()));
            continue;
        }
        match rec.tag {
            Tag::Object => {
                flush_node(&mut node, &mut unit);
                if unit.is_none() {
                    unit = Some(UnitBuilder { start: rec.line, ..Default::default() });
                }
                node = Some(NodeBuilder::start(rec, &mut diags));
            }
            Tag::State | Tag::Ingredients => match &mut node {
                Some(n) if rec.tag == Tag::State => n.state(rec, &mut diags),
                Some(n) => n.ingredients(rec, &mut diags),
                None => diags.push(error(rec.line, "object line outside a unit: no object node is open".into())),
            },
            Tag::Motion => {
                flush_node(&mut node, &mut unit);
                let u = unit.get_or_insert_with(|| UnitBuilder { start: rec.line, ..Default::default() });
                if u.motion.is_some() {
                    diags.push(error(rec.line, "second motion line in one unit".into()));
                    u.broken = true;
                } else {
                    u.motion = Some((rec.line, label(rec.fields[0], rec.line, &mut diags)));
                    if u.motion.as_ref().is_some_and(|m| m.1.is_none()) {
                        u.broken = true;
                    }
                }
            }
            Tag::End => {
                flush_node(&mut node, &mut unit);
                match unit.take() {
                    None => diags.push(error(rec.line, "`//` without an open unit".into())),
                    Some(u) => {
                        if let Some(fu) = u.finish(rec.line, &mut diags) {
                            if !graph.push_unit(fu) {
                                diags.push(warning(rec.line, "duplicate functional unit dropped".into()));
                            }
                        }
                    }
                }
            }
            Tag::Goal => {
                if unit.is_some() || node.is_some() {
                    diags.push(error(rec.line, "goal footer inside an unterminated unit".into()));
                    node = None;
                    unit = None;
                }
                if let Some(g) = label(rec.fields[0], rec.line, &mut diags) {
                    goals.push((rec.line, g));
                }
            }
        }
    }
    if node.is_some() || unit.is_some() {
        diags.push(error(last_line, "last unit is missing its terminating `//`".into()));
    }
    for (line, g) in goals {
        match graph.find_goal(g.as_str()).cloned() {
            Some(n) => graph.mark_goal(n),
            None => diags.push(error(line, format!("goal `{g}` is not an output of any unit"))),
        }
    }
    if graph.is_empty() && !has_errors(&diags) {
        diags.push(warning(last_line.min(text.lines().count()), "file defines no functional units".into()));
    }
    if has_errors(&diags) {
        Err(diags)
    } else {
        Ok(Parsed { value: graph, warnings: diags })
    }
}

/// Parses raw bytes, reporting invalid UTF-8 as a diagnostic.
pub fn parse_subgraph_bytes(bytes: &[u8]) -> Result<Parsed<FoonGraph>, Vec<Diagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_subgraph(text),
        Err(e) => Err(vec![utf8_error(bytes, e)]),
    }
}

fn utf8_error(bytes: &[u8], e: std::str::Utf8Error) -> Diagnostic {
    let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
    error(line, "input is not valid UTF-8".into())
}

/// Parses a kitchen file: object blocks only.
pub fn parse_kitchen(text: &str) -> Result<Parsed<Vec<ObjectNode>>, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let recs = records(text, &mut diags);
    let mut nodes: Vec<(usize, Option<ObjectNode>)> = Vec::new();
    let mut node: Option<NodeBuilder> = None;
    for rec in &recs {
        match rec.tag {
            Tag::Object => {
                if let Some(n) = node.take() {
                    nodes.push((n.line, n.node));
                }
                node = Some(NodeBuilder::start(rec, &mut diags));
            }
            Tag::State | Tag::Ingredients => match &mut node {
                Some(n) if rec.tag == Tag::State => n.state(rec, &mut diags),
                Some(n) => n.ingredients(rec, &mut diags),
                None => diags.push(error(rec.line, "state line before any object".into())),
            },
            Tag::Motion | Tag::End | Tag::Goal => {
                diags.push(error(rec.line, "kitchen files hold object records only".into()));
            }
        }
    }
    if let Some(n) = node.take() {
        nodes.push((n.line, n.node));
    }
    let mut out: Vec<ObjectNode> = Vec::new();
    for (line, n) in nodes {
        let Some(n) = n else { continue };
        if out.contains(&n) {
            diags.push(warning(line, format!("object `{}` listed twice", n.label())));
        } else {
            out.push(n);
        }
    }
    if has_errors(&diags) {
        Err(diags)
    } else {
        Ok(Parsed { value: out, warnings: diags })
    }
}

fn write_node(out: &mut String, node: &ObjectNode) {
    let _ = writeln!(out, "O\t{}", node.label());
    for s in node.states() {
        match s.relative() {
            Some(r) => {
                let _ = writeln!(out, "S\t{}\t{r}", s.label());
            }
            None => {
                let _ = writeln!(out, "S\t{}", s.label());
            }
        }
    }
    if !node.ingredients().is_empty() {
        let labels: Vec<&str> = node.ingredients().iter().map(Symbol::as_str).collect();
        let _ = writeln!(out, "I\t{}", labels.join(","));
    }
}

/// Canonical text: states and ingredients sorted, no comments or blank
/// lines, goal footer in node order.
pub fn serialize_subgraph(graph: &FoonGraph) -> String {
    let mut out = String::new();
    for unit in graph.units() {
        for n in unit.inputs() {
            write_node(&mut out, n);
        }
        let _ = writeln!(out, "M\t{}", unit.motion().label());
        for n in unit.outputs() {
            write_node(&mut out, n);
        }
        out.push_str("//\n");
    }
    for g in graph.goal_candidates() {
        let _ = writeln!(out, "G\t{}", g.label());
    }
    out
}

pub fn serialize_kitchen(nodes: &[ObjectNode]) -> String {
    let mut out = String::new();
    for n in nodes {
        write_node(&mut out, n);
    }
    out
}
