//! Object-centred predicates and world states.
//!
//! A relation `(rel focal relative)` is read from the focal object's point of
//! view: `(in bowl tomato)` says the tomato is inside the bowl, `(on table
//! cup)` that the cup stands on the table, `(under cup table)` that the table
//! is below the cup. `air` marks an empty interior or a free top surface.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::graph::ObjectNode;
use crate::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredicateError {
    #[error("unknown geometric relation {0} (expected in, on or under)")]
    UnknownRelation(Symbol),
    #[error("relation ({rel} {focal} {focal}) relates an object to itself")]
    SelfRelation { rel: Relation, focal: Symbol },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    In,
    On,
    Under,
}

impl Relation {
    pub fn parse(label: &str) -> Option<Relation> {
        match label {
            "in" => Some(Relation::In),
            "on" => Some(Relation::On),
            "under" => Some(Relation::Under),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::In => "in",
            Relation::On => "on",
            Relation::Under => "under",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Predicate {
    Relation { rel: Relation, focal: Symbol, relative: Symbol },
    /// `label` is the full predicate name, e.g. `is-mixed` or `placed`.
    Attribute { label: Symbol, focal: Symbol },
}

impl Predicate {
    pub fn relation(rel: Relation, focal: Symbol, relative: Symbol) -> Result<Self, PredicateError> {
        if focal == relative {
            return Err(PredicateError::SelfRelation { rel, focal });
        }
        Ok(Predicate::Relation { rel, focal, relative })
    }

    pub fn attribute(label: Symbol, focal: Symbol) -> Self {
        Predicate::Attribute { label, focal }
    }

    /// Relation between two symbols known to differ. Panics otherwise.
    pub fn rel(rel: Relation, focal: &str, relative: &str) -> Self {
        Predicate::relation(rel, Symbol::new(focal).unwrap(), Symbol::new(relative).unwrap())
            .expect("distinct relation arguments")
    }

    pub fn attr(label: &str, focal: &str) -> Self {
        Predicate::attribute(Symbol::new(label).unwrap(), Symbol::new(focal).unwrap())
    }

    pub fn name(&self) -> &str {
        match self {
            Predicate::Relation { rel, .. } => rel.as_str(),
            Predicate::Attribute { label, .. } => label.as_str(),
        }
    }

    pub fn args(&self) -> Vec<&Symbol> {
        match self {
            Predicate::Relation { focal, relative, .. } => alloc::vec![focal, relative],
            Predicate::Attribute { focal, .. } => alloc::vec![focal],
        }
    }

    pub fn mentions(&self, symbol: &Symbol) -> bool {
        self.args().into_iter().any(|a| a == symbol)
    }

    /// Replaces variables via `binding`. `None` if the result would relate a
    /// symbol to itself.
    pub fn substitute(&self, binding: &BTreeMap<&Symbol, &Symbol>) -> Option<Predicate> {
        let map = |s: &Symbol| -> Symbol { binding.get(s).map(|&v| v.clone()).unwrap_or_else(|| s.clone()) };
        match self {
            Predicate::Relation { rel, focal, relative } => Predicate::relation(*rel, map(focal), map(relative)).ok(),
            Predicate::Attribute { label, focal } => Some(Predicate::attribute(label.clone(), map(focal))),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Relation { rel, focal, relative } => write!(f, "({rel} {focal} {relative})"),
            Predicate::Attribute { label, focal } => write!(f, "({label} {focal})"),
        }
    }
}

/// Physical state labels with a fixed meaning. Others still translate to
/// `(is-<label> obj)`; callers may warn about them.
pub const KNOWN_PHYSICAL_STATES: &[&str] = &["whole", "sliced", "mixed", "chopped", "cooked", "empty"];

pub fn is_known_physical_state(label: &str) -> bool {
    KNOWN_PHYSICAL_STATES.contains(&label)
}

/// Translates a FOON object node into macro-level facts.
///
/// Geometric states become relations with the node as focal object (plus the
/// inverse `under` fact), `empty` becomes `(in obj air)`, other physical
/// states become `(is-<state> obj)`, each ingredient becomes an
/// `(in obj ingredient)`/`(under ingredient obj)` pair, and nodes without an
/// `on`/`under` state default to standing on the table.
pub fn object_node_to_predicates(node: &ObjectNode) -> Result<BTreeSet<Predicate>, PredicateError> {
    let mut facts = BTreeSet::new();
    let label = node.label();
    if label.is_table() {
        return Ok(facts);
    }
    let mut placed = false;
    for state in node.states() {
        match state.relative() {
            Some(relative) => {
                let rel = Relation::parse(state.label().as_str())
                    .ok_or_else(|| PredicateError::UnknownRelation(state.label().clone()))?;
                facts.insert(Predicate::relation(rel, label.clone(), relative.clone())?);
                if !relative.is_air() {
                    let inverse = match rel {
                        Relation::In | Relation::On => Predicate::relation(Relation::Under, relative.clone(), label.clone())?,
                        Relation::Under => Predicate::relation(Relation::On, relative.clone(), label.clone())?,
                    };
                    facts.insert(inverse);
                }
                placed |= matches!(rel, Relation::On | Relation::Under);
            }
            None if state.label().as_str() == "empty" => {
                facts.insert(Predicate::relation(Relation::In, label.clone(), Symbol::air())?);
            }
            None => {
                let name = Symbol::new(&format!("is-{}", state.label())).expect("valid attribute name");
                facts.insert(Predicate::attribute(name, label.clone()));
            }
        }
    }
    for ingredient in node.ingredients() {
        facts.insert(Predicate::relation(Relation::In, label.clone(), ingredient.clone())?);
        facts.insert(Predicate::relation(Relation::Under, ingredient.clone(), label.clone())?);
    }
    if !placed {
        facts.insert(Predicate::relation(Relation::On, Symbol::table(), label.clone())?);
        facts.insert(Predicate::relation(Relation::Under, label.clone(), Symbol::table())?);
    }
    Ok(facts)
}

/// A rule broken by a set of facts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub facts: Vec<Predicate>,
}

/// A set of ground facts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct State {
    facts: BTreeSet<Predicate>,
}

impl State {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn facts(&self) -> &BTreeSet<Predicate> {
        &self.facts
    }

    pub fn contains(&self, fact: &Predicate) -> bool {
        self.facts.contains(fact)
    }

    pub fn insert(&mut self, fact: Predicate) -> bool {
        self.facts.insert(fact)
    }

    pub fn remove(&mut self, fact: &Predicate) -> bool {
        self.facts.remove(fact)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Predicate> {
        self.facts.iter()
    }

    pub fn satisfies<'a>(&self, goal: impl IntoIterator<Item = &'a Predicate>) -> bool {
        goal.into_iter().all(|g| self.facts.contains(g))
    }

    /// Consistency rules:
    ///
    /// * the gripper holds exactly one thing (`air` included) at most;
    /// * `(in x air)` excludes any other `(in x y)`;
    /// * a surface other than `table` carries at most one `(on s ·)`;
    /// * an object rests on at most one support (`under` facts that are not
    ///   the inverse of a containment);
    /// * relations between non-reserved objects come in `in`/`on` vs `under`
    ///   pairs (`air` and `hand` are exempt).
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut hand = Vec::new();
        let mut empty: BTreeSet<&Symbol> = BTreeSet::new();
        let mut contents: BTreeMap<&Symbol, Vec<&Predicate>> = BTreeMap::new();
        let mut tops: BTreeMap<&Symbol, Vec<&Predicate>> = BTreeMap::new();
        let mut supports: BTreeMap<&Symbol, Vec<&Predicate>> = BTreeMap::new();
        let exempt = |s: &Symbol| s.is_air() || s.is_hand();

        for fact in &self.facts {
            let Predicate::Relation { rel, focal, relative } = fact else { continue };
            if focal == relative {
                out.push(Violation { rule: "self-relation", facts: alloc::vec![fact.clone()] });
            }
            match rel {
                Relation::In => {
                    if focal.is_hand() {
                        hand.push(fact);
                    } else if relative.is_air() {
                        empty.insert(focal);
                    } else {
                        contents.entry(focal).or_default().push(fact);
                    }
                    if !exempt(focal) && !exempt(relative) {
                        let inv = Predicate::Relation { rel: Relation::Under, focal: relative.clone(), relative: focal.clone() };
                        if !self.facts.contains(&inv) {
                            out.push(Violation { rule: "in-under pairing", facts: alloc::vec![fact.clone()] });
                        }
                    }
                }
                Relation::On => {
                    if !focal.is_table() && !focal.is_hand() {
                        tops.entry(focal).or_default().push(fact);
                    }
                    if !exempt(focal) && !exempt(relative) {
                        let inv = Predicate::Relation { rel: Relation::Under, focal: relative.clone(), relative: focal.clone() };
                        if !self.facts.contains(&inv) {
                            out.push(Violation { rule: "on-under pairing", facts: alloc::vec![fact.clone()] });
                        }
                    }
                }
                Relation::Under => {
                    let contained = self.facts.contains(&Predicate::Relation {
                        rel: Relation::In,
                        focal: relative.clone(),
                        relative: focal.clone(),
                    });
                    if !contained {
                        supports.entry(focal).or_default().push(fact);
                    }
                    if !exempt(focal) && !exempt(relative) && !contained {
                        let on = Predicate::Relation { rel: Relation::On, focal: relative.clone(), relative: focal.clone() };
                        if !self.facts.contains(&on) {
                            out.push(Violation { rule: "under pairing", facts: alloc::vec![fact.clone()] });
                        }
                    }
                }
            }
        }
        if hand.len() > 1 {
            out.push(Violation { rule: "gripper exclusivity", facts: hand.into_iter().cloned().collect() });
        }
        for (x, facts) in contents {
            if empty.contains(x) {
                let mut all: Vec<Predicate> = facts.into_iter().cloned().collect();
                all.push(Predicate::Relation { rel: Relation::In, focal: x.clone(), relative: Symbol::air() });
                out.push(Violation { rule: "empty container with contents", facts: all });
            }
        }
        for (_, facts) in tops {
            if facts.len() > 1 {
                out.push(Violation { rule: "one object per surface", facts: facts.into_iter().cloned().collect() });
            }
        }
        for (_, facts) in supports {
            if facts.len() > 1 {
                out.push(Violation { rule: "single support", facts: facts.into_iter().cloned().collect() });
            }
        }
        out
    }

    pub fn is_consistent(&self) -> bool {
        self.violations().is_empty()
    }
}

impl FromIterator<Predicate> for State {
    fn from_iter<T: IntoIterator<Item = Predicate>>(iter: T) -> Self {
        State { facts: iter.into_iter().collect() }
    }
}

impl Extend<Predicate> for State {
    fn extend<T: IntoIterator<Item = Predicate>>(&mut self, iter: T) {
        self.facts.extend(iter)
    }
}

impl<'a> IntoIterator for &'a State {
    type Item = &'a Predicate;
    type IntoIter = alloc::collections::btree_set::Iter<'a, Predicate>;

    fn into_iter(self) -> Self::IntoIter {
        self.facts.iter()
    }
}

pub use crate::sim::scene_to_state;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::StateAttribute;
    use crate::sym;
    use alloc::string::ToString;
    use Relation::*;

    fn set(facts: &[Predicate]) -> BTreeSet<Predicate> {
        facts.iter().cloned().collect()
    }

    #[test]
    fn render() {
        assert_eq!(Predicate::rel(In, "bottle", "vodka").to_string(), "(in bottle vodka)");
        assert_eq!(Predicate::attr("is-mixed", "drinking_glass").to_string(), "(is-mixed drinking_glass)");
    }

    #[test]
    fn self_relation_rejected() {
        assert!(Predicate::relation(On, sym!("a"), sym!("a")).is_err());
    }

    #[test]
    fn bottle_with_vodka() {
        let bottle = ObjectNode::new(sym!("bottle")).with_ingredients(["vodka"]);
        assert_eq!(
            object_node_to_predicates(&bottle).unwrap(),
            set(&[
                Predicate::rel(On, "table", "bottle"),
                Predicate::rel(Under, "bottle", "table"),
                Predicate::rel(In, "bottle", "vodka"),
                Predicate::rel(Under, "vodka", "bottle"),
            ])
        );
    }

    #[test]
    fn empty_glass() {
        let glass = ObjectNode::new(sym!("drinking_glass")).with_physical("empty");
        assert_eq!(
            object_node_to_predicates(&glass).unwrap(),
            set(&[
                Predicate::rel(In, "drinking_glass", "air"),
                Predicate::rel(On, "table", "drinking_glass"),
                Predicate::rel(Under, "drinking_glass", "table"),
            ])
        );
    }

    #[test]
    fn explicit_placement_suppresses_table_defaults() {
        let mut tomato = ObjectNode::new(sym!("tomato")).with_physical("sliced");
        tomato.add_state(StateAttribute::geometric(sym!("under"), sym!("cutting_board"))).unwrap();
        let facts = object_node_to_predicates(&tomato).unwrap();
        assert_eq!(
            facts,
            set(&[
                Predicate::rel(Under, "tomato", "cutting_board"),
                Predicate::rel(On, "cutting_board", "tomato"),
                Predicate::attr("is-sliced", "tomato"),
            ])
        );
        let mut lidded = ObjectNode::new(sym!("pot"));
        lidded.add_state(StateAttribute::geometric(sym!("on"), sym!("lid"))).unwrap();
        assert!(!object_node_to_predicates(&lidded).unwrap().iter().any(|p| p.mentions(&Symbol::table())));
    }

    #[test]
    fn unknown_relation() {
        let mut n = ObjectNode::new(sym!("pot"));
        n.add_state(StateAttribute::geometric(sym!("beside"), sym!("stove"))).unwrap();
        assert_eq!(object_node_to_predicates(&n), Err(PredicateError::UnknownRelation(sym!("beside"))));
    }

    #[test]
    fn consistency_rules() {
        let ok: State = [
            Predicate::rel(On, "table", "bottle"),
            Predicate::rel(Under, "bottle", "table"),
            Predicate::rel(In, "bottle", "vodka"),
            Predicate::rel(Under, "vodka", "bottle"),
            Predicate::rel(In, "glass", "vodka"),
            Predicate::rel(Under, "vodka", "glass"),
            Predicate::rel(In, "hand", "air"),
        ]
        .into_iter()
        .collect();
        assert!(ok.is_consistent(), "{:?}", ok.violations());

        let mut two_in_hand = ok.clone();
        two_in_hand.insert(Predicate::rel(In, "hand", "bottle"));
        assert_eq!(two_in_hand.violations()[0].rule, "gripper exclusivity");

        let mut unpaired = ok.clone();
        unpaired.remove(&Predicate::rel(Under, "bottle", "table"));
        assert!(!unpaired.is_consistent());

        let mut empty_and_full = ok.clone();
        empty_and_full.insert(Predicate::rel(In, "bottle", "air"));
        assert_eq!(empty_and_full.violations()[0].rule, "empty container with contents");

        let crowded: State = [
            Predicate::rel(On, "cell_1", "a"),
            Predicate::rel(Under, "a", "cell_1"),
            Predicate::rel(On, "cell_1", "b"),
            Predicate::rel(Under, "b", "cell_1"),
        ]
        .into_iter()
        .collect();
        assert_eq!(crowded.violations()[0].rule, "one object per surface");
    }
}
