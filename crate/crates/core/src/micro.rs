//! Micro level: the lifted robot-skill catalog and the per-macro-operator
//! micro problems.
//!
//! Facts about the macro-level `table` are relaxed at this level: `(on table
//! x)` / `(under x table)` become `(placed x)`, which `place-*` adds and
//! `pick` deletes. Every micro goal also asks for an empty gripper.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use thiserror::Error;

use crate::compiler::{Parameter, PlanningOperator};
use crate::pddl::{self, PddlDocument, PddlKind};
use crate::predicate::{Predicate, Relation, State};
use crate::Symbol;

pub const MICRO_DOMAIN: &str = "foon-micro";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MicroError {
    #[error("macro operator {macro_po}: {} precondition(s) do not hold", .violated.len())]
    PreconditionUnsatisfied { macro_po: Symbol, violated: Vec<Predicate> },
}

/// Object types of the micro domain. `large-surface` is a `surface`; every
/// other type sits directly below `object`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolType {
    Object,
    /// Receives pours, sprinkles and garnishes (the drinking glass).
    Container,
    /// Pour source: bottles, cans, cups.
    Vessel,
    Shaker,
    Ingredient,
    Tool,
    Surface,
    LargeSurface,
    Robot,
}

impl SymbolType {
    pub const ALL: [SymbolType; 9] = [
        SymbolType::Object,
        SymbolType::Container,
        SymbolType::Vessel,
        SymbolType::Shaker,
        SymbolType::Ingredient,
        SymbolType::Tool,
        SymbolType::Surface,
        SymbolType::LargeSurface,
        SymbolType::Robot,
    ];

    pub fn parent(self) -> Option<SymbolType> {
        match self {
            SymbolType::Object => None,
            SymbolType::LargeSurface => Some(SymbolType::Surface),
            _ => Some(SymbolType::Object),
        }
    }

    pub fn is_a(self, other: SymbolType) -> bool {
        let mut t = Some(self);
        while let Some(cur) = t {
            if cur == other {
                return true;
            }
            t = cur.parent();
        }
        false
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SymbolType::Object => "object",
            SymbolType::Container => "container",
            SymbolType::Vessel => "vessel",
            SymbolType::Shaker => "shaker",
            SymbolType::Ingredient => "ingredient",
            SymbolType::Tool => "tool",
            SymbolType::Surface => "surface",
            SymbolType::LargeSurface => "large-surface",
            SymbolType::Robot => "robot",
        }
    }

    pub fn parse(s: &str) -> Option<SymbolType> {
        SymbolType::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypedSymbol {
    pub name: Symbol,
    pub ty: SymbolType,
}

impl TypedSymbol {
    pub fn new(name: Symbol, ty: SymbolType) -> Self {
        TypedSymbol { name, ty }
    }
}

/// `hand` (robot) and `air` (object).
pub fn reserved_symbols() -> [TypedSymbol; 2] {
    [TypedSymbol::new(Symbol::hand(), SymbolType::Robot), TypedSymbol::new(Symbol::air(), SymbolType::Object)]
}

fn v(name: &str) -> Symbol {
    Symbol::new(name).expect("valid variable")
}

fn r(rel: Relation, a: &str, b: &str) -> Predicate {
    Predicate::Relation { rel, focal: v(a), relative: v(b) }
}

fn at(label: &str, a: &str) -> Predicate {
    Predicate::Attribute { label: v(label), focal: v(a) }
}

fn op(name: &str, params: &[(&str, SymbolType)], pre: &[Predicate], add: &[Predicate], del: &[Predicate]) -> PlanningOperator {
    PlanningOperator::new(
        v(name),
        params.iter().map(|(n, t)| Parameter { name: v(n), ty: *t }).collect(),
        pre.iter().cloned().collect(),
        add.iter().cloned().collect(),
        del.iter().cloned().collect(),
    )
    .expect("catalog operators have disjoint effects")
}

/// The lifted micro-operator catalog.
pub fn micro_domain() -> Vec<PlanningOperator> {
    use Relation::*;
    use SymbolType as T;

    let pick = op(
        "pick",
        &[("?obj", T::Object), ("?surface", T::Object)],
        &[r(On, "?obj", "air"), r(Under, "?obj", "?surface"), r(On, "?surface", "?obj"), r(In, "hand", "air")],
        &[r(On, "?obj", "hand"), r(In, "hand", "?obj"), r(Under, "?obj", "air"), r(On, "?surface", "air")],
        &[
            r(On, "?obj", "air"),
            r(Under, "?obj", "?surface"),
            r(On, "?surface", "?obj"),
            r(In, "hand", "air"),
            at("placed", "?obj"),
        ],
    );
    let place = |name: &str, surface: SymbolType, size: &str| {
        op(
            name,
            &[("?obj", T::Object), ("?surface", surface)],
            &[
                r(On, "?obj", "hand"),
                r(Under, "?obj", "air"),
                r(On, "?surface", "air"),
                r(In, "hand", "?obj"),
                at(size, "?obj"),
            ],
            &[
                r(On, "?obj", "air"),
                r(In, "hand", "air"),
                r(Under, "?obj", "?surface"),
                r(On, "?surface", "?obj"),
                at("placed", "?obj"),
            ],
            &[r(In, "hand", "?obj"), r(On, "?obj", "hand"), r(Under, "?obj", "air"), r(On, "?surface", "air")],
        )
    };
    let transfer_pre = [
        r(Under, "?source", "air"),
        r(In, "?source", "?obj"),
        r(Under, "?obj", "?source"),
        r(In, "hand", "?source"),
        r(On, "?target", "air"),
        at("is-upright", "?target"),
    ];
    let pour_all = op(
        "pour-all",
        &[("?obj", T::Ingredient), ("?source", T::Vessel), ("?target", T::Container)],
        &transfer_pre,
        &[r(In, "?source", "air"), r(In, "?target", "?obj"), r(Under, "?obj", "?target")],
        &[r(In, "?source", "?obj"), r(In, "?target", "air"), r(Under, "?obj", "?source")],
    );
    let keep_source = |name: &str, source: SymbolType| {
        op(
            name,
            &[("?obj", T::Ingredient), ("?source", source), ("?target", T::Container)],
            &transfer_pre,
            &[r(In, "?target", "?obj"), r(Under, "?obj", "?target")],
            &[r(In, "?target", "air")],
        )
    };
    let mix = op(
        "mix",
        &[("?tool", T::Tool), ("?container", T::Container)],
        &[r(In, "hand", "?tool"), r(On, "?container", "air"), at("is-upright", "?container")],
        &[at("is-mixed", "?container")],
        &[],
    );
    let insert = op(
        "insert",
        &[("?obj", T::Ingredient), ("?target", T::Container)],
        &[r(In, "hand", "?obj"), r(On, "?obj", "hand"), r(Under, "?obj", "air"), at("is-upright", "?target")],
        &[r(In, "?target", "?obj"), r(Under, "?obj", "?target"), r(In, "hand", "air")],
        &[r(In, "hand", "?obj"), r(On, "?obj", "hand"), r(Under, "?obj", "air"), r(In, "?target", "air")],
    );
    let flip = op(
        "flip",
        &[("?obj", T::Container)],
        &[r(In, "hand", "?obj"), at("is-upside-down", "?obj")],
        &[at("is-upright", "?obj")],
        &[at("is-upside-down", "?obj")],
    );
    alloc::vec![
        pick,
        place("place-small", T::Surface, "is-small"),
        place("place-large", T::LargeSurface, "is-large"),
        pour_all,
        keep_source("pour-some", T::Vessel),
        keep_source("sprinkle", T::Shaker),
        mix,
        insert,
        flip,
    ]
}

/// Renders the micro domain with `hand` and `air` as constants.
pub fn emit_micro_domain() -> PddlDocument {
    let ops = micro_domain();
    let reserved = reserved_symbols();
    let attributes: BTreeSet<Symbol> = ops
        .iter()
        .flat_map(|o| o.preconditions().iter().chain(o.add_effects()).chain(o.delete_effects()))
        .filter_map(|p| match p {
            Predicate::Attribute { label, .. } => Some(label.clone()),
            _ => None,
        })
        .collect();
    let types: Vec<(&str, &str)> =
        SymbolType::ALL.iter().filter_map(|t| t.parent().map(|p| (t.as_str(), p.as_str()))).collect();
    let text = pddl::render_domain(&pddl::DomainSpec {
        name: MICRO_DOMAIN,
        types: &types,
        constants: reserved.iter().map(|t| (&t.name, t.ty.as_str())).collect(),
        attributes: attributes.iter().collect(),
        argument_type: "object",
        operators: &ops,
    });
    PddlDocument { kind: PddlKind::Domain, name: Symbol::new(MICRO_DOMAIN).unwrap(), text }
}

/// Initial state and goal for refining one macro operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicroProblem {
    pub init: State,
    pub goal: BTreeSet<Predicate>,
    pub domain_ref: Symbol,
    pub source_macro: Symbol,
}

impl MicroProblem {
    /// PDDL problem text over `objects` (reserved constants are left to the
    /// domain).
    pub fn to_pddl(&self, objects: &[TypedSymbol]) -> PddlDocument {
        let objs: Vec<(&Symbol, &str)> = objects
            .iter()
            .filter(|o| !o.name.is_reserved())
            .map(|o| (&o.name, o.ty.as_str()))
            .collect();
        let name = alloc::format!("{}-micro", self.source_macro);
        let text = pddl::render_problem(&pddl::ProblemSpec {
            name: &name,
            domain: MICRO_DOMAIN,
            objects: objs,
            init: self.init.facts(),
            goal: &self.goal,
        });
        PddlDocument { kind: PddlKind::Problem, name: Symbol::new(&name).unwrap(), text }
    }
}

fn placed(x: &Symbol) -> Predicate {
    Predicate::attribute(Symbol::new("placed").unwrap(), x.clone())
}

/// The object a table-level fact places, if it is one.
fn table_fact_object(fact: &Predicate) -> Option<&Symbol> {
    match fact {
        Predicate::Relation { rel: Relation::On, focal, relative } if focal.is_table() => Some(relative),
        Predicate::Relation { rel: Relation::Under, focal, relative } if relative.is_table() => Some(focal),
        _ => None,
    }
}

fn relax(fact: &Predicate) -> Predicate {
    match table_fact_object(fact) {
        Some(x) => placed(x),
        None => fact.clone(),
    }
}

/// Micro goal for a macro operator: its add effects plus the preconditions it
/// keeps, with table facts relaxed to `placed`, plus an empty gripper.
pub fn micro_goal(macro_po: &PlanningOperator) -> BTreeSet<Predicate> {
    let kept = macro_po.preconditions().difference(macro_po.delete_effects());
    let mut goal: BTreeSet<Predicate> = macro_po.add_effects().iter().chain(kept).map(relax).collect();
    goal.insert(Predicate::Relation { rel: Relation::In, focal: Symbol::hand(), relative: Symbol::air() });
    goal
}

/// Relaxed delete effects of a macro operator (used when accumulating goals
/// over several units).
pub fn relaxed_deletes(macro_po: &PlanningOperator) -> BTreeSet<Predicate> {
    macro_po.delete_effects().iter().map(relax).collect()
}

/// Macro preconditions that `current` does not satisfy. A table fact about
/// `x` holds when `x` rests on any support (a cell or another object).
pub fn unsatisfied_preconditions(macro_po: &PlanningOperator, current: &State) -> Vec<Predicate> {
    macro_po
        .preconditions()
        .iter()
        .filter(|fact| match table_fact_object(fact) {
            Some(x) => !rests_on_something(current, x),
            None => !current.contains(fact),
        })
        .cloned()
        .collect()
}

fn rests_on_something(state: &State, x: &Symbol) -> bool {
    state.iter().any(|f| match f {
        Predicate::Relation { rel: Relation::Under, focal, relative } if focal == x && !relative.is_air() => {
            state.contains(&Predicate::Relation { rel: Relation::On, focal: relative.clone(), relative: x.clone() })
        }
        _ => false,
    })
}

pub fn build_micro_problem(macro_po: &PlanningOperator, current: &State) -> Result<MicroProblem, MicroError> {
    let violated = unsatisfied_preconditions(macro_po, current);
    if !violated.is_empty() {
        return Err(MicroError::PreconditionUnsatisfied { macro_po: macro_po.name().clone(), violated });
    }
    Ok(MicroProblem {
        init: current.clone(),
        goal: micro_goal(macro_po),
        domain_ref: Symbol::new(MICRO_DOMAIN).unwrap(),
        source_macro: macro_po.name().clone(),
    })
}

/// Goal of a single problem covering the first `n` macro operators: the
/// union of their micro goals minus facts deleted by a later operator.
pub fn accumulated_goal(ops: &[PlanningOperator]) -> BTreeSet<Predicate> {
    let mut goal = BTreeSet::new();
    for (i, op) in ops.iter().enumerate() {
        let mut g = micro_goal(op);
        for later in &ops[i + 1..] {
            for d in relaxed_deletes(later) {
                g.remove(&d);
            }
        }
        goal.extend(g);
    }
    goal
}

/// Map from variable to bound symbol, for instantiating catalog operators.
pub fn binding<'a>(op: &'a PlanningOperator, args: &'a [Symbol]) -> BTreeMap<&'a Symbol, &'a Symbol> {
    op.parameters().iter().map(|p| &p.name).zip(args.iter()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile_task_tree;
    use crate::recipes;
    use crate::sim::standard_scene;
    use Relation::*;

    fn find(name: &str) -> PlanningOperator {
        micro_domain().into_iter().find(|o| o.name().as_str() == name).unwrap()
    }

    fn set(facts: &[Predicate]) -> BTreeSet<Predicate> {
        facts.iter().cloned().collect()
    }

    #[test]
    fn pick_matches_reference() {
        let pick = find("pick");
        assert_eq!(
            pick.preconditions(),
            &set(&[r(On, "?obj", "air"), r(Under, "?obj", "?surface"), r(On, "?surface", "?obj"), r(In, "hand", "air")])
        );
        assert_eq!(
            pick.add_effects(),
            &set(&[r(On, "?obj", "hand"), r(In, "hand", "?obj"), r(Under, "?obj", "air"), r(On, "?surface", "air")])
        );
        // the four preconditions plus the derived placement fact
        assert!(pick.preconditions().is_subset(pick.delete_effects()));
        assert_eq!(pick.delete_effects().len(), 5);
    }

    #[test]
    fn pour_variants() {
        let all = find("pour-all");
        assert_eq!(all.add_effects(), &set(&[r(In, "?source", "air"), r(In, "?target", "?obj"), r(Under, "?obj", "?target")]));
        assert_eq!(
            all.delete_effects(),
            &set(&[r(In, "?source", "?obj"), r(In, "?target", "air"), r(Under, "?obj", "?source")])
        );
        let sprinkle = find("sprinkle");
        assert_eq!(sprinkle.delete_effects(), &set(&[r(In, "?target", "air")]));
        assert!(sprinkle.add_effects().contains(&r(In, "?target", "?obj")));
        let some = find("pour-some");
        assert_eq!(some.delete_effects(), sprinkle.delete_effects());
    }

    #[test]
    fn catalog_invariants() {
        for op in micro_domain() {
            assert!(op.add_effects().is_disjoint(op.delete_effects()), "{}", op.name());
            for set in [op.preconditions(), op.add_effects(), op.delete_effects()] {
                let hand_in = set
                    .iter()
                    .filter(|p| matches!(p, Predicate::Relation { rel: In, focal, .. } if focal.is_hand()))
                    .count();
                assert!(hand_in <= 1, "{}", op.name());
            }
            // anything that puts something in the hand takes the previous thing out
            let adds_hand = op.add_effects().iter().any(|p| matches!(p, Predicate::Relation { rel: In, focal, .. } if focal.is_hand()));
            if adds_hand {
                assert!(op.delete_effects().iter().any(|p| matches!(p, Predicate::Relation { rel: In, focal, .. } if focal.is_hand())));
            }
        }
    }

    #[test]
    fn type_hierarchy() {
        assert!(SymbolType::LargeSurface.is_a(SymbolType::Surface));
        assert!(SymbolType::LargeSurface.is_a(SymbolType::Object));
        assert!(!SymbolType::Surface.is_a(SymbolType::LargeSurface));
        assert!(!SymbolType::Vessel.is_a(SymbolType::Container));
        assert_eq!(SymbolType::parse("large-surface"), Some(SymbolType::LargeSurface));
    }

    #[test]
    fn pour_vodka_goal() {
        let ops = compile_task_tree(&recipes::bloody_mary_tree()).unwrap();
        let state = standard_scene().to_state();
        let problem = build_micro_problem(&ops[0], &state).unwrap();
        assert_eq!(problem.source_macro.as_str(), "pour_vodka_0");
        assert_eq!(problem.init, state);
        let expected = set(&[
            Predicate::rel(In, "drinking_glass", "vodka"),
            Predicate::rel(Under, "vodka", "drinking_glass"),
            Predicate::rel(In, "bottle", "vodka"),
            Predicate::rel(Under, "vodka", "bottle"),
            Predicate::attr("placed", "bottle"),
            Predicate::attr("placed", "drinking_glass"),
            Predicate::rel(In, "hand", "air"),
        ]);
        assert_eq!(problem.goal, expected);
    }

    #[test]
    fn unsatisfied_macro_preconditions_reported() {
        let ops = compile_task_tree(&recipes::bloody_mary_tree()).unwrap();
        let state = standard_scene().to_state();
        // the ice unit needs vodka in the glass first
        match build_micro_problem(&ops[1], &state) {
            Err(MicroError::PreconditionUnsatisfied { violated, .. }) => {
                assert!(violated.contains(&Predicate::rel(In, "drinking_glass", "vodka")));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_effect_goal_is_filtered_preconditions() {
        let spoon = crate::graph::ObjectNode::new(Symbol::new("spoon").unwrap());
        let unit = crate::graph::FunctionalUnit::new(
            alloc::vec![spoon.clone()],
            crate::graph::MotionNode::new(Symbol::new("hold").unwrap()),
            alloc::vec![spoon],
        )
        .unwrap();
        let op = crate::compiler::compile_macro_po(&unit, 0).unwrap();
        assert_eq!(micro_goal(&op), set(&[Predicate::attr("placed", "spoon"), Predicate::rel(In, "hand", "air")]));
    }

    #[test]
    fn accumulated_goal_drops_later_deletes() {
        let ops = compile_task_tree(&recipes::bloody_mary_tree()).unwrap();
        let g = accumulated_goal(&ops);
        assert!(!g.contains(&Predicate::attr("placed", "celery")));
        assert!(!g.contains(&Predicate::rel(In, "drinking_glass", "air")));
        assert!(g.contains(&Predicate::attr("is-mixed", "drinking_glass")));
        assert!(g.contains(&Predicate::rel(In, "drinking_glass", "celery")));
        let first = accumulated_goal(&ops[..1]);
        assert_eq!(first, micro_goal(&ops[0]));
    }

    #[test]
    fn micro_domain_golden() {
        assert_eq!(emit_micro_domain().text, include_str!("../tests/golden/micro_domain.pddl"));
    }
}
