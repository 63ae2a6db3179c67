//! Generators shared by the integration tests.
#![allow(dead_code)]

use foonplan::foonplan_core::graph::{FoonGraph, FunctionalUnit, MotionNode, ObjectNode, StateAttribute};
use foonplan::foonplan_core::Symbol;
use proptest::prelude::*;

const LABELS: [&str; 7] = ["bowl", "cup", "knife", "tomato", "cutting_board", "drinking_glass", "salt"];
const PHYSICAL: [&str; 5] = ["empty", "whole", "sliced", "mixed", "chopped"];
const RELATIONS: [&str; 3] = ["in", "on", "under"];
const MOTIONS: [&str; 5] = ["pour", "slice", "mix", "pick", "sprinkle"];

fn s(l: &str) -> Symbol {
    Symbol::new(l).unwrap()
}

/// Random object node: a label, up to three states with distinct labels,
/// up to three ingredients.
pub fn object_node() -> impl Strategy<Value = ObjectNode> {
    (
        0..LABELS.len(),
        proptest::collection::btree_set(0..PHYSICAL.len() + RELATIONS.len(), 0..3),
        proptest::collection::vec(0..LABELS.len(), 3),
        proptest::collection::btree_set(0..LABELS.len(), 0..3),
    )
        .prop_map(|(l, states, rels, ingredients)| {
            let mut n = ObjectNode::new(s(LABELS[l]));
            for (k, st) in states.into_iter().enumerate() {
                let attr = if st < PHYSICAL.len() {
                    StateAttribute::physical(s(PHYSICAL[st]))
                } else {
                    let mut r = rels[k];
                    if r == l {
                        r = (r + 1) % LABELS.len();
                    }
                    StateAttribute::geometric(s(RELATIONS[st - PHYSICAL.len()]), s(LABELS[r]))
                };
                n.add_state(attr).unwrap();
            }
            n.set_ingredients(ingredients.into_iter().map(|i| s(LABELS[i])).collect());
            n
        })
}

fn distinct(nodes: Vec<ObjectNode>) -> Vec<ObjectNode> {
    let mut out: Vec<ObjectNode> = Vec::new();
    for n in nodes {
        if !out.contains(&n) {
            out.push(n);
        }
    }
    out
}

pub fn unit() -> impl Strategy<Value = FunctionalUnit> {
    (
        proptest::collection::vec(object_node(), 1..4),
        0..MOTIONS.len(),
        proptest::collection::vec(object_node(), 1..4),
    )
        .prop_map(|(i, m, o)| FunctionalUnit::new(distinct(i), MotionNode::new(s(MOTIONS[m])), distinct(o)).unwrap())
}

/// Random graph whose goal candidates are the nodes a `G` footer line
/// resolves to: the last output carrying the label.
pub fn graph(max_units: usize) -> impl Strategy<Value = FoonGraph> {
    (proptest::collection::vec(unit(), 0..max_units), proptest::collection::vec(0..LABELS.len(), 0..3)).prop_map(
        |(units, goals)| {
            let mut g = FoonGraph::new();
            for u in units {
                g.push_unit(u);
            }
            let mut marks = Vec::new();
            for l in goals {
                if let Some(n) = g.find_goal(LABELS[l]) {
                    marks.push(n.clone());
                }
            }
            for n in marks {
                g.mark_goal(n);
            }
            g
        },
    )
}
