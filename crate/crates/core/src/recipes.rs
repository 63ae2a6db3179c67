//! Built-in graphs: the two-unit vodka-and-ice example and the nine-unit
//! Bloody Mary recipe, plus the default object category map.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::graph::{FoonGraph, FunctionalUnit, MotionNode, ObjectNode, TaskTree};
use crate::Symbol;

fn s(label: &str) -> Symbol {
    Symbol::new(label).expect("valid label")
}

fn obj(label: &str) -> ObjectNode {
    ObjectNode::new(s(label))
}

fn unit(inputs: Vec<ObjectNode>, motion: &str, outputs: Vec<ObjectNode>) -> FunctionalUnit {
    FunctionalUnit::new(inputs, MotionNode::new(s(motion)), outputs).expect("well-formed unit")
}

/// Pour vodka into an empty glass, then pour ice on top.
pub fn vodka_ice_graph() -> FoonGraph {
    let bottle = obj("bottle").with_ingredients(["vodka"]);
    let glass = obj("drinking_glass").with_physical("empty");
    let glass_vodka = obj("drinking_glass").with_ingredients(["vodka"]);
    let mut g = FoonGraph::new();
    g.push_unit(unit(
        alloc::vec![bottle.clone(), glass],
        "pour",
        alloc::vec![bottle, glass_vodka.clone()],
    ));
    g.push_unit(unit(
        alloc::vec![obj("cup").with_ingredients(["ice"]), glass_vodka],
        "pour",
        alloc::vec![obj("cup").with_physical("empty"), vodka_ice_goal()],
    ));
    g.mark_goal(vodka_ice_goal());
    g
}

pub fn vodka_ice_kitchen() -> Vec<ObjectNode> {
    alloc::vec![
        obj("bottle").with_ingredients(["vodka"]),
        obj("cup").with_ingredients(["ice"]),
        obj("drinking_glass").with_physical("empty"),
        obj("table"),
    ]
}

pub fn vodka_ice_goal() -> ObjectNode {
    obj("drinking_glass").with_ingredients(["vodka", "ice"])
}

pub fn vodka_ice_tree() -> TaskTree {
    let g = vodka_ice_graph();
    TaskTree::new(g.units().to_vec(), alloc::vec![0, 1])
}

/// `(source, ingredient, motion, source emptied)` in recipe order.
pub const BLOODY_MARY_TRANSFERS: [(&str, &str, &str, bool); 7] = [
    ("bottle", "vodka", "pour", false),
    ("ice_cup", "ice", "pour", true),
    ("can", "tomato_juice", "pour", false),
    ("lemon_juice_cup", "lemon_juice", "pour", true),
    ("worcestershire_cup", "worcestershire_sauce", "pour", true),
    ("salt_shaker", "salt", "sprinkle", false),
    ("black_pepper_shaker", "black_pepper", "sprinkle", false),
];

pub const GLASS: &str = "drinking_glass";

/// Seven transfers into the glass, a stir with the spoon and a celery
/// garnish.
pub fn bloody_mary_graph() -> FoonGraph {
    let mut g = FoonGraph::new();
    let mut glass = obj(GLASS).with_physical("empty");
    let mut contents: Vec<&str> = Vec::new();
    for (source, ingredient, motion, emptied) in BLOODY_MARY_TRANSFERS {
        let src_in = obj(source).with_ingredients([ingredient]);
        let src_out = if emptied { obj(source).with_physical("empty") } else { src_in.clone() };
        contents.push(ingredient);
        let next = obj(GLASS).with_ingredients(contents.iter().copied());
        g.push_unit(unit(alloc::vec![src_in, glass], motion, alloc::vec![src_out, next.clone()]));
        glass = next;
    }
    let mixed = glass.clone().with_physical("mixed");
    g.push_unit(unit(alloc::vec![obj("spoon"), glass], "mix", alloc::vec![obj("spoon"), mixed.clone()]));
    let mut garnished = mixed.clone();
    contents.push("celery");
    garnished.set_ingredients(contents.iter().map(|l| s(l)).collect());
    g.push_unit(unit(alloc::vec![obj("celery"), mixed], "insert", alloc::vec![garnished.clone()]));
    g.mark_goal(garnished);
    g
}

pub fn bloody_mary_goal() -> ObjectNode {
    let mut labels: Vec<&str> = BLOODY_MARY_TRANSFERS.iter().map(|t| t.1).collect();
    labels.push("celery");
    obj(GLASS).with_ingredients(labels).with_physical("mixed")
}

/// Starting objects: every source full, an empty glass, spoon, celery and
/// knife on the table.
pub fn bloody_mary_kitchen() -> Vec<ObjectNode> {
    let mut k: Vec<ObjectNode> =
        BLOODY_MARY_TRANSFERS.iter().map(|(src, ing, _, _)| obj(src).with_ingredients([*ing])).collect();
    k.push(obj(GLASS).with_physical("empty"));
    k.push(obj("spoon"));
    k.push(obj("celery"));
    k.push(obj("knife"));
    k.push(obj("table"));
    k
}

pub fn bloody_mary_tree() -> TaskTree {
    let g = bloody_mary_graph();
    TaskTree::new(g.units().to_vec(), (0..g.len()).collect())
}

/// Label to category map used to generalize action contexts.
pub fn default_categories() -> BTreeMap<Symbol, String> {
    [
        ("bottle", "pour_container"),
        ("can", "pour_container"),
        ("ice_cup", "pour_container"),
        ("lemon_juice_cup", "pour_container"),
        ("worcestershire_cup", "pour_container"),
        ("cup", "pour_container"),
        ("salt_shaker", "shaker"),
        ("black_pepper_shaker", "shaker"),
        ("drinking_glass", "glass"),
        ("spoon", "utensil"),
        ("knife", "utensil"),
        ("celery", "garnish"),
        ("vodka", "liquid"),
        ("tomato_juice", "liquid"),
        ("lemon_juice", "liquid"),
        ("worcestershire_sauce", "liquid"),
        ("ice", "solid"),
        ("salt", "seasoning"),
        ("black_pepper", "seasoning"),
    ]
    .into_iter()
    .map(|(l, c)| (s(l), String::from(c)))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::retrieve_task_tree;

    #[test]
    fn bloody_mary_retrieves_all_nine_units_in_order() {
        let g = bloody_mary_graph();
        assert_eq!(g.len(), 9);
        let tree = retrieve_task_tree(&g, &bloody_mary_goal(), &bloody_mary_kitchen()).unwrap();
        assert_eq!(tree.provenance(), &[0, 1, 2, 3, 4, 5, 6, 7, 8]);
        assert_eq!(tree, bloody_mary_tree());
        assert!(tree.is_topologically_consistent(&bloody_mary_kitchen()));
    }

    #[test]
    fn goal_is_marked() {
        let g = bloody_mary_graph();
        assert_eq!(g.find_goal(GLASS), Some(&bloody_mary_goal()));
        assert!(g.goal_candidates().contains(&bloody_mary_goal()));
    }
}
