mod common;

use std::collections::BTreeSet;

use foonplan::foonplan_core::graph::merge_subgraphs;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn idempotent(a in common::graph(6)) {
        prop_assert_eq!(merge_subgraphs(&[a.clone(), a.clone()]), a.clone());
        prop_assert_eq!(merge_subgraphs(&[a.clone()]), a);
    }

    #[test]
    fn commutative_up_to_order(a in common::graph(6), b in common::graph(6)) {
        let ab = merge_subgraphs(&[a.clone(), b.clone()]);
        let ba = merge_subgraphs(&[b.clone(), a.clone()]);
        let units = |g: &foonplan::foonplan_core::graph::FoonGraph| g.units().iter().cloned().collect::<BTreeSet<_>>();
        prop_assert_eq!(units(&ab), units(&ba));
        prop_assert_eq!(ab.goal_candidates(), ba.goal_candidates());
        let shared = units(&a).intersection(&units(&b)).count();
        prop_assert_eq!(ab.len(), a.len() + b.len() - shared);
    }
}
