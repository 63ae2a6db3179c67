mod common;

use foonplan::foon::{parse_kitchen, parse_subgraph, parse_subgraph_bytes, serialize_kitchen, serialize_subgraph};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn roundtrip_random_graphs(g in common::graph(6)) {
        let text = serialize_subgraph(&g);
        let back = parse_subgraph(&text).unwrap().value;
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(serialize_subgraph(&back), text);
    }

    #[test]
    fn kitchen_roundtrip(nodes in proptest::collection::vec(common::object_node(), 0..6)) {
        let mut k = Vec::new();
        for n in nodes {
            if !k.contains(&n) {
                k.push(n);
            }
        }
        prop_assert_eq!(parse_kitchen(&serialize_kitchen(&k)).unwrap().value, k);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn arbitrary_bytes_give_diagnostics(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        if let Err(diags) = parse_subgraph_bytes(&bytes) {
            prop_assert!(!diags.is_empty());
            let lines = bytes.split(|&b| b == b'\n').count();
            prop_assert!(diags.iter().all(|d| d.line >= 1 && d.line <= lines));
        }
    }

    #[test]
    fn record_soup_never_panics(parts in proptest::collection::vec(
        prop::sample::select(vec!["O", "S", "I", "M", "//", "G", "\t", "\n", "cup", "in", "a,b", " ", "#", "Q", "\r\n", ","]),
        0..60,
    )) {
        let text: String = parts.concat();
        match parse_subgraph(&text) {
            Ok(p) => {
                // canonical text is a fixpoint
                let once = serialize_subgraph(&p.value);
                prop_assert_eq!(serialize_subgraph(&parse_subgraph(&once).unwrap().value), once);
            }
            Err(diags) => {
                let lines = text.split('\n').count();
                prop_assert!(diags.iter().all(|d| d.line >= 1 && d.line <= lines), "{:?}", diags);
            }
        }
    }
}
