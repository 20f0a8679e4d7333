mod common;

use std::collections::BTreeSet;

use circuitum::decomposition::{
    all_antichain_partitions, all_convex_partitions, compose, decompose, is_antichain, is_convex, isomorphic,
    layer_eager, layer_lazy, slice, GateSet,
};
use circuitum::ir::{Circuit, NodeId, RawCircuit};
use circuitum::random::random_balanced_circuit;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn balanced(seed: u64, width: usize, gates: usize) -> Circuit {
    random_balanced_circuit(&mut ChaCha8Rng::seed_from_u64(seed), width, gates, 3)
}

fn subsets(gates: &[NodeId]) -> impl Iterator<Item = GateSet> + '_ {
    (0u32..1 << gates.len())
        .map(move |m| gates.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &g)| g).collect())
}

/// Same structure under a renaming of every node and edge.
fn renamed(c: &Circuit) -> Circuit {
    let mut out = RawCircuit::new();
    for n in c.nodes() {
        let name = format!("n_{}", c.node_name(n));
        out = match c.kind(n) {
            circuitum::ir::NodeKind::Input(r) => out.input(name, r),
            circuitum::ir::NodeKind::Output(r) => out.output(name, r),
            circuitum::ir::NodeKind::Gate => out.gate(name),
        };
    }
    for e in c.edges() {
        let (s, t) = (format!("n_{}", c.node_name(c.source(e))), format!("n_{}", c.node_name(c.target(e))));
        out = out.wire(format!("w_{}", c.edge_name(e)), s, t, c.timeline(e).unwrap());
    }
    out.build().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn slices_are_deterministic(seed: u64, w in 1usize..6, g in 0usize..9, mask: u32) {
        let c = balanced(seed, w, g);
        let gates: Vec<NodeId> = c.gates().collect();
        let x: GateSet = gates.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &g)| g).collect();
        match (slice(&c, &x), slice(&c, &x)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a, &b);
                prop_assert_eq!(a.width().unwrap(), w);
                prop_assert_eq!(a.gate_count(), x.len());
            }
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            _ => prop_assert!(false, "slice is not deterministic"),
        }
    }

    #[test]
    fn decomposition_roundtrip(seed: u64, w in 1usize..5, g in 1usize..7) {
        let c = balanced(seed, w, g);
        for p in all_convex_partitions(&c, 20_000).unwrap() {
            let parts = decompose(&c, p.blocks()).unwrap();
            prop_assert_eq!(parts.len(), p.len());
            prop_assert_eq!(compose(&parts).unwrap(), c.clone());
        }
    }

    #[test]
    fn eager_and_lazy_layerings(seed: u64, w in 1usize..6, g in 0usize..9) {
        let c = balanced(seed, w, g);
        let d = c.depth();
        for p in [layer_eager(&c), layer_lazy(&c)] {
            prop_assert_eq!(p.len(), d);
            for b in p.blocks() {
                prop_assert!(is_antichain(&c, b));
                for &x in b {
                    for &y in b {
                        prop_assert!(!c.is_earlier(x, y));
                    }
                }
            }
        }
        for p in all_antichain_partitions(&c, 2_000).unwrap_or_default() {
            prop_assert!(p.len() >= d);
        }
    }

    #[test]
    fn convexity_matches_path_enumeration(seed: u64, w in 1usize..5, g in 0usize..8) {
        let c = balanced(seed, w, g);
        let gates: Vec<NodeId> = c.gates().collect();
        for x in subsets(&gates) {
            prop_assert_eq!(is_convex(&c, &x).unwrap(), common::convex_by_paths(&c, &x));
        }
    }

    #[test]
    fn antichains_are_convex_and_slice_to_depth_one(seed: u64, w in 1usize..5, g in 0usize..8) {
        let c = balanced(seed, w, g);
        let gates: Vec<NodeId> = c.gates().collect();
        for x in subsets(&gates) {
            let v: Vec<NodeId> = x.iter().copied().collect();
            let anti = is_antichain(&c, &v);
            if anti {
                prop_assert!(is_convex(&c, &x).unwrap());
            }
            if is_convex(&c, &x).unwrap() {
                let s = slice(&c, &x).unwrap();
                prop_assert_eq!(s.depth() == 1, anti && !x.is_empty());
            }
        }
    }

    #[test]
    fn renamed_copies_are_isomorphic(seed: u64, w in 1usize..6, g in 0usize..9) {
        let c = balanced(seed, w, g);
        let r = renamed(&c);
        let wit = isomorphic(&c, &r);
        prop_assert!(wit.is_some());
        let wit = wit.unwrap();
        for (a, b) in wit.nodes {
            prop_assert_eq!(format!("n_{}", c.node_name(a)), r.node_name(b));
        }
    }
}

#[test]
fn two_gate_example_decomposes() {
    let c = RawCircuit::threaded(3, &[("G1", vec![1, 2]), ("G2", vec![1, 3])]).build().unwrap();
    let g: BTreeSet<NodeId> = c.gate_set(&["G2"]).unwrap();
    let s = slice(&c, &g).unwrap();
    assert_eq!(s.gate_count(), 1);
    assert_eq!(s.depth(), 1);
    let parts = decompose(&c, &[c.gate_set(&["G1"]).unwrap().into_iter().collect(), g.into_iter().collect()]).unwrap();
    assert_eq!(compose(&parts).unwrap(), c);
    assert_eq!(layer_eager(&c).display(&c), "G1 | G2");
}
