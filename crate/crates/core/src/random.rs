//! Seedable generators for circuits, gate payloads and posets.

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::boolean::{attach_boolean, BooleanCircuit, BooleanFunction, GateSpec};
use crate::ir::{Circuit, RawCircuit};
use crate::order::Poset;
use crate::quantum::{attach_quantum, lift_to_width, permutation_lift, ComplexMatrix, QuantumCircuit, UnitaryMatrix};

/// Random timeline sets for `gates` gates on `width` timelines, each of
/// arity between 1 and `max_arity`.
pub fn random_layout<R: Rng + ?Sized>(
    rng: &mut R,
    width: usize,
    gates: usize,
    max_arity: usize,
) -> Vec<(String, Vec<usize>)> {
    assert!(width >= 1 && max_arity >= 1, "need at least one timeline");
    let lines: Vec<usize> = (1..=width).collect();
    (1..=gates)
        .map(|i| {
            let r = rng.random_range(1..=max_arity.min(width));
            let mut chosen: Vec<usize> = lines.choose_multiple(rng, r).copied().collect();
            chosen.sort_unstable();
            (format!("G{i}"), chosen)
        })
        .collect()
}

pub fn random_balanced_circuit<R: Rng + ?Sized>(rng: &mut R, width: usize, gates: usize, max_arity: usize) -> Circuit {
    let layout = random_layout(rng, width, gates, max_arity);
    RawCircuit::threaded(width, &layout).build().expect("threaded layouts are valid")
}

pub fn random_permutation<R: Rng + ?Sized>(rng: &mut R, r: usize) -> BooleanFunction {
    let mut table: Vec<u32> = (0..1u32 << r).collect();
    table.shuffle(rng);
    BooleanFunction::new(r, r, table).expect("a shuffled identity is a permutation")
}

pub fn random_function<R: Rng + ?Sized>(rng: &mut R, k: usize, l: usize) -> BooleanFunction {
    let table = (0..1usize << k).map(|_| rng.random_range(0..1u32 << l)).collect();
    BooleanFunction::new(k, l, table).expect("values fit in l bits")
}

/// Gate tables: permutations with probability `p_reversible`, otherwise
/// arbitrary balanced functions (which may still happen to be bijective).
pub fn random_boolean_circuit<R: Rng + ?Sized>(rng: &mut R, c: Circuit, p_reversible: f64) -> BooleanCircuit {
    let specs: BTreeMap<_, _> = c
        .gates()
        .map(|g| {
            let r = c.incoming(g).len();
            let f = if rng.random_bool(p_reversible) { random_permutation(rng, r) } else { random_function(rng, r, r) };
            (g, GateSpec::from(f))
        })
        .collect();
    attach_boolean(c, specs).expect("tables match arities")
}

/// A unitary on `r` qubits: a product of one to three factors drawn from H
/// and T on one qubit, CNOT and SWAP on two, and permutation lifts.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, r: usize) -> UnitaryMatrix {
    let qubits: Vec<usize> = (1..=r).collect();
    let mut acc = ComplexMatrix::identity(1 << r);
    for _ in 0..rng.random_range(1..=3) {
        let choice = rng.random_range(0..if r >= 2 { 4 } else { 3 });
        let (u, arity) = match choice {
            0 => (UnitaryMatrix::hadamard(), 1),
            1 => (UnitaryMatrix::t_gate(), 1),
            2 => (permutation_lift(&random_permutation(rng, r)).expect("permutation"), r),
            _ => (UnitaryMatrix::builtin(if rng.random_bool(0.5) { "CNOT" } else { "SWAP" }).expect("builtin"), 2),
        };
        let mut active: Vec<usize> = qubits.choose_multiple(rng, arity).copied().collect();
        active.sort_unstable();
        let lifted = lift_to_width(&u, &active, r).and_then(|op| op.to_matrix()).expect("small lift");
        acc = lifted.mul(&acc);
    }
    UnitaryMatrix::new(acc).expect("products of unitaries are unitary")
}

pub fn random_quantum_circuit<R: Rng + ?Sized>(rng: &mut R, c: Circuit) -> QuantumCircuit {
    let specs: BTreeMap<_, _> =
        c.gates().map(|g| (g, random_unitary(rng, c.incoming(g).len()).into_matrix())).collect();
    attach_quantum(c, specs).expect("dimensions match arities")
}

/// Every gate a permutation lift; the Boolean circuit is returned alongside.
pub fn random_permutation_circuits<R: Rng + ?Sized>(rng: &mut R, c: Circuit) -> (BooleanCircuit, QuantumCircuit) {
    let b = random_boolean_circuit(rng, c, 1.0);
    let q = QuantumCircuit::from_boolean(&b).expect("permutation tables lift");
    (b, q)
}

/// The transitive closure of a random DAG on `0..n`, each forward pair an
/// edge with probability `density` before relabelling.
pub fn random_poset<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64) -> Poset<usize> {
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                pairs.push((labels[i], labels[j]));
            }
        }
    }
    Poset::new(0..n, pairs, true).expect("forward edges are acyclic")
}

pub fn random_word<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<bool> {
    (0..len).map(|_| rng.random_bool(0.5)).collect()
}
