//! Unitary semantics: gate matrices on active timelines, lifting to the full
//! register, antichain steps and state-vector simulation.

mod matrix;
mod state;

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

pub use matrix::{permutation_lift, ComplexMatrix, UnitaryMatrix, UNITARY_TOL};
pub use state::{states_equal, StateVector, NORM_TOL};

use crate::boolean::BooleanCircuit;
use crate::decomposition::{
    check_partition, compose_with_renames, decompose, is_antichain, slice, CoherentPartition, DecompositionError,
    GateSet, PartitionDefect,
};
use crate::ir::{Circuit, IrError, NodeId};

pub type Amplitude = Complex64;

/// Largest register the library will allocate.
pub const DEFAULT_WIDTH_CAP: usize = 24;

/// Largest width for which an explicit `2^w x 2^w` lift is built.
pub const EXPLICIT_LIFT_CAP: usize = 12;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum QuantumError {
    #[error("circuit is not balanced")]
    NotBalanced,
    #[error("gate `{gate}`: matrix dimension {found}, arity needs {expected}")]
    DimMismatch { gate: String, expected: usize, found: usize },
    #[error("{}matrix is not unitary (deviation {deviation:e})", gate.as_ref().map(|g| format!("gate `{g}`: ")).unwrap_or_default())]
    NotUnitary { gate: Option<String>, deviation: f64 },
    #[error("function is not a permutation")]
    NotAPermutation,
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("gate `{0}` has no matrix")]
    MissingSpec(String),
    #[error("`{0}` is not a gate of the circuit")]
    UnknownGate(String),
    #[error("bad matrix: {0}")]
    BadMatrixShape(String),
    #[error("bad timelines: {0}")]
    BadTimelines(String),
    #[error("gate set is not an antichain")]
    NotAntichain,
    #[error("block {0} of the schedule is not an antichain")]
    NotAntichainBlock(usize),
    #[error("schedule is not coherent: {0}")]
    NotCoherent(PartitionDefect),
    #[error("width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("width {width} exceeds the cap {cap}")]
    WidthTooLarge { width: usize, cap: usize },
    #[error("bad state: {0}")]
    BadState(String),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
}

impl QuantumError {
    pub fn code(&self) -> &'static str {
        match self {
            QuantumError::NotBalanced => "NOT_BALANCED",
            QuantumError::DimMismatch { .. } => "DIM_MISMATCH",
            QuantumError::NotUnitary { .. } => "NOT_UNITARY",
            QuantumError::NotAPermutation => "NOT_A_PERMUTATION",
            QuantumError::UnknownBuiltin(_) => "UNKNOWN_BUILTIN",
            QuantumError::MissingSpec(_) => "MISSING_SPEC",
            QuantumError::UnknownGate(_) => "UNKNOWN_GATE",
            QuantumError::BadMatrixShape(_) => "BAD_MATRIX_SHAPE",
            QuantumError::BadTimelines(_) => "BAD_TIMELINES",
            QuantumError::NotAntichain => "NOT_ANTICHAIN",
            QuantumError::NotAntichainBlock(_) => "NOT_ANTICHAIN_BLOCK",
            QuantumError::NotCoherent(_) => "NOT_COHERENT",
            QuantumError::WidthMismatch { .. } => "WIDTH_MISMATCH",
            QuantumError::WidthTooLarge { .. } => "WIDTH_TOO_LARGE",
            QuantumError::BadState(_) => "BAD_STATE",
            QuantumError::Decomposition(e) => e.code(),
        }
    }
}

impl From<IrError> for QuantumError {
    fn from(e: IrError) -> Self {
        match e {
            IrError::NotBalanced | IrError::NoTimelines => QuantumError::NotBalanced,
            other => QuantumError::UnknownGate(other.to_string()),
        }
    }
}

/// Applies `u` to the qubits on `active` (ascending, 1-based timelines) of a
/// `2^w` register, leaving every other qubit alone.
fn apply_factor(amps: &mut [Complex64], w: usize, u: &ComplexMatrix, active: &[usize]) {
    let r = active.len();
    let dim = 1usize << r;
    let offsets: Vec<usize> = (0..dim)
        .map(|sub| {
            active
                .iter()
                .enumerate()
                .filter(|&(i, _)| sub >> (r - 1 - i) & 1 == 1)
                .fold(0, |acc, (_, &t)| acc | 1 << (w - t))
        })
        .collect();
    let mask = offsets[dim - 1];
    let rows: Vec<Vec<(usize, Complex64)>> = (0..dim)
        .map(|i| u.row(i).iter().copied().enumerate().filter(|(_, z)| *z != Complex64::new(0.0, 0.0)).collect())
        .collect();
    let mut gathered = vec![Complex64::new(0.0, 0.0); dim];
    for base in (0..amps.len()).filter(|b| b & mask == 0) {
        for (g, &off) in gathered.iter_mut().zip(&offsets) {
            *g = amps[base | off];
        }
        for (row, &off) in rows.iter().zip(&offsets) {
            amps[base | off] = row.iter().map(|&(j, z)| z * gathered[j]).sum();
        }
    }
}

/// An operator on a `2^w` register given as a product of lifted gates,
/// applied first to last.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedOperator {
    width: usize,
    factors: Vec<(UnitaryMatrix, Vec<usize>)>,
}

impl LiftedOperator {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<(), QuantumError> {
        if state.width() != self.width {
            return Err(QuantumError::WidthMismatch { expected: self.width, found: state.width() });
        }
        for (u, active) in &self.factors {
            apply_factor(state.amplitudes_mut(), self.width, u.matrix(), active);
        }
        Ok(())
    }

    /// The explicit `2^w x 2^w` matrix, built column by column.
    pub fn to_matrix(&self) -> Result<ComplexMatrix, QuantumError> {
        if self.width > EXPLICIT_LIFT_CAP {
            return Err(QuantumError::WidthTooLarge { width: self.width, cap: EXPLICIT_LIFT_CAP });
        }
        let n = 1usize << self.width;
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            let mut col = StateVector::basis(self.width, j)?;
            self.apply(&mut col)?;
            for (i, z) in col.amplitudes().iter().enumerate() {
                entries[i * n + j] = *z;
            }
        }
        ComplexMatrix::new(n, entries)
    }
}

pub fn lift_to_width(u: &UnitaryMatrix, active: &[usize], w: usize) -> Result<LiftedOperator, QuantumError> {
    if active.len() != u.qubits() {
        return Err(QuantumError::BadTimelines(format!(
            "{} timelines for a {}-qubit matrix",
            active.len(),
            u.qubits()
        )));
    }
    if active.windows(2).any(|p| p[0] >= p[1]) || active.iter().any(|&t| t == 0 || t > w) {
        return Err(QuantumError::BadTimelines(format!("{active:?} is not ascending within 1..={w}")));
    }
    Ok(LiftedOperator { width: w, factors: vec![(u.clone(), active.to_vec())] })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumCircuit {
    base: Circuit,
    width: usize,
    matrices: Vec<Option<UnitaryMatrix>>,
    active: Vec<Vec<usize>>,
}

/// Validates a unitary matrix for every gate of a balanced circuit.
pub fn attach_quantum(c: Circuit, mut specs: BTreeMap<NodeId, ComplexMatrix>) -> Result<QuantumCircuit, QuantumError> {
    if !c.has_timelines() {
        return Err(QuantumError::NotBalanced);
    }
    if let Some(&n) = specs.keys().find(|&&n| n.index() >= c.node_count() || !c.is_gate(n)) {
        return Err(QuantumError::UnknownGate(format!("#{}", n.index())));
    }
    let width = c.width()?;
    let mut matrices = vec![None; c.node_count()];
    let mut active = vec![Vec::new(); c.node_count()];
    for g in c.gates() {
        let name = c.node_name(g).to_string();
        let m = specs.remove(&g).ok_or_else(|| QuantumError::MissingSpec(name.clone()))?;
        let arity = c.gate_arity(g)?;
        if arity >= usize::BITS as usize || m.dim() != 1 << arity {
            return Err(QuantumError::DimMismatch { gate: name, expected: 1 << arity.min(31), found: m.dim() });
        }
        let u = UnitaryMatrix::new(m).map_err(|e| match e {
            QuantumError::NotUnitary { deviation, .. } => {
                QuantumError::NotUnitary { gate: Some(name.clone()), deviation }
            }
            other => other,
        })?;
        active[g.index()] = c.active_timelines(g)?;
        matrices[g.index()] = Some(u);
    }
    Ok(QuantumCircuit { base: c, width, matrices, active })
}

impl QuantumCircuit {
    pub fn from_names<S: AsRef<str>>(c: Circuit, specs: &[(S, ComplexMatrix)]) -> Result<Self, QuantumError> {
        let mut map = BTreeMap::new();
        for (name, m) in specs {
            map.insert(c.gate_id(name.as_ref())?, m.clone());
        }
        attach_quantum(c, map)
    }

    /// Lifts every gate table of a balanced Boolean circuit.
    pub fn from_boolean(b: &BooleanCircuit) -> Result<Self, QuantumError> {
        let c = b.base();
        let mut map = BTreeMap::new();
        for g in c.gates() {
            map.insert(g, permutation_lift(b.function(g))?.into_matrix());
        }
        attach_quantum(c.clone(), map)
    }

    pub fn base(&self) -> &Circuit {
        &self.base
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn matrix(&self, g: NodeId) -> &UnitaryMatrix {
        self.matrices[g.index()].as_ref().expect("gate has a matrix")
    }

    pub fn active(&self, g: NodeId) -> &[usize] {
        &self.active[g.index()]
    }

    pub fn gate_operator(&self, g: NodeId) -> LiftedOperator {
        LiftedOperator { width: self.width, factors: vec![(self.matrix(g).clone(), self.active(g).to_vec())] }
    }

    fn specs_renamed(
        &self,
        names: &BTreeMap<String, String>,
        target: &Circuit,
        into: &mut BTreeMap<NodeId, ComplexMatrix>,
    ) {
        for g in self.base.gates() {
            let new = target.gate_id(&names[self.base.node_name(g)]).expect("renamed gate exists");
            into.insert(new, self.matrix(g).matrix().clone());
        }
    }

    fn reassign(&self, c: Circuit) -> QuantumCircuit {
        let mut specs = BTreeMap::new();
        for g in c.gates() {
            let old = self.base.gate_id(c.node_name(g)).expect("sliced gates keep their names");
            specs.insert(g, self.matrix(old).matrix().clone());
        }
        attach_quantum(c, specs).expect("slices keep gate arities")
    }
}

/// The combined operator of an antichain; its factors commute.
pub fn antichain_operator(qc: &QuantumCircuit, x: &[NodeId]) -> Result<LiftedOperator, QuantumError> {
    if let Some(&g) = x.iter().find(|&&g| g.index() >= qc.base.node_count() || !qc.base.is_gate(g)) {
        return Err(QuantumError::UnknownGate(format!("#{}", g.index())));
    }
    if !is_antichain(&qc.base, x) {
        return Err(QuantumError::NotAntichain);
    }
    let factors = x.iter().map(|&g| (qc.matrix(g).clone(), qc.active(g).to_vec())).collect();
    Ok(LiftedOperator { width: qc.width, factors })
}

/// Runs the schedule and returns `Ψ_0, ..., Ψ_T`.
pub fn simulate(
    qc: &QuantumCircuit,
    input: &StateVector,
    p: &CoherentPartition,
) -> Result<Vec<StateVector>, QuantumError> {
    if input.width() != qc.width {
        return Err(QuantumError::WidthMismatch { expected: qc.width, found: input.width() });
    }
    check_partition(&qc.base, p.blocks()).map_err(QuantumError::NotCoherent)?;
    if let Some(i) = p.blocks().iter().position(|b| !is_antichain(&qc.base, b)) {
        return Err(QuantumError::NotAntichainBlock(i));
    }
    let mut states = Vec::with_capacity(p.len() + 1);
    states.push(input.clone());
    let mut psi = input.clone();
    for block in p.blocks() {
        antichain_operator(qc, block)?.apply(&mut psi)?;
        states.push(psi.clone());
    }
    Ok(states)
}

/// Final state only.
pub fn run(qc: &QuantumCircuit, input: &StateVector, p: &CoherentPartition) -> Result<StateVector, QuantumError> {
    Ok(simulate(qc, input, p)?.pop().expect("the trajectory starts with the input"))
}

pub fn slice_quantum(qc: &QuantumCircuit, x: &GateSet) -> Result<QuantumCircuit, QuantumError> {
    Ok(qc.reassign(slice(&qc.base, x)?))
}

pub fn decompose_quantum(qc: &QuantumCircuit, blocks: &[Vec<NodeId>]) -> Result<Vec<QuantumCircuit>, QuantumError> {
    Ok(decompose(&qc.base, blocks)?.into_iter().map(|c| qc.reassign(c)).collect())
}

pub fn compose_quantum(parts: &[QuantumCircuit]) -> Result<QuantumCircuit, QuantumError> {
    let bases: Vec<&Circuit> = parts.iter().map(|p| &p.base).collect();
    let (c, renames) = compose_with_renames(&bases)?;
    let mut specs = BTreeMap::new();
    for (part, names) in parts.iter().zip(&renames) {
        part.specs_renamed(names, &c, &mut specs);
    }
    attach_quantum(c, specs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean::{fun, index_to_word, BooleanFunction};
    use crate::decomposition::tests::{diamond, two_gate};
    use crate::decomposition::{all_antichain_partitions, layer_eager, layer_lazy};
    use crate::ir::RawCircuit;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn b(name: &str) -> ComplexMatrix {
        UnitaryMatrix::builtin(name).unwrap().into_matrix()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Balanced circuit from `(gate, timelines)` in listing order.
    fn threaded(w: usize, gates: &[(&str, &[usize])]) -> Circuit {
        let mut raw = RawCircuit::new();
        let mut tip: Vec<String> = (1..=w).map(|t| format!("x{t}")).collect();
        for t in 1..=w {
            raw = raw.input(format!("x{t}"), t).output(format!("y{t}"), t);
        }
        let mut n = 0;
        for (g, lines) in gates {
            raw = raw.gate(*g);
            for &t in lines.iter() {
                n += 1;
                raw = raw.edge(format!("e{n}"), tip[t - 1].clone(), *g);
                tip[t - 1] = g.to_string();
            }
        }
        for t in 1..=w {
            n += 1;
            raw = raw.edge(format!("e{n}"), tip[t - 1].clone(), format!("y{t}"));
        }
        raw.build().unwrap()
    }

    fn bell() -> QuantumCircuit {
        let c = threaded(2, &[("g1", &[1]), ("g2", &[1, 2])]);
        QuantumCircuit::from_names(c, &[("g1", b("H")), ("g2", b("CNOT"))]).unwrap()
    }

    #[test]
    fn bell_state() {
        let qc = bell();
        let out = run(&qc, &StateVector::from_label("|00>").unwrap(), &layer_eager(qc.base())).unwrap();
        let h = FRAC_1_SQRT_2;
        let expect = StateVector::from_amplitudes(2, vec![c(h, 0.), c(0., 0.), c(0., 0.), c(h, 0.)]).unwrap();
        assert!(states_equal(&out, &expect, 1e-12).unwrap());
    }

    #[test]
    fn attach_errors() {
        let c = two_gate();
        let e = QuantumCircuit::from_names(c.clone(), &[("G1", b("CNOT")), ("G2", b("H"))]).unwrap_err();
        assert_eq!(e.code(), "DIM_MISMATCH");
        let bad =
            ComplexMatrix::from_real(4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 2.]).unwrap();
        let e = QuantumCircuit::from_names(c.clone(), &[("G1", b("CNOT")), ("G2", bad)]).unwrap_err();
        assert_eq!(e.code(), "NOT_UNITARY");
        assert!(e.to_string().contains("G2"));
        assert!(QuantumCircuit::from_names(c, &[("G1", b("CNOT")), ("G2", b("SWAP"))]).is_ok());
        let unary = threaded(1, &[("u", &[1])]);
        assert!(QuantumCircuit::from_names(unary, &[("u", ComplexMatrix::identity(2))]).is_ok());
    }

    #[test]
    fn unbalanced_rejected() {
        let c = RawCircuit::new()
            .input("x1", 1)
            .input("x2", 2)
            .output("y", 1)
            .gate("G")
            .edge("a", "x1", "G")
            .edge("b", "x2", "G")
            .edge("o", "G", "y")
            .build()
            .unwrap();
        assert_eq!(attach_quantum(c, BTreeMap::new()).unwrap_err().code(), "NOT_BALANCED");
    }

    #[test]
    fn lift_swap_outer() {
        let op = lift_to_width(&UnitaryMatrix::builtin("SWAP").unwrap(), &[1, 3], 3).unwrap();
        for x in 0..8 {
            let mut s = StateVector::basis(3, x).unwrap();
            op.apply(&mut s).unwrap();
            let word = index_to_word(x, 3);
            let swapped = [word[2], word[1], word[0]];
            assert_eq!(s, StateVector::from_word(&swapped).unwrap());
        }
        assert!(lift_to_width(&UnitaryMatrix::hadamard(), &[1, 2], 2).is_err());
        assert!(lift_to_width(&UnitaryMatrix::builtin("SWAP").unwrap(), &[2, 1], 2).is_err());
        assert!(lift_to_width(&UnitaryMatrix::hadamard(), &[3], 2).is_err());
    }

    #[test]
    fn lift_full_width_is_the_matrix() {
        let u = UnitaryMatrix::builtin("TOFFOLI").unwrap().mul(&UnitaryMatrix::builtin("FREDKIN").unwrap());
        let op = lift_to_width(&u, &[1, 2, 3], 3).unwrap();
        assert!(op.to_matrix().unwrap().max_deviation(u.matrix()) < 1e-15);
    }

    #[test]
    fn hadamard_on_first_qubit() {
        let op = lift_to_width(&UnitaryMatrix::hadamard(), &[1], 2).unwrap();
        let mut s = StateVector::from_label("|00>").unwrap();
        op.apply(&mut s).unwrap();
        let h = FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0] - c(h, 0.)).norm() < 1e-12);
        assert!((s.amplitudes()[2] - c(h, 0.)).norm() < 1e-12);
        assert_eq!(s.amplitudes()[1], c(0., 0.));
    }

    #[test]
    fn antichains() {
        let c = threaded(2, &[("a", &[1]), ("b", &[2])]);
        let qc = QuantumCircuit::from_names(c, &[("a", b("H")), ("b", b("H"))]).unwrap();
        let (a, bb) = (qc.base().gate_id("a").unwrap(), qc.base().gate_id("b").unwrap());
        let hh = b("H").kron(&b("H"));
        let ab = antichain_operator(&qc, &[a, bb]).unwrap().to_matrix().unwrap();
        let ba = antichain_operator(&qc, &[bb, a]).unwrap().to_matrix().unwrap();
        assert!(ab.max_deviation(&hh) < 1e-12);
        assert!(ab.max_deviation(&ba) < 1e-12);
        let single = antichain_operator(&qc, &[a]).unwrap();
        assert_eq!(single, qc.gate_operator(a));
        let chain = bell();
        let g = chain.base().gates().collect::<Vec<_>>();
        assert_eq!(antichain_operator(&chain, &g).unwrap_err().code(), "NOT_ANTICHAIN");
    }

    #[test]
    fn t_phase() {
        let qc = QuantumCircuit::from_names(threaded(1, &[("t", &[1])]), &[("t", b("T"))]).unwrap();
        let out = run(&qc, &StateVector::from_label("|1>").unwrap(), &layer_eager(qc.base())).unwrap();
        assert!((out.amplitudes()[1] - Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)).norm() < 1e-12);
    }

    #[test]
    fn empty_circuit_is_identity() {
        let qc = attach_quantum(threaded(2, &[]), BTreeMap::new()).unwrap();
        let input = StateVector::from_label("|01>").unwrap();
        let states = simulate(&qc, &input, &layer_eager(qc.base())).unwrap();
        assert_eq!(states, vec![input]);
    }

    #[test]
    fn schedule_checks() {
        let qc = bell();
        let gates: Vec<NodeId> = qc.base().gates().collect();
        let one = CoherentPartition::new(qc.base(), vec![gates]).unwrap();
        let input = StateVector::from_label("|00>").unwrap();
        assert_eq!(simulate(&qc, &input, &one).unwrap_err().code(), "NOT_ANTICHAIN_BLOCK");
        let wide = StateVector::from_label("|000>").unwrap();
        assert_eq!(simulate(&qc, &wide, &layer_eager(qc.base())).unwrap_err().code(), "WIDTH_MISMATCH");
    }

    #[test]
    fn all_schedules_agree_on_diamond() {
        let c = diamond();
        let specs: Vec<(String, ComplexMatrix)> = c
            .gates()
            .map(|g| {
                let m = match c.gate_arity(g).unwrap() {
                    1 => b("H").clone(),
                    2 => b("CNOT").clone(),
                    _ => b("TOFFOLI").clone(),
                };
                (c.node_name(g).to_string(), m)
            })
            .collect();
        let qc = QuantumCircuit::from_names(c, &specs).unwrap();
        let w = qc.width();
        let input = StateVector::basis(w, 1).unwrap();
        let reference = run(&qc, &input, &layer_eager(qc.base())).unwrap();
        assert!(states_equal(&reference, &run(&qc, &input, &layer_lazy(qc.base())).unwrap(), 1e-12).unwrap());
        for p in all_antichain_partitions(qc.base(), 1000).unwrap() {
            let states = simulate(&qc, &input, &p).unwrap();
            for s in &states {
                assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
            }
            assert!(states_equal(&reference, states.last().unwrap(), 1e-9).unwrap());
        }
    }

    #[test]
    fn boolean_consistency() {
        let bc = crate::boolean::BooleanCircuit::from_names(
            two_gate(),
            &[("G1", BooleanFunction::builtin("CNOT").unwrap()), ("G2", BooleanFunction::builtin("SWAP").unwrap())],
        )
        .unwrap();
        let qc = QuantumCircuit::from_boolean(&bc).unwrap();
        for x in 0..8 {
            let word = index_to_word(x, 3);
            let out = run(&qc, &StateVector::from_word(&word).unwrap(), &layer_eager(qc.base())).unwrap();
            let expect = StateVector::from_word(&fun(&bc, &word).unwrap()).unwrap();
            assert!(states_equal(&out, &expect, 1e-12).unwrap());
        }
    }

    #[test]
    fn slices_and_composites() {
        let qc = bell();
        let g: Vec<NodeId> = crate::decomposition::linearize(qc.base()).0;
        let parts = decompose_quantum(&qc, &[vec![g[0]], vec![g[1]]]).unwrap();
        assert_eq!(compose_quantum(&parts).unwrap(), qc);
        let first = slice_quantum(&qc, &[g[0]].into()).unwrap();
        assert_eq!(first.base().gate_count(), 1);
    }
}
