//! Boolean circuits: gate truth tables, valuations, scheduled computations,
//! composition and reversibility.

mod function;

use std::collections::BTreeMap;

use thiserror::Error;

pub use function::{format_word, index_to_word, parse_word, word_to_index, BooleanFunction, MAX_ARITY};

use crate::decomposition::{
    check_partition, compose_with_renames, decompose, slice, CoherentPartition, DecompositionError, GateSet,
    PartitionDefect,
};
use crate::ir::{Circuit, EdgeId, IrError, NodeId};

/// Default cap on the width for whole-circuit table enumeration.
pub const DEFAULT_TABLE_CAP: usize = 12;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum BooleanError {
    #[error("gate `{gate}`: table has shape {found_k}->{found_l}, gate has {k} in / {l} out")]
    ArityMismatch { gate: String, k: usize, l: usize, found_k: usize, found_l: usize },
    #[error("gate `{gate}`: {reason}")]
    BadEdgeMap { gate: String, reason: String },
    #[error("gate `{0}` has no function")]
    MissingSpec(String),
    #[error("`{0}` is not a gate of the circuit")]
    UnknownGate(String),
    #[error("input has length {found}, circuit has {expected} inputs")]
    BadInputLength { expected: usize, found: usize },
    #[error("`{0}` is not a bit word")]
    BadWord(String),
    #[error("bad table: {0}")]
    BadTable(String),
    #[error("schedule is not coherent: {0}")]
    NotCoherent(PartitionDefect),
    #[error("circuit is not balanced")]
    NotBalanced,
    #[error("width {width} exceeds the table cap {cap}")]
    WidthTooLarge { width: usize, cap: usize },
    #[error("reversibility by gates ({by_gates}) disagrees with reversibility by table ({by_table})")]
    CrossCheckMismatch { by_gates: bool, by_table: bool },
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
}

impl BooleanError {
    pub fn code(&self) -> &'static str {
        match self {
            BooleanError::ArityMismatch { .. } => "ARITY_MISMATCH",
            BooleanError::BadEdgeMap { .. } => "BAD_EDGE_MAP",
            BooleanError::MissingSpec(_) => "MISSING_SPEC",
            BooleanError::UnknownGate(_) => "UNKNOWN_GATE",
            BooleanError::BadInputLength { .. } => "BAD_INPUT_LENGTH",
            BooleanError::BadWord(_) => "BAD_WORD",
            BooleanError::BadTable(_) => "BAD_TABLE",
            BooleanError::NotCoherent(_) => "NOT_COHERENT",
            BooleanError::NotBalanced => "NOT_BALANCED",
            BooleanError::WidthTooLarge { .. } => "WIDTH_TOO_LARGE",
            BooleanError::CrossCheckMismatch { .. } => "CROSS_CHECK_MISMATCH",
            BooleanError::Decomposition(e) => e.code(),
        }
    }
}

impl From<IrError> for BooleanError {
    fn from(e: IrError) -> Self {
        match e {
            IrError::NotBalanced | IrError::NoTimelines => BooleanError::NotBalanced,
            other => BooleanError::UnknownGate(other.to_string()),
        }
    }
}

/// A gate's function plus optional argument/value edge correspondences.
/// Omitted maps default to the gate's stored edge order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateSpec {
    pub function: BooleanFunction,
    pub args: Option<Vec<EdgeId>>,
    pub vals: Option<Vec<EdgeId>>,
}

impl From<BooleanFunction> for GateSpec {
    fn from(function: BooleanFunction) -> Self {
        GateSpec { function, args: None, vals: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BooleanCircuit {
    base: Circuit,
    functions: Vec<Option<BooleanFunction>>,
    args: Vec<Vec<EdgeId>>,
    vals: Vec<Vec<EdgeId>>,
}

fn check_edge_map(
    c: &Circuit,
    g: NodeId,
    given: Option<Vec<EdgeId>>,
    incident: &[EdgeId],
    what: &str,
) -> Result<Vec<EdgeId>, BooleanError> {
    let Some(map) = given else {
        return Ok(incident.to_vec());
    };
    let bad = |reason: String| BooleanError::BadEdgeMap { gate: c.node_name(g).to_string(), reason };
    let mut sorted = map.clone();
    sorted.sort();
    let mut expected = incident.to_vec();
    expected.sort();
    if sorted != expected {
        return Err(bad(format!("{what} edges are not a bijection onto the incident edges")));
    }
    if c.has_timelines() && map != incident {
        return Err(bad(format!("{what} edges must follow ascending timelines")));
    }
    Ok(map)
}

/// Assigns a function to every gate of `c`.
pub fn attach_boolean(c: Circuit, mut specs: BTreeMap<NodeId, GateSpec>) -> Result<BooleanCircuit, BooleanError> {
    if let Some(&n) = specs.keys().find(|&&n| n.index() >= c.node_count() || !c.is_gate(n)) {
        let name = if n.index() < c.node_count() { c.node_name(n).to_string() } else { format!("#{}", n.index()) };
        return Err(BooleanError::UnknownGate(name));
    }
    let n = c.node_count();
    let mut functions = vec![None; n];
    let mut args = vec![Vec::new(); n];
    let mut vals = vec![Vec::new(); n];
    for g in c.gates() {
        let spec = specs.remove(&g).ok_or_else(|| BooleanError::MissingSpec(c.node_name(g).to_string()))?;
        let (k, l) = (c.incoming(g).len(), c.outgoing(g).len());
        let f = spec.function;
        if f.inputs() != k || f.outputs() != l {
            return Err(BooleanError::ArityMismatch {
                gate: c.node_name(g).to_string(),
                k,
                l,
                found_k: f.inputs(),
                found_l: f.outputs(),
            });
        }
        args[g.index()] = check_edge_map(&c, g, spec.args, c.incoming(g), "argument")?;
        vals[g.index()] = check_edge_map(&c, g, spec.vals, c.outgoing(g), "value")?;
        functions[g.index()] = Some(f);
    }
    Ok(BooleanCircuit { base: c, functions, args, vals })
}

/// The unique assignment of a bit to every edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Valuation {
    bits: Vec<bool>,
}

impl Valuation {
    pub fn get(&self, e: EdgeId) -> bool {
        self.bits[e.index()]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// A sequential computation: blocks of the schedule fired in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComputationTrace {
    pub input: Vec<bool>,
    pub schedule: CoherentPartition,
    /// Gates fired at each step, in firing order.
    pub steps: Vec<Vec<NodeId>>,
    pub valuation: Valuation,
    pub output: Vec<bool>,
}

impl BooleanCircuit {
    /// Convenience constructor keyed by gate names, with default edge maps.
    pub fn from_names<S: AsRef<str>>(c: Circuit, specs: &[(S, BooleanFunction)]) -> Result<Self, BooleanError> {
        let mut map = BTreeMap::new();
        for (name, f) in specs {
            let g = c.gate_id(name.as_ref())?;
            map.insert(g, GateSpec::from(f.clone()));
        }
        attach_boolean(c, map)
    }

    pub fn base(&self) -> &Circuit {
        &self.base
    }

    pub fn function(&self, g: NodeId) -> &BooleanFunction {
        self.functions[g.index()].as_ref().expect("gate has a function")
    }

    pub fn arg_edges(&self, g: NodeId) -> &[EdgeId] {
        &self.args[g.index()]
    }

    pub fn val_edges(&self, g: NodeId) -> &[EdgeId] {
        &self.vals[g.index()]
    }

    pub fn specs(&self) -> BTreeMap<NodeId, GateSpec> {
        self.base
            .gates()
            .map(|g| {
                let spec = GateSpec {
                    function: self.function(g).clone(),
                    args: Some(self.arg_edges(g).to_vec()),
                    vals: Some(self.val_edges(g).to_vec()),
                };
                (g, spec)
            })
            .collect()
    }

    fn check_input(&self, input: &[bool]) -> Result<(), BooleanError> {
        let expected = self.base.inputs().len();
        if input.len() != expected {
            return Err(BooleanError::BadInputLength { expected, found: input.len() });
        }
        Ok(())
    }

    fn seed(&self, input: &[bool]) -> Vec<Option<bool>> {
        let mut bits = vec![None; self.base.edge_count()];
        for (&x, &a) in self.base.inputs().iter().zip(input) {
            for &e in self.base.outgoing(x) {
                bits[e.index()] = Some(a);
            }
        }
        bits
    }

    fn fire(&self, g: NodeId, bits: &mut [Option<bool>]) {
        let x = self.arg_edges(g).iter().fold(0usize, |acc, e| {
            acc << 1 | bits[e.index()].expect("arguments are assigned before a gate fires") as usize
        });
        let y = self.function(g).apply_index(x);
        let l = self.val_edges(g).len();
        for (j, e) in self.val_edges(g).iter().enumerate() {
            bits[e.index()] = Some(y >> (l - 1 - j) & 1 == 1);
        }
    }

    fn finish(&self, bits: Vec<Option<bool>>) -> (Valuation, Vec<bool>) {
        let bits: Vec<bool> = bits.into_iter().map(|b| b.expect("every edge is assigned")).collect();
        let output = self.base.outputs().iter().map(|&y| bits[self.base.incoming(y)[0].index()]).collect();
        (Valuation { bits }, output)
    }
}

pub fn valuate(b: &BooleanCircuit, input: &[bool]) -> Result<Valuation, BooleanError> {
    b.check_input(input)?;
    let mut bits = b.seed(input);
    for &g in b.base.topological_order() {
        if b.base.is_gate(g) {
            b.fire(g, &mut bits);
        }
    }
    Ok(b.finish(bits).0)
}

/// The output word: output-edge bits in output-rank order.
pub fn fun(b: &BooleanCircuit, input: &[bool]) -> Result<Vec<bool>, BooleanError> {
    let v = valuate(b, input)?;
    Ok(b.base.outputs().iter().map(|&y| v.get(b.base.incoming(y)[0])).collect())
}

/// Fires the schedule's blocks in order. Gates inside one block fire in
/// topological order.
pub fn run_schedule(
    b: &BooleanCircuit,
    input: &[bool],
    p: &CoherentPartition,
) -> Result<ComputationTrace, BooleanError> {
    b.check_input(input)?;
    check_partition(&b.base, p.blocks()).map_err(BooleanError::NotCoherent)?;
    let mut position = vec![0; b.base.node_count()];
    for (i, &n) in b.base.topological_order().iter().enumerate() {
        position[n.index()] = i;
    }
    let mut bits = b.seed(input);
    let mut steps = Vec::with_capacity(p.len());
    for block in p.blocks() {
        let mut step = block.clone();
        step.sort_by_key(|g| position[g.index()]);
        for &g in &step {
            b.fire(g, &mut bits);
        }
        steps.push(step);
    }
    let (valuation, output) = b.finish(bits);
    Ok(ComputationTrace { input: input.to_vec(), schedule: p.clone(), steps, valuation, output })
}

/// The whole function of `b` as a table over its input words.
pub fn truth_table(b: &BooleanCircuit, cap: usize) -> Result<BooleanFunction, BooleanError> {
    let m = b.base.inputs().len();
    if m > cap {
        return Err(BooleanError::WidthTooLarge { width: m, cap });
    }
    let n = b.base.outputs().len();
    let table = (0..1usize << m)
        .map(|i| fun(b, &index_to_word(i, m)).map(|y| word_to_index(&y) as u32))
        .collect::<Result<_, _>>()?;
    BooleanFunction::new(m, n, table)
}

fn reassign(b: &BooleanCircuit, c: Circuit) -> BooleanCircuit {
    let specs = c
        .gates()
        .map(|g| {
            let old = b.base.gate_id(c.node_name(g)).expect("sliced gates keep their names");
            (g, GateSpec::from(b.function(old).clone()))
        })
        .collect();
    attach_boolean(c, specs).expect("slices keep gate arities")
}

pub fn slice_boolean(b: &BooleanCircuit, x: &GateSet) -> Result<BooleanCircuit, BooleanError> {
    Ok(reassign(b, slice(&b.base, x)?))
}

pub fn decompose_boolean(b: &BooleanCircuit, blocks: &[Vec<NodeId>]) -> Result<Vec<BooleanCircuit>, BooleanError> {
    Ok(decompose(&b.base, blocks)?.into_iter().map(|c| reassign(b, c)).collect())
}

/// Composite of balanced Boolean circuits; its function is the composite
/// of the parts' functions, first part applied first.
pub fn compose_boolean(parts: &[BooleanCircuit]) -> Result<BooleanCircuit, BooleanError> {
    let bases: Vec<&Circuit> = parts.iter().map(|p| &p.base).collect();
    let (c, renames) = compose_with_renames(&bases)?;
    let mut specs = BTreeMap::new();
    for (part, names) in parts.iter().zip(&renames) {
        for g in part.base.gates() {
            let new = c.gate_id(&names[part.base.node_name(g)]).expect("renamed gate exists");
            specs.insert(new, GateSpec::from(part.function(g).clone()));
        }
    }
    attach_boolean(c, specs)
}

pub fn invert(f: &BooleanFunction) -> Option<BooleanFunction> {
    f.invert()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReversibilityMethod {
    /// Every gate table is a permutation.
    ByGates,
    /// The circuit's own table is a permutation.
    ByTable,
    /// Both, failing if they disagree.
    CrossCheck,
}

pub fn is_reversible_circuit(
    b: &BooleanCircuit,
    method: ReversibilityMethod,
    cap: usize,
) -> Result<bool, BooleanError> {
    if !b.base.has_timelines() {
        return Err(BooleanError::NotBalanced);
    }
    let by_gates = || b.base.gates().all(|g| b.function(g).is_permutation());
    let by_table = || truth_table(b, cap).map(|t| t.is_permutation());
    match method {
        ReversibilityMethod::ByGates => Ok(by_gates()),
        ReversibilityMethod::ByTable => by_table(),
        ReversibilityMethod::CrossCheck => {
            let (g, t) = (by_gates(), by_table()?);
            if g != t {
                return Err(BooleanError::CrossCheckMismatch { by_gates: g, by_table: t });
            }
            Ok(g)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::tests::{chain3, two_gate};
    use crate::decomposition::{all_antichain_partitions, all_convex_partitions, layer_eager, layer_lazy, linearize};
    use crate::ir::RawCircuit;

    fn bf(name: &str) -> BooleanFunction {
        BooleanFunction::builtin(name).unwrap()
    }

    fn w(s: &str) -> Vec<bool> {
        parse_word(s).unwrap()
    }

    fn cnot_swap() -> BooleanCircuit {
        BooleanCircuit::from_names(two_gate(), &[("G1", bf("CNOT")), ("G2", bf("SWAP"))]).unwrap()
    }

    fn single(name: &str, r: usize) -> BooleanCircuit {
        let mut raw = RawCircuit::new().gate("G");
        for t in 1..=r {
            raw = raw
                .input(format!("x{t}"), t)
                .output(format!("y{t}"), t)
                .edge(format!("a{t}"), format!("x{t}"), "G")
                .edge(format!("b{t}"), "G", format!("y{t}"));
        }
        BooleanCircuit::from_names(raw.build().unwrap(), &[("G", bf(name))]).unwrap()
    }

    #[test]
    fn attach_checks() {
        assert!(BooleanCircuit::from_names(two_gate(), &[("G1", bf("CNOT"))]).is_err());
        let e = BooleanCircuit::from_names(two_gate(), &[("G1", bf("TOFFOLI")), ("G2", bf("SWAP"))]).unwrap_err();
        assert_eq!(e.code(), "ARITY_MISMATCH");
        let unary = single("ID", 1);
        assert_eq!(fun(&unary, &w("1")).unwrap(), w("1"));
    }

    #[test]
    fn edge_maps() {
        let c = two_gate();
        let g1 = c.gate_id("G1").unwrap();
        let g2 = c.gate_id("G2").unwrap();
        let mut specs = BTreeMap::new();
        specs.insert(g2, GateSpec::from(bf("SWAP")));
        let mut reversed = c.incoming(g1).to_vec();
        reversed.reverse();
        specs.insert(g1, GateSpec { function: bf("CNOT"), args: Some(reversed), vals: None });
        let e = attach_boolean(c.clone(), specs.clone()).unwrap_err();
        assert_eq!(e.code(), "BAD_EDGE_MAP");
        specs.get_mut(&g1).unwrap().args = Some(vec![c.incoming(g1)[0]]);
        assert_eq!(attach_boolean(c, specs).unwrap_err().code(), "BAD_EDGE_MAP");
    }

    #[test]
    fn unbalanced_edge_maps_are_honoured() {
        // AND with its arguments swapped still computes AND; a 2->1 table
        // that is not symmetric shows the order
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
        let first = BooleanFunction::from_fn(2, 1, |x| vec![x[0]]).unwrap();
        let g = c.gate_id("G").unwrap();
        let (a, b) = (c.edge_id("a").unwrap(), c.edge_id("b").unwrap());
        let mut specs = BTreeMap::new();
        specs.insert(g, GateSpec { function: first.clone(), args: Some(vec![b, a]), vals: None });
        let bc = attach_boolean(c.clone(), specs).unwrap();
        assert_eq!(fun(&bc, &w("01")).unwrap(), w("1"));
        let plain = BooleanCircuit::from_names(c, &[("G", first)]).unwrap();
        assert_eq!(fun(&plain, &w("01")).unwrap(), w("0"));
    }

    #[test]
    fn single_gates() {
        let cnot = single("CNOT", 2);
        let v = valuate(&cnot, &w("11")).unwrap();
        let c = cnot.base();
        assert!(v.get(c.edge_id("b1").unwrap()));
        assert!(!v.get(c.edge_id("b2").unwrap()));
        assert_eq!(fun(&single("SWAP", 2), &w("10")).unwrap(), w("01"));
        assert_eq!(fun(&cnot, &w("1")).unwrap_err().code(), "BAD_INPUT_LENGTH");
    }

    #[test]
    fn wire_only() {
        let c = crate::decomposition::slice(&two_gate(), &GateSet::new()).unwrap();
        let b = attach_boolean(c, BTreeMap::new()).unwrap();
        let v = valuate(&b, &w("101")).unwrap();
        assert_eq!(v.bits(), &w("101")[..]);
        assert_eq!(fun(&b, &w("101")).unwrap(), w("101"));
        let trace = run_schedule(&b, &w("101"), &layer_eager(b.base())).unwrap();
        assert!(trace.steps.is_empty());
        assert!(is_reversible_circuit(&b, ReversibilityMethod::CrossCheck, 12).unwrap());
    }

    #[test]
    fn two_gate_function() {
        // G1 = cnot on (1,2), then G2 = swap on (1,3)
        let b = cnot_swap();
        for i in 0..8 {
            let x = index_to_word(i, 3);
            let (a1, a2, a3) = (x[0], x[1], x[2]);
            let expected = vec![a3, a1 ^ a2, a1];
            assert_eq!(fun(&b, &x).unwrap(), expected);
        }
        assert_eq!(fun(&b, &w("110")).unwrap(), w("001"));
    }

    #[test]
    fn schedules_agree() {
        let b = cnot_swap();
        let eager = run_schedule(&b, &w("110"), &layer_eager(b.base())).unwrap();
        assert_eq!(eager.steps.len(), 2);
        assert_eq!(eager.output, fun(&b, &w("110")).unwrap());
        assert_eq!(eager.valuation, valuate(&b, &w("110")).unwrap());
        let lazy = run_schedule(&b, &w("110"), &layer_lazy(b.base())).unwrap();
        assert_eq!(lazy.valuation, eager.valuation);
        let bad = CoherentPartition::from_names(b.base(), &[vec!["G1", "G2"]]).unwrap();
        assert_eq!(run_schedule(&b, &w("110"), &bad).unwrap().output, eager.output);
    }

    #[test]
    fn incoherent_schedule_is_rejected() {
        let b = BooleanCircuit::from_names(chain3(), &[("A", bf("NOT")), ("B", bf("NOT")), ("C", bf("NOT"))]).unwrap();
        let c = b.base();
        let p = crate::decomposition::CoherentPartition::from_linearization(c, &linearize(c)).unwrap();
        assert_eq!(run_schedule(&b, &w("0"), &p).unwrap().output, w("1"));
        let blocks: Vec<Vec<NodeId>> = ["B", "A", "C"].iter().map(|n| vec![c.gate_id(n).unwrap()]).collect();
        let forced = CoherentPartition::new_unchecked(blocks);
        assert_eq!(run_schedule(&b, &w("0"), &forced).unwrap_err().code(), "NOT_COHERENT");
    }

    #[test]
    fn every_schedule_same_valuation() {
        let b = cnot_swap();
        for p in all_antichain_partitions(b.base(), 100).unwrap() {
            for i in 0..8 {
                let x = index_to_word(i, 3);
                assert_eq!(run_schedule(&b, &x, &p).unwrap().valuation, valuate(&b, &x).unwrap());
            }
        }
    }

    #[test]
    fn composition() {
        let cc = compose_boolean(&[single("CNOT", 2), single("CNOT", 2)]).unwrap();
        assert_eq!(truth_table(&cc, 12).unwrap(), BooleanFunction::identity(2));
        let x_then_id = compose_boolean(&[single("NOT", 1), single("ID", 1)]).unwrap();
        assert_eq!(truth_table(&x_then_id, 12).unwrap(), bf("NOT"));
        let e = compose_boolean(&[single("NOT", 1), single("CNOT", 2)]).unwrap_err();
        assert_eq!(e.code(), "WIDTH_MISMATCH");
    }

    #[test]
    fn decomposition_products() {
        let b = cnot_swap();
        let whole = truth_table(&b, 12).unwrap();
        for p in all_convex_partitions(b.base(), 100).unwrap() {
            let parts = decompose_boolean(&b, p.blocks()).unwrap();
            let product =
                parts.iter().map(|s| truth_table(s, 12).unwrap()).reduce(|acc, f| acc.then(&f).unwrap()).unwrap();
            assert_eq!(product, whole);
            assert_eq!(compose_boolean(&parts).unwrap(), b);
        }
    }

    #[test]
    fn reversibility() {
        use ReversibilityMethod::*;
        let b = cnot_swap();
        for m in [ByGates, ByTable, CrossCheck] {
            assert!(is_reversible_circuit(&b, m, 12).unwrap());
        }
        let and = BooleanCircuit::from_names(two_gate(), &[("G1", bf("AND-EMBED")), ("G2", bf("SWAP"))]).unwrap();
        for m in [ByGates, ByTable, CrossCheck] {
            assert!(!is_reversible_circuit(&and, m, 12).unwrap());
        }
        assert_eq!(is_reversible_circuit(&b, ByTable, 2).unwrap_err().code(), "WIDTH_TOO_LARGE");
    }

    #[test]
    fn reversibility_needs_balance() {
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
        let b = BooleanCircuit::from_names(c, &[("G", bf("AND"))]).unwrap();
        assert_eq!(fun(&b, &w("11")).unwrap(), w("1"));
        assert_eq!(is_reversible_circuit(&b, ReversibilityMethod::ByGates, 12).unwrap_err().code(), "NOT_BALANCED");
    }
}
