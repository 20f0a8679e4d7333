//! Convex gate sets, slices, composition, coherent partitions and the
//! standard schedules (eager, lazy, linear) of a circuit.
//!
//! A coherent partition of the gates of a balanced circuit determines its
//! decomposition: composing the slices generated by the blocks, in order,
//! gives back the original circuit, ids included.

mod iso;
mod slice;

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::ir::{Circuit, IrError, NodeId};
use crate::order::{LinearOrder, OrderError, Poset};

pub use iso::{isomorphic, IsoWitness};
pub use slice::{compose, compose_with_renames, decompose, slice, Renames};

/// A set of gates of one circuit.
pub type GateSet = BTreeSet<NodeId>;

/// A coherent linearization: every gate once, extending "earlier".
pub type Linearization = LinearOrder<NodeId>;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DecompositionError {
    #[error("`{0}` is not a gate of the circuit")]
    UnknownGate(String),
    #[error("gate set is not convex")]
    NotConvex,
    #[error("circuit is not balanced")]
    NotBalanced,
    #[error("width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("cannot compose an empty sequence")]
    EmptySequence,
    #[error("block {0} is not convex")]
    NotConvexBlock(usize),
    #[error("partition is not coherent: {0}")]
    NotCoherent(PartitionDefect),
    #[error("more than {0} results")]
    TooMany(usize),
}

impl DecompositionError {
    pub fn code(&self) -> &'static str {
        match self {
            DecompositionError::UnknownGate(_) => "UNKNOWN_GATE",
            DecompositionError::NotConvex => "NOT_CONVEX",
            DecompositionError::NotBalanced => "NOT_BALANCED",
            DecompositionError::WidthMismatch { .. } => "WIDTH_MISMATCH",
            DecompositionError::EmptySequence => "EMPTY_SEQUENCE",
            DecompositionError::NotConvexBlock(_) => "NOT_CONVEX_BLOCK",
            DecompositionError::NotCoherent(_) => "NOT_COHERENT",
            DecompositionError::TooMany(_) => "TOO_MANY",
        }
    }
}

impl From<IrError> for DecompositionError {
    fn from(e: IrError) -> Self {
        match e {
            IrError::UnknownNode(n) | IrError::NotAGate(n) | IrError::NotBalancedGate(n) => {
                DecompositionError::UnknownGate(n)
            }
            IrError::NotBalanced | IrError::NoTimelines => DecompositionError::NotBalanced,
        }
    }
}

/// Why a sequence of gate sets is not a coherent partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartitionDefect {
    NotAGate(String),
    EmptyBlock(usize),
    Repeated(String),
    Missing(String),
    /// `earlier` sits in a later block than `later`.
    Incoherent {
        earlier: String,
        later: String,
    },
}

impl fmt::Display for PartitionDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionDefect::NotAGate(g) => write!(f, "`{g}` is not a gate"),
            PartitionDefect::EmptyBlock(i) => write!(f, "block {} is empty", i + 1),
            PartitionDefect::Repeated(g) => write!(f, "gate `{g}` appears more than once"),
            PartitionDefect::Missing(g) => write!(f, "gate `{g}` is not covered"),
            PartitionDefect::Incoherent { earlier, later } => {
                write!(f, "`{earlier}` is earlier than `{later}` but placed in a later block")
            }
        }
    }
}

/// Checks that `blocks` partition the gates of `c` and respect "earlier"
/// across blocks. Pairs inside one block are not constrained.
pub fn check_partition(c: &Circuit, blocks: &[Vec<NodeId>]) -> Result<(), PartitionDefect> {
    let mut block_of = vec![usize::MAX; c.node_count()];
    for (i, block) in blocks.iter().enumerate() {
        if block.is_empty() {
            return Err(PartitionDefect::EmptyBlock(i));
        }
        for &g in block {
            if g.index() >= c.node_count() || !c.is_gate(g) {
                let name = if g.index() < c.node_count() { c.node_name(g).to_string() } else { format!("{g:?}") };
                return Err(PartitionDefect::NotAGate(name));
            }
            if block_of[g.index()] != usize::MAX {
                return Err(PartitionDefect::Repeated(c.node_name(g).to_string()));
            }
            block_of[g.index()] = i;
        }
    }
    let gates: Vec<NodeId> = c.gates().collect();
    if let Some(&g) = gates.iter().find(|g| block_of[g.index()] == usize::MAX) {
        return Err(PartitionDefect::Missing(c.node_name(g).to_string()));
    }
    for &a in &gates {
        for &b in &gates {
            if block_of[a.index()] > block_of[b.index()] && c.is_earlier(a, b) {
                return Err(PartitionDefect::Incoherent {
                    earlier: c.node_name(a).to_string(),
                    later: c.node_name(b).to_string(),
                });
            }
        }
    }
    Ok(())
}

pub fn is_coherent_partition(c: &Circuit, blocks: &[Vec<NodeId>]) -> bool {
    check_partition(c, blocks).is_ok()
}

/// A validated coherent partition of the gates of one circuit. Each block
/// is kept sorted by gate id.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoherentPartition {
    blocks: Vec<Vec<NodeId>>,
}

impl CoherentPartition {
    pub fn new(c: &Circuit, mut blocks: Vec<Vec<NodeId>>) -> Result<Self, PartitionDefect> {
        check_partition(c, &blocks)?;
        for b in &mut blocks {
            b.sort_unstable();
        }
        Ok(CoherentPartition { blocks })
    }

    /// Builds a partition from gate names, e.g. `[["G1"], ["G2", "G3"]]`.
    pub fn from_names<S: AsRef<str>>(c: &Circuit, blocks: &[Vec<S>]) -> Result<Self, PartitionDefect> {
        let resolved = blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|n| c.gate_id(n.as_ref()).map_err(|_| PartitionDefect::NotAGate(n.as_ref().to_string())))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(c, resolved)
    }

    /// One block per gate.
    pub fn from_linearization(c: &Circuit, l: &Linearization) -> Result<Self, PartitionDefect> {
        Self::new(c, l.0.iter().map(|&g| vec![g]).collect())
    }

    pub(crate) fn new_unchecked(blocks: Vec<Vec<NodeId>>) -> Self {
        CoherentPartition { blocks }
    }

    pub fn blocks(&self) -> &[Vec<NodeId>] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Vec<NodeId>> {
        self.blocks
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn is_antichain_partition(&self, c: &Circuit) -> bool {
        self.blocks.iter().all(|b| is_antichain(c, b))
    }

    /// Renders blocks as `G1,G2 | G3`.
    pub fn display(&self, c: &Circuit) -> String {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&g| c.node_name(g)).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(" | ")
    }
}

fn check_gates<'a>(c: &Circuit, x: impl IntoIterator<Item = &'a NodeId>) -> Result<(), DecompositionError> {
    for &g in x {
        if g.index() >= c.node_count() || !c.is_gate(g) {
            let name = if g.index() < c.node_count() { c.node_name(g).to_string() } else { format!("{g:?}") };
            return Err(DecompositionError::UnknownGate(name));
        }
    }
    Ok(())
}

/// No path between two gates of `x` passes through a gate outside `x`.
pub fn is_convex(c: &Circuit, x: &GateSet) -> Result<bool, DecompositionError> {
    check_gates(c, x)?;
    Ok(convex_unchecked(c, x))
}

fn convex_unchecked(c: &Circuit, x: &GateSet) -> bool {
    c.gates().filter(|g| !x.contains(g)).all(|g| {
        let from_x = x.iter().any(|&a| c.is_earlier(a, g));
        let to_x = x.iter().any(|&b| c.is_earlier(g, b));
        !(from_x && to_x)
    })
}

/// Pairwise incomparable gates.
pub fn is_antichain(c: &Circuit, x: &[NodeId]) -> bool {
    x.iter().all(|&a| x.iter().all(|&b| !c.is_earlier(a, b)))
}

/// Fires every earliest unfired gate at each step. Block `t` holds the
/// gates whose longest gate chain (themselves included) has length `t`,
/// so there are exactly `depth(c)` blocks.
pub fn layer_eager(c: &Circuit) -> CoherentPartition {
    let level = c.gate_levels();
    let mut blocks = vec![Vec::new(); c.depth()];
    for g in c.gates() {
        blocks[level[g.index()] - 1].push(g);
    }
    CoherentPartition::new_unchecked(blocks)
}

/// Postpones every gate as long as possible while still finishing in
/// `depth(c)` steps: counting from the end, each block holds the latest
/// gates among those not yet placed.
pub fn layer_lazy(c: &Circuit) -> CoherentPartition {
    let mut tail = vec![0usize; c.node_count()];
    for &v in c.topological_order().iter().rev() {
        let best = c.outgoing(v).iter().map(|&e| tail[c.target(e).index()]).max().unwrap_or(0);
        tail[v.index()] = best + usize::from(c.is_gate(v));
    }
    let d = c.depth();
    let mut blocks = vec![Vec::new(); d];
    for g in c.gates() {
        blocks[d - tail[g.index()]].push(g);
    }
    CoherentPartition::new_unchecked(blocks)
}

/// Deterministic coherent linearization: topological order of the gates
/// with ties broken by gate id.
pub fn linearize(c: &Circuit) -> Linearization {
    let mut pending = vec![0usize; c.node_count()];
    for g in c.gates() {
        pending[g.index()] = c.incoming(g).iter().filter(|&&e| c.is_gate(c.source(e))).count();
    }
    let mut heap: BinaryHeap<Reverse<NodeId>> = c.gates().filter(|g| pending[g.index()] == 0).map(Reverse).collect();
    let mut out = Vec::with_capacity(c.gate_count());
    while let Some(Reverse(g)) = heap.pop() {
        out.push(g);
        for &e in c.outgoing(g) {
            let t = c.target(e);
            if c.is_gate(t) {
                pending[t.index()] -= 1;
                if pending[t.index()] == 0 {
                    heap.push(Reverse(t));
                }
            }
        }
    }
    LinearOrder(out)
}

/// The "earlier" relation restricted to gates.
pub fn gate_poset(c: &Circuit) -> Poset<NodeId> {
    let gates: Vec<NodeId> = c.gates().collect();
    let pairs: Vec<(NodeId, NodeId)> = c
        .edges()
        .filter(|&e| c.is_gate(c.source(e)) && c.is_gate(c.target(e)))
        .map(|e| (c.source(e), c.target(e)))
        .collect();
    Poset::new(gates, pairs, true).expect("circuits are acyclic")
}

/// Every coherent linearization, in lexicographic order of gate ids.
pub fn all_linearizations(c: &Circuit, cap: usize) -> Result<Vec<Linearization>, DecompositionError> {
    gate_poset(c).linear_extensions(cap).map_err(|e| match e {
        OrderError::TooMany(n) => DecompositionError::TooMany(n),
        other => unreachable!("gate poset is valid: {other}"),
    })
}

fn minimal_unfired(c: &Circuit, fired: &[bool]) -> Vec<NodeId> {
    c.gates()
        .filter(|g| !fired[g.index()])
        .filter(|&g| {
            c.incoming(g).iter().all(|&e| {
                let s = c.source(e);
                !c.is_gate(s) || fired[s.index()]
            })
        })
        .collect()
}

/// Every coherent partition into antichains (every possible computation).
/// Each step fires a nonempty subset of the earliest unfired gates.
pub fn all_antichain_partitions(c: &Circuit, cap: usize) -> Result<Vec<CoherentPartition>, DecompositionError> {
    fn go(
        c: &Circuit,
        fired: &mut Vec<bool>,
        left: usize,
        prefix: &mut Vec<Vec<NodeId>>,
        out: &mut Vec<CoherentPartition>,
        cap: usize,
    ) -> Result<(), DecompositionError> {
        if left == 0 {
            if out.len() == cap {
                return Err(DecompositionError::TooMany(cap));
            }
            out.push(CoherentPartition::new_unchecked(prefix.clone()));
            return Ok(());
        }
        let avail = minimal_unfired(c, fired);
        for mask in 1u64..(1u64 << avail.len()) {
            let block: Vec<NodeId> =
                avail.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &g)| g).collect();
            for g in &block {
                fired[g.index()] = true;
            }
            let n = block.len();
            prefix.push(block);
            let r = go(c, fired, left - n, prefix, out, cap);
            for g in prefix.pop().expect("pushed above") {
                fired[g.index()] = false;
            }
            r?;
        }
        Ok(())
    }
    let mut out = Vec::new();
    let mut fired = vec![false; c.node_count()];
    go(c, &mut fired, c.gate_count(), &mut Vec::new(), &mut out, cap)?;
    Ok(out)
}

/// A random computation: each step fires a random nonempty subset of the
/// earliest unfired gates.
pub fn random_antichain_partition<R: Rng + ?Sized>(c: &Circuit, rng: &mut R) -> CoherentPartition {
    let mut fired = vec![false; c.node_count()];
    let mut left = c.gate_count();
    let mut blocks = Vec::new();
    while left > 0 {
        let avail = minimal_unfired(c, &fired);
        let mut block: Vec<NodeId> = avail.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        if block.is_empty() {
            block.push(avail[rng.random_range(0..avail.len())]);
        }
        for g in &block {
            fired[g.index()] = true;
        }
        left -= block.len();
        blocks.push(block);
    }
    CoherentPartition::new_unchecked(blocks)
}

/// A random coherent linearization (uniform choice among earliest gates at each step).
pub fn random_linearization<R: Rng + ?Sized>(c: &Circuit, rng: &mut R) -> Linearization {
    let mut fired = vec![false; c.node_count()];
    let mut out = Vec::with_capacity(c.gate_count());
    while out.len() < c.gate_count() {
        let avail = minimal_unfired(c, &fired);
        let g = avail[rng.random_range(0..avail.len())];
        fired[g.index()] = true;
        out.push(g);
    }
    LinearOrder(out)
}

/// Every coherent partition of the gates into convex blocks.
pub fn all_convex_partitions(c: &Circuit, cap: usize) -> Result<Vec<CoherentPartition>, DecompositionError> {
    fn go(
        c: &Circuit,
        remaining: &[NodeId],
        prefix: &mut Vec<Vec<NodeId>>,
        out: &mut Vec<CoherentPartition>,
        cap: usize,
    ) -> Result<(), DecompositionError> {
        if remaining.is_empty() {
            if out.len() == cap {
                return Err(DecompositionError::TooMany(cap));
            }
            out.push(CoherentPartition::new_unchecked(prefix.clone()));
            return Ok(());
        }
        assert!(remaining.len() < 64, "too many gates to enumerate partitions");
        for mask in 1u64..(1u64 << remaining.len()) {
            let (block, rest): (Vec<_>, Vec<_>) = remaining.iter().enumerate().partition(|(i, _)| mask >> i & 1 == 1);
            let block: Vec<NodeId> = block.into_iter().map(|(_, &g)| g).collect();
            let rest: Vec<NodeId> = rest.into_iter().map(|(_, &g)| g).collect();
            // the first block may not have any remaining gate earlier than it
            let down_closed = rest.iter().all(|&r| block.iter().all(|&b| !c.is_earlier(r, b)));
            if !down_closed || !convex_unchecked(c, &block.iter().copied().collect()) {
                continue;
            }
            prefix.push(block);
            let r = go(c, &rest, prefix, out, cap);
            prefix.pop();
            r?;
        }
        Ok(())
    }
    let gates: Vec<NodeId> = c.gates().collect();
    let mut out = Vec::new();
    go(c, &gates, &mut Vec::new(), &mut out, cap)?;
    Ok(out)
}
