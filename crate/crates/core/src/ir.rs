//! Syntactic circuits.
//!
//! A circuit is a finite acyclic directed multigraph whose nodes are ordered
//! input nodes, ordered output nodes and black-box gates. Gates carry ordered
//! lists of their incoming and outgoing edges so that argument and value
//! positions of a gate semantics can be expressed. Balanced circuits carry a
//! timeline index on every edge.
//!
//! Node and edge names are caller-supplied strings. Internally they are
//! sorted lexicographically and replaced by dense [`NodeId`]/[`EdgeId`]
//! indices, so iterating ids in ascending order is iterating names in
//! lexicographic order.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

/// Index of a node inside one [`Circuit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

/// Index of an edge inside one [`Circuit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(i: usize) -> Self {
        EdgeId(i as u32)
    }
}

/// Classification of a node. Ranks are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Input(usize),
    Output(usize),
    Gate,
}

impl NodeKind {
    pub fn is_gate(self) -> bool {
        matches!(self, NodeKind::Gate)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawEdge {
    pub id: String,
    pub source: String,
    pub target: String,
}

/// Unvalidated circuit description, the input of [`Circuit::build`].
///
/// Gate edge orderings may be omitted: with timelines present a gate's
/// lists are sorted by timeline, otherwise incident edges are taken in edge
/// name order. When timelines are omitted and the circuit turns out to be
/// balanced, they are threaded positionally: the `j`-th outgoing edge of a
/// gate continues the timeline of its `j`-th incoming edge. If that threading
/// fails the circuit is kept as a general, unbalanced one.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawCircuit {
    pub nodes: Vec<(String, NodeKind)>,
    pub edges: Vec<RawEdge>,
    pub gate_in: BTreeMap<String, Vec<String>>,
    pub gate_out: BTreeMap<String, Vec<String>>,
    pub timelines: Option<BTreeMap<String, usize>>,
}

impl RawCircuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn input(mut self, id: impl Into<String>, rank: usize) -> Self {
        self.nodes.push((id.into(), NodeKind::Input(rank)));
        self
    }

    pub fn output(mut self, id: impl Into<String>, rank: usize) -> Self {
        self.nodes.push((id.into(), NodeKind::Output(rank)));
        self
    }

    pub fn gate(mut self, id: impl Into<String>) -> Self {
        self.nodes.push((id.into(), NodeKind::Gate));
        self
    }

    pub fn edge(mut self, id: impl Into<String>, source: impl Into<String>, target: impl Into<String>) -> Self {
        self.edges.push(RawEdge { id: id.into(), source: source.into(), target: target.into() });
        self
    }

    /// Adds an edge together with its timeline annotation.
    pub fn wire(
        self,
        id: impl Into<String>,
        source: impl Into<String>,
        target: impl Into<String>,
        timeline: usize,
    ) -> Self {
        let id = id.into();
        let mut raw = self.edge(id.clone(), source, target);
        raw.timelines.get_or_insert_with(BTreeMap::new).insert(id, timeline);
        raw
    }

    pub fn gate_order<I, O, S, T>(mut self, gate: impl Into<String>, ins: I, outs: O) -> Self
    where
        I: IntoIterator<Item = S>,
        O: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        let gate = gate.into();
        self.gate_in.insert(gate.clone(), ins.into_iter().map(Into::into).collect());
        self.gate_out.insert(gate, outs.into_iter().map(Into::into).collect());
        self
    }

    /// A balanced circuit of the given width whose timelines thread through
    /// `gates` in listing order. Nodes are `x{t}`, `y{t}`; edges `t{t}.{k}`.
    pub fn threaded<S: AsRef<str>>(width: usize, gates: &[(S, Vec<usize>)]) -> Self {
        let mut raw = RawCircuit::new();
        for t in 1..=width {
            raw = raw.input(format!("x{t}"), t).output(format!("y{t}"), t);
        }
        let mut tips: Vec<(String, usize)> = (1..=width).map(|t| (format!("x{t}"), 0)).collect();
        for (g, lines) in gates {
            let g = g.as_ref();
            raw = raw.gate(g);
            for &t in lines {
                let Some((tip, k)) = t.checked_sub(1).and_then(|i| tips.get_mut(i)) else {
                    raw = raw.edge(format!("t{t}.bad.{g}"), format!("x{t}"), g);
                    continue;
                };
                raw = raw.wire(format!("t{t}.{k}"), tip.clone(), g, t);
                *tip = g.to_string();
                *k += 1;
            }
        }
        for (i, (tip, k)) in tips.into_iter().enumerate() {
            raw = raw.wire(format!("t{}.{k}", i + 1), tip, format!("y{}", i + 1), i + 1);
        }
        raw
    }

    pub fn build(self) -> Result<Circuit, ValidationReport> {
        Circuit::build(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationCode {
    DuplicateId,
    UnknownEndpoint,
    BadRank,
    Cycle,
    IsolatedNode,
    BadInputDegree,
    BadOutputDegree,
    BadGateDegree,
    EdgeListMismatch,
    BadTimelines,
}

impl ViolationCode {
    pub fn code(self) -> &'static str {
        match self {
            ViolationCode::DuplicateId => "DUPLICATE_ID",
            ViolationCode::UnknownEndpoint => "UNKNOWN_ENDPOINT",
            ViolationCode::BadRank => "BAD_RANK",
            ViolationCode::Cycle => "CYCLE",
            ViolationCode::IsolatedNode => "ISOLATED_NODE",
            ViolationCode::BadInputDegree => "BAD_INPUT_DEGREE",
            ViolationCode::BadOutputDegree => "BAD_OUTPUT_DEGREE",
            ViolationCode::BadGateDegree => "BAD_GATE_DEGREE",
            ViolationCode::EdgeListMismatch => "EDGE_LIST_MISMATCH",
            ViolationCode::BadTimelines => "BAD_TIMELINES",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    pub nodes: Vec<String>,
    pub edges: Vec<String>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)?;
        if !self.nodes.is_empty() {
            write!(f, " [nodes: {}]", self.nodes.join(", "))?;
        }
        if !self.edges.is_empty() {
            write!(f, " [edges: {}]", self.edges.join(", "))?;
        }
        Ok(())
    }
}

/// All violations found while building a circuit. Empty iff the circuit is valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn codes(&self) -> Vec<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    fn push(&mut self, code: ViolationCode, nodes: Vec<String>, edges: Vec<String>, message: impl Into<String>) {
        self.violations.push(Violation { code, nodes, edges, message: message.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum IrError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{0}` is not a gate")]
    NotAGate(String),
    #[error("circuit is not balanced")]
    NotBalanced,
    #[error("gate `{0}` is not balanced")]
    NotBalancedGate(String),
    #[error("circuit carries no timelines")]
    NoTimelines,
}

impl IrError {
    pub fn code(&self) -> &'static str {
        match self {
            IrError::UnknownNode(_) => "UNKNOWN_NODE",
            IrError::NotAGate(_) => "UNKNOWN_GATE",
            IrError::NotBalanced => "NOT_BALANCED",
            IrError::NotBalancedGate(_) => "NOT_BALANCED_GATE",
            IrError::NoTimelines => "NO_TIMELINES",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Node {
    name: String,
    kind: NodeKind,
    incoming: Vec<EdgeId>,
    outgoing: Vec<EdgeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Edge {
    name: String,
    source: NodeId,
    target: NodeId,
    timeline: Option<usize>,
}

/// Reachability bit matrix: row `a` has bit `b` set iff a path leads from `a` to `b`.
#[derive(Clone, Debug)]
struct Reach {
    words: usize,
    bits: Vec<u64>,
}

impl Reach {
    fn get(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }
}

/// A validated syntactic circuit. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Circuit {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    inputs: Vec<NodeId>,
    outputs: Vec<NodeId>,
    balanced: bool,
    topo: Vec<NodeId>,
    reach: OnceLock<Reach>,
}

/// Structural identity: same names, kinds, incidences, edge orders and timelines.
impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Eq for Circuit {}

fn sorted_names<'a>(names: impl Iterator<Item = &'a str>) -> (Vec<String>, Vec<String>) {
    let mut seen = BTreeSet::new();
    let mut dups = BTreeSet::new();
    for n in names {
        if !seen.insert(n.to_string()) {
            dups.insert(n.to_string());
        }
    }
    (seen.into_iter().collect(), dups.into_iter().collect())
}

impl Circuit {
    /// Validates a raw description. On failure every violation found is
    /// reported; timeline checks only run once the graph structure is sound.
    pub fn build(raw: RawCircuit) -> Result<Circuit, ValidationReport> {
        let mut report = ValidationReport::default();

        let (node_names, dup_nodes) = sorted_names(raw.nodes.iter().map(|(n, _)| n.as_str()));
        if !dup_nodes.is_empty() {
            report.push(ViolationCode::DuplicateId, dup_nodes, vec![], "duplicate node ids");
        }
        let node_index: HashMap<&str, usize> = node_names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut kinds: Vec<Option<NodeKind>> = vec![None; node_names.len()];
        for (name, kind) in &raw.nodes {
            let i = node_index[name.as_str()];
            kinds[i].get_or_insert(*kind);
        }
        let kinds: Vec<NodeKind> = kinds.into_iter().map(|k| k.expect("every name has a kind")).collect();

        // Ranks must form exactly {1..m} and {1..n}.
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for (i, k) in kinds.iter().enumerate() {
            match k {
                NodeKind::Input(r) => inputs.push((*r, i)),
                NodeKind::Output(r) => outputs.push((*r, i)),
                NodeKind::Gate => {}
            }
        }
        inputs.sort();
        outputs.sort();
        for (label, list) in [("input", &inputs), ("output", &outputs)] {
            let bad: Vec<String> = list
                .iter()
                .enumerate()
                .filter(|(pos, (r, _))| *r != pos + 1)
                .map(|(_, (_, i))| node_names[*i].clone())
                .collect();
            if !bad.is_empty() {
                report.push(
                    ViolationCode::BadRank,
                    bad,
                    vec![],
                    format!("{label} ranks must be exactly 1..={}", list.len()),
                );
            }
        }

        let (edge_names, dup_edges) = sorted_names(raw.edges.iter().map(|e| e.id.as_str()));
        if !dup_edges.is_empty() {
            report.push(ViolationCode::DuplicateId, vec![], dup_edges, "duplicate edge ids");
        }
        let edge_index: HashMap<&str, usize> = edge_names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        // Endpoints per edge; None for edges with unknown endpoints.
        let mut endpoints: Vec<Option<(usize, usize)>> = vec![None; edge_names.len()];
        let mut assigned = vec![false; edge_names.len()];
        for e in &raw.edges {
            let ei = edge_index[e.id.as_str()];
            if assigned[ei] {
                continue;
            }
            assigned[ei] = true;
            match (node_index.get(e.source.as_str()), node_index.get(e.target.as_str())) {
                (Some(&s), Some(&t)) => endpoints[ei] = Some((s, t)),
                (s, t) => {
                    let mut missing = Vec::new();
                    if s.is_none() {
                        missing.push(e.source.clone());
                    }
                    if t.is_none() {
                        missing.push(e.target.clone());
                    }
                    report.push(
                        ViolationCode::UnknownEndpoint,
                        missing,
                        vec![e.id.clone()],
                        "edge refers to an unknown node",
                    );
                }
            }
        }

        let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); node_names.len()];
        let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); node_names.len()];
        for (ei, ep) in endpoints.iter().enumerate() {
            if let Some((s, t)) = ep {
                outgoing[*s].push(ei);
                incoming[*t].push(ei);
            }
        }

        for (i, kind) in kinds.iter().enumerate() {
            let (inc, out) = (incoming[i].len(), outgoing[i].len());
            let name = vec![node_names[i].clone()];
            if inc == 0 && out == 0 {
                report.push(ViolationCode::IsolatedNode, name, vec![], "node has no incident edges");
                continue;
            }
            match kind {
                NodeKind::Input(_) if inc != 0 || out == 0 => report.push(
                    ViolationCode::BadInputDegree,
                    name,
                    vec![],
                    format!("input node needs >=1 outgoing and 0 incoming edges, has {out} out / {inc} in"),
                ),
                NodeKind::Output(_) if inc != 1 || out != 0 => report.push(
                    ViolationCode::BadOutputDegree,
                    name,
                    vec![],
                    format!("output node needs exactly 1 incoming and 0 outgoing edges, has {inc} in / {out} out"),
                ),
                NodeKind::Gate if inc == 0 || out == 0 => report.push(
                    ViolationCode::BadGateDegree,
                    name,
                    vec![],
                    format!("gate needs >=1 incoming and >=1 outgoing edge, has {inc} in / {out} out"),
                ),
                _ => {}
            }
        }

        // Explicit gate orderings replace the default edge-name order.
        let mut explicit_order = vec![false; node_names.len()];
        for (lists, incident, label) in
            [(&raw.gate_in, &mut incoming, "incoming"), (&raw.gate_out, &mut outgoing, "outgoing")]
        {
            for (gate, list) in lists {
                let Some(&gi) = node_index.get(gate.as_str()) else {
                    report.push(
                        ViolationCode::EdgeListMismatch,
                        vec![gate.clone()],
                        vec![],
                        format!("{label} edge list given for unknown node"),
                    );
                    continue;
                };
                if !kinds[gi].is_gate() {
                    report.push(
                        ViolationCode::EdgeListMismatch,
                        vec![gate.clone()],
                        vec![],
                        format!("{label} edge list given for a non-gate node"),
                    );
                    continue;
                }
                let mut resolved = Vec::with_capacity(list.len());
                let mut unknown = Vec::new();
                for e in list {
                    match edge_index.get(e.as_str()) {
                        Some(&ei) => resolved.push(ei),
                        None => unknown.push(e.clone()),
                    }
                }
                let mut sorted = resolved.clone();
                sorted.sort_unstable();
                if !unknown.is_empty() || sorted != incident[gi] {
                    let mut listed: Vec<String> = list.clone();
                    listed.sort();
                    report.push(
                        ViolationCode::EdgeListMismatch,
                        vec![gate.clone()],
                        listed,
                        format!("{label} edge list must contain exactly the incident edges, each once"),
                    );
                    continue;
                }
                incident[gi] = resolved;
                explicit_order[gi] = true;
            }
        }

        // Kahn's algorithm; leftovers reveal cycles.
        let n = node_names.len();
        let mut indeg: Vec<usize> = incoming.iter().map(Vec::len).collect();
        let mut heap: BinaryHeap<Reverse<usize>> = (0..n).filter(|&i| indeg[i] == 0).map(Reverse).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(Reverse(v)) = heap.pop() {
            topo.push(v);
            for &e in &outgoing[v] {
                let (_, t) = endpoints[e].expect("incident edges have endpoints");
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    heap.push(Reverse(t));
                }
            }
        }
        if topo.len() < n {
            let done: BTreeSet<usize> = topo.iter().copied().collect();
            let rest: Vec<usize> = (0..n).filter(|i| !done.contains(i)).collect();
            let on_cycle: Vec<String> =
                rest.iter().filter(|&&v| on_cycle(v, &outgoing, &endpoints)).map(|&v| node_names[v].clone()).collect();
            report.push(ViolationCode::Cycle, on_cycle, vec![], "the multigraph has a directed cycle");
        }

        if !report.is_empty() {
            return Err(report);
        }

        let endpoints: Vec<(usize, usize)> = endpoints.into_iter().map(|e| e.expect("checked")).collect();
        let balanced = inputs.len() == outputs.len()
            && (0..n).all(|i| !kinds[i].is_gate() || incoming[i].len() == outgoing[i].len());

        let timelines = match &raw.timelines {
            Some(given) => check_given_timelines(
                given,
                balanced,
                &edge_names,
                &edge_index,
                &kinds,
                &node_names,
                &mut incoming,
                &mut outgoing,
                &explicit_order,
                &inputs,
                &outputs,
                &mut report,
            ),
            None if balanced => thread_timelines(&topo, &kinds, &incoming, &outgoing, &inputs, &outputs),
            None => None,
        };
        // without annotations, a degree-balanced circuit whose wires cannot be
        // threaded onto timelines is a general circuit
        let balanced = balanced && (raw.timelines.is_some() || timelines.is_some());
        if !report.is_empty() {
            return Err(report);
        }

        let nodes = (0..n)
            .map(|i| Node {
                name: node_names[i].clone(),
                kind: kinds[i],
                incoming: incoming[i].iter().map(|&e| EdgeId::from_index(e)).collect(),
                outgoing: outgoing[i].iter().map(|&e| EdgeId::from_index(e)).collect(),
            })
            .collect();
        let edges = edge_names
            .into_iter()
            .enumerate()
            .map(|(i, name)| Edge {
                name,
                source: NodeId::from_index(endpoints[i].0),
                target: NodeId::from_index(endpoints[i].1),
                timeline: timelines.as_ref().map(|t| t[i]),
            })
            .collect();
        Ok(Circuit {
            nodes,
            edges,
            inputs: inputs.iter().map(|&(_, i)| NodeId::from_index(i)).collect(),
            outputs: outputs.iter().map(|&(_, i)| NodeId::from_index(i)).collect(),
            balanced,
            topo: topo.into_iter().map(NodeId::from_index).collect(),
            reach: OnceLock::new(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// All nodes in id (lexicographic name) order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId::from_index)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId::from_index)
    }

    /// Gates in id order.
    pub fn gates(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(|&n| self.kind(n).is_gate())
    }

    pub fn gate_count(&self) -> usize {
        self.gates().count()
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes.binary_search_by(|n| n.name.as_str().cmp(name)).ok().map(NodeId::from_index)
    }

    pub fn edge_id(&self, name: &str) -> Option<EdgeId> {
        self.edges.binary_search_by(|e| e.name.as_str().cmp(name)).ok().map(EdgeId::from_index)
    }

    /// Resolves a gate name.
    pub fn gate_id(&self, name: &str) -> Result<NodeId, IrError> {
        let id = self.node_id(name).ok_or_else(|| IrError::UnknownNode(name.to_string()))?;
        if !self.kind(id).is_gate() {
            return Err(IrError::NotAGate(name.to_string()));
        }
        Ok(id)
    }

    /// Resolves a set of gate names.
    pub fn gate_set<S: AsRef<str>>(&self, names: &[S]) -> Result<BTreeSet<NodeId>, IrError> {
        names.iter().map(|n| self.gate_id(n.as_ref())).collect()
    }

    pub fn node_name(&self, n: NodeId) -> &str {
        &self.nodes[n.index()].name
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e.index()].name
    }

    pub fn kind(&self, n: NodeId) -> NodeKind {
        self.nodes[n.index()].kind
    }

    pub fn is_gate(&self, n: NodeId) -> bool {
        self.kind(n).is_gate()
    }

    pub fn source(&self, e: EdgeId) -> NodeId {
        self.edges[e.index()].source
    }

    pub fn target(&self, e: EdgeId) -> NodeId {
        self.edges[e.index()].target
    }

    /// Incoming edges; for gates this is the ordered argument-side list.
    pub fn incoming(&self, n: NodeId) -> &[EdgeId] {
        &self.nodes[n.index()].incoming
    }

    /// Outgoing edges; for gates this is the ordered value-side list.
    pub fn outgoing(&self, n: NodeId) -> &[EdgeId] {
        &self.nodes[n.index()].outgoing
    }

    pub fn timeline(&self, e: EdgeId) -> Option<usize> {
        self.edges[e.index()].timeline
    }

    pub fn has_timelines(&self) -> bool {
        self.edges.first().is_none_or(|e| e.timeline.is_some()) && self.balanced
    }

    /// Input nodes in rank order.
    pub fn inputs(&self) -> &[NodeId] {
        &self.inputs
    }

    /// Output nodes in rank order.
    pub fn outputs(&self) -> &[NodeId] {
        &self.outputs
    }

    /// The edge feeding output node `rank` (1-based).
    pub fn output_edge(&self, rank: usize) -> EdgeId {
        self.incoming(self.outputs[rank - 1])[0]
    }

    /// Topological order of all nodes, ties broken by id.
    pub fn topological_order(&self) -> &[NodeId] {
        &self.topo
    }

    fn reach(&self) -> &Reach {
        self.reach.get_or_init(|| {
            let n = self.nodes.len();
            let words = n.div_ceil(64).max(1);
            let mut bits = vec![0u64; n * words];
            for &v in self.topo.iter().rev() {
                let v = v.index();
                for &e in &self.nodes[v].outgoing {
                    let t = self.edges[e.index()].target.index();
                    bits[v * words + t / 64] |= 1 << (t % 64);
                    for w in 0..words {
                        let x = bits[t * words + w];
                        bits[v * words + w] |= x;
                    }
                }
            }
            Reach { words, bits }
        })
    }

    /// True iff a directed path leads from `a` to `b`. Irreflexive.
    pub fn is_earlier(&self, a: NodeId, b: NodeId) -> bool {
        self.reach().get(a.index(), b.index())
    }

    /// Name-based form of [`Circuit::is_earlier`].
    pub fn earlier(&self, a: &str, b: &str) -> Result<bool, IrError> {
        let a = self.node_id(a).ok_or_else(|| IrError::UnknownNode(a.to_string()))?;
        let b = self.node_id(b).ok_or_else(|| IrError::UnknownNode(b.to_string()))?;
        Ok(self.is_earlier(a, b))
    }

    /// Number of gates on a longest gate chain ending at each node
    /// (the node itself included when it is a gate).
    pub(crate) fn gate_levels(&self) -> Vec<usize> {
        let mut level = vec![0usize; self.nodes.len()];
        for &v in &self.topo {
            let best = self.incoming(v).iter().map(|&e| level[self.source(e).index()]).max().unwrap_or(0);
            level[v.index()] = best + usize::from(self.is_gate(v));
        }
        level
    }

    /// Maximum number of gates involved in any path; 0 without gates.
    pub fn depth(&self) -> usize {
        self.gate_levels().into_iter().max().unwrap_or(0)
    }

    /// Every gate has equal in/out degree and #inputs = #outputs.
    pub fn is_balanced(&self) -> bool {
        self.balanced
    }

    pub fn width(&self) -> Result<usize, IrError> {
        if self.balanced {
            Ok(self.inputs.len())
        } else {
            Err(IrError::NotBalanced)
        }
    }

    pub fn gate_arity(&self, g: NodeId) -> Result<usize, IrError> {
        if !self.is_gate(g) {
            return Err(IrError::NotAGate(self.node_name(g).to_string()));
        }
        let (i, o) = (self.incoming(g).len(), self.outgoing(g).len());
        if i != o {
            return Err(IrError::NotBalancedGate(self.node_name(g).to_string()));
        }
        Ok(i)
    }

    /// Ascending timelines a gate is active on.
    pub fn active_timelines(&self, g: NodeId) -> Result<Vec<usize>, IrError> {
        if !self.is_gate(g) {
            return Err(IrError::NotAGate(self.node_name(g).to_string()));
        }
        if !self.has_timelines() {
            return Err(IrError::NoTimelines);
        }
        // gate_in is kept in ascending timeline order
        Ok(self.incoming(g).iter().map(|&e| self.timeline(e).expect("timelines present")).collect())
    }

    /// Edges on timeline `t` from input to output, in path order.
    pub fn timeline_edges(&self, t: usize) -> Result<Vec<EdgeId>, IrError> {
        if !self.has_timelines() {
            return Err(IrError::NoTimelines);
        }
        let mut out = Vec::new();
        let mut e = self.outgoing(self.inputs[t - 1])[0];
        loop {
            out.push(e);
            let next = self.target(e);
            if !self.is_gate(next) {
                return Ok(out);
            }
            e = *self
                .outgoing(next)
                .iter()
                .find(|&&o| self.timeline(o) == Some(t))
                .expect("timelines thread through gates");
        }
    }

    /// Reconstructs an equivalent raw description with explicit gate
    /// orderings and timelines.
    pub fn to_raw(&self) -> RawCircuit {
        let mut raw = RawCircuit::new();
        for n in &self.nodes {
            raw.nodes.push((n.name.clone(), n.kind));
        }
        for e in &self.edges {
            raw.edges.push(RawEdge {
                id: e.name.clone(),
                source: self.nodes[e.source.index()].name.clone(),
                target: self.nodes[e.target.index()].name.clone(),
            });
        }
        for n in &self.nodes {
            if n.kind.is_gate() {
                let names = |l: &[EdgeId]| l.iter().map(|&e| self.edges[e.index()].name.clone()).collect();
                raw.gate_in.insert(n.name.clone(), names(&n.incoming));
                raw.gate_out.insert(n.name.clone(), names(&n.outgoing));
            }
        }
        if self.has_timelines() {
            raw.timelines =
                Some(self.edges.iter().map(|e| (e.name.clone(), e.timeline.expect("timelines present"))).collect());
        }
        raw
    }
}

fn on_cycle(start: usize, outgoing: &[Vec<usize>], endpoints: &[Option<(usize, usize)>]) -> bool {
    let mut stack = vec![start];
    let mut seen = BTreeSet::new();
    while let Some(v) = stack.pop() {
        for &e in &outgoing[v] {
            let (_, t) = endpoints[e].expect("incident edges have endpoints");
            if t == start {
                return true;
            }
            if seen.insert(t) {
                stack.push(t);
            }
        }
    }
    false
}

#[allow(clippy::too_many_arguments)]
fn check_given_timelines(
    given: &BTreeMap<String, usize>,
    balanced: bool,
    edge_names: &[String],
    edge_index: &HashMap<&str, usize>,
    kinds: &[NodeKind],
    node_names: &[String],
    incoming: &mut [Vec<usize>],
    outgoing: &mut [Vec<usize>],
    explicit_order: &[bool],
    inputs: &[(usize, usize)],
    outputs: &[(usize, usize)],
    report: &mut ValidationReport,
) -> Option<Vec<usize>> {
    let before = report.violations.len();
    if !balanced {
        report.push(ViolationCode::BadTimelines, vec![], vec![], "timelines given but the circuit is not balanced");
        return None;
    }
    let w = inputs.len();
    let unknown: Vec<String> = given.keys().filter(|k| !edge_index.contains_key(k.as_str())).cloned().collect();
    if !unknown.is_empty() {
        report.push(ViolationCode::BadTimelines, vec![], unknown, "timeline given for unknown edges");
    }
    let mut tl = vec![0usize; edge_names.len()];
    let mut missing = Vec::new();
    let mut out_of_range = Vec::new();
    for (i, name) in edge_names.iter().enumerate() {
        match given.get(name) {
            None => missing.push(name.clone()),
            Some(&t) if t == 0 || t > w => out_of_range.push(name.clone()),
            Some(&t) => tl[i] = t,
        }
    }
    if !missing.is_empty() {
        report.push(ViolationCode::BadTimelines, vec![], missing, "edges without a timeline");
    }
    if !out_of_range.is_empty() {
        report.push(ViolationCode::BadTimelines, vec![], out_of_range, format!("timelines must lie in 1..={w}"));
    }
    if report.violations.len() > before {
        return None;
    }
    for &(rank, i) in inputs {
        let bad: Vec<String> = outgoing[i].iter().filter(|&&e| tl[e] != rank).map(|&e| edge_names[e].clone()).collect();
        if outgoing[i].len() != 1 || !bad.is_empty() {
            report.push(
                ViolationCode::BadTimelines,
                vec![node_names[i].clone()],
                bad,
                format!("input {rank} needs exactly one outgoing edge on timeline {rank}"),
            );
        }
    }
    for &(rank, i) in outputs {
        let e = incoming[i][0];
        if tl[e] != rank {
            report.push(
                ViolationCode::BadTimelines,
                vec![node_names[i].clone()],
                vec![edge_names[e].clone()],
                format!("output {rank} must be fed by an edge on timeline {rank}"),
            );
        }
    }
    for g in 0..kinds.len() {
        if !kinds[g].is_gate() {
            continue;
        }
        for list in [&mut incoming[g], &mut outgoing[g]] {
            let ascending = list.windows(2).all(|p| tl[p[0]] < tl[p[1]]);
            if !ascending && !explicit_order[g] {
                list.sort_by_key(|&e| tl[e]);
            }
        }
        let ins: Vec<usize> = incoming[g].iter().map(|&e| tl[e]).collect();
        let outs: Vec<usize> = outgoing[g].iter().map(|&e| tl[e]).collect();
        let strictly = |v: &[usize]| v.windows(2).all(|p| p[0] < p[1]);
        if ins != outs || !strictly(&ins) {
            let edges = incoming[g].iter().chain(&outgoing[g]).map(|&e| edge_names[e].clone()).collect();
            report.push(
                ViolationCode::BadTimelines,
                vec![node_names[g].clone()],
                edges,
                format!(
                    "gate timelines must be distinct, ascending and equal on both sides (in {ins:?}, out {outs:?})"
                ),
            );
        }
    }
    (report.violations.len() == before).then_some(tl)
}

fn thread_timelines(
    topo: &[usize],
    kinds: &[NodeKind],
    incoming: &[Vec<usize>],
    outgoing: &[Vec<usize>],
    inputs: &[(usize, usize)],
    outputs: &[(usize, usize)],
) -> Option<Vec<usize>> {
    let mut tl = vec![0usize; incoming.iter().map(Vec::len).sum()];
    for &(rank, i) in inputs {
        if outgoing[i].len() != 1 {
            return None;
        }
        tl[outgoing[i][0]] = rank;
    }
    for &v in topo {
        if !kinds[v].is_gate() {
            continue;
        }
        for (pos, &e) in outgoing[v].iter().enumerate() {
            tl[e] = tl[incoming[v][pos]];
        }
        if !incoming[v].windows(2).all(|p| tl[p[0]] < tl[p[1]]) {
            return None;
        }
    }
    outputs.iter().all(|&(rank, i)| tl[incoming[i][0]] == rank).then_some(tl)
}
