use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};

use super::{check_gates, check_partition, convex_unchecked, DecompositionError, GateSet};
use crate::ir::{Circuit, NodeId, NodeKind, RawCircuit, RawEdge};

/// Per composed part, the map from its original gate names to the gate
/// names used in the composite.
pub type Renames = Vec<BTreeMap<String, String>>;

/// The slice of a balanced circuit generated by a convex gate set.
///
/// Non-members are removed along with every edge that touches no member.
/// On a timeline where a member is active, the dangling ends are attached
/// to that timeline's input and output nodes. On any other timeline the
/// original input edge is restored and runs straight to the output node.
/// No ids are invented, so the result depends only on `(c, x)`.
pub fn slice(c: &Circuit, x: &GateSet) -> Result<Circuit, DecompositionError> {
    check_gates(c, x)?;
    if !c.has_timelines() {
        return Err(DecompositionError::NotBalanced);
    }
    if !convex_unchecked(c, x) {
        return Err(DecompositionError::NotConvex);
    }
    let w = c.width()?;
    let tl = |e| c.timeline(e).expect("balanced circuits carry timelines");
    let mut active = vec![false; w + 1];
    for &g in x {
        for &e in c.incoming(g) {
            active[tl(e)] = true;
        }
    }

    let mut raw = RawCircuit::new();
    for n in c.nodes() {
        match c.kind(n) {
            NodeKind::Gate if !x.contains(&n) => continue,
            kind => raw.nodes.push((c.node_name(n).to_string(), kind)),
        }
    }
    for &g in x {
        let names = |l: &[crate::ir::EdgeId]| l.iter().map(|&e| c.edge_name(e).to_string()).collect();
        let g_name = c.node_name(g).to_string();
        raw.gate_in.insert(g_name.clone(), names(c.incoming(g)));
        raw.gate_out.insert(g_name, names(c.outgoing(g)));
    }
    let mut timelines = BTreeMap::new();
    let removed = |n: NodeId| c.is_gate(n) && !x.contains(&n);
    for e in c.edges() {
        let (s, t) = (c.source(e), c.target(e));
        if !x.contains(&s) && !x.contains(&t) {
            continue;
        }
        let src = if removed(s) { c.inputs()[tl(e) - 1] } else { s };
        let dst = if removed(t) { c.outputs()[tl(e) - 1] } else { t };
        raw.edges.push(RawEdge {
            id: c.edge_name(e).to_string(),
            source: c.node_name(src).to_string(),
            target: c.node_name(dst).to_string(),
        });
        timelines.insert(c.edge_name(e).to_string(), tl(e));
    }
    for t in (1..=w).filter(|&t| !active[t]) {
        let input = c.inputs()[t - 1];
        let e = c.outgoing(input)[0];
        raw.edges.push(RawEdge {
            id: c.edge_name(e).to_string(),
            source: c.node_name(input).to_string(),
            target: c.node_name(c.outputs()[t - 1]).to_string(),
        });
        timelines.insert(c.edge_name(e).to_string(), t);
    }
    raw.timelines = Some(timelines);
    Ok(raw.build().expect("a slice of a valid balanced circuit is valid"))
}

/// Name-level working copy of a balanced circuit during composition.
struct Work {
    inputs: Vec<String>,
    outputs: Vec<String>,
    gates: Vec<String>,
    edges: BTreeMap<String, (String, String, usize)>,
    gate_in: BTreeMap<String, Vec<String>>,
    gate_out: BTreeMap<String, Vec<String>>,
    output_edge: Vec<String>,
}

impl Work {
    fn from_circuit(c: &Circuit) -> Self {
        let name = |n| c.node_name(n).to_string();
        let ename = |e| c.edge_name(e).to_string();
        let lists = |f: &dyn Fn(NodeId) -> Vec<String>| c.gates().map(|g| (name(g), f(g))).collect();
        Work {
            inputs: c.inputs().iter().map(|&n| name(n)).collect(),
            outputs: c.outputs().iter().map(|&n| name(n)).collect(),
            gates: c.gates().map(name).collect(),
            edges: c
                .edges()
                .map(|e| (ename(e), (name(c.source(e)), name(c.target(e)), c.timeline(e).expect("balanced"))))
                .collect(),
            gate_in: lists(&|g| c.incoming(g).iter().map(|&e| ename(e)).collect()),
            gate_out: lists(&|g| c.outgoing(g).iter().map(|&e| ename(e)).collect()),
            output_edge: (1..=c.outputs().len()).map(|r| ename(c.output_edge(r))).collect(),
        }
    }

    fn into_circuit(self) -> Circuit {
        let mut raw = RawCircuit::new();
        for (i, n) in self.inputs.into_iter().enumerate() {
            raw.nodes.push((n, NodeKind::Input(i + 1)));
        }
        for (i, n) in self.outputs.into_iter().enumerate() {
            raw.nodes.push((n, NodeKind::Output(i + 1)));
        }
        for g in self.gates {
            raw.nodes.push((g, NodeKind::Gate));
        }
        let mut timelines = BTreeMap::new();
        for (id, (source, target, t)) in self.edges {
            timelines.insert(id.clone(), t);
            raw.edges.push(RawEdge { id, source, target });
        }
        raw.timelines = Some(timelines);
        raw.gate_in = self.gate_in;
        raw.gate_out = self.gate_out;
        raw.build().expect("composition of valid balanced circuits is valid")
    }

    /// Appends `b`, merging our output edges with its input edges. Ids of
    /// `b` that clash with ours get a `p{part}.` prefix.
    fn append(&mut self, b: &Circuit, part: usize) -> BTreeMap<String, String> {
        let ours_nodes: BTreeSet<&str> = self.inputs.iter().chain(self.gates.iter()).map(String::as_str).collect();
        let theirs_nodes: BTreeSet<&str> = b.nodes().map(|n| b.node_name(n)).collect();
        let mut node_map: BTreeMap<NodeId, String> = BTreeMap::new();
        let mut used: BTreeSet<String> = BTreeSet::new();
        for n in b.nodes() {
            if matches!(b.kind(n), NodeKind::Input(_)) {
                continue;
            }
            let name = b.node_name(n);
            let fresh = fresh_name(name, part, |s| {
                ours_nodes.contains(s) || (s != name && theirs_nodes.contains(s)) || used.contains(s)
            });
            used.insert(fresh.clone());
            node_map.insert(n, fresh);
        }

        let ours_edges: BTreeSet<String> = self.edges.keys().cloned().collect();
        let theirs_edges: BTreeSet<&str> = b.edges().map(|e| b.edge_name(e)).collect();
        let mut edge_map: BTreeMap<usize, String> = BTreeMap::new();
        let mut used: BTreeSet<String> = BTreeSet::new();
        for e in b.edges() {
            let s = b.source(e);
            if matches!(b.kind(s), NodeKind::Input(_)) {
                continue;
            }
            let name = b.edge_name(e);
            let fresh = fresh_name(name, part, |x| {
                ours_edges.contains(x) || (x != name && theirs_edges.contains(x)) || used.contains(x)
            });
            used.insert(fresh.clone());
            edge_map.insert(e.index(), fresh);
        }

        // Merge at every stratum.
        let w = self.inputs.len();
        let mut merged_into: BTreeMap<usize, String> = BTreeMap::new();
        for t in 1..=w {
            let ours = self.output_edge[t - 1].clone();
            let theirs = b.outgoing(b.inputs()[t - 1])[0];
            let target = node_map[&b.target(theirs)].clone();
            self.edges.get_mut(&ours).expect("output edge exists").1 = target;
            merged_into.insert(theirs.index(), ours);
        }
        let edge_name = |e: crate::ir::EdgeId| -> String {
            merged_into.get(&e.index()).or_else(|| edge_map.get(&e.index())).expect("edge is mapped").clone()
        };
        for e in b.edges() {
            if let Some(name) = edge_map.get(&e.index()) {
                let src = node_map[&b.source(e)].clone();
                let dst = node_map[&b.target(e)].clone();
                self.edges.insert(name.clone(), (src, dst, b.timeline(e).expect("balanced")));
            }
        }
        let mut gate_renames = BTreeMap::new();
        for g in b.gates() {
            let name = node_map[&g].clone();
            gate_renames.insert(b.node_name(g).to_string(), name.clone());
            self.gate_in.insert(name.clone(), b.incoming(g).iter().map(|&e| edge_name(e)).collect());
            self.gate_out.insert(name.clone(), b.outgoing(g).iter().map(|&e| edge_name(e)).collect());
            self.gates.push(name);
        }
        self.outputs = b.outputs().iter().map(|n| node_map[n].clone()).collect();
        self.output_edge = (1..=w).map(|r| edge_name(b.output_edge(r))).collect();
        gate_renames
    }
}

fn fresh_name(name: &str, part: usize, taken: impl Fn(&str) -> bool) -> String {
    let mut cand = name.to_string();
    while taken(&cand) {
        cand = format!("p{part}.{cand}");
    }
    cand
}

fn check_composable<C: Borrow<Circuit>>(parts: &[C]) -> Result<usize, DecompositionError> {
    let first = parts.first().ok_or(DecompositionError::EmptySequence)?.borrow();
    if !first.has_timelines() {
        return Err(DecompositionError::NotBalanced);
    }
    let w = first.width()?;
    for p in parts {
        let p = p.borrow();
        if !p.has_timelines() {
            return Err(DecompositionError::NotBalanced);
        }
        let found = p.width()?;
        if found != w {
            return Err(DecompositionError::WidthMismatch { expected: w, found });
        }
    }
    Ok(w)
}

/// Composes balanced circuits of equal width left to right, also reporting
/// how gates were renamed. Ids are kept wherever they do not clash; each
/// merged edge keeps the id of the left-hand output edge.
pub fn compose_with_renames<C: Borrow<Circuit>>(parts: &[C]) -> Result<(Circuit, Renames), DecompositionError> {
    check_composable(parts)?;
    let first = parts[0].borrow();
    let mut work = Work::from_circuit(first);
    let mut renames: Renames =
        vec![first.gates().map(|g| (first.node_name(g).to_string(), first.node_name(g).to_string())).collect()];
    for (k, p) in parts.iter().enumerate().skip(1) {
        renames.push(work.append(p.borrow(), k + 1));
    }
    if parts.len() == 1 {
        return Ok((first.clone(), renames));
    }
    Ok((work.into_circuit(), renames))
}

pub fn compose<C: Borrow<Circuit>>(parts: &[C]) -> Result<Circuit, DecompositionError> {
    compose_with_renames(parts).map(|(c, _)| c)
}

/// Slices generated by the blocks of a coherent partition into convex
/// blocks. Composing them gives back `c` exactly.
pub fn decompose(c: &Circuit, blocks: &[Vec<NodeId>]) -> Result<Vec<Circuit>, DecompositionError> {
    if !c.has_timelines() {
        return Err(DecompositionError::NotBalanced);
    }
    for b in blocks {
        check_gates(c, b)?;
    }
    let sets: Vec<GateSet> = blocks.iter().map(|b| b.iter().copied().collect()).collect();
    if let Some(i) = sets.iter().position(|x| !convex_unchecked(c, x)) {
        return Err(DecompositionError::NotConvexBlock(i));
    }
    check_partition(c, blocks).map_err(DecompositionError::NotCoherent)?;
    sets.iter().map(|x| slice(c, x)).collect()
}
