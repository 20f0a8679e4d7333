use crate::ir::{Circuit, EdgeId, NodeId, NodeKind};

/// A node and edge bijection between two circuits, as `(a, b)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoWitness {
    pub nodes: Vec<(NodeId, NodeId)>,
    pub edges: Vec<(EdgeId, EdgeId)>,
}

#[derive(Clone)]
struct State {
    node: Vec<Option<NodeId>>,
    node_back: Vec<Option<NodeId>>,
    edge: Vec<Option<EdgeId>>,
    edge_back: Vec<Option<EdgeId>>,
}

struct Search<'a> {
    a: &'a Circuit,
    b: &'a Circuit,
}

enum Pending {
    Node(NodeId, NodeId),
    Edge(EdgeId, EdgeId),
}

impl Search<'_> {
    /// Extends the map with a pair and everything it forces.
    fn propagate(&self, s: &mut State, first: Pending) -> bool {
        let (a, b) = (self.a, self.b);
        let mut stack = vec![first];
        while let Some(p) = stack.pop() {
            match p {
                Pending::Node(x, y) => {
                    match (s.node[x.index()], s.node_back[y.index()]) {
                        (Some(m), _) if m == y => continue,
                        (None, None) => {}
                        _ => return false,
                    }
                    if a.kind(x) != b.kind(y) {
                        return false;
                    }
                    let (ai, bi) = (a.incoming(x), b.incoming(y));
                    if ai.len() != bi.len() || a.outgoing(x).len() != b.outgoing(y).len() {
                        return false;
                    }
                    s.node[x.index()] = Some(y);
                    s.node_back[y.index()] = Some(x);
                    for (&e, &f) in ai.iter().zip(bi) {
                        stack.push(Pending::Edge(e, f));
                    }
                    // an input's fan-out is unordered and left to the search
                    if !matches!(a.kind(x), NodeKind::Input(_)) {
                        for (&e, &f) in a.outgoing(x).iter().zip(b.outgoing(y)) {
                            stack.push(Pending::Edge(e, f));
                        }
                    }
                }
                Pending::Edge(e, f) => {
                    match (s.edge[e.index()], s.edge_back[f.index()]) {
                        (Some(m), _) if m == f => continue,
                        (None, None) => {}
                        _ => return false,
                    }
                    if a.timeline(e) != b.timeline(f) {
                        return false;
                    }
                    // position in the target's ordered edge list must agree
                    let pos = |c: &Circuit, e: EdgeId| c.incoming(c.target(e)).iter().position(|&x| x == e);
                    let (ta, tb) = (a.target(e), b.target(f));
                    if a.is_gate(ta) && pos(a, e) != pos(b, f) {
                        return false;
                    }
                    let outpos = |c: &Circuit, e: EdgeId| c.outgoing(c.source(e)).iter().position(|&x| x == e);
                    let (sa, sb) = (a.source(e), b.source(f));
                    if a.is_gate(sa) && outpos(a, e) != outpos(b, f) {
                        return false;
                    }
                    s.edge[e.index()] = Some(f);
                    s.edge_back[f.index()] = Some(e);
                    stack.push(Pending::Node(sa, sb));
                    stack.push(Pending::Node(ta, tb));
                }
            }
        }
        true
    }

    fn solve(&self, s: State) -> Option<State> {
        let open = self
            .a
            .inputs()
            .iter()
            .enumerate()
            .find_map(|(i, &x)| self.a.outgoing(x).iter().find(|e| s.edge[e.index()].is_none()).map(|&e| (i, e)));
        let Some((i, e)) = open else {
            return Some(s);
        };
        let y = self.b.inputs()[i];
        for &f in self.b.outgoing(y) {
            if s.edge_back[f.index()].is_some() {
                continue;
            }
            let mut next = s.clone();
            if self.propagate(&mut next, Pending::Edge(e, f)) {
                if let Some(done) = self.solve(next) {
                    return Some(done);
                }
            }
        }
        None
    }
}

/// Searches for an isomorphism preserving node kinds, boundary ranks,
/// incidence, the order of each gate's edge lists, and timelines.
///
/// The boundary is pinned by rank, so the only real choices are how the
/// fan-out edges of each input correspond.
pub fn isomorphic(a: &Circuit, b: &Circuit) -> Option<IsoWitness> {
    if a.node_count() != b.node_count()
        || a.edge_count() != b.edge_count()
        || a.inputs().len() != b.inputs().len()
        || a.outputs().len() != b.outputs().len()
    {
        return None;
    }
    let mut s = State {
        node: vec![None; a.node_count()],
        node_back: vec![None; b.node_count()],
        edge: vec![None; a.edge_count()],
        edge_back: vec![None; b.edge_count()],
    };
    let search = Search { a, b };
    let boundary = a.inputs().iter().zip(b.inputs()).chain(a.outputs().iter().zip(b.outputs()));
    for (&x, &y) in boundary {
        if !search.propagate(&mut s, Pending::Node(x, y)) {
            return None;
        }
    }
    let s = search.solve(s)?;
    // every gate hangs off some input, so a complete edge map covers all nodes
    let nodes: Vec<_> =
        s.node.iter().enumerate().map(|(i, m)| m.map(|y| (NodeId::from_index(i), y))).collect::<Option<_>>()?;
    let edges: Vec<_> =
        s.edge.iter().enumerate().map(|(i, m)| m.map(|f| (EdgeId::from_index(i), f))).collect::<Option<_>>()?;
    Some(IsoWitness { nodes, edges })
}
