use std::fmt::Write;

use super::{Document, Endpoint, Header, Payload, Wire};
use crate::boolean::{format_word, word_to_index};
use crate::decomposition::linearize;
use crate::ir::{Circuit, NodeKind};

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Wires in canonical order: each gate's arguments in gate order, then the
/// outputs by rank.
fn canonical_wires(d: &Document, c: &Circuit, order: &[&str]) -> Vec<Wire> {
    let find = |pred: &dyn Fn(&Endpoint) -> bool| d.wires.iter().find(|w| pred(&w.target)).cloned();
    let mut out = Vec::with_capacity(d.wires.len());
    for g in order {
        let k = c.gate_id(g).map(|id| c.incoming(id).len()).unwrap_or(0);
        for i in 1..=k {
            out.extend(find(&|t| matches!(t, Endpoint::Arg(h, j) if h == g && *j == i)));
        }
    }
    for &y in c.outputs() {
        let name = c.node_name(y);
        out.extend(find(&|t| matches!(t, Endpoint::Output(o) if o == name)));
    }
    if out.len() == d.wires.len() {
        out
    } else {
        d.wires.clone()
    }
}

/// Canonical text. When the document describes a valid circuit, gates are
/// listed in the deterministic linearization order; table rows are always
/// sorted by input word and reals carry 17 significant digits.
pub fn serialize(d: &Document) -> String {
    let circuit = d.to_circuit().ok();
    let mut gates: Vec<_> = d.gates.iter().collect();
    let mut wires = d.wires.clone();
    if let Some(c) = &circuit {
        let order: Vec<&str> =
            linearize(c).0.iter().filter(|&&g| matches!(c.kind(g), NodeKind::Gate)).map(|&g| c.node_name(g)).collect();
        gates.sort_by_key(|g| order.iter().position(|&n| n == g.id));
        if matches!(d.header, Header::Ports { .. }) {
            wires = canonical_wires(d, c, &order);
        }
    }

    let mut s = String::new();
    writeln!(s, "kind {}", d.kind.name()).unwrap();
    match &d.header {
        Header::Width(w) => writeln!(s, "width {w}").unwrap(),
        Header::Ports { inputs, outputs } => {
            writeln!(s, "inputs {}", inputs.join(" ")).unwrap();
            writeln!(s, "outputs {}", outputs.join(" ")).unwrap();
        }
    }
    for g in gates {
        if g.lines.is_empty() && matches!(d.header, Header::Ports { .. }) {
            writeln!(s, "gate {}", g.id).unwrap();
        } else {
            let lines: Vec<String> = g.lines.iter().map(|t| t.to_string()).collect();
            writeln!(s, "gate {} lines {}", g.id, lines.join(",")).unwrap();
        }
        match &g.payload {
            None => {}
            Some(Payload::Op(name)) => writeln!(s, "  op {name}").unwrap(),
            Some(Payload::Table(rows)) => {
                let mut rows = rows.clone();
                rows.sort_by_key(|(x, _)| word_to_index(x));
                let cells: Vec<String> =
                    rows.iter().map(|(x, y)| format!("{}->{}", format_word(x), format_word(y))).collect();
                writeln!(s, "  table {}", cells.join(" ")).unwrap();
            }
            Some(Payload::Matrix(m)) => {
                writeln!(s, "  matrix {}", m.dim()).unwrap();
                for i in 0..m.dim() {
                    let cells: Vec<String> =
                        m.row(i).iter().map(|z| format!("{},{}", real(z.re), real(z.im))).collect();
                    writeln!(s, "    {}", cells.join(" ")).unwrap();
                }
            }
        }
    }
    for w in wires {
        writeln!(s, "wire {} -> {}", w.source, w.target).unwrap();
    }
    s
}
