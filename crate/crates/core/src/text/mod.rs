//! The line-oriented `.circ` format.
//!
//! ```text
//! kind quantum
//! width 2
//! gate g1 lines 1
//!   op H
//! gate g2 lines 1,2
//!   op CNOT
//! ```
//!
//! In the balanced form each timeline threads through its gates in listing
//! order. The general form declares `inputs`/`outputs` and explicit
//! `wire <src> -> <dst>` lines with endpoints `in:<name>`, `out:<name>`,
//! `<gate>.arg[i]` and `<gate>.val[j]` (1-based).

mod parse;
mod write;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use parse::{parse, parse_bytes};
pub use write::serialize;

use crate::boolean::{attach_boolean, BooleanCircuit, BooleanError, BooleanFunction, GateSpec};
use crate::decomposition::linearize;
use crate::ir::{Circuit, NodeKind, RawCircuit, ValidationReport};
use crate::quantum::{attach_quantum, permutation_lift, ComplexMatrix, QuantumCircuit, QuantumError, UnitaryMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Syntactic,
    Boolean,
    Quantum,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Syntactic => "syntactic",
            Kind::Boolean => "boolean",
            Kind::Quantum => "quantum",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Header {
    Width(usize),
    Ports { inputs: Vec<String>, outputs: Vec<String> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Op(String),
    Table(Vec<(Vec<bool>, Vec<bool>)>),
    Matrix(ComplexMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateDecl {
    pub id: String,
    /// Timelines in the balanced form; empty in the general form.
    pub lines: Vec<usize>,
    pub payload: Option<Payload>,
    /// Source line of the declaration, 0 when built programmatically.
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Endpoint {
    Input(String),
    Output(String),
    Arg(String, usize),
    Val(String, usize),
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Input(n) => write!(f, "in:{n}"),
            Endpoint::Output(n) => write!(f, "out:{n}"),
            Endpoint::Arg(g, i) => write!(f, "{g}.arg[{i}]"),
            Endpoint::Val(g, j) => write!(f, "{g}.val[{j}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wire {
    pub source: Endpoint,
    pub target: Endpoint,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub kind: Kind,
    pub header: Header,
    pub gates: Vec<GateDecl>,
    pub wires: Vec<Wire>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagCode {
    Syntax,
    DuplicateId,
    UnknownId,
    UnknownBuiltin,
    BadMatrixShape,
    BadTable,
    BadPort,
    NoncoherentGateOrder,
}

impl DiagCode {
    pub fn code(self) -> &'static str {
        match self {
            DiagCode::Syntax => "SYNTAX",
            DiagCode::DuplicateId => "DUPLICATE_ID",
            DiagCode::UnknownId => "UNKNOWN_ID",
            DiagCode::UnknownBuiltin => "UNKNOWN_BUILTIN",
            DiagCode::BadMatrixShape => "BAD_MATRIX_SHAPE",
            DiagCode::BadTable => "BAD_TABLE",
            DiagCode::BadPort => "BAD_PORT",
            DiagCode::NoncoherentGateOrder => "NONCOHERENT_GATE_ORDER",
        }
    }
}

/// A positioned parse failure. Lines and columns are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub code: DiagCode,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.col, self.code.code(), self.message)
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum LoadError {
    #[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Parse(Vec<Diagnostic>),
    #[error(transparent)]
    Invalid(ValidationReport),
    #[error(transparent)]
    Boolean(BooleanError),
    #[error(transparent)]
    Quantum(QuantumError),
}

impl LoadError {
    pub fn code(&self) -> &'static str {
        match self {
            LoadError::Parse(d) => d.first().map_or("SYNTAX", |d| d.code.code()),
            LoadError::Invalid(r) => r.violations.first().map_or("INVALID", |v| v.code.code()),
            LoadError::Boolean(e) => e.code(),
            LoadError::Quantum(e) => e.code(),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TextError {
    #[error("`{0}` cannot be written as an identifier")]
    BadId(String),
}

impl TextError {
    pub fn code(&self) -> &'static str {
        match self {
            TextError::BadId(_) => "BAD_ID",
        }
    }
}

/// Identifiers: ASCII letters, digits, `_`, `-` and `.`.
pub fn is_valid_id(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

#[derive(Clone, Debug, PartialEq)]
pub enum LoadedCircuit {
    Syntactic(Circuit),
    Boolean(BooleanCircuit),
    Quantum(QuantumCircuit),
}

impl LoadedCircuit {
    pub fn base(&self) -> &Circuit {
        match self {
            LoadedCircuit::Syntactic(c) => c,
            LoadedCircuit::Boolean(b) => b.base(),
            LoadedCircuit::Quantum(q) => q.base(),
        }
    }

    pub fn kind(&self) -> Kind {
        match self {
            LoadedCircuit::Syntactic(_) => Kind::Syntactic,
            LoadedCircuit::Boolean(_) => Kind::Boolean,
            LoadedCircuit::Quantum(_) => Kind::Quantum,
        }
    }
}

impl Document {
    /// The circuit described, with wiring resolved but payloads ignored.
    pub fn to_raw(&self) -> RawCircuit {
        let mut raw = RawCircuit::new();
        match &self.header {
            Header::Width(w) => {
                let w = *w;
                for t in 1..=w {
                    raw = raw.input(format!("in:{t}"), t).output(format!("out:{t}"), t);
                }
                let mut tips: Vec<(String, usize)> = (1..=w).map(|t| (format!("in:{t}"), 1)).collect();
                let mut timelines = BTreeMap::new();
                for g in &self.gates {
                    raw = raw.gate(g.id.clone());
                    let mut ins = Vec::new();
                    let mut outs = Vec::new();
                    for &t in &g.lines {
                        let Some((tip, k)) = t.checked_sub(1).and_then(|i| tips.get_mut(i)) else {
                            // dangling edge; validation reports it
                            raw = raw.edge(format!("e:{t}.bad.{}", g.id), format!("in:{t}"), g.id.clone());
                            continue;
                        };
                        let e = format!("e:{t}.{k}");
                        raw = raw.edge(e.clone(), tip.clone(), g.id.clone());
                        timelines.insert(e.clone(), t);
                        ins.push(e);
                        *k += 1;
                        outs.push(format!("e:{t}.{k}"));
                        *tip = g.id.clone();
                    }
                    raw = raw.gate_order(g.id.clone(), ins, outs);
                }
                for (i, (tip, k)) in tips.into_iter().enumerate() {
                    let e = format!("e:{}.{k}", i + 1);
                    timelines.insert(e.clone(), i + 1);
                    raw = raw.edge(e, tip, format!("out:{}", i + 1));
                }
                raw.timelines = Some(timelines);
            }
            Header::Ports { inputs, outputs } => {
                for (i, n) in inputs.iter().enumerate() {
                    raw = raw.input(n.clone(), i + 1);
                }
                for (i, n) in outputs.iter().enumerate() {
                    raw = raw.output(n.clone(), i + 1);
                }
                let mut ins: BTreeMap<&str, BTreeMap<usize, String>> = BTreeMap::new();
                let mut outs: BTreeMap<&str, BTreeMap<usize, String>> = BTreeMap::new();
                for g in &self.gates {
                    raw = raw.gate(g.id.clone());
                    ins.insert(&g.id, BTreeMap::new());
                    outs.insert(&g.id, BTreeMap::new());
                }
                for (n, w) in self.wires.iter().enumerate() {
                    let id = format!("w{}", n + 1);
                    let source = match &w.source {
                        Endpoint::Input(x) => x.clone(),
                        Endpoint::Val(g, j) => {
                            if let Some(m) = outs.get_mut(g.as_str()) {
                                m.insert(*j, id.clone());
                            }
                            g.clone()
                        }
                        other => other.to_string(),
                    };
                    let target = match &w.target {
                        Endpoint::Output(y) => y.clone(),
                        Endpoint::Arg(g, i) => {
                            if let Some(m) = ins.get_mut(g.as_str()) {
                                m.insert(*i, id.clone());
                            }
                            g.clone()
                        }
                        other => other.to_string(),
                    };
                    raw = raw.edge(id, source, target);
                }
                for g in &self.gates {
                    let i: Vec<String> = ins[g.id.as_str()].values().cloned().collect();
                    let o: Vec<String> = outs[g.id.as_str()].values().cloned().collect();
                    raw = raw.gate_order(g.id.clone(), i, o);
                }
            }
        }
        raw
    }

    pub fn to_circuit(&self) -> Result<Circuit, ValidationReport> {
        self.to_raw().build()
    }

    /// Builds the circuit and attaches the payloads its kind calls for.
    pub fn load(&self) -> Result<LoadedCircuit, LoadError> {
        let c = self.to_circuit().map_err(LoadError::Invalid)?;
        match self.kind {
            Kind::Syntactic => Ok(LoadedCircuit::Syntactic(c)),
            Kind::Boolean => {
                let mut specs = BTreeMap::new();
                for g in &self.gates {
                    let id = c.gate_id(&g.id).expect("declared gate exists");
                    let f = match &g.payload {
                        None => return Err(LoadError::Boolean(BooleanError::MissingSpec(g.id.clone()))),
                        Some(Payload::Op(name)) => BooleanFunction::builtin(name).ok_or_else(|| {
                            LoadError::Boolean(BooleanError::BadTable(format!("unknown builtin {name}")))
                        })?,
                        Some(Payload::Table(rows)) => BooleanFunction::from_rows(rows).map_err(LoadError::Boolean)?,
                        Some(Payload::Matrix(_)) => {
                            return Err(LoadError::Boolean(BooleanError::BadTable(
                                "matrix payload on a Boolean gate".into(),
                            )))
                        }
                    };
                    specs.insert(id, GateSpec::from(f));
                }
                attach_boolean(c, specs).map(LoadedCircuit::Boolean).map_err(LoadError::Boolean)
            }
            Kind::Quantum => {
                let mut specs = BTreeMap::new();
                for g in &self.gates {
                    let id = c.gate_id(&g.id).expect("declared gate exists");
                    let q = |e| LoadError::Quantum(e);
                    let m = match &g.payload {
                        None => return Err(q(QuantumError::MissingSpec(g.id.clone()))),
                        Some(Payload::Op(name)) => UnitaryMatrix::builtin(name)
                            .ok_or_else(|| q(QuantumError::UnknownBuiltin(name.clone())))?
                            .into_matrix(),
                        Some(Payload::Table(rows)) => {
                            let f = BooleanFunction::from_rows(rows)
                                .map_err(|e| q(QuantumError::BadMatrixShape(e.to_string())))?;
                            permutation_lift(&f).map_err(q)?.into_matrix()
                        }
                        Some(Payload::Matrix(m)) => m.clone(),
                    };
                    specs.insert(id, m);
                }
                attach_quantum(c, specs).map(LoadedCircuit::Quantum).map_err(LoadError::Quantum)
            }
        }
    }
}

/// Parses and loads in one step.
pub fn load(text: &str) -> Result<LoadedCircuit, LoadError> {
    parse(text).map_err(LoadError::Parse)?.load()
}

fn check_ids(c: &Circuit, general: bool) -> Result<(), TextError> {
    for n in c.nodes() {
        let name = c.node_name(n);
        if (general || c.is_gate(n)) && !is_valid_id(name) {
            return Err(TextError::BadId(name.to_string()));
        }
    }
    Ok(())
}

type PortMap<'a> = &'a dyn Fn(crate::ir::NodeId) -> (Vec<crate::ir::EdgeId>, Vec<crate::ir::EdgeId>);

fn document_of(
    c: &Circuit,
    kind: Kind,
    payload: impl Fn(crate::ir::NodeId) -> Option<Payload>,
    ports: Option<PortMap<'_>>,
) -> Result<Document, TextError> {
    let balanced = c.has_timelines();
    check_ids(c, !balanced)?;
    let order = linearize(c).0;
    let gates = order
        .iter()
        .map(|&g| GateDecl {
            id: c.node_name(g).to_string(),
            lines: if balanced { c.active_timelines(g).expect("balanced") } else { Vec::new() },
            payload: payload(g),
            line: 0,
        })
        .collect();
    if balanced {
        let header = Header::Width(c.width().expect("balanced"));
        return Ok(Document { kind, header, gates, wires: Vec::new() });
    }
    let ports_of = |g| match ports {
        Some(f) => f(g),
        None => (c.incoming(g).to_vec(), c.outgoing(g).to_vec()),
    };
    let source_of = |e| {
        let s = c.source(e);
        match c.kind(s) {
            NodeKind::Input(_) => Endpoint::Input(c.node_name(s).to_string()),
            _ => {
                let j = ports_of(s).1.iter().position(|&x| x == e).expect("edge is a value edge");
                Endpoint::Val(c.node_name(s).to_string(), j + 1)
            }
        }
    };
    let mut wires = Vec::new();
    for &g in &order {
        for (i, &e) in ports_of(g).0.iter().enumerate() {
            wires.push(Wire {
                source: source_of(e),
                target: Endpoint::Arg(c.node_name(g).to_string(), i + 1),
                line: 0,
            });
        }
    }
    for &y in c.outputs() {
        let e = c.incoming(y)[0];
        wires.push(Wire { source: source_of(e), target: Endpoint::Output(c.node_name(y).to_string()), line: 0 });
    }
    let header = Header::Ports {
        inputs: c.inputs().iter().map(|&n| c.node_name(n).to_string()).collect(),
        outputs: c.outputs().iter().map(|&n| c.node_name(n).to_string()).collect(),
    };
    Ok(Document { kind, header, gates, wires })
}

/// A document for a syntactic circuit, gates in the deterministic
/// linearization order.
pub fn from_circuit(c: &Circuit) -> Result<Document, TextError> {
    document_of(c, Kind::Syntactic, |_| None, None)
}

pub fn from_boolean(b: &BooleanCircuit) -> Result<Document, TextError> {
    let table = |g| Some(Payload::Table(b.function(g).rows().collect()));
    let ports = |g| (b.arg_edges(g).to_vec(), b.val_edges(g).to_vec());
    document_of(b.base(), Kind::Boolean, table, Some(&ports))
}

pub fn from_quantum(q: &QuantumCircuit) -> Result<Document, TextError> {
    document_of(q.base(), Kind::Quantum, |g| Some(Payload::Matrix(q.matrix(g).matrix().clone())), None)
}

pub fn from_loaded(l: &LoadedCircuit) -> Result<Document, TextError> {
    match l {
        LoadedCircuit::Syntactic(c) => from_circuit(c),
        LoadedCircuit::Boolean(b) => from_boolean(b),
        LoadedCircuit::Quantum(q) => from_quantum(q),
    }
}
