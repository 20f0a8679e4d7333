use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use circuitum::boolean::{
    decompose_boolean, format_word, index_to_word, is_reversible_circuit, parse_word, run_schedule, slice_boolean,
    valuate, BooleanCircuit, ReversibilityMethod,
};
use circuitum::decomposition::{
    decompose, isomorphic, layer_eager, layer_lazy, linearize, random_antichain_partition, slice, CoherentPartition,
    GateSet,
};
use circuitum::ir::{Circuit, NodeId};
use circuitum::order::{inversion_distance, transposition_path, LinearOrder, Poset};
use circuitum::quantum::{decompose_quantum, simulate, slice_quantum, QuantumCircuit, StateVector};
use circuitum::text::{self, from_loaded, parse_bytes, serialize, Diagnostic, LoadedCircuit};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::CliError;

/// Simulation width cap unless `CIRCUITUM_WIDTH_CAP` says otherwise.
pub const CLI_WIDTH_CAP: usize = 20;

pub struct Output {
    pub text: String,
    pub json: Value,
    /// Nonzero for a completed command with a negative verdict.
    pub exit: i32,
    pub warnings: Vec<String>,
}

impl Output {
    fn ok(text: String, json: Value) -> Self {
        Output { text, json, exit: 0, warnings: Vec::new() }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::domain("IO", format!("{}: {e}", path.display())))
}

fn diagnostics(path: &Path, diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{}:{d}", path.display())).collect::<Vec<_>>().join("\n")
}

fn load(path: &Path) -> Result<LoadedCircuit, CliError> {
    let doc = parse_bytes(&read(path)?).map_err(|d| CliError::domain(d[0].code.code(), diagnostics(path, &d)))?;
    Ok(doc.load()?)
}

fn names(c: &Circuit, gates: &[NodeId]) -> Vec<String> {
    gates.iter().map(|&g| c.node_name(g).to_string()).collect()
}

fn blocks_json(c: &Circuit, p: &CoherentPartition) -> Value {
    json!(p.blocks().iter().map(|b| names(c, b)).collect::<Vec<_>>())
}

fn parse_list(s: &str, what: &str) -> Result<Vec<String>, CliError> {
    let items: Vec<String> = s.split(',').map(|x| x.trim().to_string()).collect();
    if items.iter().any(String::is_empty) {
        return Err(CliError::usage(format!("{what} must be a comma-separated list without empty items")));
    }
    Ok(items)
}

fn parse_partition(s: &str) -> Result<Vec<Vec<String>>, CliError> {
    s.split('|').map(|b| parse_list(b, "every block of the partition")).collect()
}

fn gate_ids(c: &Circuit, names: &[String]) -> Result<Vec<NodeId>, CliError> {
    names.iter().map(|n| c.gate_id(n).map_err(CliError::from)).collect()
}

/// `eager`, `lazy`, `linear`, or an explicit partition such as `G1,G2|G3`.
pub fn resolve_schedule(c: &Circuit, spec: &str) -> Result<CoherentPartition, CliError> {
    match spec {
        "eager" => Ok(layer_eager(c)),
        "lazy" => Ok(layer_lazy(c)),
        "linear" => Ok(CoherentPartition::from_linearization(c, &linearize(c))?),
        _ => {
            let blocks = parse_partition(spec)?;
            for b in &blocks {
                gate_ids(c, b)?;
            }
            Ok(CoherentPartition::from_names(c, &blocks)?)
        }
    }
}

fn kind_error(expected: &str, got: &LoadedCircuit) -> CliError {
    CliError::domain("WRONG_KIND", format!("expected a {expected} circuit, file declares kind {}", got.kind().name()))
}

pub fn validate(path: &Path) -> Result<Output, CliError> {
    let bytes = read(path)?;
    let doc = match parse_bytes(&bytes) {
        Ok(d) => d,
        Err(diags) => {
            let list: Vec<Value> = diags
                .iter()
                .map(|d| json!({"code": d.code.code(), "line": d.line, "col": d.col, "message": d.message}))
                .collect();
            return Ok(Output {
                text: diagnostics(path, &diags) + "\n",
                json: json!({"valid": false, "violations": list}),
                exit: 1,
                warnings: Vec::new(),
            });
        }
    };
    match doc.load() {
        Ok(l) => Ok(Output::ok("valid\n".into(), json!({"valid": true, "kind": l.kind().name()}))),
        Err(text::LoadError::Invalid(report)) => {
            let mut out = String::new();
            let mut list = Vec::new();
            for v in &report.violations {
                writeln!(out, "{v}").unwrap();
                list.push(json!({"code": v.code.code(), "nodes": v.nodes, "edges": v.edges, "message": v.message}));
            }
            Ok(Output { text: out, json: json!({"valid": false, "violations": list}), exit: 1, warnings: Vec::new() })
        }
        Err(e) => {
            let text = format!("{}: {}\n", e.code(), e);
            let json = json!({"valid": false, "violations": [{"code": e.code(), "message": e.to_string()}]});
            Ok(Output { text, json, exit: 1, warnings: Vec::new() })
        }
    }
}

pub fn info(path: &Path) -> Result<Output, CliError> {
    let l = load(path)?;
    let c = l.base();
    let balanced = c.is_balanced();
    let order = linearize(c).0;
    let mut text = String::new();
    writeln!(text, "kind: {}", l.kind().name()).unwrap();
    writeln!(text, "balanced: {}", if balanced { "yes" } else { "no" }).unwrap();
    let mut json = json!({
        "kind": l.kind().name(),
        "balanced": balanced,
        "depth": c.depth(),
        "gates": c.gate_count(),
    });
    if balanced {
        let w = c.width()?;
        writeln!(text, "width: {w}").unwrap();
        json["width"] = json!(w);
    } else {
        writeln!(text, "inputs: {}", c.inputs().len()).unwrap();
        writeln!(text, "outputs: {}", c.outputs().len()).unwrap();
        json["inputs"] = json!(c.inputs().len());
        json["outputs"] = json!(c.outputs().len());
    }
    writeln!(text, "depth: {}", c.depth()).unwrap();
    writeln!(text, "gates: {}", c.gate_count()).unwrap();
    let mut rows = Vec::new();
    for &g in &order {
        let name = c.node_name(g);
        if balanced {
            let lines = c.active_timelines(g)?;
            let shown: Vec<String> = lines.iter().map(|t| t.to_string()).collect();
            writeln!(text, "  {name} lines {}", shown.join(",")).unwrap();
            rows.push(json!({"gate": name, "lines": lines}));
        } else {
            let (k, l) = (c.incoming(g).len(), c.outgoing(g).len());
            writeln!(text, "  {name} in {k} out {l}").unwrap();
            rows.push(json!({"gate": name, "in": k, "out": l}));
        }
    }
    json["timeline_table"] = json!(rows);
    Ok(Output::ok(text, json))
}

pub fn schedule(path: &Path, strategy: &str) -> Result<Output, CliError> {
    let l = load(path)?;
    let c = l.base();
    let p = resolve_schedule(c, strategy)?;
    let text = format!("{}\n", p.display(c));
    Ok(Output::ok(text, json!({"strategy": strategy, "steps": p.len(), "blocks": blocks_json(c, &p)})))
}

fn sliced(l: &LoadedCircuit, x: &GateSet) -> Result<LoadedCircuit, CliError> {
    Ok(match l {
        LoadedCircuit::Syntactic(c) => LoadedCircuit::Syntactic(slice(c, x)?),
        LoadedCircuit::Boolean(b) => LoadedCircuit::Boolean(slice_boolean(b, x)?),
        LoadedCircuit::Quantum(q) => LoadedCircuit::Quantum(slice_quantum(q, x)?),
    })
}

pub fn slice_cmd(path: &Path, gates: &str) -> Result<Output, CliError> {
    let l = load(path)?;
    let names = if gates.trim().is_empty() { Vec::new() } else { parse_list(gates, "--gates")? };
    let x: GateSet = gate_ids(l.base(), &names)?.into_iter().collect();
    let text = serialize(&from_loaded(&sliced(&l, &x)?)?);
    Ok(Output::ok(text.clone(), json!({"circuit": text})))
}

pub fn decompose_cmd(path: &Path, partition: &str, out_dir: Option<&Path>) -> Result<Output, CliError> {
    let l = load(path)?;
    let c = l.base();
    let blocks = parse_partition(partition)?.iter().map(|b| gate_ids(c, b)).collect::<Result<Vec<_>, _>>()?;
    let parts: Vec<LoadedCircuit> = match &l {
        LoadedCircuit::Syntactic(c) => decompose(c, &blocks)?.into_iter().map(LoadedCircuit::Syntactic).collect(),
        LoadedCircuit::Boolean(b) => decompose_boolean(b, &blocks)?.into_iter().map(LoadedCircuit::Boolean).collect(),
        LoadedCircuit::Quantum(q) => decompose_quantum(q, &blocks)?.into_iter().map(LoadedCircuit::Quantum).collect(),
    };
    let texts: Vec<String> = parts.iter().map(|p| Ok(serialize(&from_loaded(p)?))).collect::<Result<_, CliError>>()?;
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::domain("IO", format!("{}: {e}", dir.display())))?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("circuit");
            let mut files = Vec::new();
            for (i, t) in texts.iter().enumerate() {
                let f: PathBuf = dir.join(format!("{stem}.part{}.circ", i + 1));
                fs::write(&f, t).map_err(|e| CliError::domain("IO", format!("{}: {e}", f.display())))?;
                files.push(f.display().to_string());
            }
            let text = files.iter().map(|f| format!("{f}\n")).collect();
            Ok(Output::ok(text, json!({"files": files})))
        }
        None => {
            let mut text = String::new();
            for (i, t) in texts.iter().enumerate() {
                writeln!(text, "# part {}", i + 1).unwrap();
                text.push_str(t);
            }
            Ok(Output::ok(text, json!({"parts": texts})))
        }
    }
}

pub fn isomorphic_cmd(a: &Path, b: &Path) -> Result<Output, CliError> {
    let (la, lb) = (load(a)?, load(b)?);
    let (ca, cb) = (la.base(), lb.base());
    let Some(w) = isomorphic(ca, cb) else {
        return Err(CliError::domain("NOT_ISOMORPHIC", "no isomorphism exists"));
    };
    let mut text = String::new();
    let mut nodes = Vec::new();
    for &(x, y) in &w.nodes {
        writeln!(text, "node {} -> {}", ca.node_name(x), cb.node_name(y)).unwrap();
        nodes.push(json!([ca.node_name(x), cb.node_name(y)]));
    }
    let mut edges = Vec::new();
    for &(e, f) in &w.edges {
        writeln!(text, "edge {} -> {}", ca.edge_name(e), cb.edge_name(f)).unwrap();
        edges.push(json!([ca.edge_name(e), cb.edge_name(f)]));
    }
    Ok(Output::ok(text, json!({"isomorphic": true, "nodes": nodes, "edges": edges})))
}

fn boolean_of(l: LoadedCircuit) -> Result<BooleanCircuit, CliError> {
    match l {
        LoadedCircuit::Boolean(b) => Ok(b),
        other => Err(kind_error("boolean", &other)),
    }
}

pub fn eval(path: &Path, input: &str, schedule: Option<&str>, trace: bool) -> Result<Output, CliError> {
    let b = boolean_of(load(path)?)?;
    let word = parse_word(input)?;
    let c = b.base();
    let p = resolve_schedule(c, schedule.unwrap_or("eager"))?;
    let t = run_schedule(&b, &word, &p)?;
    let out = format_word(&t.output);
    let mut text = format!("{out}\n");
    let mut json = json!({"input": input, "output": out});
    if trace || schedule.is_some() {
        let steps: Vec<Vec<String>> = t.steps.iter().map(|s| names(c, s)).collect();
        json["steps"] = json!(steps);
        if trace {
            for (i, s) in steps.iter().enumerate() {
                writeln!(text, "step {}: {}", i + 1, s.join(",")).unwrap();
            }
            let mut edges = serde_json::Map::new();
            for e in c.edges() {
                let bit = t.valuation.get(e) as u8;
                writeln!(text, "  {} = {bit}", c.edge_name(e)).unwrap();
                edges.insert(c.edge_name(e).to_string(), json!(bit));
            }
            json["valuation"] = Value::Object(edges);
        }
    }
    Ok(Output::ok(text, json))
}

pub fn check_reversible(path: &Path, method: ReversibilityMethod, cap: usize) -> Result<Output, CliError> {
    let b = boolean_of(load(path)?)?;
    let verdict = is_reversible_circuit(&b, method, cap)?;
    let word = if verdict { "reversible" } else { "irreversible" };
    Ok(Output::ok(format!("{word}\n"), json!({"reversible": verdict})))
}

/// The width cap from the environment, or the default.
pub fn width_cap() -> Result<usize, CliError> {
    match std::env::var("CIRCUITUM_WIDTH_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("CIRCUITUM_WIDTH_CAP must be a positive integer, got `{v}`"))),
        Err(_) => Ok(CLI_WIDTH_CAP),
    }
}

fn quantum_of(l: LoadedCircuit) -> Result<QuantumCircuit, CliError> {
    match l {
        LoadedCircuit::Quantum(q) => Ok(q),
        LoadedCircuit::Boolean(b) => Ok(QuantumCircuit::from_boolean(&b)?),
        other => Err(kind_error("quantum", &other)),
    }
}

fn input_state(spec: Option<&str>, width: usize, warnings: &mut Vec<String>) -> Result<StateVector, CliError> {
    let s = match spec {
        None => StateVector::basis(width, 0)?,
        Some(label) if label.trim_start().starts_with('|') => StateVector::from_label(label)?,
        Some(file) => {
            let bytes = read(Path::new(file))?;
            let text = String::from_utf8(bytes)
                .map_err(|_| CliError::domain("BAD_STATE", format!("{file}: invalid UTF-8")))?;
            StateVector::parse_lines(width, &text)?
        }
    };
    if !s.is_normalized() {
        warnings.push(format!("input state has squared norm {:.16e}, not 1", s.norm_sqr()));
    }
    Ok(s)
}

fn state_json(s: &StateVector) -> Value {
    let amps: Vec<Value> = s
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.re != 0.0 || z.im != 0.0)
        .map(|(i, z)| json!({"index": i, "label": s.label(i), "re": z.re, "im": z.im}))
        .collect();
    json!(amps)
}

fn check_cap(width: usize) -> Result<(), CliError> {
    let cap = width_cap()?;
    if width > cap {
        return Err(CliError::domain("WIDTH_TOO_LARGE", format!("width {width} exceeds the simulation cap {cap}")));
    }
    Ok(())
}

pub fn simulate_cmd(path: &Path, input: Option<&str>, schedule: Option<&str>, trace: bool) -> Result<Output, CliError> {
    let q = quantum_of(load(path)?)?;
    check_cap(q.width())?;
    let mut warnings = Vec::new();
    let psi = input_state(input, q.width(), &mut warnings)?;
    let p = resolve_schedule(q.base(), schedule.unwrap_or("eager"))?;
    let states = simulate(&q, &psi, &p)?;
    let last = states.last().expect("trajectory is nonempty");
    let mut text = String::new();
    let mut json = json!({"width": q.width(), "steps": p.len(), "final": state_json(last)});
    if trace {
        for (t, s) in states.iter().enumerate() {
            writeln!(text, "# step {t}").unwrap();
            text.push_str(&s.to_lines());
        }
        json["trajectory"] = json!(states.iter().map(state_json).collect::<Vec<_>>());
    } else {
        text.push_str(&last.to_lines());
    }
    Ok(Output { text, json, exit: 0, warnings })
}

pub fn equiv_orders(path: &Path, input: Option<&str>, trials: usize, seed: u64, tol: f64) -> Result<Output, CliError> {
    let l = load(path)?;
    let c = l.base().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut schedules = vec![
        ("eager".to_string(), layer_eager(&c)),
        ("lazy".to_string(), layer_lazy(&c)),
        ("linear".to_string(), CoherentPartition::from_linearization(&c, &linearize(&c))?),
    ];
    for i in 0..trials {
        schedules.push((format!("random{}", i + 1), random_antichain_partition(&c, &mut rng)));
    }
    let mut warnings = Vec::new();
    let (max_dev, disagreeing) = match l {
        LoadedCircuit::Boolean(b) => {
            let m = c.inputs().len();
            let words: Vec<Vec<bool>> = match input {
                Some(w) => vec![parse_word(w)?],
                None if m <= 12 => (0..1usize << m).map(|i| index_to_word(i, m)).collect(),
                None => vec![vec![false; m]],
            };
            let mut bad = Vec::new();
            for w in &words {
                let reference = valuate(&b, w)?;
                for (name, p) in &schedules {
                    if run_schedule(&b, w, p)?.valuation != reference {
                        bad.push(format!("{name} on {}", format_word(w)));
                    }
                }
            }
            (if bad.is_empty() { 0.0 } else { 1.0 }, bad)
        }
        other => {
            let q = quantum_of(other)?;
            check_cap(q.width())?;
            let psi = input_state(input, q.width(), &mut warnings)?;
            let reference = simulate(&q, &psi, &schedules[0].1)?.pop().expect("nonempty");
            let mut max_dev: f64 = 0.0;
            let mut bad = Vec::new();
            for (name, p) in &schedules[1..] {
                let out = simulate(&q, &psi, p)?.pop().expect("nonempty");
                let d = reference.max_deviation(&out)?;
                max_dev = max_dev.max(d);
                if d > tol {
                    bad.push(name.clone());
                }
            }
            (max_dev, bad)
        }
    };
    let agree = disagreeing.is_empty();
    let mut text = String::new();
    writeln!(text, "schedules: {}", schedules.len()).unwrap();
    writeln!(text, "max deviation: {max_dev:e}").unwrap();
    writeln!(text, "agree: {}", if agree { "yes" } else { "no" }).unwrap();
    for d in &disagreeing {
        writeln!(text, "disagrees: {d}").unwrap();
    }
    let json = json!({
        "schedules": schedules.len(),
        "seed": seed,
        "max_deviation": max_dev,
        "tolerance": tol,
        "agree": agree,
        "disagreeing": disagreeing,
    });
    Ok(Output { text, json, exit: if agree { 0 } else { 1 }, warnings })
}

/// Poset files: one `elements a b c` line, then `a < b` lines; the
/// transitive closure is taken.
pub fn parse_poset(text: &str) -> Result<Poset<String>, CliError> {
    let mut elements: Option<Vec<String>> = None;
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["elements", rest @ ..] if elements.is_none() => {
                elements = Some(rest.iter().map(|s| s.to_string()).collect())
            }
            [a, "<", b] => pairs.push((a.to_string(), b.to_string())),
            _ => {
                return Err(CliError::domain(
                    "SYNTAX",
                    format!("poset line {}: expected `elements ...` once, then `a < b` lines", n + 1),
                ))
            }
        }
    }
    let elements = elements.ok_or_else(|| CliError::domain("SYNTAX", "poset file has no `elements` line"))?;
    Ok(Poset::new(elements, pairs, true)?)
}

pub fn transpose_path(poset: &Path, from: &str, to: &str) -> Result<Output, CliError> {
    let bytes = read(poset)?;
    let text = String::from_utf8(bytes).map_err(|_| CliError::domain("SYNTAX", "poset file is not UTF-8"))?;
    let p = parse_poset(&text)?;
    let from = LinearOrder(parse_list(from, "--from")?);
    let to = LinearOrder(parse_list(to, "--to")?);
    let path = transposition_path(&p, &from, &to)?;
    let distance = inversion_distance(&from, &to)?;
    let orders = path.orders();
    let mut out = String::new();
    writeln!(out, "swaps: {}", path.len()).unwrap();
    writeln!(out, "{}", orders[0].0.join(",")).unwrap();
    for (s, o) in path.swaps.iter().zip(&orders[1..]) {
        writeln!(out, "{s} {}", o.0.join(",")).unwrap();
    }
    let json = json!({
        "distance": distance,
        "swaps": path.swaps,
        "orders": orders.iter().map(|o| o.0.clone()).collect::<Vec<_>>(),
    });
    Ok(Output::ok(out, json))
}
