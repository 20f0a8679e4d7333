use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use super::{is_valid_id, DiagCode, Diagnostic, Document, Endpoint, GateDecl, Header, Kind, Payload, Wire};
use crate::boolean::{parse_word, BooleanFunction};
use crate::quantum::{ComplexMatrix, UnitaryMatrix};

/// Upper bounds that keep hostile input from allocating without limit.
const MAX_WIDTH: usize = 1 << 16;
const MAX_MATRIX_DIM: usize = 1 << 12;
const MAX_TABLE_ARITY: usize = 16;

struct Tok<'a> {
    col: usize,
    text: &'a str,
}

fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Tok { col: line[..s].chars().count() + 1, text: &line[s..i] });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Tok { col: line[..s].chars().count() + 1, text: &line[s..] });
    }
    out
}

struct PendingMatrix {
    gate: usize,
    dim: usize,
    rows: Vec<Vec<Complex64>>,
    line: usize,
    col: usize,
}

struct Parser {
    diags: Vec<Diagnostic>,
    kind: Option<Kind>,
    width: Option<usize>,
    inputs: Option<Vec<String>>,
    outputs: Option<Vec<String>>,
    gates: Vec<GateDecl>,
    /// Column of each gate's id, for later diagnostics.
    gate_cols: Vec<usize>,
    wires: Vec<(Wire, usize, usize)>,
    matrix: Option<PendingMatrix>,
}

impl Parser {
    fn diag(&mut self, line: usize, col: usize, code: DiagCode, message: impl Into<String>) {
        self.diags.push(Diagnostic { line, col, code, message: message.into() });
    }

    fn header_done(&self) -> bool {
        self.width.is_some() || (self.inputs.is_some() && self.outputs.is_some())
    }

    fn general(&self) -> bool {
        self.width.is_none()
    }

    fn line(&mut self, n: usize, toks: &[Tok<'_>]) {
        if self.matrix.is_some() {
            self.matrix_row(n, toks);
            return;
        }
        let head = &toks[0];
        if self.kind.is_none() && head.text != "kind" {
            self.diag(n, head.col, DiagCode::Syntax, "document must start with `kind <syntactic|boolean|quantum>`");
            // keep going with a neutral kind so later lines are still checked
            self.kind = Some(Kind::Syntactic);
        }
        match head.text {
            "kind" => self.kind_line(n, toks),
            "width" => self.width_line(n, toks),
            "inputs" | "outputs" => self.ports_line(n, toks),
            "gate" => self.gate_line(n, toks),
            "op" | "table" | "matrix" => self.payload_line(n, toks),
            "wire" => self.wire_line(n, toks),
            other => {
                let msg = format!("unknown directive `{other}`");
                self.diag(n, head.col, DiagCode::Syntax, msg)
            }
        }
    }

    fn kind_line(&mut self, n: usize, toks: &[Tok<'_>]) {
        if self.kind.is_some() {
            return self.diag(n, toks[0].col, DiagCode::Syntax, "`kind` given twice");
        }
        let kind = match toks {
            [_, k] => match k.text {
                "syntactic" => Some(Kind::Syntactic),
                "boolean" => Some(Kind::Boolean),
                "quantum" => Some(Kind::Quantum),
                _ => None,
            },
            _ => None,
        };
        match kind {
            Some(k) => self.kind = Some(k),
            None => {
                let col = toks.get(1).map_or(toks[0].col, |t| t.col);
                self.diag(n, col, DiagCode::Syntax, "expected `kind syntactic|boolean|quantum`");
                self.kind = Some(Kind::Syntactic);
            }
        }
    }

    fn width_line(&mut self, n: usize, toks: &[Tok<'_>]) {
        if self.width.is_some() || self.inputs.is_some() || self.outputs.is_some() {
            return self.diag(n, toks[0].col, DiagCode::Syntax, "header given twice");
        }
        if !self.gates.is_empty() {
            return self.diag(n, toks[0].col, DiagCode::Syntax, "header must precede gates");
        }
        match toks {
            [_, w] => match w.text.parse::<usize>() {
                Ok(v) if v <= MAX_WIDTH => self.width = Some(v),
                _ => self.diag(n, w.col, DiagCode::Syntax, format!("width must be an integer in 0..={MAX_WIDTH}")),
            },
            _ => self.diag(n, toks[0].col, DiagCode::Syntax, "expected `width <w>`"),
        }
    }

    fn ports_line(&mut self, n: usize, toks: &[Tok<'_>]) {
        let is_inputs = toks[0].text == "inputs";
        let slot_taken = if is_inputs { self.inputs.is_some() } else { self.outputs.is_some() };
        if self.width.is_some() || slot_taken {
            return self.diag(n, toks[0].col, DiagCode::Syntax, "header given twice");
        }
        if !self.gates.is_empty() {
            return self.diag(n, toks[0].col, DiagCode::Syntax, "header must precede gates");
        }
        let mut names = Vec::new();
        let mut seen = BTreeSet::new();
        for t in &toks[1..] {
            if !is_valid_id(t.text) {
                self.diag(n, t.col, DiagCode::Syntax, format!("`{}` is not an identifier", t.text));
            } else if !seen.insert(t.text) {
                self.diag(n, t.col, DiagCode::DuplicateId, format!("`{}` listed twice", t.text));
            }
            names.push(t.text.to_string());
        }
        let other = if is_inputs { &self.outputs } else { &self.inputs };
        let clashes: Vec<(usize, String)> = toks[1..]
            .iter()
            .filter(|t| other.iter().flatten().any(|o| o == t.text))
            .map(|t| (t.col, format!("`{}` is both an input and an output", t.text)))
            .collect();
        for (col, msg) in clashes {
            self.diag(n, col, DiagCode::DuplicateId, msg);
        }
        if is_inputs {
            self.inputs = Some(names);
        } else {
            self.outputs = Some(names);
        }
    }

    fn gate_line(&mut self, n: usize, toks: &[Tok<'_>]) {
        if !self.header_done() {
            return self.diag(n, toks[0].col, DiagCode::Syntax, "gate before `width` or `inputs`/`outputs`");
        }
        let Some(id) = toks.get(1) else {
            return self.diag(n, toks[0].col, DiagCode::Syntax, "expected `gate <id>`");
        };
        if !is_valid_id(id.text) {
            return self.diag(n, id.col, DiagCode::Syntax, format!("`{}` is not an identifier", id.text));
        }
        let mut lines = Vec::new();
        match (self.width, &toks[2..]) {
            (Some(w), [kw, list]) if kw.text == "lines" => {
                for part in list.text.split(',') {
                    match part.parse::<usize>() {
                        Ok(t) if (1..=w).contains(&t) => {
                            if lines.last().is_some_and(|&p| p >= t) {
                                return self.diag(
                                    n,
                                    list.col,
                                    DiagCode::Syntax,
                                    "timelines must be strictly ascending",
                                );
                            }
                            lines.push(t);
                        }
                        _ => {
                            return self.diag(
                                n,
                                list.col,
                                DiagCode::Syntax,
                                format!("timeline `{part}` not in 1..={w}"),
                            );
                        }
                    }
                }
            }
            (Some(_), _) => {
                let col = toks.get(2).map_or(id.col, |t| t.col);
                return self.diag(n, col, DiagCode::Syntax, "expected `gate <id> lines <t1,t2,...>`");
            }
            (None, []) => {}
            (None, [extra, ..]) => {
                return self.diag(n, extra.col, DiagCode::Syntax, "general-form gates take no timelines; use `wire`");
            }
        }
        self.gates.push(GateDecl { id: id.text.to_string(), lines, payload: None, line: n });
        self.gate_cols.push(id.col);
    }

    fn payload_line(&mut self, n: usize, toks: &[Tok<'_>]) {
        let head = &toks[0];
        let kind = self.kind.unwrap_or(Kind::Syntactic);
        let Some(gi) = self.gates.len().checked_sub(1) else {
            return self.diag(n, head.col, DiagCode::Syntax, format!("`{}` outside a gate", head.text));
        };
        if kind == Kind::Syntactic {
            return self.diag(n, head.col, DiagCode::Syntax, "payloads need kind boolean or quantum");
        }
        let existing = &self.gates[gi].payload;
        let appending_table = head.text == "table" && matches!(existing, Some(Payload::Table(_)));
        if existing.is_some() && !appending_table {
            return self.diag(n, head.col, DiagCode::Syntax, "gate already has a payload");
        }
        match head.text {
            "op" => {
                let [_, name] = toks else {
                    return self.diag(n, head.col, DiagCode::Syntax, "expected `op <name>`");
                };
                let known = match kind {
                    Kind::Quantum => UnitaryMatrix::builtin(name.text).is_some(),
                    _ => BooleanFunction::builtin(name.text).is_some(),
                };
                if !known {
                    let msg = format!("no {} builtin named `{}`", kind.name(), name.text);
                    return self.diag(n, name.col, DiagCode::UnknownBuiltin, msg);
                }
                self.gates[gi].payload = Some(Payload::Op(name.text.to_string()));
            }
            "table" => self.table_line(n, gi, toks),
            _ => {
                if kind != Kind::Quantum {
                    return self.diag(n, head.col, DiagCode::Syntax, "matrices need kind quantum");
                }
                let [_, d] = toks else {
                    return self.diag(n, head.col, DiagCode::Syntax, "expected `matrix <dim>`");
                };
                let dim = match d.text.parse::<usize>() {
                    Ok(v) => v,
                    Err(_) => return self.diag(n, d.col, DiagCode::Syntax, "matrix dimension must be an integer"),
                };
                if dim == 0 || !dim.is_power_of_two() || dim > MAX_MATRIX_DIM {
                    let msg = format!("dimension {dim} is not a power of two up to {MAX_MATRIX_DIM}");
                    return self.diag(n, d.col, DiagCode::BadMatrixShape, msg);
                }
                let arity = self.gates[gi].lines.len();
                if !self.general() && dim != 1 << arity {
                    let msg = format!("dimension {dim} does not match a gate on {arity} timelines");
                    return self.diag(n, d.col, DiagCode::BadMatrixShape, msg);
                }
                self.matrix = Some(PendingMatrix { gate: gi, dim, rows: Vec::new(), line: n, col: d.col });
            }
        }
    }

    fn table_line(&mut self, n: usize, gi: usize, toks: &[Tok<'_>]) {
        if toks.len() < 2 {
            return self.diag(n, toks[0].col, DiagCode::Syntax, "expected `table <in>-><out> ...`");
        }
        let mut rows = match self.gates[gi].payload.take() {
            Some(Payload::Table(rows)) => rows,
            _ => Vec::new(),
        };
        let mut ok = true;
        for t in &toks[1..] {
            let parsed = t.text.split_once("->").and_then(|(a, b)| Some((parse_word(a).ok()?, parse_word(b).ok()?)));
            let Some((x, y)) = parsed else {
                self.diag(n, t.col, DiagCode::Syntax, format!("`{}` is not a row like 01->10", t.text));
                ok = false;
                continue;
            };
            if x.len() > MAX_TABLE_ARITY || y.len() > MAX_TABLE_ARITY {
                self.diag(n, t.col, DiagCode::BadTable, format!("rows wider than {MAX_TABLE_ARITY} bits"));
                ok = false;
                continue;
            }
            if let Some((x0, y0)) = rows.first() {
                if x.len() != x0.len() || y.len() != y0.len() {
                    self.diag(n, t.col, DiagCode::BadTable, "row shape differs from the first row");
                    ok = false;
                    continue;
                }
            }
            if rows.iter().any(|(r, _)| *r == x) {
                self.diag(
                    n,
                    t.col,
                    DiagCode::BadTable,
                    format!("row for `{}` given twice", &t.text[..t.text.find("->").unwrap_or(0)]),
                );
                ok = false;
                continue;
            }
            rows.push((x, y));
        }
        if ok || !rows.is_empty() {
            self.gates[gi].payload = Some(Payload::Table(rows));
        }
    }

    fn matrix_row(&mut self, n: usize, toks: &[Tok<'_>]) {
        let m = self.matrix.as_mut().expect("pending matrix");
        let dim = m.dim;
        let mut row = Vec::with_capacity(dim);
        let mut errors = Vec::new();
        for t in toks {
            let parsed =
                t.text.split_once(',').and_then(|(re, im)| Some(Complex64::new(re.parse().ok()?, im.parse().ok()?)));
            match parsed {
                Some(z) if z.is_finite() => row.push(z),
                _ => errors.push((t.col, DiagCode::Syntax, format!("`{}` is not an `re,im` pair", t.text))),
            }
        }
        if errors.is_empty() && row.len() != dim {
            errors.push((
                toks[0].col,
                DiagCode::BadMatrixShape,
                format!("row has {} entries, expected {dim}", row.len()),
            ));
        }
        m.rows.push(row);
        if m.rows.len() == dim {
            let m = self.matrix.take().expect("pending matrix");
            if errors.is_empty() && m.rows.iter().all(|r| r.len() == dim) {
                let matrix = ComplexMatrix::from_rows(&m.rows).expect("shape checked");
                self.gates[m.gate].payload = Some(Payload::Matrix(matrix));
            }
        }
        for (col, code, msg) in errors {
            self.diag(n, col, code, msg);
        }
    }

    fn endpoint(&mut self, n: usize, t: &Tok<'_>) -> Option<Endpoint> {
        let s = t.text;
        let port = |rest: &str, tag: &str| -> Option<(String, usize)> {
            let (g, idx) = rest.rsplit_once(tag)?;
            let idx = idx.strip_suffix(']')?.parse::<usize>().ok()?;
            Some((g.to_string(), idx))
        };
        let e = if let Some(x) = s.strip_prefix("in:") {
            Some(Endpoint::Input(x.to_string()))
        } else if let Some(y) = s.strip_prefix("out:") {
            Some(Endpoint::Output(y.to_string()))
        } else if let Some((g, i)) = port(s, ".arg[") {
            Some(Endpoint::Arg(g, i))
        } else {
            port(s, ".val[").map(|(g, j)| Endpoint::Val(g, j))
        };
        let valid = match &e {
            Some(Endpoint::Input(x) | Endpoint::Output(x)) => is_valid_id(x),
            Some(Endpoint::Arg(g, i) | Endpoint::Val(g, i)) => is_valid_id(g) && *i >= 1,
            None => false,
        };
        if !valid {
            self.diag(
                n,
                t.col,
                DiagCode::Syntax,
                format!("`{s}` is not an endpoint (in:x, out:y, G.arg[i], G.val[j], 1-based)"),
            );
            return None;
        }
        e
    }

    fn wire_line(&mut self, n: usize, toks: &[Tok<'_>]) {
        if self.width.is_some() {
            return self.diag(
                n,
                toks[0].col,
                DiagCode::Syntax,
                "`wire` is only for the general form; balanced wiring is implied",
            );
        }
        if !self.header_done() {
            return self.diag(n, toks[0].col, DiagCode::Syntax, "wire before `inputs`/`outputs`");
        }
        let [_, src, arrow, dst] = toks else {
            return self.diag(n, toks[0].col, DiagCode::Syntax, "expected `wire <src> -> <dst>`");
        };
        if arrow.text != "->" {
            return self.diag(n, arrow.col, DiagCode::Syntax, "expected `->`");
        }
        let (Some(s), Some(d)) = (self.endpoint(n, src), self.endpoint(n, dst)) else {
            return;
        };
        if !matches!(s, Endpoint::Input(_) | Endpoint::Val(..)) {
            return self.diag(n, src.col, DiagCode::Syntax, "a wire starts at in:<name> or <gate>.val[j]");
        }
        if !matches!(d, Endpoint::Output(_) | Endpoint::Arg(..)) {
            return self.diag(n, dst.col, DiagCode::Syntax, "a wire ends at out:<name> or <gate>.arg[i]");
        }
        self.wires.push((Wire { source: s, target: d, line: n }, src.col, dst.col));
    }

    /// Identifier and port checks that need the whole document.
    fn finish(&mut self, last_line: usize) {
        if let Some(m) = self.matrix.take() {
            let msg = format!("matrix needs {} rows, found {}", m.dim, m.rows.len());
            self.diag(m.line, m.col, DiagCode::BadMatrixShape, msg);
        }
        if self.kind.is_none() {
            return self.diag(1, 1, DiagCode::Syntax, "empty document; expected `kind ...`");
        }
        if !self.header_done() {
            self.diag(last_line.max(1), 1, DiagCode::Syntax, "missing `width <w>` or `inputs`/`outputs` header");
            return;
        }
        for (i, g) in self.gates.iter().enumerate() {
            if let (Some(Payload::Table(rows)), false) = (&g.payload, self.width.is_none()) {
                let r = g.lines.len();
                if rows.first().is_some_and(|(x, y)| x.len() != r || y.len() != r) {
                    let msg = format!("table shape does not match a gate on {r} timelines");
                    self.diags.push(Diagnostic {
                        line: g.line,
                        col: self.gate_cols[i],
                        code: DiagCode::BadTable,
                        message: msg,
                    });
                }
            }
            if let Some(Payload::Table(rows)) = &g.payload {
                let k = rows.first().map_or(0, |(x, _)| x.len());
                if rows.len() != 1 << k {
                    let msg = format!("table has {} rows, needs {}", rows.len(), 1usize << k);
                    self.diags.push(Diagnostic {
                        line: g.line,
                        col: self.gate_cols[i],
                        code: DiagCode::BadTable,
                        message: msg,
                    });
                }
            }
        }

        // one namespace for node ids
        let mut seen: BTreeSet<&str> =
            self.inputs.iter().chain(self.outputs.iter()).flatten().map(String::as_str).collect();
        let mut gate_index: BTreeMap<&str, usize> = BTreeMap::new();
        let mut dups = Vec::new();
        for (i, g) in self.gates.iter().enumerate() {
            if seen.insert(&g.id) {
                gate_index.insert(&g.id, i);
            } else {
                dups.push(Diagnostic {
                    line: g.line,
                    col: self.gate_cols[i],
                    code: DiagCode::DuplicateId,
                    message: format!("`{}` is already declared", g.id),
                });
            }
        }
        self.diags.extend(dups);
        if !self.general() {
            return;
        }

        let inputs: BTreeSet<&str> = self.inputs.iter().flatten().map(String::as_str).collect();
        let outputs: BTreeSet<&str> = self.outputs.iter().flatten().map(String::as_str).collect();
        let mut args: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut vals: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut out_diags = Vec::new();
        for (w, scol, dcol) in &self.wires {
            let mut resolve = |e: &Endpoint, col: usize| -> Option<usize> {
                let (known, gate) = match e {
                    Endpoint::Input(x) => (inputs.contains(x.as_str()), None),
                    Endpoint::Output(y) => (outputs.contains(y.as_str()), None),
                    Endpoint::Arg(g, _) | Endpoint::Val(g, _) => {
                        let gi = gate_index.get(g.as_str()).copied();
                        (gi.is_some(), gi)
                    }
                };
                if !known {
                    out_diags.push(Diagnostic {
                        line: w.line,
                        col,
                        code: DiagCode::UnknownId,
                        message: format!("`{e}` refers to an undeclared id"),
                    });
                }
                gate
            };
            let sg = resolve(&w.source, *scol);
            let dg = resolve(&w.target, *dcol);
            let mut claim = |map: &mut BTreeMap<(usize, usize), usize>, key, col| {
                if map.insert(key, w.line).is_some() {
                    let msg = format!("port used by more than one wire on line {}", w.line);
                    out_diags.push(Diagnostic { line: w.line, col, code: DiagCode::BadPort, message: msg });
                }
            };
            if let (Endpoint::Val(_, j), Some(g)) = (&w.source, sg) {
                claim(&mut vals, (g, *j), *scol);
            }
            if let (Endpoint::Arg(_, i), Some(g)) = (&w.target, dg) {
                claim(&mut args, (g, *i), *dcol);
            }
            if let (Some(s), Some(d)) = (sg, dg) {
                if d <= s {
                    out_diags.push(Diagnostic {
                        line: w.line,
                        col: *dcol,
                        code: DiagCode::NoncoherentGateOrder,
                        message: format!("wire into `{}` comes from a gate listed at or after it", self.gates[d].id),
                    });
                }
            }
        }
        for (gi, g) in self.gates.iter().enumerate() {
            for (map, what) in [(&args, "arg"), (&vals, "val")] {
                let used: Vec<usize> = map.range((gi, 0)..(gi + 1, 0)).map(|(&(_, p), _)| p).collect();
                if used.iter().enumerate().any(|(k, &p)| p != k + 1) {
                    out_diags.push(Diagnostic {
                        line: g.line,
                        col: self.gate_cols[gi],
                        code: DiagCode::BadPort,
                        message: format!("`{}` uses {what} ports {used:?}; they must be 1..=n without gaps", g.id),
                    });
                }
            }
        }
        self.diags.extend(out_diags);
    }
}

/// Parses a document. Every failure carries a line and column.
pub fn parse(text: &str) -> Result<Document, Vec<Diagnostic>> {
    let mut p = Parser {
        diags: Vec::new(),
        kind: None,
        width: None,
        inputs: None,
        outputs: None,
        gates: Vec::new(),
        gate_cols: Vec::new(),
        wires: Vec::new(),
        matrix: None,
    };
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        last = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokenize(content);
        if toks.is_empty() {
            continue;
        }
        p.line(i + 1, &toks);
    }
    p.finish(last);
    if !p.diags.is_empty() {
        p.diags.sort_by_key(|d| (d.line, d.col));
        return Err(p.diags);
    }
    let header = match p.width {
        Some(w) => Header::Width(w),
        None => Header::Ports { inputs: p.inputs.unwrap_or_default(), outputs: p.outputs.unwrap_or_default() },
    };
    Ok(Document {
        kind: p.kind.expect("kind checked"),
        header,
        gates: p.gates,
        wires: p.wires.into_iter().map(|(w, _, _)| w).collect(),
    })
}

/// As [`parse`], reporting invalid UTF-8 as a diagnostic.
pub fn parse_bytes(bytes: &[u8]) -> Result<Document, Vec<Diagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let before = &bytes[..e.valid_up_to()];
            let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
            let line_start = before.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
            let col = String::from_utf8_lossy(&before[line_start..]).chars().count() + 1;
            Err(vec![Diagnostic { line, col, code: DiagCode::Syntax, message: "invalid UTF-8".into() }])
        }
    }
}
