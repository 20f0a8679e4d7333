//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::collections::BTreeSet;

use circuitum::boolean::BooleanCircuit;
use circuitum::ir::{Circuit, NodeId, NodeKind, RawCircuit};
use circuitum::quantum::{ComplexMatrix, QuantumCircuit};
use num_complex::Complex64;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

/// Reachability by depth-first search from every node; `r[a][b]` iff a
/// nonempty path leads from `a` to `b`.
pub fn reach(c: &Circuit) -> Vec<Vec<bool>> {
    let n = c.node_count();
    let mut r = vec![vec![false; n]; n];
    for a in c.nodes() {
        let mut stack: Vec<NodeId> = c.outgoing(a).iter().map(|&e| c.target(e)).collect();
        while let Some(x) = stack.pop() {
            if !r[a.index()][x.index()] {
                r[a.index()][x.index()] = true;
                stack.extend(c.outgoing(x).iter().map(|&e| c.target(e)));
            }
        }
    }
    r
}

/// Every maximal path starting at an input, as node sequences.
pub fn all_paths(c: &Circuit) -> Vec<Vec<NodeId>> {
    fn go(c: &Circuit, path: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        let last = *path.last().unwrap();
        if c.outgoing(last).is_empty() {
            out.push(path.clone());
            return;
        }
        for &e in c.outgoing(last) {
            path.push(c.target(e));
            go(c, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    for &i in c.inputs() {
        go(c, &mut vec![i], &mut out);
    }
    out
}

pub fn depth_by_paths(c: &Circuit) -> usize {
    all_paths(c).iter().map(|p| p.iter().filter(|&&n| c.kind(n) == NodeKind::Gate).count()).max().unwrap_or(0)
}

/// Convexity straight from the definition: every node strictly inside a
/// path between two gates of `x` lies in `x`.
pub fn convex_by_paths(c: &Circuit, x: &BTreeSet<NodeId>) -> bool {
    for p in all_paths(c) {
        let hits: Vec<usize> = p.iter().enumerate().filter(|(_, n)| x.contains(n)).map(|(i, _)| i).collect();
        if let (Some(&lo), Some(&hi)) = (hits.first(), hits.last()) {
            if p[lo..=hi].iter().any(|n| !x.contains(n)) {
                return false;
            }
        }
    }
    true
}

fn index_of(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| 2 * acc + b as usize)
}

fn bits_of(mut v: usize, len: usize) -> Vec<bool> {
    let mut out = vec![false; len];
    for i in (0..len).rev() {
        out[i] = v % 2 == 1;
        v /= 2;
    }
    out
}

/// Edge values by memoized recursion from the output edges backwards.
pub fn eval_recursive(b: &BooleanCircuit, input: &[bool]) -> Vec<bool> {
    fn value(b: &BooleanCircuit, input: &[bool], e: usize, memo: &mut Vec<Option<bool>>) -> bool {
        if let Some(v) = memo[e] {
            return v;
        }
        let c = b.base();
        let edge = c.edges().nth(e).unwrap();
        let src = c.source(edge);
        let v = match c.kind(src) {
            NodeKind::Input(rank) => input[rank - 1],
            NodeKind::Gate => {
                let args: Vec<bool> =
                    b.arg_edges(src).to_vec().iter().map(|a| value(b, input, a.index(), memo)).collect();
                let f = b.function(src);
                let out = bits_of(f.table()[index_of(&args)] as usize, f.outputs());
                let pos = b.val_edges(src).iter().position(|&x| x == edge).unwrap();
                out[pos]
            }
            NodeKind::Output(_) => unreachable!("outputs have no outgoing edges"),
        };
        memo[e] = Some(v);
        v
    }
    let n = b.base().edge_count();
    let mut memo = vec![None; n];
    (0..n).map(|e| value(b, input, e, &mut memo)).collect()
}

pub fn output_of(b: &BooleanCircuit, edges: &[bool]) -> Vec<bool> {
    let c = b.base();
    (1..=c.outputs().len()).map(|r| edges[c.output_edge(r).index()]).collect()
}

/// Table of `g` after `f`, by index lookup.
pub fn compose_tables(f: &[u32], g: &[u32]) -> Vec<u32> {
    f.iter().map(|&y| g[y as usize]).collect()
}

pub type Dense = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The lift of `u` to `w` qubits, entry by entry: nonzero only where row and
/// column agree off the active timelines.
pub fn dense_lift(u: &ComplexMatrix, active: &[usize], w: usize) -> Dense {
    let dim = 1usize << w;
    let mut m = vec![vec![c(0.0, 0.0); dim]; dim];
    for (i, row) in m.iter_mut().enumerate() {
        let bi = bits_of(i, w);
        for (j, cell) in row.iter_mut().enumerate() {
            let bj = bits_of(j, w);
            let off_agree = (1..=w).filter(|t| !active.contains(t)).all(|t| bi[t - 1] == bj[t - 1]);
            if off_agree {
                let si = index_of(&active.iter().map(|&t| bi[t - 1]).collect::<Vec<_>>());
                let sj = index_of(&active.iter().map(|&t| bj[t - 1]).collect::<Vec<_>>());
                *cell = u.get(si, sj);
            }
        }
    }
    m
}

pub fn matvec(m: &Dense, v: &[Complex64]) -> Vec<Complex64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

/// Dense matrix-vector products in the given gate order.
pub fn dense_run(q: &QuantumCircuit, order: &[NodeId], input: &[Complex64]) -> Vec<Complex64> {
    let w = q.width();
    order.iter().fold(input.to_vec(), |v, &g| matvec(&dense_lift(q.matrix(g).matrix(), q.active(g), w), &v))
}

pub fn max_dev(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x.clone());
            out.push(p);
        }
    }
    out
}

/// Inversions counted pair by pair.
pub fn inversions<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let pos = |x: &T| b.iter().position(|y| y == x).unwrap();
    let mut n = 0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if pos(&a[i]) > pos(&a[j]) {
                n += 1;
            }
        }
    }
    n
}

/// A random general circuit: each gate consumes some open wire ends and
/// opens new ones; leftover ends become outputs.
pub fn random_general_circuit<R: Rng + ?Sized>(rng: &mut R, inputs: usize, gates: usize) -> Circuit {
    let mut raw = RawCircuit::new();
    let mut open: Vec<String> = Vec::new();
    for i in 1..=inputs {
        raw = raw.input(format!("a{i}"), i);
        open.push(format!("a{i}"));
    }
    let mut edge = 0;
    for g in 1..=gates {
        if open.is_empty() {
            break;
        }
        let name = format!("g{g}");
        raw = raw.gate(name.clone());
        for _ in 0..rng.random_range(1..=open.len().min(3)) {
            let src = open.swap_remove(rng.random_range(0..open.len()));
            edge += 1;
            raw = raw.edge(format!("e{edge}"), src, name.clone());
        }
        for _ in 0..rng.random_range(1..=3) {
            open.push(name.clone());
        }
    }
    open.shuffle(rng);
    for (i, src) in open.into_iter().enumerate() {
        edge += 1;
        raw = raw.output(format!("z{}", i + 1), i + 1).edge(format!("e{edge}"), src, format!("z{}", i + 1));
    }
    raw.build().expect("generated general circuits are valid")
}

/// Random single-site edits of a document.
pub fn mutate<R: Rng + ?Sized>(rng: &mut R, text: &str) -> String {
    const NOISE: &[&str] = &[
        " ", "\n", ",", "->", "0", "1", "9", "-1", "x", "|", "gate", "lines", "op", "table", "matrix", "wire", "in:",
        "out:", ".arg[", "]", "#", "\t", "kind", "width", "inputs", "outputs", "NaN", "1e999", "\u{e9}",
    ];
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    match rng.random_range(0..7) {
        0 if !lines.is_empty() => {
            lines.remove(rng.random_range(0..lines.len()));
        }
        1 if !lines.is_empty() => {
            let i = rng.random_range(0..lines.len());
            let l = lines[i].clone();
            lines.insert(rng.random_range(0..=lines.len()), l);
        }
        2 if lines.len() >= 2 => {
            let (i, j) = (rng.random_range(0..lines.len()), rng.random_range(0..lines.len()));
            lines.swap(i, j);
        }
        3 => {
            let mut s: Vec<char> = text.chars().collect();
            if !s.is_empty() {
                let at = rng.random_range(0..s.len());
                s.truncate(at);
            }
            return s.into_iter().collect();
        }
        4 => {
            let mut s: Vec<char> = text.chars().collect();
            if !s.is_empty() {
                s.remove(rng.random_range(0..s.len()));
            }
            return s.into_iter().collect();
        }
        _ => {
            let mut s: Vec<char> = text.chars().collect();
            let at = rng.random_range(0..=s.len());
            let noise = NOISE.choose(rng).unwrap();
            for (k, ch) in noise.chars().enumerate() {
                s.insert(at + k, ch);
            }
            return s.into_iter().collect();
        }
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}
