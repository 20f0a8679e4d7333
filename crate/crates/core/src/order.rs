//! Finite posets, coherent linear orders, and the adjacent-transposition
//! walk between any two coherent orders.
//!
//! Two coherent linear orders of the same poset are connected by a sequence
//! of adjacent transpositions in which every intermediate order is coherent
//! too, and the walk needs exactly as many swaps as the orders have
//! inverted pairs. [`transposition_path`] constructs such a walk by always
//! swapping the leftmost adjacent pair that the target order inverts.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OrderError {
    #[error("duplicate element {0}")]
    DuplicateElement(String),
    #[error("unknown element {0}")]
    UnknownElement(String),
    #[error("relation is not irreflexive at {0}")]
    Reflexive(String),
    #[error("relation is not transitive: {0} < {1} < {2} but not {0} < {2}")]
    NotTransitive(String, String, String),
    #[error("relation has a cycle through {0}")]
    Cyclic(String),
    #[error("order is not a permutation of the poset elements")]
    NotAPermutation,
    #[error("orders range over different element sets")]
    ElementMismatch,
    #[error("{which} order is not coherent with the poset ({a} must precede {b})")]
    IncoherentInput { which: &'static str, a: String, b: String },
    #[error("more than {0} linear extensions")]
    TooMany(usize),
}

impl OrderError {
    pub fn code(&self) -> &'static str {
        match self {
            OrderError::DuplicateElement(_) => "DUPLICATE_ID",
            OrderError::UnknownElement(_) => "UNKNOWN_ELEMENT",
            OrderError::Reflexive(_) | OrderError::NotTransitive(..) | OrderError::Cyclic(_) => "NOT_A_POSET",
            OrderError::NotAPermutation => "NOT_A_PERMUTATION",
            OrderError::ElementMismatch => "ELEMENT_MISMATCH",
            OrderError::IncoherentInput { .. } => "INCOHERENT_INPUT",
            OrderError::TooMany(_) => "TOO_MANY",
        }
    }
}

fn show<T: fmt::Debug>(x: &T) -> String {
    format!("{x:?}")
}

/// A finite strict partial order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poset<T> {
    elements: Vec<T>,
    index: BTreeMap<T, usize>,
    less: Vec<Vec<bool>>,
}

impl<T: Ord + Clone + fmt::Debug> Poset<T> {
    /// Builds a poset from strict pairs `(a, b)` meaning `a ≺ b`.
    ///
    /// With `close` the transitive closure of the pairs is taken (the
    /// pairs then only need to be acyclic); without it the pairs must
    /// already form an irreflexive transitive relation.
    pub fn new(
        elements: impl IntoIterator<Item = T>,
        pairs: impl IntoIterator<Item = (T, T)>,
        close: bool,
    ) -> Result<Self, OrderError> {
        let mut elements: Vec<T> = elements.into_iter().collect();
        elements.sort();
        if let Some(w) = elements.windows(2).find(|w| w[0] == w[1]) {
            return Err(OrderError::DuplicateElement(show(&w[0])));
        }
        let index: BTreeMap<T, usize> = elements.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let n = elements.len();
        let mut less = vec![vec![false; n]; n];
        for (a, b) in pairs {
            let ia = *index.get(&a).ok_or_else(|| OrderError::UnknownElement(show(&a)))?;
            let ib = *index.get(&b).ok_or_else(|| OrderError::UnknownElement(show(&b)))?;
            less[ia][ib] = true;
        }
        if close {
            for k in 0..n {
                for i in 0..n {
                    if less[i][k] {
                        let via = less[k].clone();
                        for (cell, &v) in less[i].iter_mut().zip(&via) {
                            *cell |= v;
                        }
                    }
                }
            }
            if let Some(i) = (0..n).find(|&i| less[i][i]) {
                return Err(OrderError::Cyclic(show(&elements[i])));
            }
        } else {
            if let Some(i) = (0..n).find(|&i| less[i][i]) {
                return Err(OrderError::Reflexive(show(&elements[i])));
            }
            for i in 0..n {
                for j in 0..n {
                    if !less[i][j] {
                        continue;
                    }
                    for k in 0..n {
                        if less[j][k] && !less[i][k] {
                            return Err(OrderError::NotTransitive(
                                show(&elements[i]),
                                show(&elements[j]),
                                show(&elements[k]),
                            ));
                        }
                    }
                }
            }
        }
        Ok(Poset { elements, index, less })
    }

    /// Elements in ascending `T` order.
    pub fn elements(&self) -> &[T] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `a ≺ b`; false for unknown elements.
    pub fn less(&self, a: &T, b: &T) -> bool {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => self.less[i][j],
            _ => false,
        }
    }

    pub fn comparable(&self, a: &T, b: &T) -> bool {
        self.less(a, b) || self.less(b, a)
    }

    /// All strict pairs `(a, b)` with `a ≺ b`.
    pub fn pairs(&self) -> Vec<(T, T)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.less[i][j] {
                    out.push((self.elements[i].clone(), self.elements[j].clone()));
                }
            }
        }
        out
    }

    fn positions(&self, o: &LinearOrder<T>) -> Result<Vec<usize>, OrderError> {
        if o.0.len() != self.len() {
            return Err(OrderError::NotAPermutation);
        }
        let mut pos = vec![usize::MAX; self.len()];
        for (p, x) in o.0.iter().enumerate() {
            let i = *self.index.get(x).ok_or(OrderError::NotAPermutation)?;
            if pos[i] != usize::MAX {
                return Err(OrderError::NotAPermutation);
            }
            pos[i] = p;
        }
        Ok(pos)
    }

    /// First `≺` pair that `o` lists out of order, if any.
    fn violation(&self, o: &LinearOrder<T>) -> Result<Option<(T, T)>, OrderError> {
        let pos = self.positions(o)?;
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                if self.less[i][j] && pos[i] > pos[j] {
                    return Ok(Some((self.elements[i].clone(), self.elements[j].clone())));
                }
            }
        }
        Ok(None)
    }

    /// Enumerates every coherent linear order in lexicographic order of
    /// element sequences, failing once more than `cap` exist.
    pub fn linear_extensions(&self, cap: usize) -> Result<Vec<LinearOrder<T>>, OrderError> {
        let n = self.len();
        let mut preds = vec![0usize; n];
        for row in &self.less {
            for (p, &l) in preds.iter_mut().zip(row) {
                *p += l as usize;
            }
        }
        let mut out = Vec::new();
        let mut prefix = Vec::with_capacity(n);
        let mut used = vec![false; n];
        self.extend(&mut preds, &mut used, &mut prefix, &mut out, cap)?;
        Ok(out)
    }

    fn extend(
        &self,
        preds: &mut [usize],
        used: &mut [bool],
        prefix: &mut Vec<usize>,
        out: &mut Vec<LinearOrder<T>>,
        cap: usize,
    ) -> Result<(), OrderError> {
        let n = self.len();
        if prefix.len() == n {
            if out.len() == cap {
                return Err(OrderError::TooMany(cap));
            }
            out.push(LinearOrder(prefix.iter().map(|&i| self.elements[i].clone()).collect()));
            return Ok(());
        }
        for v in 0..n {
            if used[v] || preds[v] != 0 {
                continue;
            }
            used[v] = true;
            prefix.push(v);
            for (p, &l) in preds.iter_mut().zip(&self.less[v]) {
                *p -= l as usize;
            }
            let r = self.extend(preds, used, prefix, out, cap);
            for (p, &l) in preds.iter_mut().zip(&self.less[v]) {
                *p += l as usize;
            }
            prefix.pop();
            used[v] = false;
            r?;
        }
        Ok(())
    }
}

/// A sequence listing every element of a set exactly once.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearOrder<T>(pub Vec<T>);

impl<T> LinearOrder<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<T> From<Vec<T>> for LinearOrder<T> {
    fn from(v: Vec<T>) -> Self {
        LinearOrder(v)
    }
}

/// True iff every `≺` pair appears in order in `o`.
pub fn is_coherent<T: Ord + Clone + fmt::Debug>(p: &Poset<T>, o: &LinearOrder<T>) -> Result<bool, OrderError> {
    Ok(p.violation(o)?.is_none())
}

/// Rank of each element of `o2`, after checking both orders list the same set once each.
fn ranks<T: Ord + Clone>(o1: &LinearOrder<T>, o2: &LinearOrder<T>) -> Result<Vec<usize>, OrderError> {
    if o1.len() != o2.len() {
        return Err(OrderError::ElementMismatch);
    }
    let mut rank2 = BTreeMap::new();
    for (i, x) in o2.0.iter().enumerate() {
        if rank2.insert(x, i).is_some() {
            return Err(OrderError::ElementMismatch);
        }
    }
    let mut seen = vec![false; o1.len()];
    o1.0.iter()
        .map(|x| {
            let r = *rank2.get(x).ok_or(OrderError::ElementMismatch)?;
            if std::mem::replace(&mut seen[r], true) {
                return Err(OrderError::ElementMismatch);
            }
            Ok(r)
        })
        .collect()
}

/// Number of pairs ordered one way by `o1` and the other way by `o2`.
pub fn inversion_distance<T: Ord + Clone>(o1: &LinearOrder<T>, o2: &LinearOrder<T>) -> Result<usize, OrderError> {
    let r = ranks(o1, o2)?;
    let mut d = 0;
    for i in 0..r.len() {
        for j in i + 1..r.len() {
            if r[i] > r[j] {
                d += 1;
            }
        }
    }
    Ok(d)
}

/// A walk by adjacent transpositions. Swap positions are 1-based and name
/// the left element of the swapped pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranspositionPath<T> {
    pub start: LinearOrder<T>,
    pub swaps: Vec<usize>,
}

impl<T: Clone> TranspositionPath<T> {
    pub fn len(&self) -> usize {
        self.swaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.swaps.is_empty()
    }

    /// Every order visited, start and end included.
    pub fn orders(&self) -> Vec<LinearOrder<T>> {
        let mut cur = self.start.0.clone();
        let mut out = vec![LinearOrder(cur.clone())];
        for &s in &self.swaps {
            cur.swap(s - 1, s);
            out.push(LinearOrder(cur.clone()));
        }
        out
    }

    pub fn end(&self) -> LinearOrder<T> {
        self.orders().pop().expect("orders() is never empty")
    }
}

/// Transforms coherent `from` into coherent `to` one adjacent swap at a
/// time, keeping every intermediate order coherent. The path has length
/// `inversion_distance(from, to)`; each step swaps the leftmost adjacent
/// pair that `to` orders the other way.
pub fn transposition_path<T: Ord + Clone + fmt::Debug>(
    p: &Poset<T>,
    from: &LinearOrder<T>,
    to: &LinearOrder<T>,
) -> Result<TranspositionPath<T>, OrderError> {
    for (which, o) in [("source", from), ("target", to)] {
        match p.violation(o) {
            Err(OrderError::NotAPermutation) => return Err(OrderError::ElementMismatch),
            Err(e) => return Err(e),
            Ok(Some((a, b))) => return Err(OrderError::IncoherentInput { which, a: show(&a), b: show(&b) }),
            Ok(None) => {}
        }
    }
    // Work on target ranks: the walk sorts this sequence by adjacent swaps.
    let mut cur = ranks(from, to)?;
    let mut swaps = Vec::new();
    let mut i = 0;
    while i + 1 < cur.len() {
        if cur[i] > cur[i + 1] {
            cur.swap(i, i + 1);
            swaps.push(i + 1);
            // the swap can only create a new descent just to the left
            i = i.saturating_sub(1);
        } else {
            i += 1;
        }
    }
    Ok(TranspositionPath { start: from.clone(), swaps })
}
