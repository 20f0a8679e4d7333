use std::fmt;

use super::BooleanError;

/// Largest supported input or output arity of a single table.
pub const MAX_ARITY: usize = 24;

/// Table index of a word. Position 1 is the most significant bit.
pub fn word_to_index(word: &[bool]) -> usize {
    word.iter().fold(0, |acc, &b| acc << 1 | b as usize)
}

pub fn index_to_word(index: usize, len: usize) -> Vec<bool> {
    (0..len).map(|i| index >> (len - 1 - i) & 1 == 1).collect()
}

pub fn parse_word(s: &str) -> Result<Vec<bool>, BooleanError> {
    s.chars()
        .map(|ch| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(BooleanError::BadWord(s.to_string())),
        })
        .collect()
}

pub fn format_word(word: &[bool]) -> String {
    word.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// A total function `{0,1}^k -> {0,1}^l` stored as a table of output indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    k: usize,
    l: usize,
    table: Vec<u32>,
}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BooleanFunction({}->{}:", self.k, self.l)?;
        for (x, y) in self.rows() {
            write!(f, " {}->{}", format_word(&x), format_word(&y))?;
        }
        write!(f, ")")
    }
}

impl BooleanFunction {
    /// `table[i]` is the output index for input index `i`.
    pub fn new(k: usize, l: usize, table: Vec<u32>) -> Result<Self, BooleanError> {
        if k > MAX_ARITY || l > MAX_ARITY {
            return Err(BooleanError::BadTable(format!("arity {k}->{l} exceeds {MAX_ARITY}")));
        }
        if table.len() != 1 << k {
            return Err(BooleanError::BadTable(format!("expected {} rows, found {}", 1usize << k, table.len())));
        }
        if let Some(&v) = table.iter().find(|&&v| (v as usize) >> l != 0) {
            return Err(BooleanError::BadTable(format!("value {v} does not fit in {l} bits")));
        }
        Ok(BooleanFunction { k, l, table })
    }

    pub fn from_fn(k: usize, l: usize, f: impl Fn(&[bool]) -> Vec<bool>) -> Result<Self, BooleanError> {
        if k > MAX_ARITY {
            return Err(BooleanError::BadTable(format!("arity {k} exceeds {MAX_ARITY}")));
        }
        let mut table = Vec::with_capacity(1 << k);
        for i in 0..1usize << k {
            let y = f(&index_to_word(i, k));
            if y.len() != l {
                return Err(BooleanError::BadTable(format!("row {i} has {} output bits, expected {l}", y.len())));
            }
            table.push(word_to_index(&y) as u32);
        }
        BooleanFunction::new(k, l, table)
    }

    /// Builds a table from explicit rows; every input word must occur exactly once.
    pub fn from_rows(rows: &[(Vec<bool>, Vec<bool>)]) -> Result<Self, BooleanError> {
        let (first_in, first_out) = rows.first().ok_or_else(|| BooleanError::BadTable("no rows".into()))?;
        let (k, l) = (first_in.len(), first_out.len());
        if k > MAX_ARITY || l > MAX_ARITY {
            return Err(BooleanError::BadTable(format!("arity {k}->{l} exceeds {MAX_ARITY}")));
        }
        let mut table: Vec<Option<u32>> = vec![None; 1 << k];
        for (x, y) in rows {
            if x.len() != k || y.len() != l {
                return Err(BooleanError::BadTable(format!(
                    "row {}->{} does not have shape {k}->{l}",
                    format_word(x),
                    format_word(y)
                )));
            }
            let slot = &mut table[word_to_index(x)];
            if slot.is_some() {
                return Err(BooleanError::BadTable(format!("row {} given twice", format_word(x))));
            }
            *slot = Some(word_to_index(y) as u32);
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| BooleanError::BadTable(format!("row {} missing", format_word(&index_to_word(i, k)))))
            })
            .collect::<Result<_, _>>()?;
        BooleanFunction::new(k, l, table)
    }

    pub fn identity(r: usize) -> Self {
        BooleanFunction::new(r, r, (0..1u32 << r).collect()).expect("identity is well formed")
    }

    pub fn inputs(&self) -> usize {
        self.k
    }

    pub fn outputs(&self) -> usize {
        self.l
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn apply_index(&self, x: usize) -> usize {
        self.table[x] as usize
    }

    pub fn apply(&self, x: &[bool]) -> Vec<bool> {
        assert_eq!(x.len(), self.k, "argument length");
        index_to_word(self.apply_index(word_to_index(x)), self.l)
    }

    /// Rows in ascending input order.
    pub fn rows(&self) -> impl Iterator<Item = (Vec<bool>, Vec<bool>)> + '_ {
        self.table.iter().enumerate().map(|(i, &v)| (index_to_word(i, self.k), index_to_word(v as usize, self.l)))
    }

    pub fn is_permutation(&self) -> bool {
        if self.k != self.l {
            return false;
        }
        let mut seen = vec![false; self.table.len()];
        self.table.iter().all(|&v| !std::mem::replace(&mut seen[v as usize], true))
    }

    /// Two-sided inverse, if there is one.
    pub fn invert(&self) -> Option<BooleanFunction> {
        if !self.is_permutation() {
            return None;
        }
        let mut inv = vec![0u32; self.table.len()];
        for (x, &y) in self.table.iter().enumerate() {
            inv[y as usize] = x as u32;
        }
        Some(BooleanFunction { k: self.k, l: self.l, table: inv })
    }

    /// `self` first, then `next`.
    pub fn then(&self, next: &BooleanFunction) -> Option<BooleanFunction> {
        (self.l == next.k).then(|| BooleanFunction {
            k: self.k,
            l: next.l,
            table: self.table.iter().map(|&y| next.table[y as usize]).collect(),
        })
    }

    /// Table for a builtin gate name, or `None` if unknown.
    pub fn builtin(name: &str) -> Option<BooleanFunction> {
        let f =
            |k, l, g: fn(&[bool]) -> Vec<bool>| BooleanFunction::from_fn(k, l, g).expect("builtin tables are valid");
        Some(match name {
            "ID" => BooleanFunction::identity(1),
            "NOT" | "X" => f(1, 1, |x| vec![!x[0]]),
            "COPY" => f(1, 2, |x| vec![x[0], x[0]]),
            "AND" => f(2, 1, |x| vec![x[0] & x[1]]),
            "OR" => f(2, 1, |x| vec![x[0] | x[1]]),
            "XOR" => f(2, 1, |x| vec![x[0] ^ x[1]]),
            "NAND" => f(2, 1, |x| vec![!(x[0] & x[1])]),
            "AND-EMBED" => f(2, 2, |x| vec![x[0], x[0] & x[1]]),
            "XOR-EMBED" | "CNOT" => f(2, 2, |x| vec![x[0], x[0] ^ x[1]]),
            "SWAP" => f(2, 2, |x| vec![x[1], x[0]]),
            "TOFFOLI" => f(3, 3, |x| vec![x[0], x[1], x[2] ^ (x[0] & x[1])]),
            "FREDKIN" => f(3, 3, |x| if x[0] { vec![x[0], x[2], x[1]] } else { x.to_vec() }),
            _ => return None,
        })
    }

    pub const BUILTINS: &'static [&'static str] = &[
        "ID",
        "NOT",
        "X",
        "COPY",
        "AND",
        "OR",
        "XOR",
        "NAND",
        "AND-EMBED",
        "XOR-EMBED",
        "CNOT",
        "SWAP",
        "TOFFOLI",
        "FREDKIN",
    ];
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Vec<bool> {
        parse_word(s).unwrap()
    }

    #[test]
    fn word_convention() {
        assert_eq!(word_to_index(&w("100")), 4);
        assert_eq!(index_to_word(1, 3), w("001"));
        assert_eq!(format_word(&index_to_word(word_to_index(&w("0110")), 4)), "0110");
        assert!(parse_word("01x").is_err());
        assert_eq!(word_to_index(&[]), 0);
    }

    #[test]
    fn cnot_and_swap() {
        let cnot = BooleanFunction::builtin("CNOT").unwrap();
        assert_eq!(cnot.apply(&w("11")), w("10"));
        assert_eq!(cnot.apply(&w("10")), w("11"));
        assert_eq!(cnot.apply(&w("01")), w("01"));
        assert_eq!(cnot.invert().unwrap(), cnot);
        let swap = BooleanFunction::builtin("SWAP").unwrap();
        assert_eq!(swap.apply(&w("10")), w("01"));
        assert_eq!(swap.invert().unwrap(), swap);
        assert_eq!(cnot.then(&cnot).unwrap(), BooleanFunction::identity(2));
    }

    #[test]
    fn non_invertible() {
        let zero = BooleanFunction::new(1, 1, vec![0, 0]).unwrap();
        assert!(zero.invert().is_none());
        let and_embed = BooleanFunction::builtin("AND-EMBED").unwrap();
        assert!(!and_embed.is_permutation());
        assert_eq!(and_embed.apply(&w("00")), and_embed.apply(&w("01")));
        assert!(BooleanFunction::builtin("AND").unwrap().invert().is_none());
    }

    #[test]
    fn reversible_builtins() {
        for name in ["NOT", "CNOT", "SWAP", "TOFFOLI", "FREDKIN", "ID"] {
            let f = BooleanFunction::builtin(name).unwrap();
            assert!(f.is_permutation(), "{name}");
            assert_eq!(f.then(&f).unwrap(), BooleanFunction::identity(f.inputs()), "{name} is an involution");
        }
        assert_eq!(BooleanFunction::builtin("TOFFOLI").unwrap().apply(&w("110")), w("111"));
        assert_eq!(BooleanFunction::builtin("FREDKIN").unwrap().apply(&w("110")), w("101"));
        assert!(BooleanFunction::builtin("NOPE").is_none());
        for name in BooleanFunction::BUILTINS {
            assert!(BooleanFunction::builtin(name).is_some());
        }
    }

    #[test]
    fn table_validation() {
        assert!(BooleanFunction::new(1, 1, vec![0]).is_err());
        assert!(BooleanFunction::new(1, 1, vec![0, 2]).is_err());
        let rows = vec![(w("0"), w("1")), (w("1"), w("0"))];
        assert_eq!(BooleanFunction::from_rows(&rows).unwrap(), BooleanFunction::builtin("NOT").unwrap());
        assert!(BooleanFunction::from_rows(&rows[..1]).is_err());
        assert!(BooleanFunction::from_rows(&[(w("0"), w("1")), (w("0"), w("1"))]).is_err());
        assert!(BooleanFunction::from_rows(&[(w("0"), w("1")), (w("1"), w("00"))]).is_err());
    }
}
