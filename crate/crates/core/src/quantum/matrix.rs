use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;

use super::QuantumError;
use crate::boolean::BooleanFunction;

/// Max-entry deviation allowed between `U†U` and the identity.
pub const UNITARY_TOL: f64 = 1e-10;

/// A square complex matrix, row-major. Entry `(i, j)` is the coefficient of
/// basis vector `i` in the image of basis vector `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self, QuantumError> {
        if entries.len() != dim * dim {
            return Err(QuantumError::BadMatrixShape(format!("{} entries for a {dim}x{dim} matrix", entries.len())));
        }
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(QuantumError::BadMatrixShape("non-finite entry".into()));
        }
        Ok(ComplexMatrix { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, QuantumError> {
        let dim = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(QuantumError::BadMatrixShape(format!("row of length {} in a {dim}x{dim} matrix", r.len())));
        }
        ComplexMatrix::new(dim, rows.concat())
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self, QuantumError> {
        ComplexMatrix::new(dim, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        ComplexMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, other.dim, "matrix dimensions");
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        ComplexMatrix { dim: n, entries: out }
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        let n = self.dim;
        let entries = (0..n * n).map(|idx| self.entries[(idx % n) * n + idx / n].conj()).collect();
        ComplexMatrix { dim: n, entries }
    }

    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (a, b) = (self.dim, other.dim);
        let n = a * b;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(self.get(i / b, j / b) * other.get(i % b, j % b));
            }
        }
        ComplexMatrix { dim: n, entries }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "vector length");
        (0..self.dim).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn max_deviation(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "matrix dimensions");
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Max-entry deviation of `M†M` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        self.adjoint().mul(self).max_deviation(&ComplexMatrix::identity(self.dim))
    }
}

/// A matrix that passed the unitarity check, acting on `qubits()` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
    qubits: usize,
}

impl UnitaryMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, QuantumError> {
        let dim = matrix.dim();
        if !dim.is_power_of_two() {
            return Err(QuantumError::BadMatrixShape(format!("dimension {dim} is not a power of two")));
        }
        let deviation = matrix.unitarity_deviation();
        if deviation > UNITARY_TOL {
            return Err(QuantumError::NotUnitary { gate: None, deviation });
        }
        Ok(UnitaryMatrix { qubits: dim.trailing_zeros() as usize, matrix })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Product `self · other`, i.e. `other` acts first.
    pub fn mul(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix { matrix: self.matrix.mul(&other.matrix), qubits: self.qubits }
    }

    pub fn hadamard() -> Self {
        let h = FRAC_1_SQRT_2;
        let m = ComplexMatrix::from_real(2, &[h, h, h, -h]).expect("2x2");
        UnitaryMatrix { matrix: m, qubits: 1 }
    }

    pub fn t_gate() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let m = ComplexMatrix::new(2, vec![one, zero, zero, Complex64::from_polar(1.0, FRAC_PI_4)]).expect("2x2");
        UnitaryMatrix { matrix: m, qubits: 1 }
    }

    /// H, T, and the permutation lift of every reversible Boolean builtin.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "H" => Some(UnitaryMatrix::hadamard()),
            "T" => Some(UnitaryMatrix::t_gate()),
            _ => BooleanFunction::builtin(name).and_then(|f| permutation_lift(&f).ok()),
        }
    }

    pub fn builtin_names() -> Vec<&'static str> {
        let mut names = vec!["H", "T"];
        names.extend(BooleanFunction::BUILTINS.iter().filter(|n| UnitaryMatrix::builtin(n).is_some()));
        names
    }
}

/// The 0/1 matrix sending `|x>` to `|f(x)>`.
pub fn permutation_lift(f: &BooleanFunction) -> Result<UnitaryMatrix, QuantumError> {
    if !f.is_permutation() {
        return Err(QuantumError::NotAPermutation);
    }
    let dim = 1usize << f.inputs();
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for x in 0..dim {
        entries[f.apply_index(x) * dim + x] = Complex64::new(1.0, 0.0);
    }
    Ok(UnitaryMatrix { matrix: ComplexMatrix { dim, entries }, qubits: f.inputs() })
}
