use num_complex::Complex64;

use super::{QuantumError, DEFAULT_WIDTH_CAP};
use crate::boolean::{format_word, index_to_word, parse_word, word_to_index};

/// Tolerance on the squared norm of a state labelled normalized.
pub const NORM_TOL: f64 = 1e-9;

/// `2^w` amplitudes indexed by length-`w` words, word position 1 being the
/// most significant index bit.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    width: usize,
    amps: Vec<Complex64>,
}

fn check_width(width: usize) -> Result<(), QuantumError> {
    if width > DEFAULT_WIDTH_CAP {
        return Err(QuantumError::WidthTooLarge { width, cap: DEFAULT_WIDTH_CAP });
    }
    Ok(())
}

impl StateVector {
    pub fn basis(width: usize, index: usize) -> Result<Self, QuantumError> {
        check_width(width)?;
        if index >> width != 0 {
            return Err(QuantumError::BadState(format!("index {index} out of range for width {width}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << width];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { width, amps })
    }

    pub fn from_word(word: &[bool]) -> Result<Self, QuantumError> {
        StateVector::basis(word.len(), word_to_index(word))
    }

    /// Parses a basis label such as `|0110>`.
    pub fn from_label(label: &str) -> Result<Self, QuantumError> {
        let bits = label
            .trim()
            .strip_prefix('|')
            .and_then(|s| s.strip_suffix('>'))
            .ok_or_else(|| QuantumError::BadState(format!("`{label}` is not a basis label like |01>")))?;
        let word = parse_word(bits).map_err(|_| QuantumError::BadState(format!("`{label}` is not a basis label")))?;
        StateVector::from_word(&word)
    }

    pub fn from_amplitudes(width: usize, amps: Vec<Complex64>) -> Result<Self, QuantumError> {
        check_width(width)?;
        if amps.len() != 1 << width {
            return Err(QuantumError::BadState(format!("{} amplitudes for width {width}", amps.len())));
        }
        if amps.iter().any(|z| !z.is_finite()) {
            return Err(QuantumError::BadState("non-finite amplitude".into()));
        }
        Ok(StateVector { width, amps })
    }

    /// Parses `index re im` lines; missing indices are zero. `#` starts a comment.
    pub fn parse_lines(width: usize, text: &str) -> Result<Self, QuantumError> {
        check_width(width)?;
        let mut amps = vec![None; 1 << width];
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| QuantumError::BadState(format!("line {}: {what}", n + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [i, re, im] = fields[..] else {
                return Err(bad("expected `index re im`"));
            };
            let i: usize = i.parse().map_err(|_| bad("bad index"))?;
            let re: f64 = re.parse().map_err(|_| bad("bad real part"))?;
            let im: f64 = im.parse().map_err(|_| bad("bad imaginary part"))?;
            let slot = amps.get_mut(i).ok_or_else(|| bad("index out of range"))?;
            if slot.replace(Complex64::new(re, im)).is_some() {
                return Err(bad("index given twice"));
            }
        }
        let amps = amps.into_iter().map(|a| a.unwrap_or_default()).collect();
        StateVector::from_amplitudes(width, amps)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn amplitude(&self, word: &[bool]) -> Complex64 {
        self.amps[word_to_index(word)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    pub fn max_deviation(&self, other: &StateVector) -> Result<f64, QuantumError> {
        if self.width != other.width {
            return Err(QuantumError::WidthMismatch { expected: self.width, found: other.width });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Nonzero amplitudes as `index re im`, reals with 17 significant digits.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for (i, z) in self.amps.iter().enumerate() {
            if *z != Complex64::new(0.0, 0.0) {
                out.push_str(&format!("{i} {:.16e} {:.16e}\n", z.re, z.im));
            }
        }
        out
    }

    pub fn label(&self, index: usize) -> String {
        format!("|{}>", format_word(&index_to_word(index, self.width)))
    }
}

/// Max amplitude deviation at most `tol`. Global phase is not quotiented out.
pub fn states_equal(a: &StateVector, b: &StateVector, tol: f64) -> Result<bool, QuantumError> {
    Ok(a.max_deviation(b)? <= tol)
}
