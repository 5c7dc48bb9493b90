use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, ComplexVector, C64};

pub const MAX_BITS: u32 = 16;

/// The `2^B` unit-modulus phases `e^{j2πn/2^B}` of a `B`-bit phase shifter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseAlphabet {
    bits: u32,
    elements: Vec<C64>,
}

impl PhaseAlphabet {
    pub fn new(bits: u32) -> Result<Self> {
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::Input(format!(
                "phase resolution must be 1..={MAX_BITS} bits, got {bits}"
            )));
        }
        let size = 1usize << bits;
        let elements = (0..size).map(|n| unit_phase(n, size)).collect();
        Ok(Self { bits, elements })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[C64] {
        &self.elements
    }

    #[inline]
    pub fn element(&self, n: usize) -> C64 {
        self.elements[n]
    }

    /// Index of the element closest in angle to `z`; zero maps to index 0.
    pub fn nearest_index(&self, z: C64) -> usize {
        if z.re == 0.0 && z.im == 0.0 {
            return 0;
        }
        let size = self.size() as f64;
        let k = (z.arg() * size / (2.0 * PI)).round() as i64;
        k.rem_euclid(self.size() as i64) as usize
    }

    pub fn round_indices(&self, w: &[C64]) -> Vec<usize> {
        w.iter().map(|&z| self.nearest_index(z)).collect()
    }

    pub fn vector(&self, indices: &[usize]) -> ComplexVector {
        indices.iter().map(|&n| self.elements[n]).collect()
    }

    /// Rotate indices so the first entry is element 0. The product of two
    /// alphabet elements is again an element, so this is a global phase.
    pub fn normalize_rotation(&self, indices: &mut [usize]) {
        let Some(&first) = indices.first() else {
            return;
        };
        let size = self.size();
        for n in indices.iter_mut() {
            *n = (*n + size - first) % size;
        }
    }
}

fn unit_phase(n: usize, size: usize) -> C64 {
    // quarter turns are exact
    if (4 * n).is_multiple_of(size) {
        return match 4 * n / size {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    let (s, c) = (2.0 * PI * n as f64 / size as f64).sin_cos();
    C64::new(c, s)
}

/// Entry-wise nearest alphabet element.
pub fn round_to_alphabet(w: &ComplexVector, alphabet: &PhaseAlphabet) -> ComplexVector {
    alphabet.vector(&alphabet.round_indices(w.as_slice()))
}

/// `L × K` beam-combination matrix with entries in a phase alphabet, kept as
/// `K` columns of alphabet indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinerMatrix {
    alphabet: PhaseAlphabet,
    beams: usize,
    columns: Vec<Vec<usize>>,
}

impl CombinerMatrix {
    pub fn new(alphabet: PhaseAlphabet, beams: usize, columns: Vec<Vec<usize>>) -> Result<Self> {
        if columns.len() > beams {
            return Err(Error::Dimension(format!(
                "{} columns exceed {beams} beams",
                columns.len()
            )));
        }
        for c in &columns {
            if c.len() != beams {
                return Err(Error::Dimension(format!(
                    "column of length {} for {beams} beams",
                    c.len()
                )));
            }
            if c.iter().any(|&n| n >= alphabet.size()) {
                return Err(Error::Input("alphabet index out of range".into()));
            }
        }
        Ok(Self {
            alphabet,
            beams,
            columns,
        })
    }

    pub fn empty(alphabet: PhaseAlphabet, beams: usize) -> Self {
        Self {
            alphabet,
            beams,
            columns: Vec::new(),
        }
    }

    pub fn alphabet(&self) -> &PhaseAlphabet {
        &self.alphabet
    }

    /// `L`, the number of combined beams.
    pub fn beams(&self) -> usize {
        self.beams
    }

    /// `K`, the number of RF chains.
    pub fn rf_chains(&self) -> usize {
        self.columns.len()
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.columns
    }

    pub fn column(&self, k: usize) -> ComplexVector {
        self.alphabet.vector(&self.columns[k])
    }

    pub(crate) fn push(&mut self, column: Vec<usize>) {
        debug_assert_eq!(column.len(), self.beams);
        self.columns.push(column);
    }

    /// The first `k` columns.
    pub fn truncated(&self, k: usize) -> Self {
        Self {
            alphabet: self.alphabet.clone(),
            beams: self.beams,
            columns: self.columns[..k.min(self.columns.len())].to_vec(),
        }
    }

    /// Dense `L × K` matrix whose columns are the combination vectors.
    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.beams, self.columns.len(), |i, j| {
            self.alphabet.element(self.columns[j][i])
        })
    }
}
