use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Real-weighted tensor product of single-qubit Paulis; `letters[q]` acts on qubit `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    coefficient: f64,
    letters: Vec<Pauli>,
    x_mask: usize,
    z_mask: usize,
    y_phase: Complex64,
}

impl PauliString {
    pub fn new(coefficient: f64, letters: Vec<Pauli>) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::NonFinite("Pauli coefficient".into()));
        }
        if letters.is_empty() || letters.len() >= usize::BITS as usize {
            return Err(Error::InvalidParams(format!("{} letters", letters.len())));
        }
        let (mut x_mask, mut z_mask, mut n_y) = (0usize, 0usize, 0u32);
        for (q, p) in letters.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => x_mask |= 1 << q,
                Pauli::Z => z_mask |= 1 << q,
                Pauli::Y => {
                    x_mask |= 1 << q;
                    z_mask |= 1 << q;
                    n_y += 1;
                }
            }
        }
        let y_phase = Complex64::i().powu(n_y);
        Ok(Self { coefficient, letters, x_mask, z_mask, y_phase })
    }

    /// Builds an `n`-qubit string from `(qubit, letter)` pairs; unlisted qubits get `I`.
    pub fn from_sparse(n_qubits: usize, coefficient: f64, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut letters = vec![Pauli::I; n_qubits];
        for &(q, p) in ops {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
            }
            letters[q] = p;
        }
        Self::new(coefficient, letters)
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    /// Bits flipped by the string (its X and Y letters).
    pub fn x_mask(&self) -> usize {
        self.x_mask
    }

    /// `⟨x ⊕ x_mask| P |x⟩` for the unit-weight string.
    #[inline]
    pub fn phase(&self, x: usize) -> Complex64 {
        if (x & self.z_mask).count_ones() & 1 == 1 {
            -self.y_phase
        } else {
            self.y_phase
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.letters.iter().map(|p| p.symbol()).collect();
        write!(f, "{:+} {}", self.coefficient, s)
    }
}

/// Hermitian operator as a sum of real-weighted Pauli strings with unique letter sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    /// Merges duplicate strings and drops exact zeros. Terms end up in a fixed lexical order.
    pub fn new(n_qubits: usize, terms: impl IntoIterator<Item = PauliString>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidParams("operator on zero qubits".into()));
        }
        let mut merged: BTreeMap<Vec<Pauli>, f64> = BTreeMap::new();
        for t in terms {
            if t.n_qubits() != n_qubits {
                return Err(Error::DimensionMismatch { expected: n_qubits, found: t.n_qubits() });
            }
            *merged.entry(t.letters).or_insert(0.0) += t.coefficient;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(letters, c)| PauliString::new(c, letters))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n_qubits, terms })
    }

    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, [])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    /// Coefficient of the all-identity string.
    pub fn constant(&self) -> f64 {
        self.terms.iter().filter(|t| t.is_identity()).map(|t| t.coefficient).sum()
    }

    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    pub fn to_sparse(&self) -> SparseOperator {
        SparseOperator::from_pauli_sum(self)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Compressed sparse rows, `H[row, col] = ⟨row|H|col⟩`.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
    real: bool,
}

impl SparseOperator {
    pub fn from_pauli_sum(h: &PauliSum) -> Self {
        let dim = 1usize << h.n_qubits;
        let cutoff = 1e-14 * h.one_norm().max(1.0);
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut scratch: Vec<(usize, Complex64)> = Vec::with_capacity(h.terms.len());
        row_ptr.push(0);
        for row in 0..dim {
            scratch.clear();
            for t in &h.terms {
                let col = row ^ t.x_mask;
                scratch.push((col, t.phase(col) * t.coefficient));
            }
            scratch.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < scratch.len() {
                let col = scratch[k].0;
                let mut v = Complex64::new(0.0, 0.0);
                while k < scratch.len() && scratch[k].0 == col {
                    v += scratch[k].1;
                    k += 1;
                }
                if v.norm() > cutoff {
                    cols.push(col);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        let real = vals.iter().all(|v| v.im == 0.0);
        Self { dim, row_ptr, cols, vals, real }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// True when every stored element has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    /// `out = H x`.
    pub fn matvec(&self, x: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        for (r, o) in out.iter_mut().enumerate() {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            *o = self.cols[span.clone()]
                .iter()
                .zip(&self.vals[span])
                .map(|(&c, v)| v * x[c])
                .sum();
        }
    }

    /// `Re ⟨x|H|x⟩`.
    pub fn expectation(&self, x: &[Complex64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut acc = 0.0;
        for (r, xr) in x.iter().enumerate() {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            let hx: Complex64 = self.cols[span.clone()]
                .iter()
                .zip(&self.vals[span])
                .map(|(&c, v)| v * x[c])
                .sum();
            acc += (xr.conj() * hx).re;
        }
        acc
    }

    /// Operator restricted to the basis states `indices` (in that order).
    pub fn restrict(&self, indices: &[usize]) -> SparseOperator {
        let mut local = vec![usize::MAX; self.dim];
        for (k, &i) in indices.iter().enumerate() {
            local[i] = k;
        }
        let mut row_ptr = Vec::with_capacity(indices.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for &i in indices {
            for (c, v) in self.row(i) {
                if local[c] != usize::MAX {
                    cols.push(local[c]);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { dim: indices.len(), row_ptr, cols, vals, real: self.real }
    }

    /// True if no element links basis states with different `label`.
    pub fn preserves(&self, label: impl Fn(usize) -> usize) -> bool {
        (0..self.dim).all(|r| self.row(r).all(|(c, _)| label(c) == label(r)))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                let mirror = self
                    .row(c)
                    .find(|&(cc, _)| cc == r)
                    .map_or(Complex64::new(0.0, 0.0), |e| e.1);
                worst = worst.max((v - mirror.conj()).norm());
            }
        }
        worst
    }
}
