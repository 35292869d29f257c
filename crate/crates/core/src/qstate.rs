//! Dense statevector simulation.
//!
//! Qubit `q` is bit `q` of the amplitude index (little-endian), so the basis
//! state `|q0 q1 ... q(n-1)⟩` lives at index `Σ q_k 2^k`. Every other module
//! relies on this convention for Jordan-Wigner signs and partial traces.

use std::fmt;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::PauliSum;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 26;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidState(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self { n_qubits, amplitudes })
    }

    /// Builds a state from raw amplitudes, normalizing them.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "amplitude count {dim} is not a power of two >= 2"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_register(n_qubits)?;
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("state amplitude".into()));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Probability-weighted mean of `Σ_q (1 - Z_q)/2`, the Jordan-Wigner particle number.
    pub fn mean_occupation(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * i.count_ones() as f64)
            .sum()
    }

    /// Applies `gate` in place. `theta` must be given exactly when the gate is parametric.
    pub fn apply_gate(&mut self, gate: &Gate, theta: Option<f64>) -> Result<()> {
        gate.validate(self.n_qubits)?;
        let angle = match (gate.kind.is_parametric(), theta) {
            (true, Some(t)) if t.is_finite() => t,
            (true, Some(_)) => return Err(Error::NonFinite("gate angle".into())),
            (true, None) => {
                return Err(Error::ParameterMismatch {
                    gate: gate.kind.name(),
                    detail: "requires an angle",
                })
            }
            (false, Some(_)) => {
                return Err(Error::ParameterMismatch {
                    gate: gate.kind.name(),
                    detail: "takes no angle",
                })
            }
            (false, None) => 0.0,
        };
        self.apply_unchecked(gate, angle);
        Ok(())
    }

    /// Kernel dispatch; the gate must already be valid for this register.
    pub(crate) fn apply_unchecked(&mut self, gate: &Gate, theta: f64) {
        let [a, b] = gate.targets;
        match gate.kind {
            GateKind::Ry => ry_kernel(&mut self.amplitudes, a, theta),
            GateKind::Rz => rz_kernel(&mut self.amplitudes, a, theta),
            GateKind::Cnot => cnot_kernel(&mut self.amplitudes, a, b),
            GateKind::Rn => rn_kernel(&mut self.amplitudes, a, b, theta),
        }
    }
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::InvalidState("register needs at least one qubit".into()));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::TooManyQubits { n_qubits, cap: MAX_QUBITS });
    }
    Ok(())
}

/// Functional form of [`StateVector::apply_gate`].
pub fn apply_gate(state: &StateVector, gate: &Gate, theta: Option<f64>) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_gate(gate, theta)?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Ry,
    Rz,
    Cnot,
    Rn,
}

impl GateKind {
    pub fn is_parametric(self) -> bool {
        !matches!(self, GateKind::Cnot)
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Ry | GateKind::Rz => 1,
            GateKind::Cnot | GateKind::Rn => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Cnot => "CNOT",
            GateKind::Rn => "RN",
        }
    }
}

/// A gate placement. For CNOT the targets are `(control, target)`; for RN the
/// first qubit is the left tensor factor of the generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gate {
    kind: GateKind,
    targets: [usize; 2],
    param_slot: Option<usize>,
}

impl Gate {
    pub fn ry(qubit: usize, slot: usize) -> Self {
        Self { kind: GateKind::Ry, targets: [qubit, qubit], param_slot: Some(slot) }
    }

    pub fn rz(qubit: usize, slot: usize) -> Self {
        Self { kind: GateKind::Rz, targets: [qubit, qubit], param_slot: Some(slot) }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self { kind: GateKind::Cnot, targets: [control, target], param_slot: None }
    }

    pub fn rn(first: usize, second: usize, slot: usize) -> Self {
        Self { kind: GateKind::Rn, targets: [first, second], param_slot: Some(slot) }
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets[..self.kind.arity()]
    }

    pub fn param_slot(&self) -> Option<usize> {
        self.param_slot
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        for &q in self.targets() {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
            }
        }
        if self.kind.arity() == 2 && self.targets[0] == self.targets[1] {
            return Err(Error::DuplicateQubits(self.targets[0]));
        }
        match (self.kind.is_parametric(), self.param_slot) {
            (true, None) => Err(Error::ParameterMismatch {
                gate: self.kind.name(),
                detail: "needs a parameter slot",
            }),
            (false, Some(_)) => Err(Error::ParameterMismatch {
                gate: self.kind.name(),
                detail: "cannot carry a parameter slot",
            }),
            _ => Ok(()),
        }
    }

    /// Dense unitary on the gate's own qubits. Two-qubit matrices use the
    /// basis `|q_first q_second⟩` with `q_first` as the high bit.
    pub fn local_matrix(&self, theta: f64) -> Vec<Vec<Complex64>> {
        match self.kind {
            GateKind::Ry => {
                let (s, c) = (theta / 2.0).sin_cos();
                vec![vec![c.into(), (-s).into()], vec![s.into(), c.into()]]
            }
            GateKind::Rz => {
                let phase = Complex64::from_polar(1.0, theta / 2.0);
                vec![vec![phase.conj(), ZERO], vec![ZERO, phase]]
            }
            GateKind::Cnot => {
                let mut m = vec![vec![ZERO; 4]; 4];
                m[0][0] = ONE;
                m[1][1] = ONE;
                m[2][3] = ONE;
                m[3][2] = ONE;
                m
            }
            GateKind::Rn => {
                let u = rn_matrix(theta);
                (0..4).map(|r| (0..4).map(|c| u[(r, c)]).collect()).collect()
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        let qs: Vec<String> = self.targets().iter().map(|q| q.to_string()).collect();
        write!(f, "({})", qs.join(","))?;
        if let Some(slot) = self.param_slot {
            write!(f, "[θ{slot}]")?;
        }
        Ok(())
    }
}

/// `exp(iθ/2 (σx⊗σy − σy⊗σx))` in the basis `|00⟩, |01⟩, |10⟩, |11⟩`.
///
/// The generator annihilates `|00⟩` and `|11⟩`; on `{|01⟩, |10⟩}` the
/// exponential is the real rotation `|01⟩ → cos θ |01⟩ + sin θ |10⟩`.
pub fn rn_matrix(theta: f64) -> Matrix4<Complex64> {
    let (s, c) = theta.sin_cos();
    let mut u = Matrix4::identity();
    u[(1, 1)] = c.into();
    u[(2, 1)] = s.into();
    u[(1, 2)] = (-s).into();
    u[(2, 2)] = c.into();
    u
}

#[inline]
fn insert_zero_bit(x: usize, pos: usize) -> usize {
    let low = x & ((1usize << pos) - 1);
    ((x >> pos) << (pos + 1)) | low
}

fn ry_kernel(amps: &mut [Complex64], q: usize, theta: f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    let stride = 1usize << q;
    for block in amps.chunks_exact_mut(stride << 1) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            let x0 = *a0;
            let x1 = *a1;
            *a0 = x0 * c - x1 * s;
            *a1 = x0 * s + x1 * c;
        }
    }
}

fn rz_kernel(amps: &mut [Complex64], q: usize, theta: f64) {
    let phase = Complex64::from_polar(1.0, theta / 2.0);
    let (p0, p1) = (phase.conj(), phase);
    let stride = 1usize << q;
    for block in amps.chunks_exact_mut(stride << 1) {
        let (lo, hi) = block.split_at_mut(stride);
        lo.iter_mut().for_each(|a| *a *= p0);
        hi.iter_mut().for_each(|a| *a *= p1);
    }
}

fn cnot_kernel(amps: &mut [Complex64], control: usize, target: usize) {
    let (lo, hi) = (control.min(target), control.max(target));
    let (cm, tm) = (1usize << control, 1usize << target);
    for k in 0..amps.len() >> 2 {
        let base = insert_zero_bit(insert_zero_bit(k, lo), hi);
        amps.swap(base | cm, base | cm | tm);
    }
}

fn rn_kernel(amps: &mut [Complex64], first: usize, second: usize, theta: f64) {
    let (s, c) = theta.sin_cos();
    let (lo, hi) = (first.min(second), first.max(second));
    let (fm, sm) = (1usize << first, 1usize << second);
    for k in 0..amps.len() >> 2 {
        let base = insert_zero_bit(insert_zero_bit(k, lo), hi);
        // |q_first q_second⟩ = |01⟩ and |10⟩
        let i01 = base | sm;
        let i10 = base | fm;
        let a01 = amps[i01];
        let a10 = amps[i10];
        amps[i01] = a01 * c - a10 * s;
        amps[i10] = a01 * s + a10 * c;
    }
}

/// Ordered gate list over a flat parameter vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    n_params: usize,
}

impl Circuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidCircuit("zero qubits".into()));
        }
        for g in &gates {
            g.validate(n_qubits)?;
        }
        let n_params = gates
            .iter()
            .filter_map(|g| g.param_slot)
            .max()
            .map_or(0, |m| m + 1);
        let mut used = vec![false; n_params];
        for slot in gates.iter().filter_map(|g| g.param_slot) {
            used[slot] = true;
        }
        if let Some(missing) = used.iter().position(|u| !u) {
            return Err(Error::InvalidCircuit(format!(
                "parameter slot {missing} is not referenced by any gate"
            )));
        }
        Ok(Self { n_qubits, gates, n_params })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    pub fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params {
            return Err(Error::DimensionMismatch { expected: self.n_params, found: theta.len() });
        }
        if let Some(i) = theta.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFinite(format!("parameter {i}")));
        }
        Ok(())
    }

    /// Applies the whole circuit to `|0...0⟩`.
    pub fn prepare(&self, theta: &[f64]) -> Result<StateVector> {
        self.check_params(theta)?;
        let mut state = StateVector::zero(self.n_qubits)?;
        self.apply_range(&mut state, theta, 0..self.gates.len());
        Ok(state)
    }

    /// Applies gates `range` in order. Parameters must already be checked.
    pub(crate) fn apply_range(
        &self,
        state: &mut StateVector,
        theta: &[f64],
        range: std::ops::Range<usize>,
    ) {
        for gate in &self.gates[range] {
            let angle = gate.param_slot.map_or(0.0, |s| theta[s]);
            state.apply_unchecked(gate, angle);
        }
    }

    /// One line per qubit, one column per gate.
    pub fn diagram(&self) -> String {
        let width: usize = 8;
        let mut rows: Vec<String> = (0..self.n_qubits).map(|q| format!("q{q:<3}")).collect();
        for gate in &self.gates {
            let label = match gate.param_slot {
                Some(s) => format!("{}{}", gate.kind.name(), s),
                None => gate.kind.name().to_string(),
            };
            let ts = gate.targets();
            let (lo, hi) = (*ts.iter().min().unwrap(), *ts.iter().max().unwrap());
            for (q, row) in rows.iter_mut().enumerate() {
                let cell = if ts.len() == 2 && gate.kind == GateKind::Cnot {
                    if q == ts[0] {
                        "●".to_string()
                    } else if q == ts[1] {
                        "⊕".to_string()
                    } else if q > lo && q < hi {
                        "│".to_string()
                    } else {
                        String::new()
                    }
                } else if ts.contains(&q) {
                    label.clone()
                } else if q > lo && q < hi {
                    "│".to_string()
                } else {
                    String::new()
                };
                let pad = width.saturating_sub(cell.chars().count());
                let left = pad / 2;
                row.push_str(&"─".repeat(left));
                row.push_str(&cell);
                row.push_str(&"─".repeat(pad - left));
            }
        }
        rows.join("\n")
    }
}

/// `⟨ψ|H|ψ⟩` evaluated term by term. The imaginary residue is checked and dropped.
pub fn expectation(state: &StateVector, observable: &PauliSum) -> Result<f64> {
    if observable.n_qubits() != state.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: state.n_qubits(),
            found: observable.n_qubits(),
        });
    }
    let amps = state.amplitudes();
    let mut total = ZERO;
    for term in observable.terms() {
        let flip = term.x_mask();
        let mut acc = ZERO;
        for (x, a) in amps.iter().enumerate() {
            acc += amps[x ^ flip].conj() * term.phase(x) * a;
        }
        total += acc * term.coefficient();
    }
    let scale = observable.terms().iter().map(|t| t.coefficient().abs()).sum::<f64>().max(1.0);
    debug_assert!(total.im.abs() < 1e-10 * scale, "non-real expectation {total}");
    Ok(total.re)
}
