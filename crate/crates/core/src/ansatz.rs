//! Circuit families: hardware-efficient, real-amplitudes and the
//! number-preserving problem-inspired layout.
//!
//! Parameter slots are numbered in gate order. Every family ends with a
//! trailing rotation layer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{Circuit, Gate, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzFamily {
    HardwareEfficient,
    RealAmplitudes,
    ProblemInspired,
}

impl AnsatzFamily {
    /// `⌈log₂ n⌉ + 1` for the problem-inspired circuit, 3 otherwise.
    pub fn default_layers(self, n_qubits: usize) -> usize {
        match self {
            AnsatzFamily::ProblemInspired => ceil_log2(n_qubits) + 1,
            _ => 3,
        }
    }
}

fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

fn default_edge_link() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSpec {
    pub family: AnsatzFamily,
    pub n_qubits: usize,
    pub layers: usize,
    /// Only read by the problem-inspired family.
    #[serde(default = "default_edge_link")]
    pub edge_link: bool,
}

impl AnsatzSpec {
    pub fn new(family: AnsatzFamily, n_qubits: usize, layers: usize) -> Self {
        Self { family, n_qubits, layers, edge_link: true }
    }

    pub fn with_default_layers(family: AnsatzFamily, n_qubits: usize) -> Self {
        Self::new(family, n_qubits, family.default_layers(n_qubits))
    }

    pub fn build(&self) -> Result<Circuit> {
        match self.family {
            AnsatzFamily::HardwareEfficient => build_hardware_efficient(self.n_qubits, self.layers),
            AnsatzFamily::RealAmplitudes => build_real_amplitudes(self.n_qubits, self.layers),
            AnsatzFamily::ProblemInspired => {
                build_problem_inspired(self.n_qubits, self.layers, self.edge_link)
            }
        }
    }
}

struct Builder {
    gates: Vec<Gate>,
    next: usize,
}

impl Builder {
    fn new() -> Self {
        Self { gates: Vec::new(), next: 0 }
    }

    fn slot(&mut self) -> usize {
        self.next += 1;
        self.next - 1
    }

    fn ry_layer(&mut self, n: usize) {
        for q in 0..n {
            let s = self.slot();
            self.gates.push(Gate::ry(q, s));
        }
    }

    fn rz_layer(&mut self, n: usize) {
        for q in 0..n {
            let s = self.slot();
            self.gates.push(Gate::rz(q, s));
        }
    }

    fn cnot_ladder(&mut self, n: usize) {
        self.gates.extend((0..n - 1).map(|q| Gate::cnot(q, q + 1)));
    }

    fn rn(&mut self, a: usize, b: usize) {
        let s = self.slot();
        self.gates.push(Gate::rn(a, b, s));
    }

    fn finish(self, n: usize) -> Result<Circuit> {
        Circuit::new(n, self.gates)
    }
}

fn check_size(n: usize, layers: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidCircuit(format!("ansatz needs at least 2 qubits, got {n}")));
    }
    if layers == 0 {
        return Err(Error::InvalidCircuit("ansatz needs at least one layer".into()));
    }
    Ok(())
}

/// `d × [RY layer, RZ layer, CNOT ladder]` then RY+RZ; `2n(d+1)` parameters.
pub fn build_hardware_efficient(n: usize, d: usize) -> Result<Circuit> {
    check_size(n, d)?;
    let mut b = Builder::new();
    for _ in 0..d {
        b.ry_layer(n);
        b.rz_layer(n);
        b.cnot_ladder(n);
    }
    b.ry_layer(n);
    b.rz_layer(n);
    b.finish(n)
}

/// `d × [RY layer, CNOT ladder]` then RY; `n(d+1)` parameters, real amplitudes throughout.
pub fn build_real_amplitudes(n: usize, d: usize) -> Result<Circuit> {
    check_size(n, d)?;
    let mut b = Builder::new();
    for _ in 0..d {
        b.ry_layer(n);
        b.cnot_ladder(n);
    }
    b.ry_layer(n);
    b.finish(n)
}

/// `L × [RY layer, RN on (0,1),(2,3),…, RN on (1,2),(3,4),…, RN on (0,n−1)]` then RY.
/// With the edge link that is `2n` parameters per layer plus `n`.
pub fn build_problem_inspired(n: usize, layers: usize, edge_link: bool) -> Result<Circuit> {
    check_size(n, layers)?;
    if n % 2 != 0 {
        return Err(Error::InvalidCircuit(format!(
            "problem-inspired ansatz needs an even qubit count, got {n}"
        )));
    }
    let mut b = Builder::new();
    for _ in 0..layers {
        b.ry_layer(n);
        for q in (0..n - 1).step_by(2) {
            b.rn(q, q + 1);
        }
        for q in (1..n - 1).step_by(2) {
            b.rn(q, q + 1);
        }
        if edge_link {
            b.rn(0, n - 1);
        }
    }
    b.ry_layer(n);
    b.finish(n)
}

/// Binds `theta` and runs the circuit on `|0…0⟩`.
pub fn prepare(circuit: &Circuit, theta: &[f64]) -> Result<StateVector> {
    circuit.prepare(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::GateKind;

    #[test]
    fn hardware_efficient_counts() {
        let c = build_hardware_efficient(2, 1).unwrap();
        assert_eq!((c.n_params(), c.count(GateKind::Cnot)), (8, 1));
        let c = build_hardware_efficient(6, 3).unwrap();
        assert_eq!((c.n_params(), c.count(GateKind::Cnot)), (48, 15));
    }

    #[test]
    fn real_amplitudes_counts() {
        assert_eq!(build_real_amplitudes(2, 1).unwrap().n_params(), 4);
    }

    #[test]
    fn problem_inspired_default_layers() {
        assert_eq!(AnsatzFamily::ProblemInspired.default_layers(6), 4);
        assert_eq!(AnsatzFamily::ProblemInspired.default_layers(4), 3);
        assert_eq!(AnsatzFamily::ProblemInspired.default_layers(8), 4);
        assert_eq!(AnsatzFamily::ProblemInspired.default_layers(12), 5);
        assert_eq!(AnsatzFamily::HardwareEfficient.default_layers(12), 3);
        assert_eq!(build_problem_inspired(6, 4, true).unwrap().n_params(), 54);
    }

    #[test]
    fn size_errors() {
        assert!(build_hardware_efficient(1, 3).is_err());
        assert!(build_real_amplitudes(1, 3).is_err());
        assert!(build_problem_inspired(5, 2, true).is_err());
        assert!(build_problem_inspired(0, 2, true).is_err());
        assert!(build_hardware_efficient(4, 0).is_err());
    }

    #[test]
    fn zero_angles_give_vacuum() {
        for spec in [
            AnsatzSpec::new(AnsatzFamily::HardwareEfficient, 5, 3),
            AnsatzSpec::new(AnsatzFamily::RealAmplitudes, 4, 2),
            AnsatzSpec::new(AnsatzFamily::ProblemInspired, 6, 4),
        ] {
            let c = spec.build().unwrap();
            let s = prepare(&c, &vec![0.0; c.n_params()]).unwrap();
            assert_eq!(s, StateVector::zero(spec.n_qubits).unwrap());
        }
    }

    #[test]
    fn spec_toml_form() {
        let spec: AnsatzSpec =
            serde_json::from_str(r#"{"family":"problem_inspired","n_qubits":6,"layers":4}"#)
                .unwrap();
        assert!(spec.edge_link);
        assert_eq!(spec.family, AnsatzFamily::ProblemInspired);
    }
}
