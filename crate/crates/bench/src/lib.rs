//! Fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topovqe_core::ansatz::AnsatzFamily;
use topovqe_core::qstate::{Circuit, StateVector};
use topovqe_core::vqe::ModelSpec;
use topovqe_core::{AnsatzSpec, CostSpec};

pub fn random_angles(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
}

pub fn problem_inspired(n: usize) -> Circuit {
    AnsatzSpec::with_default_layers(AnsatzFamily::ProblemInspired, n).build().unwrap()
}

pub fn hardware_efficient(n: usize) -> Circuit {
    AnsatzSpec::with_default_layers(AnsatzFamily::HardwareEfficient, n).build().unwrap()
}

pub fn random_state(circuit: &Circuit, seed: u64) -> StateVector {
    circuit.prepare(&random_angles(circuit.n_params(), seed)).unwrap()
}

pub fn ssh_cost(n: usize, delta: f64) -> CostSpec {
    ModelSpec::Ssh { n_sites: n }.cost_spec(delta).unwrap()
}

pub fn kitaev_cost(n: usize, mu_over_t: f64) -> CostSpec {
    ModelSpec::Kitaev { n_sites: n, t: 1.0, delta_pair: 1.2 }.cost_spec(mu_over_t).unwrap()
}
