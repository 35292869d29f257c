//! Cost functions, the quasi-Newton VQE loop, penalty schedules and sweeps.

mod lbfgs;
mod sweep;

pub use lbfgs::{minimize_lbfgs, LbfgsConfig, LbfgsReport, Objective, Termination};
pub use sweep::{
    chained_sweep, crossings, exact_point, run_sweep, run_sweep_with, transition_detect,
    CheckThresholds, Diagnostic, ExactPoint, ModelSpec, PointRecord, Strategy, SweepPlan,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::{concurrence, fidelity, purity, reduced_density_matrix};
use crate::error::{Error, Result};
use crate::hamiltonians::{exact_ground, PauliSum, SparseOperator, SpectrumResult};
use crate::qstate::{Circuit, StateVector};

/// Number of low-lying exact levels kept as the reference.
pub const REFERENCE_LEVELS: usize = 6;

/// `E(θ) − η C[ρ_edge] + τ P[ρ_nn]`.
#[derive(Clone, Debug)]
pub struct CostSpec {
    hamiltonian: PauliSum,
    operator: SparseOperator,
    pub eta: f64,
    pub tau: f64,
    pub edge_pair: (usize, usize),
    pub nn_pair: (usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostTerms {
    pub energy: f64,
    pub edge_concurrence: f64,
    pub nn_purity: f64,
    pub total: f64,
}

impl CostSpec {
    /// Plain energy cost; the pairs are still used for diagnostics.
    pub fn new(hamiltonian: PauliSum, edge_pair: (usize, usize), nn_pair: (usize, usize)) -> Self {
        let operator = hamiltonian.to_sparse();
        Self { hamiltonian, operator, eta: 0.0, tau: 0.0, edge_pair, nn_pair }
    }

    pub fn with_penalties(mut self, eta: f64, tau: f64) -> Result<Self> {
        if !(eta >= 0.0 && tau >= 0.0 && eta.is_finite() && tau.is_finite()) {
            return Err(Error::InvalidParams(format!("penalty weights eta={eta}, tau={tau}")));
        }
        self.eta = eta;
        self.tau = tau;
        Ok(self)
    }

    pub fn energy_only(&self) -> Self {
        Self { eta: 0.0, tau: 0.0, ..self.clone() }
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.hamiltonian
    }

    pub fn energy(&self, state: &StateVector) -> f64 {
        self.operator.expectation(state.amplitudes())
    }

    /// Cost of `state`, computing only the penalty terms with non-zero weight.
    pub fn value(&self, state: &StateVector) -> Result<f64> {
        let mut c = self.energy(state);
        if self.eta != 0.0 {
            c -= self.eta * concurrence(&reduced_density_matrix(state, self.edge_pair)?)?;
        }
        if self.tau != 0.0 {
            c += self.tau * purity(&reduced_density_matrix(state, self.nn_pair)?);
        }
        Ok(c)
    }

    /// All terms, including the diagnostics that carry zero weight.
    pub fn terms(&self, state: &StateVector) -> Result<CostTerms> {
        let energy = self.energy(state);
        let edge_concurrence = concurrence(&reduced_density_matrix(state, self.edge_pair)?)?;
        let nn_purity = purity(&reduced_density_matrix(state, self.nn_pair)?);
        let total = energy - self.eta * edge_concurrence + self.tau * nn_purity;
        Ok(CostTerms { energy, edge_concurrence, nn_purity, total })
    }
}

/// Cost of the state that `circuit` prepares from `theta`.
pub fn cost(theta: &[f64], circuit: &Circuit, spec: &CostSpec) -> Result<f64> {
    spec.value(&circuit.prepare(theta)?)
}

/// Circuit cost with central finite-difference gradients. Prefix states are
/// cached so each perturbed evaluation only replays the gates after the
/// perturbed one.
pub struct CircuitObjective<'a> {
    circuit: &'a Circuit,
    spec: &'a CostSpec,
    step: f64,
    /// For each slot, the index of its gate when the slot is used exactly once.
    single_gate: Vec<Option<usize>>,
}

impl<'a> CircuitObjective<'a> {
    pub fn new(circuit: &'a Circuit, spec: &'a CostSpec, step: f64) -> Self {
        let mut uses = vec![Vec::new(); circuit.n_params()];
        for (k, g) in circuit.gates().iter().enumerate() {
            if let Some(s) = g.param_slot() {
                uses[s].push(k);
            }
        }
        let single_gate = uses.iter().map(|u| (u.len() == 1).then(|| u[0])).collect();
        Self { circuit, spec, step, single_gate }
    }

    fn eval_state(&self, state: &StateVector) -> f64 {
        self.spec.value(state).unwrap_or(f64::NAN)
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        match self.circuit.prepare(theta) {
            Ok(s) => self.eval_state(&s),
            Err(_) => f64::NAN,
        }
    }

    /// Central differences `(c(θ+h e_p) − c(θ−h e_p)) / 2h` for every slot.
    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let n_gates = self.circuit.gates().len();
        if self.circuit.check_params(theta).is_err() {
            return vec![f64::NAN; theta.len()];
        }
        let mut prefix = Vec::with_capacity(n_gates + 1);
        let mut s = StateVector::zero(self.circuit.n_qubits()).expect("valid register");
        prefix.push(s.clone());
        for k in 0..n_gates {
            self.circuit.apply_range(&mut s, theta, k..k + 1);
            prefix.push(s.clone());
        }
        let h = self.step;
        (0..theta.len())
            .into_par_iter()
            .map(|p| {
                let shifted = |sign: f64| -> f64 {
                    let mut t = theta.to_vec();
                    t[p] += sign * h;
                    match self.single_gate[p] {
                        Some(k) => {
                            let mut st = prefix[k].clone();
                            self.circuit.apply_range(&mut st, &t, k..n_gates);
                            self.eval_state(&st)
                        }
                        None => self.value(&t),
                    }
                };
                (shifted(1.0) - shifted(-1.0)) / (2.0 * h)
            })
            .collect()
    }
}

impl Objective for CircuitObjective<'_> {
    fn dim(&self) -> usize {
        self.circuit.n_params()
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let f = self.value(x);
        if !f.is_finite() {
            grad.iter_mut().for_each(|g| *g = f64::NAN);
            return f;
        }
        grad.copy_from_slice(&self.gradient(x));
        f
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSettings {
    pub max_iterations: usize,
    /// Central-difference step in radians.
    pub gradient_step: f64,
    pub cost_tolerance: f64,
    pub gradient_tolerance: f64,
    pub memory: usize,
    pub param_bounds: Option<(f64, f64)>,
    pub seed: u64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            gradient_step: 1e-6,
            cost_tolerance: 1e-9,
            gradient_tolerance: 1e-8,
            memory: 10,
            param_bounds: None,
            seed: 0,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.gradient_step)
            || !positive(self.cost_tolerance)
            || !positive(self.gradient_tolerance)
        {
            return Err(Error::InvalidParams("optimizer steps and tolerances must be > 0".into()));
        }
        if self.memory == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidParams("optimizer memory and iterations must be > 0".into()));
        }
        if let Some((lo, hi)) = self.param_bounds {
            if !(lo < hi) {
                return Err(Error::InvalidParams(format!("empty bounds [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    fn lbfgs(&self) -> LbfgsConfig {
        LbfgsConfig {
            memory: self.memory,
            max_iterations: self.max_iterations,
            ftol: self.cost_tolerance,
            gtol: self.gradient_tolerance,
            bounds: self.param_bounds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VqeOutcome {
    pub theta_opt: Vec<f64>,
    pub energy: f64,
    /// Value of the cost that was minimized (equal to `energy` without penalties).
    pub cost: f64,
    pub exact_energy: f64,
    pub fidelity: f64,
    pub subspace_fidelity: f64,
    /// True when the exact ground level is degenerate within the oracle tolerance.
    pub degenerate_reference: bool,
    pub edge_concurrence: f64,
    pub nn_purity: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub diverged: bool,
    pub termination: Termination,
    pub restarts_used: usize,
}

impl VqeOutcome {
    /// Plain fidelity, or the subspace fidelity when the exact ground level
    /// is degenerate and the single reference vector is arbitrary.
    pub fn reference_fidelity(&self) -> f64 {
        if self.degenerate_reference {
            self.subspace_fidelity
        } else {
            self.fidelity
        }
    }
}

/// Circuit, cost and exact reference bundled for repeated minimizations.
#[derive(Clone, Debug)]
pub struct VqeProblem {
    circuit: Circuit,
    spec: CostSpec,
    reference: SpectrumResult,
}

impl VqeProblem {
    pub fn new(circuit: Circuit, spec: CostSpec) -> Result<Self> {
        let reference = exact_ground(spec.hamiltonian(), REFERENCE_LEVELS)?;
        Self::with_reference(circuit, spec, reference)
    }

    pub fn with_reference(circuit: Circuit, spec: CostSpec, reference: SpectrumResult) -> Result<Self> {
        let n = spec.hamiltonian().n_qubits();
        if circuit.n_qubits() != n || reference.ground_state.n_qubits() != n {
            return Err(Error::DimensionMismatch { expected: n, found: circuit.n_qubits() });
        }
        Ok(Self { circuit, spec, reference })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn spec(&self) -> &CostSpec {
        &self.spec
    }

    pub fn reference(&self) -> &SpectrumResult {
        &self.reference
    }

    pub fn with_spec(&self, spec: CostSpec) -> Self {
        Self { spec, ..self.clone() }
    }

    /// Uniform draw from `[−π, π]^n`.
    pub fn random_start(&self, rng: &mut impl Rng) -> Vec<f64> {
        use std::f64::consts::PI;
        (0..self.circuit.n_params()).map(|_| rng.gen_range(-PI..PI)).collect()
    }

    pub fn seeded_start(&self, seed: u64) -> Vec<f64> {
        self.random_start(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Diagnostics for an arbitrary parameter vector.
    pub fn evaluate(&self, theta: &[f64]) -> Result<VqeOutcome> {
        self.circuit.check_params(theta)?;
        let report = LbfgsReport {
            x: theta.to_vec(),
            f: cost(theta, &self.circuit, &self.spec)?,
            iterations: 0,
            evaluations: 1,
            termination: Termination::CostTolerance,
        };
        self.outcome(report)
    }

    fn outcome(&self, report: LbfgsReport) -> Result<VqeOutcome> {
        let diverged = report.termination == Termination::NonFinite;
        let state = self.circuit.prepare(&report.x)?;
        let terms = self.spec.terms(&state)?;
        Ok(VqeOutcome {
            energy: terms.energy,
            cost: report.f,
            exact_energy: self.reference.ground_energy(),
            fidelity: fidelity(&state, &self.reference.ground_state)?,
            subspace_fidelity: self.reference.subspace_fidelity(&state)?,
            degenerate_reference: self.reference.is_degenerate(),
            edge_concurrence: terms.edge_concurrence,
            nn_purity: terms.nn_purity,
            iterations: report.iterations,
            evaluations: report.evaluations,
            converged: report.termination.is_converged(),
            diverged,
            termination: report.termination,
            restarts_used: 0,
            theta_opt: report.x,
        })
    }

    /// One L-BFGS run on the current cost. A non-finite cost ends the run and
    /// is reported through `diverged`.
    pub fn minimize(&self, theta0: &[f64], settings: &OptimizerSettings) -> Result<VqeOutcome> {
        settings.validate()?;
        self.circuit.check_params(theta0)?;
        let objective = CircuitObjective::new(&self.circuit, &self.spec, settings.gradient_step);
        let report = minimize_lbfgs(&objective, theta0, &settings.lbfgs());
        if report.termination == Termination::NonFinite {
            // keep the last finite parameters' diagnostics out of the picture
            let mut out = self.outcome(LbfgsReport { x: theta0.to_vec(), ..report.clone() })?;
            out.energy = f64::NAN;
            out.cost = report.f;
            return Ok(out);
        }
        self.outcome(report)
    }

    /// Restarts the minimization for each `η` in `schedule`, threading the
    /// optimum through; `τ` stays at the problem's value.
    pub fn eta_schedule_minimize(
        &self,
        theta0: &[f64],
        settings: &OptimizerSettings,
        schedule: &[f64],
    ) -> Result<VqeOutcome> {
        if schedule.is_empty() {
            return Err(Error::InvalidParams("empty eta schedule".into()));
        }
        if schedule.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParams("eta schedule must be nondecreasing".into()));
        }
        let mut theta = theta0.to_vec();
        let mut last = None;
        let (mut iterations, mut evaluations) = (0, 0);
        for &eta in schedule {
            let spec = self.spec.clone().with_penalties(eta, self.spec.tau)?;
            let out = self.with_spec(spec).minimize(&theta, settings)?;
            iterations += out.iterations;
            evaluations += out.evaluations;
            if out.diverged {
                last = Some(out);
                break;
            }
            theta = out.theta_opt.clone();
            last = Some(out);
        }
        let mut out = last.expect("schedule is non-empty");
        out.iterations = iterations;
        out.evaluations = evaluations;
        out.restarts_used = schedule.len();
        Ok(out)
    }

    /// Energy-only minimization started from a penalized optimum.
    pub fn warm_start_refine(&self, theta: &[f64], settings: &OptimizerSettings) -> Result<VqeOutcome> {
        self.with_spec(self.spec.energy_only()).minimize(theta, settings)
    }

    /// Independent runs from `starts`, keeping the lowest final cost (first on ties).
    pub fn best_of(
        &self,
        starts: &[Vec<f64>],
        run: impl Fn(&Self, &[f64]) -> Result<VqeOutcome> + Sync,
    ) -> Result<VqeOutcome> {
        let outcomes: Vec<VqeOutcome> = starts
            .par_iter()
            .map(|t| run(self, t))
            .collect::<Result<Vec<_>>>()?;
        let best = outcomes
            .into_iter()
            .enumerate()
            .filter(|(_, o)| !o.diverged)
            .min_by(|a, b| a.1.cost.total_cmp(&b.1.cost).then(a.0.cmp(&b.0)));
        best.map(|(_, o)| o)
            .ok_or_else(|| Error::NonFinite("every start diverged".into()))
    }
}

/// Single minimization against a freshly computed exact reference.
pub fn minimize(
    circuit: &Circuit,
    spec: &CostSpec,
    theta0: &[f64],
    settings: &OptimizerSettings,
) -> Result<VqeOutcome> {
    VqeProblem::new(circuit.clone(), spec.clone())?.minimize(theta0, settings)
}

pub fn eta_schedule_minimize(
    circuit: &Circuit,
    spec: &CostSpec,
    theta0: &[f64],
    settings: &OptimizerSettings,
    schedule: &[f64],
) -> Result<VqeOutcome> {
    VqeProblem::new(circuit.clone(), spec.clone())?.eta_schedule_minimize(theta0, settings, schedule)
}

pub fn warm_start_refine(
    circuit: &Circuit,
    hamiltonian: &PauliSum,
    edge_pair: (usize, usize),
    nn_pair: (usize, usize),
    theta_from_penalized: &[f64],
    settings: &OptimizerSettings,
) -> Result<VqeOutcome> {
    let spec = CostSpec::new(hamiltonian.clone(), edge_pair, nn_pair);
    VqeProblem::new(circuit.clone(), spec)?.warm_start_refine(theta_from_penalized, settings)
}

/// Deterministic seed for `(base, point, attempt, start)` draws.
pub(crate) fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    // splitmix64 over the parts
    let mut z = base;
    for &p in parts {
        z = z.wrapping_add(p.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}
