//! Parameter sweeps over δ (SSH) or μ/t (Kitaev), exact-state sweeps and
//! transition detection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, CostSpec, OptimizerSettings, VqeOutcome, VqeProblem, REFERENCE_LEVELS};
use crate::ansatz::AnsatzSpec;
use crate::entanglement::{concurrence, purity, reduced_density_matrix};
use crate::error::{Error, Result};
use crate::hamiltonians::{
    exact_ground, kitaev_hamiltonian, kitaev_phase_boundaries, ssh_hamiltonian, KitaevParams,
    PauliSum, SshParams, SpectrumResult,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Swept parameter: δ.
    Ssh { n_sites: usize },
    /// Swept parameter: μ/t.
    Kitaev { n_sites: usize, t: f64, delta_pair: f64 },
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Ssh { .. } => "ssh",
            ModelSpec::Kitaev { .. } => "kitaev",
        }
    }

    pub fn n_sites(&self) -> usize {
        match *self {
            ModelSpec::Ssh { n_sites } | ModelSpec::Kitaev { n_sites, .. } => n_sites,
        }
    }

    pub fn hamiltonian(&self, x: f64) -> Result<PauliSum> {
        match *self {
            ModelSpec::Ssh { n_sites } => ssh_hamiltonian(&SshParams::new(n_sites, x)?),
            ModelSpec::Kitaev { n_sites, t, delta_pair } => {
                kitaev_hamiltonian(&KitaevParams::new(n_sites, x * t, t, delta_pair)?)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelSpec::Ssh { n_sites } => SshParams::new(n_sites, 0.0).map(|_| ()),
            ModelSpec::Kitaev { n_sites, t, delta_pair } => {
                let p = KitaevParams::new(n_sites, 0.0, t, delta_pair)?;
                p.mu_over_t().map(|_| ())
            }
        }
    }

    /// First and last qubit.
    pub fn edge_pair(&self) -> (usize, usize) {
        (0, self.n_sites() - 1)
    }

    /// SSH: the intra-cell (hopping `v`) pair nearest the chain centre.
    /// Kitaev: the two central sites.
    pub fn nn_pair(&self) -> (usize, usize) {
        let n = self.n_sites();
        let left = match self {
            ModelSpec::Ssh { .. } => {
                let c = n / 2 - 1;
                c - c % 2
            }
            ModelSpec::Kitaev { .. } => n / 2 - 1,
        };
        (left, left + 1)
    }

    /// Concurrence of the edges for SSH, purity of the central pair for Kitaev.
    pub fn check_diagnostic(&self) -> Diagnostic {
        match self {
            ModelSpec::Ssh { .. } => Diagnostic::Concurrence,
            ModelSpec::Kitaev { .. } => Diagnostic::Purity,
        }
    }

    /// Whether `x` lies in the trivial phase of the infinite chain.
    pub fn is_trivial(&self, x: f64) -> bool {
        match self {
            ModelSpec::Ssh { .. } => x < 0.0,
            ModelSpec::Kitaev { .. } => {
                let (lo, hi) = kitaev_phase_boundaries();
                x < lo || x > hi
            }
        }
    }

    pub fn cost_spec(&self, x: f64) -> Result<CostSpec> {
        Ok(CostSpec::new(self.hamiltonian(x)?, self.edge_pair(), self.nn_pair()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    Concurrence,
    Purity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Energy only, independent random starts at every point.
    Plain,
    /// η schedule with fixed τ at every point.
    Penalized,
    /// η schedule, then an energy-only refinement from its optimum.
    PenalizedThenWarmstart,
    /// Energy only, each point started from the previous optimum, with the
    /// trivial-phase acceptance check on the first point.
    Chained,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckThresholds {
    pub concurrence_max_trivial: f64,
    pub purity_min_trivial: f64,
}

impl Default for CheckThresholds {
    fn default() -> Self {
        Self { concurrence_max_trivial: 0.1, purity_min_trivial: 0.9 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlan {
    pub model: ModelSpec,
    pub grid: Vec<f64>,
    pub ansatz: AnsatzSpec,
    pub strategy: Strategy,
    pub n_first_guesses: usize,
    pub thresholds: CheckThresholds,
    pub eta_schedule: Vec<f64>,
    pub tau: f64,
    /// Chained strategy only: thread the previous optimum through the grid.
    pub chain: bool,
    /// Chained strategy only: apply the first-point acceptance check.
    pub checks: bool,
    /// Extra random pools tried when a point is rejected.
    pub retry_cap: usize,
    pub seed: u64,
}

impl SweepPlan {
    pub fn new(model: ModelSpec, grid: Vec<f64>, ansatz: AnsatzSpec, strategy: Strategy) -> Self {
        Self {
            model,
            grid,
            ansatz,
            strategy,
            n_first_guesses: 10,
            thresholds: CheckThresholds::default(),
            eta_schedule: vec![0.5, 1.0, 2.0, 4.0, 8.0],
            tau: 1.0,
            chain: true,
            checks: true,
            retry_cap: 3,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.ansatz.n_qubits != self.model.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: self.model.n_sites(),
                found: self.ansatz.n_qubits,
            });
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidParams("empty sweep grid".into()));
        }
        if self.grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("sweep grid".into()));
        }
        let increasing = self.grid.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.grid.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::InvalidParams("sweep grid must be strictly monotone".into()));
        }
        for &x in &self.grid {
            self.model.hamiltonian(x)?;
        }
        if self.n_first_guesses == 0 {
            return Err(Error::InvalidParams("n_first_guesses must be >= 1".into()));
        }
        if matches!(self.strategy, Strategy::Penalized | Strategy::PenalizedThenWarmstart) {
            if self.eta_schedule.is_empty() || self.eta_schedule.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidParams("eta schedule must be nonempty and nondecreasing".into()));
            }
            if self.eta_schedule.iter().chain([&self.tau]).any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::InvalidParams("penalty weights must be finite and >= 0".into()));
            }
        }
        if self.strategy == Strategy::Chained && self.checks && !self.model.is_trivial(self.grid[0]) {
            return Err(Error::InvalidParams(format!(
                "checked sweep must start in the trivial phase, first point is {}",
                self.grid[0]
            )));
        }
        self.ansatz.build().map(|_| ())
    }

    fn passes_check(&self, out: &VqeOutcome) -> bool {
        match self.model.check_diagnostic() {
            Diagnostic::Concurrence => out.edge_concurrence <= self.thresholds.concurrence_max_trivial,
            Diagnostic::Purity => out.nn_purity >= self.thresholds.purity_min_trivial,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    pub swept_param: f64,
    pub outcome: VqeOutcome,
    /// Check passed (first chained point) or run finished with a finite cost.
    pub accepted: bool,
    /// Random pools drawn beyond the first.
    pub retries: usize,
    /// Seed of the pool that produced the kept outcome.
    pub seed: u64,
}

fn random_pool(problem: &VqeProblem, base: u64, index: usize, attempt: usize, size: usize) -> (u64, Vec<Vec<f64>>) {
    let pool_seed = derive_seed(base, &[index as u64, attempt as u64]);
    let starts = (0..size).map(|k| problem.seeded_start(derive_seed(pool_seed, &[k as u64]))).collect();
    (pool_seed, starts)
}

fn solve_from(plan: &VqeProblem, strategy: Strategy, schedule: &[f64], theta0: &[f64], settings: &OptimizerSettings) -> Result<VqeOutcome> {
    match strategy {
        Strategy::Plain | Strategy::Chained => plan.minimize(theta0, settings),
        Strategy::Penalized => plan.eta_schedule_minimize(theta0, settings, schedule),
        Strategy::PenalizedThenWarmstart => {
            let penalized = plan.eta_schedule_minimize(theta0, settings, schedule)?;
            if penalized.diverged {
                return Ok(penalized);
            }
            let mut refined = plan.warm_start_refine(&penalized.theta_opt, settings)?;
            refined.iterations += penalized.iterations;
            refined.evaluations += penalized.evaluations;
            refined.restarts_used = penalized.restarts_used + 1;
            Ok(refined)
        }
    }
}

fn point_problem(plan: &SweepPlan, x: f64) -> Result<VqeProblem> {
    let spec = plan.model.cost_spec(x)?;
    let spec = match plan.strategy {
        Strategy::Penalized | Strategy::PenalizedThenWarmstart => spec.with_penalties(0.0, plan.tau)?,
        _ => spec,
    };
    let reference = exact_ground(spec.hamiltonian(), REFERENCE_LEVELS)?;
    VqeProblem::with_reference(plan.ansatz.build()?, spec, reference)
}

/// Best of one random pool at grid point `index`.
fn pooled_point(plan: &SweepPlan, problem: &VqeProblem, settings: &OptimizerSettings, index: usize, attempt: usize) -> Result<(u64, VqeOutcome)> {
    let (seed, starts) = random_pool(problem, plan.seed, index, attempt, plan.n_first_guesses);
    let out = problem.best_of(&starts, |p, t| solve_from(p, plan.strategy, &plan.eta_schedule, t, settings))?;
    Ok((seed, out))
}

/// Runs the sweep, handing each finished point to `on_point` in grid order.
///
/// A chained sweep whose first point never passes the acceptance check
/// returns [`Error::FirstPointRejected`]; later failures are recorded and the
/// sweep continues.
pub fn run_sweep_with(
    plan: &SweepPlan,
    settings: &OptimizerSettings,
    mut on_point: impl FnMut(&PointRecord),
) -> Result<Vec<PointRecord>> {
    plan.validate()?;
    settings.validate()?;
    if plan.strategy == Strategy::Chained && plan.chain {
        return chained(plan, settings, on_point);
    }
    // points are independent
    let records: Vec<PointRecord> = plan
        .grid
        .par_iter()
        .enumerate()
        .map(|(index, &x)| {
            let problem = point_problem(plan, x)?;
            let mut last = None;
            for attempt in 0..=plan.retry_cap {
                match pooled_point(plan, &problem, settings, index, attempt) {
                    Ok((seed, outcome)) => {
                        return Ok(PointRecord { index, swept_param: x, outcome, accepted: true, retries: attempt, seed });
                    }
                    Err(e) => last = Some(e),
                }
            }
            Err(last.expect("at least one attempt"))
        })
        .collect::<Result<_>>()?;
    records.iter().for_each(&mut on_point);
    Ok(records)
}

fn chained(plan: &SweepPlan, settings: &OptimizerSettings, mut on_point: impl FnMut(&PointRecord)) -> Result<Vec<PointRecord>> {
    let mut records: Vec<PointRecord> = Vec::with_capacity(plan.grid.len());
    for (index, &x) in plan.grid.iter().enumerate() {
        let problem = point_problem(plan, x)?;
        let record = if index == 0 {
            let mut found = None;
            for attempt in 0..=plan.retry_cap {
                let Ok((seed, out)) = pooled_point(plan, &problem, settings, index, attempt) else {
                    continue;
                };
                if !plan.checks || plan.passes_check(&out) {
                    found = Some(PointRecord { index, swept_param: x, outcome: out, accepted: true, retries: attempt, seed });
                    break;
                }
            }
            found.ok_or(Error::FirstPointRejected { attempts: plan.retry_cap + 1 })?
        } else {
            let prev = &records[index - 1];
            let mut out = problem.minimize(&prev.outcome.theta_opt, settings)?;
            let mut seed = prev.seed;
            let mut retries = 0;
            while out.diverged && retries < plan.retry_cap {
                retries += 1;
                if let Ok((s, o)) = pooled_point(plan, &problem, settings, index, retries) {
                    seed = s;
                    out = o;
                }
            }
            let accepted = !out.diverged;
            PointRecord { index, swept_param: x, outcome: out, accepted, retries, seed }
        };
        on_point(&record);
        records.push(record);
    }
    Ok(records)
}

pub fn run_sweep(plan: &SweepPlan, settings: &OptimizerSettings) -> Result<Vec<PointRecord>> {
    run_sweep_with(plan, settings, |_| {})
}

/// Chained sweep returning the outcomes only.
pub fn chained_sweep(plan: &SweepPlan, settings: &OptimizerSettings) -> Result<Vec<VqeOutcome>> {
    let plan = SweepPlan { strategy: Strategy::Chained, ..plan.clone() };
    Ok(run_sweep(&plan, settings)?.into_iter().map(|r| r.outcome).collect())
}

/// Every abscissa where `values − threshold` changes sign, linearly
/// interpolated between neighbouring grid points.
pub fn crossings(grid: &[f64], values: &[f64], threshold: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..grid.len().min(values.len()).saturating_sub(1) {
        let (a, b) = (values[k] - threshold, values[k + 1] - threshold);
        if a == 0.0 {
            out.push(grid[k]);
        } else if a * b < 0.0 {
            out.push(grid[k] + (grid[k + 1] - grid[k]) * a / (a - b));
        }
    }
    if let (Some(&g), Some(&v)) = (grid.last(), values.get(grid.len().wrapping_sub(1))) {
        if v == threshold && out.last() != Some(&g) {
            out.push(g);
        }
    }
    out
}

/// First crossing of the chosen diagnostic through `threshold`.
pub fn transition_detect(records: &[PointRecord], which: Diagnostic, threshold: f64) -> Result<f64> {
    let grid: Vec<f64> = records.iter().map(|r| r.swept_param).collect();
    let values: Vec<f64> = records
        .iter()
        .map(|r| match which {
            Diagnostic::Concurrence => r.outcome.edge_concurrence,
            Diagnostic::Purity => r.outcome.nn_purity,
        })
        .collect();
    crossings(&grid, &values, threshold).first().copied().ok_or(Error::NoTransition)
}

/// Exact ground-state diagnostics at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactPoint {
    pub swept_param: f64,
    pub energy: f64,
    pub gap: f64,
    /// Size of the ground multiplet within the degeneracy tolerance.
    pub degeneracy: usize,
    pub edge_concurrence: f64,
    pub nn_purity: f64,
    pub low_lying: Vec<f64>,
}

impl ExactPoint {
    pub fn diagnostic(&self, which: Diagnostic) -> f64 {
        match which {
            Diagnostic::Concurrence => self.edge_concurrence,
            Diagnostic::Purity => self.nn_purity,
        }
    }
}

pub fn exact_point(model: &ModelSpec, x: f64) -> Result<ExactPoint> {
    let h = model.hamiltonian(x)?;
    let spectrum: SpectrumResult = exact_ground(&h, REFERENCE_LEVELS)?;
    let g = &spectrum.ground_state;
    Ok(ExactPoint {
        swept_param: x,
        energy: spectrum.ground_energy(),
        gap: spectrum.ground_gap,
        degeneracy: spectrum.ground_multiplet(crate::hamiltonians::DEGENERACY_TOL).len(),
        edge_concurrence: concurrence(&reduced_density_matrix(g, model.edge_pair())?)?,
        nn_purity: purity(&reduced_density_matrix(g, model.nn_pair())?),
        low_lying: spectrum.low_lying.iter().map(|(e, _)| *e).collect(),
    })
}
