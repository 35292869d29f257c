//! The `sweep`, `exact` and `spectrum` subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use topovqe_core::hamiltonians::{fit_localization_length, ssh_single_particle_spectrum, SshParams};
use topovqe_core::vqe::{crossings, exact_point, run_sweep_with, Diagnostic, ModelSpec, PointRecord};

use crate::config::{ConfigError, RunConfig};
use crate::format::fmt_float;

pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FIRST_POINT: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("first point rejected: {0}")]
    FirstPoint(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Core(topovqe_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::FirstPoint(_) => EXIT_FIRST_POINT,
            _ => EXIT_RUNTIME,
        }
    }
}

impl From<topovqe_core::Error> for CliError {
    fn from(e: topovqe_core::Error) -> Self {
        match e {
            topovqe_core::Error::FirstPointRejected { .. } => CliError::FirstPoint(e.to_string()),
            e => CliError::Core(e),
        }
    }
}

/// Options shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct Common {
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
}

impl Common {
    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn ensure_dir(&self) -> std::io::Result<()> {
        if self.out_dir.as_os_str().is_empty() {
            return Ok(());
        }
        std::fs::create_dir_all(&self.out_dir)
    }
}

pub const SWEEP_COLUMNS: [&str; 13] = [
    "model",
    "N",
    "swept_param",
    "energy",
    "exact_energy",
    "fidelity",
    "subspace_fidelity",
    "edge_concurrence",
    "nn_purity",
    "iterations",
    "converged",
    "accepted",
    "seed",
];

pub const EXACT_COLUMNS: [&str; 9] = [
    "model",
    "N",
    "swept_param",
    "exact_energy",
    "ground_gap",
    "quadruplet_spread",
    "degeneracy",
    "edge_concurrence",
    "nn_purity",
];

/// Purity halfway between a pure pair and the pair's deep-topological value.
pub fn purity_midpoint(model: &ModelSpec) -> f64 {
    match model {
        ModelSpec::Ssh { .. } => (1.0 + 0.25) / 2.0,
        ModelSpec::Kitaev { .. } => (1.0 + 0.5) / 2.0,
    }
}

#[derive(Debug, Serialize)]
pub struct TransitionEstimate {
    pub diagnostic: Diagnostic,
    pub threshold: f64,
    pub crossings: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub model: &'static str,
    pub n_sites: usize,
    pub strategy: topovqe_core::vqe::Strategy,
    pub seed: u64,
    pub points: usize,
    pub accepted_points: usize,
    pub retried_points: usize,
    pub first_point_rejected: bool,
    pub min_fidelity: Option<f64>,
    pub median_fidelity: Option<f64>,
    pub min_subspace_fidelity: Option<f64>,
    pub transitions: Vec<TransitionEstimate>,
    pub wall_time_s: f64,
}

fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

fn minimum(values: &[f64]) -> Option<f64> {
    values.iter().copied().filter(|x| x.is_finite()).min_by(f64::total_cmp)
}

fn transitions(model: &ModelSpec, concurrence_threshold: f64, grid: &[f64], conc: &[f64], pur: &[f64]) -> Vec<TransitionEstimate> {
    let p = purity_midpoint(model);
    vec![
        TransitionEstimate {
            diagnostic: Diagnostic::Concurrence,
            threshold: concurrence_threshold,
            crossings: crossings(grid, conc, concurrence_threshold),
        },
        TransitionEstimate { diagnostic: Diagnostic::Purity, threshold: p, crossings: crossings(grid, pur, p) },
    ]
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value).map_err(std::io::Error::from)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

fn sweep_row(model: &ModelSpec, seed: u64, r: &PointRecord) -> Vec<String> {
    let o = &r.outcome;
    vec![
        model.name().to_string(),
        model.n_sites().to_string(),
        fmt_float(r.swept_param),
        fmt_float(o.energy),
        fmt_float(o.exact_energy),
        fmt_float(o.fidelity),
        fmt_float(o.subspace_fidelity),
        fmt_float(o.edge_concurrence),
        fmt_float(o.nn_purity),
        o.iterations.to_string(),
        o.converged.to_string(),
        r.accepted.to_string(),
        seed.to_string(),
    ]
}

/// Runs a VQE sweep, streaming one CSV row per finished point.
pub fn cmd_sweep(config_path: &Path, common: &Common) -> Result<SweepSummary, CliError> {
    let started = Instant::now();
    let cfg = RunConfig::load(config_path)?;
    let plan = cfg.plan(common.seed)?;
    let settings = cfg.settings(common.seed)?;
    common.ensure_dir()?;

    let csv_path = common.path(&format!("{}.csv", cfg.output.name));
    let mut writer = csv::Writer::from_writer(BufWriter::new(File::create(&csv_path)?));
    writer.write_record(SWEEP_COLUMNS)?;
    writer.flush()?;

    let mut write_error = None;
    let result = run_sweep_with(&plan, &settings, |r| {
        let res = writer.write_record(sweep_row(&plan.model, plan.seed, r)).and_then(|_| Ok(writer.flush()?));
        if let Err(e) = res {
            write_error.get_or_insert(e);
        }
    });
    writer.flush()?;
    if let Some(e) = write_error {
        return Err(e.into());
    }

    let (records, rejected) = match result {
        Ok(r) => (r, None),
        Err(e @ topovqe_core::Error::FirstPointRejected { .. }) => (Vec::new(), Some(e)),
        Err(e) => return Err(e.into()),
    };
    let grid: Vec<f64> = records.iter().map(|r| r.swept_param).collect();
    let fid: Vec<f64> = records.iter().map(|r| r.outcome.fidelity).collect();
    let sub: Vec<f64> = records.iter().map(|r| r.outcome.subspace_fidelity).collect();
    let conc: Vec<f64> = records.iter().map(|r| r.outcome.edge_concurrence).collect();
    let pur: Vec<f64> = records.iter().map(|r| r.outcome.nn_purity).collect();
    let summary = SweepSummary {
        model: plan.model.name(),
        n_sites: plan.model.n_sites(),
        strategy: plan.strategy,
        seed: plan.seed,
        points: records.len(),
        accepted_points: records.iter().filter(|r| r.accepted).count(),
        retried_points: records.iter().filter(|r| r.retries > 0).count(),
        first_point_rejected: rejected.is_some(),
        min_fidelity: minimum(&fid),
        median_fidelity: median(&fid),
        min_subspace_fidelity: minimum(&sub),
        transitions: transitions(&plan.model, plan.thresholds.concurrence_max_trivial, &grid, &conc, &pur),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    write_json(&common.path(&format!("{}.json", cfg.output.name)), &summary)?;
    match rejected {
        Some(e) => Err(e.into()),
        None => Ok(summary),
    }
}

#[derive(Debug, Serialize)]
pub struct ExactSummary {
    pub model: &'static str,
    pub n_sites: usize,
    pub points: usize,
    pub transitions: Vec<TransitionEstimate>,
    pub wall_time_s: f64,
}

/// Exact-state scan of the config's model over its grid; no VQE.
pub fn cmd_exact(config_path: &Path, common: &Common) -> Result<ExactSummary, CliError> {
    let started = Instant::now();
    let cfg = RunConfig::load(config_path)?;
    let model = cfg.model.spec();
    let grid = cfg.grid.points()?;
    for &x in &grid {
        model.hamiltonian(x).map_err(ConfigError::from)?;
    }
    common.ensure_dir()?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(File::create(
        common.path(&format!("{}_exact.csv", cfg.output.name)),
    )?));
    writer.write_record(EXACT_COLUMNS)?;
    let mut conc = Vec::new();
    let mut pur = Vec::new();
    for &x in &grid {
        let p = exact_point(&model, x)?;
        let spread = (p.low_lying.len() >= 4).then(|| p.low_lying[3] - p.low_lying[0]);
        writer.write_record([
            model.name().to_string(),
            model.n_sites().to_string(),
            fmt_float(x),
            fmt_float(p.energy),
            fmt_float(p.gap),
            spread.map_or_else(String::new, fmt_float),
            p.degeneracy.to_string(),
            fmt_float(p.edge_concurrence),
            fmt_float(p.nn_purity),
        ])?;
        writer.flush()?;
        conc.push(p.edge_concurrence);
        pur.push(p.nn_purity);
    }
    let threshold = cfg.strategy.as_ref().and_then(|s| s.thresholds).unwrap_or_default().concurrence_max_trivial;
    let summary = ExactSummary {
        model: model.name(),
        n_sites: model.n_sites(),
        points: grid.len(),
        transitions: transitions(&model, threshold, &grid, &conc, &pur),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    write_json(&common.path(&format!("{}_exact.json", cfg.output.name)), &summary)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct SpectrumSummary {
    pub delta: f64,
    pub sizes: Vec<usize>,
    pub smallest_abs_level: Vec<f64>,
    pub xi: Option<f64>,
    pub r_squared: Option<f64>,
    pub notice: Option<String>,
}

/// Single-particle SSH spectra for each size and the `ΔE ∝ exp(−N/ξ)` fit.
pub fn cmd_spectrum(delta: f64, sizes: &[usize], name: &str, common: &Common) -> Result<SpectrumSummary, CliError> {
    if sizes.is_empty() {
        return Err(ConfigError::Invalid("no sizes given".into()).into());
    }
    let mut spectra = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let params = SshParams::new(n, delta).map_err(ConfigError::from)?;
        spectra.push(ssh_single_particle_spectrum(&params)?);
    }
    common.ensure_dir()?;
    let mut writer =
        csv::Writer::from_writer(BufWriter::new(File::create(common.path(&format!("{name}.csv")))?));
    writer.write_record(["N", "level", "energy"])?;
    for (&n, levels) in sizes.iter().zip(&spectra) {
        for (k, e) in levels.iter().enumerate() {
            writer.write_record([n.to_string(), k.to_string(), fmt_float(*e)])?;
        }
    }
    writer.flush()?;

    let smallest: Vec<f64> =
        spectra.iter().map(|l| l.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min)).collect();
    let (fit, notice) = if delta <= 0.0 {
        (None, Some("trivial phase: no edge modes, fit skipped".to_string()))
    } else {
        match fit_localization_length(delta, sizes)? {
            Some(f) => (Some(f), None),
            None => (None, Some("edge splitting is zero or too few sizes, fit skipped".to_string())),
        }
    };
    let summary = SpectrumSummary {
        delta,
        sizes: sizes.to_vec(),
        smallest_abs_level: smallest,
        xi: fit.as_ref().map(|f| f.xi),
        r_squared: fit.as_ref().map(|f| f.r_squared),
        notice,
    };
    let mut fw = csv::Writer::from_writer(BufWriter::new(File::create(common.path(&format!("{name}_fit.csv")))?));
    fw.write_record(["delta", "xi", "slope", "intercept", "r_squared", "notice"])?;
    fw.write_record([
        fmt_float(delta),
        fit.as_ref().map_or_else(String::new, |f| fmt_float(f.xi)),
        fit.as_ref().map_or_else(String::new, |f| fmt_float(f.slope)),
        fit.as_ref().map_or_else(String::new, |f| fmt_float(f.intercept)),
        fit.as_ref().map_or_else(String::new, |f| fmt_float(f.r_squared)),
        summary.notice.clone().unwrap_or_default(),
    ])?;
    fw.flush()?;
    Ok(summary)
}
