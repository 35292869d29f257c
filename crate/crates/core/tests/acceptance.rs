//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs every criterion by default; pass criterion numbers to select some,
//! e.g. `cargo test --test acceptance -- 1 7`. Exits non-zero when any
//! selected criterion fails.

mod support;

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;
use support::*;
use topovqe_core::ansatz::{build_hardware_efficient, build_problem_inspired};
use topovqe_core::hamiltonians::{
    dense_matrix, exact_ground, fit_localization_length, kitaev_hamiltonian, ssh_edge_splitting, ssh_hamiltonian,
    KitaevParams, SshParams,
};
use topovqe_core::vqe::{crossings, exact_point, run_sweep, CircuitObjective};
use topovqe_core::{
    concurrence, purity, AnsatzFamily, AnsatzSpec, DensityMatrix2Q, ModelSpec, OptimizerSettings, PointRecord,
    Strategy, SweepPlan, VqeProblem,
};

const SEED: u64 = 2024;
const KITAEV_T: f64 = 1.0;
const KITAEV_DELTA: f64 = 1.2;

fn ssh(n: usize) -> ModelSpec {
    ModelSpec::Ssh { n_sites: n }
}

fn kitaev(n: usize) -> ModelSpec {
    ModelSpec::Kitaev { n_sites: n, t: KITAEV_T, delta_pair: KITAEV_DELTA }
}

fn grid(a: f64, b: f64, step: f64) -> Vec<f64> {
    let k = ((b - a) / step).round() as usize;
    (0..=k).map(|i| ((a + step * i as f64) * 1e9).round() / 1e9).collect()
}

fn median(v: &[f64]) -> f64 {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

struct Verdict {
    pass: bool,
    summary: String,
}

impl Verdict {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Self { pass, summary: summary.into() }
    }
}

/// Chained problem-inspired sweeps, shared between criteria 2 and 5.
#[derive(Default)]
struct Sweeps {
    cache: HashMap<(String, usize), Vec<PointRecord>>,
}

impl Sweeps {
    fn sweep_grid(model: &ModelSpec) -> Vec<f64> {
        match *model {
            ModelSpec::Ssh { n_sites } if n_sites >= 12 => grid(-1.0, 1.0, 0.1),
            ModelSpec::Ssh { .. } => grid(-1.0, 1.0, 0.05),
            ModelSpec::Kitaev { n_sites, .. } if n_sites >= 12 => grid(-4.5, 4.5, 0.25),
            ModelSpec::Kitaev { n_sites, .. } if n_sites >= 10 => grid(-4.5, 4.5, 0.1),
            ModelSpec::Kitaev { .. } => grid(-4.5, 4.5, 0.05),
        }
    }

    fn chained(&mut self, model: ModelSpec) -> &[PointRecord] {
        let key = (model.name().to_string(), model.n_sites());
        self.cache.entry(key).or_insert_with(|| {
            let started = Instant::now();
            let ansatz = AnsatzSpec::with_default_layers(AnsatzFamily::ProblemInspired, model.n_sites());
            let mut plan = SweepPlan::new(model, Self::sweep_grid(&model), ansatz, Strategy::Chained);
            plan.seed = SEED;
            let records = run_sweep(&plan, &OptimizerSettings::default()).expect("chained sweep");
            println!(
                "    [{} N={} chained, {} points, {:.0} s]",
                model.name(),
                model.n_sites(),
                records.len(),
                started.elapsed().as_secs_f64()
            );
            records
        })
    }
}

fn fmt_points(points: &[(f64, f64)]) -> String {
    points.iter().map(|(x, f)| format!("{x:+.2}:{f:.3}")).collect::<Vec<_>>().join(" ")
}

fn plain_fidelities(model: &ModelSpec, x: f64, seeds: u64) -> Vec<f64> {
    let circuit = build_hardware_efficient(model.n_sites(), 3).unwrap();
    let problem = VqeProblem::new(circuit, model.cost_spec(x).unwrap()).unwrap();
    let settings = OptimizerSettings::default();
    (0..seeds)
        .map(|s| problem.minimize(&problem.seeded_start(SEED + s), &settings).unwrap().reference_fidelity())
        .collect()
}

fn criterion_1() -> Verdict {
    let mut ok = true;
    let mut lines = Vec::new();
    let check = |model: ModelSpec, x: f64, want_high: bool, ok: &mut bool, lines: &mut Vec<String>| {
        let m = median(&plain_fidelities(&model, x, 5));
        let pass = if want_high { m >= 0.98 } else { m <= 0.9 };
        *ok &= pass;
        lines.push(format!("{} {x:+.2} median {m:.4} {}", model.name(), if pass { "ok" } else { "MISS" }));
    };
    for x in [-0.8, -0.6, -0.4, -0.2] {
        check(ssh(6), x, true, &mut ok, &mut lines);
    }
    for x in [0.4, 0.6, 0.8] {
        check(ssh(6), x, false, &mut ok, &mut lines);
    }
    for x in [-3.0, -2.5, 2.5, 3.0] {
        check(kitaev(6), x, true, &mut ok, &mut lines);
    }
    for x in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        check(kitaev(6), x, false, &mut ok, &mut lines);
    }
    for l in &lines {
        println!("    {l}");
    }
    Verdict::new(ok, "HEA d=3 plain cost, 5 seeds: trivial medians >= 0.98, topological medians <= 0.9")
}

/// Points below `floor` and whether they fit the one-retry allowance.
fn sweep_shortfall(records: &[PointRecord], floor: f64) -> (Vec<(f64, f64)>, usize) {
    let low: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| !(r.outcome.reference_fidelity() >= floor))
        .map(|r| (r.swept_param, r.outcome.reference_fidelity()))
        .collect();
    let retried = records.iter().filter(|r| r.retries > 0).count();
    (low, retried)
}

fn criterion_2(sweeps: &mut Sweeps) -> Verdict {
    let mut ok = true;
    for model in [4, 6, 8, 10, 12].map(ssh).into_iter().chain([4, 6, 8, 10, 12].map(kitaev)) {
        let records = sweeps.chained(model);
        let (low, retried) = sweep_shortfall(records, 0.98);
        let min = records.iter().map(|r| r.outcome.reference_fidelity()).fold(f64::INFINITY, f64::min);
        let pass = low.is_empty() && retried <= 2;
        ok &= pass;
        println!(
            "    {} N={}: min fidelity {min:.4}, {} points below 0.98 {}, {retried} retried",
            model.name(),
            model.n_sites(),
            low.len(),
            fmt_points(&low)
        );
    }
    Verdict::new(ok, "problem-inspired chained sweeps: fidelity >= 0.98 at every point, <= 2 retried points")
}

fn pooled(model: ModelSpec, xs: &[f64], strategy: Strategy, pool: usize, schedule: Option<Vec<f64>>) -> Vec<PointRecord> {
    let ansatz = AnsatzSpec::new(AnsatzFamily::HardwareEfficient, model.n_sites(), 3);
    let mut plan = SweepPlan::new(model, xs.to_vec(), ansatz, strategy);
    plan.chain = false;
    plan.checks = false;
    plan.n_first_guesses = pool;
    plan.seed = SEED;
    if let Some(s) = schedule {
        plan.eta_schedule = s;
    }
    run_sweep(&plan, &OptimizerSettings::default()).expect("pooled sweep")
}

fn criterion_3() -> Verdict {
    let xs = [0.2, 0.4, 0.6, 0.8];
    let penalized = pooled(ssh(6), &xs, Strategy::Penalized, 10, None);
    let plain = pooled(ssh(6), &xs, Strategy::Plain, 10, None);
    let mut ok = true;
    for (p, q) in penalized.iter().zip(&plain) {
        let (fp, fq) = (p.outcome.reference_fidelity(), q.outcome.reference_fidelity());
        let pass = (0.92..=1.0 + 1e-12).contains(&fp) && fq < 0.9;
        ok &= pass;
        println!(
            "    ssh {:+.2}: penalized {fp:.4} (C {:.3}), plain {fq:.4} {}",
            p.swept_param,
            p.outcome.edge_concurrence,
            if pass { "ok" } else { "MISS" }
        );
    }
    Verdict::new(ok, "SSH N=6 HEA, eta schedule + tau=1, pools of 10: penalized in [0.92, 1], plain < 0.9")
}

fn criterion_4() -> Verdict {
    let settings = OptimizerSettings::default();
    let mut ok = true;

    let circuit = build_hardware_efficient(6, 3).unwrap();
    let spec = ssh(6).cost_spec(0.8).unwrap().with_penalties(0.0, 1.0).unwrap();
    let problem = VqeProblem::new(circuit, spec).unwrap();
    let schedule = SweepPlan::new(ssh(6), vec![0.8], AnsatzSpec::new(AnsatzFamily::HardwareEfficient, 6, 3), Strategy::Penalized)
        .eta_schedule;
    let mut drops = Vec::new();
    for s in 0..20 {
        let pen = problem.eta_schedule_minimize(&problem.seeded_start(SEED + s), &settings, &schedule).unwrap();
        let warm = problem.warm_start_refine(&pen.theta_opt, &settings).unwrap();
        if warm.fidelity < pen.fidelity - 1e-6 {
            drops.push((pen.fidelity, warm.fidelity));
        }
    }
    let mono = drops.is_empty();
    ok &= mono;
    println!(
        "    monotonicity (SSH N=6 delta=0.8, 20 runs): {} decreases {}",
        drops.len(),
        drops.iter().map(|(a, b)| format!("{a:.3}->{b:.3}")).collect::<Vec<_>>().join(" ")
    );

    let scan = |model: ModelSpec, x: f64, schedule: Option<Vec<f64>>| -> bool {
        let started = Instant::now();
        let r = &pooled(model, &[x], Strategy::PenalizedThenWarmstart, 4, schedule)[0];
        let f = r.outcome.reference_fidelity();
        println!(
            "    {} N={} x={x}: warm-start fidelity {f:.4} ({:.0} s)",
            model.name(),
            model.n_sites(),
            started.elapsed().as_secs_f64()
        );
        f > 0.9
    };
    for n in [4, 6, 8, 10, 12] {
        ok &= scan(ssh(n), 0.8, None);
    }
    for n in [4, 6, 8, 10, 12, 14] {
        ok &= scan(kitaev(n), 0.3, Some(vec![0.0]));
    }
    Verdict::new(ok, "warm start never lowers fidelity; HEA pipelines > 0.9 (SSH delta=0.8 to N=12, Kitaev mu/t=0.3 to N=14)")
}

fn criterion_5(sweeps: &mut Sweeps) -> Verdict {
    let mut ok = true;
    let records = sweeps.chained(ssh(10)).to_vec();
    let near_zero: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.swept_param.abs() <= 0.1 + 1e-9)
        .map(|r| (r.swept_param, r.outcome.reference_fidelity()))
        .collect();
    let min0 = near_zero.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let window = (0.80..=0.92).contains(&min0);
    let deep: Vec<f64> = records.iter().filter(|r| r.swept_param >= 0.5 - 1e-9).map(|r| r.outcome.reference_fidelity()).collect();
    let deep_ok = deep.iter().all(|&f| f >= 0.99);
    println!("    ssh N=10 chained: min fidelity near 0 {min0:.4} ({}), delta >= 0.5 min {:.4}", fmt_points(&near_zero), deep.iter().copied().fold(f64::INFINITY, f64::min));
    ok &= window && deep_ok;

    let xs = [0.2, 0.4, 0.6, 0.8];
    let ansatz = AnsatzSpec::with_default_layers(AnsatzFamily::ProblemInspired, 10);
    let mut plan = SweepPlan::new(ssh(10), xs.to_vec(), ansatz, Strategy::Chained);
    plan.chain = false;
    plan.checks = false;
    plan.seed = SEED;
    let free = run_sweep(&plan, &OptimizerSettings::default()).expect("unchecked sweep");
    let free_pts: Vec<(f64, f64)> = free.iter().map(|r| (r.swept_param, r.outcome.reference_fidelity())).collect();
    let free_ok = free_pts.iter().all(|p| p.1 <= 0.7);
    println!("    ssh N=10 without check: {}", fmt_points(&free_pts));
    ok &= free_ok;

    let k = sweeps.chained(kitaev(10));
    let inside: Vec<(f64, f64)> = k.iter().filter(|r| r.swept_param.abs() < 2.0).map(|r| (r.swept_param, r.outcome.reference_fidelity())).collect();
    let deep_k: Vec<f64> = inside.iter().filter(|p| p.0.abs() <= 1.5 + 1e-9).map(|p| p.1).collect();
    let edge_k: Vec<f64> = inside.iter().filter(|p| p.0.abs() > 1.5 + 1e-9).map(|p| p.1).collect();
    let dk = deep_k.iter().copied().fold(f64::INFINITY, f64::min);
    let ek = edge_k.iter().copied().fold(f64::INFINITY, f64::min);
    println!("    kitaev N=10 chained: |mu/t| <= 1.5 min {dk:.4}, 1.5 < |mu/t| < 2 min {ek:.4}");
    ok &= dk >= 0.99 && ek >= 0.90;
    Verdict::new(ok, "SSH N=10 dip near 0 in [0.80, 0.92], >= 0.99 for delta >= 0.5, unchecked <= 0.7; Kitaev N=10 >= 0.99 inside, >= 0.90 near the transitions")
}

fn criterion_6() -> Verdict {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut r = rng(66);

    for n in 2..=6 {
        let mu: f64 = r.gen_range(-3.0..3.0);
        let hk = kitaev_hamiltonian(&KitaevParams::new(n, mu, KITAEV_T, KITAEV_DELTA).unwrap()).unwrap();
        if max_abs_diff(&dense_matrix(&hk).unwrap(), &fock_kitaev(n, mu, KITAEV_T, KITAEV_DELTA)) >= 1e-10 {
            failures.push(format!("Jordan-Wigner Kitaev N={n}"));
        }
        if n % 2 == 0 {
            let delta: f64 = r.gen_range(-1.0..1.0);
            let hs = ssh_hamiltonian(&SshParams::new(n, delta).unwrap()).unwrap();
            if max_abs_diff(&dense_matrix(&hs).unwrap(), &fock_ssh(n, delta)) >= 1e-10 {
                failures.push(format!("Jordan-Wigner SSH N={n}"));
            }
            let ev = hermitian_eigenvalues(&dense_matrix(&hs).unwrap());
            if ev.iter().zip(ev.iter().rev()).any(|(a, b)| (a + b).abs() > 1e-8) {
                failures.push(format!("spectral symmetry N={n}"));
            }
            let g = exact_ground(&hs, 2).unwrap().ground_state;
            if (g.mean_occupation() - n as f64 / 2.0).abs() > 1e-8 {
                failures.push(format!("half filling N={n}"));
            }
        }
    }

    for n in [6, 8, 10] {
        let p = SshParams::new(n, 0.8).unwrap();
        let de = ssh_edge_splitting(&p).unwrap();
        let spec = exact_ground(&ssh_hamiltonian(&p).unwrap(), 6).unwrap();
        let e0 = spec.ground_energy();
        let inside = spec.low_lying.iter().filter(|(e, _)| e - e0 <= 2.5 * de).count();
        if inside != 4 {
            failures.push(format!("quadruplet N={n}: {inside} levels"));
        }
    }

    match fit_localization_length(0.5, &[8, 12, 16, 20]) {
        Ok(Some(fit)) if fit.r_squared > 0.999 => {}
        other => failures.push(format!("edge splitting fit {other:?}")),
    }

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell = DensityMatrix2Q::from_pure([c(0.0, 0.0), c(s, 0.0), c(s, 0.0), c(0.0, 0.0)], (0, 1)).unwrap();
    let product = DensityMatrix2Q::from_pure([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], (0, 1)).unwrap();
    let mixed = DensityMatrix2Q::new(nalgebra::Matrix4::identity() * c(0.25, 0.0), (0, 1)).unwrap();
    let bell_m = bell.matrix() * c(0.5, 0.0);
    let werner = DensityMatrix2Q::new(bell_m + nalgebra::Matrix4::identity() * c(0.125, 0.0), (0, 1)).unwrap();
    let checks = [
        ("Bell concurrence", concurrence(&bell).unwrap(), 1.0),
        ("product concurrence", concurrence(&product).unwrap(), 0.0),
        ("Werner(1/2) concurrence", concurrence(&werner).unwrap(), 0.25),
        ("Bell purity", purity(&bell), 1.0),
        ("maximally mixed purity", purity(&mixed), 0.25),
    ];
    for (name, got, want) in checks {
        if (got - want).abs() > 1e-6 {
            failures.push(format!("{name}: {got}"));
        }
    }

    let circuit = build_problem_inspired(6, 2, true).unwrap();
    let spec = ssh(6).cost_spec(0.4).unwrap();
    let objective = CircuitObjective::new(&circuit, &spec, 1e-6);
    let theta: Vec<f64> = (0..circuit.n_params()).map(|_| r.gen_range(-3.1..3.1)).collect();
    let g = objective.gradient(&theta);
    let h = 1e-3;
    let reference: Vec<f64> = (0..theta.len())
        .map(|k| {
            let at = |d: f64| {
                let mut t = theta.clone();
                t[k] += d;
                objective.value(&t)
            };
            (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
        })
        .collect();
    let diff = g.iter().zip(&reference).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale = reference.iter().map(|b| b * b).sum::<f64>().sqrt();
    if diff > 1e-4 * scale {
        failures.push(format!("gradient relative error {}", diff / scale));
    }

    let secs = started.elapsed().as_secs_f64();
    for f in &failures {
        println!("    {f}");
    }
    Verdict::new(failures.is_empty() && secs < 300.0, format!("oracle and physics checks ({secs:.1} s)"))
}

fn criterion_7() -> Verdict {
    let step = 0.05;
    let xs = grid(-1.0, 1.0, step);
    let pur: Vec<f64> = xs.iter().map(|&x| exact_point(&ssh(10), x).unwrap().nn_purity).collect();
    let ssh_x = crossings(&xs, &pur, (1.0 + 0.25) / 2.0);
    let ssh_ok = ssh_x.len() == 1 && ssh_x[0].abs() <= step;

    let ks = grid(-4.5, 4.5, step);
    let kp: Vec<f64> = ks.iter().map(|&x| exact_point(&kitaev(10), x).unwrap().nn_purity).collect();
    let k_x = crossings(&ks, &kp, (1.0 + 0.5) / 2.0);
    let k_ok = k_x.len() == 2 && (k_x[0] + k_x[1]).abs() <= step && k_x[0] < 0.0;
    println!("    ssh N=10 purity crossings {ssh_x:?}; kitaev N=10 purity crossings {k_x:?}");
    Verdict::new(ssh_ok && k_ok, "exact-state transitions: SSH within one step of 0, Kitaev pair symmetric within one step")
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        for k in 1..=7 {
            println!("criterion_{k}: test");
        }
        return;
    }
    let selected: Vec<u32> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: u32| selected.is_empty() || selected.contains(&k);
    let mut sweeps = Sweeps::default();
    let mut failed = 0;
    for k in 1..=7u32 {
        if !wanted(k) {
            continue;
        }
        let started = Instant::now();
        let v = match k {
            1 => criterion_1(),
            2 => criterion_2(&mut sweeps),
            3 => criterion_3(),
            4 => criterion_4(),
            5 => criterion_5(&mut sweeps),
            6 => criterion_6(),
            _ => criterion_7(),
        };
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {k}: {} {} [{:.0} s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.summary,
            started.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
