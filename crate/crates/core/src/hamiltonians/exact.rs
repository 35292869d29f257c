//! Exact diagonalization.
//!
//! The operator is first split into symmetry sectors (particle number if it is
//! conserved, otherwise fermion parity). Sectors up to [`DENSE_SECTOR_MAX`]
//! states are diagonalized densely; larger ones go through Lanczos with full
//! reorthogonalization, extracting one eigenpair per run and deflating it.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PauliSum, SparseOperator};
use crate::error::{Error, Result};
use crate::qstate::StateVector;

pub const DEFAULT_DENSE_CAP: usize = 12;
pub const DEFAULT_EXACT_CAP: usize = 14;
/// Levels within this distance of `E₀` count as one degenerate ground multiplet.
pub const DEGENERACY_TOL: f64 = 1e-10;

const DENSE_SECTOR_MAX: usize = 1024;
const LANCZOS_MAX_KRYLOV: usize = 300;
const LANCZOS_MAX_RESTARTS: usize = 40;
const LANCZOS_SEED: u64 = 0x5eed_1a2c;

const CZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Full `2^N × 2^N` matrix of `h` under the little-endian qubit order.
pub fn dense_matrix(h: &PauliSum) -> Result<DMatrix<Complex64>> {
    dense_matrix_with_cap(h, DEFAULT_DENSE_CAP)
}

pub fn dense_matrix_with_cap(h: &PauliSum, cap: usize) -> Result<DMatrix<Complex64>> {
    if h.n_qubits() > cap {
        return Err(Error::TooManyQubits { n_qubits: h.n_qubits(), cap });
    }
    let op = h.to_sparse();
    let dim = op.dim();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for r in 0..dim {
        for (c, v) in op.row(r) {
            m[(r, c)] = v;
        }
    }
    Ok(m)
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    /// Every level the solver resolved, ascending. Complete only when `complete` is set.
    pub eigenvalues: Vec<f64>,
    pub ground_state: StateVector,
    /// The lowest `m` eigenpairs, ascending.
    pub low_lying: Vec<(f64, StateVector)>,
    pub ground_gap: f64,
    pub complete: bool,
}

impl SpectrumResult {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// States within `tol` of the ground energy (at least the ground state itself).
    pub fn ground_multiplet(&self, tol: f64) -> Vec<&StateVector> {
        let e0 = self.ground_energy();
        self.low_lying.iter().filter(|(e, _)| *e - e0 <= tol).map(|(_, s)| s).collect()
    }

    pub fn is_degenerate(&self) -> bool {
        self.ground_multiplet(DEGENERACY_TOL).len() > 1
    }

    /// `Σ_m |⟨ψ|φ_m⟩|²` over the degenerate ground multiplet.
    pub fn subspace_fidelity(&self, psi: &StateVector) -> Result<f64> {
        let mut total = 0.0;
        for phi in self.ground_multiplet(DEGENERACY_TOL) {
            total += psi.inner(phi)?.norm_sqr();
        }
        Ok(total.min(1.0))
    }

    /// `E_{k} − E_0` for the `k`-th level, when resolved.
    pub fn spread(&self, k: usize) -> Option<f64> {
        self.eigenvalues.get(k).map(|e| e - self.eigenvalues[0])
    }
}

pub fn exact_ground(h: &PauliSum, m: usize) -> Result<SpectrumResult> {
    exact_ground_with_cap(h, m, DEFAULT_EXACT_CAP)
}

pub fn exact_ground_with_cap(h: &PauliSum, m: usize, cap: usize) -> Result<SpectrumResult> {
    let n = h.n_qubits();
    if n > cap {
        return Err(Error::TooManyQubits { n_qubits: n, cap });
    }
    let m = m.max(2).min(1 << n);
    let op = h.to_sparse();
    debug_assert!(n > 10 || op.hermiticity_defect() < 1e-12, "non-Hermitian operator");

    let sectors = symmetry_sectors(&op, n);
    let mut levels: Vec<f64> = Vec::new();
    let mut pairs: Vec<(f64, Vec<Complex64>)> = Vec::new();
    let mut complete = true;
    for indices in &sectors {
        let (values, vectors) = if indices.len() <= DENSE_SECTOR_MAX {
            dense_sector(&op, indices, m)
        } else {
            complete = false;
            let sub = op.restrict(indices);
            let found = lanczos_lowest(&sub, m.min(indices.len()))?;
            let values = found.iter().map(|p| p.0).collect();
            (values, found)
        };
        levels.extend(values);
        for (e, local) in vectors {
            let mut full = vec![CZERO; op.dim()];
            for (k, &i) in indices.iter().enumerate() {
                full[i] = local[k];
            }
            pairs.push((e, full));
        }
    }
    // stable sorts keep sector order on exact ties, which fixes the tie-break
    levels.sort_by(f64::total_cmp);
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.truncate(m);

    let low_lying = pairs
        .into_iter()
        .map(|(e, mut v)| {
            fix_phase(&mut v);
            StateVector::from_amplitudes(v).map(|s| (e, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let ground_state = low_lying[0].1.clone();
    let ground_gap = levels[1] - levels[0];
    Ok(SpectrumResult { eigenvalues: levels, ground_state, low_lying, ground_gap, complete })
}

/// Basis-index lists of the conserved sectors, in ascending label order.
fn symmetry_sectors(op: &SparseOperator, n: usize) -> Vec<Vec<usize>> {
    let weight = |i: usize| i.count_ones() as usize;
    let parity = |i: usize| (i.count_ones() & 1) as usize;
    let (label, count): (Box<dyn Fn(usize) -> usize>, usize) = if op.preserves(weight) {
        (Box::new(weight), n + 1)
    } else if op.preserves(parity) {
        (Box::new(parity), 2)
    } else {
        (Box::new(|_| 0), 1)
    };
    let mut sectors = vec![Vec::new(); count];
    for i in 0..op.dim() {
        sectors[label(i)].push(i);
    }
    sectors.retain(|s| !s.is_empty());
    sectors
}

type Pairs = Vec<(f64, Vec<Complex64>)>;

/// All eigenvalues of the sector, plus the lowest `m` eigenvectors.
fn dense_sector(op: &SparseOperator, indices: &[usize], m: usize) -> (Vec<f64>, Pairs) {
    let sub = op.restrict(indices);
    let d = indices.len();
    if sub.is_real() {
        let mut a = DMatrix::<f64>::zeros(d, d);
        for r in 0..d {
            for (c, v) in sub.row(r) {
                a[(r, c)] = v.re;
            }
        }
        let eig = SymmetricEigen::new(a);
        let order = ascending_order(eig.eigenvalues.as_slice());
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = order
            .iter()
            .take(m)
            .map(|&k| {
                let col = eig.eigenvectors.column(k);
                (eig.eigenvalues[k], col.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            })
            .collect();
        (values, vectors)
    } else {
        let mut a = DMatrix::<Complex64>::zeros(d, d);
        for r in 0..d {
            for (c, v) in sub.row(r) {
                a[(r, c)] = v;
            }
        }
        let eig = SymmetricEigen::new(a);
        let order = ascending_order(eig.eigenvalues.as_slice());
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = order
            .iter()
            .take(m)
            .map(|&k| (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect()))
            .collect();
        (values, vectors)
    }
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

/// Rotates the global phase so the largest-magnitude amplitude is real and positive.
fn fix_phase(v: &mut [Complex64]) {
    let mut best = 0;
    for (k, x) in v.iter().enumerate() {
        if x.norm() > v[best].norm() + 1e-12 {
            best = k;
        }
    }
    let p = v[best];
    if p.norm() > 0.0 {
        let rot = p.conj() / p.norm();
        v.iter_mut().for_each(|x| *x *= rot);
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn project_out(w: &mut [Complex64], basis: &[&[Complex64]]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, w);
            w.iter_mut().zip(b.iter()).for_each(|(x, y)| *x -= c * y);
        }
    }
}

fn operator_scale(op: &SparseOperator) -> f64 {
    (0..op.dim())
        .map(|r| op.row(r).map(|(_, v)| v.norm()).sum::<f64>())
        .fold(1.0, f64::max)
}

/// Lowest `m` eigenpairs by repeated Lanczos with deflation of converged vectors.
fn lanczos_lowest(op: &SparseOperator, m: usize) -> Result<Pairs> {
    let d = op.dim();
    let tol = 1e-11 * operator_scale(op);
    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED ^ d as u64);
    let mut locked: Pairs = Vec::new();
    while locked.len() < m {
        let mut start: Vec<Complex64> =
            (0..d).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, 0.0)).collect();
        let mut found = None;
        for _ in 0..LANCZOS_MAX_RESTARTS {
            let (theta, x, residual) = lanczos_run(op, &start, &locked, tol)?;
            if residual < tol {
                found = Some((theta, x));
                break;
            }
            start = x;
        }
        match found {
            Some(pair) => locked.push(pair),
            None => {
                return Err(Error::NoConvergence(format!(
                    "Lanczos eigenpair {} of a {d}-state sector",
                    locked.len()
                )))
            }
        }
    }
    Ok(locked)
}

/// One Lanczos pass from `start`, orthogonal to `locked`. Returns the lowest
/// Ritz pair and its true residual norm.
fn lanczos_run(
    op: &SparseOperator,
    start: &[Complex64],
    locked: &Pairs,
    tol: f64,
) -> Result<(f64, Vec<Complex64>, f64)> {
    let d = op.dim();
    let locked_refs: Vec<&[Complex64]> = locked.iter().map(|p| p.1.as_slice()).collect();
    let mut v0 = start.to_vec();
    project_out(&mut v0, &locked_refs);
    let nv = norm(&v0);
    if nv < 1e-12 {
        return Err(Error::NoConvergence("start vector lies in the deflated space".into()));
    }
    v0.iter_mut().for_each(|x| *x /= nv);

    let kmax = LANCZOS_MAX_KRYLOV.min(d - locked.len());
    let mut basis: Vec<Vec<Complex64>> = vec![v0];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![CZERO; d];
    let mut ritz;
    loop {
        let j = basis.len() - 1;
        op.matvec(&basis[j], &mut w);
        let alpha = dot(&basis[j], &w).re;
        alphas.push(alpha);
        {
            let refs: Vec<&[Complex64]> = basis
                .iter()
                .map(|v| v.as_slice())
                .chain(locked_refs.iter().copied())
                .collect();
            project_out(&mut w, &refs);
        }
        let beta = norm(&w);
        let k = alphas.len();
        let done = k >= kmax || beta < 1e-13;
        if done || k % 8 == 0 {
            let (theta, y) = lowest_tridiagonal(&alphas, &betas);
            ritz = (theta, y);
            if done || beta * ritz.1[k - 1].abs() < 0.1 * tol {
                break;
            }
        }
        betas.push(beta);
        basis.push(w.iter().map(|x| x / beta).collect());
    }
    let (theta, y) = ritz;
    let mut x = vec![CZERO; d];
    for (coef, v) in y.iter().zip(&basis) {
        x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += vi * *coef);
    }
    let nx = norm(&x);
    x.iter_mut().for_each(|xi| *xi /= nx);
    op.matvec(&x, &mut w);
    let residual = w
        .iter()
        .zip(&x)
        .map(|(hx, xi)| (hx - xi * theta).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok((theta, x, residual))
}

fn lowest_tridiagonal(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let low = ascending_order(eig.eigenvalues.as_slice())[0];
    (eig.eigenvalues[low], eig.eigenvectors.column(low).iter().copied().collect())
}
