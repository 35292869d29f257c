//! Dense-matrix oracles shared by the integration tests. Everything here is
//! built from first principles (Kronecker products, Fock-basis bookkeeping,
//! power series) and never calls into the simulator's kernels.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topovqe_core::StateVector;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn id2() -> DMatrix<C> {
    DMatrix::identity(2, 2)
}

pub fn sx() -> DMatrix<C> {
    DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn sy() -> DMatrix<C> {
    DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn sz() -> DMatrix<C> {
    DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// `ops[n-1] ⊗ … ⊗ ops[0]`: qubit 0 is the least significant index bit.
pub fn kron_chain(ops: &[DMatrix<C>]) -> DMatrix<C> {
    let mut m = DMatrix::identity(1, 1);
    for op in ops.iter().rev() {
        m = m.kronecker(op);
    }
    m
}

/// Single-site operator `op` on qubit `q` of `n`.
pub fn on_site(n: usize, q: usize, op: &DMatrix<C>) -> DMatrix<C> {
    let ops: Vec<DMatrix<C>> = (0..n).map(|k| if k == q { op.clone() } else { id2() }).collect();
    kron_chain(&ops)
}

/// `exp(A)` by scaling and squaring a truncated Taylor series.
pub fn expm_series(a: &DMatrix<C>) -> DMatrix<C> {
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a * C::new(scale, 0.0);
    let dim = a.nrows();
    let mut term = DMatrix::<C>::identity(dim, dim);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &x * C::new(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn random_state(n: usize, r: &mut impl Rng) -> StateVector {
    let amps = (0..1usize << n).map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
    StateVector::from_amplitudes(amps).unwrap()
}

pub fn to_dvector(s: &StateVector) -> DVector<C> {
    DVector::from_column_slice(s.amplitudes())
}

pub fn max_abs_diff(a: &DMatrix<C>, b: &DMatrix<C>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Fermionic annihilation operators on `n` modes built directly in the
/// occupation basis: `c_j |…⟩` picks up `(−1)^{#occupied modes below j}`.
pub fn annihilators(n: usize) -> Vec<DMatrix<C>> {
    let dim = 1usize << n;
    (0..n)
        .map(|j| {
            let mut m = DMatrix::<C>::zeros(dim, dim);
            for x in 0..dim {
                if x >> j & 1 == 1 {
                    let below = (x & ((1 << j) - 1)).count_ones();
                    let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
                    m[(x ^ (1 << j), x)] = c(sign, 0.0);
                }
            }
            m
        })
        .collect()
}

pub fn dagger(m: &DMatrix<C>) -> DMatrix<C> {
    m.adjoint()
}

/// Open SSH chain `−Σ a_j (c†_{j+1} c_j + h.c.)`, bond `j` carrying `1−δ` for even `j`, `1+δ` for odd.
pub fn fock_ssh(n: usize, delta: f64) -> DMatrix<C> {
    let cs = annihilators(n);
    let dim = 1usize << n;
    let mut h = DMatrix::<C>::zeros(dim, dim);
    for j in 0..n - 1 {
        let a = if j % 2 == 0 { 1.0 - delta } else { 1.0 + delta };
        let hop = dagger(&cs[j + 1]) * &cs[j];
        h -= (&hop + dagger(&hop)) * c(a, 0.0);
    }
    h
}

/// Open Kitaev chain `−μ Σ n_j − t Σ (c†_{j+1} c_j + h.c.) + Δ Σ (c_j c_{j+1} + h.c.)`.
pub fn fock_kitaev(n: usize, mu: f64, t: f64, delta: f64) -> DMatrix<C> {
    let cs = annihilators(n);
    let dim = 1usize << n;
    let mut h = DMatrix::<C>::zeros(dim, dim);
    for cj in &cs {
        h -= dagger(cj) * cj * c(mu, 0.0);
    }
    for j in 0..n - 1 {
        let hop = dagger(&cs[j + 1]) * &cs[j];
        h -= (&hop + dagger(&hop)) * c(t, 0.0);
        let pair = &cs[j] * &cs[j + 1];
        h += (&pair + dagger(&pair)) * c(delta, 0.0);
    }
    h
}

pub fn hermitian_eigenvalues(m: &DMatrix<C>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Lowest eigenvector of a Hermitian matrix.
pub fn hermitian_ground(m: &DMatrix<C>) -> (f64, DVector<C>) {
    let eig = m.clone().symmetric_eigen();
    let k = (0..eig.eigenvalues.len()).min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).unwrap();
    (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned())
}

/// Two-qubit reduced state by summing `ψ(x) ψ*(y)` over all pairs of basis
/// states that agree outside `(i, j)`; row index `2·b_i + b_j`.
pub fn pair_rho(psi: &DVector<C>, i: usize, j: usize) -> DMatrix<C> {
    let mut rho = DMatrix::<C>::zeros(4, 4);
    let rest = !((1usize << i) | (1usize << j));
    for x in 0..psi.len() {
        for y in 0..psi.len() {
            if x & rest != y & rest {
                continue;
            }
            let r = 2 * (x >> i & 1) + (x >> j & 1);
            let s = 2 * (y >> i & 1) + (y >> j & 1);
            rho[(r, s)] += psi[x] * psi[y].conj();
        }
    }
    rho
}
