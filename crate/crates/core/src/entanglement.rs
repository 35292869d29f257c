//! Two-qubit reduced states, concurrence, purity and fidelity.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::StateVector;

/// Round-off floor for eigenvalues of `ρρ̃` before taking square roots.
const EIGEN_CLAMP: f64 = 1e-10;

/// Reduced state of qubits `(i, j)` in the basis `|q_i q_j⟩ ∈ {00, 01, 10, 11}`,
/// `q_i` being the high bit of the 4×4 index.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix2Q {
    matrix: Matrix4<Complex64>,
    pair: (usize, usize),
}

impl DensityMatrix2Q {
    /// Wraps a 4×4 matrix, checking Hermiticity and unit trace to `1e-10`.
    pub fn new(matrix: Matrix4<Complex64>, pair: (usize, usize)) -> Result<Self> {
        let herm = (matrix - matrix.adjoint()).norm();
        if herm > 1e-10 {
            return Err(Error::InvalidState(format!("density matrix not Hermitian ({herm:.2e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::BadTrace(tr.re));
        }
        Ok(Self { matrix, pair })
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.matrix
    }

    pub fn pair(&self) -> (usize, usize) {
        self.pair
    }

    pub fn from_pure(amplitudes: [Complex64; 4], pair: (usize, usize)) -> Result<Self> {
        let v = nalgebra::Vector4::from(amplitudes);
        let n = v.norm();
        let v = v / Complex64::new(n, 0.0);
        Self::new(v * v.adjoint(), pair)
    }
}

#[inline]
fn insert_zero_bit(x: usize, pos: usize) -> usize {
    let low = x & ((1usize << pos) - 1);
    ((x >> pos) << (pos + 1)) | low
}

/// Traces out every qubit except `pair`.
pub fn reduced_density_matrix(state: &StateVector, pair: (usize, usize)) -> Result<DensityMatrix2Q> {
    let (i, j) = pair;
    let n = state.n_qubits();
    for q in [i, j] {
        if q >= n {
            return Err(Error::QubitOutOfRange { qubit: q, n_qubits: n });
        }
    }
    if i == j {
        return Err(Error::DuplicateQubits(i));
    }
    let (lo, hi) = (i.min(j), i.max(j));
    let (mi, mj) = (1usize << i, 1usize << j);
    let offsets = [0, mj, mi, mi | mj];
    let amps = state.amplitudes();
    let mut rho = Matrix4::<Complex64>::zeros();
    for k in 0..amps.len() >> 2 {
        let base = insert_zero_bit(insert_zero_bit(k, lo), hi);
        let a = offsets.map(|o| amps[base | o]);
        for r in 0..4 {
            if a[r] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in 0..4 {
                rho[(r, c)] += a[r] * a[c].conj();
            }
        }
    }
    // symmetrize away the last bits of round-off
    let rho = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(DensityMatrix2Q { matrix: rho, pair })
}

fn spin_flipped(rho: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    // σy⊗σy is real: antidiagonal (-1, 1, 1, -1)
    let mut yy = Matrix4::<Complex64>::zeros();
    yy[(0, 3)] = (-1.0).into();
    yy[(1, 2)] = 1.0.into();
    yy[(2, 1)] = 1.0.into();
    yy[(3, 0)] = (-1.0).into();
    yy * rho.conjugate() * yy
}

/// Wootters concurrence. The `λᵢ` are taken as square roots of the
/// eigenvalues of the Hermitian `√ρ ρ̃ √ρ`, which share the spectrum of `ρρ̃`.
pub fn concurrence(rho: &DensityMatrix2Q) -> Result<f64> {
    let tr = rho.matrix.trace().re;
    if (tr - 1.0).abs() > 1e-6 {
        return Err(Error::BadTrace(tr));
    }
    let sqrt_rho = hermitian_sqrt(&rho.matrix);
    let m = sqrt_rho * spin_flipped(&rho.matrix) * sqrt_rho;
    let m = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let ev = nalgebra::SymmetricEigen::new(m).eigenvalues;
    let mut lambdas: Vec<f64> =
        ev.iter().map(|&x| if x < EIGEN_CLAMP { 0.0 } else { x.sqrt() }).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
    Ok(c.clamp(0.0, 1.0))
}

fn hermitian_sqrt(m: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    let eig = nalgebra::SymmetricEigen::new(*m);
    let roots = eig.eigenvalues.map(|x| Complex64::new(x.max(0.0).sqrt(), 0.0));
    let u = eig.eigenvectors;
    u * Matrix4::from_diagonal(&roots) * u.adjoint()
}

/// `Tr ρ²`, clamped to `[1/4, 1]` up to `1e-10`.
pub fn purity(rho: &DensityMatrix2Q) -> f64 {
    let p: f64 = rho.matrix.iter().map(|z| z.norm_sqr()).sum();
    p.clamp(0.25 - 1e-10, 1.0 + 1e-10)
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn bell() -> DensityMatrix2Q {
        DensityMatrix2Q::from_pure([c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)], (0, 1))
            .unwrap()
    }

    #[test]
    fn product_state_rdm() {
        let s = StateVector::zero(4).unwrap();
        for pair in [(0, 1), (1, 3), (2, 0)] {
            let r = reduced_density_matrix(&s, pair).unwrap();
            let mut expect = Matrix4::<Complex64>::zeros();
            expect[(0, 0)] = c(1.0);
            assert_eq!(*r.matrix(), expect);
        }
    }

    #[test]
    fn ghz_pair_is_classical_mixture() {
        let mut amps = vec![c(0.0); 8];
        amps[0] = c(FRAC_1_SQRT_2);
        amps[7] = c(FRAC_1_SQRT_2);
        let ghz = StateVector::from_amplitudes(amps).unwrap();
        let r = reduced_density_matrix(&ghz, (0, 1)).unwrap();
        let expect = Matrix4::from_diagonal(&nalgebra::Vector4::new(c(0.5), c(0.0), c(0.0), c(0.5)));
        assert!((r.matrix() - expect).norm() < 1e-15);
        assert_eq!(concurrence(&r).unwrap(), 0.0);
        assert!((purity(&r) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_qubit_bell_rdm_is_its_projector() {
        let mut amps = vec![c(0.0); 4];
        amps[0] = c(FRAC_1_SQRT_2);
        amps[3] = c(FRAC_1_SQRT_2);
        let s = StateVector::from_amplitudes(amps).unwrap();
        let r = reduced_density_matrix(&s, (0, 1)).unwrap();
        assert!((r.matrix() - bell().matrix()).norm() < 1e-15);
    }

    #[test]
    fn rdm_index_errors() {
        let s = StateVector::zero(3).unwrap();
        assert!(reduced_density_matrix(&s, (0, 3)).is_err());
        assert!(reduced_density_matrix(&s, (1, 1)).is_err());
    }

    #[test]
    fn concurrence_extremes() {
        assert!((concurrence(&bell()).unwrap() - 1.0).abs() < 1e-12);
        let prod = DensityMatrix2Q::from_pure([c(0.6), c(0.8), c(0.0), c(0.0)], (0, 1)).unwrap();
        assert!(concurrence(&prod).unwrap() < 1e-9);
    }

    #[test]
    fn concurrence_rejects_bad_trace() {
        let m = Matrix4::<Complex64>::identity() * c(0.5);
        let bogus = DensityMatrix2Q { matrix: m, pair: (0, 1) };
        assert!(matches!(concurrence(&bogus), Err(Error::BadTrace(_))));
        assert!(DensityMatrix2Q::new(m, (0, 1)).is_err());
    }

    #[test]
    fn purity_examples() {
        assert!((purity(&bell()) - 1.0).abs() < 1e-14);
        let mixed = DensityMatrix2Q::new(Matrix4::identity() * c(0.25), (0, 1)).unwrap();
        assert!((purity(&mixed) - 0.25).abs() < 1e-15);
        let half = Matrix4::from_diagonal(&nalgebra::Vector4::new(c(0.5), c(0.5), c(0.0), c(0.0)));
        assert!((purity(&DensityMatrix2Q::new(half, (0, 1)).unwrap()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        let plus = StateVector::from_amplitudes(vec![c(1.0), c(1.0)]).unwrap();
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-15);
        assert!(fidelity(&zero, &StateVector::zero(2).unwrap()).is_err());
    }
}
