//! Open SSH and Kitaev chains as qubit operators, plus the analytic band
//! formulas and single-particle spectra used for cross-checks.
//!
//! Fermion site `n` is qubit `n`; `c_n = (Π_{m<n} Z_m)(X_n + iY_n)/2`, so an
//! occupied site is `|1⟩` and `c†_n c_n = (I − Z_n)/2`. For the SSH chain,
//! cell `j` (1-based) puts sublattice A on qubit `2j−2` and B on `2j−1`, which
//! makes every even–odd qubit pair an intra-cell (`v`) bond.

mod exact;
mod pauli;

pub use exact::{
    dense_matrix, dense_matrix_with_cap, exact_ground, exact_ground_with_cap, SpectrumResult,
    DEFAULT_DENSE_CAP, DEFAULT_EXACT_CAP, DEGENERACY_TOL,
};
pub use pauli::{Pauli, PauliString, PauliSum, SparseOperator};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SshParams {
    pub n_sites: usize,
    pub delta: f64,
}

impl SshParams {
    pub fn new(n_sites: usize, delta: f64) -> Result<Self> {
        let p = Self { n_sites, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 || self.n_sites % 2 != 0 {
            return Err(Error::InvalidParams(format!(
                "SSH chain needs an even number of sites >= 2, got {}",
                self.n_sites
            )));
        }
        if !(-1.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidParams(format!("delta {} outside [-1, 1]", self.delta)));
        }
        Ok(())
    }

    /// Intra-cell hopping.
    pub fn v(&self) -> f64 {
        1.0 - self.delta
    }

    /// Inter-cell hopping.
    pub fn w(&self) -> f64 {
        1.0 + self.delta
    }

    /// Hopping on the bond between qubits `q` and `q + 1`.
    pub fn bond(&self, q: usize) -> f64 {
        if q % 2 == 0 {
            self.v()
        } else {
            self.w()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KitaevParams {
    pub n_sites: usize,
    pub mu: f64,
    pub t: f64,
    pub delta_pair: f64,
}

impl KitaevParams {
    pub fn new(n_sites: usize, mu: f64, t: f64, delta_pair: f64) -> Result<Self> {
        let p = Self { n_sites, mu, t, delta_pair };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::InvalidParams(format!(
                "Kitaev chain needs at least 2 sites, got {}",
                self.n_sites
            )));
        }
        if ![self.mu, self.t, self.delta_pair].iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("Kitaev parameter".into()));
        }
        Ok(())
    }

    pub fn mu_over_t(&self) -> Result<f64> {
        if self.t == 0.0 {
            return Err(Error::InvalidParams("mu/t undefined for t = 0".into()));
        }
        Ok(self.mu / self.t)
    }
}

fn two_site(n: usize, coef: f64, q: usize, p: Pauli) -> Result<PauliString> {
    PauliString::from_sparse(n, coef, &[(q, p), (q + 1, p)])
}

/// Jordan-Wigner image of the open SSH chain: an XX+YY chain with alternating couplings.
pub fn ssh_hamiltonian(params: &SshParams) -> Result<PauliSum> {
    params.validate()?;
    let n = params.n_sites;
    let mut terms = Vec::with_capacity(2 * (n - 1));
    for q in 0..n - 1 {
        let half = -0.5 * params.bond(q);
        terms.push(two_site(n, half, q, Pauli::X)?);
        terms.push(two_site(n, half, q, Pauli::Y)?);
    }
    PauliSum::new(n, terms)
}

/// Jordan-Wigner image of the open Kitaev chain, constant term included.
pub fn kitaev_hamiltonian(params: &KitaevParams) -> Result<PauliSum> {
    params.validate()?;
    let n = params.n_sites;
    let KitaevParams { mu, t, delta_pair, .. } = *params;
    let mut terms = Vec::with_capacity(3 * n);
    terms.push(PauliString::from_sparse(n, -mu * n as f64 / 2.0, &[])?);
    for q in 0..n {
        terms.push(PauliString::from_sparse(n, mu / 2.0, &[(q, Pauli::Z)])?);
    }
    for q in 0..n - 1 {
        // hopping −(t/2)(XX+YY), pairing −(Δ/2)(XX−YY)
        terms.push(two_site(n, -(t + delta_pair) / 2.0, q, Pauli::X)?);
        terms.push(two_site(n, -(t - delta_pair) / 2.0, q, Pauli::Y)?);
    }
    PauliSum::new(n, terms)
}

/// Bulk SSH bands `±√(v² + w² + 2vw cos k)` at unit lattice spacing.
pub fn ssh_bulk_dispersion(params: &SshParams, k: f64) -> (f64, f64) {
    let (v, w) = (params.v(), params.w());
    let e = (v * v + w * w + 2.0 * v * w * k.cos()).max(0.0).sqrt();
    (-e, e)
}

/// Bogoliubov bands `±√(4Δ² sin²k + (μ + 2t cos k)²)` at unit lattice spacing.
pub fn kitaev_bulk_dispersion(params: &KitaevParams, k: f64) -> (f64, f64) {
    let KitaevParams { mu, t, delta_pair, .. } = *params;
    let pair = 2.0 * delta_pair * k.sin();
    let kin = mu + 2.0 * t * k.cos();
    let e = (pair * pair + kin * kin).sqrt();
    (-e, e)
}

/// Closing points of the Kitaev bulk gap in `μ/t`: `μ = −2t cos k` with `sin k = 0`
/// whenever `Δ ≠ 0`.
pub fn kitaev_phase_boundaries() -> (f64, f64) {
    (-2.0, 2.0)
}

/// Eigenvalues of the `N×N` single-particle hopping matrix, ascending.
pub fn ssh_single_particle_spectrum(params: &SshParams) -> Result<Vec<f64>> {
    params.validate()?;
    let n = params.n_sites;
    let mut h = DMatrix::<f64>::zeros(n, n);
    for q in 0..n - 1 {
        h[(q, q + 1)] = -params.bond(q);
        h[(q + 1, q)] = -params.bond(q);
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Hybridization energy `ΔE` of the edge modes: the single-particle level closest to zero.
/// Values below `1e-14` are reported as exactly zero.
pub fn ssh_edge_splitting(params: &SshParams) -> Result<f64> {
    let ev = ssh_single_particle_spectrum(params)?;
    let e = ev.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
    Ok(if e < 1e-14 { 0.0 } else { e })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizationFit {
    /// Fitted decay length in sites, from `ΔE ∝ exp(−N/ξ)`.
    pub xi: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub sizes: Vec<usize>,
    pub splittings: Vec<f64>,
}

/// Least-squares fit of `ln ΔE` against `N`. Returns `Ok(None)` when some `ΔE`
/// is exactly zero (decoupled edges) or fewer than two sizes are given.
pub fn fit_localization_length(delta: f64, sizes: &[usize]) -> Result<Option<LocalizationFit>> {
    let splittings = sizes
        .iter()
        .map(|&n| ssh_edge_splitting(&SshParams::new(n, delta)?))
        .collect::<Result<Vec<_>>>()?;
    if sizes.len() < 2 || splittings.iter().any(|&e| e == 0.0) {
        return Ok(None);
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = splittings.iter().map(|e| e.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(Some(LocalizationFit {
        xi: -1.0 / slope,
        slope,
        intercept,
        r_squared,
        sizes: sizes.to_vec(),
        splittings,
    }))
}
