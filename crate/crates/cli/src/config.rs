//! JSON run configuration: schema, validation and builders for the
//! core objects (basis, covariance, forcing, solver settings).

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sns_core::noise::transverse_basis;
use sns_core::solver::SolverConfig;
use sns_core::{Basis, BasisSpec, Covariance, Field, Forcing};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    #[serde(rename = "K_max")]
    pub k_max: u32,
    #[serde(rename = "M_grid")]
    pub m_grid: usize,
    /// Dealias fraction in (0, 1]; 2/3 is the classical choice.
    pub dealias: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub c: f64,
    pub r: f64,
    pub delta: f64,
}

/// One forced mode: wavevector plus complex amplitude `(re, im)`.
/// The amplitude multiplies the first transverse polarization of `k`,
/// and the conjugate mode is added automatically, so every entry
/// contributes a real, divergence-free field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForcingMode(pub [i32; 3], pub [f64; 2]);

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSection {
    #[serde(default)]
    pub modes: Vec<ForcingMode>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// Galerkin regularization rank for the advecting field; capped at
    /// the basis size, so a large value means "no extra truncation".
    #[serde(rename = "N")]
    pub n: usize,
    pub dt: f64,
    pub tol_fp: f64,
    pub max_iter: usize,
    #[serde(rename = "T")]
    pub t_end: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub size: usize,
    pub base_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    pub dir: PathBuf,
    /// Write a field snapshot every this many time nodes; 0 disables.
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub basis: BasisSection,
    pub noise: NoiseSection,
    #[serde(default)]
    pub forcing: ForcingSection,
    pub solver: SolverSection,
    pub ensemble: EnsembleSection,
    pub outputs: OutputsSection,
}

impl RunConfig {
    /// Read, hash and parse a config file. The returned string is the
    /// SHA-256 of the raw bytes, recorded in `manifest.json`.
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let hash = hex::encode(Sha256::digest(&bytes));
        let cfg: RunConfig = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok((cfg, hash))
    }

    pub fn validate(&self) -> Result<()> {
        let spec =
            BasisSpec { k_max: self.basis.k_max, m_grid: self.basis.m_grid, dealias_fraction: self.basis.dealias };
        spec.validate().map_err(|e| CliError::Config(format!("basis: {e}")))?;
        if !(self.solver.dt > 0.0) || !(self.solver.t_end > 0.0) {
            return Err(CliError::Config("solver: dt and T must be positive".into()));
        }
        let steps = self.solver.t_end / self.solver.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(CliError::Config(format!(
                "solver: T/dt = {steps} is not an integer within 1e-9"
            )));
        }
        if self.solver.n == 0 || self.solver.max_iter == 0 || !(self.solver.tol_fp > 0.0) {
            return Err(CliError::Config(
                "solver: N and max_iter must be >= 1, tol_fp positive".into(),
            ));
        }
        if !(self.noise.c >= 0.0) || !(self.noise.r > 0.0) || !(self.noise.delta >= 0.0) {
            return Err(CliError::Config("noise: need c >= 0, r > 0, delta >= 0".into()));
        }
        if self.ensemble.size == 0 {
            return Err(CliError::Config("ensemble: size must be >= 1".into()));
        }
        let k = self.basis.k_max as i32;
        for ForcingMode(kvec, _) in &self.forcing.modes {
            if *kvec == [0, 0, 0] || kvec.iter().any(|kj| kj.abs() > k) {
                return Err(CliError::Config(format!(
                    "forcing: mode {kvec:?} outside the cutoff |k_j| <= {k} (k = 0 excluded)"
                )));
            }
        }
        Ok(())
    }

    pub fn build_basis(&self) -> Result<Arc<Basis>> {
        Ok(BasisSpec::new(self.basis.k_max, self.basis.m_grid, self.basis.dealias)?.build()?)
    }

    pub fn build_covariance(&self, basis: &Arc<Basis>) -> Covariance {
        Covariance::new(self.noise.c, self.noise.r, self.noise.delta, Arc::clone(basis))
    }

    /// Assemble the deterministic body force from the configured modes.
    pub fn build_forcing(&self, basis: &Arc<Basis>) -> Result<Forcing> {
        let mut raw = Field::zero(Arc::clone(basis));
        for ForcingMode(kvec, amp) in &self.forcing.modes {
            let i = basis.mode_index(*kvec).ok_or_else(|| {
                CliError::Config(format!("forcing: mode {kvec:?} outside the cutoff"))
            })?;
            let j = basis.conj_index[i];
            let (e1, _) = transverse_basis(*kvec);
            let a = Complex::new(amp[0], amp[1]);
            for c in 0..3 {
                let contrib = a * e1[c];
                raw.coeff[i][c] += contrib;
                raw.coeff[j][c] += contrib.conj();
            }
        }
        Ok(Forcing::ingest(raw))
    }

    pub fn build_solver_config(&self, linear_only: bool) -> SolverConfig {
        SolverConfig {
            rank: self.solver.n,
            dt: self.solver.dt,
            tol_fp: self.solver.tol_fp,
            max_iter: self.solver.max_iter,
            linear_only,
            ..SolverConfig::default()
        }
    }

    /// Uniform time grid with exactly `T/dt` steps.
    pub fn time_grid(&self) -> Vec<f64> {
        let n = (self.solver.t_end / self.solver.dt).round() as usize;
        (0..=n).map(|i| self.solver.t_end * i as f64 / n as f64).collect()
    }

    /// Member seeds: `base_seed + i` (or `seed + i` under `--seed`).
    pub fn seeds(&self, override_seed: Option<u64>) -> Vec<u64> {
        let base = override_seed.unwrap_or(self.ensemble.base_seed);
        (0..self.ensemble.size as u64).map(|i| base + i).collect()
    }
}
