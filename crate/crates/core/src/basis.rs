//! The truncated divergence-free Fourier basis on the periodic box.
//!
//! Modes are the wavevectors `k` in `[-K_max, K_max]^3 \ {0}`, ordered
//! canonically by `|k|^2` ascending with lexicographic tie-break on
//! `(k1, k2, k3)`. The zero mode is excluded, which fixes the spatial mean
//! to zero, makes the Stokes operator invertible and gives `lambda_1 = 1`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// User-facing description of the truncated basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    /// Lattice cutoff: modes satisfy `max_j |k_j| <= k_max`.
    pub k_max: u32,
    /// Collocation points per axis for physical-space quadrature.
    pub m_grid: usize,
    /// Dealias mask keeps modes with every `|k_j| <= dealias_fraction * k_max`.
    pub dealias_fraction: f64,
}

impl BasisSpec {
    pub fn new(k_max: u32, m_grid: usize, dealias_fraction: f64) -> Result<Self> {
        let spec = Self { k_max, m_grid, dealias_fraction };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max < 1 {
            return Err(Error::InvalidArgument("k_max must be >= 1".into()));
        }
        if self.m_grid < 2 * self.k_max as usize + 2 {
            return Err(Error::InvalidArgument(format!(
                "m_grid = {} too small for k_max = {}; need m_grid >= 2*k_max + 2",
                self.m_grid, self.k_max
            )));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(Error::InvalidArgument(
                "dealias_fraction must lie in (0, 1]".into(),
            ));
        }
        if self.dealias_fraction * (self.k_max as f64) < 1.0 {
            return Err(Error::InvalidArgument(
                "dealias_fraction * k_max must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Largest per-axis wavenumber surviving the dealias mask.
    pub fn dealias_cutoff(&self) -> i32 {
        (self.dealias_fraction * self.k_max as f64 + 1e-9).floor() as i32
    }

    pub fn build(self) -> Result<Arc<Basis>> {
        self.validate()?;
        Ok(Arc::new(Basis::new(self)))
    }
}

/// Precomputed mode tables shared by every field on one basis.
#[derive(Debug)]
pub struct Basis {
    pub spec: BasisSpec,
    /// Wavevectors in canonical order.
    pub modes: Vec<[i32; 3]>,
    /// `|k|^2` per mode (the Stokes eigenvalue).
    pub lambda: Vec<f64>,
    /// Index of `-k` for each mode.
    pub conj_index: Vec<usize>,
    /// Whether the mode survives the dealias mask.
    pub in_band: Vec<bool>,
    /// Dense lookup `(k1 + K, k2 + K, k3 + K) -> mode index`.
    index: Vec<usize>,
}

const NO_MODE: usize = usize::MAX;

impl Basis {
    fn new(spec: BasisSpec) -> Self {
        let k = spec.k_max as i32;
        let mut modes = Vec::new();
        for k1 in -k..=k {
            for k2 in -k..=k {
                for k3 in -k..=k {
                    if (k1, k2, k3) != (0, 0, 0) {
                        modes.push([k1, k2, k3]);
                    }
                }
            }
        }
        modes.sort_by_key(|m| {
            (m[0] * m[0] + m[1] * m[1] + m[2] * m[2], m[0], m[1], m[2])
        });

        let side = (2 * k + 1) as usize;
        let mut index = vec![NO_MODE; side * side * side];
        for (i, m) in modes.iter().enumerate() {
            index[Self::dense(m, k)] = i;
        }

        let kd = spec.dealias_cutoff();
        let lambda: Vec<f64> = modes
            .iter()
            .map(|m| (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64)
            .collect();
        let conj_index: Vec<usize> = modes
            .iter()
            .map(|m| index[Self::dense(&[-m[0], -m[1], -m[2]], k)])
            .collect();
        let in_band: Vec<bool> = modes
            .iter()
            .map(|m| m.iter().all(|kj| kj.abs() <= kd))
            .collect();

        Basis { spec, modes, lambda, conj_index, in_band, index }
    }

    fn dense(m: &[i32; 3], k: i32) -> usize {
        let side = (2 * k + 1) as usize;
        let a = (m[0] + k) as usize;
        let b = (m[1] + k) as usize;
        let c = (m[2] + k) as usize;
        (a * side + b) * side + c
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Mode index of `k`, if it lies inside the cutoff.
    pub fn mode_index(&self, k: [i32; 3]) -> Option<usize> {
        let kk = self.spec.k_max as i32;
        if k.iter().any(|kj| kj.abs() > kk) || k == [0, 0, 0] {
            return None;
        }
        match self.index[Self::dense(&k, kk)] {
            NO_MODE => None,
            i => Some(i),
        }
    }

    /// A mode represents its conjugate pair if `k` is lexicographically
    /// positive; exactly one of `{k, -k}` is a representative.
    pub fn is_representative(&self, i: usize) -> bool {
        let m = &self.modes[i];
        for kj in m {
            if *kj > 0 {
                return true;
            }
            if *kj < 0 {
                return false;
            }
        }
        false
    }

    /// Number of modes retained by `galerkin_project` with rank `n`:
    /// the first `n` modes in canonical order, closed under conjugation
    /// (conjugate closure keeps projected fields real).
    pub fn galerkin_mask(&self, n: usize) -> Vec<bool> {
        let mut keep: Vec<bool> = (0..self.len()).map(|i| i < n).collect();
        for i in 0..self.len() {
            if keep[i] {
                keep[self.conj_index[i]] = true;
            }
        }
        keep
    }
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

pub fn check_same_basis(a: &Arc<Basis>, b: &Arc<Basis>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a.spec == b.spec {
        Ok(())
    } else {
        Err(Error::BasisMismatch(format!("{:?} vs {:?}", a.spec, b.spec)))
    }
}
