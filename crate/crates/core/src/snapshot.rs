//! Binary snapshot formats.
//!
//! * `SNSF` — one spectral vector field: header (magic, version `u32`,
//!   `K_max` `u32`, mode count `u64`), then little-endian `f64` pairs
//!   `(re, im)` per component in canonical mode order.
//! * `BMPT` — a sampled Brownian path: the `SNSF`-style header followed by
//!   the seed, covariance parameters, the time grid, and one field block
//!   of increments per step.
//! * `SNST` — a full trajectory (time grid plus `v`, `pi`, `z`, `W` per
//!   node), the unit consumed by `certify --traj`.
//!
//! Coefficients are always written as `f64` regardless of the in-memory
//! scalar type.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex;

use crate::basis::{Basis, BasisSpec};
use crate::error::{Error, Result};
use crate::field::{ScalarSpectralField, SpectralField};
use crate::noise::{BrownianPath, CovarianceSpec};
use crate::scalar::Scalar;
use crate::solver::Trajectory;
use crate::stokes::StokesTrajectory;

pub const FIELD_MAGIC: &[u8; 4] = b"SNSF";
pub const PATH_MAGIC: &[u8; 4] = b"BMPT";
pub const TRAJ_MAGIC: &[u8; 4] = b"SNST";
pub const VERSION: u32 = 1;

fn write_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_f64<W: Write>(w: &mut W, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn write_header<W: Write>(w: &mut W, magic: &[u8; 4], basis: &Basis) -> Result<()> {
    w.write_all(magic)?;
    write_u32(w, VERSION)?;
    write_u32(w, basis.spec.k_max)?;
    write_u64(w, basis.len() as u64)?;
    Ok(())
}

fn read_header<R: Read>(r: &mut R, magic: &[u8; 4], basis: &Basis) -> Result<()> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m)?;
    if &m != magic {
        return Err(Error::Snapshot(format!(
            "bad magic {:?}, expected {:?}",
            m, magic
        )));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let k_max = read_u32(r)?;
    let count = read_u64(r)?;
    if k_max != basis.spec.k_max || count != basis.len() as u64 {
        return Err(Error::Snapshot(format!(
            "basis mismatch: file has k_max = {k_max}, {count} modes"
        )));
    }
    Ok(())
}

fn write_coeffs<W: Write, T: Scalar>(w: &mut W, coeff: &[[Complex<T>; 3]]) -> Result<()> {
    for v in coeff {
        for c in v {
            write_f64(w, c.re.to_f64_())?;
            write_f64(w, c.im.to_f64_())?;
        }
    }
    Ok(())
}

fn read_coeffs<R: Read, T: Scalar>(r: &mut R, n: usize) -> Result<Vec<[Complex<T>; 3]>> {
    let mut coeff = Vec::with_capacity(n);
    for _ in 0..n {
        let mut v = [Complex::new(T::zero(), T::zero()); 3];
        for c in &mut v {
            let re = read_f64(r)?;
            let im = read_f64(r)?;
            *c = Complex::new(T::from_f64_(re), T::from_f64_(im));
        }
        coeff.push(v);
    }
    Ok(coeff)
}

fn write_scalar_coeffs<W: Write, T: Scalar>(w: &mut W, coeff: &[Complex<T>]) -> Result<()> {
    for c in coeff {
        write_f64(w, c.re.to_f64_())?;
        write_f64(w, c.im.to_f64_())?;
    }
    Ok(())
}

fn read_scalar_coeffs<R: Read, T: Scalar>(r: &mut R, n: usize) -> Result<Vec<Complex<T>>> {
    let mut coeff = Vec::with_capacity(n);
    for _ in 0..n {
        let re = read_f64(r)?;
        let im = read_f64(r)?;
        coeff.push(Complex::new(T::from_f64_(re), T::from_f64_(im)));
    }
    Ok(coeff)
}

pub fn write_field<W: Write, T: Scalar>(w: &mut W, field: &SpectralField<T>) -> Result<()> {
    write_header(w, FIELD_MAGIC, &field.basis)?;
    write_coeffs(w, &field.coeff)
}

pub fn read_field<R: Read, T: Scalar>(r: &mut R, basis: &Arc<Basis>) -> Result<SpectralField<T>> {
    read_header(r, FIELD_MAGIC, basis)?;
    let coeff = read_coeffs(r, basis.len())?;
    Ok(SpectralField { basis: Arc::clone(basis), coeff })
}

pub fn write_path<W: Write, T: Scalar>(w: &mut W, path: &BrownianPath<T>) -> Result<()> {
    write_header(w, PATH_MAGIC, &path.cov.basis)?;
    write_u64(w, path.seed)?;
    write_f64(w, path.cov.amplitude)?;
    write_f64(w, path.cov.decay_rate)?;
    write_f64(w, path.cov.delta)?;
    write_u64(w, path.grid.len() as u64)?;
    for t in &path.grid {
        write_f64(w, t.to_f64_())?;
    }
    for inc in &path.increments {
        write_coeffs(w, &inc.coeff)?;
    }
    Ok(())
}

pub fn read_path<R: Read, T: Scalar>(r: &mut R, basis: &Arc<Basis>) -> Result<BrownianPath<T>> {
    read_header(r, PATH_MAGIC, basis)?;
    let seed = read_u64(r)?;
    let c = read_f64(r)?;
    let decay = read_f64(r)?;
    let delta = read_f64(r)?;
    let n = read_u64(r)? as usize;
    let mut grid = Vec::with_capacity(n);
    for _ in 0..n {
        grid.push(T::from_f64_(read_f64(r)?));
    }
    let cov = CovarianceSpec::new(c, decay, delta, Arc::clone(basis));
    let steps = n.saturating_sub(1);
    let mut increments = Vec::with_capacity(steps);
    for _ in 0..steps {
        let coeff = read_coeffs(r, basis.len())?;
        increments.push(SpectralField { basis: Arc::clone(basis), coeff });
    }
    Ok(BrownianPath { grid, increments, seed, cov })
}

pub fn write_traj<W: Write, T: Scalar>(w: &mut W, traj: &Trajectory<T>) -> Result<()> {
    let basis = &traj.v[0].basis;
    write_header(w, TRAJ_MAGIC, basis)?;
    write_u32(w, basis.spec.m_grid as u32)?;
    write_f64(w, basis.spec.dealias_fraction)?;
    write_u64(w, traj.solver_rank as u64)?;
    write_path(w, &traj.stokes.path)?;
    write_u64(w, traj.grid.len() as u64)?;
    for i in 0..traj.grid.len() {
        write_f64(w, traj.grid[i].to_f64_())?;
        write_coeffs(w, &traj.v[i].coeff)?;
        write_scalar_coeffs(w, &traj.pi[i].coeff)?;
        write_coeffs(w, &traj.stokes.z[i].coeff)?;
        write_scalar_coeffs(w, &traj.stokes.q[i].coeff)?;
    }
    Ok(())
}

/// Reads a trajectory, rebuilding the basis from the stored spec.
pub fn read_traj<R: Read, T: Scalar>(r: &mut R) -> Result<Trajectory<T>> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m)?;
    if &m != TRAJ_MAGIC {
        return Err(Error::Snapshot(format!("bad magic {m:?}")));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let k_max = read_u32(r)?;
    let mode_count = read_u64(r)?;
    let m_grid = read_u32(r)? as usize;
    let dealias = read_f64(r)?;
    let basis = BasisSpec::new(k_max, m_grid, dealias)?.build()?;
    if basis.len() as u64 != mode_count {
        return Err(Error::Snapshot("mode count mismatch".into()));
    }
    let solver_rank = read_u64(r)? as usize;
    let path: BrownianPath<T> = read_path(r, &basis)?;
    let n = read_u64(r)? as usize;
    let mut grid = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut pi = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for _ in 0..n {
        grid.push(T::from_f64_(read_f64(r)?));
        v.push(SpectralField { basis: Arc::clone(&basis), coeff: read_coeffs(r, basis.len())? });
        pi.push(ScalarSpectralField {
            basis: Arc::clone(&basis),
            coeff: read_scalar_coeffs(r, basis.len())?,
        });
        z.push(SpectralField { basis: Arc::clone(&basis), coeff: read_coeffs(r, basis.len())? });
        q.push(ScalarSpectralField {
            basis: Arc::clone(&basis),
            coeff: read_scalar_coeffs(r, basis.len())?,
        });
    }
    let stokes = StokesTrajectory { grid: grid.clone(), z, q, path };
    Ok(Trajectory { grid, v, pi, stokes, solver_rank })
}
