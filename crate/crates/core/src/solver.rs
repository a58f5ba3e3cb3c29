//! The nonlinear Galerkin solver for the fluctuation field `v = u - z`.
//!
//! With `z` absorbing forcing and noise, `v` satisfies the random PDE
//!
//! `dv/dt + A v + P_N B(P_N(v + z), v + z) = 0`
//!
//! advanced by an exponential Euler step whose implicit advection is
//! resolved by a contraction fixed point. The convective term is formed
//! pointwise on the collocation lattice, dealiased, and Leray-projected;
//! the pressure is recovered from the gradient part the projection
//! removed.

use std::sync::Arc;

use num_complex::Complex;

use crate::basis::check_same_basis;
use crate::error::{Error, Result};
use crate::field::{GridField, ScalarSpectralField, SpectralField};
use crate::noise::{split_increment, BrownianPath, CovarianceSpec};
use crate::scalar::Scalar;
use crate::stokes::{ou_increment_step, ForcingSpec, StokesTrajectory};

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Galerkin rank `N`: the solution lives in the span of the first `N`
    /// canonical modes (closed under conjugation).
    pub rank: usize,
    /// Nominal step used by callers that build uniform grids.
    pub dt: f64,
    /// Relative tolerance of the per-step fixed point.
    pub tol_fp: f64,
    /// Iteration budget of the per-step fixed point.
    pub max_iter: usize,
    /// How many times a rejected step may be halved (bridge-consistently)
    /// before the run aborts.
    pub max_halvings: u32,
    /// Drop the convective term entirely; `u = v + z` then solves the
    /// linear Stokes equation.
    pub linear_only: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rank: usize::MAX,
            dt: 1e-3,
            tol_fp: 1e-10,
            max_iter: 50,
            max_halvings: 6,
            linear_only: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::InvalidArgument("solver rank must be >= 1".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidArgument("dt must be positive".into()));
        }
        if !(self.tol_fp > 0.0) {
            return Err(Error::InvalidArgument("tol_fp must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Output of one run: the fluctuation `v`, its pressure, and the Stokes
/// pair that completes `u = v + z`.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Scalar> {
    pub grid: Vec<T>,
    pub v: Vec<SpectralField<T>>,
    /// Pressure of the convective term at each node; the total pressure
    /// of `u` is `pi + q`.
    pub pi: Vec<ScalarSpectralField<T>>,
    pub stokes: StokesTrajectory<T>,
    pub solver_rank: usize,
}

impl<T: Scalar> Trajectory<T> {
    /// `u(t_j) = v(t_j) + z(t_j)`.
    pub fn u(&self, j: usize) -> SpectralField<T> {
        self.v[j].add(&self.stokes.z[j])
    }
}

/// Unprojected convective term `(w . grad) u` on the collocation
/// lattice, dealiased but *not* Leray-projected.
pub fn advect_raw<T: Scalar>(
    w: &SpectralField<T>,
    u: &SpectralField<T>,
) -> Result<SpectralField<T>> {
    check_same_basis(&w.basis, &u.basis)?;
    let gw = w.to_grid();
    let du = [u.derivative(0).to_grid(), u.derivative(1).to_grid(), u.derivative(2).to_grid()];
    let m = w.basis.spec.m_grid;
    let mut out = GridField::zero(Arc::clone(&w.basis));
    for j in 0..m * m * m {
        for c in 0..3 {
            let mut acc = T::zero();
            for a in 0..3 {
                acc += gw.values[j][a] * du[a].values[j][c];
            }
            out.values[j][c] = acc;
        }
    }
    out.to_spectral()
}

/// The projected bilinear term `B(w, u) = P (w . grad) u`.
pub fn bilinear_b<T: Scalar>(
    w: &SpectralField<T>,
    u: &SpectralField<T>,
) -> Result<SpectralField<T>> {
    let mut b = advect_raw(w, u)?;
    b.leray_project();
    Ok(b)
}

/// Pressure whose gradient is the part of `raw` that the Leray
/// projection removes: `pi_hat_k = i (k . raw_hat_k) / |k|^2`.
pub fn recover_pressure<T: Scalar>(raw: &SpectralField<T>) -> ScalarSpectralField<T> {
    let basis = &raw.basis;
    let mut pi = ScalarSpectralField::zero(Arc::clone(basis));
    for (i, m) in basis.modes.iter().enumerate() {
        let mut dot = Complex::new(T::zero(), T::zero());
        for c in 0..3 {
            dot = dot + raw.coeff[i][c].scale(T::from_f64_(m[c] as f64));
        }
        let k2 = T::from_f64_(basis.lambda[i]);
        pi.coeff[i] = Complex::new(T::zero(), T::one()) * dot.scale(T::one() / k2);
    }
    pi
}

/// `e^(-A dt) (v_in - dt b)`: the exponential Euler update once the
/// convective term `b` is known.
pub fn linear_substep<T: Scalar>(
    v_in: &SpectralField<T>,
    b: &SpectralField<T>,
    dt: T,
) -> SpectralField<T> {
    let mut out = v_in.clone();
    out.add_assign_scaled(b, -dt);
    for (i, l) in out.basis.lambda.iter().enumerate() {
        let decay = (-T::from_f64_(*l) * dt).exp();
        for c in 0..3 {
            out.coeff[i][c] = out.coeff[i][c].scale(decay);
        }
    }
    out
}

/// Resolve the implicit step map
/// `v* = e^(-A dt)(v0 - dt P_N B(P_N(v*) + P_N(z1), v* + z1))`
/// by fixed-point iteration from `v0`; returns the converged field and
/// the last unprojected advection (for pressure recovery).
pub fn fixed_point_step<T: Scalar>(
    v0: &SpectralField<T>,
    z1: &SpectralField<T>,
    dt: T,
    cfg: &SolverConfig,
) -> Result<(SpectralField<T>, SpectralField<T>)> {
    if cfg.linear_only {
        let zero = SpectralField::zero(Arc::clone(&v0.basis));
        return Ok((linear_substep(v0, &zero, dt), zero));
    }
    let z_reg = z1.galerkin_project(cfg.rank)?;
    let mut v = v0.clone();
    let mut prev_diff: Option<T> = None;
    let mut contraction_est = 0.0f64;
    for _ in 0..cfg.max_iter {
        let adv = v.galerkin_project(cfg.rank)?.add(&z_reg);
        let raw = advect_raw(&adv, &v.add(z1))?;
        let mut b = raw.clone();
        b.leray_project();
        let b = b.galerkin_project(cfg.rank)?;
        let cand = linear_substep(v0, &b, dt).galerkin_project(cfg.rank)?;
        let diff = cand.sub(&v).norm_v();
        if !diff.to_f64_().is_finite() {
            return Err(Error::StepRejected { max_iter: cfg.max_iter, contraction_est: f64::INFINITY });
        }
        if let Some(p) = prev_diff {
            if p.to_f64_() > 0.0 {
                contraction_est = (diff / p).to_f64_();
            }
        }
        prev_diff = Some(diff);
        v = cand;
        let scale = T::one() + v.norm_v();
        if diff <= T::from_f64_(cfg.tol_fp) * scale {
            return Ok((v, raw));
        }
    }
    Err(Error::StepRejected { max_iter: cfg.max_iter, contraction_est })
}

fn halving_level(depth: u32, offset: u32) -> u32 {
    // disjoint from the ladder-refinement levels, which stay small
    0x4000_0000 | (depth << 16) | offset
}

/// Advance one (possibly halved) step. Returns the endpoint pair and the
/// unprojected advection at the endpoint.
#[allow(clippy::too_many_arguments)]
fn advance<T: Scalar>(
    v0: &SpectralField<T>,
    z0: &SpectralField<T>,
    inc: &SpectralField<T>,
    dt: T,
    forcing: &ForcingSpec<T>,
    cov: &CovarianceSpec<T>,
    seed: u64,
    step: u64,
    cfg: &SolverConfig,
    depth: u32,
    offset: u32,
) -> Result<(SpectralField<T>, SpectralField<T>, SpectralField<T>)> {
    let z1 = ou_increment_step(z0, forcing, inc, dt);
    match fixed_point_step(v0, &z1, dt, cfg) {
        Ok((v1, raw)) => Ok((v1, z1, raw)),
        Err(Error::StepRejected { .. }) if depth < cfg.max_halvings => {
            let (a, b) = split_increment(
                cov,
                inc,
                dt.to_f64_(),
                seed,
                step,
                halving_level(depth, offset),
            );
            let half = dt / T::from_f64_(2.0);
            let (va, za, _) = advance(
                v0, z0, &a, half, forcing, cov, seed, step, cfg, depth + 1, offset * 2,
            )?;
            advance(
                &va, &za, &b, half, forcing, cov, seed, step, cfg, depth + 1, offset * 2 + 1,
            )
        }
        Err(Error::StepRejected { .. }) => {
            Err(Error::RetryExhausted { halvings: cfg.max_halvings as usize })
        }
        Err(e) => Err(e),
    }
}

/// Integrate the regularised system along `path`, starting from the
/// divergence-free initial datum `u0` (so `v(0) = P_N u0`, `z(0) = 0`).
pub fn integrate<T: Scalar>(
    u0: &SpectralField<T>,
    forcing: &ForcingSpec<T>,
    path: &BrownianPath<T>,
    cfg: &SolverConfig,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let basis = &path.cov.basis;
    check_same_basis(basis, &u0.basis)?;
    check_same_basis(basis, &forcing.f.basis)?;
    u0.check_reality()?;
    if u0.max_divergence().to_f64_() > 1e-10 * (1.0 + u0.norm_h().to_f64_()) {
        return Err(Error::MalformedInput("initial datum is not divergence-free".into()));
    }
    let rank = cfg.rank.min(basis.len());
    let cfg = SolverConfig { rank, ..*cfg };

    let mut v = vec![u0.galerkin_project(rank)?];
    let mut z = vec![SpectralField::zero(Arc::clone(basis))];
    let first_raw = if cfg.linear_only {
        SpectralField::zero(Arc::clone(basis))
    } else {
        let adv0 = v[0].clone();
        advect_raw(&adv0, &v[0])?
    };
    let mut pi = vec![recover_pressure(&first_raw)];

    for (n, inc) in path.increments.iter().enumerate() {
        let dt = path.grid[n + 1] - path.grid[n];
        let (v1, z1, raw) = advance(
            &v[n], &z[n], inc, dt, forcing, &path.cov, path.seed, n as u64, &cfg, 0, 0,
        )?;
        pi.push(recover_pressure(&raw));
        v.push(v1);
        z.push(z1);
    }

    let q: Vec<_> = path.grid.iter().map(|_| forcing.q_f.clone()).collect();
    let stokes = StokesTrajectory { grid: path.grid.clone(), z, q, path: path.clone() };
    Ok(Trajectory { grid: path.grid.clone(), v, pi, stokes, solver_rank: rank })
}

/// One row of the discrete energy ledger: midpoint-rule bookkeeping of
/// `d|v|^2/dt + 2||v||_V^2 = -2<B, v>` over the step ending at `t`.
#[derive(Debug, Clone, Copy)]
pub struct LedgerRow {
    pub t: f64,
    /// `|v|_H^2` at the step endpoint.
    pub v_h2: f64,
    /// `||v_mid||_V^2`.
    pub grad_v2: f64,
    /// `-2 <B(adv_mid, v_mid + z_mid), v_mid>`.
    pub rhs: f64,
    pub residual: f64,
}

pub fn energy_ledger<T: Scalar>(traj: &Trajectory<T>, linear_only: bool) -> Result<Vec<LedgerRow>> {
    let rank = traj.solver_rank;
    let mut rows = Vec::with_capacity(traj.grid.len().saturating_sub(1));
    for n in 0..traj.grid.len() - 1 {
        let dt = (traj.grid[n + 1] - traj.grid[n]).to_f64_();
        let half = T::from_f64_(0.5);
        let v_mid = traj.v[n].add(&traj.v[n + 1]).scaled(half);
        let rhs = if linear_only {
            0.0
        } else {
            let z_mid = traj.stokes.z[n].add(&traj.stokes.z[n + 1]).scaled(half);
            let adv = v_mid.galerkin_project(rank)?.add(&z_mid.galerkin_project(rank)?);
            let b = bilinear_b(&adv, &v_mid.add(&z_mid))?.galerkin_project(rank)?;
            -2.0 * b.inner_h(&v_mid).to_f64_()
        };
        let e0 = traj.v[n].norm_h().to_f64_().powi(2);
        let e1 = traj.v[n + 1].norm_h().to_f64_().powi(2);
        let grad_v2 = v_mid.norm_v().to_f64_().powi(2);
        rows.push(LedgerRow {
            t: traj.grid[n + 1].to_f64_(),
            v_h2: e1,
            grad_v2,
            rhs,
            residual: (e1 - e0) / dt + 2.0 * grad_v2 - rhs,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{Basis, BasisSpec};
    use crate::field::random_divergence_free;
    use crate::noise::sample_path;

    fn basis() -> Arc<Basis> {
        BasisSpec::new(2, 8, 1.0).unwrap().build().unwrap()
    }

    fn uniform_grid(n: usize, t_end: f64) -> Vec<f64> {
        (0..=n).map(|i| t_end * i as f64 / n as f64).collect()
    }

    fn kolmogorov(b: &Arc<Basis>, amp: f64) -> SpectralField<f64> {
        // u_z = 2 amp cos(x1): a single shear mode
        let mut f = SpectralField::zero(Arc::clone(b));
        let i = b.mode_index([1, 0, 0]).unwrap();
        let j = b.conj_index[i];
        f.coeff[i][2] = Complex::new(amp, 0.0);
        f.coeff[j][2] = Complex::new(amp, 0.0);
        f
    }

    fn quiet_cfg() -> SolverConfig {
        SolverConfig { rank: usize::MAX, ..Default::default() }
    }

    #[test]
    fn shear_mode_self_advection_vanishes() {
        let b = basis();
        let u = kolmogorov(&b, 1.0);
        let bb = bilinear_b(&u, &u).unwrap();
        assert!(bb.norm_h() < 1e-13);
    }

    #[test]
    fn bilinear_skew_symmetry() {
        // <B(w, u), u> = 0 in the alias-free regime, 100 random pairs
        let b = basis();
        for seed in 0..100u64 {
            let w = random_divergence_free::<f64>(&b, seed, 1.0);
            let u = random_divergence_free::<f64>(&b, seed + 1000, 1.0);
            let bb = bilinear_b(&w, &u).unwrap();
            let scale = 1.0 + w.norm_h() * u.norm_v() * u.norm_h();
            assert!(
                bb.inner_h(&u).abs() < 1e-11 * scale,
                "seed {seed}: <B(w,u),u> = {}",
                bb.inner_h(&u)
            );
        }
    }

    #[test]
    fn bilinearity_in_both_slots() {
        let b = basis();
        let w1 = random_divergence_free::<f64>(&b, 1, 1.0);
        let w2 = random_divergence_free::<f64>(&b, 2, 1.0);
        let u = random_divergence_free::<f64>(&b, 3, 1.0);
        let lhs = bilinear_b(&w1.scaled(2.0).add(&w2.scaled(-0.5)), &u).unwrap();
        let rhs = bilinear_b(&w1, &u)
            .unwrap()
            .scaled(2.0)
            .add(&bilinear_b(&w2, &u).unwrap().scaled(-0.5));
        assert!(lhs.sub(&rhs).norm_h() < 1e-12 * (1.0 + rhs.norm_h()));
    }

    #[test]
    fn pressure_gradient_completes_the_projection() {
        // P(raw) = raw + grad(pi) coefficient-wise: adding the pressure
        // gradient restores divergence-freeness
        let b = basis();
        let w = random_divergence_free::<f64>(&b, 5, 1.0);
        let u = random_divergence_free::<f64>(&b, 6, 1.0);
        let raw = advect_raw(&w, &u).unwrap();
        let mut proj = raw.clone();
        proj.leray_project();
        let pi = recover_pressure(&raw);
        for (i, k) in b.modes.iter().enumerate() {
            for c in 0..3 {
                let grad = Complex::new(0.0, k[c] as f64) * pi.coeff[i];
                let diff = proj.coeff[i][c] - raw.coeff[i][c] - grad;
                assert!(diff.norm() < 1e-12, "mode {k:?} component {c}");
            }
        }
    }

    #[test]
    fn heat_decay_is_exact() {
        // the shear mode never feels B, so v(t) = e^(-t) v0
        let b = basis();
        let u0 = kolmogorov(&b, 0.5);
        let forcing = ForcingSpec::zero(Arc::clone(&b));
        let cov = CovarianceSpec::new(0.0, 4.0, 0.25, Arc::clone(&b));
        let grid = uniform_grid(100, 1.0);
        let path = sample_path(&cov, &grid, 0).unwrap();
        let traj = integrate(&u0, &forcing, &path, &quiet_cfg()).unwrap();
        let i = b.mode_index([1, 0, 0]).unwrap();
        for (step, t) in grid.iter().enumerate() {
            let expect = 0.5 * (-t).exp();
            let got = traj.v[step].coeff[i][2].re;
            assert!((got - expect).abs() < 1e-6, "t = {t}: {got} vs {expect}");
        }
    }

    #[test]
    fn divergence_and_reality_are_preserved() {
        let b = basis();
        let u0 = random_divergence_free::<f64>(&b, 12, 1.0);
        let forcing = ForcingSpec::zero(Arc::clone(&b));
        let cov = CovarianceSpec::new(0.05, 4.0, 0.25, Arc::clone(&b));
        let grid = uniform_grid(50, 0.5);
        let path = sample_path(&cov, &grid, 4).unwrap();
        let traj = integrate(&u0, &forcing, &path, &quiet_cfg()).unwrap();
        for v in &traj.v {
            v.check_reality().unwrap();
            assert!(v.max_divergence() < 1e-11 * (1.0 + v.norm_h()));
        }
    }

    #[test]
    fn galerkin_rank_is_respected() {
        let b = basis();
        let u0 = random_divergence_free::<f64>(&b, 12, 1.0);
        let forcing = ForcingSpec::zero(Arc::clone(&b));
        let cov = CovarianceSpec::new(0.05, 4.0, 0.25, Arc::clone(&b));
        let grid = uniform_grid(20, 0.2);
        let path = sample_path(&cov, &grid, 4).unwrap();
        let rank = 7;
        let cfg = SolverConfig { rank, ..Default::default() };
        let traj = integrate(&u0, &forcing, &path, &cfg).unwrap();
        assert_eq!(traj.solver_rank, rank);
        for v in &traj.v {
            let p = v.galerkin_project(rank).unwrap();
            assert!(v.sub(&p).norm_h() == 0.0, "v must stay in the span");
        }
    }

    #[test]
    fn self_convergence_under_step_refinement() {
        // no noise: endpoint error vs a 4x finer reference must drop at
        // least linearly in dt
        let b = basis();
        let u0 = random_divergence_free::<f64>(&b, 8, 1.0);
        let forcing = ForcingSpec::zero(Arc::clone(&b));
        let cov = CovarianceSpec::new(0.0, 4.0, 0.25, Arc::clone(&b));
        let t_end = 0.25;
        let run = |steps: usize| {
            let grid = uniform_grid(steps, t_end);
            let path = sample_path(&cov, &grid, 0).unwrap();
            integrate(&u0, &forcing, &path, &quiet_cfg()).unwrap()
        };
        let reference = run(320);
        let vr = reference.v.last().unwrap();
        let e1 = run(40).v.last().unwrap().sub(vr).norm_h();
        let e2 = run(80).v.last().unwrap().sub(vr).norm_h();
        let order = (e1 / e2).log2();
        assert!(order > 0.8, "order {order} (errors {e1}, {e2})");
    }

    #[test]
    fn linear_only_matches_stokes_recursion() {
        let b = basis();
        let u0 = random_divergence_free::<f64>(&b, 9, 1.0);
        let mut raw_f = random_divergence_free::<f64>(&b, 10, 1.5);
        raw_f = raw_f.scaled(0.3);
        let forcing = ForcingSpec::ingest(raw_f);
        let cov = CovarianceSpec::new(0.05, 4.0, 0.25, Arc::clone(&b));
        let grid = uniform_grid(30, 0.3);
        let path = sample_path(&cov, &grid, 2).unwrap();
        let cfg = SolverConfig { linear_only: true, ..quiet_cfg() };
        let traj = integrate(&u0, &forcing, &path, &cfg).unwrap();
        // u = v + z must satisfy u' = e^(-A dt)(u + dW) + relax f
        let mut expect = u0.clone();
        for n in 0..grid.len() - 1 {
            let dt = grid[n + 1] - grid[n];
            expect = ou_increment_step(&expect, &forcing, &path.increments[n], dt);
            let got = traj.u(n + 1);
            assert!(
                got.sub(&expect).norm_h() < 1e-11 * (1.0 + expect.norm_h()),
                "node {}",
                n + 1
            );
        }
        // and every pi vanishes: no convective term
        for pi in &traj.pi {
            assert_eq!(pi.norm_h(), 0.0);
        }
    }

    #[test]
    fn rejection_halving_and_exhaustion() {
        let b = basis();
        let u0 = random_divergence_free::<f64>(&b, 14, 0.5).scaled(30.0);
        let forcing = ForcingSpec::zero(Arc::clone(&b));
        let cov = CovarianceSpec::new(0.01, 4.0, 0.25, Arc::clone(&b));
        let grid = uniform_grid(2, 0.2); // dt = 0.1, far too coarse at this amplitude
        let path = sample_path(&cov, &grid, 5).unwrap();
        let strict = SolverConfig { max_iter: 4, max_halvings: 0, ..Default::default() };
        match integrate(&u0, &forcing, &path, &strict) {
            Err(Error::RetryExhausted { halvings: 0 }) => {}
            other => panic!("expected exhaustion, got {other:?}"),
        }
        let lenient = SolverConfig { max_iter: 40, max_halvings: 8, ..Default::default() };
        let traj = integrate(&u0, &forcing, &path, &lenient).unwrap();
        assert_eq!(traj.grid.len(), grid.len(), "output grid is the requested one");
        assert!(traj.v.last().unwrap().norm_h().is_finite());
    }

    #[test]
    fn ledger_residual_shrinks_with_dt() {
        let b = basis();
        let u0 = random_divergence_free::<f64>(&b, 8, 1.0);
        let forcing = ForcingSpec::zero(Arc::clone(&b));
        let cov = CovarianceSpec::new(0.0, 4.0, 0.25, Arc::clone(&b));
        let worst = |steps: usize| {
            let grid = uniform_grid(steps, 0.25);
            let path = sample_path(&cov, &grid, 0).unwrap();
            let traj = integrate(&u0, &forcing, &path, &quiet_cfg()).unwrap();
            energy_ledger(&traj, false)
                .unwrap()
                .iter()
                .map(|r| r.residual.abs())
                .fold(0.0f64, f64::max)
        };
        let r1 = worst(25);
        let r2 = worst(100);
        assert!(r2 < r1 / 2.0, "residuals {r1} -> {r2}");
    }

    #[test]
    fn ledger_balances_pure_heat_flow() {
        // rhs = 0 and the midpoint residual is quadrature-small
        let b = basis();
        let u0 = kolmogorov(&b, 1.0);
        let forcing = ForcingSpec::zero(Arc::clone(&b));
        let cov = CovarianceSpec::new(0.0, 4.0, 0.25, Arc::clone(&b));
        let grid = uniform_grid(100, 1.0);
        let path = sample_path(&cov, &grid, 0).unwrap();
        let traj = integrate(&u0, &forcing, &path, &quiet_cfg()).unwrap();
        for row in energy_ledger(&traj, false).unwrap() {
            assert_eq!(row.rhs, 0.0);
            assert!(row.residual.abs() < 2e-4 * (1.0 + row.v_h2), "t = {}", row.t);
        }
    }

    #[test]
    fn rejects_bad_initial_data() {
        let b = basis();
        let mut u0 = SpectralField::<f64>::zero(Arc::clone(&b));
        let i = b.mode_index([1, 2, 0]).unwrap();
        let j = b.conj_index[i];
        u0.coeff[i] = [Complex::new(1.0, 0.0), Complex::new(2.0, 0.0), Complex::new(0.0, 0.0)];
        u0.coeff[j] = [Complex::new(1.0, 0.0), Complex::new(2.0, 0.0), Complex::new(0.0, 0.0)];
        let forcing = ForcingSpec::zero(Arc::clone(&b));
        let cov = CovarianceSpec::new(0.0, 4.0, 0.25, Arc::clone(&b));
        let grid = uniform_grid(4, 0.1);
        let path = sample_path(&cov, &grid, 0).unwrap();
        assert!(matches!(
            integrate(&u0, &forcing, &path, &quiet_cfg()),
            Err(Error::MalformedInput(_))
        ));
        let bad = SolverConfig { rank: 0, ..Default::default() };
        let ok0 = random_divergence_free::<f64>(&b, 1, 1.0);
        assert!(integrate(&ok0, &forcing, &path, &bad).is_err());
    }

    #[test]
    fn energy_decays_without_input() {
        let b = basis();
        let u0 = random_divergence_free::<f64>(&b, 16, 1.0);
        let forcing = ForcingSpec::zero(Arc::clone(&b));
        let cov = CovarianceSpec::new(0.0, 4.0, 0.25, Arc::clone(&b));
        let grid = uniform_grid(100, 1.0);
        let path = sample_path(&cov, &grid, 0).unwrap();
        let traj = integrate(&u0, &forcing, &path, &quiet_cfg()).unwrap();
        let mut prev = f64::INFINITY;
        for v in &traj.v {
            let e = v.norm_h();
            assert!(e <= prev * (1.0 + 1e-9), "energy must be monotone here");
            prev = e;
        }
        // Poincare: at least e^(-t) decay of the H norm
        let e_end = traj.v.last().unwrap().norm_h();
        assert!(e_end <= u0.norm_h() * (-1.0f64).exp() * (1.0 + 1e-6));
    }
}
