//! Divergence-free spectral vector fields, scalar spectral fields, and
//! their physical-space counterparts.
//!
//! Conventions, fixed once for the whole crate:
//!
//! * `u(x) = sum_k u_hat_k exp(i k.x)` on the box `[0, 2pi)^3`;
//! * spatial integrals carry the normalised measure `dx/(2pi)^3`, so
//!   `|u|_H^2 = sum_k |u_hat_k|^2` and the collocation quadrature of
//!   `|u|^2` reproduces the Parseval sum exactly for band-limited data;
//! * the Stokes eigenvalue of mode `k` is `lambda_k = |k|^2`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{FftDirection, FftPlanner};

use crate::basis::{check_same_basis, Basis};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative tolerance for the reality constraint `u_hat(-k) = conj(u_hat(k))`.
pub const REALITY_TOL: f64 = 1e-12;
/// Relative tolerance for the incompressibility constraint `k . u_hat(k) = 0`.
pub const DIV_TOL: f64 = 1e-13;

/// Named norms of the spec's `norm` operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    H,
    V,
    DAalpha(f64),
    Lq(f64),
}

/// A divergence-free vector field stored as complex Fourier coefficients.
#[derive(Debug, Clone)]
pub struct SpectralField<T: Scalar> {
    pub basis: Arc<Basis>,
    /// One complex 3-vector per mode, in canonical mode order.
    pub coeff: Vec<[Complex<T>; 3]>,
}

impl<T: Scalar> SpectralField<T> {
    pub fn zero(basis: Arc<Basis>) -> Self {
        let n = basis.len();
        Self { basis, coeff: vec![[Complex::new(T::zero(), T::zero()); 3]; n] }
    }

    /// Build a field from raw coefficients given as `(k, value)` pairs,
    /// checking reality and applying the Leray projection.
    pub fn leray_project_raw(
        basis: Arc<Basis>,
        raw: &[([i32; 3], [Complex<T>; 3])],
    ) -> Result<Self> {
        let mut field = Self::zero(basis);
        for (k, v) in raw {
            let i = field.basis.mode_index(*k).ok_or_else(|| {
                Error::MalformedInput(format!("mode {k:?} outside the cutoff"))
            })?;
            field.coeff[i] = *v;
        }
        field.check_reality()?;
        field.leray_project();
        Ok(field)
    }

    pub fn check_reality(&self) -> Result<()> {
        let scale = self.max_abs().max(T::one());
        for i in 0..self.basis.len() {
            let j = self.basis.conj_index[i];
            for c in 0..3 {
                let diff = self.coeff[i][c] - self.coeff[j][c].conj();
                if diff.norm().to_f64_() > REALITY_TOL * scale.to_f64_() {
                    return Err(Error::MalformedInput(format!(
                        "reality violation at mode {:?}",
                        self.basis.modes[i]
                    )));
                }
            }
        }
        Ok(())
    }

    fn max_abs(&self) -> T {
        self.coeff
            .iter()
            .flat_map(|v| v.iter())
            .map(|c| c.norm())
            .fold(T::zero(), T::max)
    }

    /// In-place Leray projection `u_hat -> (I - k k^T / |k|^2) u_hat`.
    pub fn leray_project(&mut self) {
        for (i, m) in self.basis.modes.iter().enumerate() {
            let k = [
                T::from_f64_(m[0] as f64),
                T::from_f64_(m[1] as f64),
                T::from_f64_(m[2] as f64),
            ];
            let k2 = T::from_f64_(self.basis.lambda[i]);
            let dot = self.coeff[i][0].scale(k[0])
                + self.coeff[i][1].scale(k[1])
                + self.coeff[i][2].scale(k[2]);
            let factor = dot.scale(T::one() / k2);
            for c in 0..3 {
                self.coeff[i][c] = self.coeff[i][c] - factor.scale(k[c]);
            }
        }
    }

    /// Coefficient-wise multiplication by `lambda_k^alpha = |k|^(2 alpha)`.
    pub fn apply_a_alpha(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        for i in 0..out.basis.len() {
            let f = T::from_f64_(out.basis.lambda[i].powf(alpha));
            for c in 0..3 {
                out.coeff[i][c] = out.coeff[i][c].scale(f);
            }
        }
        out
    }

    /// Truncation to the first `n` canonical modes (closed under
    /// conjugation so the projected field stays real).
    pub fn galerkin_project(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("galerkin rank must be >= 1".into()));
        }
        let mut out = self.clone();
        if n >= self.basis.len() {
            return Ok(out);
        }
        let keep = self.basis.galerkin_mask(n);
        for (i, k) in keep.iter().enumerate() {
            if !k {
                out.coeff[i] = [Complex::new(T::zero(), T::zero()); 3];
            }
        }
        Ok(out)
    }

    /// Zero all modes with any `|k_j|` above the dealias cutoff.
    pub fn dealias(&mut self) {
        for i in 0..self.basis.len() {
            if !self.basis.in_band[i] {
                self.coeff[i] = [Complex::new(T::zero(), T::zero()); 3];
            }
        }
    }

    pub fn inner_h(&self, other: &Self) -> T {
        let mut acc = T::zero();
        for i in 0..self.basis.len() {
            for c in 0..3 {
                acc += (self.coeff[i][c] * other.coeff[i][c].conj()).re;
            }
        }
        acc
    }

    pub fn norm_h(&self) -> T {
        self.inner_h(self).max(T::zero()).sqrt()
    }

    pub fn norm_v(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.basis.len() {
            let l = T::from_f64_(self.basis.lambda[i]);
            for c in 0..3 {
                acc += l * self.coeff[i][c].norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn norm_da(&self, alpha: f64) -> T {
        let mut acc = T::zero();
        for i in 0..self.basis.len() {
            let l = T::from_f64_(self.basis.lambda[i].powf(2.0 * alpha));
            for c in 0..3 {
                acc += l * self.coeff[i][c].norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `L^q` norm by collocation quadrature with the normalised measure.
    pub fn norm_lq(&self, q: f64) -> T {
        let grid = self.to_grid();
        let m3 = grid.values.len();
        let mut acc = 0.0f64;
        for v in &grid.values {
            let mag2 = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).to_f64_();
            acc += mag2.powf(q / 2.0);
        }
        T::from_f64_((acc / m3 as f64).powf(1.0 / q))
    }

    pub fn norm(&self, kind: NormKind) -> T {
        match kind {
            NormKind::H => self.norm_h(),
            NormKind::V => self.norm_v(),
            NormKind::DAalpha(a) => self.norm_da(a),
            NormKind::Lq(q) => self.norm_lq(q),
        }
    }

    /// Dual norm `|A^{-1/2} u| = ||u||_{V'}` (the mean mode is absent, so
    /// negative powers are harmless).
    pub fn norm_v_dual(&self) -> T {
        self.norm_da(-0.25)
    }

    /// Largest `|k . u_hat(k)|` over modes, as an incompressibility check.
    pub fn max_divergence(&self) -> T {
        let mut worst = T::zero();
        for (i, m) in self.basis.modes.iter().enumerate() {
            let mut dot = Complex::new(T::zero(), T::zero());
            for c in 0..3 {
                dot = dot + self.coeff[i][c].scale(T::from_f64_(m[c] as f64));
            }
            worst = worst.max(dot.norm());
        }
        worst
    }

    /// Spectral derivative `d/dx_axis`, i.e. multiplication by `i k_axis`.
    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = self.clone();
        for (i, m) in self.basis.modes.iter().enumerate() {
            let ik = Complex::new(T::zero(), T::from_f64_(m[axis] as f64));
            for c in 0..3 {
                out.coeff[i][c] = out.coeff[i][c] * ik;
            }
        }
        out
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        for v in &mut out.coeff {
            for c in v.iter_mut() {
                *c = c.scale(s);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign_scaled(other, T::one());
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign_scaled(other, -T::one());
        out
    }

    pub fn add_assign_scaled(&mut self, other: &Self, s: T) {
        debug_assert_eq!(self.basis.spec, other.basis.spec);
        for i in 0..self.coeff.len() {
            for c in 0..3 {
                self.coeff[i][c] = self.coeff[i][c] + other.coeff[i][c].scale(s);
            }
        }
    }

    /// Evaluate on the collocation lattice.
    pub fn to_grid(&self) -> GridField<T> {
        let values = self.sample_values(self.basis.spec.m_grid);
        GridField { basis: Arc::clone(&self.basis), values }
    }

    /// Evaluate on an arbitrary `m^3` lattice; `m` must resolve every
    /// mode without wrap-around collisions. Oversampling (`m` larger
    /// than the native grid) sharpens quadratures against non-band-limited
    /// weights.
    pub fn sample_values(&self, m: usize) -> Vec<[T; 3]> {
        assert!(m >= 2 * self.basis.spec.k_max as usize + 2, "lattice too coarse");
        let mut planes = [spectral_to_dense(&self.basis, &self.coeff, 0, m),
            spectral_to_dense(&self.basis, &self.coeff, 1, m),
            spectral_to_dense(&self.basis, &self.coeff, 2, m)];
        for p in &mut planes {
            fft3(p, m, FftDirection::Inverse);
        }
        let mut values = vec![[T::zero(); 3]; m * m * m];
        for j in 0..values.len() {
            for c in 0..3 {
                values[j][c] = planes[c][j].re;
            }
        }
        values
    }
}

/// Real 3-vector samples on the collocation lattice `x_j = 2 pi j / M`.
#[derive(Debug, Clone)]
pub struct GridField<T: Scalar> {
    pub basis: Arc<Basis>,
    /// Layout: `values[(ix * M + iy) * M + iz]`.
    pub values: Vec<[T; 3]>,
}

impl<T: Scalar> GridField<T> {
    pub fn zero(basis: Arc<Basis>) -> Self {
        let m = basis.spec.m_grid;
        Self { basis, values: vec![[T::zero(); 3]; m * m * m] }
    }

    /// Transform back to spectral space, applying the dealias mask.
    /// The Leray projection is *not* applied; the caller decides.
    pub fn to_spectral(&self) -> Result<SpectralField<T>> {
        let m = self.basis.spec.m_grid;
        if self.values.len() != m * m * m {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                m * m * m,
                self.values.len()
            )));
        }
        let mut out = SpectralField::zero(Arc::clone(&self.basis));
        for c in 0..3 {
            let mut dense: Vec<Complex<T>> = self
                .values
                .iter()
                .map(|v| Complex::new(v[c], T::zero()))
                .collect();
            fft3(&mut dense, m, FftDirection::Forward);
            let scale = T::one() / T::from_usize_(m * m * m);
            for (i, k) in self.basis.modes.iter().enumerate() {
                if !self.basis.in_band[i] {
                    continue;
                }
                let j = dense_index(k, m);
                out.coeff[i][c] = dense[j].scale(scale);
            }
        }
        Ok(out)
    }

    /// Pointwise product helpers used by the convective term.
    pub fn component(&self, c: usize) -> impl Iterator<Item = T> + '_ {
        self.values.iter().map(move |v| v[c])
    }
}

/// A zero-mean scalar field in spectral form (pressure and test scalars).
#[derive(Debug, Clone)]
pub struct ScalarSpectralField<T: Scalar> {
    pub basis: Arc<Basis>,
    pub coeff: Vec<Complex<T>>,
}

impl<T: Scalar> ScalarSpectralField<T> {
    pub fn zero(basis: Arc<Basis>) -> Self {
        let n = basis.len();
        Self { basis, coeff: vec![Complex::new(T::zero(), T::zero()); n] }
    }

    /// The `k = 0` coefficient is structurally absent, so the spatial
    /// mean is zero by construction.
    pub fn norm_h(&self) -> T {
        self.coeff
            .iter()
            .map(|c| c.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn to_grid(&self) -> Vec<T> {
        self.sample_values(self.basis.spec.m_grid)
    }

    /// Evaluate on an arbitrary `m^3` lattice (cf.
    /// `SpectralField::sample_values`).
    pub fn sample_values(&self, m: usize) -> Vec<T> {
        assert!(m >= 2 * self.basis.spec.k_max as usize + 2, "lattice too coarse");
        let mut dense = vec![Complex::new(T::zero(), T::zero()); m * m * m];
        for (i, k) in self.basis.modes.iter().enumerate() {
            dense[dense_index(k, m)] = dense[dense_index(k, m)] + self.coeff[i];
        }
        fft3(&mut dense, m, FftDirection::Inverse);
        dense.into_iter().map(|c| c.re).collect()
    }
}

pub(crate) fn dense_index(k: &[i32; 3], m: usize) -> usize {
    let wrap = |kj: i32| -> usize { kj.rem_euclid(m as i32) as usize };
    (wrap(k[0]) * m + wrap(k[1])) * m + wrap(k[2])
}

fn spectral_to_dense<T: Scalar>(
    basis: &Basis,
    coeff: &[[Complex<T>; 3]],
    c: usize,
    m: usize,
) -> Vec<Complex<T>> {
    let mut dense = vec![Complex::new(T::zero(), T::zero()); m * m * m];
    for (i, k) in basis.modes.iter().enumerate() {
        let j = dense_index(k, m);
        dense[j] = dense[j] + coeff[i][c];
    }
    dense
}

/// Unnormalised 3D FFT over an `m^3` cube, one axis pass at a time.
pub(crate) fn fft3<T: Scalar>(data: &mut [Complex<T>], m: usize, dir: FftDirection) {
    debug_assert_eq!(data.len(), m * m * m);
    let mut planner = FftPlanner::<T>::new();
    let fft = planner.plan_fft(m, dir);
    let mut line = vec![Complex::new(T::zero(), T::zero()); m];

    // axis 2 (stride 1)
    for row in data.chunks_exact_mut(m) {
        fft.process(row);
    }
    // axis 1 (stride m)
    for ix in 0..m {
        for iz in 0..m {
            let base = ix * m * m + iz;
            for iy in 0..m {
                line[iy] = data[base + iy * m];
            }
            fft.process(&mut line);
            for iy in 0..m {
                data[base + iy * m] = line[iy];
            }
        }
    }
    // axis 0 (stride m^2)
    for iy in 0..m {
        for iz in 0..m {
            let base = iy * m + iz;
            for ix in 0..m {
                line[ix] = data[base + ix * m * m];
            }
            fft.process(&mut line);
            for ix in 0..m {
                data[base + ix * m * m] = line[ix];
            }
        }
    }
}

/// Random band-limited divergence-free field with per-mode amplitude
/// decaying like `|k|^-decay`; deterministic in the seed. Used by tests,
/// calibration sets and the self-test suites.
pub fn random_divergence_free<T: Scalar>(
    basis: &Arc<Basis>,
    seed: u64,
    decay: f64,
) -> SpectralField<T> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut field = SpectralField::zero(Arc::clone(basis));
    for i in 0..basis.len() {
        if !basis.is_representative(i) || !basis.in_band[i] {
            continue;
        }
        let amp = basis.lambda[i].sqrt().powf(-decay);
        let mut v = [Complex::new(T::zero(), T::zero()); 3];
        for c in 0..3 {
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = rng.gen_range(-1.0..1.0);
            v[c] = Complex::new(T::from_f64_(re * amp), T::from_f64_(im * amp));
        }
        field.coeff[i] = v;
        let j = basis.conj_index[i];
        field.coeff[j] = [v[0].conj(), v[1].conj(), v[2].conj()];
    }
    field.leray_project();
    field
}

pub fn check_compatible<T: Scalar>(a: &SpectralField<T>, b: &SpectralField<T>) -> Result<()> {
    check_same_basis(&a.basis, &b.basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSpec;
    use approx::assert_relative_eq;

    fn basis(k: u32, m: usize) -> Arc<Basis> {
        BasisSpec::new(k, m, 1.0).unwrap().build().unwrap()
    }

    fn single_mode(basis: &Arc<Basis>, k: [i32; 3], v: [Complex<f64>; 3]) -> SpectralField<f64> {
        let mut f = SpectralField::zero(Arc::clone(basis));
        let i = basis.mode_index(k).unwrap();
        let j = basis.conj_index[i];
        f.coeff[i] = v;
        f.coeff[j] = [v[0].conj(), v[1].conj(), v[2].conj()];
        f
    }

    #[test]
    fn leray_annihilates_gradients() {
        let b = basis(2, 8);
        let k = [1, 2, 0];
        let kc = [
            Complex::new(1.0, 0.0),
            Complex::new(2.0, 0.0),
            Complex::new(0.0, 0.0),
        ];
        let mut f = single_mode(&b, k, kc);
        f.leray_project();
        assert!(f.norm_h() < 1e-14);
    }

    #[test]
    fn leray_is_idempotent_on_divergence_free() {
        let b = basis(3, 10);
        let f = random_divergence_free::<f64>(&b, 7, 1.0);
        let mut g = f.clone();
        g.leray_project();
        assert!(f.sub(&g).norm_h() < 1e-14 * (1.0 + f.norm_h()));
        assert!(f.max_divergence() < 1e-13 * (1.0 + f.norm_h()));
    }

    #[test]
    fn leray_orthogonal_decomposition() {
        // u_hat = k + t with t perpendicular to k projects to t.
        let b = basis(2, 8);
        let k = [1, 0, 1];
        let t = [
            Complex::new(0.0, 1.0),
            Complex::new(3.0, 0.0),
            Complex::new(0.0, -1.0),
        ]; // t . k = i - i = 0
        let v = [
            t[0] + Complex::new(1.0, 0.0),
            t[1],
            t[2] + Complex::new(1.0, 0.0),
        ];
        let mut f = single_mode(&b, k, v);
        f.leray_project();
        let expect = single_mode(&b, k, t);
        assert!(f.sub(&expect).norm_h() < 1e-14);
    }

    #[test]
    fn reality_violation_is_rejected() {
        let b = basis(1, 4);
        let raw = vec![(
            [1, 0, 0],
            [
                Complex::new(1.0, 1.0),
                Complex::new(0.0, 0.0),
                Complex::new(0.0, 0.0),
            ],
        )];
        // the conjugate mode was never supplied
        assert!(SpectralField::leray_project_raw(Arc::clone(&b), &raw).is_err());
    }

    #[test]
    fn a_alpha_identity_and_composition() {
        let b = basis(3, 10);
        let f = random_divergence_free::<f64>(&b, 3, 0.5);
        let id = f.apply_a_alpha(0.0);
        assert!(f.sub(&id).norm_h() < 1e-15);

        let two_step = f.apply_a_alpha(0.3).apply_a_alpha(0.7);
        let one_step = f.apply_a_alpha(1.0);
        assert!(two_step.sub(&one_step).norm_h() < 1e-12 * (1.0 + one_step.norm_h()));
    }

    #[test]
    fn a_half_maps_h_norm_to_v_norm() {
        let b = basis(3, 10);
        let f = random_divergence_free::<f64>(&b, 11, 1.0);
        assert_relative_eq!(f.apply_a_alpha(0.5).norm_h(), f.norm_v(), max_relative = 1e-12);
    }

    #[test]
    fn unit_mode_lambda_one() {
        let b = basis(2, 8);
        let f = single_mode(
            &b,
            [1, 0, 0],
            [
                Complex::new(0.0, 0.0),
                Complex::new(0.5, 0.0),
                Complex::new(0.0, 0.0),
            ],
        );
        assert!(f.apply_a_alpha(1.0).sub(&f).norm_h() < 1e-15);
    }

    #[test]
    fn v_norm_of_unit_h_mode() {
        // single mode k = (1,1,0), unit H norm -> V norm sqrt(2)
        let b = basis(2, 8);
        let amp = 0.5f64; // both k and -k stored: 2 * 2 * amp^2 = 1
        let f = single_mode(
            &b,
            [1, 1, 0],
            [
                Complex::new(amp, 0.0),
                Complex::new(-amp, 0.0),
                Complex::new(0.0, 0.0),
            ],
        );
        assert_relative_eq!(f.norm_h(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(f.norm_v(), 2.0f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn poincare_with_lambda_one() {
        let b = basis(3, 10);
        for seed in 0..20 {
            let f = random_divergence_free::<f64>(&b, seed, 1.0);
            assert!(f.norm_v() >= f.norm_h() * (1.0 - 1e-12));
        }
    }

    #[test]
    fn l2_quadrature_matches_parseval() {
        let b = basis(3, 10);
        let f = random_divergence_free::<f64>(&b, 5, 1.0);
        assert_relative_eq!(f.norm_lq(2.0), f.norm_h(), max_relative = 1e-10);
    }

    #[test]
    fn round_trip_is_identity_on_band_limited() {
        let b = basis(3, 10);
        let f = random_divergence_free::<f64>(&b, 9, 0.7);
        let back = f.to_grid().to_spectral().unwrap();
        assert!(f.sub(&back).norm_h() < 1e-12 * (1.0 + f.norm_h()));

        let z = SpectralField::<f64>::zero(Arc::clone(&b));
        assert!(z.to_grid().to_spectral().unwrap().norm_h() < 1e-15);
    }

    #[test]
    fn galerkin_projection_contracts_and_is_idempotent() {
        let b = basis(3, 10);
        let f = random_divergence_free::<f64>(&b, 21, 0.8);
        assert!(f.galerkin_project(0).is_err());
        for n in [1, 5, 17, 80, 10_000] {
            let p = f.galerkin_project(n).unwrap();
            assert!(p.norm_h() <= f.norm_h() * (1.0 + 1e-15));
            assert!(p.norm_v() <= f.norm_v() * (1.0 + 1e-15));
            let pp = p.galerkin_project(n).unwrap();
            assert!(p.sub(&pp).norm_h() == 0.0);
            p.check_reality().unwrap();
        }
        let full = f.galerkin_project(b.len()).unwrap();
        assert!(f.sub(&full).norm_h() == 0.0);
    }

    #[test]
    fn leray_is_self_adjoint_in_h() {
        let b = basis(2, 8);
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        let mut random_real = |seed_shift: u64| {
            let _ = seed_shift;
            let mut f = SpectralField::<f64>::zero(Arc::clone(&b));
            for i in 0..b.len() {
                if !b.is_representative(i) {
                    continue;
                }
                let v = [
                    Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                ];
                f.coeff[i] = v;
                let j = b.conj_index[i];
                f.coeff[j] = [v[0].conj(), v[1].conj(), v[2].conj()];
            }
            f
        };
        for trial in 0..10u64 {
            let u = random_real(trial);
            let v = random_real(trial + 100);
            let mut pu = u.clone();
            pu.leray_project();
            let mut pv = v.clone();
            pv.leray_project();
            let lhs = pu.inner_h(&v);
            let rhs = u.inner_h(&pv);
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn dealiased_product_matches_direct_convolution() {
        // Quadratic product of dealiased fields at K_max = 2 against a
        // direct convolution oracle.
        let spec = BasisSpec::new(2, 8, 2.0 / 3.0).unwrap();
        let b = spec.build().unwrap();
        let u = random_divergence_free::<f64>(&b, 17, 0.5);
        let w = random_divergence_free::<f64>(&b, 18, 0.5);

        // grid-space product of components 0 and 1
        let gu = u.to_grid();
        let gw = w.to_grid();
        let m = b.spec.m_grid;
        let mut prod = GridField::<f64>::zero(Arc::clone(&b));
        for j in 0..m * m * m {
            prod.values[j][0] = gu.values[j][0] * gw.values[j][1];
        }
        let spectral = prod.to_spectral().unwrap();

        // direct convolution: (uv)_k = sum_q u_q w_{k-q}
        let kd = b.spec.dealias_cutoff();
        for (i, k) in b.modes.iter().enumerate() {
            if k.iter().any(|kj| kj.abs() > kd) {
                continue;
            }
            let mut acc = Complex::new(0.0, 0.0);
            for (qi, q) in b.modes.iter().enumerate() {
                let r = [k[0] - q[0], k[1] - q[1], k[2] - q[2]];
                if let Some(ri) = b.mode_index(r) {
                    acc += u.coeff[qi][0] * w.coeff[ri][1];
                }
            }
            assert!(
                (spectral.coeff[i][0] - acc).norm() < 1e-12,
                "aliased energy at mode {k:?}"
            );
        }
    }
}
