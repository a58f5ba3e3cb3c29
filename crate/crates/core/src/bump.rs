//! Smooth compactly supported space-time test functions.
//!
//! `phi(t, x) = eta((t - t_c)/rho_t) * eta(|x - x_c|/rho_x)` with the
//! standard mollifier profile `eta(s) = exp(1 - 1/(1 - s^2))` for
//! `|s| < 1` and `0` outside. All derivatives are analytic, built from
//! `h(s) = eta'(s)/s`, which is smooth through `s = 0`.

use num_complex::Complex;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::field::{dense_index, fft3};

/// `eta(s)`, normalised to `eta(0) = 1`.
pub fn eta(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// `eta'(s) = -2 s (1 - s^2)^-2 eta(s)`.
pub fn eta_prime(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let w = 1.0 - s * s;
        -2.0 * s / (w * w) * eta(s)
    }
}

/// `h(s) = eta'(s)/s`, extended smoothly through the origin.
fn eta_h(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let w = 1.0 - s * s;
        -2.0 / (w * w) * eta(s)
    }
}

/// `h'(s) = -4 s (1 - s^2)^-4 (1 - 2 s^2) ... eta(s)`; see the algebra in
/// the finite-difference test.
fn eta_h_prime(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let w = 1.0 - s * s;
        -4.0 * s / (w * w * w * w) * (2.0 * w - 1.0) * eta(s)
    }
}

/// A product bump `phi(t, x)` centred at `(t_c, x_c)` with temporal
/// radius `rho_t` and spatial radius `rho_x`.
#[derive(Debug, Clone, Copy)]
pub struct TestBump {
    pub t_center: f64,
    pub x_center: [f64; 3],
    pub rho_t: f64,
    pub rho_x: f64,
}

impl TestBump {
    pub fn new(t_center: f64, x_center: [f64; 3], rho_t: f64, rho_x: f64) -> Result<Self> {
        if !(rho_t > 0.0) || !(rho_x > 0.0) {
            return Err(Error::InvalidArgument("bump radii must be positive".into()));
        }
        if rho_x >= std::f64::consts::PI {
            return Err(Error::BumpClipped(format!(
                "spatial radius {rho_x} does not fit in the periodic box"
            )));
        }
        Ok(Self { t_center, x_center, rho_t, rho_x })
    }

    /// The support must sit strictly inside `(0, t_end)` so the bump
    /// vanishes at both endpoints of the run.
    pub fn validate_horizon(&self, t_end: f64) -> Result<()> {
        if self.t_center - self.rho_t <= 0.0 || self.t_center + self.rho_t >= t_end {
            return Err(Error::BumpClipped(format!(
                "temporal support [{}, {}] not inside (0, {t_end})",
                self.t_center - self.rho_t,
                self.t_center + self.rho_t
            )));
        }
        Ok(())
    }

    /// Displacement from the centre, wrapped to `[-pi, pi)` per axis.
    fn displacement(&self, x: [f64; 3]) -> [f64; 3] {
        let tau = std::f64::consts::TAU;
        let mut d = [0.0; 3];
        for c in 0..3 {
            let mut v = (x[c] - self.x_center[c]) % tau;
            if v >= tau / 2.0 {
                v -= tau;
            }
            if v < -tau / 2.0 {
                v += tau;
            }
            d[c] = v;
        }
        d
    }

    fn spatial_arg(&self, x: [f64; 3]) -> (f64, [f64; 3]) {
        let d = self.displacement(x);
        let rho = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        (rho / self.rho_x, d)
    }

    /// The bump is separable: `phi(t, x) = temporal(t) * spatial_value(x)`,
    /// so quadratures sample the spatial factors once and reuse them at
    /// every time node.
    pub fn temporal(&self, t: f64) -> f64 {
        eta((t - self.t_center) / self.rho_t)
    }

    /// `d/dt` of the temporal factor.
    pub fn temporal_dt(&self, t: f64) -> f64 {
        eta_prime((t - self.t_center) / self.rho_t) / self.rho_t
    }

    pub fn spatial_value(&self, x: [f64; 3]) -> f64 {
        let (s, _) = self.spatial_arg(x);
        eta(s)
    }

    /// `grad_x eta(|d|/rho_x) = h(s) d / rho_x^2`.
    pub fn spatial_grad(&self, x: [f64; 3]) -> [f64; 3] {
        let (s, d) = self.spatial_arg(x);
        let f = eta_h(s) / (self.rho_x * self.rho_x);
        [f * d[0], f * d[1], f * d[2]]
    }

    /// `Delta eta(|d|/rho_x) = (3 h(s) + s h'(s)) / rho_x^2`.
    pub fn spatial_laplacian(&self, x: [f64; 3]) -> f64 {
        let (s, _) = self.spatial_arg(x);
        (3.0 * eta_h(s) + s * eta_h_prime(s)) / (self.rho_x * self.rho_x)
    }

    pub fn value(&self, t: f64, x: [f64; 3]) -> f64 {
        self.temporal(t) * self.spatial_value(x)
    }

    pub fn dt(&self, t: f64, x: [f64; 3]) -> f64 {
        self.temporal_dt(t) * self.spatial_value(x)
    }

    pub fn grad(&self, t: f64, x: [f64; 3]) -> [f64; 3] {
        let g = self.spatial_grad(x);
        let a = self.temporal(t);
        [a * g[0], a * g[1], a * g[2]]
    }

    pub fn laplacian(&self, t: f64, x: [f64; 3]) -> f64 {
        self.temporal(t) * self.spatial_laplacian(x)
    }

    /// Spatial factors tabulated on the `m^3` collocation lattice:
    /// `(g, grad g, Delta g)` per point.
    pub fn tabulate_spatial(&self, m: usize) -> Vec<(f64, [f64; 3], f64)> {
        let tau = std::f64::consts::TAU;
        let mut out = Vec::with_capacity(m * m * m);
        for ix in 0..m {
            for iy in 0..m {
                for iz in 0..m {
                    let x = [
                        tau * ix as f64 / m as f64,
                        tau * iy as f64 / m as f64,
                        tau * iz as f64 / m as f64,
                    ];
                    out.push((self.spatial_value(x), self.spatial_grad(x), self.spatial_laplacian(x)));
                }
            }
        }
        out
    }

    /// Spatial factors `(g, grad g, Delta g)` of the *band-limited
    /// interpolant* of the bump on the `m^3` collocation lattice: the
    /// spectrum of `g` is computed on an `m_big^3` lattice and truncated
    /// to `|k_j| <= m/2 - 1`. Pairing band-limited field products against
    /// these weights by plain collocation is then exact up to the
    /// (superalgebraically small) aliasing of `g` at `m_big`, instead of
    /// carrying a resolution-limited error floor from the bump's
    /// Fourier tail.
    pub fn tabulate_spatial_band_limited(
        &self,
        m: usize,
        m_big: usize,
    ) -> Vec<(f64, [f64; 3], f64)> {
        assert!(m_big >= 2 * m, "need m_big >= 2 m for a clean truncation");
        let tau = std::f64::consts::TAU;
        let mut data: Vec<Complex<f64>> = Vec::with_capacity(m_big * m_big * m_big);
        for ix in 0..m_big {
            for iy in 0..m_big {
                for iz in 0..m_big {
                    let x = [
                        tau * ix as f64 / m_big as f64,
                        tau * iy as f64 / m_big as f64,
                        tau * iz as f64 / m_big as f64,
                    ];
                    data.push(Complex::new(self.spatial_value(x), 0.0));
                }
            }
        }
        fft3(&mut data, m_big, FftDirection::Forward);
        let scale = 1.0 / (m_big * m_big * m_big) as f64;

        let kc = m as i32 / 2 - 1;
        let m3 = m * m * m;
        let zero = Complex::new(0.0f64, 0.0);
        let mut g = vec![zero; m3];
        let mut grad = [vec![zero; m3], vec![zero; m3], vec![zero; m3]];
        let mut lap = vec![zero; m3];
        for k1 in -kc..=kc {
            for k2 in -kc..=kc {
                for k3 in -kc..=kc {
                    let k = [k1, k2, k3];
                    let c = data[dense_index(&k, m_big)] * scale;
                    let dst = dense_index(&k, m);
                    g[dst] = c;
                    for (axis, kj) in k.iter().enumerate() {
                        grad[axis][dst] = c * Complex::new(0.0, *kj as f64);
                    }
                    lap[dst] = c * (-((k1 * k1 + k2 * k2 + k3 * k3) as f64));
                }
            }
        }
        fft3(&mut g, m, FftDirection::Inverse);
        for axis in 0..3 {
            fft3(&mut grad[axis], m, FftDirection::Inverse);
        }
        fft3(&mut lap, m, FftDirection::Inverse);
        (0..m3)
            .map(|j| {
                (g[j].re, [grad[0][j].re, grad[1][j].re, grad[2][j].re], lap[j].re)
            })
            .collect()
    }

    /// Sample a pointwise functional of the bump on the `m^3` collocation
    /// lattice at a fixed time.
    pub fn sample<F: Fn(&Self, f64, [f64; 3]) -> f64>(
        &self,
        t: f64,
        m: usize,
        f: F,
    ) -> Vec<f64> {
        let tau = std::f64::consts::TAU;
        let mut out = Vec::with_capacity(m * m * m);
        for ix in 0..m {
            for iy in 0..m {
                for iz in 0..m {
                    let x = [
                        tau * ix as f64 / m as f64,
                        tau * iy as f64 / m as f64,
                        tau * iz as f64 / m as f64,
                    ];
                    out.push(f(self, t, x));
                }
            }
        }
        out
    }
}
