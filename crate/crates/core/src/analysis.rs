//! Standalone numerical verifiers for the supporting analytic facts:
//! fractional time-Sobolev norms, the exotic Gronwall lemma, the local
//! Sobolev inequality on balls, and the Poincare inequality.

use serde::Serialize;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::scalar::Scalar;

/// A scalar path sampled on a strictly increasing time grid.
#[derive(Debug, Clone)]
pub struct SampledPath {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledPath {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(grid.len(), values.len());
        assert!(grid.windows(2).all(|w| w[1] > w[0]), "grid must be strictly increasing");
        Self { grid, values }
    }
}

fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = grid[i + 1] - grid[i];
        w[i] += h / 2.0;
        w[i + 1] += h / 2.0;
    }
    w
}

/// Discrete `W^{s,p}(0,T)` norm: composite trapezoid for both the `L^p`
/// integral and the double Gagliardo integral, diagonal excluded.
pub fn wsp_norm(path: &SampledPath, s: f64, p: f64) -> f64 {
    let dist: Vec<Vec<f64>> = path.values.iter().map(|v| vec![*v]).collect();
    wsp_norm_vector(&path.grid, &dist, s, p)
}

/// Same norm for vector-valued paths (values flattened to coordinates,
/// Euclidean pointwise norm).
pub fn wsp_norm_vector(grid: &[f64], values: &[Vec<f64>], s: f64, p: f64) -> f64 {
    assert!(p >= 1.0, "need p >= 1");
    assert!(s > 0.0 && s < 1.0, "need s in (0,1)");
    assert_eq!(grid.len(), values.len());
    let w = trapezoid_weights(grid);
    let n = grid.len();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut single = 0.0;
    for i in 0..n {
        single += w[i] * norm(&values[i]).powf(p);
    }
    let mut double = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dv: Vec<f64> =
                values[i].iter().zip(&values[j]).map(|(a, b)| a - b).collect();
            let dt = (grid[i] - grid[j]).abs();
            double += w[i] * w[j] * norm(&dv).powf(p) / dt.powf(1.0 + s * p);
        }
    }
    (single + double).powf(1.0 / p)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GronwallReport {
    pub hypothesis_holds: bool,
    pub conclusion_holds: bool,
}

/// Checks the hypothesis `v(t) <= v(s) - lambda int_s^t v + C (t - s)` on
/// all grid pairs `s < t`, and the conclusion
/// `v(t) <= sup_(0,1) v + C / lambda` at all grid times `t >= 1`.
pub fn gronwall_verify(path: &SampledPath, lambda: f64, c: f64) -> Result<GronwallReport> {
    if lambda <= 0.0 {
        return Err(Error::InvalidArgument("lambda must be positive".into()));
    }
    let t_end = *path.grid.last().unwrap();
    if t_end <= 1.0 {
        return Err(Error::InvalidArgument("path must extend past t = 1".into()));
    }
    let n = path.grid.len();
    // cumulative trapezoid integral of v
    let mut cum = vec![0.0; n];
    for i in 0..n - 1 {
        let h = path.grid[i + 1] - path.grid[i];
        cum[i + 1] = cum[i] + h * (path.values[i] + path.values[i + 1]) / 2.0;
    }
    let scale = path.values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let tol = 1e-9 * scale.max(1.0);

    // trapezoid slack: the hypothesis is an integral inequality, and for
    // paths that satisfy it with equality (the ODE family) the quadrature
    // error alone must not flip the verdict; bound it by the standard
    // (t-s) h^2 max|v''| / 12 estimate with v'' from second differences
    let mut h_max = 0.0f64;
    let mut curv = 0.0f64;
    for i in 1..n - 1 {
        let hl = path.grid[i] - path.grid[i - 1];
        let hr = path.grid[i + 1] - path.grid[i];
        h_max = h_max.max(hl).max(hr);
        let h = (hl + hr) / 2.0;
        let d2 = (path.values[i + 1] - 2.0 * path.values[i] + path.values[i - 1]) / (h * h);
        curv = curv.max(d2.abs());
    }

    let mut hypothesis_holds = true;
    'outer: for i in 0..n {
        for j in i + 1..n {
            let span = path.grid[j] - path.grid[i];
            // factor 2 headroom: curv is a finite-difference estimate
            let quad_slack = lambda * span * h_max * h_max * curv / 6.0;
            let rhs = path.values[i] - lambda * (cum[j] - cum[i]) + c * span;
            if path.values[j] > rhs + tol + quad_slack {
                hypothesis_holds = false;
                break 'outer;
            }
        }
    }

    let sup01 = path
        .grid
        .iter()
        .zip(&path.values)
        .filter(|(t, _)| **t < 1.0)
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = sup01 + c / lambda;
    let conclusion_holds = path
        .grid
        .iter()
        .zip(&path.values)
        .filter(|(t, _)| **t >= 1.0)
        .all(|(_, v)| *v <= bound + tol);

    Ok(GronwallReport { hypothesis_holds, conclusion_holds })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SobolevReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// Empirical constant making the bound an equality; used by the
    /// calibrate-then-validate suite.
    pub ratio: f64,
}

/// Local Sobolev inequality on the ball `B_r(center)`:
/// `int |u|^q <= C (int |grad u|^2)^a (int |u|^2)^(q/2-a)
///  + C r^(-2a) (int |u|^2)^(q/2)` with `a = 3(q-2)/4`, `q in [2,6]`.
pub fn sobolev_local_verify<T: Scalar>(
    u: &SpectralField<T>,
    center: [f64; 3],
    r: f64,
    q: f64,
    c: f64,
) -> Result<SobolevReport> {
    if !(2.0..=6.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("q = {q} outside [2, 6]")));
    }
    if r <= 0.0 {
        return Err(Error::InvalidArgument("ball radius must be positive".into()));
    }
    let a = 0.75 * (q - 2.0);
    let m = u.basis.spec.m_grid;
    let grid = u.to_grid();
    let grads: Vec<_> = (0..3).map(|ax| u.derivative(ax).to_grid()).collect();
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let weight = 1.0 / (m * m * m) as f64; // normalised measure
    let mut int_uq = 0.0;
    let mut int_u2 = 0.0;
    let mut int_grad2 = 0.0;
    for ix in 0..m {
        for iy in 0..m {
            for iz in 0..m {
                // periodic distance to the center
                let d2: f64 = [ix, iy, iz]
                    .iter()
                    .zip(&center)
                    .map(|(i, c0)| {
                        let mut d = (*i as f64 * h - c0).abs();
                        let period = 2.0 * std::f64::consts::PI;
                        d = d.min(period - d);
                        d * d
                    })
                    .sum();
                if d2 >= r * r {
                    continue;
                }
                let j = (ix * m + iy) * m + iz;
                let v = grid.values[j];
                let mag2 =
                    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).to_f64_();
                int_u2 += weight * mag2;
                int_uq += weight * mag2.powf(q / 2.0);
                for g in &grads {
                    let gv = g.values[j];
                    int_grad2 +=
                        weight * (gv[0] * gv[0] + gv[1] * gv[1] + gv[2] * gv[2]).to_f64_();
                }
            }
        }
    }
    let rhs_shape =
        int_grad2.powf(a) * int_u2.powf(q / 2.0 - a) + int_u2.powf(q / 2.0) / r.powf(2.0 * a);
    let rhs = c * rhs_shape;
    let ratio = if rhs_shape > 0.0 { int_uq / rhs_shape } else { 0.0 };
    Ok(SobolevReport { lhs: int_uq, rhs, holds: int_uq <= rhs, ratio })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PoincareReport {
    pub ratio: f64,
    pub holds: bool,
}

/// `||u||_V^2 >= lambda_1 |u|_H^2` with `lambda_1 = 1` on this basis.
pub fn poincare_verify<T: Scalar>(u: &SpectralField<T>) -> Result<PoincareReport> {
    let h2 = u.norm_h().to_f64_().powi(2);
    if h2 == 0.0 {
        return Err(Error::InvalidArgument("zero field".into()));
    }
    let ratio = u.norm_v().to_f64_().powi(2) / h2;
    Ok(PoincareReport { ratio, holds: ratio >= 1.0 - 1e-12 })
}
