//! Radial interpolation between a center pair and a boundary pair:
//! `w = z̄ᵀA(s)z + Re(zᵀB(s)z)` with `s = (|z|/ε)^{1/n}`, and the grid check
//! that the interpolated manifold has no complex point other than the origin.
//!
//! Writing `z = r z'` with |z'| = 1, the Wirtinger gradient of the right-hand
//! side is `r·(A(s)z' + B̄(s)z̄' + (s/2n)·q(s, z')·z')` where
//! `q = z̄'ᵀA'(s)z' + Re(z'ᵀB'(s)z')`. A complex point is a zero of it.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homotopy::HomotopyPath;
use crate::kernel::{c64, cvec_serde, Mat2, C64};

/// Path with `path(0)` the center pair and `path(1)` the boundary pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub path: HomotopyPath,
    pub epsilon: f64,
    pub n: u32,
}

impl SurfaceSpec {
    pub fn new(path: HomotopyPath, epsilon: f64, n: u32) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Input(format!("epsilon must be positive, got {epsilon}")));
        }
        if n == 0 {
            return Err(Error::Input("n must be a positive integer".into()));
        }
        if !path.flattened {
            return Err(Error::NotFlattened);
        }
        match path.certificate {
            Some(c) if c.pass => {}
            _ => return Err(Error::Uncertified),
        }
        Ok(SurfaceSpec { path, epsilon, n })
    }

    pub fn with_n(&self, n: u32) -> Result<Self> {
        SurfaceSpec::new(self.path.clone(), self.epsilon, n)
    }

    fn radius_param(&self, r: f64) -> f64 {
        (r / self.epsilon).powf(1.0 / f64::from(self.n)).min(1.0)
    }
}

/// Flattens a certified path for use in a [`SurfaceSpec`].
pub fn flatten(path: &HomotopyPath) -> HomotopyPath {
    path.flattened()
}

fn norm2(z: &[C64; 2]) -> f64 {
    (z[0].norm_sqr() + z[1].norm_sqr()).sqrt()
}

fn quad(a: &Mat2, b: &Mat2, z: &[C64; 2]) -> C64 {
    let zb = [z[0].conj(), z[1].conj()];
    a.bilinear(&zb, z) + b.bilinear(z, z).re
}

/// `z̄ᵀA(s)z + Re(zᵀB(s)z)`; equals the boundary pair's form for |z| ≥ ε.
pub fn surface_eval(spec: &SurfaceSpec, z: &[C64; 2]) -> Result<C64> {
    let r = norm2(z);
    if r == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let p = spec.path.eval(spec.radius_param(r))?;
    Ok(quad(&p.a, &p.b, z))
}

/// `(∂f/∂z̄₁, ∂f/∂z̄₂)` by central differences in the real coordinates.
pub fn wirtinger_gradient(f: impl Fn(&[C64; 2]) -> C64, z: &[C64; 2], h: f64) -> [C64; 2] {
    let mut out = [C64::new(0.0, 0.0); 2];
    for j in 0..2 {
        let step = |d: C64| {
            let mut p = *z;
            let mut m = *z;
            p[j] += d;
            m[j] -= d;
            (f(&p) - f(&m)) / (2.0 * h)
        };
        let dx = step(c64(h, 0.0));
        let dy = step(c64(0.0, h));
        out[j] = (dx + C64::i() * dy) * 0.5;
    }
    out
}

/// The bracket `A(s)z' + B̄(s)z̄' + (s/2n)·q·z'` for given A, B, A', B'.
fn bracket(a: &Mat2, b: &Mat2, da: &Mat2, db: &Mat2, s: f64, n: f64, zp: &[C64; 2]) -> ([C64; 2], C64) {
    let zb = [zp[0].conj(), zp[1].conj()];
    let az = a.mul_vec(zp);
    let bz = b.conj().mul_vec(&zb);
    let q = quad(da, db, zp);
    let k = q * (s / (2.0 * n));
    ([az[0] + bz[0] + k * zp[0], az[1] + bz[1] + k * zp[1]], q)
}

/// Resolution of the verification grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid {
    /// s takes the values k/s_steps, k = 1..=s_steps.
    pub s_steps: usize,
    /// u ∈ [0, π/2] at u_steps points, endpoints included.
    pub u_steps: usize,
    /// θ₁, θ₂ ∈ [0, 2π) at theta_steps points each.
    pub theta_steps: usize,
}

impl Default for SurfaceGrid {
    fn default() -> Self {
        SurfaceGrid {
            s_steps: 64,
            u_steps: 32,
            theta_steps: 32,
        }
    }
}

impl SurfaceGrid {
    fn s_values(&self) -> Vec<f64> {
        (1..=self.s_steps).map(|k| k as f64 / self.s_steps as f64).collect()
    }

    /// z' = (cos u·e^{iθ₁}, sin u·e^{iθ₂}).
    fn sphere(&self) -> Vec<[C64; 2]> {
        let mut pts = Vec::with_capacity(self.u_steps * self.theta_steps * self.theta_steps);
        for i in 0..self.u_steps {
            let u = if self.u_steps > 1 {
                FRAC_PI_2 * i as f64 / (self.u_steps - 1) as f64
            } else {
                0.0
            };
            for j in 0..self.theta_steps {
                let t1 = TAU * j as f64 / self.theta_steps as f64;
                for k in 0..self.theta_steps {
                    let t2 = TAU * k as f64 / self.theta_steps as f64;
                    pts.push([C64::from_polar(u.cos(), t1), C64::from_polar(u.sin(), t2)]);
                }
            }
        }
        pts
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub delta: f64,
    pub m: f64,
    pub n_required: u32,
}

struct Slice {
    s: f64,
    a: Mat2,
    b: Mat2,
    da: Mat2,
    db: Mat2,
}

fn slices(spec: &SurfaceSpec, grid: &SurfaceGrid) -> Result<Vec<Slice>> {
    grid.s_values()
        .into_iter()
        .map(|s| {
            let p = spec.path.eval(s)?;
            let (da, db) = spec.path.derivative(s)?;
            Ok(Slice { s, a: p.a, b: p.b, da, db })
        })
        .collect()
}

/// δ = min ‖A(s)z' + B̄(s)z̄'‖ and m = max |q| over the grid, and the
/// smallest n with n > m/(2δ).
pub fn bounds(spec: &SurfaceSpec, grid: &SurfaceGrid, tol: f64) -> Result<Bounds> {
    let sl = slices(spec, grid)?;
    let sphere = grid.sphere();
    let per_slice: Vec<(f64, f64)> = sl
        .par_iter()
        .map(|x| {
            let mut delta = f64::INFINITY;
            let mut m: f64 = 0.0;
            for zp in &sphere {
                let zb = [zp[0].conj(), zp[1].conj()];
                let az = x.a.mul_vec(zp);
                let bz = x.b.conj().mul_vec(&zb);
                delta = delta.min(norm2(&[az[0] + bz[0], az[1] + bz[1]]));
                m = m.max(quad(&x.da, &x.db, zp).norm());
            }
            (delta, m)
        })
        .collect();
    let delta = per_slice.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let m = per_slice.iter().map(|p| p.1).fold(0.0, f64::max);
    if delta < tol {
        return Err(Error::DeltaZero(delta));
    }
    let ratio = m / (2.0 * delta);
    let n_required = (ratio.floor() + 1.0).min(f64::from(u32::MAX)) as u32;
    Ok(Bounds { delta, m, n_required })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstPoint {
    pub s: f64,
    #[serde(with = "cvec_serde")]
    pub zprime: [C64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceReport {
    pub delta: f64,
    pub m: f64,
    pub n_required: u32,
    pub n_used: u32,
    pub min_inequality: f64,
    pub pass: bool,
    pub worst_point: WorstPoint,
    /// Largest disagreement between the bracket and the finite-difference
    /// gradient of [`surface_eval`] divided by |z|, over random grid points.
    pub oracle_max_error: f64,
    pub oracle_points: usize,
}

const ORACLE_POINTS: usize = 100;

/// Evaluates the gradient bracket on the grid; passes iff its minimum norm
/// exceeds `tol`. The bracket is cross-checked against finite differences of
/// [`surface_eval`] at seeded random grid points.
pub fn verify_no_new_complex_points(spec: &SurfaceSpec, grid: &SurfaceGrid, tol: f64, seed: u64) -> Result<SurfaceReport> {
    let b = bounds(spec, grid, 0.0)?;
    let sl = slices(spec, grid)?;
    let sphere = grid.sphere();
    let n = f64::from(spec.n);
    let per_slice: Vec<(f64, usize)> = sl
        .par_iter()
        .map(|x| {
            let mut best = (f64::INFINITY, 0);
            for (i, zp) in sphere.iter().enumerate() {
                let (v, _) = bracket(&x.a, &x.b, &x.da, &x.db, x.s, n, zp);
                let nv = norm2(&v);
                if nv < best.0 {
                    best = (nv, i);
                }
            }
            best
        })
        .collect();
    let (mut min_ineq, mut worst) = (f64::INFINITY, WorstPoint { s: 0.0, zprime: sphere[0] });
    for (x, &(v, i)) in sl.iter().zip(&per_slice) {
        if v < min_ineq {
            min_ineq = v;
            worst = WorstPoint { s: x.s, zprime: sphere[i] };
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut oracle_max_error: f64 = 0.0;
    let mut oracle_points = 0;
    for _ in 0..ORACLE_POINTS * 4 {
        if oracle_points == ORACLE_POINTS {
            break;
        }
        let x = &sl[rng.gen_range(0..sl.len())];
        let zp = sphere[rng.gen_range(0..sphere.len())];
        let r = spec.epsilon * x.s.powi(spec.n as i32);
        // Points too close to the origin cannot be differenced in f64.
        if r < 1e-100 || x.s >= 1.0 {
            continue;
        }
        let z = [zp[0] * r, zp[1] * r];
        let fd = wirtinger_gradient(|w| surface_eval(spec, w).unwrap_or_default(), &z, 1e-4 * r);
        let (v, _) = bracket(&x.a, &x.b, &x.da, &x.db, x.s, n, &zp);
        let err = ((fd[0] / r - v[0]).norm()).max((fd[1] / r - v[1]).norm());
        oracle_max_error = oracle_max_error.max(err);
        oracle_points += 1;
    }

    Ok(SurfaceReport {
        delta: b.delta,
        m: b.m,
        n_required: b.n_required,
        n_used: spec.n,
        min_inequality: min_ineq,
        pass: min_ineq > tol,
        worst_point: worst,
        oracle_max_error,
        oracle_points,
    })
}
