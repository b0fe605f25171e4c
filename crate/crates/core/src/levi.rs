//! Local exhaustion functions near the two model complex points and their
//! Levi forms `L_jk = ∂²f/∂z_j∂z̄_k` in the coordinates (z₁, z₂, w).
//!
//! Elliptic model `w = z̄₁² + z̄₂²` with `f = (1+|z|²)|u|²`,
//! hyperbolic model `w = |z₁|² + z̄₂²` with `f = (1+|z₂|²)|u|²`,
//! where u = w − (graph) in both cases.

use nalgebra::{Matrix4, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{c64, cvec_serde, herm_eigs3, Mat, Mat3, C64, I};

/// A point (z₁, z₂, w) of ℂ³.
pub type Point = [C64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Elliptic,
    Hyperbolic,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Elliptic => "elliptic",
            ModelKind::Hyperbolic => "hyperbolic",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elliptic" => Ok(ModelKind::Elliptic),
            "hyperbolic" => Ok(ModelKind::Hyperbolic),
            other => Err(Error::Input(format!("unknown model kind {other:?}"))),
        }
    }
}

/// w-coordinate of the model manifold over z.
pub fn graph(kind: ModelKind, z1: C64, z2: C64) -> C64 {
    match kind {
        ModelKind::Elliptic => z1.conj() * z1.conj() + z2.conj() * z2.conj(),
        ModelKind::Hyperbolic => c64(z1.norm_sqr(), 0.0) + z2.conj() * z2.conj(),
    }
}

fn weight(kind: ModelKind, q: &Point) -> f64 {
    match kind {
        ModelKind::Elliptic => 1.0 + q[0].norm_sqr() + q[1].norm_sqr(),
        ModelKind::Hyperbolic => 1.0 + q[1].norm_sqr(),
    }
}

pub fn model_f(kind: ModelKind, q: &Point) -> f64 {
    let u = q[2] - graph(kind, q[0], q[1]);
    weight(kind, q) * u.norm_sqr()
}

/// Closed-form Levi matrix.
///
/// For the hyperbolic model the (1,1) entry is `(2|z₁|² − (u+ū))(1+|z₂|²)`;
/// the commonly quoted form in [`levi_uncorrected`] drops the factor
/// (1+|z₂|²) on the 2|z₁|² term, which only agrees at z₂ = 0.
pub fn levi_closed_form(kind: ModelKind, q: &Point) -> Mat3 {
    let mut m = levi_uncorrected(kind, q);
    if kind == ModelKind::Hyperbolic {
        let (z1, z2, u) = (q[0], q[1], q[2] - graph(kind, q[0], q[1]));
        let k = 1.0 + z2.norm_sqr();
        m.0[0][0] = c64((2.0 * z1.norm_sqr() - 2.0 * u.re) * k, 0.0);
    }
    m
}

/// The two Levi matrices as usually quoted, hyperbolic (1,1) entry uncorrected.
pub fn levi_uncorrected(kind: ModelKind, q: &Point) -> Mat3 {
    let (z1, z2) = (q[0], q[1]);
    let u = q[2] - graph(kind, z1, z2);
    let (c1, c2, cu) = (z1.conj(), z2.conj(), u.conj());
    let re = |x: f64| c64(x, 0.0);
    match kind {
        ModelKind::Elliptic => {
            let k = 1.0 + z1.norm_sqr() + z2.norm_sqr();
            let mix = z1 * z2 * u + c1 * c2 * cu;
            Mat([
                [
                    re(4.0 * z1.norm_sqr() * k + u.norm_sqr()) - (z1 * z1 * u + c1 * c1 * cu) * 2.0,
                    z1 * c2 * (4.0 * k) - mix * 2.0,
                    c1 * u,
                ],
                [
                    c1 * z2 * (4.0 * k) - mix * 2.0,
                    re(4.0 * z2.norm_sqr() * k + u.norm_sqr()) - (z2 * z2 * u + c2 * c2 * cu) * 2.0,
                    c2 * u,
                ],
                [z1 * cu, z2 * cu, re(k)],
            ])
        }
        ModelKind::Hyperbolic => {
            let k = 1.0 + z2.norm_sqr();
            let s = 2.0 * u.re;
            Mat([
                [re(2.0 * z1.norm_sqr() - s * k), c1 * c2 * (2.0 * k) - c1 * z2 * s, -c1 * k],
                [
                    z1 * z2 * (2.0 * k) - z1 * c2 * s,
                    re(u.norm_sqr() + 4.0 * z2.norm_sqr() * k) - (z2 * z2 * u + c2 * c2 * cu) * 2.0,
                    c2 * u,
                ],
                [-z1 * k, z2 * cu, re(k)],
            ])
        }
    }
}

fn to_real(q: &Point) -> [f64; 6] {
    [q[0].re, q[0].im, q[1].re, q[1].im, q[2].re, q[2].im]
}

fn from_real(x: &[f64; 6]) -> Point {
    [c64(x[0], x[1]), c64(x[2], x[3]), c64(x[4], x[5])]
}

fn real_hessian(f: &impl Fn(&Point) -> f64, q: &Point, h: f64) -> [[f64; 6]; 6] {
    let x0 = to_real(q);
    let at = |d: &[(usize, f64)]| {
        let mut x = x0;
        for &(i, v) in d {
            x[i] += v;
        }
        f(&from_real(&x))
    };
    let f0 = at(&[]);
    let mut hess = [[0.0; 6]; 6];
    for i in 0..6 {
        hess[i][i] = (at(&[(i, h)]) - 2.0 * f0 + at(&[(i, -h)])) / (h * h);
        for j in 0..i {
            let v = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                + at(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    hess
}

fn wirtinger_levi(hess: &[[f64; 6]; 6]) -> Mat3 {
    // ∂²/∂z_j∂z̄_k = ¼(∂x_j∂x_k + ∂y_j∂y_k + i(∂x_j∂y_k − ∂y_j∂x_k)).
    Mat3::from_fn(|j, k| {
        let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
        c64(hess[xj][xk] + hess[yj][yk], hess[xj][yk] - hess[yj][xk]) * 0.25
    })
}

/// Levi matrix of an arbitrary real function by second differences with
/// step h, Richardson-combined with step h/2; returned Hermitized.
pub fn levi_fd_of(f: impl Fn(&Point) -> f64, q: &Point, h: f64) -> Mat3 {
    let coarse = wirtinger_levi(&real_hessian(&f, q, h));
    let fine = wirtinger_levi(&real_hessian(&f, q, 0.5 * h));
    (fine.scale_re(4.0) - coarse).scale_re(1.0 / 3.0).hermitized()
}

pub fn levi_fd(kind: ModelKind, q: &Point, h: f64) -> Mat3 {
    levi_fd_of(|p| model_f(kind, p), q, h)
}

/// Sylvester's criterion: all leading principal minors exceed `tol`.
pub fn sylvester_pd(m: &Mat3, tol: f64) -> Result<bool> {
    let defect = m.hermitian_defect();
    if defect > 1e-10 * m.norm().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let d1 = m.0[0][0].re;
    let d2 = (m.0[0][0] * m.0[1][1] - m.0[0][1] * m.0[1][0]).re;
    let d3 = m.det().re;
    Ok(d1 > tol && d2 > tol && d3 > tol)
}

/// Determinant of the lower-right 2×2 minor of the hyperbolic Levi matrix,
/// computed directly, minus its sum-of-squares rearrangement.
pub fn minor_identity_residual(z2: C64, u: C64) -> f64 {
    let k = 1.0 + z2.norm_sqr();
    let c2 = z2.conj();
    // mix = 2(z₂²u + z̄₂²ū), a real number.
    let mix = (z2 * z2 * u + c2 * c2 * u.conj()).re * 2.0;
    let m11 = u.norm_sqr() - mix + 4.0 * z2.norm_sqr() * k;
    let direct = m11 * k - (c2 * u * z2 * u.conj()).re;
    let au = u.norm();
    let a2 = z2.norm_sqr();
    let rearranged = (au - 2.0 * a2 * k).powi(2)
        + 2.0 * k * (2.0 * au * a2 - 0.5 * mix)
        + 4.0 * a2 * k * k * (1.0 - a2);
    (direct - rearranged).abs()
}

const HALTON_BASES: [u32; 6] = [2, 3, 5, 7, 11, 13];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = u64::from(base);
    let inv = 1.0 / f64::from(base);
    let (mut f, mut r) = (inv, 0.0);
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// The first `count` points of the 6-dimensional Halton sequence (skipping
/// `offset` indices) that fall in the ball of the given radius.
pub fn halton_ball(count: usize, radius: f64, offset: u64) -> Vec<Point> {
    let mut out = Vec::with_capacity(count);
    let mut i = offset + 1;
    while out.len() < count {
        let mut x = [0.0; 6];
        for (d, b) in HALTON_BASES.iter().enumerate() {
            x[d] = radius * (2.0 * radical_inverse(i, *b) - 1.0);
        }
        i += 1;
        if x.iter().map(|v| v * v).sum::<f64>() <= radius * radius {
            out.push(from_real(&x));
        }
    }
    out
}

fn point_norm(q: &Point) -> f64 {
    q.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues above this (relative to max(1, ‖L‖)) count as positive.
pub const EIG_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub radius: f64,
    /// The scan uses gridsize⁶ points.
    pub gridsize: usize,
    /// Points closer than this to the origin are skipped.
    pub exclusion: f64,
    pub include_origin: bool,
    /// Offset into the Halton sequence.
    pub seed: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            radius: 0.05,
            gridsize: 7,
            exclusion: 1e-6,
            include_origin: false,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    #[serde(with = "cvec_serde")]
    pub point: Point,
    /// Descending.
    pub eigenvalues: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeviReport {
    pub model: ModelKind,
    pub radius: f64,
    pub points: usize,
    pub excluded: usize,
    pub positive_definite: usize,
    pub at_least_two_positive: usize,
    pub violation_count: usize,
    /// Smallest eigenvalue (elliptic) or second-largest (hyperbolic) seen.
    pub min_margin: f64,
    /// Same margin restricted to the tenth of scanned points nearest the origin.
    pub near_origin_margin: f64,
    pub min_trace: f64,
    pub violations: Vec<ScanPoint>,
    #[serde(skip)]
    pub spectra: Vec<ScanPoint>,
}

fn margin(kind: ModelKind, e: &[f64; 3]) -> f64 {
    match kind {
        ModelKind::Elliptic => e[2],
        ModelKind::Hyperbolic => e[1],
    }
}

/// Elliptic: every sample must be positive definite. Hyperbolic: every
/// sample must have at least two positive eigenvalues and positive trace.
pub fn positivity_scan(kind: ModelKind, opts: &ScanOptions) -> Result<LeviReport> {
    if !(opts.radius > 0.0 && opts.radius <= 0.1) {
        return Err(Error::Input(format!("radius must lie in (0, 0.1], got {}", opts.radius)));
    }
    let count = opts.gridsize.pow(6);
    let mut pts = halton_ball(count, opts.radius, opts.seed);
    if opts.include_origin {
        pts.insert(0, [c64(0.0, 0.0); 3]);
    }
    let excluded = pts
        .iter()
        .filter(|q| !(opts.include_origin && point_norm(q) == 0.0) && point_norm(q) < opts.exclusion)
        .count();
    let kept: Vec<Point> = pts
        .into_iter()
        .filter(|q| (opts.include_origin && point_norm(q) == 0.0) || point_norm(q) >= opts.exclusion)
        .collect();
    let spectra: Vec<ScanPoint> = kept
        .par_iter()
        .map(|q| {
            let l = levi_closed_form(kind, q);
            let eigenvalues = herm_eigs3(&l).unwrap_or([f64::NAN; 3]);
            ScanPoint { point: *q, eigenvalues }
        })
        .collect();

    let mut report = LeviReport {
        model: kind,
        radius: opts.radius,
        points: spectra.len(),
        excluded,
        positive_definite: 0,
        at_least_two_positive: 0,
        violation_count: 0,
        min_margin: f64::INFINITY,
        near_origin_margin: f64::INFINITY,
        min_trace: f64::INFINITY,
        violations: Vec::new(),
        spectra: Vec::new(),
    };
    let mut norms: Vec<f64> = spectra.iter().map(|p| point_norm(&p.point)).collect();
    norms.sort_by(f64::total_cmp);
    let near = norms.get(norms.len() / 10).copied().unwrap_or(0.0);
    for sp in &spectra {
        let e = sp.eigenvalues;
        let tol = EIG_TOL * e.iter().map(|v| v.abs()).fold(1.0, f64::max);
        let positive = e.iter().filter(|&&v| v > tol).count();
        let trace: f64 = e.iter().sum();
        if positive == 3 {
            report.positive_definite += 1;
        }
        if positive >= 2 {
            report.at_least_two_positive += 1;
        }
        let ok = match kind {
            ModelKind::Elliptic => positive == 3,
            ModelKind::Hyperbolic => positive >= 2 && trace > 0.0,
        };
        if !ok {
            report.violation_count += 1;
            report.violations.push(*sp);
        }
        let m = margin(kind, &e);
        report.min_margin = report.min_margin.min(m);
        if point_norm(&sp.point) <= near {
            report.near_origin_margin = report.near_origin_margin.min(m);
        }
        report.min_trace = report.min_trace.min(trace);
    }
    report.spectra = spectra;
    Ok(report)
}

/// One CSV line per scanned point: the six real coordinates and the spectrum.
pub fn spectra_csv(report: &LeviReport) -> String {
    let mut s = String::from("re_z1,im_z1,re_z2,im_z2,re_w,im_w,eig0,eig1,eig2\n");
    for sp in &report.spectra {
        let x = to_real(&sp.point);
        let e = sp.eigenvalues;
        s.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            x[0], x[1], x[2], x[3], x[4], x[5], e[0], e[1], e[2]
        ));
    }
    s
}

/// Distance from q to the model manifold by Levenberg–Marquardt over z,
/// started at q's own z-coordinates.
pub fn distance_to_model(kind: ModelKind, q: &Point) -> Option<f64> {
    let residual = |x: &Vector4<f64>| -> ([f64; 6], [[f64; 4]; 6]) {
        let (z1, z2) = (c64(x[0], x[1]), c64(x[2], x[3]));
        let g = graph(kind, z1, z2) - q[2];
        // ∂g/∂x for the four real coordinates of z.
        let dg: [C64; 4] = match kind {
            ModelKind::Elliptic => [z1.conj() * 2.0, -I * z1.conj() * 2.0, z2.conj() * 2.0, -I * z2.conj() * 2.0],
            ModelKind::Hyperbolic => [c64(2.0 * x[0], 0.0), c64(2.0 * x[1], 0.0), z2.conj() * 2.0, -I * z2.conj() * 2.0],
        };
        let r = [x[0] - q[0].re, x[1] - q[0].im, x[2] - q[1].re, x[3] - q[1].im, g.re, g.im];
        let mut j = [[0.0; 4]; 6];
        for k in 0..4 {
            j[k][k] = 1.0;
            j[4][k] = dg[k].re;
            j[5][k] = dg[k].im;
        }
        (r, j)
    };
    let cost = |r: &[f64; 6]| r.iter().map(|v| v * v).sum::<f64>();
    let mut x = Vector4::new(q[0].re, q[0].im, q[1].re, q[1].im);
    let (mut r, mut jac) = residual(&x);
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for row in 0..6 {
            for a in 0..4 {
                jtr[a] += jac[row][a] * r[row];
                for b in 0..4 {
                    jtj[(a, b)] += jac[row][a] * jac[row][b];
                }
            }
        }
        if jtr.norm() <= 1e-300 {
            break;
        }
        let damped = jtj + Matrix4::identity() * lambda;
        let step = damped.cholesky()?.solve(&(-jtr));
        let xn = x + step;
        let (rn, jn) = residual(&xn);
        let cn = cost(&rn);
        if cn < c {
            let done = step.norm() <= 1e-15 * (1.0 + x.norm()) || (c - cn) <= 1e-30;
            x = xn;
            r = rn;
            jac = jn;
            c = cn;
            lambda = (lambda * 0.3).max(1e-12);
            if done {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    c.is_finite().then(|| c.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthBounds {
    pub c_est: f64,
    #[serde(rename = "C_est")]
    pub cap_est: f64,
    pub points: usize,
    /// Points on the manifold (distance below 1e-12), where the ratio is 0/0.
    pub on_manifold: usize,
    pub failures: usize,
}

/// min and max of f(q)/dist(q, Y)² over a Halton scan of the ball.
pub fn growth_bounds(kind: ModelKind, radius: f64, gridsize: usize) -> Result<GrowthBounds> {
    if !(radius > 0.0 && radius <= 0.1) {
        return Err(Error::Input(format!("radius must lie in (0, 0.1], got {radius}")));
    }
    let pts = halton_ball(gridsize.pow(6), radius, 0);
    let ratios: Vec<Option<Option<f64>>> = pts
        .par_iter()
        .map(|q| {
            let d = distance_to_model(kind, q)?;
            if d < 1e-12 {
                return Some(None);
            }
            Some(Some(model_f(kind, q) / (d * d)))
        })
        .collect();
    let mut out = GrowthBounds {
        c_est: f64::INFINITY,
        cap_est: 0.0,
        points: pts.len(),
        on_manifold: 0,
        failures: 0,
    };
    for r in ratios {
        match r {
            None => out.failures += 1,
            Some(None) => out.on_manifold += 1,
            Some(Some(v)) => {
                out.c_est = out.c_est.min(v);
                out.cap_est = out.cap_est.max(v);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, radius: f64) -> Point {
        loop {
            let x: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-radius..radius));
            if x.iter().map(|v| v * v).sum::<f64>() <= radius * radius {
                return from_real(&x);
            }
        }
    }

    fn max_entry(m: &Mat3) -> f64 {
        m.max_abs()
    }

    #[test]
    fn model_values() {
        let o = [c64(0.0, 0.0); 3];
        assert_eq!(model_f(ModelKind::Elliptic, &o), 0.0);
        let q = [c64(0.0, 0.0), c64(0.0, 0.0), c64(0.3, 0.4)];
        assert!((model_f(ModelKind::Elliptic, &q) - 0.25).abs() < 1e-15);
        let z1 = c64(0.2, -0.1);
        let q = [z1, c64(0.0, 0.0), c64(z1.norm_sqr(), 0.0)];
        assert_eq!(model_f(ModelKind::Hyperbolic, &q), 0.0);
    }

    #[test]
    fn closed_form_examples() {
        let o = [c64(0.0, 0.0); 3];
        let l = levi_closed_form(ModelKind::Elliptic, &o);
        assert!((l - Mat3::diag([c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)])).norm() < 1e-15);
        let z1 = c64(0.3, 0.2);
        let q = [z1, c64(0.0, 0.0), c64(z1.norm_sqr(), 0.0)];
        let l = levi_closed_form(ModelKind::Hyperbolic, &q);
        let a = z1.norm_sqr();
        let want = Mat([
            [c64(2.0 * a, 0.0), c64(0.0, 0.0), -z1.conj()],
            [c64(0.0, 0.0); 3],
            [-z1, c64(0.0, 0.0), c64(1.0, 0.0)],
        ]);
        assert!((l - want).norm() < 1e-15);
        let e = herm_eigs3(&l).unwrap();
        assert!(e[2].abs() < 1e-14 && e[1] > 0.0);
    }

    #[test]
    fn fd_identity_for_distance_squared() {
        // Cancellation error is about eps·f/h² per entry.
        let q = [c64(0.1, 0.2), c64(-0.3, 0.0), c64(0.05, 0.5)];
        let l = levi_fd_of(|p| p.iter().map(|z| z.norm_sqr()).sum(), &q, 1e-4);
        let err = (l - Mat3::identity()).norm();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn fd_on_elliptic_slice() {
        let q = [c64(0.0, 0.0), c64(0.0, 0.0), c64(0.01, 0.0)];
        let l = levi_fd(ModelKind::Elliptic, &q, 1e-4);
        let want = Mat3::diag([c64(1e-4, 0.0), c64(1e-4, 0.0), c64(1.0, 0.0)]);
        assert!((l - want).norm() < 1e-6);
    }

    #[test]
    fn closed_form_matches_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kind in [ModelKind::Elliptic, ModelKind::Hyperbolic] {
            for _ in 0..200 {
                let q = random_point(&mut rng, 0.1);
                let d = levi_closed_form(kind, &q) - levi_fd(kind, &q, 1e-4);
                assert!(max_entry(&d) < 1e-6, "{kind:?} {q:?}");
            }
        }
    }

    #[test]
    fn uncorrected_hyperbolic_entry_differs_off_slice() {
        let q = [c64(0.5, 0.0), c64(0.5, 0.0), c64(0.1, 0.0)];
        let fd = levi_fd(ModelKind::Hyperbolic, &q, 1e-4);
        let uncorrected = levi_uncorrected(ModelKind::Hyperbolic, &q);
        let fixed = levi_closed_form(ModelKind::Hyperbolic, &q);
        assert!((fd.0[0][0] - fixed.0[0][0]).norm() < 1e-6);
        assert!((fd.0[0][0] - uncorrected.0[0][0]).norm() > 0.1);
        let on_slice = [c64(0.5, 0.0), c64(0.0, 0.0), c64(0.1, 0.0)];
        assert_eq!(
            levi_uncorrected(ModelKind::Hyperbolic, &on_slice),
            levi_closed_form(ModelKind::Hyperbolic, &on_slice)
        );
    }

    #[test]
    fn sylvester_examples() {
        assert!(sylvester_pd(&Mat3::identity(), 0.0).unwrap());
        assert!(!sylvester_pd(&Mat3::diag([c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]), 0.0).unwrap());
        let mut bad = Mat3::identity();
        bad.0[0][1] = c64(1.0, 0.0);
        assert!(matches!(sylvester_pd(&bad, 0.0), Err(Error::NotHermitian(_))));
        let q = [c64(0.01, 0.0), c64(0.01, 0.0), c64(0.0003, 0.0)];
        let l = levi_closed_form(ModelKind::Elliptic, &q);
        let e = herm_eigs3(&l).unwrap();
        assert_eq!(sylvester_pd(&l, 0.0).unwrap(), e[2] > 0.0);
    }

    #[test]
    fn minor_identity() {
        assert_eq!(minor_identity_residual(c64(0.0, 0.0), c64(0.0, 0.0)), 0.0);
        assert!(minor_identity_residual(c64(0.1, 0.0), c64(0.02, 0.01)) < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let z2 = C64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..6.3));
            let u = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            assert!(minor_identity_residual(z2, u) < 1e-10);
        }
    }

    #[test]
    fn small_scans() {
        let opts = ScanOptions { gridsize: 4, ..ScanOptions::default() };
        let e = positivity_scan(ModelKind::Elliptic, &opts).unwrap();
        assert_eq!(e.points, 4096);
        assert_eq!(e.violation_count, 0, "{:?}", e.violations.first());
        let h = positivity_scan(ModelKind::Hyperbolic, &opts).unwrap();
        assert_eq!(h.violation_count, 0);
        assert!(h.min_trace > 0.0);
        let with_origin = ScanOptions { include_origin: true, ..opts };
        let e = positivity_scan(ModelKind::Elliptic, &with_origin).unwrap();
        assert_eq!(e.violation_count, 1);
        assert_eq!(e.violations[0].point, [c64(0.0, 0.0); 3]);
        assert!(positivity_scan(ModelKind::Elliptic, &ScanOptions { radius: 0.5, ..opts }).is_err());
    }

    #[test]
    fn hyperbolic_zero_eigenvalue_on_slice() {
        for &x in &[0.01, 0.03, -0.02] {
            let z1 = c64(x, 0.5 * x);
            let q = [z1, c64(0.0, 0.0), c64(z1.norm_sqr(), 0.0)];
            let e = herm_eigs3(&levi_closed_form(ModelKind::Hyperbolic, &q)).unwrap();
            assert!(e[0] > 0.0 && e[1] > 0.0 && e[2].abs() < 1e-14, "{e:?}");
        }
    }

    #[test]
    fn distance_examples() {
        for &w in &[1e-2, 1e-3, 1e-4] {
            let q = [c64(0.0, 0.0), c64(0.0, 0.0), c64(w, 0.0)];
            let d = distance_to_model(ModelKind::Elliptic, &q).unwrap();
            let ratio = model_f(ModelKind::Elliptic, &q) / (d * d);
            assert!((ratio - 1.0).abs() < 10.0 * w, "w={w} ratio={ratio}");
        }
        let z1 = c64(0.02, 0.01);
        let q = [z1, c64(0.0, 0.0), c64(z1.norm_sqr(), 0.0)];
        assert!(distance_to_model(ModelKind::Hyperbolic, &q).unwrap() < 1e-12);
    }

    #[test]
    fn growth_small() {
        for kind in [ModelKind::Elliptic, ModelKind::Hyperbolic] {
            let g = growth_bounds(kind, 0.05, 3).unwrap();
            assert!(g.c_est > 0.0 && g.cap_est < 1e3, "{g:?}");
            assert_eq!(g.failures, 0);
        }
    }
}
