//! The acceptance checks, runnable from the CLI (`crpoint selftest`) and from
//! the `acceptance` integration test. Each check returns one outcome line.

use std::f64::consts::TAU;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::canon::{normal_form, CosquareClass, DEFAULT_TOL};
use crate::error::{Error, NonGenericReason};
use crate::homotopy::{
    connect_to_model, bump, model_pair, verify_nondegenerate, ConnectOptions, HomotopyPath, Recipe, Segment,
    DEFAULT_MARGIN, DEFAULT_SAMPLES,
};
use crate::kernel::{c64, Mat2, C64};
use crate::levi::{
    growth_bounds, levi_closed_form, levi_fd, minor_identity_residual, positivity_scan, ModelKind, Point, ScanOptions,
};
use crate::pairs::{act, block_det, det4, random_group_element, random_pair, sign_class, MatrixPair, Sign, SIGN_TOL};
use crate::surface::{bounds, flatten, verify_no_new_complex_points, SurfaceGrid, SurfaceSpec};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] criterion {} {}: {} ({:.2}s of {:.0}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds,
            self.budget_seconds
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Config {
    pub seed: u64,
    /// Caps every random case count; `None` runs the full sizes.
    pub cases: Option<usize>,
}

impl Config {
    fn count(&self, full: usize) -> usize {
        self.cases.map_or(full, |c| c.min(full)).max(1)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9e37_79b9).wrapping_add(salt))
    }

    fn pair_seed(&self, salt: u64, i: usize) -> u64 {
        self.seed.wrapping_mul(1_000_003).wrapping_add(salt << 32).wrapping_add(i as u64)
    }
}

fn finish(id: u8, name: &'static str, start: Instant, budget: f64, ok: bool, detail: String) -> Outcome {
    let seconds = start.elapsed().as_secs_f64();
    Outcome {
        id,
        name,
        pass: ok && seconds <= budget,
        detail,
        seconds,
        budget_seconds: budget,
    }
}

/// Determinant by the Leibniz sum over all 24 permutations.
fn leibniz_det4(m: &[[C64; 4]; 4]) -> C64 {
    let mut total = c64(0.0, 0.0);
    let mut perm = [0usize, 1, 2, 3];
    // Heap's algorithm, tracking the sign.
    let mut c = [0usize; 4];
    let mut sign = 1.0;
    let term = |p: &[usize; 4]| (0..4).fold(c64(1.0, 0.0), |acc, i| acc * m[i][p[i]]);
    total += term(&perm) * sign;
    let mut i = 0;
    while i < 4 {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            total += term(&perm) * sign;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    total
}

fn block_entries(a: &Mat2, b: &Mat2) -> [[C64; 4]; 4] {
    let mut m = [[c64(0.0, 0.0); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a.0[i][j];
            m[i][j + 2] = b.0[i][j].conj();
            m[i + 2][j] = b.0[i][j];
            m[i + 2][j + 2] = a.0[i][j].conj();
        }
    }
    m
}

/// Sign of det4 agrees with an independent Leibniz determinant on random pairs.
pub fn sign_oracle(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let n = cfg.count(10_000);
    let results: Vec<(bool, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = random_pair(cfg.pair_seed(1, i), 1.0);
            let class = sign_class(&p, SIGN_TOL);
            let np = p.normalized();
            let exact = leibniz_det4(&block_entries(&np.a, &np.b));
            let scale = (1.0 + np.a.norm() + np.b.norm()).powi(4);
            let tag = if exact.re > SIGN_TOL * scale {
                Sign::Elliptic
            } else if exact.re < -SIGN_TOL * scale {
                Sign::Hyperbolic
            } else {
                Sign::Degenerate
            };
            let raw = block_det(&p.a, &p.b);
            let raw_scale = (1.0 + p.a.norm() + p.b.norm()).powi(4);
            (tag == class.tag, raw.im.abs() / raw_scale)
        })
        .collect();
    let mismatches = results.iter().filter(|r| !r.0).count();
    let max_im = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let ok = mismatches == 0 && max_im < 1e-10;
    finish(
        1,
        "sign classifier vs Leibniz determinant",
        start,
        5.0,
        ok,
        format!("{n} pairs, {mismatches} mismatches, max |Im det4|/scale = {max_im:.2e}"),
    )
}

/// The closed-form determinant polynomials of the two canonical families.
pub fn det_polynomial_type_i(phi: f64, a: f64, d: f64, b: C64) -> f64 {
    let bb = b.norm_sqr();
    bb * bb - a * d * (b * b + b.conj() * b.conj()).re - 2.0 * bb * phi.cos() + (1.0 - a * a) * (1.0 - d * d)
}

pub fn det_polynomial_type_iii(tau: f64, a: C64, b: C64) -> f64 {
    let (aa, bb) = (a.norm_sqr(), b.norm_sqr());
    let (alpha, beta) = (a.arg(), b.arg());
    bb * bb - bb * tau * tau - bb - 2.0 * aa * bb * (2.0 * beta).cos() + aa * aa - 2.0 * aa * tau * (2.0 * alpha).cos()
        + tau * tau
}

/// The closed-form determinant polynomials against the structural det4.
pub fn det_formulas(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let n = cfg.count(10_000);
    let mut rng = cfg.rng(2);
    let cplx = |rng: &mut ChaCha8Rng| c64(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let (mut worst1, mut worst2): (f64, f64) = (0.0, 0.0);
    let mut corner_one_mismatch = 0;
    for _ in 0..n {
        let (phi, a, d) = (rng.gen_range(0.0..TAU), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let b = cplx(&mut rng);
        let am = Mat2::diag([c64(1.0, 0.0), C64::from_polar(1.0, phi)]);
        let bm = Mat2::new(c64(a, 0.0), b, b, c64(d, 0.0));
        let poly = det_polynomial_type_i(phi, a, d, b);
        let exact = block_det(&am, &bm).re;
        let scale = 1.0 + b.norm_sqr().powi(2) + (a * d).abs() * b.norm_sqr() + b.norm_sqr() + (1.0 + a * a) * (1.0 + d * d);
        worst1 = worst1.max((poly - exact).abs() / scale);

        let tau = rng.gen_range(0.0..1.0);
        let (a2, b2) = (cplx(&mut rng), cplx(&mut rng));
        let am = Mat2::new(c64(0.0, 0.0), c64(1.0, 0.0), c64(tau, 0.0), c64(0.0, 0.0));
        let bm = Mat2::new(a2, b2, b2, a2.conj());
        let poly = det_polynomial_type_iii(tau, a2, b2);
        let exact = block_det(&am, &bm).re;
        let (aa, bb) = (a2.norm_sqr(), b2.norm_sqr());
        let scale = 1.0 + (aa + bb + tau).powi(2);
        worst2 = worst2.max((poly - exact).abs() / scale);
        // The same matrix with the bottom-right corner set to 1.
        let mut m = block_entries(&am, &bm);
        m[3][3] = c64(1.0, 0.0);
        if (leibniz_det4(&m).re - poly).abs() > 1e-6 * scale {
            corner_one_mismatch += 1;
        }
    }
    let ok = worst1 < 1e-9 && worst2 < 1e-9;
    finish(
        2,
        "determinant polynomials",
        start,
        5.0,
        ok,
        format!(
            "{n} draws each, max relative error {worst1:.2e} (type I) and {worst2:.2e} (type III); \
             a corner entry of 1 disagrees in {corner_one_mismatch} draws"
        ),
    )
}

/// sign_class is invariant under the group and det4 scales by |det P|⁴.
pub fn group_invariance(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let pairs = cfg.count(100);
    let elements = cfg.count(1000);
    let per_pair: Vec<(usize, f64, usize)> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut seed = cfg.pair_seed(3, i);
            let p = loop {
                let p = random_pair(seed, 1.0);
                if sign_class(&p, SIGN_TOL).det4_normalized.abs() > 1e-6 {
                    break p;
                }
                seed = seed.wrapping_add(1 << 20);
            };
            let base = sign_class(&p, SIGN_TOL);
            let d0 = det4(&p);
            let (mut flips, mut worst) = (0, 0.0_f64);
            for j in 0..elements {
                let g = random_group_element(cfg.pair_seed(30 + i as u64, j));
                let q = act(&g, &p).expect("sampled group elements are invertible");
                if sign_class(&q, SIGN_TOL).tag != base.tag {
                    flips += 1;
                }
                let expect = g.p.det().norm().powi(4) * d0;
                worst = worst.max((det4(&q) - expect).abs() / expect.abs());
            }
            (flips, worst, elements)
        })
        .collect();
    let flips: usize = per_pair.iter().map(|r| r.0).sum();
    let worst = per_pair.iter().map(|r| r.1).fold(0.0, f64::max);
    let total: usize = per_pair.iter().map(|r| r.2).sum();
    finish(
        3,
        "group invariance of the sign",
        start,
        10.0,
        flips == 0 && worst < 1e-8,
        format!("{total} actions on {pairs} pairs, {flips} sign changes, max relative det4 error {worst:.2e}"),
    )
}

fn class_invariant(c: &CosquareClass) -> Option<f64> {
    match *c {
        CosquareClass::TypeI { theta } => Some(theta),
        CosquareClass::TypeIII { mu } => Some(mu),
        _ => None,
    }
}

fn same_kind(a: &CosquareClass, b: &CosquareClass) -> bool {
    std::mem::discriminant(a) == std::mem::discriminant(b)
}

/// Witnesses reproduce the canonical pair and θ/μ is a group invariant.
pub fn normal_form_soundness(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let n = cfg.count(1000);
    let rows: Vec<Option<(f64, f64, bool)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = random_pair(cfg.pair_seed(4, i), 1.0);
            let nf = match normal_form(&p, DEFAULT_TOL) {
                Ok(nf) => nf,
                Err(Error::NonGeneric(NonGenericReason::IllConditioned)) => return Some((f64::INFINITY, 0.0, false)),
                Err(_) => return None,
            };
            let image = act(&nf.witness, &p).expect("witness is invertible");
            let reproduce = image.distance(&nf.pair()) / p.scale().max(1.0);
            let inv = class_invariant(&nf.class).unwrap_or(f64::NAN);
            let mut drift: f64 = 0.0;
            let mut consistent = true;
            for k in 0..3 {
                let g = random_group_element(cfg.pair_seed(40, 3 * i + k));
                let q = act(&g, &p).expect("sampled group elements are invertible");
                match normal_form(&q, DEFAULT_TOL) {
                    Ok(other) if same_kind(&other.class, &nf.class) => {
                        drift = drift.max((class_invariant(&other.class).unwrap_or(f64::NAN) - inv).abs());
                    }
                    _ => consistent = false,
                }
            }
            Some((reproduce, drift, consistent))
        })
        .collect();
    let used: Vec<_> = rows.iter().flatten().collect();
    let worst_rep = used.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst_drift = used.iter().map(|r| r.1).fold(0.0, f64::max);
    let inconsistent = used.iter().filter(|r| !r.2).count();
    let ok = !used.is_empty() && worst_rep < 1e-8 && worst_drift < 1e-7 && inconsistent == 0;
    finish(
        4,
        "normal-form soundness",
        start,
        30.0,
        ok,
        format!(
            "{} generic of {n} pairs, max reconstruction error {worst_rep:.2e}, max theta/mu drift {worst_drift:.2e}, \
             {inconsistent} class changes",
            used.len()
        ),
    )
}

/// det4 along the two bump segments against their closed forms.
fn bump_formula_error() -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..=1000 {
        let t = k as f64 / 1000.0;
        let x = bump(t, 0.5);
        let p = Recipe::Eli3ToEli2Bump { eta: 0.5 }.eval(t);
        let closed = (1.0 - 2.0 * t).powi(2) + x * x * (x * x + 2.0 * t * t);
        worst = worst.max((block_det(&p.a, &p.b).re - closed).abs());
        let p = Recipe::HypFinalBump { eta: 0.5 }.eval(t);
        let closed = -((1.0 - 2.0 * t).powi(2) + t * t * x * x);
        worst = worst.max((block_det(&p.a, &p.b).re - closed).abs());
    }
    worst
}

fn flat_bump_rejected(recipe: Recipe) -> bool {
    let path = HomotopyPath::new(vec![Segment::Catalog(recipe)]);
    let cert = verify_nondegenerate(&path, DEFAULT_SAMPLES, DEFAULT_MARGIN);
    !cert.pass && (cert.worst_t - 0.5).abs() < 1e-3
}

/// Random pairs counted as generic by the homotopy and surface checks:
/// nondegenerate with a normal form.
pub fn generic_pair(cfg: &Config, salt: u64, i: usize) -> Option<MatrixPair> {
    let p = random_pair(cfg.pair_seed(salt, i), 1.0);
    (sign_class(&p, SIGN_TOL).tag != Sign::Degenerate && normal_form(&p, DEFAULT_TOL).is_ok()).then_some(p)
}

pub fn homotopy_certification(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let n = cfg.count(1000);
    let opts = ConnectOptions { seed: cfg.seed, ..ConnectOptions::default() };
    let pairs: Vec<MatrixPair> = (0..).filter_map(|i| generic_pair(cfg, 5, i)).take(n).collect();
    let rows: Vec<std::result::Result<(f64, f64, Sign), String>> = pairs
        .par_iter()
        .map(|p| {
            let sign = sign_class(p, SIGN_TOL).tag;
            let path = connect_to_model(p, &opts).map_err(|e| e.to_string())?;
            let cert = path.certificate.ok_or("missing certificate")?;
            if !cert.pass || cert.samples != DEFAULT_SAMPLES {
                return Err(format!("certificate failed: {cert:?}"));
            }
            let start_gap = path.eval(0.0).map_err(|e| e.to_string())?.distance(p);
            let model = model_pair(sign).map_err(|e| e.to_string())?;
            let end_gap = path.eval(1.0).map_err(|e| e.to_string())?.distance(&model);
            Ok((cert.min_abs_det4, start_gap.max(end_gap), sign))
        })
        .collect();
    let failures = rows.iter().filter(|r| r.is_err()).count();
    let ok_rows: Vec<_> = rows.iter().filter_map(|r| r.as_ref().ok()).collect();
    let min_det = ok_rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let max_gap = ok_rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let hyperbolic = ok_rows.iter().filter(|r| r.2 == Sign::Hyperbolic).count();
    let formula = bump_formula_error();
    let rejected = flat_bump_rejected(Recipe::Eli3ToEli2Bump { eta: 0.0 }) && flat_bump_rejected(Recipe::HypFinalBump { eta: 0.0 });
    let ok = failures == 0 && min_det > DEFAULT_MARGIN && max_gap <= 1e-9 && formula < 1e-9 && rejected && hyperbolic > 0;
    finish(
        5,
        "homotopy certification",
        start,
        300.0,
        ok,
        format!(
            "{} pairs ({hyperbolic} hyperbolic), {failures} failures, min |det4| {min_det:.3e}, max endpoint gap {max_gap:.1e}, \
             bump formula error {formula:.1e}, flat bumps rejected: {rejected}",
            pairs.len()
        ),
    )
}

pub fn radial_construction(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let grid = SurfaceGrid::default();
    let mut notes = Vec::new();
    let mut ok = true;
    for sign in [Sign::Elliptic, Sign::Hyperbolic] {
        let mut path = HomotopyPath::constant(model_pair(sign).expect("non-degenerate sign"));
        path.certify(DEFAULT_SAMPLES, DEFAULT_MARGIN);
        let spec = SurfaceSpec::new(flatten(&path), 1.0, 1).expect("constant path is certified");
        match bounds(&spec, &grid, 1e-9) {
            Ok(b) => {
                let exact = (b.delta - 1.0).abs() <= 1e-12 && b.m.abs() <= 1e-12 && b.n_required == 1;
                ok &= exact;
                notes.push(format!("{} model: delta {:.3}, m {:.1e}, n {}", sign.as_str(), b.delta, b.m, b.n_required));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("{} model: {e}", sign.as_str()));
            }
        }
    }
    let n = cfg.count(10);
    let opts = ConnectOptions { seed: cfg.seed, ..ConnectOptions::default() };
    let mut passed = 0;
    let (mut worst_oracle, mut max_n): (f64, u32) = (0.0, 0);
    let mut oracle_points = 0;
    for (k, p) in (0..).filter_map(|i| generic_pair(cfg, 6, i)).take(n).enumerate() {
        let result = connect_to_model(&p, &opts).and_then(|path| {
            // Center at the model, boundary at the given pair.
            let spec = SurfaceSpec::new(flatten(&path.reversed()), 1.0, 1)?;
            let b = bounds(&spec, &grid, 1e-9)?;
            let spec = spec.with_n(b.n_required)?;
            verify_no_new_complex_points(&spec, &grid, 1e-9, cfg.seed.wrapping_add(k as u64))
        });
        match result {
            Ok(rep) => {
                if rep.pass {
                    passed += 1;
                }
                worst_oracle = worst_oracle.max(rep.oracle_max_error);
                oracle_points += rep.oracle_points;
                max_n = max_n.max(rep.n_used);
            }
            Err(e) => notes.push(format!("path {k}: {e}")),
        }
    }
    ok &= passed == n && worst_oracle < 1e-6 && oracle_points >= 100;
    notes.push(format!(
        "{passed}/{n} paths pass at n = n_required (max n {max_n}), oracle error {worst_oracle:.1e} over {oracle_points} points"
    ));
    finish(6, "no new complex points", start, 120.0, ok, notes.join("; "))
}

fn random_ball_point(rng: &mut ChaCha8Rng, radius: f64) -> Point {
    loop {
        let x: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-radius..radius));
        if x.iter().map(|v| v * v).sum::<f64>() <= radius * radius {
            return [c64(x[0], x[1]), c64(x[2], x[3]), c64(x[4], x[5])];
        }
    }
}

pub fn levi_forms(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let n = cfg.count(1000);
    let mut rng = cfg.rng(7);
    let mut worst_fd: f64 = 0.0;
    for kind in [ModelKind::Elliptic, ModelKind::Hyperbolic] {
        for _ in 0..n {
            let q = random_ball_point(&mut rng, 0.1);
            worst_fd = worst_fd.max((levi_closed_form(kind, &q) - levi_fd(kind, &q, 1e-4)).max_abs());
        }
    }
    let scan = ScanOptions { seed: cfg.seed, ..ScanOptions::default() };
    let scan = match cfg.cases {
        Some(c) if c < 7usize.pow(6) => ScanOptions { gridsize: ((c as f64).powf(1.0 / 6.0).floor() as usize).max(2), ..scan },
        _ => scan,
    };
    let ell = positivity_scan(ModelKind::Elliptic, &scan);
    let hyp = positivity_scan(ModelKind::Hyperbolic, &scan);
    let mut worst_minor: f64 = 0.0;
    for _ in 0..cfg.count(10_000) {
        let z2 = C64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..TAU));
        let u = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        worst_minor = worst_minor.max(minor_identity_residual(z2, u));
    }
    let (ok_scans, scan_note) = match (ell, hyp) {
        (Ok(e), Ok(h)) => (
            e.violation_count == 0 && h.violation_count == 0 && h.min_trace > 0.0,
            format!(
                "elliptic scan {} points, {} violations, min eigenvalue {:.2e}; hyperbolic scan {} points, {} violations, \
                 second eigenvalue >= {:.2e}, min trace {:.3}",
                e.points, e.violation_count, e.min_margin, h.points, h.violation_count, h.min_margin, h.min_trace
            ),
        ),
        (e, h) => (false, format!("scan error: {:?} {:?}", e.err(), h.err())),
    };
    let ok = worst_fd < 1e-6 && ok_scans && worst_minor < 1e-10;
    finish(
        7,
        "Levi forms",
        start,
        60.0,
        ok,
        format!("closed form vs FD max {worst_fd:.1e} on {n} points per model; {scan_note}; minor identity residual {worst_minor:.1e}"),
    )
}

pub fn growth(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let gridsize = match cfg.cases {
        Some(c) if c < 7usize.pow(6) => ((c as f64).powf(1.0 / 6.0).floor() as usize).max(2),
        _ => 7,
    };
    let mut ok = true;
    let mut notes = Vec::new();
    for kind in [ModelKind::Elliptic, ModelKind::Hyperbolic] {
        match growth_bounds(kind, 0.05, gridsize) {
            Ok(g) => {
                ok &= g.c_est > 0.0 && g.cap_est.is_finite() && g.cap_est < 1e3;
                notes.push(format!(
                    "{}: c {:.4}, C {:.4} over {} points ({} failures)",
                    kind.as_str(),
                    g.c_est,
                    g.cap_est,
                    g.points,
                    g.failures
                ));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("{}: {e}", kind.as_str()));
            }
        }
    }
    finish(8, "growth bounds", start, 60.0, ok, notes.join("; "))
}

pub fn run_all(cfg: &Config) -> Vec<Outcome> {
    vec![
        sign_oracle(cfg),
        det_formulas(cfg),
        group_invariance(cfg),
        normal_form_soundness(cfg),
        homotopy_certification(cfg),
        radial_construction(cfg),
        levi_forms(cfg),
        growth(cfg),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leibniz_matches_cofactor() {
        for seed in 0..20 {
            let p = random_pair(seed, 1.0);
            let l = leibniz_det4(&block_entries(&p.a, &p.b));
            assert!((l - block_det(&p.a, &p.b)).norm() < 1e-12);
        }
        let id: [[C64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| c64(if i == j { 1.0 } else { 0.0 }, 0.0)));
        assert_eq!(leibniz_det4(&id), c64(1.0, 0.0));
    }

    #[test]
    fn polynomials_at_special_points() {
        // b = 0: only the (1 − a²)(1 − d²) term survives.
        assert!((det_polynomial_type_i(0.3, 0.5, 2.0, c64(0.0, 0.0)) - 0.75 * -3.0).abs() < 1e-15);
        // a = b = 0: τ² remains.
        assert!((det_polynomial_type_iii(0.5, c64(0.0, 0.0), c64(0.0, 0.0)) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn small_run_passes() {
        let cfg = Config { seed: 3, cases: Some(20) };
        for o in [sign_oracle(&cfg), det_formulas(&cfg), group_invariance(&cfg), normal_form_soundness(&cfg)] {
            assert!(o.pass, "{o}");
        }
    }
}
