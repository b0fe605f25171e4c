//! Fixed-size complex linear algebra for 2×2, 3×3 and 4×4 matrices.
//!
//! Everything here is a pure function of its inputs. Fractional powers use the
//! principal branch (cut along the negative real axis), which is what
//! `num_complex` implements for `sqrt`, `ln` and `powf`.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Shorthand constructor.
pub const fn c64(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

pub const ZERO: C64 = c64(0.0, 0.0);
pub const ONE: C64 = c64(1.0, 0.0);
pub const I: C64 = c64(0.0, 1.0);

/// Dense row-major complex matrix of fixed size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat<const N: usize>(pub [[C64; N]; N]);

pub type Mat2 = Mat<2>;
pub type Mat3 = Mat<3>;
pub type Mat4 = Mat<4>;

impl<const N: usize> Mat<N> {
    pub fn zeros() -> Self {
        Mat([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        Self::from_fn(|i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn diag(d: [C64; N]) -> Self {
        Self::from_fn(|i, j| if i == j { d[i] } else { ZERO })
    }

    pub fn from_real(rows: [[f64; N]; N]) -> Self {
        Self::from_fn(|i, j| c64(rows[i][j], 0.0))
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(cols: [[C64; N]; N]) -> Self {
        Self::from_fn(|i, j| cols[j][i])
    }

    pub fn col(&self, j: usize) -> [C64; N] {
        let mut v = [ZERO; N];
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = self.0[i][j];
        }
        v
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(|i, j| self.0[i][j].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * s)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// ‖M − M*‖ (Frobenius).
    pub fn hermitian_defect(&self) -> f64 {
        (*self - self.adjoint()).norm()
    }

    /// ‖M − Mᵀ‖ (Frobenius).
    pub fn symmetric_defect(&self) -> f64 {
        (*self - self.transpose()).norm()
    }

    pub fn symmetrized(&self) -> Self {
        (*self + self.transpose()).scale_re(0.5)
    }

    pub fn hermitized(&self) -> Self {
        (*self + self.adjoint()).scale_re(0.5)
    }

    pub fn mul_vec(&self, v: &[C64; N]) -> [C64; N] {
        let mut out = [ZERO; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..N).map(|j| self.0[i][j] * v[j]).sum();
        }
        out
    }

    /// The quadratic form xᵀ M y (no conjugation).
    pub fn bilinear(&self, x: &[C64; N], y: &[C64; N]) -> C64 {
        let my = self.mul_vec(y);
        (0..N).map(|i| x[i] * my[i]).sum()
    }
}

impl<const N: usize> Index<(usize, usize)> for Mat<N> {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for Mat<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl<const N: usize> Add for Mat<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] + rhs.0[i][j])
    }
}

impl<const N: usize> Sub for Mat<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] - rhs.0[i][j])
    }
}

impl<const N: usize> Neg for Mat<N> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_fn(|i, j| -self.0[i][j])
    }
}

impl<const N: usize> Mul for Mat<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| (0..N).map(|k| self.0[i][k] * rhs.0[k][j]).sum())
    }
}

impl Mat2 {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat([[a, b], [c, d]])
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Mat([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }

    /// Relative invertibility test |det| > tol·‖M‖².
    pub fn is_invertible(&self, tol: f64) -> bool {
        let n = self.norm();
        n > 0.0 && self.det().norm() > tol * n * n
    }
}

impl Mat3 {
    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    fn minor_of(m: &Mat4, row: usize, col: usize) -> Mat3 {
        let mut out = Mat3::zeros();
        let mut oi = 0;
        for i in 0..4 {
            if i == row {
                continue;
            }
            let mut oj = 0;
            for j in 0..4 {
                if j == col {
                    continue;
                }
                out.0[oi][oj] = m.0[i][j];
                oj += 1;
            }
            oi += 1;
        }
        out
    }
}

impl Mat4 {
    /// `[[tl, tr], [bl, br]]` assembled from 2×2 blocks.
    pub fn from_blocks(tl: &Mat2, tr: &Mat2, bl: &Mat2, br: &Mat2) -> Self {
        Self::from_fn(|i, j| match (i < 2, j < 2) {
            (true, true) => tl.0[i][j],
            (true, false) => tr.0[i][j - 2],
            (false, true) => bl.0[i - 2][j],
            (false, false) => br.0[i - 2][j - 2],
        })
    }

    /// Cofactor expansion along the first row.
    pub fn det(&self) -> C64 {
        let mut acc = ZERO;
        for j in 0..4 {
            let entry = self.0[0][j];
            if entry == ZERO {
                continue;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += entry * Mat3::minor_of(self, 0, j).det() * sign;
        }
        acc
    }
}

/// Both roots of λ² + c1·λ + c0, computed with the cancellation-free
/// `q = −(c1 ± √disc)/2`, `λ = (q, c0/q)` pairing.
pub fn quadratic_roots(c1: C64, c0: C64) -> (C64, C64) {
    let disc = c1 * c1 - 4.0 * c0;
    let sq = disc.sqrt();
    let q = if (c1.conj() * sq).re >= 0.0 {
        -(c1 + sq) * 0.5
    } else {
        -(c1 - sq) * 0.5
    };
    if q == ZERO {
        return (ZERO, ZERO);
    }
    (q, c0 / q)
}

/// Principal fourth root, `exp(Log(z)/4)`.
pub fn fourth_root(z: C64) -> C64 {
    z.sqrt().sqrt()
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}

/// Cyclic Jacobi eigen-solver for a real symmetric matrix.
///
/// Returns unsorted eigenvalues and the orthogonal matrix whose columns are the
/// matching eigenvectors.
pub fn jacobi_symmetric<const N: usize>(m: [[f64; N]; N]) -> ([f64; N], [[f64; N]; N]) {
    let mut a = m;
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let total: f64 = a.iter().flat_map(|r| r.iter()).map(|x| x * x).sum();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..N {
            for q in (p + 1)..N {
                off += a[p][q] * a[p][q];
            }
        }
        if off <= 1e-34 * total || off == 0.0 {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut vals = [0.0; N];
    for (i, val) in vals.iter_mut().enumerate() {
        *val = a[i][i];
    }
    (vals, v)
}

/// Takagi factorization B = U·diag(s)·Uᵀ of a complex symmetric 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Takagi {
    pub u: Mat2,
    /// Singular values, `s[0] >= s[1] >= 0`.
    pub s: [f64; 2],
}

/// Takagi factorization of a symmetric 2×2 matrix.
///
/// The leading Takagi vector is the top eigenvector of the real symmetric
/// embedding `[[Re B, Im B], [Im B, −Re B]]`; the second column is the
/// orthogonal complement with its phase fixed so that the second singular
/// value comes out real and nonnegative. This handles `s[0] == s[1]` without
/// special cases.
pub fn takagi2(b: &Mat2) -> Result<Takagi> {
    if !b.is_finite() {
        return Err(Error::NonFinite("B"));
    }
    let defect = b.symmetric_defect();
    if defect > 1e-12 * (1.0 + b.norm()) {
        return Err(Error::NotSymmetric(defect));
    }
    if b.norm() == 0.0 {
        return Ok(Takagi {
            u: Mat2::identity(),
            s: [0.0, 0.0],
        });
    }
    let bs = b.symmetrized();
    let x = |i: usize, j: usize| bs.0[i][j].re;
    let y = |i: usize, j: usize| bs.0[i][j].im;
    let emb = [
        [x(0, 0), x(0, 1), y(0, 0), y(0, 1)],
        [x(1, 0), x(1, 1), y(1, 0), y(1, 1)],
        [y(0, 0), y(0, 1), -x(0, 0), -x(0, 1)],
        [y(1, 0), y(1, 1), -x(1, 0), -x(1, 1)],
    ];
    let (vals, vecs) = jacobi_symmetric(emb);
    let top = (0..4)
        .max_by(|&i, &j| vals[i].total_cmp(&vals[j]).then(j.cmp(&i)))
        .unwrap_or(0);
    let mut u1 = [c64(vecs[0][top], vecs[2][top]), c64(vecs[1][top], vecs[3][top])];
    let n1 = (u1[0].norm_sqr() + u1[1].norm_sqr()).sqrt();
    u1 = [u1[0] / n1, u1[1] / n1];
    // Lexicographic sign convention: first non-negligible component has Re >= 0.
    let lead = if u1[0].norm() > 1e-12 { u1[0] } else { u1[1] };
    if lead.re < 0.0 || (lead.re == 0.0 && lead.im < 0.0) {
        u1 = [-u1[0], -u1[1]];
    }
    let takagi_value = |u: &[C64; 2]| {
        let ub = [u[0].conj(), u[1].conj()];
        let bu = bs.mul_vec(&ub);
        ub[0] * bu[0] + ub[1] * bu[1]
    };
    let s1 = takagi_value(&u1).re.max(0.0);
    let mut u2 = [-u1[1].conj(), u1[0].conj()];
    let c2 = takagi_value(&u2);
    let phase = C64::from_polar(1.0, 0.5 * c2.arg());
    u2 = [u2[0] * phase, u2[1] * phase];
    let s2 = c2.norm();
    Ok(Takagi {
        u: Mat2::from_cols([u1, u2]),
        s: [s1.max(s2), s2.min(s1)],
    })
}

/// Polar factors P = U·H.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Polar {
    pub u: Mat2,
    pub h: Mat2,
}

/// Polar decomposition of an invertible 2×2 matrix.
///
/// `H = sqrt(P*P)` uses the closed form `(M + √det M·I)/√(tr M + 2√det M)`.
pub fn polar2(p: &Mat2) -> Result<Polar> {
    if !p.is_finite() {
        return Err(Error::NonFinite("P"));
    }
    if !p.is_invertible(1e-12) {
        return Err(Error::Singular("P"));
    }
    let m = p.adjoint() * *p;
    let delta = p.det().norm();
    let tau = (m.trace().re + 2.0 * delta).sqrt();
    let h = (m + Mat2::identity().scale_re(delta)).scale_re(1.0 / tau).hermitized();
    let hinv = h.inverse().ok_or(Error::Singular("P"))?;
    Ok(Polar { u: *p * hinv, h })
}

/// Eigen-decomposition of a 2×2 unitary matrix: `U = V·diag(e^{iφ})·V*`.
///
/// Phases are principal, in (−π, π].
pub fn unitary_eig2(u: &Mat2) -> ([f64; 2], Mat2) {
    let (l1, l2) = quadratic_roots(-u.trace(), u.det());
    let shifted = *u - Mat2::identity().scale(l1);
    let r0 = [shifted.0[0][0], shifted.0[0][1]];
    let r1 = [shifted.0[1][0], shifted.0[1][1]];
    let n0 = r0[0].norm_sqr() + r0[1].norm_sqr();
    let n1 = r1[0].norm_sqr() + r1[1].norm_sqr();
    let r = if n0 >= n1 { r0 } else { r1 };
    if n0.max(n1) < 1e-28 || (l1 - l2).norm() < 1e-14 && shifted.norm() < 1e-12 {
        let v = Mat2::identity();
        return ([u.0[0][0].arg(), u.0[1][1].arg()], v);
    }
    let mut v1 = [r[1], -r[0]];
    let n = (v1[0].norm_sqr() + v1[1].norm_sqr()).sqrt();
    v1 = [v1[0] / n, v1[1] / n];
    let v2 = [-v1[1].conj(), v1[0].conj()];
    let v = Mat2::from_cols([v1, v2]);
    let d = v.adjoint() * *u * v;
    ([d.0[0][0].arg(), d.0[1][1].arg()], v)
}

/// Spectrum and eigenvectors of a Hermitian 3×3 matrix, eigenvalues descending.
///
/// Works on the real symmetric 6×6 embedding `[[X, −Y], [Y, X]]` of
/// `M = X + iY`, whose spectrum is that of `M` with every eigenvalue doubled.
pub fn herm_eigh3(m: &Mat3) -> Result<([f64; 3], [[C64; 3]; 3])> {
    if !m.is_finite() {
        return Err(Error::NonFinite("Hermitian matrix"));
    }
    let defect = m.hermitian_defect();
    if defect > 1e-10 * m.norm().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let h = m.hermitized();
    let mut emb = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            let (x, y) = (h.0[i][j].re, h.0[i][j].im);
            emb[i][j] = x;
            emb[i][j + 3] = -y;
            emb[i + 3][j] = y;
            emb[i + 3][j + 3] = x;
        }
    }
    let (vals, vecs) = jacobi_symmetric(emb);
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));

    // Each complex eigenvector v shows up twice (as v and iv); keep one
    // representative per complex direction via complex Gram-Schmidt.
    let mut chosen_vals = [0.0; 3];
    let mut chosen: Vec<[C64; 3]> = Vec::with_capacity(3);
    for &k in &order {
        if chosen.len() == 3 {
            break;
        }
        let mut v = [
            c64(vecs[0][k], vecs[3][k]),
            c64(vecs[1][k], vecs[4][k]),
            c64(vecs[2][k], vecs[5][k]),
        ];
        for w in &chosen {
            let proj: C64 = (0..3).map(|i| w[i].conj() * v[i]).sum();
            for i in 0..3 {
                v[i] -= proj * w[i];
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 0.5 {
            chosen_vals[chosen.len()] = vals[k];
            chosen.push([v[0] / n, v[1] / n, v[2] / n]);
        }
    }
    // Degenerate fallthrough cannot happen for a 6-dim orthonormal basis, but
    // keep the output well-formed regardless.
    while chosen.len() < 3 {
        let i = chosen.len();
        chosen_vals[i] = vals[order[2 * i]];
        let mut e = [ZERO; 3];
        e[i] = ONE;
        chosen.push(e);
    }
    Ok((chosen_vals, [chosen[0], chosen[1], chosen[2]]))
}

/// Real spectrum of a Hermitian 3×3 matrix, descending.
pub fn herm_eigs3(m: &Mat3) -> Result<[f64; 3]> {
    herm_eigh3(m).map(|(vals, _)| vals)
}

/// Serde helpers: a complex number is `[re, im]`.
pub mod complex_serde {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        if !(re.is_finite() && im.is_finite()) {
            return Err(serde::de::Error::custom("non-finite complex number"));
        }
        Ok(c64(re, im))
    }
}

/// Serde helpers for `[C64; N]` vectors.
pub mod cvec_serde {
    use super::*;

    pub fn serialize<S: Serializer, const N: usize>(
        v: &[C64; N],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let raw: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(
        d: D,
    ) -> std::result::Result<[C64; N], D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        if raw.len() != N {
            return Err(serde::de::Error::custom(format!(
                "expected {N} complex entries, got {}",
                raw.len()
            )));
        }
        let mut out = [ZERO; N];
        for (o, [re, im]) in out.iter_mut().zip(raw) {
            if !(re.is_finite() && im.is_finite()) {
                return Err(serde::de::Error::custom("non-finite complex number"));
            }
            *o = c64(re, im);
        }
        Ok(out)
    }
}

impl<const N: usize> Serialize for Mat<N> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .0
            .iter()
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de, const N: usize> Deserialize<'de> for Mat<N> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        if rows.len() != N || rows.iter().any(|r| r.len() != N) {
            return Err(D::Error::custom(format!("expected a {N}x{N} matrix")));
        }
        let mut m = Mat::<N>::zeros();
        for (i, row) in rows.iter().enumerate() {
            for (j, [re, im]) in row.iter().enumerate() {
                if !(re.is_finite() && im.is_finite()) {
                    return Err(D::Error::custom("non-finite matrix entry"));
                }
                m.0[i][j] = c64(*re, *im);
            }
        }
        Ok(m)
    }
}
