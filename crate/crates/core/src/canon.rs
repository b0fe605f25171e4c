//! Normal forms of pairs under h-congruence, driven by the *-cosquare
//! `A^{-*}A` of the Hermitian-part matrix A.
//!
//! Off a real hypersurface in the space of A (where the cosquare has a
//! repeated unit eigenvalue), A is *-congruent up to a unit scalar to either
//! `diag(1, e^{iθ})`, 0 < θ < π, or `[[0, 1], [μ, 0]]`, 0 < μ < 1. The
//! remaining freedom is then spent on putting the diagonal of B in a standard
//! shape.

use serde::{Deserialize, Serialize};

use crate::error::{Error, NonGenericReason, Result};
use crate::kernel::{c64, fourth_root, quadratic_roots, wrap_angle, Mat2, C64, ONE, ZERO};
use crate::pairs::{act_unchecked, GroupElement, MatrixPair};

/// Default classification tolerance (applied to scale-free quantities).
pub const DEFAULT_TOL: f64 = 1e-7;

/// Jordan type of the cosquare.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CosquareClass {
    /// Two distinct unit eigenvalues; A ∼ diag(1, e^{iθ}).
    TypeI { theta: f64 },
    /// A single unit eigenvalue with a 2×2 Jordan block.
    TypeII,
    /// Eigenvalues off the unit circle; A ∼ [[0, 1], [μ, 0]].
    TypeIII { mu: f64 },
    /// Scalar cosquare with A ∼ I.
    BoundaryThetaZero,
    /// Scalar cosquare with A ∼ diag(1, −1).
    BoundaryThetaPi,
    /// Within tolerance of the boundary but not resolvable as either case.
    NearBoundary { defect: f64 },
}

impl CosquareClass {
    pub fn is_generic(&self) -> bool {
        matches!(self, CosquareClass::TypeI { .. } | CosquareClass::TypeIII { .. })
    }

    fn non_generic_reason(&self) -> Option<NonGenericReason> {
        match self {
            CosquareClass::TypeII => Some(NonGenericReason::TypeII),
            CosquareClass::BoundaryThetaZero => Some(NonGenericReason::BoundaryThetaZero),
            CosquareClass::BoundaryThetaPi => Some(NonGenericReason::BoundaryThetaPi),
            CosquareClass::NearBoundary { .. } => Some(NonGenericReason::NearBoundary),
            _ => None,
        }
    }

    /// The canonical A of a generic class.
    pub fn canonical_a(&self) -> Option<Mat2> {
        match *self {
            CosquareClass::TypeI { theta } => Some(Mat2::diag([ONE, C64::from_polar(1.0, theta)])),
            CosquareClass::TypeIII { mu } => Some(Mat2::new(ZERO, ONE, c64(mu, 0.0), ZERO)),
            _ => None,
        }
    }
}

/// Result of [`normal_form`]: `act(witness, p) = (canonical A, B_reduced)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    pub class: CosquareClass,
    #[serde(rename = "B_reduced")]
    pub b_reduced: Mat2,
    pub witness: GroupElement,
}

impl NormalForm {
    pub fn pair(&self) -> MatrixPair {
        let a = self.class.canonical_a().expect("normal forms carry a generic class");
        MatrixPair::raw(a, self.b_reduced)
    }
}

fn check_invertible(a: &Mat2) -> Result<()> {
    if !a.is_finite() {
        return Err(Error::NonFinite("A"));
    }
    if !a.is_invertible(1e-12) {
        return Err(Error::DegenerateA);
    }
    Ok(())
}

/// `A^{-*}A`.
pub fn cosquare(a: &Mat2) -> Result<Mat2> {
    check_invertible(a)?;
    let inv_adj = a.adjoint().inverse().ok_or(Error::DegenerateA)?;
    Ok(inv_adj * *a)
}

/// Numerator `a d̄ + ā d − |c|² − |b|²` and `ad − bc` for A = [[a, b], [c, d]].
fn trace_data(a: &Mat2) -> (f64, C64) {
    let (p, q, r, s) = (a.0[0][0], a.0[0][1], a.0[1][0], a.0[1][1]);
    let num = (p * s.conj() + p.conj() * s).re - r.norm_sqr() - q.norm_sqr();
    (num, a.det())
}

/// Roots of the cosquare characteristic polynomial
/// `λ² − [N / conj(δ)] λ + δ / conj(δ)` with `δ = det A`.
pub fn cosquare_roots(a: &Mat2) -> Result<(C64, C64)> {
    check_invertible(a)?;
    let (num, delta) = trace_data(a);
    let dc = delta.conj();
    Ok(quadratic_roots(-(c64(num, 0.0) / dc), delta / dc))
}

/// Ratio `|a d̄ + ā d − |c|² − |b|²| / |ad − bc|`; the cosquare has its
/// eigenvalues on the unit circle exactly when this is ≤ 2.
pub fn trace_ratio(a: &Mat2) -> Result<f64> {
    check_invertible(a)?;
    let (num, delta) = trace_data(a);
    Ok(num.abs() / delta.norm())
}

/// `| |a d̄ + ā d − |c|² − |b|²| − 2|ad − bc| |`, zero exactly on the
/// non-generic hypersurface.
pub fn genericity_defect(a: &Mat2) -> f64 {
    let (num, delta) = trace_data(a);
    (num.abs() - 2.0 * delta.norm()).abs()
}

/// Unit vector spanning the kernel of the rank-one matrix `m`.
fn kernel_vector(m: &Mat2) -> [C64; 2] {
    let r0 = [m.0[0][0], m.0[0][1]];
    let r1 = [m.0[1][0], m.0[1][1]];
    let n0 = r0[0].norm_sqr() + r0[1].norm_sqr();
    let n1 = r1[0].norm_sqr() + r1[1].norm_sqr();
    let r = if n0 >= n1 { r0 } else { r1 };
    let v = [r[1], -r[0]];
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    if n == 0.0 {
        return [ONE, ZERO];
    }
    // Phase convention: the larger component is real positive.
    let lead = if v[0].norm() >= v[1].norm() { v[0] } else { v[1] };
    let phase = lead.conj() / (lead.norm() * n);
    [v[0] * phase, v[1] * phase]
}

/// `x* A y`.
fn sesq(a: &Mat2, x: &[C64; 2], y: &[C64; 2]) -> C64 {
    let xc = [x[0].conj(), x[1].conj()];
    a.bilinear(&xc, y)
}

fn eigvecs(cs: &Mat2, l1: C64, l2: C64) -> ([C64; 2], [C64; 2]) {
    let id = Mat2::identity();
    (kernel_vector(&(*cs - id.scale(l1))), kernel_vector(&(*cs - id.scale(l2))))
}

/// Unit-circle case: *-congruence to diag(1, e^{iθ}) after a unit scalar.
///
/// For distinct unit eigenvalues the eigenvectors are A-orthogonal, so in that
/// basis A is diag(v₁*Av₁, v₂*Av₂); θ is the phase gap of those two numbers.
/// Note that the cosquare eigenvalues alone only fix 2θ.
fn type_i_witness(a: &Mat2, cs: &Mat2, roots: (C64, C64), tol: f64) -> Result<(f64, GroupElement)> {
    let (v1, v2) = eigvecs(cs, roots.0, roots.1);
    let w1 = sesq(a, &v1, &v1);
    let w2 = sesq(a, &v2, &v2);
    let an = a.norm();
    if w1.norm() < tol * an || w2.norm() < tol * an {
        return Err(Error::NonGeneric(NonGenericReason::IsotropicEigenvector));
    }
    let (g1, g2) = (w1.arg(), w2.arg());
    let gap = wrap_angle(g2 - g1);
    let (first, second, gamma, theta) = if gap >= 0.0 {
        ((v1, w1), (v2, w2), g1, gap)
    } else {
        ((v2, w2), (v1, w1), g2, -gap)
    };
    let s1 = 1.0 / first.1.norm().sqrt();
    let s2 = 1.0 / second.1.norm().sqrt();
    let p = Mat2::from_cols([
        [first.0[0] * s1, first.0[1] * s1],
        [second.0[0] * s2, second.0[1] * s2],
    ]);
    let zeta = C64::from_polar(1.0, -gamma);
    Ok((theta, GroupElement { zeta, p }))
}

/// Off-circle case: the two eigenvectors are A-isotropic and pair with each
/// other; rescaling one of them and a unit scalar give [[0, 1], [μ, 0]].
fn type_iii_witness(a: &Mat2, cs: &Mat2, roots: (C64, C64), tol: f64) -> Result<(f64, GroupElement)> {
    let (small, large) = if roots.0.norm() <= roots.1.norm() {
        (roots.0, roots.1)
    } else {
        (roots.1, roots.0)
    };
    let (v1, v2) = eigvecs(cs, small, large);
    let x = sesq(a, &v1, &v2);
    if x.norm() < tol * a.norm() {
        return Err(Error::NonGeneric(NonGenericReason::IllConditioned));
    }
    let mu = small.norm();
    let phi = small.arg();
    let half = C64::from_polar(1.0, 0.5 * phi);
    let q = half / x;
    let p = Mat2::from_cols([v1, [v2[0] * q, v2[1] * q]]);
    Ok((mu, GroupElement { zeta: half.conj(), p }))
}

/// Scalar-cosquare test and resolution of boundary pairs.
fn boundary_class(a: &Mat2, cs: &Mat2, t: f64, tol: f64) -> CosquareClass {
    let mean = cs.trace() * 0.5;
    let spread = (*cs - Mat2::identity().scale(mean)).norm();
    if spread <= tol.sqrt() * cs.norm().max(1.0) {
        // A ≈ e^{iα} A*, so e^{-iα/2} A is (nearly) Hermitian.
        let rot = C64::from_polar(1.0, -0.5 * mean.arg());
        let h = a.scale(rot).hermitized();
        return if h.det().re > 0.0 {
            CosquareClass::BoundaryThetaZero
        } else {
            CosquareClass::BoundaryThetaPi
        };
    }
    let defect = (t - 2.0).abs();
    if defect <= 1e-12 {
        CosquareClass::TypeII
    } else {
        CosquareClass::NearBoundary { defect }
    }
}

/// Classification of A by its cosquare.
pub fn classify_cosquare(a: &Mat2, tol: f64) -> Result<CosquareClass> {
    classify_with_witness(a, tol).map(|(c, _)| c)
}

fn classify_with_witness(a: &Mat2, tol: f64) -> Result<(CosquareClass, Option<GroupElement>)> {
    let cs = cosquare(a)?;
    let t = trace_ratio(a)?;
    let roots = cosquare_roots(a)?;
    if t < 2.0 - tol {
        let (theta, g) = type_i_witness(a, &cs, roots, tol)?;
        Ok((CosquareClass::TypeI { theta }, Some(g)))
    } else if t > 2.0 + tol {
        let (mu, g) = type_iii_witness(a, &cs, roots, tol)?;
        Ok((CosquareClass::TypeIII { mu }, Some(g)))
    } else {
        Ok((boundary_class(a, &cs, t, tol), None))
    }
}

/// Canonical A and the group element reaching it.
pub fn canonical_a(a: &Mat2, tol: f64) -> Result<(CosquareClass, GroupElement)> {
    let (class, g) = classify_with_witness(a, tol)?;
    match (class.non_generic_reason(), g) {
        (None, Some(g)) => Ok((class, g)),
        (Some(reason), _) => Err(Error::NonGeneric(reason)),
        (None, None) => Err(Error::NonGeneric(NonGenericReason::IllConditioned)),
    }
}

/// Uses the stabilizer of a canonical A to normalize the diagonal of B.
///
/// Type I: `(1, diag(e^{iα}, e^{iβ}))` makes both diagonal entries real and
/// nonnegative. Type III: `(1, diag(c, 1/c̄))` with `c̄⁴ = b₂₂ / conj(b₁₁)`
/// (principal root) makes them complex conjugates of each other.
pub fn reduce_b(p: &MatrixPair, class: &CosquareClass, tol: f64) -> Result<NormalForm> {
    let canon = class
        .canonical_a()
        .ok_or_else(|| Error::NonGeneric(class.non_generic_reason().unwrap_or(NonGenericReason::IllConditioned)))?;
    if (p.a - canon).norm() > 1e-8 * canon.norm() {
        return Err(Error::Input("A is not in canonical form".into()));
    }
    let b = &p.b;
    let (b11, b22) = (b.0[0][0], b.0[1][1]);
    let floor = tol * b.norm();
    if b.norm() == 0.0 || b11.norm() <= floor || b22.norm() <= floor {
        return Err(Error::NonGeneric(NonGenericReason::ZeroBDiagonal));
    }
    let d = match class {
        CosquareClass::TypeI { .. } => Mat2::diag([
            C64::from_polar(1.0, -0.5 * b11.arg()),
            C64::from_polar(1.0, -0.5 * b22.arg()),
        ]),
        CosquareClass::TypeIII { .. } => {
            let cbar = fourth_root(b22 / b11.conj());
            let c = cbar.conj();
            Mat2::diag([c, ONE / cbar])
        }
        _ => unreachable!("canonical_a returned Some"),
    };
    let witness = GroupElement::congruence(d);
    let out = act_unchecked(&witness, p);
    Ok(NormalForm {
        class: *class,
        b_reduced: out.b,
        witness,
    })
}

/// Full reduction: classify, bring A to canonical form, normalize B.
pub fn normal_form(p: &MatrixPair, tol: f64) -> Result<NormalForm> {
    let (class, g1) = canonical_a(&p.a, tol)?;
    let p1 = act_unchecked(&g1, p);
    let canon = class.canonical_a().expect("generic class");
    if (p1.a - canon).norm() > 1e-8 * canon.norm() {
        return Err(Error::NonGeneric(NonGenericReason::IllConditioned));
    }
    let p1 = MatrixPair::raw(canon, p1.b);
    let step = reduce_b(&p1, &class, tol)?;
    let witness = step.witness.compose(&g1);
    let image = act_unchecked(&witness, p);
    if (image.a - canon).norm() > 1e-8 * canon.norm().max(1.0) {
        return Err(Error::NonGeneric(NonGenericReason::IllConditioned));
    }
    Ok(NormalForm {
        class,
        b_reduced: image.b,
        witness,
    })
}
