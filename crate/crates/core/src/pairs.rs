//! Quadratic models `w = z̄ᵀAz + Re(zᵀBz)`, the h-congruence group acting on
//! them, and the elliptic/hyperbolic sign of the 4×4 block determinant.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{c64, complex_serde, Mat2, Mat4, C64, ONE};

/// Default relative tolerance for [`sign_class`]. Kept near roundoff: an
/// ill-conditioned congruence can shrink the normalized determinant by ~1e-8
/// without the pair being anywhere near degenerate.
pub const SIGN_TOL: f64 = 1e-12;

/// The coefficient pair (A, B) of a quadratic complex point; B is symmetric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPair")]
pub struct MatrixPair {
    #[serde(rename = "A")]
    pub a: Mat2,
    #[serde(rename = "B")]
    pub b: Mat2,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    #[serde(rename = "A")]
    a: Mat2,
    #[serde(rename = "B")]
    b: Mat2,
}

impl TryFrom<RawPair> for MatrixPair {
    type Error = Error;
    fn try_from(raw: RawPair) -> Result<Self> {
        MatrixPair::new(raw.a, raw.b)
    }
}

impl MatrixPair {
    /// Validates finiteness and symmetry of B (‖B − Bᵀ‖ < 1e-12·(1+‖B‖)).
    /// B is re-symmetrized so later arithmetic sees an exactly symmetric matrix.
    pub fn new(a: Mat2, b: Mat2) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::NonFinite("A"));
        }
        if !b.is_finite() {
            return Err(Error::NonFinite("B"));
        }
        let defect = b.symmetric_defect();
        if defect >= 1e-12 * (1.0 + b.norm()) {
            return Err(Error::NotSymmetric(defect));
        }
        Ok(MatrixPair { a, b: b.symmetrized() })
    }

    /// Builds a pair without validation; for closed-form constructions that
    /// are symmetric by design.
    pub(crate) fn raw(a: Mat2, b: Mat2) -> Self {
        MatrixPair { a, b }
    }

    pub fn scale(&self) -> f64 {
        self.a.norm().max(self.b.norm())
    }

    pub fn normalized(&self) -> MatrixPair {
        let s = self.scale().max(1e-300);
        MatrixPair {
            a: self.a.scale_re(1.0 / s),
            b: self.b.scale_re(1.0 / s),
        }
    }

    pub fn scaled(&self, lambda: f64) -> MatrixPair {
        MatrixPair {
            a: self.a.scale_re(lambda),
            b: self.b.scale_re(lambda),
        }
    }

    /// max(‖ΔA‖, ‖ΔB‖).
    pub fn distance(&self, other: &MatrixPair) -> f64 {
        (self.a - other.a).norm().max((self.b - other.b).norm())
    }

    /// The real quadratic form z̄ᵀAz + Re(zᵀBz).
    pub fn quadratic_form(&self, z: &[C64; 2]) -> f64 {
        let zb = [z[0].conj(), z[1].conj()];
        let herm = self.a.bilinear(&zb, z);
        herm.re + self.b.bilinear(z, z).re
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }
}

/// `[[A, B̄], [B, Ā]]`.
pub fn block_matrix(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_blocks(a, &b.conj(), b, &a.conj())
}

/// Complex value of the block determinant, without symmetry assumptions on B.
pub fn block_det(a: &Mat2, b: &Mat2) -> C64 {
    block_matrix(a, b).det()
}

/// Real block determinant `det [[A, B̄], [B, Ā]]`.
///
/// Swapping the two block rows and columns conjugates the matrix, so the value
/// is real; the roundoff-sized imaginary part is dropped.
pub fn det4(p: &MatrixPair) -> f64 {
    let d = block_det(&p.a, &p.b);
    debug_assert!(
        d.im.abs() <= 1e-10 * (1.0 + p.a.norm() + p.b.norm()).powi(4),
        "block determinant has imaginary part {}",
        d.im
    );
    d.re
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Elliptic,
    Hyperbolic,
    Degenerate,
}

impl Sign {
    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Elliptic => "elliptic",
            Sign::Hyperbolic => "hyperbolic",
            Sign::Degenerate => "degenerate",
        }
    }

    /// +1, −1 or 0.
    pub fn signum(self) -> i32 {
        match self {
            Sign::Elliptic => 1,
            Sign::Hyperbolic => -1,
            Sign::Degenerate => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignClass {
    pub tag: Sign,
    /// Block determinant of the pair as given.
    pub det4: f64,
    /// Block determinant after dividing A and B by max(‖A‖, ‖B‖).
    pub det4_normalized: f64,
}

/// Classifies the sign of the block determinant.
///
/// The decision is made on the normalized pair: elliptic if its determinant
/// exceeds `tol·(1+‖Â‖+‖B̂‖)⁴`, hyperbolic if below the negative of that.
pub fn sign_class(p: &MatrixPair, tol: f64) -> SignClass {
    let n = p.normalized();
    let dn = det4(&n);
    let scale = (1.0 + n.a.norm() + n.b.norm()).powi(4);
    let tag = if dn > tol * scale {
        Sign::Elliptic
    } else if dn < -tol * scale {
        Sign::Hyperbolic
    } else {
        Sign::Degenerate
    };
    SignClass {
        tag,
        det4: det4(p),
        det4_normalized: dn,
    }
}

/// Algebraic count `#elliptic − #hyperbolic`.
pub fn lai_index(classes: &[SignClass]) -> Result<i64> {
    classes.iter().try_fold(0i64, |acc, c| match c.tag {
        Sign::Elliptic => Ok(acc + 1),
        Sign::Hyperbolic => Ok(acc - 1),
        Sign::Degenerate => Err(Error::DegenerateEntry),
    })
}

/// An element (ζ, P) of S¹ × GL(2,ℂ)/±1.
///
/// Acts by `(A, B) ↦ (ζ P*AP, ζ̄ PᵀBP)`. Composition is arranged so that this
/// is a left action: `act(g2, act(g1, p)) == act(g2.compose(&g1), p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGroupElement")]
pub struct GroupElement {
    #[serde(with = "complex_serde")]
    pub zeta: C64,
    #[serde(rename = "P")]
    pub p: Mat2,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroupElement {
    #[serde(with = "complex_serde")]
    zeta: C64,
    #[serde(rename = "P")]
    p: Mat2,
}

impl TryFrom<RawGroupElement> for GroupElement {
    type Error = Error;
    fn try_from(raw: RawGroupElement) -> Result<Self> {
        GroupElement::new(raw.zeta, raw.p)
    }
}

impl GroupElement {
    pub fn new(zeta: C64, p: Mat2) -> Result<Self> {
        if !(zeta.is_finite() && p.is_finite()) {
            return Err(Error::NonFinite("group element"));
        }
        if (zeta.norm() - 1.0).abs() >= 1e-12 {
            return Err(Error::ZetaNotUnit(zeta.norm()));
        }
        if p.det().norm() == 0.0 {
            return Err(Error::Singular("P"));
        }
        Ok(GroupElement { zeta, p })
    }

    pub fn identity() -> Self {
        GroupElement {
            zeta: ONE,
            p: Mat2::identity(),
        }
    }

    /// (1, P) without validation; P must be invertible.
    pub(crate) fn congruence(p: Mat2) -> Self {
        GroupElement { zeta: ONE, p }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &GroupElement) -> GroupElement {
        GroupElement {
            zeta: self.zeta * first.zeta,
            p: first.p * self.p,
        }
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        let pinv = self.p.inverse().ok_or(Error::Singular("P"))?;
        Ok(GroupElement {
            zeta: self.zeta.conj(),
            p: pinv,
        })
    }

    /// Equality in the quotient by P ∼ −P, relative to ‖P‖.
    pub fn approx_eq(&self, other: &GroupElement, tol: f64) -> bool {
        let scale = 1.0 + self.p.norm();
        (self.zeta - other.zeta).norm() <= tol
            && ((self.p - other.p).norm() <= tol * scale || (self.p + other.p).norm() <= tol * scale)
    }
}

/// Applies `(ζ, P)` to a pair.
pub fn act(g: &GroupElement, pair: &MatrixPair) -> Result<MatrixPair> {
    if g.p.det().norm() == 0.0 {
        return Err(Error::Singular("P"));
    }
    Ok(act_unchecked(g, pair))
}

pub(crate) fn act_unchecked(g: &GroupElement, pair: &MatrixPair) -> MatrixPair {
    let a = (g.p.adjoint() * pair.a * g.p).scale(g.zeta);
    let b = (g.p.transpose() * pair.b * g.p).scale(g.zeta.conj());
    MatrixPair { a, b: b.symmetrized() }
}

fn uniform_c(rng: &mut ChaCha8Rng, scale: f64) -> C64 {
    c64(rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale))
}

/// Seeded random pair with real and imaginary parts uniform in [−scale, scale];
/// B is symmetrized.
pub fn random_pair(seed: u64, scale: f64) -> MatrixPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Mat2::zeros();
    let mut b = Mat2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            a.0[i][j] = uniform_c(&mut rng, scale);
        }
    }
    for i in 0..2 {
        for j in 0..2 {
            b.0[i][j] = uniform_c(&mut rng, scale);
        }
    }
    MatrixPair {
        a,
        b: b.symmetrized(),
    }
}

/// Seeded random group element; P has entries uniform in the unit square and
/// is resampled until |det P| ≥ 0.1.
pub fn random_group_element(seed: u64) -> GroupElement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let zeta = C64::from_polar(1.0, rng.gen_range(0.0..TAU));
    loop {
        let p = Mat2::new(
            uniform_c(&mut rng, 1.0),
            uniform_c(&mut rng, 1.0),
            uniform_c(&mut rng, 1.0),
            uniform_c(&mut rng, 1.0),
        );
        if p.det().norm() >= 0.1 {
            return GroupElement { zeta, p };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::I;

    fn hyp1() -> MatrixPair {
        MatrixPair::new(
            Mat2::from_real([[1.0, 0.0], [0.0, 0.0]]),
            Mat2::from_real([[0.0, 0.0], [0.0, 1.0]]),
        )
        .unwrap()
    }

    #[test]
    fn det4_examples() {
        let p = MatrixPair::new(Mat2::identity(), Mat2::zeros()).unwrap();
        assert!((det4(&p) - 1.0).abs() < 1e-15);
        assert!((det4(&hyp1()) + 1.0).abs() < 1e-15);
        let tau = 0.5;
        let p = MatrixPair::new(Mat2::from_real([[0.0, 1.0], [tau, 0.0]]), Mat2::zeros()).unwrap();
        assert!((det4(&p) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sign_class_examples() {
        let eli2 = MatrixPair::new(Mat2::zeros(), Mat2::identity()).unwrap();
        assert_eq!(sign_class(&eli2, SIGN_TOL).tag, Sign::Elliptic);
        assert_eq!(sign_class(&hyp1(), SIGN_TOL).tag, Sign::Hyperbolic);
        let p = MatrixPair::new(Mat2::diag([ONE, I]), Mat2::zeros()).unwrap();
        let s = sign_class(&p, SIGN_TOL);
        assert_eq!(s.tag, Sign::Elliptic);
        assert!((s.det4 - 1.0).abs() < 1e-15);
        let zero = MatrixPair::new(Mat2::zeros(), Mat2::zeros()).unwrap();
        assert_eq!(sign_class(&zero, SIGN_TOL).tag, Sign::Degenerate);
    }

    #[test]
    fn swap_interchanges_diagonal() {
        let theta = 0.8;
        let e = C64::from_polar(1.0, theta);
        let p = MatrixPair::new(
            Mat2::diag([ONE, e]),
            Mat2::diag([c64(0.3, 0.0), c64(0.7, 0.0)]),
        )
        .unwrap();
        let swap = GroupElement::new(ONE, Mat2::from_real([[0.0, 1.0], [1.0, 0.0]])).unwrap();
        let q = act(&swap, &p).unwrap();
        assert_eq!(q.a, Mat2::diag([e, ONE]));
        assert_eq!(q.b, Mat2::diag([c64(0.7, 0.0), c64(0.3, 0.0)]));
    }

    #[test]
    fn identity_acts_trivially() {
        let p = random_pair(3, 1.0);
        assert_eq!(act(&GroupElement::identity(), &p).unwrap(), p);
    }

    #[test]
    fn composition_is_left_action() {
        let p = random_pair(11, 1.0);
        let g1 = random_group_element(1);
        let g2 = random_group_element(2);
        let lhs = act(&g2, &act(&g1, &p).unwrap()).unwrap();
        let rhs = act(&g2.compose(&g1), &p).unwrap();
        assert!(lhs.distance(&rhs) < 1e-12 * (1.0 + lhs.scale()));
        // The other order is a different element in general.
        let wrong = act(&g1.compose(&g2), &p).unwrap();
        assert!(lhs.distance(&wrong) > 1e-6);
    }

    #[test]
    fn inverse_undoes_action() {
        let p = random_pair(5, 2.0);
        let g = random_group_element(5);
        let back = act(&g.inverse().unwrap(), &act(&g, &p).unwrap()).unwrap();
        assert!(back.distance(&p) < 1e-12 * (1.0 + p.scale()) * 100.0);
    }

    #[test]
    fn plus_minus_p_equal() {
        let g = random_group_element(9);
        let neg = GroupElement { zeta: g.zeta, p: -g.p };
        assert!(g.approx_eq(&neg, 1e-15));
        let p = random_pair(9, 1.0);
        assert!(act(&g, &p).unwrap().distance(&act(&neg, &p).unwrap()) < 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        let b = Mat2::from_real([[0.0, 1.0], [0.0, 0.0]]);
        assert!(matches!(MatrixPair::new(Mat2::identity(), b), Err(Error::NotSymmetric(_))));
        let mut a = Mat2::identity();
        a.0[0][0] = c64(f64::NAN, 0.0);
        assert!(matches!(MatrixPair::new(a, Mat2::zeros()), Err(Error::NonFinite(_))));
        assert!(matches!(
            GroupElement::new(c64(2.0, 0.0), Mat2::identity()),
            Err(Error::ZetaNotUnit(_))
        ));
        assert!(matches!(GroupElement::new(ONE, Mat2::zeros()), Err(Error::Singular(_))));
    }

    #[test]
    fn lai_index_examples() {
        let e = SignClass { tag: Sign::Elliptic, det4: 1.0, det4_normalized: 1.0 };
        let h = SignClass { tag: Sign::Hyperbolic, det4: -1.0, det4_normalized: -1.0 };
        let d = SignClass { tag: Sign::Degenerate, det4: 0.0, det4_normalized: 0.0 };
        assert_eq!(lai_index(&[e, e, h]).unwrap(), 1);
        assert_eq!(lai_index(&[]).unwrap(), 0);
        assert_eq!(lai_index(&[h, h]).unwrap(), -2);
        assert_eq!(lai_index(&[e, d]), Err(Error::DegenerateEntry));
    }

    #[test]
    fn random_is_deterministic() {
        assert_eq!(random_pair(42, 1.0), random_pair(42, 1.0));
        assert_eq!(random_group_element(42), random_group_element(42));
        assert_ne!(random_pair(42, 1.0), random_pair(43, 1.0));
    }

    #[test]
    fn pair_json_round_trip() {
        let p = MatrixPair::new(Mat2::diag([ONE, I]), Mat2::from_real([[0.0, 2.0], [2.0, 0.0]])).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.starts_with("{\"A\":"));
        let back: MatrixPair = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"A":[[[1,0],[0,0]],[[0,0],[1,0]]],"B":[[[0,0],[1,0]],[[0,0],[0,0]]]}"#;
        let err = serde_json::from_str::<MatrixPair>(bad).unwrap_err().to_string();
        assert!(err.contains("not symmetric"), "{err}");
    }
}
