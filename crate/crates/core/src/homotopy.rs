//! Paths (A(t), B(t)) inside the elliptic or hyperbolic component and
//! sampled certificates that the block determinant never vanishes on them.
//!
//! A path is a list of segments, each with a closed-form evaluation and
//! derivative on [0, 1]. Segments share the global parameter equally. The
//! explicit recipes of the connectivity argument live in [`Recipe`];
//! [`connect_to_model`] chains them after a normal-form reduction.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canon::{normal_form, CosquareClass, NormalForm};
use crate::error::{Error, Result};
use crate::kernel::{c64, complex_serde, polar2, takagi2, unitary_eig2, Mat2, C64, I, ONE, ZERO};
use crate::pairs::{act_unchecked, block_det, sign_class, GroupElement, MatrixPair, Sign, SIGN_TOL};

/// Default bump amplitude.
pub const DEFAULT_ETA: f64 = 0.5;
/// Default certificate samples per segment.
pub const DEFAULT_SAMPLES: usize = 512;
/// Default certificate margin.
pub const DEFAULT_MARGIN: f64 = 1e-6;

/// Smooth bump `η·exp(1 − 1/(1 − (2t−1)²))` supported on (0, 1), with peak η at t = 1/2.
pub fn bump(t: f64, eta: f64) -> f64 {
    let q = 2.0 * t - 1.0;
    let g = 1.0 - q * q;
    if g <= 0.0 {
        return 0.0;
    }
    eta * (1.0 - 1.0 / g).exp()
}

pub fn bump_derivative(t: f64, eta: f64) -> f64 {
    let q = 2.0 * t - 1.0;
    let g = 1.0 - q * q;
    if g <= 0.0 {
        return 0.0;
    }
    bump(t, eta) * (-4.0 * q) / (g * g)
}

fn edge(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

fn edge_derivative(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        edge(x) / (x * x)
    }
}

/// C^∞ step from 0 (x ≤ 0) to 1 (x ≥ 1), all derivatives vanishing at both ends.
pub fn smoothstep(x: f64) -> f64 {
    let (l, r) = (edge(x), edge(1.0 - x));
    if l + r == 0.0 {
        return if x >= 0.5 { 1.0 } else { 0.0 };
    }
    l / (l + r)
}

pub fn smoothstep_derivative(x: f64) -> f64 {
    let (l, r) = (edge(x), edge(1.0 - x));
    let s = l + r;
    if s == 0.0 {
        return 0.0;
    }
    (edge_derivative(x) * r + l * edge_derivative(1.0 - x)) / (s * s)
}

fn diag2(a: C64, d: C64) -> Mat2 {
    Mat2::diag([a, d])
}

fn re(x: f64) -> C64 {
    c64(x, 0.0)
}

fn offdiag(x: C64) -> Mat2 {
    Mat2::new(ZERO, x, x, ZERO)
}

fn a_tau(tau: f64) -> Mat2 {
    Mat2::new(ZERO, ONE, re(tau), ZERO)
}

fn flip() -> Mat2 {
    diag2(ONE, re(-1.0))
}

/// The named closed-form homotopies of the connectivity argument.
///
/// `typeII-offdiag-swap` and `hyp-final-bump` are the literal closed forms,
/// with a non-symmetric B; they exist to check the determinant formulas.
/// Paths built by [`connect_to_model`] use the symmetric variants
/// `typeII-offdiag-half` and `hyp-final-bump-sym`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", deny_unknown_fields)]
pub enum Recipe {
    /// A = diag(1, e^{i(1−t)φ}), B fixed.
    #[serde(rename = "rotate-theta-to-0")]
    RotateThetaToZero { phi: f64, b: Mat2 },
    /// A = diag(1, e^{i((1−t)φ + tπ)}), B fixed.
    #[serde(rename = "rotate-theta-to-pi")]
    RotateThetaToPi { phi: f64, b: Mat2 },
    /// A = I, B = diag((1−t)a, d).
    #[serde(rename = "typeI-neg-diagB-shrink-a")]
    DiagShrinkA { a: f64, d: f64 },
    /// Congruence by diag(1, 1 − t + t/√d) applied to (I, diag(0, d)).
    #[serde(rename = "typeI-neg-rescale")]
    DiagRescale { d: f64 },
    /// A = diag(1, (1−t)/d), B = diag(0, 1).
    #[serde(rename = "typeI-neg-final-A-shrink")]
    FinalAShrink { d: f64 },
    /// A = diag(1, −1), B = [[1,1],[1,1]] + tε[[i,−i],[−i,i]].
    #[serde(rename = "case-e-perturb")]
    CaseEPerturb { eps: f64 },
    /// A = diag(1, −1), B = (1−t)[[0,b],[b,0]].
    #[serde(rename = "case-c-shrink")]
    CaseCShrink { b: f64 },
    /// A = diag(1, −1), B = [[1+(1−t)b, −1], [−1, 1−(1−t)b]].
    #[serde(rename = "case-d-lt1")]
    CaseDLt1 { b: f64 },
    /// The b > 1 branch of case d), ending at (0, diag(1, −1)).
    #[serde(rename = "case-d-gt1")]
    CaseDGt1 { b: f64 },
    /// A = diag(1, −1), B = (1−t)B₀.
    #[serde(rename = "case-a-shrink")]
    CaseAShrink { b: Mat2 },
    /// A = (1−t)A₀, B fixed.
    #[serde(rename = "case-a-gt1")]
    CaseAGt1 { a: Mat2, b: Mat2 },
    /// A = [[0,1],[τ,0]], B = [[a, b], [b, ā]] with the phases of a and b
    /// moving linearly.
    #[serde(rename = "typeII-phase-align")]
    PhaseAlign {
        tau: f64,
        a_abs: f64,
        b_abs: f64,
        alpha0: f64,
        alpha1: f64,
        beta0: f64,
        beta1: f64,
    },
    /// A = [[0,1],[τ,0]], B = [[a, (1−t)b], [(1−t)b, ā]].
    #[serde(rename = "typeII-b-to-0")]
    BToZero {
        tau: f64,
        #[serde(with = "complex_serde")]
        a: C64,
        #[serde(with = "complex_serde")]
        b: C64,
    },
    /// A = [[0,1],[τ,0]], B = [[a, b(t)], [b(t), a]] with real a and b(t) linear.
    #[serde(rename = "typeII-b-mid")]
    BToMid { tau: f64, a: f64, b0: f64, b1: f64 },
    /// a and τ linear to 0 with b(t) = √(a² + (τ²+1)/2), B = [[a, b], [b, a]].
    #[serde(rename = "typeII-a-tau-to-0")]
    ATauToZero { a0: f64, tau0: f64 },
    /// From A = [[0, 1/|b|], [τ/|b|, 0]], B = [[ia/|b|, i·sgn b], [i·sgn b, −ia/|b|]]
    /// shrink A and the diagonal of B to zero.
    #[serde(rename = "typeII-large-b-shrink")]
    LargeBShrink { tau: f64, a: f64, b: f64 },
    /// A = [[0,1],[0,0]], B = [[0, (1−t)/√2], [t + (1−t)/√2, 0]] (non-symmetric).
    #[serde(rename = "typeII-offdiag-swap")]
    OffdiagSwap,
    /// A = [[0,1],[0,0]], symmetric off-diagonal B from 1/√2 to 1/2.
    #[serde(rename = "typeII-offdiag-half")]
    OffdiagHalf,
    /// A = [[t + ix, 1−t], [0, 0]], B = [[0, 0], [1−t, t]] (non-symmetric).
    #[serde(rename = "hyp-final-bump")]
    HypFinalBump { eta: f64 },
    /// A = [[t + ix, 1−t], [0, 0]], B = [[0, (1−t)/2], [(1−t)/2, t]].
    #[serde(rename = "hyp-final-bump-sym")]
    HypFinalBumpSym { eta: f64 },
    /// A = diag(1, e^{i(1−t)π}), B = 0.
    #[serde(rename = "eli1-to-eli3")]
    Eli1ToEli3,
    /// A = [[1−t, e^{iπ/4}x], [−e^{iπ/4}x, 1−t]], B = tI.
    #[serde(rename = "eli3-to-eli2-bump")]
    Eli3ToEli2Bump { eta: f64 },
}

fn domain(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfDomain(what.to_string()))
    }
}

fn symmetric_finite(b: &Mat2) -> bool {
    b.is_finite() && b.symmetric_defect() < 1e-12 * (1.0 + b.norm())
}

impl Recipe {
    pub fn name(&self) -> &'static str {
        match self {
            Recipe::RotateThetaToZero { .. } => "rotate-theta-to-0",
            Recipe::RotateThetaToPi { .. } => "rotate-theta-to-pi",
            Recipe::DiagShrinkA { .. } => "typeI-neg-diagB-shrink-a",
            Recipe::DiagRescale { .. } => "typeI-neg-rescale",
            Recipe::FinalAShrink { .. } => "typeI-neg-final-A-shrink",
            Recipe::CaseEPerturb { .. } => "case-e-perturb",
            Recipe::CaseCShrink { .. } => "case-c-shrink",
            Recipe::CaseDLt1 { .. } => "case-d-lt1",
            Recipe::CaseDGt1 { .. } => "case-d-gt1",
            Recipe::CaseAShrink { .. } => "case-a-shrink",
            Recipe::CaseAGt1 { .. } => "case-a-gt1",
            Recipe::PhaseAlign { .. } => "typeII-phase-align",
            Recipe::BToZero { .. } => "typeII-b-to-0",
            Recipe::BToMid { .. } => "typeII-b-mid",
            Recipe::ATauToZero { .. } => "typeII-a-tau-to-0",
            Recipe::LargeBShrink { .. } => "typeII-large-b-shrink",
            Recipe::OffdiagSwap => "typeII-offdiag-swap",
            Recipe::OffdiagHalf => "typeII-offdiag-half",
            Recipe::HypFinalBump { .. } => "hyp-final-bump",
            Recipe::HypFinalBumpSym { .. } => "hyp-final-bump-sym",
            Recipe::Eli1ToEli3 => "eli1-to-eli3",
            Recipe::Eli3ToEli2Bump { .. } => "eli3-to-eli2-bump",
        }
    }

    /// Checks the parameter domain of the recipe.
    pub fn validate(&self) -> Result<()> {
        let fin = |x: f64| x.is_finite();
        match *self {
            Recipe::RotateThetaToZero { phi, ref b } | Recipe::RotateThetaToPi { phi, ref b } => {
                domain((0.0..=PI).contains(&phi), "phi must lie in [0, pi]")?;
                domain(symmetric_finite(b), "b must be finite and symmetric")
            }
            Recipe::DiagShrinkA { a, d } => domain(fin(a) && fin(d) && a >= 0.0 && d > 0.0, "need a >= 0, d > 0"),
            Recipe::DiagRescale { d } | Recipe::FinalAShrink { d } => domain(fin(d) && d > 0.0, "need d > 0"),
            Recipe::CaseEPerturb { eps } => domain(fin(eps) && eps > 0.0, "need eps > 0"),
            Recipe::CaseCShrink { b } => domain(fin(b) && b > 0.0, "need b > 0"),
            Recipe::CaseDLt1 { b } => domain(fin(b) && b > 0.0 && b < 1.0, "need 0 < b < 1"),
            Recipe::CaseDGt1 { b } => domain(fin(b) && b > 1.0, "need b > 1"),
            Recipe::CaseAShrink { ref b } => domain(symmetric_finite(b), "b must be finite and symmetric"),
            Recipe::CaseAGt1 { ref a, ref b } => {
                domain(a.is_finite() && symmetric_finite(b), "a finite, b finite and symmetric")
            }
            Recipe::PhaseAlign { tau, a_abs, b_abs, alpha0, alpha1, beta0, beta1 } => domain(
                [tau, a_abs, b_abs, alpha0, alpha1, beta0, beta1].iter().all(|x| x.is_finite())
                    && (0.0..1.0).contains(&tau)
                    && a_abs >= 0.0
                    && b_abs >= 0.0,
                "need 0 <= tau < 1 and nonnegative moduli",
            ),
            Recipe::BToZero { tau, a, b } => domain(
                (0.0..1.0).contains(&tau) && a.is_finite() && b.is_finite(),
                "need 0 <= tau < 1",
            ),
            Recipe::BToMid { tau, a, b0, b1 } => domain(
                (0.0..1.0).contains(&tau) && fin(a) && fin(b0) && fin(b1),
                "need 0 <= tau < 1",
            ),
            Recipe::ATauToZero { a0, tau0 } => domain(fin(a0) && (0.0..1.0).contains(&tau0), "need 0 <= tau0 < 1"),
            Recipe::LargeBShrink { tau, a, b } => domain(
                (0.0..1.0).contains(&tau) && fin(a) && fin(b) && b != 0.0,
                "need 0 <= tau < 1 and b != 0",
            ),
            Recipe::HypFinalBump { eta } | Recipe::HypFinalBumpSym { eta } | Recipe::Eli3ToEli2Bump { eta } => {
                domain(fin(eta) && eta >= 0.0, "need eta >= 0")
            }
            Recipe::OffdiagSwap | Recipe::OffdiagHalf | Recipe::Eli1ToEli3 => Ok(()),
        }
    }

    /// (A(t), B(t)).
    pub fn eval(&self, t: f64) -> MatrixPair {
        let s = 1.0 - t;
        let (a, b) = match *self {
            Recipe::RotateThetaToZero { phi, b } => (diag2(ONE, C64::from_polar(1.0, s * phi)), b),
            Recipe::RotateThetaToPi { phi, b } => (diag2(ONE, C64::from_polar(1.0, s * phi + t * PI)), b),
            Recipe::DiagShrinkA { a, d } => (Mat2::identity(), diag2(re(s * a), re(d))),
            Recipe::DiagRescale { d } => {
                let p = s + t / d.sqrt();
                (diag2(ONE, re(p * p)), diag2(ZERO, re(d * p * p)))
            }
            Recipe::FinalAShrink { d } => (diag2(ONE, re(s / d)), diag2(ZERO, ONE)),
            Recipe::CaseEPerturb { eps } => {
                let k = Mat2::new(I, -I, -I, I);
                (flip(), Mat2::from_real([[1.0, 1.0], [1.0, 1.0]]) + k.scale_re(t * eps))
            }
            Recipe::CaseCShrink { b } => (flip(), offdiag(re(s * b))),
            Recipe::CaseDLt1 { b } => (flip(), Mat2::from_real([[1.0 + s * b, -1.0], [-1.0, 1.0 - s * b]])),
            Recipe::CaseDGt1 { b } => {
                let k = 1.0 / (1.0 + b);
                (
                    flip().scale_re(s * k),
                    Mat2::from_real([[1.0, -s * k], [-s * k, -1.0 + 2.0 * s * k]]),
                )
            }
            Recipe::CaseAShrink { b } => (flip(), b.scale_re(s)),
            Recipe::CaseAGt1 { a, b } => (a.scale_re(s), b),
            Recipe::PhaseAlign { tau, a_abs, b_abs, alpha0, alpha1, beta0, beta1 } => {
                let av = C64::from_polar(a_abs, s * alpha0 + t * alpha1);
                let bv = C64::from_polar(b_abs, s * beta0 + t * beta1);
                (a_tau(tau), Mat2::new(av, bv, bv, av.conj()))
            }
            Recipe::BToZero { tau, a, b } => (a_tau(tau), Mat2::new(a, b * s, b * s, a.conj())),
            Recipe::BToMid { tau, a, b0, b1 } => {
                let bb = s * b0 + t * b1;
                (a_tau(tau), Mat2::from_real([[a, bb], [bb, a]]))
            }
            Recipe::ATauToZero { a0, tau0 } => {
                let (a, tau) = (s * a0, s * tau0);
                let bb = (a * a + 0.5 * (tau * tau + 1.0)).sqrt();
                (a_tau(tau), Mat2::from_real([[a, bb], [bb, a]]))
            }
            Recipe::LargeBShrink { tau, a, b } => {
                let (nb, sb) = (b.abs(), b.signum());
                let d = I * (s * a / nb);
                (
                    Mat2::new(ZERO, re(s / nb), re(s * tau / nb), ZERO),
                    Mat2::new(d, I * sb, I * sb, -d),
                )
            }
            Recipe::OffdiagSwap => (
                a_tau(0.0),
                Mat2::from_real([[0.0, s * FRAC_1_SQRT_2], [t + s * FRAC_1_SQRT_2, 0.0]]),
            ),
            Recipe::OffdiagHalf => (a_tau(0.0), offdiag(re(s * FRAC_1_SQRT_2 + t * 0.5))),
            Recipe::HypFinalBump { eta } => {
                let x = bump(t, eta);
                (
                    Mat2::new(c64(t, x), re(s), ZERO, ZERO),
                    Mat2::from_real([[0.0, 0.0], [s, t]]),
                )
            }
            Recipe::HypFinalBumpSym { eta } => {
                let x = bump(t, eta);
                (
                    Mat2::new(c64(t, x), re(s), ZERO, ZERO),
                    Mat2::from_real([[0.0, 0.5 * s], [0.5 * s, t]]),
                )
            }
            Recipe::Eli1ToEli3 => (diag2(ONE, C64::from_polar(1.0, s * PI)), Mat2::zeros()),
            Recipe::Eli3ToEli2Bump { eta } => {
                let w = C64::from_polar(bump(t, eta), FRAC_PI_4);
                (Mat2::new(re(s), w, -w, re(s)), Mat2::identity().scale_re(t))
            }
        };
        MatrixPair::raw(a, b)
    }

    /// (A'(t), B'(t)).
    pub fn derivative(&self, t: f64) -> (Mat2, Mat2) {
        let s = 1.0 - t;
        let z = Mat2::zeros();
        match *self {
            Recipe::RotateThetaToZero { phi, .. } => {
                (diag2(ZERO, I * C64::from_polar(-phi, s * phi)), z)
            }
            Recipe::RotateThetaToPi { phi, .. } => {
                (diag2(ZERO, I * C64::from_polar(PI - phi, s * phi + t * PI)), z)
            }
            Recipe::DiagShrinkA { a, .. } => (z, diag2(re(-a), ZERO)),
            Recipe::DiagRescale { d } => {
                let p = s + t / d.sqrt();
                let dp = 1.0 / d.sqrt() - 1.0;
                (diag2(ZERO, re(2.0 * p * dp)), diag2(ZERO, re(2.0 * d * p * dp)))
            }
            Recipe::FinalAShrink { d } => (diag2(ZERO, re(-1.0 / d)), z),
            Recipe::CaseEPerturb { eps } => (z, Mat2::new(I, -I, -I, I).scale_re(eps)),
            Recipe::CaseCShrink { b } => (z, offdiag(re(-b))),
            Recipe::CaseDLt1 { b } => (z, diag2(re(-b), re(b))),
            Recipe::CaseDGt1 { b } => {
                let k = 1.0 / (1.0 + b);
                (flip().scale_re(-k), Mat2::from_real([[0.0, k], [k, -2.0 * k]]))
            }
            Recipe::CaseAShrink { b } => (z, -b),
            Recipe::CaseAGt1 { a, .. } => (-a, z),
            Recipe::PhaseAlign { a_abs, b_abs, alpha0, alpha1, beta0, beta1, .. } => {
                let av = C64::from_polar(a_abs, s * alpha0 + t * alpha1);
                let bv = C64::from_polar(b_abs, s * beta0 + t * beta1);
                let da = I * av * (alpha1 - alpha0);
                let db = I * bv * (beta1 - beta0);
                (z, Mat2::new(da, db, db, da.conj()))
            }
            Recipe::BToZero { b, .. } => (z, offdiag(-b)),
            Recipe::BToMid { b0, b1, .. } => (z, offdiag(re(b1 - b0))),
            Recipe::ATauToZero { a0, tau0 } => {
                let (a, tau) = (s * a0, s * tau0);
                let bb = (a * a + 0.5 * (tau * tau + 1.0)).sqrt();
                let db = (2.0 * a * -a0 + tau * -tau0) / (2.0 * bb);
                (
                    Mat2::new(ZERO, ZERO, re(-tau0), ZERO),
                    Mat2::from_real([[-a0, db], [db, -a0]]),
                )
            }
            Recipe::LargeBShrink { tau, a, b } => {
                let nb = b.abs();
                let d = I * (-a / nb);
                (
                    Mat2::new(ZERO, re(-1.0 / nb), re(-tau / nb), ZERO),
                    Mat2::new(d, ZERO, ZERO, -d),
                )
            }
            Recipe::OffdiagSwap => (z, Mat2::from_real([[0.0, -FRAC_1_SQRT_2], [1.0 - FRAC_1_SQRT_2, 0.0]])),
            Recipe::OffdiagHalf => (z, offdiag(re(0.5 - FRAC_1_SQRT_2))),
            Recipe::HypFinalBump { eta } => (
                Mat2::new(c64(1.0, bump_derivative(t, eta)), re(-1.0), ZERO, ZERO),
                Mat2::from_real([[0.0, 0.0], [-1.0, 1.0]]),
            ),
            Recipe::HypFinalBumpSym { eta } => (
                Mat2::new(c64(1.0, bump_derivative(t, eta)), re(-1.0), ZERO, ZERO),
                Mat2::from_real([[0.0, -0.5], [-0.5, 1.0]]),
            ),
            Recipe::Eli1ToEli3 => (diag2(ZERO, I * C64::from_polar(-PI, s * PI)), z),
            Recipe::Eli3ToEli2Bump { eta } => {
                let w = C64::from_polar(bump_derivative(t, eta), FRAC_PI_4);
                (Mat2::new(re(-1.0), w, -w, re(-1.0)), Mat2::identity())
            }
        }
    }
}

/// Builds a catalog segment from its name and a JSON object of parameters.
pub fn catalog_segment(name: &str, params: &serde_json::Value) -> Result<Segment> {
    let mut obj = match params {
        serde_json::Value::Object(m) => m.clone(),
        serde_json::Value::Null => serde_json::Map::new(),
        _ => return Err(Error::Input("recipe parameters must be a JSON object".into())),
    };
    obj.insert("name".into(), serde_json::Value::String(name.to_string()));
    let recipe: Recipe = serde_json::from_value(serde_json::Value::Object(obj)).map_err(|e| {
        let msg = e.to_string();
        if msg.contains("unknown variant") {
            Error::UnknownRecipe(name.to_string())
        } else {
            Error::OutOfDomain(msg)
        }
    })?;
    recipe.validate()?;
    Ok(Segment::Catalog(recipe))
}

/// Interpolation from the identity to a group element:
/// ζ(t) = e^{it·arg ζ}, P(t) = U(t)·((1−t)I + tH) where P = UH is the polar
/// decomposition and U(t) follows the principal unitary logarithm.
#[derive(Clone, Copy, Debug)]
pub struct GroupPath {
    arg_zeta: f64,
    phases: [f64; 2],
    v: Mat2,
    h: Mat2,
    end: GroupElement,
}

impl GroupPath {
    pub fn new(g: &GroupElement) -> Result<Self> {
        let polar = polar2(&g.p)?;
        let (phases, v) = unitary_eig2(&polar.u);
        Ok(GroupPath {
            arg_zeta: g.zeta.arg(),
            phases,
            v,
            h: polar.h,
            end: *g,
        })
    }

    fn unitary(&self, t: f64) -> (Mat2, Mat2) {
        let e = [C64::from_polar(1.0, t * self.phases[0]), C64::from_polar(1.0, t * self.phases[1])];
        let de = [e[0] * I * self.phases[0], e[1] * I * self.phases[1]];
        let va = self.v.adjoint();
        (self.v * Mat2::diag(e) * va, self.v * Mat2::diag(de) * va)
    }

    /// g(t) and (ζ'(t), P'(t)).
    pub fn at(&self, t: f64) -> (GroupElement, C64, Mat2) {
        if t == 1.0 {
            let (_, dz, dp) = self.at_interior(t);
            return (self.end, dz, dp);
        }
        self.at_interior(t)
    }

    fn at_interior(&self, t: f64) -> (GroupElement, C64, Mat2) {
        let zeta = C64::from_polar(1.0, t * self.arg_zeta);
        let dzeta = zeta * I * self.arg_zeta;
        let (u, du) = self.unitary(t);
        let id = Mat2::identity();
        let ht = id.scale_re(1.0 - t) + self.h.scale_re(t);
        let dh = self.h - id;
        (GroupElement { zeta, p: u * ht }, dzeta, du * ht + u * dh)
    }
}

/// One piece of a path, parametrized by [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Segment {
    Constant { pair: MatrixPair },
    Linear { from: MatrixPair, to: MatrixPair },
    /// `act(g(t), base)` along the [`GroupPath`] of `g`.
    GroupAction { base: MatrixPair, g: GroupElement },
    Catalog(Recipe),
}

impl Segment {
    pub fn eval(&self, t: f64) -> MatrixPair {
        match self {
            Segment::Constant { pair } => *pair,
            Segment::Linear { from, to } => {
                if t == 1.0 {
                    return *to;
                }
                MatrixPair::raw(
                    from.a.scale_re(1.0 - t) + to.a.scale_re(t),
                    from.b.scale_re(1.0 - t) + to.b.scale_re(t),
                )
            }
            Segment::GroupAction { base, g } => {
                if t == 0.0 {
                    return *base;
                }
                if t == 1.0 {
                    return act_unchecked(g, base);
                }
                match GroupPath::new(g) {
                    Ok(gp) => act_unchecked(&gp.at(t).0, base),
                    Err(_) => act_unchecked(g, base),
                }
            }
            Segment::Catalog(r) => r.eval(t),
        }
    }

    pub fn derivative(&self, t: f64) -> (Mat2, Mat2) {
        match self {
            Segment::Constant { .. } => (Mat2::zeros(), Mat2::zeros()),
            Segment::Linear { from, to } => (to.a - from.a, to.b - from.b),
            Segment::GroupAction { base, g } => {
                let Ok(gp) = GroupPath::new(g) else {
                    return (Mat2::zeros(), Mat2::zeros());
                };
                let (gt, dz, dp) = gp.at(t);
                let (p, zeta) = (gt.p, gt.zeta);
                let pap = p.adjoint() * base.a * p;
                let pbp = p.transpose() * base.b * p;
                let da = pap.scale(dz) + (dp.adjoint() * base.a * p + p.adjoint() * base.a * dp).scale(zeta);
                let db = pbp.scale(dz.conj())
                    + (dp.transpose() * base.b * p + p.transpose() * base.b * dp).scale(zeta.conj());
                (da, db)
            }
            Segment::Catalog(r) => r.derivative(t),
        }
    }

    pub fn start(&self) -> MatrixPair {
        self.eval(0.0)
    }

    pub fn end(&self) -> MatrixPair {
        self.eval(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Segment::Catalog(r) => r.validate(),
            Segment::GroupAction { g, .. } => GroupPath::new(g).map(|_| ()),
            _ => Ok(()),
        }
    }
}

/// Outcome of sampling the block determinant along a path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Samples per segment.
    pub samples: usize,
    /// Smallest |det4| seen, including local refinement between samples.
    pub min_abs_det4: f64,
    /// +1 or −1 when the sign is constant, 0 otherwise.
    pub sign: i32,
    pub pass: bool,
    pub margin: f64,
    /// Global parameter of the smallest |det4|.
    pub worst_t: f64,
    /// Largest change of det4 between adjacent samples; if this approaches
    /// the margin, raise the sample count.
    pub max_step_variation: f64,
    /// Smallest per-interval lower bound from a second-difference estimate.
    pub interval_lower_bound: f64,
}

#[derive(Clone, Copy, Debug)]
struct SegmentScan {
    min_abs: f64,
    worst: f64,
    positive: bool,
    negative: bool,
    max_step: f64,
    lower_bound: f64,
}

fn seg_det(seg: &Segment, t: f64) -> f64 {
    let p = seg.eval(t);
    block_det(&p.a, &p.b).re
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const R: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - R * (hi - lo);
    let mut x2 = lo + R * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if hi - lo < 1e-15 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - R * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + R * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn scan_segment(seg: &Segment, n: usize) -> SegmentScan {
    let nodes: Vec<f64> = (0..n)
        .map(|j| 0.5 * (1.0 - (PI * j as f64 / (n - 1) as f64).cos()))
        .collect();
    let vals: Vec<f64> = nodes.iter().map(|&t| seg_det(seg, t)).collect();
    let abs = |j: usize| vals[j].abs();
    let mut out = SegmentScan {
        min_abs: f64::INFINITY,
        worst: 0.0,
        positive: false,
        negative: false,
        max_step: 0.0,
        lower_bound: f64::INFINITY,
    };
    for (j, &v) in vals.iter().enumerate() {
        out.positive |= v > 0.0;
        out.negative |= v < 0.0;
        if v == 0.0 {
            out.positive = true;
            out.negative = true;
        }
        if v.abs() < out.min_abs {
            out.min_abs = v.abs();
            out.worst = nodes[j];
        }
    }
    for j in 0..n - 1 {
        out.max_step = out.max_step.max((vals[j + 1] - vals[j]).abs());
    }
    // Divided second differences give a curvature estimate per interval.
    let second = |j: usize| -> f64 {
        let (t0, t1, t2) = (nodes[j - 1], nodes[j], nodes[j + 1]);
        let d01 = (vals[j] - vals[j - 1]) / (t1 - t0);
        let d12 = (vals[j + 1] - vals[j]) / (t2 - t1);
        2.0 * (d12 - d01).abs() / (t2 - t0)
    };
    for j in 0..n - 1 {
        let mut m2: f64 = 0.0;
        if j >= 1 {
            m2 = m2.max(second(j));
        }
        if j + 2 < n {
            m2 = m2.max(second(j + 1));
        }
        let h = nodes[j + 1] - nodes[j];
        let lb = abs(j).min(abs(j + 1)) - 2.0 * m2 * h * h / 8.0;
        out.lower_bound = out.lower_bound.min(lb);
    }
    // Refine every local minimum of |det4| between its neighbours.
    for j in 0..n {
        let left = if j > 0 { abs(j - 1) } else { f64::INFINITY };
        let right = if j + 1 < n { abs(j + 1) } else { f64::INFINITY };
        if abs(j) > left || abs(j) > right {
            continue;
        }
        let lo = nodes[j.saturating_sub(1)];
        let hi = nodes[(j + 1).min(n - 1)];
        let (t, v) = golden_min(|t| seg_det(seg, t).abs(), lo, hi);
        let signed = seg_det(seg, t);
        out.positive |= signed > 0.0;
        out.negative |= signed < 0.0;
        if v < out.min_abs {
            out.min_abs = v;
            out.worst = t;
        }
    }
    out
}

/// Samples det4 at `n` Chebyshev–Lobatto points per segment, refines local
/// minima of |det4|, and passes iff the sign never changes and |det4| stays
/// above `margin`.
pub fn verify_nondegenerate(path: &HomotopyPath, n: usize, margin: f64) -> Certificate {
    let n = n.max(2);
    let k = path.segments.len();
    let scans: Vec<SegmentScan> = path.segments.par_iter().map(|s| scan_segment(s, n)).collect();
    let mut cert = Certificate {
        samples: n,
        min_abs_det4: f64::INFINITY,
        sign: 0,
        pass: false,
        margin,
        worst_t: 0.0,
        max_step_variation: 0.0,
        interval_lower_bound: f64::INFINITY,
    };
    let (mut pos, mut neg) = (false, false);
    for (i, s) in scans.iter().enumerate() {
        pos |= s.positive;
        neg |= s.negative;
        if s.min_abs < cert.min_abs_det4 {
            cert.min_abs_det4 = s.min_abs;
            cert.worst_t = (i as f64 + s.worst) / k as f64;
        }
        cert.max_step_variation = cert.max_step_variation.max(s.max_step);
        cert.interval_lower_bound = cert.interval_lower_bound.min(s.lower_bound);
    }
    cert.sign = match (pos, neg) {
        (true, false) => 1,
        (false, true) => -1,
        _ => 0,
    };
    cert.pass = k > 0
        && cert.sign != 0
        && cert.min_abs_det4 > margin
        && cert.interval_lower_bound > 0.0;
    cert
}

/// A piecewise path with an optional certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomotopyPath {
    pub segments: Vec<Segment>,
    pub certificate: Option<Certificate>,
    /// When set, the global parameter is reparametrized so the path is
    /// constant on [0, 0.1] and [0.9, 1] and C^∞ across segment junctions.
    #[serde(default)]
    pub flattened: bool,
    /// Traverse the segments from the last end back to the first start.
    #[serde(default)]
    pub reversed: bool,
}

const FLAT_EDGE: f64 = 0.1;

impl HomotopyPath {
    pub fn new(segments: Vec<Segment>) -> Self {
        HomotopyPath {
            segments,
            certificate: None,
            flattened: false,
            reversed: false,
        }
    }

    pub fn constant(pair: MatrixPair) -> Self {
        Self::new(vec![Segment::Constant { pair }])
    }

    /// (segment index, local parameter, d(local)/dt).
    fn locate(&self, t: f64) -> Result<(usize, f64, f64)> {
        if !(0.0..=1.0).contains(&t) || t.is_nan() {
            return Err(Error::ParameterRange(t));
        }
        if self.segments.is_empty() {
            return Err(Error::Input("path has no segments".into()));
        }
        let k = self.segments.len();
        let (t, sign) = if self.reversed { (1.0 - t, -1.0) } else { (t, 1.0) };
        let (u, du) = if self.flattened {
            let w = 1.0 - 2.0 * FLAT_EDGE;
            let x = (t - FLAT_EDGE) / w;
            (smoothstep(x), smoothstep_derivative(x) / w)
        } else {
            (t, 1.0)
        };
        let scaled = u * k as f64;
        let idx = (scaled.floor() as usize).min(k - 1);
        let local = (scaled - idx as f64).clamp(0.0, 1.0);
        if self.flattened {
            Ok((idx, smoothstep(local), sign * smoothstep_derivative(local) * k as f64 * du))
        } else {
            Ok((idx, local, sign * k as f64))
        }
    }

    pub fn eval(&self, t: f64) -> Result<MatrixPair> {
        let (i, local, _) = self.locate(t)?;
        Ok(self.segments[i].eval(local))
    }

    /// Closed-form derivative with respect to the global parameter.
    pub fn derivative(&self, t: f64) -> Result<(Mat2, Mat2)> {
        let (i, local, scale) = self.locate(t)?;
        if scale == 0.0 {
            return Ok((Mat2::zeros(), Mat2::zeros()));
        }
        let (da, db) = self.segments[i].derivative(local);
        Ok((da.scale_re(scale), db.scale_re(scale)))
    }

    pub fn start(&self) -> MatrixPair {
        if self.reversed {
            return self.last_end();
        }
        self.first_start()
    }

    pub fn end(&self) -> MatrixPair {
        if self.reversed {
            return self.first_start();
        }
        self.last_end()
    }

    fn first_start(&self) -> MatrixPair {
        self.segments.first().map(|s| s.start()).unwrap_or(MatrixPair::raw(Mat2::zeros(), Mat2::zeros()))
    }

    fn last_end(&self) -> MatrixPair {
        self.segments.last().map(|s| s.end()).unwrap_or(MatrixPair::raw(Mat2::zeros(), Mat2::zeros()))
    }

    /// Checks every segment's parameters and that consecutive segments meet.
    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::Input("path has no segments".into()));
        }
        for s in &self.segments {
            s.validate()?;
        }
        let scale = self.segments.iter().map(|s| s.start().scale()).fold(1.0, f64::max);
        let gap = self.max_junction_gap();
        if gap > 1e-9 * scale {
            return Err(Error::Input(format!("segments do not meet (gap {gap:.3e})")));
        }
        Ok(())
    }

    /// Largest mismatch between consecutive segment endpoints.
    pub fn max_junction_gap(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| w[0].end().distance(&w[1].start()))
            .fold(0.0, f64::max)
    }

    /// The same path traversed backwards; the certificate carries over.
    pub fn reversed(&self) -> HomotopyPath {
        HomotopyPath {
            reversed: !self.reversed,
            ..self.clone()
        }
    }

    /// Reparametrized to be constant on [0, 0.1] and [0.9, 1] and C^∞ at
    /// every junction; the certificate is recomputed.
    pub fn flattened(&self) -> HomotopyPath {
        let mut out = HomotopyPath {
            flattened: true,
            ..self.clone()
        };
        if let Some(c) = self.certificate {
            out.certify(c.samples, c.margin);
        }
        out
    }

    pub fn certify(&mut self, n: usize, margin: f64) -> Certificate {
        let cert = verify_nondegenerate(self, n, margin);
        self.certificate = Some(cert);
        cert
    }
}

/// Model pair of each component: (0, I) for elliptic, (diag(1,0), diag(0,1))
/// for hyperbolic.
pub fn model_pair(sign: Sign) -> Result<MatrixPair> {
    match sign {
        Sign::Elliptic => Ok(MatrixPair::raw(Mat2::zeros(), Mat2::identity())),
        Sign::Hyperbolic => Ok(MatrixPair::raw(diag2(ONE, ZERO), diag2(ZERO, ONE))),
        Sign::Degenerate => Err(Error::DegeneratePair),
    }
}

/// The two models in the form they are usually displayed, and the fixed path
/// identifying each with [`model_pair`].
///
/// Elliptic: `w = |z₁|² + |z₂|²`, i.e. (I, 0). A is invertible there and
/// singular at (0, I), so no group element relates the two; the
/// identification is the certified bump path eli3 → eli2.
/// Hyperbolic: `w = |z₁|² + z̄₂²` has coefficients (diag(1,0), diag(0,1)),
/// which is the hyperbolic model itself; the identifying group element is
/// the identity and the path is constant.
pub fn displayed_model(sign: Sign) -> Result<(MatrixPair, HomotopyPath)> {
    let mut path = match sign {
        Sign::Elliptic => HomotopyPath::new(vec![Segment::Catalog(Recipe::Eli3ToEli2Bump { eta: DEFAULT_ETA })]),
        Sign::Hyperbolic => HomotopyPath::constant(model_pair(sign)?),
        Sign::Degenerate => return Err(Error::DegeneratePair),
    };
    path.certify(DEFAULT_SAMPLES, DEFAULT_MARGIN);
    Ok((path.start(), path))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConnectOptions {
    pub samples: usize,
    /// Certificate margin for a pair of unit scale; smaller inputs get the
    /// margin scaled by scale⁴ like det4 itself.
    pub margin: f64,
    pub seed: u64,
    /// Random anchors tried by the fallback search.
    pub max_retries: usize,
    pub eta: f64,
    pub tol: f64,
    /// Relative size of the perturbation off non-generic pairs.
    pub perturb: f64,
}

impl Default for ConnectOptions {
    fn default() -> Self {
        ConnectOptions {
            samples: DEFAULT_SAMPLES,
            margin: DEFAULT_MARGIN,
            seed: 0,
            max_retries: 16,
            eta: DEFAULT_ETA,
            tol: crate::canon::DEFAULT_TOL,
            perturb: 1e-2,
        }
    }
}

fn generic_enough(p: &MatrixPair, tol: f64) -> bool {
    match normal_form(p, tol) {
        Ok(nf) => nf.witness.p.norm() * nf.witness.p.inverse().map_or(f64::INFINITY, |q| q.norm()) < 1e6,
        Err(_) => false,
    }
}

fn certified_linear(from: &MatrixPair, to: &MatrixPair, n: usize, margin: f64) -> bool {
    let path = HomotopyPath::new(vec![Segment::Linear { from: *from, to: *to }]);
    verify_nondegenerate(&path, n, margin).pass
}

/// Moves a pair off the non-generic locus by a small perturbation joined to
/// it by a certified straight segment. Generic pairs are returned unchanged.
pub fn perturb_generic(p: &MatrixPair, eta: f64, opts: &ConnectOptions) -> Result<MatrixPair> {
    if generic_enough(p, opts.tol) {
        return Ok(*p);
    }
    let s = p.scale().max(f64::MIN_POSITIVE);
    let sign = sign_class(p, SIGN_TOL).tag;
    let margin = opts.margin * s.min(1.0).powi(4);
    let n = opts.samples.min(128);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x0005_eed0_f9e7_e41c);
    let mut size = eta;
    for _round in 0..6 {
        let mut candidates = Vec::new();
        let rot = diag2(ONE, C64::from_polar(1.0, size));
        candidates.push(MatrixPair::raw(p.a * rot, p.b));
        // A diagonal entry of B in the canonical frame of A is bumped.
        if let Ok((class, g)) = crate::canon::canonical_a(&p.a, opts.tol) {
            if class.is_generic() {
                if let Some(pinv) = g.p.inverse() {
                    for k in 0..2 {
                        let mut e = Mat2::zeros();
                        e.0[k][k] = ONE;
                        let db = (pinv.transpose() * e * pinv).scale(g.zeta);
                        let db = db.scale_re(size * s / db.norm().max(f64::MIN_POSITIVE));
                        candidates.push(MatrixPair::raw(p.a, (p.b + db).symmetrized()));
                    }
                }
            }
        }
        for shift in [Mat2::identity(), flip(), diag2(ONE, I)] {
            candidates.push(MatrixPair::raw(p.a + shift.scale_re(size * s), p.b));
        }
        for _ in 0..8 {
            let da = random_mat(&mut rng);
            let db = random_mat(&mut rng).symmetrized();
            let k = size * s / da.norm().max(db.norm());
            candidates.push(MatrixPair::raw(p.a + da.scale_re(k), p.b + db.scale_re(k)));
        }
        for q in candidates {
            if sign_class(&q, SIGN_TOL).tag == sign && generic_enough(&q, opts.tol) && certified_linear(p, &q, n, margin) {
                return Ok(q);
            }
        }
        size *= 0.5;
    }
    Err(Error::PerturbationUncertified)
}

fn random_mat(rng: &mut ChaCha8Rng) -> Mat2 {
    let mut m = Mat2::zeros();
    for row in m.0.iter_mut() {
        for x in row.iter_mut() {
            *x = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    m
}

struct Route {
    segments: Vec<Segment>,
    cur: MatrixPair,
}

impl Route {
    fn new(p: MatrixPair) -> Self {
        Route { segments: Vec::new(), cur: p }
    }

    fn push(&mut self, seg: Segment) {
        self.cur = seg.end();
        self.segments.push(seg);
    }

    fn recipe(&mut self, r: Recipe) {
        self.push(Segment::Catalog(r));
    }

    fn linear(&mut self, to: MatrixPair) {
        if self.cur.distance(&to) > 0.0 {
            self.push(Segment::Linear { from: self.cur, to });
        }
    }

    fn group(&mut self, g: GroupElement) {
        self.push(Segment::GroupAction { base: self.cur, g });
    }
}

/// Takagi-diagonalize B with A = 0 and move the singular values to 1.
fn zero_a_tail(route: &mut Route) -> Result<()> {
    let tk = takagi2(&route.cur.b)?;
    if tk.s[1] <= 1e-12 * tk.s[0].max(1.0) {
        return Err(Error::DegeneratePair);
    }
    route.group(GroupElement::congruence(tk.u.conj()));
    route.linear(MatrixPair::raw(Mat2::zeros(), diag2(re(tk.s[0]), re(tk.s[1]))));
    route.linear(MatrixPair::raw(Mat2::zeros(), Mat2::identity()));
    Ok(())
}

fn min_on_unit(c0: f64, c1: f64, c2: f64) -> f64 {
    let f = |s: f64| c0 + c1 * s + c2 * s * s;
    let mut m = f(0.0).min(f(1.0));
    if c2 != 0.0 {
        let v = -c1 / (2.0 * c2);
        if (0.0..=1.0).contains(&v) {
            m = m.min(f(v));
        }
    }
    m
}

fn type_i_elliptic(route: &mut Route, theta: f64, b: Mat2, eta: f64) -> Result<()> {
    route.recipe(Recipe::RotateThetaToPi { phi: theta, b });
    let at_flip = MatrixPair::raw(flip(), b);
    route.linear(at_flip);
    // With A = diag(1, −1), det4(A, cB) = 1 + p c² + K c⁴ where K = |det B|².
    let k = b.det().norm_sqr();
    let p = block_det(&at_flip.a, &at_flip.b).re - 1.0 - k;
    if min_on_unit(1.0, p, k) > 0.0 {
        route.recipe(Recipe::CaseAShrink { b });
        route.recipe(Recipe::Eli1ToEli3);
        route.linear(MatrixPair::raw(Mat2::identity(), Mat2::zeros()));
        route.recipe(Recipe::Eli3ToEli2Bump { eta });
        Ok(())
    } else {
        // Then det4(cA, B) = c⁴ + p c² + K has no root for c in [0, 1].
        route.recipe(Recipe::CaseAGt1 { a: flip(), b });
        zero_a_tail(route)
    }
}

fn type_i_hyperbolic(route: &mut Route, theta: f64, b: Mat2) -> Result<()> {
    route.recipe(Recipe::RotateThetaToZero { phi: theta, b });
    let tk = takagi2(&b)?;
    let (s1, s2) = (tk.s[0], tk.s[1]);
    if !(s1 > 1.0 && s2 < 1.0) {
        return Err(Error::Uncertified);
    }
    let swap = Mat2::from_real([[0.0, 1.0], [1.0, 0.0]]);
    route.group(GroupElement::congruence(tk.u.conj() * swap));
    route.linear(MatrixPair::raw(Mat2::identity(), diag2(re(s2), re(s1))));
    route.recipe(Recipe::DiagShrinkA { a: s2, d: s1 });
    route.recipe(Recipe::DiagRescale { d: s1 });
    route.recipe(Recipe::FinalAShrink { d: s1 });
    Ok(())
}

fn nearest(angle: f64, targets: &[f64]) -> f64 {
    targets
        .iter()
        .copied()
        .min_by(|x, y| (angle - x).abs().total_cmp(&(angle - y).abs()))
        .unwrap_or(angle)
}

fn phase_align(route: &mut Route, tau: f64, b: &Mat2, targets: &[f64]) -> (f64, f64) {
    let (a, bb) = (b.0[0][0], b.0[0][1]);
    let (alpha0, beta0) = (a.arg(), bb.arg());
    let alpha1 = if a.norm() > 0.0 { nearest(alpha0, targets) } else { alpha0 };
    let beta1 = if bb.norm() > 0.0 { nearest(beta0, targets) } else { beta0 };
    route.recipe(Recipe::PhaseAlign {
        tau,
        a_abs: a.norm(),
        b_abs: bb.norm(),
        alpha0,
        alpha1,
        beta0,
        beta1,
    });
    (alpha1, beta1)
}

fn type_iii_elliptic(route: &mut Route, tau: f64, b: Mat2) -> Result<()> {
    let (alpha1, beta1) = phase_align(route, tau, &b, &[-FRAC_PI_2, FRAC_PI_2]);
    let a_s = b.0[0][0].norm() * alpha1.sin().signum();
    let b_s = b.0[0][1].norm() * beta1.sin().signum();
    let bm = Mat2::new(I * a_s, I * b_s, I * b_s, I * -a_s);
    route.linear(MatrixPair::raw(a_tau(tau), bm));
    // det4 = X² + X(2a² − τ² − 1) + (a² + τ)² with X = b².
    let x = b_s * b_s;
    let c1 = 2.0 * a_s * a_s - tau * tau - 1.0;
    let c0 = (a_s * a_s + tau).powi(2);
    let disc = c1 * c1 - 4.0 * c0;
    let below = disc < 0.0 || c1 >= 0.0 || x < 0.5 * (-c1 - disc.sqrt());
    if below {
        route.recipe(Recipe::BToZero { tau, a: I * a_s, b: I * b_s });
        let mut a_end = a_s;
        if a_s.abs() < 0.5 {
            a_end = if a_s < 0.0 { -0.5 } else { 0.5 };
            route.linear(MatrixPair::raw(a_tau(tau), diag2(I * a_end, I * -a_end)));
        }
        // det4 along A ↦ cA here is (a² + τc²)².
        route.linear(MatrixPair::raw(Mat2::zeros(), diag2(I * a_end, I * -a_end)));
        zero_a_tail(route)
    } else {
        let nb = b_s.abs();
        route.group(GroupElement::congruence(Mat2::identity().scale_re(1.0 / nb.sqrt())));
        route.linear(Recipe::LargeBShrink { tau, a: a_s, b: b_s }.eval(0.0));
        route.recipe(Recipe::LargeBShrink { tau, a: a_s, b: b_s });
        zero_a_tail(route)
    }
}

fn type_iii_hyperbolic(route: &mut Route, tau: f64, b: Mat2, eta: f64) -> Result<()> {
    let (alpha1, beta1) = phase_align(route, tau, &b, &[-PI, 0.0, PI]);
    let mut a_r = b.0[0][0].norm() * alpha1.cos().signum();
    let b_r = b.0[0][1].norm() * beta1.cos().signum();
    route.linear(MatrixPair::raw(a_tau(tau), Mat2::from_real([[a_r, b_r], [b_r, a_r]])));
    // det4 = X² − X(2a² + τ² + 1) + (a² − τ)², negative between its roots;
    // move X = b² to the midpoint of the roots.
    let mid = (a_r * a_r + 0.5 * (tau * tau + 1.0)).sqrt();
    let b_mid = if b_r < 0.0 { -mid } else { mid };
    route.recipe(Recipe::BToMid { tau, a: a_r, b0: b_r, b1: b_mid });
    if b_mid < 0.0 {
        route.group(GroupElement::congruence(Mat2::identity().scale(I)));
        a_r = -a_r;
        route.linear(MatrixPair::raw(a_tau(tau), Mat2::from_real([[a_r, mid], [mid, a_r]])));
    }
    route.recipe(Recipe::ATauToZero { a0: a_r, tau0: tau });
    route.recipe(Recipe::OffdiagHalf);
    route.recipe(Recipe::HypFinalBumpSym { eta });
    Ok(())
}

/// Cleans roundoff from a normal form so the catalog recipes start exactly
/// where the snap segment ends.
fn exact_normal_pair(nf: &NormalForm) -> MatrixPair {
    let mut b = nf.b_reduced;
    match nf.class {
        CosquareClass::TypeI { .. } => {
            b.0[0][0] = re(b.0[0][0].norm());
            b.0[1][1] = re(b.0[1][1].norm());
        }
        CosquareClass::TypeIII { .. } => b.0[1][1] = b.0[0][0].conj(),
        _ => {}
    }
    MatrixPair::raw(nf.pair().a, b.symmetrized())
}

fn analytic_route(p: &MatrixPair, sign: Sign, opts: &ConnectOptions) -> Result<Vec<Segment>> {
    let mut route = Route::new(*p);
    let s = p.scale();
    if (s - 1.0).abs() > 1e-12 {
        route.group(GroupElement::congruence(Mat2::identity().scale_re(1.0 / s.sqrt())));
    }
    if route.cur.a.norm() <= 1e-12 {
        zero_a_tail(&mut route)?;
        return Ok(route.segments);
    }
    let q = perturb_generic(&route.cur, opts.perturb, opts)?;
    route.linear(q);
    let nf = normal_form(&route.cur, opts.tol)?;
    route.group(nf.witness);
    route.linear(exact_normal_pair(&nf));
    let b = route.cur.b;
    match (nf.class, sign) {
        (CosquareClass::TypeI { theta }, Sign::Elliptic) => type_i_elliptic(&mut route, theta, b, opts.eta)?,
        (CosquareClass::TypeI { theta }, Sign::Hyperbolic) => type_i_hyperbolic(&mut route, theta, b)?,
        (CosquareClass::TypeIII { mu }, Sign::Elliptic) => type_iii_elliptic(&mut route, mu, b)?,
        (CosquareClass::TypeIII { mu }, Sign::Hyperbolic) => type_iii_hyperbolic(&mut route, mu, b, opts.eta)?,
        _ => return Err(Error::Uncertified),
    }
    let model = model_pair(sign)?;
    route.linear(model);
    Ok(route.segments)
}

fn random_anchor(rng: &mut ChaCha8Rng, sign: Sign) -> MatrixPair {
    loop {
        let a = random_mat(rng);
        let b = random_mat(rng).symmetrized();
        let q = MatrixPair::raw(a, b);
        let c = sign_class(&q, SIGN_TOL);
        if c.tag == sign && c.det4_normalized.abs() > 1e-2 {
            return q;
        }
    }
}

/// Piecewise-linear search through random anchors of the right sign.
fn search_route(p: &MatrixPair, model: &MatrixPair, sign: Sign, opts: &ConnectOptions, margin: f64) -> (Option<HomotopyPath>, f64) {
    let mut best = 0.0_f64;
    let mut try_path = |segs: Vec<Segment>| -> Option<HomotopyPath> {
        let mut path = HomotopyPath::new(segs);
        let cert = path.certify(opts.samples, margin);
        if cert.pass {
            return Some(path);
        }
        if cert.sign != 0 {
            best = best.max(cert.min_abs_det4);
        }
        None
    };
    if let Some(path) = try_path(vec![Segment::Linear { from: *p, to: *model }]) {
        return (Some(path), 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.max_retries {
        let anchor = random_anchor(&mut rng, sign);
        let segs = vec![
            Segment::Linear { from: *p, to: anchor },
            Segment::Linear { from: anchor, to: *model },
        ];
        if let Some(path) = try_path(segs) {
            return (Some(path), 0.0);
        }
    }
    (None, best)
}

/// Builds and certifies a path from `p` to the model pair of its component.
pub fn connect_to_model(p: &MatrixPair, opts: &ConnectOptions) -> Result<HomotopyPath> {
    if !p.is_finite() {
        return Err(Error::NonFinite("pair"));
    }
    let sign = sign_class(p, SIGN_TOL).tag;
    let model = model_pair(sign)?;
    let margin = opts.margin * p.scale().min(1.0).powi(4);
    if p.distance(&model) <= 1e-12 {
        let mut path = HomotopyPath::constant(model);
        path.certify(opts.samples, margin);
        return Ok(path);
    }
    let mut best = 0.0;
    if let Ok(segments) = analytic_route(p, sign, opts) {
        let mut path = HomotopyPath::new(segments);
        let cert = path.certify(opts.samples, margin);
        if cert.pass && path.end().distance(&model) <= 1e-9 {
            return Ok(path);
        }
        best = cert.min_abs_det4;
    }
    let (found, searched) = search_route(p, &model, sign, opts, margin);
    found.ok_or(Error::SearchFailed {
        best_min_abs_det4: f64::max(best, searched),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairs::{act, det4, random_group_element, random_pair};

    fn all_recipes() -> Vec<Recipe> {
        let b = Mat2::new(c64(0.3, 0.0), c64(0.2, -0.4), c64(0.2, -0.4), c64(0.9, 0.0));
        vec![
            Recipe::RotateThetaToZero { phi: 1.2, b },
            Recipe::RotateThetaToPi { phi: 0.7, b },
            Recipe::DiagShrinkA { a: 0.4, d: 1.7 },
            Recipe::DiagRescale { d: 1.7 },
            Recipe::FinalAShrink { d: 1.7 },
            Recipe::CaseEPerturb { eps: 0.1 },
            Recipe::CaseCShrink { b: 0.6 },
            Recipe::CaseDLt1 { b: 0.6 },
            Recipe::CaseDGt1 { b: 1.6 },
            Recipe::CaseAShrink { b },
            Recipe::CaseAGt1 { a: flip(), b },
            Recipe::PhaseAlign { tau: 0.4, a_abs: 0.3, b_abs: 0.8, alpha0: 0.2, alpha1: FRAC_PI_2, beta0: -2.5, beta1: -FRAC_PI_2 },
            Recipe::BToZero { tau: 0.4, a: c64(0.0, 0.3), b: c64(0.0, -0.8) },
            Recipe::BToMid { tau: 0.4, a: -0.3, b0: 0.9, b1: 0.8 },
            Recipe::ATauToZero { a0: -0.3, tau0: 0.4 },
            Recipe::LargeBShrink { tau: 0.4, a: 0.2, b: -3.0 },
            Recipe::OffdiagSwap,
            Recipe::OffdiagHalf,
            Recipe::HypFinalBump { eta: 0.5 },
            Recipe::HypFinalBumpSym { eta: 0.5 },
            Recipe::Eli1ToEli3,
            Recipe::Eli3ToEli2Bump { eta: 0.5 },
        ]
    }

    #[test]
    fn bump_shape() {
        assert_eq!(bump(0.0, 0.5), 0.0);
        assert_eq!(bump(1.0, 0.5), 0.0);
        assert!((bump(0.5, 0.5) - 0.5).abs() < 1e-15);
        for &t in &[0.1, 0.3, 0.5, 0.77, 0.95] {
            let h = 1e-6;
            let fd = (bump(t + h, 0.7) - bump(t - h, 0.7)) / (2.0 * h);
            assert!((fd - bump_derivative(t, 0.7)).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn smoothstep_shape() {
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert!((smoothstep(0.5) - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for k in 1..100 {
            let x = k as f64 / 100.0;
            let v = smoothstep(x);
            assert!(v > prev || (x > 0.9 && v == prev));
            prev = v;
            let h = 1e-6;
            let fd = (smoothstep(x + h) - smoothstep(x - h)) / (2.0 * h);
            assert!((fd - smoothstep_derivative(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn recipe_derivatives_match_finite_differences() {
        let h = 1e-6;
        for r in all_recipes() {
            r.validate().unwrap();
            for &t in &[0.13, 0.5, 0.81] {
                let (da, db) = r.derivative(t);
                let (p, m) = (r.eval(t + h), r.eval(t - h));
                let fa = (p.a - m.a).scale_re(0.5 / h);
                let fb = (p.b - m.b).scale_re(0.5 / h);
                assert!((fa - da).norm() < 1e-6, "{} A' at {t}", r.name());
                assert!((fb - db).norm() < 1e-6, "{} B' at {t}", r.name());
            }
        }
    }

    #[test]
    fn recipe_json_names_round_trip() {
        for r in all_recipes() {
            let v = serde_json::to_value(&r).unwrap();
            assert_eq!(v["name"], r.name());
            let back: Recipe = serde_json::from_value(v).unwrap();
            assert_eq!(back, r);
        }
    }

    // Closed forms of det4 along the two bump recipes, expanded by hand.
    fn eli_bump_det(t: f64, x: f64) -> f64 {
        (1.0 - 2.0 * t).powi(2) + x * x * (x * x + 2.0 * t * t)
    }

    fn hyp_bump_det(t: f64, x: f64) -> f64 {
        -((1.0 - 2.0 * t).powi(2) + t * t * x * x)
    }

    #[test]
    fn bump_determinant_formulas() {
        for k in 0..=200 {
            let t = k as f64 / 200.0;
            let x = bump(t, 0.5);
            let p = Recipe::Eli3ToEli2Bump { eta: 0.5 }.eval(t);
            assert!((block_det(&p.a, &p.b).re - eli_bump_det(t, x)).abs() < 1e-9);
            let p = Recipe::HypFinalBump { eta: 0.5 }.eval(t);
            let d = block_det(&p.a, &p.b);
            assert!((d.re - hyp_bump_det(t, x)).abs() < 1e-9, "t={t}");
            assert!(d.im.abs() < 1e-12);
        }
    }

    #[test]
    fn eli_bump_certificate() {
        let path = HomotopyPath::new(vec![Segment::Catalog(Recipe::Eli3ToEli2Bump { eta: 0.5 })]);
        let cert = verify_nondegenerate(&path, 1001, DEFAULT_MARGIN);
        assert!(cert.pass);
        assert_eq!(cert.sign, 1);
        // Independent minimum of the closed form on a fine grid.
        let exact = (0..=200_000)
            .map(|k| {
                let t = k as f64 / 200_000.0;
                eli_bump_det(t, bump(t, 0.5))
            })
            .fold(f64::INFINITY, f64::min);
        assert!((cert.min_abs_det4 - exact).abs() < 1e-6, "{} vs {exact}", cert.min_abs_det4);

        let flat = HomotopyPath::new(vec![Segment::Catalog(Recipe::Eli3ToEli2Bump { eta: 0.0 })]);
        let cert = verify_nondegenerate(&flat, DEFAULT_SAMPLES, DEFAULT_MARGIN);
        assert!(!cert.pass);
        assert!((cert.worst_t - 0.5).abs() < 1e-4, "{}", cert.worst_t);
    }

    #[test]
    fn literal_paths_keep_their_sign() {
        let cases = [
            (Recipe::HypFinalBump { eta: 0.5 }, -1),
            (Recipe::HypFinalBumpSym { eta: 0.5 }, -1),
            (Recipe::OffdiagSwap, -1),
            (Recipe::OffdiagHalf, -1),
            (Recipe::Eli1ToEli3, 1),
            (Recipe::CaseCShrink { b: 0.6 }, 1),
            (Recipe::DiagShrinkA { a: 0.4, d: 1.7 }, -1),
            (Recipe::DiagRescale { d: 1.7 }, -1),
            (Recipe::FinalAShrink { d: 1.7 }, -1),
            (Recipe::ATauToZero { a0: -0.3, tau0: 0.4 }, -1),
        ];
        for (r, sign) in cases {
            let path = HomotopyPath::new(vec![Segment::Catalog(r.clone())]);
            let cert = verify_nondegenerate(&path, DEFAULT_SAMPLES, DEFAULT_MARGIN);
            assert!(cert.pass, "{}: {cert:?}", r.name());
            assert_eq!(cert.sign, sign, "{}", r.name());
        }
        let hyp = HomotopyPath::new(vec![Segment::Catalog(Recipe::HypFinalBump { eta: 0.0 })]);
        assert!(!verify_nondegenerate(&hyp, DEFAULT_SAMPLES, DEFAULT_MARGIN).pass);
    }

    #[test]
    fn catalog_lookup() {
        let seg = catalog_segment("eli3-to-eli2-bump", &serde_json::json!({"eta": 0.5})).unwrap();
        assert_eq!(seg.end().distance(&model_pair(Sign::Elliptic).unwrap()), 0.0);
        assert!(matches!(
            catalog_segment("no-such-recipe", &serde_json::json!({})),
            Err(Error::UnknownRecipe(_))
        ));
        assert!(matches!(
            catalog_segment("case-d-lt1", &serde_json::json!({"b": 2.0})),
            Err(Error::OutOfDomain(_))
        ));
        assert!(catalog_segment("eli1-to-eli3", &serde_json::Value::Null).is_ok());
    }

    #[test]
    fn group_path_endpoints() {
        for seed in 0..20 {
            let g = random_group_element(seed);
            let gp = GroupPath::new(&g).unwrap();
            let (g0, _, _) = gp.at(0.0);
            assert!(g0.approx_eq(&GroupElement::identity(), 1e-12));
            let (g1, _, _) = gp.at_interior(1.0);
            assert!(g1.approx_eq(&g, 1e-12), "seed {seed}");
            for k in 0..=20 {
                let (gt, _, _) = gp.at(k as f64 / 20.0);
                assert!(gt.p.det().norm() > 1e-3);
            }
            let base = random_pair(seed, 1.0);
            let seg = Segment::GroupAction { base, g };
            assert_eq!(seg.end(), act(&g, &base).unwrap());
            let h = 1e-6;
            let (da, db) = seg.derivative(0.4);
            let (p, m) = (seg.eval(0.4 + h), seg.eval(0.4 - h));
            assert!(((p.a - m.a).scale_re(0.5 / h) - da).norm() < 1e-6);
            assert!(((p.b - m.b).scale_re(0.5 / h) - db).norm() < 1e-6);
        }
    }

    #[test]
    fn path_parameter_range() {
        let path = HomotopyPath::constant(model_pair(Sign::Hyperbolic).unwrap());
        assert_eq!(path.eval(1.5), Err(Error::ParameterRange(1.5)));
        assert!(path.eval(f64::NAN).is_err());
        assert!(path.eval(0.0).is_ok());
        assert_eq!(model_pair(Sign::Degenerate), Err(Error::DegeneratePair));
    }

    fn check_connection(p: &MatrixPair) -> HomotopyPath {
        let path = connect_to_model(p, &ConnectOptions::default()).unwrap();
        let sign = sign_class(p, SIGN_TOL).tag;
        let cert = path.certificate.unwrap();
        assert!(cert.pass);
        assert_eq!(cert.sign, sign.signum());
        assert!(path.eval(0.0).unwrap().distance(p) <= 1e-9);
        assert!(path.eval(1.0).unwrap().distance(&model_pair(sign).unwrap()) <= 1e-9);
        assert!(path.max_junction_gap() <= 1e-10);
        path
    }

    #[test]
    fn displayed_models_are_identified() {
        let (eli, path) = displayed_model(Sign::Elliptic).unwrap();
        assert_eq!(eli, MatrixPair::raw(Mat2::identity(), Mat2::zeros()));
        assert!(path.certificate.unwrap().pass);
        assert!(path.eval(1.0).unwrap().distance(&model_pair(Sign::Elliptic).unwrap()) < 1e-15);
        let (hyp, path) = displayed_model(Sign::Hyperbolic).unwrap();
        assert_eq!(hyp, model_pair(Sign::Hyperbolic).unwrap());
        assert_eq!(path.segments.len(), 1);
        assert!(displayed_model(Sign::Degenerate).is_err());
    }

    #[test]
    fn models_connect_trivially() {
        for sign in [Sign::Elliptic, Sign::Hyperbolic] {
            let path = check_connection(&model_pair(sign).unwrap());
            assert_eq!(path.segments.len(), 1);
        }
        let zero = MatrixPair::raw(Mat2::zeros(), Mat2::zeros());
        assert_eq!(connect_to_model(&zero, &ConnectOptions::default()), Err(Error::DegeneratePair));
    }

    #[test]
    fn connects_special_pairs() {
        let cases = [
            // A = 0 with B invertible.
            MatrixPair::raw(Mat2::zeros(), diag2(re(2.0), c64(0.0, 3.0))),
            // Scalar cosquare: needs a perturbation first.
            MatrixPair::raw(Mat2::identity(), Mat2::zeros()),
            MatrixPair::raw(Mat2::identity(), diag2(re(0.5), re(3.0))),
            // Jordan-block cosquare.
            MatrixPair::raw(Mat2::new(ZERO, ONE, ONE, I), Mat2::identity().scale_re(0.2)),
            // Large off-diagonal B over a type III A.
            MatrixPair::raw(a_tau(0.5), Mat2::new(c64(0.0, 0.1), c64(0.0, 3.0), c64(0.0, 3.0), c64(0.0, -0.1))),
            // Small scale.
            random_pair(4, 1e-2),
            random_pair(4, 50.0),
        ];
        for p in cases {
            assert_ne!(sign_class(&p, SIGN_TOL).tag, Sign::Degenerate);
            check_connection(&p);
        }
    }

    #[test]
    fn perturbation_is_small_and_generic() {
        let opts = ConnectOptions::default();
        let p = MatrixPair::raw(Mat2::identity(), diag2(re(0.5), re(3.0)));
        let q = perturb_generic(&p, 1e-2, &opts).unwrap();
        assert!(q.distance(&p) <= 1e-2 * p.scale() + 1e-15);
        assert!(normal_form(&q, opts.tol).is_ok());
        let generic = random_pair(1, 1.0);
        assert_eq!(perturb_generic(&generic, 1e-2, &opts).unwrap(), generic);
    }

    #[test]
    fn random_pairs_connect() {
        for seed in 0..40 {
            let p = random_pair(seed, 1.0);
            if sign_class(&p, SIGN_TOL).det4_normalized.abs() < 1e-3 {
                continue;
            }
            check_connection(&p);
        }
    }

    #[test]
    fn sign_preserved_by_group_segment() {
        let p = random_pair(8, 1.0);
        let g = random_group_element(8);
        let path = HomotopyPath::new(vec![Segment::GroupAction { base: p, g }]);
        let cert = verify_nondegenerate(&path, 256, 0.0);
        assert_eq!(cert.sign, if det4(&p) > 0.0 { 1 } else { -1 });
    }

    #[test]
    fn path_json_round_trip() {
        let p = random_pair(2, 1.0);
        let path = connect_to_model(&p, &ConnectOptions::default()).unwrap();
        let s = crate::json::to_string(&path).unwrap();
        let back: HomotopyPath = serde_json::from_str(&s).unwrap();
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            assert!(back.eval(t).unwrap().distance(&path.eval(t).unwrap()) < 1e-15);
        }
    }
}
