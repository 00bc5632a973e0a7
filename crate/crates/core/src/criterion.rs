//! Violability criterion for the two-measurement, three-preparation PAM
//! inequality `S = |E11 + E12 + E21 - E22 - E31| <= 3`.
//!
//! Pure preparations are described by half-angles `theta_i in [0, pi/2]`
//! with `r1.r2 = cos 2theta1`, `r2.r3 = cos 2theta2` and `r1.r3 = cos 2theta3`.
//! Maximizing `S` over the two measurement directions gives
//! `|r1 + r2 - r3| + |r1 - r2|`, and relabeling the preparations produces the
//! two further candidates.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use crate::error::{PamError, Result};
use crate::qubit::{BlochVector, DensityMatrix, Ket, Mixture};
use crate::tolerance::TOL;

/// Classical bound of the S inequality.
pub const S_CLASSICAL_BOUND: f64 = 3.0;

/// Three qubit preparations with cached Bloch vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTriple {
    states: [DensityMatrix; 3],
    blochs: [BlochVector; 3],
}

impl StateTriple {
    pub fn new(rho1: DensityMatrix, rho2: DensityMatrix, rho3: DensityMatrix) -> Self {
        let blochs = [rho1.bloch(), rho2.bloch(), rho3.bloch()];
        StateTriple { states: [rho1, rho2, rho3], blochs }
    }

    pub fn from_kets(k1: &Ket, k2: &Ket, k3: &Ket) -> Self {
        StateTriple::new(k1.density(), k2.density(), k3.density())
    }

    pub fn from_blochs(r: [BlochVector; 3]) -> Result<Self> {
        Ok(StateTriple::new(
            DensityMatrix::from_bloch(r[0])?,
            DensityMatrix::from_bloch(r[1])?,
            DensityMatrix::from_bloch(r[2])?,
        ))
    }

    pub fn from_mixtures(m: &[Mixture]) -> Result<Self> {
        match m {
            [a, b, c] => Ok(StateTriple::new(a.density(), b.density(), c.density())),
            _ => Err(PamError::ShapeMismatch(format!("expected 3 states, got {}", m.len()))),
        }
    }

    pub fn states(&self) -> &[DensityMatrix; 3] {
        &self.states
    }

    pub fn blochs(&self) -> [BlochVector; 3] {
        self.blochs
    }

    pub fn is_pure(&self) -> bool {
        self.blochs.iter().all(|r| r.norm() >= 1.0 - TOL.purity)
    }
}

/// Pairwise half-angles of a pure triple, each in `[0, pi/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleTriple {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl AngleTriple {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Result<Self> {
        for t in [theta1, theta2, theta3] {
            if !t.is_finite() {
                return Err(PamError::NonFinite("angle"));
            }
            if !(-TOL.validation..=FRAC_PI_2 + TOL.validation).contains(&t) {
                return Err(PamError::AngleOutOfRange(t));
            }
        }
        let clamp = |t: f64| t.clamp(0.0, FRAC_PI_2);
        Ok(AngleTriple { theta1: clamp(theta1), theta2: clamp(theta2), theta3: clamp(theta3) })
    }

    /// `(cos 2theta1, cos 2theta2, cos 2theta3)`.
    pub fn cosines(&self) -> [f64; 3] {
        [(2.0 * self.theta1).cos(), (2.0 * self.theta2).cos(), (2.0 * self.theta3).cos()]
    }

    /// Angles of the relabeled triple.
    pub fn permuted(&self, labeling: Labeling) -> AngleTriple {
        // theta of pair (a, b) in the original indexing.
        let pair = |a: usize, b: usize| match (a.min(b), a.max(b)) {
            (0, 1) => self.theta1,
            (1, 2) => self.theta2,
            (0, 2) => self.theta3,
            _ => unreachable!(),
        };
        let [a, b, c] = labeling.order();
        AngleTriple { theta1: pair(a, b), theta2: pair(b, c), theta3: pair(a, c) }
    }

    /// Three unit vectors with these pairwise angles, if they exist.
    pub fn realize(&self) -> Option<[BlochVector; 3]> {
        if !gram_feasible(self) {
            return None;
        }
        let [c1, c2, c3] = self.cosines();
        let s1 = (2.0 * self.theta1).sin();
        let r1 = BlochVector::Z;
        let r2 = BlochVector::new(s1, 0.0, c1);
        let x = if s1 > 1e-12 { (c2 - c1 * c3) / s1 } else { (1.0 - c3 * c3).max(0.0).sqrt() };
        let y = (1.0 - x * x - c3 * c3).max(0.0).sqrt();
        let r3 = BlochVector::new(x, y, c3).normalized_or(BlochVector::Z);
        Some([r1, r2, r3])
    }
}

impl fmt::Display for AngleTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6}, {:.6})", self.theta1, self.theta2, self.theta3)
    }
}

/// Which preparation plays the role of the third (subtracted) state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Labeling {
    /// `(1, 2, 3)`: `S_max`.
    Original,
    /// `(1, 3, 2)`: `S'_max`.
    Prime,
    /// `(2, 3, 1)`: `S''_max`.
    DoublePrime,
}

impl Labeling {
    pub const ALL: [Labeling; 3] = [Labeling::Original, Labeling::Prime, Labeling::DoublePrime];

    /// Zero-based indices of the original states in their new positions.
    pub fn order(self) -> [usize; 3] {
        match self {
            Labeling::Original => [0, 1, 2],
            Labeling::Prime => [0, 2, 1],
            Labeling::DoublePrime => [1, 2, 0],
        }
    }

    pub fn apply<T: Copy>(self, items: [T; 3]) -> [T; 3] {
        let [a, b, c] = self.order();
        [items[a], items[b], items[c]]
    }

    pub fn label(self) -> &'static str {
        match self {
            Labeling::Original => "S_max",
            Labeling::Prime => "S'_max",
            Labeling::DoublePrime => "S''_max",
        }
    }
}

/// Outcome of the criterion for a pure triple.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub angles: AngleTriple,
    /// `(S_max, S'_max, S''_max)`.
    pub s_candidates: [f64; 3],
    pub best: f64,
    pub violates: bool,
    pub best_labeling: Labeling,
    pub q1: BlochVector,
    pub q2: BlochVector,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [s, sp, spp] = self.s_candidates;
        writeln!(f, "angles (theta1, theta2, theta3) = {}", self.angles)?;
        writeln!(f, "S_max = {s:.4}, S'_max = {sp:.4}, S''_max = {spp:.4}")?;
        writeln!(f, "best_s = {:.4} ({})", self.best, self.best_labeling.label())?;
        writeln!(f, "violating = {}", self.violates)?;
        write!(f, "q1 = {}, q2 = {}", self.q1, self.q2)
    }
}

pub fn angles_from_triple(t: &StateTriple) -> Result<AngleTriple> {
    for (index, r) in t.blochs.iter().enumerate() {
        let norm = r.norm();
        if norm < 1.0 - TOL.purity {
            return Err(PamError::PurityRequired { index, norm });
        }
    }
    let [r1, r2, r3] = t.blochs.map(|r| r.normalized_or(BlochVector::Z));
    let half = |d: f64| d.clamp(-1.0, 1.0).acos() / 2.0;
    Ok(AngleTriple { theta1: half(r1.dot(r2)), theta2: half(r2.dot(r3)), theta3: half(r1.dot(r3)) })
}

/// Determinant of the Gram matrix with unit diagonal and off-diagonals
/// `cos 2theta_i`.
pub fn gram_determinant(a: &AngleTriple) -> f64 {
    let [x, y, z] = a.cosines();
    1.0 + 2.0 * x * y * z - x * x - y * y - z * z
}

pub fn gram_feasible(a: &AngleTriple) -> bool {
    gram_determinant(a) >= -TOL.gram
}

/// The three relabeled closed-form maxima for a feasible angle triple.
pub fn s_max_candidates(a: &AngleTriple) -> Result<[f64; 3]> {
    if !gram_feasible(a) {
        return Err(PamError::InfeasibleAngles(a.theta1, a.theta2, a.theta3));
    }
    let [c1, c2, c3] = a.cosines();
    let term = |same: f64, x: f64, y: f64, theta: f64| {
        (3.0 + 2.0 * same - 2.0 * x - 2.0 * y).max(0.0).sqrt() + 2.0 * theta.sin()
    };
    Ok([
        term(c1, c2, c3, a.theta1),
        term(c3, c2, c1, a.theta3),
        term(c2, c1, c3, a.theta2),
    ])
}

/// Largest candidate with ties resolved in labeling order.
pub fn best_candidate(c: &[f64; 3]) -> (Labeling, f64) {
    let mut best = (Labeling::Original, c[0]);
    for (labeling, &v) in Labeling::ALL.iter().zip(c.iter()).skip(1) {
        if v > best.1 {
            best = (*labeling, v);
        }
    }
    best
}

pub fn criterion_verdict(t: &StateTriple) -> Result<CriterionReport> {
    let angles = angles_from_triple(t)?;
    let s_candidates = s_max_candidates(&angles)?;
    let (best_labeling, best) = best_candidate(&s_candidates);
    let [r1, r2, r3] = best_labeling.apply(t.blochs);
    let (q1, q2) = optimal_directions(r1, r2, r3);
    Ok(CriterionReport {
        angles,
        s_candidates,
        best,
        violates: best > S_CLASSICAL_BOUND,
        best_labeling,
        q1,
        q2,
    })
}

/// `q1 ~ r1 + r2 - r3`, `q2 ~ r1 - r2`; a vanishing numerator defaults to +z.
pub fn optimal_directions(
    r1: BlochVector,
    r2: BlochVector,
    r3: BlochVector,
) -> (BlochVector, BlochVector) {
    (
        (r1 + r2 - r3).normalized_or(BlochVector::Z),
        (r1 - r2).normalized_or(BlochVector::Z),
    )
}

/// `S` for given Bloch vectors and measurement directions (dot-product form).
pub fn s_value(r: [BlochVector; 3], q1: BlochVector, q2: BlochVector) -> f64 {
    let e = |j: usize, q: BlochVector| r[j].dot(q);
    (e(0, q1) + e(0, q2) + e(1, q1) - e(1, q2) - e(2, q1)).abs()
}

/// Maximum of `S` over unit measurement directions for a fixed labeling;
/// valid for mixed states too.
pub fn s_max_general(r1: BlochVector, r2: BlochVector, r3: BlochVector) -> f64 {
    (r1 + r2 - r3).norm() + (r1 - r2).norm()
}

/// `s_max_general` for each of the three labelings.
pub fn s_max_general_candidates(r: [BlochVector; 3]) -> [f64; 3] {
    Labeling::ALL.map(|l| {
        let [a, b, c] = l.apply(r);
        s_max_general(a, b, c)
    })
}
