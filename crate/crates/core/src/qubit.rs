//! Single-qubit algebra: kets, density matrices, Bloch vectors and binary
//! projective measurements.
//!
//! Pauli convention: `rho = (I + r . sigma) / 2` with the standard matrices, so
//! `r_x = 2 Re(rho_01)`, `r_y = -2 Im(rho_01)` and `r_z = rho_00 - rho_11`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{PamError, Result};
use crate::tolerance::TOL;

pub type Complex = Complex64;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

fn finite(c: Complex) -> bool {
    c.re.is_finite() && c.im.is_finite()
}

/// Real 3-vector on or inside the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ZERO: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 0.0 };
    pub const Z: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        BlochVector::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Unit vector with polar angle `theta` from +z and azimuth `phi`.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        BlochVector::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
    }

    pub fn dot(self, other: BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: BlochVector) -> BlochVector {
        BlochVector::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Unit vector along `self`, or `fallback` when the norm vanishes.
    pub fn normalized_or(self, fallback: BlochVector) -> BlochVector {
        let n = self.norm();
        if n <= f64::EPSILON {
            fallback
        } else {
            self * (1.0 / n)
        }
    }

    pub fn distance(self, other: BlochVector) -> f64 {
        (self - other).norm()
    }
}

impl Add for BlochVector {
    type Output = BlochVector;
    fn add(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for BlochVector {
    type Output = BlochVector;
    fn sub(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for BlochVector {
    type Output = BlochVector;
    fn neg(self) -> BlochVector {
        BlochVector::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for BlochVector {
    type Output = BlochVector;
    fn mul(self, s: f64) -> BlochVector {
        BlochVector::new(self.x * s, self.y * s, self.z * s)
    }
}

impl fmt::Display for BlochVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.4}, {:.4}, {:.4})", self.x, self.y, self.z)
    }
}

/// Dense 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const PAULI_X: Mat2 = Mat2([[ZERO, ONE], [ONE, ZERO]]);
    pub const PAULI_Y: Mat2 = Mat2([
        [ZERO, Complex::new(0.0, -1.0)],
        [Complex::new(0.0, 1.0), ZERO],
    ]);
    pub const PAULI_Z: Mat2 = Mat2([[ONE, ZERO], [ZERO, Complex::new(-1.0, 0.0)]]);

    pub fn new(a: Complex, b: Complex, c: Complex, d: Complex) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.0[row][col]
    }

    pub fn trace(&self) -> Complex {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn adjoint(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn scale(&self, s: Complex) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn apply(&self, v: [Complex; 2]) -> [Complex; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|&c| finite(c))
    }

    pub fn outer(u: [Complex; 2], v: [Complex; 2]) -> Mat2 {
        Mat2([
            [u[0] * v[0].conj(), u[0] * v[1].conj()],
            [u[1] * v[0].conj(), u[1] * v[1].conj()],
        ])
    }

    /// `(I + r . sigma) / 2` without validation.
    pub fn from_bloch_unchecked(r: BlochVector) -> Mat2 {
        Mat2([
            [Complex::new((1.0 + r.z) / 2.0, 0.0), Complex::new(r.x / 2.0, -r.y / 2.0)],
            [Complex::new(r.x / 2.0, r.y / 2.0), Complex::new((1.0 - r.z) / 2.0, 0.0)],
        ])
    }

    /// Largest elementwise deviation from unitarity, `|U^dagger U - I|_F`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self - Mat2::IDENTITY).norm()
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

/// Normalized qubit pure state. Equality up to global phase is exposed via
/// [`Ket::same_state`]; the derived `PartialEq` compares raw amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ket {
    amplitudes: [Complex; 2],
}

impl Ket {
    /// Validated constructor: amplitudes must be finite with unit norm.
    pub fn new(a: Complex, b: Complex) -> Result<Ket> {
        if !finite(a) || !finite(b) {
            return Err(PamError::NonFinite("ket amplitudes"));
        }
        let norm_sqr = a.norm_sqr() + b.norm_sqr();
        if (norm_sqr - 1.0).abs() > TOL.validation {
            return Err(PamError::NotNormalized { norm_sqr });
        }
        Ok(Ket { amplitudes: [a, b] })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(a: Complex, b: Complex) -> Result<Ket> {
        if !finite(a) || !finite(b) {
            return Err(PamError::NonFinite("ket amplitudes"));
        }
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if n <= f64::EPSILON {
            return Err(PamError::ZeroVector);
        }
        Ok(Ket { amplitudes: [a / n, b / n] })
    }

    pub fn real(a: f64, b: f64) -> Result<Ket> {
        Ket::new(Complex::new(a, 0.0), Complex::new(b, 0.0))
    }

    pub fn zero() -> Ket {
        Ket { amplitudes: [ONE, ZERO] }
    }

    pub fn one() -> Ket {
        Ket { amplitudes: [ZERO, ONE] }
    }

    pub fn plus() -> Ket {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Ket { amplitudes: [Complex::new(h, 0.0), Complex::new(h, 0.0)] }
    }

    /// The pure state whose Bloch vector is the unit direction `r`, written
    /// as `(cos(t/2), e^{i p} sin(t/2))`.
    pub fn from_bloch(r: BlochVector) -> Result<Ket> {
        let n = r.norm();
        if !r.is_finite() {
            return Err(PamError::NonFinite("Bloch vector"));
        }
        if (n - 1.0).abs() > TOL.validation {
            return Err(PamError::NonUnitDirection(n));
        }
        let z = (r.z / n).clamp(-1.0, 1.0);
        // cos(t/2) and sin(t/2) via half-angle forms, stable near the poles.
        let c = ((1.0 + z) / 2.0).sqrt();
        let s = ((1.0 - z) / 2.0).sqrt();
        let phi = r.y.atan2(r.x);
        Ok(Ket { amplitudes: [Complex::new(c, 0.0), Complex::from_polar(s, phi)] })
    }

    pub fn amplitudes(&self) -> [Complex; 2] {
        self.amplitudes
    }

    pub fn with_phase(&self, phi: f64) -> Ket {
        let p = Complex::from_polar(1.0, phi);
        Ket { amplitudes: [self.amplitudes[0] * p, self.amplitudes[1] * p] }
    }

    pub fn projector(&self) -> Mat2 {
        Mat2::outer(self.amplitudes, self.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix { m: self.projector() }
    }

    pub fn bloch(&self) -> BlochVector {
        let [a, b] = self.amplitudes;
        let off = a * b.conj();
        BlochVector::new(2.0 * off.re, -2.0 * off.im, a.norm_sqr() - b.norm_sqr())
    }

    pub fn inner(&self, other: &Ket) -> Complex {
        self.amplitudes[0].conj() * other.amplitudes[0]
            + self.amplitudes[1].conj() * other.amplitudes[1]
    }

    /// Frobenius distance between the two projectors.
    pub fn projector_distance(&self, other: &Ket) -> f64 {
        (self.projector() - other.projector()).norm()
    }

    /// Physical equality: projectors agree within the ket-equality tolerance.
    pub fn same_state(&self, other: &Ket) -> bool {
        self.projector_distance(other) < TOL.ket_equality
    }

    /// Applies a 2x2 operator and renormalizes (exact for unitaries).
    pub fn transform(&self, u: &Mat2) -> Result<Ket> {
        let [a, b] = u.apply(self.amplitudes);
        Ket::normalized(a, b)
    }
}

impl fmt::Display for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b] = self.amplitudes;
        write!(f, "({:.4}{:+.4}i, {:.4}{:+.4}i)", a.re, a.im, b.re, b.im)
    }
}

/// Hermitian, unit-trace, positive semidefinite 2x2 operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    m: Mat2,
}

impl DensityMatrix {
    pub fn new(m: Mat2) -> Result<DensityMatrix> {
        if !m.is_finite() {
            return Err(PamError::NonFinite("density matrix"));
        }
        let herm = (m - m.adjoint()).norm();
        if herm > TOL.validation {
            return Err(PamError::InvalidDensity(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TOL.validation || tr.im.abs() > TOL.validation {
            return Err(PamError::InvalidDensity(format!("trace {tr} != 1")));
        }
        let (lo, _) = hermitian_eigenvalues(&m);
        if lo < -TOL.validation {
            return Err(PamError::InvalidDensity(format!("negative eigenvalue {lo:e}")));
        }
        Ok(DensityMatrix { m })
    }

    pub fn from_bloch(r: BlochVector) -> Result<DensityMatrix> {
        if !r.is_finite() {
            return Err(PamError::NonFinite("Bloch vector"));
        }
        let n = r.norm();
        if n > 1.0 + TOL.validation {
            return Err(PamError::BlochTooLong(n));
        }
        Ok(DensityMatrix { m: Mat2::from_bloch_unchecked(r) })
    }

    pub fn maximally_mixed() -> DensityMatrix {
        DensityMatrix { m: Mat2::IDENTITY.scale(Complex::new(0.5, 0.0)) }
    }

    /// Convex combination `sum_i w_i |k_i><k_i|`.
    pub fn from_mixture(components: &[(f64, Ket)]) -> Result<DensityMatrix> {
        Mixture::new(components.to_vec()).map(|m| m.density())
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.m
    }

    /// `r_i = Tr(rho sigma_i)`.
    pub fn bloch(&self) -> BlochVector {
        let tr = |p: Mat2| (self.m * p).trace().re;
        BlochVector::new(tr(Mat2::PAULI_X), tr(Mat2::PAULI_Y), tr(Mat2::PAULI_Z))
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        (self.m * self.m).trace().re
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        hermitian_eigenvalues(&self.m)
    }

    pub fn is_pure(&self) -> bool {
        self.bloch().norm() >= 1.0 - TOL.purity
    }

    /// Born probability `Tr(rho P)`.
    pub fn probability(&self, projector: &Mat2) -> f64 {
        (self.m * *projector).trace().re
    }

    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        (self.m - other.m).norm()
    }
}

/// Eigenvalues of a Hermitian 2x2 matrix, ascending.
fn hermitian_eigenvalues(m: &Mat2) -> (f64, f64) {
    let a = m.get(0, 0).re;
    let d = m.get(1, 1).re;
    let b = m.get(0, 1);
    let mean = (a + d) / 2.0;
    let rad = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
    (mean - rad, mean + rad)
}

/// Finite convex mixture of pure states, keeping the preparation recipe that a
/// lab (or the shot simulator) would sample from.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    components: Vec<(f64, Ket)>,
}

impl Mixture {
    pub fn new(components: Vec<(f64, Ket)>) -> Result<Mixture> {
        if components.is_empty() {
            return Err(PamError::InvalidMixture("no components".into()));
        }
        if let Some((w, _)) = components.iter().find(|(w, _)| !w.is_finite() || *w < 0.0) {
            return Err(PamError::InvalidMixture(format!("weight {w} is negative or non-finite")));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > TOL.mixture_weights {
            return Err(PamError::InvalidMixture(format!("weights sum to {total}")));
        }
        Ok(Mixture { components })
    }

    pub fn pure(k: Ket) -> Mixture {
        Mixture { components: vec![(1.0, k)] }
    }

    /// Spectral decomposition: weights `(1 +- |r|)/2` on the kets along `+-r`.
    pub fn from_density(rho: &DensityMatrix) -> Mixture {
        let r = rho.bloch();
        let n = r.norm().min(1.0);
        let axis = r.normalized_or(BlochVector::Z);
        let up = Ket::from_bloch(axis).expect("unit axis");
        let down = Ket::from_bloch(-axis).expect("unit axis");
        let hi = (1.0 + n) / 2.0;
        if 1.0 - hi <= f64::EPSILON {
            Mixture { components: vec![(1.0, up)] }
        } else {
            Mixture { components: vec![(hi, up), (1.0 - hi, down)] }
        }
    }

    pub fn components(&self) -> &[(f64, Ket)] {
        &self.components
    }

    pub fn density(&self) -> DensityMatrix {
        let total: f64 = self.components.iter().map(|(w, _)| w).sum();
        let m = self
            .components
            .iter()
            .map(|(w, k)| k.projector().scale(Complex::new(w / total, 0.0)))
            .fold(Mat2([[ZERO; 2]; 2]), |acc, p| acc + p);
        DensityMatrix { m }
    }
}

/// Two-outcome projective measurement `M_+- = (I +- q . sigma) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementBasis {
    direction: BlochVector,
    plus: Mat2,
    minus: Mat2,
}

impl MeasurementBasis {
    pub fn from_direction(q: BlochVector) -> Result<MeasurementBasis> {
        if !q.is_finite() {
            return Err(PamError::NonFinite("measurement direction"));
        }
        let n = q.norm();
        if (n - 1.0).abs() > TOL.validation {
            return Err(PamError::NonUnitDirection(n));
        }
        Ok(MeasurementBasis {
            direction: q,
            plus: Mat2::from_bloch_unchecked(q),
            minus: Mat2::from_bloch_unchecked(-q),
        })
    }

    /// Basis whose `+1` outcome projects onto `k`.
    pub fn from_plus_ket(k: &Ket) -> MeasurementBasis {
        let q = k.bloch().normalized_or(BlochVector::Z);
        MeasurementBasis::from_direction(q).expect("pure-state Bloch vectors are unit")
    }

    pub fn computational() -> MeasurementBasis {
        MeasurementBasis::from_direction(BlochVector::Z).unwrap()
    }

    pub fn direction(&self) -> BlochVector {
        self.direction
    }

    pub fn plus_projector(&self) -> &Mat2 {
        &self.plus
    }

    pub fn minus_projector(&self) -> &Mat2 {
        &self.minus
    }

    pub fn plus_ket(&self) -> Ket {
        Ket::from_bloch(self.direction).expect("unit direction")
    }

    pub fn minus_ket(&self) -> Ket {
        Ket::from_bloch(-self.direction).expect("unit direction")
    }

    /// `Tr(rho M+) - Tr(rho M-)`.
    pub fn expectation(&self, rho: &DensityMatrix) -> f64 {
        rho.probability(&self.plus) - rho.probability(&self.minus)
    }
}

pub fn ket_to_density(k: &Ket) -> Result<DensityMatrix> {
    let [a, b] = k.amplitudes();
    let norm_sqr = a.norm_sqr() + b.norm_sqr();
    if (norm_sqr - 1.0).abs() > TOL.validation {
        return Err(PamError::NotNormalized { norm_sqr });
    }
    Ok(k.density())
}

pub fn density_to_bloch(rho: &DensityMatrix) -> BlochVector {
    rho.bloch()
}

pub fn bloch_to_density(r: BlochVector) -> Result<DensityMatrix> {
    DensityMatrix::from_bloch(r)
}

pub fn basis_from_direction(q: BlochVector) -> Result<MeasurementBasis> {
    MeasurementBasis::from_direction(q)
}

pub fn expectation(rho: &DensityMatrix, m: &MeasurementBasis) -> f64 {
    m.expectation(rho)
}
