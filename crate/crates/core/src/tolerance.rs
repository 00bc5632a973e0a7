/// Numerical tolerances shared by every module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Input validation: normalization, Hermiticity, trace, positivity.
    pub validation: f64,
    /// Algebraic identities that should hold to rounding error.
    pub identity: f64,
    /// Minimum Bloch length for a state to count as pure.
    pub purity: f64,
    /// Projector distance under which two kets are considered equal.
    pub ket_equality: f64,
    /// Allowed deviation of mixture weights from a unit sum.
    pub mixture_weights: f64,
    /// Slack on the Gram determinant and on square-root radicands.
    pub gram: f64,
    /// How far a hand-typed ket may be from unit norm before it is refused
    /// rather than rescaled.
    pub ket_input: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        validation: 1e-9,
        identity: 1e-12,
        purity: 1e-6,
        ket_equality: 1e-6,
        mixture_weights: 1e-6,
        gram: 1e-9,
        ket_input: 1e-3,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

pub const TOL: Tolerances = Tolerances::DEFAULT;
