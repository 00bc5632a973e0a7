//! JSON description of qubit preparations:
//! `{"ket": [[re, im], [re, im]]}`, `{"bloch": [x, y, z]}` or
//! `{"mixture": [{"weight": w, "ket": [[re, im], [re, im]]}, ...]}`.
//!
//! Kets typed with a few significant digits are rescaled to unit norm as long
//! as their squared norm is within `Tolerances::ket_input` of one.

use serde::{Deserialize, Serialize};

use crate::error::{PamError, Result};
use crate::qubit::{BlochVector, Complex, DensityMatrix, Ket, Mixture};
use crate::tolerance::TOL;

pub type KetSpec = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum StateSpec {
    Ket(KetSpec),
    Bloch([f64; 3]),
    Mixture(Vec<MixtureComponent>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub ket: KetSpec,
}

pub fn ket_from_spec(spec: &KetSpec) -> Result<Ket> {
    let a = Complex::new(spec[0][0], spec[0][1]);
    let b = Complex::new(spec[1][0], spec[1][1]);
    let norm_sqr = a.norm_sqr() + b.norm_sqr();
    if norm_sqr.is_finite() && (norm_sqr - 1.0).abs() > TOL.ket_input {
        return Err(PamError::NotNormalized { norm_sqr });
    }
    Ket::normalized(a, b)
}

pub fn ket_to_spec(k: &Ket) -> KetSpec {
    let [a, b] = k.amplitudes();
    [[a.re, a.im], [b.re, b.im]]
}

impl StateSpec {
    pub fn to_mixture(&self) -> Result<Mixture> {
        match self {
            StateSpec::Ket(k) => Ok(Mixture::pure(ket_from_spec(k)?)),
            StateSpec::Bloch(r) => {
                Ok(Mixture::from_density(&DensityMatrix::from_bloch(BlochVector::from_array(*r))?))
            }
            StateSpec::Mixture(parts) => Mixture::new(
                parts
                    .iter()
                    .map(|p| ket_from_spec(&p.ket).map(|k| (p.weight, k)))
                    .collect::<Result<_>>()?,
            ),
        }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        self.to_mixture().map(|m| m.density())
    }

    /// Unit direction for use as a measurement axis.
    pub fn to_direction(&self) -> Result<BlochVector> {
        let r = self.to_density()?.bloch();
        let n = r.norm();
        if n < 1.0 - TOL.purity {
            return Err(PamError::NonUnitDirection(n));
        }
        Ok(r * (1.0 / n))
    }

    pub fn from_mixture(m: &Mixture) -> StateSpec {
        match m.components() {
            [(_, k)] => StateSpec::Ket(ket_to_spec(k)),
            parts => StateSpec::Mixture(
                parts.iter().map(|(w, k)| MixtureComponent { weight: *w, ket: ket_to_spec(k) }).collect(),
            ),
        }
    }
}

pub fn parse_state(text: &str) -> Result<Mixture> {
    serde_json::from_str::<StateSpec>(text)?.to_mixture()
}
