//! General linear PAM witnesses `|sum_jk c_jk E_jk|`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PamError, Result};
use crate::qubit::{BlochVector, DensityMatrix, MeasurementBasis};
use crate::tolerance::TOL;

/// Largest number of deterministic strategies `classical_bound` will visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 100_000_000;

/// Coefficient matrix `c[j][k]` (preparation `j`, measurement `k`) together
/// with the dimension of the classical message it is bounded against.
#[derive(Debug, Clone, PartialEq)]
pub struct PamWitness {
    name: Option<String>,
    coefficients: Vec<Vec<f64>>,
    message_dimension: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WitnessDef {
    coefficients: Vec<Vec<f64>>,
    #[serde(default = "default_dimension")]
    message_dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

fn default_dimension() -> usize {
    2
}

impl PamWitness {
    pub fn new(coefficients: Vec<Vec<f64>>, message_dimension: usize) -> Result<Self> {
        let k = coefficients.first().map_or(0, Vec::len);
        if coefficients.is_empty() || k == 0 {
            return Err(PamError::InvalidWitness("need at least one preparation and one measurement".into()));
        }
        if coefficients.iter().any(|row| row.len() != k) {
            return Err(PamError::InvalidWitness("ragged coefficient matrix".into()));
        }
        if coefficients.iter().flatten().any(|c| !c.is_finite()) {
            return Err(PamError::InvalidWitness("non-finite coefficient".into()));
        }
        if message_dimension == 0 {
            return Err(PamError::InvalidWitness("message dimension must be positive".into()));
        }
        Ok(PamWitness { name: None, coefficients, message_dimension })
    }

    fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    /// `S = |E11 + E12 + E21 - E22 - E31|`.
    pub fn s_witness() -> Self {
        PamWitness::new(vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 0.0]], 2)
            .unwrap()
            .named("S")
    }

    /// `T = |E11 + E12 - E22 + E23 - E31 - E33|`.
    pub fn t_witness() -> Self {
        PamWitness::new(
            vec![vec![1.0, 1.0, 0.0], vec![0.0, -1.0, 1.0], vec![-1.0, 0.0, -1.0]],
            2,
        )
        .unwrap()
        .named("T")
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "S" | "s" => Ok(PamWitness::s_witness()),
            "T" | "t" => Ok(PamWitness::t_witness()),
            other => Err(PamError::UnknownWitness(other.to_string())),
        }
    }

    /// Parses `{"coefficients": [[...]], "message_dimension": 2}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let def: WitnessDef = serde_json::from_str(text)?;
        PamWitness::from_value_def(def)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        match value {
            serde_json::Value::String(name) => PamWitness::builtin(&name),
            other => PamWitness::from_value_def(serde_json::from_value(other)?),
        }
    }

    fn from_value_def(def: WitnessDef) -> Result<Self> {
        let mut w = PamWitness::new(def.coefficients, def.message_dimension)?;
        w.name = def.name;
        Ok(w)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&WitnessDef {
            coefficients: self.coefficients.clone(),
            message_dimension: self.message_dimension,
            name: self.name.clone(),
        })
        .expect("plain data serializes")
    }

    pub fn with_message_dimension(mut self, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(PamError::InvalidWitness("message dimension must be positive".into()));
        }
        self.message_dimension = d;
        Ok(self)
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let c = self.coefficients.iter().map(|row| row.iter().map(|c| c * factor).collect()).collect();
        PamWitness::new(c, self.message_dimension)
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    pub fn coefficient(&self, j: usize, k: usize) -> f64 {
        self.coefficients[j][k]
    }

    pub fn preparations(&self) -> usize {
        self.coefficients.len()
    }

    pub fn measurements(&self) -> usize {
        self.coefficients[0].len()
    }

    pub fn message_dimension(&self) -> usize {
        self.message_dimension
    }

    fn check_shape(&self, j: usize, k: usize) -> Result<()> {
        if j != self.preparations() || k != self.measurements() {
            return Err(PamError::ShapeMismatch(format!(
                "witness is {}x{}, got {}x{}",
                self.preparations(),
                self.measurements(),
                j,
                k
            )));
        }
        Ok(())
    }
}

impl fmt::Display for PamWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (j, row) in self.coefficients.iter().enumerate() {
            for (k, &c) in row.iter().enumerate() {
                if c != 0.0 {
                    terms.push(format!("{c:+}*E{}{}", j + 1, k + 1));
                }
            }
        }
        let body = if terms.is_empty() { "0".to_string() } else { terms.join(" ") };
        match &self.name {
            Some(n) => write!(f, "{n} = |{body}|"),
            None => write!(f, "|{body}|"),
        }
    }
}

/// `E_jk` values, each in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationTable {
    values: Vec<Vec<f64>>,
}

impl ExpectationTable {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        let k = values.first().map_or(0, Vec::len);
        if values.iter().any(|row| row.len() != k) {
            return Err(PamError::ShapeMismatch("ragged expectation table".into()));
        }
        for v in values.iter().flatten() {
            if !v.is_finite() || v.abs() > 1.0 + TOL.validation {
                return Err(PamError::ShapeMismatch(format!("expectation {v} outside [-1, 1]")));
            }
        }
        let values = values.into_iter().map(|row| row.into_iter().map(|v| v.clamp(-1.0, 1.0)).collect()).collect();
        Ok(ExpectationTable { values })
    }

    pub fn zeros(j: usize, k: usize) -> Self {
        ExpectationTable { values: vec![vec![0.0; k]; j] }
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[j][k]
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn preparations(&self) -> usize {
        self.values.len()
    }

    pub fn measurements(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

/// Classical model extremal point: message `encoding[j]` for preparation `j`,
/// outcome `decoding[m][k]` for message `m` and measurement `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicStrategy {
    pub encoding: Vec<usize>,
    pub decoding: Vec<Vec<i8>>,
}

impl DeterministicStrategy {
    /// Strategy number `(enc, dec)` in enumeration order: encodings in base-d
    /// counting (preparation 0 least significant), decodings in base-2 with
    /// bit `m*K + k` set meaning outcome -1.
    pub fn from_indices(enc: u128, dec: u128, j: usize, k: usize, d: usize) -> Self {
        let mut e = enc;
        let encoding = (0..j)
            .map(|_| {
                let m = (e % d as u128) as usize;
                e /= d as u128;
                m
            })
            .collect();
        let decoding = (0..d)
            .map(|m| (0..k).map(|kk| if dec >> (m * k + kk) & 1 == 1 { -1 } else { 1 }).collect())
            .collect();
        DeterministicStrategy { encoding, decoding }
    }

    pub fn table(&self) -> ExpectationTable {
        ExpectationTable {
            values: self
                .encoding
                .iter()
                .map(|&m| self.decoding[m].iter().map(|&b| b as f64).collect())
                .collect(),
        }
    }
}

pub fn expectation_table(states: &[DensityMatrix], bases: &[MeasurementBasis]) -> Result<ExpectationTable> {
    if states.is_empty() || bases.is_empty() {
        return Err(PamError::ShapeMismatch("need at least one state and one basis".into()));
    }
    let values = states
        .iter()
        .map(|rho| {
            let r = rho.bloch();
            bases
                .iter()
                .map(|m| {
                    let e = m.expectation(rho);
                    debug_assert!((e - r.dot(m.direction())).abs() < 1e-12);
                    e
                })
                .collect()
        })
        .collect();
    ExpectationTable::new(values)
}

pub fn witness_value(w: &PamWitness, e: &ExpectationTable) -> Result<f64> {
    w.check_shape(e.preparations(), e.measurements())?;
    let total: f64 = w
        .coefficients
        .iter()
        .zip(&e.values)
        .flat_map(|(c, v)| c.iter().zip(v).map(|(c, v)| c * v))
        .sum();
    Ok(total.abs())
}

/// Number of deterministic strategies, `d^J * 2^(d K)`, if it fits in `u128`.
pub fn strategy_count(w: &PamWitness) -> Option<u128> {
    let d = w.message_dimension as u128;
    let enc = d.checked_pow(u32::try_from(w.preparations()).ok()?)?;
    let bits = u32::try_from(w.message_dimension.checked_mul(w.measurements())?).ok()?;
    let dec = 1u128.checked_shl(bits).filter(|_| bits < 128)?;
    enc.checked_mul(dec)
}

pub fn classical_bound(w: &PamWitness) -> Result<f64> {
    classical_optimum(w, DEFAULT_ENUMERATION_CAP).map(|(v, _)| v)
}

/// Maximum witness value over every deterministic strategy, and the first
/// strategy (in enumeration order) attaining it.
pub fn classical_optimum(w: &PamWitness, cap: u128) -> Result<(f64, DeterministicStrategy)> {
    let count = strategy_count(w).unwrap_or(u128::MAX);
    if count > cap {
        return Err(PamError::EnumerationTooLarge { count, cap });
    }
    let (j, k, d) = (w.preparations(), w.measurements(), w.message_dimension);
    let encodings = (d as u128).pow(j as u32);
    let decodings = 1u128 << (d * k);

    let best_for_encoding = |enc: u128| -> (f64, u128, u128) {
        let strategy = DeterministicStrategy::from_indices(enc, 0, j, k, d);
        // Coefficients aggregated per message: A[m][k] = sum_{j: enc(j) = m} c_jk.
        let mut agg = vec![vec![0.0; k]; d];
        for (row, &m) in w.coefficients.iter().zip(&strategy.encoding) {
            for (a, c) in agg[m].iter_mut().zip(row) {
                *a += c;
            }
        }
        let mut best = (f64::NEG_INFINITY, enc, 0);
        for dec in 0..decodings {
            let mut total = 0.0;
            for (m, row) in agg.iter().enumerate() {
                for (kk, a) in row.iter().enumerate() {
                    if dec >> (m * k + kk) & 1 == 1 {
                        total -= a;
                    } else {
                        total += a;
                    }
                }
            }
            let v = total.abs();
            if v > best.0 {
                best = (v, enc, dec);
            }
        }
        best
    };

    let pick = |a: (f64, u128, u128), b: (f64, u128, u128)| {
        if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
            b
        } else {
            a
        }
    };
    let (value, enc, dec) = (0..encodings as u64)
        .into_par_iter()
        .map(|e| best_for_encoding(e as u128))
        .reduce(|| (f64::NEG_INFINITY, u128::MAX, u128::MAX), pick);
    Ok((value, DeterministicStrategy::from_indices(enc, dec, j, k, d)))
}

/// Witness value with `E_jk = r_j . q_k`.
pub fn witness_at_directions(w: &PamWitness, blochs: &[BlochVector], directions: &[BlochVector]) -> Result<f64> {
    w.check_shape(blochs.len(), directions.len())?;
    let mut total = 0.0;
    for (j, r) in blochs.iter().enumerate() {
        for (k, q) in directions.iter().enumerate() {
            total += w.coefficients[j][k] * r.dot(*q);
        }
    }
    Ok(total.abs())
}

/// `sum_k |v_k|` with `v_k = sum_j c_jk r_j`, attained at `q_k = v_k / |v_k|`
/// (zero sums default to +z).
pub fn quantum_max_fixed_states(w: &PamWitness, blochs: &[BlochVector]) -> Result<(f64, Vec<BlochVector>)> {
    if blochs.len() != w.preparations() {
        return Err(PamError::ShapeMismatch(format!(
            "witness has {} preparations, got {} states",
            w.preparations(),
            blochs.len()
        )));
    }
    let mut value = 0.0;
    let directions = (0..w.measurements())
        .map(|k| {
            let v = blochs
                .iter()
                .enumerate()
                .fold(BlochVector::ZERO, |acc, (j, r)| acc + *r * w.coefficients[j][k]);
            value += v.norm();
            v.normalized_or(BlochVector::Z)
        })
        .collect();
    Ok((value, directions))
}

pub fn quantum_value_at_bases(w: &PamWitness, states: &[DensityMatrix], bases: &[MeasurementBasis]) -> Result<f64> {
    w.check_shape(states.len(), bases.len())?;
    witness_value(w, &expectation_table(states, bases)?)
}
