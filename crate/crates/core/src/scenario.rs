//! Canned and file-based scenarios: a set of preparations, a witness and
//! optionally the measurement bases actually used.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::criterion::{criterion_verdict, s_max_general_candidates, CriterionReport, StateTriple};
use crate::error::{PamError, Result};
use crate::optics::{estimate_witness, simulate_counts, CountRecord, RunEstimate, ShotConfig};
use crate::qubit::{BlochVector, Complex, DensityMatrix, Ket, MeasurementBasis, Mixture};
use crate::schema::StateSpec;
use crate::witness::{classical_bound, quantum_max_fixed_states, quantum_value_at_bases, PamWitness};

pub const BUILTIN_SCENARIOS: [&str; 3] = ["example", "appendix-s", "appendix-t"];

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub states: Vec<Mixture>,
    pub witness: PamWitness,
    /// Bases the experiment uses; `None` means the closed-form optimum.
    pub bases: Option<Vec<MeasurementBasis>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    name: Option<String>,
    states: Vec<StateSpec>,
    #[serde(default = "default_witness")]
    witness: serde_json::Value,
    #[serde(default)]
    bases: Option<Vec<StateSpec>>,
}

fn default_witness() -> serde_json::Value {
    serde_json::Value::String("S".into())
}

fn ket(a: (f64, f64), b: (f64, f64)) -> Ket {
    Ket::normalized(Complex::new(a.0, a.1), Complex::new(b.0, b.1)).expect("nonzero literal")
}

/// Three mixtures with weights 0.0981 / 0.9019 on orthogonal pairs.
/// Amplitudes are rounded to four digits, not exact constants.
#[allow(clippy::approx_constant)]
pub fn activation_states() -> Vec<Mixture> {
    let pairs = [
        (ket((0.2588, 0.0), (-0.9659, 0.0)), ket((-0.9659, 0.0), (-0.2588, 0.0))),
        (ket((-0.9659, 0.0), (0.2588, 0.0)), ket((0.2588, 0.0), (0.9659, 0.0))),
        (ket((-0.7071, 0.0), (-0.7071, 0.0)), ket((-0.7071, 0.0), (0.7071, 0.0))),
    ];
    pairs
        .into_iter()
        .map(|(a, b)| Mixture::new(vec![(0.0981, a), (0.9019, b)]).expect("weights sum to one"))
        .collect()
}

/// Basis with plus-ket `(cos x, sin x)`.
pub fn linear_basis(x: f64) -> MeasurementBasis {
    MeasurementBasis::from_plus_ket(&Ket::real(x.cos(), x.sin()).expect("unit"))
}

/// `|+>`, `|0>` and `(-i sin(pi/12), cos(pi/12))`.
pub fn worked_example_states() -> Vec<Mixture> {
    let phi = Ket::new(Complex::new(0.0, -(PI / 12.0).sin()), Complex::new((PI / 12.0).cos(), 0.0))
        .expect("unit");
    vec![Mixture::pure(Ket::plus()), Mixture::pure(Ket::zero()), Mixture::pure(phi)]
}

impl Scenario {
    pub fn builtin(name: &str) -> Result<Scenario> {
        match name {
            "example" => {
                let states = worked_example_states();
                let report = criterion_verdict(&StateTriple::from_mixtures(&states)?)?;
                let bases = vec![
                    MeasurementBasis::from_direction(report.q1)?,
                    MeasurementBasis::from_direction(report.q2)?,
                ];
                Ok(Scenario { name: name.into(), states, witness: PamWitness::s_witness(), bases: Some(bases) })
            }
            "appendix-s" => Ok(Scenario {
                name: name.into(),
                states: activation_states(),
                witness: PamWitness::s_witness(),
                bases: Some(vec![linear_basis(PI / 6.0), linear_basis(0.0)]),
            }),
            "appendix-t" => Ok(Scenario {
                name: name.into(),
                states: activation_states(),
                witness: PamWitness::t_witness(),
                bases: Some(vec![linear_basis(PI / 6.0), linear_basis(0.0), linear_basis(PI / 3.0)]),
            }),
            other => Err(PamError::UnknownScenario(other.into())),
        }
    }

    pub fn from_json(text: &str) -> Result<Scenario> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        let states = file.states.iter().map(StateSpec::to_mixture).collect::<Result<Vec<_>>>()?;
        let witness = PamWitness::from_value(file.witness)?;
        if states.len() != witness.preparations() {
            return Err(PamError::ShapeMismatch(format!(
                "{} states for a witness with {} preparations",
                states.len(),
                witness.preparations()
            )));
        }
        let bases = file
            .bases
            .map(|b| {
                b.iter()
                    .map(|s| s.to_direction().and_then(MeasurementBasis::from_direction))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        if let Some(b) = &bases {
            if b.len() != witness.measurements() {
                return Err(PamError::ShapeMismatch(format!(
                    "{} bases for a witness with {} measurements",
                    b.len(),
                    witness.measurements()
                )));
            }
        }
        Ok(Scenario { name: file.name.unwrap_or_else(|| "custom".into()), states, witness, bases })
    }

    /// A built-in name, or else a path to a JSON scenario file.
    pub fn load(name_or_path: &str) -> Result<Scenario> {
        if BUILTIN_SCENARIOS.contains(&name_or_path) {
            return Scenario::builtin(name_or_path);
        }
        let path = Path::new(name_or_path);
        if !path.exists() {
            return Err(PamError::UnknownScenario(name_or_path.into()));
        }
        Scenario::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn densities(&self) -> Vec<DensityMatrix> {
        self.states.iter().map(Mixture::density).collect()
    }

    pub fn blochs(&self) -> Vec<BlochVector> {
        self.states.iter().map(|m| m.density().bloch()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSummary {
    pub config: ShotConfig,
    pub estimate: RunEstimate,
    pub counts: Vec<CountRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub name: String,
    pub witness: PamWitness,
    pub classical_bound: f64,
    /// Closed-form maximum over measurements for these states.
    pub quantum_max: f64,
    pub max_directions: Vec<BlochVector>,
    pub value_at_bases: Option<f64>,
    /// Criterion output for pure three-state S scenarios.
    pub criterion: Option<CriterionReport>,
    /// `|r1 + r2 - r3| + |r1 - r2|` for each labeling of a three-state S
    /// scenario (pure or mixed).
    pub s_general_candidates: Option<[f64; 3]>,
    pub violates: bool,
    pub simulation: Option<SimulationSummary>,
}

pub fn run_scenario(scenario: &Scenario, simulate: Option<ShotConfig>) -> Result<ScenarioReport> {
    let w = &scenario.witness;
    let blochs = scenario.blochs();
    let densities = scenario.densities();
    let classical = classical_bound(w)?;
    let (quantum_max, max_directions) = quantum_max_fixed_states(w, &blochs)?;
    let value_at_bases = scenario
        .bases
        .as_ref()
        .map(|b| quantum_value_at_bases(w, &densities, b))
        .transpose()?;

    let is_s = w.coefficients() == PamWitness::s_witness().coefficients();
    let (criterion, s_general_candidates) = if is_s && scenario.states.len() == 3 {
        let triple = StateTriple::from_mixtures(&scenario.states)?;
        let crit = if triple.is_pure() { Some(criterion_verdict(&triple)?) } else { None };
        (crit, Some(s_max_general_candidates(triple.blochs())))
    } else {
        (None, None)
    };
    // Certified potential violation: the best achievable value over all
    // relabelings and measurements for these states.
    let best_possible = s_general_candidates
        .map(|c| c.into_iter().fold(quantum_max, f64::max))
        .unwrap_or(quantum_max);

    let simulation = simulate
        .map(|cfg| -> Result<SimulationSummary> {
            let bases = match &scenario.bases {
                Some(b) => b.clone(),
                None => max_directions
                    .iter()
                    .map(|q| MeasurementBasis::from_direction(*q))
                    .collect::<Result<_>>()?,
            };
            let counts = simulate_counts(&scenario.states, &bases, &cfg)?;
            let estimate = estimate_witness(w, &counts)?;
            Ok(SimulationSummary { config: cfg, estimate, counts })
        })
        .transpose()?;

    Ok(ScenarioReport {
        name: scenario.name.clone(),
        witness: w.clone(),
        classical_bound: classical,
        quantum_max,
        max_directions,
        value_at_bases,
        criterion,
        s_general_candidates,
        violates: best_possible > classical,
        simulation,
    })
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario: {}", self.name)?;
        writeln!(f, "witness: {}", self.witness)?;
        writeln!(f, "classical_bound = {:.4}", self.classical_bound)?;
        writeln!(f, "quantum_max = {:.4}", self.quantum_max)?;
        let dirs: Vec<String> = self.max_directions.iter().map(|q| q.to_string()).collect();
        writeln!(f, "optimal_directions = [{}]", dirs.join(", "))?;
        if let Some(v) = self.value_at_bases {
            writeln!(f, "value_at_bases = {v:.4}")?;
        }
        if let Some([a, b, c]) = self.s_general_candidates {
            writeln!(f, "two_measurement_max (per labeling) = {a:.4}, {b:.4}, {c:.4}")?;
        }
        if let Some(c) = &self.criterion {
            writeln!(f, "{c}")?;
        }
        writeln!(f, "violating = {}", self.violates)?;
        if let Some(sim) = &self.simulation {
            let e = &sim.estimate;
            writeln!(
                f,
                "simulated = {:.4} +- {:.4} ({} repetitions x {} shots, seed {})",
                e.witness_mean, e.witness_std, e.repetitions_used, sim.config.shots_per_setting, sim.config.seed
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_report() {
        let r = run_scenario(&Scenario::builtin("example").unwrap(), None).unwrap();
        let c = r.criterion.as_ref().unwrap();
        assert!(c.violates && r.violates);
        assert!((c.best - 3.5895).abs() < 1e-3);
        assert!((r.value_at_bases.unwrap() - 3.5895).abs() < 1e-3);
        assert_eq!(r.classical_bound, 3.0);
    }

    #[test]
    fn appendix_s_report() {
        let r = run_scenario(&Scenario::builtin("appendix-s").unwrap(), None).unwrap();
        assert!((r.value_at_bases.unwrap() - 2.7847).abs() < 1e-3);
        assert_eq!(r.classical_bound, 3.0);
        assert!(r.criterion.is_none());
        let c = r.s_general_candidates.unwrap();
        assert!(c.iter().all(|v| (v - 3.0).abs() < 1e-3));
        assert!(!r.violates);
    }

    #[test]
    fn appendix_t_report() {
        let r = run_scenario(&Scenario::builtin("appendix-t").unwrap(), None).unwrap();
        assert!((r.quantum_max - 4.1769).abs() < 1e-3);
        assert!((r.value_at_bases.unwrap() - 4.1769).abs() < 1e-3);
        assert_eq!(r.classical_bound, 4.0);
        assert!(r.violates);
    }

    #[test]
    fn unknown_and_malformed() {
        assert!(matches!(Scenario::load("nonsense"), Err(PamError::UnknownScenario(_))));
        assert!(matches!(Scenario::from_json("{"), Err(PamError::Json(_))));
        let wrong_count = r#"{"states": [{"bloch": [0, 0, 1]}], "witness": "S"}"#;
        assert!(matches!(Scenario::from_json(wrong_count), Err(PamError::ShapeMismatch(_))));
    }

    #[test]
    fn json_scenario_without_bases() {
        let text = r#"{
            "name": "trine",
            "states": [{"bloch": [0, 0, 1]}, {"bloch": [0.8660254037844386, 0, -0.5]}, {"bloch": [-0.8660254037844386, 0, -0.5]}],
            "witness": {"coefficients": [[1, 1], [1, -1], [-1, 0]]}
        }"#;
        let s = Scenario::from_json(text).unwrap();
        assert!(s.bases.is_none());
        let r = run_scenario(&s, Some(ShotConfig::new(200, 3, 1).unwrap())).unwrap();
        assert!(r.criterion.is_some());
        assert_eq!(r.simulation.as_ref().unwrap().counts.len(), 3 * 3 * 2);
        assert!(r.to_string().contains("scenario: trine"));
    }
}
