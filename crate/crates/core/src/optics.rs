//! Waveplate model of the photonic prepare-and-measure setup, with a
//! shot-noise counting simulator.
//!
//! Preparation: `|H> = |0>` passes HWP then QWP. Measurement: QWP then HWP,
//! then a polarizing beamsplitter whose transmitted (`|H>`) port counts as
//! outcome `+1`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PamError, Result};
use crate::qubit::{Complex, Ket, Mat2, MeasurementBasis, Mixture};
use crate::witness::{witness_value, ExpectationTable, PamWitness};

/// Shots per (preparation, measurement) setting used when none is given.
pub const DEFAULT_SHOTS: u64 = 5000;
/// Repetitions per setting used to form an error bar.
pub const DEFAULT_REPETITIONS: usize = 50;

/// 2x2 unitary acting on polarization (Jones) vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix(pub Mat2);

impl JonesMatrix {
    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn then(&self, next: &JonesMatrix) -> JonesMatrix {
        JonesMatrix(next.0 * self.0)
    }

    pub fn apply(&self, k: &Ket) -> Ket {
        k.transform(&self.0).expect("unitary preserves the norm")
    }
}

/// Half-wave plate with fast axis at `theta` from horizontal.
pub fn jones_hwp(theta: f64) -> JonesMatrix {
    let (s, c) = (2.0 * theta).sin_cos();
    let r = |x: f64| Complex::new(x, 0.0);
    JonesMatrix(Mat2::new(r(c), r(s), r(s), r(-c)))
}

/// Quarter-wave plate with fast axis at `theta`: `R(theta) diag(1, i) R(-theta)`.
pub fn jones_qwp(theta: f64) -> JonesMatrix {
    let (s, c) = theta.sin_cos();
    let i = Complex::new(0.0, 1.0);
    let off = Complex::new(s * c, 0.0) * (Complex::new(1.0, 0.0) - i);
    JonesMatrix(Mat2::new(
        Complex::new(c * c, 0.0) + i * (s * s),
        off,
        off,
        Complex::new(s * s, 0.0) + i * (c * c),
    ))
}

fn reduce(angle: f64) -> f64 {
    let a = angle.rem_euclid(PI);
    if a >= PI { 0.0 } else { a }
}

/// Fast-axis orientations of one HWP and one QWP, reduced to `[0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveplateSetting {
    pub hwp_angle: f64,
    pub qwp_angle: f64,
}

impl WaveplateSetting {
    pub fn new(hwp_angle: f64, qwp_angle: f64) -> Self {
        WaveplateSetting { hwp_angle: reduce(hwp_angle), qwp_angle: reduce(qwp_angle) }
    }

    /// HWP followed by QWP.
    pub fn preparation_operator(&self) -> JonesMatrix {
        jones_hwp(self.hwp_angle).then(&jones_qwp(self.qwp_angle))
    }

    /// QWP followed by HWP.
    pub fn measurement_operator(&self) -> JonesMatrix {
        jones_qwp(self.qwp_angle).then(&jones_hwp(self.hwp_angle))
    }
}

/// State emitted by the preparation plates from `|H>`.
pub fn prepare_ket(setting: &WaveplateSetting) -> Ket {
    setting.preparation_operator().apply(&Ket::zero())
}

/// Candidate settings from the polarization ellipse of `target`: QWP along the
/// major axis, HWP turning `|H>` to the matching linear state.
fn preparation_candidates(target: &Ket) -> [WaveplateSetting; 2] {
    let r = target.bloch();
    let orientation = 0.5 * r.x.atan2(r.z);
    let ellipticity = 0.5 * r.y.clamp(-1.0, 1.0).asin();
    [
        WaveplateSetting::new(0.5 * (orientation + ellipticity), orientation),
        WaveplateSetting::new(0.5 * (orientation - ellipticity), orientation),
    ]
}

pub fn solve_preparation_angles(target: &Ket) -> WaveplateSetting {
    preparation_candidates(target)
        .into_iter()
        .map(|s| (prepare_ket(&s).projector_distance(target), s))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, s)| s)
        .expect("two candidates")
}

/// Plates that rotate the basis' `+1` ket onto `|H>`.
///
/// `QWP(q)^dagger` equals `QWP(q + pi/2)` up to phase, so inverting a
/// preparation for the plus-ket gives the measurement setting.
pub fn solve_measurement_angles(basis: &MeasurementBasis) -> WaveplateSetting {
    let plus = basis.plus_ket();
    let score = |s: &WaveplateSetting| s.measurement_operator().apply(&plus).projector_distance(&Ket::zero());
    preparation_candidates(&plus)
        .into_iter()
        .map(|p| WaveplateSetting::new(p.hwp_angle, p.qwp_angle - PI / 2.0))
        .map(|s| (score(&s), s))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, s)| s)
        .expect("two candidates")
}

/// Probability that a photon in `k` exits the transmitted port after the
/// measurement plates.
pub fn transmission_probability(k: &Ket, setting: &WaveplateSetting) -> f64 {
    let [h, _] = setting.measurement_operator().apply(k).amplitudes();
    h.norm_sqr().clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotConfig {
    pub shots_per_setting: u64,
    pub repetitions: usize,
    pub seed: u64,
}

impl ShotConfig {
    pub fn new(shots_per_setting: u64, repetitions: usize, seed: u64) -> Result<Self> {
        if shots_per_setting == 0 {
            return Err(PamError::InvalidShotConfig("shots per setting must be positive".into()));
        }
        if repetitions == 0 {
            return Err(PamError::InvalidShotConfig("repetitions must be positive".into()));
        }
        Ok(ShotConfig { shots_per_setting, repetitions, seed })
    }
}

impl Default for ShotConfig {
    fn default() -> Self {
        ShotConfig { shots_per_setting: DEFAULT_SHOTS, repetitions: DEFAULT_REPETITIONS, seed: 0 }
    }
}

/// How mixed preparations are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMode {
    /// Each shot picks a pure component by weight, then the photon is
    /// prepared and measured through the plates.
    #[default]
    PerComponent,
    /// One binomial draw on `Tr(rho M+)`.
    Direct,
}

/// Detector counts for one setting in one repetition (indices zero-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub repetition: usize,
    pub j: usize,
    pub k: usize,
    pub n_plus: u64,
    pub n_minus: u64,
}

impl CountRecord {
    pub fn shots(&self) -> u64 {
        self.n_plus + self.n_minus
    }

    pub fn expectation(&self) -> f64 {
        (self.n_plus as f64 - self.n_minus as f64) / self.shots() as f64
    }
}

fn cell_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("p in (0, 1)").sample(rng)
}

pub fn simulate_counts(
    preparations: &[Mixture],
    bases: &[MeasurementBasis],
    cfg: &ShotConfig,
) -> Result<Vec<CountRecord>> {
    simulate_counts_with(preparations, bases, cfg, SamplingMode::PerComponent)
}

/// One record per `(repetition, j, k)`, ordered by repetition, then `j`, then
/// `k`. Every cell draws from its own ChaCha stream keyed by its position, so
/// output does not depend on scheduling.
pub fn simulate_counts_with(
    preparations: &[Mixture],
    bases: &[MeasurementBasis],
    cfg: &ShotConfig,
    mode: SamplingMode,
) -> Result<Vec<CountRecord>> {
    ShotConfig::new(cfg.shots_per_setting, cfg.repetitions, cfg.seed)?;
    if preparations.is_empty() || bases.is_empty() {
        return Err(PamError::ShapeMismatch("need at least one state and one basis".into()));
    }
    let (nj, nk) = (preparations.len(), bases.len());
    let settings: Vec<WaveplateSetting> = bases.iter().map(solve_measurement_angles).collect();

    // Transmission probability of every pure component through every basis.
    let component_probs: Vec<Vec<Vec<(f64, f64)>>> = preparations
        .iter()
        .map(|mix| {
            let prepared: Vec<(f64, Ket)> = mix
                .components()
                .iter()
                .map(|(w, k)| (*w, prepare_ket(&solve_preparation_angles(k))))
                .collect();
            settings
                .iter()
                .map(|s| prepared.iter().map(|(w, k)| (*w, transmission_probability(k, s))).collect())
                .collect()
        })
        .collect();
    let direct_probs: Vec<Vec<f64>> = preparations
        .iter()
        .map(|mix| {
            let rho = mix.density();
            bases.iter().map(|b| rho.probability(b.plus_projector()).clamp(0.0, 1.0)).collect()
        })
        .collect();

    let shots = cfg.shots_per_setting;
    let total = cfg.repetitions * nj * nk;
    let records = (0..total)
        .into_par_iter()
        .map(|cell| {
            let repetition = cell / (nj * nk);
            let j = (cell / nk) % nj;
            let k = cell % nk;
            let mut rng = cell_rng(cfg.seed, cell as u64);
            let n_plus = match mode {
                SamplingMode::Direct => binomial(&mut rng, shots, direct_probs[j][k]),
                SamplingMode::PerComponent => {
                    // Sequential binomial splitting is the multinomial draw of
                    // per-shot component choices.
                    let comps = &component_probs[j][k];
                    let mut remaining_shots = shots;
                    let mut remaining_weight: f64 = comps.iter().map(|(w, _)| w).sum();
                    let mut plus = 0;
                    for (idx, (w, p)) in comps.iter().enumerate() {
                        let n = if idx + 1 == comps.len() {
                            remaining_shots
                        } else {
                            binomial(&mut rng, remaining_shots, (w / remaining_weight).clamp(0.0, 1.0))
                        };
                        remaining_shots -= n;
                        remaining_weight -= w;
                        plus += binomial(&mut rng, n, *p);
                    }
                    plus
                }
            };
            CountRecord { repetition, j, k, n_plus, n_minus: shots - n_plus }
        })
        .collect();
    Ok(records)
}

/// Witness statistics over repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct RunEstimate {
    /// Mean of the per-repetition estimates.
    pub e_table: ExpectationTable,
    pub witness_mean: f64,
    /// Sample standard deviation over repetitions (zero for a single one).
    pub witness_std: f64,
    pub repetitions_used: usize,
    pub per_repetition: Vec<f64>,
}

impl RunEstimate {
    pub fn standard_error(&self) -> f64 {
        self.witness_std / (self.repetitions_used as f64).sqrt()
    }
}

pub fn estimate_witness(w: &PamWitness, counts: &[CountRecord]) -> Result<RunEstimate> {
    if counts.is_empty() {
        return Err(PamError::EmptyCounts);
    }
    let (nj, nk) = (w.preparations(), w.measurements());
    let reps = counts.iter().map(|c| c.repetition).max().unwrap() + 1;
    let mut grid: Vec<Option<f64>> = vec![None; reps * nj * nk];
    for c in counts {
        if c.j >= nj || c.k >= nk {
            return Err(PamError::ShapeMismatch(format!(
                "record ({}, {}) outside the {}x{} witness",
                c.j, c.k, nj, nk
            )));
        }
        if c.shots() == 0 {
            return Err(PamError::InvalidCounts(format!("no shots in record {c:?}")));
        }
        let slot = &mut grid[(c.repetition * nj + c.j) * nk + c.k];
        if slot.is_some() {
            return Err(PamError::InvalidCounts(format!("duplicate record {c:?}")));
        }
        *slot = Some(c.expectation());
    }
    let mut per_repetition = Vec::with_capacity(reps);
    let mut sum = vec![vec![0.0; nk]; nj];
    for rep in 0..reps {
        let mut table = vec![vec![0.0; nk]; nj];
        for (j, row) in table.iter_mut().enumerate() {
            for (k, cell) in row.iter_mut().enumerate() {
                *cell = grid[(rep * nj + j) * nk + k].ok_or_else(|| {
                    PamError::InvalidCounts(format!("missing record (repetition {rep}, j {j}, k {k})"))
                })?;
                sum[j][k] += *cell;
            }
        }
        per_repetition.push(witness_value(w, &ExpectationTable::new(table)?)?);
    }
    let n = reps as f64;
    let mean = per_repetition.iter().sum::<f64>() / n;
    let std = if reps > 1 {
        (per_repetition.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let e_table = ExpectationTable::new(sum.into_iter().map(|r| r.into_iter().map(|v| v / n).collect()).collect())?;
    Ok(RunEstimate { e_table, witness_mean: mean, witness_std: std, repetitions_used: reps, per_repetition })
}

/// Per-repetition witness standard deviation predicted by binomial error
/// propagation, `sqrt(sum c_jk^2 (1 - E_jk^2) / N)`.
pub fn binomial_witness_std(w: &PamWitness, e: &ExpectationTable, shots: u64) -> Result<f64> {
    if e.preparations() != w.preparations() || e.measurements() != w.measurements() {
        return Err(PamError::ShapeMismatch("table does not match witness".into()));
    }
    let var: f64 = (0..w.preparations())
        .flat_map(|j| (0..w.measurements()).map(move |k| (j, k)))
        .map(|(j, k)| w.coefficient(j, k).powi(2) * (1.0 - e.get(j, k).powi(2)))
        .sum();
    Ok((var / shots as f64).sqrt())
}

/// Writes `repetition,j,k,n_plus,n_minus` rows with one-based `j` and `k`.
pub fn write_counts_csv<W: Write>(out: W, counts: &[CountRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["repetition", "j", "k", "n_plus", "n_minus"]).map_err(csv_err)?;
    for c in counts {
        wtr.write_record([
            c.repetition.to_string(),
            (c.j + 1).to_string(),
            (c.k + 1).to_string(),
            c.n_plus.to_string(),
            c.n_minus.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_counts_csv<R: Read>(input: R) -> Result<Vec<CountRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in rdr.deserialize::<CountRecord>() {
        let c = row.map_err(csv_err)?;
        if c.j == 0 || c.k == 0 {
            return Err(PamError::InvalidCounts("j and k are one-based".into()));
        }
        out.push(CountRecord { j: c.j - 1, k: c.k - 1, ..c });
    }
    Ok(out)
}

fn csv_err(e: csv::Error) -> PamError {
    PamError::Parse(format!("counts CSV: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{BlochVector, DensityMatrix};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    fn unit() -> impl Strategy<Value = BlochVector> {
        (-1.0..=1.0f64, -PI..PI).prop_map(|(z, p)| {
            let s = (1.0 - z * z).sqrt();
            BlochVector::new(s * p.cos(), s * p.sin(), z)
        })
    }

    #[test]
    fn hwp_examples() {
        assert!(jones_hwp(0.0).apply(&Ket::zero()).same_state(&Ket::zero()));
        assert!(jones_hwp(FRAC_PI_8).apply(&Ket::zero()).same_state(&Ket::plus()));
        assert!(jones_hwp(FRAC_PI_4).apply(&Ket::zero()).same_state(&Ket::one()));
        assert!((jones_hwp(0.3).0.det().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hwp_period_is_half_pi() {
        let a = jones_hwp(0.7).0;
        let b = jones_hwp(0.7 + PI / 2.0).0;
        assert!((a + b).norm() < 1e-12);
    }

    #[test]
    fn qwp_examples() {
        assert!(jones_qwp(0.0).apply(&Ket::zero()).same_state(&Ket::zero()));
        let circ = jones_qwp(FRAC_PI_4).apply(&Ket::zero());
        let [a, b] = circ.amplitudes();
        assert!((a.norm() - b.norm()).abs() < 1e-12);
        let rel = (b / a).arg();
        assert!((rel.abs() - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn preparation_examples() {
        let s = solve_preparation_angles(&Ket::zero());
        assert!(prepare_ket(&s).same_state(&Ket::zero()));
        assert!(prepare_ket(&WaveplateSetting::new(0.0, 0.0)).same_state(&Ket::zero()));
        // A QWP along the diagonal leaves the diagonal state alone; at 0 it
        // would turn |+> circular.
        assert!(prepare_ket(&WaveplateSetting::new(FRAC_PI_8, FRAC_PI_4)).same_state(&Ket::plus()));
        assert!(!prepare_ket(&WaveplateSetting::new(FRAC_PI_8, 0.0)).same_state(&Ket::plus()));
        let s = solve_preparation_angles(&Ket::plus());
        assert!(prepare_ket(&s).same_state(&Ket::plus()));
        assert!((s.hwp_angle - FRAC_PI_8).abs() < 1e-12 && (s.qwp_angle - FRAC_PI_4).abs() < 1e-12);

        let target = Ket::normalized(Complex::new(0.0, -0.2588), Complex::new(0.9659, 0.0)).unwrap();
        let out = prepare_ket(&solve_preparation_angles(&target)).bloch();
        assert!(out.distance(target.bloch()) < 1e-6);
        assert!(out.distance(BlochVector::new(0.0, 0.5, -(3f64.sqrt()) / 2.0)) < 1e-4);
    }

    #[test]
    fn measurement_examples() {
        let s = solve_measurement_angles(&MeasurementBasis::computational());
        assert!(s.measurement_operator().apply(&Ket::zero()).same_state(&Ket::zero()));
        let ident = WaveplateSetting::new(0.0, 0.0);
        assert!(ident.measurement_operator().apply(&Ket::zero()).same_state(&Ket::zero()));

        let x = MeasurementBasis::from_direction(BlochVector::new(1.0, 0.0, 0.0)).unwrap();
        let s = solve_measurement_angles(&x);
        assert!(s.measurement_operator().apply(&Ket::plus()).same_state(&Ket::zero()));

        let psi1 = Ket::real((PI / 6.0).cos(), (PI / 6.0).sin()).unwrap();
        let basis = MeasurementBasis::from_plus_ket(&psi1);
        let s = solve_measurement_angles(&basis);
        for r in [BlochVector::new(0.3, -0.2, 0.5), BlochVector::Z, BlochVector::new(-1.0, 0.0, 0.0)] {
            let rho = DensityMatrix::from_bloch(r).unwrap();
            let mix = Mixture::from_density(&rho);
            let p: f64 = mix
                .components()
                .iter()
                .map(|(w, k)| w * transmission_probability(&prepare_ket(&solve_preparation_angles(k)), &s))
                .sum();
            assert!(((2.0 * p - 1.0) - r.dot(basis.direction())).abs() < 1e-9);
        }
    }

    #[test]
    fn eigenstate_counts_are_exact() {
        let mix = vec![Mixture::pure(Ket::zero())];
        let bases = vec![MeasurementBasis::computational()];
        let cfg = ShotConfig::new(1000, 5, 3).unwrap();
        for c in simulate_counts(&mix, &bases, &cfg).unwrap() {
            assert_eq!((c.n_plus, c.n_minus), (1000, 0));
        }
        let w = PamWitness::new(vec![vec![1.0]], 2).unwrap();
        let est = estimate_witness(&w, &simulate_counts(&mix, &bases, &cfg).unwrap()).unwrap();
        assert_eq!(est.witness_mean, 1.0);
        assert_eq!(est.witness_std, 0.0);
        assert_eq!(est.repetitions_used, 5);
    }

    #[test]
    fn maximally_mixed_converges_to_half() {
        let mix = vec![Mixture::from_density(&DensityMatrix::maximally_mixed())];
        let bases = vec![MeasurementBasis::computational()];
        let shots = 1_000_000;
        let cfg = ShotConfig::new(shots, 1, 99).unwrap();
        let c = simulate_counts(&mix, &bases, &cfg).unwrap()[0];
        let sigma = (0.25 / shots as f64).sqrt();
        assert!((c.n_plus as f64 / shots as f64 - 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn seed_determinism_and_streams() {
        let mix = vec![Mixture::pure(Ket::plus()); 2];
        let bases = vec![MeasurementBasis::computational(); 2];
        let cfg = ShotConfig::new(500, 4, 42).unwrap();
        let a = simulate_counts(&mix, &bases, &cfg).unwrap();
        let b = simulate_counts(&mix, &bases, &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate_counts(&mix, &bases, &ShotConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.len(), 4 * 2 * 2);
        assert!(a.iter().all(|r| r.shots() == 500));
    }

    #[test]
    fn shot_config_validation() {
        assert!(ShotConfig::new(0, 1, 0).is_err());
        assert!(ShotConfig::new(1, 0, 0).is_err());
        assert_eq!(ShotConfig::default().shots_per_setting, 5000);
        assert_eq!(ShotConfig::default().repetitions, 50);
    }

    #[test]
    fn estimate_errors() {
        let w = PamWitness::s_witness();
        assert!(matches!(estimate_witness(&w, &[]), Err(PamError::EmptyCounts)));
        let partial = vec![CountRecord { repetition: 0, j: 0, k: 0, n_plus: 1, n_minus: 1 }];
        assert!(matches!(estimate_witness(&w, &partial), Err(PamError::InvalidCounts(_))));
        let outside = vec![CountRecord { repetition: 0, j: 5, k: 0, n_plus: 1, n_minus: 1 }];
        assert!(matches!(estimate_witness(&w, &outside), Err(PamError::ShapeMismatch(_))));
    }

    #[test]
    fn counts_csv_round_trip() {
        let mix = vec![Mixture::pure(Ket::plus()); 3];
        let bases = vec![MeasurementBasis::computational(); 2];
        let counts = simulate_counts(&mix, &bases, &ShotConfig::new(100, 2, 1).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_counts_csv(&mut buf, &counts).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("repetition,j,k,n_plus,n_minus\n0,1,1,"));
        assert_eq!(read_counts_csv(buf.as_slice()).unwrap(), counts);
    }

    #[test]
    fn sampling_modes_agree_statistically() {
        let rho = DensityMatrix::from_bloch(BlochVector::new(0.4, 0.1, -0.3)).unwrap();
        let mix = vec![Mixture::from_density(&rho)];
        let bases = vec![MeasurementBasis::from_direction(BlochVector::new(0.8, 0.0, 0.6)).unwrap()];
        let cfg = ShotConfig::new(20_000, 200, 5).unwrap();
        let w = PamWitness::new(vec![vec![1.0]], 2).unwrap();
        let a = estimate_witness(&w, &simulate_counts_with(&mix, &bases, &cfg, SamplingMode::PerComponent).unwrap()).unwrap();
        let b = estimate_witness(&w, &simulate_counts_with(&mix, &bases, &cfg, SamplingMode::Direct).unwrap()).unwrap();
        let theory = rho.bloch().dot(bases[0].direction());
        let se = (a.standard_error().powi(2) + b.standard_error().powi(2)).sqrt();
        assert!((a.witness_mean - b.witness_mean).abs() < 4.0 * se);
        assert!((a.witness_mean - theory).abs() < 4.0 * a.standard_error());
        assert!((a.witness_std / b.witness_std - 1.0).abs() < 0.25);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn plates_are_unitary(theta in -10.0..10.0f64) {
            prop_assert!(jones_hwp(theta).0.unitarity_defect() < 1e-9);
            prop_assert!(jones_qwp(theta).0.unitarity_defect() < 1e-9);
        }

        #[test]
        fn preparation_round_trip(q in unit(), phase in -PI..PI) {
            let target = Ket::from_bloch(q).unwrap().with_phase(phase);
            let s = solve_preparation_angles(&target);
            prop_assert!(prepare_ket(&s).projector_distance(&target) < 1e-6);
            prop_assert!((0.0..PI).contains(&s.hwp_angle) && (0.0..PI).contains(&s.qwp_angle));
        }

        #[test]
        fn measurement_round_trip(q in unit()) {
            let basis = MeasurementBasis::from_direction(q).unwrap();
            let s = solve_measurement_angles(&basis);
            prop_assert!(s.measurement_operator().apply(&basis.plus_ket()).projector_distance(&Ket::zero()) < 1e-6);
        }
    }
}
