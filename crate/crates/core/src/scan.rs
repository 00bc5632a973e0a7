//! Region scans over the `(theta1, theta2)` plane at fixed `theta3`, and the
//! search for the largest achievable `S` over all pure triples.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::criterion::{
    best_candidate, gram_feasible, s_max_candidates, AngleTriple, Labeling, S_CLASSICAL_BOUND,
};
use crate::error::{PamError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Violating,
    NonViolating,
    Infeasible,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Violating => "violating",
            Verdict::NonViolating => "non_violating",
            Verdict::Infeasible => "infeasible",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanCell {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub feasible: bool,
    pub best_s: Option<f64>,
    pub verdict: Verdict,
}

/// Best `S` over relabelings, or `None` outside the physical region.
pub fn best_s_at(theta1: f64, theta2: f64, theta3: f64) -> Result<Option<f64>> {
    let a = AngleTriple::new(theta1, theta2, theta3)?;
    if !gram_feasible(&a) {
        return Ok(None);
    }
    Ok(Some(best_candidate(&s_max_candidates(&a)?).1))
}

pub fn classify_point(theta1: f64, theta2: f64, theta3: f64) -> Result<ScanCell> {
    let best_s = best_s_at(theta1, theta2, theta3)?;
    let verdict = match best_s {
        None => Verdict::Infeasible,
        Some(s) if s > S_CLASSICAL_BOUND => Verdict::Violating,
        Some(_) => Verdict::NonViolating,
    };
    Ok(ScanCell { theta1, theta2, theta3, feasible: best_s.is_some(), best_s, verdict })
}

/// `resolution x resolution` cells, row-major with `theta1` selecting the row.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub theta3: f64,
    pub resolution: usize,
    pub cells: Vec<ScanCell>,
}

/// `i`-th of `n` evenly spaced points covering `[0, pi/2]` inclusive.
pub fn axis_value(i: usize, n: usize) -> f64 {
    FRAC_PI_2 * i as f64 / (n - 1) as f64
}

pub fn scan_region(theta3: f64, resolution: usize) -> Result<ScanGrid> {
    if resolution < 2 {
        return Err(PamError::InvalidResolution(resolution));
    }
    AngleTriple::new(0.0, 0.0, theta3)?;
    let cells = (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / resolution, idx % resolution);
            classify_point(axis_value(i, resolution), axis_value(j, resolution), theta3)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanGrid { theta3, resolution, cells })
}

impl ScanGrid {
    pub fn cell(&self, i1: usize, i2: usize) -> &ScanCell {
        &self.cells[i1 * self.resolution + i2]
    }

    pub fn spacing(&self) -> f64 {
        FRAC_PI_2 / (self.resolution - 1) as f64
    }

    /// Grid indices of the cell closest to `(theta1, theta2)`.
    pub fn nearest_index(&self, theta1: f64, theta2: f64) -> (usize, usize) {
        let idx = |t: f64| ((t / self.spacing()).round().max(0.0) as usize).min(self.resolution - 1);
        (idx(theta1), idx(theta2))
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.cells.iter().filter(|c| c.verdict == verdict).count()
    }

    /// `theta1,theta2,theta3,feasible,best_s,verdict`; 12 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "theta1,theta2,theta3,feasible,best_s,verdict")?;
        for c in &self.cells {
            let best = c.best_s.map(|s| format_significant(s, 12)).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                format_significant(c.theta1, 12),
                format_significant(c.theta2, 12),
                format_significant(c.theta3, 12),
                c.feasible,
                best,
                c.verdict
            )?;
        }
        Ok(())
    }
}

/// Fixed-point rendering with `digits` significant digits.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.starts_with("-0") && s.trim_start_matches(['-', '0', '.']).is_empty() {
        s[1..].to_string()
    } else {
        s
    }
}

/// Coarse grid over the angle cube followed by pattern-search refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalSearch {
    /// Points per axis of the coarse grid.
    pub resolution: usize,
    pub refine_iters: usize,
    /// Inclusive `(lo, hi)` range for each of `theta1, theta2, theta3`.
    pub bounds: [(f64, f64); 3],
}

impl Default for GlobalSearch {
    fn default() -> Self {
        GlobalSearch { resolution: 100, refine_iters: 200, bounds: [(0.0, FRAC_PI_2); 3] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchResult {
    pub value: f64,
    pub angles: AngleTriple,
    pub labeling: Labeling,
    pub evaluations: usize,
}

impl GlobalSearch {
    fn axis(&self, dim: usize, i: usize) -> f64 {
        let (lo, hi) = self.bounds[dim];
        if self.resolution < 2 || hi <= lo {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (self.resolution - 1) as f64
        }
    }

    fn score(t: [f64; 3]) -> Option<(f64, AngleTriple, Labeling)> {
        let a = AngleTriple::new(t[0], t[1], t[2]).ok()?;
        if !gram_feasible(&a) {
            return None;
        }
        let (l, v) = best_candidate(&s_max_candidates(&a).ok()?);
        Some((v, a, l))
    }

    pub fn run(&self) -> Result<SearchResult> {
        for (lo, hi) in self.bounds {
            AngleTriple::new(lo, lo, lo)?;
            AngleTriple::new(hi, hi, hi)?;
            if hi < lo {
                return Err(PamError::Parse(format!("empty search range [{lo}, {hi}]")));
            }
        }
        let n = self.resolution;
        if n < 2 && self.bounds.iter().any(|(lo, hi)| hi > lo) {
            return Err(PamError::InvalidResolution(n));
        }
        let per_axis: [usize; 3] = std::array::from_fn(|d| {
            let (lo, hi) = self.bounds[d];
            if hi > lo { n } else { 1 }
        });
        let n = n.max(1);
        let total = per_axis.iter().product::<usize>();
        let coarse = (0..total)
            .into_par_iter()
            .filter_map(|idx| {
                let i = idx / (per_axis[1] * per_axis[2]);
                let j = (idx / per_axis[2]) % per_axis[1];
                let k = idx % per_axis[2];
                let t = [self.axis(0, i), self.axis(1, j), self.axis(2, k)];
                GlobalSearch::score(t).map(|s| (idx, t, s))
            })
            .reduce_with(|a, b| if b.2 .0 > a.2 .0 || (b.2 .0 == a.2 .0 && b.0 < a.0) { b } else { a });
        let Some((_, mut point, (mut value, mut angles, mut labeling))) = coarse else {
            return Err(PamError::InfeasibleAngles(self.bounds[0].0, self.bounds[1].0, self.bounds[2].0));
        };

        let mut evaluations = total;
        let mut step: [f64; 3] = std::array::from_fn(|d| {
            let (lo, hi) = self.bounds[d];
            if per_axis[d] > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 }
        });
        for _ in 0..self.refine_iters {
            let mut improved = false;
            for dx in -1i32..=1 {
                for dy in -1i32..=1 {
                    for dz in -1i32..=1 {
                        if (dx, dy, dz) == (0, 0, 0) {
                            continue;
                        }
                        let d = [dx, dy, dz];
                        let cand: [f64; 3] = std::array::from_fn(|a| {
                            let (lo, hi) = self.bounds[a];
                            (point[a] + d[a] as f64 * step[a]).clamp(lo, hi)
                        });
                        evaluations += 1;
                        if let Some((v, a, l)) = GlobalSearch::score(cand) {
                            if v > value {
                                (value, angles, labeling, point) = (v, a, l, cand);
                                improved = true;
                            }
                        }
                    }
                }
            }
            if !improved {
                step = step.map(|s| s * 0.5);
            }
        }
        Ok(SearchResult { value, angles, labeling, evaluations })
    }
}

/// Largest best-candidate `S` found over all feasible pure triples.
pub fn global_quantum_max(refine_iters: usize) -> f64 {
    GlobalSearch { refine_iters, ..GlobalSearch::default() }
        .run()
        .expect("full cube contains feasible points")
        .value
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

    #[test]
    fn worked_example_cell() {
        // Resolution 7 puts grid points on multiples of pi/12.
        let g = scan_region(FRAC_PI_4, 7).unwrap();
        let c = g.cell(3, 5);
        assert!((c.theta1 - 3.0 * PI / 12.0).abs() < 1e-12);
        assert!((c.theta2 - 5.0 * PI / 12.0).abs() < 1e-12);
        assert_eq!(c.verdict, Verdict::Violating);
        assert!((c.best_s.unwrap() - 3.5895).abs() < 1e-3);
    }

    #[test]
    fn antipodal_corner_is_infeasible() {
        let g = scan_region(FRAC_PI_4, 16).unwrap();
        let c = g.cell(15, 15);
        assert_eq!(c.verdict, Verdict::Infeasible);
        assert!(!c.feasible && c.best_s.is_none());
        assert_eq!(g.cells.len(), 256);
    }

    #[test]
    fn resolution_validated() {
        assert!(matches!(scan_region(FRAC_PI_4, 1), Err(PamError::InvalidResolution(1))));
        assert!(scan_region(3.0, 4).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = scan_region(FRAC_PI_8, 3).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "theta1,theta2,theta3,feasible,best_s,verdict");
        assert_eq!(lines.len(), 10);
        assert!(lines[1].starts_with("0,0,0.392699081699,"));
        // (0, pi/2, pi/8): r1 = r2 but r2.r3 != r1.r3.
        assert!(lines[3].ends_with(",false,,infeasible"), "{}", lines[3]);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(FRAC_PI_4, 12), "0.785398163397");
        assert_eq!(format_significant(3.58948, 3), "3.59");
        assert_eq!(format_significant(0.0, 12), "0");
        assert_eq!(format_significant(1234.5, 2), "1234");
    }

    #[test]
    fn small_equal_angles_are_feasible() {
        for i in 0..200 {
            let t = 0.3 * i as f64 / 200.0;
            assert!(classify_point(t, t, t).unwrap().feasible);
        }
        // Coincident r1, r2, r3 force theta3 = 0.
        assert!(!classify_point(0.0, 0.0, 0.01).unwrap().feasible);
    }

    #[test]
    fn relabeling_symmetry_across_scans() {
        // The cell (t1, t2) at theta3 = x maps to (x, t2) at theta3 = t1 with
        // S_max and S'_max exchanged.
        let n = 9;
        for i in 0..n {
            for j in 0..n {
                let (t1, t2, x) = (axis_value(i, n), axis_value(j, n), FRAC_PI_8);
                let a = AngleTriple::new(t1, t2, x).unwrap();
                let b = AngleTriple::new(x, t2, t1).unwrap();
                if !gram_feasible(&a) {
                    assert!(!gram_feasible(&b));
                    continue;
                }
                let (ca, cb) = (s_max_candidates(&a).unwrap(), s_max_candidates(&b).unwrap());
                assert!((ca[0] - cb[1]).abs() < 1e-12);
                assert!((ca[1] - cb[0]).abs() < 1e-12);
                assert!((ca[2] - cb[2]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn restricted_search_at_origin() {
        let s = GlobalSearch { resolution: 10, refine_iters: 20, bounds: [(0.0, 0.0); 3] };
        let r = s.run().unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_is_monotone() {
        let mut prev = 0.0;
        for iters in [0, 1, 5, 20, 80] {
            let v = GlobalSearch { resolution: 12, refine_iters: iters, ..GlobalSearch::default() }
                .run()
                .unwrap()
                .value;
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn search_value_dominates_probes() {
        let best = GlobalSearch { resolution: 20, refine_iters: 50, ..GlobalSearch::default() }.run().unwrap();
        for i in 0..20 {
            for j in 0..20 {
                for k in 0..20 {
                    let t = |x| FRAC_PI_2 * x as f64 / 19.0;
                    if let Some(v) = best_s_at(t(i), t(j), t(k)).unwrap() {
                        assert!(v <= best.value);
                    }
                }
            }
        }
    }
}
