//! Distance-matrix RMSD, relative improvement and run-set aggregation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conformation::Conformation;

/// Ångström per lattice unit: one basis step (length √2) maps to 3.8 Å.
pub const LATTICE_SCALE: f64 = 3.8 / std::f64::consts::SQRT_2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("structures differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("structures need at least two residues")]
    TooShort,
    #[error("reference energy is zero")]
    ZeroReference,
    #[error("no runs to summarise")]
    EmptyRunSet,
    #[error("malformed native structure: {0}")]
    Malformed(String),
}

/// Native Cα trace in Ångström.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NativeStructure {
    pub id: String,
    pub ca_coords: Vec<[f64; 3]>,
}

impl NativeStructure {
    /// Parses `"id n"` followed by `n` lines of `"x y z"`. Blank lines and
    /// `#` comments are ignored.
    pub fn parse(text: &str) -> Result<NativeStructure, MetricsError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| MetricsError::Malformed("empty file".into()))?;
        let mut parts = header.split_whitespace();
        let id = parts.next().ok_or_else(|| MetricsError::Malformed("missing id".into()))?.to_string();
        let n: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| MetricsError::Malformed(format!("bad header '{header}'")))?;
        let mut ca_coords = Vec::with_capacity(n);
        for line in lines {
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| MetricsError::Malformed(format!("line '{line}': {e}")))?;
            if v.len() != 3 {
                return Err(MetricsError::Malformed(format!("expected 3 coordinates in '{line}'")));
            }
            ca_coords.push([v[0], v[1], v[2]]);
        }
        if ca_coords.len() != n {
            return Err(MetricsError::Malformed(format!("header says {n} residues, found {}", ca_coords.len())));
        }
        Ok(NativeStructure { id, ca_coords })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.id, self.ca_coords.len());
        for [x, y, z] in &self.ca_coords {
            out.push_str(&format!("{x} {y} {z}\n"));
        }
        out
    }

    /// Lattice chain scaled to Ångström.
    pub fn from_conformation(id: &str, conf: &Conformation) -> NativeStructure {
        NativeStructure { id: id.to_string(), ca_coords: scaled_coords(conf) }
    }

    pub fn len(&self) -> usize {
        self.ca_coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ca_coords.is_empty()
    }
}

pub fn scaled_coords(conf: &Conformation) -> Vec<[f64; 3]> {
    conf.points().iter().map(|p| p.as_f64().map(|c| c * LATTICE_SCALE)).collect()
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Distance-matrix RMSD between two coordinate sets: root mean square of
/// the differences of all `n(n-1)/2` internal distances.
pub fn rmsd_coords(a: &[[f64; 3]], b: &[[f64; 3]]) -> Result<f64, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(MetricsError::TooShort);
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(&a[i], &a[j]) - dist(&b[i], &b[j]);
            sum += d * d;
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok((sum / pairs).sqrt())
}

/// RMSD of a lattice prediction against a native trace, in Ångström.
pub fn rmsd(pred: &Conformation, native: &NativeStructure) -> Result<f64, MetricsError> {
    rmsd_coords(&scaled_coords(pred), &native.ca_coords)
}

/// `(e_target - e_ref) / e_ref * 100`. Positive means the target is better
/// when energies are negative.
pub fn relative_improvement(e_target: f64, e_ref: f64) -> Result<f64, MetricsError> {
    if e_ref == 0.0 {
        return Err(MetricsError::ZeroReference);
    }
    // adding 0.0 folds -0.0 into 0.0 so equal energies print as "0.00%"
    Ok((e_target - e_ref) / e_ref * 100.0 + 0.0)
}

/// Percentage with two decimals, e.g. `"7.66%"`.
pub fn format_percent(ri: f64) -> String {
    format!("{ri:.2}%")
}

/// Per-run figures fed into [`summarize`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord<'a> {
    pub best_energy: f64,
    pub best: Option<&'a Conformation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSetSummary {
    pub runs: usize,
    pub best_energy: f64,
    pub mean_energy: f64,
    /// Lowest RMSD over all runs' final structures.
    pub best_rmsd: Option<f64>,
    /// RMSD of the lowest-energy structure.
    pub rmsd_of_best_energy: Option<f64>,
}

/// Best and mean of per-run best energies, plus the two RMSD views when a
/// native structure and per-run structures are supplied. The first run wins
/// energy ties.
pub fn summarize(runs: &[RunRecord<'_>], native: Option<&NativeStructure>) -> Result<RunSetSummary, MetricsError> {
    if runs.is_empty() {
        return Err(MetricsError::EmptyRunSet);
    }
    let mut best_idx = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.best_energy < runs[best_idx].best_energy {
            best_idx = i;
        }
    }
    let mean_energy = runs.iter().map(|r| r.best_energy).sum::<f64>() / runs.len() as f64;
    let (mut best_rmsd, mut rmsd_of_best_energy) = (None, None);
    if let Some(native) = native {
        let mut all = Vec::with_capacity(runs.len());
        for r in runs {
            match r.best {
                Some(c) => all.push(rmsd(c, native)?),
                None => all.push(f64::NAN),
            }
        }
        best_rmsd = all.iter().copied().filter(|x| !x.is_nan()).min_by(f64::total_cmp);
        rmsd_of_best_energy = Some(all[best_idx]).filter(|x| !x.is_nan());
    }
    Ok(RunSetSummary { runs: runs.len(), best_energy: runs[best_idx].best_energy, mean_energy, best_rmsd, rmsd_of_best_energy })
}
