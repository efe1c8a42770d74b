//! Self-avoiding chains on the lattice.
//!
//! A [`Conformation`] keeps three views of the same chain in sync: absolute
//! points, the bond direction string and an occupancy index. Every
//! constructor validates connectivity and self-avoidance, so a value of this
//! type is always a valid self-avoiding walk.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Direction, LatticePoint, OccupancyIndex, Rotation};
use crate::sequence::{AminoAcid, Sequence};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConformationError {
    #[error("residue {index} collides with an earlier residue")]
    SelfCollision { index: usize },
    #[error("residues {index} and {} are not lattice neighbours", index + 1)]
    Disconnected { index: usize },
    #[error("a chain needs at least 2 residues, got {0}")]
    TooShort(usize),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("sequence has no hydrophobic residues")]
    NoHydrophobicResidues,
    #[error("malformed dump: {0}")]
    MalformedDump(String),
}

#[derive(Debug, Clone)]
pub struct Conformation {
    points: Vec<LatticePoint>,
    directions: Vec<Direction>,
    occupancy: OccupancyIndex,
    fitness: Option<f64>,
}

impl PartialEq for Conformation {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
    }
}

impl Eq for Conformation {}

impl Conformation {
    /// Walks `dirs` from the origin.
    pub fn from_directions(dirs: &[Direction]) -> Result<Self, ConformationError> {
        Self::from_directions_at(LatticePoint::ORIGIN, dirs)
    }

    pub fn from_directions_at(start: LatticePoint, dirs: &[Direction]) -> Result<Self, ConformationError> {
        let n = dirs.len() + 1;
        let mut points = Vec::with_capacity(n);
        let mut occupancy = OccupancyIndex::with_capacity(n);
        let mut p = start;
        points.push(p);
        occupancy.insert(p, 0).expect("empty index");
        for (i, d) in dirs.iter().enumerate() {
            p = p + d.offset();
            occupancy.insert(p, i + 1).map_err(|_| ConformationError::SelfCollision { index: i + 1 })?;
            points.push(p);
        }
        Ok(Conformation { points, directions: dirs.to_vec(), occupancy, fitness: None })
    }

    /// Builds a chain from absolute points, checking every bond and site.
    pub fn from_points(points: Vec<LatticePoint>) -> Result<Self, ConformationError> {
        if points.len() < 2 {
            return Err(ConformationError::TooShort(points.len()));
        }
        let mut directions = Vec::with_capacity(points.len() - 1);
        for (i, w) in points.windows(2).enumerate() {
            let d = Direction::from_offset(w[1] - w[0]).ok_or(ConformationError::Disconnected { index: i })?;
            directions.push(d);
        }
        let mut occupancy = OccupancyIndex::with_capacity(points.len());
        for (i, &p) in points.iter().enumerate() {
            occupancy.insert(p, i).map_err(|_| ConformationError::SelfCollision { index: i })?;
        }
        Ok(Conformation { points, directions, occupancy, fitness: None })
    }

    /// Fully extended chain along `v1`.
    pub fn straight(n: usize) -> Self {
        let d = Direction::new(0).unwrap();
        Self::from_directions(&vec![d; n.saturating_sub(1).max(1)]).expect("straight chains never collide")
    }

    /// Parses a compact `a..l` direction string.
    pub fn from_direction_string(s: &str) -> Result<Self, ConformationError> {
        let dirs = s
            .chars()
            .map(|c| Direction::from_char(c).ok_or_else(|| ConformationError::MalformedDump(format!("bad direction '{c}'"))))
            .collect::<Result<Vec<_>, _>>()?;
        if dirs.is_empty() {
            return Err(ConformationError::TooShort(1));
        }
        Self::from_directions(&dirs)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn occupancy(&self) -> &OccupancyIndex {
        &self.occupancy
    }

    pub fn is_free(&self, p: LatticePoint) -> bool {
        self.occupancy.is_free(p)
    }

    pub fn residue_at(&self, p: LatticePoint) -> Option<usize> {
        self.occupancy.get(p)
    }

    /// Cached energy, if this chain has been scored since its last change.
    pub fn fitness(&self) -> Option<f64> {
        self.fitness
    }

    pub fn set_fitness(&mut self, energy: f64) {
        self.fitness = Some(energy);
    }

    pub fn direction_string(&self) -> String {
        self.directions.iter().map(|d| d.to_char()).collect()
    }

    /// Duplicate-detection key: the raw direction string.
    pub fn canonical_key(&self) -> Vec<u8> {
        self.directions.iter().map(|d| d.index() as u8).collect()
    }

    /// Moves a single residue to `target`. The caller guarantees `target` is
    /// free and adjacent to both chain neighbours.
    pub(crate) fn relocate_unchecked(&mut self, index: usize, target: LatticePoint) {
        let old = self.points[index];
        self.occupancy.remove(old);
        self.occupancy.insert(target, index).expect("target must be free");
        self.points[index] = target;
        if index > 0 {
            self.directions[index - 1] =
                Direction::from_offset(target - self.points[index - 1]).expect("target adjacent to predecessor");
        }
        if index + 1 < self.points.len() {
            self.directions[index] =
                Direction::from_offset(self.points[index + 1] - target).expect("target adjacent to successor");
        }
        self.fitness = None;
    }

    /// Copy with residues `lo..lo + segment.len()` placed at `segment`.
    /// Only the touched sites and bonds are checked, so the cost is
    /// proportional to the segment rather than the chain.
    pub fn with_segment(&self, lo: usize, segment: &[LatticePoint]) -> Result<Conformation, ConformationError> {
        let n = self.points.len();
        let hi = lo + segment.len();
        if hi > n {
            return Err(ConformationError::LengthMismatch { left: n, right: hi });
        }
        let mut out = self.clone();
        for &p in &self.points[lo..hi] {
            out.occupancy.remove(p);
        }
        for (k, &p) in segment.iter().enumerate() {
            out.occupancy.insert(p, lo + k).map_err(|_| ConformationError::SelfCollision { index: lo + k })?;
            out.points[lo + k] = p;
        }
        for b in lo.saturating_sub(1)..hi.min(n - 1) {
            out.directions[b] = Direction::from_offset(out.points[b + 1] - out.points[b]).ok_or(ConformationError::Disconnected { index: b })?;
        }
        out.fitness = None;
        Ok(out)
    }

    pub fn translated(&self, t: LatticePoint) -> Conformation {
        Conformation::from_directions_at(self.points[0] + t, &self.directions).expect("translation preserves validity")
    }

    /// Rigid rotation about the origin.
    pub fn rotated(&self, r: &Rotation) -> Conformation {
        Conformation::from_points(self.points.iter().map(|&p| r.apply(p)).collect()).expect("rotation preserves validity")
    }

    /// Same chain read from the other end.
    pub fn reversed(&self) -> Conformation {
        let mut pts = self.points.clone();
        pts.reverse();
        Conformation::from_points(pts).expect("reversal preserves validity")
    }

    /// Re-derives every invariant from the points alone.
    pub fn check(&self) -> Result<(), ConformationError> {
        let rebuilt = Conformation::from_points(self.points.clone())?;
        if rebuilt.directions != self.directions || self.occupancy.len() != self.points.len() {
            return Err(ConformationError::Disconnected { index: 0 });
        }
        for (i, &p) in self.points.iter().enumerate() {
            if self.occupancy.get(p) != Some(i) {
                return Err(ConformationError::SelfCollision { index: i });
            }
        }
        Ok(())
    }

    /// Mean position of the hydrophobic residues of `seq`.
    pub fn hcc(&self, seq: &Sequence) -> Result<Hcc, ConformationError> {
        hcc_of(&self.points, seq.residues())
    }

    /// Writes the dump format: `index x y z code` per residue plus a trailer.
    pub fn to_dump(&self, seq: &Sequence, energy: f64, model: &str) -> String {
        let mut out = String::new();
        for (i, (p, a)) in self.points.iter().zip(seq.residues()).enumerate() {
            writeln!(out, "{} {} {} {} {}", i, p.x, p.y, p.z, a.code()).unwrap();
        }
        writeln!(out, "energy {} model {}", energy, model).unwrap();
        out
    }
}

/// Hydrophobic-core centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hcc {
    pub cx: f64,
    pub cy: f64,
    pub cz: f64,
}

impl Hcc {
    pub fn distance_to(&self, p: LatticePoint) -> f64 {
        self.sq_distance_to(p).sqrt()
    }

    pub fn sq_distance_to(&self, p: LatticePoint) -> f64 {
        let dx = p.x as f64 - self.cx;
        let dy = p.y as f64 - self.cy;
        let dz = p.z as f64 - self.cz;
        dx * dx + dy * dy + dz * dz
    }
}

pub fn hcc_of(points: &[LatticePoint], residues: &[AminoAcid]) -> Result<Hcc, ConformationError> {
    let (mut sx, mut sy, mut sz, mut k) = (0i64, 0i64, 0i64, 0usize);
    for (p, a) in points.iter().zip(residues) {
        if a.is_hydrophobic() {
            sx += p.x as i64;
            sy += p.y as i64;
            sz += p.z as i64;
            k += 1;
        }
    }
    if k == 0 {
        return Err(ConformationError::NoHydrophobicResidues);
    }
    let k = k as f64;
    Ok(Hcc { cx: sx as f64 / k, cy: sy as f64 / k, cz: sz as f64 / k })
}

/// Fraction of bond directions that differ between two chains.
pub fn diversity(a: &Conformation, b: &Conformation) -> Result<f64, ConformationError> {
    if a.len() != b.len() {
        return Err(ConformationError::LengthMismatch { left: a.len(), right: b.len() });
    }
    let differing = a.directions.iter().zip(&b.directions).filter(|(x, y)| x != y).count();
    Ok(differing as f64 / a.directions.len() as f64)
}

/// A parsed conformation dump.
#[derive(Debug, Clone)]
pub struct ConformationDump {
    pub sequence: Sequence,
    pub conformation: Conformation,
    pub energy: f64,
    pub model: String,
}

pub fn parse_dump(text: &str, id: &str) -> Result<ConformationDump, ConformationError> {
    let bad = |m: String| ConformationError::MalformedDump(m);
    let mut points = Vec::new();
    let mut residues = Vec::new();
    let mut trailer = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "energy" {
            if fields.len() != 4 || fields[2] != "model" {
                return Err(bad(format!("line {}: bad trailer", lineno + 1)));
            }
            let e: f64 = fields[1].parse().map_err(|_| bad(format!("line {}: bad energy", lineno + 1)))?;
            trailer = Some((e, fields[3].to_string()));
            continue;
        }
        if fields.len() != 5 {
            return Err(bad(format!("line {}: expected 5 fields", lineno + 1)));
        }
        let idx: usize = fields[0].parse().map_err(|_| bad(format!("line {}: bad index", lineno + 1)))?;
        if idx != points.len() {
            return Err(bad(format!("line {}: index {} out of order", lineno + 1, idx)));
        }
        let coord = |s: &str| s.parse::<i32>().map_err(|_| bad(format!("line {}: bad coordinate", lineno + 1)));
        points.push(LatticePoint::new(coord(fields[1])?, coord(fields[2])?, coord(fields[3])?));
        let mut chars = fields[4].chars();
        let code = chars.next().filter(|_| chars.next().is_none()).ok_or_else(|| bad(format!("line {}: bad residue", lineno + 1)))?;
        residues.push(AminoAcid::from_code(code).ok_or_else(|| bad(format!("line {}: unknown residue {code}", lineno + 1)))?);
    }
    let (energy, model) = trailer.ok_or_else(|| bad("missing energy trailer".into()))?;
    let conformation = Conformation::from_points(points)?;
    let sequence = Sequence::new(id, residues).map_err(|e| bad(e.to_string()))?;
    Ok(ConformationDump { sequence, conformation, energy, model })
}
