//! Exhaustive enumeration of short self-avoiding walks.
//!
//! Walks are generated depth-first with occupancy pruning, so the cost is
//! the number of valid walks rather than `12^(n-1)`. Lengths are capped
//! (default 9) to keep a full scan in the minutes range.

use rayon::prelude::*;
use rustc_hash::FxHashSet;
use thiserror::Error;

use crate::conformation::Conformation;
use crate::energy::{evaluate, ContactMatrix};
use crate::lattice::{lattice_rotations, Direction, LatticePoint};
use crate::sequence::Sequence;

pub const DEFAULT_CAP: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("chain length {n} exceeds the enumeration cap of {cap}")]
    TooLong { n: usize, cap: usize },
    #[error("chain length {0} is below 2")]
    TooShort(usize),
}

fn check_len(n: usize, cap: usize) -> Result<(), OracleError> {
    if n < 2 {
        Err(OracleError::TooShort(n))
    } else if n > cap {
        Err(OracleError::TooLong { n, cap })
    } else {
        Ok(())
    }
}

/// True when `dirs` is the lexicographically smallest image of itself
/// under the 24 lattice rotations (directions compared by basis index).
pub fn is_canonical(dirs: &[Direction]) -> bool {
    let Some(&first) = dirs.first() else { return true };
    for r in 1..lattice_rotations().len() {
        let rot = &lattice_rotations()[r];
        if rot.apply_direction(first).index() > first.index() {
            continue;
        }
        for &d in dirs {
            let (a, b) = (rot.apply_direction(d).index(), d.index());
            if a < b {
                return false;
            }
            if a > b {
                break;
            }
        }
    }
    true
}

/// Lexicographically smallest rotation image of `dirs`.
pub fn canonical_directions(dirs: &[Direction]) -> Vec<Direction> {
    lattice_rotations()
        .iter()
        .map(|rot| dirs.iter().map(|&d| rot.apply_direction(d)).collect::<Vec<_>>())
        .min_by(|a, b| a.iter().map(|d| d.index()).cmp(b.iter().map(|d| d.index())))
        .unwrap_or_default()
}

struct Walker {
    n: usize,
    dirs: Vec<Direction>,
    points: Vec<LatticePoint>,
    seen: FxHashSet<LatticePoint>,
}

impl Walker {
    fn new(n: usize, prefix: &[Direction]) -> Option<Walker> {
        let mut w = Walker { n, dirs: Vec::with_capacity(n), points: vec![LatticePoint::ORIGIN], seen: FxHashSet::default() };
        w.seen.insert(LatticePoint::ORIGIN);
        for &d in prefix {
            if !w.push(d) {
                return None;
            }
        }
        Some(w)
    }

    fn push(&mut self, d: Direction) -> bool {
        let p = *self.points.last().unwrap() + d.offset();
        if !self.seen.insert(p) {
            return false;
        }
        self.points.push(p);
        self.dirs.push(d);
        true
    }

    fn pop(&mut self) {
        let p = self.points.pop().unwrap();
        self.seen.remove(&p);
        self.dirs.pop();
    }

    fn walk(&mut self, visit: &mut dyn FnMut(&[Direction], &[LatticePoint])) {
        if self.points.len() == self.n {
            visit(&self.dirs, &self.points);
            return;
        }
        for d in Direction::all() {
            if self.push(d) {
                self.walk(visit);
                self.pop();
            }
        }
    }
}

fn first_dirs(symmetry_reduce: bool) -> Vec<Direction> {
    if symmetry_reduce {
        vec![Direction::new(0).unwrap()]
    } else {
        Direction::all().collect()
    }
}

/// Calls `visit` with every self-avoiding walk of `n` residues starting at
/// the origin, in lexicographic direction order. With `symmetry_reduce`
/// only the canonical representative of each rotation class is visited.
pub fn for_each_saw(n: usize, symmetry_reduce: bool, cap: usize, mut visit: impl FnMut(&[Direction], &[LatticePoint])) -> Result<(), OracleError> {
    check_len(n, cap)?;
    for first in first_dirs(symmetry_reduce) {
        let mut w = Walker::new(n, &[first]).unwrap();
        if symmetry_reduce {
            w.walk(&mut |dirs, pts| {
                if is_canonical(dirs) {
                    visit(dirs, pts)
                }
            });
        } else {
            w.walk(&mut visit);
        }
    }
    Ok(())
}

/// Collects [`for_each_saw`] output as direction strings.
pub fn enumerate_saws(n: usize, symmetry_reduce: bool) -> Result<Vec<Vec<Direction>>, OracleError> {
    let mut out = Vec::new();
    for_each_saw(n, symmetry_reduce, DEFAULT_CAP, |d, _| out.push(d.to_vec()))?;
    Ok(out)
}

pub fn count_saws(n: usize, symmetry_reduce: bool) -> Result<u64, OracleError> {
    let mut count = 0u64;
    for_each_saw(n, symmetry_reduce, DEFAULT_CAP, |_, _| count += 1)?;
    Ok(count)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationResult {
    pub n: usize,
    /// Canonical (rotation-reduced) walks scanned.
    pub count: u64,
    pub optimum: f64,
    pub argmin: Vec<Direction>,
}

impl EnumerationResult {
    pub fn argmin_string(&self) -> String {
        self.argmin.iter().map(|d| d.to_char()).collect()
    }

    pub fn witness(&self) -> Conformation {
        Conformation::from_directions(&self.argmin).expect("oracle witness is a valid walk")
    }
}

// Per-subtree scan: (canonical count, best energy, first witness).
fn scan_subtree(n: usize, prefix: &[Direction], seq: &Sequence, matrix: &ContactMatrix) -> Option<(u64, f64, Vec<Direction>)> {
    let mut w = Walker::new(n, prefix)?;
    let residues = seq.residues();
    let mut count = 0u64;
    let mut best: Option<(f64, Vec<Direction>)> = None;
    w.walk(&mut |dirs, pts| {
        if !is_canonical(dirs) {
            return;
        }
        count += 1;
        let mut e = 0.0;
        for i in 0..n {
            for j in i + 2..n {
                if pts[i].sq_dist(pts[j]) == 2 {
                    e += matrix.get(residues[i], residues[j]);
                }
            }
        }
        if best.as_ref().is_none_or(|b| e < b.0) {
            best = Some((e, dirs.to_vec()));
        }
    });
    best.map(|(e, d)| (count, e, d))
}

/// Exact minimum energy of `seq` under `matrix` over all walks, with a
/// witness. Rotations are factored out since energy is invariant under
/// them.
pub fn exact_optimum(seq: &Sequence, matrix: &ContactMatrix) -> Result<EnumerationResult, OracleError> {
    exact_optimum_with_cap(seq, matrix, DEFAULT_CAP)
}

pub fn exact_optimum_with_cap(seq: &Sequence, matrix: &ContactMatrix, cap: usize) -> Result<EnumerationResult, OracleError> {
    let n = seq.len();
    check_len(n, cap)?;
    let v1 = Direction::new(0).unwrap();
    let prefixes: Vec<Vec<Direction>> = if n == 2 { vec![vec![v1]] } else { Direction::all().map(|d| vec![v1, d]).collect() };
    let parts: Vec<_> = prefixes.par_iter().map(|p| scan_subtree(n, p, seq, matrix)).collect();
    let mut count = 0;
    let mut best: Option<(f64, Vec<Direction>)> = None;
    for (c, e, d) in parts.into_iter().flatten() {
        count += c;
        if best.as_ref().is_none_or(|b| e < b.0) {
            best = Some((e, d));
        }
    }
    let (_, argmin) = best.expect("every length has at least one walk");
    // report the energy exactly as the evaluator sums it
    let optimum = evaluate(&Conformation::from_directions(&argmin).unwrap(), seq, matrix);
    Ok(EnumerationResult { n, count, optimum, argmin })
}
