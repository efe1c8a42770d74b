//! Move operators on lattice chains.
//!
//! Primitive operators: single-point crossover, pivot rotation, diagonal
//! move, pull move and tilt move. On top of them sit the exhaustive
//! wrappers ([`do_mutation`], [`do_crossover`]) that apply an operator at
//! every position and keep the best result, and the hydrophobic-core
//! directed [`macro_mutation`].
//!
//! Every operator returns a fresh, validated [`Conformation`] or a
//! [`MoveError`]; inputs are never modified. Enumeration order of positions
//! and secondary choices is fixed so that "first feasible" and tie-breaking
//! are deterministic.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conformation::{hcc_of, Conformation, Hcc};
use crate::energy::Objective;
use crate::lattice::{is_contact, lattice_rotations, neighbors, rotate_direction, Direction, LatticePoint, BASIS};
use crate::sequence::{HpClass, Sequence};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("move would break self-avoidance")]
    Infeasible,
    #[error("operator not applicable at position {0}")]
    NotApplicable(usize),
    #[error("position {pos} out of range for a chain of {len} residues")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("chains differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// The six operators the engine schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    Crossover,
    Rotation,
    Diagonal,
    Pull,
    Tilt,
    #[serde(rename = "macro")]
    MacroMutation,
}

impl Operator {
    /// Order used for operator weights.
    pub const ALL: [Operator; 6] = [
        Operator::Crossover,
        Operator::Rotation,
        Operator::Diagonal,
        Operator::Pull,
        Operator::Tilt,
        Operator::MacroMutation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Operator::Crossover => "crossover",
            Operator::Rotation => "rotation",
            Operator::Diagonal => "diagonal",
            Operator::Pull => "pull",
            Operator::Tilt => "tilt",
            Operator::MacroMutation => "macro",
        }
    }

    pub fn as_mutation(self) -> Option<MutationOp> {
        match self {
            Operator::Rotation => Some(MutationOp::Rotation),
            Operator::Diagonal => Some(MutationOp::Diagonal),
            Operator::Pull => Some(MutationOp::Pull),
            Operator::Tilt => Some(MutationOp::Tilt),
            Operator::Crossover | Operator::MacroMutation => None,
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Operator {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Operator::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| format!("unknown operator '{s}'"))
    }
}

/// Single-chain operators usable with [`do_mutation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MutationOp {
    Rotation,
    Diagonal,
    Pull,
    Tilt,
}

impl From<MutationOp> for Operator {
    fn from(op: MutationOp) -> Operator {
        match op {
            MutationOp::Rotation => Operator::Rotation,
            MutationOp::Diagonal => Operator::Diagonal,
            MutationOp::Pull => Operator::Pull,
            MutationOp::Tilt => Operator::Tilt,
        }
    }
}

/// Result of an exhaustive mutation sweep. `result` is `None` when the
/// parent survived.
#[derive(Debug, Clone)]
pub struct MoveOutcome {
    pub result: Option<Conformation>,
    pub applied_at: Option<usize>,
    pub kind: Operator,
}

impl MoveOutcome {
    pub fn is_unchanged(&self) -> bool {
        self.result.is_none()
    }

    pub fn into_conformation(self, parent: &Conformation) -> Conformation {
        self.result.unwrap_or_else(|| parent.clone())
    }
}

fn check_pos(pos: usize, lo: usize, hi: usize, len: usize) -> Result<(), MoveError> {
    if pos < lo || pos > hi {
        Err(MoveError::PositionOutOfRange { pos, len })
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------- crossover

/// Child made of `a`'s first `pos` bonds followed by `b`'s remaining bonds,
/// rebuilt from the origin.
pub fn splice(a: &Conformation, b: &Conformation, pos: usize) -> Result<Conformation, MoveError> {
    if a.len() != b.len() {
        return Err(MoveError::LengthMismatch(a.len(), b.len()));
    }
    check_pos(pos, 1, a.len() - 1, a.len())?;
    let mut dirs = Vec::with_capacity(a.len() - 1);
    dirs.extend_from_slice(&a.directions()[..pos]);
    dirs.extend_from_slice(&b.directions()[pos..]);
    Conformation::from_directions(&dirs).map_err(|_| MoveError::Infeasible)
}

/// Single-point crossover at bond `pos` (1 ≤ pos ≤ n-1). Fails if either
/// child collides.
pub fn crossover(a: &Conformation, b: &Conformation, pos: usize) -> Result<(Conformation, Conformation), MoveError> {
    Ok((splice(a, b, pos)?, splice(b, a, pos)?))
}

// ----------------------------------------------------------------- rotation

/// Rotates everything after residue `pos` about `points[pos]` by
/// `lattice_rotations()[rotation]`.
pub fn rotation(conf: &Conformation, pos: usize, rotation: usize) -> Result<Conformation, MoveError> {
    let n = conf.len();
    if n < 3 {
        return Err(MoveError::NotApplicable(pos));
    }
    check_pos(pos, 1, n - 2, n)?;
    if rotation >= lattice_rotations().len() {
        return Err(MoveError::NotApplicable(pos));
    }
    let mut dirs = conf.directions().to_vec();
    for d in &mut dirs[pos..] {
        *d = rotate_direction(rotation, *d);
    }
    Conformation::from_directions_at(conf.points()[0], &dirs).map_err(|_| MoveError::Infeasible)
}

// ----------------------------------------------------------------- diagonal

/// Free sites adjacent to both chain neighbours of `pos`, in basis order.
pub fn diagonal_targets(conf: &Conformation, pos: usize) -> Vec<LatticePoint> {
    let n = conf.len();
    if pos == 0 || pos + 1 >= n {
        return Vec::new();
    }
    let (prev, next) = (conf.points()[pos - 1], conf.points()[pos + 1]);
    neighbors(prev).into_iter().filter(|&t| is_contact(t, next) && conf.is_free(t)).collect()
}

/// Moves residue `pos` to `target`, a free common neighbour of its chain
/// neighbours.
pub fn diagonal_move(conf: &Conformation, pos: usize, target: LatticePoint) -> Result<Conformation, MoveError> {
    let n = conf.len();
    if n < 3 {
        return Err(MoveError::NotApplicable(pos));
    }
    check_pos(pos, 1, n - 2, n)?;
    let pts = conf.points();
    if !conf.is_free(target) || !is_contact(target, pts[pos - 1]) || !is_contact(target, pts[pos + 1]) {
        return Err(MoveError::Infeasible);
    }
    let mut out = conf.clone();
    out.relocate_unchecked(pos, target);
    Ok(out)
}

/// Applies the first diagonal move available at `pos`.
pub fn first_diagonal_move(conf: &Conformation, pos: usize) -> Result<Conformation, MoveError> {
    let target = *diagonal_targets(conf, pos).first().ok_or(MoveError::Infeasible)?;
    diagonal_move(conf, pos, target)
}

// --------------------------------------------------------------------- pull

/// Which side of the chain follows the pulled residue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PullDrag {
    /// Residues `0..pos` follow.
    Head,
    /// Residues `pos+1..n` follow.
    Tail,
}

/// One concrete pull: residue `pos` goes to `l`, its dragged neighbour (if
/// any) to `c`, and residues further along follow two sites behind until
/// `moved` residues in total have been displaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PullCandidate {
    pub pos: usize,
    pub drag: PullDrag,
    pub l: LatticePoint,
    pub c: Option<LatticePoint>,
    pub moved: usize,
}

// A chain read in either direction, so that head-side logic also serves
// the tail side.
#[derive(Clone, Copy)]
struct View<'a> {
    pts: &'a [LatticePoint],
    rev: bool,
}

impl View<'_> {
    fn at(&self, k: usize) -> LatticePoint {
        if self.rev {
            self.pts[self.pts.len() - 1 - k]
        } else {
            self.pts[k]
        }
    }

    fn len(&self) -> usize {
        self.pts.len()
    }
}

// Drag extents for residue `i` going to `l` and `i-1` going to `c`, on a
// chain oriented so that the dragged side is `0..i`.
//
// The shortest extent (stop as soon as the chain reconnects) always comes
// first. Longer extents that end at another reconnection point are kept only
// while the reverse pull would itself stop at the shortest extent; this
// makes the candidate set closed under inversion.
fn drag_extents(v: View<'_>, i: usize, l: LatticePoint, c: LatticePoint, mut emit: impl FnMut(usize)) {
    debug_assert!(i >= 1);
    // k = lowest displaced residue; residues k..=i move
    let mut inverse_shortest = true;
    let mut emitted = false;
    let mut placed_k = c;
    let mut k = i - 1;
    loop {
        if (k == 0 || is_contact(v.at(k - 1), placed_k)) && (!emitted || inverse_shortest) {
            emit(i - k + 1);
            emitted = true;
        }
        if k == 0 || (emitted && !inverse_shortest) {
            return;
        }
        k -= 1;
        placed_k = v.at(k + 2);
        // residue k+2 is now final; the reverse pull would stop early if its
        // site touches the original site of k+1
        let placed = if k + 2 == i { l } else if k + 2 == i - 1 { c } else { v.at(k + 4) };
        if is_contact(placed, v.at(k + 1)) {
            inverse_shortest = false;
        }
    }
}

// COMMON[a][b]: bit m is set when `B[a] + B[m]` is a neighbour of `B[b]`,
// i.e. the sites `c` next to both `l = anchor + B[a]` and `anchor + B[b]`.
static COMMON: LazyLock<[[u16; 12]; 12]> = LazyLock::new(|| {
    let mut t = [[0u16; 12]; 12];
    for (a, row) in t.iter_mut().enumerate() {
        for (b, mask) in row.iter_mut().enumerate() {
            for (m, &bm) in BASIS.iter().enumerate() {
                if (BASIS[a] + bm - BASIS[b]).sq_norm() == 2 {
                    *mask |= 1 << m;
                }
            }
        }
    }
    t
});

// Head-drag candidates for residue `i` of the oriented chain.
fn head_candidates(v: View<'_>, conf: &Conformation, i: usize, drag: PullDrag, pos: usize, out: &mut Vec<PullCandidate>) {
    let n = v.len();
    let free = |p: LatticePoint| conf.is_free(p);
    if i + 1 < n {
        let anchor = v.at(i + 1);
        let here = v.at(i);
        let b = Direction::from_offset(here - anchor).expect("consecutive residues are adjacent").index();
        for (a, l) in neighbors(anchor).into_iter().enumerate() {
            if !free(l) {
                continue;
            }
            if i == 0 {
                out.push(PullCandidate { pos, drag, l, c: None, moved: 1 });
                continue;
            }
            let prev = v.at(i - 1);
            let mut mask = COMMON[a][b];
            while mask != 0 {
                let c = l + BASIS[mask.trailing_zeros() as usize];
                mask &= mask - 1;
                if c == prev {
                    out.push(PullCandidate { pos, drag, l, c: Some(c), moved: 1 });
                } else if free(c) {
                    drag_extents(v, i, l, c, |moved| out.push(PullCandidate { pos, drag, l, c: Some(c), moved }));
                }
            }
        }
    } else {
        // free end: residue i takes l, its neighbour takes c next to the old site
        for c in neighbors(v.at(i)) {
            if !free(c) {
                continue;
            }
            for l in neighbors(c) {
                if free(l) {
                    drag_extents(v, i, l, c, |moved| out.push(PullCandidate { pos, drag, l, c: Some(c), moved }));
                }
            }
        }
    }
}

/// All pull moves at residue `pos`.
///
/// The side whose end is nearer to `pos` is listed first (ties: the tail,
/// i.e. toward the C-terminus); within a side, `l` then `c` run in basis
/// order, then drag extents from shortest to longest.
pub fn pull_candidates(conf: &Conformation, pos: usize) -> Vec<PullCandidate> {
    let n = conf.len();
    let mut out = Vec::with_capacity(128);
    if pos >= n {
        return out;
    }
    let order = if pos < n - 1 - pos { [PullDrag::Head, PullDrag::Tail] } else { [PullDrag::Tail, PullDrag::Head] };
    let pts = conf.points();
    for drag in order {
        match drag {
            PullDrag::Head => head_candidates(View { pts, rev: false }, conf, pos, drag, pos, &mut out),
            PullDrag::Tail => head_candidates(View { pts, rev: true }, conf, n - 1 - pos, drag, pos, &mut out),
        }
    }
    out
}

/// Executes a pull candidate. Candidates from [`pull_candidates`] always
/// succeed; hand-built ones are checked.
pub fn apply_pull(conf: &Conformation, cand: &PullCandidate) -> Result<Conformation, MoveError> {
    let n = conf.len();
    if cand.pos >= n || cand.moved == 0 {
        return Err(MoveError::PositionOutOfRange { pos: cand.pos, len: n });
    }
    let rev = cand.drag == PullDrag::Tail;
    let v = View { pts: conf.points(), rev };
    let i = if rev { n - 1 - cand.pos } else { cand.pos };
    if cand.moved > i + 1 {
        return Err(MoveError::Infeasible);
    }
    let lo = i + 1 - cand.moved;
    let mut seg: Vec<LatticePoint> = (lo..=i)
        .map(|k| {
            if k == i {
                Ok(cand.l)
            } else if k + 1 == i {
                cand.c.ok_or(MoveError::Infeasible)
            } else {
                Ok(v.at(k + 2))
            }
        })
        .collect::<Result<_, _>>()?;
    let abs_lo = if rev {
        seg.reverse();
        n - 1 - i
    } else {
        lo
    };
    conf.with_segment(abs_lo, &seg).map_err(|_| MoveError::Infeasible)
}

/// Pull move number `choice` at `pos`.
pub fn pull_move(conf: &Conformation, pos: usize, choice: usize) -> Result<Conformation, MoveError> {
    check_pos(pos, 0, conf.len() - 1, conf.len())?;
    let cands = pull_candidates(conf, pos);
    let cand = cands.get(choice).ok_or(MoveError::Infeasible)?;
    apply_pull(conf, cand)
}

/// A uniformly chosen pull among those available at `pos`.
pub fn random_pull_at<R: Rng + ?Sized>(conf: &Conformation, pos: usize, rng: &mut R) -> Option<Conformation> {
    let cands = pull_candidates(conf, pos);
    let cand = cands.choose(rng)?;
    apply_pull(conf, cand).ok()
}

/// A uniformly chosen pull over the whole chain.
pub fn random_pull<R: Rng + ?Sized>(conf: &Conformation, rng: &mut R) -> Option<Conformation> {
    let all: Vec<PullCandidate> = (0..conf.len()).flat_map(|p| pull_candidates(conf, p)).collect();
    let cand = all.choose(rng)?;
    apply_pull(conf, cand).ok()
}

// --------------------------------------------------------------------- tilt

/// Maximal straight run containing bond `pos`, as inclusive residue range.
/// `None` unless the run spans at least two bonds and leaves part of the
/// chain outside it.
pub fn tilt_run(conf: &Conformation, pos: usize) -> Option<(usize, usize)> {
    let dirs = conf.directions();
    if pos >= dirs.len() {
        return None;
    }
    let d = dirs[pos];
    let mut first = pos;
    while first > 0 && dirs[first - 1] == d {
        first -= 1;
    }
    let mut last = pos;
    while last + 1 < dirs.len() && dirs[last + 1] == d {
        last += 1;
    }
    let (start, end) = (first, last + 1);
    if last - first < 1 || (start == 0 && end == conf.len() - 1) {
        return None;
    }
    Some((start, end))
}

/// Shifts the straight segment `start..=end` by `offset` and pulls both
/// sides of the chain after it until the chain reconnects.
pub fn tilt_segment(conf: &Conformation, start: usize, end: usize, offset: Direction) -> Result<Conformation, MoveError> {
    let n = conf.len();
    if start >= end || end >= n {
        return Err(MoveError::PositionOutOfRange { pos: end, len: n });
    }
    let dirs = conf.directions();
    let d = dirs[start];
    if dirs[start..end].iter().any(|&x| x != d) || (start == 0 && end == n - 1) {
        return Err(MoveError::NotApplicable(start));
    }
    if offset == d || offset == d.opposite() {
        return Err(MoveError::NotApplicable(start));
    }
    let t = offset.offset();
    let pts = conf.points();
    let mut new = pts.to_vec();
    for p in &mut new[start..=end] {
        *p = *p + t;
    }
    for j in (0..start).rev() {
        if is_contact(pts[j], new[j + 1]) {
            break;
        }
        new[j] = pts[j + 1];
    }
    for j in end + 1..n {
        if is_contact(pts[j], new[j - 1]) {
            break;
        }
        new[j] = pts[j - 1];
    }
    Conformation::from_points(new).map_err(|_| MoveError::Infeasible)
}

/// Tilts the maximal straight run containing bond `pos` by `offset`.
pub fn tilt_move(conf: &Conformation, pos: usize, offset: Direction) -> Result<Conformation, MoveError> {
    let (start, end) = tilt_run(conf, pos).ok_or(MoveError::NotApplicable(pos))?;
    tilt_segment(conf, start, end, offset)
}

// ------------------------------------------------------- exhaustive wrappers

/// Every feasible single application of `op`, tagged with its position, in
/// sweep order.
pub fn mutation_neighborhood(conf: &Conformation, op: MutationOp) -> Vec<(usize, Conformation)> {
    let mut out = Vec::new();
    for_each_mutation(conf, op, |pos, child| {
        out.push((pos, child));
    });
    out
}

fn for_each_mutation(conf: &Conformation, op: MutationOp, mut visit: impl FnMut(usize, Conformation)) {
    let n = conf.len();
    match op {
        MutationOp::Rotation => {
            for pos in 1..n.saturating_sub(1) {
                for r in 1..lattice_rotations().len() {
                    if let Ok(c) = rotation(conf, pos, r) {
                        visit(pos, c);
                    }
                }
            }
        }
        MutationOp::Diagonal => {
            for pos in 1..n.saturating_sub(1) {
                for t in diagonal_targets(conf, pos) {
                    if let Ok(c) = diagonal_move(conf, pos, t) {
                        visit(pos, c);
                    }
                }
            }
        }
        MutationOp::Pull => {
            for pos in 0..n {
                for cand in pull_candidates(conf, pos) {
                    if let Ok(c) = apply_pull(conf, &cand) {
                        visit(pos, c);
                    }
                }
            }
        }
        MutationOp::Tilt => {
            let dirs = conf.directions();
            for pos in 0..dirs.len() {
                // each run is visited once, from its first bond
                if pos > 0 && dirs[pos - 1] == dirs[pos] {
                    continue;
                }
                let Some((start, end)) = tilt_run(conf, pos) else { continue };
                let d = dirs[pos];
                for offset in Direction::all() {
                    if offset == d || offset == d.opposite() {
                        continue;
                    }
                    if let Ok(c) = tilt_segment(conf, start, end, offset) {
                        visit(pos, c);
                    }
                }
            }
        }
    }
}

/// Applies `op` at every position and choice; returns the lowest-energy
/// child, or the parent when no child is strictly better. Ties go to the
/// earliest child in sweep order.
pub fn do_mutation(conf: &Conformation, op: MutationOp, objective: &Objective<'_>) -> MoveOutcome {
    let parent_energy = conf.fitness().unwrap_or_else(|| objective.energy(conf));
    let mut best: Option<(f64, usize, Conformation)> = None;
    for_each_mutation(conf, op, |pos, mut child| {
        let e = objective.score(&mut child);
        let bar = best.as_ref().map_or(parent_energy, |b| b.0);
        if e < bar {
            best = Some((e, pos, child));
        }
    });
    match best {
        Some((_, pos, child)) => MoveOutcome { result: Some(child), applied_at: Some(pos), kind: op.into() },
        None => MoveOutcome { result: None, applied_at: None, kind: op.into() },
    }
}

/// Crossover at every splice point; returns the best two of the parents and
/// all feasible children, lower energy first. Both results carry a cached
/// fitness.
pub fn do_crossover(a: &Conformation, b: &Conformation, objective: &Objective<'_>) -> (Conformation, Conformation) {
    let mut a = a.clone();
    let mut b = b.clone();
    objective.fitness(&mut a);
    objective.fitness(&mut b);
    let mut pool = vec![a, b];
    if pool[0].len() == pool[1].len() {
        for pos in 1..pool[0].len() {
            for (x, y) in [(0, 1), (1, 0)] {
                if let Ok(mut child) = splice(&pool[x], &pool[y], pos) {
                    objective.score(&mut child);
                    pool.push(child);
                }
            }
        }
    }
    // stable: equal energies keep pool order
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&i, &j| pool[i].fitness().unwrap().total_cmp(&pool[j].fitness().unwrap()));
    let second = pool[order[1]].clone();
    let first = pool.swap_remove(order[0]);
    (first, second)
}

// ----------------------------------------------------------- macro-mutation

/// How macro-mutation chooses residues and targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MacroGuidance {
    /// Bernoulli choice between P and H residues; H moves must not increase
    /// the distance to the hydrophobic-core centre.
    HydrophobicCore,
    /// First feasible diagonal move at every residue, no class or distance
    /// test.
    Unguided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroParams {
    pub repeat: usize,
    pub p_polar: f64,
    pub guidance: MacroGuidance,
}

impl Default for MacroParams {
    fn default() -> Self {
        MacroParams { repeat: 5, p_polar: 0.20, guidance: MacroGuidance::HydrophobicCore }
    }
}

/// One accepted diagonal move inside a macro-mutation.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroStep {
    pub iteration: usize,
    pub residue: usize,
    pub class: HpClass,
    pub from: LatticePoint,
    pub to: LatticePoint,
    /// Centre in force when the move was chosen (H moves only).
    pub hcc: Option<Hcc>,
}

#[derive(Debug, Clone)]
pub struct MacroOutcome {
    pub conformation: Conformation,
    pub steps: Vec<MacroStep>,
}

/// Composite diagonal-move operator that squeezes hydrophobic residues
/// toward their common centre.
///
/// Each of `repeat` iterations draws the residue class (P with probability
/// `p_polar`), recomputes the centre once, then walks the residues of that
/// class in chain order. P residues take their first feasible diagonal
/// move. H residues take the first one that does not increase their
/// distance to the centre, after which the iteration ends.
#[allow(clippy::needless_range_loop)]
pub fn macro_mutation<R: Rng + ?Sized>(conf: &Conformation, seq: &Sequence, params: &MacroParams, rng: &mut R) -> MacroOutcome {
    let mut c = conf.clone();
    let mut steps = Vec::new();
    let residues = seq.residues();
    let n = c.len();
    for iteration in 0..params.repeat {
        match params.guidance {
            MacroGuidance::Unguided => {
                for j in 1..n.saturating_sub(1) {
                    if let Some(&t) = diagonal_targets(&c, j).first() {
                        let from = c.points()[j];
                        c.relocate_unchecked(j, t);
                        steps.push(MacroStep { iteration, residue: j, class: residues[j].hp_class(), from, to: t, hcc: None });
                    }
                }
            }
            MacroGuidance::HydrophobicCore => {
                let class = if rng.gen_bool(params.p_polar) { HpClass::P } else { HpClass::H };
                let hcc = hcc_of(c.points(), residues).ok();
                for j in 1..n.saturating_sub(1) {
                    if residues[j].hp_class() != class {
                        continue;
                    }
                    let targets = diagonal_targets(&c, j);
                    let from = c.points()[j];
                    match class {
                        HpClass::P => {
                            if let Some(&t) = targets.first() {
                                c.relocate_unchecked(j, t);
                                steps.push(MacroStep { iteration, residue: j, class, from, to: t, hcc: None });
                            }
                        }
                        HpClass::H => {
                            let Some(h) = hcc else { break };
                            let d_old = h.sq_distance_to(from);
                            if let Some(&t) = targets.iter().find(|&&t| h.sq_distance_to(t) <= d_old) {
                                c.relocate_unchecked(j, t);
                                steps.push(MacroStep { iteration, residue: j, class, from, to: t, hcc: Some(h) });
                                break;
                            }
                        }
                    }
                }
            }
        }
    }
    MacroOutcome { conformation: c, steps }
}
