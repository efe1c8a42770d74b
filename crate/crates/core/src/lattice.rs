//! Face-centred-cubic lattice geometry.
//!
//! Points live on the integer grid; two points are lattice neighbours when
//! their squared Euclidean distance is 2. The twelve neighbour offsets are
//! stored in a fixed order (`v1..v12`) and that order is part of the
//! determinism contract of every operator built on top of this module.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::OnceLock;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

/// A site of the FCC lattice in integer coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { x: 0, y: 0, z: 0 };

    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        LatticePoint { x, y, z }
    }

    pub fn sq_dist(self, other: LatticePoint) -> i64 {
        let dx = (self.x - other.x) as i64;
        let dy = (self.y - other.y) as i64;
        let dz = (self.z - other.z) as i64;
        dx * dx + dy * dy + dz * dz
    }

    pub fn sq_norm(self) -> i64 {
        self.sq_dist(LatticePoint::ORIGIN)
    }

    pub fn as_f64(self) -> [f64; 3] {
        [self.x as f64, self.y as f64, self.z as f64]
    }
}

impl Add for LatticePoint {
    type Output = LatticePoint;
    fn add(self, rhs: LatticePoint) -> LatticePoint {
        LatticePoint::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for LatticePoint {
    type Output = LatticePoint;
    fn sub(self, rhs: LatticePoint) -> LatticePoint {
        LatticePoint::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> LatticePoint {
        LatticePoint::new(-self.x, -self.y, -self.z)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// The twelve FCC neighbour offsets, `v1..v12`.
pub const BASIS: [LatticePoint; 12] = [
    LatticePoint::new(1, 1, 0),
    LatticePoint::new(1, 0, 1),
    LatticePoint::new(0, 1, 1),
    LatticePoint::new(-1, -1, 0),
    LatticePoint::new(-1, 0, -1),
    LatticePoint::new(0, -1, -1),
    LatticePoint::new(-1, 1, 0),
    LatticePoint::new(1, -1, 0),
    LatticePoint::new(-1, 0, 1),
    LatticePoint::new(0, 1, -1),
    LatticePoint::new(1, 0, -1),
    LatticePoint::new(0, -1, 1),
];

/// Index into [`BASIS`]; `Direction(0)` is `v1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Direction(u8);

impl Direction {
    pub const COUNT: usize = 12;

    pub fn new(index: usize) -> Option<Direction> {
        (index < Self::COUNT).then_some(Direction(index as u8))
    }

    /// Direction from a 1-based label (`v1` is 1).
    pub fn from_label(label: usize) -> Option<Direction> {
        label.checked_sub(1).and_then(Direction::new)
    }

    pub fn all() -> impl Iterator<Item = Direction> {
        (0..Self::COUNT as u8).map(Direction)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn label(self) -> usize {
        self.0 as usize + 1
    }

    pub fn offset(self) -> LatticePoint {
        BASIS[self.index()]
    }

    pub fn from_offset(offset: LatticePoint) -> Option<Direction> {
        BASIS.iter().position(|&b| b == offset).map(|i| Direction(i as u8))
    }

    pub fn opposite(self) -> Direction {
        Direction::from_offset(-self.offset()).expect("basis is closed under negation")
    }

    /// Single character code `a..l` used in compact direction strings.
    pub fn to_char(self) -> char {
        (b'a' + self.0) as char
    }

    pub fn from_char(c: char) -> Option<Direction> {
        if c.is_ascii_lowercase() {
            Direction::new((c as u8 - b'a') as usize)
        } else {
            None
        }
    }
}

/// Lattice neighbours of `p` in basis order.
pub fn neighbors(p: LatticePoint) -> [LatticePoint; 12] {
    BASIS.map(|b| p + b)
}

/// Whether `p` and `q` occupy neighbouring lattice sites.
pub fn is_contact(p: LatticePoint, q: LatticePoint) -> bool {
    p.sq_dist(q) == 2
}

/// A proper rotation of the cube expressed as a signed permutation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rotation {
    m: [[i32; 3]; 3],
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation {
        m: [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
    };

    pub fn matrix(&self) -> [[i32; 3]; 3] {
        self.m
    }

    pub fn apply(&self, p: LatticePoint) -> LatticePoint {
        let v = [p.x, p.y, p.z];
        let row = |r: [i32; 3]| r[0] * v[0] + r[1] * v[1] + r[2] * v[2];
        LatticePoint::new(row(self.m[0]), row(self.m[1]), row(self.m[2]))
    }

    pub fn apply_direction(&self, d: Direction) -> Direction {
        Direction::from_offset(self.apply(d.offset())).expect("rotations permute the basis")
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        let mut m = [[0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Rotation { m }
    }

    /// Inverse; for an orthogonal matrix this is the transpose.
    pub fn inverse(&self) -> Rotation {
        let mut m = [[0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.m[j][i];
            }
        }
        Rotation { m }
    }

    fn determinant(m: &[[i32; 3]; 3]) -> i32 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

struct RotationTables {
    rotations: Vec<Rotation>,
    // direction_map[r][d] = index of R_r(v_d)
    direction_map: Vec<[u8; 12]>,
}

fn tables() -> &'static RotationTables {
    static TABLES: OnceLock<RotationTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut rotations = Vec::with_capacity(24);
        for perm in PERMS {
            for signs in 0..8u8 {
                let mut m = [[0; 3]; 3];
                for (row, &col) in perm.iter().enumerate() {
                    m[row][col] = if signs >> row & 1 == 1 { -1 } else { 1 };
                }
                if Rotation::determinant(&m) == 1 {
                    rotations.push(Rotation { m });
                }
            }
        }
        // identity first
        let id = rotations.iter().position(|r| *r == Rotation::IDENTITY).unwrap();
        rotations.swap(0, id);
        let direction_map = rotations
            .iter()
            .map(|r| {
                let mut map = [0u8; 12];
                for d in Direction::all() {
                    map[d.index()] = r.apply_direction(d).0;
                }
                map
            })
            .collect();
        RotationTables { rotations, direction_map }
    })
}

/// The 24 proper rotations of the octahedral group, identity first.
pub fn lattice_rotations() -> &'static [Rotation] {
    &tables().rotations
}

/// Image of `d` under `lattice_rotations()[rotation]`, from a precomputed table.
pub fn rotate_direction(rotation: usize, d: Direction) -> Direction {
    Direction(tables().direction_map[rotation][d.index()])
}

/// Maps occupied lattice sites to residue indices.
#[derive(Debug, Clone, Default)]
pub struct OccupancyIndex {
    sites: FxHashMap<LatticePoint, usize>,
}

impl OccupancyIndex {
    pub fn with_capacity(n: usize) -> Self {
        let mut sites = FxHashMap::default();
        sites.reserve(n);
        OccupancyIndex { sites }
    }

    /// Inserts `residue` at `p`. Returns the residue already there, leaving
    /// the index unchanged, if the site is taken.
    pub fn insert(&mut self, p: LatticePoint, residue: usize) -> Result<(), usize> {
        match self.sites.entry(p) {
            std::collections::hash_map::Entry::Occupied(e) => Err(*e.get()),
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(residue);
                Ok(())
            }
        }
    }

    pub fn remove(&mut self, p: LatticePoint) -> Option<usize> {
        self.sites.remove(&p)
    }

    pub fn get(&self, p: LatticePoint) -> Option<usize> {
        self.sites.get(&p).copied()
    }

    pub fn is_free(&self, p: LatticePoint) -> bool {
        !self.sites.contains_key(&p)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn origin_neighbours_match_basis_list() {
        let n = neighbors(LatticePoint::ORIGIN);
        assert!(n.contains(&LatticePoint::new(1, 1, 0)));
        assert!(n.contains(&LatticePoint::new(0, -1, 1)));
        assert!(!n.contains(&LatticePoint::new(2, 0, 0)));
        assert_eq!(n[0], LatticePoint::new(1, 1, 0));
        assert_eq!(n[11], LatticePoint::new(0, -1, 1));
    }

    #[test]
    fn neighbours_are_distinct_and_at_sq_distance_two() {
        let p = LatticePoint::new(5, -3, 2);
        let n = neighbors(p);
        let set: HashSet<_> = n.iter().collect();
        assert_eq!(set.len(), 12);
        assert!(n.iter().all(|&q| p.sq_dist(q) == 2));
    }

    #[test]
    fn basis_closed_under_negation() {
        for d in Direction::all() {
            let neg = -d.offset();
            assert!(BASIS.contains(&neg), "{} has no negation", d.offset());
            assert_eq!(d.opposite().opposite(), d);
            assert_ne!(d.opposite(), d);
        }
    }

    #[test]
    fn contact_predicate() {
        let o = LatticePoint::ORIGIN;
        assert!(is_contact(o, LatticePoint::new(1, 0, 1)));
        assert!(!is_contact(o, o));
        assert!(!is_contact(o, LatticePoint::new(1, 1, 1)));
    }

    #[test]
    fn twenty_four_rotations_stabilise_basis() {
        let rots = lattice_rotations();
        assert_eq!(rots.len(), 24);
        assert_eq!(rots[0], Rotation::IDENTITY);
        let basis: HashSet<_> = BASIS.iter().copied().collect();
        for r in rots {
            let image: HashSet<_> = BASIS.iter().map(|&b| r.apply(b)).collect();
            assert_eq!(image, basis);
        }
        let distinct: HashSet<_> = rots.iter().collect();
        assert_eq!(distinct.len(), 24);
    }

    #[test]
    fn rotations_form_a_group() {
        let rots = lattice_rotations();
        for a in rots {
            assert_eq!(a.compose(&a.inverse()), Rotation::IDENTITY);
            assert!(rots.contains(&a.inverse()));
            for b in rots {
                assert!(rots.contains(&a.compose(b)));
            }
        }
    }

    #[test]
    fn direction_table_agrees_with_matrix() {
        for (i, r) in lattice_rotations().iter().enumerate() {
            for d in Direction::all() {
                assert_eq!(rotate_direction(i, d).offset(), r.apply(d.offset()));
            }
        }
    }

    #[test]
    fn occupancy_rejects_second_resident() {
        let mut occ = OccupancyIndex::default();
        let p = LatticePoint::new(1, 1, 0);
        assert!(occ.insert(p, 0).is_ok());
        assert_eq!(occ.insert(p, 1), Err(0));
        assert_eq!(occ.get(p), Some(0));
        assert!(!occ.is_free(p));
        assert_eq!(occ.remove(p), Some(0));
        assert!(occ.is_free(p));
    }

    #[test]
    fn direction_char_round_trip() {
        for d in Direction::all() {
            assert_eq!(Direction::from_char(d.to_char()), Some(d));
            assert_eq!(Direction::from_label(d.label()), Some(d));
        }
        assert_eq!(Direction::from_char('m'), None);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn neighbour_offsets_are_translation_invariant(x in -1000i32..1000, y in -1000i32..1000, z in -1000i32..1000) {
                let p = LatticePoint::new(x, y, z);
                let rel: Vec<_> = neighbors(p).iter().map(|&q| q - p).collect();
                prop_assert_eq!(rel, BASIS.to_vec());
            }
        }
    }
}
