//! Contact energy models and conformation scoring.
//!
//! The energy of a chain is the sum of `matrix[a_i][a_j]` over residue pairs
//! that are not chain neighbours (`j >= i + 2`) but sit on neighbouring
//! lattice sites.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conformation::Conformation;
use crate::lattice::{is_contact, neighbors};
use crate::sequence::{AminoAcid, Sequence};

const MJ_DATA: &str = include_str!("../data/mj.txt");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("matrix header must list the 20 residues, got: {0}")]
    BadHeader(String),
    #[error("row {row}: expected {expected} values, found {found}")]
    BadRow { row: usize, expected: usize, found: usize },
    #[error("row {row}: cannot parse '{token}'")]
    BadValue { row: usize, token: String },
    #[error("expected 20 rows, found {0}")]
    RowCount(usize),
}

/// Symmetric 20x20 residue contact potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactMatrix {
    values: [[f64; 20]; 20],
}

impl ContactMatrix {
    /// Miyazawa–Jernigan contact energies, from the bundled data file.
    pub fn mj() -> ContactMatrix {
        ContactMatrix::from_lower_triangular(MJ_DATA).expect("bundled MJ matrix is well formed")
    }

    /// HP model lifted to 20x20: -1 for a pair of hydrophobic residues, else 0.
    pub fn hp() -> ContactMatrix {
        let mut values = [[0.0; 20]; 20];
        for a in AminoAcid::ALL {
            for b in AminoAcid::ALL {
                if a.is_hydrophobic() && b.is_hydrophobic() {
                    values[a.index()][b.index()] = -1.0;
                }
            }
        }
        ContactMatrix { values }
    }

    /// Parses the lower-triangular text format: a header line naming the 20
    /// residues (three-letter codes) followed by 20 rows, row `k` holding `k`
    /// values. The header order may differ from the internal order.
    pub fn from_lower_triangular(text: &str) -> Result<ContactMatrix, MatrixError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or(MatrixError::RowCount(0))?;
        let order: Vec<AminoAcid> = header
            .split_whitespace()
            .map(AminoAcid::from_three_letter)
            .collect::<Option<Vec<_>>>()
            .filter(|o| o.len() == 20)
            .ok_or_else(|| MatrixError::BadHeader(header.to_string()))?;
        let mut seen = [false; 20];
        for a in &order {
            if std::mem::replace(&mut seen[a.index()], true) {
                return Err(MatrixError::BadHeader(header.to_string()));
            }
        }
        let mut values = [[0.0; 20]; 20];
        let mut rows = 0;
        for (row, line) in lines.enumerate() {
            if row >= 20 {
                return Err(MatrixError::RowCount(row + 1));
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != row + 1 {
                return Err(MatrixError::BadRow { row: row + 1, expected: row + 1, found: tokens.len() });
            }
            for (col, tok) in tokens.iter().enumerate() {
                let v: f64 =
                    tok.parse().map_err(|_| MatrixError::BadValue { row: row + 1, token: tok.to_string() })?;
                let (i, j) = (order[row].index(), order[col].index());
                values[i][j] = v;
                values[j][i] = v;
            }
            rows += 1;
        }
        if rows != 20 {
            return Err(MatrixError::RowCount(rows));
        }
        Ok(ContactMatrix { values })
    }

    pub fn get(&self, a: AminoAcid, b: AminoAcid) -> f64 {
        self.values[a.index()][b.index()]
    }

    pub fn values(&self) -> &[[f64; 20]; 20] {
        &self.values
    }

    /// Writes the matrix back out in the lower-triangular text format.
    pub fn to_lower_triangular(&self) -> String {
        let mut out = AminoAcid::ALL.map(|a| a.three_letter()).join(" ");
        out.push('\n');
        for (i, a) in AminoAcid::ALL.iter().enumerate() {
            let row: Vec<String> = AminoAcid::ALL[..=i].iter().map(|b| format!("{:.2}", self.get(*a, *b))).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Symmetric MJ lookup.
pub fn mj_pair(a: AminoAcid, b: AminoAcid) -> f64 {
    use std::sync::OnceLock;
    static MJ: OnceLock<ContactMatrix> = OnceLock::new();
    MJ.get_or_init(ContactMatrix::mj).get(a, b)
}

/// Which of the three search variants a run uses.
///
/// `Mh` is not a matrix: it scores with MJ and steers macro-mutation with
/// the hydrophobic classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyModelId {
    Hp,
    Mj,
    Mh,
}

impl EnergyModelId {
    pub const ALL: [EnergyModelId; 3] = [EnergyModelId::Hp, EnergyModelId::Mj, EnergyModelId::Mh];

    /// Matrix that drives selection.
    pub fn objective_matrix(self) -> ContactMatrix {
        match self {
            EnergyModelId::Hp => ContactMatrix::hp(),
            EnergyModelId::Mj | EnergyModelId::Mh => ContactMatrix::mj(),
        }
    }

    /// Short name of the objective matrix, as written in dump trailers.
    pub fn objective_name(self) -> &'static str {
        match self {
            EnergyModelId::Hp => "hp",
            EnergyModelId::Mj | EnergyModelId::Mh => "mj",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EnergyModelId::Hp => "hp",
            EnergyModelId::Mj => "mj",
            EnergyModelId::Mh => "mh",
        }
    }
}

impl fmt::Display for EnergyModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnergyModelId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hp" => Ok(EnergyModelId::Hp),
            "mj" => Ok(EnergyModelId::Mj),
            "mh" => Ok(EnergyModelId::Mh),
            other => Err(format!("unknown model '{other}' (expected hp, mj or mh)")),
        }
    }
}

/// Energy by scanning every residue pair.
pub fn evaluate_pairwise(conf: &Conformation, seq: &Sequence, matrix: &ContactMatrix) -> f64 {
    let pts = conf.points();
    let res = seq.residues();
    let mut energy = 0.0;
    for i in 0..pts.len() {
        for j in i + 2..pts.len() {
            if is_contact(pts[i], pts[j]) {
                energy += matrix.get(res[i], res[j]);
            }
        }
    }
    energy
}

/// Energy via the occupancy index; sums in the same pair order as
/// [`evaluate_pairwise`], so both give bit-identical results.
pub fn evaluate(conf: &Conformation, seq: &Sequence, matrix: &ContactMatrix) -> f64 {
    debug_assert_eq!(conf.len(), seq.len());
    let pts = conf.points();
    let res = seq.residues();
    let occ = conf.occupancy();
    let mut energy = 0.0;
    let mut partners = [0usize; 12];
    for i in 0..pts.len() {
        let mut k = 0;
        for q in neighbors(pts[i]) {
            if let Some(j) = occ.get(q) {
                if j >= i + 2 {
                    partners[k] = j;
                    k += 1;
                }
            }
        }
        let found = &mut partners[..k];
        found.sort_unstable();
        for &j in found.iter() {
            energy += matrix.get(res[i], res[j]);
        }
    }
    energy
}

/// HP energy: minus the number of non-consecutive H-H contacts.
pub fn hp_energy(conf: &Conformation, seq: &Sequence) -> f64 {
    let pts = conf.points();
    let occ = conf.occupancy();
    let res = seq.residues();
    let mut contacts = 0usize;
    for i in 0..pts.len() {
        if !res[i].is_hydrophobic() {
            continue;
        }
        for q in neighbors(pts[i]) {
            if let Some(j) = occ.get(q) {
                if j >= i + 2 && res[j].is_hydrophobic() {
                    contacts += 1;
                }
            }
        }
    }
    -(contacts as f64)
}

/// Sequence + matrix pair used to score chains.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    pub sequence: &'a Sequence,
    pub matrix: &'a ContactMatrix,
}

impl<'a> Objective<'a> {
    pub fn new(sequence: &'a Sequence, matrix: &'a ContactMatrix) -> Self {
        Objective { sequence, matrix }
    }

    pub fn energy(&self, conf: &Conformation) -> f64 {
        evaluate(conf, self.sequence, self.matrix)
    }

    /// Evaluates and caches the energy on `conf`.
    pub fn score(&self, conf: &mut Conformation) -> f64 {
        let e = self.energy(conf);
        conf.set_fitness(e);
        e
    }

    /// Cached energy, evaluating only if the cache is empty.
    pub fn fitness(&self, conf: &mut Conformation) -> f64 {
        match conf.fitness() {
            Some(e) => e,
            None => self.score(conf),
        }
    }
}
