//! Amino-acid alphabet, hydrophobic/polar classes and sequence input.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("unknown residue '{code}' at position {position}")]
    UnknownResidue { code: char, position: usize },
    #[error("sequence must contain at least 2 residues, found {0}")]
    EmptySequence(usize),
    #[error("unknown benchmark id '{0}'")]
    UnknownBenchmark(String),
}

/// Hydrophobic (H) or polar (P).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HpClass {
    H,
    P,
}

/// The twenty standard amino acids. Discriminants follow the row order of
/// the contact matrix (CYS MET PHE ... LYS PRO).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum AminoAcid {
    Cys,
    Met,
    Phe,
    Ile,
    Leu,
    Val,
    Trp,
    Tyr,
    Ala,
    Gly,
    Thr,
    Ser,
    Gln,
    Asn,
    Glu,
    Asp,
    His,
    Arg,
    Lys,
    Pro,
}

impl AminoAcid {
    pub const ALL: [AminoAcid; 20] = [
        AminoAcid::Cys,
        AminoAcid::Met,
        AminoAcid::Phe,
        AminoAcid::Ile,
        AminoAcid::Leu,
        AminoAcid::Val,
        AminoAcid::Trp,
        AminoAcid::Tyr,
        AminoAcid::Ala,
        AminoAcid::Gly,
        AminoAcid::Thr,
        AminoAcid::Ser,
        AminoAcid::Gln,
        AminoAcid::Asn,
        AminoAcid::Glu,
        AminoAcid::Asp,
        AminoAcid::His,
        AminoAcid::Arg,
        AminoAcid::Lys,
        AminoAcid::Pro,
    ];

    /// Row/column in a [`ContactMatrix`](crate::energy::ContactMatrix).
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_code(code: char) -> Option<AminoAcid> {
        use AminoAcid::*;
        Some(match code {
            'C' => Cys,
            'M' => Met,
            'F' => Phe,
            'I' => Ile,
            'L' => Leu,
            'V' => Val,
            'W' => Trp,
            'Y' => Tyr,
            'A' => Ala,
            'G' => Gly,
            'T' => Thr,
            'S' => Ser,
            'Q' => Gln,
            'N' => Asn,
            'E' => Glu,
            'D' => Asp,
            'H' => His,
            'R' => Arg,
            'K' => Lys,
            'P' => Pro,
            _ => return None,
        })
    }

    pub fn code(self) -> char {
        b"CMFILVWYAGTSQNEDHRKP"[self.index()] as char
    }

    pub fn three_letter(self) -> &'static str {
        [
            "CYS", "MET", "PHE", "ILE", "LEU", "VAL", "TRP", "TYR", "ALA", "GLY", "THR", "SER", "GLN", "ASN",
            "GLU", "ASP", "HIS", "ARG", "LYS", "PRO",
        ][self.index()]
    }

    pub fn from_three_letter(name: &str) -> Option<AminoAcid> {
        AminoAcid::ALL.into_iter().find(|a| a.three_letter().eq_ignore_ascii_case(name))
    }

    pub fn hp_class(self) -> HpClass {
        use AminoAcid::*;
        match self {
            Gly | Ala | Pro | Val | Leu | Ile | Met | Phe | Tyr | Trp => HpClass::H,
            Ser | Thr | Cys | Asn | Gln | Lys | His | Arg | Asp | Glu => HpClass::P,
        }
    }

    pub fn is_hydrophobic(self) -> bool {
        self.hp_class() == HpClass::H
    }
}

impl fmt::Display for AminoAcid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// H/P class of a one-letter residue code.
pub fn classify(code: char) -> Result<HpClass, SequenceError> {
    AminoAcid::from_code(code)
        .map(AminoAcid::hp_class)
        .ok_or(SequenceError::UnknownResidue { code, position: 0 })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequence {
    id: String,
    residues: Vec<AminoAcid>,
}

impl Sequence {
    pub fn new(id: impl Into<String>, residues: Vec<AminoAcid>) -> Result<Self, SequenceError> {
        if residues.len() < 2 {
            return Err(SequenceError::EmptySequence(residues.len()));
        }
        Ok(Sequence { id: id.into(), residues })
    }

    /// Builds a sequence from bare one-letter codes.
    pub fn from_codes(id: impl Into<String>, codes: &str) -> Result<Self, SequenceError> {
        let residues = parse_residues(codes.chars().filter(|c| !c.is_whitespace()), 0)?;
        Sequence::new(id, residues)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn residues(&self) -> &[AminoAcid] {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn hp_classes(&self) -> Vec<HpClass> {
        self.residues.iter().map(|a| a.hp_class()).collect()
    }

    pub fn hydrophobic_count(&self) -> usize {
        self.residues.iter().filter(|a| a.is_hydrophobic()).count()
    }

    pub fn to_codes(&self) -> String {
        self.residues.iter().map(|a| a.code()).collect()
    }

    pub fn to_fasta(&self) -> String {
        let codes = self.to_codes();
        let mut out = format!(">{}\n", self.id);
        for chunk in codes.as_bytes().chunks(60) {
            out.push_str(std::str::from_utf8(chunk).unwrap());
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_codes())
    }
}

fn parse_residues(chars: impl Iterator<Item = char>, offset: usize) -> Result<Vec<AminoAcid>, SequenceError> {
    chars
        .enumerate()
        .map(|(i, c)| AminoAcid::from_code(c).ok_or(SequenceError::UnknownResidue { code: c, position: offset + i }))
        .collect()
}

/// Parses a bare residue string or a single FASTA record.
///
/// Whitespace is ignored. A FASTA header supplies the id (first word after
/// `>`); bare input gets `default_id`. Positions in errors are 0-based over
/// the residue letters.
pub fn parse_sequence(text: &str, default_id: &str) -> Result<Sequence, SequenceError> {
    let trimmed = text.trim_start();
    let (id, body) = match trimmed.strip_prefix('>') {
        Some(rest) => {
            let (header, body) = rest.split_once('\n').unwrap_or((rest, ""));
            let id = header.split_whitespace().next().unwrap_or(default_id);
            (id.to_string(), body)
        }
        None => (default_id.to_string(), trimmed),
    };
    let residues = parse_residues(body.chars().filter(|c| !c.is_whitespace()), 0)?;
    Sequence::new(id, residues)
}

/// Benchmark proteins shipped with the crate.
const BENCHMARKS: [(&str, usize, &str); 20] = [
    ("4RXN", 54, include_str!("../data/benchmarks/4RXN.fasta")),
    ("1ENH", 54, include_str!("../data/benchmarks/1ENH.fasta")),
    ("4PTI", 58, include_str!("../data/benchmarks/4PTI.fasta")),
    ("2IGD", 61, include_str!("../data/benchmarks/2IGD.fasta")),
    ("1YPA", 64, include_str!("../data/benchmarks/1YPA.fasta")),
    ("1R69", 69, include_str!("../data/benchmarks/1R69.fasta")),
    ("1CTF", 74, include_str!("../data/benchmarks/1CTF.fasta")),
    ("3MX7", 90, include_str!("../data/benchmarks/3MX7.fasta")),
    ("3NBM", 108, include_str!("../data/benchmarks/3NBM.fasta")),
    ("3MQO", 120, include_str!("../data/benchmarks/3MQO.fasta")),
    ("3MRO", 142, include_str!("../data/benchmarks/3MRO.fasta")),
    ("3PNX", 160, include_str!("../data/benchmarks/3PNX.fasta")),
    ("2J6A", 135, include_str!("../data/benchmarks/2J6A.fasta")),
    ("2HFQ", 85, include_str!("../data/benchmarks/2HFQ.fasta")),
    ("3MSE", 180, include_str!("../data/benchmarks/3MSE.fasta")),
    ("3MR7", 189, include_str!("../data/benchmarks/3MR7.fasta")),
    ("3MQZ", 215, include_str!("../data/benchmarks/3MQZ.fasta")),
    ("3NO3", 238, include_str!("../data/benchmarks/3NO3.fasta")),
    ("3NO7", 248, include_str!("../data/benchmarks/3NO7.fasta")),
    ("3ON7", 280, include_str!("../data/benchmarks/3ON7.fasta")),
];

pub fn benchmark_ids() -> impl Iterator<Item = &'static str> {
    BENCHMARKS.iter().map(|b| b.0)
}

/// Declared length of a bundled benchmark.
pub fn benchmark_length(id: &str) -> Option<usize> {
    BENCHMARKS.iter().find(|b| b.0.eq_ignore_ascii_case(id)).map(|b| b.1)
}

/// Loads a bundled benchmark by id (case-insensitive).
pub fn benchmark(id: &str) -> Result<Sequence, SequenceError> {
    let (_, _, fasta) = BENCHMARKS
        .iter()
        .find(|b| b.0.eq_ignore_ascii_case(id))
        .ok_or_else(|| SequenceError::UnknownBenchmark(id.to_string()))?;
    parse_sequence(fasta, id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_examples() {
        assert_eq!(classify('G'), Ok(HpClass::H));
        assert_eq!(classify('S'), Ok(HpClass::P));
        assert!(matches!(classify('?'), Err(SequenceError::UnknownResidue { code: '?', .. })));
        for c in ['B', 'J', 'O', 'U', 'X', 'Z', 'g'] {
            assert!(classify(c).is_err(), "{c}");
        }
    }

    #[test]
    fn hp_partition_is_ten_ten() {
        let sorted = |h: bool| {
            let mut v: Vec<char> =
                AminoAcid::ALL.iter().filter(|a| a.is_hydrophobic() == h).map(|a| a.code()).collect();
            v.sort();
            v.into_iter().collect::<String>()
        };
        assert_eq!(sorted(true), "AFGILMPVWY");
        assert_eq!(sorted(false), "CDEHKNQRST");
    }

    #[test]
    fn codes_round_trip() {
        for a in AminoAcid::ALL {
            assert_eq!(AminoAcid::from_code(a.code()), Some(a));
            assert_eq!(AminoAcid::from_three_letter(a.three_letter()), Some(a));
        }
    }

    #[test]
    fn parse_fasta_record() {
        let seq = parse_sequence(">1ENH some protein\nRPRTAFSSEQLARLKREFNENRYLTERRRQQLSS\nELGLNEAQIKIWFQNKRAKI\n", "x").unwrap();
        assert_eq!(seq.id(), "1ENH");
        assert_eq!(seq.len(), 54);
    }

    #[test]
    fn histidine_letters_are_polar() {
        let seq = parse_sequence("HH", "hh").unwrap();
        assert_eq!(seq.hp_classes(), vec![HpClass::P, HpClass::P]);
    }

    #[test]
    fn empty_and_short_inputs() {
        assert_eq!(parse_sequence("", "x"), Err(SequenceError::EmptySequence(0)));
        assert_eq!(parse_sequence(">id\n", "x"), Err(SequenceError::EmptySequence(0)));
        assert_eq!(parse_sequence("G", "x"), Err(SequenceError::EmptySequence(1)));
    }

    #[test]
    fn unknown_residue_reports_position() {
        assert_eq!(
            parse_sequence(">a\nGGA\nXG", "x"),
            Err(SequenceError::UnknownResidue { code: 'X', position: 3 })
        );
    }

    #[test]
    fn unknown_benchmark() {
        assert!(matches!(benchmark("9ZZZ"), Err(SequenceError::UnknownBenchmark(_))));
    }
}
