//! Lattice protein structure prediction on the face-centred-cubic lattice.
//!
//! The crate provides the FCC geometry ([`lattice`]), the residue alphabet
//! ([`sequence`]), HP and Miyazawa–Jernigan contact energies ([`energy`]),
//! self-avoiding chains ([`conformation`]), the five move operators plus
//! hydrophobic-core macro-mutation ([`moves`]), the genetic-algorithm engine
//! ([`search`]), evaluation metrics ([`metrics`]) and an exhaustive
//! enumerator for small chains ([`oracle`]).

pub mod conformation;
pub mod energy;
pub mod lattice;
pub mod sequence;
pub mod moves;
pub mod oracle;
pub mod metrics;
pub mod search;
