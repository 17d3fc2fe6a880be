//! Embedded data tables: the residue-pair interaction matrix and the
//! benchmark fragment manifest.
//!
//! Both files live under `data/` in the source tree and are compiled into
//! the binary, so the toolchain needs no runtime data directory. See
//! `data/PROVENANCE.md` for where the numbers come from.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{InteractionMatrix, Sequence};

const MJ1996_CSV: &str = include_str!("../data/mj1996.csv");
const FRAGMENTS_CSV: &str = include_str!("../data/fragments.csv");

/// The shipped contact-energy matrix (RT units, all pairs attractive).
pub fn mj_matrix() -> &'static InteractionMatrix {
    static MATRIX: OnceLock<InteractionMatrix> = OnceLock::new();
    MATRIX.get_or_init(|| {
        let m = InteractionMatrix::from_csv(MJ1996_CSV).expect("embedded matrix parses");
        assert!(m.warnings().is_empty(), "embedded matrix is symmetric");
        m
    })
}

/// Which benchmark table a fragment belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FragmentSet {
    Benchmark,
    CaseStudy,
}

/// One manifest row: a peptide fragment cut from a PDB entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragmentEntry {
    pub pdb_id: String,
    pub sequence: String,
    pub length: usize,
    pub chain: Option<String>,
    pub residue_start: u32,
    pub residue_end: u32,
    pub set: FragmentSet,
    /// Qubit count quoted by the original study, when it differs per run.
    pub reported_qubits: Option<u32>,
}

/// The embedded fragment manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentManifest {
    entries: Vec<FragmentEntry>,
}

impl FragmentManifest {
    pub fn embedded() -> &'static FragmentManifest {
        static MANIFEST: OnceLock<FragmentManifest> = OnceLock::new();
        MANIFEST.get_or_init(|| {
            FragmentManifest::parse(FRAGMENTS_CSV).expect("embedded manifest parses")
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty manifest".into(),
        })?;
        let expected = "pdb_id,sequence,length,chain,residue_start,residue_end,set,reported_qubits";
        if header.trim() != expected {
            return Err(Error::Parse {
                line: 1,
                message: format!("unexpected manifest header {header:?}"),
            });
        }
        let mut entries = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 8 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected 8 cells, got {}", cells.len()),
                });
            }
            let parse_u32 = |cell: &str, what: &str| -> Result<u32> {
                cell.trim().parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("bad {what} {cell:?}"),
                })
            };
            let sequence = cells[1].trim().to_string();
            Sequence::parse(&sequence).map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("bad sequence {sequence:?}: {e}"),
            })?;
            let length: usize = cells[2].trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("bad length {:?}", cells[2]),
            })?;
            if length != sequence.len() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!(
                        "length {length} does not match sequence of {} residues",
                        sequence.len()
                    ),
                });
            }
            let chain = match cells[3].trim() {
                "" => None,
                c => Some(c.to_string()),
            };
            let set = match cells[6].trim() {
                "benchmark" => FragmentSet::Benchmark,
                "case_study" => FragmentSet::CaseStudy,
                other => {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("unknown set {other:?}"),
                    })
                }
            };
            let reported_qubits = match cells[7].trim() {
                "" => None,
                c => Some(parse_u32(c, "reported_qubits")?),
            };
            entries.push(FragmentEntry {
                pdb_id: cells[0].trim().to_string(),
                sequence,
                length,
                chain,
                residue_start: parse_u32(cells[4], "residue_start")?,
                residue_end: parse_u32(cells[5], "residue_end")?,
                set,
                reported_qubits,
            });
        }
        Ok(FragmentManifest { entries })
    }

    pub fn entries(&self) -> &[FragmentEntry] {
        &self.entries
    }

    pub fn by_set(&self, set: FragmentSet) -> impl Iterator<Item = &FragmentEntry> {
        self.entries.iter().filter(move |e| e.set == set)
    }

    /// Manifest rows whose sequence matches exactly.
    pub fn find_sequence(&self, sequence: &str) -> Vec<&FragmentEntry> {
        self.entries
            .iter()
            .filter(|e| e.sequence == sequence)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_anchors() {
        let m = mj_matrix();
        assert!((m.get('C', 'C').unwrap() - -5.44).abs() < 1e-12);
        assert!((m.get('L', 'L').unwrap() - -7.37).abs() < 1e-12);
        assert!((m.get('F', 'F').unwrap() - -7.26).abs() < 1e-12);
        assert!((m.get('K', 'K').unwrap() - -0.12).abs() < 1e-12);
    }

    #[test]
    fn matrix_is_symmetric_and_attractive() {
        let m = mj_matrix();
        for a in crate::hamiltonian::ALPHABET {
            for b in crate::hamiltonian::ALPHABET {
                let v = m.get(a, b).unwrap();
                assert_eq!(v, m.get(b, a).unwrap());
                assert!(v < 0.0, "{a}-{b} = {v}");
            }
        }
    }

    #[test]
    fn manifest_shape() {
        let f = FragmentManifest::embedded();
        assert_eq!(f.entries().len(), 30);
        assert_eq!(f.by_set(FragmentSet::Benchmark).count(), 23);
        assert_eq!(f.by_set(FragmentSet::CaseStudy).count(), 7);
        for e in f.entries() {
            assert_eq!(e.length, e.sequence.len());
            assert!(e.residue_end >= e.residue_start);
            match e.set {
                FragmentSet::Benchmark => {
                    assert!(e.reported_qubits.is_some());
                    assert!(e.chain.is_none());
                }
                FragmentSet::CaseStudy => {
                    assert!(e.reported_qubits.is_none());
                    assert!(e.chain.is_some());
                }
            }
        }
    }

    #[test]
    fn reported_qubit_counts_exceed_encoding_width() {
        // Each benchmark row quotes more qubits than 2(L-1); the build
        // command prints the divergence instead of hiding it.
        for e in FragmentManifest::embedded().by_set(FragmentSet::Benchmark) {
            let own = crate::hamiltonian::n_qubits_for(e.length) as u32;
            assert!(e.reported_qubits.unwrap() > own, "{}", e.pdb_id);
        }
    }

    #[test]
    fn find_sequence_matches_case_studies() {
        let f = FragmentManifest::embedded();
        let hits = f.find_sequence("YAGYS");
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].pdb_id, "6mu3");
        assert!(f.find_sequence("AAAAA").is_empty());
    }
}
