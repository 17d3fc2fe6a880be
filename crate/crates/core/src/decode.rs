//! Bitstring decoding, conformation selection, classical rescoring, and the
//! exhaustive diagonal oracle.
//!
//! A measured bitstring maps back to turn directions two bits at a time:
//! digit b of turn t sits on qubit 2t + b and equals one minus the measured
//! bit. Decoded turns walk the lattice (see `lattice`), get checked for
//! self-avoidance, and are rescored classically with the interaction matrix
//! on realized contacts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{InteractionMatrix, Sequence};
use crate::lattice::{contacts, is_self_avoiding, walk, Direction, LatticePoint, TurnSequence};
use crate::pauli::PauliSum;
use crate::qsim::{bits_to_string, string_to_bits};

/// Residues closer than this along the chain never count as contacts.
pub const MIN_CONTACT_SEPARATION: usize = 3;

/// Largest qubit count the exhaustive oracle will sweep.
pub const ORACLE_QUBIT_CAP: usize = 26;

/// Edge length of one lattice step in angstroms (3.8 A bond over sqrt(3)
/// lattice units).
pub const COORD_SCALE: f64 = 3.8 / 1.732_050_807_568_877_2;

/// Decode a measured bitstring into the turn sequence of an `l`-residue
/// chain.
pub fn decode_bits(bits: &str, l: usize) -> Result<TurnSequence> {
    let (x, width) = string_to_bits(bits)?;
    let expected = 2 * (l - 1);
    if width != expected {
        return Err(Error::QubitMismatch {
            expected,
            got: width,
        });
    }
    let mut dirs = Vec::with_capacity(l - 1);
    for t in 0..(l - 1) {
        let m0 = (x >> (2 * t)) & 1;
        let m1 = (x >> (2 * t + 1)) & 1;
        let d = ((1 - m0) | ((1 - m1) << 1)) as u8;
        dirs.push(Direction::new(d)?);
    }
    TurnSequence::new(dirs)
}

/// Inverse of `decode_bits`: the bitstring that decodes to these turns.
pub fn encode_turns(turns: &TurnSequence) -> String {
    let mut x = 0u64;
    for (t, d) in turns.iter().enumerate() {
        let idx = d.index() as u64;
        x |= (1 - (idx & 1)) << (2 * t);
        x |= (1 - ((idx >> 1) & 1)) << (2 * t + 1);
    }
    bits_to_string(x, 2 * turns.len())
}

/// A decoded chain placed on the lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Backbone {
    pub turns: TurnSequence,
    pub points: Vec<LatticePoint>,
}

impl Backbone {
    pub fn from_turns(turns: TurnSequence) -> Self {
        let points = walk(&turns);
        Backbone { turns, points }
    }

    pub fn is_self_avoiding(&self) -> bool {
        is_self_avoiding(&self.points)
    }

    /// Cartesian coordinates in angstroms.
    pub fn coords(&self) -> Vec<[f64; 3]> {
        self.points
            .iter()
            .map(|p| [
                p[0] as f64 * COORD_SCALE,
                p[1] as f64 * COORD_SCALE,
                p[2] as f64 * COORD_SCALE,
            ])
            .collect()
    }
}

/// How to pick a conformation out of ranked measurement outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// Walk down the ranking and take the first self-avoiding outcome.
    #[default]
    ValidFirst,
    /// Take the top outcome; fail if it is not self-avoiding.
    TopOnly,
}

/// The chosen outcome and how it was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub bitstring: String,
    /// 0-based position in the ranked outcome list.
    pub rank: usize,
    /// Count (or quasi-probability weight) behind the outcome.
    pub weight: f64,
    pub turns: TurnSequence,
    pub self_avoiding: bool,
}

/// Pick a conformation from outcomes ranked best-first. Entries must carry
/// positive weight; callers filter mitigated quasi-probabilities first.
pub fn select_conformation(
    ranked: &[(&str, f64)],
    l: usize,
    policy: SelectionPolicy,
) -> Result<Selection> {
    if ranked.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    let top: Vec<String> = ranked.iter().take(5).map(|(s, _)| s.to_string()).collect();
    let limit = match policy {
        SelectionPolicy::ValidFirst => ranked.len(),
        SelectionPolicy::TopOnly => 1,
    };
    for (rank, &(bits, weight)) in ranked.iter().take(limit).enumerate() {
        let turns = decode_bits(bits, l)?;
        let backbone = Backbone::from_turns(turns.clone());
        if backbone.is_self_avoiding() {
            return Ok(Selection {
                bitstring: bits.to_string(),
                rank,
                weight,
                turns,
                self_avoiding: true,
            });
        }
    }
    Err(Error::NoValidConformation { tried: limit, top })
}

/// Classical rescoring of a decoded chain: interaction energy over realized
/// lattice contacts plus a steric penalty per coincident residue pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalScore {
    pub contact_pairs: Vec<(usize, usize)>,
    pub contact_energy: f64,
    pub overlap_pairs: usize,
    pub overlap_penalty: f64,
    pub total: f64,
}

/// Score a backbone against the sequence: sum J over contacts at chain
/// separation >= 3, and charge `overlap_weight` per pair of residues on the
/// same site.
pub fn classical_energy(
    backbone: &Backbone,
    seq: &Sequence,
    j: &InteractionMatrix,
    overlap_weight: f64,
) -> Result<ClassicalScore> {
    if backbone.points.len() != seq.len() {
        return Err(Error::LengthMismatch {
            a: backbone.points.len(),
            b: seq.len(),
        });
    }
    let contact_pairs = contacts(&backbone.points, MIN_CONTACT_SEPARATION);
    let mut contact_energy = 0.0;
    for &(a, b) in &contact_pairs {
        contact_energy += j.get_idx(seq.res_index(a), seq.res_index(b));
    }
    let mut overlap_pairs = 0;
    for i in 0..backbone.points.len() {
        for k in (i + 1)..backbone.points.len() {
            if backbone.points[i] == backbone.points[k] {
                overlap_pairs += 1;
            }
        }
    }
    let overlap_penalty = overlap_weight * overlap_pairs as f64;
    Ok(ClassicalScore {
        contact_energy,
        overlap_pairs,
        overlap_penalty,
        total: contact_energy + overlap_penalty,
        contact_pairs,
    })
}

/// Result of an exhaustive sweep of the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub schema_version: u32,
    pub n_qubits: usize,
    pub length: usize,
    /// Restrict the sweep to self-avoiding decodings.
    pub valid_only: bool,
    pub n_evaluated: u64,
    pub min_energy: f64,
    pub max_energy: f64,
    /// Number of states achieving the minimum exactly.
    pub argmin_count: u64,
    /// Up to 64 minimizing bitstrings, numerically ascending.
    pub argmin: Vec<String>,
    /// True when more minimizers exist than `argmin` lists.
    pub truncated: bool,
}

const ARGMIN_KEEP: usize = 64;

#[derive(Clone)]
struct SweepAcc {
    n: u64,
    min: f64,
    max: f64,
    argmin: Vec<u64>,
    argmin_count: u64,
}

impl SweepAcc {
    fn empty() -> Self {
        SweepAcc {
            n: 0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            argmin: Vec::new(),
            argmin_count: 0,
        }
    }

    fn push(&mut self, x: u64, e: f64) {
        self.n += 1;
        self.max = self.max.max(e);
        if e < self.min {
            self.min = e;
            self.argmin.clear();
            self.argmin.push(x);
            self.argmin_count = 1;
        } else if e == self.min {
            self.argmin_count += 1;
            if self.argmin.len() < ARGMIN_KEEP {
                self.argmin.push(x);
            }
        }
    }

    fn merge(mut self, other: SweepAcc) -> SweepAcc {
        if other.n == 0 {
            return self;
        }
        if self.n == 0 {
            return other;
        }
        self.n += other.n;
        self.max = self.max.max(other.max);
        if other.min < self.min {
            self.min = other.min;
            self.argmin = other.argmin;
            self.argmin_count = other.argmin_count;
        } else if other.min == self.min {
            self.argmin_count += other.argmin_count;
            for x in other.argmin {
                if self.argmin.len() >= ARGMIN_KEEP {
                    break;
                }
                self.argmin.push(x);
            }
        }
        self
    }
}

/// Sweep every basis state of the diagonal operator (optionally only those
/// decoding to self-avoiding walks) and report the exact extrema.
pub fn brute_force(h: &PauliSum, valid_only: bool) -> Result<OracleReport> {
    let n = h.n_qubits();
    if n > ORACLE_QUBIT_CAP {
        return Err(Error::QubitCap {
            needed: n,
            cap: ORACLE_QUBIT_CAP,
        });
    }
    if !n.is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "turn encoding needs an even qubit count, got {n}"
        )));
    }
    let l = n / 2 + 1;
    let states = 1u64 << n;
    let chunk = 1u64 << n.min(16);
    let acc = (0..states.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = (lo + chunk).min(states);
            let mut local = SweepAcc::empty();
            for x in lo..hi {
                if valid_only {
                    let turns: Vec<Direction> = (0..l - 1)
                        .map(|t| {
                            let m0 = (x >> (2 * t)) & 1;
                            let m1 = (x >> (2 * t + 1)) & 1;
                            Direction::new(((1 - m0) | ((1 - m1) << 1)) as u8).unwrap()
                        })
                        .collect();
                    if !is_self_avoiding(&walk(&turns)) {
                        continue;
                    }
                }
                local.push(x, h.eval_diagonal(x));
            }
            local
        })
        .reduce(SweepAcc::empty, SweepAcc::merge);
    if acc.n == 0 {
        return Err(Error::EmptyHistogram);
    }
    let mut argmin_states = acc.argmin;
    argmin_states.sort_unstable();
    Ok(OracleReport {
        schema_version: 1,
        n_qubits: n,
        length: l,
        valid_only,
        n_evaluated: acc.n,
        min_energy: acc.min,
        max_energy: acc.max,
        argmin_count: acc.argmin_count,
        truncated: acc.argmin_count > argmin_states.len() as u64,
        argmin: argmin_states
            .iter()
            .map(|&x| bits_to_string(x, n))
            .collect(),
    })
}
