//! Tetrahedral (diamond) lattice geometry for backbone walks.
//!
//! Residues occupy integer lattice sites and consecutive residues are joined
//! by one of four bond vectors. Sites alternate between two sublattices: a
//! step taken from an even-parity site uses a base vector and a step taken
//! from an odd-parity site uses its negation. Consecutive bonds therefore
//! meet at the tetrahedral angle (cosine -1/3, about 109.47 degrees), and a
//! walk can return to a previous site only by repeating a direction index on
//! two consecutive turns.
//!
//! All bond vectors have squared length 3; one bond corresponds to the
//! canonical C-alpha spacing of 3.8 angstrom after scaling.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::error::{Error, Result};

/// Lattice site in integer coordinates.
pub type LatticePoint = [i64; 3];

/// Base bond vectors for even-parity steps, in fixed index order. Components
/// are all +-1 with an even number of -1 entries; each vector has squared
/// length 3 and the pairwise dot products are all -1.
pub const BASE_VECTORS: [[i64; 3]; 4] = [
    [1, 1, 1],
    [1, -1, -1],
    [-1, 1, -1],
    [-1, -1, 1],
];

/// Squared length of every bond vector.
pub const BOND_SQ: i64 = 3;

/// One of the four bond directions, indexed 0..=3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Direction(u8);

impl Direction {
    pub const ALL: [Direction; 4] = [Direction(0), Direction(1), Direction(2), Direction(3)];

    pub fn new(index: u8) -> Result<Self> {
        if index < 4 {
            Ok(Direction(index))
        } else {
            Err(Error::Dimension(format!(
                "direction index {index} out of range 0..=3"
            )))
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// Binary digit b of the direction index: (index >> b) & 1.
    pub fn digit(self, b: u8) -> u8 {
        (self.0 >> b) & 1
    }
}

/// Turn sequence of a chain: one direction per bond, so a chain of L residues
/// carries L-1 turns. Never empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TurnSequence(Vec<Direction>);

impl TurnSequence {
    pub fn new(turns: Vec<Direction>) -> Result<Self> {
        if turns.is_empty() {
            return Err(Error::Dimension("turn sequence must not be empty".into()));
        }
        Ok(TurnSequence(turns))
    }

    pub fn from_indices(indices: &[u8]) -> Result<Self> {
        let turns = indices
            .iter()
            .map(|&i| Direction::new(i))
            .collect::<Result<Vec<_>>>()?;
        TurnSequence::new(turns)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of residues in the chain this sequence describes.
    pub fn residues(&self) -> usize {
        self.0.len() + 1
    }

    pub fn as_slice(&self) -> &[Direction] {
        &self.0
    }

    pub fn indices(&self) -> Vec<u8> {
        self.0.iter().map(|d| d.index()).collect()
    }
}

impl std::ops::Deref for TurnSequence {
    type Target = [Direction];

    fn deref(&self) -> &[Direction] {
        &self.0
    }
}

/// Bond vector for direction `d` taken from a site of the given parity
/// (0 = even sublattice, 1 = odd). Odd-parity steps negate the base vector.
pub fn direction_vector(d: Direction, parity: u8) -> [i64; 3] {
    let v = BASE_VECTORS[d.index() as usize];
    if parity.is_multiple_of(2) {
        v
    } else {
        [-v[0], -v[1], -v[2]]
    }
}

/// Walk a turn sequence from the origin. Returns turns.len() + 1 points; the
/// parity of step t is t mod 2.
pub fn walk(turns: &[Direction]) -> Vec<LatticePoint> {
    let mut points = Vec::with_capacity(turns.len() + 1);
    let mut p = [0i64; 3];
    points.push(p);
    for (t, &d) in turns.iter().enumerate() {
        let v = direction_vector(d, (t % 2) as u8);
        p = [p[0] + v[0], p[1] + v[1], p[2] + v[2]];
        points.push(p);
    }
    points
}

/// True when all points are pairwise distinct.
pub fn is_self_avoiding(points: &[LatticePoint]) -> bool {
    let mut seen = HashSet::with_capacity(points.len());
    points.iter().all(|p| seen.insert(*p))
}

fn dist_sq(a: LatticePoint, b: LatticePoint) -> i64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Contact pairs (i, j) with i < j, j - i >= min_separation, and squared
/// distance exactly one bond (3). Sorted lexicographically.
pub fn contacts(points: &[LatticePoint], min_separation: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..points.len() {
        for j in (i + min_separation)..points.len() {
            if dist_sq(points[i], points[j]) == BOND_SQ {
                out.push((i, j));
            }
        }
    }
    out
}
