//! Sequence-to-Hamiltonian construction.
//!
//! A chain of L residues is encoded turn-by-turn: turn t (the bond from
//! residue t to t+1) occupies qubits 2t and 2t+1, for 2(L-1) qubits total.
//! The energy operator is a weighted sum of four diagonal components,
//!
//! ```text
//! H = lambda_c * H_chirality + lambda_g * H_geometric
//!   + lambda_d * H_steric    + lambda_i * H_interaction
//! ```
//!
//! built entirely from the two-qubit direction projectors of `pauli`:
//!
//! - geometric: a one-hot penalty `mu_oh * (1 - sum_d P_t^d)^2` per turn
//!   (identically zero under this dense encoding, kept literal) plus an
//!   angle penalty `mu_ang` on consecutive direction pairs outside the
//!   allowed set;
//! - chirality: a backtracking penalty `kappa_bt` on forbidden consecutive
//!   pairs, an optional triple penalty `kappa_chi`, and the symmetry-breaking
//!   pins on the first two turns;
//! - steric: `eta`-weighted collision-mask pairs of turns;
//! - interaction: residue-pair couplings J[a_t][a_u] on contact-mask pairs.
//!
//! Masks default to: allowed pairs = all (d, e) with d != e, forbidden
//! backtracking pairs = {(d, d)}, no forbidden triples (the pins replace
//! them), collisions exact for adjacent turns only, and an all-zero contact
//! mask (decoded structures are scored classically instead; see `decode`).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Direction;
use crate::pauli::{PauliSum, MAX_QUBITS};

/// The 20 canonical one-letter amino-acid codes, alphabetical.
pub const ALPHABET: [char; 20] = [
    'A', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'K', 'L', 'M', 'N', 'P', 'Q', 'R', 'S', 'T', 'V',
    'W', 'Y',
];

/// Canonical index of a one-letter residue code.
pub fn residue_index(c: char) -> Option<usize> {
    ALPHABET.iter().position(|&a| a == c)
}

/// Number of qubits used by a chain of `l` residues.
pub fn n_qubits_for(l: usize) -> usize {
    2 * (l - 1)
}

/// Validated amino-acid sequence (at least two residues).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Sequence {
    text: String,
    indices: Vec<usize>,
}

impl Sequence {
    /// Parse a one-letter sequence; errors name the first offending
    /// position (1-based).
    pub fn parse(text: &str) -> Result<Self> {
        let mut indices = Vec::with_capacity(text.len());
        for (i, ch) in text.chars().enumerate() {
            match residue_index(ch) {
                Some(idx) => indices.push(idx),
                None => {
                    return Err(Error::InvalidResidue {
                        position: i + 1,
                        letter: ch,
                    })
                }
            }
        }
        if indices.len() < 2 {
            return Err(Error::SequenceTooShort { len: indices.len() });
        }
        Ok(Sequence {
            text: text.to_string(),
            indices,
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn residue(&self, i: usize) -> char {
        ALPHABET[self.indices[i]]
    }

    pub fn res_index(&self, i: usize) -> usize {
        self.indices[i]
    }

    pub fn n_qubits(&self) -> usize {
        n_qubits_for(self.len())
    }

    /// Contiguous subchain covering residues start..end (end exclusive).
    pub fn slice(&self, start: usize, end: usize) -> Result<Sequence> {
        if start >= end || end > self.len() {
            return Err(Error::Dimension(format!(
                "slice {start}..{end} out of range for {} residues",
                self.len()
            )));
        }
        Sequence::parse(&self.text[start..end])
    }
}

impl TryFrom<String> for Sequence {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Sequence::parse(&s)
    }
}

impl From<Sequence> for String {
    fn from(s: Sequence) -> String {
        s.text
    }
}

/// Component and term weights of the energy operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HamiltonianWeights {
    pub lambda_c: f64,
    pub lambda_g: f64,
    pub lambda_d: f64,
    pub lambda_i: f64,
    pub mu_oh: f64,
    pub mu_ang: f64,
    pub kappa_bt: f64,
    pub kappa_chi: f64,
    pub eta: f64,
}

impl Default for HamiltonianWeights {
    fn default() -> Self {
        HamiltonianWeights {
            lambda_c: 1.0,
            lambda_g: 1.0,
            lambda_d: 1.0,
            lambda_i: 1.0,
            mu_oh: 1.0,
            mu_ang: 10.0,
            kappa_bt: 10.0,
            kappa_chi: 0.0,
            eta: 10.0,
        }
    }
}

impl HamiltonianWeights {
    /// Weight of the symmetry-breaking pins: ten times the largest term
    /// weight, never below 10.
    pub fn pin_weight(&self) -> f64 {
        let m = [self.mu_oh, self.mu_ang, self.kappa_bt, self.kappa_chi, self.eta]
            .into_iter()
            .fold(1.0f64, f64::max);
        10.0 * m
    }
}

/// Symmetric 20x20 residue-pair interaction matrix, canonically indexed.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    values: [[f64; 20]; 20],
    warnings: Vec<String>,
}

impl InteractionMatrix {
    /// The all-zero matrix.
    pub fn zero() -> Self {
        InteractionMatrix {
            values: [[0.0; 20]; 20],
            warnings: Vec::new(),
        }
    }

    /// Parse a CSV with a header row of residue letters and one row per
    /// residue. Any label order works as long as it is a permutation of the
    /// 20 canonical codes. Asymmetric input is symmetrized by averaging,
    /// with a warning per pair whose halves differ by more than 1e-9.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty interaction matrix".into(),
        })?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() != 21 {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected 21 header cells, got {}", cols.len()),
            });
        }
        let col_idx = |line: usize, cell: &str| -> Result<usize> {
            let c = cell.trim();
            let mut chars = c.chars();
            match (chars.next(), chars.next()) {
                (Some(ch), None) => residue_index(ch).ok_or(Error::Parse {
                    line,
                    message: format!("unknown residue label {c:?}"),
                }),
                _ => Err(Error::Parse {
                    line,
                    message: format!("unknown residue label {c:?}"),
                }),
            }
        };
        let mut col_map = Vec::with_capacity(20);
        for cell in &cols[1..] {
            col_map.push(col_idx(1, cell)?);
        }
        let mut seen_cols = [false; 20];
        for &c in &col_map {
            seen_cols[c] = true;
        }
        if seen_cols.iter().any(|&s| !s) {
            return Err(Error::Parse {
                line: 1,
                message: "header does not cover all 20 residues".into(),
            });
        }

        let mut raw = [[f64::NAN; 20]; 20];
        let mut rows_seen = [false; 20];
        for (i, line) in lines {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 21 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected 21 cells, got {}", cells.len()),
                });
            }
            let r = col_idx(i + 1, cells[0])?;
            if rows_seen[r] {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("duplicate row {:?}", ALPHABET[r]),
                });
            }
            rows_seen[r] = true;
            for (k, cell) in cells[1..].iter().enumerate() {
                let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("bad value {cell:?}"),
                })?;
                raw[r][col_map[k]] = v;
            }
        }
        if rows_seen.iter().any(|&s| !s) {
            return Err(Error::Parse {
                line: 0,
                message: "matrix is missing rows".into(),
            });
        }

        let mut values = [[0.0; 20]; 20];
        let mut warnings = Vec::new();
        for i in 0..20 {
            for j in i..20 {
                let a = raw[i][j];
                let b = raw[j][i];
                let avg = 0.5 * (a + b);
                if (a - b).abs() > 1e-9 {
                    warnings.push(format!(
                        "asymmetric pair {}-{}: {a} vs {b}, symmetrized to {avg}",
                        ALPHABET[i], ALPHABET[j]
                    ));
                }
                values[i][j] = avg;
                values[j][i] = avg;
            }
        }
        Ok(InteractionMatrix { values, warnings })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }

    /// Symmetrization warnings collected at parse time.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn get(&self, a: char, b: char) -> Result<f64> {
        let ia = residue_index(a).ok_or(Error::InvalidResidue {
            position: 0,
            letter: a,
        })?;
        let ib = residue_index(b).ok_or(Error::InvalidResidue {
            position: 0,
            letter: b,
        })?;
        Ok(self.values[ia][ib])
    }

    pub fn get_idx(&self, a: usize, b: usize) -> f64 {
        self.values[a][b]
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Per-direction mask value table for one pair of turns.
pub type PairTable = [[f64; 4]; 4];

/// Structural mask set: which consecutive pairs are geometrically allowed,
/// which are penalized, and which longer-range turn pairs carry collision or
/// contact weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSet {
    /// Consecutive (previous, next) direction pairs that are allowed; pairs
    /// outside this set draw the angle penalty.
    pub allowed_pairs: [[bool; 4]; 4],
    /// Consecutive pairs drawing the backtracking penalty.
    pub forbidden_bt: [[bool; 4]; 4],
    /// Consecutive direction triples drawing the chirality penalty.
    pub forbidden_chi: Vec<(Direction, Direction, Direction)>,
    /// Collision mask per turn pair (t, u), t < u.
    pub collision: BTreeMap<(usize, usize), PairTable>,
    /// Contact mask per turn pair (t, u), t < u.
    pub contact: BTreeMap<(usize, usize), PairTable>,
    /// Pin turn 0 to direction 1 and turn 1 to direction 0, breaking the
    /// global rotational degeneracy of the walk.
    pub pin_first_turns: bool,
}

impl MaskSet {
    /// Default masks for a chain of `l` residues: angle allows all d != e,
    /// backtracking forbids d == e, no triples, collisions exact for adjacent
    /// turn pairs only, contact mask empty, pins on.
    pub fn defaults(l: usize) -> Self {
        let mut allowed = [[true; 4]; 4];
        let mut bt = [[false; 4]; 4];
        for d in 0..4 {
            allowed[d][d] = false;
            bt[d][d] = true;
        }
        let mut collision = BTreeMap::new();
        if l >= 3 {
            let mut same: PairTable = [[0.0; 4]; 4];
            for (d, row) in same.iter_mut().enumerate() {
                row[d] = 1.0;
            }
            for t in 0..=(l - 3) {
                collision.insert((t, t + 1), same);
            }
        }
        MaskSet {
            allowed_pairs: allowed,
            forbidden_bt: bt,
            forbidden_chi: Vec::new(),
            collision,
            contact: BTreeMap::new(),
            pin_first_turns: true,
        }
    }

    /// Heuristic contact mask: weight every direction pair on turn pairs with
    /// separation 3..=5.
    pub fn with_heuristic_contacts(mut self, l: usize, weight: f64) -> Self {
        let table: PairTable = [[weight; 4]; 4];
        if l >= 2 {
            let last = l - 2;
            for t in 0..=last {
                for u in (t + 3)..=(t + 5).min(last) {
                    self.contact.insert((t, u), table);
                }
            }
        }
        self
    }
}

fn check_chain(l: usize) -> Result<usize> {
    if l < 2 {
        return Err(Error::SequenceTooShort { len: l });
    }
    let n = n_qubits_for(l);
    if n > MAX_QUBITS {
        return Err(Error::MaskWidth {
            needed: n,
            max: MAX_QUBITS,
        });
    }
    Ok(n)
}

fn pair_product(t: usize, d: usize, u: usize, e: usize, n: usize) -> Result<PauliSum> {
    let pd = PauliSum::projector(t, Direction::new(d as u8)?, n)?;
    let pe = PauliSum::projector(u, Direction::new(e as u8)?, n)?;
    pd.mul(&pe)
}

/// Geometric component: literal one-hot penalty (zero under this encoding)
/// plus the angle penalty on disallowed consecutive pairs. Unscaled by
/// lambda_g.
pub fn build_geometric(l: usize, w: &HamiltonianWeights, m: &MaskSet) -> Result<PauliSum> {
    let n = check_chain(l)?;
    let mut h = PauliSum::zero(n)?;
    for t in 0..(l - 1) {
        let mut defect = PauliSum::identity(n)?;
        for d in Direction::ALL {
            defect.add_assign(&PauliSum::projector(t, d, n)?.scale(-1.0))?;
        }
        let sq = defect.mul(&defect)?;
        h.add_assign(&sq.scale(w.mu_oh))?;
    }
    for t in 1..(l - 1) {
        for d in 0..4 {
            for e in 0..4 {
                if !m.allowed_pairs[d][e] {
                    h.add_assign(&pair_product(t - 1, d, t, e, n)?.scale(w.mu_ang))?;
                }
            }
        }
    }
    Ok(h)
}

/// Chirality component: backtracking pairs, forbidden triples, and the
/// symmetry-breaking pins. Unscaled by lambda_c.
pub fn build_chirality(l: usize, w: &HamiltonianWeights, m: &MaskSet) -> Result<PauliSum> {
    let n = check_chain(l)?;
    let mut h = PauliSum::zero(n)?;
    for t in 1..(l - 1) {
        for d in 0..4 {
            for e in 0..4 {
                if m.forbidden_bt[d][e] {
                    h.add_assign(&pair_product(t - 1, d, t, e, n)?.scale(w.kappa_bt))?;
                }
            }
        }
    }
    for t in 2..(l - 1) {
        for &(d, e, f) in &m.forbidden_chi {
            let p = PauliSum::projector(t - 2, d, n)?
                .mul(&PauliSum::projector(t - 1, e, n)?)?
                .mul(&PauliSum::projector(t, f, n)?)?;
            h.add_assign(&p.scale(w.kappa_chi))?;
        }
    }
    if m.pin_first_turns {
        let w_pin = w.pin_weight();
        let pin = |turn: usize, dir: u8| -> Result<PauliSum> {
            let p = PauliSum::projector(turn, Direction::new(dir)?, n)?;
            PauliSum::identity(n)?.add(&p.scale(-1.0))
        };
        h.add_assign(&pin(0, 1)?.scale(w_pin))?;
        if l >= 3 {
            h.add_assign(&pin(1, 0)?.scale(w_pin))?;
        }
    }
    Ok(h)
}

/// Steric component: eta-weighted collision-mask pairs. Unscaled by lambda_d.
pub fn build_steric(l: usize, w: &HamiltonianWeights, m: &MaskSet) -> Result<PauliSum> {
    let n = check_chain(l)?;
    let mut h = PauliSum::zero(n)?;
    for (&(t, u), table) in &m.collision {
        if t >= u || u > l - 2 {
            return Err(Error::Config(format!(
                "collision mask pair ({t}, {u}) out of range for {l} residues"
            )));
        }
        for (d, row) in table.iter().enumerate() {
            for (e, &c) in row.iter().enumerate() {
                if c != 0.0 {
                    h.add_assign(&pair_product(t, d, u, e, n)?.scale(w.eta * c))?;
                }
            }
        }
    }
    Ok(h)
}

/// Interaction component: J[a_t][a_u]-weighted contact-mask pairs. Unscaled
/// by lambda_i.
pub fn build_interaction(
    seq: &Sequence,
    _w: &HamiltonianWeights,
    m: &MaskSet,
    j: &InteractionMatrix,
) -> Result<PauliSum> {
    let l = seq.len();
    let n = check_chain(l)?;
    let mut h = PauliSum::zero(n)?;
    for (&(t, u), table) in &m.contact {
        if t >= u || u > l - 2 {
            return Err(Error::Config(format!(
                "contact mask pair ({t}, {u}) out of range for {l} residues"
            )));
        }
        let coupling = j.get_idx(seq.res_index(t), seq.res_index(u));
        for (d, row) in table.iter().enumerate() {
            for (e, &c) in row.iter().enumerate() {
                if c != 0.0 {
                    h.add_assign(&pair_product(t, d, u, e, n)?.scale(coupling * c))?;
                }
            }
        }
    }
    Ok(h)
}

/// Full energy operator: the four components scaled by their lambdas, summed
/// in the fixed order chirality, geometric, steric, interaction.
pub fn build_total(
    seq: &Sequence,
    w: &HamiltonianWeights,
    m: &MaskSet,
    j: &InteractionMatrix,
) -> Result<PauliSum> {
    let l = seq.len();
    let mut h = build_chirality(l, w, m)?.scale(w.lambda_c);
    h.add_assign(&build_geometric(l, w, m)?.scale(w.lambda_g))?;
    h.add_assign(&build_steric(l, w, m)?.scale(w.lambda_d))?;
    h.add_assign(&build_interaction(seq, w, m, j)?.scale(w.lambda_i))?;
    Ok(h)
}

/// Summary of a built operator, as written by the build command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildRecord {
    pub schema_version: u32,
    pub sequence: String,
    pub length: usize,
    pub n_qubits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_qubits: Option<u32>,
    pub weights: HamiltonianWeights,
    pub term_count: usize,
    pub max_locality: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagonal_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagonal_max: Option<f64>,
}

impl BuildRecord {
    pub fn new(
        seq: &Sequence,
        h: &PauliSum,
        w: &HamiltonianWeights,
        reference_qubits: Option<u32>,
    ) -> Self {
        BuildRecord {
            schema_version: 1,
            sequence: seq.text().to_string(),
            length: seq.len(),
            n_qubits: h.n_qubits(),
            reference_qubits,
            weights: w.clone(),
            term_count: h.term_count(),
            max_locality: h.max_locality(),
            diagonal_min: None,
            diagonal_max: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: char, l: usize) -> Sequence {
        Sequence::parse(&c.to_string().repeat(l)).unwrap()
    }

    /// Direction indices encoded by basis state x (two bits per turn,
    /// digit b of turn t on bit 2t+b, digit = 1 - measured bit).
    fn decode_state(x: u64, l: usize) -> Vec<u8> {
        (0..l - 1)
            .map(|t| {
                let m0 = (x >> (2 * t)) & 1;
                let m1 = (x >> (2 * t + 1)) & 1;
                ((1 - m0) | ((1 - m1) << 1)) as u8
            })
            .collect()
    }

    #[test]
    fn sequence_validation() {
        let s = Sequence::parse("VKDRS").unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(s.n_qubits(), 8);
        assert_eq!(s.residue(1), 'K');
        match Sequence::parse("VKXRS") {
            Err(Error::InvalidResidue { position, letter }) => {
                assert_eq!(position, 3);
                assert_eq!(letter, 'X');
            }
            other => panic!("expected invalid residue, got {other:?}"),
        }
        assert!(matches!(
            Sequence::parse("A"),
            Err(Error::SequenceTooShort { len: 1 })
        ));
    }

    #[test]
    fn one_hot_part_is_zero_operator() {
        // The dense encoding satisfies sum_d P = I, so the literal one-hot
        // square must simplify away for any chain length.
        let w = HamiltonianWeights {
            mu_ang: 0.0,
            ..HamiltonianWeights::default()
        };
        for l in 2..=7 {
            let m = MaskSet::defaults(l);
            let g = build_geometric(l, &w, &m).unwrap();
            assert!(g.is_zero(), "one-hot residual at l={l}");
        }
    }

    #[test]
    fn angle_penalty_indicator() {
        // Allow everything except (0, 0): the geometric diagonal becomes the
        // indicator of turns (0, 0) times mu_ang.
        let l = 3;
        let mut m = MaskSet::defaults(l);
        m.allowed_pairs = [[true; 4]; 4];
        m.allowed_pairs[0][0] = false;
        let w = HamiltonianWeights {
            mu_oh: 1.0,
            mu_ang: 1.0,
            ..HamiltonianWeights::default()
        };
        let g = build_geometric(l, &w, &m).unwrap();
        for x in 0..16u64 {
            let turns = decode_state(x, l);
            let expected = if turns == [0, 0] { 1.0 } else { 0.0 };
            assert_eq!(g.eval_diagonal(x), expected, "x={x:04b}");
        }
    }

    #[test]
    fn default_steric_matches_backtracking_pattern() {
        // With the default adjacent-only collision mask, the steric diagonal
        // is eta times the count of consecutive equal-direction pairs.
        let l = 3;
        let m = MaskSet::defaults(l);
        let w = HamiltonianWeights::default();
        let s = build_steric(l, &w, &m).unwrap();
        for x in 0..16u64 {
            let turns = decode_state(x, l);
            let expected = if turns[0] == turns[1] { w.eta } else { 0.0 };
            assert_eq!(s.eval_diagonal(x), expected);
        }
    }

    #[test]
    fn interaction_is_masked_lookup() {
        let seq = Sequence::parse("CKA").unwrap();
        let mut m = MaskSet::defaults(3);
        let mut table: PairTable = [[0.0; 4]; 4];
        table[2][1] = 1.0;
        table[0][0] = 0.5;
        m.contact.insert((0, 1), table);
        let j = crate::data::mj_matrix();
        let w = HamiltonianWeights::default();
        let h = build_interaction(&seq, &w, &m, j).unwrap();
        let jck = j.get('C', 'K').unwrap();
        for x in 0..16u64 {
            let turns = decode_state(x, 3);
            let mask = table[turns[0] as usize][turns[1] as usize];
            assert!((h.eval_diagonal(x) - jck * mask).abs() < 1e-12);
        }
    }

    #[test]
    fn total_is_sum_of_scaled_components() {
        // Exact term-level equality, including float identity.
        let seq = Sequence::parse("CWKDAG").unwrap();
        let l = seq.len();
        let w = HamiltonianWeights {
            lambda_c: 0.5,
            lambda_g: 2.0,
            lambda_d: 1.5,
            lambda_i: 0.25,
            ..HamiltonianWeights::default()
        };
        let m = MaskSet::defaults(l).with_heuristic_contacts(l, 1.0);
        let j = crate::data::mj_matrix();
        let total = build_total(&seq, &w, &m, j).unwrap();
        let mut manual = build_chirality(l, &w, &m).unwrap().scale(w.lambda_c);
        manual
            .add_assign(&build_geometric(l, &w, &m).unwrap().scale(w.lambda_g))
            .unwrap();
        manual
            .add_assign(&build_steric(l, &w, &m).unwrap().scale(w.lambda_d))
            .unwrap();
        manual
            .add_assign(&build_interaction(&seq, &w, &m, j).unwrap().scale(w.lambda_i))
            .unwrap();
        assert_eq!(total, manual);
    }

    #[test]
    fn zero_lambdas_give_zero_operator() {
        let seq = poly('A', 5);
        let w = HamiltonianWeights {
            lambda_c: 0.0,
            lambda_g: 0.0,
            lambda_d: 0.0,
            lambda_i: 0.0,
            ..HamiltonianWeights::default()
        };
        let m = MaskSet::defaults(5).with_heuristic_contacts(5, 1.0);
        let h = build_total(&seq, &w, &m, crate::data::mj_matrix()).unwrap();
        assert!(h.is_zero());
    }

    #[test]
    fn default_locality_is_four_and_triples_reach_six() {
        let seq = poly('A', 6);
        let w = HamiltonianWeights::default();
        let m = MaskSet::defaults(6);
        let h = build_total(&seq, &w, &m, &InteractionMatrix::zero()).unwrap();
        assert!(h.max_locality() <= 4);

        let mut m6 = MaskSet::defaults(6);
        m6.forbidden_chi = vec![(
            Direction::new(0).unwrap(),
            Direction::new(1).unwrap(),
            Direction::new(2).unwrap(),
        )];
        let w6 = HamiltonianWeights {
            kappa_chi: 1.0,
            ..HamiltonianWeights::default()
        };
        let h6 = build_chirality(6, &w6, &m6).unwrap();
        assert_eq!(h6.max_locality(), 6);
    }

    #[test]
    fn pins_select_the_fixed_frame() {
        // Over all 6-qubit states of a 4-chain, minimal energy states decode
        // with turns[0] = 1 and turns[1] = 0.
        let w = HamiltonianWeights::default();
        let m = MaskSet::defaults(4);
        let seq = poly('A', 4);
        let h = build_total(&seq, &w, &m, &InteractionMatrix::zero()).unwrap();
        let energies: Vec<f64> = (0..64u64).map(|x| h.eval_diagonal(x)).collect();
        let min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
        for (x, &e) in energies.iter().enumerate() {
            if e == min {
                let turns = decode_state(x as u64, 4);
                assert_eq!(turns[0], 1);
                assert_eq!(turns[1], 0);
                assert_ne!(turns[2], turns[1]);
            }
        }
        assert_eq!(min, 0.0);
    }

    #[test]
    fn pin_weight_dominates_interaction() {
        // With heuristic contacts and the shipped matrix, ground states still
        // avoid immediate reversals: the penalty (>= 30 per reversal) exceeds
        // any contact gain a single turn controls (<= 3 * max|J|).
        let seq = Sequence::parse("FWFWFW").unwrap();
        let l = seq.len();
        let w = HamiltonianWeights::default();
        let m = MaskSet::defaults(l).with_heuristic_contacts(l, 1.0);
        let j = crate::data::mj_matrix();
        let h = build_total(&seq, &w, &m, j).unwrap();
        let n = h.n_qubits();
        let mut min = f64::INFINITY;
        let mut argmin = Vec::new();
        for x in 0..(1u64 << n) {
            let e = h.eval_diagonal(x);
            if e < min {
                min = e;
                argmin = vec![x];
            } else if e == min {
                argmin.push(x);
            }
        }
        for x in argmin {
            let turns = decode_state(x, l);
            for t in 1..turns.len() {
                assert_ne!(turns[t - 1], turns[t], "reversal in ground state");
            }
        }
    }

    #[test]
    fn single_turn_chain_builds() {
        let seq = poly('G', 2);
        let h = build_total(
            &seq,
            &HamiltonianWeights::default(),
            &MaskSet::defaults(2),
            &InteractionMatrix::zero(),
        )
        .unwrap();
        assert_eq!(h.n_qubits(), 2);
        // only the turn-0 pin contributes
        let w = HamiltonianWeights::default();
        for x in 0..4u64 {
            let turns = decode_state(x, 2);
            let expected = if turns[0] == 1 { 0.0 } else { w.pin_weight() };
            assert_eq!(h.eval_diagonal(x), expected);
        }
    }

    #[test]
    fn chain_length_bounds() {
        assert!(check_chain(1).is_err());
        assert!(check_chain(2).is_ok());
        assert!(check_chain(33).is_ok()); // 64 qubits
        assert!(check_chain(34).is_err());
    }

    #[test]
    fn interaction_matrix_rejects_malformed_input() {
        assert!(InteractionMatrix::from_csv("").is_err());
        assert!(InteractionMatrix::from_csv("res,A,C\nA,1,2\n").is_err());
        let mut header = String::from("res");
        for c in ALPHABET {
            header.push(',');
            header.push(c);
        }
        // one row only
        let text = format!("{header}\nA{}\n", ",1".repeat(20));
        assert!(InteractionMatrix::from_csv(&text).is_err());
    }

    #[test]
    fn interaction_matrix_symmetrizes_with_warning() {
        let mut text = String::from("res");
        for c in ALPHABET {
            text.push(',');
            text.push(c);
        }
        text.push('\n');
        for (i, c) in ALPHABET.iter().enumerate() {
            text.push(*c);
            for k in 0..20 {
                // asymmetric: value depends on row/col order
                text.push_str(&format!(",{}", (i * 20 + k) as f64));
            }
            text.push('\n');
        }
        let m = InteractionMatrix::from_csv(&text).unwrap();
        assert!(!m.warnings().is_empty());
        for a in ALPHABET {
            for b in ALPHABET {
                assert_eq!(m.get(a, b).unwrap(), m.get(b, a).unwrap());
            }
        }
    }

    #[test]
    fn heuristic_contacts_cover_separations_three_to_five() {
        let m = MaskSet::defaults(10).with_heuristic_contacts(10, 2.0);
        assert!(m.contact.contains_key(&(0, 3)));
        assert!(m.contact.contains_key(&(0, 5)));
        assert!(!m.contact.contains_key(&(0, 2)));
        assert!(!m.contact.contains_key(&(0, 6)));
        assert!(m.contact.contains_key(&(5, 8)));
        assert_eq!(m.contact[&(0, 3)][2][3], 2.0);
    }
}
