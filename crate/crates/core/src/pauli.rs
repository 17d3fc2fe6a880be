//! Sparse sums of tensor products of Pauli Z operators.
//!
//! Every operator handled here is diagonal in the computational basis. A term
//! is a real coefficient plus a bitmask selecting which qubits carry a Z
//! factor; the empty mask is the identity. Products stay inside the
//! representation because Z_S * Z_T = Z_(S xor T) with coefficients
//! multiplying, so sums of Z-strings are closed under addition and
//! multiplication.
//!
//! Conventions, fixed once for the whole crate:
//! - measured bit 0 corresponds to Z eigenvalue +1, bit 1 to -1, so a term's
//!   value on basis state `x` is coeff * (-1)^popcount(mask & x);
//! - turn t of a chain occupies qubits 2t and 2t+1, and binary digit b of a
//!   direction index d is (d >> b) & 1, carried by qubit 2t+b with digit 1
//!   selected by the (I+Z)/2 projector.
//!
//! Zero-coefficient terms are pruned exactly (comparison against 0.0, no
//! epsilon): projector coefficients are dyadic rationals, so all algebraic
//! cancellations are exact in f64.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lattice::Direction;

/// Maximum mask width: masks are u64 bitsets.
pub const MAX_QUBITS: usize = 64;

/// Diagonal operator: a sum of Z-string terms over a fixed qubit count.
/// Terms are keyed by mask in a sorted map, which fixes a canonical order for
/// iteration and serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<u64, f64>,
}

impl PauliSum {
    fn check_width(n_qubits: usize) -> Result<()> {
        if n_qubits == 0 {
            return Err(Error::Dimension("operator needs at least one qubit".into()));
        }
        if n_qubits > MAX_QUBITS {
            return Err(Error::MaskWidth {
                needed: n_qubits,
                max: MAX_QUBITS,
            });
        }
        Ok(())
    }

    /// Operator with no terms (the zero operator).
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::check_width(n_qubits)?;
        Ok(PauliSum {
            n_qubits,
            terms: BTreeMap::new(),
        })
    }

    /// The identity operator.
    pub fn identity(n_qubits: usize) -> Result<Self> {
        let mut s = Self::zero(n_qubits)?;
        s.terms.insert(0, 1.0);
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (ascending mask) order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coefficient(&self, mask: u64) -> f64 {
        self.terms.get(&mask).copied().unwrap_or(0.0)
    }

    /// Largest number of Z factors in any term (0 for zero/identity).
    pub fn max_locality(&self) -> usize {
        self.terms
            .keys()
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    fn accumulate(&mut self, mask: u64, coeff: f64) {
        let entry = self.terms.entry(mask).or_insert(0.0);
        *entry += coeff;
        if *entry == 0.0 {
            self.terms.remove(&mask);
        }
    }

    /// Add a single term.
    pub fn add_term(&mut self, mask: u64, coeff: f64) -> Result<()> {
        if self.n_qubits < MAX_QUBITS && mask >> self.n_qubits != 0 {
            return Err(Error::Dimension(format!(
                "mask {mask:#x} touches qubits beyond {}",
                self.n_qubits
            )));
        }
        if coeff != 0.0 {
            self.accumulate(mask, coeff);
        }
        Ok(())
    }

    /// Sum of two operators over the same qubit count.
    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        let mut out = self.clone();
        for (&mask, &coeff) in &other.terms {
            out.accumulate(mask, coeff);
        }
        Ok(out)
    }

    /// In-place sum; same contract as `add`.
    pub fn add_assign(&mut self, other: &PauliSum) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        for (&mask, &coeff) in &other.terms {
            self.accumulate(mask, coeff);
        }
        Ok(())
    }

    /// Scalar multiple. Scaling by zero yields the zero operator.
    pub fn scale(&self, k: f64) -> PauliSum {
        let mut out = PauliSum {
            n_qubits: self.n_qubits,
            terms: BTreeMap::new(),
        };
        if k == 0.0 {
            return out;
        }
        for (&mask, &coeff) in &self.terms {
            let c = coeff * k;
            if c != 0.0 {
                out.terms.insert(mask, c);
            }
        }
        out
    }

    /// Operator product: masks combine by symmetric difference (xor) and
    /// coefficients multiply, with like terms merged.
    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        let mut out = PauliSum {
            n_qubits: self.n_qubits,
            terms: BTreeMap::new(),
        };
        for (&ma, &ca) in &self.terms {
            for (&mb, &cb) in &other.terms {
                let c = ca * cb;
                if c != 0.0 {
                    out.accumulate(ma ^ mb, c);
                }
            }
        }
        Ok(out)
    }

    /// Projector onto direction `d` at turn `t`: the two-qubit operator
    /// (I + s0 Z_{2t})(I + s1 Z_{2t+1}) / 4 with s_b = +1 when digit b of the
    /// direction index is 1 and -1 when it is 0. Expands to exactly four
    /// terms, none of which cancel.
    pub fn projector(t: usize, d: Direction, n_qubits: usize) -> Result<PauliSum> {
        Self::check_width(n_qubits)?;
        let q0 = 2 * t;
        let q1 = 2 * t + 1;
        if q1 >= n_qubits {
            return Err(Error::Dimension(format!(
                "turn {t} needs qubits {q0} and {q1} but only {n_qubits} exist"
            )));
        }
        let s0 = if d.digit(0) == 1 { 1.0 } else { -1.0 };
        let s1 = if d.digit(1) == 1 { 1.0 } else { -1.0 };
        let m0 = 1u64 << q0;
        let m1 = 1u64 << q1;
        let mut p = PauliSum::zero(n_qubits)?;
        p.terms.insert(0, 0.25);
        p.terms.insert(m0, 0.25 * s0);
        p.terms.insert(m1, 0.25 * s1);
        p.terms.insert(m0 | m1, 0.25 * s0 * s1);
        Ok(p)
    }

    /// Value of the diagonal on basis state `x` (bit q of `x` is the measured
    /// bit of qubit q).
    pub fn eval_diagonal(&self, x: u64) -> f64 {
        let mut e = 0.0;
        for (&mask, &coeff) in &self.terms {
            let sign = if (mask & x).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            e += coeff * sign;
        }
        e
    }

    /// Text form: a `qubits <n>` header, then one `<coeff> <mask-as-hex>`
    /// line per term in canonical mask order. Coefficients use the shortest
    /// decimal that parses back to the identical f64, so the round-trip is
    /// exact.
    pub fn to_text(&self) -> String {
        let mut s = format!("qubits {}\n", self.n_qubits);
        for (&mask, &coeff) in &self.terms {
            s.push_str(&format!("{coeff} {mask:x}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<PauliSum> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty input".into(),
        })?;
        let n_qubits = header
            .strip_prefix("qubits ")
            .and_then(|v| v.trim().parse::<usize>().ok())
            .ok_or(Error::Parse {
                line: 1,
                message: format!("expected `qubits <n>`, got {header:?}"),
            })?;
        let mut sum = PauliSum::zero(n_qubits)?;
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (coeff, mask) = match (parts.next(), parts.next(), parts.next()) {
                (Some(c), Some(m), None) => (c, m),
                _ => {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("expected `<coeff> <mask-hex>`, got {line:?}"),
                    })
                }
            };
            let coeff: f64 = coeff.parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("bad coefficient {coeff:?}"),
            })?;
            let mask = u64::from_str_radix(mask, 16).map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("bad mask {mask:?}"),
            })?;
            sum.add_term(mask, coeff)?;
        }
        Ok(sum)
    }
}
