//! Dense statevector simulation of the hardware-efficient ansatz, plus
//! measurement sampling, readout noise, and its mitigation.
//!
//! Qubit q lives in bit q of a basis-state index. Rendered bitstrings put
//! qubit 0 in the leftmost character. A measured bit 0 corresponds to the
//! +1 eigenvalue of Z on that qubit.
//!
//! The circuit is the standard Ry/Rz + CX-chain layout: `reps` blocks of
//! (rotation layer, entangler layer) followed by one final rotation layer,
//! so a circuit on n qubits takes `2 n (reps + 1)` parameters. Within
//! rotation layer `l`, qubit q rotates by `Ry(theta[2nl + q])` then
//! `Rz(theta[2nl + n + q])`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliSum;

/// Default ceiling on simulated qubits; larger chains go through `assemble`.
pub const DEFAULT_QUBIT_CAP: usize = 24;

/// Hard allocation ceiling for dense vectors (2^n complex amplitudes).
pub const MAX_DENSE_QUBITS: usize = 30;

/// Entangler topology of the ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entanglement {
    Linear,
    Circular,
}

/// Shape of the variational circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub reps: usize,
    pub entanglement: Entanglement,
}

impl AnsatzSpec {
    pub fn param_count(&self) -> usize {
        2 * self.n_qubits * (self.reps + 1)
    }

    /// CX pairs of one entangler layer, in application order. Control is
    /// always the lower-indexed qubit of the chain; the circular wrap-around
    /// pair is appended only when it is not already present (n >= 3).
    pub fn entangler_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n_qubits;
        let mut pairs: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|q| (q, q + 1)).collect();
        if self.entanglement == Entanglement::Circular && n >= 3 {
            pairs.push((n - 1, 0));
        }
        pairs
    }
}

/// Dense complex statevector over `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros computational basis state.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::QubitCap {
                needed: n_qubits,
                cap: MAX_DENSE_QUBITS,
            });
        }
        let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
        amps[0] = Complex64::ONE;
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability of each basis state, indexed by the state integer.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn apply_ry(&mut self, q: usize, theta: f64) {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let bit = 1usize << q;
        for i0 in 0..self.amps.len() {
            if i0 & bit == 0 {
                let i1 = i0 | bit;
                let a0 = self.amps[i0];
                let a1 = self.amps[i1];
                self.amps[i0] = a0 * c - a1 * s;
                self.amps[i1] = a0 * s + a1 * c;
            }
        }
    }

    fn apply_rz(&mut self, q: usize, theta: f64) {
        let phase0 = Complex64::from_polar(1.0, -theta / 2.0);
        let phase1 = Complex64::from_polar(1.0, theta / 2.0);
        let bit = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & bit == 0 { phase0 } else { phase1 };
        }
    }

    fn apply_cx(&mut self, control: usize, target: usize) {
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cbit != 0 && i & tbit == 0 {
                self.amps.swap(i, i | tbit);
            }
        }
    }
}

/// Run the ansatz on |0...0> with the given parameters.
pub fn simulate(spec: &AnsatzSpec, params: &[f64]) -> Result<StateVector> {
    if params.len() != spec.param_count() {
        return Err(Error::Dimension(format!(
            "ansatz takes {} parameters, got {}",
            spec.param_count(),
            params.len()
        )));
    }
    let n = spec.n_qubits;
    let mut psi = StateVector::zero_state(n)?;
    let pairs = spec.entangler_pairs();
    for layer in 0..=spec.reps {
        let base = 2 * n * layer;
        for q in 0..n {
            psi.apply_ry(q, params[base + q]);
        }
        for q in 0..n {
            psi.apply_rz(q, params[base + n + q]);
        }
        if layer < spec.reps {
            for &(c, t) in &pairs {
                psi.apply_cx(c, t);
            }
        }
    }
    Ok(psi)
}

/// Exact expectation of a diagonal operator in the given state.
pub fn expectation_exact(h: &PauliSum, psi: &StateVector) -> Result<f64> {
    if h.n_qubits() != psi.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: h.n_qubits(),
            got: psi.n_qubits(),
        });
    }
    Ok(psi
        .amps
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(x, a)| a.norm_sqr() * h.eval_diagonal(x as u64))
        .sum())
}

/// Symmetric single-qubit readout error model applied to every qubit.
///
/// `p01` is the probability of reading 1 when the true bit is 0; `p10` the
/// reverse. The confusion matrix must stay invertible (p01 + p10 < 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutNoise {
    pub p01: f64,
    pub p10: f64,
}

impl ReadoutNoise {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.p01) || !(0.0..1.0).contains(&self.p10) {
            return Err(Error::Config(format!(
                "readout probabilities must lie in [0, 1): p01={}, p10={}",
                self.p01, self.p10
            )));
        }
        let sum = self.p01 + self.p10;
        if sum >= 1.0 {
            return Err(Error::SingularConfusion { sum });
        }
        Ok(())
    }
}

/// Render a basis state as text, qubit 0 leftmost.
pub fn bits_to_string(x: u64, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| if (x >> q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Parse bitstring text back to (state, qubit count).
pub fn string_to_bits(s: &str) -> Result<(u64, usize)> {
    if s.is_empty() || s.len() > 64 {
        return Err(Error::Parse {
            line: 0,
            message: format!("bitstring of {} characters", s.len()),
        });
    }
    let mut x = 0u64;
    for (q, ch) in s.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => x |= 1 << q,
            other => {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("bitstring character {other:?}"),
                })
            }
        }
    }
    Ok((x, s.len()))
}

/// Counted measurement outcomes of one sampling stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementHistogram {
    pub n_qubits: usize,
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl MeasurementHistogram {
    /// Outcomes by descending count; ties break toward the lexicographically
    /// smaller bitstring.
    pub fn ranked(&self) -> Vec<(&str, u64)> {
        let mut rows: Vec<(&str, u64)> = self
            .counts
            .iter()
            .map(|(s, &c)| (s.as_str(), c))
            .collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitstring,count\n");
        for (s, c) in self.ranked() {
            out.push_str(s);
            out.push(',');
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }
}

/// Draw `shots` measurements from the state, optionally corrupted by
/// readout noise. Deterministic for a fixed seed.
pub fn sample(
    psi: &StateVector,
    shots: u64,
    seed: u64,
    noise: Option<&ReadoutNoise>,
) -> Result<MeasurementHistogram> {
    if shots == 0 {
        return Err(Error::Config("shot count must be positive".into()));
    }
    if let Some(nz) = noise {
        nz.validate()?;
    }
    let n = psi.n_qubits();
    let probs = psi.probabilities();
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cumulative.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * total;
        let mut idx = cumulative.partition_point(|&c| c <= u);
        if idx >= probs.len() {
            idx = probs.len() - 1;
        }
        let mut x = idx as u64;
        if let Some(nz) = noise {
            for q in 0..n {
                let bit = (x >> q) & 1;
                let flip_p = if bit == 0 { nz.p01 } else { nz.p10 };
                if rng.random::<f64>() < flip_p {
                    x ^= 1 << q;
                }
            }
        }
        *counts.entry(bits_to_string(x, n)).or_insert(0) += 1;
    }
    Ok(MeasurementHistogram {
        n_qubits: n,
        shots,
        counts,
    })
}

/// Shot-average of a diagonal operator over a histogram.
pub fn expectation_sampled(h: &PauliSum, hist: &MeasurementHistogram) -> Result<f64> {
    if h.n_qubits() != hist.n_qubits {
        return Err(Error::QubitMismatch {
            expected: h.n_qubits(),
            got: hist.n_qubits,
        });
    }
    if hist.shots == 0 || hist.counts.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    let mut acc = 0.0;
    for (s, &c) in &hist.counts {
        let (x, w) = string_to_bits(s)?;
        if w != hist.n_qubits {
            return Err(Error::QubitMismatch {
                expected: hist.n_qubits,
                got: w,
            });
        }
        acc += c as f64 * h.eval_diagonal(x);
    }
    Ok(acc / hist.shots as f64)
}

/// Normalized (quasi-)probabilities per bitstring. Entries may be negative
/// after mitigation; the total stays 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiDistribution {
    pub n_qubits: usize,
    pub values: BTreeMap<String, f64>,
}

impl QuasiDistribution {
    pub fn from_histogram(hist: &MeasurementHistogram) -> Result<Self> {
        if hist.shots == 0 || hist.counts.is_empty() {
            return Err(Error::EmptyHistogram);
        }
        let values = hist
            .counts
            .iter()
            .map(|(s, &c)| (s.clone(), c as f64 / hist.shots as f64))
            .collect();
        Ok(QuasiDistribution {
            n_qubits: hist.n_qubits,
            values,
        })
    }

    pub fn total(&self) -> f64 {
        self.values.values().sum()
    }

    /// Entries by descending weight; ties break lexicographically.
    pub fn ranked(&self) -> Vec<(&str, f64)> {
        let mut rows: Vec<(&str, f64)> =
            self.values.iter().map(|(s, &v)| (s.as_str(), v)).collect();
        rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(b.0)));
        rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitstring,probability\n");
        for (s, v) in self.ranked() {
            out.push_str(s);
            out.push(',');
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }
}

/// Shot-average of a diagonal operator over a quasi-distribution.
pub fn expectation_quasi(h: &PauliSum, dist: &QuasiDistribution) -> Result<f64> {
    if h.n_qubits() != dist.n_qubits {
        return Err(Error::QubitMismatch {
            expected: h.n_qubits(),
            got: dist.n_qubits,
        });
    }
    let mut acc = 0.0;
    for (s, &v) in &dist.values {
        let (x, _) = string_to_bits(s)?;
        acc += v * h.eval_diagonal(x);
    }
    Ok(acc)
}

/// Invert the readout confusion model on a measured histogram.
///
/// Applies the inverse single-qubit confusion matrix to every qubit of the
/// dense 2^n distribution. Output weights can dip below zero; their sum is
/// preserved to within 1e-9.
pub fn mitigate_readout(
    hist: &MeasurementHistogram,
    noise: &ReadoutNoise,
) -> Result<QuasiDistribution> {
    noise.validate()?;
    if hist.shots == 0 || hist.counts.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    let n = hist.n_qubits;
    if n > MAX_DENSE_QUBITS {
        return Err(Error::QubitCap {
            needed: n,
            cap: MAX_DENSE_QUBITS,
        });
    }
    let mut dense = vec![0.0f64; 1 << n];
    for (s, &c) in &hist.counts {
        let (x, w) = string_to_bits(s)?;
        if w != n {
            return Err(Error::QubitMismatch {
                expected: n,
                got: w,
            });
        }
        dense[x as usize] = c as f64 / hist.shots as f64;
    }
    // inverse of [[1-p01, p10], [p01, 1-p10]]
    let det = 1.0 - noise.p01 - noise.p10;
    let inv = [
        [(1.0 - noise.p10) / det, -noise.p10 / det],
        [-noise.p01 / det, (1.0 - noise.p01) / det],
    ];
    for q in 0..n {
        let bit = 1usize << q;
        for i0 in 0..dense.len() {
            if i0 & bit == 0 {
                let i1 = i0 | bit;
                let v0 = dense[i0];
                let v1 = dense[i1];
                dense[i0] = inv[0][0] * v0 + inv[0][1] * v1;
                dense[i1] = inv[1][0] * v0 + inv[1][1] * v1;
            }
        }
    }
    let total: f64 = dense.iter().sum();
    debug_assert!((total - 1.0).abs() <= 1e-9, "mitigation drifted: {total}");
    let values = dense
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(x, &v)| (bits_to_string(x as u64, n), v))
        .collect();
    Ok(QuasiDistribution {
        n_qubits: n,
        values,
    })
}
