//! Two-stage variational minimization of the diagonal energy operator.
//!
//! Stage one optimizes the ansatz parameters, evaluating the energy either
//! exactly from the statevector or from seeded finite-shot samples. Each
//! restart spends half its evaluation budget in the configured
//! derivative-free backend, then the rest in per-parameter sinusoidal
//! refinement: every parameter enters the circuit through a rotation whose
//! generator squares to the identity, so the energy restricted to one
//! parameter is a sinusoid that three samples determine completely. Stage
//! two re-prepares the best state and draws a larger, independent sample
//! from which the conformation is selected.
//!
//! Every random stream is derived from the single root seed through
//! `stage_seed`, so a full run is reproducible bit for bit from its
//! configuration.

pub mod optimizer;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::decode::{
    brute_force, classical_energy, select_conformation, Backbone, ClassicalScore, OracleReport,
    Selection, SelectionPolicy, ORACLE_QUBIT_CAP,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_total, HamiltonianWeights, InteractionMatrix, MaskSet, Sequence,
};
use crate::pauli::PauliSum;
use crate::qsim::{
    expectation_exact, expectation_quasi, expectation_sampled, mitigate_readout, sample,
    simulate, AnsatzSpec, Entanglement, MeasurementHistogram, QuasiDistribution, ReadoutNoise,
    StateVector, DEFAULT_QUBIT_CAP, MAX_DENSE_QUBITS,
};

pub use optimizer::OptimizerKind;

/// How initial ansatz parameters are chosen per restart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    Zeros,
    #[default]
    SmallRandom,
}

/// When to run the exhaustive oracle alongside a variational run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    /// Run it when the operator is at most `ORACLE_AUTO_QUBITS` wide.
    #[default]
    Auto,
    On,
    Off,
}

/// Widest operator the oracle covers automatically in `Auto` mode.
pub const ORACLE_AUTO_QUBITS: usize = 16;

/// Full configuration of a variational run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqeConfig {
    pub reps: usize,
    pub entanglement: Entanglement,
    pub optimizer: OptimizerKind,
    pub init: InitStrategy,
    /// Objective evaluation budget per restart.
    pub max_iter: usize,
    pub restarts: usize,
    /// Shots per objective evaluation; 0 evaluates exactly.
    pub shots_opt: u64,
    /// Shots of the final measurement stage.
    pub shots_measure: u64,
    pub tol: f64,
    /// Initial trust-region (or simplex) size of the backend minimizer.
    pub rho_beg: f64,
    /// Step resolution at which the backend minimizer stops refining.
    pub rho_end: f64,
    pub seed: u64,
    pub qubit_cap: usize,
    pub noise: Option<ReadoutNoise>,
    pub mitigate: bool,
    pub oracle: OracleMode,
}

impl Default for VqeConfig {
    fn default() -> Self {
        VqeConfig {
            reps: 1,
            entanglement: Entanglement::Circular,
            optimizer: OptimizerKind::Cobyla,
            init: InitStrategy::SmallRandom,
            max_iter: 200,
            restarts: 3,
            shots_opt: 2000,
            shots_measure: 20_000,
            tol: 1e-4,
            rho_beg: std::f64::consts::PI,
            rho_end: 1e-4,
            seed: 1234,
            qubit_cap: DEFAULT_QUBIT_CAP,
            noise: None,
            mitigate: false,
            oracle: OracleMode::Auto,
        }
    }
}

impl VqeConfig {
    /// Reduced budget used per window during assembly.
    pub fn window_preset() -> Self {
        VqeConfig {
            max_iter: 30,
            ..VqeConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be positive".into()));
        }
        if self.shots_measure == 0 {
            return Err(Error::Config("shots_measure must be positive".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.rho_beg.is_nan() || self.rho_beg <= 0.0 {
            return Err(Error::Config(format!(
                "rho_beg must be positive, got {}",
                self.rho_beg
            )));
        }
        if self.rho_end.is_nan() || self.rho_end <= 0.0 || self.rho_end > self.rho_beg {
            return Err(Error::Config(format!(
                "rho_end must lie in (0, rho_beg], got {}",
                self.rho_end
            )));
        }
        if self.qubit_cap < 2 || self.qubit_cap > MAX_DENSE_QUBITS {
            return Err(Error::Config(format!(
                "qubit_cap must lie in 2..={MAX_DENSE_QUBITS}, got {}",
                self.qubit_cap
            )));
        }
        if self.mitigate && self.noise.is_none() {
            return Err(Error::Config(
                "mitigation requires a noise model".into(),
            ));
        }
        if let Some(nz) = &self.noise {
            nz.validate()?;
        }
        Ok(())
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x1000_0000_01b3;

/// Derive the seed of a named stage from the root seed (FNV-1a over the
/// root's bytes followed by the label).
pub fn stage_seed(root: u64, label: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for b in root.to_le_bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(FNV_PRIME);
    }
    for b in label.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(FNV_PRIME);
    }
    h
}

/// Order-sensitive hash of the exact parameter bit patterns.
fn param_snapshot(params: &[f64]) -> u64 {
    let mut h = FNV_OFFSET;
    for p in params {
        for b in p.to_bits().to_le_bytes() {
            h = (h ^ u64::from(b)).wrapping_mul(FNV_PRIME);
        }
    }
    h
}

/// One objective evaluation in the optimization stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Global evaluation index across restarts.
    pub iter: usize,
    pub restart: usize,
    /// Hash of the parameter vector evaluated.
    pub snapshot: u64,
    pub energy: f64,
}

/// Record of every objective evaluation, in order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub entries: Vec<TraceEntry>,
}

impl EnergyTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,energy\n");
        for e in &self.entries {
            out.push_str(&format!("{},{}\n", e.iter, e.energy));
        }
        out
    }

    /// Best energy seen up to each evaluation (running minimum).
    pub fn running_min(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.entries
            .iter()
            .map(|e| {
                best = best.min(e.energy);
                best
            })
            .collect()
    }
}

/// Outcome of one restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub energy: f64,
    pub n_evals: usize,
}

/// Result of the optimization stage.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub spec: AnsatzSpec,
    pub best_params: Vec<f64>,
    pub best_energy: f64,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
    pub trace: EnergyTrace,
}

/// Shift an angle by whole turns until it lies inside `[lo, hi]`. The
/// energy is 2π-periodic in every parameter, so the value is unchanged.
fn wrap_angle(mut t: f64, lo: f64, hi: f64) -> f64 {
    if hi - lo < std::f64::consts::TAU {
        return t.clamp(lo, hi);
    }
    while t < lo {
        t += std::f64::consts::TAU;
    }
    while t > hi {
        t -= std::f64::consts::TAU;
    }
    t
}

fn init_params(cfg: &VqeConfig, count: usize, restart: usize) -> Vec<f64> {
    match cfg.init {
        InitStrategy::Zeros => vec![0.0; count],
        InitStrategy::SmallRandom => {
            use rand::Rng;
            use rand::SeedableRng;
            let seed = stage_seed(cfg.seed, &format!("vqe/restart/{restart}/init"));
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| rng.random_range(-0.1..0.1)).collect()
        }
    }
}

/// Minimize the diagonal operator over the ansatz parameters, best of
/// `restarts` independent starts. Within each restart the configured
/// backend runs first, then sinusoidal coordinate refinement polishes its
/// result until the budget, `tol`, or a fixed point stops it.
pub fn optimize(h: &PauliSum, cfg: &VqeConfig) -> Result<OptimizeOutcome> {
    cfg.validate()?;
    let n = h.n_qubits();
    if n > cfg.qubit_cap {
        return Err(Error::QubitCap {
            needed: n,
            cap: cfg.qubit_cap,
        });
    }
    let spec = AnsatzSpec {
        n_qubits: n,
        reps: cfg.reps,
        entanglement: cfg.entanglement,
    };
    let bounds = vec![(-2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI); spec.param_count()];

    let mut trace = EnergyTrace::default();
    let mut restarts = Vec::with_capacity(cfg.restarts);
    let mut best: Option<(usize, Vec<f64>, f64)> = None;
    let mut global_iter = 0usize;

    for r in 0..cfg.restarts {
        let x0 = init_params(cfg, spec.param_count(), r);
        let mut failure: Option<Error> = None;
        let local_evals = std::cell::Cell::new(0usize);
        {
            let mut objective = |x: &[f64]| -> f64 {
                let result = (|| -> Result<f64> {
                    let psi = simulate(&spec, x)?;
                    if cfg.shots_opt == 0 {
                        expectation_exact(h, &psi)
                    } else {
                        let seed = stage_seed(
                            cfg.seed,
                            &format!("vqe/restart/{r}/opt/{}", local_evals.get()),
                        );
                        let hist = sample(&psi, cfg.shots_opt, seed, cfg.noise.as_ref())?;
                        match (&cfg.noise, cfg.mitigate) {
                            (Some(nz), true) => {
                                expectation_quasi(h, &mitigate_readout(&hist, nz)?)
                            }
                            _ => expectation_sampled(h, &hist),
                        }
                    }
                })();
                let energy = match result {
                    Ok(e) => e,
                    Err(e) => {
                        if failure.is_none() {
                            failure = Some(e);
                        }
                        f64::INFINITY
                    }
                };
                trace.entries.push(TraceEntry {
                    iter: global_iter,
                    restart: r,
                    snapshot: param_snapshot(x),
                    energy,
                });
                global_iter += 1;
                local_evals.set(local_evals.get() + 1);
                energy
            };
            let backend_budget = (cfg.max_iter / 2).max(1);
            let backend = optimizer::minimize(
                cfg.optimizer,
                &mut objective,
                &x0,
                &bounds,
                backend_budget,
                cfg.tol,
                cfg.rho_beg,
                cfg.rho_end,
            );
            let (mut x, backend_energy) = match backend {
                Ok(v) => v,
                Err(opt_err) => return Err(failure.take().unwrap_or(opt_err)),
            };
            let mut best_e = backend_energy;
            let mut best_x = x.clone();
            let mut ground = backend_energy;

            // Refinement: the energy restricted to a single parameter is a
            // sinusoid with period 2π, so its value at the current point and
            // at quarter-turn offsets pins the curve and each step can jump
            // straight to the coordinate minimum. Still derivative-free and
            // bounded; the model value is re-grounded by a real evaluation
            // after every sweep.
            'sweeps: while cfg.max_iter.saturating_sub(local_evals.get()) >= 2 {
                let before = local_evals.get();
                let mut model = ground;
                for k in 0..spec.param_count() {
                    if cfg.max_iter.saturating_sub(local_evals.get()) < 2 {
                        break;
                    }
                    let theta = x[k];
                    let (lo, hi) = bounds[k];
                    x[k] = wrap_angle(theta + std::f64::consts::FRAC_PI_2, lo, hi);
                    let ep = objective(&x);
                    x[k] = wrap_angle(theta - std::f64::consts::FRAC_PI_2, lo, hi);
                    let em = objective(&x);
                    if !ep.is_finite() || !em.is_finite() {
                        break 'sweeps;
                    }
                    let jump = theta
                        - std::f64::consts::FRAC_PI_2
                        - f64::atan2(2.0 * model - ep - em, ep - em);
                    x[k] = wrap_angle(jump, lo, hi);
                    let mid = 0.5 * (ep + em);
                    model = mid - f64::hypot(model - mid, 0.5 * (em - ep));
                }
                if cfg.max_iter.saturating_sub(local_evals.get()) == 0 {
                    break;
                }
                let grounded = objective(&x);
                if !grounded.is_finite() {
                    break;
                }
                let delta = (ground - grounded).abs();
                ground = grounded;
                if grounded < best_e {
                    best_e = grounded;
                    best_x = x.clone();
                }
                if delta <= cfg.tol || local_evals.get() == before {
                    break;
                }
            }

            if let Some(e) = failure {
                return Err(e);
            }
            restarts.push(RestartSummary {
                restart: r,
                energy: best_e,
                n_evals: local_evals.get(),
            });
            let improved = match &best {
                None => true,
                Some((_, _, be)) => best_e < *be,
            };
            if improved {
                best = Some((r, best_x, best_e));
            }
        }
    }

    let (best_restart, best_params, best_energy) =
        best.ok_or_else(|| Error::Optimize("no restart produced a result".into()))?;
    Ok(OptimizeOutcome {
        spec,
        best_params,
        best_energy,
        best_restart,
        restarts,
        trace,
    })
}

/// Result of the measurement stage.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureOutcome {
    pub histogram: MeasurementHistogram,
    pub mitigated: Option<QuasiDistribution>,
    /// Energy estimate from this sample (mitigated when applicable).
    pub energy: f64,
}

/// Re-prepare the optimized state and draw the final, larger sample.
pub fn measure_stage(
    h: &PauliSum,
    psi: &StateVector,
    cfg: &VqeConfig,
) -> Result<MeasureOutcome> {
    let seed = stage_seed(cfg.seed, "measure");
    let histogram = sample(psi, cfg.shots_measure, seed, cfg.noise.as_ref())?;
    let (mitigated, energy) = match (&cfg.noise, cfg.mitigate) {
        (Some(nz), true) => {
            let quasi = mitigate_readout(&histogram, nz)?;
            let e = expectation_quasi(h, &quasi)?;
            (Some(quasi), e)
        }
        _ => (None, expectation_sampled(h, &histogram)?),
    };
    Ok(MeasureOutcome {
        histogram,
        mitigated,
        energy,
    })
}

/// Wall-clock cost of a run. This is the only non-deterministic field of a
/// run record; comparisons drop it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub seconds: f64,
}

/// Everything a finished run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub sequence: String,
    pub length: usize,
    pub n_qubits: usize,
    pub config: VqeConfig,
    pub policy: SelectionPolicy,
    pub weights: HamiltonianWeights,
    pub term_count: usize,
    pub best_energy: f64,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
    pub measured_energy: f64,
    pub histogram: MeasurementHistogram,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mitigated: Option<QuasiDistribution>,
    pub selection: Selection,
    pub coordinates: Vec<[f64; 3]>,
    pub classical: ClassicalScore,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    /// Gap between the variational optimum and the exact minimum, when the
    /// oracle ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimality_gap: Option<f64>,
    pub timing: Timing,
}

/// A finished run: the serializable record plus the full energy trace.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub record: RunRecord,
    pub trace: EnergyTrace,
}

/// Build, optimize, measure, and decode one chain end to end.
pub fn run_pipeline(
    seq: &Sequence,
    weights: &HamiltonianWeights,
    masks: &MaskSet,
    j: &InteractionMatrix,
    cfg: &VqeConfig,
    policy: SelectionPolicy,
) -> Result<PipelineOutput> {
    cfg.validate()?;
    let started = Instant::now();
    let h = build_total(seq, weights, masks, j)?;
    let n = h.n_qubits();
    if n > cfg.qubit_cap {
        return Err(Error::QubitCap {
            needed: n,
            cap: cfg.qubit_cap,
        });
    }

    let opt = optimize(&h, cfg)?;
    let psi = simulate(&opt.spec, &opt.best_params)?;
    let meas = measure_stage(&h, &psi, cfg)?;

    let ranked: Vec<(String, f64)> = match &meas.mitigated {
        Some(quasi) => quasi
            .ranked()
            .into_iter()
            .filter(|&(_, w)| w > 0.0)
            .map(|(s, w)| (s.to_string(), w))
            .collect(),
        None => meas
            .histogram
            .ranked()
            .into_iter()
            .map(|(s, c)| (s.to_string(), c as f64))
            .collect(),
    };
    let ranked_refs: Vec<(&str, f64)> = ranked.iter().map(|(s, w)| (s.as_str(), *w)).collect();
    let selection = select_conformation(&ranked_refs, seq.len(), policy)?;

    let backbone = Backbone::from_turns(selection.turns.clone());
    let classical = classical_energy(
        &backbone,
        seq,
        j,
        weights.lambda_d * weights.eta,
    )?;

    let run_oracle = match cfg.oracle {
        OracleMode::On => true,
        OracleMode::Off => false,
        OracleMode::Auto => n <= ORACLE_AUTO_QUBITS,
    };
    let (oracle, optimality_gap) = if run_oracle && n <= ORACLE_QUBIT_CAP {
        let rep = brute_force(&h, false)?;
        let gap = opt.best_energy - rep.min_energy;
        (Some(rep), Some(gap))
    } else {
        (None, None)
    };

    let record = RunRecord {
        schema_version: 1,
        sequence: seq.text().to_string(),
        length: seq.len(),
        n_qubits: n,
        config: cfg.clone(),
        policy,
        weights: weights.clone(),
        term_count: h.term_count(),
        best_energy: opt.best_energy,
        best_restart: opt.best_restart,
        restarts: opt.restarts.clone(),
        measured_energy: meas.energy,
        histogram: meas.histogram,
        mitigated: meas.mitigated,
        selection,
        coordinates: backbone.coords(),
        classical,
        oracle,
        optimality_gap,
        timing: Timing {
            seconds: started.elapsed().as_secs_f64(),
        },
    };
    Ok(PipelineOutput {
        record,
        trace: opt.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::mj_matrix;

    fn exact_config(seed: u64) -> VqeConfig {
        VqeConfig {
            shots_opt: 0,
            seed,
            ..VqeConfig::default()
        }
    }

    #[test]
    fn stage_seed_separates_labels_and_roots() {
        let a = stage_seed(1, "measure");
        assert_eq!(a, stage_seed(1, "measure"));
        assert_ne!(a, stage_seed(1, "vqe/restart/0/init"));
        assert_ne!(a, stage_seed(2, "measure"));
        assert_ne!(stage_seed(1, "vqe/restart/0/init"), stage_seed(1, "vqe/restart/1/init"));
    }

    #[test]
    fn config_validation_catches_bad_fields() {
        let ok = VqeConfig::default();
        assert!(ok.validate().is_ok());
        assert!(VqeConfig { restarts: 0, ..ok.clone() }.validate().is_err());
        assert!(VqeConfig { max_iter: 0, ..ok.clone() }.validate().is_err());
        assert!(VqeConfig { shots_measure: 0, ..ok.clone() }.validate().is_err());
        assert!(VqeConfig { tol: 0.0, ..ok.clone() }.validate().is_err());
        assert!(VqeConfig { qubit_cap: 40, ..ok.clone() }.validate().is_err());
        assert!(VqeConfig { mitigate: true, ..ok.clone() }.validate().is_err());
        assert!(VqeConfig {
            noise: Some(ReadoutNoise { p01: 0.7, p10: 0.4 }),
            ..ok
        }
        .validate()
        .is_err());
    }

    #[test]
    fn window_preset_shrinks_the_budget() {
        let w = VqeConfig::window_preset();
        assert_eq!(w.max_iter, 30);
        assert_eq!(w.restarts, VqeConfig::default().restarts);
    }

    #[test]
    fn exact_optimization_reaches_the_ground_state() {
        let seq = Sequence::parse("AAA").unwrap();
        let w = HamiltonianWeights::default();
        let m = MaskSet::defaults(3);
        let h = build_total(&seq, &w, &m, &InteractionMatrix::zero()).unwrap();
        let cfg = exact_config(7);
        let out = optimize(&h, &cfg).unwrap();
        let exact = brute_force(&h, false).unwrap();
        assert!(
            out.best_energy - exact.min_energy < 1e-2,
            "gap = {}",
            out.best_energy - exact.min_energy
        );
    }

    #[test]
    fn nelder_mead_backend_improves_the_energy() {
        let seq = Sequence::parse("AAA").unwrap();
        let w = HamiltonianWeights::default();
        let m = MaskSet::defaults(3);
        let h = build_total(&seq, &w, &m, &InteractionMatrix::zero()).unwrap();
        let cfg = VqeConfig {
            optimizer: OptimizerKind::NelderMead,
            max_iter: 2000,
            ..exact_config(3)
        };
        let out = optimize(&h, &cfg).unwrap();
        // ground energy 0, first excited band at 10
        assert!(out.best_energy < 9.0, "energy = {}", out.best_energy);
    }

    #[test]
    fn optimization_is_deterministic() {
        let seq = Sequence::parse("GAG").unwrap();
        let w = HamiltonianWeights::default();
        let m = MaskSet::defaults(3);
        let h = build_total(&seq, &w, &m, &InteractionMatrix::zero()).unwrap();
        let cfg = VqeConfig {
            max_iter: 40,
            ..exact_config(99)
        };
        let a = optimize(&h, &cfg).unwrap();
        let b = optimize(&h, &cfg).unwrap();
        assert_eq!(a.best_params, b.best_params);
        assert_eq!(a.trace, b.trace);
        let c = optimize(&h, &VqeConfig { seed: 100, ..cfg }).unwrap();
        assert_ne!(a.best_params, c.best_params);
    }

    #[test]
    fn trace_numbers_evaluations_globally() {
        let seq = Sequence::parse("AAA").unwrap();
        let w = HamiltonianWeights::default();
        let m = MaskSet::defaults(3);
        let h = build_total(&seq, &w, &m, &InteractionMatrix::zero()).unwrap();
        let cfg = VqeConfig {
            max_iter: 25,
            restarts: 2,
            ..exact_config(5)
        };
        let out = optimize(&h, &cfg).unwrap();
        assert!(!out.trace.entries.is_empty());
        for (i, e) in out.trace.entries.iter().enumerate() {
            assert_eq!(e.iter, i);
        }
        assert_eq!(out.restarts.len(), 2);
        let total: usize = out.restarts.iter().map(|r| r.n_evals).sum();
        assert_eq!(out.trace.entries.len(), total);
        let csv = out.trace.to_csv();
        assert!(csv.starts_with("iter,energy\n0,"));
    }

    #[test]
    fn sampled_objective_is_reproducible() {
        let seq = Sequence::parse("AAA").unwrap();
        let w = HamiltonianWeights::default();
        let m = MaskSet::defaults(3);
        let h = build_total(&seq, &w, &m, &InteractionMatrix::zero()).unwrap();
        let cfg = VqeConfig {
            shots_opt: 200,
            max_iter: 30,
            restarts: 1,
            seed: 21,
            ..VqeConfig::default()
        };
        let a = optimize(&h, &cfg).unwrap();
        let b = optimize(&h, &cfg).unwrap();
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn pipeline_produces_a_valid_conformation() {
        let seq = Sequence::parse("VKDR").unwrap();
        let w = HamiltonianWeights::default();
        let m = MaskSet::defaults(4);
        let cfg = exact_config(17);
        let out =
            run_pipeline(&seq, &w, &m, mj_matrix(), &cfg, SelectionPolicy::ValidFirst).unwrap();
        let rec = &out.record;
        assert_eq!(rec.n_qubits, 6);
        assert!(rec.selection.self_avoiding);
        assert_eq!(rec.coordinates.len(), 4);
        assert_eq!(rec.histogram.shots, cfg.shots_measure);
        // 6 qubits: oracle attaches automatically
        let oracle = rec.oracle.as_ref().expect("oracle runs at 6 qubits");
        assert_eq!(oracle.n_evaluated, 64);
        let gap = rec.optimality_gap.unwrap();
        assert!(gap > -1e-9, "optimum below exact minimum: {gap}");
        assert!(!out.trace.entries.is_empty());
        // pins survive into the selected state
        assert_eq!(rec.selection.turns[0].index(), 1);
        assert_eq!(rec.selection.turns[1].index(), 0);
    }

    #[test]
    fn pipeline_respects_the_qubit_cap() {
        let seq = Sequence::parse(&"A".repeat(20)).unwrap();
        let w = HamiltonianWeights::default();
        let m = MaskSet::defaults(20);
        let cfg = VqeConfig::default();
        match run_pipeline(&seq, &w, &m, mj_matrix(), &cfg, SelectionPolicy::ValidFirst) {
            Err(Error::QubitCap { needed: 38, cap: 24 }) => {}
            other => panic!("expected qubit cap error, got {other:?}"),
        }
    }

    #[test]
    fn oracle_mode_off_skips_the_sweep() {
        let seq = Sequence::parse("AAA").unwrap();
        let w = HamiltonianWeights::default();
        let m = MaskSet::defaults(3);
        let cfg = VqeConfig {
            oracle: OracleMode::Off,
            ..exact_config(3)
        };
        let out =
            run_pipeline(&seq, &w, &m, &InteractionMatrix::zero(), &cfg, SelectionPolicy::ValidFirst)
                .unwrap();
        assert!(out.record.oracle.is_none());
        assert!(out.record.optimality_gap.is_none());
    }

    #[test]
    fn mitigated_pipeline_reports_quasi_distribution() {
        let seq = Sequence::parse("AAA").unwrap();
        let w = HamiltonianWeights::default();
        let m = MaskSet::defaults(3);
        let cfg = VqeConfig {
            noise: Some(ReadoutNoise { p01: 0.05, p10: 0.03 }),
            mitigate: true,
            shots_opt: 0,
            seed: 13,
            ..VqeConfig::default()
        };
        let out =
            run_pipeline(&seq, &w, &m, &InteractionMatrix::zero(), &cfg, SelectionPolicy::ValidFirst)
                .unwrap();
        let quasi = out.record.mitigated.as_ref().expect("mitigation on");
        assert!((quasi.total() - 1.0).abs() < 1e-9);
        assert!(out.record.selection.self_avoiding);
    }
}
