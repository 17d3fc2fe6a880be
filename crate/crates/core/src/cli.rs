//! Command-line interface.
//!
//! Five subcommands cover the pipeline: `build` writes the energy operator,
//! `predict` runs the full variational fold, `oracle` sweeps the diagonal
//! exactly, `assemble` folds long chains window by window, and `rmsd`
//! compares two CA traces.
//!
//! Settings merge in three layers: built-in defaults, then an optional JSON
//! configuration file (`--config`), then individual command-line flags.
//! Output lands in `--out`, the `TETRAFOLD_OUT` environment variable, or
//! the working directory, in that order of preference.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 runtime
//! failure, 4 no self-avoiding conformation found.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::assemble::{assemble, fused_csv, AssembleConfig, Weighting};
use crate::data::FragmentManifest;
use crate::decode::{brute_force, SelectionPolicy, ORACLE_QUBIT_CAP};
use crate::error::{Error, Result};
use crate::evalio::{kabsch_rmsd, load_pdb_ca, write_pdb, write_report};
use crate::hamiltonian::{
    build_total, BuildRecord, HamiltonianWeights, InteractionMatrix, MaskSet, Sequence,
};
use crate::qsim::{Entanglement, ReadoutNoise};
use crate::vqe::{
    run_pipeline, InitStrategy, OptimizerKind, OracleMode, VqeConfig, ORACLE_AUTO_QUBITS,
};

#[derive(Parser)]
#[command(
    name = "tetrafold",
    version,
    about = "Fold peptide chains on the tetrahedral lattice by variational quantum simulation"
)]
struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory (default: $TETRAFOLD_OUT, then the working directory).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the energy operator and write it with its summary.
    Build(BuildArgs),
    /// Run the full variational folding pipeline.
    Predict(PredictArgs),
    /// Sweep every basis state of the diagonal exactly.
    Oracle(OracleArgs),
    /// Fold a long chain by overlapping windows and stitch the results.
    Assemble(AssembleArgs),
    /// Superpose two CA traces and report the deviation.
    Rmsd(RmsdArgs),
}

#[derive(Args, Default)]
struct WeightArgs {
    /// Chirality component weight.
    #[arg(long)]
    lambda_c: Option<f64>,
    /// Geometric component weight.
    #[arg(long)]
    lambda_g: Option<f64>,
    /// Steric component weight.
    #[arg(long)]
    lambda_d: Option<f64>,
    /// Interaction component weight.
    #[arg(long)]
    lambda_i: Option<f64>,
    /// One-hot penalty per turn.
    #[arg(long)]
    mu_oh: Option<f64>,
    /// Angle penalty on disallowed consecutive pairs.
    #[arg(long)]
    mu_ang: Option<f64>,
    /// Backtracking penalty on forbidden consecutive pairs.
    #[arg(long)]
    kappa_bt: Option<f64>,
    /// Penalty on forbidden consecutive triples.
    #[arg(long)]
    kappa_chi: Option<f64>,
    /// Collision penalty scale.
    #[arg(long)]
    eta: Option<f64>,
}

impl WeightArgs {
    fn apply(&self, w: &mut HamiltonianWeights) {
        let fields = [
            (&self.lambda_c, &mut w.lambda_c),
            (&self.lambda_g, &mut w.lambda_g),
            (&self.lambda_d, &mut w.lambda_d),
            (&self.lambda_i, &mut w.lambda_i),
            (&self.mu_oh, &mut w.mu_oh),
            (&self.mu_ang, &mut w.mu_ang),
            (&self.kappa_bt, &mut w.kappa_bt),
            (&self.kappa_chi, &mut w.kappa_chi),
            (&self.eta, &mut w.eta),
        ];
        for (src, dst) in fields {
            if let Some(v) = src {
                *dst = *v;
            }
        }
    }
}

#[derive(Args, Default)]
struct MaskArgs {
    /// Add heuristic contact terms at this weight (turn separations 3 to 5).
    #[arg(long, value_name = "WEIGHT")]
    heuristic_contacts: Option<f64>,
    /// Drop the symmetry-breaking pins on the first two turns.
    #[arg(long)]
    no_pins: bool,
    /// Load the residue-pair interaction matrix from a CSV file instead of
    /// the embedded table.
    #[arg(long, value_name = "FILE")]
    interaction_matrix: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizerArg {
    Cobyla,
    NelderMead,
}

#[derive(Clone, Copy, ValueEnum)]
enum EntanglementArg {
    Linear,
    Circular,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Zeros,
    SmallRandom,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleModeArg {
    Auto,
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    ValidFirst,
    TopOnly,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightingArg {
    Uniform,
    Triangular,
}

#[derive(Args, Default)]
struct VqeArgs {
    /// Root seed of every random stream in the run.
    #[arg(long)]
    seed: Option<u64>,
    /// Entangling blocks in the ansatz.
    #[arg(long)]
    reps: Option<usize>,
    /// Entangler topology.
    #[arg(long, value_enum)]
    entanglement: Option<EntanglementArg>,
    /// Optimization backend.
    #[arg(long, value_enum)]
    optimizer: Option<OptimizerArg>,
    /// Initial-parameter strategy.
    #[arg(long, value_enum)]
    init: Option<InitArg>,
    /// Objective evaluation budget per restart.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Independent optimization restarts.
    #[arg(long)]
    restarts: Option<usize>,
    /// Shots per objective evaluation; 0 evaluates exactly.
    #[arg(long)]
    shots_opt: Option<u64>,
    /// Shots of the final measurement stage.
    #[arg(long)]
    shots_measure: Option<u64>,
    /// Convergence tolerance on the objective.
    #[arg(long)]
    tol: Option<f64>,
    /// Initial trust-region size of the optimizer.
    #[arg(long)]
    rho_beg: Option<f64>,
    /// Step resolution at which the optimizer stops refining.
    #[arg(long)]
    rho_end: Option<f64>,
    /// Widest operator a single run may simulate.
    #[arg(long)]
    qubit_cap: Option<usize>,
    /// Probability of reading 1 when the true bit is 0.
    #[arg(long)]
    noise_p01: Option<f64>,
    /// Probability of reading 0 when the true bit is 1.
    #[arg(long)]
    noise_p10: Option<f64>,
    /// Invert the readout confusion model on measured histograms.
    #[arg(long)]
    mitigate: bool,
    /// When to cross-check against the exhaustive oracle.
    #[arg(long, value_enum)]
    oracle_mode: Option<OracleModeArg>,
}

impl VqeArgs {
    fn apply(&self, cfg: &mut VqeConfig) {
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.reps {
            cfg.reps = v;
        }
        if let Some(v) = self.entanglement {
            cfg.entanglement = match v {
                EntanglementArg::Linear => Entanglement::Linear,
                EntanglementArg::Circular => Entanglement::Circular,
            };
        }
        if let Some(v) = self.optimizer {
            cfg.optimizer = match v {
                OptimizerArg::Cobyla => OptimizerKind::Cobyla,
                OptimizerArg::NelderMead => OptimizerKind::NelderMead,
            };
        }
        if let Some(v) = self.init {
            cfg.init = match v {
                InitArg::Zeros => InitStrategy::Zeros,
                InitArg::SmallRandom => InitStrategy::SmallRandom,
            };
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.restarts {
            cfg.restarts = v;
        }
        if let Some(v) = self.shots_opt {
            cfg.shots_opt = v;
        }
        if let Some(v) = self.shots_measure {
            cfg.shots_measure = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.rho_beg {
            cfg.rho_beg = v;
        }
        if let Some(v) = self.rho_end {
            cfg.rho_end = v;
        }
        if let Some(v) = self.qubit_cap {
            cfg.qubit_cap = v;
        }
        if self.noise_p01.is_some() || self.noise_p10.is_some() {
            cfg.noise = Some(ReadoutNoise {
                p01: self.noise_p01.unwrap_or(0.0),
                p10: self.noise_p10.unwrap_or(0.0),
            });
        }
        if self.mitigate {
            cfg.mitigate = true;
        }
        if let Some(v) = self.oracle_mode {
            cfg.oracle = match v {
                OracleModeArg::Auto => OracleMode::Auto,
                OracleModeArg::On => OracleMode::On,
                OracleModeArg::Off => OracleMode::Off,
            };
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    /// One-letter amino-acid sequence.
    #[arg(long)]
    sequence: String,
    #[command(flatten)]
    weights: WeightArgs,
    #[command(flatten)]
    masks: MaskArgs,
}

#[derive(Args)]
struct PredictArgs {
    /// One-letter amino-acid sequence.
    #[arg(long)]
    sequence: String,
    #[command(flatten)]
    weights: WeightArgs,
    #[command(flatten)]
    masks: MaskArgs,
    #[command(flatten)]
    vqe: VqeArgs,
    /// How the conformation is selected from measurements.
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
}

#[derive(Args)]
struct OracleArgs {
    /// One-letter amino-acid sequence.
    #[arg(long)]
    sequence: String,
    #[command(flatten)]
    weights: WeightArgs,
    #[command(flatten)]
    masks: MaskArgs,
    /// Restrict the sweep to self-avoiding decodings.
    #[arg(long)]
    valid_only: bool,
}

#[derive(Args)]
struct AssembleArgs {
    /// One-letter amino-acid sequence.
    #[arg(long)]
    sequence: String,
    #[command(flatten)]
    weights: WeightArgs,
    #[command(flatten)]
    masks: MaskArgs,
    #[command(flatten)]
    vqe: VqeArgs,
    /// Residues per window.
    #[arg(long)]
    window: Option<usize>,
    /// Residues between window starts.
    #[arg(long)]
    stride: Option<usize>,
    /// Fusion weighting of window contributions.
    #[arg(long, value_enum)]
    weighting: Option<WeightingArg>,
    /// How each window's conformation is selected.
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
}

#[derive(Args)]
struct RmsdArgs {
    /// Predicted structure (PDB, CA trace).
    #[arg(long)]
    predicted: PathBuf,
    /// Reference structure (PDB, CA trace).
    #[arg(long)]
    reference: PathBuf,
}

/// Optional JSON configuration file. Every section is optional; flags
/// override whatever the file sets.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    weights: Option<HamiltonianWeights>,
    vqe: Option<VqeConfig>,
    assemble: Option<AssembleConfig>,
    policy: Option<SelectionPolicy>,
    heuristic_contacts: Option<f64>,
    pins: Option<bool>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("config file {}: {e}", path.display())))
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidResidue { .. }
        | Error::SequenceTooShort { .. }
        | Error::QubitCap { .. }
        | Error::MaskWidth { .. }
        | Error::SingularConfusion { .. }
        | Error::Parse { .. }
        | Error::Config(_) => 2,
        Error::NoValidConformation { .. } => 4,
        _ => 3,
    }
}

fn out_dir(cli_out: Option<PathBuf>) -> Result<PathBuf> {
    let dir = cli_out
        .or_else(|| std::env::var_os("TETRAFOLD_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn effective_weights(file: &FileConfig, args: &WeightArgs) -> HamiltonianWeights {
    let mut w = file.weights.clone().unwrap_or_default();
    args.apply(&mut w);
    w
}

fn effective_masks(l: usize, file: &FileConfig, args: &MaskArgs) -> MaskSet {
    let mut m = MaskSet::defaults(l);
    m.pin_first_turns = file.pins.unwrap_or(true) && !args.no_pins;
    let heuristic = args.heuristic_contacts.or(file.heuristic_contacts);
    if let Some(w) = heuristic {
        m = m.with_heuristic_contacts(l, w);
    }
    m
}

fn effective_matrix(args: &MaskArgs) -> Result<InteractionMatrix> {
    match &args.interaction_matrix {
        Some(path) => {
            let m = InteractionMatrix::load(path)?;
            for warning in m.warnings() {
                eprintln!("warning: {warning}");
            }
            Ok(m)
        }
        None => Ok(crate::data::mj_matrix().clone()),
    }
}

fn effective_policy(file: &FileConfig, arg: Option<PolicyArg>) -> SelectionPolicy {
    match arg {
        Some(PolicyArg::ValidFirst) => SelectionPolicy::ValidFirst,
        Some(PolicyArg::TopOnly) => SelectionPolicy::TopOnly,
        None => file.policy.unwrap_or_default(),
    }
}

fn print_reference_divergence(seq: &Sequence, own_qubits: usize) {
    for entry in FragmentManifest::embedded().find_sequence(seq.text()) {
        if let Some(reported) = entry.reported_qubits {
            if reported as usize != own_qubits {
                println!(
                    "note: {} quotes {} qubits for this fragment; this encoding uses {}",
                    entry.pdb_id, reported, own_qubits
                );
            }
        }
    }
}

fn cmd_build(file: &FileConfig, out: &Path, args: &BuildArgs) -> Result<()> {
    let seq = Sequence::parse(&args.sequence)?;
    let weights = effective_weights(file, &args.weights);
    let masks = effective_masks(seq.len(), file, &args.masks);
    let j = effective_matrix(&args.masks)?;
    let h = build_total(&seq, &weights, &masks, &j)?;

    let reference = FragmentManifest::embedded()
        .find_sequence(seq.text())
        .first()
        .and_then(|e| e.reported_qubits);
    let mut record = BuildRecord::new(&seq, &h, &weights, reference);
    if h.n_qubits() <= ORACLE_AUTO_QUBITS {
        let rep = brute_force(&h, false)?;
        record.diagonal_min = Some(rep.min_energy);
        record.diagonal_max = Some(rep.max_energy);
    }
    print_reference_divergence(&seq, h.n_qubits());

    let json_path = out.join("build.json");
    let text_path = out.join("hamiltonian.txt");
    write_report(&json_path, &record)?;
    std::fs::write(&text_path, h.to_text())?;
    println!(
        "built {} terms on {} qubits (locality {}) for {} residues",
        h.term_count(),
        h.n_qubits(),
        h.max_locality(),
        seq.len()
    );
    if let (Some(lo), Some(hi)) = (record.diagonal_min, record.diagonal_max) {
        println!("diagonal range: [{lo}, {hi}]");
    }
    println!("wrote {} and {}", json_path.display(), text_path.display());
    Ok(())
}

fn cmd_predict(file: &FileConfig, out: &Path, args: &PredictArgs) -> Result<()> {
    let seq = Sequence::parse(&args.sequence)?;
    let weights = effective_weights(file, &args.weights);
    let masks = effective_masks(seq.len(), file, &args.masks);
    let j = effective_matrix(&args.masks)?;
    let mut cfg = file.vqe.clone().unwrap_or_default();
    args.vqe.apply(&mut cfg);
    let policy = effective_policy(file, args.policy);

    let result = run_pipeline(&seq, &weights, &masks, &j, &cfg, policy)?;
    let rec = &result.record;

    let run_path = out.join("run.json");
    write_report(&run_path, rec)?;
    std::fs::write(out.join("trace.csv"), result.trace.to_csv())?;
    std::fs::write(out.join("histogram.csv"), rec.histogram.to_csv())?;
    if let Some(quasi) = &rec.mitigated {
        std::fs::write(out.join("mitigated.csv"), quasi.to_csv())?;
    }
    write_pdb(&out.join("structure.pdb"), &seq, &rec.coordinates)?;

    println!(
        "optimized energy {:.6} (restart {} of {})",
        rec.best_energy,
        rec.best_restart,
        cfg.restarts
    );
    println!("measured energy {:.6} from {} shots", rec.measured_energy, cfg.shots_measure);
    println!(
        "selected {} at rank {} ({} turn(s), self-avoiding: {})",
        rec.selection.bitstring,
        rec.selection.rank,
        rec.selection.turns.len(),
        rec.selection.self_avoiding
    );
    if let Some(gap) = rec.optimality_gap {
        let qualifier = if cfg.shots_opt > 0 { " (sampled estimate)" } else { "" };
        println!("optimality gap against the exhaustive oracle: {gap:.6}{qualifier}");
    }
    println!(
        "classical rescoring: {} contact(s), energy {:.4}",
        rec.classical.contact_pairs.len(),
        rec.classical.total
    );
    println!("wrote run.json, trace.csv, histogram.csv, structure.pdb in {}", out.display());
    Ok(())
}

fn cmd_oracle(file: &FileConfig, out: &Path, args: &OracleArgs) -> Result<()> {
    let seq = Sequence::parse(&args.sequence)?;
    let weights = effective_weights(file, &args.weights);
    let masks = effective_masks(seq.len(), file, &args.masks);
    let j = effective_matrix(&args.masks)?;
    let h = build_total(&seq, &weights, &masks, &j)?;
    if h.n_qubits() > ORACLE_QUBIT_CAP {
        return Err(Error::QubitCap {
            needed: h.n_qubits(),
            cap: ORACLE_QUBIT_CAP,
        });
    }
    let rep = brute_force(&h, args.valid_only)?;
    let path = out.join("oracle.json");
    write_report(&path, &rep)?;
    println!(
        "swept {} state(s): min {} at {} state(s), max {}",
        rep.n_evaluated, rep.min_energy, rep.argmin_count, rep.max_energy
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_assemble(file: &FileConfig, out: &Path, args: &AssembleArgs) -> Result<()> {
    let seq = Sequence::parse(&args.sequence)?;
    let weights = effective_weights(file, &args.weights);
    let j = effective_matrix(&args.masks)?;
    let mut cfg = file.assemble.clone().unwrap_or_default();
    if let Some(v) = args.window {
        cfg.window = v;
    }
    if let Some(v) = args.stride {
        cfg.stride = v;
    }
    if let Some(v) = args.weighting {
        cfg.weighting = match v {
            WeightingArg::Uniform => Weighting::Uniform,
            WeightingArg::Triangular => Weighting::Triangular,
        };
    }
    if let Some(w) = args.masks.heuristic_contacts.or(file.heuristic_contacts) {
        cfg.heuristic_contact_weight = Some(w);
    }
    if args.masks.no_pins {
        return Err(Error::Config(
            "assembly relies on pinned windows; --no-pins is not supported here".into(),
        ));
    }
    args.vqe.apply(&mut cfg.vqe);
    if let Some(p) = args.policy {
        cfg.policy = match p {
            PolicyArg::ValidFirst => SelectionPolicy::ValidFirst,
            PolicyArg::TopOnly => SelectionPolicy::TopOnly,
        };
    } else if let Some(p) = file.policy {
        cfg.policy = p;
    }

    let rec = assemble(&seq, &weights, &j, &cfg)?;
    let path = out.join("assembly.json");
    write_report(&path, &rec)?;
    std::fs::write(out.join("fused.csv"), fused_csv(&rec.fused))?;
    write_pdb(&out.join("structure.pdb"), &seq, &rec.coordinates)?;
    println!(
        "assembled {} residue(s) from {} window(s) ({} repaired turn(s))",
        rec.length,
        rec.windows.len(),
        rec.repaired_turns.len()
    );
    println!(
        "classical rescoring: {} contact(s), energy {:.4}",
        rec.classical.contact_pairs.len(),
        rec.classical.total
    );
    println!("wrote assembly.json, fused.csv, structure.pdb in {}", out.display());
    Ok(())
}

fn cmd_rmsd(out: &Path, args: &RmsdArgs) -> Result<()> {
    let predicted = load_pdb_ca(&args.predicted)?;
    let reference = load_pdb_ca(&args.reference)?;
    let rep = kabsch_rmsd(&predicted, &reference)?;
    let path = out.join("rmsd.json");
    write_report(&path, &rep)?;
    println!("rmsd {:.4} over {} point(s)", rep.rmsd, rep.n_points);
    if rep.degenerate {
        println!("note: the optimal superposition is not unique for these points");
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let out = out_dir(cli.out)?;
    match &cli.command {
        Command::Build(args) => cmd_build(&file, &out, args),
        Command::Predict(args) => cmd_predict(&file, &out, args),
        Command::Oracle(args) => cmd_oracle(&file, &out, args),
        Command::Assemble(args) => cmd_assemble(&file, &out, args),
        Command::Rmsd(args) => cmd_rmsd(&out, args),
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
