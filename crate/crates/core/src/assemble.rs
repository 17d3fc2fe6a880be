//! Sliding-window assembly for chains too wide to fold in one run.
//!
//! The chain is cut into overlapping windows, each window is folded
//! independently with a reduced budget, and the per-window turn solutions
//! are stitched back together:
//!
//! 1. each window's directions are mapped into the global frame using the
//!    global turn parity;
//! 2. windows after the first are rotated by the best of the 12 proper
//!    rotations of the direction set (even permutations of the four
//!    indices), maximizing agreement with the running mean on shared turns;
//! 3. per-turn unit vectors are fused into a weighted mean with a scalar
//!    variance and coverage count;
//! 4. means snap back to the nearest lattice direction, with up to three
//!    repair passes if the snapped walk self-intersects.
//!
//! A plan with a single window skips all of this and delegates to the
//! ordinary pipeline with the same seed, so its output matches a direct
//! run exactly.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::decode::{classical_energy, Backbone, ClassicalScore, SelectionPolicy};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    n_qubits_for, HamiltonianWeights, InteractionMatrix, MaskSet, Sequence,
};
use crate::lattice::{direction_vector, is_self_avoiding, walk, Direction, TurnSequence};
use crate::vqe::{run_pipeline, stage_seed, RunRecord, Timing, VqeConfig};

/// The 12 even permutations of the direction indices, identity first,
/// lexicographically ordered. These are exactly the proper rotations of the
/// tetrahedral direction set.
pub const A4_PERMUTATIONS: [[u8; 4]; 12] = [
    [0, 1, 2, 3],
    [0, 2, 3, 1],
    [0, 3, 1, 2],
    [1, 0, 3, 2],
    [1, 2, 0, 3],
    [1, 3, 2, 0],
    [2, 0, 1, 3],
    [2, 1, 3, 0],
    [2, 3, 0, 1],
    [3, 0, 2, 1],
    [3, 1, 0, 2],
    [3, 2, 1, 0],
];

/// How window contributions are weighted during fusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Uniform,
    /// Turns near a window's center count more than its edges.
    Triangular,
}

/// One planned window over the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    /// First residue covered.
    pub start: usize,
    /// Residues covered.
    pub len: usize,
}

impl Window {
    /// Global indices of the turns this window covers.
    pub fn turns(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len - 1
    }
}

/// Cut an `l`-residue chain into windows of `window` residues every
/// `stride`, clipping the final window so the chain end is covered.
pub fn plan_windows(l: usize, window: usize, stride: usize) -> Result<Vec<Window>> {
    if l < 2 {
        return Err(Error::SequenceTooShort { len: l });
    }
    if window < 2 {
        return Err(Error::Config(format!(
            "window must cover at least 2 residues, got {window}"
        )));
    }
    if stride == 0 {
        return Err(Error::Config("stride must be positive".into()));
    }
    if window >= l {
        return Ok(vec![Window { start: 0, len: l }]);
    }
    let mut windows = Vec::new();
    let last_start = l - window;
    let mut start = 0;
    while start < last_start {
        windows.push(Window { start, len: window });
        start += stride;
    }
    windows.push(Window {
        start: last_start,
        len: window,
    });
    let overlap = window as isize - 1 - stride as isize;
    if windows.len() > 1 && overlap < 1 {
        return Err(Error::Config(format!(
            "windows of {window} residues at stride {stride} share no turns; \
             shrink the stride below {}",
            window - 1
        )));
    }
    Ok(windows)
}

/// Assembly settings; the embedded run configuration applies per window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssembleConfig {
    pub window: usize,
    pub stride: usize,
    pub weighting: Weighting,
    /// Weight of heuristic contact terms inside each window, if any.
    pub heuristic_contact_weight: Option<f64>,
    pub vqe: VqeConfig,
    pub policy: SelectionPolicy,
}

impl Default for AssembleConfig {
    fn default() -> Self {
        AssembleConfig {
            window: 7,
            stride: 1,
            weighting: Weighting::Uniform,
            heuristic_contact_weight: None,
            vqe: VqeConfig::window_preset(),
            policy: SelectionPolicy::ValidFirst,
        }
    }
}

/// Summary of one folded window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub index: usize,
    pub start: usize,
    pub len: usize,
    pub seed: u64,
    /// The rotation applied during alignment.
    pub permutation: [u8; 4],
    pub best_energy: f64,
    pub bitstring: String,
    pub selection_weight: f64,
}

/// Fused direction statistics of one global turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedTurn {
    pub turn: usize,
    pub mean: [f64; 3],
    /// Weighted mean squared deviation of contributions from the mean.
    pub variance: f64,
    /// Number of windows covering the turn.
    pub count: usize,
}

/// Render fused turns as CSV.
pub fn fused_csv(fused: &[FusedTurn]) -> String {
    let mut out = String::from("turn,mean_x,mean_y,mean_z,variance,count\n");
    for f in fused {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            f.turn, f.mean[0], f.mean[1], f.mean[2], f.variance, f.count
        ));
    }
    out
}

/// Everything a finished assembly reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssemblyRecord {
    pub schema_version: u32,
    pub sequence: String,
    pub length: usize,
    /// Qubits a direct single-run encoding would need.
    pub full_qubits: usize,
    pub window: usize,
    pub stride: usize,
    pub weighting: Weighting,
    pub windows: Vec<WindowReport>,
    pub fused: Vec<FusedTurn>,
    pub turns: Vec<u8>,
    /// Turns re-snapped during repair, in repair order.
    pub repaired_turns: Vec<usize>,
    pub coordinates: Vec<[f64; 3]>,
    pub classical: ClassicalScore,
    pub single_window: bool,
    /// The direct run record when the plan had a single window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<Box<RunRecord>>,
    pub timing: Timing,
}

const SQRT3: f64 = 1.732_050_807_568_877_2;

fn unit_dir(d: u8, parity: usize) -> [f64; 3] {
    let v = direction_vector(Direction::new(d).expect("direction in range"), (parity % 2) as u8);
    [
        v[0] as f64 / SQRT3,
        v[1] as f64 / SQRT3,
        v[2] as f64 / SQRT3,
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn window_weight(t_local: usize, n_turns: usize, weighting: Weighting) -> f64 {
    match weighting {
        Weighting::Uniform => 1.0,
        Weighting::Triangular => (t_local + 1).min(n_turns - t_local) as f64,
    }
}

/// Snap fused means to lattice directions, repairing up to three turns if
/// the snapped walk self-intersects. `fallback` supplies the direction of
/// a turn whose mean carries no signal.
pub fn finalize_turns(
    means: &[[f64; 3]],
    fallback: &[u8],
) -> Result<(TurnSequence, Vec<usize>)> {
    if means.is_empty() || means.len() != fallback.len() {
        return Err(Error::Dimension(format!(
            "{} means but {} fallback directions",
            means.len(),
            fallback.len()
        )));
    }
    let n_turns = means.len();
    // directions ranked best-first per turn, with the dot value of each
    let mut ranked: Vec<Vec<(u8, f64)>> = Vec::with_capacity(n_turns);
    for (g, mean) in means.iter().enumerate() {
        let norm = dot(*mean, *mean).sqrt();
        if norm < 1e-9 {
            // no signal: fall back to the strongest window's choice, then
            // the remaining directions by index
            let fb = fallback[g];
            let mut order = vec![(fb, 0.0)];
            for d in 0..4u8 {
                if d != fb {
                    order.push((d, 0.0));
                }
            }
            ranked.push(order);
        } else {
            let mut order: Vec<(u8, f64)> = (0..4u8)
                .map(|d| (d, dot(*mean, unit_dir(d, g % 2))))
                .collect();
            order.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            ranked.push(order);
        }
    }
    let mut rank_pos = vec![0usize; n_turns];
    let mut choice: Vec<u8> = ranked.iter().map(|r| r[0].0).collect();
    let mut repaired = Vec::new();
    for pass in 0..=3 {
        let dirs: Vec<Direction> = choice
            .iter()
            .map(|&d| Direction::new(d).expect("direction in range"))
            .collect();
        let points = walk(&dirs);
        if is_self_avoiding(&points) {
            return Ok((TurnSequence::new(dirs)?, repaired));
        }
        if pass == 3 {
            break;
        }
        // first colliding residue pair, lexicographically
        let mut collision = None;
        'outer: for i in 0..points.len() {
            for k in (i + 1)..points.len() {
                if points[i] == points[k] {
                    collision = Some((i, k));
                    break 'outer;
                }
            }
        }
        let (ci, cj) = collision.expect("walk is not self-avoiding");
        // re-snap the least confident turn between the colliding residues
        let margin = |t: usize| -> f64 {
            let r = &ranked[t];
            let p = rank_pos[t];
            if p + 1 < r.len() {
                r[p].1 - r[p + 1].1
            } else {
                f64::INFINITY
            }
        };
        let candidates: Vec<usize> = (ci..cj).filter(|&t| rank_pos[t] < 3).collect();
        let pool: Vec<usize> = if candidates.is_empty() {
            (0..n_turns).filter(|&t| rank_pos[t] < 3).collect()
        } else {
            candidates
        };
        let worst = pool.into_iter().min_by(|&a, &b| {
            margin(a)
                .partial_cmp(&margin(b))
                .unwrap()
                .then(a.cmp(&b))
        });
        match worst {
            Some(t) => {
                rank_pos[t] += 1;
                choice[t] = ranked[t][rank_pos[t]].0;
                repaired.push(t);
            }
            None => break,
        }
    }
    Err(Error::Assembly(format!(
        "snapped walk still self-intersects after {} repairs",
        repaired.len()
    )))
}

fn window_masks(len: usize, cfg: &AssembleConfig) -> MaskSet {
    let m = MaskSet::defaults(len);
    match cfg.heuristic_contact_weight {
        Some(w) => m.with_heuristic_contacts(len, w),
        None => m,
    }
}

/// Fold a chain of any supported length by windowed runs and stitching.
pub fn assemble(
    seq: &Sequence,
    weights: &HamiltonianWeights,
    j: &InteractionMatrix,
    cfg: &AssembleConfig,
) -> Result<AssemblyRecord> {
    cfg.vqe.validate()?;
    let started = Instant::now();
    let l = seq.len();
    let windows = plan_windows(l, cfg.window, cfg.stride)?;

    if windows.len() == 1 {
        // same seed, same configuration: identical to a direct run
        let masks = window_masks(l, cfg);
        let out = run_pipeline(seq, weights, &masks, j, &cfg.vqe, cfg.policy)?;
        let rec = out.record;
        let turns: Vec<u8> = rec.selection.turns.iter().map(|d| d.index()).collect();
        let fused: Vec<FusedTurn> = turns
            .iter()
            .enumerate()
            .map(|(g, &d)| FusedTurn {
                turn: g,
                mean: unit_dir(d, g % 2),
                variance: 0.0,
                count: 1,
            })
            .collect();
        let report = WindowReport {
            index: 0,
            start: 0,
            len: l,
            seed: cfg.vqe.seed,
            permutation: A4_PERMUTATIONS[0],
            best_energy: rec.best_energy,
            bitstring: rec.selection.bitstring.clone(),
            selection_weight: rec.selection.weight,
        };
        return Ok(AssemblyRecord {
            schema_version: 1,
            sequence: seq.text().to_string(),
            length: l,
            full_qubits: n_qubits_for(l),
            window: cfg.window,
            stride: cfg.stride,
            weighting: cfg.weighting,
            windows: vec![report],
            fused,
            turns,
            repaired_turns: Vec::new(),
            coordinates: rec.coordinates.clone(),
            classical: rec.classical.clone(),
            single_window: true,
            run: Some(Box::new(rec)),
            timing: Timing {
                seconds: started.elapsed().as_secs_f64(),
            },
        });
    }

    let n_turns = l - 1;
    let mut acc = vec![[0.0f64; 3]; n_turns];
    let mut wsum = vec![0.0f64; n_turns];
    // (unit vector, fusion weight) per contribution
    let mut contributions: Vec<Vec<([f64; 3], f64)>> = vec![Vec::new(); n_turns];
    // strongest covering window's (selection weight, window index, direction)
    let mut strongest: Vec<(f64, usize, u8)> = vec![(f64::NEG_INFINITY, usize::MAX, 0); n_turns];
    let mut reports = Vec::with_capacity(windows.len());

    for (i, win) in windows.iter().enumerate() {
        let sub = seq.slice(win.start, win.start + win.len)?;
        let masks = window_masks(win.len, cfg);
        let mut vcfg = cfg.vqe.clone();
        vcfg.seed = stage_seed(cfg.vqe.seed, &format!("assemble/window/{i}"));
        let out = run_pipeline(&sub, weights, &masks, j, &vcfg, cfg.policy)
            .map_err(|e| match e {
                Error::NoValidConformation { tried, top } => Error::Assembly(format!(
                    "window {i} (residues {}..{}) produced no self-avoiding outcome \
                     in {tried} candidates (top: {top:?})",
                    win.start,
                    win.start + win.len
                )),
                other => other,
            })?;
        let sel = &out.record.selection;
        let local_dirs: Vec<u8> = sel.turns.iter().map(|d| d.index()).collect();
        let w_turns = local_dirs.len();

        // pick the rotation agreeing best with already-fused turns
        let mut best_sigma = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        let mut any_overlap = false;
        for (sidx, sigma) in A4_PERMUTATIONS.iter().enumerate() {
            let mut score = 0.0;
            for (tl, &d) in local_dirs.iter().enumerate() {
                let g = win.start + tl;
                if wsum[g] > 0.0 {
                    any_overlap = true;
                    let mean = [
                        acc[g][0] / wsum[g],
                        acc[g][1] / wsum[g],
                        acc[g][2] / wsum[g],
                    ];
                    score += dot(mean, unit_dir(sigma[d as usize], g % 2));
                }
            }
            if score > best_score {
                best_score = score;
                best_sigma = sidx;
            }
        }
        if !any_overlap {
            best_sigma = 0;
        }
        let sigma = A4_PERMUTATIONS[best_sigma];

        for (tl, &d) in local_dirs.iter().enumerate() {
            let g = win.start + tl;
            let rotated = sigma[d as usize];
            let v = unit_dir(rotated, g % 2);
            let wt = window_weight(tl, w_turns, cfg.weighting);
            for k in 0..3 {
                acc[g][k] += wt * v[k];
            }
            wsum[g] += wt;
            contributions[g].push((v, wt));
            if sel.weight > strongest[g].0 {
                strongest[g] = (sel.weight, i, rotated);
            }
        }
        reports.push(WindowReport {
            index: i,
            start: win.start,
            len: win.len,
            seed: vcfg.seed,
            permutation: sigma,
            best_energy: out.record.best_energy,
            bitstring: sel.bitstring.clone(),
            selection_weight: sel.weight,
        });
    }

    let mut fused = Vec::with_capacity(n_turns);
    let mut means = Vec::with_capacity(n_turns);
    for g in 0..n_turns {
        let mean = [acc[g][0] / wsum[g], acc[g][1] / wsum[g], acc[g][2] / wsum[g]];
        let mut var = 0.0;
        for &(v, wt) in &contributions[g] {
            let d = [v[0] - mean[0], v[1] - mean[1], v[2] - mean[2]];
            var += wt * dot(d, d);
        }
        var /= wsum[g];
        fused.push(FusedTurn {
            turn: g,
            mean,
            variance: var,
            count: contributions[g].len(),
        });
        means.push(mean);
    }

    let fallback: Vec<u8> = strongest.iter().map(|&(_, _, d)| d).collect();
    let (turn_seq, repaired_turns) = finalize_turns(&means, &fallback)?;
    let backbone = Backbone::from_turns(turn_seq.clone());
    let classical = classical_energy(&backbone, seq, j, weights.lambda_d * weights.eta)?;

    Ok(AssemblyRecord {
        schema_version: 1,
        sequence: seq.text().to_string(),
        length: l,
        full_qubits: n_qubits_for(l),
        window: cfg.window,
        stride: cfg.stride,
        weighting: cfg.weighting,
        windows: reports,
        fused,
        turns: turn_seq.iter().map(|d| d.index()).collect(),
        repaired_turns,
        coordinates: backbone.coords(),
        classical,
        single_window: false,
        run: None,
        timing: Timing {
            seconds: started.elapsed().as_secs_f64(),
        },
    })
}
