//! Structure comparison and file output: optimal-superposition RMSD,
//! CA-trace PDB writing and reading, and report serialization.
//!
//! RMSD uses the standard SVD-based superposition restricted to proper
//! rotations, so mirror images of a chiral chain keep a nonzero deviation.
//! PDB output is a fixed-column CA trace (one ATOM record per residue,
//! chain A, terminated by END) that round-trips through `read_pdb_ca`.

use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{residue_index, Sequence};

/// Three-letter residue names, aligned with `hamiltonian::ALPHABET`.
const THREE_LETTER: [&str; 20] = [
    "ALA", "CYS", "ASP", "GLU", "PHE", "GLY", "HIS", "ILE", "LYS", "LEU", "MET", "ASN", "PRO",
    "GLN", "ARG", "SER", "THR", "VAL", "TRP", "TYR",
];

/// Result of superposing two point sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsdReport {
    pub n_points: usize,
    pub rmsd: f64,
    /// Proper rotation taking centered `a` onto centered `b`, row-major.
    pub rotation: [[f64; 3]; 3],
    pub centroid_a: [f64; 3],
    pub centroid_b: [f64; 3],
    /// True when the optimal rotation is not unique (collinear points, or a
    /// planar set best matched by a reflection).
    pub degenerate: bool,
}

fn centroid(points: &[[f64; 3]]) -> [f64; 3] {
    let n = points.len() as f64;
    let mut c = [0.0; 3];
    for p in points {
        for k in 0..3 {
            c[k] += p[k] / n;
        }
    }
    c
}

/// Minimal RMSD between two equal-length point sets over all proper
/// rotations and translations.
pub fn kabsch_rmsd(a: &[[f64; 3]], b: &[[f64; 3]]) -> Result<RmsdReport> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::Dimension("cannot superpose empty point sets".into()));
    }
    let ca = centroid(a);
    let cb = centroid(b);
    let n = a.len();
    if n == 1 {
        return Ok(RmsdReport {
            n_points: 1,
            rmsd: 0.0,
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            centroid_a: ca,
            centroid_b: cb,
            degenerate: true,
        });
    }

    let mut h = Matrix3::<f64>::zeros();
    for (pa, pb) in a.iter().zip(b) {
        let va = Vector3::new(pa[0] - ca[0], pa[1] - ca[1], pa[2] - ca[2]);
        let vb = Vector3::new(pb[0] - cb[0], pb[1] - cb[1], pb[2] - cb[2]);
        h += va * vb.transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Dimension("SVD failed to produce U".into()))?;
    let v = svd
        .v_t
        .ok_or_else(|| Error::Dimension("SVD failed to produce V^T".into()))?
        .transpose();
    let d = (v * u.transpose()).determinant();
    let sign = if d < 0.0 { -1.0 } else { 1.0 };
    let mut s = Matrix3::<f64>::identity();
    s[(2, 2)] = sign;
    let r = v * s * u.transpose();

    let sv = svd.singular_values;
    let scale = sv[0].max(f64::MIN_POSITIVE);
    let degenerate = sv[1] <= 1e-9 * scale || (sv[2] <= 1e-9 * scale && sign < 0.0);

    let mut sq = 0.0;
    for (pa, pb) in a.iter().zip(b) {
        let va = Vector3::new(pa[0] - ca[0], pa[1] - ca[1], pa[2] - ca[2]);
        let vb = Vector3::new(pb[0] - cb[0], pb[1] - cb[1], pb[2] - cb[2]);
        let diff = r * va - vb;
        sq += diff.norm_squared();
    }
    let rmsd = (sq / n as f64).sqrt();
    let mut rotation = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            rotation[i][k] = r[(i, k)];
        }
    }
    Ok(RmsdReport {
        n_points: n,
        rmsd,
        rotation,
        centroid_a: ca,
        centroid_b: cb,
        degenerate,
    })
}

/// Render a CA trace in fixed-column PDB format.
pub fn pdb_text(seq: &Sequence, coords: &[[f64; 3]]) -> Result<String> {
    if coords.len() != seq.len() {
        return Err(Error::LengthMismatch {
            a: coords.len(),
            b: seq.len(),
        });
    }
    let mut out = String::new();
    for (i, c) in coords.iter().enumerate() {
        let res = THREE_LETTER[residue_index(seq.residue(i)).expect("validated residue")];
        out.push_str(&format!(
            "ATOM  {:>5}  CA  {:>3} A{:>4}    {:>8.3}{:>8.3}{:>8.3}{:>6.2}{:>6.2}          {:>2}\n",
            i + 1,
            res,
            i + 1,
            c[0],
            c[1],
            c[2],
            1.0,
            0.0,
            "C"
        ));
    }
    out.push_str("END\n");
    Ok(out)
}

/// Write a CA trace to a PDB file.
pub fn write_pdb(path: &Path, seq: &Sequence, coords: &[[f64; 3]]) -> Result<()> {
    std::fs::write(path, pdb_text(seq, coords)?)?;
    Ok(())
}

/// Extract CA coordinates from PDB text, in file order.
pub fn read_pdb_ca(text: &str) -> Result<Vec<[f64; 3]>> {
    let mut coords = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if !line.starts_with("ATOM") || line.len() < 54 {
            continue;
        }
        let name = line[12..16].trim();
        if name != "CA" {
            continue;
        }
        let field = |range: std::ops::Range<usize>, what: &str| -> Result<f64> {
            line[range.clone()].trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("bad {what} field {:?}", &line[range]),
            })
        };
        coords.push([
            field(30..38, "x")?,
            field(38..46, "y")?,
            field(46..54, "z")?,
        ]);
    }
    if coords.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no CA records found".into(),
        });
    }
    Ok(coords)
}

/// Read CA coordinates from a PDB file.
pub fn load_pdb_ca(path: &Path) -> Result<Vec<[f64; 3]>> {
    read_pdb_ca(&std::fs::read_to_string(path)?)
}

/// Serialize any report as pretty JSON with a trailing newline.
pub fn write_report<T: Serialize>(path: &Path, report: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// One row of a batch summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub pdb_id: String,
    pub sequence: String,
    pub length: usize,
    pub n_qubits: usize,
    pub min_energy: Option<f64>,
    pub max_energy: Option<f64>,
    pub range: Option<f64>,
    pub rmsd: Option<f64>,
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Render summary rows as CSV.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("pdb_id,sequence,length,n_qubits,min_energy,max_energy,range,rmsd\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.pdb_id,
            r.sequence,
            r.length,
            r.n_qubits,
            opt_cell(r.min_energy),
            opt_cell(r.max_energy),
            opt_cell(r.range),
            opt_cell(r.rmsd)
        ));
    }
    out
}

/// Write summary rows to a CSV file.
pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    std::fs::write(path, summary_csv(rows))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rot_z(deg: f64) -> impl Fn([f64; 3]) -> [f64; 3] {
        let t = deg.to_radians();
        move |p| {
            [
                t.cos() * p[0] - t.sin() * p[1],
                t.sin() * p[0] + t.cos() * p[1],
                p[2],
            ]
        }
    }

    fn chiral_set() -> Vec<[f64; 3]> {
        vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [1.0, 1.0, 1.5],
            [2.0, 1.0, 1.5],
        ]
    }

    #[test]
    fn identical_sets_have_zero_rmsd() {
        let a = chiral_set();
        let rep = kabsch_rmsd(&a, &a).unwrap();
        assert_abs_diff_eq!(rep.rmsd, 0.0, epsilon = 1e-10);
        for i in 0..3 {
            for k in 0..3 {
                let expected = if i == k { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(rep.rotation[i][k], expected, epsilon = 1e-9);
            }
        }
        assert!(!rep.degenerate);
    }

    #[test]
    fn rotation_and_translation_are_removed() {
        let a = chiral_set();
        let rot = rot_z(73.0);
        let b: Vec<[f64; 3]> = a
            .iter()
            .map(|&p| {
                let q = rot(p);
                [q[0] + 5.0, q[1] - 2.0, q[2] + 0.5]
            })
            .collect();
        let rep = kabsch_rmsd(&a, &b).unwrap();
        assert_abs_diff_eq!(rep.rmsd, 0.0, epsilon = 1e-9);
        // the recovered rotation is proper
        let r = Matrix3::from_fn(|i, k| rep.rotation[i][k]);
        assert_abs_diff_eq!(r.determinant(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn mirror_images_stay_apart() {
        let a = chiral_set();
        let b: Vec<[f64; 3]> = a.iter().map(|&p| [-p[0], p[1], p[2]]).collect();
        let rep = kabsch_rmsd(&a, &b).unwrap();
        assert!(rep.rmsd > 0.1, "rmsd = {}", rep.rmsd);
        let r = Matrix3::from_fn(|i, k| rep.rotation[i][k]);
        assert_abs_diff_eq!(r.determinant(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn two_point_sets_report_degeneracy() {
        let a = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
        let b = vec![[0.0, 0.0, 0.0], [1.2, 0.0, 0.0]];
        let rep = kabsch_rmsd(&a, &b).unwrap();
        assert!(rep.degenerate);
        // centered separations 1 and 1.2: each end deviates by 0.1
        assert_abs_diff_eq!(rep.rmsd, 0.1, epsilon = 1e-9);
    }

    #[test]
    fn length_mismatch_rejected() {
        let a = vec![[0.0; 3]; 3];
        let b = vec![[0.0; 3]; 4];
        assert!(matches!(
            kabsch_rmsd(&a, &b),
            Err(Error::LengthMismatch { a: 3, b: 4 })
        ));
        assert!(kabsch_rmsd(&[], &[]).is_err());
    }

    #[test]
    fn pdb_layout_is_fixed_column() {
        let seq = Sequence::parse("ACD").unwrap();
        let coords = vec![
            [0.0, 0.0, 0.0],
            [2.194, 2.194, 2.194],
            [4.388, 0.0, 0.0],
        ];
        let text = pdb_text(&seq, &coords).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "END");
        for (i, line) in lines[..3].iter().enumerate() {
            assert_eq!(line.len(), 78);
            assert!(line.starts_with("ATOM  "));
            assert_eq!(&line[12..16], " CA ");
            assert_eq!(line.as_bytes()[21], b'A');
            assert_eq!(&line[76..78], " C");
            let serial: usize = line[6..11].trim().parse().unwrap();
            assert_eq!(serial, i + 1);
        }
        assert_eq!(&lines[0][17..20], "ALA");
        assert_eq!(&lines[1][17..20], "CYS");
        assert_eq!(&lines[2][17..20], "ASP");
        // x field of residue 2 occupies columns 31-38
        assert_eq!(&lines[1][30..38], "   2.194");
    }

    #[test]
    fn pdb_round_trips_coordinates() {
        let seq = Sequence::parse("GWKV").unwrap();
        let coords = vec![
            [0.0, 0.0, 0.0],
            [2.194, 2.194, 2.194],
            [4.388, 0.0, 0.0],
            [2.194, -2.194, 2.194],
        ];
        let text = pdb_text(&seq, &coords).unwrap();
        let back = read_pdb_ca(&text).unwrap();
        assert_eq!(back.len(), 4);
        for (orig, read) in coords.iter().zip(&back) {
            for k in 0..3 {
                assert_abs_diff_eq!(orig[k], read[k], epsilon = 5e-4);
            }
        }
    }

    #[test]
    fn pdb_reader_ignores_other_records() {
        let text = "HEADER    TEST\nATOM      1  N   ALA A   1       0.000   0.000   0.000  1.00  0.00           N\nATOM      2  CA  ALA A   1       1.000   2.000   3.000  1.00  0.00           C\nTER\nEND\n";
        let coords = read_pdb_ca(text).unwrap();
        assert_eq!(coords, vec![[1.0, 2.0, 3.0]]);
        assert!(read_pdb_ca("HEADER only\n").is_err());
    }

    #[test]
    fn summary_csv_leaves_missing_cells_empty() {
        let rows = vec![SummaryRow {
            pdb_id: "6mu3".into(),
            sequence: "YAGYS".into(),
            length: 5,
            n_qubits: 8,
            min_energy: Some(0.0),
            max_energy: Some(290.0),
            range: Some(290.0),
            rmsd: None,
        }];
        let csv = summary_csv(&rows);
        assert!(csv.starts_with(
            "pdb_id,sequence,length,n_qubits,min_energy,max_energy,range,rmsd\n"
        ));
        assert!(csv.contains("6mu3,YAGYS,5,8,0,290,290,\n"));
    }
}
