//! CSV and plain-text rendering.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use conservo::harness::{ConvergenceRow, ExperimentReport, Trajectory};
use conservo::SystemSpec;

/// 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    num(v.unwrap_or(f64::NAN))
}

pub fn summary_header(m: usize) -> String {
    let mut cols = vec!["method".to_string()];
    cols.extend((0..m).map(|i| format!("psi_defect_max_{i}")));
    cols.extend(["mean_fpi", "max_kappa", "nonconverged", "wall_s"].map(String::from));
    cols.join(",")
}

/// Failed runs keep their counts and timing but report NaN for every measured
/// quantity.
pub fn summary_row(r: &ExperimentReport) -> String {
    let failed = r.failure.is_some();
    let mut cols = vec![r.method.name().to_string()];
    for &d in &r.max_psi_defect {
        cols.push(num(if failed { f64::NAN } else { d }));
    }
    if failed {
        cols.extend([num(f64::NAN), num(f64::NAN)]);
    } else {
        cols.push(opt(r.mean_fpi));
        cols.push(opt(r.max_kappa));
    }
    cols.push(r.nonconverged_steps.to_string());
    cols.push(num(r.wall_time));
    cols.join(",")
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub fn write_trajectory(path: &Path, traj: &Trajectory, n: usize) -> io::Result<()> {
    let m = traj.psi_ref.len();
    let mut w = create(path)?;
    let mut cols = vec!["step".to_string(), "t".to_string()];
    cols.extend((0..n).map(|i| format!("x_{i}")));
    cols.extend((0..m).map(|i| format!("psi_defect_{i}")));
    cols.extend(["fpi", "kappa", "converged"].map(String::from));
    writeln!(w, "{}", cols.join(","))?;
    for k in 0..traj.states.len() {
        let d = &traj.diagnostics[k];
        let mut row = vec![traj.steps[k].to_string(), num(traj.times[k])];
        row.extend(traj.states[k].iter().map(|&v| num(v)));
        row.extend(d.psi_defect.iter().map(|&v| num(v)));
        row.push(d.iterations.to_string());
        row.push(opt(d.kappa));
        row.push(u8::from(d.converged).to_string());
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

/// `|ψ(t, x) − ψ_ref|` at every stored state.
pub fn write_defects(path: &Path, traj: &Trajectory, sys: &SystemSpec) -> io::Result<()> {
    let m = traj.psi_ref.len();
    let mut w = create(path)?;
    let mut cols = vec!["step".to_string(), "t".to_string()];
    cols.extend((0..m).map(|i| format!("psi_defect_{i}")));
    writeln!(w, "{}", cols.join(","))?;
    for k in 0..traj.states.len() {
        let psi = sys.conserved(traj.times[k], &traj.states[k]).unwrap_or_else(|_| vec![f64::NAN; m]);
        let mut row = vec![traj.steps[k].to_string(), num(traj.times[k])];
        row.extend(psi.iter().zip(&traj.psi_ref).map(|(p, r)| num((p - r).abs())));
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

pub fn write_summary(path: &Path, reports: &[ExperimentReport], m: usize) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{}", summary_header(m))?;
    for r in reports {
        writeln!(w, "{}", summary_row(r))?;
    }
    w.flush()
}

pub fn write_convergence(path: &Path, rows: &[ConvergenceRow]) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "tau,error,observed_order")?;
    for r in rows {
        writeln!(w, "{},{},{}", num(r.tau), num(r.error), opt(r.observed_order))?;
    }
    w.flush()
}

fn sci(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.3e}"),
        None => "-".to_string(),
    }
}

/// Aligned text table, one row per method.
pub fn render_table(reports: &[ExperimentReport], m: usize) -> String {
    let mut header = vec!["method".to_string()];
    header.extend((0..m).map(|i| format!("max|dpsi_{i}|")));
    header.extend(["mean FPI", "max kappa", "nonconv"].map(String::from));
    let mut rows = vec![header];
    for r in reports {
        let failed = r.failure.is_some();
        let mut row = vec![r.method.name().to_string()];
        for &d in &r.max_psi_defect {
            row.push(if failed { "NaN".into() } else { format!("{d:.3e}") });
        }
        if failed {
            row.extend(["NaN".to_string(), "NaN".to_string()]);
        } else {
            row.push(r.mean_fpi.map_or("-".into(), |v| format!("{v:.3}")));
            row.push(sci(r.max_kappa));
        }
        row.push(r.nonconverged_steps.to_string());
        rows.push(row);
    }
    let widths: Vec<usize> =
        (0..rows[0].len()).map(|j| rows.iter().map(|r| r[j].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(j, c)| if j == 0 { format!("{c:<w$}", w = widths[j]) } else { format!("{c:>w$}", w = widths[j]) })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    for r in reports {
        if let (Some(step), Some(msg)) = (r.failure_step, &r.failure) {
            out.push_str(&format!("{}: stopped at step {step}: {msg}\n", r.method));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.001585106379082, 1e-300, 6.02e23] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn summary_header_layout() {
        assert_eq!(summary_header(2), "method,psi_defect_max_0,psi_defect_max_1,mean_fpi,max_kappa,nonconverged,wall_s");
    }
}
