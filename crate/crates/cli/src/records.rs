//! Persisted outputs. JSON records round-trip exactly: floats are written in
//! shortest round-trip form and parsed back bit-for-bit.

use std::fmt::Write as _;
use std::path::Path;

use plaplace::{Graph, LambdaEstimate, MountainPassPath, SeedKind, Solution, Sweep, SweepRow};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRecord {
    pub command: String,
    pub converged: bool,
    pub energy: f64,
    pub equation_residual: f64,
    pub nehari_residual: f64,
    pub grad_norm_dual: f64,
    pub iterations: usize,
    pub seed: String,
    pub labels: Vec<String>,
    pub u: Vec<f64>,
    /// `[energy, grad_norm]` per iteration.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<[f64; 2]>,
}

pub fn seed_name(seed: SeedKind) -> String {
    match seed {
        SeedKind::Warm(k) => format!("warm:{k}"),
        SeedKind::Spike(x) => format!("spike:{x}"),
        SeedKind::Random(k) => format!("random:{k}"),
    }
}

impl SolveRecord {
    pub fn new(command: &str, g: &Graph, r: &Solution) -> Self {
        SolveRecord {
            command: command.to_string(),
            converged: r.converged,
            energy: r.energy,
            equation_residual: r.equation_residual,
            nehari_residual: r.nehari_residual,
            grad_norm_dual: r.grad_norm_dual,
            iterations: r.iterations,
            seed: seed_name(r.seed),
            labels: g.labels().to_vec(),
            u: r.u.as_slice().to_vec(),
            trace: r.trace.iter().map(|t| [t.energy, t.grad_norm]).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.labels.len() != self.u.len() {
            return Err(CliError::Config(format!(
                "record has {} labels for {} values",
                self.labels.len(),
                self.u.len()
            )));
        }
        let finite = self.u.iter().chain([&self.energy]).all(|v| v.is_finite());
        let residuals = [
            self.equation_residual,
            self.nehari_residual,
            self.grad_norm_dual,
        ];
        if !finite || residuals.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(CliError::Config(
                "record holds non-finite or negative residuals".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaRecord {
    pub command: String,
    pub lambda: f64,
    pub upper_bound: bool,
    pub converged: bool,
    pub residual: f64,
    pub iterations: usize,
    pub restarts: usize,
    /// Dense eigen-oracle value, present for `p = 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense_p2: Option<f64>,
    pub labels: Vec<String>,
    pub u: Vec<f64>,
}

impl LambdaRecord {
    pub fn new(g: &Graph, est: &LambdaEstimate<f64>, dense_p2: Option<f64>) -> Self {
        LambdaRecord {
            command: "lambda".into(),
            lambda: est.lambda,
            upper_bound: est.upper_bound,
            converged: est.converged,
            residual: est.residual,
            iterations: est.iterations,
            restarts: est.restarts,
            dense_p2,
            labels: g.labels().to_vec(),
            u: est.u.as_slice().to_vec(),
        }
    }
}

pub fn to_json<T: Serialize>(record: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(record).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)
        .map_err(|e| CliError::Io(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

/// `node,arc_length,energy`, one row per path node.
pub fn path_profile_csv(path: &MountainPassPath<f64>) -> Result<String, CliError> {
    let mut arc = 0.0;
    let mut rows = Vec::with_capacity(path.nodes.len());
    for (i, (u, e)) in path.nodes.iter().zip(&path.energies).enumerate() {
        if i > 0 {
            let prev = &path.nodes[i - 1];
            arc += u
                .iter()
                .zip(prev.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
        }
        rows.push(vec![i.to_string(), arc.to_string(), e.to_string()]);
    }
    csv_text(&["node", "arc_length", "energy"], &rows)
}

fn sweep_row(r: &SweepRow<f64>) -> Vec<String> {
    vec![
        r.theta.to_string(),
        r.m_theta.to_string(),
        r.tail_mass.to_string(),
        r.w1p_gap.to_string(),
        r.off_omega_mass.to_string(),
        r.residual.to_string(),
        r.iterations.to_string(),
    ]
}

/// Sweep table in the fixed column order, closed by the limit row
/// (`theta = inf`).
pub fn sweep_csv(sweep: &Sweep<f64>) -> Result<String, CliError> {
    let mut rows: Vec<Vec<String>> = sweep.rows.iter().map(sweep_row).collect();
    rows.push(sweep_row(&SweepRow {
        theta: f64::INFINITY,
        m_theta: sweep.limit.energy,
        tail_mass: 0.0,
        w1p_gap: 0.0,
        off_omega_mass: 0.0,
        residual: sweep.limit.equation_residual,
        iterations: sweep.limit.iterations,
    }));
    csv_text(&SweepRow::<f64>::COLUMNS, &rows)
}

pub fn summary(lines: &[(&str, String)]) -> String {
    let width = lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in lines {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trips_bit_for_bit() {
        let rec = SolveRecord {
            command: "solve".into(),
            converged: true,
            energy: 0.1 + 0.2,
            equation_residual: 3.3e-9,
            nehari_residual: 1.0 / 3.0,
            grad_norm_dual: 0.0,
            iterations: 12,
            seed: "spike:0".into(),
            labels: vec!["a".into(), "b".into()],
            u: vec![std::f64::consts::PI, 1e-300],
            trace: vec![[0.5, 1e-7]],
        };
        let text = to_json(&rec).unwrap();
        let back: SolveRecord = serde_json::from_str(&text).unwrap();
        back.validate().unwrap();
        assert_eq!(back, rec);
        assert_eq!(to_json(&back).unwrap(), text);
    }

    #[test]
    fn sweep_columns() {
        let csv = csv_text(&SweepRow::<f64>::COLUMNS, &[]).unwrap();
        assert_eq!(
            csv,
            "theta,m_theta,tail_mass,w1p_gap,off_omega_mass,residual,iterations\n"
        );
    }
}
