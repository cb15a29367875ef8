//! Tab-separated convergence tables.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::Result;
use crate::newton::ReconstructionTrace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTables {
    /// Per frequency index errors against the truth, when known.
    pub errors: Option<String>,
    /// One row per executed Newton iteration.
    pub iterations: String,
    /// Smallest singular value per frequency index.
    pub sigma: String,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |x| format!("{x:.6e}"))
}

pub fn report(trace: &ReconstructionTrace, dataset: Option<&Dataset>) -> ReportTables {
    let truth = dataset.and_then(Dataset::truth);
    let errors = truth.map(|truth| {
        let theta = dataset
            .map(Dataset::theta)
            .unwrap_or_else(super::default_theta);
        let grid = dataset.map(Dataset::grid);
        let mut s = String::from("n\tk\tdegree\trelative_error\tilluminated_error\n");
        for (n, shape) in &trace.shapes {
            let k = grid.map(|g| g.k(*n)).unwrap_or(f64::NAN);
            let _ = writeln!(
                s,
                "{n}\t{k:.6}\t{}\t{:.6e}\t{:.6e}",
                shape.degree(),
                truth.relative_error(shape),
                truth.illuminated_error(shape, theta)
            );
        }
        s
    });

    let mut iterations =
        String::from("n\tk\tj\tdegree\talpha\tresidual_norm\tstep_norm\tsigma_min\n");
    for r in &trace.rows {
        let _ = writeln!(
            iterations,
            "{}\t{:.6}\t{}\t{}\t{:e}\t{:.6e}\t{:.6e}\t{}",
            r.freq_index,
            r.k,
            r.iteration,
            r.degree,
            r.alpha,
            r.residual_norm,
            r.step_norm,
            fmt_opt(r.sigma_min)
        );
    }

    let mut sigma = String::from("n\tk\tdegree\tsigma_min_first\tsigma_min_smallest\n");
    let mut idx = 0;
    while idx < trace.rows.len() {
        let n = trace.rows[idx].freq_index;
        let group: Vec<_> = trace.rows[idx..]
            .iter()
            .take_while(|r| r.freq_index == n)
            .collect();
        let smallest = group.iter().filter_map(|r| r.sigma_min).reduce(f64::min);
        let _ = writeln!(
            sigma,
            "{n}\t{:.6}\t{}\t{}\t{}",
            group[0].k,
            group[0].degree,
            fmt_opt(group[0].sigma_min),
            fmt_opt(smallest)
        );
        idx += group.len();
    }

    ReportTables {
        errors,
        iterations,
        sigma,
    }
}

/// Writes `errors.tsv` (if present), `iterations.tsv` and `sigma.tsv`.
pub fn write_report(dir: &Path, tables: &ReportTables) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    if let Some(e) = &tables.errors {
        std::fs::write(dir.join("errors.tsv"), e)?;
    }
    std::fs::write(dir.join("iterations.tsv"), &tables.iterations)?;
    std::fs::write(dir.join("sigma.tsv"), &tables.sigma)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TrigShape;
    use crate::newton::TraceRow;

    fn trace() -> ReconstructionTrace {
        let shape = TrigShape::circle([0.0, 0.0], 1.0).unwrap();
        let row = |n, j, s| TraceRow {
            freq_index: n,
            k: n as f64,
            iteration: j,
            degree: 1,
            alpha: 0.01,
            residual_norm: 0.0,
            step_norm: 0.0,
            sigma_min: Some(s),
        };
        ReconstructionTrace {
            rows: vec![row(1, 0, 0.5), row(1, 1, 0.25), row(2, 0, 0.75)],
            shapes: vec![(0, shape.clone()), (1, shape.clone()), (2, shape)],
        }
    }

    #[test]
    fn tables_without_truth() {
        let t = report(&trace(), None);
        assert!(t.errors.is_none());
        assert_eq!(t.iterations.lines().count(), 4);
        let sigma: Vec<&str> = t.sigma.lines().collect();
        assert_eq!(sigma.len(), 3);
        assert!(sigma[1].ends_with("5.000000e-1\t2.500000e-1"));
    }
}
