//! `intervals`: CSV table of the four half-width families over a log grid.

use std::path::Path;

use cvkl_core::confidence::{IntervalHalfWidths, IntervalMethod};

use crate::config::RunConfig;
use crate::CliError;

pub fn run(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| "intervals.csv".into());
    let grid = &cfg.intervals;
    let mut writer = csv::Writer::from_path(&path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    writer
        .write_record([
            "n",
            "delta_var_beta",
            "delta_cov_beta",
            "delta_var_gauss",
            "delta_cov_gauss",
        ])
        .map_err(|e| CliError::Data(e.to_string()))?;
    let (lo, hi) = ((grid.n_min as f64).ln(), (grid.n_max as f64).ln());
    for i in 0..grid.points {
        let f = i as f64 / (grid.points - 1) as f64;
        let n = (lo + f * (hi - lo)).exp().round() as u64;
        let beta = IntervalHalfWidths::new(n, grid.eps, IntervalMethod::BetaCollective)?;
        let gauss = IntervalHalfWidths::new(n, grid.eps, IntervalMethod::GaussianAssumption)?;
        writer
            .write_record([
                n.to_string(),
                beta.delta_var.to_string(),
                beta.delta_cov.to_string(),
                gauss.delta_var.to_string(),
                gauss.delta_cov.to_string(),
            ])
            .map_err(|e| CliError::Data(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::Data(e.to_string()))?;
    println!("wrote {}", path.display());
    Ok(())
}
