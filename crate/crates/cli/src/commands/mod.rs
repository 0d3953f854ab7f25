//! Subcommand implementations and the small shared plumbing between them.

pub mod calibrate;
pub mod estimate;
pub mod intervals;
pub mod keylen;
pub mod simulate;
pub mod sweep;

use std::path::Path;

use cvkl_core::dataset::QuadratureDataset;
use cvkl_core::estimation::{self, MomentEstimates, TrustedReceiver};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

/// Read and concatenate quadrature datasets in argument order.
pub fn load_datasets(paths: &[std::path::PathBuf]) -> Result<QuadratureDataset, CliError> {
    if paths.is_empty() {
        return Err(CliError::Config("no dataset files given".into()));
    }
    let mut merged = QuadratureDataset::default();
    for path in paths {
        let block = QuadratureDataset::read_from(path)?;
        merged.extend_from(&block);
    }
    Ok(merged)
}

/// Receiver description: from a calibration report when given, otherwise the
/// configured trusted parameters.
pub fn resolve_receiver(
    cfg: &RunConfig,
    receiver_path: Option<&Path>,
) -> Result<TrustedReceiver, CliError> {
    match receiver_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            #[derive(serde::Deserialize)]
            struct ReceiverFile {
                receiver: TrustedReceiver,
            }
            let file: ReceiverFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            Ok(file.receiver)
        }
        None => Ok(estimation::TrustedReceiver::from_parameters(
            cfg.channel.tau,
            cfg.channel.t,
        )?),
    }
}

/// Per-quadrature signal-to-noise ratio implied by the moments.
pub fn snr_from_moments(m: &MomentEstimates) -> f64 {
    let signal = m.z_hat * m.z_hat / m.x_hat;
    signal / (m.y_hat - signal)
}

/// Serialize a report as pretty JSON to `--out` (or the default filename).
pub fn write_report<T: Serialize>(
    value: &T,
    out: Option<&Path>,
    default_name: &str,
) -> Result<(), CliError> {
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| default_name.into());
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(format!("serializing report: {e}")))?;
    std::fs::write(&path, json + "\n")
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}
