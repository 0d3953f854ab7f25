//! `sweep`: key-length evolution over cumulative block counts (or explicit
//! symbol counts), reproducing the pseudo-temporal secret-key-fraction and
//! null-key-threshold tables.

use std::path::Path;

use cvkl_core::dataset::QuadratureDataset;
use cvkl_core::estimation::{self, EntropyEstimate, MomentEstimates, TrustedReceiver};
use cvkl_core::security::{self, IrOutcome};
use cvkl_core::simulator::DatasetManifest;

use crate::config::RunConfig;
use crate::CliError;

struct Row {
    n_symbols: u64,
    seconds: f64,
    skf_worst: f64,
    skf_average: f64,
    u_worst: f64,
    u_threshold: f64,
}

/// Pre-floor bound per surviving symbol for given channel parameters, at
/// parameter-estimation size `n_pe`.
fn bound_per_symbol(
    cfg: &RunConfig,
    receiver: &TrustedReceiver,
    n_pe: u64,
    eta: f64,
    u: f64,
    h_hat: f64,
    snr: f64,
) -> Result<f64, CliError> {
    let chi = match cfg.security.chi_override {
        Some(chi) => chi,
        None => security::holevo_bound(cfg.channel.mu, eta, u, receiver)?,
    };
    let n_prime = (n_pe as f64 * (1.0 - cfg.ir.fer)).floor() as u64;
    let leak = match cfg.ir.leak_bits {
        Some(bits) => bits,
        None => security::leak_from_reconciliation(n_prime, cfg.ir.beta, h_hat, snr)?,
    };
    let ir = IrOutcome::new(n_pe, cfg.ir.fer, leak, cfg.ir.beta)?;
    let entropy = EntropyEstimate {
        h_hat,
        penalty: estimation::entropy_penalty(ir.n_prime, cfg.budget.eps_ent)?,
        n_prime: ir.n_prime,
        num_bins: 1usize << (2 * cfg.dig.bits),
    };
    let report = security::key_length(&ir, &entropy, chi, &cfg.budget, cfg.dig.bits, None)?;
    Ok(report.pre_floor_bound_bits / ir.n_prime as f64)
}

fn sweep_row(
    cfg: &RunConfig,
    receiver: &TrustedReceiver,
    moments: &MomentEstimates,
    h_hat: f64,
    snr: f64,
) -> Result<Row, CliError> {
    let n_pe = moments.n;
    let worst = estimation::worst_case_channel_params(
        moments,
        cfg.channel.mu,
        receiver,
        cfg.budget.eps_pe,
        cfg.run.method,
        cfg.estimation.bound_x_hat,
    )?;
    // The average row is diagnostic: at small block counts the point
    // estimate of u fluctuates below zero, which just means "no observable
    // excess noise" there.
    let point = match estimation::channel_params(moments, cfg.channel.mu, receiver) {
        Ok(p) => p,
        Err(estimation::EstimationError::NegativeExcessNoise { .. }) => {
            let eta = (moments.z_hat * moments.z_hat
                / (receiver.tau * moments.x_hat * cfg.channel.mu))
                .min(1.0);
            cvkl_core::ChannelParams { eta, u: 0.0 }
        }
        Err(e) => return Err(e.into()),
    };
    let skf_worst = bound_per_symbol(
        cfg,
        receiver,
        n_pe,
        worst.params.eta,
        worst.params.u,
        h_hat,
        snr,
    )?;
    let skf_average = bound_per_symbol(cfg, receiver, n_pe, point.eta, point.u, h_hat, snr)?;

    // Null-key threshold: the largest excess noise with a nonnegative bound
    // at this block size, holding everything else at the worst-case row.
    // Meaningless when chi is overridden (the bound no longer depends on u).
    let u_threshold = if cfg.security.chi_override.is_some() {
        f64::NAN
    } else if bound_per_symbol(cfg, receiver, n_pe, worst.params.eta, 0.0, h_hat, snr)? < 0.0 {
        0.0
    } else {
        let mut hi = 0.05f64;
        let mut grow = 0;
        while bound_per_symbol(cfg, receiver, n_pe, worst.params.eta, hi, h_hat, snr)? > 0.0 {
            hi *= 2.0;
            grow += 1;
            if grow > 20 {
                break;
            }
        }
        let mut lo = 0.0f64;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if bound_per_symbol(cfg, receiver, n_pe, worst.params.eta, mid, h_hat, snr)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    Ok(Row {
        n_symbols: n_pe,
        seconds: n_pe as f64 / cfg.run.symbol_rate,
        skf_worst,
        skf_average,
        u_worst: worst.params.u,
        u_threshold,
    })
}

pub fn run(cfg: &RunConfig, manifest_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let manifest = DatasetManifest::load(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let receiver = super::resolve_receiver(cfg, None)?;

    let mut rows = Vec::new();
    if cfg.sweep.n_values.is_empty() {
        // one row per cumulative block prefix
        let mut data = QuadratureDataset::default();
        for block in &manifest.blocks {
            let piece = QuadratureDataset::read_from(&dir.join(&block.file))?;
            data.extend_from(&piece);
            let moments = estimation::empirical_moments(&data)?;
            let n_prime = (moments.n as f64 * (1.0 - cfg.ir.fer)).floor() as u64;
            let entropy =
                estimation::estimate_entropy(&data, &cfg.dig, n_prime, cfg.budget.eps_ent)?;
            let snr = super::snr_from_moments(&moments);
            rows.push(sweep_row(cfg, &receiver, &moments, entropy.h_hat, snr)?);
        }
    } else {
        // analytic extrapolation from the full dataset to each requested N
        let mut data = QuadratureDataset::default();
        for block in &manifest.blocks {
            let piece = QuadratureDataset::read_from(&dir.join(&block.file))?;
            data.extend_from(&piece);
        }
        let measured = estimation::empirical_moments(&data)?;
        let n_prime = (measured.n as f64 * (1.0 - cfg.ir.fer)).floor() as u64;
        let entropy = estimation::estimate_entropy(&data, &cfg.dig, n_prime, cfg.budget.eps_ent)?;
        let snr = super::snr_from_moments(&measured);
        for &n in &cfg.sweep.n_values {
            let mut moments = measured;
            moments.n = n;
            rows.push(sweep_row(cfg, &receiver, &moments, entropy.h_hat, snr)?);
        }
    }

    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| "sweep.csv".into());
    let mut writer = csv::Writer::from_path(&path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    writer
        .write_record([
            "n_symbols",
            "seconds",
            "skf_worst",
            "skf_average",
            "u_worst",
            "u_threshold",
        ])
        .map_err(|e| CliError::Data(e.to_string()))?;
    for r in rows {
        writer
            .write_record([
                r.n_symbols.to_string(),
                r.seconds.to_string(),
                r.skf_worst.to_string(),
                r.skf_average.to_string(),
                r.u_worst.to_string(),
                r.u_threshold.to_string(),
            ])
            .map_err(|e| CliError::Data(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::Data(e.to_string()))?;
    println!("wrote {}", path.display());
    Ok(())
}
