//! `keylen`: the full pipeline from datasets to an itemized key-length
//! report.

use std::path::{Path, PathBuf};

use cvkl_core::dataset::QuadratureDataset;
use cvkl_core::estimation::{
    self, EntropyEstimate, MomentEstimates, TrustedReceiver, WorstCaseAnalysis,
};
use cvkl_core::security::{self, IrOutcome, KeyLengthReport};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

#[derive(Serialize)]
pub struct PipelineReport<'a> {
    pub config: &'a RunConfig,
    pub receiver: TrustedReceiver,
    pub moments: MomentEstimates,
    pub snr: f64,
    pub worst_case: WorstCaseAnalysis,
    pub entropy: EntropyEstimate,
    pub ir: IrOutcome,
    /// "holevo" for the computed bound, "override" when forced by config.
    pub chi_source: &'static str,
    pub report: KeyLengthReport,
}

/// Shared pipeline evaluation: moments and entropy are taken from the data,
/// the rest follows the configuration.
pub fn evaluate<'a>(
    cfg: &'a RunConfig,
    data: &QuadratureDataset,
    receiver: &TrustedReceiver,
) -> Result<PipelineReport<'a>, CliError> {
    let moments = estimation::empirical_moments(data)?;
    let snr = super::snr_from_moments(&moments);
    let worst_case = estimation::worst_case_channel_params(
        &moments,
        cfg.channel.mu,
        receiver,
        cfg.budget.eps_pe,
        cfg.run.method,
        cfg.estimation.bound_x_hat,
    )?;
    let (chi, chi_source): (f64, &'static str) = match cfg.security.chi_override {
        Some(chi) => (chi, "override"),
        None => (
            security::holevo_bound(
                cfg.channel.mu,
                worst_case.params.eta,
                worst_case.params.u,
                receiver,
            )?,
            "holevo",
        ),
    };
    let n_prime = (moments.n as f64 * (1.0 - cfg.ir.fer)).floor() as u64;
    let entropy = estimation::estimate_entropy(data, &cfg.dig, n_prime, cfg.budget.eps_ent)?;
    let leak = match cfg.ir.leak_bits {
        Some(bits) => bits,
        None => security::leak_from_reconciliation(n_prime, cfg.ir.beta, entropy.h_hat, snr)?,
    };
    let ir = IrOutcome::new(moments.n, cfg.ir.fer, leak, cfg.ir.beta)?;
    let report = security::key_length(
        &ir,
        &entropy,
        chi,
        &cfg.budget,
        cfg.dig.bits,
        Some(worst_case.params),
    )?;
    Ok(PipelineReport {
        config: cfg,
        receiver: *receiver,
        moments,
        snr,
        worst_case,
        entropy,
        ir,
        chi_source,
        report,
    })
}

pub fn run(
    cfg: &RunConfig,
    datasets: &[PathBuf],
    receiver_path: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let data = super::load_datasets(datasets)?;
    let receiver = super::resolve_receiver(cfg, receiver_path)?;
    let report = evaluate(cfg, &data, &receiver)?;
    super::write_report(&report, out, "keylen.json")
}
