//! `estimate`: empirical moments and channel parameters, point and
//! worst-case.

use std::path::{Path, PathBuf};

use cvkl_core::estimation::{
    self, ChannelParams, MomentEstimates, TrustedReceiver, WorstCaseAnalysis,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

#[derive(Serialize)]
struct EstimateReport<'a> {
    config: &'a RunConfig,
    receiver: TrustedReceiver,
    moments: MomentEstimates,
    snr: f64,
    point_params: ChannelParams,
    worst_case: WorstCaseAnalysis,
}

pub fn run(
    cfg: &RunConfig,
    datasets: &[PathBuf],
    receiver_path: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let data = super::load_datasets(datasets)?;
    let receiver = super::resolve_receiver(cfg, receiver_path)?;
    let moments = estimation::empirical_moments(&data)?;
    let point_params = estimation::channel_params(&moments, cfg.channel.mu, &receiver)?;
    let worst_case = estimation::worst_case_channel_params(
        &moments,
        cfg.channel.mu,
        &receiver,
        cfg.budget.eps_pe,
        cfg.run.method,
        cfg.estimation.bound_x_hat,
    )?;
    let report = EstimateReport {
        config: cfg,
        receiver,
        moments,
        snr: super::snr_from_moments(&moments),
        point_params,
        worst_case,
    };
    super::write_report(&report, out, "estimate.json")
}
