//! `calibrate`: shot-noise bounds and worst-case trusted noise from a
//! vacuum/electronic calibration pair.

use std::path::Path;

use cvkl_core::dataset::CalibrationDataset;
use cvkl_core::estimation::{self, ShotNoiseCalibration, TrustedReceiver};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

#[derive(Serialize)]
struct CalibrationReport<'a> {
    config: &'a RunConfig,
    var_vacuum: f64,
    var_electronic: f64,
    calibration: ShotNoiseCalibration,
    receiver: TrustedReceiver,
}

pub fn run(
    cfg: &RunConfig,
    vacuum: &Path,
    electronic: &Path,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let vac = CalibrationDataset::read_from(vacuum)?;
    let elec = CalibrationDataset::read_from(electronic)?;
    if vac.len() != elec.len() {
        return Err(CliError::Data(format!(
            "calibration runs differ in length: {} vs {} records",
            vac.len(),
            elec.len()
        )));
    }
    let calibration = estimation::shot_noise_calibration(
        vac.variance(),
        elec.variance(),
        vac.len() as u64,
        cfg.budget.eps_cal,
    )?;
    let receiver = TrustedReceiver::from_calibration(cfg.channel.tau, &calibration)?;
    let report = CalibrationReport {
        config: cfg,
        var_vacuum: vac.variance(),
        var_electronic: elec.variance(),
        calibration,
        receiver,
    };
    super::write_report(&report, out, "receiver.json")
}
