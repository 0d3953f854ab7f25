//! `simulate`: write block datasets, an optional calibration pair, and the
//! manifest. Byte-identical for a fixed seed, in serial or parallel mode.

use std::path::Path;

use cvkl_core::simulator::{self, BlockEntry, CalibrationEntry, DatasetManifest, SeededStream};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::CliError;

/// Stream index reserved for calibration draws, outside any block range.
const CALIBRATION_STREAM: u64 = u64::MAX;

pub fn run(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| "cvkl-data".into());
    // config validation happened before any I/O; now create the tree
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    let block_n = cfg.run.n_total / cfg.run.blocks;
    let seed = cfg.run.seed;

    let write_block = |index: u64| -> Result<BlockEntry, CliError> {
        let data = simulator::generate_symbols(
            block_n,
            &cfg.channel,
            &cfg.dig,
            &SeededStream::new(seed, index),
        )?;
        let file = format!("block_{index:03}.cvq");
        data.write_to(&dir.join(&file))?;
        Ok(BlockEntry {
            index,
            file,
            records: block_n,
        })
    };

    let mut blocks = if cfg.sim.parallel {
        (0..cfg.run.blocks)
            .into_par_iter()
            .map(write_block)
            .collect::<Result<Vec<_>, _>>()?
    } else {
        (0..cfg.run.blocks)
            .map(write_block)
            .collect::<Result<Vec<_>, _>>()?
    };
    blocks.sort_by_key(|b| b.index);

    let calibration = if cfg.sim.calibration_m > 0 {
        let (vac, elec) = simulator::generate_calibration(
            cfg.sim.calibration_m,
            cfg.channel.t,
            &SeededStream::new(seed, CALIBRATION_STREAM),
        )?;
        vac.write_to(&dir.join("calib_vacuum.cvc"))?;
        elec.write_to(&dir.join("calib_electronic.cvc"))?;
        Some(CalibrationEntry {
            vacuum_file: "calib_vacuum.cvc".into(),
            electronic_file: "calib_electronic.cvc".into(),
            records: cfg.sim.calibration_m,
        })
    } else {
        None
    };

    let manifest = DatasetManifest {
        model: cfg.channel,
        dig: cfg.dig,
        seed,
        n_total: cfg.run.n_total,
        blocks,
        calibration,
    };
    manifest.save(&dir.join("manifest.json"))?;
    println!(
        "wrote {} blocks of {} symbols to {}",
        cfg.run.blocks,
        block_n,
        dir.display()
    );
    Ok(())
}
