//! Run configuration: flat `key = value` files with dotted section names.
//!
//! Every key has a default drawn from the reference parameter set
//! ("paper-table1" profile), so an empty config is a valid desk-scale run.
//! `--override KEY=VALUE` entries apply after the file, and the `--seed` /
//! `--method` flags override their respective keys last.

use std::path::Path;

use cvkl_core::confidence::IntervalMethod;
use cvkl_core::security::SecurityBudget;
use cvkl_core::simulator::{ChannelModel, DigitizationSpec};
use serde::Serialize;

use crate::CliError;

/// Fully resolved configuration; serialized into every report for
/// auditability.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub channel: ChannelModel,
    pub dig: DigitizationSpec,
    pub budget: SecurityBudget,
    pub ir: IrConfig,
    pub run: RunSection,
    pub sim: SimSection,
    pub estimation: EstimationSection,
    pub security: SecuritySection,
    pub intervals: IntervalsSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Serialize)]
pub struct IrConfig {
    /// Frame error rate of reconciliation.
    pub fer: f64,
    /// Reconciliation efficiency.
    pub beta: f64,
    /// Total leaked bits; when absent they are derived from (beta, SNR, n').
    pub leak_bits: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSection {
    pub n_total: u64,
    pub blocks: u64,
    pub seed: u64,
    pub method: IntervalMethod,
    /// Symbol rate in symbols/s, for the pseudo-time sweep column.
    pub symbol_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimSection {
    pub parallel: bool,
    /// When > 0, `simulate` also writes calibration datasets of this many
    /// records (vacuum + electronic) drawn from the channel's trusted noise.
    pub calibration_m: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimationSection {
    /// Also bound the transmitter variance in the worst-case substitution.
    pub bound_x_hat: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SecuritySection {
    /// Force the Holevo term to a fixed value (cross-check runs).
    pub chi_override: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalsSection {
    pub n_min: u64,
    pub n_max: u64,
    pub points: u64,
    pub eps: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSection {
    /// Optional explicit N values (analytic extrapolation mode); empty means
    /// one row per cumulative block of the manifest.
    pub n_values: Vec<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            channel: cvkl_core::simulator::reference_channel(),
            dig: DigitizationSpec::default(),
            budget: SecurityBudget::default(),
            ir: IrConfig {
                fer: 0.0036,
                beta: 0.916,
                leak_bits: None,
            },
            run: RunSection {
                n_total: 1_000_000,
                blocks: 25,
                seed: 1,
                method: IntervalMethod::BetaCollective,
                symbol_rate: 1e8,
            },
            sim: SimSection {
                parallel: true,
                calibration_m: 0,
            },
            estimation: EstimationSection { bound_x_hat: false },
            security: SecuritySection { chi_override: None },
            intervals: IntervalsSection {
                n_min: 10_000,
                n_max: 1_000_000_000,
                points: 50,
                eps: 1e-10,
            },
            sweep: SweepSection {
                n_values: Vec::new(),
            },
        }
    }
}

fn config_err(msg: String) -> CliError {
    CliError::Config(msg)
}

fn parse_f64(key: &str, value: &str) -> Result<f64, CliError> {
    value
        .parse::<f64>()
        .map_err(|_| config_err(format!("{key}: expected a number, got '{value}'")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64, CliError> {
    if let Ok(v) = value.parse::<u64>() {
        return Ok(v);
    }
    // accept scientific notation for counts (1e6, 2.5e8)
    let f = parse_f64(key, value)?;
    if f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 {
        Ok(f as u64)
    } else {
        Err(config_err(format!(
            "{key}: expected a nonnegative integer, got '{value}'"
        )))
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(config_err(format!(
            "{key}: expected true/false, got '{value}'"
        ))),
    }
}

impl RunConfig {
    /// Load the defaults, then the optional file, then the overrides.
    pub fn resolve(
        path: Option<&Path>,
        overrides: &[String],
        seed: Option<u64>,
        method: Option<&str>,
    ) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    config_err(format!(
                        "{}:{}: expected 'key = value'",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                cfg.set(key.trim(), value.trim())?;
            }
        }
        for entry in overrides {
            let (key, value) = entry
                .split_once('=')
                .ok_or_else(|| config_err(format!("--override '{entry}': expected KEY=VALUE")))?;
            cfg.set(key.trim(), value.trim())?;
        }
        if let Some(seed) = seed {
            cfg.run.seed = seed;
        }
        if let Some(method) = method {
            cfg.run.method = method.parse().map_err(config_err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        // strip an optional trailing comment
        let value = value.split('#').next().unwrap_or("").trim();
        match key {
            "channel.mu" => self.channel.mu = parse_f64(key, value)?,
            "channel.eta" => self.channel.eta = parse_f64(key, value)?,
            "channel.u" => self.channel.u = parse_f64(key, value)?,
            "channel.tau" => self.channel.tau = parse_f64(key, value)?,
            "channel.t" => self.channel.t = parse_f64(key, value)?,
            "dig.bits" => self.dig.bits = parse_u64(key, value)? as u32,
            "dig.range_sigmas" => self.dig.range_sigmas = parse_f64(key, value)?,
            "budget.eps_h" => self.budget.eps_h = parse_f64(key, value)?,
            "budget.eps_s" => self.budget.eps_s = parse_f64(key, value)?,
            "budget.eps_ent" => self.budget.eps_ent = parse_f64(key, value)?,
            "budget.eps_pe" => self.budget.eps_pe = parse_f64(key, value)?,
            "budget.eps_cal" => self.budget.eps_cal = parse_f64(key, value)?,
            "budget.eps_ir" => self.budget.eps_ir = parse_f64(key, value)?,
            "budget.eps_qrng" => self.budget.eps_qrng = parse_f64(key, value)?,
            "ir.fer" => self.ir.fer = parse_f64(key, value)?,
            "ir.beta" => self.ir.beta = parse_f64(key, value)?,
            "ir.leak_bits" => self.ir.leak_bits = Some(parse_u64(key, value)?),
            "run.n_total" => self.run.n_total = parse_u64(key, value)?,
            "run.blocks" => self.run.blocks = parse_u64(key, value)?,
            "run.seed" => self.run.seed = parse_u64(key, value)?,
            "run.method" => self.run.method = value.parse().map_err(config_err)?,
            "run.symbol_rate" => self.run.symbol_rate = parse_f64(key, value)?,
            "sim.parallel" => self.sim.parallel = parse_bool(key, value)?,
            "sim.calibration_m" => self.sim.calibration_m = parse_u64(key, value)?,
            "estimation.bound_x_hat" => self.estimation.bound_x_hat = parse_bool(key, value)?,
            "security.chi_override" => self.security.chi_override = Some(parse_f64(key, value)?),
            "intervals.n_min" => self.intervals.n_min = parse_u64(key, value)?,
            "intervals.n_max" => self.intervals.n_max = parse_u64(key, value)?,
            "intervals.points" => self.intervals.points = parse_u64(key, value)?,
            "intervals.eps" => self.intervals.eps = parse_f64(key, value)?,
            "sweep.n_values" => {
                let mut vals = Vec::new();
                for part in value.split(',') {
                    let part = part.trim();
                    if !part.is_empty() {
                        vals.push(parse_u64(key, part)?);
                    }
                }
                self.sweep.n_values = vals;
            }
            other => return Err(config_err(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.channel
            .validate()
            .map_err(|e| config_err(e.to_string()))?;
        self.dig.validate().map_err(|e| config_err(e.to_string()))?;
        self.budget
            .validate()
            .map_err(|e| config_err(e.to_string()))?;
        if self.run.blocks == 0 || self.run.n_total == 0 {
            return Err(config_err(
                "run.blocks and run.n_total must be positive".into(),
            ));
        }
        if !self.run.n_total.is_multiple_of(self.run.blocks) {
            return Err(config_err(format!(
                "run.n_total = {} is not divisible by run.blocks = {}",
                self.run.n_total, self.run.blocks
            )));
        }
        if !(0.0..1.0).contains(&self.ir.fer) {
            return Err(config_err(format!(
                "ir.fer must be in [0,1), got {}",
                self.ir.fer
            )));
        }
        if !(self.ir.beta > 0.0 && self.ir.beta <= 1.0) {
            return Err(config_err(format!(
                "ir.beta must be in (0,1], got {}",
                self.ir.beta
            )));
        }
        if self.intervals.n_min < 2
            || self.intervals.n_max <= self.intervals.n_min
            || self.intervals.points < 2
        {
            return Err(config_err(
                "intervals grid must have n_max > n_min >= 2 and points >= 2".into(),
            ));
        }
        if !(self.intervals.eps > 0.0 && self.intervals.eps < 1.0) {
            return Err(config_err(format!(
                "intervals.eps must be in (0,1), got {}",
                self.intervals.eps
            )));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
        if !(self.run.symbol_rate > 0.0) {
            return Err(config_err("run.symbol_rate must be positive".into()));
        }
        Ok(())
    }
}
