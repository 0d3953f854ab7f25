//! Synthetic Gaussian-channel data source.
//!
//! Generates discretized Gaussian-modulated coherent-state symbols, applies a
//! lossy/noisy channel plus trusted receiver (all in shot-noise-normalized
//! heterodyne-data units: vacuum has unit variance per quadrature and a mean
//! photon number adds one-for-one), and produces the calibration runs used
//! to estimate shot noise and trusted noise. Also provides the orthogonal
//! split-sample trials behind the coverage tests of the beta intervals.
//!
//! All randomness is drawn from per-block ChaCha12 streams keyed by
//! (seed, block_index) and converted to normals by inversion sampling, so
//! blocks can be generated in any order, in parallel, with bit-exact
//! reproducibility.
#![allow(clippy::neg_cmp_op_on_partial_ord)] // !(x >= 0) deliberately rejects NaN

use std::path::Path;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{CalibrationDataset, QuadratureDataset};
use crate::special::normal_quantile;

/// Errors from simulator configuration and manifest handling.
#[derive(Debug, Error)]
pub enum SimulatorError {
    #[error("invalid channel model: {0}")]
    InvalidModel(String),
    #[error("invalid digitization spec: {0}")]
    InvalidDigitization(String),
    #[error("{path}: {source}")]
    ManifestIo {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    ManifestFormat {
        path: std::path::PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

type Result<T> = std::result::Result<T, SimulatorError>;

/// Physical channel and receiver parameters, photon number units throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    /// Untrusted channel transmittance, in (0, 1].
    pub eta: f64,
    /// Untrusted excess noise, channel-input referred (PNU).
    pub u: f64,
    /// Trusted receiver efficiency, in (0, 1].
    pub tau: f64,
    /// Trusted receiver noise (PNU).
    pub t: f64,
    /// Modulation strength: mean photon number of the transmitted ensemble.
    pub mu: f64,
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        let ok = self.eta > 0.0
            && self.eta <= 1.0
            && self.tau > 0.0
            && self.tau <= 1.0
            && self.u >= 0.0
            && self.t >= 0.0
            && self.mu > 0.0
            && [self.eta, self.u, self.tau, self.t, self.mu]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(SimulatorError::InvalidModel(format!("{self:?}")))
        }
    }

    /// Per-quadrature variance of the receiver data implied by the model.
    pub fn expected_rx_variance(&self) -> f64 {
        self.tau * self.eta * (self.mu + self.u) + self.t + 1.0
    }

    /// Per-quadrature variance of the additive receiver noise.
    pub fn noise_variance(&self) -> f64 {
        1.0 + self.tau * self.eta * self.u + self.t
    }
}

/// Quadrature digitization grid: `bits` per quadrature spanning
/// `range_sigmas` standard deviations in total (i.e. +- range_sigmas/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DigitizationSpec {
    pub bits: u32,
    pub range_sigmas: f64,
}

impl Default for DigitizationSpec {
    fn default() -> Self {
        Self {
            bits: 6,
            range_sigmas: 7.0,
        }
    }
}

impl DigitizationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(2..=16).contains(&self.bits) {
            return Err(SimulatorError::InvalidDigitization(format!(
                "bits must be in [2,16], got {}",
                self.bits
            )));
        }
        if !(self.range_sigmas > 0.0 && self.range_sigmas.is_finite()) {
            return Err(SimulatorError::InvalidDigitization(format!(
                "range_sigmas must be positive, got {}",
                self.range_sigmas
            )));
        }
        Ok(())
    }

    pub fn bins_per_quadrature(&self) -> u32 {
        1 << self.bits
    }

    /// Number of complex-symbol bins, 2^(2 bits).
    pub fn symbol_bins(&self) -> usize {
        1usize << (2 * self.bits)
    }
}

/// A digitization grid instantiated for a concrete standard deviation.
#[derive(Debug, Clone, Copy)]
pub struct Digitizer {
    half_range: f64,
    step: f64,
    bins: u32,
}

impl Digitizer {
    pub fn new(spec: &DigitizationSpec, sigma: f64) -> Self {
        let half_range = 0.5 * spec.range_sigmas * sigma;
        let bins = spec.bins_per_quadrature();
        Self {
            half_range,
            step: 2.0 * half_range / bins as f64,
            bins,
        }
    }

    /// Bin index in [0, 2^bits); out-of-range samples clamp to edge bins.
    pub fn index(&self, x: f64) -> u32 {
        let raw = ((x + self.half_range) / self.step).floor();
        if raw < 0.0 {
            0
        } else if raw >= self.bins as f64 {
            self.bins - 1
        } else {
            raw as u32
        }
    }

    /// Bin-center value for an index.
    pub fn value(&self, index: u32) -> f64 {
        -self.half_range + (index as f64 + 0.5) * self.step
    }

    /// Quantize a sample to its bin center.
    pub fn quantize(&self, x: f64) -> f64 {
        self.value(self.index(x))
    }
}

/// Deterministic random stream handle: identical (seed, block_index) always
/// reproduces identical draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededStream {
    pub seed: u64,
    pub block_index: u64,
}

impl SeededStream {
    pub fn new(seed: u64, block_index: u64) -> Self {
        Self { seed, block_index }
    }

    /// Instantiate the block-keyed generator.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.block_index.to_le_bytes());
        key[16..24].copy_from_slice(b"CVKLSIM1");
        ChaCha12Rng::from_seed(key)
    }
}

/// Uniform draw in the open interval (0, 1), safe for inversion sampling.
#[inline]
fn uniform_open01(rng: &mut ChaCha12Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// Standard normal draw by inversion of the cumulative distribution.
#[inline]
pub fn standard_normal(rng: &mut ChaCha12Rng) -> f64 {
    normal_quantile(uniform_open01(rng))
}

/// Generate `n` complex symbols through the channel model.
///
/// Transmitter quadratures are drawn from the discretized Gaussian with
/// per-quadrature variance mu (digitized before transmission); the receiver
/// sees sqrt(tau eta) times the digitized symbol plus Gaussian noise of
/// per-quadrature variance 1 + tau eta u + t, then digitizes on its own
/// grid. Per symbol the draw order is (tx_q, tx_p, noise_q, noise_p).
pub fn generate_symbols(
    n: u64,
    model: &ChannelModel,
    dig: &DigitizationSpec,
    stream: &SeededStream,
) -> Result<QuadratureDataset> {
    generate_symbols_inner(n, model, dig, stream, true)
}

/// Undigitized twin of `generate_symbols`: same stream, same draw order, no
/// quantization on either side. Used to measure digitization bias.
pub fn generate_symbols_raw(
    n: u64,
    model: &ChannelModel,
    dig: &DigitizationSpec,
    stream: &SeededStream,
) -> Result<QuadratureDataset> {
    generate_symbols_inner(n, model, dig, stream, false)
}

fn generate_symbols_inner(
    n: u64,
    model: &ChannelModel,
    dig: &DigitizationSpec,
    stream: &SeededStream,
    digitize: bool,
) -> Result<QuadratureDataset> {
    model.validate()?;
    dig.validate()?;
    let n = n as usize;
    let sigma_tx = model.mu.sqrt();
    let sigma_noise = model.noise_variance().sqrt();
    let gain = (model.tau * model.eta).sqrt();
    let grid_tx = Digitizer::new(dig, sigma_tx);
    let grid_rx = Digitizer::new(dig, model.expected_rx_variance().sqrt());
    let mut rng = stream.rng();

    let mut tx_q = Vec::with_capacity(n);
    let mut tx_p = Vec::with_capacity(n);
    let mut rx_q = Vec::with_capacity(n);
    let mut rx_p = Vec::with_capacity(n);
    for _ in 0..n {
        let zq = standard_normal(&mut rng);
        let zp = standard_normal(&mut rng);
        let nq = standard_normal(&mut rng);
        let np = standard_normal(&mut rng);
        let (tq, tp) = if digitize {
            (
                grid_tx.quantize(sigma_tx * zq),
                grid_tx.quantize(sigma_tx * zp),
            )
        } else {
            (sigma_tx * zq, sigma_tx * zp)
        };
        let rq = gain * tq + sigma_noise * nq;
        let rp = gain * tp + sigma_noise * np;
        let (rq, rp) = if digitize {
            (grid_rx.quantize(rq), grid_rx.quantize(rp))
        } else {
            (rq, rp)
        };
        tx_q.push(tq);
        tx_p.push(tp);
        rx_q.push(rq);
        rx_p.push(rp);
    }
    Ok(QuadratureDataset {
        tx_q,
        tx_p,
        rx_q,
        rx_p,
    })
}

/// Generate paired calibration runs of `m` complex symbols each.
///
/// The vacuum run (receiver laser on, transmitter off) has per-quadrature
/// variance 1 + t_true; the electronic run (both lasers off) has variance
/// t_true, so the worst-case trusted-noise formula recovers t_true in
/// expectation. Per record the draw order is (vac_q, vac_p, elec_q, elec_p).
pub fn generate_calibration(
    m: u64,
    t_true: f64,
    stream: &SeededStream,
) -> Result<(CalibrationDataset, CalibrationDataset)> {
    if !(t_true >= 0.0) || !t_true.is_finite() {
        return Err(SimulatorError::InvalidModel(format!(
            "t_true must be >= 0, got {t_true}"
        )));
    }
    let m = m as usize;
    let sigma_vac = (1.0 + t_true).sqrt();
    let sigma_elec = t_true.sqrt();
    let mut rng = stream.rng();
    let mut vac = CalibrationDataset {
        q: Vec::with_capacity(m),
        p: Vec::with_capacity(m),
    };
    let mut elec = CalibrationDataset {
        q: Vec::with_capacity(m),
        p: Vec::with_capacity(m),
    };
    for _ in 0..m {
        vac.q.push(sigma_vac * standard_normal(&mut rng));
        vac.p.push(sigma_vac * standard_normal(&mut rng));
        elec.q.push(sigma_elec * standard_normal(&mut rng));
        elec.p.push(sigma_elec * standard_normal(&mut rng));
    }
    Ok((vac, elec))
}

/// Norm and inner-product statistics of one orthogonal split trial: standard
/// normal vectors X, Y of length 2n split into first/second halves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitTrial {
    pub x1_norm2: f64,
    pub x_norm2: f64,
    pub y_norm2: f64,
    pub x1y1: f64,
    pub x2y2: f64,
    pub xy: f64,
}

/// Draw one split trial. X is drawn first (2n values), then Y.
pub fn orthogonal_split_trial(n: u64, rng: &mut ChaCha12Rng) -> SplitTrial {
    let len = 2 * n as usize;
    let half = n as usize;
    let x: Vec<f64> = (0..len).map(|_| standard_normal(rng)).collect();
    let y: Vec<f64> = (0..len).map(|_| standard_normal(rng)).collect();
    let mut out = SplitTrial {
        x1_norm2: 0.0,
        x_norm2: 0.0,
        y_norm2: 0.0,
        x1y1: 0.0,
        x2y2: 0.0,
        xy: 0.0,
    };
    for i in 0..len {
        out.x_norm2 += x[i] * x[i];
        out.y_norm2 += y[i] * y[i];
        let prod = x[i] * y[i];
        out.xy += prod;
        if i < half {
            out.x1_norm2 += x[i] * x[i];
            out.x1y1 += prod;
        } else {
            out.x2y2 += prod;
        }
    }
    out
}

/// One dataset file entry in a simulation manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub index: u64,
    pub file: String,
    pub records: u64,
}

/// Companion calibration files generated with a dataset, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub vacuum_file: String,
    pub electronic_file: String,
    pub records: u64,
}

/// Manifest written alongside every generated dataset: the model, grid,
/// seed, and block layout needed to reproduce or consume the files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub model: ChannelModel,
    pub dig: DigitizationSpec,
    pub seed: u64,
    pub n_total: u64,
    pub blocks: Vec<BlockEntry>,
    #[serde(default)]
    pub calibration: Option<CalibrationEntry>,
}

impl DatasetManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json =
            serde_json::to_string_pretty(self).map_err(|e| SimulatorError::ManifestFormat {
                path: path.to_path_buf(),
                source: e,
            })?;
        std::fs::write(path, json + "\n").map_err(|e| SimulatorError::ManifestIo {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimulatorError::ManifestIo {
            path: path.to_path_buf(),
            source: e,
        })?;
        serde_json::from_str(&text).map_err(|e| SimulatorError::ManifestFormat {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

/// The experiment's reference parameter set (Table 1 of the measurement
/// campaign this crate models): 20 km fiber, trusted receiver.
pub fn reference_channel() -> ChannelModel {
    ChannelModel {
        eta: 0.35,
        u: 6.30e-3,
        tau: 0.69,
        t: 25.71e-3,
        mu: 1.45,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(data: &QuadratureDataset) -> (f64, f64, f64) {
        let n = data.len() as f64;
        let x: f64 = data
            .tx_q
            .iter()
            .chain(&data.tx_p)
            .map(|v| v * v)
            .sum::<f64>()
            / (2.0 * n);
        let y: f64 = data
            .rx_q
            .iter()
            .chain(&data.rx_p)
            .map(|v| v * v)
            .sum::<f64>()
            / (2.0 * n);
        let z: f64 = data
            .tx_q
            .iter()
            .zip(&data.rx_q)
            .chain(data.tx_p.iter().zip(&data.rx_p))
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / (2.0 * n);
        (x, y, z)
    }

    #[test]
    fn identity_channel_moments() {
        let model = ChannelModel {
            eta: 1.0,
            u: 0.0,
            tau: 1.0,
            t: 0.0,
            mu: 1.45,
        };
        let dig = DigitizationSpec::default();
        let n = 200_000;
        let data = generate_symbols(n, &model, &dig, &SeededStream::new(7, 0)).unwrap();
        let (x, _y, z) = moments(&data);
        // identity channel: z/x = sqrt(tau eta) = 1 within statistical noise
        assert!((z / x - 1.0).abs() < 5e-3, "z/x = {}", z / x);
    }

    #[test]
    fn tx_variance_matches_mu() {
        let model = reference_channel();
        let dig = DigitizationSpec::default();
        let n = 1_000_000u64;
        let data = generate_symbols(n, &model, &dig, &SeededStream::new(42, 3)).unwrap();
        let (x, y, _) = moments(&data);
        // three standard errors of a chi-square mean with 2n terms, plus
        // digitization bias below 1e-3 relative
        let se = model.mu * (1.0 / n as f64).sqrt();
        assert!((x - model.mu).abs() < 3.0 * se + 1e-3 * model.mu, "x = {x}");
        let y_model = model.expected_rx_variance();
        let se_y = y_model * (1.0 / n as f64).sqrt();
        assert!(
            (y - y_model).abs() < 3.0 * se_y + 1e-3 * y_model,
            "y = {y} vs {y_model}"
        );
    }

    #[test]
    fn digitization_bias_is_small() {
        let model = reference_channel();
        let dig = DigitizationSpec::default();
        let n = 2_000_000u64;
        let stream = SeededStream::new(9, 1);
        let dig_data = generate_symbols(n, &model, &dig, &stream).unwrap();
        let raw_data = generate_symbols_raw(n, &model, &dig, &stream).unwrap();
        let (xd, yd, _) = moments(&dig_data);
        let (xr, yr, _) = moments(&raw_data);
        // same underlying draws, so the quantization bias is isolated
        assert!((xd / xr - 1.0).abs() < 1e-3, "tx bias {}", xd / xr - 1.0);
        assert!((yd / yr - 1.0).abs() < 1e-3, "rx bias {}", yd / yr - 1.0);
    }

    #[test]
    fn reproducible_bit_exact() {
        let model = reference_channel();
        let dig = DigitizationSpec::default();
        let a = generate_symbols(5_000, &model, &dig, &SeededStream::new(1234, 5)).unwrap();
        let b = generate_symbols(5_000, &model, &dig, &SeededStream::new(1234, 5)).unwrap();
        assert_eq!(a, b);
        let c = generate_symbols(5_000, &model, &dig, &SeededStream::new(1234, 6)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn calibration_statistics() {
        let (vac, elec) = generate_calibration(200_000, 0.0, &SeededStream::new(3, 0)).unwrap();
        assert!(elec.variance() == 0.0);
        assert!((vac.variance() - 1.0).abs() < 0.01);
        let t_true = 25.71e-3;
        let (vac, elec) = generate_calibration(500_000, t_true, &SeededStream::new(3, 1)).unwrap();
        let t_hat = 1.0 / (1.0 - elec.variance() / vac.variance()) - 1.0;
        // 3 standard errors of the ratio estimator
        let se = 3.0 * (1.0 + t_true) / (500_000f64).sqrt();
        assert!((t_hat - t_true).abs() < se, "t_hat = {t_hat}");
    }

    #[test]
    fn split_trial_symmetry() {
        let mut rng = SeededStream::new(11, 0).rng();
        let trials = 20_000;
        let n = 50u64;
        let mut ratio_sum = 0.0;
        for _ in 0..trials {
            let t = orthogonal_split_trial(n, &mut rng);
            ratio_sum += t.x1_norm2 / t.x_norm2;
            assert!(t.x1_norm2 <= t.x_norm2);
            assert!((t.x1y1 + t.x2y2 - t.xy).abs() < 1e-9 * t.xy.abs().max(1.0));
        }
        let mean_ratio = ratio_sum / trials as f64;
        // E[||X1||^2 / ||X||^2] = 1/2 with sd ~ 1/sqrt(8n) per trial
        let se = 3.0 / ((8 * n) as f64).sqrt() / (trials as f64).sqrt();
        assert!((mean_ratio - 0.5).abs() < se, "mean ratio {mean_ratio}");
    }

    #[test]
    fn digitizer_grid() {
        let spec = DigitizationSpec {
            bits: 2,
            range_sigmas: 8.0,
        };
        let g = Digitizer::new(&spec, 1.0);
        // half range 4, 4 bins of width 2, centers -3, -1, 1, 3
        assert_eq!(g.index(-10.0), 0);
        assert_eq!(g.index(10.0), 3);
        assert_eq!(g.quantize(-0.5), -1.0);
        assert_eq!(g.quantize(0.5), 1.0);
        assert_eq!(g.quantize(-100.0), -3.0);
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        let m = DatasetManifest {
            model: reference_channel(),
            dig: DigitizationSpec::default(),
            seed: 99,
            n_total: 1000,
            blocks: vec![BlockEntry {
                index: 0,
                file: "block_000.cvq".into(),
                records: 1000,
            }],
            calibration: None,
        };
        m.save(&path).unwrap();
        assert_eq!(DatasetManifest::load(&path).unwrap(), m);
    }
}
