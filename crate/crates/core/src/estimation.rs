//! Parameter estimation: empirical moments, receiver calibration, discretized
//! entropy estimation, and extraction of the untrusted channel parameters.
//!
//! All estimators work in the shot-noise-normalized heterodyne-data units of
//! the simulator: vacuum contributes unit variance per quadrature and a mean
//! photon number adds one-for-one, so the receiver model reads
//! y = tau eta (mu + u) + t + 1 and the covariance z = sqrt(tau eta) mu.
#![allow(clippy::neg_cmp_op_on_partial_ord)] // !(x >= 0) deliberately rejects NaN

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::confidence::{self, ConfidenceError, IntervalMethod};
use crate::dataset::QuadratureDataset;
use crate::simulator::{DigitizationSpec, Digitizer};

/// Errors from estimation-stage computations.
#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },
    #[error("empty dataset")]
    EmptyDataset,
    #[error(
        "calibration too noisy: lower shot-noise bound {v_shot_minus:.6e} is not positive at this confidence"
    )]
    CalibrationTooNoisy { v_shot_minus: f64 },
    #[error("receiver variance {y_hat:.6} is below the vacuum floor of 1")]
    BelowVacuumFloor { y_hat: f64 },
    #[error("implied untrusted efficiency {eta:.6} is outside (0, 1]")]
    UnphysicalEta { eta: f64 },
    #[error("implied untrusted excess noise {u:.6e} is negative beyond tolerance")]
    NegativeExcessNoise { u: f64 },
    #[error(transparent)]
    Confidence(#[from] ConfidenceError),
}

type Result<T> = std::result::Result<T, EstimationError>;

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

/// Empirical second moments of a quadrature dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimates {
    /// Transmitter per-quadrature variance.
    pub x_hat: f64,
    /// Receiver per-quadrature variance.
    pub y_hat: f64,
    /// Transmitter/receiver covariance.
    pub z_hat: f64,
    /// Number of complex symbols behind the estimates.
    pub n: u64,
}

impl MomentEstimates {
    pub fn validate(&self) -> Result<()> {
        if self.x_hat < 0.0 || self.y_hat < 0.0 {
            return Err(EstimationError::Domain {
                what: "MomentEstimates",
                detail: format!(
                    "negative variance: x_hat={}, y_hat={}",
                    self.x_hat, self.y_hat
                ),
            });
        }
        // Cauchy-Schwarz with numerical slack
        if self.z_hat.abs() > (self.x_hat * self.y_hat).sqrt() + 1e-9 {
            return Err(EstimationError::Domain {
                what: "MomentEstimates",
                detail: format!(
                    "covariance {} exceeds Cauchy-Schwarz bound {}",
                    self.z_hat,
                    (self.x_hat * self.y_hat).sqrt()
                ),
            });
        }
        Ok(())
    }
}

/// Streaming accumulator for moments over multiple dataset blocks.
#[derive(Debug, Clone, Copy, Default)]
pub struct MomentAccumulator {
    sum_xx: f64,
    sum_yy: f64,
    sum_xy: f64,
    n: u64,
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_dataset(&mut self, data: &QuadratureDataset) {
        for i in 0..data.len() {
            let (tq, tp, rq, rp) = (data.tx_q[i], data.tx_p[i], data.rx_q[i], data.rx_p[i]);
            self.sum_xx += tq * tq + tp * tp;
            self.sum_yy += rq * rq + rp * rp;
            self.sum_xy += tq * rq + tp * rp;
        }
        self.n += data.len() as u64;
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn finalize(&self) -> Result<MomentEstimates> {
        if self.n == 0 {
            return Err(EstimationError::EmptyDataset);
        }
        let two_n = 2.0 * self.n as f64;
        let est = MomentEstimates {
            x_hat: self.sum_xx / two_n,
            y_hat: self.sum_yy / two_n,
            z_hat: self.sum_xy / two_n,
            n: self.n,
        };
        est.validate()?;
        Ok(est)
    }
}

/// x = sum(q_tx^2 + p_tx^2)/2n, y analogously for the receiver,
/// z = sum(q_tx q_rx + p_tx p_rx)/2n.
pub fn empirical_moments(data: &QuadratureDataset) -> Result<MomentEstimates> {
    let mut acc = MomentAccumulator::new();
    acc.add_dataset(data);
    acc.finalize()
}

// ---------------------------------------------------------------------------
// Receiver calibration
// ---------------------------------------------------------------------------

/// Shot-noise and trusted-noise calibration outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotNoiseCalibration {
    /// Point estimate Var(vac) - Var(elec).
    pub v_shot_hat: f64,
    pub v_shot_plus: f64,
    pub v_shot_minus: f64,
    /// Point estimate of the trusted noise.
    pub t_hat: f64,
    /// Worst-case (lower-confidence) trusted noise used by the security
    /// analysis: less trusted noise means more is attributed to the channel.
    pub t_worst: f64,
    /// Calibration sample count (complex symbols).
    pub m: u64,
}

/// Confidence bounds on the shot noise and the worst-case trusted noise.
///
/// With delta = delta_var_gauss(m, eps_cal/4):
/// v_shot+ = (1+delta) var_vac - (1-delta) var_elec,
/// v_shot- = (1-delta) var_vac - (1+delta) var_elec,
/// t_worst = 1 / (1 - (1-delta)/(1+delta) var_elec/var_vac) - 1.
pub fn shot_noise_calibration(
    var_vac: f64,
    var_elec: f64,
    m: u64,
    eps_cal: f64,
) -> Result<ShotNoiseCalibration> {
    if !(var_vac > 0.0) || !(var_elec >= 0.0) || var_vac <= var_elec {
        return Err(EstimationError::Domain {
            what: "shot_noise_calibration",
            detail: format!("need var_vac > var_elec >= 0, got {var_vac}, {var_elec}"),
        });
    }
    let delta = confidence::delta_var_gauss(m, eps_cal / 4.0)?;
    let v_shot_hat = var_vac - var_elec;
    let v_shot_plus = (1.0 + delta) * var_vac - (1.0 - delta) * var_elec;
    let v_shot_minus = (1.0 - delta) * var_vac - (1.0 + delta) * var_elec;
    if v_shot_minus <= 0.0 {
        return Err(EstimationError::CalibrationTooNoisy { v_shot_minus });
    }
    let ratio = var_elec / var_vac;
    let t_hat = 1.0 / (1.0 - ratio) - 1.0;
    let t_worst = 1.0 / (1.0 - (1.0 - delta) / (1.0 + delta) * ratio) - 1.0;
    Ok(ShotNoiseCalibration {
        v_shot_hat,
        v_shot_plus,
        v_shot_minus,
        t_hat,
        t_worst,
        m,
    })
}

/// Calibrated trusted-receiver description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustedReceiver {
    /// Trusted efficiency (optical loss and detector quantum efficiency).
    pub tau: f64,
    /// Trusted noise in PNU (worst-case when calibrated).
    pub t: f64,
    pub v_shot_plus: f64,
    pub v_shot_minus: f64,
    /// Calibration sample count; 0 when the values are configured directly.
    pub m: u64,
}

impl TrustedReceiver {
    /// Receiver with directly configured parameters (no calibration data).
    pub fn from_parameters(tau: f64, t: f64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) || !(t >= 0.0) || !t.is_finite() {
            return Err(EstimationError::Domain {
                what: "TrustedReceiver",
                detail: format!("need tau in (0,1] and t >= 0, got tau={tau}, t={t}"),
            });
        }
        Ok(Self {
            tau,
            t,
            v_shot_plus: 1.0,
            v_shot_minus: 1.0,
            m: 0,
        })
    }

    /// Receiver built from a shot-noise calibration (worst-case t).
    pub fn from_calibration(tau: f64, cal: &ShotNoiseCalibration) -> Result<Self> {
        let mut rx = Self::from_parameters(tau, cal.t_worst)?;
        rx.v_shot_plus = cal.v_shot_plus;
        rx.v_shot_minus = cal.v_shot_minus;
        rx.m = cal.m;
        Ok(rx)
    }
}

// ---------------------------------------------------------------------------
// Entropy estimation
// ---------------------------------------------------------------------------

/// Plug-in Shannon entropy of a histogram, in bits. Zero counts contribute
/// nothing.
pub fn empirical_entropy(counts: &[u64]) -> Result<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(EstimationError::Domain {
            what: "empirical_entropy",
            detail: "all counts are zero".into(),
        });
    }
    let total = total as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let f = c as f64 / total;
            h -= f * f.log2();
        }
    }
    Ok(h)
}

/// Finite-sample entropy-estimation penalty, bits per symbol:
/// log2(n') sqrt(2 log2(2/eps_ent) / n').
///
/// `eps_ent` up to 2 is accepted (log2(2/eps) stays nonnegative there); the
/// pipeline's budget validation separately restricts it to (0, 1).
pub fn entropy_penalty(n_prime: u64, eps_ent: f64) -> Result<f64> {
    if n_prime < 2 {
        return Err(EstimationError::Domain {
            what: "entropy_penalty",
            detail: format!("n_prime must be >= 2, got {n_prime}"),
        });
    }
    if !(eps_ent > 0.0 && eps_ent <= 2.0) {
        return Err(EstimationError::Domain {
            what: "entropy_penalty",
            detail: format!("eps_ent must be in (0, 2], got {eps_ent}"),
        });
    }
    let n = n_prime as f64;
    Ok(n.log2() * (2.0 * (2.0 / eps_ent).log2() / n).sqrt())
}

/// Discretized-entropy estimate with its finite-sample penalty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    /// Plug-in entropy of the digitized complex symbols, bits per symbol.
    pub h_hat: f64,
    /// Penalty in bits per symbol (same normalization as `h_hat`).
    pub penalty: f64,
    pub n_prime: u64,
    pub num_bins: usize,
}

/// Estimate the entropy of the receiver's digitized complex symbols.
///
/// The first `n_prime` symbols are binned on the d-bit grid spanning
/// `range_sigmas` empirical standard deviations per quadrature (the same
/// grid shape the receiver applies; out-of-range samples clamp to the edge
/// bins), giving 2^(2d) complex bins.
pub fn estimate_entropy(
    data: &QuadratureDataset,
    dig: &DigitizationSpec,
    n_prime: u64,
    eps_ent: f64,
) -> Result<EntropyEstimate> {
    if data.is_empty() {
        return Err(EstimationError::EmptyDataset);
    }
    if n_prime < 2 || n_prime > data.len() as u64 {
        return Err(EstimationError::Domain {
            what: "estimate_entropy",
            detail: format!("n_prime {n_prime} outside [2, {}]", data.len()),
        });
    }
    let n = n_prime as usize;
    let mut sum = 0.0;
    for i in 0..n {
        sum += data.rx_q[i] * data.rx_q[i] + data.rx_p[i] * data.rx_p[i];
    }
    let sigma = (sum / (2.0 * n as f64)).sqrt();
    if !(sigma > 0.0) {
        return Err(EstimationError::Domain {
            what: "estimate_entropy",
            detail: "receiver samples have zero variance".into(),
        });
    }
    let grid = Digitizer::new(dig, sigma);
    let bins = 1usize << dig.bits;
    let mut counts = vec![0u64; bins * bins];
    for i in 0..n {
        let iq = grid.index(data.rx_q[i]) as usize;
        let ip = grid.index(data.rx_p[i]) as usize;
        counts[iq * bins + ip] += 1;
    }
    let h_hat = empirical_entropy(&counts)?;
    let penalty = entropy_penalty(n_prime, eps_ent)?;
    Ok(EntropyEstimate {
        h_hat,
        penalty,
        n_prime,
        num_bins: bins * bins,
    })
}

// ---------------------------------------------------------------------------
// Channel parameters
// ---------------------------------------------------------------------------

/// Untrusted channel parameters extracted from moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Untrusted transmittance.
    pub eta: f64,
    /// Untrusted excess noise, channel-input referred (PNU).
    pub u: f64,
}

/// Invert the receiver model for (eta, u).
///
/// eta = z^2 / (tau x mu) and u = (y - 1 - t - tau eta mu) / (tau eta),
/// with `mu` the calibrated modulation strength. A small negative u (down
/// to -1e-6) clamps to zero; larger violations and unphysical eta are hard
/// errors, as is a receiver variance below the vacuum floor.
pub fn channel_params(
    moments: &MomentEstimates,
    mu: f64,
    receiver: &TrustedReceiver,
) -> Result<ChannelParams> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(EstimationError::Domain {
            what: "channel_params",
            detail: format!("mu must be positive, got {mu}"),
        });
    }
    if moments.y_hat < 1.0 {
        return Err(EstimationError::BelowVacuumFloor {
            y_hat: moments.y_hat,
        });
    }
    if !(moments.x_hat > 0.0) {
        return Err(EstimationError::Domain {
            what: "channel_params",
            detail: format!("x_hat must be positive, got {}", moments.x_hat),
        });
    }
    if moments.z_hat <= 0.0 {
        return Err(EstimationError::Domain {
            what: "channel_params",
            detail: format!("covariance must be positive, got {}", moments.z_hat),
        });
    }
    let mut eta = moments.z_hat * moments.z_hat / (receiver.tau * moments.x_hat * mu);
    if eta > 1.0 {
        if eta <= 1.0 + 1e-9 {
            eta = 1.0;
        } else {
            return Err(EstimationError::UnphysicalEta { eta });
        }
    }
    if !(eta > 0.0) {
        return Err(EstimationError::UnphysicalEta { eta });
    }
    let g = receiver.tau * eta;
    let mut u = (moments.y_hat - 1.0 - receiver.t - g * mu) / g;
    if u < 0.0 {
        if u >= -1e-6 {
            u = 0.0;
        } else {
            return Err(EstimationError::NegativeExcessNoise { u });
        }
    }
    Ok(ChannelParams { eta, u })
}

/// Worst-case analysis: moments with confidence bounds substituted, plus the
/// channel parameters they imply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseAnalysis {
    /// y_hat replaced by its upper bound, z_hat by its lower bound; x_hat is
    /// transmitter-side and treated as calibrated.
    pub moments: MomentEstimates,
    pub params: ChannelParams,
}

/// Apply the parameter-estimation confidence bounds (budget `eps_pe`, split
/// internally) to the moments, then extract worst-case channel parameters.
///
/// `bound_x_hat` additionally widens the transmitter variance upward before
/// the extraction; the default pipeline leaves it off and treats the
/// modulation strength as calibrated.
pub fn worst_case_channel_params(
    moments: &MomentEstimates,
    mu: f64,
    receiver: &TrustedReceiver,
    eps_pe: f64,
    method: IntervalMethod,
    bound_x_hat: bool,
) -> Result<WorstCaseAnalysis> {
    moments.validate()?;
    let y_up = confidence::var_upper_bound(moments.y_hat, moments.n, eps_pe, method)?;
    let z_low = confidence::cov_lower_bound(
        moments.x_hat,
        moments.y_hat,
        moments.z_hat,
        moments.n,
        eps_pe,
        method,
    )?;
    let x = if bound_x_hat {
        confidence::var_upper_bound(moments.x_hat, moments.n, eps_pe, method)?
    } else {
        moments.x_hat
    };
    let wc = MomentEstimates {
        x_hat: x,
        y_hat: y_up,
        z_hat: z_low,
        n: moments.n,
    };
    let params = channel_params(&wc, mu, receiver)?;
    Ok(WorstCaseAnalysis {
        moments: wc,
        params,
    })
}
