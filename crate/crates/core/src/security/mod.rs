//! Composable key-length computation: the epsilon budget, the projection
//! correction for discarded reconciliation frames, the smooth-min-entropy
//! (AEP) penalty, the Holevo bound, and the assembled key length
//!
//!   l = n' [H(Y) - chi] - leak - log2(n') sqrt(2 n' log2(2/eps_ent))
//!       - sqrt(n') Daep((p/3) eps_s^2, d) + log2(p - (p/3) eps_s^2)
//!       + 2 log2(sqrt(2) eps_h)
//!
//! with everything in bits (base-2 logs throughout).
#![allow(clippy::neg_cmp_op_on_partial_ord)] // !(x >= 0) deliberately rejects NaN

mod holevo;

pub use holevo::{holevo_bound, holevo_bound_untrusted};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimation::{ChannelParams, EntropyEstimate, EstimationError};

/// Errors from the security-layer computations.
#[derive(Debug, Error)]
pub enum SecurityError {
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },
    #[error("covariance matrix is unphysical: symplectic eigenvalue {nu} < 1")]
    UnphysicalCovariance { nu: f64 },
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}

type Result<T> = std::result::Result<T, SecurityError>;

/// The seven security parameters of the composable key-length statement.
/// Their sum is the overall failure probability of the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityBudget {
    pub eps_h: f64,
    pub eps_s: f64,
    pub eps_ent: f64,
    pub eps_pe: f64,
    pub eps_cal: f64,
    pub eps_ir: f64,
    pub eps_qrng: f64,
}

impl Default for SecurityBudget {
    /// The reference budget: 1e-10 for hashing, smoothing, entropy
    /// estimation, parameter estimation and calibration, 1e-12 for
    /// reconciliation correctness, 2e-6 for the randomness source.
    fn default() -> Self {
        Self {
            eps_h: 1e-10,
            eps_s: 1e-10,
            eps_ent: 1e-10,
            eps_pe: 1e-10,
            eps_cal: 1e-10,
            eps_ir: 1e-12,
            eps_qrng: 2e-6,
        }
    }
}

impl SecurityBudget {
    pub fn components(&self) -> [(&'static str, f64); 7] {
        [
            ("eps_h", self.eps_h),
            ("eps_s", self.eps_s),
            ("eps_ent", self.eps_ent),
            ("eps_pe", self.eps_pe),
            ("eps_cal", self.eps_cal),
            ("eps_ir", self.eps_ir),
            ("eps_qrng", self.eps_qrng),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.components() {
            if !(v > 0.0 && v < 1.0) {
                return Err(SecurityError::Domain {
                    what: "SecurityBudget",
                    detail: format!("{name} must be in (0,1), got {v}"),
                });
            }
        }
        let total = self.total_epsilon();
        if !(total < 1.0) {
            return Err(SecurityError::Domain {
                what: "SecurityBudget",
                detail: format!("total epsilon {total} must be < 1"),
            });
        }
        Ok(())
    }

    /// Overall composable security parameter: the plain sum of the seven
    /// components.
    pub fn total_epsilon(&self) -> f64 {
        self.components().iter().map(|(_, v)| v).sum()
    }
}

/// Information-reconciliation outcome entering the key-length computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrOutcome {
    /// Per-frame success probability, 1 - FER.
    pub p_success: f64,
    /// Symbols surviving reconciliation.
    pub n_prime: u64,
    /// Total bits leaked over the classical channel.
    pub leak_bits: u64,
    /// Reconciliation efficiency (reporting only).
    pub beta: f64,
}

impl IrOutcome {
    /// Build from the raw symbol count and frame error rate; surviving
    /// symbols are floor(n (1 - fer)).
    pub fn new(n: u64, fer: f64, leak_bits: u64, beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&fer) {
            return Err(SecurityError::Domain {
                what: "IrOutcome",
                detail: format!("FER must be in [0,1), got {fer}"),
            });
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(SecurityError::Domain {
                what: "IrOutcome",
                detail: format!("beta must be in (0,1], got {beta}"),
            });
        }
        let p_success = 1.0 - fer;
        let n_prime = (n as f64 * p_success).floor() as u64;
        if n_prime < 2 {
            return Err(SecurityError::Domain {
                what: "IrOutcome",
                detail: format!("n' = {n_prime} after reconciliation is too small"),
            });
        }
        Ok(Self {
            p_success,
            n_prime,
            leak_bits,
            beta,
        })
    }
}

/// Reconciliation leakage model for simulation sweeps: the syndrome traffic
/// of a code at efficiency beta over a channel with the given per-symbol
/// mutual information, leak = n' (h_hat - beta log2(1 + snr)) bits.
///
/// This is a modeling choice, not a measured quantity: real systems report
/// their actual leaked bits, which this helper only approximates.
pub fn leak_from_reconciliation(n_prime: u64, beta: f64, h_hat: f64, snr: f64) -> Result<u64> {
    if !(beta > 0.0 && beta <= 1.0) || !(snr >= 0.0) || !(h_hat >= 0.0) {
        return Err(SecurityError::Domain {
            what: "leak_from_reconciliation",
            detail: format!("invalid beta={beta}, snr={snr}, h_hat={h_hat}"),
        });
    }
    let per_symbol = (h_hat - beta * (1.0 + snr).log2()).max(0.0);
    Ok((n_prime as f64 * per_symbol).ceil() as u64)
}

/// Smooth-min-entropy penalty bound Daep(delta, d) = 4 (d+1) sqrt(log2(2/delta^2)).
///
/// `d` is the receiver's bit resolution per quadrature; the exact penalty
/// 4 sqrt(l(delta)) log2(2^d + 2) is dominated by this closed form for all
/// d >= 2 (the alphabet bound v <= 2^d + 2 uses the nonnegativity of the
/// conditional min-entropy for the measured classical-quantum state).
pub fn aep_penalty(delta: f64, d: u32) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(SecurityError::Domain {
            what: "aep_penalty",
            detail: format!("delta must be in (0,1), got {delta}"),
        });
    }
    if d < 2 {
        return Err(SecurityError::Domain {
            what: "aep_penalty",
            detail: format!("bit resolution d must be >= 2, got {d}"),
        });
    }
    Ok(4.0 * (d as f64 + 1.0) * (1.0 - 2.0 * delta.log2()).sqrt())
}

/// Projection correction for discarding failed reconciliation frames:
/// returns the replacement smoothing parameter (p/3) eps_s^2 and the
/// log-correction log2(p - (p/3) eps_s^2) <= 0 bits.
pub fn ir_projection_terms(p_success: f64, eps_s: f64) -> Result<(f64, f64)> {
    if !(p_success > 0.0 && p_success <= 1.0) {
        return Err(SecurityError::Domain {
            what: "ir_projection_terms",
            detail: format!("success probability must be in (0,1], got {p_success}"),
        });
    }
    if !(eps_s > 0.0 && eps_s < 1.0) {
        return Err(SecurityError::Domain {
            what: "ir_projection_terms",
            detail: format!("eps_s must be in (0,1), got {eps_s}"),
        });
    }
    let smoothing = p_success / 3.0 * eps_s * eps_s;
    let correction = (p_success - smoothing).log2();
    Ok((smoothing, correction))
}

/// Bosonic entropy function g(nu) in bits:
/// ((nu+1)/2) log2((nu+1)/2) - ((nu-1)/2) log2((nu-1)/2), g(1) = 0.
pub fn g_function(nu: f64) -> f64 {
    debug_assert!(nu >= 1.0 - 1e-9, "unphysical symplectic eigenvalue {nu}");
    if nu <= 1.0 {
        return 0.0;
    }
    let xp = (nu + 1.0) / 2.0;
    let xm = (nu - 1.0) / 2.0;
    xp * xp.log2() - xm * xm.log2()
}

/// Fully itemized key-length result. Field names are a stable interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyLengthReport {
    pub n_prime: u64,
    /// Entropy estimate of the digitized receiver symbols, bits/symbol.
    pub h_hat_bits: f64,
    /// Holevo bound used, bits/symbol.
    pub holevo_bits: f64,
    /// Reconciliation leakage, total bits.
    pub leak_bits: f64,
    /// sqrt(n') Daep penalty, total bits.
    pub aep_penalty_bits: f64,
    /// log2(n') sqrt(2 n' log2(2/eps_ent)) penalty, total bits.
    pub entropy_penalty_bits: f64,
    /// log2(p - (p/3) eps_s^2) projection correction, bits (<= 0).
    pub ir_projection_bits: f64,
    /// 2 log2(sqrt(2) eps_h) hashing penalty, bits (<= 0).
    pub hash_penalty_bits: f64,
    /// Signed bound before flooring; negative means no key at this size.
    pub pre_floor_bound_bits: f64,
    /// max(0, floor(pre_floor_bound_bits)).
    pub key_length: u64,
    /// Secret key fraction, key_length / n_prime, bits per complex symbol.
    pub skf: f64,
    /// Overall composable epsilon of the statement.
    pub total_epsilon: f64,
    /// Worst-case channel parameters behind `holevo_bits`, when applicable.
    pub worst_case_params: Option<ChannelParams>,
}

/// Assemble the composable key length from its components.
///
/// `chi_bits` is the Holevo bound per complex symbol (normally from
/// `holevo_bound` at the worst-case channel parameters) and `d` the bit
/// resolution per quadrature; the entropy estimate must cover the same n'
/// and the 2^(2d) alphabet.
pub fn key_length(
    ir: &IrOutcome,
    entropy: &EntropyEstimate,
    chi_bits: f64,
    budget: &SecurityBudget,
    d: u32,
    worst_case_params: Option<ChannelParams>,
) -> Result<KeyLengthReport> {
    budget.validate()?;
    if !(chi_bits >= 0.0) || !chi_bits.is_finite() {
        return Err(SecurityError::Domain {
            what: "key_length",
            detail: format!("chi must be nonnegative and finite, got {chi_bits}"),
        });
    }
    if entropy.n_prime != ir.n_prime {
        return Err(SecurityError::Inconsistent(format!(
            "entropy estimate over n' = {} but reconciliation produced n' = {}",
            entropy.n_prime, ir.n_prime
        )));
    }
    if entropy.num_bins != 1usize << (2 * d) {
        return Err(SecurityError::Inconsistent(format!(
            "entropy alphabet {} bins does not match 2^(2 d) = {}",
            entropy.num_bins,
            1usize << (2 * d)
        )));
    }
    let n = ir.n_prime as f64;
    let (smoothing, ir_projection_bits) = ir_projection_terms(ir.p_success, budget.eps_s)?;
    let aep_penalty_bits = n.sqrt() * aep_penalty(smoothing, d)?;
    let entropy_penalty_bits = n.log2() * (2.0 * n * (2.0 / budget.eps_ent).log2()).sqrt();
    let hash_penalty_bits = 1.0 + 2.0 * budget.eps_h.log2();
    let leak_bits = ir.leak_bits as f64;

    let pre_floor =
        n * (entropy.h_hat - chi_bits) - leak_bits - entropy_penalty_bits - aep_penalty_bits
            + ir_projection_bits
            + hash_penalty_bits;
    let key_length = if pre_floor > 0.0 {
        pre_floor.floor() as u64
    } else {
        0
    };

    Ok(KeyLengthReport {
        n_prime: ir.n_prime,
        h_hat_bits: entropy.h_hat,
        holevo_bits: chi_bits,
        leak_bits,
        aep_penalty_bits,
        entropy_penalty_bits,
        ir_projection_bits,
        hash_penalty_bits,
        pre_floor_bound_bits: pre_floor,
        key_length,
        skf: key_length as f64 / n,
        total_epsilon: budget.total_epsilon(),
        worst_case_params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::TrustedReceiver;

    const G_1P2: f64 = 0.483_446_685_613_664_6;

    #[test]
    fn g_function_known_values() {
        assert_eq!(g_function(1.0), 0.0);
        assert_eq!(g_function(3.0), 2.0);
        assert!((g_function(1.2) - G_1P2).abs() < 1e-15);
        // small-argument series: g(1+e) ~ (e/2)(log2(2/e) + 1/ln2) + O(e^2 log e)
        let e: f64 = 1e-6;
        let series = e / 2.0 * ((2.0 / e).log2() + 1.0 / std::f64::consts::LN_2);
        assert!((g_function(1.0 + e) - series).abs() < 1e-9);
        // strictly increasing
        let mut last = 0.0;
        for i in 1..50 {
            let v = g_function(1.0 + i as f64 * 0.25);
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn aep_bound_dominates_exact_penalty() {
        // exact: 4 sqrt(l(delta)) log2(2^d + 2),
        // l(delta) = -log2(1 - sqrt(1 - delta^2)) via the stable form
        // 1 - sqrt(1-x) = x / (1 + sqrt(1-x))
        for delta in [1e-12f64, 1e-10, 1e-6, 1e-3, 0.1] {
            for d in 2..=16u32 {
                let d2 = delta * delta;
                let one_minus = d2 / (1.0 + (1.0 - d2).sqrt());
                let ell = -(one_minus.log2());
                let exact = 4.0 * ell.sqrt() * ((2f64.powi(d as i32) + 2.0).log2());
                let bound = aep_penalty(delta, d).unwrap();
                assert!(bound >= exact, "delta={delta} d={d}: {bound} < {exact}");
            }
        }
    }

    #[test]
    fn aep_penalty_values_and_monotonicity() {
        let p = 0.9964;
        let eps_s = 1e-10;
        let delta = p / 3.0 * eps_s * eps_s;
        let v = aep_penalty(delta, 6).unwrap();
        let expected = 4.0 * 7.0 * (1.0 - 2.0 * delta.log2()).sqrt();
        assert_eq!(v, expected);
        assert!((v - 327.0).abs() < 2.0, "{v}");
        for d in 2..16 {
            assert!(aep_penalty(0.01, d + 1).unwrap() > aep_penalty(0.01, d).unwrap());
        }
        assert!(aep_penalty(0.0, 6).is_err());
        assert!(aep_penalty(1.0, 6).is_err());
        assert!(aep_penalty(0.5, 1).is_err());
    }

    #[test]
    fn ir_projection_known_values() {
        let (s, c) = ir_projection_terms(1.0, 1e-10).unwrap();
        assert!((s - 1e-20 / 3.0).abs() < 1e-35);
        assert!(c.abs() < 1e-15, "{c}");
        let (_, c) = ir_projection_terms(0.9964, 1e-10).unwrap();
        assert!((c - 0.9964f64.log2()).abs() < 1e-12);
        assert!((c + 0.0052).abs() < 1e-4, "{c}");
        let (_, c) = ir_projection_terms(0.5, 1e-10).unwrap();
        assert!((c + 1.0).abs() < 1e-12, "{c}");
        assert!(c <= 0.0);
    }

    #[test]
    fn holevo_limiting_cases() {
        // lossless, noiseless channel and ideal receiver: Eve decoupled
        let rx = TrustedReceiver::from_parameters(1.0, 0.0).unwrap();
        let chi = holevo_bound(1.45, 1.0, 0.0, &rx).unwrap();
        assert!(chi <= 1e-9, "{chi}");
        // no signal
        let rx = TrustedReceiver::from_parameters(0.69, 0.0257).unwrap();
        assert_eq!(holevo_bound(0.0, 0.35, 0.0063, &rx).unwrap(), 0.0);
        // untrusted closed form at the reference point (hand-checked value)
        let chi = holevo_bound_untrusted(1.45, 0.35, 6.3e-3).unwrap();
        assert!((chi - 0.4056).abs() < 0.002, "{chi}");
        // trusted receiver weakens Eve's conditioning
        let rx = TrustedReceiver::from_parameters(0.69, 25.71e-3).unwrap();
        let chi_tr = holevo_bound(1.45, 0.35, 6.3e-3, &rx).unwrap();
        assert!(chi_tr > 0.0 && chi_tr < chi, "{chi_tr} vs {chi}");
    }

    #[test]
    fn holevo_trusted_path_reduces_to_untrusted() {
        let rx = TrustedReceiver::from_parameters(1.0, 0.0).unwrap();
        for (mu, eta, u) in [(1.45, 0.35, 6.3e-3), (0.6, 0.9, 0.0), (2.0, 0.1, 0.02)] {
            let general = holevo_bound(mu, eta, u, &rx).unwrap();
            let closed = holevo_bound_untrusted(mu, eta, u).unwrap();
            assert!(
                (general - closed).abs() < 1e-9,
                "({mu},{eta},{u}): {general} vs {closed}"
            );
        }
    }

    #[test]
    fn holevo_monotone_in_noise_and_signal() {
        let rx = TrustedReceiver::from_parameters(0.69, 25.71e-3).unwrap();
        let mut last = -1.0;
        for i in 0..10 {
            let u = i as f64 * 2e-3;
            let chi = holevo_bound(1.45, 0.35, u, &rx).unwrap();
            assert!(chi > last, "not increasing at u={u}");
            last = chi;
        }
        let mut last = -1.0;
        for i in 1..8 {
            let chi = holevo_bound(0.4 * i as f64, 0.35, 6.3e-3, &rx).unwrap();
            assert!(chi > last, "not increasing at mu index {i}");
            last = chi;
        }
    }

    #[test]
    fn holevo_rejects_tau_one_with_noise() {
        let rx = TrustedReceiver::from_parameters(1.0, 0.01).unwrap();
        assert!(holevo_bound(1.45, 0.35, 6.3e-3, &rx).is_err());
    }

    #[test]
    fn total_epsilon_composition() {
        let b = SecurityBudget::default();
        let expected = 2e-6 + 5.0 * 1e-10 + 1e-12;
        assert!((b.total_epsilon() - expected).abs() < 1e-20);
        assert!(b.total_epsilon() >= 2e-6);
        let tiny = SecurityBudget {
            eps_h: 1e-10,
            eps_s: 1e-300,
            eps_ent: 1e-300,
            eps_pe: 1e-300,
            eps_cal: 1e-300,
            eps_ir: 1e-300,
            eps_qrng: 1e-300,
        };
        assert!((tiny.total_epsilon() - 1e-10) / 1e-10 < 1e-12);
        let bad = SecurityBudget {
            eps_h: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    fn synthetic_entropy(n_prime: u64, h_hat: f64) -> EntropyEstimate {
        EntropyEstimate {
            h_hat,
            penalty: 0.0,
            n_prime,
            num_bins: 4096,
        }
    }

    #[test]
    fn key_length_synthetic_arithmetic() {
        // n' = 1e9, H = 4, chi = 3, leak = 5e8, reference epsilons, d = 6
        let n: u64 = 1_000_000_000;
        let ir = IrOutcome {
            p_success: 1.0,
            n_prime: n,
            leak_bits: 500_000_000,
            beta: 0.916,
        };
        let budget = SecurityBudget::default();
        let report = key_length(&ir, &synthetic_entropy(n, 4.0), 3.0, &budget, 6, None).unwrap();

        // independent arithmetic
        let nf = n as f64;
        let smoothing: f64 = 1.0 / 3.0 * 1e-20;
        let aep = nf.sqrt() * 4.0 * 7.0 * (1.0f64 - 2.0 * smoothing.log2()).sqrt();
        let ent = nf.log2() * (2.0 * nf * 2e10f64.log2()).sqrt();
        let expected = nf * (4.0 - 3.0) - 5e8 - ent - aep
            + (1.0f64 - smoothing).log2()
            + 1.0
            + 2.0 * 1e-10f64.log2();
        assert!(
            (report.pre_floor_bound_bits - expected).abs() < 1e-6 * expected.abs(),
            "{} vs {expected}",
            report.pre_floor_bound_bits
        );
        assert_eq!(report.key_length, expected.floor() as u64);
        assert!((report.skf - report.key_length as f64 / nf).abs() < 1e-15);
    }

    #[test]
    fn key_length_floors_at_zero() {
        let n: u64 = 1_000_000;
        let ir = IrOutcome {
            p_success: 1.0,
            n_prime: n,
            leak_bits: 0,
            beta: 0.9,
        };
        let budget = SecurityBudget::default();
        // chi equals the entropy: penalties push the bound negative
        let report = key_length(&ir, &synthetic_entropy(n, 4.0), 4.0, &budget, 6, None).unwrap();
        assert!(report.pre_floor_bound_bits < 0.0);
        assert_eq!(report.key_length, 0);
        assert_eq!(report.skf, 0.0);
    }

    #[test]
    fn key_length_monotonicity() {
        let budget = SecurityBudget::default();
        let base = |chi: f64, leak: u64, n: u64| {
            let ir = IrOutcome {
                p_success: 0.9964,
                n_prime: n,
                leak_bits: leak,
                beta: 0.916,
            };
            key_length(&ir, &synthetic_entropy(n, 10.0), chi, &budget, 6, None)
                .unwrap()
                .pre_floor_bound_bits
        };
        assert!(base(0.3, 100, 1_000_000) > base(0.4, 100, 1_000_000));
        assert!(base(0.3, 100, 1_000_000) > base(0.3, 10_000, 1_000_000));
        assert!(base(0.3, 100, 2_000_000) > base(0.3, 100, 1_000_000));
    }

    #[test]
    fn key_length_consistency_checks() {
        let budget = SecurityBudget::default();
        let ir = IrOutcome {
            p_success: 1.0,
            n_prime: 1000,
            leak_bits: 0,
            beta: 0.9,
        };
        // mismatched n'
        let bad = EntropyEstimate {
            h_hat: 4.0,
            penalty: 0.0,
            n_prime: 999,
            num_bins: 4096,
        };
        assert!(key_length(&ir, &bad, 1.0, &budget, 6, None).is_err());
        // mismatched alphabet
        let bad = EntropyEstimate {
            h_hat: 4.0,
            penalty: 0.0,
            n_prime: 1000,
            num_bins: 1024,
        };
        assert!(key_length(&ir, &bad, 1.0, &budget, 6, None).is_err());
        // entropy penalty helper equals the total form scaled by n'
        let n = 984_000_000u64;
        let per = crate::estimation::entropy_penalty(n, 1e-10).unwrap();
        let total = (n as f64).log2() * (2.0 * n as f64 * 2e10f64.log2()).sqrt();
        assert!((per * n as f64 - total).abs() < 1e-6 * total);
    }

    #[test]
    fn leak_model_helper() {
        let leak = leak_from_reconciliation(1_000_000, 0.916, 10.45, 0.34).unwrap();
        let expected = 1_000_000.0 * (10.45_f64 - 0.916 * 1.34f64.log2());
        assert!(
            (leak as f64 - expected).abs() <= 1.0,
            "{leak} vs {expected}"
        );
        // efficiency 1 over a perfect channel cannot leak negatively
        assert_eq!(leak_from_reconciliation(100, 1.0, 0.0, 1000.0).unwrap(), 0);
    }
}
