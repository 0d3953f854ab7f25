//! Independent Fock-basis oracle for the Holevo bound.
//!
//! Instead of symplectic eigenvalues, this evaluates the two entropies from
//! explicit truncated-Fock-space states (cutoff 40 photons per state mode):
//!
//! - The joint transmitter/channel-output state is built by applying the
//!   Kraus operators of the thermal-loss channel (pure loss of transmissivity
//!   eta0 = eta/G followed by an amplifier of gain G = 1 + eta u) to one arm
//!   of the two-mode squeezed purification of the modulation ensemble. Each
//!   Kraus pair (k photons lost, j photons added) maps the squeezed state to
//!   a pure "stripe" vector, and the spectrum of the mixture is the spectrum
//!   of the Gram matrix of those vectors, block-diagonal in the photon-number
//!   difference.
//! - Conditioning on the trusted heterodyne outcome alpha = 0 (the
//!   conditional spectrum is outcome-independent) multiplies each stripe
//!   amplitude by the vacuum-projected beamsplitter coefficient against the
//!   detector's two-mode squeezed ancilla; the ancilla sums appear in closed
//!   per-occupation weights w(M).
//!
//! Everything here is test-only arithmetic: log-space coefficients, small
//! symmetric eigenproblems, no shared code with the production path beyond
//! nalgebra's eigensolver.

use nalgebra::DMatrix;

/// Photon-number cutoff per state mode.
const NCUT: usize = 40;
/// Cap on the detector-ancilla summation index.
const MCUT: usize = 400;

struct LnFactorial(Vec<f64>);

impl LnFactorial {
    fn new(max: usize) -> Self {
        let mut v = vec![0.0; max + 1];
        for k in 1..=max {
            v[k] = v[k - 1] + (k as f64).ln();
        }
        Self(v)
    }

    fn ln_choose(&self, n: usize, k: usize) -> f64 {
        self.0[n] - self.0[k] - self.0[n - k]
    }
}

/// One Kraus branch (k photons lost, j photons gained): amplitudes over the
/// transmitter photon number n, with channel-output occupation n - k + j.
struct Branch {
    k: usize,
    j: usize,
    /// coeffs[n] for n in 0..=NCUT (zero when n < k or n - k + j > NCUT)
    coeffs: Vec<f64>,
}

impl Branch {
    fn offset(&self) -> i64 {
        self.j as i64 - self.k as i64
    }
}

fn build_branches(mu: f64, eta: f64, u: f64, lf: &LnFactorial) -> Vec<Branch> {
    let lambda2 = mu / (mu + 1.0); // squeezing parameter^2 of the purification
    let gain = 1.0 + eta * u;
    let eta0 = eta / gain;
    let ln_lambda2 = lambda2.ln();
    let ln_norm = (1.0 - lambda2).ln();
    let ln_eta0 = eta0.ln();
    let ln_1m_eta0 = if eta0 < 1.0 {
        (1.0 - eta0).ln()
    } else {
        f64::NEG_INFINITY
    };
    let ln_gain = gain.ln();
    let ln_amp = if gain > 1.0 {
        (1.0 - 1.0 / gain).ln()
    } else {
        f64::NEG_INFINITY
    };

    let mut branches = Vec::new();
    for k in 0..=NCUT {
        if k > 0 && ln_1m_eta0 == f64::NEG_INFINITY {
            break;
        }
        for j in 0..=NCUT {
            if j > 0 && ln_amp == f64::NEG_INFINITY {
                break;
            }
            let mut coeffs = vec![0.0; NCUT + 1];
            let mut any = false;
            #[allow(clippy::needless_range_loop)] // n is the photon number, not just an index
            for n in k..=NCUT {
                let m_out = n - k + j;
                if m_out > NCUT {
                    continue;
                }
                // TMSV amplitude, loss Kraus K_k, amplifier Kraus A_j
                let ln_c = 0.5 * ln_norm
                    + 0.5 * (n as f64) * ln_lambda2
                    + 0.5
                        * (lf.ln_choose(n, k)
                            + (k as f64) * ln_1m_eta0.max(-1e300)
                            + ((n - k) as f64) * ln_eta0)
                    + 0.5
                        * (lf.ln_choose(m_out, j) + (j as f64) * ln_amp.max(-1e300)
                            - ((n - k + 1) as f64) * ln_gain);
                let c = ln_c.exp();
                if c > 0.0 {
                    coeffs[n] = c;
                    any = true;
                }
            }
            if any {
                branches.push(Branch { k, j, coeffs });
            }
        }
    }
    branches
}

/// Entropy (bits) of the normalized spectrum of sum_b |psi_b><psi_b| where
/// the Gram entries are sum_n c1[n] c2[n] w(n + d) for branches of equal
/// photon-number offset d. `weight[M]` is w(M), with w = 1 for the
/// unconditioned state.
fn gram_entropy(branches: &[Branch], weight: &dyn Fn(usize) -> f64) -> f64 {
    let mut eigs: Vec<f64> = Vec::new();
    let mut offsets: Vec<i64> = branches.iter().map(|b| b.offset()).collect();
    offsets.sort_unstable();
    offsets.dedup();
    for d in offsets {
        let idx: Vec<usize> = (0..branches.len())
            .filter(|&i| branches[i].offset() == d)
            .collect();
        let m = idx.len();
        let mut gram = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in a..m {
                let ba = &branches[idx[a]];
                let bb = &branches[idx[b]];
                let mut s = 0.0;
                let lo = ba.k.max(bb.k);
                for n in lo..=NCUT {
                    let ca = ba.coeffs[n];
                    let cb = bb.coeffs[n];
                    if ca != 0.0 && cb != 0.0 {
                        let m_out = (n as i64 + d) as usize;
                        s += ca * cb * weight(m_out);
                    }
                }
                gram[(a, b)] = s;
                gram[(b, a)] = s;
            }
        }
        for lambda in gram.symmetric_eigen().eigenvalues.iter() {
            if *lambda > 0.0 {
                eigs.push(*lambda);
            }
        }
    }
    let total: f64 = eigs.iter().sum();
    let mut h = 0.0;
    for e in eigs {
        let q = e / total;
        if q > 0.0 {
            h -= q * q.log2();
        }
    }
    h
}

/// Holevo information chi(Y;E) = S(AB) - S(A D1' D2 | y) from the truncated
/// Fock representation.
pub fn holevo_fock(mu: f64, eta: f64, u: f64, tau: f64, t: f64) -> f64 {
    let lf = LnFactorial::new(2 * NCUT + MCUT + 2);
    let branches = build_branches(mu, eta, u, &lf);

    let s_ab = gram_entropy(&branches, &|_| 1.0);

    // Detector ancilla: two-mode squeezed state of variance
    // v_d = 1 + 2 t / (1 - tau); the vacuum-outcome weights are
    // w(M) = (1 - ld2) (1-tau)^M sum_m C(M+m, M) (ld2 tau)^m.
    let v_d = if t == 0.0 {
        1.0
    } else {
        1.0 + 2.0 * t / (1.0 - tau)
    };
    let ld2 = (v_d - 1.0) / (v_d + 1.0);
    let ln_ld2tau = if ld2 * tau > 0.0 {
        (ld2 * tau).ln()
    } else {
        f64::NEG_INFINITY
    };
    let ln_1m_tau = if tau < 1.0 {
        (1.0 - tau).ln()
    } else {
        f64::NEG_INFINITY
    };
    let ln_norm = (1.0 - ld2).ln();
    let weights: Vec<f64> = (0..=2 * NCUT)
        .map(|big_m| {
            if big_m > 0 && ln_1m_tau == f64::NEG_INFINITY {
                return 0.0;
            }
            let mut w = 0.0;
            for m in 0..=MCUT {
                if m > 0 && ln_ld2tau == f64::NEG_INFINITY {
                    break;
                }
                let ln_term = ln_norm
                    + (big_m as f64) * ln_1m_tau.max(-1e300)
                    + lf.ln_choose(big_m + m, big_m)
                    + (m as f64) * ln_ld2tau.max(-1e300);
                w += ln_term.exp();
            }
            w
        })
        .collect();
    let s_cond = gram_entropy(&branches, &|m| weights[m]);

    s_ab - s_cond
}
