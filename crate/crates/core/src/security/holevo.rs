//! Holevo information of the collective eavesdropper for the trusted
//! heterodyne receiver, computed in the Gaussian covariance formalism.
//!
//! Entangling-cloner picture, shot-noise units: the transmitted thermal
//! ensemble purifies to a two-mode squeezed state of variance a = 2 mu + 1
//! whose signal arm crosses the untrusted channel, giving the joint
//! covariance blocks a I, b I and c sigma_z with b = 2 eta mu + 2 eta u + 1
//! and c = sqrt(eta (a^2 - 1)). The eavesdropper purifies that state, so
//! S(E) = S(AB). The trusted detector is a beamsplitter of transmissivity
//! tau mixing with one arm of a two-mode squeezed ancilla of variance
//! v_d = 1 + 2 t / (1 - tau); heterodyning the transmitted port leaves the
//! conditional state of (A, reflected port, ancilla idler) pure together
//! with E, so S(E|Y) is the entropy of its Schur-complement covariance.
#![allow(clippy::neg_cmp_op_on_partial_ord)] // !(x >= 0) deliberately rejects NaN

use nalgebra::DMatrix;

use super::{g_function, SecurityError};
use crate::estimation::TrustedReceiver;

type Result<T> = std::result::Result<T, SecurityError>;

/// Symplectic eigenvalues of a 2m x 2m covariance matrix in interleaved
/// (q1, p1, q2, p2, ...) ordering.
///
/// Every covariance matrix in this crate is phase-insensitive: no q-p
/// mixing, so V splits into V_q (+) V_p and the symplectic spectrum is
/// nu_j^2 = eig(sqrt(V_q) V_p sqrt(V_q)), a chain of two symmetric
/// eigenproblems (no nonsymmetric Schur iteration, which can stall on the
/// degenerate +-i spectra these matrices produce).
fn symplectic_eigenvalues(v: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = v.nrows();
    debug_assert!(dim.is_multiple_of(2) && v.ncols() == dim);
    let m = dim / 2;
    let mut vq = DMatrix::zeros(m, m);
    let mut vp = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            vq[(i, j)] = v[(2 * i, 2 * j)];
            vp[(i, j)] = v[(2 * i + 1, 2 * j + 1)];
            debug_assert!(
                v[(2 * i, 2 * j + 1)] == 0.0 && v[(2 * i + 1, 2 * j)] == 0.0,
                "covariance matrix mixes q and p quadratures"
            );
        }
    }
    // symmetric square root of V_q
    let eig_q = vq.symmetric_eigen();
    let mut sq = DMatrix::zeros(m, m);
    for k in 0..m {
        let lambda = eig_q.eigenvalues[k];
        if lambda < -1e-9 {
            return Err(SecurityError::UnphysicalCovariance { nu: lambda });
        }
        let root = lambda.max(0.0).sqrt();
        let col = eig_q.eigenvectors.column(k);
        for i in 0..m {
            for j in 0..m {
                sq[(i, j)] += root * col[i] * col[j];
            }
        }
    }
    let prod = &sq * &vp * &sq;
    let sym = 0.5 * (&prod + prod.transpose());
    let mut out: Vec<f64> = sym
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for nu in &mut out {
        if *nu < 1.0 - 1e-6 {
            return Err(SecurityError::UnphysicalCovariance { nu: *nu });
        }
        *nu = nu.max(1.0);
    }
    Ok(out)
}

fn entropy_of(v: &DMatrix<f64>) -> Result<f64> {
    Ok(symplectic_eigenvalues(v)?.into_iter().map(g_function).sum())
}

/// Two-mode covariance entries (a, b, c) implied by the channel parameters.
fn channel_covariance(mu: f64, eta: f64, u: f64) -> (f64, f64, f64) {
    let a = 2.0 * mu + 1.0;
    let b = 2.0 * eta * mu + 2.0 * eta * u + 1.0;
    let c = (eta * (a * a - 1.0)).sqrt();
    (a, b, c)
}

fn check_params(mu: f64, eta: f64, u: f64) -> Result<()> {
    let ok = mu >= 0.0 && mu.is_finite() && eta > 0.0 && eta <= 1.0 && u >= 0.0 && u.is_finite();
    if ok {
        Ok(())
    } else {
        Err(SecurityError::Domain {
            what: "holevo_bound",
            detail: format!("unphysical parameters mu={mu}, eta={eta}, u={u}"),
        })
    }
}

/// Holevo bound chi(Y;E) for an ideal (untrusted) heterodyne receiver,
/// tau = 1 and t = 0. Closed two-mode form.
pub fn holevo_bound_untrusted(mu: f64, eta: f64, u: f64) -> Result<f64> {
    check_params(mu, eta, u)?;
    if mu == 0.0 {
        return Ok(0.0);
    }
    let (a, b, c) = channel_covariance(mu, eta, u);
    let v_ab = two_mode_matrix(a, b, c);
    let s_e = entropy_of(&v_ab)?;
    // heterodyne conditioning: V_{A|y} = (a - c^2/(b+1)) I
    let nu_cond = a - c * c / (b + 1.0);
    if nu_cond < 1.0 - 1e-6 {
        return Err(SecurityError::UnphysicalCovariance { nu: nu_cond });
    }
    let s_cond = g_function(nu_cond.max(1.0));
    Ok((s_e - s_cond).max(0.0))
}

fn two_mode_matrix(a: f64, b: f64, c: f64) -> DMatrix<f64> {
    let mut v = DMatrix::zeros(4, 4);
    v[(0, 0)] = a;
    v[(1, 1)] = a;
    v[(2, 2)] = b;
    v[(3, 3)] = b;
    v[(0, 2)] = c;
    v[(2, 0)] = c;
    v[(1, 3)] = -c;
    v[(3, 1)] = -c;
    v
}

/// Holevo bound chi(Y;E) for the trusted heterodyne receiver.
pub fn holevo_bound(mu: f64, eta: f64, u: f64, receiver: &TrustedReceiver) -> Result<f64> {
    check_params(mu, eta, u)?;
    if mu == 0.0 {
        return Ok(0.0);
    }
    let tau = receiver.tau;
    let t = receiver.t;
    if tau >= 1.0 && t > 1e-12 {
        return Err(SecurityError::Domain {
            what: "holevo_bound",
            detail: format!(
                "tau = 1 with trusted noise t = {t} has no beamsplitter dilation; \
                 the pure-loss limit requires t = 0"
            ),
        });
    }
    let (a, b, c) = channel_covariance(mu, eta, u);
    let v_ab = two_mode_matrix(a, b, c);
    let s_e = entropy_of(&v_ab)?;

    // detector ancilla: two-mode squeezed state whose reflected arm carries
    // the trusted noise; t = 0 degenerates to vacuum for any tau
    let v_d = if t == 0.0 {
        1.0
    } else {
        1.0 + 2.0 * t / (1.0 - tau)
    };
    let rt = tau.sqrt();
    let rr = (1.0 - tau).sqrt();
    let d_corr = (v_d * v_d - 1.0).max(0.0).sqrt();

    // mode order: A, B' (measured), D1' (reflected), D2 (idler)
    let mut v4 = DMatrix::zeros(8, 8);
    let set_block = |m: &mut DMatrix<f64>, i: usize, j: usize, diag: f64, sz: f64| {
        m[(2 * i, 2 * j)] = diag + sz;
        m[(2 * i + 1, 2 * j + 1)] = diag - sz;
        if i != j {
            m[(2 * j, 2 * i)] = diag + sz;
            m[(2 * j + 1, 2 * i + 1)] = diag - sz;
        }
    };
    set_block(&mut v4, 0, 0, a, 0.0);
    set_block(&mut v4, 1, 1, tau * b + (1.0 - tau) * v_d, 0.0);
    set_block(&mut v4, 2, 2, (1.0 - tau) * b + tau * v_d, 0.0);
    set_block(&mut v4, 3, 3, v_d, 0.0);
    set_block(&mut v4, 0, 1, 0.0, rt * c); // A-B': sqrt(tau) c sigma_z
    set_block(&mut v4, 0, 2, 0.0, -rr * c); // A-D1'
    set_block(&mut v4, 1, 2, (v_d - b) * rt * rr, 0.0); // B'-D1'
    set_block(&mut v4, 1, 3, 0.0, rr * d_corr); // B'-D2
    set_block(&mut v4, 2, 3, 0.0, rt * d_corr); // D1'-D2

    // heterodyne on B': V_cond = V_kept - C (V_B' + I)^-1 C^T
    let kept = [0usize, 1, 4, 5, 6, 7];
    let meas = [2usize, 3];
    let beta = v4[(2, 2)];
    let mut v_cond = DMatrix::zeros(6, 6);
    for (ri, &i) in kept.iter().enumerate() {
        for (rj, &j) in kept.iter().enumerate() {
            let mut corr = 0.0;
            for &m in &meas {
                corr += v4[(i, m)] * v4[(j, m)];
            }
            v_cond[(ri, rj)] = v4[(i, j)] - corr / (beta + 1.0);
        }
    }
    let s_cond = entropy_of(&v_cond)?;
    let chi = s_e - s_cond;
    debug_assert!(chi > -1e-9, "chi = {chi}");
    Ok(chi.max(0.0))
}
