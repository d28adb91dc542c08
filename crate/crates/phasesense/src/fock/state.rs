//! State preparation and channels on the truncated Fock space.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::linalg::{expm_hermitian, kron, left_mul, right_mul, dagger};
use super::{FockOperator, FockState};
use crate::analytic::InputSpec;
use crate::error::{Error, Result};

/// Hard ceiling on automatic cutoff search.
const MAX_CUTOFF: usize = 4096;

/// Inner cutoff used while preparing lossy single-mode states, so that the
/// matrix elements surviving the final crop are exact rather than polluted
/// by the truncation of the channel input.
const PREPARATION_TAIL: f64 = 1e-14;

fn coherent_amplitudes(alpha: f64, cutoff: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(cutoff);
    let mut cur = (-alpha * alpha / 2.0).exp();
    for n in 0..cutoff {
        if n > 0 {
            cur *= alpha / (n as f64).sqrt();
        }
        c.push(cur);
    }
    c
}

fn squeezed_amplitudes(r: f64, cutoff: usize) -> Vec<f64> {
    let mut c = vec![0.0; cutoff];
    let t = r.tanh();
    let mut cur = 1.0 / r.cosh().sqrt();
    let mut n = 0;
    while n < cutoff {
        c[n] = cur;
        let k = (n / 2 + 1) as f64;
        cur *= -t * ((2.0 * k - 1.0) / (2.0 * k)).sqrt();
        n += 2;
    }
    c
}

fn pure_state_from_amplitudes(
    amps: Vec<f64>,
    cutoff: usize,
    budget: f64,
) -> Result<FockState> {
    let kept: f64 = amps.iter().map(|a| a * a).sum();
    let tail = (1.0 - kept).max(0.0);
    if tail > budget {
        return Err(Error::CutoffTooSmall {
            cutoff,
            tail,
            budget,
        });
    }
    let norm = kept.sqrt();
    let mut m = Array2::<C64>::zeros((cutoff, cutoff));
    for (i, &ai) in amps.iter().enumerate() {
        for (j, &aj) in amps.iter().enumerate() {
            m[(i, j)] = C64::new(ai * aj / (norm * norm), 0.0);
        }
    }
    Ok(FockState {
        matrix: m,
        cutoff,
        modes: 1,
        tail_mass: tail,
    })
}

/// Coherent state `|alpha>` (alpha real) as a density matrix, renormalized
/// after truncation. Fails if the Poisson tail beyond the cutoff exceeds
/// `budget`.
pub fn coherent_state(alpha: f64, cutoff: usize, budget: f64) -> Result<FockState> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha,
            range: "[0, inf)",
        });
    }
    pure_state_from_amplitudes(coherent_amplitudes(alpha, cutoff), cutoff, budget)
}

/// Squeezed vacuum `S(r)|vac>` as a density matrix; only even photon
/// numbers are populated.
pub fn squeezed_vacuum(r: f64, cutoff: usize, budget: f64) -> Result<FockState> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain {
            name: "r",
            value: r,
            range: "[0, inf)",
        });
    }
    pure_state_from_amplitudes(squeezed_amplitudes(r, cutoff), cutoff, budget)
}

/// Smallest per-mode cutoff such that both the coherent input `|alpha>` and
/// the squeezed input `S(r)|vac>` carry truncated tail mass below `budget`.
/// Loss only moves population downwards, so the same cutoff is sufficient
/// for the lossy states.
pub fn auto_cutoff(alpha: f64, r: f64, budget: f64) -> Result<usize> {
    if !(budget > 0.0) {
        return Err(Error::Domain {
            name: "budget",
            value: budget,
            range: "(0, 1)",
        });
    }
    let mut coh_kept = 0.0f64;
    let mut coh_p = (-alpha * alpha).exp();
    let lam = alpha * alpha;

    let t2 = r.tanh() * r.tanh();
    let mut sq_kept = 0.0f64;
    let mut sq_p = 1.0 / r.cosh();

    let mut coh_done_at = None;
    let mut sq_done_at = None;
    for d in 1..=MAX_CUTOFF {
        let n = d - 1; // level added when the cutoff grows to d
        if n > 0 {
            coh_p *= lam / n as f64;
        }
        coh_kept += coh_p;
        if coh_done_at.is_none() && 1.0 - coh_kept < budget {
            coh_done_at = Some(d);
        }
        if n % 2 == 0 {
            if n > 0 {
                let k = (n / 2) as f64;
                sq_p *= t2 * (2.0 * k - 1.0) / (2.0 * k);
            }
            sq_kept += sq_p;
        }
        if sq_done_at.is_none() && 1.0 - sq_kept < budget {
            sq_done_at = Some(d);
        }
        if let (Some(a), Some(b)) = (coh_done_at, sq_done_at) {
            return Ok(a.max(b));
        }
    }
    Err(Error::CutoffTooSmall {
        cutoff: MAX_CUTOFF,
        tail: (1.0 - coh_kept).max(1.0 - sq_kept),
        budget,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    let mut acc = 1.0f64;
    for j in 0..k {
        acc *= (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// `sqrt(C(n, k) (1-sigma)^{n-k} sigma^k)`, the nonzero matrix element of
/// the damping Kraus operator `K_k` at column `n`.
fn kraus_coeff(n: usize, k: usize, sigma: f64) -> f64 {
    (binomial(n, k) * (1.0 - sigma).powi((n - k) as i32) * sigma.powi(k as i32)).sqrt()
}

fn check_sigma_closed(sigma: f64) -> Result<()> {
    if !sigma.is_finite() || !(0.0..=1.0).contains(&sigma) {
        return Err(Error::Domain {
            name: "sigma",
            value: sigma,
            range: "[0, 1]",
        });
    }
    Ok(())
}

fn loss_single_mode(m: &Array2<C64>, sigma: f64) -> Array2<C64> {
    let d = m.nrows();
    let mut out = Array2::<C64>::zeros((d, d));
    for k in 0..d {
        if sigma == 0.0 && k > 0 {
            break;
        }
        let coeff: Vec<f64> = (0..d)
            .map(|n| if n >= k { kraus_coeff(n, k, sigma) } else { 0.0 })
            .collect();
        for row in k..d {
            let cr = coeff[row];
            if cr == 0.0 {
                continue;
            }
            for col in k..d {
                let cc = coeff[col];
                if cc == 0.0 {
                    continue;
                }
                out[(row - k, col - k)] += m[(row, col)] * (cr * cc);
            }
        }
    }
    out
}

pub(crate) fn loss_two_mode(m: &Array2<C64>, d: usize, mode: usize, sigma: f64) -> Array2<C64> {
    let n = d * d;
    let mut out = Array2::<C64>::zeros((n, n));
    for k in 0..d {
        if sigma == 0.0 && k > 0 {
            break;
        }
        let coeff: Vec<f64> = (0..d)
            .map(|q| if q >= k { kraus_coeff(q, k, sigma) } else { 0.0 })
            .collect();
        for row in 0..n {
            let (r1, r2) = (row / d, row % d);
            let rq = if mode == 0 { r1 } else { r2 };
            if rq < k || coeff[rq] == 0.0 {
                continue;
            }
            let row_out = if mode == 0 { row - k * d } else { row - k };
            for col in 0..n {
                let (c1, c2) = (col / d, col % d);
                let cq = if mode == 0 { c1 } else { c2 };
                if cq < k || coeff[cq] == 0.0 {
                    continue;
                }
                let col_out = if mode == 0 { col - k * d } else { col - k };
                out[(row_out, col_out)] += m[(row, col)] * (coeff[rq] * coeff[cq]);
            }
        }
    }
    out
}

/// Photon-loss channel with loss fraction `sigma`, applied to every mode of
/// the state. Trace preserving and completely positive by construction.
pub fn loss_channel(state: &FockState, sigma: f64) -> Result<FockState> {
    check_sigma_closed(sigma)?;
    let mut m = loss_single_or_first(state, sigma);
    if state.modes == 2 {
        m = loss_two_mode(&m, state.cutoff, 1, sigma);
    }
    Ok(FockState {
        matrix: m,
        cutoff: state.cutoff,
        modes: state.modes,
        tail_mass: state.tail_mass,
    })
}

fn loss_single_or_first(state: &FockState, sigma: f64) -> Array2<C64> {
    if state.modes == 1 {
        loss_single_mode(&state.matrix, sigma)
    } else {
        loss_two_mode(&state.matrix, state.cutoff, 0, sigma)
    }
}

/// Photon-loss channel acting on a single mode (0 or 1) of a two-mode state.
pub fn loss_channel_on_mode(state: &FockState, mode: usize, sigma: f64) -> Result<FockState> {
    check_sigma_closed(sigma)?;
    if state.modes != 2 {
        return Err(Error::ModeMismatch {
            expected: 2,
            got: state.modes,
        });
    }
    if mode > 1 {
        return Err(Error::Domain {
            name: "mode",
            value: mode as f64,
            range: "{0, 1}",
        });
    }
    let m = loss_two_mode(&state.matrix, state.cutoff, mode, sigma);
    Ok(FockState {
        matrix: m,
        cutoff: state.cutoff,
        modes: 2,
        tail_mass: state.tail_mass,
    })
}

/// Kronecker product `rho1 (x) rho2` in mode-1-major ordering.
pub fn two_mode_product(rho1: &FockState, rho2: &FockState) -> Result<FockState> {
    if rho1.cutoff != rho2.cutoff {
        return Err(Error::CutoffMismatch(rho1.cutoff, rho2.cutoff));
    }
    if rho1.modes != 1 || rho2.modes != 1 {
        return Err(Error::ModeMismatch {
            expected: 1,
            got: rho1.modes.max(rho2.modes),
        });
    }
    let m = kron(&rho1.matrix, &rho2.matrix);
    let tail = rho1.tail_mass + rho2.tail_mass - rho1.tail_mass * rho2.tail_mass;
    Ok(FockState {
        matrix: m,
        cutoff: rho1.cutoff,
        modes: 2,
        tail_mass: tail,
    })
}

/// Partial trace of a two-mode state; `keep` selects the surviving mode.
pub fn partial_trace(state: &FockState, keep: usize) -> Result<FockState> {
    if state.modes != 2 {
        return Err(Error::ModeMismatch {
            expected: 2,
            got: state.modes,
        });
    }
    let d = state.cutoff;
    let mut out = Array2::<C64>::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                acc += if keep == 0 {
                    state.matrix[(i * d + k, j * d + k)]
                } else {
                    state.matrix[(k * d + i, k * d + j)]
                };
            }
            out[(i, j)] = acc;
        }
    }
    Ok(FockState {
        matrix: out,
        cutoff: d,
        modes: 1,
        tail_mass: state.tail_mass,
    })
}

/// `exp(-i phi h) rho exp(+i phi h)`.
pub fn phase_shifted(state: &FockState, h: &FockOperator, phi: f64) -> Result<FockState> {
    if h.dim() != state.dim() {
        return Err(Error::CutoffMismatch(h.dim(), state.dim()));
    }
    if !h.hermitian {
        return Err(Error::NotHermitian(super::hermitian_deviation(&h.matrix)));
    }
    if phi == 0.0 {
        return Ok(state.clone());
    }
    let u = expm_hermitian(&h.matrix, phi)?;
    let m = right_mul(&left_mul(&u, &state.matrix), &dagger(&u));
    Ok(FockState {
        matrix: m,
        cutoff: state.cutoff,
        modes: state.modes,
        tail_mass: state.tail_mass,
    })
}

fn crop(state: &FockState, cutoff: usize) -> FockState {
    assert_eq!(state.modes, 1);
    assert!(cutoff <= state.cutoff);
    let m = state
        .matrix
        .slice(ndarray::s![..cutoff, ..cutoff])
        .to_owned();
    let trace: f64 = m.diag().iter().map(|v| v.re).sum();
    FockState {
        matrix: m,
        cutoff,
        modes: 1,
        tail_mass: (1.0 - trace).max(0.0),
    }
}

/// Lossy single-mode input pair `(rho1, rho2)` at the requested cutoff.
///
/// Both states are prepared at an enlarged inner cutoff and cropped after
/// the loss channel, so the surviving block holds the exact matrix elements
/// of the lossy states; the only truncation effect is the recorded tail.
pub fn lossy_pair(spec: &InputSpec, cutoff: usize) -> Result<(FockState, FockState)> {
    let inner = auto_cutoff(spec.alpha(), spec.r(), PREPARATION_TAIL)
        .unwrap_or(MAX_CUTOFF)
        .clamp(cutoff, cutoff + 128);
    let coh = coherent_state(spec.alpha(), inner, 1.0)?;
    let sq = squeezed_vacuum(spec.r(), inner, 1.0)?;
    let rho1 = crop(&loss_channel(&coh, spec.sigma())?, cutoff);
    let rho2 = crop(&loss_channel(&sq, spec.sigma())?, cutoff);
    Ok((rho1, rho2))
}
