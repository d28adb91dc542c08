//! Symmetric logarithmic derivative and quantum Fisher information.
//!
//! The SLD `G` solves `(rho G + G rho)/2 = drho`. In the eigenbasis of
//! `rho` with spectrum `p` the solution is elementwise,
//! `G_ij = 2 drho_ij / (p_i + p_j)`, with the null-space components set to
//! zero (any completion there leaves `Tr{G^2 rho}` unchanged). The quantum
//! Fisher information is `F = Tr{G^2 rho} = Tr{G drho}`.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::linalg::{
    commutator_derivative, dagger, eigh, left_mul, max_abs, trace_product,
    two_mode_basis_change, two_mode_basis_restore,
};
use super::state::{auto_cutoff, coherent_state, lossy_pair, squeezed_vacuum, two_mode_product};
use super::{generator_h, FockOperator, FockState, OracleOptions};
use crate::analytic::InputSpec;
use crate::error::{Error, Result};

/// Eigenvalue pairs with `p_i + p_j` below this fraction of the largest
/// eigenvalue are treated as null space.
const NULL_SPACE_CUTOFF: f64 = 1e-10;

/// An SLD solution together with the residual of the defining equation.
#[derive(Debug, Clone)]
pub struct Sld {
    /// The (Hermitian, minimal-norm) SLD operator.
    pub operator: FockOperator,
    /// Max-entry residual of `(rho G + G rho)/2 - drho`, top Fock level
    /// excluded.
    pub residual: f64,
}

/// Everything [`super::analyze`] reports for one parameter point.
#[derive(Debug, Clone, Copy)]
pub struct SensitivityReport {
    /// Quantum Fisher information from the eigenbasis sum.
    pub qfi: f64,
    /// Sensitivity of the SLD used as an explicit estimator,
    /// `|d<G>/dphi|^2 / var(G)`. Equals the QFI up to numerics.
    pub estimator_sensitivity: f64,
    /// Residual of the SLD equation.
    pub sld_residual: f64,
    /// Per-mode cutoff actually used.
    pub cutoff_used: usize,
    /// Combined truncated probability weight of the two-mode state.
    pub tail_mass: f64,
}

/// Solves the SLD equation for an arbitrary state and Hermitian `drho` via
/// a full eigendecomposition of `rho`. For the structured two-mode states
/// of this crate, [`super::analyze`] is much faster.
pub fn sld(state: &FockState, drho: &FockOperator) -> Result<Sld> {
    if drho.dim() != state.dim() {
        return Err(Error::CutoffMismatch(drho.dim(), state.dim()));
    }
    if !drho.is_hermitian() {
        return Err(Error::NotHermitian(super::hermitian_deviation(
            drho.matrix(),
        )));
    }
    let (w, v) = eigh(state.matrix())?;
    let p: Vec<f64> = w.iter().map(|&x| x.max(0.0)).collect();
    let t = dagger(&v).dot(&left_mul(drho.matrix(), &v));
    let g_eig = solve_in_eigenbasis(&t, &p, &p);
    let g = v.dot(&g_eig.dot(&dagger(&v)));
    let op = FockOperator::from_matrix(hermitize(&g), state.cutoff(), state.modes())?;
    let residual = sld_residual(state, &op, drho);
    Ok(Sld {
        operator: op,
        residual,
    })
}

fn hermitize(m: &Array2<C64>) -> Array2<C64> {
    let mut out = m.clone();
    out += &dagger(m);
    out.mapv_inplace(|v| v * 0.5);
    out
}

/// `G_ij = 2 t_ij / (p_i + q_j)` where the eigenvalue sum clears the
/// null-space threshold, zero elsewhere. Row eigenvalues `p`, column
/// eigenvalues `q` (identical for a plain eigenbasis solve).
fn solve_in_eigenbasis(t: &Array2<C64>, p: &[f64], q: &[f64]) -> Array2<C64> {
    let p_max = p
        .iter()
        .chain(q.iter())
        .fold(0.0f64, |acc, &x| acc.max(x));
    let eps = NULL_SPACE_CUTOFF * p_max;
    let mut g = Array2::<C64>::zeros(t.dim());
    for i in 0..p.len() {
        for j in 0..q.len() {
            let denom = p[i] + q[j];
            if denom > eps {
                g[(i, j)] = t[(i, j)] * (2.0 / denom);
            }
        }
    }
    g
}

/// Max-entry residual of `(rho g + g rho)/2 - drho`.
///
/// Entries touching the top Fock level of any mode are excluded: ladder
/// operators are inexact there, so the generator-derived `drho` itself
/// carries a truncation artifact on that rim.
pub fn sld_residual(state: &FockState, g: &FockOperator, drho: &FockOperator) -> f64 {
    let mut res = left_mul(state.matrix(), g.matrix());
    res += &left_mul(g.matrix(), state.matrix());
    res.mapv_inplace(|v| v * 0.5);
    res -= drho.matrix();

    let d = state.cutoff();
    let top = |idx: usize| -> bool {
        if state.modes() == 1 {
            idx == d - 1
        } else {
            idx / d == d - 1 || idx % d == d - 1
        }
    };
    let n = res.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        if top(i) {
            continue;
        }
        for j in 0..n {
            if !top(j) {
                dev = dev.max(res[(i, j)].norm());
            }
        }
    }
    dev
}

/// `Tr{g^2 rho}`, the Fisher information attained by the SLD `g`.
pub fn qfi(state: &FockState, g: &FockOperator) -> f64 {
    let g_rho = left_mul(g.matrix(), state.matrix());
    trace_product(g.matrix(), &g_rho).re
}

/// Sensitivity of the Hermitian estimator `a` at the working point:
/// `|Tr{a (-i[h, rho])}|^2 / var(a)` with `var(a) = <a^2> - <a>^2`.
///
/// This is the inverse mean-square error of the locally unbiased estimate
/// built from `a`; it is bounded above by the quantum Fisher information.
pub fn estimator_sensitivity(
    state: &FockState,
    a: &FockOperator,
    h: &FockOperator,
) -> Result<f64> {
    if a.dim() != state.dim() || h.dim() != state.dim() {
        return Err(Error::CutoffMismatch(a.dim(), state.dim()));
    }
    if !a.is_hermitian() {
        return Err(Error::NotHermitian(super::hermitian_deviation(a.matrix())));
    }
    let drho = commutator_derivative(h.matrix(), state.matrix());
    let slope = trace_product(a.matrix(), &drho).re;
    let mean = trace_product(a.matrix(), state.matrix()).re;
    let a_rho = left_mul(a.matrix(), state.matrix());
    let second = trace_product(a.matrix(), &a_rho).re;
    let var = second - mean * mean;
    let floor = 1e-14 * (1.0 + max_abs(a.matrix()).powi(2));
    if var <= floor {
        return Err(Error::ZeroVarianceEstimator(var));
    }
    Ok(slope * slope / var)
}

pub(crate) fn analyze(spec: &InputSpec, opts: &OracleOptions) -> Result<SensitivityReport> {
    let budget = opts.truncation_budget;
    let cutoff = auto_cutoff(spec.alpha(), spec.r(), budget)?;
    if cutoff > opts.cutoff_cap {
        // rebuild the failing input at the cap so the error carries the
        // actual tail mass
        coherent_state(spec.alpha(), opts.cutoff_cap, budget)?;
        squeezed_vacuum(spec.r(), opts.cutoff_cap, budget)?;
        unreachable!("auto_cutoff disagrees with the state builders");
    }

    let (rho1, rho2) = lossy_pair(spec, cutoff)?;
    let rho = two_mode_product(&rho1, &rho2)?;
    let h = generator_h(cutoff);
    let drho_m = commutator_derivative(h.matrix(), rho.matrix());

    // The product structure keeps the eigenproblem at single-mode size:
    // rho = rho1 (x) rho2 diagonalizes in the product of the factor
    // eigenbases, and only drho needs the O(d^4) basis change.
    let (w1, v1) = eigh(rho1.matrix())?;
    let (w2, v2) = eigh(rho2.matrix())?;
    let p: Vec<f64> = w1
        .iter()
        .flat_map(|&a| w2.iter().map(move |&b| (a * b).max(0.0)))
        .collect();

    let t = two_mode_basis_change(&drho_m, &v1, &v2);
    let p_max = p.iter().fold(0.0f64, |acc, &x| acc.max(x));
    let eps = NULL_SPACE_CUTOFF * p_max;
    let n = t.nrows();
    let mut qfi_sum = 0.0f64;
    let mut g_eig = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let denom = p[i] + p[j];
            if denom > eps {
                qfi_sum += 2.0 * t[(i, j)].norm_sqr() / denom;
                g_eig[(i, j)] = t[(i, j)] * (2.0 / denom);
            }
        }
    }

    let g_m = hermitize(&two_mode_basis_restore(&g_eig, &v1, &v2));
    let g = FockOperator::from_matrix(g_m, cutoff, 2)?;
    let drho = FockOperator::from_matrix(drho_m, cutoff, 2)?;
    let residual = sld_residual(&rho, &g, &drho);
    let est = estimator_sensitivity(&rho, &g, &h)?;

    Ok(SensitivityReport {
        qfi: qfi_sum,
        estimator_sensitivity: est,
        sld_residual: residual,
        cutoff_used: cutoff,
        tail_mass: rho.tail_mass(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::fock::{self, number};
    use approx::assert_relative_eq;

    #[test]
    fn pure_state_sld_is_twice_drho() {
        // For pure states (rho^2 = rho) the SLD is G = 2 drho.
        let d = 16;
        let c = coherent_state(0.9, d, 1e-10).unwrap();
        let s = squeezed_vacuum(0.5, d, 1e-6).unwrap();
        let rho = two_mode_product(&c, &s).unwrap();
        let h = generator_h(d);
        let drho = fock::derivative(&rho, &h).unwrap();
        let solved = sld(&rho, &drho).unwrap();
        let dev = max_abs(&(solved.operator.matrix() - &drho.matrix().mapv(|v| v * 2.0)));
        assert!(dev < 1e-8, "pure-state SLD deviates by {dev:.3e}");
        assert!(solved.residual < 1e-10);
    }

    #[test]
    fn diagonal_qubit_hand_check() {
        // rho = diag(0.75, 0.25), drho = off-diagonal coupling; then
        // G = 2 drho / (p0 + p1) = 2 drho and F = 4 |c|^2.
        let mut rho_m = Array2::<C64>::zeros((2, 2));
        rho_m[(0, 0)] = C64::new(0.75, 0.0);
        rho_m[(1, 1)] = C64::new(0.25, 0.0);
        let rho = FockState::from_matrix(rho_m, 2, 1, 0.0).unwrap();
        let mut d_m = Array2::<C64>::zeros((2, 2));
        d_m[(0, 1)] = C64::new(0.0, 0.3);
        d_m[(1, 0)] = C64::new(0.0, -0.3);
        let drho = FockOperator::from_matrix(d_m, 2, 1).unwrap();

        let solved = sld(&rho, &drho).unwrap();
        assert_relative_eq!(
            solved.operator.matrix()[(0, 1)].im,
            0.6,
            max_relative = 1e-12
        );
        assert_relative_eq!(qfi(&rho, &solved.operator), 0.36, max_relative = 1e-12);
    }

    #[test]
    fn analyze_matches_closed_form_at_one_point() {
        let spec = analytic::InputSpec::new(1.0, 0.6, 0.2).unwrap();
        let report = fock::analyze(&spec, &fock::OracleOptions::default()).unwrap();
        let f = analytic::fisher_information(&spec);
        assert_relative_eq!(report.qfi, f, max_relative = 1e-5);
        assert_relative_eq!(report.estimator_sensitivity, report.qfi, max_relative = 1e-6);
        assert!(report.sld_residual < 1e-8);
    }

    #[test]
    fn number_operator_sensitivity_is_bounded_by_qfi() {
        let spec = analytic::InputSpec::new(0.8, 0.4, 0.1).unwrap();
        let (r1, r2) = lossy_pair(&spec, 14).unwrap();
        let rho = two_mode_product(&r1, &r2).unwrap();
        let h = generator_h(14);
        let a = fock::on_mode2(&number(14));
        let s = estimator_sensitivity(&rho, &a, &h).unwrap();
        let f = analytic::fisher_information(&spec);
        assert!(s <= f * (1.0 + 1e-6), "sensitivity {s} exceeds QFI {f}");
    }

    #[test]
    fn zero_variance_estimator_is_rejected() {
        let d = 8;
        let vac = coherent_state(0.0, d, 1e-12).unwrap();
        let rho = two_mode_product(&vac, &vac).unwrap();
        let h = generator_h(d);
        // photon number has zero variance on vacuum
        let a = fock::on_mode1(&number(d));
        assert!(matches!(
            estimator_sensitivity(&rho, &a, &h),
            Err(Error::ZeroVarianceEstimator(_))
        ));
    }
}
