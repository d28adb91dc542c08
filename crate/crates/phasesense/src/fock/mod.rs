//! Truncated Fock-space oracle.
//!
//! Builds the lossy two-mode state as an explicit density matrix with a
//! per-mode photon-number cutoff, computes the symmetric logarithmic
//! derivative and the quantum Fisher information from it, and evaluates the
//! sensitivity of arbitrary Hermitian estimators. None of this relies on the
//! closed forms in [`crate::analytic`]; the two paths check each other.
//!
//! Two-mode matrices use mode-1-major index ordering: the basis state
//! `|n1, n2>` sits at index `n1 * d + n2` for per-mode cutoff `d`. Ladder
//! operators are exact on levels `0..d-2`; the top level carries the usual
//! truncation artifact, and residual norms exclude it.

mod dump;
mod linalg;
mod sld;
mod state;

pub use dump::{read_matrix, write_matrix};
pub use sld::{
    estimator_sensitivity, qfi, sld, sld_residual, Sld, SensitivityReport,
};
pub use state::{
    auto_cutoff, coherent_state, loss_channel, loss_channel_on_mode, lossy_pair, partial_trace,
    phase_shifted, squeezed_vacuum, two_mode_product,
};

pub(crate) use linalg::*;
pub(crate) use state::loss_two_mode;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::analytic::InputSpec;
use crate::error::{Error, Result};

/// Tolerance for classifying an operator as Hermitian.
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;

/// A density matrix on one or two bosonic modes with an explicit per-mode
/// photon-number cutoff.
#[derive(Debug, Clone)]
pub struct FockState {
    matrix: Array2<C64>,
    cutoff: usize,
    modes: usize,
    tail_mass: f64,
}

impl FockState {
    /// Wraps a raw matrix. The dimension must be `cutoff^modes` and the
    /// matrix Hermitian within [`HERMITICITY_TOLERANCE`] (relative to its
    /// largest entry).
    pub fn from_matrix(
        matrix: Array2<C64>,
        cutoff: usize,
        modes: usize,
        tail_mass: f64,
    ) -> Result<Self> {
        let dim = cutoff.pow(modes as u32);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::CutoffMismatch(matrix.nrows(), dim));
        }
        let dev = hermitian_deviation(&matrix);
        let scale = max_abs(&matrix).max(1.0);
        if dev > HERMITICITY_TOLERANCE * scale {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self {
            matrix,
            cutoff,
            modes,
            tail_mass,
        })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Probability weight lost to truncation.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    /// `Re Tr{op rho}`.
    pub fn expectation(&self, op: &FockOperator) -> f64 {
        trace_product(&op.matrix, &self.matrix).re
    }

    /// Mean photon number, summed over modes.
    pub fn mean_photon_number(&self) -> f64 {
        let d = self.cutoff;
        let mut acc = 0.0;
        for (idx, v) in self.matrix.diag().iter().enumerate() {
            let n = if self.modes == 1 {
                idx
            } else {
                idx / d + idx % d
            };
            acc += n as f64 * v.re;
        }
        acc
    }
}

/// A dense operator on the same truncated space as [`FockState`].
#[derive(Debug, Clone)]
pub struct FockOperator {
    matrix: Array2<C64>,
    cutoff: usize,
    modes: usize,
    hermitian: bool,
}

impl FockOperator {
    pub fn from_matrix(matrix: Array2<C64>, cutoff: usize, modes: usize) -> Result<Self> {
        let dim = cutoff.pow(modes as u32);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::CutoffMismatch(matrix.nrows(), dim));
        }
        let scale = max_abs(&matrix).max(1.0);
        let hermitian = hermitian_deviation(&matrix) <= HERMITICITY_TOLERANCE * scale;
        Ok(Self {
            matrix,
            cutoff,
            modes,
            hermitian,
        })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: dagger(&self.matrix),
            cutoff: self.cutoff,
            modes: self.modes,
            hermitian: self.hermitian,
        }
    }

    /// `self + other`; panics on dimension mismatch.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self::from_matrix(&self.matrix + &other.matrix, self.cutoff, self.modes)
            .expect("dimensions already checked")
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.mapv(|v| v * factor),
            cutoff: self.cutoff,
            modes: self.modes,
            hermitian: self.hermitian,
        }
    }
}

/// Single-mode annihilation operator, `<n-1| a |n> = sqrt(n)`.
pub fn annihilation(cutoff: usize) -> FockOperator {
    let mut m = Array2::<C64>::zeros((cutoff, cutoff));
    for n in 1..cutoff {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    FockOperator {
        matrix: m,
        cutoff,
        modes: 1,
        hermitian: false,
    }
}

/// Single-mode creation operator.
pub fn creation(cutoff: usize) -> FockOperator {
    annihilation(cutoff).adjoint()
}

/// Single-mode photon-number operator.
pub fn number(cutoff: usize) -> FockOperator {
    let m = Array2::from_diag(&ndarray::Array1::from_iter(
        (0..cutoff).map(|n| C64::new(n as f64, 0.0)),
    ));
    FockOperator {
        matrix: m,
        cutoff,
        modes: 1,
        hermitian: true,
    }
}

/// Quadrature `x = (a + a^dag)/2`.
pub fn quadrature_x(cutoff: usize) -> FockOperator {
    let a = annihilation(cutoff);
    let m = (&a.matrix + &dagger(&a.matrix)).mapv(|v| v * 0.5);
    FockOperator {
        matrix: m,
        cutoff,
        modes: 1,
        hermitian: true,
    }
}

/// Quadrature `y = (a - a^dag)/(2i)`.
pub fn quadrature_y(cutoff: usize) -> FockOperator {
    let a = annihilation(cutoff);
    let m = (&a.matrix - &dagger(&a.matrix)).mapv(|v| v * C64::new(0.0, -0.5));
    FockOperator {
        matrix: m,
        cutoff,
        modes: 1,
        hermitian: true,
    }
}

fn lift(op: &FockOperator, mode: usize) -> FockOperator {
    assert_eq!(op.modes, 1, "can only lift single-mode operators");
    let id = Array2::<C64>::eye(op.cutoff);
    let m = if mode == 0 {
        kron(&op.matrix, &id)
    } else {
        kron(&id, &op.matrix)
    };
    FockOperator {
        matrix: m,
        cutoff: op.cutoff,
        modes: 2,
        hermitian: op.hermitian,
    }
}

/// Embeds a single-mode operator as `op (x) I`.
pub fn on_mode1(op: &FockOperator) -> FockOperator {
    lift(op, 0)
}

/// Embeds a single-mode operator as `I (x) op`.
pub fn on_mode2(op: &FockOperator) -> FockOperator {
    lift(op, 1)
}

/// Phase-shift generator of the two-path interferometer expressed in the
/// input modes: `h = -i/2 (a1^dag a2 - a2^dag a1)`, half the photon-number
/// difference between the two paths.
pub fn generator_h(cutoff: usize) -> FockOperator {
    let a1 = on_mode1(&annihilation(cutoff));
    let a2 = on_mode2(&annihilation(cutoff));
    let cross = dagger(&a1.matrix).dot(&a2.matrix);
    let m = (&cross - &dagger(&cross)).mapv(|v| v * C64::new(0.0, -0.5));
    FockOperator {
        matrix: m,
        cutoff,
        modes: 2,
        hermitian: true,
    }
}

/// Photon-number difference `n1 - n2`, the readout observable of the
/// measurement setup in [`crate::estimator`].
pub fn number_difference(cutoff: usize) -> FockOperator {
    let n1 = on_mode1(&number(cutoff));
    let n2 = on_mode2(&number(cutoff));
    FockOperator {
        matrix: &n1.matrix - &n2.matrix,
        cutoff,
        modes: 2,
        hermitian: true,
    }
}

/// Single-mode displacement `D(delta) = exp(delta (a^dag - a))` for real
/// `delta`, exponentiated exactly on the truncated space. Faithful as long
/// as the displaced state keeps well clear of the cutoff.
pub fn displacement(delta: f64, cutoff: usize) -> Result<FockOperator> {
    let a = annihilation(cutoff);
    // delta (a^dag - a) = -i delta h with Hermitian h = i (a^dag - a)
    let h = (&dagger(&a.matrix) - &a.matrix).mapv(|v| v * C64::new(0.0, 1.0));
    let m = expm_hermitian(&h, delta)?;
    Ok(FockOperator {
        matrix: m,
        cutoff,
        modes: 1,
        hermitian: false,
    })
}

/// Single-mode parity `exp(i pi n) = diag((-1)^n)`.
pub fn phase_flip(cutoff: usize) -> FockOperator {
    let m = Array2::from_diag(&ndarray::Array1::from_iter(
        (0..cutoff).map(|n| C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)),
    ));
    FockOperator {
        matrix: m,
        cutoff,
        modes: 1,
        hermitian: true,
    }
}

/// `-i [h, rho]` as a Hermitian [`FockOperator`].
pub fn derivative(state: &FockState, h: &FockOperator) -> Result<FockOperator> {
    if h.dim() != state.dim() {
        return Err(Error::CutoffMismatch(h.dim(), state.dim()));
    }
    let m = commutator_derivative(&h.matrix, &state.matrix);
    FockOperator::from_matrix(m, state.cutoff, state.modes)
}

/// Options steering cutoff selection in [`analyze`] and the sweep runner.
#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    /// Maximum probability weight that may be truncated away per input mode.
    pub truncation_budget: f64,
    /// Hard per-mode cutoff limit.
    pub cutoff_cap: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            truncation_budget: 1e-7,
            cutoff_cap: 64,
        }
    }
}

/// Full oracle pass: build the lossy two-mode state, solve for the
/// symmetric logarithmic derivative, and report the quantum Fisher
/// information together with the sensitivity the SLD achieves as an
/// estimator.
pub fn analyze(spec: &InputSpec, opts: &OracleOptions) -> Result<SensitivityReport> {
    sld::analyze(spec, opts)
}
