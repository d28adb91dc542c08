//! Explicit optimal estimator and the photon-counting measurement that
//! attains the quantum Fisher information.
//!
//! The optimal estimator for the lossy coherent-plus-squeezed input splits
//! into a cross-mode part `g1 = -((a1^dag - alpha_red) a2 + a2^dag (a1 -
//! alpha_red))` and a quadrature part `g2 = (alpha_red / (2 var_x)) x2`.
//! Their sum collapses to `G = b^dag a2 + a2^dag b` with the shifted mode
//! `b = b_offset - a1`, which a displacement and a sign flip on the bright
//! mode turn into an ordinary beam-splitter-plus-photon-counting setup:
//! after `U1 = exp(i pi n1) D(-b_offset)` and a balanced mixer, the
//! photon-number difference `n1 - n2` measures `G`.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::analytic::{InputSpec, LossyGaussianState};
use crate::error::{Error, Result};
use crate::fock::{
    self, annihilation, auto_cutoff, coherent_state, displacement, generator_h, lossy_pair,
    number_difference, on_mode1, on_mode2, phase_flip, quadrature_x, squeezed_vacuum,
    two_mode_product, FockOperator, OracleOptions,
};

/// Parameters of the optimal estimator on a given truncated space.
#[derive(Debug, Clone, Copy)]
pub struct EstimatorSpec {
    alpha_red: f64,
    var_x: f64,
    b_offset: f64,
    cutoff: usize,
}

impl EstimatorSpec {
    /// Builds the estimator from post-loss Gaussian parameters.
    pub fn new(alpha_red: f64, var_x: f64, cutoff: usize) -> Result<Self> {
        if !alpha_red.is_finite() || alpha_red < 0.0 {
            return Err(Error::Domain {
                name: "alpha_red",
                value: alpha_red,
                range: "[0, inf)",
            });
        }
        if !var_x.is_finite() || var_x <= 0.0 {
            return Err(Error::Domain {
                name: "var_x",
                value: var_x,
                range: "(0, inf)",
            });
        }
        Ok(Self {
            alpha_red,
            var_x,
            b_offset: alpha_red * (1.0 / (4.0 * var_x) + 1.0),
            cutoff,
        })
    }

    /// Derives the estimator from the physical input parameters.
    pub fn from_input(spec: &InputSpec, cutoff: usize) -> Result<Self> {
        let g = LossyGaussianState::from_input(spec)?;
        Self::new(g.alpha_red, g.var_x, cutoff)
    }

    pub fn alpha_red(&self) -> f64 {
        self.alpha_red
    }

    pub fn var_x(&self) -> f64 {
        self.var_x
    }

    /// Displacement of the shifted mode, `b_offset = alpha_red (1/(4 var_x)
    /// + 1)`.
    pub fn b_offset(&self) -> f64 {
        self.b_offset
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Cross-mode term `g1 = -((a1^dag - alpha_red) a2 + h.c.)`.
    pub fn g1_operator(&self) -> FockOperator {
        let d = self.cutoff;
        let a1 = on_mode1(&annihilation(d));
        let a2 = on_mode2(&annihilation(d));
        let cross = fock::dagger(a1.matrix()).dot(a2.matrix());
        let mut m = &cross + &fock::dagger(&cross);
        m.mapv_inplace(|v| -v);
        let x2 = (a2.matrix() + &fock::dagger(a2.matrix())).mapv(|v| v * self.alpha_red);
        m += &x2;
        FockOperator::from_matrix(m, d, 2).expect("g1 is Hermitian by construction")
    }

    /// Quadrature term `g2 = (alpha_red / (2 var_x)) x2`.
    pub fn g2_operator(&self) -> FockOperator {
        let x2 = on_mode2(&quadrature_x(self.cutoff));
        x2.scale(self.alpha_red / (2.0 * self.var_x))
    }

    /// The full estimator `G = g1 + g2 = b_offset (a2 + a2^dag) - (a1^dag
    /// a2 + a2^dag a1)`.
    pub fn optimal_estimator(&self) -> FockOperator {
        self.g1_operator().add(&self.g2_operator())
    }
}

/// How the displacement stage of the measurement is realized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bs3Model {
    /// Ideal displacement `D(-b_offset)` on the bright mode.
    ExactDisplacement,
    /// Highly asymmetric beam splitter with transmittance `t` fed by a
    /// local oscillator of amplitude `-b_offset / sqrt(t)`: the bright mode
    /// is attenuated by `t` and then displaced. Converges to
    /// [`Bs3Model::ExactDisplacement`] as `t -> 0`.
    FiniteTransmittance(f64),
}

/// First and second moments of the photon-number-difference readout,
/// together with the phase sensitivity they imply.
#[derive(Debug, Clone, Copy)]
pub struct MeasurementOutcome {
    /// `<n1 - n2>` at the working point.
    pub mean: f64,
    /// `var(n1 - n2)` at the working point.
    pub variance: f64,
    /// `d<n1 - n2>/dphi` at the working point.
    pub slope: f64,
    /// `slope^2 / variance`, to be compared with the Fisher information.
    pub sensitivity: f64,
    /// Per-mode cutoff used for the simulation.
    pub cutoff_used: usize,
}

/// Simulates the full measurement chain at working point `phi`: lossy state
/// preparation, the displacement stage on the bright mode (exact or through
/// a finite beam splitter), a balanced mixer, and photon counting on both
/// outputs.
pub fn simulate_measurement(
    spec: &InputSpec,
    phi: f64,
    bs3: Bs3Model,
    opts: &OracleOptions,
) -> Result<MeasurementOutcome> {
    if let Bs3Model::FiniteTransmittance(t) = bs3 {
        if !t.is_finite() || !(0.0..1.0).contains(&t) || t == 0.0 {
            return Err(Error::Domain {
                name: "transmittance",
                value: t,
                range: "(0, 1)",
            });
        }
    }
    let cutoff = auto_cutoff(spec.alpha(), spec.r(), opts.truncation_budget)?;
    if cutoff > opts.cutoff_cap {
        coherent_state(spec.alpha(), opts.cutoff_cap, opts.truncation_budget)?;
        squeezed_vacuum(spec.r(), opts.cutoff_cap, opts.truncation_budget)?;
        unreachable!("auto_cutoff disagrees with the state builders");
    }
    let est = EstimatorSpec::from_input(spec, cutoff)?;

    let (rho1, rho2) = lossy_pair(spec, cutoff)?;
    let rho = two_mode_product(&rho1, &rho2)?;
    let h = generator_h(cutoff);
    let mut rho_m = rho.matrix().clone();
    let mut drho_m = fock::commutator_derivative(h.matrix(), &rho_m);
    if phi != 0.0 {
        let u = fock::expm_hermitian(h.matrix(), phi)?;
        let ud = fock::dagger(&u);
        rho_m = u.dot(&rho_m).dot(&ud);
        drho_m = u.dot(&drho_m).dot(&ud);
    }

    // displacement stage; the derivative evolves through the same
    // (phi-independent) channel
    if let Bs3Model::FiniteTransmittance(t) = bs3 {
        rho_m = fock::loss_two_mode(&rho_m, cutoff, 0, t);
        drho_m = fock::loss_two_mode(&drho_m, cutoff, 0, t);
    }
    let u1 = phase_flip(cutoff)
        .matrix()
        .dot(displacement(-est.b_offset(), cutoff)?.matrix());
    let u1d = fock::dagger(&u1);
    rho_m = fock::mode1_right(&fock::mode1_left(&u1, &rho_m), &u1d);
    drho_m = fock::mode1_right(&fock::mode1_left(&u1, &drho_m), &u1d);

    // The balanced mixer is folded into the readout (Heisenberg picture):
    // measuring n1 - n2 after V = exp(i pi/2 h) is measuring V^dag (n1 -
    // n2) V before it, which on the untruncated space is a1^dag a2 +
    // a2^dag a1.
    let v = fock::expm_hermitian(h.matrix(), -std::f64::consts::FRAC_PI_2)?;
    let m_diag = number_difference(cutoff);
    let mv = &v * &diag_column(m_diag.matrix()); // cheap: scales rows of v
    let m_eff = fock::dagger(&v).dot(&mv);
    let m_sq = fock::dagger(&m_eff).dot(&m_eff);

    let mean = fock::trace_product(&m_eff, &rho_m).re;
    let slope = fock::trace_product(&m_eff, &drho_m).re;
    let second = fock::trace_product(&m_sq, &rho_m).re;
    let variance = second - mean * mean;
    let floor = 1e-14 * (1.0 + fock::max_abs(&m_eff).powi(2));
    if variance <= floor {
        return Err(Error::ZeroVarianceEstimator(variance));
    }
    Ok(MeasurementOutcome {
        mean,
        variance,
        slope,
        sensitivity: slope * slope / variance,
        cutoff_used: cutoff,
    })
}

/// Broadcasts the diagonal of `m` over columns, so `v * diag_column(m)`
/// equals `diag(m) v` row-scaled... i.e. `m v` for diagonal `m`.
fn diag_column(m: &Array2<C64>) -> Array2<C64> {
    let n = m.nrows();
    Array2::from_shape_fn((n, 1), |(i, _)| m[(i, i)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::fock::{derivative, sld_residual, FockState};
    use approx::assert_relative_eq;

    fn test_input() -> InputSpec {
        analytic::InputSpec::new(0.9, 0.6, 0.2).unwrap()
    }

    fn lossy_state(spec: &InputSpec, cutoff: usize) -> FockState {
        let (r1, r2) = lossy_pair(spec, cutoff).unwrap();
        two_mode_product(&r1, &r2).unwrap()
    }

    #[test]
    fn split_terms_sum_to_closed_form() {
        let est = EstimatorSpec::from_input(&test_input(), 8).unwrap();
        let d = 8;
        let a1 = on_mode1(&annihilation(d));
        let a2 = on_mode2(&annihilation(d));
        let cross = fock::dagger(a1.matrix()).dot(a2.matrix());
        let x2 = a2.matrix() + &fock::dagger(a2.matrix());
        let direct = &x2.mapv(|v| v * est.b_offset()) - &(&cross + &fock::dagger(&cross));
        let dev = fock::max_abs(&(est.optimal_estimator().matrix() - &direct));
        assert!(dev < 1e-13, "decomposition deviates by {dev:.3e}");
    }

    #[test]
    fn g1_split_identity_on_the_lossy_state() {
        // On rho the cross term obeys g1 rho + rho g1 = -(A rho + rho
        // A^dag) with A = (a1^dag - alpha_red) a2, because (a1 -
        // alpha_red) annihilates the lossy coherent factor.
        let spec = test_input();
        let cutoff = 24;
        let est = EstimatorSpec::from_input(&spec, cutoff).unwrap();
        let rho = lossy_state(&spec, cutoff);
        let g1 = est.g1_operator();

        let a1 = on_mode1(&annihilation(cutoff));
        let a2 = on_mode2(&annihilation(cutoff));
        let a = fock::dagger(a1.matrix()).dot(a2.matrix())
            - &a2.matrix().mapv(|v| v * est.alpha_red());
        let lhs = g1.matrix().dot(rho.matrix()) + rho.matrix().dot(g1.matrix());
        let rhs = -(a.dot(rho.matrix()) + rho.matrix().dot(&fock::dagger(&a)));

        // compare away from the truncation rim
        let diff = &lhs - &rhs;
        let d = cutoff;
        let mut dev = 0.0f64;
        for i in 0..d * d {
            for j in 0..d * d {
                if i / d < d - 1 && i % d < d - 1 && j / d < d - 1 && j % d < d - 1 {
                    dev = dev.max(diff[(i, j)].norm());
                }
            }
        }
        assert!(dev < 1e-10, "split identity deviates by {dev:.3e}");
    }

    #[test]
    fn estimator_is_an_sld() {
        let spec = test_input();
        let opts = OracleOptions::default();
        let cutoff = auto_cutoff(spec.alpha(), spec.r(), opts.truncation_budget).unwrap();
        let est = EstimatorSpec::from_input(&spec, cutoff).unwrap();
        let rho = lossy_state(&spec, cutoff);
        let h = generator_h(cutoff);
        let drho = derivative(&rho, &h).unwrap();

        let g = est.optimal_estimator();
        let res = sld_residual(&rho, &g, &drho);
        assert!(res < 1e-8, "SLD residual {res:.3e}");

        // second moment matches alpha_red^2/(4 var_x) + n2
        let gauss = LossyGaussianState::from_input(&spec).unwrap();
        let expected = est.alpha_red().powi(2) / (4.0 * est.var_x()) + gauss.n2;
        let second = fock::qfi(&rho, &g);
        assert_relative_eq!(second, expected, max_relative = 1e-6);

        // and attains the Fisher information as an estimator
        let s = fock::estimator_sensitivity(&rho, &g, &h).unwrap();
        assert_relative_eq!(s, analytic::fisher_information(&spec), max_relative = 1e-5);
    }

    #[test]
    fn exact_measurement_attains_fisher_information() {
        let spec = test_input();
        let out = simulate_measurement(
            &spec,
            0.0,
            Bs3Model::ExactDisplacement,
            &OracleOptions::default(),
        )
        .unwrap();
        let f = analytic::fisher_information(&spec);
        assert_relative_eq!(out.sensitivity, f, max_relative = 1e-5);
    }

    #[test]
    fn finite_transmittance_converges_to_exact() {
        let spec = analytic::InputSpec::new(0.7, 0.4, 0.15).unwrap();
        let opts = OracleOptions::default();
        let exact = simulate_measurement(&spec, 0.0, Bs3Model::ExactDisplacement, &opts)
            .unwrap()
            .sensitivity;
        let mut prev_err = f64::INFINITY;
        for t in [0.1, 0.01] {
            let s = simulate_measurement(&spec, 0.0, Bs3Model::FiniteTransmittance(t), &opts)
                .unwrap()
                .sensitivity;
            let err = (s - exact).abs();
            assert!(err < prev_err, "t = {t}: error {err:.3e} did not shrink");
            prev_err = err;
        }
        assert!(prev_err < 1e-2 * exact);
    }

    #[test]
    fn reduced_channel_matches_explicit_ancilla() {
        // Mix a squeezed mode with a coherent local oscillator on a
        // transmittance-t beam splitter and trace the oscillator out; the
        // result must equal attenuation by t followed by a displacement by
        // sqrt(t) * beta.
        let d = 16;
        let t: f64 = 0.25;
        let beta = -1.0f64;
        let sq = squeezed_vacuum(0.4, d, 1e-6).unwrap();
        let lo = coherent_state(beta.abs(), d, 1e-9).unwrap();
        // negative-amplitude oscillator via a phase flip
        let flip = phase_flip(d);
        let lo_m = flip.matrix().dot(lo.matrix()).dot(flip.matrix());
        let lo = FockState::from_matrix(lo_m, d, 1, lo.tail_mass()).unwrap();

        let joint = two_mode_product(&sq, &lo).unwrap();
        let h = generator_h(d);
        let theta = t.sqrt().asin();
        let u = fock::expm_hermitian(h.matrix(), -2.0 * theta).unwrap();
        let mixed = u.dot(joint.matrix()).dot(&fock::dagger(&u));
        let mixed = FockState::from_matrix(mixed, d, 2, joint.tail_mass()).unwrap();
        let reduced = fock::partial_trace(&mixed, 0).unwrap();

        let attenuated = fock::loss_channel(&sq, t).unwrap();
        let disp = displacement(t.sqrt() * beta, d).unwrap();
        let expected = disp
            .matrix()
            .dot(attenuated.matrix())
            .dot(&fock::dagger(disp.matrix()));

        // agreement away from the truncation rim
        let diff = reduced.matrix() - &expected;
        let mut dev = 0.0f64;
        for i in 0..d - 2 {
            for j in 0..d - 2 {
                dev = dev.max(diff[(i, j)].norm());
            }
        }
        assert!(dev < 1e-5, "reduced channel deviates by {dev:.3e}");
    }

    #[test]
    fn working_point_shift_reduces_sensitivity_smoothly() {
        let spec = analytic::InputSpec::new(0.7, 0.4, 0.15).unwrap();
        let opts = OracleOptions::default();
        let at = |phi: f64| {
            simulate_measurement(&spec, phi, Bs3Model::ExactDisplacement, &opts)
                .unwrap()
                .sensitivity
        };
        let s0 = at(0.0);
        let s1 = at(0.05);
        assert!(s1 < s0);
        assert_relative_eq!(s1, s0, max_relative = 0.1);
    }
}
