//! Closed-form sensitivity analysis for two-path interferometry with a
//! coherent input and squeezed vacuum under linear photon loss.
//!
//! Everything in this module is an explicit formula in the input amplitude
//! `alpha`, the squeezing parameter `r` and the loss fraction `sigma`, or in
//! the equivalent photon-budget parametrization `(N, mu, n_loss)`. The
//! truncated Fock-space oracle in [`crate::fock`] cross-checks these formulas
//! numerically.

use crate::error::{Error, Result};

fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            range: "finite",
        })
    }
}

/// Physical input parameters of the interferometer.
///
/// The coherent amplitude is taken real and non-negative; the squeezing phase
/// is fixed relative to the coherent phase so that the `x` quadrature of the
/// squeezed mode is the squeezed one. `sigma` is the probability that any
/// given photon is lost between generation and detection, assumed equal in
/// both arms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputSpec {
    alpha: f64,
    r: f64,
    sigma: f64,
}

impl InputSpec {
    pub fn new(alpha: f64, r: f64, sigma: f64) -> Result<Self> {
        check_finite("alpha", alpha)?;
        check_finite("r", r)?;
        check_finite("sigma", sigma)?;
        if alpha < 0.0 {
            return Err(Error::Domain {
                name: "alpha",
                value: alpha,
                range: "[0, inf)",
            });
        }
        if r < 0.0 {
            return Err(Error::Domain {
                name: "r",
                value: r,
                range: "[0, inf)",
            });
        }
        if !(0.0..1.0).contains(&sigma) {
            return Err(Error::Domain {
                name: "sigma",
                value: sigma,
                range: "[0, 1)",
            });
        }
        Ok(Self { alpha, r, sigma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Photon-budget parametrization: total mean photon number after losses `N`,
/// squeezing fraction `mu` (fraction of `N` contributed by the squeezed
/// mode) and mean number of photons lost `n_loss = N sigma / (1 - sigma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetSpec {
    n_total: f64,
    mu: f64,
    n_loss: f64,
}

impl BudgetSpec {
    pub fn new(n_total: f64, mu: f64, n_loss: f64) -> Result<Self> {
        check_finite("n_total", n_total)?;
        check_finite("mu", mu)?;
        check_finite("n_loss", n_loss)?;
        if n_total < 0.0 {
            return Err(Error::Domain {
                name: "n_total",
                value: n_total,
                range: "[0, inf)",
            });
        }
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::Domain {
                name: "mu",
                value: mu,
                range: "[0, 1]",
            });
        }
        if n_loss < 0.0 {
            return Err(Error::Domain {
                name: "n_loss",
                value: n_loss,
                range: "[0, inf)",
            });
        }
        Ok(Self { n_total, mu, n_loss })
    }

    pub fn n_total(&self) -> f64 {
        self.n_total
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn n_loss(&self) -> f64 {
        self.n_loss
    }
}

/// Parameters of the two single-mode states after the loss channel: the
/// reduced coherent amplitude and the squeezed-thermal decomposition of the
/// lossy squeezed vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossyGaussianState {
    pub alpha_red: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub lambda: f64,
    pub r_red: f64,
    pub n2: f64,
}

impl LossyGaussianState {
    /// Derives all post-loss parameters from the physical input.
    pub fn from_input(spec: &InputSpec) -> Result<Self> {
        let alpha_red = apply_loss_coherent(spec.alpha, spec.sigma)?;
        let (var_x, var_y) = lossy_variances(spec.r, spec.sigma)?;
        let (lambda, r_red) = squeezed_thermal_params(var_x, var_y)?;
        let n2 = (1.0 - spec.sigma) * spec.r.sinh().powi(2);
        Ok(Self {
            alpha_red,
            var_x,
            var_y,
            lambda,
            r_red,
            n2,
        })
    }
}

/// Reduced coherent amplitude after the loss channel,
/// `alpha_red = sqrt(1 - sigma) * alpha`.
pub fn apply_loss_coherent(alpha: f64, sigma: f64) -> Result<f64> {
    check_finite("alpha", alpha)?;
    if alpha < 0.0 {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha,
            range: "[0, inf)",
        });
    }
    if !sigma.is_finite() || !(0.0..1.0).contains(&sigma) {
        return Err(Error::Domain {
            name: "sigma",
            value: sigma,
            range: "[0, 1)",
        });
    }
    Ok((1.0 - sigma).sqrt() * alpha)
}

/// Quadrature variances of the squeezed mode after losses:
/// `4 var_x = sigma + (1 - sigma) e^{-2r}` and
/// `4 var_y = sigma + (1 - sigma) e^{2r}`.
///
/// `sigma = 1` is allowed here; total loss returns the vacuum variances.
pub fn lossy_variances(r: f64, sigma: f64) -> Result<(f64, f64)> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain {
            name: "r",
            value: r,
            range: "[0, inf)",
        });
    }
    if !sigma.is_finite() || !(0.0..=1.0).contains(&sigma) {
        return Err(Error::Domain {
            name: "sigma",
            value: sigma,
            range: "[0, 1]",
        });
    }
    let var_x = (sigma + (1.0 - sigma) * (-2.0 * r).exp()) / 4.0;
    let var_y = (sigma + (1.0 - sigma) * (2.0 * r).exp()) / 4.0;
    Ok((var_x, var_y))
}

/// Tolerance on the uncertainty product below which a variance pair is
/// rejected as unphysical. Guards against rounding producing `lambda < 0`.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-9;

/// Inverts the squeezed-thermal variance formulas
/// `4 var_x = ((1 + lambda)/(1 - lambda)) e^{-2 r_red}` (and the mirrored
/// expression for `var_y`) for the thermal parameter `lambda` and the reduced
/// squeezing `r_red`.
///
/// Variance pairs at the uncertainty boundary `16 var_x var_y = 1` give a
/// pure state, `lambda = 0`; anything below the boundary (minus
/// [`PHYSICALITY_TOLERANCE`]) is rejected.
pub fn squeezed_thermal_params(var_x: f64, var_y: f64) -> Result<(f64, f64)> {
    if !var_x.is_finite() || var_x <= 0.0 {
        return Err(Error::Domain {
            name: "var_x",
            value: var_x,
            range: "(0, inf)",
        });
    }
    if !var_y.is_finite() || var_y <= 0.0 {
        return Err(Error::Domain {
            name: "var_y",
            value: var_y,
            range: "(0, inf)",
        });
    }
    let product = 16.0 * var_x * var_y;
    if product < 1.0 - PHYSICALITY_TOLERANCE {
        return Err(Error::Unphysical { product });
    }
    let r_red = 0.25 * (var_y / var_x).ln();
    // (1 + lambda)/(1 - lambda) = 4 sqrt(var_x var_y) = sqrt(product)
    let s = product.sqrt();
    let lambda = ((s - 1.0) / (s + 1.0)).max(0.0);
    Ok((lambda, r_red))
}

/// Converts physical input parameters to the photon-budget parametrization.
pub fn budget_from_input(spec: &InputSpec) -> Result<BudgetSpec> {
    let nsq = spec.r.sinh().powi(2);
    let total = spec.alpha.powi(2) + nsq;
    if total <= 0.0 {
        return Err(Error::DegenerateInput);
    }
    let n_total = (1.0 - spec.sigma) * total;
    let mu = (1.0 - spec.sigma) * nsq / n_total;
    let n_loss = n_total * spec.sigma / (1.0 - spec.sigma);
    BudgetSpec::new(n_total, mu.clamp(0.0, 1.0), n_loss)
}

/// Inverse of [`budget_from_input`]: recovers `(alpha, r, sigma)` from
/// `(N, mu, n_loss)`.
pub fn input_from_budget(budget: &BudgetSpec) -> Result<InputSpec> {
    if budget.n_total <= 0.0 {
        return Err(Error::Domain {
            name: "n_total",
            value: budget.n_total,
            range: "(0, inf)",
        });
    }
    let sigma = budget.n_loss / (budget.n_total + budget.n_loss);
    let pre_loss = budget.n_total / (1.0 - sigma);
    let r = (budget.mu * pre_loss).sqrt().asinh();
    let alpha = ((1.0 - budget.mu) * pre_loss).sqrt();
    InputSpec::new(alpha, r, sigma)
}

/// Fisher information of the lossy squeezed-coherent state,
/// `F = (1 - sigma) (alpha^2 / (sigma + (1 - sigma) e^{-2r}) + sinh^2 r)`.
pub fn fisher_information(spec: &InputSpec) -> f64 {
    let denom = spec.sigma + (1.0 - spec.sigma) * (-2.0 * spec.r).exp();
    (1.0 - spec.sigma) * (spec.alpha.powi(2) / denom + spec.r.sinh().powi(2))
}

/// How the squeezing parameter enters [`fisher_budget`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SqueezingMode {
    /// Derive `r` from the budget itself (round trip through
    /// [`input_from_budget`]).
    Consistent,
    /// Use the supplied `r`, but reject it if it contradicts the budget.
    Checked(f64),
    /// High-squeezing limit `e^{-2r} := 0`. Callers must opt in explicitly.
    Ideal,
}

/// Fisher information in the photon-budget parametrization,
/// `F = N^2 * 4 (1 - mu) mu / (1 - e^{-2r} + 4 mu n_loss) + N`.
pub fn fisher_budget(budget: &BudgetSpec, mode: SqueezingMode) -> Result<f64> {
    let consistent_r = if budget.n_total > 0.0 {
        input_from_budget(budget)?.r()
    } else {
        0.0
    };
    let exp_term = match mode {
        SqueezingMode::Consistent => (-2.0 * consistent_r).exp(),
        SqueezingMode::Checked(r) => {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::Domain {
                    name: "r",
                    value: r,
                    range: "[0, inf)",
                });
            }
            // With mu = 0 the squeezing term drops out of F entirely, so any
            // r is consistent.
            let scale = consistent_r.abs().max(1.0);
            if budget.mu > 0.0 && (r - consistent_r).abs() > 1e-9 * scale {
                return Err(Error::InconsistentSqueezing {
                    given: r,
                    expected: consistent_r,
                });
            }
            (-2.0 * r).exp()
        }
        SqueezingMode::Ideal => 0.0,
    };
    let numerator = 4.0 * (1.0 - budget.mu) * budget.mu;
    let denom = 1.0 - exp_term + 4.0 * budget.mu * budget.n_loss;
    let enhancement_term = if numerator == 0.0 {
        0.0
    } else {
        numerator / denom
    };
    Ok(budget.n_total.powi(2) * enhancement_term + budget.n_total)
}

/// Enhancement of sensitivity `(F - N)/N^2 = 4 mu (1 - mu) / (1 + 4 mu n_loss)`
/// in the high-squeezing limit.
pub fn enhancement(mu: f64, n_loss: f64) -> f64 {
    4.0 * mu * (1.0 - mu) / (1.0 + 4.0 * mu * n_loss)
}

/// Squeezing fraction that maximizes [`enhancement`] at fixed `n_loss`.
///
/// Evaluated as `1 / (1 + sqrt(1 + 4 n_loss))`, which is algebraically equal
/// to `(sqrt(1 + 4 n_loss) - 1) / (4 n_loss)` but has no 0/0 at
/// `n_loss = 0`, where it returns exactly 1/2.
pub fn optimal_squeezing_fraction(n_loss: f64) -> f64 {
    1.0 / (1.0 + (1.0 + 4.0 * n_loss).sqrt())
}

/// Enhancement of sensitivity at the optimal squeezing fraction,
/// `((sqrt(1 + 4 n_loss) - 1) / (2 n_loss))^2 = 4 mu_opt^2`.
pub fn enhancement_at_optimum(n_loss: f64) -> f64 {
    let mu_opt = optimal_squeezing_fraction(n_loss);
    4.0 * mu_opt * mu_opt
}

/// Ratio of the enhancement at the optimal squeezing fraction to the
/// enhancement at `mu = 1/2`. Grows from 1 at zero loss towards its
/// asymptote 2 at high losses.
pub fn improvement_ratio(n_loss: f64) -> f64 {
    enhancement_at_optimum(n_loss) * (1.0 + 2.0 * n_loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn loss_on_coherent_amplitude() {
        assert_eq!(apply_loss_coherent(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(apply_loss_coherent(2.0, 0.75).unwrap(), 1.0);
        // sqrt(0.8) * 1.3
        assert_relative_eq!(
            apply_loss_coherent(1.3, 0.2).unwrap(),
            1.1627553482998906,
            max_relative = 1e-15
        );
        assert!(apply_loss_coherent(1.0, 1.0).is_err());
        assert!(apply_loss_coherent(1.0, -0.1).is_err());
    }

    #[test]
    fn variances_of_lossy_squeezed_vacuum() {
        let (vx, vy) = lossy_variances(0.0, 0.3).unwrap();
        assert_eq!((vx, vy), (0.25, 0.25));
        let (vx, vy) = lossy_variances(1.0, 1.0).unwrap();
        assert_eq!((vx, vy), (0.25, 0.25));
        let (vx, vy) = lossy_variances(1.0, 0.2).unwrap();
        assert_relative_eq!(vx, 0.07706705664732254, max_relative = 1e-15);
        assert_relative_eq!(vy, 1.52781121978613, max_relative = 1e-15);
        assert!(lossy_variances(-0.5, 0.2).is_err());
        assert!(lossy_variances(1.0, 1.5).is_err());
    }

    #[test]
    fn squeezed_thermal_inversion() {
        assert_eq!(squeezed_thermal_params(0.25, 0.25).unwrap(), (0.0, 0.0));

        let (lambda, r_red) =
            squeezed_thermal_params((-2.0f64).exp() / 4.0, (2.0f64).exp() / 4.0).unwrap();
        assert_abs_diff_eq!(lambda, 0.0, epsilon = 1e-12);
        assert_relative_eq!(r_red, 1.0, max_relative = 1e-12);

        let (vx, vy) = lossy_variances(1.0, 0.2).unwrap();
        let (lambda, r_red) = squeezed_thermal_params(vx, vy).unwrap();
        assert_relative_eq!(lambda, 0.15702632196516944, max_relative = 1e-12);
        assert_relative_eq!(r_red, 0.7467288766033877, max_relative = 1e-12);

        // substituting back must recover the variances to machine precision
        let ratio = (1.0 + lambda) / (1.0 - lambda);
        assert_relative_eq!(
            ratio * (-2.0 * r_red).exp() / 4.0,
            vx,
            max_relative = 1e-12
        );
        assert_relative_eq!(ratio * (2.0 * r_red).exp() / 4.0, vy, max_relative = 1e-12);

        assert!(squeezed_thermal_params(0.1, 0.1).is_err());
    }

    #[test]
    fn budget_round_trip() {
        let b = budget_from_input(&InputSpec::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!((b.n_total(), b.mu(), b.n_loss()), (1.0, 0.0, 0.0));

        let b = budget_from_input(&InputSpec::new(0.0, 1.0, 0.5).unwrap()).unwrap();
        assert_relative_eq!(b.n_total(), 0.6905489227709079, max_relative = 1e-14);
        assert_eq!(b.mu(), 1.0);
        assert_relative_eq!(b.n_loss(), b.n_total(), max_relative = 1e-14);

        let s = InputSpec::new(1.2, 0.8, 0.3).unwrap();
        let back = input_from_budget(&budget_from_input(&s).unwrap()).unwrap();
        assert_relative_eq!(back.alpha(), s.alpha(), max_relative = 1e-12);
        assert_relative_eq!(back.r(), s.r(), max_relative = 1e-12);
        assert_relative_eq!(back.sigma(), s.sigma(), max_relative = 1e-12);

        assert!(budget_from_input(&InputSpec::new(0.0, 0.0, 0.2).unwrap()).is_err());
    }

    #[test]
    fn budget_inversion_examples() {
        let s = input_from_budget(&BudgetSpec::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!((s.alpha(), s.r(), s.sigma()), (1.0, 0.0, 0.0));

        let s = input_from_budget(&BudgetSpec::new(2.0, 0.5, 1.0).unwrap()).unwrap();
        assert_relative_eq!(s.sigma(), 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(s.r().sinh().powi(2), 1.5, max_relative = 1e-12);
        assert_relative_eq!(s.alpha().powi(2), 1.5, max_relative = 1e-12);

        let s = input_from_budget(&BudgetSpec::new(4.0, 0.25, 0.0).unwrap()).unwrap();
        assert_eq!(s.sigma(), 0.0);
        assert_relative_eq!(s.alpha(), 3.0f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(s.r(), 1.0f64.asinh(), max_relative = 1e-14);
    }

    #[test]
    fn fisher_closed_form() {
        assert_eq!(
            fisher_information(&InputSpec::new(1.0, 0.0, 0.0).unwrap()),
            1.0
        );
        assert_relative_eq!(
            fisher_information(&InputSpec::new(0.0, 1.0, 0.0).unwrap()),
            1.3810978455418157,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            fisher_information(&InputSpec::new(1.0, 1.0, 0.2).unwrap()),
            3.700020853569210,
            max_relative = 1e-14
        );
        // lossless: alpha^2 e^{2r} + sinh^2 r
        assert_relative_eq!(
            fisher_information(&InputSpec::new(1.0, 1.0, 0.0).unwrap()),
            8.770153944472466,
            max_relative = 1e-14
        );
    }

    #[test]
    fn fisher_budget_parametrization() {
        let b = BudgetSpec::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(fisher_budget(&b, SqueezingMode::Checked(3.0)).unwrap(), 1.0);

        let b = BudgetSpec::new(2.0, 0.5, 0.0).unwrap();
        assert_eq!(fisher_budget(&b, SqueezingMode::Ideal).unwrap(), 6.0);

        let b = BudgetSpec::new(2.0, 0.5, 1.0).unwrap();
        let s = input_from_budget(&b).unwrap();
        assert_relative_eq!(
            fisher_budget(&b, SqueezingMode::Consistent).unwrap(),
            fisher_information(&s),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            fisher_budget(&b, SqueezingMode::Checked(s.r())).unwrap(),
            fisher_information(&s),
            max_relative = 1e-12
        );
        assert!(matches!(
            fisher_budget(&b, SqueezingMode::Checked(s.r() + 0.1)),
            Err(Error::InconsistentSqueezing { .. })
        ));
    }

    #[test]
    fn enhancement_values() {
        assert_eq!(enhancement(0.5, 0.0), 1.0);
        assert_eq!(enhancement(0.5, 0.5), 0.5);
        assert_eq!(enhancement(0.125, 2.0), 0.21875);
        assert_eq!(enhancement(0.0, 1.0), 0.0);
        assert_eq!(enhancement(1.0, 1.0), 0.0);
    }

    #[test]
    fn optimal_squeezing() {
        assert_eq!(optimal_squeezing_fraction(0.0), 0.5);
        assert_eq!(optimal_squeezing_fraction(2.0), 0.25);
        // continuity near zero loss
        assert_abs_diff_eq!(
            optimal_squeezing_fraction(1e-12),
            0.5,
            epsilon = 1e-11
        );

        // grid-search oracle: mu_opt maximizes the enhancement
        let n_loss = 0.7;
        let mu_opt = optimal_squeezing_fraction(n_loss);
        let best = enhancement(mu_opt, n_loss);
        for i in 0..=10_000 {
            let mu = i as f64 / 10_000.0;
            assert!(enhancement(mu, n_loss) <= best + 1e-12);
        }
    }

    #[test]
    fn enhancement_at_optimum_values() {
        assert_eq!(enhancement_at_optimum(0.0), 1.0);
        assert_relative_eq!(enhancement_at_optimum(2.0), 0.25, max_relative = 1e-14);
        assert_relative_eq!(
            enhancement_at_optimum(0.5),
            0.5358983848622454,
            max_relative = 1e-13
        );
        // consistency with the two building blocks
        for &n in &[0.0, 1e-6, 0.3, 1.0, 7.5, 1e4] {
            assert_relative_eq!(
                enhancement_at_optimum(n),
                enhancement(optimal_squeezing_fraction(n), n),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn improvement_ratio_values() {
        assert_eq!(improvement_ratio(0.0), 1.0);
        assert!((improvement_ratio(0.5) - 1.072).abs() < 5e-4);
        assert_relative_eq!(
            improvement_ratio(0.5),
            1.0717967697244908,
            max_relative = 1e-13
        );
        let high = improvement_ratio(1e4);
        assert!((1.98..2.0).contains(&high));
    }

    #[test]
    fn lossy_state_derivation() {
        let spec = InputSpec::new(1.0, 1.0, 0.2).unwrap();
        let g = LossyGaussianState::from_input(&spec).unwrap();
        assert_relative_eq!(g.alpha_red, 0.8944271909999159, max_relative = 1e-14);
        assert_relative_eq!(g.n2, 1.1048782764334526, max_relative = 1e-14);
        assert!(16.0 * g.var_x * g.var_y >= 1.0);
        assert!(g.r_red < spec.r());
        assert!((0.0..1.0).contains(&g.lambda));
    }
}
