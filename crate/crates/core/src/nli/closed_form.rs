use std::f64::consts::PI;

use super::{EpsilonRule, NliOptions, NliReport};
use crate::error::{Error, Result};
use crate::fiber::{dispersion_coefficients, FiberSpec, PowerVector};
use crate::plan::ChannelPlan;
use crate::raman::EffectiveRamanFit;

/// Multi-span SPM coherence exponent
/// `ε = (3/10)·ln(1 + (6/(ᾱL)) / asinh((π²/2)·(|β2|/ᾱ)·B²))`.
pub fn epsilon_coherence(fiber: &FiberSpec, total_bandwidth: f64) -> f64 {
    let abar = fiber.attenuation_bar.unwrap_or(fiber.attenuation);
    let (beta2, _) =
        dispersion_coefficients(fiber.dispersion, fiber.dispersion_slope, fiber.ref_wavelength);
    let x = 0.5 * PI * PI * beta2.abs() / abar * total_bandwidth * total_bandwidth;
    0.3 * (1.0 + 6.0 / (abar * fiber.span_length) / x.asinh()).ln()
}

/// Power-independent part of the closed-form ISRS GN model for one plan and
/// fiber.
///
/// With `T_k = (A_k - Δf_k·P_tot·ĉr_k)²` and `A_k = α_k + ᾱ_k`, each SPM and
/// XPM contribution is linear in `(T_k - α_k²)` and `(A_k² - T_k)`; the
/// asinh/atan factors multiplying them depend only on dispersion, bandwidth
/// and attenuation and are tabulated here.
#[derive(Clone, Debug)]
pub struct NliKernel {
    n: usize,
    offsets: Vec<f64>,
    alpha: Vec<f64>,
    a_sum: Vec<f64>,
    spm_low: Vec<f64>,
    spm_high: Vec<f64>,
    /// Row-major `[i * n + k]`; zero on the diagonal.
    xpm_low: Vec<f64>,
    xpm_high: Vec<f64>,
    epsilon: f64,
    span_length: f64,
}

impl NliKernel {
    pub fn new(plan: &ChannelPlan, fiber: &FiberSpec, epsilon: EpsilonRule) -> Result<Self> {
        fiber.check_plan(plan)?;
        let n = plan.len();
        let gamma2 = fiber.gamma * fiber.gamma;
        let (beta2, beta3) = fiber.dispersion_at(plan);
        let offsets = plan.offsets();
        let bw = plan.bandwidths();
        let alpha: Vec<f64> = (0..n).map(|i| fiber.alpha(i)).collect();
        let abar: Vec<f64> = (0..n).map(|i| fiber.alpha_bar(i)).collect();
        let a_sum: Vec<f64> = (0..n).map(|i| alpha[i] + abar[i]).collect();

        let mut spm_low = vec![0.0; n];
        let mut spm_high = vec![0.0; n];
        for i in 0..n {
            let phi = 1.5 * PI * PI * (beta2 + 2.0 * PI * beta3 * offsets[i]);
            if phi == 0.0 || !phi.is_finite() {
                return Err(Error::Singularity(i, i));
            }
            let b2 = bw[i] * bw[i];
            let pre = 4.0 / 9.0 * gamma2 / b2 * PI / (phi * abar[i] * (2.0 * alpha[i] + abar[i]));
            spm_low[i] = pre * (phi * b2 / (alpha[i] * PI)).asinh() / alpha[i];
            spm_high[i] = pre * (phi * b2 / (a_sum[i] * PI)).asinh() / a_sum[i];
        }

        let mut xpm_low = vec![0.0; n * n];
        let mut xpm_high = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                if k == i {
                    continue;
                }
                let phi = 2.0
                    * PI
                    * PI
                    * (offsets[k] - offsets[i])
                    * (beta2 + PI * beta3 * (offsets[i] + offsets[k]));
                let phi = phi.abs();
                if phi == 0.0 || !phi.is_finite() {
                    return Err(Error::Singularity(i, k));
                }
                let pre = 32.0 / 27.0 * gamma2
                    / (bw[k] * phi * abar[k] * (2.0 * alpha[k] + abar[k]));
                xpm_low[i * n + k] = pre * (phi * bw[i] / alpha[k]).atan() / alpha[k];
                xpm_high[i * n + k] = pre * (phi * bw[i] / a_sum[k]).atan() / a_sum[k];
            }
        }

        let epsilon = match epsilon {
            EpsilonRule::Auto => epsilon_coherence(fiber, plan.total_bandwidth()),
            EpsilonRule::Fixed(e) => e,
        };
        Ok(NliKernel {
            n,
            offsets,
            alpha,
            a_sum,
            spm_low,
            spm_high,
            xpm_low,
            xpm_high,
            epsilon,
            span_length: fiber.span_length,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Per-span coefficients for `launch` and its Raman fit.
    pub fn evaluate(
        &self,
        launch: &[f64],
        fit: &EffectiveRamanFit,
        kurtosis: &[f64],
        format_correction: f64,
    ) -> Result<NliReport> {
        let n = self.n;
        if launch.len() != n || kurtosis.len() != n || fit.per_channel_cr_hat.len() != n {
            return Err(Error::validation("launch", "length differs from the plan"));
        }
        let p_tot: f64 = launch.iter().sum();
        // Weights of (T_k - α_k²) and (A_k² - T_k).
        let mut w_low = vec![0.0; n];
        let mut w_high = vec![0.0; n];
        for k in 0..n {
            let t = (self.a_sum[k] - self.offsets[k] * p_tot * fit.per_channel_cr_hat[k]).powi(2);
            w_low[k] = t - self.alpha[k] * self.alpha[k];
            w_high[k] = self.a_sum[k] * self.a_sum[k] - t;
        }

        let mut eta_spm = vec![0.0; n];
        let mut eta_xpm = vec![0.0; n];
        let mut eta_corr = vec![0.0; n];
        for i in 0..n {
            eta_spm[i] = w_low[i] * self.spm_low[i] + w_high[i] * self.spm_high[i];
            let row_low = &self.xpm_low[i * n..(i + 1) * n];
            let row_high = &self.xpm_high[i * n..(i + 1) * n];
            let inv_pi2 = 1.0 / (launch[i] * launch[i]);
            let mut xpm = 0.0;
            let mut corr = 0.0;
            for k in 0..n {
                if k == i {
                    continue;
                }
                let ratio = launch[k] * launch[k] * inv_pi2;
                let term = ratio * (w_low[k] * row_low[k] + w_high[k] * row_high[k]);
                xpm += term;
                corr += kurtosis[k] * term;
            }
            eta_xpm[i] = xpm;
            eta_corr[i] = format_correction * corr;
        }
        let p_nli = (0..n)
            .map(|i| ((eta_spm[i] + eta_xpm[i] + eta_corr[i]) * launch[i].powi(3)).max(0.0))
            .collect();
        Ok(NliReport {
            eta_spm,
            eta_xpm,
            eta_corr,
            p_nli,
            epsilon: self.epsilon,
            span_length: self.span_length,
            input_powers: launch.to_vec(),
        })
    }
}

/// Single-span closed-form NLI with default options.
pub fn eta_closed_form(
    plan: &ChannelPlan,
    launch: &PowerVector,
    fiber: &FiberSpec,
    fit: &EffectiveRamanFit,
    kurtosis: &[f64],
) -> Result<NliReport> {
    eta_closed_form_with(plan, launch, fiber, fit, kurtosis, &NliOptions::default())
}

pub fn eta_closed_form_with(
    plan: &ChannelPlan,
    launch: &PowerVector,
    fiber: &FiberSpec,
    fit: &EffectiveRamanFit,
    kurtosis: &[f64],
    options: &NliOptions,
) -> Result<NliReport> {
    launch.check_plan(plan)?;
    NliKernel::new(plan, fiber, options.epsilon)?.evaluate(
        launch.as_slice(),
        fit,
        kurtosis,
        options.format_correction,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{build_channel_plan, Band, BandAllocation, BandEdges};
    use crate::raman::{fit_effective_cr, solve_raman_ode};
    use approx::assert_relative_eq;

    fn plan(n: usize) -> ChannelPlan {
        build_channel_plan(
            &BandEdges::default(),
            &[BandAllocation {
                band: Band::C,
                count: n,
                modulation_id: "C".into(),
            }],
            &[],
            50e9,
            1550e-9,
        )
        .unwrap()
    }

    fn fitted(plan: &ChannelPlan, launch: &PowerVector, fiber: &FiberSpec) -> EffectiveRamanFit {
        let prof = solve_raman_ode(plan, launch, fiber, 2).unwrap();
        fit_effective_cr(&prof, plan, launch, fiber).unwrap()
    }

    #[test]
    fn no_raman_removes_second_bracket() {
        let p = plan(9);
        let mut fiber = FiberSpec::default();
        fiber.raman_slope = 0.0;
        let launch = PowerVector::uniform_dbm(9, 0.0);
        let fit = EffectiveRamanFit::none(&p, &launch, &fiber);
        let k = NliKernel::new(&p, &fiber, EpsilonRule::Auto).unwrap();
        let rep = k.evaluate(launch.as_slice(), &fit, &[0.0; 9], 5.0 / 6.0).unwrap();
        // Only the low-attenuation terms survive: η = 3α·(low factor).
        for i in 0..9 {
            let a = fiber.alpha(i);
            assert_relative_eq!(rep.eta_spm[i], 3.0 * a * a * k.spm_low[i], max_relative = 1e-14);
        }
    }

    #[test]
    fn isrs_free_spm_matches_textbook_gn() {
        // (8/27)·γ²·asinh(x)/(α·π·|β2|·B²) with x = (3/2)·π·|β2|·B²/α.
        let p = plan(1);
        let fiber = FiberSpec::default();
        let launch = PowerVector::uniform_dbm(1, 0.0);
        let fit = EffectiveRamanFit::none(&p, &launch, &fiber);
        let rep = eta_closed_form(&p, &launch, &fiber, &fit, &[0.0]).unwrap();
        let (b2, _) = fiber.dispersion_at(&p);
        let (a, b, g) = (fiber.attenuation, 50e9, fiber.gamma);
        let x = 1.5 * PI * b2.abs() * b * b / a;
        let expected = 8.0 / 27.0 * g * g * x.asinh() / (a * PI * b2.abs() * b * b);
        assert_relative_eq!(rep.eta_spm[0], expected, max_relative = 1e-12);
        assert_eq!(rep.eta_xpm[0], 0.0);
    }

    #[test]
    fn gaussian_format_has_no_correction() {
        let p = plan(5);
        let fiber = FiberSpec::default();
        let launch = PowerVector::uniform_dbm(5, 1.0);
        let fit = fitted(&p, &launch, &fiber);
        let rep = eta_closed_form(&p, &launch, &fiber, &fit, &[0.0; 5]).unwrap();
        assert!(rep.eta_corr.iter().all(|c| *c == 0.0));
        let shaped = eta_closed_form(&p, &launch, &fiber, &fit, &[-0.32; 5]).unwrap();
        for i in 0..5 {
            assert!(shaped.eta_corr[i] < 0.0);
            assert!(shaped.eta_total()[i] <= rep.eta_total()[i]);
            assert!(rep.eta_spm[i] > 0.0 && rep.eta_xpm[i] > 0.0);
        }
    }

    #[test]
    fn pure_gn_is_power_independent() {
        let p = plan(7);
        let mut fiber = FiberSpec::default();
        fiber.raman_slope = 0.0;
        let launch = PowerVector::from_dbm(&[0.0, 1.0, -1.0, 2.0, 0.5, -0.5, 0.0]).unwrap();
        let double = PowerVector::new(launch.as_slice().iter().map(|p| 2.0 * p).collect()).unwrap();
        let a = eta_closed_form(&p, &launch, &fiber, &EffectiveRamanFit::none(&p, &launch, &fiber), &[0.0; 7]).unwrap();
        let b = eta_closed_form(&p, &double, &fiber, &EffectiveRamanFit::none(&p, &double, &fiber), &[0.0; 7]).unwrap();
        for (x, y) in a.eta_total().iter().zip(b.eta_total()) {
            assert!(((x - y) / x).abs() <= 1e-9);
        }
    }

    #[test]
    fn center_reference_does_not_matter() {
        let p = plan(8);
        let fiber = FiberSpec::default();
        let launch = PowerVector::from_dbm(&[2.0, 1.0, 0.0, 1.0, 0.0, -1.0, 1.5, 0.5]).unwrap();
        let fit = fitted(&p, &launch, &fiber);
        let base = eta_closed_form(&p, &launch, &fiber, &fit, &[-0.3; 8]).unwrap();
        for shift in [-100e9, 100e9] {
            let moved = p.recentered(p.center_frequency() + shift);
            let mut fit2 = fit.clone();
            for (i, c) in fit2.per_channel_cr_hat.iter_mut().enumerate() {
                *c *= p.offsets()[i] / moved.offsets()[i];
            }
            let rep = eta_closed_form(&moved, &launch, &fiber, &fit2, &[-0.3; 8]).unwrap();
            for i in 0..8 {
                assert_relative_eq!(rep.eta_total()[i], base.eta_total()[i], max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn swapping_equal_channels_permutes_report() {
        // Symmetric plan with mirrored powers: report mirrors when β3 = 0.
        let p = plan(6);
        let mut fiber = FiberSpec::default();
        fiber.raman_slope = 0.0;
        fiber.dispersion_slope = -2.0 * fiber.dispersion / fiber.ref_wavelength;
        let launch = PowerVector::from_dbm(&[0.0, 1.0, 2.0, 2.0, 1.0, 0.0]).unwrap();
        let fit = EffectiveRamanFit::none(&p, &launch, &fiber);
        let rep = eta_closed_form(&p, &launch, &fiber, &fit, &[0.0; 6]).unwrap();
        for i in 0..3 {
            assert_relative_eq!(rep.eta_total()[i], rep.eta_total()[5 - i], max_relative = 1e-12);
        }
    }

    #[test]
    fn degenerate_dispersion_is_reported() {
        let p = plan(3);
        let mut fiber = FiberSpec::default();
        fiber.dispersion = 0.0;
        fiber.dispersion_slope = 0.0;
        let err = NliKernel::new(&p, &fiber, EpsilonRule::Auto).unwrap_err();
        assert!(matches!(err, Error::Singularity(0, 0)));
    }

    #[test]
    fn coherence_exponent_behaviour() {
        let fiber = FiberSpec::default();
        let e = epsilon_coherence(&fiber, 20e12);
        assert!(e > 0.0 && e < 0.1, "{e}");
        let mut last = f64::INFINITY;
        for b in [50e9, 1e12, 5e12, 20e12, 1e14, 1e16] {
            let v = epsilon_coherence(&fiber, b);
            assert!(v > 0.0 && v < last);
            last = v;
        }
        let mut long = fiber.clone();
        long.span_length *= 2.0;
        assert!(epsilon_coherence(&long, 20e12) < e);
    }
}
