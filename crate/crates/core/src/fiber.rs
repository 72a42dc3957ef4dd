//! Fiber, amplifier and link descriptions plus the launch power vector.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::plan::{Band, ChannelPlan, PerBand};
use crate::units::{
    db_per_km_to_np_per_m, dbm_to_watt, per_w_km_to_si, ps_nm2_km_to_si, ps_nm_km_to_si,
    raman_slope_to_si, watt_to_dbm, wavelength_to_frequency, SPEED_OF_LIGHT,
};

/// Single-mode fiber span. All fields are SI.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberSpec {
    /// Power attenuation in Np/m.
    pub attenuation: f64,
    /// Optional per-channel attenuation (Np/m), aligned with the plan.
    pub attenuation_table: Option<Vec<f64>>,
    /// Effective attenuation used in the closed-form NLI; `None` means equal
    /// to the (per-channel) attenuation.
    pub attenuation_bar: Option<f64>,
    /// Dispersion parameter D at `ref_wavelength`, s/m².
    pub dispersion: f64,
    /// Dispersion slope S at `ref_wavelength`, s/m³.
    pub dispersion_slope: f64,
    /// Nonlinearity coefficient, 1/(W·m).
    pub gamma: f64,
    /// Slope of the triangular Raman gain, 1/(W·m·Hz).
    pub raman_slope: f64,
    pub span_length: f64,
    pub ref_wavelength: f64,
}

impl Default for FiberSpec {
    /// Ultra-low-loss SMF with D = 18 ps/nm/km, S = 0.067 ps/nm²/km,
    /// γ = 1.2 1/W/km, 0.16 dB/km and 70 km spans.
    fn default() -> Self {
        FiberSpec {
            attenuation: db_per_km_to_np_per_m(0.16),
            attenuation_table: None,
            attenuation_bar: None,
            dispersion: ps_nm_km_to_si(18.0),
            dispersion_slope: ps_nm2_km_to_si(0.067),
            gamma: per_w_km_to_si(1.2),
            raman_slope: raman_slope_to_si(0.028),
            span_length: 70e3,
            ref_wavelength: 1550e-9,
        }
    }
}

impl FiberSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("fiber.attenuation_db_km", self.attenuation),
            ("fiber.gamma_per_w_km", self.gamma),
            ("fiber.span_length_km", self.span_length),
            ("fiber.ref_wavelength_nm", self.ref_wavelength),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(name, format!("{v} must be positive")));
            }
        }
        if !(self.raman_slope >= 0.0) || !self.raman_slope.is_finite() {
            return Err(Error::validation(
                "fiber.raman_slope_per_w_km_thz",
                "must be non-negative",
            ));
        }
        if let Some(a) = self.attenuation_bar {
            if !(a > 0.0) {
                return Err(Error::validation("fiber.attenuation_bar_db_km", "must be positive"));
            }
        }
        if let Some(t) = &self.attenuation_table {
            if t.iter().any(|a| !(*a > 0.0)) {
                return Err(Error::validation(
                    "fiber.attenuation_table_db_km",
                    "entries must be positive",
                ));
            }
        }
        if !self.dispersion.is_finite() || !self.dispersion_slope.is_finite() {
            return Err(Error::validation("fiber.dispersion_ps_nm_km", "must be finite"));
        }
        Ok(())
    }

    /// Checks that a per-channel table, if any, matches the plan.
    pub fn check_plan(&self, plan: &ChannelPlan) -> Result<()> {
        if let Some(t) = &self.attenuation_table {
            if t.len() != plan.len() {
                return Err(Error::validation(
                    "fiber.attenuation_table_db_km",
                    format!("{} entries for {} channels", t.len(), plan.len()),
                ));
            }
        }
        Ok(())
    }

    pub fn alpha(&self, channel: usize) -> f64 {
        match &self.attenuation_table {
            Some(t) => t[channel],
            None => self.attenuation,
        }
    }

    pub fn alpha_bar(&self, channel: usize) -> f64 {
        self.attenuation_bar.unwrap_or_else(|| self.alpha(channel))
    }

    /// `(1 - exp(-αz)) / α` with the scalar attenuation; `z` in the α→0 limit.
    pub fn effective_length(&self, z: f64) -> f64 {
        effective_length(self.attenuation, z)
    }

    /// β2 and β3 referenced to the grid center of `plan`.
    pub fn dispersion_at(&self, plan: &ChannelPlan) -> (f64, f64) {
        let (beta2, beta3) =
            dispersion_coefficients(self.dispersion, self.dispersion_slope, self.ref_wavelength);
        let shift = plan.center_frequency() - wavelength_to_frequency(self.ref_wavelength);
        (beta2 + 2.0 * PI * beta3 * shift, beta3)
    }
}

pub(crate) fn effective_length(alpha: f64, z: f64) -> f64 {
    let x = alpha * z;
    if x.abs() < 1e-8 {
        z * (1.0 - 0.5 * x)
    } else {
        -(-x).exp_m1() / alpha
    }
}

/// Converts D (s/m²) and S (s/m³) at `ref_wavelength` into β2 (s²/m) and
/// β3 (s³/m).
pub fn dispersion_coefficients(d: f64, s: f64, ref_wavelength: f64) -> (f64, f64) {
    let k = ref_wavelength * ref_wavelength / (2.0 * PI * SPEED_OF_LIGHT);
    let beta2 = -d * k;
    let beta3 = k * k * (s + 2.0 * d / ref_wavelength);
    (beta2, beta3)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Equalization {
    /// Launch profile restored after every span.
    Ideal,
    /// Only `compensation` of the Raman power transfer is undone per span;
    /// every `reset_period`-th amplifier restores the launch profile.
    Partial {
        compensation: f64,
        reset_period: usize,
    },
}

impl Equalization {
    pub fn id(&self) -> String {
        match self {
            Equalization::Ideal => "ideal".to_string(),
            Equalization::Partial {
                compensation,
                reset_period,
            } => format!("partial(c={compensation},R={reset_period})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplifierSpec {
    pub noise_figure_db: PerBand<f64>,
    pub equalization: Equalization,
    /// Polarizations the ASE is counted in. Launch powers are totals over
    /// both polarizations, so 2 is the consistent choice; 1 gives the
    /// single-polarization budget.
    pub ase_polarizations: u32,
    pub ase_model: AseModel,
}

/// How amplifier gain maps to ASE.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AseModel {
    /// `n_sp·(G−1)` with `n_sp = NF/2`; accurate for large gains.
    #[default]
    HighGain,
    /// `n_sp·(G−1) = (NF·G − 1)/2`, from the noise figure definition at any gain.
    Exact,
}

impl Default for AmplifierSpec {
    fn default() -> Self {
        AmplifierSpec {
            noise_figure_db: PerBand {
                s: 7.0,
                c: 4.0,
                l: 6.0,
            },
            equalization: Equalization::Ideal,
            ase_polarizations: 2,
            ase_model: AseModel::HighGain,
        }
    }
}

impl AmplifierSpec {
    pub fn noise_figure(&self, band: Band) -> f64 {
        *self.noise_figure_db.get(band)
    }

    /// Single-sided ASE power per unit `h·f·(G−1)·B`: `n_sp·pol` with the
    /// high-gain `n_sp = NF/2`.
    pub fn ase_factor(&self, band: Band) -> f64 {
        0.5 * crate::units::db_to_linear(self.noise_figure(band)) * self.ase_polarizations as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.ase_polarizations) {
            return Err(Error::validation("amplifier.ase_polarizations", "must be 1 or 2"));
        }
        for band in Band::ALL {
            let nf = self.noise_figure(band);
            if !(nf > 0.0) {
                return Err(Error::validation(
                    format!("amplifier.nf_{}_db", band.name().to_lowercase()),
                    "noise figure must exceed 0 dB",
                ));
            }
        }
        if let Equalization::Partial {
            compensation,
            reset_period,
        } = self.equalization
        {
            if !(0.0..=1.0).contains(&compensation) {
                return Err(Error::validation("amplifier.compensation", "must lie in [0, 1]"));
            }
            if reset_period < 1 {
                return Err(Error::validation("amplifier.reset_period", "must be at least 1"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkSpec {
    pub n_spans: usize,
    pub fiber: FiberSpec,
    pub amplifier: AmplifierSpec,
}

impl LinkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_spans < 1 {
            return Err(Error::validation("link.n_spans", "must be at least 1"));
        }
        self.fiber.validate()?;
        self.amplifier.validate()
    }
}

/// Per-channel launch power in watts, aligned with a [`ChannelPlan`].
#[derive(Clone, Debug, PartialEq)]
pub struct PowerVector(Vec<f64>);

impl PowerVector {
    pub fn new(watts: Vec<f64>) -> Result<Self> {
        if watts.is_empty() {
            return Err(Error::validation("launch", "empty power vector"));
        }
        if let Some(i) = watts.iter().position(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(Error::validation(
                "launch",
                format!("channel {i} power {} W is not positive", watts[i]),
            ));
        }
        Ok(PowerVector(watts))
    }

    pub fn from_dbm(dbm: &[f64]) -> Result<Self> {
        Self::new(dbm.iter().map(|p| dbm_to_watt(*p)).collect())
    }

    pub fn uniform_dbm(n: usize, dbm: f64) -> Self {
        PowerVector(vec![dbm_to_watt(dbm); n])
    }

    pub fn to_dbm(&self) -> Vec<f64> {
        self.0.iter().map(|p| watt_to_dbm(*p).unwrap()).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn check_plan(&self, plan: &ChannelPlan) -> Result<()> {
        if self.len() != plan.len() {
            return Err(Error::validation(
                "launch",
                format!("{} powers for {} channels", self.len(), plan.len()),
            ));
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for PowerVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn beta2_for_standard_dispersion() {
        let (b2, b3) = dispersion_coefficients(ps_nm_km_to_si(18.0), ps_nm2_km_to_si(0.067), 1550e-9);
        // ps²/km = 1e-27 s²/m
        assert_relative_eq!(b2 / 1e-27, -22.96, max_relative = 1e-3);
        assert!(b3 > 0.0);
        let (z2, z3) = dispersion_coefficients(0.0, 0.0, 1550e-9);
        assert_eq!((z2, z3), (0.0, 0.0));
    }

    proptest! {
        #[test]
        fn dispersion_is_linear(d1 in -30.0f64..30.0, d2 in -30.0f64..30.0, s1 in -0.1f64..0.1, s2 in -0.1f64..0.1) {
            let f = |d: f64, s: f64| dispersion_coefficients(ps_nm_km_to_si(d), ps_nm2_km_to_si(s), 1550e-9);
            let (a2, a3) = f(d1, s1);
            let (b2, b3) = f(d2, s2);
            let (c2, c3) = f(d1 + d2, s1 + s2);
            prop_assert!((a2 + b2 - c2).abs() <= 1e-12 * (a2.abs() + b2.abs() + 1e-40));
            prop_assert!((a3 + b3 - c3).abs() <= 1e-12 * (a3.abs() + b3.abs() + 1e-60));
        }
    }

    #[test]
    fn effective_length_limits() {
        assert_relative_eq!(effective_length(0.0, 70e3), 70e3);
        let a = db_per_km_to_np_per_m(0.16);
        assert_relative_eq!(effective_length(a, 70e3), (1.0 - (-a * 70e3).exp()) / a, max_relative = 1e-14);
    }

    #[test]
    fn validation_paths() {
        let mut f = FiberSpec::default();
        f.span_length = -70e3;
        let err = f.validate().unwrap_err().to_string();
        assert!(err.contains("fiber.span_length"), "{err}");
        let amp = AmplifierSpec {
            equalization: Equalization::Partial {
                compensation: 1.5,
                reset_period: 5,
            },
            ..AmplifierSpec::default()
        };
        assert!(amp.validate().is_err());
        let amp = AmplifierSpec {
            ase_polarizations: 3,
            ..AmplifierSpec::default()
        };
        assert!(amp.validate().is_err());
        assert!(PowerVector::new(vec![1e-3, 0.0]).is_err());
    }
}
