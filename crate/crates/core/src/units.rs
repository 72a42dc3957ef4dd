//! Physical constants and engineering-unit conversions.
//!
//! Everything inside the crate is SI (Hz, W, m, Np/m, s²/m). The helpers
//! here are the only place where dBm, dB/km, ps/nm/km, THz and nm appear.

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

pub fn dbm_to_watt(p_dbm: f64) -> f64 {
    1e-3 * 10f64.powf(p_dbm / 10.0)
}

pub fn watt_to_dbm(p_w: f64) -> Result<f64> {
    if !(p_w > 0.0) {
        return Err(Error::validation("power", format!("{p_w} W is not positive")));
    }
    Ok(10.0 * (p_w / 1e-3).log10())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn wavelength_to_frequency(lambda_m: f64) -> f64 {
    SPEED_OF_LIGHT / lambda_m
}

pub fn frequency_to_wavelength(f_hz: f64) -> f64 {
    SPEED_OF_LIGHT / f_hz
}

/// dB/km (power) to Np/m with `P(z) = P(0)·exp(-αz)`.
pub fn db_per_km_to_np_per_m(db_km: f64) -> f64 {
    db_km * std::f64::consts::LN_10 / 10.0 / 1e3
}

pub fn np_per_m_to_db_per_km(np_m: f64) -> f64 {
    np_m * 1e3 * 10.0 / std::f64::consts::LN_10
}

/// ps/(nm·km) to s/m².
pub fn ps_nm_km_to_si(d: f64) -> f64 {
    d * 1e-6
}

/// ps/(nm²·km) to s/m³.
pub fn ps_nm2_km_to_si(s: f64) -> f64 {
    s * 1e3
}

/// 1/(W·km) to 1/(W·m).
pub fn per_w_km_to_si(gamma: f64) -> f64 {
    gamma * 1e-3
}

/// 1/(W·km·THz) to 1/(W·m·Hz).
pub fn raman_slope_to_si(cr: f64) -> f64 {
    cr * 1e-15
}

pub fn raman_slope_from_si(cr: f64) -> f64 {
    cr * 1e15
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn dbm_fixed_points() {
        assert_relative_eq!(dbm_to_watt(0.0), 1e-3, max_relative = 1e-15);
        assert_relative_eq!(dbm_to_watt(10.0), 1e-2, max_relative = 1e-15);
        // 1e-3 * 10^(-1.12)
        assert_relative_eq!(dbm_to_watt(-11.2), 7.585_775_750_291_836e-5, max_relative = 1e-12);
        assert!(watt_to_dbm(0.0).is_err());
        assert!(watt_to_dbm(-1.0).is_err());
    }

    #[test]
    fn optical_frequencies() {
        assert_relative_eq!(wavelength_to_frequency(1550e-9), 193.414_489e12, max_relative = 1e-8);
        assert_relative_eq!(wavelength_to_frequency(1540e-9), 194.670_427e12, max_relative = 1e-8);
    }

    #[test]
    fn attenuation_conversion() {
        // 0.16 dB/km over 70 km is 11.2 dB
        let a = db_per_km_to_np_per_m(0.16);
        assert_relative_eq!(linear_to_db((-a * 70e3).exp()), -11.2, max_relative = 1e-12);
        assert_relative_eq!(np_per_m_to_db_per_km(a), 0.16, max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn dbm_round_trip(p in -80.0f64..40.0) {
            let back = watt_to_dbm(dbm_to_watt(p)).unwrap();
            prop_assert!((back - p).abs() <= 1e-12 * p.abs().max(1.0));
        }

        #[test]
        fn wavelength_round_trip(l in 1.0e-6f64..2.0e-6) {
            let back = frequency_to_wavelength(wavelength_to_frequency(l));
            prop_assert!(((back - l) / l).abs() <= 1e-12);
        }
    }
}
