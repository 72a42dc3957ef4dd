use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gmi::gmi_with_gradient;
use super::Constellation;
use crate::error::{Error, Result};

/// Quadrature order used inside the ascent loop.
pub const SHAPING_GH_ORDER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapingConfig {
    pub iterations: usize,
    /// Initial step on the normalized gradient (unit-energy coordinates).
    pub step: f64,
    /// Step multiplier applied every `decay_every` iterations.
    pub decay: f64,
    pub decay_every: usize,
    /// Amplitude of the seeded perturbation applied to the QAM start. Breaks
    /// the square symmetry; square QAM is a local optimum of the ascent.
    pub jitter: f64,
}

impl Default for ShapingConfig {
    fn default() -> Self {
        ShapingConfig {
            iterations: 400,
            step: 0.1,
            decay: 0.9,
            decay_every: 50,
            jitter: 0.05,
        }
    }
}

/// Geometric shaping by gradient ascent on the GMI at `target_snr` (linear),
/// starting from Gray-labelled square QAM. Returns the best iterate; with zero
/// iterations that is the normalized square QAM itself.
pub fn shape_constellation(bits: u32, target_snr: f64, seed: u64, iterations: usize) -> Result<Constellation> {
    shape_constellation_with(
        bits,
        target_snr,
        seed,
        ShapingConfig {
            iterations,
            ..ShapingConfig::default()
        },
    )
}

pub fn shape_constellation_with(
    bits: u32,
    target_snr: f64,
    seed: u64,
    cfg: ShapingConfig,
) -> Result<Constellation> {
    if bits != 4 && bits != 6 {
        return Err(Error::Capability(format!("geometric shaping of {bits}-bit formats")));
    }
    if !(target_snr > 0.0) || !target_snr.is_finite() {
        return Err(Error::validation("target_snr", "must be positive and finite"));
    }
    let start = Constellation::square_qam(bits)?;
    if cfg.iterations == 0 {
        return Ok(start);
    }

    let (start_gmi, _) = gmi_with_gradient(&start, target_snr, SHAPING_GH_ORDER);
    let mut best = (start_gmi, start.clone());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = start;
    for p in cur.points_mut() {
        *p += cfg.jitter * Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    }
    cur.normalize()?;

    let mut step = cfg.step;
    for it in 0..cfg.iterations {
        if it > 0 && cfg.decay_every > 0 && it % cfg.decay_every == 0 {
            step *= cfg.decay;
        }
        let (g, grad) = gmi_with_gradient(&cur, target_snr, SHAPING_GH_ORDER);
        if g > best.0 {
            best = (g, cur.clone());
        }
        let norm = grad.iter().map(|d| d.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            break;
        }
        let scale = step * (cur.len() as f64).sqrt() / norm;
        for (p, d) in cur.points_mut().iter_mut().zip(&grad) {
            *p += scale * d;
        }
        cur.normalize()?;
    }
    let (g, _) = gmi_with_gradient(&cur, target_snr, SHAPING_GH_ORDER);
    if g > best.0 {
        best = (g, cur);
    }
    Ok(best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::{excess_kurtosis, gmi, GmiMethod};

    #[test]
    fn zero_iterations_is_square_qam() {
        let c = shape_constellation(4, 5.0, 1, 0).unwrap();
        assert_eq!(c, Constellation::square_qam(4).unwrap());
        assert!((excess_kurtosis(&c) + 0.68).abs() < 1e-14);
    }

    #[test]
    fn unsupported_order() {
        assert!(matches!(shape_constellation(2, 5.0, 1, 10), Err(Error::Capability(_))));
        assert!(matches!(shape_constellation(8, 5.0, 1, 10), Err(Error::Capability(_))));
    }

    #[test]
    fn shaping_never_loses_gmi() {
        let snr = 10f64.powf(0.7);
        let qam = Constellation::square_qam(4).unwrap();
        let c = shape_constellation(4, snr, 3, 60).unwrap();
        let method = GmiMethod::GaussHermite { order: SHAPING_GH_ORDER };
        let g0 = gmi(&qam, snr, method).unwrap().gmi;
        let g1 = gmi(&c, snr, method).unwrap().gmi;
        assert!(g1 >= g0);
        let (mu2, _) = c.moments();
        assert!((mu2 - 1.0).abs() < 1e-12);
    }
}
