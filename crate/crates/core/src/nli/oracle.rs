//! Monte-Carlo evaluation of the ISRS GN double integral.
//!
//! `G_NLI(f) = (16/27)·γ²·∬ G(f1)·G(f2)·G(f1+f2-f)·|ζ|² df1 df2` with
//! `ζ = ∫_0^L sqrt(ρ(z,f1)·ρ(z,f2)·ρ(z,f3) / ρ(z,f))·e^{jφz} dz`, every ρ
//! normalized to its launch value and `φ = -4π²(f1-f)(f2-f)(β2 + πβ3(f1+f2))`.
//! The profile is log-linear between samples, so each z segment is
//! integrated exactly.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fiber::{FiberSpec, PowerVector};
use crate::plan::ChannelPlan;
use crate::raman::PowerProfile;

const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleQuadrature {
    pub n_mc: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleEstimate {
    /// NLI coefficient, 1/W².
    pub eta: f64,
    /// Monte-Carlo standard error of `eta`.
    pub std_error: f64,
}

struct Support {
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Cumulative bandwidth, for sampling a slot proportionally to its width.
    cum: Vec<f64>,
    total: f64,
}

impl Support {
    fn new(plan: &ChannelPlan) -> Self {
        let mut cum = Vec::with_capacity(plan.len());
        let mut acc = 0.0;
        let (mut lo, mut hi) = (Vec::new(), Vec::new());
        for ch in plan.channels() {
            lo.push(ch.offset_frequency - 0.5 * ch.bandwidth);
            hi.push(ch.offset_frequency + 0.5 * ch.bandwidth);
            acc += ch.bandwidth;
            cum.push(acc);
        }
        Support {
            lo,
            hi,
            cum,
            total: acc,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> (usize, f64) {
        let u = rng.random::<f64>() * self.total;
        let c = self.cum.partition_point(|&x| x <= u).min(self.cum.len() - 1);
        let start = if c == 0 { 0.0 } else { self.cum[c - 1] };
        let f = self.lo[c] + (u - start).clamp(0.0, self.hi[c] - self.lo[c]);
        (c, f)
    }

    fn locate(&self, f: f64) -> Option<usize> {
        let c = self.lo.partition_point(|&x| x <= f);
        if c == 0 {
            return None;
        }
        (f < self.hi[c - 1]).then_some(c - 1)
    }
}

/// Estimates the NLI coefficient of `channel_index` from the GN integral
/// over a numerically solved span profile.
pub fn eta_oracle(
    plan: &ChannelPlan,
    launch: &PowerVector,
    fiber: &FiberSpec,
    profile: &PowerProfile,
    channel_index: usize,
    quad: OracleQuadrature,
) -> Result<OracleEstimate> {
    if quad.n_mc < 1000 {
        return Err(Error::Precision(format!(
            "{} Monte-Carlo samples (need at least 1000)",
            quad.n_mc
        )));
    }
    launch.check_plan(plan)?;
    if channel_index >= plan.len() {
        return Err(Error::validation("channel_index", "no such channel"));
    }
    if profile.n_channels() != plan.len() || profile.z.len() < 2 {
        return Err(Error::validation("profile", "does not match the plan"));
    }
    let z_end = *profile.z.last().unwrap();
    if (z_end - fiber.span_length).abs() > 1e-6 * fiber.span_length {
        return Err(Error::validation("profile", "does not cover the span"));
    }
    let n_seg = profile.z.len() - 1;
    let h = z_end / n_seg as f64;
    if profile
        .z
        .windows(2)
        .any(|w| ((w[1] - w[0]) - h).abs() > 1e-6 * h)
    {
        return Err(Error::validation("profile", "z grid must be uniform"));
    }

    // log of normalized power, [channel][z]
    let n = plan.len();
    let log_rho: Vec<Vec<f64>> = (0..n)
        .map(|c| {
            let p0 = profile.powers[0][c];
            profile.powers.iter().map(|row| (row[c] / p0).ln()).collect()
        })
        .collect();

    let support = Support::new(plan);
    let f = plan.channels()[channel_index].offset_frequency;
    if support.locate(f).is_none() {
        return Err(Error::Domain(plan.channels()[channel_index].abs_frequency));
    }
    let psd: Vec<f64> = plan
        .channels()
        .iter()
        .map(|ch| launch[ch.index] / ch.bandwidth)
        .collect();
    let (beta2, beta3) = fiber.dispersion_at(plan);

    let n_chunks = quad.n_mc.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(quad.seed);
            rng.set_stream(chunk as u64);
            let count = CHUNK.min(quad.n_mc - chunk * CHUNK);
            let mut amp = vec![0.0; n_seg + 1];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let (c1, f1) = support.sample(&mut rng);
                let (c2, f2) = support.sample(&mut rng);
                let f3 = f1 + f2 - f;
                let Some(c3) = support.locate(f3) else {
                    continue;
                };
                for (k, a) in amp.iter_mut().enumerate() {
                    *a = 0.5
                        * (log_rho[c1][k] + log_rho[c2][k] + log_rho[c3][k]
                            - log_rho[channel_index][k]);
                }
                let phase = -4.0 * PI * PI * (f1 - f) * (f2 - f) * (beta2 + PI * beta3 * (f1 + f2));
                let zeta = segment_integral(&amp, h, phase);
                let v = psd[c1] * psd[c2] * psd[c3] * zeta.norm_sqr();
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (sum, sum2) = partial
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));

    let n_mc = quad.n_mc as f64;
    let mean = sum / n_mc;
    let var = (sum2 / n_mc - mean * mean).max(0.0) * n_mc / (n_mc - 1.0);
    let volume = support.total * support.total;
    let bw = plan.channels()[channel_index].bandwidth;
    let p3 = launch[channel_index].powi(3);
    let scale = 16.0 / 27.0 * fiber.gamma * fiber.gamma * volume * bw / p3;
    Ok(OracleEstimate {
        eta: scale * mean,
        std_error: scale * (var / n_mc).sqrt(),
    })
}

/// `∫ exp(g(z) + jφz) dz` with `g` piecewise linear on a uniform grid.
fn segment_integral(log_amp: &[f64], h: f64, phase: f64) -> Complex64 {
    let rot = Complex64::from_polar(1.0, phase * h);
    let mut carrier = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut e0 = log_amp[0].exp();
    for k in 0..log_amp.len() - 1 {
        let e1 = log_amp[k + 1].exp();
        let slope = (log_amp[k + 1] - log_amp[k]) / h;
        let w = Complex64::new(slope, phase);
        let wh = w * h;
        // (e^{wh} - 1) / w
        let factor = if wh.norm() < 1e-4 {
            h * (1.0 + wh * (0.5 + wh / 6.0))
        } else {
            ((e1 / e0) * rot - 1.0) / w
        };
        acc += carrier * e0 * factor;
        carrier *= rot;
        e0 = e1;
    }
    acc
}
