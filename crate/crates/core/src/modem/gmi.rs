//! Bit-metric generalized mutual information over the complex AWGN channel.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::Constellation;
use crate::error::{Error, Result};

pub const DEFAULT_GH_ORDER: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GmiMethod {
    GaussHermite { order: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for GmiMethod {
    fn default() -> Self {
        GmiMethod::GaussHermite {
            order: DEFAULT_GH_ORDER,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmiEstimate {
    /// bit per 2D symbol
    pub gmi: f64,
    /// Only for Monte-Carlo.
    pub std_error: Option<f64>,
}

/// Nodes and weights of the physicists' Gauss-Hermite rule (weight e^{-x²}).
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let pim4 = PI.powf(-0.25);
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            // Orthonormal Hermite recurrence.
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / (j + 1) as f64).sqrt() * p2 - (j as f64 / (j + 1) as f64).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    x.reverse();
    w.reverse();
    (x, w)
}

/// Sum over bits of `ln(Σ_all e^{-d²/σ²} / Σ_{agreeing} e^{-d²/σ²})` for one
/// received sample, with `tx` the transmitted label.
fn bit_loss(c: &Constellation, y: Complex64, tx: u32, inv_var: f64, scratch: &mut [f64]) -> f64 {
    let pts = c.points();
    let mut dmin = f64::INFINITY;
    for (j, p) in pts.iter().enumerate() {
        let d = (y - p).norm_sqr();
        scratch[j] = d;
        dmin = dmin.min(d);
    }
    let bits = c.bits() as usize;
    let mut total = 0.0;
    let mut agree = [0.0f64; 32];
    for (j, &l) in c.labels().iter().enumerate() {
        let a = (scratch[j] - dmin) * inv_var;
        // e^{-40} is below round-off of the total, which is at least 1
        if a > 40.0 {
            continue;
        }
        let e = (-a).exp();
        total += e;
        let diff = l ^ tx;
        for (b, a) in agree.iter_mut().enumerate().take(bits) {
            if (diff >> b) & 1 == 0 {
                *a += e;
            }
        }
    }
    let lt = total.ln();
    agree[..bits].iter().map(|a| lt - a.ln()).sum()
}

/// GMI of `c` at linear SNR `snr` (noise variance `1/snr` per 2D symbol).
pub fn gmi(c: &Constellation, snr: f64, method: GmiMethod) -> Result<GmiEstimate> {
    if !(snr > 0.0) {
        return Err(Error::validation("snr", "must be positive"));
    }
    let m = c.bits() as f64;
    let var = 1.0 / snr;
    let sigma = var.sqrt();
    let inv_var = snr;
    match method {
        GmiMethod::GaussHermite { order } => {
            if order < 4 {
                return Err(Error::Precision(format!("Gauss-Hermite order {order} < 4")));
            }
            let (x, w) = gauss_hermite(order);
            let w_max = w.iter().cloned().fold(0.0, f64::max);
            let nodes: Vec<(Complex64, f64)> = x
                .iter()
                .zip(&w)
                .flat_map(|(xu, wu)| x.iter().zip(&w).map(move |(xv, wv)| (Complex64::new(*xu, *xv), wu * wv)))
                .filter(|n| n.1 > 1e-14 * w_max * w_max)
                .collect();
            let mut scratch = vec![0.0; c.len()];
            let mut acc = 0.0;
            for (p, &l) in c.points().iter().zip(c.labels()) {
                for (z, wz) in &nodes {
                    acc += wz * bit_loss(c, p + sigma * z, l, inv_var, &mut scratch);
                }
            }
            let loss = acc / (PI * c.len() as f64 * LN_2);
            Ok(GmiEstimate {
                gmi: (m - loss).clamp(0.0, m),
                std_error: None,
            })
        }
        GmiMethod::MonteCarlo { samples, seed } => {
            if samples < 10_000 {
                return Err(Error::Precision(format!("{samples} Monte-Carlo samples < 10^4")));
            }
            const CHUNK: usize = 8192;
            let chunks = samples.div_ceil(CHUNK);
            let parts: Vec<(f64, f64)> = (0..chunks)
                .into_par_iter()
                .map(|k| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(k as u64);
                    let mut scratch = vec![0.0; c.len()];
                    let count = CHUNK.min(samples - k * CHUNK);
                    let (mut s, mut s2) = (0.0, 0.0);
                    let s_half = (0.5 * var).sqrt();
                    for _ in 0..count {
                        let t = rng.random_range(0..c.len());
                        let n_re: f64 = rng.sample(StandardNormal);
                        let n_im: f64 = rng.sample(StandardNormal);
                        let y = c.points()[t] + s_half * Complex64::new(n_re, n_im);
                        let v = bit_loss(c, y, c.labels()[t], inv_var, &mut scratch) / LN_2;
                        s += v;
                        s2 += v * v;
                    }
                    (s, s2)
                })
                .collect();
            let (s, s2) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
            let n = samples as f64;
            let mean = s / n;
            let var_s = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
            Ok(GmiEstimate {
                gmi: m - mean,
                std_error: Some((var_s / n).sqrt()),
            })
        }
    }
}

/// `1 − (m − gmi)/m`.
pub fn ngmi(gmi: f64, bits: u32) -> f64 {
    let m = bits as f64;
    1.0 - (m - gmi) / m
}

/// GMI and its gradient with respect to the point coordinates, evaluated with
/// the Gauss-Hermite rule. The gradient is returned per point as
/// `∂/∂re + j·∂/∂im`.
pub(crate) fn gmi_with_gradient(c: &Constellation, snr: f64, order: usize) -> (f64, Vec<Complex64>) {
    let (x, w) = gauss_hermite(order);
    let pts = c.points();
    let labels = c.labels();
    let n = pts.len();
    let bits = c.bits() as usize;
    let m = bits as f64;
    let sigma = (1.0 / snr).sqrt();
    let inv_var = snr;

    let mut grad = vec![Complex64::new(0.0, 0.0); n];
    let mut loss = 0.0;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for t in 0..n {
        let tx = labels[t];
        for (xu, wu) in x.iter().zip(&w) {
            for (xv, wv) in x.iter().zip(&w) {
                let weight = wu * wv;
                let y = pts[t] + sigma * Complex64::new(*xu, *xv);
                let mut dmin = f64::INFINITY;
                for j in 0..n {
                    d[j] = (y - pts[j]).norm_sqr();
                    dmin = dmin.min(d[j]);
                }
                let mut total = 0.0;
                let mut agree = [0.0f64; 32];
                for j in 0..n {
                    e[j] = (-(d[j] - dmin) * inv_var).exp();
                    total += e[j];
                    let diff = labels[j] ^ tx;
                    for (b, a) in agree.iter_mut().enumerate().take(bits) {
                        if (diff >> b) & 1 == 0 {
                            *a += e[j];
                        }
                    }
                }
                let lt = total.ln();
                loss += weight * agree[..bits].iter().map(|a| lt - a.ln()).sum::<f64>();

                // T = m·ln S − Σ_b ln S_b; coefficient of each exponent term.
                let mut dy = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    let diff = labels[j] ^ tx;
                    let mut cj = m / total;
                    for (b, a) in agree.iter().enumerate().take(bits) {
                        if (diff >> b) & 1 == 0 {
                            cj -= 1.0 / a;
                        }
                    }
                    let g = (cj * e[j] * 2.0 * inv_var) * (y - pts[j]);
                    grad[j] += weight * g;
                    dy -= g;
                }
                grad[t] += weight * dy;
            }
        }
    }
    let norm = 1.0 / (PI * n as f64 * LN_2);
    let gmi = m - loss * norm;
    // d(GMI) = -norm · d(loss)
    grad.iter_mut().for_each(|g| *g *= -norm);
    (gmi, grad)
}

/// GMI as a function of SNR, tabulated on a uniform dB grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GmiTable {
    bits: u32,
    snr_db_min: f64,
    step_db: f64,
    values: Vec<f64>,
}

impl GmiTable {
    pub const DEFAULT_RANGE_DB: (f64, f64) = (-20.0, 35.0);
    pub const DEFAULT_STEP_DB: f64 = 0.1;

    pub fn build(c: &Constellation, range_db: (f64, f64), step_db: f64, order: usize) -> Result<Self> {
        if !(step_db > 0.0) || !(range_db.1 > range_db.0) {
            return Err(Error::validation("gmi table", "empty SNR range"));
        }
        let n = ((range_db.1 - range_db.0) / step_db).round() as usize + 1;
        let values = (0..n)
            .into_par_iter()
            .map(|k| {
                let snr_db = range_db.0 + k as f64 * step_db;
                gmi(c, 10f64.powf(snr_db / 10.0), GmiMethod::GaussHermite { order }).map(|g| g.gmi)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut values = values;
        // Enforce monotonicity against quadrature round-off near saturation.
        for k in 1..values.len() {
            values[k] = values[k].max(values[k - 1]);
        }
        Ok(GmiTable {
            bits: c.bits(),
            snr_db_min: range_db.0,
            step_db,
            values,
        })
    }

    pub fn with_defaults(c: &Constellation) -> Result<Self> {
        Self::build(c, Self::DEFAULT_RANGE_DB, Self::DEFAULT_STEP_DB, DEFAULT_GH_ORDER)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Linear interpolation in dB; below the table the GMI scales with the
    /// linear SNR, above it saturates at the last entry.
    pub fn gmi(&self, snr_linear: f64) -> f64 {
        if !(snr_linear > 0.0) {
            return 0.0;
        }
        if snr_linear.is_infinite() {
            return self.bits as f64;
        }
        let snr_db = 10.0 * snr_linear.log10();
        let pos = (snr_db - self.snr_db_min) / self.step_db;
        if pos <= 0.0 {
            return self.values[0] * 10f64.powf((snr_db - self.snr_db_min) / 10.0);
        }
        let k = pos.floor() as usize;
        if k + 1 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        let t = pos - k as f64;
        self.values[k] * (1.0 - t) + self.values[k + 1] * t
    }
}
