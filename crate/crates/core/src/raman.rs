//! Signal power evolution under inter-channel stimulated Raman scattering.
//!
//! Three pieces live here: the coupled power ODEs with a triangular Raman
//! gain (integrated with fixed-step RK4), the first-order analytical
//! profile, and the fit that maps a numerically solved profile onto
//! first-order parameters so the closed-form NLI can be used beyond the
//! bandwidth where the triangular approximation holds.

use std::io::Write;

use crate::error::{Error, Result};
use crate::fiber::{FiberSpec, PowerVector};
use crate::plan::ChannelPlan;

pub const DEFAULT_RK4_STEP: f64 = 50.0;

/// Channels closer than this to the grid center get their fitted slope by
/// interpolation; the per-channel equation is ill-conditioned there.
const CENTER_EXCLUSION_HZ: f64 = 100e9;

#[derive(Clone, Debug, PartialEq)]
pub struct PowerProfile {
    pub z: Vec<f64>,
    /// `powers[k][i]`: power of channel `i` at `z[k]`, in W.
    pub powers: Vec<Vec<f64>>,
}

impl PowerProfile {
    pub fn launch(&self) -> &[f64] {
        &self.powers[0]
    }

    pub fn end(&self) -> &[f64] {
        &self.powers[self.powers.len() - 1]
    }

    pub fn n_channels(&self) -> usize {
        self.powers[0].len()
    }

    pub fn total_at(&self, k: usize) -> f64 {
        self.powers[k].iter().sum()
    }

    /// CSV with header `z_m,ch0,ch1,...`, powers in W.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "z_m")?;
        for i in 0..self.n_channels() {
            write!(out, ",ch{i}")?;
        }
        writeln!(out)?;
        for (z, row) in self.z.iter().zip(&self.powers) {
            write!(out, "{z}")?;
            for p in row {
                write!(out, ",{p:e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Per-channel end-of-span net gain, `10·log10(P(L)/P(0))`.
pub fn net_gain_db(profile: &PowerProfile) -> Vec<f64> {
    profile
        .launch()
        .iter()
        .zip(profile.end())
        .map(|(p0, pl)| 10.0 * (pl / p0).log10())
        .collect()
}

/// RK4 solution of `dP_i/dz = -α_i P_i - Cr·P_i·Σ_j (f_i - f_j) P_j`, sampled
/// on `n_z` uniformly spaced points, with the default 50 m step.
pub fn solve_raman_ode(
    plan: &ChannelPlan,
    launch: &PowerVector,
    fiber: &FiberSpec,
    n_z: usize,
) -> Result<PowerProfile> {
    solve_raman_ode_with_step(plan, launch, fiber, n_z, DEFAULT_RK4_STEP)
}

pub fn solve_raman_ode_with_step(
    plan: &ChannelPlan,
    launch: &PowerVector,
    fiber: &FiberSpec,
    n_z: usize,
    max_step: f64,
) -> Result<PowerProfile> {
    if n_z < 2 {
        return Err(Error::validation("n_z", "need at least two samples"));
    }
    if !(max_step > 0.0) {
        return Err(Error::validation("fiber.raman_step_m", "must be positive"));
    }
    launch.check_plan(plan)?;
    fiber.check_plan(plan)?;

    let n = plan.len();
    let length = fiber.span_length;
    let intervals = n_z - 1;
    let per_interval = ((length / intervals as f64) / max_step).ceil().max(1.0) as usize;
    let h = length / (intervals * per_interval) as f64;

    // Frequency differences are reference-free, so offsets are used to keep
    // the sums well conditioned.
    let freq = plan.offsets();
    let alpha: Vec<f64> = (0..n).map(|i| fiber.alpha(i)).collect();
    let cr = fiber.raman_slope;

    let rhs = |p: &[f64], out: &mut [f64]| {
        let (s0, s1) = moments(p, &freq);
        for i in 0..n {
            out[i] = -p[i] * (alpha[i] + cr * (freq[i] * s0 - s1));
        }
    };

    let mut state = launch.as_slice().to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    let mut z_samples = Vec::with_capacity(n_z);
    let mut powers = Vec::with_capacity(n_z);
    z_samples.push(0.0);
    powers.push(state.clone());

    let mut step = 0usize;
    for sample in 1..n_z {
        for _ in 0..per_interval {
            rhs(&state, &mut k1);
            for i in 0..n {
                tmp[i] = state[i] + 0.5 * h * k1[i];
            }
            rhs(&tmp, &mut k2);
            for i in 0..n {
                tmp[i] = state[i] + 0.5 * h * k2[i];
            }
            rhs(&tmp, &mut k3);
            for i in 0..n {
                tmp[i] = state[i] + h * k3[i];
            }
            rhs(&tmp, &mut k4);
            for i in 0..n {
                state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            step += 1;
            if let Some(i) = state.iter().position(|p| !p.is_finite() || *p <= 0.0) {
                return Err(Error::Numerical {
                    channel: i,
                    z: step as f64 * h,
                });
            }
        }
        z_samples.push(if sample == intervals {
            length
        } else {
            sample as f64 * per_interval as f64 * h
        });
        powers.push(state.clone());
    }

    Ok(PowerProfile {
        z: z_samples,
        powers,
    })
}

/// `(Σ P_j, Σ f_j·P_j)` with independent partial sums, which keeps the hot
/// loop of the integrator from serializing on one accumulator.
fn moments(p: &[f64], f: &[f64]) -> (f64, f64) {
    let mut a = [0.0f64; 4];
    let mut b = [0.0f64; 4];
    let pc = p.chunks_exact(4);
    let fc = f.chunks_exact(4);
    let (pr, fr) = (pc.remainder(), fc.remainder());
    for (pp, ff) in pc.zip(fc) {
        for k in 0..4 {
            a[k] += pp[k];
            b[k] += pp[k] * ff[k];
        }
    }
    let mut s0 = (a[0] + a[1]) + (a[2] + a[3]);
    let mut s1 = (b[0] + b[1]) + (b[2] + b[3]);
    for (pp, ff) in pr.iter().zip(fr) {
        s0 += pp;
        s1 += pp * ff;
    }
    (s0, s1)
}

/// Log of the first-order normalization denominator,
/// `ln Σ_j P_j(0)·exp(-P_tot·cr·L_eff·Δf_j)`.
fn log_norm(launch: &[f64], offsets: &[f64], tilt: f64) -> f64 {
    let exps: Vec<f64> = offsets.iter().map(|f| -tilt * f).collect();
    let m = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = launch.iter().zip(&exps).map(|(p, e)| p * (e - m).exp()).sum();
    m + s.ln()
}

/// First-order ISRS profile at distance `z`:
/// `P_i(z) = P_i(0)·e^{-α_i z}·P_tot·e^{-P_tot·cr·L_eff(z)·Δf_i} / Σ_j P_j(0)·e^{-P_tot·cr·L_eff(z)·Δf_j}`.
pub fn first_order_profile(
    plan: &ChannelPlan,
    launch: &PowerVector,
    fiber: &FiberSpec,
    cr: f64,
    z: f64,
) -> Result<Vec<f64>> {
    if !(0.0..=fiber.span_length * (1.0 + 1e-12)).contains(&z) {
        return Err(Error::validation("z", format!("{z} m outside the span")));
    }
    launch.check_plan(plan)?;
    let p = launch.as_slice();
    let offsets = plan.offsets();
    let p_tot = launch.total();
    let tilt = p_tot * cr * fiber.effective_length(z);
    let ln_d = log_norm(p, &offsets, tilt);
    Ok((0..plan.len())
        .map(|i| p[i] * (-fiber.alpha(i) * z + p_tot.ln() - tilt * offsets[i] - ln_d).exp())
        .collect())
}

/// Parameters that make the first-order profile reproduce a numerical one.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveRamanFit {
    /// Best single slope, 1/(W·m·Hz).
    pub global_cr_hat: f64,
    /// Per-channel slopes reproducing each channel's end-of-span gain.
    pub per_channel_cr_hat: Vec<f64>,
    /// Largest end-of-span dB mismatch of the global fit.
    pub fit_residual_db: f64,
    /// `ln` of the normalization denominator at the global slope, held fixed
    /// when the per-channel slopes are solved.
    pub log_norm: f64,
    pub total_power: f64,
    pub effective_length: f64,
}

impl EffectiveRamanFit {
    /// Fit that describes a span without any Raman transfer.
    pub fn none(plan: &ChannelPlan, launch: &PowerVector, fiber: &FiberSpec) -> Self {
        let p_tot = launch.total();
        EffectiveRamanFit {
            global_cr_hat: 0.0,
            per_channel_cr_hat: vec![0.0; plan.len()],
            fit_residual_db: 0.0,
            log_norm: p_tot.ln(),
            total_power: p_tot,
            effective_length: fiber.effective_length(fiber.span_length),
        }
    }

    /// End-of-span powers of the first-order model with the per-channel
    /// slopes and the frozen denominator.
    pub fn end_powers(&self, plan: &ChannelPlan, launch: &PowerVector, fiber: &FiberSpec) -> Vec<f64> {
        let offsets = plan.offsets();
        let l = fiber.span_length;
        (0..plan.len())
            .map(|i| {
                let tilt = self.total_power * self.per_channel_cr_hat[i] * self.effective_length;
                launch[i]
                    * (-fiber.alpha(i) * l + self.total_power.ln() - tilt * offsets[i] - self.log_norm)
                        .exp()
            })
            .collect()
    }
}

/// Two-step fit of the first-order profile to `numeric`.
///
/// Step 1 finds the single slope minimizing the squared end-of-span dB error
/// by golden-section search on `[0, 4·Cr]`. Step 2 solves, per channel, the
/// slope that reproduces that channel's end-of-span gain exactly with the
/// step-1 denominator held fixed.
pub fn fit_effective_cr(
    numeric: &PowerProfile,
    plan: &ChannelPlan,
    launch: &PowerVector,
    fiber: &FiberSpec,
) -> Result<EffectiveRamanFit> {
    launch.check_plan(plan)?;
    if numeric.n_channels() != plan.len() {
        return Err(Error::validation("profile", "channel count differs from the plan"));
    }
    let p = launch.as_slice();
    let offsets = plan.offsets();
    let p_tot = launch.total();
    let l = fiber.span_length;
    let l_eff = fiber.effective_length(l);
    let target: Vec<f64> = net_gain_db(numeric);
    let alpha_db: Vec<f64> = (0..plan.len())
        .map(|i| -10.0 * std::f64::consts::LOG10_E * fiber.alpha(i) * l)
        .collect();

    let mismatch = |cr: f64| -> Vec<f64> {
        let tilt = p_tot * cr * l_eff;
        let ln_d = log_norm(p, &offsets, tilt);
        (0..plan.len())
            .map(|i| {
                let model_db = alpha_db[i]
                    + 10.0 * std::f64::consts::LOG10_E * (p_tot.ln() - tilt * offsets[i] - ln_d);
                model_db - target[i]
            })
            .collect()
    };
    let cost = |cr: f64| mismatch(cr).iter().map(|d| d * d).sum::<f64>();

    let upper = 4.0 * fiber.raman_slope;
    let global = if upper > 0.0 {
        let cr = golden_section(&cost, 0.0, upper, 1e-9 * upper);
        // An optimum pinned to the upper end means the bracket missed it.
        if upper - cr < 1e-6 * upper && cost(upper * 0.999) > cost(upper) {
            let res = max_abs(&mismatch(cr));
            return Err(Error::FitFailure(format!(
                "minimum not bracketed in [0, {upper:e}]; residual {res:.4} dB at the bound"
            )));
        }
        cr
    } else {
        0.0
    };
    let residual = max_abs(&mismatch(global));
    let tilt = p_tot * global * l_eff;
    let ln_d = log_norm(p, &offsets, tilt);

    let end = numeric.end();
    let mut per_channel: Vec<Option<f64>> = (0..plan.len())
        .map(|i| {
            if offsets[i].abs() < CENTER_EXCLUSION_HZ {
                None
            } else {
                let ln_gain = (end[i] / p[i]).ln();
                let x = -fiber.alpha(i) * l + p_tot.ln() - ln_d - ln_gain;
                Some(x / (p_tot * l_eff * offsets[i]))
            }
        })
        .collect();
    if global == 0.0 && fiber.raman_slope == 0.0 {
        per_channel.iter_mut().for_each(|c| *c = Some(0.0));
    }
    let per_channel = fill_by_interpolation(&offsets, &per_channel, global);
    if let Some(i) = per_channel.iter().position(|c| !c.is_finite()) {
        return Err(Error::FitFailure(format!("non-finite slope for channel {i}")));
    }

    Ok(EffectiveRamanFit {
        global_cr_hat: global,
        per_channel_cr_hat: per_channel,
        fit_residual_db: residual,
        log_norm: ln_d,
        total_power: p_tot,
        effective_length: l_eff,
    })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Linear interpolation in frequency from the nearest valid neighbours on
/// each side; one-sided gaps copy the nearest value.
fn fill_by_interpolation(x: &[f64], y: &[Option<f64>], fallback: f64) -> Vec<f64> {
    let valid: Vec<usize> = (0..y.len()).filter(|&i| y[i].is_some()).collect();
    if valid.is_empty() {
        return vec![fallback; y.len()];
    }
    (0..y.len())
        .map(|i| {
            if let Some(v) = y[i] {
                return v;
            }
            let right = valid.iter().position(|&j| j > i);
            match right {
                Some(0) => y[valid[0]].unwrap(),
                None => y[*valid.last().unwrap()].unwrap(),
                Some(r) => {
                    let (a, b) = (valid[r - 1], valid[r]);
                    let (ya, yb) = (y[a].unwrap(), y[b].unwrap());
                    ya + (yb - ya) * (x[i] - x[a]) / (x[b] - x[a])
                }
            }
        })
        .collect()
}

pub(crate) fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    // Endpoints can win when the function is monotone on the bracket.
    [a, mid, b]
        .into_iter()
        .map(|x| (x, f(x)))
        .fold((mid, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        .0
}
