use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            swarm_size: 50,
            iterations: 200,
            inertia: 0.7,
            cognitive: 1.5,
            social: 1.5,
            seed: 1,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 {
            return Err(Error::validation("optimizer.swarm_size", "must be positive"));
        }
        if !(self.inertia > 0.0 && self.inertia < 1.0) {
            return Err(Error::validation("optimizer.inertia", "must lie in (0, 1)"));
        }
        if !(self.cognitive > 0.0) || !(self.social > 0.0) {
            return Err(Error::validation("optimizer.cognitive", "acceleration weights must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub best_value: f64,
    pub best_position: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsoResult {
    pub best_position: Vec<f64>,
    pub best_value: f64,
    /// Row 0 is the initial swarm, then one row per iteration.
    pub trace: Vec<TraceRow>,
    pub evaluations: usize,
}

/// Global-best particle swarm maximizing `f` over the box `bounds`.
///
/// Velocities are clamped to 20% of each box width and particles reflect off
/// the walls. Particles are evaluated in parallel but every reduction runs in
/// particle order, so the result depends only on the seed.
pub fn pso<F>(f: F, bounds: &[(f64, f64)], cfg: &PsoConfig) -> Result<PsoResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    if bounds.is_empty() {
        return Err(Error::validation("bounds", "empty search space"));
    }
    if bounds.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
        return Err(Error::validation("bounds", "need finite lower < upper"));
    }
    let dim = bounds.len();
    let vmax: Vec<f64> = bounds.iter().map(|(lo, hi)| 0.2 * (hi - lo)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut x: Vec<Vec<f64>> = (0..cfg.swarm_size)
        .map(|_| bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..cfg.swarm_size)
        .map(|_| vmax.iter().map(|&m| rng.random_range(-m..=m)).collect())
        .collect();

    let eval = |pop: &[Vec<f64>]| -> Vec<f64> {
        pop.par_iter()
            .map(|p| {
                let y = f(p);
                if y.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    y
                }
            })
            .collect()
    };

    let mut val = eval(&x);
    let mut evaluations = cfg.swarm_size;
    let mut pbest = x.clone();
    let mut pbest_val = val.clone();
    let mut g = 0;
    for k in 1..cfg.swarm_size {
        if pbest_val[k] > pbest_val[g] {
            g = k;
        }
    }
    let mut gbest = pbest[g].clone();
    let mut gbest_val = pbest_val[g];
    let mut trace = vec![TraceRow {
        iteration: 0,
        best_value: gbest_val,
        best_position: gbest.clone(),
    }];

    for it in 1..=cfg.iterations {
        for k in 0..cfg.swarm_size {
            for d in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let vel = cfg.inertia * v[k][d]
                    + cfg.cognitive * r1 * (pbest[k][d] - x[k][d])
                    + cfg.social * r2 * (gbest[d] - x[k][d]);
                v[k][d] = vel.clamp(-vmax[d], vmax[d]);
                let (lo, hi) = bounds[d];
                let mut pos = x[k][d] + v[k][d];
                if pos > hi {
                    pos = hi - (pos - hi);
                    v[k][d] = -v[k][d];
                } else if pos < lo {
                    pos = lo + (lo - pos);
                    v[k][d] = -v[k][d];
                }
                x[k][d] = pos.clamp(lo, hi);
            }
        }
        val = eval(&x);
        evaluations += cfg.swarm_size;
        for k in 0..cfg.swarm_size {
            if val[k] > pbest_val[k] {
                pbest_val[k] = val[k];
                pbest[k].clone_from(&x[k]);
            }
            if val[k] > gbest_val {
                gbest_val = val[k];
                gbest.clone_from(&x[k]);
            }
        }
        trace.push(TraceRow {
            iteration: it,
            best_value: gbest_val,
            best_position: gbest.clone(),
        });
    }

    Ok(PsoResult {
        best_position: gbest,
        best_value: gbest_val,
        trace,
        evaluations,
    })
}

/// `iter,best_objective_tbps,param0..` with objective values in bit/s.
pub fn write_trace_csv<W: Write>(trace: &[TraceRow], mut out: W) -> std::io::Result<()> {
    let dim = trace.first().map_or(0, |r| r.best_position.len());
    write!(out, "iter,best_objective_tbps")?;
    for d in 0..dim {
        write!(out, ",param{d}")?;
    }
    writeln!(out)?;
    for r in trace {
        write!(out, "{},{:.6}", r.iteration, r.best_value / 1e12)?;
        for p in &r.best_position {
            write!(out, ",{p:.6}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
