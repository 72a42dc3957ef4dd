use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefineConfig {
    /// Central-difference half width, dB.
    pub step_db: f64,
    /// Stop once an accepted step gains less than this (objective units).
    pub tol: f64,
    pub max_iters: usize,
    /// Largest per-channel move of the first trial step, dB.
    pub initial_move_db: f64,
    /// Per-channel box, dBm.
    pub bounds_dbm: (f64, f64),
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            step_db: 0.1,
            tol: 1e9,
            max_iters: 100,
            initial_move_db: 0.5,
            bounds_dbm: (-9.0, 9.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefineResult {
    pub powers_dbm: Vec<f64>,
    pub value: f64,
    pub start_value: f64,
    pub iterations: usize,
    /// Objective after each accepted step.
    pub trace: Vec<f64>,
}

/// Projected gradient ascent in the dB domain.
///
/// Each iteration takes a central-difference gradient, moves every channel by
/// at most the current trial length along it (largest component normalized),
/// projects onto the box and keeps the move only if the objective improves;
/// otherwise the trial length is halved. The result never scores below the
/// start.
pub fn refine_gradient<F>(f: F, start_dbm: &[f64], cfg: &RefineConfig) -> Result<RefineResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if !(cfg.step_db > 0.0) || !(cfg.tol >= 0.0) || !(cfg.initial_move_db > 0.0) {
        return Err(Error::validation("optimizer.refine", "step, tolerance and move must be positive"));
    }
    let (lo, hi) = cfg.bounds_dbm;
    if !(lo < hi) {
        return Err(Error::validation("optimizer.refine_bounds_dbm", "need lower < upper"));
    }
    let n = start_dbm.len();
    let mut x: Vec<f64> = start_dbm.iter().map(|v| v.clamp(lo, hi)).collect();
    let start_value = f(start_dbm);
    let mut fx = f(&x);
    if fx < start_value || fx.is_nan() {
        // Projection made things worse; keep the caller's point.
        x = start_dbm.to_vec();
        fx = start_value;
    }
    let mut trace = vec![fx];
    let mut step = cfg.initial_move_db;
    let mut iterations = 0;
    let min_move = 1e-3 * cfg.step_db;

    while iterations < cfg.max_iters {
        iterations += 1;
        let h = cfg.step_db;
        let grad: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut p = x.clone();
                p[i] = x[i] + h;
                let up = f(&p);
                p[i] = x[i] - h;
                let down = f(&p);
                if up.is_finite() && down.is_finite() {
                    (up - down) / (2.0 * h)
                } else {
                    0.0
                }
            })
            .collect();
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax == 0.0 {
            break;
        }
        let mut improved = false;
        while step >= min_move {
            let trial: Vec<f64> = (0..n).map(|i| (x[i] + step * grad[i] / gmax).clamp(lo, hi)).collect();
            let ft = f(&trial);
            if ft > fx {
                let gain = ft - fx;
                x = trial;
                fx = ft;
                trace.push(fx);
                improved = true;
                if gain < cfg.tol {
                    return Ok(RefineResult {
                        powers_dbm: x,
                        value: fx,
                        start_value,
                        iterations,
                        trace,
                    });
                }
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(RefineResult {
        powers_dbm: x,
        value: fx,
        start_value,
        iterations,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quadratic_converges_to_maximizer() {
        let c = [1.3, -0.7, 2.2, 0.0, -3.1];
        let w = [1.0, 2.0, 0.5, 3.0, 1.5];
        let f = |x: &[f64]| -x.iter().zip(&c).zip(&w).map(|((x, c), w)| w * (x - c).powi(2)).sum::<f64>();
        let cfg = RefineConfig { tol: 1e-9, max_iters: 500, ..RefineConfig::default() };
        let r = refine_gradient(f, &[0.0; 5], &cfg).unwrap();
        for (x, c) in r.powers_dbm.iter().zip(&c) {
            assert!((x - c).abs() < 0.05, "{x} vs {c}");
        }
        assert!(r.trace.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn fixed_point_is_kept() {
        let f = |x: &[f64]| -(x[0] - 0.5).powi(2) - (x[1] + 0.25).powi(2);
        let r = refine_gradient(f, &[0.5, -0.25], &RefineConfig { tol: 0.0, ..RefineConfig::default() }).unwrap();
        assert_eq!(r.powers_dbm, vec![0.5, -0.25]);
        assert_eq!(r.value, r.start_value);
    }

    #[test]
    fn respects_bounds() {
        let f = |x: &[f64]| x.iter().sum::<f64>();
        let cfg = RefineConfig { bounds_dbm: (-1.0, 1.0), tol: 0.0, ..RefineConfig::default() };
        let r = refine_gradient(f, &[0.0, 0.5, -0.5], &cfg).unwrap();
        assert!(r.powers_dbm.iter().all(|&v| (-1.0..=1.0).contains(&v)));
        assert!((r.value - 3.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn never_worse_than_start(a in -3.0f64..3.0, b in -3.0f64..3.0, s0 in -4.0f64..4.0, s1 in -4.0f64..4.0) {
            // Non-concave surface with local structure.
            let f = |x: &[f64]| (x[0] * a).sin() + (x[1] * b).cos() - 0.05 * (x[0] * x[0] + x[1] * x[1]);
            let cfg = RefineConfig { tol: 1e-6, max_iters: 30, ..RefineConfig::default() };
            let r = refine_gradient(f, &[s0, s1], &cfg).unwrap();
            prop_assert!(r.value >= r.start_value);
            prop_assert!((f(&r.powers_dbm) - r.value).abs() < 1e-12);
        }
    }
}
