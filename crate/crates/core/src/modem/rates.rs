use crate::error::{Error, Result};

/// A finite code-rate set and the rate each channel runs at.
#[derive(Clone, Debug, PartialEq)]
pub struct RateAssignment {
    /// Ascending.
    pub rate_set: Vec<f64>,
    /// `None` when no rate in the set is supported.
    pub rates: Vec<Option<f64>>,
    pub bits: Vec<u32>,
    pub symbol_rate: f64,
}

impl RateAssignment {
    /// bit/s of channel `i`, dual polarization.
    pub fn channel_throughput(&self, i: usize) -> f64 {
        self.rates[i].map_or(0.0, |r| 2.0 * self.symbol_rate * self.bits[i] as f64 * r)
    }

    pub fn total_throughput(&self) -> f64 {
        throughput(self)
    }
}

pub fn throughput(a: &RateAssignment) -> f64 {
    (0..a.rates.len()).map(|i| a.channel_throughput(i)).sum()
}

/// `Σ 2·R_s·m_i·ngmi_i`, the limit of unlimited code rates.
pub fn gmi_bound(ngmi: &[f64], bits: &[u32], symbol_rate: f64) -> f64 {
    ngmi.iter()
        .zip(bits)
        .map(|(n, m)| 2.0 * symbol_rate * *m as f64 * n.clamp(0.0, 1.0))
        .sum()
}

/// Chooses at most `k` rates from the observed NGMI values maximizing total
/// throughput, each channel taking the largest rate not above its NGMI.
///
/// Exact dynamic program over the distinct values sorted descending: once a
/// value is chosen, every channel from it down to the next chosen value runs
/// at that value.
pub fn select_code_rates(ngmi: &[f64], bits: &[u32], symbol_rate: f64, k: usize) -> Result<RateAssignment> {
    if k == 0 {
        return Err(Error::validation("rates.k", "at least one code rate is required"));
    }
    if ngmi.len() != bits.len() {
        return Err(Error::validation("bits", "one entry per channel required"));
    }
    if let Some(v) = ngmi.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::validation("ngmi", format!("{v} outside [0, 1]")));
    }
    if !(symbol_rate > 0.0) {
        return Err(Error::validation("symbol_rate", "must be positive"));
    }

    // Distinct positive values, descending, with their summed weights.
    let mut order: Vec<usize> = (0..ngmi.len()).filter(|&i| ngmi[i] > 0.0).collect();
    order.sort_by(|&a, &b| ngmi[b].total_cmp(&ngmi[a]));
    let mut values: Vec<f64> = Vec::new();
    let mut weight: Vec<f64> = Vec::new();
    for &i in &order {
        let w = 2.0 * symbol_rate * bits[i] as f64;
        if values.last() == Some(&ngmi[i]) {
            *weight.last_mut().unwrap() += w;
        } else {
            values.push(ngmi[i]);
            weight.push(w);
        }
    }
    let d = values.len();
    let mut rate_set = Vec::new();
    if d > 0 {
        // prefix[j] = weight of values 0..j
        let mut prefix = vec![0.0; d + 1];
        for j in 0..d {
            prefix[j + 1] = prefix[j] + weight[j];
        }
        let kk = k.min(d);
        // best[c][j]: max throughput from values 0..=j using c rates with the
        // last chosen rate exactly values[j] (which serves everything above it
        // down to the previous choice, excluded).
        let neg = f64::NEG_INFINITY;
        let mut best = vec![vec![neg; d]; kk + 1];
        let mut from = vec![vec![usize::MAX; d]; kk + 1];
        for j in 0..d {
            best[1][j] = values[j] * prefix[j + 1];
        }
        for c in 2..=kk {
            for j in 0..d {
                for p in 0..j {
                    if best[c - 1][p] == neg {
                        continue;
                    }
                    let v = best[c - 1][p] + values[j] * (prefix[j + 1] - prefix[p + 1]);
                    if v > best[c][j] {
                        best[c][j] = v;
                        from[c][j] = p;
                    }
                }
            }
        }
        // Channels below the last chosen value get nothing. Ties go to the
        // solution reached first in (c, j) order, i.e. fewer and larger rates.
        let mut top = (neg, 0, 0);
        for c in 1..=kk {
            for j in 0..d {
                if best[c][j] > top.0 {
                    top = (best[c][j], c, j);
                }
            }
        }
        let (_, mut c, mut j) = top;
        while c >= 1 {
            rate_set.push(values[j]);
            if c == 1 {
                break;
            }
            j = from[c][j];
            c -= 1;
        }
        rate_set.sort_by(f64::total_cmp);
    }
    let rates = ngmi
        .iter()
        .map(|&n| rate_set.iter().rev().copied().find(|&r| r <= n))
        .collect();
    Ok(RateAssignment {
        rate_set,
        rates,
        bits: bits.to_vec(),
        symbol_rate,
    })
}
