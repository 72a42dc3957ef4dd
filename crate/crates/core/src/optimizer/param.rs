use crate::error::{Error, Result};
use crate::fiber::PowerVector;
use crate::plan::{Band, ChannelPlan};

/// Launch power shape with an offset (dBm) and a tilt (dB across the band)
/// for each band present in a plan. Within a band the dBm value is linear in
/// channel frequency: `offset + tilt·(f − f_mid)/(f_max − f_min)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerParam {
    bands: Vec<Band>,
    /// `[offset_0, tilt_0, offset_1, tilt_1, ...]` in `bands` order.
    values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamBounds {
    pub offset_dbm: (f64, f64),
    pub tilt_db: (f64, f64),
}

impl Default for ParamBounds {
    fn default() -> Self {
        ParamBounds {
            offset_dbm: (-6.0, 6.0),
            tilt_db: (-6.0, 6.0),
        }
    }
}

impl ParamBounds {
    /// Box for the flattened parameter vector of `plan`.
    pub fn for_plan(&self, plan: &ChannelPlan) -> Vec<(f64, f64)> {
        plan.bands()
            .iter()
            .flat_map(|_| [self.offset_dbm, self.tilt_db])
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("optimizer.offset_bounds_dbm", self.offset_dbm), ("optimizer.tilt_bounds_db", self.tilt_db)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::validation(name, "need finite lower < upper"));
            }
        }
        Ok(())
    }
}

impl PowerParam {
    pub fn new(plan: &ChannelPlan, values: Vec<f64>) -> Result<Self> {
        let bands = plan.bands();
        if values.len() != 2 * bands.len() {
            return Err(Error::validation(
                "power parameters",
                format!("{} values for {} bands", values.len(), bands.len()),
            ));
        }
        Ok(PowerParam { bands, values })
    }

    /// Flat launch at `dbm` per channel.
    pub fn flat(plan: &ChannelPlan, dbm: f64) -> Self {
        let bands = plan.bands();
        let values = bands.iter().flat_map(|_| [dbm, 0.0]).collect();
        PowerParam { bands, values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn offset(&self, band: Band) -> Option<f64> {
        self.bands.iter().position(|&b| b == band).map(|k| self.values[2 * k])
    }

    pub fn tilt(&self, band: Band) -> Option<f64> {
        self.bands.iter().position(|&b| b == band).map(|k| self.values[2 * k + 1])
    }

    /// Per-channel dBm.
    pub fn expand_dbm(&self, plan: &ChannelPlan) -> Vec<f64> {
        let mut out = vec![0.0; plan.len()];
        for (k, &band) in self.bands.iter().enumerate() {
            let idx = plan.band_indices(band);
            let freqs: Vec<f64> = idx.iter().map(|&i| plan.channels()[i].abs_frequency).collect();
            let lo = freqs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = freqs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mid = 0.5 * (lo + hi);
            let (offset, tilt) = (self.values[2 * k], self.values[2 * k + 1]);
            for (&i, &f) in idx.iter().zip(&freqs) {
                let x = if hi > lo { (f - mid) / (hi - lo) } else { 0.0 };
                out[i] = offset + tilt * x;
            }
        }
        out
    }

    pub fn expand(&self, plan: &ChannelPlan) -> Result<PowerVector> {
        PowerVector::from_dbm(&self.expand_dbm(plan))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{build_channel_plan, BandAllocation, BandEdges};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn plan() -> ChannelPlan {
        let alloc = [
            BandAllocation { band: Band::S, count: 7, modulation_id: "a".into() },
            BandAllocation { band: Band::C, count: 5, modulation_id: "b".into() },
            BandAllocation { band: Band::L, count: 1, modulation_id: "b".into() },
        ];
        build_channel_plan(&BandEdges::default(), &alloc, &[10e-9, 5e-9], 50e9, 1545e-9).unwrap()
    }

    #[test]
    fn flat_and_lengths() {
        let p = plan();
        let flat = PowerParam::flat(&p, -2.0);
        assert!(flat.expand_dbm(&p).iter().all(|&v| v == -2.0));
        assert_eq!(flat.values().len(), 6);
        assert!(PowerParam::new(&p, vec![0.0; 5]).is_err());
        assert_eq!(ParamBounds::default().for_plan(&p).len(), 6);
    }

    proptest! {
        #[test]
        fn endpoints_and_linearity(v in proptest::collection::vec(-6.0f64..6.0, 6)) {
            let p = plan();
            let param = PowerParam::new(&p, v.clone()).unwrap();
            let dbm = param.expand_dbm(&p);
            for (k, band) in param.bands().iter().enumerate() {
                let idx = p.band_indices(*band);
                let (offset, tilt) = (v[2 * k], v[2 * k + 1]);
                if idx.len() == 1 {
                    prop_assert_eq!(dbm[idx[0]], offset);
                    continue;
                }
                // lowest and highest frequency sit at offset ∓ tilt/2
                let first = idx[0];
                let last = *idx.last().unwrap();
                prop_assert!((dbm[first] - (offset - tilt / 2.0)).abs() < 1e-12);
                prop_assert!((dbm[last] - (offset + tilt / 2.0)).abs() < 1e-12);
                // equally spaced channels, equal increments
                let d: Vec<f64> = idx.windows(2).map(|w| dbm[w[1]] - dbm[w[0]]).collect();
                for x in &d {
                    prop_assert!((x - d[0]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn expand_to_watts() {
        let p = plan();
        let pv = PowerParam::flat(&p, 0.0).expand(&p).unwrap();
        assert_relative_eq!(pv[0], 1e-3, max_relative = 1e-12);
    }
}
