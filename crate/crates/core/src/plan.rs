//! WDM channel grid construction.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{frequency_to_wavelength, wavelength_to_frequency, SPEED_OF_LIGHT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Band {
    S,
    C,
    L,
}

impl Band {
    pub const ALL: [Band; 3] = [Band::S, Band::C, Band::L];

    pub fn name(self) -> &'static str {
        match self {
            Band::S => "S",
            Band::C => "C",
            Band::L => "L",
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-band value (noise figures, modulation choices, ...).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerBand<T> {
    pub s: T,
    pub c: T,
    pub l: T,
}

impl<T> PerBand<T> {
    pub fn get(&self, band: Band) -> &T {
        match band {
            Band::S => &self.s,
            Band::C => &self.c,
            Band::L => &self.l,
        }
    }
}

/// Wavelength window `(short, long)` in metres for each band.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandEdges(pub PerBand<(f64, f64)>);

impl Default for BandEdges {
    fn default() -> Self {
        BandEdges(PerBand {
            s: (1460e-9, 1530e-9),
            c: (1530e-9, 1565e-9),
            l: (1565e-9, 1625e-9),
        })
    }
}

impl BandEdges {
    pub fn window(&self, band: Band) -> (f64, f64) {
        *self.0.get(band)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandAllocation {
    pub band: Band,
    pub count: usize,
    pub modulation_id: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub index: usize,
    pub abs_frequency: f64,
    /// `abs_frequency - center_frequency`.
    pub offset_frequency: f64,
    /// Nyquist bandwidth, equal to the symbol rate.
    pub bandwidth: f64,
    pub band: Band,
    pub modulation_id: String,
}

impl Channel {
    pub fn wavelength(&self) -> f64 {
        frequency_to_wavelength(self.abs_frequency)
    }
}

/// Channels sorted by ascending absolute frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelPlan {
    channels: Vec<Channel>,
    center_frequency: f64,
}

impl ChannelPlan {
    /// Builds a plan from explicit channels, checking ordering and overlap.
    pub fn from_channels(mut channels: Vec<Channel>, center_frequency: f64) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::validation("channels", "plan has no channels"));
        }
        for w in channels.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if b.abs_frequency <= a.abs_frequency {
                return Err(Error::validation("channels", "frequencies must be strictly increasing"));
            }
            let min_sep = 0.5 * (a.bandwidth + b.bandwidth);
            if b.abs_frequency - a.abs_frequency < min_sep * (1.0 - 1e-9) {
                return Err(Error::validation(
                    "channels",
                    format!("channels {} and {} overlap", a.index, b.index),
                ));
            }
        }
        for (i, ch) in channels.iter_mut().enumerate() {
            if !(ch.bandwidth > 0.0) {
                return Err(Error::validation("symbol_rate", "bandwidth must be positive"));
            }
            ch.index = i;
            ch.offset_frequency = ch.abs_frequency - center_frequency;
        }
        Ok(ChannelPlan {
            channels,
            center_frequency,
        })
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn center_frequency(&self) -> f64 {
        self.center_frequency
    }

    pub fn offsets(&self) -> Vec<f64> {
        self.channels.iter().map(|c| c.offset_frequency).collect()
    }

    pub fn bandwidths(&self) -> Vec<f64> {
        self.channels.iter().map(|c| c.bandwidth).collect()
    }

    /// Spectral extent from the lower edge of the first channel to the upper
    /// edge of the last one.
    pub fn total_bandwidth(&self) -> f64 {
        let first = &self.channels[0];
        let last = &self.channels[self.channels.len() - 1];
        last.abs_frequency + 0.5 * last.bandwidth - (first.abs_frequency - 0.5 * first.bandwidth)
    }

    /// Sum of channel bandwidths.
    pub fn occupied_bandwidth(&self) -> f64 {
        self.channels.iter().map(|c| c.bandwidth).sum()
    }

    /// Same channels referenced to a different grid center.
    pub fn recentered(&self, center_frequency: f64) -> ChannelPlan {
        let channels = self
            .channels
            .iter()
            .map(|c| Channel {
                offset_frequency: c.abs_frequency - center_frequency,
                ..c.clone()
            })
            .collect();
        ChannelPlan {
            channels,
            center_frequency,
        }
    }

    pub fn bands(&self) -> Vec<Band> {
        let mut out: Vec<Band> = Vec::new();
        for ch in &self.channels {
            if !out.contains(&ch.band) {
                out.push(ch.band);
            }
        }
        out.sort();
        out
    }

    /// Indices of the channels in `band`, ascending in frequency.
    pub fn band_indices(&self, band: Band) -> Vec<usize> {
        self.channels
            .iter()
            .filter(|c| c.band == band)
            .map(|c| c.index)
            .collect()
    }
}

/// Lays out contiguous Nyquist slots per band with spectral holes between
/// bands and centres the grid on `center_wavelength`.
///
/// `allocation` is ordered by ascending wavelength (S, C, L) and `gaps` holds
/// one wavelength gap per adjacent band pair, in the same order. A gap is the
/// edge-to-edge hole between the outermost channels of the two bands,
/// converted to frequency at the nominal boundary wavelength of `edges`.
pub fn build_channel_plan(
    edges: &BandEdges,
    allocation: &[BandAllocation],
    gaps: &[f64],
    symbol_rate: f64,
    center_wavelength: f64,
) -> Result<ChannelPlan> {
    if !(symbol_rate > 0.0) || !symbol_rate.is_finite() {
        return Err(Error::validation("plan.symbol_rate_gbd", "must be positive"));
    }
    if !(center_wavelength > 0.0) {
        return Err(Error::validation("plan.center_wavelength_nm", "must be positive"));
    }
    let allocation: Vec<&BandAllocation> = allocation.iter().filter(|a| a.count > 0).collect();
    if allocation.is_empty() {
        return Err(Error::validation("plan.channels", "no channels allocated"));
    }
    for w in allocation.windows(2) {
        if w[1].band <= w[0].band {
            return Err(Error::validation(
                "plan.channels",
                "bands must be listed once each in S, C, L order",
            ));
        }
    }
    if gaps.len() + 1 < allocation.len() {
        return Err(Error::validation(
            "plan.gaps_nm",
            format!("{} bands need {} gaps", allocation.len(), allocation.len() - 1),
        ));
    }
    if gaps.iter().any(|g| !(*g >= 0.0)) {
        return Err(Error::validation("plan.gaps_nm", "gaps must be non-negative"));
    }

    // Relative positions, starting from the lowest-frequency (longest
    // wavelength) band.
    let mut rel: Vec<(f64, Band, &str)> = Vec::new();
    let mut pos = 0.0;
    for (k, alloc) in allocation.iter().enumerate().rev() {
        if k + 1 < allocation.len() {
            let boundary = edges.window(alloc.band).1;
            let gap_hz = SPEED_OF_LIGHT * gaps[k] / (boundary * boundary);
            pos += gap_hz;
        }
        for _ in 0..alloc.count {
            rel.push((pos, alloc.band, alloc.modulation_id.as_str()));
            pos += symbol_rate;
        }
    }
    let first = rel[0].0;
    let last = rel[rel.len() - 1].0;
    let center_frequency = wavelength_to_frequency(center_wavelength);
    let shift = center_frequency - 0.5 * (first + last);

    let channels: Vec<Channel> = rel
        .into_iter()
        .enumerate()
        .map(|(index, (p, band, id))| Channel {
            index,
            abs_frequency: p + shift,
            offset_frequency: p + shift - center_frequency,
            bandwidth: symbol_rate,
            band,
            modulation_id: id.to_string(),
        })
        .collect();

    // The whole plan must sit inside the combined S+C+L window; individual
    // bands may spill over their nominal edges.
    let short_edge = Band::ALL.iter().map(|b| edges.window(*b).0).fold(f64::INFINITY, f64::min);
    let long_edge = Band::ALL.iter().map(|b| edges.window(*b).1).fold(0.0, f64::max);
    let f_hi = wavelength_to_frequency(short_edge);
    let f_lo = wavelength_to_frequency(long_edge);
    let lowest = channels[0].abs_frequency - 0.5 * symbol_rate;
    let highest = channels[channels.len() - 1].abs_frequency + 0.5 * symbol_rate;
    if lowest < f_lo * (1.0 - 1e-12) || highest > f_hi * (1.0 + 1e-12) {
        return Err(Error::Capacity(format!(
            "plan covers {:.3}-{:.3} THz but the band window is {:.3}-{:.3} THz",
            lowest / 1e12,
            highest / 1e12,
            f_lo / 1e12,
            f_hi / 1e12
        )));
    }

    ChannelPlan::from_channels(channels, center_frequency)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn alloc(s: usize, c: usize, l: usize) -> Vec<BandAllocation> {
        [(Band::S, s), (Band::C, c), (Band::L, l)]
            .into_iter()
            .map(|(band, count)| BandAllocation {
                band,
                count,
                modulation_id: band.name().to_string(),
            })
            .collect()
    }

    #[test]
    fn scl_plan_spans_twenty_terahertz() {
        let plan = build_channel_plan(
            &BandEdges::default(),
            &alloc(164, 100, 100),
            &[10e-9, 5e-9],
            50e9,
            1540e-9,
        )
        .unwrap();
        assert_eq!(plan.len(), 364);
        assert_relative_eq!(plan.occupied_bandwidth(), 18.2e12, max_relative = 1e-12);
        let extent = plan.total_bandwidth();
        assert!(extent > 19.5e12 && extent < 20.5e12, "extent {extent}");
        let ch = plan.channels();
        let mid = 0.5 * (ch[0].abs_frequency + ch[363].abs_frequency);
        assert_relative_eq!(mid, wavelength_to_frequency(1540e-9), max_relative = 1e-14);
        // L lowest in frequency, S highest
        assert_eq!(ch[0].band, Band::L);
        assert_eq!(ch[363].band, Band::S);
        assert_eq!(plan.band_indices(Band::S).len(), 164);
    }

    #[test]
    fn gaps_open_holes_between_bands() {
        let plan = build_channel_plan(
            &BandEdges::default(),
            &alloc(164, 100, 100),
            &[10e-9, 5e-9],
            50e9,
            1540e-9,
        )
        .unwrap();
        let ch = plan.channels();
        // L/C boundary between index 99 and 100, C/S between 199 and 200
        let lc = ch[100].abs_frequency - ch[99].abs_frequency - 50e9;
        let cs = ch[200].abs_frequency - ch[199].abs_frequency - 50e9;
        assert_relative_eq!(lc, SPEED_OF_LIGHT * 5e-9 / (1565e-9f64).powi(2), max_relative = 1e-9);
        assert_relative_eq!(cs, SPEED_OF_LIGHT * 10e-9 / (1530e-9f64).powi(2), max_relative = 1e-9);
        assert_relative_eq!(ch[1].abs_frequency - ch[0].abs_frequency, 50e9, max_relative = 1e-9);
    }

    #[test]
    fn single_channel_sits_on_center() {
        let plan =
            build_channel_plan(&BandEdges::default(), &alloc(0, 1, 0), &[], 50e9, 1540e-9).unwrap();
        assert_eq!(plan.len(), 1);
        assert_eq!(plan.channels()[0].offset_frequency, 0.0);
    }

    #[test]
    fn two_channels_symmetric() {
        let plan =
            build_channel_plan(&BandEdges::default(), &alloc(0, 2, 0), &[], 50e9, 1550e-9).unwrap();
        let off = plan.offsets();
        assert_relative_eq!(off[0], -25e9, epsilon = 1e-3);
        assert_relative_eq!(off[1], 25e9, epsilon = 1e-3);
    }

    #[test]
    fn rejects_bad_inputs() {
        let e = build_channel_plan(&BandEdges::default(), &alloc(0, 2, 0), &[], 0.0, 1550e-9);
        assert!(matches!(e, Err(Error::Validation { .. })));
        // 2000 channels cannot fit in 1460-1625 nm
        let e = build_channel_plan(
            &BandEdges::default(),
            &alloc(1000, 500, 500),
            &[10e-9, 5e-9],
            50e9,
            1540e-9,
        );
        assert!(matches!(e, Err(Error::Capacity(_))));
    }

    #[test]
    fn recentering_keeps_absolute_grid() {
        let plan =
            build_channel_plan(&BandEdges::default(), &alloc(0, 5, 0), &[], 50e9, 1550e-9).unwrap();
        let moved = plan.recentered(plan.center_frequency() + 100e9);
        for (a, b) in plan.channels().iter().zip(moved.channels()) {
            assert_eq!(a.abs_frequency, b.abs_frequency);
            assert_relative_eq!(a.offset_frequency - b.offset_frequency, 100e9, epsilon = 1e-3);
        }
    }
}
