use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniformly used 2D point set with a bit label per point, normalized to unit
/// average energy.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    labels: Vec<u32>,
    bits: u32,
}

impl Constellation {
    /// Validates the labelling and rescales to unit average energy.
    pub fn new(points: Vec<Complex64>, labels: Vec<u32>) -> Result<Self> {
        let m = points.len();
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::validation(
                "constellation",
                format!("{m} points is not a power of two"),
            ));
        }
        if labels.len() != m {
            return Err(Error::validation("constellation", "one label per point required"));
        }
        let bits = m.trailing_zeros();
        let mut seen = vec![false; m];
        for &l in &labels {
            if l as usize >= m || seen[l as usize] {
                return Err(Error::validation(
                    "constellation",
                    format!("labels are not a bijection onto {bits}-bit words"),
                ));
            }
            seen[l as usize] = true;
        }
        if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::validation("constellation", "non-finite point"));
        }
        let mut c = Constellation {
            points,
            labels,
            bits,
        };
        c.normalize()?;
        Ok(c)
    }

    /// Square QAM with a binary-reflected Gray label per axis.
    pub fn square_qam(bits: u32) -> Result<Self> {
        if bits == 0 || bits % 2 != 0 || bits > 12 {
            return Err(Error::Capability(format!("square QAM with {bits} bits per symbol")));
        }
        let half = bits / 2;
        let side = 1u32 << half;
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for i in 0..side {
            for q in 0..side {
                let re = 2.0 * i as f64 - (side - 1) as f64;
                let im = 2.0 * q as f64 - (side - 1) as f64;
                points.push(Complex64::new(re, im));
                labels.push((gray(i) << half) | gray(q));
            }
        }
        Constellation::new(points, labels)
    }

    pub(crate) fn normalize(&mut self) -> Result<()> {
        let e = self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64;
        if !(e > 0.0) {
            return Err(Error::validation("constellation", "zero energy"));
        }
        let s = e.sqrt().recip();
        self.points.iter_mut().for_each(|p| *p *= s);
        Ok(())
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub(crate) fn points_mut(&mut self) -> &mut [Complex64] {
        &mut self.points
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Bits per 2D symbol.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(E|x|², E|x|⁴)` under uniform use.
    pub fn moments(&self) -> (f64, f64) {
        let m = self.points.len() as f64;
        let mu2 = self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / m;
        let mu4 = self.points.iter().map(|p| p.norm_sqr().powi(2)).sum::<f64>() / m;
        (mu2, mu4)
    }

    /// Text form: one `re im b_{m-1}..b_0` line per point.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (p, l) in self.points.iter().zip(&self.labels) {
            let _ = writeln!(s, "{:.17e} {:.17e} {:0width$b}", p.re, p.im, l, width = self.bits as usize);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        let mut labels = Vec::new();
        let mut width = None;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| Error::Config(format!("constellation line {}: {what}", n + 1));
            let mut it = line.split_whitespace();
            let re: f64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("bad real part"))?;
            let im: f64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("bad imaginary part"))?;
            let bits = it.next().ok_or_else(|| bad("missing bit label"))?;
            if it.next().is_some() {
                return Err(bad("trailing fields"));
            }
            if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
                return Err(bad("label must be a string of 0/1"));
            }
            match width {
                None => width = Some(bits.len()),
                Some(w) if w != bits.len() => return Err(bad("inconsistent label width")),
                _ => {}
            }
            points.push(Complex64::new(re, im));
            labels.push(u32::from_str_radix(bits, 2).map_err(|_| bad("label too long"))?);
        }
        let c = Constellation::new(points, labels)?;
        if width != Some(c.bits as usize) {
            return Err(Error::Config(format!(
                "label width {:?} does not match {} points",
                width,
                c.len()
            )));
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn gray(x: u32) -> u32 {
    x ^ (x >> 1)
}

/// `μ4/μ2² − 2` with uniform point probabilities.
pub fn excess_kurtosis(c: &Constellation) -> f64 {
    let (mu2, mu4) = c.moments();
    mu4 / (mu2 * mu2) - 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn square_qam_kurtosis() {
        assert_relative_eq!(excess_kurtosis(&Constellation::square_qam(2).unwrap()), -1.0, epsilon = 1e-15);
        // μ2 = 10, μ4 = 132 before normalization
        assert_relative_eq!(excess_kurtosis(&Constellation::square_qam(4).unwrap()), -0.68, epsilon = 1e-14);
        // μ2 = 42, μ4 = 2·777 + 2·21² = 2436
        assert_relative_eq!(
            excess_kurtosis(&Constellation::square_qam(6).unwrap()),
            2436.0 / 1764.0 - 2.0,
            epsilon = 1e-14
        );
        let (mu2, _) = Constellation::square_qam(6).unwrap().moments();
        assert_relative_eq!(mu2, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn gaussian_cloud_has_zero_excess_kurtosis() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1 << 20;
        let pts: Vec<Complex64> = (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        let c = Constellation::new(pts, (0..n as u32).collect()).unwrap();
        assert!(excess_kurtosis(&c).abs() < 0.01);
    }

    #[test]
    fn gray_labels_differ_in_one_bit_between_neighbours() {
        let c = Constellation::square_qam(4).unwrap();
        let d = 2.0 / 10f64.sqrt();
        for (a, la) in c.points().iter().zip(c.labels()) {
            for (b, lb) in c.points().iter().zip(c.labels()) {
                if ((a - b).norm() - d).abs() < 1e-9 {
                    assert_eq!((la ^ lb).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn text_round_trip_and_validation() {
        let c = Constellation::square_qam(4).unwrap();
        let back = Constellation::from_text(&c.to_text()).unwrap();
        assert_eq!(back.labels(), c.labels());
        for (a, b) in back.points().iter().zip(c.points()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!(Constellation::from_text("1 0 0\n-1 0 1\n0 1 1\n").is_err());
        assert!(Constellation::from_text("1 0 00\n-1 0 01\n0 1 10\n0 -1 10\n").is_err());
        assert!(Constellation::from_text("1 0 0\n-1 0 1\n").is_ok());
        assert!(matches!(Constellation::square_qam(3), Err(Error::Capability(_))));
    }

    proptest! {
        #[test]
        fn kurtosis_invariant_to_rotation_and_scale(theta in 0.0f64..6.28, scale in 0.1f64..10.0) {
            let c = Constellation::square_qam(6).unwrap();
            let rot = Complex64::from_polar(scale, theta);
            let moved = Constellation::new(c.points().iter().map(|p| p * rot).collect(), c.labels().to_vec()).unwrap();
            prop_assert!((excess_kurtosis(&moved) - excess_kurtosis(&c)).abs() < 1e-12);
        }
    }
}
