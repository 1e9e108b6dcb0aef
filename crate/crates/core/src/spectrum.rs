//! Discrete spectra of sampled amplitudes and simple peak picking.
//!
//! Sign convention: a sample series e^{−jωt} shows up at +ω.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::linalg::C64;

/// Peaks below this fraction of the largest magnitude are ignored.
pub const PEAK_THRESHOLD: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    /// Ascending angular frequencies (rad/s).
    pub frequencies: Vec<f64>,
    /// |X(ω)| / N.
    pub magnitudes: Vec<f64>,
    /// Spacing between neighbouring frequencies.
    pub bin_width: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    /// Which amplitude the peak came from (0-based).
    pub component: usize,
    pub frequency: f64,
    pub magnitude: f64,
}

/// Rectangular-window DFT of uniformly spaced samples.
pub fn dft(samples: &[C64], dt: f64) -> Spectrum {
    let n = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::<f64>::new().plan_fft_inverse(n).process(&mut buf);
    let bin_width = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    // bins n/2.. wrap to negative frequencies; emit in ascending order
    let half = n.div_ceil(2);
    let order: Vec<usize> = (half..n).chain(0..half).collect();
    let frequencies = order
        .iter()
        .map(|&k| if k >= half { k as f64 - n as f64 } else { k as f64 } * bin_width)
        .collect();
    let magnitudes = order.iter().map(|&k| buf[k].norm() / n as f64).collect();
    Spectrum { frequencies, magnitudes, bin_width }
}

impl Spectrum {
    /// Local maxima strictly above both (circular) neighbours and above
    /// `PEAK_THRESHOLD` of the global maximum.
    pub fn peaks(&self) -> Vec<(f64, f64)> {
        let m = &self.magnitudes;
        let n = m.len();
        let top = m.iter().copied().fold(0.0, f64::max);
        if n == 0 || top == 0.0 {
            return Vec::new();
        }
        if n < 3 {
            let k = (0..n).max_by(|&a, &b| m[a].total_cmp(&m[b])).unwrap();
            return vec![(self.frequencies[k], m[k])];
        }
        (0..n)
            .filter(|&k| {
                let left = m[(k + n - 1) % n];
                let right = m[(k + 1) % n];
                m[k] > left && m[k] > right && m[k] > PEAK_THRESHOLD * top
            })
            .map(|k| (self.frequencies[k], m[k]))
            .collect()
    }
}

/// |Σ w_n x_n e^{+jωt_n}| with a Hann window, for sub-bin refinement.
fn windowed_dtft(samples: &[f64], times: &[f64], omega: f64) -> f64 {
    let n = samples.len();
    let mut acc = C64::new(0.0, 0.0);
    for (i, (&x, &t)) in samples.iter().zip(times).enumerate() {
        let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos();
        acc += C64::from_polar(w * x, omega * t);
    }
    acc.norm()
}

/// Dominant oscillation frequency of a real signal within (0, max_omega],
/// refined by golden-section search on the windowed transform.
pub fn dominant_frequency(samples: &[f64], times: &[f64], max_omega: f64) -> f64 {
    let n = samples.len();
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    let mean = samples.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = samples.iter().map(|x| x - mean).collect();
    let as_complex: Vec<C64> = centered.iter().map(|&x| C64::new(x, 0.0)).collect();
    let spec = dft(&as_complex, dt);
    let (k, _) = spec
        .frequencies
        .iter()
        .zip(&spec.magnitudes)
        .enumerate()
        .filter(|(_, (f, _))| **f > 0.0 && **f <= max_omega)
        .max_by(|a, b| a.1 .1.total_cmp(b.1 .1))
        .expect("no positive-frequency bins below the cutoff");
    let center = spec.frequencies[k];
    let (mut lo, mut hi) = (center - spec.bin_width, center + spec.bin_width);
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let f = |w: f64| -windowed_dtft(&centered, times, w);
    let mut x1 = hi - golden * (hi - lo);
    let mut x2 = lo + golden * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-12 * center.abs().max(spec.bin_width) {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(omega: f64, amp: f64, dt: f64, n: usize) -> Vec<C64> {
        (0..n).map(|i| C64::from_polar(amp, -omega * dt * i as f64)).collect()
    }

    #[test]
    fn negative_exponent_reports_positive_frequency() {
        let dt = 0.01;
        let n = 1000;
        let spec = dft(&tone(31.4, 1.0, dt, n), dt);
        let peaks = spec.peaks();
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].0 - 31.4).abs() <= spec.bin_width);
        assert!(peaks[0].0 > 0.0);
    }

    #[test]
    fn constant_series_gives_zero_frequency_peak() {
        let spec = dft(&vec![C64::new(0.3, 0.4); 256], 0.1);
        let peaks = spec.peaks();
        assert_eq!(peaks.len(), 1);
        assert_eq!(peaks[0].0, 0.0);
        assert!((peaks[0].1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_tones_two_peaks() {
        let dt = 0.01;
        let n = 4096;
        let a = tone(-12.0, 0.6, dt, n);
        let b = tone(25.0, 0.8, dt, n);
        let sum: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let spec = dft(&sum, dt);
        let peaks = spec.peaks();
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0].0 + 12.0).abs() <= spec.bin_width);
        assert!((peaks[1].0 - 25.0).abs() <= spec.bin_width);
    }

    #[test]
    fn refined_frequency_beats_bin_width() {
        let n = 5000;
        let times: Vec<f64> = (0..n).map(|i| i as f64 * 0.05).collect();
        let x: Vec<f64> = times.iter().map(|t| 0.3 + 0.5 * (1.2345 * t).cos()).collect();
        let w = dominant_frequency(&x, &times, 5.0);
        assert!((w - 1.2345).abs() < 1e-6, "{w}");
    }
}
