use rustfft::num_complex::Complex as FftComplex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::TrajectoryRecord;
use crate::error::{Error, Result};

/// Fewest samples accepted in a Fourier window.
pub const MIN_SAMPLES: usize = 64;
/// Peaks below this fraction of the largest non-DC magnitude are dropped.
const PEAK_FRACTION: f64 = 0.05;

/// What is subtracted from the series before the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocess {
    /// Subtract the mean.
    #[default]
    Mean,
    /// Transform successive differences, which suppresses slow drifts such as
    /// the decay of the populations.
    FirstDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectrumOptions {
    pub preprocess: Preprocess,
    pub hann: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Angular frequency in units of the mirror frequency.
    pub frequency: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPeaks {
    /// Spacing of the angular-frequency bins.
    pub resolution: f64,
    pub samples: usize,
    /// Local maxima, largest first.
    pub peaks: Vec<Peak>,
}

/// Peaks of the spectrum of a uniformly sampled series.
pub fn spectrum_of_series(times: &[f64], values: &[f64], opts: &SpectrumOptions) -> Result<SpectrumPeaks> {
    if times.len() != values.len() {
        return Err(Error::InvalidParameter("times and values differ in length".into()));
    }
    if times.len() < MIN_SAMPLES {
        return Err(Error::WindowTooShort { samples: times.len(), required: MIN_SAMPLES });
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return Err(Error::NonuniformGrid);
    }
    let mut x: Vec<f64> = match opts.preprocess {
        Preprocess::Mean => values.to_vec(),
        Preprocess::FirstDifference => values.windows(2).map(|w| w[1] - w[0]).collect(),
    };
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    if opts.hann {
        for (k, v) in x.iter_mut().enumerate() {
            *v *= 0.5 - 0.5 * (std::f64::consts::TAU * k as f64 / (n - 1) as f64).cos();
        }
    }
    let mut buf: Vec<FftComplex<f64>> = x.iter().map(|&v| FftComplex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<f64> = buf[..=n / 2].iter().map(|z| z.norm()).collect();
    let resolution = std::f64::consts::TAU / (n as f64 * dt);
    let top = mag[1..].iter().cloned().fold(0.0, f64::max);
    let mut peaks: Vec<Peak> = (1..mag.len())
        .filter(|&k| {
            let left = mag[k - 1];
            let right = if k + 1 < mag.len() { mag[k + 1] } else { f64::NEG_INFINITY };
            mag[k] > left && mag[k] >= right && mag[k] >= PEAK_FRACTION * top && top > 0.0
        })
        .map(|k| Peak { frequency: k as f64 * resolution, magnitude: mag[k] })
        .collect();
    peaks.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));
    Ok(SpectrumPeaks { resolution, samples: n, peaks })
}

/// Peaks of the spectrum of one observable over `window = (start, end)`.
pub fn spectrum_of(
    traj: &TrajectoryRecord,
    observable: &str,
    window: (f64, f64),
    opts: &SpectrumOptions,
) -> Result<SpectrumPeaks> {
    let series = traj.observable(observable)?;
    let (lo, hi) = window;
    let idx: Vec<usize> = (0..traj.times.len()).filter(|&k| traj.times[k] >= lo && traj.times[k] <= hi).collect();
    let times: Vec<f64> = idx.iter().map(|&k| traj.times[k]).collect();
    let values: Vec<f64> = idx.iter().map(|&k| series[k]).collect();
    spectrum_of_series(&times, &values, opts)
}
