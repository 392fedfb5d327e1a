use std::f64::consts::TAU;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest imaginary residue tolerated when collapsing an inverse transform
/// to a real signal.
pub const REAL_RESIDUE_TOLERANCE: f64 = 1e-6;

/// Mean over a centred window of odd `size`, edges padded by replication.
pub fn box_blur(signal: &[f64], size: usize) -> Result<Vec<f64>> {
    if size % 2 == 0 {
        return Err(Error::input(format!("blur size must be odd, got {size}")));
    }
    if size > signal.len() {
        return Err(Error::input(format!(
            "blur size {size} exceeds signal length {}",
            signal.len()
        )));
    }
    let half = (size / 2) as isize;
    let last = signal.len() as isize - 1;
    Ok((0..signal.len() as isize)
        .map(|i| {
            let mut sum = 0.0;
            for k in (i - half)..=(i + half) {
                sum += signal[k.clamp(0, last) as usize];
            }
            sum / size as f64
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bins: Vec<Complex<f64>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.norm()).collect()
    }

    pub fn energy(&self) -> f64 {
        self.bins.iter().map(|b| b.norm_sqr()).sum::<f64>() / self.bins.len() as f64
    }
}

/// `exp(-2 pi i m / n)` for `m = 0..n`; products are reduced modulo `n` before
/// lookup so every twiddle is computed from a small angle.
fn twiddles(n: usize) -> Vec<Complex<f64>> {
    (0..n)
        .map(|m| {
            let a = -TAU * m as f64 / n as f64;
            Complex::new(a.cos(), a.sin())
        })
        .collect()
}

/// Direct `O(N^2)` discrete Fourier transform, `f_k = sum x_n e^{-2 pi i k n / N}`.
pub fn dft(signal: &[f64]) -> Spectrum {
    let n = signal.len();
    let w = twiddles(n);
    let bins = (0..n)
        .map(|k| {
            let mut acc = Complex::new(0.0, 0.0);
            for (t, &x) in signal.iter().enumerate() {
                acc += w[(k * t) % n] * x;
            }
            acc
        })
        .collect();
    Spectrum { bins }
}

/// Inverse of [`dft`], complex-valued.
pub fn idft_complex(spec: &Spectrum) -> Vec<Complex<f64>> {
    let n = spec.len();
    let w = twiddles(n);
    (0..n)
        .map(|t| {
            let mut acc = Complex::new(0.0, 0.0);
            for (k, &f) in spec.bins.iter().enumerate() {
                acc += f * w[(k * t) % n].conj();
            }
            acc / n as f64
        })
        .collect()
}

/// Inverse transform of a spectrum that should describe a real signal.
pub fn idft(spec: &Spectrum) -> Result<Vec<f64>> {
    let values = idft_complex(spec);
    let worst = values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if worst >= REAL_RESIDUE_TOLERANCE {
        return Err(Error::input(format!(
            "inverse transform is not real: imaginary residue {worst:e}"
        )));
    }
    Ok(values.into_iter().map(|v| v.re).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMode {
    /// Zero every bin whose magnitude is below the threshold.
    Magnitude,
    /// Zero every bin whose frequency index `min(k, N - k)` reaches the threshold.
    LowpassBins,
}

impl std::str::FromStr for FilterMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "magnitude" => Ok(FilterMode::Magnitude),
            "lowpass_bins" => Ok(FilterMode::LowpassBins),
            other => Err(format!("unknown filter mode `{other}` (magnitude | lowpass_bins)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub blur_size: usize,
    pub threshold: f64,
    pub mode: FilterMode,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig { blur_size: 15, threshold: 20.0, mode: FilterMode::Magnitude }
    }
}

impl FilterConfig {
    pub fn check(&self) -> Result<()> {
        if self.blur_size == 0 || self.blur_size % 2 == 0 {
            return Err(Error::input(format!("blur size must be odd and >= 1, got {}", self.blur_size)));
        }
        if !(self.threshold >= 0.0) {
            return Err(Error::input(format!("filter threshold must be >= 0, got {}", self.threshold)));
        }
        Ok(())
    }
}

/// Zeroes spectral bins per `config.mode` and transforms back.
///
/// Bins `k` and `N - k` always share a decision (taken on the lower index) so
/// the filtered spectrum stays conjugate-symmetric.
pub fn frequency_filter(signal: &[f64], config: &FilterConfig) -> Result<Vec<f64>> {
    if signal.is_empty() {
        return Ok(Vec::new());
    }
    let mut spec = dft(signal);
    let n = spec.len();
    let keep: Vec<bool> = (0..n)
        .map(|k| {
            let low = k.min(n - k);
            match config.mode {
                FilterMode::Magnitude => spec.bins[low].norm() >= config.threshold,
                FilterMode::LowpassBins => (low as f64) < config.threshold,
            }
        })
        .collect();
    for (bin, keep) in spec.bins.iter_mut().zip(keep) {
        if !keep {
            *bin = Complex::new(0.0, 0.0);
        }
    }
    idft(&spec)
}
