//! Spectral analysis of sampled observables.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Strongest non-zero Fourier component of a uniformly sampled signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub bin: usize,
    /// Angular frequency 2πk/(n·dt).
    pub omega: f64,
    pub amplitude: f64,
}

/// Largest |DFT| bin after removing the mean; the DC bin is excluded.
/// Returns `None` for fewer than four samples or a constant signal.
pub fn dominant_frequency(samples: &[f64], dt: f64) -> Option<Peak> {
    let n = samples.len();
    if n < 4 || !(dt > 0.0) {
        return None;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&x| Complex::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let (bin, amplitude) = buf[1..=n / 2]
        .iter()
        .enumerate()
        .map(|(i, z)| (i + 1, z.norm()))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    (amplitude > 0.0).then(|| Peak {
        bin,
        omega: 2.0 * std::f64::consts::PI * bin as f64 / (n as f64 * dt),
        amplitude,
    })
}
