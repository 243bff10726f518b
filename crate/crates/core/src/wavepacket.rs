//! Initial Gaussian packet, its momentum spectrum, and the analytic
//! free-evolution density used as a solver oracle.

use num_complex::Complex64;

use crate::config::Grid;
use crate::error::{Error, Result};

/// Spectrum window half-width in units of the spectral standard deviation.
/// |φ|² mass outside ±8σ is below 1e-14, adequate for the momentum quadrature.
pub const SPECTRUM_HALF_WIDTH_SIGMAS: f64 = 8.0;

/// Momentum samples across the spectrum window.
pub const SPECTRUM_POINTS: usize = 2049;

/// Complex field sampled on a grid, endpoints pinned to zero (hard walls).
#[derive(Debug, Clone)]
pub struct WaveFunction {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub t: f64,
}

impl WaveFunction {
    /// Discrete norm ∫|ψ|²dx by the trapezoidal rule.
    pub fn norm(&self) -> f64 {
        trapezoid_norm(&self.values, self.grid.dx())
    }

    /// |ψ|² at sample `i`.
    pub fn density(&self, i: usize) -> f64 {
        self.values[i].norm_sqr()
    }

    /// Index of the density maximum.
    pub fn peak_index(&self) -> usize {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, v) in self.values.iter().enumerate() {
            let d = v.norm_sqr();
            if d > best_val {
                best_val = d;
                best = i;
            }
        }
        best
    }
}

fn trapezoid_norm(values: &[Complex64], dx: f64) -> f64 {
    let n = values.len();
    let mut sum = 0.5 * (values[0].norm_sqr() + values[n - 1].norm_sqr());
    for v in &values[1..n - 1] {
        sum += v.norm_sqr();
    }
    sum * dx
}

/// Gaussian packet (2πσ0²)^(−1/4)·exp[−(x−x0)²/(4σ0²) + i·p0·x] sampled on
/// the grid, endpoints forced to zero, then renormalized to discrete norm 1.
///
/// σ0 is the standard deviation of the initial |ψ|². Construction fails if
/// the analytic density at either wall exceeds 1e-12 of the peak.
pub fn gaussian_packet(grid: &Grid, x0: f64, sigma0: f64, p0: f64) -> Result<WaveFunction> {
    if sigma0 <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "sigma0 must be positive, got {sigma0}"
        )));
    }
    for wall in [grid.x_min, grid.x_max] {
        let d = wall - x0;
        let rel = (-d * d / (2.0 * sigma0 * sigma0)).exp();
        if rel >= 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "packet overlaps wall at x={wall}: relative density {rel:.2e} ≥ 1e-12"
            )));
        }
    }
    let amp = (2.0 * std::f64::consts::PI * sigma0 * sigma0).powf(-0.25);
    let mut values = Vec::with_capacity(grid.n_points);
    for i in 0..grid.n_points {
        let x = grid.x(i);
        let envelope = amp * (-(x - x0) * (x - x0) / (4.0 * sigma0 * sigma0)).exp();
        let phase = p0 * x;
        values.push(Complex64::new(phase.cos(), phase.sin()) * envelope);
    }
    values[0] = Complex64::new(0.0, 0.0);
    let last = grid.n_points - 1;
    values[last] = Complex64::new(0.0, 0.0);
    let norm = trapezoid_norm(&values, grid.dx()).sqrt();
    for v in &mut values {
        *v /= norm;
    }
    Ok(WaveFunction {
        grid: *grid,
        values,
        t: 0.0,
    })
}

/// Momentum-space amplitudes φ(p) on a uniform window with spacing `dp`.
#[derive(Debug, Clone)]
pub struct MomentumSpectrum {
    pub p_values: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub dp: f64,
}

impl MomentumSpectrum {
    /// Trapezoidal ∫|φ|²dp over the window; 1 for a normalized state whose
    /// spectrum fits the window (Parseval).
    pub fn parseval_sum(&self) -> f64 {
        let n = self.amplitudes.len();
        let mut sum = 0.5 * (self.amplitudes[0].norm_sqr() + self.amplitudes[n - 1].norm_sqr());
        for a in &self.amplitudes[1..n - 1] {
            sum += a.norm_sqr();
        }
        sum * self.dp
    }

    /// Mean momentum of |φ|².
    pub fn centroid(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (p, a) in self.p_values.iter().zip(&self.amplitudes) {
            let w = a.norm_sqr();
            num += p * w;
            den += w;
        }
        num / den
    }

    /// Standard deviation of |φ|².
    pub fn std_dev(&self) -> f64 {
        let c = self.centroid();
        let mut num = 0.0;
        let mut den = 0.0;
        for (p, a) in self.p_values.iter().zip(&self.amplitudes) {
            let w = a.norm_sqr();
            num += (p - c) * (p - c) * w;
            den += w;
        }
        (num / den).sqrt()
    }

    /// Momentum with the largest |φ|².
    pub fn peak_momentum(&self) -> f64 {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let w = a.norm_sqr();
            if w > best_val {
                best_val = w;
                best = i;
            }
        }
        self.p_values[best]
    }
}

/// Fourier transform φ(p) = (2π)^(−1/2)∫ψ(x)e^(−ipx)dx by direct quadrature
/// on a window centered at the state's mean momentum, ±8 spectral widths
/// estimated from the position variance.
pub fn momentum_spectrum(wf: &WaveFunction) -> MomentumSpectrum {
    let dx = wf.grid.dx();
    // Position moments of |ψ|² give the window center and width: the mean
    // momentum comes from Im(ψ* ψ') integrated by central differences.
    let mut w_sum = 0.0;
    let mut x_mean = 0.0;
    for (i, v) in wf.values.iter().enumerate() {
        let w = v.norm_sqr();
        w_sum += w;
        x_mean += wf.grid.x(i) * w;
    }
    x_mean /= w_sum;
    let mut x_var = 0.0;
    let mut p_mean = 0.0;
    for (i, v) in wf.values.iter().enumerate() {
        let w = v.norm_sqr();
        let d = wf.grid.x(i) - x_mean;
        x_var += d * d * w;
        if i > 0 && i + 1 < wf.values.len() {
            let deriv = (wf.values[i + 1] - wf.values[i - 1]) / (2.0 * dx);
            p_mean += (v.conj() * deriv).im;
        }
    }
    x_var /= w_sum;
    p_mean /= w_sum;
    let sigma_x = x_var.sqrt();
    let sigma_p = 1.0 / (2.0 * sigma_x);

    let half = SPECTRUM_HALF_WIDTH_SIGMAS * sigma_p;
    let n_p = SPECTRUM_POINTS;
    let dp = 2.0 * half / (n_p - 1) as f64;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();

    let mut p_values = Vec::with_capacity(n_p);
    let mut amplitudes = Vec::with_capacity(n_p);
    for j in 0..n_p {
        let p = p_mean - half + j as f64 * dp;
        // e^(−ipx_i) by phasor recurrence: one complex multiply per sample.
        // Unit-magnitude drift over the grid is ~n·eps, far below the
        // quadrature error.
        let x0 = wf.grid.x_min;
        let mut phasor = Complex64::new((p * x0).cos(), -(p * x0).sin());
        let step = Complex64::new((p * dx).cos(), -(p * dx).sin());
        let mut acc = Complex64::new(0.0, 0.0);
        for v in &wf.values {
            acc += v * phasor;
            phasor *= step;
        }
        p_values.push(p);
        amplitudes.push(acc * dx * norm);
    }
    MomentumSpectrum {
        p_values,
        amplitudes,
        dp,
    }
}

/// |ψ(x,t)|² of a freely evolving Gaussian packet:
/// (2πσ_t²)^(−1/2)·exp[−(x − x0 − (p0/m)t)² / (2σ_t²)] with
/// σ_t² = σ0²(1 + (tħ/(2mσ0²))²). Analytic oracle for the stepper.
pub fn free_evolution_density(x: f64, t: f64, x0: f64, sigma0: f64, p0: f64, mass: f64) -> f64 {
    let spread = t / (2.0 * mass * sigma0 * sigma0);
    let st2 = sigma0 * sigma0 * (1.0 + spread * spread);
    let center = x0 + (p0 / mass) * t;
    let d = x - center;
    (2.0 * std::f64::consts::PI * st2).powf(-0.5) * (-d * d / (2.0 * st2)).exp()
}
