//! Reflection-probability functional and trace-level observables.

use crate::error::{Error, Result};
use crate::wavepacket::WaveFunction;

/// Fraction of the trace used to read off the asymptotic value.
pub const ASYMPTOTE_WINDOW_FRACTION: f64 = 0.05;

/// Largest max−min spread tolerated across the asymptote window; a trace
/// still rising faster than this is not asymptotic yet.
pub const ASYMPTOTE_FLATNESS_LIMIT: f64 = 0.01;

/// Time series of (t, |R(t)|², norm) for one run, uniformly sampled.
#[derive(Debug, Clone)]
pub struct ReflectionTrace {
    pub times: Vec<f64>,
    pub r2: Vec<f64>,
    pub norm: Vec<f64>,
    pub config_tag: String,
}

impl ReflectionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sample spacing (the solver step).
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    /// |R(t)|² linearly interpolated between samples; clamps outside the axis.
    pub fn r2_at(&self, t: f64) -> f64 {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.r2[0];
        }
        if t >= self.times[n - 1] {
            return self.r2[n - 1];
        }
        let i = match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
        {
            Ok(exact) => return self.r2[exact],
            Err(after) => after - 1,
        };
        let frac = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        self.r2[i] + frac * (self.r2[i + 1] - self.r2[i])
    }

    /// Trapezoidal ∫r2 dt over [a, b] with interpolated partial end cells.
    pub fn integrate_r2(&self, a: f64, b: f64) -> Result<f64> {
        let n = self.times.len();
        if a < self.times[0] || b > self.times[n - 1] || a > b {
            return Err(Error::Domain(format!(
                "window [{a}, {b}] outside trace [{}, {}]",
                self.times[0],
                self.times[n - 1]
            )));
        }
        let i0 = self.times.partition_point(|&t| t < a);
        let i1 = self.times.partition_point(|&t| t <= b) - 1;
        if i0 > i1 {
            // Both ends inside one sampling cell.
            return Ok((b - a) * (self.r2_at(a) + self.r2_at(b)) / 2.0);
        }
        let mut sum = 0.0;
        for i in i0..i1 {
            sum += (self.times[i + 1] - self.times[i]) * (self.r2[i] + self.r2[i + 1]) / 2.0;
        }
        sum += (self.times[i0] - a) * (self.r2_at(a) + self.r2[i0]) / 2.0;
        sum += (b - self.times[i1]) * (self.r2[i1] + self.r2_at(b)) / 2.0;
        Ok(sum)
    }
}

/// Probability mass left of `x_prime` at the state's instant:
/// trapezoidal ∫|ψ|²dx over [x_min, x_prime]. The box's left wall stands in
/// for −∞, valid while the density there is negligible.
pub fn reflection_probability(wf: &WaveFunction, x_prime: f64) -> Result<f64> {
    let grid = &wf.grid;
    if !grid.contains(x_prime) {
        return Err(Error::OutsideGrid(x_prime));
    }
    let dx = grid.dx();
    let full = ((x_prime - grid.x_min) / dx).floor() as usize;
    let full = full.min(grid.n_points - 1);
    let mut sum = 0.0;
    if full > 0 {
        sum = 0.5 * (wf.density(0) + wf.density(full));
        for i in 1..full {
            sum += wf.density(i);
        }
        sum *= dx;
    }
    // Partial cell from the last full sample to x_prime.
    let x_full = grid.x(full);
    let rest = x_prime - x_full;
    if rest > 0.0 && full + 1 < grid.n_points {
        let frac = rest / dx;
        let d_end = wf.density(full) + frac * (wf.density(full + 1) - wf.density(full));
        sum += rest * (wf.density(full) + d_end) / 2.0;
    }
    Ok(sum)
}

/// Mean of r2 over the final window of the trace, with a flatness guard:
/// errs if the trace is still moving more than [`ASYMPTOTE_FLATNESS_LIMIT`].
pub fn asymptotic_reflection(trace: &ReflectionTrace) -> Result<f64> {
    let n = trace.len();
    if n == 0 {
        return Err(Error::Domain("empty trace".to_string()));
    }
    let w = ((n as f64 * ASYMPTOTE_WINDOW_FRACTION).floor() as usize).max(1);
    let window = &trace.r2[n - w..];
    let max = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = window.iter().copied().fold(f64::INFINITY, f64::min);
    if max - min > ASYMPTOTE_FLATNESS_LIMIT {
        return Err(Error::NotAsymptotic {
            flatness: max - min,
            limit: ASYMPTOTE_FLATNESS_LIMIT,
        });
    }
    Ok(window.iter().sum::<f64>() / w as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::default_config;
    use crate::wavepacket::gaussian_packet;
    use num_complex::Complex64;

    fn synthetic_trace(r2: Vec<f64>, dt: f64) -> ReflectionTrace {
        let times = (0..r2.len()).map(|i| i as f64 * dt).collect();
        let norm = vec![1.0; r2.len()];
        ReflectionTrace {
            times,
            r2,
            norm,
            config_tag: "synthetic".to_string(),
        }
    }

    #[test]
    fn initial_packet_tail_matches_gaussian_oracle() {
        // Mass left of x' for the default packet against ½·erfc((x0−x')/(σ√2)).
        let cfg = default_config();
        let wf = gaussian_packet(&cfg.grid, cfg.x0, cfg.sigma0, cfg.p0).unwrap();
        let got = reflection_probability(&wf, cfg.x_prime).unwrap();
        let z = (cfg.x0 - cfg.x_prime) / (cfg.sigma0 * std::f64::consts::SQRT_2);
        let expect = 0.5 * statrs::function::erf::erfc(z);
        assert!((got - expect).abs() < 5e-4, "{got} vs {expect}");
        assert!((got - expect).abs() / expect < 0.03);
    }

    #[test]
    fn full_box_integral_is_the_norm() {
        let cfg = default_config();
        let wf = gaussian_packet(&cfg.grid, cfg.x0, cfg.sigma0, cfg.p0).unwrap();
        let got = reflection_probability(&wf, cfg.grid.x_max).unwrap();
        assert!((got - wf.norm()).abs() < 1e-12);
    }

    #[test]
    fn zero_state_integrates_to_zero() {
        let cfg = default_config();
        let wf = WaveFunction {
            grid: cfg.grid,
            values: vec![Complex64::default(); cfg.grid.n_points],
            t: 0.0,
        };
        assert_eq!(reflection_probability(&wf, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn x_prime_outside_grid_is_an_error() {
        let cfg = default_config();
        let wf = gaussian_packet(&cfg.grid, cfg.x0, cfg.sigma0, cfg.p0).unwrap();
        assert!(matches!(
            reflection_probability(&wf, 3.5),
            Err(Error::OutsideGrid(_))
        ));
        assert!(reflection_probability(&wf, -0.1).is_err());
    }

    #[test]
    fn reflection_probability_is_monotone_in_x_prime() {
        let cfg = default_config();
        let wf = gaussian_packet(&cfg.grid, cfg.x0, cfg.sigma0, cfg.p0).unwrap();
        let mut last = 0.0;
        for k in 0..=30 {
            let x = cfg.grid.x_min + k as f64 * (cfg.grid.x_max - cfg.grid.x_min) / 30.0;
            let v = reflection_probability(&wf, x).unwrap();
            assert!(v + 1e-15 >= last, "decreased at x'={x}");
            last = v;
        }
    }

    #[test]
    fn asymptote_of_constant_trace() {
        let trace = synthetic_trace(vec![0.42; 200], 1e-6);
        assert!((asymptotic_reflection(&trace).unwrap() - 0.42).abs() < 1e-15);
    }

    #[test]
    fn rising_trace_is_not_asymptotic() {
        let r2: Vec<f64> = (0..200).map(|i| i as f64 * 1e-2).collect();
        let trace = synthetic_trace(r2, 1e-6);
        assert!(matches!(
            asymptotic_reflection(&trace),
            Err(Error::NotAsymptotic { .. })
        ));
    }

    #[test]
    fn window_integration_partial_cells() {
        // Constant c over any window integrates to c·(b−a) exactly, including
        // fractional end cells.
        let trace = synthetic_trace(vec![0.75; 11], 0.1);
        let got = trace.integrate_r2(0.13, 0.87).unwrap();
        assert!((got - 0.75 * 0.74).abs() < 1e-12, "{got}");
        // Window inside a single cell.
        let got = trace.integrate_r2(0.42, 0.48).unwrap();
        assert!((got - 0.75 * 0.06).abs() < 1e-12, "{got}");
        // Degenerate window.
        assert_eq!(trace.integrate_r2(0.5, 0.5).unwrap(), 0.0);
        assert!(trace.integrate_r2(-0.1, 0.5).is_err());
    }

    #[test]
    fn interpolation_between_samples() {
        let trace = synthetic_trace(vec![0.0, 1.0, 0.0], 1.0);
        assert!((trace.r2_at(0.25) - 0.25).abs() < 1e-15);
        assert!((trace.r2_at(1.5) - 0.5).abs() < 1e-15);
        assert_eq!(trace.r2_at(-1.0), 0.0);
        assert_eq!(trace.r2_at(9.0), 0.0);
    }
}
