//! Rectangular barrier and its time-dependent switch-off schedule.

use crate::config::Grid;
use crate::error::{Error, Result};

/// Whether the barrier stays up for the whole run or ramps down to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RampMode {
    Static,
    RampDown,
}

/// Rectangular barrier geometry plus the switch-off protocol.
///
/// In ramp-down mode the height drops from `v0` to zero in `ramp_steps`
/// equal decrements across the window [t_p − ε/2, t_p + ε/2]; each
/// sub-interval has length ε/N, matching one solver step when ε = N·dt.
#[derive(Debug, Clone, Copy)]
pub struct BarrierSchedule {
    pub x_c: f64,
    pub width: f64,
    pub v0: f64,
    pub mode: RampMode,
    pub t_p: f64,
    pub epsilon: f64,
    pub ramp_steps: usize,
}

/// Guard for classifying times onto staircase sub-intervals: step times land
/// exactly on sub-interval boundaries, and t = n·dt can round one ulp short
/// of the boundary it belongs to. Expressed as a fraction of a sub-interval.
const BOUNDARY_GUARD: f64 = 1e-12;

/// Staircase switch-off factor at time `t`.
///
/// The k-th decrement applies at the start of sub-interval k, so the factor
/// is 1 − k/N on [t_start + (k−1)·ε/N, t_start + k·ε/N) and reaches exactly
/// zero at the start of the last sub-interval; 1 before the window, 0 at and
/// after its end.
pub fn ramp_factor(t: f64, t_p: f64, epsilon: f64, ramp_steps: usize) -> Result<f64> {
    if ramp_steps == 0 {
        return Err(Error::InvalidSchedule(
            "ramp_steps must be at least 1".to_string(),
        ));
    }
    if epsilon <= 0.0 {
        return Err(Error::InvalidSchedule(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let start = t_p - epsilon / 2.0;
    if t >= t_p + epsilon / 2.0 {
        return Ok(0.0);
    }
    let sub = epsilon / ramp_steps as f64;
    let rel = (t - start) / sub + BOUNDARY_GUARD;
    if rel < 0.0 {
        return Ok(1.0);
    }
    let k = (rel.floor() as usize + 1).min(ramp_steps);
    Ok(1.0 - k as f64 / ramp_steps as f64)
}

impl BarrierSchedule {
    pub fn left_edge(&self) -> f64 {
        self.x_c - self.width / 2.0
    }

    pub fn right_edge(&self) -> f64 {
        self.x_c + self.width / 2.0
    }

    /// Height multiplier at time `t`: 1 in static mode, the staircase factor
    /// in ramp-down mode.
    pub fn factor_at(&self, t: f64) -> Result<f64> {
        match self.mode {
            RampMode::Static => Ok(1.0),
            RampMode::RampDown => ramp_factor(t, self.t_p, self.epsilon, self.ramp_steps),
        }
    }

    /// Same schedule with the ramp disabled.
    pub fn as_static(&self) -> Self {
        Self {
            mode: RampMode::Static,
            ..*self
        }
    }

    /// Same barrier with an N-step switch-off tied to the solver step `dt`.
    pub fn as_ramp_down(&self, ramp_steps: usize, dt: f64) -> Self {
        Self {
            mode: RampMode::RampDown,
            ramp_steps,
            epsilon: ramp_steps as f64 * dt,
            ..*self
        }
    }

    /// Identifier used in trace files: "static" or "N<steps>".
    pub fn tag(&self) -> String {
        match self.mode {
            RampMode::Static => "static".to_string(),
            RampMode::RampDown => format!("N{}", self.ramp_steps),
        }
    }

    pub fn validate(&self, dt: f64) -> Vec<String> {
        let mut v = Vec::new();
        if self.width <= 0.0 {
            v.push(format!(
                "barrier width must be positive, got {}",
                self.width
            ));
        }
        if self.v0 < 0.0 {
            v.push(format!(
                "barrier height must be nonnegative, got {}",
                self.v0
            ));
        }
        if self.mode == RampMode::RampDown {
            if self.ramp_steps == 0 {
                v.push("ramp_steps must be at least 1".to_string());
            }
            if self.epsilon <= 0.0 {
                v.push(format!("epsilon must be positive, got {}", self.epsilon));
            }
            let expect = self.ramp_steps as f64 * dt;
            if self.ramp_steps > 0 && (self.epsilon - expect).abs() > 1e-9 * expect {
                v.push(format!(
                    "epsilon {} is not ramp_steps·dt = {expect} (sub-step must equal the solver step)",
                    self.epsilon
                ));
            }
        }
        v
    }
}

/// Barrier support as an inclusive grid-index range, edges snapped to the
/// nearest grid points so the potential array is bit-reproducible.
pub fn support_indices(grid: &Grid, schedule: &BarrierSchedule) -> (usize, usize) {
    (
        grid.nearest_index(schedule.left_edge()),
        grid.nearest_index(schedule.right_edge()),
    )
}

/// Potential sampled on the grid at time `t`: v0·factor inside the snapped
/// barrier support, zero elsewhere.
pub fn potential_on_grid(grid: &Grid, schedule: &BarrierSchedule, t: f64) -> Result<Vec<f64>> {
    let factor = schedule.factor_at(t)?;
    let mut v = vec![0.0; grid.n_points];
    let (il, ir) = support_indices(grid, schedule);
    let height = schedule.v0 * factor;
    for value in &mut v[il..=ir] {
        *value = height;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::default_config;

    const T_P: f64 = 8e-4;

    #[test]
    fn ramp_factor_outside_window() {
        let eps = 4e-6;
        assert_eq!(ramp_factor(T_P - eps, T_P, eps, 2).unwrap(), 1.0);
        assert_eq!(ramp_factor(T_P + eps, T_P, eps, 2).unwrap(), 0.0);
    }

    #[test]
    fn ramp_factor_staircase_n2() {
        let eps = 4e-6;
        // Start of the second sub-interval: already fully off.
        assert_eq!(ramp_factor(T_P, T_P, eps, 2).unwrap(), 0.0);
        // Middle of the first sub-interval.
        assert_eq!(ramp_factor(T_P - eps / 4.0, T_P, eps, 2).unwrap(), 0.5);
        // Window start is the first reduced step.
        assert_eq!(ramp_factor(T_P - eps / 2.0, T_P, eps, 2).unwrap(), 0.5);
    }

    #[test]
    fn ramp_factor_rejects_zero_steps() {
        assert!(ramp_factor(T_P, T_P, 4e-6, 0).is_err());
    }

    #[test]
    fn ramp_factor_is_nonincreasing() {
        let eps = 1e-4;
        let n = 50;
        let mut last = f64::INFINITY;
        for i in 0..=4000 {
            let t = T_P - eps + i as f64 * (2.0 * eps / 4000.0);
            let f = ramp_factor(t, T_P, eps, n).unwrap();
            assert!(f <= last + 1e-15, "increased at t={t}");
            assert!((0.0..=1.0).contains(&f));
            last = f;
        }
    }

    #[test]
    fn staircase_mean_matches_closed_form() {
        // Direct summation of the N sub-interval values against (1 − 1/N)/2.
        for n in [2usize, 10, 30, 50] {
            let eps = 1e-4;
            let sub = eps / n as f64;
            let mut sum = 0.0;
            for k in 1..=n {
                let t = T_P - eps / 2.0 + (k as f64 - 0.5) * sub;
                sum += ramp_factor(t, T_P, eps, n).unwrap();
            }
            let mean = sum / n as f64;
            let expect = (1.0 - 1.0 / n as f64) / 2.0;
            assert!((mean - expect).abs() < 1e-12, "N={n}: {mean} vs {expect}");
        }
    }

    #[test]
    fn staircase_converges_to_linear_ramp() {
        let eps = 1e-4;
        let n = 10_000;
        let mut max_dev: f64 = 0.0;
        for i in 1..5000 {
            let t = T_P - eps / 2.0 + i as f64 * (eps / 5000.0);
            if t >= T_P + eps / 2.0 {
                break;
            }
            let stair = ramp_factor(t, T_P, eps, n).unwrap();
            let linear = (T_P + eps / 2.0 - t) / eps;
            max_dev = max_dev.max((stair - linear).abs());
        }
        assert!(max_dev < 1e-3, "max deviation {max_dev}");
    }

    #[test]
    fn ramp_boundary_is_robust_to_step_time_rounding() {
        // t = 399·dt is the window start of the default N=2 schedule whether
        // or not that product rounds exactly onto t_p − ε/2.
        let dt = 2e-6;
        let t = 399.0 * dt;
        assert_eq!(ramp_factor(t, T_P, 2.0 * dt, 2).unwrap(), 0.5);
        assert_eq!(ramp_factor(400.0 * dt, T_P, 2.0 * dt, 2).unwrap(), 0.0);
        assert_eq!(ramp_factor(398.0 * dt, T_P, 2.0 * dt, 2).unwrap(), 1.0);
    }

    #[test]
    fn barrier_support_covers_129_points() {
        let cfg = default_config();
        let (il, ir) = support_indices(&cfg.grid, &cfg.barrier);
        assert_eq!((il, ir), (2936, 3064));
        assert_eq!(ir - il + 1, 129);
    }

    #[test]
    fn potential_height_is_twice_packet_energy() {
        let cfg = default_config();
        let v = potential_on_grid(&cfg.grid, &cfg.barrier.as_static(), 0.0).unwrap();
        let ic = cfg.grid.nearest_index(1.5);
        assert!((v[ic] - 49748.02).abs() < 0.03, "V0 = {}", v[ic]);
        let outside = cfg.grid.nearest_index(1.5 + cfg.barrier.width);
        assert_eq!(v[outside], 0.0);
    }

    #[test]
    fn potential_vanishes_after_switch_off() {
        let cfg = default_config();
        let sched = cfg.barrier.as_ramp_down(50, cfg.grid.dt);
        let t = sched.t_p + sched.epsilon / 2.0;
        let v = potential_on_grid(&cfg.grid, &sched, t).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn potential_support_and_sign() {
        let cfg = default_config();
        let sched = cfg.barrier.as_ramp_down(10, cfg.grid.dt);
        for &t in &[0.0, 7.9e-4, 8e-4, 8.1e-4, 2e-3] {
            let v = potential_on_grid(&cfg.grid, &sched, t).unwrap();
            let (il, ir) = support_indices(&cfg.grid, &sched);
            for (i, &val) in v.iter().enumerate() {
                assert!(val >= 0.0);
                if !(il..=ir).contains(&i) {
                    assert_eq!(val, 0.0, "support leak at i={i}, t={t}");
                }
            }
        }
    }
}
