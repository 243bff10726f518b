//! Implicit time stepping for the time-dependent Schrödinger equation.
//!
//! One step applies the Cayley form of the evolution operator,
//! (1 + iH·dt/2)ψⁿ⁺¹ = (1 − iH·dt/2)ψⁿ, with H = −(ħ²/2m)∂²/∂x² + V(x,t)
//! discretized by the three-point Laplacian on hard-wall (Dirichlet)
//! boundaries. The operator is unitary in exact arithmetic, so the discrete
//! norm is conserved to rounding. The potential is evaluated at the step's
//! start time: with the staircase switch-off it is constant within each step.

use num_complex::Complex64;

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::observables::{reflection_probability, ReflectionTrace};
use crate::potential::{support_indices, BarrierSchedule};
use crate::wavepacket::{gaussian_packet, WaveFunction};

/// Points monitored at each box wall for stray density (hard walls reflect;
/// the box must be large enough that nothing reaches them during a run).
pub const WALL_MONITOR_POINTS: usize = 10;

/// Complex tridiagonal system; `lower` and `upper` have length n−1.
#[derive(Debug, Clone)]
pub struct TridiagonalSystem {
    pub lower: Vec<Complex64>,
    pub diag: Vec<Complex64>,
    pub upper: Vec<Complex64>,
}

impl TridiagonalSystem {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Strict row dominance |d_i| > |l_i| + |u_i|, which guarantees the
    /// elimination below never meets a vanishing pivot.
    pub fn is_diagonally_dominant(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| {
            let lower = if i > 0 { self.lower[i - 1].norm() } else { 0.0 };
            let upper = if i + 1 < n { self.upper[i].norm() } else { 0.0 };
            self.diag[i].norm() > lower + upper
        })
    }
}

/// Thomas elimination writing the solution into `out`; `work` holds the
/// modified upper diagonal. All slices must have length n (work and out may
/// be uninitialized).
fn thomas_into(
    lower: &[Complex64],
    diag: &[Complex64],
    upper: &[Complex64],
    rhs: &[Complex64],
    work: &mut [Complex64],
    out: &mut [Complex64],
) -> Result<()> {
    let n = diag.len();
    let pivot_floor = 1e-300;

    let mut pivot = diag[0];
    if pivot.norm_sqr() < pivot_floor {
        return Err(Error::NumericalBreakdown("zero pivot at row 0".to_string()));
    }
    work[0] = upper.first().copied().unwrap_or_default() / pivot;
    out[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * work[i - 1];
        if pivot.norm_sqr() < pivot_floor {
            return Err(Error::NumericalBreakdown(format!("zero pivot at row {i}")));
        }
        if i < n - 1 {
            work[i] = upper[i] / pivot;
        }
        out[i] = (rhs[i] - lower[i - 1] * out[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        let next = out[i + 1];
        out[i] -= work[i] * next;
    }
    Ok(())
}

/// Solves `system`·x = rhs by Thomas elimination without pivoting.
pub fn solve_tridiagonal(system: &TridiagonalSystem, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = system.n();
    assert_eq!(rhs.len(), n, "rhs length must match the system");
    let mut work = vec![Complex64::default(); n];
    let mut out = vec![Complex64::default(); n];
    thomas_into(
        &system.lower,
        &system.diag,
        &system.upper,
        rhs,
        &mut work,
        &mut out,
    )?;
    Ok(out)
}

/// Reusable stepping kernel: owns the Cayley-form system for the current
/// barrier factor and scratch buffers, so a run allocates nothing per step.
pub struct Stepper {
    schedule: BarrierSchedule,
    dt: f64,
    /// i·dt·k/(2dx²) applied to the two neighbors on the right-hand side.
    rhs_off: Complex64,
    /// dt/2·(2k/dx²), the kinetic part of the diagonal's imaginary term.
    diag_kin: f64,
    half_dt: f64,
    /// Unscaled potential at the interior points (equation index = grid − 1).
    v_base: Vec<f64>,
    system: TridiagonalSystem,
    factor: f64,
    rhs: Vec<Complex64>,
    work: Vec<Complex64>,
    out: Vec<Complex64>,
}

impl Stepper {
    /// `dt` may differ from the grid's step (the grid only sizes the arrays).
    pub fn new(state: &WaveFunction, schedule: &BarrierSchedule, mass: f64, dt: f64) -> Self {
        let n = state.grid.n_points;
        let m = n - 2;
        let dx = state.grid.dx();
        let kinetic = 1.0 / (2.0 * mass); // ħ²/2m with ħ = 1
        let alpha = dt * kinetic / (2.0 * dx * dx);
        let (il, ir) = support_indices(&state.grid, schedule);
        let mut v_base = vec![0.0; m];
        for (j, v) in v_base.iter_mut().enumerate() {
            if (il..=ir).contains(&(j + 1)) {
                *v = schedule.v0;
            }
        }
        let off = Complex64::new(0.0, -alpha);
        let mut stepper = Self {
            schedule: *schedule,
            dt,
            rhs_off: Complex64::new(0.0, alpha),
            diag_kin: 2.0 * alpha,
            half_dt: dt / 2.0,
            v_base,
            system: TridiagonalSystem {
                lower: vec![off; m - 1],
                diag: vec![Complex64::default(); m],
                upper: vec![off; m - 1],
            },
            factor: f64::NAN,
            rhs: vec![Complex64::default(); m],
            work: vec![Complex64::default(); m],
            out: vec![Complex64::default(); m],
        };
        stepper.set_factor(1.0);
        stepper
    }

    fn set_factor(&mut self, factor: f64) {
        if factor == self.factor {
            return;
        }
        self.factor = factor;
        for (j, d) in self.system.diag.iter_mut().enumerate() {
            *d = Complex64::new(
                1.0,
                self.diag_kin + self.half_dt * (self.v_base[j] * factor),
            );
        }
    }

    /// Advances `state` by one step, evaluating the barrier at `t_start`.
    /// The endpoints stay exactly zero; `state.t` becomes t_start + dt.
    pub fn advance(&mut self, state: &mut WaveFunction, t_start: f64) -> Result<()> {
        let factor = self.schedule.factor_at(t_start)?;
        self.set_factor(factor);
        let psi = &state.values;
        let n = psi.len();
        for j in 0..n - 2 {
            let i = j + 1;
            // (1 − i·dt/2·(2k/dx² + V))ψ_i + i·dt·k/(2dx²)(ψ_{i−1} + ψ_{i+1}),
            // grouped exactly like the diagonal build so the two Cayley
            // half-operators stay mirror images.
            let diag = Complex64::new(
                1.0,
                -(self.diag_kin + self.half_dt * (self.v_base[j] * factor)),
            );
            self.rhs[j] = diag * psi[i] + self.rhs_off * (psi[i - 1] + psi[i + 1]);
        }
        thomas_into(
            &self.system.lower,
            &self.system.diag,
            &self.system.upper,
            &self.rhs,
            &mut self.work,
            &mut self.out,
        )?;
        state.values[1..n - 1].copy_from_slice(&self.out);
        state.t = t_start + self.dt;
        Ok(())
    }
}

/// One Cayley step with the barrier evaluated at `state.t`. Convenience
/// wrapper over [`Stepper`] for single steps; a run reuses one stepper.
pub fn step(
    state: &mut WaveFunction,
    schedule: &BarrierSchedule,
    mass: f64,
    dt: f64,
) -> Result<()> {
    let t = state.t;
    Stepper::new(state, schedule, mass, dt).advance(state, t)
}

/// Everything one run produces.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub trace: ReflectionTrace,
    pub snapshots: Vec<(f64, WaveFunction)>,
    pub final_state: WaveFunction,
    /// Largest probability seen in the outermost wall-monitor points on
    /// either side, over the whole run.
    pub max_wall_density: f64,
}

/// Runs the configured schedule from t = 0 to total_time, recording
/// (t, |R(t)|², norm) at every step and the default snapshots
/// (t = 0, t_p, final).
pub fn run(config: &SimulationConfig) -> Result<SimulationResult> {
    let snaps = [0.0, config.barrier.t_p, config.total_time()];
    run_with_snapshots(config, &snaps)
}

/// As [`run`], with snapshots at the given times (each resolved to the
/// nearest step).
pub fn run_with_snapshots(
    config: &SimulationConfig,
    snapshot_times: &[f64],
) -> Result<SimulationResult> {
    let violations = config.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidConfig(violations.join("; ")));
    }
    let grid = config.grid;
    let dt = grid.dt;
    let mut state = gaussian_packet(&grid, config.x0, config.sigma0, config.p0)?;
    let mut stepper = Stepper::new(&state, &config.barrier, config.units.mass, dt);

    let mut snap_steps: Vec<usize> = snapshot_times
        .iter()
        .map(|&t| ((t / dt).round().max(0.0) as usize).min(grid.n_steps))
        .collect();
    snap_steps.sort_unstable();
    snap_steps.dedup();

    let n_samples = grid.n_steps + 1;
    let mut trace = ReflectionTrace {
        times: Vec::with_capacity(n_samples),
        r2: Vec::with_capacity(n_samples),
        norm: Vec::with_capacity(n_samples),
        config_tag: config.barrier.tag(),
    };
    let mut snapshots = Vec::with_capacity(snap_steps.len());
    let mut max_wall = 0.0f64;

    let mut record = |state: &WaveFunction, step_idx: usize| -> Result<()> {
        let t = step_idx as f64 * dt;
        trace.times.push(t);
        trace
            .r2
            .push(reflection_probability(state, config.x_prime)?);
        trace.norm.push(state.norm());
        Ok(())
    };

    record(&state, 0)?;
    if snap_steps.contains(&0) {
        snapshots.push((0.0, state.clone()));
    }
    for i in 0..grid.n_steps {
        let t_start = i as f64 * dt;
        stepper
            .advance(&mut state, t_start)
            .map_err(|e| Error::StepFailed {
                step: i,
                source: Box::new(e),
            })?;
        // Keep the time stamp exact from the index; nothing accumulates.
        state.t = (i + 1) as f64 * dt;
        record(&state, i + 1)?;
        if snap_steps.contains(&(i + 1)) {
            snapshots.push((state.t, state.clone()));
        }
        let monitor = WALL_MONITOR_POINTS.min(grid.n_points / 2);
        let dx = grid.dx();
        let left: f64 = state.values[..monitor].iter().map(|v| v.norm_sqr()).sum();
        let right: f64 = state.values[grid.n_points - monitor..]
            .iter()
            .map(|v| v.norm_sqr())
            .sum();
        max_wall = max_wall.max(left * dx).max(right * dx);
    }

    Ok(SimulationResult {
        trace,
        snapshots,
        final_state: state,
        max_wall_density: max_wall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::default_config;
    use crate::potential::RampMode;
    use crate::wavepacket::free_evolution_density;

    fn free_config() -> crate::config::SimulationConfig {
        let mut cfg = default_config();
        cfg.barrier.v0 = 0.0;
        cfg.barrier = cfg.barrier.as_static();
        cfg
    }

    #[test]
    fn tridiagonal_identity() {
        let n = 5;
        let sys = TridiagonalSystem {
            lower: vec![Complex64::default(); n - 1],
            diag: vec![Complex64::new(1.0, 0.0); n],
            upper: vec![Complex64::default(); n - 1],
        };
        let rhs: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, -1.0)).collect();
        let x = solve_tridiagonal(&sys, &rhs).unwrap();
        for (a, b) in x.iter().zip(&rhs) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn tridiagonal_three_by_three() {
        // Dominance-boundary system solved against a dense 3×3 oracle.
        let sys = TridiagonalSystem {
            lower: vec![Complex64::new(1.0, 0.0); 2],
            diag: vec![Complex64::new(2.0, 0.0); 3],
            upper: vec![Complex64::new(1.0, 0.0); 2],
        };
        let rhs = vec![
            Complex64::new(1.0, 0.0),
            Complex64::default(),
            Complex64::default(),
        ];
        let x = solve_tridiagonal(&sys, &rhs).unwrap();
        let expect = [0.75, -0.5, 0.25];
        for (a, e) in x.iter().zip(expect) {
            assert!((a.re - e).abs() < 1e-12 && a.im.abs() < 1e-12, "{a} vs {e}");
        }
    }

    #[test]
    fn tridiagonal_random_dominant_residual() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let n = 100;
        let mut c =
            |scale: f64| Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
        let lower: Vec<_> = (0..n - 1).map(|_| c(1.0)).collect();
        let upper: Vec<_> = (0..n - 1).map(|_| c(1.0)).collect();
        let diag: Vec<_> = (0..n)
            .map(|i| {
                let l = if i > 0 { lower[i - 1].norm() } else { 0.0 };
                let u = if i + 1 < n { upper[i].norm() } else { 0.0 };
                let base = c(1.0);
                base + base / base.norm() * (l + u + 0.5)
            })
            .collect();
        let rhs: Vec<_> = (0..n).map(|_| c(2.0)).collect();
        let sys = TridiagonalSystem { lower, diag, upper };
        assert!(sys.is_diagonally_dominant());
        let x = solve_tridiagonal(&sys, &rhs).unwrap();
        // Residual against a direct matrix-vector product.
        let max_rhs = rhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..n {
            let mut ax = sys.diag[i] * x[i];
            if i > 0 {
                ax += sys.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                ax += sys.upper[i] * x[i + 1];
            }
            assert!(
                (ax - rhs[i]).norm() < 1e-10 * max_rhs,
                "residual at row {i}"
            );
        }
    }

    #[test]
    fn tridiagonal_zero_pivot_is_reported() {
        let sys = TridiagonalSystem {
            lower: vec![Complex64::new(1.0, 0.0)],
            diag: vec![Complex64::default(), Complex64::new(1.0, 0.0)],
            upper: vec![Complex64::new(1.0, 0.0)],
        };
        let rhs = vec![Complex64::new(1.0, 0.0); 2];
        match solve_tridiagonal(&sys, &rhs) {
            Err(Error::NumericalBreakdown(_)) => {}
            other => panic!("expected breakdown, got {other:?}"),
        }
    }

    #[test]
    fn cayley_system_is_diagonally_dominant() {
        let cfg = default_config();
        let wf = gaussian_packet(&cfg.grid, cfg.x0, cfg.sigma0, cfg.p0).unwrap();
        let stepper = Stepper::new(&wf, &cfg.barrier, cfg.units.mass, cfg.grid.dt);
        assert!(stepper.system.is_diagonally_dominant());
    }

    #[test]
    fn step_dt_to_zero_is_identity() {
        let cfg = default_config();
        let wf0 = gaussian_packet(&cfg.grid, cfg.x0, cfg.sigma0, cfg.p0).unwrap();
        let mut wf = wf0.clone();
        step(&mut wf, &cfg.barrier.as_static(), cfg.units.mass, 1e-12).unwrap();
        let max_diff = wf
            .values
            .iter()
            .zip(&wf0.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(max_diff < 1e-6, "max diff {max_diff}");
    }

    #[test]
    fn one_free_step_displaces_peak_by_group_velocity() {
        let cfg = free_config();
        let mut wf = gaussian_packet(&cfg.grid, cfg.x0, cfg.sigma0, cfg.p0).unwrap();
        step(&mut wf, &cfg.barrier, cfg.units.mass, cfg.grid.dt).unwrap();
        let peak = cfg.grid.x(wf.peak_index());
        let expect = cfg.x0 + 2.0 * cfg.p0 * cfg.grid.dt;
        assert!((peak - expect).abs() < cfg.grid.dx(), "peak {peak}");
    }

    #[test]
    fn one_step_norm_drift_is_tiny() {
        let cfg = default_config();
        let mut wf = gaussian_packet(&cfg.grid, cfg.x0, cfg.sigma0, cfg.p0).unwrap();
        let before = wf.norm();
        step(&mut wf, &cfg.barrier, cfg.units.mass, cfg.grid.dt).unwrap();
        assert!((wf.norm() - before).abs() < 1e-12);
    }

    #[test]
    fn free_run_matches_analytic_density() {
        // 400 free steps to t = 8e-4 against the spreading-Gaussian oracle;
        // squared L2 distance of the densities.
        let mut cfg = free_config();
        cfg.grid.n_steps = 400;
        let result = run(&cfg).unwrap();
        let g = cfg.grid;
        let t = g.total_time();
        let mut err = 0.0;
        for i in 0..g.n_points {
            let d = result.final_state.density(i)
                - free_evolution_density(g.x(i), t, cfg.x0, cfg.sigma0, cfg.p0, 0.5);
            let w = if i == 0 || i == g.n_points - 1 {
                0.5
            } else {
                1.0
            };
            err += w * d * d;
        }
        err *= g.dx();
        assert!(err < 1e-3, "squared L2 density error {err}");
    }

    #[test]
    fn free_run_reflection_is_nonincreasing_and_small() {
        let mut cfg = free_config();
        cfg.grid.n_steps = 800;
        let result = run(&cfg).unwrap();
        let r2 = &result.trace.r2;
        assert!(r2.iter().all(|&v| v < 0.02));
        for i in 1..r2.len() {
            assert!(r2[i] <= r2[i - 1] + 1e-9, "rose at sample {i}");
        }
    }

    #[test]
    fn run_records_every_step_and_default_snapshots() {
        let mut cfg = default_config();
        cfg.grid.n_steps = 50;
        cfg.barrier.t_p = 40e-6; // keep the ramp inside the shortened run
        let result = run(&cfg).unwrap();
        assert_eq!(result.trace.times.len(), 51);
        assert_eq!(result.trace.r2.len(), 51);
        assert_eq!(result.snapshots.len(), 3);
        assert_eq!(result.snapshots[0].0, 0.0);
        assert!(result.trace.norm.iter().all(|&n| (n - 1.0).abs() < 1e-10));
    }

    #[test]
    fn perturbed_trace_equals_static_before_the_window() {
        // Identical dynamics up to t_p − ε/2 make the traces bitwise equal
        // there; they must separate afterwards.
        let mut cfg = default_config();
        cfg.grid.n_steps = 520;
        let static_run = run(&crate::config::SimulationConfig {
            barrier: cfg.barrier.as_static(),
            ..cfg
        })
        .unwrap();
        assert_eq!(cfg.barrier.mode, RampMode::RampDown);
        let perturbed = run(&cfg).unwrap();
        let window_start_sample = 399; // (t_p − ε/2)/dt for N = 2
        for i in 0..=window_start_sample {
            assert_eq!(
                static_run.trace.r2[i].to_bits(),
                perturbed.trace.r2[i].to_bits(),
                "diverged at sample {i}"
            );
        }
        let diverged = (window_start_sample + 1..=520)
            .any(|i| static_run.trace.r2[i].to_bits() != perturbed.trace.r2[i].to_bits());
        assert!(diverged, "traces never separated");
    }
}
