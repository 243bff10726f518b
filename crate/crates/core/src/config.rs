//! Run configuration: unit conventions, the spatial/temporal grid, packet and
//! detector parameters, and the flat key=value config-file format.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::potential::{BarrierSchedule, RampMode};

/// Unit conventions. ħ is pinned to 1; the mass is exposed so large-mass /
/// broad-packet limits can be scanned even though the canonical run uses 1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitsNote {
    pub hbar: f64,
    pub mass: f64,
}

impl UnitsNote {
    pub fn new(mass: f64) -> Self {
        Self { hbar: 1.0, mass }
    }

    /// Kinetic prefactor ħ²/2m of the Hamiltonian. Equals 1 for m = 1/2.
    pub fn kinetic_factor(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }
}

impl Default for UnitsNote {
    fn default() -> Self {
        Self::new(0.5)
    }
}

/// Uniform spatial grid with hard-wall endpoints plus the time discretization.
///
/// Coordinates are always recomputed from the index so repeated calls are
/// bit-identical; nothing accumulates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub dt: f64,
    pub n_steps: usize,
}

impl Grid {
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    /// Coordinate of sample `i`: x_min + i·dx.
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    /// Index of the grid point nearest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let raw = ((x - self.x_min) / self.dx()).round();
        (raw.max(0.0) as usize).min(self.n_points - 1)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.n_steps as f64
    }
}

/// All physical and numerical parameters of one run.
#[derive(Debug, Clone, Copy)]
pub struct SimulationConfig {
    pub grid: Grid,
    pub units: UnitsNote,
    /// Initial packet center.
    pub x0: f64,
    /// Packet width: standard deviation of the initial |ψ|².
    pub sigma0: f64,
    /// Carrier momentum.
    pub p0: f64,
    pub barrier: BarrierSchedule,
    /// Right boundary of the reflection region; |R(t)|² integrates over
    /// [x_min, x_prime].
    pub x_prime: f64,
    /// Barrier-to-detector distance used by the locality analysis.
    pub detector_d: f64,
}

/// Mean energy of the initial packet, p0² + 1/(4σ0²).
pub fn packet_energy(p0: f64, sigma0: f64) -> Result<f64> {
    if sigma0 <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "sigma0 must be positive, got {sigma0}"
        )));
    }
    Ok(p0 * p0 + 1.0 / (4.0 * sigma0 * sigma0))
}

impl SimulationConfig {
    pub fn packet_energy(&self) -> Result<f64> {
        packet_energy(self.p0, self.sigma0)
    }

    /// Group velocity of the packet, ⟨p⟩/m = 2·p0 for m = 1/2.
    pub fn group_velocity(&self) -> f64 {
        self.p0 / self.units.mass
    }

    pub fn total_time(&self) -> f64 {
        self.grid.total_time()
    }

    /// Checks every configuration invariant and returns all violations,
    /// not just the first. An empty vector means the config is usable.
    // Negated comparisons are deliberate: a NaN coordinate must land in the
    // violation branch, which `>=` would let through.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        let g = &self.grid;
        if self.units.hbar != 1.0 {
            v.push(format!("hbar must be 1, got {}", self.units.hbar));
        }
        if self.units.mass <= 0.0 {
            v.push(format!("mass must be positive, got {}", self.units.mass));
        }
        if g.x_max <= g.x_min {
            v.push(format!("x_max {} must exceed x_min {}", g.x_max, g.x_min));
        }
        if g.n_points < 3 {
            v.push(format!("n_points must be at least 3, got {}", g.n_points));
        }
        if g.dt <= 0.0 {
            v.push(format!("dt must be positive, got {}", g.dt));
        }
        if g.n_steps == 0 {
            v.push("n_steps must be at least 1".to_string());
        }
        if self.sigma0 <= 0.0 {
            v.push(format!("sigma0 must be positive, got {}", self.sigma0));
        }
        if self.p0 <= 0.0 {
            v.push(format!("p0 must be positive, got {}", self.p0));
        }
        // Geometry must be ordered wall < x' < x0 < barrier < wall.
        let left = self.barrier.left_edge();
        let right = self.barrier.right_edge();
        if !(g.x_min < self.x_prime) {
            v.push(format!(
                "ordering x_min < x_prime violated: {} vs {}",
                g.x_min, self.x_prime
            ));
        }
        if !(self.x_prime < self.x0) {
            v.push(format!(
                "ordering x_prime < x0 violated: {} vs {}",
                self.x_prime, self.x0
            ));
        }
        if !(self.x0 < left) {
            v.push(format!(
                "ordering x0 < barrier left edge violated: {} vs {}",
                self.x0, left
            ));
        }
        if !(left < right) {
            v.push(format!(
                "ordering barrier edges violated: {} vs {}",
                left, right
            ));
        }
        if !(right < g.x_max) {
            v.push(format!(
                "ordering barrier right edge < x_max violated: {} vs {}",
                right, g.x_max
            ));
        }
        if self.sigma0 > 0.0 && g.x_max > g.x_min {
            // Initial density at either wall must be below 1e-12 of the peak.
            let rel = |wall: f64| {
                let d = wall - self.x0;
                (-d * d / (2.0 * self.sigma0 * self.sigma0)).exp()
            };
            if rel(g.x_min) >= 1e-12 {
                v.push(format!(
                    "packet overlaps left wall: relative density {:.2e} ≥ 1e-12",
                    rel(g.x_min)
                ));
            }
            if rel(g.x_max) >= 1e-12 {
                v.push(format!(
                    "packet overlaps right wall: relative density {:.2e} ≥ 1e-12",
                    rel(g.x_max)
                ));
            }
        }
        if g.n_points >= 3 && g.x_max > g.x_min {
            let phase = self.p0 * g.dx();
            if phase >= 0.1 {
                v.push(format!("p0·dx = {phase:.2} ≥ 0.1 rad; grid too coarse"));
            }
        }
        v.extend(self.barrier.validate(g.dt));
        v
    }
}

/// The canonical run: σ0 = 0.05/√2 packet launched from x0 = 1.2 at p0 = 50π
/// against a width-0.064 barrier of height 2E centered at 1.5, switched off
/// around t_p = 8×10⁻⁴ over N = 2 solver steps.
///
/// Box [0, 3] with 6001 points resolves the carrier (p0·dx ≈ 0.079 rad) and
/// keeps both outgoing packets away from the hard walls; 1600 steps of
/// dt = 2×10⁻⁶ let the static reflection probability reach its plateau.
pub fn default_config() -> SimulationConfig {
    let grid = Grid {
        x_min: 0.0,
        x_max: 3.0,
        n_points: 6001,
        dt: 2e-6,
        n_steps: 1600,
    };
    let units = UnitsNote::default();
    let x0 = 1.2;
    let sigma0 = 0.05 / std::f64::consts::SQRT_2;
    let p0 = 50.0 * std::f64::consts::PI;
    let energy = packet_energy(p0, sigma0).expect("default sigma0 is positive");
    let barrier = BarrierSchedule {
        x_c: 1.5,
        width: 0.064,
        v0: 2.0 * energy,
        mode: RampMode::RampDown,
        t_p: 8e-4,
        epsilon: 2.0 * grid.dt,
        ramp_steps: 2,
    };
    let x_prime = x0 - 3.0 * sigma0 / std::f64::consts::SQRT_2;
    SimulationConfig {
        grid,
        units,
        x0,
        sigma0,
        p0,
        barrier,
        x_prime,
        detector_d: barrier.left_edge() - x_prime,
    }
}

/// A parsed config file: the resolved configuration plus which keys the file
/// set explicitly (the CLI needs this to decide whether a detector-distance
/// convention flag should override).
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: SimulationConfig,
    pub explicit_detector_d: bool,
}

const CONFIG_KEYS: [&str; 17] = [
    "x0",
    "sigma0",
    "p0",
    "barrier_center",
    "barrier_width",
    "barrier_height",
    "x_prime",
    "t_p",
    "epsilon",
    "ramp_steps",
    "dt",
    "n_steps",
    "x_min",
    "x_max",
    "n_points",
    "detector_D",
    "mass",
];

/// Parses the flat `key=value` config format. Unknown keys are errors; blank
/// lines and `#` comments are ignored. Values override [`default_config`];
/// `barrier_height` accepts the literal `2E` and `x_prime` the literal `auto`,
/// both resolved against the packet parameters after all overrides apply.
pub fn parse_config(text: &str, origin: &str) -> Result<LoadedConfig> {
    let mut raw: HashMap<&str, (usize, &str)> = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(Error::ConfigParse {
                path: origin.to_string(),
                line: lineno,
                msg: format!("expected key=value, got {trimmed:?}"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if !CONFIG_KEYS.contains(&key) {
            return Err(Error::ConfigParse {
                path: origin.to_string(),
                line: lineno,
                msg: format!("unknown key {key:?}"),
            });
        }
        if raw.insert(key, (lineno, value)).is_some() {
            return Err(Error::ConfigParse {
                path: origin.to_string(),
                line: lineno,
                msg: format!("duplicate key {key:?}"),
            });
        }
    }

    let parse_f64 = |key: &str| -> Result<Option<f64>> {
        match raw.get(key) {
            None => Ok(None),
            Some(&(line, value)) => {
                value
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| Error::ConfigParse {
                        path: origin.to_string(),
                        line,
                        msg: format!("{key} must be a number, got {value:?}"),
                    })
            }
        }
    };
    let parse_usize = |key: &str| -> Result<Option<usize>> {
        match raw.get(key) {
            None => Ok(None),
            Some(&(line, value)) => {
                value
                    .parse::<usize>()
                    .map(Some)
                    .map_err(|_| Error::ConfigParse {
                        path: origin.to_string(),
                        line,
                        msg: format!("{key} must be a non-negative integer, got {value:?}"),
                    })
            }
        }
    };

    let mut cfg = default_config();
    if let Some(x) = parse_f64("x_min")? {
        cfg.grid.x_min = x;
    }
    if let Some(x) = parse_f64("x_max")? {
        cfg.grid.x_max = x;
    }
    if let Some(n) = parse_usize("n_points")? {
        cfg.grid.n_points = n;
    }
    if let Some(x) = parse_f64("dt")? {
        cfg.grid.dt = x;
    }
    if let Some(n) = parse_usize("n_steps")? {
        cfg.grid.n_steps = n;
    }
    if let Some(x) = parse_f64("mass")? {
        cfg.units = UnitsNote::new(x);
    }
    if let Some(x) = parse_f64("x0")? {
        cfg.x0 = x;
    }
    if let Some(x) = parse_f64("sigma0")? {
        cfg.sigma0 = x;
    }
    if let Some(x) = parse_f64("p0")? {
        cfg.p0 = x;
    }
    if let Some(x) = parse_f64("barrier_center")? {
        cfg.barrier.x_c = x;
    }
    if let Some(x) = parse_f64("barrier_width")? {
        cfg.barrier.width = x;
    }
    if let Some(x) = parse_f64("t_p")? {
        cfg.barrier.t_p = x;
    }

    // The switch-off span and its step count are tied by epsilon = N·dt; a
    // file may give either one and the other is derived. Giving both is
    // accepted and checked for consistency by validate().
    match (raw.contains_key("epsilon"), raw.contains_key("ramp_steps")) {
        (false, false) => {
            cfg.barrier.ramp_steps = 2;
            cfg.barrier.epsilon = 2.0 * cfg.grid.dt;
        }
        (true, false) => {
            let eps = parse_f64("epsilon")?.unwrap();
            let (line, _) = raw["epsilon"];
            let steps = (eps / cfg.grid.dt).round();
            if eps <= 0.0 || steps < 1.0 {
                return Err(Error::ConfigParse {
                    path: origin.to_string(),
                    line,
                    msg: format!("epsilon {eps} must cover at least one dt = {}", cfg.grid.dt),
                });
            }
            cfg.barrier.epsilon = eps;
            cfg.barrier.ramp_steps = steps as usize;
        }
        (false, true) => {
            let n = parse_usize("ramp_steps")?.unwrap();
            cfg.barrier.ramp_steps = n;
            cfg.barrier.epsilon = n as f64 * cfg.grid.dt;
        }
        (true, true) => {
            cfg.barrier.epsilon = parse_f64("epsilon")?.unwrap();
            cfg.barrier.ramp_steps = parse_usize("ramp_steps")?.unwrap();
        }
    }

    match raw.get("barrier_height") {
        None | Some(&(_, "2E")) => {
            cfg.barrier.v0 = 2.0 * packet_energy(cfg.p0, cfg.sigma0)?;
        }
        Some(&(line, value)) => {
            cfg.barrier.v0 = value.parse::<f64>().map_err(|_| Error::ConfigParse {
                path: origin.to_string(),
                line,
                msg: format!("barrier_height must be a number or the literal 2E, got {value:?}"),
            })?;
        }
    }

    match raw.get("x_prime") {
        None | Some(&(_, "auto")) => {
            cfg.x_prime = cfg.x0 - 3.0 * cfg.sigma0 / std::f64::consts::SQRT_2;
        }
        Some(&(line, value)) => {
            cfg.x_prime = value.parse::<f64>().map_err(|_| Error::ConfigParse {
                path: origin.to_string(),
                line,
                msg: format!("x_prime must be a number or the literal auto, got {value:?}"),
            })?;
        }
    }

    let explicit_detector_d = raw.contains_key("detector_D");
    cfg.detector_d = match parse_f64("detector_D")? {
        Some(x) => x,
        None => cfg.barrier.left_edge() - cfg.x_prime,
    };

    Ok(LoadedConfig {
        config: cfg,
        explicit_detector_d,
    })
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigParse {
        path: path.display().to_string(),
        line: 0,
        msg: if e.kind() == std::io::ErrorKind::NotFound {
            "config not found".to_string()
        } else {
            e.to_string()
        },
    })?;
    parse_config(&text, &path.display().to_string())
}
