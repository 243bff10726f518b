//! Comparison of a static-barrier trace with its switched-off counterpart:
//! deviation onset t_d, crossing t_c, the enhancement measure η over the
//! window between them, and the effect-propagation speed relative to the
//! group velocity with its locality verdict.

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::observables::ReflectionTrace;
use crate::potential::RampMode;

/// Default onset threshold on |r2_p − r2_s|: well above solver noise
/// (≤1e-8) and small against the transient's full size (~1e-2).
pub const DEFAULT_DEVIATION_THRESHOLD: f64 = 1e-3;

/// Derived quantities of one (static, perturbed) trace pair.
#[derive(Debug, Clone)]
pub struct SuperarrivalReport {
    /// Switch-off step count N.
    pub ramp_steps: usize,
    /// Switch-off span ε = N·dt.
    pub epsilon: f64,
    /// Center of the switch-off window.
    pub t_p: f64,
    /// Instant the perturbed trace first deviates from the static one.
    pub t_d: f64,
    /// Instant the two traces cross back.
    pub t_c: f64,
    /// t_c − t_d.
    pub delta_t: f64,
    /// ∫r2 dt of the perturbed trace over [t_d, t_c].
    pub i_p: f64,
    /// Same integral for the static trace.
    pub i_s: f64,
    /// Fractional excess (i_p − i_s)/i_s.
    pub eta: f64,
    /// Latest instant a group-velocity particle picture allows the
    /// perturbation to reach the detector region.
    pub tau: f64,
    /// Speed the switch-off's effect propagated across the packet.
    pub v_e: f64,
    /// Group velocity 2·p0.
    pub v_g: f64,
    /// v_e / v_g.
    pub ratio: f64,
    /// t_d < tau: the deviation arrived before the particle picture allows.
    pub locality_violated: bool,
}

fn check_shared_axis(trace_s: &ReflectionTrace, trace_p: &ReflectionTrace) -> Result<()> {
    if trace_s.len() != trace_p.len()
        || trace_s.is_empty()
        || trace_s.times[0] != trace_p.times[0]
        || trace_s.times[trace_s.len() - 1] != trace_p.times[trace_p.len() - 1]
    {
        return Err(Error::Domain("traces do not share a time axis".to_string()));
    }
    Ok(())
}

/// Smallest t with |r2_p(t) − r2_s(t)| > threshold, linearly interpolated
/// between the bracketing samples.
pub fn detect_deviation(
    trace_s: &ReflectionTrace,
    trace_p: &ReflectionTrace,
    threshold: f64,
) -> Result<f64> {
    check_shared_axis(trace_s, trace_p)?;
    let diff = |i: usize| -> f64 { (trace_p.r2[i] - trace_s.r2[i]).abs() };
    if diff(0) > threshold {
        return Ok(trace_s.times[0]);
    }
    for i in 1..trace_s.len() {
        let d = diff(i);
        if d > threshold {
            let prev = diff(i - 1);
            let frac = (threshold - prev) / (d - prev);
            return Ok(trace_s.times[i - 1] + frac * (trace_s.times[i] - trace_s.times[i - 1]));
        }
    }
    Err(Error::NoDeviation(threshold))
}

/// First t after t_d where r2_p − r2_s changes sign, linearly interpolated.
/// A sample landing exactly on zero counts as the crossing instant.
pub fn detect_crossing(
    trace_s: &ReflectionTrace,
    trace_p: &ReflectionTrace,
    t_d: f64,
) -> Result<f64> {
    check_shared_axis(trace_s, trace_p)?;
    let n = trace_s.len();
    let start = trace_s.times.partition_point(|&t| t <= t_d);
    let diff = |i: usize| -> f64 { trace_p.r2[i] - trace_s.r2[i] };
    // Side of the deviation: first nonzero difference after t_d.
    let mut dev_idx = None;
    for i in start..n {
        if diff(i) != 0.0 {
            dev_idx = Some(i);
            break;
        }
    }
    let Some(dev_idx) = dev_idx else {
        return Err(Error::NoCrossing(t_d));
    };
    let dev_sign = diff(dev_idx).signum();
    for i in dev_idx + 1..n {
        let b = diff(i);
        if b == 0.0 {
            return Ok(trace_s.times[i]);
        }
        if b.signum() != dev_sign {
            let a = diff(i - 1);
            let frac = a / (a - b);
            return Ok(trace_s.times[i - 1] + frac * (trace_s.times[i] - trace_s.times[i - 1]));
        }
    }
    Err(Error::NoCrossing(t_d))
}

/// Time integrals of both traces over [t_d, t_c] and the fractional excess
/// η = (I_p − I_s)/I_s.
pub fn superarrival_eta(
    trace_s: &ReflectionTrace,
    trace_p: &ReflectionTrace,
    t_d: f64,
    t_c: f64,
) -> Result<(f64, f64, f64)> {
    check_shared_axis(trace_s, trace_p)?;
    if t_d >= t_c {
        return Err(Error::Domain(format!(
            "window start {t_d} is not before its end {t_c}"
        )));
    }
    let i_p = trace_p.integrate_r2(t_d, t_c)?;
    let i_s = trace_s.integrate_r2(t_d, t_c)?;
    if i_s == 0.0 {
        return Err(Error::DegenerateWindow);
    }
    Ok((i_p, i_s, (i_p - i_s) / i_s))
}

/// τ = (t_p − ε/2) + D/v_g: particles reflected before the switch-off began
/// keep arriving at the detector until this instant.
pub fn locality_tau(t_p: f64, epsilon: f64, detector_d: f64, v_g: f64) -> f64 {
    (t_p - epsilon / 2.0) + detector_d / v_g
}

/// v_e = D / (t_d − (t_p − ε/2)): the speed at which the switch-off's
/// effect crossed the detector distance.
pub fn effect_velocity(detector_d: f64, t_d: f64, t_p: f64, epsilon: f64) -> Result<f64> {
    let start = t_p - epsilon / 2.0;
    let delay = t_d - start;
    if delay <= 0.0 {
        return Err(Error::AcausalInput { t_d, start });
    }
    Ok(detector_d / delay)
}

/// Composes the full report for a (static, perturbed) pair. The config must
/// be the perturbed run's (ramp-down schedule, detector distance, packet).
pub fn build_report(
    trace_s: &ReflectionTrace,
    trace_p: &ReflectionTrace,
    config: &SimulationConfig,
    threshold: f64,
) -> Result<SuperarrivalReport> {
    if config.barrier.mode != RampMode::RampDown {
        return Err(Error::InvalidSchedule(
            "report requires a ramp-down schedule".to_string(),
        ));
    }
    let sched = &config.barrier;
    let t_d = detect_deviation(trace_s, trace_p, threshold)?;
    let t_c = detect_crossing(trace_s, trace_p, t_d)?;
    let (i_p, i_s, eta) = superarrival_eta(trace_s, trace_p, t_d, t_c)?;
    let v_g = config.group_velocity();
    let tau = locality_tau(sched.t_p, sched.epsilon, config.detector_d, v_g);
    let v_e = effect_velocity(config.detector_d, t_d, sched.t_p, sched.epsilon)?;
    Ok(SuperarrivalReport {
        ramp_steps: sched.ramp_steps,
        epsilon: sched.epsilon,
        t_p: sched.t_p,
        t_d,
        t_c,
        delta_t: t_c - t_d,
        i_p,
        i_s,
        eta,
        tau,
        v_e,
        v_g,
        ratio: v_e / v_g,
        locality_violated: t_d < tau,
    })
}
