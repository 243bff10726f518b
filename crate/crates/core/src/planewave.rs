//! Stationary-scattering oracle: closed-form plane-wave reflection off a
//! rectangular barrier and the momentum-space reflection quadrature. Units
//! give a plane wave of momentum p the energy p², so the wavevector inside
//! the barrier is √(p² − V0), imaginary below the barrier top.

use crate::error::{Error, Result};
use crate::potential::BarrierSchedule;
use crate::wavepacket::MomentumSpectrum;

/// Static rectangular barrier as seen by a plane wave.
#[derive(Debug, Clone, Copy)]
pub struct BarrierSpec {
    pub v0: f64,
    pub width: f64,
}

impl BarrierSpec {
    pub fn from_schedule(schedule: &BarrierSchedule) -> Self {
        Self {
            v0: schedule.v0,
            width: schedule.width,
        }
    }
}

/// sin(√z)/√z continued through z ≤ 0, where it equals sinh(√−z)/√−z.
/// Both branches are the entire function Σ (−z)^k/(2k+1)!; the series takes
/// over near z = 0 so the barrier-top crossing stays smooth.
fn sinc_like(z: f64) -> f64 {
    if z.abs() < 1e-6 {
        1.0 - z / 6.0 + z * z / 120.0
    } else if z > 0.0 {
        let r = z.sqrt();
        r.sin() / r
    } else {
        let r = (-z).sqrt();
        r.sinh() / r
    }
}

/// Reflection probability |R(p)|² of the plane wave exp(ipx):
/// V0²·S² / (4p² + V0²·S²) with S = sin(q·w)/q and q = √(p² − V0),
/// valid above, below, and at the barrier top.
pub fn plane_wave_reflection(p: f64, spec: &BarrierSpec) -> Result<f64> {
    if p <= 0.0 {
        return Err(Error::Domain(format!("momentum must be positive, got {p}")));
    }
    let u = p * p - spec.v0;
    let s = spec.width * sinc_like(u * spec.width * spec.width);
    let num = spec.v0 * spec.v0 * s * s;
    if !num.is_finite() {
        // Deep-tunneling overflow of sinh: total reflection.
        return Ok(1.0);
    }
    Ok(num / (4.0 * p * p + num))
}

/// ∫|φ(p)|²·|R(p)|²dp over the spectrum window by the trapezoidal rule on
/// the spectrum's own grid. Non-positive momenta never meet the barrier and
/// contribute zero. The result is clamped to [0, 1].
pub fn momentum_integrated_reflection(spectrum: &MomentumSpectrum, spec: &BarrierSpec) -> f64 {
    let n = spectrum.p_values.len();
    let mut sum = 0.0;
    for (i, (&p, a)) in spectrum
        .p_values
        .iter()
        .zip(&spectrum.amplitudes)
        .enumerate()
    {
        if p <= 0.0 {
            continue;
        }
        let r2 = plane_wave_reflection(p, spec).expect("p > 0 checked");
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        sum += w * a.norm_sqr() * r2;
    }
    (sum * spectrum.dp).clamp(0.0, 1.0)
}
