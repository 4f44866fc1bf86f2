//! Frequency-control line: pole distortion, exact predistortion, and the
//! phase a detuning pulse imprints on a qubit.
//!
//! Waveforms are zero-order-hold samples on a uniform grid: sample j holds on
//! [j dt, (j+1) dt) and the line is relaxed before the first sample.  A unit
//! step through the line becomes Θ'(t) = 1 + Σ a_i exp(-γ_i t), which is
//! exact for such inputs, so the recursive filter below carries no
//! discretization error of its own.

use ndarray::Array1;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use super::params::{DeviceError, LineResponse, LineRole, StepPulseParams};

impl LineResponse {
    /// Run samples through this response: `Forward` applies the physical
    /// distortion, `Inverse` the exact algebraic inverse of the `Forward`
    /// filter with the same poles, so the two cancel identically at the
    /// sample points.
    pub fn apply(&self, samples: &[f64], dt: f64) -> Vec<f64> {
        match self.role {
            LineRole::Forward => self.apply_forward(samples, dt),
            LineRole::Inverse => self.apply_inverse(samples, dt),
        }
    }

    fn apply_forward(&self, x: &[f64], dt: f64) -> Vec<f64> {
        let decay: Vec<f64> = self.poles.iter().map(|&(_, g)| (-g * dt).exp()).collect();
        let mut u = vec![0.0; self.poles.len()];
        let mut prev = 0.0;
        let mut y = Vec::with_capacity(x.len());
        for &xj in x {
            let dx = xj - prev;
            prev = xj;
            let mut yj = xj;
            for (i, &(a, _)) in self.poles.iter().enumerate() {
                u[i] = decay[i] * u[i] + dx;
                yj += a * u[i];
            }
            y.push(yj);
        }
        y
    }

    fn apply_inverse(&self, x: &[f64], dt: f64) -> Vec<f64> {
        let decay: Vec<f64> = self.poles.iter().map(|&(_, g)| (-g * dt).exp()).collect();
        let a_sum: f64 = self.poles.iter().map(|&(a, _)| a).sum();
        // 1 + Σ a_i is the instantaneous step gain of the forward filter;
        // inverting requires it nonzero.
        assert!(
            (1.0 + a_sum).abs() > 1e-9,
            "line response is not invertible"
        );
        let mut u = vec![0.0; self.poles.len()];
        let mut prev = 0.0;
        let mut y = Vec::with_capacity(x.len());
        for &xj in x {
            let mut rhs = xj + a_sum * prev;
            for (i, &(a, _)) in self.poles.iter().enumerate() {
                rhs -= a * decay[i] * u[i];
            }
            let yj = rhs / (1.0 + a_sum);
            for (i, d) in decay.iter().enumerate() {
                u[i] = d * u[i] + (yj - prev);
            }
            prev = yj;
            y.push(yj);
        }
        y
    }
}

/// Distort an ideal waveform through a line response.
pub fn distort_step(ideal: &[f64], dt: f64, response: &LineResponse) -> Vec<f64> {
    response.apply(ideal, dt)
}

/// Waveform as delivered to the qubit: software predistortion first (if
/// configured), then the physical line.
pub fn line_transmit(
    ideal: &[f64],
    dt: f64,
    forward: Option<&LineResponse>,
    correction: Option<&LineResponse>,
) -> Vec<f64> {
    let mut w = ideal.to_vec();
    if let Some(c) = correction {
        w = c.apply(&w, dt);
    }
    if let Some(f) = forward {
        w = f.apply(&w, dt);
    }
    w
}

/// Ideal square-step detuning waveform over `total` ns.
pub fn ideal_step(step: &StepPulseParams, dt: f64, total: f64) -> Vec<f64> {
    let n = (total / dt).round().max(1.0) as usize;
    (0..n)
        .map(|j| {
            if (j as f64 + 0.5) * dt < step.duration {
                step.detuning
            } else {
                0.0
            }
        })
        .collect()
}

/// Detuning delivered to the qubit over the step window plus its observation
/// window.
pub fn step_waveform(
    step: &StepPulseParams,
    dt: f64,
    forward: Option<&LineResponse>,
    correction: Option<&LineResponse>,
) -> Vec<f64> {
    let total = step.duration + step.observation_window;
    line_transmit(&ideal_step(step, dt, total), dt, forward, correction)
}

/// Phase accumulated on |1> up to each sample boundary: φ[k] = -2π Σ_{j<k} w_j dt.
/// The returned vector has one more entry than the waveform; the last is the
/// total phase.
pub fn cumulative_phase(waveform: &[f64], dt: f64) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(waveform.len() + 1);
    out.push(0.0);
    for &w in waveform {
        acc -= 2.0 * PI * w * dt;
        out.push(acc);
    }
    out
}

/// Total |1> phase of a step pulse after its observation window.
pub fn step_total_phase(
    step: &StepPulseParams,
    dt: f64,
    forward: Option<&LineResponse>,
    correction: Option<&LineResponse>,
) -> f64 {
    let w = step_waveform(step, dt, forward, correction);
    *cumulative_phase(&w, dt).last().unwrap()
}

/// Evolve a three-level state through a detuning step: |1> acquires the
/// accumulated phase and |2> twice that (the control line shifts all level
/// spacings together).
pub fn apply_step_detune(
    state: &Array1<C64>,
    step: &StepPulseParams,
    dt: f64,
    forward: Option<&LineResponse>,
    correction: Option<&LineResponse>,
) -> Result<Array1<C64>, DeviceError> {
    if state.len() != 3 {
        return Err(DeviceError::DimensionMismatch {
            got: state.len(),
            want: 3,
        });
    }
    let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(DeviceError::NotNormalized(norm));
    }
    let phi = step_total_phase(step, dt, forward, correction);
    let mut out = state.clone();
    out[1] *= C64::from_polar(1.0, phi);
    out[2] *= C64::from_polar(1.0, 2.0 * phi);
    Ok(out)
}

fn wrap_to_pi(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Ramsey-style probe of the phase error after a step: prepare |+>, let the
/// delivered waveform act until each probe time, and read the equatorial
/// angle against the same probe on the undistorted step.  Each deviation is
/// a tomography reading, so it comes back wrapped to (-π, π].
pub fn probe_phase_trace(
    step: &StepPulseParams,
    times: &[f64],
    dt: f64,
    forward: Option<&LineResponse>,
    correction: Option<&LineResponse>,
) -> Vec<f64> {
    let t_max = times.iter().cloned().fold(0.0f64, f64::max);
    let total = (step.duration + step.observation_window).max(t_max + dt);
    let actual = line_transmit(&ideal_step(step, dt, total), dt, forward, correction);
    let ideal = ideal_step(step, dt, total);
    let phi_a = cumulative_phase(&actual, dt);
    let phi_i = cumulative_phase(&ideal, dt);
    times
        .iter()
        .map(|&t| {
            let k = ((t / dt).round() as usize).min(actual.len());
            wrap_to_pi(phi_a[k] - phi_i[k])
        })
        .collect()
}
