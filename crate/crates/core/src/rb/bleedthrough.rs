//! Sequence execution with a frequency-control step between elements, the
//! step delivered through the configured control line.
//!
//! Each random Clifford is followed by a square detuning step on the same
//! qubit.  The delivered waveform is the ideal schedule pushed through the
//! software predistortion (if configured) and the physical line response, so
//! settling tails bleed into the following gates: microwave pulses are
//! integrated with the instantaneous residual detune on top of the drive,
//! and each step slot contributes its exact accumulated phase plus a static
//! virtual-Z correction.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use super::executor::{phase_kick, SequenceExecutor};
use super::{RbError, RbMode};
use crate::clifford::{enumerate_group, CliffordGroup, Gate, RbSequence, SqGate};
use crate::device::integrator::propagate;
use crate::device::levels;
use crate::device::xy::{drive_hamiltonian, pulse_for_gate};
use crate::device::zline::line_transmit;
use crate::device::{
    ground_report_probability, sample_fraction, DeviceError, DeviceModel, LineResponse,
    SpamParams, StepPulseParams, TransmonParams, XyPulseParams,
};

fn grid_count(name: &'static str, value: f64, dt: f64) -> Result<usize, RbError> {
    let n = (value / dt).round();
    if n < 1.0 || (value - n * dt).abs() > 1e-9 {
        return Err(DeviceError::InvalidParameter(format!(
            "{name} = {value} ns must be a positive multiple of the {dt} ns timestep"
        ))
        .into());
    }
    Ok(n as usize)
}

/// In-slot phase of the final step in a repeating idle-then-step train, once
/// the line's settling transient has (mostly) rung down.  Its negative is
/// the static virtual-Z correction that cancels the average step phase when
/// the correction is tuned against a repeating calibration pattern.
pub fn steady_state_step_phase(
    step: &StepPulseParams,
    gap: f64,
    periods: usize,
    dt: f64,
    forward: Option<&LineResponse>,
    correction: Option<&LineResponse>,
) -> Result<f64, RbError> {
    let gap_n = grid_count("gap", gap, dt)?;
    let step_n = grid_count("step duration", step.duration, dt)?;
    let periods = periods.max(1);
    let period_n = gap_n + step_n;
    let mut ideal = vec![0.0; period_n * periods];
    for k in 0..periods {
        let start = k * period_n + gap_n;
        ideal[start..start + step_n].fill(step.detuning);
    }
    let w = line_transmit(&ideal, dt, forward, correction);
    let last = (periods - 1) * period_n + gap_n;
    Ok(-2.0 * PI * dt * w[last..last + step_n].iter().sum::<f64>())
}

/// Plays single-qubit sequences with a detuning step delivered through the
/// control line after every element except the recovery.  The ideal step
/// with its phase correction is the identity, so the plain recovery element
/// still closes the word.
pub struct StepInterleavedExecutor {
    group: &'static CliffordGroup,
    qubit: TransmonParams,
    x2: XyPulseParams,
    step: StepPulseParams,
    phase_correction: f64,
    forward: Option<LineResponse>,
    correction: Option<LineResponse>,
    spam: SpamParams,
    timestep: f64,
    gate_n: usize,
    step_n: usize,
}

impl StepInterleavedExecutor {
    /// Build with an explicit static phase correction per step slot.
    pub fn new(
        device: &DeviceModel,
        qubit: usize,
        step: StepPulseParams,
        phase_correction: f64,
    ) -> Result<Self, RbError> {
        device.validate()?;
        if qubit >= device.n_qubits() {
            return Err(DeviceError::InvalidParameter(format!(
                "qubit {qubit} out of range for a {}-qubit device",
                device.n_qubits()
            ))
            .into());
        }
        step.validate()?;
        let gate_n = grid_count("gate length", device.x2[qubit].gate_length, device.timestep)?;
        let step_n = grid_count("step duration", step.duration, device.timestep)?;
        Ok(Self {
            group: enumerate_group(1),
            qubit: device.qubits[qubit],
            x2: device.x2[qubit],
            step,
            phase_correction,
            forward: device.zline_forward.clone(),
            correction: device.zline_correction.clone(),
            spam: device.spam,
            timestep: device.timestep,
            gate_n,
            step_n,
        })
    }

    /// Build with the phase correction calibrated against a repeating
    /// mean-duration train on the device's own line, the way a static
    /// correction is tuned in practice.
    pub fn calibrated(
        device: &DeviceModel,
        qubit: usize,
        step: StepPulseParams,
    ) -> Result<Self, RbError> {
        let group = enumerate_group(1);
        let slots = group.mean_sq_gate_count();
        let gap = slots * device.x2.first().map_or(0.0, |p| p.gate_length);
        let phi = steady_state_step_phase(
            &step,
            gap,
            20,
            device.timestep,
            device.zline_forward.as_ref(),
            device.zline_correction.as_ref(),
        )?;
        Self::new(device, qubit, step, -phi)
    }

    pub fn phase_correction(&self) -> f64 {
        self.phase_correction
    }

    // Propagator of one gate played while the control line delivers the
    // residual detune w (GHz, one sample per timestep, absolute indexing).
    fn gate_under_detune(&self, gate: SqGate, w: &[f64], start: usize) -> Array2<C64> {
        let (pulse, phase) = pulse_for_gate(&self.x2, gate);
        let dt = self.timestep;
        let t0 = start as f64 * dt;
        let h = |t: f64| {
            let j = ((t / dt).floor() as usize).min(w.len() - 1);
            let det = 2.0 * PI * w[j];
            let mut h = drive_hamiltonian(&self.qubit, &pulse, phase, t - t0);
            h[[1, 1]] += C64::new(det, 0.0);
            h[[2, 2]] += C64::new(2.0 * det, 0.0);
            h
        };
        propagate(&h, t0, pulse.gate_length, dt)
    }
}

impl SequenceExecutor for StepInterleavedExecutor {
    fn group(&self) -> &'static CliffordGroup {
        self.group
    }

    fn mode(&self) -> RbMode {
        RbMode::Interleaved {
            gate: "z-step".into(),
        }
    }

    fn sequence_fidelity(
        &self,
        seq: &RbSequence,
        repetitions: u32,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64, RbError> {
        let order = seq.played_order();
        let counts: Vec<usize> = order
            .iter()
            .map(|&e| self.group.element(e).decomposition.len())
            .collect();
        let total_gates: usize = counts.iter().sum();
        let n_steps = order.len().saturating_sub(1);
        let n_samples = total_gates * self.gate_n + n_steps * self.step_n;

        let mut ideal = vec![0.0; n_samples];
        let mut pos = 0usize;
        for (i, &c) in counts.iter().enumerate() {
            pos += c * self.gate_n;
            if i + 1 < counts.len() {
                ideal[pos..pos + self.step_n].fill(self.step.detuning);
                pos += self.step_n;
            }
        }
        let w = line_transmit(
            &ideal,
            self.timestep,
            self.forward.as_ref(),
            self.correction.as_ref(),
        );

        let mut psi = levels::ground();
        let mut pos = 0usize;
        for (i, &e) in order.iter().enumerate() {
            for g in &self.group.element(e).decomposition {
                let Gate::Sq { gate, .. } = g else {
                    unreachable!("single-qubit decompositions hold no entangler")
                };
                psi = self.gate_under_detune(*gate, &w, pos).dot(&psi);
                pos += self.gate_n;
            }
            if i + 1 < order.len() {
                let slot_phase = -2.0
                    * PI
                    * self.timestep
                    * w[pos..pos + self.step_n].iter().sum::<f64>();
                phase_kick(&mut psi, slot_phase + self.phase_correction);
                pos += self.step_n;
            }
        }
        let p = ground_report_probability(&psi, &self.spam)?;
        Ok(sample_fraction(p, repetitions, rng))
    }
}
