//! Classical microwave crosstalk: an aggressor drive leaking onto the
//! victim qubit's control line.
//!
//! The aggressor plays its own back-to-back cosine pulses on its own clock,
//! so its envelope and carrier phase depend on absolute time, not on where
//! the victim is in its sequence.  Coherent addition over a sequence is what
//! produces the sharp frequency ridges, so nothing here may be cached per
//! gate.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use super::integrator::propagate;
use super::levels;
use super::params::{CrosstalkConfig, DeviceError, TransmonParams, XyPulseParams};
use super::xy::{drive_hamiltonian, pulse_for_gate};
use crate::clifford::{CliffordElement, Gate};

/// Aggressor drive envelope (GHz) at absolute time t: repeating cosine
/// pulses of the aggressor's gate length.
pub fn aggressor_envelope(ct: &CrosstalkConfig, t_abs: f64) -> f64 {
    let u = t_abs.rem_euclid(ct.gate_length) / ct.gate_length;
    ct.amplitude / 2.0 * (1.0 - (2.0 * PI * u).cos())
}

/// Aggressor contribution to the victim Hamiltonian in the victim's carrier
/// frame at absolute time t.
pub fn aggressor_hamiltonian(
    qubit: &TransmonParams,
    victim_carrier: f64,
    ct: &CrosstalkConfig,
    t_abs: f64,
) -> Array2<C64> {
    // Aggressor carrier sits at victim f10 + detuning; in the victim frame
    // it precesses at the offset from the victim carrier.
    let offset = qubit.f10 + ct.detuning - victim_carrier;
    let lam = C64::from_polar(
        ct.relative_coupling * aggressor_envelope(ct, t_abs),
        -2.0 * PI * offset * t_abs,
    );
    let b = levels::lowering();
    &b * (lam.conj() * PI) + &b.t().map(|z| z.conj()) * (lam * PI)
}

/// Propagator for one victim pulse starting at absolute time `t_start`,
/// with the aggressor running.
pub fn crosstalk_xy_unitary(
    qubit: &TransmonParams,
    pulse: &XyPulseParams,
    phase: f64,
    ct: &CrosstalkConfig,
    t_start: f64,
    max_dt: f64,
) -> Array2<C64> {
    let h = |t_abs: f64| {
        drive_hamiltonian(qubit, pulse, phase, t_abs - t_start)
            + aggressor_hamiltonian(qubit, pulse.drive_frequency, ct, t_abs)
    };
    propagate(&h, t_start, pulse.gate_length, max_dt)
}

/// Evolve the victim through one Clifford element under crosstalk.  Each
/// single-qubit gate of the decomposition occupies one pulse slot; returns
/// the state and the absolute time after the element.
pub fn apply_crosstalk_clifford(
    state: &Array1<C64>,
    clifford: &CliffordElement,
    ct: &CrosstalkConfig,
    qubit: &TransmonParams,
    x2: &XyPulseParams,
    t_start: f64,
    max_dt: f64,
) -> Result<(Array1<C64>, f64), DeviceError> {
    if state.len() != levels::DIM {
        return Err(DeviceError::DimensionMismatch {
            got: state.len(),
            want: levels::DIM,
        });
    }
    let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(DeviceError::NotNormalized(norm));
    }
    let mut psi = state.clone();
    let mut t = t_start;
    for gate in &clifford.decomposition {
        let sq = match gate {
            Gate::Sq { gate, .. } => *gate,
            Gate::Cz => {
                return Err(DeviceError::InvalidParameter(
                    "crosstalk model covers single-qubit elements only".into(),
                ))
            }
        };
        let (pulse, phase) = pulse_for_gate(x2, sq);
        psi = crosstalk_xy_unitary(qubit, &pulse, phase, ct, t, max_dt).dot(&psi);
        t += x2.gate_length;
    }
    Ok((psi, t))
}

/// Victim idle window under crosstalk (ground-state hold between sequences
/// or during a dead slot).
pub fn crosstalk_idle_unitary(
    qubit: &TransmonParams,
    victim_carrier: f64,
    ct: &CrosstalkConfig,
    t_start: f64,
    duration: f64,
    max_dt: f64,
) -> Array2<C64> {
    let idle = XyPulseParams {
        amplitude: 0.0,
        drive_frequency: victim_carrier,
        drag_coefficient: 0.0,
        gate_length: duration.max(1e-9),
    };
    crosstalk_xy_unitary(qubit, &idle, 0.0, ct, t_start, max_dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::enumerate_group;
    use crate::linalg::{max_abs_diff, unitarity_defect};

    fn qubit() -> TransmonParams {
        TransmonParams {
            f10: 5.0,
            anharmonicity: -0.22,
        }
    }

    fn x2() -> XyPulseParams {
        XyPulseParams {
            amplitude: 0.05,
            drive_frequency: 5.0,
            drag_coefficient: 0.5,
            gate_length: 10.0,
        }
    }

    #[test]
    fn envelope_repeats_on_the_aggressor_clock() {
        let ct = CrosstalkConfig::with_fixed_area(1.0, 17.0, 0.1, 0.05);
        for t in [0.3, 5.0, 12.9] {
            assert!((aggressor_envelope(&ct, t) - aggressor_envelope(&ct, t + 17.0)).abs() < 1e-12);
            assert!((aggressor_envelope(&ct, t) - aggressor_envelope(&ct, t + 51.0)).abs() < 1e-12);
        }
        assert!(aggressor_envelope(&ct, 0.0).abs() < 1e-12);
    }

    #[test]
    fn zero_coupling_reduces_to_the_clean_pulse() {
        let ct = CrosstalkConfig::with_fixed_area(1.0, 10.0, 0.0, 0.0);
        let clean = super::super::xy::xy_unitary(&qubit(), &x2(), 0.0, 0.05);
        let with_ct = crosstalk_xy_unitary(&qubit(), &x2(), 0.0, &ct, 120.0, 0.05);
        assert!(max_abs_diff(&clean, &with_ct) < 1e-12);
    }

    #[test]
    fn resonant_aggressor_perturbs_far_detuned_does_not() {
        let on = CrosstalkConfig::with_fixed_area(1.0, 10.0, 0.0, 0.05);
        let off = CrosstalkConfig::with_fixed_area(1.0, 10.0, 3.0, 0.05);
        let clean = super::super::xy::xy_unitary(&qubit(), &x2(), 0.0, 0.05);
        let u_on = crosstalk_xy_unitary(&qubit(), &x2(), 0.0, &on, 0.0, 0.05);
        let u_off = crosstalk_xy_unitary(&qubit(), &x2(), 0.0, &off, 0.0, 0.02);
        let d_on = max_abs_diff(&clean, &u_on);
        let d_off = max_abs_diff(&clean, &u_off);
        assert!(d_on > 20.0 * d_off, "on {d_on}, off {d_off}");
    }

    #[test]
    fn clifford_application_advances_the_clock_per_pulse() {
        let group = enumerate_group(1);
        let ct = CrosstalkConfig::with_fixed_area(1.0, 10.0, 0.1, 0.01);
        let psi = levels::ground();
        // Element with a two-pulse decomposition.
        let elem = group
            .elements()
            .iter()
            .find(|e| e.decomposition.len() == 2)
            .unwrap();
        let (out, t_end) =
            apply_crosstalk_clifford(&psi, elem, &ct, &qubit(), &x2(), 40.0, 0.05).unwrap();
        assert!((t_end - 60.0).abs() < 1e-12);
        let n: f64 = out.iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-10);
    }

    #[test]
    fn idle_under_crosstalk_stays_unitary() {
        let ct = CrosstalkConfig::with_fixed_area(1.0, 10.0, -0.22, 0.05);
        let u = crosstalk_idle_unitary(&qubit(), 5.0, &ct, 37.0, 25.0, 0.05);
        assert!(unitarity_defect(&u) < 1e-11);
    }
}
