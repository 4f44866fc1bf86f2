//! Microwave drive on one transmon, in the frame rotating at the drive
//! carrier.
//!
//! The envelope is E_x(t) = (A/2)(1 - cos 2πt/t_g) with the derivative
//! quadrature E_y(t) = α Ė_x(t) / (2πΔ) suppressing leakage to |2>.  On
//! resonance the pulse area gives a rotation by 2π A t_g / 2 about an
//! equatorial axis selected by the drive phase.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use super::integrator::propagate;
use super::levels;
use super::params::{DeviceError, TransmonParams, XyPulseParams};
use crate::clifford::SqGate;

/// In-phase and quadrature envelope amplitudes in GHz at time t into the
/// pulse.
pub fn envelope(pulse: &XyPulseParams, anharmonicity: f64, t: f64) -> (f64, f64) {
    let tg = pulse.gate_length;
    if !(0.0..=tg).contains(&t) {
        return (0.0, 0.0);
    }
    let ex = pulse.amplitude / 2.0 * (1.0 - (2.0 * PI * t / tg).cos());
    let dex = pulse.amplitude / 2.0 * (2.0 * PI / tg) * (2.0 * PI * t / tg).sin();
    let ey = pulse.drag_coefficient * dex / (2.0 * PI * anharmonicity);
    (ex, ey)
}

/// Rotating-frame Hamiltonian (angular units, 1/ns) at time t into the
/// pulse, for a drive of the given carrier phase.
pub fn drive_hamiltonian(
    qubit: &TransmonParams,
    pulse: &XyPulseParams,
    phase: f64,
    t: f64,
) -> Array2<C64> {
    let delta = 2.0 * PI * (qubit.f10 - pulse.drive_frequency);
    let anh = 2.0 * PI * qubit.anharmonicity;
    let mut h = levels::diag([0.0, delta, 2.0 * delta + anh]);
    let (ex, ey) = envelope(pulse, qubit.anharmonicity, t);
    let lam = C64::new(ex, ey) * C64::from_polar(1.0, phase);
    let b = levels::lowering();
    h = h + &b * (lam.conj() * PI) + &b.t().map(|z| z.conj()) * (lam * PI);
    h
}

/// Propagator of one pulse on one transmon, 3x3.
pub fn xy_unitary(
    qubit: &TransmonParams,
    pulse: &XyPulseParams,
    phase: f64,
    max_dt: f64,
) -> Array2<C64> {
    let h = |t: f64| drive_hamiltonian(qubit, pulse, phase, t);
    propagate(&h, 0.0, pulse.gate_length, max_dt)
}

/// Evolve a normalized three-level state through one pulse (in-phase drive).
pub fn evolve_xy_pulse(
    state: &Array1<C64>,
    qubit: &TransmonParams,
    pulse: &XyPulseParams,
    max_dt: f64,
) -> Result<Array1<C64>, DeviceError> {
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
    Ok(xy_unitary(qubit, pulse, 0.0, max_dt).dot(state))
}

/// Amplitude scale and carrier phase realizing each single-qubit gate from
/// the calibrated π/2 pulse: full rotations double the amplitude at the same
/// length, Y-axis gates shift the carrier phase by π/2, and the identity
/// idles for one gate length.
pub fn gate_drive(gate: SqGate) -> (f64, f64) {
    let scale = match gate {
        SqGate::I => 0.0,
        SqGate::XHalf | SqGate::YHalf => 1.0,
        SqGate::XNegHalf | SqGate::YNegHalf => -1.0,
        SqGate::X | SqGate::Y => 2.0,
    };
    let phase = if gate.is_y_axis() { PI / 2.0 } else { 0.0 };
    (scale, phase)
}

/// Pulse parameters and carrier phase realizing `gate` given the calibrated
/// π/2 pulse.
pub fn pulse_for_gate(x2: &XyPulseParams, gate: SqGate) -> (XyPulseParams, f64) {
    let (scale, phase) = gate_drive(gate);
    let mut p = *x2;
    p.amplitude *= scale;
    (p, phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dist_up_to_phase, unitarity_defect};

    fn qubit() -> TransmonParams {
        TransmonParams {
            f10: 5.0,
            anharmonicity: -0.22,
        }
    }

    fn x2_pulse(amplitude: f64, drag: f64) -> XyPulseParams {
        XyPulseParams {
            amplitude,
            drive_frequency: 5.0,
            drag_coefficient: drag,
            gate_length: 10.0,
        }
    }

    #[test]
    fn resonant_pulse_area_sets_rotation_angle() {
        // A = 1/(2 t_g) integrates to a π/2 rotation: half the population
        // transfers.  Phase errors from the |2> repulsion don't enter the
        // transfer probability at this order.
        let u = xy_unitary(&qubit(), &x2_pulse(0.05, 0.0), 0.0, 0.05);
        let p10 = u[[1, 0]].norm_sqr();
        assert!((p10 - 0.5).abs() < 0.02, "transfer {p10}");
        // Double the amplitude: a full π rotation.  Without the quadrature
        // correction the stronger pulse loses a few percent to |2>.
        let u = xy_unitary(&qubit(), &x2_pulse(0.10, 0.0), 0.0, 0.05);
        let p10 = u[[1, 0]].norm_sqr();
        assert!(p10 > 0.95, "transfer {p10}");
    }

    #[test]
    fn quadrature_phase_turns_x_into_y() {
        let p = x2_pulse(0.05, 0.0);
        let ux = xy_unitary(&qubit(), &p, 0.0, 0.05);
        let uy = xy_unitary(&qubit(), &p, PI / 2.0, 0.05);
        // Conjugating the drive by a π/2 carrier rotation maps σ_x to σ_y:
        // U_y = R U_x R† with R = diag(1, e^{iπ/2}, e^{iπ}) on the levels.
        let r = Array2::from_diag(&ndarray::Array1::from(vec![
            C64::new(1.0, 0.0),
            C64::from_polar(1.0, PI / 2.0),
            C64::from_polar(1.0, PI),
        ]));
        let conj = r.dot(&ux).dot(&r.map(|z| z.conj()));
        assert!(dist_up_to_phase(&uy, &conj) < 1e-9);
    }

    #[test]
    fn drag_reduces_leakage_out_of_qubit_subspace() {
        // In this sign convention (α divided by the negative anharmonicity)
        // the leakage-cancelling coefficient is negative.
        let plain = xy_unitary(&qubit(), &x2_pulse(0.05, 0.0), 0.0, 0.05);
        let dragged = xy_unitary(&qubit(), &x2_pulse(0.05, -0.5), 0.0, 0.05);
        let leak = |u: &Array2<C64>| u[[2, 0]].norm_sqr() + u[[2, 1]].norm_sqr();
        assert!(
            leak(&dragged) < leak(&plain) / 2.0,
            "leakage {} !< {}/2",
            leak(&dragged),
            leak(&plain)
        );
    }

    #[test]
    fn identity_gate_idles_the_qubit_block_on_resonance() {
        // With the carrier on f10 an idle slot is diagonal: exact identity
        // on the qubit block, while |2> precesses at the anharmonicity.
        let (p, phase) = pulse_for_gate(&x2_pulse(0.05, -0.5), SqGate::I);
        let u = xy_unitary(&qubit(), &p, phase, 0.05);
        for r in 0..2 {
            for c in 0..2 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((u[[r, c]] - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
        let d2 = u[[2, 2]] - C64::from_polar(1.0, -2.0 * PI * -0.22 * 10.0);
        assert!(d2.norm() < 1e-10);
    }

    #[test]
    fn calibrated_gates_hit_their_ideals() {
        use crate::linalg::avg_gate_fidelity;
        let q = qubit();
        let x2 = super::super::calibrated_x2(&q);
        for gate in SqGate::ALL {
            let (p, phase) = pulse_for_gate(&x2, gate);
            let u = xy_unitary(&q, &p, phase, 0.05);
            assert!(unitarity_defect(&u) < 1e-11);
            let mut block = Array2::zeros((2, 2));
            for r in 0..2 {
                for c in 0..2 {
                    block[[r, c]] = u[[r, c]];
                }
            }
            let infid = 1.0 - avg_gate_fidelity(&block, &gate.unitary());
            assert!(infid < 1e-3, "{gate}: infidelity {infid}");
        }
    }

    #[test]
    fn evolve_rejects_unnormalized_state() {
        let mut s = levels::ground();
        s[0] = C64::new(0.5, 0.0);
        let err = evolve_xy_pulse(&s, &qubit(), &x2_pulse(0.05, 0.5), 0.05);
        assert!(matches!(err, Err(DeviceError::NotNormalized(_))));
    }
}
