//! Oracle checks of the device simulation against closed forms, structure
//! arguments, and fine-timestep references.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use orbitlab_core::clifford::{enumerate_group, Gate, SqGate};
use orbitlab_core::device::cz::{
    computational_block, conditional_phase, cz_unitary, leakage, pair_hamiltonian, DIM2,
};
use orbitlab_core::device::integrator::propagate;
use orbitlab_core::device::xy::{drive_hamiltonian, pulse_for_gate, xy_unitary};
use orbitlab_core::device::zline::step_total_phase;
use orbitlab_core::device::{
    calibrated_x2, DeviceModel, LineResponse, StepPulseParams, TransmonParams,
};
use orbitlab_core::linalg::{avg_gate_fidelity, max_abs_diff, unitarity_defect};

fn qubit_block(u: &Array2<C64>) -> Array2<C64> {
    let mut b = Array2::zeros((2, 2));
    for r in 0..2 {
        for c in 0..2 {
            b[[r, c]] = u[[r, c]];
        }
    }
    b
}

#[test]
fn gate_propagators_converge_against_fine_timestep_reference() {
    let dev = DeviceModel::calibrated_pair();
    for (gate, qubit) in [(SqGate::X, 0), (SqGate::YHalf, 1)] {
        let (p, phase) = pulse_for_gate(&dev.x2[qubit], gate);
        let coarse = xy_unitary(&dev.qubits[qubit], &p, phase, 0.05);
        let fine = xy_unitary(&dev.qubits[qubit], &p, phase, 0.00625);
        assert!(max_abs_diff(&coarse, &fine) < 1e-8);
    }
    let traj = dev.cz.clone().unwrap();
    let coarse = cz_unitary(&dev.qubits[0], &dev.qubits[1], &traj, 5.0, 5.5, 0.05);
    let fine = cz_unitary(&dev.qubits[0], &dev.qubits[1], &traj, 5.0, 5.5, 0.00625);
    assert!(max_abs_diff(&coarse, &fine) < 1e-6);
}

#[test]
fn continuous_two_pulse_integration_matches_per_gate_products() {
    // The sequence frame has no absolute-time dependence: integrating two
    // back-to-back pulses as one Hamiltonian must equal the product of the
    // per-gate propagators.
    let q = TransmonParams {
        f10: 5.0,
        anharmonicity: -0.22,
    };
    let x2 = calibrated_x2(&q);
    let (pa, pha) = pulse_for_gate(&x2, SqGate::XHalf);
    let (pb, phb) = pulse_for_gate(&x2, SqGate::YHalf);
    let tg = x2.gate_length;
    let h = |t: f64| {
        if t < tg {
            drive_hamiltonian(&q, &pa, pha, t)
        } else {
            drive_hamiltonian(&q, &pb, phb, t - tg)
        }
    };
    let continuous = propagate(&h, 0.0, 2.0 * tg, 0.05);
    let product = xy_unitary(&q, &pb, phb, 0.05).dot(&xy_unitary(&q, &pa, pha, 0.05));
    assert!(max_abs_diff(&continuous, &product) < 1e-8);
}

#[test]
fn long_gate_products_stay_unitary() {
    let dev = DeviceModel::calibrated_single();
    let group = enumerate_group(1);
    let mut u = Array2::<C64>::eye(3);
    let mut gates = 0;
    for (k, elem) in group.elements().iter().cycle().enumerate().take(200) {
        let _ = k;
        for gate in &elem.decomposition {
            if let Gate::Sq { gate, .. } = gate {
                u = dev.sq_unitary(0, *gate).dot(&u);
                gates += 1;
            }
        }
    }
    assert!(gates > 300, "cycled {gates} pulses");
    assert!(unitarity_defect(&u) < 1e-9);
}

#[test]
fn calibrated_pair_realizes_a_controlled_phase() {
    let dev = DeviceModel::calibrated_pair();
    let u = dev.cz_unitary();
    let phi = conditional_phase(&u);
    assert!((phi.abs() - PI).abs() < 0.05, "conditional phase {phi}");
    assert!(leakage(&u) < 1e-2, "leakage {}", leakage(&u));
    // Single-qubit phases are zeroed by the frozen virtual-Z corrections.
    for i in [1, 3] {
        let arg = (u[[i, i]] / u[[0, 0]]).arg();
        assert!(arg.abs() < 1e-3, "diag {i} arg {arg}");
    }
    let mut ideal = Array2::<C64>::eye(4);
    ideal[[3, 3]] = C64::new(-1.0, 0.0);
    let f = avg_gate_fidelity(&computational_block(&u), &ideal);
    assert!(f > 0.99, "fidelity {f}");
}

#[test]
fn pair_propagator_conserves_total_excitation_number() {
    // The common-frame Hamiltonian commutes with n0 + n1, so the raw
    // propagator and the diagonal corrections must both be block diagonal
    // across excitation sectors.
    let dev = DeviceModel::calibrated_pair();
    let u = dev.cz_unitary();
    let sector = |i: usize| i / 3 + i % 3;
    for r in 0..DIM2 {
        for c in 0..DIM2 {
            if sector(r) != sector(c) {
                assert!(u[[r, c]].norm() < 1e-12, "[{r},{c}] = {}", u[[r, c]]);
            }
        }
    }
}

#[test]
fn pair_hamiltonian_is_hermitian_along_the_trajectory() {
    let dev = DeviceModel::calibrated_pair();
    let traj = dev.cz.clone().unwrap();
    for t in [0.0, 3.7, 12.0, 30.0, 55.0] {
        let h = pair_hamiltonian(&dev.qubits[0], &dev.qubits[1], &traj, 5.0, t);
        let hd = h.t().map(|z| z.conj());
        assert!(max_abs_diff(&h, &hd) < 1e-12, "t = {t}");
    }
}

#[test]
fn mean_clifford_error_of_frozen_calibration_stays_put() {
    // Independent recomputation of the figure the calibration minimized:
    // realize all 24 elements as pulse products and compare their qubit
    // blocks against the exact group unitaries.
    let dev = DeviceModel::calibrated_single();
    let group = enumerate_group(1);
    let mut gate_u = std::collections::HashMap::new();
    for g in SqGate::ALL {
        gate_u.insert(g, dev.sq_unitary(0, g));
    }
    let mut total = 0.0;
    let mut worst = 0.0f64;
    for elem in group.elements() {
        let mut u = Array2::<C64>::eye(3);
        for gate in &elem.decomposition {
            if let Gate::Sq { gate, .. } = gate {
                u = gate_u[gate].dot(&u);
            }
        }
        let infid = 1.0 - avg_gate_fidelity(&qubit_block(&u), &qubit_block(&elem.unitary));
        total += infid;
        worst = worst.max(infid);
    }
    let mean = total / 24.0;
    assert!(mean < 1e-3, "mean Clifford infidelity {mean}");
    assert!(worst < 3e-3, "worst Clifford infidelity {worst}");
    assert!(mean > 1e-5, "suspiciously perfect: {mean}");
}

#[test]
fn step_phase_magnitude_matches_area_with_and_without_correction() {
    let step = StepPulseParams {
        detuning: -0.37,
        duration: 35.0,
        observation_window: 300.0,
    };
    // Ideal line: |φ| = 2π · 0.37 · 35 = 2π · 12.95.
    let ideal = step_total_phase(&step, 0.05, None, None);
    assert!((ideal.abs() / (2.0 * PI) - 12.95).abs() < 1e-9);
    // Distorting line with exact predistortion: the same to 1e-9.
    let poles = vec![(0.1, 0.02), (-0.05, 0.6)];
    let fwd = LineResponse::forward(poles.clone());
    let inv = LineResponse::inverse(poles);
    let corrected = step_total_phase(&step, 0.05, Some(&fwd), Some(&inv));
    assert!((corrected - ideal).abs() < 1e-9);
    // Uncorrected: off by the truncated tails, but settled within 2π/100
    // after a 300 ns window at γ ≥ 0.02/ns.
    let raw = step_total_phase(&step, 0.05, Some(&fwd), None);
    assert!((raw - ideal).abs() < 2.0 * PI * 0.01);
    assert!((raw - ideal).abs() > 1e-6, "distortion should leave a trace");
}
