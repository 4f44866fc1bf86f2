//! Adiabatic controlled-phase gate between two coupled transmons.
//!
//! The higher-frequency (moving) qubit is pulled down toward the avoided
//! crossing where |11> meets |02>, held, and brought back; the |11> branch
//! picks up an extra phase relative to the single-excitation states.  Both
//! qudits are simulated in a common frame rotating at the static qubit's
//! drive carrier, where the exchange coupling is time independent; the
//! result is rotated into the per-qubit carrier frames afterwards and the
//! trajectory's two phase-correction parameters are applied as virtual Z
//! rotations.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use super::integrator::propagate;
use super::params::{CzTrajectoryParams, DeviceError, TransmonParams};

pub const DIM2: usize = 9;

/// Ramp and hold times after sanitization: ramps at least 0.1 ns, hold
/// nonnegative, and the whole excursion scaled to fit inside the gate
/// window.  Keeps the gate well defined for any real-valued optimizer step.
pub fn sanitized_times(traj: &CzTrajectoryParams) -> (f64, f64, f64) {
    let t_ramp = traj.params[1].max(0.1);
    let t_hold = traj.params[2].max(0.0);
    let span = 2.0 * t_ramp + t_hold;
    let (t_ramp, t_hold, span) = if span > traj.total_time {
        let s = traj.total_time / span;
        (t_ramp * s, t_hold * s, traj.total_time)
    } else {
        (t_ramp, t_hold, span)
    };
    let pad = (traj.total_time - span) / 2.0;
    (t_ramp, t_hold, pad)
}

/// Excursion profile s(t) in units of the depth parameter: 0 outside the
/// excursion, 1 on the hold plateau, with a raised-cosine ramp plus three
/// shape terms that vanish together with their slopes at both ramp
/// endpoints, so any coefficient choice keeps the profile C1 across the
/// junctions: a symmetric shoulder, an odd skew harmonic, and a second
/// even harmonic.
pub fn excursion_fraction(traj: &CzTrajectoryParams, t: f64) -> f64 {
    let (t_ramp, t_hold, pad) = sanitized_times(traj);
    let tau = t - pad;
    let ramp = |u: f64| {
        let s2 = (PI * u).sin().powi(2);
        0.5 * (1.0 - (PI * u).cos())
            + traj.params[3] * s2
            + traj.params[4] * s2 * (2.0 * PI * u).sin()
            + traj.params[5] * (2.0 * PI * u).sin().powi(2)
    };
    if tau <= 0.0 || tau >= 2.0 * t_ramp + t_hold {
        0.0
    } else if tau < t_ramp {
        ramp(tau / t_ramp)
    } else if tau <= t_ramp + t_hold {
        1.0
    } else {
        ramp((2.0 * t_ramp + t_hold - tau) / t_ramp)
    }
}

/// Moving-qubit frequency at time t into the gate.
pub fn moving_frequency(q1: &TransmonParams, traj: &CzTrajectoryParams, t: f64) -> f64 {
    q1.f10 - traj.params[0] * excursion_fraction(traj, t)
}

fn level_energy(n: usize, f10: f64, anharmonicity: f64) -> f64 {
    n as f64 * f10 + if n == 2 { anharmonicity } else { 0.0 }
}

/// Two-qudit Hamiltonian (angular units) in the common frame rotating at
/// `f_frame` on both qudits.  Basis index is 3 n0 + n1.
pub fn pair_hamiltonian(
    q0: &TransmonParams,
    q1: &TransmonParams,
    traj: &CzTrajectoryParams,
    f_frame: f64,
    t: f64,
) -> Array2<C64> {
    let f1 = moving_frequency(q1, traj, t);
    let mut h = Array2::<C64>::zeros((DIM2, DIM2));
    for n0 in 0..3 {
        for n1 in 0..3 {
            let i = 3 * n0 + n1;
            let e = level_energy(n0, q0.f10, q0.anharmonicity)
                + level_energy(n1, f1, q1.anharmonicity)
                - (n0 + n1) as f64 * f_frame;
            h[[i, i]] = C64::new(2.0 * PI * e, 0.0);
            // Exchange g (a0† a1 + h.c.): couple (n0, n1) to (n0+1, n1-1).
            if n0 < 2 && n1 > 0 {
                let j = 3 * (n0 + 1) + (n1 - 1);
                let el = 2.0 * PI * traj.coupling * (((n0 + 1) * n1) as f64).sqrt();
                h[[j, i]] = C64::new(el, 0.0);
                h[[i, j]] = C64::new(el, 0.0);
            }
        }
    }
    h
}

/// Full gate propagator in the per-qubit drive-carrier frames, with the
/// trajectory's virtual-Z corrections applied.  `fd0`, `fd1` are the two
/// carriers; the first qubit is the static one.
pub fn cz_unitary(
    q0: &TransmonParams,
    q1: &TransmonParams,
    traj: &CzTrajectoryParams,
    fd0: f64,
    fd1: f64,
    max_dt: f64,
) -> Array2<C64> {
    let f_frame = fd0;
    let h = |t: f64| pair_hamiltonian(q0, q1, traj, f_frame, t);
    let mut u = propagate(&h, 0.0, traj.total_time, max_dt);
    // Rotate into the carrier frames and absorb the virtual-Z parameters:
    // each excitation of qubit q gains (carrier offset) 2π (fd_q - f_frame) T
    // plus the correction φ_q.
    let th0 = 2.0 * PI * (fd0 - f_frame) * traj.total_time + traj.params[6];
    let th1 = 2.0 * PI * (fd1 - f_frame) * traj.total_time + traj.params[7];
    for n0 in 0..3 {
        for n1 in 0..3 {
            let phase = C64::from_polar(1.0, n0 as f64 * th0 + n1 as f64 * th1);
            for c in 0..DIM2 {
                u[[3 * n0 + n1, c]] *= phase;
            }
        }
    }
    u
}

/// Evolve a normalized two-qudit state through the gate.
pub fn evolve_cz(
    state: &Array1<C64>,
    q0: &TransmonParams,
    q1: &TransmonParams,
    traj: &CzTrajectoryParams,
    fd0: f64,
    fd1: f64,
    max_dt: f64,
) -> Result<Array1<C64>, DeviceError> {
    if state.len() != DIM2 {
        return Err(DeviceError::DimensionMismatch {
            got: state.len(),
            want: DIM2,
        });
    }
    let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(DeviceError::NotNormalized(norm));
    }
    Ok(cz_unitary(q0, q1, traj, fd0, fd1, max_dt).dot(state))
}

/// Indices of the computational basis states |00>, |01>, |10>, |11> within
/// the two-qudit space.
pub const COMPUTATIONAL: [usize; 4] = [0, 1, 3, 4];

/// 4x4 computational block of a two-qudit propagator.
pub fn computational_block(u: &Array2<C64>) -> Array2<C64> {
    let mut b = Array2::zeros((4, 4));
    for (r, &ir) in COMPUTATIONAL.iter().enumerate() {
        for (c, &ic) in COMPUTATIONAL.iter().enumerate() {
            b[[r, c]] = u[[ir, ic]];
        }
    }
    b
}

/// Controlled phase carried by the diagonal of the computational block,
/// wrapped to (-π, π].
pub fn conditional_phase(u: &Array2<C64>) -> f64 {
    let d = |i: usize| u[[i, i]];
    let z = d(4) * d(0) / (d(1) * d(3));
    z.arg()
}

/// Worst-case population leaving the computational subspace over the four
/// computational input states.
pub fn leakage(u: &Array2<C64>) -> f64 {
    COMPUTATIONAL
        .iter()
        .map(|&c| {
            let kept: f64 = COMPUTATIONAL.iter().map(|&r| u[[r, c]].norm_sqr()).sum();
            1.0 - kept
        })
        .fold(0.0, f64::max)
}
