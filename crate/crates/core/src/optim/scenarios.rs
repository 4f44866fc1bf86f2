//! Closed-loop calibration bindings: each one wraps a slice of the device's
//! pulse parameters in the fixed-depth sequence-fidelity cost, runs the
//! simplex, and attaches before/after benchmarking so every run documents
//! its own improvement in the same units it optimized.

use serde::Serialize;

use crate::device::params::{
    CzTrajectoryParams, DeviceError, LineResponse, SpamParams, StepPulseParams, XyPulseParams,
};
use crate::device::zline::probe_phase_trace;
use crate::device::DeviceModel;
use crate::rb::{
    expected_reference_error, fit_decay, gate_error, orbit_metric, run_rb_curve, spam_floor,
    DecayFit, GateErrorEstimate, OrbitSettings, RbCurve, RbError, SequenceExecutor,
    SingleQubitPulse, StepInterleavedExecutor, TwoQubitPulse,
};
use crate::seeds::SeedTree;

use super::{nelder_mead, NelderMeadConfig, OptimizationTrace};

/// A verification benchmarking run: the sampled curve and its fit.
#[derive(Clone, Debug, Serialize)]
pub struct RbCheck {
    pub curve: RbCurve,
    pub fit: DecayFit,
}

/// Reference and interleaved verification on a pair, with the error budget
/// the reference decay is expected to match.
#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub reference: RbCheck,
    pub interleaved: RbCheck,
    /// Entangler error from the interleaved-to-reference decay ratio.
    pub entangler: GateErrorEstimate,
    /// Mean per-gate error of the pair's single-qubit gates, from separate
    /// single-qubit benchmarking of each qubit.
    pub sq_gate_error: f64,
    /// Decomposition budget: what the reference error per element should be
    /// given the measured single-qubit and entangler errors.
    pub expected_reference: f64,
}

/// Verification of a step-interleaved run: the decay plus the worst
/// control-line phase deviation over the post-step window.
#[derive(Clone, Debug, Serialize)]
pub struct StepCheck {
    pub curve: RbCurve,
    pub fit: DecayFit,
    /// max |actual - ideal| detuning phase, rad, sampled each timestep.
    pub max_phase_deviation: f64,
}

/// Result of tuning one qubit's π/2 pulse.
#[derive(Clone, Debug, Serialize)]
pub struct X2Optimization {
    pub initial: XyPulseParams,
    pub tuned: XyPulseParams,
    pub trace: OptimizationTrace,
    pub before: RbCheck,
    pub after: RbCheck,
}

/// Result of tuning a pair's entangling trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct CzOptimization {
    pub initial: CzTrajectoryParams,
    pub tuned: CzTrajectoryParams,
    pub trace: OptimizationTrace,
    pub before: PairCheck,
    pub after: PairCheck,
}

/// Result of tuning a control line's predistortion filter.
#[derive(Clone, Debug, Serialize)]
pub struct DeconvOptimization {
    pub initial_poles: [(f64, f64); 2],
    pub initial_phase_correction: f64,
    pub tuned_poles: [(f64, f64); 2],
    pub tuned_phase_correction: f64,
    pub trace: OptimizationTrace,
    pub before: StepCheck,
    pub after: StepCheck,
}

// Upper bound on the shot noise of one cost evaluation: per-sequence
// binomial sigma is at most 0.5/sqrt(reps), averaged over k sequences.
fn shot_noise_ceiling(settings: &OrbitSettings) -> f64 {
    if settings.repetitions == 0 {
        0.0
    } else {
        0.5 / ((settings.k * settings.repetitions as usize) as f64).sqrt()
    }
}

// Standard coefficients, ranks stopped once the simplex cost spread falls
// inside twice the shot noise: below that the ordering is noise and more
// steps are a random walk.
fn orbit_config(
    scales: Vec<f64>,
    settings: &OrbitSettings,
    max_evaluations: usize,
) -> NelderMeadConfig {
    let mut config = NelderMeadConfig::new(scales, max_evaluations);
    config.cost_tolerance = 2.0 * shot_noise_ceiling(settings);
    config
}

// A start whose fidelity is indistinguishable from the decay floor carries
// no gradient for the simplex; refuse it up front with the remedy in the
// error text.
fn reject_floor_start(
    cost0: f64,
    n_qubits: u8,
    spam: &SpamParams,
    settings: &OrbitSettings,
) -> Result<(), RbError> {
    let fidelity = 1.0 - cost0;
    let floor = spam_floor(n_qubits, spam);
    if fidelity - floor < 0.02 + 3.0 * shot_noise_ceiling(settings) {
        return Err(RbError::CostAtFloor { fidelity, floor });
    }
    Ok(())
}

// Sequences per verification depth.  Control-noise kicks put sequence-to-
// sequence scatter on top of any shot noise, and the interleaved-ratio
// extraction amplifies fit error, so verification curves buy more
// statistics than optimization cost evaluations do.
const VERIFY_K: usize = 160;

fn rb_check(
    executor: &dyn SequenceExecutor,
    m_values: &[usize],
    repetitions: u32,
    seeds: &SeedTree,
) -> Result<RbCheck, RbError> {
    let curve = run_rb_curve(executor, m_values, VERIFY_K, repetitions, seeds)?;
    let fit = fit_decay(&curve)?;
    Ok(RbCheck { curve, fit })
}

// Depth grids for verification fits.  The single-qubit grid spans knees
// from roughly 2e-2 down to 1e-3 per element; the pair grid resolves
// reference errors from 4e-2 down to 1e-2; the per-gate grid reaches deep
// enough to pin the ~8e-4 per-element decay of a kicked pair qubit.
const SQ_VERIFY_GRID: [usize; 9] = [1, 8, 20, 40, 70, 110, 170, 260, 400];
const PAIR_VERIFY_GRID: [usize; 8] = [1, 5, 10, 17, 26, 38, 55, 75];
const SQ_GATE_GRID: [usize; 8] = [1, 60, 150, 300, 500, 800, 1200, 1800];

/// Tune one qubit's π/2 pulse (peak amplitude, carrier frequency, DRAG
/// coefficient) against the fixed-depth sequence-fidelity cost.
///
/// Simplex displacements are 2% of the current amplitude, 1 MHz of carrier,
/// and 0.1 of DRAG: large enough to see a rank signal over shot noise at a
/// well-chosen depth, small enough to stay inside the cost's single basin.
/// The attached verification runs benchmark the initial and tuned pulse on
/// the same seeds so the improvement is read off one pair of fits.
pub fn optimize_x2(
    device: &DeviceModel,
    qubit: usize,
    settings: &OrbitSettings,
    max_evaluations: usize,
    seeds: &SeedTree,
) -> Result<X2Optimization, RbError> {
    let initial = device.x2[qubit];
    let gate_length = initial.gate_length;
    let build = |x: &[f64]| -> Result<DeviceModel, RbError> {
        let mut d = device.clone();
        d.x2[qubit] = XyPulseParams {
            amplitude: x[0],
            drive_frequency: x[1],
            drag_coefficient: x[2],
            gate_length,
        };
        d.validate()?;
        Ok(d)
    };
    let x0 = [
        initial.amplitude,
        initial.drive_frequency,
        initial.drag_coefficient,
    ];

    let probe = SingleQubitPulse::new(device, qubit)?;
    let cost0 = orbit_metric(&probe, settings, 0, &seeds.subtree(&[1]))?;
    reject_floor_start(cost0, 1, &device.spam, settings)?;

    let cost_stream = seeds.subtree(&[0]);
    let mut eval_index = 0u64;
    let cost = |x: &[f64]| -> f64 {
        let idx = eval_index;
        eval_index += 1;
        build(x)
            .and_then(|d| SingleQubitPulse::new(&d, qubit))
            .and_then(|e| orbit_metric(&e, settings, idx, &cost_stream))
            .unwrap_or(f64::INFINITY)
    };
    let scales = vec![(0.02 * initial.amplitude.abs()).max(1e-4), 1e-3, 0.1];
    let config = orbit_config(scales, settings, max_evaluations);
    let trace = nelder_mead(cost, &x0, &config)?;

    let tuned_device = build(&trace.best_params)?;
    let tuned = tuned_device.x2[qubit];
    let before = rb_check(
        &SingleQubitPulse::new(device, qubit)?,
        &SQ_VERIFY_GRID,
        settings.repetitions,
        &seeds.subtree(&[2]),
    )?;
    let after = rb_check(
        &SingleQubitPulse::new(&tuned_device, qubit)?,
        &SQ_VERIFY_GRID,
        settings.repetitions,
        &seeds.subtree(&[3]),
    )?;
    Ok(X2Optimization {
        initial,
        tuned,
        trace,
        before,
        after,
    })
}

fn pair_check(
    device: &DeviceModel,
    repetitions: u32,
    seeds: &SeedTree,
) -> Result<PairCheck, RbError> {
    let reference = rb_check(
        &TwoQubitPulse::new(device)?,
        &PAIR_VERIFY_GRID,
        repetitions,
        &seeds.subtree(&[0]),
    )?;
    let interleaved = rb_check(
        &TwoQubitPulse::new(device)?.with_interleaved_cz(),
        &PAIR_VERIFY_GRID,
        repetitions,
        &seeds.subtree(&[1]),
    )?;
    let entangler = gate_error(interleaved.fit.p, reference.fit.p, 2)?;
    let mut per_gate = 0.0;
    for q in 0..2 {
        let exec = SingleQubitPulse::new(device, q)?;
        let curve = run_rb_curve(
            &exec,
            &SQ_GATE_GRID,
            VERIFY_K,
            repetitions,
            &seeds.subtree(&[2 + q as u64]),
        )?;
        per_gate += fit_decay(&curve)?.r / exec.group().mean_sq_gate_count();
    }
    let sq_gate_error = per_gate / 2.0;
    let expected_reference = expected_reference_error(sq_gate_error, entangler.r);
    Ok(PairCheck {
        reference,
        interleaved,
        entangler,
        sq_gate_error,
        expected_reference,
    })
}

/// Tune a pair's entangling trajectory (all eight pulse-shape and phase
/// parameters) against the two-qubit fixed-depth cost.
///
/// The single-qubit slot propagators are cached once and reused across
/// evaluations; only the entangling window is re-propagated, so one
/// evaluation costs one trajectory propagation plus the sequence algebra.
pub fn optimize_cz(
    device: &DeviceModel,
    settings: &OrbitSettings,
    max_evaluations: usize,
    seeds: &SeedTree,
) -> Result<CzOptimization, RbError> {
    let Some(initial) = device.cz.clone() else {
        return Err(DeviceError::InvalidParameter(
            "pair has no entangling-gate trajectory".into(),
        )
        .into());
    };
    let base = TwoQubitPulse::new(device)?;
    let build = |x: &[f64]| -> Result<DeviceModel, RbError> {
        let mut d = device.clone();
        d.cz = Some(CzTrajectoryParams {
            params: x.try_into().expect("eight trajectory parameters"),
            total_time: initial.total_time,
            coupling: initial.coupling,
        });
        d.validate()?;
        Ok(d)
    };

    let cost0 = orbit_metric(&base, settings, 0, &seeds.subtree(&[1]))?;
    reject_floor_start(cost0, 2, &device.spam, settings)?;

    let cost_stream = seeds.subtree(&[0]);
    let mut eval_index = 0u64;
    let cost = |x: &[f64]| -> f64 {
        let idx = eval_index;
        eval_index += 1;
        let run = || -> Result<f64, RbError> {
            let d = build(x)?;
            let mut exec = base.clone();
            exec.retune_entangler(&d)?;
            orbit_metric(&exec, settings, idx, &cost_stream)
        };
        run().unwrap_or(f64::INFINITY)
    };
    // Displacements per parameter: excursion in GHz, ramp and hold in ns,
    // then the dimensionless shoulder and ramp-harmonic shape terms and the
    // two per-qubit phase corrections in rad.
    let scales = vec![0.004, 0.4, 0.8, 0.04, 0.04, 0.04, 0.08, 0.08];
    let config = orbit_config(scales, settings, max_evaluations);
    let trace = nelder_mead(cost, &initial.params.to_vec(), &config)?;

    let tuned_device = build(&trace.best_params)?;
    let tuned = tuned_device.cz.clone().expect("built with a trajectory");
    let before = pair_check(device, settings.repetitions, &seeds.subtree(&[2]))?;
    let after = pair_check(&tuned_device, settings.repetitions, &seeds.subtree(&[3]))?;
    Ok(CzOptimization {
        initial,
        tuned,
        trace,
        before,
        after,
    })
}

fn step_check(
    device: &DeviceModel,
    qubit: usize,
    step: StepPulseParams,
    phase_correction: f64,
    repetitions: u32,
    seeds: &SeedTree,
) -> Result<StepCheck, RbError> {
    let exec = StepInterleavedExecutor::new(device, qubit, step, phase_correction)?;
    let curve = run_rb_curve(
        &exec,
        &[1, 5, 12, 22, 36, 55, 80, 110],
        20,
        repetitions,
        seeds,
    )?;
    let fit = fit_decay(&curve)?;
    let dt = device.timestep;
    let samples = (step.observation_window / dt).round() as usize;
    let times: Vec<f64> = (0..=samples)
        .map(|i| step.duration + i as f64 * dt)
        .collect();
    let trace = probe_phase_trace(
        &step,
        &times,
        dt,
        device.zline_forward.as_ref(),
        device.zline_correction.as_ref(),
    );
    let max_phase_deviation = trace.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    Ok(StepCheck {
        curve,
        fit,
        max_phase_deviation,
    })
}

/// Tune a control line's two-pole predistortion filter and the static
/// per-step phase correction against the step-interleaved fixed-depth cost.
///
/// The "before" verification plays the same sequences with no predistortion
/// and the best static-only phase correction, which is exactly what a
/// device has before deconvolution is commissioned.  An unstable inverse
/// filter blows a waveform up into non-finite amplitudes; that evaluation
/// simply ranks worst and the simplex moves away.
pub fn optimize_deconvolution(
    device: &DeviceModel,
    qubit: usize,
    step: StepPulseParams,
    init_poles: [(f64, f64); 2],
    settings: &OrbitSettings,
    max_evaluations: usize,
    seeds: &SeedTree,
) -> Result<DeconvOptimization, RbError> {
    let mut bare = device.clone();
    bare.zline_correction = None;
    // Static-only calibration on the distorted line: the honest starting
    // phase correction, and the "before" executor configuration.
    let static_phase =
        StepInterleavedExecutor::calibrated(&bare, qubit, step)?.phase_correction();
    let x0 = [
        init_poles[0].0,
        init_poles[0].1,
        init_poles[1].0,
        init_poles[1].1,
        static_phase,
    ];
    let build = |x: &[f64]| -> Result<DeviceModel, RbError> {
        let mut d = device.clone();
        d.zline_correction = Some(LineResponse::inverse(vec![(x[0], x[1]), (x[2], x[3])]));
        d.validate()?;
        Ok(d)
    };

    let probe = StepInterleavedExecutor::new(&bare, qubit, step, static_phase)?;
    let cost0 = orbit_metric(&probe, settings, 0, &seeds.subtree(&[1]))?;
    reject_floor_start(cost0, 1, &device.spam, settings)?;

    let cost_stream = seeds.subtree(&[0]);
    let mut eval_index = 0u64;
    let cost = |x: &[f64]| -> f64 {
        let idx = eval_index;
        eval_index += 1;
        build(x)
            .and_then(|d| StepInterleavedExecutor::new(&d, qubit, step, x[4]))
            .and_then(|e| orbit_metric(&e, settings, idx, &cost_stream))
            .unwrap_or(f64::INFINITY)
    };
    // Pole amplitudes move in absolute steps of 0.02, rates by 30% of the
    // initial guess, the phase by 0.05 rad.
    let scales = vec![
        0.02,
        (0.3 * init_poles[0].1.abs()).max(1e-4),
        0.02,
        (0.3 * init_poles[1].1.abs()).max(1e-4),
        0.05,
    ];
    let config = orbit_config(scales, settings, max_evaluations);
    let trace = nelder_mead(cost, &x0, &config)?;

    let best = &trace.best_params;
    let tuned_poles = [(best[0], best[1]), (best[2], best[3])];
    let tuned_phase_correction = best[4];
    let tuned_device = build(best)?;
    let before = step_check(
        &bare,
        qubit,
        step,
        static_phase,
        settings.repetitions,
        &seeds.subtree(&[2]),
    )?;
    let after = step_check(
        &tuned_device,
        qubit,
        step,
        tuned_phase_correction,
        settings.repetitions,
        &seeds.subtree(&[3]),
    )?;
    Ok(DeconvOptimization {
        initial_poles: init_poles,
        initial_phase_correction: static_phase,
        tuned_poles,
        tuned_phase_correction,
        trace,
        before,
        after,
    })
}
