//! Randomized-benchmarking engine: sequence execution, decay fitting, error
//! extraction, and the fixed-depth sequence-fidelity cost used for
//! closed-loop gate tuning.
//!
//! Sequence fidelity is the probability of reporting every qubit in the
//! ground state after m uniformly random Clifford elements plus the recovery
//! element.  Averaged over sequences it decays as F = A p^m + B, where state
//! preparation and readout errors move A and B while the decay scale p
//! carries the error per Clifford r = (1 - p)(d - 1)/d.

pub mod bleedthrough;
pub mod executor;
pub mod fit;
pub mod map;
pub mod metrics;

use rayon::prelude::*;
use serde::Serialize;

use crate::device::DeviceError;
use crate::seeds::SeedTree;

pub use bleedthrough::{steady_state_step_phase, StepInterleavedExecutor};
pub use executor::{
    schedule_slots, spam_floor, DepolarizingExecutor, IdealExecutor, SequenceExecutor,
    SingleQubitPulse, SlotOp, TwoQubitPulse,
};
pub use fit::{fit_decay, infer_error_at_m, ClampFlag, DecayFit, InferredError};
pub use map::{crosstalk_map, CrosstalkExecutor, CrosstalkMap};
pub use metrics::{
    expected_reference_error, gate_error, optimal_m, sensitivity, GateErrorEstimate, Sensitivity,
};

/// Errors raised by sequence execution, fitting, and error extraction.
#[derive(Debug, thiserror::Error)]
pub enum RbError {
    #[error("need at least {want} distinct sequence depths, got {got}")]
    TooFewDepths { got: usize, want: usize },
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("initial sequence fidelity {fidelity:.4} is within noise of the decay floor {floor:.4}; reduce the sequence depth")]
    CostAtFloor { fidelity: f64, floor: f64 },
    #[error(transparent)]
    Device(#[from] DeviceError),
}

/// Which benchmarking variant produced a curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RbMode {
    /// Random Cliffords only.
    Reference,
    /// The named group element is inserted after every random Clifford.
    Interleaved { gate: String },
    /// Reference sequences played while a detuned neighbor drives its own
    /// pulse train on a shared line.
    Simultaneous { detuning: f64, gate_length: f64 },
}

/// Sampled decay data: the sequence fidelities of k independently drawn
/// sequences at each depth.
#[derive(Clone, Debug, Serialize)]
pub struct RbCurve {
    pub m_values: Vec<usize>,
    /// `fidelities[i]` holds the k samples at `m_values[i]`.
    pub fidelities: Vec<Vec<f64>>,
    pub k: usize,
    pub n_qubits: u8,
    pub mode: RbMode,
}

impl RbCurve {
    /// Mean sequence fidelity per depth.
    pub fn means(&self) -> Vec<f64> {
        self.fidelities
            .iter()
            .map(|row| row.iter().sum::<f64>() / row.len() as f64)
            .collect()
    }

    /// Sample standard deviation of the sequence fidelities per depth;
    /// reported alongside means but not used as fit weights.
    pub fn spreads(&self) -> Vec<f64> {
        self.fidelities
            .iter()
            .map(|row| {
                let n = row.len() as f64;
                let mean = row.iter().sum::<f64>() / n;
                if row.len() < 2 {
                    return 0.0;
                }
                let ss = row.iter().map(|f| (f - mean).powi(2)).sum::<f64>();
                (ss / (n - 1.0)).sqrt()
            })
            .collect()
    }

    /// Standard error of the per-depth mean.
    pub fn standard_errors(&self) -> Vec<f64> {
        self.spreads()
            .iter()
            .map(|s| s / (self.k as f64).sqrt())
            .collect()
    }
}

fn check_depths(m_values: &[usize], k: usize) -> Result<(), RbError> {
    if m_values.is_empty() {
        return Err(RbError::TooFewDepths { got: 0, want: 1 });
    }
    if !m_values.windows(2).all(|w| w[0] < w[1]) {
        return Err(RbError::OutOfRange {
            name: "m_values",
            value: f64::NAN,
            range: "a strictly increasing list of depths",
        });
    }
    if k == 0 {
        return Err(RbError::OutOfRange {
            name: "k",
            value: 0.0,
            range: "at least one sequence per depth",
        });
    }
    Ok(())
}

/// One full decay curve: k random sequences at every depth in `m_values`.
///
/// Each sequence draws its own generator from `seeds` keyed by (depth index,
/// sequence index), samples the sequence, and only then spends randomness on
/// noise and measurement, so results are independent of how the work is
/// divided between threads.  Sequences run in parallel; the output ordering
/// is fixed by the index pair.
pub fn run_rb_curve(
    executor: &dyn SequenceExecutor,
    m_values: &[usize],
    k: usize,
    repetitions: u32,
    seeds: &SeedTree,
) -> Result<RbCurve, RbError> {
    check_depths(m_values, k)?;
    let group = executor.group();
    let jobs: Vec<(usize, usize)> = (0..m_values.len())
        .flat_map(|mi| (0..k).map(move |ki| (mi, ki)))
        .collect();
    let flat: Vec<f64> = jobs
        .par_iter()
        .map(|&(mi, ki)| {
            let mut rng = seeds.rng(&[mi as u64, ki as u64]);
            let seq = group.sample_sequence(m_values[mi], executor.interleave(), &mut rng);
            executor.sequence_fidelity(&seq, repetitions, &mut rng)
        })
        .collect::<Result<_, _>>()?;
    let fidelities = flat.chunks(k).map(<[f64]>::to_vec).collect();
    Ok(RbCurve {
        m_values: m_values.to_vec(),
        fidelities,
        k,
        n_qubits: group.n_qubits(),
        mode: executor.mode(),
    })
}

/// Settings for the fixed-depth tuning cost.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OrbitSettings {
    /// Sequence depth; pick it near the knee of the decay for the error
    /// scale being tuned.
    pub m: usize,
    /// Sequences averaged per evaluation.
    pub k: usize,
    /// Shots per sequence; 0 measures exact expectations.
    pub repetitions: u32,
    /// Reuse the same sequence draw on every evaluation instead of fresh
    /// ones.  Fresh draws keep the optimizer from overfitting a particular
    /// sequence set at the price of a noisier cost.
    pub fixed_sequences: bool,
}

/// Fixed-depth tuning cost: one minus the mean sequence fidelity of k random
/// sequences at depth m.
///
/// `eval_index` selects the sequence draw; with `fixed_sequences` it is
/// ignored and every call replays the draw of evaluation zero.
pub fn orbit_metric(
    executor: &dyn SequenceExecutor,
    settings: &OrbitSettings,
    eval_index: u64,
    seeds: &SeedTree,
) -> Result<f64, RbError> {
    check_depths(&[settings.m], settings.k)?;
    let draw = if settings.fixed_sequences { 0 } else { eval_index };
    let stream = seeds.subtree(&[draw]);
    let group = executor.group();
    let total: f64 = (0..settings.k)
        .into_par_iter()
        .map(|ki| {
            let mut rng = stream.rng(&[ki as u64]);
            let seq = group.sample_sequence(settings.m, executor.interleave(), &mut rng);
            executor.sequence_fidelity(&seq, settings.repetitions, &mut rng)
        })
        .collect::<Result<Vec<f64>, _>>()?
        .iter()
        .sum();
    Ok(1.0 - total / settings.k as f64)
}

/// Geometric depth grid from 1 up to three times the most sensitive depth
/// for error rate `r`, deduplicated and ascending.
pub fn depth_grid(r: f64, points: usize) -> Result<Vec<usize>, RbError> {
    let top = (3.0 * optimal_m(r)?).round().max(2.0);
    let n = points.max(2);
    let mut grid: Vec<usize> = (0..n)
        .map(|i| {
            let frac = i as f64 / (n - 1) as f64;
            top.powf(frac).round() as usize
        })
        .collect();
    grid.dedup();
    Ok(grid)
}
