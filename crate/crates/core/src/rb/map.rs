//! Bleedthrough characterization over a grid of aggressor settings:
//! simultaneous benchmarking at one fixed depth per cell, with the fidelity
//! drop converted to an added error through the reference decay.

use ndarray::Array1;
use num_complex::Complex64 as C64;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::executor::SequenceExecutor;
use super::fit::{infer_error_at_m, DecayFit};
use super::{RbError, RbMode};
use crate::clifford::{enumerate_group, CliffordGroup, RbSequence};
use crate::device::{
    ground_report_probability, sample_fraction, CrosstalkConfig, DeviceError, DeviceModel,
    SpamParams, TransmonParams, XyPulseParams,
};

/// Plays single-qubit sequences while a neighboring drive leaks onto the
/// victim's line: repeating aggressor pulses on the aggressor's own clock,
/// phase-coherent across the whole sequence.
pub struct CrosstalkExecutor {
    group: &'static CliffordGroup,
    qubit: TransmonParams,
    x2: XyPulseParams,
    ct: CrosstalkConfig,
    spam: SpamParams,
    timestep: f64,
}

impl CrosstalkExecutor {
    pub fn new(device: &DeviceModel, qubit: usize, ct: CrosstalkConfig) -> Result<Self, RbError> {
        device.validate()?;
        ct.validate()?;
        if qubit >= device.n_qubits() {
            return Err(DeviceError::InvalidParameter(format!(
                "qubit {qubit} out of range for a {}-qubit device",
                device.n_qubits()
            ))
            .into());
        }
        Ok(Self {
            group: enumerate_group(1),
            qubit: device.qubits[qubit],
            x2: device.x2[qubit],
            ct,
            spam: device.spam,
            timestep: device.timestep,
        })
    }
}

impl SequenceExecutor for CrosstalkExecutor {
    fn group(&self) -> &'static CliffordGroup {
        self.group
    }

    fn mode(&self) -> RbMode {
        RbMode::Simultaneous {
            detuning: self.ct.detuning,
            gate_length: self.ct.gate_length,
        }
    }

    fn sequence_fidelity(
        &self,
        seq: &RbSequence,
        repetitions: u32,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64, RbError> {
        let mut psi: Array1<C64> = Array1::zeros(3);
        psi[0] = C64::new(1.0, 0.0);
        let mut t = 0.0;
        for &e in &seq.played_order() {
            let (next, t_next) = crate::device::apply_crosstalk_clifford(
                &psi,
                self.group.element(e),
                &self.ct,
                &self.qubit,
                &self.x2,
                t,
                self.timestep,
            )?;
            psi = next;
            t = t_next;
        }
        let p = ground_report_probability(&psi, &self.spam)?;
        Ok(sample_fraction(p, repetitions, rng))
    }
}

/// Fixed-depth bleedthrough map over aggressor detuning and gate length.
#[derive(Clone, Debug, Serialize)]
pub struct CrosstalkMap {
    pub detunings: Vec<f64>,
    pub gate_lengths: Vec<f64>,
    /// Mean sequence fidelity per cell, indexed `[detuning][gate_length]`.
    pub fidelity: Vec<Vec<f64>>,
    /// Added error per Clifford inferred through the reference decay.
    pub inferred_error: Vec<Vec<f64>>,
    pub m: usize,
    pub k: usize,
}

/// Sweep the aggressor over a detuning-by-gate-length grid at one sequence
/// depth.  The aggressor keeps a fixed pulse area, so its amplitude falls as
/// its gate length grows.  Each cell's mean fidelity is read against
/// `reference` to infer the added error; cells are independent and keyed by
/// (cell, sequence) index, so the map is deterministic under any thread
/// count.
#[allow(clippy::too_many_arguments)]
pub fn crosstalk_map(
    device: &DeviceModel,
    qubit: usize,
    pulse_area: f64,
    relative_coupling: f64,
    detunings: &[f64],
    gate_lengths: &[f64],
    m: usize,
    k: usize,
    repetitions: u32,
    reference: &DecayFit,
    seeds: &crate::seeds::SeedTree,
) -> Result<CrosstalkMap, RbError> {
    if detunings.is_empty() || gate_lengths.is_empty() {
        return Err(RbError::OutOfRange {
            name: "grid",
            value: 0.0,
            range: "at least one detuning and one gate length",
        });
    }
    super::check_depths(&[m], k)?;
    let cells: Vec<(usize, usize)> = (0..detunings.len())
        .flat_map(|i| (0..gate_lengths.len()).map(move |j| (i, j)))
        .collect();
    let means: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| -> Result<f64, RbError> {
            let ct = CrosstalkConfig::with_fixed_area(
                pulse_area,
                gate_lengths[j],
                detunings[i],
                relative_coupling,
            );
            let exec = CrosstalkExecutor::new(device, qubit, ct)?;
            let mut total = 0.0;
            for ki in 0..k {
                let mut rng = seeds.rng(&[i as u64, j as u64, ki as u64]);
                let seq = exec.group().sample_sequence(m, None, &mut rng);
                total += exec.sequence_fidelity(&seq, repetitions, &mut rng)?;
            }
            Ok(total / k as f64)
        })
        .collect::<Result<_, _>>()?;
    let mut fidelity = vec![vec![0.0; gate_lengths.len()]; detunings.len()];
    let mut inferred = vec![vec![0.0; gate_lengths.len()]; detunings.len()];
    for (&(i, j), &mean) in cells.iter().zip(&means) {
        fidelity[i][j] = mean;
        inferred[i][j] = infer_error_at_m(mean, reference, m)?.r;
    }
    Ok(CrosstalkMap {
        detunings: detunings.to_vec(),
        gate_lengths: gate_lengths.to_vec(),
        fidelity,
        inferred_error: inferred,
        m,
        k,
    })
}
