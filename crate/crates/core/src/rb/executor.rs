//! Sequence executors: strategies for turning a sampled Clifford sequence
//! into one sequence-fidelity number.
//!
//! The analytic executors (ideal, depolarizing) exist as oracles and fast
//! stand-ins; the pulse executors play every physical gate propagator of the
//! device model and push the final state through its readout model.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{RbError, RbMode};
use crate::clifford::{enumerate_group, CliffordGroup, Gate, RbSequence, SqGate};
use crate::device::{
    ground_report_probability, sample_fraction, DeviceError, DeviceModel, SpamParams,
};
use crate::linalg::kron;

/// Plays sampled sequences.  The fidelity generator arrives positioned right
/// after the sequence draw and must be this executor's only randomness
/// source, so that a (depth, sequence) pair fully determines the outcome.
pub trait SequenceExecutor: Sync {
    /// Group sequences are drawn from.
    fn group(&self) -> &'static CliffordGroup;

    /// Group element inserted after every random Clifford, if any.
    fn interleave(&self) -> Option<usize> {
        None
    }

    /// Mode tag recorded on curves produced with this executor.
    fn mode(&self) -> RbMode;

    /// Ground-report fraction after playing one sequence; exact when
    /// `repetitions` is 0.
    fn sequence_fidelity(
        &self,
        seq: &RbSequence,
        repetitions: u32,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64, RbError>;
}

fn ground(dim: usize) -> Array1<C64> {
    let mut s = Array1::zeros(dim);
    s[0] = C64::new(1.0, 0.0);
    s
}

fn slot(gate: SqGate) -> usize {
    SqGate::ALL
        .iter()
        .position(|&g| g == gate)
        .expect("gate list covers every variant")
}

fn check_probability(name: &'static str, p: f64) -> Result<(), RbError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(RbError::OutOfRange {
            name,
            value: p,
            range: "[0, 1]",
        });
    }
    Ok(())
}

/// Ground-report probability of each computational basis state under the
/// given readout model, indexed by qubit bitstring (qubit 0 is the high
/// bit).
fn basis_reports(n_qubits: u8, spam: &SpamParams) -> Vec<f64> {
    let d = 1usize << n_qubits;
    let dim = 3usize.pow(u32::from(n_qubits));
    (0..d)
        .map(|b| {
            let level_index = match n_qubits {
                1 => b,
                _ => 3 * (b >> 1) + (b & 1),
            };
            let mut s = Array1::zeros(dim);
            s[level_index] = C64::new(1.0, 0.0);
            ground_report_probability(&s, spam).expect("basis state is normalized")
        })
        .collect()
}

/// Ground-report probability of the fully depolarized computational-basis
/// mixture: the floor B that reference decays approach under this readout
/// model.
pub fn spam_floor(n_qubits: u8, spam: &SpamParams) -> f64 {
    let reports = basis_reports(n_qubits, spam);
    reports.iter().sum::<f64>() / reports.len() as f64
}

/// Perfect gates and noise-free readout in the qubit subspace.  Recovery
/// makes every word the identity, so fidelity is exactly one; this executor
/// pins conventions down in tests and exposes the shot-only noise case.
pub struct IdealExecutor {
    group: &'static CliffordGroup,
    interleaved: Option<usize>,
}

impl IdealExecutor {
    pub fn new(n_qubits: u8) -> Self {
        Self {
            group: enumerate_group(n_qubits),
            interleaved: None,
        }
    }

    pub fn with_interleaved(mut self, element: usize) -> Self {
        self.interleaved = Some(element);
        self
    }
}

impl SequenceExecutor for IdealExecutor {
    fn group(&self) -> &'static CliffordGroup {
        self.group
    }

    fn interleave(&self) -> Option<usize> {
        self.interleaved
    }

    fn mode(&self) -> RbMode {
        match self.interleaved {
            None => RbMode::Reference,
            Some(i) => RbMode::Interleaved {
                gate: format!("element-{i}"),
            },
        }
    }

    fn sequence_fidelity(
        &self,
        seq: &RbSequence,
        repetitions: u32,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64, RbError> {
        // Compose in the label algebra: the net element of a recovered
        // sequence is the identity, whose stored unitary is an exact eye,
        // so survival carries no floating-point residue.
        let net = seq
            .played_order()
            .iter()
            .fold(self.group.identity_index(), |acc, &e| {
                self.group.compose(acc, e)
            });
        let survival = self.group.element(net).unitary[[0, 0]].norm_sqr();
        Ok(sample_fraction(survival, repetitions, rng))
    }
}

/// Analytic noise injection: every random Clifford acts ideally and is
/// followed by a depolarizing channel of scale `p_clifford`; the optional
/// interleaved slot carries a second channel of scale `p_gate` attached to
/// an ideal identity element.  Survival is evaluated in closed form and
/// pushed through the readout model, which makes the expected decay exactly
/// A p^m + B with A and B set by state preparation and readout alone.
pub struct DepolarizingExecutor {
    group: &'static CliffordGroup,
    p_clifford: f64,
    p_gate: Option<f64>,
    reports: Vec<f64>,
}

impl DepolarizingExecutor {
    pub fn new(n_qubits: u8, p_clifford: f64, spam: SpamParams) -> Result<Self, RbError> {
        check_probability("p_clifford", p_clifford)?;
        Ok(Self {
            group: enumerate_group(n_qubits),
            p_clifford,
            p_gate: None,
            reports: basis_reports(n_qubits, &spam),
        })
    }

    /// Interleave an identity element carrying its own depolarizing channel
    /// of scale `p_gate`.  The ideal word is unchanged; only the injected
    /// channel differs from the reference.
    pub fn with_interleaved(mut self, p_gate: f64) -> Result<Self, RbError> {
        check_probability("p_gate", p_gate)?;
        self.p_gate = Some(p_gate);
        Ok(self)
    }
}

impl SequenceExecutor for DepolarizingExecutor {
    fn group(&self) -> &'static CliffordGroup {
        self.group
    }

    fn interleave(&self) -> Option<usize> {
        self.p_gate.map(|_| self.group.identity_index())
    }

    fn mode(&self) -> RbMode {
        match self.p_gate {
            None => RbMode::Reference,
            Some(_) => RbMode::Interleaved {
                gate: "injected-channel".into(),
            },
        }
    }

    fn sequence_fidelity(
        &self,
        seq: &RbSequence,
        repetitions: u32,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64, RbError> {
        let per_step = self.p_clifford * self.p_gate.unwrap_or(1.0);
        let w = per_step.powi(seq.m as i32);
        let d = self.reports.len() as f64;
        // Depolarized state: weight w on the ideal (ground) outcome, the
        // rest uniform over the computational basis.
        let reported = self
            .reports
            .iter()
            .enumerate()
            .map(|(b, &rep)| {
                let pop = if b == 0 { w + (1.0 - w) / d } else { (1.0 - w) / d };
                pop * rep
            })
            .sum::<f64>();
        Ok(sample_fraction(reported, repetitions, rng))
    }
}

// Frequency-shift phase on one transmon: |1> advances by theta, |2> by twice
// that.  Serves the control-line phases of step-interleaved sequences.
pub(super) fn phase_kick(psi: &mut Array1<C64>, theta: f64) {
    psi[1] *= C64::from_polar(1.0, theta);
    psi[2] *= C64::from_polar(1.0, 2.0 * theta);
}

/// Control-noise channel: the exact average of a rotation of the qubit
/// block by a Gaussian-width angle about a uniformly random Bloch axis.
/// Every shot of a sequence sees a fresh noise draw, so the reported
/// success probability is this average, and propagating it in closed form
/// keeps exact mode deterministic.  Averaging over the axis leaves a
/// depolarizing channel on the block (isotropy is what keeps benchmarking
/// decays single-exponential; a fixed noise axis would protect the
/// population sector and split the decay into two exponentials), and the
/// coherences against |2> damp by the mean rotation half-angle cosine.
struct NoiseChannel {
    /// Weight of the input block.
    keep: f64,
    /// Weight of tr(block) added to each block diagonal.
    mix: f64,
    /// Damping of the 0-2 and 1-2 coherences.
    edge: f64,
}

impl NoiseChannel {
    fn new(sigma: f64) -> Self {
        // E[cos^2(theta/2)] and E[cos(theta/2)] for theta ~ N(0, sigma).
        let c2 = 0.5 * (1.0 + (-0.5 * sigma * sigma).exp());
        let s2 = 1.0 - c2;
        NoiseChannel {
            keep: c2 - s2 / 3.0,
            mix: 2.0 * s2 / 3.0,
            edge: (-sigma * sigma / 8.0).exp(),
        }
    }

    /// Apply to the qutrit at `stride` within a density matrix whose other
    /// factor ranges over `bases` (a lone qutrit is stride 1, base 0).
    fn apply(&self, rho: &mut Array2<C64>, stride: usize, bases: &[usize]) {
        for &bi in bases {
            for &bj in bases {
                let idx = |a: usize, b: usize| (bi + stride * a, bj + stride * b);
                let t = rho[idx(0, 0)] + rho[idx(1, 1)];
                for a in 0..2 {
                    for b in 0..2 {
                        rho[idx(a, b)] *= self.keep;
                    }
                }
                rho[idx(0, 0)] += self.mix * t;
                rho[idx(1, 1)] += self.mix * t;
                for a in 0..2 {
                    rho[idx(a, 2)] *= self.edge;
                    rho[idx(2, a)] *= self.edge;
                }
            }
        }
    }
}

// rho -> U rho U(dagger) with a precomputed dagger.
fn conjugate(rho: &Array2<C64>, u: &Array2<C64>, u_dag: &Array2<C64>) -> Array2<C64> {
    u.dot(rho).dot(u_dag)
}

fn dagger(u: &Array2<C64>) -> Array2<C64> {
    u.t().mapv(|z| z.conj())
}

fn ground_density(dim: usize) -> Array2<C64> {
    let mut rho = Array2::zeros((dim, dim));
    rho[[0, 0]] = C64::new(1.0, 0.0);
    rho
}

/// Plays single-qubit sequences with the device's calibrated pulse
/// propagators on one qubit, with an optional control-noise kick after
/// every played pulse, and measures through the device's readout model.
pub struct SingleQubitPulse {
    group: &'static CliffordGroup,
    gates: Vec<Array2<C64>>,
    spam: SpamParams,
    noise_sigma: f64,
    interleaved: Option<(usize, String)>,
}

impl SingleQubitPulse {
    pub fn new(device: &DeviceModel, qubit: usize) -> Result<Self, RbError> {
        device.validate()?;
        if qubit >= device.n_qubits() {
            return Err(DeviceError::InvalidParameter(format!(
                "qubit {qubit} out of range for a {}-qubit device",
                device.n_qubits()
            ))
            .into());
        }
        let gates = SqGate::ALL
            .iter()
            .map(|&g| device.sq_unitary(qubit, g))
            .collect();
        Ok(Self {
            group: enumerate_group(1),
            gates,
            spam: device.spam,
            noise_sigma: device.noise_sigma,
            interleaved: None,
        })
    }

    /// Interleave the group element realized by one physical gate.
    pub fn with_interleaved_gate(mut self, gate: SqGate) -> Self {
        let index = self
            .group
            .lookup(&gate.unitary())
            .expect("every physical gate realizes a group element");
        self.interleaved = Some((index, gate.to_string()));
        self
    }
}

impl SequenceExecutor for SingleQubitPulse {
    fn group(&self) -> &'static CliffordGroup {
        self.group
    }

    fn interleave(&self) -> Option<usize> {
        self.interleaved.as_ref().map(|(i, _)| *i)
    }

    fn mode(&self) -> RbMode {
        match &self.interleaved {
            None => RbMode::Reference,
            Some((_, label)) => RbMode::Interleaved {
                gate: label.clone(),
            },
        }
    }

    fn sequence_fidelity(
        &self,
        seq: &RbSequence,
        repetitions: u32,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64, RbError> {
        // Noiseless sequences stay on the state-vector fast path; with
        // noise the state mixes, so the density matrix carries the exact
        // shot-averaged outcome instead.
        let p = if self.noise_sigma > 0.0 {
            let channel = NoiseChannel::new(self.noise_sigma);
            let dags: Vec<Array2<C64>> = self.gates.iter().map(dagger).collect();
            let mut rho = ground_density(3);
            for &e in &seq.played_order() {
                for g in &self.group.element(e).decomposition {
                    let Gate::Sq { gate, .. } = g else {
                        unreachable!("single-qubit decompositions hold no entangler")
                    };
                    rho = conjugate(&rho, &self.gates[slot(*gate)], &dags[slot(*gate)]);
                    if *gate != SqGate::I {
                        channel.apply(&mut rho, 1, &[0]);
                    }
                }
            }
            ground_report_populations(&rho, &self.spam)?
        } else {
            let mut psi = ground(3);
            for &e in &seq.played_order() {
                for g in &self.group.element(e).decomposition {
                    let Gate::Sq { gate, .. } = g else {
                        unreachable!("single-qubit decompositions hold no entangler")
                    };
                    psi = self.gates[slot(*gate)].dot(&psi);
                }
            }
            ground_report_probability(&psi, &self.spam)?
        };
        Ok(sample_fraction(p, repetitions, rng))
    }
}

/// One synchronous step of a two-qubit schedule: both qubits play a
/// single-qubit slot in parallel, or both enter the entangling gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotOp {
    Pair(SqGate, SqGate),
    Cz,
}

fn flush_pairs(out: &mut Vec<SlotOp>, q0: &mut Vec<SqGate>, q1: &mut Vec<SqGate>) {
    let n = q0.len().max(q1.len());
    for i in 0..n {
        out.push(SlotOp::Pair(
            q0.get(i).copied().unwrap_or(SqGate::I),
            q1.get(i).copied().unwrap_or(SqGate::I),
        ));
    }
    q0.clear();
    q1.clear();
}

/// Pair the per-qubit gate streams of a two-qubit decomposition into
/// synchronous slots.  The entangler is a barrier: both queues flush
/// (shorter one padded with identity slots) before it fires.  Single-qubit
/// factors on different qubits commute, so the slotted product equals the
/// decomposition's ideal unitary.
pub fn schedule_slots(decomposition: &[Gate]) -> Vec<SlotOp> {
    let mut out = Vec::new();
    let mut q0 = Vec::new();
    let mut q1 = Vec::new();
    for g in decomposition {
        match g {
            Gate::Sq { qubit: 0, gate } => q0.push(*gate),
            Gate::Sq { gate, .. } => q1.push(*gate),
            Gate::Cz => {
                flush_pairs(&mut out, &mut q0, &mut q1);
                out.push(SlotOp::Cz);
            }
        }
    }
    flush_pairs(&mut out, &mut q0, &mut q1);
    out
}

/// Plays two-qubit sequences on a calibrated pair: cached single-qubit slot
/// propagators (both qubits driven simultaneously, idle slots padded with
/// the identity pulse) and the cached entangling-gate propagator, scheduled
/// by `schedule_slots`.  Qubits are modeled as uncoupled during single-qubit
/// slots; the static exchange acts inside the entangling window.
#[derive(Clone)]
pub struct TwoQubitPulse {
    group: &'static CliffordGroup,
    slots: Vec<Array2<C64>>,
    cz: Array2<C64>,
    spam: SpamParams,
    noise_sigma: f64,
    cz_kick_scale: f64,
    interleaved: Option<usize>,
}

impl TwoQubitPulse {
    pub fn new(device: &DeviceModel) -> Result<Self, RbError> {
        device.validate()?;
        if device.n_qubits() != 2 {
            return Err(
                DeviceError::InvalidParameter("two-qubit executor needs a pair".into()).into(),
            );
        }
        let Some(traj) = &device.cz else {
            return Err(DeviceError::InvalidParameter(
                "pair has no entangling-gate trajectory".into(),
            )
            .into());
        };
        let sq0: Vec<Array2<C64>> = SqGate::ALL
            .iter()
            .map(|&g| device.sq_unitary(0, g))
            .collect();
        let sq1: Vec<Array2<C64>> = SqGate::ALL
            .iter()
            .map(|&g| device.sq_unitary(1, g))
            .collect();
        let slots = sq0
            .iter()
            .flat_map(|a| sq1.iter().map(|b| kron(a, b)))
            .collect();
        Ok(Self {
            group: enumerate_group(2),
            slots,
            cz: device.cz_unitary(),
            spam: device.spam,
            noise_sigma: device.noise_sigma,
            cz_kick_scale: (traj.total_time / device.slot_length()).sqrt(),
            interleaved: None,
        })
    }

    /// Replace the entangling-window propagator with one propagated from
    /// `device`'s trajectory, reusing the cached single-qubit slots.  The
    /// single-qubit calibration must match the one this executor was built
    /// from; only the trajectory may differ.
    pub fn retune_entangler(&mut self, device: &DeviceModel) -> Result<(), RbError> {
        device.validate()?;
        let Some(traj) = &device.cz else {
            return Err(DeviceError::InvalidParameter(
                "pair has no entangling-gate trajectory".into(),
            )
            .into());
        };
        self.cz = device.cz_unitary();
        self.cz_kick_scale = (traj.total_time / device.slot_length()).sqrt();
        Ok(())
    }

    /// Interleave the group element realized by the bare entangling gate.
    pub fn with_interleaved_cz(mut self) -> Self {
        let mut ideal: Array2<C64> = Array2::eye(4);
        ideal[[3, 3]] = C64::new(-1.0, 0.0);
        let index = self
            .group
            .lookup(&ideal)
            .expect("the entangler realizes a group element");
        self.interleaved = Some(index);
        self
    }
}

impl SequenceExecutor for TwoQubitPulse {
    fn group(&self) -> &'static CliffordGroup {
        self.group
    }

    fn interleave(&self) -> Option<usize> {
        self.interleaved
    }

    fn mode(&self) -> RbMode {
        match self.interleaved {
            None => RbMode::Reference,
            Some(_) => RbMode::Interleaved { gate: "CZ".into() },
        }
    }

    fn sequence_fidelity(
        &self,
        seq: &RbSequence,
        repetitions: u32,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64, RbError> {
        let width = (self.noise_sigma > 0.0)
            .then(|| Normal::new(0.0, self.noise_sigma).expect("validated sigma"));
        let cz_width = (self.noise_sigma > 0.0).then(|| {
            Normal::new(0.0, self.cz_kick_scale * self.noise_sigma).expect("validated sigma")
        });
        let mut psi = ground(9);
        for &e in &seq.played_order() {
            for op in schedule_slots(&self.group.element(e).decomposition) {
                match op {
                    SlotOp::Pair(g0, g1) => {
                        psi = self.slots[7 * slot(g0) + slot(g1)].dot(&psi);
                        if let Some(w) = &width {
                            for (q, g) in [(0, g0), (1, g1)] {
                                if g != SqGate::I {
                                    kick_pair_qubit(&mut psi, q, &noise_kick(w, rng));
                                }
                            }
                        }
                    }
                    SlotOp::Cz => {
                        psi = self.cz.dot(&psi);
                        if let Some(w) = &cz_width {
                            for q in 0..2 {
                                kick_pair_qubit(&mut psi, q, &noise_kick(w, rng));
                            }
                        }
                    }
                }
            }
        }
        let p = ground_report_probability(&psi, &self.spam)?;
        Ok(sample_fraction(p, repetitions, rng))
    }
}
