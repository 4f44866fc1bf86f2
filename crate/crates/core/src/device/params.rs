//! Parameter types for the simulated device.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("state is not normalized: |psi| = {0}")]
    NotNormalized(f64),
    #[error("state dimension {got} does not match device dimension {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("empty waveform")]
    EmptyWaveform,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// One three-level transmon: |0>, |1> at f10, |2> at 2 f10 + anharmonicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransmonParams {
    /// Qubit transition frequency f10 in GHz.
    pub f10: f64,
    /// Anharmonicity Δ/2π in GHz, negative for a transmon.
    pub anharmonicity: f64,
}

impl TransmonParams {
    pub fn validate(&self) -> Result<(), DeviceError> {
        if self.anharmonicity == 0.0 || !self.anharmonicity.is_finite() {
            return Err(DeviceError::InvalidParameter(
                "anharmonicity must be finite and nonzero".into(),
            ));
        }
        if !(self.f10.is_finite() && self.f10 > 0.0) {
            return Err(DeviceError::InvalidParameter("f10 must be positive".into()));
        }
        Ok(())
    }

    /// First-to-second excited transition frequency, f10 + Δ/2π.
    pub fn f21(&self) -> f64 {
        self.f10 + self.anharmonicity
    }
}

/// Microwave pulse with cosine envelope and derivative quadrature correction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XyPulseParams {
    /// Peak Rabi rate in GHz; the envelope is (A/2)(1 - cos 2πt/t_g).
    pub amplitude: f64,
    /// Drive carrier frequency in GHz.
    pub drive_frequency: f64,
    /// Quadrature coefficient: E_y = α Ė_x / (2π Δ).
    pub drag_coefficient: f64,
    /// Pulse length in ns.
    pub gate_length: f64,
}

impl XyPulseParams {
    pub fn validate(&self) -> Result<(), DeviceError> {
        if !(self.gate_length > 0.0) {
            return Err(DeviceError::InvalidParameter(
                "gate_length must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Adiabatic CZ frequency excursion for the higher (moving) qubit.
///
/// `params` layout:
///   0: excursion depth (GHz, downward from idle)
///   1: ramp time (ns)
///   2: hold time (ns)
///   3: shoulder coefficient (sin π τ/t_r term of the ramp)
///   4: ramp Fourier coefficient (sin 2π τ/t_r)
///   5: ramp Fourier coefficient (sin 3π τ/t_r)
///   6: phase correction on the static qubit (rad)
///   7: phase correction on the moving qubit (rad)
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CzTrajectoryParams {
    pub params: [f64; 8],
    /// Total gate window in ns; ramps and hold are centered inside it.
    pub total_time: f64,
    /// Exchange coupling g/2π in GHz.
    pub coupling: f64,
}

impl CzTrajectoryParams {
    pub fn validate(&self) -> Result<(), DeviceError> {
        if !(self.total_time > 0.0) {
            return Err(DeviceError::InvalidParameter(
                "total_time must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Which way a line response is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LineRole {
    /// Physical distortion: convolve with the step response Θ'.
    Forward,
    /// Predistortion: apply the exact inverse of the Forward filter with the
    /// same poles.
    Inverse,
}

/// Step response Θ'(t) = Θ(t)[1 + Σ a_i exp(-γ_i t)] of a control line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineResponse {
    /// (amplitude a_i, rate γ_i in 1/ns) pairs.
    pub poles: Vec<(f64, f64)>,
    pub role: LineRole,
}

impl LineResponse {
    pub fn forward(poles: Vec<(f64, f64)>) -> Self {
        Self {
            poles,
            role: LineRole::Forward,
        }
    }

    pub fn inverse(poles: Vec<(f64, f64)>) -> Self {
        Self {
            poles,
            role: LineRole::Inverse,
        }
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        for &(_, g) in &self.poles {
            if !(g > 0.0) {
                return Err(DeviceError::InvalidParameter(
                    "line response rates must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Square detuning pulse on the frequency-control line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepPulseParams {
    /// Frequency detuning during the step, GHz.
    pub detuning: f64,
    /// Step duration, ns.
    pub duration: f64,
    /// Simulated window after the step falls, ns.
    pub observation_window: f64,
}

impl StepPulseParams {
    pub fn validate(&self) -> Result<(), DeviceError> {
        if !(self.duration > 0.0) {
            return Err(DeviceError::InvalidParameter(
                "step duration must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// State-preparation and readout error model.  Leakage levels read as
/// "not ground".
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpamParams {
    pub prep_error: f64,
    pub readout_error_0: f64,
    pub readout_error_1: f64,
}

impl SpamParams {
    pub const NONE: SpamParams = SpamParams {
        prep_error: 0.0,
        readout_error_0: 0.0,
        readout_error_1: 0.0,
    };

    pub fn validate(&self) -> Result<(), DeviceError> {
        for (name, p) in [
            ("prep_error", self.prep_error),
            ("readout_error_0", self.readout_error_0),
            ("readout_error_1", self.readout_error_1),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(DeviceError::InvalidParameter(format!(
                    "{name} must be in [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

impl Default for SpamParams {
    /// Offsets chosen so the decay amplitude sits visibly below 0.5 and the
    /// floor above it.
    fn default() -> Self {
        SpamParams {
            prep_error: 0.01,
            readout_error_0: 0.05,
            readout_error_1: 0.07,
        }
    }
}

/// Classical aggressor drive leaking onto the victim qubit's line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrosstalkConfig {
    /// Aggressor carrier offset from the victim f10, GHz.
    pub detuning: f64,
    /// Aggressor pulse length, ns.
    pub gate_length: f64,
    /// Aggressor peak amplitude in GHz; amplitude * gate_length is held at a
    /// fixed pulse area across a sweep.
    pub amplitude: f64,
    /// Fraction of the aggressor amplitude reaching the victim.
    pub relative_coupling: f64,
}

impl CrosstalkConfig {
    /// Build with the fixed-area rule: amplitude = area / gate_length.
    pub fn with_fixed_area(
        area: f64,
        gate_length: f64,
        detuning: f64,
        relative_coupling: f64,
    ) -> Self {
        CrosstalkConfig {
            detuning,
            gate_length,
            amplitude: area / gate_length,
            relative_coupling,
        }
    }

    pub fn pulse_area(&self) -> f64 {
        self.amplitude * self.gate_length
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        if !(self.gate_length > 0.0) {
            return Err(DeviceError::InvalidParameter(
                "crosstalk gate_length must be positive".into(),
            ));
        }
        Ok(())
    }
}
