//! Scalar metrics derived from decay fits: interleaved-gate error, the most
//! sensitive sequence depth, and the reference-error budget.

use serde::Serialize;

use super::RbError;

/// Interleaved-gate error from the ratio of decay scales.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GateErrorEstimate {
    pub r: f64,
    /// Set when the interleaved decay is slower than the reference
    /// (p_gate > p_ref), which makes the estimate negative.  Negative
    /// estimates are statistical artifacts near the measurement floor; they
    /// are reported as-is, never clamped.
    pub suspect: bool,
}

/// Error of the interleaved gate: r = (1 - p_gate/p_ref)(d - 1)/d.
pub fn gate_error(p_gate: f64, p_ref: f64, qubit_count: u8) -> Result<GateErrorEstimate, RbError> {
    if !(p_ref > 0.0 && p_ref <= 1.0) {
        return Err(RbError::OutOfRange {
            name: "p_ref",
            value: p_ref,
            range: "(0, 1]; a vanishing reference decay cannot be ratioed",
        });
    }
    if !(0.0..=1.0).contains(&p_gate) {
        return Err(RbError::OutOfRange {
            name: "p_gate",
            value: p_gate,
            range: "[0, 1]",
        });
    }
    let d = f64::from(1u32 << qubit_count);
    Ok(GateErrorEstimate {
        r: (1.0 - p_gate / p_ref) * (d - 1.0) / d,
        suspect: p_gate > p_ref,
    })
}

fn check_rate(r: f64) -> Result<(), RbError> {
    if !(r > 0.0 && r < 0.5) {
        return Err(RbError::OutOfRange {
            name: "r",
            value: r,
            range: "(0, 0.5)",
        });
    }
    Ok(())
}

/// Depth at which sequence fidelity is most sensitive to a single-qubit
/// error rate r: m' = -1/ln(1 - 2r), from maximizing m (1 - 2r)^(m - 1)
/// over continuous m.
pub fn optimal_m(r: f64) -> Result<f64, RbError> {
    check_rate(r)?;
    Ok(-1.0 / (1.0 - 2.0 * r).ln())
}

/// Sensitivity of mean sequence fidelity to the error rate at a given depth
/// and at the most sensitive depth.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Sensitivity {
    /// dF/dr at the requested depth: -2 A m (1 - 2r)^(m - 1).
    pub at_m: f64,
    /// dF/dr at m' = -1/ln(1 - 2r): 2 A / (e (1 - 2r) ln(1 - 2r)).
    pub at_optimal: f64,
    /// Fractional sensitivity r dF/dr at m', approximately -A/e and nearly
    /// independent of r.
    pub fractional: f64,
}

/// Evaluate the decay's sensitivity to r for amplitude `a` at continuous
/// depth `m` (single-qubit convention p = 1 - 2r).
pub fn sensitivity(r: f64, a: f64, m: f64) -> Result<Sensitivity, RbError> {
    check_rate(r)?;
    if !(m >= 0.0) {
        return Err(RbError::OutOfRange {
            name: "m",
            value: m,
            range: "nonnegative",
        });
    }
    let p = 1.0 - 2.0 * r;
    let at_optimal = 2.0 * a / (std::f64::consts::E * p * p.ln());
    Ok(Sensitivity {
        at_m: -2.0 * a * m * p.powf(m - 1.0),
        at_optimal,
        fractional: r * at_optimal,
    })
}

/// Reference error per two-qubit element predicted from its average
/// physical content: 8.25 single-qubit slots and 1.5 entanglers.
pub fn expected_reference_error(r_sq: f64, r_cz: f64) -> f64 {
    8.25 * r_sq + 1.5 * r_cz
}
