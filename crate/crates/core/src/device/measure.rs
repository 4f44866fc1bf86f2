//! Ground-state readout with preparation and readout errors.
//!
//! Readout is a threshold detector per qubit: a qubit in |0> reports ground
//! with probability 1 - e0, and a qubit in |1> or any higher level reports
//! ground with probability e1 (leakage reads as "not ground").  Preparation
//! fails independently per qubit with probability p; a failed qubit starts
//! excited and stays outside the tracked dynamics, so at readout it reports
//! ground only through the e1 channel.

use ndarray::Array1;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::params::{DeviceError, SpamParams};

fn qubit_count(dim: usize) -> Result<usize, DeviceError> {
    match dim {
        3 => Ok(1),
        9 => Ok(2),
        got => Err(DeviceError::DimensionMismatch { got, want: 3 }),
    }
}

/// Level of qubit q in basis state index i of an n-qubit qudit register.
fn level_of(i: usize, q: usize, n: usize) -> usize {
    (i / 3usize.pow((n - 1 - q) as u32)) % 3
}

/// Probability that every qubit reports ground, exactly.
pub fn ground_report_probability(
    state: &Array1<C64>,
    spam: &SpamParams,
) -> Result<f64, DeviceError> {
    let n = qubit_count(state.len())?;
    let r0 = |level: usize| {
        if level == 0 {
            1.0 - spam.readout_error_0
        } else {
            spam.readout_error_1
        }
    };
    let mut total = 0.0;
    // Branch over which qubits failed preparation.
    for failed in 0..(1usize << n) {
        let mut branch = 1.0;
        for q in 0..n {
            branch *= if failed >> q & 1 == 1 {
                spam.prep_error * spam.readout_error_1
            } else {
                1.0 - spam.prep_error
            };
        }
        if branch == 0.0 {
            continue;
        }
        let mut expect = 0.0;
        for (i, amp) in state.iter().enumerate() {
            let p = amp.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let mut read = 1.0;
            for q in 0..n {
                if failed >> q & 1 == 0 {
                    read *= r0(level_of(i, q, n));
                }
            }
            expect += p * read;
        }
        total += branch * expect;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Measured fraction for a known success probability: exact when
/// `repetitions` is 0, otherwise a binomial sample of that many shots
/// divided by the shot count.
pub fn sample_fraction(p: f64, repetitions: u32, rng: &mut impl Rng) -> f64 {
    // A non-finite probability (an unstable predistortion filter can blow
    // up a waveform into NaN amplitudes) propagates unchanged so callers
    // can apply their own worst-rank policy instead of panicking here.
    if !p.is_finite() {
        return p;
    }
    let p = p.clamp(0.0, 1.0);
    if repetitions == 0 {
        return p;
    }
    let hits = Binomial::new(repetitions as u64, p)
        .expect("probability is clamped to [0, 1]")
        .sample(rng);
    hits as f64 / repetitions as f64
}

/// Measured ground fraction: exact when `repetitions` is 0, otherwise a
/// binomial sample of that many shots divided by the shot count.
pub fn measure_ground_probability(
    state: &Array1<C64>,
    spam: &SpamParams,
    repetitions: u32,
    rng: &mut impl Rng,
) -> Result<f64, DeviceError> {
    let p = ground_report_probability(state, spam)?;
    Ok(sample_fraction(p, repetitions, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::SeedTree;

    fn pure(dim: usize, idx: usize) -> Array1<C64> {
        let mut s = Array1::zeros(dim);
        s[idx] = C64::new(1.0, 0.0);
        s
    }

    #[test]
    fn ground_state_with_readout_error_only() {
        let spam = SpamParams {
            prep_error: 0.0,
            readout_error_0: 0.05,
            readout_error_1: 0.0,
        };
        let p = ground_report_probability(&pure(3, 0), &spam).unwrap();
        assert!((p - 0.95).abs() < 1e-15);
    }

    #[test]
    fn excited_and_leaked_states_read_through_e1() {
        let spam = SpamParams {
            prep_error: 0.0,
            readout_error_0: 0.05,
            readout_error_1: 0.07,
        };
        for idx in [1, 2] {
            let p = ground_report_probability(&pure(3, idx), &spam).unwrap();
            assert!((p - 0.07).abs() < 1e-15, "level {idx}");
        }
    }

    #[test]
    fn single_qubit_branch_formula() {
        let spam = SpamParams {
            prep_error: 0.01,
            readout_error_0: 0.05,
            readout_error_1: 0.07,
        };
        let mut s = Array1::zeros(3);
        s[0] = C64::new(0.8f64.sqrt(), 0.0);
        s[1] = C64::new(0.2f64.sqrt(), 0.0);
        let p = ground_report_probability(&s, &spam).unwrap();
        let expect = 0.99 * (0.8 * 0.95 + 0.2 * 0.07) + 0.01 * 0.07;
        assert!((p - expect).abs() < 1e-15);
    }

    #[test]
    fn two_qubit_branches_multiply_per_qubit() {
        let spam = SpamParams {
            prep_error: 0.01,
            readout_error_0: 0.05,
            readout_error_1: 0.07,
        };
        // |02>: first qubit ground, second leaked.
        let p = ground_report_probability(&pure(9, 2), &spam).unwrap();
        let ok = 1.0 - 0.01;
        let fail = 0.01 * 0.07;
        let expect = ok * ok * (0.95 * 0.07)
            + fail * ok * 0.07
            + ok * fail * 0.95
            + fail * fail;
        assert!((p - expect).abs() < 1e-15);
    }

    #[test]
    fn perfect_spam_is_transparent() {
        let mut s = Array1::zeros(9);
        s[0] = C64::new(0.6f64.sqrt(), 0.0);
        s[4] = C64::new(0.4f64.sqrt(), 0.0);
        let p = ground_report_probability(&s, &SpamParams::NONE).unwrap();
        assert!((p - 0.6).abs() < 1e-15);
    }

    #[test]
    fn sampled_mode_fluctuates_around_the_exact_value() {
        let spam = SpamParams::default();
        let mut s = Array1::zeros(3);
        s[0] = C64::new(0.7f64.sqrt(), 0.0);
        s[1] = C64::new(0.3f64.sqrt(), 0.0);
        let exact = ground_report_probability(&s, &spam).unwrap();
        let mut rng = SeedTree::new(11).rng(&[0]);
        let n = 4000u32;
        let mut mean = 0.0;
        let trials = 200;
        for _ in 0..trials {
            mean += measure_ground_probability(&s, &spam, n, &mut rng).unwrap();
        }
        mean /= trials as f64;
        // Standard error of the mean of 200 binomial fractions.
        let se = (exact * (1.0 - exact) / (n as f64 * trials as f64)).sqrt();
        assert!((mean - exact).abs() < 5.0 * se, "mean {mean} vs {exact}");
    }

    #[test]
    fn zero_repetitions_is_exact_and_deterministic() {
        let spam = SpamParams::default();
        let s = pure(3, 0);
        let mut rng = SeedTree::new(12).rng(&[0]);
        let a = measure_ground_probability(&s, &spam, 0, &mut rng).unwrap();
        let b = measure_ground_probability(&s, &spam, 0, &mut rng).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn wrong_dimension_is_an_error() {
        let s = pure(4, 0);
        assert!(ground_report_probability(&s, &SpamParams::NONE).is_err());
    }
}
