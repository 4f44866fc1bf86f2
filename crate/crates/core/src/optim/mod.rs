//! Derivative-free closed-loop tuning: a Nelder-Mead simplex search over a
//! scalar cost with a full evaluation trace, plus bindings that wrap the
//! device's pulse parameters in the fixed-depth sequence-fidelity cost and
//! attach before/after benchmarking runs.

use serde::Serialize;

use crate::rb::RbError;

mod scenarios;

pub use scenarios::{
    optimize_cz, optimize_deconvolution, optimize_x2, CzOptimization, DeconvOptimization,
    PairCheck, RbCheck, StepCheck, X2Optimization,
};

/// Simplex coefficients, initial displacement scales, and stopping rules.
///
/// The search runs internally in units of `scales`, so one config works for
/// parameters of wildly different magnitudes; costs are compared but never
/// averaged, which keeps every decision a rank decision.
#[derive(Clone, Debug, Serialize)]
pub struct NelderMeadConfig {
    /// Reflection coefficient, conventionally 1.
    pub reflection: f64,
    /// Expansion coefficient, conventionally 2.
    pub expansion: f64,
    /// Contraction coefficient, conventionally 1/2.
    pub contraction: f64,
    /// Shrink coefficient, conventionally 1/2.
    pub shrink: f64,
    /// Initial simplex displacement per dimension, in that parameter's own
    /// physical units.  Also the unit in which `simplex_tolerance` is read.
    pub scales: Vec<f64>,
    /// Stop once max minus min cost over the simplex is at or below this;
    /// zero or negative disables the check.  With a sampled cost, set it
    /// near twice the shot-noise scale: once the spread is inside the noise
    /// the ranks are meaningless and further steps are a random walk.
    pub cost_tolerance: f64,
    /// Stop once every vertex lies within this distance of the best vertex
    /// in scale units (max over coordinates); zero or negative disables.
    pub simplex_tolerance: f64,
    /// Hard evaluation budget; the search never calls the cost more often.
    pub max_evaluations: usize,
}

impl NelderMeadConfig {
    /// Standard coefficients with the given displacement scales, a tight
    /// geometric stop, and the given evaluation budget.
    pub fn new(scales: Vec<f64>, max_evaluations: usize) -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            scales,
            cost_tolerance: 0.0,
            simplex_tolerance: 1e-3,
            max_evaluations,
        }
    }

    fn validate(&self, dim: usize) -> Result<(), RbError> {
        if dim == 0 {
            return Err(RbError::OutOfRange {
                name: "parameter count",
                value: 0.0,
                range: "at least 1",
            });
        }
        if self.scales.len() != dim {
            return Err(RbError::OutOfRange {
                name: "scale count",
                value: self.scales.len() as f64,
                range: "one per parameter",
            });
        }
        for &s in &self.scales {
            if !(s > 0.0 && s.is_finite()) {
                return Err(RbError::OutOfRange {
                    name: "simplex scale",
                    value: s,
                    range: "(0, inf)",
                });
            }
        }
        if !(self.reflection > 0.0) {
            return Err(RbError::OutOfRange {
                name: "reflection coefficient",
                value: self.reflection,
                range: "(0, inf)",
            });
        }
        if !(self.expansion > 1.0) {
            return Err(RbError::OutOfRange {
                name: "expansion coefficient",
                value: self.expansion,
                range: "(1, inf)",
            });
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return Err(RbError::OutOfRange {
                name: "contraction coefficient",
                value: self.contraction,
                range: "(0, 1)",
            });
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(RbError::OutOfRange {
                name: "shrink coefficient",
                value: self.shrink,
                range: "(0, 1)",
            });
        }
        if self.max_evaluations < dim + 1 {
            return Err(RbError::OutOfRange {
                name: "evaluation budget",
                value: self.max_evaluations as f64,
                range: "at least dim + 1",
            });
        }
        Ok(())
    }
}

/// One cost evaluation: where, what it cost, and the best cost seen up to
/// and including it.
#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub params: Vec<f64>,
    pub cost: f64,
    pub best_cost: f64,
}

/// Complete record of a search: every evaluation in order, the best point
/// found, and how the run ended.
#[derive(Clone, Debug, Serialize)]
pub struct OptimizationTrace {
    pub steps: Vec<TraceStep>,
    pub best_params: Vec<f64>,
    pub best_cost: f64,
    pub evaluations: usize,
    /// True when a tolerance fired; false when the budget ran out first.
    pub converged: bool,
}

// Bookkeeping shared by every evaluation: physical-unit mapping, the trace,
// and the running best.  Non-finite costs are recorded as +inf so they rank
// strictly worst and serialize consistently; the best never becomes one.
struct Driver<'a, F> {
    cost: F,
    x0: &'a [f64],
    scales: &'a [f64],
    steps: Vec<TraceStep>,
    best_params: Vec<f64>,
    best_cost: f64,
    budget: usize,
}

impl<F: FnMut(&[f64]) -> f64> Driver<'_, F> {
    fn physical(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(self.x0.iter().zip(self.scales))
            .map(|(&yi, (&xi, &si))| xi + yi * si)
            .collect()
    }

    // None once the budget is spent; the caller unwinds without evaluating.
    fn eval(&mut self, y: &[f64]) -> Option<f64> {
        if self.steps.len() >= self.budget {
            return None;
        }
        let x = self.physical(y);
        let raw = (self.cost)(&x);
        let f = if raw.is_finite() { raw } else { f64::INFINITY };
        if f < self.best_cost {
            self.best_cost = f;
            self.best_params = x.clone();
        }
        self.steps.push(TraceStep {
            params: x,
            cost: f,
            best_cost: self.best_cost,
        });
        Some(f)
    }
}

/// Minimize `cost` from `x0` with a Nelder-Mead simplex.
///
/// The cost is treated as a black box: it may be noisy, and a non-finite
/// return is ranked strictly worst rather than aborting the run, so a
/// search can brush against an invalid parameter region and recover.  No
/// point is ever evaluated twice on purpose and no costs are averaged; with
/// a fresh-noise cost the best-so-far is simply the luckiest observation.
///
/// Fails if the cost at `x0` itself is non-finite: a search that cannot
/// rank its own starting point has nothing to improve on.
pub fn nelder_mead(
    cost: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    config: &NelderMeadConfig,
) -> Result<OptimizationTrace, RbError> {
    let dim = x0.len();
    config.validate(dim)?;
    let mut driver = Driver {
        cost,
        x0,
        scales: &config.scales,
        steps: Vec::new(),
        best_params: x0.to_vec(),
        best_cost: f64::INFINITY,
        budget: config.max_evaluations,
    };

    // Vertices in scale units: the start plus one unit step per dimension.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = driver.eval(&vec![0.0; dim]).expect("budget covers dim + 1");
    if !f0.is_finite() {
        return Err(RbError::OutOfRange {
            name: "cost at the starting point",
            value: f64::NAN,
            range: "finite",
        });
    }
    simplex.push((vec![0.0; dim], f0));
    for i in 0..dim {
        let mut y = vec![0.0; dim];
        y[i] = 1.0;
        let f = driver.eval(&y).expect("budget covers dim + 1");
        simplex.push((y, f));
    }

    let converged = loop {
        // Stable sort keeps tie ordering deterministic across runs.
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[dim].1 - simplex[0].1;
        if config.cost_tolerance > 0.0 && spread <= config.cost_tolerance {
            break true;
        }
        let width = simplex[1..]
            .iter()
            .flat_map(|(y, _)| {
                y.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
            })
            .fold(0.0f64, f64::max);
        if config.simplex_tolerance > 0.0 && width <= config.simplex_tolerance {
            break true;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|i| simplex[..dim].iter().map(|(y, _)| y[i]).sum::<f64>() / dim as f64)
            .collect();
        let toward = |from: &[f64], coeff: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(&c, &w)| c + coeff * (c - w))
                .collect()
        };

        let worst = simplex[dim].clone();
        let yr = toward(&worst.0, config.reflection);
        let Some(fr) = driver.eval(&yr) else { break false };

        if fr < simplex[0].1 {
            let ye = toward(&worst.0, config.reflection * config.expansion);
            let Some(fe) = driver.eval(&ye) else { break false };
            simplex[dim] = if fe < fr { (ye, fe) } else { (yr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (yr, fr);
            continue;
        }

        // Contract toward the better of the reflection and the worst
        // vertex; a failed contraction shrinks everything onto the best.
        let (anchor, f_anchor) = if fr < worst.1 {
            (yr.clone(), fr)
        } else {
            (worst.0.clone(), worst.1)
        };
        let yc: Vec<f64> = centroid
            .iter()
            .zip(&anchor)
            .map(|(&c, &a)| c + config.contraction * (a - c))
            .collect();
        let Some(fc) = driver.eval(&yc) else { break false };
        if fc < f_anchor {
            simplex[dim] = (yc, fc);
            continue;
        }
        for v in 1..=dim {
            let y: Vec<f64> = simplex[0]
                .0
                .iter()
                .zip(&simplex[v].0)
                .map(|(&b, &w)| b + config.shrink * (w - b))
                .collect();
            let Some(f) = driver.eval(&y) else { break };
            simplex[v] = (y, f);
        }
        if driver.steps.len() >= config.max_evaluations {
            break false;
        }
    };

    let evaluations = driver.steps.len();
    Ok(OptimizationTrace {
        steps: driver.steps,
        best_params: driver.best_params,
        best_cost: driver.best_cost,
        evaluations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn quadratic(x: &[f64]) -> f64 {
        (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2)
    }

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn quadratic_converges_to_the_minimum() {
        let mut config = NelderMeadConfig::new(vec![1.0, 1.0], 500);
        config.simplex_tolerance = 1e-7;
        let trace = nelder_mead(quadratic, &[0.0, 0.0], &config).unwrap();
        assert!(trace.converged);
        assert!((trace.best_params[0] - 3.0).abs() < 1e-4);
        assert!((trace.best_params[1] + 1.0).abs() < 1e-4);
        assert!(trace.best_cost < 1e-8);
    }

    #[test]
    fn rosenbrock_valley_is_traversed_within_budget() {
        let mut config = NelderMeadConfig::new(vec![1.0, 1.0], 2000);
        config.simplex_tolerance = 1e-9;
        let trace = nelder_mead(rosenbrock, &[-1.2, 1.0], &config).unwrap();
        assert!(trace.evaluations <= 2000);
        assert!(
            (trace.best_params[0] - 1.0).abs() < 1e-3
                && (trace.best_params[1] - 1.0).abs() < 1e-3,
            "ended at {:?}",
            trace.best_params
        );
    }

    #[test]
    fn noisy_quadratic_lands_within_three_sigma_of_the_floor() {
        let sigma = 0.01;
        let mut hits = 0;
        for trial in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(0xAD0 + trial);
            let noisy = |x: &[f64]| {
                quadratic(x) + sigma * rng.sample::<f64, _>(StandardNormal)
            };
            let mut config = NelderMeadConfig::new(vec![1.0, 1.0], 300);
            config.simplex_tolerance = 0.0;
            let trace = nelder_mead(noisy, &[0.0, 0.0], &config).unwrap();
            if quadratic(&trace.best_params) <= 3.0 * sigma {
                hits += 1;
            }
        }
        assert!(hits >= 90, "only {hits}/100 runs settled within 3 sigma");
    }

    #[test]
    fn constant_cost_offset_leaves_the_search_path_unchanged() {
        // Rank decisions see only cost differences, so a constant shift
        // must reproduce the exact same sequence of probed points.
        let mut config = NelderMeadConfig::new(vec![1.0, 1.0], 200);
        config.simplex_tolerance = 1e-6;
        let base = nelder_mead(quadratic, &[0.0, 0.0], &config).unwrap();
        let lifted = nelder_mead(|x| quadratic(x) + 5.0, &[0.0, 0.0], &config).unwrap();
        assert_eq!(base.evaluations, lifted.evaluations);
        for (a, b) in base.steps.iter().zip(&lifted.steps) {
            assert_eq!(a.params, b.params);
        }
        assert_eq!(base.best_params, lifted.best_params);
        assert!((lifted.best_cost - base.best_cost - 5.0).abs() < 1e-12);
    }

    #[test]
    fn best_so_far_is_monotone_and_final() {
        let config = NelderMeadConfig::new(vec![1.0, 1.0], 400);
        let trace = nelder_mead(rosenbrock, &[-1.2, 1.0], &config).unwrap();
        let mut running = f64::INFINITY;
        for step in &trace.steps {
            running = running.min(step.cost);
            assert_eq!(step.best_cost, running);
        }
        assert_eq!(trace.best_cost, running);
        assert_eq!(trace.evaluations, trace.steps.len());
    }

    #[test]
    fn non_finite_pockets_rank_worst_without_aborting() {
        // NaN beyond x = 3.5 sits right past the minimum at 3, so the
        // search must brush the pocket and still settle.
        let pocket = |x: &[f64]| {
            if x[0] > 3.5 {
                f64::NAN
            } else {
                quadratic(x)
            }
        };
        let mut config = NelderMeadConfig::new(vec![1.0, 1.0], 600);
        config.simplex_tolerance = 1e-7;
        let trace = nelder_mead(pocket, &[0.0, 0.0], &config).unwrap();
        assert!((trace.best_params[0] - 3.0).abs() < 1e-3);
        assert!((trace.best_params[1] + 1.0).abs() < 1e-3);
        assert!(trace.steps.iter().all(|s| !s.cost.is_nan()));
    }

    #[test]
    fn non_finite_start_is_rejected() {
        let config = NelderMeadConfig::new(vec![1.0], 50);
        let err = nelder_mead(|_| f64::NAN, &[0.0], &config).unwrap_err();
        assert!(matches!(err, RbError::OutOfRange { .. }));
    }

    #[test]
    fn budget_is_a_hard_ceiling() {
        let mut config = NelderMeadConfig::new(vec![1.0, 1.0], 25);
        config.simplex_tolerance = 1e-12;
        let trace = nelder_mead(rosenbrock, &[-1.2, 1.0], &config).unwrap();
        assert_eq!(trace.evaluations, 25);
        assert!(!trace.converged);
    }

    #[test]
    fn cost_spread_tolerance_stops_a_flat_simplex() {
        let mut config = NelderMeadConfig::new(vec![1.0, 1.0], 500);
        config.cost_tolerance = 1e-3;
        config.simplex_tolerance = 0.0;
        let trace = nelder_mead(quadratic, &[0.0, 0.0], &config).unwrap();
        assert!(trace.converged);
        assert!(trace.evaluations < 500);
    }

    #[test]
    fn config_validation_rejects_bad_shapes() {
        let bad_len = NelderMeadConfig::new(vec![1.0], 50);
        assert!(nelder_mead(quadratic, &[0.0, 0.0], &bad_len).is_err());

        let mut bad_scale = NelderMeadConfig::new(vec![1.0, 0.0], 50);
        assert!(nelder_mead(quadratic, &[0.0, 0.0], &bad_scale).is_err());
        bad_scale.scales[1] = -1.0;
        assert!(nelder_mead(quadratic, &[0.0, 0.0], &bad_scale).is_err());

        let tight = NelderMeadConfig::new(vec![1.0, 1.0], 2);
        assert!(nelder_mead(quadratic, &[0.0, 0.0], &tight).is_err());

        let mut bad_shrink = NelderMeadConfig::new(vec![1.0, 1.0], 50);
        bad_shrink.shrink = 1.0;
        assert!(nelder_mead(quadratic, &[0.0, 0.0], &bad_shrink).is_err());
    }
}
