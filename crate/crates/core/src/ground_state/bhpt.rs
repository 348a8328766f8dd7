//! Basin-hopping parallel tempering over L-BFGS local minima.

use std::sync::Mutex;

use argmin::core::{CostFunction, Executor, Gradient};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{TupsAnsatz, TupsEvaluator};
use crate::dense::MAX_DENSE_DIM;
use crate::error::{Error, Result};
use crate::models::diagonalize_in;
use crate::pauli::PauliSum;
use crate::statevector::StateVector;

const LBFGS_MEMORY: usize = 10;

/// Parallel-tempering settings. Temperatures and the gradient tolerance are
/// absolute energies (units of `t` for the Hubbard chain).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BhptConfig {
    pub n_replicas: usize,
    pub temperature_min: f64,
    pub temperature_max: f64,
    /// Basin-hopping steps per replica.
    pub n_steps: usize,
    /// Each parameter is kicked uniformly in `[−step_size, step_size]`.
    pub step_size: f64,
    /// Probability per step and adjacent replica pair of an exchange attempt.
    pub exchange_probability: f64,
    pub max_iterations: u64,
    /// L-BFGS stops once the RMS gradient falls below this.
    pub gradient_rms_tolerance: f64,
    pub seed: u64,
}

impl Default for BhptConfig {
    fn default() -> Self {
        Self {
            n_replicas: 8,
            temperature_min: 1e-4,
            temperature_max: 1e-2,
            n_steps: 250,
            step_size: 0.3,
            exchange_probability: 0.1,
            max_iterations: 2000,
            gradient_rms_tolerance: 1e-5,
            seed: 0,
        }
    }
}

impl BhptConfig {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.n_replicas == 0 {
            return bad("at least one replica is required");
        }
        if !(self.temperature_min > 0.0 && self.temperature_max >= self.temperature_min) {
            return bad("temperatures must satisfy 0 < min ≤ max");
        }
        if !(0.0..=1.0).contains(&self.exchange_probability) {
            return bad("exchange probability must lie in [0, 1]");
        }
        if !(self.step_size >= 0.0 && self.gradient_rms_tolerance > 0.0) {
            return bad("step size and gradient tolerance must be positive");
        }
        Ok(())
    }

    /// Exponentially spaced replica temperatures, coldest first.
    pub fn temperatures(&self) -> Vec<f64> {
        let n = self.n_replicas;
        if n == 1 {
            return vec![self.temperature_min];
        }
        let ratio = self.temperature_max / self.temperature_min;
        (0..n)
            .map(|i| self.temperature_min * ratio.powf(i as f64 / (n - 1) as f64))
            .collect()
    }
}

/// Result of one L-BFGS minimization.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalMinimum {
    pub params: Vec<f64>,
    pub energy: f64,
    pub rms_gradient: f64,
    pub converged: bool,
}

/// Parameters, energy and gradient of one evaluation.
type Evaluation = (Vec<f64>, f64, Vec<f64>);

/// Shares one evaluation between the cost and gradient callbacks and keeps
/// the lowest point seen, which survives a line-search failure.
struct Objective<'a> {
    eval: &'a TupsEvaluator,
    last: Mutex<Option<Evaluation>>,
    best: &'a Mutex<Option<(f64, Vec<f64>)>>,
}

impl Objective<'_> {
    fn evaluate(&self, p: &[f64]) -> std::result::Result<(f64, Vec<f64>), argmin::core::Error> {
        if let Some((x, e, g)) = self.last.lock().unwrap().as_ref() {
            if x.as_slice() == p {
                return Ok((*e, g.clone()));
            }
        }
        let (e, g) = self.eval.energy_and_gradient(p)?;
        *self.last.lock().unwrap() = Some((p.to_vec(), e, g.clone()));
        let mut best = self.best.lock().unwrap();
        if best.as_ref().is_none_or(|(b, _)| e < *b) {
            *best = Some((e, p.to_vec()));
        }
        Ok((e, g))
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.evaluate(p)?.0)
    }
}

impl Gradient for Objective<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, p: &Vec<f64>) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        Ok(self.evaluate(p)?.1)
    }
}

fn rms(g: &[f64]) -> f64 {
    if g.is_empty() {
        0.0
    } else {
        (g.iter().map(|x| x * x).sum::<f64>() / g.len() as f64).sqrt()
    }
}

/// L-BFGS from `start`. A solver failure returns the lowest point visited
/// with `converged = false`.
pub fn minimize_local(eval: &TupsEvaluator, start: Vec<f64>, cfg: &BhptConfig) -> Result<LocalMinimum> {
    eval.ansatz().check_params(&start)?;
    let n = start.len();
    let best = Mutex::new(None);
    let objective = Objective {
        eval,
        last: Mutex::new(None),
        best: &best,
    };
    let (e0, g0) = eval.energy_and_gradient(&start)?;
    if n == 0 || rms(&g0) < cfg.gradient_rms_tolerance {
        return Ok(LocalMinimum {
            rms_gradient: rms(&g0),
            converged: true,
            params: start,
            energy: e0,
        });
    }
    let solver = LBFGS::new(MoreThuenteLineSearch::new(), LBFGS_MEMORY)
        .with_tolerance_grad(cfg.gradient_rms_tolerance * (n as f64).sqrt())
        .map_err(|e| Error::Optimizer(e.to_string()))?;
    let max_iterations = cfg.max_iterations;
    let outcome = Executor::new(objective, solver)
        .configure(|s| s.param(start).max_iters(max_iterations))
        .run();
    if let Err(e) = &outcome {
        if e.downcast_ref::<Error>().is_some() {
            return Err(Error::Optimizer(e.to_string()));
        }
    }
    let (_, params) = best.into_inner().unwrap().expect("objective evaluated at least once");
    let (energy, grad) = eval.energy_and_gradient(&params)?;
    let rms_gradient = rms(&grad);
    Ok(LocalMinimum {
        converged: rms_gradient < cfg.gradient_rms_tolerance,
        params,
        energy,
        rms_gradient,
    })
}

/// Outcome of a global search.
#[derive(Clone, Debug)]
pub struct OptimizeResult {
    pub params: Vec<f64>,
    pub energy: f64,
    pub rms_gradient: f64,
    pub state: StateVector,
    /// Lowest eigenvalue in the ansatz sector, when small enough to compute.
    pub exact_energy: Option<f64>,
    /// Weight of the ansatz state on the exact ground level.
    pub fidelity: Option<f64>,
    pub local_minimizations: usize,
    pub nonconverged: usize,
    pub accepted_moves: usize,
    pub accepted_exchanges: usize,
}

impl OptimizeResult {
    /// `1 − fidelity`.
    pub fn infidelity(&self) -> Option<f64> {
        self.fidelity.map(|f| 1.0 - f)
    }
}

struct Replica {
    temperature: f64,
    rng: ChaCha8Rng,
    current: LocalMinimum,
    trial: Option<LocalMinimum>,
    accepted: bool,
}

/// Basin-hopping parallel tempering. Replicas hop concurrently; exchanges
/// between neighbouring temperatures happen at the barrier after each step.
pub fn optimize(ansatz: &TupsAnsatz, h_e: &PauliSum, cfg: &BhptConfig) -> Result<OptimizeResult> {
    optimize_from(ansatz, h_e, cfg, None)
}

/// [`optimize`] with the coldest replica starting from `start` instead of
/// a random kick, so the result is never above `E(start)`'s local minimum.
pub fn optimize_from(
    ansatz: &TupsAnsatz,
    h_e: &PauliSum,
    cfg: &BhptConfig,
    start: Option<&[f64]>,
) -> Result<OptimizeResult> {
    cfg.validate()?;
    if let Some(s) = start {
        ansatz.check_params(s)?;
    }
    let eval = TupsEvaluator::new(ansatz, h_e)?;
    let n = ansatz.n_params();
    let kick = |rng: &mut ChaCha8Rng, base: &[f64]| -> Vec<f64> {
        base.iter()
            .map(|x| x + rng.gen_range(-1.0..=1.0) * cfg.step_size)
            .collect()
    };

    let mut replicas: Vec<Replica> = cfg
        .temperatures()
        .into_iter()
        .enumerate()
        .map(|(i, temperature)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64 + 1);
            let origin = kick(&mut rng, &vec![0.0; n]);
            let origin = match (i, start) {
                (0, Some(s)) => s.to_vec(),
                _ => origin,
            };
            let current = minimize_local(&eval, origin, cfg)?;
            Ok(Replica {
                temperature,
                rng,
                current,
                trial: None,
                accepted: false,
            })
        })
        .collect::<Result<_>>()?;
    let mut exchange_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut local_minimizations = replicas.len();
    let mut nonconverged = replicas.iter().filter(|r| !r.current.converged).count();
    let mut best = replicas
        .iter()
        .map(|r| r.current.clone())
        .min_by(|a, b| a.energy.total_cmp(&b.energy))
        .expect("at least one replica");
    let mut accepted_moves = 0;
    let mut accepted_exchanges = 0;

    for _ in 0..cfg.n_steps {
        replicas.par_iter_mut().try_for_each(|r| -> Result<()> {
            let start = kick(&mut r.rng, &r.current.params);
            let trial = minimize_local(&eval, start, cfg)?;
            let delta = trial.energy - r.current.energy;
            r.accepted = delta <= 0.0 || r.rng.gen::<f64>() < (-delta / r.temperature).exp();
            r.trial = Some(trial);
            Ok(())
        })?;
        for r in &mut replicas {
            let trial = r.trial.take().expect("trial set in the parallel phase");
            local_minimizations += 1;
            nonconverged += usize::from(!trial.converged);
            if trial.energy < best.energy {
                best = trial.clone();
            }
            if r.accepted {
                accepted_moves += 1;
                r.current = trial;
            }
        }
        for i in 0..replicas.len().saturating_sub(1) {
            if exchange_rng.gen::<f64>() >= cfg.exchange_probability {
                continue;
            }
            let (a, b) = (&replicas[i], &replicas[i + 1]);
            let arg = (1.0 / a.temperature - 1.0 / b.temperature) * (a.current.energy - b.current.energy);
            if arg >= 0.0 || exchange_rng.gen::<f64>() < arg.exp() {
                let (left, right) = replicas.split_at_mut(i + 1);
                std::mem::swap(&mut left[i].current, &mut right[0].current);
                accepted_exchanges += 1;
            }
        }
    }

    let sector = eval.sector_state(&best.params)?;
    let (exact_energy, fidelity) = if eval.basis().len() <= MAX_DENSE_DIM {
        let spectrum = diagonalize_in(h_e, eval.basis().clone())?;
        let weight: f64 = spectrum
            .cluster(0)
            .map(|k| {
                let v = spectrum.sector_vector(k);
                v.iter()
                    .zip(&sector)
                    .map(|(c, x)| c.conj() * x)
                    .sum::<num_complex::Complex64>()
                    .norm_sqr()
            })
            .sum();
        (Some(spectrum.energy(0)), Some(weight))
    } else {
        (None, None)
    };
    Ok(OptimizeResult {
        state: eval.state(&best.params)?,
        params: best.params,
        energy: best.energy,
        rms_gradient: best.rms_gradient,
        exact_energy,
        fidelity,
        local_minimizations,
        nonconverged,
        accepted_moves,
        accepted_exchanges,
    })
}
