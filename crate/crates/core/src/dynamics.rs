//! Imitative logit dynamics over a network's path flows: the mean-field ODE
//! `dx_i/dt = d_j · x_i e^{-α G_i(x)} / Σ_l x_l e^{-α G_l(x)} − x_i`
//! with the congestion potential as a Lyapunov function, and the
//! finite-population Markov revision process whose large-population limit
//! it is. Imitation never resurrects an extinct route: `x_i = 0` stays zero
//! under both evolutions.

use crate::network::{Network, NetworkError, PathFlow};
use crate::sampler::sample_vertex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("logit choice over an all-zero block")]
    AllZeroBlock,
    #[error("time step must be positive, got {0}")]
    BadTimeStep(f64),
    #[error("horizon must cover at least one step (t_end {t_end}, step {step})")]
    BadHorizon { t_end: f64, step: f64 },
    #[error("integration produced a negative coordinate {index} at t = {time}: the time step is too large")]
    NegativeCoordinate { time: f64, index: usize },
    #[error("population scale {0} yields no agents")]
    EmptyPopulation(f64),
    #[error("revision resolution must be at least 1")]
    BadRevision,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Imitative logit choice over one block:
/// `p_i = x_i e^{-α g_i} / Σ_l x_l e^{-α g_l}`.
/// Unused routes (`x_i = 0`) get probability exactly zero. The exponent is
/// shifted by the block minimum cost so it never overflows.
pub fn logit_choice(x: &[f64], costs: &[f64], alpha: f64) -> Result<Vec<f64>, DynamicsError> {
    assert_eq!(x.len(), costs.len(), "block dimension mismatch");
    let shift = x
        .iter()
        .zip(costs)
        .filter(|(&xi, _)| xi > 0.0)
        .map(|(_, &g)| g)
        .fold(f64::INFINITY, f64::min);
    if !shift.is_finite() {
        return Err(DynamicsError::AllZeroBlock);
    }
    let mut p = vec![0.0; x.len()];
    let mut sum = 0.0;
    for i in 0..x.len() {
        if x[i] > 0.0 {
            let w = x[i] * (-alpha * (costs[i] - shift)).exp();
            p[i] = w;
            sum += w;
        }
    }
    for v in p.iter_mut() {
        *v /= sum;
    }
    Ok(p)
}

/// Right-hand side of the mean-field ODE at a feasible state: per block `j`,
/// `d_j p_i − x_i`, whose block sums vanish identically.
pub fn ode_rhs(network: &Network, x: &[f64], alpha: f64) -> Vec<f64> {
    let costs = network.path_costs(x);
    let mut rhs = vec![0.0; x.len()];
    for (j, od) in network.od_pairs().iter().enumerate() {
        let range = network.block_range(j);
        let p = logit_choice(&x[range.clone()], &costs[range.clone()], alpha)
            .expect("feasible flow has positive mass in every block");
        for (offset, i) in range.enumerate() {
            rhs[i] = od.demand * p[offset] - x[i];
        }
    }
    rhs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeMethod {
    Euler,
    Rk4,
}

impl std::str::FromStr for OdeMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "euler" => Ok(OdeMethod::Euler),
            "rk4" => Ok(OdeMethod::Rk4),
            other => Err(format!("unknown method {other:?} (expected euler or rk4)")),
        }
    }
}

/// Fixed-step trajectory of the mean-field ODE.
#[derive(Debug, Clone)]
pub struct OdeTrajectory {
    pub alpha: f64,
    pub dt: f64,
    /// `t_k = k · dt`, including `t_0 = 0`.
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `Ψ(x(t_k))` along the trajectory.
    pub psi: Vec<f64>,
    /// `(1/T) ∫_0^T x(t) dt` by the trapezoid rule.
    pub time_average: Vec<f64>,
    /// Largest deviation of any block sum from its demand seen en route.
    pub max_block_drift: f64,
}

impl OdeTrajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least one state")
    }
}

fn block_drift(network: &Network, x: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for (j, od) in network.od_pairs().iter().enumerate() {
        let sum: f64 = x[network.block_range(j)].iter().sum();
        worst = worst.max((sum - od.demand).abs());
    }
    worst
}

/// Integrates the ODE from `x0` over `[0, t_end]` with a fixed step.
/// Fails if a step leaves the nonnegative orthant (step too large).
pub fn integrate_ode(
    network: &Network,
    x0: &PathFlow,
    alpha: f64,
    t_end: f64,
    dt: f64,
    method: OdeMethod,
) -> Result<OdeTrajectory, DynamicsError> {
    if !(dt > 0.0) {
        return Err(DynamicsError::BadTimeStep(dt));
    }
    let steps = (t_end / dt).round() as usize;
    if steps == 0 {
        return Err(DynamicsError::BadHorizon { t_end, step: dt });
    }
    network.check_feasible(x0.as_slice())?;

    let dim = x0.len();
    let mut x = x0.as_slice().to_vec();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut psi = Vec::with_capacity(steps + 1);
    let mut integral = vec![0.0; dim];
    let mut drift = block_drift(network, &x);

    times.push(0.0);
    states.push(x.clone());
    psi.push(network.potential(&x));

    for k in 0..steps {
        let next = match method {
            OdeMethod::Euler => {
                let f = ode_rhs(network, &x, alpha);
                x.iter().zip(&f).map(|(xi, fi)| xi + dt * fi).collect::<Vec<f64>>()
            }
            OdeMethod::Rk4 => {
                let k1 = ode_rhs(network, &x, alpha);
                let mid1: Vec<f64> =
                    x.iter().zip(&k1).map(|(xi, f)| xi + 0.5 * dt * f).collect();
                let k2 = ode_rhs(network, &mid1, alpha);
                let mid2: Vec<f64> =
                    x.iter().zip(&k2).map(|(xi, f)| xi + 0.5 * dt * f).collect();
                let k3 = ode_rhs(network, &mid2, alpha);
                let endp: Vec<f64> = x.iter().zip(&k3).map(|(xi, f)| xi + dt * f).collect();
                let k4 = ode_rhs(network, &endp, alpha);
                (0..dim)
                    .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                    .collect()
            }
        };
        let t = (k + 1) as f64 * dt;
        if let Some(index) = next.iter().position(|&v| v < 0.0 || !v.is_finite()) {
            return Err(DynamicsError::NegativeCoordinate { time: t, index });
        }
        for i in 0..dim {
            integral[i] += 0.5 * dt * (x[i] + next[i]);
        }
        x = next;
        drift = drift.max(block_drift(network, &x));
        times.push(t);
        psi.push(network.potential(&x));
        states.push(x.clone());
    }

    let t_total = steps as f64 * dt;
    let time_average = integral.iter().map(|v| v / t_total).collect();
    Ok(OdeTrajectory {
        alpha,
        dt,
        times,
        states,
        psi,
        time_average,
        max_block_drift: drift,
    })
}

/// `(t, Ψ(x(t)))` pairs for any sampled trajectory.
pub fn lyapunov_series(network: &Network, times: &[f64], states: &[Vec<f64>]) -> Vec<(f64, f64)> {
    times
        .iter()
        .zip(states)
        .map(|(&t, x)| (t, network.potential(x)))
        .collect()
}

/// Finite population of route-holding agents, block by OD pair. Agent masses
/// are `d_j / A_j` with `A_j = round(d_j · scale)`, so the implied aggregate
/// flow is feasible exactly.
#[derive(Debug, Clone)]
pub struct PopulationState {
    /// Per OD pair: each agent's path offset within the block.
    assignments: Vec<Vec<u32>>,
    /// Per OD pair: agent count per path offset.
    counts: Vec<Vec<u64>>,
    /// Per OD pair: mass carried by one agent.
    masses: Vec<f64>,
}

impl PopulationState {
    /// Spreads agents as uniformly as the integer counts allow (round robin).
    pub fn new_uniform(network: &Network, scale: f64) -> Result<Self, DynamicsError> {
        let mut assignments = Vec::new();
        let mut counts = Vec::new();
        let mut masses = Vec::new();
        for (j, od) in network.od_pairs().iter().enumerate() {
            let agents = (od.demand * scale).round().max(1.0);
            if !agents.is_finite() {
                return Err(DynamicsError::EmptyPopulation(scale));
            }
            let agents = agents as u64;
            let n = network.block_range(j).len();
            let mut block_counts = vec![0u64; n];
            let mut block_assign = Vec::with_capacity(agents as usize);
            for a in 0..agents {
                let path = (a % n as u64) as u32;
                block_assign.push(path);
                block_counts[path as usize] += 1;
            }
            assignments.push(block_assign);
            counts.push(block_counts);
            masses.push(od.demand / agents as f64);
        }
        Ok(Self {
            assignments,
            counts,
            masses,
        })
    }

    /// Builds a population with a prescribed agent count per path; block `j`
    /// of `counts` must match the block length of OD pair `j` and hold at
    /// least one agent in total.
    pub fn from_counts(network: &Network, counts: Vec<Vec<u64>>) -> Result<Self, DynamicsError> {
        assert_eq!(counts.len(), network.num_od_pairs(), "block count mismatch");
        let mut assignments = Vec::new();
        let mut masses = Vec::new();
        for (j, od) in network.od_pairs().iter().enumerate() {
            let block = &counts[j];
            assert_eq!(
                block.len(),
                network.block_range(j).len(),
                "path count mismatch in block {j}"
            );
            let agents: u64 = block.iter().sum();
            if agents == 0 {
                return Err(DynamicsError::EmptyPopulation(0.0));
            }
            let mut block_assign = Vec::with_capacity(agents as usize);
            for (path, &c) in block.iter().enumerate() {
                block_assign.extend(std::iter::repeat(path as u32).take(c as usize));
            }
            assignments.push(block_assign);
            masses.push(od.demand / agents as f64);
        }
        Ok(Self {
            assignments,
            counts,
            masses,
        })
    }

    pub fn num_agents(&self, od: usize) -> usize {
        self.assignments[od].len()
    }

    /// The implied path flow: per-path agent count times agent mass.
    pub fn aggregate(&self, network: &Network) -> Vec<f64> {
        let mut x = vec![0.0; network.num_paths()];
        for (j, block) in self.counts.iter().enumerate() {
            let range = network.block_range(j);
            for (offset, i) in range.enumerate() {
                x[i] = block[offset] as f64 * self.masses[j];
            }
        }
        x
    }

    /// One revision step of length `1/revision`: every agent independently
    /// reconsiders with probability `1/revision` and, if so, redraws its path
    /// from the imitative logit distribution at the frozen aggregate state.
    pub fn step<R: Rng>(
        &mut self,
        network: &Network,
        alpha: f64,
        revision: u64,
        rng: &mut R,
    ) -> Result<(), DynamicsError> {
        if revision == 0 {
            return Err(DynamicsError::BadRevision);
        }
        let x = self.aggregate(network);
        let costs = network.path_costs(&x);
        let prob = 1.0 / revision as f64;
        for j in 0..self.assignments.len() {
            let range = network.block_range(j);
            let p = logit_choice(&x[range.clone()], &costs[range], alpha)?;
            let block_counts = &mut self.counts[j];
            for assignment in self.assignments[j].iter_mut() {
                if rng.gen::<f64>() < prob {
                    let new = sample_vertex(&p, rng) as u32;
                    if new != *assignment {
                        block_counts[*assignment as usize] -= 1;
                        block_counts[new as usize] += 1;
                        *assignment = new;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Sampled trajectory of the Markov revision process.
#[derive(Debug, Clone)]
pub struct MarkovTrajectory {
    pub alpha: f64,
    pub revision: u64,
    pub seed: u64,
    /// Sample times `k / revision`, including `t = 0`.
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl MarkovTrajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least one state")
    }
}

/// Runs the revision process from the uniform spread over `[0, t_end]`,
/// sampling the aggregate at every step (interval `1/revision`).
pub fn markov_run(
    network: &Network,
    scale: f64,
    revision: u64,
    alpha: f64,
    t_end: f64,
    seed: u64,
) -> Result<MarkovTrajectory, DynamicsError> {
    if revision == 0 {
        return Err(DynamicsError::BadRevision);
    }
    let steps = (t_end * revision as f64).round() as usize;
    if steps == 0 {
        return Err(DynamicsError::BadHorizon {
            t_end,
            step: 1.0 / revision as f64,
        });
    }
    let mut pop = PopulationState::new_uniform(network, scale)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(pop.aggregate(network));
    for k in 0..steps {
        pop.step(network, alpha, revision, &mut rng)?;
        times.push((k + 1) as f64 / revision as f64);
        states.push(pop.aggregate(network));
    }
    Ok(MarkovTrajectory {
        alpha,
        revision,
        seed,
        times,
        states,
    })
}

/// One cell of the stationary-measure concentration sweep.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConcentrationCell {
    pub population_scale: f64,
    pub seed: u64,
    /// Mean potential over the measurement window.
    pub mean_psi: f64,
    /// Fraction of window samples with `‖x − x*‖₁ < eps`.
    pub freq_near_eq: f64,
}

/// For each population scale and seed, burns in the revision process for
/// `t_burnin`, then measures over `t_measure`: the mean potential and the
/// frequency of states within `eps` (ℓ1) of the reference equilibrium.
#[allow(clippy::too_many_arguments)]
pub fn concentration_study(
    network: &Network,
    alpha: f64,
    scales: &[f64],
    revision: u64,
    t_burnin: f64,
    t_measure: f64,
    seeds: u64,
    base_seed: u64,
    x_star: &[f64],
    eps: f64,
) -> Result<Vec<ConcentrationCell>, DynamicsError> {
    if revision == 0 {
        return Err(DynamicsError::BadRevision);
    }
    let burn_steps = (t_burnin * revision as f64).round() as usize;
    let measure_steps = (t_measure * revision as f64).round() as usize;
    if measure_steps == 0 {
        return Err(DynamicsError::BadHorizon {
            t_end: t_measure,
            step: 1.0 / revision as f64,
        });
    }
    let mut cells = Vec::new();
    for (si, &scale) in scales.iter().enumerate() {
        for s in 0..seeds {
            let seed = base_seed
                .wrapping_add(si as u64 * 1_000_003)
                .wrapping_add(s);
            let mut pop = PopulationState::new_uniform(network, scale)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..burn_steps {
                pop.step(network, alpha, revision, &mut rng)?;
            }
            let mut psi_sum = 0.0;
            let mut near = 0usize;
            for _ in 0..measure_steps {
                pop.step(network, alpha, revision, &mut rng)?;
                let x = pop.aggregate(network);
                psi_sum += network.potential(&x);
                let dist: f64 = x.iter().zip(x_star).map(|(a, b)| (a - b).abs()).sum();
                if dist < eps {
                    near += 1;
                }
            }
            cells.push(ConcentrationCell {
                population_scale: scale,
                seed,
                mean_psi: psi_sum / measure_steps as f64,
                freq_near_eq: near as f64 / measure_steps as f64,
            });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Network;

    const PIGOU: &str = include_str!("../../../fixtures/pigou.json");

    fn pigou() -> Network {
        Network::from_json(PIGOU).unwrap()
    }

    #[test]
    fn equal_costs_reproduce_the_state() {
        let p = logit_choice(&[0.5, 0.5], &[3.0, 3.0], 1.0).unwrap();
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn logit_hand_value() {
        let p = logit_choice(&[0.5, 0.5], &[1.0, 0.5], 1.0).unwrap();
        assert!((p[0] - 0.37754).abs() < 1e-5);
        assert!((p[1] - 0.62246).abs() < 1e-5);
    }

    #[test]
    fn extinct_routes_stay_extinct() {
        let p = logit_choice(&[0.0, 1.0], &[0.0, 100.0], 2.0).unwrap();
        assert_eq!(p[0], 0.0);
        assert_eq!(p[1], 1.0);
        assert!(matches!(
            logit_choice(&[0.0, 0.0], &[1.0, 1.0], 1.0),
            Err(DynamicsError::AllZeroBlock)
        ));
    }

    #[test]
    fn rhs_hand_value_on_pigou() {
        let net = pigou();
        let rhs = ode_rhs(&net, &[0.5, 0.5], 1.0);
        let p = logit_choice(&[0.5, 0.5], &[1.0, 0.5], 1.0).unwrap();
        assert!((rhs[0] - (p[0] - 0.5)).abs() < 1e-15);
        assert!((rhs[1] - (p[1] - 0.5)).abs() < 1e-15);
        // hand softmax evaluation: d·p − x ≈ (−0.12246, +0.12246)
        assert!((rhs[0] + 0.122459).abs() < 1e-5);
        assert!((rhs[1] - 0.122459).abs() < 1e-5);
    }

    #[test]
    fn rhs_vanishes_at_equal_costs_and_conserves_mass() {
        let net = pigou();
        // x = (0, 1) has G = (1, 1): a fixed point
        let rhs = ode_rhs(&net, &[0.0, 1.0], 1.0);
        assert_eq!(rhs, vec![0.0, 0.0]);
        let rhs = ode_rhs(&net, &[0.3, 0.7], 2.5);
        assert!((rhs[0] + rhs[1]).abs() <= 1e-15);
    }

    #[test]
    fn trajectory_is_constant_at_the_equilibrium() {
        let net = pigou();
        let x0 = net.feasible_flow(vec![0.0, 1.0]).unwrap();
        let traj = integrate_ode(&net, &x0, 1.0, 2.0, 1e-2, OdeMethod::Rk4).unwrap();
        for state in &traj.states {
            assert_eq!(state.as_slice(), &[0.0, 1.0]);
        }
    }

    #[test]
    fn zero_coordinates_are_invariant_faces() {
        let net = pigou();
        let x0 = net.feasible_flow(vec![0.0, 1.0]).unwrap();
        let traj = integrate_ode(&net, &x0, 3.0, 1.0, 1e-2, OdeMethod::Euler).unwrap();
        assert!(traj.states.iter().all(|s| s[0] == 0.0));
    }

    #[test]
    fn too_large_steps_abort_with_a_diagnostic() {
        let net = pigou();
        let x0 = net.feasible_flow(vec![0.9, 0.1]).unwrap();
        // dt = 3 overshoots the orthant for Euler
        let err = integrate_ode(&net, &x0, 8.0, 6.0, 3.0, OdeMethod::Euler).unwrap_err();
        assert!(matches!(err, DynamicsError::NegativeCoordinate { .. }));
        assert!(err.to_string().contains("time step is too large"));
    }

    #[test]
    fn step_validation() {
        let net = pigou();
        let x0 = net.feasible_uniform();
        assert!(matches!(
            integrate_ode(&net, &x0, 1.0, 1.0, 0.0, OdeMethod::Rk4),
            Err(DynamicsError::BadTimeStep(_))
        ));
        assert!(matches!(
            integrate_ode(&net, &x0, 1.0, 1e-6, 0.01, OdeMethod::Rk4),
            Err(DynamicsError::BadHorizon { .. })
        ));
    }

    #[test]
    fn lyapunov_series_is_the_potential_along_states() {
        let net = pigou();
        let x0 = net.feasible_uniform();
        let traj = integrate_ode(&net, &x0, 1.0, 1.0, 1e-2, OdeMethod::Rk4).unwrap();
        let series = lyapunov_series(&net, &traj.times, &traj.states);
        assert_eq!(series.len(), traj.states.len());
        for ((_, psi), expect) in series.iter().zip(&traj.psi) {
            assert_eq!(psi, expect);
        }
    }

    #[test]
    fn population_uniform_spread_is_feasible() {
        let net = pigou();
        let pop = PopulationState::new_uniform(&net, 10.0).unwrap();
        assert_eq!(pop.num_agents(0), 10);
        let x = pop.aggregate(&net);
        net.check_feasible(&x).unwrap();
        assert_eq!(x, vec![0.5, 0.5]);
    }

    #[test]
    fn tiny_population_rounds_up_to_one_agent() {
        let net = pigou();
        let pop = PopulationState::new_uniform(&net, 0.01).unwrap();
        assert_eq!(pop.num_agents(0), 1);
        let x = pop.aggregate(&net);
        net.check_feasible(&x).unwrap();
    }

    #[test]
    fn monomorphic_populations_are_absorbing() {
        let net = pigou();
        let mut pop = PopulationState::new_uniform(&net, 1.0).unwrap();
        // single agent: already monomorphic on path 0
        let before = pop.aggregate(&net);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            pop.step(&net, 1.0, 1, &mut rng).unwrap();
            assert_eq!(pop.aggregate(&net), before);
        }
    }

    #[test]
    fn markov_runs_are_deterministic_and_feasible() {
        let net = pigou();
        let a = markov_run(&net, 100.0, 10, 1.0, 2.0, 3).unwrap();
        let b = markov_run(&net, 100.0, 10, 1.0, 2.0, 3).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.times.len(), 21);
        for s in &a.states {
            net.check_feasible(s).unwrap();
        }
    }

    #[test]
    fn full_revision_jumps_to_the_logit_mixture_in_expectation() {
        let net = pigou();
        let x0 = vec![0.5, 0.5];
        let costs = net.path_costs(&x0);
        let p = logit_choice(&x0, &costs, 1.0).unwrap();
        let replications = 10_000;
        let mut mean = vec![0.0; 2];
        for seed in 0..replications {
            let mut pop = PopulationState::new_uniform(&net, 100.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            pop.step(&net, 1.0, 1, &mut rng).unwrap();
            for (m, v) in mean.iter_mut().zip(pop.aggregate(&net)) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= replications as f64;
        }
        // sd of the mean of 100-agent averages
        let se = (p[0] * p[1] / (100.0 * replications as f64)).sqrt();
        assert!((mean[0] - p[0]).abs() < 3.0 * se, "{} vs {}", mean[0], p[0]);
    }
}
