//! Randomized vertex play on the simplex: keep a multiplicative-weights
//! distribution over the vertices, sample one vertex per round, observe a
//! (possibly biased) linear loss chosen by an adversary that never sees the
//! realized draw, and update.

use crate::md::{md_step_simplex, step_size_simplex, MdError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("need at least two vertices, got {0}")]
    TooFewVertices(usize),
    #[error("round count must be at least 1")]
    ZeroRounds,
    #[error("adversary emitted loss with sup norm {norm} above its bound {bound} at round {round}")]
    LossBound { round: usize, norm: f64, bound: f64 },
    #[error("adversary emitted a loss vector of length {got}, expected {expected}")]
    LossDimension { expected: usize, got: usize },
    #[error(transparent)]
    Md(#[from] MdError),
}

/// Multiplicative-weights update of a probability vector. The same softmax
/// reweighting as [`md_step_simplex`]; kept as its own name because it acts
/// on a distribution over vertices rather than a point of the simplex.
pub fn mwu_update(p: &[f64], losses: &[f64], alpha: f64) -> Result<Vec<f64>, MdError> {
    md_step_simplex(p, losses, alpha)
}

/// Samples an index from the distribution `p` by inverse CDF. Zero-probability
/// indices are never returned.
pub fn sample_vertex<R: Rng>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (i, &w) in p.iter().enumerate() {
        if w > 0.0 {
            cumulative += w;
            last_positive = i;
            if u < cumulative {
                return i;
            }
        }
    }
    last_positive
}

/// Single-agent state: the play distribution, its step size and the rng.
#[derive(Debug, Clone)]
pub struct ExpertState {
    dist: Vec<f64>,
    alpha: f64,
    round: usize,
    rng: ChaCha8Rng,
}

impl ExpertState {
    pub fn new(n: usize, alpha: f64, seed: u64) -> Result<Self, SamplerError> {
        if n < 2 {
            return Err(SamplerError::TooFewVertices(n));
        }
        Ok(Self {
            dist: vec![1.0 / n as f64; n],
            alpha,
            round: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn distribution(&self) -> &[f64] {
        &self.dist
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Draws this round's vertex.
    pub fn play(&mut self) -> usize {
        sample_vertex(&self.dist, &mut self.rng)
    }

    /// Feeds back the observed loss vector.
    pub fn update(&mut self, observed: &[f64]) -> Result<(), SamplerError> {
        self.dist = mwu_update(&self.dist, observed, self.alpha)?;
        self.round += 1;
        Ok(())
    }
}

/// History visible to the adversary: everything up to and including round
/// `k-1`, but never the round-`k` draw.
#[derive(Debug, Default, Clone)]
pub struct GameHistory {
    pub plays: Vec<usize>,
    pub losses: Vec<Vec<f64>>,
}

/// Chooses the round-`k` loss vector from the visible history and (allowed)
/// the current play distribution, without knowledge of the realized draw.
pub trait Adversary {
    fn loss_bound(&self) -> f64;
    fn losses(&mut self, round: usize, history: &GameHistory, dist: &[f64]) -> Vec<f64>;
}

/// Cycles through a fixed sequence of loss vectors, ignoring all feedback.
pub struct ObliviousAdversary {
    vectors: Vec<Vec<f64>>,
    bound: f64,
}

impl ObliviousAdversary {
    pub fn new(vectors: Vec<Vec<f64>>) -> Self {
        let bound = vectors
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |a, &b| a.max(b.abs()));
        Self {
            vectors,
            bound: bound.max(f64::MIN_POSITIVE),
        }
    }

    /// Always charges coordinate 0 at unit cost.
    pub fn charging_first(n: usize) -> Self {
        let mut l = vec![0.0; n];
        l[0] = 1.0;
        Self::new(vec![l])
    }
}

impl Adversary for ObliviousAdversary {
    fn loss_bound(&self) -> f64 {
        self.bound
    }
    fn losses(&mut self, round: usize, _history: &GameHistory, _dist: &[f64]) -> Vec<f64> {
        self.vectors[round % self.vectors.len()].clone()
    }
}

/// Charges the currently most probable vertex at full cost.
pub struct ChargeLeaderAdversary {
    pub bound: f64,
}

impl Adversary for ChargeLeaderAdversary {
    fn loss_bound(&self) -> f64 {
        self.bound
    }
    fn losses(&mut self, _round: usize, _history: &GameHistory, dist: &[f64]) -> Vec<f64> {
        let mut leader = 0;
        for (i, &w) in dist.iter().enumerate() {
            if w > dist[leader] {
                leader = i;
            }
        }
        let mut l = vec![0.0; dist.len()];
        l[leader] = self.bound;
        l
    }
}

/// Independent coordinates uniform on `[0, bound]`.
pub struct IidAdversary {
    pub bound: f64,
    rng: ChaCha8Rng,
}

impl IidAdversary {
    pub fn new(bound: f64, seed: u64) -> Self {
        Self {
            bound,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Adversary for IidAdversary {
    fn loss_bound(&self) -> f64 {
        self.bound
    }
    fn losses(&mut self, _round: usize, _history: &GameHistory, dist: &[f64]) -> Vec<f64> {
        (0..dist.len()).map(|_| self.rng.gen::<f64>() * self.bound).collect()
    }
}

/// Outcome of one expert game.
#[derive(Debug, Clone)]
pub struct ExpertGameRecord {
    pub alpha: f64,
    /// Vertex drawn each round.
    pub plays: Vec<usize>,
    /// True loss of the drawn vertex each round.
    pub realized: Vec<f64>,
    /// Running pseudo-regret after each round (true losses, best fixed vertex).
    pub regret: Vec<f64>,
    /// Final summed true loss per vertex.
    pub cumulative: Vec<f64>,
    /// Final play distribution.
    pub distribution: Vec<f64>,
    /// Sup-norm of the bias injected into observed losses.
    pub bias_delta: f64,
}

impl ExpertGameRecord {
    pub fn final_regret(&self) -> f64 {
        *self.regret.last().expect("game has at least one round")
    }
}

/// Plays `rounds` of the vertex game. Observed losses are the adversary's
/// true losses plus a fixed alternating-sign bias of sup norm `bias_delta`;
/// regret is computed on the true losses. `alpha = None` applies the
/// `√(2 ln n / N)` rule with the adversary's loss bound.
pub fn run_expert_game(
    adversary: &mut dyn Adversary,
    n: usize,
    rounds: usize,
    alpha: Option<f64>,
    bias_delta: f64,
    seed: u64,
) -> Result<ExpertGameRecord, SamplerError> {
    if rounds == 0 {
        return Err(SamplerError::ZeroRounds);
    }
    let bound = adversary.loss_bound();
    let alpha = match alpha {
        Some(a) => a,
        None => step_size_simplex(bound, n, rounds)?,
    };
    let mut agent = ExpertState::new(n, alpha, seed)?;
    let bias: Vec<f64> = (0..n)
        .map(|i| if i % 2 == 0 { bias_delta } else { -bias_delta })
        .collect();

    let mut history = GameHistory::default();
    let mut plays = Vec::with_capacity(rounds);
    let mut realized = Vec::with_capacity(rounds);
    let mut regret = Vec::with_capacity(rounds);
    let mut cumulative = vec![0.0; n];

    for round in 0..rounds {
        let losses = adversary.losses(round, &history, agent.distribution());
        if losses.len() != n {
            return Err(SamplerError::LossDimension {
                expected: n,
                got: losses.len(),
            });
        }
        let norm = losses.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if norm > bound + 1e-12 {
            return Err(SamplerError::LossBound { round, norm, bound });
        }

        let vertex = agent.play();
        plays.push(vertex);
        realized.push(losses[vertex]);
        for (c, l) in cumulative.iter_mut().zip(&losses) {
            *c += l;
        }
        let k = (round + 1) as f64;
        let mean_play: f64 = realized.iter().sum::<f64>() / k;
        let best = cumulative.iter().copied().fold(f64::INFINITY, f64::min) / k;
        regret.push(mean_play - best);

        let observed: Vec<f64> = losses.iter().zip(&bias).map(|(l, b)| l + b).collect();
        agent.update(&observed)?;
        history.plays.push(vertex);
        history.losses.push(losses);
    }

    Ok(ExpertGameRecord {
        alpha,
        plays,
        realized,
        regret,
        cumulative,
        distribution: agent.distribution().to_vec(),
        bias_delta,
    })
}
