//! Mirror descent in entropic geometry on a simplex or a product of scaled
//! simplexes, with inexact stochastic gradient oracles, step-size rules,
//! trajectory averaging, a regret ledger and certified regret bounds.
//!
//! The update on the unit simplex is the multiplicative-weights rule
//! `x_i ← x_i exp(-α g_i) / Σ_l x_l exp(-α g_l)`; on a product each block is
//! updated independently and rescaled to its mass. Two algebraically equal
//! forms are provided: the recursive reweighting of the previous iterate and
//! the softmax of cumulative α-weighted losses from the uniform start.

use crate::network::{DerivedBounds, Network};
use crate::simplex::{ProductSimplex, SimplexError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MdError {
    #[error("coordinate {index} of the iterate is not strictly positive ({value})")]
    NonpositiveCoordinate { index: usize, value: f64 },
    #[error("zero coordinate in divergence base point")]
    ZeroCoordinate,
    #[error("step size must be positive, got {0}")]
    NonpositiveStep(f64),
    #[error("gradient bound must be positive, got {0}")]
    NonpositiveBound(f64),
    #[error("round count must be at least 1")]
    ZeroRounds,
    #[error("degenerate geometry: entropy radius is zero")]
    DegenerateRadius,
    #[error("confidence level must lie strictly between 0 and 1, got {0}")]
    BadConfidence(f64),
    #[error("oracle reported dual norm {norm} above its contract {bound} at round {round}")]
    OracleContract { round: usize, norm: f64, bound: f64 },
    #[error("regret ledger records mixed loss kinds")]
    MixedLossKinds,
    #[error("regret ledger is empty")]
    EmptyLedger,
    #[error(transparent)]
    Simplex(#[from] SimplexError),
}

fn check_step(alpha: f64) -> Result<(), MdError> {
    if !(alpha > 0.0) {
        return Err(MdError::NonpositiveStep(alpha));
    }
    Ok(())
}

/// Softmax reweighting of one block: `out_i = mass · x_i e^{-α g_i} / Σ_l x_l e^{-α g_l}`.
/// Shifts by the block minimum of `g` before exponentiating so the exponent
/// never overflows; the shift cancels in the normalisation. Weights are
/// floored at the smallest positive normal so extreme losses underflow to a
/// negligible positive value instead of an exact zero.
fn reweight_block(x: &[f64], g: &[f64], alpha: f64, mass: f64, out: &mut [f64]) {
    let shift = g.iter().copied().fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    for i in 0..x.len() {
        let w = (x[i] * (-alpha * (g[i] - shift)).exp()).max(f64::MIN_POSITIVE);
        out[i] = w;
        sum += w;
    }
    for v in out.iter_mut() {
        *v *= mass / sum;
    }
}

/// One mirror-descent step on the unit simplex. Requires a strictly positive
/// point summing to one; the result is strictly positive and renormalised.
pub fn md_step_simplex(x: &[f64], g: &[f64], alpha: f64) -> Result<Vec<f64>, MdError> {
    check_step(alpha)?;
    if x.len() != g.len() {
        return Err(SimplexError::DimensionMismatch {
            expected: x.len(),
            got: g.len(),
        }
        .into());
    }
    for (index, &value) in x.iter().enumerate() {
        if !(value > 0.0) {
            return Err(MdError::NonpositiveCoordinate { index, value });
        }
    }
    let mut out = vec![0.0; x.len()];
    reweight_block(x, g, alpha, 1.0, &mut out);
    Ok(out)
}

/// One mirror-descent step on a product of scaled simplexes: each block is
/// reweighted independently and rescaled to its mass `d_j`.
pub fn md_step_product(
    q: &ProductSimplex,
    z: &[f64],
    g: &[f64],
    alpha: f64,
) -> Result<Vec<f64>, MdError> {
    check_step(alpha)?;
    if z.len() != q.dim() || g.len() != q.dim() {
        return Err(SimplexError::DimensionMismatch {
            expected: q.dim(),
            got: if z.len() != q.dim() { z.len() } else { g.len() },
        }
        .into());
    }
    for (index, &value) in z.iter().enumerate() {
        if !(value > 0.0) {
            return Err(MdError::NonpositiveCoordinate { index, value });
        }
    }
    for (j, (range, mass)) in q.blocks().enumerate() {
        let sum: f64 = z[range].iter().sum();
        if (sum - mass).abs() > 1e-9 {
            return Err(SimplexError::BlockSum {
                block: j,
                sum,
                expected: mass,
            }
            .into());
        }
    }
    let mut out = vec![0.0; z.len()];
    for (range, mass) in q.blocks() {
        reweight_block(&z[range.clone()], &g[range.clone()], alpha, mass, &mut out[range]);
    }
    Ok(out)
}

/// The cumulative form of the iterate: block-softmax of the accumulated
/// α-weighted losses, starting from the uniform point. Equal to repeated
/// [`md_step_product`] applications up to floating-point drift.
pub fn iterate_from_cumulative(q: &ProductSimplex, cumulative: &[f64]) -> Vec<f64> {
    assert_eq!(cumulative.len(), q.dim(), "cumulative loss dimension mismatch");
    let mut out = vec![0.0; q.dim()];
    for (range, mass) in q.blocks() {
        let shift = cumulative[range.clone()]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let mut sum = 0.0;
        for i in range.clone() {
            let w = (-(cumulative[i] - shift)).exp().max(f64::MIN_POSITIVE);
            out[i] = w;
            sum += w;
        }
        for i in range {
            out[i] *= mass / sum;
        }
    }
    out
}

/// `α = (1/M) √(2 ln n / N)` for the unit simplex.
pub fn step_size_simplex(grad_bound: f64, n: usize, rounds: usize) -> Result<f64, MdError> {
    if !(grad_bound > 0.0) {
        return Err(MdError::NonpositiveBound(grad_bound));
    }
    if rounds == 0 {
        return Err(MdError::ZeroRounds);
    }
    if n < 2 {
        return Err(MdError::DegenerateRadius);
    }
    Ok((2.0 * (n as f64).ln() / rounds as f64).sqrt() / grad_bound)
}

/// `α = (R/M) √(2/N)` with `R² = Σ_j d_j² ln n_j` for a simplex product.
pub fn step_size_product(
    grad_bound: f64,
    q: &ProductSimplex,
    rounds: usize,
) -> Result<f64, MdError> {
    let r2 = q.entropy_radius_sq();
    if r2 <= 0.0 {
        return Err(MdError::DegenerateRadius);
    }
    step_size_general(grad_bound, r2.sqrt(), rounds)
}

/// `α = (R/M) √(2/N)` for a given prox radius `R`.
pub fn step_size_general(grad_bound: f64, radius: f64, rounds: usize) -> Result<f64, MdError> {
    if !(grad_bound > 0.0) {
        return Err(MdError::NonpositiveBound(grad_bound));
    }
    if rounds == 0 {
        return Err(MdError::ZeroRounds);
    }
    if !(radius > 0.0) {
        return Err(MdError::DegenerateRadius);
    }
    Ok(radius / grad_bound * (2.0 / rounds as f64).sqrt())
}

/// The prox value `d(x) = Σ_j d_j (d_j ln n_j + Σ_i x_i ln(x_i/d_j))`,
/// zero at the uniform point and at most the entropy radius squared.
/// `0 ln 0` is taken as 0.
pub fn entropy_value(q: &ProductSimplex, x: &[f64]) -> f64 {
    assert_eq!(x.len(), q.dim(), "point dimension mismatch");
    let mut total = 0.0;
    for (range, mass) in q.blocks() {
        let n = range.len() as f64;
        let mut block = mass * n.ln();
        for i in range {
            if x[i] > 0.0 {
                block += x[i] * (x[i] / mass).ln();
            }
        }
        total += mass * block;
    }
    total
}

/// Bregman divergence of the entropic prox between block-feasible points,
/// which reduces to the mass-weighted KL divergence
/// `V_x(y) = Σ_j d_j Σ_i y_i ln(y_i/x_i)`. Errors on a zero coordinate in `x`.
pub fn bregman(q: &ProductSimplex, x: &[f64], y: &[f64]) -> Result<f64, MdError> {
    assert_eq!(x.len(), q.dim(), "point dimension mismatch");
    assert_eq!(y.len(), q.dim(), "point dimension mismatch");
    let mut total = 0.0;
    for (range, mass) in q.blocks() {
        let mut block = 0.0;
        for i in range {
            if !(x[i] > 0.0) {
                return Err(MdError::ZeroCoordinate);
            }
            if y[i] > 0.0 {
                block += y[i] * (y[i] / x[i]).ln();
            }
        }
        total += mass * block;
    }
    Ok(total)
}

/// Dual norm of a gradient on the product geometry:
/// `√(Σ_j (max_i |g_i^j|)²)`; the plain `ℓ∞` norm on the unit simplex.
pub fn dual_norm(q: &ProductSimplex, g: &[f64]) -> f64 {
    assert_eq!(g.len(), q.dim(), "gradient dimension mismatch");
    q.blocks()
        .map(|(range, _)| {
            let m = g[range].iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
            m * m
        })
        .sum::<f64>()
        .sqrt()
}

/// Mirror-descent state: current iterate, running average, cumulative
/// α-weighted losses and the iteration counter.
#[derive(Debug, Clone)]
pub struct MdState {
    q: ProductSimplex,
    alpha: f64,
    iterate: Vec<f64>,
    sum: Vec<f64>,
    cumulative: Vec<f64>,
    iteration: usize,
}

impl MdState {
    /// Starts at the uniform point of `q`.
    pub fn new(q: ProductSimplex, alpha: f64) -> Result<Self, MdError> {
        check_step(alpha)?;
        let iterate = q.uniform();
        let dim = q.dim();
        Ok(Self {
            q,
            alpha,
            iterate,
            sum: vec![0.0; dim],
            cumulative: vec![0.0; dim],
            iteration: 0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The point the next gradient is evaluated at.
    pub fn iterate(&self) -> &[f64] {
        &self.iterate
    }

    /// Number of completed steps.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Average of the iterates consumed so far.
    pub fn average(&self) -> Vec<f64> {
        let k = self.iteration.max(1) as f64;
        self.sum.iter().map(|v| v / k).collect()
    }

    /// The iterate reconstructed from cumulative losses (the second form of
    /// the same update).
    pub fn cumulative_iterate(&self) -> Vec<f64> {
        iterate_from_cumulative(&self.q, &self.cumulative)
    }

    /// Applies one step with gradient `g` at the current iterate.
    pub fn advance(&mut self, g: &[f64]) -> Result<(), MdError> {
        for (s, v) in self.sum.iter_mut().zip(&self.iterate) {
            *s += v;
        }
        for (c, v) in self.cumulative.iter_mut().zip(g) {
            *c += self.alpha * v;
        }
        self.iterate = md_step_product(&self.q, &self.iterate, g, self.alpha)?;
        self.iteration += 1;
        Ok(())
    }
}

/// A (possibly inexact) first-order oracle. `loss` must be the exact realized
/// loss `f_k(x)` (used for regret accounting) and deterministic in `(round, x)`;
/// `gradient` may be noisy. `grad_bound` is the almost-sure bound `M` on the
/// dual norm of reported gradients and `bias_bound` the bias `δ`.
pub trait GradientOracle {
    fn loss(&mut self, round: usize, x: &[f64]) -> f64;
    fn gradient(&mut self, round: usize, x: &[f64]) -> Vec<f64>;
    fn grad_bound(&self) -> f64;
    fn bias_bound(&self) -> f64 {
        0.0
    }
}

/// Exact oracle for the fixed convex loss `f_k ≡ Ψ` on a network: the
/// gradient is the path-cost vector.
pub struct PotentialOracle<'a> {
    network: &'a Network,
    bounds: DerivedBounds,
}

impl<'a> PotentialOracle<'a> {
    pub fn new(network: &'a Network) -> Self {
        let bounds = network.derived_bounds();
        Self { network, bounds }
    }
}

impl GradientOracle for PotentialOracle<'_> {
    fn loss(&mut self, _round: usize, x: &[f64]) -> f64 {
        self.network.potential(x)
    }

    fn gradient(&mut self, _round: usize, x: &[f64]) -> Vec<f64> {
        self.network.path_costs(x)
    }

    fn grad_bound(&self) -> f64 {
        self.bounds.gradient_bound
    }
}

/// Zero-mean bounded noise plus a fixed bias, both in `ℓ∞`.
#[derive(Debug, Clone, Copy)]
pub struct NoiseModel {
    /// Bias bound `δ`: the fixed adversarial offset has `‖bias‖∞ ≤ δ`.
    pub delta: f64,
    /// Amplitude of the symmetric two-point perturbation per coordinate.
    pub sigma_scale: f64,
    pub seed: u64,
}

/// Wraps a base oracle with the noise model: each reported coordinate gets an
/// independent `±sigma_scale` flip (conditionally zero-mean given the history)
/// plus a fixed alternating-sign bias vector of norm `delta`. Both components
/// are bounded, so the dual-norm contract holds almost surely by construction.
pub struct NoisyOracle<B> {
    base: B,
    sigma_scale: f64,
    delta: f64,
    bias: Vec<f64>,
    blocks: usize,
    rng: ChaCha8Rng,
}

impl<B: GradientOracle> NoisyOracle<B> {
    pub fn new(base: B, model: NoiseModel, q: &ProductSimplex) -> Self {
        let bias = (0..q.dim())
            .map(|i| if i % 2 == 0 { model.delta } else { -model.delta })
            .collect();
        Self {
            base,
            sigma_scale: model.sigma_scale,
            delta: model.delta,
            bias,
            blocks: q.num_blocks(),
            rng: ChaCha8Rng::seed_from_u64(model.seed),
        }
    }

    /// Replaces the default alternating bias with a caller-chosen vector.
    pub fn with_bias(mut self, bias: Vec<f64>) -> Self {
        assert_eq!(bias.len(), self.bias.len(), "bias dimension mismatch");
        self.delta = bias.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        self.bias = bias;
        self
    }
}

impl<B: GradientOracle> GradientOracle for NoisyOracle<B> {
    fn loss(&mut self, round: usize, x: &[f64]) -> f64 {
        self.base.loss(round, x)
    }

    fn gradient(&mut self, round: usize, x: &[f64]) -> Vec<f64> {
        let mut g = self.base.gradient(round, x);
        for (v, b) in g.iter_mut().zip(&self.bias) {
            let flip = if self.rng.gen::<bool>() { 1.0 } else { -1.0 };
            *v += flip * self.sigma_scale + b;
        }
        g
    }

    fn grad_bound(&self) -> f64 {
        // per-coordinate perturbation is at most sigma + delta, so the dual
        // norm grows by at most (sigma + delta) √m.
        self.base.grad_bound() + (self.sigma_scale + self.delta) * (self.blocks as f64).sqrt()
    }

    fn bias_bound(&self) -> f64 {
        self.delta
    }
}

/// Fixed linear loss; handy for shift-invariance and contract tests.
pub struct ConstantOracle {
    pub g: Vec<f64>,
    pub bound: f64,
}

impl GradientOracle for ConstantOracle {
    fn loss(&mut self, _round: usize, x: &[f64]) -> f64 {
        self.g.iter().zip(x).map(|(a, b)| a * b).sum()
    }
    fn gradient(&mut self, _round: usize, _x: &[f64]) -> Vec<f64> {
        self.g.clone()
    }
    fn grad_bound(&self) -> f64 {
        self.bound
    }
}

/// Full trajectory record of one mirror-descent run.
#[derive(Debug, Clone)]
pub struct MdRun {
    pub alpha: f64,
    /// Iterates `x^1 … x^N` (the uniform start is `x^1`).
    pub iterates: Vec<Vec<f64>>,
    /// Reported (possibly noisy) gradients per round.
    pub gradients: Vec<Vec<f64>>,
    /// Exact realized losses `f_k(x^k)`.
    pub losses: Vec<f64>,
    /// `x̄^N = (1/N) Σ_k x^k`.
    pub average: Vec<f64>,
}

/// Runs mirror descent for `rounds` steps from the uniform start of `q`.
/// When `alpha` is `None` the product step-size rule is applied with the
/// oracle's gradient bound. Aborts if the oracle breaks its norm contract.
pub fn run_md(
    oracle: &mut dyn GradientOracle,
    q: &ProductSimplex,
    rounds: usize,
    alpha: Option<f64>,
) -> Result<MdRun, MdError> {
    if rounds == 0 {
        return Err(MdError::ZeroRounds);
    }
    let alpha = match alpha {
        Some(a) => {
            check_step(a)?;
            a
        }
        None => step_size_product(oracle.grad_bound(), q, rounds)?,
    };
    let contract = oracle.grad_bound() + oracle.bias_bound() + 1e-9;
    let mut state = MdState::new(q.clone(), alpha)?;
    let mut iterates = Vec::with_capacity(rounds);
    let mut gradients = Vec::with_capacity(rounds);
    let mut losses = Vec::with_capacity(rounds);
    for round in 0..rounds {
        let x = state.iterate().to_vec();
        let loss = oracle.loss(round, &x);
        let g = oracle.gradient(round, &x);
        let norm = dual_norm(q, &g);
        if norm > contract {
            return Err(MdError::OracleContract {
                round,
                norm,
                bound: contract - 1e-9,
            });
        }
        state.advance(&g)?;
        iterates.push(x);
        gradients.push(g);
        losses.push(loss);
    }
    Ok(MdRun {
        alpha,
        average: state.average(),
        iterates,
        gradients,
        losses,
    })
}

/// Post-hoc comparator for the pseudo-regret.
#[derive(Debug, Clone)]
enum Comparator {
    /// Linear losses: keeps the summed loss vector; the comparator minimum
    /// over a simplex product is the per-block minimum coordinate times `d_j`.
    Linear { summed: Vec<f64> },
    /// One fixed convex loss with externally supplied minimum value.
    FixedConvex { optimum: f64 },
}

/// Realized losses plus the data needed to evaluate the best fixed point in
/// hindsight. A ledger is either linear or fixed-convex; mixing is an error.
#[derive(Debug, Clone)]
pub struct RegretLedger {
    realized: Vec<f64>,
    comparator: Comparator,
}

impl RegretLedger {
    pub fn linear(dim: usize) -> Self {
        Self {
            realized: Vec::new(),
            comparator: Comparator::Linear {
                summed: vec![0.0; dim],
            },
        }
    }

    pub fn fixed_convex(optimum: f64) -> Self {
        Self {
            realized: Vec::new(),
            comparator: Comparator::FixedConvex { optimum },
        }
    }

    pub fn len(&self) -> usize {
        self.realized.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realized.is_empty()
    }

    /// Records a linear round: the loss vector and the point played.
    pub fn record_linear(&mut self, loss: &[f64], play: &[f64]) -> Result<(), MdError> {
        match &mut self.comparator {
            Comparator::Linear { summed } => {
                let value: f64 = loss.iter().zip(play).map(|(a, b)| a * b).sum();
                self.realized.push(value);
                for (s, l) in summed.iter_mut().zip(loss) {
                    *s += l;
                }
                Ok(())
            }
            Comparator::FixedConvex { .. } => Err(MdError::MixedLossKinds),
        }
    }

    /// Records one evaluation of the fixed convex loss.
    pub fn record_fixed(&mut self, value: f64) -> Result<(), MdError> {
        match &self.comparator {
            Comparator::FixedConvex { .. } => {
                self.realized.push(value);
                Ok(())
            }
            Comparator::Linear { .. } => Err(MdError::MixedLossKinds),
        }
    }

    /// `Regret_N = (1/N) Σ_k f_k(x^k) − min_x (1/N) Σ_k f_k(x)`.
    pub fn regret(&self, q: &ProductSimplex) -> Result<f64, MdError> {
        if self.realized.is_empty() {
            return Err(MdError::EmptyLedger);
        }
        let n = self.realized.len() as f64;
        let mean = self.realized.iter().sum::<f64>() / n;
        match &self.comparator {
            Comparator::Linear { summed } => {
                let mut best = 0.0;
                for (range, mass) in q.blocks() {
                    let min = summed[range]
                        .iter()
                        .copied()
                        .fold(f64::INFINITY, f64::min);
                    best += mass * min;
                }
                Ok(mean - best / n)
            }
            Comparator::FixedConvex { optimum } => Ok(mean - optimum),
        }
    }
}

/// Expectation and high-probability regret bounds.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BoundReport {
    pub expectation: f64,
    pub high_probability: Option<f64>,
}

/// Generic bounds for prox radius `R` and set diameter `R̃`:
/// expectation `M R √(2/N) + R̃ δ`, and with confidence `1 − σ`
/// `M √(2/N) (R + 2 R̃ √(ln σ⁻¹)) + R̃ δ`.
pub fn certified_bound_general(
    grad_bound: f64,
    radius: f64,
    diameter: f64,
    rounds: usize,
    delta: f64,
    sigma: Option<f64>,
) -> Result<BoundReport, MdError> {
    if rounds == 0 {
        return Err(MdError::ZeroRounds);
    }
    let root = (2.0 / rounds as f64).sqrt();
    let expectation = grad_bound * radius * root + diameter * delta;
    let high_probability = match sigma {
        None => None,
        Some(s) => {
            if !(s > 0.0 && s < 1.0) {
                return Err(MdError::BadConfidence(s));
            }
            let tail = (1.0 / s).ln().sqrt();
            Some(grad_bound * root * (radius + 2.0 * diameter * tail) + diameter * delta)
        }
    };
    Ok(BoundReport {
        expectation,
        high_probability,
    })
}

/// Unit-simplex bounds: `M √(2 ln n / N) + 2δ`, high-probability constant 4.
pub fn certified_bound_simplex(
    grad_bound: f64,
    n: usize,
    rounds: usize,
    delta: f64,
    sigma: Option<f64>,
) -> Result<BoundReport, MdError> {
    certified_bound_general(grad_bound, (n as f64).ln().sqrt(), 2.0, rounds, delta, sigma)
}

/// Product bounds: `M √(2/N) √(Σ d_j² ln n_j) + 2δ √(Σ d_j²)`,
/// high-probability constant `4 √(Σ d_j²)`.
pub fn certified_bound_product(
    grad_bound: f64,
    q: &ProductSimplex,
    rounds: usize,
    delta: f64,
    sigma: Option<f64>,
) -> Result<BoundReport, MdError> {
    certified_bound_general(
        grad_bound,
        q.entropy_radius_sq().sqrt(),
        q.diameter(),
        rounds,
        delta,
        sigma,
    )
}

/// Vertex-sampling bounds: expectation as on the simplex, but the sampling
/// randomness raises the high-probability constant to 6.
pub fn certified_bound_vertex_sampling(
    grad_bound: f64,
    n: usize,
    rounds: usize,
    delta: f64,
    sigma: Option<f64>,
) -> Result<BoundReport, MdError> {
    if rounds == 0 {
        return Err(MdError::ZeroRounds);
    }
    let root = (2.0 / rounds as f64).sqrt();
    let radius = (n as f64).ln().sqrt();
    let expectation = grad_bound * radius * root + 2.0 * delta;
    let high_probability = match sigma {
        None => None,
        Some(s) => {
            if !(s > 0.0 && s < 1.0) {
                return Err(MdError::BadConfidence(s));
            }
            let tail = (1.0 / s).ln().sqrt();
            Some(grad_bound * root * (radius + 6.0 * tail) + 2.0 * delta)
        }
    };
    Ok(BoundReport {
        expectation,
        high_probability,
    })
}

/// Valid expected-regret bound for an arbitrary fixed step `α`:
/// `R²/(αN) + α M²/2 + R̃ δ` (the bound before optimising over `α`).
pub fn fixed_step_bound(
    grad_bound: f64,
    radius_sq: f64,
    diameter: f64,
    alpha: f64,
    rounds: usize,
    delta: f64,
) -> Result<f64, MdError> {
    check_step(alpha)?;
    if rounds == 0 {
        return Err(MdError::ZeroRounds);
    }
    Ok(radius_sq / (alpha * rounds as f64) + 0.5 * alpha * grad_bound * grad_bound
        + diameter * delta)
}

/// The alternative worst-case constant obtained with per-block step sizes
/// `α_j ∝ √(ln n_j)`: `(M/√N) · max_j ln n_j / √(2 min_j ln n_j) · (Σ d_j² + 1)`.
/// Reported for comparison only; `None` when some block has a single path.
pub fn per_block_step_bound(grad_bound: f64, q: &ProductSimplex, rounds: usize) -> Option<f64> {
    if rounds == 0 {
        return None;
    }
    let logs: Vec<f64> = q
        .blocks()
        .map(|(range, _)| (range.len() as f64).ln())
        .collect();
    let min = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = logs.iter().copied().fold(0.0f64, f64::max);
    if min <= 0.0 {
        return None;
    }
    let mass_sq: f64 = q.blocks().map(|(_, d)| d * d).sum();
    Some(grad_bound / (rounds as f64).sqrt() * max / (2.0 * min).sqrt() * (mass_sq + 1.0))
}
