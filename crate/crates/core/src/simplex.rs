//! The feasible set: a direct product of scaled simplexes.
//!
//! A point `x` is split into `m` blocks; block `j` has `n_j` coordinates and
//! lives on `S_{n_j}(d_j) = { z >= 0 : Σ_i z_i = d_j }`. The unit simplex is
//! the special case of a single block with mass one.

use rand::Rng;
use thiserror::Error;

/// Absolute tolerance on block sums accepted when validating membership.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SimplexError {
    #[error("block {block} must have at least one coordinate")]
    EmptyBlock { block: usize },
    #[error("block {block} mass must be positive, got {mass}")]
    NonpositiveMass { block: usize, mass: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {index} is negative ({value})")]
    NegativeCoordinate { index: usize, value: f64 },
    #[error("block {block} sums to {sum}, expected {expected}")]
    BlockSum { block: usize, sum: f64, expected: f64 },
}

/// Product of scaled simplexes `Π_j S_{n_j}(d_j)`, stored as block offsets
/// into a flat coordinate vector plus the per-block masses.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSimplex {
    masses: Vec<f64>,
    offsets: Vec<usize>,
}

impl ProductSimplex {
    /// Builds the product from `(block size, block mass)` pairs.
    pub fn new(blocks: &[(usize, f64)]) -> Result<Self, SimplexError> {
        let mut masses = Vec::with_capacity(blocks.len());
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        offsets.push(0);
        for (j, &(size, mass)) in blocks.iter().enumerate() {
            if size == 0 {
                return Err(SimplexError::EmptyBlock { block: j });
            }
            if !(mass > 0.0) {
                return Err(SimplexError::NonpositiveMass { block: j, mass });
            }
            masses.push(mass);
            offsets.push(offsets[j] + size);
        }
        Ok(Self { masses, offsets })
    }

    /// The unit simplex `S_n(1)` as a one-block product.
    pub fn unit(n: usize) -> Self {
        Self::new(&[(n, 1.0)]).expect("unit simplex requires n >= 1")
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn num_blocks(&self) -> usize {
        self.masses.len()
    }

    pub fn block_range(&self, j: usize) -> std::ops::Range<usize> {
        self.offsets[j]..self.offsets[j + 1]
    }

    pub fn block_len(&self, j: usize) -> usize {
        self.offsets[j + 1] - self.offsets[j]
    }

    pub fn mass(&self, j: usize) -> f64 {
        self.masses[j]
    }

    /// Iterates `(coordinate range, mass)` over blocks.
    pub fn blocks(&self) -> impl Iterator<Item = (std::ops::Range<usize>, f64)> + '_ {
        (0..self.num_blocks()).map(move |j| (self.block_range(j), self.mass(j)))
    }

    /// The barycenter: every block uniform at `d_j / n_j`.
    pub fn uniform(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        for (range, mass) in self.blocks() {
            let v = mass / range.len() as f64;
            for i in range {
                x[i] = v;
            }
        }
        x
    }

    /// Validates nonnegativity and block sums against `tol`.
    pub fn check_member(&self, x: &[f64], tol: f64) -> Result<(), SimplexError> {
        if x.len() != self.dim() {
            return Err(SimplexError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        for (i, &v) in x.iter().enumerate() {
            if v < 0.0 || !v.is_finite() {
                return Err(SimplexError::NegativeCoordinate { index: i, value: v });
            }
        }
        for (j, (range, mass)) in self.blocks().enumerate() {
            let sum: f64 = x[range].iter().sum();
            if (sum - mass).abs() > tol {
                return Err(SimplexError::BlockSum {
                    block: j,
                    sum,
                    expected: mass,
                });
            }
        }
        Ok(())
    }

    pub fn is_member(&self, x: &[f64], tol: f64) -> bool {
        self.check_member(x, tol).is_ok()
    }

    /// `R² = Σ_j d_j² ln n_j` — the entropy radius of the product under the
    /// weighted negative-entropy prox.
    pub fn entropy_radius_sq(&self) -> f64 {
        self.blocks()
            .map(|(range, mass)| mass * mass * (range.len() as f64).ln())
            .sum()
    }

    /// `2 √(Σ_j d_j²)` — the diameter in the block-ℓ1 product norm.
    pub fn diameter(&self) -> f64 {
        2.0 * self.masses.iter().map(|d| d * d).sum::<f64>().sqrt()
    }

    /// True when every block is a single point (all `n_j = 1`), which makes
    /// the entropy radius zero and the geometry trivial.
    pub fn is_degenerate(&self) -> bool {
        (0..self.num_blocks()).all(|j| self.block_len(j) == 1)
    }

    /// Draws a strictly interior point, each block uniform on its simplex
    /// (normalised exponentials), scaled by the block mass.
    pub fn sample_interior<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        for (range, mass) in self.blocks() {
            let mut sum = 0.0;
            for i in range.clone() {
                let u: f64 = rng.gen::<f64>();
                // -ln U is Exp(1); clamp away from 0 so the point stays interior
                let e = (-(1.0 - u).ln()).max(1e-12);
                x[i] = e;
                sum += e;
            }
            for i in range {
                x[i] *= mass / sum;
            }
        }
        x
    }
}
