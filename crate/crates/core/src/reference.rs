//! Independent equilibrium oracles: brute-force grid minimisation of the
//! potential over the feasible polytope (small path counts only) and a long
//! constant-step mirror-descent refinement. Both produce a certificate with
//! the Wardrop residual — the largest within-block spread between the cost
//! of a used route and the cheapest route of its block.

use crate::md::{md_step_product, MdError};
use crate::network::{Network, NetworkError};
use serde::Serialize;
use thiserror::Error;

/// Routes carrying less than this fraction of their block demand are treated
/// as unused when computing the residual.
const USED_ROUTE_FRACTION: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum ReferenceError {
    #[error("grid search supports at most {max} paths, network has {got}")]
    TooManyPaths { max: usize, got: usize },
    #[error("grid resolution must lie in (0, 1], got {0}")]
    BadResolution(f64),
    #[error("refinement needs at least one iteration")]
    ZeroIterations,
    #[error(transparent)]
    Md(#[from] MdError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// A certified (approximate) minimiser of the potential.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumCertificate {
    pub method: String,
    pub x_star: Vec<f64>,
    pub psi_star: f64,
    /// Largest cost excess of a used route over its block minimum.
    pub residual: f64,
    pub resolution_or_iters: f64,
}

/// Max within-block spread `max_{p used} G_p − min_p G_p`; a route is used
/// when `x_p > 1e-3 d_j`.
pub fn wardrop_residual(network: &Network, x: &[f64]) -> f64 {
    let costs = network.path_costs(x);
    let mut residual = 0.0f64;
    for (j, od) in network.od_pairs().iter().enumerate() {
        let range = network.block_range(j);
        let cheapest = costs[range.clone()]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        for i in range {
            if x[i] > USED_ROUTE_FRACTION * od.demand {
                residual = residual.max(costs[i] - cheapest);
            }
        }
    }
    residual
}

/// Exhaustive search over per-block compositions of `d_j` with step
/// `h · d_j`. Every candidate is feasible by construction; ties are broken
/// by the lexicographically first grid point. Limited to six paths total.
pub fn grid_equilibrium(
    network: &Network,
    resolution: f64,
) -> Result<EquilibriumCertificate, ReferenceError> {
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(ReferenceError::BadResolution(resolution));
    }
    let paths = network.num_paths();
    if paths > 6 {
        return Err(ReferenceError::TooManyPaths {
            max: 6,
            got: paths,
        });
    }
    let steps = (1.0 / resolution).round().max(1.0) as u32;

    let mut best_x: Option<Vec<f64>> = None;
    let mut best_psi = f64::INFINITY;
    let mut point = vec![0.0; paths];
    let blocks: Vec<(std::ops::Range<usize>, f64)> = (0..network.num_od_pairs())
        .map(|j| (network.block_range(j), network.od_pairs()[j].demand))
        .collect();

    fn visit(
        network: &Network,
        blocks: &[(std::ops::Range<usize>, f64)],
        steps: u32,
        block: usize,
        point: &mut Vec<f64>,
        best_psi: &mut f64,
        best_x: &mut Option<Vec<f64>>,
    ) {
        if block == blocks.len() {
            let psi = network.potential(point);
            if psi < *best_psi {
                *best_psi = psi;
                *best_x = Some(point.clone());
            }
            return;
        }
        let (range, demand) = &blocks[block];
        let unit = demand / steps as f64;
        compositions(steps, range.len(), &mut |parts| {
            for (offset, &k) in parts.iter().enumerate() {
                point[range.start + offset] = k as f64 * unit;
            }
            visit(network, blocks, steps, block + 1, point, best_psi, best_x);
        });
    }

    visit(
        network,
        &blocks,
        steps,
        0,
        &mut point,
        &mut best_psi,
        &mut best_x,
    );

    let x_star = best_x.unwrap_or_default();
    let residual = wardrop_residual(network, &x_star);
    Ok(EquilibriumCertificate {
        method: "grid".to_string(),
        psi_star: best_psi.min(network.potential(&x_star)),
        x_star,
        residual,
        resolution_or_iters: resolution,
    })
}

/// Enumerates all ways to split `total` into `parts` nonnegative integers,
/// in lexicographic order, invoking `f` with each composition.
fn compositions(total: u32, parts: usize, f: &mut impl FnMut(&[u32])) {
    let mut buf = vec![0u32; parts];
    fn rec(total: u32, index: usize, buf: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if index + 1 == buf.len() {
            buf[index] = total;
            f(buf);
            return;
        }
        for k in 0..=total {
            buf[index] = k;
            rec(total - k, index + 1, buf, f);
        }
    }
    if parts == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    rec(total, 0, &mut buf, f);
}

/// Long mirror-descent run with the exact cost gradient and a constant step
/// `1 / path_cost_bound`; returns whichever of the final iterate and the
/// trajectory average attains the smaller potential.
pub fn md_refine(
    network: &Network,
    iterations: usize,
    seed: u64,
) -> Result<EquilibriumCertificate, ReferenceError> {
    if iterations == 0 {
        return Err(ReferenceError::ZeroIterations);
    }
    let q = network.simplex();
    let bounds = network.derived_bounds();
    let alpha = if bounds.path_cost_bound > 0.0 {
        1.0 / bounds.path_cost_bound
    } else {
        1.0
    };
    let mut x = q.uniform();
    let mut sum = vec![0.0; x.len()];
    for _ in 0..iterations {
        for (s, v) in sum.iter_mut().zip(&x) {
            *s += v;
        }
        let g = network.path_costs(&x);
        x = md_step_product(&q, &x, &g, alpha)?;
    }
    let average: Vec<f64> = sum.iter().map(|v| v / iterations as f64).collect();
    let (x_star, psi_star) = {
        let psi_last = network.potential(&x);
        let psi_avg = network.potential(&average);
        if psi_last <= psi_avg {
            (x, psi_last)
        } else {
            (average, psi_avg)
        }
    };
    let residual = wardrop_residual(network, &x_star);
    let _ = seed; // the exact-gradient refinement is deterministic
    Ok(EquilibriumCertificate {
        method: "md-refine".to_string(),
        x_star,
        psi_star,
        residual,
        resolution_or_iters: iterations as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PIGOU: &str = include_str!("../../../fixtures/pigou.json");
    const BRAESS: &str = include_str!("../../../fixtures/braess.json");

    #[test]
    fn pigou_grid_finds_the_corner() {
        let net = Network::from_json(PIGOU).unwrap();
        let cert = grid_equilibrium(&net, 0.01).unwrap();
        assert_eq!(cert.x_star, vec![0.0, 1.0]);
        assert!((cert.psi_star - 0.5).abs() < 1e-12);
        assert!(cert.residual <= 1e-12);
    }

    #[test]
    fn symmetric_parallel_links_split_evenly() {
        let doc = r#"{
            "nodes": ["s", "t"],
            "edges": [
                {"id": "e1", "tail": "s", "head": "t", "cost": {"kind": "affine", "a": 0.0, "b": 1.0}},
                {"id": "e2", "tail": "s", "head": "t", "cost": {"kind": "affine", "a": 0.0, "b": 1.0}}
            ],
            "od_pairs": [{"origin": "s", "destination": "t", "demand": 1.0}]
        }"#;
        let net = Network::from_json(doc).unwrap();
        let cert = grid_equilibrium(&net, 0.01).unwrap();
        assert_eq!(cert.x_star, vec![0.5, 0.5]);
        let refined = md_refine(&net, 100_000, 0).unwrap();
        assert!((refined.x_star[0] - 0.5).abs() < 1e-6);
        assert!(refined.residual < 1e-9);
    }

    #[test]
    fn constant_costs_make_everything_optimal() {
        let doc = r#"{
            "nodes": ["s", "t"],
            "edges": [
                {"id": "e1", "tail": "s", "head": "t", "cost": {"kind": "constant", "c": 2.0}},
                {"id": "e2", "tail": "s", "head": "t", "cost": {"kind": "constant", "c": 2.0}}
            ],
            "od_pairs": [{"origin": "s", "destination": "t", "demand": 1.0}]
        }"#;
        let net = Network::from_json(doc).unwrap();
        let refined = md_refine(&net, 200_000, 0).unwrap();
        assert_eq!(refined.residual, 0.0);
        // ties break to the lexicographically first composition
        let cert = grid_equilibrium(&net, 0.5).unwrap();
        assert_eq!(cert.x_star, vec![0.0, 1.0]);
    }

    #[test]
    fn braess_grid_and_refinement_agree() {
        let net = Network::from_json(BRAESS).unwrap();
        let h = 0.01;
        let grid = grid_equilibrium(&net, h).unwrap();
        let refined = md_refine(&net, 300_000, 0).unwrap();
        let l1: f64 = grid
            .x_star
            .iter()
            .zip(&refined.x_star)
            .map(|(a, b)| (a - b).abs())
            .sum();
        assert!(l1 <= 2.0 * h, "l1 distance {l1}");
        let bounds = net.derived_bounds();
        let tol = (2.0 * h * bounds.path_cost_bound).max(1e-3);
        assert!((grid.psi_star - refined.psi_star).abs() <= tol);
        assert!(refined.residual <= 1e-2);
    }

    #[test]
    fn pigou_refinement_hits_the_analytic_value() {
        let net = Network::from_json(PIGOU).unwrap();
        let cert = md_refine(&net, 1_000_000, 1).unwrap();
        assert!((cert.psi_star - 0.5).abs() < 1e-3);
        assert!(cert.residual <= 1e-2);
    }

    #[test]
    fn grid_rejects_large_path_counts_and_bad_resolutions() {
        let doc = r#"{
            "nodes": ["s", "t"],
            "edges": [
                {"id": "e1", "tail": "s", "head": "t", "cost": {"kind": "constant", "c": 1.0}},
                {"id": "e2", "tail": "s", "head": "t", "cost": {"kind": "constant", "c": 1.0}},
                {"id": "e3", "tail": "s", "head": "t", "cost": {"kind": "constant", "c": 1.0}},
                {"id": "e4", "tail": "s", "head": "t", "cost": {"kind": "constant", "c": 1.0}},
                {"id": "e5", "tail": "s", "head": "t", "cost": {"kind": "constant", "c": 1.0}},
                {"id": "e6", "tail": "s", "head": "t", "cost": {"kind": "constant", "c": 1.0}},
                {"id": "e7", "tail": "s", "head": "t", "cost": {"kind": "constant", "c": 1.0}}
            ],
            "od_pairs": [{"origin": "s", "destination": "t", "demand": 1.0}]
        }"#;
        let net = Network::from_json(doc).unwrap();
        assert!(matches!(
            grid_equilibrium(&net, 0.1),
            Err(ReferenceError::TooManyPaths { got: 7, .. })
        ));
        let pigou = Network::from_json(PIGOU).unwrap();
        assert!(matches!(
            grid_equilibrium(&pigou, 0.0),
            Err(ReferenceError::BadResolution(_))
        ));
    }

    #[test]
    fn wardrop_residual_flags_imbalanced_used_routes() {
        let net = Network::from_json(PIGOU).unwrap();
        // both routes used, costs (1, 0.5): residual 0.5
        assert!((wardrop_residual(&net, &[0.5, 0.5]) - 0.5).abs() < 1e-15);
        // the expensive route carries a negligible trickle: ignored
        assert!(wardrop_residual(&net, &[0.0005, 0.9995]) < 1e-3);
    }
}
