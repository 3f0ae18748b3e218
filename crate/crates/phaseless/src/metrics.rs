//! Reconstruction quality metrics and the sampler cost model.

use serde::{Deserialize, Serialize};

use crate::geometry::{make_curve, sample_boundary, BoundaryCurve, ObstacleParams};
use crate::{Error, Real, Result};

/// Discrete two-sided Hausdorff distance between sampled boundaries.
pub fn hausdorff<F: Real>(a: &BoundaryCurve<F>, b: &BoundaryCurve<F>, n_pts: usize) -> F {
    assert!(n_pts >= 64, "Hausdorff grid too coarse");
    let pa = sample_boundary(a, n_pts);
    let pb = sample_boundary(b, n_pts);
    hausdorff_points(&pa, &pb)
}

/// Hausdorff distance between two point sets (brute-force nearest search).
pub fn hausdorff_points<F: Real>(a: &[[F; 2]], b: &[[F; 2]]) -> F {
    directed_sq(a, b).max(directed_sq(b, a)).sqrt()
}

fn directed_sq<F: Real>(from: &[[F; 2]], to: &[[F; 2]]) -> F {
    let mut worst = F::zero();
    for p in from {
        let mut best = F::infinity();
        for q in to {
            let dx = p[0] - q[0];
            let dy = p[1] - q[1];
            let d = dx * dx + dy * dy;
            if d < best {
                best = d;
            }
        }
        if best > worst {
            worst = best;
        }
    }
    worst
}

/// Statistics over an ensemble of reconstructions of one exact obstacle.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleSummary {
    /// Componentwise mean of the reconstructed parameter vectors.
    pub param_mean: Vec<f64>,
    /// Mean of the per-reconstruction Hausdorff distances.
    pub hd_mean: f64,
    /// Population standard deviation (divisor `n`) of those distances.
    pub hd_sd: f64,
    pub count: usize,
}

/// Mean parameters plus mean/SD of Hausdorff distances against the exact
/// boundary, sampled at `n_pts` points.
pub fn ensemble_stats<F: Real>(
    reconstructions: &[ObstacleParams<F>],
    exact: &ObstacleParams<F>,
    n_pts: usize,
) -> Result<EnsembleSummary> {
    if reconstructions.is_empty() {
        return Err(Error::Config("empty reconstruction ensemble".into()));
    }
    let dim = exact.dim();
    if reconstructions.iter().any(|r| r.dim() != dim) {
        return Err(Error::Config("mixed parameter dimensions in ensemble".into()));
    }
    let exact_curve = make_curve(exact.clone());
    let exact_pts = sample_boundary(&exact_curve, n_pts);

    let mut param_mean = vec![0.0f64; dim];
    let mut hds = Vec::with_capacity(reconstructions.len());
    for r in reconstructions {
        for (acc, v) in param_mean.iter_mut().zip(r.values.iter()) {
            *acc += v.as_f64();
        }
        let pts = sample_boundary(&make_curve(r.clone()), n_pts);
        hds.push(hausdorff_points(&pts, &exact_pts).as_f64());
    }
    let n = reconstructions.len() as f64;
    for v in &mut param_mean {
        *v /= n;
    }
    let hd_mean = hds.iter().sum::<f64>() / n;
    let hd_var = hds.iter().map(|h| (h - hd_mean).powi(2)).sum::<f64>() / n;
    Ok(EnsembleSummary {
        param_mean,
        hd_mean,
        hd_sd: hd_var.sqrt(),
        count: reconstructions.len(),
    })
}

/// Cost model of the three samplers for measured unit costs.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CostReport {
    /// Single-candidate Gibbs cost `T0 N J0`.
    pub t: f64,
    /// Surrogate-screened cost `(T1 + T0 Jhat2) N J0`.
    pub t_hat: f64,
    /// Multi-candidate cost `T0 Jhat1 N J0`.
    pub t_multi: f64,
    /// `t_hat / t_multi`.
    pub r_t: f64,
}

/// Evaluate the cost model.
///
/// `t0` is the measured cost of one full forward map (all sources), `t1`
/// the measured cost of surrogate-evaluating a whole pool of `j_hat_1`
/// candidates.
pub fn cost_report(t0: f64, t1: f64, j_hat_1: usize, j_hat_2: usize, n: usize, j0: usize) -> CostReport {
    let nj = (n * j0) as f64;
    let t = t0 * nj;
    let t_hat = (t1 + t0 * j_hat_2 as f64) * nj;
    let t_multi = t0 * j_hat_1 as f64 * nj;
    CostReport { t, t_hat, t_multi, r_t: t_hat / t_multi }
}
