//! Prior, data misfit and acceptance ratio.
//!
//! The posterior over obstacle parameters is only ever handled through
//! log-density differences, so no normalization constant appears anywhere.
//! Candidates with invalid geometry receive an infinite misfit, which the
//! acceptance ratio maps to certain rejection.

use ndarray::Array2;

use crate::forward::ForwardEval;
use crate::geometry::ObstacleParams;
use crate::observe::{NoiseCovariance, ObservationMatrix};
use crate::{Error, Real, Result};

/// Isotropic Gaussian prior `N(mean, variance I)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPrior<F> {
    pub mean: Vec<F>,
    pub variance: F,
}

impl<F: Real> GaussianPrior<F> {
    pub fn new(mean: Vec<F>, variance: F) -> Result<Self> {
        if !(variance > F::zero()) {
            return Err(Error::Config("prior variance must be positive".into()));
        }
        Ok(Self { mean, variance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Prior standard deviation.
    pub fn std(&self) -> F {
        self.variance.sqrt()
    }
}

/// Everything a misfit evaluation needs: data, noise weights, a forward
/// evaluator (exact solver or surrogate) and the prior.
pub struct PosteriorContext<'a, F, E> {
    pub observations: &'a ObservationMatrix<F>,
    pub covariance: &'a NoiseCovariance<F>,
    pub forward: &'a E,
    pub prior: &'a GaussianPrior<F>,
}

impl<'a, F: Real, E: ForwardEval<F>> PosteriorContext<'a, F, E> {
    pub fn new(
        observations: &'a ObservationMatrix<F>,
        covariance: &'a NoiseCovariance<F>,
        forward: &'a E,
        prior: &'a GaussianPrior<F>,
    ) -> Result<Self> {
        let shape = observations.data.dim();
        if covariance.variances.dim() != shape {
            return Err(Error::Config("covariance shape differs from data".into()));
        }
        if forward.shape() != shape {
            return Err(Error::Config(format!(
                "forward evaluator produces {:?}, data is {:?}",
                forward.shape(),
                shape
            )));
        }
        Ok(Self { observations, covariance, forward, prior })
    }

    /// Misfit of a precomputed forward value against the observations.
    pub fn misfit_of_values(&self, values: &Array2<F>) -> F {
        let half = F::of(0.5);
        let mut acc = F::zero();
        for ((y, g), v) in self
            .observations
            .data
            .iter()
            .zip(values.iter())
            .zip(self.covariance.variances.iter())
        {
            let d = *y - *g;
            acc += half * d * d / *v;
        }
        acc
    }
}

/// Summed model-data misfit `sum_l 1/2 |Y_l - G_l(Z)|^2_Sigma`.
///
/// Geometry or solver failures yield `+inf`, which rejects the candidate.
pub fn misfit<F: Real, E: ForwardEval<F>>(z: &ObstacleParams<F>, ctx: &PosteriorContext<F, E>) -> F {
    match ctx.forward.eval(z) {
        Ok(values) => ctx.misfit_of_values(&values),
        Err(_) => F::infinity(),
    }
}

/// Log prior density up to its additive constant.
pub fn log_prior<F: Real>(z: &ObstacleParams<F>, prior: &GaussianPrior<F>) -> F {
    let mut q = F::zero();
    for (v, m) in z.values.iter().zip(prior.mean.iter()) {
        let d = *v - *m;
        q += d * d;
    }
    -q / (F::of(2.0) * prior.variance)
}

/// Acceptance probability `min(1, exp(phi_current - phi_candidate))`.
///
/// An infinite candidate misfit is rejected with probability one; an
/// infinite current misfit accepts any finite candidate.
pub fn hastings_ratio<F: Real>(phi_current: F, phi_candidate: F) -> F {
    if phi_candidate.is_infinite() {
        return F::zero();
    }
    if phi_current.is_infinite() {
        return F::one();
    }
    (phi_current - phi_candidate).exp().min(F::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Family;
    use ndarray::array;

    struct FixedForward {
        out: Array2<f64>,
    }

    impl ForwardEval<f64> for FixedForward {
        fn eval(&self, _: &ObstacleParams<f64>) -> Result<Array2<f64>> {
            Ok(self.out.clone())
        }
        fn shape(&self) -> (usize, usize) {
            self.out.dim()
        }
    }

    fn params() -> ObstacleParams<f64> {
        ObstacleParams::new(Family::Kite6, vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn misfit_zero_on_exact_data() {
        let out = array![[1.0, 2.0], [3.0, 4.0]];
        let fwd = FixedForward { out: out.clone() };
        let obs = ObservationMatrix::noise_free(out);
        let cov = NoiseCovariance { variances: Array2::from_elem((2, 2), 1.0e-3) };
        let prior = GaussianPrior::new(vec![0.0; 6], 1.0).unwrap();
        let ctx = PosteriorContext::new(&obs, &cov, &fwd, &prior).unwrap();
        assert_eq!(misfit(&params(), &ctx), 0.0);
    }

    #[test]
    fn misfit_single_entry() {
        // one entry off by delta with variance sigma -> delta^2 / (2 sigma)
        let exact = array![[1.0]];
        let fwd = FixedForward { out: array![[1.25]] };
        let obs = ObservationMatrix::noise_free(exact);
        let cov = NoiseCovariance { variances: array![[0.5]] };
        let prior = GaussianPrior::new(vec![0.0; 6], 1.0).unwrap();
        let ctx = PosteriorContext::new(&obs, &cov, &fwd, &prior).unwrap();
        let phi = misfit(&params(), &ctx);
        assert!((phi - 0.25 * 0.25 / (2.0 * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn misfit_permutation_invariance() {
        let out = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        let obs_data = array![[1.1, 2.2], [2.9, 4.1], [5.3, 5.8]];
        let var = array![[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]];
        let phi = {
            let fwd = FixedForward { out: out.clone() };
            let obs = ObservationMatrix::noise_free(obs_data.clone());
            let cov = NoiseCovariance { variances: var.clone() };
            let prior = GaussianPrior::new(vec![0.0; 6], 1.0).unwrap();
            let ctx = PosteriorContext::new(&obs, &cov, &fwd, &prior).unwrap();
            misfit(&params(), &ctx)
        };
        // reverse direction rows everywhere simultaneously
        let rev = |a: &Array2<f64>| {
            let mut b = a.clone();
            for (m, row) in a.rows().into_iter().enumerate() {
                for (l, v) in row.iter().enumerate() {
                    b[(2 - m, l)] = *v;
                }
            }
            b
        };
        let phi_rev = {
            let fwd = FixedForward { out: rev(&out) };
            let obs = ObservationMatrix::noise_free(rev(&obs_data));
            let cov = NoiseCovariance { variances: rev(&var) };
            let prior = GaussianPrior::new(vec![0.0; 6], 1.0).unwrap();
            let ctx = PosteriorContext::new(&obs, &cov, &fwd, &prior).unwrap();
            misfit(&params(), &ctx)
        };
        assert!((phi - phi_rev).abs() < 1e-14);
    }

    #[test]
    fn log_prior_values() {
        let prior = GaussianPrior::new(vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0], 1.0).unwrap();
        let at_mean =
            ObstacleParams::new(Family::Kite6, prior.mean.clone()).unwrap();
        assert_eq!(log_prior(&at_mean, &prior), 0.0);
        let off = ObstacleParams::new(Family::Kite6, vec![1.0, 2.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!((log_prior(&off, &prior) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_prior_gradient_matches_fd() {
        let prior = GaussianPrior::new(vec![0.2, -0.3, 0.5, 0.0, 1.0, 0.1], 0.7).unwrap();
        let z0 = vec![0.5, 0.1, -0.2, 0.3, 0.9, -0.4];
        let h = 1.0e-6;
        for d in 0..6 {
            let mut plus = z0.clone();
            plus[d] += h;
            let mut minus = z0.clone();
            minus[d] -= h;
            let fd = (log_prior(&ObstacleParams::new(Family::Kite6, plus).unwrap(), &prior)
                - log_prior(&ObstacleParams::new(Family::Kite6, minus).unwrap(), &prior))
                / (2.0 * h);
            let analytic = -(z0[d] - prior.mean[d]) / prior.variance;
            assert!((fd - analytic).abs() < 1e-6);
        }
    }

    #[test]
    fn hastings_ratio_cases() {
        assert_eq!(hastings_ratio(1.0, 1.0), 1.0);
        assert_eq!(hastings_ratio(2.0, 1.0), 1.0); // candidate better, capped
        assert!((hastings_ratio(1.0, 1.0 + std::f64::consts::LN_2) - 0.5).abs() < 1e-15);
        assert_eq!(hastings_ratio(1.0, f64::INFINITY), 0.0);
        assert_eq!(hastings_ratio(f64::INFINITY, 1.0), 1.0);
        assert_eq!(hastings_ratio(f64::INFINITY, f64::INFINITY), 0.0);
    }

    #[test]
    fn hastings_detailed_balance_kernel() {
        for i in 0..50 {
            let a = 0.1 * i as f64;
            let b = 3.0 - 0.07 * i as f64;
            let r1 = hastings_ratio(a, b);
            let r2 = hastings_ratio(b, a);
            if r1 < 1.0 && r2 < 1.0 {
                // both sub-unit only when a == b, ratios are reciprocal otherwise
                assert!((r1 * (1.0 / r2) - (a - b).exp()).abs() < 1e-12);
            } else {
                assert!((r1 / r2 - (a - b).exp()).abs() < 1e-12 * (a - b).exp().max(1.0));
            }
        }
    }
}
