//! Polynomial-chaos surrogate of the phaseless forward map.
//!
//! The forward output is expanded in prior-standardized Hermite tensor
//! polynomials, `|u_inf|(Z) ~ sum_{|alpha| <= order} u_alpha H_alpha(Z)`.
//! Chaos coefficients are Monte-Carlo projections over prior samples; the
//! expensive forward solves are done once per sample and reused for every
//! coefficient. Evaluating the truncated series costs a single pass over
//! the coefficient tensor; for component-at-a-time screening an even
//! cheaper path groups the tensor by the active component's degree so each
//! additional candidate costs `(order + 1) * M * L` multiplications.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::GaussianPrior;
use crate::forward::ForwardEval;
use crate::geometry::{Family, ObstacleParams};
use crate::observe::{NoiseCovariance, ObservationMatrix};
use crate::stream;
use crate::{Error, Real, Result};

/// Highest supported 1-D Hermite degree.
pub const MAX_HERMITE: usize = 16;

/// Index-set size guard.
const MAX_INDICES: usize = 10_000_000;

/// Normalized probabilists' Hermite polynomial `He_m(x) / sqrt(m!)`.
///
/// `He_m` follows the three-term recurrence `He_{m+1} = x He_m - m He_{m-1}`.
pub fn hermite_1d<F: Real>(m: usize, x: F) -> F {
    assert!(m <= MAX_HERMITE, "degree {m} beyond {MAX_HERMITE}");
    let mut prev = F::one();
    if m == 0 {
        return prev;
    }
    let mut cur = x;
    for k in 1..m {
        let next = x * cur - F::of_usize(k) * prev;
        prev = cur;
        cur = next;
    }
    cur / F::of(factorial_f64(m)).sqrt()
}

#[inline]
fn factorial_f64(m: usize) -> f64 {
    // exactly representable for m <= 16
    let mut f = 1.0f64;
    for k in 2..=m {
        f *= k as f64;
    }
    f
}

/// All normalized Hermite values `h_0(x) .. h_max(x)` in one recurrence.
pub fn hermite_all<F: Real>(max_m: usize, x: F, out: &mut [F]) {
    assert!(out.len() > max_m && max_m <= MAX_HERMITE);
    out[0] = F::one();
    if max_m == 0 {
        return;
    }
    // normalized recurrence: h_{m+1} = (x h_m - sqrt(m) h_{m-1}) / sqrt(m+1)
    out[1] = x;
    for m in 1..max_m {
        let sm = F::of_usize(m).sqrt();
        let sm1 = F::of_usize(m + 1).sqrt();
        out[m + 1] = (x * out[m] - sm * out[m - 1]) / sm1;
    }
}

/// Multi-index of one tensor basis function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiIndex {
    pub alpha: Vec<u8>,
}

impl MultiIndex {
    pub fn degree(&self) -> usize {
        self.alpha.iter().map(|&a| a as usize).sum()
    }
}

/// All multi-indices with `|alpha| <= order` over `n` dimensions, ordered by
/// total degree and lexicographically (descending leading entries) within a
/// degree. The order fixes the coefficient serialization.
pub fn build_index_set(n: usize, order: usize) -> Result<Vec<MultiIndex>> {
    let count = binomial(n + order, n)
        .ok_or_else(|| Error::Config("index set size overflows".into()))?;
    if count > MAX_INDICES {
        return Err(Error::Config(format!(
            "index set would hold {count} entries (limit {MAX_INDICES})"
        )));
    }
    let mut out = Vec::with_capacity(count);
    let mut alpha = vec![0u8; n];
    for degree in 0..=order {
        emit_degree(&mut out, &mut alpha, 0, degree);
    }
    debug_assert_eq!(out.len(), count);
    Ok(out)
}

fn emit_degree(out: &mut Vec<MultiIndex>, alpha: &mut Vec<u8>, pos: usize, remaining: usize) {
    if pos + 1 == alpha.len() {
        alpha[pos] = remaining as u8;
        out.push(MultiIndex { alpha: alpha.clone() });
        return;
    }
    for v in (0..=remaining).rev() {
        alpha[pos] = v as u8;
        emit_degree(out, alpha, pos + 1, remaining - v);
    }
    alpha[pos] = 0;
}

/// Binomial coefficient with overflow detection.
pub fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// Prior-standardized tensor basis value `H_alpha(Z)`.
pub fn basis_eval<F: Real>(alpha: &MultiIndex, z: &ObstacleParams<F>, prior: &GaussianPrior<F>) -> F {
    debug_assert_eq!(alpha.alpha.len(), z.dim());
    let std = prior.std();
    let mut acc = F::one();
    for ((&a, &v), &m) in alpha.alpha.iter().zip(z.values.iter()).zip(prior.mean.iter()) {
        if a > 0 {
            acc = acc * hermite_1d(a as usize, (v - m) / std);
        }
    }
    acc
}

/// Truncated chaos expansion of the phaseless forward map.
#[derive(Clone, Debug)]
pub struct GpcSurrogate<F> {
    indices: Vec<MultiIndex>,
    /// Coefficient tensor, one `M x L` block per multi-index.
    coeffs: Vec<Array2<F>>,
    prior: GaussianPrior<F>,
    family: Family,
    order: usize,
    n_directions: usize,
    n_sources: usize,
    mc_samples: usize,
    seed: u64,
    /// Prior draws rejected (invalid geometry) and redrawn during the build.
    rejected_draws: u64,
}

impl<F: Real> GpcSurrogate<F> {
    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn coefficient(&self, index: usize) -> &Array2<F> {
        &self.coeffs[index]
    }

    pub fn prior(&self) -> &GaussianPrior<F> {
        &self.prior
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mc_samples(&self) -> usize {
        self.mc_samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rejected_draws(&self) -> u64 {
        self.rejected_draws
    }

    /// Evaluate the surrogate forward map at `z`.
    ///
    /// Basis values are computed once and reused across all `(l, m)`;
    /// truncation undershoot may produce negative magnitudes, returned as-is.
    pub fn eval_matrix(&self, z: &ObstacleParams<F>) -> Array2<F> {
        let h = self.basis_vector(z);
        let mut out = Array2::zeros((self.n_directions, self.n_sources));
        for (ha, block) in h.iter().zip(self.coeffs.iter()) {
            if *ha != F::zero() {
                out.zip_mut_with(block, |o, &c| *o += *ha * c);
            }
        }
        out
    }

    fn basis_vector(&self, z: &ObstacleParams<F>) -> Vec<F> {
        let n = self.prior.dim();
        let std = self.prior.std();
        let mut table = vec![[F::zero(); MAX_HERMITE + 1]; n];
        for d in 0..n {
            let xi = (z.values[d] - self.prior.mean[d]) / std;
            hermite_all(self.order, xi, &mut table[d][..=self.order]);
        }
        self.indices
            .iter()
            .map(|mi| {
                let mut acc = F::one();
                for (d, &a) in mi.alpha.iter().enumerate() {
                    if a > 0 {
                        acc = acc * table[d][a as usize];
                    }
                }
                acc
            })
            .collect()
    }
}

impl<F: Real> ForwardEval<F> for GpcSurrogate<F> {
    fn eval(&self, z: &ObstacleParams<F>) -> Result<Array2<F>> {
        Ok(self.eval_matrix(z))
    }

    fn shape(&self) -> (usize, usize) {
        (self.n_directions, self.n_sources)
    }
}

/// Monte-Carlo projection of the chaos coefficients.
///
/// Draws `n_samples` prior samples (invalid geometries are rejected and
/// redrawn from a fresh substream), runs the forward map once per sample,
/// then averages `|u_inf| H_alpha(Z)` over the samples for every index.
/// Fails when more than half of all draws are invalid.
pub fn project_mc<F: Real, E: ForwardEval<F>>(
    forward: &E,
    family: Family,
    prior: &GaussianPrior<F>,
    order: usize,
    n_samples: usize,
    seed: u64,
) -> Result<GpcSurrogate<F>> {
    if n_samples == 0 {
        return Err(Error::Config("need at least one sample".into()));
    }
    if prior.dim() != family.dim() {
        return Err(Error::Config("prior dimension does not match the family".into()));
    }
    let indices = build_index_set(prior.dim(), order)?;
    let (m, l) = forward.shape();
    let std = prior.std();

    // forward solves, parallel over samples, deterministic per sample
    let per_sample: Vec<Result<(Vec<F>, Array2<F>, u64)>> = (0..n_samples)
        .into_par_iter()
        .map(|s| {
            let mut rejected = 0u64;
            for attempt in 0..200u64 {
                let values: Vec<F> = (0..prior.dim())
                    .map(|d| {
                        prior.mean[d]
                            + std
                                * F::of(stream::standard_normal(&[
                                    seed,
                                    1, // purpose tag: prior draws
                                    s as u64,
                                    attempt,
                                    d as u64,
                                ]))
                    })
                    .collect();
                let z = ObstacleParams::new(family, values.clone())?;
                match forward.eval(&z) {
                    Ok(data) => return Ok((values, data, rejected)),
                    Err(_) => rejected += 1,
                }
            }
            Err(Error::PriorMismatch(format!(
                "sample {s}: 200 consecutive prior draws invalid"
            )))
        })
        .collect();

    let mut samples = Vec::with_capacity(n_samples);
    let mut rejected_total = 0u64;
    for r in per_sample {
        let (values, data, rejected) = r?;
        rejected_total += rejected;
        samples.push((values, data));
    }
    if rejected_total as usize > n_samples {
        // more rejections than accepted draws means > 50% invalid
        return Err(Error::PriorMismatch(format!(
            "{rejected_total} of {} prior draws were invalid",
            rejected_total as usize + n_samples
        )));
    }

    // basis values per sample, then blocked coefficient accumulation
    let n_basis = indices.len();
    let h_rows: Vec<Vec<F>> = samples
        .par_iter()
        .map(|(values, _)| {
            let n = prior.dim();
            let mut table = vec![[F::zero(); MAX_HERMITE + 1]; n];
            for d in 0..n {
                let xi = (values[d] - prior.mean[d]) / std;
                hermite_all(order, xi, &mut table[d][..=order]);
            }
            indices
                .iter()
                .map(|mi| {
                    let mut acc = F::one();
                    for (d, &a) in mi.alpha.iter().enumerate() {
                        if a > 0 {
                            acc = acc * table[d][a as usize];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();

    let inv_n = F::one() / F::of_usize(n_samples);
    let coeffs: Vec<Array2<F>> = (0..n_basis)
        .into_par_iter()
        .map(|a| {
            let mut acc = Array2::<F>::zeros((m, l));
            for (h_row, (_, data)) in h_rows.iter().zip(samples.iter()) {
                let ha = h_row[a];
                if ha != F::zero() {
                    acc.zip_mut_with(data, |o, &v| *o += ha * v);
                }
            }
            acc.mapv_inplace(|v| v * inv_n);
            acc
        })
        .collect();

    Ok(GpcSurrogate {
        indices,
        coeffs,
        prior: prior.clone(),
        family,
        order,
        n_directions: m,
        n_sources: l,
        mc_samples: n_samples,
        seed,
        rejected_draws: rejected_total,
    })
}

/// Surrogate misfit evaluator bound to one observation set.
pub struct SurrogateMisfit<'a, F> {
    surrogate: &'a GpcSurrogate<F>,
    observations: &'a ObservationMatrix<F>,
    /// `1 / (2 sigma)` per entry.
    half_inv_var: Array2<F>,
}

impl<'a, F: Real> SurrogateMisfit<'a, F> {
    pub fn new(
        surrogate: &'a GpcSurrogate<F>,
        observations: &'a ObservationMatrix<F>,
        covariance: &'a NoiseCovariance<F>,
    ) -> Result<Self> {
        let shape = (surrogate.n_directions, surrogate.n_sources);
        if observations.data.dim() != shape || covariance.variances.dim() != shape {
            return Err(Error::Config("surrogate and data shapes differ".into()));
        }
        let half = F::of(0.5);
        Ok(Self {
            surrogate,
            observations,
            half_inv_var: covariance.variances.mapv(|v| half / v),
        })
    }

    /// Misfit of the surrogate at an arbitrary parameter vector.
    pub fn misfit(&self, z: &ObstacleParams<F>) -> F {
        let g = self.surrogate.eval_matrix(z);
        let mut acc = F::zero();
        for ((y, gv), w) in self
            .observations
            .data
            .iter()
            .zip(g.iter())
            .zip(self.half_inv_var.iter())
        {
            let d = *y - *gv;
            acc += d * d * *w;
        }
        acc
    }

    /// Screening evaluator for sweeps of one component.
    ///
    /// Grouping the tensor by the active component's degree turns each
    /// candidate into a short contraction over `order + 1` partial blocks.
    pub fn screener(&'a self, base: &ObstacleParams<F>, component: usize) -> ComponentScreener<'a, F> {
        let sur = self.surrogate;
        let order = sur.order;
        let n = sur.prior.dim();
        let std = sur.prior.std();
        let mut table = vec![[F::zero(); MAX_HERMITE + 1]; n];
        for d in 0..n {
            let xi = (base.values[d] - sur.prior.mean[d]) / std;
            hermite_all(order, xi, &mut table[d][..=order]);
        }
        let shape = (sur.n_directions, sur.n_sources);
        let mut partials = vec![Array2::<F>::zeros(shape); order + 1];
        for (mi, block) in sur.indices.iter().zip(sur.coeffs.iter()) {
            let mut rest = F::one();
            for (d, &a) in mi.alpha.iter().enumerate() {
                if d != component && a > 0 {
                    rest = rest * table[d][a as usize];
                }
            }
            if rest != F::zero() {
                partials[mi.alpha[component] as usize]
                    .zip_mut_with(block, |o, &c| *o += rest * c);
            }
        }
        ComponentScreener {
            misfit_ctx: self,
            partials,
            component,
            mean: sur.prior.mean[component],
            std,
            order,
        }
    }
}

/// Per-component surrogate evaluator shared by a candidate pool.
pub struct ComponentScreener<'a, F> {
    misfit_ctx: &'a SurrogateMisfit<'a, F>,
    partials: Vec<Array2<F>>,
    component: usize,
    mean: F,
    std: F,
    order: usize,
}

impl<'a, F: Real> ComponentScreener<'a, F> {
    pub fn component(&self) -> usize {
        self.component
    }

    /// Surrogate forward matrix with the active component set to `value`.
    pub fn eval_matrix(&self, value: F) -> Array2<F> {
        let mut h = [F::zero(); MAX_HERMITE + 1];
        hermite_all(self.order, (value - self.mean) / self.std, &mut h[..=self.order]);
        let mut out = self.partials[0].mapv(|p| p * h[0]);
        for v in 1..=self.order {
            if h[v] != F::zero() {
                out.zip_mut_with(&self.partials[v], |o, &p| *o += h[v] * p);
            }
        }
        out
    }

    /// Surrogate misfit with the active component set to `value`.
    pub fn misfit(&self, value: F) -> F {
        let mut h = [F::zero(); MAX_HERMITE + 1];
        hermite_all(self.order, (value - self.mean) / self.std, &mut h[..=self.order]);
        let obs = &self.misfit_ctx.observations.data;
        let w = &self.misfit_ctx.half_inv_var;
        let mut acc = F::zero();
        let (rows, cols) = obs.dim();
        for r in 0..rows {
            for c in 0..cols {
                let mut g = F::zero();
                for v in 0..=self.order {
                    g += h[v] * self.partials[v][(r, c)];
                }
                let d = obs[(r, c)] - g;
                acc += d * d * w[(r, c)];
            }
        }
        acc
    }
}

const MAGIC: &[u8; 8] = b"GPCSURR1";

/// Sidecar description of a serialized surrogate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurrogateMeta {
    pub family: Family,
    pub n_params: usize,
    pub order: usize,
    pub n_sources: usize,
    pub n_directions: usize,
    pub mc_samples: usize,
    pub seed: u64,
    pub rejected_draws: u64,
    pub n_basis: usize,
    pub prior_mean: Vec<f64>,
    pub prior_variance: f64,
    pub index_order: String,
    pub tensor_layout: String,
}

impl<F: Real> GpcSurrogate<F> {
    pub fn meta(&self) -> SurrogateMeta {
        SurrogateMeta {
            family: self.family,
            n_params: self.prior.dim(),
            order: self.order,
            n_sources: self.n_sources,
            n_directions: self.n_directions,
            mc_samples: self.mc_samples,
            seed: self.seed,
            rejected_draws: self.rejected_draws,
            n_basis: self.indices.len(),
            prior_mean: self.prior.mean.iter().map(|v| v.as_f64()).collect(),
            prior_variance: self.prior.variance.as_f64(),
            index_order: "graded-lexicographic".into(),
            tensor_layout: "index-major, then source, then direction; f64 little-endian".into(),
        }
    }

    /// Write the binary container and its JSON sidecar.
    pub fn save(&self, bin_path: &Path, json_path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(bin_path)?);
        out.write_all(MAGIC)?;
        let family_tag: u32 = match self.family {
            Family::Kite6 => 0,
            Family::StarFourier { n_r } => 1 + n_r as u32,
        };
        for v in [
            family_tag,
            self.prior.dim() as u32,
            self.order as u32,
            self.n_sources as u32,
            self.n_directions as u32,
        ] {
            out.write_all(&v.to_le_bytes())?;
        }
        for v in [self.mc_samples as u64, self.seed, self.rejected_draws, self.indices.len() as u64] {
            out.write_all(&v.to_le_bytes())?;
        }
        for m in &self.prior.mean {
            out.write_all(&m.as_f64().to_le_bytes())?;
        }
        out.write_all(&self.prior.variance.as_f64().to_le_bytes())?;
        // coefficients in (index, source, direction) order
        for block in &self.coeffs {
            for l in 0..self.n_sources {
                for m in 0..self.n_directions {
                    out.write_all(&block[(m, l)].as_f64().to_le_bytes())?;
                }
            }
        }
        drop(out);
        let meta = serde_json::to_string_pretty(&self.meta())
            .map_err(|e| Error::Format(format!("meta serialization: {e}")))?;
        std::fs::write(json_path, meta)?;
        Ok(())
    }

    /// Read a binary container written by [`GpcSurrogate::save`].
    pub fn load(bin_path: &Path) -> Result<Self> {
        let mut file = std::io::BufReader::new(std::fs::File::open(bin_path)?);
        let mut magic = [0u8; 8];
        file.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a surrogate container".into()));
        }
        let mut u32buf = [0u8; 4];
        let mut read_u32 = |f: &mut dyn Read| -> Result<u32> {
            f.read_exact(&mut u32buf)?;
            Ok(u32::from_le_bytes(u32buf))
        };
        let family_tag = read_u32(&mut file)?;
        let n_params = read_u32(&mut file)? as usize;
        let order = read_u32(&mut file)? as usize;
        let n_sources = read_u32(&mut file)? as usize;
        let n_directions = read_u32(&mut file)? as usize;
        let mut u64buf = [0u8; 8];
        let mut read_u64 = |f: &mut dyn Read| -> Result<u64> {
            f.read_exact(&mut u64buf)?;
            Ok(u64::from_le_bytes(u64buf))
        };
        let mc_samples = read_u64(&mut file)? as usize;
        let seed = read_u64(&mut file)?;
        let rejected_draws = read_u64(&mut file)?;
        let n_basis = read_u64(&mut file)? as usize;
        let mut f64buf = [0u8; 8];
        let mut read_f64 = |f: &mut dyn Read| -> Result<f64> {
            f.read_exact(&mut f64buf)?;
            Ok(f64::from_le_bytes(f64buf))
        };
        let mean: Vec<F> = (0..n_params)
            .map(|_| read_f64(&mut file).map(F::of))
            .collect::<Result<_>>()?;
        let variance = F::of(read_f64(&mut file)?);
        let family = match family_tag {
            0 => Family::Kite6,
            t => Family::StarFourier { n_r: (t - 1) as usize },
        };
        if family.dim() != n_params {
            return Err(Error::Format("family tag inconsistent with dimension".into()));
        }
        let indices = build_index_set(n_params, order)?;
        if indices.len() != n_basis {
            return Err(Error::Format(format!(
                "container lists {n_basis} basis functions, index set has {}",
                indices.len()
            )));
        }
        let mut coeffs = Vec::with_capacity(n_basis);
        for _ in 0..n_basis {
            let mut block = Array2::<F>::zeros((n_directions, n_sources));
            for l in 0..n_sources {
                for m in 0..n_directions {
                    block[(m, l)] = F::of(read_f64(&mut file)?);
                }
            }
            coeffs.push(block);
        }
        Ok(Self {
            indices,
            coeffs,
            prior: GaussianPrior::new(mean, variance)?,
            family,
            order,
            n_directions,
            n_sources,
            mc_samples,
            seed,
            rejected_draws,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_base_cases() {
        for &x in &[-1.7f64, 0.0, 0.4, 2.3] {
            assert_eq!(hermite_1d(0, x), 1.0);
            assert_eq!(hermite_1d(1, x), x);
            let h2 = (x * x - 1.0) / 2.0f64.sqrt();
            assert!((hermite_1d(2, x) - h2).abs() < 1e-14);
        }
    }

    #[test]
    fn hermite_all_matches_single() {
        let mut buf = [0.0f64; MAX_HERMITE + 1];
        for &x in &[-2.0f64, 0.3, 1.9] {
            hermite_all(9, x, &mut buf[..=9]);
            for m in 0..=9 {
                assert!(
                    (buf[m] - hermite_1d(m, x)).abs() < 1e-11 * buf[m].abs().max(1.0),
                    "mismatch at m={m}, x={x}"
                );
            }
        }
    }

    #[test]
    fn index_set_counts() {
        assert_eq!(build_index_set(2, 2).unwrap().len(), 6);
        assert_eq!(build_index_set(6, 9).unwrap().len(), 5005);
        assert_eq!(build_index_set(4, 0).unwrap().len(), 1);
        for n in 1..=12usize {
            for order in 0..=12usize {
                if let Some(c) = binomial(n + order, n) {
                    if c <= MAX_INDICES {
                        assert_eq!(build_index_set(n, order).unwrap().len(), c);
                    }
                }
            }
        }
    }

    #[test]
    fn index_set_graded_and_deterministic() {
        let set = build_index_set(3, 3).unwrap();
        assert_eq!(set[0].alpha, vec![0, 0, 0]);
        // degrees never decrease along the enumeration
        let mut last = 0usize;
        for mi in &set {
            assert!(mi.degree() >= last);
            last = mi.degree();
        }
        let again = build_index_set(3, 3).unwrap();
        assert_eq!(set, again);
    }

    #[test]
    fn basis_eval_cases() {
        let prior = GaussianPrior::new(vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0], 1.0).unwrap();
        let z = ObstacleParams::new(Family::Kite6, prior.mean.clone()).unwrap();
        let zero = MultiIndex { alpha: vec![0; 6] };
        assert_eq!(basis_eval(&zero, &z, &prior), 1.0);
        // any degree-one factor vanishes at the mean
        let one = MultiIndex { alpha: vec![0, 1, 0, 0, 0, 0] };
        assert_eq!(basis_eval(&one, &z, &prior), 0.0);
    }
}
