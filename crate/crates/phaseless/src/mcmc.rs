//! Gibbs samplers over obstacle parameters.
//!
//! Three chain drivers share one component-at-a-time structure:
//!
//! * [`run_gibbs_rpv`] — pCN proposals with a per-component random proposal
//!   variance, Metropolis-accepted on the misfit difference;
//! * [`run_multi_candidate`] — a pool of pCN candidates per component, the
//!   best true misfit adopted unconditionally;
//! * [`run_surrogate_screen`] — the pool is ranked by the cheap surrogate
//!   misfit first and only a shortlist is re-ranked with the true solver.
//!
//! Chains are deterministic functions of the seed; candidate pools may be
//! evaluated in parallel and are reduced with an index tie-break.

use std::io::Write;
use std::path::Path;

use rand::distributions::Standard;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{hastings_ratio, misfit, PosteriorContext};
use crate::forward::ForwardEval;
use crate::geometry::{Family, ObstacleParams};
use crate::gpc::{GpcSurrogate, SurrogateMisfit};
use crate::{Error, Real, Result};

/// Sampler selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    /// Gibbs pCN with random proposal variance.
    #[serde(rename = "alg1")]
    GibbsRpv,
    /// Multi-candidate Gibbs, true misfit on the whole pool.
    #[serde(rename = "alg3")]
    MultiCandidate,
    /// Surrogate-screened multi-candidate Gibbs.
    #[serde(rename = "alg2-surrogate")]
    SurrogateScreen,
}

/// Chain iteration and selection parameters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChainConfig<F> {
    /// Total sweeps.
    pub j0: usize,
    /// Burn-in length.
    pub j1: usize,
    /// Thinning stride.
    pub j2: usize,
    /// Number of selected states.
    pub j3: usize,
    /// Step size of the proposal-variance random walk.
    pub gamma: F,
    /// Initial proposal variance coefficient for every component.
    pub beta0: F,
    /// Candidate pool size (multi-candidate and surrogate samplers).
    pub j_hat_1: usize,
    /// Shortlist re-ranked with the true misfit (surrogate sampler).
    pub j_hat_2: usize,
    pub seed: u64,
    /// Drop the prior mean from the pool proposal, as a literal reading of
    /// the multi-candidate update would have it.
    pub literal_multi_proposal: bool,
    /// Add the current component value to every candidate pool, making the
    /// chain misfit non-increasing.
    pub include_current_in_pool: bool,
}

impl<F: Real> Default for ChainConfig<F> {
    fn default() -> Self {
        Self {
            j0: 20000,
            j1: 10000,
            j2: 100,
            j3: 101,
            gamma: F::of(0.1),
            beta0: F::of(0.5),
            j_hat_1: 1000,
            j_hat_2: 100,
            seed: 1,
            literal_multi_proposal: false,
            include_current_in_pool: false,
        }
    }
}

impl<F: Real> ChainConfig<F> {
    /// Number of selected states implied by `(j0, j1, j2)`.
    pub fn selection_count(j0: usize, j1: usize, j2: usize) -> usize {
        (j0 - j1) / j2 + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.j1 >= self.j0 {
            return Err(Error::Config(format!("burn-in {} >= total {}", self.j1, self.j0)));
        }
        if self.j2 == 0 || self.j3 == 0 {
            return Err(Error::Config("thinning stride and selection count must be positive".into()));
        }
        if self.j1 + (self.j3 - 1) * self.j2 > self.j0 {
            return Err(Error::Config(format!(
                "selection overflows the chain: {} + ({} - 1) * {} > {}",
                self.j1, self.j3, self.j2, self.j0
            )));
        }
        let unit = |v: F| v >= F::zero() && v <= F::one();
        if !unit(self.gamma) || !unit(self.beta0) {
            return Err(Error::Config("gamma and beta0 must lie in [0, 1]".into()));
        }
        if self.j_hat_1 == 0 || self.j_hat_2 == 0 || self.j_hat_2 > self.j_hat_1 {
            return Err(Error::Config(format!(
                "need 1 <= j_hat_2 <= j_hat_1, got {} and {}",
                self.j_hat_2, self.j_hat_1
            )));
        }
        Ok(())
    }
}

/// Current chain position.
#[derive(Clone, Debug)]
pub struct ChainState<F> {
    pub z: ObstacleParams<F>,
    pub beta: Vec<F>,
    pub misfit: F,
    pub iteration: usize,
}

/// Full recorded chain, index 0 holding the initial state.
#[derive(Clone, Debug)]
pub struct Chain<F> {
    pub states: Vec<ChainState<F>>,
}

/// pCN proposal for one component.
pub fn pcn_propose<F: Real>(z_n: F, m_n: F, beta_n: F, omega_n: F) -> F {
    m_n + (F::one() - beta_n * beta_n).sqrt() * (z_n - m_n) + beta_n * omega_n
}

/// Random-walk update of the proposal variance coefficient, folded back
/// into [0, 1] by the sign flip below zero and the shift above one.
pub fn beta_update<F: Real>(beta_n: F, gamma: F, omega_beta: F) -> F {
    let b = (F::one() - gamma * gamma).sqrt() * beta_n + gamma * (omega_beta - F::of(0.5));
    if b < F::zero() {
        -b
    } else if b > F::one() {
        b - F::one()
    } else {
        b
    }
}

/// One full Gibbs sweep with random proposal variance (single-candidate).
pub fn gibbs_sweep<F, E, R>(
    state: &mut ChainState<F>,
    ctx: &PosteriorContext<F, E>,
    cfg: &ChainConfig<F>,
    rng: &mut R,
) where
    F: Real,
    E: ForwardEval<F>,
    R: Rng,
    StandardNormal: Distribution<F>,
    Standard: Distribution<F>,
{
    let std = ctx.prior.std();
    for n in 0..state.z.dim() {
        let omega: F = std * rng.sample(StandardNormal);
        let cand_val = pcn_propose(state.z.values[n], ctx.prior.mean[n], state.beta[n], omega);
        let mut cand = state.z.clone();
        cand.values[n] = cand_val;
        let phi_cand = misfit(&cand, ctx);
        let u: F = rng.sample(Standard);
        if u <= hastings_ratio(state.misfit, phi_cand) {
            state.z = cand;
            state.misfit = phi_cand;
        }
        let wb: F = rng.sample(Standard);
        state.beta[n] = beta_update(state.beta[n], cfg.gamma, wb);
    }
}

/// Candidate pool for one component under the shared proposal coefficient.
fn draw_pool<F, R>(
    current: F,
    mean: F,
    beta: F,
    prior_std: F,
    cfg: &ChainConfig<F>,
    rng: &mut R,
) -> Vec<F>
where
    F: Real,
    R: Rng,
    StandardNormal: Distribution<F>,
{
    let m = if cfg.literal_multi_proposal { F::zero() } else { mean };
    let mut pool = Vec::with_capacity(cfg.j_hat_1 + 1);
    if cfg.include_current_in_pool {
        pool.push(current);
    }
    for _ in 0..cfg.j_hat_1 {
        let omega: F = prior_std * rng.sample(StandardNormal);
        pool.push(pcn_propose(current, m, beta, omega));
    }
    pool
}

/// Multi-candidate update of component `n`: the pool's best true misfit is
/// adopted unconditionally; an all-invalid pool leaves the state unchanged.
pub fn multi_candidate_step<F, E, R>(
    state: &mut ChainState<F>,
    n: usize,
    ctx: &PosteriorContext<F, E>,
    cfg: &ChainConfig<F>,
    rng: &mut R,
) where
    F: Real,
    E: ForwardEval<F>,
    R: Rng,
    StandardNormal: Distribution<F>,
    Standard: Distribution<F>,
{
    let pool = draw_pool(
        state.z.values[n],
        ctx.prior.mean[n],
        state.beta[n],
        ctx.prior.std(),
        cfg,
        rng,
    );
    let misfits: Vec<F> = pool
        .par_iter()
        .map(|&v| {
            let mut cand = state.z.clone();
            cand.values[n] = v;
            misfit(&cand, ctx)
        })
        .collect();
    if let Some((idx, phi)) = argmin(&misfits) {
        if phi.is_finite() {
            state.z.values[n] = pool[idx];
            state.misfit = phi;
        }
    }
    let wb: F = rng.sample(Standard);
    state.beta[n] = beta_update(state.beta[n], cfg.gamma, wb);
}

/// Surrogate-screened update of component `n`: the pool is ranked by the
/// surrogate misfit, the best `j_hat_2` re-ranked by the true misfit, and
/// the winner adopted. At most `j_hat_2` true solves are spent.
pub fn surrogate_screen_step<F, E, R>(
    state: &mut ChainState<F>,
    n: usize,
    ctx: &PosteriorContext<F, E>,
    surrogate: &SurrogateMisfit<'_, F>,
    cfg: &ChainConfig<F>,
    rng: &mut R,
) where
    F: Real,
    E: ForwardEval<F>,
    R: Rng,
    StandardNormal: Distribution<F>,
    Standard: Distribution<F>,
{
    let pool = draw_pool(
        state.z.values[n],
        ctx.prior.mean[n],
        state.beta[n],
        ctx.prior.std(),
        cfg,
        rng,
    );
    let screener = surrogate.screener(&state.z, n);
    let mut order: Vec<usize> = (0..pool.len()).collect();
    let cheap: Vec<F> = pool.iter().map(|&v| screener.misfit(v)).collect();
    order.sort_by(|&a, &b| {
        cheap[a]
            .partial_cmp(&cheap[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let shortlist: Vec<usize> = order.into_iter().take(cfg.j_hat_2).collect();
    let true_misfits: Vec<F> = shortlist
        .par_iter()
        .map(|&idx| {
            let mut cand = state.z.clone();
            cand.values[n] = pool[idx];
            misfit(&cand, ctx)
        })
        .collect();
    if let Some((pos, phi)) = argmin(&true_misfits) {
        if phi.is_finite() {
            state.z.values[n] = pool[shortlist[pos]];
            state.misfit = phi;
        }
    }
    let wb: F = rng.sample(Standard);
    state.beta[n] = beta_update(state.beta[n], cfg.gamma, wb);
}

fn argmin<F: Real>(values: &[F]) -> Option<(usize, F)> {
    let mut best: Option<(usize, F)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            None => best = Some((i, v)),
            Some((_, b)) if v < b => best = Some((i, v)),
            _ => {}
        }
    }
    best
}

/// Initial state: the given start or a valid draw from the prior.
fn initial_state<F, E, R>(
    family: Family,
    ctx: &PosteriorContext<F, E>,
    cfg: &ChainConfig<F>,
    start: Option<ObstacleParams<F>>,
    rng: &mut R,
) -> Result<ChainState<F>>
where
    F: Real,
    E: ForwardEval<F>,
    R: Rng,
    StandardNormal: Distribution<F>,
{
    let dim = ctx.prior.dim();
    if family.dim() != dim {
        return Err(Error::Config(format!(
            "prior dimension {dim} does not match {family:?}"
        )));
    }
    let beta = vec![cfg.beta0; dim];
    if let Some(z) = start {
        if z.dim() != dim {
            return Err(Error::Config("start vector has wrong dimension".into()));
        }
        let phi = misfit(&z, ctx);
        return Ok(ChainState { z, beta, misfit: phi, iteration: 0 });
    }
    let std = ctx.prior.std();
    for _ in 0..1000 {
        let values: Vec<F> = ctx
            .prior
            .mean
            .iter()
            .map(|&m| m + std * rng.sample::<F, _>(StandardNormal))
            .collect();
        let z = ObstacleParams::new(family, values)?;
        let phi = misfit(&z, ctx);
        if phi.is_finite() {
            return Ok(ChainState { z, beta, misfit: phi, iteration: 0 });
        }
    }
    Err(Error::PriorMismatch(
        "could not draw a valid initial state from the prior".into(),
    ))
}

fn drive<F, S>(mut state: ChainState<F>, j0: usize, mut sweep: S) -> Chain<F>
where
    F: Real,
    S: FnMut(&mut ChainState<F>),
{
    let mut states = Vec::with_capacity(j0 + 1);
    states.push(state.clone());
    for j in 0..j0 {
        sweep(&mut state);
        state.iteration = j + 1;
        states.push(state.clone());
    }
    Chain { states }
}

/// Algorithm of record: Gibbs pCN with random proposal variance.
pub fn run_gibbs_rpv<F, E>(
    family: Family,
    ctx: &PosteriorContext<F, E>,
    cfg: &ChainConfig<F>,
    start: Option<ObstacleParams<F>>,
) -> Result<Chain<F>>
where
    F: Real,
    E: ForwardEval<F>,
    StandardNormal: Distribution<F>,
    Standard: Distribution<F>,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let state = initial_state(family, ctx, cfg, start, &mut rng)?;
    Ok(drive(state, cfg.j0, |s| gibbs_sweep(s, ctx, cfg, &mut rng)))
}

/// Multi-candidate Gibbs chain.
pub fn run_multi_candidate<F, E>(
    family: Family,
    ctx: &PosteriorContext<F, E>,
    cfg: &ChainConfig<F>,
    start: Option<ObstacleParams<F>>,
) -> Result<Chain<F>>
where
    F: Real,
    E: ForwardEval<F>,
    StandardNormal: Distribution<F>,
    Standard: Distribution<F>,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let state = initial_state(family, ctx, cfg, start, &mut rng)?;
    Ok(drive(state, cfg.j0, |s| {
        for n in 0..s.z.dim() {
            multi_candidate_step(s, n, ctx, cfg, &mut rng);
        }
    }))
}

/// Surrogate-screened Gibbs chain.
pub fn run_surrogate_screen<F, E>(
    family: Family,
    ctx: &PosteriorContext<F, E>,
    surrogate: &GpcSurrogate<F>,
    cfg: &ChainConfig<F>,
    start: Option<ObstacleParams<F>>,
) -> Result<Chain<F>>
where
    F: Real,
    E: ForwardEval<F>,
    StandardNormal: Distribution<F>,
    Standard: Distribution<F>,
{
    cfg.validate()?;
    let cheap = SurrogateMisfit::new(surrogate, ctx.observations, ctx.covariance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let state = initial_state(family, ctx, cfg, start, &mut rng)?;
    Ok(drive(state, cfg.j0, |s| {
        for n in 0..s.z.dim() {
            surrogate_screen_step(s, n, ctx, &cheap, cfg, &mut rng);
        }
    }))
}

/// States at indices `j1, j1 + j2, ..., j1 + (j3 - 1) j2`.
pub fn select_states<F: Real>(chain: &Chain<F>, cfg: &ChainConfig<F>) -> Result<Vec<ObstacleParams<F>>> {
    let last = cfg.j1 + (cfg.j3 - 1) * cfg.j2;
    if last >= chain.states.len() {
        return Err(Error::Config(format!(
            "selection index {last} exceeds chain length {}",
            chain.states.len()
        )));
    }
    Ok((0..cfg.j3)
        .map(|i| chain.states[cfg.j1 + i * cfg.j2].z.clone())
        .collect())
}

/// Componentwise mean of the selected states.
pub fn point_estimate<F: Real>(selected: &[ObstacleParams<F>]) -> Result<ObstacleParams<F>> {
    let first = selected
        .first()
        .ok_or_else(|| Error::Config("no states selected".into()))?;
    let dim = first.dim();
    let mut mean = vec![F::zero(); dim];
    for s in selected {
        for (acc, v) in mean.iter_mut().zip(s.values.iter()) {
            *acc += *v;
        }
    }
    let count = F::of_usize(selected.len());
    for v in &mut mean {
        *v = *v / count;
    }
    ObstacleParams::new(first.family, mean)
}

/// Chain trace as CSV: `iteration, z_1..z_N, misfit, beta_1..beta_N`.
pub fn write_chain_csv<F: Real>(path: &Path, chain: &Chain<F>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let dim = chain.states.first().map(|s| s.z.dim()).unwrap_or(0);
    let mut header = vec!["iteration".to_string()];
    header.extend((1..=dim).map(|i| format!("z_{i}")));
    header.push("misfit".into());
    header.extend((1..=dim).map(|i| format!("beta_{i}")));
    writeln!(out, "{}", header.join(","))?;
    for s in &chain.states {
        let mut row = vec![s.iteration.to_string()];
        row.extend(s.z.values.iter().map(|v| format!("{:?}", v.as_f64())));
        row.push(format!("{:?}", s.misfit.as_f64()));
        row.extend(s.beta.iter().map(|v| format!("{:?}", v.as_f64())));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Selected states as CSV: `index, z_1..z_N`.
pub fn write_selected_csv<F: Real>(path: &Path, selected: &[ObstacleParams<F>]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let dim = selected.first().map(|s| s.dim()).unwrap_or(0);
    let mut header = vec!["index".to_string()];
    header.extend((1..=dim).map(|i| format!("z_{i}")));
    writeln!(out, "{}", header.join(","))?;
    for (i, s) in selected.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(s.values.iter().map(|v| format!("{:?}", v.as_f64())));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
