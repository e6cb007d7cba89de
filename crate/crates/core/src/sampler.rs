//! Draws i.i.d. observations from the Ising similarity regression model.
//!
//! Small models (`p ≤ ENUMERATION_CAP`) are sampled exactly by inverse CDF
//! over the enumerated state space. Larger models use single-site Gibbs
//! sampling with a fresh chain per observation. Every row (or chain) owns a
//! ChaCha stream keyed by `(seed, index)`, so output does not depend on the
//! order in which rows are generated.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{assemble_theta, BinaryDataset, ExactDistribution, InteractionMatrix, ParameterSet, SimilarityMatrix, ENUMERATION_CAP};
use crate::numeric::logistic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerMethod {
    Exact,
    Gibbs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub method: SamplerMethod,
    pub seed: u64,
    /// Sweeps discarded at the start of each chain.
    pub burn_in: usize,
    /// Sweeps between retained draws of one chain.
    pub thin: usize,
    /// Retained draws per chain; 1 means a fresh chain for every observation.
    pub draws_per_chain: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            method: SamplerMethod::Exact,
            seed: 0,
            burn_in: 1000,
            thin: 10,
            draws_per_chain: 1,
        }
    }
}

impl SamplerConfig {
    pub fn exact(seed: u64) -> Self {
        Self {
            method: SamplerMethod::Exact,
            seed,
            ..Self::default()
        }
    }

    pub fn gibbs(seed: u64) -> Self {
        Self {
            method: SamplerMethod::Gibbs,
            seed,
            ..Self::default()
        }
    }

    /// Exact when `p` is enumerable, Gibbs otherwise.
    pub fn auto(p: usize, seed: u64) -> Self {
        if p <= ENUMERATION_CAP {
            Self::exact(seed)
        } else {
            Self::gibbs(seed)
        }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::InvalidInput("thin must be at least 1".into()));
        }
        if self.draws_per_chain == 0 {
            return Err(Error::InvalidInput("draws_per_chain must be at least 1".into()));
        }
        if self.method == SamplerMethod::Exact && p > ENUMERATION_CAP {
            return Err(Error::EnumerationCap { p, cap: ENUMERATION_CAP });
        }
        Ok(())
    }
}

/// Random stream for row/chain `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Dispatches on `config.method`.
pub fn sample(n: usize, params: &ParameterSet, sims: &[SimilarityMatrix], config: &SamplerConfig) -> Result<BinaryDataset> {
    match config.method {
        SamplerMethod::Exact => sample_exact(n, params, sims, config.seed),
        SamplerMethod::Gibbs => sample_gibbs(n, params, sims, config),
    }
}

/// Inverse-CDF sampling from the enumerated pmf.
pub fn sample_exact(n: usize, params: &ParameterSet, sims: &[SimilarityMatrix], seed: u64) -> Result<BinaryDataset> {
    let dist = ExactDistribution::from_params(params, sims)?;
    let p = dist.p();
    let mut cdf = dist.probabilities();
    let mut running = 0.0;
    for v in cdf.iter_mut() {
        running += *v;
        *v = running;
    }
    let total = running;
    let rows: Vec<u8> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = substream(seed, i as u64);
            let u: f64 = rng.random::<f64>() * total;
            let s = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            (0..p).map(move |j| ((s >> j) & 1) as u8)
        })
        .collect();
    BinaryDataset::new(n, p, rows)
}

/// Single-site Gibbs sampling; each sweep visits all coordinates in a fresh
/// random order.
pub fn sample_gibbs(n: usize, params: &ParameterSet, sims: &[SimilarityMatrix], config: &SamplerConfig) -> Result<BinaryDataset> {
    let theta = assemble_theta(params, sims)?;
    let p = theta.dim();
    config.validate(p).or_else(|e| match e {
        Error::EnumerationCap { .. } => Ok(()),
        other => Err(other),
    })?;
    let per_chain = config.draws_per_chain;
    let chains = n.div_ceil(per_chain);
    let rows: Vec<u8> = (0..chains)
        .into_par_iter()
        .flat_map_iter(|c| {
            let draws = per_chain.min(n - c * per_chain);
            let mut rng = substream(config.seed, c as u64);
            run_chain(&theta, draws, config.burn_in, config.thin, &mut rng)
        })
        .collect();
    BinaryDataset::new(n, p, rows)
}

fn run_chain(theta: &InteractionMatrix, draws: usize, burn_in: usize, thin: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let p = theta.dim();
    let mut state: Vec<u8> = (0..p).map(|_| rng.random_range(0..2u8)).collect();
    let mut fields: Vec<f64> = (0..p).map(|j| theta.local_field(j, &state)).collect();
    let mut order: Vec<usize> = (0..p).collect();
    let mut out = Vec::with_capacity(draws * p);
    for _ in 0..burn_in {
        sweep(theta, &mut state, &mut fields, &mut order, rng);
    }
    for _ in 0..draws {
        for _ in 0..thin {
            sweep(theta, &mut state, &mut fields, &mut order, rng);
        }
        out.extend_from_slice(&state);
    }
    out
}

fn sweep(theta: &InteractionMatrix, state: &mut [u8], fields: &mut [f64], order: &mut [usize], rng: &mut ChaCha8Rng) {
    order.shuffle(rng);
    for &j in order.iter() {
        let new = u8::from(rng.random::<f64>() < update_probability(fields[j]));
        if new != state[j] {
            let sign = if new == 1 { 1.0 } else { -1.0 };
            state[j] = new;
            let col = theta.values().column(j);
            for (f, t) in fields.iter_mut().zip(col.iter()) {
                *f += sign * t;
            }
            fields[j] -= sign * col[j];
        }
    }
}

/// Probability that a single-site update sets the coordinate to 1, given its
/// local field `θ_jj + Σ_{j'≠j} θ_jj' y_j'`.
#[inline]
pub fn update_probability(field: f64) -> f64 {
    logistic(field)
}

/// Row-major `2^p × 2^p` transition matrix of one sweep visiting coordinates
/// in `order`. Intended for small `p`.
pub fn sweep_transition_matrix(theta: &InteractionMatrix, order: &[usize]) -> Result<Vec<f64>> {
    let p = theta.dim();
    if p > 12 {
        return Err(Error::InvalidInput(format!("transition matrix for p = {p} is too large")));
    }
    let states = 1usize << p;
    let mut current = identity(states);
    for &j in order {
        let site = single_site_kernel(theta, j);
        current = matmul(&current, &site, states);
    }
    Ok(current)
}

/// Sweep transition averaged over all coordinate orders (the random-scan
/// sweep used by the sampler).
pub fn random_scan_transition_matrix(theta: &InteractionMatrix) -> Result<Vec<f64>> {
    let p = theta.dim();
    if p > 6 {
        return Err(Error::InvalidInput(format!("random-scan matrix for p = {p} is too large")));
    }
    let states = 1usize << p;
    let mut total = vec![0.0; states * states];
    let mut perms = Vec::new();
    permutations(&mut (0..p).collect::<Vec<_>>(), 0, &mut perms);
    for order in &perms {
        let t = sweep_transition_matrix(theta, order)?;
        for (a, b) in total.iter_mut().zip(t) {
            *a += b;
        }
    }
    let count = perms.len() as f64;
    total.iter_mut().for_each(|v| *v /= count);
    Ok(total)
}

fn single_site_kernel(theta: &InteractionMatrix, j: usize) -> Vec<f64> {
    let p = theta.dim();
    let states = 1usize << p;
    let mut k = vec![0.0; states * states];
    for s in 0..states {
        let u: Vec<u8> = (0..p).map(|b| ((s >> b) & 1) as u8).collect();
        let p1 = update_probability(theta.local_field(j, &u));
        let on = s | (1 << j);
        let off = s & !(1 << j);
        k[s * states + on] += p1;
        k[s * states + off] += 1.0 - p1;
    }
    k
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

fn permutations(items: &mut Vec<usize>, start: usize, out: &mut Vec<Vec<usize>>) {
    if start == items.len() {
        out.push(items.clone());
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permutations(items, start + 1, out);
        items.swap(start, i);
    }
}

/// Empirical state frequencies of a dataset with small `p`.
pub fn empirical_state_frequencies(data: &BinaryDataset) -> Vec<f64> {
    let p = data.p();
    let mut counts = vec![0.0; 1usize << p];
    for i in 0..data.n() {
        counts[crate::model::state_index(data.row(i))] += 1.0;
    }
    let n = data.n().max(1) as f64;
    counts.iter_mut().for_each(|c| *c /= n);
    counts
}

/// Total-variation distance between two distributions on the same support.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
