//! Gibbs sampling of joint default states, exact enumeration for small
//! portfolios, and the transforms from sampled states to monetary losses.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calibrate::gibbs_sweep;
use crate::core::{
    validate_portfolio, Edge, JungleParams, LossPmf, PortfolioSpec, RecoveryModel,
    ENUMERATION_CAP,
};
use crate::error::{JungleError, Result};
use crate::math::{sigmoid, LogSumAcc};
use crate::par::par_collect;

/// Gibbs sampler settings. `draws` is the total retained draw count across
/// all chains.
#[derive(Clone, Copy, Debug)]
pub struct McmcConfig {
    pub draws: usize,
    pub chains: usize,
    /// Discarded sweeps per chain before retention starts.
    pub burn_in: usize,
    /// Sweeps between retained draws.
    pub thin: usize,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            draws: 10_000,
            chains: 4,
            burn_in: 1000,
            thin: 10,
            seed: 0,
        }
    }
}

/// Retained default states, one bit per node, packed into 64-bit words.
/// Draws are ordered by chain, then by order of retention, so output is
/// identical regardless of how many threads ran the chains.
#[derive(Clone, Debug)]
pub struct SampleSet {
    n_nodes: usize,
    words_per_state: usize,
    bits: Vec<u64>,
    chain_of: Vec<u32>,
}

impl SampleSet {
    fn with_capacity(n_nodes: usize, draws: usize) -> Self {
        let words_per_state = n_nodes.div_ceil(64);
        SampleSet {
            n_nodes,
            words_per_state,
            bits: Vec::with_capacity(draws * words_per_state),
            chain_of: Vec::with_capacity(draws),
        }
    }

    fn push_state(&mut self, state: &[u8], chain: u32) {
        let base = self.bits.len();
        self.bits.resize(base + self.words_per_state, 0);
        for (i, &l) in state.iter().enumerate() {
            if l != 0 {
                self.bits[base + i / 64] |= 1u64 << (i % 64);
            }
        }
        self.chain_of.push(chain);
    }

    /// Build a sample set directly from explicit states (all on chain 0).
    pub fn from_states(n_nodes: usize, states: &[Vec<u8>]) -> Result<Self> {
        Self::from_chain_states(n_nodes, &[states.to_vec()])
    }

    /// Reassemble a sample set from stored words (binary state-dump reader).
    pub(crate) fn from_raw_parts(
        n_nodes: usize,
        bits: Vec<u64>,
        chain_of: Vec<u32>,
    ) -> Result<Self> {
        let words_per_state = n_nodes.div_ceil(64);
        if bits.len() != words_per_state * chain_of.len() {
            return Err(JungleError::Config(format!(
                "state dump length mismatch: {} words for {} draws of {} words each",
                bits.len(),
                chain_of.len(),
                words_per_state
            )));
        }
        Ok(SampleSet {
            n_nodes,
            words_per_state,
            bits,
            chain_of,
        })
    }

    /// Build a sample set from per-chain state lists.
    pub fn from_chain_states(n_nodes: usize, chains: &[Vec<Vec<u8>>]) -> Result<Self> {
        let total: usize = chains.iter().map(Vec::len).sum();
        let mut set = Self::with_capacity(n_nodes, total);
        for (c, chain) in chains.iter().enumerate() {
            for state in chain {
                if state.len() != n_nodes {
                    return Err(JungleError::Config(format!(
                        "state has {} entries, expected {}",
                        state.len(),
                        n_nodes
                    )));
                }
                set.push_state(state, c as u32);
            }
        }
        Ok(set)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_draws(&self) -> usize {
        self.chain_of.len()
    }

    pub fn n_chains(&self) -> usize {
        self.chain_of.iter().copied().max().map_or(0, |c| c as usize + 1)
    }

    pub fn words_per_state(&self) -> usize {
        self.words_per_state
    }

    pub fn chain(&self, draw: usize) -> u32 {
        self.chain_of[draw]
    }

    pub fn state_words(&self, draw: usize) -> &[u64] {
        let base = draw * self.words_per_state;
        &self.bits[base..base + self.words_per_state]
    }

    pub fn get(&self, draw: usize, node: usize) -> bool {
        debug_assert!(node < self.n_nodes);
        self.state_words(draw)[node / 64] >> (node % 64) & 1 == 1
    }

    pub fn loss_count(&self, draw: usize) -> u32 {
        self.state_words(draw)
            .iter()
            .map(|w| w.count_ones())
            .sum()
    }

    /// Empirical default frequency of one node.
    pub fn node_frequency(&self, node: usize) -> f64 {
        let hits = (0..self.n_draws()).filter(|&d| self.get(d, node)).count();
        hits as f64 / self.n_draws() as f64
    }

    /// Empirical joint default frequency of a pair.
    pub fn pair_frequency(&self, i: usize, j: usize) -> f64 {
        let hits = (0..self.n_draws())
            .filter(|&d| self.get(d, i) && self.get(d, j))
            .count();
        hits as f64 / self.n_draws() as f64
    }

    /// Empirical distribution of the default count, normalized.
    pub fn count_histogram(&self) -> Vec<f64> {
        let mut hist = vec![0.0; self.n_nodes + 1];
        for d in 0..self.n_draws() {
            hist[self.loss_count(d) as usize] += 1.0;
        }
        let total = self.n_draws() as f64;
        for h in &mut hist {
            *h /= total;
        }
        hist
    }
}

/// Convergence diagnostics over the aggregate default count.
#[derive(Clone, Debug)]
pub struct Diagnostics {
    /// Split-chain potential scale reduction factor of the default count.
    pub r_hat: f64,
    /// Largest total-variation distance between per-chain count histograms.
    pub max_pairwise_tv: f64,
    pub warnings: Vec<String>,
}

const TV_WARN: f64 = 0.05;
const R_HAT_WARN: f64 = 1.05;

/// Compute diagnostics for an existing sample set.
pub fn diagnostics(samples: &SampleSet) -> Diagnostics {
    let chains = samples.n_chains();
    let mut per_chain: Vec<Vec<f64>> = vec![Vec::new(); chains];
    for d in 0..samples.n_draws() {
        per_chain[samples.chain(d) as usize].push(f64::from(samples.loss_count(d)));
    }

    // Split each chain in half for the PSRF so trending chains are caught.
    let mut splits: Vec<&[f64]> = Vec::new();
    for series in &per_chain {
        let half = series.len() / 2;
        if half >= 2 {
            splits.push(&series[..half]);
            splits.push(&series[half..]);
        }
    }
    let r_hat = if splits.len() >= 2 {
        let len = splits.iter().map(|s| s.len()).min().unwrap() as f64;
        let means: Vec<f64> = splits
            .iter()
            .map(|s| s.iter().sum::<f64>() / s.len() as f64)
            .collect();
        let grand = means.iter().sum::<f64>() / means.len() as f64;
        let b = len / (means.len() as f64 - 1.0)
            * means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
        let w = splits
            .iter()
            .zip(&means)
            .map(|(s, m)| {
                s.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (s.len() as f64 - 1.0)
            })
            .sum::<f64>()
            / splits.len() as f64;
        if w > 0.0 {
            (((len - 1.0) / len * w + b / len) / w).sqrt()
        } else if b > 0.0 {
            f64::INFINITY
        } else {
            1.0
        }
    } else {
        1.0
    };

    let mut max_tv = 0.0f64;
    let hist: Vec<Vec<f64>> = (0..chains)
        .map(|c| {
            let mut h = vec![0.0; samples.n_nodes() + 1];
            for &count in &per_chain[c] {
                h[count as usize] += 1.0;
            }
            let total = per_chain[c].len().max(1) as f64;
            h.iter().map(|x| x / total).collect()
        })
        .collect();
    for a in 0..chains {
        for b in (a + 1)..chains {
            let tv = 0.5
                * hist[a]
                    .iter()
                    .zip(&hist[b])
                    .map(|(x, y)| (x - y).abs())
                    .sum::<f64>();
            max_tv = max_tv.max(tv);
        }
    }

    let mut warnings = Vec::new();
    if max_tv > TV_WARN {
        warnings.push(format!(
            "chains disagree: max pairwise TV of count histograms = {max_tv:.4} (> {TV_WARN}); increase burn-in or draws"
        ));
    }
    if r_hat > R_HAT_WARN {
        warnings.push(format!(
            "split-chain R-hat of the default count = {r_hat:.4} (> {R_HAT_WARN}); chains have not mixed"
        ));
    }
    Diagnostics {
        r_hat,
        max_pairwise_tv: max_tv,
        warnings,
    }
}

/// A finished sampler run.
#[derive(Clone, Debug)]
pub struct McmcRun {
    pub samples: SampleSet,
    pub diagnostics: Diagnostics,
}

/// Heat-bath Gibbs sampler. Sites update in fixed order 0..n-1; each chain
/// owns one counter-based RNG stream derived from (seed, chain index), so
/// results are bit-identical however the chains are scheduled.
pub fn gibbs_sample(params: &JungleParams, config: &McmcConfig) -> Result<McmcRun> {
    if config.draws == 0 {
        return Err(JungleError::Config("draws must be >= 1".into()));
    }
    if config.chains == 0 {
        return Err(JungleError::Config("chains must be >= 1".into()));
    }
    if config.thin == 0 {
        return Err(JungleError::Config("thin must be >= 1".into()));
    }
    let n = params.n();
    let adj = params.adjacency();
    let per_chain: Vec<usize> = (0..config.chains)
        .map(|c| config.draws / config.chains + usize::from(c < config.draws % config.chains))
        .collect();

    let chain_outputs: Vec<(Vec<u64>, usize)> = par_collect(config.chains, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(c as u64 + 1);
        let mut state: Vec<u8> = (0..n)
            .map(|i| u8::from(rng.gen::<f64>() < sigmoid(params.alpha()[i])))
            .collect();
        for _ in 0..config.burn_in {
            gibbs_sweep(params, &adj, &mut state, &mut rng);
        }
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; per_chain[c] * words];
        for d in 0..per_chain[c] {
            for _ in 0..config.thin {
                gibbs_sweep(params, &adj, &mut state, &mut rng);
            }
            let base = d * words;
            for (i, &l) in state.iter().enumerate() {
                if l != 0 {
                    bits[base + i / 64] |= 1u64 << (i % 64);
                }
            }
        }
        (bits, per_chain[c])
    });

    let mut samples = SampleSet::with_capacity(n, config.draws);
    for (c, (bits, count)) in chain_outputs.into_iter().enumerate() {
        samples.bits.extend_from_slice(&bits);
        samples.chain_of.extend(std::iter::repeat(c as u32).take(count));
    }
    let diagnostics = diagnostics(&samples);
    Ok(McmcRun {
        samples,
        diagnostics,
    })
}

/// Exact joint statistics from full state enumeration (n <= 22).
#[derive(Clone, Debug)]
pub struct ExactEnumeration {
    /// Distribution of the default count.
    pub pmf: LossPmf,
    /// Exact per-node default probabilities.
    pub node_means: Vec<f64>,
    /// Exact joint default probabilities on the coupled pairs.
    pub pair_means: BTreeMap<Edge, f64>,
    /// Log partition function.
    pub log_z: f64,
}

/// Enumerate all 2^n states. Energies are built incrementally: each state's
/// log-weight extends the state with its lowest set bit removed, so the whole
/// table costs O(2^n * degree) rather than O(2^n * n^2).
pub fn enumerate_exact(params: &JungleParams) -> Result<ExactEnumeration> {
    let n = params.n();
    if n > ENUMERATION_CAP {
        return Err(JungleError::EnumerationTooLarge {
            n,
            cap: ENUMERATION_CAP,
        });
    }
    let adj = params.adjacency();
    let size: usize = 1 << n;
    let mut energy = vec![0.0f64; size];
    for mask in 1..size {
        let i = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let mut e = energy[rest] + params.alpha()[i];
        for &(j, b) in &adj[i] {
            if rest >> j & 1 == 1 {
                e += b;
            }
        }
        energy[mask] = e;
    }

    let mut count_acc: Vec<LogSumAcc> = (0..=n).map(|_| LogSumAcc::new()).collect();
    let mut z_acc = LogSumAcc::new();
    for (mask, &e) in energy.iter().enumerate() {
        count_acc[mask.count_ones() as usize].add(e);
        z_acc.add(e);
    }
    let log_z = z_acc.value();
    let log_mass: Vec<f64> = count_acc.iter().map(|a| a.value() - log_z).collect();
    let pmf = LossPmf::from_log_weights(n, log_mass)?;

    let mut node_means = vec![0.0f64; n];
    let mut pair_means: BTreeMap<Edge, f64> =
        params.beta().keys().map(|&e| (e, 0.0)).collect();
    for (mask, &e) in energy.iter().enumerate() {
        let mass = (e - log_z).exp();
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            node_means[i] += mass;
            bits &= bits - 1;
        }
        for (edge, m) in pair_means.iter_mut() {
            if mask >> edge.i() & 1 == 1 && mask >> edge.j() & 1 == 1 {
                *m += mass;
            }
        }
    }
    Ok(ExactEnumeration {
        pmf,
        node_means,
        pair_means,
        log_z,
    })
}

/// Monetary losses per retained draw, after applying the recovery model.
#[derive(Clone, Debug)]
pub struct LossDistribution {
    /// Defaulted-name count per draw.
    pub counts: Vec<u32>,
    /// Monetary loss per draw.
    pub monetary: Vec<f64>,
    /// Loss-given-default factor applied in each draw.
    pub lgd_factors: Vec<f64>,
    /// Chain that produced each draw.
    pub chain: Vec<u32>,
    pub total_exposure: f64,
}

impl LossDistribution {
    pub fn n_draws(&self) -> usize {
        self.monetary.len()
    }

    pub fn mean(&self) -> f64 {
        self.monetary.iter().sum::<f64>() / self.n_draws() as f64
    }

    /// Empirical value-at-risk: the smallest loss whose cumulative
    /// probability reaches `confidence`.
    pub fn quantile(&self, confidence: f64) -> f64 {
        let sorted = self.sorted();
        sorted[self.tail_index(confidence, sorted.len())]
    }

    /// Empirical expected shortfall at `confidence`, including the draws
    /// sitting exactly at the quantile.
    pub fn expected_shortfall(&self, confidence: f64) -> f64 {
        let sorted = self.sorted();
        let k = self.tail_index(confidence, sorted.len());
        sorted[k..].iter().sum::<f64>() / (sorted.len() - k) as f64
    }

    fn sorted(&self) -> Vec<f64> {
        let mut v = self.monetary.clone();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    fn tail_index(&self, confidence: f64, m: usize) -> usize {
        ((confidence * m as f64).ceil() as usize).clamp(1, m) - 1
    }
}

/// Turn sampled states into monetary losses under the portfolio's exposures
/// and recovery model.
pub fn losses_from_states(
    samples: &SampleSet,
    spec: &PortfolioSpec,
) -> Result<LossDistribution> {
    if samples.n_nodes() != spec.n() {
        return Err(JungleError::Config(format!(
            "sample set covers {} nodes but the portfolio has {}",
            samples.n_nodes(),
            spec.n()
        )));
    }
    let report = validate_portfolio(spec);
    if !report.is_empty() {
        return Err(JungleError::InvalidPortfolio(report));
    }
    let n = spec.n();
    let draws = samples.n_draws();
    let mean_p = spec.mean_p();
    let mut counts = Vec::with_capacity(draws);
    let mut monetary = Vec::with_capacity(draws);
    let mut lgd_factors = Vec::with_capacity(draws);
    let mut chain = Vec::with_capacity(draws);
    for d in 0..draws {
        let count = samples.loss_count(d);
        let mut defaulted_exposure = 0.0;
        for i in 0..n {
            if samples.get(d, i) {
                defaulted_exposure += spec.exposure()[i];
            }
        }
        let factor = match spec.recovery() {
            RecoveryModel::Constant { lgd } => *lgd,
            RecoveryModel::LinearInAggregate { capped } => {
                let rate = f64::from(count) / n as f64;
                let f = 0.5 * (1.0 + rate / mean_p);
                if *capped {
                    f.min(1.0)
                } else {
                    f
                }
            }
            RecoveryModel::CentralNodeDependent { a, b } => {
                a + b * f64::from(u8::from(samples.get(d, 0)))
            }
        };
        counts.push(count);
        monetary.push(defaulted_exposure * factor);
        lgd_factors.push(factor);
        chain.push(samples.chain(d));
    }
    Ok(LossDistribution {
        counts,
        monetary,
        lgd_factors,
        chain,
        total_exposure: spec.exposure().iter().sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::PortfolioSpec;
    use crate::exact::binomial_pmf;
    use approx::assert_relative_eq;

    fn independent_params(n: usize, p: f64) -> JungleParams {
        JungleParams::independent(&vec![p; n]).unwrap()
    }

    #[test]
    fn enumeration_matches_binomial_when_independent() {
        let params = independent_params(10, 0.3);
        let table = enumerate_exact(&params).unwrap();
        let reference = binomial_pmf(10, 0.3).unwrap();
        for l in 0..=10 {
            assert_relative_eq!(
                table.pmf.mass(l),
                reference.mass(l),
                max_relative = 1e-12
            );
        }
        for i in 0..10 {
            assert_relative_eq!(table.node_means[i], 0.3, epsilon = 1e-12);
        }
    }

    #[test]
    fn enumeration_matches_hand_computed_two_node_model() {
        let (a1, a2, b) = (0.4, -0.7, 0.9);
        let mut beta = BTreeMap::new();
        beta.insert(Edge::new(0, 1).unwrap(), b);
        let params = JungleParams::new(vec![a1, a2], beta).unwrap();
        let table = enumerate_exact(&params).unwrap();
        let w = [1.0, a1.exp(), a2.exp(), (a1 + a2 + b).exp()];
        let z: f64 = w.iter().sum();
        assert_relative_eq!(table.log_z, z.ln(), epsilon = 1e-12);
        assert_relative_eq!(table.pmf.mass(0), w[0] / z, epsilon = 1e-14);
        assert_relative_eq!(table.pmf.mass(1), (w[1] + w[2]) / z, epsilon = 1e-14);
        assert_relative_eq!(table.pmf.mass(2), w[3] / z, epsilon = 1e-14);
        assert_relative_eq!(table.node_means[0], (w[1] + w[3]) / z, epsilon = 1e-14);
        assert_relative_eq!(table.node_means[1], (w[2] + w[3]) / z, epsilon = 1e-14);
        let q = table.pair_means[&Edge::new(0, 1).unwrap()];
        assert_relative_eq!(q, w[3] / z, epsilon = 1e-14);
    }

    #[test]
    fn enumeration_rejects_oversized_portfolios() {
        let params = independent_params(23, 0.1);
        assert!(matches!(
            enumerate_exact(&params),
            Err(JungleError::EnumerationTooLarge { n: 23, cap: 22 })
        ));
    }

    #[test]
    fn sample_set_round_trip() {
        let states = vec![vec![1, 0, 1], vec![0, 0, 0], vec![1, 1, 1]];
        let set = SampleSet::from_states(3, &states).unwrap();
        assert_eq!(set.n_draws(), 3);
        assert_eq!(set.loss_count(0), 2);
        assert_eq!(set.loss_count(1), 0);
        assert_eq!(set.loss_count(2), 3);
        assert!(set.get(0, 0) && !set.get(0, 1) && set.get(0, 2));
        assert_relative_eq!(set.node_frequency(0), 2.0 / 3.0);
        assert_relative_eq!(set.pair_frequency(0, 2), 2.0 / 3.0);
    }

    #[test]
    fn sample_set_packs_past_one_word() {
        let mut state = vec![0u8; 70];
        state[0] = 1;
        state[63] = 1;
        state[64] = 1;
        state[69] = 1;
        let set = SampleSet::from_states(70, &[state]).unwrap();
        assert_eq!(set.words_per_state(), 2);
        assert_eq!(set.loss_count(0), 4);
        assert!(set.get(0, 63) && set.get(0, 64) && set.get(0, 69));
        assert!(!set.get(0, 1) && !set.get(0, 68));
    }

    #[test]
    fn gibbs_is_deterministic_for_a_seed() {
        let params = independent_params(6, 0.2);
        let config = McmcConfig {
            draws: 200,
            chains: 3,
            burn_in: 50,
            thin: 2,
            seed: 42,
        };
        let a = gibbs_sample(&params, &config).unwrap();
        let b = gibbs_sample(&params, &config).unwrap();
        assert_eq!(a.samples.bits, b.samples.bits);
        assert_eq!(a.samples.chain_of, b.samples.chain_of);
        let c = gibbs_sample(
            &params,
            &McmcConfig {
                seed: 43,
                ..config
            },
        )
        .unwrap();
        assert_ne!(a.samples.bits, c.samples.bits);
    }

    #[test]
    fn gibbs_single_site_marginal_is_correct() {
        // With one node every sweep is an independent exact draw.
        let params = JungleParams::new(vec![0.5], BTreeMap::new()).unwrap();
        let run = gibbs_sample(
            &params,
            &McmcConfig {
                draws: 20_000,
                chains: 4,
                burn_in: 10,
                thin: 1,
                seed: 9,
            },
        )
        .unwrap();
        let freq = run.samples.node_frequency(0);
        assert!((freq - sigmoid(0.5)).abs() < 0.01, "freq = {freq}");
        assert!(run.diagnostics.warnings.is_empty());
    }

    #[test]
    fn diagnostics_flag_divergent_chains() {
        let low = vec![vec![0u8, 0, 0, 0]; 200];
        let high = vec![vec![1u8, 1, 1, 1]; 200];
        let set = SampleSet::from_chain_states(4, &[low, high]).unwrap();
        let diag = diagnostics(&set);
        assert!(diag.max_pairwise_tv > 0.9);
        assert!(!diag.warnings.is_empty());
    }

    #[test]
    fn losses_with_unit_lgd_and_uneven_exposures() {
        let spec = PortfolioSpec::new(
            vec![0.5, 0.5],
            vec![1.0, 3.0],
            BTreeMap::new(),
            RecoveryModel::Constant { lgd: 1.0 },
        )
        .unwrap();
        let states = vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]];
        let set = SampleSet::from_states(2, &states).unwrap();
        let dist = losses_from_states(&set, &spec).unwrap();
        assert_eq!(dist.monetary, vec![0.0, 1.0, 3.0, 4.0]);
        assert_relative_eq!(dist.mean(), 2.0);
        assert_relative_eq!(dist.quantile(0.5), 1.0);
        assert_relative_eq!(dist.expected_shortfall(0.5), (1.0 + 3.0 + 4.0) / 3.0);
        assert_relative_eq!(dist.quantile(0.9), 4.0);
    }

    #[test]
    fn linear_in_aggregate_scales_with_the_default_rate() {
        let spec = PortfolioSpec::new(
            vec![0.25; 4],
            vec![1.0; 4],
            BTreeMap::new(),
            RecoveryModel::LinearInAggregate { capped: false },
        )
        .unwrap();
        let states = vec![vec![1, 0, 0, 0], vec![1, 1, 1, 1]];
        let set = SampleSet::from_states(4, &states).unwrap();
        let dist = losses_from_states(&set, &spec).unwrap();
        // mean_p = 0.25; one default -> rate 0.25 -> factor 1; all four
        // default -> rate 1 -> factor (1 + 4)/2 = 2.5.
        assert_relative_eq!(dist.lgd_factors[0], 1.0);
        assert_relative_eq!(dist.monetary[0], 1.0);
        assert_relative_eq!(dist.lgd_factors[1], 2.5);
        assert_relative_eq!(dist.monetary[1], 10.0);

        let capped_spec = PortfolioSpec::new(
            vec![0.25; 4],
            vec![1.0; 4],
            BTreeMap::new(),
            RecoveryModel::LinearInAggregate { capped: true },
        )
        .unwrap();
        let capped = losses_from_states(&set, &capped_spec).unwrap();
        assert_relative_eq!(capped.lgd_factors[1], 1.0);
        assert_relative_eq!(capped.monetary[1], 4.0);
    }

    #[test]
    fn central_node_recovery_depends_on_the_hub() {
        let spec = PortfolioSpec::star(2, 0.2, 0.3, 0.1)
            .unwrap()
            .with_recovery(RecoveryModel::CentralNodeDependent { a: 0.3, b: 0.4 })
            .unwrap();
        let states = vec![vec![0, 1, 1], vec![1, 1, 0]];
        let set = SampleSet::from_states(3, &states).unwrap();
        let dist = losses_from_states(&set, &spec).unwrap();
        assert_relative_eq!(dist.lgd_factors[0], 0.3);
        assert_relative_eq!(dist.monetary[0], 0.6);
        assert_relative_eq!(dist.lgd_factors[1], 0.7);
        assert_relative_eq!(dist.monetary[1], 2.0 * 0.7);
    }

    #[test]
    fn losses_reject_mismatched_widths() {
        let spec = PortfolioSpec::homogeneous(3, 0.1).unwrap();
        let set = SampleSet::from_states(2, &[vec![0, 1]]).unwrap();
        assert!(matches!(
            losses_from_states(&set, &spec),
            Err(JungleError::Config(_))
        ));
    }
}
