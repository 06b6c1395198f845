//! Reproducible synthetic instance generation: a self-contained PRNG, a
//! layered construction that is decomposable by design (intra arcs only ever
//! ascend, external arcs only ever enter roots), and support perturbation
//! for building multi-action models.

use std::collections::BTreeSet;

use crate::chain::{MdpModel, PartitionLayout, SparseChain};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::steady::build_intra_matrix;

/// Deterministic PRNG: an xoshiro256** core seeded through splitmix64, so a
/// single `u64` seed reproduces the full stream on any platform.
///
/// State update per draw: with `s` the four 64-bit words, the output is
/// `rotl(s[1] * 5, 7) * 9`, then `s[2] ^= s[0]`, `s[3] ^= s[1]`,
/// `s[1] ^= s[2]`, `s[0] ^= s[3]`, `s[2] ^= s[1] << 17`,
/// `s[3] = rotl(s[3], 45)`.
#[derive(Debug, Clone)]
pub struct Prng {
    s: [u64; 4],
}

impl Prng {
    /// Expands `seed` into the initial state with splitmix64.
    pub fn new(seed: u64) -> Self {
        let mut x = seed;
        let mut split = || {
            x = x.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = x;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^ (z >> 31)
        };
        let mut s = [split(), split(), split(), split()];
        if s == [0; 4] {
            s[0] = 1;
        }
        Prng { s }
    }

    /// Next 64 uniform bits.
    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform double in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[0, n)` by the multiply-shift reduction; the
    /// residual bias is far below anything instance generation can notice.
    /// `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Bernoulli draw with success probability `p`.
    pub fn coin(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Poisson draw by Knuth's product method; fine for the small rates
    /// used here. A non-positive rate returns 0 without consuming draws.
    pub fn poisson(&mut self, lambda: f64) -> usize {
        if lambda <= 0.0 {
            return 0;
        }
        let limit = (-lambda).exp();
        let mut k = 0usize;
        let mut p = 1.0;
        loop {
            k += 1;
            p *= self.next_f64();
            if p <= limit {
                return k - 1;
            }
        }
    }
}

/// Parameters of the synthetic instance generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    /// Total states; must be a positive multiple of `n_partitions`.
    pub n_states: usize,
    /// Number of equally sized partitions.
    pub n_partitions: usize,
    /// Number of actions; actions beyond the first perturb the first.
    pub n_actions: usize,
    /// Seed of the single random stream every phase draws from.
    pub seed: u64,
    /// Mean intra forward arcs per state (the guaranteed parent included).
    pub forward_arc_rate: f64,
    /// Chance each non-root state gains an arc back to its root (forced
    /// when the state would otherwise have no non-self arc).
    pub backward_to_root_prob: f64,
    /// Mean arcs per partition to foreign roots.
    pub cross_arc_rate: f64,
    /// Mean extra root-to-foreign-root arcs per partition.
    pub superstate_extra_rate: f64,
    /// Relative weight perturbation for actions beyond the first, in
    /// `[0, 1)`; zero clones the first action's transitions exactly.
    pub perturb_magnitude: f64,
    /// Rewards are drawn uniformly from this closed range.
    pub reward_range: (f64, f64),
}

impl GeneratorConfig {
    /// Config with the default shape parameters.
    pub fn new(n_states: usize, n_partitions: usize, n_actions: usize, seed: u64) -> Self {
        GeneratorConfig {
            n_states,
            n_partitions,
            n_actions,
            seed,
            forward_arc_rate: 3.0,
            backward_to_root_prob: 0.5,
            cross_arc_rate: 2.0,
            superstate_extra_rate: 1.0,
            perturb_magnitude: 0.2,
            reward_range: (0.0, 10.0),
        }
    }

    /// Rejects impossible shapes and out-of-range rates.
    pub fn validate(&self) -> Result<()> {
        if self.n_states == 0 || self.n_partitions == 0 {
            return Err(Error::InvalidConfig(
                "state and partition counts must be positive".into(),
            ));
        }
        if self.n_states % self.n_partitions != 0 {
            return Err(Error::InvalidConfig(format!(
                "{} states cannot split into {} equal partitions",
                self.n_states, self.n_partitions
            )));
        }
        if self.n_actions == 0 {
            return Err(Error::InvalidConfig("need at least one action".into()));
        }
        for (name, rate) in [
            ("forward_arc_rate", self.forward_arc_rate),
            ("cross_arc_rate", self.cross_arc_rate),
            ("superstate_extra_rate", self.superstate_extra_rate),
        ] {
            if !rate.is_finite() || rate < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and non-negative, got {rate}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.backward_to_root_prob) {
            return Err(Error::InvalidConfig(format!(
                "backward_to_root_prob must lie in [0, 1], got {}",
                self.backward_to_root_prob
            )));
        }
        if !(0.0..1.0).contains(&self.perturb_magnitude) {
            return Err(Error::InvalidConfig(format!(
                "perturb_magnitude must lie in [0, 1), got {}",
                self.perturb_magnitude
            )));
        }
        let (lo, hi) = self.reward_range;
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidConfig(format!(
                "reward range ({lo}, {hi}) is not a finite non-empty interval"
            )));
        }
        Ok(())
    }
}

fn perturb_rows(
    rows: &[Vec<(usize, f64)>],
    rng: &mut Prng,
    magnitude: f64,
) -> Vec<Vec<(usize, f64)>> {
    if magnitude == 0.0 {
        return rows.to_vec();
    }
    rows.iter()
        .map(|row| {
            let mut out: Vec<(usize, f64)> = row
                .iter()
                .map(|(t, w)| (*t, w * (1.0 + rng.uniform(-magnitude, magnitude))))
                .collect();
            let total: f64 = out.iter().map(|(_, w)| w).sum();
            for (_, w) in out.iter_mut() {
                *w /= total;
            }
            out
        })
        .collect()
}

/// Reweights every arc of `chain` by an independent relative factor in
/// `[1 - magnitude, 1 + magnitude)` and renormalizes each row, preserving
/// the support exactly. Zero magnitude returns an identical copy. Rewards
/// are carried over unchanged.
pub fn perturb_transition_matrix(
    chain: &SparseChain<f64>,
    seed: u64,
    magnitude: f64,
) -> Result<SparseChain<f64>> {
    if !(0.0..1.0).contains(&magnitude) {
        return Err(Error::InvalidConfig(format!(
            "perturbation magnitude must lie in [0, 1), got {magnitude}"
        )));
    }
    let mut rng = Prng::new(seed);
    let rows = perturb_rows(chain.rows(), &mut rng, magnitude);
    SparseChain::new(chain.n_states(), rows, chain.rewards().to_vec())
}

/// Generates a decomposable instance from a single random stream.
///
/// Construction phases run in a fixed order so that a config reproduces its
/// instance bit for bit:
///
/// 1. each non-root state picks one parent among the earlier states of its
///    block, guaranteeing the root reaches everyone;
/// 2. each state gains Poisson-many extra forward arcs (targets at or after
///    itself within the block, so self-loops can appear but intra arcs
///    never descend);
/// 3. each non-root state gains an arc back to its root with the configured
///    probability, forced when it has no other non-self arc, so everyone
///    reaches the root;
/// 4. the roots are joined in a cycle (when there are at least two
///    partitions), making the whole chain irreducible;
/// 5. each partition gains Poisson-many arcs to foreign roots, plus
///    Poisson-many extra root-to-foreign-root arcs;
/// 6. a state left with no target at all (the lone root of a one-state
///    instance, when step 2 drew nothing) gains a self-loop;
/// 7. every arc draws a uniform weight in `[0.05, 1)` and rows are
///    normalized;
/// 8. rewards are drawn per state and action;
/// 9. each action beyond the first draws a sub-seed and perturbs the first
///    action's weights by `perturb_magnitude`.
pub fn generate_sisdmdp(config: &GeneratorConfig) -> Result<(MdpModel<f64>, PartitionLayout)> {
    config.validate()?;
    let n = config.n_states;
    let k = config.n_partitions;
    let block_len = n / k;
    let layout = PartitionLayout::new((0..=k).map(|r| r * block_len).collect())?;
    let mut rng = Prng::new(config.seed);

    let mut arcs: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];

    for r in 0..k {
        let block = layout.block(r);
        for s in block.start + 1..block.end {
            let parent = block.start + rng.below(s - block.start);
            arcs[parent].insert(s);
        }
    }

    let extra_rate = (config.forward_arc_rate - 1.0).max(0.0);
    for r in 0..k {
        let block = layout.block(r);
        for s in block.clone() {
            for _ in 0..rng.poisson(extra_rate) {
                let t = s + rng.below(block.end - s);
                arcs[s].insert(t);
            }
        }
    }

    for r in 0..k {
        let block = layout.block(r);
        for s in block.start + 1..block.end {
            if !arcs[s].iter().any(|t| *t != s) {
                arcs[s].insert(block.start);
            } else if rng.coin(config.backward_to_root_prob) {
                arcs[s].insert(block.start);
            }
        }
    }

    if k >= 2 {
        for r in 0..k {
            arcs[layout.root(r)].insert(layout.root((r + 1) % k));
        }
        for r in 0..k {
            let block = layout.block(r);
            for _ in 0..rng.poisson(config.cross_arc_rate) {
                let src = block.start + rng.below(block.len());
                let mut q = rng.below(k - 1);
                if q >= r {
                    q += 1;
                }
                arcs[src].insert(layout.root(q));
            }
        }
        for r in 0..k {
            for _ in 0..rng.poisson(config.superstate_extra_rate) {
                let mut q = rng.below(k - 1);
                if q >= r {
                    q += 1;
                }
                arcs[layout.root(r)].insert(layout.root(q));
            }
        }
    }

    for (s, targets) in arcs.iter_mut().enumerate() {
        if targets.is_empty() {
            targets.insert(s);
        }
    }

    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for targets in &arcs {
        let mut row: Vec<(usize, f64)> = targets
            .iter()
            .map(|t| (*t, rng.uniform(0.05, 1.0)))
            .collect();
        let total: f64 = row.iter().map(|(_, w)| w).sum();
        for (_, w) in row.iter_mut() {
            *w /= total;
        }
        rows.push(row);
    }

    let (lo, hi) = config.reward_range;
    let mut rewards = vec![vec![0.0; n]; config.n_actions];
    for s in 0..n {
        for action_rewards in rewards.iter_mut() {
            action_rewards[s] = rng.uniform(lo, hi);
        }
    }

    let mut chains = Vec::with_capacity(config.n_actions);
    chains.push(SparseChain::new(n, rows.clone(), rewards[0].clone())?);
    for action_rewards in rewards.into_iter().skip(1) {
        let sub_seed = rng.next_u64();
        let mut sub = Prng::new(sub_seed);
        let perturbed = perturb_rows(&rows, &mut sub, config.perturb_magnitude);
        chains.push(SparseChain::new(n, perturbed, action_rewards)?);
    }

    let model = MdpModel::new(chains, layout.clone())?;
    Ok((model, layout))
}

/// Structural summary of an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceStats {
    /// Structural nonzeros of each partition's intra matrix (first action).
    pub per_partition_intra: Vec<usize>,
    /// Sum of the per-partition counts.
    pub total_intra_arcs: usize,
    /// First-action arcs whose endpoints lie in different partitions.
    pub cross_arcs: usize,
    /// Arc count of every action's chain.
    pub per_action_arcs: Vec<usize>,
    /// First-action arc count over the dense capacity `N^2`.
    pub density: f64,
}

/// Computes the structural summary; partition counts come from the intra
/// matrices, so the model must be decomposable under `layout`.
pub fn instance_stats<S: Scalar>(
    model: &MdpModel<S>,
    layout: &PartitionLayout,
) -> Result<InstanceStats> {
    if model.n_states() != layout.n_states() {
        return Err(Error::InvalidModel(format!(
            "model has {} states, layout covers {}",
            model.n_states(),
            layout.n_states()
        )));
    }
    let chain = model.action(0);
    let mut per_partition_intra = Vec::with_capacity(layout.k());
    for r in 0..layout.k() {
        per_partition_intra.push(build_intra_matrix(chain, layout, r)?.nnz());
    }
    let total_intra_arcs = per_partition_intra.iter().sum();

    let mut cross_arcs = 0;
    for s in 0..chain.n_states() {
        let home = layout.partition_of(s);
        for (t, _) in chain.row(s) {
            if layout.partition_of(*t) != home {
                cross_arcs += 1;
            }
        }
    }

    let per_action_arcs: Vec<usize> = model.actions().iter().map(SparseChain::arc_count).collect();
    let n = model.n_states() as f64;
    let density = per_action_arcs[0] as f64 / (n * n);
    Ok(InstanceStats {
        per_partition_intra,
        total_intra_arcs,
        cross_arcs,
        per_action_arcs,
        density,
    })
}

/// The worked 4-state, 2-partition reference instance used throughout the
/// tests: states {0, 1} and {2, 3} with roots 0 and 2, rewards (1, 0, 2, 0),
/// stationary distribution (2/7, 1/7, 2/7, 2/7), average reward 6/7.
pub fn fixture_f1() -> (MdpModel<f64>, PartitionLayout) {
    let rows = vec![
        vec![(1, 0.5), (2, 0.5)],
        vec![(0, 0.6), (2, 0.4)],
        vec![(3, 1.0)],
        vec![(0, 0.7), (2, 0.3)],
    ];
    let rewards = vec![1.0, 0.0, 2.0, 0.0];
    let chain = SparseChain::new(4, rows, rewards).expect("fixture chain is valid");
    let layout = PartitionLayout::new(vec![0, 2, 4]).expect("fixture layout is valid");
    let model = MdpModel::new(vec![chain], layout.clone()).expect("fixture model is valid");
    (model, layout)
}
