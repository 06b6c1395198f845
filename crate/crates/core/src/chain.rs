//! Model types: sparse chains, partition layouts, policies, MDPs.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tolerance on `|row sum - 1|` accepted by the chain constructors.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Row-sparse stochastic matrix plus a per-state reward vector.
///
/// Rows are kept sorted by target index. Zero-probability entries are dropped
/// at construction, so every stored arc is a structural nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseChain<S: Scalar> {
    n_states: usize,
    rows: Vec<Vec<(usize, S)>>,
    rewards: Vec<S>,
}

impl<S: Scalar> SparseChain<S> {
    /// Builds a chain, checking that every row is a probability distribution.
    ///
    /// Each row must have in-range targets, no duplicates, no negative
    /// probabilities, and must sum to one within [`STOCHASTIC_TOL`].
    pub fn new(n_states: usize, rows: Vec<Vec<(usize, S)>>, rewards: Vec<S>) -> Result<Self> {
        if n_states == 0 {
            return Err(Error::InvalidModel("chain needs at least one state".into()));
        }
        if rows.len() != n_states {
            return Err(Error::InvalidModel(format!(
                "expected {} rows, got {}",
                n_states,
                rows.len()
            )));
        }
        if rewards.len() != n_states {
            return Err(Error::InvalidModel(format!(
                "expected {} rewards, got {}",
                n_states,
                rewards.len()
            )));
        }
        let tol = S::from_f64_lossless(STOCHASTIC_TOL);
        let mut clean_rows = Vec::with_capacity(n_states);
        for (s, mut row) in rows.into_iter().enumerate() {
            row.retain(|(_, p)| !p.is_zero());
            row.sort_by(|a, b| a.0.cmp(&b.0));
            let mut sum = S::zero();
            let mut last: Option<usize> = None;
            for (t, p) in &row {
                if *t >= n_states {
                    return Err(Error::InvalidModel(format!(
                        "row {s}: target {t} out of range (n = {n_states})"
                    )));
                }
                if last == Some(*t) {
                    return Err(Error::InvalidModel(format!(
                        "row {s}: duplicate arc to {t}"
                    )));
                }
                last = Some(*t);
                if p.is_negative() {
                    return Err(Error::InvalidModel(format!(
                        "row {s}: negative probability on arc to {t}"
                    )));
                }
                sum = sum + p.clone();
            }
            if (sum - S::one()).abs() > tol {
                return Err(Error::InvalidModel(format!(
                    "row {s} does not sum to 1 within {STOCHASTIC_TOL:e}"
                )));
            }
            clean_rows.push(row);
        }
        Ok(SparseChain {
            n_states,
            rows: clean_rows,
            rewards,
        })
    }

    /// Number of states.
    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Outgoing arcs of `s`, sorted by target.
    pub fn row(&self, s: usize) -> &[(usize, S)] {
        &self.rows[s]
    }

    /// All rows.
    pub fn rows(&self) -> &[Vec<(usize, S)>] {
        &self.rows
    }

    /// Reward vector.
    pub fn rewards(&self) -> &[S] {
        &self.rewards
    }

    /// Reward of state `s`.
    pub fn reward(&self, s: usize) -> &S {
        &self.rewards[s]
    }

    /// Transition probability from `s` to `t`, zero if the arc is absent.
    pub fn prob(&self, s: usize, t: usize) -> S {
        match self.rows[s].binary_search_by(|(u, _)| u.cmp(&t)) {
            Ok(i) => self.rows[s][i].1.clone(),
            Err(_) => S::zero(),
        }
    }

    /// Self-loop probability of `s`, zero if absent.
    pub fn self_loop(&self, s: usize) -> S {
        self.prob(s, s)
    }

    /// Total number of stored arcs.
    pub fn arc_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// Contiguous partition of `0..n` into `K` blocks, each rooted at its first
/// state.
///
/// Stored as `K + 1` ascending boundaries `[b_0 = 0, b_1, ..., b_K = n]`;
/// block `r` covers `b_r..b_{r+1}` and its root is `b_r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionLayout {
    boundaries: Vec<usize>,
}

impl PartitionLayout {
    /// Builds a layout from boundaries, which must start at zero, end at the
    /// total state count and be strictly increasing.
    pub fn new(boundaries: Vec<usize>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::InvalidModel(
                "layout needs at least two boundaries".into(),
            ));
        }
        if boundaries[0] != 0 {
            return Err(Error::InvalidModel("first boundary must be 0".into()));
        }
        if !boundaries.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidModel(
                "boundaries must be strictly increasing".into(),
            ));
        }
        Ok(PartitionLayout { boundaries })
    }

    /// Single block covering all of `0..n`.
    pub fn single_block(n: usize) -> Result<Self> {
        PartitionLayout::new(vec![0, n])
    }

    /// `k` equal blocks over `0..n`; errors unless `k` divides `n`.
    pub fn equal_blocks(n: usize, k: usize) -> Result<Self> {
        if k == 0 || n % k != 0 {
            return Err(Error::InvalidModel(format!(
                "cannot split {n} states into {k} equal blocks"
            )));
        }
        let step = n / k;
        Ok(PartitionLayout {
            boundaries: (0..=k).map(|r| r * step).collect(),
        })
    }

    /// Number of blocks.
    pub fn k(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// Total number of states covered.
    pub fn n_states(&self) -> usize {
        *self.boundaries.last().unwrap()
    }

    /// Raw boundary vector, length `k() + 1`.
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// State range of block `r`.
    pub fn block(&self, r: usize) -> std::ops::Range<usize> {
        self.boundaries[r]..self.boundaries[r + 1]
    }

    /// Root state of block `r` (its first state).
    pub fn root(&self, r: usize) -> usize {
        self.boundaries[r]
    }

    /// Number of states in block `r`.
    pub fn block_len(&self, r: usize) -> usize {
        self.boundaries[r + 1] - self.boundaries[r]
    }

    /// Index of the block containing state `s`.
    pub fn partition_of(&self, s: usize) -> usize {
        debug_assert!(s < self.n_states());
        self.boundaries.partition_point(|&b| b <= s) - 1
    }

    /// True if `s` is the root of its block.
    pub fn is_root(&self, s: usize) -> bool {
        self.root(self.partition_of(s)) == s
    }

    /// Iterator over all root states.
    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.k()).map(|r| self.root(r))
    }
}

/// Deterministic stationary policy: one action index per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    actions: Vec<usize>,
}

impl Policy {
    /// Wraps a per-state action vector.
    pub fn new(actions: Vec<usize>) -> Self {
        Policy { actions }
    }

    /// Policy choosing action `a` in every one of `n` states.
    pub fn constant(n: usize, a: usize) -> Self {
        Policy { actions: vec![a; n] }
    }

    /// Action chosen in state `s`.
    pub fn action(&self, s: usize) -> usize {
        self.actions[s]
    }

    /// Per-state action vector.
    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    /// Number of states covered.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    /// True for the empty policy.
    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Finite MDP: one transition chain per action, sharing a partition layout.
///
/// Action `a`'s chain carries the reward column `r(., a)` in its reward
/// vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MdpModel<S: Scalar> {
    actions: Vec<SparseChain<S>>,
    layout: PartitionLayout,
}

impl<S: Scalar> MdpModel<S> {
    /// Builds a model, checking that every action chain has the same state
    /// count and that the layout covers it.
    pub fn new(actions: Vec<SparseChain<S>>, layout: PartitionLayout) -> Result<Self> {
        let n = match actions.first() {
            Some(c) => c.n_states(),
            None => {
                return Err(Error::InvalidModel("model needs at least one action".into()));
            }
        };
        if let Some(bad) = actions.iter().find(|c| c.n_states() != n) {
            return Err(Error::InvalidModel(format!(
                "action chains disagree on state count ({} vs {})",
                n,
                bad.n_states()
            )));
        }
        if layout.n_states() != n {
            return Err(Error::InvalidModel(format!(
                "layout covers {} states but chains have {}",
                layout.n_states(),
                n
            )));
        }
        Ok(MdpModel { actions, layout })
    }

    /// Number of states.
    pub fn n_states(&self) -> usize {
        self.actions[0].n_states()
    }

    /// Number of actions.
    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    /// Transition chain of action `a`.
    pub fn action(&self, a: usize) -> &SparseChain<S> {
        &self.actions[a]
    }

    /// All action chains.
    pub fn actions(&self) -> &[SparseChain<S>] {
        &self.actions
    }

    /// Partition layout shared by all actions.
    pub fn layout(&self) -> &PartitionLayout {
        &self.layout
    }

    /// Chain induced by a deterministic policy: row `s` and reward `s` are
    /// taken from the chain of action `policy(s)`.
    pub fn induce_chain(&self, policy: &Policy) -> Result<SparseChain<S>> {
        let n = self.n_states();
        if policy.len() != n {
            return Err(Error::InvalidModel(format!(
                "policy covers {} states, model has {}",
                policy.len(),
                n
            )));
        }
        let mut rows = Vec::with_capacity(n);
        let mut rewards = Vec::with_capacity(n);
        for s in 0..n {
            let a = policy.action(s);
            if a >= self.n_actions() {
                return Err(Error::InvalidModel(format!(
                    "policy picks action {} in state {} but model has {} actions",
                    a,
                    s,
                    self.n_actions()
                )));
            }
            rows.push(self.actions[a].row(s).to_vec());
            rewards.push(self.actions[a].reward(s).clone());
        }
        SparseChain::new(n, rows, rewards)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(p01: f64, p10: f64, rewards: [f64; 2]) -> SparseChain<f64> {
        SparseChain::new(
            2,
            vec![
                vec![(0, 1.0 - p01), (1, p01)],
                vec![(0, p10), (1, 1.0 - p10)],
            ],
            rewards.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn constructor_rejects_bad_rows() {
        let r = vec![0.0];
        assert!(SparseChain::new(1, vec![vec![(0, 0.5)]], r.clone()).is_err());
        assert!(SparseChain::new(1, vec![vec![(1, 1.0)]], r.clone()).is_err());
        assert!(SparseChain::new(1, vec![vec![(0, 0.5), (0, 0.5)]], r.clone()).is_err());
        assert!(SparseChain::new(1, vec![vec![(0, 1.5), (0, -0.5)]], r.clone()).is_err());
        assert!(SparseChain::<f64>::new(0, vec![], vec![]).is_err());
        assert!(SparseChain::new(1, vec![vec![(0, 1.0)]], vec![]).is_err());
    }

    #[test]
    fn constructor_drops_zero_arcs_and_sorts() {
        let c = SparseChain::new(
            2,
            vec![vec![(1, 0.5), (0, 0.5)], vec![(0, 1.0), (1, 0.0)]],
            vec![0.0, 0.0],
        )
        .unwrap();
        assert_eq!(c.row(0), &[(0, 0.5), (1, 0.5)]);
        assert_eq!(c.row(1), &[(0, 1.0)]);
        assert_eq!(c.arc_count(), 3);
        assert_eq!(c.prob(1, 1), 0.0);
        assert_eq!(c.self_loop(0), 0.5);
    }

    #[test]
    fn row_sum_tolerance_is_tight() {
        let ok = SparseChain::new(1, vec![vec![(0, 1.0 + 0.9e-12)]], vec![0.0]);
        assert!(ok.is_ok());
        let bad = SparseChain::new(1, vec![vec![(0, 1.0 + 1.1e-12)]], vec![0.0]);
        assert!(bad.is_err());
    }

    #[test]
    fn layout_accessors() {
        let layout = PartitionLayout::new(vec![0, 2, 4]).unwrap();
        assert_eq!(layout.k(), 2);
        assert_eq!(layout.n_states(), 4);
        assert_eq!(layout.block(0), 0..2);
        assert_eq!(layout.block(1), 2..4);
        assert_eq!(layout.root(1), 2);
        assert_eq!(layout.partition_of(0), 0);
        assert_eq!(layout.partition_of(1), 0);
        assert_eq!(layout.partition_of(2), 1);
        assert_eq!(layout.partition_of(3), 1);
        assert!(layout.is_root(0));
        assert!(!layout.is_root(1));
        assert!(layout.is_root(2));
        assert_eq!(layout.roots().collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn layout_rejects_bad_boundaries() {
        assert!(PartitionLayout::new(vec![0]).is_err());
        assert!(PartitionLayout::new(vec![1, 4]).is_err());
        assert!(PartitionLayout::new(vec![0, 2, 2]).is_err());
        assert!(PartitionLayout::equal_blocks(10, 3).is_err());
        assert_eq!(
            PartitionLayout::equal_blocks(10, 2).unwrap().boundaries(),
            &[0, 5, 10]
        );
        assert_eq!(PartitionLayout::single_block(3).unwrap().k(), 1);
    }

    #[test]
    fn induce_picks_rows_per_state() {
        let a0 = two_state(0.3, 0.6, [1.0, 2.0]);
        let a1 = two_state(0.9, 0.1, [5.0, 7.0]);
        let model = MdpModel::new(
            vec![a0.clone(), a1.clone()],
            PartitionLayout::single_block(2).unwrap(),
        )
        .unwrap();

        let mixed = model.induce_chain(&Policy::new(vec![1, 0])).unwrap();
        assert_eq!(mixed.row(0), a1.row(0));
        assert_eq!(mixed.row(1), a0.row(1));
        assert_eq!(mixed.rewards(), &[5.0, 2.0]);

        let pure = model.induce_chain(&Policy::constant(2, 0)).unwrap();
        assert_eq!(&pure, &a0);
    }

    #[test]
    fn induce_single_state_model() {
        let chains: Vec<SparseChain<f64>> = (0..2)
            .map(|a| SparseChain::new(1, vec![vec![(0, 1.0)]], vec![a as f64 + 5.0]).unwrap())
            .collect();
        let model = MdpModel::new(chains, PartitionLayout::single_block(1).unwrap()).unwrap();
        let c = model.induce_chain(&Policy::new(vec![0])).unwrap();
        assert_eq!(c.row(0), &[(0, 1.0)]);
        assert_eq!(c.reward(0), &5.0);
    }

    #[test]
    fn induce_rejects_bad_policies() {
        let a0 = two_state(0.5, 0.5, [0.0, 0.0]);
        let model =
            MdpModel::new(vec![a0], PartitionLayout::single_block(2).unwrap()).unwrap();
        assert!(model.induce_chain(&Policy::new(vec![0])).is_err());
        assert!(model.induce_chain(&Policy::new(vec![0, 1])).is_err());
    }

    #[test]
    fn model_rejects_mismatched_shapes() {
        let a0 = two_state(0.5, 0.5, [0.0, 0.0]);
        let one = SparseChain::new(1, vec![vec![(0, 1.0)]], vec![0.0]).unwrap();
        assert!(MdpModel::<f64>::new(vec![], PartitionLayout::single_block(1).unwrap()).is_err());
        assert!(
            MdpModel::new(vec![a0.clone(), one], PartitionLayout::single_block(2).unwrap())
                .is_err()
        );
        assert!(MdpModel::new(vec![a0], PartitionLayout::single_block(3).unwrap()).is_err());
    }
}
