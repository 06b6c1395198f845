//! Structural and ergodicity validation for partitioned chains.
//!
//! The decomposition in [`crate::steady`] and [`crate::eval`] relies on three
//! structural properties, checked here:
//!
//! - single input: arcs from outside a partition may only enter at its root;
//! - single cycle: restricted to a partition's non-root states, the intra
//!   arcs form an acyclic graph, so every internal cycle passes through the
//!   root (self-loops are exempt, the solvers absorb them into a diagonal
//!   term);
//! - canonical order: intra arcs whose target is not the root never point
//!   from a higher to a lower state index, making each intra block upper
//!   triangular.
//!
//! [`canonical_reorder`] repairs the third property by permuting states
//! within each block; the first two are inherent to the instance.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::chain::{PartitionLayout, SparseChain, STOCHASTIC_TOL};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Outcome of [`validate_structure`].
#[derive(Debug, Clone)]
pub struct StructureReport {
    /// Arcs `(source, target)` entering a partition at a non-root state.
    pub single_input_violations: Vec<(usize, usize)>,
    /// One witness cycle `(partition, states)` per partition whose non-root
    /// intra graph is cyclic.
    pub single_cycle_violations: Vec<(usize, Vec<usize>)>,
    /// True when no intra arc with a non-root target goes from a higher to a
    /// lower index.
    pub canonical_order_ok: bool,
    /// Worst `|row sum - 1|` across states.
    pub max_row_deficit: f64,
    /// The transition graph is strongly connected.
    pub irreducible: bool,
    /// Irreducible with period one. Advisory: the direct solvers only need
    /// irreducibility.
    pub aperiodic: bool,
}

impl StructureReport {
    /// No arc enters a partition away from its root.
    pub fn single_input_ok(&self) -> bool {
        self.single_input_violations.is_empty()
    }

    /// Every internal cycle passes through its partition root.
    pub fn single_cycle_ok(&self) -> bool {
        self.single_cycle_violations.is_empty()
    }

    /// All rows sum to one within [`STOCHASTIC_TOL`].
    pub fn stochastic_ok(&self) -> bool {
        self.max_row_deficit <= STOCHASTIC_TOL
    }

    /// The chain has the shape the decomposition needs, up to state order.
    pub fn is_decomposable(&self) -> bool {
        self.single_input_ok() && self.single_cycle_ok() && self.stochastic_ok()
    }

    /// Decomposable and already in canonical state order.
    pub fn is_canonical(&self) -> bool {
        self.is_decomposable() && self.canonical_order_ok
    }
}

/// Outcome of [`validate_ergodic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErgodicityReport {
    /// The arc graph is strongly connected.
    pub irreducible: bool,
    /// Irreducible with period one. Reported as `false` for reducible
    /// chains, where the period is not defined chain-wide.
    pub aperiodic: bool,
}

/// Release states of each partition: states whose outgoing arcs all leave
/// for some root (their own partition's or a foreign one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReleaseClassification {
    per_partition: Vec<Vec<usize>>,
    release_flags: Vec<bool>,
}

impl ReleaseClassification {
    /// Sorted release states of partition `r`.
    pub fn release_states(&self, r: usize) -> &[usize] {
        &self.per_partition[r]
    }

    /// True if state `s` is a release state.
    pub fn is_release(&self, s: usize) -> bool {
        self.release_flags[s]
    }

    /// Release states of every partition.
    pub fn per_partition(&self) -> &[Vec<usize>] {
        &self.per_partition
    }
}

fn check_shapes<S: Scalar>(chain: &SparseChain<S>, layout: &PartitionLayout) -> Result<()> {
    if chain.n_states() != layout.n_states() {
        return Err(Error::InvalidModel(format!(
            "chain has {} states, layout covers {}",
            chain.n_states(),
            layout.n_states()
        )));
    }
    Ok(())
}

/// Checks the single-input, single-cycle and canonical-order properties and
/// measures the worst stochasticity deficit.
pub fn validate_structure<S: Scalar>(
    chain: &SparseChain<S>,
    layout: &PartitionLayout,
) -> Result<StructureReport> {
    check_shapes(chain, layout)?;
    let n = chain.n_states();

    let mut single_input_violations = Vec::new();
    let mut canonical_order_ok = true;
    let mut max_row_deficit = 0.0f64;

    for s in 0..n {
        let ps = layout.partition_of(s);
        let mut sum = S::zero();
        for (t, p) in chain.row(s) {
            sum = sum + p.clone();
            let pt = layout.partition_of(*t);
            if pt != ps {
                if *t != layout.root(pt) {
                    single_input_violations.push((s, *t));
                }
            } else if *t != layout.root(pt) && s > *t {
                canonical_order_ok = false;
            }
        }
        let deficit = (sum - S::one()).abs().to_f64_approx();
        max_row_deficit = max_row_deficit.max(deficit);
    }

    let mut single_cycle_violations = Vec::new();
    for r in 0..layout.k() {
        if let Some(cycle) = find_nonroot_cycle(chain, layout, r) {
            single_cycle_violations.push((r, cycle));
        }
    }

    let ergodicity = validate_ergodic(chain);

    Ok(StructureReport {
        single_input_violations,
        single_cycle_violations,
        canonical_order_ok,
        max_row_deficit,
        irreducible: ergodicity.irreducible,
        aperiodic: ergodicity.aperiodic,
    })
}

/// Searches partition `r`'s non-root intra graph (self-loops excluded) for a
/// cycle, returning its states in traversal order if one exists.
fn find_nonroot_cycle<S: Scalar>(
    chain: &SparseChain<S>,
    layout: &PartitionLayout,
    r: usize,
) -> Option<Vec<usize>> {
    let block = layout.block(r);
    let root = layout.root(r);
    let start = block.start;
    let len = block.len();

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); len];
    for s in block.clone() {
        if s == root {
            continue;
        }
        for (t, _) in chain.row(s) {
            if block.contains(t) && *t != root && *t != s {
                adj[s - start].push(*t);
            }
        }
    }

    // Colors: 0 unvisited, 1 on the current DFS path, 2 finished.
    let mut color = vec![0u8; len];
    color[root - start] = 2;
    for origin in block.clone() {
        if color[origin - start] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(origin, 0)];
        let mut path = vec![origin];
        color[origin - start] = 1;
        while let Some(&mut (u, ref mut cursor)) = stack.last_mut() {
            if let Some(&v) = adj[u - start].get(*cursor) {
                *cursor += 1;
                match color[v - start] {
                    0 => {
                        color[v - start] = 1;
                        path.push(v);
                        stack.push((v, 0));
                    }
                    1 => {
                        let from = path.iter().position(|&x| x == v).unwrap();
                        return Some(path[from..].to_vec());
                    }
                    _ => {}
                }
            } else {
                color[u - start] = 2;
                path.pop();
                stack.pop();
            }
        }
    }
    None
}

/// Checks irreducibility (strong connectivity) and aperiodicity.
///
/// Aperiodicity is decided with breadth-first levels: the period is the gcd
/// of `level(u) + 1 - level(v)` over all arcs `u -> v`.
pub fn validate_ergodic<S: Scalar>(chain: &SparseChain<S>) -> ErgodicityReport {
    let n = chain.n_states();

    let mut fwd_seen = vec![false; n];
    bfs(n, |s| chain.row(s).iter().map(|(t, _)| *t), &mut fwd_seen);

    let mut reverse = vec![Vec::new(); n];
    for s in 0..n {
        for (t, _) in chain.row(s) {
            reverse[*t].push(s);
        }
    }
    let mut bwd_seen = vec![false; n];
    bfs(n, |s| reverse[s].iter().copied(), &mut bwd_seen);

    let irreducible = fwd_seen.iter().all(|&x| x) && bwd_seen.iter().all(|&x| x);
    if !irreducible {
        return ErgodicityReport {
            irreducible: false,
            aperiodic: false,
        };
    }

    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for (t, _) in chain.row(u) {
            if level[*t] == usize::MAX {
                level[*t] = level[u] + 1;
                queue.push_back(*t);
            }
        }
    }
    let mut g: u64 = 0;
    for u in 0..n {
        for (t, _) in chain.row(u) {
            let diff = (level[u] as i64 + 1 - level[*t] as i64).unsigned_abs();
            g = gcd(g, diff);
        }
    }
    ErgodicityReport {
        irreducible: true,
        aperiodic: g == 1,
    }
}

fn bfs<I: Iterator<Item = usize>>(n: usize, adj: impl Fn(usize) -> I, seen: &mut [bool]) {
    debug_assert!(n > 0);
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for v in adj(u) {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Splits each partition's states into release and non-release sets.
///
/// A state is a release state when it has no intra arc to a non-root state
/// of its own partition and at least one arc to some root. Self-loops count
/// for neither condition.
pub fn classify_release_states<S: Scalar>(
    chain: &SparseChain<S>,
    layout: &PartitionLayout,
) -> Result<ReleaseClassification> {
    check_shapes(chain, layout)?;
    let n = chain.n_states();
    let mut release_flags = vec![false; n];
    let mut per_partition = vec![Vec::new(); layout.k()];
    for s in 0..n {
        let r = layout.partition_of(s);
        let root = layout.root(r);
        let mut intra_nonroot = false;
        let mut to_some_root = false;
        for (t, _) in chain.row(s) {
            if *t == s {
                continue;
            }
            if layout.block(r).contains(t) && *t != root {
                intra_nonroot = true;
            }
            if layout.is_root(*t) {
                to_some_root = true;
            }
        }
        if !intra_nonroot && to_some_root {
            release_flags[s] = true;
            per_partition[r].push(s);
        }
    }
    Ok(ReleaseClassification {
        per_partition,
        release_flags,
    })
}

/// Permutes states within each block into canonical order.
///
/// The root of each block is discovered as the unique state receiving arcs
/// from outside the block (blocks nothing enters keep their current first
/// state); the remaining states are topologically sorted by their intra
/// arcs, ties broken by original index. Returns the permutation
/// (`perm[old] = new`), the reordered chain and the unchanged layout.
///
/// Errors when some block has several entry states or a non-root cycle,
/// since no reordering can make such a chain canonical.
pub fn canonical_reorder<S: Scalar>(
    chain: &SparseChain<S>,
    layout: &PartitionLayout,
) -> Result<(Vec<usize>, SparseChain<S>, PartitionLayout)> {
    check_shapes(chain, layout)?;
    let n = chain.n_states();
    let k = layout.k();

    let mut entries: Vec<Vec<usize>> = vec![Vec::new(); k];
    for s in 0..n {
        for (t, _) in chain.row(s) {
            let pt = layout.partition_of(*t);
            if pt != layout.partition_of(s) && !entries[pt].contains(t) {
                entries[pt].push(*t);
            }
        }
    }

    let mut perm = vec![usize::MAX; n];
    for r in 0..k {
        let block = layout.block(r);
        let root = match entries[r].as_slice() {
            [] => block.start,
            [e] => *e,
            many => {
                return Err(Error::Structure(format!(
                    "partition {r} has several entry states {many:?}, not single-input"
                )));
            }
        };
        perm[root] = block.start;

        let members: Vec<usize> = block.clone().filter(|&s| s != root).collect();
        let local = |s: usize| members.binary_search(&s).ok();
        let mut indegree = vec![0usize; members.len()];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); members.len()];
        for (i, &s) in members.iter().enumerate() {
            for (t, _) in chain.row(s) {
                if *t == s {
                    continue;
                }
                if let Some(j) = local(*t) {
                    out[i].push(j);
                    indegree[j] += 1;
                }
            }
        }
        let mut heap: BinaryHeap<Reverse<usize>> = members
            .iter()
            .enumerate()
            .filter(|(i, _)| indegree[*i] == 0)
            .map(|(i, _)| Reverse(i))
            .collect();
        let mut next = block.start + 1;
        let mut placed = 0usize;
        while let Some(Reverse(i)) = heap.pop() {
            perm[members[i]] = next;
            next += 1;
            placed += 1;
            for &j in &out[i] {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    heap.push(Reverse(j));
                }
            }
        }
        if placed != members.len() {
            return Err(Error::Structure(format!(
                "partition {r} has a cycle avoiding its root, cannot canonicalize"
            )));
        }
    }

    let mut rows: Vec<Vec<(usize, S)>> = vec![Vec::new(); n];
    let mut rewards = vec![S::zero(); n];
    for s in 0..n {
        rows[perm[s]] = chain
            .row(s)
            .iter()
            .map(|(t, p)| (perm[*t], p.clone()))
            .collect();
        rewards[perm[s]] = chain.reward(s).clone();
    }
    let reordered = SparseChain::new(n, rows, rewards)?;
    Ok((perm, reordered, layout.clone()))
}
