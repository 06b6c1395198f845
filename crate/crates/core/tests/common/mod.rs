//! Hand-built 14-state, 3-partition chains shared by the integration tests.
//!
//! The base chain (`chain_14`) is decomposable: partitions {0..3}, {4..8},
//! {9..13} with roots 0, 4, 9; external arcs enter only at roots; each
//! partition's non-root subgraph is acyclic. Its third partition is wired
//! root -> 12/13 -> 10/11 -> out, so intra arcs descend and the chain is
//! decomposable but not canonically ordered. `chain_14_canonical` rewires
//! that partition in ascending order. `chain_14_cyclic` adds arcs 3 -> 1 and
//! 8 -> 6, creating non-root cycles in the first two partitions.

use sisdmdp_core::{PartitionLayout, SparseChain};

pub fn layout_14() -> PartitionLayout {
    PartitionLayout::new(vec![0, 4, 9, 14]).unwrap()
}

fn rewards_14() -> Vec<f64> {
    (0..14).map(|s| s as f64).collect()
}

pub fn chain_14() -> SparseChain<f64> {
    let mut rows = vec![Vec::new(); 14];
    rows[0] = vec![(1, 1.0)];
    rows[1] = vec![(2, 1.0)];
    rows[2] = vec![(3, 1.0)];
    rows[3] = vec![(0, 0.5), (4, 0.5)];

    rows[4] = vec![(5, 0.5), (6, 0.5)];
    rows[5] = vec![(7, 1.0)];
    rows[6] = vec![(8, 1.0)];
    rows[7] = vec![(4, 0.6), (9, 0.4)];
    rows[8] = vec![(4, 0.5), (9, 0.5)];

    rows[9] = vec![(12, 0.5), (13, 0.5)];
    rows[10] = vec![(9, 0.5), (0, 0.5)];
    rows[11] = vec![(9, 0.5), (4, 0.5)];
    rows[12] = vec![(10, 1.0)];
    rows[13] = vec![(11, 1.0)];

    SparseChain::new(14, rows, rewards_14()).unwrap()
}

pub fn chain_14_canonical() -> SparseChain<f64> {
    let mut rows = vec![Vec::new(); 14];
    rows[0] = vec![(1, 1.0)];
    rows[1] = vec![(2, 1.0)];
    rows[2] = vec![(3, 1.0)];
    rows[3] = vec![(0, 0.5), (4, 0.5)];

    rows[4] = vec![(5, 0.5), (6, 0.5)];
    rows[5] = vec![(7, 1.0)];
    rows[6] = vec![(8, 1.0)];
    rows[7] = vec![(4, 0.6), (9, 0.4)];
    rows[8] = vec![(4, 0.5), (9, 0.5)];

    rows[9] = vec![(10, 0.5), (11, 0.5)];
    rows[10] = vec![(12, 1.0)];
    rows[11] = vec![(13, 1.0)];
    rows[12] = vec![(9, 0.5), (0, 0.5)];
    rows[13] = vec![(9, 0.5), (4, 0.5)];

    SparseChain::new(14, rows, rewards_14()).unwrap()
}

pub fn chain_14_cyclic() -> SparseChain<f64> {
    let mut rows = vec![Vec::new(); 14];
    rows[0] = vec![(1, 1.0)];
    rows[1] = vec![(2, 1.0)];
    rows[2] = vec![(3, 1.0)];
    rows[3] = vec![(0, 0.4), (1, 0.2), (4, 0.4)];

    rows[4] = vec![(5, 0.5), (6, 0.5)];
    rows[5] = vec![(7, 1.0)];
    rows[6] = vec![(8, 1.0)];
    rows[7] = vec![(4, 0.6), (9, 0.4)];
    rows[8] = vec![(4, 0.4), (6, 0.2), (9, 0.4)];

    rows[9] = vec![(12, 0.5), (13, 0.5)];
    rows[10] = vec![(9, 0.5), (0, 0.5)];
    rows[11] = vec![(9, 0.5), (4, 0.5)];
    rows[12] = vec![(10, 1.0)];
    rows[13] = vec![(11, 1.0)];

    SparseChain::new(14, rows, rewards_14()).unwrap()
}
