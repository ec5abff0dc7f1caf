//! Reference implementations for cross-checks, written independently of the
//! library: states are enumerated naively and weights evaluated in linear
//! space straight from the energy definition, rather than through the
//! library's subset-sum recursion and log-space accumulators. Agreement
//! between the two routes is evidence against a shared bug.

#![allow(dead_code)] // each integration test binary uses a subset

use std::collections::BTreeMap;

use jungle::{Edge, JungleParams};

/// Normalized probability of every configuration, indexed by bit mask
/// (bit i = node i defaulted). O(2^n (n + edges)); keep n small.
pub fn brute_state_probs(params: &JungleParams) -> Vec<f64> {
    let n = params.n();
    assert!(n <= 20, "brute-force enumeration wants a small n");
    let alpha = params.alpha();
    let beta: Vec<(usize, usize, f64)> = params
        .beta()
        .iter()
        .map(|(e, &b)| (e.i(), e.j(), b))
        .collect();
    let mut probs = Vec::with_capacity(1 << n);
    for mask in 0u32..(1u32 << n) {
        let mut energy = 0.0;
        for (i, a) in alpha.iter().enumerate() {
            if mask >> i & 1 == 1 {
                energy += a;
            }
        }
        for &(i, j, b) in &beta {
            if mask >> i & 1 == 1 && mask >> j & 1 == 1 {
                energy += b;
            }
        }
        probs.push(energy.exp());
    }
    let z: f64 = probs.iter().sum();
    assert!(z.is_finite() && z > 0.0, "weights degenerate");
    for w in &mut probs {
        *w /= z;
    }
    probs
}

/// Distribution of the total default count.
pub fn brute_count_pmf(params: &JungleParams) -> Vec<f64> {
    let mut pmf = vec![0.0; params.n() + 1];
    for (mask, w) in brute_state_probs(params).iter().enumerate() {
        pmf[mask.count_ones() as usize] += w;
    }
    pmf
}

/// Distribution of the default count over all nodes except `skip`
/// (marginalizing the skipped node out).
pub fn brute_count_pmf_excluding(params: &JungleParams, skip: usize) -> Vec<f64> {
    let mut pmf = vec![0.0; params.n()];
    for (mask, w) in brute_state_probs(params).iter().enumerate() {
        let peripheral = mask & !(1usize << skip);
        pmf[peripheral.count_ones() as usize] += w;
    }
    pmf
}

/// Marginal default probability of one node.
pub fn brute_node_mean(params: &JungleParams, i: usize) -> f64 {
    brute_state_probs(params)
        .iter()
        .enumerate()
        .filter(|(mask, _)| mask >> i & 1 == 1)
        .map(|(_, w)| w)
        .sum()
}

/// Joint default probability of a pair.
pub fn brute_pair_mean(params: &JungleParams, i: usize, j: usize) -> f64 {
    brute_state_probs(params)
        .iter()
        .enumerate()
        .filter(|(mask, _)| mask >> i & 1 == 1 && mask >> j & 1 == 1)
        .map(|(_, w)| w)
        .sum()
}

/// Star-topology parameters: node 0 is the hub.
pub fn star_params(n_peripheral: usize, alpha0: f64, alpha: f64, beta: f64) -> JungleParams {
    let mut alphas = vec![alpha; n_peripheral + 1];
    alphas[0] = alpha0;
    let mut betas = BTreeMap::new();
    for i in 1..=n_peripheral {
        betas.insert(Edge::new(0, i).unwrap(), beta);
    }
    JungleParams::new(alphas, betas).unwrap()
}

/// Complete-graph parameters with uniform field and coupling.
pub fn complete_params(n: usize, alpha: f64, beta: f64) -> JungleParams {
    let mut betas = BTreeMap::new();
    for i in 0..n {
        for j in (i + 1)..n {
            betas.insert(Edge::new(i, j).unwrap(), beta);
        }
    }
    JungleParams::new(vec![alpha; n], betas).unwrap()
}

/// Total-variation distance between two same-length discrete distributions.
pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    0.5 * a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
}
