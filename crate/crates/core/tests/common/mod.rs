//! Random graphs and parameters shared by the integration tests.
#![allow(dead_code)]

use jacobi_tree::graph::{FiniteGraph, JacobiParams};
use rand::rngs::StdRng;
use rand::Rng;

fn edge_list(pairs: &[(usize, usize)]) -> Vec<(String, String, String)> {
    pairs
        .iter()
        .enumerate()
        .map(|(k, &(u, v))| (format!("e{k:03}"), format!("v{u:02}"), format!("v{v:02}")))
        .collect()
}

/// Connected leafless multigraph: a Hamiltonian cycle plus random chords
/// (parallel edges allowed, no self-loops).
pub fn random_graph(rng: &mut StdRng) -> FiniteGraph {
    let p = rng.gen_range(2..=7);
    let mut pairs: Vec<(usize, usize)> = (0..p).map(|i| (i, (i + 1) % p)).collect();
    if p == 2 {
        pairs.push((0, 1));
    }
    for _ in 0..rng.gen_range(1..=4) {
        let u = rng.gen_range(0..p);
        let mut v = rng.gen_range(0..p - 1);
        if v >= u {
            v += 1;
        }
        pairs.push((u, v));
    }
    FiniteGraph::new((0..p).map(|i| format!("v{i:02}")), edge_list(&pairs)).unwrap()
}

/// Connected leafless bipartite multigraph with at least two independent
/// cycles.
pub fn random_bipartite(rng: &mut StdRng) -> FiniteGraph {
    let s = rng.gen_range(1..=3);
    let t = rng.gen_range(s.max(2)..=4);
    // side A is 0..s, side B is s..s+t
    let mut pairs = Vec::new();
    let k = s.min(t);
    if k == 1 {
        pairs.push((0, s));
        pairs.push((0, s));
    } else {
        for i in 0..k {
            pairs.push((i, s + i));
            pairs.push((s + i, (i + 1) % k));
        }
    }
    for j in k..t {
        pairs.push((rng.gen_range(0..s), s + j));
        pairs.push((rng.gen_range(0..s), s + j));
    }
    for _ in 0..rng.gen_range(1..=3) {
        pairs.push((rng.gen_range(0..s), s + rng.gen_range(0..t)));
    }
    FiniteGraph::new((0..s + t).map(|i| format!("v{i:02}")), edge_list(&pairs)).unwrap()
}

pub fn random_params(
    rng: &mut StdRng,
    g: &FiniteGraph,
    a_spread: f64,
    b_spread: f64,
) -> JacobiParams {
    let a = (0..g.q())
        .map(|_| rng.gen_range(1.0 - a_spread..=1.0 + a_spread))
        .collect();
    let b = (0..g.p())
        .map(|_| rng.gen_range(-b_spread..=b_spread))
        .collect();
    JacobiParams::new(g, a, b).unwrap()
}
