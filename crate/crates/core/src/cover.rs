//! Truncated universal covers.
//!
//! A ball of radius `R` around a base vertex is the set of non-backtracking
//! paths of length at most `R` starting there. Each tree node records its
//! projection to the base graph, its parent and the base edge it was reached
//! through, so parallel edges lift to distinct tree edges.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, JacobiParams};
use crate::spectral::tridiagonal_top;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeNode {
    /// Base vertex this node projects to.
    pub projection: usize,
    pub parent: Option<usize>,
    /// Base edge used to step from the parent.
    pub via_edge: Option<usize>,
    pub depth: usize,
}

/// Default node budget for [`build_ball`].
pub const DEFAULT_NODE_BUDGET: usize = 5_000_000;

/// Ball in the universal cover with the lifted Jacobi parameters. Nodes are
/// stored in breadth-first order, so the children of every node occupy a
/// contiguous index range and depths are nondecreasing.
#[derive(Debug, Clone)]
pub struct TreeBall {
    radius: usize,
    nodes: Vec<TreeNode>,
    children: Vec<(usize, usize)>,
    /// Weight of the edge to the parent (0 at the root).
    up_weight: Vec<f64>,
    potential: Vec<f64>,
}

/// Builds the ball of radius `radius` around `base` with the default budget.
pub fn build_ball(
    g: &FiniteGraph,
    params: &JacobiParams,
    base: usize,
    radius: usize,
) -> Result<TreeBall> {
    build_ball_with_budget(g, params, base, radius, DEFAULT_NODE_BUDGET)
}

pub fn build_ball_with_budget(
    g: &FiniteGraph,
    params: &JacobiParams,
    base: usize,
    radius: usize,
    budget: usize,
) -> Result<TreeBall> {
    if base >= g.p() {
        return Err(Error::Precondition(format!(
            "base vertex index {base} out of range"
        )));
    }
    let mut nodes = vec![TreeNode {
        projection: base,
        parent: None,
        via_edge: None,
        depth: 0,
    }];
    let mut children = Vec::new();
    let mut next = 0;
    while next < nodes.len() {
        let node = nodes[next];
        let start = nodes.len();
        if node.depth < radius {
            for &e in g.incident(node.projection) {
                if Some(e) == node.via_edge {
                    continue;
                }
                if nodes.len() == budget {
                    return Err(Error::NodeBudget { radius, budget });
                }
                nodes.push(TreeNode {
                    projection: g.edges()[e].other(node.projection),
                    parent: Some(next),
                    via_edge: Some(e),
                    depth: node.depth + 1,
                });
            }
        }
        children.push((start, nodes.len()));
        next += 1;
    }
    let up_weight = nodes
        .iter()
        .map(|n| n.via_edge.map_or(0.0, |e| params.a[e]))
        .collect();
    let potential = nodes.iter().map(|n| params.b[n.projection]).collect();
    Ok(TreeBall {
        radius,
        nodes,
        children,
        up_weight,
        potential,
    })
}

impl TreeBall {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn children(&self, x: usize) -> std::ops::Range<usize> {
        let (s, e) = self.children[x];
        s..e
    }

    /// Tree degree of node `x` inside the ball.
    pub fn degree(&self, x: usize) -> usize {
        self.children(x).len() + usize::from(self.nodes[x].parent.is_some())
    }

    /// Nodes with depth `< R`, whose full neighborhood is in the ball.
    pub fn is_interior(&self, x: usize) -> bool {
        self.nodes[x].depth < self.radius
    }

    pub fn potential(&self, x: usize) -> f64 {
        self.potential[x]
    }

    /// Weight of the tree edge between `x` and its parent.
    pub fn up_weight(&self, x: usize) -> f64 {
        self.up_weight[x]
    }

    /// Number of nodes at each depth `0..=R`.
    pub fn level_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.radius + 1];
        for n in &self.nodes {
            sizes[n.depth] += 1;
        }
        sizes
    }

    /// `y = P H P x` where `P` projects onto the ball (Dirichlet truncation).
    pub fn compressed_matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.len());
        assert_eq!(y.len(), self.len());
        let row = |i: usize| {
            let mut acc = self.potential[i] * x[i];
            if let Some(p) = self.nodes[i].parent {
                acc += self.up_weight[i] * x[p];
            }
            for c in self.children(i) {
                acc += self.up_weight[c] * x[c];
            }
            acc
        };
        if self.len() >= PARALLEL_THRESHOLD {
            y.par_iter_mut()
                .enumerate()
                .for_each(|(i, yi)| *yi = row(i));
        } else {
            y.iter_mut().enumerate().for_each(|(i, yi)| *yi = row(i));
        }
    }
}

const PARALLEL_THRESHOLD: usize = 1 << 16;

/// Real vector on the nodes of a ball.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedVector {
    pub values: Vec<f64>,
}

impl LiftedVector {
    pub fn zeros(ball: &TreeBall) -> Self {
        LiftedVector {
            values: vec![0.0; ball.len()],
        }
    }

    /// Indices of the nonzero entries.
    pub fn support(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Largest depth carrying a nonzero entry.
    pub fn support_depth(&self, ball: &TreeBall) -> Option<usize> {
        self.support()
            .into_iter()
            .map(|i| ball.nodes[i].depth)
            .max()
    }

    pub fn dot(&self, other: &LiftedVector) -> f64 {
        dot(&self.values, &other.values)
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    if x.len() >= PARALLEL_THRESHOLD {
        // fixed chunking keeps the summation order independent of scheduling
        x.par_chunks(4096)
            .zip(y.par_chunks(4096))
            .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>())
            .collect::<Vec<_>>()
            .iter()
            .sum()
    } else {
        x.iter().zip(y).map(|(u, v)| u * v).sum()
    }
}

fn check_support(ball: &TreeBall, v: &LiftedVector, allowed: Option<usize>) -> Result<()> {
    if v.values.len() != ball.len() {
        return Err(Error::Precondition(format!(
            "vector has {} entries, ball has {} nodes",
            v.values.len(),
            ball.len()
        )));
    }
    match (v.support_depth(ball), allowed) {
        (None, _) => Ok(()),
        (Some(depth), Some(allowed)) if depth <= allowed => Ok(()),
        (Some(depth), allowed) => Err(Error::Support {
            depth,
            allowed: allowed.unwrap_or(0),
        }),
    }
}

/// `H v` for `v` supported strictly inside the ball, where the truncation is
/// exact.
pub fn apply_h(ball: &TreeBall, v: &LiftedVector) -> Result<LiftedVector> {
    check_support(ball, v, ball.radius.checked_sub(1))?;
    let mut out = LiftedVector::zeros(ball);
    ball.compressed_matvec(&v.values, &mut out.values);
    Ok(out)
}

/// Periodic lift: the value at a node is `psi` at its projection.
pub fn lift_psi(ball: &TreeBall, psi: &[f64]) -> LiftedVector {
    LiftedVector {
        values: ball.nodes.iter().map(|n| psi[n.projection]).collect(),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosConfig {
    pub max_iter: usize,
    /// Stop when the top Ritz value moves less than this on two consecutive
    /// steps.
    pub tol: f64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        LanczosConfig {
            max_iter: 300,
            tol: 1e-12,
        }
    }
}

pub fn lanczos_top(ball: &TreeBall) -> f64 {
    lanczos_top_with(ball, &LanczosConfig::default())
}

/// Largest eigenvalue of the ball compression of `H` by Lanczos with full
/// reorthogonalization, started from the all-ones vector (positive, so never
/// orthogonal to the positive top eigenvector).
pub fn lanczos_top_with(ball: &TreeBall, cfg: &LanczosConfig) -> f64 {
    let n = ball.len();
    let mut basis: Vec<Vec<f64>> = vec![vec![1.0 / (n as f64).sqrt(); n]];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut last = f64::NEG_INFINITY;
    let mut calm = 0;
    let scale = (0..n)
        .map(|i| ball.potential(i).abs() + ball.up_weight(i))
        .fold(0.0f64, f64::max)
        .max(1.0);

    for k in 0..cfg.max_iter.min(n) {
        ball.compressed_matvec(&basis[k], &mut w);
        let a = dot(&w, &basis[k]);
        alpha.push(a);
        // two passes of classical Gram–Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let theta = tridiagonal_top(&alpha, &beta);
        if theta - last < cfg.tol {
            calm += 1;
        } else {
            calm = 0;
        }
        last = theta;
        let b = dot(&w, &w).sqrt();
        if calm >= 2 || b <= 1e-13 * scale || k + 1 == cfg.max_iter.min(n) {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    last
}

/// Both sides of the ground-state representation
/// `⟨fψ, (σ - H) fψ⟩ = Σ_edges a ψ_x ψ_y (f_x - f_y)²`, evaluated
/// independently. `f` must live on depths `≤ R - 2`.
pub fn ground_state_identity(
    ball: &TreeBall,
    psi: &[f64],
    f: &LiftedVector,
    sigma: f64,
) -> Result<(f64, f64)> {
    check_support(ball, f, ball.radius.checked_sub(2))?;
    let lifted = lift_psi(ball, psi);
    let f_psi = LiftedVector {
        values: f
            .values
            .iter()
            .zip(&lifted.values)
            .map(|(a, b)| a * b)
            .collect(),
    };
    let h_f_psi = apply_h(ball, &f_psi)?;
    let lhs = sigma * f_psi.dot(&f_psi) - f_psi.dot(&h_f_psi);

    let mut rhs = 0.0;
    for (x, node) in ball.nodes.iter().enumerate() {
        if let Some(y) = node.parent {
            let df = f.values[x] - f.values[y];
            if df != 0.0 {
                rhs += ball.up_weight[x] * lifted.values[x] * lifted.values[y] * df * df;
            }
        }
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Model;
    use crate::spectral::perron;

    #[test]
    fn ball_sizes() {
        let (g, params) = Model::Free(3).build().unwrap();
        assert_eq!(build_ball(&g, &params, 0, 2).unwrap().len(), 10);
        assert_eq!(build_ball(&g, &params, 0, 0).unwrap().len(), 1);
        let (g, params) = Model::Cube.build().unwrap();
        assert_eq!(build_ball(&g, &params, 3, 2).unwrap().len(), 10);

        let (g, params) = Model::Rg(3, 2).build().unwrap();
        let red = g.vertex_index("r000").unwrap();
        let ball = build_ball(&g, &params, red, 2).unwrap();
        assert_eq!(ball.level_sizes(), vec![1, 2, 4]);
    }

    #[test]
    fn budget_is_enforced() {
        let (g, params) = Model::Free(3).build().unwrap();
        let err = build_ball_with_budget(&g, &params, 0, 10, 100).unwrap_err();
        assert!(matches!(err, Error::NodeBudget { budget: 100, .. }));
    }

    #[test]
    fn interior_degrees_match_projection() {
        let (g, params) = Model::Petersen.build().unwrap();
        let ball = build_ball(&g, &params, 4, 4).unwrap();
        for (x, node) in ball.nodes().iter().enumerate() {
            if ball.is_interior(x) {
                assert_eq!(ball.degree(x), g.degree(node.projection));
            }
        }
    }

    #[test]
    fn delta_root_spreads_to_neighbors() {
        let (g, params) = Model::Free(3).build().unwrap();
        let ball = build_ball(&g, &params, 0, 3).unwrap();
        let mut v = LiftedVector::zeros(&ball);
        v.values[0] = 1.0;
        let hv = apply_h(&ball, &v).unwrap();
        for (x, node) in ball.nodes().iter().enumerate() {
            let expect = if node.depth == 1 { 1.0 } else { 0.0 };
            assert_eq!(hv.values[x], expect);
        }
    }

    #[test]
    fn boundary_support_is_rejected() {
        let (g, params) = Model::Free(3).build().unwrap();
        let ball = build_ball(&g, &params, 0, 2).unwrap();
        let mut v = LiftedVector::zeros(&ball);
        *v.values.last_mut().unwrap() = 1.0;
        assert!(matches!(
            apply_h(&ball, &v),
            Err(Error::Support {
                depth: 2,
                allowed: 1
            })
        ));
    }

    #[test]
    fn lifted_perron_vector_is_an_eigenvector_inside() {
        for m in [Model::Rg(3, 2), Model::AlternatingB(0.7), Model::Petersen] {
            let (g, params) = m.build().unwrap();
            let pp = perron(&g, &params).unwrap();
            let r = 5;
            let ball = build_ball(&g, &params, 0, r).unwrap();
            let mut v = lift_psi(&ball, &pp.psi);
            for (x, n) in ball.nodes().iter().enumerate() {
                assert_eq!(v.values[x], pp.psi[n.projection]);
                if n.depth == r {
                    v.values[x] = 0.0;
                }
            }
            let hv = apply_h(&ball, &v).unwrap();
            for (x, n) in ball.nodes().iter().enumerate() {
                if n.depth + 2 <= r {
                    assert!((hv.values[x] - pp.sigma * v.values[x]).abs() < 1e-12, "{m}");
                }
            }
        }
    }

    #[test]
    fn lanczos_trivial_and_bounded() {
        let (g, params) = Model::AlternatingB(1.0).build().unwrap();
        let ball = build_ball(&g, &params, 1, 0).unwrap();
        assert_eq!(lanczos_top(&ball), 1.0);

        let (g, params) = Model::Free(3).build().unwrap();
        let sigma = 3.0;
        let mut prev = f64::NEG_INFINITY;
        for r in 0..10 {
            let top = lanczos_top(&build_ball(&g, &params, 0, r).unwrap());
            assert!(top >= prev - 1e-12);
            assert!(top <= 8f64.sqrt() + 1e-12 && top <= sigma);
            prev = top;
        }
        assert!(prev > 2.7);
    }

    #[test]
    fn ground_state_identity_small_cases() {
        let (g, params) = Model::Free(3).build().unwrap();
        let pp = perron(&g, &params).unwrap();
        let ball = build_ball(&g, &params, 0, 3).unwrap();
        let f = LiftedVector::zeros(&ball);
        assert_eq!(
            ground_state_identity(&ball, &pp.psi, &f, pp.sigma).unwrap(),
            (0.0, 0.0)
        );

        let psi = vec![1.0, 1.0];
        let mut f = LiftedVector::zeros(&ball);
        f.values[0] = 1.0;
        let (lhs, rhs) = ground_state_identity(&ball, &psi, &f, 3.0).unwrap();
        assert!((lhs - 3.0).abs() < 1e-15 && (rhs - 3.0).abs() < 1e-15);

        *f.values.last_mut().unwrap() = 1.0;
        assert!(ground_state_identity(&ball, &psi, &f, 3.0).is_err());
    }
}
