//! Dense symmetric eigensolver and Perron–Frobenius eigenpairs of the finite
//! Jacobi matrix.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{assemble_jacobi, FiniteGraph, JacobiParams};

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SpectrumFinite {
    /// Ascending, with multiplicity.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the unit eigenvector for `eigenvalues[k]`.
    pub eigenvectors: Option<DMatrix<f64>>,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenConfig {
    /// Stop once the off-diagonal Frobenius norm is below `tol · ‖M‖_F`.
    pub tol: f64,
    pub max_sweeps: usize,
    pub vectors: bool,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            tol: 1e-13,
            max_sweeps: 100,
            vectors: true,
        }
    }
}

fn off_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// All eigenvalues (and optionally eigenvectors) by cyclic Jacobi rotations.
pub fn eigen_sym(m: &DMatrix<f64>) -> Result<SpectrumFinite> {
    eigen_sym_with(m, &EigenConfig::default())
}

pub fn eigen_sym_with(m: &DMatrix<f64>, cfg: &EigenConfig) -> Result<SpectrumFinite> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Precondition(format!(
            "matrix is {}x{}, not square",
            n,
            m.ncols()
        )));
    }
    let scale = m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    for i in 0..n {
        for j in i + 1..n {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-14 * scale {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }

    let mut a = m.clone();
    let mut v = cfg.vectors.then(|| DMatrix::<f64>::identity(n, n));
    let norm = m.norm();
    let mut sweeps = 0;
    while off_norm(&a) > cfg.tol * norm {
        if sweeps == cfg.max_sweeps {
            return Err(Error::NoConvergence {
                what: "Jacobi eigenvalue sweep",
                iterations: sweeps,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                // exact zero on the rotated pair keeps the matrix symmetric
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let eigenvectors = v.map(|v| DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]));
    Ok(SpectrumFinite {
        eigenvalues,
        eigenvectors,
    })
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta` (`beta.len() == alpha.len() - 1`), by
/// Sturm-sequence bisection.
pub fn tridiagonal_top(alpha: &[f64], beta: &[f64]) -> f64 {
    let n = alpha.len();
    assert!(n > 0 && beta.len() + 1 == n);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let r = beta.get(i).map_or(0.0, |b| b.abs()) + if i > 0 { beta[i - 1].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    let pivot_floor = f64::EPSILON * (hi - lo).abs().max(1.0);
    // number of eigenvalues strictly below x
    let below = |x: f64| {
        let mut count = 0;
        let mut d = alpha[0] - x;
        if d < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let prev = if d == 0.0 { pivot_floor } else { d };
            d = alpha[i] - x - beta[i - 1] * beta[i - 1] / prev;
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Top eigenvalue `σ` and its strictly positive unit eigenvector `ψ`.
#[derive(Debug, Clone)]
pub struct PerronPair {
    pub sigma: f64,
    /// Indexed like `FiniteGraph::vertices`.
    pub psi: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct PerronConfig {
    /// Max-norm distance between successive normalized iterates.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PerronConfig {
    fn default() -> Self {
        PerronConfig {
            tol: 1e-14,
            max_iter: 1_000_000,
        }
    }
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= n);
}

pub fn perron(g: &FiniteGraph, params: &JacobiParams) -> Result<PerronPair> {
    perron_with(g, params, &PerronConfig::default())
}

/// Power iteration on `J + c·Id` with
/// `c = max|b| + max incident weight sum + 1`, which is entrywise
/// nonnegative, irreducible and has a positive diagonal.
pub fn perron_with(
    g: &FiniteGraph,
    params: &JacobiParams,
    cfg: &PerronConfig,
) -> Result<PerronPair> {
    let j = assemble_jacobi(g, params);
    let p = g.p();
    let max_b = params.b.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let max_row = (0..p)
        .map(|v| g.incident(v).iter().map(|&e| params.a[e]).sum::<f64>())
        .fold(0.0f64, f64::max);
    let shift = max_b + max_row + 1.0;
    let shifted = &j + DMatrix::<f64>::identity(p, p) * shift;

    let mut x = vec![1.0; p];
    normalize(&mut x);
    for _ in 0..cfg.max_iter {
        let mut y: Vec<f64> = (&shifted * nalgebra::DVector::from_column_slice(&x))
            .iter()
            .copied()
            .collect();
        normalize(&mut y);
        let diff = x
            .iter()
            .zip(&y)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        x = y;
        if diff < cfg.tol {
            let xv = nalgebra::DVector::from_column_slice(&x);
            let sigma = xv.dot(&(&j * &xv));
            if x.iter().any(|&v| v <= 0.0) {
                return Err(Error::Precondition(
                    "Perron vector is not strictly positive; is the graph connected?".into(),
                ));
            }
            return Ok(PerronPair { sigma, psi: x });
        }
    }
    Err(Error::NoConvergence {
        what: "Perron power iteration",
        iterations: cfg.max_iter,
    })
}

/// Lowest eigenvalue `σ_-` of `J` and an eigenvector.
#[derive(Debug, Clone)]
pub struct MinusPair {
    pub sigma_minus: f64,
    pub psi_minus: Vec<f64>,
}

/// For bipartite graphs this is `σ_-(a,b) = -σ(a,-b)` with
/// `ψ⁽⁻⁾ = U·ψ(a,-b)`; otherwise the bottom eigenpair of `J`, signed so that
/// its first nonzero entry is positive.
pub fn perron_minus(g: &FiniteGraph, params: &JacobiParams) -> Result<MinusPair> {
    if let Some(u) = g.bipartition().signs() {
        let pp = perron(g, &params.negate_b())?;
        return Ok(MinusPair {
            sigma_minus: -pp.sigma,
            psi_minus: pp.psi.iter().zip(&u).map(|(x, s)| x * s).collect(),
        });
    }
    let spec = eigen_sym(&assemble_jacobi(g, params))?;
    let vecs = spec.eigenvectors.expect("eigenvectors requested");
    let mut psi: Vec<f64> = vecs.column(0).iter().copied().collect();
    if psi
        .iter()
        .find(|x| x.abs() > 1e-12)
        .is_some_and(|x| *x < 0.0)
    {
        psi.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(MinusPair {
        sigma_minus: spec.eigenvalues[0],
        psi_minus: psi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Model;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn two_by_two() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 3.0, -1.0]);
        let s = eigen_sym(&m).unwrap();
        let r = 10f64.sqrt();
        assert!(close(s.eigenvalues[0], -r, 1e-14));
        assert!(close(s.eigenvalues[1], r, 1e-14));
    }

    #[test]
    fn diagonal_is_sorted() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.0]));
        assert_eq!(eigen_sym(&m).unwrap().eigenvalues, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn rg_spectrum() {
        let (g, params) = Model::Rg(3, 2).build().unwrap();
        let s = eigen_sym(&assemble_jacobi(&g, &params)).unwrap();
        let r6 = 6f64.sqrt();
        let expect = [-r6, 0.0, 0.0, 0.0, r6];
        for (x, y) in s.eigenvalues.iter().zip(expect) {
            assert!(close(*x, y, 1e-13), "{:?}", s.eigenvalues);
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(matches!(eigen_sym(&m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let (g, params) = Model::Petersen.build().unwrap();
        let j = assemble_jacobi(&g, &params);
        let s = eigen_sym(&j).unwrap();
        let v = s.eigenvectors.unwrap();
        let gram = v.transpose() * &v;
        assert!((gram - DMatrix::identity(10, 10)).amax() < 1e-12);
        // Petersen spectrum: 3, 1 (x5), -2 (x4)
        assert!(close(s.eigenvalues[9], 3.0, 1e-12));
        assert!(close(s.eigenvalues[0], -2.0, 1e-12));
    }

    #[test]
    fn tridiagonal_top_matches_dense() {
        let alpha = [0.3, -1.0, 2.0, 0.5, 0.0];
        let beta = [1.0, 0.7, 0.2, 1.5];
        let mut m = DMatrix::zeros(5, 5);
        for i in 0..5 {
            m[(i, i)] = alpha[i];
            if i < 4 {
                m[(i, i + 1)] = beta[i];
                m[(i + 1, i)] = beta[i];
            }
        }
        let dense = eigen_sym(&m).unwrap().eigenvalues[4];
        assert!(close(tridiagonal_top(&alpha, &beta), dense, 1e-13));
        assert_eq!(tridiagonal_top(&[1.5], &[]), 1.5);
    }

    #[test]
    fn perron_regular_graphs() {
        for (m, d) in [
            (Model::Free(3), 3.0),
            (Model::Cube, 3.0),
            (Model::Petersen, 3.0),
            (Model::Complete(5), 4.0),
        ] {
            let (g, params) = m.build().unwrap();
            let pp = perron(&g, &params).unwrap();
            assert!(close(pp.sigma, d, 1e-12), "{m}");
            let c = 1.0 / (g.p() as f64).sqrt();
            assert!(pp.psi.iter().all(|x| close(*x, c, 1e-12)), "{m}");
        }
    }

    #[test]
    fn perron_rg() {
        let (g, params) = Model::Rg(3, 2).build().unwrap();
        let pp = perron(&g, &params).unwrap();
        assert!(close(pp.sigma, 6f64.sqrt(), 1e-12));
        // unnormalized: sqrt(g)=sqrt2 on red, sqrt(r)=sqrt3 on green; sum of squares 3*2+2*3=12
        let norm = 12f64.sqrt();
        for (v, x) in g.vertices().iter().zip(&pp.psi) {
            let expect = if v.starts_with('r') {
                2f64.sqrt()
            } else {
                3f64.sqrt()
            } / norm;
            assert!(close(*x, expect, 1e-12), "{v}: {x}");
        }
    }

    #[test]
    fn perron_alternating() {
        let (g, params) = Model::AlternatingB(1.0).build().unwrap();
        let pp = perron(&g, &params).unwrap();
        assert!(close(pp.sigma, 10f64.sqrt(), 1e-12));
        let j = assemble_jacobi(&g, &params);
        let psi = nalgebra::DVector::from_column_slice(&pp.psi);
        assert!((&j * &psi - &psi * pp.sigma).amax() < 1e-12);
    }

    #[test]
    fn minus_pairs() {
        let (g, params) = Model::Complete(4).build().unwrap();
        let mp = perron_minus(&g, &params).unwrap();
        assert!(close(mp.sigma_minus, -1.0, 1e-12));
        let flipped = perron(&g, &params.negate_b()).unwrap();
        assert!(close(-flipped.sigma, -3.0, 1e-12));

        let (g, params) = Model::Rg(3, 2).build().unwrap();
        let mp = perron_minus(&g, &params).unwrap();
        let pp = perron(&g, &params).unwrap();
        assert!(close(mp.sigma_minus, -pp.sigma, 1e-12));
        let j = assemble_jacobi(&g, &params);
        let v = nalgebra::DVector::from_column_slice(&mp.psi_minus);
        assert!((&j * &v - &v * mp.sigma_minus).amax() < 1e-12);
    }
}
