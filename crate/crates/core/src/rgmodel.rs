//! The zero-energy eigenfunction of the rg-model tree.
//!
//! Rooted at a red vertex, `u` vanishes on odd levels and equals
//! `(-1/(r-1))^k` on level `2k`. It lies in `ℓ²` exactly when `r > g` and
//! produces the atom of the density of states at `0`.

use num_complex::Complex64;

use crate::cover::{apply_h, build_ball, LiftedVector};
use crate::error::{Error, Result};
use crate::green_models::{eval_rg, limit, RgSite, SheetedPoint};
use crate::models::{red_id, Model};

#[derive(Debug, Clone, PartialEq)]
pub struct RgEigenfunction {
    pub r: usize,
    pub g: usize,
    pub depth: usize,
    /// Value on each level `0..=2K`.
    pub values: Vec<f64>,
    /// Number of tree vertices on each level.
    pub populations: Vec<u64>,
}

fn check_rg(r: usize, g: usize) -> Result<()> {
    if r > g && g >= 2 {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "rg model needs r > g >= 2, got r={r}, g={g}"
        )))
    }
}

pub fn build_u(r: usize, g: usize, depth: usize) -> Result<RgEigenfunction> {
    check_rg(r, g)?;
    if depth < 1 {
        return Err(Error::Precondition("depth K must be at least 1".into()));
    }
    let ratio = -1.0 / (r - 1) as f64;
    let branch = ((r - 1) * (g - 1)) as u64;
    let mut values = vec![1.0];
    let mut populations = vec![1u64];
    for k in 1..=depth {
        let pow = branch.pow(k as u32 - 1);
        values.push(0.0);
        values.push(ratio.powi(k as i32));
        populations.push(g as u64 * pow);
        populations.push((g * (r - 1)) as u64 * pow);
    }
    Ok(RgEigenfunction {
        r,
        g,
        depth,
        values,
        populations,
    })
}

impl RgEigenfunction {
    /// `Σ` over levels of population times value squared.
    pub fn norm_sq(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.populations)
            .map(|(u, n)| *n as f64 * u * u)
            .sum()
    }
}

/// Partial sum of `‖u‖²` through level `2K` and its limit `r/(r-g)`.
pub fn u_norm_sq(r: usize, g: usize, depth: usize) -> Result<(f64, f64)> {
    let u = build_u(r, g, depth)?;
    Ok((u.norm_sq(), r as f64 / (r - g) as f64))
}

/// `1 + g/(r-1) · Σ_{k<K} ((g-1)/(r-1))^k`, the partial sum in closed form.
pub fn u_norm_sq_geometric(r: usize, g: usize, depth: usize) -> f64 {
    let q = (g - 1) as f64 / (r - 1) as f64;
    1.0 + g as f64 / (r - 1) as f64 * (1.0 - q.powi(depth as i32)) / (1.0 - q)
}

/// Lifts `u` to the rg-tree ball of radius `2K` around a red vertex and
/// returns `max |Hu|` over the nodes of depth at most `2K - 2`.
pub fn verify_hu_zero(r: usize, g: usize, depth: usize) -> Result<f64> {
    if depth < 2 {
        return Err(Error::Precondition("depth K must be at least 2".into()));
    }
    let u = build_u(r, g, depth)?;
    let (graph, params) = Model::Rg(r, g).build()?;
    let root = graph.vertex_index(&red_id(0)).expect("red vertex exists");
    let ball = build_ball(&graph, &params, root, 2 * depth)?;
    let mut lifted = LiftedVector::zeros(&ball);
    for (x, node) in ball.nodes().iter().enumerate() {
        if node.depth < 2 * depth {
            lifted.values[x] = u.values[node.depth];
        }
    }
    let hu = apply_h(&ball, &lifted)?;
    Ok(ball
        .nodes()
        .iter()
        .zip(&hu.values)
        .filter(|(n, _)| n.depth <= 2 * depth - 2)
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max))
}

/// `lim z·G_r(z)` as `z → 0` along the imaginary axis, with the expected
/// value `-(r-g)/r = -1/‖u‖²`.
pub fn residue_check(r: usize, g: usize) -> Result<(f64, f64)> {
    check_rg(r, g)?;
    let res = site_residue(r, g, RgSite::Red)?;
    Ok((res, -((r - g) as f64) / r as f64))
}

fn site_residue(r: usize, g: usize, site: RgSite) -> Result<f64> {
    let f = |z: Complex64| Ok(z * eval_rg(r, g, site, SheetedPoint::first(z))?);
    Ok(limit(f, Complex64::new(0.0, 0.0), Complex64::i())?.re)
}

/// Weight of the atom at `0`: `(1/(r+g))·[r·(-res G_r) + g·(-res G_g)]`.
pub fn dos_zero_weight(r: usize, g: usize) -> Result<f64> {
    check_rg(r, g)?;
    let red = site_residue(r, g, RgSite::Red)?;
    let green = site_residue(r, g, RgSite::Green)?;
    Ok((r as f64 * -red + g as f64 * -green) / (r + g) as f64)
}
