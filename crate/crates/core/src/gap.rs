//! Spectral gaps `G = σ - Σ` and their comparison bounds.

use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, JacobiParams};
use crate::green_models::rg_edges;
use crate::mfunction::{spectrum_scan, ScanConfig};
use crate::spectral::{perron, perron_minus};

/// Ratio bounds comparing `(a, b)` with `(ã, b̃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapBounds {
    pub s: f64,
    pub i: f64,
    pub s_tilde: f64,
    pub i_tilde: f64,
    pub lower: f64,
    pub upper: f64,
    pub reference_gap: f64,
}

/// Where the comparison gap `G(ã, b̃)` comes from.
#[derive(Debug, Clone)]
pub enum Reference {
    Given(f64),
    Scan(ScanConfig),
}

/// `S`, `I`, `S̃`, `Ĩ` from positive vectors `ψ`, `ψ̃` (any normalization).
pub fn bounds_from_vectors(
    g: &FiniteGraph,
    params: &JacobiParams,
    tilde: &JacobiParams,
    psi: &[f64],
    psi_tilde: &[f64],
    reference_gap: f64,
) -> Result<GapBounds> {
    if psi.len() != g.p() || psi_tilde.len() != g.p() {
        return Err(Error::Precondition(
            "vector length differs from vertex count".into(),
        ));
    }
    if psi.iter().chain(psi_tilde).any(|&x| !(x > 0.0)) {
        return Err(Error::Precondition("ground states must be positive".into()));
    }
    let mut s = f64::NEG_INFINITY;
    let mut s_tilde = f64::NEG_INFINITY;
    for (k, e) in g.edges().iter().enumerate() {
        // both ratios from the same products, so swapping the pair is exact
        let num = params.a[k] * psi[e.u] * psi[e.v];
        let den = tilde.a[k] * psi_tilde[e.u] * psi_tilde[e.v];
        s = s.max(num / den);
        s_tilde = s_tilde.max(den / num);
    }
    let mut i = f64::INFINITY;
    let mut i_tilde = f64::INFINITY;
    for (x, y) in psi.iter().zip(psi_tilde) {
        i = i.min((x * x) / (y * y));
        i_tilde = i_tilde.min((y * y) / (x * x));
    }
    Ok(GapBounds {
        s,
        i,
        s_tilde,
        i_tilde,
        lower: i_tilde / s_tilde * reference_gap,
        upper: s / i * reference_gap,
        reference_gap,
    })
}

fn check_same_graph(g: &FiniteGraph, params: &JacobiParams, tilde: &JacobiParams) -> Result<()> {
    for p in [params, tilde] {
        if p.a.len() != g.q() || p.b.len() != g.p() {
            return Err(Error::Precondition(
                "parameters do not match the graph".into(),
            ));
        }
    }
    Ok(())
}

fn resolve_reference(g: &FiniteGraph, tilde: &JacobiParams, reference: &Reference) -> Result<f64> {
    match reference {
        Reference::Given(x) => Ok(*x),
        Reference::Scan(cfg) => {
            let sigma = perron(g, tilde)?.sigma;
            Ok(sigma - spectrum_scan(g, tilde, cfg)?.sigma_top)
        }
    }
}

/// Bounds `(Ĩ/S̃)·G̃ ≤ G(a,b) ≤ (S/I)·G̃`.
pub fn gap_quantities(
    g: &FiniteGraph,
    params: &JacobiParams,
    tilde: &JacobiParams,
    reference: &Reference,
) -> Result<GapBounds> {
    check_same_graph(g, params, tilde)?;
    let psi = perron(g, params)?.psi;
    let psi_tilde = perron(g, tilde)?.psi;
    let reference_gap = resolve_reference(g, tilde, reference)?;
    bounds_from_vectors(g, params, tilde, &psi, &psi_tilde, reference_gap)
}

/// Bounds on the lower gap `G_-(a,b) = Σ_- - σ_-` of a bipartite graph,
/// built from the positive vectors `U·ψ⁽⁻⁾`. The reference is
/// `G_-(ã,b̃) = G(ã,-b̃)`, so a scanned reference runs on `(ã,-b̃)`.
pub fn gap_minus_quantities(
    g: &FiniteGraph,
    params: &JacobiParams,
    tilde: &JacobiParams,
    reference: &Reference,
) -> Result<GapBounds> {
    check_same_graph(g, params, tilde)?;
    let u = g
        .bipartition()
        .signs()
        .ok_or_else(|| Error::Precondition("graph is not bipartite".into()))?;
    let positive = |p: &JacobiParams| -> Result<Vec<f64>> {
        let mp = perron_minus(g, p)?;
        Ok(mp.psi_minus.iter().zip(&u).map(|(x, s)| x * s).collect())
    };
    let psi = positive(params)?;
    let psi_tilde = positive(tilde)?;
    let reference_gap = resolve_reference(g, &tilde.negate_b(), reference)?;
    bounds_from_vectors(g, params, tilde, &psi, &psi_tilde, reference_gap)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinusGap {
    pub sigma_minus: f64,
    pub sigma_bottom: f64,
    pub gap_minus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// Top eigenvalue of the finite Jacobi matrix.
    pub sigma: f64,
    /// Sup of the spectrum on the tree.
    pub sigma_top: f64,
    pub gap: f64,
    /// Present for bipartite graphs.
    pub minus: Option<MinusGap>,
    /// Band-edge resolution of the scan.
    pub tolerance: f64,
}

pub fn gap_report(g: &FiniteGraph, params: &JacobiParams, cfg: &ScanConfig) -> Result<GapReport> {
    let sigma = perron(g, params)?.sigma;
    let scan = spectrum_scan(g, params, cfg)?;
    let minus = if g.bipartition().is_bipartite() {
        let sigma_minus = perron_minus(g, params)?.sigma_minus;
        Some(MinusGap {
            sigma_minus,
            sigma_bottom: scan.sigma_bottom,
            gap_minus: scan.sigma_bottom - sigma_minus,
        })
    } else {
        None
    };
    Ok(GapReport {
        sigma,
        sigma_top: scan.sigma_top,
        gap: sigma - scan.sigma_top,
        minus,
        tolerance: cfg.bisection_tol,
    })
}

/// `d - 2√(d-1)`: gap of the homogeneous tree of degree `d`.
pub fn reference_gap_free(d: usize) -> f64 {
    d as f64 - 2.0 * ((d - 1) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RgReference {
    pub sigma: f64,
    pub sigma_top: f64,
    pub gap: f64,
    pub sigma_minus: f64,
    pub sigma_bottom: f64,
    pub gap_minus: f64,
}

/// Gaps of the unit rg-model. The top of the spectrum is the outer band
/// edge `√(r-1) + √(g-1)`.
pub fn reference_gap_rg(r: usize, g: usize) -> Result<RgReference> {
    if !(r > g && g >= 2) {
        return Err(Error::Precondition(format!(
            "rg model needs r > g >= 2, got r={r}, g={g}"
        )));
    }
    let sigma = ((r * g) as f64).sqrt();
    let top = rg_edges(r, g).0;
    Ok(RgReference {
        sigma,
        sigma_top: top,
        gap: sigma - top,
        sigma_minus: -sigma,
        sigma_bottom: -top,
        gap_minus: sigma - top,
    })
}

/// Closed-form gap of `(g, params)` when `params` is the unit model on a
/// regular graph or on a complete bipartite graph `K_{r,g}` with `r ≠ g`.
pub fn closed_form_gap(g: &FiniteGraph, params: &JacobiParams) -> Option<f64> {
    if params.a.iter().any(|&a| a != 1.0) || params.b.iter().any(|&b| b != 0.0) {
        return None;
    }
    if let Some(d) = g.regular_degree() {
        return Some(reference_gap_free(d));
    }
    let colors = match g.bipartition() {
        crate::graph::Bipartition::Bipartite(c) => c,
        crate::graph::Bipartition::NotBipartite => return None,
    };
    let r = colors.iter().filter(|&&c| c == 1).count();
    let gr = colors.len() - r;
    if g.q() != r * gr || (0..g.p()).any(|v| g.degree(v) != if colors[v] == 1 { gr } else { r }) {
        return None;
    }
    // distinct neighbours, i.e. simple complete bipartite
    for v in 0..g.p() {
        let mut nb: Vec<usize> = g
            .incident(v)
            .iter()
            .map(|&e| g.edges()[e].other(v))
            .collect();
        nb.sort_unstable();
        nb.dedup();
        if nb.len() != g.degree(v) {
            return None;
        }
    }
    let (big, small) = (r.max(gr), r.min(gr));
    reference_gap_rg(big, small).ok().map(|x| x.gap)
}
