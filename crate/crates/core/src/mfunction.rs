//! Half-tree Green's functions of a periodic Jacobi matrix on a tree.
//!
//! Removing one edge of the cover splits it into two half-trees. By
//! periodicity the diagonal resolvent at the root of a half-tree depends
//! only on the directed base edge `u → v` that enters it, giving a finite
//! self-consistent system
//!
//! ```text
//! m(u→v) = 1 / ( b_v - z - Σ_{v→w ≠ v→u} a² m(v→w) )
//! ```
//!
//! over the `2q` directed edges. Its Herglotz solution yields every diagonal
//! Green's function `G_v(z)`, from which the density of states, band edges and
//! point masses are read off.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, JacobiParams};
use crate::spectral::perron;

type C = Complex64;

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Damping `θ` in `m ← (1-θ) m + θ F(m)`.
    pub damping: f64,
    /// Relative update size that counts as converged.
    pub tol: f64,
    pub max_fixed_point: usize,
    pub max_newton: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            damping: 0.5,
            tol: 1e-13,
            max_fixed_point: 100_000,
            max_newton: 100,
        }
    }
}

/// Solution of the half-tree system at one energy.
#[derive(Debug, Clone)]
pub struct MVector {
    pub z: C,
    /// Indexed by directed edge: `2k` is edge `k` from `u` to `v`, `2k + 1`
    /// the reverse.
    pub m: Vec<C>,
}

/// Precomputed structure of the half-tree system for one graph.
#[derive(Debug, Clone)]
pub struct HalfTreeSystem {
    b: Vec<f64>,
    head: Vec<usize>,
    next: Vec<Vec<(usize, f64)>>,
    out: Vec<Vec<(usize, f64)>>,
    sigma: f64,
    cfg: SolverConfig,
}

impl HalfTreeSystem {
    pub fn new(g: &FiniteGraph, params: &JacobiParams) -> Result<Self> {
        Self::with_config(g, params, SolverConfig::default())
    }

    pub fn with_config(g: &FiniteGraph, params: &JacobiParams, cfg: SolverConfig) -> Result<Self> {
        let q = g.q();
        let mut head = vec![0; 2 * q];
        let mut out = vec![Vec::new(); g.p()];
        for (k, e) in g.edges().iter().enumerate() {
            let w = params.a[k] * params.a[k];
            head[2 * k] = e.v;
            head[2 * k + 1] = e.u;
            out[e.u].push((2 * k, w));
            out[e.v].push((2 * k + 1, w));
        }
        let next = (0..2 * q)
            .map(|d| {
                out[head[d]]
                    .iter()
                    .copied()
                    .filter(|&(d2, _)| d2 != d ^ 1)
                    .collect()
            })
            .collect();
        let sigma = perron(g, params)?.sigma;
        Ok(HalfTreeSystem {
            b: params.b.clone(),
            head,
            next,
            out,
            sigma,
            cfg,
        })
    }

    pub fn directed_len(&self) -> usize {
        self.head.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    fn denominators(&self, z: C, m: &[C]) -> Vec<C> {
        (0..m.len())
            .map(|d| {
                let s: C = self.next[d].iter().map(|&(d2, w)| w * m[d2]).sum();
                self.b[self.head[d]] - z - s
            })
            .collect()
    }

    /// `F(m)`, the right-hand side of the fixed-point system.
    pub fn apply(&self, z: C, m: &[C]) -> Vec<C> {
        self.denominators(z, m)
            .into_iter()
            .map(|x| x.inv())
            .collect()
    }

    /// Max relative residual `|m - F(m)| / max(1, |m|)`.
    pub fn residual(&self, z: C, m: &[C]) -> f64 {
        self.apply(z, m)
            .iter()
            .zip(m)
            .map(|(f, x)| (f - x).norm() / x.norm().max(1.0))
            .fold(0.0, f64::max)
    }

    fn max_update(old: &[C], new: &[C]) -> f64 {
        old.iter()
            .zip(new)
            .map(|(a, b)| (a - b).norm() / b.norm().max(1.0))
            .fold(0.0, f64::max)
    }

    fn fixed_point(&self, z: C, mut m: Vec<C>, max_iter: usize) -> (Vec<C>, bool) {
        let theta = self.cfg.damping;
        for _ in 0..max_iter {
            let f = self.apply(z, &m);
            let new: Vec<C> = m
                .iter()
                .zip(&f)
                .map(|(a, b)| (1.0 - theta) * a + theta * b)
                .collect();
            let upd = Self::max_update(&m, &new);
            m = new;
            if upd < self.cfg.tol {
                return (m, true);
            }
        }
        (m, false)
    }

    /// Newton's method on `m - F(m) = 0`, with step halving when the
    /// residual grows.
    fn newton(&self, z: C, m: Vec<C>) -> Option<Vec<C>> {
        self.newton_with(z, m, self.cfg.max_newton, 30)
    }

    /// Plain full-step Newton for continuation steps: a poor start fails
    /// fast and the caller shortens the step instead.
    fn newton_local(&self, z: C, m: Vec<C>) -> Option<Vec<C>> {
        self.newton_with(z, m, 25, 0)
    }

    fn newton_with(
        &self,
        z: C,
        mut m: Vec<C>,
        max_iter: usize,
        max_halvings: usize,
    ) -> Option<Vec<C>> {
        let n = m.len();
        let mut res = self.residual(z, &m);
        for _ in 0..max_iter {
            let den = self.denominators(z, &m);
            let f: Vec<C> = m.iter().zip(&den).map(|(x, d)| x - d.inv()).collect();
            let mut jac = DMatrix::<C>::identity(n, n);
            for d in 0..n {
                let inv2 = (den[d] * den[d]).inv();
                for &(d2, w) in &self.next[d] {
                    jac[(d, d2)] -= w * inv2;
                }
            }
            let rhs = DVector::from_iterator(n, f.iter().map(|x| -x));
            let step = jac.lu().solve(&rhs)?;
            let mut t = 1.0;
            let mut accepted = None;
            if max_halvings == 0 {
                let trial: Vec<C> = m.iter().zip(step.iter()).map(|(x, s)| x + s).collect();
                let r = self.residual(z, &trial);
                if !r.is_finite() {
                    return None;
                }
                accepted = Some((trial, r));
            }
            for _ in 0..max_halvings {
                let trial: Vec<C> = m.iter().zip(step.iter()).map(|(x, s)| x + t * s).collect();
                let r = self.residual(z, &trial);
                if r.is_finite() && (r < res || r < self.cfg.tol) {
                    accepted = Some((trial, r));
                    break;
                }
                t *= 0.5;
            }
            // no descent left: the residual has hit its rounding floor
            let Some((trial, r)) = accepted else {
                return (res < 1e-12).then_some(m);
            };
            let upd = Self::max_update(&m, &trial);
            m = trial;
            res = r;
            if upd < self.cfg.tol || res < 1e-15 {
                return (res < 1e-12).then_some(m);
            }
        }
        (res < 1e-12).then_some(m)
    }

    /// For `Im z > 0` every half-tree function satisfies
    /// `Im m ≥ Im z · |m|²`; the Herglotz solution is the only one that does.
    fn is_herglotz(z: C, m: &[C]) -> bool {
        if z.im <= 0.0 {
            return true;
        }
        m.iter()
            .all(|x| x.im >= 0.5 * z.im * x.norm_sqr() - 1e-14 * x.norm().max(1.0))
    }

    fn check_energy(&self, z: C) -> Result<()> {
        if !z.is_finite() {
            return Err(Error::Precondition(format!("energy {z} is not finite")));
        }
        if z.im == 0.0 && z.re.abs() <= self.sigma {
            return Err(Error::Precondition(format!(
                "real energy {} must satisfy |z| > σ = {}",
                z.re, self.sigma
            )));
        }
        Ok(())
    }

    /// Solves the system at `z` (`Im z ≠ 0`, or real with `|z| > σ`).
    ///
    /// Damped fixed-point iteration from `m ≡ -1/z`; Newton's method takes
    /// over if it has not converged within the iteration budget, and a
    /// continuation in `Im z` is the last resort.
    pub fn solve(&self, z: C) -> Result<MVector> {
        self.check_energy(z)?;
        if z.im < 0.0 {
            let up = self.solve(z.conj())?;
            return Ok(MVector {
                z,
                m: up.m.iter().map(|x| x.conj()).collect(),
            });
        }
        let start = vec![-z.inv(); self.directed_len()];
        let (m, converged) = self.fixed_point(z, start, self.cfg.max_fixed_point);
        if converged && Self::is_herglotz(z, &m) {
            return Ok(MVector { z, m });
        }
        if let Some(m) = self.newton(z, m).filter(|m| Self::is_herglotz(z, m)) {
            return Ok(MVector { z, m });
        }
        if z.im > 0.0 && z.im < 1.0 {
            let ladder = decade_ladder(1.0, z.im);
            if let Ok(mut path) = self.solve_ladder(z.re, &ladder) {
                return Ok(path.pop().expect("nonempty ladder"));
            }
        }
        Err(Error::Solver {
            z,
            reason: "no Herglotz solution found".into(),
        })
    }

    /// Solutions at `x + iε` for a decreasing list of `ε > 0`. The first
    /// level is solved from scratch (damped iteration, then Newton), every
    /// later one by Newton started from the previous level.
    pub fn solve_ladder(&self, x: f64, eps: &[f64]) -> Result<Vec<MVector>> {
        let (path, err) = self.solve_ladder_partial(x, eps)?;
        match err {
            None => Ok(path),
            Some(e) => Err(e),
        }
    }

    /// Like `solve_ladder`, but keeps the levels reached before a failure.
    pub fn solve_ladder_partial(
        &self,
        x: f64,
        eps: &[f64],
    ) -> Result<(Vec<MVector>, Option<Error>)> {
        if eps.iter().any(|&e| e <= 0.0) || eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Precondition(
                "ladder must be positive and decreasing".into(),
            ));
        }
        let mut out: Vec<MVector> = Vec::with_capacity(eps.len());
        for (k, &e) in eps.iter().enumerate() {
            let z = C::new(x, e);
            let m = match out.last() {
                None => {
                    let start = vec![-z.inv(); self.directed_len()];
                    let (m, ok) = self.fixed_point(z, start, self.cfg.max_fixed_point);
                    if ok {
                        Some(m)
                    } else {
                        self.newton(z, m)
                    }
                }
                Some(prev) => self.continue_to(x, eps[k - 1], e, &prev.m),
            };
            match m.filter(|m| Self::is_herglotz(z, m)) {
                Some(m) => out.push(MVector { z, m }),
                None => {
                    let err = Error::Solver {
                        z,
                        reason: "continuation lost the Herglotz branch".into(),
                    };
                    return Ok((out, Some(err)));
                }
            }
        }
        Ok((out, None))
    }

    /// Local Newton from `start`; if that misses, alternate short bursts of
    /// the damped iteration (which contracts toward the Herglotz solution)
    /// with further Newton attempts.
    fn polish(&self, z: C, start: &[C]) -> Option<Vec<C>> {
        let ok = |m: &Vec<C>| Self::is_herglotz(z, m);
        if let Some(m) = self.newton_local(z, start.to_vec()).filter(ok) {
            return Some(m);
        }
        let mut m = start.to_vec();
        for _ in 0..3 {
            let (next, converged) = self.fixed_point(z, m, 200);
            if converged && ok(&next) {
                return Some(next);
            }
            if let Some(found) = self.newton_local(z, next.clone()).filter(ok) {
                return Some(found);
            }
            m = next;
        }
        None
    }

    /// Follows the solution from `x + i e_prev` down to `x + i e`,
    /// shortening the step while `polish` fails, with a long damped
    /// iteration as the last resort.
    fn continue_to(&self, x: f64, e_prev: f64, e: f64, prev: &[C]) -> Option<Vec<C>> {
        let (mut cur_e, mut cur) = (e_prev, prev.to_vec());
        let full = (e / e_prev).ln();
        let mut step = full;
        for _ in 0..100 {
            let target = (cur_e * step.exp()).max(e);
            match self.polish(C::new(x, target), &cur) {
                Some(m) => {
                    if target <= e {
                        return Some(m);
                    }
                    cur = m;
                    cur_e = target;
                    step = (2.0 * step).max(full);
                }
                None => {
                    step *= 0.5;
                    if step.abs() < 0.05 {
                        // near a coalescing pair of roots Newton's basin
                        // shrinks with ε; the damped iteration still converges
                        let z = C::new(x, e);
                        let (m, converged) = self.fixed_point(z, cur, self.cfg.max_fixed_point);
                        let m = if converged {
                            Some(m)
                        } else {
                            self.newton(z, m)
                        };
                        return m.filter(|m| Self::is_herglotz(z, m));
                    }
                }
            }
        }
        None
    }

    /// `G_v(z) = 1 / (b_v - z - Σ_{v→w} a² m(v→w))` for every vertex.
    pub fn green_all(&self, mv: &MVector) -> Vec<C> {
        self.out
            .iter()
            .enumerate()
            .map(|(v, edges)| {
                let s: C = edges.iter().map(|&(d, w)| w * mv.m[d]).sum();
                (self.b[v] - mv.z - s).inv()
            })
            .collect()
    }

    /// Normalized density `(1/p) Σ_v Im G_v / π`.
    pub fn density(&self, mv: &MVector) -> f64 {
        let g = self.green_all(mv);
        g.iter().map(|x| x.im).sum::<f64>() / (g.len() as f64 * std::f64::consts::PI)
    }
}

/// `start, start/10, …` down to and including `end`.
pub fn decade_ladder(start: f64, end: f64) -> Vec<f64> {
    let mut out = vec![start];
    let mut e = start;
    while e > end * 1.000_001 {
        e = (e / 10.0).max(end);
        out.push(e);
    }
    out
}

pub fn solve_m(g: &FiniteGraph, params: &JacobiParams, z: C) -> Result<MVector> {
    HalfTreeSystem::new(g, params)?.solve(z)
}

pub fn green_diag(g: &FiniteGraph, params: &JacobiParams, z: C, v: usize) -> Result<C> {
    let sys = HalfTreeSystem::new(g, params)?;
    let mv = sys.solve(z)?;
    Ok(sys.green_all(&mv)[v])
}

pub fn dos_density(g: &FiniteGraph, params: &JacobiParams, x: f64, eps: f64) -> Result<f64> {
    if eps <= 0.0 {
        return Err(Error::Precondition(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let sys = HalfTreeSystem::new(g, params)?;
    let mv = sys.solve(C::new(x, eps))?;
    Ok(sys.density(&mv))
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    /// Defaults to `[-σ - 1, σ + 1]`.
    pub range: Option<(f64, f64)>,
    pub resolution: usize,
    /// Broadenings whose densities are extrapolated linearly (in the two
    /// smallest) to `ε = 0` for the reported density.
    pub eps: Vec<f64>,
    /// Broadening at which band membership is decided.
    pub edge_eps: f64,
    pub band_threshold: f64,
    pub bisection_tol: f64,
    /// Smallest point-mass weight that is reported.
    pub mass_floor: f64,
    pub solver: SolverConfig,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            range: None,
            resolution: 801,
            eps: vec![1e-2, 1e-3, 1e-4],
            edge_eps: 1e-12,
            band_threshold: 1e-6,
            bisection_tol: 1e-6,
            mass_floor: 1e-6,
            solver: SolverConfig::default(),
        }
    }
}

/// One grid point of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub x: f64,
    /// Density extrapolated to zero broadening (`NaN` if the solver failed).
    pub density: f64,
    /// Smallest broadening that entered the extrapolation.
    pub eps_used: f64,
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Sorted, disjoint closed intervals.
    pub bands: Vec<(f64, f64)>,
    /// `(energy, weight)` of each atom of the density of states.
    pub point_masses: Vec<(f64, f64)>,
    pub sigma_top: f64,
    pub sigma_bottom: f64,
    pub grid: Vec<ScanPoint>,
}

impl SpectrumReport {
    fn new(
        mut bands: Vec<(f64, f64)>,
        point_masses: Vec<(f64, f64)>,
        grid: Vec<ScanPoint>,
    ) -> Self {
        bands.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in bands {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        let ends = merged
            .iter()
            .flat_map(|&(lo, hi)| [lo, hi])
            .chain(point_masses.iter().map(|&(x, _)| x));
        let (sigma_bottom, sigma_top) = ends
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            });
        SpectrumReport {
            bands: merged,
            point_masses,
            sigma_top,
            sigma_bottom,
            grid,
        }
    }
}

/// Densities along one ladder, paired with their broadenings. The ladder
/// may stop early where the solver gives up very close to a singular edge.
struct Profile {
    eps: Vec<f64>,
    rho: Vec<f64>,
}

impl Profile {
    fn at(&self, e: f64) -> Option<f64> {
        let k = self.eps.iter().position(|&x| (x - e).abs() <= 1e-9 * e)?;
        self.rho.get(k).copied()
    }

    /// `π ε ρ(ε)`: tends to the atom's weight at a point mass.
    fn weight_at(&self, e: f64) -> Option<f64> {
        Some(std::f64::consts::PI * e * self.at(e)?)
    }

    fn is_complete(&self) -> bool {
        self.rho.len() == self.eps.len()
    }
}

struct Scanner<'a> {
    sys: &'a HalfTreeSystem,
    cfg: &'a ScanConfig,
    ladder: Vec<f64>,
    /// Smallest configured broadening, which every grid point must reach.
    required: f64,
}

impl Scanner<'_> {
    /// Profile along `ladder`; an error unless at least the levels down to
    /// `required` were reached.
    fn profile(&self, x: f64, ladder: &[f64], required: f64) -> Result<Profile> {
        let (path, err) = self.sys.solve_ladder_partial(x, ladder)?;
        let reached = path.last().map_or(f64::INFINITY, |mv| mv.z.im);
        if reached > required * (1.0 + 1e-9) {
            return Err(err.expect("incomplete ladder carries its error"));
        }
        Ok(Profile {
            eps: ladder.to_vec(),
            rho: path.iter().map(|mv| self.sys.density(mv)).collect(),
        })
    }

    /// Absolutely continuous spectrum at `x`: density above threshold at
    /// the smallest broadening reached and not decaying like `ε` over the
    /// last decade (the tail of an atom or of a band just outside its edge).
    fn in_band_profile(&self, prof: &Profile) -> bool {
        let n = prof.rho.len();
        if n < 2 {
            return false;
        }
        let (larger, small) = (prof.rho[n - 2], prof.rho[n - 1]);
        small > self.cfg.band_threshold && larger < 3.0 * small
    }

    fn in_band(&self, x: f64, masses: &[(f64, f64)]) -> Result<bool> {
        if masses.iter().any(|&(x0, _)| (x - x0).abs() < 1e-8) {
            return Ok(false);
        }
        Ok(self.in_band_profile(&self.profile(x, &self.ladder, self.required)?))
    }

    /// Golden-section search for the maximum of `π ε ρ(x + iε)` with `ε`
    /// shrinking by decades, then a convergence check of the weight.
    fn zoom_mass(&self, x_start: f64, half_width: f64) -> Result<Option<(f64, f64)>> {
        let mut center = x_start;
        let mut hw = half_width;
        let mut last_best = 0.0;
        let weight = |x: f64, e: f64| -> Result<f64> {
            let prof = self.profile(x, &decade_ladder(1.0, e), e)?;
            Ok(prof.weight_at(e).expect("level reached"))
        };
        const INV_PHI: f64 = 0.618_033_988_749_895;
        for level in 2..=9 {
            let e = 10f64.powi(-level);
            let (mut lo, mut hi) = (center - hw, center + hw);
            let mut c = hi - INV_PHI * (hi - lo);
            let mut d = lo + INV_PHI * (hi - lo);
            let (mut fc, mut fd) = (weight(c, e)?, weight(d, e)?);
            while hi - lo > 0.01 * e {
                if fc >= fd {
                    hi = d;
                    d = c;
                    fd = fc;
                    c = hi - INV_PHI * (hi - lo);
                    fc = weight(c, e)?;
                } else {
                    lo = c;
                    c = d;
                    fc = fd;
                    d = lo + INV_PHI * (hi - lo);
                    fd = weight(d, e)?;
                }
            }
            let found = 0.5 * (lo + hi);
            let best = fc.max(fd);
            // an atom keeps its weight and sits inside the window; a band
            // tail loses weight with ε or pushes the maximum to the border
            if level >= 4 && (best < 0.5 * last_best || (found - center).abs() > 0.98 * hw) {
                return Ok(None);
            }
            last_best = best;
            center = found;
            hw = 3.0 * e;
        }
        let prof = self.profile(center, &decade_ladder(1.0, 1e-9), 1e-9)?;
        let (w8, w9) = (prof.weight_at(1e-8).unwrap(), prof.weight_at(1e-9).unwrap());
        if w9 > self.cfg.mass_floor && (w8 - w9).abs() <= 1e-2 * w9 {
            // the coarser level is less sensitive to the residual offset
            // of `center` from the atom
            Ok(Some((center, w8)))
        } else {
            Ok(None)
        }
    }

    fn bisect(&self, mut inside: f64, mut outside: f64, masses: &[(f64, f64)]) -> Result<f64> {
        while (inside - outside).abs() > self.cfg.bisection_tol {
            let mid = 0.5 * (inside + outside);
            if self.in_band(mid, masses)? {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(0.5 * (inside + outside))
    }
}

/// Bands, atoms and spectral extremes of the periodic operator.
///
/// Every grid point is followed from `ε = 1` down to `edge_eps` by Newton
/// continuation, passing through the configured broadenings. The reported
/// density is the linear extrapolation of the two smallest configured
/// broadenings; band membership uses the edge broadening; atoms are located
/// by zooming in on isolated density peaks.
pub fn spectrum_scan(
    g: &FiniteGraph,
    params: &JacobiParams,
    cfg: &ScanConfig,
) -> Result<SpectrumReport> {
    let sys = HalfTreeSystem::with_config(g, params, cfg.solver)?;
    spectrum_scan_system(&sys, cfg)
}

pub fn spectrum_scan_system(sys: &HalfTreeSystem, cfg: &ScanConfig) -> Result<SpectrumReport> {
    if cfg.resolution < 10 {
        return Err(Error::Precondition(
            "scan resolution must be at least 10".into(),
        ));
    }
    if cfg.eps.len() < 2 || cfg.eps.iter().any(|&e| e <= 0.0) || cfg.edge_eps <= 0.0 {
        return Err(Error::Precondition(
            "need at least two positive broadenings".into(),
        ));
    }
    let sigma = sys.sigma();
    let (lo, hi) = cfg.range.unwrap_or((-sigma - 1.0, sigma + 1.0));
    if !(lo < hi) {
        return Err(Error::Precondition(format!(
            "empty scan range [{lo}, {hi}]"
        )));
    }

    let mut sched = cfg.eps.clone();
    sched.sort_by(|a, b| b.total_cmp(a));
    let mut ladder: Vec<f64> = decade_ladder(1.0, cfg.edge_eps);
    ladder.extend(sched.iter().copied());
    ladder.push(10.0 * cfg.edge_eps);
    ladder.sort_by(|a, b| b.total_cmp(a));
    ladder.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * *b);

    let required = sched[sched.len() - 1];
    let scanner = Scanner {
        sys,
        cfg,
        ladder,
        required,
    };
    let n = cfg.resolution;
    let step = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    let profiles: Vec<Option<Profile>> = xs
        .par_iter()
        .map(|&x| scanner.profile(x, &scanner.ladder, required).ok())
        .collect();

    let failed = profiles.iter().filter(|p| p.is_none()).count();
    if failed * 100 > n {
        let first = profiles.iter().position(|p| p.is_none()).unwrap_or(0);
        return Err(Error::ScanFailures {
            failed,
            total: n,
            first_x: xs[first],
        });
    }

    let (e1, e2) = (sched[sched.len() - 2], sched[sched.len() - 1]);
    let grid: Vec<ScanPoint> = xs
        .iter()
        .zip(&profiles)
        .map(|(&x, p)| {
            let density = p.as_ref().map_or(f64::NAN, |p| {
                let (r1, r2) = (p.at(e1).unwrap(), p.at(e2).unwrap());
                r2 - e2 * (r1 - r2) / (e1 - e2)
            });
            ScanPoint {
                x,
                density,
                eps_used: e2,
            }
        })
        .collect();

    // atoms
    let coarse = sched[0];
    let band_at: Vec<bool> = profiles
        .iter()
        .map(|p| p.as_ref().is_some_and(|p| scanner.in_band_profile(p)))
        .collect();
    let rho_coarse: Vec<f64> = profiles
        .iter()
        .map(|p| p.as_ref().and_then(|p| p.at(coarse)).unwrap_or(0.0))
        .collect();
    let mut candidates = Vec::new();
    for (i, p) in profiles.iter().enumerate() {
        let Some(p) = p else { continue };
        let e = cfg.edge_eps;
        let direct_hit = p.is_complete() && {
            let (w, w10) = (p.weight_at(e).unwrap(), p.weight_at(10.0 * e).unwrap());
            w > cfg.mass_floor && (0.9..=1.1).contains(&(w / w10))
        };
        let left = if i > 0 {
            rho_coarse[i - 1]
        } else {
            f64::NEG_INFINITY
        };
        let right = rho_coarse.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
        let peak = !band_at[i]
            && rho_coarse[i] >= left
            && rho_coarse[i] >= right
            && std::f64::consts::PI * coarse * rho_coarse[i] > 1e-4;
        if direct_hit || peak {
            candidates.push(xs[i]);
        }
    }
    let found: Vec<Option<(f64, f64)>> = candidates
        .par_iter()
        .map(|&x| scanner.zoom_mass(x, step).ok().flatten())
        .collect();
    let mut masses: Vec<(f64, f64)> = Vec::new();
    for (x0, w) in found.into_iter().flatten() {
        if !masses.iter().any(|&(y, _)| (y - x0).abs() < 1e-6) {
            masses.push((x0, w));
        }
    }
    masses.sort_by(|a, b| a.0.total_cmp(&b.0));

    // bands, with grid points at an atom excluded
    let band_at: Vec<bool> = xs
        .iter()
        .zip(&band_at)
        .map(|(&x, &b)| b && !masses.iter().any(|&(x0, _)| (x - x0).abs() < 1e-8))
        .collect();
    let mut bands = Vec::new();
    let mut i = 0;
    while i < n {
        if !band_at[i] {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < n && band_at[j + 1] {
            j += 1;
        }
        let lower = if i == 0 {
            xs[0]
        } else {
            scanner.bisect(xs[i], xs[i - 1], &masses)?
        };
        let upper = if j == n - 1 {
            xs[n - 1]
        } else {
            scanner.bisect(xs[j], xs[j + 1], &masses)?
        };
        bands.push((lower, upper));
        i = j + 1;
    }

    Ok(SpectrumReport::new(bands, masses, grid))
}

/// Density on an evenly spaced grid without band or atom analysis. With one
/// broadening the density is reported at it; with more, the two smallest
/// are extrapolated to zero. Points where the solver fails carry `NaN`.
pub fn density_grid(
    sys: &HalfTreeSystem,
    range: (f64, f64),
    resolution: usize,
    eps: &[f64],
) -> Result<Vec<ScanPoint>> {
    let (lo, hi) = range;
    if resolution < 2 || !(lo <= hi) {
        return Err(Error::Precondition(
            "density grid needs lo <= hi and two points".into(),
        ));
    }
    if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Precondition("broadenings must be positive".into()));
    }
    let mut sched = eps.to_vec();
    sched.sort_by(|a, b| b.total_cmp(a));
    sched.dedup();
    let smallest = sched[sched.len() - 1];
    let mut ladder = decade_ladder(1.0, smallest);
    ladder.extend(sched.iter().copied());
    ladder.sort_by(|a, b| b.total_cmp(a));
    ladder.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * *b);
    let step = (hi - lo) / (resolution - 1) as f64;
    let xs: Vec<f64> = (0..resolution).map(|i| lo + step * i as f64).collect();
    Ok(xs
        .par_iter()
        .map(|&x| {
            let density = sys
                .solve_ladder(x, &ladder)
                .ok()
                .map(|path| {
                    let rho_at = |e: f64| {
                        let k = ladder
                            .iter()
                            .position(|&l| (l - e).abs() <= 1e-9 * e)
                            .unwrap();
                        sys.density(&path[k])
                    };
                    if sched.len() == 1 {
                        rho_at(smallest)
                    } else {
                        let (e1, e2) = (sched[sched.len() - 2], smallest);
                        let (r1, r2) = (rho_at(e1), rho_at(e2));
                        r2 - e2 * (r1 - r2) / (e1 - e2)
                    }
                })
                .unwrap_or(f64::NAN);
            ScanPoint {
                x,
                density,
                eps_used: smallest,
            }
        })
        .collect())
}
