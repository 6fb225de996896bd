use jacobi_tree::cover::{build_ball_with_budget, lanczos_top};
use jacobi_tree::gap::{self, closed_form_gap, gap_minus_quantities, gap_quantities, Reference};
use jacobi_tree::graph::{FiniteGraph, JacobiParams};
use jacobi_tree::mfunction::{density_grid, spectrum_scan, HalfTreeSystem, ScanConfig, ScanPoint};
use jacobi_tree::rgmodel;
use jacobi_tree::spectral::{perron as perron_pair, perron_minus};
use num_complex::Complex64;

use crate::report::{Format, Table};
use crate::CliError;

type Tables = Result<Vec<Table>, CliError>;

pub fn validate(g: &FiniteGraph, params: &JacobiParams) -> Vec<Table> {
    let mut t = Table::keyed("graph");
    t.kv("vertices", g.p())
        .kv("edges", g.q())
        .kv("independent cycles", g.cycle_rank())
        .kv("bipartite", g.bipartition().is_bipartite());
    match g.regular_degree() {
        Some(d) => t.kv("regular degree", d),
        None => t.kv("regular degree", "-"),
    };
    t.kv(
        "unit parameters",
        params.a.iter().all(|&a| a == 1.0) && params.b.iter().all(|&b| b == 0.0),
    );
    vec![t]
}

pub fn perron(g: &FiniteGraph, params: &JacobiParams) -> Tables {
    let pp = perron_pair(g, params)?;
    let minus = if g.bipartition().is_bipartite() {
        Some(perron_minus(g, params)?)
    } else {
        None
    };
    let mut summary = Table::keyed("perron");
    summary.kv("sigma", pp.sigma);
    if let Some(m) = &minus {
        summary.kv("sigma_minus", m.sigma_minus);
    }
    let cols: &[&str] = if minus.is_some() {
        &["vertex", "psi", "psi_minus"]
    } else {
        &["vertex", "psi"]
    };
    let mut vt = Table::new("eigenvectors", cols);
    for (v, id) in g.vertices().iter().enumerate() {
        let mut row = vec![id.as_str().into(), pp.psi[v].into()];
        if let Some(m) = &minus {
            row.push(m.psi_minus[v].into());
        }
        vt.row(row);
    }
    Ok(vec![summary, vt])
}

fn grid_table(grid: &[ScanPoint]) -> Table {
    let mut t = Table::new("density", &["x", "density", "eps_used"]);
    for p in grid {
        t.row(vec![p.x.into(), p.density.into(), p.eps_used.into()]);
    }
    t
}

pub fn spectrum(
    g: &FiniteGraph,
    params: &JacobiParams,
    cfg: &ScanConfig,
    format: Format,
) -> Tables {
    let rep = spectrum_scan(g, params, cfg)?;
    if format == Format::Csv {
        return Ok(vec![grid_table(&rep.grid)]);
    }
    let mut summary = Table::keyed("spectrum");
    summary
        .kv("sigma_top", rep.sigma_top)
        .kv("sigma_bottom", rep.sigma_bottom)
        .kv("edge tolerance", cfg.bisection_tol);
    let mut bands = Table::new("bands", &["lower", "upper"]);
    for &(lo, hi) in &rep.bands {
        bands.row(vec![lo.into(), hi.into()]);
    }
    let mut masses = Table::new("point masses", &["energy", "weight"]);
    for &(x, w) in &rep.point_masses {
        masses.row(vec![x.into(), w.into()]);
    }
    Ok(vec![summary, bands, masses])
}

pub fn gap_report(g: &FiniteGraph, params: &JacobiParams, cfg: &ScanConfig) -> Tables {
    let rep = gap::gap_report(g, params, cfg)?;
    let mut t = Table::keyed("gap");
    t.kv("sigma", rep.sigma)
        .kv("sigma_top", rep.sigma_top)
        .kv("gap", rep.gap);
    if let Some(m) = rep.minus {
        t.kv("sigma_minus", m.sigma_minus)
            .kv("sigma_bottom", m.sigma_bottom)
            .kv("gap_minus", m.gap_minus);
    }
    t.kv("tolerance", rep.tolerance);
    Ok(vec![t])
}

pub struct BoundsOptions {
    pub reference: Option<f64>,
    pub minus: bool,
    pub check: bool,
    pub scan: ScanConfig,
}

pub fn gap_bounds(
    g: &FiniteGraph,
    params: &JacobiParams,
    tilde: &JacobiParams,
    opts: &BoundsOptions,
) -> Tables {
    // the lower gap of (ã, b̃) is the upper gap of (ã, -b̃)
    let shifted = if opts.minus {
        tilde.negate_b()
    } else {
        tilde.clone()
    };
    let (reference, source) = match (opts.reference, closed_form_gap(g, &shifted)) {
        (Some(x), _) => (Reference::Given(x), "given"),
        (None, Some(x)) => (Reference::Given(x), "closed form"),
        (None, None) => (Reference::Scan(opts.scan.clone()), "scan"),
    };
    let b = if opts.minus {
        gap_minus_quantities(g, params, tilde, &reference)?
    } else {
        gap_quantities(g, params, tilde, &reference)?
    };
    let mut t = Table::keyed(if opts.minus {
        "lower gap bounds"
    } else {
        "gap bounds"
    });
    t.kv("S", b.s)
        .kv("I", b.i)
        .kv("S_tilde", b.s_tilde)
        .kv("I_tilde", b.i_tilde)
        .kv("reference gap", b.reference_gap)
        .kv("reference source", source)
        .kv("lower", b.lower)
        .kv("upper", b.upper);
    if opts.check {
        let rep = gap::gap_report(g, params, &opts.scan)?;
        let est = if opts.minus {
            rep.minus
                .map(|m| m.gap_minus)
                .expect("bipartite checked above")
        } else {
            rep.gap
        };
        let slack = rep.tolerance;
        t.kv("estimated gap", est).kv(
            "within bounds",
            b.lower - slack <= est && est <= b.upper + slack,
        );
    }
    Ok(vec![t])
}

pub fn green(g: &FiniteGraph, params: &JacobiParams, z: Complex64, vertex: Option<&str>) -> Tables {
    let sys = HalfTreeSystem::new(g, params)?;
    let mv = sys.solve(z)?;
    let all = sys.green_all(&mv);
    let picked: Vec<usize> = match vertex {
        Some(id) => vec![g
            .vertex_index(id)
            .ok_or_else(|| CliError::Input(format!("unknown vertex `{id}`")))?],
        None => (0..g.p()).collect(),
    };
    let mut t = Table::new("green", &["vertex", "re", "im"]);
    for v in picked {
        t.row(vec![
            g.vertices()[v].as_str().into(),
            all[v].re.into(),
            all[v].im.into(),
        ]);
    }
    Ok(vec![t])
}

pub fn dos(
    g: &FiniteGraph,
    params: &JacobiParams,
    range: Option<(f64, f64)>,
    resolution: usize,
    eps: &[f64],
) -> Tables {
    let sys = HalfTreeSystem::new(g, params)?;
    let sigma = sys.sigma();
    let range = range.unwrap_or((-sigma - 1.0, sigma + 1.0));
    Ok(vec![grid_table(&density_grid(
        &sys, range, resolution, eps,
    )?)])
}

pub fn rg_verify(r: usize, g: usize, depth: usize, hu_depth: usize) -> Tables {
    let (partial, limit) = rgmodel::u_norm_sq(r, g, depth)?;
    let geometric = rgmodel::u_norm_sq_geometric(r, g, depth);
    let hu = rgmodel::verify_hu_zero(r, g, hu_depth)?;
    let (residue, expected) = rgmodel::residue_check(r, g)?;
    let weight = rgmodel::dos_zero_weight(r, g)?;
    let mut t = Table::keyed(&format!("rg({r},{g}) zero-energy eigenfunction"));
    t.kv("norm limit", limit)
        .kv("norm partial sum", partial)
        .kv("geometric partial sum", geometric)
        .kv("partial sum error", (partial - geometric).abs())
        .kv("max |Hu|", hu)
        .kv("residue", residue)
        .kv("expected residue", expected)
        .kv("weight at 0", weight)
        .kv("expected weight", (r - g) as f64 / (r + g) as f64);
    Ok(vec![t])
}

pub fn ball_eig(
    g: &FiniteGraph,
    params: &JacobiParams,
    radius: usize,
    base: Option<&str>,
    budget: usize,
) -> Tables {
    let root = match base {
        Some(id) => g
            .vertex_index(id)
            .ok_or_else(|| CliError::Input(format!("unknown vertex `{id}`")))?,
        None => 0,
    };
    let sigma = perron_pair(g, params)?.sigma;
    let mut t = Table::new(
        "ball eigenvalues",
        &["radius", "nodes", "top", "distance_to_sigma"],
    );
    for r in 0..=radius {
        let ball = build_ball_with_budget(g, params, root, r, budget)?;
        let top = lanczos_top(&ball);
        t.row(vec![
            r.into(),
            ball.len().into(),
            top.into(),
            (sigma - top).into(),
        ]);
    }
    Ok(vec![t])
}
