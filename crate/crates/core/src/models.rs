//! Built-in base graphs.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, JacobiParams};

/// A named base graph with its default Jacobi parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// Two vertices joined by `d` parallel edges, `a ≡ 1`, `b ≡ 0`. Covered
    /// by the homogeneous tree of degree `d`.
    Free(usize),
    /// Complete bipartite graph with `r` red and `g` green vertices.
    Rg(usize, usize),
    /// Two vertices, three parallel edges, potentials `+b` and `-b`.
    AlternatingB(f64),
    /// The 3-cube.
    Cube,
    Petersen,
    /// Complete graph on `n` vertices.
    Complete(usize),
}

impl Model {
    pub fn build(&self) -> Result<(FiniteGraph, JacobiParams)> {
        match *self {
            Model::Free(d) => {
                if d < 2 {
                    return Err(Error::Precondition(format!("free:{d} needs d >= 2")));
                }
                let g = two_vertex(d)?;
                let params = JacobiParams::unit(&g);
                Ok((g, params))
            }
            Model::AlternatingB(b) => {
                let g = two_vertex(3)?;
                // sorted ids: "minus" < "plus"
                let params = JacobiParams::new(&g, vec![1.0; 3], vec![-b, b])?;
                Ok((g, params))
            }
            Model::Rg(r, gr) => {
                let mut edges = Vec::new();
                for i in 0..r {
                    for j in 0..gr {
                        edges.push((format!("e{i:03}_{j:03}"), red_id(i), green_id(j)));
                    }
                }
                let vertices = (0..r).map(red_id).chain((0..gr).map(green_id));
                let g = FiniteGraph::new(vertices, edges)?;
                let params = JacobiParams::unit(&g);
                Ok((g, params))
            }
            Model::Cube => {
                let mut edges = Vec::new();
                for x in 0..8u32 {
                    for bit in 0..3 {
                        let y = x ^ (1 << bit);
                        if x < y {
                            edges.push((format!("e{x}{y}"), cube_id(x), cube_id(y)));
                        }
                    }
                }
                let g = FiniteGraph::new((0..8).map(cube_id), edges)?;
                let params = JacobiParams::unit(&g);
                Ok((g, params))
            }
            Model::Petersen => {
                let mut pairs = Vec::new();
                for i in 0..5 {
                    pairs.push((i, (i + 1) % 5));
                    pairs.push((i, i + 5));
                    pairs.push((i + 5, (i + 2) % 5 + 5));
                }
                let edges = pairs
                    .into_iter()
                    .map(|(x, y)| (format!("e{x}_{y}"), format!("v{x}"), format!("v{y}")));
                let g = FiniteGraph::new((0..10).map(|i| format!("v{i}")), edges)?;
                let params = JacobiParams::unit(&g);
                Ok((g, params))
            }
            Model::Complete(n) => {
                let mut edges = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        edges.push((
                            format!("e{i:03}_{j:03}"),
                            format!("v{i:03}"),
                            format!("v{j:03}"),
                        ));
                    }
                }
                let g = FiniteGraph::new((0..n).map(|i| format!("v{i:03}")), edges)?;
                let params = JacobiParams::unit(&g);
                Ok((g, params))
            }
        }
    }
}

pub fn red_id(i: usize) -> String {
    format!("r{i:03}")
}

pub fn green_id(j: usize) -> String {
    format!("g{j:03}")
}

fn cube_id(x: u32) -> String {
    format!("q{x:03b}")
}

fn two_vertex(d: usize) -> Result<FiniteGraph> {
    let edges = (0..d).map(|k| (format!("e{k:03}"), "minus".to_string(), "plus".to_string()));
    FiniteGraph::new(["minus", "plus"], edges)
}

impl FromStr for Model {
    type Err = Error;

    /// `free:d`, `rg:r,g`, `altb:b`, `cube`, `petersen`, `complete:n`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Precondition(format!("unknown model `{s}`"));
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let int = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        match name {
            "free" => Ok(Model::Free(int(args)?)),
            "rg" => {
                let (r, g) = args.split_once(',').ok_or_else(bad)?;
                Ok(Model::Rg(int(r)?, int(g)?))
            }
            "altb" => Ok(Model::AlternatingB(
                args.trim().parse::<f64>().map_err(|_| bad())?,
            )),
            "cube" if args.is_empty() => Ok(Model::Cube),
            "petersen" if args.is_empty() => Ok(Model::Petersen),
            "complete" => Ok(Model::Complete(int(args)?)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Free(d) => write!(f, "free:{d}"),
            Model::Rg(r, g) => write!(f, "rg:{r},{g}"),
            Model::AlternatingB(b) => write!(f, "altb:{b}"),
            Model::Cube => write!(f, "cube"),
            Model::Petersen => write!(f, "petersen"),
            Model::Complete(n) => write!(f, "complete:{n}"),
        }
    }
}
