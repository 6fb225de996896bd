//! Finite leafless multigraphs carrying Jacobi parameters.
//!
//! Vertices and edges are identified by string ids. Internally both are
//! stored in lexicographic id order, so matrix assembly is deterministic no
//! matter how the input was written down.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result, ValidationError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub u: usize,
    pub v: usize,
}

impl Edge {
    /// The endpoint opposite to `x`. `x` must be one of the endpoints.
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// Connected, leafless, loop-free multigraph. Parallel edges are kept
/// distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    incidence: Vec<Vec<usize>>,
}

impl FiniteGraph {
    /// Builds and validates a graph from vertex ids and `(edge id, u, v)`
    /// triples.
    pub fn new<V, E>(vertices: V, edges: E) -> Result<Self>
    where
        V: IntoIterator,
        V::Item: Into<String>,
        E: IntoIterator<Item = (String, String, String)>,
    {
        let g = Self::build(vertices, edges)?;
        g.validate()?;
        Ok(g)
    }

    fn build<V, E>(vertices: V, edges: E) -> Result<Self>
    where
        V: IntoIterator,
        V::Item: Into<String>,
        E: IntoIterator<Item = (String, String, String)>,
    {
        let mut vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        vertices.sort();
        if let Some(w) = vertices.windows(2).find(|w| w[0] == w[1]) {
            return Err(ValidationError::DuplicateId {
                kind: "vertex",
                id: w[0].clone(),
            }
            .into());
        }
        let index: HashMap<&str, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();

        let mut raw: Vec<(String, String, String)> = edges.into_iter().collect();
        raw.sort_by(|x, y| x.0.cmp(&y.0));
        if let Some(w) = raw.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(ValidationError::DuplicateId {
                kind: "edge",
                id: w[0].0.clone(),
            }
            .into());
        }
        let mut out = Vec::with_capacity(raw.len());
        for (id, u, v) in raw {
            let lookup = |name: &String| {
                index
                    .get(name.as_str())
                    .copied()
                    .ok_or_else(|| ValidationError::UnknownVertex {
                        edge: id.clone(),
                        vertex: name.clone(),
                    })
            };
            let (ui, vi) = (lookup(&u)?, lookup(&v)?);
            out.push(Edge { id, u: ui, v: vi });
        }
        let mut incidence = vec![Vec::new(); vertices.len()];
        for (k, e) in out.iter().enumerate() {
            incidence[e.u].push(k);
            if e.v != e.u {
                incidence[e.v].push(k);
            }
        }
        Ok(FiniteGraph {
            vertices,
            edges: out,
            incidence,
        })
    }

    /// Same as [`FiniteGraph::new`] without the structural checks. Only for
    /// exercising assembly on data the validator would reject.
    #[doc(hidden)]
    pub fn new_unchecked<V, E>(vertices: V, edges: E) -> Result<Self>
    where
        V: IntoIterator,
        V::Item: Into<String>,
        E: IntoIterator<Item = (String, String, String)>,
    {
        Self::build(vertices, edges)
    }

    fn validate(&self) -> std::result::Result<(), ValidationError> {
        if self.vertices.is_empty() {
            return Err(ValidationError::NoVertices);
        }
        if let Some(e) = self.edges.iter().find(|e| e.u == e.v) {
            return Err(ValidationError::SelfLoop(e.id.clone()));
        }
        for (i, inc) in self.incidence.iter().enumerate() {
            if inc.len() < 2 {
                return Err(ValidationError::Leaf {
                    vertex: self.vertices[i].clone(),
                    degree: inc.len(),
                });
            }
        }
        let dist = self.bfs_order();
        if let Some(i) = dist.iter().position(|d| d.is_none()) {
            return Err(ValidationError::Disconnected(
                self.vertices[i].clone(),
                self.vertices[0].clone(),
            ));
        }
        Ok(())
    }

    /// BFS depth of every vertex from vertex 0 (`None` when unreachable).
    fn bfs_order(&self) -> Vec<Option<usize>> {
        let mut depth = vec![None; self.p()];
        let mut queue = VecDeque::from([0usize]);
        depth[0] = Some(0);
        while let Some(x) = queue.pop_front() {
            let dx = depth[x].unwrap_or(0);
            for &e in &self.incidence[x] {
                let y = self.edges[e].other(x);
                if depth[y].is_none() {
                    depth[y] = Some(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        depth
    }

    /// Number of vertices.
    pub fn p(&self) -> usize {
        self.vertices.len()
    }

    /// Number of edges, parallel edges counted separately.
    pub fn q(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.as_str().cmp(id)).ok()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.binary_search_by(|e| e.id.as_str().cmp(id)).ok()
    }

    /// Edge indices incident to vertex `v`.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    /// `Some(d)` when every vertex has degree `d`.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.degree(0);
        (0..self.p()).all(|v| self.degree(v) == d).then_some(d)
    }

    /// Rank of the fundamental group, `q - p + 1`.
    pub fn cycle_rank(&self) -> usize {
        self.q() + 1 - self.p()
    }

    /// Deterministic 2-coloring: BFS from the lexicographically smallest
    /// vertex, which gets color 1.
    pub fn bipartition(&self) -> Bipartition {
        let mut color = vec![0u8; self.p()];
        color[0] = 1;
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &e in &self.incidence[x] {
                let y = self.edges[e].other(x);
                if color[y] == 0 {
                    color[y] = 3 - color[x];
                    queue.push_back(y);
                } else if color[y] == color[x] {
                    return Bipartition::NotBipartite;
                }
            }
        }
        Bipartition::Bipartite(color)
    }
}

/// Result of a 2-coloring attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bipartition {
    /// Color (1 or 2) per vertex index.
    Bipartite(Vec<u8>),
    NotBipartite,
}

impl Bipartition {
    pub fn is_bipartite(&self) -> bool {
        matches!(self, Bipartition::Bipartite(_))
    }

    /// Diagonal of the unitary `U`: +1 on color 1, -1 on color 2.
    pub fn signs(&self) -> Option<Vec<f64>> {
        match self {
            Bipartition::Bipartite(c) => {
                Some(c.iter().map(|&k| if k == 1 { 1.0 } else { -1.0 }).collect())
            }
            Bipartition::NotBipartite => None,
        }
    }
}

/// Edge weights `a` (indexed like `FiniteGraph::edges`) and vertex
/// potentials `b` (indexed like `FiniteGraph::vertices`).
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiParams {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl JacobiParams {
    /// Checks lengths, finiteness and positivity of `a` against `g`.
    pub fn new(g: &FiniteGraph, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != g.q() {
            let missing = g.edges().get(a.len()).map(|e| e.id.clone());
            return Err(ValidationError::MissingParameter {
                kind: "edge",
                id: missing.unwrap_or_else(|| format!("#{}", a.len())),
            }
            .into());
        }
        if b.len() != g.p() {
            let missing = g.vertices().get(b.len()).cloned();
            return Err(ValidationError::MissingParameter {
                kind: "vertex",
                id: missing.unwrap_or_else(|| format!("#{}", b.len())),
            }
            .into());
        }
        for (e, &w) in g.edges().iter().zip(&a) {
            if !w.is_finite() {
                return Err(ValidationError::NonFinite(e.id.clone()).into());
            }
            if w <= 0.0 {
                return Err(ValidationError::NonPositiveWeight {
                    edge: e.id.clone(),
                    a: w,
                }
                .into());
            }
        }
        if let Some((v, _)) = g.vertices().iter().zip(&b).find(|(_, x)| !x.is_finite()) {
            return Err(ValidationError::NonFinite(v.clone()).into());
        }
        Ok(JacobiParams { a, b })
    }

    /// `a ≡ 1`, `b ≡ 0`: the free Laplacian-type comparison operator.
    pub fn unit(g: &FiniteGraph) -> Self {
        JacobiParams {
            a: vec![1.0; g.q()],
            b: vec![0.0; g.p()],
        }
    }

    /// `(a, b) -> (a, -b)`.
    pub fn negate_b(&self) -> Self {
        JacobiParams {
            a: self.a.clone(),
            b: self.b.iter().map(|x| -x).collect(),
        }
    }
}

/// Symmetric `p×p` matrix with `b` on the diagonal and, for every vertex
/// pair, the sum of `a` over the parallel edges joining them.
pub fn assemble_jacobi(g: &FiniteGraph, params: &JacobiParams) -> DMatrix<f64> {
    let p = g.p();
    let mut m = DMatrix::zeros(p, p);
    for (i, &bi) in params.b.iter().enumerate() {
        m[(i, i)] = bi;
    }
    for (e, &w) in g.edges().iter().zip(&params.a) {
        m[(e.u, e.v)] += w;
        if e.u != e.v {
            m[(e.v, e.u)] += w;
        }
    }
    m
}

fn parse_float(token: &str, key: &str, line: usize) -> Result<f64> {
    let value = token.strip_prefix(key).and_then(|s| s.strip_prefix('='));
    let value = value.ok_or_else(|| Error::Parse {
        line,
        message: format!("expected `{key}=<float>`, found `{token}`"),
    })?;
    value.parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("`{value}` is not a number"),
    })
}

/// Parses the line-based graph format:
///
/// ```text
/// # comment
/// vertex <id> b=<float>
/// edge <id> <u-id> <v-id> a=<float>
/// ```
pub fn parse_graph(text: &str) -> Result<(FiniteGraph, JacobiParams)> {
    let mut vertices: Vec<(String, f64)> = Vec::new();
    let mut edges: Vec<(String, String, String, f64)> = Vec::new();
    let mut seen_v = HashSet::new();
    let mut seen_e = HashSet::new();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            ["vertex", id, b] => {
                if !seen_v.insert(id.to_string()) {
                    return Err(ValidationError::DuplicateId {
                        kind: "vertex",
                        id: id.to_string(),
                    }
                    .into());
                }
                vertices.push((id.to_string(), parse_float(b, "b", line)?));
            }
            ["edge", id, u, v, a] => {
                if !seen_e.insert(id.to_string()) {
                    return Err(ValidationError::DuplicateId {
                        kind: "edge",
                        id: id.to_string(),
                    }
                    .into());
                }
                edges.push((
                    id.to_string(),
                    u.to_string(),
                    v.to_string(),
                    parse_float(a, "a", line)?,
                ));
            }
            ["vertex", ..] => {
                return Err(Error::Parse {
                    line,
                    message: "expected `vertex <id> b=<float>`".into(),
                })
            }
            ["edge", ..] => {
                return Err(Error::Parse {
                    line,
                    message: "expected `edge <id> <u-id> <v-id> a=<float>`".into(),
                })
            }
            [other, ..] => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown declaration `{other}`"),
                })
            }
        }
    }

    let g = FiniteGraph::new(
        vertices.iter().map(|(id, _)| id.clone()),
        edges
            .iter()
            .map(|(id, u, v, _)| (id.clone(), u.clone(), v.clone())),
    )?;
    let b_of: HashMap<&str, f64> = vertices.iter().map(|(id, b)| (id.as_str(), *b)).collect();
    let a_of: HashMap<&str, f64> = edges.iter().map(|(id, .., a)| (id.as_str(), *a)).collect();
    let a = g.edges().iter().map(|e| a_of[e.id.as_str()]).collect();
    let b = g.vertices().iter().map(|v| b_of[v.as_str()]).collect();
    let params = JacobiParams::new(&g, a, b)?;
    Ok((g, params))
}

/// Writes `g` and `params` back in the format read by [`parse_graph`].
/// Floats use the shortest representation that round-trips exactly.
pub fn serialize_graph(g: &FiniteGraph, params: &JacobiParams) -> String {
    let mut out = String::new();
    for (v, b) in g.vertices().iter().zip(&params.b) {
        let _ = writeln!(out, "vertex {v} b={b:?}");
    }
    for (e, a) in g.edges().iter().zip(&params.a) {
        let _ = writeln!(
            out,
            "edge {} {} {} a={a:?}",
            e.id,
            g.vertices()[e.u],
            g.vertices()[e.v]
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALT: &str = "\
# two vertices, three parallel edges
vertex p b=1
vertex m b=-1
edge e1 p m a=1
edge e2 p m a=1
edge e3 m p a=1
";

    fn rg_text(r: usize, g: usize) -> String {
        let mut s = String::new();
        for i in 0..r {
            s += &format!("vertex r{i} b=0\n");
        }
        for j in 0..g {
            s += &format!("vertex g{j} b=0\n");
        }
        for i in 0..r {
            for j in 0..g {
                s += &format!("edge e{i}_{j} r{i} g{j} a=1\n");
            }
        }
        s
    }

    #[test]
    fn parses_parallel_edges() {
        let (g, params) = parse_graph(ALT).unwrap();
        assert_eq!((g.p(), g.q()), (2, 3));
        assert_eq!(g.vertices(), ["m", "p"]);
        assert_eq!(params.b, vec![-1.0, 1.0]);
        assert_eq!(g.regular_degree(), Some(3));
    }

    #[test]
    fn single_vertex_is_a_leaf() {
        let err = parse_graph("vertex x b=0\n").unwrap_err();
        assert!(matches!(
            err,
            Error::Validation(ValidationError::Leaf { degree: 0, .. })
        ));
    }

    #[test]
    fn rg_counts() {
        let (g, _) = parse_graph(&rg_text(3, 2)).unwrap();
        assert_eq!((g.p(), g.q()), (5, 6));
    }

    #[test]
    fn rejects_bad_input() {
        let cases = [
            ("vertex a b=0\nvertex b b=0\nedge e a a a=1\nedge f a b a=1\nedge g a b a=1\n", "self-loop"),
            ("vertex a b=0\nvertex b b=0\nedge e a b a=1\nedge f a b a=0\n", "nonpositive"),
            ("vertex a b=0\nvertex b b=0\nvertex c b=0\nvertex d b=0\nedge e a b a=1\nedge f a b a=1\nedge g c d a=1\nedge h c d a=1\n", "disconnected"),
            ("vertex a b=0\nvertex b b=0\nvertex c b=0\nedge e a b a=1\nedge f a b a=1\nedge g b c a=1\n", "degree 1"),
            ("vertex a b=0\nvertex a b=1\n", "duplicate"),
            ("vertex a b=0\nvertex b b=0\nedge e a z a=1\n", "unknown vertex"),
        ];
        for (text, needle) in cases {
            let msg = parse_graph(text).unwrap_err().to_string();
            assert!(msg.contains(needle), "{msg:?} should mention {needle:?}");
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_graph("vertex a b=0\n\nedge e a b a=x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_graph("node a\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn bipartition_cases() {
        let (g, _) = parse_graph(&rg_text(3, 2)).unwrap();
        let Bipartition::Bipartite(c) = g.bipartition() else {
            panic!("rg graph must be bipartite")
        };
        // sorted ids: g0 g1 r0 r1 r2; g0 gets color 1
        assert_eq!(c, vec![1, 1, 2, 2, 2]);

        let tri = "vertex a b=0\nvertex b b=0\nvertex c b=0\nedge x a b a=1\nedge y b c a=1\nedge z c a a=1\n";
        let (g, _) = parse_graph(tri).unwrap();
        assert_eq!(g.bipartition(), Bipartition::NotBipartite);

        let (g, _) = parse_graph(ALT).unwrap();
        assert_eq!(g.bipartition(), Bipartition::Bipartite(vec![1, 2]));
    }

    #[test]
    fn assembly_sums_parallel_edges() {
        let (g, params) = parse_graph(ALT).unwrap();
        let j = assemble_jacobi(&g, &params);
        assert_eq!(j.as_slice(), &[-1.0, 3.0, 3.0, 1.0]);

        let g =
            FiniteGraph::new_unchecked(["x", "y"], [("e".into(), "x".into(), "y".into())]).unwrap();
        let j = assemble_jacobi(
            &g,
            &JacobiParams {
                a: vec![2.0],
                b: vec![0.0, 0.0],
            },
        );
        assert_eq!(j.as_slice(), &[0.0, 2.0, 2.0, 0.0]);
        assert!(FiniteGraph::new(["x", "y"], [("e".into(), "x".into(), "y".into())]).is_err());
    }

    #[test]
    fn rg_matrix_has_rank_two() {
        let (g, params) = parse_graph(&rg_text(3, 2)).unwrap();
        let j = assemble_jacobi(&g, &params);
        let red = |i: usize| g.vertices()[i].starts_with('r');
        for r in 0..5 {
            for c in 0..5 {
                let expect = if red(r) != red(c) { 1.0 } else { 0.0 };
                assert_eq!(j[(r, c)], expect);
            }
        }
        assert_eq!(j.rank(1e-12), 2);
    }

    #[test]
    fn negate_b_is_an_involution() {
        let (g, params) = parse_graph(ALT).unwrap();
        assert_eq!(params.negate_b().b, vec![1.0, -1.0]);
        assert_eq!(params.negate_b().negate_b(), params);
        let zero = JacobiParams::unit(&g);
        assert_eq!(zero.negate_b().b, vec![0.0, 0.0]);
    }

    #[test]
    fn unitary_conjugation_flips_b() {
        let (g, params) = parse_graph(ALT).unwrap();
        let u = g.bipartition().signs().unwrap();
        let j = assemble_jacobi(&g, &params);
        let jm = assemble_jacobi(&g, &params.negate_b());
        for r in 0..2 {
            for c in 0..2 {
                assert!((u[r] * -j[(r, c)] * u[c] - jm[(r, c)]).abs() <= 1e-15);
            }
        }
    }
}
