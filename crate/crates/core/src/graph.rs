//! Weighted undirected graphs, connected components and the normalized
//! propagation operators built from them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Largest node count for which dense N×N operators are materialized.
pub const MAX_DENSE_NODES: usize = 4096;

/// An undirected edge stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Counters gathered while normalizing a raw edge list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeStats {
    pub rows: usize,
    pub duplicates_merged: usize,
    pub self_loops_dropped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    features: Option<Array2<f64>>,
}

impl Graph {
    /// Builds a graph from raw `(u, v, w)` triples. Reversed and repeated
    /// pairs are merged by summing weights; self-loops are dropped because
    /// normalization adds its own.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        Self::from_edges_with_stats(n, edges).map(|(g, _)| g)
    }

    pub fn from_edges_with_stats<I>(n: usize, edges: I) -> Result<(Self, EdgeStats)>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut stats = EdgeStats::default();
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (u, v, w) in edges {
            stats.rows += 1;
            if u >= n || v >= n {
                return Err(Error::Domain(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            check_weight(w)?;
            if u == v {
                stats.self_loops_dropped += 1;
                continue;
            }
            let key = (u.min(v), u.max(v));
            match merged.get_mut(&key) {
                Some(acc) => {
                    *acc += w;
                    stats.duplicates_merged += 1;
                }
                None => {
                    merged.insert(key, w);
                }
            }
        }
        let edges = merged
            .into_iter()
            .map(|((u, v), w)| Edge { u, v, w })
            .collect();
        Ok((Graph { n, edges, features: None }, stats))
    }

    pub fn with_features(mut self, features: Array2<f64>) -> Result<Self> {
        if features.nrows() != self.n {
            return Err(Error::Shape(format!(
                "feature matrix has {} rows but the graph has {} nodes",
                features.nrows(),
                self.n
            )));
        }
        self.features = Some(features);
        Ok(self)
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn features(&self) -> Option<&Array2<f64>> {
        self.features.as_ref()
    }

    /// The same node set and features, restricted to the given edges.
    pub fn with_edge_subset(&self, keep: &[usize]) -> Graph {
        let mut idx = keep.to_vec();
        idx.sort_unstable();
        idx.dedup();
        Graph {
            n: self.n,
            edges: idx.into_iter().map(|i| self.edges[i]).collect(),
            features: self.features.clone(),
        }
    }

    pub fn degrees(&self) -> DegreeView {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            d[e.u] += e.w;
            d[e.v] += e.w;
        }
        DegreeView { d }
    }

    pub fn check_dense_capacity(&self) -> Result<()> {
        if self.n > MAX_DENSE_NODES {
            return Err(Error::Capacity {
                n: self.n,
                limit: MAX_DENSE_NODES,
            });
        }
        Ok(())
    }

    pub fn adjacency(&self) -> Result<Array2<f64>> {
        self.check_dense_capacity()?;
        let mut a = Array2::zeros((self.n, self.n));
        for e in &self.edges {
            a[(e.u, e.v)] = e.w;
            a[(e.v, e.u)] = e.w;
        }
        Ok(a)
    }
}

fn check_weight(w: f64) -> Result<()> {
    if !w.is_finite() {
        return Err(Error::Domain(format!("edge weight {w} is not finite")));
    }
    if w < 0.0 {
        return Err(Error::Domain(format!("negative edge weight {w}")));
    }
    if w == 0.0 {
        return Err(Error::Domain("zero-weight edge".into()));
    }
    Ok(())
}

/// Weighted degrees (row sums of A).
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeView {
    pub d: Vec<f64>,
}

impl DegreeView {
    pub fn is_isolated(&self, i: usize) -> bool {
        self.d[i] == 0.0
    }

    pub fn any_isolated(&self) -> bool {
        self.d.iter().any(|&x| x == 0.0)
    }

    /// Diagonal of D + c·I.
    pub fn augmented(&self, c: f64) -> Vec<f64> {
        self.d.iter().map(|&x| x + c).collect()
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
            sets: n,
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true if the two elements were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.sets -= 1;
        true
    }

    pub fn sets(&self) -> usize {
        self.sets
    }
}

/// Component label per node, numbered in order of each component's
/// smallest node id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub labels: Vec<usize>,
    pub m_components: usize,
}

impl ComponentLabeling {
    pub fn members(&self, m: usize) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, &l)| l == m)
            .map(|(i, _)| i)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.m_components];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    /// Indicator vector u_m of component `m`.
    pub fn indicator(&self, m: usize) -> Array1<f64> {
        self.labels
            .iter()
            .map(|&l| if l == m { 1.0 } else { 0.0 })
            .collect()
    }
}

pub fn connected_components(g: &Graph) -> ComponentLabeling {
    components_of_edges(g.n_nodes(), g.edges().iter().map(|e| (e.u, e.v)))
}

pub(crate) fn components_of_edges<I>(n: usize, edges: I) -> ComponentLabeling
where
    I: IntoIterator<Item = (usize, usize)>,
{
    let mut uf = UnionFind::new(n);
    for (u, v) in edges {
        uf.union(u, v);
    }
    let mut root_label: Vec<Option<usize>> = vec![None; n];
    let mut labels = vec![0; n];
    let mut next = 0;
    for (i, label) in labels.iter_mut().enumerate() {
        let r = uf.find(i);
        *label = *root_label[r].get_or_insert_with(|| {
            next += 1;
            next - 1
        });
    }
    ComponentLabeling {
        labels,
        m_components: next,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Normalization {
    /// (D + I)^{-1/2} (A + I) (D + I)^{-1/2}
    AugNormAdj,
    /// I + D^{-1/2} A D^{-1/2}
    FirstOrderGcn,
    /// I + (D + I)^{-1/2} (A + I) (D + I)^{-1/2}
    BingGeNormAdj,
    /// (D + I)^{-1} (A + I)
    AugRWalk,
}

impl Normalization {
    pub fn is_symmetric(self) -> bool {
        !matches!(self, Normalization::AugRWalk)
    }

    pub fn name(self) -> &'static str {
        match self {
            Normalization::AugNormAdj => "AugNormAdj",
            Normalization::FirstOrderGcn => "FirstOrderGCN",
            Normalization::BingGeNormAdj => "BingGeNormAdj",
            Normalization::AugRWalk => "AugRWalk",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "augnormadj" => Ok(Normalization::AugNormAdj),
            "firstordergcn" => Ok(Normalization::FirstOrderGcn),
            "binggenormadj" => Ok(Normalization::BingGeNormAdj),
            "augrwalk" => Ok(Normalization::AugRWalk),
            _ => Err(Error::Domain(format!("unknown normalization {s:?}"))),
        }
    }
}

/// A dense N×N propagation operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub variant: Normalization,
    pub drop_rate: f64,
    pub matrix: Array2<f64>,
    pub symmetric: bool,
    /// Diagonal of D_p = D + I/(1-p) for the augmented variants; empty
    /// for FirstOrderGCN.
    pub aug_degrees: Vec<f64>,
}

impl Propagator {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Self-loop weight I/(1-p) used by the DropEdge re-normalization.
pub fn self_loop_weight(p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        1.0 / (1.0 - p)
    }
}

pub fn build_propagator(g: &Graph, variant: Normalization, p: f64) -> Result<Propagator> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!("drop rate p = {p} must lie in [0, 1)")));
    }
    if p > 0.0 && variant != Normalization::AugNormAdj {
        return Err(Error::Unsupported(format!(
            "drop rate p > 0 is only defined for AugNormAdj, not {variant}"
        )));
    }
    g.check_dense_capacity()?;

    let n = g.n_nodes();
    let degrees = g.degrees();
    let (matrix, aug_degrees) = match variant {
        Normalization::AugNormAdj | Normalization::BingGeNormAdj => {
            let c = self_loop_weight(p);
            let dp = degrees.augmented(c);
            let s: Vec<f64> = dp.iter().map(|&x| 1.0 / x.sqrt()).collect();
            let mut m = Array2::zeros((n, n));
            for i in 0..n {
                m[(i, i)] = (s[i] * c) * s[i];
            }
            for e in g.edges() {
                // one product for both triangles keeps the matrix exactly symmetric
                let x = (s[e.u] * e.w) * s[e.v];
                m[(e.u, e.v)] = x;
                m[(e.v, e.u)] = x;
            }
            if variant == Normalization::BingGeNormAdj {
                m.diag_mut().mapv_inplace(|x| x + 1.0);
            }
            (m, dp)
        }
        Normalization::FirstOrderGcn => {
            if let Some(i) = (0..n).find(|&i| degrees.is_isolated(i)) {
                return Err(Error::Unsupported(format!(
                    "FirstOrderGCN needs every degree to be positive; node {i} is isolated"
                )));
            }
            let s: Vec<f64> = degrees.d.iter().map(|&x| 1.0 / x.sqrt()).collect();
            let mut m = Array2::eye(n);
            for e in g.edges() {
                // one product for both triangles keeps the matrix exactly symmetric
                let x = (s[e.u] * e.w) * s[e.v];
                m[(e.u, e.v)] = x;
                m[(e.v, e.u)] = x;
            }
            (m, Vec::new())
        }
        Normalization::AugRWalk => {
            let dp = degrees.augmented(1.0);
            let mut m = Array2::zeros((n, n));
            for i in 0..n {
                m[(i, i)] = 1.0 / dp[i];
            }
            for e in g.edges() {
                m[(e.u, e.v)] = e.w / dp[e.u];
                m[(e.v, e.u)] = e.w / dp[e.v];
            }
            (m, dp)
        }
    };

    Ok(Propagator {
        variant,
        drop_rate: p,
        matrix,
        symmetric: variant.is_symmetric(),
        aug_degrees,
    })
}
