//! Synthetic graphs: structure-matched stand-ins for small citation graphs
//! and the random populations used by the check suites.

use std::collections::BTreeSet;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::gaussian_matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRecipe {
    pub component_sizes: Vec<usize>,
    /// Target edges per component ≈ factor × size.
    pub intra_edge_factor: f64,
    pub feature_dim: usize,
    pub seed: u64,
}

impl SyntheticRecipe {
    /// Two components of 654 and 26 nodes, as in the small citation
    /// subgraph used for the dynamics plots.
    pub fn small_cora(seed: u64) -> Self {
        SyntheticRecipe {
            component_sizes: vec![654, 26],
            intra_edge_factor: 2.0,
            feature_dim: 16,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.component_sizes.is_empty() || self.component_sizes.contains(&0) {
            return Err(Error::Domain("need at least one component, each of size >= 1".into()));
        }
        if !(self.intra_edge_factor >= 1.0 && self.intra_edge_factor.is_finite()) {
            return Err(Error::Domain(format!(
                "intra-edge factor {} must be a finite number >= 1",
                self.intra_edge_factor
            )));
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.component_sizes.iter().sum()
    }
}

/// Uniform random labelled tree on `n` nodes, decoded from a random Prüfer
/// sequence.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    if n == 2 {
        return vec![(0, 1)];
    }
    let prufer: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &x in &prufer {
        degree[x] += 1;
    }
    let mut leaves: BTreeSet<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &x in &prufer {
        let leaf = leaves.pop_first().expect("a tree always has a leaf");
        edges.push((leaf.min(x), leaf.max(x)));
        degree[x] -= 1;
        if degree[x] == 1 {
            leaves.insert(x);
        }
    }
    let a = leaves.pop_first().unwrap();
    let b = leaves.pop_first().unwrap();
    edges.push((a, b));
    edges
}

/// Spanning tree plus uniformly chosen extra pairs until `target` edges.
fn connected_block<R: Rng + ?Sized>(rng: &mut R, n: usize, target: usize) -> Vec<(usize, usize)> {
    let max_edges = n * n.saturating_sub(1) / 2;
    let target = target.clamp(n.saturating_sub(1), max_edges);
    let mut set: BTreeSet<(usize, usize)> = random_tree(rng, n).into_iter().collect();
    if target > set.len() && 2 * target > max_edges {
        let mut rest: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|e| !set.contains(e))
            .collect();
        rest.shuffle(rng);
        set.extend(rest.into_iter().take(target - set.len()));
    } else {
        while set.len() < target {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i != j {
                set.insert((i.min(j), i.max(j)));
            }
        }
    }
    set.into_iter().collect()
}

/// Builds the graph and standard-Gaussian node features of a recipe.
/// Components occupy consecutive node ranges in recipe order.
pub fn generate(recipe: &SyntheticRecipe) -> Result<Graph> {
    recipe.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);
    let mut edges = Vec::new();
    let mut offset = 0;
    for &size in &recipe.component_sizes {
        let target = (recipe.intra_edge_factor * size as f64).round() as usize;
        for (u, v) in connected_block(&mut rng, size, target) {
            edges.push((u + offset, v + offset, 1.0));
        }
        offset += size;
    }
    let features = gaussian_matrix(&mut rng, offset, recipe.feature_dim, 1.0);
    Graph::from_edges(offset, edges)?.with_features(features)
}

/// Parameters of the random graph populations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationSpec {
    pub max_nodes: usize,
    pub min_components: usize,
    pub max_components: usize,
    pub weighted: bool,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        PopulationSpec {
            max_nodes: 64,
            min_components: 1,
            max_components: 4,
            weighted: true,
        }
    }
}

/// One random graph: `k` planted components, each a random spanning tree
/// plus Erdős–Rényi extra edges, weights uniform in (0, 1], node labels
/// shuffled so components are not contiguous.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, spec: &PopulationSpec) -> Graph {
    let k = rng.random_range(spec.min_components..=spec.max_components);
    let n = rng.random_range(k.max(2)..=spec.max_nodes.max(k.max(2)));
    // split n into k positive sizes
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(k - 1).collect();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(k);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(n)) {
        sizes.push(c - prev);
        prev = c;
    }

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let q: f64 = rng.random_range(0.05..0.5);
    let mut edges = Vec::new();
    let mut offset = 0;
    for size in sizes {
        let mut set: BTreeSet<(usize, usize)> = random_tree(rng, size).into_iter().collect();
        for i in 0..size {
            for j in i + 1..size {
                if rng.random::<f64>() < q {
                    set.insert((i, j));
                }
            }
        }
        for (u, v) in set {
            let w = if spec.weighted {
                1.0 - rng.random::<f64>()
            } else {
                1.0
            };
            edges.push((perm[u + offset], perm[v + offset], w));
        }
        offset += size;
    }
    Graph::from_edges(n, edges).expect("ids and weights are valid by construction")
}

pub fn population(seed: u64, count: usize, spec: &PopulationSpec) -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_graph(&mut rng, spec)).collect()
}

/// Standard-Gaussian N×C matrix from a seed.
pub fn gaussian_features(n: usize, c: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gaussian_matrix(&mut rng, n, c, 1.0)
}
