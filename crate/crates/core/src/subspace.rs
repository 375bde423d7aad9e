//! The over-smoothing subspace ℳ spanned by the top eigenvectors of the
//! augmented normalized adjacency, and distances to it.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::graph::{ComponentLabeling, Graph};

/// Orthonormal basis Ê of ℳ. Column m is D̂^{1/2} u_m scaled to unit norm
/// and is supported exactly on component m.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    pub e_hat: Array2<f64>,
    pub component_of: Vec<usize>,
}

pub fn build_subspace(g: &Graph, comp: &ComponentLabeling) -> SubspaceBasis {
    let n = g.n_nodes();
    let m = comp.m_components;
    let d = g.degrees().d;
    let mut norms = vec![0.0; m];
    for (i, &c) in comp.labels.iter().enumerate() {
        norms[c] += d[i] + 1.0;
    }
    let mut e_hat = Array2::zeros((n, m));
    for (i, &c) in comp.labels.iter().enumerate() {
        e_hat[(i, c)] = ((d[i] + 1.0) / norms[c]).sqrt();
    }
    SubspaceBasis {
        e_hat,
        component_of: comp.labels.clone(),
    }
}

impl SubspaceBasis {
    pub fn n(&self) -> usize {
        self.e_hat.nrows()
    }

    pub fn dim(&self) -> usize {
        self.e_hat.ncols()
    }

    fn check_rows(&self, h: ArrayView2<'_, f64>) -> Result<()> {
        if h.nrows() != self.n() {
            return Err(Error::Shape(format!(
                "matrix has {} rows, subspace lives in {} nodes",
                h.nrows(),
                self.n()
            )));
        }
        Ok(())
    }

    /// (I − ÊÊᵀ) H.
    pub fn project_out(&self, h: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_rows(h)?;
        let coeff = self.e_hat.t().dot(&h);
        Ok(&h - &self.e_hat.dot(&coeff))
    }

    /// Ê C for an M×C coefficient matrix.
    pub fn embed(&self, coeff: ArrayView2<'_, f64>) -> Array2<f64> {
        self.e_hat.dot(&coeff)
    }
}

/// d_ℳ(H) = ‖(I − ÊÊᵀ) H‖_F, the unsquared Frobenius distance to ℳ.
pub fn distance_to_subspace(basis: &SubspaceBasis, h: ArrayView2<'_, f64>) -> Result<f64> {
    let r = basis.project_out(h)?;
    Ok(r.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// d_ℳ(H) through the per-component, per-channel decomposition
/// d² = Σ_m Σ_c h_mcᵀh_mc − (h_mcᵀ e_m)².
pub fn distance_componentwise(basis: &SubspaceBasis, h: ArrayView2<'_, f64>) -> Result<f64> {
    basis.check_rows(h)?;
    let m = basis.dim();
    let c = h.ncols();
    let mut sq = vec![0.0; m * c];
    let mut dot = vec![0.0; m * c];
    for (i, &comp) in basis.component_of.iter().enumerate() {
        let e = basis.e_hat[(i, comp)];
        for ch in 0..c {
            let x = h[(i, ch)];
            sq[comp * c + ch] += x * x;
            dot[comp * c + ch] += x * e;
        }
    }
    let total: f64 = sq.iter().zip(&dot).map(|(s, d)| s - d * d).sum();
    Ok(total.max(0.0).sqrt())
}

/// d_ℳ of a 1×C row broadcast over all N nodes.
pub fn distance_of_bias(basis: &SubspaceBasis, b: ArrayView1<'_, f64>) -> f64 {
    let n = basis.n();
    let broadcast = b.broadcast((n, b.len())).expect("row broadcast");
    distance_to_subspace(basis, broadcast).expect("rows match by construction")
}

/// The set O(ℳ, r) of matrices within distance r of ℳ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cuboid {
    pub radius: f64,
}

impl Cuboid {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::Domain(format!("cuboid radius {radius} must be non-negative")));
        }
        Ok(Cuboid { radius })
    }

    pub fn contains(&self, basis: &SubspaceBasis, h: ArrayView2<'_, f64>) -> Result<bool> {
        Ok(distance_to_subspace(basis, h)? <= self.radius)
    }
}

pub fn constant_row(c: usize, value: f64) -> Array1<f64> {
    Array1::from_elem(c, value)
}
