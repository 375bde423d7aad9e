//! Truncated SVD of small dense feature matrices, computed from the
//! eigendecomposition of XᵀX.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::sym_eigen;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSvd {
    /// N×k scores U_k Σ_k.
    pub scores: Array2<f64>,
    /// Descending.
    pub singular_values: Array1<f64>,
    /// C×k right singular vectors V_k.
    pub components: Array2<f64>,
    /// Numerical rank, when it fell short of k.
    pub deficient_rank: Option<usize>,
}

impl TruncatedSvd {
    /// U_k Σ_k V_kᵀ.
    pub fn reconstruct(&self) -> Array2<f64> {
        self.scores.dot(&self.components.t())
    }
}

/// Rank-k truncated SVD. Forming XᵀX squares the condition number, so
/// singular values below 1e-7 σ_max are treated as zero and their columns
/// zero-padded. Each right singular vector is
/// signed so its largest-magnitude entry is positive.
pub fn truncated_svd(x: ArrayView2<'_, f64>, k: usize) -> Result<TruncatedSvd> {
    let (n, c) = x.dim();
    if k > n.min(c) {
        return Err(Error::Domain(format!(
            "cannot keep {k} components of a {n}x{c} matrix"
        )));
    }
    let gram = x.t().dot(&x);
    let eig = sym_eigen(gram.view(), true)?;
    let q = eig.vectors.expect("vectors requested");

    let sigma_max = eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    let cutoff = 1e-7 * sigma_max;
    let mut singular_values = Array1::zeros(k);
    let mut components = Array2::zeros((c, k));
    let mut rank = 0;
    for j in 0..k {
        let idx = c - 1 - j;
        let sigma = eig.values[idx].max(0.0).sqrt();
        if sigma <= cutoff || sigma == 0.0 {
            continue;
        }
        rank += 1;
        let mut v = q.column(idx).to_owned();
        let pivot = v
            .iter()
            .copied()
            .fold(0.0_f64, |best, e| if e.abs() > best.abs() { e } else { best });
        if pivot < 0.0 {
            v.mapv_inplace(|e| -e);
        }
        singular_values[j] = sigma;
        components.column_mut(j).assign(&v);
    }
    let scores = x.dot(&components);
    Ok(TruncatedSvd {
        scores,
        singular_values,
        components,
        deficient_rank: (rank < k).then_some(rank),
    })
}
