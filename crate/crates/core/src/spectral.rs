//! Exact eigen-analysis of propagation operators and the DropEdge bound
//! curves that sandwich the second eigenvalue.

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::graph::{
    build_propagator, connected_components, ComponentLabeling, Graph, Normalization, Propagator,
};
use crate::linalg::sym_eigen;

/// Eigenvalues within this distance of 1 count toward the top eigenspace.
pub const TOP_EIGEN_TOL: f64 = 1e-6;

/// Drop rates closer than this to 1 are evaluated as the p → 1 limit.
pub const LIMIT_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column k pairs with `eigenvalues[k]`.
    pub eigenvectors: Array2<f64>,
}

fn similar_symmetric(prop: &Propagator) -> Array2<f64> {
    // D^{-1}(A + I) = D^{-1/2} S D^{1/2}, so S = D^{1/2} M D^{-1/2}
    let sq: Vec<f64> = prop.aug_degrees.iter().map(|x| x.sqrt()).collect();
    let mut s = prop.matrix.clone();
    for ((i, j), x) in s.indexed_iter_mut() {
        *x = *x * sq[i] / sq[j];
    }
    // symmetrize away the last-bit asymmetry of the rescaling
    let t = s.t().to_owned();
    (s + t) * 0.5
}

pub fn eigendecompose(prop: &Propagator) -> Result<Spectrum> {
    if prop.symmetric {
        let eig = sym_eigen(prop.matrix.view(), true)?;
        return Ok(Spectrum {
            eigenvalues: eig.values,
            eigenvectors: eig.vectors.expect("vectors requested"),
        });
    }
    let s = similar_symmetric(prop);
    let eig = sym_eigen(s.view(), true)?;
    let mut q = eig.vectors.expect("vectors requested");
    for (mut row, d) in q.axis_iter_mut(Axis(0)).zip(&prop.aug_degrees) {
        row.mapv_inplace(|x| x / d.sqrt());
    }
    Ok(Spectrum {
        eigenvalues: eig.values,
        eigenvectors: q,
    })
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(prop: &Propagator) -> Result<Vec<f64>> {
    let eig = if prop.symmetric {
        sym_eigen(prop.matrix.view(), false)?
    } else {
        sym_eigen(similar_symmetric(prop).view(), false)?
    };
    Ok(eig.values)
}

pub fn top_multiplicity(values: &[f64]) -> usize {
    top_multiplicity_tol(values, TOP_EIGEN_TOL)
}

pub fn top_multiplicity_tol(values: &[f64], tol: f64) -> usize {
    values.iter().filter(|&&x| (x - 1.0).abs() <= tol).count()
}

/// Tolerance for counting the top eigenvalue of Â_p. Since
/// I − Â_p = D_p^{-1/2} L D_p^{-1/2} with D_p = D + I/(1 − p), the whole
/// spectrum closes in on 1 at rate 1 − p, and so must the tolerance.
pub fn top_tol_at(p: f64) -> f64 {
    TOP_EIGEN_TOL * (1.0 - p).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondEigenvalue {
    pub lambda: f64,
    pub multiplicity_top: usize,
}

/// λ = max |λ_n| over the N − M eigenvalues below the top eigenspace.
pub fn second_lambda_from_values(values: &[f64], comp: &ComponentLabeling) -> Result<SecondEigenvalue> {
    second_lambda_tol(values, comp, TOP_EIGEN_TOL)
}

pub fn second_lambda_tol(values: &[f64], comp: &ComponentLabeling, tol: f64) -> Result<SecondEigenvalue> {
    let m = comp.m_components;
    let spectral = top_multiplicity_tol(values, tol);
    if spectral != m {
        return Err(Error::Consistency {
            spectral,
            components: m,
        });
    }
    let rest = &values[..values.len() - m];
    let lambda = rest.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    Ok(SecondEigenvalue {
        lambda,
        multiplicity_top: m,
    })
}

pub fn second_lambda(spec: &Spectrum, comp: &ComponentLabeling) -> Result<SecondEigenvalue> {
    second_lambda_from_values(&spec.eigenvalues, comp)
}

/// λ(p) of the re-normalized expected DropEdge propagator.
pub fn lambda_at(g: &Graph, p: f64) -> Result<f64> {
    if 1.0 - p < LIMIT_EPS {
        return Ok(1.0);
    }
    let prop = build_propagator(g, Normalization::AugNormAdj, p)?;
    let comp = connected_components(g);
    Ok(second_lambda_tol(&eigenvalues(&prop)?, &comp, top_tol_at(p))?.lambda)
}

/// min and max over nodes of (d_i + 1) / (d_i + 1/(1 − p)).
pub fn degree_ratio_extremes(degrees: &[f64], p: f64) -> (f64, f64) {
    if degrees.is_empty() {
        return (1.0, 1.0);
    }
    let c = 1.0 / (1.0 - p);
    degrees
        .iter()
        .map(|&d| (d + 1.0) / (d + c))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)))
}

/// (μ, γ) for a given constant a and ratio extremes.
pub fn bound_pair(a: f64, ratio_min: f64, ratio_max: f64) -> (f64, f64) {
    (1.0 - (1.0 + a) * ratio_max, 1.0 - (1.0 - a) * ratio_min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPoint {
    pub p: f64,
    pub lambda: f64,
    pub a: f64,
    pub mu: f64,
    pub gamma: f64,
    /// False when N = M: no eigenvalue below the top eigenspace exists and
    /// the sandwich has nothing to bound.
    pub applicable: bool,
}

impl BoundPoint {
    pub fn gap(&self) -> f64 {
        self.gamma - self.mu
    }

    pub fn sandwich_holds(&self, slack: f64) -> bool {
        !self.applicable || (self.mu <= self.lambda + slack && self.lambda <= self.gamma + slack)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    pub points: Vec<BoundPoint>,
    /// Weighted degrees of the graph the curve was computed on.
    pub degrees: Vec<f64>,
}

impl BoundCurve {
    pub fn p_grid(&self) -> Vec<f64> {
        self.points.iter().map(|b| b.p).collect()
    }

    /// (μ, γ) at every grid point with a held at `a0`.
    pub fn frozen(&self, a0: f64) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|b| {
                if 1.0 - b.p < LIMIT_EPS {
                    return (1.0, 1.0);
                }
                let (lo, hi) = degree_ratio_extremes(&self.degrees, b.p);
                bound_pair(a0, lo, hi)
            })
            .collect()
    }

    pub fn check_sandwich(&self, slack: f64) -> Result<()> {
        match self.points.iter().find(|b| !b.sandwich_holds(slack)) {
            None => Ok(()),
            Some(b) => Err(Error::TheoremCheck(format!(
                "sandwich violated at p = {}: mu = {}, lambda = {}, gamma = {}",
                b.p, b.mu, b.lambda, b.gamma
            ))),
        }
    }
}

/// Evaluates λ(p), a, μ(p) and γ(p) on every grid point.
///
/// a is the largest |y_pᵀ Â y_p| / ‖y_p‖² over the eigenvectors x_p of Â_p
/// below the top eigenspace, with y_p = D̂^{1/2} D_p^{-1/2} x_p.
pub fn dropedge_bounds(g: &Graph, p_grid: &[f64]) -> Result<BoundCurve> {
    let comp = connected_components(g);
    let degrees = g.degrees().d;
    let a_hat = build_propagator(g, Normalization::AugNormAdj, 0.0)?;
    let n = g.n_nodes();
    let m = comp.m_components;

    let mut points = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::Domain(format!("grid point p = {p} outside [0, 1]")));
        }
        if 1.0 - p < LIMIT_EPS {
            points.push(BoundPoint {
                p,
                lambda: 1.0,
                a: 1.0,
                mu: 1.0,
                gamma: 1.0,
                applicable: n > m,
            });
            continue;
        }
        let prop = build_propagator(g, Normalization::AugNormAdj, p)?;
        let spec = eigendecompose(&prop)?;
        let lambda = second_lambda_tol(&spec.eigenvalues, &comp, top_tol_at(p))?.lambda;

        let scale: Array1<f64> = degrees
            .iter()
            .zip(&prop.aug_degrees)
            .map(|(&d, &dp)| ((d + 1.0) / dp).sqrt())
            .collect();
        let mut a: f64 = 0.0;
        for k in 0..n - m {
            let y = &spec.eigenvectors.column(k) * &scale;
            let yy = y.dot(&y);
            if yy > 0.0 {
                a = a.max((y.dot(&a_hat.matrix.dot(&y)) / yy).abs());
            }
        }

        let (lo, hi) = degree_ratio_extremes(&degrees, p);
        let (mu, gamma) = bound_pair(a, lo, hi);
        points.push(BoundPoint {
            p,
            lambda,
            a,
            mu,
            gamma,
            applicable: n > m,
        });
    }
    Ok(BoundCurve { points, degrees })
}
