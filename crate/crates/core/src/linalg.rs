//! Dense linear algebra used throughout the lab.
//!
//! The symmetric eigensolver reduces the input to tridiagonal form with
//! Householder reflections and then diagonalizes it with the implicit-shift
//! QL iteration. Eigenvector storage is column-major internally so the QL
//! plane rotations touch two contiguous columns.

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Maximum QL sweeps spent on a single eigenvalue before giving up.
pub const QL_ITERATION_CAP: usize = 64;

/// Eigenvalues (ascending) and, optionally, the matching orthonormal
/// eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Option<Array2<f64>>,
}

/// Eigen-decomposition of a symmetric matrix. Only the lower triangle is
/// trusted; the caller is responsible for passing a symmetric input.
pub fn sym_eigen(a: ArrayView2<'_, f64>, want_vectors: bool) -> Result<SymEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Shape(format!(
            "eigensolver needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(SymEigen {
            values: Vec::new(),
            vectors: want_vectors.then(|| Array2::zeros((0, 0))),
        });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("eigensolver input has non-finite entries".into()));
    }

    // column-major copy: v[c * n + r] = a[(r, c)]
    let mut v = vec![0.0; n * n];
    for c in 0..n {
        for r in 0..n {
            v[c * n + r] = a[(r, c)];
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];

    tridiagonalize(&mut v, &mut d, &mut e, n, want_vectors);
    ql_implicit(&mut v, &mut d, &mut e, n, want_vectors)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = want_vectors.then(|| {
        let mut q = Array2::zeros((n, n));
        for (dst, &src) in order.iter().enumerate() {
            for r in 0..n {
                q[(r, dst)] = v[src * n + r];
            }
        }
        q
    });
    Ok(SymEigen { values, vectors })
}

#[inline]
fn at(n: usize, r: usize, c: usize) -> usize {
    c * n + r
}

// Householder reduction to tridiagonal form (EISPACK tred2 ordering).
fn tridiagonalize(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize, accumulate: bool) {
    for j in 0..n {
        d[j] = v[at(n, n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(n, i - 1, j)];
                v[at(n, i, j)] = 0.0;
                v[at(n, j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[at(n, j, i)] = f;
                g = e[j] + v[at(n, j, j)] * f;
                for k in (j + 1)..i {
                    let vkj = v[at(n, k, j)];
                    g += vkj * d[k];
                    e[k] += vkj * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let col = &mut v[j * n..(j + 1) * n];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = col[i - 1];
                col[i] = 0.0;
            }
        }
        d[i] = h;
    }

    if !accumulate {
        for j in 0..n {
            d[j] = v[at(n, j, j)];
        }
        e[0] = 0.0;
        return;
    }

    for i in 0..n - 1 {
        v[at(n, n - 1, i)] = v[at(n, i, i)];
        v[at(n, i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(n, k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(n, k, i + 1)] * v[at(n, k, j)];
                }
                for k in 0..=i {
                    v[at(n, k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(n, k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n, n - 1, j)];
        v[at(n, n - 1, j)] = 0.0;
    }
    v[at(n, n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal (d, e).
fn ql_implicit(
    v: &mut [f64],
    d: &mut [f64],
    e: &mut [f64],
    n: usize,
    vectors: bool,
) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > QL_ITERATION_CAP {
                    return Err(Error::NoConvergence {
                        residual: e[l].abs(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    if vectors {
                        let (lo, hi) = v.split_at_mut((i + 1) * n);
                        let col_i = &mut lo[i * n..];
                        let col_i1 = &mut hi[..n];
                        for k in 0..n {
                            let hk = col_i1[k];
                            col_i1[k] = s * col_i[k] + c * hk;
                            col_i[k] = c * col_i[k] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

pub fn frobenius(a: ArrayView2<'_, f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest singular value, as the square root of the top eigenvalue of WᵀW.
pub fn top_singular_value(w: ArrayView2<'_, f64>) -> Result<f64> {
    let gram = w.t().dot(&w);
    let eig = sym_eigen(gram.view(), false)?;
    Ok(eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Orthonormalize the columns of `m` in place with two passes of modified
/// Gram-Schmidt. Returns the number of columns that collapsed to zero.
pub fn orthonormalize_columns(m: &mut Array2<f64>) -> usize {
    let cols = m.ncols();
    let mut collapsed = 0;
    for j in 0..cols {
        let original = m.column(j).dot(&m.column(j)).sqrt();
        for _pass in 0..2 {
            for k in 0..j {
                let proj = m.column(k).dot(&m.column(j));
                let qk = m.column(k).to_owned();
                m.column_mut(j).scaled_add(-proj, &qk);
            }
        }
        let norm = m.column(j).dot(&m.column(j)).sqrt();
        if norm <= 1e-12 * original.max(f64::MIN_POSITIVE) {
            m.column_mut(j).fill(0.0);
            collapsed += 1;
        } else {
            m.column_mut(j).mapv_inplace(|x| x / norm);
        }
    }
    collapsed
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || {
        let z: f64 = rng.sample(StandardNormal);
        z * scale
    })
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Array1<f64> {
    Array1::from_shape_simple_fn(len, || rng.sample(StandardNormal))
}
