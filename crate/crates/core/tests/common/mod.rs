//! Reference computations that share no code with the library.
#![allow(dead_code)]

use ndarray::{Array1, Array2};

/// Number of eigenvalues of symmetric `a` below `x`.
///
/// The leading principal minors of A − xI are the characteristic
/// polynomials of the leading submatrices evaluated at x; by interlacing,
/// the number of sign changes in the sequence 1, p₁(x), …, p_n(x) equals
/// the count. Ratios p_k/p_{k−1} are the elimination pivots, so the count
/// is the number of negative pivots.
pub fn count_below(a: &Array2<f64>, x: f64) -> usize {
    let n = a.nrows();
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= x;
    }
    let mut neg = 0;
    for k in 0..n {
        let mut piv = m[(k, k)];
        if piv == 0.0 {
            piv = -1e-300;
        }
        if piv < 0.0 {
            neg += 1;
        }
        for i in k + 1..n {
            let f = m[(i, k)] / piv;
            for j in k + 1..n {
                m[(i, j)] -= f * m[(k, j)];
            }
        }
    }
    neg
}

/// All eigenvalues by bisection on the characteristic-polynomial count,
/// ascending.
pub fn charpoly_eigenvalues(a: &Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    let radius = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    (0..n)
        .map(|k| {
            // smallest x with count_below(x) > k
            let (mut lo, mut hi) = (-radius, radius);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(a, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-14 * radius {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Solves A X = B by Gaussian elimination with partial pivoting.
pub fn solve(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs())).unwrap();
        if p != k {
            for j in 0..n {
                m.swap((k, j), (p, j));
            }
            for j in 0..x.ncols() {
                x.swap((k, j), (p, j));
            }
        }
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            for j in k..n {
                m[(i, j)] -= f * m[(k, j)];
            }
            for j in 0..x.ncols() {
                x[(i, j)] -= f * x[(k, j)];
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..x.ncols() {
            let mut s = x[(k, j)];
            for i in k + 1..n {
                s -= m[(k, i)] * x[(i, j)];
            }
            x[(k, j)] = s / m[(k, k)];
        }
    }
    x
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
pub fn jacobi_eigenvalues(a: &Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut v: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Largest singular value of `w` by power iteration on WᵀW.
pub fn power_singular(w: &Array2<f64>, iters: usize) -> f64 {
    let g = w.t().dot(w);
    let mut x = Array1::from_iter((0..g.nrows()).map(|i| 1.0 + 0.1 * i as f64));
    let mut est = 0.0;
    for _ in 0..iters {
        let y = g.dot(&x);
        let norm = y.dot(&y).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        est = x.dot(&y) / x.dot(&x);
        x = y / norm;
    }
    est.max(0.0).sqrt()
}

/// ‖H − BC*‖_F where C* solves the normal equations BᵀB C = BᵀH.
pub fn least_squares_residual(b: &Array2<f64>, h: &Array2<f64>) -> f64 {
    let c = solve(&b.t().dot(b), &b.t().dot(h));
    let r = h - &b.dot(&c);
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
