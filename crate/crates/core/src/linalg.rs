//! Dense helpers for the 8-dimensional reduced representation.

use crate::error::{CcnError, Result};
use crate::scalar::Real;

/// Phase-space dimension of the shipped system.
pub const DIM: usize = 8;

pub type State<T> = [T; DIM];
pub type Mat<T> = [[T; DIM]; DIM];

pub fn zero_state<T: Real>() -> State<T> {
    [T::zero(); DIM]
}

pub fn zero_mat<T: Real>() -> Mat<T> {
    [[T::zero(); DIM]; DIM]
}

pub fn identity<T: Real>() -> Mat<T> {
    let mut m = zero_mat();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

pub fn dot<T: Real>(a: &State<T>, b: &State<T>) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<T: Real>(a: &State<T>) -> T {
    dot(a, a).sqrt()
}

pub fn max_abs<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

pub fn add<T: Real>(a: &State<T>, b: &State<T>) -> State<T> {
    std::array::from_fn(|i| a[i] + b[i])
}

pub fn sub<T: Real>(a: &State<T>, b: &State<T>) -> State<T> {
    std::array::from_fn(|i| a[i] - b[i])
}

pub fn scale<T: Real>(s: T, a: &State<T>) -> State<T> {
    std::array::from_fn(|i| s * a[i])
}

/// `a + s b`
pub fn axpy<T: Real>(a: &State<T>, s: T, b: &State<T>) -> State<T> {
    std::array::from_fn(|i| a[i] + s * b[i])
}

pub fn mat_vec<T: Real>(m: &Mat<T>, v: &State<T>) -> State<T> {
    std::array::from_fn(|i| dot(&m[i], v))
}

pub fn mat_add_scaled<T: Real>(a: &Mat<T>, s: T, b: &Mat<T>) -> Mat<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] + s * b[i][j]))
}

pub fn transpose<T: Real>(m: &Mat<T>) -> Mat<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| m[j][i]))
}

pub fn mat_mul<T: Real>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| (0..DIM).map(|k| a[i][k] * b[k][j]).sum())
    })
}

/// Largest entry of |a - b|.
pub fn mat_max_diff<T: Real>(a: &Mat<T>, b: &Mat<T>) -> T {
    let mut m = T::zero();
    for i in 0..DIM {
        for j in 0..DIM {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

/// Solves the square system `a x = b` (row-major, `n x n`) by Gaussian
/// elimination with partial pivoting.
pub fn solve_dense<T: Real>(mut a: Vec<T>, mut b: Vec<T>, n: usize) -> Result<Vec<T>> {
    if a.len() != n * n || b.len() != n {
        return Err(CcnError::Dimension(format!(
            "solve_dense: matrix {} / rhs {} for n = {n}",
            a.len(),
            b.len()
        )));
    }
    let scale = a.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    let tiny = scale * T::epsilon() * T::of_usize(n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i * n + col]
                    .abs()
                    .partial_cmp(&a[j * n + col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if a[pivot * n + col].abs() <= tiny {
            return Err(CcnError::Singular);
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let d = a[col * n + col];
        for i in col + 1..n {
            let f = a[i * n + col] / d;
            if f == T::zero() {
                continue;
            }
            for j in col..n {
                let v = a[col * n + j];
                a[i * n + j] -= f * v;
            }
            let v = b[col];
            b[i] -= f * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i * n + j] * x[j];
        }
        x[i] = s / a[i * n + i];
    }
    Ok(x)
}

/// Solves `L x = f` subject to `<x, kernel> = 0` through the bordered system
///
/// ```text
/// [ L      kernel ] [ x  ]   [ f ]
/// [ kernel^T   0  ] [ mu ] = [ 0 ]
/// ```
///
/// For symmetric `L` whose kernel is exactly `span{kernel}` the bordered
/// matrix is nonsingular; `mu = <kernel, f> / |kernel|^2` measures the
/// Fredholm obstruction of the right-hand side.
pub fn bordered_solve<T: Real>(
    l: &Mat<T>,
    kernel: &State<T>,
    f: &State<T>,
) -> Result<(State<T>, T)> {
    let n = DIM + 1;
    let mut a = vec![T::zero(); n * n];
    for i in 0..DIM {
        for j in 0..DIM {
            a[i * n + j] = l[i][j];
        }
        a[i * n + DIM] = kernel[i];
        a[DIM * n + i] = kernel[i];
    }
    let mut b = vec![T::zero(); n];
    b[..DIM].copy_from_slice(f);
    let x = solve_dense(a, b, n)?;
    Ok((std::array::from_fn(|i| x[i]), x[DIM]))
}

/// Numerical rank from the pivots of a fully pivoted elimination.
pub fn rank<T: Real>(m: &Mat<T>, rel_tol: T) -> usize {
    let mut a: Vec<Vec<T>> = m.iter().map(|r| r.to_vec()).collect();
    let scale = max_abs(&a.iter().flatten().copied().collect::<Vec<_>>());
    if scale == T::zero() {
        return 0;
    }
    let mut r = 0;
    let mut cols: Vec<usize> = (0..DIM).collect();
    for row in 0..DIM {
        // full pivot over the remaining block
        let mut best = (row, row, T::zero());
        for i in row..DIM {
            for (jj, &j) in cols.iter().enumerate().skip(row) {
                let v = a[i][j].abs();
                if v > best.2 {
                    best = (i, jj, v);
                }
            }
        }
        if best.2 <= rel_tol * scale {
            break;
        }
        a.swap(row, best.0);
        cols.swap(row, best.1);
        let pc = cols[row];
        let d = a[row][pc];
        for i in row + 1..DIM {
            let f = a[i][pc] / d;
            for &j in &cols {
                let v = a[row][j];
                a[i][j] -= f * v;
            }
        }
        r += 1;
    }
    r
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations (unsorted).
pub fn symmetric_eigenvalues<T: Real>(m: &Mat<T>) -> State<T> {
    let mut a = *m;
    for _sweep in 0..64 {
        let off: T = (0..DIM)
            .flat_map(|i| (0..DIM).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off <= T::epsilon() * T::epsilon() {
            break;
        }
        for p in 0..DIM {
            for q in p + 1..DIM {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::two() * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..DIM {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..DIM {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::array::from_fn(|i| a[i][i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_dense_recovers_known_solution() {
        let a = vec![4.0, -2.0, 1.0, -2.0, 4.0, -2.0, 1.0, -2.0, 4.0];
        let x_true = [1.0, -2.0, 3.0];
        let b: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| a[i * 3 + j] * x_true[j]).sum())
            .collect();
        let x = solve_dense(a, b, 3).unwrap();
        for i in 0..3 {
            assert!((x[i] - x_true[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn solve_dense_flags_singular() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert_eq!(solve_dense(a, vec![1.0, 2.0], 2), Err(CcnError::Singular));
    }

    #[test]
    fn jacobi_eigenvalues_of_diagonal_plus_rotation() {
        let mut m: Mat<f64> = zero_mat();
        for i in 0..DIM {
            m[i][i] = i as f64;
        }
        m[0][1] = 1.0;
        m[1][0] = 1.0;
        let mut ev = symmetric_eigenvalues(&m);
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let r = (1.25f64).sqrt();
        assert!((ev[0] - (0.5 - r)).abs() < 1e-13);
        assert!((ev[1] - (0.5 + r)).abs() < 1e-13);
    }

    #[test]
    fn rank_of_identity_and_projector() {
        assert_eq!(rank(&identity::<f64>(), 1e-12), DIM);
        let mut p: Mat<f64> = identity();
        p[3][3] = 0.0;
        assert_eq!(rank(&p, 1e-12), DIM - 1);
    }
}
