//! Small dense linear-algebra helpers used internally: exact integer
//! determinants (fraction-free Bareiss), integer inverses of unimodular
//! matrices via adjugates, cyclic Jacobi eigenvalues for symmetric matrices,
//! and a plain Cholesky factorization for positive-definite forms.
//!
//! The matrices here are tiny (at most 22 x 22), so clarity wins over
//! asymptotics throughout.

/// Exact determinant of an integer matrix by fraction-free Gaussian
/// elimination.  Intermediate values are minors of the input, so `i128`
/// comfortably covers every matrix in this crate (entries of magnitude <= 2,
/// dimension <= 22: the Hadamard bound is ~2.4e21).
pub(crate) fn bareiss_det(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(swap) = (k + 1..n).find(|&i| m[i][k] != 0) else {
                return 0;
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Exact inverse of an integer matrix with determinant +-1, via the adjugate.
/// Returns `None` when the determinant is not a unit.
pub(crate) fn unimodular_inverse(m: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
    let n = m.len();
    let as_i128 = |rows: &[Vec<i64>]| -> Vec<Vec<i128>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect()
    };
    let det = bareiss_det(as_i128(m));
    if det != 1 && det != -1 {
        return None;
    }
    let mut inv = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            // Cofactor C_ji gives entry (i, j) of the adjugate.
            let minor: Vec<Vec<i128>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != i)
                        .map(|c| m[r][c] as i128)
                        .collect()
                })
                .collect();
            let cof = bareiss_det(minor);
            let signed = if (i + j) % 2 == 0 { cof } else { -cof };
            inv[i][j] = i64::try_from(signed * det).expect("adjugate entry fits i64");
        }
    }
    Some(inv)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.  Returns the
/// eigenvalues in ascending order.
pub(crate) fn symmetric_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let scale: f64 = m
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &x| acc.max(x.abs()))
        .max(1.0);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off = off.max(m[i][j].abs());
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Cholesky factorization `A = L L^T` of a symmetric positive-definite
/// matrix.  Returns `None` when a pivot fails, i.e. the matrix is not
/// (numerically) positive definite.
pub(crate) fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i][i] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bareiss_matches_small_examples() {
        assert_eq!(bareiss_det(vec![vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(bareiss_det(vec![vec![2, 1], vec![1, 2]]), 3);
        assert_eq!(
            bareiss_det(vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]),
            -3
        );
        assert_eq!(bareiss_det(vec![vec![0, 0], vec![0, 0]]), 0);
    }

    #[test]
    fn unimodular_inverse_roundtrips() {
        let m = vec![vec![0i64, 1], vec![1, 0]];
        let inv = unimodular_inverse(&m).unwrap();
        assert_eq!(inv, m);

        let m = vec![vec![2i64, 1], vec![1, 1]];
        let inv = unimodular_inverse(&m).unwrap();
        assert_eq!(inv, vec![vec![1, -1], vec![-1, 2]]);

        assert!(unimodular_inverse(&[vec![2i64, 0], vec![0, 2]]).is_none());
    }

    #[test]
    fn jacobi_finds_known_spectrum() {
        // [[0,1],[1,0]] has eigenvalues -1 and 1.
        let eigs = symmetric_eigenvalues(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!((eigs[0] + 1.0).abs() < 1e-12);
        assert!((eigs[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        assert!(cholesky(&[vec![0.0, 1.0], vec![1.0, 0.0]]).is_none());
        let l = cholesky(&[vec![4.0, 2.0], vec![2.0, 5.0]]).unwrap();
        assert!((l[0][0] - 2.0).abs() < 1e-12);
        assert!((l[1][0] - 1.0).abs() < 1e-12);
        assert!((l[1][1] - 2.0).abs() < 1e-12);
    }
}
