/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching unit eigenvectors
/// as columns of the second result (`vectors[row][k]` belongs to value `k`).
/// Iteration stops once the off-diagonal Frobenius norm drops to
/// `tol * ||A||_F`.
pub(crate) fn symmetric_eigen<const N: usize>(
    mut a: [[f64; N]; N],
    tol: f64,
) -> ([f64; N], [[f64; N]; N]) {
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let norm = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return ([0.0; N], v);
    }

    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= tol * norm {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                a[p][p] -= t * apq;
                a[q][q] += t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for k in 0..N {
                    if k != p && k != q {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[p][k] = a[k][p];
                        a[k][q] = s * akp + c * akq;
                        a[q][k] = a[k][q];
                    }
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = std::array::from_fn(|k| a[order[k]][order[k]]);
    let vectors = std::array::from_fn(|r| std::array::from_fn(|k| v[r][order[k]]));
    (values, vectors)
}

fn off_diagonal_norm<const N: usize>(a: &[[f64; N]; N]) -> f64 {
    let mut s = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if i != j {
                s += x * x;
            }
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix_sorted() {
        let (vals, _) = symmetric_eigen([[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]], 1e-12);
        assert_eq!(vals, [1.0, 2.0, 3.0]);
    }

    #[test]
    fn reconstructs_random_symmetric() {
        // A = V diag(l) V^T must hold for the returned pair
        let b = [
            [4.0, 1.0, -2.0, 0.5],
            [1.0, 3.0, 0.0, 1.5],
            [-2.0, 0.0, 5.0, -1.0],
            [0.5, 1.5, -1.0, 2.0],
        ];
        let (vals, vecs) = symmetric_eigen(b, 1e-14);
        for i in 0..4 {
            for j in 0..4 {
                let r: f64 = (0..4).map(|k| vecs[i][k] * vals[k] * vecs[j][k]).sum();
                assert!((r - b[i][j]).abs() < 1e-12, "({i},{j}) {r} vs {}", b[i][j]);
            }
        }
        for k in 0..3 {
            assert!(vals[k] <= vals[k + 1]);
        }
        // characteristic check on the smallest pair: A v = l v
        for i in 0..4 {
            let av: f64 = (0..4).map(|j| b[i][j] * vecs[j][0]).sum();
            assert!((av - vals[0] * vecs[i][0]).abs() < 1e-12);
        }
    }
}
