//! Cyclic Jacobi eigendecomposition for symmetric matrices up to 4x4.
//!
//! Small fixed-size problems (the component Gram matrices have `vdim <= 4`)
//! make sweep-based Jacobi both simple and fully accurate; sweeps run until
//! the off-diagonal norm drops below `1e-13` times the matrix scale.

/// Eigenvalues (ascending) and matching orthonormal eigenvectors.
///
/// Only the leading `n` entries are meaningful. Each eigenvector has its
/// first nonzero coefficient positive (the deterministic sign convention
/// used when tracking eigenvectors across nearby matrices).
pub fn jacobi_eigen(mat: &[[f64; 4]; 4], n: usize) -> ([f64; 4], [[f64; 4]; 4]) {
    debug_assert!((1..=4).contains(&n));
    let mut a = *mat;
    let mut vecs = [[0.0; 4]; 4];
    for (i, row) in vecs.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let mut scale = 0.0f64;
    for row in a.iter().take(n) {
        for v in row.iter().take(n) {
            scale += v * v;
        }
    }
    let threshold = 1e-13 * scale.sqrt().max(f64::MIN_POSITIVE);

    for _sweep in 0..50 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if (2.0 * off).sqrt() <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for vec in vecs.iter_mut() {
                    let vp = vec[p];
                    let vq = vec[q];
                    vec[p] = c * vp - s * vq;
                    vec[q] = s * vp + c * vq;
                }
            }
        }
    }

    // Columns of `vecs` are the eigenvectors; collect, sort, fix signs.
    let mut pairs: Vec<(f64, [f64; 4])> = (0..n)
        .map(|j| {
            let mut v = [0.0; 4];
            for (i, row) in vecs.iter().enumerate() {
                v[i] = row[j];
            }
            (a[j][j], v)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut values = [0.0; 4];
    let mut vectors = [[0.0; 4]; 4];
    for (k, (val, mut vec)) in pairs.into_iter().enumerate() {
        if let Some(first) = vec.iter().find(|t| t.abs() > 1e-300) {
            if *first < 0.0 {
                for t in vec.iter_mut() {
                    *t = -*t;
                }
            }
        }
        values[k] = val;
        vectors[k] = vec;
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_vec(m: &[[f64; 4]; 4], v: &[f64; 4], n: usize) -> [f64; 4] {
        let mut out = [0.0; 4];
        for i in 0..n {
            for j in 0..n {
                out[i] += m[i][j] * v[j];
            }
        }
        out
    }

    #[test]
    fn diagonal_matrix_passthrough() {
        let m = [
            [3.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, 2.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ];
        let (vals, vecs) = jacobi_eigen(&m, 4);
        assert_eq!(vals, [-1.0, 0.0, 2.0, 3.0]);
        assert_eq!(vecs[0], [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_matrix() {
        let (vals, _) = jacobi_eigen(&[[0.0; 4]; 4], 4);
        assert_eq!(vals, [0.0; 4]);
    }

    /// Brute-force characteristic-polynomial oracle: eigenvalues are roots
    /// of det(M - λI), found by sign-change bisection on a fine grid.
    fn charpoly_roots(m: &[[f64; 4]; 4], n: usize) -> Vec<f64> {
        let det = |lambda: f64| -> f64 {
            // Gaussian elimination determinant of (m - λ I), n x n.
            let mut a = [[0.0f64; 4]; 4];
            for i in 0..n {
                for j in 0..n {
                    a[i][j] = m[i][j] - if i == j { lambda } else { 0.0 };
                }
            }
            let mut det = 1.0;
            for col in 0..n {
                let mut piv = col;
                for row in (col + 1)..n {
                    if a[row][col].abs() > a[piv][col].abs() {
                        piv = row;
                    }
                }
                if a[piv][col].abs() < 1e-300 {
                    return 0.0;
                }
                if piv != col {
                    a.swap(piv, col);
                    det = -det;
                }
                det *= a[col][col];
                for row in (col + 1)..n {
                    let f = a[row][col] / a[col][col];
                    for k in col..n {
                        a[row][k] -= f * a[col][k];
                    }
                }
            }
            det
        };
        // Scan for sign changes over a generous interval and bisect.
        let lo = -50.0;
        let hi = 50.0;
        let steps = 400_000;
        let mut roots = Vec::new();
        let mut prev = det(lo);
        let mut prev_x = lo;
        for i in 1..=steps {
            let x = lo + (hi - lo) * i as f64 / steps as f64;
            let cur = det(x);
            if prev == 0.0 {
                roots.push(prev_x);
            } else if prev.signum() != cur.signum() && cur != 0.0 {
                let (mut a0, mut b0) = (prev_x, x);
                for _ in 0..200 {
                    let mid = 0.5 * (a0 + b0);
                    let dm = det(mid);
                    if dm == 0.0 {
                        a0 = mid;
                        b0 = mid;
                        break;
                    }
                    if dm.signum() == det(a0).signum() {
                        a0 = mid;
                    } else {
                        b0 = mid;
                    }
                }
                roots.push(0.5 * (a0 + b0));
            }
            prev = cur;
            prev_x = x;
        }
        roots
    }

    #[test]
    fn random_symmetric_matches_charpoly_roots() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let mut m = [[0.0f64; 4]; 4];
            for i in 0..4 {
                for j in i..4 {
                    let v = rng.gen_range(-4.0..4.0);
                    m[i][j] = v;
                    m[j][i] = v;
                }
            }
            let (vals, vecs) = jacobi_eigen(&m, 4);
            let roots = charpoly_roots(&m, 4);
            assert_eq!(roots.len(), 4, "oracle missed roots (degenerate draw)");
            for k in 0..4 {
                assert!(
                    (vals[k] - roots[k]).abs() < 1e-10,
                    "eigenvalue {k}: {} vs oracle {}",
                    vals[k],
                    roots[k]
                );
            }
            // Residual check ||Mv - λv||.
            for k in 0..4 {
                let mv = mat_vec(&m, &vecs[k], 4);
                for i in 0..4 {
                    assert!((mv[i] - vals[k] * vecs[k][i]).abs() < 1e-12);
                }
            }
        }
    }
}
