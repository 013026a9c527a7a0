//! Dense linear-algebra kernels shared by the graph and equilibria modules:
//! a cyclic Jacobi eigensolver for symmetric matrices and a min-norm-point
//! solver over the convex hull of a finite vertex set.
//!
//! Everything here works on row-major `Vec<f64>` matrices. The graphs this
//! crate targets have at most a few hundred nodes, so dense storage and
//! O(n^3) methods are the simplest adequate choice.

/// Frobenius norm of the off-diagonal part of a dense `n x n` matrix.
pub(crate) fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[i * n + j] * a[i * n + j];
            }
        }
    }
    sum.sqrt()
}

/// Eigenvalues of a dense symmetric matrix, sorted ascending.
///
/// Cyclic Jacobi rotations in a fixed row-major sweep order; iteration stops
/// once the off-diagonal Frobenius norm drops below `tol`. Deterministic for
/// a given input.
pub(crate) fn jacobi_eigenvalues(sym: &[f64], n: usize, tol: f64) -> Vec<f64> {
    assert_eq!(sym.len(), n * n, "matrix shape mismatch");
    assert!(tol > 0.0, "tolerance must be positive");
    if n == 1 {
        return vec![sym[0]];
    }
    let mut a = sym.to_vec();
    // Entries below this cannot push the off-diagonal norm above tol even
    // if every off-diagonal slot held one.
    let elem_tol = tol / (n as f64);
    const MAX_SWEEPS: usize = 64;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a, n) < tol {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= elem_tol {
                    continue;
                }
                // Rotation angle that annihilates a_pq (Golub & Van Loan).
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A <- Jᵀ A J with J the plane rotation in (p, q).
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    eig
}

/// Spectral norm of a dense matrix: the square root of the largest
/// eigenvalue of the Gram matrix MᵀM, computed with the Jacobi solver.
pub(crate) fn spectral_norm(mat: &[f64], n: usize, tol: f64) -> f64 {
    assert_eq!(mat.len(), n * n, "matrix shape mismatch");
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for k in 0..n {
                s += mat[k * n + i] * mat[k * n + j];
            }
            gram[i * n + j] = s;
            gram[j * n + i] = s;
        }
    }
    let eig = jacobi_eigenvalues(&gram, n, tol);
    eig.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Solves the dense system `a x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot degenerates.
pub(crate) fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * x[k];
        }
        x[col] = s / a[col * n + col];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Result of a min-norm-point computation: the nearest point of the convex
/// hull to the origin and the convex weights over the input vertices that
/// realize it.
pub(crate) struct MinNormResult {
    pub point: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Nearest point to the origin in the convex hull of `vertices` (Wolfe's
/// min-norm-point algorithm).
///
/// The algorithm maintains a "corral" of affinely independent vertices and
/// alternates between adding the vertex that most violates optimality and
/// re-solving the affine least-norm problem on the corral, dropping vertices
/// whose weight would turn negative. It terminates finitely in exact
/// arithmetic; here termination is guarded by a scaled duality tolerance and
/// an iteration cap.
pub(crate) fn min_norm_point(vertices: &[Vec<f64>], dim: usize) -> MinNormResult {
    assert!(!vertices.is_empty(), "hull needs at least one vertex");
    // Exact duplicates would make the corral solve singular; collapse them
    // and fold the weights back onto the first occurrence at the end.
    let mut unique: Vec<usize> = Vec::new();
    for (i, v) in vertices.iter().enumerate() {
        assert_eq!(v.len(), dim, "vertex dimension mismatch");
        if !unique.iter().any(|&u| vertices[u] == *v) {
            unique.push(i);
        }
    }

    let norm2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();

    let scale2 = unique
        .iter()
        .map(|&i| norm2(&vertices[i]))
        .fold(0.0f64, f64::max)
        .max(1e-30);
    let eps = 1e-12 * scale2;

    // Corral: indices into `unique` plus their convex weights.
    let start = (0..unique.len())
        .min_by(|&i, &j| {
            norm2(&vertices[unique[i]])
                .partial_cmp(&norm2(&vertices[unique[j]]))
                .unwrap()
        })
        .unwrap();
    let mut corral: Vec<usize> = vec![start];
    let mut w: Vec<f64> = vec![1.0];
    let mut x = vertices[unique[start]].clone();

    let max_major = 8 * unique.len() + 64;
    for _ in 0..max_major {
        // Most violating vertex: the one minimizing <x, v>.
        let mut best = 0;
        let mut best_val = f64::INFINITY;
        for (ui, &vi) in unique.iter().enumerate() {
            let val = dot(&x, &vertices[vi]);
            if val < best_val {
                best_val = val;
                best = ui;
            }
        }
        if best_val > norm2(&x) - eps || corral.contains(&best) {
            break;
        }
        corral.push(best);
        w.push(0.0);

        // Minor cycle: pull the weights toward the affine minimizer over
        // the corral until it is a proper convex combination.
        loop {
            let m = corral.len();
            // Affine least-norm: minimize ‖Σ β_i s_i‖² subject to Σ β_i = 1.
            // KKT system [[G, 1], [1ᵀ, 0]] (β, μ) = (0, 1) with G = SᵀS.
            let mut sys = vec![0.0; (m + 1) * (m + 1)];
            let mut rhs = vec![0.0; m + 1];
            for i in 0..m {
                for j in 0..m {
                    sys[i * (m + 1) + j] =
                        dot(&vertices[unique[corral[i]]], &vertices[unique[corral[j]]]);
                }
                sys[i * (m + 1) + m] = 1.0;
                sys[m * (m + 1) + i] = 1.0;
            }
            rhs[m] = 1.0;
            let beta = match solve_dense(&mut sys, &mut rhs, m + 1) {
                Some(mut sol) => {
                    sol.truncate(m);
                    sol
                }
                // Affinely dependent corral (numerically); keep current w.
                None => break,
            };
            let delta = 1e-12;
            if beta.iter().all(|&b| b > delta) {
                w = beta;
                break;
            }
            // Step from w toward beta until the first weight hits zero.
            let mut theta = 1.0f64;
            for i in 0..m {
                if beta[i] <= delta && w[i] - beta[i] > 0.0 {
                    theta = theta.min(w[i] / (w[i] - beta[i]));
                }
            }
            for i in 0..m {
                w[i] = (1.0 - theta) * w[i] + theta * beta[i];
                if w[i] < delta {
                    w[i] = 0.0;
                }
            }
            // Drop zero-weight vertices, keeping at least one member.
            let mut i = 0;
            while i < corral.len() {
                if w[i] == 0.0 && corral.len() > 1 {
                    corral.remove(i);
                    w.remove(i);
                } else {
                    i += 1;
                }
            }
            // Renormalize against accumulated rounding.
            let total: f64 = w.iter().sum();
            if total > 0.0 {
                for wi in &mut w {
                    *wi /= total;
                }
            }
        }

        x = vec![0.0; dim];
        for (i, &ci) in corral.iter().enumerate() {
            for d in 0..dim {
                x[d] += w[i] * vertices[unique[ci]][d];
            }
        }
    }

    let mut weights = vec![0.0; vertices.len()];
    for (i, &ci) in corral.iter().enumerate() {
        weights[unique[ci]] += w[i];
    }
    MinNormResult { point: x, weights }
}
