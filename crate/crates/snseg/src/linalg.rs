//! Small dense symmetric linear algebra for the d x d self-normalizers.
//!
//! The hot path (one quadratic form per window) uses an allocation-free
//! Cholesky solve on caller-owned scratch; windows with a singular or
//! near-singular normalizer fall back to a Jacobi eigendecomposition and a
//! Moore-Penrose generalized inverse with an explicit range test.

/// Relative pivot floor below which Cholesky is treated as failed.
const PIVOT_REL_TOL: f64 = 1e-12;

/// Eigenvalues below `RANK_REL_TOL * lambda_max` count as zero.
const RANK_REL_TOL: f64 = 1e-12;

/// The contrast is "outside the range" of the normalizer when more than
/// this relative share of its squared norm falls in the null space.
const RANGE_REL_TOL: f64 = 1e-16;

/// In-place lower Cholesky of a row-major `d x d` matrix. Only the lower
/// triangle of `a` is referenced or written. Fails on pivots that are not
/// clearly positive relative to the largest diagonal entry.
pub(crate) fn cholesky_in_place(a: &mut [f64], d: usize) -> bool {
    let mut max_diag = 0.0_f64;
    for j in 0..d {
        max_diag = max_diag.max(a[j * d + j].abs());
    }
    if max_diag <= 0.0 {
        return false;
    }
    let floor = max_diag * PIVOT_REL_TOL;
    for j in 0..d {
        let mut diag = a[j * d + j];
        for k in 0..j {
            let l = a[j * d + k];
            diag -= l * l;
        }
        if diag <= floor {
            return false;
        }
        let l_jj = diag.sqrt();
        a[j * d + j] = l_jj;
        for i in (j + 1)..d {
            let mut v = a[i * d + j];
            for k in 0..j {
                v -= a[i * d + k] * a[j * d + k];
            }
            a[i * d + j] = v / l_jj;
        }
    }
    true
}

/// Given the lower Cholesky factor `l` of `V`, returns `b' V^{-1} b` by one
/// forward substitution: `||L^{-1} b||^2`. `b` is clobbered.
pub(crate) fn quad_form_cholesky(l: &[f64], d: usize, b: &mut [f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..d {
        let mut v = b[i];
        for k in 0..i {
            v -= l[i * d + k] * b[k];
        }
        let y = v / l[i * d + i];
        b[i] = y;
        acc += y * y;
    }
    acc
}

/// In-place LDL' factorization of the lower triangle of `m` (no square
/// roots; one division per pivot). Stored entries are the scaled columns
/// `L[i][j] * d_j` with the pivot reciprocals in `inv`. `false` when a
/// pivot falls below the relative floor; callers then take the
/// pseudo-inverse route.
pub(crate) fn ldl_factor(m: &mut [f64], d: usize, w: &mut [f64], inv: &mut [f64]) -> bool {
    let mut max_diag = 0.0_f64;
    for j in 0..d {
        max_diag = max_diag.max(m[j * d + j].abs());
    }
    if max_diag <= 0.0 {
        return false;
    }
    let floor = max_diag * PIVOT_REL_TOL;
    for j in 0..d {
        let mut dj = m[j * d + j];
        for k in 0..j {
            let l = m[j * d + k];
            w[k] = l * inv[k];
            dj -= l * w[k];
        }
        if dj <= floor {
            return false;
        }
        inv[j] = 1.0 / dj;
        for i in (j + 1)..d {
            let mut v = m[i * d + j];
            for k in 0..j {
                v -= m[i * d + k] * w[k];
            }
            m[i * d + j] = v;
        }
    }
    true
}

/// `b' M^{-1} b` from an [`ldl_factor`] result. `b` is clobbered.
#[inline]
pub(crate) fn ldl_solve_quad(m: &[f64], d: usize, inv: &[f64], b: &mut [f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..d {
        let mut v = b[i];
        for k in 0..i {
            v -= m[i * d + k] * inv[k] * b[k];
        }
        b[i] = v;
        acc += v * v * inv[i];
    }
    acc
}

/// Factor-and-solve in one call.
pub(crate) fn ldl_quad_form(
    m: &mut [f64],
    d: usize,
    b: &mut [f64],
    w: &mut [f64],
    inv: &mut [f64],
) -> Option<f64> {
    if ldl_factor(m, d, w, inv) {
        Some(ldl_solve_quad(m, d, inv, b))
    } else {
        None
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric row-major `d x d` matrix.
/// Returns eigenvalues and column-major eigenvectors (`vecs[j*d..][i]` is
/// component `i` of eigenvector `j`).
pub(crate) fn sym_eigen(a: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    let mut q = vec![0.0; d * d];
    for j in 0..d {
        q[j * d + j] = 1.0;
    }
    if d == 1 {
        return (vec![m[0]], q);
    }
    let frob: f64 = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let stop = frob * 1e-15 + f64::MIN_POSITIVE;
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                off += m[i * d + j] * m[i * d + j];
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for i in 0..d {
            for j in (i + 1)..d {
                let apq = m[i * d + j];
                if apq == 0.0 {
                    continue;
                }
                let app = m[i * d + i];
                let aqq = m[j * d + j];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..d {
                    let mik = m[i * d + k];
                    let mjk = m[j * d + k];
                    m[i * d + k] = c * mik - s * mjk;
                    m[j * d + k] = s * mik + c * mjk;
                }
                for k in 0..d {
                    let mki = m[k * d + i];
                    let mkj = m[k * d + j];
                    m[k * d + i] = c * mki - s * mkj;
                    m[k * d + j] = s * mki + c * mkj;
                }
                for k in 0..d {
                    let qki = q[i * d + k];
                    let qkj = q[j * d + k];
                    q[i * d + k] = c * qki - s * qkj;
                    q[j * d + k] = s * qki + c * qkj;
                }
            }
        }
    }
    let vals: Vec<f64> = (0..d).map(|i| m[i * d + i]).collect();
    (vals, q)
}

/// `b' V^+ b` via the generalized inverse, with a range test: when a
/// non-negligible share of `b` lies in the (numerical) null space of `V`,
/// the window carries no usable evidence and the statistic is 0.
pub(crate) fn quad_form_pinv(v: &[f64], d: usize, b: &[f64]) -> f64 {
    let (vals, vecs) = sym_eigen(v, d);
    let lambda_max = vals.iter().cloned().fold(0.0_f64, f64::max);
    let b_norm2: f64 = b.iter().map(|x| x * x).sum();
    if lambda_max <= 0.0 {
        return 0.0;
    }
    let rank_tol = lambda_max * RANK_REL_TOL * d as f64;
    let mut acc = 0.0;
    let mut null_mass = 0.0;
    for j in 0..d {
        let z: f64 = (0..d).map(|i| vecs[j * d + i] * b[i]).sum();
        if vals[j] > rank_tol {
            acc += z * z / vals[j];
        } else {
            null_mass += z * z;
        }
    }
    if null_mass > RANGE_REL_TOL * b_norm2 {
        return 0.0;
    }
    // Subnormal eigenvalues can push the ratio past the float range; such
    // windows are rounding dust, not evidence.
    if acc.is_finite() {
        acc
    } else {
        0.0
    }
}

/// `b' V^{-1} b` for a symmetric positive semidefinite `V`, never failing:
/// Cholesky when `V` is comfortably positive definite, otherwise the
/// pseudo-inverse route. `scratch` must hold at least `2 d^2` entries.
pub(crate) fn quad_form_spd(v: &[f64], d: usize, b: &[f64], scratch: &mut [f64]) -> f64 {
    if d == 1 {
        let vv = v[0];
        if vv > 0.0 {
            let t = b[0] * b[0] / vv;
            // A zero-ish normalizer with a real contrast means the window is
            // degenerate, not infinitely significant.
            if t.is_finite() {
                return t;
            }
        }
        return quad_form_pinv(v, 1, b);
    }
    let (mat, rhs) = scratch.split_at_mut(d * d);
    mat[..d * d].copy_from_slice(v);
    if cholesky_in_place(mat, d) {
        rhs[..d].copy_from_slice(b);
        quad_form_cholesky(mat, d, &mut rhs[..d])
    } else {
        quad_form_pinv(v, d, b)
    }
}

/// Smallest eigenvalue, used by tests asserting positive semidefiniteness.
#[cfg(test)]
pub(crate) fn min_eigenvalue(v: &[f64], d: usize) -> f64 {
    let (vals, _) = sym_eigen(v, d);
    vals.into_iter().fold(f64::INFINITY, f64::min)
}
