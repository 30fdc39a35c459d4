//! Small dense 4×4 complex kernels: products, exponential, Hermitian eigensolver.

use crate::scalar::{cr, czero, Real, C};

pub(crate) type Mat4<T> = [[C<T>; 4]; 4];

pub(crate) fn zeros<T: Real>() -> Mat4<T> {
    [[czero(); 4]; 4]
}

pub(crate) fn identity<T: Real>() -> Mat4<T> {
    let mut m = zeros();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = cr(T::one());
    }
    m
}

/// Dense product that skips exact zeros of the left factor. Generators and
/// O-operators are block-sparse, so this removes most of the work.
pub(crate) fn matmul<T: Real>(a: &Mat4<T>, b: &Mat4<T>) -> Mat4<T> {
    let mut out = zeros();
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            if aik.re == T::zero() && aik.im == T::zero() {
                continue;
            }
            for j in 0..4 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub(crate) fn one_norm<T: Real>(a: &Mat4<T>) -> T {
    let mut best = T::zero();
    for j in 0..4 {
        let mut s = T::zero();
        for row in a {
            s += row[j].norm();
        }
        best = best.max(s);
    }
    best
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub(crate) fn expm<T: Real>(a: &Mat4<T>) -> Mat4<T> {
    let norm = one_norm(a);
    let mut squarings = 0u32;
    let mut scale = T::one();
    let half = T::lit(0.5);
    while norm * scale > half {
        scale *= half;
        squarings += 1;
    }
    let mut scaled = *a;
    for row in scaled.iter_mut() {
        for z in row.iter_mut() {
            *z *= scale;
        }
    }
    // ||A|| <= 1/2, 14 terms are below f64 round-off.
    let mut result = identity();
    let mut term = identity();
    for n in 1..=14 {
        term = matmul(&term, &scaled);
        let inv = T::one() / T::from_usize_lossy(n);
        for row in term.iter_mut() {
            for z in row.iter_mut() {
                *z *= inv;
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// Eigen-decomposition of a Hermitian 4×4 matrix by cyclic complex Jacobi
/// rotations. Returns eigenvalues (unsorted) and the unitary whose columns
/// are the eigenvectors.
pub(crate) fn hermitian_eigen<T: Real>(h: &Mat4<T>) -> ([T; 4], Mat4<T>) {
    let mut a = *h;
    // Symmetrize so round-off asymmetry does not leak into the rotations.
    for i in 0..4 {
        a[i][i] = cr(a[i][i].re);
        for j in (i + 1)..4 {
            let avg = (a[i][j] + a[j][i].conj()) * T::lit(0.5);
            a[i][j] = avg;
            a[j][i] = avg.conj();
        }
    }
    let mut v = identity::<T>();
    let eps = T::epsilon();
    for _sweep in 0..64 {
        let mut off = T::zero();
        let mut scale = T::zero();
        for i in 0..4 {
            scale += a[i][i].norm_sqr();
            for j in 0..4 {
                if i != j {
                    off += a[i][j].norm_sqr();
                }
            }
        }
        if off <= eps * eps * scale.max(T::min_positive_value()) {
            break;
        }
        for p in 0..4 {
            for q in (p + 1)..4 {
                let apq = a[p][q];
                let mag = apq.norm();
                if mag <= T::min_positive_value() {
                    continue;
                }
                // Remove the phase so the 2×2 block becomes real symmetric.
                let phase = apq / mag;
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                let theta = (aqq - app) / (T::lit(2.0) * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let t = if theta == T::zero() { T::one() } else { t };
                let cth = T::one() / (t * t + T::one()).sqrt();
                let sth = t * cth;
                // Rotation R acting on columns p, q:
                // col_p' = c col_p - s conj(phase) col_q ; col_q' = s phase col_p + c col_q
                let sp = phase * sth;
                let spc = phase.conj() * sth;
                for k in 0..4 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = akp * cth - akq * spc;
                    a[k][q] = akp * sp + akq * cth;
                }
                for k in 0..4 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = apk * cth - aqk * sp;
                    a[q][k] = apk * spc + aqk * cth;
                }
                a[p][q] = czero();
                a[q][p] = czero();
                a[p][p] = cr(a[p][p].re);
                a[q][q] = cr(a[q][q].re);
                for k in 0..4 {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = vkp * cth - vkq * spc;
                    v[k][q] = vkp * sp + vkq * cth;
                }
            }
        }
    }
    ([a[0][0].re, a[1][1].re, a[2][2].re, a[3][3].re], v)
}

/// Rebuilds `V diag(f(λ)) V†`.
pub(crate) fn spectral_map<T: Real>(vals: &[T; 4], vecs: &Mat4<T>, f: impl Fn(T) -> T) -> Mat4<T> {
    let mut out = zeros();
    for (k, &lam) in vals.iter().enumerate() {
        let w = f(lam);
        if w == T::zero() {
            continue;
        }
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] += vecs[i][k] * vecs[j][k].conj() * w;
            }
        }
    }
    out
}
