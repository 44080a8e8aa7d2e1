//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{czero, Real};

pub const MAX_SWEEPS: usize = 60;

#[derive(Clone, Debug)]
pub struct Eigen<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// Column-major `n × n`; column `j` belongs to `values[j]`.
    pub vectors: Option<Vec<Complex<T>>>,
}

/// Eigen-decomposition of the row-major Hermitian matrix `a` of order `n`.
///
/// Only the upper triangle and diagonal are trusted; the lower triangle is
/// taken to be their conjugate.
pub fn eigh<T: Real>(a: &[Complex<T>], n: usize, want_vectors: bool) -> Result<Eigen<T>> {
    assert_eq!(a.len(), n * n, "matrix size mismatch");
    let mut m = a.to_vec();
    for i in 0..n {
        m[i * n + i] = Complex::new(m[i * n + i].re, T::zero());
        for j in 0..i {
            m[i * n + j] = m[j * n + i].conj();
        }
    }
    let mut v = want_vectors.then(|| {
        let mut id = vec![czero::<T>(); n * n];
        for i in 0..n {
            id[i * n + i] = Complex::new(T::one(), T::zero());
        }
        id
    });

    let frob = m.iter().map(|z| z.norm_sqr()).fold(T::zero(), |x, y| x + y).sqrt();
    let target = T::epsilon() * frob;
    let off_norm = |m: &[Complex<T>]| {
        let mut s = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                s += m[i * n + j].norm_sqr();
            }
        }
        (s + s).sqrt()
    };

    let mut converged = off_norm(&m) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, v.as_deref_mut(), n, p, q);
            }
        }
        converged = off_norm(&m) <= target;
    }
    log::trace!("jacobi converged after {sweeps} sweeps (order {n})");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].re.partial_cmp(&m[j * n + j].re).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| m[i * n + i].re).collect();
    let vectors = v.map(|v| {
        let mut out = vec![czero::<T>(); n * n];
        for (col, &src) in order.iter().enumerate() {
            for k in 0..n {
                out[col * n + k] = v[k * n + src];
            }
        }
        out
    });
    Ok(Eigen { values, vectors })
}

/// Annihilates `m[p][q]` with a phase-adjusted plane rotation.
fn rotate<T: Real>(m: &mut [Complex<T>], v: Option<&mut [Complex<T>]>, n: usize, p: usize, q: usize) {
    let apq = m[p * n + q];
    let r = apq.norm();
    if r <= T::min_positive_value() {
        return;
    }
    let phase = apq / r; // e^{iφ}
    let app = m[p * n + p].re;
    let aqq = m[q * n + q].re;
    let tau = (aqq - app) / (r + r);
    let t = tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt());
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;
    let ph = phase.conj(); // e^{-iφ}

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = m[k * n + p];
        let akq = m[k * n + q];
        let new_p = akp * c - ph * akq * s;
        let new_q = akp * s + ph * akq * c;
        m[k * n + p] = new_p;
        m[k * n + q] = new_q;
        m[p * n + k] = new_p.conj();
        m[q * n + k] = new_q.conj();
    }
    m[p * n + p] = Complex::new(app - t * r, T::zero());
    m[q * n + q] = Complex::new(aqq + t * r, T::zero());
    m[p * n + q] = czero();
    m[q * n + p] = czero();

    if let Some(v) = v {
        for k in 0..n {
            let vkp = v[k * n + p];
            let vkq = v[k * n + q];
            v[k * n + p] = vkp * c - ph * vkq * s;
            v[k * n + q] = vkp * s + ph * vkq * c;
        }
    }
}

/// `max_j ‖A x_j − λ_j x_j‖` for a decomposition with vectors.
pub fn residual<T: Real>(a: &[Complex<T>], n: usize, eig: &Eigen<T>) -> T {
    let vecs = eig.vectors.as_ref().expect("eigenvectors requested");
    let mut worst = T::zero();
    for (j, &lambda) in eig.values.iter().enumerate() {
        let x = &vecs[j * n..(j + 1) * n];
        let mut s = T::zero();
        for i in 0..n {
            let mut ax = czero::<T>();
            for k in 0..n {
                ax = ax + a[i * n + k] * x[k];
            }
            s += (ax - x[i] * lambda).norm_sqr();
        }
        worst = worst.max(s.sqrt());
    }
    worst
}
