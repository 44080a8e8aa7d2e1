//! Coframe families `e(x;ε) = I + εE1 + ε²E2` on the torus, their metrics,
//! the perturbation matrices `h`, `k` and pointwise frame inversion.
//!
//! Matrices are indexed `E[j][α]`: row `j` is the coframe covector `e^j`,
//! column `α` the coordinate direction, with index 0 the circle coordinate
//! every field depends on. The metric is `g = EᵀE` and the frame is
//! `(Eᵀ)⁻¹`, so `frame[j][α] = e_j^α`.

use std::sync::Arc;

use num_complex::Complex;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::{int, Real, Scalar};
use crate::trigpoly::{Matrix3Field, TrigPoly};

pub type Mat3<T> = [[T; 3]; 3];
pub type Samples3<T> = [[Vec<T>; 3]; 3];

#[derive(Clone, Debug)]
pub struct CoframeFamily<T> {
    e1: Matrix3Field<T>,
    e2: Matrix3Field<T>,
}

impl<T: Scalar> PartialEq for CoframeFamily<T> {
    fn eq(&self, other: &Self) -> bool {
        self.e1 == other.e1 && self.e2 == other.e2
    }
}

impl<T: Scalar> CoframeFamily<T> {
    /// Rejects entries that are not real-valued functions.
    pub fn new(e1: Matrix3Field<T>, e2: Matrix3Field<T>) -> Result<Self> {
        for m in [&e1, &e2] {
            for row in 0..3 {
                for col in 0..3 {
                    if !m.get(row, col).is_real() {
                        return Err(Error::NotReal { row, col });
                    }
                }
            }
        }
        Ok(Self { e1, e2 })
    }

    /// Family linear in ε.
    pub fn linear(e1: Matrix3Field<T>) -> Result<Self> {
        Self::new(e1, Matrix3Field::zero())
    }

    /// Synthesizes a coframe whose metric is `I + εh + (ε²/4)k + O(ε³)`.
    ///
    /// Uses `E1 = h/2` and `E2 = (k − h²)/8`.
    pub fn from_perturbation(h: &Matrix3Field<T>, k: &Matrix3Field<T>) -> Result<Self> {
        h.validate_symmetric_real()?;
        k.validate_symmetric_real()?;
        let e1 = h.scale_real(&(T::one() / int::<T>(2)));
        let e2 = (k - &h.matmul(h)).scale_real(&(T::one() / int::<T>(8)));
        Ok(Self { e1, e2 })
    }

    /// The unperturbed family.
    pub fn trivial() -> Self {
        Self { e1: Matrix3Field::zero(), e2: Matrix3Field::zero() }
    }

    pub fn e1(&self) -> &Matrix3Field<T> {
        &self.e1
    }

    pub fn e2(&self) -> &Matrix3Field<T> {
        &self.e2
    }

    pub fn coframe_at(&self, eps: &T) -> Matrix3Field<T> {
        let eps2 = eps.clone() * eps.clone();
        &(&Matrix3Field::identity() + &self.e1.scale_real(eps)) + &self.e2.scale_real(&eps2)
    }

    /// `g = eᵀe`, exact.
    pub fn metric_poly_at(&self, eps: &T) -> Matrix3Field<T> {
        let e = self.coframe_at(eps);
        e.transpose().matmul(&e)
    }

    /// `h = E1 + E1ᵀ`, the ε-coefficient of the metric.
    pub fn extract_h(&self) -> Matrix3Field<T> {
        &self.e1 + &self.e1.transpose()
    }

    /// `k = 4(E1ᵀE1 + E2 + E2ᵀ)`, four times the ε²-coefficient of the metric.
    pub fn extract_k(&self) -> Matrix3Field<T> {
        let quad = &(&self.e1.transpose().matmul(&self.e1) + &self.e2) + &self.e2.transpose();
        quad.scale_real(&int::<T>(4))
    }

    pub fn to_real<U: Real>(&self) -> CoframeFamily<U> {
        CoframeFamily { e1: self.e1.to_real(), e2: self.e2.to_real() }
    }
}

impl<T: Real> CoframeFamily<T> {
    pub fn metric_at(&self, eps: T, grid: &Arc<Grid<T>>) -> Result<MetricSnapshot<T>> {
        MetricSnapshot::new(self, eps, grid)
    }

    /// Checks `det e > 0` on the grid for every ε in the list.
    pub fn check_admissible(&self, eps: &[T], grid: &Grid<T>) -> Result<()> {
        for &e in eps {
            let values = sample_matrix(&self.coframe_at(&e), grid);
            for idx in 0..grid.len() {
                let det = det3(&real_at(&values, idx));
                if !(det > T::zero()) {
                    return Err(Error::SingularCoframe { index: idx, eps: e.to_f64().unwrap_or(f64::NAN) });
                }
            }
        }
        Ok(())
    }

    /// Length of the circle `∫₀^{2π} √g₁₁ dx` by quadrature.
    pub fn arc_length(&self, eps: T, grid: &Arc<Grid<T>>) -> Result<T> {
        let snap = self.metric_at(eps, grid)?;
        let g11: Vec<T> = snap.g().get(0, 0).sample_real(grid).into_iter().map(Float::sqrt).collect();
        Ok(grid.integrate_real(&g11))
    }
}

fn sample_matrix<T: Real>(m: &Matrix3Field<T>, grid: &Grid<T>) -> Samples3<Complex<T>> {
    std::array::from_fn(|a| std::array::from_fn(|b| m.get(a, b).sample(grid)))
}

fn real_at<T: Real>(values: &Samples3<Complex<T>>, idx: usize) -> Mat3<T> {
    std::array::from_fn(|a| std::array::from_fn(|b| values[a][b][idx].re))
}

pub fn det3<T: Real>(m: &Mat3<T>) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse by cofactors; `None` when the determinant vanishes.
pub fn inv3<T: Real>(m: &Mat3<T>) -> Option<Mat3<T>> {
    let det = det3(m);
    if det == T::zero() || !det.is_finite() {
        return None;
    }
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    // adjugate is the transposed cofactor matrix
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    Some(adj.map(|row| row.map(|x| x / det)))
}

/// The geometry of one family member, sampled on a grid.
#[derive(Clone, Debug)]
pub struct MetricSnapshot<T> {
    eps: T,
    grid: Arc<Grid<T>>,
    coframe: Matrix3Field<T>,
    g: Matrix3Field<T>,
    coframe_values: Samples3<Complex<T>>,
    coframe_derivative: Samples3<Complex<T>>,
    frame: Samples3<T>,
    det_coframe: Vec<T>,
    sqrt_det_g: Vec<T>,
}

impl<T: Real> MetricSnapshot<T> {
    fn new(family: &CoframeFamily<T>, eps: T, grid: &Arc<Grid<T>>) -> Result<Self> {
        let singular = |index| Error::SingularCoframe { index, eps: eps.to_f64().unwrap_or(f64::NAN) };
        let coframe = family.coframe_at(&eps);
        let g = coframe.transpose().matmul(&coframe);
        let coframe_values = sample_matrix(&coframe, grid);
        let coframe_derivative = sample_matrix(&coframe.diff(), grid);
        let g_values = sample_matrix(&g, grid);

        let n = grid.len();
        let mut frame: Samples3<T> = std::array::from_fn(|_| std::array::from_fn(|_| vec![T::zero(); n]));
        let mut det_coframe = Vec::with_capacity(n);
        let mut sqrt_det_g = Vec::with_capacity(n);
        for idx in 0..n {
            let e = real_at(&coframe_values, idx);
            let det = det3(&e);
            if !(det > T::zero()) {
                return Err(singular(idx));
            }
            let gi = real_at(&g_values, idx);
            let minor2 = gi[0][0] * gi[1][1] - gi[0][1] * gi[1][0];
            let det_g = det3(&gi);
            if !(gi[0][0] > T::zero() && minor2 > T::zero() && det_g > T::zero()) {
                return Err(singular(idx));
            }
            let et = std::array::from_fn(|a| std::array::from_fn(|b| e[b][a]));
            let f = inv3(&et).ok_or_else(|| singular(idx))?;
            for j in 0..3 {
                for a in 0..3 {
                    frame[j][a][idx] = f[j][a];
                }
            }
            det_coframe.push(det);
            sqrt_det_g.push(det_g.sqrt());
        }
        Ok(Self {
            eps,
            grid: Arc::clone(grid),
            coframe,
            g,
            coframe_values,
            coframe_derivative,
            frame,
            det_coframe,
            sqrt_det_g,
        })
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn coframe(&self) -> &Matrix3Field<T> {
        &self.coframe
    }

    pub fn g(&self) -> &Matrix3Field<T> {
        &self.g
    }

    /// `e^j_α` on the grid.
    pub fn coframe_values(&self) -> &Samples3<Complex<T>> {
        &self.coframe_values
    }

    /// `d e^j_α / dx` on the grid, exact since the coframe is a trig polynomial.
    pub fn coframe_derivative(&self) -> &Samples3<Complex<T>> {
        &self.coframe_derivative
    }

    /// `e_j^α` on the grid.
    pub fn frame(&self) -> &Samples3<T> {
        &self.frame
    }

    pub fn det_coframe(&self) -> &[T] {
        &self.det_coframe
    }

    pub fn sqrt_det_g(&self) -> &[T] {
        &self.sqrt_det_g
    }

    /// `max |e_j^α e^k_α − δ_j^k|` over the grid.
    pub fn frame_residual(&self) -> T {
        let mut worst = T::zero();
        for idx in 0..self.grid.len() {
            for j in 0..3 {
                for k in 0..3 {
                    let mut s = T::zero();
                    for a in 0..3 {
                        s += self.frame[j][a][idx] * self.coframe_values[k][a][idx].re;
                    }
                    let target = if j == k { T::one() } else { T::zero() };
                    worst = worst.max((s - target).abs());
                }
            }
        }
        worst
    }

    /// `max |√det g · det(frame) − 1|` over the grid.
    pub fn volume_residual(&self) -> T {
        (0..self.grid.len())
            .map(|idx| {
                let f: Mat3<T> = std::array::from_fn(|a| std::array::from_fn(|b| self.frame[a][b][idx]));
                (self.sqrt_det_g[idx] * det3(&f) - T::one()).abs()
            })
            .fold(T::zero(), T::max)
    }
}

/// `(I + εh + (ε²/4)k)` as an exact matrix field, the metric to second order.
pub fn metric_expansion<T: Scalar>(h: &Matrix3Field<T>, k: &Matrix3Field<T>, eps: &T) -> Matrix3Field<T> {
    let quarter = eps.clone() * eps.clone() / int::<T>(4);
    &(&Matrix3Field::identity() + &h.scale_real(eps)) + &k.scale_real(&quarter)
}

/// First column of a matrix field as the 3-vector `(M_{00}, M_{10}, M_{20})`.
pub fn first_column<T: Scalar>(m: &Matrix3Field<T>) -> [TrigPoly<T>; 3] {
    std::array::from_fn(|a| m.get(a, 0).clone())
}
