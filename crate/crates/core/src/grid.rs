//! Uniform periodic grid on [0, 2π) with trapezoidal quadrature and
//! direct-sum discrete Fourier transforms.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{czero, Real};

/// Uniform grid `x_j = 2πj/N`.
///
/// Holds a table of the N-th roots of unity so that every Fourier sum is a
/// table lookup; with N in the low hundreds the direct O(N·D) transform is
/// cheap enough.
#[derive(Clone, Debug)]
pub struct Grid<T> {
    nodes: Vec<T>,
    roots: Vec<Complex<T>>,
}

impl<T: Real> Grid<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidGrid(n));
        }
        let step = T::TAU() / T::from_usize(n).expect("grid size");
        let nodes: Vec<T> = (0..n).map(|j| T::from_usize(j).unwrap() * step).collect();
        let roots = nodes.iter().map(|&x| Complex::new(x.cos(), x.sin())).collect();
        Ok(Self { nodes, roots })
    }

    /// Grid size used for Galerkin truncation `m`: `max(256, 8m + 16)`.
    pub fn for_truncation(m: usize) -> Self {
        Self::new((8 * m + 16).max(256)).expect("grid size is at least 256")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// Highest Fourier degree representable without touching the Nyquist mode.
    pub fn max_degree(&self) -> usize {
        self.len() / 2 - 1
    }

    /// `e^{ikx_j}`.
    pub fn exp(&self, k: i64, j: usize) -> Complex<T> {
        let n = self.len() as i64;
        let idx = (k.rem_euclid(n) as usize * j) % self.len();
        self.roots[idx]
    }

    /// Trapezoidal rule for `∫₀^{2π} f dx`.
    pub fn integrate(&self, values: &[Complex<T>]) -> Complex<T> {
        let sum = values.iter().fold(czero::<T>(), |acc, v| acc + v);
        sum * (T::TAU() / T::from_usize(self.len()).unwrap())
    }

    pub fn integrate_real(&self, values: &[T]) -> T {
        let sum = values.iter().fold(T::zero(), |acc, &v| acc + v);
        sum * (T::TAU() / T::from_usize(self.len()).unwrap())
    }

    /// Quadrature approximation of `(1/2π)∫ e^{-ikx} f(x) dx`.
    pub fn fourier_coefficient(&self, values: &[Complex<T>], k: i64) -> Complex<T> {
        debug_assert_eq!(values.len(), self.len());
        let mut acc = czero::<T>();
        for (j, v) in values.iter().enumerate() {
            acc = acc + v * self.exp(-k, j);
        }
        acc / T::from_usize(self.len()).unwrap()
    }

    /// Coefficients `c_{-D..=D}`.
    pub fn fourier_coefficients(&self, values: &[Complex<T>], degree: usize) -> Vec<Complex<T>> {
        let d = degree as i64;
        (-d..=d).map(|k| self.fourier_coefficient(values, k)).collect()
    }

    /// Evaluates `Σ c_k e^{ikx_j}` on the grid for coefficients `c_{-D..=D}`.
    pub fn synthesize(&self, coeffs: &[Complex<T>]) -> Vec<Complex<T>> {
        let d = (coeffs.len() / 2) as i64;
        (0..self.len())
            .map(|j| {
                coeffs
                    .iter()
                    .enumerate()
                    .fold(czero::<T>(), |acc, (idx, c)| acc + c * self.exp(idx as i64 - d, j))
            })
            .collect()
    }

    /// Spectral derivative at degree `N/2 - 1`.
    pub fn derivative(&self, values: &[Complex<T>]) -> Vec<Complex<T>> {
        let d = self.max_degree() as i64;
        let coeffs: Vec<Complex<T>> = (-d..=d)
            .map(|k| {
                let c = self.fourier_coefficient(values, k);
                c * Complex::new(T::zero(), T::from_i64(k).unwrap())
            })
            .collect();
        self.synthesize(&coeffs)
    }

    /// Inner product `⟨u, v⟩ = ∫ v* u dx` of scalar grid functions.
    pub fn inner(&self, u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
        let mut acc = czero::<T>();
        for (a, b) in u.iter().zip(v) {
            acc = acc + a * b.conj();
        }
        acc * (T::TAU() / T::from_usize(self.len()).unwrap())
    }
}
