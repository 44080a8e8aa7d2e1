//! Galerkin discretization in the basis of unperturbed eigenfunctions.
//!
//! For `i ∈ [−m, m]` the basis has `v_i = (1,1)ᵀe^{iix}/(2√π)` and
//! `w_i = (−1,1)ᵀe^{−iix}/(2√π)`, both with unperturbed eigenvalue `i`.
//! Rows are ordered by `i`, `v` before `w`: `row(i, V) = 2(i+m)`,
//! `row(i, W) = 2(i+m) + 1`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use crate::dirac::{DiracOperator, SpinorField};
use crate::error::{Error, Result};
use crate::geometry::CoframeFamily;
use crate::grid::Grid;
use crate::hermitian;
use crate::scalar::{czero, Real};

/// Pre-symmetrization Hermiticity residual above which assembly fails.
pub const HERMITICITY_LIMIT: f64 = 1e-9;
/// Largest gap accepted inside a multiplicity-two cluster.
pub const PAIRING_TOLERANCE: f64 = 1e-8;
/// Largest distance of a tracked eigenvalue from its unperturbed value.
pub const CLUSTER_RADIUS: f64 = 0.4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisKind {
    V,
    W,
}

pub fn row(i: i64, kind: BasisKind, m: usize) -> usize {
    2 * (i + m as i64) as usize + usize::from(kind == BasisKind::W)
}

pub fn basis<T: Real>(i: i64, kind: BasisKind, grid: &Arc<Grid<T>>) -> SpinorField<T> {
    let a = T::one() / (T::lit(2.0) * T::PI().sqrt());
    let z = T::zero();
    match kind {
        BasisKind::V => SpinorField::plane_wave(Arc::clone(grid), i, [Complex::new(a, z), Complex::new(a, z)]),
        BasisKind::W => SpinorField::plane_wave(Arc::clone(grid), -i, [Complex::new(-a, z), Complex::new(a, z)]),
    }
}

fn index_map(m: usize) -> Vec<(i64, BasisKind)> {
    let m = m as i64;
    (-m..=m).flat_map(|i| [(i, BasisKind::V), (i, BasisKind::W)]).collect()
}

#[derive(Clone, Debug)]
pub struct GalerkinMatrix<T> {
    m: usize,
    entries: Vec<Complex<T>>,
    hermiticity_residual: T,
}

impl<T: Real> GalerkinMatrix<T> {
    /// `H[row(j,b), row(i,a)] = ⟨W φ_i^a, φ_j^b⟩`, then symmetrized.
    pub fn assemble(op: &DiracOperator<T>, m: usize) -> Result<Self> {
        let grid = op.grid();
        let required = 4 * m + 4;
        if grid.len() < required {
            return Err(Error::UnderResolved { samples: grid.len(), degree: 2 * m + 1, required });
        }
        let idx = index_map(m);
        let order = idx.len();
        let basis_fns: Vec<SpinorField<T>> = idx.iter().map(|&(i, k)| basis(i, k, grid)).collect();
        let columns: Vec<Vec<Complex<T>>> = basis_fns
            .par_iter()
            .map(|phi| {
                let w_phi = op.apply(phi);
                basis_fns.iter().map(|psi| w_phi.inner(psi)).collect()
            })
            .collect();

        let mut entries = vec![czero::<T>(); order * order];
        for (c, col) in columns.iter().enumerate() {
            for (r, &z) in col.iter().enumerate() {
                entries[r * order + c] = z;
            }
        }
        let mut residual = T::zero();
        for r in 0..order {
            for c in r..order {
                residual = residual.max((entries[r * order + c] - entries[c * order + r].conj()).norm());
            }
        }
        log::debug!("galerkin m={m}: pre-symmetrization residual {residual:e}");
        if residual > T::tol(HERMITICITY_LIMIT) {
            return Err(Error::GridUnderResolution {
                residual: residual.to_f64().unwrap_or(f64::NAN),
                limit: HERMITICITY_LIMIT,
            });
        }
        let half = T::lit(0.5);
        for r in 0..order {
            for c in r..order {
                let s = (entries[r * order + c] + entries[c * order + r].conj()) * half;
                entries[r * order + c] = s;
                entries[c * order + r] = s.conj();
            }
        }
        Ok(Self { m, entries, hermiticity_residual: residual })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `2(2m+1)`.
    pub fn order(&self) -> usize {
        2 * (2 * self.m + 1)
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex<T> {
        self.entries[r * self.order() + c]
    }

    /// `max |H − H*|` before symmetrization.
    pub fn hermiticity_residual(&self) -> T {
        self.hermiticity_residual
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        Ok(hermitian::eigh(&self.entries, self.order(), false)?.values)
    }

    /// Row-major text dump with `re+imi` entries.
    pub fn dump(&self) -> String {
        let n = self.order();
        let mut out = String::new();
        for r in 0..n {
            let line: Vec<String> = (0..n)
                .map(|c| {
                    let z = self.entry(r, c);
                    format!("{:.16e}{}{:.16e}i", z.re, if z.im.is_sign_negative() { "" } else { "+" }, z.im)
                })
                .collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackedPair<T> {
    pub mean: T,
    pub gap: T,
}

#[derive(Clone, Debug)]
pub struct SpectrumReport<T> {
    pub eps: T,
    pub m: usize,
    /// Ascending, `2(2m+1)` entries.
    pub eigenvalues: Vec<T>,
}

impl<T: Real> SpectrumReport<T> {
    pub fn new(eps: T, m: usize, mut eigenvalues: Vec<T>) -> Self {
        eigenvalues.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        Self { eps, m, eigenvalues }
    }

    /// Largest trackable `|n|`: `m − ceil(m/5)`.
    pub fn track_limit(&self) -> i64 {
        (self.m - self.m.div_ceil(5)) as i64
    }

    /// Consecutive eigenvalues grouped in twos as `(mean, gap)`.
    pub fn pairs(&self) -> Vec<TrackedPair<T>> {
        let half = T::lit(0.5);
        self.eigenvalues
            .chunks_exact(2)
            .map(|w| TrackedPair { mean: (w[0] + w[1]) * half, gap: (w[1] - w[0]).abs() })
            .collect()
    }

    pub fn max_pair_gap(&self) -> T {
        self.pairs().iter().map(|p| p.gap).fold(T::zero(), T::max)
    }

    /// The two eigenvalues nearest `n`.
    pub fn track_pair(&self, n: i64) -> Result<TrackedPair<T>> {
        let limit = self.track_limit();
        if n.abs() > limit {
            return Err(Error::ModeOutOfRange { n, limit });
        }
        let target = T::from_i64(n).unwrap();
        let mut near: Vec<T> = self.eigenvalues.clone();
        near.sort_by(|a, b| (*a - target).abs().partial_cmp(&(*b - target).abs()).expect("finite"));
        let (a, b) = (near[0], near[1]);
        let distance = (a - target).abs().max((b - target).abs());
        if distance > T::lit(CLUSTER_RADIUS) {
            return Err(Error::ClusterAmbiguity {
                n,
                radius: CLUSTER_RADIUS,
                distance: distance.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(TrackedPair { mean: (a + b) * T::lit(0.5), gap: (a - b).abs() })
    }

    /// Every trackable mode.
    pub fn tracked(&self) -> BTreeMap<i64, Result<TrackedPair<T>>> {
        let l = self.track_limit();
        (-l..=l).map(|n| (n, self.track_pair(n))).collect()
    }
}

/// Galerkin matrix of the family at `eps`.
pub fn matrix_at<T: Real>(family: &CoframeFamily<T>, eps: T, m: usize, grid: &Arc<Grid<T>>) -> Result<GalerkinMatrix<T>> {
    let op = DiracOperator::assemble(&family.metric_at(eps, grid)?)?;
    GalerkinMatrix::assemble(&op, m)
}

pub fn spectrum_at<T: Real>(family: &CoframeFamily<T>, eps: T, m: usize, grid: &Arc<Grid<T>>) -> Result<SpectrumReport<T>> {
    let h = matrix_at(family, eps, m, grid)?;
    Ok(SpectrumReport::new(eps, m, h.eigenvalues()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    fn grid() -> Arc<Grid<f64>> {
        Arc::new(Grid::for_truncation(25))
    }

    #[test]
    fn basis_is_orthonormal() {
        let g = Arc::new(Grid::<f64>::new(32).unwrap());
        let idx = index_map(3);
        for &(i, a) in &idx {
            for &(j, b) in &idx {
                let ip = basis(i, a, &g).inner(&basis(j, b, &g));
                let expected = if (i, a) == (j, b) { 1.0 } else { 0.0 };
                assert!((ip - Complex::new(expected, 0.0)).norm() < 1e-14, "{i}{a:?} {j}{b:?}");
            }
        }
        assert!((basis(0, BasisKind::V, &g).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn index_map_layout() {
        assert_eq!(row(-2, BasisKind::V, 2), 0);
        assert_eq!(row(-2, BasisKind::W, 2), 1);
        assert_eq!(row(2, BasisKind::W, 2), 9);
        assert_eq!(index_map(25).len(), 102);
    }

    #[test]
    fn unperturbed_matrix_is_diagonal() {
        let g = Arc::new(Grid::<f64>::new(64).unwrap());
        let h = GalerkinMatrix::assemble(&DiracOperator::unperturbed(Arc::clone(&g)), 2).unwrap();
        assert_eq!(h.order(), 10);
        for r in 0..10 {
            for c in 0..10 {
                let expected = if r == c { (r / 2) as f64 - 2.0 } else { 0.0 };
                assert!((h.entry(r, c) - Complex::new(expected, 0.0)).norm() < 1e-13);
            }
        }
        let ev = h.eigenvalues().unwrap();
        let expected = [-2.0, -2.0, -1.0, -1.0, 0.0, 0.0, 1.0, 1.0, 2.0, 2.0];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn temp_coframe_matrix_is_shifted_diagonal() {
        let g = grid();
        let eps = 0.2;
        let h = matrix_at(&families::temp_coframe::<f64>(), eps, 5, &g).unwrap();
        let shift = -eps * eps / (2.0 * (1.0 - eps * eps));
        for r in 0..h.order() {
            for c in 0..h.order() {
                let expected = if r == c { (r / 2) as f64 - 5.0 + shift } else { 0.0 };
                assert!((h.entry(r, c) - Complex::new(expected, 0.0)).norm() < 1e-12, "({r},{c})");
            }
        }
        assert!(h.hermiticity_residual() < 1e-12);
    }

    #[test]
    fn track_pair_contract() {
        let g = grid();
        let s = spectrum_at(&families::temp_coframe::<f64>(), 0.2, 25, &g).unwrap();
        assert_eq!(s.eigenvalues.len(), 102);
        let p = s.track_pair(0).unwrap();
        assert!((p.mean + 0.0208333).abs() < 5e-8 && p.gap < 1e-10);
        assert_eq!(s.track_limit(), 20);
        assert_eq!(s.track_pair(21).unwrap_err(), Error::ModeOutOfRange { n: 21, limit: 20 });
        assert!(s.max_pair_gap() < 1e-8);

        let zero = spectrum_at(&families::temp_coframe::<f64>(), 0.0, 25, &g).unwrap();
        for n in -2..=2 {
            let p = zero.track_pair(n).unwrap();
            assert!((p.mean - n as f64).abs() < 1e-13 && p.gap < 1e-13);
        }
    }

    #[test]
    fn cluster_ambiguity_detected() {
        let s = SpectrumReport::new(0.0, 10, vec![0.0, 0.0, 0.5, 0.5, 1.6, 1.6]);
        assert!(matches!(s.track_pair(1), Err(Error::ClusterAmbiguity { n: 1, .. })));
    }

    #[test]
    fn coarse_grid_rejected() {
        let g = Arc::new(Grid::<f64>::new(16).unwrap());
        let op = DiracOperator::unperturbed(Arc::clone(&g));
        assert!(matches!(GalerkinMatrix::assemble(&op, 5), Err(Error::UnderResolved { .. })));
    }

    #[test]
    fn dump_format() {
        let g = Arc::new(Grid::<f64>::new(16).unwrap());
        let h = GalerkinMatrix::assemble(&DiracOperator::unperturbed(Arc::clone(&g)), 1).unwrap();
        let d = h.dump();
        assert_eq!(d.lines().count(), 6);
        let first = d.lines().next().unwrap().split(' ').next().unwrap();
        assert!(first.ends_with('i'));
        let split = first[1..].find(['+', '-']).unwrap() + 1;
        let re: f64 = first[..split].parse().unwrap();
        let im: f64 = first[split..first.len() - 1].parse().unwrap();
        assert!((re + 1.0).abs() < 1e-14 && im.abs() < 1e-14, "{first}");
        assert_eq!(d.lines().next().unwrap().split(' ').count(), 6);
    }
}
