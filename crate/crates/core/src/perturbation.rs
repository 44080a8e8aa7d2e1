//! Asymptotic coefficients of the eigenvalues `±1`:
//! `λ±(ε) = ±1 + λ±⁽¹⁾ε + λ±⁽²⁾ε² + O(ε³)`.
//!
//! Three independent routes are provided:
//!
//! * closed-form Fourier sums in `h` and `k` ([`lambda1_closed`], [`lambda2_closed`]),
//!   exact over rationals;
//! * the operator route ([`lambda1_operator`], [`lambda2_operator`]), applying
//!   `W⁽¹⁾`, `W⁽²⁾` and the reduced resolvent [`PseudoInverse`] on a grid;
//! * least-squares fits of tracked Galerkin eigenvalues ([`fit_expansion`]).

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use crate::dirac::{DiracOperator, SpinorField};
use crate::error::{Error, Result};
use crate::galerkin::{basis, spectrum_at, BasisKind};
use crate::geometry::CoframeFamily;
use crate::grid::Grid;
use crate::scalar::{cre, czero, int, ratio, Real, Scalar};
use crate::trigpoly::Matrix3Field;

/// Orthogonality threshold for inputs of the pseudoinverse.
pub const ORTHOGONALITY_LIMIT: f64 = 1e-9;
/// Off-diagonal threshold for the first-order degenerate block.
pub const SPLITTING_LIMIT: f64 = 1e-9;
/// Largest `ε` accepted by the fit.
pub const FIT_EPS_MAX: f64 = 0.15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    /// The eigenvalue `+1`.
    Plus,
    /// The eigenvalue `−1`.
    Minus,
}

impl Branch {
    pub fn n(self) -> i64 {
        match self {
            Branch::Plus => 1,
            Branch::Minus => -1,
        }
    }

    pub fn both() -> [Branch; 2] {
        [Branch::Plus, Branch::Minus]
    }
}

// ---------------------------------------------------------------------------
// Pseudoinverse

/// Inverse of `W⁰ − λ₀` on the orthogonal complement of its `λ₀`-eigenspace,
/// with the mode sum truncated at `|m| ≤ M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PseudoInverse {
    pub lambda0: i64,
    pub truncation: usize,
}

impl PseudoInverse {
    pub fn new(lambda0: i64, truncation: usize) -> Self {
        Self { lambda0, truncation }
    }

    /// `P f = ⟨f, v⟩v + ⟨f, w⟩w` for the `λ₀` eigenpair.
    pub fn projector<T: Real>(&self, f: &SpinorField<T>) -> SpinorField<T> {
        let v = basis(self.lambda0, BasisKind::V, f.grid());
        let w = basis(self.lambda0, BasisKind::W, f.grid());
        v.scale(f.inner(&v)).axpy(f.inner(&w), &w)
    }

    pub fn apply<T: Real>(&self, f: &SpinorField<T>) -> Result<SpinorField<T>> {
        let grid = f.grid();
        let v = basis(self.lambda0, BasisKind::V, grid);
        let w = basis(self.lambda0, BasisKind::W, grid);
        let overlap = f.inner(&v).norm().max(f.inner(&w).norm());
        if overlap > T::tol(ORTHOGONALITY_LIMIT) {
            return Err(Error::NotOrthogonal { lambda0: self.lambda0, overlap: overlap.to_f64().unwrap_or(f64::NAN) });
        }

        let top = grid.max_degree() as i64;
        let coeffs: Vec<[Complex<T>; 2]> = (-top..=top).map(|k| f.fourier_coefficient(k)).collect();
        let peak = coeffs.iter().flatten().map(|z| z.norm()).fold(T::zero(), T::max);
        let floor = T::tol(1e-12) * (T::one() + peak);
        let bandwidth = (-top..=top)
            .zip(&coeffs)
            .filter(|(_, c)| c[0].norm() > floor || c[1].norm() > floor)
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let required = bandwidth + self.lambda0.unsigned_abs() as usize + 1;
        if self.truncation < required {
            return Err(Error::TruncationTooSmall { truncation: self.truncation, required });
        }

        let half = T::lit(0.5);
        let limit = (self.truncation as i64).min(top);
        let l0 = self.lambda0;
        let mut modes = Vec::new();
        for k in -limit..=limit {
            let [f0, f1] = coeffs[(k + top) as usize];
            // projections on (1,1)e^{ikx} (eigenvalue k) and (−1,1)e^{ikx} (eigenvalue −k)
            let cv = (f0 + f1) * half;
            let cw = (f1 - f0) * half;
            let mut out = [czero::<T>(); 2];
            if k != l0 {
                let a = cv / T::from_i64(k - l0).unwrap();
                out[0] = out[0] + a;
                out[1] = out[1] + a;
            }
            if -k != l0 {
                let b = cw / T::from_i64(-k - l0).unwrap();
                out[0] = out[0] - b;
                out[1] = out[1] + b;
            }
            modes.push((k, out));
        }
        let n = grid.len();
        let comps = std::array::from_fn(|c| {
            (0..n).map(|j| modes.iter().fold(czero::<T>(), |acc, (k, out)| acc + out[c] * grid.exp(*k, j))).collect()
        });
        Ok(SpinorField::new(Arc::clone(grid), comps))
    }
}

// ---------------------------------------------------------------------------
// Operator route

/// The block `⟨W⁽¹⁾φ_a, φ_b⟩` over `{v_n, w_n}`, row-major.
pub fn first_order_block<T: Real>(h: &Matrix3Field<T>, branch: Branch, grid: &Arc<Grid<T>>) -> [[Complex<T>; 2]; 2] {
    let w1 = DiracOperator::first_order(h, Arc::clone(grid));
    let phi = [basis(branch.n(), BasisKind::V, grid), basis(branch.n(), BasisKind::W, grid)];
    let images = [w1.apply(&phi[0]), w1.apply(&phi[1])];
    std::array::from_fn(|a| std::array::from_fn(|b| images[a].inner(&phi[b])))
}

/// `⟨W⁽¹⁾v_n, v_n⟩`, after checking that the degenerate block is scalar.
pub fn lambda1_operator<T: Real>(h: &Matrix3Field<T>, branch: Branch, grid: &Arc<Grid<T>>) -> Result<T> {
    let b = first_order_block(h, branch, grid);
    let offdiag = b[0][1].norm().max(b[1][0].norm());
    let split = (b[0][0] - b[1][1]).norm();
    let limit = T::tol(SPLITTING_LIMIT);
    if offdiag > limit || split > limit {
        return Err(Error::DegenerateSplitting {
            offdiag: offdiag.to_f64().unwrap_or(f64::NAN),
            split: split.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(b[0][0].re)
}

/// Default pseudoinverse truncation for a given `h`.
pub fn default_truncation<T: Scalar>(h: &Matrix3Field<T>) -> usize {
    h.max_degree() + 4
}

/// `⟨W⁽²⁾v, v⟩ − ⟨(W⁽¹⁾ − λ⁽¹⁾) Q (W⁽¹⁾ − λ⁽¹⁾) v, v⟩` with `v = v_n`.
pub fn lambda2_operator<T: Real>(
    h: &Matrix3Field<T>,
    k: &Matrix3Field<T>,
    branch: Branch,
    truncation: Option<usize>,
    grid: &Arc<Grid<T>>,
) -> Result<T> {
    let lambda1 = lambda1_operator(h, branch, grid)?;
    let q = PseudoInverse::new(branch.n(), truncation.unwrap_or_else(|| default_truncation(h)));
    let w1 = DiracOperator::first_order(h, Arc::clone(grid));
    let w2 = DiracOperator::second_order(h, k, Arc::clone(grid));
    let v = basis(branch.n(), BasisKind::V, grid);
    let shifted = |u: &SpinorField<T>| w1.apply(u).axpy(cre(-lambda1), u);
    let f = shifted(&v);
    let t = shifted(&q.apply(&f)?);
    Ok((w2.apply(&v).inner(&v) - t.inner(&v)).re)
}

// ---------------------------------------------------------------------------
// Closed forms

/// `∓ ½ ĥ₁₁(0)`.
pub fn lambda1_closed<T: Scalar>(h: &Matrix3Field<T>, branch: Branch) -> T {
    let h11 = h.get(0, 0).coeff(0).re;
    h11 * ratio::<T>(-branch.n(), 2)
}

/// Second-order coefficient as a sum over the Fourier coefficients of `h`, `k`, `h²`.
pub fn lambda2_closed<T: Scalar>(h: &Matrix3Field<T>, k: &Matrix3Field<T>, branch: Branch) -> T {
    let s = int::<T>(branch.n());
    let h2 = h.matmul(h);
    let mut total = s.clone() * ratio::<T>(3, 8) * h2.get(0, 0).coeff(0).re - s * ratio::<T>(1, 8) * k.get(0, 0).coeff(0).re;

    // −(i/16) ε_{βγ1} Σ_{m≠0} m conj(ĥ_{αβ}(m)) ĥ_{αγ}(m); the bracket is purely imaginary
    let d = h.max_degree() as i64;
    let mut anti = czero::<T>();
    for a in 0..3 {
        for m in (-d..=d).filter(|&m| m != 0) {
            let x = h.get(a, 1).coeff(m);
            let y = h.get(a, 2).coeff(m);
            let term = x.conj() * y.clone() - y.conj() * x;
            anti = anti + term * cre(int::<T>(m));
        }
    }
    total = total + anti.im * ratio::<T>(1, 16);

    let h11 = h.get(0, 0);
    let h21 = h.get(1, 0);
    let h31 = h.get(2, 0);
    let n = branch.n();
    let (mut s1, mut s2) = (T::zero(), T::zero());
    for m in (-d - 2..=d + 2).filter(|&m| m != n) {
        let a = h11.coeff(m - n);
        let weight = int::<T>(m + n) * int::<T>(m + n) / int::<T>(m - n);
        s1 = s1 + weight * a.norm_sqr();
        let z = h31.coeff(m + n) + h21.coeff(m + n) * Complex::new(T::zero(), T::one());
        s2 = s2 + int::<T>(m - n) * z.norm_sqr();
    }
    total - (s1 + s2) * ratio::<T>(1, 16)
}

/// `λ₊⁽²⁾ + λ₋⁽²⁾`.
pub fn asymmetry2<T: Scalar>(h: &Matrix3Field<T>, k: &Matrix3Field<T>) -> T {
    lambda2_closed(h, k, Branch::Plus) + lambda2_closed(h, k, Branch::Minus)
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Route {
    ClosedForm,
    Operator,
    GalerkinFit,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::ClosedForm => "closed_form",
            Route::Operator => "operator",
            Route::GalerkinFit => "galerkin_fit",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationReport<T> {
    pub route: Route,
    pub lambda1_plus: T,
    pub lambda1_minus: T,
    pub lambda2_plus: T,
    pub lambda2_minus: T,
    pub asymmetry2: T,
    /// Highest power fitted, for the fit route.
    pub fit_order: Option<usize>,
}

impl<T: Scalar> PerturbationReport<T> {
    pub fn closed_form(h: &Matrix3Field<T>, k: &Matrix3Field<T>) -> Self {
        let l2p = lambda2_closed(h, k, Branch::Plus);
        let l2m = lambda2_closed(h, k, Branch::Minus);
        Self {
            route: Route::ClosedForm,
            lambda1_plus: lambda1_closed(h, Branch::Plus),
            lambda1_minus: lambda1_closed(h, Branch::Minus),
            asymmetry2: l2p.clone() + l2m.clone(),
            lambda2_plus: l2p,
            lambda2_minus: l2m,
            fit_order: None,
        }
    }

    pub fn values(&self) -> [T; 4] {
        [self.lambda1_plus.clone(), self.lambda1_minus.clone(), self.lambda2_plus.clone(), self.lambda2_minus.clone()]
    }
}

impl<T: Real> PerturbationReport<T> {
    pub fn operator(h: &Matrix3Field<T>, k: &Matrix3Field<T>, grid: &Arc<Grid<T>>) -> Result<Self> {
        let l2p = lambda2_operator(h, k, Branch::Plus, None, grid)?;
        let l2m = lambda2_operator(h, k, Branch::Minus, None, grid)?;
        Ok(Self {
            route: Route::Operator,
            lambda1_plus: lambda1_operator(h, Branch::Plus, grid)?,
            lambda1_minus: lambda1_operator(h, Branch::Minus, grid)?,
            lambda2_plus: l2p,
            lambda2_minus: l2m,
            asymmetry2: l2p + l2m,
            fit_order: None,
        })
    }

    pub fn from_fits(plus: &FitResult<T>, minus: &FitResult<T>) -> Self {
        let c = |f: &FitResult<T>, p| f.coefficient(p).unwrap_or_else(T::nan);
        Self {
            route: Route::GalerkinFit,
            lambda1_plus: c(plus, 1),
            lambda1_minus: c(minus, 1),
            lambda2_plus: c(plus, 2),
            lambda2_minus: c(minus, 2),
            asymmetry2: c(plus, 2) + c(minus, 2),
            fit_order: Some(plus.order.min(minus.order)),
        }
    }

    /// Largest absolute difference over the four coefficients.
    pub fn max_deviation(&self, other: &Self) -> T {
        self.values().iter().zip(other.values()).map(|(a, b)| (*a - b).abs()).fold(T::zero(), T::max)
    }
}

// ---------------------------------------------------------------------------
// Fitting

/// Six logarithmically spaced points in `[0.01, 0.1]`.
pub fn default_fit_grid<T: Real>() -> Vec<T> {
    (0..6).map(|i| T::lit(0.01 * 10f64.powf(i as f64 / 5.0))).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult<T> {
    pub n: i64,
    pub order: usize,
    pub eps: Vec<T>,
    /// `c₁ … c_order`.
    pub coefficients: Vec<T>,
    pub std_errors: Vec<T>,
    pub residual: T,
    pub limit: T,
}

impl<T: Real> FitResult<T> {
    /// `c_p`, for `1 ≤ p ≤ order`.
    pub fn coefficient(&self, p: usize) -> Option<T> {
        (p >= 1).then(|| self.coefficients.get(p - 1).copied()).flatten()
    }

    pub fn std_error(&self, p: usize) -> Option<T> {
        (p >= 1).then(|| self.std_errors.get(p - 1).copied()).flatten()
    }
}

/// Powers fitted for one parity: the reported ones plus two guard powers.
fn parity_powers(order: usize, odd: bool) -> Vec<usize> {
    let start = if odd { 1 } else { 2 };
    let mut powers: Vec<usize> = (start..=order).step_by(2).collect();
    let mut next = powers.last().map_or(start, |p| p + 2);
    for _ in 0..2 {
        powers.push(next);
        next += 2;
    }
    powers
}

/// Fits `λ(ε) − n` from samples at `+ε` and `−ε`.
///
/// The even part `(λ(ε) + λ(−ε))/2 − n` is fitted with even powers and the
/// odd part with odd powers, each with two guard terms above `order` so the
/// reported coefficients absorb little of the truncated tail.
pub fn fit_samples<T: Real>(n: i64, order: usize, eps: &[T], at_plus: &[T], at_minus: &[T]) -> Result<FitResult<T>> {
    if ![1, 2, 4].contains(&order) {
        return Err(Error::FitOrder(order));
    }
    let even_powers = parity_powers(order, false);
    let odd_powers = parity_powers(order, true);
    let required = (order + 2).max(even_powers.len()).max(odd_powers.len());
    if eps.len() < required {
        return Err(Error::TooFewSamples { required, got: eps.len() });
    }
    if let Some(&bad) = eps.iter().find(|&&e| !(e > T::zero() && e <= T::lit(FIT_EPS_MAX))) {
        return Err(Error::EpsOutOfRange(bad.to_f64().unwrap_or(f64::NAN)));
    }
    assert!(at_plus.len() == eps.len() && at_minus.len() == eps.len());

    let nn = T::from_i64(n).unwrap();
    let half = T::lit(0.5);
    let even: Vec<T> = at_plus.iter().zip(at_minus).map(|(&p, &m)| (p + m) * half - nn).collect();
    let odd: Vec<T> = at_plus.iter().zip(at_minus).map(|(&p, &m)| (p - m) * half).collect();
    let design = |powers: &[usize]| -> Vec<Vec<T>> {
        powers.iter().map(|&p| eps.iter().map(|&e| e.powi(p as i32)).collect()).collect()
    };
    let fe = least_squares(&design(&even_powers), &even);
    let fo = least_squares(&design(&odd_powers), &odd);

    let mut coefficients = vec![T::zero(); order];
    let mut std_errors = vec![T::zero(); order];
    for (powers, fit) in [(&even_powers, &fe), (&odd_powers, &fo)] {
        for (i, &p) in powers.iter().enumerate() {
            if p <= order {
                coefficients[p - 1] = fit.coef[i];
                std_errors[p - 1] = fit.std_err[i];
            }
        }
    }
    let residual = (fe.rss + fo.rss).sqrt();
    let scale = at_plus.iter().chain(at_minus).map(|&l| (l - nn).abs()).fold(T::zero(), T::max);
    let limit = (T::lit(1e-6) * scale).max(T::tol(1e-12));
    if residual > limit {
        return Err(Error::FitResidual {
            residual: residual.to_f64().unwrap_or(f64::NAN),
            limit: limit.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(FitResult { n, order, eps: eps.to_vec(), coefficients, std_errors, residual, limit })
}

/// Tracked Galerkin pair means at `±ε` for every `ε` in the list.
pub fn tracked_means<T: Real>(
    family: &CoframeFamily<T>,
    n: i64,
    eps_grid: &[T],
    m: usize,
    grid: &Arc<Grid<T>>,
) -> Result<(Vec<T>, Vec<T>)> {
    let signed: Vec<T> = eps_grid.iter().flat_map(|&e| [e, -e]).collect();
    let means: Vec<T> = signed
        .par_iter()
        .map(|&e| Ok(spectrum_at(family, e, m, grid)?.track_pair(n)?.mean))
        .collect::<Result<_>>()?;
    Ok((means.iter().step_by(2).copied().collect(), means.iter().skip(1).step_by(2).copied().collect()))
}

/// Fits the tracked Galerkin eigenvalue near `n` to `n + c₁ε + … + c_order ε^order`.
pub fn fit_expansion<T: Real>(
    family: &CoframeFamily<T>,
    n: i64,
    eps_grid: &[T],
    order: usize,
    m: usize,
    grid: &Arc<Grid<T>>,
) -> Result<FitResult<T>> {
    // validate before running any eigensolve
    fit_samples(n, order, eps_grid, &vec![T::from_i64(n).unwrap(); eps_grid.len()], &vec![T::from_i64(n).unwrap(); eps_grid.len()])?;
    let (plus, minus) = tracked_means(family, n, eps_grid, m, grid)?;
    fit_samples(n, order, eps_grid, &plus, &minus)
}

struct LsqFit<T> {
    coef: Vec<T>,
    std_err: Vec<T>,
    rss: T,
}

/// Householder least squares on column-scaled data; `cols[j][i]` is row `i` of column `j`.
fn least_squares<T: Real>(cols: &[Vec<T>], y: &[T]) -> LsqFit<T> {
    let p = cols.len();
    let rows = y.len();
    let scale: Vec<T> = cols
        .iter()
        .map(|c| {
            let s = c.iter().map(|&x| x * x).fold(T::zero(), |a, b| a + b).sqrt();
            if s > T::zero() { s } else { T::one() }
        })
        .collect();
    let mut a: Vec<Vec<T>> = (0..rows).map(|i| (0..p).map(|j| cols[j][i] / scale[j]).collect()).collect();
    let mut b = y.to_vec();

    for j in 0..p.min(rows) {
        let norm = (j..rows).map(|i| a[i][j] * a[i][j]).fold(T::zero(), |s, x| s + x).sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if a[j][j] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (j..rows).map(|i| a[i][j]).collect();
        v[0] -= alpha;
        let vv = v.iter().map(|&x| x * x).fold(T::zero(), |s, x| s + x);
        if vv == T::zero() {
            continue;
        }
        for c in j..p {
            let dot = (j..rows).map(|i| v[i - j] * a[i][c]).fold(T::zero(), |s, x| s + x);
            let f = (dot + dot) / vv;
            for i in j..rows {
                a[i][c] -= f * v[i - j];
            }
        }
        let dot = (j..rows).map(|i| v[i - j] * b[i]).fold(T::zero(), |s, x| s + x);
        let f = (dot + dot) / vv;
        for i in j..rows {
            b[i] -= f * v[i - j];
        }
    }

    // back substitution for R z = Qᵀy and for R⁻¹
    let mut z = vec![T::zero(); p];
    for j in (0..p).rev() {
        let mut s = b[j];
        for c in j + 1..p {
            s -= a[j][c] * z[c];
        }
        z[j] = s / a[j][j];
    }
    let mut rinv = vec![vec![T::zero(); p]; p];
    for col in 0..p {
        for j in (0..=col).rev() {
            let mut s = if j == col { T::one() } else { T::zero() };
            for c in j + 1..=col {
                s -= a[j][c] * rinv[c][col];
            }
            rinv[j][col] = s / a[j][j];
        }
    }
    let rss = b[p..].iter().map(|&x| x * x).fold(T::zero(), |s, x| s + x);
    let dof = rows.saturating_sub(p);
    let sigma2 = if dof > 0 { rss / T::from_usize(dof).unwrap() } else { T::infinity() };
    let coef = (0..p).map(|j| z[j] / scale[j]).collect();
    let std_err = (0..p)
        .map(|j| {
            let row_norm2 = (0..p).map(|c| rinv[j][c] * rinv[j][c]).fold(T::zero(), |s, x| s + x);
            (sigma2 * row_norm2).sqrt() / scale[j]
        })
        .collect();
    LsqFit { coef, std_err, rss }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::test_util;
    use num_rational::Rational64;

    type Q = Rational64;

    fn grid() -> Arc<Grid<f64>> {
        Arc::new(Grid::for_truncation(25))
    }

    #[test]
    fn closed_forms_explicit_1() {
        let (h, k) = families::explicit_1::<Q>();
        let r = PerturbationReport::closed_form(&h, &k);
        assert_eq!(r.values(), [Q::from_integer(0), Q::from_integer(0), Q::new(-1, 2), Q::new(-1, 2)]);
        assert_eq!(asymmetry2(&h, &k), Q::from_integer(-1));
    }

    #[test]
    fn closed_forms_explicit_2() {
        let (h, k) = families::explicit_2::<Q>();
        assert_eq!(lambda1_closed(&h, Branch::Plus), Q::new(-1, 2));
        assert_eq!(lambda1_closed(&h, Branch::Minus), Q::new(1, 2));
        assert_eq!(lambda2_closed(&h, &k, Branch::Plus), Q::new(3, 4));
        assert_eq!(lambda2_closed(&h, &k, Branch::Minus), Q::from_integer(-1));
        assert_eq!(asymmetry2(&h, &k), Q::new(-1, 4));
    }

    #[test]
    fn closed_forms_of_zero() {
        let z = Matrix3Field::<Q>::zero();
        assert_eq!(PerturbationReport::closed_form(&z, &z).values(), [Q::from_integer(0); 4]);
    }

    #[test]
    fn operator_route_explicit_families() {
        let g = grid();
        let (h, k) = families::explicit_1::<f64>();
        let r = PerturbationReport::operator(&h, &k, &g).unwrap();
        for (got, want) in r.values().iter().zip([0.0, 0.0, -0.5, -0.5]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        let (h, k) = families::explicit_2::<f64>();
        let r = PerturbationReport::operator(&h, &k, &g).unwrap();
        for (got, want) in r.values().iter().zip([-0.5, 0.5, 0.75, -1.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn pseudoinverse_single_modes() {
        let g = Arc::new(Grid::<f64>::new(64).unwrap());
        let q = PseudoInverse::new(1, 10);
        assert!(q.apply(&basis(1, BasisKind::V, &g)).is_err());
        for n in [-3, -1, 0, 2, 4] {
            for kind in [BasisKind::V, BasisKind::W] {
                let phi = basis(n, kind, &g);
                let got = q.apply(&phi).unwrap();
                let want = phi.scale(cre(1.0 / (n - 1) as f64));
                assert!((&got - &want).sup_norm() < 1e-14, "n = {n} {kind:?}");
            }
        }
    }

    #[test]
    fn pseudoinverse_kernel_is_annihilated() {
        let g = Arc::new(Grid::<f64>::new(64).unwrap());
        let q = PseudoInverse::new(-1, 10);
        let v = basis(-1, BasisKind::V, &g);
        let p = q.projector(&v);
        assert!((&p - &v).sup_norm() < 1e-14);
        // f − Pf is orthogonal, so Q(f − Pf) is defined and QP = 0 holds on the remainder
        let f = &v + &basis(3, BasisKind::W, &g);
        let rest = &f - &q.projector(&f);
        assert!((&q.apply(&rest).unwrap() - &basis(3, BasisKind::W, &g).scale(cre(0.25))).sup_norm() < 1e-14);
    }

    #[test]
    fn pseudoinverse_truncation_guard() {
        let g = Arc::new(Grid::<f64>::new(64).unwrap());
        let q = PseudoInverse::new(1, 4);
        let f = basis(5, BasisKind::V, &g);
        assert_eq!(q.apply(&f).unwrap_err(), Error::TruncationTooSmall { truncation: 4, required: 7 });
    }

    #[test]
    fn degenerate_splitting_scalar_for_random_h() {
        let g = grid();
        for seed in 0..5 {
            let mut r = test_util::rng(700 + seed);
            let h = test_util::symmetric_field(&mut r, 2, 0.5);
            for b in Branch::both() {
                let blk = first_order_block(&h, b, &g);
                assert!(blk[0][1].norm() < 1e-13 && (blk[0][0] - blk[1][1]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn parity_powers_layout() {
        assert_eq!(parity_powers(4, false), vec![2, 4, 6, 8]);
        assert_eq!(parity_powers(4, true), vec![1, 3, 5, 7]);
        assert_eq!(parity_powers(2, false), vec![2, 4, 6]);
        assert_eq!(parity_powers(1, false), vec![2, 4]);
        assert_eq!(parity_powers(1, true), vec![1, 3, 5]);
    }

    #[test]
    fn fit_recovers_polynomial() {
        let eps = default_fit_grid::<f64>();
        let law = |e: f64| 1.0 + 0.3 * e - 1.5 * e * e + 0.7 * e.powi(3) + 2.0 * e.powi(4) - 4.0 * e.powi(6);
        let plus: Vec<f64> = eps.iter().map(|&e| law(e)).collect();
        let minus: Vec<f64> = eps.iter().map(|&e| law(-e)).collect();
        let f = fit_samples(1, 4, &eps, &plus, &minus).unwrap();
        for (got, want) in f.coefficients.iter().zip([0.3, -1.5, 0.7, 2.0]) {
            assert!((got - want).abs() < 1e-7, "{got} vs {want}");
        }
    }

    #[test]
    fn fit_input_validation() {
        let eps = [0.01, 0.02, 0.03];
        let y = [1.0; 3];
        assert_eq!(fit_samples(1, 3, &eps, &y, &y).unwrap_err(), Error::FitOrder(3));
        assert_eq!(fit_samples(1, 4, &eps, &y, &y).unwrap_err(), Error::TooFewSamples { required: 6, got: 3 });
        let bad = [0.01, 0.02, 0.2];
        assert_eq!(fit_samples(1, 1, &bad, &y, &y).unwrap_err(), Error::EpsOutOfRange(0.2));
    }

    #[test]
    fn fit_of_constant_family_is_zero() {
        let eps = default_fit_grid::<f64>();
        let ones = vec![1.0; eps.len()];
        let f = fit_samples(1, 4, &eps, &ones, &ones).unwrap();
        assert!(f.coefficients.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn fit_temp_coframe() {
        let g = grid();
        let eps = default_fit_grid::<f64>();
        let f = fit_expansion(&families::temp_coframe::<f64>(), 1, &eps, 4, 25, &g).unwrap();
        let want = [0.0, -0.5, 0.0, -0.5];
        for (got, w) in f.coefficients.iter().zip(want) {
            assert!((got - w).abs() < 1e-5, "{:?}", f.coefficients);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn random_spinor(seed: u64, g: &Arc<Grid<f64>>) -> SpinorField<f64> {
            let mut r = test_util::rng(seed);
            let a = test_util::complex_poly(&mut r, 6, 1.0);
            let b = test_util::complex_poly(&mut r, 6, 1.0);
            SpinorField::from_fourier(Arc::clone(g), [&a, &b])
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(20))]

            #[test]
            fn routes_agree(seed in any::<u64>()) {
                let g = Arc::new(Grid::for_truncation(25));
                let mut r = test_util::rng(seed);
                let h = test_util::symmetric_field(&mut r, 2, 0.5);
                let k = test_util::symmetric_field(&mut r, 2, 0.5);
                let closed = PerturbationReport::closed_form(&h, &k);
                let op = PerturbationReport::operator(&h, &k, &g).unwrap();
                prop_assert!((closed.lambda1_plus - op.lambda1_plus).abs() < 1e-12);
                prop_assert!((closed.lambda1_minus - op.lambda1_minus).abs() < 1e-12);
                prop_assert!((closed.lambda2_plus - op.lambda2_plus).abs() < 1e-10);
                prop_assert!((closed.lambda2_minus - op.lambda2_minus).abs() < 1e-10);
            }

            #[test]
            fn pseudoinverse_contract(seed in any::<u64>(), n in -2i64..=2) {
                let g = Arc::new(Grid::<f64>::new(64).unwrap());
                let q = PseudoInverse::new(n, 12);
                let f = random_spinor(seed, &g);
                let rest = &f - &q.projector(&f);
                let u = q.apply(&rest).unwrap();
                let w0 = DiracOperator::unperturbed(Arc::clone(&g));
                let back = w0.apply(&u).axpy(cre(-(n as f64)), &u);
                prop_assert!((&back - &rest).sup_norm() < 1e-10);
                // range of Q is orthogonal to the kernel
                prop_assert!(q.projector(&u).sup_norm() < 1e-10);
            }

            #[test]
            fn pseudoinverse_commutes_with_c(seed in any::<u64>()) {
                let g = Arc::new(Grid::<f64>::new(64).unwrap());
                let f = random_spinor(seed, &g);
                for n in [-1, 1] {
                    let q = PseudoInverse::new(n, 12);
                    let rest = &f - &q.projector(&f);
                    let lhs = q.apply(&rest.charge_conjugate()).unwrap();
                    let rhs = q.apply(&rest).unwrap().charge_conjugate();
                    prop_assert!((&lhs - &rhs).sup_norm() < 1e-10);
                }
            }
        }
    }
}
