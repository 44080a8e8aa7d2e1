//! The axisymmetric massless Dirac operator on half-densities and its
//! perturbation-series terms.
//!
//! Every operator here has the form
//!
//! ```text
//! W v = −(i/2)(S v′ + (S v)′) + p v
//! ```
//!
//! with `S` a Hermitian trace-free 2×2 symbol and `p` a real potential. A
//! 3-vector `c` determines the symbol `[[c₃, c₁ − ic₂], [c₁ + ic₂, −c₃]]`.

use std::ops::{Add, Sub};
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::MetricSnapshot;
use crate::grid::Grid;
use crate::scalar::{ci, cre, czero, int, Real, Scalar};
use crate::trigpoly::{Matrix3Field, TrigPoly};

pub type Symbol<T> = [[TrigPoly<T>; 2]; 2];

/// Two complex components sampled on a grid.
#[derive(Clone, Debug)]
pub struct SpinorField<T> {
    grid: Arc<Grid<T>>,
    components: [Vec<Complex<T>>; 2],
}

impl<T: Real> SpinorField<T> {
    pub fn new(grid: Arc<Grid<T>>, components: [Vec<Complex<T>>; 2]) -> Self {
        assert!(components.iter().all(|c| c.len() == grid.len()), "component length must match grid");
        Self { grid, components }
    }

    pub fn zero(grid: Arc<Grid<T>>) -> Self {
        let n = grid.len();
        Self::new(grid, [vec![czero(); n], vec![czero(); n]])
    }

    pub fn from_fourier(grid: Arc<Grid<T>>, components: [&TrigPoly<T>; 2]) -> Self {
        let c = components.map(|p| p.sample(&grid));
        Self::new(grid, c)
    }

    /// `(a, b)ᵀ e^{ikx}`.
    pub fn plane_wave(grid: Arc<Grid<T>>, k: i64, amplitude: [Complex<T>; 2]) -> Self {
        let n = grid.len();
        let c = amplitude.map(|a| (0..n).map(|j| a * grid.exp(k, j)).collect());
        Self::new(grid, c)
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<Complex<T>>; 2] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &[Complex<T>] {
        &self.components[i]
    }

    /// `⟨self, other⟩ = ∫ other* self dx`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.grid.inner(&self.components[0], &other.components[0])
            + self.grid.inner(&self.components[1], &other.components[1])
    }

    pub fn norm(&self) -> T {
        self.inner(self).re.max(T::zero()).sqrt()
    }

    /// Largest pointwise modulus over both components.
    pub fn sup_norm(&self) -> T {
        self.components.iter().flatten().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self::new(Arc::clone(&self.grid), self.components.clone().map(|v| v.into_iter().map(|z| z * c).collect()))
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: Complex<T>, other: &Self) -> Self {
        let comp = std::array::from_fn(|i| {
            self.components[i].iter().zip(&other.components[i]).map(|(a, b)| a + b * c).collect()
        });
        Self::new(Arc::clone(&self.grid), comp)
    }

    /// Fourier coefficients `(v̂₁(k), v̂₂(k))`.
    pub fn fourier_coefficient(&self, k: i64) -> [Complex<T>; 2] {
        [
            self.grid.fourier_coefficient(&self.components[0], k),
            self.grid.fourier_coefficient(&self.components[1], k),
        ]
    }

    /// Fourier view of component `i` at the given degree.
    pub fn fourier(&self, i: usize, degree: usize) -> Result<TrigPoly<T>> {
        TrigPoly::from_grid_samples(&self.grid, &self.components[i], degree)
    }

    /// `(v₁, v₂) ↦ (−conj v₂, conj v₁)`.
    pub fn charge_conjugate(&self) -> Self {
        let [a, b] = &self.components;
        Self::new(
            Arc::clone(&self.grid),
            [b.iter().map(|z| -z.conj()).collect(), a.iter().map(|z| z.conj()).collect()],
        )
    }

    pub fn derivative(&self) -> Self {
        Self::new(Arc::clone(&self.grid), std::array::from_fn(|i| self.grid.derivative(&self.components[i])))
    }
}

impl<T: Real> Add for &SpinorField<T> {
    type Output = SpinorField<T>;

    fn add(self, rhs: Self) -> SpinorField<T> {
        self.axpy(cre(T::one()), rhs)
    }
}

impl<T: Real> Sub for &SpinorField<T> {
    type Output = SpinorField<T>;

    fn sub(self, rhs: Self) -> SpinorField<T> {
        self.axpy(cre(-T::one()), rhs)
    }
}

/// `[[c₃, c₁ − ic₂], [c₁ + ic₂, −c₃]]`.
pub fn symbol_from_vector<T: Scalar>(c: [&TrigPoly<T>; 3]) -> Symbol<T> {
    let ic2 = c[1].scale(&ci());
    [[c[2].clone(), c[0] - &ic2], [c[0] + &ic2, -c[2]]]
}

fn first_column_symbol<T: Scalar>(m: &Matrix3Field<T>) -> Symbol<T> {
    symbol_from_vector(m.column(0))
}

fn scale_symbol<T: Scalar>(s: &Symbol<T>, c: &T) -> Symbol<T> {
    std::array::from_fn(|a| std::array::from_fn(|b| s[a][b].scale_real(c)))
}

fn add_symbols<T: Scalar>(x: &Symbol<T>, y: &Symbol<T>) -> Symbol<T> {
    std::array::from_fn(|a| std::array::from_fn(|b| &x[a][b] + &y[a][b]))
}

/// Symbol of the first-order term: `−½ B_h`, with `B_h` built from the first column of `h`.
pub fn w1_symbol<T: Scalar>(h: &Matrix3Field<T>) -> Symbol<T> {
    scale_symbol(&first_column_symbol(h), &(-T::one() / int::<T>(2)))
}

/// Symbol of the second-order term: `(3/8) B_{h²} − (1/8) B_k`.
pub fn w2_symbol<T: Scalar>(h: &Matrix3Field<T>, k: &Matrix3Field<T>) -> Symbol<T> {
    let h2 = first_column_symbol(&h.matmul(h));
    let kk = first_column_symbol(k);
    add_symbols(
        &scale_symbol(&h2, &(int::<T>(3) / int::<T>(8))),
        &scale_symbol(&kk, &(-T::one() / int::<T>(8))),
    )
}

/// Potential of the second-order term: `−(1/16) Σ_α (h_{α2} h′_{α3} − h_{α3} h′_{α2})`,
/// written with 1-based coordinate labels.
pub fn w2_potential<T: Scalar>(h: &Matrix3Field<T>) -> TrigPoly<T> {
    let mut acc = TrigPoly::zero();
    for a in 0..3 {
        acc = &acc + &(h.get(a, 1) * &h.get(a, 2).diff());
        acc = &acc - &(h.get(a, 2) * &h.get(a, 1).diff());
    }
    acc.scale_real(&(-T::one() / int::<T>(16)))
}

/// `−(i/2)S`, the matrix multiplying `d/dx` in the operator's written form.
pub fn derivative_coefficient<T: Scalar>(s: &Symbol<T>) -> Symbol<T> {
    let c = Complex::new(T::zero(), -T::one() / int::<T>(2));
    std::array::from_fn(|a| std::array::from_fn(|b| s[a][b].scale(&c)))
}

#[derive(Clone, Debug)]
pub struct DiracOperator<T> {
    grid: Arc<Grid<T>>,
    symbol: [[Vec<Complex<T>>; 2]; 2],
    potential: Vec<T>,
}

impl<T: Real> DiracOperator<T> {
    pub fn from_samples(grid: Arc<Grid<T>>, symbol: [[Vec<Complex<T>>; 2]; 2], potential: Vec<T>) -> Self {
        assert!(symbol.iter().flatten().all(|v| v.len() == grid.len()) && potential.len() == grid.len());
        Self { grid, symbol, potential }
    }

    pub fn from_polys(grid: Arc<Grid<T>>, symbol: &Symbol<T>, potential: &TrigPoly<T>) -> Self {
        let s = std::array::from_fn(|a| std::array::from_fn(|b| symbol[a][b].sample(&grid)));
        let p = potential.sample_real(&grid);
        Self::from_samples(grid, s, p)
    }

    pub fn zero(grid: Arc<Grid<T>>) -> Self {
        let n = grid.len();
        let s = std::array::from_fn(|_| std::array::from_fn(|_| vec![czero(); n]));
        Self::from_samples(grid, s, vec![T::zero(); n])
    }

    /// `−i σ₁ d/dx`.
    pub fn unperturbed(grid: Arc<Grid<T>>) -> Self {
        let n = grid.len();
        let one = vec![cre(T::one()); n];
        let zero = vec![czero(); n];
        Self::from_samples(grid, [[zero.clone(), one.clone()], [one, zero]], vec![T::zero(); n])
    }

    /// The operator of the metric captured in `ms`.
    ///
    /// The symbol comes from the frame column `e_j^1`; the potential is
    /// `(1/(4 det e)) Σ_j (e^j_3 (e^j_2)′ − e^j_2 (e^j_3)′)`.
    pub fn assemble(ms: &MetricSnapshot<T>) -> Result<Self> {
        let grid = Arc::clone(ms.grid());
        let n = grid.len();
        let frame = ms.frame();
        let e = ms.coframe_values();
        let de = ms.coframe_derivative();
        let four = T::lit(4.0);

        let mut symbol: [[Vec<Complex<T>>; 2]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| vec![czero(); n]));
        let mut potential = Vec::with_capacity(n);
        let mut worst_imag = T::zero();
        for idx in 0..n {
            let (c1, c2, c3) = (frame[0][0][idx], frame[1][0][idx], frame[2][0][idx]);
            symbol[0][0][idx] = cre(c3);
            symbol[0][1][idx] = Complex::new(c1, -c2);
            symbol[1][0][idx] = Complex::new(c1, c2);
            symbol[1][1][idx] = cre(-c3);

            let mut acc = czero::<T>();
            for j in 0..3 {
                acc = acc + e[j][2][idx] * de[j][1][idx] - e[j][1][idx] * de[j][2][idx];
            }
            let p = acc / (four * ms.det_coframe()[idx]);
            worst_imag = worst_imag.max(p.im.abs());
            potential.push(p.re);
        }
        if worst_imag > T::tol(1e-12) {
            return Err(Error::ComplexPotential(worst_imag.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self::from_samples(grid, symbol, potential))
    }

    /// `W⁽¹⁾ = (i/4)(B_h d/dx + d/dx B_h)`.
    pub fn first_order(h: &Matrix3Field<T>, grid: Arc<Grid<T>>) -> Self {
        Self::from_polys(grid, &w1_symbol(h), &TrigPoly::zero())
    }

    /// `W⁽²⁾`: symbol `(3/8)B_{h²} − (1/8)B_k` and the antisymmetric `h h′` potential.
    pub fn second_order(h: &Matrix3Field<T>, k: &Matrix3Field<T>, grid: Arc<Grid<T>>) -> Self {
        Self::from_polys(grid, &w2_symbol(h, k), &w2_potential(h))
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn symbol(&self) -> &[[Vec<Complex<T>>; 2]; 2] {
        &self.symbol
    }

    pub fn potential(&self) -> &[T] {
        &self.potential
    }

    pub fn apply(&self, v: &SpinorField<T>) -> SpinorField<T> {
        let n = self.grid.len();
        let s = &self.symbol;
        let [v0, v1] = v.components();
        let dv = [self.grid.derivative(v0), self.grid.derivative(v1)];
        let sv: [Vec<Complex<T>>; 2] = std::array::from_fn(|a| (0..n).map(|j| s[a][0][j] * v0[j] + s[a][1][j] * v1[j]).collect());
        let dsv = [self.grid.derivative(&sv[0]), self.grid.derivative(&sv[1])];
        let half_i = Complex::new(T::zero(), -T::lit(0.5));
        let out = std::array::from_fn(|a| {
            (0..n)
                .map(|j| {
                    let sdv = s[a][0][j] * dv[0][j] + s[a][1][j] * dv[1][j];
                    half_i * (sdv + dsv[a][j]) + v.components()[a][j] * self.potential[j]
                })
                .collect()
        });
        SpinorField::new(Arc::clone(&self.grid), out)
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: T, other: &Self) -> Self {
        let symbol = std::array::from_fn(|a| {
            std::array::from_fn(|b| self.symbol[a][b].iter().zip(&other.symbol[a][b]).map(|(x, y)| x + y * c).collect())
        });
        let potential = self.potential.iter().zip(&other.potential).map(|(&x, &y)| x + y * c).collect();
        Self::from_samples(Arc::clone(&self.grid), symbol, potential)
    }

    /// `max |S − S*|` and `max |tr S|` over the grid.
    pub fn symbol_defects(&self) -> (T, T) {
        let s = &self.symbol;
        let mut herm = T::zero();
        let mut trace = T::zero();
        for j in 0..self.grid.len() {
            for a in 0..2 {
                for b in 0..2 {
                    herm = herm.max((s[a][b][j] - s[b][a][j].conj()).norm());
                }
            }
            trace = trace.max((s[0][0][j] + s[1][1][j]).norm());
        }
        (herm, trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::galerkin::{basis, BasisKind};
    use crate::geometry::CoframeFamily;
    use crate::test_util;
    use num_rational::Rational64;

    type Q = Rational64;

    fn grid(n: usize) -> Arc<Grid<f64>> {
        Arc::new(Grid::new(n).unwrap())
    }

    fn q(n: i64, d: i64) -> Complex<Q> {
        Complex::new(Q::new(n, d), Q::from_integer(0))
    }

    fn qi(n: i64, d: i64) -> Complex<Q> {
        Complex::new(Q::from_integer(0), Q::new(n, d))
    }

    fn random_spinor(seed: u64, g: &Arc<Grid<f64>>) -> SpinorField<f64> {
        let mut r = test_util::rng(seed);
        let a = test_util::complex_poly(&mut r, 4, 1.0);
        let b = test_util::complex_poly(&mut r, 4, 1.0);
        SpinorField::from_fourier(Arc::clone(g), [&a, &b])
    }

    #[test]
    fn unperturbed_eigen_relations() {
        let g = grid(64);
        let w0 = DiracOperator::unperturbed(Arc::clone(&g));
        for n in -5..=5 {
            for kind in [BasisKind::V, BasisKind::W] {
                let v = basis(n, kind, &g);
                let r = &w0.apply(&v) - &v.scale(cre(n as f64));
                assert!(r.sup_norm() < 1e-12, "n = {n} {kind:?}");
            }
        }
    }

    #[test]
    fn assemble_at_zero_is_unperturbed() {
        let g = grid(64);
        let snap = families::skew_coframe::<f64>().metric_at(0.0, &g).unwrap();
        let w = DiracOperator::assemble(&snap).unwrap();
        let w0 = DiracOperator::unperturbed(Arc::clone(&g));
        let v = random_spinor(3, &g);
        assert!((&w.apply(&v) - &w0.apply(&v)).sup_norm() < 1e-12);
    }

    #[test]
    fn temp_coframe_operator_is_shifted_free_operator() {
        let g = grid(128);
        for eps in [0.2, 0.5, -0.3] {
            let w = DiracOperator::assemble(&families::temp_coframe::<f64>().metric_at(eps, &g).unwrap()).unwrap();
            let shift = -eps * eps / (2.0 * (1.0 - eps * eps));
            for j in 0..g.len() {
                let s = w.symbol();
                assert!((s[0][1][j] - cre(1.0)).norm() < 1e-12);
                assert!((s[1][0][j] - cre(1.0)).norm() < 1e-12);
                assert!(s[0][0][j].norm() < 1e-12 && s[1][1][j].norm() < 1e-12);
                assert!((w.potential()[j] - shift).abs() < 1e-12, "eps {eps} j {j}");
            }
        }
    }

    #[test]
    fn explicit_2_first_order_display() {
        let (h, _) = families::explicit_2::<Q>();
        let d = derivative_coefficient(&w1_symbol(&h));
        let s = TrigPoly::<Q>::sin(1);
        let c = TrigPoly::<Q>::cos(1);
        let quarter = q(1, 4);
        let expected: Symbol<Q> = [
            [s.scale(&qi(1, 1)), &TrigPoly::exp(0).scale(&qi(1, 1)) + &c],
            [&TrigPoly::exp(0).scale(&qi(1, 1)) - &c, s.scale(&qi(-1, 1))],
        ];
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(d[a][b], expected[a][b].scale(&quarter), "({a},{b})");
            }
        }
    }

    #[test]
    fn explicit_2_second_order_display() {
        let (h, k) = families::explicit_2::<Q>();
        let d = derivative_coefficient(&w2_symbol(&h, &k));
        let s = TrigPoly::<Q>::sin(1);
        let c = TrigPoly::<Q>::cos(1);
        let one = TrigPoly::<Q>::exp(0);
        let lin = |k0: Complex<Q>, kc: i64, ks: Complex<Q>| {
            &(&one.scale(&k0) + &c.scale_real(&Q::from_integer(kc))) + &s.scale(&ks)
        };
        let expected: Symbol<Q> = [
            [lin(q(0, 1), 0, qi(-3, 1)), lin(Complex::new(Q::from_integer(-3), Q::from_integer(-6)), -2, qi(1, 1))],
            [lin(Complex::new(Q::from_integer(3), Q::from_integer(-6)), 2, qi(1, 1)), lin(q(0, 1), 0, qi(3, 1))],
        ];
        let sixteenth = q(1, 16);
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(d[a][b], expected[a][b].scale(&sixteenth), "({a},{b})");
            }
        }
        assert_eq!(w2_potential(&h), TrigPoly::constant(Q::new(-3, 16)));
    }

    #[test]
    fn explicit_1_operator_terms() {
        let (h, k) = families::explicit_1::<Q>();
        assert!(w1_symbol(&h).iter().flatten().all(TrigPoly::is_zero));
        let d = derivative_coefficient(&w2_symbol(&h, &k));
        let c = TrigPoly::<Q>::cos(1);
        let is = TrigPoly::<Q>::sin(1).scale(&qi(1, 1));
        let sixteenth = q(1, 16);
        assert!(d[0][0].is_zero() && d[1][1].is_zero());
        assert_eq!(d[0][1], (&c + &is).scale(&sixteenth));
        assert_eq!(d[1][0], (&is - &c).scale(&sixteenth));
        assert_eq!(w2_potential(&h), TrigPoly::constant(Q::new(-1, 2)));
        let h2 = h.matmul(&h);
        assert_eq!(h2.fourier(0)[1][1], q(4, 1));
        assert_eq!(h2.fourier(0)[2][2], q(4, 1));
    }

    #[test]
    fn explicit_1_first_order_on_v1() {
        // the first column of h vanishes, so W⁽¹⁾ annihilates everything
        let g = grid(64);
        let (h, _) = families::explicit_1::<f64>();
        let w1 = DiracOperator::first_order(&h, Arc::clone(&g));
        assert!(w1.apply(&basis(1, BasisKind::V, &g)).sup_norm() < 1e-14);
    }

    #[test]
    fn explicit_2_first_order_expectation() {
        let g = grid(64);
        let (h, _) = families::explicit_2::<f64>();
        let w1 = DiracOperator::first_order(&h, Arc::clone(&g));
        let v = basis(1, BasisKind::V, &g);
        let e = w1.apply(&v).inner(&v);
        assert!((e - cre(-0.5)).norm() < 1e-13, "{e}");
    }

    #[test]
    fn charge_conjugation_identities() {
        let g = grid(32);
        let v = random_spinor(11, &g);
        let cc = v.charge_conjugate().charge_conjugate();
        assert!((&cc + &v).sup_norm() < 1e-15);
        assert!((v.charge_conjugate().norm() - v.norm()).abs() < 1e-12);
        for n in -3..=3 {
            let cv = basis(n, BasisKind::V, &g).charge_conjugate();
            assert!((&cv - &basis(n, BasisKind::W, &g)).sup_norm() < 1e-15);
        }
    }

    #[test]
    fn self_adjoint_and_commutes_with_c() {
        let g = grid(256);
        for seed in 0..5 {
            let mut r = test_util::rng(100 + seed);
            let e1 = test_util::real_field(&mut r, 2, 0.3);
            let e2 = test_util::real_field(&mut r, 2, 0.3);
            let cf = CoframeFamily::new(e1, e2).unwrap();
            let w = DiracOperator::assemble(&cf.metric_at(0.3, &g).unwrap()).unwrap();
            let (herm, trace) = w.symbol_defects();
            assert!(herm < 1e-14 && trace < 1e-14);
            let u = random_spinor(200 + seed, &g);
            let v = random_spinor(300 + seed, &g);
            let lhs = w.apply(&u).inner(&v);
            let rhs = u.inner(&w.apply(&v));
            assert!((lhs - rhs).norm() < 1e-10, "seed {seed}: {lhs} vs {rhs}");
            let diff = &w.apply(&u.charge_conjugate()) - &w.apply(&u).charge_conjugate();
            assert!(diff.sup_norm() < 1e-10);
        }
    }

    #[test]
    fn series_truncation_is_third_order() {
        let g = grid(256);
        for seed in 0..4 {
            let mut r = test_util::rng(400 + seed);
            let h = test_util::symmetric_field(&mut r, 2, 0.3);
            let k = test_util::symmetric_field(&mut r, 2, 0.3);
            let cf = CoframeFamily::from_perturbation(&h, &k).unwrap();
            let w0 = DiracOperator::unperturbed(Arc::clone(&g));
            let w1 = DiracOperator::first_order(&h, Arc::clone(&g));
            let w2 = DiracOperator::second_order(&h, &k, Arc::clone(&g));
            let v = random_spinor(500 + seed, &g);
            let residual = |eps: f64| {
                let w = DiracOperator::assemble(&cf.metric_at(eps, &g).unwrap()).unwrap();
                let approx = w0.axpy(eps, &w1).axpy(eps * eps, &w2);
                (&w.apply(&v) - &approx.apply(&v)).norm()
            };
            let ratio = residual(0.02) / residual(0.01);
            assert!(ratio >= 7.0, "seed {seed}: ratio {ratio}");
        }
    }
}
