//! Finite complex Fourier series on the circle of period 2π.
//!
//! A [`TrigPoly`] stores the dense coefficient block `c_{-D..=D}` of
//! `Σ c_k e^{ikx}`. All algebra (sum, product, derivative, Fourier
//! coefficients) is exact in the scalar type, so with `Rational64`
//! coefficients every identity holds bit-for-bit. Sampling, quadrature
//! and equality-within-tolerance need a floating [`Real`] type.
//!
//! [`Matrix3Field`] is a 3×3 matrix of trig polynomials; it carries the
//! coframe perturbations and the metric perturbations `h`, `k`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex;
use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::{ci, cre, czero, int, Real, Scalar};

#[derive(Clone, Debug)]
pub struct TrigPoly<T> {
    degree: usize,
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> TrigPoly<T> {
    pub fn zero() -> Self {
        Self { degree: 0, coeffs: vec![czero()] }
    }

    pub fn constant(c: T) -> Self {
        Self { degree: 0, coeffs: vec![cre(c)] }
    }

    /// Builds from the dense block `c_{-D..=D}`; the length must be odd.
    pub fn from_coeffs(coeffs: Vec<Complex<T>>) -> Self {
        assert!(coeffs.len() % 2 == 1, "coefficient block must have odd length");
        Self { degree: coeffs.len() / 2, coeffs }
    }

    /// Builds from `(k, c_k)` pairs; repeated modes are summed.
    pub fn from_modes<I>(modes: I) -> Self
    where
        I: IntoIterator<Item = (i64, Complex<T>)>,
    {
        let modes: Vec<_> = modes.into_iter().collect();
        let degree = modes.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut coeffs = vec![czero(); 2 * degree + 1];
        for (k, c) in modes {
            let idx = (k + degree as i64) as usize;
            coeffs[idx] = coeffs[idx].clone() + c;
        }
        Self { degree, coeffs }
    }

    /// `e^{ikx}`
    pub fn exp(k: i64) -> Self {
        Self::from_modes([(k, cre(T::one()))])
    }

    /// `cos(kx)`
    pub fn cos(k: i64) -> Self {
        let half = cre(T::one() / int::<T>(2));
        if k == 0 {
            return Self::constant(T::one());
        }
        Self::from_modes([(k, half.clone()), (-k, half)])
    }

    /// `sin(kx)`
    pub fn sin(k: i64) -> Self {
        let half = T::one() / int::<T>(2);
        if k == 0 {
            return Self::zero();
        }
        Self::from_modes([
            (k, Complex::new(T::zero(), -half.clone())),
            (-k, Complex::new(T::zero(), half)),
        ])
    }

    /// Storage degree `D`; coefficients beyond it are zero.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Largest `|k|` with a nonzero coefficient.
    pub fn effective_degree(&self) -> usize {
        self.modes()
            .filter(|(_, c)| !(c.re.is_zero() && c.im.is_zero()))
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// `c_k`, zero when `|k| > D`.
    pub fn coeff(&self, k: i64) -> Complex<T> {
        if k.unsigned_abs() as usize > self.degree {
            czero()
        } else {
            self.coeffs[(k + self.degree as i64) as usize].clone()
        }
    }

    /// Fourier coefficient `(1/2π)∫₀^{2π} e^{-imx} f(x) dx`, read off exactly.
    pub fn fourier(&self, m: i64) -> Complex<T> {
        self.coeff(m)
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, &Complex<T>)> {
        let d = self.degree as i64;
        self.coeffs.iter().enumerate().map(move |(i, c)| (i as i64 - d, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_zero() && c.im.is_zero())
    }

    /// Drops exact-zero outer coefficients.
    pub fn trimmed(&self) -> Self {
        let d = self.effective_degree();
        Self::from_coeffs((-(d as i64)..=d as i64).map(|k| self.coeff(k)).collect())
    }

    pub fn scale(&self, c: &Complex<T>) -> Self {
        Self { degree: self.degree, coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn scale_real(&self, c: &T) -> Self {
        self.scale(&cre(c.clone()))
    }

    /// `d/dx`: `c_k ↦ ik c_k`.
    pub fn diff(&self) -> Self {
        let coeffs = self
            .modes()
            .map(|(k, c)| c.clone() * ci::<T>() * cre(int::<T>(k)))
            .collect();
        Self { degree: self.degree, coeffs }
    }

    /// Pointwise complex conjugate: `c_k ↦ conj(c_{-k})`.
    pub fn conj(&self) -> Self {
        let d = self.degree as i64;
        Self::from_coeffs((-d..=d).map(|k| self.coeff(-k).conj()).collect())
    }

    /// Exact real-valuedness test `c_{-k} = conj(c_k)`.
    pub fn is_real(&self) -> bool {
        let d = self.degree as i64;
        (0..=d).all(|k| self.coeff(-k) == self.coeff(k).conj())
    }

    pub fn map<U, F>(&self, f: F) -> TrigPoly<U>
    where
        F: Fn(&Complex<T>) -> Complex<U>,
    {
        TrigPoly { degree: self.degree, coeffs: self.coeffs.iter().map(f).collect() }
    }

    /// Converts the coefficients to a floating type.
    pub fn to_real<U: Real>(&self) -> TrigPoly<U> {
        self.map(|c| {
            Complex::new(
                U::from_f64(c.re.to_f64().unwrap_or(f64::NAN)).unwrap(),
                U::from_f64(c.im.to_f64().unwrap_or(f64::NAN)).unwrap(),
            )
        })
    }
}

impl<T: Real> TrigPoly<T> {
    pub fn eval(&self, x: T) -> Complex<T> {
        self.modes().fold(czero(), |acc, (k, c)| {
            let phase = T::from_i64(k).unwrap() * x;
            acc + c * Complex::new(phase.cos(), phase.sin())
        })
    }

    pub fn sample(&self, grid: &Grid<T>) -> Vec<Complex<T>> {
        grid.synthesize(&self.coeffs)
    }

    /// Real parts of the samples; the caller guarantees real-valuedness.
    pub fn sample_real(&self, grid: &Grid<T>) -> Vec<T> {
        self.sample(grid).into_iter().map(|c| c.re).collect()
    }

    /// Degree-`D` series from samples on the uniform grid of size `N`.
    ///
    /// Coefficients are the trapezoidal quadrature of the Fourier integral,
    /// exact for band-limited input when `N >= 2D + 2`.
    pub fn from_samples(values: &[Complex<T>], degree: usize) -> Result<Self> {
        let required = 2 * degree + 2;
        if values.len() < required {
            return Err(Error::UnderResolved { samples: values.len(), degree, required });
        }
        let grid = Grid::new(values.len())?;
        Self::from_grid_samples(&grid, values, degree)
    }

    pub fn from_grid_samples(grid: &Grid<T>, values: &[Complex<T>], degree: usize) -> Result<Self> {
        let required = 2 * degree + 2;
        if values.len() < required || values.len() != grid.len() {
            return Err(Error::UnderResolved { samples: values.len(), degree, required });
        }
        Ok(Self::from_coeffs(grid.fourier_coefficients(values, degree)))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let d = self.degree.max(other.degree) as i64;
        (-d..=d)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(T::zero(), T::max)
    }

    /// Coefficient-wise comparison with absolute tolerance.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn is_real_within(&self, tol: T) -> bool {
        self.max_abs_diff(&self.conj()) <= tol
    }

    /// Largest `|k|` whose coefficient exceeds `tol`.
    pub fn effective_degree_within(&self, tol: T) -> usize {
        self.modes()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }
}

impl<T: Scalar> PartialEq for TrigPoly<T> {
    fn eq(&self, other: &Self) -> bool {
        let d = self.degree.max(other.degree) as i64;
        (-d..=d).all(|k| self.coeff(k) == other.coeff(k))
    }
}

impl<T: Scalar> Add for &TrigPoly<T> {
    type Output = TrigPoly<T>;

    fn add(self, rhs: Self) -> TrigPoly<T> {
        let d = self.degree.max(rhs.degree) as i64;
        TrigPoly::from_coeffs((-d..=d).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<T: Scalar> Sub for &TrigPoly<T> {
    type Output = TrigPoly<T>;

    fn sub(self, rhs: Self) -> TrigPoly<T> {
        let d = self.degree.max(rhs.degree) as i64;
        TrigPoly::from_coeffs((-d..=d).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<T: Scalar> Neg for &TrigPoly<T> {
    type Output = TrigPoly<T>;

    fn neg(self) -> TrigPoly<T> {
        self.map(|c| -c.clone())
    }
}

/// Discrete convolution of the coefficient blocks.
impl<T: Scalar> Mul for &TrigPoly<T> {
    type Output = TrigPoly<T>;

    fn mul(self, rhs: Self) -> TrigPoly<T> {
        let degree = self.degree + rhs.degree;
        let mut coeffs = vec![czero::<T>(); 2 * degree + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.re.is_zero() && a.im.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                // (i - Da) + (j - Db) + D = i + j
                coeffs[i + j] = coeffs[i + j].clone() + a * b;
            }
        }
        TrigPoly { degree, coeffs }
    }
}

macro_rules! forward_owned_ops {
    ($($tr:ident :: $method:ident),*) => {$(
        impl<T: Scalar> $tr for TrigPoly<T> {
            type Output = TrigPoly<T>;
            fn $method(self, rhs: Self) -> TrigPoly<T> {
                (&self).$method(&rhs)
            }
        }
    )*};
}
forward_owned_ops!(Add::add, Sub::sub, Mul::mul);

// ---------------------------------------------------------------------------
// Text format: whitespace separated `(k, re, im)` triples.

/// Scalars that can be read from the config text format.
///
/// Floats accept ordinary decimal literals and `p/q` fractions. `Rational64`
/// accepts integers, fractions and terminating decimals, all exactly.
pub trait ParseScalar: Scalar {
    fn parse_scalar(s: &str) -> Option<Self>;
}

fn parse_fraction<T: Scalar>(s: &str, base: impl Fn(&str) -> Option<T>) -> Option<T> {
    match s.split_once('/') {
        Some((p, q)) => {
            let q = base(q.trim())?;
            if q.is_zero() {
                return None;
            }
            Some(base(p.trim())? / q)
        }
        None => base(s),
    }
}

impl ParseScalar for f64 {
    fn parse_scalar(s: &str) -> Option<Self> {
        parse_fraction(s, |t| t.parse::<f64>().ok().filter(|x| x.is_finite()))
    }
}

impl ParseScalar for f32 {
    fn parse_scalar(s: &str) -> Option<Self> {
        parse_fraction(s, |t| t.parse::<f32>().ok().filter(|x| x.is_finite()))
    }
}

fn parse_decimal_rational(s: &str) -> Option<Rational64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit() || c == '.') {
        return None;
    }
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if frac_part.contains('.') || frac_part.len() > 15 {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: i64 = if digits.is_empty() { return None } else { digits.parse().ok()? };
    let denom = 10i64.checked_pow(frac_part.len() as u32)?;
    let q = Rational64::new(numer, denom);
    Some(if neg { -q } else { q })
}

impl ParseScalar for Rational64 {
    fn parse_scalar(s: &str) -> Option<Self> {
        parse_fraction(s, parse_decimal_rational)
    }
}

/// Splits `(k, re, im) (k, re, im) ...` into raw string triples.
pub fn parse_triples(s: &str) -> Result<Vec<(i64, String, String)>> {
    let s = s.trim();
    if s.is_empty() || s == "0" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut rest = s;
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::Parse(format!("expected '(' at `{rest}`")))?;
        let close = open
            .find(')')
            .ok_or_else(|| Error::Parse(format!("unterminated triple in `{s}`")))?;
        let parts: Vec<&str> = open[..close].split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("triple `({})` must have 3 fields", &open[..close])));
        }
        let k = parts[0]
            .parse::<i64>()
            .map_err(|_| Error::Parse(format!("bad mode index `{}`", parts[0])))?;
        out.push((k, parts[1].to_string(), parts[2].to_string()));
        rest = open[close + 1..].trim_start();
    }
    Ok(out)
}

impl<T: ParseScalar> FromStr for TrigPoly<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut modes = Vec::new();
        for (k, re, im) in parse_triples(s)? {
            let re = T::parse_scalar(&re).ok_or_else(|| Error::Parse(format!("bad number `{re}`")))?;
            let im = T::parse_scalar(&im).ok_or_else(|| Error::Parse(format!("bad number `{im}`")))?;
            modes.push((k, Complex::new(re, im)));
        }
        Ok(Self::from_modes(modes))
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for TrigPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.modes() {
            if c.re.is_zero() && c.im.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "({k}, {}, {})", c.re, c.im)?;
        }
        if first {
            f.write_str("(0, 0, 0)")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------

/// 3×3 matrix of trig polynomials, indexed from 0.
#[derive(Clone, Debug)]
pub struct Matrix3Field<T> {
    entries: [[TrigPoly<T>; 3]; 3],
}

impl<T: Scalar> PartialEq for Matrix3Field<T> {
    fn eq(&self, other: &Self) -> bool {
        self.entries.iter().flatten().zip(other.entries.iter().flatten()).all(|(a, b)| a == b)
    }
}

impl<T: Scalar> Matrix3Field<T> {
    pub fn from_fn<F: FnMut(usize, usize) -> TrigPoly<T>>(mut f: F) -> Self {
        Self { entries: std::array::from_fn(|a| std::array::from_fn(|b| f(a, b))) }
    }

    pub fn zero() -> Self {
        Self::from_fn(|_, _| TrigPoly::zero())
    }

    pub fn identity() -> Self {
        Self::from_fn(|a, b| if a == b { TrigPoly::constant(T::one()) } else { TrigPoly::zero() })
    }

    pub fn get(&self, row: usize, col: usize) -> &TrigPoly<T> {
        &self.entries[row][col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: TrigPoly<T>) {
        self.entries[row][col] = value;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|a, b| self.entries[b][a].clone())
    }

    pub fn scale_real(&self, c: &T) -> Self {
        Self::from_fn(|a, b| self.entries[a][b].scale_real(c))
    }

    pub fn diff(&self) -> Self {
        Self::from_fn(|a, b| self.entries[a][b].diff())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        Self::from_fn(|a, b| {
            (0..3).fold(TrigPoly::zero(), |acc, c| &acc + &(&self.entries[a][c] * &rhs.entries[c][b]))
        })
    }

    pub fn is_symmetric(&self) -> bool {
        self.first_asymmetry().is_none()
    }

    pub(crate) fn first_asymmetry(&self) -> Option<(usize, usize)> {
        (0..3)
            .flat_map(|a| (a + 1..3).map(move |b| (a, b)))
            .find(|&(a, b)| self.entries[a][b] != self.entries[b][a])
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().flatten().all(TrigPoly::is_real)
    }

    /// Matrix of Fourier coefficients at mode `m`.
    pub fn fourier(&self, m: i64) -> [[Complex<T>; 3]; 3] {
        std::array::from_fn(|a| std::array::from_fn(|b| self.entries[a][b].coeff(m)))
    }

    pub fn max_degree(&self) -> usize {
        self.entries.iter().flatten().map(TrigPoly::effective_degree).max().unwrap_or(0)
    }

    /// Column `col` as a 3-vector of polynomials.
    pub fn column(&self, col: usize) -> [&TrigPoly<T>; 3] {
        std::array::from_fn(|a| &self.entries[a][col])
    }

    pub fn to_real<U: Real>(&self) -> Matrix3Field<U> {
        Matrix3Field::from_fn(|a, b| self.entries[a][b].to_real())
    }

    /// Checks symmetry and real-valuedness, returning a descriptive error.
    pub fn validate_symmetric_real(&self) -> Result<()> {
        if let Some((row, col)) = self.first_asymmetry() {
            return Err(Error::NotSymmetric { row, col });
        }
        for a in 0..3 {
            for b in 0..3 {
                if !self.entries[a][b].is_real() {
                    return Err(Error::NotReal { row: a, col: b });
                }
            }
        }
        Ok(())
    }
}

impl<T: Real> Matrix3Field<T> {
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for a in 0..3 {
            for b in 0..3 {
                worst = worst.max(self.entries[a][b].max_abs_diff(&other.entries[a][b]));
            }
        }
        worst
    }

    /// Pointwise values of every entry at `x`.
    pub fn eval(&self, x: T) -> [[Complex<T>; 3]; 3] {
        std::array::from_fn(|a| std::array::from_fn(|b| self.entries[a][b].eval(x)))
    }

    pub fn effective_degree_within(&self, tol: T) -> usize {
        self.entries.iter().flatten().map(|p| p.effective_degree_within(tol)).max().unwrap_or(0)
    }
}

impl<T: Scalar> Add for &Matrix3Field<T> {
    type Output = Matrix3Field<T>;

    fn add(self, rhs: Self) -> Matrix3Field<T> {
        Matrix3Field::from_fn(|a, b| &self.entries[a][b] + &rhs.entries[a][b])
    }
}

impl<T: Scalar> Sub for &Matrix3Field<T> {
    type Output = Matrix3Field<T>;

    fn sub(self, rhs: Self) -> Matrix3Field<T> {
        Matrix3Field::from_fn(|a, b| &self.entries[a][b] - &rhs.entries[a][b])
    }
}

impl<T: Scalar> Mul for &Matrix3Field<T> {
    type Output = Matrix3Field<T>;

    fn mul(self, rhs: Self) -> Matrix3Field<T> {
        self.matmul(rhs)
    }
}
