//! Reference perturbation families used by the tests, the acceptance suite
//! and the bundled CLI configs.

use crate::geometry::CoframeFamily;
use crate::scalar::{int, Scalar};
use crate::trigpoly::{Matrix3Field, TrigPoly};

fn matrix<T: Scalar>(entries: [[TrigPoly<T>; 3]; 3]) -> Matrix3Field<T> {
    Matrix3Field::from_fn(|a, b| entries[a][b].clone())
}

fn scaled<T: Scalar>(p: TrigPoly<T>, c: i64) -> TrigPoly<T> {
    p.scale_real(&int::<T>(c))
}

/// Linear coframe with the rotation-like block `[[cos, sin], [sin, −cos]]`
/// in the transverse directions. Its spectrum is `n − ε²/(2(1−ε²))`.
pub fn temp_coframe<T: Scalar>() -> CoframeFamily<T> {
    let (c, s, z) = (TrigPoly::cos(1), TrigPoly::sin(1), TrigPoly::zero());
    let e1 = matrix([
        [z.clone(), z.clone(), z.clone()],
        [z.clone(), c.clone(), s.clone()],
        [z, s, -&c],
    ]);
    CoframeFamily::linear(e1).expect("real entries")
}

/// Linear, non-symmetric coframe perturbing only the first row.
pub fn skew_coframe<T: Scalar>() -> CoframeFamily<T> {
    let a = &(&TrigPoly::cos(1) - &TrigPoly::cos(2)) + &TrigPoly::cos(3);
    let b = &(&TrigPoly::sin(1) + &TrigPoly::sin(2)) - &TrigPoly::sin(3);
    let z = TrigPoly::zero();
    let e1 = matrix([
        [z.clone(), a, b],
        [z.clone(), z.clone(), z.clone()],
        [z.clone(), z.clone(), z],
    ]);
    CoframeFamily::linear(e1).expect("real entries")
}

/// `(h, k)` with `h = 2[[0,0,0],[0,cos,sin],[0,sin,−cos]]`.
pub fn explicit_1<T: Scalar>() -> (Matrix3Field<T>, Matrix3Field<T>) {
    let (c, s, z) = (TrigPoly::<T>::cos(1), TrigPoly::<T>::sin(1), TrigPoly::<T>::zero());
    let h = matrix([
        [z.clone(), z.clone(), z.clone()],
        [z.clone(), scaled(c.clone(), 2), scaled(s.clone(), 2)],
        [z.clone(), scaled(s.clone(), 2), scaled(c.clone(), -2)],
    ]);
    let k = matrix([
        [s, c.clone(), z.clone()],
        [c, z.clone(), z.clone()],
        [z.clone(), z.clone(), z],
    ]);
    (h, k)
}

/// `(h, k)` with `ĥ₁₁(0) = 1`, producing a nonzero first-order shift.
pub fn explicit_2<T: Scalar>() -> (Matrix3Field<T>, Matrix3Field<T>) {
    let (c, s, z) = (TrigPoly::<T>::cos(1), TrigPoly::<T>::sin(1), TrigPoly::<T>::zero());
    let one = TrigPoly::constant(T::one());
    let h = matrix([
        [one, c.clone(), s.clone()],
        [c.clone(), c.clone(), s.clone()],
        [s.clone(), s.clone(), -&c],
    ]);
    let k = matrix([
        [s.clone(), c.clone(), z.clone()],
        [c, -&s, z.clone()],
        [z.clone(), z.clone(), z],
    ]);
    (h, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn explicit_families_are_symmetric_and_real() {
        for (h, k) in [explicit_1::<Rational64>(), explicit_2::<Rational64>()] {
            assert!(h.validate_symmetric_real().is_ok());
            assert!(k.validate_symmetric_real().is_ok());
        }
    }

    #[test]
    fn temp_coframe_is_symmetric() {
        let cf = temp_coframe::<Rational64>();
        assert!(cf.e1().is_symmetric());
        assert!(!skew_coframe::<Rational64>().e1().is_symmetric());
    }
}
