use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::trigpoly::{Matrix3Field, TrigPoly};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn real_poly(rng: &mut ChaCha8Rng, degree: usize, amp: f64) -> TrigPoly<f64> {
    let mut modes = vec![(0, Complex::new(rng.gen_range(-amp..amp), 0.0))];
    for k in 1..=degree as i64 {
        let c = Complex::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp)) * 0.5;
        modes.push((k, c));
        modes.push((-k, c.conj()));
    }
    TrigPoly::from_modes(modes)
}

pub fn complex_poly(rng: &mut ChaCha8Rng, degree: usize, amp: f64) -> TrigPoly<f64> {
    let d = degree as i64;
    TrigPoly::from_modes((-d..=d).map(|k| (k, Complex::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp)))))
}

pub fn symmetric_field(rng: &mut ChaCha8Rng, degree: usize, amp: f64) -> Matrix3Field<f64> {
    let mut m = Matrix3Field::zero();
    for a in 0..3 {
        for b in a..3 {
            let p = real_poly(rng, degree, amp);
            m.set(a, b, p.clone());
            m.set(b, a, p);
        }
    }
    m
}

pub fn real_field(rng: &mut ChaCha8Rng, degree: usize, amp: f64) -> Matrix3Field<f64> {
    Matrix3Field::from_fn(|_, _| real_poly(rng, degree, amp))
}
