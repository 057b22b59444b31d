#![allow(dead_code)]

use faer::Mat;
use herglotz::herglotz::{Jacobian3, QuadraticForm};
use rand::Rng;

/// Random symmetric `H = [[A, B], [Bᵀ, C]]` with `n ≥ 1`, `n + m ≤ 8`.
pub fn block_symmetric(rng: &mut impl Rng) -> (Mat<f64>, Mat<f64>, Mat<f64>, Mat<f64>) {
    let n = rng.random_range(1..=6);
    let m = rng.random_range(0..=(8 - n).min(5));
    let t = n + m;
    let mut h = Mat::<f64>::zeros(t, t);
    for i in 0..t {
        for j in 0..=i {
            let v = rng.random_range(-2.0..2.0);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let a = Mat::from_fn(n, n, |i, j| h[(i, j)]);
    let b = Mat::from_fn(n, m, |i, j| h[(i, n + j)]);
    let c = Mat::from_fn(m, m, |i, j| h[(n + i, n + j)]);
    (a, b, c, h)
}

/// Either uniform coefficients or a form built from two real roots with positive residues.
pub fn quadratic_form(rng: &mut impl Rng) -> QuadraticForm {
    if rng.random_bool(0.5) {
        QuadraticForm {
            alpha: rng.random_range(-5.0..5.0),
            beta: rng.random_range(-5.0..5.0),
            gamma: rng.random_range(-5.0..5.0),
            delta: rng.random_range(-5.0..5.0),
        }
    } else {
        let r2 = rng.random_range(-4.0..4.0);
        let r1 = r2 + rng.random_range(0.05..4.0);
        // one residue may be pushed negative
        let c1: f64 = rng.random_range(-0.5..3.0);
        let c2: f64 = rng.random_range(-0.5..3.0);
        QuadraticForm { alpha: c1 + c2, beta: -(c1 * r2 + c2 * r1), gamma: -(r1 + r2), delta: r1 * r2 }
    }
}

pub fn jacobian3(rng: &mut impl Rng) -> Jacobian3 {
    let mut v = [0.0; 9];
    for x in v.iter_mut() {
        *x = rng.random_range(-2.0..2.0);
    }
    if rng.random_bool(0.5) {
        // symmetric coupling makes the reduction Herglotz more often
        v[3] = v[1] + rng.random_range(-0.2..0.2);
        v[6] = v[2] + rng.random_range(-0.2..0.2);
        v[7] = v[5];
    }
    Jacobian3::from_slice(&v)
}

/// Sorted copy.
pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}
