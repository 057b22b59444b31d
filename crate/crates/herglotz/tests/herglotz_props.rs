mod common;

use faer::Mat;
use herglotz::herglotz::{
    check_quadratic_reduction, is_herglotz_sampled, reduced_pencil_eigenvalues, schur_reduce, QuadraticForm,
    RationalHerglotz, Verdict, DEFAULT_SAMPLES,
};
use herglotz::linalg;
use num_complex::Complex;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rational() -> impl Strategy<Value = RationalHerglotz<f64>> {
    (0.0f64..2.0, -3.0f64..3.0, prop::collection::vec((0.3f64..3.0, 0.05f64..4.0), 1..6)).prop_map(|(c, b, raw)| {
        // cumulative gaps give strictly increasing poles
        let mut at = -4.0;
        let poles = raw
            .into_iter()
            .map(|(gap, a)| {
                at += gap;
                (at, a)
            })
            .collect();
        RationalHerglotz::new(c, b, poles).unwrap()
    })
}

/// A point of `(lo, hi)` kept away from both ends.
fn inside(lo: f64, hi: f64, t: f64) -> f64 {
    lo + (0.02 + 0.96 * t) * (hi - lo)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn derivative_is_positive_and_matches_difference_quotient(f in rational(), t in 0.0f64..1.0, slot in 0usize..8) {
        let poles: Vec<f64> = f.poles().iter().map(|p| p.0).collect();
        let mut edges = vec![poles[0] - 5.0];
        edges.extend(&poles);
        edges.push(poles[poles.len() - 1] + 5.0);
        let k = slot % (edges.len() - 1);
        let lam = inside(edges[k], edges[k + 1], t);
        let d = f.derivative_real(lam).unwrap();
        prop_assert!(d > 0.0);
        let h = 1e-6 * (edges[k + 1] - edges[k]);
        let fd = (f.eval_real(lam + h).unwrap() - f.eval_real(lam - h).unwrap()) / (2.0 * h);
        prop_assert!((fd - d).abs() <= 1e-4 * d.max(1.0), "{fd} vs {d}");
    }

    #[test]
    fn one_root_between_consecutive_poles(f in rational()) {
        let roots = f.real_roots(1e-13).unwrap();
        for w in f.poles().windows(2) {
            let (lo, hi) = (w[0].0, w[1].0);
            // sign-change count on a fine grid, independent of the root finder
            let xs: Vec<f64> = (1..4000).map(|i| lo + (hi - lo) * i as f64 / 4000.0).collect();
            let changes = xs.windows(2).filter(|p| (f.eval_real(p[0]).unwrap() < 0.0) != (f.eval_real(p[1]).unwrap() < 0.0)).count();
            prop_assert_eq!(changes, 1);
            let inner: Vec<f64> = roots.iter().copied().filter(|r| lo < *r && *r < hi).collect();
            prop_assert_eq!(inner.len(), 1);
            let (r, d) = (inner[0], 1e-9 * inner[0].abs().max(1.0));
            prop_assert!(f.eval_real(r - d).unwrap() < 0.0 && f.eval_real(r + d).unwrap() > 0.0, "root {r}");
        }
        let outer = if f.c() > 0.0 { 2 } else { 0 };
        prop_assert_eq!(roots.len(), f.poles().len() - 1 + outer);
    }

    #[test]
    fn upper_half_plane_maps_to_itself(f in rational(), re in -8.0f64..8.0, im in -6.0f64..2.0) {
        let z = Complex::new(re, 10f64.powf(im));
        prop_assert!(f.eval(z).unwrap().im > 0.0);
    }
}

/// `(α, β, γ, δ)` with `|γ² − 4δ| ≥ 0.1`.
fn separated_form() -> impl Strategy<Value = QuadraticForm> {
    (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0)
        .prop_filter("discriminant near zero", |&(_, _, g, d)| (g * g - 4.0 * d).abs() >= 0.1)
        .prop_map(|(alpha, beta, gamma, delta)| QuadraticForm { alpha, beta, gamma, delta })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn quadratic_check_agrees_with_sampling(q in separated_form()) {
        let r = check_quadratic_reduction(q.alpha, q.beta, q.gamma, q.delta);
        let roots = q.denominator_roots();
        let sampled = is_herglotz_sampled(|z| Ok::<_, ()>(q.eval(z)), DEFAULT_SAMPLES, &roots).unwrap();
        match r.verdict {
            Verdict::Indeterminate(_) => {}
            ref v => prop_assert_eq!(v.is_herglotz(), sampled, "{:?}: {:?}", q, v),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn schur_reduction_recovers_spectrum_off_c(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c, h) = common::block_symmetric(&mut rng);
        let cs = if c.nrows() > 0 { linalg::symmetric_eigenvalues(&c).unwrap() } else { Vec::new() };
        let off_c = |v: &f64| cs.iter().all(|z| (z - v).abs() > 1e-6);
        let full = common::sorted(linalg::symmetric_eigenvalues(&h).unwrap().into_iter().filter(off_c).collect());
        let red = common::sorted(reduced_pencil_eigenvalues(&a, &b, &c, 1e-12).unwrap().into_iter().filter(off_c).collect());
        prop_assert_eq!(full.len(), red.len());
        for (x, y) in full.iter().zip(&red) {
            prop_assert!((x - y).abs() <= 1e-6, "{x} vs {y}");
        }
        // the reduced matrix is singular at each eigenvalue of H away from spec(C)
        let norm = h.norm_l2();
        for &lam in full.iter().filter(|v| cs.iter().all(|z| (*z - **v).abs() > 1e-3)) {
            let s = schur_reduce(&a, &b, &c, lam).unwrap();
            let smin = linalg::smallest_singular_value(&s).unwrap();
            prop_assert!(smin <= 1e-8 * norm.max(1.0) * (1.0 + s.norm_l2()), "smin {smin} at {lam}");
        }
    }
}

#[test]
fn zero_coupling_reduces_to_shifted_a() {
    let a = Mat::from_fn(2, 2, |i, j| if i == j { 1.0 + i as f64 } else { 0.5 });
    let c = Mat::from_fn(1, 1, |_, _| 3.0);
    let b = Mat::<f64>::zeros(2, 1);
    let s = schur_reduce(&a, &b, &c, 0.7).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let want = a[(i, j)] - if i == j { 0.7 } else { 0.0 };
            assert_eq!(s[(i, j)], want);
        }
    }
}
