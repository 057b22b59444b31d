use herglotz::epi::{
    self, heterogeneity_experiment, principal_growth_rate, reproduction_number, sign_consistency, vaccine_sweep,
    Background, HeterogeneityKind, VaccineStrategy,
};
use herglotz::pencil::{solve_spectrum, DiscreteGrid, DEFAULT_REALITY_TOL};
use herglotz::presets;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NX: usize = 200;

#[test]
fn growth_rate_matches_dense_linearization() {
    let rp = presets::rabies_vaccine().unwrap();
    let p = epi::build_stability_pencil(&rp).unwrap();
    let grid = DiscreteGrid::new(&p, 80).unwrap();
    let s = solve_spectrum(&p, &grid, DEFAULT_REALITY_TOL).unwrap();
    let smallest = s.pairs.iter().map(|e| e.lambda).fold(f64::INFINITY, f64::min);
    let l0 = principal_growth_rate(&rp, 80).unwrap();
    assert!((l0 + smallest).abs() < 1e-9, "{l0} vs {smallest}");
    // the spread absent vaccine
    assert!(l0 > 0.0);
}

#[test]
fn vaccine_baseline_is_unstable_and_consistent() {
    let rp = presets::rabies_vaccine().unwrap();
    let sc = sign_consistency(&rp, NX).unwrap();
    assert!(sc.consistent);
    assert!(sc.lambda0 > 0.0 && sc.r0 > 1.0, "{sc:?}");
}

#[test]
fn homogeneous_is_stable_and_consistent() {
    let sc = sign_consistency(&presets::rabies_fig3().unwrap(), NX).unwrap();
    assert!(sc.consistent);
    assert!(sc.lambda0 < 0.0 && sc.r0 < 1.0);
    let exact = epi::homogeneous_r0(0.0027, 0.0357, 0.98, 0.2192, 0.2);
    assert!((sc.r0 - exact).abs() / exact < 1e-6);
}

#[test]
fn r0_is_linear_in_constant_beta() {
    let base = presets::rabies_fig3().unwrap();
    let doubled = herglotz::epi::RabiesParams::from_exprs(0.0027, 0.5, 0.0357, 0.98, "0.2", "0.4384", "0.1371").unwrap();
    let (r1, r2) = (reproduction_number(&base, 60).unwrap(), reproduction_number(&doubled, 60).unwrap());
    assert!((r2 / r1 - 2.0).abs() < 1e-10);
}

#[test]
fn heterogeneous_beta_raises_r0() {
    let hom = reproduction_number(&presets::rabies_fig3().unwrap(), NX).unwrap();
    let het = reproduction_number(&epi::heterogeneity_params(HeterogeneityKind::BetaC1, 0.5, Background::default()).unwrap(), NX)
        .unwrap();
    assert!(het > hom);
}

#[test]
fn sign_consistency_over_random_strategies() {
    let rp = presets::rabies_vaccine().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for c0 in [0.2, 0.44, 0.72] {
        for _ in 0..100 {
            let l: f64 = rng.random_range(0.01..=1.0);
            let a0: f64 = rng.random_range(0.0..=(1.0 - l).min(0.5));
            let vs = VaccineStrategy::new(c0, a0, l).unwrap();
            let beta = epi::vaccine_beta(&rp.beta, &vs).unwrap();
            let sc = sign_consistency(&rp.with_beta(beta), 60).unwrap();
            assert!(sc.consistent, "{vs:?}: {sc:?}");
        }
    }
}

#[test]
fn growth_rate_decreases_with_c0() {
    let rp = presets::rabies_vaccine().unwrap();
    for (a0, l) in [(0.3, 0.4), (0.0, 1.0), (0.1, 0.2), (0.45, 0.1)] {
        let mut prev = f64::INFINITY;
        for c0 in [0.0, 0.2, 0.44, 0.72, 0.95] {
            let v = epi::strategy_growth_rate(&rp, &VaccineStrategy::new(c0, a0, l).unwrap(), NX).unwrap();
            assert!(v <= prev + 1e-12, "({a0}, {l}) c0 = {c0}: {v} > {prev}");
            prev = v;
        }
    }
}

#[test]
fn coarse_sweep_threshold_and_structure() {
    let rp = presets::rabies_vaccine().unwrap();
    let (a0s, ls) = (epi::a0_grid(0.05), epi::l_grid(0.05));
    let low = vaccine_sweep(&rp, 0.3, &a0s, &ls, NX).unwrap();
    assert!(!low.any_stable());
    assert!(low.contour.is_empty());
    let high = vaccine_sweep(&rp, 0.95, &a0s, &ls, NX).unwrap();
    assert!(high.any_stable());
    assert!(high.stable_count() < high.points.len(), "a poor strategy still fails at c0 = 0.95");
    assert!(!high.contour.is_empty());
    let best = high.points.iter().map(|p| p.lambda0).fold(f64::INFINITY, f64::min);
    assert_eq!(high.minimizer.lambda0, best);
    // every admissible pair appears exactly once, in grid order
    let expected = a0s.iter().map(|&a| ls.iter().filter(|&&l| a + l <= 1.0 + 1e-9).count()).sum::<usize>();
    assert_eq!(high.points.len(), expected);
}

#[test]
fn sweep_is_deterministic() {
    let rp = presets::rabies_vaccine().unwrap();
    let (a0s, ls) = (epi::a0_grid(0.1), epi::l_grid(0.1));
    let a = vaccine_sweep(&rp, 0.6, &a0s, &ls, 100).unwrap();
    let b = vaccine_sweep(&rp, 0.6, &a0s, &ls, 100).unwrap();
    assert_eq!(a, b);
}

#[test]
fn empty_sweep_is_an_error() {
    let rp = presets::rabies_vaccine().unwrap();
    assert!(matches!(vaccine_sweep(&rp, 0.5, &[0.8], &[0.5], 50), Err(epi::EpiError::EmptySweep)));
}

#[test]
fn diffusion_panels_are_flat_for_homogeneous_rates() {
    let d0s: Vec<f64> = (0..=29).map(|i| 0.01 + 0.01 * i as f64).collect();
    let t = heterogeneity_experiment(HeterogeneityKind::DiffusionD0, &d0s, Background::default(), NX).unwrap();
    assert!(t.relative_spread < 1e-8, "{}", t.relative_spread);
    assert!(t.degenerate_diffusion);
    let c3s: Vec<f64> = (0..=9).map(|i| 0.1 * i as f64).collect();
    let t = heterogeneity_experiment(HeterogeneityKind::DiffusionC3, &c3s, Background::default(), NX).unwrap();
    assert!(t.relative_spread < 1e-8);
    assert!(!t.degenerate_diffusion);
    // with heterogeneous transmission the diffusion level matters
    let t = heterogeneity_experiment(HeterogeneityKind::DiffusionD0, &d0s, Background { c1: 0.5, c2: 0.0 }, NX).unwrap();
    assert!(t.relative_spread > 1e-4);
}

#[test]
fn rate_panels_minimize_at_homogeneity() {
    let cs: Vec<f64> = (-9..=9).map(|i| i as f64 / 10.0).collect();
    for kind in [HeterogeneityKind::BetaC1, HeterogeneityKind::AlphaC2] {
        let t = heterogeneity_experiment(kind, &cs, Background::default(), NX).unwrap();
        assert_eq!(t.argmin, 0.0, "{kind:?}");
        assert_eq!(t.assumed_diffusion, Some(0.1371));
    }
}
