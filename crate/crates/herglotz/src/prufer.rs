//! Prüfer-angle shooting.
//!
//! With `p = R cos Θ`, `p′ = R sin Θ` the pencil `−(D p′)′ = g p` becomes
//!
//! ```text
//! Θ′ = −sin²Θ − (g/D) cos²Θ − (D′/D) sin Θ cos Θ
//! ρ′ = (1 − g/D) sin Θ cos Θ − (D′/D) sin²Θ,      ρ = log R
//! ```
//!
//! Roots of `p` sit at `cos Θ = 0`, where `Θ′ = −1`, so every root is crossed downward and
//! the number of interior roots is the number of levels `π/2 − mπ` passed. For fixed `x`,
//! `Θ(x, λ)` decreases in `λ` inside each interval between poles.

use serde::Serialize;
use thiserror::Error;

use crate::ode::{self, OdeError};
use crate::pencil::{BoundaryCondition, PencilError, PencilProblem};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PruferError {
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError<PencilError>),
    #[error("lambda = {lambda} is within {dist:e} of the pole {alpha}; refused")]
    NearPole { lambda: f64, alpha: f64, dist: f64 },
    #[error("no bracket for (j = {j}, k = {k}) within the expansion budget; the integrator tolerance is likely too loose for this mode")]
    Bracket { j: usize, k: usize },
    #[error("converged to lambda = {lambda} with {crossings} crossings, expected {k}")]
    CrossingMismatch { lambda: f64, crossings: usize, k: usize },
    #[error("angle crossed a root level upward near x = {0}")]
    NotTransversal(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PruferState<T> {
    pub theta: T,
    pub rho: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PruferRun<T> {
    pub theta_a: T,
    pub theta_b: T,
    pub rho_b: T,
    /// Interior roots of `p` (downward crossings of `cos Θ = 0`).
    pub crossings: usize,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootResult<T> {
    pub lambda: T,
    pub theta_b: T,
    pub target: T,
    pub crossings: usize,
    pub iterations: usize,
    pub bracket: (T, T),
}

/// Angle in `(−π/2, π/2]` at which `(cos Θ, sin Θ)` satisfies `b0·p + b1·p′ = 0`.
pub fn boundary_angle<T: Real>(bc: &BoundaryCondition) -> T {
    let pi = T::PI();
    let half = T::FRAC_PI_2();
    let mut t = T::c(-bc.b0).atan2(T::c(bc.b1));
    while t <= -half {
        t = t + pi;
    }
    while t > half {
        t = t - pi;
    }
    t
}

/// Target value of `Θ(b)` for the eigenfunction with `k` interior roots.
pub fn target_angle<T: Real>(p: &PencilProblem, k: usize) -> T {
    let tb: T = boundary_angle(&p.bc_right);
    let t0 = if tb < T::FRAC_PI_2() { tb } else { tb - T::PI() };
    t0 - T::PI() * T::c(k as f64)
}

/// Number of levels `π/2 − mπ` strictly between `lo` and `hi`.
fn levels_between<T: Real>(lo: T, hi: T) -> usize {
    if !(lo < hi) {
        return 0;
    }
    // levels L_m = π/2 − mπ; L_m < hi  <=>  m > (π/2 − hi)/π
    let pi = T::PI();
    let half = T::FRAC_PI_2();
    let m_min = ((half - hi) / pi).floor() + T::one();
    let m_max = ((half - lo) / pi).ceil() - T::one();
    if m_max < m_min {
        0
    } else {
        (m_max - m_min).to_usize().map_or(0, |d| d + 1)
    }
}

/// Integrates the angle and log-radius equations across `[a, b]` at fixed `λ`.
pub fn integrate_prufer<T: Real>(p: &PencilProblem, lambda: T, rel_tol: T) -> Result<PruferRun<T>, PruferError> {
    let spread = pole_spread(p);
    for q in &p.poles {
        let dist = (lambda.to_f64_lossy() - q.alpha).abs();
        if dist < 1e-6 * spread {
            return Err(PruferError::NearPole { lambda: lambda.to_f64_lossy(), alpha: q.alpha, dist });
        }
    }
    let theta_a: T = boundary_angle(&p.bc_left);
    let rhs = |x: T, y: &[T; 2]| -> Result<[T; 2], PencilError> {
        let g = p.g(x, lambda)?;
        let (d, dd) = p.d_with_derivative(x)?;
        let (s, c) = y[0].sin_cos();
        let q = g / d;
        let r = dd / d;
        Ok([-s * s - q * c * c - r * s * c, (T::one() - q) * s * c - r * s * s])
    };
    let opts = ode::Options { rtol: rel_tol, atol: T::c(1e-12).max(T::epsilon()), max_steps: 1_000_000 };
    let mut upward: Option<f64> = None;
    let (y, stats) = ode::integrate(rhs, T::c(p.a), T::c(p.b), [theta_a, T::zero()], &opts, |x0, y0, _x1, y1| {
        if upward.is_none() && y1[0] > y0[0] && levels_between(y0[0], y1[0]) > 0 {
            upward = Some(x0.to_f64_lossy());
        }
    })?;
    if let Some(x) = upward {
        return Err(PruferError::NotTransversal(x));
    }
    let eta = T::c(1e-6);
    let crossings = levels_between(y[0] + eta, theta_a - eta);
    Ok(PruferRun { theta_a, theta_b: y[0], rho_b: y[1], crossings, steps: stats.accepted })
}

fn pole_spread(p: &PencilProblem) -> f64 {
    let locs = p.pole_locations();
    match (locs.first(), locs.last()) {
        (Some(lo), Some(hi)) => (hi - lo).max(1.0),
        _ => 1.0,
    }
}

/// Default integrator tolerance.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Eigenvalue with `k` interior roots in interval `j`, by bracketing and bisection on
/// `Θ(b, λ)`. `rel_tol` is the integrator tolerance; `tol` the relative bisection width.
pub fn shoot_eigenvalue<T: Real>(
    p: &PencilProblem,
    j: usize,
    k: usize,
    tol: T,
    rel_tol: T,
) -> Result<ShootResult<T>, PruferError> {
    let (lo_end, hi_end) = p.interval(j)?;
    let target: T = target_angle(p, k);
    let spread = pole_spread(p);
    let min_gap = 1e-6 * spread;
    let theta = |lam: f64| -> Result<T, PruferError> { Ok(integrate_prufer(p, T::c(lam), rel_tol)?.theta_b) };
    let above = |lam: f64| -> Result<bool, PruferError> { Ok(theta(lam)? > target) };

    // lower bracket: Θ(b) > target
    let lo = if lo_end.is_finite() {
        let width = if hi_end.is_finite() { 0.5 * (hi_end - lo_end) } else { spread };
        let mut d = width;
        loop {
            if d < min_gap {
                return Err(PruferError::Bracket { j, k });
            }
            let lam = lo_end + d;
            if above(lam)? {
                break lam;
            }
            d *= 0.25;
        }
    } else {
        let start = if hi_end.is_finite() { hi_end - spread } else { 0.0 };
        let mut step = 1.0;
        let mut found = None;
        for _ in 0..60 {
            let lam = start - step;
            if above(lam)? {
                found = Some(lam);
                break;
            }
            step *= 4.0;
        }
        found.ok_or(PruferError::Bracket { j, k })?
    };
    // upper bracket: Θ(b) <= target
    let hi = if hi_end.is_finite() {
        let mut d = 0.5 * (hi_end - lo);
        loop {
            if d < min_gap {
                return Err(PruferError::Bracket { j, k });
            }
            let lam = hi_end - d;
            if !above(lam)? {
                break lam;
            }
            d *= 0.25;
        }
    } else {
        let mut step = 1.0;
        let mut found = None;
        for _ in 0..60 {
            let lam = lo + step;
            if !above(lam)? {
                found = Some(lam);
                break;
            }
            step *= 4.0;
        }
        found.ok_or(PruferError::Bracket { j, k })?
    };
    let (mut l, mut h) = (lo, hi);
    let mut iterations = 0;
    let tolf = tol.to_f64_lossy();
    while h - l > tolf * (0.5 * (l + h)).abs().max(1.0) {
        let mid = 0.5 * (l + h);
        if mid <= l || mid >= h {
            break;
        }
        if above(mid)? {
            l = mid;
        } else {
            h = mid;
        }
        iterations += 1;
    }
    let lambda = 0.5 * (l + h);
    let run = integrate_prufer(p, T::c(lambda), rel_tol)?;
    if run.crossings != k {
        return Err(PruferError::CrossingMismatch { lambda, crossings: run.crossings, k });
    }
    Ok(ShootResult {
        lambda: T::c(lambda),
        theta_b: run.theta_b,
        target,
        crossings: run.crossings,
        iterations,
        bracket: (T::c(lo), T::c(hi)),
    })
}
