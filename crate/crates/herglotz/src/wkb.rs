//! Leading-order WKB: phase integral, quantization, pole accumulation constants and
//! approximate eigenfunctions.

use thiserror::Error;

use crate::pencil::{DiscreteGrid, PencilError, PencilProblem};
use crate::quad::{self, QuadError};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WkbError {
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error("outside WKB validity: g(x, {lambda}) = {g} <= 0 at x = {x}")]
    Invalid { lambda: f64, x: f64, g: f64 },
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("quantum {quantum} below WKB range in interval {j} (phase at the validity threshold is {min_phase})")]
    BelowRange { j: usize, quantum: f64, min_phase: f64 },
    #[error("no WKB-valid eigenvalues in interval {0}")]
    EmptyValidity(usize),
    #[error("pole index {0} out of range 1..={1}")]
    NoSuchPole(usize, usize),
}

/// Grid points used for the validity scan of `min_x g(x, λ)`.
pub const VALIDITY_SAMPLES: usize = 400;
/// Default quadrature tolerance.
pub const DEFAULT_QUAD_TOL: f64 = 1e-9;

fn quad_err<E: std::fmt::Display>(e: QuadError<E>) -> WkbError {
    WkbError::Quadrature(e.to_string())
}

/// Smallest `g(x, λ)` over the validity scan and where it occurs.
pub fn min_g<T: Real>(p: &PencilProblem, lambda: T) -> Result<(T, T), WkbError> {
    let n = VALIDITY_SAMPLES;
    let mut best = (T::infinity(), T::c(p.a));
    for i in 0..n {
        let x = T::c(p.a + (p.b - p.a) * i as f64 / (n - 1) as f64);
        let g = p.g(x, lambda)?;
        if g < best.0 {
            best = (g, x);
        }
    }
    Ok(best)
}

fn integrand<'a, T: Real>(p: &'a PencilProblem, lambda: T) -> impl FnMut(T) -> Result<T, WkbError> + 'a {
    move |x: T| {
        let g = p.g(x, lambda)?;
        if g <= T::zero() {
            return Err(WkbError::Invalid { lambda: lambda.to_f64_lossy(), x: x.to_f64_lossy(), g: g.to_f64_lossy() });
        }
        let (d, _) = p.d_with_derivative(x)?;
        Ok((g / d).sqrt())
    }
}

fn check_valid<T: Real>(p: &PencilProblem, lambda: T) -> Result<(), WkbError> {
    let (g, x) = min_g(p, lambda)?;
    if g <= T::zero() {
        return Err(WkbError::Invalid { lambda: lambda.to_f64_lossy(), x: x.to_f64_lossy(), g: g.to_f64_lossy() });
    }
    Ok(())
}

/// `(1/π) ∫ₐᵇ √(g(x, λ)/D(x)) dx`.
pub fn wkb_phase<T: Real>(p: &PencilProblem, lambda: T, quad_tol: T) -> Result<T, WkbError> {
    check_valid(p, lambda)?;
    let v = quad::integrate(integrand(p, lambda), T::c(p.a), T::c(p.b), quad_tol * T::PI()).map_err(|e| match e {
        QuadError::Integrand(w) => w,
        other => quad_err(other),
    })?;
    Ok(v / T::PI())
}

/// Lower end of the WKB-valid part of interval `j`: the `λ` where `min_x g` turns positive.
/// `min_x g` increases with `λ` inside each interval.
pub fn validity_threshold<T: Real>(p: &PencilProblem, j: usize) -> Result<T, WkbError> {
    let (lo_end, hi_end) = p.interval(j)?;
    let valid = |lam: f64| -> Result<bool, WkbError> { Ok(min_g(p, T::c(lam))?.0 > T::zero()) };
    let mut hi = if hi_end.is_finite() {
        let mut d = 1.0f64.min(0.5 * (hi_end - lo_end.max(hi_end - 2.0)));
        loop {
            if d < 1e-14 * hi_end.abs().max(1.0) {
                return Err(WkbError::EmptyValidity(j));
            }
            if valid(hi_end - d)? {
                break hi_end - d;
            }
            d *= 0.5;
        }
    } else {
        let start = if lo_end.is_finite() { lo_end } else { 0.0 };
        let mut step = 1.0;
        loop {
            if valid(start + step)? {
                break start + step;
            }
            step *= 2.0;
            if step > 1e300 {
                return Err(WkbError::EmptyValidity(j));
            }
        }
    };
    let mut lo = if lo_end.is_finite() {
        let mut d = 1e-12 * lo_end.abs().max(1.0);
        while valid(lo_end + d)? {
            d *= 10.0;
            if lo_end + d >= hi {
                return Ok(T::c(lo_end));
            }
        }
        lo_end + d
    } else {
        let mut step = 1.0;
        loop {
            let lam = hi - step;
            if !valid(lam)? {
                break lam;
            }
            step *= 2.0;
            if step > 1e300 {
                return Ok(T::neg_infinity());
            }
        }
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if valid(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(T::c(hi))
}

/// Solves `phase(λ) = quantum` in interval `j`.
pub fn wkb_eigenvalue<T: Real>(p: &PencilProblem, j: usize, quantum: T, tol: T) -> Result<T, WkbError> {
    let (_, hi_end) = p.interval(j)?;
    let qtol = T::c(DEFAULT_QUAD_TOL);
    let thr: T = validity_threshold(p, j)?;
    let thr = thr.to_f64_lossy();
    // phase is continuous from the threshold, where g touches zero
    let start = if thr.is_finite() { thr + 1e-12 * thr.abs().max(1.0) } else { f64::NEG_INFINITY };
    // the scan can miss the exact minimum of g, so a quadrature node may still see g <= 0 just
    // above the scanned threshold; such λ count as below the target
    let phase = |lam: f64| -> Result<f64, WkbError> {
        match wkb_phase(p, T::c(lam), qtol) {
            Ok(v) => Ok(v.to_f64_lossy()),
            Err(WkbError::Invalid { .. }) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e),
        }
    };
    let q = quantum.to_f64_lossy();
    let mut lo = start;
    if lo.is_finite() {
        let limit = if hi_end.is_finite() { hi_end } else { f64::INFINITY };
        let mut nudge = 1e-12 * lo.abs().max(1.0);
        let mut pmin = phase(lo)?;
        while pmin == f64::NEG_INFINITY && lo + nudge < limit {
            lo += nudge;
            nudge *= 2.0;
            pmin = phase(lo)?;
        }
        if pmin == f64::NEG_INFINITY {
            return Err(WkbError::EmptyValidity(j));
        }
        if q < pmin {
            return Err(WkbError::BelowRange { j, quantum: q, min_phase: pmin });
        }
    }
    let mut hi = if hi_end.is_finite() {
        let mut d = 0.5 * (hi_end - lo);
        loop {
            let lam = hi_end - d;
            if phase(lam)? >= q {
                break lam;
            }
            lo = lam;
            d *= 0.5;
            if d < 1e-15 * hi_end.abs().max(1.0) {
                return Err(WkbError::EmptyValidity(j));
            }
        }
    } else {
        let base = if lo.is_finite() { lo } else { 0.0 };
        let mut step = 1.0;
        loop {
            let lam = base + step;
            if phase(lam)? >= q {
                break lam;
            }
            lo = lam;
            step *= 2.0;
        }
    };
    if !lo.is_finite() {
        return Err(WkbError::EmptyValidity(j));
    }
    let tolf = tol.to_f64_lossy();
    while hi - lo > tolf * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phase(mid)? < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(T::c(0.5 * (lo + hi)))
}

/// Quantum for the mode with `k` interior zeros: `k + (Dirichlet ends)/2`.
pub fn mode_quantum<T: Real>(p: &PencilProblem, k: usize) -> T {
    T::c(k as f64 + 0.5 * p.dirichlet_ends() as f64)
}

/// WKB estimate of the eigenvalue with `k` interior zeros in interval `j`.
pub fn wkb_mode_eigenvalue<T: Real>(p: &PencilProblem, j: usize, k: usize, tol: T) -> Result<T, WkbError> {
    wkb_eigenvalue(p, j, mode_quantum(p, k), tol)
}

/// `Cᵢ = ((1/π) ∫ √(Wᵢ/D))²` for pole `i` (1-based), so that `λ ≈ αᵢ − Cᵢ/k²` near `αᵢ⁻`.
pub fn accumulation_constant<T: Real>(p: &PencilProblem, i: usize) -> Result<T, WkbError> {
    let n = p.pole_count();
    if i == 0 || i > n {
        return Err(WkbError::NoSuchPole(i, n));
    }
    let pole = &p.poles[i - 1];
    let f = |x: T| -> Result<T, WkbError> {
        let w: T = pole.w.eval(x).map_err(|source| PencilError::Field { name: format!("W{i}"), source })?;
        let (d, _) = p.d_with_derivative(x)?;
        if !(w > T::zero() && d > T::zero()) {
            return Err(PencilError::NotPositive { name: format!("W{i}/D"), x: x.to_f64_lossy(), value: (w / d).to_f64_lossy() }
                .into());
        }
        Ok((w / d).sqrt())
    };
    let v = quad::integrate(f, T::c(p.a), T::c(p.b), T::c(DEFAULT_QUAD_TOL)).map_err(|e| match e {
        QuadError::Integrand(w) => w,
        other => quad_err(other),
    })?;
    let s = v / T::PI();
    Ok(s * s)
}

/// `cos(φ(x) − θ) / (√D g^{1/4})` at the interior nodes, `φ(x) = ∫ₐˣ √(g/D)`, normalized to
/// max-norm 1 with a positive first entry. `θ` matches the left boundary condition.
pub fn wkb_eigenfunction(p: &PencilProblem, lambda: f64, grid: &DiscreteGrid) -> Result<Vec<f64>, WkbError> {
    check_valid(p, lambda)?;
    let nodes = grid.interior_nodes();
    let mut f = integrand(p, lambda);
    let (g0, d0) = (p.g(p.a, lambda)?, p.d_with_derivative(p.a)?.0);
    let kappa = (g0 / d0).sqrt();
    let mut theta = (-p.bc_left.b0).atan2(p.bc_left.b1 * kappa);
    let half = std::f64::consts::FRAC_PI_2;
    while theta <= -half {
        theta += std::f64::consts::PI;
    }
    while theta > half {
        theta -= std::f64::consts::PI;
    }
    let mut phi = 0.0;
    let mut x0 = p.a;
    let mut out = Vec::with_capacity(nodes.len());
    for &x in &nodes {
        phi += quad::integrate(&mut f, x0, x, DEFAULT_QUAD_TOL).map_err(|e| match e {
            QuadError::Integrand(w) => w,
            other => quad_err(other),
        })?;
        x0 = x;
        let g = p.g(x, lambda)?;
        let d = p.d_with_derivative(x)?.0;
        out.push((phi - theta).cos() / (d.sqrt() * g.powf(0.25)));
    }
    let norm = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let first = out.iter().copied().find(|v| v.abs() > 1e-10 * norm).unwrap_or(1.0);
    let s = first.signum() / norm;
    out.iter_mut().for_each(|v| *v *= s);
    Ok(out)
}
