//! Dormand–Prince 5(4) integrator with adaptive step size.

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError<E> {
    #[error("right-hand side failed at t = {t}: {source}")]
    Rhs { t: f64, source: E },
    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("step budget exhausted at t = {0}")]
    TooManySteps(f64),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct Options<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for Options<T> {
    fn default() -> Self {
        Self { rtol: T::c(1e-9), atol: T::c(1e-12), max_steps: 200_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// difference between the 5th- and 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1`. `observer` sees every accepted step as
/// `(t_prev, y_prev, t_new, y_new)`.
pub fn integrate<T, const N: usize, Er>(
    mut f: impl FnMut(T, &[T; N]) -> Result<[T; N], Er>,
    t0: T,
    t1: T,
    y0: [T; N],
    opts: &Options<T>,
    mut observer: impl FnMut(T, &[T; N], T, &[T; N]),
) -> Result<([T; N], Stats), OdeError<Er>>
where
    T: Real,
{
    let mut stats = Stats::default();
    let mut rhs = |t: T, y: &[T; N], stats: &mut Stats| {
        stats.evaluations += 1;
        f(t, y).map_err(|source| OdeError::Rhs { t: t.to_f64_lossy(), source })
    };
    let span = t1 - t0;
    if span == T::zero() {
        return Ok((y0, stats));
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut k0 = rhs(t, &y, &mut stats)?;
    let mut h = span.abs() * T::c(1e-3);
    {
        // standard starting-step heuristic
        let mut d0 = T::zero();
        let mut d1 = T::zero();
        for i in 0..N {
            let sc = opts.atol + opts.rtol * y[i].abs();
            d0 = d0 + (y[i] / sc).powi(2);
            d1 = d1 + (k0[i] / sc).powi(2);
        }
        let n = T::c(N as f64);
        let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
        if d0 > T::c(1e-5) && d1 > T::c(1e-5) {
            h = h.min(T::c(0.01) * d0 / d1);
        }
    }
    let eps = T::epsilon() * T::c(16.0);
    let mut last_factor_rejected = false;
    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(OdeError::TooManySteps(t.to_f64_lossy()));
        }
        let remaining = (t1 - t) * dir;
        if remaining <= eps * t1.abs().max(T::one()) {
            return Ok((y, stats));
        }
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        if h <= eps * t.abs().max(T::one()) {
            return Err(OdeError::StepUnderflow(t.to_f64_lossy()));
        }
        let hs = h * dir;
        let mut k = [[T::zero(); N]; 7];
        k[0] = k0;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = T::c(A[s][j]);
                if a != T::zero() {
                    for i in 0..N {
                        ys[i] = ys[i] + hs * a * kj[i];
                    }
                }
            }
            k[s] = rhs(t + hs * T::c(C[s]), &ys, &mut stats)?;
        }
        let mut ynew = y;
        for i in 0..N {
            let mut acc = T::zero();
            for s in 0..6 {
                acc = acc + T::c(A[6][s]) * k[s][i];
            }
            ynew[i] = y[i] + hs * acc;
        }
        let mut err = T::zero();
        for i in 0..N {
            let mut e = T::zero();
            for s in 0..7 {
                e = e + T::c(E[s]) * k[s][i];
            }
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err = err + (hs * e / sc).powi(2);
        }
        let err = (err / T::c(N as f64)).sqrt();
        if !err.is_finite() || ynew.iter().any(|v| !v.is_finite()) {
            stats.rejected += 1;
            h = h * T::c(0.25);
            last_factor_rejected = true;
            continue;
        }
        if err <= T::one() {
            let tnew = if last { t1 } else { t + hs };
            observer(t, &y, tnew, &ynew);
            stats.accepted += 1;
            t = tnew;
            y = ynew;
            k0 = k[6];
            let mut fac = T::c(0.9) * err.max(T::c(1e-10)).powf(T::c(-0.2));
            fac = fac.min(if last_factor_rejected { T::one() } else { T::c(5.0) }).max(T::c(0.2));
            h = h * fac;
            last_factor_rejected = false;
            if last {
                return Ok((y, stats));
            }
        } else {
            stats.rejected += 1;
            let fac = (T::c(0.9) * err.powf(T::c(-0.2))).max(T::c(0.1));
            h = h * fac;
            last_factor_rejected = true;
        }
    }
}
