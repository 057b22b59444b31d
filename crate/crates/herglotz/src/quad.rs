//! Adaptive Simpson quadrature.

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError<E> {
    #[error("integrand failed: {0}")]
    Integrand(E),
    #[error("non-finite integrand at x = {0}")]
    NonFinite(f64),
    #[error("recursion depth exhausted near x = {0}")]
    Depth(f64),
}

const MAX_DEPTH: u32 = 50;

struct Simpson<'f, T, E> {
    f: &'f mut dyn FnMut(T) -> Result<T, E>,
}

impl<T: Real, E> Simpson<'_, T, E> {
    fn eval(&mut self, x: T) -> Result<T, QuadError<E>> {
        let v = (self.f)(x).map_err(QuadError::Integrand)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadError::NonFinite(x.to_f64_lossy()))
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &mut self,
        a: T,
        b: T,
        fa: T,
        fm: T,
        fb: T,
        whole: T,
        tol: T,
        depth: u32,
    ) -> Result<T, QuadError<E>> {
        let two = T::c(2.0);
        let m = (a + b) / two;
        let (lm, rm) = ((a + m) / two, (m + b) / two);
        let (flm, frm) = (self.eval(lm)?, self.eval(rm)?);
        let six = T::c(6.0);
        let left = (m - a) / six * (fa + T::c(4.0) * flm + fm);
        let right = (b - m) / six * (fm + T::c(4.0) * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= T::c(15.0) * tol || depth == 0 || m <= a || m >= b {
            if depth == 0 && delta.abs() > T::c(15.0) * tol {
                return Err(QuadError::Depth(m.to_f64_lossy()));
            }
            return Ok(left + right + delta / T::c(15.0));
        }
        let half = tol / two;
        Ok(self.recurse(a, m, fa, flm, fm, left, half, depth - 1)?
            + self.recurse(m, b, fm, frm, fb, right, half, depth - 1)?)
    }
}

/// `∫ₐᵇ f` to absolute tolerance `tol`. The interval is pre-split into 16 panels so that
/// narrow features are not missed by the first estimate.
pub fn integrate<T: Real, E>(mut f: impl FnMut(T) -> Result<T, E>, a: T, b: T, tol: T) -> Result<T, QuadError<E>> {
    let mut s = Simpson { f: &mut f };
    let panels = 16;
    let h = (b - a) / T::c(panels as f64);
    let tol = tol / T::c(panels as f64);
    let mut total = T::zero();
    let mut x0 = a;
    let mut f0 = s.eval(a)?;
    for i in 1..=panels {
        let x1 = if i == panels { b } else { a + h * T::c(i as f64) };
        let f1 = s.eval(x1)?;
        let m = (x0 + x1) / T::c(2.0);
        let fm = s.eval(m)?;
        let whole = (x1 - x0) / T::c(6.0) * (f0 + T::c(4.0) * fm + f1);
        total = total + s.recurse(x0, x1, f0, fm, f1, whole, tol, MAX_DEPTH)?;
        x0 = x1;
        f0 = f1;
    }
    Ok(total)
}
