//! Scalar rational Herglotz functions, the sign conditions for reaction systems, and the
//! block (Schur complement) reduction of a symmetric matrix to a Herglotz pencil.

use faer::Mat;
use num_complex::Complex;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, LinalgError};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HerglotzError {
    #[error("evaluation at the pole {0}")]
    Pole(f64),
    #[error("invalid Herglotz function: {0}")]
    Invalid(String),
    #[error("no sign change of f on ({0}, {1})")]
    NoRoot(f64, f64),
    #[error("lambda = {0} is numerically in the spectrum of C (smallest singular value {1:e})")]
    InSpectrumOfC(f64, f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `f(λ) = B + Cλ + Σ Aᵢ/(αᵢ − λ)` with `C ≥ 0`, `Aᵢ > 0` and strictly increasing `αᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalHerglotz<T> {
    c: T,
    b: T,
    poles: Vec<(T, T)>,
}

impl<T: Real> RationalHerglotz<T> {
    pub fn new(c: T, b: T, poles: Vec<(T, T)>) -> Result<Self, HerglotzError> {
        let bad = |m: String| Err(HerglotzError::Invalid(m));
        if !(c >= T::zero()) || !c.is_finite() || !b.is_finite() {
            return bad(format!("need finite C >= 0 and finite B, got C = {c}, B = {b}"));
        }
        if c == T::zero() && poles.is_empty() {
            return bad("constant function: need C > 0 or at least one pole".into());
        }
        for (i, &(alpha, a)) in poles.iter().enumerate() {
            if !alpha.is_finite() || !(a > T::zero()) || !a.is_finite() {
                return bad(format!("pole {i}: need finite alpha and residue A > 0, got ({alpha}, {a})"));
            }
            if i > 0 && !(poles[i - 1].0 < alpha) {
                return bad(format!("poles must be strictly increasing at index {i}"));
            }
        }
        Ok(Self { c, b, poles })
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn poles(&self) -> &[(T, T)] {
        &self.poles
    }

    fn check_pole(&self, re: T, im: T) -> Result<(), HerglotzError> {
        if im == T::zero() {
            if let Some(&(alpha, _)) = self.poles.iter().find(|p| p.0 == re) {
                return Err(HerglotzError::Pole(alpha.to_f64_lossy()));
            }
        }
        Ok(())
    }

    pub fn eval(&self, lambda: Complex<T>) -> Result<Complex<T>, HerglotzError> {
        self.check_pole(lambda.re, lambda.im)?;
        let mut f = Complex::new(self.b, T::zero()) + lambda * self.c;
        for &(alpha, a) in &self.poles {
            f = f + Complex::new(a, T::zero()) / (Complex::new(alpha, T::zero()) - lambda);
        }
        Ok(f)
    }

    pub fn eval_real(&self, lambda: T) -> Result<T, HerglotzError> {
        self.check_pole(lambda, T::zero())?;
        Ok(self.poles.iter().fold(self.b + self.c * lambda, |f, &(alpha, a)| f + a / (alpha - lambda)))
    }

    /// `f'(λ) = C + Σ Aᵢ/(αᵢ − λ)²`, strictly positive off the poles.
    pub fn derivative_real(&self, lambda: T) -> Result<T, HerglotzError> {
        self.check_pole(lambda, T::zero())?;
        Ok(self.poles.iter().fold(self.c, |d, &(alpha, a)| {
            let r = alpha - lambda;
            d + a / (r * r)
        }))
    }

    /// Real root in `(lo, hi)`, which must not contain a pole. `f` is increasing there, so
    /// bisection on the sign is exact up to `tol`.
    pub fn solve_in_interval(&self, lo: T, hi: T, tol: T) -> Result<T, HerglotzError> {
        let (mut lo, mut hi) = (lo, hi);
        let (flo, fhi) = (self.eval_real(lo)?, self.eval_real(hi)?);
        if !(lo < hi) || !(flo < T::zero() && fhi > T::zero()) {
            return Err(HerglotzError::NoRoot(lo.to_f64_lossy(), hi.to_f64_lossy()));
        }
        for _ in 0..400 {
            let mid = lo + (hi - lo) / T::c(2.0);
            if hi - lo <= tol * T::one().max(mid.abs()) || mid <= lo || mid >= hi {
                return Ok(mid);
            }
            if self.eval_real(mid)? < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo + (hi - lo) / T::c(2.0))
    }

    /// All real roots. Between consecutive poles there is exactly one; on each unbounded end
    /// there is one exactly when `C > 0`.
    pub fn real_roots(&self, tol: T) -> Result<Vec<T>, HerglotzError> {
        let mut out = Vec::new();
        let n = self.poles.len();
        let big = |from: T, dir: T| -> Result<T, HerglotzError> {
            let mut step = T::one();
            for _ in 0..2000 {
                let x = from + dir * step;
                let v = self.eval_real(x)?;
                if (dir > T::zero() && v > T::zero()) || (dir < T::zero() && v < T::zero()) {
                    return Ok(x);
                }
                step = step * T::c(2.0);
            }
            Err(HerglotzError::NoRoot(from.to_f64_lossy(), f64::INFINITY))
        };
        // a point beside the pole `alpha` on the side `dir` where f has the sign of -dir;
        // the first probe stays within `reach` so that it cannot pass a neighbouring pole
        let near = |alpha: T, dir: T, reach: T| -> Result<T, HerglotzError> {
            let mut eps = reach;
            for _ in 0..2000 {
                let x = alpha + dir * eps;
                if x != alpha {
                    let v = self.eval_real(x)?;
                    if (dir > T::zero() && v < T::zero()) || (dir < T::zero() && v > T::zero()) {
                        return Ok(x);
                    }
                }
                eps = eps / T::c(2.0);
            }
            Err(HerglotzError::NoRoot(alpha.to_f64_lossy(), alpha.to_f64_lossy()))
        };
        if n == 0 {
            let x = -self.b / self.c;
            return Ok(vec![x]);
        }
        let half_gap = |i: usize| (self.poles[i + 1].0 - self.poles[i].0) / T::c(2.0);
        if self.c > T::zero() {
            let hi = near(self.poles[0].0, -T::one(), T::one())?;
            let lo = big(hi, -T::one())?;
            out.push(self.solve_in_interval(lo, hi, tol)?);
        }
        for i in 0..n.saturating_sub(1) {
            let lo = near(self.poles[i].0, T::one(), half_gap(i))?;
            let hi = near(self.poles[i + 1].0, -T::one(), half_gap(i))?;
            out.push(self.solve_in_interval(lo, hi, tol)?);
        }
        if self.c > T::zero() {
            let lo = near(self.poles[n - 1].0, T::one(), T::one())?;
            let hi = big(lo, T::one())?;
            out.push(self.solve_in_interval(lo, hi, tol)?);
        }
        Ok(out)
    }
}

/// Upper-half-plane sampling oracle. Points come from a deterministic low-discrepancy
/// sequence over `[re_lo, re_hi] × [im_lo, im_hi]` (log-uniform in the imaginary part), plus
/// small circles around each structure point, clipped to the upper half-plane. A complex pole
/// inside the half-plane can violate the sign only on the lower half of its circle.
#[derive(Debug, Clone)]
pub struct SamplingOracle {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
    pub structure: Vec<Complex<f64>>,
}

const PROBE_RADII: [f64; 6] = [0.3, 1e-1, 1e-2, 1e-3, 1e-4, 1e-6];
// fractions of π
const PROBE_ANGLES: [f64; 10] = [0.05, 0.3, 0.5, 0.7, 0.95, 1.05, 1.3, 1.5, 1.7, 1.95];

impl SamplingOracle {
    /// Bracket `[min − 10·spread, max + 10·spread]` around the real parts of the structure
    /// points, with `spread ≥ 1`.
    pub fn around(structure: &[Complex<f64>]) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for z in structure.iter().filter(|z| z.re.is_finite()) {
            lo = lo.min(z.re);
            hi = hi.max(z.re);
        }
        if !lo.is_finite() {
            lo = 0.0;
            hi = 0.0;
        }
        let spread = (hi - lo).max(1.0);
        Self {
            re_lo: lo - 10.0 * spread,
            re_hi: hi + 10.0 * spread,
            im_lo: 1e-3,
            im_hi: 10.0,
            structure: structure.to_vec(),
        }
    }

    pub fn points(&self, sample_count: usize) -> Vec<Complex<f64>> {
        // R2 sequence (generalised golden ratio)
        const G: f64 = 1.324_717_957_244_746;
        let (a1, a2) = (1.0 / G, 1.0 / (G * G));
        let (llo, lhi) = (self.im_lo.ln(), self.im_hi.ln());
        let mut pts: Vec<Complex<f64>> = (0..sample_count)
            .map(|i| {
                let u = (0.5 + a1 * (i + 1) as f64).fract();
                let v = (0.5 + a2 * (i + 1) as f64).fract();
                Complex::new(self.re_lo + u * (self.re_hi - self.re_lo), (llo + v * (lhi - llo)).exp())
            })
            .collect();
        for z in &self.structure {
            for r in PROBE_RADII {
                for t in PROBE_ANGLES {
                    let theta = t * std::f64::consts::PI;
                    let p = z + Complex::from_polar(r, theta);
                    if p.im > 0.0 {
                        pts.push(p);
                    }
                }
            }
        }
        pts
    }

    /// True iff `Im f(λ) > 0` at every sample point.
    pub fn check<E>(
        &self,
        sample_count: usize,
        mut f: impl FnMut(Complex<f64>) -> Result<Complex<f64>, E>,
    ) -> Result<bool, E> {
        for z in self.points(sample_count) {
            if !(f(z)?.im > 0.0) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Default number of bracket samples for the oracle.
pub const DEFAULT_SAMPLES: usize = 500;

/// Samples `sample_count` upper-half-plane points (bracket chosen around `structure`) and
/// reports whether `Im f > 0` at all of them.
pub fn is_herglotz_sampled<E>(
    f: impl FnMut(Complex<f64>) -> Result<Complex<f64>, E>,
    sample_count: usize,
    structure: &[Complex<f64>],
) -> Result<bool, E> {
    SamplingOracle::around(structure).check(sample_count, f)
}

/// Partials of a two-species reaction term at a steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jacobian2 {
    pub fu: f64,
    pub fv: f64,
    pub gu: f64,
    pub gv: f64,
}

/// Partials of a three-species reaction term (one diffusing species `u`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jacobian3 {
    pub fu: f64,
    pub fv: f64,
    pub fw: f64,
    pub gu: f64,
    pub gv: f64,
    pub gw: f64,
    pub hu: f64,
    pub hv: f64,
    pub hw: f64,
}

impl Jacobian3 {
    pub fn from_slice(v: &[f64; 9]) -> Self {
        Self { fu: v[0], fv: v[1], fw: v[2], gu: v[3], gv: v[4], gw: v[5], hu: v[6], hv: v[7], hw: v[8] }
    }

    /// `λ − f_u − (f_v q + f_w s)/p` where `(q, s)` solve the two non-diffusing rows; the
    /// multiplier `H(λ) − f_u` of `p` in the reduced problem. Computed by a 2×2 solve.
    pub fn reduced_symbol(&self, lambda: Complex<f64>) -> Complex<f64> {
        let a11 = lambda - self.gv;
        let a12 = Complex::from(-self.gw);
        let a21 = Complex::from(-self.hv);
        let a22 = lambda - self.hw;
        let det = a11 * a22 - a12 * a21;
        let q = (a22 * self.gu - a12 * self.hu) / det;
        let s = (a11 * self.hu - a21 * self.gu) / det;
        lambda - (q * self.fv + s * self.fw)
    }
}

/// Two-species sign condition `f_v g_u ≥ 0`.
pub fn check_two_species(j: &Jacobian2) -> bool {
    j.fv * j.gu >= 0.0
}

/// Coefficients of `λ − (αλ + β)/(λ² + γλ + δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticForm {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl QuadraticForm {
    pub fn eval(&self, lambda: Complex<f64>) -> Complex<f64> {
        let num = lambda * self.alpha + self.beta;
        let den = lambda * lambda + lambda * self.gamma + self.delta;
        lambda - num / den
    }

    /// Roots of the denominator (complex in general).
    pub fn denominator_roots(&self) -> [Complex<f64>; 2] {
        let disc = Complex::from(self.gamma * self.gamma - 4.0 * self.delta).sqrt();
        [(-self.gamma + disc) / 2.0, (-self.gamma - disc) / 2.0]
    }
}

pub fn derive_quadratic_form(j: &Jacobian3) -> QuadraticForm {
    QuadraticForm {
        alpha: j.fv * j.gu + j.fw * j.hu,
        beta: j.fv * (j.hu * j.gw - j.gu * j.hw) + j.fw * (j.hv * j.gu - j.hu * j.gv),
        gamma: -(j.gv + j.hw),
        delta: j.gv * j.hw - j.gw * j.hv,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", content = "reason", rename_all = "snake_case")]
pub enum Verdict {
    Herglotz,
    NotHerglotz(String),
    Indeterminate(String),
}

impl Verdict {
    pub fn is_herglotz(&self) -> bool {
        matches!(self, Verdict::Herglotz)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticReport {
    pub form: QuadraticForm,
    pub verdict: Verdict,
    /// Real roots `r₁ > r₂` of the denominator, when they exist.
    pub roots: Option<(f64, f64)>,
    /// Residues of `(αλ+β)/(λ²+γλ+δ)` at `r₁`, `r₂`.
    pub residues: Option<(f64, f64)>,
    /// `βγ − αδ`.
    pub compact_first: f64,
    /// `β² − α(βγ − αδ)`.
    pub compact_second: f64,
    /// Both compact inequalities hold (`βγ − αδ > 0`, `β² − α(βγ − αδ) < 0`).
    pub compact_holds: bool,
    /// Compact inequalities agree with the primitive verdict (`None` when indeterminate).
    pub compact_agrees: Option<bool>,
}

impl QuadraticReport {
    pub fn is_herglotz(&self) -> bool {
        self.verdict.is_herglotz()
    }
}

/// Decides whether `λ − (αλ+β)/(λ²+γλ+δ)` is Herglotz from its partial fractions: the
/// denominator must have real distinct roots and both residues must be positive.
pub fn check_quadratic_reduction(alpha: f64, beta: f64, gamma: f64, delta: f64) -> QuadraticReport {
    let form = QuadraticForm { alpha, beta, gamma, delta };
    let compact_first = beta * gamma - alpha * delta;
    let compact_second = beta * beta - alpha * compact_first;
    let compact_holds = compact_first > 0.0 && compact_second < 0.0;
    let disc = gamma * gamma - 4.0 * delta;
    let mut roots = None;
    let mut residues = None;
    let verdict = if alpha == 0.0 && beta == 0.0 {
        Verdict::Herglotz
    } else if disc < 0.0 {
        Verdict::NotHerglotz("denominator has complex roots".into())
    } else if disc == 0.0 {
        Verdict::Indeterminate("denominator has a double root".into())
    } else {
        let sq = disc.sqrt();
        let sgn = if gamma >= 0.0 { 1.0 } else { -1.0 };
        let q = -0.5 * (gamma + sgn * sq);
        let (x1, x2) = if q != 0.0 { (q, delta / q) } else { (sq / 2.0, -sq / 2.0) };
        let (r1, r2) = if x1 > x2 { (x1, x2) } else { (x2, x1) };
        let c1 = (alpha * r1 + beta) / (r1 - r2);
        let c2 = (alpha * r2 + beta) / (r2 - r1);
        roots = Some((r1, r2));
        residues = Some((c1, c2));
        let scale = alpha.abs() * r1.abs().max(r2.abs()) + beta.abs();
        let vanish = |c: f64| c.abs() * (r1 - r2) <= 1e-14 * scale;
        if vanish(c1) || vanish(c2) {
            Verdict::Indeterminate("a residue vanishes".into())
        } else if c1 > 0.0 && c2 > 0.0 {
            Verdict::Herglotz
        } else {
            Verdict::NotHerglotz(format!("negative residue ({c1:e}, {c2:e})"))
        }
    };
    let compact_agrees = match &verdict {
        Verdict::Indeterminate(_) => None,
        v => Some(v.is_herglotz() == compact_holds),
    };
    QuadraticReport {
        form,
        verdict,
        roots,
        residues,
        compact_first,
        compact_second,
        compact_holds,
        compact_agrees,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreeSpeciesReport {
    /// First displayed determinant expression (must be `> 0`).
    pub first: f64,
    /// Second displayed determinant expression (must be `> 0`).
    pub second: f64,
    pub holds: bool,
    pub primitive: QuadraticReport,
    /// Set when the determinant conditions and the primitive verdict disagree.
    pub disagreement: bool,
}

fn det2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    a * d - b * c
}

/// Evaluates the two determinant inequalities for the three-species reduction directly from
/// the Jacobian and cross-checks them against the partial-fraction test.
pub fn check_three_species(j: &Jacobian3) -> ThreeSpeciesReport {
    let fg = det2(j.fv, j.fw, j.gv, j.gw);
    let fh = det2(j.fv, j.fw, j.hv, j.hw);
    let guv = det2(j.gu, j.gv, j.hu, j.hv);
    let guw = det2(j.gu, j.gw, j.hu, j.hw);
    let first = fg * guv + fh * guw;
    let second = (j.hu * guw + j.gu * guv) * (j.fv * fg + j.fw * fh);
    let holds = first > 0.0 && second > 0.0;
    let q = derive_quadratic_form(j);
    let primitive = check_quadratic_reduction(q.alpha, q.beta, q.gamma, q.delta);
    let disagreement = match primitive.verdict {
        Verdict::Indeterminate(_) => false,
        ref v => v.is_herglotz() != holds,
    };
    ThreeSpeciesReport { first, second, holds, primitive, disagreement }
}

fn check_square(m: &Mat<f64>, name: &str) -> Result<usize, HerglotzError> {
    if m.nrows() != m.ncols() {
        return Err(HerglotzError::Invalid(format!("{name} must be square, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(m.nrows())
}

/// `A − λI − B(C − λI)⁻¹Bᵀ` for the symmetric block matrix `H = [[A, B], [Bᵀ, C]]`
/// (`A` n×n, `B` n×m, `C` m×m).
pub fn schur_reduce(a: &Mat<f64>, b: &Mat<f64>, c: &Mat<f64>, lambda: f64) -> Result<Mat<f64>, HerglotzError> {
    let n = check_square(a, "A")?;
    let m = check_square(c, "C")?;
    if b.nrows() != n || b.ncols() != m {
        return Err(HerglotzError::Invalid(format!(
            "B must be {n}x{m}, got {}x{}",
            b.nrows(),
            b.ncols()
        )));
    }
    let mut a_shift = a.clone();
    for i in 0..n {
        a_shift[(i, i)] -= lambda;
    }
    if m == 0 {
        return Ok(a_shift);
    }
    let mut c_shift = c.clone();
    for i in 0..m {
        c_shift[(i, i)] -= lambda;
    }
    let smin = linalg::smallest_singular_value(&c_shift)?;
    let scale = linalg::largest_singular_value(c)?.max(lambda.abs()).max(1.0);
    if smin <= 1e-12 * scale {
        return Err(HerglotzError::InSpectrumOfC(lambda, smin));
    }
    let bt = b.transpose().to_owned();
    let x = linalg::solve(&c_shift, &bt)?;
    Ok(a_shift - b * x)
}

/// Eigenvalues of `H` off `spec(C)`, found only from the reduced pencil: on each interval
/// between consecutive eigenvalues of `C` the eigenvalues of the reduced matrix decrease in
/// `λ`, so the count of its negative eigenvalues increases by one at each eigenvalue of `H`.
pub fn reduced_pencil_eigenvalues(
    a: &Mat<f64>,
    b: &Mat<f64>,
    c: &Mat<f64>,
    tol: f64,
) -> Result<Vec<f64>, HerglotzError> {
    let n = check_square(a, "A")?;
    let _ = check_square(c, "C")?;
    let mut cs = if c.nrows() > 0 { linalg::symmetric_eigenvalues(c)? } else { Vec::new() };
    cs.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
    let norm = a.norm_l2().max(b.norm_l2()).max(c.norm_l2());
    let bound = 2.0 * norm + 1.0;
    let gap = 1e-9 * (1.0 + norm);
    let negatives = |lam: f64| -> Result<usize, HerglotzError> {
        let s = schur_reduce(a, b, c, lam)?;
        let s = Mat::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
        Ok(linalg::symmetric_eigenvalues(&s)?.iter().filter(|&&e| e < 0.0).count())
    };
    let mut edges = vec![-bound];
    edges.extend(cs.iter().copied());
    edges.push(bound);
    let mut out = Vec::new();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0] + gap, w[1] - gap);
        if !(lo < hi) {
            continue;
        }
        let (nlo, nhi) = (negatives(lo)?, negatives(hi)?);
        for level in nlo..nhi {
            let (mut l, mut h) = (lo, hi);
            while h - l > tol * (1.0 + l.abs()) {
                let mid = 0.5 * (l + h);
                if negatives(mid)? > level {
                    h = mid;
                } else {
                    l = mid;
                }
            }
            out.push(0.5 * (l + h));
        }
    }
    Ok(out)
}
