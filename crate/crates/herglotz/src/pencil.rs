//! The rational Sturm–Liouville pencil, its finite-difference linearization and the
//! interval/oscillation indexing of the discrete spectrum.

use std::path::Path;

use faer::Mat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeffs::{CoefficientField, FieldError};
use crate::linalg::{self, LinalgError, Tridiagonal};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PencilError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("{name} must be positive, got {value} at x = {x}")]
    NotPositive { name: String, x: f64, value: f64 },
    #[error("coefficient {name}: {source}")]
    Field { name: String, source: FieldError },
    #[error("boundary elimination is singular at the {0} end (3*b1 -/+ 2*dx*b0 = 0)")]
    SingularBoundary(&'static str),
    #[error("grid needs n_x >= 4, got {0}")]
    GridTooSmall(usize),
    #[error("lambda = {0} is at the pole {1}")]
    AtPole(f64, f64),
    #[error("reality violated: {discarded} of {total} eigenvalues have imaginary parts above tolerance (largest {max_imag:e})")]
    RealityViolated { discarded: usize, total: usize, max_imag: f64 },
    #[error("all-zero vector")]
    ZeroVector,
    #[error("vector length {got} does not match {want} interior points")]
    Length { got: usize, want: usize },
    #[error("interval index {0} out of range (problem has {1} poles)")]
    NoSuchInterval(usize, usize),
    #[error("stencil is not symmetrizable; inertia counting unavailable")]
    NotSymmetrizable,
    #[error("eigenvalue search failed: {0}")]
    Search(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("problem file: {0}")]
    Io(String),
}

/// `b0·u + b1·u′ = 0` at an end point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryCondition {
    pub b0: f64,
    pub b1: f64,
}

impl BoundaryCondition {
    pub const DIRICHLET: Self = Self { b0: 1.0, b1: 0.0 };
    pub const NEUMANN: Self = Self { b0: 0.0, b1: 1.0 };

    pub fn is_dirichlet(&self) -> bool {
        self.b1 == 0.0 && self.b0 != 0.0
    }

    fn validate(&self, side: &str) -> Result<(), PencilError> {
        if !self.b0.is_finite() || !self.b1.is_finite() || (self.b0 == 0.0 && self.b1 == 0.0) {
            return Err(PencilError::Invalid(format!("bc_{side}: (b0, b1) must be finite and not both zero")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pole {
    pub alpha: f64,
    pub w: CoefficientField,
}

/// `−(D p′)′ = (λ W₀ − Σ Wᵢ/(λ − αᵢ) − V) p` on `[a, b]` with Robin conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilProblem {
    pub a: f64,
    pub b: f64,
    pub d: CoefficientField,
    pub v: CoefficientField,
    pub w0: CoefficientField,
    pub poles: Vec<Pole>,
    pub bc_left: BoundaryCondition,
    pub bc_right: BoundaryCondition,
}

fn field_err(name: &str) -> impl Fn(FieldError) -> PencilError + '_ {
    move |source| PencilError::Field { name: name.to_string(), source }
}

impl PencilProblem {
    pub fn new(
        (a, b): (f64, f64),
        d: CoefficientField,
        v: CoefficientField,
        w0: CoefficientField,
        poles: Vec<Pole>,
        bc_left: BoundaryCondition,
        bc_right: BoundaryCondition,
    ) -> Result<Self, PencilError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(PencilError::Invalid(format!("domain [{a}, {b}] must be finite with a < b")));
        }
        bc_left.validate("left")?;
        bc_right.validate("right")?;
        for (i, p) in poles.iter().enumerate() {
            if !p.alpha.is_finite() {
                return Err(PencilError::Invalid(format!("pole {i}: alpha must be finite")));
            }
            if i > 0 && !(poles[i - 1].alpha < p.alpha) {
                return Err(PencilError::Invalid("pole locations must be strictly increasing".into()));
            }
        }
        Ok(Self { a, b, d, v, w0, poles, bc_left, bc_right })
    }

    /// Builds a problem from expression strings.
    pub fn from_exprs(
        domain: (f64, f64),
        d: &str,
        v: &str,
        w0: &str,
        poles: &[(f64, &str)],
        bc_left: BoundaryCondition,
        bc_right: BoundaryCondition,
    ) -> Result<Self, PencilError> {
        let (a, b) = domain;
        let parse = |name: &str, s: &str| CoefficientField::parse(s, a, b).map_err(field_err(name));
        let poles = poles
            .iter()
            .enumerate()
            .map(|(i, (alpha, w))| Ok(Pole { alpha: *alpha, w: parse(&format!("W{}", i + 1), w)? }))
            .collect::<Result<Vec<_>, PencilError>>()?;
        Self::new(domain, parse("D", d)?, parse("V", v)?, parse("W0", w0)?, poles, bc_left, bc_right)
    }

    pub fn pole_count(&self) -> usize {
        self.poles.len()
    }

    pub fn pole_locations(&self) -> Vec<f64> {
        self.poles.iter().map(|p| p.alpha).collect()
    }

    /// Open interval `(αⱼ, αⱼ₊₁)` with infinite ends.
    pub fn interval(&self, j: usize) -> Result<(f64, f64), PencilError> {
        let n = self.poles.len();
        if j > n {
            return Err(PencilError::NoSuchInterval(j, n));
        }
        let lo = if j == 0 { f64::NEG_INFINITY } else { self.poles[j - 1].alpha };
        let hi = if j == n { f64::INFINITY } else { self.poles[j].alpha };
        Ok((lo, hi))
    }

    /// `g(x, λ) = λ W₀(x) − Σ Wᵢ(x)/(λ − αᵢ) − V(x)`.
    pub fn g<T: Real>(&self, x: T, lambda: T) -> Result<T, PencilError> {
        let mut g = lambda * self.w0.eval(x).map_err(field_err("W0"))? - self.v.eval(x).map_err(field_err("V"))?;
        for (i, p) in self.poles.iter().enumerate() {
            let den = lambda - T::c(p.alpha);
            if den == T::zero() {
                return Err(PencilError::AtPole(lambda.to_f64_lossy(), p.alpha));
            }
            g = g - p.w.eval(x).map_err(field_err(&format!("W{}", i + 1)))? / den;
        }
        Ok(g)
    }

    pub fn d_with_derivative<T: Real>(&self, x: T) -> Result<(T, T), PencilError> {
        self.d.eval_d(x).map_err(field_err("D"))
    }

    /// Number of Dirichlet ends (0, 1 or 2).
    pub fn dirichlet_ends(&self) -> usize {
        usize::from(self.bc_left.is_dirichlet()) + usize::from(self.bc_right.is_dirichlet())
    }

    pub fn to_file(&self) -> Result<ProblemFile, PencilError> {
        let src = |name: &str, f: &CoefficientField| {
            f.to_expression()
                .ok_or_else(|| PencilError::Invalid(format!("{name} is not expression-backed; cannot serialize")))
        };
        Ok(ProblemFile {
            domain: [NumOrExpr::Num(self.a), NumOrExpr::Num(self.b)],
            d: src("D", &self.d)?,
            v: src("V", &self.v)?,
            w0: src("W0", &self.w0)?,
            poles: self
                .poles
                .iter()
                .enumerate()
                .map(|(i, p)| Ok(PoleFile { alpha: p.alpha, w: src(&format!("W{}", i + 1), &p.w)? }))
                .collect::<Result<_, PencilError>>()?,
            bc_left: self.bc_left,
            bc_right: self.bc_right,
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self, PencilError> {
        let f: ProblemFile = serde_json::from_str(s).map_err(|e| PencilError::Io(e.to_string()))?;
        f.into_problem()
    }

    pub fn from_json_file(path: &Path) -> Result<Self, PencilError> {
        let s = std::fs::read_to_string(path).map_err(|e| PencilError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&s)
    }

    pub fn to_json_string(&self) -> Result<String, PencilError> {
        serde_json::to_string_pretty(&self.to_file()?).map_err(|e| PencilError::Io(e.to_string()))
    }
}

/// A domain end point: a number, or a constant expression such as `"pi"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumOrExpr {
    Num(f64),
    Expr(String),
}

impl NumOrExpr {
    fn value(&self) -> Result<f64, PencilError> {
        match self {
            NumOrExpr::Num(v) => Ok(*v),
            NumOrExpr::Expr(s) => {
                let e = crate::coeffs::parse_expr(s).map_err(|e| field_err("domain")(e.into()))?;
                if !e.is_constant() {
                    return Err(PencilError::Invalid(format!("domain end point '{s}' depends on x")));
                }
                e.eval(0.0).map_err(|e| field_err("domain")(e.into()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleFile {
    pub alpha: f64,
    #[serde(rename = "W")]
    pub w: String,
}

/// On-disk problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub domain: [NumOrExpr; 2],
    #[serde(rename = "D")]
    pub d: String,
    #[serde(rename = "V")]
    pub v: String,
    #[serde(rename = "W0")]
    pub w0: String,
    #[serde(default)]
    pub poles: Vec<PoleFile>,
    pub bc_left: BoundaryCondition,
    pub bc_right: BoundaryCondition,
}

impl ProblemFile {
    pub fn into_problem(self) -> Result<PencilProblem, PencilError> {
        let domain = (self.domain[0].value()?, self.domain[1].value()?);
        let poles: Vec<(f64, &str)> = self.poles.iter().map(|p| (p.alpha, p.w.as_str())).collect();
        PencilProblem::from_exprs(domain, &self.d, &self.v, &self.w0, &poles, self.bc_left, self.bc_right)
    }
}

/// Uniform grid with `n_x` cells; unknowns live at the `n_x − 1` interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscreteGrid {
    pub nx: usize,
    pub a: f64,
    pub b: f64,
}

impl DiscreteGrid {
    pub fn new(p: &PencilProblem, nx: usize) -> Result<Self, PencilError> {
        if nx < 4 {
            return Err(PencilError::GridTooSmall(nx));
        }
        Ok(Self { nx, a: p.a, b: p.b })
    }

    pub fn dx(&self) -> f64 {
        (self.b - self.a) / self.nx as f64
    }

    pub fn interior_len(&self) -> usize {
        self.nx - 1
    }

    /// Node `i`, `0 ≤ i ≤ n_x`.
    pub fn node(&self, i: usize) -> f64 {
        if i == self.nx {
            self.b
        } else {
            self.a + i as f64 * self.dx()
        }
    }

    pub fn interior_nodes(&self) -> Vec<f64> {
        (1..self.nx).map(|i| self.node(i)).collect()
    }
}

/// Grid samples of the pencil: `K ≈ −(D u′)′` with the boundary unknowns eliminated, and
/// the diagonal coefficient vectors.
#[derive(Debug, Clone)]
pub struct Stencil<T> {
    pub k: Tridiagonal<T>,
    pub v: Vec<T>,
    pub w0: Vec<T>,
    pub w: Vec<Vec<T>>,
    pub alphas: Vec<T>,
}

fn positive<T: Real>(name: &str, x: T, value: T) -> Result<T, PencilError> {
    if value > T::zero() {
        Ok(value)
    } else {
        Err(PencilError::NotPositive { name: name.into(), x: x.to_f64_lossy(), value: value.to_f64_lossy() })
    }
}

/// Diffusion part of the stencil and the boundary elimination coefficients, shared with
/// the weighted problem in `epi`.
pub fn diffusion_stencil<T: Real>(
    d: &CoefficientField,
    grid: &DiscreteGrid,
    bc_left: BoundaryCondition,
    bc_right: BoundaryCondition,
) -> Result<Tridiagonal<T>, PencilError> {
    let n = grid.interior_len();
    let dx = T::c(grid.dx());
    let dx2 = dx * dx;
    let half = |i: usize| T::c(grid.a) + (T::c(i as f64) + T::c(0.5)) * dx;
    // D at x_{i+1/2}, i = 0..n_x-1
    let dh = (0..grid.nx)
        .map(|i| {
            let x = half(i);
            positive("D", x, d.eval(x).map_err(field_err("D"))?)
        })
        .collect::<Result<Vec<T>, PencilError>>()?;
    let mut diag = vec![T::zero(); n];
    let mut lower = vec![T::zero(); n - 1];
    let mut upper = vec![T::zero(); n - 1];
    for r in 0..n {
        // interior node i = r + 1 couples to D_{i-1/2} = dh[r] and D_{i+1/2} = dh[r+1]
        diag[r] = (dh[r] + dh[r + 1]) / dx2;
        if r > 0 {
            lower[r - 1] = -dh[r] / dx2;
        }
        if r + 1 < n {
            upper[r] = -dh[r + 1] / dx2;
        }
    }
    let three = T::c(3.0);
    let two_dx = T::c(2.0) * dx;
    let (b0, b1) = (T::c(bc_left.b0), T::c(bc_left.b1));
    let den = three * b1 - two_dx * b0;
    if den == T::zero() {
        return Err(PencilError::SingularBoundary("left"));
    }
    let cl = b1 / den;
    // u_0 = cl (4 u_1 - u_2) enters row 0 with weight -D_{1/2}/dx^2
    diag[0] = diag[0] - T::c(4.0) * cl * dh[0] / dx2;
    upper[0] = upper[0] + cl * dh[0] / dx2;
    let (b0, b1) = (T::c(bc_right.b0), T::c(bc_right.b1));
    let den = three * b1 + two_dx * b0;
    if den == T::zero() {
        return Err(PencilError::SingularBoundary("right"));
    }
    let cr = b1 / den;
    let last = grid.nx - 1;
    diag[n - 1] = diag[n - 1] - T::c(4.0) * cr * dh[last] / dx2;
    lower[n - 2] = lower[n - 2] + cr * dh[last] / dx2;
    Ok(Tridiagonal { lower, diag, upper })
}

impl<T: Real> Stencil<T> {
    pub fn build(p: &PencilProblem, grid: &DiscreteGrid) -> Result<Self, PencilError> {
        let k = diffusion_stencil(&p.d, grid, p.bc_left, p.bc_right)?;
        let xs: Vec<T> = grid.interior_nodes().into_iter().map(T::c).collect();
        let sample = |name: &str, f: &CoefficientField, pos: bool| {
            xs.iter()
                .map(|&x| {
                    let v = f.eval(x).map_err(field_err(name))?;
                    if pos {
                        positive(name, x, v)
                    } else {
                        Ok(v)
                    }
                })
                .collect::<Result<Vec<T>, PencilError>>()
        };
        let v = sample("V", &p.v, false)?;
        let w0 = sample("W0", &p.w0, true)?;
        let w = p
            .poles
            .iter()
            .enumerate()
            .map(|(i, pole)| sample(&format!("W{}", i + 1), &pole.w, true))
            .collect::<Result<Vec<_>, _>>()?;
        let alphas = p.poles.iter().map(|q| T::c(q.alpha)).collect();
        Ok(Self { k, v, w0, w, alphas })
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// `g(x_i, λ)` at the interior nodes.
    pub fn g(&self, lambda: T) -> Vec<T> {
        (0..self.len())
            .map(|i| {
                let mut g = lambda * self.w0[i] - self.v[i];
                for (w, &a) in self.w.iter().zip(&self.alphas) {
                    g = g - w[i] / (lambda - a);
                }
                g
            })
            .collect()
    }

    /// Number of negative pivots of `K − diag g(·, λ)`, which equals the number of discrete
    /// eigenvalues in `(αⱼ, λ)` for `λ ∈ Iⱼ`.
    pub fn inertia(&self, lambda: T) -> usize {
        let g = self.g(lambda);
        self.k.negative_count_shifted(|i| -g[i])
    }
}

/// Dense `(N+1)(n_x−1)` matrix of the auxiliary-function linearization. Unknown ordering is
/// `[u, v⁽¹⁾, …, v⁽ᴺ⁾]`; u-rows are divided by `W₀`.
pub fn assemble_linearization(p: &PencilProblem, grid: &DiscreteGrid) -> Result<Mat<f64>, PencilError> {
    let s = Stencil::<f64>::build(p, grid)?;
    Ok(assemble_from_stencil(&s))
}

fn assemble_from_stencil(s: &Stencil<f64>) -> Mat<f64> {
    let n = s.len();
    let npoles = s.w.len();
    let size = (npoles + 1) * n;
    let mut m = Mat::<f64>::zeros(size, size);
    for i in 0..n {
        let w0 = s.w0[i];
        m[(i, i)] = (s.k.diag[i] + s.v[i]) / w0;
        if i > 0 {
            m[(i, i - 1)] = s.k.lower[i - 1] / w0;
        }
        if i + 1 < n {
            m[(i, i + 1)] = s.k.upper[i] / w0;
        }
        for q in 0..npoles {
            let r = (q + 1) * n + i;
            m[(i, r)] = 1.0 / w0;
            m[(r, i)] = s.w[q][i];
            m[(r, r)] = s.alphas[q];
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPair {
    pub lambda: f64,
    /// Interval index `j` with `αⱼ < λ < αⱼ₊₁`.
    pub interval: usize,
    /// Position within the interval, 0 for the smallest.
    pub rank: usize,
    /// Grid sign changes of `u`.
    pub oscillation_count: usize,
    pub u: Vec<f64>,
    pub v: Vec<Vec<f64>>,
    pub imag_magnitude: f64,
    /// `max_i ‖v⁽ⁱ⁾ − Wᵢ u/(λ − αᵢ)‖∞` with `‖u‖∞ = 1`.
    pub residual: f64,
    /// Discrete equation residual from [`residual`].
    pub equation_residual: f64,
    pub near_pole: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discarded {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub grid: DiscreteGrid,
    pub poles: Vec<f64>,
    pub reality_tol: f64,
    /// Sorted by `(interval, λ)`.
    pub pairs: Vec<EigenPair>,
    pub discarded: Vec<Discarded>,
}

impl SpectrumResult {
    pub fn in_interval(&self, j: usize) -> impl Iterator<Item = &EigenPair> {
        self.pairs.iter().filter(move |e| e.interval == j)
    }

    /// Eigenpair `rank` of interval `j`.
    pub fn get(&self, j: usize, rank: usize) -> Option<&EigenPair> {
        self.in_interval(j).nth(rank)
    }

    /// First eigenpair of interval `j` with the given oscillation count.
    pub fn by_oscillation(&self, j: usize, k: usize) -> Option<&EigenPair> {
        self.in_interval(j).find(|e| !e.near_pole && e.oscillation_count == k)
    }
}

/// Default relative reality tolerance.
pub const DEFAULT_REALITY_TOL: f64 = 1e-8;

/// Full spectrum of the linearization, split by interval and indexed by oscillation count.
pub fn solve_spectrum(p: &PencilProblem, grid: &DiscreteGrid, reality_tol: f64) -> Result<SpectrumResult, PencilError> {
    let s = Stencil::<f64>::build(p, grid)?;
    let m = assemble_from_stencil(&s);
    let (vals, vecs) = linalg::eigen(&m)?;
    let n = s.len();
    let poles = p.pole_locations();
    let total = vals.len();
    let mut pairs = Vec::new();
    let mut discarded = Vec::new();
    for (c, z) in vals.iter().enumerate() {
        if z.im.abs() > reality_tol * z.re.abs().max(1.0) {
            discarded.push(Discarded { re: z.re, im: z.im });
            continue;
        }
        let lambda = z.re;
        let interval = match classify_interval(lambda, &poles) {
            Ok(j) => j,
            Err(_) => {
                discarded.push(Discarded { re: z.re, im: z.im });
                continue;
            }
        };
        // rotate the complex eigenvector so its largest entry is real, then keep the real part
        let col = vecs.col(c);
        let mut big = num_complex::Complex::new(0.0, 0.0);
        for r in 0..col.nrows() {
            if col[r].norm() > big.norm() {
                big = col[r];
            }
        }
        let phase = if big.norm() > 0.0 { big.conj() / big.norm() } else { num_complex::Complex::new(1.0, 0.0) };
        let full: Vec<f64> = (0..col.nrows()).map(|r| (col[r] * phase).re).collect();
        let mut u = full[..n].to_vec();
        let mut v: Vec<Vec<f64>> = (0..poles.len()).map(|q| full[(q + 1) * n..(q + 2) * n].to_vec()).collect();
        let unorm = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let near_pole = poles.iter().any(|a| (lambda - a).abs() < 1e3 * reality_tol * a.abs().max(1.0));
        if unorm == 0.0 {
            discarded.push(Discarded { re: z.re, im: z.im });
            continue;
        }
        let first = u.iter().copied().find(|x| x.abs() > 1e-10 * unorm).unwrap_or(1.0);
        let scale = first.signum() / unorm;
        u.iter_mut().for_each(|x| *x *= scale);
        v.iter_mut().flatten().for_each(|x| *x *= scale);
        let residual = stencil_aux_residual(&s, lambda, &u, &v);
        let oscillation_count = count_sign_changes(&u)?;
        let equation_residual = stencil_residual(&s, lambda, &u);
        pairs.push(EigenPair {
            lambda,
            interval,
            rank: 0,
            oscillation_count,
            u,
            v,
            imag_magnitude: z.im.abs(),
            residual,
            equation_residual,
            near_pole,
        });
    }
    if discarded.len() * 100 > total {
        let max_imag = discarded.iter().fold(0.0f64, |m, d| m.max(d.im.abs()));
        return Err(PencilError::RealityViolated { discarded: discarded.len(), total, max_imag });
    }
    pairs.sort_by(|x, y| x.interval.cmp(&y.interval).then(x.lambda.total_cmp(&y.lambda)));
    let mut rank = 0;
    for i in 0..pairs.len() {
        if i > 0 && pairs[i].interval != pairs[i - 1].interval {
            rank = 0;
        }
        pairs[i].rank = rank;
        rank += 1;
    }
    Ok(SpectrumResult { grid: *grid, poles, reality_tol, pairs, discarded })
}

/// Sign changes of `u` after dropping entries below `10⁻¹⁰·‖u‖∞`.
pub fn count_sign_changes(u: &[f64]) -> Result<usize, PencilError> {
    let norm = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if norm == 0.0 || !norm.is_finite() {
        return Err(PencilError::ZeroVector);
    }
    let thresh = 1e-10 * norm;
    let mut prev = 0.0;
    let mut count = 0;
    for &x in u.iter().filter(|x| x.abs() >= thresh) {
        if prev != 0.0 && prev * x < 0.0 {
            count += 1;
        }
        prev = x;
    }
    Ok(count)
}

/// Index `j` of the interval `(αⱼ, αⱼ₊₁)` containing `λ`.
pub fn classify_interval(lambda: f64, poles: &[f64]) -> Result<usize, PencilError> {
    for &a in poles {
        if (lambda - a).abs() <= 4.0 * f64::EPSILON * a.abs().max(1.0) {
            return Err(PencilError::AtPole(lambda, a));
        }
    }
    Ok(poles.iter().filter(|&&a| a < lambda).count())
}

fn stencil_residual<T: Real>(s: &Stencil<T>, lambda: T, u: &[T]) -> T {
    let ku = s.k.mul_vec(u);
    let g = s.g(lambda);
    let unorm = u.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let r = (0..u.len()).fold(T::zero(), |m, i| m.max((ku[i] - g[i] * u[i]).abs()));
    r / unorm
}

fn stencil_aux_residual(s: &Stencil<f64>, lambda: f64, u: &[f64], v: &[Vec<f64>]) -> f64 {
    let unorm = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut r = 0.0f64;
    for (q, vq) in v.iter().enumerate() {
        for i in 0..u.len() {
            r = r.max((vq[i] - s.w[q][i] * u[i] / (lambda - s.alphas[q])).abs());
        }
    }
    r / unorm
}

/// `maxᵢ ‖v⁽ⁱ⁾ − Wᵢ u/(λ − αᵢ)‖∞ / ‖u‖∞` for the auxiliary unknowns of the linearization.
pub fn auxiliary_residual(
    p: &PencilProblem,
    grid: &DiscreteGrid,
    lambda: f64,
    u: &[f64],
    v: &[Vec<f64>],
) -> Result<f64, PencilError> {
    let s = Stencil::<f64>::build(p, grid)?;
    if v.len() != s.alphas.len() {
        return Err(PencilError::Length { got: v.len(), want: s.alphas.len() });
    }
    for part in std::iter::once(u).chain(v.iter().map(Vec::as_slice)) {
        if part.len() != s.len() {
            return Err(PencilError::Length { got: part.len(), want: s.len() });
        }
    }
    if u.iter().all(|x| *x == 0.0) {
        return Err(PencilError::ZeroVector);
    }
    Ok(stencil_aux_residual(&s, lambda, u, v))
}

/// `‖K u − g(·, λ) u‖∞ / ‖u‖∞` with the assembly stencils.
pub fn residual(p: &PencilProblem, grid: &DiscreteGrid, lambda: f64, u: &[f64]) -> Result<f64, PencilError> {
    for q in &p.poles {
        if lambda == q.alpha {
            return Err(PencilError::AtPole(lambda, q.alpha));
        }
    }
    let s = Stencil::<f64>::build(p, grid)?;
    if u.len() != s.len() {
        return Err(PencilError::Length { got: u.len(), want: s.len() });
    }
    if u.iter().all(|x| *x == 0.0) {
        return Err(PencilError::ZeroVector);
    }
    Ok(stencil_residual(&s, lambda, u))
}

/// Discrete eigenvalue `rank` (0-based, ascending) of interval `j`, by bisection on the
/// inertia of the tridiagonal Schur complement. Agrees with [`solve_spectrum`] without a
/// dense solve.
pub fn eigenvalue_by_index<T: Real>(
    p: &PencilProblem,
    grid: &DiscreteGrid,
    j: usize,
    rank: usize,
    tol: T,
) -> Result<T, PencilError> {
    let s = Stencil::<T>::build(p, grid)?;
    eigenvalue_by_index_stencil(&s, j, rank, tol)
}

pub fn eigenvalue_by_index_stencil<T: Real>(s: &Stencil<T>, j: usize, rank: usize, tol: T) -> Result<T, PencilError> {
    let npoles = s.alphas.len();
    if j > npoles {
        return Err(PencilError::NoSuchInterval(j, npoles));
    }
    if !s.k.is_symmetrizable() {
        return Err(PencilError::NotSymmetrizable);
    }
    if rank >= s.len() {
        return Err(PencilError::Search(format!("interval holds {} discrete eigenvalues, asked for rank {rank}", s.len())));
    }
    let one = T::one();
    let near = |a: T, dir: T| a + dir * T::c(1e-13) * a.abs().max(one);
    let count = |lam: T| s.inertia(lam);
    let mut lo = if j == 0 { T::nan() } else { near(s.alphas[j - 1], one) };
    let mut hi = if j == npoles { T::nan() } else { near(s.alphas[j], -one) };
    if j == 0 {
        let start = if hi.is_nan() { T::zero() } else { hi };
        let mut step = one;
        lo = start - step;
        let mut tries = 0;
        while count(lo) > 0 {
            step = step * T::c(4.0);
            lo = start - step;
            tries += 1;
            if tries > 200 {
                return Err(PencilError::Search("no lower bracket".into()));
            }
        }
    }
    if j == npoles {
        let start = lo;
        let mut step = one;
        hi = start + step;
        let mut tries = 0;
        while count(hi) <= rank {
            step = step * T::c(4.0);
            hi = start + step;
            tries += 1;
            if tries > 200 {
                return Err(PencilError::Search("no upper bracket".into()));
            }
        }
    } else if count(hi) <= rank {
        return Err(PencilError::Search(format!("rank {rank} not resolved below the pole {}", hi.to_f64_lossy())));
    }
    if count(lo) > rank {
        return Err(PencilError::Search("eigenvalues closer to the pole than the search margin".into()));
    }
    for _ in 0..300 {
        let mid = lo + (hi - lo) / T::c(2.0);
        if hi - lo <= tol * mid.abs().max(one) || mid <= lo || mid >= hi {
            break;
        }
        if count(mid) > rank {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lo + (hi - lo) / T::c(2.0))
}

/// Outcome of the pointwise sign conditions that make `g(x, ·)` a Herglotz function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignReport {
    pub holds: bool,
    /// One entry per coefficient that fails, at its first failing scan point.
    pub failures: Vec<String>,
}

/// Checks `D > 0`, `W₀ > 0` and `Wᵢ > 0` at the midpoints of `n` equal cells. Midpoints keep
/// coefficients that vanish only at an end point admissible, as in the stencil.
pub fn sign_report(p: &PencilProblem, n: usize) -> Result<SignReport, PencilError> {
    let h = (p.b - p.a) / n.max(1) as f64;
    let mut fields: Vec<(String, &CoefficientField)> = vec![("D".into(), &p.d), ("W0".into(), &p.w0)];
    for (i, q) in p.poles.iter().enumerate() {
        fields.push((format!("W{}", i + 1), &q.w));
    }
    let mut failures = Vec::new();
    for (name, f) in fields {
        for i in 0..n.max(1) {
            let x = p.a + (i as f64 + 0.5) * h;
            let v: f64 = f.eval(x).map_err(field_err(&name))?;
            if !(v > 0.0) {
                failures.push(format!("{name}({x}) = {v} is not positive"));
                break;
            }
        }
    }
    Ok(SignReport { holds: failures.is_empty(), failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn laplace(bc: BoundaryCondition, b: f64) -> PencilProblem {
        PencilProblem::from_exprs((0.0, b), "1", "0", "1", &[], bc, bc).unwrap()
    }

    #[test]
    fn dirichlet_laplacian_ground_state() {
        let p = laplace(BoundaryCondition::DIRICHLET, PI);
        let g = DiscreteGrid::new(&p, 100).unwrap();
        let m = assemble_linearization(&p, &g).unwrap();
        assert_eq!(m.nrows(), 99);
        let ev = linalg::eigenvalues(&m).unwrap();
        let min = ev.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        assert!((min - 1.0).abs() < 1e-3, "{min}");
    }

    #[test]
    fn neumann_constant_vector_is_exact() {
        let p = PencilProblem::from_exprs(
            (0.0, 1.0),
            "1 + 0.5*sin(3*x)",
            "0",
            "1",
            &[],
            BoundaryCondition::NEUMANN,
            BoundaryCondition::NEUMANN,
        )
        .unwrap();
        let g = DiscreteGrid::new(&p, 40).unwrap();
        let s = Stencil::<f64>::build(&p, &g).unwrap();
        let ku = s.k.mul_vec(&vec![1.0; s.len()]);
        assert!(ku.iter().all(|x| x.abs() < 1e-10));
    }

    #[test]
    fn neumann_cosine_modes() {
        let p = laplace(BoundaryCondition::NEUMANN, 1.0);
        let errs: Vec<Vec<f64>> = [50, 100]
            .iter()
            .map(|&nx| {
                let g = DiscreteGrid::new(&p, nx).unwrap();
                let r = solve_spectrum(&p, &g, DEFAULT_REALITY_TOL).unwrap();
                (0..3)
                    .map(|k| {
                        let e = r.get(0, k).unwrap();
                        assert_eq!(e.oscillation_count, k);
                        (e.lambda - (k as f64 * PI).powi(2)).abs()
                    })
                    .collect()
            })
            .collect();
        assert!(errs[0][0] < 1e-9);
        for k in 1..3 {
            assert!(errs[1][k] < 0.01 * (k as f64 * PI).powi(2));
            assert!(errs[0][k] / errs[1][k] > 3.0, "k = {k}: {} {}", errs[0][k], errs[1][k]);
        }
    }

    #[test]
    fn robin_elimination_uses_one_sided_stencil() {
        // u = exp(x) satisfies u - u' = 0 at both ends, and the one-sided stencil is exact for
        // quadratics, so check against u = 1 + x + x^2/2 with b0 u + b1 u' evaluated exactly.
        let bc_l = BoundaryCondition { b0: 1.0, b1: -1.0 }; // u(0) - u'(0) = 1 - 1 = 0
        let bc_r = BoundaryCondition { b0: 2.0, b1: -1.0 }; // u(1) = 2.5, u'(1) = 2 -> 5 - 2 != 0
        let p = PencilProblem::from_exprs((0.0, 1.0), "1", "0", "1", &[], bc_l, bc_r).unwrap();
        let g = DiscreteGrid::new(&p, 10).unwrap();
        let s = Stencil::<f64>::build(&p, &g).unwrap();
        let u: Vec<f64> = g.interior_nodes().iter().map(|x| 1.0 + x + x * x / 2.0).collect();
        let ku = s.k.mul_vec(&u);
        // first row sees the exact left boundary value, so -(u'') = -1
        assert!((ku[0] + 1.0).abs() < 1e-9, "{}", ku[0]);
    }

    #[test]
    fn singular_boundary_detected() {
        // 3 b1 - 2 dx b0 = 0 with dx = 0.25
        let bc = BoundaryCondition { b0: 6.0, b1: 1.0 };
        let p = PencilProblem::from_exprs((0.0, 1.0), "1", "0", "1", &[], bc, BoundaryCondition::NEUMANN).unwrap();
        let g = DiscreteGrid::new(&p, 4).unwrap();
        assert!(matches!(assemble_linearization(&p, &g), Err(PencilError::SingularBoundary("left"))));
    }

    #[test]
    fn rejects_bad_problems() {
        let p = PencilProblem::from_exprs(
            (0.0, 1.0),
            "x - 0.5",
            "0",
            "1",
            &[],
            BoundaryCondition::NEUMANN,
            BoundaryCondition::NEUMANN,
        )
        .unwrap();
        let g = DiscreteGrid::new(&p, 10).unwrap();
        assert!(matches!(assemble_linearization(&p, &g), Err(PencilError::NotPositive { .. })));
        assert!(DiscreteGrid::new(&p, 3).is_err());
        assert!(PencilProblem::from_exprs(
            (0.0, 1.0),
            "1",
            "0",
            "1",
            &[(2.0, "1"), (1.0, "1")],
            BoundaryCondition::NEUMANN,
            BoundaryCondition::NEUMANN
        )
        .is_err());
        let bad = BoundaryCondition { b0: 0.0, b1: 0.0 };
        assert!(PencilProblem::from_exprs((0.0, 1.0), "1", "0", "1", &[], bad, bad).is_err());
    }

    #[test]
    fn sign_changes() {
        assert_eq!(count_sign_changes(&[1.0, 1.0, 1.0]).unwrap(), 0);
        assert_eq!(count_sign_changes(&[1.0, -1.0, 1.0]).unwrap(), 2);
        assert_eq!(count_sign_changes(&[1.0, 1e-12, -1.0]).unwrap(), 1);
        assert_eq!(count_sign_changes(&[1.0, 0.0, 1.0]).unwrap(), 0);
        assert!(count_sign_changes(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn interval_classification() {
        assert_eq!(classify_interval(1.22, &[2.0]).unwrap(), 0);
        assert_eq!(classify_interval(4.88, &[2.0]).unwrap(), 1);
        assert_eq!(classify_interval(-5.0, &[]).unwrap(), 0);
        assert!(classify_interval(2.0, &[2.0]).is_err());
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let src = r#"{"domain": [0, "pi"], "D": "1", "V": "sin(x)", "W0": "1",
            "poles": [{"alpha": 2, "W": "0.2 + cos(x)^2"}],
            "bc_left": {"b0": 1, "b1": 0}, "bc_right": {"b0": 1, "b1": 0}}"#;
        let p = PencilProblem::from_json_str(src).unwrap();
        assert_eq!(p.b, PI);
        let again = PencilProblem::from_json_str(&p.to_json_string().unwrap()).unwrap();
        assert_eq!(p, again);
        let bad = src.replace("\"W0\"", "\"W_0\"");
        assert!(PencilProblem::from_json_str(&bad).is_err());
        let bad = src.replace("\"b1\": 0}, \"bc_right\"", "\"b1\": 0, \"b2\": 1}, \"bc_right\"");
        assert!(PencilProblem::from_json_str(&bad).is_err());
    }
}
