//! Spatial fox-rabies model: stability pencil, principal growth rate, reproduction number,
//! heterogeneity experiments and vaccine-strategy sweeps.
//!
//! The linearized infective equation is written as a one-pole pencil in `λ̃ = −λ`:
//! `−(D I′)′ + (α + a) I + σKβ/(λ̃ − (σ + a)) I = λ̃ I` with no-flux ends. All reported growth
//! rates use the original `λ` (`λ0 > 0` means the infection spreads).

use std::sync::OnceLock;

use faer::Mat;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::coeffs::{CoefficientField, FieldError};
use crate::linalg::{self, LinalgError};
use crate::pencil::{
    diffusion_stencil, eigenvalue_by_index_stencil, BoundaryCondition, DiscreteGrid, PencilError, PencilProblem, Pole,
    Stencil,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EpiError {
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("field {name}: {source}")]
    Field { name: String, source: FieldError },
    #[error("weight σKβ/(σ+a) is {value} at x = {x}; it must be positive at every interior node")]
    Weight { x: f64, value: f64 },
    #[error("no admissible (a0, L) pairs in the sweep grids")]
    EmptySweep,
}

/// Points used to check the sign conditions on the closed domain.
const SCAN: usize = 201;
/// Relative bisection tolerance for `λ̃_min`.
pub const GROWTH_TOL: f64 = 1e-12;
/// `λ0` or `R0 − 1` within this of zero counts as the stability boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RabiesParams {
    /// Birth rate (1/year).
    pub a: f64,
    /// Death rate (1/year). Does not enter the linearization.
    pub b: f64,
    /// Inverse incubation period (1/year).
    pub sigma: f64,
    /// Carrying capacity (foxes/km²).
    pub k: f64,
    /// Inverse infectious period (1/year).
    pub alpha: CoefficientField,
    /// Transmission (km²/year).
    pub beta: CoefficientField,
    /// Diffusion (km²/year).
    pub d: CoefficientField,
}

fn field_err(name: &str) -> impl Fn(FieldError) -> EpiError + '_ {
    move |source| EpiError::Field { name: name.to_string(), source }
}

fn scan_nodes() -> impl Iterator<Item = f64> {
    (0..SCAN).map(|i| i as f64 / (SCAN - 1) as f64)
}

impl RabiesParams {
    /// Validates the scalar rates and the sign of the fields on `[0, 1]`. `β` and `D` may
    /// touch zero at isolated points; only interior stencil points must be positive.
    pub fn new(
        a: f64,
        b: f64,
        sigma: f64,
        k: f64,
        alpha: CoefficientField,
        beta: CoefficientField,
        d: CoefficientField,
    ) -> Result<Self, EpiError> {
        let rp = Self { a, b, sigma, k, alpha, beta, d };
        rp.validate()?;
        Ok(rp)
    }

    /// Parses the three fields on `[0, 1]`.
    pub fn from_exprs(a: f64, b: f64, sigma: f64, k: f64, alpha: &str, beta: &str, d: &str) -> Result<Self, EpiError> {
        let f = |name: &str, s: &str| CoefficientField::parse(s, 0.0, 1.0).map_err(field_err(name));
        Self::new(a, b, sigma, k, f("alpha", alpha)?, f("beta", beta)?, f("D", d)?)
    }

    pub fn validate(&self) -> Result<(), EpiError> {
        for (name, v) in [("a", self.a), ("b", self.b), ("sigma", self.sigma), ("K", self.k)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(EpiError::Invalid(format!("{name} = {v} must be positive")));
            }
        }
        for (name, f) in [("alpha", &self.alpha), ("beta", &self.beta), ("D", &self.d)] {
            if (f.a, f.b) != (0.0, 1.0) {
                return Err(EpiError::Invalid(format!("{name} must be defined on [0, 1]")));
            }
        }
        for x in scan_nodes() {
            let al: f64 = self.alpha.eval(x).map_err(field_err("alpha"))?;
            if !(al > 0.0) {
                return Err(EpiError::Invalid(format!("alpha({x}) = {al} must be positive")));
            }
            for (name, f) in [("beta", &self.beta), ("D", &self.d)] {
                let v: f64 = f.eval(x).map_err(field_err(name))?;
                if !(v >= 0.0) {
                    return Err(EpiError::Invalid(format!("{name}({x}) = {v} must be non-negative")));
                }
            }
        }
        Ok(())
    }

    pub fn pole(&self) -> f64 {
        self.sigma + self.a
    }

    pub fn with_beta(&self, beta: CoefficientField) -> Self {
        Self { beta, ..self.clone() }
    }

    fn beta_vanishes(&self) -> Result<bool, EpiError> {
        for x in scan_nodes() {
            let v: f64 = self.beta.eval(x).map_err(field_err("beta"))?;
            if v != 0.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// The stability pencil in `λ̃`: `D`, `W₀ = 1`, `V = α + a`, one pole at `σ + a` with
/// `W₁ = σKβ`, Neumann ends. The pole is omitted when `β ≡ 0`.
pub fn build_stability_pencil(rp: &RabiesParams) -> Result<PencilProblem, EpiError> {
    rp.validate()?;
    let v = CoefficientField::affine(rp.alpha.clone(), 1.0, rp.a);
    let poles = if rp.beta_vanishes()? {
        Vec::new()
    } else {
        vec![Pole { alpha: rp.pole(), w: CoefficientField::affine(rp.beta.clone(), rp.sigma * rp.k, 0.0) }]
    };
    Ok(PencilProblem::new(
        (0.0, 1.0),
        rp.d.clone(),
        v,
        CoefficientField::constant(1.0, 0.0, 1.0),
        poles,
        BoundaryCondition::NEUMANN,
        BoundaryCondition::NEUMANN,
    )?)
}

/// `λ0 = −λ̃_min`, the smallest pencil eigenvalue lying in `(−∞, σ + a)`.
pub fn principal_growth_rate(rp: &RabiesParams, nx: usize) -> Result<f64, EpiError> {
    let p = build_stability_pencil(rp)?;
    let grid = DiscreteGrid::new(&p, nx)?;
    let s = Stencil::<f64>::build(&p, &grid)?;
    let lt = eigenvalue_by_index_stencil(&s, 0, 0, GROWTH_TOL)?;
    Ok(-lt)
}

/// Principal eigenvalue `μ₁` of `−(Dφ′)′ + (α + a)φ = μ (σKβ/(σ + a)) φ` with no-flux ends,
/// on the pencil's stencil. Returns `R0 = 1/μ₁`, or 0 when `β ≡ 0`.
pub fn reproduction_number(rp: &RabiesParams, nx: usize) -> Result<f64, EpiError> {
    rp.validate()?;
    if rp.beta_vanishes()? {
        return Ok(0.0);
    }
    let p = build_stability_pencil(rp)?;
    let grid = DiscreteGrid::new(&p, nx)?;
    let k = diffusion_stencil::<f64>(&rp.d, &grid, BoundaryCondition::NEUMANN, BoundaryCondition::NEUMANN)?;
    let xs = grid.interior_nodes();
    let n = xs.len();
    let scale = rp.sigma * rp.k / rp.pole();
    let mut w = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    for &x in &xs {
        let wi = scale * rp.beta.eval(x).map_err(field_err("beta"))?;
        if !(wi > 0.0) {
            return Err(EpiError::Weight { x, value: wi });
        }
        w.push(wi);
        c.push(rp.alpha.eval(x).map_err(field_err("alpha"))? + rp.a);
    }
    let m = Mat::<f64>::from_fn(n, n, |i, j| {
        let kij = if i == j {
            k.diag[i] + c[i]
        } else if j == i + 1 {
            k.upper[i]
        } else if i == j + 1 {
            k.lower[j]
        } else {
            0.0
        };
        kij / w[i]
    });
    let eig = linalg::eigenvalues(&m)?;
    let mu1 = eig.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if !(mu1.is_finite() && mu1 > 0.0) {
        return Err(EpiError::Invalid(format!("principal weighted eigenvalue {mu1} is not positive")));
    }
    Ok(1.0 / mu1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignConsistency {
    pub lambda0: f64,
    pub r0: f64,
    pub consistent: bool,
}

/// Checks `sign(λ0) = sign(R0 − 1)`. Values within [`BOUNDARY_TOL`] of the boundary count as
/// consistent with either side.
pub fn sign_consistency(rp: &RabiesParams, nx: usize) -> Result<SignConsistency, EpiError> {
    let lambda0 = principal_growth_rate(rp, nx)?;
    let r0 = reproduction_number(rp, nx)?;
    let boundary = lambda0.abs() <= BOUNDARY_TOL || (r0 - 1.0).abs() <= BOUNDARY_TOL;
    let consistent = boundary || (lambda0 > 0.0) == (r0 > 1.0);
    Ok(SignConsistency { lambda0, r0, consistent })
}

/// Total quantity `c0` spread uniformly over `[a0, a0 + L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VaccineStrategy {
    pub c0: f64,
    pub a0: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

/// Slack on `a0 + L ≤ 1` for grids built from decimal steps.
const FIT_EPS: f64 = 1e-9;

impl VaccineStrategy {
    pub fn new(c0: f64, a0: f64, l: f64) -> Result<Self, EpiError> {
        let s = Self { c0, a0, l };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), EpiError> {
        if !(self.c0.is_finite() && self.c0 >= 0.0) {
            return Err(EpiError::Invalid(format!("c0 = {} must be non-negative", self.c0)));
        }
        if !(0.0..=1.0).contains(&self.a0) {
            return Err(EpiError::Invalid(format!("a0 = {} must lie in [0, 1]", self.a0)));
        }
        if !(self.l > 0.0 && self.l <= 1.0) {
            return Err(EpiError::Invalid(format!("L = {} must lie in (0, 1]", self.l)));
        }
        if self.a0 + self.l > 1.0 + FIT_EPS {
            return Err(EpiError::Invalid(format!("a0 + L = {} exceeds 1", self.a0 + self.l)));
        }
        Ok(())
    }
}

/// `β(x)/(1 + v0(x))` with `v0 = c0/L` on `[a0, a0 + L)`.
pub fn vaccine_beta(beta: &CoefficientField, vs: &VaccineStrategy) -> Result<CoefficientField, EpiError> {
    vs.validate()?;
    if vs.c0 == 0.0 {
        return Ok(beta.clone());
    }
    Ok(CoefficientField::modulated(beta.clone(), vs.a0, vs.a0 + vs.l, 1.0 + vs.c0 / vs.l))
}

/// `λ0` for the model with `β` replaced by the vaccinated transmission.
pub fn strategy_growth_rate(rp: &RabiesParams, vs: &VaccineStrategy, nx: usize) -> Result<f64, EpiError> {
    principal_growth_rate(&rp.with_beta(vaccine_beta(&rp.beta, vs)?), nx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub a0: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub lambda0: f64,
}

impl SweepPoint {
    pub fn stable(&self) -> bool {
        self.lambda0 < 0.0
    }
}

/// Estimated location of `λ0 = 0` between two neighbouring grid points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourPoint {
    pub a0: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub c0: f64,
    pub nx: usize,
    /// Admissible points in `(a0, L)` grid order.
    pub points: Vec<SweepPoint>,
    pub minimizer: SweepPoint,
    pub contour: Vec<ContourPoint>,
}

impl SweepResult {
    pub fn any_stable(&self) -> bool {
        self.points.iter().any(SweepPoint::stable)
    }

    pub fn stable_count(&self) -> usize {
        self.points.iter().filter(|p| p.stable()).count()
    }
}

/// `{0, h, 2h, …, 0.5}` for the start of the vaccinated band; symmetry of `β` makes larger
/// starts redundant.
pub fn a0_grid(step: f64) -> Vec<f64> {
    let n = (1.0 / step).round();
    (0..=(n / 2.0).floor() as usize).map(|i| i as f64 / n).collect()
}

/// `{h, 2h, …, 1}` for the band length.
pub fn l_grid(step: f64) -> Vec<f64> {
    let n = (1.0 / step).round();
    (1..=n as usize).map(|i| i as f64 / n).collect()
}

fn admissible(a0: f64, l: f64) -> bool {
    (0.0..=0.5 + FIT_EPS).contains(&a0) && l > 0.0 && l <= 1.0 + FIT_EPS && a0 + l <= 1.0 + FIT_EPS
}

/// Worker threads for sweeps: `HERGLOTZ_THREADS` if set to a positive integer, otherwise
/// rayon's default.
pub fn sweep_threads() -> usize {
    std::env::var("HERGLOTZ_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(sweep_threads())
            .build()
            .expect("thread pool construction")
    })
}

/// `λ0` over every admissible `(a0, L)` of the two grids. Points are evaluated in parallel
/// and reported in grid order.
pub fn vaccine_sweep(
    rp: &RabiesParams,
    c0: f64,
    a0s: &[f64],
    ls: &[f64],
    nx: usize,
) -> Result<SweepResult, EpiError> {
    rp.validate()?;
    let cells: Vec<(usize, usize)> = (0..a0s.len())
        .flat_map(|i| (0..ls.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| admissible(a0s[i], ls[j]))
        .collect();
    if cells.is_empty() {
        return Err(EpiError::EmptySweep);
    }
    let values: Vec<f64> = pool().install(|| {
        cells
            .par_iter()
            .map(|&(i, j)| {
                let vs = VaccineStrategy::new(c0, a0s[i], ls[j])?;
                strategy_growth_rate(rp, &vs, nx)
            })
            .collect::<Result<Vec<f64>, EpiError>>()
    })?;
    let points: Vec<SweepPoint> = cells
        .iter()
        .zip(&values)
        .map(|(&(i, j), &lambda0)| SweepPoint { a0: a0s[i], l: ls[j], lambda0 })
        .collect();
    let minimizer = *points
        .iter()
        .min_by(|p, q| p.lambda0.total_cmp(&q.lambda0))
        .expect("non-empty sweep");
    let mut grid = vec![vec![None; ls.len()]; a0s.len()];
    for (&(i, j), &v) in cells.iter().zip(&values) {
        grid[i][j] = Some(v);
    }
    let mut contour = Vec::new();
    let mut crossing = |p: (f64, f64, f64), q: (f64, f64, f64)| {
        if (p.2 < 0.0) != (q.2 < 0.0) {
            let t = p.2 / (p.2 - q.2);
            contour.push(ContourPoint { a0: p.0 + t * (q.0 - p.0), l: p.1 + t * (q.1 - p.1) });
        }
    };
    for i in 0..a0s.len() {
        for j in 0..ls.len() {
            let Some(v) = grid[i][j] else { continue };
            let here = (a0s[i], ls[j], v);
            if let Some(Some(w)) = grid.get(i + 1).map(|r| r[j]) {
                crossing(here, (a0s[i + 1], ls[j], w));
            }
            if let Some(&Some(w)) = grid[i].get(j + 1) {
                crossing(here, (a0s[i], ls[j + 1], w));
            }
        }
    }
    Ok(SweepResult { c0, nx, points, minimizer, contour })
}

/// First `c0` in `c0s` (scanned in order) whose sweep contains a stable strategy, with that
/// sweep.
pub fn minimum_stable_c0(
    rp: &RabiesParams,
    c0s: &[f64],
    a0s: &[f64],
    ls: &[f64],
    nx: usize,
) -> Result<Option<SweepResult>, EpiError> {
    for &c0 in c0s {
        let r = vaccine_sweep(rp, c0, a0s, ls, nx)?;
        if r.any_stable() {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HeterogeneityKind {
    /// `β = 0.2192(1 + c₁ cos πx)`, `α = 0.2`, `D = 0.1371`.
    BetaC1,
    /// `α = 0.2(1 + c₂ cos πx)`, `β = 0.2192`, `D = 0.1371`.
    AlphaC2,
    /// `D = D₀(1 + cos πx)` with the background `β(c₁)` and `α = (2/π)(1 + c₂(sin πx − 2/π))`.
    #[serde(rename = "diffusion_D0")]
    DiffusionD0,
    /// `D = 0.0685(1 + c₃ cos πx)` with the same background as [`Self::DiffusionD0`].
    DiffusionC3,
}

impl HeterogeneityKind {
    pub const ALL: [HeterogeneityKind; 4] = [Self::BetaC1, Self::AlphaC2, Self::DiffusionD0, Self::DiffusionC3];

    pub fn name(self) -> &'static str {
        match self {
            Self::BetaC1 => "beta_c1",
            Self::AlphaC2 => "alpha_c2",
            Self::DiffusionD0 => "diffusion_D0",
            Self::DiffusionC3 => "diffusion_c3",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Fixed rates of the heterogeneity experiments.
pub const HET_A: f64 = 0.0027;
pub const HET_B: f64 = 0.5;
pub const HET_SIGMA: f64 = 0.0357;
pub const HET_K: f64 = 0.98;
pub const HET_BETA: f64 = 0.2192;
pub const HET_ALPHA: f64 = 0.2;
/// Diffusion assumed for the β/α panels, where none is given.
pub const HET_ASSUMED_D: f64 = 0.1371;

/// Background heterogeneity for the diffusion panels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Background {
    pub c1: f64,
    pub c2: f64,
}

/// Parameters of one heterogeneity experiment at sweep value `value`.
pub fn heterogeneity_params(kind: HeterogeneityKind, value: f64, bg: Background) -> Result<RabiesParams, EpiError> {
    let beta = |c1: f64| format!("{HET_BETA}*(1 + {c1:?}*cos(pi*x))");
    let alpha_mean_preserving = format!("(2/pi)*(1 + {:?}*(sin(pi*x) - 2/pi))", bg.c2);
    let (alpha, beta, d) = match kind {
        HeterogeneityKind::BetaC1 => (format!("{HET_ALPHA}"), beta(value), format!("{HET_ASSUMED_D}")),
        HeterogeneityKind::AlphaC2 => {
            (format!("{HET_ALPHA}*(1 + {value:?}*cos(pi*x))"), format!("{HET_BETA}"), format!("{HET_ASSUMED_D}"))
        }
        HeterogeneityKind::DiffusionD0 => (alpha_mean_preserving, beta(bg.c1), format!("{value:?}*(1 + cos(pi*x))")),
        HeterogeneityKind::DiffusionC3 => (alpha_mean_preserving, beta(bg.c1), format!("0.0685*(1 + {value:?}*cos(pi*x))")),
    };
    RabiesParams::from_exprs(HET_A, HET_B, HET_SIGMA, HET_K, &alpha, &beta, &d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeterogeneityRow {
    pub value: f64,
    pub r0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeterogeneityTable {
    pub kind: HeterogeneityKind,
    pub nx: usize,
    pub background: Background,
    pub rows: Vec<HeterogeneityRow>,
    /// Sweep value with the smallest `R0`.
    pub argmin: f64,
    /// `(max R0 − min R0) / min R0`.
    pub relative_spread: f64,
    /// Set when `D` vanishes somewhere on the closed domain.
    pub degenerate_diffusion: bool,
    /// Diffusion value assumed where the experiment does not fix one.
    pub assumed_diffusion: Option<f64>,
}

pub fn heterogeneity_experiment(
    kind: HeterogeneityKind,
    values: &[f64],
    bg: Background,
    nx: usize,
) -> Result<HeterogeneityTable, EpiError> {
    if values.is_empty() {
        return Err(EpiError::Invalid("empty sweep".into()));
    }
    let mut degenerate = false;
    let rows = pool().install(|| {
        values
            .par_iter()
            .map(|&value| {
                let rp = heterogeneity_params(kind, value, bg)?;
                Ok(HeterogeneityRow { value, r0: reproduction_number(&rp, nx)? })
            })
            .collect::<Result<Vec<_>, EpiError>>()
    })?;
    for &v in values {
        let rp = heterogeneity_params(kind, v, bg)?;
        for x in scan_nodes() {
            let d: f64 = rp.d.eval(x).map_err(field_err("D"))?;
            degenerate |= d <= 0.0;
        }
    }
    let min = rows.iter().min_by(|p, q| p.r0.total_cmp(&q.r0)).expect("non-empty");
    let max = rows.iter().map(|r| r.r0).fold(f64::NEG_INFINITY, f64::max);
    let assumed = matches!(kind, HeterogeneityKind::BetaC1 | HeterogeneityKind::AlphaC2).then_some(HET_ASSUMED_D);
    Ok(HeterogeneityTable {
        kind,
        nx,
        background: bg,
        argmin: min.value,
        relative_spread: (max - min.r0) / min.r0,
        rows,
        degenerate_diffusion: degenerate,
        assumed_diffusion: assumed,
    })
}

/// `σKβ/((σ + a)(α + a))` for constant coefficients.
pub fn homogeneous_r0(a: f64, sigma: f64, k: f64, beta: f64, alpha: f64) -> f64 {
    sigma * k * beta / ((sigma + a) * (alpha + a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn homogeneous() -> RabiesParams {
        RabiesParams::from_exprs(0.0027, 0.5, 0.0357, 0.98, "0.2", "0.2192", "0.1371").unwrap()
    }

    #[test]
    fn pencil_from_homogeneous_params() {
        let p = build_stability_pencil(&homogeneous()).unwrap();
        assert_eq!(p.pole_count(), 1);
        assert!((p.poles[0].alpha - 0.0384).abs() < 1e-12);
        let w: f64 = p.poles[0].w.eval(0.3).unwrap();
        assert!((w - 0.0357 * 0.98 * 0.2192).abs() < 1e-15);
        assert!((w - 0.007669).abs() < 1e-6);
        let v: f64 = p.v.eval(0.7).unwrap();
        assert!((v - 0.2027).abs() < 1e-12);
        assert_eq!(p.bc_left, BoundaryCondition::NEUMANN);
        assert_eq!(p.bc_right, BoundaryCondition::NEUMANN);
    }

    #[test]
    fn homogeneous_closed_form() {
        let r0 = reproduction_number(&homogeneous(), 50).unwrap();
        let exact = homogeneous_r0(0.0027, 0.0357, 0.98, 0.2192, 0.2);
        assert!((r0 - exact).abs() / exact < 1e-10, "{r0} vs {exact}");
        assert!((exact - 0.985).abs() < 1e-3);
        let l0 = principal_growth_rate(&homogeneous(), 50).unwrap();
        assert!(l0 < 0.0);
    }

    #[test]
    fn zero_transmission() {
        let rp = RabiesParams::from_exprs(0.0027, 0.5, 0.0357, 0.98, "0.2", "0", "0.1371").unwrap();
        assert_eq!(build_stability_pencil(&rp).unwrap().pole_count(), 0);
        assert_eq!(reproduction_number(&rp, 40).unwrap(), 0.0);
        let l0 = principal_growth_rate(&rp, 40).unwrap();
        assert!((l0 + 0.2027).abs() < 1e-10, "{l0}");
        assert!(sign_consistency(&rp, 40).unwrap().consistent);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(RabiesParams::from_exprs(0.0, 0.5, 0.0357, 0.98, "0.2", "0.2", "0.1").is_err());
        assert!(RabiesParams::from_exprs(0.1, 0.5, 0.0357, 0.98, "x - 0.5", "0.2", "0.1").is_err());
        assert!(RabiesParams::from_exprs(0.1, 0.5, 0.0357, 0.98, "0.2", "-0.2", "0.1").is_err());
    }

    #[test]
    fn vaccine_modulation() {
        let beta = CoefficientField::parse("6*x*(1-x)", 0.0, 1.0).unwrap();
        let vs = VaccineStrategy::new(0.5, 0.25, 0.5).unwrap();
        let f = vaccine_beta(&beta, &vs).unwrap();
        assert!((f.eval(0.5f64).unwrap() - 0.75).abs() < 1e-15);
        assert!((f.eval(0.1f64).unwrap() - 0.54).abs() < 1e-15);
        assert!((f.eval(0.75f64).unwrap() - 1.125).abs() < 1e-15);
        let same = vaccine_beta(&beta, &VaccineStrategy::new(0.0, 0.1, 0.2).unwrap()).unwrap();
        assert_eq!(same, beta);
        assert!(VaccineStrategy::new(0.5, 0.6, 0.5).is_err());
        assert!(VaccineStrategy::new(0.5, 0.2, 0.0).is_err());
    }

    #[test]
    fn grids() {
        let a = a0_grid(0.01);
        assert_eq!(a.len(), 51);
        assert_eq!(a[50], 0.5);
        let l = l_grid(0.05);
        assert_eq!(l.len(), 20);
        assert_eq!(l[19], 1.0);
        assert_eq!(a0_grid(0.05)[7], 0.35);
    }

    #[test]
    fn heterogeneity_kind_names_round_trip() {
        for k in HeterogeneityKind::ALL {
            assert_eq!(HeterogeneityKind::from_name(k.name()), Some(k));
        }
        assert_eq!(HeterogeneityKind::from_name("gamma"), None);
    }
}
