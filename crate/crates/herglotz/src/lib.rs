//! Rational Herglotz operator pencils in one space dimension.
//!
//! The pencil is `−(D p′)′ = g(x, λ) p` with
//! `g(x, λ) = λ W₀(x) − Σᵢ Wᵢ(x)/(λ − αᵢ) − V(x)` and `D, W₀, Wᵢ > 0`.
//! Its spectrum is real and splits into the intervals `(αⱼ, αⱼ₊₁)`; inside each interval the
//! eigenvalues are indexed by the number of interior zeros of the eigenfunction.
//!
//! Three solvers are provided: a dense linearization with auxiliary unknowns
//! ([`pencil::solve_spectrum`]), Prüfer-angle shooting ([`prufer::shoot_eigenvalue`]) and
//! WKB quantization ([`wkb::wkb_eigenvalue`]).

pub mod coeffs;
pub mod epi;
pub mod herglotz;
pub mod linalg;
pub mod output;
pub mod ode;
pub mod pencil;
pub mod presets;
pub mod prufer;
pub mod quad;
pub mod scalar;
pub mod wkb;

pub use scalar::Real;

pub type RationalHerglotzF64 = herglotz::RationalHerglotz<f64>;
pub type StencilF64 = pencil::Stencil<f64>;
pub type TridiagonalF64 = linalg::Tridiagonal<f64>;
pub type ShootResultF64 = prufer::ShootResult<f64>;
pub type PruferRunF64 = prufer::PruferRun<f64>;

pub use pencil::{BoundaryCondition, DiscreteGrid, PencilProblem};
