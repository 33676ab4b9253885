//! Numerical laboratory for SU(2) gauge pairs `(A, a)` on flat `R^n`.
//!
//! The crate builds exact solutions of the coupled system
//! `∇_A†∇_A a + [a_c, [a, a_c]] = 0` (the variational equation shared by the
//! whole Kapustin-Witten family), evaluates the radial diagnostics attached
//! to such pairs — the shell norm `κ`, the Almgren-type frequency `N`, the
//! component Gram matrix `T` with its smallest eigenvalue `λ`, and the
//! cross-correlation `P` — and relaxes perturbed fields back to solutions by
//! lattice gradient flow.
//!
//! Module map:
//! - [`algebra`]: exact coefficient arithmetic for su(2) and `V ⊗ su(2)`.
//! - [`fieldkit`]: field evaluators, gauge-covariant calculus, and
//!   hypersphere quadrature.
//! - [`solutions`]: closed-form solution constructors and the registry used
//!   by the CLI (`ps-lift`, `const-mode`, `linear-mode`, `abelian`,
//!   `tau-quarter`).
//! - [`diagnostics`]: radial profile generation and the flat-radius search.
//! - [`residuals`]: pointwise residual evaluators for every equation system,
//!   plus the stress-tensor and Pohozaev-identity checks.
//! - [`relax`]: Dirichlet-box gradient-flow solver.
//! - [`cli`]: batch front end with CSV output.

pub mod algebra;
pub mod cli;
pub mod diagnostics;
pub mod fieldkit;
pub mod relax;
pub mod residuals;
pub mod sampling;
pub mod solutions;

/// Tool version recorded in every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
