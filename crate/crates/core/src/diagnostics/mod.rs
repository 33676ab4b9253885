//! Radial diagnostics for gauge pairs: the shell norm `κ`, the frequency
//! `N`, the component Gram matrix `T` with eigenvalue tracking, the
//! cross-correlation `P`, local averages, profile tables, and the
//! flat-radius search.
//!
//! Normalization: every shell average uses `1/r^{n-1}`, so `trace T = κ²`
//! holds in any dimension (the `n = 4` specialisation would print `1/r³`).

pub mod jacobi;
mod profile;

pub use profile::{
    build_profile, find_flat_radius, identity_suite, CheckResult, FlatCheck, FlatRadiusReport,
    ProfileRow, RadialProfile, SearchParams,
};

use crate::algebra::{HiggsValue, LieVector};
use crate::fieldkit::{
    ball_integral, covariant_derivative, gauss_legendre, shell_integral, surface_measure,
    GaugeConnection, HiggsField, Point, SphereQuadrature,
};
use thiserror::Error;

/// Below this squared shell norm the field is treated as identically zero
/// (the unique-continuation degenerate case) and frequency-type quantities
/// are refused.
pub const VANISHING_KAPPA_SQ: f64 = 1e-200;

/// Relative eigenvalue cut below which a Gram-matrix direction counts as
/// degenerate (`V` could be shrunk; reported, never auto-applied).
pub const DEGENERATE_EIGENVALUE_REL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("shell norm vanishes at r = {r} (κ² = {kappa_sq:.3e}): the zero-field degenerate case")]
    VanishingKappa { r: f64, kappa_sq: f64 },
    #[error("no sampled radius in [{lo:.6}, {hi:.6}] has N(r) <= sqrt(eps) = {threshold:.6} (smallest N found: {min_n:.6}); the shell norm grows at least like r^eps")]
    FlatRadiusNotFound {
        lo: f64,
        hi: f64,
        threshold: f64,
        min_n: f64,
    },
    #[error("profile covers [{covered_lo:.4}, {covered_hi:.4}] with {samples} samples but the search window [{lo:.4}, {hi:.4}] needs at least {required} samples inside it")]
    InsufficientWindow {
        covered_lo: f64,
        covered_hi: f64,
        samples: usize,
        lo: f64,
        hi: f64,
        required: usize,
    },
    #[error("invalid search parameters: {0}")]
    InvalidSearchParams(String),
    #[error("invalid profile range: need 0 < r_min < r_max and samples >= 2")]
    InvalidProfileRange,
}

/// Shell norm `κ(r) = ((1/r^{n-1}) ∫_{∂B_r} |a|²)^{1/2}`; with the product
/// quadrature the Jacobian cancels and this is a plain weighted node sum.
pub fn kappa(a: &HiggsField, r: f64, q: &SphereQuadrature) -> f64 {
    debug_assert_eq!(a.dim(), q.dim());
    q.integrate(|node| a.value(&scale_node(node, r)).norm_sq()).sqrt()
}

/// Component version `κ_v` with `a` replaced by `a(v) = a_c v_c`.
pub fn kappa_v(a: &HiggsField, v: &[f64; 4], r: f64, q: &SphereQuadrature) -> f64 {
    debug_assert_eq!(a.dim(), q.dim());
    let vs = &v[..a.vdim()];
    q.integrate(|node| a.value(&scale_node(node, r)).contract(vs).norm_sq())
        .sqrt()
}

#[inline]
fn scale_node(node: &Point, r: f64) -> Point {
    [r * node[0], r * node[1], r * node[2], r * node[3]]
}

/// Frequency-numerator density `|∇_A a|² + Σ_c |[a_c, a]|²` at a point.
pub fn frequency_density(a: &HiggsField, conn: &GaugeConnection, x: &Point) -> f64 {
    let mut dirichlet = 0.0;
    for alpha in 0..conn.dim() {
        dirichlet += covariant_derivative(a, conn, x, alpha).norm_sq();
    }
    // Σ_c |[a_c, a]|² doubles the strictly-ordered wedge sum.
    dirichlet + 2.0 * a.value(x).wedge_square()
}

/// Almgren-type frequency
/// `N(r) = (1/(r^{n-2} κ²)) ∫_{B_r} (|∇_A a|² + Σ_c |[a_c, a]|²)`.
pub fn frequency(
    a: &HiggsField,
    conn: &GaugeConnection,
    r: f64,
    q: &SphereQuadrature,
    radial_level: usize,
) -> Result<f64, DiagnosticsError> {
    let ks = kappa(a, r, q).powi(2);
    if ks <= VANISHING_KAPPA_SQ {
        return Err(DiagnosticsError::VanishingKappa { r, kappa_sq: ks });
    }
    let numerator = ball_integral(|x| frequency_density(a, conn, x), r, q, radial_level);
    Ok(numerator / (r.powi(conn.dim() as i32 - 2) * ks))
}

/// `N_v`: the frequency of the su(2)-valued function `a(v)`, with the
/// commutator term `|[a, a(v)]|²`.
pub fn frequency_v(
    a: &HiggsField,
    conn: &GaugeConnection,
    v: &[f64; 4],
    r: f64,
    q: &SphereQuadrature,
    radial_level: usize,
) -> Result<f64, DiagnosticsError> {
    let ks = kappa_v(a, v, r, q).powi(2);
    if ks <= VANISHING_KAPPA_SQ {
        return Err(DiagnosticsError::VanishingKappa { r, kappa_sq: ks });
    }
    let vs = v;
    let numerator = ball_integral(
        |x| {
            let mut dirichlet = 0.0;
            for alpha in 0..conn.dim() {
                dirichlet += covariant_derivative(a, conn, x, alpha)
                    .contract(&vs[..a.vdim()])
                    .norm_sq();
            }
            let value = a.value(x);
            let av = value.contract(&vs[..a.vdim()]);
            let mut comm = 0.0;
            for c in 0..a.vdim() {
                comm += value.component(c).commutator(&av).norm_sq();
            }
            dirichlet + comm
        },
        r,
        q,
        radial_level,
    );
    Ok(numerator / (r.powi(conn.dim() as i32 - 2) * ks))
}

/// The shell-averaged component Gram matrix with its eigendecomposition.
#[derive(Clone, Debug)]
pub struct TMatrix {
    pub r: f64,
    pub vdim: usize,
    pub entries: [[f64; 4]; 4],
    /// Ascending; only the leading `vdim` are meaningful.
    pub eigenvalues: [f64; 4],
    /// `eigenvectors[k]` pairs with `eigenvalues[k]`.
    pub eigenvectors: [[f64; 4]; 4],
}

impl TMatrix {
    pub fn trace(&self) -> f64 {
        (0..self.vdim).map(|i| self.entries[i][i]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.vdim {
            for j in 0..self.vdim {
                s += self.entries[i][j] * self.entries[i][j];
            }
        }
        s.sqrt()
    }

    /// `u^T T v`.
    pub fn quadratic_form(&self, u: &[f64; 4], v: &[f64; 4]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.vdim {
            for j in 0..self.vdim {
                s += u[i] * self.entries[i][j] * v[j];
            }
        }
        s
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.vdim - 1]
    }

    pub fn smallest_eigenvector(&self) -> [f64; 4] {
        self.eigenvectors[0]
    }

    pub fn largest_eigenvector(&self) -> [f64; 4] {
        self.eigenvectors[self.vdim - 1]
    }
}

/// `T_{ab}(r) = (1/r^{n-1}) ∫_{∂B_r} <a_a a_b>`, symmetric PSD, diagonalised
/// by cyclic Jacobi.
pub fn t_matrix(a: &HiggsField, r: f64, q: &SphereQuadrature) -> TMatrix {
    let d = a.vdim();
    let mut entries = [[0.0f64; 4]; 4];
    for (node, w) in q.nodes().iter().zip(q.weights()) {
        let value = a.value(&scale_node(node, r));
        for i in 0..d {
            for j in i..d {
                entries[i][j] += w * value.component(i).inner(&value.component(j));
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            entries[i][j] = entries[j][i];
        }
    }
    let (eigenvalues, eigenvectors) = jacobi::jacobi_eigen(&entries, d);
    TMatrix { r, vdim: d, entries, eigenvalues, eigenvectors }
}

/// Cross-correlation `P(r) = T_{ab}(r) u^a v^b`.
pub fn cross_correlation(
    a: &HiggsField,
    u: &[f64; 4],
    v: &[f64; 4],
    r: f64,
    q: &SphereQuadrature,
) -> f64 {
    t_matrix(a, r, q).quadratic_form(u, v)
}

/// Derivative of `P` in the `1/r^{n-1}` normalization:
/// `(2/r^{n-1}) ∫_{B_r} (<∇_A a(u), ∇_A a(v)> + <[a, a(u)], [a, a(v)]>)`.
pub fn cross_correlation_rate(
    a: &HiggsField,
    conn: &GaugeConnection,
    u: &[f64; 4],
    v: &[f64; 4],
    r: f64,
    q: &SphereQuadrature,
    radial_level: usize,
) -> f64 {
    let d = a.vdim();
    let integral = ball_integral(
        |x| {
            let value = a.value(x);
            let au = value.contract(&u[..d]);
            let av = value.contract(&v[..d]);
            let mut acc = 0.0;
            for alpha in 0..conn.dim() {
                let g = covariant_derivative(a, conn, x, alpha);
                acc += g.contract(&u[..d]).inner(&g.contract(&v[..d]));
            }
            for c in 0..d {
                acc += value
                    .component(c)
                    .commutator(&au)
                    .inner(&value.component(c).commutator(&av));
            }
            acc
        },
        r,
        q,
        radial_level,
    );
    2.0 * integral / r.powi(conn.dim() as i32 - 1)
}

/// Local average
/// `M_v(p, s) = ((1/sⁿ) ∫_{|x-p|<=s} |a(v)|²)^{1/2}`.
///
/// Satisfies `M_v(p, s) >= sqrt(ω/n) |a(v)|(p)`, with equality for constant
/// fields.
pub fn local_average(
    a: &HiggsField,
    v: &[f64; 4],
    p: &Point,
    s: f64,
    q: &SphereQuadrature,
    radial_level: usize,
) -> f64 {
    let d = a.vdim();
    let n = a.dim();
    let (nodes, weights) = gauss_legendre(radial_level);
    let mut total = 0.0;
    for (t, w) in nodes.iter().zip(&weights) {
        let rr = 0.5 * s * (t + 1.0);
        let shell = shell_integral(
            |y: &Point| {
                let x = [p[0] + y[0], p[1] + y[1], p[2] + y[2], p[3] + y[3]];
                a.value(&x).contract(&v[..d]).norm_sq()
            },
            rr,
            q,
        );
        total += 0.5 * s * w * shell;
    }
    (total / s.powi(n as i32)).sqrt()
}

/// `sqrt(ω/n)`: the constant in the local-average lower bound.
pub fn local_average_bound_constant(dim: usize) -> f64 {
    (surface_measure(dim) / dim as f64).sqrt()
}
