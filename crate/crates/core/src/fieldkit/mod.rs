//! Field evaluators over `R^n` (n = 3 or 4), gauge-covariant calculus, and
//! hypersphere quadrature.
//!
//! Points are fixed `[f64; 4]` arrays; fields on `R^3` read only the first
//! three coordinates. Evaluators supply analytic partial derivatives when
//! available; otherwise 4th-order central differences with a step
//! `h = fd_step · (1 + |x|)` are used (default `fd_step = 1e-3`, which keeps
//! residual checks below 1e-8 on smooth fields).

mod quad;

pub use quad::{
    ball_integral, gauss_legendre, shell_integral, sphere_quadrature, surface_measure,
    SphereQuadrature,
};

use crate::algebra::{HiggsValue, LieVector};
use std::sync::Arc;
use thiserror::Error;

/// A point in `R^n`, padded to four coordinates.
pub type Point = [f64; 4];

#[derive(Debug, Error)]
pub enum FieldkitError {
    #[error("operation requires dimension {required}, field has dimension {got}")]
    WrongDimension { required: usize, got: usize },
    #[error("unsupported dimension {0}: only n = 3 and n = 4 are implemented")]
    UnsupportedDimension(usize),
    #[error("quadrature level {0} too low: levels below 4 are not supported")]
    LevelTooLow(usize),
}

/// Euclidean norm of a point.
pub fn point_norm(x: &Point) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt()
}

pub(crate) use point_norm as norm;

/// Derivative mode of a field evaluator.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DerivativeMode {
    /// Closed-form partials were supplied at construction.
    Analytic,
    /// 4th-order central differences on the value evaluator.
    Numeric,
}

const DEFAULT_FD_STEP: f64 = 1e-3;

/// 4th-order central difference stencil weights over offsets -2h..2h.
#[inline]
fn fd4<T, F>(f: F, step: f64) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    (f(-2.0 * step) + f(2.0 * step) * -1.0 + f(-step) * -8.0 + f(step) * 8.0)
        * (1.0 / (12.0 * step))
}

/// 4th-order central second-derivative stencil.
#[inline]
fn fd4_second<T, F>(f0: T, f: F, step: f64) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    (f(-2.0 * step) * -1.0
        + f(2.0 * step) * -1.0
        + f(-step) * 16.0
        + f(step) * 16.0
        + f0 * -30.0)
        * (1.0 / (12.0 * step * step))
}

type HiggsValueFn = dyn Fn(&Point) -> HiggsValue + Send + Sync;
type HiggsPartialFn = dyn Fn(&Point, usize) -> HiggsValue + Send + Sync;

/// A section of `V ⊗ su(2)` over `R^n`: an evaluator plus optional analytic
/// derivatives.
#[derive(Clone)]
pub struct HiggsField {
    dim: usize,
    vdim: usize,
    value: Arc<HiggsValueFn>,
    partial: Option<Arc<HiggsPartialFn>>,
    second: Option<Arc<HiggsPartialFn>>,
    fd_step: f64,
}

impl HiggsField {
    /// Field with numeric (finite-difference) derivatives.
    pub fn numeric<F>(dim: usize, vdim: usize, value: F) -> Self
    where
        F: Fn(&Point) -> HiggsValue + Send + Sync + 'static,
    {
        HiggsField {
            dim,
            vdim,
            value: Arc::new(value),
            partial: None,
            second: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    /// Field with closed-form first partials `df(x, alpha) = ∂_alpha a(x)`.
    pub fn analytic<F, G>(dim: usize, vdim: usize, value: F, df: G) -> Self
    where
        F: Fn(&Point) -> HiggsValue + Send + Sync + 'static,
        G: Fn(&Point, usize) -> HiggsValue + Send + Sync + 'static,
    {
        HiggsField {
            dim,
            vdim,
            value: Arc::new(value),
            partial: Some(Arc::new(df)),
            second: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    /// Adds closed-form diagonal second partials `d2f(x, alpha) = ∂²_alpha a(x)`.
    pub fn with_second<G>(mut self, d2f: G) -> Self
    where
        G: Fn(&Point, usize) -> HiggsValue + Send + Sync + 'static,
    {
        self.second = Some(Arc::new(d2f));
        self
    }

    /// Overrides the finite-difference base step.
    pub fn with_fd_step(mut self, fd_step: f64) -> Self {
        self.fd_step = fd_step;
        self
    }

    /// A copy that ignores analytic derivatives; used to cross-check the
    /// numeric mode against the analytic one.
    pub fn forced_numeric(&self) -> Self {
        HiggsField {
            dim: self.dim,
            vdim: self.vdim,
            value: self.value.clone(),
            partial: None,
            second: None,
            fd_step: self.fd_step,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vdim(&self) -> usize {
        self.vdim
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        if self.partial.is_some() {
            DerivativeMode::Analytic
        } else {
            DerivativeMode::Numeric
        }
    }

    pub fn value(&self, x: &Point) -> HiggsValue {
        (self.value)(x)
    }

    /// `∂_alpha a(x)`, analytic when available.
    pub fn partial(&self, x: &Point, alpha: usize) -> HiggsValue {
        debug_assert!(alpha < self.dim);
        if let Some(df) = &self.partial {
            return df(x, alpha);
        }
        let h = self.fd_step * (1.0 + norm(x));
        fd4(
            |t| {
                let mut y = *x;
                y[alpha] += t;
                (self.value)(&y)
            },
            h,
        )
    }

    /// `∂²_alpha a(x)` (diagonal second partial). Falls back to a stencil on
    /// the analytic first partial when only that is available.
    pub fn second_diag(&self, x: &Point, alpha: usize) -> HiggsValue {
        debug_assert!(alpha < self.dim);
        if let Some(d2f) = &self.second {
            return d2f(x, alpha);
        }
        let h = self.fd_step * (1.0 + norm(x));
        if let Some(df) = &self.partial {
            return fd4(
                |t| {
                    let mut y = *x;
                    y[alpha] += t;
                    df(&y, alpha)
                },
                h,
            );
        }
        fd4_second(
            (self.value)(x),
            |t| {
                let mut y = *x;
                y[alpha] += t;
                (self.value)(&y)
            },
            h,
        )
    }
}

type ConnValueFn = dyn Fn(&Point, usize) -> LieVector + Send + Sync;
type ConnPartialFn = dyn Fn(&Point, usize, usize) -> LieVector + Send + Sync;

/// A connection on the product SU(2) bundle over `R^n`: component evaluators
/// `A_alpha` with optional analytic partials.
#[derive(Clone)]
pub struct GaugeConnection {
    dim: usize,
    component: Arc<ConnValueFn>,
    partial: Option<Arc<ConnPartialFn>>,
    fd_step: f64,
}

impl GaugeConnection {
    pub fn numeric<F>(dim: usize, component: F) -> Self
    where
        F: Fn(&Point, usize) -> LieVector + Send + Sync + 'static,
    {
        GaugeConnection {
            dim,
            component: Arc::new(component),
            partial: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    /// Connection with closed-form partials `df(x, beta, alpha) = ∂_beta A_alpha(x)`.
    pub fn analytic<F, G>(dim: usize, component: F, df: G) -> Self
    where
        F: Fn(&Point, usize) -> LieVector + Send + Sync + 'static,
        G: Fn(&Point, usize, usize) -> LieVector + Send + Sync + 'static,
    {
        GaugeConnection {
            dim,
            component: Arc::new(component),
            partial: Some(Arc::new(df)),
            fd_step: DEFAULT_FD_STEP,
        }
    }

    /// The product (flat) connection `A ≡ 0`.
    pub fn product(dim: usize) -> Self {
        GaugeConnection::analytic(dim, |_, _| LieVector::ZERO, |_, _, _| LieVector::ZERO)
    }

    pub fn forced_numeric(&self) -> Self {
        GaugeConnection {
            dim: self.dim,
            component: self.component.clone(),
            partial: None,
            fd_step: self.fd_step,
        }
    }

    pub fn with_fd_step(mut self, fd_step: f64) -> Self {
        self.fd_step = fd_step;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        if self.partial.is_some() {
            DerivativeMode::Analytic
        } else {
            DerivativeMode::Numeric
        }
    }

    pub fn component(&self, x: &Point, alpha: usize) -> LieVector {
        debug_assert!(alpha < self.dim);
        (self.component)(x, alpha)
    }

    /// `∂_beta A_alpha(x)`.
    pub fn partial(&self, x: &Point, beta: usize, alpha: usize) -> LieVector {
        debug_assert!(beta < self.dim && alpha < self.dim);
        if let Some(df) = &self.partial {
            return df(x, beta, alpha);
        }
        let h = self.fd_step * (1.0 + norm(x));
        fd4(
            |t| {
                let mut y = *x;
                y[beta] += t;
                (self.component)(&y, alpha)
            },
            h,
        )
    }
}

/// An su(2)-valued 2-form: antisymmetric `n x n` array of [`LieVector`]s.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm {
    dim: usize,
    comps: [[LieVector; 4]; 4],
}

impl TwoForm {
    pub fn zero(dim: usize) -> Self {
        TwoForm { dim, comps: [[LieVector::ZERO; 4]; 4] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sets the `(alpha, beta)` component and its antisymmetric partner.
    pub fn set(&mut self, alpha: usize, beta: usize, v: LieVector) {
        debug_assert!(alpha < self.dim && beta < self.dim && alpha != beta);
        self.comps[alpha][beta] = v;
        self.comps[beta][alpha] = -v;
    }

    pub fn component(&self, alpha: usize, beta: usize) -> LieVector {
        debug_assert!(alpha < self.dim && beta < self.dim);
        self.comps[alpha][beta]
    }

    /// `Σ_{alpha<beta} |F_{alpha beta}|²`.
    pub fn norm_sq(&self) -> f64 {
        let mut total = 0.0;
        for alpha in 0..self.dim {
            for beta in (alpha + 1)..self.dim {
                total += self.comps[alpha][beta].norm_sq();
            }
        }
        total
    }

    pub fn max_component_norm(&self) -> f64 {
        let mut worst = 0.0f64;
        for alpha in 0..self.dim {
            for beta in (alpha + 1)..self.dim {
                worst = worst.max(self.comps[alpha][beta].norm());
            }
        }
        worst
    }

    pub fn add(&self, other: &TwoForm) -> TwoForm {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for alpha in 0..self.dim {
            for beta in 0..self.dim {
                out.comps[alpha][beta] += other.comps[alpha][beta];
            }
        }
        out
    }

    pub fn sub(&self, other: &TwoForm) -> TwoForm {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for alpha in 0..self.dim {
            for beta in 0..self.dim {
                out.comps[alpha][beta] -= other.comps[alpha][beta];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> TwoForm {
        let mut out = self.clone();
        for alpha in 0..self.dim {
            for beta in 0..self.dim {
                out.comps[alpha][beta] = out.comps[alpha][beta] * s;
            }
        }
        out
    }
}

/// `[b, v]` applied to every `V`-component of `v`.
pub fn ad(b: &LieVector, v: &HiggsValue) -> HiggsValue {
    let mut out = HiggsValue::zero(v.vdim());
    for c in 0..v.vdim() {
        out.set_component(c, b.commutator(&v.component(c)));
    }
    out
}

/// Covariant derivative `∇_{A,alpha} a = ∂_alpha a + [A_alpha, a]` at `x`.
pub fn covariant_derivative(
    a: &HiggsField,
    conn: &GaugeConnection,
    x: &Point,
    alpha: usize,
) -> HiggsValue {
    a.partial(x, alpha) + ad(&conn.component(x, alpha), &a.value(x))
}

/// Curvature `F_{alpha beta} = ∂_alpha A_beta - ∂_beta A_alpha + [A_alpha, A_beta]`.
pub fn curvature(conn: &GaugeConnection, x: &Point) -> TwoForm {
    let n = conn.dim();
    let mut comps = [LieVector::ZERO; 4];
    for alpha in 0..n {
        comps[alpha] = conn.component(x, alpha);
    }
    let mut out = TwoForm::zero(n);
    for alpha in 0..n {
        for beta in (alpha + 1)..n {
            let f = conn.partial(x, alpha, beta) - conn.partial(x, beta, alpha)
                + comps[alpha].commutator(&comps[beta]);
            out.set(alpha, beta, f);
        }
    }
    out
}

/// Connection Laplacian `∇_A†∇_A a = -Σ_alpha ∇_{A,alpha}(∇_{A,alpha} a)` on
/// flat `R^n`. The sign makes the operator non-negative.
pub fn covariant_laplacian(a: &HiggsField, conn: &GaugeConnection, x: &Point) -> HiggsValue {
    let n = conn.dim();
    let value = a.value(x);
    let mut out = HiggsValue::zero(a.vdim());
    for alpha in 0..n {
        let a_alpha = conn.component(x, alpha);
        let da = a.partial(x, alpha);
        // ∇_alpha ∇_alpha a = ∂²_alpha a + [∂_alpha A_alpha, a]
        //                     + 2 [A_alpha, ∂_alpha a] + [A_alpha, [A_alpha, a]]
        out += a.second_diag(x, alpha);
        out += ad(&conn.partial(x, alpha, alpha), &value);
        out += ad(&a_alpha, &da) * 2.0;
        out += ad(&a_alpha, &ad(&a_alpha, &value));
    }
    -out
}

/// Levi-Civita symbol on four indices with `ε_{0123} = +1`.
pub(crate) fn epsilon4(i: usize, j: usize, k: usize, l: usize) -> f64 {
    let p = [i as i32, j as i32, k as i32, l as i32];
    let mut sign = 1.0;
    for a in 0..4 {
        for b in (a + 1)..4 {
            match p[a].cmp(&p[b]) {
                std::cmp::Ordering::Greater => sign = -sign,
                std::cmp::Ordering::Equal => return 0.0,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    sign
}

/// Splits a 2-form on `R^4` into self-dual and anti-self-dual parts:
/// `ω±_{αβ} = 1/2 (ω_{αβ} ± 1/2 ε_{αβγδ} ω_{γδ})`, orientation
/// `dx1∧dx2∧dx3∧dx4`.
pub fn hodge_split(omega: &TwoForm) -> Result<(TwoForm, TwoForm), FieldkitError> {
    if omega.dim() != 4 {
        return Err(FieldkitError::WrongDimension { required: 4, got: omega.dim() });
    }
    let dual = hodge_dual(omega);
    let plus = omega.add(&dual).scale(0.5);
    let minus = omega.sub(&dual).scale(0.5);
    Ok((plus, minus))
}

/// Hodge dual `(*ω)_{αβ} = 1/2 ε_{αβγδ} ω_{γδ}` on `R^4`.
pub fn hodge_dual(omega: &TwoForm) -> TwoForm {
    debug_assert_eq!(omega.dim(), 4);
    let mut out = TwoForm::zero(4);
    for alpha in 0..4 {
        for beta in (alpha + 1)..4 {
            let mut v = LieVector::ZERO;
            for gamma in 0..4 {
                for delta in 0..4 {
                    let e = epsilon4(alpha, beta, gamma, delta);
                    if e != 0.0 {
                        v += omega.component(gamma, delta) * (0.5 * e);
                    }
                }
            }
            out.set(alpha, beta, v);
        }
    }
    out
}
