//! Pointwise residual evaluators for every equation system handled by this
//! crate, plus the stress-tensor and integral-identity checks.
//!
//! Conventions fixed here once and for all:
//! - `∇_A†∇_A = -Σ_α ∇_{A,α}∇_{A,α}` on flat `R^n`, so the frequency
//!   integrand is non-negative.
//! - `a ∧ a` as a 2-form has components `[a_α, a_β]` with no extra 1/2.
//! - The self-dual frame used for component extraction is
//!   `ω¹ = dx1∧dx2 + dx3∧dx4`, `ω² = dx1∧dx3 + dx4∧dx2`,
//!   `ω³ = dx1∧dx4 + dx2∧dx3`, each component read off with a factor 1/2.
//! - In the first-order system for `(α, φ)` fields the Hodge star on
//!   3-forms is taken in the reversed orientation; with the identification
//!   `α = 2^{-1/4}(a_3, -a_2, a_1)`, `φ = -2^{-1/4} a_4` this makes the
//!   system exactly equivalent to the τ = 0 member of the family (see the
//!   cross-check test below, which pins the equivalence pointwise).

use crate::algebra::{HiggsValue, LieVector};
use crate::fieldkit::{
    ball_integral, covariant_derivative, covariant_laplacian, curvature, epsilon4, hodge_split,
    shell_integral, FieldkitError, GaugeConnection, HiggsField, Point, SphereQuadrature, TwoForm,
};
use crate::solutions::{MonopolePair, SolutionPair};
use rayon::prelude::*;

/// Self-dual frame pairs (0-indexed): `ω^k` spans components `(p1) + (p2)`.
pub const SD_FRAME: [[(usize, usize); 2]; 3] = [
    [(0, 1), (2, 3)],
    [(0, 2), (3, 1)],
    [(0, 3), (1, 2)],
];

fn full_covariant_derivative(
    a: &HiggsField,
    conn: &GaugeConnection,
    x: &Point,
) -> [HiggsValue; 4] {
    let n = conn.dim();
    let mut out = [HiggsValue::zero(a.vdim()); 4];
    for (alpha, slot) in out.iter_mut().enumerate().take(n) {
        *slot = covariant_derivative(a, conn, x, alpha);
    }
    out
}

/// Residual of the master equation `∇_A†∇_A a + [a_c, [a, a_c]]` at `x`.
pub fn residual_eq11(pair: &SolutionPair, x: &Point) -> HiggsValue {
    let value = pair.higgs().value(x);
    covariant_laplacian(pair.higgs(), pair.connection(), x) + value.double_bracket(&value)
}

/// The three members of the τ-family residual.
#[derive(Clone, Debug)]
pub struct KwResidual {
    /// `(1-τ)(F_A - a∧a)⁺ - τ(d_A a)⁺`.
    pub plus: TwoForm,
    /// `τ(F_A - a∧a)⁻ + (1-τ)(d_A a)⁻`.
    pub minus: TwoForm,
    /// `d_A*a`, i.e. `Σ_α ∇_α a_α`.
    pub div: LieVector,
}

impl KwResidual {
    pub fn max_norm(&self) -> f64 {
        self.plus
            .max_component_norm()
            .max(self.minus.max_component_norm())
            .max(self.div.norm())
    }
}

/// Residual of the τ-family system at `x`; requires `n = 4`.
pub fn residual_kw(pair: &SolutionPair, tau: f64, x: &Point) -> Result<KwResidual, FieldkitError> {
    let conn = pair.connection();
    let a = pair.higgs();
    if conn.dim() != 4 {
        return Err(FieldkitError::WrongDimension { required: 4, got: conn.dim() });
    }
    let value = a.value(x);
    let grad = full_covariant_derivative(a, conn, x);

    let f = curvature(conn, x);
    // F - a∧a with (a∧a)_{αβ} = [a_α, a_β].
    let mut f_minus_wedge = TwoForm::zero(4);
    let mut da = TwoForm::zero(4);
    for alpha in 0..4 {
        for beta in (alpha + 1)..4 {
            let wedge = value.component(alpha).commutator(&value.component(beta));
            f_minus_wedge.set(alpha, beta, f.component(alpha, beta) - wedge);
            da.set(
                alpha,
                beta,
                grad[alpha].component(beta) - grad[beta].component(alpha),
            );
        }
    }
    let (fw_plus, fw_minus) = hodge_split(&f_minus_wedge)?;
    let (da_plus, da_minus) = hodge_split(&da)?;

    let plus = fw_plus.scale(1.0 - tau).sub(&da_plus.scale(tau));
    let minus = fw_minus.scale(tau).add(&da_minus.scale(1.0 - tau));
    let mut div = LieVector::ZERO;
    for (alpha, g) in grad.iter().enumerate() {
        div += g.component(alpha);
    }
    Ok(KwResidual { plus, minus, div })
}

/// Residual of the monopole equation `F_{A,ij} - ε_{ijk} ∇_{A,k} Φ` on `R^3`.
pub fn residual_monopole(m: &MonopolePair, x: &Point) -> TwoForm {
    let f = curvature(m.connection(), x);
    let grad = full_covariant_derivative(m.higgs(), m.connection(), x);
    let mut out = TwoForm::zero(3);
    // ε_{ijk} for the index pairs with i < j: (0,1)→k=2 sign +, (0,2)→k=1
    // sign -, (1,2)→k=0 sign +.
    for (i, j, k, eps) in [(0, 1, 2, 1.0), (0, 2, 1, -1.0), (1, 2, 0, 1.0)] {
        out.set(i, j, f.component(i, j) - grad[k].component(0) * eps);
    }
    out
}

/// Residual of the first-order system for `(α, φ)` fields: the quadratic
/// curvature equation and the coupled first-order equation.
///
/// `fields` is a `vdim = 4` section holding `(α_1, α_2, α_3, φ)` with the
/// `α` components taken in the [`SD_FRAME`].
#[derive(Clone, Debug)]
pub struct VwResidual {
    /// `(F⁺)_a - (1/(2√2)) ε_{abc} [α_b, α_c] - (1/√2) [φ, α_a]`.
    pub curvature: [LieVector; 3],
    /// `*d_A α + d_A φ` as a 1-form (four su(2) components).
    pub one_form: [LieVector; 4],
}

impl VwResidual {
    pub fn max_norm(&self) -> f64 {
        let a = self.curvature.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let b = self.one_form.iter().map(|v| v.norm()).fold(0.0, f64::max);
        a.max(b)
    }
}

pub fn residual_vw(
    conn: &GaugeConnection,
    fields: &HiggsField,
    x: &Point,
) -> Result<VwResidual, FieldkitError> {
    if conn.dim() != 4 {
        return Err(FieldkitError::WrongDimension { required: 4, got: conn.dim() });
    }
    let value = fields.value(x);
    let grad = full_covariant_derivative(fields, conn, x);

    let f = curvature(conn, x);
    let (f_plus, _) = hodge_split(&f)?;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut curvature_res = [LieVector::ZERO; 3];
    for (k, pairs) in SD_FRAME.iter().enumerate() {
        let fp = (f_plus.component(pairs[0].0, pairs[0].1)
            + f_plus.component(pairs[1].0, pairs[1].1))
            * 0.5;
        // ε_{abc}[α_b, α_c] summed over b, c = 2 [α_{k+1}, α_{k+2}] cyclically.
        let b = (k + 1) % 3;
        let c = (k + 2) % 3;
        let quad = value.component(b).commutator(&value.component(c)) * 2.0;
        let phi_term = value.component(3).commutator(&value.component(k));
        curvature_res[k] = fp - quad * (0.5 * inv_sqrt2) - phi_term * inv_sqrt2;
    }

    // α as a 2-form: α_{μν} = Σ_k α_k ω^k_{μν}; same for its derivatives.
    let w = |k: usize, mu: usize, nu: usize| -> f64 {
        for (p, q) in SD_FRAME[k] {
            if (mu, nu) == (p, q) {
                return 1.0;
            }
            if (mu, nu) == (q, p) {
                return -1.0;
            }
        }
        0.0
    };
    let mut one_form = [LieVector::ZERO; 4];
    for (s, out) in one_form.iter_mut().enumerate() {
        let mut acc = LieVector::ZERO;
        for l in 0..4 {
            for mu in 0..4 {
                for nu in (mu + 1)..4 {
                    let e = epsilon4(l, mu, nu, s);
                    if e != 0.0 {
                        for k in 0..3 {
                            let wk = w(k, mu, nu);
                            if wk != 0.0 {
                                acc += grad[l].component(k) * (e * wk);
                            }
                        }
                    }
                }
            }
        }
        // Reversed-orientation 3-form star, then the dφ term.
        *out = acc * -1.0 + grad[s].component(3);
    }

    Ok(VwResidual { curvature: curvature_res, one_form })
}

/// The identification of 1-form fields with `(α, φ)` fields under which the
/// two first-order systems are pointwise equivalent.
pub fn vw_from_one_form(a: &HiggsField) -> HiggsField {
    let lambda = 2.0f64.powf(-0.25);
    let a0 = a.clone();
    let a1 = a.clone();
    let a2 = a.clone();
    let map = move |v: HiggsValue| {
        let mut out = HiggsValue::zero(4);
        out.set_component(0, v.component(2) * lambda);
        out.set_component(1, v.component(1) * -lambda);
        out.set_component(2, v.component(0) * lambda);
        out.set_component(3, v.component(3) * -lambda);
        out
    };
    let map2 = map;
    let map3 = map;
    HiggsField::analytic(
        4,
        4,
        move |x: &Point| map(a0.value(x)),
        move |x: &Point, alpha: usize| map2(a1.partial(x, alpha)),
    )
    .with_second(move |x: &Point, alpha: usize| map3(a2.second_diag(x, alpha)))
}

// ---------------------------------------------------------------------------
// Stress tensor and the radial integral identity.
// ---------------------------------------------------------------------------

/// The symmetric stress tensor of `a(v)` at a point.
#[derive(Clone, Debug)]
pub struct StressTensor {
    pub dim: usize,
    pub entries: [[f64; 4]; 4],
}

impl StressTensor {
    pub fn entry(&self, alpha: usize, beta: usize) -> f64 {
        self.entries[alpha][beta]
    }
}

fn bracket_with(value: &HiggsValue, w: &LieVector) -> HiggsValue {
    let mut out = HiggsValue::zero(value.vdim());
    for b in 0..value.vdim() {
        out.set_component(b, value.component(b).commutator(w));
    }
    out
}

/// `S_{αβ} = <∇_α a(v), ∇_β a(v)> - (1/2) δ_{αβ} (|∇_A a(v)|² + |[a, a(v)]|²)`.
pub fn stress_tensor(pair: &SolutionPair, v: &[f64; 4], x: &Point) -> StressTensor {
    let n = pair.connection().dim();
    let grad = full_covariant_derivative(pair.higgs(), pair.connection(), x);
    let grad_v: Vec<LieVector> = (0..n).map(|alpha| grad[alpha].contract(v)).collect();
    let value = pair.higgs().value(x);
    let av = value.contract(v);
    let comm = bracket_with(&value, &av);
    let dirichlet: f64 = grad_v.iter().map(|g| g.norm_sq()).sum();
    let potential = comm.norm_sq();
    let mut entries = [[0.0; 4]; 4];
    for alpha in 0..n {
        for beta in 0..n {
            let mut s = grad_v[alpha].inner(&grad_v[beta]);
            if alpha == beta {
                s -= 0.5 * (dirichlet + potential);
            }
            entries[alpha][beta] = s;
        }
    }
    StressTensor { dim: n, entries }
}

/// The source of the stress tensor's divergence:
/// `∇_β S_{αβ} = <F_{βα}, [a(v), ∇_β a(v)]> - Σ_c <[∇_α a_c, a(v)], [a_c, a(v)]>`.
pub fn stress_divergence_source(pair: &SolutionPair, v: &[f64; 4], x: &Point) -> [f64; 4] {
    let n = pair.connection().dim();
    let grad = full_covariant_derivative(pair.higgs(), pair.connection(), x);
    let value = pair.higgs().value(x);
    let av = value.contract(v);
    let f = curvature(pair.connection(), x);
    let mut out = [0.0; 4];
    for (alpha, slot) in out.iter_mut().enumerate().take(n) {
        let mut acc = 0.0;
        for (beta, g) in grad.iter().enumerate().take(n) {
            let grad_v_beta = g.contract(v);
            acc += f
                .component(beta, alpha)
                .inner(&av.commutator(&grad_v_beta));
        }
        for c in 0..value.vdim() {
            acc -= grad[alpha]
                .component(c)
                .commutator(&av)
                .inner(&value.component(c).commutator(&av));
        }
        *slot = acc;
    }
    out
}

/// Both sides of the radial integral identity obtained by pairing the
/// stress-tensor divergence with `x^α ∂_α` over `B_r`, and their relative gap.
#[derive(Clone, Debug)]
pub struct PohozaevCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Evaluates the identity
/// ```text
///   r ∫_{∂B_r} (|∇_{A,r} a(v)|² - 1/2 |∇_A a(v)|² - 1/2 |[a, a(v)]|²)
///   + ∫_{B_r} ((n-2)/2 |∇_A a(v)|² + n/2 |[a, a(v)]|²)
///   = ∫_{B_r} x^α (∇_β S_{αβ})
/// ```
/// by quadrature; exact in the continuum for solutions of the master
/// equation.
pub fn pohozaev_check(
    pair: &SolutionPair,
    v: &[f64; 4],
    r: f64,
    q: &SphereQuadrature,
    radial_level: usize,
) -> PohozaevCheck {
    let n = pair.connection().dim() as f64;
    let boundary = shell_integral(
        |x: &Point| {
            let grad = full_covariant_derivative(pair.higgs(), pair.connection(), x);
            let value = pair.higgs().value(x);
            let av = value.contract(v);
            let rr = crate::fieldkit::point_norm(x).max(1e-300);
            let mut radial = LieVector::ZERO;
            let mut dirichlet = 0.0;
            for (alpha, g) in grad.iter().enumerate().take(pair.connection().dim()) {
                let gv = g.contract(v);
                radial += gv * (x[alpha] / rr);
                dirichlet += gv.norm_sq();
            }
            let potential = bracket_with(&value, &av).norm_sq();
            radial.norm_sq() - 0.5 * dirichlet - 0.5 * potential
        },
        r,
        q,
    );
    let bulk = ball_integral(
        |x: &Point| {
            let grad = full_covariant_derivative(pair.higgs(), pair.connection(), x);
            let value = pair.higgs().value(x);
            let av = value.contract(v);
            let mut dirichlet = 0.0;
            for g in grad.iter().take(pair.connection().dim()) {
                dirichlet += g.contract(v).norm_sq();
            }
            let potential = bracket_with(&value, &av).norm_sq();
            0.5 * (n - 2.0) * dirichlet + 0.5 * n * potential
        },
        r,
        q,
        radial_level,
    );
    let lhs = r * boundary + bulk;
    let rhs = ball_integral(
        |x: &Point| {
            let src = stress_divergence_source(pair, v, x);
            (0..pair.connection().dim()).map(|alpha| x[alpha] * src[alpha]).sum()
        },
        r,
        q,
        radial_level,
    );
    let scale = lhs.abs().max(rhs.abs()).max(1e-300);
    PohozaevCheck { lhs, rhs, gap: (lhs - rhs).abs() / scale }
}

// ---------------------------------------------------------------------------
// Residual reports.
// ---------------------------------------------------------------------------

/// One per-point, per-component residual norm.
#[derive(Clone, Debug)]
pub struct ResidualSample {
    pub point: Point,
    pub component: &'static str,
    pub norm: f64,
}

/// Sampled residual norms for one equation, with max and RMS.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub equation: String,
    pub samples: Vec<ResidualSample>,
    pub max: f64,
    pub rms: f64,
}

impl ResidualReport {
    fn from_samples(equation: String, samples: Vec<ResidualSample>) -> Self {
        let max = samples.iter().map(|s| s.norm).fold(0.0, f64::max);
        let ms = if samples.is_empty() {
            0.0
        } else {
            samples.iter().map(|s| s.norm * s.norm).sum::<f64>() / samples.len() as f64
        };
        ResidualReport { equation, samples, max, rms: ms.sqrt() }
    }
}

/// Equation selector for report generation.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum EquationId {
    Master,
    Kw(f64),
    Monopole,
}

impl std::fmt::Display for EquationId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EquationId::Master => write!(f, "eq11"),
            EquationId::Kw(tau) if (tau - 0.5).abs() < 1e-12 => write!(f, "kw_half"),
            EquationId::Kw(tau) => write!(f, "kw({tau})"),
            EquationId::Monopole => write!(f, "monopole"),
        }
    }
}

/// Builds a residual report for a solution pair over the given points.
/// Points are processed in parallel; aggregation order is fixed.
pub fn report_for_pair(
    pair: &SolutionPair,
    eq: EquationId,
    points: &[Point],
) -> Result<ResidualReport, FieldkitError> {
    let samples: Result<Vec<Vec<ResidualSample>>, FieldkitError> = points
        .par_iter()
        .map(|x| match eq {
            EquationId::Master => Ok(vec![ResidualSample {
                point: *x,
                component: "master",
                norm: residual_eq11(pair, x).norm(),
            }]),
            EquationId::Kw(tau) => {
                let res = residual_kw(pair, tau, x)?;
                Ok(vec![
                    ResidualSample {
                        point: *x,
                        component: "plus",
                        norm: res.plus.max_component_norm(),
                    },
                    ResidualSample {
                        point: *x,
                        component: "minus",
                        norm: res.minus.max_component_norm(),
                    },
                    ResidualSample { point: *x, component: "div", norm: res.div.norm() },
                ])
            }
            EquationId::Monopole => Err(FieldkitError::WrongDimension { required: 3, got: 4 }),
        })
        .collect();
    Ok(ResidualReport::from_samples(
        eq.to_string(),
        samples?.into_iter().flatten().collect(),
    ))
}

/// Builds the monopole-equation report.
pub fn report_for_monopole(m: &MonopolePair, points: &[Point]) -> ResidualReport {
    let samples: Vec<ResidualSample> = points
        .par_iter()
        .map(|x| ResidualSample {
            point: *x,
            component: "f-minus-dual-grad",
            norm: residual_monopole(m, x).max_component_norm(),
        })
        .collect();
    ResidualReport::from_samples("monopole".into(), samples)
}

/// Invariant suite over a solution pair: claimed residuals on the standard
/// point set, τ-covariance of the family transform, the stress-divergence
/// identity by finite differences, and quadrature refinement of the radial
/// integral identity.
pub fn residual_suite(
    pair: &SolutionPair,
    tol: f64,
) -> Vec<crate::diagnostics::CheckResult> {
    use crate::diagnostics::CheckResult;
    let mut checks = Vec::new();
    let points = crate::sampling::standard_points(4);

    if pair.claims().master {
        let report = report_for_pair(pair, EquationId::Master, &points).unwrap();
        checks.push(CheckResult::new(
            "residual: master equation",
            report.max < tol,
            format!("max {:.3e}, rms {:.3e} on {} points", report.max, report.rms, points.len()),
        ));
    }
    for &tau in &pair.claims().kw_tau {
        let report = report_for_pair(pair, EquationId::Kw(tau), &points).unwrap();
        checks.push(CheckResult::new(
            format!("residual: family tau = {tau}"),
            report.max < tol,
            format!("max {:.3e}, rms {:.3e}", report.max, report.rms),
        ));
    }
    if pair.claims().wedge_zero {
        let worst = points
            .iter()
            .map(|x| pair.higgs().value(x).wedge_square())
            .fold(0.0, f64::max);
        checks.push(CheckResult::new(
            "wedge square vanishes",
            worst < tol,
            format!("max {worst:.3e}"),
        ));
    }

    // τ-covariance: a commuting τ-family solution maps onto the
    // self-duality system under the transform.
    for &tau in &pair.claims().kw_tau {
        if tau > 0.0 && tau < 1.0 && pair.claims().wedge_zero {
            if let Ok(mapped) = crate::solutions::tau_transform(pair, tau) {
                let report = report_for_pair(&mapped, EquationId::Kw(0.5), &points).unwrap();
                checks.push(CheckResult::new(
                    format!("tau-covariance from tau = {tau}"),
                    report.max < tol,
                    format!("max {:.3e} after transform", report.max),
                ));
            }
        }
    }

    // Stress-tensor divergence vs its source, 4th-order differences.
    {
        let q = crate::fieldkit::sphere_quadrature(4, 8).unwrap();
        let t = crate::diagnostics::t_matrix(pair.higgs(), 3.0, &q);
        let v = t.largest_eigenvector();
        let mut worst = 0.0f64;
        for x in crate::sampling::ball_points(4, 5, 3.0, 0xd1f5) {
            for alpha in 0..4 {
                let h = 2e-3 * (1.0 + crate::fieldkit::point_norm(&x));
                let mut div = 0.0;
                for beta in 0..4 {
                    let entry = |tt: f64| {
                        let mut y = x;
                        y[beta] += tt;
                        stress_tensor(pair, &v, &y).entry(alpha, beta)
                    };
                    div += (entry(-2.0 * h) - entry(2.0 * h) + 8.0 * (entry(h) - entry(-h)))
                        / (12.0 * h);
                }
                worst = worst.max((div - stress_divergence_source(pair, &v, &x)[alpha]).abs());
            }
        }
        checks.push(CheckResult::new(
            "stress divergence identity",
            worst < 1e-5,
            format!("max |div S - source| = {worst:.3e}"),
        ));
    }

    // Radial integral identity under quadrature refinement.
    {
        let q6 = crate::fieldkit::sphere_quadrature(4, 6).unwrap();
        let q12 = crate::fieldkit::sphere_quadrature(4, 12).unwrap();
        let t = crate::diagnostics::t_matrix(pair.higgs(), 3.0, &q6);
        let v = t.largest_eigenvector();
        let coarse = pohozaev_check(pair, &v, 3.0, &q6, 32);
        let fine = pohozaev_check(pair, &v, 3.0, &q12, 32);
        let trivially_zero = coarse.lhs.abs() < 1e-12 && coarse.rhs.abs() < 1e-12;
        let passed = trivially_zero || (coarse.gap < 1e-3 && fine.gap * 4.0 <= coarse.gap);
        checks.push(CheckResult::new(
            "radial integral identity",
            passed,
            if trivially_zero {
                "both sides vanish".into()
            } else {
                format!("gap {:.3e} -> {:.3e} under angular doubling", coarse.gap, fine.gap)
            },
        ));
    }

    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::LieVector;
    use crate::fieldkit::sphere_quadrature;
    use crate::sampling;
    use crate::solutions::{
        build_solution, commuting_mode, lift_to_r4, ps_monopole, CommutingKind,
    };

    #[test]
    fn master_residual_vanishes_on_commuting_modes() {
        for kind in [CommutingKind::Constant, CommutingKind::LinearSelfDual] {
            let pair = commuting_mode(kind, [0.5, 0.5, 0.5, 0.5], LieVector::new(1.0, 0.0, 0.0));
            for x in sampling::ball_points(4, 10, 3.0, 3) {
                assert!(residual_eq11(&pair, &x).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn master_residual_small_on_lift() {
        let pair = build_solution("ps-lift").unwrap();
        let mut worst = 0.0f64;
        for x in sampling::standard_points(4) {
            worst = worst.max(residual_eq11(&pair, &x).norm());
        }
        assert!(worst < 1e-8, "max master residual {worst}");
    }

    #[test]
    fn scaled_lift_residual_matches_energy_gradient() {
        // Scaling a by 1.1 breaks the equation; the residual must then be
        // the L² gradient (up to the factor 2) of the energy
        // ∫ |∇_A a|² + 1/2 Σ |[a_b, a_c]|², checked by a directional
        // derivative against a compactly supported bump.
        let lift = lift_to_r4(&ps_monopole()).unwrap();
        let conn = lift.connection().clone();
        let scaled = crate::solutions::SolutionPair::new(
            "scaled-lift",
            conn.clone(),
            {
                let h0 = lift.higgs().clone();
                let h1 = lift.higgs().clone();
                let h2 = lift.higgs().clone();
                crate::fieldkit::HiggsField::analytic(
                    4,
                    4,
                    move |x: &Point| h0.value(x) * 1.1,
                    move |x: &Point, al: usize| h1.partial(x, al) * 1.1,
                )
                .with_second(move |x: &Point, al: usize| h2.second_diag(x, al) * 1.1)
            },
            Default::default(),
        );

        // Bump direction: δ(x) = (1 - |x-x0|²/ρ²)³ e_2 ⊗ e_1 inside the ball.
        let x0 = [0.6, -0.2, 0.4, 0.3];
        let rho2 = 0.8f64 * 0.8;
        let bump = move |x: &Point| {
            let s: f64 = (0..4).map(|i| (x[i] - x0[i]) * (x[i] - x0[i])).sum();
            let t = 1.0 - s / rho2;
            if t > 0.0 {
                t * t * t
            } else {
                0.0
            }
        };
        let dbump = move |x: &Point, al: usize| {
            let s: f64 = (0..4).map(|i| (x[i] - x0[i]) * (x[i] - x0[i])).sum();
            let t = 1.0 - s / rho2;
            if t > 0.0 {
                -6.0 * t * t * (x[al] - x0[al]) / rho2
            } else {
                0.0
            }
        };
        let delta_value = move |x: &Point| {
            HiggsValue::along(4, 1, LieVector::new(1.0, 0.0, 0.0), bump(x))
        };
        let delta_partial = move |x: &Point, al: usize| {
            HiggsValue::along(4, 1, LieVector::new(1.0, 0.0, 0.0), dbump(x, al))
        };

        let q = sphere_quadrature(4, 12).unwrap();
        let radius = 2.0;
        let energy = |t: f64| {
            let h0 = scaled.higgs().clone();
            let h1 = scaled.higgs().clone();
            let field = crate::fieldkit::HiggsField::analytic(
                4,
                4,
                move |x: &Point| h0.value(x) + delta_value(x) * t,
                move |x: &Point, al: usize| h1.partial(x, al) + delta_partial(x, al) * t,
            );
            ball_integral(
                |x: &Point| {
                    let grad = full_covariant_derivative(&field, &conn, x);
                    let v = field.value(x);
                    let dirichlet: f64 = grad.iter().map(|g| g.norm_sq()).sum();
                    dirichlet + v.wedge_square()
                },
                radius,
                &q,
                24,
            )
        };
        let h = 1e-4;
        let fd = (energy(h) - energy(-h)) / (2.0 * h);
        let inner = ball_integral(
            |x: &Point| 2.0 * residual_eq11(&scaled, x).inner(&delta_value(x)),
            radius,
            &q,
            24,
        );
        let rel = (fd - inner).abs() / fd.abs().max(1e-300);
        assert!(rel < 1e-4, "directional derivative mismatch: fd={fd}, <2R,δ>={inner}, rel={rel}");
    }

    #[test]
    fn kw_residual_zero_pair_and_tau_range() {
        let zero = crate::solutions::SolutionPair::new(
            "zero",
            GaugeConnection::product(4),
            HiggsField::analytic(4, 4, |_| HiggsValue::zero(4), |_, _| HiggsValue::zero(4))
                .with_second(|_, _| HiggsValue::zero(4)),
            Default::default(),
        );
        for tau in [0.0, 0.3, 1.0] {
            let res = residual_kw(&zero, tau, &[1.0, 2.0, 3.0, 4.0]).unwrap();
            assert_eq!(res.max_norm(), 0.0);
        }
    }

    #[test]
    fn kw_residual_rejects_dimension_three() {
        let m = ps_monopole();
        let pair3 = crate::solutions::SolutionPair::new(
            "mono3",
            m.connection().clone(),
            m.higgs().clone(),
            Default::default(),
        );
        assert!(residual_kw(&pair3, 0.5, &[1.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn lift_solves_half_system_to_high_accuracy() {
        let lift = build_solution("ps-lift").unwrap();
        let mut worst = 0.0f64;
        for x in sampling::standard_points(4) {
            worst = worst.max(residual_kw(&lift, 0.5, &x).unwrap().max_norm());
        }
        assert!(worst < 1e-8, "max residual {worst}");
    }

    #[test]
    fn monopole_residual_examples() {
        let m = ps_monopole();
        let x = [1.0, 0.0, 0.0, 0.0];
        assert!(residual_monopole(&m, &x).max_component_norm() < 1e-10);

        // Product connection with constant Φ: both sides vanish.
        let flat = MonopolePairForTest::constant(LieVector::new(0.0, 0.7, 0.0));
        let res = residual_monopole(&flat.0, &[0.3, 0.4, -0.2, 0.0]);
        assert_eq!(res.max_component_norm(), 0.0);

        let zero = MonopolePairForTest::constant(LieVector::ZERO);
        let res = residual_monopole(&zero.0, &[0.3, 0.4, -0.2, 0.0]);
        assert_eq!(res.max_component_norm(), 0.0);
    }

    /// Helper building degenerate monopole pairs for edge-case tests.
    struct MonopolePairForTest(pub MonopolePair);
    impl MonopolePairForTest {
        fn constant(phi: LieVector) -> Self {
            // Constructed through the public monopole type by swapping the
            // fields; the residual evaluator only uses evaluators.
            let pair = ps_monopole();
            let _ = pair; // silence unused in alternate builds
            MonopolePairForTest(MonopolePair::from_parts(
                GaugeConnection::product(3),
                HiggsField::analytic(
                    3,
                    1,
                    move |_| HiggsValue::from_components(&[phi]),
                    |_, _| HiggsValue::zero(1),
                )
                .with_second(|_, _| HiggsValue::zero(1)),
            ))
        }
    }

    #[test]
    fn vw_residual_zero_and_flat_cases() {
        let conn = GaugeConnection::product(4);
        let zero = HiggsField::analytic(4, 4, |_| HiggsValue::zero(4), |_, _| HiggsValue::zero(4));
        let res = residual_vw(&conn, &zero, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(res.max_norm(), 0.0);

        // A flat, α = 0, φ constant: every term vanishes.
        let phi_const = HiggsField::analytic(
            4,
            4,
            |_| HiggsValue::along(4, 3, LieVector::new(0.0, 0.0, 1.3), 1.0),
            |_, _| HiggsValue::zero(4),
        );
        let res = residual_vw(&conn, &phi_const, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(res.max_norm(), 0.0);
    }

    /// Random smooth polynomial pair for the equivalence cross-check.
    fn random_poly_pair(seed: u64) -> (GaugeConnection, HiggsField) {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut coef = [[[0.0f64; 3]; 5]; 4]; // [component][1+dir][lie]
        for c in coef.iter_mut() {
            for d in c.iter_mut() {
                for l in d.iter_mut() {
                    *l = rng.gen_range(-0.5..0.5);
                }
            }
        }
        let conn_coef = coef;
        let conn = GaugeConnection::analytic(
            4,
            move |x: &Point, alpha: usize| {
                let c = &conn_coef[alpha];
                let mut v = LieVector::new(c[0][0], c[0][1], c[0][2]);
                for d in 0..4 {
                    v += LieVector::new(c[1 + d][0], c[1 + d][1], c[1 + d][2]) * x[d];
                }
                v
            },
            move |_: &Point, beta: usize, alpha: usize| {
                let c = &conn_coef[alpha][1 + beta];
                LieVector::new(c[0], c[1], c[2])
            },
        );
        let mut acoef = [[[0.0f64; 3]; 5]; 4];
        for c in acoef.iter_mut() {
            for d in c.iter_mut() {
                for l in d.iter_mut() {
                    *l = rng.gen_range(-0.5..0.5);
                }
            }
        }
        let a_coef = acoef;
        let higgs = HiggsField::analytic(
            4,
            4,
            move |x: &Point| {
                let mut out = HiggsValue::zero(4);
                for comp in 0..4 {
                    let c = &a_coef[comp];
                    let mut v = LieVector::new(c[0][0], c[0][1], c[0][2]);
                    for d in 0..4 {
                        v += LieVector::new(c[1 + d][0], c[1 + d][1], c[1 + d][2]) * x[d];
                    }
                    out.set_component(comp, v);
                }
                out
            },
            move |_: &Point, beta: usize| {
                let mut out = HiggsValue::zero(4);
                for comp in 0..4 {
                    let c = &a_coef[comp][1 + beta];
                    out.set_component(comp, LieVector::new(c[0], c[1], c[2]));
                }
                out
            },
        );
        (conn, higgs)
    }

    #[test]
    fn vw_equals_tau_zero_under_fixed_identification() {
        // On random smooth pairs the two residuals intertwine exactly:
        // the curvature bullet equals the self-dual extraction of the
        // τ = 0 bullet, and the 1-form bullet is an invertible constant
        // rearrangement of ((d_A a)⁻ extractions, d_A*a). Vanishing of one
        // residual is therefore equivalent to vanishing of the other.
        let lambda = 2.0f64.powf(-0.25);
        for seed in [1u64, 2, 3] {
            let (conn, a) = random_poly_pair(seed);
            let pair = crate::solutions::SolutionPair::new(
                "random",
                conn.clone(),
                a.clone(),
                Default::default(),
            );
            let fields = vw_from_one_form(&a);
            for x in sampling::ball_points(4, 5, 2.0, seed ^ 0xbeef) {
                let vw = residual_vw(&conn, &fields, &x).unwrap();
                let kw = residual_kw(&pair, 0.0, &x).unwrap();

                // Curvature bullet vs (F - a∧a)⁺ extracted on the frame.
                for (k, pairs) in SD_FRAME.iter().enumerate() {
                    let r1 = (kw.plus.component(pairs[0].0, pairs[0].1)
                        + kw.plus.component(pairs[1].0, pairs[1].1))
                        * 0.5;
                    assert!(
                        (vw.curvature[k] - r1).norm() < 1e-10,
                        "curvature bullet {k} mismatch at seed {seed}"
                    );
                }

                // 1-form bullet vs the τ = 0 anti-self-dual and divergence
                // parts: V_1 = -2λ R2_3, V_2 = -2λ R2_2, V_3 = +2λ R2_1,
                // V_4 = -λ R3 (frame pairs as in SD_FRAME, minus sign on
                // the second member for the anti-self-dual extraction).
                let asd = |k: usize| {
                    (kw.minus.component(SD_FRAME[k][0].0, SD_FRAME[k][0].1)
                        - kw.minus.component(SD_FRAME[k][1].0, SD_FRAME[k][1].1))
                        * 0.5
                };
                let expect = [
                    asd(2) * (-2.0 * lambda),
                    asd(1) * (-2.0 * lambda),
                    asd(0) * (2.0 * lambda),
                    kw.div * -lambda,
                ];
                for s in 0..4 {
                    assert!(
                        (vw.one_form[s] - expect[s]).norm() < 1e-10,
                        "one-form bullet {s} mismatch at seed {seed}"
                    );
                }
            }
        }
    }

    #[test]
    fn stress_tensor_is_symmetric_and_zero_on_constant_mode() {
        let pair = build_solution("const-mode").unwrap();
        let v = [1.0, 0.0, 0.0, 0.0];
        let s = stress_tensor(&pair, &v, &[0.3, 0.8, -0.2, 0.5]);
        for alpha in 0..4 {
            for beta in 0..4 {
                assert_eq!(s.entry(alpha, beta), s.entry(beta, alpha));
                assert_eq!(s.entry(alpha, beta), 0.0);
            }
        }
    }

    #[test]
    fn stress_divergence_matches_source_by_finite_differences() {
        let pair = build_solution("ps-lift").unwrap();
        let v = [0.0, 0.0, 0.0, 1.0];
        let pts = sampling::ball_points(4, 20, 3.0, 0x57e5);
        for x in pts {
            let src = stress_divergence_source(&pair, &v, &x);
            for alpha in 0..4 {
                let h = 2e-3 * (1.0 + crate::fieldkit::point_norm(&x));
                let mut div = 0.0;
                for beta in 0..4 {
                    let entry = |t: f64| {
                        let mut y = x;
                        y[beta] += t;
                        stress_tensor(&pair, &v, &y).entry(alpha, beta)
                    };
                    div += (entry(-2.0 * h) - entry(2.0 * h) + 8.0 * (entry(h) - entry(-h)))
                        / (12.0 * h);
                }
                assert!(
                    (div - src[alpha]).abs() < 1e-5,
                    "divergence mismatch at {x:?} alpha={alpha}: {div} vs {}",
                    src[alpha]
                );
            }
        }
    }

    #[test]
    fn pohozaev_identity_on_lift() {
        let pair = build_solution("ps-lift").unwrap();
        let v = [0.0, 0.0, 0.0, 1.0];
        let coarse = sphere_quadrature(4, 6).unwrap();
        let fine = sphere_quadrature(4, 12).unwrap();
        let check_coarse = pohozaev_check(&pair, &v, 3.0, &coarse, 32);
        let check_fine = pohozaev_check(&pair, &v, 3.0, &fine, 32);
        assert!(check_coarse.gap < 1e-3, "coarse gap {}", check_coarse.gap);
        assert!(
            check_fine.gap * 4.0 <= check_coarse.gap,
            "refinement did not reduce the gap 4x: {} -> {}",
            check_coarse.gap,
            check_fine.gap
        );
    }

    #[test]
    fn pohozaev_trivial_on_constant_mode() {
        let pair = build_solution("const-mode").unwrap();
        let q = sphere_quadrature(4, 6).unwrap();
        let check = pohozaev_check(&pair, &[1.0, 0.0, 0.0, 0.0], 2.0, &q, 16);
        assert_eq!(check.lhs, 0.0);
        assert_eq!(check.rhs, 0.0);
    }

    #[test]
    fn report_shapes_and_summary() {
        let pair = build_solution("const-mode").unwrap();
        let pts = sampling::ball_points(4, 10, 5.0, 42);
        let report = report_for_pair(&pair, EquationId::Kw(0.5), &pts).unwrap();
        assert_eq!(report.samples.len(), 30); // three components per point
        assert!(report.max >= report.rms);
        assert_eq!(report.max, 0.0);
    }
}
