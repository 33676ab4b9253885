//! Closed-form solution constructors and the registry used by the CLI.
//!
//! The centerpiece is the spherically symmetric monopole on `R^3` and its
//! x4-invariant lift to `R^4`. In the basis `e_k = -i σ_k` the structure
//! constants are `2 ε`, which fixes the hedgehog profile that actually
//! solves the monopole equation `F_A = *d_A Φ` with `|Φ| → 1`:
//!
//! ```text
//!   Φ^a(x)   = -x̂_a (coth 2r - 1/(2r)),
//!   A_i^a(x) = ε_{aij} x̂_j (1 - 2r/sinh 2r) / (2r).
//! ```
//!
//! The widely printed unscaled profile `coth r - 1/r` solves the same
//! equation only for structure constants `ε`; both candidates are accepted
//! or rejected purely by the residual check, and the scaled one passes.
//! All other constructors (commuting modes, abelian pairs, the τ-family
//! transform) are elementary and are re-verified against their claimed
//! equations on a standard seeded point set at build time.

use crate::algebra::{HiggsValue, LieVector};
use crate::fieldkit::{GaugeConnection, HiggsField, Point};
use crate::residuals;
use crate::sampling;
use thiserror::Error;

/// Tolerance used when constructors re-verify their claimed equations.
pub const CLAIM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SolutionError {
    #[error("no lift sign gives a residual below {tol:.1e} (best was {best:.3e}); Hodge conventions are inconsistent")]
    LiftSignSearchFailed { best: f64, tol: f64 },
    #[error("solution '{label}' violates claimed equation {equation}: max residual {max_residual:.3e} > {tol:.1e}")]
    ClaimViolated {
        label: String,
        equation: String,
        max_residual: f64,
        tol: f64,
    },
    #[error("tau = {0} is outside (0,1): transform coefficients are singular at the endpoints")]
    InvalidTau(f64),
    #[error("transform input must claim {0}")]
    MissingClaim(&'static str),
    #[error("unknown solution label '{0}'")]
    UnknownLabel(String),
    #[error("monopole invariant violated: {0}")]
    MonopoleInvariant(String),
}

// ---------------------------------------------------------------------------
// Radial profile functions.
//
// P(r)  = (coth 2r - 1/(2r)) / r         so  Φ^a = sign · x_a P(r)
// M(r)  = (1 - 2r/sinh 2r) / (2r²)       so  A_i^a = ε_{aij} x_j M(r)
//
// Beyond the values themselves the analytic derivatives need P'/r and
// (P'' - P'/r)/r², both finite at the origin; each quantity has its own
// even power series used below SERIES_RADIUS to avoid cancellation (the
// direct expression for P'' loses ~8 digits near r = 0.01).
// ---------------------------------------------------------------------------

mod profile {
    const SERIES_RADIUS: f64 = 0.075;

    const P_SERIES: [f64; 7] = [
        0.6666666666666666,
        -0.17777777777777778,
        0.06772486772486773,
        -0.02708994708994709,
        0.01094543316765539,
        -0.0044326999670915015,
        0.0017961736480254999,
    ];
    const PPR_SERIES: [f64; 6] = [
        -0.35555555555555557,
        0.2708994708994709,
        -0.16253968253968254,
        0.08756346534124312,
        -0.04432699967091502,
        0.021554083776305997,
    ];
    const P2C_SERIES: [f64; 5] = [
        0.5417989417989418,
        -0.6501587301587302,
        0.5253807920474587,
        -0.35461599736732013,
        0.21554083776306,
    ];
    const M_SERIES: [f64; 7] = [
        0.3333333333333333,
        -0.15555555555555556,
        0.0656084656084656,
        -0.02687830687830688,
        0.010924055368499812,
        -0.004430535562810695,
        0.001795954388546981,
    ];
    const MPR_SERIES: [f64; 6] = [
        -0.3111111111111111,
        0.2624338624338624,
        -0.16126984126984126,
        0.0873924429479985,
        -0.04430535562810695,
        0.021551452662563773,
    ];
    const M2C_SERIES: [f64; 5] = [
        0.5248677248677248,
        -0.645079365079365,
        0.524354657687991,
        -0.3544428450248556,
        0.21551452662563775,
    ];

    fn horner(coeffs: &[f64], r2: f64) -> f64 {
        let mut acc = 0.0;
        for c in coeffs.iter().rev() {
            acc = acc * r2 + c;
        }
        acc
    }

    /// (P, P'/r, (P'' - P'/r)/r²) at radius r.
    pub fn higgs(r: f64) -> (f64, f64, f64) {
        if r < SERIES_RADIUS {
            let r2 = r * r;
            return (
                horner(&P_SERIES, r2),
                horner(&PPR_SERIES, r2),
                horner(&P2C_SERIES, r2),
            );
        }
        let u = 2.0 * r;
        let sinh = u.sinh();
        let coth = u.cosh() / sinh;
        let csch2 = 1.0 / (sinh * sinh);
        let hh = coth - 1.0 / u;
        let hh1 = 1.0 / (u * u) - csch2;
        let hh2 = 2.0 * csch2 * coth - 2.0 / (u * u * u);
        let p = hh / r;
        let p1 = (2.0 * hh1 - p) / r;
        let p2 = (4.0 * hh2 - 2.0 * p1) / r;
        (p, p1 / r, (p2 - p1 / r) / (r * r))
    }

    /// (M, M'/r, (M'' - M'/r)/r²) at radius r.
    pub fn connection(r: f64) -> (f64, f64, f64) {
        if r < SERIES_RADIUS {
            let r2 = r * r;
            return (
                horner(&M_SERIES, r2),
                horner(&MPR_SERIES, r2),
                horner(&M2C_SERIES, r2),
            );
        }
        let u = 2.0 * r;
        let sinh = u.sinh();
        let csch = 1.0 / sinh;
        let coth = u.cosh() * csch;
        let kk = 1.0 - u * csch;
        let kk1 = csch * (u * coth - 1.0);
        let kk2 = csch * (2.0 * coth - u * (coth * coth + csch * csch));
        let r2 = r * r;
        let r3 = r2 * r;
        let m = kk / (2.0 * r2);
        let m1 = (kk1 * r - kk) / r3;
        let m2 = 2.0 * kk2 / r2 - 4.0 * kk1 / r3 + 3.0 * kk / (r2 * r2);
        (m, m1 / r, (m2 - m1 / r) / r2)
    }

    /// |Φ|(r) = r·P(r) = coth 2r - 1/(2r).
    pub fn higgs_norm(r: f64) -> f64 {
        r * higgs(r).0
    }
}

/// `|Φ|` of the monopole at radius `r` (equals `coth 2r - 1/(2r)`).
pub fn monopole_higgs_norm(r: f64) -> f64 {
    profile::higgs_norm(r)
}

fn epsilon3(a: usize, i: usize, j: usize) -> f64 {
    match (a, i, j) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

// ---------------------------------------------------------------------------
// Monopole on R^3 and its lift.
// ---------------------------------------------------------------------------

/// A monopole pair `(A, Φ)` on `R^3` with analytic derivatives.
#[derive(Clone)]
pub struct MonopolePair {
    conn: GaugeConnection,
    phi: HiggsField,
}

impl MonopolePair {
    /// Assembles a pair from already-built evaluators; used by tests that
    /// need degenerate configurations. No invariants are checked here.
    pub fn from_parts(conn: GaugeConnection, phi: HiggsField) -> Self {
        MonopolePair { conn, phi }
    }

    pub fn connection(&self) -> &GaugeConnection {
        &self.conn
    }

    /// `Φ` as a `vdim = 1` field.
    pub fn higgs(&self) -> &HiggsField {
        &self.phi
    }

    /// Checks the defining equation and the `|Φ| < 1 → 1` behaviour on the
    /// standard point set.
    pub fn verify(&self) -> Result<(), SolutionError> {
        let mut worst = 0.0f64;
        for x in sampling::standard_points(3) {
            let res = residuals::residual_monopole(self, &x);
            worst = worst.max(res.max_component_norm());
        }
        if worst > CLAIM_TOLERANCE {
            return Err(SolutionError::ClaimViolated {
                label: "ps-monopole".into(),
                equation: "monopole".into(),
                max_residual: worst,
                tol: CLAIM_TOLERANCE,
            });
        }
        for r in [0.1, 1.0, 4.0, 10.0, 40.0] {
            let n = profile::higgs_norm(r);
            if !(0.0..1.0).contains(&n) {
                return Err(SolutionError::MonopoleInvariant(format!(
                    "|Φ|({r}) = {n} is not in [0, 1)"
                )));
            }
        }
        if 1.0 - profile::higgs_norm(25.0) > 0.05 {
            return Err(SolutionError::MonopoleInvariant(
                "|Φ| does not approach 1".into(),
            ));
        }
        Ok(())
    }
}

fn monopole_higgs_field(sign: f64) -> HiggsField {
    let value = move |x: &Point| {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let (p, _, _) = profile::higgs(r);
        HiggsValue::from_components(&[LieVector::new(
            sign * x[0] * p,
            sign * x[1] * p,
            sign * x[2] * p,
        )])
    };
    let partial = move |x: &Point, m: usize| {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let (p, ppr, _) = profile::higgs(r);
        let mut out = LieVector::ZERO;
        for a in 0..3 {
            let delta = if a == m { p } else { 0.0 };
            out.0[a] = sign * (delta + x[a] * x[m] * ppr);
        }
        HiggsValue::from_components(&[out])
    };
    let second = move |x: &Point, m: usize| {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let (_, ppr, p2c) = profile::higgs(r);
        let mut out = LieVector::ZERO;
        for a in 0..3 {
            let delta = if a == m { 2.0 * x[m] * ppr } else { 0.0 };
            out.0[a] = sign * (delta + x[a] * ppr + x[a] * x[m] * x[m] * p2c);
        }
        HiggsValue::from_components(&[out])
    };
    HiggsField::analytic(3, 1, value, partial).with_second(second)
}

fn monopole_connection() -> GaugeConnection {
    let component = |x: &Point, i: usize| {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let (m, _, _) = profile::connection(r);
        let mut out = LieVector::ZERO;
        for a in 0..3 {
            let mut acc = 0.0;
            for j in 0..3 {
                acc += epsilon3(a, i, j) * x[j];
            }
            out.0[a] = acc * m;
        }
        out
    };
    let partial = |x: &Point, k: usize, i: usize| {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let (m, mpr, _) = profile::connection(r);
        let mut out = LieVector::ZERO;
        for a in 0..3 {
            let mut acc = epsilon3(a, i, k) * m;
            for j in 0..3 {
                acc += epsilon3(a, i, j) * x[j] * x[k] * mpr;
            }
            out.0[a] = acc;
        }
        out
    };
    GaugeConnection::analytic(3, component, partial)
}

/// The classical spherically symmetric exact monopole, smoothly extended by
/// series at the origin. Correctness is established by the residual check,
/// not taken from the literature formula.
pub fn ps_monopole() -> MonopolePair {
    // Sign -1 is the hedgehog orientation that solves F = *dΦ under the
    // factor-2 structure constants; +1 solves the equation with Φ → -Φ.
    MonopolePair {
        conn: monopole_connection(),
        phi: monopole_higgs_field(-1.0),
    }
}

// ---------------------------------------------------------------------------
// Solution pairs on R^4.
// ---------------------------------------------------------------------------

/// Which equations a constructed pair claims to satisfy; re-verified at
/// build time on the standard point set.
#[derive(Clone, Debug, Default)]
pub struct SolutionClaims {
    /// Master equation `∇_A†∇_A a + [a_c,[a,a_c]] = 0`.
    pub master: bool,
    /// τ values for which the pair claims the τ-family equations.
    pub kw_tau: Vec<f64>,
    /// `a ∧ a = 0` (all 1-form components commute pointwise).
    pub wedge_zero: bool,
    /// `∇_A a = 0`.
    pub covariantly_constant: bool,
}

/// A pair `(A, a)` on `R^4` with `vdim = 4`, labelled and carrying claims.
#[derive(Clone)]
pub struct SolutionPair {
    label: String,
    conn: GaugeConnection,
    higgs: HiggsField,
    claims: SolutionClaims,
}

impl SolutionPair {
    pub fn new(
        label: impl Into<String>,
        conn: GaugeConnection,
        higgs: HiggsField,
        claims: SolutionClaims,
    ) -> Self {
        SolutionPair { label: label.into(), conn, higgs, claims }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn connection(&self) -> &GaugeConnection {
        &self.conn
    }

    pub fn higgs(&self) -> &HiggsField {
        &self.higgs
    }

    pub fn claims(&self) -> &SolutionClaims {
        &self.claims
    }

    /// Re-verifies every claimed equation at the standard seeded points,
    /// max-norm tolerance [`CLAIM_TOLERANCE`].
    pub fn verify_claims(&self) -> Result<(), SolutionError> {
        let points = sampling::standard_points(4);
        let fail = |equation: &str, max_residual: f64| SolutionError::ClaimViolated {
            label: self.label.clone(),
            equation: equation.into(),
            max_residual,
            tol: CLAIM_TOLERANCE,
        };
        if self.claims.master {
            let mut worst = 0.0f64;
            for x in &points {
                worst = worst.max(residuals::residual_eq11(self, x).norm());
            }
            if worst > CLAIM_TOLERANCE {
                return Err(fail("master", worst));
            }
        }
        for &tau in &self.claims.kw_tau {
            let mut worst = 0.0f64;
            for x in &points {
                let res = residuals::residual_kw(self, tau, x).expect("n = 4 by construction");
                worst = worst.max(res.max_norm());
            }
            if worst > CLAIM_TOLERANCE {
                return Err(fail(&format!("kw(tau={tau})"), worst));
            }
        }
        if self.claims.wedge_zero {
            let mut worst = 0.0f64;
            for x in &points {
                worst = worst.max(self.higgs.value(x).wedge_square());
            }
            if worst > CLAIM_TOLERANCE {
                return Err(fail("wedge-zero", worst));
            }
        }
        if self.claims.covariantly_constant {
            let mut worst = 0.0f64;
            for x in &points {
                for alpha in 0..4 {
                    worst = worst.max(
                        crate::fieldkit::covariant_derivative(&self.higgs, &self.conn, x, alpha)
                            .norm(),
                    );
                }
            }
            if worst > CLAIM_TOLERANCE {
                return Err(fail("covariantly-constant", worst));
            }
        }
        Ok(())
    }
}

fn lift_with_sign(m: &MonopolePair, sign: f64) -> SolutionPair {
    let phi = m.higgs().clone();
    let phi2 = phi.clone();
    let phi3 = phi.clone();
    let value = move |x: &Point| {
        let mut out = HiggsValue::zero(4);
        out.set_component(3, phi.value(x).component(0) * sign);
        out
    };
    let partial = move |x: &Point, alpha: usize| {
        let mut out = HiggsValue::zero(4);
        if alpha < 3 {
            out.set_component(3, phi2.partial(x, alpha).component(0) * sign);
        }
        out
    };
    let second = move |x: &Point, alpha: usize| {
        let mut out = HiggsValue::zero(4);
        if alpha < 3 {
            out.set_component(3, phi3.second_diag(x, alpha).component(0) * sign);
        }
        out
    };
    let conn3 = m.connection().clone();
    let conn3b = m.connection().clone();
    let conn = GaugeConnection::analytic(
        4,
        move |x: &Point, alpha: usize| {
            if alpha < 3 {
                conn3.component(x, alpha)
            } else {
                LieVector::ZERO
            }
        },
        move |x: &Point, beta: usize, alpha: usize| {
            if alpha < 3 && beta < 3 {
                conn3b.partial(x, beta, alpha)
            } else {
                LieVector::ZERO
            }
        },
    );
    let higgs = HiggsField::analytic(4, 4, value, partial).with_second(second);
    SolutionPair::new(
        "ps-lift",
        conn,
        higgs,
        SolutionClaims {
            master: true,
            kw_tau: vec![0.5],
            wedge_zero: true,
            covariantly_constant: false,
        },
    )
}

/// Lifts a monopole pair to `R^4` by pulling back the connection and setting
/// `a = ±Φ dx4`. The sign is searched so that the self-duality system
/// `F_A = *d_A a`, `d_A*a = 0` holds under this crate's Hodge conventions;
/// failure of both signs signals a convention bug.
pub fn lift_to_r4(m: &MonopolePair) -> Result<SolutionPair, SolutionError> {
    let points = sampling::ball_points(3, 20, 4.0, sampling::STANDARD_SEED ^ 0x51f7);
    let mut best = f64::INFINITY;
    for sign in [1.0, -1.0] {
        let candidate = lift_with_sign(m, sign);
        let mut worst = 0.0f64;
        for x in &points {
            let res = residuals::residual_kw(&candidate, 0.5, x).expect("dim 4");
            worst = worst.max(res.max_norm());
        }
        if worst < CLAIM_TOLERANCE {
            return Ok(candidate);
        }
        best = best.min(worst);
    }
    Err(SolutionError::LiftSignSearchFailed { best, tol: CLAIM_TOLERANCE })
}

// ---------------------------------------------------------------------------
// Commuting modes and abelian pairs.
// ---------------------------------------------------------------------------

/// The shape of a commuting (single Lie direction) mode.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CommutingKind {
    /// `a = v ⊗ σ`, constant.
    Constant,
    /// `a = s ⊗ σ` with `s = -x2 dx1 + x1 dx2 - x4 dx3 + x3 dx4`; `ds` is
    /// self-dual and `d*s = 0`. The 1-form is fixed, `v` is ignored.
    LinearSelfDual,
    /// `n = 3` variant: `a = (x1 · v) ⊗ σ`, a degree-1 harmonic component.
    RadialHarmonic,
}

/// Commuting harmonic modes: product connection, all components along one
/// Lie direction, every commutator zero, components harmonic.
pub fn commuting_mode(kind: CommutingKind, v: [f64; 4], sigma: LieVector) -> SolutionPair {
    let sigma = sigma.normalized().expect("sigma must be nonzero");
    let vn = {
        let n = (v.iter().map(|t| t * t).sum::<f64>()).sqrt();
        assert!(n > 0.0, "v must be nonzero");
        [v[0] / n, v[1] / n, v[2] / n, v[3] / n]
    };
    match kind {
        CommutingKind::Constant => {
            let value = move |_: &Point| {
                let mut out = HiggsValue::zero(4);
                for c in 0..4 {
                    out.set_component(c, sigma * vn[c]);
                }
                out
            };
            let higgs = HiggsField::analytic(4, 4, value, |_, _| HiggsValue::zero(4))
                .with_second(|_, _| HiggsValue::zero(4));
            SolutionPair::new(
                "const-mode",
                GaugeConnection::product(4),
                higgs,
                SolutionClaims {
                    master: true,
                    kw_tau: vec![0.0, 0.25, 0.5, 0.75, 1.0],
                    wedge_zero: true,
                    covariantly_constant: true,
                },
            )
        }
        CommutingKind::LinearSelfDual => {
            // s_c coefficients as linear maps of x.
            const S: [(usize, f64); 4] = [(1, -1.0), (0, 1.0), (3, -1.0), (2, 1.0)];
            let value = move |x: &Point| {
                let mut out = HiggsValue::zero(4);
                for c in 0..4 {
                    let (idx, coeff) = S[c];
                    out.set_component(c, sigma * (coeff * x[idx]));
                }
                out
            };
            let partial = move |_: &Point, alpha: usize| {
                let mut out = HiggsValue::zero(4);
                for c in 0..4 {
                    let (idx, coeff) = S[c];
                    if idx == alpha {
                        out.set_component(c, sigma * coeff);
                    }
                }
                out
            };
            let higgs =
                HiggsField::analytic(4, 4, value, partial).with_second(|_, _| HiggsValue::zero(4));
            SolutionPair::new(
                "linear-mode",
                GaugeConnection::product(4),
                higgs,
                SolutionClaims {
                    master: true,
                    kw_tau: vec![0.0],
                    wedge_zero: true,
                    covariantly_constant: false,
                },
            )
        }
        CommutingKind::RadialHarmonic => {
            let value = move |x: &Point| {
                let mut out = HiggsValue::zero(3);
                for c in 0..3 {
                    out.set_component(c, sigma * (vn[c] * x[0]));
                }
                out
            };
            let partial = move |_: &Point, alpha: usize| {
                let mut out = HiggsValue::zero(3);
                if alpha == 0 {
                    for c in 0..3 {
                        out.set_component(c, sigma * vn[c]);
                    }
                }
                out
            };
            let higgs =
                HiggsField::analytic(3, 3, value, partial).with_second(|_, _| HiggsValue::zero(3));
            SolutionPair::new(
                "radial-harmonic",
                GaugeConnection::product(3),
                higgs,
                SolutionClaims {
                    master: true,
                    kw_tau: vec![],
                    wedge_zero: true,
                    covariantly_constant: false,
                },
            )
        }
    }
}

/// Abelian pair: `A = α·σ` for a real 1-form `α` with anti-self-dual `dα`,
/// and covariantly constant `a = c·σ`. Solves the τ = 0 system.
///
/// `alpha(x, mu)` evaluates the form, `dalpha(x, beta, mu) = ∂_beta α_mu`.
pub fn abelian_pair<F, G>(alpha: F, dalpha: G, sigma: LieVector, c: [f64; 4]) -> SolutionPair
where
    F: Fn(&Point, usize) -> f64 + Send + Sync + 'static,
    G: Fn(&Point, usize, usize) -> f64 + Send + Sync + 'static,
{
    let sigma = sigma.normalized().expect("sigma must be nonzero");
    let conn = GaugeConnection::analytic(
        4,
        move |x: &Point, mu: usize| sigma * alpha(x, mu),
        move |x: &Point, beta: usize, mu: usize| sigma * dalpha(x, beta, mu),
    );
    let value = move |_: &Point| {
        let mut out = HiggsValue::zero(4);
        for k in 0..4 {
            out.set_component(k, sigma * c[k]);
        }
        out
    };
    let higgs = HiggsField::analytic(4, 4, value, |_, _| HiggsValue::zero(4))
        .with_second(|_, _| HiggsValue::zero(4));
    SolutionPair::new(
        "abelian",
        conn,
        higgs,
        SolutionClaims {
            master: true,
            kw_tau: vec![0.0],
            wedge_zero: true,
            covariantly_constant: true,
        },
    )
}

/// The registry's abelian pair: `α = -x2 dx1 + x1 dx2 + x4 dx3 - x3 dx4`
/// (anti-self-dual `dα`), `σ = e3`, `c = dx1`.
pub fn abelian_standard() -> SolutionPair {
    const COEFF: [(usize, f64); 4] = [(1, -1.0), (0, 1.0), (3, 1.0), (2, -1.0)];
    abelian_pair(
        |x, mu| {
            let (idx, coeff) = COEFF[mu];
            coeff * x[idx]
        },
        |_, beta, mu| {
            let (idx, coeff) = COEFF[mu];
            if beta == idx {
                coeff
            } else {
                0.0
            }
        },
        LieVector::new(0.0, 0.0, 1.0),
        [1.0, 0.0, 0.0, 0.0],
    )
}

// ---------------------------------------------------------------------------
// τ-family transform.
// ---------------------------------------------------------------------------

/// Coefficients `(p, q)` with `Â = A + p·a`, `â = q·a`, mapping a τ-family
/// solution with `a ∧ a = 0` to the self-duality system (τ = 1/2 form).
///
/// For the mapped pair to satisfy `F_Â = *d_Â â` one needs
/// `q - p = τ/(1-τ)` (self-dual part) and `q + p = (1-τ)/τ`
/// (anti-self-dual part), which forces
///
/// ```text
///   p = (1 - 2τ) / (2τ(1-τ)),    q = (1 - 2τ + 2τ²) / (2τ(1-τ)),
/// ```
///
/// a hyperbolic rotation (`q² - p² = 1`) that degenerates at τ ∈ {0, 1} and
/// is the identity at τ = 1/2.
pub fn tau_coefficients(tau: f64) -> Result<(f64, f64), SolutionError> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(SolutionError::InvalidTau(tau));
    }
    let denom = 2.0 * tau * (1.0 - tau);
    Ok(((1.0 - 2.0 * tau) / denom, (1.0 - 2.0 * tau + 2.0 * tau * tau) / denom))
}

fn combined_pair(
    label: String,
    base: &SolutionPair,
    conn_shift: f64,
    higgs_scale: f64,
    claims: SolutionClaims,
) -> SolutionPair {
    let conn0 = base.connection().clone();
    let conn0b = base.connection().clone();
    let a0 = base.higgs().clone();
    let a0b = base.higgs().clone();
    let a1 = base.higgs().clone();
    let a2 = base.higgs().clone();
    let a3 = base.higgs().clone();
    let conn = GaugeConnection::analytic(
        4,
        move |x: &Point, alpha: usize| {
            conn0.component(x, alpha) + a0.value(x).component(alpha) * conn_shift
        },
        move |x: &Point, beta: usize, alpha: usize| {
            conn0b.partial(x, beta, alpha) + a0b.partial(x, beta).component(alpha) * conn_shift
        },
    );
    let higgs = HiggsField::analytic(
        4,
        4,
        move |x: &Point| a1.value(x) * higgs_scale,
        move |x: &Point, alpha: usize| a2.partial(x, alpha) * higgs_scale,
    )
    .with_second(move |x: &Point, alpha: usize| a3.second_diag(x, alpha) * higgs_scale);
    SolutionPair::new(label, conn, higgs, claims)
}

/// Maps a τ-family solution with commuting `a` to the τ = 1/2 system.
pub fn tau_transform(pair: &SolutionPair, tau: f64) -> Result<SolutionPair, SolutionError> {
    let (p, q) = tau_coefficients(tau)?;
    if !pair.claims().wedge_zero {
        return Err(SolutionError::MissingClaim("wedge-zero (a ∧ a = 0)"));
    }
    if !pair.claims().kw_tau.iter().any(|t| (t - tau).abs() < 1e-12) {
        return Err(SolutionError::MissingClaim("the τ-family equations at this τ"));
    }
    Ok(combined_pair(
        format!("{}+tau{:.3}", pair.label(), tau),
        pair,
        p,
        q,
        SolutionClaims {
            master: true,
            kw_tau: vec![0.5],
            wedge_zero: true,
            covariantly_constant: pair.claims().covariantly_constant,
        },
    ))
}

/// Inverse of [`tau_transform`]: manufactures a τ-family solution from a
/// τ = 1/2 one. Used to build the `tau-quarter` registry entry.
pub fn inverse_tau_transform(
    pair: &SolutionPair,
    tau: f64,
) -> Result<SolutionPair, SolutionError> {
    let (p, q) = tau_coefficients(tau)?;
    if !pair.claims().wedge_zero {
        return Err(SolutionError::MissingClaim("wedge-zero (a ∧ a = 0)"));
    }
    if !pair.claims().kw_tau.iter().any(|t| (t - 0.5).abs() < 1e-12) {
        return Err(SolutionError::MissingClaim("the τ = 1/2 system"));
    }
    // a = â/q, A = Â - p·a.
    Ok(combined_pair(
        if (tau - 0.25).abs() < 1e-12 { "tau-quarter".into() } else { format!("{}-tau{:.3}", pair.label(), tau) },
        pair,
        -p / q,
        1.0 / q,
        SolutionClaims {
            master: true,
            kw_tau: vec![tau],
            wedge_zero: true,
            covariantly_constant: pair.claims().covariantly_constant,
        },
    ))
}

// ---------------------------------------------------------------------------
// Registry.
// ---------------------------------------------------------------------------

/// Labels resolvable by the CLI.
pub const REGISTRY_LABELS: [&str; 5] =
    ["ps-lift", "const-mode", "linear-mode", "abelian", "tau-quarter"];

/// Builds a registry solution and re-verifies its claims.
pub fn build_solution(label: &str) -> Result<SolutionPair, SolutionError> {
    let pair = match label {
        "ps-lift" => lift_to_r4(&ps_monopole())?,
        "const-mode" => commuting_mode(
            CommutingKind::Constant,
            [1.0, 0.0, 0.0, 0.0],
            LieVector::new(0.0, 0.0, 1.0),
        ),
        "linear-mode" => commuting_mode(
            CommutingKind::LinearSelfDual,
            [1.0, 0.0, 0.0, 0.0],
            LieVector::new(0.0, 0.0, 1.0),
        ),
        "abelian" => abelian_standard(),
        "tau-quarter" => {
            let lift = lift_to_r4(&ps_monopole())?;
            inverse_tau_transform(&lift, 0.25)?
        }
        other => return Err(SolutionError::UnknownLabel(other.into())),
    };
    pair.verify_claims()?;
    Ok(pair)
}
