//! Radial profile tables, the flat-radius search, and the identity suite
//! that checks the radial calculus on sampled profiles.

use super::jacobi::jacobi_eigen;
use super::{DiagnosticsError, TMatrix, DEGENERATE_EIGENVALUE_REL, VANISHING_KAPPA_SQ};
use crate::algebra::HiggsValue;
use crate::fieldkit::{gauss_legendre, GaugeConnection, HiggsField, Point, SphereQuadrature};
use crate::solutions::SolutionPair;
use rayon::prelude::*;

/// One sampled radius of a [`RadialProfile`].
#[derive(Clone, Debug)]
pub struct ProfileRow {
    pub r: f64,
    pub kappa: f64,
    pub frequency: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub trace_t: f64,
    /// Shell norm of `a(v)` for the tracked smallest-eigenvalue direction.
    pub kappa_v: f64,
    /// Frequency of `a(v)`; zero when the direction is degenerate.
    pub n_v: f64,
    /// Cross-correlation against the profile's fixed `(u, v)` pair.
    pub p_uv: f64,
    /// Tracked smallest-eigenvalue eigenvector at this radius.
    pub tracked_v: [f64; 4],
    /// `v^T M(r) v = r^{n-2} κ_v² N_v`, the monotone component energy.
    pub component_energy: f64,
    /// Whether the tracked direction fell below the degeneracy cut here.
    pub degenerate: bool,
}

/// Sampled radial diagnostics of a solution pair.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub dim: usize,
    pub vdim: usize,
    pub rows: Vec<ProfileRow>,
    /// Gram matrix at every sampled radius (same order as `rows`).
    pub mats: Vec<TMatrix>,
    /// Fixed cross-correlation pair: largest/smallest eigenvectors of the
    /// Gram matrix at the outermost radius.
    pub fixed_u: [f64; 4],
    pub fixed_v: [f64; 4],
    /// True if any radius had a degenerate smallest direction; mirrors the
    /// recommendation to shrink `V` rather than auto-shrinking it.
    pub degenerate: bool,
}

impl RadialProfile {
    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|row| row.r)
    }
}

/// Accumulates the two shell matrices of a pair at radius `s`:
/// the Gram integrand `<a_a a_b>` and the energy integrand
/// `Σ_α <∇_α a_a, ∇_α a_b> + Σ_c <[a_c, a_a], [a_c, a_b]>`.
fn shell_matrices(
    a: &HiggsField,
    conn: &GaugeConnection,
    s: f64,
    q: &SphereQuadrature,
    want_gram: bool,
    want_energy: bool,
) -> ([[f64; 4]; 4], [[f64; 4]; 4]) {
    let d = a.vdim();
    let n = conn.dim();
    let mut gram = [[0.0f64; 4]; 4];
    let mut energy = [[0.0f64; 4]; 4];
    let mut grad = [HiggsValue::zero(d); 4];
    for (node, w) in q.nodes().iter().zip(q.weights()) {
        let x: Point = [s * node[0], s * node[1], s * node[2], s * node[3]];
        let value = a.value(&x);
        if want_gram {
            for i in 0..d {
                for j in i..d {
                    gram[i][j] += w * value.component(i).inner(&value.component(j));
                }
            }
        }
        if want_energy {
            for (alpha, slot) in grad.iter_mut().enumerate().take(n) {
                *slot = a.partial(&x, alpha)
                    + crate::fieldkit::ad(&conn.component(&x, alpha), &value);
            }
            for i in 0..d {
                for j in i..d {
                    let mut acc = 0.0;
                    for g in grad.iter().take(n) {
                        acc += g.component(i).inner(&g.component(j));
                    }
                    for c in 0..d {
                        acc += value
                            .component(c)
                            .commutator(&value.component(i))
                            .inner(&value.component(c).commutator(&value.component(j)));
                    }
                    energy[i][j] += w * acc;
                }
            }
        }
    }
    for m in [&mut gram, &mut energy] {
        for i in 0..d {
            for j in 0..i {
                m[i][j] = m[j][i];
            }
        }
    }
    (gram, energy)
}

fn quad_form(m: &[[f64; 4]; 4], u: &[f64; 4], v: &[f64; 4], d: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += u[i] * m[i][j] * v[j];
        }
    }
    s
}

/// Builds a geometric-grid profile with all columns filled.
///
/// The frequency numerator `∫_{B_r}` is accumulated cumulatively: each gap
/// between consecutive sample radii is integrated with a `segment_nodes`
/// point Gauss-Legendre rule (composite Gauss-Legendre in radius composed
/// with shell integrals), so the whole profile costs one radial sweep.
pub fn build_profile(
    pair: &SolutionPair,
    r_min: f64,
    r_max: f64,
    samples: usize,
    q: &SphereQuadrature,
    segment_nodes: usize,
) -> Result<RadialProfile, DiagnosticsError> {
    if !(r_min > 0.0 && r_min < r_max && samples >= 2) {
        return Err(DiagnosticsError::InvalidProfileRange);
    }
    let a = pair.higgs();
    let conn = pair.connection();
    let n = conn.dim();
    let d = a.vdim();
    let ratio = r_max / r_min;
    let radii: Vec<f64> = (0..samples)
        .map(|i| r_min * ratio.powf(i as f64 / (samples - 1) as f64))
        .collect();

    // Gram matrices at the sample radii.
    let grams: Vec<[[f64; 4]; 4]> = radii
        .par_iter()
        .map(|&r| shell_matrices(a, conn, r, q, true, false).0)
        .collect();

    let trace_at = |g: &[[f64; 4]; 4]| -> f64 { (0..d).map(|i| g[i][i]).sum() };
    if trace_at(grams.last().unwrap()) <= VANISHING_KAPPA_SQ {
        return Err(DiagnosticsError::VanishingKappa {
            r: r_max,
            kappa_sq: trace_at(grams.last().unwrap()),
        });
    }

    // Cumulative energy matrices M(r_i) = ∫_{B_{r_i}} (…): one segment per
    // sample gap, plus the initial segment [0, r_0].
    let (gl_nodes, gl_weights) = gauss_legendre(segment_nodes);
    let segments: Vec<(f64, f64)> = std::iter::once((0.0, radii[0]))
        .chain(radii.windows(2).map(|w| (w[0], w[1])))
        .collect();
    let segment_integrals: Vec<[[f64; 4]; 4]> = segments
        .par_iter()
        .map(|&(lo, hi)| {
            let mut acc = [[0.0f64; 4]; 4];
            for (t, w) in gl_nodes.iter().zip(&gl_weights) {
                let s = 0.5 * (hi + lo) + 0.5 * (hi - lo) * t;
                let (_, energy) = shell_matrices(a, conn, s, q, false, true);
                let jac = 0.5 * (hi - lo) * w * s.powi(n as i32 - 1);
                for i in 0..d {
                    for j in 0..d {
                        acc[i][j] += jac * energy[i][j];
                    }
                }
            }
            acc
        })
        .collect();
    let mut cumulative: Vec<[[f64; 4]; 4]> = Vec::with_capacity(samples);
    let mut acc = [[0.0f64; 4]; 4];
    for seg in &segment_integrals {
        for i in 0..d {
            for j in 0..d {
                acc[i][j] += seg[i][j];
            }
        }
        cumulative.push(acc);
    }

    // Eigendecompositions and the fixed cross-correlation pair.
    let mats: Vec<TMatrix> = radii
        .iter()
        .zip(&grams)
        .map(|(&r, g)| {
            let (eigenvalues, eigenvectors) = jacobi_eigen(g, d);
            TMatrix { r, vdim: d, entries: *g, eigenvalues, eigenvectors }
        })
        .collect();
    let last = mats.last().unwrap();
    let fixed_u = last.largest_eigenvector();
    let fixed_v = last.smallest_eigenvector();

    // Track the smallest-eigenvalue direction by maximal overlap with the
    // previous radius; ties fall back to the solver's lexicographic sign
    // convention (first candidate wins).
    let mut rows = Vec::with_capacity(samples);
    let mut degenerate_any = false;
    let mut v_prev: Option<[f64; 4]> = None;
    for (i, (&r, t)) in radii.iter().zip(&mats).enumerate() {
        let tracked_v = match v_prev {
            None => t.smallest_eigenvector(),
            Some(prev) => {
                let mut best = t.eigenvectors[0];
                let mut best_overlap = -1.0;
                for k in 0..d {
                    let cand = t.eigenvectors[k];
                    let overlap: f64 = (0..4).map(|m| prev[m] * cand[m]).sum();
                    if overlap.abs() > best_overlap {
                        best_overlap = overlap.abs();
                        best = if overlap < 0.0 {
                            [-cand[0], -cand[1], -cand[2], -cand[3]]
                        } else {
                            cand
                        };
                    }
                }
                best
            }
        };
        v_prev = Some(tracked_v);

        let trace_t = t.trace();
        let kappa_sq = trace_t;
        if kappa_sq <= VANISHING_KAPPA_SQ {
            return Err(DiagnosticsError::VanishingKappa { r, kappa_sq });
        }
        let m = &cumulative[i];
        let trace_m: f64 = (0..d).map(|k| m[k][k]).sum();
        let frequency = trace_m / (r.powi(n as i32 - 2) * kappa_sq);

        let kv_sq = t.quadratic_form(&tracked_v, &tracked_v).max(0.0);
        let component_energy = quad_form(m, &tracked_v, &tracked_v, d);
        let degenerate = kv_sq <= DEGENERATE_EIGENVALUE_REL * trace_t;
        degenerate_any |= degenerate;
        let n_v = if degenerate {
            0.0
        } else {
            component_energy / (r.powi(n as i32 - 2) * kv_sq)
        };

        rows.push(ProfileRow {
            r,
            kappa: kappa_sq.sqrt(),
            frequency,
            lambda_min: t.lambda_min(),
            lambda_max: t.lambda_max(),
            trace_t,
            kappa_v: kv_sq.sqrt(),
            n_v,
            p_uv: t.quadratic_form(&fixed_u, &fixed_v),
            tracked_v,
            component_energy,
            degenerate,
        });
    }

    Ok(RadialProfile {
        dim: n,
        vdim: d,
        rows,
        mats,
        fixed_u,
        fixed_v,
        degenerate: degenerate_any,
    })
}

// ---------------------------------------------------------------------------
// Flat-radius search.
// ---------------------------------------------------------------------------

/// Parameters of the flat-radius search.
#[derive(Clone, Debug)]
pub struct SearchParams {
    /// Growth exponent ε ∈ (0, 1); the lemma behind the search needs
    /// ε < 1/100, larger values are accepted but flagged.
    pub epsilon: f64,
    /// Outer radius ρ > 1 of the search window `[ρ^{1-30√ε}, ρ]`.
    pub rho: f64,
    /// The 30 in the window exponent.
    pub window_factor: f64,
    /// The 8 in the verification sub-window `[ε^{1/(8n)} r, r]`.
    pub subwindow_factor: f64,
    /// Report constant C in `κ >= (1 - C ε^{1/4} |ln ε|) κ(r)`.
    pub report_constant: f64,
    /// Minimum number of profile samples inside the window.
    pub min_samples: usize,
}

impl SearchParams {
    pub fn new(epsilon: f64, rho: f64) -> Result<Self, DiagnosticsError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(DiagnosticsError::InvalidSearchParams(format!(
                "epsilon = {epsilon} must lie in (0, 1)"
            )));
        }
        if !(rho > 1.0) {
            return Err(DiagnosticsError::InvalidSearchParams(format!(
                "rho = {rho} must exceed 1"
            )));
        }
        Ok(SearchParams {
            epsilon,
            rho,
            window_factor: 30.0,
            subwindow_factor: 8.0,
            report_constant: 10.0,
            min_samples: 50,
        })
    }

    /// Whether ε is inside the regime the supporting lemma covers.
    pub fn within_lemma_domain(&self) -> bool {
        self.epsilon < 0.01
    }

    pub fn window(&self) -> (f64, f64) {
        (
            self.rho.powf(1.0 - self.window_factor * self.epsilon.sqrt()),
            self.rho,
        )
    }
}

/// One verified inequality of the flat-radius report.
#[derive(Clone, Debug)]
pub struct FlatCheck {
    pub name: String,
    pub passed: bool,
    pub skipped: bool,
    pub detail: String,
}

/// Result of the flat-radius search: the radius plus the sub-window report.
#[derive(Clone, Debug)]
pub struct FlatRadiusReport {
    pub r_flat: f64,
    pub epsilon: f64,
    pub window: (f64, f64),
    pub subwindow: (f64, f64),
    pub checks: Vec<FlatCheck>,
    pub degenerate_direction: bool,
    pub within_lemma_domain: bool,
}

impl FlatRadiusReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.skipped)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "flat radius r = {:.6} (window [{:.4}, {:.4}], sub-window [{:.4}, {:.4}])\n",
            self.r_flat, self.window.0, self.window.1, self.subwindow.0, self.subwindow.1
        ));
        if !self.within_lemma_domain {
            out.push_str("note: epsilon >= 1/100 is outside the lemma's stated domain; reported as illustration\n");
        }
        if self.degenerate_direction {
            out.push_str(
                "note: smallest Gram eigenvalue is degenerate; component checks skipped. Consider shrinking V by the dead directions.\n",
            );
        }
        for c in &self.checks {
            let status = if c.skipped {
                "SKIP"
            } else if c.passed {
                "PASS"
            } else {
                "FAIL"
            };
            out.push_str(&format!("  [{status}] {}: {}\n", c.name, c.detail));
        }
        out
    }
}

/// Searches the sampled profile for the largest radius in the window with
/// `N(r) <= sqrt(ε)` and verifies the flatness inequalities on the sampled
/// sub-window. Claims hold at the sample resolution.
pub fn find_flat_radius(
    profile: &RadialProfile,
    params: &SearchParams,
) -> Result<FlatRadiusReport, DiagnosticsError> {
    let (lo, hi) = params.window();
    let in_window: Vec<&ProfileRow> = profile
        .rows
        .iter()
        .filter(|row| row.r >= lo * (1.0 - 1e-12) && row.r <= hi * (1.0 + 1e-12))
        .collect();
    if in_window.len() < params.min_samples {
        let covered_lo = profile.rows.first().map(|r| r.r).unwrap_or(0.0);
        let covered_hi = profile.rows.last().map(|r| r.r).unwrap_or(0.0);
        return Err(DiagnosticsError::InsufficientWindow {
            covered_lo,
            covered_hi,
            samples: in_window.len(),
            lo,
            hi,
            required: params.min_samples,
        });
    }

    let threshold = params.epsilon.sqrt();
    let flat = in_window
        .iter()
        .rev()
        .find(|row| row.frequency <= threshold);
    let Some(flat) = flat else {
        let min_n = in_window
            .iter()
            .map(|row| row.frequency)
            .fold(f64::INFINITY, f64::min);
        return Err(DiagnosticsError::FlatRadiusNotFound { lo, hi, threshold, min_n });
    };

    let r_flat = flat.r;
    let n = profile.dim as f64;
    let eps = params.epsilon;
    let sub_lo = eps.powf(1.0 / (params.subwindow_factor * n)) * r_flat;
    let quarter = eps.powf(0.25);
    let kappa_floor = 1.0 - params.report_constant * quarter * eps.ln().abs();
    let sub_rows: Vec<&ProfileRow> = profile
        .rows
        .iter()
        .filter(|row| row.r >= sub_lo * (1.0 - 1e-12) && row.r <= r_flat * (1.0 + 1e-12))
        .collect();

    let mut checks = Vec::new();
    {
        let worst = sub_rows
            .iter()
            .map(|row| row.frequency)
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(FlatCheck {
            name: "N < eps^(1/4) on sub-window".into(),
            passed: worst < quarter,
            skipped: false,
            detail: format!("max N = {worst:.6e} vs {quarter:.6e} over {} samples", sub_rows.len()),
        });
    }
    {
        let floor = kappa_floor * flat.kappa;
        let worst = sub_rows
            .iter()
            .map(|row| row.kappa)
            .fold(f64::INFINITY, f64::min);
        checks.push(FlatCheck {
            name: "kappa >= (1 - C eps^(1/4)|ln eps|) kappa(r)".into(),
            passed: worst >= floor || kappa_floor <= 0.0,
            skipped: false,
            detail: format!("min kappa = {worst:.6e} vs floor {floor:.6e}"),
        });
    }
    let degenerate = sub_rows.iter().any(|row| row.degenerate);
    if degenerate {
        checks.push(FlatCheck {
            name: "component direction checks".into(),
            passed: true,
            skipped: true,
            detail: "smallest eigenvalue degenerate (kappa_v ~ 0); V can be cut down".into(),
        });
    } else {
        let worst_nv = sub_rows
            .iter()
            .map(|row| row.n_v)
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(FlatCheck {
            name: "N_v <= eps^(1/4) on sub-window".into(),
            passed: worst_nv <= quarter,
            skipped: false,
            detail: format!("max N_v = {worst_nv:.6e} vs {quarter:.6e}"),
        });
        let floor = kappa_floor * flat.kappa_v;
        let worst_kv = sub_rows
            .iter()
            .map(|row| row.kappa_v)
            .fold(f64::INFINITY, f64::min);
        checks.push(FlatCheck {
            name: "kappa_v >= (1 - C eps^(1/4)|ln eps|) kappa_v(r)".into(),
            passed: worst_kv >= floor || kappa_floor <= 0.0,
            skipped: false,
            detail: format!("min kappa_v = {worst_kv:.6e} vs floor {floor:.6e}"),
        });
    }

    Ok(FlatRadiusReport {
        r_flat,
        epsilon: eps,
        window: (lo, hi),
        subwindow: (sub_lo, r_flat),
        checks,
        degenerate_direction: degenerate,
        within_lemma_domain: params.within_lemma_domain(),
    })
}

/// Which growth branch a profile exhibits, for the search report.
pub fn branch_summary(pair: &SolutionPair, profile: &RadialProfile) -> String {
    let first = profile.rows.first().unwrap();
    let last = profile.rows.last().unwrap();
    let growth = last.kappa / first.kappa.max(1e-300);
    let exponent = growth.ln() / (last.r / first.r).ln();
    let mut max_wedge = 0.0f64;
    for x in crate::sampling::ball_points(pair.connection().dim(), 50, 5.0, 0xb7a9c4) {
        max_wedge = max_wedge.max(pair.higgs().value(&x).wedge_square());
    }
    if max_wedge < 1e-16 {
        format!(
            "branch: commuting (a∧a = 0 everywhere sampled, max wedge {max_wedge:.1e}); \
             kappa({:.3})/kappa({:.3}) = {growth:.4} stays bounded (growth exponent {exponent:.4})",
            last.r, first.r
        )
    } else {
        format!(
            "branch: non-commuting (max wedge {max_wedge:.3e}); \
             kappa growth exponent over the profile: {exponent:.4}"
        )
    }
}

// ---------------------------------------------------------------------------
// Identity suite.
// ---------------------------------------------------------------------------

/// A single named pass/fail check with a human-readable detail line.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        CheckResult { name: name.into(), passed, detail }
    }
}

/// Runs the radial-identity invariants on a freshly built profile:
/// the logarithmic-derivative identity, its integrated form, the Gram
/// derivative bound, the eigenvalue sandwich, and the monotonicity set.
pub fn identity_suite(
    pair: &SolutionPair,
    q: &SphereQuadrature,
    r_min: f64,
    r_max: f64,
    samples: usize,
) -> Result<Vec<CheckResult>, DiagnosticsError> {
    let profile = build_profile(pair, r_min, r_max, samples, q, 12)?;
    Ok(profile_checks(&profile))
}

/// The checks of [`identity_suite`] on an existing profile.
pub fn profile_checks(profile: &RadialProfile) -> Vec<CheckResult> {
    let rows = &profile.rows;
    let mut checks = Vec::new();

    // d(ln κ)/dr = N/r with 5-point stencils on the sampled (geometric)
    // grid, tolerance 1e-3 (N/r + 1/r).
    {
        let dt = (rows[1].r / rows[0].r).ln();
        let mut worst = 0.0f64;
        let mut worst_r = rows[0].r;
        for i in 2..rows.len().saturating_sub(2) {
            let dlnk_dlnr = (-rows[i + 2].kappa.ln() + 8.0 * rows[i + 1].kappa.ln()
                - 8.0 * rows[i - 1].kappa.ln()
                + rows[i - 2].kappa.ln())
                / (12.0 * dt);
            let lhs = (dlnk_dlnr / rows[i].r - rows[i].frequency / rows[i].r).abs();
            let tol = 1e-3 * (rows[i].frequency / rows[i].r + 1.0 / rows[i].r);
            if lhs / tol > worst {
                worst = lhs / tol;
                worst_r = rows[i].r;
            }
        }
        checks.push(CheckResult::new(
            "frequency-identity",
            worst <= 1.0,
            format!("max |d ln k/dr - N/r| / tol = {worst:.3} at r = {worst_r:.3}"),
        ));
    }

    // Integrated form κ(b)/κ(a) = exp(∫ N/t dt), trapezoid on the grid,
    // over [2, 10] clipped to the profile (or the middle when disjoint).
    {
        let r_lo = rows.first().unwrap().r;
        let r_hi = rows.last().unwrap().r;
        let (a, b) = if r_lo <= 2.0 && r_hi >= 10.0 {
            (2.0, 10.0)
        } else {
            (r_lo * (r_hi / r_lo).powf(0.25), r_lo * (r_hi / r_lo).powf(0.75))
        };
        let idx: Vec<usize> = (0..rows.len())
            .filter(|&i| rows[i].r >= a * 0.999_999 && rows[i].r <= b * 1.000_001)
            .collect();
        let mut integral = 0.0;
        for w in idx.windows(2) {
            let (i, j) = (w[0], w[1]);
            integral += 0.5
                * (rows[i].frequency / rows[i].r + rows[j].frequency / rows[j].r)
                * (rows[j].r - rows[i].r);
        }
        let lhs = rows[*idx.last().unwrap()].kappa / rows[idx[0]].kappa;
        let rhs = integral.exp();
        let rel = (lhs / rhs - 1.0).abs();
        checks.push(CheckResult::new(
            "integrated-growth",
            rel < 5e-3,
            format!(
                "kappa({:.2})/kappa({:.2}) = {lhs:.6} vs exp-integral {rhs:.6} (rel {rel:.2e})",
                rows[*idx.last().unwrap()].r,
                rows[idx[0]].r
            ),
        ));
    }

    // |T(r+h) - T(r)|/h <= C0 (N(r)/r)|T(r)| with C0 = 10 on adjacent pairs.
    {
        let c0 = 10.0;
        let d = profile.vdim;
        let mut worst: f64 = 0.0;
        let mut all_pass = true;
        for w in profile.mats.windows(2) {
            let (t0, t1) = (&w[0], &w[1]);
            let h = t1.r - t0.r;
            let mut diff = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let delta = t1.entries[i][j] - t0.entries[i][j];
                    diff += delta * delta;
                }
            }
            let lhs = diff.sqrt() / h;
            let row0 = rows.iter().find(|row| row.r == t0.r).unwrap();
            let rhs = c0 * (row0.frequency / t0.r) * t0.frobenius();
            if lhs > rhs {
                all_pass = false;
            }
            if rhs > 0.0 {
                worst = worst.max(lhs / rhs);
            }
        }
        checks.push(CheckResult::new(
            "gram-derivative-bound",
            all_pass,
            format!("max |dT|/(C0 (N/r)|T|) = {worst:.3}"),
        ));
    }

    // Eigenvalue sandwich: λ(r+Δ) - λ(r) <= v^T (T(r+Δ) - T(r)) v + 1e-9,
    // v the tracked smallest eigenvector at r.
    {
        let mut all_pass = true;
        let mut worst = f64::NEG_INFINITY;
        for i in 0..rows.len() - 1 {
            let v = rows[i].tracked_v;
            let dl = profile.mats[i + 1].eigenvalues[0] - profile.mats[i].eigenvalues[0];
            let dq = profile.mats[i + 1].quadratic_form(&v, &v)
                - profile.mats[i].quadratic_form(&v, &v);
            let slack = dl - dq;
            worst = worst.max(slack);
            if slack > 1e-9 {
                all_pass = false;
            }
        }
        checks.push(CheckResult::new(
            "eigenvalue-sandwich",
            all_pass,
            format!("max (Δλ - v^T ΔT v) = {worst:.3e} (allowed 1e-9)"),
        ));
    }

    // Monotonicity set.
    {
        let mono = |name: &str, vals: Vec<f64>, rel_slack: f64| {
            let mut pass = true;
            let mut worst = 0.0f64;
            for w in vals.windows(2) {
                let drop = w[0] - w[1];
                let scale = w[0].abs().max(w[1].abs()).max(1e-300);
                if drop > rel_slack * scale {
                    pass = false;
                }
                worst = worst.max(drop / scale);
            }
            CheckResult::new(
                name,
                pass,
                format!("max relative decrease {worst:.3e} (allowed {rel_slack:.1e})"),
            )
        };
        checks.push(mono(
            "kappa-nondecreasing",
            rows.iter().map(|row| row.kappa).collect(),
            1e-9,
        ));
        checks.push(mono(
            "lambda-min-nondecreasing",
            rows.iter().map(|row| row.lambda_min).collect(),
            1e-9,
        ));
        let min_n = rows.iter().map(|row| row.frequency).fold(f64::INFINITY, f64::min);
        checks.push(CheckResult::new(
            "frequency-nonnegative",
            min_n >= -1e-12,
            format!("min N = {min_n:.3e}"),
        ));
        checks.push(mono(
            "component-energy-nondecreasing",
            rows.iter().map(|row| row.component_energy).collect(),
            1e-12,
        ));
    }

    checks
}

/// Pointwise-bound suite at radius `r`: the sup bounds on `|a(v)|` and `|a|`
/// by shell norms, and the local-average inequalities, using the report
/// constant 10 in place of the unknown existential constant.
pub fn pointwise_bound_suite(
    pair: &SolutionPair,
    q: &SphereQuadrature,
    r: f64,
) -> Vec<CheckResult> {
    use super::{
        frequency, frequency_v, kappa, kappa_v, local_average, local_average_bound_constant,
        t_matrix,
    };
    let n = pair.connection().dim();
    let omega = crate::fieldkit::surface_measure(n);
    let a = pair.higgs();
    let conn = pair.connection();
    let mut checks = Vec::new();

    // Probe along the dominant (largest-eigenvalue) direction, which is
    // never degenerate for a nonzero field.
    let t = t_matrix(a, r, q);
    let v = t.largest_eigenvector();
    let kv = kappa_v(a, &v, r, q);
    let nv = frequency_v(a, conn, &v, r, q, 32).unwrap_or(0.0);
    let kap = kappa(a, r, q);
    let nn = frequency(a, conn, r, q, 32).unwrap_or(0.0);

    let pts = crate::sampling::ball_points(n, 500, 7.0 * r / 8.0, 0xb0a7d5);
    let (mut sup_av, mut sup_a) = (0.0f64, 0.0f64);
    for x in &pts {
        let value = a.value(x);
        sup_av = sup_av.max(value.contract(&v[..a.vdim()]).norm());
        sup_a = sup_a.max(value.norm());
    }

    let c = 10.0;
    checks.push(CheckResult::new(
        "sup|a(v)| <= 10 kappa_v(r)",
        sup_av <= c * kv,
        format!("sup {sup_av:.4} vs {:.4}", c * kv),
    ));
    checks.push(CheckResult::new(
        "sup|a(v)| <= (1 + 10 sqrt(N_v)) kappa_v / sqrt(omega)",
        sup_av <= (1.0 + c * nv.max(0.0).sqrt()) * kv / omega.sqrt(),
        format!(
            "sup {sup_av:.4} vs {:.4}",
            (1.0 + c * nv.max(0.0).sqrt()) * kv / omega.sqrt()
        ),
    ));
    checks.push(CheckResult::new(
        "sup|a| <= 10 kappa(r)",
        sup_a <= c * kap,
        format!("sup {sup_a:.4} vs {:.4}", c * kap),
    ));
    checks.push(CheckResult::new(
        "sup|a| <= (1 + 10 sqrt(N)) kappa / sqrt(omega)",
        sup_a <= (1.0 + c * nn.max(0.0).sqrt()) * kap / omega.sqrt(),
        format!(
            "sup {sup_a:.4} vs {:.4}",
            (1.0 + c * nn.max(0.0).sqrt()) * kap / omega.sqrt()
        ),
    ));

    // Local-average bounds: the lower bound at sampled points, the shell
    // upper bound at the origin with s = r/8.
    let s = r / 8.0;
    let m0 = local_average(a, &v, &[0.0; 4], s, q, 16);
    checks.push(CheckResult::new(
        "M_v(0, r/8) <= kappa_v(r)/sqrt(n)",
        m0 <= kv / (n as f64).sqrt() + 1e-12,
        format!("M_v = {m0:.4} vs {:.4}", kv / (n as f64).sqrt()),
    ));
    let bound = local_average_bound_constant(n);
    let mut pass = true;
    let mut worst = 0.0f64;
    for x in pts.iter().take(10) {
        let m = local_average(a, &v, x, s, q, 12);
        let floor = bound * a.value(x).contract(&v[..a.vdim()]).norm();
        if m < floor - 1e-10 {
            pass = false;
        }
        worst = worst.max(floor - m);
    }
    checks.push(CheckResult::new(
        "M_v(p, s) >= sqrt(omega/n)|a(v)|(p)",
        pass,
        format!("max violation {worst:.3e}"),
    ));

    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldkit::sphere_quadrature;
    use crate::solutions::build_solution;

    #[test]
    fn profile_grid_and_columns_on_constant_mode() {
        let pair = build_solution("const-mode").unwrap();
        let q = sphere_quadrature(4, 6).unwrap();
        let profile = build_profile(&pair, 0.5, 50.0, 60, &q, 8).unwrap();
        assert_eq!(profile.rows.len(), 60);
        // κ = sqrt(2π²) at every radius; N = 0; λ_min = 0 (rank one).
        for row in &profile.rows {
            assert!((row.kappa - (2.0 * std::f64::consts::PI.powi(2)).sqrt()).abs() < 1e-9);
            assert!(row.frequency.abs() < 1e-14);
            assert!(row.lambda_min.abs() < 1e-12);
            assert!((row.trace_t - row.kappa * row.kappa).abs() < 1e-9);
        }
        assert!(profile.degenerate);
    }

    #[test]
    fn profile_rejects_zero_field_and_bad_ranges() {
        let zero = crate::solutions::SolutionPair::new(
            "zero",
            crate::fieldkit::GaugeConnection::product(4),
            crate::fieldkit::HiggsField::numeric(4, 4, |_| crate::algebra::HiggsValue::zero(4)),
            Default::default(),
        );
        let q = sphere_quadrature(4, 6).unwrap();
        assert!(matches!(
            build_profile(&zero, 0.5, 10.0, 10, &q, 8),
            Err(DiagnosticsError::VanishingKappa { .. })
        ));
        let pair = build_solution("const-mode").unwrap();
        assert!(matches!(
            build_profile(&pair, 5.0, 1.0, 10, &q, 8),
            Err(DiagnosticsError::InvalidProfileRange)
        ));
    }

    #[test]
    fn linear_mode_profile_has_unit_frequency_and_growing_lambda() {
        let pair = build_solution("linear-mode").unwrap();
        let q = sphere_quadrature(4, 8).unwrap();
        let profile = build_profile(&pair, 0.5, 20.0, 40, &q, 10).unwrap();
        for row in &profile.rows {
            assert!((row.frequency - 1.0).abs() < 1e-10, "N({}) = {}", row.r, row.frequency);
            // T = (r²/4) I: λ_min = λ_max = r²/4, never degenerate.
            assert!((row.lambda_min - row.r * row.r / 4.0).abs() < 1e-9 * row.r * row.r);
            assert!(!row.degenerate);
            assert!((row.n_v - 1.0).abs() < 1e-10);
        }
        assert!(!profile.degenerate);
        let checks = profile_checks(&profile);
        for c in &checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn flat_radius_on_constant_mode_succeeds() {
        let pair = build_solution("const-mode").unwrap();
        let q = sphere_quadrature(4, 6).unwrap();
        let profile = build_profile(&pair, 0.5, 50.0, 100, &q, 8).unwrap();
        for eps in [1e-4, 1e-3, 9e-3] {
            let params = SearchParams::new(eps, 50.0).unwrap();
            let report = find_flat_radius(&profile, &params).unwrap();
            assert!(report.all_passed(), "eps = {eps}: {}", report.render());
            // N ≡ 0: the largest windowed radius is returned.
            assert!((report.r_flat - 50.0).abs() < 1e-9);
        }
    }

    #[test]
    fn flat_radius_not_found_on_linear_mode() {
        let pair = build_solution("linear-mode").unwrap();
        let q = sphere_quadrature(4, 6).unwrap();
        let profile = build_profile(&pair, 0.5, 50.0, 120, &q, 8).unwrap();
        let params = SearchParams::new(0.01, 50.0).unwrap();
        match find_flat_radius(&profile, &params) {
            Err(DiagnosticsError::FlatRadiusNotFound { threshold, min_n, .. }) => {
                assert!((threshold - 0.1).abs() < 1e-12);
                assert!((min_n - 1.0).abs() < 1e-6);
            }
            other => panic!("expected not-found, got {other:?}"),
        }
    }

    #[test]
    fn flat_radius_on_synthetic_profile() {
        // N = 0.05 on [1, 10], N = 1 beyond; eps = 0.04 picks r = 10.
        let radii: Vec<f64> = (0..200)
            .map(|i| 1.0 * (100.0f64).powf(i as f64 / 199.0))
            .collect();
        let rows: Vec<ProfileRow> = radii
            .iter()
            .map(|&r| {
                let n = if r <= 10.0 { 0.05 } else { 1.0 };
                ProfileRow {
                    r,
                    kappa: 1.0,
                    frequency: n,
                    lambda_min: 0.1,
                    lambda_max: 1.0,
                    trace_t: 1.0,
                    kappa_v: 0.3,
                    n_v: n,
                    p_uv: 0.0,
                    tracked_v: [1.0, 0.0, 0.0, 0.0],
                    component_energy: 0.0,
                    degenerate: false,
                }
            })
            .collect();
        let mats = rows
            .iter()
            .map(|row| TMatrix {
                r: row.r,
                vdim: 4,
                entries: [[0.0; 4]; 4],
                eigenvalues: [0.1, 0.2, 0.5, 1.0],
                eigenvectors: [[1.0, 0.0, 0.0, 0.0]; 4],
            })
            .collect();
        let profile = RadialProfile {
            dim: 4,
            vdim: 4,
            rows,
            mats,
            fixed_u: [1.0, 0.0, 0.0, 0.0],
            fixed_v: [0.0, 1.0, 0.0, 0.0],
            degenerate: false,
        };
        let params = SearchParams::new(0.04, 100.0).unwrap();
        let report = find_flat_radius(&profile, &params).unwrap();
        // sqrt(0.04) = 0.2: the last radius with N <= 0.2 is 10.
        assert!(
            (report.r_flat - 10.0).abs() / 10.0 < 0.03,
            "r_flat = {}",
            report.r_flat
        );
        assert!(!report.within_lemma_domain);
    }

    #[test]
    fn search_params_validation() {
        assert!(SearchParams::new(0.0, 10.0).is_err());
        assert!(SearchParams::new(1.0, 10.0).is_err());
        assert!(SearchParams::new(0.005, 0.5).is_err());
        assert!(SearchParams::new(0.005, 10.0).unwrap().within_lemma_domain());
        assert!(!SearchParams::new(0.04, 10.0).unwrap().within_lemma_domain());
    }
}
