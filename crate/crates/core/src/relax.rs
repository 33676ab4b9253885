//! Lattice gradient-flow solver for the master equation: the connection is
//! held fixed, the section `a` descends the energy
//! `∫ |∇_A a|² + 1/2 Σ_{b,c} |[a_b, a_c]|²` on a Dirichlet box whose
//! boundary data come from an analytic seed.
//!
//! Covariant derivatives use 4th-order central stencils, so the frozen
//! boundary layer is two nodes deep and the discrete equation is consistent
//! to `O(h⁴)`. The box problem is this module's own well-posed surrogate;
//! the continuum problem has no boundary-value formulation.

use crate::algebra::{HiggsValue, LieVector};
use crate::fieldkit::Point;
use crate::solutions::SolutionPair;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::{Read, Write};
use thiserror::Error;

/// Stencil coefficients of the 4th-order first derivative over offsets
/// -2..=2 (divide by 12h).
const STENCIL: [(isize, f64); 4] = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];

/// Frozen boundary depth required by the stencil.
pub const BOUNDARY_DEPTH: usize = 2;

#[derive(Debug, Error)]
pub enum RelaxError {
    #[error("gradient flow did not converge in {iterations} iterations (last max gradient norm {last_grad_norm:.3e}, tol {tol:.3e})")]
    NonConvergence {
        iterations: usize,
        last_grad_norm: f64,
        tol: f64,
        trace: FlowTrace,
    },
    #[error("step size collapsed below 1e-18 while enforcing energy descent at iteration {0}")]
    StepUnderflow(usize),
    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint format: {0}")]
    Format(String),
    #[error("lattice too small: need at least {min} nodes per axis, got {got}")]
    LatticeTooSmall { min: usize, got: usize },
}

/// Energy/gradient history of a flow run.
#[derive(Clone, Debug, Default)]
pub struct FlowTrace {
    pub energies: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub accepted_steps: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Finite Cartesian grid of section values with a frozen boundary layer and
/// a fixed connection sampled at the nodes.
#[derive(Clone)]
pub struct LatticeState {
    dim: usize,
    shape: [usize; 4],
    spacing: f64,
    origin: [f64; 4],
    vdim: usize,
    values: Vec<HiggsValue>,
    conn: Vec<[LieVector; 4]>,
}

impl LatticeState {
    /// Samples a solution pair on a centered cube with `nodes` per axis and
    /// half-width `half_width` (so the box sits inside the ball of radius
    /// `half_width · sqrt(n)/... <= 2 half_width` for n = 4).
    pub fn from_solution(
        pair: &SolutionPair,
        nodes: usize,
        half_width: f64,
    ) -> Result<Self, RelaxError> {
        let min = 2 * BOUNDARY_DEPTH + 1;
        if nodes < min {
            return Err(RelaxError::LatticeTooSmall { min, got: nodes });
        }
        let dim = pair.connection().dim();
        let vdim = pair.higgs().vdim();
        let spacing = 2.0 * half_width / (nodes - 1) as f64;
        let mut shape = [1usize; 4];
        shape[..dim].fill(nodes);
        let mut origin = [0.0f64; 4];
        origin[..dim].fill(-half_width);
        let total: usize = shape.iter().product();
        let mut state = LatticeState {
            dim,
            shape,
            spacing,
            origin,
            vdim,
            values: Vec::with_capacity(total),
            conn: Vec::with_capacity(total),
        };
        for idx in 0..total {
            let x = state.coords(idx);
            state.values.push(pair.higgs().value(&x));
            let mut a = [LieVector::ZERO; 4];
            for (alpha, slot) in a.iter_mut().enumerate().take(dim) {
                *slot = pair.connection().component(&x, alpha);
            }
            state.conn.push(a);
        }
        Ok(state)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vdim(&self) -> usize {
        self.vdim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.dim]
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[HiggsValue] {
        &self.values
    }

    fn strides(&self) -> [usize; 4] {
        let mut s = [1usize; 4];
        for i in (0..3).rev() {
            s[i] = s[i + 1] * self.shape[i + 1];
        }
        s
    }

    fn coords(&self, idx: usize) -> Point {
        let strides = self.strides();
        let mut x = [0.0f64; 4];
        let mut rest = idx;
        for i in 0..4 {
            let node = rest / strides[i];
            rest %= strides[i];
            x[i] = self.origin[i] + node as f64 * self.spacing;
        }
        x
    }

    fn multi_index(&self, idx: usize) -> [usize; 4] {
        let strides = self.strides();
        let mut out = [0usize; 4];
        let mut rest = idx;
        for i in 0..4 {
            out[i] = rest / strides[i];
            rest %= strides[i];
        }
        out
    }

    /// Interior nodes are at least [`BOUNDARY_DEPTH`] from every face.
    pub fn is_interior(&self, idx: usize) -> bool {
        let mi = self.multi_index(idx);
        (0..self.dim)
            .all(|i| mi[i] >= BOUNDARY_DEPTH && mi[i] + BOUNDARY_DEPTH < self.shape[i])
    }

    /// Covariant stencil derivative `D_alpha a` at an interior node.
    fn covariant_stencil(&self, idx: usize, alpha: usize) -> HiggsValue {
        let stride = self.strides()[alpha];
        let mut acc = HiggsValue::zero(self.vdim);
        for (off, c) in STENCIL {
            let j = (idx as isize + off * stride as isize) as usize;
            acc += self.values[j] * c;
        }
        acc = acc * (1.0 / (12.0 * self.spacing));
        acc + crate::fieldkit::ad(&self.conn[idx][alpha], &self.values[idx])
    }

    /// Discrete energy
    /// `h^n Σ_interior (Σ_alpha |D_alpha a|² + 1/2 Σ_{b,c} |[a_b, a_c]|²)`.
    pub fn energy(&self) -> f64 {
        let hn = self.spacing.powi(self.dim as i32);
        let total: f64 = (0..self.values.len())
            .into_par_iter()
            .map(|idx| {
                if !self.is_interior(idx) {
                    return 0.0;
                }
                let mut density = 0.0;
                for alpha in 0..self.dim {
                    density += self.covariant_stencil(idx, alpha).norm_sq();
                }
                density + self.values[idx].wedge_square()
            })
            .sum();
        hn * total
    }

    /// Exact gradient of [`Self::energy`] under the `h^n`-weighted inner
    /// product: `2 (∇_A†∇_A a + [a_c,[a, a_c]])` in discrete form, zero on
    /// the boundary layer.
    pub fn gradient(&self) -> Vec<HiggsValue> {
        let strides = self.strides();
        let n_nodes = self.values.len();
        // Pass 1: stencil derivatives on the interior.
        let deriv: Vec<[HiggsValue; 4]> = (0..n_nodes)
            .into_par_iter()
            .map(|idx| {
                let mut d = [HiggsValue::zero(self.vdim); 4];
                if self.is_interior(idx) {
                    for (alpha, slot) in d.iter_mut().enumerate().take(self.dim) {
                        *slot = self.covariant_stencil(idx, alpha);
                    }
                }
                d
            })
            .collect();
        // Pass 2: adjoint accumulation.
        (0..n_nodes)
            .into_par_iter()
            .map(|idx| {
                let mut g = HiggsValue::zero(self.vdim);
                // Boundary values are frozen: their gradient slots stay zero
                // even though interior energy terms depend on them.
                if !self.is_interior(idx) {
                    return g;
                }
                for alpha in 0..self.dim {
                    let stride = strides[alpha] as isize;
                    for (off, c) in STENCIL {
                        let j = idx as isize - off * stride;
                        let j = j as usize;
                        // d is zero outside the interior, so no bounds issue
                        // beyond the frozen layer.
                        g += deriv[j][alpha] * (2.0 * c / (12.0 * self.spacing));
                    }
                    g += crate::fieldkit::ad(&self.conn[idx][alpha], &deriv[idx][alpha]) * -2.0;
                }
                let v = &self.values[idx];
                g += v.double_bracket(v) * 2.0;
                g
            })
            .collect()
    }

    fn max_norm(grad: &[HiggsValue]) -> f64 {
        grad.iter().map(|g| g.norm()).fold(0.0, f64::max)
    }

    /// Adds a smooth interior perturbation of relative amplitude
    /// `amplitude` (relative to the field's sup norm), vanishing at the box
    /// faces. Deterministic in `seed`.
    pub fn perturb_interior(&mut self, amplitude: f64, seed: u64) {
        let sup = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut direction = HiggsValue::zero(self.vdim);
        let mut second = HiggsValue::zero(self.vdim);
        for c in 0..self.vdim {
            direction.set_component(
                c,
                LieVector::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ),
            );
            second.set_component(
                c,
                LieVector::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ),
            );
        }
        let dn = direction.norm().max(1e-300);
        let sn = second.norm().max(1e-300);
        direction = direction * (1.0 / dn);
        second = second * (1.0 / sn);
        let len = self.spacing * (self.shape[0] - 1) as f64;
        for idx in 0..self.values.len() {
            if !self.is_interior(idx) {
                continue;
            }
            let x = self.coords(idx);
            let mut window = 1.0;
            for i in 0..self.dim {
                window *= (std::f64::consts::PI * (x[i] - self.origin[i]) / len).sin();
            }
            let modulation =
                (2.0 * std::f64::consts::PI * (x[0] - self.origin[0]) / len).cos();
            let bump = direction * window + second * (0.5 * window * modulation);
            self.values[idx] += bump * (amplitude * sup);
        }
    }

    /// Root-mean-square node distance to a pair sampled on the same grid.
    pub fn rms_distance_to(&self, pair: &SolutionPair) -> f64 {
        let mut total = 0.0;
        for idx in 0..self.values.len() {
            let x = self.coords(idx);
            total += (self.values[idx] - pair.higgs().value(&x)).norm_sq();
        }
        (total / self.values.len() as f64).sqrt()
    }

    /// Overwrites interior node values (used when loading checkpoints).
    pub fn set_values(&mut self, values: Vec<HiggsValue>) {
        assert_eq!(values.len(), self.values.len());
        self.values = values;
    }
}

/// Gradient descent with Barzilai-Borwein steps and halving on energy
/// increase; the recorded energy trace is non-increasing at accepted steps.
pub fn flow(
    state: &mut LatticeState,
    tol: f64,
    max_iters: usize,
) -> Result<FlowTrace, RelaxError> {
    assert!(tol > 0.0);
    let mut trace = FlowTrace::default();
    let mut energy = state.energy();
    let mut grad = state.gradient();
    let mut gmax = LatticeState::max_norm(&grad);
    trace.energies.push(energy);
    trace.grad_norms.push(gmax);

    let mut prev: Option<(Vec<HiggsValue>, Vec<HiggsValue>)> = None; // (Δa, old grad)
    let fallback = state.spacing * state.spacing / 16.0;

    for iter in 0..max_iters {
        if gmax < tol {
            trace.converged = true;
            trace.iterations = iter;
            return Ok(trace);
        }
        // Barzilai-Borwein second step size <Δa, Δg> / <Δg, Δg>.
        let mut step = match &prev {
            None => fallback,
            Some((da, g_old)) => {
                let mut num = 0.0;
                let mut den = 0.0;
                for i in 0..grad.len() {
                    let dg = grad[i] - g_old[i];
                    num += da[i].inner(&dg);
                    den += dg.norm_sq();
                }
                if num > 0.0 && den > 0.0 {
                    (num / den).clamp(1e-12, 1e3)
                } else {
                    fallback
                }
            }
        };

        // Enforce descent by halving.
        let old_values = state.values.clone();
        let mut new_energy;
        loop {
            for i in 0..state.values.len() {
                state.values[i] = old_values[i] + grad[i] * (-step);
            }
            new_energy = state.energy();
            if new_energy <= energy {
                break;
            }
            step *= 0.5;
            if step < 1e-18 {
                return Err(RelaxError::StepUnderflow(iter));
            }
        }

        let da: Vec<HiggsValue> = (0..grad.len())
            .map(|i| state.values[i] - old_values[i])
            .collect();
        let new_grad = state.gradient();
        prev = Some((da, grad));
        grad = new_grad;
        energy = new_energy;
        gmax = LatticeState::max_norm(&grad);
        trace.energies.push(energy);
        trace.grad_norms.push(gmax);
        trace.accepted_steps.push(step);
    }

    trace.iterations = max_iters;
    if gmax < tol {
        trace.converged = true;
        return Ok(trace);
    }
    Err(RelaxError::NonConvergence {
        iterations: max_iters,
        last_grad_norm: gmax,
        tol,
        trace,
    })
}

// ---------------------------------------------------------------------------
// Checkpoint format: header (dims, spacing, vdim) then node coefficients.
//
//   u64 LE              n (number of axes)
//   u64 LE × n          extent per axis
//   f64 LE              spacing
//   u64 LE              vdim
//   f64 LE × (nodes · vdim · 3)
//                       coefficients, nodes in row-major order (first axis
//                       slowest), per node components c = 0..vdim, per
//                       component the 3 Lie coefficients
//
// The box is centered at the origin; the connection is re-sampled from the
// solution label when a checkpoint is loaded.
// ---------------------------------------------------------------------------

pub fn write_checkpoint<W: Write>(state: &LatticeState, mut w: W) -> Result<(), RelaxError> {
    w.write_all(&(state.dim as u64).to_le_bytes())?;
    for i in 0..state.dim {
        w.write_all(&(state.shape[i] as u64).to_le_bytes())?;
    }
    w.write_all(&state.spacing.to_le_bytes())?;
    w.write_all(&(state.vdim as u64).to_le_bytes())?;
    for v in &state.values {
        for c in 0..state.vdim {
            for k in 0..3 {
                w.write_all(&v.component(c).0[k].to_le_bytes())?;
            }
        }
    }
    Ok(())
}

/// Raw contents of a checkpoint file.
pub struct Checkpoint {
    pub dim: usize,
    pub shape: Vec<usize>,
    pub spacing: f64,
    pub vdim: usize,
    pub values: Vec<HiggsValue>,
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Checkpoint, RelaxError> {
    let mut u64buf = [0u8; 8];
    let mut read_u64 = |r: &mut R| -> Result<u64, RelaxError> {
        r.read_exact(&mut u64buf)?;
        Ok(u64::from_le_bytes(u64buf))
    };
    let dim = read_u64(&mut r)? as usize;
    if !(3..=4).contains(&dim) {
        return Err(RelaxError::Format(format!("unsupported dimension {dim}")));
    }
    let mut shape = Vec::with_capacity(dim);
    for _ in 0..dim {
        shape.push(read_u64(&mut r)? as usize);
    }
    let mut f64buf = [0u8; 8];
    r.read_exact(&mut f64buf)?;
    let spacing = f64::from_le_bytes(f64buf);
    let vdim = read_u64(&mut r)? as usize;
    if !(1..=crate::algebra::MAX_VDIM).contains(&vdim) {
        return Err(RelaxError::Format(format!("unsupported vdim {vdim}")));
    }
    let nodes: usize = shape.iter().product();
    let mut values = Vec::with_capacity(nodes);
    for _ in 0..nodes {
        let mut v = HiggsValue::zero(vdim);
        for c in 0..vdim {
            let mut lie = LieVector::ZERO;
            for k in 0..3 {
                r.read_exact(&mut f64buf)?;
                lie.0[k] = f64::from_le_bytes(f64buf);
            }
            v.set_component(c, lie);
        }
        values.push(v);
    }
    Ok(Checkpoint { dim, shape, spacing, vdim, values })
}

/// Rebuilds a lattice from a checkpoint, re-sampling the connection and
/// boundary geometry from the given pair.
pub fn state_from_checkpoint(
    cp: &Checkpoint,
    pair: &SolutionPair,
) -> Result<LatticeState, RelaxError> {
    let nodes = cp.shape[0];
    if cp.shape.iter().any(|&s| s != nodes) {
        return Err(RelaxError::Format("non-cubic checkpoints unsupported".into()));
    }
    let half_width = cp.spacing * (nodes - 1) as f64 / 2.0;
    let mut state = LatticeState::from_solution(pair, nodes, half_width)?;
    if state.dim != cp.dim || state.vdim != cp.vdim {
        return Err(RelaxError::Format(
            "checkpoint dimensions do not match the solution".into(),
        ));
    }
    state.set_values(cp.values.clone());
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldkit::{GaugeConnection, HiggsField};
    use crate::solutions::{build_solution, SolutionClaims, SolutionPair};

    fn zero_pair() -> SolutionPair {
        SolutionPair::new(
            "zero",
            GaugeConnection::product(4),
            HiggsField::analytic(4, 4, |_| HiggsValue::zero(4), |_, _| HiggsValue::zero(4))
                .with_second(|_, _| HiggsValue::zero(4)),
            SolutionClaims::default(),
        )
    }

    fn linear_pair() -> SolutionPair {
        // a = x1 e1 ⊗ e1, flat connection.
        SolutionPair::new(
            "linear",
            GaugeConnection::product(4),
            HiggsField::analytic(
                4,
                4,
                |x: &Point| HiggsValue::along(4, 0, LieVector::new(1.0, 0.0, 0.0), x[0]),
                |_, alpha| {
                    if alpha == 0 {
                        HiggsValue::along(4, 0, LieVector::new(1.0, 0.0, 0.0), 1.0)
                    } else {
                        HiggsValue::zero(4)
                    }
                },
            )
            .with_second(|_, _| HiggsValue::zero(4)),
            SolutionClaims::default(),
        )
    }

    fn constant_commutator_pair() -> SolutionPair {
        // a1 = (1,0,0), a2 = (0,1,0) constants: pure commutator energy.
        SolutionPair::new(
            "cc",
            GaugeConnection::product(4),
            HiggsField::analytic(
                4,
                4,
                |_| {
                    let mut v = HiggsValue::zero(4);
                    v.set_component(0, LieVector::new(1.0, 0.0, 0.0));
                    v.set_component(1, LieVector::new(0.0, 1.0, 0.0));
                    v
                },
                |_, _| HiggsValue::zero(4),
            )
            .with_second(|_, _| HiggsValue::zero(4)),
            SolutionClaims::default(),
        )
    }

    fn interior_count(state: &LatticeState) -> usize {
        (0..state.node_count())
            .filter(|&i| state.is_interior(i))
            .count()
    }

    #[test]
    fn energy_examples() {
        let zero = LatticeState::from_solution(&zero_pair(), 8, 1.0).unwrap();
        assert_eq!(zero.energy(), 0.0);

        // Linear field: |D a|² = 1 exactly (the stencil is exact on linear
        // fields), so E = h^4 · #interior.
        let lin = LatticeState::from_solution(&linear_pair(), 9, 1.0).unwrap();
        let expect = lin.spacing().powi(4) * interior_count(&lin) as f64;
        assert!((lin.energy() - expect).abs() < 1e-12 * expect.max(1.0));

        // Constant commuting pair: density 1/2 Σ|[a_b,a_c]|² = 4 per node.
        let cc = LatticeState::from_solution(&constant_commutator_pair(), 9, 0.5).unwrap();
        let expect = 4.0 * cc.spacing().powi(4) * interior_count(&cc) as f64;
        assert!((cc.energy() - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn gradient_of_zero_field_is_zero() {
        let zero = LatticeState::from_solution(&zero_pair(), 8, 1.0).unwrap();
        let g = zero.gradient();
        assert!(g.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn gradient_matches_directional_energy_derivative() {
        let pair = build_solution("ps-lift").unwrap();
        let mut state = LatticeState::from_solution(&pair, 9, 1.0).unwrap();
        state.perturb_interior(0.05, 3);
        let grad = state.gradient();
        // Random interior perturbation direction.
        let mut delta = vec![HiggsValue::zero(state.vdim()); state.node_count()];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (i, d) in delta.iter_mut().enumerate() {
            if state.is_interior(i) {
                for c in 0..state.vdim() {
                    d.set_component(
                        c,
                        LieVector::new(
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-1.0..1.0),
                        ),
                    );
                }
            }
        }
        let t = 1e-5;
        let hn = state.spacing().powi(4);
        let mut plus = state.clone();
        let mut minus = state.clone();
        for i in 0..delta.len() {
            plus.values[i] += delta[i] * t;
            minus.values[i] += delta[i] * (-t);
        }
        let fd = (plus.energy() - minus.energy()) / (2.0 * t);
        let inner: f64 = (0..delta.len())
            .map(|i| grad[i].inner(&delta[i]))
            .sum::<f64>()
            * hn;
        assert!(
            ((fd - inner) / fd.abs().max(1e-300)).abs() < 1e-6,
            "directional derivative {fd} vs <g, δ> {inner}"
        );
    }

    #[test]
    fn gradient_consistency_is_fourth_order() {
        // Sampling an exact solution, the discrete gradient is pure
        // truncation error; halving h must shrink it ~16x (Richardson).
        let pair = build_solution("ps-lift").unwrap();
        let coarse = LatticeState::from_solution(&pair, 9, 1.0).unwrap();
        let fine = LatticeState::from_solution(&pair, 17, 1.0).unwrap();
        let g_coarse = LatticeState::max_norm(&coarse.gradient());
        let g_fine = LatticeState::max_norm(&fine.gradient());
        let ratio = g_coarse / g_fine;
        assert!(
            (9.0..30.0).contains(&ratio),
            "expected ~16x reduction, got {ratio} ({g_coarse} -> {g_fine})"
        );
    }

    #[test]
    fn flow_zero_seed_converges_immediately() {
        let mut state = LatticeState::from_solution(&zero_pair(), 8, 1.0).unwrap();
        let trace = flow(&mut state, 1e-10, 10).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.iterations, 0);
        assert_eq!(state.energy(), 0.0);
    }

    #[test]
    fn flow_from_exact_seed_is_near_fixed_point() {
        // The exact sample's gradient is already at the truncation floor;
        // a tolerance just above that floor is reached within 5 iterations
        // and the energy never increases.
        let pair = build_solution("ps-lift").unwrap();
        let mut state = LatticeState::from_solution(&pair, 16, 1.2).unwrap();
        let g0 = LatticeState::max_norm(&state.gradient());
        let mut run = state.clone();
        let trace = flow(&mut run, 0.8 * g0, 5).unwrap();
        assert!(trace.converged, "did not reach 0.8x the seed gradient in 5 iterations");
        for w in trace.energies.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "energy increased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn flow_nonconvergence_carries_trace() {
        let pair = build_solution("ps-lift").unwrap();
        let mut state = LatticeState::from_solution(&pair, 9, 1.0).unwrap();
        state.perturb_interior(0.2, 5);
        match flow(&mut state, 1e-14, 2) {
            Err(RelaxError::NonConvergence { trace, .. }) => {
                assert_eq!(trace.energies.len(), 3);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn perturbed_seed_relaxes_back() {
        // Small box version of the acceptance run: 10% perturbation on a
        // 12^4 grid returns to the discrete minimizer near the exact sample.
        let pair = build_solution("ps-lift").unwrap();
        let mut state = LatticeState::from_solution(&pair, 12, 0.9).unwrap();
        state.perturb_interior(0.10, 7);
        let trace = flow(&mut state, 1e-6, 4000).unwrap();
        assert!(trace.converged);
        let rms = state.rms_distance_to(&pair);
        assert!(rms < 1e-3, "rms distance {rms}");
    }

    #[test]
    fn checkpoint_round_trip_bitexact() {
        let pair = build_solution("ps-lift").unwrap();
        let mut state = LatticeState::from_solution(&pair, 8, 1.0).unwrap();
        state.perturb_interior(0.07, 9);
        let mut buf = Vec::new();
        write_checkpoint(&state, &mut buf).unwrap();
        let cp = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(cp.dim, 4);
        assert_eq!(cp.shape, vec![8, 8, 8, 8]);
        assert_eq!(cp.vdim, 4);
        let restored = state_from_checkpoint(&cp, &pair).unwrap();
        assert_eq!(restored.values(), state.values());
        // Header size: 8·(1 + 4 + 1) + 8 bytes spacing + payload.
        assert_eq!(buf.len(), 8 * 6 + 8 * 4096 * 4 * 3);
    }

    #[test]
    fn checkpoint_rejects_garbage() {
        let garbage = vec![9u8; 16];
        assert!(read_checkpoint(garbage.as_slice()).is_err());
    }
}
