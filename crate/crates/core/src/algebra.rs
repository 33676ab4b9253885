//! Exact coefficient arithmetic for su(2) and `V ⊗ su(2)` values.
//!
//! Elements of su(2) are stored as coefficients in the orthonormal basis
//! `e_k = -i σ_k` (σ_k the Pauli matrices). Under the trace pairing
//! `<b c> = -1/2 trace(bc)` this basis satisfies `<e_j e_k> = δ_jk` and
//! `[e_j, e_k] = 2 ε_jkl e_l`, so the inner product is the Euclidean dot
//! product and the commutator is twice the cross product. Every operation
//! here is exact up to floating-point rounding.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Largest supported dimension of the auxiliary vector space `V`.
pub const MAX_VDIM: usize = 4;

/// An su(2) element as 3 real coefficients in the basis `e_k = -i σ_k`.
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct LieVector(pub [f64; 3]);

impl LieVector {
    pub const ZERO: LieVector = LieVector([0.0; 3]);

    pub fn new(c1: f64, c2: f64, c3: f64) -> Self {
        LieVector([c1, c2, c3])
    }

    /// Trace inner product `<b c> = -1/2 trace(bc)`; the coefficient dot
    /// product in this basis.
    pub fn inner(&self, other: &LieVector) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Commutator `[b, c]`; in coefficients `2 (b × c)`.
    pub fn commutator(&self, other: &LieVector) -> LieVector {
        let b = &self.0;
        let c = &other.0;
        LieVector([
            2.0 * (b[1] * c[2] - b[2] * c[1]),
            2.0 * (b[2] * c[0] - b[0] * c[2]),
            2.0 * (b[0] * c[1] - b[1] * c[0]),
        ])
    }

    /// Rescales to unit norm. Returns `None` for the zero element.
    pub fn normalized(&self) -> Option<LieVector> {
        let n = self.norm();
        (n > 0.0).then(|| *self * (1.0 / n))
    }
}

/// Commutator `[b, c]` as a free function, matching the notation of the
/// equations this crate implements.
pub fn commutator(b: &LieVector, c: &LieVector) -> LieVector {
    b.commutator(c)
}

/// Trace inner product `<b c>`.
pub fn inner(b: &LieVector, c: &LieVector) -> f64 {
    b.inner(c)
}

impl Add for LieVector {
    type Output = LieVector;
    fn add(self, rhs: LieVector) -> LieVector {
        LieVector([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl Sub for LieVector {
    type Output = LieVector;
    fn sub(self, rhs: LieVector) -> LieVector {
        LieVector([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1], self.0[2] - rhs.0[2]])
    }
}

impl AddAssign for LieVector {
    fn add_assign(&mut self, rhs: LieVector) {
        self.0[0] += rhs.0[0];
        self.0[1] += rhs.0[1];
        self.0[2] += rhs.0[2];
    }
}

impl SubAssign for LieVector {
    fn sub_assign(&mut self, rhs: LieVector) {
        self.0[0] -= rhs.0[0];
        self.0[1] -= rhs.0[1];
        self.0[2] -= rhs.0[2];
    }
}

impl Mul<f64> for LieVector {
    type Output = LieVector;
    fn mul(self, s: f64) -> LieVector {
        LieVector([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Neg for LieVector {
    type Output = LieVector;
    fn neg(self) -> LieVector {
        LieVector([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// A point value in `V ⊗ su(2)`: `vdim` su(2) components `a_c`.
///
/// `vdim` is capped at [`MAX_VDIM`]; the storage is a fixed array so values
/// are `Copy` and cheap to pass around inner quadrature loops.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct HiggsValue {
    comps: [LieVector; MAX_VDIM],
    vdim: usize,
}

impl HiggsValue {
    /// The zero value with `vdim` components.
    ///
    /// Panics if `vdim` is 0 or exceeds [`MAX_VDIM`].
    pub fn zero(vdim: usize) -> Self {
        assert!(
            (1..=MAX_VDIM).contains(&vdim),
            "vdim must be in 1..={MAX_VDIM}, got {vdim}"
        );
        HiggsValue { comps: [LieVector::ZERO; MAX_VDIM], vdim }
    }

    pub fn from_components(comps: &[LieVector]) -> Self {
        let mut v = HiggsValue::zero(comps.len());
        v.comps[..comps.len()].copy_from_slice(comps);
        v
    }

    /// Rank-one value `e_c ⊗ σ` scaled by `scale`: component `c` equals
    /// `σ * scale`, all others zero.
    pub fn along(vdim: usize, c: usize, sigma: LieVector, scale: f64) -> Self {
        let mut v = HiggsValue::zero(vdim);
        v.comps[c] = sigma * scale;
        v
    }

    pub fn vdim(&self) -> usize {
        self.vdim
    }

    pub fn component(&self, c: usize) -> LieVector {
        debug_assert!(c < self.vdim);
        self.comps[c]
    }

    pub fn set_component(&mut self, c: usize, value: LieVector) {
        debug_assert!(c < self.vdim);
        self.comps[c] = value;
    }

    pub fn components(&self) -> &[LieVector] {
        &self.comps[..self.vdim]
    }

    /// `|value|² = Σ_c |a_c|²`; zero iff all components are zero.
    pub fn norm_sq(&self) -> f64 {
        self.components().iter().map(|c| c.norm_sq()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Inner product `Σ_c <a_c b_c>`.
    pub fn inner(&self, other: &HiggsValue) -> f64 {
        debug_assert_eq!(self.vdim, other.vdim);
        self.components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| a.inner(b))
            .sum()
    }

    /// Contraction `a(v) = a_c v_c` with a constant vector `v` in `V`.
    pub fn contract(&self, v: &[f64]) -> LieVector {
        debug_assert_eq!(self.vdim, v.len());
        let mut out = LieVector::ZERO;
        for (c, vc) in v.iter().enumerate() {
            out += self.comps[c] * *vc;
        }
        out
    }

    /// `Σ_{b<c} |[a_b, a_c]|²`; zero iff all component pairs commute
    /// (the `a ∧ a = 0` condition in coefficient form).
    pub fn wedge_square(&self) -> f64 {
        let mut total = 0.0;
        for b in 0..self.vdim {
            for c in (b + 1)..self.vdim {
                total += self.comps[b].commutator(&self.comps[c]).norm_sq();
            }
        }
        total
    }

    /// The map `b ↦ Σ_c [a_c, [b, a_c]]` applied componentwise to `b`;
    /// the nonlinearity of the master equation.
    pub fn double_bracket(&self, b: &HiggsValue) -> HiggsValue {
        debug_assert_eq!(self.vdim, b.vdim);
        let mut out = HiggsValue::zero(self.vdim);
        for d in 0..self.vdim {
            let mut acc = LieVector::ZERO;
            for c in 0..self.vdim {
                acc += self.comps[c].commutator(&b.comps[d].commutator(&self.comps[c]));
            }
            out.comps[d] = acc;
        }
        out
    }
}

/// `wedge_square` as a free function.
pub fn wedge_square(v: &HiggsValue) -> f64 {
    v.wedge_square()
}

impl Add for HiggsValue {
    type Output = HiggsValue;
    fn add(self, rhs: HiggsValue) -> HiggsValue {
        debug_assert_eq!(self.vdim, rhs.vdim);
        let mut out = self;
        for c in 0..self.vdim {
            out.comps[c] += rhs.comps[c];
        }
        out
    }
}

impl Sub for HiggsValue {
    type Output = HiggsValue;
    fn sub(self, rhs: HiggsValue) -> HiggsValue {
        debug_assert_eq!(self.vdim, rhs.vdim);
        let mut out = self;
        for c in 0..self.vdim {
            out.comps[c] -= rhs.comps[c];
        }
        out
    }
}

impl AddAssign for HiggsValue {
    fn add_assign(&mut self, rhs: HiggsValue) {
        debug_assert_eq!(self.vdim, rhs.vdim);
        for c in 0..self.vdim {
            self.comps[c] += rhs.comps[c];
        }
    }
}

impl Mul<f64> for HiggsValue {
    type Output = HiggsValue;
    fn mul(self, s: f64) -> HiggsValue {
        let mut out = self;
        for c in 0..self.vdim {
            out.comps[c] = out.comps[c] * s;
        }
        out
    }
}

impl Neg for HiggsValue {
    type Output = HiggsValue;
    fn neg(self) -> HiggsValue {
        self * -1.0
    }
}
