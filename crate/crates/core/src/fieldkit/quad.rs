//! Product quadrature on `S^{n-1}` (n = 3, 4) and the shell/ball integrals
//! built from it.
//!
//! The rules are products in hyperspherical coordinates. Azimuth uses the
//! uniform trapezoid rule with `2·level` nodes (exact for harmonics below
//! `2·level`). The `S^2` polar angle uses Gauss-Legendre in `cos θ` (exact
//! for polynomial degree `2·level - 1`). The extra `S^3` polar angle carries
//! the weight `sin²χ dχ`, for which the Gaussian rule is the Chebyshev
//! second-kind one (`χ_j = jπ/(L+1)`, weights `π/(L+1)·sin²χ_j`); it is
//! exact to the same degree, which plain Gauss-Legendre in either `χ` or
//! `cos χ` cannot achieve against this weight. Every rule has positive
//! weights, so all declared-degree exactness claims are testable directly.

use super::{FieldkitError, Point};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Quadrature rule on the unit sphere `S^{n-1}`.
#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    dim: usize,
    level: usize,
    nodes: Vec<Point>,
    weights: Vec<f64>,
    exact_degree: usize,
}

impl SphereQuadrature {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Largest total polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f(node_i)`, summed in fixed node order.
    pub fn integrate<F: Fn(&Point) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(node, w)| w * f(node))
            .sum()
    }
}

/// Surface measure `ω` of the unit sphere: `4π` for n = 3, `2π²` for n = 4.
pub fn surface_measure(dim: usize) -> f64 {
    match dim {
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        _ => panic!("surface_measure: unsupported dimension {dim}"),
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Initial guess (Chebyshev-like), then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Builds the `S^{n-1}` product rule for `n ∈ {3, 4}` at the given level.
pub fn sphere_quadrature(dim: usize, level: usize) -> Result<SphereQuadrature, FieldkitError> {
    if dim != 3 && dim != 4 {
        return Err(FieldkitError::UnsupportedDimension(dim));
    }
    if level < 4 {
        return Err(FieldkitError::LevelTooLow(level));
    }

    let (gl_nodes, gl_weights) = gauss_legendre(level);
    let m_phi = 2 * level;
    let w_phi = 2.0 * PI / m_phi as f64;
    let phis: Vec<(f64, f64)> = (0..m_phi)
        .map(|j| {
            let phi = w_phi * j as f64;
            (phi.sin(), phi.cos())
        })
        .collect();

    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    match dim {
        3 => {
            // u = cos θ Gauss-Legendre × azimuth trapezoid.
            for (u, wu) in gl_nodes.iter().zip(&gl_weights) {
                let s = (1.0 - u * u).max(0.0).sqrt();
                for (sp, cp) in &phis {
                    nodes.push([s * cp, s * sp, *u, 0.0]);
                    weights.push(wu * w_phi);
                }
            }
        }
        4 => {
            // χ Chebyshev-2 × (cos θ Gauss-Legendre) × azimuth trapezoid.
            let lp1 = (level + 1) as f64;
            for j in 1..=level {
                let chi = PI * j as f64 / lp1;
                let (schi, cchi) = chi.sin_cos();
                let wchi = PI / lp1 * schi * schi;
                for (u, wu) in gl_nodes.iter().zip(&gl_weights) {
                    let s = (1.0 - u * u).max(0.0).sqrt();
                    for (sp, cp) in &phis {
                        nodes.push([schi * s * cp, schi * s * sp, schi * u, cchi]);
                        weights.push(wchi * wu * w_phi);
                    }
                }
            }
        }
        _ => unreachable!(),
    }

    Ok(SphereQuadrature {
        dim,
        level,
        nodes,
        weights,
        exact_degree: 2 * level - 1,
    })
}

/// Integral of `f` over the sphere of radius `r`:
/// `Σ w_i f(r·node_i) · r^{n-1}`.
pub fn shell_integral<F: Fn(&Point) -> f64>(f: F, r: f64, q: &SphereQuadrature) -> f64 {
    let jac = r.powi(q.dim() as i32 - 1);
    q.integrate(|node| f(&[r * node[0], r * node[1], r * node[2], r * node[3]])) * jac
}

/// Integral of `f` over the ball of radius `r`: Gauss-Legendre in radius
/// composed with shell integrals. Shells are evaluated in parallel; the
/// reduction order is fixed, so the result does not depend on scheduling.
pub fn ball_integral<F: Fn(&Point) -> f64 + Sync>(
    f: F,
    r: f64,
    q: &SphereQuadrature,
    radial_level: usize,
) -> f64 {
    let (nodes, weights) = gauss_legendre(radial_level);
    let shells: Vec<f64> = nodes
        .par_iter()
        .map(|t| {
            let s = 0.5 * r * (t + 1.0);
            shell_integral(&f, s, q)
        })
        .collect();
    shells
        .iter()
        .zip(&weights)
        .map(|(v, w)| 0.5 * r * w * v)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsupported_inputs() {
        assert!(sphere_quadrature(5, 8).is_err());
        assert!(sphere_quadrature(2, 8).is_err());
        assert!(sphere_quadrature(4, 3).is_err());
    }

    #[test]
    fn weights_positive_and_sum_to_surface_measure() {
        for dim in [3, 4] {
            for level in [4, 8, 24] {
                let q = sphere_quadrature(dim, level).unwrap();
                assert!(q.weights().iter().all(|w| *w > 0.0));
                let total: f64 = q.weights().iter().sum();
                let omega = surface_measure(dim);
                assert!(
                    ((total - omega) / omega).abs() < 1e-10,
                    "n={dim} L={level}: weight sum {total} vs {omega}"
                );
            }
        }
    }

    #[test]
    fn unit_sphere_measure_value() {
        let q = sphere_quadrature(4, 8).unwrap();
        let total = q.integrate(|_| 1.0);
        assert!((total - 19.739_208_802_178_716).abs() < 1e-9); // 2π²
    }

    /// Exact moment of a monomial over S^{n-1} via the gamma-function
    /// formula: odd exponents integrate to zero.
    fn exact_moment(dim: usize, exps: &[usize]) -> f64 {
        fn gamma_half_int(two_a: usize) -> f64 {
            // Γ(a) for a = two_a/2.
            let mut val = if two_a % 2 == 0 { 1.0 } else { PI.sqrt() };
            let mut k = two_a;
            while k > 2 {
                k -= 2;
                val *= k as f64 / 2.0;
            }
            val
        }
        if exps.iter().any(|e| e % 2 == 1) {
            return 0.0;
        }
        let mut num = 2.0;
        let mut sum = 0;
        for &e in exps {
            num *= gamma_half_int(e + 1);
            sum += e + 1;
        }
        num / gamma_half_int(sum)
    }

    #[test]
    fn s3_second_moment() {
        let q = sphere_quadrature(4, 8).unwrap();
        let got = q.integrate(|x| x[0] * x[0]);
        let expect = PI * PI / 2.0; // symmetry: (1/4) · 2π²
        assert!((got - expect).abs() < 1e-10);
        assert!((exact_moment(4, &[2, 0, 0, 0]) - expect).abs() < 1e-12);
    }

    #[test]
    fn odd_monomials_vanish() {
        for dim in [3, 4] {
            let q = sphere_quadrature(dim, 8).unwrap();
            let odd1 = q.integrate(|x| x[0] * x[1] * x[1]);
            let odd2 = q.integrate(|x| x[2].powi(3));
            assert!(odd1.abs() < 1e-12 && odd2.abs() < 1e-12);
        }
    }

    #[test]
    fn monomial_battery_to_declared_degree() {
        for dim in [3usize, 4] {
            for level in [4usize, 6, 12] {
                let q = sphere_quadrature(dim, level).unwrap();
                let deg = q.exact_degree();
                let mut exps = vec![[0usize; 4]];
                // All exponent tuples with total degree <= min(deg, 8).
                let cap = deg.min(8);
                for _ in 0..cap {
                    let mut next = Vec::new();
                    for e in &exps {
                        for k in 0..dim {
                            let mut e2 = *e;
                            e2[k] += 1;
                            next.push(e2);
                        }
                    }
                    next.sort();
                    next.dedup();
                    exps.extend(next.clone());
                    exps.sort();
                    exps.dedup();
                }
                for e in exps {
                    if e.iter().sum::<usize>() > cap {
                        continue;
                    }
                    let got = q.integrate(|x| {
                        x.iter()
                            .zip(e.iter())
                            .map(|(xi, ei)| xi.powi(*ei as i32))
                            .product()
                    });
                    let expect = exact_moment(dim, &e[..dim]);
                    assert!(
                        (got - expect).abs() < 1e-10,
                        "n={dim} L={level} monomial {e:?}: {got} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn ball_integral_unit_volume() {
        // Volume of the unit 4-ball is π²/2.
        let q = sphere_quadrature(4, 6).unwrap();
        let got = ball_integral(|_| 1.0, 1.0, &q, 16);
        assert!((got - PI * PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn ball_integral_radius_squared() {
        // ∫_{B_1} |x|² = 2π² ∫_0^1 r^5 dr = π²/3.
        let q = sphere_quadrature(4, 6).unwrap();
        let got = ball_integral(|x| x.iter().map(|t| t * t).sum(), 1.0, &q, 16);
        assert!((got - PI * PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn shell_integral_of_zero() {
        let q = sphere_quadrature(3, 6).unwrap();
        assert_eq!(shell_integral(|_| 0.0, 2.5, &q), 0.0);
    }

    #[test]
    fn gauss_legendre_degree_exactness() {
        let (nodes, weights) = gauss_legendre(7);
        // degree 13 exact: ∫_{-1}^{1} x^12 = 2/13
        let got: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(12))
            .sum();
        assert!((got - 2.0 / 13.0).abs() < 1e-14);
    }
}
