//! Independent reference implementations used to cross-check the main code
//! paths. Nothing in here is consumed by the production pipeline: tests and
//! the acceptance suite call these to get a second opinion computed by a
//! different route (numerical quadrature, explicit symbolic differentiation).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Gauss–Hermite nodes and weights for ∫ f(t) e^{-t²} dt via Golub–Welsch.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let beta = (k as f64 / 2.0).sqrt();
        jac[(k - 1, k)] = beta;
        jac[(k, k - 1)] = beta;
    }
    let eig = SymmetricEigen::new(jac);
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let first = eig.eigenvectors[(0, i)];
            (node, PI.sqrt() * first * first)
        })
        .collect();
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// ∫_{ℝ²} g(w) e^{-γ|w|²} dA with w = w₁ + i w₂, by tensor Gauss–Hermite.
///
/// Exact for polynomial g of degree < 2·nodes per variable; converges fast for
/// g with sub-Gaussian growth.
pub fn gh_gaussian_integral_2d<F>(gamma: f64, nodes: usize, g: F) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    assert!(gamma > 0.0);
    let gh = gauss_hermite(nodes);
    let s = 1.0 / gamma.sqrt();
    let mut acc = Complex64::ZERO;
    for &(t1, w1) in &gh {
        for &(t2, w2) in &gh {
            let w = Complex64::new(s * t1, s * t2);
            acc += w1 * w2 * g(w);
        }
    }
    acc * s * s
}

/// A function c·z^i z̄^j e^{-(a/4)|z|²} combination on ℂ (n = 1), supporting
/// exact symbolic differentiation. This is the oracle representation of
/// model-space states: completely independent of the ladder-index algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyGauss {
    /// Gaussian parameter a > 0 in e^{-(a/4)|z|²}.
    pub a: f64,
    /// (i, j) ↦ coefficient of z^i z̄^j.
    pub terms: BTreeMap<(u32, u32), Complex64>,
}

impl PolyGauss {
    pub fn zero(a: f64) -> Self {
        PolyGauss { a, terms: BTreeMap::new() }
    }

    pub fn monomial(a: f64, i: u32, j: u32, c: Complex64) -> Self {
        let mut t = BTreeMap::new();
        if c != Complex64::ZERO {
            t.insert((i, j), c);
        }
        PolyGauss { a, terms: t }
    }

    pub fn gaussian(a: f64) -> Self {
        Self::monomial(a, 0, 0, Complex64::ONE)
    }

    fn push(&mut self, key: (u32, u32), c: Complex64) {
        if c == Complex64::ZERO {
            return;
        }
        let e = self.terms.entry(key).or_insert(Complex64::ZERO);
        *e += c;
        if e.norm() == 0.0 {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.a, other.a);
        let mut out = self.clone();
        for (&k, &c) in &other.terms {
            out.push(k, c);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.a);
        for (&k, &v) in &self.terms {
            out.push(k, v * c);
        }
        out
    }

    pub fn mul_z(&self) -> Self {
        let mut out = Self::zero(self.a);
        for (&(i, j), &c) in &self.terms {
            out.push((i + 1, j), c);
        }
        out
    }

    pub fn mul_zbar(&self) -> Self {
        let mut out = Self::zero(self.a);
        for (&(i, j), &c) in &self.terms {
            out.push((i, j + 1), c);
        }
        out
    }

    /// ∂/∂z, including the Gaussian factor: ∂_z e^{-(a/4)|z|²} = -(a/4) z̄ ·(…).
    pub fn dz(&self) -> Self {
        let mut out = Self::zero(self.a);
        for (&(i, j), &c) in &self.terms {
            if i > 0 {
                out.push((i - 1, j), c * i as f64);
            }
            out.push((i, j + 1), c * (-self.a / 4.0));
        }
        out
    }

    pub fn dzbar(&self) -> Self {
        let mut out = Self::zero(self.a);
        for (&(i, j), &c) in &self.terms {
            if j > 0 {
                out.push((i, j - 1), c * j as f64);
            }
            out.push((i + 1, j), c * (-self.a / 4.0));
        }
        out
    }

    /// b = -2∂_z + (a/2) z̄ — built from the differential definition.
    pub fn apply_b(&self) -> Self {
        self.dz()
            .scale(Complex64::new(-2.0, 0.0))
            .add(&self.mul_zbar().scale(Complex64::new(self.a / 2.0, 0.0)))
    }

    /// b⁺ = 2∂_z̄ + (a/2) z.
    pub fn apply_bplus(&self) -> Self {
        self.dzbar()
            .scale(Complex64::new(2.0, 0.0))
            .add(&self.mul_z().scale(Complex64::new(self.a / 2.0, 0.0)))
    }

    /// ℒ = b b⁺ (n = 1), applied as explicit differential operators.
    pub fn apply_l(&self) -> Self {
        self.apply_bplus().apply_b()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.norm() <= tol)
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let gauss = (-self.a / 4.0 * z.norm_sqr()).exp();
        let mut acc = Complex64::ZERO;
        for (&(i, j), &c) in &self.terms {
            acc += c * z.powu(i) * z.conj().powu(j);
        }
        acc * gauss
    }

    /// L²(ℝ²) inner product ⟨self, other⟩ = ∫ conj(self)·other, evaluated by
    /// tensor Gauss–Hermite quadrature (exact: the integrand is polynomial
    /// times the Gaussian e^{-(a/2)|z|²}).
    pub fn inner_quad(&self, other: &Self) -> Complex64 {
        assert_eq!(self.a, other.a);
        let deg = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .map(|&(i, j)| i + j)
            .max()
            .unwrap_or(0);
        let nodes = (deg as usize + 2).max(8);
        gh_gaussian_integral_2d(self.a / 2.0, nodes, |w| {
            let mut f = Complex64::ZERO;
            for (&(i, j), &c) in &self.terms {
                f += c * w.powu(i) * w.conj().powu(j);
            }
            let mut g = Complex64::ZERO;
            for (&(i, j), &c) in &other.terms {
                g += c * w.powu(i) * w.conj().powu(j);
            }
            f.conj() * g
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gh_integrates_polynomials_exactly() {
        let gh = gauss_hermite(8);
        // ∫ t⁴ e^{-t²} = (3/4)√π
        let v: f64 = gh.iter().map(|&(t, w)| w * t.powi(4)).sum();
        assert!((v - 0.75 * PI.sqrt()).abs() < 1e-12);
        let total: f64 = gh.iter().map(|&(_, w)| w).sum();
        assert!((total - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gaussian_norm_matches_closed_form() {
        // ‖z^k e^{-(a/4)|z|²}‖² = π (2/a)^{k+1} k!
        let a = 2.0;
        for k in 0..5u32 {
            let f = PolyGauss::monomial(a, k, 0, Complex64::ONE);
            let fact: f64 = (1..=k).map(|m| m as f64).product();
            let expect = PI * (2.0 / a).powi(k as i32 + 1) * fact;
            let got = f.inner_quad(&f);
            assert!((got.re - expect).abs() < 1e-10 * expect.max(1.0));
            assert!(got.im.abs() < 1e-12);
        }
    }

    #[test]
    fn bplus_annihilates_holomorphic_gaussians() {
        let a = 3.0;
        for k in 0..4u32 {
            let f = PolyGauss::monomial(a, k, 0, Complex64::ONE);
            assert!(f.apply_bplus().is_zero(1e-14));
        }
    }

    #[test]
    fn l_annihilates_kernel_and_is_diagonal_on_b_ladder() {
        let a = 2.0;
        let f = PolyGauss::monomial(a, 2, 0, Complex64::ONE);
        assert!(f.apply_l().is_zero(1e-13));
        // ℒ(b f) = 2a·(b f) for f in the kernel.
        let bf = f.apply_b();
        let lbf = bf.apply_l();
        assert!(lbf.sub(&bf.scale(Complex64::new(2.0 * a, 0.0))).is_zero(1e-12));
    }
}
