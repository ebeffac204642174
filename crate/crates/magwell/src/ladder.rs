//! Ladder-operator algebra on the model space at a well, and the subprincipal
//! scalar J_{1,2}.
//!
//! With b_j = -2∂_{z_j} + ½a_j z̄_j and b_j⁺ = 2∂_{z̄_j} + ½a_j z_j one has
//! [b_j, b_k⁺] = -2a_j δ_{jk} and ℒ = Σ_j b_j b_j⁺, so ℒ acts diagonally on
//! the states e_{α,β} = b^β(z^α·G) with eigenvalue Σ_j 2a_j β_j. A second,
//! commuting pair d_j = -2∂_{z̄_j} + ½a_j z_j, d_j⁺ = 2∂_{z_j} + ½a_j z̄_j
//! moves the α index:
//!
//!   b_j  e_{α,β} = e_{α,β+e_j}            b_j⁺ e_{α,β} = 2a_jβ_j e_{α,β-e_j}
//!   d_j  e_{α,β} = a_j e_{α+e_j,β}        d_j⁺ e_{α,β} = 2α_j  e_{α-e_j,β}
//!
//! and multiplication operators decompose as z_j = (b_j⁺ + d_j)/a_j,
//! z̄_j = (b_j + d_j⁺)/a_j. These rules are re-derived in the tests against an
//! explicit symbolic-differentiation oracle before being trusted.
//!
//! ℱ_{1,2} is assembled term by term from the field's first and second
//! derivative data at the base point, specialized to the flat torus where the
//! curvature R^{TX} vanishes, J = rot90, and 𝒥 = B·K with the constant matrix
//! K = [[0, i], [-i, 0]]. Pairings ⟨·,·⟩ are the complex-bilinear extension of
//! the metric, so ⟨∂_z, ∂_z̄⟩ = ½; the norm |·|² in the gradient term is the
//! Hermitian one (it is the norm of a real tensor contraction).

use crate::error::{Error, Result};
use crate::field::WellData;
use crate::fock::{lll_basis, Symbol};
use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Finite linear combination of basis states b^β(z^α·Gaussian).
#[derive(Debug, Clone)]
pub struct LadderElement {
    /// 𝒥-eigenvalues a_j > 0 of the ambient model space.
    pub a: Vec<f64>,
    /// (α, β) ↦ coefficient.
    pub terms: BTreeMap<(Vec<u32>, Vec<u32>), Complex64>,
}

impl LadderElement {
    pub fn zero(a: &[f64]) -> Self {
        LadderElement {
            a: a.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    /// The unnormalized basis state e_{α,β}.
    pub fn basis_state(a: &[f64], alpha: &[u32], beta: &[u32]) -> Self {
        let mut e = Self::zero(a);
        e.push(alpha.to_vec(), beta.to_vec(), Complex64::ONE);
        e
    }

    /// Ground state 1·G.
    pub fn ground(a: &[f64]) -> Self {
        let n = a.len();
        Self::basis_state(a, &vec![0; n], &vec![0; n])
    }

    fn push(&mut self, alpha: Vec<u32>, beta: Vec<u32>, c: Complex64) {
        if c == Complex64::ZERO {
            return;
        }
        let key = (alpha, beta);
        let e = self.terms.entry(key.clone()).or_insert(Complex64::ZERO);
        *e += c;
        if e.norm() == 0.0 {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((al, be), &c) in &other.terms {
            out.push(al.clone(), be.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(&self.a);
        for ((al, be), &v) in &self.terms {
            out.push(al.clone(), be.clone(), v * c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.norm() <= tol)
    }

    /// Squared norm of the (α, β) basis state:
    /// Π_j π(2/a_j)^{α_j+1}α_j! · Π_j (2a_j)^{β_j}β_j!.
    fn basis_norm_sq(a: &[f64], alpha: &[u32], beta: &[u32]) -> f64 {
        let mut n = 1.0;
        for j in 0..a.len() {
            n *= PI * (2.0 / a[j]).powi(alpha[j] as i32 + 1) * fact(alpha[j]);
            n *= (2.0 * a[j]).powi(beta[j] as i32) * fact(beta[j]);
        }
        n
    }

    /// L² inner product, conjugate-linear in the first slot.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for ((al, be), &c) in &self.terms {
            if let Some(&d) = other.terms.get(&(al.clone(), be.clone())) {
                acc += c.conj() * d * Self::basis_norm_sq(&self.a, al, be);
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    /// Component in ker ℒ (the β = 0 part).
    pub fn kernel_part(&self) -> Self {
        let mut out = Self::zero(&self.a);
        for ((al, be), &c) in &self.terms {
            if be.iter().all(|&b| b == 0) {
                out.push(al.clone(), be.clone(), c);
            }
        }
        out
    }
}

fn fact(k: u32) -> f64 {
    (1..=k).map(|m| m as f64).product()
}

fn bump(v: &[u32], j: usize, delta: i32) -> Option<Vec<u32>> {
    let mut out = v.to_vec();
    let nv = out[j] as i32 + delta;
    if nv < 0 {
        return None;
    }
    out[j] = nv as u32;
    Some(out)
}

/// b_j: raises β_j, lifting the ℒ-eigenvalue by 2a_j.
pub fn apply_b(e: &LadderElement, j: usize) -> LadderElement {
    let mut out = LadderElement::zero(&e.a);
    for ((al, be), &c) in &e.terms {
        out.push(al.clone(), bump(be, j, 1).unwrap(), c);
    }
    out
}

/// b_j⁺: annihilates β_j = 0 states; otherwise lowers β_j with weight 2a_jβ_j.
pub fn apply_b_plus(e: &LadderElement, j: usize) -> LadderElement {
    let mut out = LadderElement::zero(&e.a);
    for ((al, be), &c) in &e.terms {
        if be[j] > 0 {
            let nb = bump(be, j, -1).unwrap();
            out.push(al.clone(), nb, c * (2.0 * e.a[j] * be[j] as f64));
        }
    }
    out
}

/// d_j: raises α_j with weight a_j.
pub fn apply_d(e: &LadderElement, j: usize) -> LadderElement {
    let mut out = LadderElement::zero(&e.a);
    for ((al, be), &c) in &e.terms {
        out.push(bump(al, j, 1).unwrap(), be.clone(), c * e.a[j]);
    }
    out
}

/// d_j⁺: lowers α_j with weight 2α_j.
pub fn apply_d_plus(e: &LadderElement, j: usize) -> LadderElement {
    let mut out = LadderElement::zero(&e.a);
    for ((al, be), &c) in &e.terms {
        if al[j] > 0 {
            let na = bump(al, j, -1).unwrap();
            out.push(na, be.clone(), c * (2.0 * al[j] as f64));
        }
    }
    out
}

/// Multiplication by z_j = (b_j⁺ + d_j)/a_j.
pub fn apply_mul_z(e: &LadderElement, j: usize) -> LadderElement {
    apply_b_plus(e, j)
        .add(&apply_d(e, j))
        .scale(Complex64::new(1.0 / e.a[j], 0.0))
}

/// Multiplication by z̄_j = (b_j + d_j⁺)/a_j.
pub fn apply_mul_zbar(e: &LadderElement, j: usize) -> LadderElement {
    apply_b(e, j)
        .add(&apply_d_plus(e, j))
        .scale(Complex64::new(1.0 / e.a[j], 0.0))
}

/// ℒ = Σ_j b_j b_j⁺: diagonal with eigenvalue Σ_j 2a_jβ_j.
pub fn apply_l(e: &LadderElement) -> LadderElement {
    let mut out = LadderElement::zero(&e.a);
    for ((al, be), &c) in &e.terms {
        let eig: f64 = be
            .iter()
            .zip(&e.a)
            .map(|(&b, &aj)| 2.0 * aj * b as f64)
            .sum();
        out.push(al.clone(), be.clone(), c * eig);
    }
    out
}

/// ℒ⁻¹ on the orthogonal complement of ker ℒ.
///
/// Errors if the input has a kernel component above 1e-12 (relative).
pub fn apply_l_inverse(e: &LadderElement) -> Result<LadderElement> {
    let kernel_norm = e.kernel_part().norm();
    if kernel_norm > 1e-12 * e.norm().max(1e-300) {
        return Err(Error::LInverseOnKernel);
    }
    let mut out = LadderElement::zero(&e.a);
    for ((al, be), &c) in &e.terms {
        let eig: f64 = be
            .iter()
            .zip(&e.a)
            .map(|(&b, &aj)| 2.0 * aj * b as f64)
            .sum();
        if eig > 0.0 {
            out.push(al.clone(), be.clone(), c / eig);
        }
    }
    Ok(out)
}

/// Multiplication by a polynomial symbol Σ c z^β z̄^γ.
pub fn apply_poly_mul(e: &LadderElement, poly: &Symbol) -> LadderElement {
    let n = e.a.len();
    assert_eq!(poly.n, n);
    let mut out = LadderElement::zero(&e.a);
    for ((beta, gamma), &c) in poly.terms() {
        let mut cur = e.scale(c);
        for j in 0..n {
            for _ in 0..beta[j] {
                cur = apply_mul_z(&cur, j);
            }
            for _ in 0..gamma[j] {
                cur = apply_mul_zbar(&cur, j);
            }
        }
        out = out.add(&cur);
    }
    out
}

/// The flat-torus ℱ_{1,2} operator split into its terms. On the flat torus the
/// curvature term vanishes identically; the remaining pieces depend on the
/// first and second derivatives of B at the base point:
///
///   hess:   ⟨(∇∇𝒥)_{(ℛ,ℛ)} ∂_z, ∂_z̄⟩    = +½ ZᵀHZ
///   trace:  (i/4) tr(∇∇(J𝒥))_{(ℛ,ℛ)}      = -½ ZᵀHZ
///   grad²:  (1/9)|(∇_ℛ𝒥)ℛ|²                = (1/9) ℓ(Z)²|z|²
///   ladder: (4/9)⟨(∇_ℛ𝒥)ℛ,∂_z⟩ b⁺ℒ⁻¹ b ⟨(∇_ℛ𝒥)ℛ,∂_z̄⟩
///           = (4/9)·mult(-½ℓz̄) ∘ b⁺ ∘ ℒ⁻¹ ∘ b ∘ mult(½ℓz)
///
/// with ℓ(Z) = ⟨∇B(x₀), Z⟩ and H = Hess B(x₀).
#[derive(Debug, Clone)]
pub struct F12Operator {
    pub a: f64,
    pub hess_poly: Symbol,
    pub trace_poly: Symbol,
    pub grad_sq_poly: Symbol,
    pub ladder_pre: Symbol,
    pub ladder_post: Symbol,
}

impl F12Operator {
    pub fn build(a1: f64, grad_b: Vector2<f64>, hess_b: Matrix2<f64>) -> Result<Self> {
        if !(a1 > 0.0) {
            return Err(Error::InvalidSpectralData);
        }
        let h = DMatrix::from_fn(2, 2, |r, c| hess_b[(r, c)]);
        let zhz = Symbol::from_quadratic_form(&h);
        let hess_poly = scale_symbol(&zhz, Complex64::new(0.5, 0.0));
        let trace_poly = scale_symbol(&zhz, Complex64::new(-0.5, 0.0));

        // ℓ(Z) = (ḡ/2) z + (g/2) z̄ with g = g₁ + i g₂.
        let g = Complex64::new(grad_b[0], grad_b[1]);
        let mut ell = Symbol::zero(1);
        ell.push(vec![1], vec![0], g.conj() / 2.0);
        ell.push(vec![0], vec![1], g / 2.0);

        // (1/9) ℓ² |z|²
        let mut zzbar = Symbol::zero(1);
        zzbar.push(vec![1], vec![1], Complex64::ONE);
        let grad_sq_poly = scale_symbol(
            &mul_symbol(&mul_symbol(&ell, &ell), &zzbar),
            Complex64::new(1.0 / 9.0, 0.0),
        );

        // ⟨ℓ·KZ, ∂_z⟩ = -½ ℓ z̄ and ⟨ℓ·KZ, ∂_z̄⟩ = ½ ℓ z (bilinear pairing).
        let mut zbar = Symbol::zero(1);
        zbar.push(vec![0], vec![1], Complex64::ONE);
        let mut zsym = Symbol::zero(1);
        zsym.push(vec![1], vec![0], Complex64::ONE);
        let ladder_pre = scale_symbol(&mul_symbol(&ell, &zbar), Complex64::new(-0.5, 0.0));
        let ladder_post = scale_symbol(&mul_symbol(&ell, &zsym), Complex64::new(0.5, 0.0));

        Ok(F12Operator {
            a: a1,
            hess_poly,
            trace_poly,
            grad_sq_poly,
            ladder_pre,
            ladder_post,
        })
    }

    /// Apply the full operator to a ladder element.
    pub fn apply(&self, e: &LadderElement) -> Result<LadderElement> {
        let mut out = apply_poly_mul(e, &self.hess_poly);
        out = out.add(&apply_poly_mul(e, &self.trace_poly));
        out = out.add(&apply_poly_mul(e, &self.grad_sq_poly));
        out = out.add(&self.apply_ladder_term(e)?);
        Ok(out)
    }

    /// The b⁺ℒ⁻¹b sandwich term, including its 4/9 prefactor.
    pub fn apply_ladder_term(&self, e: &LadderElement) -> Result<LadderElement> {
        let stage = apply_poly_mul(e, &self.ladder_post);
        let stage = apply_b(&stage, 0);
        // The image of b has β ≥ 1, so ℒ⁻¹ is always defined here.
        let stage = apply_l_inverse(&stage)?;
        let stage = apply_b_plus(&stage, 0);
        let stage = apply_poly_mul(&stage, &self.ladder_pre);
        Ok(stage.scale(Complex64::new(4.0 / 9.0, 0.0)))
    }
}

fn scale_symbol(s: &Symbol, c: Complex64) -> Symbol {
    let mut out = Symbol::zero(s.n);
    for ((b, g), &v) in s.terms() {
        out.push(b.clone(), g.clone(), v * c);
    }
    out
}

fn mul_symbol(a: &Symbol, b: &Symbol) -> Symbol {
    assert_eq!(a.n, b.n);
    let mut out = Symbol::zero(a.n);
    for ((b1, g1), &c1) in a.terms() {
        for ((b2, g2), &c2) in b.terms() {
            let beta: Vec<u32> = b1.iter().zip(b2).map(|(x, y)| x + y).collect();
            let gamma: Vec<u32> = g1.iter().zip(g2).map(|(x, y)| x + y).collect();
            out.push(beta, gamma, c1 * c2);
        }
    }
    out
}

/// Result of the J_{1,2} evaluation at a well.
#[derive(Debug, Clone)]
pub struct J12Value {
    /// [𝒫ℱ𝒫](0,0)/𝒫(0,0): the scalar value when ℱ is scalar on the kernel.
    pub value: f64,
    /// Max deviation of 𝒫ℱ𝒫 from value·identity on the truncated basis.
    pub scalarity_defect: f64,
    /// (0,0) matrix elements of the individual terms
    /// [curvature, hess, trace, grad², ladder]; curvature ≡ 0 on the flat torus.
    pub term_values: [f64; 5],
}

/// Degree of the LLL basis used for the scalarity check. ℱ_{1,2} has
/// polynomial coefficients of degree ≤ 4 here, so matrix elements against
/// this truncation are exact.
const PROJ_CUTOFF: i64 = 6;

/// Evaluate J_{1,2}(x₀) from first/second derivative data of 𝒥 at the well
/// (on the flat torus these are ∇B and Hess B times the constant matrix K).
/// Unchecked variant: reports the scalarity defect without failing on it.
pub fn compute_j12_full(
    well: &WellData,
    grad_b: Vector2<f64>,
    hess_b: Matrix2<f64>,
) -> Result<J12Value> {
    let a1 = well.a[0];
    let op = F12Operator::build(a1, grad_b, hess_b)?;
    let a = [a1];
    let basis = lll_basis(&a, PROJ_CUTOFF)?;

    let dim = basis.dim();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for c in 0..dim {
        let alpha = &basis.indices[c];
        let e = LadderElement::basis_state(&a, alpha, &[0]);
        let fe = op.apply(&e)?.kernel_part();
        for r in 0..dim {
            let er = LadderElement::basis_state(&a, &basis.indices[r], &[0]);
            let val = er.inner(&fe) / (basis.norms_sq[r] * basis.norms_sq[c]).sqrt();
            m[(r, c)] = val;
        }
    }
    let value = m[(0, 0)].re;
    let mut defect = m[(0, 0)].im.abs();
    for r in 0..dim {
        for c in 0..dim {
            let expect = if r == c {
                Complex64::new(value, 0.0)
            } else {
                Complex64::ZERO
            };
            defect = defect.max((m[(r, c)] - expect).norm());
        }
    }

    let ground = LadderElement::ground(&a);
    let gnorm = ground.inner(&ground).re;
    let elem00 = |e: &LadderElement| ground.inner(e).re / gnorm;
    let term_values = [
        0.0,
        elem00(&apply_poly_mul(&ground, &op.hess_poly)),
        elem00(&apply_poly_mul(&ground, &op.trace_poly)),
        elem00(&apply_poly_mul(&ground, &op.grad_sq_poly)),
        elem00(&op.apply_ladder_term(&ground)?),
    ];

    Ok(J12Value {
        value,
        scalarity_defect: defect,
        term_values,
    })
}

/// Checked variant: errors when 𝒫ℱ𝒫 deviates from a scalar by more than 1e-8.
pub fn compute_j12(
    well: &WellData,
    grad_b: Vector2<f64>,
    hess_b: Matrix2<f64>,
) -> Result<J12Value> {
    let v = compute_j12_full(well, grad_b, hess_b)?;
    if v.scalarity_defect > 1e-8 {
        return Err(Error::NotScalar);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::PolyGauss;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Convert a ladder element to its explicit function representation by
    /// applying b symbolically: e_{α,β} = b^β(z^α G). n = 1 only.
    fn to_polygauss(e: &LadderElement) -> PolyGauss {
        let a = e.a[0];
        let mut out = PolyGauss::zero(a);
        for ((al, be), &c) in &e.terms {
            let mut f = PolyGauss::monomial(a, al[0], 0, c);
            for _ in 0..be[0] {
                f = f.apply_b();
            }
            out = out.add(&f);
        }
        out
    }

    fn random_element(rng: &mut ChaCha8Rng, a: f64, max_deg: u32) -> LadderElement {
        let mut e = LadderElement::zero(&[a]);
        for al in 0..=max_deg {
            for be in 0..=max_deg {
                if al + be > max_deg {
                    continue;
                }
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                e = e.add(&LadderElement::basis_state(&[a], &[al], &[be]).scale(c));
            }
        }
        e
    }

    #[test]
    fn b_action_on_ground() {
        let a = [2.0];
        let g = LadderElement::ground(&a);
        let bg = apply_b(&g, 0);
        assert_eq!(bg.terms.len(), 1);
        assert!(bg.terms.contains_key(&(vec![0], vec![1])));
    }

    #[test]
    fn bplus_annihilates_kernel() {
        let a = [1.7];
        for al in 0..4u32 {
            let e = LadderElement::basis_state(&a, &[al], &[0]);
            assert!(apply_b_plus(&e, 0).is_zero(1e-15));
        }
    }

    #[test]
    fn commutator_b_bplus_symbolic() {
        // [b, b⁺] = -2a, verified as differential operators on all monomials
        // of degree ≤ 6 through the symbolic oracle.
        let a = 2.3;
        for i in 0..=6u32 {
            for j in 0..=(6 - i) {
                let f = PolyGauss::monomial(a, i, j, Complex64::ONE);
                // [b, b⁺]f = b(b⁺ f) - b⁺(b f)
                let comm = f.apply_bplus().apply_b().sub(&f.apply_b().apply_bplus());
                let expect = f.scale(Complex64::new(-2.0 * a, 0.0));
                assert!(comm.sub(&expect).is_zero(1e-10));
            }
        }
    }

    #[test]
    fn ladder_rules_match_symbolic_differentiation() {
        let a = 1.9;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let e = random_element(&mut rng, a, 4);
            let f = to_polygauss(&e);
            assert!(to_polygauss(&apply_b(&e, 0)).sub(&f.apply_b()).is_zero(1e-9));
            assert!(to_polygauss(&apply_b_plus(&e, 0))
                .sub(&f.apply_bplus())
                .is_zero(1e-9));
            assert!(to_polygauss(&apply_mul_z(&e, 0)).sub(&f.mul_z()).is_zero(1e-9));
            assert!(to_polygauss(&apply_mul_zbar(&e, 0))
                .sub(&f.mul_zbar())
                .is_zero(1e-9));
        }
    }

    #[test]
    fn l_matches_symbolic_differentiation() {
        let a = 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let e = random_element(&mut rng, a, 5);
            let via_ladder = to_polygauss(&apply_l(&e));
            let via_diff = to_polygauss(&e).apply_l();
            let scale = via_diff.max_coeff().max(1.0);
            assert!(via_ladder.sub(&via_diff).is_zero(1e-12 * scale));
        }
    }

    #[test]
    fn l_commutator_with_b() {
        // ℒ(b f) - b(ℒ f) = 2a·b f on random elements.
        let a = 3.1;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let e = random_element(&mut rng, a, 4);
            let lhs = apply_l(&apply_b(&e, 0)).sub(&apply_b(&apply_l(&e), 0));
            let rhs = apply_b(&e, 0).scale(Complex64::new(2.0 * a, 0.0));
            assert!(lhs.sub(&rhs).is_zero(1e-10));
        }
    }

    #[test]
    fn l_inverse_round_trip() {
        let a = 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let mut e = random_element(&mut rng, a, 4);
            e = e.sub(&e.kernel_part());
            let inv = apply_l_inverse(&e).unwrap();
            let back = apply_l(&inv);
            let scale = e.norm().max(1.0);
            assert!(back.sub(&e).is_zero(1e-12 * scale));
        }
        // Diagonal action: β = e₁ at a = 2 divides by 4.
        let e = LadderElement::basis_state(&[2.0], &[0], &[1]);
        let inv = apply_l_inverse(&e).unwrap();
        let c = inv.terms[&(vec![0], vec![1])];
        assert!((c - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        // Pure kernel input errors.
        let g = LadderElement::ground(&[2.0]);
        assert!(matches!(apply_l_inverse(&g), Err(Error::LInverseOnKernel)));
    }

    #[test]
    fn l_quadratic_form_nonnegative() {
        let a = 2.4;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let e = random_element(&mut rng, a, 4);
            let q = e.inner(&apply_l(&e));
            assert!(q.re >= -1e-10 * e.norm().powi(2));
            assert!(q.im.abs() <= 1e-10 * e.norm().powi(2));
        }
        // Equality exactly on the β = 0 span.
        let k = LadderElement::basis_state(&[a], &[3], &[0]);
        assert!(k.inner(&apply_l(&k)).norm() < 1e-14);
    }

    #[test]
    fn j12_zero_for_constant_field() {
        let w = WellData::new([0.0, 0.0], 2.0, Matrix2::identity() * 2.0).unwrap();
        let v = compute_j12(&w, Vector2::zeros(), Matrix2::zeros()).unwrap();
        assert!(v.value.abs() < 1e-14);
        assert!(v.scalarity_defect < 1e-14);
    }

    #[test]
    fn j12_zero_at_flat_torus_well() {
        // At a genuine well ∇B = 0; the hess and trace terms cancel exactly.
        let hess = Matrix2::new(39.0, 2.5, 2.5, 41.0);
        let w = WellData::new([0.0, 0.0], 4.28, hess).unwrap();
        let v = compute_j12(&w, Vector2::zeros(), hess).unwrap();
        assert!(v.value.abs() < 1e-12, "J12 = {}", v.value);
        assert!(v.scalarity_defect < 1e-12);
        assert!((v.term_values[1] + v.term_values[2]).abs() < 1e-12);
    }

    #[test]
    fn j12_synthetic_gradient_terms() {
        // Synthetic d1J ≠ 0: the grad² and ladder terms are individually
        // nonzero with the frozen values ±(4/9)|g|²/a², and still cancel.
        let a1 = 2.0;
        let w = WellData::new([0.0, 0.0], a1, Matrix2::identity() * 2.0).unwrap();
        let g = Vector2::new(1.0, 0.5);
        let gsq = 1.25;
        let v = compute_j12_full(&w, g, Matrix2::zeros()).unwrap();
        let expect = 4.0 / 9.0 * gsq / (a1 * a1);
        assert!((v.term_values[3] - expect).abs() < 1e-12);
        assert!((v.term_values[4] + expect).abs() < 1e-12);
        assert!(v.value.abs() < 1e-12);
        assert!(v.scalarity_defect < 1e-10, "defect {}", v.scalarity_defect);
    }

    #[test]
    fn j12_terms_match_quadrature_oracle() {
        // Independent route: explicit differential operators, an SVD solve for
        // ℒ⁻¹ in the monomial basis, and Gauss–Hermite inner products.
        let a = 2.0;
        let hess = Matrix2::new(3.0, 0.7, 0.7, 5.0);
        let w = WellData::new([0.0, 0.0], a, hess).unwrap();
        let g = Vector2::new(0.8, -0.6);
        let v = compute_j12_full(&w, g, hess).unwrap();
        let op = F12Operator::build(a, g, hess).unwrap();

        let u0 = PolyGauss::gaussian(a);
        let u0_norm = u0.inner_quad(&u0).re;

        let poly_to_fn = |s: &Symbol, f: &PolyGauss| -> PolyGauss {
            let mut out = PolyGauss::zero(a);
            for ((b, gm), &c) in s.terms() {
                let mut cur = f.scale(c);
                for _ in 0..b[0] {
                    cur = cur.mul_z();
                }
                for _ in 0..gm[0] {
                    cur = cur.mul_zbar();
                }
                out = out.add(&cur);
            }
            out
        };

        // Multiplication terms: straight quadrature.
        for (idx, sym) in [
            (1usize, &op.hess_poly),
            (2, &op.trace_poly),
            (3, &op.grad_sq_poly),
        ] {
            let quad = u0.inner_quad(&poly_to_fn(sym, &u0)).re / u0_norm;
            assert!(
                (quad - v.term_values[idx]).abs() < 1e-6,
                "term {idx}: quadrature {quad} vs ladder {}",
                v.term_values[idx]
            );
        }

        // Ladder term: solve ℒ x = b(post·u₀) in the monomial-Gaussian basis.
        let f = poly_to_fn(&op.ladder_post, &u0).apply_b();
        let deg = 8u32;
        let mut keys = Vec::new();
        for i in 0..=deg {
            for j in 0..=(deg - i) {
                keys.push((i, j));
            }
        }
        let dim = keys.len();
        let mut lmat = DMatrix::<Complex64>::zeros(dim, dim);
        for (c, &(i, j)) in keys.iter().enumerate() {
            let lcol = PolyGauss::monomial(a, i, j, Complex64::ONE).apply_l();
            for (&(p, q), &coef) in &lcol.terms {
                let r = keys.iter().position(|&k| k == (p, q)).unwrap();
                lmat[(r, c)] = coef;
            }
        }
        let mut fvec = DMatrix::<Complex64>::zeros(dim, 1);
        for (&(p, q), &coef) in &f.terms {
            let r = keys.iter().position(|&k| k == (p, q)).unwrap();
            fvec[(r, 0)] = coef;
        }
        let svd = lmat.clone().svd(true, true);
        let x = svd.solve(&fvec, 1e-10).unwrap();
        let mut xfun = PolyGauss::zero(a);
        for (r, &(i, j)) in keys.iter().enumerate() {
            xfun = xfun.add(&PolyGauss::monomial(a, i, j, x[(r, 0)]));
        }
        let resid = xfun.apply_l().sub(&f);
        assert!(resid.is_zero(1e-8), "ℒ solve residual too large");
        let sandwiched = poly_to_fn(&op.ladder_pre, &xfun.apply_bplus());
        let quad5 = 4.0 / 9.0 * u0.inner_quad(&sandwiched).re / u0_norm;
        assert!(
            (quad5 - v.term_values[4]).abs() < 1e-6,
            "ladder term: quadrature {quad5} vs ladder {}",
            v.term_values[4]
        );
    }

    #[test]
    fn j12_frame_rotation_invariance() {
        let a1 = 3.3;
        let w = WellData::new([0.0, 0.0], a1, Matrix2::identity() * 2.0).unwrap();
        let g = Vector2::new(0.4, 0.9);
        let hess = Matrix2::new(2.2, 0.5, 0.5, 1.7);
        let base = compute_j12_full(&w, g, hess).unwrap();
        for theta in [0.3f64, 1.1, 2.0] {
            let r = Matrix2::new(theta.cos(), -theta.sin(), theta.sin(), theta.cos());
            let g2 = r.transpose() * g;
            let h2 = r.transpose() * hess * r;
            let rot = compute_j12_full(&w, g2, h2).unwrap();
            assert!((rot.value - base.value).abs() < 1e-9);
            for k in 0..5 {
                assert!(
                    (rot.term_values[k] - base.term_values[k]).abs() < 1e-9,
                    "term {k} not frame invariant"
                );
            }
        }
    }
}
