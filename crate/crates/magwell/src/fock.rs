//! Lowest-Landau-level function spaces and Toeplitz model operators.
//!
//! At a well x₀ with 𝒥-eigenvalues a_j > 0, the kernel of the model Laplacian
//! ℒ = Σ b_j b_j⁺ is spanned by z^α·exp(-¼ Σ a_j|z_j|²). Matrix elements of
//! polynomial symbols in that basis reduce to the Gaussian moments
//!
//!   ∫ z̄^p z^q e^{-(a/2)|z|²} dA = δ_{pq} · π (2/a)^{p+1} p!,
//!
//! so Toeplitz matrices are assembled exactly, with no quadrature error. The
//! model operator 𝒟 = 𝒫(Q_{x₀} + J_{1,2})𝒫 is the compression of the Hessian
//! quadratic form (plus a scalar) to this space; its eigenvalues μ_j enter the
//! eigenvalue comparison λ_j(Δ^{L^p}) ≈ pτ₀ + μ_j.
//!
//! Two independent oracles for the same spectra live alongside: the n = 1
//! closed form μ_j = (2√D/τ₀)j + A²/(2τ₀) and the Weyl-quantization route via
//! Williamson symplectic eigenvalues.

use crate::error::{Error, Result};
use crate::field::WellData;
use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Multi-indices α with |α| ≤ cutoff in (degree, reverse-lex) order.
fn multi_indices(n: usize, cutoff: u32) -> Vec<Vec<u32>> {
    fn fill(n: usize, rem: u32, pos: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == n - 1 {
            cur[pos] = rem;
            out.push(cur.clone());
            return;
        }
        for v in (0..=rem).rev() {
            cur[pos] = v;
            fill(n, rem - v, pos + 1, cur, out);
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    for deg in 0..=cutoff {
        fill(n, deg, 0, &mut cur, &mut out);
    }
    out
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|m| m as f64).product()
}

/// Gaussian moment ∫ z̄^p z^q e^{-(a/2)|z|²} dA (one complex variable).
fn moment(a: f64, p: u32, q: u32) -> f64 {
    if p != q {
        0.0
    } else {
        PI * (2.0 / a).powi(p as i32 + 1) * factorial(p)
    }
}

/// Orthogonal basis of ker ℒ truncated at total monomial degree `cutoff`:
/// states z^α·exp(-¼ Σ a_j|z_j|²) with stored squared norms.
#[derive(Debug, Clone)]
pub struct FockBasis {
    pub a: Vec<f64>,
    pub cutoff: u32,
    pub indices: Vec<Vec<u32>>,
    pub norms_sq: Vec<f64>,
}

/// Build the truncated lowest-Landau-level basis.
pub fn lll_basis(a: &[f64], cutoff: i64) -> Result<FockBasis> {
    if a.is_empty() || a.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidSpectralData);
    }
    if cutoff < 0 {
        return Err(Error::InvalidCutoff);
    }
    let cutoff = cutoff as u32;
    let indices = multi_indices(a.len(), cutoff);
    let norms_sq = indices
        .iter()
        .map(|alpha| {
            alpha
                .iter()
                .zip(a)
                .map(|(&aj, &av)| moment(av, aj, aj))
                .product()
        })
        .collect();
    Ok(FockBasis {
        a: a.to_vec(),
        cutoff,
        indices,
        norms_sq,
    })
}

impl FockBasis {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }
}

/// Bergman kernel of ℒ, evaluated at real 2n-vectors Z, Z' (coordinates
/// z_j = Z_{2j} + i Z_{2j+1}, zero-based):
///   (2π)^{-n} Π a_j · exp(-¼ Σ a_j(|z_j|² + |z'_j|² - 2 z_j z̄'_j)).
pub fn bergman_kernel(a: &[f64], z: &[f64], zp: &[f64]) -> Result<Complex64> {
    let n = a.len();
    if n == 0 || a.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidSpectralData);
    }
    assert_eq!(z.len(), 2 * n);
    assert_eq!(zp.len(), 2 * n);
    let mut pref = (2.0 * PI).powi(-(n as i32));
    let mut expo = Complex64::ZERO;
    for j in 0..n {
        pref *= a[j];
        let zj = Complex64::new(z[2 * j], z[2 * j + 1]);
        let zpj = Complex64::new(zp[2 * j], zp[2 * j + 1]);
        expo += -0.25 * a[j] * (zj.norm_sqr() + zpj.norm_sqr() - 2.0 * zj * zpj.conj());
    }
    Ok(pref * expo.exp())
}

/// Polynomial symbol Σ c_{βγ} z^β z̄^γ in n complex variables.
#[derive(Debug, Clone)]
pub struct Symbol {
    pub n: usize,
    terms: BTreeMap<(Vec<u32>, Vec<u32>), Complex64>,
}

impl Symbol {
    pub fn zero(n: usize) -> Self {
        Symbol { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut s = Self::zero(n);
        s.push(vec![0; n], vec![0; n], Complex64::new(c, 0.0));
        s
    }

    pub fn push(&mut self, beta: Vec<u32>, gamma: Vec<u32>, c: Complex64) {
        assert_eq!(beta.len(), self.n);
        assert_eq!(gamma.len(), self.n);
        if c == Complex64::ZERO {
            return;
        }
        let key = (beta, gamma);
        let e = self.terms.entry(key.clone()).or_insert(Complex64::ZERO);
        *e += c;
        if e.norm() == 0.0 {
            self.terms.remove(&key);
        }
    }

    pub fn add(&mut self, other: &Symbol) {
        assert_eq!(self.n, other.n);
        for ((b, g), &c) in &other.terms {
            self.push(b.clone(), g.clone(), c);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Vec<u32>, Vec<u32>), &Complex64)> {
        self.terms.iter()
    }

    /// A symbol is real-valued iff coefficients satisfy c_{γβ} = conj(c_{βγ}).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = self
            .terms
            .values()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max)
            .max(1.0);
        for ((b, g), &c) in &self.terms {
            let partner = self
                .terms
                .get(&(g.clone(), b.clone()))
                .cloned()
                .unwrap_or(Complex64::ZERO);
            if (partner - c.conj()).norm() > tol * scale {
                return false;
            }
        }
        true
    }

    /// The quadratic form Z ↦ ⟨M Z, Z⟩ on ℝ^{2n}, rewritten in (z, z̄) via
    /// Z_{2j} = (z_j + z̄_j)/2, Z_{2j+1} = -i(z_j - z̄_j)/2 (zero-based rows).
    pub fn from_quadratic_form(m: &DMatrix<f64>) -> Symbol {
        let dim = m.nrows();
        assert_eq!(dim % 2, 0);
        assert_eq!(m.ncols(), dim);
        let n = dim / 2;
        // Z_k = u_k z_{j(k)} + v_k z̄_{j(k)}
        let coeff = |k: usize| -> (usize, Complex64, Complex64) {
            let j = k / 2;
            if k % 2 == 0 {
                (j, Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0))
            } else {
                (j, Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.5))
            }
        };
        let mut s = Symbol::zero(n);
        for k in 0..dim {
            for l in 0..dim {
                let mkl = m[(k, l)];
                if mkl == 0.0 {
                    continue;
                }
                let (jk, uk, vk) = coeff(k);
                let (jl, ul, vl) = coeff(l);
                let mut add = |zf: &[usize], zbf: &[usize], c: Complex64| {
                    let mut beta = vec![0u32; n];
                    let mut gamma = vec![0u32; n];
                    for &j in zf {
                        beta[j] += 1;
                    }
                    for &j in zbf {
                        gamma[j] += 1;
                    }
                    s.push(beta, gamma, c * mkl);
                };
                add(&[jk, jl], &[], uk * ul);
                add(&[jk], &[jl], uk * vl);
                add(&[jl], &[jk], vk * ul);
                add(&[], &[jk, jl], vk * vl);
            }
        }
        s
    }
}

/// Compression 𝒫·symbol·𝒫 of a multiplication operator to the truncated
/// lowest Landau level, assembled from exact Gaussian moments.
pub fn toeplitz_matrix(basis: &FockBasis, symbol: &Symbol) -> Result<DMatrix<Complex64>> {
    if !symbol.is_hermitian(1e-12) {
        return Err(Error::SymbolNotReal);
    }
    assert_eq!(symbol.n, basis.n());
    let dim = basis.dim();
    let n = basis.n();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            let ar = &basis.indices[r];
            let ac = &basis.indices[c];
            let mut acc = Complex64::ZERO;
            'terms: for ((beta, gamma), &cf) in symbol.terms() {
                // ⟨z^{ar}G, z^β z̄^γ z^{ac}G⟩ = Π_j moment(ar_j + γ_j, β_j + ac_j)
                let mut prod = 1.0;
                for j in 0..n {
                    let p = ar[j] + gamma[j];
                    let q = beta[j] + ac[j];
                    if p != q {
                        continue 'terms;
                    }
                    prod *= moment(basis.a[j], p, q);
                }
                acc += cf * prod;
            }
            m[(r, c)] = acc / (basis.norms_sq[r] * basis.norms_sq[c]).sqrt();
        }
    }
    // Assembly is Hermitian up to rounding; verify, then symmetrize exactly
    // for the eigensolver.
    let scale = m.iter().map(|c| c.norm()).fold(0.0f64, f64::max).max(1.0);
    for r in 0..dim {
        for c in r..dim {
            let d = (m[(r, c)] - m[(c, r)].conj()).norm();
            if d > 1e-12 * scale {
                return Err(Error::SymbolNotReal);
            }
            let avg = (m[(r, c)] + m[(c, r)].conj()) / 2.0;
            m[(r, c)] = avg;
            m[(c, r)] = avg.conj();
        }
    }
    Ok(m)
}

/// The Toeplitz model operator 𝒫(Q_{x₀}(Z) + J_{1,2}(x₀))𝒫 on a truncated
/// lowest-Landau-level basis.
#[derive(Debug, Clone)]
pub struct ModelOperator {
    pub well: WellData,
    pub j12: f64,
    pub symbol: Symbol,
    pub basis: FockBasis,
    pub matrix: DMatrix<Complex64>,
}

pub fn model_operator(well: &WellData, j12: f64, cutoff: i64) -> Result<ModelOperator> {
    let q = well.q_matrix();
    // WellData::new enforces SPD; guard hand-built degenerate data anyway.
    if q[(0, 0)] <= 0.0 || q.determinant() <= 0.0 {
        return Err(Error::NotSpd);
    }
    let basis = lll_basis(&well.a, cutoff)?;
    let mut symbol = Symbol::from_quadratic_form(&DMatrix::from_fn(2, 2, |r, c| q[(r, c)]));
    symbol.add(&Symbol::constant(1, j12));
    let matrix = toeplitz_matrix(&basis, &symbol)?;
    Ok(ModelOperator {
        well: well.clone(),
        j12,
        symbol,
        basis,
        matrix,
    })
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let mut v: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Ascending eigenpairs of a Hermitian matrix.
pub fn hermitian_eigenpairs(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let dim = m.nrows();
    let mut vecs = DMatrix::<Complex64>::zeros(dim, vals.len());
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Lowest `count` model eigenvalues over a cutoff schedule, with the observed
/// cutoff-convergence estimate. Fails with "increase cutoff" when the estimate
/// exceeds `tol`.
pub fn model_spectrum(
    well: &WellData,
    j12: f64,
    count: usize,
    cutoffs: &[i64],
    tol: f64,
) -> Result<(Vec<f64>, f64)> {
    if count < 1 {
        return Err(Error::Config("count must be ≥ 1".into()));
    }
    if cutoffs.len() < 2 || cutoffs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::CutoffSchedule);
    }
    let mut prev: Option<Vec<f64>> = None;
    let mut conv = f64::INFINITY;
    let mut last = Vec::new();
    for &cut in cutoffs {
        let op = model_operator(well, j12, cut)?;
        if op.basis.dim() < count {
            return Err(Error::Config(
                "cutoff too small for requested eigenvalue count".into(),
            ));
        }
        let eigs = hermitian_eigenvalues(&op.matrix);
        last = eigs[..count].to_vec();
        if let Some(p) = &prev {
            conv = p
                .iter()
                .zip(&last)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
        }
        prev = Some(last.clone());
    }
    if conv > tol {
        return Err(Error::IncreaseCutoff);
    }
    Ok((last, conv))
}

/// Closed-form n = 1 spectrum of 𝒫(Q + j12)𝒫:
/// μ_j = (2√D/τ₀)·j + A²/(2τ₀) + j12 with D = det Q, A = tr Q^{1/2}.
pub fn closed_form_n1(q: &Matrix2<f64>, tau0: f64, j12: f64, j: usize) -> Result<f64> {
    let (l1, l2) = sym2_eigs(q)?;
    if !(tau0 > 0.0) {
        return Err(Error::InvalidSpectralData);
    }
    let d = l1 * l2;
    let a = l1.sqrt() + l2.sqrt();
    Ok(2.0 * d.sqrt() / tau0 * j as f64 + a * a / (2.0 * tau0) + j12)
}

fn sym2_eigs(q: &Matrix2<f64>) -> Result<(f64, f64)> {
    if (q[(0, 1)] - q[(1, 0)]).abs() > 1e-10 * q.norm().max(1.0) {
        return Err(Error::NotSpd);
    }
    let tr = q[(0, 0)] + q[(1, 1)];
    let det = q.determinant();
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    let (l1, l2) = (tr / 2.0 - disc, tr / 2.0 + disc);
    if l1 <= 0.0 {
        return Err(Error::NotSpd);
    }
    Ok((l1, l2))
}

/// Spectrum of the Weyl quantization of an SPD quadratic form plus tr/2:
/// lowest `count` values of Σ_k d_k(2m_k + 1) + tr(M)/2 over m ∈ ℕⁿ, where
/// d_k are the Williamson (symplectic) eigenvalues of M — the moduli of the
/// eigenvalues of J_std·M.
pub fn williamson_quadratic_spectrum(weyl_form: &DMatrix<f64>, count: usize) -> Result<Vec<f64>> {
    let dim = weyl_form.nrows();
    if dim == 0 || dim % 2 != 0 || weyl_form.ncols() != dim {
        return Err(Error::NotSpd);
    }
    let sym_defect = (weyl_form - weyl_form.transpose()).norm();
    if sym_defect > 1e-10 * weyl_form.norm().max(1.0) {
        return Err(Error::NotSpd);
    }
    let eigs = SymmetricEigen::new(weyl_form.clone());
    if eigs.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotSpd);
    }
    let n = dim / 2;
    // J_std maps (x, ξ) to (ξ, -x): block [[0, I], [-I, 0]].
    let mut jstd = DMatrix::<f64>::zeros(dim, dim);
    for k in 0..n {
        jstd[(k, n + k)] = 1.0;
        jstd[(n + k, k)] = -1.0;
    }
    let jm = &jstd * weyl_form;
    let mut moduli: Vec<f64> = jm.complex_eigenvalues().iter().map(|c| c.norm()).collect();
    moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Eigenvalues of J·M come in ±i d_k pairs.
    let d: Vec<f64> = (0..n)
        .map(|k| (moduli[2 * k] + moduli[2 * k + 1]) / 2.0)
        .collect();
    let shift = weyl_form.trace() / 2.0;
    let tuples = multi_indices_with_cap(n, count as u32);
    let mut vals: Vec<f64> = tuples
        .iter()
        .map(|m| {
            m.iter()
                .zip(&d)
                .map(|(&mk, &dk)| dk * (2.0 * mk as f64 + 1.0))
                .sum::<f64>()
                + shift
        })
        .collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals.truncate(count);
    Ok(vals)
}

/// All tuples m ∈ ℕⁿ with every component ≤ cap.
fn multi_indices_with_cap(n: usize, cap: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for t in &out {
            for v in 0..=cap {
                let mut t2 = t.clone();
                t2.push(v);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

/// Direct sum 𝒟 = ⊕ 𝒟_{x_i} over the well ensemble.
#[derive(Debug, Clone)]
pub struct ModelEnsemble {
    pub components: Vec<ModelOperator>,
}

impl ModelEnsemble {
    pub fn new(components: Vec<ModelOperator>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        Ok(ModelEnsemble { components })
    }
}

/// Sorted multiset union of the component spectra, truncated to `count`.
/// Ties break by well index (stable order), so reports are deterministic.
pub fn ensemble_spectrum(ensemble: &ModelEnsemble, count: usize) -> Result<Vec<f64>> {
    let mut merged: Vec<(f64, usize)> = Vec::new();
    for (idx, op) in ensemble.components.iter().enumerate() {
        for v in hermitian_eigenvalues(&op.matrix) {
            merged.push((v, idx));
        }
    }
    merged.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(merged.into_iter().take(count).map(|(v, _)| v).collect())
}

/// Map a 2D well (Q, τ₀) through the Bargmann scaling to the Weyl-side
/// quadratic form whose Williamson spectrum reproduces the model eigenvalues.
///
/// The symbol Q(√(2/a₁) z) read in (x, ξ) with z = (x - iξ)/√2 has matrix
/// Sᵀ(2/τ₀)Q S with S = diag(1/√2, -1/√2); the sign conjugation changes
/// neither the symplectic eigenvalues nor the trace, so M = Q/τ₀ suffices.
pub fn well_to_weyl_form(q: &Matrix2<f64>, tau0: f64) -> DMatrix<f64> {
    DMatrix::from_fn(2, 2, |r, c| q[(r, c)] / tau0)
}
