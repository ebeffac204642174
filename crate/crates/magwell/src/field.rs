//! Flux-quantized magnetic fields on the flat 2-torus.
//!
//! A field is a finite Fourier series
//!   B(x) = B₀ + Σ_m [ c_m e^{2πi(k₁x/L₁ + k₂y/L₂)} + c̄_m e^{-2πi(…)} ]
//! with the mean B₀ = 2πd/(L₁L₂) fixed by the degree d of the line bundle,
//! so ∫∫ B dA = 2πd holds exactly and all derivatives are analytic.
//!
//! In two dimensions with B > 0 the magnetic intensity τ equals B pointwise,
//! and 𝒥 = -iB·rot90 has the single positive eigenvalue a₁ = B on (1,0)-vectors.

use crate::error::{Error, Result};
use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Flat 2-torus of side lengths L₁ × L₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusSpec {
    pub l1: f64,
    pub l2: f64,
}

impl TorusSpec {
    pub fn new(l1: f64, l2: f64) -> Result<Self> {
        if !entries_positive(l1, l2) {
            return Err(Error::Config("torus sides must be positive".into()));
        }
        Ok(TorusSpec { l1, l2 })
    }

    pub fn area(&self) -> f64 {
        self.l1 * self.l2
    }

    /// Shortest displacement from `b` to `a`, componentwise wrapped into [-L/2, L/2).
    pub fn displacement(&self, a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
        [
            wrap_half(a[0] - b[0], self.l1),
            wrap_half(a[1] - b[1], self.l2),
        ]
    }

    /// Geodesic (Euclidean-on-the-torus) distance.
    pub fn distance(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let d = self.displacement(a, b);
        d[0].hypot(d[1])
    }
}

fn entries_positive(l1: f64, l2: f64) -> bool {
    l1 > 0.0 && l2 > 0.0 && l1.is_finite() && l2.is_finite()
}

fn wrap_half(mut x: f64, l: f64) -> f64 {
    x %= l;
    if x < -l / 2.0 {
        x += l;
    } else if x >= l / 2.0 {
        x -= l;
    }
    x
}

/// One Fourier mode of the field; the conjugate partner at -k is implied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierMode {
    pub k1: i32,
    pub k2: i32,
    pub amplitude: Complex64,
}

impl FourierMode {
    pub fn new(k1: i32, k2: i32, re: f64, im: f64) -> Self {
        FourierMode {
            k1,
            k2,
            amplitude: Complex64::new(re, im),
        }
    }
}

/// Flux-quantized periodic magnetic field on the torus.
///
/// Derived objects live here as closures over the Fourier data:
/// ω = B/2π, R^L = -iB, J₀ = (B/2π)·rot90, J = rot90, 𝒥 = -iB·rot90.
#[derive(Debug, Clone)]
pub struct FieldSpec {
    pub torus: TorusSpec,
    pub degree: u32,
    b0: f64,
    /// Canonicalized modes: one entry per conjugate pair.
    modes: Vec<FourierMode>,
}

/// Grid used for the positivity check at construction time.
const POSITIVITY_GRID: usize = 256;

/// Build a field, canonicalizing the mode list.
///
/// Modes may be given in either orientation; when both k and -k appear their
/// amplitudes must be conjugate. B must stay positive on a 256×256 check grid.
pub fn build_field(torus: TorusSpec, degree: u32, modes: &[FourierMode]) -> Result<FieldSpec> {
    if degree < 1 {
        return Err(Error::Config("degree must be ≥ 1".into()));
    }
    let canonical = canonicalize_modes(modes)?;
    let b0 = 2.0 * PI * degree as f64 / torus.area();
    let field = FieldSpec {
        torus,
        degree,
        b0,
        modes: canonical,
    };
    // Nondegeneracy of ω: B > 0 on a dense grid.
    let n = POSITIVITY_GRID;
    for j in 0..n {
        for i in 0..n {
            let x = torus.l1 * i as f64 / n as f64;
            let y = torus.l2 * j as f64 / n as f64;
            if field.eval_b(x, y) <= 0.0 {
                return Err(Error::DegenerateField);
            }
        }
    }
    Ok(field)
}

fn canonical_key(k1: i32, k2: i32) -> ((i32, i32), bool) {
    // Canonical representative of {k, -k}: k1 > 0, or k1 == 0 and k2 > 0.
    if k1 > 0 || (k1 == 0 && k2 > 0) {
        ((k1, k2), false)
    } else {
        ((-k1, -k2), true)
    }
}

fn canonicalize_modes(modes: &[FourierMode]) -> Result<Vec<FourierMode>> {
    use std::collections::BTreeMap;
    // key -> (sum of amplitudes seen in +k orientation, seen?, same for -k)
    let mut acc: BTreeMap<(i32, i32), [(Complex64, bool); 2]> = BTreeMap::new();
    for m in modes {
        if m.k1 == 0 && m.k2 == 0 {
            return Err(Error::Config(
                "mode (0,0) not allowed (mean is fixed by flux quantization)".into(),
            ));
        }
        let (key, flipped) = canonical_key(m.k1, m.k2);
        let slot = acc.entry(key).or_insert([(Complex64::ZERO, false); 2]);
        let idx = if flipped { 1 } else { 0 };
        slot[idx].0 += m.amplitude;
        slot[idx].1 = true;
    }
    let mut out = Vec::with_capacity(acc.len());
    for ((k1, k2), [(plus, has_plus), (minus, has_minus)]) in acc {
        let amp = match (has_plus, has_minus) {
            (true, true) => {
                // Explicit pair: amplitudes must be conjugate.
                let scale = plus.norm().max(1.0);
                if (minus - plus.conj()).norm() > 1e-12 * scale {
                    return Err(Error::FieldNotReal);
                }
                plus
            }
            (true, false) => plus,
            (false, true) => minus.conj(),
            (false, false) => unreachable!(),
        };
        if amp != Complex64::ZERO {
            out.push(FourierMode { k1, k2, amplitude: amp });
        }
    }
    Ok(out)
}

impl FieldSpec {
    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn modes(&self) -> &[FourierMode] {
        &self.modes
    }

    /// Angular frequencies (2πk₁/L₁, 2πk₂/L₂) of a mode.
    fn omega(&self, m: &FourierMode) -> (f64, f64) {
        (
            2.0 * PI * m.k1 as f64 / self.torus.l1,
            2.0 * PI * m.k2 as f64 / self.torus.l2,
        )
    }

    pub fn eval_b(&self, x: f64, y: f64) -> f64 {
        let mut b = self.b0;
        for m in &self.modes {
            let (w1, w2) = self.omega(m);
            let phase = Complex64::new(0.0, w1 * x + w2 * y).exp();
            b += 2.0 * (m.amplitude * phase).re;
        }
        b
    }

    pub fn grad_b(&self, x: f64, y: f64) -> Vector2<f64> {
        let mut g = Vector2::zeros();
        for m in &self.modes {
            let (w1, w2) = self.omega(m);
            let phase = Complex64::new(0.0, w1 * x + w2 * y).exp();
            let v = m.amplitude * phase;
            g[0] += 2.0 * (v * Complex64::new(0.0, w1)).re;
            g[1] += 2.0 * (v * Complex64::new(0.0, w2)).re;
        }
        g
    }

    pub fn hess_b(&self, x: f64, y: f64) -> Matrix2<f64> {
        let mut h = Matrix2::zeros();
        for m in &self.modes {
            let (w1, w2) = self.omega(m);
            let phase = Complex64::new(0.0, w1 * x + w2 * y).exp();
            let v = m.amplitude * phase;
            h[(0, 0)] += -2.0 * (v).re * w1 * w1;
            h[(0, 1)] += -2.0 * (v).re * w1 * w2;
            h[(1, 1)] += -2.0 * (v).re * w2 * w2;
        }
        h[(1, 0)] = h[(0, 1)];
        h
    }

    /// Exact ∫∫ B dA over the axis-aligned cell [x₀, x₀+a₁] × [y₀, y₀+a₂].
    pub fn flux_over_cell(&self, x0: f64, y0: f64, a1: f64, a2: f64) -> f64 {
        let mut flux = self.b0 * a1 * a2;
        for m in &self.modes {
            let (w1, w2) = self.omega(m);
            let i1 = segment_integral(w1, x0, a1);
            let i2 = segment_integral(w2, y0, a2);
            flux += 2.0 * (m.amplitude * i1 * i2).re;
        }
        flux
    }

    /// Magnetic intensity τ = π Tr[(-J₀²)^{1/2}]; equals B in 2D with B > 0.
    pub fn tau(&self, x: f64, y: f64) -> f64 {
        self.eval_b(x, y)
    }

    /// ∫∫ B dA over the whole torus; exactly 2π·degree by construction.
    pub fn total_flux(&self) -> f64 {
        self.b0 * self.torus.area()
    }

    /// Maximum of B on the positivity check grid (used for resolution rules).
    pub fn b_max(&self) -> f64 {
        let mut bmax = f64::MIN;
        let n = POSITIVITY_GRID;
        for j in 0..n {
            for i in 0..n {
                let x = self.torus.l1 * i as f64 / n as f64;
                let y = self.torus.l2 * j as f64 / n as f64;
                bmax = bmax.max(self.eval_b(x, y));
            }
        }
        bmax
    }

    /// Locate all nondegenerate global minima of τ.
    ///
    /// Grid scan on scan_n×scan_n, Newton refinement from each local-minimum
    /// cell tied (rel. 1e-9) with the global minimum, positive-definiteness
    /// check on the analytic Hessian, lexicographic ordering.
    pub fn find_wells(&self, scan_n: usize, newton_tol: f64) -> Result<Vec<WellData>> {
        if scan_n < 64 {
            return Err(Error::Config("scan_n must be ≥ 64".into()));
        }
        if !(newton_tol > 0.0) {
            return Err(Error::Config("newton_tol must be positive".into()));
        }
        let n = scan_n;
        let mut vals = vec![0.0f64; n * n];
        for j in 0..n {
            for i in 0..n {
                let x = self.torus.l1 * i as f64 / n as f64;
                let y = self.torus.l2 * j as f64 / n as f64;
                vals[j * n + i] = self.tau(x, y);
            }
        }
        let gmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let gmax = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if gmax - gmin <= 1e-12 * gmin.abs().max(1.0) {
            // Constant τ: the minimum set is the whole torus.
            return Err(Error::NoWell);
        }

        let tie = gmin + gmin.abs() * 1e-9;
        let mut refined: Vec<WellData> = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let v = vals[j * n + i];
                if v > tie {
                    continue;
                }
                let mut is_local_min = true;
                'nbrs: for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let ii = (i as i64 + di).rem_euclid(n as i64) as usize;
                        let jj = (j as i64 + dj).rem_euclid(n as i64) as usize;
                        if vals[jj * n + ii] < v {
                            is_local_min = false;
                            break 'nbrs;
                        }
                    }
                }
                if !is_local_min {
                    continue;
                }
                let seed = [
                    self.torus.l1 * i as f64 / n as f64,
                    self.torus.l2 * j as f64 / n as f64,
                ];
                let well = self.newton_refine(seed, newton_tol, (i, j))?;
                if let Some(w) = well {
                    // Merge duplicates from the same basin.
                    let dup = refined
                        .iter()
                        .any(|r| self.torus.distance(r.x0, w.x0) < 1e-6 * self.torus.l1.max(self.torus.l2));
                    if !dup {
                        refined.push(w);
                    }
                }
            }
        }
        // Keep only wells attaining the refined global minimum.
        let tmin = refined.iter().map(|w| w.tau0).fold(f64::INFINITY, f64::min);
        refined.retain(|w| w.tau0 <= tmin + tmin.abs() * 1e-9);
        if refined.is_empty() {
            return Err(Error::NoWell);
        }
        refined.sort_by(|a, b| {
            (a.x0[0], a.x0[1])
                .partial_cmp(&(b.x0[0], b.x0[1]))
                .unwrap()
        });
        Ok(refined)
    }

    fn newton_refine(
        &self,
        seed: [f64; 2],
        tol: f64,
        seed_cell: (usize, usize),
    ) -> Result<Option<WellData>> {
        let mut x = seed;
        for _ in 0..50 {
            let g = self.grad_b(x[0], x[1]);
            if g.norm() <= tol {
                let h = self.hess_b(x[0], x[1]);
                let eigs = sym2_eigenvalues(&h);
                if eigs.0 <= 0.0 || eigs.1 <= 0.0 {
                    // Degenerate critical point: not a well.
                    return Ok(None);
                }
                let x0 = [x[0].rem_euclid(self.torus.l1), x[1].rem_euclid(self.torus.l2)];
                let tau0 = self.tau(x0[0], x0[1]);
                return Ok(Some(WellData::new(x0, tau0, h)?));
            }
            let h = self.hess_b(x[0], x[1]);
            let det = h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)];
            if det.abs() < 1e-14 {
                return Err(Error::RefinementFailed(seed_cell.0, seed_cell.1));
            }
            let step = Vector2::new(
                (h[(1, 1)] * g[0] - h[(0, 1)] * g[1]) / det,
                (-h[(1, 0)] * g[0] + h[(0, 0)] * g[1]) / det,
            );
            // A Newton step escaping far from the seed cell means divergence.
            if step.norm() > 0.25 * self.torus.l1.max(self.torus.l2) {
                return Err(Error::RefinementFailed(seed_cell.0, seed_cell.1));
            }
            x[0] -= step[0];
            x[1] -= step[1];
        }
        Err(Error::RefinementFailed(seed_cell.0, seed_cell.1))
    }
}

fn segment_integral(w: f64, x0: f64, a: f64) -> Complex64 {
    // ∫_{x0}^{x0+a} e^{iwx} dx
    if w == 0.0 {
        Complex64::new(a, 0.0)
    } else {
        let iw = Complex64::new(0.0, w);
        ((iw * (x0 + a)).exp() - (iw * x0).exp()) / iw
    }
}

fn sym2_eigenvalues(h: &Matrix2<f64>) -> (f64, f64) {
    let tr = h[(0, 0)] + h[(1, 1)];
    let det = h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    (tr / 2.0 - disc, tr / 2.0 + disc)
}

/// One nondegenerate minimum of τ.
#[derive(Debug, Clone)]
pub struct WellData {
    /// Location on the torus, components in [0, L).
    pub x0: [f64; 2],
    /// τ(x₀) = B(x₀).
    pub tau0: f64,
    /// Hess τ(x₀), symmetric positive definite.
    pub hess: Matrix2<f64>,
    /// 𝒥-eigenvalues at x₀; in 2D the single value a₁ = B(x₀).
    pub a: Vec<f64>,
}

impl WellData {
    pub fn new(x0: [f64; 2], tau0: f64, hess: Matrix2<f64>) -> Result<Self> {
        if (hess[(0, 1)] - hess[(1, 0)]).abs() > 1e-10 * hess.norm().max(1.0) {
            return Err(Error::NotSpd);
        }
        let eigs = sym2_eigenvalues(&hess);
        if eigs.0 <= 0.0 {
            return Err(Error::NotSpd);
        }
        Ok(WellData {
            x0,
            tau0,
            hess,
            a: vec![tau0],
        })
    }

    /// Matrix of the quadratic form Q_{x₀}(Z) = ½⟨Hess τ(x₀)Z, Z⟩.
    pub fn q_matrix(&self) -> Matrix2<f64> {
        self.hess / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_torus() -> TorusSpec {
        TorusSpec::new(1.0, 1.0).unwrap()
    }

    /// B = 2π + cos 2πx + cos 2πy on the unit torus, d = 1.
    pub(crate) fn two_mode_field() -> FieldSpec {
        build_field(
            unit_torus(),
            1,
            &[FourierMode::new(1, 0, 0.5, 0.0), FourierMode::new(0, 1, 0.5, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn constant_field_value() {
        let f = build_field(unit_torus(), 1, &[]).unwrap();
        for &(x, y) in &[(0.0, 0.0), (0.3, 0.7), (0.95, 0.2)] {
            assert!((f.eval_b(x, y) - 2.0 * PI).abs() < 1e-14);
        }
    }

    #[test]
    fn two_mode_field_value_at_center() {
        let f = two_mode_field();
        // Independent direct evaluation of the cosine series.
        let direct = |x: f64, y: f64| 2.0 * PI + (2.0 * PI * x).cos() + (2.0 * PI * y).cos();
        assert!((f.eval_b(0.5, 0.5) - (2.0 * PI - 2.0)).abs() < 1e-14);
        for &(x, y) in &[(0.1, 0.9), (0.25, 0.5), (0.77, 0.13)] {
            assert!((f.eval_b(x, y) - direct(x, y)).abs() < 1e-13);
        }
    }

    #[test]
    fn unpaired_modes_rejected() {
        let err = build_field(
            unit_torus(),
            1,
            &[
                FourierMode::new(1, 0, 0.5, 0.0),
                FourierMode::new(-1, 0, 0.4, 0.1),
            ],
        )
        .unwrap_err();
        assert_eq!(err.to_string(), "field not real");
    }

    #[test]
    fn explicit_conjugate_pair_accepted() {
        let f = build_field(
            unit_torus(),
            1,
            &[
                FourierMode::new(1, 0, 0.5, 0.25),
                FourierMode::new(-1, 0, 0.5, -0.25),
            ],
        )
        .unwrap();
        assert_eq!(f.modes().len(), 1);
        // Same field as the implied-pair form.
        let g = build_field(unit_torus(), 1, &[FourierMode::new(1, 0, 0.5, 0.25)]).unwrap();
        assert!((f.eval_b(0.3, 0.8) - g.eval_b(0.3, 0.8)).abs() < 1e-14);
    }

    #[test]
    fn negative_field_rejected() {
        let err = build_field(unit_torus(), 1, &[FourierMode::new(1, 0, 4.0, 0.0)]).unwrap_err();
        assert_eq!(err.to_string(), "degenerate field");
    }

    #[test]
    fn total_flux_quantized() {
        let f = build_field(unit_torus(), 1, &[]).unwrap();
        assert!((f.total_flux() - 2.0 * PI).abs() < 1e-14);
        let t = TorusSpec::new(2.0, 1.0).unwrap();
        let f3 = build_field(t, 3, &[FourierMode::new(1, 1, 0.2, 0.3)]).unwrap();
        assert!((f3.total_flux() - 6.0 * PI).abs() < 1e-13);
        // Adding conjugate-paired modes never changes the flux.
        let f3b = build_field(t, 3, &[]).unwrap();
        assert_eq!(f3.total_flux(), f3b.total_flux());
    }

    #[test]
    fn tau_equals_b_on_grid() {
        let f = two_mode_field();
        for j in 0..64 {
            for i in 0..64 {
                let x = i as f64 / 64.0;
                let y = j as f64 / 64.0;
                assert!((f.tau(x, y) - f.eval_b(x, y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tau_periodicity() {
        let f = two_mode_field();
        assert!((f.tau(0.3 + 1.0, 0.4) - f.tau(0.3, 0.4)).abs() < 1e-12);
        assert!((f.tau(0.3, 0.4 + 1.0) - f.tau(0.3, 0.4)).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let f = two_mode_field();
        let (x, y) = (0.21, 0.67);
        let h = 1e-6;
        let gx = (f.eval_b(x + h, y) - f.eval_b(x - h, y)) / (2.0 * h);
        let gy = (f.eval_b(x, y + h) - f.eval_b(x, y - h)) / (2.0 * h);
        let g = f.grad_b(x, y);
        assert!((g[0] - gx).abs() < 1e-8);
        assert!((g[1] - gy).abs() < 1e-8);
        let h2 = 1e-4;
        let hxx = (f.eval_b(x + h2, y) - 2.0 * f.eval_b(x, y) + f.eval_b(x - h2, y)) / (h2 * h2);
        assert!((f.hess_b(x, y)[(0, 0)] - hxx).abs() < 1e-4);
    }

    #[test]
    fn cell_flux_matches_quadrature() {
        let f = two_mode_field();
        // Romberg-free check: fine midpoint quadrature over one cell.
        let (x0, y0, a1, a2) = (0.13, 0.41, 1.0 / 16.0, 1.0 / 16.0);
        let m = 200;
        let mut s = 0.0;
        for j in 0..m {
            for i in 0..m {
                let x = x0 + a1 * (i as f64 + 0.5) / m as f64;
                let y = y0 + a2 * (j as f64 + 0.5) / m as f64;
                s += f.eval_b(x, y);
            }
        }
        s *= a1 * a2 / (m * m) as f64;
        assert!((f.flux_over_cell(x0, y0, a1, a2) - s).abs() < 1e-8);
    }

    #[test]
    fn wells_of_two_mode_field() {
        let f = two_mode_field();
        let wells = f.find_wells(128, 1e-11).unwrap();
        assert_eq!(wells.len(), 1);
        let w = &wells[0];
        assert!((w.x0[0] - 0.5).abs() < 1e-9);
        assert!((w.x0[1] - 0.5).abs() < 1e-9);
        assert!((w.tau0 - (2.0 * PI - 2.0)).abs() < 1e-12);
        let expect = (2.0 * PI) * (2.0 * PI);
        assert!((w.hess[(0, 0)] - expect).abs() < 1e-8);
        assert!((w.hess[(1, 1)] - expect).abs() < 1e-8);
        assert!(w.hess[(0, 1)].abs() < 1e-8);
        assert!((w.a[0] - w.tau0).abs() < 1e-12);
        assert!(f.grad_b(w.x0[0], w.x0[1]).norm() <= 1e-11);
    }

    #[test]
    fn constant_field_has_no_well() {
        let f = build_field(unit_torus(), 1, &[]).unwrap();
        let err = f.find_wells(64, 1e-10).unwrap_err();
        assert_eq!(err.to_string(), "no nondegenerate well (Assumption 2 fails)");
    }

    #[test]
    fn double_well_field() {
        // B = 4π + cos 4πx + cos 2πy, d = 2: minima at x = 1/4, 3/4, y = 1/2.
        let f = build_field(
            unit_torus(),
            2,
            &[FourierMode::new(2, 0, 0.5, 0.0), FourierMode::new(0, 1, 0.5, 0.0)],
        )
        .unwrap();
        let wells = f.find_wells(128, 1e-11).unwrap();
        assert_eq!(wells.len(), 2);
        assert!((wells[0].x0[0] - 0.25).abs() < 1e-9);
        assert!((wells[1].x0[0] - 0.75).abs() < 1e-9);
        assert!((wells[0].x0[1] - 0.5).abs() < 1e-9);
        assert!((wells[1].x0[1] - 0.5).abs() < 1e-9);
        assert!((wells[0].tau0 - wells[1].tau0).abs() < 1e-12);
        assert!((wells[0].tau0 - (4.0 * PI - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn wells_invariant_under_scan_refinement() {
        let f = two_mode_field();
        let w1 = f.find_wells(64, 1e-11).unwrap();
        let w2 = f.find_wells(128, 1e-11).unwrap();
        assert_eq!(w1.len(), w2.len());
        for (a, b) in w1.iter().zip(&w2) {
            assert!(f.torus.distance(a.x0, b.x0) < 1e-9);
        }
    }
}
