//! Gauge-covariant finite-difference discretization of Δ^{L^p} and of the
//! renormalized operator Δ_p = Δ^{L^p} - pτ on the torus.
//!
//! Sites live on an N₁×N₂ grid with spacings a_μ = L_μ/N_μ, indexed
//! s = j·N₁ + i. A unit-modulus link U_μ(x) sits on each bond; the covariant
//! 5-point stencil is
//!
//!   (Hv)(x) = Σ_μ a_μ⁻² (2v(x) - U_μ(x)v(x+μ̂) - Ū_μ(x-μ̂)v(x-μ̂)).
//!
//! The plaquette phase at cell c is exp(-iΦ_c) with Φ_c = ∫∫_c pB dA computed
//! exactly from the Fourier series, so the total flux stays exactly quantized
//! and the link system closes around the torus. The gauge is fixed
//! deterministically by accumulating fluxes along one axis and placing the
//! residual twist on the seam links; correctness rests on the gauge-invariance
//! tests, not on the particular choice.

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::{Read, Write};

/// Axis along which cell fluxes are accumulated into links.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeOrder {
    /// Vertical links accumulate row fluxes; twist on the last column.
    ColumnMajor,
    /// Horizontal links accumulate column fluxes; twist on the last row.
    RowMajor,
}

/// Gauge-covariant lattice operator for Δ^{L^p} (and Δ_p via `renormalized_*`).
#[derive(Debug, Clone)]
pub struct LatticeOperator {
    pub p: u32,
    pub n1: usize,
    pub n2: usize,
    pub a1: f64,
    pub a2: f64,
    pub l1: f64,
    pub l2: f64,
    /// True when the grid is below the recommended 8 points per magnetic length.
    pub resolution_warning: bool,
    u1: Vec<Complex64>,
    u2: Vec<Complex64>,
    tau: Vec<f64>,
}

/// Build links with exact analytic plaquette fluxes.
///
/// Resolution rule: errors below the hard floor N < 2·√(pB_max)·L/(2π); sets
/// `resolution_warning` below the recommended N < 8·√(pB_max)·L/(2π).
pub fn build_links(field: &FieldSpec, p: u32, n1: usize, n2: usize) -> Result<LatticeOperator> {
    build_links_with_gauge(field, p, n1, n2, GaugeOrder::ColumnMajor)
}

pub fn build_links_with_gauge(
    field: &FieldSpec,
    p: u32,
    n1: usize,
    n2: usize,
    gauge: GaugeOrder,
) -> Result<LatticeOperator> {
    if n1 < 8 || n2 < 8 {
        return Err(Error::Config("grid sizes must be ≥ 8".into()));
    }
    if p < 1 {
        return Err(Error::Config("tensor power p must be ≥ 1".into()));
    }
    let l1 = field.torus.l1;
    let l2 = field.torus.l2;
    let scale = (p as f64 * field.b_max()).sqrt() / (2.0 * PI);
    if (n1 as f64) < 2.0 * scale * l1 || (n2 as f64) < 2.0 * scale * l2 {
        return Err(Error::UnderResolved);
    }
    let resolution_warning = (n1 as f64) < 8.0 * scale * l1 || (n2 as f64) < 8.0 * scale * l2;

    let a1 = l1 / n1 as f64;
    let a2 = l2 / n2 as f64;

    // Exact cell fluxes Φ(i,j) = p·∫∫ B.
    let mut flux = vec![0.0f64; n1 * n2];
    for j in 0..n2 {
        for i in 0..n1 {
            flux[j * n1 + i] =
                p as f64 * field.flux_over_cell(i as f64 * a1, j as f64 * a2, a1, a2);
        }
    }

    let mut th1 = vec![0.0f64; n1 * n2]; // U = exp(-i·th)
    let mut th2 = vec![0.0f64; n1 * n2];
    match gauge {
        GaugeOrder::ColumnMajor => {
            // A2(i,j) = Σ_{i'<i} F(i',j); twist on the i = N1-1 column of U1.
            for j in 0..n2 {
                let mut acc = 0.0;
                for i in 0..n1 {
                    th2[j * n1 + i] = acc;
                    acc += flux[j * n1 + i];
                }
            }
            let mut row_acc = 0.0;
            for j in 0..n2 {
                th1[j * n1 + (n1 - 1)] = -row_acc;
                let row_sum: f64 = (0..n1).map(|i| flux[j * n1 + i]).sum();
                row_acc += row_sum;
            }
        }
        GaugeOrder::RowMajor => {
            // A1(i,j) = -Σ_{j'<j} F(i,j'); twist on the j = N2-1 row of U2.
            for i in 0..n1 {
                let mut acc = 0.0;
                for j in 0..n2 {
                    th1[j * n1 + i] = -acc;
                    acc += flux[j * n1 + i];
                }
            }
            let mut col_acc = 0.0;
            for i in 0..n1 {
                th2[(n2 - 1) * n1 + i] = col_acc;
                let col_sum: f64 = (0..n2).map(|j| flux[j * n1 + i]).sum();
                col_acc += col_sum;
            }
        }
    }
    let u1: Vec<Complex64> = th1.iter().map(|&t| Complex64::new(0.0, -t).exp()).collect();
    let u2: Vec<Complex64> = th2.iter().map(|&t| Complex64::new(0.0, -t).exp()).collect();

    let mut tau = vec![0.0f64; n1 * n2];
    for j in 0..n2 {
        for i in 0..n1 {
            tau[j * n1 + i] = field.tau(i as f64 * a1, j as f64 * a2);
        }
    }

    Ok(LatticeOperator {
        p,
        n1,
        n2,
        a1,
        a2,
        l1,
        l2,
        resolution_warning,
        u1,
        u2,
        tau,
    })
}

impl LatticeOperator {
    pub fn dim(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn cell_area(&self) -> f64 {
        self.a1 * self.a2
    }

    pub fn links(&self) -> (&[Complex64], &[Complex64]) {
        (&self.u1, &self.u2)
    }

    pub fn tau_samples(&self) -> &[f64] {
        &self.tau
    }

    /// Position of site s on the torus.
    pub fn site_position(&self, s: usize) -> [f64; 2] {
        let i = s % self.n1;
        let j = s / self.n1;
        [i as f64 * self.a1, j as f64 * self.a2]
    }

    /// Plaquette phase at cell (i,j), computed from the links.
    pub fn plaquette(&self, i: usize, j: usize) -> Complex64 {
        let n1 = self.n1;
        let ip = (i + 1) % n1;
        let jp = (j + 1) % self.n2;
        self.u1[j * n1 + i] * self.u2[j * n1 + ip]
            * self.u1[jp * n1 + i].conj()
            * self.u2[j * n1 + i].conj()
    }

    /// Product of all plaquette phases; 1 exactly by flux quantization.
    pub fn plaquette_product(&self) -> Complex64 {
        let mut prod = Complex64::ONE;
        for j in 0..self.n2 {
            for i in 0..self.n1 {
                prod *= self.plaquette(i, j);
            }
        }
        prod
    }

    /// Gershgorin upper bound on the spectrum of Δ^{L^p}.
    pub fn upper_bound(&self) -> f64 {
        4.0 / (self.a1 * self.a1) + 4.0 / (self.a2 * self.a2)
    }

    /// Gershgorin upper bound on the spectrum of Δ_p.
    pub fn upper_bound_renormalized(&self) -> f64 {
        let tmin = self.tau.iter().cloned().fold(f64::INFINITY, f64::min);
        self.upper_bound() - self.p as f64 * tmin
    }

    /// Covariant 5-point stencil, y = Δ^{L^p} v.
    pub fn matvec(&self, v: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        self.stencil(v, out, false)
    }

    /// y = Δ_p v = Δ^{L^p} v - p·τ·v.
    pub fn renormalized_matvec(&self, v: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        self.stencil(v, out, true)
    }

    fn stencil(&self, v: &[Complex64], out: &mut [Complex64], renorm: bool) -> Result<()> {
        let n1 = self.n1;
        let n2 = self.n2;
        if v.len() != n1 * n2 || out.len() != n1 * n2 {
            return Err(Error::SizeMismatch);
        }
        let w1 = 1.0 / (self.a1 * self.a1);
        let w2 = 1.0 / (self.a2 * self.a2);
        let diag = 2.0 * (w1 + w2);
        let u1 = &self.u1;
        let u2 = &self.u2;
        let tau = &self.tau;
        let pf = self.p as f64;

        out.par_chunks_mut(n1).enumerate().for_each(|(j, row)| {
            let jn = j * n1;
            let jn_n = ((j + 1) % n2) * n1;
            let jn_s = ((j + n2 - 1) % n2) * n1;
            for i in 0..n1 {
                let s = jn + i;
                let e = jn + (i + 1) % n1;
                let w = jn + (i + n1 - 1) % n1;
                let mut acc = diag * v[s]
                    - w1 * (u1[s] * v[e] + u1[w].conj() * v[w])
                    - w2 * (u2[s] * v[jn_n + i] + u2[jn_s + i].conj() * v[jn_s + i]);
                if renorm {
                    acc -= pf * tau[s] * v[s];
                }
                row[i] = acc;
            }
        });
        Ok(())
    }

    /// Conjugate the links by a unit-modulus site field; the spectrum is
    /// unchanged and all plaquettes are preserved exactly.
    pub fn gauge_transform(&self, phases: &[Complex64]) -> Result<LatticeOperator> {
        if phases.len() != self.dim() {
            return Err(Error::SizeMismatch);
        }
        if phases.iter().any(|g| (g.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::NonUnitPhase);
        }
        let n1 = self.n1;
        let n2 = self.n2;
        let mut u1 = self.u1.clone();
        let mut u2 = self.u2.clone();
        for j in 0..n2 {
            for i in 0..n1 {
                let s = j * n1 + i;
                let e = j * n1 + (i + 1) % n1;
                let n = ((j + 1) % n2) * n1 + i;
                u1[s] = phases[s] * self.u1[s] * phases[e].conj();
                u2[s] = phases[s] * self.u2[s] * phases[n].conj();
            }
        }
        Ok(LatticeOperator {
            u1,
            u2,
            ..self.clone()
        })
    }

    /// Debug dump: header (magic "MAGL", N1, N2 as u32 LE, u32 reserved),
    /// then U1 and U2 as little-endian complex64 (f32 re, f32 im) arrays.
    pub fn dump_links<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(b"MAGL")?;
        w.write_all(&(self.n1 as u32).to_le_bytes())?;
        w.write_all(&(self.n2 as u32).to_le_bytes())?;
        w.write_all(&0u32.to_le_bytes())?;
        for arr in [&self.u1, &self.u2] {
            for c in arr.iter() {
                w.write_all(&(c.re as f32).to_le_bytes())?;
                w.write_all(&(c.im as f32).to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Read back a link dump; returns (n1, n2, u1, u2).
pub fn read_links_dump<R: Read>(
    mut r: R,
) -> std::io::Result<(usize, usize, Vec<Complex64>, Vec<Complex64>)> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[0..4] != b"MAGL" {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            "bad magic",
        ));
    }
    let n1 = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let n2 = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let mut read_arr = |len: usize| -> std::io::Result<Vec<Complex64>> {
        let mut buf = vec![0u8; len * 8];
        r.read_exact(&mut buf)?;
        Ok(buf
            .chunks_exact(8)
            .map(|c| {
                let re = f32::from_le_bytes(c[0..4].try_into().unwrap());
                let im = f32::from_le_bytes(c[4..8].try_into().unwrap());
                Complex64::new(re as f64, im as f64)
            })
            .collect())
    };
    let u1 = read_arr(n1 * n2)?;
    let u2 = read_arr(n1 * n2)?;
    Ok((n1, n2, u1, u2))
}

/// Zero-field operator with all links 1 (the plain discrete Laplacian); used
/// by solver tests against the analytic plane-wave spectrum.
pub fn free_laplacian(l1: f64, l2: f64, n1: usize, n2: usize) -> LatticeOperator {
    LatticeOperator {
        p: 1,
        n1,
        n2,
        a1: l1 / n1 as f64,
        a2: l2 / n2 as f64,
        l1,
        l2,
        resolution_warning: false,
        u1: vec![Complex64::ONE; n1 * n2],
        u2: vec![Complex64::ONE; n1 * n2],
        tau: vec![0.0; n1 * n2],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{build_field, FourierMode, TorusSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_torus() -> TorusSpec {
        TorusSpec::new(1.0, 1.0).unwrap()
    }

    fn two_mode_field() -> FieldSpec {
        build_field(
            unit_torus(),
            1,
            &[FourierMode::new(1, 0, 0.5, 0.0), FourierMode::new(0, 1, 0.5, 0.0)],
        )
        .unwrap()
    }

    fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn constant_field_uniform_plaquettes() {
        let f = build_field(unit_torus(), 1, &[]).unwrap();
        let op = build_links(&f, 1, 8, 8).unwrap();
        let expect = Complex64::new(0.0, -2.0 * PI / 64.0).exp();
        for j in 0..8 {
            for i in 0..8 {
                assert!((op.plaquette(i, j) - expect).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn plaquette_product_is_unity() {
        let f = two_mode_field();
        let op = build_links(&f, 5, 64, 64).unwrap();
        let prod = op.plaquette_product();
        assert!((prod - Complex64::ONE).norm() < 1e-12, "product {prod}");
    }

    #[test]
    fn gauge_orders_share_plaquettes() {
        let f = two_mode_field();
        let a = build_links_with_gauge(&f, 3, 32, 48, GaugeOrder::ColumnMajor).unwrap();
        let b = build_links_with_gauge(&f, 3, 32, 48, GaugeOrder::RowMajor).unwrap();
        for j in 0..48 {
            for i in 0..32 {
                assert!((a.plaquette(i, j) - b.plaquette(i, j)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn resolution_floor_enforced() {
        let f = build_field(unit_torus(), 1, &[]).unwrap();
        let err = build_links(&f, 1024, 16, 16).unwrap_err();
        assert_eq!(err.to_string(), "grid under-resolves magnetic length");
        let op = build_links(&f, 32, 16, 16).unwrap();
        assert!(op.resolution_warning);
        let op = build_links(&f, 1, 64, 64).unwrap();
        assert!(!op.resolution_warning);
    }

    #[test]
    fn free_laplacian_kernel_and_plane_waves() {
        let op = free_laplacian(1.0, 1.0, 16, 16);
        let n = op.dim();
        let v = vec![Complex64::ONE; n];
        let mut out = vec![Complex64::ZERO; n];
        op.matvec(&v, &mut out).unwrap();
        for y in &out {
            assert!(y.norm() < 1e-10);
        }
        // Plane wave: eigenvalue Σ_μ (4/a_μ²) sin²(π k_μ / N_μ).
        for (k1, k2) in [(1i32, 0i32), (3, 2), (0, 5)] {
            let mut v = vec![Complex64::ZERO; n];
            for j in 0..16 {
                for i in 0..16 {
                    let phase = 2.0 * PI * (k1 as f64 * i as f64 + k2 as f64 * j as f64) / 16.0;
                    v[j * 16 + i] = Complex64::new(0.0, phase).exp();
                }
            }
            let mut out = vec![Complex64::ZERO; n];
            op.matvec(&v, &mut out).unwrap();
            let lam = (4.0 / (op.a1 * op.a1)) * (PI * k1 as f64 / 16.0).sin().powi(2)
                + (4.0 / (op.a2 * op.a2)) * (PI * k2 as f64 / 16.0).sin().powi(2);
            for (y, x) in out.iter().zip(&v) {
                assert!((y - lam * x).norm() < 1e-9 * lam.max(1.0));
            }
        }
    }

    #[test]
    fn matvec_hermitian_and_psd() {
        let f = two_mode_field();
        let op = build_links(&f, 4, 32, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = op.dim();
        for _ in 0..5 {
            let v = rand_vec(&mut rng, n);
            let w = rand_vec(&mut rng, n);
            let mut hv = vec![Complex64::ZERO; n];
            let mut hw = vec![Complex64::ZERO; n];
            op.matvec(&v, &mut hv).unwrap();
            op.matvec(&w, &mut hw).unwrap();
            let lhs = inner(&hv, &w);
            let rhs = inner(&v, &hw);
            let scale = (norm(&hv) * norm(&w)).max(1.0);
            assert!((lhs - rhs).norm() <= 1e-10 * scale);
            let quad = inner(&v, &hv).re;
            assert!(quad >= -1e-10 * norm(&v).powi(2));
        }
    }

    #[test]
    fn renormalized_matches_matvec_shift() {
        let f = two_mode_field();
        let op = build_links(&f, 2, 32, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = op.dim();
        let v = rand_vec(&mut rng, n);
        let mut full = vec![Complex64::ZERO; n];
        let mut ren = vec![Complex64::ZERO; n];
        op.matvec(&v, &mut full).unwrap();
        op.renormalized_matvec(&v, &mut ren).unwrap();
        for s in 0..n {
            let expect = full[s] - 2.0 * op.tau_samples()[s] * v[s];
            assert!((ren[s] - expect).norm() < 1e-12 * expect.norm().max(1.0));
        }
        let w = rand_vec(&mut rng, n);
        let mut hw = vec![Complex64::ZERO; n];
        op.renormalized_matvec(&w, &mut hw).unwrap();
        let mut hv = vec![Complex64::ZERO; n];
        op.renormalized_matvec(&v, &mut hv).unwrap();
        let scale = (norm(&hv) * norm(&w)).max(1.0);
        assert!((inner(&hv, &w) - inner(&v, &hw)).norm() <= 1e-10 * scale);
    }

    #[test]
    fn gauge_transform_preserves_plaquettes() {
        let f = two_mode_field();
        let op = build_links(&f, 3, 32, 32).unwrap();
        let same = op.gauge_transform(&vec![Complex64::ONE; op.dim()]).unwrap();
        assert_eq!(same.links().0, op.links().0);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let phases: Vec<Complex64> = (0..op.dim())
            .map(|_| Complex64::new(0.0, rng.gen_range(0.0..2.0 * PI)).exp())
            .collect();
        let turned = op.gauge_transform(&phases).unwrap();
        for j in 0..32 {
            for i in 0..32 {
                assert!((turned.plaquette(i, j) - op.plaquette(i, j)).norm() < 1e-13);
            }
        }
        let mut bad = phases.clone();
        bad[7] *= 1.5;
        assert!(matches!(op.gauge_transform(&bad), Err(Error::NonUnitPhase)));
    }

    #[test]
    fn size_mismatch_rejected() {
        let op = free_laplacian(1.0, 1.0, 8, 8);
        let v = vec![Complex64::ONE; 63];
        let mut out = vec![Complex64::ZERO; 64];
        assert!(matches!(op.matvec(&v, &mut out), Err(Error::SizeMismatch)));
    }

    #[test]
    fn dump_round_trip() {
        let f = two_mode_field();
        let op = build_links(&f, 2, 16, 8).unwrap();
        let mut buf = Vec::new();
        op.dump_links(&mut buf).unwrap();
        assert_eq!(&buf[0..4], b"MAGL");
        assert_eq!(buf.len(), 16 + 2 * 8 * (16 * 8));
        let (n1, n2, u1, u2) = read_links_dump(buf.as_slice()).unwrap();
        assert_eq!((n1, n2), (16, 8));
        for (a, b) in u1.iter().zip(op.links().0) {
            assert!((a - b).norm() < 1e-6); // f32 storage
        }
        assert_eq!(u2.len(), op.links().1.len());
    }
}
