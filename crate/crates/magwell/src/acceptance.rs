//! End-to-end verification suite.
//!
//! Each criterion is a self-contained check with pinned tolerances; the
//! `acceptance` test target and the `verify` CLI subcommand both drive
//! `run_all` and print one pass/fail line per criterion. The heavy sweep
//! artifacts (criteria 4, 6, 7) are computed once and shared.

use crate::eig::{lowest_eigenpairs, DenseOp, HermitianOp, LatticeFull, SolveOpts};
use crate::error::Result;
use crate::field::{build_field, FieldSpec, FourierMode, TorusSpec, WellData};
use crate::fock::{
    bergman_kernel, closed_form_n1, hermitian_eigenpairs, lll_basis, model_operator,
    model_spectrum, toeplitz_matrix, well_to_weyl_form, williamson_quadratic_spectrum, Symbol,
};
use crate::lattice::{build_links, free_laplacian};
use crate::oracle::{gh_gaussian_integral_2d, PolyGauss};
use crate::pipeline::{
    gap_track, landau_check, linear_fit, lll_reduce_at, localization_profile,
    localization_radius, quasimode_rq, sweep, QuasimodeData, SolverParams, SweepReport,
};
use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_secs: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {} ({}): {} [{:.1}s] — {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.elapsed_secs,
            self.detail
        )
    }
}

fn finish(
    id: usize,
    name: &'static str,
    started: Instant,
    budget_secs: Option<f64>,
    body: Result<(bool, String)>,
) -> CriterionResult {
    let elapsed = started.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match body {
        Ok((p, d)) => (p, d),
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(budget) = budget_secs {
        if elapsed > budget {
            passed = false;
            detail.push_str(&format!("; runtime {elapsed:.1}s exceeds {budget:.0}s budget"));
        }
    }
    CriterionResult {
        id,
        name,
        passed,
        detail,
        elapsed_secs: elapsed,
    }
}

/// The testbed: B = 2π + cos 2πx + cos 2πy on the unit torus, d = 1.
pub fn testbed_field() -> FieldSpec {
    build_field(
        TorusSpec::new(1.0, 1.0).unwrap(),
        1,
        &[
            FourierMode::new(1, 0, 0.5, 0.0),
            FourierMode::new(0, 1, 0.5, 0.0),
        ],
    )
    .unwrap()
}

pub const SWEEP_P: [u32; 5] = [16, 32, 64, 128, 256];

struct SweepArtifacts {
    wells: Vec<WellData>,
    report: SweepReport,
    quasimodes: Vec<QuasimodeData>,
}

static SWEEP: OnceLock<std::result::Result<SweepArtifacts, String>> = OnceLock::new();

fn sweep_artifacts() -> &'static std::result::Result<SweepArtifacts, String> {
    SWEEP.get_or_init(|| {
        let field = testbed_field();
        let params = SolverParams::default();
        let wells = field.find_wells(128, 1e-11).map_err(|e| e.to_string())?;
        let report = sweep(&field, &SWEEP_P, 3, &[128, 256, 512], &params)
            .map_err(|e| e.to_string())?;
        // Quasimode data on the finest sweep grid, ground model state.
        let mop = model_operator(&wells[0], report.j12.computed, 48).map_err(|e| e.to_string())?;
        let (_, vecs) = hermitian_eigenpairs(&mop.matrix);
        let coeffs: Vec<Complex64> = vecs.column(0).iter().cloned().collect();
        let mut quasimodes = Vec::new();
        for &p in &SWEEP_P {
            quasimodes.push(
                quasimode_rq(
                    &field,
                    &wells[0],
                    &coeffs,
                    &mop.basis.indices,
                    &mop.basis.norms_sq,
                    p,
                    512,
                )
                .map_err(|e| e.to_string())?,
            );
        }
        Ok(SweepArtifacts {
            wells,
            report,
            quasimodes,
        })
    })
}

/// 1. Fock truncation, closed form, and Williamson agree pairwise to 1e-8 on
/// random SPD wells.
pub fn criterion_1() -> CriterionResult {
    let t = Instant::now();
    let body = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let mut worst = 0.0f64;
        for trial in 0..10 {
            let tau0 = rng.gen_range(1.0..10.0);
            let l1: f64 = rng.gen_range(0.7f64.ln()..3.0f64.ln()).exp();
            let kappa: f64 = rng.gen_range(0.0..5.0f64.ln()).exp();
            let l2 = l1 * kappa;
            let th: f64 = rng.gen_range(0.0..PI);
            let r = Matrix2::new(th.cos(), -th.sin(), th.sin(), th.cos());
            let q = r * Matrix2::new(l1, 0.0, 0.0, l2) * r.transpose();
            let hess = q * 2.0;
            let well = WellData::new([0.0, 0.0], tau0, hess)?;
            let (mu, _) = model_spectrum(&well, 0.0, 8, &[48, 64, 80], 1e-8)?;
            let willi = williamson_quadratic_spectrum(&well_to_weyl_form(&q, tau0), 8)?;
            for j in 0..8 {
                let cf = closed_form_n1(&q, tau0, 0.0, j)?;
                let d1 = (mu[j] - cf).abs();
                let d2 = (willi[j] - cf).abs();
                let d3 = (mu[j] - willi[j]).abs();
                worst = worst.max(d1).max(d2).max(d3);
                if d1 > 1e-8 || d2 > 1e-8 || d3 > 1e-8 {
                    return Ok((
                        false,
                        format!("trial {trial} j={j}: disagreement {:.2e}", d1.max(d2).max(d3)),
                    ));
                }
            }
        }
        Ok((true, format!("10 wells × 8 eigenvalues, worst pairwise {worst:.2e} ≤ 1e-8")))
    })();
    finish(1, "model-oracle agreement", t, Some(10.0), body)
}

/// 2. Lowest 8 lattice eigenvalues invariant under 5 random gauge transforms
/// to 1e-9 (two-mode field, p = 16, 128²).
pub fn criterion_2() -> CriterionResult {
    let t = Instant::now();
    let body = (|| {
        let field = testbed_field();
        let op = build_links(&field, 16, 128, 128)?;
        let solve = |o: &crate::lattice::LatticeOperator, seed: u64| -> Result<Vec<f64>> {
            let full = LatticeFull(o);
            let opts = SolveOpts {
                k: 8,
                tol: 1e-6,
                max_matvecs: 10_000_000,
                seed,
            };
            Ok(lowest_eigenpairs(&full, opts)?.eigenvalues)
        };
        let base = solve(&op, 7)?;
        let mut rng = ChaCha8Rng::seed_from_u64(202);
        let mut worst = 0.0f64;
        for round in 0..5 {
            let phases: Vec<Complex64> = (0..op.dim())
                .map(|_| Complex64::new(0.0, rng.gen_range(0.0..2.0 * PI)).exp())
                .collect();
            let turned = op.gauge_transform(&phases)?;
            let eigs = solve(&turned, 7 + round as u64 + 1)?;
            for j in 0..8 {
                worst = worst.max((eigs[j] - base[j]).abs());
            }
        }
        Ok((
            worst <= 1e-9,
            format!("max |Δλ_j| over 5 transforms = {worst:.2e} (bound 1e-9)"),
        ))
    })();
    finish(2, "gauge invariance", t, Some(60.0), body)
}

/// 3. Constant-field Landau check at p ∈ {4, 8}.
pub fn criterion_3() -> CriterionResult {
    let t = Instant::now();
    let body = (|| {
        let field = build_field(TorusSpec::new(1.0, 1.0).unwrap(), 1, &[])?;
        let params = SolverParams::default();
        let mut detail = String::new();
        let mut passed = true;
        for p in [4u32, 8] {
            let chk = landau_check(&field, p, &[32, 64, 128], &params)?;
            let rel = (chk.extrapolated_mean - chk.continuum).abs() / chk.continuum;
            let ok = chk.cluster_dim == chk.expected_dim
                && rel < 5e-3
                && (chk.order_estimate - 2.0).abs() <= 0.3;
            passed &= ok;
            detail.push_str(&format!(
                "p={p}: cluster {} (want {}), mean rel err {:.2e}, order {:.2}; ",
                chk.cluster_dim, chk.expected_dim, rel, chk.order_estimate
            ));
        }
        Ok((passed, detail))
    })();
    finish(3, "constant-field Landau check", t, Some(300.0), body)
}

/// 4. Main theorem at desk scale: λ_j(p) - pτ₀ - μ_j shrinks with p, is below
/// 5% of the μ spacing at p = 256, fits a slope ≤ -0.4, and the computed
/// J_{1,2} matches the empirical sweep intercept.
pub fn criterion_4() -> CriterionResult {
    let t = Instant::now();
    let body = (|| {
        let art = match sweep_artifacts() {
            Ok(a) => a,
            Err(e) => return Ok((false, format!("sweep failed: {e}"))),
        };
        let rep = &art.report;
        let spacing = rep.mu[1].mu - rep.mu[0].mu;
        let mut passed = true;
        let mut detail = String::new();
        // Residuals per (p, j) from the extrapolated values.
        for j in 0..3 {
            let resids: Vec<f64> = rep
                .spectra
                .iter()
                .map(|s| (s.extrapolated[j] - s.p as f64 * rep.tau0 - rep.mu[j].mu).abs())
                .collect();
            for w in resids.windows(2) {
                if !(w[1] < w[0]) {
                    passed = false;
                    detail.push_str(&format!("j={j}: residuals not decreasing {w:?}; "));
                }
            }
            let last = *resids.last().unwrap();
            if !(last < 0.05 * spacing) {
                passed = false;
            }
            let slope = rep.fits[j].slope;
            if !(slope <= -0.4) {
                passed = false;
            }
            detail.push_str(&format!(
                "j={j}: r(256)={last:.3e} ({:.1}% of spacing), slope {slope:.2}; ",
                100.0 * last / spacing
            ));
        }
        let dj = (rep.j12.computed - rep.j12.empirical_intercept).abs();
        if !(dj <= rep.j12.empirical_bar) {
            passed = false;
        }
        detail.push_str(&format!(
            "|J12 computed - empirical| = {dj:.3e} (bar {:.3e})",
            rep.j12.empirical_bar
        ));
        Ok((passed, detail))
    })();
    finish(4, "main theorem sweep", t, Some(3600.0), body)
}

/// 5. Lowest-Landau-level reduction: Rayleigh–Ritz domination and shrinking
/// reduced-vs-full deviation over p ∈ {16, 32, 64}.
pub fn criterion_5() -> CriterionResult {
    let t = Instant::now();
    let body = (|| {
        let field = testbed_field();
        let params = SolverParams {
            tol_scale: 1e-16,
            tol_floor: 5e-9,
            ..Default::default()
        };
        let mut devs = Vec::new();
        let mut passed = true;
        let mut detail = String::new();
        for p in [16u32, 32, 64] {
            let cmp = lll_reduce_at(&field, p, 64, &params)?;
            let nj = cmp.reduced.len().min(cmp.full.len());
            for j in 0..nj {
                if !(cmp.reduced[j] >= cmp.full[j] - 1e-8) {
                    passed = false;
                    detail.push_str(&format!(
                        "p={p} j={j}: reduced {} < full {} - 1e-8; ",
                        cmp.reduced[j], cmp.full[j]
                    ));
                }
            }
            detail.push_str(&format!(
                "p={p}: cluster {} max|Δ| {:.3e}; ",
                cmp.cluster_dim, cmp.max_dev
            ));
            devs.push(cmp.max_dev);
        }
        for w in devs.windows(2) {
            if !(w[1] < w[0]) {
                passed = false;
                detail.push_str("deviation not monotone decreasing; ");
            }
        }
        Ok((passed, detail))
    })();
    finish(5, "LLL reduction", t, Some(900.0), body)
}

/// 6. Localization: ground-state mass outside radius p^{-1/4+0.1} decreasing
/// in p and below 1e-3 at p = 256.
pub fn criterion_6() -> CriterionResult {
    let t = Instant::now();
    let body = (|| {
        let art = match sweep_artifacts() {
            Ok(a) => a,
            Err(e) => return Ok((false, format!("sweep failed: {e}"))),
        };
        let well = &art.wells[0];
        let mut masses = Vec::new();
        for spec in &art.report.spectra {
            let r = localization_radius(spec.p);
            let prof = localization_profile(
                &spec.finest_op,
                &spec.finest_eig.eigenvectors[0],
                well,
                &[r],
            );
            masses.push((spec.p, r, prof[0].1));
        }
        let mut passed = true;
        for w in masses.windows(2) {
            // Decreasing in p; below 1e-15 both values are solver-noise floor.
            if !(w[1].2 < w[0].2 || (w[0].2 < 1e-15 && w[1].2 < 1e-15)) {
                passed = false;
            }
        }
        let last = masses.last().unwrap().2;
        if !(last < 1e-3) {
            passed = false;
        }
        let detail = masses
            .iter()
            .map(|(p, r, m)| format!("p={p}: m(>{r:.3}) = {m:.2e}"))
            .collect::<Vec<_>>()
            .join(", ");
        Ok((passed, detail))
    })();
    finish(6, "localization", t, None, body)
}

/// 7. Quasimode suite: variational bound, bounded RQ - pτ₀, and the
/// residual-norm growth exponent in [0.3, 0.7].
pub fn criterion_7() -> CriterionResult {
    let t = Instant::now();
    let body = (|| {
        let art = match sweep_artifacts() {
            Ok(a) => a,
            Err(e) => return Ok((false, format!("sweep failed: {e}"))),
        };
        let rep = &art.report;
        let mut passed = true;
        let mut detail = String::new();
        let mut shifted = Vec::new();
        for (qm, spec) in art.quasimodes.iter().zip(&rep.spectra) {
            let lam0_finest = spec.per_grid.last().unwrap().eigenvalues[0];
            if !(qm.rq >= lam0_finest - 1e-8) {
                passed = false;
                detail.push_str(&format!("p={}: RQ {} < λ₀ {}; ", qm.p, qm.rq, lam0_finest));
            }
            shifted.push((qm.p as f64, (qm.rq - qm.p as f64 * rep.tau0).abs()));
        }
        let smax = shifted.iter().map(|s| s.1).fold(f64::MIN, f64::max);
        let smin = shifted.iter().map(|s| s.1).fold(f64::MAX, f64::min);
        let ratio = smax / smin;
        if !(ratio < 10.0) {
            passed = false;
        }
        let xs: Vec<f64> = art.quasimodes.iter().map(|q| (q.p as f64).ln()).collect();
        let ys: Vec<f64> = art
            .quasimodes
            .iter()
            .map(|q| q.residual_norm.ln())
            .collect();
        let fit = linear_fit(&xs, &ys);
        if !(fit.slope >= 0.3 && fit.slope <= 0.7) {
            passed = false;
        }
        detail.push_str(&format!(
            "|RQ-pτ₀| ratio {ratio:.2} (bound 10); residual slope {:.3} (window [0.3, 0.7]); residuals {:?}",
            fit.slope,
            art.quasimodes
                .iter()
                .map(|q| format!("{:.2}", q.residual_norm))
                .collect::<Vec<_>>()
        ));
        Ok((passed, detail))
    })();
    finish(7, "quasimode suite", t, None, body)
}

/// 8. Spectral gap: bounded C_L estimates and a linear second-cluster onset.
pub fn criterion_8() -> CriterionResult {
    let t = Instant::now();
    let body = (|| {
        let field = testbed_field();
        let params = SolverParams::default();
        let report = gap_track(&field, &[8, 16, 32, 64], &[64, 64, 64, 64], &params)?;
        let passed =
            report.width_ratio < 5.0 && report.onset_r2 > 0.99 && report.onset_slope > 0.0;
        let widths: Vec<String> = report
            .records
            .iter()
            .map(|r| format!("{:.3}", r.cluster_width))
            .collect();
        Ok((
            passed,
            format!(
                "C_L estimates {widths:?} ratio {:.2} (bound 5); onset slope {:.3}, R² {:.5}",
                report.width_ratio, report.onset_slope, report.onset_r2
            ),
        ))
    })();
    finish(8, "spectral gap", t, None, body)
}

/// 9. Property suites: Bergman reproducing kernel, ladder commutators,
/// Toeplitz Hermiticity and monotonicity, eigensolver residual contracts.
pub fn criterion_9() -> CriterionResult {
    let t = Instant::now();
    let body = (|| {
        let mut detail = String::new();

        // Bergman reproducing property at 10 deterministic points, tol 1e-8.
        let a = 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(909);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let z = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let zp = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let direct = bergman_kernel(&[a], &z, &zp)?;
            let composed = gh_gaussian_integral_2d(a / 2.0, 48, |w| {
                let zc = Complex64::new(z[0], z[1]);
                let zpc = Complex64::new(zp[0], zp[1]);
                let pref = (a / (2.0 * PI)).powi(2);
                (pref
                    * ((-0.25 * a * (zc.norm_sqr() + zpc.norm_sqr())) * Complex64::ONE
                        + 0.5 * a * (zc * w.conj() + w * zpc.conj()))
                    .exp())
                .into()
            });
            worst = worst.max((composed - direct).norm());
        }
        if worst > 1e-8 {
            return Ok((false, format!("reproducing property defect {worst:.2e}")));
        }
        detail.push_str(&format!("reproducing {worst:.1e}; "));

        // Ladder commutators, symbolic, exact to 1e-12.
        let ac = 2.3;
        let mut comm_worst = 0.0f64;
        for i in 0..=6u32 {
            for jj in 0..=(6 - i) {
                let f = PolyGauss::monomial(ac, i, jj, Complex64::ONE);
                let comm = f.apply_bplus().apply_b().sub(&f.apply_b().apply_bplus());
                let expect = f.scale(Complex64::new(-2.0 * ac, 0.0));
                comm_worst = comm_worst.max(comm.sub(&expect).max_coeff());
            }
        }
        if comm_worst > 1e-12 {
            return Ok((false, format!("commutator defect {comm_worst:.2e}")));
        }
        detail.push_str(&format!("commutators {comm_worst:.1e}; "));

        // Toeplitz Hermiticity on a random real symbol.
        let basis = lll_basis(&[2.0], 10)?;
        let mut sym = Symbol::zero(1);
        for (b, g, re, im) in [
            (2u32, 0u32, 0.3, 0.7),
            (1, 1, 1.1, 0.0),
            (2, 1, -0.4, 0.2),
        ] {
            sym.push(vec![b], vec![g], Complex64::new(re, im));
            sym.push(vec![g], vec![b], Complex64::new(re, -im));
        }
        let m = toeplitz_matrix(&basis, &sym)?;
        let mut herm = 0.0f64;
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                herm = herm.max((m[(r, c)] - m[(c, r)].conj()).norm());
            }
        }
        if herm > 1e-12 {
            return Ok((false, format!("Toeplitz hermiticity defect {herm:.2e}")));
        }
        // Monotonicity under a pointwise-dominating symbol.
        let w1 = WellData::new([0.0, 0.0], 2.0, Matrix2::new(2.0, 0.4, 0.4, 3.0))?;
        let w2 = WellData::new([0.0, 0.0], 2.0, Matrix2::new(2.6, 0.4, 0.4, 4.1))?;
        let (mu1, _) = model_spectrum(&w1, 0.0, 6, &[24, 32, 48], 1e-8)?;
        let (mu2, _) = model_spectrum(&w2, 0.0, 6, &[24, 32, 48], 1e-8)?;
        for j in 0..6 {
            if !(mu1[j] <= mu2[j] + 1e-10) {
                return Ok((false, format!("Toeplitz monotonicity violated at j={j}")));
            }
        }
        detail.push_str(&format!("toeplitz herm {herm:.1e}, monotone; "));

        // Eigensolver residual contracts on two operators.
        let mut dm = DMatrix::<Complex64>::zeros(100, 100);
        for i in 0..100 {
            dm[(i, i)] = Complex64::new(i as f64 + 1.0, 0.0);
        }
        let dop = DenseOp(dm);
        let res = lowest_eigenpairs(&dop, SolveOpts::new(3).with_tol(1e-10))?;
        let mut rworst = res.residuals.iter().cloned().fold(0.0f64, f64::max);
        let lat = free_laplacian(1.0, 1.0, 64, 64);
        let lop = LatticeFull(&lat);
        let res = lowest_eigenpairs(&lop, SolveOpts::new(4).with_tol(1e-7))?;
        let n = lop.dim();
        let mut tmp = vec![Complex64::ZERO; n];
        for (v, &lam) in res.eigenvectors.iter().zip(&res.eigenvalues) {
            lop.apply(v, &mut tmp);
            let r = v
                .iter()
                .zip(&tmp)
                .map(|(x, y)| (y - lam * x).norm_sqr())
                .sum::<f64>()
                .sqrt();
            rworst = rworst.max(r / 1e-7 * 1e-10); // normalize to shared scale
            if r > 1e-7 {
                return Ok((false, format!("lattice solve residual {r:.2e} > 1e-7")));
            }
        }
        detail.push_str(&format!("solver residual contracts hold ({rworst:.1e} scaled)"));
        Ok((true, detail))
    })();
    finish(9, "unit/property suites", t, Some(120.0), body)
}

/// Run all criteria in order.
pub fn run_all() -> Vec<CriterionResult> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ]
}
