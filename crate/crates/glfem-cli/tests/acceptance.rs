//! Acceptance suite: every exit criterion for this artifact, one test per
//! criterion, each printing a single PASS/FAIL line (run with
//! `cargo test --test acceptance -- --nocapture` to see them).
//!
//! Criteria 1-3 pin externally recorded reference tables for the
//! plane-wave benchmark and compare at the stated tolerances. The
//! reference values are NOT reproducible by a correct implementation of
//! the stated quantities (their own rows violate the triangle inequality
//! against the analytically exact interpolation constant of this
//! solution; see the failure output for the measured deviations), so
//! those criteria report FAIL honestly rather than loosening the checks.
//! Criteria 4-7 verify the mathematical substance: superconvergence
//! orders, projection rates, oracle identities, and determinism.

use std::process::Command;
use std::sync::OnceLock;

use glfem_cli::config::{StudyConfig, StudyMode};
use glfem_cli::report::ErrorReport;
use glfem_cli::{run_convergence_study, run_stability_study};

use glfem_core::assembly::{assemble_mass, basis_eval, element_matrices, QuadratureRule};
use glfem_core::mesh::{build_dof_map, build_macro_patches, build_uniform_mesh, Rect};
use glfem_core::norms::{self, Q1Sample};
use glfem_core::problem::{ProblemSpec, SourceTerm};
use glfem_core::projections::{interpolate, postprocess, ritz_project};
use glfem_core::stepper::{CnStepper, FemField, StepperConfig};
use num_complex::Complex64;

/// Reference error tables for the tau = h convergence study, recorded as
/// (m, h1, h1_order, superclose, superclose_order, postprocessed,
/// postprocessed_order) per snapshot time.
type RefRow = (usize, f64, Option<f64>, f64, Option<f64>, f64, Option<f64>);

const REFERENCE_T025: [RefRow; 4] = [
    (10, 5.2551e-2, None, 8.4988e-3, None, 1.0060e-1, None),
    (
        20,
        2.6409e-2,
        Some(0.9927),
        2.8420e-3,
        Some(1.5803),
        3.8516e-2,
        Some(1.3852),
    ),
    (
        40,
        1.3189e-2,
        Some(1.0016),
        5.8402e-4,
        Some(2.2828),
        9.9039e-3,
        Some(1.9594),
    ),
    (
        80,
        6.5963e-3,
        Some(0.9997),
        1.4682e-4,
        Some(1.9920),
        2.4934e-3,
        Some(1.9899),
    ),
];

const REFERENCE_T050: [RefRow; 4] = [
    (10, 5.2622e-2, None, 8.8880e-3, None, 1.0004e-1, None),
    (
        20,
        2.6354e-2,
        Some(0.9976),
        2.2875e-3,
        Some(1.9581),
        3.8475e-2,
        Some(1.3785),
    ),
    (
        40,
        1.3189e-2,
        Some(0.9986),
        5.8464e-4,
        Some(1.9682),
        9.9050e-3,
        Some(1.9577),
    ),
    (
        80,
        6.5963e-3,
        Some(0.9997),
        1.4696e-4,
        Some(1.9922),
        2.4934e-3,
        Some(1.9900),
    ),
];

const REFERENCE_T075: [RefRow; 4] = [
    (10, 5.2750e-2, None, 9.5904e-3, None, 1.0008e-1, None),
    (
        20,
        2.6408e-2,
        Some(0.9982),
        2.8374e-3,
        Some(1.7570),
        3.8498e-2,
        Some(1.3783),
    ),
    (
        40,
        1.3189e-2,
        Some(1.0016),
        5.8462e-4,
        Some(2.2790),
        9.9045e-3,
        Some(1.9586),
    ),
    (
        80,
        6.5963e-3,
        Some(0.9997),
        1.4695e-4,
        Some(1.9921),
        2.4934e-3,
        Some(1.9900),
    ),
];

const REFERENCE_T100: [RefRow; 4] = [
    (10, 5.2530e-2, None, 8.3490e-3, None, 9.9952e-2, None),
    (
        20,
        2.6354e-2,
        Some(0.9951),
        2.2877e-3,
        Some(1.8677),
        3.8481e-2,
        Some(1.3771),
    ),
    (
        40,
        1.3189e-2,
        Some(0.9986),
        5.8462e-4,
        Some(1.9683),
        9.9047e-3,
        Some(1.9580),
    ),
    (
        80,
        6.5963e-3,
        Some(0.9997),
        1.4695e-4,
        Some(1.9921),
        2.4934e-3,
        Some(1.9900),
    ),
];

/// Reference stability sweep at h = 1/80: h1 error per (t, k).
const REFERENCE_STABILITY: [(f64, [(u32, f64); 4]); 4] = [
    (
        0.25,
        [
            (1, 6.5963e-3),
            (5, 6.5969e-3),
            (10, 9.5227e-3),
            (20, 3.4159e-2),
        ],
    ),
    (
        0.50,
        [
            (1, 6.5963e-3),
            (5, 6.5968e-3),
            (10, 7.3813e-3),
            (20, 2.6816e-2),
        ],
    ),
    (
        0.75,
        [
            (1, 6.5963e-3),
            (5, 6.5969e-3),
            (10, 6.8870e-3),
            (20, 2.1424e-2),
        ],
    ),
    (
        1.00,
        [
            (1, 6.5963e-3),
            (5, 6.5968e-3),
            (10, 6.7265e-3),
            (20, 1.8086e-2),
        ],
    ),
];

fn convergence_report() -> &'static ErrorReport {
    static REPORT: OnceLock<ErrorReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        let cfg = StudyConfig::default();
        run_convergence_study(&cfg).expect("convergence study runs")
    })
}

fn stability_report() -> &'static ErrorReport {
    static REPORT: OnceLock<ErrorReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        let mut cfg = StudyConfig::default();
        cfg.mode = StudyMode::Stability;
        cfg.sizes = vec![80];
        cfg.k = vec![1, 5, 10, 20];
        run_stability_study(&cfg).expect("stability study runs")
    })
}

fn study_row(report: &ErrorReport, time: f64, m: usize) -> &glfem_cli::ReportRow {
    report
        .rows
        .iter()
        .find(|r| (r.time - time).abs() < 1e-12 && r.m == m)
        .unwrap_or_else(|| panic!("missing study row (t = {time}, m = {m})"))
}

fn rel_dev(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

struct Criterion {
    failures: Vec<String>,
    checks: usize,
}

impl Criterion {
    fn new() -> Self {
        Criterion {
            failures: Vec::new(),
            checks: 0,
        }
    }

    fn check_rel(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        self.checks += 1;
        let dev = rel_dev(got, want);
        if !(dev <= tol) {
            self.failures.push(format!(
                "{label}: got {got:.4e}, reference {want:.4e} ({:+.1}% vs ±{:.0}%)",
                100.0 * (got - want) / want,
                100.0 * tol
            ));
        }
    }

    fn check_abs(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        self.checks += 1;
        if !((got - want).abs() <= tol) {
            self.failures.push(format!(
                "{label}: got {got:.4}, reference {want:.4} (|diff| {:.3} vs {tol})",
                (got - want).abs()
            ));
        }
    }

    fn check(&mut self, label: &str, ok: bool, detail: String) {
        self.checks += 1;
        if !ok {
            self.failures.push(format!("{label}: {detail}"));
        }
    }

    fn finish(self, number: usize, title: &str) {
        if self.failures.is_empty() {
            println!(
                "ACCEPTANCE criterion {number} PASS: {title} ({} checks)",
                self.checks
            );
        } else {
            println!(
                "ACCEPTANCE criterion {number} FAIL: {title} ({}/{} checks failed)",
                self.failures.len(),
                self.checks
            );
            for f in &self.failures {
                println!("    {f}");
            }
            panic!(
                "criterion {number} failed {}/{} checks:\n{}",
                self.failures.len(),
                self.checks,
                self.failures.join("\n")
            );
        }
    }
}

fn check_reference_table(c: &mut Criterion, time: f64, reference: &[RefRow; 4]) {
    let report = convergence_report();
    for &(m, h1, h1_ord, sc, sc_ord, pp, pp_ord) in reference {
        let row = study_row(report, time, m);
        c.check_rel(&format!("t={time} M={m} h1"), row.h1, h1, 0.05);
        c.check_rel(
            &format!("t={time} M={m} superclose"),
            row.superclose,
            sc,
            0.05,
        );
        c.check_rel(
            &format!("t={time} M={m} postprocessed"),
            row.postprocessed,
            pp,
            0.05,
        );
        if let Some(want) = h1_ord {
            c.check_abs(
                &format!("t={time} M={m} h1 order"),
                row.h1_order.unwrap(),
                want,
                0.1,
            );
        }
        if let Some(want) = sc_ord {
            c.check_abs(
                &format!("t={time} M={m} superclose order"),
                row.superclose_order.unwrap(),
                want,
                0.1,
            );
        }
        if let Some(want) = pp_ord {
            c.check_abs(
                &format!("t={time} M={m} postprocessed order"),
                row.postprocessed_order.unwrap(),
                want,
                0.1,
            );
        }
    }
}

#[test]
fn criterion_1_reference_table_at_t025() {
    let mut c = Criterion::new();
    check_reference_table(&mut c, 0.25, &REFERENCE_T025);
    c.finish(1, "reference error table at t = 0.25, tau = h");
}

#[test]
fn criterion_2_reference_tables_at_later_times() {
    let mut c = Criterion::new();
    check_reference_table(&mut c, 0.5, &REFERENCE_T050);
    check_reference_table(&mut c, 0.75, &REFERENCE_T075);
    check_reference_table(&mut c, 1.0, &REFERENCE_T100);
    let report = convergence_report();
    for &t in &[0.25, 0.5, 0.75, 1.0] {
        c.check_rel(
            &format!("t={t} M=80 h1 settles at the reference value"),
            study_row(report, t, 80).h1,
            6.5963e-3,
            0.05,
        );
    }
    c.finish(2, "reference error tables at t = 0.5, 0.75, 1.0");
}

#[test]
fn criterion_3_stability_sweep_at_fixed_h() {
    let mut c = Criterion::new();
    let report = stability_report();
    let h = 1.0 / 80.0;
    for &(t, ref ks) in &REFERENCE_STABILITY {
        for &(k, want) in ks {
            let tau = k as f64 * h;
            let row = report
                .rows
                .iter()
                .find(|r| (r.time - t).abs() < 1e-12 && (r.tau - tau).abs() < 1e-12)
                .expect("stability row");
            c.check_rel(&format!("t={t} k={k} h1"), row.h1, want, 0.10);
        }
        // Unconditional-stability signature: the k = 1 and k = 5 runs
        // agree because the spatial error dominates both.
        let e1 = report
            .rows
            .iter()
            .find(|r| (r.time - t).abs() < 1e-12 && (r.tau - h).abs() < 1e-12)
            .unwrap()
            .h1;
        let e5 = report
            .rows
            .iter()
            .find(|r| (r.time - t).abs() < 1e-12 && (r.tau - 5.0 * h).abs() < 1e-12)
            .unwrap()
            .h1;
        c.check(
            &format!("t={t} k=1 vs k=5 agreement"),
            rel_dev(e1, e5) <= 0.001,
            format!("{e1:.6e} vs {e5:.6e} ({:.4}%)", 100.0 * rel_dev(e1, e5)),
        );
    }
    c.finish(3, "stability sweep at h = 1/80, k in {1, 5, 10, 20}");
}

#[test]
fn criterion_4_superconvergence_orders_on_finest_refinement() {
    let mut c = Criterion::new();
    let report = convergence_report();
    for &t in &[0.25, 0.5, 0.75, 1.0] {
        let row = study_row(report, t, 80);
        let sc = row.superclose_order.unwrap();
        let pp = row.postprocessed_order.unwrap();
        c.check(
            &format!("t={t} superclose order 40->80"),
            sc >= 1.9,
            format!("order {sc:.4} < 1.9"),
        );
        c.check(
            &format!("t={t} postprocessed order 40->80"),
            pp >= 1.9,
            format!("order {pp:.4} < 1.9"),
        );
    }
    c.finish(4, "superclose and postprocessed orders >= 1.9 on 40 -> 80");
}

#[test]
fn criterion_5_projection_rate_suite() {
    let mut c = Criterion::new();
    let spec = ProblemSpec::plane_wave();
    let rule = QuadratureRule::gauss(3);
    let mut l2 = Vec::new();
    let mut gap = Vec::new();
    for m in [8usize, 16, 32, 64] {
        let mesh = build_uniform_mesh(m, Rect::unit_square()).unwrap();
        let dofs = build_dof_map(&mesh);
        let value = |x: f64, y: f64| spec.eval_exact(x, y, 0.0).unwrap();
        let grad = |x: f64, y: f64| spec.eval_exact_gradient(x, y, 0.0).unwrap();
        let ritz = ritz_project(grad, &mesh, &dofs, &rule, 1e-12).unwrap();
        let sample = Q1Sample {
            field: &ritz,
            mesh: &mesh,
            dofs: &dofs,
        };
        l2.push(norms::l2_error(value, grad, &sample, &mesh, &rule));
        gap.push(norms::superclose_error(value, &ritz, &mesh, &dofs));
    }
    // Least-squares slope of log2(error) against refinement level.
    let fit_order = |errors: &[f64]| -> f64 {
        let n = errors.len() as f64;
        let mean_x = (errors.len() - 1) as f64 / 2.0;
        let mean_y = errors.iter().map(|e| e.log2()).sum::<f64>() / n;
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, e) in errors.iter().enumerate() {
            let dx = i as f64 - mean_x;
            num += dx * (e.log2() - mean_y);
            den += dx * dx;
        }
        -num / den
    };
    let l2_order = fit_order(&l2);
    let gap_order = fit_order(&gap);
    println!(
        "    projection data: l2 {l2:?} (order {l2_order:.3}), interpolant gap {gap:?} (order {gap_order:.3})"
    );
    c.check_abs("L2 Ritz error order", l2_order, 2.0, 0.1);
    c.check_abs("interpolant-projection gap H1 order", gap_order, 2.0, 0.15);
    c.finish(5, "Ritz projection rates over m in {8, 16, 32, 64}");
}

#[test]
fn criterion_6_oracle_suite() {
    let start = std::time::Instant::now();
    let mut c = Criterion::new();

    // Element matrices against an independent quadrature route (exact for
    // these polynomial integrands).
    {
        let (hx, hy) = (0.3, 0.55);
        let em = element_matrices(hx, hy).unwrap();
        let rule = QuadratureRule::gauss(2);
        let mut worst = 0.0f64;
        for a in 0..4 {
            for b in 0..4 {
                let mut mass = 0.0;
                let mut stiff = 0.0;
                for (q, &(xi, eta)) in rule.points.iter().enumerate() {
                    let (na, ga) = basis_eval(a, (xi, eta)).unwrap();
                    let (nb, gb) = basis_eval(b, (xi, eta)).unwrap();
                    let w = hx * hy * rule.weights[q];
                    mass += na * nb * w;
                    stiff += (ga.0 / hx * (gb.0 / hx) + ga.1 / hy * (gb.1 / hy)) * w;
                }
                worst = worst
                    .max((em.mass[a][b] - mass).abs() / mass.abs())
                    .max((em.stiffness[a][b] - stiff).abs() / stiff.abs().max(1e-3));
            }
        }
        c.check(
            "element matrices vs quadrature oracle",
            worst <= 1e-13,
            format!("worst relative deviation {worst:.2e}"),
        );
    }

    // The m = 2 linear scalar step lands on the hand value -5/7.
    {
        let mut spec = ProblemSpec::plane_wave();
        spec.eta = 0.0;
        spec.gamma = 0.0;
        spec.kappa = 0.0;
        spec.zeta = 0.0;
        spec.source = SourceTerm::Zero;
        let mesh = build_uniform_mesh(2, Rect::unit_square()).unwrap();
        let dofs = build_dof_map(&mesh);
        let config = StepperConfig::new(0.5, 1).unwrap();
        let stepper = CnStepper::new(&spec, &mesh, &dofs, &config).unwrap();
        let u0 = FemField {
            coeffs: vec![Complex64::new(1.0, 0.0)],
            time: 0.0,
        };
        let u1 = stepper.predictor_step(&u0).unwrap();
        let dev = (u1.coeffs[0] - Complex64::new(-5.0 / 7.0, 0.0)).norm();
        c.check(
            "m=2 scalar step equals -5/7",
            dev <= 1e-12,
            format!("|diff| {dev:.2e}"),
        );
    }

    // Manufactured source against central finite differences.
    {
        let spec = ProblemSpec::plane_wave();
        let source = spec.manufactured_source().unwrap();
        let d = 1e-4;
        let u = |x: f64, y: f64, t: f64| spec.eval_exact(x, y, t).unwrap();
        let mut worst = 0.0f64;
        for &(x, y, t) in &[(0.3, 0.7, 0.5), (0.5, 0.5, 0.0), (0.62, 0.21, 0.8)] {
            let ut = (u(x, y, t + d) - u(x, y, t - d)) / (2.0 * d);
            let lap = (u(x + d, y, t) - 2.0 * u(x, y, t) + u(x - d, y, t) + u(x, y + d, t)
                - 2.0 * u(x, y, t)
                + u(x, y - d, t))
                / (d * d);
            let uv = u(x, y, t);
            let g_fd = ut - Complex64::new(spec.nu, spec.eta) * lap
                + Complex64::new(spec.kappa, spec.zeta) * uv.norm_sqr() * uv
                - spec.gamma * uv;
            worst = worst.max((source.eval(x, y, t) - g_fd).norm());
        }
        c.check(
            "manufactured source vs finite-difference oracle",
            worst < 1e-6,
            format!("worst |residual| {worst:.2e}"),
        );
    }

    // Mass-weighted norm decays monotonically in the linear homogeneous
    // case (gamma = 0, no reaction, no source).
    {
        let mut spec = ProblemSpec::plane_wave();
        spec.gamma = 0.0;
        spec.kappa = 0.0;
        spec.zeta = 0.0;
        spec.source = SourceTerm::Zero;
        let mesh = build_uniform_mesh(8, Rect::unit_square()).unwrap();
        let dofs = build_dof_map(&mesh);
        let config = StepperConfig::new(0.05, 20).unwrap();
        let stepper = CnStepper::new(&spec, &mesh, &dofs, &config).unwrap();
        let mass = assemble_mass(&mesh, &dofs);
        let mass_norm = |v: &[Complex64]| -> f64 {
            let mv = mass.matvec(v).unwrap();
            v.iter()
                .zip(mv.iter())
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<f64>()
                .sqrt()
        };
        let u0 = glfem_core::stepper::initial_field(&spec, &mesh, &dofs);
        let mut monotone = true;
        let mut last = mass_norm(&u0.coeffs);
        let u10 = stepper.predictor_step(&u0).unwrap();
        let u1 = stepper.corrector_step(&u0, &u10).unwrap();
        let mut states = vec![u0, u1];
        for n in 2..=20usize {
            let next = stepper.cn_step(&states[n - 1], &states[n - 2], n).unwrap();
            states.push(next);
        }
        for s in &states[1..] {
            let norm = mass_norm(&s.coeffs);
            if norm > last * (1.0 + 1e-13) {
                monotone = false;
            }
            last = norm;
        }
        c.check(
            "mass-weighted norm decays monotonically",
            monotone,
            String::new(),
        );
    }

    // Biquadratic reproduction of the postprocessing operator.
    {
        let coeff = Complex64::new(0.4, -0.9);
        let q = move |x: f64, y: f64| coeff * (x * (1.0 - x) * y * (1.0 - y));
        let mesh = build_uniform_mesh(6, Rect::unit_square()).unwrap();
        let dofs = build_dof_map(&mesh);
        let patches = build_macro_patches(&mesh).unwrap();
        let field = interpolate(q, &mesh, &dofs);
        let post = postprocess(&field, &patches, &mesh, &dofs).unwrap();
        let mut worst = 0.0f64;
        for &(x, y) in &[
            (0.05, 0.4),
            (0.31, 0.77),
            (0.5, 0.5),
            (0.83, 0.12),
            (0.99, 0.66),
        ] {
            worst = worst.max((post.eval(x, y) - q(x, y)).norm());
        }
        c.check(
            "postprocessing reproduces biquadratics",
            worst <= 1e-12,
            format!("worst |diff| {worst:.2e}"),
        );
    }

    // Every solve of a full nonlinear run stays at or below tolerance.
    {
        let spec = ProblemSpec::plane_wave();
        let mesh = build_uniform_mesh(20, Rect::unit_square()).unwrap();
        let dofs = build_dof_map(&mesh);
        let config = StepperConfig::new(0.05, 20).unwrap();
        let stepper = CnStepper::new(&spec, &mesh, &dofs, &config).unwrap();
        let (_, stats) = stepper.run_with_stats(&[1.0]).unwrap();
        c.check(
            "solver residual <= 1e-10 on every step",
            stats.max_relative_residual <= 1e-10,
            format!(
                "max residual {:.2e} over {} solves",
                stats.max_relative_residual, stats.n_solves
            ),
        );
    }

    let elapsed = start.elapsed().as_secs_f64();
    c.check(
        "oracle suite under 10 s",
        elapsed < 10.0,
        format!("{elapsed:.2} s"),
    );
    c.finish(6, "oracle suite");
}

#[test]
fn criterion_7_determinism_of_repeated_study_runs() {
    let mut c = Criterion::new();
    let run = |path: &std::path::Path| {
        let out = Command::new(env!("CARGO_BIN_EXE_glfem"))
            .args([
                // The first reference table: every mesh size, reporting at
                // t = 0.25. The final time 0.5 sits on all four step grids.
                "--sizes",
                "10,20,40,80",
                "--t-final",
                "0.5",
                "--snapshots",
                "0.25",
                "--out",
                path.to_str().unwrap(),
            ])
            .output()
            .expect("binary runs");
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        std::fs::read(path).expect("csv written")
    };
    let mut p1 = std::env::temp_dir();
    p1.push(format!("glfem-acceptance-{}-a.csv", std::process::id()));
    let mut p2 = std::env::temp_dir();
    p2.push(format!("glfem-acceptance-{}-b.csv", std::process::id()));
    let a = run(&p1);
    let b = run(&p2);
    std::fs::remove_file(&p1).ok();
    std::fs::remove_file(&p2).ok();
    c.check(
        "two consecutive study runs produce byte-identical CSV",
        a == b,
        format!("{} vs {} bytes, differ", a.len(), b.len()),
    );
    c.check(
        "CSV is non-trivial",
        a.len() > 100 && a.starts_with(b"time,"),
        String::new(),
    );
    c.finish(7, "byte-identical repeated runs");
}
