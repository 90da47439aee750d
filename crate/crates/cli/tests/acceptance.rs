//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line with its measured runtime. Tolerances are pinned in the
//! assertions below.

use std::process::Command;
use std::time::Instant;
use thinshell_core::bodies::{
    kq_radial, radial_moment_cache, sphere_grid, triangle_inequality_check, verify_relation,
    zq_plus_support_density, zq_plus_support_of_body, Density, DirectionSet, RelationCase,
};
use thinshell_core::distributions::{
    estimate_psi_alpha_exact, make_density, sample, sample_norms, Family, LinearMap,
};
use thinshell_core::moments::{
    build_radial_measure_family, direct_negative_moment, entropy_decomposition_residual,
    fit_deviation_form, moment_ratio_curve, moments_from_tail, projection_moment_identity,
    reduction_check, tail_curve, tail_from_moments, thin_shell_scan, TailSide,
};
use thinshell_core::nalgebra::DMatrix;
use thinshell_core::radial1d::{
    canonical_marginal, concavity_check, grunbaum_mass, kq_radius_1d, ConcavityMode,
    RadialFunction,
};
use thinshell_core::rotations::{empirical_log_lipschitz, hkp_exact_gaussian, FrameConfig, Rotation};
use thinshell_core::special::{gaussian_norm_moment, log_gamma};
use thinshell_core::stats::{clopper_pearson, linear_fit};

struct Criterion {
    id: usize,
    label: &'static str,
    budget_s: f64,
    started: Instant,
}

impl Criterion {
    fn start(id: usize, label: &'static str, budget_s: f64) -> Criterion {
        Criterion { id, label, budget_s, started: Instant::now() }
    }

    #[must_use]
    fn finish(self, ok: bool) -> bool {
        let elapsed = self.started.elapsed().as_secs_f64();
        let within = elapsed <= self.budget_s;
        println!(
            "{} criterion {:>2}: {} ({elapsed:.1}s of {:.0}s budget)",
            if ok && within { "PASS" } else { "FAIL" },
            self.id,
            self.label,
            self.budget_s
        );
        ok && within
    }
}

fn criterion_01_gaussian_moment_closed_form() -> bool {
    let c = Criterion::start(1, "Gaussian moment curve matches the closed form", 30.0);
    let n = 64;
    let spec = make_density(Family::Gaussian, n, &[]).unwrap();
    let norms = sample_norms(&spec, 200_000, 4101);
    let p_grid = [-2.0, 1.0, 3.0, 4.0, 8.0];
    let curve = moment_ratio_curve(&norms, n, &p_grid, n as f64, 2.0, 11).unwrap();
    let mut ok = true;
    for (i, &p) in p_grid.iter().enumerate() {
        let expected = gaussian_norm_moment(n, p).powf(1.0 / p) / (n as f64).sqrt();
        let width = curve.ci[i].1 - curve.ci[i].0;
        if (curve.ratio[i] - expected).abs() > 3.0 * width {
            eprintln!("p={p}: {} vs {expected} (width {width})", curve.ratio[i]);
            ok = false;
        }
    }
    c.finish(ok)
}

fn criterion_02_projection_identity() -> bool {
    let c = Criterion::start(2, "projection identity at 1% on product-Laplace", 120.0);
    let spec = make_density(Family::ProductLaplace, 32, &[]).unwrap();
    let batch = sample(&spec, 1_000_000, 4102);
    let rep = projection_moment_identity(&batch, 9, 3.0, 200, 17).unwrap();
    let ok = rep.rel_discrepancy < 0.01;
    if !ok {
        eprintln!("relative discrepancy {}", rep.rel_discrepancy);
    }
    c.finish(ok)
}

fn criterion_03_entropy_decomposition() -> bool {
    let c = Criterion::start(3, "entropy decomposition residual < 1e-12 on 100 measures", 5.0);
    let spec = make_density(Family::ProductLaplace, 12, &[]).unwrap();
    let batch = sample(&spec, 20_000, 4103);
    let (masses, centers) = build_radial_measure_family(&batch, 3, 100, 200, 29).unwrap();
    assert_eq!(masses.len(), 100);
    let f: Vec<f64> = centers.iter().map(|&t| t * t).collect();
    let residual = entropy_decomposition_residual(&masses, &f).unwrap();
    let ok = residual < 1e-12;
    if !ok {
        eprintln!("residual {residual}");
    }
    c.finish(ok)
}

fn criterion_04_grunbaum_masses() -> bool {
    let c = Criterion::start(4, "half-line masses of all zoo marginals in the 1/e window", 5.0);
    let lo = (-1.0_f64).exp();
    let hi = 1.0 - lo;
    let mut ok = true;
    for family in Family::ALL {
        let spec = make_density(family, 6, &[]).unwrap();
        let mass = grunbaum_mass(&canonical_marginal(&spec).unwrap()).unwrap();
        if !(lo - 1e-6..=hi + 1e-6).contains(&mass) {
            eprintln!("{}: mass {mass}", family.name());
            ok = false;
        }
        if family == Family::ProductShiftedExponential && (mass - lo).abs() > 1e-6 {
            eprintln!("extremal member returned {mass}, expected 1/e");
            ok = false;
        }
    }
    c.finish(ok)
}

fn criterion_05_borell_bobkov_concavity() -> bool {
    let c = Criterion::start(5, "radial moment profiles concave for all zoo marginals", 10.0);
    let grid: Vec<f64> = (1..=12).map(|i| i as f64).collect();
    let mut ok = true;
    for family in Family::ALL {
        let spec = make_density(family, 6, &[]).unwrap();
        let w = canonical_marginal(&spec).unwrap();
        for mode in [ConcavityMode::Borell, ConcavityMode::Bobkov] {
            match concavity_check(&w, mode, &grid, 1e-8) {
                Ok(rep) => {
                    if rep.max_second_difference > 1e-8 {
                        ok = false;
                    }
                }
                Err(e) => {
                    eprintln!("{} {mode:?}: {e}", family.name());
                    ok = false;
                }
            }
        }
    }
    // equality case: the exponential profile gives phi identically zero
    let rep =
        concavity_check(&RadialFunction::exponential(), ConcavityMode::Borell, &grid, 1e-8)
            .unwrap();
    if rep.max_abs_phi > 1e-10 {
        eprintln!("exponential |phi| = {}", rep.max_abs_phi);
        ok = false;
    }
    c.finish(ok)
}

fn criterion_06_kq_fixed_point_and_norm() -> bool {
    let c = Criterion::start(6, "indicator fixed point and gauge triangle inequality", 60.0);
    let mut ok = true;
    let seg = RadialFunction::indicator(-1.0, 1.0);
    for q in [1.0, 2.0, 4.0, 8.0] {
        let rp = kq_radius_1d(&seg, q, true).unwrap();
        let rm = kq_radius_1d(&seg, q, false).unwrap();
        if (rp - 1.0).abs() > 1e-10 || (rm - 1.0).abs() > 1e-10 {
            eprintln!("q={q}: ({rp}, {rm})");
            ok = false;
        }
    }
    for family in [Family::Gaussian, Family::ProductLaplace, Family::ProductShiftedExponential] {
        let spec = make_density(family, 2, &[]).unwrap();
        let body =
            thinshell_core::bodies::kq_body(Density::from_spec(&spec).unwrap(), 2.0, 1e-9)
                .unwrap();
        let worst = triangle_inequality_check(&body, 10_000, 4106).unwrap();
        if worst > 0.0 {
            eprintln!("{}: triangle slack {worst}", family.name());
            ok = false;
        }
    }
    c.finish(ok)
}

fn criterion_07_zk_identity_and_sandwich() -> bool {
    let c = Criterion::start(7, "polar identity exact in 1-D; sandwich ratio within budget", 120.0);
    let mut ok = true;
    // 1-D closed-form instance: both sides give h(+-1) exactly
    let w = Density::new(1, "two-sided-exponential", |x: &[f64]| (-x[0].abs()).exp());
    let q = 1.0;
    let grid = sphere_grid(1, 0).unwrap();
    let cache = radial_moment_cache(&w, 1.0, &grid, 1e-12).unwrap();
    let mut rho = Vec::new();
    for xi in &grid.points {
        rho.push(kq_radial(&w, 2.0, xi, 1e-12).unwrap().0);
    }
    for dir in [[1.0], [-1.0]] {
        let lhs = zq_plus_support_of_body(&dir, q, 1, &grid, &rho);
        let rhs = zq_plus_support_density(&dir, q, &grid, &cache);
        if (lhs - rhs).abs() > 1e-8 * rhs {
            eprintln!("zk at {dir:?}: {lhs} vs {rhs}");
            ok = false;
        }
    }
    // sandwich budget over shifted-exponential products
    let dirs = DirectionSet::circle_grid(8);
    for m in [1usize, 2] {
        let dens = match m {
            1 => Density::new(1, "shifted-exponential-1d", |x: &[f64]| {
                if x[0] >= -1.0 {
                    (-(x[0] + 1.0)).exp()
                } else {
                    0.0
                }
            }),
            _ => Density::from_spec(
                &make_density(Family::ProductShiftedExponential, 2, &[]).unwrap(),
            )
            .unwrap(),
        };
        for qq in [1.0, 2.0, 4.0] {
            let rep =
                verify_relation(&RelationCase::Sandwich { w: dens.clone(), q: qq }, &dirs)
                    .unwrap();
            let ratio = rep.c2 / rep.c1;
            if !(rep.verdict && ratio <= 20.0) {
                eprintln!("sandwich m={m} q={qq}: ratio {ratio}");
                ok = false;
            }
        }
    }
    c.finish(ok)
}

fn criterion_08_log_lipschitz_scaling() -> bool {
    let c = Criterion::start(8, "log-Lipschitz growth exponent <= 1.15; isotropic ~0", 180.0);
    let n = 12;
    let a = LinearMap::two_block_unit_hs(n, n / 2, 2.0);
    let sigma = {
        let aat = &a.matrix * a.matrix.transpose();
        (aat + DMatrix::<f64>::identity(n, n)) * 0.5
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in [2usize, 3, 4, 6] {
        for p in [2.0, k as f64] {
            let frame = FrameConfig::new(n, k).unwrap();
            let sig = sigma.clone();
            let log_h = move |u: &Rotation| {
                hkp_exact_gaussian(&sig, u, frame, p).unwrap().value.ln()
            };
            let est = empirical_log_lipschitz(&log_h, frame, 24, 8, 1e-3, 4108).unwrap();
            xs.push((k.max(p as usize) as f64).ln());
            ys.push(est.overall.ln());
        }
    }
    let (slope, _) = linear_fit(&xs, &ys).unwrap();
    let mut ok = slope <= 1.15;
    if !ok {
        eprintln!("fitted exponent {slope}");
    }
    let frame = FrameConfig::new(n, 3).unwrap();
    let id = DMatrix::<f64>::identity(n, n);
    let log_h =
        move |u: &Rotation| hkp_exact_gaussian(&id, u, frame, 2.0).unwrap().value.ln();
    let iso = empirical_log_lipschitz(&log_h, frame, 16, 6, 1e-3, 4108).unwrap();
    if iso.overall >= 1e-6 {
        eprintln!("isotropic control L = {}", iso.overall);
        ok = false;
    }
    c.finish(ok)
}

fn criterion_09_deviation_form_fit() -> bool {
    let c = Criterion::start(9, "deviation-form fit has positive rate, one-sided residuals", 240.0);
    let n = 256;
    let mut t_grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.0125).collect();
    t_grid.extend([0.75, 1.0, 1.5, 2.0, 3.0]);
    let mut ok = true;
    for family in [Family::ProductLaplace, Family::Gaussian] {
        let spec = make_density(family, n, &[]).unwrap();
        let norms = sample_norms(&spec, 100_000, 4109);
        let curve = tail_curve(&norms, (n as f64).sqrt(), &t_grid).unwrap();
        let alpha = family.alpha();
        let grid: Vec<f64> = (1..=16).map(|i| 2.0 * i as f64).collect();
        let prof = estimate_psi_alpha_exact(&spec, alpha, &grid).unwrap();
        let n_bar = n as f64 / (prof.b_alpha * prof.b_alpha);
        let fit = fit_deviation_form(&curve, n_bar, alpha).unwrap();
        // one-sided residuals hold by the envelope construction; verify
        let one_sided = fit.residual_sup >= -1e-12;
        if !(fit.pass && fit.c > 0.0 && one_sided && fit.informative_points >= 5) {
            eprintln!("{}: c = {}, points = {}", family.name(), fit.c, fit.informative_points);
            ok = false;
        }
    }
    c.finish(ok)
}

fn criterion_10_thin_shell_scan() -> bool {
    let c = Criterion::start(10, "thin-shell widths below 5 n^(1/3); Gaussian matches chi", 300.0);
    let n_grid = [16usize, 64, 256, 1024];
    let mut ok = true;
    for family in Family::ALL {
        let scan = thin_shell_scan(family, &n_grid, 30_000, 4110).unwrap();
        if scan.fitted_c > 5.0 {
            eprintln!("{}: fitted C = {}", family.name(), scan.fitted_c);
            ok = false;
        }
        if family == Family::Gaussian {
            let last = scan.rows.last().unwrap();
            let nf = last.n as f64;
            let mean_chi = std::f64::consts::SQRT_2
                * (log_gamma(0.5 * (nf + 1.0)) - log_gamma(0.5 * nf)).exp();
            let sd_chi = (nf - mean_chi * mean_chi).sqrt();
            if (last.sd_norm - sd_chi).abs() > 0.1 * sd_chi {
                eprintln!("gaussian at n=1024: sd {} vs chi oracle {sd_chi}", last.sd_norm);
                ok = false;
            }
        }
    }
    c.finish(ok)
}

fn criterion_11_moments_tails_consistency() -> bool {
    let c = Criterion::start(11, "moment/tail conversions dominate their empirical targets", 60.0);
    let n = 64;
    let count = 100_000;
    let spec = make_density(Family::Gaussian, n, &[]).unwrap();
    let norms = sample_norms(&spec, count, 4111);
    let sqrt_n = (n as f64).sqrt();
    let p_grid = [-8.0, -4.0, -2.0, 2.0, 4.0, 8.0, 16.0];
    let curve = moment_ratio_curve(&norms, n, &p_grid, n as f64, 2.0, 13).unwrap();
    let mut ok = true;
    for t in [0.1, 0.2, 0.5, 1.0] {
        for side in [TailSide::Upper, TailSide::Lower] {
            let Ok(bound) = tail_from_moments(&curve, t, side) else { continue };
            let k = match side {
                TailSide::Upper => norms.iter().filter(|&&r| r >= (1.0 + t) * sqrt_n).count(),
                TailSide::Lower => norms.iter().filter(|&&r| r <= (1.0 - t) * sqrt_n).count(),
            } as u64;
            let (cp_lo, _) = clopper_pearson(k, count as u64, 0.99);
            if bound < cp_lo {
                eprintln!("t={t} {side:?}: bound {bound} < CP {cp_lo}");
                ok = false;
            }
        }
    }
    let mut t_grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.0125).collect();
    t_grid.extend((1..=10).map(|i| 0.5 + i as f64 * 0.25));
    let tails = tail_curve(&norms, sqrt_n, &t_grid).unwrap();
    let bound = moments_from_tail(&tails, 2.0, n).unwrap();
    let direct = direct_negative_moment(&norms, sqrt_n, 2.0).unwrap();
    let nf = n as f64;
    let oracle = (nf * nf / ((nf - 2.0) * (nf - 4.0))).powf(0.25);
    if !(bound >= direct && bound <= 2.0 * oracle) {
        eprintln!("negative moment: bound {bound}, direct {direct}, oracle {oracle}");
        ok = false;
    }
    c.finish(ok)
}

fn criterion_12_reduction_inequality() -> bool {
    let c = Criterion::start(12, "convolution reduction inequality at p in {1,2,4,8}", 60.0);
    let mut ok = true;
    for family in [Family::Gaussian, Family::ProductLaplace] {
        let spec = make_density(family, 64, &[]).unwrap();
        let batch = sample(&spec, 60_000, 4112);
        let rows =
            reduction_check(&batch, &LinearMap::identity(64), &[1.0, 2.0, 4.0, 8.0], 19).unwrap();
        for row in rows {
            if !row.pass {
                eprintln!("{} p={}: lhs {} > rhs {} + 3se", family.name(), row.p, row.lhs, row.rhs);
                ok = false;
            }
        }
    }
    c.finish(ok)
}

fn criterion_13_byte_identical_reruns() -> bool {
    let c = Criterion::start(13, "identical config and seed give byte-identical CSVs", 120.0);
    let bin = env!("CARGO_BIN_EXE_thinshell");
    let base = std::env::temp_dir().join(format!("ts-accept-{}", std::process::id()));
    let (dir_a, dir_b) = (base.join("a"), base.join("b"));
    let mut ok = true;
    for dir in [&dir_a, &dir_b] {
        let status = Command::new(bin)
            .args([
                "run",
                "moment-curve",
                "--seed",
                "99",
                "--out",
                dir.to_str().unwrap(),
                "--workers",
                if dir == &dir_a { "1" } else { "2" },
            ])
            .status()
            .expect("running the binary");
        ok &= status.success();
    }
    let csv_a = std::fs::read(dir_a.join("moment-curve.curve.csv")).unwrap();
    let csv_b = std::fs::read(dir_b.join("moment-curve.curve.csv")).unwrap();
    if csv_a != csv_b {
        eprintln!("CSV outputs differ between reruns (and worker counts)");
        ok = false;
    }
    std::fs::remove_dir_all(&base).ok();
    c.finish(ok)
}

/// The acceptance gate: every criterion runs sequentially (so runtime
/// budgets measure the criterion, not scheduler contention) and prints one
/// PASS/FAIL line.
#[test]
fn acceptance_criteria() {
    let runners: [(&str, fn() -> bool); 13] = [
        ("gaussian moment closed form", criterion_01_gaussian_moment_closed_form),
        ("projection identity", criterion_02_projection_identity),
        ("entropy decomposition", criterion_03_entropy_decomposition),
        ("half-line masses", criterion_04_grunbaum_masses),
        ("moment-profile concavity", criterion_05_borell_bobkov_concavity),
        ("moment-body fixed point and norm", criterion_06_kq_fixed_point_and_norm),
        ("polar identity and sandwich", criterion_07_zk_identity_and_sandwich),
        ("log-Lipschitz scaling", criterion_08_log_lipschitz_scaling),
        ("deviation-form fit", criterion_09_deviation_form_fit),
        ("thin-shell scan", criterion_10_thin_shell_scan),
        ("moments/tails consistency", criterion_11_moments_tails_consistency),
        ("reduction inequality", criterion_12_reduction_inequality),
        ("byte-identical reruns", criterion_13_byte_identical_reruns),
    ];
    let mut failures = Vec::new();
    for (name, run) in runners {
        if !run() {
            failures.push(name);
        }
    }
    assert!(failures.is_empty(), "acceptance criteria failed: {failures:?}");
}
