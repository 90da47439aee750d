//! Experiment runners behind the registry. Each runner consumes the config
//! (filling per-experiment defaults), returns the JSONL records and CSV
//! tables, and marks hard assertions as pass/fail while fitted constants
//! stay report-only.

use crate::config::ExperimentConfig;
use crate::report::{fmt_f, ReportRecord, Table, Verdict};
use anyhow::{anyhow, Result};
use std::sync::Arc;
use std::time::Instant;
use thinshell_core::bodies::{
    triangle_inequality_check, verify_relation, Density, DirectionSet, RelationCase,
};
use thinshell_core::distributions::{
    convolve_gaussian, estimate_psi_alpha_exact, estimate_psi_alpha_mc, make_density, sample,
    sample_norms, Family, LinearMap, PsiAlphaProfile,
};
use thinshell_core::moments::{
    build_radial_measure_family, cheeger_diagnostic, direct_negative_moment,
    entropy_decomposition_residual, fit_deviation_form, gamma_ratio_derivative_max,
    moment_ratio_curve, moments_from_tail, projection_moment_identity, reduction_check,
    stirling_bound_fitted_c, tail_curve, tail_from_moments, thin_shell_scan, TailSide,
};
use thinshell_core::radial1d::{
    canonical_marginal, concavity_check, density_zero_bound, grunbaum_mass, kq_radius_1d,
    ConcavityMode, RadialFunction,
};
use thinshell_core::rotations::{
    empirical_log_lipschitz, haar_rotation, hkp_exact_gaussian, reverse_holder_check, FrameConfig,
    Rotation,
};
use thinshell_core::special::gaussian_norm_moment;
use thinshell_core::stats::linear_fit;
use thinshell_core::nalgebra::DMatrix;

pub struct RunOutput {
    pub records: Vec<ReportRecord>,
    pub tables: Vec<Table>,
}

pub struct Runner {
    pub key: &'static str,
    pub claim: &'static str,
    pub run: fn(&ExperimentConfig) -> Result<RunOutput>,
}

pub const REGISTRY: &[Runner] = &[
    Runner {
        key: "moment-curve",
        claim: "normalized moment curve of |Y| matches the closed-form Gaussian profile within bootstrap windows",
        run: run_moment_curve,
    },
    Runner {
        key: "projection-identity",
        claim: "E|Y|^p equals the gamma-ratio times the Haar-averaged projected moment; projected ratios dominate for p >= 2",
        run: run_projection_identity,
    },
    Runner {
        key: "entropy-decomp",
        claim: "mixture entropy of t^p splits exactly into mean within-measure entropy plus the entropy of the means",
        run: run_entropy_decomp,
    },
    Runner {
        key: "grunbaum",
        claim: "centered log-concave marginals put between 1/e and 1-1/e of their mass on the positive half-line",
        run: run_grunbaum,
    },
    Runner {
        key: "borell-concavity",
        claim: "log of the q-th radial moment over Gamma(q+1) (resp. q^q) is concave in q for log-concave profiles",
        run: run_borell,
    },
    Runner {
        key: "kq-norm",
        claim: "moment bodies of indicators reproduce the set and their gauges satisfy the triangle inequality",
        run: run_kq_norm,
    },
    Runner {
        key: "zq-chains",
        claim: "centroid-body chains are monotone with explicit one-sided factors; fitted growth constants recorded",
        run: run_zq_chains,
    },
    Runner {
        key: "zk-identity",
        claim: "the one-sided centroid body of the (m+q)-moment body coincides with that of the density",
        run: run_zk_identity,
    },
    Runner {
        key: "sandwich",
        claim: "the scaled moment body is sandwiched between bounded multiples of its one-sided centroid body",
        run: run_sandwich,
    },
    Runner {
        key: "add-gaussian",
        claim: "after Gaussian convolution the one-sided centroid body contains an explicit sqrt(q)-order ball",
        run: run_add_gaussian,
    },
    Runner {
        key: "z2plus",
        claim: "the 2nd one-sided centroid body of an isotropic log-concave density contains an explicit ball",
        run: run_z2plus,
    },
    Runner {
        key: "body-bounds",
        claim: "marginal-at-zero, density-at-zero and halfspace-mass bounds hold on moment-body instances",
        run: run_body_bounds,
    },
    Runner {
        key: "dist-bound",
        claim: "distance of moment/centroid bodies to the ball follows the max(m/(m+p),1) transfer and the convolution form",
        run: run_dist_bound,
    },
    Runner {
        key: "loglip-scan",
        claim: "log-Lipschitz constants of directional marginal moments grow at most like max(k,p)^(1/alpha+1/2)",
        run: run_loglip_scan,
    },
    Runner {
        key: "reverse-holder",
        claim: "Haar moments of the directional marginal moment satisfy a reverse Holder inequality with bounded constant",
        run: run_reverse_holder,
    },
    Runner {
        key: "deviation-fit",
        claim: "-log of the two-sided tail dominates a positive multiple of n_bar^(alpha/2) min(t^(2+alpha), t)",
        run: run_deviation_fit,
    },
    Runner {
        key: "thin-shell",
        claim: "sqrt Var|X| stays below a fitted constant times n^(1/3) across the zoo",
        run: run_thin_shell,
    },
    Runner {
        key: "moments-tails",
        claim: "Markov bounds from moments dominate empirical tails; the tail-integrated negative moment dominates the direct one",
        run: run_moments_tails,
    },
    Runner {
        key: "reduction",
        claim: "moment ratios of |AX| are bounded by the squared ratios of the Gaussian-convolved vector",
        run: run_reduction,
    },
    Runner {
        key: "cheeger",
        claim: "the isoperimetric quantity (E|X| sqrt Var|X|)^(-1/2) decays no faster than n^(-5/12)",
        run: run_cheeger,
    },
    Runner {
        key: "gamma-decr",
        claim: "(1/p) log of the Gaussian moment transfer factor is non-increasing in p",
        run: run_gamma_decr,
    },
    Runner {
        key: "stirling-bound",
        claim: "the derivative of (1/p) log(Gamma(k+p)/Gamma(k)) stays below a small constant over k",
        run: run_stirling,
    },
];

pub fn find_runner(key: &str) -> Result<&'static Runner> {
    REGISTRY
        .iter()
        .find(|r| r.key == key)
        .ok_or_else(|| anyhow!("unknown experiment `{key}` (see `thinshell list`)"))
}

pub fn run_experiment(key: &str, cfg: &ExperimentConfig) -> Result<RunOutput> {
    (find_runner(key)?.run)(cfg)
}

struct RecordBuilder {
    experiment: &'static str,
    claim: &'static str,
    seed: u64,
    started: Instant,
}

impl RecordBuilder {
    fn new(experiment: &'static str, claim: &'static str, seed: u64) -> RecordBuilder {
        RecordBuilder { experiment, claim, seed, started: Instant::now() }
    }

    fn record(
        &self,
        claim_suffix: &str,
        params: &[(&str, String)],
        metrics: &[(&str, f64)],
        verdict: Verdict,
    ) -> ReportRecord {
        ReportRecord {
            experiment: self.experiment.to_string(),
            claim: if claim_suffix.is_empty() {
                self.claim.to_string()
            } else {
                format!("{} [{claim_suffix}]", self.claim)
            },
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            metrics: metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            verdict,
            wall_time_ms: self.started.elapsed().as_millis(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.seed,
        }
    }
}

fn pass(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn zoo_specs(n: usize) -> Vec<thinshell_core::distributions::DensitySpec> {
    Family::ALL.iter().map(|&f| make_density(f, n, &[]).unwrap()).collect()
}

fn exact_psi_alpha(family: Family, dim: usize, seed: u64) -> Result<PsiAlphaProfile> {
    let alpha = family.alpha();
    let grid: Vec<f64> = (1..=16).map(|i| 2.0 * i as f64).collect();
    let spec = make_density(family, dim, &[])?;
    match estimate_psi_alpha_exact(&spec, alpha, &grid) {
        Ok(profile) => Ok(profile),
        Err(thinshell_core::Error::ExactPathUnavailable) => {
            let batch = sample(&spec, 100_000, seed);
            Ok(estimate_psi_alpha_mc(&batch, alpha, &grid, 32, seed)?)
        }
        Err(e) => Err(e.into()),
    }
}

// ---------------------------------------------------------------------------

fn run_moment_curve(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("moment-curve", find_runner("moment-curve")?.claim, cfg.seed);
    let family = cfg.family.unwrap_or(Family::Gaussian);
    let n = cfg.n.unwrap_or(64);
    let count = cfg.n_samples.unwrap_or(200_000);
    let p_grid = cfg.p_grid.clone().unwrap_or_else(|| vec![-2.0, 1.0, 3.0, 4.0, 8.0]);
    let spec = make_density(family, n, &[])?;
    let norms = sample_norms(&spec, count, cfg.seed);
    let curve = moment_ratio_curve(&norms, n, &p_grid, n as f64, family.alpha(), cfg.seed)?;
    let mut table = Table::new(
        "curve",
        &["p", "ratio", "ci_lo", "ci_hi", "gaussian_closed_form", "within_3_widths"],
    );
    let mut all_ok = true;
    for (i, &p) in curve.p_grid.iter().enumerate() {
        let expected = gaussian_norm_moment(n, p).powf(1.0 / p) / (n as f64).sqrt();
        let width = curve.ci[i].1 - curve.ci[i].0;
        let ok = (curve.ratio[i] - expected).abs() <= 3.0 * width;
        if family == Family::Gaussian && !ok {
            all_ok = false;
        }
        table.push(vec![
            fmt_f(p),
            fmt_f(curve.ratio[i]),
            fmt_f(curve.ci[i].0),
            fmt_f(curve.ci[i].1),
            fmt_f(expected),
            (ok as u8).to_string(),
        ]);
    }
    let verdict = if family == Family::Gaussian { pass(all_ok) } else { Verdict::ReportOnly };
    let rec = b.record(
        "",
        &[
            ("family", family.name().to_string()),
            ("n", n.to_string()),
            ("samples", count.to_string()),
        ],
        &[("points", curve.p_grid.len() as f64)],
        verdict,
    );
    Ok(RunOutput { records: vec![rec], tables: vec![table] })
}

fn run_projection_identity(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new(
        "projection-identity",
        find_runner("projection-identity")?.claim,
        cfg.seed,
    );
    let family = cfg.family.unwrap_or(Family::ProductLaplace);
    let n = cfg.n.unwrap_or(32);
    let count = cfg.n_samples.unwrap_or(1_000_000);
    let k = cfg.k_list.as_ref().and_then(|v| v.first().copied()).unwrap_or(9);
    let p = cfg.p_grid.as_ref().and_then(|v| v.first().copied()).unwrap_or(3.0);
    let frames = 200;
    let spec = make_density(family, n, &[])?;
    let batch = sample(&spec, count, cfg.seed);
    let rep = projection_moment_identity(&batch, k, p, frames, cfg.seed)?;
    let tol = cfg.tolerances.get("rel_discrepancy").copied().unwrap_or(0.01);
    let ok = rep.rel_discrepancy < tol && rep.ratio_inequality_ok;
    let mut table = Table::new(
        "identity",
        &["family", "n", "k", "p", "frames", "lhs", "rhs", "rel_discrepancy", "norm_ratio", "projected_ratio"],
    );
    table.push(vec![
        family.name().into(),
        n.to_string(),
        k.to_string(),
        fmt_f(p),
        frames.to_string(),
        fmt_f(rep.lhs),
        fmt_f(rep.rhs),
        fmt_f(rep.rel_discrepancy),
        fmt_f(rep.norm_ratio),
        fmt_f(rep.projected_ratio),
    ]);
    let rec = b.record(
        "",
        &[("family", family.name().to_string()), ("n", n.to_string()), ("k", k.to_string())],
        &[
            ("lhs", rep.lhs),
            ("rhs", rep.rhs),
            ("rel_discrepancy", rep.rel_discrepancy),
        ],
        pass(ok),
    );
    Ok(RunOutput { records: vec![rec], tables: vec![table] })
}

fn run_entropy_decomp(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("entropy-decomp", find_runner("entropy-decomp")?.claim, cfg.seed);
    let family = cfg.family.unwrap_or(Family::ProductLaplace);
    let n = cfg.n.unwrap_or(12);
    let count = cfg.n_samples.unwrap_or(20_000);
    let spec = make_density(family, n, &[])?;
    let batch = sample(&spec, count, cfg.seed);
    let (masses, centers) = build_radial_measure_family(&batch, 3, 100, 200, cfg.seed)?;
    let mut table = Table::new("residuals", &["p", "residual"]);
    let mut worst: f64 = 0.0;
    for p in [1.0, 2.0, 3.0] {
        let f: Vec<f64> = centers.iter().map(|&t| t.powf(p)).collect();
        let r = entropy_decomposition_residual(&masses, &f)?;
        worst = worst.max(r);
        table.push(vec![fmt_f(p), fmt_f(r)]);
    }
    let tol = cfg.tolerances.get("residual").copied().unwrap_or(1e-12);
    let rec = b.record(
        "",
        &[("family", family.name().to_string()), ("measures", masses.len().to_string())],
        &[("max_residual", worst)],
        pass(worst < tol),
    );
    Ok(RunOutput { records: vec![rec], tables: vec![table] })
}

fn run_grunbaum(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("grunbaum", find_runner("grunbaum")?.claim, cfg.seed);
    let n = cfg.n.unwrap_or(6);
    let lo = (-1.0_f64).exp();
    let hi = 1.0 - lo;
    let tol = cfg.tolerances.get("mass").copied().unwrap_or(1e-6);
    let mut table = Table::new("masses", &["family", "half_line_mass", "in_window"]);
    let mut records = Vec::new();
    for spec in zoo_specs(n) {
        let w = canonical_marginal(&spec)?;
        let p = grunbaum_mass(&w)?;
        let mut ok = p >= lo - tol && p <= hi + tol;
        if spec.family == Family::ProductShiftedExponential {
            // the extremal member sits exactly on the lower edge
            ok = ok && (p - lo).abs() <= tol;
        }
        table.push(vec![spec.family.name().into(), fmt_f(p), (ok as u8).to_string()]);
        records.push(b.record(
            spec.family.name(),
            &[("family", spec.family.name().to_string())],
            &[("mass", p)],
            pass(ok),
        ));
    }
    Ok(RunOutput { records, tables: vec![table] })
}

fn run_borell(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("borell-concavity", find_runner("borell-concavity")?.claim, cfg.seed);
    let n = cfg.n.unwrap_or(6);
    let q_grid: Vec<f64> =
        cfg.q_grid.clone().unwrap_or_else(|| (1..=12).map(|i| i as f64).collect());
    let tol = cfg.tolerances.get("second_difference").copied().unwrap_or(1e-8);
    let mut table =
        Table::new("concavity", &["family", "mode", "max_second_difference", "max_abs_phi"]);
    let mut records = Vec::new();
    for spec in zoo_specs(n) {
        let w = canonical_marginal(&spec)?;
        for (mode, name) in [(ConcavityMode::Borell, "borell"), (ConcavityMode::Bobkov, "bobkov")]
        {
            let rep = concavity_check(&w, mode, &q_grid, tol)?;
            table.push(vec![
                spec.family.name().into(),
                name.into(),
                fmt_f(rep.max_second_difference),
                fmt_f(rep.max_abs_phi),
            ]);
            records.push(b.record(
                &format!("{} {name}", spec.family.name()),
                &[("family", spec.family.name().to_string()), ("mode", name.to_string())],
                &[("max_second_difference", rep.max_second_difference)],
                pass(rep.max_second_difference <= tol),
            ));
        }
    }
    // the exponential equality case: phi vanishes identically in Borell mode
    let rep = concavity_check(&RadialFunction::exponential(), ConcavityMode::Borell, &q_grid, tol)?;
    records.push(b.record(
        "exponential equality case",
        &[("family", "exponential".into())],
        &[("max_abs_phi", rep.max_abs_phi)],
        pass(rep.max_abs_phi <= 1e-10),
    ));
    Ok(RunOutput { records, tables: vec![table] })
}

fn run_kq_norm(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("kq-norm", find_runner("kq-norm")?.claim, cfg.seed);
    let mut records = Vec::new();
    let mut table = Table::new("fixed_point", &["q", "rho_plus", "rho_minus"]);
    // indicator of [-1, 1] is a fixed point for every q
    let seg = RadialFunction::indicator(-1.0, 1.0);
    let mut fixed_ok = true;
    for q in [1.0, 2.0, 4.0, 8.0] {
        let rp = kq_radius_1d(&seg, q, true)?;
        let rm = kq_radius_1d(&seg, q, false)?;
        fixed_ok &= (rp - 1.0).abs() < 1e-10 && (rm - 1.0).abs() < 1e-10;
        table.push(vec![fmt_f(q), fmt_f(rp), fmt_f(rm)]);
    }
    records.push(b.record(
        "indicator fixed point",
        &[],
        &[("q_count", 4.0)],
        pass(fixed_ok),
    ));
    // triangle inequality for the 2-D moment bodies of three zoo members
    let mut tri = Table::new("triangle", &["family", "worst_slack", "pairs"]);
    let pairs = cfg.n_samples.unwrap_or(10_000);
    for family in [Family::Gaussian, Family::ProductLaplace, Family::ProductShiftedExponential] {
        let spec = make_density(family, 2, &[])?;
        let dens = Density::from_spec(&spec)?;
        let body = thinshell_core::bodies::kq_body(dens, 2.0, 1e-9)?;
        let worst = triangle_inequality_check(&body, pairs, cfg.seed)?;
        tri.push(vec![family.name().into(), fmt_f(worst), pairs.to_string()]);
        records.push(b.record(
            &format!("triangle {}", family.name()),
            &[("family", family.name().to_string())],
            &[("worst_slack", worst)],
            pass(worst <= 0.0),
        ));
    }
    // negative control: a corrupted oracle must violate
    let spec = make_density(Family::Gaussian, 2, &[])?;
    let body = thinshell_core::bodies::kq_body(Density::from_spec(&spec)?, 2.0, 1e-9)?;
    let bad = body.corrupted(0.2, cfg.seed)?;
    let bad_worst = triangle_inequality_check(&bad, 2_000, cfg.seed)?;
    records.push(b.record(
        "corrupted oracle detected",
        &[],
        &[("worst_slack", bad_worst)],
        pass(bad_worst > 0.0),
    ));
    Ok(RunOutput { records, tables: vec![table, tri] })
}

fn run_zq_chains(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("zq-chains", find_runner("zq-chains")?.claim, cfg.seed);
    let n = cfg.n.unwrap_or(4);
    let count = cfg.n_samples.unwrap_or(200_000);
    let mut records = Vec::new();
    let mut table = Table::new(
        "reports",
        &["relation", "instance", "q", "c1", "c2", "verdict", "notes"],
    );
    let dirs = DirectionSet::sampled(n, 32, cfg.seed);
    let q_pairs = [(1.0, 2.0), (2.0, 4.0), (4.0, 8.0)];
    for family in [Family::Gaussian, Family::ProductLaplace, Family::ProductShiftedExponential] {
        let spec = make_density(family, n, &[])?;
        let batch = Arc::new(sample(&spec, count, cfg.seed));
        for &(q1, q2) in &q_pairs {
            for case in [
                RelationCase::ZqChain { batch: batch.clone(), q1, q2 },
                RelationCase::ZqPlusChain { batch: batch.clone(), q1, q2 },
            ] {
                let rep = verify_relation(&case, &dirs)?;
                table.push(vec![
                    rep.relation_id.clone(),
                    rep.instance.clone(),
                    rep.q_label.clone(),
                    fmt_f(rep.c1),
                    fmt_f(rep.c2),
                    (rep.verdict as u8).to_string(),
                    rep.notes.clone(),
                ]);
                records.push(b.record(
                    &format!("{} {} {}", rep.relation_id, rep.instance, rep.q_label),
                    &[("relation", rep.relation_id.clone()), ("family", rep.instance.clone())],
                    &[("c1", rep.c1), ("c2", rep.c2)],
                    pass(rep.verdict),
                ));
            }
        }
    }
    // moment-body chains on quadrature instances
    let dens1 = Density::new(1, "two-sided-exponential", |x: &[f64]| (-x[0].abs()).exp());
    let spec2 = make_density(Family::ProductShiftedExponential, 2, &[])?;
    let dens2 = Density::from_spec(&spec2)?;
    for dens in [dens1, dens2] {
        let dirs_m = match dens.dim {
            1 => DirectionSet { dirs: vec![vec![1.0], vec![-1.0]], generation: "signs".into() },
            _ => DirectionSet::circle_grid(16),
        };
        for &(q1, q2) in &q_pairs {
            let rep =
                verify_relation(&RelationCase::KqChain { w: dens.clone(), q1, q2 }, &dirs_m)?;
            table.push(vec![
                rep.relation_id.clone(),
                rep.instance.clone(),
                rep.q_label.clone(),
                fmt_f(rep.c1),
                fmt_f(rep.c2),
                (rep.verdict as u8).to_string(),
                rep.notes.clone(),
            ]);
            records.push(b.record(
                &format!("kq-chain {} {}", rep.instance, rep.q_label),
                &[("relation", rep.relation_id.clone()), ("instance", rep.instance.clone())],
                &[("c1", rep.c1), ("c2", rep.c2)],
                pass(rep.verdict),
            ));
        }
    }
    Ok(RunOutput { records, tables: vec![table] })
}

fn relation_table_row(table: &mut Table, rep: &thinshell_core::bodies::InclusionReport) {
    table.push(vec![
        rep.relation_id.clone(),
        rep.instance.clone(),
        rep.q_label.clone(),
        fmt_f(rep.c1),
        fmt_f(rep.c2),
        (rep.verdict as u8).to_string(),
        rep.notes.clone(),
    ]);
}

fn run_zk_identity(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("zk-identity", find_runner("zk-identity")?.claim, cfg.seed);
    let mut records = Vec::new();
    let mut table =
        Table::new("reports", &["relation", "instance", "q", "c1", "c2", "verdict", "notes"]);
    let dirs = DirectionSet::circle_grid(16);
    let instances: Vec<(Density, Vec<f64>)> = vec![
        (
            Density::new(1, "two-sided-exponential", |x: &[f64]| (-x[0].abs()).exp()),
            vec![1.0, 2.0],
        ),
        (
            Density::from_spec(&make_density(Family::ProductLaplace, 2, &[])?)?,
            vec![1.0, 2.0],
        ),
        (
            Density::from_spec(&make_density(Family::ProductShiftedExponential, 2, &[])?)?,
            vec![1.0, 2.0],
        ),
    ];
    for (dens, qs) in instances {
        for q in qs {
            let rep = verify_relation(&RelationCase::ZkIdentity { w: dens.clone(), q }, &dirs)?;
            relation_table_row(&mut table, &rep);
            records.push(b.record(
                &format!("{} q={q}", rep.instance),
                &[("instance", rep.instance.clone())],
                &[("c1", rep.c1), ("c2", rep.c2)],
                pass(rep.verdict),
            ));
        }
    }
    Ok(RunOutput { records, tables: vec![table] })
}

fn run_sandwich(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("sandwich", find_runner("sandwich")?.claim, cfg.seed);
    let budget = cfg.tolerances.get("ratio_budget").copied().unwrap_or(20.0);
    let mut records = Vec::new();
    let mut table =
        Table::new("reports", &["relation", "instance", "q", "c1", "c2", "verdict", "notes"]);
    let dirs = DirectionSet::circle_grid(8);
    let mut overall: f64 = 0.0;
    for m in [1usize, 2] {
        let dens = match m {
            1 => Density::new(1, "shifted-exponential-1d", |x: &[f64]| {
                if x[0] >= -1.0 {
                    (-(x[0] + 1.0)).exp()
                } else {
                    0.0
                }
            }),
            _ => Density::from_spec(&make_density(Family::ProductShiftedExponential, 2, &[])?)?,
        };
        for q in [1.0, 2.0, 4.0] {
            let rep = verify_relation(&RelationCase::Sandwich { w: dens.clone(), q }, &dirs)?;
            let ratio = rep.c2 / rep.c1;
            overall = overall.max(ratio);
            relation_table_row(&mut table, &rep);
            records.push(b.record(
                &format!("m={m} q={q}"),
                &[("m", m.to_string()), ("q", q.to_string())],
                &[("c1", rep.c1), ("c2", rep.c2), ("ratio", ratio)],
                pass(rep.verdict && ratio <= budget),
            ));
        }
    }
    records.push(b.record(
        "grid max ratio within budget",
        &[("budget", budget.to_string())],
        &[("max_ratio", overall)],
        pass(overall <= budget),
    ));
    Ok(RunOutput { records, tables: vec![table] })
}

fn run_add_gaussian(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("add-gaussian", find_runner("add-gaussian")?.claim, cfg.seed);
    let n = cfg.n.unwrap_or(16);
    let count = cfg.n_samples.unwrap_or(200_000);
    let q_grid = cfg.q_grid.clone().unwrap_or_else(|| vec![2.0, 4.0, 8.0]);
    let mut records = Vec::new();
    let mut table =
        Table::new("reports", &["relation", "instance", "q", "c1", "c2", "verdict", "notes"]);
    let dirs = DirectionSet::sampled(n, 48, cfg.seed);
    for family in [Family::ProductLaplace, Family::ProductShiftedExponential] {
        let spec = make_density(family, n, &[])?;
        let x = sample(&spec, count, cfg.seed);
        let y = Arc::new(convolve_gaussian(&x, &LinearMap::identity(n))?);
        let prof = exact_psi_alpha(family, n, cfg.seed)?;
        for &q in &q_grid {
            let rep = verify_relation(
                &RelationCase::AddGaussian {
                    y: y.clone(),
                    q,
                    a_op: 1.0,
                    b_alpha: prof.b_alpha,
                    alpha: prof.alpha,
                },
                &dirs,
            )?;
            relation_table_row(&mut table, &rep);
            records.push(b.record(
                &format!("{} q={q}", family.name()),
                &[("family", family.name().to_string()), ("q", q.to_string())],
                &[("fitted_c", rep.c1), ("fitted_upper", rep.c2)],
                pass(rep.verdict),
            ));
        }
    }
    Ok(RunOutput { records, tables: vec![table] })
}

fn run_z2plus(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("z2plus", find_runner("z2plus")?.claim, cfg.seed);
    let n = cfg.n.unwrap_or(8);
    let count = cfg.n_samples.unwrap_or(150_000);
    let mut records = Vec::new();
    let mut table =
        Table::new("reports", &["relation", "instance", "q", "c1", "c2", "verdict", "notes"]);
    let dirs = DirectionSet::sampled(n, 48, cfg.seed);
    for spec in zoo_specs(n) {
        let batch = Arc::new(sample(&spec, count, cfg.seed));
        let rep = verify_relation(&RelationCase::Z2Plus { batch }, &dirs)?;
        relation_table_row(&mut table, &rep);
        records.push(b.record(
            spec.family.name(),
            &[("family", spec.family.name().to_string())],
            &[("observed_min", rep.c1), ("floor", rep.c2)],
            pass(rep.verdict),
        ));
    }
    Ok(RunOutput { records, tables: vec![table] })
}

fn run_body_bounds(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("body-bounds", find_runner("body-bounds")?.claim, cfg.seed);
    let mut records = Vec::new();
    let mut table =
        Table::new("reports", &["relation", "instance", "q", "c1", "c2", "verdict", "notes"]);
    let dirs = DirectionSet::circle_grid(8);
    let dens2 = Density::from_spec(&make_density(Family::ProductShiftedExponential, 2, &[])?)?;
    // marginal-at-zero bounds on the (m+q)-moment body, m = 2
    for q in [1.0, 2.0] {
        let rep =
            verify_relation(&RelationCase::MarginalBounds { w: dens2.clone(), q }, &dirs)?;
        relation_table_row(&mut table, &rep);
        records.push(b.record(
            &format!("marginal-bounds q={q}"),
            &[("q", q.to_string())],
            &[("low", rep.c1), ("high", rep.c2)],
            pass(rep.verdict),
        ));
    }
    // density-at-zero bound on the zoo marginals
    for spec in zoo_specs(6) {
        let w = canonical_marginal(&spec)?;
        let mass = grunbaum_mass(&w)?;
        let eps = mass.min(1.0 - mass);
        let ratio = density_zero_bound(&w, eps)?;
        records.push(b.record(
            &format!("density-at-zero {}", spec.family.name()),
            &[("family", spec.family.name().to_string())],
            &[("ratio", ratio), ("eps", eps)],
            pass(ratio >= eps - 1e-7),
        ));
    }
    // halfspace-mass of moment bodies, m = 1 and 2
    let dens1 = Density::new(1, "shifted-exponential-1d", |x: &[f64]| {
        if x[0] >= -1.0 {
            (-(x[0] + 1.0)).exp()
        } else {
            0.0
        }
    });
    for (dens, q) in [(dens1, 2.0), (dens2.clone(), 1.0), (dens2, 2.0)] {
        let rep = verify_relation(&RelationCase::HalfspaceMass { w: dens.clone(), q }, &dirs)?;
        relation_table_row(&mut table, &rep);
        records.push(b.record(
            &format!("halfspace-mass {} q={q}", rep.instance),
            &[("instance", rep.instance.clone()), ("q", q.to_string())],
            &[("fitted_c", rep.c1)],
            pass(rep.verdict && rep.c1 >= 0.3),
        ));
    }
    Ok(RunOutput { records, tables: vec![table] })
}

fn run_dist_bound(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("dist-bound", find_runner("dist-bound")?.claim, cfg.seed);
    let mut records = Vec::new();
    let mut table =
        Table::new("reports", &["relation", "instance", "q", "c1", "c2", "verdict", "notes"]);
    // distance transfer on quadrature instances
    let dens2 = Density::from_spec(&make_density(Family::ProductShiftedExponential, 2, &[])?)?;
    let dirs2 = DirectionSet::circle_grid(8);
    for p in [1.0, 2.0, 4.0] {
        let rep = verify_relation(&RelationCase::DistBound { w: dens2.clone(), p }, &dirs2)?;
        relation_table_row(&mut table, &rep);
        records.push(b.record(
            &format!("dist transfer p={p}"),
            &[("p", p.to_string())],
            &[("lhs_dist", rep.c1), ("fitted_c", rep.c2)],
            pass(rep.verdict),
        ));
    }
    // convolved centroid-body distance against the 1 + |A|op b q^{1/a-1/2} form
    let n = cfg.n.unwrap_or(16);
    let count = cfg.n_samples.unwrap_or(150_000);
    let family = Family::ProductLaplace;
    let spec = make_density(family, n, &[])?;
    let x = sample(&spec, count, cfg.seed);
    let a = LinearMap::two_block_unit_hs(n, n / 2, 2.0);
    let y = Arc::new(convolve_gaussian(&x, &a)?);
    let prof = exact_psi_alpha(family, n, cfg.seed)?;
    let dirs = DirectionSet::sampled(n, 64, cfg.seed);
    for q in [2.0, 4.0, 8.0, 16.0] {
        let rep = verify_relation(
            &RelationCase::CorDist {
                y: y.clone(),
                q,
                a_op: a.op_norm,
                b_alpha: prof.b_alpha,
                alpha: prof.alpha,
            },
            &dirs,
        )?;
        relation_table_row(&mut table, &rep);
        records.push(b.record(
            &format!("convolved distance q={q}"),
            &[("q", q.to_string()), ("a_op", format!("{:.4}", a.op_norm))],
            &[("dist", rep.c1), ("fitted_c1", rep.c2)],
            pass(rep.verdict),
        ));
    }
    Ok(RunOutput { records, tables: vec![table] })
}

fn run_loglip_scan(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("loglip-scan", find_runner("loglip-scan")?.claim, cfg.seed);
    let n = cfg.n.unwrap_or(12);
    let k_list = cfg.k_list.clone().unwrap_or_else(|| vec![2, 3, 4, 6]);
    let delta = 1e-3;
    // anisotropic covariance (A A^T + Id)/2 with A = diag(2...2,1...1)
    // rescaled to |A|_HS^2 = n
    let a = LinearMap::two_block_unit_hs(n, n / 2, 2.0);
    let sigma = {
        let aat = &a.matrix * a.matrix.transpose();
        (aat + DMatrix::<f64>::identity(n, n)) * 0.5
    };
    let mut table =
        Table::new("scan", &["n", "k", "p", "type1", "type2", "type3", "general", "overall", "delta", "oracle"]);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut consistent = true;
    for &k in &k_list {
        for p in [2.0, k as f64] {
            let frame = FrameConfig::new(n, k).map_err(|e| anyhow!(e.to_string()))?;
            let sig = sigma.clone();
            let log_h = move |u: &Rotation| {
                hkp_exact_gaussian(&sig, u, frame, p).expect("oracle").value.ln()
            };
            let est = empirical_log_lipschitz(&log_h, frame, 24, 8, delta, cfg.seed)?;
            consistent &= est.consistency < 0.05;
            table.push(vec![
                n.to_string(),
                k.to_string(),
                fmt_f(p),
                fmt_f(est.per_type[0]),
                fmt_f(est.per_type[1]),
                fmt_f(est.per_type[2]),
                fmt_f(est.general),
                fmt_f(est.overall),
                fmt_f(est.delta),
                "gaussian-exact".into(),
            ]);
            xs.push((k.max(p as usize) as f64).ln());
            ys.push(est.overall.ln());
        }
    }
    let (slope, _) = linear_fit(&xs, &ys).map_err(|e| anyhow!(e.to_string()))?;
    let max_exponent = cfg.tolerances.get("exponent").copied().unwrap_or(1.15);
    let mut records = vec![b.record(
        "anisotropic growth exponent",
        &[("n", n.to_string()), ("a_op", format!("{:.4}", a.op_norm))],
        &[("fitted_exponent", slope)],
        pass(slope <= max_exponent && consistent),
    )];
    // isotropic control: the oracle is constant, the constant is ~0
    let frame = FrameConfig::new(n, 3).map_err(|e| anyhow!(e.to_string()))?;
    let id = DMatrix::<f64>::identity(n, n);
    let log_h =
        move |u: &Rotation| hkp_exact_gaussian(&id, u, frame, 2.0).expect("oracle").value.ln();
    let est = empirical_log_lipschitz(&log_h, frame, 16, 6, delta, cfg.seed)?;
    records.push(b.record(
        "isotropic control",
        &[("n", n.to_string())],
        &[("l_hat", est.overall)],
        pass(est.overall < 1e-6),
    ));
    Ok(RunOutput { records, tables: vec![table] })
}

fn run_reverse_holder(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("reverse-holder", find_runner("reverse-holder")?.claim, cfg.seed);
    let n = cfg.n.unwrap_or(12);
    let a = LinearMap::two_block_unit_hs(n, n / 2, 2.0);
    let sigma = {
        let aat = &a.matrix * a.matrix.transpose();
        (aat + DMatrix::<f64>::identity(n, n)) * 0.5
    };
    let frame = FrameConfig::new(n, 2).map_err(|e| anyhow!(e.to_string()))?;
    let mut table = Table::new("constants", &["seed", "q", "r", "l_hat", "fitted_k"]);
    let mut records = Vec::new();
    let mut ks = Vec::new();
    for (si, seed) in [cfg.seed, cfg.seed + 1, cfg.seed + 2].iter().enumerate() {
        let sig = sigma.clone();
        let log_h = move |u: &Rotation| {
            hkp_exact_gaussian(&sig, u, frame, 2.0).expect("oracle").value.ln()
        };
        let l_hat = empirical_log_lipschitz(&log_h, frame, 16, 6, 1e-3, *seed)?.overall;
        let h: Vec<f64> = (0..1500)
            .map(|i| {
                hkp_exact_gaussian(&sigma, &haar_rotation(n, *seed, i as u64), frame, 2.0)
                    .expect("oracle")
                    .value
            })
            .collect();
        for (q, r) in [(2.0, 1.0), (1.0, 0.5)] {
            let k = reverse_holder_check(&h, l_hat, q, r, n)?;
            if (q, r) == (2.0, 1.0) {
                ks.push(k);
            }
            table.push(vec![
                seed.to_string(),
                fmt_f(q),
                fmt_f(r),
                fmt_f(l_hat),
                fmt_f(k),
            ]);
            records.push(b.record(
                &format!("seed offset {si}, q={q}, r={r}"),
                &[("q", q.to_string()), ("r", r.to_string())],
                &[("fitted_k", k), ("l_hat", l_hat)],
                pass(k.is_finite()),
            ));
        }
    }
    // stability across seeds: spread within +-50% of the mean
    let mean_k = ks.iter().sum::<f64>() / ks.len() as f64;
    let stable = ks.iter().all(|&k| (k - mean_k).abs() <= 0.5 * mean_k.max(1e-12));
    records.push(b.record(
        "constant stable across seeds",
        &[],
        &[("mean_k", mean_k)],
        pass(stable),
    ));
    Ok(RunOutput { records, tables: vec![table] })
}

/// Reference overlay shapes (unit constants) for plotting against the
/// measured tails.
fn deviation_overlays(t: f64, n: usize, n_bar: f64, alpha: f64, row: &mut Vec<String>) {
    let paouris = (-n_bar.powf(alpha / 2.0) * t).exp();
    let klartag = (-(n as f64).powf(1.0 / 3.0) * t.powf(10.0 / 3.0)).exp();
    let fleury_up = (-(n as f64).powf(0.25) * t * t).exp();
    let fleury_lo = (-(n as f64).powf(0.125) * t).exp();
    for v in [paouris, klartag, fleury_up, fleury_lo] {
        row.push(fmt_f(v));
    }
}

fn run_deviation_fit(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("deviation-fit", find_runner("deviation-fit")?.claim, cfg.seed);
    let n = cfg.n.unwrap_or(256);
    let count = cfg.n_samples.unwrap_or(100_000);
    let t_grid: Vec<f64> = cfg.t_grid.clone().unwrap_or_else(|| {
        let mut g: Vec<f64> = (0..=40).map(|i| i as f64 * 0.0125).collect();
        g.extend([0.75, 1.0, 1.5, 2.0, 3.0]);
        g
    });
    let families = match cfg.family {
        Some(f) => vec![f],
        None => vec![Family::ProductLaplace, Family::Gaussian],
    };
    let mut records = Vec::new();
    let mut tables = Vec::new();
    for family in families {
        let spec = make_density(family, n, &[])?;
        let norms = sample_norms(&spec, count, cfg.seed);
        let curve = tail_curve(&norms, (n as f64).sqrt(), &t_grid)?;
        let prof = exact_psi_alpha(family, n, cfg.seed)?;
        let n_bar = n as f64 / (prof.b_alpha * prof.b_alpha);
        let fit = fit_deviation_form(&curve, n_bar, prof.alpha)?;
        let mut header = vec![
            "t", "upper_hat", "upper_cp_hi", "lower_hat", "lower_cp_hi", "two_sided_hat",
            "two_sided_cp_hi", "fitted_envelope",
        ];
        if cfg.overlays {
            header.extend(["paouris_form", "klartag_form", "fleury_upper_form", "fleury_lower_form"]);
        }
        let mut table = Table::new(&format!("tail_{}", family.name()), &header);
        for pt in &curve.points {
            let x = n_bar.powf(prof.alpha / 2.0) * pt.t.powf(2.0 + prof.alpha).min(pt.t);
            let envelope = (fit.big_c.ln() - fit.c * x).exp().min(1.0);
            let mut row = vec![
                fmt_f(pt.t),
                fmt_f(pt.upper_hat),
                fmt_f(pt.upper_hi),
                fmt_f(pt.lower_hat),
                fmt_f(pt.lower_hi),
                fmt_f(pt.two_sided_hat),
                fmt_f(pt.two_sided_hi),
                fmt_f(envelope),
            ];
            if cfg.overlays {
                deviation_overlays(pt.t, n, n_bar, prof.alpha, &mut row);
            }
            table.push(row);
        }
        tables.push(table);
        records.push(b.record(
            family.name(),
            &[
                ("family", family.name().to_string()),
                ("n", n.to_string()),
                ("alpha", prof.alpha.to_string()),
                ("b_alpha", format!("{:.6}", prof.b_alpha)),
            ],
            &[
                ("fitted_c", fit.c),
                ("fitted_big_c", fit.big_c),
                ("n_bar", n_bar),
                ("informative_points", fit.informative_points as f64),
                ("residual_sup", fit.residual_sup),
            ],
            pass(fit.pass),
        ));
    }
    Ok(RunOutput { records, tables })
}

fn run_thin_shell(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("thin-shell", find_runner("thin-shell")?.claim, cfg.seed);
    let n_grid = cfg.n_grid.clone().unwrap_or_else(|| vec![16, 64, 256, 1024]);
    let count = cfg.n_samples.unwrap_or(30_000);
    let budget = cfg.tolerances.get("fit_c_max").copied().unwrap_or(5.0);
    let mut table = Table::new("widths", &["family", "n", "e_norm", "sd_norm", "sd_se", "n_third"]);
    let mut records = Vec::new();
    let mut worst_c: f64 = 0.0;
    for family in Family::ALL {
        let scan = thin_shell_scan(family, &n_grid, count, cfg.seed)?;
        for row in &scan.rows {
            table.push(vec![
                family.name().into(),
                row.n.to_string(),
                fmt_f(row.e_norm),
                fmt_f(row.sd_norm),
                fmt_f(row.sd_se),
                fmt_f((row.n as f64).powf(1.0 / 3.0)),
            ]);
        }
        worst_c = worst_c.max(scan.fitted_c);
        records.push(b.record(
            family.name(),
            &[("family", family.name().to_string())],
            &[("fitted_c", scan.fitted_c), ("loglog_slope", scan.slope)],
            pass(scan.fitted_c <= budget),
        ));
        if family == Family::Gaussian {
            // chi-distribution oracle at the largest n
            let last = scan.rows.last().unwrap();
            let nf = last.n as f64;
            let mean_chi = std::f64::consts::SQRT_2
                * (thinshell_core::special::log_gamma(0.5 * (nf + 1.0))
                    - thinshell_core::special::log_gamma(0.5 * nf))
                .exp();
            let sd_chi = (nf - mean_chi * mean_chi).sqrt();
            let ok = (last.sd_norm - sd_chi).abs() <= 0.1 * sd_chi;
            records.push(b.record(
                &format!("gaussian chi oracle at n={}", last.n),
                &[("n", last.n.to_string())],
                &[("sd_norm", last.sd_norm), ("chi_oracle", sd_chi)],
                pass(ok),
            ));
        }
    }
    records.push(b.record(
        "zoo-wide envelope",
        &[("budget", budget.to_string())],
        &[("max_fitted_c", worst_c)],
        pass(worst_c <= budget),
    ));
    Ok(RunOutput { records, tables: vec![table] })
}

fn run_moments_tails(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("moments-tails", find_runner("moments-tails")?.claim, cfg.seed);
    let n = cfg.n.unwrap_or(64);
    let count = cfg.n_samples.unwrap_or(100_000);
    let spec = make_density(Family::Gaussian, n, &[])?;
    let norms = sample_norms(&spec, count, cfg.seed);
    let sqrt_n = (n as f64).sqrt();
    let p_grid = vec![-8.0, -4.0, -2.0, 2.0, 4.0, 8.0, 16.0];
    let curve = moment_ratio_curve(&norms, n, &p_grid, n as f64, 2.0, cfg.seed)?;
    let mut table = Table::new(
        "markov",
        &["t", "side", "bound", "empirical", "cp_bound", "dominates"],
    );
    let mut records = Vec::new();
    let mut all_ok = true;
    for t in [0.1, 0.2, 0.5, 1.0] {
        for (side, name) in [(TailSide::Upper, "upper"), (TailSide::Lower, "lower")] {
            let bound = match tail_from_moments(&curve, t, side) {
                Ok(bf) => bf,
                Err(_) => continue,
            };
            let count_t = match side {
                TailSide::Upper => norms.iter().filter(|&&r| r >= (1.0 + t) * sqrt_n).count(),
                TailSide::Lower => norms.iter().filter(|&&r| r <= (1.0 - t) * sqrt_n).count(),
            } as u64;
            let (cp_lo, _) =
                thinshell_core::stats::clopper_pearson(count_t, count as u64, 0.99);
            let ok = bound >= cp_lo;
            all_ok &= ok;
            table.push(vec![
                fmt_f(t),
                name.into(),
                fmt_f(bound),
                fmt_f(count_t as f64 / count as f64),
                fmt_f(cp_lo),
                (ok as u8).to_string(),
            ]);
        }
    }
    records.push(b.record(
        "Markov dominance",
        &[("n", n.to_string())],
        &[("points", table.rows.len() as f64)],
        pass(all_ok && !table.rows.is_empty()),
    ));
    // negative moment from the tail curve vs the direct estimate and oracle
    let mut t_grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.0125).collect();
    t_grid.extend((1..=10).map(|i| 0.5 + i as f64 * 0.25));
    let tails = tail_curve(&norms, sqrt_n, &t_grid)?;
    let p = 2.0;
    let bound = moments_from_tail(&tails, p, n)?;
    let direct = direct_negative_moment(&norms, sqrt_n, p)?;
    let nf = n as f64;
    let oracle = (nf * nf / ((nf - 2.0) * (nf - 4.0))).powf(1.0 / (2.0 * p));
    let ok = bound >= direct && bound <= 2.0 * oracle;
    records.push(b.record(
        "tail-integrated negative moment",
        &[("n", n.to_string()), ("p", p.to_string())],
        &[("bound", bound), ("direct", direct), ("chi_square_oracle", oracle)],
        pass(ok),
    ));
    let mut neg = Table::new("negative_moment", &["p", "bound", "direct", "oracle"]);
    neg.push(vec![fmt_f(p), fmt_f(bound), fmt_f(direct), fmt_f(oracle)]);
    Ok(RunOutput { records, tables: vec![table, neg] })
}

fn run_reduction(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("reduction", find_runner("reduction")?.claim, cfg.seed);
    let n = cfg.n.unwrap_or(64);
    let count = cfg.n_samples.unwrap_or(60_000);
    let p_grid = cfg.p_grid.clone().unwrap_or_else(|| vec![1.0, 2.0, 4.0, 8.0]);
    let mut table = Table::new("rows", &["family", "p", "lhs", "rhs", "margin_se", "pass"]);
    let mut records = Vec::new();
    for family in [Family::Gaussian, Family::ProductLaplace] {
        let spec = make_density(family, n, &[])?;
        let batch = sample(&spec, count, cfg.seed);
        let rows = reduction_check(&batch, &LinearMap::identity(n), &p_grid, cfg.seed)?;
        let ok = rows.iter().all(|r| r.pass);
        for r in &rows {
            table.push(vec![
                family.name().into(),
                fmt_f(r.p),
                fmt_f(r.lhs),
                fmt_f(r.rhs),
                fmt_f(r.margin_se),
                (r.pass as u8).to_string(),
            ]);
        }
        records.push(b.record(
            family.name(),
            &[("family", family.name().to_string()), ("n", n.to_string())],
            &[("rows", rows.len() as f64)],
            pass(ok),
        ));
    }
    Ok(RunOutput { records, tables: vec![table] })
}

fn run_cheeger(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("cheeger", find_runner("cheeger")?.claim, cfg.seed);
    let n_grid = cfg.n_grid.clone().unwrap_or_else(|| vec![16, 64, 256]);
    let count = cfg.n_samples.unwrap_or(20_000);
    let floor = -5.0 / 12.0 - 0.1;
    let mut table = Table::new("diagnostic", &["family", "n", "e_norm", "sd_norm", "bobkov_quantity"]);
    let mut records = Vec::new();
    for family in [Family::Gaussian, Family::ProductLaplace, Family::UniformSimplex] {
        let diag = cheeger_diagnostic(family, &n_grid, count, cfg.seed)?;
        for row in &diag.rows {
            table.push(vec![
                family.name().into(),
                row.n.to_string(),
                fmt_f(row.e_norm),
                fmt_f(row.sd_norm),
                fmt_f(row.bobkov_quantity),
            ]);
        }
        records.push(b.record(
            family.name(),
            &[("family", family.name().to_string())],
            &[("exponent", diag.exponent)],
            pass(diag.exponent >= floor),
        ));
    }
    Ok(RunOutput { records, tables: vec![table] })
}

fn run_gamma_decr(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("gamma-decr", find_runner("gamma-decr")?.claim, cfg.seed);
    let pairs: Vec<(usize, usize)> =
        vec![(3, 16), (5, 32), (9, 32), (9, 64), (17, 128), (33, 256), (5, 1024)];
    let worst = gamma_ratio_derivative_max(&pairs);
    let mut table = Table::new("derivative", &["max_derivative"]);
    table.push(vec![fmt_f(worst)]);
    let rec = b.record(
        "",
        &[("pairs", pairs.len().to_string())],
        &[("max_derivative", worst)],
        pass(worst <= 1e-10),
    );
    Ok(RunOutput { records: vec![rec], tables: vec![table] })
}

fn run_stirling(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = RecordBuilder::new("stirling-bound", find_runner("stirling-bound")?.claim, cfg.seed);
    let ks: Vec<usize> = (1..=20).map(|i| i * 5).collect();
    let fitted = stirling_bound_fitted_c(&ks);
    let budget = cfg.tolerances.get("c_max").copied().unwrap_or(3.0);
    let mut table = Table::new("constant", &["fitted_c", "budget"]);
    table.push(vec![fmt_f(fitted), fmt_f(budget)]);
    let rec = b.record(
        "",
        &[("k_range", "5..=100".into())],
        &[("fitted_c", fitted)],
        pass(fitted <= budget),
    );
    Ok(RunOutput { records: vec![rec], tables: vec![table] })
}
