//! Acceptance run: one line per criterion, at the stated tolerances.
//!
//! A criterion that fails for a documented, analysed reason prints FAIL
//! with that reason and does not abort the run. Any other failure makes
//! the process exit non-zero.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smoothlab::dropedge::{aggregation_unbiasedness, run_dropedge_dynamics, sample, DropPlan};
use smoothlab::graph::connected_components;
use smoothlab::lab::{cmd_check, initial_features, run_suite, suite_seed, CheckConfig, Suite};
use smoothlab::linalg::{gaussian_matrix, sym_eigen};
use smoothlab::propagate::{run_in_context, DynamicsContext, ModelKind, ModelSpec};
use smoothlab::spectral::{degree_ratio_extremes, dropedge_bounds, lambda_at};
use smoothlab::subspace::{build_subspace, distance_componentwise, distance_to_subspace};
use smoothlab::svd::truncated_svd;
use smoothlab::synth::{generate, population, PopulationSpec, SyntheticRecipe};
use smoothlab::theory::{TheoremReport, TRACE_SLACK};

const SEED: u64 = 7;

enum Verdict {
    Pass(String),
    Fail(String),
    /// Fails for a reason analysed in the project notes.
    KnownFail(String),
}

fn check_cfg(suite: Suite) -> CheckConfig {
    CheckConfig {
        suite,
        seed: SEED,
        trials: None,
        p: None,
        out: std::env::temp_dir(),
    }
}

fn within(t: Duration, limit_s: f64) -> bool {
    t.as_secs_f64() < limit_s
}

fn suite_verdict(report: &TheoremReport, t: Duration, limit_s: f64, extra: &str) -> Verdict {
    let msg = format!(
        "{} cases, {} violations, worst slack {:.3e}{extra}, {:.2}s (limit {limit_s}s)",
        report.n_cases,
        report.n_violations,
        report.worst_slack,
        t.as_secs_f64()
    );
    if report.passed() && within(t, limit_s) {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn criterion1() -> Verdict {
    let t = Instant::now();
    let rep = run_suite(Suite::Theorem1, &check_cfg(Suite::Theorem1)).unwrap();
    let graphs = rep.details.iter().filter(|c| c.case_id.ends_with("/multiplicity")).count();
    if graphs != 50 {
        return Verdict::Fail(format!("expected 50 graphs, saw {graphs}"));
    }
    suite_verdict(&rep, t.elapsed(), 10.0, " over 50 graphs")
}

fn criterion2() -> Verdict {
    let t = Instant::now();
    let rep = run_suite(Suite::Lemma1, &check_cfg(Suite::Lemma1)).unwrap();
    for ineq in ["ineq8", "ineq9", "ineq10", "ineq11"] {
        let n = rep.details.iter().filter(|c| c.case_id.ends_with(ineq)).count();
        if n != 1000 {
            return Verdict::Fail(format!("{ineq}: {n} cases, expected 1000"));
        }
    }
    suite_verdict(&rep, t.elapsed(), 30.0, "")
}

fn criterion3() -> Verdict {
    let t = Instant::now();
    let rep = run_suite(Suite::Theorem2, &check_cfg(Suite::Theorem2)).unwrap();
    let prefixes: BTreeSet<String> = rep
        .details
        .iter()
        .map(|c| c.case_id.rsplit_once('/').unwrap().0.to_string())
        .collect();
    for want in [
        "gcn/depth400/linear",
        "gcn-b/depth400/linear",
        "resgcn/depth400/linear",
        "appnp/depth400/linear",
        "gcn/depth50/relu",
        "gcn-b/depth50/relu",
        "resgcn/depth50/relu",
    ] {
        if !prefixes.contains(want) {
            return Verdict::Fail(format!("missing trace {want}"));
        }
    }
    suite_verdict(&rep, t.elapsed(), 60.0, &format!(" over {} traces", prefixes.len()))
}

fn criterion4() -> Verdict {
    let g = generate(&SyntheticRecipe::small_cora(SEED)).unwrap();
    let ctx = DynamicsContext::new(&g).unwrap();
    let h0 = initial_features(&g, 2, SEED);
    let run = |kind| run_in_context(&ctx, &ModelSpec::preset(kind, 400, 2, SEED), h0.view(), &[]).unwrap();

    let gcn = run(ModelKind::Gcn);
    let ratio = gcn.d_m[400] / gcn.d_m[0];

    let gcnb = run(ModelKind::GcnBias);
    let env_b = gcnb.envelope().unwrap();
    let above = gcnb.d_m.iter().zip(&env_b).filter(|(d, e)| **d > **e + TRACE_SLACK).count();

    let res = run(ModelKind::ResGcn);
    let (v_gcn, v_res) = (gcn.params.unwrap().v, res.params.unwrap().v);
    let env_g = gcn.envelope().unwrap();
    let env_r = res.envelope().unwrap();
    let env_ordered = env_r.iter().zip(&env_g).skip(1).all(|(r, g)| r > g);

    let appnp = run(ModelKind::Appnp);
    let delta = (appnp.d_m[400] - appnp.d_m[399]).abs();
    // H* = β (I − (1 − β) Â)^{-1} H₀, solved directly
    let n = g.n_nodes();
    let m = Array2::<f64>::eye(n) - &ctx.propagator.matrix * 0.5;
    let fixed = common::solve(&m, &h0) * 0.5;
    let fp_err = common::max_abs_diff(&appnp.final_state, &fixed);

    let ok = ratio <= 1e-6 && above == 0 && v_res > v_gcn && env_ordered && delta <= 1e-8 && fp_err <= 1e-6;
    let msg = format!(
        "gcn final/initial {ratio:.2e}; gcn-b layers above r+envelope {above} (r = {:.3e}, final {:.3e}); \
         v resgcn {v_res:.4} > v gcn {v_gcn:.4}, envelopes ordered {env_ordered}; \
         appnp last delta {delta:.1e}, fixed-point error {fp_err:.1e}",
        gcnb.params.unwrap().r,
        gcnb.d_m[400]
    );
    if ok {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

/// The frozen-a gap (γ − μ) = (r_max − r_min) + a₀(r_max + r_min) rises
/// for small p exactly when (1 − a₀)(d_max + 1) > (1 + a₀)(d_min + 1).
/// Violations confined to such graphs and to the gap records are the
/// documented failure; anything else is not.
fn criterion5() -> Verdict {
    let t = Instant::now();
    let rep = run_suite(Suite::Theorem3, &check_cfg(Suite::Theorem3)).unwrap();
    let elapsed = t.elapsed();
    let graphs = population(suite_seed(SEED, Suite::Theorem3), 20, &PopulationSpec::default());

    let families = ["mu<=lambda", "lambda<=gamma", "mu-frozen", "gamma-frozen", "gap-sum-form", "limit", "near-limit"];
    let mut other_failures = Vec::new();
    let mut gap_graphs = BTreeSet::new();
    for c in rep.failures() {
        if c.case_id.contains("/gap-frozen/") {
            gap_graphs.insert(c.case_id.split('/').next().unwrap().to_string());
        } else {
            other_failures.push(c.case_id.clone());
        }
    }
    let exact_ok = rep.details.iter().filter(|c| c.case_id.starts_with("path2/")).all(|c| c.pass);
    let covered = families.iter().all(|f| rep.details.iter().any(|c| c.case_id.contains(&format!("/{f}"))));

    let mut unexplained = Vec::new();
    for label in &gap_graphs {
        let i: usize = label[1..].parse().unwrap();
        let g = &graphs[i];
        let a0 = dropedge_bounds(g, &[0.0]).unwrap().points[0].a;
        let d = g.degrees().d;
        let d_max = d.iter().copied().fold(0.0, f64::max);
        let d_min = d.iter().copied().fold(f64::INFINITY, f64::min);
        // at p = 0 every ratio is 1 and the gap is 2a₀; at p = 0.1 it should be larger
        let (lo, hi) = degree_ratio_extremes(&d, 0.1);
        let predicted = ((1.0 + a0) * hi - (1.0 - a0) * lo) - 2.0 * a0;
        let grows = (1.0 - a0) * (d_max + 1.0) > (1.0 + a0) * (d_min + 1.0);
        if !grows || predicted <= 0.0 {
            unexplained.push(label.clone());
        }
    }
    let gap_records = rep.details.iter().filter(|c| c.case_id.contains("/gap-frozen/")).count();
    let gap_fail = rep.failures().filter(|c| c.case_id.contains("/gap-frozen/")).count();
    let msg = format!(
        "{} cases; sandwich, frozen mu/gamma monotonicity, limits, path2 exact (1/3 to 1e-12) and the \
         a0(r_max + r_min) gap form all hold; frozen gamma-mu non-increasing fails on {gap_fail}/{gap_records} \
         steps in graphs {:?}, each satisfying (1-a0)(d_max+1) > (1+a0)(d_min+1), where the dropped \
         (r_max - r_min) term makes the gap rise at small p; {:.2}s",
        rep.n_cases,
        gap_graphs,
        elapsed.as_secs_f64()
    );
    if !other_failures.is_empty() || !exact_ok || !covered || !unexplained.is_empty() {
        return Verdict::Fail(format!(
            "unexpected: other failures {other_failures:?}, exact ok {exact_ok}, all families present {covered}, \
             unexplained gap graphs {unexplained:?}"
        ));
    }
    if gap_graphs.is_empty() {
        Verdict::Pass(msg)
    } else {
        Verdict::KnownFail(msg)
    }
}

fn criterion6() -> Verdict {
    let t = Instant::now();
    let rep = run_suite(Suite::Theorem4, &check_cfg(Suite::Theorem4)).unwrap();
    let rates: BTreeSet<String> = rep
        .details
        .iter()
        .filter_map(|c| c.case_id.split('/').nth(1).map(String::from))
        .collect();
    let isolated = rep.details.iter().filter(|c| c.case_id.ends_with("all-isolated")).count();
    if rates.len() != 4 || isolated != 10 || !rep.details.iter().any(|c| c.case_id.ends_with("trials1000")) {
        return Verdict::Fail(format!("unexpected layout: rates {rates:?}, p=1 records {isolated}"));
    }
    suite_verdict(&rep, t.elapsed(), 20.0, " (10 graphs x p in {0.25, 0.5, 0.75} x 1000 draws, p = 1 -> N)")
}

fn criterion7() -> Verdict {
    // exact subset size, against an integer oracle floor(V (4 − k) / 4)
    let mut checked = 0usize;
    let mut wrong = 0usize;
    for (i, g) in population(71, 10, &PopulationSpec::default()).iter().enumerate() {
        let v = g.n_edges();
        for k in 0..=4usize {
            let p = k as f64 / 4.0;
            for t in 0..200u64 {
                let plan = DropPlan::layer_wise(p, 2, (i as u64) << 32 | t);
                for s in sample(g, &plan).unwrap() {
                    checked += 1;
                    let want = v * (4 - k) / 4;
                    let distinct: BTreeSet<_> = s.kept_edges.iter().collect();
                    if s.kept_edges.len() != want || distinct.len() != want {
                        wrong += 1;
                    }
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let spec = PopulationSpec {
        max_nodes: 100,
        min_components: 1,
        max_components: 1,
        weighted: true,
    };
    let g = loop {
        let g = smoothlab::synth::random_graph(&mut rng, &spec);
        if g.n_nodes() == 100 {
            break g;
        }
    };
    let h = gaussian_matrix(&mut rng, 100, 3, 1.0);
    let rep = aggregation_unbiasedness(&g, 0.5, h.view(), 20000, SEED, 4.0).unwrap();
    let msg = format!(
        "{checked} samples, {wrong} with wrong size; Bernoulli mean over 20000 trials on {} nodes / {} edges: \
         max |z| = {:.2} (limit 4), {} entries beyond",
        g.n_nodes(),
        g.n_edges(),
        rep.max_z,
        rep.violations
    );
    if wrong == 0 && rep.passed() {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn criterion8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let graphs = population(88, 20, &PopulationSpec::default());
    let (mut forms, mut ls) = (0.0f64, 0.0f64);
    for k in 0..200 {
        let g = &graphs[k % graphs.len()];
        let comp = connected_components(g);
        let basis = build_subspace(g, &comp);
        let c = rng.random_range(1..=4);
        let h = gaussian_matrix(&mut rng, g.n_nodes(), c, 1.0);
        let d = distance_to_subspace(&basis, h.view()).unwrap();
        forms = forms.max((d - distance_componentwise(&basis, h.view()).unwrap()).abs());
        let deg = g.degrees().d;
        let mut b = Array2::zeros((g.n_nodes(), comp.m_components));
        for (i, &m) in comp.labels.iter().enumerate() {
            b[(i, m)] = (deg[i] + 1.0).sqrt();
        }
        ls = ls.max((d - common::least_squares_residual(&b, &h)).abs());
    }

    let mut eig = 0.0f64;
    for _ in 0..100 {
        let x = gaussian_matrix(&mut rng, 8, 8, 1.0);
        let a = (&x + &x.t()) * 0.5;
        let ours = sym_eigen(a.view(), false).unwrap().values;
        for (u, v) in ours.iter().zip(common::charpoly_eigenvalues(&a)) {
            eig = eig.max((u - v).abs());
        }
    }

    let mut svd_err = 0.0f64;
    for _ in 0..50 {
        let x = gaussian_matrix(&mut rng, 20, 5, 1.0);
        let sig2 = common::jacobi_eigenvalues(&x.t().dot(&x));
        for k in 1..=5 {
            let s = truncated_svd(x.view(), k).unwrap();
            let resid = (&x - &s.reconstruct()).iter().map(|e| e * e).sum::<f64>().sqrt();
            let best: f64 = sig2[..5 - k].iter().map(|s| s.max(0.0)).sum::<f64>().sqrt();
            svd_err = svd_err.max((resid - best).abs());
        }
    }
    let msg = format!(
        "projection vs componentwise {forms:.1e}, vs least squares {ls:.1e} (200 inputs, limit 1e-10); \
         eigenvalues vs characteristic polynomial {eig:.1e} (limit 1e-8); SVD vs Eckart-Young {svd_err:.1e} (limit 1e-8)"
    );
    if forms <= 1e-10 && ls <= 1e-10 && eig <= 1e-8 && svd_err <= 1e-8 {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn criterion9() -> Verdict {
    let g = generate(&SyntheticRecipe::small_cora(SEED)).unwrap();
    let ctx = DynamicsContext::new(&g).unwrap();
    let h0 = initial_features(&g, 2, SEED);
    let spec = ModelSpec::preset(ModelKind::Gcn, 400, 2, SEED);
    let base = run_in_context(&ctx, &spec, h0.view(), &[]).unwrap();
    let lambda0 = lambda_at(&g, 0.0).unwrap();
    let env0 = base.envelope().unwrap();

    let mut ok = (lambda0 - ctx.lambda).abs() < 1e-15;
    let mut parts = vec![format!("lambda(0) = {lambda0:.6}")];
    for p in [0.5, 0.7] {
        let lp = lambda_at(&g, p).unwrap();
        for (mode, plan) in [
            ("one-shot", DropPlan::one_shot(p, SEED)),
            ("layer-wise", DropPlan::layer_wise(p, 400, SEED)),
        ] {
            let tr = run_dropedge_dynamics(&ctx, &g, &spec, h0.view(), &plan, &[]).unwrap();
            let params = tr.params.unwrap();
            let env = tr.envelope().unwrap();
            let slower = env.iter().zip(&env0).all(|(e, e0)| e >= e0);
            ok &= lp >= lambda0 - 1e-9 && params.v >= base.params.unwrap().v - 1e-12 && slower;
            if mode == "one-shot" {
                parts.push(format!("lambda({p}) = {lp:.6}, rate {:.6} vs {:.6}", params.v, base.params.unwrap().v));
            }
            ok &= (params.lambda - lp).abs() < 1e-15;
        }
    }
    let msg = parts.join("; ") + "; emitted envelopes (one-shot and layer-wise) dominate the p = 0 envelope";
    if ok {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn criterion10() -> Verdict {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut times = Vec::new();
    let mut passed = Vec::new();
    for d in &dirs {
        let cfg = CheckConfig {
            out: d.path().to_path_buf(),
            ..check_cfg(Suite::All)
        };
        let t = Instant::now();
        let out = cmd_check(&cfg).unwrap();
        times.push(t.elapsed());
        passed.push(out.passed());
    }
    let mut names: Vec<_> = fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let identical = names
        .iter()
        .all(|n| fs::read(dirs[0].path().join(n)).unwrap() == fs::read(dirs[1].path().join(n)).unwrap());
    let slowest = times.iter().max().unwrap().as_secs_f64();
    let msg = format!(
        "{} report files byte-identical: {identical}; slowest full run {slowest:.2}s (limit 180s); \
         suites all passing: {} (see criterion 5)",
        names.len(),
        passed[0]
    );
    if identical && names.len() == 11 && slowest < 180.0 {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn main() -> ExitCode {
    // quiet when listed by the test harness
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("theorem 1 spectrum on 50 random graphs", criterion1),
        ("lemma 1 inequalities, 1000 cases each", criterion2),
        ("theorem 2 per-layer inequality on depth-400 and ReLU traces", criterion3),
        ("untrained dynamics on the two-component graph", criterion4),
        ("theorem 3 bounds on 20 random graphs", criterion5),
        ("theorem 4 component monotonicity", criterion6),
        ("DropEdge sampling statistics", criterion7),
        ("independent oracles", criterion8),
        ("DropEdge slows convergence on the two-component graph", criterion9),
        ("end-to-end determinism and wall time", criterion10),
    ];
    let mut unexpected = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let verdict = f();
        let secs = t.elapsed().as_secs_f64();
        let (tag, msg) = match verdict {
            Verdict::Pass(m) => ("PASS", m),
            Verdict::KnownFail(m) => ("FAIL (known, analysed)", m),
            Verdict::Fail(m) => {
                unexpected += 1;
                ("FAIL", m)
            }
        };
        println!("criterion {:>2} {tag}: {name} [{secs:.2}s] {msg}", i + 1);
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
