//! Executable checks for the over-smoothing inequalities.
//!
//! Every checker returns a [`TheoremReport`]: one [`CaseRecord`] per
//! evaluated inequality `lhs ≤ rhs (+ slack)`. Reports serialize to a
//! line-oriented text form and to CSV with the columns
//! `theorem_id,case_id,lhs,rhs,slack,pass`.

use std::fmt::Write as _;

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dropedge::{component_monotonicity, DropPlan};
use crate::error::{Error, Result};
use crate::graph::{build_propagator, connected_components, Graph, Normalization};
use crate::linalg::{gaussian_matrix, orthonormalize_columns, top_singular_value};
use crate::propagate::{DynamicsTrace, LayerStack, ModelKind, ModelSpec, SparseOp};
use crate::seed::mix;
use crate::spectral::{
    degree_ratio_extremes, dropedge_bounds, eigenvalues, second_lambda_from_values, top_multiplicity, LIMIT_EPS,
};
use crate::subspace::{build_subspace, distance_of_bias, distance_to_subspace, SubspaceBasis};

/// Additive slack for single-step algebraic inequalities.
pub const ALGEBRAIC_SLACK: f64 = 1e-9;
/// Additive slack for inequalities evaluated along propagation traces.
pub const TRACE_SLACK: f64 = 1e-7;

/// Convergence factor v and radius r of one model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceParams {
    pub kind: ModelKind,
    pub v: f64,
    pub r: f64,
    pub s: f64,
    pub lambda: f64,
}

impl ConvergenceParams {
    /// r + v^l |d₀ − r|.
    pub fn envelope(&self, layer: usize, d0: f64) -> f64 {
        self.r + self.v.powi(layer as i32) * (d0 - self.r).abs()
    }
}

/// - GCN: v = sλ, r = 0
/// - GCN-b: v = sλ, r = sup_l d_ℳ(b_l) / (1 − v)
/// - ResGCN: v = sλ + α, r = 0
/// - APPNP: v = (1 − β)λ, r = β d_ℳ(H₀) / (1 − v)
/// - self-feature GCN: v = sλ + s_self, r = 0
pub fn convergence_params(
    spec: &ModelSpec,
    stack: &LayerStack,
    lambda: f64,
    basis: &SubspaceBasis,
    h0: Option<ArrayView2<'_, f64>>,
) -> Result<ConvergenceParams> {
    let s = stack.s_sup;
    let base = ConvergenceParams {
        kind: spec.kind,
        v: s * lambda,
        r: 0.0,
        s,
        lambda,
    };
    match spec.kind {
        ModelKind::Gcn => Ok(base),
        ModelKind::GcnBias => {
            let bias = spec
                .bias
                .as_ref()
                .ok_or_else(|| Error::MissingExtras("gcn-b needs a bias".into()))?;
            let d_b = (0..spec.depth)
                .map(|l| distance_of_bias(basis, bias.row(l, spec.width).view()))
                .fold(0.0_f64, f64::max);
            radius(base, d_b)
        }
        ModelKind::ResGcn => {
            let alpha = spec.alpha.ok_or_else(|| Error::MissingExtras("alpha".into()))?;
            Ok(ConvergenceParams {
                v: s * lambda + alpha,
                ..base
            })
        }
        ModelKind::Appnp => {
            let beta = spec.beta.ok_or_else(|| Error::MissingExtras("beta".into()))?;
            let h0 = h0.ok_or_else(|| Error::MissingExtras("appnp radius needs H0".into()))?;
            let d0 = distance_to_subspace(basis, h0)?;
            radius(
                ConvergenceParams {
                    v: (1.0 - beta) * lambda,
                    s: 0.0,
                    ..base
                },
                beta * d0,
            )
        }
        ModelKind::GcnSelf => {
            let s_self = stack
                .s_self_sup
                .ok_or_else(|| Error::MissingExtras("self weights".into()))?;
            Ok(ConvergenceParams {
                v: s * lambda + s_self,
                ..base
            })
        }
    }
}

fn radius(p: ConvergenceParams, numerator: f64) -> Result<ConvergenceParams> {
    if p.v >= 1.0 {
        return Err(Error::UndefinedRadius { v: p.v });
    }
    Ok(ConvergenceParams {
        r: numerator / (1.0 - p.v),
        ..p
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseRecord {
    pub case_id: String,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs; negative values are tolerated down to −tolerance.
    pub slack: f64,
    pub pass: bool,
}

impl CaseRecord {
    pub fn new(case_id: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        CaseRecord {
            case_id: case_id.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            pass: lhs <= rhs + tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremReport {
    pub theorem_id: String,
    pub n_cases: usize,
    pub n_violations: usize,
    pub worst_slack: f64,
    pub details: Vec<CaseRecord>,
}

impl TheoremReport {
    pub fn from_records(theorem_id: impl Into<String>, details: Vec<CaseRecord>) -> Self {
        let n_violations = details.iter().filter(|c| !c.pass).count();
        let worst_slack = details.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min);
        TheoremReport {
            theorem_id: theorem_id.into(),
            n_cases: details.len(),
            n_violations,
            worst_slack,
            details,
        }
    }

    pub fn passed(&self) -> bool {
        self.n_violations == 0
    }

    pub fn merge(theorem_id: impl Into<String>, reports: Vec<TheoremReport>) -> Self {
        let details = reports.into_iter().flat_map(|r| r.details).collect();
        Self::from_records(theorem_id, details)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseRecord> {
        self.details.iter().filter(|c| !c.pass)
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{} cases={} violations={} worst_slack={} {}",
            self.theorem_id,
            self.n_cases,
            self.n_violations,
            fmt_num(self.worst_slack),
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = self.summary_line();
        out.push('\n');
        for c in &self.details {
            let _ = writeln!(
                out,
                "{} lhs={} rhs={} slack={} {}",
                c.case_id,
                fmt_num(c.lhs),
                fmt_num(c.rhs),
                fmt_num(c.slack),
                if c.pass { "pass" } else { "FAIL" }
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("theorem_id,case_id,lhs,rhs,slack,pass\n");
        for c in &self.details {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                self.theorem_id,
                c.case_id,
                fmt_num(c.lhs),
                fmt_num(c.rhs),
                fmt_num(c.slack),
                c.pass
            );
        }
        out
    }
}

/// Decimal scientific notation with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Bound on ‖Âê_m − ê_m‖ for the top eigenvectors.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

/// Spectrum of Â against the component structure: the eigenvalue 1 has
/// multiplicity M, every other eigenvalue has modulus below 1 − 1e-9, and
/// each ê_m is an eigenvector for 1.
pub fn check_theorem1(g: &Graph, label: &str) -> Result<TheoremReport> {
    let prop = build_propagator(g, Normalization::AugNormAdj, 0.0)?;
    let comp = connected_components(g);
    let values = eigenvalues(&prop)?;
    let m = comp.m_components;
    let mult = top_multiplicity(&values);
    let mut details = vec![CaseRecord::new(
        format!("{label}/multiplicity"),
        mult.abs_diff(m) as f64,
        0.0,
        0.0,
    )];
    let rest = values.len().saturating_sub(m);
    let below = values[..rest].iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if rest > 0 {
        details.push(CaseRecord::new(format!("{label}/below-top"), below, 1.0 - LIMIT_EPS, 0.0));
    }
    let basis = build_subspace(g, &comp);
    let image = prop.matrix.dot(&basis.e_hat);
    for (k, (col, e)) in image.columns().into_iter().zip(basis.e_hat.columns()).enumerate() {
        let res = col.iter().zip(e).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        details.push(CaseRecord::new(format!("{label}/residual{k}"), res, EIGEN_RESIDUAL_TOL, 0.0));
    }
    Ok(TheoremReport::from_records("theorem1", details))
}

/// One Lemma 1 case: the random inputs drawn for it and the four
/// inequalities evaluated on them.
#[derive(Debug, Clone)]
pub struct Lemma1Case {
    pub h: Array2<f64>,
    pub w: Array2<f64>,
    pub b: Array2<f64>,
    pub alpha1: f64,
    pub alpha2: f64,
}

/// Fixed per-graph data for Lemma 1.
#[derive(Debug, Clone)]
pub struct Lemma1Setup {
    pub op: SparseOp,
    pub basis: SubspaceBasis,
    pub lambda: f64,
}

impl Lemma1Setup {
    pub fn new(g: &Graph) -> Result<Self> {
        let prop = build_propagator(g, Normalization::AugNormAdj, 0.0)?;
        let comp = connected_components(g);
        let lambda = second_lambda_from_values(&eigenvalues(&prop)?, &comp)?.lambda;
        Ok(Lemma1Setup {
            op: SparseOp::from_dense(&prop.matrix),
            basis: build_subspace(g, &comp),
            lambda,
        })
    }
}

/// Draws the inputs of case `k` from `mix(seed, k)`. One case in eight
/// puts H inside ℳ and one in four uses an orthogonal W.
pub fn lemma1_case(setup: &Lemma1Setup, seed: u64, k: u64) -> Lemma1Case {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, k));
    let n = setup.basis.n();
    let c = rng.random_range(1..=4);
    let h = if rng.random_range(0..8) == 0 {
        let coeff = gaussian_matrix(&mut rng, setup.basis.dim(), c, 1.0);
        setup.basis.embed(coeff.view())
    } else {
        gaussian_matrix(&mut rng, n, c, 1.0)
    };
    let w = if rng.random_range(0..4) == 0 {
        let mut w = gaussian_matrix(&mut rng, c, c, 1.0);
        orthonormalize_columns(&mut w);
        w
    } else {
        let scale = rng.random_range(0.1..2.0);
        gaussian_matrix(&mut rng, c, c, scale)
    };
    let b = gaussian_matrix(&mut rng, n, c, 1.0);
    Lemma1Case {
        h,
        w,
        b,
        alpha1: rng.random_range(0.0..2.0),
        alpha2: rng.random_range(0.0..2.0),
    }
}

/// Evaluates inequalities 8–11 on one case:
/// d(ÂH) ≤ λ d(H), d(HW) ≤ s d(H), d(ReLU(H)) ≤ d(H) and
/// d(α₁H + α₂B) ≤ α₁ d(H) + α₂ d(B).
pub fn lemma1_records(setup: &Lemma1Setup, case: &Lemma1Case, prefix: &str) -> Result<[CaseRecord; 4]> {
    let dist = |m: &Array2<f64>| distance_to_subspace(&setup.basis, m.view());
    let d_h = dist(&case.h)?;
    let s = top_singular_value(case.w.view())?;
    let ah = setup.op.apply(case.h.view());
    let hw = case.h.dot(&case.w);
    let relu = case.h.mapv(|x| x.max(0.0));
    let combo = &case.h * case.alpha1 + &case.b * case.alpha2;
    let tol = ALGEBRAIC_SLACK;
    Ok([
        CaseRecord::new(format!("{prefix}/ineq8"), dist(&ah)?, setup.lambda * d_h, tol),
        CaseRecord::new(format!("{prefix}/ineq9"), dist(&hw)?, s * d_h, tol),
        CaseRecord::new(format!("{prefix}/ineq10"), dist(&relu)?, d_h, tol),
        CaseRecord::new(
            format!("{prefix}/ineq11"),
            dist(&combo)?,
            case.alpha1 * d_h + case.alpha2 * dist(&case.b)?,
            tol,
        ),
    ])
}

/// Runs `trials` Lemma 1 cases on one graph.
pub fn check_lemma1(g: &Graph, trials: usize, seed: u64) -> Result<TheoremReport> {
    let setup = Lemma1Setup::new(g)?;
    let mut details = Vec::with_capacity(4 * trials);
    for k in 0..trials as u64 {
        let case = lemma1_case(&setup, seed, k);
        details.extend(lemma1_records(&setup, &case, &format!("seed{seed}/case{k}"))?);
    }
    Ok(TheoremReport::from_records("lemma1", details))
}

/// Runs `trials` Lemma 1 cases spread round-robin over several graphs.
/// Case k lives on graph k mod G and draws from `mix(seed, k)`.
pub fn check_lemma1_population(graphs: &[Graph], trials: usize, seed: u64) -> Result<TheoremReport> {
    if graphs.is_empty() {
        return Err(Error::Domain("lemma 1 needs at least one graph".into()));
    }
    let setups = graphs.iter().map(Lemma1Setup::new).collect::<Result<Vec<_>>>()?;
    let mut details = Vec::with_capacity(4 * trials);
    for k in 0..trials {
        let gi = k % setups.len();
        let case = lemma1_case(&setups[gi], seed, k as u64);
        details.extend(lemma1_records(&setups[gi], &case, &format!("g{gi}/case{k}"))?);
    }
    Ok(TheoremReport::from_records("lemma1", details))
}

/// Re-evaluates case `k` of [`check_lemma1`] from its seed alone.
pub fn replay_lemma1_case(g: &Graph, seed: u64, k: u64) -> Result<[CaseRecord; 4]> {
    let setup = Lemma1Setup::new(g)?;
    let case = lemma1_case(&setup, seed, k);
    lemma1_records(&setup, &case, &format!("seed{seed}/case{k}"))
}

/// Per-layer d(H_{l+1}) − r ≤ v (d(H_l) − r) plus the telescoped envelope
/// d(H_l) ≤ r + v^l |d(H₀) − r|.
pub fn check_theorem2(trace: &DynamicsTrace, params: &ConvergenceParams, label: &str) -> TheoremReport {
    let (v, r) = (params.v, params.r);
    let d = &trace.d_m;
    let mut details = Vec::with_capacity(2 * d.len());
    for l in 0..d.len().saturating_sub(1) {
        details.push(CaseRecord::new(
            format!("{label}/step{}", l + 1),
            d[l + 1] - r,
            v * (d[l] - r),
            TRACE_SLACK,
        ));
    }
    for (l, &dl) in d.iter().enumerate().skip(1) {
        details.push(CaseRecord::new(
            format!("{label}/envelope{l}"),
            dl,
            params.envelope(l, d[0]),
            TRACE_SLACK,
        ));
    }
    TheoremReport::from_records("theorem2", details)
}

pub fn default_p_grid() -> Vec<f64> {
    (0..10).map(|k| k as f64 / 10.0).collect()
}

/// Sandwich μ(p) ≤ λ(p) ≤ γ(p) at each grid point, monotonicity of the
/// frozen-a bounds and their gap, and the p → 1 limit.
pub fn check_theorem3(g: &Graph, p_grid: &[f64], label: &str) -> Result<TheoremReport> {
    let curve = dropedge_bounds(g, p_grid)?;
    let mut details = Vec::new();
    let tol = ALGEBRAIC_SLACK;

    for b in &curve.points {
        if b.applicable {
            details.push(CaseRecord::new(format!("{label}/p{}/mu<=lambda", b.p), b.mu, b.lambda, tol));
            details.push(CaseRecord::new(format!("{label}/p{}/lambda<=gamma", b.p), b.lambda, b.gamma, tol));
        }
    }

    let a0 = dropedge_bounds(g, &[0.0])?.points[0].a;
    let frozen = curve.frozen(a0);
    // γ − μ = (r_max − r_min) + a(r_max + r_min). The second term alone is
    // monotone in p; the first starts at 0 and grows on non-regular graphs,
    // so the full gap can rise for small p. Both are recorded.
    let sum_form: Vec<f64> = p_grid
        .iter()
        .map(|&p| {
            if 1.0 - p < LIMIT_EPS {
                return 0.0;
            }
            let (lo, hi) = degree_ratio_extremes(&curve.degrees, p);
            a0 * (lo + hi)
        })
        .collect();
    let mut order: Vec<usize> = (0..p_grid.len()).collect();
    order.sort_by(|&i, &j| p_grid[i].total_cmp(&p_grid[j]));
    for w in order.windows(2) {
        let (i, j) = (w[0], w[1]);
        let (p0, p1) = (p_grid[i], p_grid[j]);
        let ((mu0, ga0), (mu1, ga1)) = (frozen[i], frozen[j]);
        details.push(CaseRecord::new(format!("{label}/mu-frozen/{p0}->{p1}"), mu0, mu1, tol));
        details.push(CaseRecord::new(format!("{label}/gamma-frozen/{p0}->{p1}"), ga0, ga1, tol));
        details.push(CaseRecord::new(
            format!("{label}/gap-frozen/{p0}->{p1}"),
            ga1 - mu1,
            ga0 - mu0,
            tol,
        ));
        details.push(CaseRecord::new(
            format!("{label}/gap-sum-form/{p0}->{p1}"),
            sum_form[j],
            sum_form[i],
            tol,
        ));
    }

    let limit = dropedge_bounds(g, &[1.0])?.points[0];
    for (name, x) in [("mu", limit.mu), ("lambda", limit.lambda), ("gamma", limit.gamma)] {
        details.push(CaseRecord::new(format!("{label}/limit/{name}"), (1.0 - x).abs(), 0.0, 0.0));
    }
    // approaching the limit numerically: all three sit within 2(d_max + 1)(1 − p) of 1
    let p_near = 1.0 - 1e-6;
    let near = dropedge_bounds(g, &[p_near])?.points[0];
    let d_max = curve.degrees.iter().copied().fold(0.0, f64::max);
    let bound = 2.0 * (d_max + 1.0) * (1.0 - p_near);
    if near.applicable {
        for (name, x) in [("mu", near.mu), ("lambda", near.lambda), ("gamma", near.gamma)] {
            details.push(CaseRecord::new(
                format!("{label}/near-limit/{name}"),
                (1.0 - x).abs(),
                bound,
                tol,
            ));
        }
    }
    Ok(TheoremReport::from_records("theorem3", details))
}

/// Component counts never fall below the original after DropEdge.
pub fn check_theorem4(g: &Graph, plan: &DropPlan, trials: usize, label: &str) -> Result<TheoremReport> {
    let base = connected_components(g).m_components;
    let case_id = format!("{label}/p{}/trials{trials}", plan.p);
    let record = match component_monotonicity(g, plan, trials) {
        Ok(rep) => CaseRecord::new(case_id, base as f64, rep.min_observed as f64, 0.0),
        Err(Error::TheoremCheck(_)) => CaseRecord {
            case_id,
            lhs: base as f64,
            rhs: f64::NAN,
            slack: f64::NAN,
            pass: false,
        },
        Err(e) => return Err(e),
    };
    Ok(TheoremReport::from_records("theorem4", vec![record]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagate::{init_stack, Bias};
    use ndarray::array;

    fn path2() -> Graph {
        Graph::from_edges(2, [(0, 1, 1.0)]).unwrap()
    }

    fn stack_with_s(s: f64) -> LayerStack {
        LayerStack {
            weights: vec![Array2::eye(1) * s],
            self_weights: None,
            s_sup: s,
            s_self_sup: None,
        }
    }

    fn basis() -> SubspaceBasis {
        let g = path2();
        build_subspace(&g, &connected_components(&g))
    }

    #[test]
    fn gcn_and_resgcn_params() {
        let spec = ModelSpec::preset(ModelKind::Gcn, 1, 1, 0);
        let p = convergence_params(&spec, &stack_with_s(1.0), 0.9, &basis(), None).unwrap();
        assert_eq!((p.v, p.r), (0.9, 0.0));
        let spec = ModelSpec::preset(ModelKind::ResGcn, 1, 1, 0);
        let p = convergence_params(&spec, &stack_with_s(1.0), 0.5, &basis(), None).unwrap();
        assert!((p.v - 0.7).abs() < 1e-15);
        assert_eq!(p.r, 0.0);
    }

    #[test]
    fn appnp_beta_one() {
        let mut spec = ModelSpec::preset(ModelKind::Appnp, 3, 1, 0);
        spec.beta = Some(1.0);
        let h0 = array![[1.0], [-1.0]];
        let b = basis();
        let p = convergence_params(&spec, &stack_with_s(1.0), 0.4, &b, Some(h0.view())).unwrap();
        assert_eq!(p.v, 0.0);
        assert!((p.r - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(p.envelope(1, 2f64.sqrt()), p.r);
        assert!(matches!(
            convergence_params(&spec, &stack_with_s(1.0), 0.4, &b, None),
            Err(Error::MissingExtras(_))
        ));
    }

    #[test]
    fn gcn_b_radius_and_undefined() {
        let spec = ModelSpec::preset(ModelKind::GcnBias, 2, 1, 0);
        let p = convergence_params(&spec, &stack_with_s(1.0), 0.5, &basis(), None).unwrap();
        assert!(p.r.abs() < 1e-15, "constant bias is in M on a regular graph");
        let star = Graph::from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let sb = build_subspace(&star, &connected_components(&star));
        let p = convergence_params(&spec, &stack_with_s(1.0), 0.5, &sb, None).unwrap();
        let expect = distance_of_bias(&sb, array![0.05].view()) / 0.5;
        assert!((p.r - expect).abs() < 1e-15 && p.r > 0.0);
        assert!(matches!(
            convergence_params(&spec, &stack_with_s(2.5), 0.5, &sb, None),
            Err(Error::UndefinedRadius { .. })
        ));
    }

    #[test]
    fn per_layer_bias_uses_supremum() {
        let star = Graph::from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let sb = build_subspace(&star, &connected_components(&star));
        let mut spec = ModelSpec::preset(ModelKind::GcnBias, 2, 1, 0);
        spec.bias = Some(Bias::PerLayer(vec![vec![0.1], vec![0.3]]));
        let stack = init_stack(&spec).unwrap();
        let p = convergence_params(&spec, &stack, 0.5, &sb, None).unwrap();
        let d = distance_of_bias(&sb, array![0.3].view());
        assert!((p.r - d / (1.0 - p.v)).abs() < 1e-14);
    }

    #[test]
    fn lemma1_member_of_subspace_is_trivial() {
        let g = Graph::from_edges(4, [(0, 1, 1.0), (1, 2, 0.5), (2, 3, 1.0)]).unwrap();
        let setup = Lemma1Setup::new(&g).unwrap();
        let h = setup.basis.embed(array![[1.0, -2.0]].view());
        let case = Lemma1Case {
            b: h.clone(),
            w: array![[0.3, 1.0], [2.0, -1.0]],
            h,
            alpha1: 0.5,
            alpha2: 1.5,
        };
        for rec in lemma1_records(&setup, &case, "m").unwrap() {
            assert!(rec.lhs < 1e-12 && rec.pass, "{rec:?}");
        }
    }

    #[test]
    fn lemma1_orthogonal_w_is_isometry() {
        let g = Graph::from_edges(5, [(0, 1, 1.0), (1, 2, 0.5), (2, 3, 1.0), (3, 4, 0.2)]).unwrap();
        let setup = Lemma1Setup::new(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut w = gaussian_matrix(&mut rng, 3, 3, 1.0);
        orthonormalize_columns(&mut w);
        let case = Lemma1Case {
            h: gaussian_matrix(&mut rng, 5, 3, 1.0),
            w,
            b: Array2::zeros((5, 3)),
            alpha1: 1.0,
            alpha2: 0.0,
        };
        let recs = lemma1_records(&setup, &case, "iso").unwrap();
        assert!((recs[1].lhs - recs[1].rhs).abs() < 1e-10);
    }

    #[test]
    fn lemma1_small_run_and_replay() {
        let g = Graph::from_edges(6, [(0, 1, 1.0), (1, 2, 0.5), (3, 4, 1.0), (4, 5, 0.7), (2, 0, 0.1)]).unwrap();
        let rep = check_lemma1(&g, 50, 3).unwrap();
        assert_eq!(rep.n_cases, 200);
        assert!(rep.passed(), "{}", rep.summary_line());
        let again = replay_lemma1_case(&g, 3, 17).unwrap();
        assert_eq!(again.to_vec(), rep.details[68..72].to_vec());
    }

    #[test]
    fn report_formats() {
        let rep = TheoremReport::from_records(
            "demo",
            vec![CaseRecord::new("a", 1.0, 2.0, 0.0), CaseRecord::new("b", 3.0, 2.0, 0.5)],
        );
        assert_eq!(rep.n_violations, 1);
        assert_eq!(rep.worst_slack, -1.0);
        let csv = rep.to_csv();
        assert!(csv.starts_with("theorem_id,case_id,lhs,rhs,slack,pass\n"));
        assert!(csv.contains("demo,b,3.0000000000000000e0,2.0000000000000000e0,-1.0000000000000000e0,false"));
        assert!(rep.to_text().starts_with("demo cases=2 violations=1"));
    }

    #[test]
    fn theorem3_path() {
        let rep = check_theorem3(&path2(), &[0.0, 0.25, 0.5, 0.75], "path").unwrap();
        assert!(rep.passed(), "{}", rep.to_text());
    }

    #[test]
    fn theorem1_small_graphs() {
        let g = Graph::from_edges(6, [(0, 1, 1.0), (1, 2, 0.5), (3, 4, 2.0)]).unwrap();
        let rep = check_theorem1(&g, "g").unwrap();
        // multiplicity, below-top, three residuals
        assert_eq!(rep.n_cases, 5);
        assert!(rep.passed(), "{}", rep.to_text());
        let empty = Graph::from_edges(3, []).unwrap();
        let rep = check_theorem1(&empty, "e").unwrap();
        assert_eq!(rep.n_cases, 4);
        assert!(rep.passed());
    }

    #[test]
    fn lemma1_population_round_robin() {
        let graphs = vec![path2(), Graph::from_edges(3, [(0, 1, 1.0)]).unwrap()];
        let rep = check_lemma1_population(&graphs, 10, 1).unwrap();
        assert_eq!(rep.n_cases, 40);
        assert!(rep.details[4].case_id.starts_with("g1/case1/"));
        assert!(rep.passed());
        assert!(check_lemma1_population(&[], 1, 1).is_err());
    }
}
