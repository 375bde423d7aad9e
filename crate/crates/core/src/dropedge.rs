//! DropEdge: uniform edge sampling, its expected propagator and the
//! checks that go with it.
//!
//! Two sampling semantics are provided. [`sample`] draws an exact-size
//! subset of ⌊V(1 − p)⌋ edges without replacement. [`bernoulli_keep`]
//! keeps each edge independently with probability 1 − p, which is the model
//! the expectation argument uses.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{
    build_propagator, components_of_edges, connected_components, Graph, Normalization, Propagator,
};
use crate::propagate::{init_stack, run_with_ops, DynamicsContext, DynamicsTrace, ModelSpec, SparseOp};
use crate::seed::mix;
use crate::spectral::lambda_at;
use crate::theory::convergence_params;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropMode {
    OneShot,
    LayerWise(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropPlan {
    pub p: f64,
    pub mode: DropMode,
    pub seed: u64,
}

impl DropPlan {
    pub fn one_shot(p: f64, seed: u64) -> Self {
        DropPlan {
            p,
            mode: DropMode::OneShot,
            seed,
        }
    }

    pub fn layer_wise(p: f64, depth: usize, seed: u64) -> Self {
        DropPlan {
            p,
            mode: DropMode::LayerWise(depth),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::Domain(format!("drop rate {} must lie in [0, 1]", self.p)));
        }
        if self.mode == DropMode::LayerWise(0) {
            return Err(Error::Domain("layer-wise depth must be at least 1".into()));
        }
        Ok(())
    }

    /// The same plan with its seed replaced by the `t`-th derived seed.
    pub fn for_trial(&self, t: u64) -> Self {
        DropPlan {
            seed: mix(self.seed, t),
            ..*self
        }
    }
}

/// Edges kept by one DropEdge draw.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGraph<'g> {
    /// Indices into `parent.edges()`, ascending.
    pub kept_edges: Vec<usize>,
    pub parent: &'g Graph,
}

impl SampledGraph<'_> {
    pub fn to_graph(&self) -> Graph {
        self.parent.with_edge_subset(&self.kept_edges)
    }

    pub fn n_components(&self) -> usize {
        let edges = self.parent.edges();
        components_of_edges(
            self.parent.n_nodes(),
            self.kept_edges.iter().map(|&i| (edges[i].u, edges[i].v)),
        )
        .m_components
    }

    pub fn propagator(&self) -> Result<Propagator> {
        build_propagator(&self.to_graph(), Normalization::AugNormAdj, 0.0)
    }
}

/// ⌊V(1 − p)⌋. The tiny offset keeps products such as 10 × 0.7 from
/// flooring to 6.
pub fn kept_count(v: usize, p: f64) -> usize {
    let exact = v as f64 * (1.0 - p);
    ((exact + 1e-9 * exact.max(1.0)).floor() as usize).min(v)
}

fn draw<'g>(g: &'g Graph, p: f64, seed: u64) -> SampledGraph<'g> {
    let v = g.n_edges();
    let k = kept_count(v, p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept = index::sample(&mut rng, v, k).into_vec();
    kept.sort_unstable();
    SampledGraph {
        kept_edges: kept,
        parent: g,
    }
}

/// One subset for a one-shot plan, `depth` subsets for a layer-wise plan.
/// Layer l uses the sub-seed `mix(seed, l)`.
pub fn sample<'g>(g: &'g Graph, plan: &DropPlan) -> Result<Vec<SampledGraph<'g>>> {
    plan.validate()?;
    Ok(match plan.mode {
        DropMode::OneShot => vec![draw(g, plan.p, plan.seed)],
        DropMode::LayerWise(depth) => (0..depth)
            .map(|l| draw(g, plan.p, mix(plan.seed, l as u64)))
            .collect(),
    })
}

/// Keeps every edge independently with probability 1 − p.
pub fn bernoulli_keep<R: Rng + ?Sized>(g: &Graph, p: f64, rng: &mut R) -> Vec<usize> {
    (0..g.n_edges())
        .filter(|_| rng.random::<f64>() >= p)
        .collect()
}

/// The re-normalized expected adjacency D_p^{-1/2}(A + I/(1−p))D_p^{-1/2}.
///
/// Re-normalizing the expected adjacency (1 − p)A with unit self-loops
/// gives the same matrix: scaling both A and I by 1/(1 − p) cancels in the
/// symmetric degree normalization.
pub fn expected_propagator(g: &Graph, p: f64) -> Result<Propagator> {
    build_propagator(g, Normalization::AugNormAdj, p)
}

/// Difference between the expected propagator and the empirical mean of
/// sampled-then-renormalized propagators. Diagnostic only: the
/// re-normalization is nonlinear, so the two are not expected to agree.
#[derive(Debug, Clone, PartialEq)]
pub struct GapDiagnostic {
    pub p: f64,
    pub trials: usize,
    pub max_abs_gap: f64,
    pub mean_abs_gap: f64,
    pub mean_diag_gap: f64,
}

pub fn expected_vs_sampled(g: &Graph, p: f64, trials: usize, seed: u64) -> Result<GapDiagnostic> {
    let expected = expected_propagator(g, p)?;
    let n = g.n_nodes();
    let mut acc = Array2::<f64>::zeros((n, n));
    for t in 0..trials {
        let s = draw(g, p, mix(seed, t as u64));
        acc += &s.propagator()?.matrix;
    }
    acc /= trials.max(1) as f64;
    let diff = &acc - &expected.matrix;
    let nn = (n * n).max(1) as f64;
    Ok(GapDiagnostic {
        p,
        trials,
        max_abs_gap: diff.iter().fold(0.0, |m, x| m.max(x.abs())),
        mean_abs_gap: diff.iter().map(|x| x.abs()).sum::<f64>() / nn,
        mean_diag_gap: diff.diag().sum() / n.max(1) as f64,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnbiasednessReport {
    pub p: f64,
    pub trials: usize,
    pub max_abs_deviation: f64,
    /// Largest |deviation| / standard error over entries with a non-zero
    /// standard error.
    pub max_z: f64,
    /// Entries whose deviation exceeds the allowed number of standard
    /// errors (any deviation counts where the standard error is zero).
    pub violations: usize,
    pub z_limit: f64,
}

impl UnbiasednessReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Compares the Monte Carlo mean of A_drop·H under Bernoulli sampling with
/// (1 − p)·A·H. Each entry must land within `z_limit` standard errors,
/// where Var[(A_drop H)_ic] = p(1 − p) Σ_j A_ij² H_jc².
pub fn aggregation_unbiasedness(
    g: &Graph,
    p: f64,
    h: ArrayView2<'_, f64>,
    trials: usize,
    seed: u64,
    z_limit: f64,
) -> Result<UnbiasednessReport> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("drop rate {p} must lie in [0, 1]")));
    }
    if h.nrows() != g.n_nodes() {
        return Err(Error::Shape(format!(
            "H has {} rows, graph has {} nodes",
            h.nrows(),
            g.n_nodes()
        )));
    }
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    // A_drop·H is linear in the kept set, so the mean only needs per-edge
    // keep counts.
    let mut counts = vec![0u64; g.n_edges()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        for i in bernoulli_keep(g, p, &mut rng) {
            counts[i] += 1;
        }
    }

    let c = h.ncols();
    let n = g.n_nodes();
    let mut mean = Array2::<f64>::zeros((n, c));
    let mut expect = Array2::<f64>::zeros((n, c));
    let mut var = Array2::<f64>::zeros((n, c));
    let t = trials as f64;
    for (e, &k) in g.edges().iter().zip(&counts) {
        let frac = k as f64 / t;
        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
            for ch in 0..c {
                let x = h[(b, ch)];
                mean[(a, ch)] += frac * e.w * x;
                expect[(a, ch)] += (1.0 - p) * e.w * x;
                var[(a, ch)] += p * (1.0 - p) * e.w * e.w * x * x;
            }
        }
    }

    let mut max_abs: f64 = 0.0;
    let mut max_z: f64 = 0.0;
    let mut violations = 0;
    for ((m, x), v) in mean.iter().zip(&expect).zip(&var) {
        let dev = (m - x).abs();
        max_abs = max_abs.max(dev);
        let se = (v / t).sqrt();
        if se > 0.0 {
            let z = dev / se;
            max_z = max_z.max(z);
            if z > z_limit {
                violations += 1;
            }
        } else if dev != 0.0 {
            violations += 1;
        }
    }
    Ok(UnbiasednessReport {
        p,
        trials,
        max_abs_deviation: max_abs,
        max_z,
        violations,
        z_limit,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub base_components: usize,
    pub trials: usize,
    /// component count → number of sampled graphs with that count
    pub histogram: BTreeMap<usize, usize>,
    pub min_observed: usize,
    pub max_observed: usize,
    /// (trial, layer, count) for every draw with fewer components than the
    /// original graph.
    pub violations: Vec<(usize, usize, usize)>,
}

/// Samples `trials` times (trial t uses `plan.for_trial(t)`) and records
/// the component count of every sampled graph. Dropping edges can only
/// split components, so any count below the original is a failure.
pub fn component_monotonicity(g: &Graph, plan: &DropPlan, trials: usize) -> Result<MonotonicityReport> {
    plan.validate()?;
    let base = connected_components(g).m_components;
    let mut histogram = BTreeMap::new();
    let mut violations = Vec::new();
    for t in 0..trials {
        for (layer, s) in sample(g, &plan.for_trial(t as u64))?.iter().enumerate() {
            let m = s.n_components();
            *histogram.entry(m).or_insert(0) += 1;
            if m < base {
                violations.push((t, layer, m));
            }
        }
    }
    let min_observed = histogram.keys().next().copied().unwrap_or(base);
    let max_observed = histogram.keys().next_back().copied().unwrap_or(base);
    let report = MonotonicityReport {
        base_components: base,
        trials,
        histogram,
        min_observed,
        max_observed,
        violations,
    };
    if let Some(&(t, layer, m)) = report.violations.first() {
        return Err(Error::TheoremCheck(format!(
            "trial {t} layer {layer}: {m} components after dropping, {base} before"
        )));
    }
    Ok(report)
}

/// Runs a model where every layer propagates with a DropEdge-sampled,
/// re-normalized adjacency: one subset shared by all layers for a one-shot
/// plan, a fresh subset per layer otherwise. Distances are measured against
/// ℳ of the original graph. The envelope uses λ(p) of the expected
/// propagator, so it describes the rate in expectation and is not a
/// per-sample bound.
pub fn run_dropedge_dynamics(
    ctx: &DynamicsContext,
    g: &Graph,
    spec: &ModelSpec,
    h0: ArrayView2<'_, f64>,
    plan: &DropPlan,
    snapshot_layers: &[usize],
) -> Result<DynamicsTrace> {
    if plan.p >= 1.0 {
        return Err(Error::Domain("dynamics need a drop rate below 1".into()));
    }
    if let DropMode::LayerWise(depth) = plan.mode {
        if depth != spec.depth {
            return Err(Error::Shape(format!(
                "layer-wise plan covers {depth} layers, model has {}",
                spec.depth
            )));
        }
    }
    let ops = sample(g, plan)?
        .iter()
        .map(|s| Ok(SparseOp::from_dense(&s.propagator()?.matrix)))
        .collect::<Result<Vec<_>>>()?;
    let stack = init_stack(spec)?;
    let (d_m, snapshots, final_state) = run_with_ops(ctx, spec, &stack, h0, snapshot_layers, |l| {
        &ops[l.min(ops.len() - 1)]
    })?;
    let lambda_p = lambda_at(g, plan.p)?;
    let (params, params_note) = match convergence_params(spec, &stack, lambda_p, &ctx.basis, Some(h0)) {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(DynamicsTrace {
        kind: spec.kind,
        d_m,
        snapshots,
        params,
        params_note,
        final_state,
    })
}
