//! Command implementations behind the `smoothlab` binary.
//!
//! Every command takes a fully resolved config, writes its files into an
//! output directory and returns what it wrote. The first line of every
//! emitted file is a `#` comment recording that config, so any output can
//! be reproduced from its own header.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};

use crate::dropedge::{run_dropedge_dynamics, DropPlan};
use crate::error::{Error, Result};
use crate::graph::{connected_components, Graph};
use crate::ingest::{parse_features, read_graph};
use crate::propagate::{lift_features, run_in_context, Bias, DynamicsContext, DynamicsTrace, ModelKind, ModelSpec};
use crate::seed::mix;
use crate::spectral::{dropedge_bounds, BoundCurve};
use crate::svd::truncated_svd;
use crate::synth::{gaussian_features, generate, population, PopulationSpec, SyntheticRecipe};
use crate::theory::{
    check_lemma1_population, check_theorem1, check_theorem2, check_theorem3, check_theorem4, default_p_grid, fmt_num,
    CaseRecord, TheoremReport, ALGEBRAIC_SLACK,
};

/// Where a command gets its graph from.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Files {
        graph: PathBuf,
        features: Option<PathBuf>,
        header: bool,
    },
    Synthetic(SyntheticRecipe),
}

impl GraphSource {
    pub fn load(&self) -> Result<Graph> {
        match self {
            GraphSource::Files {
                graph,
                features,
                header,
            } => Ok(read_graph(graph, features.as_deref(), *header)?.0),
            GraphSource::Synthetic(recipe) => generate(recipe),
        }
    }

    fn describe(&self) -> String {
        match self {
            GraphSource::Files {
                graph,
                features,
                header,
            } => format!(
                "graph={} features={} header={header}",
                graph.display(),
                features.as_ref().map_or("-".into(), |p| p.display().to_string())
            ),
            GraphSource::Synthetic(r) => format!("graph=synthetic {}", describe_recipe(r)),
        }
    }
}

fn describe_recipe(r: &SyntheticRecipe) -> String {
    format!(
        "sizes={} factor={} feature_dim={} graph_seed={}",
        join(&r.component_sizes),
        r.intra_edge_factor,
        r.feature_dim,
        r.seed
    )
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn describe_model(spec: &ModelSpec) -> String {
    let opt = |x: Option<f64>| x.map_or("-".into(), |v| v.to_string());
    let bias = match &spec.bias {
        None => "-".to_string(),
        Some(Bias::Uniform(b)) => b.to_string(),
        Some(Bias::PerChannel(v)) => join(v),
        Some(Bias::PerLayer(_)) => "per-layer".to_string(),
    };
    format!(
        "model={} depth={} width={} alpha={} beta={} bias={} relu={} init={:?} seed={}",
        spec.kind,
        spec.depth,
        spec.width,
        opt(spec.alpha),
        opt(spec.beta),
        bias,
        spec.use_relu,
        spec.weight_init,
        spec.seed
    )
}

fn header(command: &str, config: &str) -> String {
    format!("# smoothlab {command} {config}\n")
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, body)?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub recipe: SyntheticRecipe,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenOutput {
    pub edges: PathBuf,
    pub features: PathBuf,
    pub graph: Graph,
}

/// Writes `graph.edges` (with a `# nodes:` directive so isolated nodes
/// survive) and `features.csv` for a synthetic recipe.
pub fn cmd_gen(cfg: &GenConfig) -> Result<GenOutput> {
    let g = generate(&cfg.recipe)?;
    let head = header("gen", &describe_recipe(&cfg.recipe));

    let mut edges = head.clone();
    let _ = writeln!(edges, "# nodes: {}", g.n_nodes());
    for e in g.edges() {
        let _ = writeln!(edges, "{} {} {}", e.u, e.v, fmt_num(e.w));
    }
    let mut feats = head;
    if let Some(x) = g.features() {
        for row in x.rows() {
            let line: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
            feats.push_str(&line.join(","));
            feats.push('\n');
        }
    }
    Ok(GenOutput {
        edges: write_file(&cfg.out, "graph.edges", &edges)?,
        features: write_file(&cfg.out, "features.csv", &feats)?,
        graph: g,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectConfig {
    pub features: PathBuf,
    pub header: bool,
    pub out_dim: usize,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectOutput {
    pub path: PathBuf,
    pub warning: Option<String>,
}

/// Rank-k truncated SVD scores of a feature CSV, one row per node.
pub fn cmd_project(cfg: &ProjectConfig) -> Result<ProjectOutput> {
    let x = parse_features(&fs::read_to_string(&cfg.features)?, cfg.header)?;
    let svd = truncated_svd(x.view(), cfg.out_dim)?;
    let warning = svd
        .deficient_rank
        .map(|r| format!("feature matrix has numerical rank {r} < {}; padded with zeros", cfg.out_dim));
    let mut body = header(
        "project",
        &format!(
            "features={} header={} out_dim={}",
            cfg.features.display(),
            cfg.header,
            cfg.out_dim
        ),
    );
    if let Some(w) = &warning {
        let _ = writeln!(body, "# warning: {w}");
    }
    let cols: Vec<String> = (1..=cfg.out_dim).map(|k| format!("svd{k}")).collect();
    let _ = writeln!(body, "node_id,{}", cols.join(","));
    for (i, row) in svd.scores.rows().into_iter().enumerate() {
        let vals: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
        let _ = writeln!(body, "{i},{}", vals.join(","));
    }
    Ok(ProjectOutput {
        path: write_file(&cfg.out, "projected.csv", &body)?,
        warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropSetting {
    pub p: f64,
    pub layerwise: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsConfig {
    pub source: GraphSource,
    pub model: ModelSpec,
    pub drop: Option<DropSetting>,
    pub snapshots: Vec<usize>,
    pub svg: bool,
    pub out: PathBuf,
}

impl DynamicsConfig {
    fn describe(&self) -> String {
        let drop = match self.drop {
            None => "p=- layerwise=false".to_string(),
            Some(d) => format!("p={} layerwise={}", d.p, d.layerwise),
        };
        format!(
            "{} {} {} snapshots={} svg={}",
            self.source.describe(),
            describe_model(&self.model),
            drop,
            join(&self.snapshots),
            self.svg
        )
    }
}

#[derive(Debug, Clone)]
pub struct DynamicsOutput {
    pub trace_path: PathBuf,
    pub snapshot_paths: Vec<PathBuf>,
    pub svg_paths: Vec<PathBuf>,
    pub trace: DynamicsTrace,
}

/// Initial features of width `width`: the graph's own features lifted to
/// that width, or seeded Gaussian features when the graph has none.
pub fn initial_features(g: &Graph, width: usize, seed: u64) -> Array2<f64> {
    match g.features() {
        Some(x) => lift_features(x.view(), width, seed),
        None => gaussian_features(g.n_nodes(), width, mix(seed, 0x4830)),
    }
}

/// Runs one model on one graph and writes the d_ℳ trace, the requested
/// snapshots and, optionally, one SVG per snapshot.
pub fn cmd_dynamics(cfg: &DynamicsConfig) -> Result<DynamicsOutput> {
    let g = cfg.source.load()?;
    let spec = &cfg.model;
    if let Some(&l) = cfg.snapshots.iter().find(|&&l| l > spec.depth) {
        return Err(Error::Domain(format!("snapshot layer {l} exceeds depth {}", spec.depth)));
    }
    let ctx = DynamicsContext::new(&g)?;
    let h0 = initial_features(&g, spec.width, spec.seed);
    let trace = match cfg.drop {
        None => run_in_context(&ctx, spec, h0.view(), &cfg.snapshots)?,
        Some(d) => {
            let seed = mix(spec.seed, 0xd20e);
            let plan = if d.layerwise {
                DropPlan::layer_wise(d.p, spec.depth, seed)
            } else {
                DropPlan::one_shot(d.p, seed)
            };
            run_dropedge_dynamics(&ctx, &g, spec, h0.view(), &plan, &cfg.snapshots)?
        }
    };

    let head = header("dynamics", &cfg.describe());
    let mut body = head.clone();
    match (&trace.params, &trace.params_note) {
        (Some(p), _) => {
            let _ = writeln!(body, "# v={} r={} s={} lambda={}", fmt_num(p.v), fmt_num(p.r), fmt_num(p.s), fmt_num(p.lambda));
        }
        (None, Some(note)) => {
            let _ = writeln!(body, "# envelope unavailable: {note}");
        }
        (None, None) => {}
    }
    body.push_str("layer,d_m,envelope\n");
    let env = trace.envelope();
    for (l, d) in trace.d_m.iter().enumerate() {
        let e = env.as_ref().map_or(String::new(), |e| fmt_num(e[l]));
        let _ = writeln!(body, "{l},{},{e}", fmt_num(*d));
    }
    let trace_path = write_file(&cfg.out, "trace.csv", &body)?;

    let comp = connected_components(&g);
    let degrees = g.degrees().d;
    let mut snapshot_paths = Vec::new();
    let mut svg_paths = Vec::new();
    for (&l, h) in &trace.snapshots {
        let xy = planar(h.view())?;
        let mut body = head.clone();
        body.push_str("node_id,x,y,degree,component\n");
        for i in 0..g.n_nodes() {
            let _ = writeln!(
                body,
                "{i},{},{},{},{}",
                fmt_num(xy[(i, 0)]),
                fmt_num(xy[(i, 1)]),
                fmt_num(degrees[i]),
                comp.labels[i]
            );
        }
        snapshot_paths.push(write_file(&cfg.out, &format!("snapshot_{l}.csv"), &body)?);
        if cfg.svg {
            let svg = scatter_svg(xy.view(), &degrees, &comp.labels, &format!("{} layer {l}", spec.kind));
            svg_paths.push(write_file(&cfg.out, &format!("snapshot_{l}.svg"), &svg)?);
        }
    }
    Ok(DynamicsOutput {
        trace_path,
        snapshot_paths,
        svg_paths,
        trace,
    })
}

/// Two plotting coordinates per node: the columns themselves at width 2,
/// the top two SVD scores above that, a zero y-axis at width 1.
fn planar(h: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let (n, c) = h.dim();
    let mut xy = Array2::zeros((n, 2));
    match c {
        0 => {}
        1 => xy.column_mut(0).assign(&h.column(0)),
        2 => xy.assign(&h),
        _ if n >= 2 => xy.assign(&truncated_svd(h, 2)?.scores),
        _ => xy.assign(&h.slice(ndarray::s![.., 0..2])),
    }
    Ok(xy)
}

const SVG_SIZE: f64 = 640.0;
const SVG_MARGIN: f64 = 32.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Minimal scatter plot. Axes are scaled linearly to the data range and
/// the mapping is recorded in comments; radius is proportional to d + 1.
pub fn scatter_svg(xy: ArrayView2<'_, f64>, degrees: &[f64], components: &[usize], title: &str) -> String {
    let span = |col: usize| {
        let (lo, hi) = xy
            .column(col)
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if !(lo.is_finite() && hi.is_finite()) {
            (0.0, 1.0)
        } else if hi - lo > 0.0 {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = span(0);
    let (y0, y1) = span(1);
    let inner = SVG_SIZE - 2.0 * SVG_MARGIN;
    let sx = inner / (x1 - x0);
    let sy = inner / (y1 - y0);
    let d_max = degrees.iter().copied().fold(0.0, f64::max) + 1.0;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">"#
    );
    let _ = writeln!(out, "<!-- {title} -->");
    let _ = writeln!(out, "<!-- px = {SVG_MARGIN} + (x - {}) * {} -->", fmt_num(x0), fmt_num(sx));
    let _ = writeln!(out, "<!-- py = {} - (y - {}) * {} -->", SVG_SIZE - SVG_MARGIN, fmt_num(y0), fmt_num(sy));
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, row) in xy.rows().into_iter().enumerate() {
        let px = SVG_MARGIN + (row[0] - x0) * sx;
        let py = SVG_SIZE - SVG_MARGIN - (row[1] - y0) * sy;
        let r = 6.0 * (degrees[i] + 1.0) / d_max;
        let _ = writeln!(
            out,
            r#"<circle cx="{px:.2}" cy="{py:.2}" r="{r:.2}" fill="{}" fill-opacity="0.7"/>"#,
            PALETTE[components[i] % PALETTE.len()]
        );
    }
    out.push_str("</svg>\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsConfig {
    pub source: GraphSource,
    pub p_grid: Vec<f64>,
    pub out: PathBuf,
}

/// Writes λ(p), a(p), μ(p), γ(p) and the gap over a p grid.
pub fn cmd_bounds(cfg: &BoundsConfig) -> Result<(PathBuf, BoundCurve)> {
    let g = cfg.source.load()?;
    let curve = dropedge_bounds(&g, &cfg.p_grid)?;
    let mut body = header(
        "bounds",
        &format!("{} p_grid={}", cfg.source.describe(), join(&cfg.p_grid)),
    );
    body.push_str("p,lambda_p,a_p,mu_p,gamma_p,gap,sandwich\n");
    for b in &curve.points {
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{}",
            fmt_num(b.p),
            fmt_num(b.lambda),
            fmt_num(b.a),
            fmt_num(b.mu),
            fmt_num(b.gamma),
            fmt_num(b.gap()),
            b.sandwich_holds(ALGEBRAIC_SLACK)
        );
    }
    Ok((write_file(&cfg.out, "bounds.csv", &body)?, curve))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Theorem1,
    Lemma1,
    Theorem2,
    Theorem3,
    Theorem4,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [Suite::Theorem1, Suite::Lemma1, Suite::Theorem2, Suite::Theorem3, Suite::Theorem4];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Theorem1 => "theorem1",
            Suite::Lemma1 => "lemma1",
            Suite::Theorem2 => "theorem2",
            Suite::Theorem3 => "theorem3",
            Suite::Theorem4 => "theorem4",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Domain(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub suite: Suite,
    pub seed: u64,
    /// Lemma 1 cases, or DropEdge samplings per (graph, p) for Theorem 4.
    pub trials: Option<usize>,
    /// Restricts Theorem 4 to one drop rate.
    pub p: Option<f64>,
    pub out: PathBuf,
}

pub const LEMMA1_TRIALS: usize = 1000;
pub const THEOREM4_TRIALS: usize = 1000;
pub const THEOREM4_RATES: [f64; 3] = [0.25, 0.5, 0.75];
pub const THEOREM2_DEPTH: usize = 400;
pub const THEOREM2_RELU_DEPTH: usize = 50;

impl CheckConfig {
    fn describe(&self, suite: Suite) -> String {
        let trials = match suite {
            Suite::Lemma1 => self.trials.unwrap_or(LEMMA1_TRIALS).to_string(),
            Suite::Theorem4 => self.trials.unwrap_or(THEOREM4_TRIALS).to_string(),
            _ => "-".into(),
        };
        let p = match (suite, self.p) {
            (Suite::Theorem4, Some(p)) => p.to_string(),
            (Suite::Theorem4, None) => join(&THEOREM4_RATES) + ",1",
            _ => "-".into(),
        };
        format!("suite={} seed={} trials={trials} p={p}", suite.name(), self.seed)
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub reports: Vec<TheoremReport>,
    pub files: Vec<PathBuf>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(TheoremReport::passed)
    }
}

/// Runs the selected suites and writes `{suite}.txt` and `{suite}.csv`
/// for each, plus `all.txt` with one summary line per suite when all are
/// selected. Outputs depend only on the config.
pub fn cmd_check(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let suites: Vec<Suite> = match cfg.suite {
        Suite::All => Suite::EACH.to_vec(),
        s => vec![s],
    };
    let mut reports = Vec::new();
    let mut files = Vec::new();
    for s in suites {
        let report = run_suite(s, cfg)?;
        let head = header("check", &cfg.describe(s));
        files.push(write_file(&cfg.out, &format!("{}.txt", s.name()), &(head.clone() + &report.to_text()))?);
        files.push(write_file(&cfg.out, &format!("{}.csv", s.name()), &(head + &report.to_csv()))?);
        reports.push(report);
    }
    if cfg.suite == Suite::All {
        let mut body = header(
            "check",
            &format!("suite=all seed={} trials={} p={}", cfg.seed, opt_str(cfg.trials), opt_str(cfg.p)),
        );
        for r in &reports {
            body.push_str(&r.summary_line());
            body.push('\n');
        }
        files.push(write_file(&cfg.out, "all.txt", &body)?);
    }
    Ok(CheckOutcome { reports, files })
}

fn opt_str<T: ToString>(x: Option<T>) -> String {
    x.map_or("-".into(), |v| v.to_string())
}

/// Population seeds per suite, so each suite can run alone and still see
/// the graphs it sees under `all`.
pub fn suite_seed(seed: u64, suite: Suite) -> u64 {
    mix(seed, suite as u64 + 1)
}

pub fn run_suite(suite: Suite, cfg: &CheckConfig) -> Result<TheoremReport> {
    let seed = suite_seed(cfg.seed, suite);
    match suite {
        Suite::Theorem1 => {
            let reports = population(seed, 50, &PopulationSpec::default())
                .iter()
                .enumerate()
                .map(|(i, g)| check_theorem1(g, &format!("g{i}")))
                .collect::<Result<Vec<_>>>()?;
            Ok(TheoremReport::merge("theorem1", reports))
        }
        Suite::Lemma1 => {
            let graphs = population(seed, 10, &PopulationSpec::default());
            check_lemma1_population(&graphs, cfg.trials.unwrap_or(LEMMA1_TRIALS), mix(seed, 0))
        }
        Suite::Theorem2 => theorem2_suite(seed),
        Suite::Theorem3 => {
            let grid = default_p_grid();
            let mut reports = population(seed, 20, &PopulationSpec::default())
                .iter()
                .enumerate()
                .map(|(i, g)| check_theorem3(g, &grid, &format!("g{i}")))
                .collect::<Result<Vec<_>>>()?;
            reports.push(path_exact_case()?);
            Ok(TheoremReport::merge("theorem3", reports))
        }
        Suite::Theorem4 => {
            let spec = PopulationSpec {
                min_components: 2,
                ..PopulationSpec::default()
            };
            let trials = cfg.trials.unwrap_or(THEOREM4_TRIALS);
            let rates: Vec<f64> = match cfg.p {
                Some(p) => vec![p],
                None => THEOREM4_RATES.iter().copied().chain([1.0]).collect(),
            };
            let mut reports = Vec::new();
            for (i, g) in population(seed, 10, &spec).iter().enumerate() {
                for (k, &p) in rates.iter().enumerate() {
                    let plan = DropPlan::one_shot(p, mix(seed, (100 * i + k) as u64));
                    let label = format!("g{i}");
                    let mut rep = check_theorem4(g, &plan, trials, &label)?;
                    if p == 1.0 {
                        let plan = plan.for_trial(0);
                        let m = crate::dropedge::sample(g, &plan)?[0].n_components();
                        rep.details.push(CaseRecord::new(
                            format!("{label}/p1/all-isolated"),
                            m.abs_diff(g.n_nodes()) as f64,
                            0.0,
                            0.0,
                        ));
                        rep = TheoremReport::from_records("theorem4", rep.details);
                    }
                    reports.push(rep);
                }
            }
            Ok(TheoremReport::merge("theorem4", reports))
        }
        Suite::All => Err(Error::Domain("run_suite takes a single suite".into())),
    }
}

/// The two-node path at p = 0.5, where λ, μ and γ all equal 1/3.
fn path_exact_case() -> Result<TheoremReport> {
    let g = Graph::from_edges(2, [(0, 1, 1.0)])?;
    let b = dropedge_bounds(&g, &[0.5])?.points[0];
    let third = 1.0 / 3.0;
    let details = [("lambda", b.lambda), ("mu", b.mu), ("gamma", b.gamma)]
        .into_iter()
        .map(|(name, x)| CaseRecord::new(format!("path2/p0.5/{name}"), (x - third).abs(), 0.0, 1e-12))
        .collect();
    Ok(TheoremReport::from_records("theorem3", details))
}

/// Depth-400 traces of every model with the untrained-dynamics presets,
/// then depth-50 traces with ReLU on, all on the two-component synthetic
/// graph.
fn theorem2_suite(seed: u64) -> Result<TheoremReport> {
    let g = generate(&SyntheticRecipe::small_cora(mix(seed, 0)))?;
    let ctx = DynamicsContext::new(&g)?;
    let mut reports = Vec::new();
    let runs = ModelKind::ALL
        .iter()
        .map(|&k| (k, THEOREM2_DEPTH, false))
        .chain(
            ModelKind::ALL
                .iter()
                .filter(|&&k| k != ModelKind::Appnp)
                .map(|&k| (k, THEOREM2_RELU_DEPTH, true)),
        );
    for (i, (kind, depth, relu)) in runs.enumerate() {
        let spec = ModelSpec::preset(kind, depth, 2, mix(seed, 10 + i as u64)).with_relu(relu);
        let h0 = initial_features(&g, spec.width, spec.seed);
        let trace = run_in_context(&ctx, &spec, h0.view(), &[])?;
        let label = format!("{kind}/depth{depth}/{}", if relu { "relu" } else { "linear" });
        let params = trace
            .params
            .ok_or_else(|| Error::TheoremCheck(format!("{label}: {}", trace.params_note.clone().unwrap_or_default())))?;
        reports.push(check_theorem2(&trace, &params, &label));
    }
    Ok(TheoremReport::merge("theorem2", reports))
}
