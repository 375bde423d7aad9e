//! Forward propagation through untrained GCN-style stacks with per-layer
//! distance tracking.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{build_propagator, connected_components, Graph, Normalization, Propagator};
use crate::linalg::{gaussian_matrix, orthonormalize_columns, top_singular_value};
use crate::seed::mix;
use crate::spectral::{eigenvalues, second_lambda_from_values};
use crate::subspace::{build_subspace, distance_to_subspace, SubspaceBasis};
use crate::theory::{convergence_params, ConvergenceParams};

/// Entries beyond this magnitude abort a run.
pub const DIVERGENCE_LIMIT: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Gcn,
    GcnBias,
    ResGcn,
    Appnp,
    GcnSelf,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Gcn,
        ModelKind::GcnBias,
        ModelKind::ResGcn,
        ModelKind::Appnp,
        ModelKind::GcnSelf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Gcn => "gcn",
            ModelKind::GcnBias => "gcn-b",
            ModelKind::ResGcn => "resgcn",
            ModelKind::Appnp => "appnp",
            ModelKind::GcnSelf => "gcn-self",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "gcn" => Ok(ModelKind::Gcn),
            "gcn-b" | "gcnb" => Ok(ModelKind::GcnBias),
            "resgcn" => Ok(ModelKind::ResGcn),
            "appnp" => Ok(ModelKind::Appnp),
            "gcn-self" | "gcnself" => Ok(ModelKind::GcnSelf),
            _ => Err(Error::Domain(format!("unknown model {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightInit {
    Orthogonal,
    ScaledGaussian(f64),
}

/// Bias added by GCN-b before the non-linearity.
#[derive(Debug, Clone, PartialEq)]
pub enum Bias {
    /// One scalar broadcast over channels and layers.
    Uniform(f64),
    /// One row shared by all layers.
    PerChannel(Vec<f64>),
    /// One row per layer.
    PerLayer(Vec<Vec<f64>>),
}

impl Bias {
    pub fn row(&self, layer: usize, width: usize) -> Array1<f64> {
        match self {
            Bias::Uniform(b) => Array1::from_elem(width, *b),
            Bias::PerChannel(v) => Array1::from(v.clone()),
            Bias::PerLayer(rows) => Array1::from(rows[layer].clone()),
        }
    }

    fn check(&self, depth: usize, width: usize) -> Result<()> {
        let bad_row = |v: &Vec<f64>| v.len() != width;
        match self {
            Bias::Uniform(_) => Ok(()),
            Bias::PerChannel(v) if bad_row(v) => Err(Error::Shape(format!(
                "bias row has {} entries, width is {width}",
                v.len()
            ))),
            Bias::PerLayer(rows) if rows.len() != depth || rows.iter().any(bad_row) => {
                Err(Error::Shape(format!("per-layer bias must be {depth} rows of {width}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub depth: usize,
    pub width: usize,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub bias: Option<Bias>,
    pub use_relu: bool,
    pub weight_init: WeightInit,
    pub seed: u64,
}

impl ModelSpec {
    /// A spec with the given kind and no kind-specific constants set.
    pub fn new(kind: ModelKind, depth: usize, width: usize) -> Self {
        ModelSpec {
            kind,
            depth,
            width,
            alpha: None,
            beta: None,
            bias: None,
            use_relu: false,
            weight_init: WeightInit::Orthogonal,
            seed: 0,
        }
    }

    /// The untrained-dynamics constants: bias 0.05, α = 0.2, β = 0.5,
    /// orthogonal weights and no ReLU.
    pub fn preset(kind: ModelKind, depth: usize, width: usize, seed: u64) -> Self {
        let mut spec = ModelSpec::new(kind, depth, width);
        spec.seed = seed;
        match kind {
            ModelKind::GcnBias => spec.bias = Some(Bias::Uniform(0.05)),
            ModelKind::ResGcn => spec.alpha = Some(0.2),
            ModelKind::Appnp => spec.beta = Some(0.5),
            ModelKind::Gcn | ModelKind::GcnSelf => {}
        }
        spec
    }

    pub fn with_relu(mut self, on: bool) -> Self {
        self.use_relu = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::Domain("depth must be at least 1".into()));
        }
        if self.width == 0 {
            return Err(Error::Domain("width must be at least 1".into()));
        }
        let unit = |name: &str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} = {x} must lie in [0, 1]")))
            }
        };
        let stray = |name: &str| {
            Err(Error::Domain(format!("{name} is not a parameter of {}", self.kind)))
        };
        match (self.kind, self.alpha, self.beta, &self.bias) {
            (ModelKind::ResGcn, Some(a), None, None) => unit("alpha", a)?,
            (ModelKind::Appnp, None, Some(b), None) => unit("beta", b)?,
            (ModelKind::GcnBias, None, None, Some(b)) => b.check(self.depth, self.width)?,
            (ModelKind::Gcn | ModelKind::GcnSelf, None, None, None) => {}
            (ModelKind::ResGcn, None, _, _) => return Err(Error::MissingExtras("resgcn needs alpha".into())),
            (ModelKind::Appnp, _, None, _) => return Err(Error::MissingExtras("appnp needs beta".into())),
            (ModelKind::GcnBias, _, _, None) => return Err(Error::MissingExtras("gcn-b needs a bias".into())),
            (_, Some(_), _, _) => return stray("alpha"),
            (_, _, Some(_), _) => return stray("beta"),
            (_, _, _, Some(_)) => return stray("bias"),
        }
        if let WeightInit::ScaledGaussian(s) = self.weight_init {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::Domain(format!("gaussian scale {s} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub weights: Vec<Array2<f64>>,
    pub self_weights: Option<Vec<Array2<f64>>>,
    /// Supremum over layers of the largest singular value of W_l.
    pub s_sup: f64,
    pub s_self_sup: Option<f64>,
}

fn draw_weight(rng: &mut ChaCha8Rng, width: usize, init: WeightInit) -> Array2<f64> {
    match init {
        WeightInit::Orthogonal => loop {
            let mut w = gaussian_matrix(rng, width, width, 1.0);
            if orthonormalize_columns(&mut w) == 0 {
                break w;
            }
        },
        WeightInit::ScaledGaussian(scale) => gaussian_matrix(rng, width, width, scale),
    }
}

fn sup_singular(ws: &[Array2<f64>]) -> Result<f64> {
    ws.iter()
        .map(|w| top_singular_value(w.view()))
        .try_fold(0.0_f64, |acc, s| Ok(acc.max(s?)))
}

/// Draws the frozen weights of a stack. Deterministic in `spec.seed`.
pub fn init_stack(spec: &ModelSpec) -> Result<LayerStack> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let weights: Vec<_> = (0..spec.depth)
        .map(|_| draw_weight(&mut rng, spec.width, spec.weight_init))
        .collect();
    let self_weights = (spec.kind == ModelKind::GcnSelf).then(|| {
        (0..spec.depth)
            .map(|_| draw_weight(&mut rng, spec.width, spec.weight_init))
            .collect::<Vec<_>>()
    });
    let s_sup = sup_singular(&weights)?;
    let s_self_sup = self_weights.as_deref().map(sup_singular).transpose()?;
    Ok(LayerStack {
        weights,
        self_weights,
        s_sup,
        s_self_sup,
    })
}

/// Row-compressed copy of a propagation matrix, for repeated products.
#[derive(Debug, Clone)]
pub struct SparseOp {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOp {
    pub fn from_dense(m: &Array2<f64>) -> Self {
        let n = m.nrows();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in m.rows() {
            for (j, &x) in row.iter().enumerate() {
                if x != 0.0 {
                    indices.push(j);
                    values.push(x);
                }
            }
            indptr.push(indices.len());
        }
        SparseOp {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn apply(&self, h: ArrayView2<'_, f64>) -> Array2<f64> {
        let c = h.ncols();
        let mut out = Array2::zeros((self.n, c));
        for i in 0..self.n {
            let mut row = out.row_mut(i);
            for k in self.indptr[i]..self.indptr[i + 1] {
                let (j, a) = (self.indices[k], self.values[k]);
                for (o, x) in row.iter_mut().zip(h.row(j)) {
                    *o += a * x;
                }
            }
        }
        out
    }
}

/// Kind-specific inputs of one layer.
#[derive(Debug, Clone, Copy)]
pub enum LayerInput<'a> {
    Gcn { w: ArrayView2<'a, f64> },
    GcnBias { w: ArrayView2<'a, f64>, b: &'a Array1<f64> },
    ResGcn { w: ArrayView2<'a, f64>, alpha: f64 },
    Appnp { beta: f64, h0: ArrayView2<'a, f64> },
    GcnSelf { w: ArrayView2<'a, f64>, w_self: ArrayView2<'a, f64> },
}

fn relu_inplace(h: &mut Array2<f64>) {
    h.mapv_inplace(|x| x.max(0.0));
}

fn check_square(name: &str, w: ArrayView2<'_, f64>, c: usize) -> Result<()> {
    if w.dim() != (c, c) {
        return Err(Error::Shape(format!(
            "{name} is {}x{}, expected {c}x{c}",
            w.nrows(),
            w.ncols()
        )));
    }
    Ok(())
}

/// One layer: σ(ÂHW), σ(ÂHW + b), σ(ÂHW) + αH, (1 − β)ÂH + βH₀ or
/// σ(ÂHW + HW_self). APPNP never applies σ.
pub fn step(prop: &SparseOp, h: ArrayView2<'_, f64>, input: LayerInput<'_>, relu: bool) -> Result<Array2<f64>> {
    let c = h.ncols();
    if h.nrows() != prop.n() {
        return Err(Error::Shape(format!(
            "state has {} rows, propagator is {}x{}",
            h.nrows(),
            prop.n(),
            prop.n()
        )));
    }
    let ah = prop.apply(h);
    let out = match input {
        LayerInput::Gcn { w } => {
            check_square("W", w, c)?;
            let mut z = ah.dot(&w);
            if relu {
                relu_inplace(&mut z);
            }
            z
        }
        LayerInput::GcnBias { w, b } => {
            check_square("W", w, c)?;
            if b.len() != c {
                return Err(Error::Shape(format!("bias has {} entries, width is {c}", b.len())));
            }
            let mut z = ah.dot(&w) + b;
            if relu {
                relu_inplace(&mut z);
            }
            z
        }
        LayerInput::ResGcn { w, alpha } => {
            check_square("W", w, c)?;
            let mut z = ah.dot(&w);
            if relu {
                relu_inplace(&mut z);
            }
            z.scaled_add(alpha, &h);
            z
        }
        LayerInput::Appnp { beta, h0 } => {
            if h0.dim() != h.dim() {
                return Err(Error::Shape("H0 and H differ in shape".into()));
            }
            let mut z = ah * (1.0 - beta);
            z.scaled_add(beta, &h0);
            z
        }
        LayerInput::GcnSelf { w, w_self } => {
            check_square("W", w, c)?;
            check_square("W_self", w_self, c)?;
            let mut z = ah.dot(&w) + h.dot(&w_self);
            if relu {
                relu_inplace(&mut z);
            }
            z
        }
    };
    Ok(out)
}

/// Builds the inputs of layer `l` from a spec and its stack.
pub fn layer_input<'a>(
    spec: &ModelSpec,
    stack: &'a LayerStack,
    l: usize,
    h0: ArrayView2<'a, f64>,
    bias_rows: &'a [Array1<f64>],
) -> Result<LayerInput<'a>> {
    let w = stack
        .weights
        .get(l)
        .ok_or_else(|| Error::MissingExtras(format!("no weight for layer {l}")))?
        .view();
    Ok(match spec.kind {
        ModelKind::Gcn => LayerInput::Gcn { w },
        ModelKind::GcnBias => LayerInput::GcnBias {
            w,
            b: bias_rows
                .get(l)
                .ok_or_else(|| Error::MissingExtras(format!("no bias for layer {l}")))?,
        },
        ModelKind::ResGcn => LayerInput::ResGcn {
            w,
            alpha: spec.alpha.ok_or_else(|| Error::MissingExtras("alpha".into()))?,
        },
        ModelKind::Appnp => LayerInput::Appnp {
            beta: spec.beta.ok_or_else(|| Error::MissingExtras("beta".into()))?,
            h0,
        },
        ModelKind::GcnSelf => LayerInput::GcnSelf {
            w,
            w_self: stack
                .self_weights
                .as_ref()
                .and_then(|s| s.get(l))
                .ok_or_else(|| Error::MissingExtras(format!("no self weight for layer {l}")))?
                .view(),
        },
    })
}

/// Maps features to `width` columns. Identity when the widths agree,
/// otherwise X·G with G a seeded Gaussian scaled by 1/√F.
pub fn lift_features(x: ArrayView2<'_, f64>, width: usize, seed: u64) -> Array2<f64> {
    let f = x.ncols();
    if f == width {
        return x.to_owned();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, 0x11f7));
    let g = gaussian_matrix(&mut rng, f, width, 1.0 / (f.max(1) as f64).sqrt());
    x.dot(&g)
}

#[derive(Debug, Clone)]
pub struct DynamicsTrace {
    pub kind: ModelKind,
    /// d_ℳ(H_l) for l = 0..=depth.
    pub d_m: Vec<f64>,
    pub snapshots: BTreeMap<usize, Array2<f64>>,
    pub params: Option<ConvergenceParams>,
    /// Why `params` is missing, when it is.
    pub params_note: Option<String>,
    pub final_state: Array2<f64>,
}

impl DynamicsTrace {
    /// r + v^l |d_ℳ(H₀) − r| per layer, when parameters exist.
    pub fn envelope(&self) -> Option<Vec<f64>> {
        let p = self.params.as_ref()?;
        Some((0..self.d_m.len()).map(|l| p.envelope(l, self.d_m[0])).collect())
    }
}

/// Everything about a graph that stays fixed across runs on it.
#[derive(Debug, Clone)]
pub struct DynamicsContext {
    pub propagator: Propagator,
    pub op: SparseOp,
    pub basis: SubspaceBasis,
    pub lambda: f64,
}

impl DynamicsContext {
    pub fn new(g: &Graph) -> Result<Self> {
        let propagator = build_propagator(g, Normalization::AugNormAdj, 0.0)?;
        let comp = connected_components(g);
        let lambda = second_lambda_from_values(&eigenvalues(&propagator)?, &comp)?.lambda;
        let basis = build_subspace(g, &comp);
        let op = SparseOp::from_dense(&propagator.matrix);
        Ok(DynamicsContext {
            propagator,
            op,
            basis,
            lambda,
        })
    }
}

fn check_finite(h: &Array2<f64>, layer: usize) -> Result<()> {
    if h.iter().any(|x| !(x.abs() <= DIVERGENCE_LIMIT)) {
        return Err(Error::Divergence {
            layer,
            limit: DIVERGENCE_LIMIT,
        });
    }
    Ok(())
}

/// Runs `spec.depth` layers where layer l propagates with `op_for(l)`.
/// Distances are always measured against `ctx.basis`.
pub fn run_with_ops<'o, F>(
    ctx: &DynamicsContext,
    spec: &ModelSpec,
    stack: &LayerStack,
    h0: ArrayView2<'_, f64>,
    snapshot_layers: &[usize],
    mut op_for: F,
) -> Result<(Vec<f64>, BTreeMap<usize, Array2<f64>>, Array2<f64>)>
where
    F: FnMut(usize) -> &'o SparseOp,
{
    if h0.ncols() != spec.width {
        return Err(Error::Shape(format!(
            "H0 has {} columns, width is {}",
            h0.ncols(),
            spec.width
        )));
    }
    let bias_rows: Vec<Array1<f64>> = match &spec.bias {
        Some(b) => (0..spec.depth).map(|l| b.row(l, spec.width)).collect(),
        None => Vec::new(),
    };
    let wanted = |l: usize| snapshot_layers.contains(&l);

    let mut d_m = Vec::with_capacity(spec.depth + 1);
    let mut snapshots = BTreeMap::new();
    let mut h = h0.to_owned();
    d_m.push(distance_to_subspace(&ctx.basis, h.view())?);
    if wanted(0) {
        snapshots.insert(0, h.clone());
    }
    for l in 0..spec.depth {
        let input = layer_input(spec, stack, l, h0, &bias_rows)?;
        h = step(op_for(l), h.view(), input, spec.use_relu)?;
        check_finite(&h, l + 1)?;
        d_m.push(distance_to_subspace(&ctx.basis, h.view())?);
        if wanted(l + 1) {
            snapshots.insert(l + 1, h.clone());
        }
    }
    Ok((d_m, snapshots, h))
}

pub fn run_in_context(
    ctx: &DynamicsContext,
    spec: &ModelSpec,
    h0: ArrayView2<'_, f64>,
    snapshot_layers: &[usize],
) -> Result<DynamicsTrace> {
    let stack = init_stack(spec)?;
    let (d_m, snapshots, final_state) =
        run_with_ops(ctx, spec, &stack, h0, snapshot_layers, |_| &ctx.op)?;
    let (params, params_note) = match convergence_params(spec, &stack, ctx.lambda, &ctx.basis, Some(h0)) {
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

pub fn run_dynamics(
    g: &Graph,
    spec: &ModelSpec,
    h0: ArrayView2<'_, f64>,
    snapshot_layers: &[usize],
) -> Result<DynamicsTrace> {
    let ctx = DynamicsContext::new(g)?;
    run_in_context(&ctx, spec, h0, snapshot_layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;
    use ndarray::array;

    fn path2_op() -> SparseOp {
        let g = Graph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        SparseOp::from_dense(&build_propagator(&g, Normalization::AugNormAdj, 0.0).unwrap().matrix)
    }

    fn assert_close(a: &Array2<f64>, b: &Array2<f64>) {
        assert_eq!(a.dim(), b.dim());
        assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-14), "{a} vs {b}");
    }

    #[test]
    fn gcn_step_path() {
        let op = path2_op();
        let w = Array2::<f64>::eye(1);
        let out = step(&op, array![[1.0], [-1.0]].view(), LayerInput::Gcn { w: w.view() }, false).unwrap();
        assert_close(&out, &array![[0.0], [0.0]]);
        let out = step(&op, array![[1.0], [1.0]].view(), LayerInput::Gcn { w: w.view() }, false).unwrap();
        assert_close(&out, &array![[1.0], [1.0]]);
    }

    #[test]
    fn appnp_beta_one_returns_input() {
        let op = path2_op();
        let h0 = array![[3.0, 1.0], [-2.0, 0.5]];
        let h = array![[10.0, -4.0], [7.0, 7.0]];
        let out = step(&op, h.view(), LayerInput::Appnp { beta: 1.0, h0: h0.view() }, true).unwrap();
        assert_eq!(out, h0);
    }

    #[test]
    fn relu_and_residual() {
        let op = path2_op();
        let w = array![[-1.0]];
        let h = array![[1.0], [1.0]];
        let out = step(&op, h.view(), LayerInput::ResGcn { w: w.view(), alpha: 0.5 }, true).unwrap();
        assert_close(&out, &array![[0.5], [0.5]]);
        let b = array![2.0];
        let out = step(&op, h.view(), LayerInput::GcnBias { w: w.view(), b: &b }, true).unwrap();
        assert_close(&out, &array![[1.0], [1.0]]);
        let ws = array![[3.0]];
        let out = step(&op, h.view(), LayerInput::GcnSelf { w: w.view(), w_self: ws.view() }, false).unwrap();
        assert_close(&out, &array![[2.0], [2.0]]);
    }

    #[test]
    fn step_shape_errors() {
        let op = path2_op();
        let w = Array2::<f64>::eye(2);
        let h = array![[1.0], [1.0]];
        assert!(matches!(step(&op, h.view(), LayerInput::Gcn { w: w.view() }, false), Err(Error::Shape(_))));
        let h3 = Array2::zeros((3, 2));
        assert!(matches!(step(&op, h3.view(), LayerInput::Gcn { w: w.view() }, false), Err(Error::Shape(_))));
    }

    #[test]
    fn orthogonal_stack() {
        let spec = ModelSpec::preset(ModelKind::Gcn, 3, 8, 42);
        let stack = init_stack(&spec).unwrap();
        for w in &stack.weights {
            assert!(frobenius((w.t().dot(w) - Array2::<f64>::eye(8)).view()) <= 1e-10);
        }
        assert!((stack.s_sup - 1.0).abs() < 1e-10);
        assert_eq!(init_stack(&spec).unwrap(), stack);
    }

    #[test]
    fn spec_validation() {
        let mut s = ModelSpec::new(ModelKind::Gcn, 2, 0);
        assert!(matches!(init_stack(&s), Err(Error::Domain(_))));
        s.width = 2;
        s.alpha = Some(0.1);
        assert!(matches!(s.validate(), Err(Error::Domain(_))));
        let s = ModelSpec::new(ModelKind::ResGcn, 2, 2);
        assert!(matches!(s.validate(), Err(Error::MissingExtras(_))));
        let mut s = ModelSpec::preset(ModelKind::Appnp, 2, 2, 0);
        s.beta = Some(1.5);
        assert!(s.validate().is_err());
        let mut s = ModelSpec::preset(ModelKind::GcnBias, 2, 2, 0);
        s.bias = Some(Bias::PerChannel(vec![0.1]));
        assert!(matches!(s.validate(), Err(Error::Shape(_))));
    }

    #[test]
    fn sparse_matches_dense() {
        let g = Graph::from_edges(4, [(0, 1, 0.5), (1, 2, 1.0), (2, 3, 2.0)]).unwrap();
        let prop = build_propagator(&g, Normalization::AugNormAdj, 0.0).unwrap();
        let op = SparseOp::from_dense(&prop.matrix);
        let h = array![[1.0, 2.0], [0.5, -1.0], [3.0, 0.0], [-2.0, 1.0]];
        let diff = op.apply(h.view()) - prop.matrix.dot(&h);
        assert!(diff.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn divergence_is_reported() {
        let g = Graph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let mut spec = ModelSpec::new(ModelKind::Gcn, 200, 1);
        spec.weight_init = WeightInit::ScaledGaussian(1e10);
        let h0 = array![[1.0], [2.0]];
        match run_dynamics(&g, &spec, h0.view(), &[]) {
            Err(Error::Divergence { layer, .. }) => assert!(layer > 1 && layer < 200),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lift_is_identity_on_matching_width() {
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        assert_eq!(lift_features(x.view(), 2, 9), x);
        let y = lift_features(x.view(), 5, 9);
        assert_eq!(y.dim(), (2, 5));
        assert_eq!(y, lift_features(x.view(), 5, 9));
    }
}
