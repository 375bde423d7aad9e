use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use smoothlab::lab::{
    cmd_bounds, cmd_check, cmd_dynamics, cmd_gen, cmd_project, BoundsConfig, CheckConfig, DropSetting,
    DynamicsConfig, GenConfig, GraphSource, ProjectConfig, Suite,
};
use smoothlab::propagate::{Bias, ModelKind, ModelSpec};
use smoothlab::synth::SyntheticRecipe;
use smoothlab::theory::default_p_grid;
use smoothlab::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "smoothlab", version, about = "Over-smoothing lab for deep graph convolutional networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize a multi-component graph and its features.
    Gen {
        /// Component sizes.
        #[arg(long, value_delimiter = ',', default_value = "654,26")]
        sizes: Vec<usize>,
        /// Edges per component, as a multiple of its size.
        #[arg(long, default_value_t = 2.0)]
        factor: f64,
        #[arg(long, default_value_t = 16)]
        feature_dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Truncated SVD of a feature CSV.
    Project {
        #[arg(long)]
        features: PathBuf,
        /// Skip one header line.
        #[arg(long)]
        header: bool,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Trace d_M through a deep untrained stack.
    Dynamics {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// DropEdge rate.
        #[arg(long)]
        p: Option<f64>,
        /// Draw a fresh edge subset per layer.
        #[arg(long, requires = "p")]
        layerwise: bool,
        /// Layers to snapshot, e.g. 0,10,400.
        #[arg(long, value_delimiter = ',')]
        snapshots: Vec<usize>,
        /// Also write one SVG scatter per snapshot.
        #[arg(long)]
        svg: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Bounds on λ(p) over a grid of drop rates.
    Bounds {
        #[command(flatten)]
        graph: GraphArgs,
        /// Drop rates; defaults to 0, 0.1, ..., 0.9.
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run theorem suites; exits non-zero on any violation.
    Check {
        /// theorem1, lemma1, theorem2, theorem3, theorem4 or all.
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
        /// Restrict theorem4 to one drop rate.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Edge list; a synthetic two-component graph is used when absent.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, requires = "graph")]
    features: Option<PathBuf>,
    /// Skip one header line of the feature file.
    #[arg(long)]
    header: bool,
}

impl GraphArgs {
    fn source(&self, seed: u64) -> GraphSource {
        match &self.graph {
            Some(g) => GraphSource::Files {
                graph: g.clone(),
                features: self.features.clone(),
                header: self.header,
            },
            None => GraphSource::Synthetic(SyntheticRecipe::small_cora(seed)),
        }
    }
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// gcn, gcn-b, resgcn, appnp or gcn-self.
    #[arg(long, default_value = "gcn")]
    model: String,
    #[arg(long, default_value_t = 400)]
    depth: usize,
    #[arg(long, default_value_t = 2)]
    width: usize,
    /// Residual weight for resgcn [default: 0.2].
    #[arg(long)]
    alpha: Option<f64>,
    /// Teleport weight for appnp [default: 0.5].
    #[arg(long)]
    beta: Option<f64>,
    /// Bias for gcn-b: one value, or one per channel [default: 0.05].
    #[arg(long, value_delimiter = ',')]
    bias: Vec<f64>,
    #[arg(long, overrides_with = "no_relu")]
    relu: bool,
    #[arg(long, overrides_with = "relu")]
    no_relu: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ModelArgs {
    fn spec(&self) -> Result<ModelSpec> {
        let kind: ModelKind = self.model.parse()?;
        let mut spec = ModelSpec::preset(kind, self.depth, self.width, self.seed).with_relu(self.relu && !self.no_relu);
        // explicit values replace the preset; stray ones are rejected by validate()
        if self.alpha.is_some() {
            spec.alpha = self.alpha;
        }
        if self.beta.is_some() {
            spec.beta = self.beta;
        }
        match self.bias.as_slice() {
            [] => {}
            [b] => spec.bias = Some(Bias::Uniform(*b)),
            bs => spec.bias = Some(Bias::PerChannel(bs.to_vec())),
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen {
            sizes,
            factor,
            feature_dim,
            seed,
            out,
        } => {
            let recipe = SyntheticRecipe {
                component_sizes: sizes,
                intra_edge_factor: factor,
                feature_dim,
                seed,
            };
            let o = cmd_gen(&GenConfig { recipe, out })?;
            println!("wrote {} and {}", o.edges.display(), o.features.display());
        }
        Command::Project {
            features,
            header,
            dim,
            out,
        } => {
            let o = cmd_project(&ProjectConfig {
                features,
                header,
                out_dim: dim,
                out,
            })?;
            if let Some(w) = o.warning {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", o.path.display());
        }
        Command::Dynamics {
            graph,
            model,
            p,
            layerwise,
            snapshots,
            svg,
            out,
        } => {
            let model = model.spec()?;
            let o = cmd_dynamics(&DynamicsConfig {
                source: graph.source(model.seed),
                drop: p.map(|p| DropSetting { p, layerwise }),
                model,
                snapshots,
                svg,
                out,
            })?;
            let d = &o.trace.d_m;
            println!(
                "d_M: {:.6e} -> {:.6e} over {} layers; wrote {}",
                d[0],
                d[d.len() - 1],
                d.len() - 1,
                o.trace_path.display()
            );
        }
        Command::Bounds { graph, p, seed, out } => {
            let p_grid = if p.is_empty() { default_p_grid() } else { p };
            let (path, curve) = cmd_bounds(&BoundsConfig {
                source: graph.source(seed),
                p_grid,
                out,
            })?;
            let ok = curve.check_sandwich(smoothlab::theory::ALGEBRAIC_SLACK).is_ok();
            println!("wrote {}", path.display());
            return Ok(ok);
        }
        Command::Check {
            suite,
            seed,
            trials,
            p,
            out,
        } => {
            let suite: Suite = suite.parse()?;
            if let Some(p) = p {
                if suite != Suite::Theorem4 {
                    return Err(Error::Domain("--p only applies to theorem4".into()));
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Domain(format!("drop rate {p} must lie in [0, 1]")));
                }
            }
            let o = cmd_check(&CheckConfig {
                suite,
                seed,
                trials,
                p,
                out,
            })?;
            for r in &o.reports {
                println!("{}", r.summary_line());
            }
            return Ok(o.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
