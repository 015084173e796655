use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gasp::affinity::{build_grid_graph, filter_small_segments, premerge_components, Mapping, MappingSpec};
use gasp::bench::{rows_csv, run_bench, summarize, summary_csv, BenchConfig};
use gasp::check::{run_check, CheckConfig};
use gasp::io::{self, WeightEncoding};
use gasp::metrics::evaluate;
use gasp::noise::{bias_predictions, correlated_noise, Direction, NoiseSpec};
use gasp::synthetic::{planted, DEFAULT_OFFSETS};
use gasp::{gasp as run_gasp, mutex_watershed, GaspError, GaspOptions, LinkageRule, Result};

#[derive(Parser)]
#[command(name = "gasp", version, about = "Agglomerative partitioning of signed graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph from an affinity volume.
    Build(BuildArgs),
    /// Partition a graph (or an affinity volume).
    Run(RunArgs),
    /// Score a segmentation against a ground truth.
    Eval(EvalArgs),
    /// Bias an affinity volume with correlated noise.
    Perturb(PerturbArgs),
    /// Noise-robustness sweep over rules, noise levels and long-range rates.
    Bench(BenchArgs),
    /// Compare the engine with the reference oracles on random graphs.
    OracleCheck(OracleArgs),
    /// Write a planted segmentation and its ideal affinities.
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
struct MappingArgs {
    /// additive or log
    #[arg(long, default_value = "log")]
    mapping: Mapping,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Probability of keeping each long-range edge.
    #[arg(long = "p-long", default_value_t = 1.0)]
    p_long: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl MappingArgs {
    fn spec(&self) -> Result<MappingSpec> {
        MappingSpec::new(self.mapping, self.beta)
    }
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    affinities: PathBuf,
    #[command(flatten)]
    mapping: MappingArgs,
    /// Weight encoding of the output: split or signed.
    #[arg(long, default_value = "split", value_parser = parse_encoding)]
    weights: WeightEncoding,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Graph file (sgr).
    #[arg(long, conflicts_with = "affinities", required_unless_present = "affinities")]
    graph: Option<PathBuf>,
    /// Affinity volume (aff); the graph is built on the fly.
    #[arg(long)]
    affinities: Option<PathBuf>,
    #[command(flatten)]
    mapping: MappingArgs,
    #[arg(long, default_value = "average")]
    rule: LinkageRule,
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    constraints: bool,
    #[arg(long = "local-merge", default_value_t = false, action = clap::ArgAction::Set)]
    local_merge: bool,
    /// Use the Mutex Watershed solver (absmax only).
    #[arg(long)]
    fast: bool,
    /// Pre-merge voxels whose mean affinity exceeds this threshold (needs --affinities).
    #[arg(long)]
    premerge: Option<f64>,
    /// Absorb segments smaller than this; 0 disables.
    #[arg(long = "min-size", default_value_t = 200)]
    min_size: usize,
    #[arg(long)]
    out: PathBuf,
    /// Merge log CSV.
    #[arg(long = "merge-log")]
    merge_log: Option<PathBuf>,
    /// Per-edge merge iterations (u32 array).
    #[arg(long = "edge-map")]
    edge_map: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    seg: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    /// Ground-truth label excluded from scoring.
    #[arg(long = "ignore-label", default_value_t = 0)]
    ignore_label: u32,
    /// Score every voxel.
    #[arg(long = "no-ignore")]
    no_ignore: bool,
}

#[derive(Args)]
struct NoiseArgs {
    /// Noise lattice spacing along c,z,y,x.
    #[arg(long, value_delimiter = ',', default_values_t = [2.0, 4.0, 16.0, 16.0])]
    scales: Vec<f64>,
    #[arg(long, default_value_t = 3)]
    octaves: u32,
    #[arg(long, default_value_t = 0.5)]
    persistence: f64,
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long)]
    affinities: PathBuf,
    #[arg(long = "K")]
    k: f64,
    #[arg(long, default_value = "under")]
    direction: Direction,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    affinities: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "sum,absmax,average")]
    rules: Vec<LinkageRule>,
    #[arg(long = "K-grid", value_delimiter = ',', default_value = "0,2,4,8")]
    k_grid: Vec<f64>,
    #[arg(long, default_value = "under")]
    direction: Direction,
    #[arg(long, default_value_t = 30)]
    samples: usize,
    #[arg(long = "p-long", value_delimiter = ',', default_value = "0,0.1")]
    p_long: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "log")]
    mapping: Mapping,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    constraints: bool,
    #[arg(long = "min-size", default_value_t = 200)]
    min_size: usize,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Per-run rows.
    #[arg(long)]
    out: PathBuf,
    /// Median and quartiles; defaults to OUT with a .summary.csv suffix.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long = "n-graphs", default_value_t = 200)]
    n_graphs: usize,
    #[arg(long = "max-nodes", default_value_t = 40)]
    max_nodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Connected positive graphs only, compared against classic HAC.
    #[arg(long)]
    positive: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Volume shape z,y,x.
    #[arg(long, value_delimiter = ',', default_values_t = [8, 64, 64])]
    shape: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    segments: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "out-affinities")]
    out_affinities: PathBuf,
    #[arg(long = "out-gt")]
    out_gt: PathBuf,
}

fn parse_encoding(s: &str) -> std::result::Result<WeightEncoding, String> {
    match s {
        "split" => Ok(WeightEncoding::Split),
        "signed" => Ok(WeightEncoding::Signed),
        _ => Err(format!("{s:?} (expected split or signed)")),
    }
}

fn usage(name: &'static str, reason: impl Into<String>) -> GaspError {
    GaspError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| GaspError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn build(args: BuildArgs) -> Result<()> {
    let vol = io::read_aff(&args.affinities)?;
    let grid = build_grid_graph(&vol, &args.mapping.spec()?, args.mapping.p_long, args.mapping.seed)?;
    io::write_sgr(&args.out, &grid.graph, args.weights)?;
    eprintln!("{} nodes, {} edges", grid.graph.node_count(), grid.graph.edge_count());
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    if args.fast && args.rule != LinkageRule::AbsMax {
        return Err(usage("fast", format!("the fast path implements absmax only, not {}", args.rule)));
    }
    if args.fast && (args.premerge.is_some() || args.local_merge) {
        return Err(usage("fast", "cannot be combined with --premerge or --local-merge"));
    }
    let (graph, shape, initial) = match (&args.graph, &args.affinities) {
        (Some(path), _) => {
            if args.premerge.is_some() {
                return Err(usage("premerge", "needs --affinities"));
            }
            let g = io::read_sgr(path)?;
            let n = g.node_count();
            (g, vec![n], None)
        }
        (None, Some(path)) => {
            let vol = io::read_aff(path)?;
            let grid = build_grid_graph(&vol, &args.mapping.spec()?, args.mapping.p_long, args.mapping.seed)?;
            let initial = args.premerge.map(|t| premerge_components(&vol, t)).transpose()?;
            (grid.graph, vol.shape().to_vec(), initial)
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    let labels = if args.fast {
        mutex_watershed(&graph).labels()
    } else {
        let opts = GaspOptions::new(args.rule)
            .with_constraints(args.constraints)
            .with_local_merge(args.local_merge);
        let out = run_gasp(&graph, &opts, initial.as_ref())?;
        if let Some(path) = &args.merge_log {
            io::write_merge_log(path, &out.log)?;
        }
        if let Some(path) = &args.edge_map {
            io::write_edge_merge_map(path, &out.log.edge_merge_iteration)?;
        }
        out.partition.labels()
    };
    let labels = if args.min_size > 1 {
        filter_small_segments(&labels, &graph, args.min_size)?
    } else {
        labels
    };
    io::write_labels(&args.out, &shape, &labels)
}

fn eval(args: EvalArgs) -> Result<()> {
    let seg = io::read_labels(&args.seg)?;
    let gt = io::read_labels(&args.gt)?;
    if seg.labels.len() != gt.labels.len() {
        return Err(GaspError::ShapeMismatch(format!("{:?} vs {:?}", seg.shape, gt.shape)));
    }
    let ignore = (!args.no_ignore).then_some(args.ignore_label);
    let scores = evaluate(&seg.labels, &gt.labels, ignore)?;
    println!("{}", serde_json::to_string(&scores).expect("scores serialize"));
    Ok(())
}

fn noise_spec(args: &NoiseArgs, seed: u64) -> Result<NoiseSpec> {
    let scales = <[f64; 4]>::try_from(args.scales.as_slice())
        .map_err(|_| usage("scales", format!("expected 4 values, got {}", args.scales.len())))?;
    Ok(NoiseSpec {
        scales,
        octaves: args.octaves,
        persistence: args.persistence,
        seed,
    })
}

fn perturb(args: PerturbArgs) -> Result<()> {
    let vol = io::read_aff(&args.affinities)?;
    let field = correlated_noise(vol.full_shape(), &noise_spec(&args.noise, args.seed)?)?;
    io::write_aff(&args.out, &bias_predictions(&vol, &field, args.k, args.direction)?)
}

fn bench(args: BenchArgs) -> Result<()> {
    let vol = io::read_aff(&args.affinities)?;
    let gt = io::read_labels(&args.gt)?;
    if gt.shape != vol.shape().to_vec() {
        return Err(GaspError::ShapeMismatch(format!("ground truth {:?} vs affinities {:?}", gt.shape, vol.shape())));
    }
    let spec = noise_spec(&args.noise, 0)?;
    let cfg = BenchConfig {
        direction: args.direction,
        seed: args.seed,
        mapping: MappingSpec::new(args.mapping, args.beta)?,
        constraints: args.constraints,
        min_size: args.min_size,
        noise_scales: spec.scales,
        noise_octaves: spec.octaves,
        noise_persistence: spec.persistence,
        ..BenchConfig::new(args.rules, args.k_grid, args.p_long, args.samples)
    };
    let rows = run_bench(&vol, &gt.labels, &cfg)?;
    write_text(&args.out, &rows_csv(&rows))?;
    let summary = args.summary.unwrap_or_else(|| {
        let mut s = args.out.as_os_str().to_owned();
        s.push(".summary.csv");
        PathBuf::from(s)
    });
    write_text(&summary, &summary_csv(&summarize(&rows)))
}

fn oracle_check(args: OracleArgs) -> Result<bool> {
    let report = run_check(&CheckConfig {
        graphs: args.n_graphs,
        max_nodes: args.max_nodes,
        seed: args.seed,
        positive: args.positive,
    })?;
    for d in report.divergences.iter().take(1) {
        print!("{d}");
    }
    println!(
        "{} graphs, {} comparisons, {} divergences",
        report.graphs,
        report.comparisons,
        report.divergences.len()
    );
    Ok(report.divergences.is_empty())
}

fn synth(args: SynthArgs) -> Result<()> {
    let shape = <[usize; 3]>::try_from(args.shape.as_slice())
        .map_err(|_| usage("shape", format!("expected 3 values, got {}", args.shape.len())))?;
    let p = planted(shape, args.segments, &DEFAULT_OFFSETS, args.seed)?;
    io::write_aff(&args.out_affinities, &p.affinities)?;
    io::write_labels(&args.out_gt, &shape, &p.labels)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(a) => build(a).map(|_| true),
        Command::Run(a) => run(a).map(|_| true),
        Command::Eval(a) => eval(a).map(|_| true),
        Command::Perturb(a) => perturb(a).map(|_| true),
        Command::Bench(a) => bench(a).map(|_| true),
        Command::OracleCheck(a) => oracle_check(a),
        Command::Synth(a) => synth(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
