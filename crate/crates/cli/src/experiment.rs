use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use cdam_core::experiments::{
    automaton_sweep, community_matrices, community_report, four_modes, hop_range, miyashita_fit,
    retrieval_sweep, sequence_recall, sequence_report, surrogate_fashion, ExperimentConfig,
    ExperimentReport, Setting, SurrogateFrames, DEFAULT_PATIENCE, FOUR_MODES, PAPER_LEVELS,
    RANGE_SWEEP,
};
use cdam_core::graph::NamedGraph;
use cdam_core::ingest::{compose_automaton_patterns, ingest_frames, load_idx};
use cdam_core::{AutomatonSpec, StopRule};

use crate::sources::{data_dir, named_blocks, parse_graph_spec};
use crate::{CliResult, Failure, ModelFlags};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Name {
    FourModes,
    HopRange,
    Miyashita,
    Karate,
    Tutte,
    Barbell,
    Sequence,
    RetrievalSweep,
    AutomatonSweep,
}

impl Name {
    fn as_str(self) -> &'static str {
        self.to_possible_value()
            .map(|v| v.get_name().to_string())
            .map(|s| Box::leak(s.into_boxed_str()) as &'static str)
            .unwrap_or("experiment")
    }
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    pub name: Name,
    #[command(flatten)]
    pub model: ModelFlags,
    /// Neurons per pattern.
    #[arg(long)]
    pub n: Option<usize>,
    /// Graph override for four-modes, hop-range and miyashita.
    #[arg(long)]
    pub graph: Option<String>,
    /// Report directory (default: results/<name>).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Trials per level for retrieval-sweep.
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Comma-separated memory loads for retrieval-sweep.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
    /// IDX image file for retrieval-sweep, or a frame directory for sequence.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Automaton spec (TOML) for automaton-sweep; defaults to the family tree.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

fn config(args: &ExperimentArgs, default_n: usize) -> CliResult<ExperimentConfig> {
    let m = &args.model;
    let cfg = ExperimentConfig {
        n: args.n.unwrap_or(default_n),
        beta: m.beta,
        eta: m.eta,
        noise_c: m.noise_c,
        seed: m.seed,
        stop: StopRule {
            max_steps: m.steps.unwrap_or(101),
            tol: m.tol,
        },
        ..ExperimentConfig::default()
    };
    if cfg.n == 0 || cfg.stop.max_steps == 0 {
        return Err(Failure::Usage("--n and --steps must be >= 1".into()));
    }
    cfg.params(Setting::new(0.0, 0.0)).validate()?;
    Ok(cfg)
}

/// The settings grid, or the single cell given by `--a/--h`.
fn settings(args: &ExperimentArgs, default: &[Setting]) -> CliResult<Vec<Setting>> {
    match (args.model.a, args.model.h) {
        (Some(a), Some(h)) => Ok(vec![Setting::new(a, h)]),
        (None, None) => Ok(default.to_vec()),
        _ => Err(Failure::Usage("give both --a and --h, or neither".into())),
    }
}

fn fashion_images(args: &ExperimentArgs) -> CliResult<(Vec<Vec<f64>>, String)> {
    let explicit = args.data.clone();
    let from_env = data_dir().and_then(|d| {
        ["fashion-images-idx3-ubyte", "train-images-idx3-ubyte"]
            .iter()
            .map(|f| d.join(f))
            .find(|p| p.exists())
    });
    match explicit.or(from_env) {
        Some(path) => {
            let d = load_idx(&path, None)?;
            Ok((d.images, path.display().to_string()))
        }
        None => {
            eprintln!("note: no dataset given (--data or CDAM_DATA_DIR); using the seeded surrogate");
            let d = surrogate_fashion(10_000, args.model.seed)?;
            Ok((d.images, format!("surrogate seed={}", args.model.seed)))
        }
    }
}

fn build(args: &ExperimentArgs) -> CliResult<ExperimentReport> {
    let graph_or = |default: &str| parse_graph_spec(args.graph.as_deref().unwrap_or(default));
    match args.name {
        Name::FourModes => {
            let cfg = config(args, 1000)?;
            let g = graph_or("cycle:30")?;
            Ok(four_modes(&g, &settings(args, &FOUR_MODES)?, &cfg)?.to_report("four-modes")?)
        }
        Name::HopRange => {
            let cfg = config(args, 1000)?;
            let g = graph_or("cycle:30")?;
            let s = settings(args, &RANGE_SWEEP)?;
            if s.len() < 2 {
                return Err(Failure::Usage("hop-range compares settings; drop --a/--h".into()));
            }
            Ok(hop_range(&g, &s, 10, &cfg)?.to_report()?)
        }
        Name::Miyashita => {
            let cfg = config(args, 1000)?;
            let g = graph_or("cycle:30")?;
            let s = settings(args, &[Setting::new(-2.45, 3.45)])?;
            if s.len() != 1 {
                return Err(Failure::Usage("miyashita fits one setting".into()));
            }
            let seeds: Vec<u64> = (0..5).map(|k| cfg.seed + k).collect();
            Ok(miyashita_fit(&g, s[0], &seeds, &cfg)?.to_report()?)
        }
        Name::Karate | Name::Tutte => {
            let cfg = config(args, 1000)?;
            let kind = if matches!(args.name, Name::Karate) {
                NamedGraph::Karate
            } else {
                NamedGraph::Tutte
            };
            let g = parse_graph_spec(kind.name())?;
            let blocks = named_blocks(kind)?;
            let results = community_matrices(&g, &settings(args, &RANGE_SWEEP)?, &cfg)?;
            Ok(community_report(kind.name(), &g, Some(&blocks), &results, &cfg)?)
        }
        Name::Barbell => {
            let cfg = config(args, 1000)?;
            let g = parse_graph_spec("barbell:10,10")?;
            let blocks: Vec<i64> = (0..30)
                .map(|v| match v {
                    0..=9 => 0,
                    20..=29 => 1,
                    _ => -1,
                })
                .collect();
            let results = community_matrices(&g, &settings(args, &RANGE_SWEEP)?, &cfg)?;
            Ok(community_report("barbell", &g, Some(&blocks), &results, &cfg)?)
        }
        Name::Sequence => {
            let cfg = config(args, 2000)?;
            let steps = args.model.steps.unwrap_or(1500);
            let (patterns, label) = match &args.data {
                Some(dir) => (
                    ingest_frames(dir, cfg.n, cfg.seed)?.0,
                    format!("frames {} n={}", dir.display(), cfg.n),
                ),
                None => (
                    SurrogateFrames::standard(cfg.seed)?.patterns,
                    format!("surrogate frames seed={}", cfg.seed),
                ),
            };
            let grid = [
                Setting::new(1.0, 0.0),
                Setting::new(0.5, 0.5),
                Setting::new(0.0, 1.0),
                Setting::new(-1.0, 2.0),
                Setting::new(-2.0, 3.0),
            ];
            let runs = settings(args, &grid)?
                .into_iter()
                .map(|s| sequence_recall(&patterns, s, steps, DEFAULT_PATIENCE, &cfg))
                .collect::<cdam_core::Result<Vec<_>>>()?;
            Ok(sequence_report(&runs, &label, &cfg)?)
        }
        Name::RetrievalSweep => {
            let cfg = config(args, 784)?;
            let (images, label) = fashion_images(args)?;
            let levels = args.levels.clone().unwrap_or_else(|| PAPER_LEVELS.to_vec());
            let grid = [
                Setting::new(1.0, 0.0),
                Setting::new(0.75, 0.25),
                Setting::new(0.5, 0.5),
                Setting::new(0.25, 0.75),
                Setting::new(0.1, 0.9),
            ];
            Ok(retrieval_sweep(&images, &label, &levels, &settings(args, &grid)?, args.trials, &cfg)?
                .to_report()?)
        }
        Name::AutomatonSweep => {
            let cfg = config(args, 1000)?;
            let spec = match &args.spec {
                Some(p) => AutomatonSpec::load(p)?,
                None => AutomatonSpec::family_tree(),
            };
            let composed = compose_automaton_patterns(&spec, cfg.n, cfg.seed)?;
            let sweep = automaton_sweep(&composed, cfg.stop)?;
            println!(
                "defined {}/{}, undefined {}/{}",
                sweep.defined_correct, sweep.defined_total, sweep.undefined_correct, sweep.undefined_total
            );
            Ok(sweep.to_report(&composed)?)
        }
    }
}

pub fn run(args: &ExperimentArgs) -> CliResult {
    let report = build(args)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| Path::new("results").join(args.name.as_str()));
    report.write(&out)?;
    println!("{} report written to {}", report.name, out.display());
    if let Some(stats) = report.statistics.as_object() {
        for key in ["r_squared", "effective_ranges", "anova", "block_contrast"] {
            if let Some(v) = stats.get(key) {
                println!("  {key}: {v}");
            }
        }
    }
    Ok(())
}
