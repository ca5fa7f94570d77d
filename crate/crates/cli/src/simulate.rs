use std::path::Path;

use clap::Args;
use cdam_core::dynamics::RunManifest;
use cdam_core::experiments::argmax;
use cdam_core::{
    init_state, normalize, CdamError, Dynamics, MemoryGraph, ModelParams, StopRule,
};
use cdam_core::dynamics::EnergyModel;

use crate::sources::{parse_graph_spec, parse_pattern_spec, PatternSource};
use crate::{CliResult, Failure, ModelFlags};

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    /// cycle:P, dicycle:P, barbell:N,M, karate, tutte, regular:P,K,SEED, file:PATH.
    /// Omit for automaton patterns, which bring their own graph.
    #[arg(long)]
    pub graph: Option<String>,
    /// random:N, idx:PATH, frames:DIR[,N] or automaton[:SPEC][,N].
    #[arg(long, default_value = "random:1000")]
    pub patterns: String,
    /// Index of the pattern used as the noisy initial state.
    #[arg(long, default_value_t = 0)]
    pub trigger: usize,
    #[arg(long)]
    pub out: std::path::PathBuf,
}

struct Plan {
    graph_spec: String,
    graph: MemoryGraph,
    source: PatternSource,
    params: ModelParams,
    stop: StopRule,
}

fn plan(
    graph_spec: Option<&str>,
    pattern_spec: &str,
    flags: &ModelFlags,
    trigger: usize,
) -> CliResult<Plan> {
    let graph = graph_spec.map(parse_graph_spec).transpose()?;
    let source = parse_pattern_spec(pattern_spec, graph.as_ref().map(MemoryGraph::vertex_count), flags.seed)?;
    let (graph, graph_spec) = match (&source, graph) {
        (PatternSource::Automaton(c), None) => (c.graph.clone(), "automaton".to_string()),
        (PatternSource::Automaton(_), Some(_)) => {
            return Err(Failure::Usage(
                "automaton patterns bring their own graph; drop --graph".into(),
            ))
        }
        (PatternSource::Plain(_), Some(g)) => (g, graph_spec.unwrap_or_default().to_string()),
        (PatternSource::Plain(_), None) => {
            return Err(Failure::Usage(format!("--patterns {pattern_spec} needs --graph")))
        }
    };
    let p = source.patterns().p();
    if graph.vertex_count() != p {
        return Err(Failure::Usage(format!(
            "graph has {} vertices but there are {p} patterns",
            graph.vertex_count()
        )));
    }
    if trigger >= p {
        return Err(Failure::Usage(format!("--trigger {trigger} out of range 0..{p}")));
    }
    let params = ModelParams::new(flags.a.unwrap_or(1.0), flags.h.unwrap_or(0.0))
        .with_beta(flags.beta)
        .with_eta(flags.eta);
    params.validate()?;
    let stop = StopRule {
        max_steps: flags.steps.unwrap_or(101),
        tol: flags.tol,
    };
    if stop.max_steps == 0 || stop.tol.is_nan() || stop.tol < 0.0 {
        return Err(Failure::Usage("--steps must be >= 1 and --tol >= 0".into()));
    }
    if !(flags.noise_c >= 0.0 && flags.noise_c.is_finite()) {
        return Err(Failure::Usage("--noise-c must be finite and >= 0".into()));
    }
    Ok(Plan {
        graph_spec,
        graph,
        source,
        params,
        stop,
    })
}

fn execute(plan: &Plan, pattern_spec: &str, flags: &ModelFlags, trigger: usize, out: &Path) -> CliResult {
    let patterns = plan.source.patterns();
    let coupling = normalize(&plan.graph);
    let dynamics = Dynamics::new(patterns, &coupling, plan.params)?;
    let s0 = init_state(patterns, trigger, flags.noise_c, flags.seed)?;
    let energy = EnergyModel::new(&plan.graph, patterns.p())?;
    // directed energies can be undefined for some (a, h); fall back to no energy column
    let trace = match dynamics.run_with_energy(&s0, plan.stop, &energy) {
        Err(CdamError::EnergyUndefined(msg)) => {
            eprintln!("warning: energy not recorded ({msg})");
            dynamics.run(&s0, plan.stop)?
        }
        other => other?,
    };
    let manifest = RunManifest {
        params: plan.params,
        stop: plan.stop,
        seed: flags.seed,
        noise_c: flags.noise_c,
        trigger,
        n: patterns.n(),
        p: patterns.p(),
        graph: plan.graph_spec.clone(),
        graph_fingerprint: plan.graph.fingerprint(),
        patterns: pattern_spec.to_string(),
        steps_executed: trace.steps(),
        termination: trace.termination,
    };
    std::fs::create_dir_all(out)?;
    trace.save_csv(&out.join("trace.csv"))?;
    manifest.save(&out.join("manifest.json"))?;

    let last = trace.last();
    let r: Vec<f64> = last.correlations.iter().map(|c| c.unwrap_or(f64::NAN)).collect();
    match argmax(&r) {
        Some(best) => println!(
            "{} steps ({:?}); strongest pattern {best} with r = {:.4}; mean activity {:.4}",
            trace.steps(),
            trace.termination,
            r[best],
            last.mean
        ),
        None => println!(
            "{} steps ({:?}); final state is flat, correlations undefined",
            trace.steps(),
            trace.termination
        ),
    }
    Ok(())
}

pub fn run(args: &SimulateArgs) -> CliResult {
    let plan = plan(args.graph.as_deref(), &args.patterns, &args.model, args.trigger)?;
    execute(&plan, &args.patterns, &args.model, args.trigger, &args.out)
}

/// Rebuilds the run from a manifest and checks the graph fingerprint.
pub fn replay(manifest: &Path, out: &Path) -> CliResult {
    let m = RunManifest::load(manifest)?;
    let flags = ModelFlags {
        a: Some(m.params.a),
        h: Some(m.params.h),
        beta: m.params.beta,
        eta: m.params.eta,
        steps: Some(m.stop.max_steps),
        tol: m.stop.tol,
        seed: m.seed,
        noise_c: m.noise_c,
    };
    let graph = (m.graph != "automaton").then_some(m.graph.as_str());
    let mut plan = plan(graph, &m.patterns, &flags, m.trigger)?;
    plan.params = m.params;
    if plan.graph.fingerprint() != m.graph_fingerprint {
        return Err(Failure::Usage(format!(
            "graph `{}` no longer matches the recorded fingerprint",
            m.graph
        )));
    }
    execute(&plan, &m.patterns, &flags, m.trigger, out)
}
